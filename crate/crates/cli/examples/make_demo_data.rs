//! Writes a stand-in digit dataset in the idx container format, for driving
//! the simulator when the real files are not at hand.
//!
//! Usage: make_demo_data <dir> [train] [test] [seed]

use mfl_core::data::surrogate::generate_idx_files;

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| {
        eprintln!("usage: make_demo_data <dir> [train] [test] [seed]");
        std::process::exit(2);
    });
    let train: usize = args.next().map(|v| v.parse().unwrap()).unwrap_or(50_000);
    let test: usize = args.next().map(|v| v.parse().unwrap()).unwrap_or(10_000);
    let seed: u64 = args.next().map(|v| v.parse().unwrap()).unwrap_or(90210);
    match generate_idx_files(std::path::Path::new(&dir), train, test, seed) {
        Ok(paths) => {
            println!("wrote {}", paths.train_images.display());
            println!("wrote {}", paths.train_labels.display());
            println!("wrote {}", paths.test_images.display());
            println!("wrote {}", paths.test_labels.display());
        }
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(2);
        }
    }
}
