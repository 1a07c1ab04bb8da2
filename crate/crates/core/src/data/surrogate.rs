//! Stand-in digit dataset written in the idx container format.
//!
//! Real handwritten-digit files are tens of megabytes and cannot be bundled,
//! so tests and demos generate a look-alike: ten seeded 28x28 prototype
//! patterns (one per digit), each sample a noisy copy of its digit's
//! prototype. The even/odd split of the ten prototypes is linearly separable
//! but noisy enough that training curves have realistic shape.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::rng::{SeededRng, Stream};

pub const ROWS: usize = 28;
pub const COLS: usize = 28;

/// Per-pixel noise, in raw byte units.
const NOISE_SIGMA: f64 = 48.0;

/// Per-pixel magnitude of the parity component, in raw byte units. Even and
/// odd digits shift in opposite directions along a fixed sign pattern, the
/// way real even/odd digit classes admit a linear separator; subtle per
/// pixel, decisive across 784 of them.
const PARITY_SHIFT: f64 = 3.0;

#[derive(Debug, Clone)]
pub struct SurrogatePaths {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

fn box_blur(field: &mut [f64]) {
    let mut out = vec![0.0; field.len()];
    for r in 0..ROWS {
        for c in 0..COLS {
            let mut sum = 0.0;
            let mut count = 0.0;
            for dr in -1i32..=1 {
                for dc in -1i32..=1 {
                    let rr = r as i32 + dr;
                    let cc = c as i32 + dc;
                    if (0..ROWS as i32).contains(&rr) && (0..COLS as i32).contains(&cc) {
                        sum += field[(rr as usize) * COLS + cc as usize];
                        count += 1.0;
                    }
                }
            }
            out[r * COLS + c] = sum / count;
        }
    }
    field.copy_from_slice(&out);
}

fn prototypes(rng: &mut SeededRng) -> Vec<Vec<f64>> {
    // Zero-sum sign pattern: the parity component is orthogonal to overall
    // image brightness, so it carries class information without shifting
    // the mean pixel level.
    let mut parity_pattern: Vec<f64> = (0..ROWS * COLS)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    rng.shuffle(&mut parity_pattern);
    (0..10u8)
        .map(|digit| {
            let mut field: Vec<f64> =
                (0..ROWS * COLS).map(|_| 30.0 + 190.0 * rng.uniform()).collect();
            box_blur(&mut field);
            box_blur(&mut field);
            let parity = if digit % 2 == 0 { 1.0 } else { -1.0 };
            for (f, u) in field.iter_mut().zip(&parity_pattern) {
                *f += parity * PARITY_SHIFT * u;
            }
            field
        })
        .collect()
}

fn render(rng: &mut SeededRng, prototype: &[f64]) -> Vec<u8> {
    prototype
        .iter()
        .map(|&p| (p + NOISE_SIGMA * rng.normal()).clamp(0.0, 255.0) as u8)
        .collect()
}

fn balanced_labels(rng: &mut SeededRng, count: usize) -> Vec<u8> {
    let mut labels: Vec<u8> = (0..count).map(|i| (i % 10) as u8).collect();
    rng.shuffle(&mut labels);
    labels
}

fn write_file(path: &Path, bytes: &[u8], gzip: bool) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if gzip {
        let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::fast());
        enc.write_all(bytes).map_err(io_err)?;
        std::fs::write(path, enc.finish().map_err(io_err)?).map_err(io_err)
    } else {
        std::fs::write(path, bytes).map_err(io_err)
    }
}

fn image_file(images: &[Vec<u8>]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(16 + images.len() * ROWS * COLS);
    bytes.extend_from_slice(&0x0000_0803u32.to_be_bytes());
    bytes.extend_from_slice(&(images.len() as u32).to_be_bytes());
    bytes.extend_from_slice(&(ROWS as u32).to_be_bytes());
    bytes.extend_from_slice(&(COLS as u32).to_be_bytes());
    for img in images {
        bytes.extend_from_slice(img);
    }
    bytes
}

fn label_file(labels: &[u8]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(8 + labels.len());
    bytes.extend_from_slice(&0x0000_0801u32.to_be_bytes());
    bytes.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    bytes.extend_from_slice(labels);
    bytes
}

/// Writes train/test image and label files under `dir`. The test pair is
/// gzip-compressed so both loader paths get exercised by ordinary use.
pub fn generate_idx_files(
    dir: &Path,
    train: usize,
    test: usize,
    seed: u64,
) -> Result<SurrogatePaths> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut rng = SeededRng::new(seed, Stream::Pixels);
    let protos = prototypes(&mut rng);

    let train_labels = balanced_labels(&mut rng, train);
    let train_images: Vec<Vec<u8>> = train_labels
        .iter()
        .map(|&d| render(&mut rng, &protos[d as usize]))
        .collect();
    let test_labels = balanced_labels(&mut rng, test);
    let test_images: Vec<Vec<u8>> = test_labels
        .iter()
        .map(|&d| render(&mut rng, &protos[d as usize]))
        .collect();

    let paths = SurrogatePaths {
        train_images: dir.join("train-images.idx"),
        train_labels: dir.join("train-labels.idx"),
        test_images: dir.join("test-images.idx.gz"),
        test_labels: dir.join("test-labels.idx.gz"),
    };
    write_file(&paths.train_images, &image_file(&train_images), false)?;
    write_file(&paths.train_labels, &label_file(&train_labels), false)?;
    write_file(&paths.test_images, &image_file(&test_images), true)?;
    write_file(&paths.test_labels, &label_file(&test_labels), true)?;
    Ok(paths)
}
