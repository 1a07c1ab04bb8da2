//! Reader for the big-endian idx container used by digit datasets.
//!
//! Images: magic 0x00000803, count, rows, cols, then row-major pixel bytes.
//! Labels: magic 0x00000801, count, then one digit byte per sample.
//! Files may be gzip-compressed; compression is sniffed from the 0x1F 0x8B
//! header, not the file name.

use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Decoded digit data: pixels scaled to [0, 1] (no bias slot yet), labels as
/// raw digits 0-9.
#[derive(Debug, Clone)]
pub struct RawDigits {
    pub pixels: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub rows: usize,
    pub cols: usize,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn err(&self, offset: usize, reason: impl Into<String>) -> Error {
        Error::IdxFormat {
            path: self.path.to_path_buf(),
            offset: offset as u64,
            reason: reason.into(),
        }
    }

    fn read_u32(&mut self) -> Result<u32> {
        if self.pos + 4 > self.data.len() {
            return Err(self.err(self.pos, "unexpected end of data reading u32"));
        }
        let bytes: [u8; 4] = self.data[self.pos..self.pos + 4].try_into().unwrap();
        self.pos += 4;
        Ok(u32::from_be_bytes(bytes))
    }

    fn read_bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(self.err(
                self.pos,
                format!(
                    "unexpected end of data: need {n} bytes, {} remain",
                    self.data.len() - self.pos
                ),
            ));
        }
        let slice = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }
}

fn read_maybe_gzip(path: &Path) -> Result<Vec<u8>> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let raw = std::fs::read(path).map_err(io_err)?;
    if raw.len() >= 2 && raw[0] == 0x1F && raw[1] == 0x8B {
        let mut decoded = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut decoded)
            .map_err(io_err)?;
        Ok(decoded)
    } else {
        Ok(raw)
    }
}

/// Loads an image/label file pair, checking magic numbers and that sample
/// counts agree.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<RawDigits> {
    let image_data = read_maybe_gzip(images_path)?;
    let mut cur = Cursor {
        data: &image_data,
        pos: 0,
        path: images_path,
    };
    let magic = cur.read_u32()?;
    if magic != IMAGES_MAGIC {
        return Err(cur.err(0, format!("bad magic 0x{magic:08x}, expected 0x{IMAGES_MAGIC:08x}")));
    }
    let count = cur.read_u32()? as usize;
    let rows = cur.read_u32()? as usize;
    let cols = cur.read_u32()? as usize;
    if rows == 0 || cols == 0 {
        return Err(cur.err(8, format!("degenerate image shape {rows}x{cols}")));
    }
    let per_image = rows * cols;
    let mut pixels = Vec::with_capacity(count);
    for _ in 0..count {
        let bytes = cur.read_bytes(per_image)?;
        pixels.push(bytes.iter().map(|&b| f64::from(b) / 255.0).collect());
    }

    let label_data = read_maybe_gzip(labels_path)?;
    let mut cur = Cursor {
        data: &label_data,
        pos: 0,
        path: labels_path,
    };
    let magic = cur.read_u32()?;
    if magic != LABELS_MAGIC {
        return Err(cur.err(0, format!("bad magic 0x{magic:08x}, expected 0x{LABELS_MAGIC:08x}")));
    }
    let label_count = cur.read_u32()? as usize;
    if label_count != count {
        return Err(cur.err(
            4,
            format!("label count {label_count} does not match image count {count}"),
        ));
    }
    let labels = cur.read_bytes(label_count)?.to_vec();
    if let Some(i) = labels.iter().position(|&d| d > 9) {
        let offset = 8 + i;
        return Err(Error::IdxFormat {
            path: labels_path.to_path_buf(),
            offset: offset as u64,
            reason: format!("label byte {} is not a digit", labels[i]),
        });
    }

    Ok(RawDigits {
        pixels,
        labels,
        rows,
        cols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{binarize, to_samples, LabelScheme};
    use std::io::Write;

    fn write_images(path: &Path, images: &[Vec<u8>], rows: u32, cols: u32) {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
        bytes.extend_from_slice(&(images.len() as u32).to_be_bytes());
        bytes.extend_from_slice(&rows.to_be_bytes());
        bytes.extend_from_slice(&cols.to_be_bytes());
        for img in images {
            bytes.extend_from_slice(img);
        }
        std::fs::write(path, bytes).unwrap();
    }

    fn write_labels(path: &Path, labels: &[u8], gzip: bool) {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
        bytes.extend_from_slice(&(labels.len() as u32).to_be_bytes());
        bytes.extend_from_slice(labels);
        if gzip {
            let mut enc =
                flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::fast());
            enc.write_all(&bytes).unwrap();
            std::fs::write(path, enc.finish().unwrap()).unwrap();
        } else {
            std::fs::write(path, bytes).unwrap();
        }
    }

    #[test]
    fn roundtrip_small_files_with_gzip_labels() {
        let dir = tempfile::tempdir().unwrap();
        let imgs: Vec<Vec<u8>> = vec![vec![0u8; 4], vec![255u8; 4], vec![51u8; 4]];
        let img_path = dir.path().join("images.idx");
        let lbl_path = dir.path().join("labels.idx.gz");
        write_images(&img_path, &imgs, 2, 2);
        write_labels(&lbl_path, &[7, 0, 3], true);

        let raw = load_idx(&img_path, &lbl_path).unwrap();
        assert_eq!(raw.pixels.len(), 3);
        assert_eq!(raw.rows, 2);
        assert_eq!(raw.labels, vec![7, 0, 3]);
        assert_eq!(raw.pixels[0], vec![0.0; 4]);
        assert_eq!(raw.pixels[1], vec![1.0; 4]);
        assert!((raw.pixels[2][0] - 0.2).abs() < 1e-12);

        let samples = to_samples(&raw, LabelScheme::SvmLinear).unwrap();
        assert_eq!(samples[0].x.dim(), 5);
        assert_eq!(samples[0].x.as_slice()[4], 1.0);
        // label byte 7 is odd -> -1 under the svm scheme
        assert_eq!(samples[0].y, -1.0);
        assert_eq!(samples[0].y, binarize(7, LabelScheme::SvmLinear));
        // all-zero image stays all zero apart from the bias slot
        assert_eq!(&samples[0].x.as_slice()[..4], &[0.0; 4]);
    }

    #[test]
    fn bad_magic_reports_offset_zero() {
        let dir = tempfile::tempdir().unwrap();
        let img_path = dir.path().join("junk.idx");
        std::fs::write(&img_path, 0xdeadbeefu32.to_be_bytes()).unwrap();
        let lbl_path = dir.path().join("labels.idx");
        write_labels(&lbl_path, &[1], false);
        match load_idx(&img_path, &lbl_path) {
            Err(Error::IdxFormat { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_image_data_reports_offset() {
        let dir = tempfile::tempdir().unwrap();
        let img_path = dir.path().join("short.idx");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
        bytes.extend_from_slice(&2u32.to_be_bytes());
        bytes.extend_from_slice(&2u32.to_be_bytes());
        bytes.extend_from_slice(&2u32.to_be_bytes());
        bytes.extend_from_slice(&[9u8; 4]); // only one of two images
        std::fs::write(&img_path, bytes).unwrap();
        let lbl_path = dir.path().join("labels.idx");
        write_labels(&lbl_path, &[1, 2], false);
        match load_idx(&img_path, &lbl_path) {
            Err(Error::IdxFormat { offset, .. }) => assert_eq!(offset, 20),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn count_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let img_path = dir.path().join("images.idx");
        write_images(&img_path, &[vec![1u8; 4]], 2, 2);
        let lbl_path = dir.path().join("labels.idx");
        write_labels(&lbl_path, &[1, 2], false);
        assert!(matches!(
            load_idx(&img_path, &lbl_path),
            Err(Error::IdxFormat { .. })
        ));
    }

    #[test]
    fn non_digit_label_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let img_path = dir.path().join("images.idx");
        write_images(&img_path, &[vec![1u8; 4]], 2, 2);
        let lbl_path = dir.path().join("labels.idx");
        write_labels(&lbl_path, &[11], false);
        assert!(matches!(
            load_idx(&img_path, &lbl_path),
            Err(Error::IdxFormat { .. })
        ));
    }
}
