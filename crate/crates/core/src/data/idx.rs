//! IDX file parsing (the MNIST on-disk format).
//!
//! Layout: a 4-byte big-endian magic (0x00000803 for images with three
//! dimension fields, 0x00000801 for labels with one), big-endian u32
//! dimension sizes, then the raw u8 payload. Gzip-compressed files are
//! detected by their leading bytes and decoded transparently.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

use super::{Dataset, SplitTag};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

struct Cursor<'a> {
    bytes: &'a [u8],
    offset: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn format_err(&self, detail: impl Into<String>) -> Error {
        Error::Format {
            path: self.path.to_path_buf(),
            detail: detail.into(),
            offset: self.offset as u64,
        }
    }

    fn read_u32(&mut self) -> Result<u32> {
        if self.bytes.len() < self.offset + 4 {
            return Err(self.format_err(format!(
                "expected 4 header bytes, only {} available",
                self.bytes.len() - self.offset
            )));
        }
        let v = u32::from_be_bytes(
            self.bytes[self.offset..self.offset + 4]
                .try_into()
                .unwrap(),
        );
        self.offset += 4;
        Ok(v)
    }

    fn read_payload(&mut self, expected: usize) -> Result<&'a [u8]> {
        let available = self.bytes.len() - self.offset;
        if available != expected {
            return Err(self.format_err(format!(
                "payload of {expected} bytes expected, {available} present"
            )));
        }
        let slice = &self.bytes[self.offset..];
        self.offset = self.bytes.len();
        Ok(slice)
    }
}

fn read_maybe_gzipped(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path)?;
    if raw.len() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::Format {
                path: path.to_path_buf(),
                detail: format!("gzip decode failed: {e}"),
                offset: 0,
            })?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Load an IDX image/label file pair into a dataset.
///
/// Pixels are scaled to [0, 1]; the class count is `max(label) + 1`.
pub fn load_mnist_idx(
    image_path: impl AsRef<Path>,
    label_path: impl AsRef<Path>,
) -> Result<Dataset> {
    let image_path: PathBuf = image_path.as_ref().to_path_buf();
    let label_path: PathBuf = label_path.as_ref().to_path_buf();

    let image_bytes = read_maybe_gzipped(&image_path)?;
    let mut cur = Cursor {
        bytes: &image_bytes,
        offset: 0,
        path: &image_path,
    };
    let magic = cur.read_u32()?;
    if magic != IMAGE_MAGIC {
        cur.offset = 0;
        return Err(cur.format_err(format!(
            "bad image magic {magic:#010x}, expected {IMAGE_MAGIC:#010x}"
        )));
    }
    let count = cur.read_u32()? as usize;
    let rows = cur.read_u32()? as usize;
    let cols = cur.read_u32()? as usize;
    let pixels = cur.read_payload(count * rows * cols)?;

    let label_bytes = read_maybe_gzipped(&label_path)?;
    let mut cur = Cursor {
        bytes: &label_bytes,
        offset: 0,
        path: &label_path,
    };
    let magic = cur.read_u32()?;
    if magic != LABEL_MAGIC {
        cur.offset = 0;
        return Err(cur.format_err(format!(
            "bad label magic {magic:#010x}, expected {LABEL_MAGIC:#010x}"
        )));
    }
    let label_count = cur.read_u32()? as usize;
    if label_count != count {
        return Err(cur.format_err(format!(
            "label count {label_count} does not match image count {count}"
        )));
    }
    let raw_labels = cur.read_payload(label_count)?;

    let features: Vec<f32> = pixels.iter().map(|&b| f32::from(b) / 255.0).collect();
    let labels: Vec<usize> = raw_labels.iter().map(|&b| b as usize).collect();
    let classes = labels.iter().max().map_or(0, |&m| m + 1);

    let mut ds = Dataset::from_parts(
        features,
        rows * cols,
        labels,
        classes,
        &format!(
            "idx(images={}, labels={})",
            image_path.display(),
            label_path.display()
        ),
    )?;
    ds.split = SplitTag::Unsplit;
    Ok(ds)
}
