// SPDX-License-Identifier: Apache-2.0

//! Image and label readers: IDX (the MNIST container) and plain CSV.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("bad IDX file: {0}")]
    Idx(String),
    #[error("bad CSV line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

/// 8-bit grayscale images stored row-major, one after another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Images {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl Images {
    pub fn len(&self) -> usize {
        self.pixels.len().checked_div(self.rows * self.cols).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.rows * self.cols;
        &self.pixels[i * n..(i + 1) * n]
    }

    /// Pixels of image `i` as reals in `0..=255`.
    pub fn image_f64(&self, i: usize) -> Vec<f64> {
        self.image(i).iter().map(|&p| p as f64).collect()
    }

    pub fn truncate(&mut self, n: usize) {
        self.pixels.truncate(n * self.rows * self.cols);
    }
}

fn idx_header(bytes: &[u8], dims: usize) -> Result<Vec<usize>, DatasetError> {
    if bytes.len() < 4 + 4 * dims {
        return Err(DatasetError::Idx("truncated header".into()));
    }
    if bytes[0] != 0 || bytes[1] != 0 || bytes[2] != 0x08 {
        return Err(DatasetError::Idx("only unsigned-byte IDX files are supported".into()));
    }
    if bytes[3] as usize != dims {
        return Err(DatasetError::Idx(format!("expected {dims} dimensions, found {}", bytes[3])));
    }
    Ok((0..dims)
        .map(|d| u32::from_be_bytes(bytes[4 + 4 * d..8 + 4 * d].try_into().expect("4 bytes")) as usize)
        .collect())
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<Images, DatasetError> {
    let d = idx_header(bytes, 3)?;
    let body = &bytes[16..];
    if body.len() != d[0] * d[1] * d[2] {
        return Err(DatasetError::Idx(format!("{} pixel bytes for {}x{}x{}", body.len(), d[0], d[1], d[2])));
    }
    Ok(Images { rows: d[1], cols: d[2], pixels: body.to_vec() })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, DatasetError> {
    let d = idx_header(bytes, 1)?;
    let body = &bytes[8..];
    if body.len() != d[0] {
        return Err(DatasetError::Idx(format!("{} label bytes for {} labels", body.len(), d[0])));
    }
    Ok(body.to_vec())
}

/// One image per line, comma separated. Lines with `pixels + 1` values carry
/// a trailing label. Blank lines and lines starting with `#` are skipped.
pub fn parse_csv(text: &str, rows: usize, cols: usize) -> Result<(Images, Option<Vec<u8>>), DatasetError> {
    let n = rows * cols;
    let mut pixels = Vec::new();
    let mut labels = Vec::new();
    let mut labelled = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| DatasetError::Csv { line: i + 1, msg };
        let values: Vec<u8> = line
            .split(',')
            .map(|v| v.trim().parse::<u8>().map_err(|e| err(format!("{v:?}: {e}"))))
            .collect::<Result<_, _>>()?;
        let has_label = match values.len() {
            l if l == n => false,
            l if l == n + 1 => true,
            l => return Err(err(format!("{l} values, expected {n} or {}", n + 1))),
        };
        if *labelled.get_or_insert(has_label) != has_label {
            return Err(err("mixed labelled and unlabelled rows".into()));
        }
        pixels.extend_from_slice(&values[..n]);
        if has_label {
            labels.push(values[n]);
        }
    }
    Ok((Images { rows, cols, pixels }, (labelled == Some(true)).then_some(labels)))
}

/// Reads images from an IDX file, or CSV when the extension is `.csv`.
/// CSV labels, if present, come back alongside.
pub fn read_images(path: &Path, rows: usize, cols: usize) -> Result<(Images, Option<Vec<u8>>), DatasetError> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        parse_csv(&std::fs::read_to_string(path)?, rows, cols)
    } else {
        Ok((parse_idx_images(&std::fs::read(path)?)?, None))
    }
}

pub fn read_labels(path: &Path) -> Result<Vec<u8>, DatasetError> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let text = std::fs::read_to_string(path)?;
        text.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .enumerate()
            .map(|(i, s)| s.parse::<u8>().map_err(|e| DatasetError::Csv { line: i + 1, msg: e.to_string() }))
            .collect()
    } else {
        parse_idx_labels(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx3(n: u32, r: u32, c: u32, body: &[u8]) -> Vec<u8> {
        let mut v = vec![0, 0, 8, 3];
        for d in [n, r, c] {
            v.extend_from_slice(&d.to_be_bytes());
        }
        v.extend_from_slice(body);
        v
    }

    #[test]
    fn idx_round_trip() {
        let imgs = parse_idx_images(&idx3(2, 1, 2, &[1, 2, 3, 4])).unwrap();
        assert_eq!(imgs.len(), 2);
        assert_eq!(imgs.image(1), &[3, 4]);
        let labels = parse_idx_labels(&[0, 0, 8, 1, 0, 0, 0, 2, 7, 9]).unwrap();
        assert_eq!(labels, vec![7, 9]);
    }

    #[test]
    fn idx_rejects_bad_sizes() {
        assert!(parse_idx_images(&idx3(2, 1, 2, &[1, 2, 3])).is_err());
        assert!(parse_idx_images(&[0, 0, 9, 3]).is_err());
        assert!(parse_idx_labels(&idx3(1, 1, 1, &[0])).is_err());
    }

    #[test]
    fn csv_with_and_without_labels() {
        let (imgs, labels) = parse_csv("1,2,3,4,5\n# note\n6,7,8,9,0\n", 2, 2).unwrap();
        assert_eq!(imgs.len(), 2);
        assert_eq!(labels, Some(vec![5, 0]));
        let (_, labels) = parse_csv("1,2,3,4\n", 2, 2).unwrap();
        assert_eq!(labels, None);
        assert!(parse_csv("1,2,3,4\n1,2,3,4,5\n", 2, 2).is_err());
        assert!(parse_csv("1,2,300,4\n", 2, 2).is_err());
    }
}
