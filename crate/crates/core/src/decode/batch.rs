//! Bit-packed storage for sampled shots and its on-disk format.
//!
//! Detector and observable outcomes are stored as dense row-major bit
//! matrices (one row per shot) so that million-shot batches stay compact and
//! can be scanned word-at-a-time. The file format is a single JSON header
//! line followed by the raw little-endian `u64` words of the detector matrix
//! and then the observable matrix.

use std::io::{BufRead, Read as IoRead, Write as IoWrite};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major bit matrix backed by `u64` words.
///
/// Every row occupies `row_words` whole words (at least one), so rows can be
/// handed out as independent `&mut [u64]` slices for parallel filling.
/// Unused padding bits in the last word of each row are kept at zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    row_words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    /// All-zero matrix with the given shape.
    pub fn new(rows: usize, cols: usize) -> Self {
        let row_words = cols.div_ceil(64).max(1);
        BitMatrix { rows, cols, row_words, data: vec![0u64; rows * row_words] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Words per row (constant across rows, at least one).
    pub fn row_words(&self) -> usize {
        self.row_words
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        let w = self.data[r * self.row_words + c / 64];
        (w >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.row_words + c / 64];
        if v {
            *w |= 1u64 << (c % 64);
        } else {
            *w &= !(1u64 << (c % 64));
        }
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.row_words..(r + 1) * self.row_words]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.row_words..(r + 1) * self.row_words]
    }

    /// Whole backing store, for splitting into per-row chunks.
    pub fn data_mut(&mut self) -> &mut [u64] {
        &mut self.data
    }

    /// Indices of set bits in row `r`, ascending.
    pub fn iter_row(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        let words = self.row(r);
        let cols = self.cols;
        words.iter().enumerate().flat_map(move |(wi, &w)| {
            let mut rem = w;
            std::iter::from_fn(move || {
                if rem == 0 {
                    return None;
                }
                let b = rem.trailing_zeros() as usize;
                rem &= rem - 1;
                Some(wi * 64 + b)
            })
        })
        .take_while(move |&c| c < cols)
    }

    /// Number of set bits in row `r`.
    pub fn count_row(&self, r: usize) -> u32 {
        self.row(r).iter().map(|w| w.count_ones()).sum()
    }

    /// Number of set bits in the whole matrix.
    pub fn count_ones(&self) -> u64 {
        self.data.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    fn write_words(&self, w: &mut impl IoWrite) -> Result<()> {
        let mut buf = Vec::with_capacity(self.data.len() * 8);
        for word in &self.data {
            buf.extend_from_slice(&word.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    fn read_words(rows: usize, cols: usize, r: &mut impl IoRead) -> Result<Self> {
        let mut m = BitMatrix::new(rows, cols);
        let mut buf = vec![0u8; m.data.len() * 8];
        r.read_exact(&mut buf)?;
        for (i, chunk) in buf.chunks_exact(8).enumerate() {
            m.data[i] = u64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        }
        Ok(m)
    }
}

#[derive(Serialize, Deserialize)]
struct BatchHeader {
    format: String,
    version: u32,
    n_shots: usize,
    n_detectors: usize,
    n_observables: usize,
    seed: u64,
}

/// A batch of sampled shots: per-shot detector events and observable flips.
///
/// Bit `(s, d)` of `detectors` is 1 iff detector `d` fired in shot `s`;
/// bit `(s, o)` of `observables` is 1 iff logical observable `o` flipped.
/// Given the same circuit and seed, shot `s` is bit-exact regardless of how
/// the batch was chunked or how many worker threads produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct ShotBatch {
    pub seed: u64,
    pub detectors: BitMatrix,
    pub observables: BitMatrix,
}

impl ShotBatch {
    pub fn n_shots(&self) -> usize {
        self.detectors.rows()
    }

    pub fn n_detectors(&self) -> usize {
        self.detectors.cols()
    }

    pub fn n_observables(&self) -> usize {
        self.observables.cols()
    }

    /// Write header line plus raw bit-matrix words.
    pub fn write_to(&self, w: &mut impl IoWrite) -> Result<()> {
        let header = BatchHeader {
            format: "shot_batch".into(),
            version: 1,
            n_shots: self.n_shots(),
            n_detectors: self.n_detectors(),
            n_observables: self.n_observables(),
            seed: self.seed,
        };
        serde_json::to_writer(&mut *w, &header)?;
        w.write_all(b"\n")?;
        self.detectors.write_words(w)?;
        self.observables.write_words(w)?;
        Ok(())
    }

    pub fn read_from(r: &mut impl BufRead) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        let header: BatchHeader = serde_json::from_str(line.trim_end())?;
        if header.format != "shot_batch" {
            return Err(Error::Format(format!(
                "expected shot_batch header, found '{}'",
                header.format
            )));
        }
        if header.version != 1 {
            return Err(Error::Format(format!(
                "unsupported shot_batch version {}",
                header.version
            )));
        }
        let detectors = BitMatrix::read_words(header.n_shots, header.n_detectors, r)?;
        let observables = BitMatrix::read_words(header.n_shots, header.n_observables, r)?;
        Ok(ShotBatch { seed: header.seed, detectors, observables })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_roundtrip() {
        let mut m = BitMatrix::new(3, 130);
        m.set(0, 0, true);
        m.set(1, 63, true);
        m.set(1, 64, true);
        m.set(2, 129, true);
        assert!(m.get(0, 0) && m.get(1, 63) && m.get(1, 64) && m.get(2, 129));
        assert!(!m.get(0, 1) && !m.get(2, 128));
        assert_eq!(m.count_ones(), 4);
        assert_eq!(m.iter_row(1).collect::<Vec<_>>(), vec![63, 64]);
        m.set(1, 63, false);
        assert!(!m.get(1, 63));
        assert_eq!(m.count_row(1), 1);
    }

    #[test]
    fn zero_column_matrix_still_has_rows() {
        let m = BitMatrix::new(4, 0);
        assert_eq!(m.row_words(), 1);
        assert_eq!(m.row(3).len(), 1);
        assert_eq!(m.iter_row(0).count(), 0);
    }

    #[test]
    fn batch_file_roundtrip() {
        let mut det = BitMatrix::new(5, 70);
        let mut obs = BitMatrix::new(5, 2);
        det.set(0, 3, true);
        det.set(4, 69, true);
        obs.set(2, 1, true);
        let batch = ShotBatch { seed: 42, detectors: det, observables: obs };

        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("batch.bin");
        batch.save(&path).expect("save");
        let back = ShotBatch::load(&path).expect("load");
        assert_eq!(back, batch);
        assert_eq!(back.seed, 42);
        assert_eq!(back.n_shots(), 5);
        assert_eq!(back.n_detectors(), 70);
        assert_eq!(back.n_observables(), 2);
    }

    #[test]
    fn header_mismatch_is_rejected() {
        let mut buf: Vec<u8> = Vec::new();
        let batch = ShotBatch {
            seed: 7,
            detectors: BitMatrix::new(1, 1),
            observables: BitMatrix::new(1, 1),
        };
        batch.write_to(&mut buf).expect("write");
        let mut text = String::from_utf8(buf).expect("utf8 header");
        text = text.replace("shot_batch", "other_fmt");
        let mut rd = std::io::BufReader::new(text.as_bytes());
        assert!(ShotBatch::read_from(&mut rd).is_err());
    }
}
