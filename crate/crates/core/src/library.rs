//! File libraries and segment helpers.

use rand::Rng;

use crate::error::{param, CachingError, Result};
use crate::field::Symbol;

pub type Segment = Vec<Symbol>;

pub fn xor_into(acc: &mut [Symbol], x: &[Symbol]) {
    debug_assert_eq!(acc.len(), x.len());
    for (a, b) in acc.iter_mut().zip(x) {
        *a ^= b;
    }
}

/// `N` files of equal length, each a sequence of symbols of `symbol_bits` bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileLibrary {
    files: Vec<Vec<Symbol>>,
    symbol_bits: u32,
}

impl FileLibrary {
    pub fn new(files: Vec<Vec<Symbol>>, symbol_bits: u32) -> Result<Self> {
        if files.is_empty() {
            return Err(param("library needs at least one file"));
        }
        if !(1..=16).contains(&symbol_bits) {
            return Err(param(format!("symbol width {symbol_bits} not in 1..=16")));
        }
        let len = files[0].len();
        if files.iter().any(|f| f.len() != len) {
            return Err(CachingError::Shape("files differ in length".into()));
        }
        if files.iter().flatten().any(|&s| (s as u32) >> symbol_bits != 0) {
            return Err(param(format!("symbol wider than {symbol_bits} bits")));
        }
        Ok(FileLibrary { files, symbol_bits })
    }

    pub fn random<R: Rng + ?Sized>(n_files: usize, file_len: usize, symbol_bits: u32, rng: &mut R) -> Self {
        let mask = ((1u32 << symbol_bits) - 1) as Symbol;
        let files = (0..n_files).map(|_| (0..file_len).map(|_| rng.gen::<Symbol>() & mask).collect()).collect();
        FileLibrary { files, symbol_bits }
    }

    pub fn zeros(n_files: usize, file_len: usize, symbol_bits: u32) -> Self {
        FileLibrary { files: vec![vec![0; file_len]; n_files], symbol_bits }
    }

    /// The library whose concatenated symbols are the binary digits of `index`,
    /// with one-bit symbols. Used to enumerate every tiny library.
    pub fn from_index(n_files: usize, file_len: usize, index: u64) -> Self {
        let files = (0..n_files)
            .map(|n| (0..file_len).map(|i| (index >> (n * file_len + i) & 1) as Symbol).collect())
            .collect();
        FileLibrary { files, symbol_bits: 1 }
    }

    pub fn n_files(&self) -> usize {
        self.files.len()
    }

    pub fn file_len(&self) -> usize {
        self.files[0].len()
    }

    pub fn symbol_bits(&self) -> u32 {
        self.symbol_bits
    }

    pub fn file(&self, n: usize) -> &[Symbol] {
        &self.files[n]
    }

    /// Splits file `n` into `count` equal subfiles.
    pub fn split(&self, n: usize, count: usize) -> Result<Vec<Segment>> {
        let len = self.file_len();
        if count == 0 || !len.is_multiple_of(count) {
            return Err(CachingError::Shape(format!("file length {len} is not a multiple of {count} subfiles")));
        }
        let sub = len / count;
        Ok((0..count).map(|i| self.files[n][i * sub..(i + 1) * sub].to_vec()).collect())
    }

    /// The library restricted to symbol positions `range` of every file.
    pub fn slice(&self, range: std::ops::Range<usize>) -> FileLibrary {
        FileLibrary { files: self.files.iter().map(|f| f[range.clone()].to_vec()).collect(), symbol_bits: self.symbol_bits }
    }

    /// Checks a decoded payload against file `n`, locating the first mismatch.
    pub fn verify(&self, n: usize, payload: &[Symbol]) -> Result<()> {
        let file = &self.files[n];
        if payload.len() != file.len() {
            return Err(CachingError::Integrity(format!(
                "decoded {} symbols for file {n} of length {}",
                payload.len(),
                file.len()
            )));
        }
        match file.iter().zip(payload).position(|(a, b)| a != b) {
            None => Ok(()),
            Some(i) => Err(CachingError::Integrity(format!(
                "file {n} differs at symbol {i}: expected {}, decoded {}",
                file[i], payload[i]
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_and_verify() {
        let lib = FileLibrary::new(vec![vec![1, 2, 3, 4, 5, 6], vec![0; 6]], 3).unwrap();
        assert_eq!(lib.split(0, 3).unwrap(), vec![vec![1, 2], vec![3, 4], vec![5, 6]]);
        assert!(lib.split(0, 4).is_err());
        assert!(lib.verify(0, &[1, 2, 3, 4, 5, 6]).is_ok());
        let err = lib.verify(0, &[1, 2, 3, 0, 5, 6]).unwrap_err();
        assert!(err.to_string().contains("symbol 3"));
        assert!(FileLibrary::new(vec![vec![8]], 3).is_err());
    }

    #[test]
    fn enumerated_libraries_are_distinct() {
        let all: Vec<_> = (0..16).map(|i| FileLibrary::from_index(2, 2, i)).collect();
        for (i, a) in all.iter().enumerate() {
            assert!(all[i + 1..].iter().all(|b| a != b));
        }
    }
}
