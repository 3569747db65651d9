//! Pieces shared by the two MDS-based schemes.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{param, Result};
use crate::field::Symbol;
use crate::library::{xor_into, FileLibrary, Segment};
use crate::reed_solomon::{Codeword, ReedSolomon};

/// The coded segment `w^{(user)}_{file,m}`: slot `m` of `user`'s share of
/// file `file`, before the per-file permutation picks its coded index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub file: usize,
    pub user: usize,
    pub m: usize,
}

impl Slot {
    pub fn new(file: usize, user: usize, m: usize) -> Slot {
        Slot { file, user, m }
    }
}

impl std::fmt::Display for Slot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "w({})[{},{}]", self.user, self.file, self.m)
    }
}

/// XOR of slots with repeated terms cancelled.
pub fn xor_terms(terms: impl IntoIterator<Item = Slot>) -> Vec<Slot> {
    let mut out: Vec<Slot> = Vec::new();
    for t in terms {
        match out.iter().position(|&x| x == t) {
            Some(i) => {
                out.remove(i);
            }
            None => out.push(t),
        }
    }
    out
}

pub fn random_permutation<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..len).collect();
    p.shuffle(rng);
    p
}

pub fn check_permutation(p: &[usize], len: usize) -> Result<()> {
    let mut seen = vec![false; len];
    if p.len() != len || p.iter().any(|&x| x >= len || std::mem::replace(&mut seen[x], true)) {
        return Err(param(format!("{p:?} is not a permutation of [{len}]")));
    }
    Ok(())
}

/// Every coded segment of every file: `coded[n][i] = W_{n,i}`.
pub fn encode_library(code: &ReedSolomon, library: &FileLibrary) -> Result<Vec<Vec<Segment>>> {
    if library.symbol_bits() > code.field().spec().m() {
        return Err(param(format!(
            "{}-bit symbols do not fit GF(2^{})",
            library.symbol_bits(),
            code.field().spec().m()
        )));
    }
    (0..library.n_files())
        .map(|n| Ok(code.encode(&library.split(n, code.k_dim())?)?.segments))
        .collect()
}

pub fn xor_segments<'a>(len: usize, parts: impl IntoIterator<Item = &'a Segment>) -> Segment {
    let mut acc = vec![0; len];
    for p in parts {
        xor_into(&mut acc, p);
    }
    acc
}

/// Reassembles a file from `(coded index, segment)` pairs.
pub fn reassemble(code: &ReedSolomon, pieces: Vec<(usize, Segment)>) -> Result<Vec<Symbol>> {
    let (indices, segments): (Vec<usize>, Vec<Segment>) = pieces.into_iter().unzip();
    let cw = Codeword { n_code: code.n_code(), k_dim: code.k_dim(), indices, segments };
    let message = code.reconstruct(&cw).map_err(|e| match e {
        crate::error::CachingError::Parameter(msg) => crate::error::CachingError::Integrity(msg),
        other => other,
    })?;
    Ok(message.concat())
}

/// Row of the linear map from file symbols to one XOR of coded segments:
/// `files × k_dim` coefficients.
pub fn coefficient_row(code: &ReedSolomon, files: usize, terms: &[(usize, usize)]) -> Vec<Symbol> {
    let k = code.k_dim();
    let mut row = vec![0; files * k];
    for &(n, idx) in terms {
        for (j, g) in code.generator_row(idx).into_iter().enumerate() {
            row[n * k + j] ^= g;
        }
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_cancels_pairs() {
        let a = Slot::new(0, 1, 2);
        let b = Slot::new(1, 1, 2);
        assert_eq!(xor_terms([a, b, a]), vec![b]);
        assert!(xor_terms([a, a]).is_empty());
    }

    #[test]
    fn permutations_are_checked() {
        assert!(check_permutation(&[2, 0, 1], 3).is_ok());
        assert!(check_permutation(&[2, 2, 1], 3).is_err());
        assert!(check_permutation(&[0, 1], 3).is_err());
    }
}
