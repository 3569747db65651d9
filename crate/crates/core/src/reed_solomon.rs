//! Reed–Solomon codes by polynomial evaluation.
//!
//! The message subfiles are the coefficients of a polynomial (lowest degree
//! first); coded segment `i` is its evaluation at the field element `i + 1`,
//! applied independently at every symbol position.

use crate::error::{param, CachingError, Result};
use crate::field::{Field, FieldSpec, Symbol};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub n_code: usize,
    pub k_dim: usize,
    pub indices: Vec<usize>,
    pub segments: Vec<Vec<Symbol>>,
}

impl Codeword {
    pub fn subset(&self, picks: &[usize]) -> Codeword {
        Codeword {
            n_code: self.n_code,
            k_dim: self.k_dim,
            indices: picks.iter().map(|&p| self.indices[p]).collect(),
            segments: picks.iter().map(|&p| self.segments[p].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReedSolomon {
    field: Field,
    n_code: usize,
    k_dim: usize,
}

impl ReedSolomon {
    /// Builds the code over the smallest field that fits `n_code` points.
    pub fn new(n_code: usize, k_dim: usize) -> Result<Self> {
        Self::with_field(Field::new(FieldSpec::for_code_len(n_code)?), n_code, k_dim)
    }

    pub fn with_field(field: Field, n_code: usize, k_dim: usize) -> Result<Self> {
        if k_dim == 0 || k_dim > n_code {
            return Err(param(format!("need 1 <= k_dim <= n_code, got ({n_code}, {k_dim})")));
        }
        if n_code > field.spec().nonzero_count() {
            return Err(param(format!(
                "code length {n_code} exceeds the {} nonzero elements of GF(2^{})",
                field.spec().nonzero_count(),
                field.spec().m()
            )));
        }
        Ok(ReedSolomon { field, n_code, k_dim })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn n_code(&self) -> usize {
        self.n_code
    }

    pub fn k_dim(&self) -> usize {
        self.k_dim
    }

    pub fn point(&self, index: usize) -> Symbol {
        (index + 1) as Symbol
    }

    /// Coefficients mapping the message to coded segment `index`.
    pub fn generator_row(&self, index: usize) -> Vec<Symbol> {
        (0..self.k_dim).map(|j| self.field.pow(self.point(index), j)).collect()
    }

    pub fn encode(&self, message: &[Vec<Symbol>]) -> Result<Codeword> {
        if message.len() != self.k_dim {
            return Err(CachingError::Shape(format!(
                "message has {} subfiles, code dimension is {}",
                message.len(),
                self.k_dim
            )));
        }
        let len = message[0].len();
        if message.iter().any(|m| m.len() != len) {
            return Err(CachingError::Shape("message subfiles differ in length".into()));
        }
        if message.iter().flatten().any(|&s| !self.field.contains(s)) {
            return Err(param("message symbol outside the field"));
        }
        let f = self.field;
        let segments = (0..self.n_code)
            .map(|i| {
                let x = self.point(i);
                (0..len)
                    .map(|pos| message.iter().rev().fold(0, |acc, coeff| f.mul(acc, x) ^ coeff[pos]))
                    .collect()
            })
            .collect();
        Ok(Codeword { n_code: self.n_code, k_dim: self.k_dim, indices: (0..self.n_code).collect(), segments })
    }

    /// Recovers the message from exactly `k_dim` segments with distinct indices.
    pub fn reconstruct(&self, partial: &Codeword) -> Result<Vec<Vec<Symbol>>> {
        if partial.indices.len() != partial.segments.len() {
            return Err(CachingError::Shape("index and segment counts differ".into()));
        }
        if partial.indices.len() < self.k_dim {
            return Err(CachingError::InsufficientData { needed: self.k_dim, got: partial.indices.len() });
        }
        if partial.indices.len() > self.k_dim {
            return Err(param(format!("expected exactly {} segments, got {}", self.k_dim, partial.indices.len())));
        }
        for (a, &i) in partial.indices.iter().enumerate() {
            if i >= self.n_code {
                return Err(param(format!("segment index {i} out of range for n_code {}", self.n_code)));
            }
            if partial.indices[..a].contains(&i) {
                return Err(param(format!("duplicate segment index {i}")));
            }
        }
        let len = partial.segments[0].len();
        if partial.segments.iter().any(|s| s.len() != len) {
            return Err(CachingError::Shape("segments differ in length".into()));
        }
        let basis = self.lagrange_basis(&partial.indices)?;
        let f = self.field;
        let mut message = vec![vec![0; len]; self.k_dim];
        for (row, seg) in basis.iter().zip(&partial.segments) {
            for (c, &b) in row.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                for (out, &y) in message[c].iter_mut().zip(seg) {
                    *out ^= f.mul(b, y);
                }
            }
        }
        Ok(message)
    }

    /// Row j holds the coefficients of the j-th Lagrange basis polynomial.
    fn lagrange_basis(&self, indices: &[usize]) -> Result<Vec<Vec<Symbol>>> {
        let f = self.field;
        let xs: Vec<Symbol> = indices.iter().map(|&i| self.point(i)).collect();
        xs.iter()
            .enumerate()
            .map(|(j, &xj)| {
                let mut numer = vec![1];
                let mut denom = 1;
                for (i, &xi) in xs.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let mut next = vec![0; numer.len() + 1];
                    for (d, &c) in numer.iter().enumerate() {
                        next[d + 1] ^= c;
                        next[d] ^= f.mul(c, xi);
                    }
                    numer = next;
                    denom = f.mul(denom, xj ^ xi);
                }
                let scale = f.inv(denom)?;
                Ok(numer.into_iter().map(|c| f.mul(c, scale)).collect())
            })
            .collect()
    }
}
