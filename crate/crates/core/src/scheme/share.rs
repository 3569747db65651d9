//! Memory sharing: run two schemes on complementary fractions of every file.

use num_integer::Integer;
use num_traits::{One, Zero};

use super::Scheme;
use crate::bounds::Rational;
use crate::error::{param, CachingError, Result};

#[derive(Debug, Clone)]
pub struct MemoryShare {
    first: Scheme,
    second: Scheme,
    alpha: Rational,
}

impl MemoryShare {
    /// The first scheme serves the leading `alpha` fraction of each file.
    pub fn new(first: Scheme, second: Scheme, alpha: Rational) -> Result<Self> {
        if (first.files(), first.users()) != (second.files(), second.users()) {
            return Err(param("shared schemes must agree on N and K"));
        }
        if alpha < Rational::zero() || alpha > Rational::one() {
            return Err(param(format!("alpha = {alpha} outside [0, 1]")));
        }
        Ok(MemoryShare { first, second, alpha })
    }

    pub fn first(&self) -> &Scheme {
        &self.first
    }

    pub fn second(&self) -> &Scheme {
        &self.second
    }

    pub fn alpha(&self) -> Rational {
        self.alpha
    }

    /// Shortest file length the split accepts; its multiples are accepted too.
    pub fn file_len_unit(&self) -> usize {
        let (u1, u2) = (self.first.file_len_unit(), self.second.file_len_unit());
        if self.alpha.is_zero() {
            return u2;
        }
        if self.alpha.is_one() {
            return u1;
        }
        let bound = *self.alpha.denom() as usize * u1.lcm(&u2);
        (1..=bound).find(|&len| self.fits(len)).unwrap_or(bound)
    }

    fn fits(&self, file_len: usize) -> bool {
        let (p, q) = (*self.alpha.numer() as usize, *self.alpha.denom() as usize);
        let head = file_len * p / q;
        (file_len * p).is_multiple_of(q)
            && head.is_multiple_of(self.first.file_len_unit())
            && (file_len - head).is_multiple_of(self.second.file_len_unit())
    }

    /// Symbol counts of the two parts of a file of `file_len` symbols.
    pub fn split_len(&self, file_len: usize) -> Result<(usize, usize)> {
        let (p, q) = (*self.alpha.numer() as usize, *self.alpha.denom() as usize);
        let (u1, u2) = (self.first.file_len_unit(), self.second.file_len_unit());
        if !self.fits(file_len) {
            return Err(CachingError::Granularity(format!(
                "alpha = {} needs alpha*L divisible by {u1} and (1-alpha)*L divisible by {u2}; \
                 L = {file_len} fails, any multiple of {} works",
                self.alpha,
                self.file_len_unit()
            )));
        }
        let head = file_len * p / q;
        Ok((head, file_len - head))
    }
}
