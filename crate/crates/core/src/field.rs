//! Arithmetic in GF(2^m) for m in {3, 4, 8, 16}.
//!
//! Multiplication goes through log/antilog tables built once per
//! (m, polynomial) pair and shared for the life of the process.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{param, CachingError, Result};

pub type Symbol = u16;

const SUPPORTED_WIDTHS: [u32; 4] = [3, 4, 8, 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    m: u32,
    poly: u32,
}

impl FieldSpec {
    /// x^3 + x + 1
    pub const GF8: FieldSpec = FieldSpec { m: 3, poly: 0b1011 };
    /// x^4 + x + 1
    pub const GF16: FieldSpec = FieldSpec { m: 4, poly: 0x13 };
    /// x^8 + x^4 + x^3 + x^2 + 1
    pub const GF256: FieldSpec = FieldSpec { m: 8, poly: 0x11d };
    /// x^16 + x^12 + x^3 + x + 1
    pub const GF65536: FieldSpec = FieldSpec { m: 16, poly: 0x1100b };

    pub fn new(m: u32, poly: u32) -> Result<Self> {
        if !SUPPORTED_WIDTHS.contains(&m) {
            return Err(param(format!("field width {m} not in {{3, 4, 8, 16}}")));
        }
        if poly >> m != 1 {
            return Err(param(format!("polynomial {poly:#x} does not have degree {m}")));
        }
        if !is_irreducible(poly, m) {
            return Err(param(format!("polynomial {poly:#x} is reducible")));
        }
        Ok(FieldSpec { m, poly })
    }

    /// Smallest supported field with at least `n_code` nonzero elements.
    pub fn for_code_len(n_code: usize) -> Result<Self> {
        [Self::GF8, Self::GF16, Self::GF256, Self::GF65536]
            .into_iter()
            .find(|s| s.nonzero_count() >= n_code)
            .ok_or_else(|| param(format!("code length {n_code} exceeds GF(2^16)")))
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    pub fn nonzero_count(&self) -> usize {
        (1usize << self.m) - 1
    }
}

fn poly_mod(mut a: u64, b: u64) -> u64 {
    let db = 63 - b.leading_zeros();
    while a != 0 && 63 - a.leading_zeros() >= db {
        a ^= b << (63 - a.leading_zeros() - db);
    }
    a
}

fn is_irreducible(poly: u32, m: u32) -> bool {
    (2u64..(1u64 << (m / 2 + 1))).all(|d| poly_mod(poly as u64, d) != 0)
}

fn slow_mul(a: u32, b: u32, spec: FieldSpec) -> u32 {
    let mut prod = 0u64;
    for i in 0..spec.m {
        if b >> i & 1 == 1 {
            prod ^= (a as u64) << i;
        }
    }
    poly_mod(prod, spec.poly as u64) as u32
}

#[derive(Debug)]
struct Tables {
    exp: Vec<Symbol>,
    log: Vec<u32>,
}

impl Tables {
    fn build(spec: FieldSpec) -> Tables {
        let q = spec.nonzero_count();
        for g in 2..=q as u32 {
            let mut exp = Vec::with_capacity(2 * q);
            let mut x = 1u32;
            for _ in 0..q {
                exp.push(x as Symbol);
                x = slow_mul(x, g, spec);
            }
            let mut log = vec![u32::MAX; q + 1];
            let mut primitive = true;
            for (i, &e) in exp.iter().enumerate() {
                if log[e as usize] != u32::MAX {
                    primitive = false;
                    break;
                }
                log[e as usize] = i as u32;
            }
            if primitive {
                exp.extend_from_within(..q);
                return Tables { exp, log };
            }
        }
        unreachable!("the multiplicative group of a finite field is cyclic")
    }
}

fn tables_for(spec: FieldSpec) -> &'static Tables {
    static CACHE: OnceLock<Mutex<HashMap<FieldSpec, &'static Tables>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().expect("field table cache poisoned");
    cache.entry(spec).or_insert_with(|| Box::leak(Box::new(Tables::build(spec))))
}

/// A field handle: the spec plus its shared tables.
#[derive(Clone, Copy)]
pub struct Field {
    spec: FieldSpec,
    tables: &'static Tables,
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GF(2^{})[{:#x}]", self.spec.m, self.spec.poly)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Field {}

impl Field {
    pub fn new(spec: FieldSpec) -> Field {
        Field { spec, tables: tables_for(spec) }
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn contains(&self, a: Symbol) -> bool {
        (a as usize) <= self.spec.nonzero_count()
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        if a == 0 || b == 0 {
            return 0;
        }
        let t = self.tables;
        t.exp[(t.log[a as usize] + t.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: Symbol) -> Result<Symbol> {
        if a == 0 {
            return Err(CachingError::Arithmetic("inverse of zero".into()));
        }
        let q = self.spec.nonzero_count() as u32;
        let t = self.tables;
        Ok(t.exp[((q - t.log[a as usize]) % q) as usize])
    }

    pub fn div(&self, a: Symbol, b: Symbol) -> Result<Symbol> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Symbol, e: usize) -> Symbol {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let q = self.spec.nonzero_count();
        let t = self.tables;
        t.exp[(t.log[a as usize] as usize * e) % q]
    }

    /// Rank of a matrix given as rows, by Gaussian elimination.
    pub fn rank(&self, rows: &[Vec<Symbol>]) -> usize {
        let mut m: Vec<Vec<Symbol>> = rows.to_vec();
        let cols = m.first().map_or(0, Vec::len);
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..m.len()).find(|&i| m[i][c] != 0) else { continue };
            m.swap(rank, p);
            let inv = self.inv(m[rank][c]).expect("pivot is nonzero");
            for x in m[rank].iter_mut() {
                *x = self.mul(*x, inv);
            }
            let pivot = m[rank].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i != rank && row[c] != 0 {
                    let f = row[c];
                    for (x, &y) in row.iter_mut().zip(&pivot) {
                        *x ^= self.mul(f, y);
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle_mul(a: u32, b: u32, m: u32, poly: u32) -> u32 {
        // schoolbook: shift-and-add, reducing whenever bit m appears
        let mut acc = 0u32;
        let mut a = a;
        for i in 0..m {
            if b & (1 << i) != 0 {
                acc ^= a;
            }
            a <<= 1;
            if a & (1 << m) != 0 {
                a ^= poly;
            }
        }
        acc
    }

    #[test]
    fn gf8_three_squared_is_five() {
        let f = Field::new(FieldSpec::GF8);
        assert_eq!(oracle_mul(3, 3, 3, 0b1011), 5);
        assert_eq!(f.mul(3, 3), 5);
    }

    #[test]
    fn tables_agree_with_oracle() {
        for spec in [FieldSpec::GF8, FieldSpec::GF16, FieldSpec::GF256] {
            let f = Field::new(spec);
            let q = 1u32 << spec.m();
            for a in 0..q {
                for b in 0..q {
                    assert_eq!(f.mul(a as Symbol, b as Symbol) as u32, oracle_mul(a, b, spec.m(), spec.poly()));
                }
            }
        }
    }

    #[test]
    fn axioms_exhaustive_small_fields() {
        for spec in [FieldSpec::GF8, FieldSpec::GF16] {
            let f = Field::new(spec);
            let q = 1 << spec.m();
            for a in 0..q {
                assert_eq!(f.mul(0, a), 0);
                assert_eq!(f.mul(1, a), a);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in 0..q {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..q {
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, b ^ c), f.mul(a, b) ^ f.mul(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn gf65536_spot_checks() {
        let spec = FieldSpec::GF65536;
        let f = Field::new(spec);
        for (a, b) in [(2u32, 0x8000u32), (0x1234, 0xfedc), (0xffff, 0xffff), (7, 9)] {
            assert_eq!(f.mul(a as Symbol, b as Symbol) as u32, oracle_mul(a, b, 16, spec.poly()));
        }
        assert_eq!(f.mul(0xabcd, f.inv(0xabcd).unwrap()), 1);
    }

    #[test]
    fn inverse_of_zero_is_an_error() {
        assert!(matches!(Field::new(FieldSpec::GF8).inv(0), Err(CachingError::Arithmetic(_))));
    }

    #[test]
    fn custom_polynomials() {
        assert!(FieldSpec::new(8, 0x11b).is_ok());
        assert!(FieldSpec::new(3, 0b1101).is_ok());
        assert!(FieldSpec::new(4, 0b10101).is_err()); // (x^2+x+1)^2
        assert!(FieldSpec::new(5, 0b100101).is_err());
        let aes = Field::new(FieldSpec::new(8, 0x11b).unwrap());
        assert_eq!(aes.mul(0x57, 0x83), 0xc1);
    }

    #[test]
    fn field_selection() {
        assert_eq!(FieldSpec::for_code_len(4).unwrap(), FieldSpec::GF8);
        assert_eq!(FieldSpec::for_code_len(7).unwrap(), FieldSpec::GF8);
        assert_eq!(FieldSpec::for_code_len(8).unwrap(), FieldSpec::GF16);
        assert_eq!(FieldSpec::for_code_len(12).unwrap(), FieldSpec::GF16);
        assert_eq!(FieldSpec::for_code_len(200).unwrap(), FieldSpec::GF256);
        assert!(FieldSpec::for_code_len(70000).is_err());
    }

    #[test]
    fn rank_by_elimination() {
        let f = Field::new(FieldSpec::GF8);
        assert_eq!(f.rank(&[vec![1, 2, 3], vec![2, 4, 6]]), 1);
        assert_eq!(f.rank(&[vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0]]), 2);
        assert_eq!(f.rank(&[vec![1, 1], vec![1, 2]]), 2);
    }
}
