//! Small sets of indices packed into a `u64`, with colex ranking.

use std::fmt;

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset(u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);
    pub const MAX_UNIVERSE: usize = 63;

    pub fn from_bits(bits: u64) -> Subset {
        Subset(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn full(n: usize) -> Subset {
        assert!(n <= Self::MAX_UNIVERSE);
        Subset((1u64 << n) - 1)
    }

    pub fn singleton(i: usize) -> Subset {
        assert!(i < Self::MAX_UNIVERSE);
        Subset(1 << i)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Subset {
        self | Subset::singleton(i)
    }

    pub fn toggle(self, i: usize) -> Subset {
        self ^ Subset::singleton(i)
    }

    pub fn without(self, i: usize) -> Subset {
        Subset(self.0 & !(1u64 << i))
    }

    pub fn minus(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    pub fn intersects(self, other: Subset) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn min(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }

    /// Position of this set among all sets of the same size in colex order.
    pub fn colex_rank(self) -> usize {
        self.iter().enumerate().map(|(j, c)| binomial(c as i64, j as i64 + 1) as usize).sum()
    }
}

impl FromIterator<usize> for Subset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(Subset::EMPTY, Subset::with)
    }
}

impl std::ops::BitOr for Subset {
    type Output = Subset;
    fn bitor(self, rhs: Subset) -> Subset {
        Subset(self.0 | rhs.0)
    }
}

impl std::ops::BitAnd for Subset {
    type Output = Subset;
    fn bitand(self, rhs: Subset) -> Subset {
        Subset(self.0 & rhs.0)
    }
}

impl std::ops::BitXor for Subset {
    type Output = Subset;
    fn bitxor(self, rhs: Subset) -> Subset {
        Subset(self.0 ^ rhs.0)
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// C(a, b), zero whenever b < 0, a < 0 or b > a.
pub fn binomial(a: i64, b: i64) -> u128 {
    if a < 0 || b < 0 || b > a {
        return 0;
    }
    let b = b.min(a - b) as u128;
    let a = a as u128;
    (0..b).fold(1u128, |acc, i| acc * (a - i) / (i + 1))
}

/// All `k`-subsets of `[0, n)` in colex order.
pub fn k_subsets(n: usize, k: usize) -> impl Iterator<Item = Subset> {
    assert!(n <= Subset::MAX_UNIVERSE);
    let limit = 1u64 << n;
    let mut next = (k <= n).then(|| (1u64 << k) - 1);
    std::iter::from_fn(move || {
        let x = next?;
        next = if x == 0 {
            None
        } else {
            let c = x & x.wrapping_neg();
            let r = x + c;
            let y = (((r ^ x) >> 2) / c) | r;
            (y < limit).then_some(y)
        };
        Some(Subset(x))
    })
}

/// All `k`-subsets of `universe`, colex order.
pub fn k_subsets_within(universe: Subset, k: usize) -> impl Iterator<Item = Subset> {
    let members: Vec<usize> = universe.iter().collect();
    k_subsets(members.len(), k).map(move |s| s.iter().map(|i| members[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_convention() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(2, 3), 0);
        assert_eq!(binomial(-1, 0), 0);
        assert_eq!(binomial(3, -1), 0);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(41, 20), 269_128_937_220);
    }

    #[test]
    fn enumeration_counts_and_ranks() {
        for n in 0..9 {
            for k in 0..=n + 1 {
                let sets: Vec<Subset> = k_subsets(n, k).collect();
                assert_eq!(sets.len() as u128, binomial(n as i64, k as i64));
                for (i, s) in sets.iter().enumerate() {
                    assert_eq!(s.len(), k);
                    assert_eq!(s.colex_rank(), i);
                }
            }
        }
    }

    #[test]
    fn within_universe() {
        let u: Subset = [0, 2, 3].into_iter().collect();
        let sets: Vec<String> = k_subsets_within(u, 2).map(|s| s.to_string()).collect();
        assert_eq!(sets, ["{0,2}", "{0,3}", "{2,3}"]);
        assert_eq!(k_subsets_within(u, 0).count(), 1);
    }
}
