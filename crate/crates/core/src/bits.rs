//! Packed vectors over GF(2) and a span solver.

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> BitVec {
        BitVec { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn toggle(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_with(&mut self, other: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + b)
            })
        })
    }

    fn leading_one(&self) -> Option<usize> {
        self.ones().next()
    }
}

/// Reduced echelon form of a fixed list of vectors, remembering how each
/// reduced row was combined from the originals.
#[derive(Clone, Debug)]
pub struct SpanSolver {
    rows: Vec<(usize, BitVec, BitVec)>,
    basis_len: usize,
}

impl SpanSolver {
    pub fn new(basis: &[BitVec]) -> SpanSolver {
        let mut rows: Vec<(usize, BitVec, BitVec)> = Vec::new();
        for (i, v) in basis.iter().enumerate() {
            let mut v = v.clone();
            let mut combo = BitVec::zeros(basis.len());
            combo.toggle(i);
            for (pivot, r, c) in &rows {
                if v.get(*pivot) {
                    v.xor_with(r);
                    combo.xor_with(c);
                }
            }
            let Some(pivot) = v.leading_one() else { continue };
            for (_, r, c) in rows.iter_mut() {
                if r.get(pivot) {
                    r.xor_with(&v);
                    c.xor_with(&combo);
                }
            }
            rows.push((pivot, v, combo));
        }
        SpanSolver { rows, basis_len: basis.len() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Indices of basis vectors whose XOR equals `target`, if any.
    pub fn solve(&self, target: &BitVec) -> Option<Vec<usize>> {
        let mut v = target.clone();
        let mut combo = BitVec::zeros(self.basis_len);
        for (pivot, r, c) in &self.rows {
            if v.get(*pivot) {
                v.xor_with(r);
                combo.xor_with(c);
            }
        }
        v.is_zero().then(|| combo.ones().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(len: usize, ones: &[usize]) -> BitVec {
        let mut v = BitVec::zeros(len);
        ones.iter().for_each(|&i| v.toggle(i));
        v
    }

    #[test]
    fn solves_combinations() {
        let basis = vec![bv(70, &[0, 65]), bv(70, &[1, 65]), bv(70, &[0, 1, 2])];
        let s = SpanSolver::new(&basis);
        assert_eq!(s.rank(), 3);
        assert_eq!(s.solve(&bv(70, &[0, 1])), Some(vec![0, 1]));
        assert_eq!(s.solve(&bv(70, &[2])), Some(vec![0, 1, 2]));
        assert_eq!(s.solve(&bv(70, &[3])), None);
        assert_eq!(s.solve(&BitVec::zeros(70)), Some(vec![]));
    }

    #[test]
    fn dependent_vectors_do_not_raise_rank() {
        let basis = vec![bv(5, &[0, 1]), bv(5, &[1, 2]), bv(5, &[0, 2])];
        let s = SpanSolver::new(&basis);
        assert_eq!(s.rank(), 2);
        let sol = s.solve(&bv(5, &[0, 2])).unwrap();
        let mut acc = BitVec::zeros(5);
        sol.iter().for_each(|&i| acc.xor_with(&basis[i]));
        assert_eq!(acc, bv(5, &[0, 2]));
    }
}
