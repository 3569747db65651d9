//! The YMA coded caching scheme for `N` files and `K̄` users with parameter `r`.
//!
//! Each file is split into `C(K̄, r)` subfiles `W_{n,R}`, one per `r`-subset
//! `R` of users; user `k` caches every `W_{n,R}` with `k ∈ R`. The signal for
//! an `(r+1)`-subset `R⁺` is `Y_{R⁺} = ⊕_{t∈R⁺} W_{g_t, R⁺∖{t}}`, and only the
//! sets meeting the leader set are transmitted. The remaining signals are
//! rebuilt from the transmitted ones by a linear solve over subfile
//! coefficients, done once per demand pattern.

use std::collections::BTreeMap;

use crate::bits::{BitVec, SpanSolver};
use crate::error::{param, CachingError, Result};
use crate::library::{xor_into, FileLibrary, Segment};
use crate::subsets::{binomial, k_subsets, Subset};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YmaParams {
    pub files: usize,
    pub users: usize,
    pub r: usize,
}

impl YmaParams {
    pub fn new(files: usize, users: usize, r: usize) -> Result<Self> {
        if files == 0 || users == 0 {
            return Err(param("need at least one file and one user"));
        }
        if users > Subset::MAX_UNIVERSE {
            return Err(param(format!("at most {} users supported", Subset::MAX_UNIVERSE)));
        }
        if r > users {
            return Err(param(format!("r = {r} exceeds the {users} users")));
        }
        Ok(YmaParams { files, users, r })
    }

    pub fn subfile_count(&self) -> usize {
        binomial(self.users as i64, self.r as i64) as usize
    }

    /// Column of `W_{n,R}` in subfile-coefficient vectors.
    pub fn slot(&self, n: usize, set: Subset) -> usize {
        n * self.subfile_count() + set.colex_rank()
    }

    pub fn coefficient_len(&self) -> usize {
        self.files * self.subfile_count()
    }

    /// Subfile-coefficient vector of `Y_{R⁺}` under `demand`.
    pub fn coefficients(&self, demand: &[usize], rplus: Subset) -> BitVec {
        let mut v = BitVec::zeros(self.coefficient_len());
        for t in rplus.iter() {
            v.toggle(self.slot(demand[t], rplus.without(t)));
        }
        v
    }

    pub fn signal_sets(&self) -> impl Iterator<Item = Subset> {
        k_subsets(self.users, self.r + 1)
    }

    fn check_demand(&self, demand: &[usize]) -> Result<()> {
        if demand.len() != self.users {
            return Err(param(format!("demand has {} entries for {} users", demand.len(), self.users)));
        }
        if let Some(&d) = demand.iter().find(|&&d| d >= self.files) {
            return Err(param(format!("demand entry {d} out of range for {} files", self.files)));
        }
        Ok(())
    }

    fn check_leaders(&self, demand: &[usize], leaders: Subset) -> Result<()> {
        self.check_demand(demand)?;
        if !leaders.is_subset_of(Subset::full(self.users)) {
            return Err(param("leader outside the user range"));
        }
        let mut seen = vec![false; self.files];
        for u in leaders.iter() {
            if std::mem::replace(&mut seen[demand[u]], true) {
                return Err(param(format!("two leaders request file {}", demand[u])));
            }
        }
        if let Some(&d) = demand.iter().find(|&&d| !seen[d]) {
            return Err(param(format!("file {d} is requested but has no leader")));
        }
        Ok(())
    }
}

/// Every subfile `W_{n,R}`, indexed by file then colex rank of `R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubfileTable {
    params: YmaParams,
    subfiles: Vec<Vec<Segment>>,
}

impl SubfileTable {
    pub fn from_library(params: YmaParams, library: &FileLibrary) -> Result<Self> {
        if library.n_files() != params.files {
            return Err(CachingError::Shape(format!(
                "library has {} files, scheme expects {}",
                library.n_files(),
                params.files
            )));
        }
        let subfiles = (0..params.files)
            .map(|n| library.split(n, params.subfile_count()))
            .collect::<Result<_>>()?;
        Ok(SubfileTable { params, subfiles })
    }

    pub fn params(&self) -> YmaParams {
        self.params
    }

    pub fn get(&self, n: usize, set: Subset) -> &Segment {
        &self.subfiles[n][set.colex_rank()]
    }

    pub fn subfile_len(&self) -> usize {
        self.subfiles[0][0].len()
    }

    pub fn signal(&self, demand: &[usize], rplus: Subset) -> Segment {
        let mut acc = vec![0; self.subfile_len()];
        for t in rplus.iter() {
            xor_into(&mut acc, self.get(demand[t], rplus.without(t)));
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YmaCache {
    pub owner: usize,
    pub subfiles: BTreeMap<(usize, Subset), Segment>,
}

pub fn yma_place(table: &SubfileTable) -> Vec<YmaCache> {
    let p = table.params();
    (0..p.users)
        .map(|owner| {
            let subfiles = k_subsets(p.users, p.r)
                .filter(|set| set.contains(owner))
                .flat_map(|set| (0..p.files).map(move |n| (n, set)))
                .map(|(n, set)| ((n, set), table.get(n, set).clone()))
                .collect();
            YmaCache { owner, subfiles }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YmaSignal {
    pub demand: Vec<usize>,
    pub leaders: Subset,
    pub segments: BTreeMap<Subset, Segment>,
}

pub fn yma_deliver(table: &SubfileTable, demand: &[usize], leaders: Subset) -> Result<YmaSignal> {
    let p = table.params();
    p.check_leaders(demand, leaders)?;
    let segments = p
        .signal_sets()
        .filter(|s| s.intersects(leaders))
        .map(|s| (s, table.signal(demand, s)))
        .collect();
    Ok(YmaSignal { demand: demand.to_vec(), leaders, segments })
}

/// For one demand pattern: how every non-transmitted signal is the XOR of
/// transmitted ones. Independent of file content.
#[derive(Debug, Clone)]
pub struct YmaExpander {
    params: YmaParams,
    leaders: Subset,
    recipes: Vec<(Subset, Vec<Subset>)>,
}

impl YmaExpander {
    pub fn new(params: YmaParams, demand: &[usize], leaders: Subset) -> Result<Self> {
        params.check_leaders(demand, leaders)?;
        let (sent, missing): (Vec<Subset>, Vec<Subset>) = params.signal_sets().partition(|s| s.intersects(leaders));
        let basis: Vec<BitVec> = sent.iter().map(|&s| params.coefficients(demand, s)).collect();
        let solver = SpanSolver::new(&basis);
        let recipes = missing
            .into_iter()
            .map(|target| {
                let combo = solver.solve(&params.coefficients(demand, target)).ok_or_else(|| {
                    CachingError::Internal(format!("signal {target} is not spanned by the leader signals"))
                })?;
                Ok((target, combo.into_iter().map(|i| sent[i]).collect()))
            })
            .collect::<Result<_>>()?;
        Ok(YmaExpander { params, leaders, recipes })
    }

    pub fn leaders(&self) -> Subset {
        self.leaders
    }

    /// Transmitted signals combined with every rebuilt one.
    pub fn expand(&self, segments: &BTreeMap<Subset, Segment>) -> Result<BTreeMap<Subset, Segment>> {
        let len = segments.values().next().map_or(0, Vec::len);
        let mut all = segments.clone();
        for (target, sources) in &self.recipes {
            let mut acc = vec![0; len];
            for s in sources {
                let seg = segments
                    .get(s)
                    .ok_or_else(|| CachingError::Shape(format!("signal {s} missing from the transmitted set")))?;
                xor_into(&mut acc, seg);
            }
            all.insert(*target, acc);
        }
        debug_assert_eq!(all.len() as u128, binomial(self.params.users as i64, self.params.r as i64 + 1));
        Ok(all)
    }
}

pub fn yma_expand(params: YmaParams, signal: &YmaSignal) -> Result<BTreeMap<Subset, Segment>> {
    YmaExpander::new(params, &signal.demand, signal.leaders)?.expand(&signal.segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(items: &[usize]) -> Subset {
        items.iter().copied().collect()
    }

    /// One distinct symbol per subfile, so XORs read as coefficient sets.
    fn labelled(params: YmaParams) -> (FileLibrary, SubfileTable) {
        let c = params.subfile_count();
        let files = (0..params.files).map(|n| (0..c).map(|i| 1u16 << (n * c + i)).collect()).collect();
        let lib = FileLibrary::new(files, 16).unwrap();
        let table = SubfileTable::from_library(params, &lib).unwrap();
        (lib, table)
    }

    #[test]
    fn cache_sizes() {
        let p = YmaParams::new(2, 4, 2).unwrap();
        let (_, table) = labelled(p);
        let caches = yma_place(&table);
        assert!(caches.iter().all(|c| c.subfiles.len() == 6));
        let p0 = YmaParams::new(2, 4, 0).unwrap();
        let lib = FileLibrary::zeros(2, 1, 8);
        assert!(yma_place(&SubfileTable::from_library(p0, &lib).unwrap()).iter().all(|c| c.subfiles.is_empty()));
        let p4 = YmaParams::new(2, 4, 4).unwrap();
        assert!(yma_place(&SubfileTable::from_library(p4, &lib).unwrap()).iter().all(|c| c.subfiles.len() == 2));
    }

    #[test]
    fn leader_signal_matches_worked_cache() {
        let p = YmaParams::new(2, 4, 2).unwrap();
        let (_, table) = labelled(p);
        let sig = yma_deliver(&table, &[0, 1, 0, 1], set(&[0, 1])).unwrap();
        assert_eq!(sig.segments.len(), 4);
        let expect = table.get(0, set(&[1, 2]))[0] ^ table.get(1, set(&[0, 2]))[0] ^ table.get(0, set(&[0, 1]))[0];
        assert_eq!(sig.segments[&set(&[0, 1, 2])], vec![expect]);
    }

    #[test]
    fn non_leader_signal_is_rebuilt() {
        let p = YmaParams::new(2, 4, 2).unwrap();
        let (_, table) = labelled(p);
        let demand = [0, 1, 0, 1];
        let sig = yma_deliver(&table, &demand, set(&[0, 1])).unwrap();
        let all = yma_expand(p, &sig).unwrap();
        assert_eq!(all.len(), 4);
        assert!(!sig.segments.contains_key(&set(&[2, 3])));
        let p2 = YmaParams::new(2, 4, 1).unwrap();
        let (_, t2) = labelled(p2);
        let sig2 = yma_deliver(&t2, &demand, set(&[0, 1])).unwrap();
        let all2 = yma_expand(p2, &sig2).unwrap();
        assert_eq!(all2[&set(&[2, 3])], t2.signal(&demand, set(&[2, 3])));
        assert_eq!(all2.len(), 6);
    }

    #[test]
    fn bad_leaders_rejected() {
        let p = YmaParams::new(2, 4, 1).unwrap();
        let (_, table) = labelled(p);
        assert!(yma_deliver(&table, &[0, 0, 1, 1], set(&[0, 1])).is_err());
        assert!(yma_deliver(&table, &[0, 1, 1, 1], set(&[0])).is_err());
        assert!(yma_deliver(&table, &[0, 2, 1, 1], set(&[0, 2])).is_err());
    }

    #[test]
    fn expansion_matches_direct_formula_exhaustively() {
        for users in 2..=6 {
            for files in 1..=users.min(3) {
                for r in 0..=users {
                    let p = YmaParams::new(files, users, r).unwrap();
                    let mut rng = ChaCha8Rng::seed_from_u64((users * 100 + files * 10 + r) as u64);
                    let lib = FileLibrary::random(files, p.subfile_count() * 2, 8, &mut rng);
                    let table = SubfileTable::from_library(p, &lib).unwrap();
                    let demand: Vec<usize> = (0..users).map(|u| u % files).collect();
                    let leaders = Subset::full(files);
                    let sig = yma_deliver(&table, &demand, leaders).unwrap();
                    let expect = binomial(users as i64, r as i64 + 1) - binomial((users - files) as i64, r as i64 + 1);
                    assert_eq!(sig.segments.len() as u128, expect);
                    for (s, seg) in yma_expand(p, &sig).unwrap() {
                        assert_eq!(seg, table.signal(&demand, s), "users {users} files {files} r {r} set {s}");
                    }
                }
            }
        }
    }
}
