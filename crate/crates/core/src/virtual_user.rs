//! The virtual-user demand-private scheme.
//!
//! A non-private scheme for `NK` virtual users whose demands are restricted
//! to cyclic shifts is built on the YMA scheme with `T = NK − K + 1` users and
//! `N` leaders. Real user `k` privately holds the cache of virtual user
//! `kN + p_k` for a uniform offset `p_k`, and the server serves the shifted
//! demand `d_k = D_k ⊖ p_k`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::Rng;

use crate::error::{param, CachingError, Result};
use crate::field::Symbol;
use crate::library::{xor_into, FileLibrary, Segment};
use crate::subsets::{binomial, k_subsets, k_subsets_within, Subset};
use crate::yma::{yma_deliver, SubfileTable, YmaExpander, YmaParams};

fn check_demand(files: usize, users: usize, d: &[usize]) -> Result<()> {
    if d.len() != users {
        return Err(param(format!("demand has {} entries for {users} users", d.len())));
    }
    if let Some(&x) = d.iter().find(|&&x| x >= files) {
        return Err(param(format!("demand entry {x} out of range for {files} files")));
    }
    Ok(())
}

/// Block `k` of the result is `(d_k, d_k ⊕ 1, …, d_k ⊕ (N−1))`.
pub fn expand_restricted(files: usize, d: &[usize]) -> Result<Vec<usize>> {
    check_demand(files, d.len(), d)?;
    Ok(d.iter().flat_map(|&dk| (0..files).map(move |j| (dk + j) % files)).collect())
}

/// Label of a demand in the base set: constant vectors `a·1` and the
/// two-level staircases `(a…a, a+1…a+1)`.
pub fn label_of(files: usize, d: &[usize]) -> Result<usize> {
    check_demand(files, d.len(), d)?;
    let a = d[0];
    let steps = d.iter().filter(|&&x| x != a).count();
    let tail_ok = d[d.len() - steps..].iter().all(|&x| x == a + 1);
    let head_ok = d[..d.len() - steps].iter().all(|&x| x == a);
    match steps {
        0 => Ok(a),
        j if head_ok && tail_ok && a + 1 < files => Ok((files - 1) * j + a + 1),
        _ => Err(CachingError::Domain(format!("{d:?} is not a base demand"))),
    }
}

/// Component `k` of the base demand labelled `t`.
pub fn label_component(files: usize, users: usize, k: usize, t: usize) -> usize {
    if t < files {
        return t;
    }
    let a = (t - 1) % (files - 1);
    if t <= (files - 1) * (users - k) {
        a
    } else {
        a + 1
    }
}

/// The base demand labelled `t`.
pub fn demand_of(files: usize, users: usize, t: usize) -> Vec<usize> {
    (0..users).map(|k| label_component(files, users, k, t)).collect()
}

/// Support of `V_d` for `d = a·e'_k`, `a ≥ 1`.
fn unit_mask(files: usize, users: usize, k: usize, a: usize) -> Subset {
    let q = files - 1;
    (1..=a).fold(Subset::singleton(0), |v, b| {
        let (x, y) = if k == 0 {
            (b, q * (users - 1) + b)
        } else if k == users - 1 {
            (q + b, b - 1)
        } else {
            (q * (users - k) + b, q * (users - k - 1) + b)
        };
        v.toggle(x).toggle(y)
    })
}

/// Support of the binary vector `V_d` over `T = [NK−K+1]`.
pub fn demand_mask(files: usize, d: &[usize]) -> Result<Subset> {
    check_demand(files, d.len(), d)?;
    let users = d.len();
    if users == 1 {
        return Ok(Subset::singleton(d[0]));
    }
    let e0 = Subset::singleton(0);
    Ok(d.iter()
        .enumerate()
        .filter(|&(_, &a)| a != 0)
        .fold(e0, |v, (k, &a)| v ^ unit_mask(files, users, k, a) ^ e0))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandMask {
    pub d: Vec<usize>,
    pub v: Subset,
    pub t_d: usize,
}

/// Computes `V_d` and draws `t_d` uniformly from it.
pub fn vd_mask<R: Rng + ?Sized>(files: usize, d: &[usize], rng: &mut R) -> Result<DemandMask> {
    let v = demand_mask(files, d)?;
    let members: Vec<usize> = v.iter().collect();
    let t_d = members[rng.gen_range(0..members.len())];
    Ok(DemandMask { d: d.to_vec(), v, t_d })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VuServer {
    pub table: SubfileTable,
    pub offsets: Vec<usize>,
    pub virtual_caches: Vec<BTreeMap<Subset, Segment>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VuCache {
    pub user: usize,
    pub offset: usize,
    pub segments: BTreeMap<Subset, Segment>,
}

/// Broadcast for restricted demand `d`. Both `d` and `t_d` are public.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VuPacket {
    pub d: Vec<usize>,
    pub t_d: usize,
    pub subfile_len: usize,
    pub payload: BTreeMap<(usize, Subset), Segment>,
}

#[derive(Debug, Clone)]
pub struct VuScheme {
    files: usize,
    users: usize,
    r: usize,
    yma: YmaParams,
    expanders: OnceLock<Vec<YmaExpander>>,
}

impl PartialEq for VuScheme {
    fn eq(&self, other: &Self) -> bool {
        (self.files, self.users, self.r) == (other.files, other.users, other.r)
    }
}

impl VuScheme {
    pub fn new(files: usize, users: usize, r: usize) -> Result<Self> {
        if files == 0 || users == 0 {
            return Err(param("need N >= 1 and K >= 1"));
        }
        let labels = files * users - users + 1;
        if r > labels {
            return Err(param(format!("r = {r} exceeds NK-K+1 = {labels}")));
        }
        let yma = YmaParams::new(files, labels, r)?;
        Ok(VuScheme { files, users, r, yma, expanders: OnceLock::new() })
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `|T| = NK − K + 1`.
    pub fn labels(&self) -> usize {
        self.yma.users
    }

    pub fn subfile_count(&self) -> usize {
        self.yma.subfile_count()
    }

    fn leaders(&self) -> Subset {
        Subset::full(self.files)
    }

    /// Demand `(g_k(t) ⊕ n)_{t∈T}` whose leader signals form virtual cache `kN+n`.
    pub fn virtual_demand(&self, k: usize, n: usize) -> Vec<usize> {
        (0..self.labels()).map(|t| (label_component(self.files, self.users, k, t) + n) % self.files).collect()
    }

    fn expander(&self, k: usize, n: usize) -> &YmaExpander {
        let all = self.expanders.get_or_init(|| {
            (0..self.users)
                .flat_map(|k| (0..self.files).map(move |n| (k, n)))
                .map(|(k, n)| {
                    YmaExpander::new(self.yma, &self.virtual_demand(k, n), self.leaders())
                        .expect("virtual demands give every file a distinct leader")
                })
                .collect()
        });
        &all[k * self.files + n]
    }

    pub fn subfiles(&self, library: &FileLibrary) -> Result<SubfileTable> {
        SubfileTable::from_library(self.yma, library)
    }

    pub fn virtual_cache(&self, table: &SubfileTable, k: usize, n: usize) -> Result<BTreeMap<Subset, Segment>> {
        Ok(yma_deliver(table, &self.virtual_demand(k, n), self.leaders())?.segments)
    }

    pub fn place_with(&self, library: &FileLibrary, offsets: &[usize]) -> Result<(VuServer, Vec<VuCache>)> {
        check_demand(self.files, self.users, offsets)?;
        let table = self.subfiles(library)?;
        let virtual_caches = (0..self.users)
            .flat_map(|k| (0..self.files).map(move |n| (k, n)))
            .map(|(k, n)| self.virtual_cache(&table, k, n))
            .collect::<Result<Vec<_>>>()?;
        let caches = offsets
            .iter()
            .enumerate()
            .map(|(user, &p)| VuCache { user, offset: p, segments: virtual_caches[user * self.files + p].clone() })
            .collect();
        Ok((VuServer { table, offsets: offsets.to_vec(), virtual_caches }, caches))
    }

    pub fn place<R: Rng + ?Sized>(&self, library: &FileLibrary, rng: &mut R) -> Result<(VuServer, Vec<VuCache>)> {
        let offsets: Vec<usize> = (0..self.users).map(|_| rng.gen_range(0..self.files)).collect();
        self.place_with(library, &offsets)
    }

    /// Restricted demand served for real demand `demand` under the offsets.
    pub fn shifted_demand(&self, offsets: &[usize], demand: &[usize]) -> Result<Vec<usize>> {
        check_demand(self.files, self.users, demand)?;
        Ok(demand.iter().zip(offsets).map(|(&dk, &p)| (dk + self.files - p) % self.files).collect())
    }

    /// Every `X^{(n)}_{d,S}` for `S ⊆ T∖{t_d}`, `|S| = r−1`.
    pub fn deliver_restricted(&self, table: &SubfileTable, d: &[usize], t_d: usize) -> Result<VuPacket> {
        let v = demand_mask(self.files, d)?;
        if !v.contains(t_d) {
            return Err(param(format!("t_d = {t_d} is not in V_d = {v}")));
        }
        let len = table.subfile_len();
        let mut payload = BTreeMap::new();
        if self.r >= 1 {
            let free = Subset::full(self.labels()).without(t_d);
            for s in k_subsets_within(free, self.r - 1) {
                for n in 0..self.files {
                    let mut acc = vec![0; len];
                    for t in v.minus(s).iter() {
                        xor_into(&mut acc, table.get(n, s.with(t)));
                    }
                    payload.insert((n, s), acc);
                }
            }
        }
        Ok(VuPacket { d: d.to_vec(), t_d, subfile_len: len, payload })
    }

    /// Delivery with `t_d` fixed to the `choice`-th element of `V_d`.
    pub fn deliver_with(&self, server: &VuServer, demand: &[usize], choice: usize) -> Result<VuPacket> {
        let d = self.shifted_demand(&server.offsets, demand)?;
        let v = demand_mask(self.files, &d)?;
        let t_d = v.iter().nth(choice).ok_or_else(|| param(format!("choice {choice} exceeds |V_d| = {}", v.len())))?;
        self.deliver_restricted(&server.table, &d, t_d)
    }

    pub fn deliver<R: Rng + ?Sized>(&self, server: &VuServer, demand: &[usize], rng: &mut R) -> Result<VuPacket> {
        let d = self.shifted_demand(&server.offsets, demand)?;
        let mask = vd_mask(self.files, &d, rng)?;
        self.deliver_restricted(&server.table, &d, mask.t_d)
    }

    /// Decodes file `d_k ⊕ n` for virtual user `kN + n`.
    pub fn decode_virtual(
        &self,
        k: usize,
        n: usize,
        cache: &BTreeMap<Subset, Segment>,
        packet: &VuPacket,
    ) -> Result<Vec<Symbol>> {
        check_demand(self.files, self.users, &packet.d)?;
        let v = demand_mask(self.files, &packet.d)?;
        if !v.contains(packet.t_d) {
            return Err(CachingError::Integrity(format!("t_d = {} outside V_d = {v}", packet.t_d)));
        }
        let signals = self.expander(k, n).expand(cache)?;
        let len = packet.subfile_len;
        let mut out = Vec::with_capacity(len * self.subfile_count());
        for set in k_subsets(self.labels(), self.r) {
            let mut acc = vec![0; len];
            for t in v.minus(set).iter() {
                let y = signals
                    .get(&set.with(t))
                    .ok_or_else(|| CachingError::Shape(format!("cache lacks signal {}", set.with(t))))?;
                xor_into(&mut acc, y);
            }
            for t in set.iter() {
                let file = (label_component(self.files, self.users, k, t) + n) % self.files;
                xor_into(&mut acc, &recover_xsub(packet, v, set.without(t), file)?);
            }
            out.extend(acc);
        }
        Ok(out)
    }

    pub fn decode(&self, cache: &VuCache, packet: &VuPacket, demand_k: usize) -> Result<Vec<Symbol>> {
        let k = cache.user;
        if k >= self.users || packet.d.len() != self.users {
            return Err(param("cache or packet does not match the scheme size"));
        }
        if (packet.d[k] + cache.offset) % self.files != demand_k {
            return Err(param(format!("packet does not serve file {demand_k} to user {k}")));
        }
        self.decode_virtual(k, cache.offset, &cache.segments, packet)
    }

    /// Runs the non-private scheme for every virtual user under restricted
    /// demand `d`, with `t_d` chosen as the `choice`-th element of `V_d`.
    pub fn nonprivate_round(&self, library: &FileLibrary, d: &[usize], choice: usize) -> Result<()> {
        let table = self.subfiles(library)?;
        let v = demand_mask(self.files, d)?;
        let t_d = v.iter().nth(choice).ok_or_else(|| param("mask choice out of range"))?;
        let packet = self.deliver_restricted(&table, d, t_d)?;
        for k in 0..self.users {
            for n in 0..self.files {
                let cache = self.virtual_cache(&table, k, n)?;
                let file = self.decode_virtual(k, n, &cache, &packet)?;
                library.verify((d[k] + n) % self.files, &file)?;
            }
        }
        Ok(())
    }

    pub fn cache_segment_count(&self) -> u128 {
        let t = self.labels() as i64;
        let r = self.r as i64;
        binomial(t, r + 1) - binomial(t - self.files as i64, r + 1)
    }

    pub fn packet_segment_count(&self) -> u128 {
        self.files as u128 * binomial(self.labels() as i64 - 1, self.r as i64 - 1)
    }
}

/// `X^{(n)}_{d,S}` for any `(r−1)`-subset `S`, including those containing `t_d`.
pub fn recover_xsub(packet: &VuPacket, v: Subset, s: Subset, n: usize) -> Result<Segment> {
    let lookup = |key: Subset| {
        packet
            .payload
            .get(&(n, key))
            .ok_or_else(|| CachingError::Shape(format!("packet lacks X^({n}) for {key}")))
    };
    if !s.contains(packet.t_d) {
        return lookup(s).cloned();
    }
    let base = s.without(packet.t_d);
    let mut acc = vec![0; packet.subfile_len];
    for t in v.minus(s).iter() {
        xor_into(&mut acc, lookup(base.with(t))?);
    }
    Ok(acc)
}

/// The subfile labels `{v} ∪ S`, `v ∈ V∖S`, XORed into `X^{(n)}_{d,S}`.
pub fn xsub_terms(v: Subset, s: Subset) -> Vec<Subset> {
    v.minus(s).iter().map(|t| s.with(t)).collect()
}
