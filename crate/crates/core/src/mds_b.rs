//! MDS scheme with `N` cached segments per user, for `K ≥ N ≥ 3`.
//!
//! Files are split into `(K+1)(N−1)` subfiles and coded to `2K(N−1)`
//! segments; user `k` owns the slots `w^{(k)}_{n,m}`, `m ∈ [2N−2]`, of every
//! file and caches `Z_{k,n} = ⊕_{m≠n} w^{(k)}_{m,n}` for each `n ∈ [N]`.
//! Delivery sends, per file, a plain part and a part of `K` segments
//! shuffled by a per-file permutation of `[K]`, plus one cross-file XOR.
//! Indices and positions a user must not see in the clear are masked with
//! one-time pads held in its cache.

use rand::Rng;

use crate::coded::{check_permutation, encode_library, random_permutation, reassemble, xor_segments, xor_terms, Slot};
use crate::error::{param, CachingError, Result};
use crate::field::{Field, Symbol};
use crate::library::{xor_into, FileLibrary, Segment};
use crate::reed_solomon::ReedSolomon;

/// Fixed-point-free injection on `[N]∖{n}`: relabel order-preservingly onto
/// `[N−1]`, step back by one cyclically, relabel back.
pub fn h_map(files: usize, n: usize, m: usize) -> Result<usize> {
    if files < 3 {
        return Err(CachingError::Domain(format!("h_map needs N >= 3, got {files}")));
    }
    if n >= files || m >= files || m == n {
        return Err(param(format!("h_map({n}, {m}) undefined for N = {files}")));
    }
    let down = |x: usize| if x > n { x - 1 } else { x };
    let up = |x: usize| if x >= n { x + 1 } else { x };
    let q = files - 1;
    Ok(up((down(m) + q - 1) % q))
}

/// `u_n`: the smallest user requesting `n`, or user 1 if nobody does.
pub fn leaders(files: usize, demand: &[usize]) -> Vec<usize> {
    (0..files).map(|n| demand.iter().position(|&d| d == n).unwrap_or(1)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsBRandomness {
    /// `perms[n][k(2N−2) + m] = p^{(k)}_{n,m}`.
    pub perms: Vec<Vec<usize>>,
    /// `P_{k,n}`, `K × N`.
    pub index_pads: Vec<Vec<usize>>,
    /// `S_{k,n}`, `(K+1) × N`; row `K` belongs to user 0.
    pub position_pads: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsBServer {
    pub randomness: MdsBRandomness,
    pub coded: Vec<Vec<Segment>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsBCache {
    pub user: usize,
    /// `Z_{k,n}` for `n ∈ [N]`.
    pub payload: Vec<Segment>,
    pub index_pads: Vec<usize>,
    pub position_pads: Vec<usize>,
    /// `S_K`, held by user 0 only.
    pub extra_pads: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsBBlock {
    pub plain: Vec<Segment>,
    pub shuffled: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsBPacket {
    pub blocks: Vec<MdsBBlock>,
    pub cross: Segment,
    /// Indices of the plain segments of each block.
    pub j0_plain: Vec<Vec<usize>>,
    /// For each shuffled position, the index of its non-`Y` term.
    pub j0_shuffled: Vec<Vec<usize>>,
    pub j1: Vec<Vec<usize>>,
    pub j2: Vec<Vec<usize>>,
    /// Masked positions for user 0, files other than `D_0` in increasing order.
    pub j3: Vec<usize>,
}

/// Slot structure of a packet: every segment as an XOR of slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsBLayout {
    pub plain: Vec<Vec<Vec<Slot>>>,
    pub shuffled: Vec<Vec<Vec<Slot>>>,
    pub cross: Vec<Slot>,
}

impl MdsBLayout {
    pub fn rows(&self) -> impl Iterator<Item = &Vec<Slot>> {
        self.plain.iter().zip(&self.shuffled).flat_map(|(p, s)| p.iter().chain(s)).chain(std::iter::once(&self.cross))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MdsB {
    files: usize,
    users: usize,
    code: ReedSolomon,
}

impl MdsB {
    pub fn new(files: usize, users: usize) -> Result<Self> {
        if files < 3 || users < files {
            return Err(param(format!("this scheme needs K >= N >= 3, got N={files}, K={users}")));
        }
        let code = ReedSolomon::new(2 * users * (files - 1), (users + 1) * (files - 1))?;
        Ok(MdsB { files, users, code })
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn code(&self) -> &ReedSolomon {
        &self.code
    }

    pub fn field(&self) -> Field {
        self.code.field()
    }

    pub fn subfile_count(&self) -> usize {
        self.code.k_dim()
    }

    fn slots_per_user(&self) -> usize {
        2 * self.files - 2
    }

    pub fn index(&self, rnd: &MdsBRandomness, slot: Slot) -> usize {
        rnd.perms[slot.file][slot.user * self.slots_per_user() + slot.m]
    }

    fn h(&self, n: usize, m: usize) -> usize {
        h_map(self.files, n, m).expect("arguments validated by the caller")
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> MdsBRandomness {
        let n_code = self.code.n_code();
        MdsBRandomness {
            perms: (0..self.files).map(|_| random_permutation(n_code, rng)).collect(),
            index_pads: (0..self.users).map(|_| (0..self.files).map(|_| rng.gen_range(0..n_code)).collect()).collect(),
            position_pads: (0..=self.users)
                .map(|_| (0..self.files).map(|_| rng.gen_range(0..self.users)).collect())
                .collect(),
        }
    }

    /// The per-file position permutations of `[K]`, `shuffles[n][k] = π_n(k)`.
    pub fn draw_shuffles<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<usize>> {
        (0..self.files).map(|_| random_permutation(self.users, rng)).collect()
    }

    fn check_randomness(&self, rnd: &MdsBRandomness) -> Result<()> {
        let n_code = self.code.n_code();
        if rnd.perms.len() != self.files
            || rnd.index_pads.len() != self.users
            || rnd.position_pads.len() != self.users + 1
            || rnd.index_pads.iter().chain(&rnd.position_pads).any(|row| row.len() != self.files)
        {
            return Err(param("randomness does not match the scheme size"));
        }
        for p in &rnd.perms {
            check_permutation(p, n_code)?;
        }
        if rnd.index_pads.iter().flatten().any(|&p| p >= n_code)
            || rnd.position_pads.iter().flatten().any(|&p| p >= self.users)
        {
            return Err(param("pad out of range"));
        }
        Ok(())
    }

    pub fn cache_slots(&self, user: usize) -> Vec<Vec<Slot>> {
        (0..self.files)
            .map(|n| (0..self.files).filter(|&m| m != n).map(|m| Slot::new(m, user, n)).collect())
            .collect()
    }

    pub fn place_with(&self, library: &FileLibrary, randomness: MdsBRandomness) -> Result<(MdsBServer, Vec<MdsBCache>)> {
        self.check_randomness(&randomness)?;
        if library.n_files() != self.files {
            return Err(CachingError::Shape(format!("library has {} files, expected {}", library.n_files(), self.files)));
        }
        let coded = encode_library(&self.code, library)?;
        let len = library.file_len() / self.subfile_count();
        let caches = (0..self.users)
            .map(|user| MdsBCache {
                user,
                payload: self
                    .cache_slots(user)
                    .iter()
                    .map(|terms| {
                        xor_segments(len, terms.iter().map(|&s| &coded[s.file][self.index(&randomness, s)]))
                    })
                    .collect(),
                index_pads: randomness.index_pads[user].clone(),
                position_pads: randomness.position_pads[user].clone(),
                extra_pads: (user == 0).then(|| randomness.position_pads[self.users].clone()),
            })
            .collect();
        Ok((MdsBServer { randomness, coded }, caches))
    }

    pub fn place<R: Rng + ?Sized>(&self, library: &FileLibrary, rng: &mut R) -> Result<(MdsBServer, Vec<MdsBCache>)> {
        let randomness = self.draw(rng);
        self.place_with(library, randomness)
    }

    fn check_demand(&self, demand: &[usize]) -> Result<()> {
        if demand.len() != self.users || demand.iter().any(|&d| d >= self.files) {
            return Err(param(format!("demand {demand:?} invalid for N={}, K={}", self.files, self.users)));
        }
        Ok(())
    }

    /// Slots `m` of user `k`'s share of file `n` sent in the plain part.
    fn plain_slots(&self, demand: &[usize], k: usize, n: usize) -> Vec<usize> {
        let nf = self.files;
        let dk = demand[k];
        match (k, n == dk) {
            (0, false) => {
                let h = self.h(n, dk);
                (0..nf).filter(|&m| m != n && m != dk && m != h).collect()
            }
            (0, true) => (nf + 1..2 * nf - 2).collect(),
            (_, false) => (0..nf).filter(|&m| m != n && m != dk).collect(),
            (_, true) => (nf..2 * nf - 2).collect(),
        }
    }

    fn plain_offset(&self, k: usize) -> usize {
        if k == 0 {
            0
        } else {
            self.files - 3 + (k - 1) * (self.files - 2)
        }
    }

    fn y_terms(&self, demand: &[usize], lead: &[usize], n: usize) -> Vec<Slot> {
        if demand.contains(&n) {
            vec![Slot::new(n, lead[n], n)]
        } else {
            vec![Slot::new(n, 1, demand[1]), Slot::new(n, 0, self.h(n, demand[0]))]
        }
    }

    /// The term of `V^{(k)}_{D,n}` other than `Y_{D,n}` (the whole segment
    /// when `k` leads `n`), and whether `Y_{D,n}` is XORed in.
    fn v_term(&self, demand: &[usize], lead: &[usize], k: usize, n: usize) -> (Slot, bool) {
        if k != lead[n] {
            (Slot::new(n, k, demand[k]), true)
        } else if n != demand[0] {
            (Slot::new(n, 0, self.h(n, demand[0])), false)
        } else {
            (Slot::new(n, 0, self.files), false)
        }
    }

    pub fn layout(&self, demand: &[usize], shuffles: &[Vec<usize>]) -> Result<MdsBLayout> {
        self.check_demand(demand)?;
        if shuffles.len() != self.files {
            return Err(param("one position permutation per file required"));
        }
        for p in shuffles {
            check_permutation(p, self.users)?;
        }
        let lead = leaders(self.files, demand);
        let mut plain = Vec::new();
        let mut shuffled = Vec::new();
        for n in 0..self.files {
            plain.push(
                (0..self.users)
                    .flat_map(|k| self.plain_slots(demand, k, n).into_iter().map(move |m| vec![Slot::new(n, k, m)]))
                    .collect(),
            );
            let y = self.y_terms(demand, &lead, n);
            let mut part = vec![Vec::new(); self.users];
            for k in 0..self.users {
                let (term, with_y) = self.v_term(demand, &lead, k, n);
                let seg = if with_y { xor_terms(y.iter().copied().chain([term])) } else { vec![term] };
                part[shuffles[n][k]] = seg;
            }
            shuffled.push(part);
        }
        let cross = (0..self.files).flat_map(|n| self.y_terms(demand, &lead, n)).collect();
        Ok(MdsBLayout { plain, shuffled, cross })
    }

    pub fn deliver_with(&self, server: &MdsBServer, demand: &[usize], shuffles: &[Vec<usize>]) -> Result<MdsBPacket> {
        let layout = self.layout(demand, shuffles)?;
        let rnd = &server.randomness;
        let len = server.coded[0][0].len();
        let eval = |terms: &Vec<Slot>| xor_segments(len, terms.iter().map(|&s| &server.coded[s.file][self.index(rnd, s)]));
        let blocks = layout
            .plain
            .iter()
            .zip(&layout.shuffled)
            .map(|(p, s)| MdsBBlock { plain: p.iter().map(eval).collect(), shuffled: s.iter().map(eval).collect() })
            .collect();
        let cross = eval(&layout.cross);

        let lead = leaders(self.files, demand);
        let n_code = self.code.n_code();
        let j0_plain = layout.plain.iter().map(|p| p.iter().map(|t| self.index(rnd, t[0])).collect()).collect();
        let j0_shuffled = (0..self.files)
            .map(|n| {
                let mut row = vec![0; self.users];
                for k in 0..self.users {
                    row[shuffles[n][k]] = self.index(rnd, self.v_term(demand, &lead, k, n).0);
                }
                row
            })
            .collect();
        let mut j1 = vec![vec![0; self.files]; self.users];
        let mut j2 = vec![vec![0; self.files]; self.users];
        for k in 0..self.users {
            let dk = demand[k];
            for n in 0..self.files {
                let owner = if n == dk { lead[n] } else { k };
                let t1 = self.index(rnd, Slot::new(dk, owner, n));
                let t2 = shuffles[n][owner];
                j1[k][n] = (rnd.index_pads[k][n] + t1) % n_code;
                j2[k][n] = (rnd.position_pads[k][n] + t2) % self.users;
            }
        }
        let j3 = (0..self.files)
            .filter(|&n| n != demand[0])
            .map(|n| (rnd.position_pads[self.users][n] + shuffles[n][lead[n]]) % self.users)
            .collect();
        Ok(MdsBPacket { blocks, cross, j0_plain, j0_shuffled, j1, j2, j3 })
    }

    pub fn deliver<R: Rng + ?Sized>(&self, server: &MdsBServer, demand: &[usize], rng: &mut R) -> Result<MdsBPacket> {
        let shuffles = self.draw_shuffles(rng);
        self.deliver_with(server, demand, &shuffles)
    }

    pub fn decode(&self, cache: &MdsBCache, packet: &MdsBPacket, demand_k: usize) -> Result<Vec<Symbol>> {
        let (k, nf, kk) = (cache.user, self.files, self.users);
        if k >= kk || demand_k >= nf {
            return Err(param("user or demand out of range"));
        }
        if packet.blocks.len() != nf || packet.j1.len() != kk || packet.j2.len() != kk {
            return Err(CachingError::Shape("packet size does not match the scheme".into()));
        }
        if k == 0 && (cache.extra_pads.is_none() || packet.j3.len() != nf - 1) {
            return Err(CachingError::Shape("user 0 needs the extra position pads and J3".into()));
        }
        let n_code = self.code.n_code();
        let len = packet.cross.len();
        let unmask_index = |n: usize| (packet.j1[k][n] + n_code - cache.index_pads[n] % n_code) % n_code;
        let unmask_position = |n: usize| (packet.j2[k][n] + kk - cache.position_pads[n] % kk) % kk;
        let shuffled_at = |n: usize, pos: usize| {
            packet.blocks[n].shuffled.get(pos).ok_or_else(|| CachingError::Integrity(format!("position {pos} out of range")))
        };

        // w^{(k)}_{n,m} for n ≠ D_k, m ∈ [N]∖{n, D_k}
        let own_share = |n: usize, m: usize| -> Result<&Segment> {
            if k == 0 && m == self.h(n, demand_k) {
                let skip = usize::from(n > demand_k);
                let extra = cache.extra_pads.as_ref().expect("checked above");
                let pos = (packet.j3[n - skip] + kk - extra[n] % kk) % kk;
                return shuffled_at(n, pos);
            }
            let demand_stub: Vec<usize> = (0..kk).map(|i| if i == k { demand_k } else { 0 }).collect();
            let slots = if k == 0 {
                let h = self.h(n, demand_k);
                (0..nf).filter(|&x| x != n && x != demand_k && x != h).collect::<Vec<_>>()
            } else {
                self.plain_slots(&demand_stub, k, n)
            };
            let at = slots.iter().position(|&x| x == m).expect("slot sent in the plain part");
            packet.blocks[n]
                .plain
                .get(self.plain_offset(k) + at)
                .ok_or_else(|| CachingError::Shape(format!("plain part of block {n} too short")))
        };

        let mut pieces: Vec<(usize, Segment)> = Vec::new();
        for m in (0..nf).filter(|&m| m != demand_k) {
            let mut acc = cache.payload[m].clone();
            for n in (0..nf).filter(|&n| n != m && n != demand_k) {
                xor_into(&mut acc, own_share(n, m)?);
            }
            pieces.push((unmask_index(m), acc));
        }

        let mut lead_seg = cache.payload[demand_k].clone();
        xor_into(&mut lead_seg, &packet.cross);
        for n in (0..nf).filter(|&n| n != demand_k) {
            xor_into(&mut lead_seg, shuffled_at(n, unmask_position(n))?);
        }
        pieces.push((unmask_index(demand_k), lead_seg.clone()));

        let block = &packet.blocks[demand_k];
        pieces.extend(packet.j0_plain[demand_k].iter().copied().zip(block.plain.iter().cloned()));
        let lead_pos = unmask_position(demand_k);
        for (pos, seg) in block.shuffled.iter().enumerate() {
            let mut seg = seg.clone();
            if pos != lead_pos {
                xor_into(&mut seg, &lead_seg);
            }
            pieces.push((packet.j0_shuffled[demand_k][pos], seg));
        }
        debug_assert!(pieces.iter().all(|(_, s)| s.len() == len));
        reassemble(&self.code, pieces)
    }

    pub fn packet_segment_count(&self) -> usize {
        let (n, k) = (self.files, self.users);
        n * (k * (n - 1) - 1) + 1
    }
}
