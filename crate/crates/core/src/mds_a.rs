//! MDS scheme with one cached segment per user.
//!
//! Each file is split into `K+1` subfiles and expanded to `2K` coded
//! segments with a `(2K, K+1)` Reed–Solomon code. A random permutation per
//! file hands user `k` the two segments `w^{(k)}_{n,0}` and `w^{(k)}_{n,1}`.
//! User `k` caches `⊕_n w^{(k)}_{n,0}` and a pad `P_k`; the server sends slot
//! 0 of every file except the requested one, for which it sends slot 1.
//! The index of the cached segment is sent masked by the pad.

use rand::Rng;

use crate::coded::{check_permutation, encode_library, random_permutation, reassemble, xor_segments, Slot};
use crate::error::{param, CachingError, Result};
use crate::field::{Field, Symbol};
use crate::library::{FileLibrary, Segment};
use crate::reed_solomon::ReedSolomon;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsARandomness {
    /// `perms[n][2k + m] = p^{(k)}_{n,m}`.
    pub perms: Vec<Vec<usize>>,
    pub pads: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsAServer {
    pub randomness: MdsARandomness,
    pub coded: Vec<Vec<Segment>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsACache {
    pub user: usize,
    pub payload: Segment,
    pub pad: usize,
}

/// `segments` and `j0` are in `(n, k)` order with `n` outer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsAPacket {
    pub segments: Vec<Segment>,
    pub j0: Vec<usize>,
    pub j1: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MdsA {
    files: usize,
    users: usize,
    code: ReedSolomon,
}

impl MdsA {
    pub fn new(files: usize, users: usize) -> Result<Self> {
        if files == 0 || users == 0 {
            return Err(param("need N >= 1 and K >= 1"));
        }
        let code = ReedSolomon::new(2 * users, users + 1)?;
        Ok(MdsA { files, users, code })
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

    pub fn index(&self, randomness: &MdsARandomness, slot: Slot) -> usize {
        randomness.perms[slot.file][2 * slot.user + slot.m]
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> MdsARandomness {
        let n_code = self.code.n_code();
        MdsARandomness {
            perms: (0..self.files).map(|_| random_permutation(n_code, rng)).collect(),
            pads: (0..self.users).map(|_| rng.gen_range(0..n_code)).collect(),
        }
    }

    fn check_randomness(&self, rnd: &MdsARandomness) -> Result<()> {
        if rnd.perms.len() != self.files || rnd.pads.len() != self.users {
            return Err(param("randomness does not match the scheme size"));
        }
        for p in &rnd.perms {
            check_permutation(p, self.code.n_code())?;
        }
        if rnd.pads.iter().any(|&p| p >= self.code.n_code()) {
            return Err(param("pad out of range"));
        }
        Ok(())
    }

    pub fn cache_slots(&self, user: usize) -> Vec<Slot> {
        (0..self.files).map(|n| Slot::new(n, user, 0)).collect()
    }

    /// Slot carried by each payload segment, `(n, k)` order.
    pub fn packet_slots(&self, demand: &[usize]) -> Vec<Slot> {
        (0..self.files)
            .flat_map(|n| (0..self.users).map(move |k| Slot::new(n, k, usize::from(demand[k] == n))))
            .collect()
    }

    pub fn place_with(&self, library: &FileLibrary, randomness: MdsARandomness) -> Result<(MdsAServer, Vec<MdsACache>)> {
        self.check_randomness(&randomness)?;
        if library.n_files() != self.files {
            return Err(CachingError::Shape(format!("library has {} files, expected {}", library.n_files(), self.files)));
        }
        let coded = encode_library(&self.code, library)?;
        let len = library.file_len() / self.subfile_count();
        let caches = (0..self.users)
            .map(|user| MdsACache {
                user,
                payload: xor_segments(
                    len,
                    self.cache_slots(user).into_iter().map(|s| &coded[s.file][self.index(&randomness, s)]),
                ),
                pad: randomness.pads[user],
            })
            .collect();
        Ok((MdsAServer { randomness, coded }, caches))
    }

    pub fn place<R: Rng + ?Sized>(&self, library: &FileLibrary, rng: &mut R) -> Result<(MdsAServer, Vec<MdsACache>)> {
        let randomness = self.draw(rng);
        self.place_with(library, randomness)
    }

    fn check_demand(&self, demand: &[usize]) -> Result<()> {
        if demand.len() != self.users || demand.iter().any(|&d| d >= self.files) {
            return Err(param(format!("demand {demand:?} invalid for N={}, K={}", self.files, self.users)));
        }
        Ok(())
    }

    pub fn deliver(&self, server: &MdsAServer, demand: &[usize]) -> Result<MdsAPacket> {
        self.check_demand(demand)?;
        let rnd = &server.randomness;
        let slots = self.packet_slots(demand);
        let j0: Vec<usize> = slots.iter().map(|&s| self.index(rnd, s)).collect();
        let segments = slots.iter().zip(&j0).map(|(s, &i)| server.coded[s.file][i].clone()).collect();
        let n_code = self.code.n_code();
        let j1 = (0..self.users)
            .map(|k| (self.index(rnd, Slot::new(demand[k], k, 0)) + rnd.pads[k]) % n_code)
            .collect();
        Ok(MdsAPacket { segments, j0, j1 })
    }

    pub fn decode(&self, cache: &MdsACache, packet: &MdsAPacket, demand_k: usize) -> Result<Vec<Symbol>> {
        let (k, n_code) = (cache.user, self.code.n_code());
        if k >= self.users || demand_k >= self.files {
            return Err(param("user or demand out of range"));
        }
        if packet.segments.len() != self.files * self.users || packet.j0.len() != packet.segments.len() {
            return Err(CachingError::Shape("packet size does not match the scheme".into()));
        }
        let at = |n: usize, i: usize| n * self.users + i;
        let mut own = cache.payload.clone();
        for n in (0..self.files).filter(|&n| n != demand_k) {
            crate::library::xor_into(&mut own, &packet.segments[at(n, k)]);
        }
        let own_index = (packet.j1[k] + n_code - cache.pad % n_code) % n_code;
        let mut pieces: Vec<(usize, Segment)> =
            (0..self.users).map(|i| (packet.j0[at(demand_k, i)], packet.segments[at(demand_k, i)].clone())).collect();
        pieces.push((own_index, own));
        reassemble(&self.code, pieces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn packet_structure_matches_worked_table() {
        let scheme = MdsA::new(2, 2).unwrap();
        let s: Vec<String> = scheme.packet_slots(&[0, 1]).iter().map(|s| s.to_string()).collect();
        assert_eq!(s, ["w(0)[0,1]", "w(1)[0,0]", "w(0)[1,0]", "w(1)[1,1]"]);
    }

    #[test]
    fn masked_index_for_repeated_demand() {
        let scheme = MdsA::new(2, 2).unwrap();
        let rnd = MdsARandomness { perms: vec![vec![2, 0, 3, 1], vec![1, 3, 0, 2]], pads: vec![3, 1] };
        let lib = FileLibrary::zeros(2, 3, 3);
        let (server, caches) = scheme.place_with(&lib, rnd).unwrap();
        let packet = scheme.deliver(&server, &[0, 0]).unwrap();
        // p^(0)_{0,0} = 2, p^(1)_{0,0} = 3
        assert_eq!(packet.j1, vec![(2 + 3) % 4, (3 + 1) % 4]);
        assert_eq!(packet.j0, vec![0, 1, 1, 0]);
        assert!(packet.segments.iter().flatten().all(|&x| x == 0));
        assert!(caches.iter().all(|c| c.payload.iter().all(|&x| x == 0)));
    }

    #[test]
    fn every_demand_decodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (files, users) in [(2, 2), (2, 3), (3, 3), (3, 4), (1, 2), (4, 2)] {
            let scheme = MdsA::new(files, users).unwrap();
            let bits = scheme.field().spec().m();
            for _ in 0..5 {
                let lib = FileLibrary::random(files, scheme.subfile_count() * 2, bits, &mut rng);
                let (server, caches) = scheme.place(&lib, &mut rng).unwrap();
                for code in 0..files.pow(users as u32) {
                    let demand: Vec<usize> = (0..users).map(|k| code / files.pow(k as u32) % files).collect();
                    let packet = scheme.deliver(&server, &demand).unwrap();
                    for (k, cache) in caches.iter().enumerate() {
                        let file = scheme.decode(cache, &packet, demand[k]).unwrap();
                        lib.verify(demand[k], &file).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn wrong_pad_breaks_decoding() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let scheme = MdsA::new(2, 2).unwrap();
        let lib = FileLibrary::random(2, 3, 3, &mut rng);
        let mut rnd = scheme.draw(&mut rng);
        rnd.pads = vec![0, 1];
        let (server, mut caches) = scheme.place_with(&lib, rnd).unwrap();
        caches[0].pad = 1;
        let packet = scheme.deliver(&server, &[1, 0]).unwrap();
        let outcome = scheme.decode(&caches[0], &packet, 1).and_then(|f| lib.verify(1, &f));
        assert!(matches!(outcome, Err(CachingError::Integrity(_))));
    }

    #[test]
    fn symbols_must_fit_the_field() {
        let scheme = MdsA::new(2, 2).unwrap();
        let lib = FileLibrary::zeros(2, 3, 8);
        assert!(scheme.place(&lib, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
