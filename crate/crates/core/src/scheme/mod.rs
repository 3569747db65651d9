//! One interface over every scheme: placement, delivery, decoding,
//! size accounting and symbolic packet tables.

mod share;
mod trivial;

use num_traits::{One, Zero};
use rand::Rng;

pub use share::MemoryShare;
pub use trivial::{Trivial, TrivialPacket};

use crate::bounds::{rat, thm1_point, Rational};
use crate::coded::Slot;
use crate::error::{param, CachingError, Result};
use crate::field::Symbol;
use crate::library::FileLibrary;
use crate::mds_a::{MdsA, MdsACache, MdsAPacket, MdsAServer};
use crate::mds_b::{h_map, leaders, MdsB, MdsBCache, MdsBPacket, MdsBServer};
use crate::subsets::{k_subsets_within, Subset};
use crate::virtual_user::{demand_mask, xsub_terms, VuCache, VuPacket, VuScheme, VuServer};

#[derive(Debug, Clone)]
pub enum Scheme {
    Trivial(Trivial),
    VirtualUser(VuScheme),
    MdsA(MdsA),
    MdsB(MdsB),
    Shared(Box<MemoryShare>),
}

/// Per-part state of a memory-shared scheme; a part is absent when its
/// fraction of the file is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parts<T> {
    pub first: Option<T>,
    pub second: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ServerState {
    Trivial(FileLibrary),
    VirtualUser(VuServer),
    MdsA(MdsAServer),
    MdsB(MdsBServer),
    Shared(Box<Parts<ServerState>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CacheBundle {
    Trivial { user: usize },
    VirtualUser(VuCache),
    MdsA(MdsACache),
    MdsB(MdsBCache),
    Shared(Box<Parts<CacheBundle>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeliveryPacket {
    Trivial(TrivialPacket),
    VirtualUser(VuPacket),
    MdsA(MdsAPacket),
    MdsB(MdsBPacket),
    Shared(Box<Parts<DeliveryPacket>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub server: ServerState,
    pub caches: Vec<CacheBundle>,
}

/// One line of a symbolic packet listing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub label: String,
    pub content: String,
}

fn row(label: impl Into<String>, content: impl Into<String>) -> TableRow {
    TableRow { label: label.into(), content: content.into() }
}

/// Exact sizes of one round. Payload figures exclude auxiliary metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasuredRates {
    pub file_symbols: usize,
    pub symbol_bits: u32,
    pub payload_m: Rational,
    pub payload_r: Rational,
    pub total_m_bits: u64,
    pub total_r_bits: u64,
}

impl MeasuredRates {
    pub fn file_bits(&self) -> u64 {
        self.file_symbols as u64 * self.symbol_bits as u64
    }
}

/// A completed placement and delivery for one demand.
#[derive(Debug, Clone)]
pub struct Round {
    pub demand: Vec<usize>,
    pub placement: Placement,
    pub packet: DeliveryPacket,
}

/// Bits needed to write a value below `range`.
pub fn width(range: usize) -> u64 {
    if range <= 1 {
        0
    } else {
        (usize::BITS - (range - 1).leading_zeros()) as u64
    }
}

fn mismatch(what: &str) -> CachingError {
    CachingError::Shape(format!("{what} belongs to a different scheme"))
}

fn lcm_up_to(n: usize) -> u64 {
    use num_integer::Integer;
    (1..=n as u64).fold(1, |acc, x| acc.lcm(&x))
}

fn push_segments<'a>(out: &mut Vec<u64>, segs: impl IntoIterator<Item = &'a Vec<Symbol>>) {
    for s in segs {
        out.push(s.len() as u64);
        out.extend(s.iter().map(|&x| x as u64));
    }
}

fn subset_key(s: Subset) -> u64 {
    s.bits()
}

impl Scheme {
    pub fn trivial(files: usize, users: usize) -> Result<Self> {
        Ok(Scheme::Trivial(Trivial::new(files, users)?))
    }

    pub fn virtual_user(files: usize, users: usize, r: usize) -> Result<Self> {
        Ok(Scheme::VirtualUser(VuScheme::new(files, users, r)?))
    }

    pub fn mds_a(files: usize, users: usize) -> Result<Self> {
        Ok(Scheme::MdsA(MdsA::new(files, users)?))
    }

    pub fn mds_b(files: usize, users: usize) -> Result<Self> {
        Ok(Scheme::MdsB(MdsB::new(files, users)?))
    }

    pub fn shared(first: Scheme, second: Scheme, alpha: Rational) -> Result<Self> {
        Ok(Scheme::Shared(Box::new(MemoryShare::new(first, second, alpha)?)))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Trivial(_) => "trivial",
            Scheme::VirtualUser(_) => "vu",
            Scheme::MdsA(_) => "mds-a",
            Scheme::MdsB(_) => "mds-b",
            Scheme::Shared(_) => "share",
        }
    }

    pub fn files(&self) -> usize {
        match self {
            Scheme::Trivial(s) => s.files(),
            Scheme::VirtualUser(s) => s.files(),
            Scheme::MdsA(s) => s.files(),
            Scheme::MdsB(s) => s.files(),
            Scheme::Shared(s) => s.first().files(),
        }
    }

    pub fn users(&self) -> usize {
        match self {
            Scheme::Trivial(s) => s.users(),
            Scheme::VirtualUser(s) => s.users(),
            Scheme::MdsA(s) => s.users(),
            Scheme::MdsB(s) => s.users(),
            Scheme::Shared(s) => s.first().users(),
        }
    }

    /// File lengths (in symbols) must be multiples of this.
    pub fn file_len_unit(&self) -> usize {
        match self {
            Scheme::Trivial(_) => 1,
            Scheme::VirtualUser(s) => s.subfile_count(),
            Scheme::MdsA(s) => s.subfile_count(),
            Scheme::MdsB(s) => s.subfile_count(),
            Scheme::Shared(s) => s.file_len_unit(),
        }
    }

    /// Widest symbol the scheme can carry.
    pub fn max_symbol_bits(&self) -> u32 {
        match self {
            Scheme::Trivial(_) | Scheme::VirtualUser(_) => 16,
            Scheme::MdsA(s) => s.field().spec().m(),
            Scheme::MdsB(s) => s.field().spec().m(),
            Scheme::Shared(s) => s.first().max_symbol_bits().min(s.second().max_symbol_bits()),
        }
    }

    /// Bytes for schemes without a field, field elements otherwise.
    pub fn default_symbol_bits(&self) -> u32 {
        self.max_symbol_bits().min(8)
    }

    /// The `(M, R)` the scheme is designed to achieve.
    pub fn formula_point(&self) -> (Rational, Rational) {
        let (n, k) = (self.files() as i128, self.users() as i128);
        match self {
            Scheme::Trivial(_) => (Rational::zero(), Rational::from_integer(n)),
            Scheme::VirtualUser(s) => {
                let p = thm1_point(s.files(), s.users(), s.r()).expect("validated at construction");
                (p.m, p.r)
            }
            Scheme::MdsA(_) => (rat(1, k + 1), rat(k * n, k + 1)),
            Scheme::MdsB(_) => (rat(n, (k + 1) * (n - 1)), rat(k * n - 1, k + 1)),
            Scheme::Shared(s) => {
                let (a, b) = (s.first().formula_point(), s.second().formula_point());
                let w = s.alpha();
                let v = Rational::one() - w;
                (w * a.0 + v * b.0, w * a.1 + v * b.1)
            }
        }
    }

    pub fn random_library<R: Rng + ?Sized>(&self, units: usize, rng: &mut R) -> FileLibrary {
        FileLibrary::random(self.files(), units * self.file_len_unit(), self.default_symbol_bits(), rng)
    }

    fn check_library(&self, library: &FileLibrary) -> Result<()> {
        if library.n_files() != self.files() {
            return Err(CachingError::Shape(format!(
                "library has {} files, scheme expects {}",
                library.n_files(),
                self.files()
            )));
        }
        if library.symbol_bits() > self.max_symbol_bits() {
            return Err(param(format!(
                "{}-bit symbols exceed the {}-bit limit of {}",
                library.symbol_bits(),
                self.max_symbol_bits(),
                self.name()
            )));
        }
        Ok(())
    }

    fn check_demand(&self, demand: &[usize]) -> Result<()> {
        if demand.len() != self.users() || demand.iter().any(|&d| d >= self.files()) {
            return Err(param(format!("demand {demand:?} invalid for N={}, K={}", self.files(), self.users())));
        }
        Ok(())
    }

    fn split_library(share: &MemoryShare, library: &FileLibrary) -> Result<(Option<FileLibrary>, Option<FileLibrary>)> {
        let len = library.file_len();
        let (head, tail) = share.split_len(len)?;
        let first = (head > 0).then(|| library.slice(0..head));
        let second = (tail > 0).then(|| library.slice(head..len));
        Ok((first, second))
    }

    fn shared_placement(first: Option<Placement>, second: Option<Placement>, users: usize) -> Placement {
        let (fs, fc) = match first {
            Some(p) => (Some(p.server), p.caches.into_iter().map(Some).collect()),
            None => (None, vec![None; users]),
        };
        let (ss, sc) = match second {
            Some(p) => (Some(p.server), p.caches.into_iter().map(Some).collect()),
            None => (None, vec![None; users]),
        };
        let caches = fc
            .into_iter()
            .zip(sc)
            .map(|(first, second)| CacheBundle::Shared(Box::new(Parts { first, second })))
            .collect();
        Placement { server: ServerState::Shared(Box::new(Parts { first: fs, second: ss })), caches }
    }

    pub fn place<R: Rng + ?Sized>(&self, library: &FileLibrary, rng: &mut R) -> Result<Placement> {
        self.check_library(library)?;
        match self {
            Scheme::Trivial(s) => Ok(Placement {
                server: ServerState::Trivial(library.clone()),
                caches: (0..s.users()).map(|user| CacheBundle::Trivial { user }).collect(),
            }),
            Scheme::VirtualUser(s) => {
                let (server, caches) = s.place(library, rng)?;
                Ok(Placement {
                    server: ServerState::VirtualUser(server),
                    caches: caches.into_iter().map(CacheBundle::VirtualUser).collect(),
                })
            }
            Scheme::MdsA(s) => {
                let (server, caches) = s.place(library, rng)?;
                Ok(Placement { server: ServerState::MdsA(server), caches: caches.into_iter().map(CacheBundle::MdsA).collect() })
            }
            Scheme::MdsB(s) => {
                let (server, caches) = s.place(library, rng)?;
                Ok(Placement { server: ServerState::MdsB(server), caches: caches.into_iter().map(CacheBundle::MdsB).collect() })
            }
            Scheme::Shared(s) => {
                let (l1, l2) = Self::split_library(s, library)?;
                let first = l1.map(|l| s.first().place(&l, rng)).transpose()?;
                let second = l2.map(|l| s.second().place(&l, rng)).transpose()?;
                Ok(Self::shared_placement(first, second, self.users()))
            }
        }
    }

    pub fn deliver<R: Rng + ?Sized>(&self, server: &ServerState, demand: &[usize], rng: &mut R) -> Result<DeliveryPacket> {
        self.check_demand(demand)?;
        match (self, server) {
            (Scheme::Trivial(s), ServerState::Trivial(lib)) => Ok(DeliveryPacket::Trivial(s.deliver(lib))),
            (Scheme::VirtualUser(s), ServerState::VirtualUser(st)) => {
                Ok(DeliveryPacket::VirtualUser(s.deliver(st, demand, rng)?))
            }
            (Scheme::MdsA(s), ServerState::MdsA(st)) => Ok(DeliveryPacket::MdsA(s.deliver(st, demand)?)),
            (Scheme::MdsB(s), ServerState::MdsB(st)) => Ok(DeliveryPacket::MdsB(s.deliver(st, demand, rng)?)),
            (Scheme::Shared(s), ServerState::Shared(parts)) => {
                let first = parts.first.as_ref().map(|st| s.first().deliver(st, demand, rng)).transpose()?;
                let second = parts.second.as_ref().map(|st| s.second().deliver(st, demand, rng)).transpose()?;
                Ok(DeliveryPacket::Shared(Box::new(Parts { first, second })))
            }
            _ => Err(mismatch("server state")),
        }
    }

    pub fn decode(&self, cache: &CacheBundle, packet: &DeliveryPacket, demand_k: usize) -> Result<Vec<Symbol>> {
        match (self, cache, packet) {
            (Scheme::Trivial(s), CacheBundle::Trivial { .. }, DeliveryPacket::Trivial(p)) => s.decode(p, demand_k),
            (Scheme::VirtualUser(s), CacheBundle::VirtualUser(c), DeliveryPacket::VirtualUser(p)) => {
                s.decode(c, p, demand_k)
            }
            (Scheme::MdsA(s), CacheBundle::MdsA(c), DeliveryPacket::MdsA(p)) => s.decode(c, p, demand_k),
            (Scheme::MdsB(s), CacheBundle::MdsB(c), DeliveryPacket::MdsB(p)) => s.decode(c, p, demand_k),
            (Scheme::Shared(s), CacheBundle::Shared(c), DeliveryPacket::Shared(p)) => {
                let mut out = Vec::new();
                for (scheme, cache, packet) in
                    [(s.first(), &c.first, &p.first), (s.second(), &c.second, &p.second)]
                {
                    match (cache, packet) {
                        (Some(c), Some(p)) => out.extend(scheme.decode(c, p, demand_k)?),
                        (None, None) => {}
                        _ => return Err(mismatch("shared part")),
                    }
                }
                Ok(out)
            }
            _ => Err(mismatch("cache or packet")),
        }
    }

    pub fn round<R: Rng + ?Sized>(&self, library: &FileLibrary, demand: &[usize], rng: &mut R) -> Result<Round> {
        let placement = self.place(library, rng)?;
        let packet = self.deliver(&placement.server, demand, rng)?;
        Ok(Round { demand: demand.to_vec(), placement, packet })
    }

    /// Decodes for every user and checks against the library.
    pub fn verify_round(&self, library: &FileLibrary, round: &Round) -> Result<()> {
        for (k, cache) in round.placement.caches.iter().enumerate() {
            let file = self.decode(cache, &round.packet, round.demand[k])?;
            library.verify(round.demand[k], &file).map_err(|e| match e {
                CachingError::Integrity(msg) => CachingError::Integrity(format!("user {k}: {msg}")),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn cache_symbols(cache: &CacheBundle) -> usize {
        match cache {
            CacheBundle::Trivial { .. } => 0,
            CacheBundle::VirtualUser(c) => c.segments.values().map(Vec::len).sum(),
            CacheBundle::MdsA(c) => c.payload.len(),
            CacheBundle::MdsB(c) => c.payload.iter().map(Vec::len).sum(),
            CacheBundle::Shared(p) => [&p.first, &p.second].into_iter().flatten().map(Self::cache_symbols).sum(),
        }
    }

    pub fn packet_symbols(packet: &DeliveryPacket) -> usize {
        match packet {
            DeliveryPacket::Trivial(p) => p.files.iter().map(Vec::len).sum(),
            DeliveryPacket::VirtualUser(p) => p.payload.values().map(Vec::len).sum(),
            DeliveryPacket::MdsA(p) => p.segments.iter().map(Vec::len).sum(),
            DeliveryPacket::MdsB(p) => {
                p.blocks.iter().map(|b| b.plain.iter().chain(&b.shuffled).map(Vec::len).sum::<usize>()).sum::<usize>()
                    + p.cross.len()
            }
            DeliveryPacket::Shared(p) => [&p.first, &p.second].into_iter().flatten().map(Self::packet_symbols).sum(),
        }
    }

    /// Bits of pads, offsets and other side information in a cache.
    pub fn cache_metadata_bits(&self, cache: &CacheBundle) -> u64 {
        let (n, k) = (self.files(), self.users());
        match (self, cache) {
            (Scheme::VirtualUser(_), CacheBundle::VirtualUser(_)) => width(n),
            (Scheme::MdsA(s), CacheBundle::MdsA(_)) => width(s.code().n_code()),
            (Scheme::MdsB(s), CacheBundle::MdsB(c)) => {
                let extra = if c.extra_pads.is_some() { n as u64 * width(k) } else { 0 };
                n as u64 * (width(s.code().n_code()) + width(k)) + extra
            }
            (Scheme::Shared(s), CacheBundle::Shared(p)) => {
                p.first.as_ref().map_or(0, |c| s.first().cache_metadata_bits(c))
                    + p.second.as_ref().map_or(0, |c| s.second().cache_metadata_bits(c))
            }
            _ => 0,
        }
    }

    /// Bits of public indices and masked auxiliaries in a packet.
    pub fn packet_metadata_bits(&self, packet: &DeliveryPacket) -> u64 {
        let (n, k) = (self.files(), self.users());
        match (self, packet) {
            (Scheme::VirtualUser(s), DeliveryPacket::VirtualUser(_)) => k as u64 * width(n) + width(s.labels()),
            (Scheme::MdsA(s), DeliveryPacket::MdsA(p)) => (p.j0.len() + p.j1.len()) as u64 * width(s.code().n_code()),
            (Scheme::MdsB(s), DeliveryPacket::MdsB(p)) => {
                let j0 = p.j0_plain.iter().chain(&p.j0_shuffled).map(Vec::len).sum::<usize>() as u64;
                (j0 + (k * n) as u64) * width(s.code().n_code()) + ((k * n) as u64 + p.j3.len() as u64) * width(k)
            }
            (Scheme::Shared(s), DeliveryPacket::Shared(p)) => {
                p.first.as_ref().map_or(0, |x| s.first().packet_metadata_bits(x))
                    + p.second.as_ref().map_or(0, |x| s.second().packet_metadata_bits(x))
            }
            _ => 0,
        }
    }

    /// Sizes of a round over files of `file_symbols` symbols of `symbol_bits` bits.
    pub fn measure(&self, round: &Round, file_symbols: usize, symbol_bits: u32) -> MeasuredRates {
        let caches = &round.placement.caches;
        let cache_max = caches.iter().map(Self::cache_symbols).max().unwrap_or(0);
        let packet = Self::packet_symbols(&round.packet);
        let bits = symbol_bits as u64;
        let total_m_bits = caches
            .iter()
            .map(|c| Self::cache_symbols(c) as u64 * bits + self.cache_metadata_bits(c))
            .max()
            .unwrap_or(0);
        let f = file_symbols.max(1) as i128;
        MeasuredRates {
            file_symbols,
            symbol_bits,
            payload_m: rat(cache_max as i128, f),
            payload_r: rat(packet as i128, f),
            total_m_bits,
            total_r_bits: packet as u64 * bits + self.packet_metadata_bits(&round.packet),
        }
    }

    /// Number of equally likely placement randomness values, when small
    /// enough to enumerate.
    pub fn placement_choices(&self) -> Option<u64> {
        match self {
            Scheme::Trivial(_) => Some(1),
            Scheme::VirtualUser(s) => (s.files() as u64).checked_pow(s.users() as u32),
            Scheme::MdsA(_) | Scheme::MdsB(_) => None,
            Scheme::Shared(s) => s.first().placement_choices()?.checked_mul(s.second().placement_choices()?),
        }
    }

    /// Placement with its randomness fixed to the `index`-th value.
    pub fn place_choice(&self, library: &FileLibrary, index: u64) -> Result<Placement> {
        self.check_library(library)?;
        match self {
            Scheme::Trivial(_) => self.place(library, &mut rand::rngs::mock::StepRng::new(0, 0)),
            Scheme::VirtualUser(s) => {
                let n = s.files() as u64;
                let offsets: Vec<usize> = (0..s.users()).map(|k| (index / n.pow(k as u32) % n) as usize).collect();
                let (server, caches) = s.place_with(library, &offsets)?;
                Ok(Placement {
                    server: ServerState::VirtualUser(server),
                    caches: caches.into_iter().map(CacheBundle::VirtualUser).collect(),
                })
            }
            Scheme::MdsA(_) | Scheme::MdsB(_) => Err(param("placement randomness of MDS schemes is not enumerable")),
            Scheme::Shared(s) => {
                let c1 = s.first().placement_choices().ok_or_else(|| param("first part not enumerable"))?;
                let (l1, l2) = Self::split_library(s, library)?;
                let first = l1.map(|l| s.first().place_choice(&l, index % c1)).transpose()?;
                let second = l2.map(|l| s.second().place_choice(&l, index / c1)).transpose()?;
                Ok(Self::shared_placement(first, second, self.users()))
            }
        }
    }

    /// Number of equally likely delivery randomness values for this demand.
    pub fn delivery_choices(&self, server: &ServerState, demand: &[usize]) -> Result<u64> {
        self.check_demand(demand)?;
        match (self, server) {
            (Scheme::Trivial(_), _) => Ok(1),
            (Scheme::VirtualUser(s), ServerState::VirtualUser(st)) => {
                let d = s.shifted_demand(&st.offsets, demand)?;
                Ok(demand_mask(s.files(), &d)?.len() as u64)
            }
            (Scheme::Shared(s), ServerState::Shared(p)) => {
                let c1 = p.first.as_ref().map(|st| s.first().delivery_choices(st, demand)).transpose()?.unwrap_or(1);
                let c2 = p.second.as_ref().map(|st| s.second().delivery_choices(st, demand)).transpose()?.unwrap_or(1);
                Ok(c1 * c2)
            }
            (Scheme::MdsA(_), _) => Ok(1),
            (Scheme::MdsB(_), _) => Err(param("delivery randomness of this scheme is not enumerable")),
            _ => Err(mismatch("server state")),
        }
    }

    /// A multiple of every possible [`Scheme::delivery_choices`] count.
    pub fn delivery_weight_base(&self) -> Option<u64> {
        match self {
            Scheme::Trivial(_) | Scheme::MdsA(_) => Some(1),
            Scheme::VirtualUser(s) => Some(lcm_up_to(s.labels())),
            Scheme::MdsB(_) => None,
            Scheme::Shared(s) => s.first().delivery_weight_base()?.checked_mul(s.second().delivery_weight_base()?),
        }
    }

    /// Delivery with its randomness fixed to the `index`-th value.
    pub fn deliver_choice(&self, server: &ServerState, demand: &[usize], index: u64) -> Result<DeliveryPacket> {
        self.check_demand(demand)?;
        match (self, server) {
            (Scheme::VirtualUser(s), ServerState::VirtualUser(st)) => {
                Ok(DeliveryPacket::VirtualUser(s.deliver_with(st, demand, index as usize)?))
            }
            (Scheme::Shared(s), ServerState::Shared(p)) => {
                let c1 = p.first.as_ref().map(|st| s.first().delivery_choices(st, demand)).transpose()?.unwrap_or(1);
                let first = p.first.as_ref().map(|st| s.first().deliver_choice(st, demand, index % c1)).transpose()?;
                let second = p.second.as_ref().map(|st| s.second().deliver_choice(st, demand, index / c1)).transpose()?;
                Ok(DeliveryPacket::Shared(Box::new(Parts { first, second })))
            }
            (Scheme::MdsB(_), _) => Err(param("delivery randomness of this scheme is not enumerable")),
            _ => self.deliver(server, demand, &mut rand::rngs::mock::StepRng::new(0, 0)),
        }
    }

    /// Everything a user holds after delivery, flattened: the broadcast and
    /// its own cache including private randomness.
    pub fn observable(cache: &CacheBundle, packet: &DeliveryPacket) -> Vec<u64> {
        let mut out = Vec::new();
        Self::observe_packet(packet, &mut out);
        Self::observe_cache(cache, &mut out);
        out
    }

    pub fn observe_packet(packet: &DeliveryPacket, out: &mut Vec<u64>) {
        match packet {
            DeliveryPacket::Trivial(p) => push_segments(out, &p.files),
            DeliveryPacket::VirtualUser(p) => {
                out.extend(p.d.iter().map(|&x| x as u64));
                out.push(p.t_d as u64);
                for ((n, s), seg) in &p.payload {
                    out.push(*n as u64);
                    out.push(subset_key(*s));
                    push_segments(out, [seg]);
                }
            }
            DeliveryPacket::MdsA(p) => {
                push_segments(out, &p.segments);
                out.extend(p.j0.iter().chain(&p.j1).map(|&x| x as u64));
            }
            DeliveryPacket::MdsB(p) => {
                for b in &p.blocks {
                    push_segments(out, b.plain.iter().chain(&b.shuffled));
                }
                push_segments(out, [&p.cross]);
                for v in p.j0_plain.iter().chain(&p.j0_shuffled).chain(&p.j1).chain(&p.j2) {
                    out.push(v.len() as u64);
                    out.extend(v.iter().map(|&x| x as u64));
                }
                out.extend(p.j3.iter().map(|&x| x as u64));
            }
            DeliveryPacket::Shared(p) => {
                for part in [&p.first, &p.second] {
                    out.push(u64::from(part.is_some()));
                    if let Some(x) = part {
                        Self::observe_packet(x, out);
                    }
                }
            }
        }
    }

    pub fn observe_cache(cache: &CacheBundle, out: &mut Vec<u64>) {
        match cache {
            CacheBundle::Trivial { .. } => {}
            CacheBundle::VirtualUser(c) => {
                out.push(c.offset as u64);
                for (s, seg) in &c.segments {
                    out.push(subset_key(*s));
                    push_segments(out, [seg]);
                }
            }
            CacheBundle::MdsA(c) => {
                push_segments(out, [&c.payload]);
                out.push(c.pad as u64);
            }
            CacheBundle::MdsB(c) => {
                push_segments(out, &c.payload);
                out.extend(c.index_pads.iter().chain(&c.position_pads).map(|&x| x as u64));
                if let Some(extra) = &c.extra_pads {
                    out.extend(extra.iter().map(|&x| x as u64));
                }
            }
            CacheBundle::Shared(p) => {
                for part in [&p.first, &p.second] {
                    out.push(u64::from(part.is_some()));
                    if let Some(x) = part {
                        Self::observe_cache(x, out);
                    }
                }
            }
        }
    }

    /// Symbolic listing of a packet: which coded pieces each segment carries.
    pub fn packet_table(&self, server: &ServerState, packet: &DeliveryPacket, demand: &[usize]) -> Result<Vec<TableRow>> {
        self.check_demand(demand)?;
        let mut rows = Vec::new();
        match (self, server, packet) {
            (Scheme::Trivial(s), _, DeliveryPacket::Trivial(_)) => {
                rows.extend((0..s.files()).map(|n| row(format!("X[{n}]"), format!("W[{n}]"))));
            }
            (Scheme::VirtualUser(s), _, DeliveryPacket::VirtualUser(p)) => {
                let v = demand_mask(s.files(), &p.d)?;
                let d: Vec<String> = p.d.iter().map(usize::to_string).collect();
                rows.push(row("d", format!("({})", d.join(","))));
                rows.push(row("V_d", v.to_string()));
                rows.push(row("t_d", p.t_d.to_string()));
                let free = Subset::full(s.labels()).without(p.t_d);
                for set in k_subsets_within(free, s.r().saturating_sub(1)) {
                    let terms: Vec<String> = xsub_terms(v, set).iter().map(|r| format!("W[n,{r}]")).collect();
                    let content = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
                    rows.push(row(format!("X(n)[{set}]"), content));
                }
            }
            (Scheme::MdsA(s), ServerState::MdsA(_), DeliveryPacket::MdsA(p)) => {
                for (i, slot) in s.packet_slots(demand).iter().enumerate() {
                    rows.push(row(format!("X[{i}]"), format!("{slot} = W[{},{}]", slot.file, p.j0[i])));
                }
                for k in 0..s.users() {
                    let own = Slot::new(demand[k], k, 0);
                    rows.push(row(format!("J1[{k}]"), format!("idx {own} + P[{k}] = {}", p.j1[k])));
                }
            }
            (Scheme::MdsB(s), ServerState::MdsB(st), DeliveryPacket::MdsB(p)) => {
                let shuffles = Self::recover_shuffles(s, st, p, demand)?;
                let layout = s.layout(demand, &shuffles)?;
                let lead = leaders(s.files(), demand);
                let names = |terms: &Vec<Slot>| terms.iter().map(Slot::to_string).collect::<Vec<_>>().join(" + ");
                for n in 0..s.files() {
                    for (i, t) in layout.plain[n].iter().enumerate() {
                        rows.push(row(format!("X[{n}].plain[{i}]"), names(t)));
                    }
                    for (i, t) in layout.shuffled[n].iter().enumerate() {
                        rows.push(row(format!("X[{n}].shuffled[{i}]"), names(t)));
                    }
                    rows.push(row(format!("u[{n}]"), lead[n].to_string()));
                }
                rows.push(row("X[N]", names(&layout.cross)));
            }
            (Scheme::Shared(s), ServerState::Shared(st), DeliveryPacket::Shared(p)) => {
                for (tag, scheme, st, p) in [("a", s.first(), &st.first, &p.first), ("b", s.second(), &st.second, &p.second)] {
                    if let (Some(st), Some(p)) = (st, p) {
                        for r in scheme.packet_table(st, p, demand)? {
                            rows.push(row(format!("{tag}.{}", r.label), r.content));
                        }
                    }
                }
            }
            _ => return Err(mismatch("packet")),
        }
        Ok(rows)
    }

    /// Position permutations of a delivered packet, read back through the
    /// server's index permutations.
    fn recover_shuffles(s: &MdsB, st: &MdsBServer, p: &MdsBPacket, demand: &[usize]) -> Result<Vec<Vec<usize>>> {
        let (nf, per_user) = (s.files(), 2 * s.files() - 2);
        let lead = leaders(nf, demand);
        let mut out = Vec::with_capacity(nf);
        for n in 0..nf {
            let perm = &st.randomness.perms[n];
            let mut shuffle = vec![0; s.users()];
            for (pos, &idx) in p.j0_shuffled[n].iter().enumerate() {
                let at = perm.iter().position(|&x| x == idx).ok_or_else(|| CachingError::Internal("bad index".into()))?;
                let (user, m) = (at / per_user, at % per_user);
                let leader_slot = user == 0 && (m >= nf || (n != demand[0] && m == h_map(nf, n, demand[0])?));
                shuffle[if leader_slot { lead[n] } else { user }] = pos;
            }
            out.push(shuffle);
        }
        Ok(out)
    }
}
