//! Fault injection hooks. An audit that passes the honest scheme must fail
//! each of these.

use crate::scheme::{CacheBundle, DeliveryPacket, Placement, ServerState};

/// Hooks applied by the auditors between the scheme's steps. Every hook
/// defaults to doing nothing.
pub trait Tamper: Sync {
    fn placement(&self, _placement: &mut Placement) {}

    fn packet(&self, _server: &ServerState, _demand: &[usize], _packet: &mut DeliveryPacket) {}

    /// Whatever a user observes, before it is tallied.
    fn view(&self, _demand: &[usize], _view: &mut Vec<u64>) {}

    /// Coefficient rows of one user's view: packet rows first, then
    /// `cache_rows` rows from the cache. Each row lists `(file, coded index)`.
    fn layout(&self, _rows: &mut [Vec<(usize, usize)>], _cache_rows: usize) {}
}

/// No faults.
#[derive(Debug, Clone, Copy, Default)]
pub struct Honest;

impl Tamper for Honest {}

/// Exchanges the index pads held by users 0 and 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct SwapPads;

impl Tamper for SwapPads {
    fn placement(&self, placement: &mut Placement) {
        if let [a, b, ..] = placement.caches.as_mut_slice() {
            match (a, b) {
                (CacheBundle::MdsA(a), CacheBundle::MdsA(b)) => std::mem::swap(&mut a.pad, &mut b.pad),
                (CacheBundle::MdsB(a), CacheBundle::MdsB(b)) => std::mem::swap(&mut a.index_pads, &mut b.index_pads),
                _ => {}
            }
        }
    }
}

/// Sends the per-user cached-segment indices without their pads.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnmaskIndices;

impl Tamper for UnmaskIndices {
    fn packet(&self, server: &ServerState, _demand: &[usize], packet: &mut DeliveryPacket) {
        match (server, packet) {
            (ServerState::MdsA(st), DeliveryPacket::MdsA(p)) => {
                let n = st.randomness.perms[0].len();
                for (j, pad) in p.j1.iter_mut().zip(&st.randomness.pads) {
                    *j = (*j + n - pad) % n;
                }
            }
            (ServerState::MdsB(st), DeliveryPacket::MdsB(p)) => {
                let n = st.randomness.perms[0].len();
                for (row, pads) in p.j1.iter_mut().zip(&st.randomness.index_pads) {
                    for (j, pad) in row.iter_mut().zip(pads) {
                        *j = (*j + n - pad) % n;
                    }
                }
            }
            _ => {}
        }
    }
}

/// Appends the full demand vector to every observation.
#[derive(Debug, Clone, Copy, Default)]
pub struct LeakDemand;

impl Tamper for LeakDemand {
    fn view(&self, demand: &[usize], view: &mut Vec<u64>) {
        view.extend(demand.iter().map(|&d| d as u64));
    }
}

/// Replaces the first packet segment with a copy of a cached one.
#[derive(Debug, Clone, Copy, Default)]
pub struct RepeatCachedSegment;

impl Tamper for RepeatCachedSegment {
    fn layout(&self, rows: &mut [Vec<(usize, usize)>], cache_rows: usize) {
        if cache_rows > 0 && rows.len() > cache_rows {
            let cached = rows[rows.len() - cache_rows].clone();
            rows[0] = cached;
        }
    }
}
