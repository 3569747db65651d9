//! Machine checks of decodability and demand privacy.
//!
//! Every audit returns an [`AuditReport`]. Randomness for trial `t` comes
//! from a ChaCha stream keyed by `(seed, t)`, so reports do not depend on
//! how trials are scheduled across threads.

mod auxiliary;
mod correctness;
mod faults;
mod privacy;
mod rank;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use auxiliary::{audit_privacy_aux, aux_state_count, chi_square_homogeneity};
pub use correctness::{audit_correctness, Mismatch};
pub use faults::{Honest, LeakDemand, RepeatCachedSegment, SwapPads, Tamper, UnmaskIndices};
pub use privacy::{audit_colluding, audit_privacy_exact, exact_state_count};
pub use rank::{audit_privacy_rank, rank_target};

use crate::scheme::Scheme;

pub const SCHEMA_VERSION: u32 = 1;
/// Largest state space an exact audit will enumerate.
pub const STATE_LIMIT: u128 = 10_000_000;
/// Largest demand set audited exhaustively; beyond it a uniform sample.
pub const DEMAND_LIMIT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Rank,
    Statistical,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Rank => "rank",
            Mode::Statistical => "statistical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub metric: f64,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, metric: f64, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, metric, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema_version: u32,
    pub scheme: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub seed: u64,
    pub mode: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl AuditReport {
    pub fn new(scheme: &Scheme, seed: u64, mode: &str, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        AuditReport {
            schema_version: SCHEMA_VERSION,
            scheme: scheme.name().to_string(),
            params: scheme_params(scheme),
            seed,
            mode: mode.to_string(),
            checks,
            pass,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

pub fn scheme_params(scheme: &Scheme) -> BTreeMap<String, serde_json::Value> {
    let mut p = BTreeMap::new();
    p.insert("n".into(), scheme.files().into());
    p.insert("k".into(), scheme.users().into());
    match scheme {
        Scheme::VirtualUser(s) => {
            p.insert("r".into(), s.r().into());
        }
        Scheme::Shared(s) => {
            p.insert("alpha".into(), s.alpha().to_string().into());
            p.insert("first".into(), serde_json::Value::Object(scheme_params(s.first()).into_iter().collect()));
            p.insert("first_scheme".into(), s.first().name().into());
            p.insert("second".into(), serde_json::Value::Object(scheme_params(s.second()).into_iter().collect()));
            p.insert("second_scheme".into(), s.second().name().into());
        }
        _ => {}
    }
    p
}

/// Independent generator for trial `stream` under `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `index`-th demand vector in `[N]^K`, user 0 least significant.
pub fn demand_at(files: usize, users: usize, mut index: u64) -> Vec<usize> {
    (0..users)
        .map(|_| {
            let d = (index % files as u64) as usize;
            index /= files as u64;
            d
        })
        .collect()
}

pub fn demand_count(files: usize, users: usize) -> Option<u64> {
    (files as u64).checked_pow(users as u32)
}

/// Every demand, or a seeded uniform sample of [`DEMAND_LIMIT`] of them.
pub fn demand_set(files: usize, users: usize, seed: u64) -> Vec<Vec<usize>> {
    use rand::Rng;
    match demand_count(files, users) {
        Some(total) if total <= DEMAND_LIMIT as u64 => (0..total).map(|i| demand_at(files, users, i)).collect(),
        _ => {
            let mut rng = trial_rng(seed, u64::MAX);
            (0..DEMAND_LIMIT).map(|_| (0..users).map(|_| rng.gen_range(0..files)).collect()).collect()
        }
    }
}

pub fn format_demand(demand: &[usize]) -> String {
    let parts: Vec<String> = demand.iter().map(usize::to_string).collect();
    format!("({})", parts.join(","))
}

/// Total-variation distance between two count tables of equal mass.
pub(crate) fn total_variation<K: Ord>(a: &BTreeMap<K, u128>, b: &BTreeMap<K, u128>) -> (u128, u128) {
    let total: u128 = a.values().sum();
    let mut diff = 0u128;
    for (key, &x) in a {
        diff += x.abs_diff(b.get(key).copied().unwrap_or(0));
    }
    for (key, &y) in b {
        if !a.contains_key(key) {
            diff += y;
        }
    }
    (diff, 2 * total.max(1))
}
