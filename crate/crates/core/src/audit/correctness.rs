use rayon::prelude::*;

use super::{demand_set, format_demand, trial_rng, AuditReport, Check, Tamper};
use crate::error::Result;
use crate::library::FileLibrary;
use crate::scheme::Scheme;

/// First decode that failed, located down to the symbol when possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub trial: usize,
    pub demand: Vec<usize>,
    pub user: usize,
    pub symbol: Option<usize>,
    pub reason: String,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "trial {}, demand {}, user {}", self.trial, format_demand(&self.demand), self.user)?;
        if let Some(s) = self.symbol {
            write!(f, ", symbol {s}")?;
        }
        write!(f, ": {}", self.reason)
    }
}

struct TrialOutcome {
    decodes: u64,
    mismatches: u64,
    first: Option<Mismatch>,
}

fn run_trial(
    scheme: &Scheme,
    trial: usize,
    seed: u64,
    units: usize,
    zero_library: bool,
    demands: &[Vec<usize>],
    tamper: &dyn Tamper,
) -> Result<TrialOutcome> {
    let mut rng = trial_rng(seed, trial as u64);
    let library = if zero_library {
        FileLibrary::zeros(scheme.files(), units * scheme.file_len_unit(), scheme.default_symbol_bits())
    } else {
        scheme.random_library(units, &mut rng)
    };
    let mut placement = scheme.place(&library, &mut rng)?;
    tamper.placement(&mut placement);
    let mut out = TrialOutcome { decodes: 0, mismatches: 0, first: None };
    for demand in demands {
        let mut packet = scheme.deliver(&placement.server, demand, &mut rng)?;
        tamper.packet(&placement.server, demand, &mut packet);
        for (user, cache) in placement.caches.iter().enumerate() {
            out.decodes += 1;
            let want = library.file(demand[user]);
            let failure = match scheme.decode(cache, &packet, demand[user]) {
                Ok(got) if got == want => None,
                Ok(got) => Some((
                    got.iter().zip(want).position(|(a, b)| a != b).or(Some(got.len().min(want.len()))),
                    "decoded symbols differ from the file".to_string(),
                )),
                Err(e) => Some((None, e.to_string())),
            };
            if let Some((symbol, reason)) = failure {
                out.mismatches += 1;
                out.first.get_or_insert(Mismatch { trial, demand: demand.clone(), user, symbol, reason });
            }
        }
    }
    Ok(out)
}

/// Decodes every demand (or a capped sample) for every user over `trials`
/// fresh libraries and randomness draws. The last trial uses an all-zero
/// library when `zero_library` is set.
pub fn audit_correctness(
    scheme: &Scheme,
    trials: usize,
    seed: u64,
    units: usize,
    zero_library: bool,
    tamper: &dyn Tamper,
) -> Result<AuditReport> {
    let demands = demand_set(scheme.files(), scheme.users(), seed);
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(scheme, t, seed, units.max(1), zero_library && t + 1 == trials, &demands, tamper))
        .collect::<Result<_>>()?;
    let decodes: u64 = outcomes.iter().map(|o| o.decodes).sum();
    let mismatches: u64 = outcomes.iter().map(|o| o.mismatches).sum();
    let first = outcomes.into_iter().find_map(|o| o.first);
    let detail = match &first {
        None => format!("{decodes} decodes over {trials} trials and {} demands, all exact", demands.len()),
        Some(m) => format!("{mismatches} of {decodes} decodes failed; first at {m}"),
    };
    let checks = vec![
        Check::new("decodes", mismatches == 0, mismatches as f64, detail),
        Check::new("decode_count", decodes > 0, decodes as f64, format!("{trials} trials x {} demands x {} users", demands.len(), scheme.users())),
    ];
    Ok(AuditReport::new(scheme, seed, "exact", checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::{Honest, SwapPads};

    #[test]
    fn counts_every_decode() {
        let scheme = Scheme::mds_a(2, 2).unwrap();
        let report = audit_correctness(&scheme, 10, 1, 1, true, &Honest).unwrap();
        assert!(report.pass, "{}", report.to_json());
        assert_eq!(report.check("decode_count").unwrap().metric, 80.0);
    }

    #[test]
    fn swapped_pads_are_located() {
        let scheme = Scheme::mds_a(2, 2).unwrap();
        let report = audit_correctness(&scheme, 5, 1, 1, false, &SwapPads).unwrap();
        assert!(!report.pass);
        assert!(report.check("decodes").unwrap().detail.contains("first at trial"));
    }
}
