use rayon::prelude::*;

use super::{demand_set, format_demand, trial_rng, AuditReport, Check, Tamper};
use crate::coded::{coefficient_row, Slot};
use crate::error::{param, Result};
use crate::field::Field;
use crate::reed_solomon::ReedSolomon;
use crate::scheme::Scheme;

/// Number of independent segments a user's view must span: the packet
/// payload plus its cache.
pub fn rank_target(scheme: &Scheme) -> Result<usize> {
    let (n, k) = (scheme.files(), scheme.users());
    match scheme {
        Scheme::MdsA(_) => Ok(k * n + 1),
        Scheme::MdsB(_) => Ok(k * n * (n - 1) + 1),
        _ => Err(param("the rank audit applies to the MDS schemes")),
    }
}

fn rank_of(field: Field, code: &ReedSolomon, files: usize, rows: &[Vec<(usize, usize)>]) -> usize {
    let matrix: Vec<_> = rows.iter().map(|terms| coefficient_row(code, files, terms)).collect();
    field.rank(&matrix)
}

struct DrawOutcome {
    min_rank: usize,
    failures: usize,
    first: Option<String>,
}

struct View<'a> {
    draw: usize,
    demand: &'a [usize],
    user: usize,
    cache_rows: usize,
    files: usize,
}

impl DrawOutcome {
    fn record(
        &mut self,
        view: &View,
        mut rows: Vec<Vec<(usize, usize)>>,
        tamper: &dyn Tamper,
        target: usize,
        field: Field,
        code: &ReedSolomon,
    ) {
        tamper.layout(&mut rows, view.cache_rows);
        let rank = rank_of(field, code, view.files, &rows);
        self.min_rank = self.min_rank.min(rank);
        if rank != target || rows.len() != target {
            self.failures += 1;
            self.first.get_or_insert_with(|| {
                format!(
                    "draw {}, demand {}, user {}: rank {rank} of {} rows",
                    view.draw,
                    format_demand(view.demand),
                    view.user,
                    rows.len()
                )
            });
        }
    }
}

/// For every demand, user and randomness draw, checks that the linear map
/// from file symbols to the user's packet and cache segments has full row
/// rank, so those segments are jointly uniform whatever the demand.
pub fn audit_privacy_rank(scheme: &Scheme, draws: usize, seed: u64, tamper: &dyn Tamper) -> Result<AuditReport> {
    let target = rank_target(scheme)?;
    let (n, k) = (scheme.files(), scheme.users());
    let demands = demand_set(n, k, seed);

    let outcomes: Vec<DrawOutcome> = (0..draws)
        .into_par_iter()
        .map(|draw| {
            let mut rng = trial_rng(seed, draw as u64);
            let mut out = DrawOutcome { min_rank: usize::MAX, failures: 0, first: None };
            match scheme {
                Scheme::MdsA(s) => {
                    let rnd = s.draw(&mut rng);
                    let resolve = |slot: Slot| (slot.file, s.index(&rnd, slot));
                    for demand in &demands {
                        let packet: Vec<Vec<(usize, usize)>> =
                            s.packet_slots(demand).into_iter().map(|slot| vec![resolve(slot)]).collect();
                        for user in 0..k {
                            let mut rows = packet.clone();
                            rows.push(s.cache_slots(user).into_iter().map(resolve).collect());
                            out.record(&View { draw, demand, user, cache_rows: 1, files: n }, rows, tamper, target, s.field(), s.code());
                        }
                    }
                }
                Scheme::MdsB(s) => {
                    let rnd = s.draw(&mut rng);
                    let resolve = |slot: &Slot| (slot.file, s.index(&rnd, *slot));
                    for demand in &demands {
                        let layout = s.layout(demand, &s.draw_shuffles(&mut rng))?;
                        let packet: Vec<Vec<(usize, usize)>> =
                            layout.rows().map(|terms| terms.iter().map(resolve).collect()).collect();
                        for user in 0..k {
                            let mut rows = packet.clone();
                            rows.extend(s.cache_slots(user).iter().map(|terms| terms.iter().map(resolve).collect()));
                            out.record(&View { draw, demand, user, cache_rows: n, files: n }, rows, tamper, target, s.field(), s.code());
                        }
                    }
                }
                _ => unreachable!("rank_target rejects other schemes"),
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let failures: usize = outcomes.iter().map(|o| o.failures).sum();
    let min_rank = outcomes.iter().map(|o| o.min_rank).min().unwrap_or(0);
    let first = outcomes.into_iter().find_map(|o| o.first);
    let views = draws * demands.len() * k;
    let detail = match first {
        None => format!("rank {target}/{target} for all {views} views ({} demands x {draws} draws x {k} users)", demands.len()),
        Some(f) => format!("{failures} of {views} views rank-deficient; first: {f}"),
    };
    let checks = vec![Check::new("full_rank", failures == 0, min_rank as f64, detail)];
    Ok(AuditReport::new(scheme, seed, "rank", checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::{Honest, RepeatCachedSegment};

    #[test]
    fn targets() {
        assert_eq!(rank_target(&Scheme::mds_a(2, 2).unwrap()).unwrap(), 5);
        assert_eq!(rank_target(&Scheme::mds_b(3, 3).unwrap()).unwrap(), 19);
        assert!(rank_target(&Scheme::trivial(2, 2).unwrap()).is_err());
    }

    #[test]
    fn full_rank_and_deficit() {
        let a = Scheme::mds_a(2, 2).unwrap();
        let report = audit_privacy_rank(&a, 20, 5, &Honest).unwrap();
        assert!(report.pass, "{}", report.to_json());
        assert_eq!(report.checks[0].metric, 5.0);
        assert!(!audit_privacy_rank(&a, 5, 5, &RepeatCachedSegment).unwrap().pass);
        let b = Scheme::mds_b(3, 3).unwrap();
        assert!(audit_privacy_rank(&b, 2, 5, &Honest).unwrap().pass);
        assert!(!audit_privacy_rank(&b, 2, 5, &RepeatCachedSegment).unwrap().pass);
    }
}
