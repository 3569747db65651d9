use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{demand_at, demand_count, format_demand, total_variation, AuditReport, Check, Tamper, STATE_LIMIT};
use crate::error::{param, CachingError, Result};
use crate::library::FileLibrary;
use crate::scheme::{Placement, Scheme};

type Counts = BTreeMap<Vec<u64>, u128>;

fn factorial(n: usize) -> u128 {
    (1..=n as u128).fold(1u128, |a, x| a.saturating_mul(x))
}

fn pow(base: u128, exp: usize) -> u128 {
    (0..exp).fold(1u128, |a, _| a.saturating_mul(base))
}

fn choice_bound(scheme: &Scheme) -> Option<u128> {
    match scheme {
        Scheme::Trivial(_) => Some(1),
        Scheme::VirtualUser(s) => Some(s.labels() as u128),
        Scheme::Shared(s) => Some(choice_bound(s.first())?.saturating_mul(choice_bound(s.second())?)),
        Scheme::MdsA(_) | Scheme::MdsB(_) => None,
    }
}

/// States visited by an exact audit over one-bit libraries: libraries ×
/// placement draws × delivery draws × demands (delivery draws bounded above).
pub fn exact_state_count(scheme: &Scheme) -> u128 {
    let (n, k) = (scheme.files(), scheme.users());
    let libraries = pow(2, n * scheme.file_len_unit());
    let demands = pow(n as u128, k);
    let randomness = match scheme {
        Scheme::MdsA(s) => {
            let c = s.code().n_code();
            pow(factorial(c), n).saturating_mul(pow(c as u128, k))
        }
        Scheme::MdsB(s) => {
            let c = s.code().n_code();
            pow(factorial(c), n)
                .saturating_mul(pow(c as u128, k * n))
                .saturating_mul(pow(k as u128, (k + 1) * n))
                .saturating_mul(pow(factorial(k), n))
        }
        _ => (scheme.placement_choices().unwrap_or(u64::MAX) as u128)
            .saturating_mul(choice_bound(scheme).unwrap_or(u128::MAX)),
    };
    libraries.saturating_mul(demands).saturating_mul(randomness)
}

fn check_feasible(scheme: &Scheme) -> Result<u128> {
    let states = exact_state_count(scheme);
    let enumerable = scheme.placement_choices().is_some() && scheme.delivery_weight_base().is_some();
    if !enumerable {
        return Err(CachingError::Infeasible {
            states,
            limit: STATE_LIMIT,
            hint: "MDS schemes are certified by the rank audit plus the auxiliary-variable audit".into(),
        });
    }
    if states > STATE_LIMIT {
        return Err(CachingError::Infeasible {
            states,
            limit: STATE_LIMIT,
            hint: format!(
                "reduce N, K or the subfile count (currently {} symbols per file)",
                scheme.file_len_unit()
            ),
        });
    }
    Ok(states)
}

/// Calls `visit(placement, packet, weight)` for every library-independent
/// randomness outcome, with integer weights proportional to probability.
fn for_each_outcome(
    scheme: &Scheme,
    library: &FileLibrary,
    demand: &[usize],
    tamper: &dyn Tamper,
    mut visit: impl FnMut(&Placement, &crate::scheme::DeliveryPacket, u128),
) -> Result<()> {
    let base = scheme.delivery_weight_base().expect("checked enumerable") as u128;
    for p in 0..scheme.placement_choices().expect("checked enumerable") {
        let mut placement = scheme.place_choice(library, p)?;
        tamper.placement(&mut placement);
        let choices = scheme.delivery_choices(&placement.server, demand)?;
        let weight = base / choices as u128;
        for c in 0..choices {
            let mut packet = scheme.deliver_choice(&placement.server, demand, c)?;
            tamper.packet(&placement.server, demand, &mut packet);
            visit(&placement, &packet, weight);
        }
    }
    Ok(())
}

fn ratio(diff: u128, total: u128) -> f64 {
    diff as f64 / total as f64
}

/// Exhaustive check that each user's view has the same distribution for
/// every demand agreeing on that user's own request. Libraries are drawn
/// uniformly from all one-bit-symbol libraries.
pub fn audit_privacy_exact(scheme: &Scheme, tamper: &dyn Tamper) -> Result<AuditReport> {
    let states = check_feasible(scheme)?;
    let (n, k) = (scheme.files(), scheme.users());
    let unit = scheme.file_len_unit();
    let demands = demand_count(n, k).expect("bounded by the state check");
    let libraries = 1u64 << (n * unit);

    let per_demand: Vec<Vec<Counts>> = (0..demands)
        .into_par_iter()
        .map(|di| {
            let demand = demand_at(n, k, di);
            let mut counts = vec![Counts::new(); k];
            for li in 0..libraries {
                let library = FileLibrary::from_index(n, unit, li);
                for_each_outcome(scheme, &library, &demand, tamper, |placement, packet, w| {
                    for (user, cache) in placement.caches.iter().enumerate() {
                        let mut view = Scheme::observable(cache, packet);
                        tamper.view(&demand, &mut view);
                        *counts[user].entry(view).or_default() += w;
                    }
                })?;
            }
            Ok(counts)
        })
        .collect::<Result<_>>()?;

    let mut checks = Vec::new();
    for user in 0..k {
        let mut worst = (0u128, 1u128);
        let mut compared = 0;
        let mut worst_pair = String::new();
        for own in 0..n {
            let group: Vec<u64> = (0..demands).filter(|&i| demand_at(n, k, i)[user] == own).collect();
            let reference = &per_demand[group[0] as usize][user];
            for &other in &group[1..] {
                compared += 1;
                let tv = total_variation(reference, &per_demand[other as usize][user]);
                if tv.0 * worst.1 > worst.0 * tv.1 {
                    worst = tv;
                    worst_pair = format!(
                        " between {} and {}",
                        format_demand(&demand_at(n, k, group[0])),
                        format_demand(&demand_at(n, k, other))
                    );
                }
            }
        }
        let pass = worst.0 == 0;
        let detail = format!(
            "{} distributions per own demand, {compared} comparisons, max TV {}/{}{}",
            demands / n as u64,
            worst.0,
            worst.1,
            worst_pair
        );
        checks.push(Check::new(format!("user {user}"), pass, ratio(worst.0, worst.1), detail));
    }
    checks.push(Check::new("states", true, states as f64, "enumerated state bound"));
    Ok(AuditReport::new(scheme, 0, "exact", checks))
}

fn colluding_supported(scheme: &Scheme) -> bool {
    match scheme {
        Scheme::Trivial(_) | Scheme::VirtualUser(_) => true,
        Scheme::Shared(s) => colluding_supported(s.first()) && colluding_supported(s.second()),
        Scheme::MdsA(_) | Scheme::MdsB(_) => false,
    }
}

/// Exhaustive check that, for every fixed library, the joint view of the
/// colluders has the same distribution for all demands of the other users.
pub fn audit_colluding(scheme: &Scheme, colluders: &[usize], tamper: &dyn Tamper) -> Result<AuditReport> {
    if !colluding_supported(scheme) {
        return Err(param("colluding audit supports only the virtual-user and trivial schemes"));
    }
    let (n, k) = (scheme.files(), scheme.users());
    let mut set = colluders.to_vec();
    set.sort_unstable();
    set.dedup();
    if set.len() != colluders.len() || set.iter().any(|&u| u >= k) || set.is_empty() {
        return Err(param(format!("colluder set {colluders:?} invalid for K={k}")));
    }
    let label = format!("colluders {}", format_demand(&set));
    if set.len() == k {
        let checks = vec![Check::new(label, true, 0.0, "no hidden demands; vacuous")];
        return Ok(AuditReport::new(scheme, 0, "exact", checks));
    }
    let states = check_feasible(scheme)?;
    let unit = scheme.file_len_unit();
    let demands = demand_count(n, k).expect("bounded by the state check");
    let libraries = 1u64 << (n * unit);
    let key = |d: &[usize]| set.iter().map(|&u| d[u]).collect::<Vec<_>>();

    let per_library: Vec<((u128, u128), u64)> = (0..libraries)
        .into_par_iter()
        .map(|li| {
            let library = FileLibrary::from_index(n, unit, li);
            let mut groups: BTreeMap<Vec<usize>, Vec<Counts>> = BTreeMap::new();
            for di in 0..demands {
                let demand = demand_at(n, k, di);
                let mut counts = Counts::new();
                for_each_outcome(scheme, &library, &demand, tamper, |placement, packet, w| {
                    let mut view = Vec::new();
                    Scheme::observe_packet(packet, &mut view);
                    for &u in &set {
                        Scheme::observe_cache(&placement.caches[u], &mut view);
                    }
                    tamper.view(&demand, &mut view);
                    *counts.entry(view).or_default() += w;
                })?;
                groups.entry(key(&demand)).or_default().push(counts);
            }
            let mut worst = (0u128, 1u128);
            let mut compared = 0;
            for group in groups.values() {
                for other in &group[1..] {
                    compared += 1;
                    let tv = total_variation(&group[0], other);
                    if tv.0 * worst.1 > worst.0 * tv.1 {
                        worst = tv;
                    }
                }
            }
            Ok((worst, compared))
        })
        .collect::<Result<_>>()?;

    let compared: u64 = per_library.iter().map(|x| x.1).sum();
    let worst = per_library.iter().map(|x| x.0).fold((0u128, 1u128), |w, tv| if tv.0 * w.1 > w.0 * tv.1 { tv } else { w });
    let checks = vec![
        Check::new(
            label,
            worst.0 == 0,
            ratio(worst.0, worst.1),
            format!("{libraries} libraries, {compared} comparisons, max TV {}/{}", worst.0, worst.1),
        ),
        Check::new("states", true, states as f64, "enumerated state bound"),
    ];
    Ok(AuditReport::new(scheme, 0, "exact", checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::{Honest, LeakDemand};
    use crate::bounds::rat;

    #[test]
    fn virtual_user_views_are_private() {
        for r in [1, 2] {
            let scheme = Scheme::virtual_user(2, 2, r).unwrap();
            let report = audit_privacy_exact(&scheme, &Honest).unwrap();
            assert!(report.pass, "{}", report.to_json());
            let leak = audit_privacy_exact(&scheme, &LeakDemand).unwrap();
            assert!(!leak.pass);
            assert_eq!(leak.check("user 0").unwrap().metric, 1.0);
        }
    }

    #[test]
    fn trivial_and_shared_pass() {
        let trivial = Scheme::trivial(2, 2).unwrap();
        assert!(audit_privacy_exact(&trivial, &Honest).unwrap().pass);
        let shared = Scheme::shared(Scheme::virtual_user(2, 2, 1).unwrap(), trivial, rat(3, 4)).unwrap();
        assert!(audit_privacy_exact(&shared, &Honest).unwrap().pass);
        assert!(audit_colluding(&shared, &[1], &Honest).unwrap().pass);
    }

    #[test]
    fn colluders() {
        let scheme = Scheme::virtual_user(2, 2, 1).unwrap();
        assert!(audit_colluding(&scheme, &[0], &Honest).unwrap().pass);
        assert!(audit_colluding(&scheme, &[0, 1], &Honest).unwrap().pass);
        assert!(!audit_colluding(&scheme, &[0], &LeakDemand).unwrap().pass);
        assert!(audit_colluding(&Scheme::mds_a(2, 2).unwrap(), &[0], &Honest).is_err());
    }

    #[test]
    fn refuses_large_or_mds() {
        let err = audit_privacy_exact(&Scheme::mds_a(2, 2).unwrap(), &Honest).unwrap_err();
        assert!(matches!(err, CachingError::Infeasible { .. }));
        let err = audit_privacy_exact(&Scheme::virtual_user(3, 3, 3).unwrap(), &Honest).unwrap_err();
        assert!(matches!(err, CachingError::Infeasible { .. }));
    }
}
