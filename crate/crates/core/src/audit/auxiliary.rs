//! Distribution of the auxiliary index and position variables a user sees.

use std::collections::BTreeMap;

use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{demand_at, demand_count, format_demand, total_variation, trial_rng, AuditReport, Check, Mode, Tamper, STATE_LIMIT};
use crate::error::{param, CachingError, Result};
use crate::library::FileLibrary;
use crate::mds_a::{MdsA, MdsARandomness};
use crate::scheme::{CacheBundle, DeliveryPacket, Placement, Scheme, ServerState};

/// Significance level before the Bonferroni correction.
pub const SIGNIFICANCE: f64 = 0.01;
/// Categories with a smaller expected count are pooled.
const MIN_EXPECTED: f64 = 5.0;

fn factorial(n: usize) -> u128 {
    (1..=n as u128).fold(1u128, |a, x| a.saturating_mul(x))
}

fn pow(base: u128, exp: usize) -> u128 {
    (0..exp).fold(1u128, |a, _| a.saturating_mul(base))
}

/// Randomness states per demand for exact enumeration of the auxiliaries.
pub fn aux_state_count(scheme: &Scheme) -> Result<u128> {
    let (n, k) = (scheme.files(), scheme.users());
    match scheme {
        Scheme::MdsA(s) => {
            let c = s.code().n_code();
            Ok(pow(factorial(c), n).saturating_mul(pow(c as u128, k)))
        }
        Scheme::MdsB(s) => {
            let c = s.code().n_code();
            Ok(pow(factorial(c), n)
                .saturating_mul(pow(c as u128, k * n))
                .saturating_mul(pow(k as u128, (k + 1) * n))
                .saturating_mul(pow(factorial(k), n)))
        }
        _ => Err(param("the auxiliary audit applies to the MDS schemes")),
    }
}

fn values(out: &mut Vec<u64>, xs: &[usize]) {
    out.extend(xs.iter().map(|&x| x as u64));
}

/// Every auxiliary value visible to `user`, with its own pads.
fn full_view(cache: &CacheBundle, packet: &DeliveryPacket) -> Vec<u64> {
    let mut out = Vec::new();
    match (cache, packet) {
        (CacheBundle::MdsA(c), DeliveryPacket::MdsA(p)) => {
            values(&mut out, &p.j0);
            values(&mut out, &p.j1);
            out.push(c.pad as u64);
        }
        (CacheBundle::MdsB(c), DeliveryPacket::MdsB(p)) => {
            for v in p.j0_plain.iter().chain(&p.j0_shuffled).chain(&p.j1).chain(&p.j2) {
                values(&mut out, v);
            }
            values(&mut out, &c.index_pads);
            values(&mut out, &c.position_pads);
            if let Some(extra) = &c.extra_pads {
                values(&mut out, &p.j3);
                values(&mut out, extra);
            }
        }
        _ => {}
    }
    out
}

fn locate(j0: &[usize], value: usize) -> u64 {
    j0.iter().position(|&x| x == value).map_or(0, |i| i as u64 + 1)
}

/// Low-dimensional features of a user's view: for each index the user can
/// read (its own unmasked ones and the others' masked ones), the position
/// of that index among the public ones; for each position variable, its
/// value.
fn features(cache: &CacheBundle, packet: &DeliveryPacket, own: usize, n_code: usize, users: usize) -> Vec<u64> {
    let mut out = Vec::new();
    match (cache, packet) {
        (CacheBundle::MdsA(c), DeliveryPacket::MdsA(p)) => {
            for (k, &j) in p.j1.iter().enumerate() {
                let value = if k == c.user { (j + n_code - c.pad) % n_code } else { j };
                out.push(locate(&p.j0, value));
            }
        }
        (CacheBundle::MdsB(c), DeliveryPacket::MdsB(p)) => {
            let j0: Vec<usize> = p.j0_plain.iter().chain(&p.j0_shuffled).flatten().copied().collect();
            for (k, row) in p.j1.iter().enumerate() {
                for (n, &j) in row.iter().enumerate() {
                    let value = if k == c.user { (j + n_code - c.index_pads[n]) % n_code } else { j };
                    out.push(locate(&j0, value));
                }
            }
            for (k, row) in p.j2.iter().enumerate() {
                for (n, &j) in row.iter().enumerate() {
                    let value = if k == c.user { (j + users - c.position_pads[n]) % users } else { j };
                    out.push(value as u64);
                }
            }
            if let Some(extra) = &c.extra_pads {
                let others = (0..extra.len()).filter(|&n| n != own);
                for (&j, n) in p.j3.iter().zip(others) {
                    out.push(((j + users - extra[n]) % users) as u64);
                }
            }
        }
        _ => {}
    }
    out
}

fn placement_with(scheme: &Scheme, randomness: Randomness, units_len: usize) -> Result<Placement> {
    let lib = FileLibrary::zeros(scheme.files(), units_len, 1);
    match (scheme, randomness) {
        (Scheme::MdsA(s), Randomness::A(rnd)) => {
            let (server, caches) = s.place_with(&lib, rnd)?;
            Ok(Placement { server: ServerState::MdsA(server), caches: caches.into_iter().map(CacheBundle::MdsA).collect() })
        }
        (Scheme::MdsB(s), Randomness::B(rnd)) => {
            let (server, caches) = s.place_with(&lib, rnd)?;
            Ok(Placement { server: ServerState::MdsB(server), caches: caches.into_iter().map(CacheBundle::MdsB).collect() })
        }
        _ => Err(param("the auxiliary audit applies to the MDS schemes")),
    }
}

enum Randomness {
    A(MdsARandomness),
    B(crate::mds_b::MdsBRandomness),
}

fn permutations(len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..len).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..len).rev().find(|&i| p[i - 1] < p[i]) else { return out };
        let j = (i..len).rev().find(|&j| p[j] > p[i - 1]).expect("a larger element exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// View counts indexed by demand, then user.
type ViewCounts = Vec<Vec<BTreeMap<Vec<u64>, u128>>>;

fn exact_a(scheme: &Scheme, s: &MdsA, tamper: &dyn Tamper) -> Result<(ViewCounts, u128)> {
    let (n, k) = (s.files(), s.users());
    let c = s.code().n_code();
    let perms = permutations(c);
    let pads = pow(c as u128, k) as u64;
    let perm_states = pow(perms.len() as u128, n) as u64;
    let demands = demand_count(n, k).expect("small") as usize;
    let counts = (0..perm_states)
        .into_par_iter()
        .map(|ps| {
            let mut local = vec![vec![BTreeMap::new(); k]; demands];
            let chosen: Vec<Vec<usize>> =
                (0..n).map(|f| perms[(ps / (perms.len() as u64).pow(f as u32) % perms.len() as u64) as usize].clone()).collect();
            for pi in 0..pads {
                let pad: Vec<usize> = (0..k).map(|u| (pi / (c as u64).pow(u as u32) % c as u64) as usize).collect();
                let rnd = MdsARandomness { perms: chosen.clone(), pads: pad };
                let mut placement = placement_with(scheme, Randomness::A(rnd), s.subfile_count())?;
                tamper.placement(&mut placement);
                for (di, counts) in local.iter_mut().enumerate() {
                    let demand = demand_at(n, k, di as u64);
                    let mut packet = scheme.deliver(&placement.server, &demand, &mut rand::rngs::mock::StepRng::new(0, 0))?;
                    tamper.packet(&placement.server, &demand, &mut packet);
                    for (user, cache) in placement.caches.iter().enumerate() {
                        let mut view = full_view(cache, &packet);
                        tamper.view(&demand, &mut view);
                        *counts[user].entry(view).or_insert(0u128) += 1;
                    }
                }
            }
            Ok(local)
        })
        .try_reduce(
            || vec![vec![BTreeMap::new(); k]; demands],
            |mut a, b| {
                for (da, db) in a.iter_mut().zip(b) {
                    for (ua, ub) in da.iter_mut().zip(db) {
                        for (key, v) in ub {
                            *ua.entry(key).or_insert(0) += v;
                        }
                    }
                }
                Ok(a)
            },
        )?;
    Ok((counts, perm_states as u128 * pads as u128))
}

/// Pearson chi-square homogeneity test of two samples over shared
/// categories. Sparse categories are pooled first. Returns the statistic,
/// degrees of freedom and p-value.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> (f64, usize, f64) {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let total = na + nb;
    if na == 0.0 || nb == 0.0 {
        return (0.0, 0, 1.0);
    }
    let min_share = na.min(nb) / total;
    let mut cells: Vec<(u64, u64)> = Vec::new();
    let mut pooled = (0u64, 0u64);
    for (&x, &y) in a.iter().zip(b) {
        if ((x + y) as f64) * min_share < MIN_EXPECTED {
            pooled.0 += x;
            pooled.1 += y;
        } else {
            cells.push((x, y));
        }
    }
    if pooled.0 + pooled.1 > 0 {
        if ((pooled.0 + pooled.1) as f64) * min_share >= MIN_EXPECTED || cells.is_empty() {
            cells.push(pooled);
        } else {
            let smallest = (0..cells.len()).min_by_key(|&i| cells[i].0 + cells[i].1).expect("non-empty");
            cells[smallest].0 += pooled.0;
            cells[smallest].1 += pooled.1;
        }
    }
    if cells.len() < 2 {
        return (0.0, 0, 1.0);
    }
    let mut stat = 0.0;
    for &(x, y) in &cells {
        let col = (x + y) as f64;
        for (obs, row) in [(x as f64, na), (y as f64, nb)] {
            let expected = row * col / total;
            stat += (obs - expected).powi(2) / expected;
        }
    }
    let df = cells.len() - 1;
    let p = ChiSquared::new(df as f64).map(|d| d.sf(stat)).unwrap_or(1.0);
    (stat, df, p)
}

fn sample_features(scheme: &Scheme, demand: &[usize], stream: u64, seed: u64, trials: usize, tamper: &dyn Tamper) -> Result<Vec<Vec<BTreeMap<u64, u64>>>> {
    let (k, mut rng) = (scheme.users(), trial_rng(seed, stream));
    let (n_code, unit) = match scheme {
        Scheme::MdsA(s) => (s.code().n_code(), s.subfile_count()),
        Scheme::MdsB(s) => (s.code().n_code(), s.subfile_count()),
        _ => return Err(param("the auxiliary audit applies to the MDS schemes")),
    };
    let mut tallies: Vec<Vec<BTreeMap<u64, u64>>> = vec![Vec::new(); k];
    for _ in 0..trials {
        let rnd = match scheme {
            Scheme::MdsA(s) => Randomness::A(s.draw(&mut rng)),
            Scheme::MdsB(s) => Randomness::B(s.draw(&mut rng)),
            _ => unreachable!(),
        };
        let mut placement = placement_with(scheme, rnd, unit)?;
        tamper.placement(&mut placement);
        let mut packet = scheme.deliver(&placement.server, demand, &mut rng)?;
        tamper.packet(&placement.server, demand, &mut packet);
        for (user, cache) in placement.caches.iter().enumerate() {
            let mut view = features(cache, &packet, demand[user], n_code, k);
            tamper.view(demand, &mut view);
            let t = &mut tallies[user];
            if t.len() < view.len() {
                t.resize(view.len(), BTreeMap::new());
            }
            for (i, &v) in view.iter().enumerate() {
                *t[i].entry(v).or_insert(0) += 1;
            }
        }
    }
    Ok(tallies)
}

/// Compares, across demands that agree on a user's own request, the
/// distribution of the auxiliary variables that user sees. Exact mode
/// enumerates every permutation and pad; statistical mode samples `trials`
/// draws per demand and applies chi-square homogeneity tests with a
/// Bonferroni correction.
pub fn audit_privacy_aux(scheme: &Scheme, mode: Mode, trials: usize, seed: u64, tamper: &dyn Tamper) -> Result<AuditReport> {
    let states = aux_state_count(scheme)?;
    let (n, k) = (scheme.files(), scheme.users());
    let demands = demand_count(n, k).filter(|&d| d <= super::DEMAND_LIMIT as u64).ok_or_else(|| {
        param(format!("auxiliary audit compares all demands; N^K = {n}^{k} is too many"))
    })?;
    let group = |user: usize, own: usize| -> Vec<u64> { (0..demands).filter(|&i| demand_at(n, k, i)[user] == own).collect() };
    let mut checks = Vec::new();
    match mode {
        Mode::Exact => {
            let Scheme::MdsA(s) = scheme else {
                return Err(CachingError::Infeasible { states, limit: STATE_LIMIT, hint: "use statistical mode".into() });
            };
            if states > STATE_LIMIT {
                return Err(CachingError::Infeasible { states, limit: STATE_LIMIT, hint: "use statistical mode".into() });
            }
            let (counts, per_demand) = exact_a(scheme, s, tamper)?;
            for user in 0..k {
                let mut worst = (0u128, 1u128);
                let mut compared = 0;
                for own in 0..n {
                    let g = group(user, own);
                    for &other in &g[1..] {
                        compared += 1;
                        let tv = total_variation(&counts[g[0] as usize][user], &counts[other as usize][user]);
                        if tv.0 * worst.1 > worst.0 * tv.1 {
                            worst = tv;
                        }
                    }
                }
                checks.push(Check::new(
                    format!("user {user}"),
                    worst.0 == 0,
                    worst.0 as f64 / worst.1 as f64,
                    format!("{per_demand} randomness states per demand, {compared} comparisons, max TV {}/{}", worst.0, worst.1),
                ));
            }
        }
        Mode::Statistical => {
            let tallies: Vec<Vec<Vec<BTreeMap<u64, u64>>>> = (0..demands)
                .into_par_iter()
                .map(|di| sample_features(scheme, &demand_at(n, k, di), di, seed, trials, tamper))
                .collect::<Result<_>>()?;
            let mut tests = Vec::new();
            for user in 0..k {
                for own in 0..n {
                    let g = group(user, own);
                    for (i, &a) in g.iter().enumerate() {
                        for &b in &g[i + 1..] {
                            let (ta, tb) = (&tallies[a as usize][user], &tallies[b as usize][user]);
                            for f in 0..ta.len().max(tb.len()) {
                                let empty = BTreeMap::new();
                                let (fa, fb) = (ta.get(f).unwrap_or(&empty), tb.get(f).unwrap_or(&empty));
                                let keys: std::collections::BTreeSet<u64> = fa.keys().chain(fb.keys()).copied().collect();
                                let xa: Vec<u64> = keys.iter().map(|k| fa.get(k).copied().unwrap_or(0)).collect();
                                let xb: Vec<u64> = keys.iter().map(|k| fb.get(k).copied().unwrap_or(0)).collect();
                                let (_, _, p) = chi_square_homogeneity(&xa, &xb);
                                tests.push((user, a, b, f, p));
                            }
                        }
                    }
                }
            }
            let threshold = SIGNIFICANCE / tests.len().max(1) as f64;
            for user in 0..k {
                let mine: Vec<_> = tests.iter().filter(|t| t.0 == user).collect();
                let worst = mine.iter().min_by(|x, y| x.4.total_cmp(&y.4));
                let (p, where_) = worst.map_or((1.0, String::new()), |t| {
                    (t.4, format!(" at feature {} between {} and {}", t.3, format_demand(&demand_at(n, k, t.1)), format_demand(&demand_at(n, k, t.2))))
                });
                checks.push(Check::new(
                    format!("user {user}"),
                    p >= threshold,
                    p,
                    format!("{} tests, {trials} draws per demand, min p {p:.3e}{where_}, threshold {threshold:.3e}", mine.len()),
                ));
            }
        }
        Mode::Rank => return Err(param("use the rank audit for rank mode")),
    }
    Ok(AuditReport::new(scheme, seed, mode.as_str(), checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::{Honest, UnmaskIndices};

    #[test]
    fn permutation_listing() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(3)[1], vec![0, 2, 1]);
    }

    #[test]
    fn chi_square_oracle() {
        // 2x2 table [[10, 20], [20, 10]]: statistic 20/3, p = 0.00982 (df 1).
        let (stat, df, p) = chi_square_homogeneity(&[10, 20], &[20, 10]);
        assert!((stat - 20.0 / 3.0).abs() < 1e-12);
        assert_eq!(df, 1);
        assert!((p - 0.009823).abs() < 1e-5, "{p}");
        assert_eq!(chi_square_homogeneity(&[5, 5], &[5, 5]).2, 1.0);
    }

    #[test]
    fn exact_aux_two_by_two() {
        let scheme = Scheme::mds_a(2, 2).unwrap();
        assert_eq!(aux_state_count(&scheme).unwrap(), 576 * 16);
        let report = audit_privacy_aux(&scheme, Mode::Exact, 0, 0, &Honest).unwrap();
        assert!(report.pass, "{}", report.to_json());
        let leak = audit_privacy_aux(&scheme, Mode::Exact, 0, 0, &UnmaskIndices).unwrap();
        assert!(!leak.pass);
        assert!(leak.checks.iter().all(|c| c.metric > 0.0));
    }

    #[test]
    fn statistical_aux() {
        let scheme = Scheme::mds_a(2, 3).unwrap();
        assert!(matches!(
            audit_privacy_aux(&scheme, Mode::Exact, 0, 0, &Honest),
            Err(CachingError::Infeasible { .. })
        ));
        assert!(audit_privacy_aux(&scheme, Mode::Statistical, 4000, 3, &Honest).unwrap().pass);
        assert!(!audit_privacy_aux(&scheme, Mode::Statistical, 4000, 3, &UnmaskIndices).unwrap().pass);
        let b = Scheme::mds_b(3, 3).unwrap();
        assert!(audit_privacy_aux(&b, Mode::Statistical, 1500, 3, &Honest).unwrap().pass);
        assert!(!audit_privacy_aux(&b, Mode::Statistical, 1500, 3, &UnmaskIndices).unwrap().pass);
    }
}
