//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use privcache::audit::{
    audit_correctness, audit_privacy_aux, audit_privacy_exact, audit_privacy_rank, trial_rng, Honest, LeakDemand, Mode,
};
use privcache::bounds::{
    achievable_envelope, converse_thm3, grk_points, lower_envelope, max_converse, optimal_curve, rat, thm1_points,
    thm2_points, uniform_grid, Rational, RatePoint, Source,
};
use privcache::cli::curve::{curve_rows, GRID_POINTS};
use privcache::field::{Field, FieldSpec, Symbol};
use privcache::library::{xor_into, FileLibrary};
use privcache::reed_solomon::ReedSolomon;
use privcache::scheme::Scheme;
use privcache::subsets::Subset;
use privcache::virtual_user::demand_mask;
use rand::Rng;

const SEED: u64 = 20_240_917;
const BUDGET_A: Duration = Duration::from_secs(5);
const BUDGET_B: Duration = Duration::from_secs(30);
const BUDGET_TOTAL: Duration = Duration::from_secs(300);
const TRIALS_A: usize = 100;
const TRIALS_B: usize = 50;
const RANK_DRAWS: usize = 100;
const RANK_DRAWS_B: usize = 20;
const RS_MESSAGES: usize = 100;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn measured(scheme: &Scheme, demand: &[usize]) -> Result<(Rational, Rational), String> {
    let mut rng = trial_rng(SEED, 9);
    let library = scheme.random_library(1, &mut rng);
    let round = scheme.round(&library, demand, &mut rng).map_err(|e| e.to_string())?;
    let rates = scheme.measure(&round, library.file_len(), library.symbol_bits());
    Ok((rates.payload_m, rates.payload_r))
}

fn correctness(scheme: &Scheme, trials: usize, expect_decodes: f64, budget: Duration) -> Outcome {
    let start = Instant::now();
    let report = audit_correctness(scheme, trials, SEED, 1, true, &Honest).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let decodes = report.check("decodes").expect("present");
    ensure(report.pass, || decodes.detail.clone())?;
    let count = report.check("decode_count").expect("present").metric;
    ensure(count == expect_decodes, || format!("{count} decodes, expected {expect_decodes}"))?;
    ensure(elapsed < budget, || format!("took {elapsed:?}, budget {budget:?}"))?;
    Ok(format!("{count} decodes in {:.2?}", elapsed))
}

fn criterion_1() -> Outcome {
    let scheme = Scheme::mds_a(2, 2).map_err(|e| e.to_string())?;
    let mr = measured(&scheme, &[0, 1])?;
    ensure(mr == (rat(1, 3), rat(4, 3)), || format!("measured M={} R={}", mr.0, mr.1))?;
    let run = correctness(&scheme, TRIALS_A, (TRIALS_A * 4 * 2) as f64, BUDGET_A)?;
    Ok(format!("M=1/3 R=4/3; {run}"))
}

fn term_set(row: &[privcache::coded::Slot]) -> BTreeSet<String> {
    row.iter().map(|s| s.to_string()).collect()
}

fn expect_rows(got: &[Vec<privcache::coded::Slot>], want: &[&[&str]], what: &str) -> Result<(), String> {
    ensure(got.len() == want.len(), || format!("{what}: {} segments, expected {}", got.len(), want.len()))?;
    for (i, (g, w)) in got.iter().zip(want).enumerate() {
        let w: BTreeSet<String> = w.iter().map(|s| s.to_string()).collect();
        ensure(term_set(g) == w, || format!("{what}[{i}]: {:?} vs {:?}", term_set(g), w))?;
    }
    Ok(())
}

/// Unshuffled blocks `(plain, shuffled)` per file and the cross segment.
type Display = ([(&'static [&'static [&'static str]], &'static [&'static [&'static str]]); 3], &'static [&'static str]);

const DISPLAY_012: Display = (
    [
        (
            &[&["w(1)[0,2]"], &["w(2)[0,1]"]],
            &[&["w(0)[0,3]"], &["w(0)[0,0]", "w(1)[0,1]"], &["w(0)[0,0]", "w(2)[0,2]"]],
        ),
        (
            &[&["w(1)[1,3]"], &["w(2)[1,0]"]],
            &[&["w(1)[1,1]", "w(0)[1,0]"], &["w(0)[1,2]"], &["w(1)[1,1]", "w(2)[1,2]"]],
        ),
        (
            &[&["w(1)[2,0]"], &["w(2)[2,3]"]],
            &[&["w(2)[2,2]", "w(0)[2,0]"], &["w(2)[2,2]", "w(1)[2,1]"], &["w(0)[2,1]"]],
        ),
    ],
    &["w(0)[0,0]", "w(1)[1,1]", "w(2)[2,2]"],
);

const DISPLAY_011: Display = (
    [
        (
            &[&["w(1)[0,2]"], &["w(2)[0,2]"]],
            &[&["w(0)[0,3]"], &["w(0)[0,0]", "w(1)[0,1]"], &["w(0)[0,0]", "w(2)[0,1]"]],
        ),
        (
            &[&["w(1)[1,3]"], &["w(2)[1,3]"]],
            &[&["w(1)[1,1]", "w(0)[1,0]"], &["w(0)[1,2]"], &["w(1)[1,1]", "w(2)[1,1]"]],
        ),
        (
            &[&["w(1)[2,0]"], &["w(2)[2,0]"]],
            &[
                &["w(1)[2,1]", "w(0)[2,1]", "w(0)[2,0]"],
                &["w(0)[2,1]"],
                &["w(1)[2,1]", "w(0)[2,1]", "w(2)[2,1]"],
            ],
        ),
    ],
    &["w(0)[0,0]", "w(1)[1,1]", "w(1)[2,1]", "w(0)[2,1]"],
);

fn check_display(demand: &[usize], display: &Display) -> Result<(), String> {
    let Scheme::MdsB(s) = Scheme::mds_b(3, 3).map_err(|e| e.to_string())? else { unreachable!() };
    let identity = vec![vec![0, 1, 2]; 3];
    let layout = s.layout(demand, &identity).map_err(|e| e.to_string())?;
    for (n, (plain, shuffled)) in display.0.iter().enumerate() {
        expect_rows(&layout.plain[n], plain, &format!("D={demand:?} X[{n}].plain"))?;
        expect_rows(&layout.shuffled[n], shuffled, &format!("D={demand:?} X[{n}].shuffled"))?;
    }
    expect_rows(std::slice::from_ref(&layout.cross), &[display.1], &format!("D={demand:?} cross"))?;
    let segments = layout.rows().count();
    ensure(segments == 16, || format!("{segments} packet segments, expected 16"))
}

fn criterion_2() -> Outcome {
    let scheme = Scheme::mds_b(3, 3).map_err(|e| e.to_string())?;
    let mr = measured(&scheme, &[0, 1, 2])?;
    ensure(mr == (rat(3, 8), rat(2, 1)), || format!("measured M={} R={}", mr.0, mr.1))?;
    check_display(&[0, 1, 2], &DISPLAY_012)?;
    check_display(&[0, 1, 1], &DISPLAY_011)?;
    let run = correctness(&scheme, TRIALS_B, (TRIALS_B * 27 * 3) as f64, BUDGET_B)?;
    Ok(format!("M=3/8 R=2; layouts for (0,1,2) and (0,1,1) match; {run}"))
}

/// Restricted demand, `V_d`, `t_d`, then for `S = {0}..{3}` the subfile
/// labels XORed into `X(n)[S]`; `None` marks the column left out.
type VuRow = (&'static [usize], &'static [usize], usize, [Option<&'static [&'static [usize]]>; 4]);

const VU_TABLE: [VuRow; 8] = [
    (&[0, 0, 0], &[0], 0, [None, Some(&[&[0, 1]]), Some(&[&[0, 2]]), Some(&[&[0, 3]])]),
    (&[1, 1, 1], &[1], 1, [Some(&[&[0, 1]]), None, Some(&[&[1, 2]]), Some(&[&[1, 3]])]),
    (&[0, 0, 1], &[2], 2, [Some(&[&[0, 2]]), Some(&[&[1, 2]]), None, Some(&[&[2, 3]])]),
    (
        &[1, 1, 0],
        &[0, 1, 2],
        0,
        [None, Some(&[&[0, 1], &[1, 2]]), Some(&[&[0, 2], &[1, 2]]), Some(&[&[0, 3], &[1, 3], &[2, 3]])],
    ),
    (&[0, 1, 1], &[3], 3, [Some(&[&[0, 3]]), Some(&[&[1, 3]]), Some(&[&[2, 3]]), None]),
    (
        &[1, 0, 0],
        &[0, 1, 3],
        0,
        [None, Some(&[&[0, 1], &[1, 3]]), Some(&[&[0, 2], &[1, 2], &[2, 3]]), Some(&[&[0, 3], &[1, 3]])],
    ),
    (
        &[0, 1, 0],
        &[0, 2, 3],
        0,
        [None, Some(&[&[0, 1], &[1, 2], &[1, 3]]), Some(&[&[0, 2], &[2, 3]]), Some(&[&[0, 3], &[2, 3]])],
    ),
    (
        &[1, 0, 1],
        &[1, 2, 3],
        1,
        [Some(&[&[0, 1], &[0, 2], &[0, 3]]), None, Some(&[&[1, 2], &[2, 3]]), Some(&[&[1, 3], &[2, 3]])],
    ),
];

fn criterion_3() -> Outcome {
    let scheme = Scheme::virtual_user(2, 3, 2).map_err(|e| e.to_string())?;
    let mr = measured(&scheme, &[0, 1, 0])?;
    ensure(mr == (rat(2, 3), rat(1, 1)), || format!("measured M={} R={}", mr.0, mr.1))?;
    let Scheme::VirtualUser(vu) = &scheme else { unreachable!() };

    let mut rng = trial_rng(SEED, 3);
    let library = FileLibrary::random(2, vu.subfile_count() * 16, 8, &mut rng);
    let table = vu.subfiles(&library).map_err(|e| e.to_string())?;
    let mut restricted_decodes = 0;
    for (d, v, t_d, columns) in VU_TABLE {
        let mask = demand_mask(2, d).map_err(|e| e.to_string())?;
        ensure(mask == v.iter().copied().collect::<Subset>(), || format!("V_d for {d:?} is {mask}"))?;
        let packet = vu.deliver_restricted(&table, d, t_d).map_err(|e| e.to_string())?;
        ensure(packet.payload.len() == 2 * 3, || format!("{} segments for {d:?}", packet.payload.len()))?;
        for (s, column) in columns.iter().enumerate() {
            let set = Subset::singleton(s);
            for n in 0..2 {
                match column {
                    None => ensure(!packet.payload.contains_key(&(n, set)), || format!("{d:?}: column {s} sent"))?,
                    Some(labels) => {
                        let mut want = vec![0 as Symbol; table.subfile_len()];
                        for r in labels.iter() {
                            xor_into(&mut want, table.get(n, r.iter().copied().collect()));
                        }
                        let got = packet.payload.get(&(n, set)).ok_or_else(|| format!("{d:?}: column {s} missing"))?;
                        ensure(*got == want, || format!("{d:?}: X({n})[{{{s}}}] differs"))?;
                    }
                }
            }
        }
        for choice in 0..v.len() {
            vu.nonprivate_round(&library, d, choice).map_err(|e| format!("{d:?} choice {choice}: {e}"))?;
            restricted_decodes += 6;
        }
    }
    let report = audit_correctness(&scheme, 20, SEED, 1, false, &Honest).map_err(|e| e.to_string())?;
    ensure(report.pass, || report.check("decodes").expect("present").detail.clone())?;
    let real = report.check("decode_count").expect("present").metric;
    ensure(real == (20 * 8 * 3) as f64, || format!("{real} real decodes"))?;
    Ok(format!("M=2/3 R=1; table matches for 8 demands; {restricted_decodes} virtual and {real} real decodes"))
}

fn criterion_4() -> Outcome {
    let mut notes = Vec::new();
    for r in [1, 2] {
        let scheme = Scheme::virtual_user(2, 2, r).map_err(|e| e.to_string())?;
        let honest = audit_privacy_exact(&scheme, &Honest).map_err(|e| e.to_string())?;
        ensure(honest.pass, || format!("r={r}: {}", honest.to_json()))?;
        let leak = audit_privacy_exact(&scheme, &LeakDemand).map_err(|e| e.to_string())?;
        let tv: Vec<f64> = leak.checks.iter().filter(|c| c.name.starts_with("user")).map(|c| c.metric).collect();
        ensure(!leak.pass && tv.iter().all(|&x| x == 1.0), || format!("r={r}: leak TVs {tv:?}"))?;
        notes.push(format!("r={r} equal, leak TV=1"));
    }
    Ok(notes.join("; "))
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    for (n, k) in [(2, 2), (2, 3), (3, 3)] {
        let scheme = Scheme::mds_a(n, k).map_err(|e| e.to_string())?;
        let report = audit_privacy_rank(&scheme, RANK_DRAWS, SEED, &Honest).map_err(|e| e.to_string())?;
        let target = (k * n + 1) as f64;
        let check = &report.checks[0];
        ensure(report.pass && check.metric == target, || format!("A({n},{k}): {}", check.detail))?;
        notes.push(format!("A({n},{k}) rank {target}"));
    }
    let b = Scheme::mds_b(3, 3).map_err(|e| e.to_string())?;
    let report = audit_privacy_rank(&b, RANK_DRAWS_B, SEED, &Honest).map_err(|e| e.to_string())?;
    ensure(report.pass && report.checks[0].metric == 19.0, || format!("B(3,3): {}", report.checks[0].detail))?;
    notes.push("B(3,3) rank 19".into());
    let aux = audit_privacy_aux(&Scheme::mds_a(2, 2).map_err(|e| e.to_string())?, Mode::Exact, 0, SEED, &Honest)
        .map_err(|e| e.to_string())?;
    ensure(aux.pass, || aux.to_json())?;
    notes.push("A(2,2) auxiliaries equal over 576x16 states".into());
    Ok(notes.join("; "))
}

fn criterion_6() -> Outcome {
    for (n, k) in [(2usize, 2usize), (3, 3), (3, 4), (4, 5)] {
        let (ni, ki) = (n as i128, k as i128);
        let pts = thm2_points(n, k).map_err(|e| e.to_string())?;
        for m in [rat(1, ki + 1), rat(ni, (ki + 1) * (ni - 1))] {
            let p = pts.iter().find(|p| p.m == m).ok_or_else(|| format!("({n},{k}): no point at M={m}"))?;
            let bound = converse_thm3(n, k, m).map_err(|e| e.to_string())?;
            ensure(bound == p.r, || format!("({n},{k}) M={m}: R={} but converse {bound}", p.r))?;
        }
        let top = rat(1, ki + 1);
        for i in 0..=64 {
            let m = top * rat(i, 64);
            let got = max_converse(n, k, m).map_err(|e| e.to_string())?;
            let want = Rational::from_integer(ni) * (Rational::from_integer(1) - m);
            ensure(got == want, || format!("({n},{k}) M={m}: max converse {got}, expected {want}"))?;
        }
    }
    Ok("both MDS points tight for (2,2),(3,3),(3,4),(4,5); max converse N(1-M) on [0,1/(K+1)]".into())
}

fn cor2_formula(m: Rational) -> Rational {
    let int = Rational::from_integer;
    [
        int(2) - int(2) * m,
        (int(9) - int(6) * m) / int(5),
        (int(5) - int(3) * m) / int(3),
        (int(9) - int(5) * m) / int(6),
        (int(2) - m) / int(2),
    ]
    .into_iter()
    .max()
    .expect("non-empty")
}

fn criterion_7() -> Outcome {
    let mut grid = uniform_grid(2, GRID_POINTS);
    grid.extend([rat(1, 4), rat(2, 3), rat(1, 1), rat(3, 2)]);
    for &m in &grid {
        let o = optimal_curve(2, 3, m).map_err(|e| e.to_string())?;
        ensure(o.value == Some(cor2_formula(m)), || format!("M={m}: optimal {:?}", o.value))?;
    }
    let mut pts: Vec<RatePoint> = thm1_points(2, 3).map_err(|e| e.to_string())?;
    pts.extend(thm2_points(2, 3).map_err(|e| e.to_string())?);
    pts.extend(grk_points(2, 3).map_err(|e| e.to_string())?);
    pts.push(RatePoint::new(rat(0, 1), rat(2, 1), Source::Trivial));
    pts.push(RatePoint::new(rat(2, 1), rat(0, 1), Source::Trivial));
    let envelope = lower_envelope(&pts).map_err(|e| e.to_string())?;
    let corners = [(rat(0, 1), rat(2, 1)), (rat(1, 4), rat(3, 2)), (rat(2, 3), rat(1, 1)), (rat(1, 1), rat(2, 3)), (rat(3, 2), rat(1, 4)), (rat(2, 1), rat(0, 1))];
    for (m, r) in corners {
        ensure(envelope.contains_corner(m, r), || format!("corner ({m},{r}) missing"))?;
    }
    let rows = curve_rows(2, 3, GRID_POINTS).map_err(|e| e.to_string())?;
    for (m, r) in [corners[3], corners[4], corners[5]] {
        let row = rows
            .iter()
            .find(|x| x.series == "ach_lce" && x.m == m)
            .ok_or_else(|| format!("no CSV row at M={m}"))?;
        ensure(row.r == Some(r) && row.valid.split('+').any(|t| t == "prior-work"), || format!("CSV row at M={m}: {row:?}"))?;
    }
    Ok(format!("optimal equals the five-line max on {} points; six corners exact; prior-work tags present", grid.len()))
}

fn criterion_8() -> Outcome {
    let mut checked = 0;
    for (n, k) in [(2, 3), (3, 3), (5, 10)] {
        let envelope = achievable_envelope(n, k).map_err(|e| e.to_string())?;
        for m in uniform_grid(n, GRID_POINTS) {
            let bound = max_converse(n, k, m).map_err(|e| e.to_string())?;
            let ach = envelope.eval(m).ok_or_else(|| format!("({n},{k}): envelope undefined at {m}"))?;
            ensure(bound <= ach, || format!("({n},{k}) M={m}: converse {bound} > achievable {ach}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} grid points, converse never above the envelope"))
}

fn subsets_of(n: usize, k: usize) -> Vec<Vec<usize>> {
    privcache::subsets::k_subsets(n, k).map(|s| s.iter().collect()).collect()
}

fn criterion_9() -> Outcome {
    let code = ReedSolomon::with_field(Field::new(FieldSpec::GF256), 8, 5).map_err(|e| e.to_string())?;
    let mut rng = trial_rng(SEED, 99);
    let picks = subsets_of(8, 5);
    let mut failures = 0;
    for _ in 0..RS_MESSAGES {
        let message: Vec<Vec<Symbol>> = (0..5).map(|_| (0..4).map(|_| rng.gen_range(0..256)).collect()).collect();
        let word = code.encode(&message).map_err(|e| e.to_string())?;
        for p in &picks {
            if code.reconstruct(&word.subset(p)).ok().as_ref() != Some(&message) {
                failures += 1;
            }
        }
    }
    ensure(failures == 0, || format!("{failures} failed reconstructions"))?;
    Ok(format!("{} messages x {} subsets, zero failures", RS_MESSAGES, picks.len()))
}

fn main() {
    let start = Instant::now();
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("scheme A (2,2) rates and decoding", criterion_1),
        ("scheme B (3,3) rates, layout and decoding", criterion_2),
        ("virtual users (2,3,2) rates, table and decoding", criterion_3),
        ("exact privacy of virtual users", criterion_4),
        ("rank and auxiliary certificates", criterion_5),
        ("tangency of the MDS points", criterion_6),
        ("(2,3) optimal curve and corners", criterion_7),
        ("converse below achievable", criterion_8),
        ("Reed-Solomon (8,5) reconstruction", criterion_9),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let verdict = if outcome.is_ok() { "PASS" } else { "FAIL" };
        all &= outcome.is_ok();
        let detail = outcome.unwrap_or_else(|e| e);
        println!("criterion {}: {verdict} {name} ({:.2?}): {detail}", i + 1, t.elapsed());
    }
    let total = start.elapsed();
    let in_budget = total < BUDGET_TOTAL;
    all &= in_budget;
    println!(
        "criterion 10: {} full suite in {:.2?} (budget {:?})",
        if in_budget { "PASS" } else { "FAIL" },
        total,
        BUDGET_TOTAL
    );
    if !all {
        std::process::exit(1);
    }
}
