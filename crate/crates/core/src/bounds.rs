//! Achievable memory-rate points, converse bounds, characterized optimal
//! tradeoffs and lower convex envelopes, all in exact rational arithmetic.

use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{param, CachingError, Result};
use crate::subsets::binomial;

pub type Rational = Ratio<i128>;

pub fn rat(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn int(n: i128) -> Rational {
    Rational::from_integer(n)
}

fn choose(a: i64, b: i64) -> i128 {
    binomial(a, b) as i128
}

/// Where a rate point comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    /// Virtual-user scheme at parameter `r`.
    VirtualUser(usize),
    /// MDS scheme with `q` cached segments per user.
    Mds(usize),
    Trivial,
    /// Known from earlier work; evaluated as a formula only.
    PriorWork,
    Measured,
}

impl Source {
    pub fn tag(self) -> &'static str {
        match self {
            Source::VirtualUser(_) => "thm1",
            Source::Mds(_) => "thm2",
            Source::Trivial => "trivial",
            Source::PriorWork => "prior-work",
            Source::Measured => "measured",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RatePoint {
    pub m: Rational,
    pub r: Rational,
    pub source: Source,
}

impl RatePoint {
    pub fn new(m: Rational, r: Rational, source: Source) -> Self {
        RatePoint { m, r, source }
    }
}

impl fmt::Display for RatePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M={} R={}", self.m, self.r)
    }
}

fn check_sizes(files: usize, users: usize) -> Result<()> {
    if files == 0 || users == 0 {
        return Err(param("need N >= 1 and K >= 1"));
    }
    Ok(())
}

/// Virtual-user scheme point at parameter `r`.
pub fn thm1_point(files: usize, users: usize, r: usize) -> Result<RatePoint> {
    check_sizes(files, users)?;
    let t = (files * users - users + 1) as i64;
    let (n, r_) = (files as i64, r as i64);
    if r_ > t {
        return Err(param(format!("r = {r} exceeds NK-K+1 = {t}")));
    }
    let m = rat(choose(t, r_ + 1) - choose(t - n, r_ + 1), choose(t, r_));
    let rate = rat(n as i128 * r_ as i128, t as i128);
    Ok(RatePoint::new(m, rate, Source::VirtualUser(r)))
}

pub fn thm1_points(files: usize, users: usize) -> Result<Vec<RatePoint>> {
    let t = files * users - users + 1;
    (0..=t).map(|r| thm1_point(files, users, r)).collect()
}

/// MDS points for `q ∈ {N, N−1}` and the trivial point `(0, N)`.
///
/// The `q = N−1` point comes from a scheme that needs `N ≥ 3`; for `N = 2`
/// it is still emitted, tagged as prior work.
pub fn thm2_points(files: usize, users: usize) -> Result<Vec<RatePoint>> {
    check_sizes(files, users)?;
    if files > users {
        return Err(CachingError::Domain(format!("MDS points need N <= K, got N={files}, K={users}")));
    }
    let (n, k) = (files as i128, users as i128);
    let mds = |q: i128| (rat(n, q * (k + 1)), int(n) - rat(n * (n + 1), (k + 1) * (q + 1)));
    let mut out = vec![RatePoint::new(int(0), int(n), Source::Trivial)];
    let (m, r) = mds(n);
    out.push(RatePoint::new(m, r, Source::Mds(files)));
    if files >= 2 {
        let (m, r) = mds(n - 1);
        let source = if files >= 3 { Source::Mds(files - 1) } else { Source::PriorWork };
        out.push(RatePoint::new(m, r, source));
    }
    Ok(out)
}

/// Virtual-user points of earlier work: cache size and rate swapped.
pub fn grk_points(files: usize, users: usize) -> Result<Vec<RatePoint>> {
    Ok(thm1_points(files, users)?.into_iter().map(|p| RatePoint::new(p.r, p.m, Source::PriorWork)).collect())
}

pub fn trivial_points(files: usize) -> Vec<RatePoint> {
    let n = int(files as i128);
    vec![RatePoint::new(int(0), n, Source::Trivial), RatePoint::new(n, int(0), Source::Trivial)]
}

/// Every achievable point known for `(N, K)`.
pub fn achievable_points(files: usize, users: usize) -> Result<Vec<RatePoint>> {
    let mut pts = thm1_points(files, users)?;
    if files <= users {
        pts.extend(thm2_points(files, users)?);
    }
    pts.extend(grk_points(files, users)?);
    pts.extend(trivial_points(files));
    Ok(pts)
}

fn clamp(r: Rational) -> Rational {
    if r.is_negative() {
        int(0)
    } else {
        r
    }
}

fn check_memory(files: usize, m: Rational) -> Result<()> {
    if m.is_negative() || m > int(files as i128) {
        return Err(param(format!("M = {m} outside [0, {files}]")));
    }
    Ok(())
}

/// Converse for `2 ≤ N ≤ K`, with one regime up to `K = 2N−2` and another
/// beyond. A single file is excluded: caching it whole gives `(1, 0)`,
/// which the second regime would forbid.
pub fn converse_thm3(files: usize, users: usize, m: Rational) -> Result<Rational> {
    check_sizes(files, users)?;
    check_memory(files, m)?;
    if files < 2 || files > users {
        return Err(CachingError::Domain(format!("converse needs 2 <= N <= K, got N={files}, K={users}")));
    }
    let (n, k) = (files as i128, users as i128);
    let r = if users <= 2 * files - 2 {
        (int((k + 1) * n - 1) - int((n - 1) * (k + 1)) * m) / int(k + 1)
    } else {
        (rat(k * (k + 3), 2) - rat(k * (k + 1), 2) * m) * rat(2 * n, (k + 1) * (k + 2))
    };
    Ok(clamp(r))
}

/// Converse for two files and `K ≥ 2` users.
pub fn converse_lemma3(users: usize, m: Rational) -> Result<Rational> {
    if users < 2 {
        return Err(param("two-file converse needs K >= 2"));
    }
    check_memory(2, m)?;
    let k = users as i128;
    let r = (rat(k * (k + 3), 2) - rat((k + 1) * (k + 2), 4) * m) / rat(k * (k + 1), 2);
    Ok(clamp(r))
}

/// Cut-set bound `R ≥ s − sM/⌊N/s⌋`.
pub fn cutset(files: usize, users: usize, m: Rational, s: usize) -> Result<Rational> {
    check_sizes(files, users)?;
    check_memory(files, m)?;
    if s == 0 || s > files.min(users) {
        return Err(param(format!("cut-set size s = {s} outside [1, {}]", files.min(users))));
    }
    let s_ = s as i128;
    Ok(clamp(int(s_) - int(s_) * m / int((files / s) as i128)))
}

/// Largest of all applicable converse bounds at `M`.
pub fn max_converse(files: usize, users: usize, m: Rational) -> Result<Rational> {
    let mut best = int(0);
    for s in 1..=files.min(users) {
        best = best.max(cutset(files, users, m, s)?);
    }
    if (2..=users).contains(&files) {
        best = best.max(converse_thm3(files, users, m)?);
    }
    if files == 2 && users >= 2 {
        best = best.max(converse_lemma3(users, m)?);
    }
    if files == 2 && users >= 3 {
        // A private scheme for K users serves any two of them privately.
        best = best.max(converse_thm3(2, 2, m)?);
    }
    Ok(best)
}

/// Characterized optimal rate, or why there is none.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimalValue {
    pub value: Option<Rational>,
    pub region: &'static str,
}

impl OptimalValue {
    pub const UNCHARACTERIZED: &'static str = "uncharacterized";
}

fn cor1(users: usize, m: Rational) -> Rational {
    let k = users as i128;
    [
        int(2) - int(2) * m,
        rat(2 * k * (k + 3), (k + 1) * (k + 2)) - rat(2 * k, k + 2) * m,
        int(1) - m / int(2),
        rat(k + 3, k + 1) - rat(k + 2, 2 * k) * m,
    ]
    .into_iter()
    .fold(int(0), Rational::max)
}

fn cor2(m: Rational) -> Rational {
    [int(2) - int(2) * m, (int(9) - int(6) * m) / int(5), (int(5) - int(3) * m) / int(3), (int(9) - int(5) * m) / int(6), (int(2) - m) / int(2)]
        .into_iter()
        .fold(int(0), Rational::max)
}

pub fn optimal_curve(files: usize, users: usize, m: Rational) -> Result<OptimalValue> {
    check_sizes(files, users)?;
    check_memory(files, m)?;
    let (n, k) = (files as i128, users as i128);
    let found = |value, region| Ok(OptimalValue { value: Some(value), region });
    if (files, users) == (2, 3) {
        return found(cor2(m), "cor2");
    }
    if files <= users && m <= rat(1, k + 1) {
        return found(int(n) * (int(1) - m), "op1");
    }
    if files <= users && users <= 2 * files - 2 && m <= rat(n, (k + 1) * (n - 1)) {
        return found(int(n) - rat(1, k + 1) - int(n - 1) * m, "op2");
    }
    if files == 2 && users >= 2 && (m <= rat(2, k) || m >= rat(2 * (k - 1), k + 1)) {
        return found(cor1(users, m), "cor1");
    }
    Ok(OptimalValue { value: None, region: OptimalValue::UNCHARACTERIZED })
}

/// Piecewise-linear function through convex breakpoints, `M` strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeoffCurve {
    points: Vec<RatePoint>,
}

impl TradeoffCurve {
    pub fn points(&self) -> &[RatePoint] {
        &self.points
    }

    pub fn contains_corner(&self, m: Rational, r: Rational) -> bool {
        self.points.iter().any(|p| p.m == m && p.r == r)
    }

    /// Linear interpolation between breakpoints; `None` outside their range.
    pub fn eval(&self, m: Rational) -> Option<Rational> {
        let first = self.points.first()?;
        let last = self.points.last()?;
        if m < first.m || m > last.m {
            return None;
        }
        let i = self.points.partition_point(|p| p.m < m);
        let hi = &self.points[i];
        if hi.m == m {
            return Some(hi.r);
        }
        let lo = &self.points[i - 1];
        Some(lo.r + (hi.r - lo.r) * (m - lo.m) / (hi.m - lo.m))
    }
}

fn cross(o: &RatePoint, a: &RatePoint, b: &RatePoint) -> Rational {
    (a.m - o.m) * (b.r - o.r) - (a.r - o.r) * (b.m - o.m)
}

/// Lower convex envelope over `M`; collinear interior points are dropped.
pub fn lower_envelope(points: &[RatePoint]) -> Result<TradeoffCurve> {
    if points.is_empty() {
        return Err(param("lower envelope of an empty point set"));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.m.cmp(&b.m).then(a.r.cmp(&b.r)));
    sorted.dedup_by(|b, a| a.m == b.m);
    let mut hull: Vec<RatePoint> = Vec::with_capacity(sorted.len());
    for p in sorted {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &p) <= Rational::zero() {
            hull.pop();
        }
        hull.push(p);
    }
    Ok(TradeoffCurve { points: hull })
}

pub fn achievable_envelope(files: usize, users: usize) -> Result<TradeoffCurve> {
    lower_envelope(&achievable_points(files, users)?)
}

/// `count` evenly spaced memory values on `[0, N]`, endpoints included.
pub fn uniform_grid(files: usize, count: usize) -> Vec<Rational> {
    let steps = count.max(2) as i128 - 1;
    (0..=steps).map(|i| rat(i * files as i128, steps)).collect()
}
