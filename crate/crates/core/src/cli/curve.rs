//! Tradeoff curve series and their CSV form.

use std::collections::BTreeMap;

use crate::bounds::{
    achievable_envelope, achievable_points, grk_points, max_converse, optimal_curve, thm1_points, thm2_points,
    uniform_grid, Rational, RatePoint,
};
use crate::error::Result;

pub const GRID_POINTS: usize = 512;

/// One CSV row. `r` is empty where the series has no value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveRow {
    pub m: Rational,
    pub r: Option<Rational>,
    pub series: &'static str,
    pub valid: String,
}

pub fn to_f64(x: Rational) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Decimal with 12 significant digits, trailing zeros trimmed.
pub fn decimal(x: Rational) -> String {
    let v = to_f64(x);
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let places = (11 - magnitude).max(0) as usize;
    let s = format!("{v:.places$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn joined_tags(points: &[RatePoint], m: Rational, r: Rational) -> String {
    let mut tags: Vec<&str> = Vec::new();
    for p in points.iter().filter(|p| p.m == m && p.r == r) {
        if !tags.contains(&p.source.tag()) {
            tags.push(p.source.tag());
        }
    }
    tags.join("+")
}

/// Points of one family, one per `M` (lowest rate kept), by increasing `M`.
fn family(series: &'static str, points: Vec<RatePoint>) -> Vec<CurveRow> {
    let mut by_m: BTreeMap<Rational, RatePoint> = BTreeMap::new();
    for p in points {
        let slot = by_m.entry(p.m).or_insert(p);
        if p.r < slot.r {
            *slot = p;
        }
    }
    by_m.into_values().map(|p| CurveRow { m: p.m, r: Some(p.r), series, valid: p.source.tag().into() }).collect()
}

/// The memory values sampled: a uniform grid merged with every breakpoint.
pub fn sample_grid(files: usize, users: usize, count: usize) -> Result<Vec<Rational>> {
    let mut ms = uniform_grid(files, count);
    ms.extend(achievable_envelope(files, users)?.points().iter().map(|p| p.m));
    ms.sort();
    ms.dedup();
    Ok(ms)
}

/// Every series of the tradeoff plot for `(N, K)`.
pub fn curve_rows(files: usize, users: usize, count: usize) -> Result<Vec<CurveRow>> {
    let points = achievable_points(files, users)?;
    let envelope = achievable_envelope(files, users)?;
    let grid = sample_grid(files, users, count)?;
    let mut rows = Vec::new();

    for &m in &grid {
        let r = envelope.eval(m);
        let valid = match r {
            Some(r) if envelope.contains_corner(m, r) => joined_tags(&points, m, r),
            _ => "interp".to_string(),
        };
        rows.push(CurveRow { m, r, series: "ach_lce", valid });
    }
    for &m in &grid {
        rows.push(CurveRow { m, r: Some(max_converse(files, users, m)?), series: "conv_max", valid: "bound".into() });
    }
    rows.extend(family("thm1", thm1_points(files, users)?));
    if files <= users {
        rows.extend(family("thm2", thm2_points(files, users)?));
    }
    rows.extend(family("grk", grk_points(files, users)?));
    for &m in &grid {
        let o = optimal_curve(files, users, m)?;
        rows.push(CurveRow { m, r: o.value, series: "optimal", valid: o.region.into() });
    }
    Ok(rows)
}

pub fn write_csv<W: std::io::Write>(rows: &[CurveRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["M", "R", "series", "valid"])?;
    for row in rows {
        let r = row.r.map(decimal).unwrap_or_default();
        w.write_record([decimal(row.m).as_str(), r.as_str(), row.series, row.valid.as_str()])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::rat;

    #[test]
    fn decimals() {
        assert_eq!(decimal(rat(1, 3)), "0.333333333333");
        assert_eq!(decimal(rat(4, 3)), "1.33333333333");
        assert_eq!(decimal(rat(3, 2)), "1.5");
        assert_eq!(decimal(rat(0, 1)), "0");
        assert_eq!(decimal(rat(5, 1)), "5");
        assert_eq!(decimal(rat(-1, 4)), "-0.25");
    }

    #[test]
    fn series_are_strictly_increasing() {
        let rows = curve_rows(2, 3, 64).unwrap();
        for series in ["ach_lce", "conv_max", "thm1", "thm2", "grk", "optimal"] {
            let ms: Vec<_> = rows.iter().filter(|r| r.series == series).map(|r| r.m).collect();
            assert!(!ms.is_empty(), "{series}");
            assert!(ms.windows(2).all(|w| w[0] < w[1]), "{series}");
        }
    }

    #[test]
    fn corners_carry_their_sources() {
        let rows = curve_rows(2, 3, 8).unwrap();
        let tag = |m: Rational| rows.iter().find(|r| r.series == "ach_lce" && r.m == m).unwrap().valid.clone();
        assert_eq!(tag(rat(1, 4)), "thm1+thm2");
        assert_eq!(tag(rat(2, 3)), "thm1");
        assert_eq!(tag(rat(1, 1)), "prior-work");
        assert_eq!(tag(rat(2, 1)), "thm1+prior-work+trivial");
        let quarter = rows.iter().find(|r| r.series == "optimal" && r.m == rat(1, 4)).unwrap();
        assert_eq!(quarter.r, Some(rat(3, 2)));
    }

    #[test]
    fn csv_layout() {
        let rows = vec![CurveRow { m: rat(1, 2), r: None, series: "optimal", valid: "uncharacterized".into() }];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "M,R,series,valid\n0.5,,optimal,uncharacterized\n");
    }
}
