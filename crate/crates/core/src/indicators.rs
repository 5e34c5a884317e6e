//! Front quality indicators: coverage, generational distance, inverted
//! generational distance and additive epsilon.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solution::Objectives;

/// A point in objective space, both objectives minimized.
pub type Point = [f64; 2];

pub fn point(o: Objectives) -> Point {
    [o.cost as f64, o.welfare as f64]
}

fn strictly_dominates(a: &Point, b: &Point) -> bool {
    a[0] <= b[0] && a[1] <= b[1] && a != b
}

fn distance(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn non_empty(set: &[Point], name: &str) -> Result<()> {
    if set.is_empty() {
        Err(Error::Usage(format!("indicator needs a non-empty {name}")))
    } else {
        Ok(())
    }
}

/// Share of `a` dominated by some point of `rf`.
pub fn coverage(rf: &[Point], a: &[Point]) -> Result<f64> {
    non_empty(a, "approximation")?;
    let hit = a.iter().filter(|x| rf.iter().any(|y| strictly_dominates(y, x))).count();
    Ok(hit as f64 / a.len() as f64)
}

/// Distance from every point of `from` to its nearest point of `to`.
pub fn nearest_distances(from: &[Point], to: &[Point]) -> Vec<f64> {
    from.iter().map(|x| to.iter().map(|y| distance(x, y)).fold(f64::INFINITY, f64::min)).collect()
}

fn root_sum_squares_over(d: &[f64], n: usize) -> f64 {
    d.iter().map(|v| v * v).sum::<f64>().sqrt() / n as f64
}

/// Generational distance of `a` to `rf`.
pub fn gd(rf: &[Point], a: &[Point]) -> Result<f64> {
    non_empty(rf, "reference front")?;
    non_empty(a, "approximation")?;
    Ok(root_sum_squares_over(&nearest_distances(a, rf), a.len()))
}

/// Inverted generational distance: from every reference point to `a`.
pub fn igd(rf: &[Point], a: &[Point]) -> Result<f64> {
    non_empty(rf, "reference front")?;
    non_empty(a, "approximation")?;
    Ok(root_sum_squares_over(&nearest_distances(rf, a), rf.len()))
}

/// Smallest translation that lets `a` cover every point of `rf` (additive).
pub fn epsilon(rf: &[Point], a: &[Point]) -> Result<f64> {
    non_empty(rf, "reference front")?;
    non_empty(a, "approximation")?;
    Ok(rf
        .iter()
        .map(|y| a.iter().map(|x| (x[0] - y[0]).max(x[1] - y[1])).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Points of `set` not strictly dominated by another one, duplicates removed,
/// sorted by the first objective.
pub fn non_dominated(set: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::new();
    for p in set {
        if !set.iter().any(|q| strictly_dominates(q, p)) && !out.contains(p) {
            out.push(*p);
        }
    }
    out.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    out
}

/// Per-dimension min and max over all input points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Point,
    pub max: Point,
}

impl Bounds {
    /// Maps into `[0, 1]`; a degenerate dimension maps to 0.
    pub fn normalize(&self, p: &Point) -> Point {
        let mut out = [0.0; 2];
        for k in 0..2 {
            let span = self.max[k] - self.min[k];
            out[k] = if span > 0.0 { (p[k] - self.min[k]) / span } else { 0.0 };
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedFronts {
    pub bounds: Bounds,
    /// Non-dominated union of the inputs, raw values.
    pub reference_raw: Vec<Point>,
    pub reference: Vec<Point>,
    pub fronts: Vec<Vec<Point>>,
}

pub fn normalize_fronts(fronts: &[Vec<Point>]) -> Result<NormalizedFronts> {
    let union: Vec<Point> = fronts.iter().flatten().copied().collect();
    non_empty(&union, "set of fronts")?;
    let mut bounds = Bounds { min: union[0], max: union[0] };
    for p in &union {
        for (k, v) in p.iter().enumerate() {
            bounds.min[k] = bounds.min[k].min(*v);
            bounds.max[k] = bounds.max[k].max(*v);
        }
    }
    let reference_raw = non_dominated(&union);
    let norm = |set: &[Point]| set.iter().map(|p| bounds.normalize(p)).collect::<Vec<_>>();
    Ok(NormalizedFronts {
        bounds,
        reference: norm(&reference_raw),
        fronts: fronts.iter().map(|f| norm(f)).collect(),
        reference_raw,
    })
}

/// Indicators for one approximation against the reference front.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontReport {
    pub label: String,
    pub cv: f64,
    pub gd: f64,
    pub igd: f64,
    pub eps: f64,
    pub gd_raw: f64,
    pub igd_raw: f64,
    pub eps_raw: f64,
    pub size: usize,
    pub reference_size: usize,
    /// Nearest-reference distance of every approximation point (normalized).
    pub distances: Vec<f64>,
    /// Nearest-approximation distance of every reference point (normalized).
    pub inverse_distances: Vec<f64>,
    pub normalization: String,
}

/// Compares every labelled front against the non-dominated union of all of them.
pub fn compare_fronts(labelled: &[(String, Vec<Point>)]) -> Result<Vec<FrontReport>> {
    let fronts: Vec<Vec<Point>> = labelled.iter().map(|(_, f)| f.clone()).collect();
    let n = normalize_fronts(&fronts)?;
    labelled
        .iter()
        .zip(&n.fronts)
        .map(|((label, raw), a)| {
            Ok(FrontReport {
                label: label.clone(),
                cv: coverage(&n.reference_raw, raw)?,
                gd: gd(&n.reference, a)?,
                igd: igd(&n.reference, a)?,
                eps: epsilon(&n.reference, a)?,
                gd_raw: gd(&n.reference_raw, raw)?,
                igd_raw: igd(&n.reference_raw, raw)?,
                eps_raw: epsilon(&n.reference_raw, raw)?,
                size: raw.len(),
                reference_size: n.reference.len(),
                distances: nearest_distances(a, &n.reference),
                inverse_distances: nearest_distances(&n.reference, a),
                normalization: "min-max over the union of compared fronts".into(),
            })
        })
        .collect()
}

/// Writes one row per (instance, report): CV, EPS, GD, IGD and sizes.
pub fn write_report_csv(out: impl Write, rows: &[(String, Vec<FrontReport>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "instance",
        "method",
        "CV",
        "EPS",
        "GD",
        "IGD",
        "EPS_raw",
        "GD_raw",
        "IGD_raw",
        "size",
        "reference_size",
    ])?;
    for (instance, reports) in rows {
        for r in reports {
            w.write_record([
                instance.clone(),
                r.label.clone(),
                r.cv.to_string(),
                r.eps.to_string(),
                r.gd.to_string(),
                r.igd.to_string(),
                r.eps_raw.to_string(),
                r.gd_raw.to_string(),
                r.igd_raw.to_string(),
                r.size.to_string(),
                r.reference_size.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(std::path::Path::new("<report>"), e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn coverage_cases() {
        assert_eq!(coverage(&[[0.0, 0.0]], &[[1.0, 1.0]]).unwrap(), 1.0);
        let a = [[0.0, 2.0], [1.0, 1.0], [2.0, 0.0]];
        assert_eq!(coverage(&a, &a).unwrap(), 0.0);
        let rf = [[0.0, 2.0], [0.5, 0.5], [2.0, 0.0]];
        assert!((coverage(&rf, &a).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(coverage(&rf, &[]).is_err());
    }

    #[test]
    fn distance_cases() {
        assert_eq!(gd(&[[0.0, 0.0]], &[[3.0, 4.0]]).unwrap(), 5.0);
        assert_eq!(igd(&[[0.0, 0.0]], &[[3.0, 4.0]]).unwrap(), 5.0);
        let a = [[0.0, 2.0], [2.0, 0.0]];
        assert_eq!(gd(&a, &a).unwrap(), 0.0);
        assert_eq!(igd(&a, &a).unwrap(), 0.0);
        assert!(gd(&[], &a).is_err());
    }

    #[test]
    fn epsilon_cases() {
        let a = [[0.0, 2.0], [2.0, 0.0]];
        assert_eq!(epsilon(&a, &a).unwrap(), 0.0);
        assert_eq!(epsilon(&[[0.0, 0.0]], &[[1.0, 1.0]]).unwrap(), 1.0);
        assert_eq!(epsilon(&[[0.0, 0.0]], &a).unwrap(), 2.0);
    }

    #[test]
    fn identical_fronts_score_zero() {
        let f = vec![[1.0, 9.0], [4.0, 3.0], [8.0, 1.0]];
        let r = compare_fronts(&[("a".into(), f.clone()), ("b".into(), f)]).unwrap();
        for x in r {
            assert_eq!((x.cv, x.gd, x.igd, x.eps), (0.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn degenerate_dimension_maps_to_zero() {
        let n = normalize_fronts(&[vec![[5.0, 1.0], [5.0, 3.0]]]).unwrap();
        assert_eq!(n.fronts[0], vec![[0.0, 0.0], [0.0, 1.0]]);
        assert_eq!(n.reference_raw, vec![[5.0, 1.0]]);
    }

    fn pts() -> impl Strategy<Value = Vec<Point>> {
        prop::collection::vec((0i32..50, 0i32..50).prop_map(|(a, b)| [a as f64, b as f64]), 1..12)
    }

    proptest! {
        #[test]
        fn reference_is_dominance_consistent(a in pts(), b in pts()) {
            let n = normalize_fronts(&[a.clone(), b.clone()]).unwrap();
            for p in &n.reference_raw {
                prop_assert!(!n.reference_raw.iter().any(|q| strictly_dominates(q, p)));
            }
            // Every input point is covered or equalled by the reference.
            for p in a.iter().chain(&b) {
                prop_assert!(n.reference_raw.iter().any(|q| q == p || strictly_dominates(q, p)));
            }
        }

        #[test]
        fn subsets_of_the_reference_are_not_covered(a in pts()) {
            let rf = non_dominated(&a);
            let sub: Vec<Point> = rf.iter().step_by(2).copied().collect();
            prop_assert_eq!(coverage(&rf, &sub).unwrap(), 0.0);
            prop_assert!(epsilon(&rf, &sub).unwrap() >= 0.0);
        }

        #[test]
        fn distances_scale_with_common_factor(a in pts(), b in pts(), k in 1u32..10) {
            let s = k as f64;
            let scale = |v: &[Point]| v.iter().map(|p| [p[0] * s + 3.0, p[1] * s - 7.0]).collect::<Vec<_>>();
            let (g1, g2) = (gd(&a, &b).unwrap(), gd(&scale(&a), &scale(&b)).unwrap());
            prop_assert!((g2 - s * g1).abs() < 1e-9 * (1.0 + g2));
            let (i1, i2) = (igd(&a, &b).unwrap(), igd(&scale(&a), &scale(&b)).unwrap());
            prop_assert!((i2 - s * i1).abs() < 1e-9 * (1.0 + i2));
        }

        #[test]
        fn non_positive_epsilon_means_no_coverage(a in pts(), b in pts()) {
            // Holds for fronts; a set with internally dominated points can violate it.
            let a = non_dominated(&a);
            if epsilon(&b, &a).unwrap() <= 0.0 {
                prop_assert_eq!(coverage(&b, &a).unwrap(), 0.0);
            }
        }
    }
}
