//! Deciding `a in S^q` uniformly on `[0, T]` for a [`SymbolPoly`].
//!
//! Coefficients are black-box expressions, so "identically zero" means "below `tol_zero` on
//! the sample grid". A coefficient that vanishes on the grid but not identically is reported
//! as zero; uniformity in `x` is certified on the sampled periodic box only.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::expr::{Bindings, Expr};
use crate::sampling::{linspace, periodic_nodes, seeded_rng, tensor_points};
use crate::symbol::{SymbolPoly, TermKey};

/// Default zero tolerance for sampled coefficients.
pub const TOL_ZERO: f64 = 1e-10;
/// Slack on the fitted ray slope.
pub const SLOPE_SLACK: f64 = 0.1;

/// Sample grid for coefficient zero tests and ray sampling.
#[derive(Clone, Debug)]
pub struct OrderGrid {
    pub t_points: Vec<f64>,
    /// Full tensor grid of x points.
    pub x_points: Vec<Vec<f64>>,
    pub params: Arc<BTreeMap<String, f64>>,
    /// Unit directions for ray sampling.
    pub directions: Vec<Vec<f64>>,
    /// The `|xi|` ladder for ray sampling.
    pub radii: Vec<f64>,
    pub tol_zero: f64,
}

impl OrderGrid {
    /// 17 t-points on `[0, horizon]`, 9 periodic x-points per axis, 12 ray directions and
    /// radii `2^4..2^14`.
    pub fn new(dim: usize, horizon: f64, params: Arc<BTreeMap<String, f64>>) -> Self {
        Self::with_density(dim, horizon, params, 17, 9)
    }

    pub fn with_density(
        dim: usize,
        horizon: f64,
        params: Arc<BTreeMap<String, f64>>,
        t_count: usize,
        x_per_axis: usize,
    ) -> Self {
        Self {
            t_points: linspace(0.0, horizon, t_count),
            x_points: tensor_points(&periodic_nodes(x_per_axis), dim),
            params,
            directions: unit_directions(dim, 12),
            radii: (4..=14).map(|k| f64::powi(2.0, k)).collect(),
            tol_zero: TOL_ZERO,
        }
    }

    fn bindings(&self) -> impl Iterator<Item = Bindings<f64>> + '_ {
        self.t_points.iter().flat_map(move |&t| {
            self.x_points
                .iter()
                .map(move |x| Bindings::with_params(t, x.clone(), self.params.clone()))
        })
    }

    /// Largest `|c(t,x)|` over the grid, with its location, or the first evaluation failure.
    pub fn max_abs(&self, c: &Expr) -> Result<(f64, Bindings<f64>), SampleFailure> {
        let mut best: Option<(f64, Bindings<f64>)> = None;
        for b in self.bindings() {
            let v = c.eval(&b).map_err(|e| SampleFailure {
                t: b.t,
                x: b.x.clone(),
                message: e.to_string(),
            })?;
            let v = v.norm();
            if !v.is_finite() {
                return Err(SampleFailure {
                    t: b.t,
                    x: b.x.clone(),
                    message: format!("non-finite value of `{c}`"),
                });
            }
            if best.as_ref().is_none_or(|(m, _)| v > *m) {
                best = Some((v, b));
            }
        }
        Ok(best.unwrap_or_else(|| (0.0, Bindings::with_params(0.0, vec![], self.params.clone()))))
    }

    pub fn is_zero(&self, c: &Expr) -> Result<bool, SampleFailure> {
        Ok(self.max_abs(c)?.0 <= self.tol_zero)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub t: f64,
    pub x: Vec<f64>,
    pub message: String,
}

impl fmt::Display for SampleFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at t={}, x={:?}", self.message, self.t, self.x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderMethod {
    Canonical,
    RaySampling,
}

/// The term that violates the order bound and where its coefficient was seen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub alpha: Vec<u32>,
    pub p: i32,
    pub order: i32,
    pub coefficient: String,
    pub t: f64,
    pub x: Vec<f64>,
    pub magnitude: f64,
}

/// Worst ray seen by the sampling stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayReport {
    pub t: f64,
    pub x: Vec<f64>,
    pub direction: Vec<f64>,
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderVerdict {
    pub target: i32,
    pub verdict: Verdict,
    pub method: OrderMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_ray: Option<RayReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl OrderVerdict {
    pub fn inconclusive(target: i32, method: OrderMethod, note: impl Into<String>) -> Self {
        Self {
            target,
            verdict: Verdict::Inconclusive,
            method,
            witness: None,
            worst_ray: None,
            note: Some(note.into()),
        }
    }
}

/// Canonicalize `a` and drop every term whose coefficient vanishes on the grid.
pub fn prune(a: &SymbolPoly, grid: &OrderGrid) -> Result<SymbolPoly, SampleFailure> {
    let canon = a.canonicalize();
    let mut zero = Vec::new();
    for (k, c) in canon.terms() {
        if grid.is_zero(c)? {
            zero.push(k.clone());
        }
    }
    Ok(canon.retain(|k, _| !zero.contains(k)))
}

/// Term-multiset equality: after canonicalizing and pruning, both symbols carry the same
/// keys and their coefficients agree on the grid.
pub fn terms_match(a: &SymbolPoly, b: &SymbolPoly, grid: &OrderGrid) -> Result<bool, SampleFailure> {
    let (pa, pb) = (prune(a, grid)?, prune(b, grid)?);
    let keys_a: Vec<&TermKey> = pa.terms().map(|(k, _)| k).collect();
    let keys_b: Vec<&TermKey> = pb.terms().map(|(k, _)| k).collect();
    if keys_a != keys_b {
        return Ok(false);
    }
    for (k, ca) in pa.terms() {
        let cb = pb.coefficient(k).expect("same key set");
        if !grid.is_zero(&Expr::sub(ca.clone(), cb.clone()))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Decide `a in S^target`.
pub fn check_order(a: &SymbolPoly, target: i32, grid: &OrderGrid) -> OrderVerdict {
    let canon = a.canonicalize();
    // Stage 1: every surviving term above the target must have a vanishing coefficient.
    let mut worst: Option<Witness> = None;
    let mut kept = Vec::new();
    for (k, c) in canon.terms() {
        let (mag, at) = match grid.max_abs(c) {
            Ok(v) => v,
            Err(e) => {
                return OrderVerdict::inconclusive(
                    target,
                    OrderMethod::Canonical,
                    format!("coefficient of {k:?} could not be sampled: {e}"),
                )
            }
        };
        if mag <= grid.tol_zero {
            continue;
        }
        kept.push(k.clone());
        if k.nominal_order() > target && worst.as_ref().is_none_or(|w| k.nominal_order() > w.order) {
            worst = Some(Witness {
                alpha: k.alpha.clone(),
                p: k.weight,
                order: k.nominal_order(),
                coefficient: c.to_string(),
                t: at.t,
                x: at.x.clone(),
                magnitude: mag,
            });
        }
    }
    if let Some(w) = worst {
        return OrderVerdict {
            target,
            verdict: Verdict::Fail,
            method: OrderMethod::Canonical,
            witness: Some(w),
            worst_ray: None,
            note: None,
        };
    }
    let pruned = canon.retain(|k, _| kept.contains(k));
    let residual = pruned.dim() >= 2 && pruned.terms().any(|(k, _)| k.degree() >= 2);
    if !residual {
        return OrderVerdict {
            target,
            verdict: Verdict::Pass,
            method: OrderMethod::Canonical,
            witness: None,
            worst_ray: None,
            note: None,
        };
    }
    ray_check(&pruned, target, grid)
}

/// Stage 2: least-squares slope of `log|a|` against `log r` along every ray.
fn ray_check(a: &SymbolPoly, target: i32, grid: &OrderGrid) -> OrderVerdict {
    let logr: Vec<f64> = grid.radii.iter().map(|r| r.ln()).collect();
    let mut worst: Option<RayReport> = None;
    for b in grid.bindings() {
        for dir in &grid.directions {
            let mut logv = Vec::with_capacity(logr.len());
            for &r in &grid.radii {
                let xi: Vec<f64> = dir.iter().map(|d| d * r).collect();
                match a.eval(&b, &xi) {
                    Ok(v) => logv.push(v.norm().ln()),
                    Err(e) => {
                        return OrderVerdict::inconclusive(
                            target,
                            OrderMethod::RaySampling,
                            format!("evaluation failed at t={}, x={:?}: {e}", b.t, b.x),
                        )
                    }
                }
            }
            // A ray on which the symbol vanishes identically carries no growth.
            if logv.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let slope = fit_slope(&logr, &logv);
            if worst.as_ref().is_none_or(|w| slope > w.slope) {
                worst = Some(RayReport {
                    t: b.t,
                    x: b.x.clone(),
                    direction: dir.clone(),
                    slope,
                });
            }
        }
    }
    let pass = worst.as_ref().is_none_or(|w| w.slope <= target as f64 + SLOPE_SLACK);
    OrderVerdict {
        target,
        verdict: if pass { Verdict::Pass } else { Verdict::Inconclusive },
        method: OrderMethod::RaySampling,
        witness: None,
        worst_ray: worst,
        note: None,
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Fixed pseudo-random unit directions in `R^dim`, avoiding the coordinate axes.
pub fn unit_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        0 => vec![],
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let th = std::f64::consts::PI * (2 * k + 1) as f64 / count as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            let mut rng = seeded_rng(0x5eed_d1ec);
            (0..count)
                .map(|_| {
                    let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                    v.into_iter().map(|a| a / n).collect()
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn grid(dim: usize) -> OrderGrid {
        OrderGrid::new(dim, 1.0, Arc::new(BTreeMap::new()))
    }

    fn term(dim: usize, c: &str, alpha: Vec<u32>, p: i32) -> SymbolPoly {
        SymbolPoly::monomial(dim, parse(c).unwrap(), alpha, p)
    }

    #[test]
    fn nominal_negative_order() {
        let v = check_order(&term(1, "1", vec![1], 2), -1, &grid(1));
        assert_eq!(v.verdict, Verdict::Pass);
        assert_eq!(v.method, OrderMethod::Canonical);
    }

    #[test]
    fn cancelling_coefficients() {
        let a = term(1, "0.3*t - 0.3*t", vec![1], 2);
        assert_eq!(check_order(&a, -2, &grid(1)).verdict, Verdict::Pass);
    }

    #[test]
    fn fail_with_witness() {
        let a = term(1, "1", vec![2], 2).add(&term(1, "1", vec![1], 2)).unwrap();
        let v = check_order(&a, -1, &grid(1));
        assert_eq!(v.verdict, Verdict::Fail);
        let w = v.witness.unwrap();
        assert_eq!((w.alpha, w.p, w.order), (vec![0], 0, 0));
    }

    #[test]
    fn evaluation_error_is_inconclusive() {
        let v = check_order(&term(1, "1/t", vec![1], 0), 0, &grid(1));
        assert_eq!(v.verdict, Verdict::Inconclusive);
        assert!(v.note.unwrap().contains("division by zero"));
    }

    #[test]
    fn two_dimensional_ray_stage() {
        // xi1 xi2 <xi>^-2 is order 0 and survives canonicalization unreduced.
        let a = term(2, "1", vec![1, 1], 2);
        let v = check_order(&a, 0, &grid(2));
        assert_eq!(v.verdict, Verdict::Pass);
        assert_eq!(v.method, OrderMethod::RaySampling);
        assert_eq!(check_order(&a, -1, &grid(2)).verdict, Verdict::Fail);
    }

    #[test]
    fn two_dimensional_norm_square() {
        let a = term(2, "1", vec![2, 0], 2)
            .add(&term(2, "1", vec![0, 2], 2))
            .unwrap()
            .sub(&SymbolPoly::one(2))
            .unwrap();
        assert_eq!(check_order(&a, -2, &grid(2)).verdict, Verdict::Pass);
        assert_eq!(check_order(&a, -3, &grid(2)).verdict, Verdict::Fail);
    }

    #[test]
    fn matching_terms() {
        let a = term(1, "t + t", vec![2], 2);
        let b = term(1, "2*t", vec![0], 0).sub(&term(1, "2*t", vec![0], 2)).unwrap();
        assert!(terms_match(&a, &b, &grid(1)).unwrap());
        assert!(!terms_match(&a, &term(1, "2*t", vec![0], 0), &grid(1)).unwrap());
    }

    #[test]
    fn slope() {
        let x = [0.0, 1.0, 2.0];
        assert!((fit_slope(&x, &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-15);
    }
}
