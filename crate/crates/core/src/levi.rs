//! Lower-order matrices `D = T^-1 B T`, `E = T^-1 D_t T` and the Levi conditions.
//!
//! Main theorem: the Cauchy problem is well posed if
//! `e_{i,j} in S^{j-i}` for `2 <= i <= m-1`, `j < i`, and
//! `d_{m,k} - e_{m,k} in S^{k-m}` for `k = 1..m-1`.
//!
//! Corollary, when `lambda_1..lambda_{m-2}` do not depend on `t`:
//! `d_{m,k} in S^{k-m}` for `k <= m-2` and `d_{m,m-1} - D_t lambda_{m-1} <xi>^-1 in S^-1`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Bindings, EvalError, Expr};
use crate::matrix::SymbolMatrix;
use crate::order::{check_order, OrderGrid, OrderVerdict, Verdict};
use crate::problem::ProblemSpec;
use crate::reduction::{build_companion, root_symbols, CompanionSystem, ReductionError};
use crate::sampling::{geomspace, periodic_nodes};
use crate::schur::{SchurData, SchurError};
use crate::symbol::{SymbolError, SymbolPoly};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LeviError {
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Schur(#[from] SchurError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

/// Row `m` of `D`: `d_{m,k} = sum_{j=k}^m (b_j - b_(j)) omega_{j,k}`; other rows vanish.
pub fn compute_d(sys: &CompanionSystem, schur: &SchurData) -> Result<SymbolMatrix, SymbolError> {
    let m = sys.order;
    let mut d = SymbolMatrix::zeros(m, sys.dim);
    for k in 1..=m {
        let mut acc = SymbolPoly::zero(sys.dim);
        for j in k..=m {
            acc = acc.add(&sys.lower_row[j - 1].mul(schur.omega(j, k))?)?;
        }
        d.set(m - 1, k - 1, acc.canonicalize());
    }
    Ok(d)
}

/// `e_{i,j} = sum_{j<k<=i} (T^-1)_{i,k} D_t omega_{k,j}`, strictly lower triangular.
pub fn compute_e(schur: &SchurData) -> Result<SymbolMatrix, SymbolError> {
    let m = schur.order;
    let mut dt_omega = vec![vec![SymbolPoly::zero(schur.dim); m]; m];
    for j in 1..=m {
        for k in 1..j {
            dt_omega[j - 1][k - 1] = schur.omega(j, k).d_t()?;
        }
    }
    let mut e = SymbolMatrix::zeros(m, schur.dim);
    for i in 1..=m {
        for j in 1..i {
            let mut acc = SymbolPoly::zero(schur.dim);
            for k in j + 1..=i {
                acc = acc.add(&schur.tinv.get(i - 1, k - 1).mul(&dt_omega[k - 1][j - 1])?)?;
            }
            e.set(i - 1, j - 1, acc.canonicalize());
        }
    }
    Ok(e)
}

/// `T^-1 (D_t T)` by plain matrix multiplication; the reference for [`compute_e`].
pub fn e_by_product(schur: &SchurData) -> Result<SymbolMatrix, SymbolError> {
    schur.tinv.mul(&schur.t.d_t()?)
}

/// Everything the checks need, built once.
#[derive(Clone, Debug)]
pub struct LeviData {
    pub companion: CompanionSystem,
    pub schur: SchurData,
    pub d: SymbolMatrix,
    pub e: SymbolMatrix,
}

impl LeviData {
    pub fn new(spec: &ProblemSpec) -> Result<Self, LeviError> {
        let companion = build_companion(spec)?;
        let schur = SchurData::new(&root_symbols(spec))?;
        let d = compute_d(&companion, &schur)?;
        let e = compute_e(&schur)?;
        Ok(Self { companion, schur, d, e })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum LeviVerdict {
    Pass,
    Fail,
    Inconclusive,
    NotApplicable,
}

impl fmt::Display for LeviVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LeviVerdict::Pass => "PASS",
            LeviVerdict::Fail => "FAIL",
            LeviVerdict::Inconclusive => "INCONCLUSIVE",
            LeviVerdict::NotApplicable => "NOT-APPLICABLE",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeviCondition {
    pub id: String,
    pub result: OrderVerdict,
    /// The symbol tested, in canonical form.
    pub symbol: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    MainTheorem,
    Corollary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeviReport {
    pub criterion: Criterion,
    pub overall: LeviVerdict,
    /// Whether `lambda_1..lambda_{m-2}` are constant in `t`.
    pub corollary_applicable: bool,
    pub conditions: Vec<LeviCondition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl LeviReport {
    /// The first failing condition, if any.
    pub fn first_failure(&self) -> Option<&LeviCondition> {
        self.conditions.iter().find(|c| c.result.verdict == Verdict::Fail)
    }

    fn from_conditions(criterion: Criterion, applicable: bool, conditions: Vec<LeviCondition>) -> Self {
        let verdicts: Vec<Verdict> = conditions.iter().map(|c| c.result.verdict).collect();
        let overall = if verdicts.contains(&Verdict::Fail) {
            LeviVerdict::Fail
        } else if verdicts.contains(&Verdict::Inconclusive) {
            LeviVerdict::Inconclusive
        } else {
            LeviVerdict::Pass
        };
        Self {
            criterion,
            overall,
            corollary_applicable: applicable,
            conditions,
            note: None,
        }
    }

    fn construction_failure(criterion: Criterion, err: &LeviError) -> Self {
        Self {
            criterion,
            overall: LeviVerdict::Inconclusive,
            corollary_applicable: false,
            conditions: vec![],
            note: Some(format!("construction failed: {err}")),
        }
    }
}

fn condition(id: String, symbol: &SymbolPoly, target: i32, grid: &OrderGrid) -> LeviCondition {
    LeviCondition {
        id,
        result: check_order(symbol, target, grid),
        symbol: symbol.canonicalize().to_string(),
    }
}

fn default_grid(spec: &ProblemSpec) -> OrderGrid {
    OrderGrid::new(spec.dim, spec.horizon, spec.params.clone())
}

/// `lambda_1..lambda_{m-2}` constant in `t` on the grid.
pub fn corollary_applicable(spec: &ProblemSpec, grid: &OrderGrid) -> bool {
    spec.roots[..spec.order - 2].iter().flatten().all(|c| {
        c.d_dt()
            .ok()
            .and_then(|d| grid.is_zero(&d).ok())
            .unwrap_or(false)
    })
}

pub fn check_main_theorem(spec: &ProblemSpec) -> LeviReport {
    check_main_theorem_on(spec, &default_grid(spec))
}

pub fn check_main_theorem_on(spec: &ProblemSpec, grid: &OrderGrid) -> LeviReport {
    let data = match LeviData::new(spec) {
        Ok(d) => d,
        Err(e) => return LeviReport::construction_failure(Criterion::MainTheorem, &e),
    };
    let m = spec.order;
    let mut conditions = Vec::new();
    for i in 2..m {
        for j in 1..i {
            let target = j as i32 - i as i32;
            conditions.push(condition(
                format!("e[{i},{j}] ∈ S^{{{target}}}"),
                data.e.get(i - 1, j - 1),
                target,
                grid,
            ));
        }
    }
    for k in 1..m {
        let target = k as i32 - m as i32;
        let diff = match data.d.get(m - 1, k - 1).sub(data.e.get(m - 1, k - 1)) {
            Ok(s) => s,
            Err(e) => return LeviReport::construction_failure(Criterion::MainTheorem, &e.into()),
        };
        conditions.push(condition(format!("d[{m},{k}]−e[{m},{k}] ∈ S^{{{target}}}"), &diff, target, grid));
    }
    LeviReport::from_conditions(Criterion::MainTheorem, corollary_applicable(spec, grid), conditions)
}

pub fn check_corollary(spec: &ProblemSpec) -> LeviReport {
    check_corollary_on(spec, &default_grid(spec))
}

pub fn check_corollary_on(spec: &ProblemSpec, grid: &OrderGrid) -> LeviReport {
    if !corollary_applicable(spec, grid) {
        return LeviReport {
            criterion: Criterion::Corollary,
            overall: LeviVerdict::NotApplicable,
            corollary_applicable: false,
            conditions: vec![],
            note: Some(format!("lambda_1..lambda_{} are not constant in t", spec.order - 2)),
        };
    }
    let data = match LeviData::new(spec) {
        Ok(d) => d,
        Err(e) => return LeviReport::construction_failure(Criterion::Corollary, &e),
    };
    let m = spec.order;
    let mut conditions = Vec::new();
    for k in 1..m - 1 {
        let target = k as i32 - m as i32;
        conditions.push(condition(
            format!("d[{m},{k}] ∈ S^{{{target}}}"),
            data.d.get(m - 1, k - 1),
            target,
            grid,
        ));
    }
    let correction = data.schur.roots[m - 2]
        .d_t()
        .and_then(|s| s.shift_weight(1))
        .and_then(|s| data.d.get(m - 1, m - 2).sub(&s));
    match correction {
        Ok(diff) => conditions.push(condition(
            format!("d[{m},{}]−D_tλ{}⟨ξ⟩⁻¹ ∈ S^{{-1}}", m - 1, m - 1),
            &diff,
            -1,
            grid,
        )),
        Err(e) => return LeviReport::construction_failure(Criterion::Corollary, &e.into()),
    }
    LeviReport::from_conditions(Criterion::Corollary, true, conditions)
}

/// Oleinik comparison for `D_t^2 u - a(t)^2 D_x^2 u - c_{0,1} D_x u - ... = f`, in the form
/// `u_tt - a11 u_xx + d u_x + ...` with `a11 = a^2` and `d = -i c_{0,1}`:
/// find `C, A > 0` with `t d^2 <= C (A a11 - d_t a11)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OleinikReport {
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<OleinikConstants>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_violation: Option<OleinikSample>,
    pub t_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    /// Exponents `g` of the scanned constants `10^g`.
    pub exponents: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OleinikConstants {
    pub c: f64,
    pub a: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OleinikSample {
    pub t: f64,
    pub x: f64,
    pub constants: OleinikConstants,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum OleinikError {
    #[error("Oleinik comparison needs m = 2, n = 1 and lambda_1 + lambda_2 = 0: {0}")]
    NotApplicable(String),
    #[error("`{what}` is not real at t={t}, x={x}")]
    NonReal { what: String, t: f64, x: f64 },
    #[error("evaluation failed at t={t}, x={x}: {source}")]
    Eval { t: f64, x: f64, source: EvalError },
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

const OLEINIK_T_POINTS: usize = 64;
const OLEINIK_T_MIN: f64 = 1e-6;

pub fn check_oleinik(spec: &ProblemSpec) -> Result<OleinikReport, OleinikError> {
    if spec.order != 2 || spec.dim != 1 {
        return Err(OleinikError::NotApplicable(format!("m = {}, n = {}", spec.order, spec.dim)));
    }
    let a = spec.roots[0][0].clone();
    let grid = default_grid(spec);
    let sum = Expr::add(a.clone(), spec.roots[1][0].clone());
    if !grid.is_zero(&sum).unwrap_or(false) {
        return Err(OleinikError::NotApplicable("roots are not opposite".into()));
    }
    let da = a.d_dt().map_err(SymbolError::from)?;
    let c01 = spec.lower(0, &[1]);

    let t_grid = geomspace(OLEINIK_T_MIN, spec.horizon, OLEINIK_T_POINTS);
    let x_grid = periodic_nodes(9);
    // (t, x, t d^2, a11, d_t a11)
    let mut samples = Vec::with_capacity(t_grid.len() * x_grid.len());
    for &t in &t_grid {
        for &x in &x_grid {
            let b = Bindings::with_params(t, vec![x], spec.params.clone());
            let real = |e: &Expr, what: &str| -> Result<f64, OleinikError> {
                let v = e.eval(&b).map_err(|source| OleinikError::Eval { t, x, source })?;
                if v.im.abs() > 1e-10 * (1.0 + v.re.abs()) {
                    return Err(OleinikError::NonReal { what: what.into(), t, x });
                }
                Ok(v.re)
            };
            let d = real(&Expr::mul(Expr::minus_i(), c01.clone()), "-i*c01")?;
            let av = real(&a, "a")?;
            let dav = real(&da, "d_t a")?;
            samples.push((t, x, t * d * d, av * av, 2.0 * av * dav));
        }
    }

    let exponents: Vec<f64> = (-6..=12).map(|k| k as f64 * 0.5).collect();
    let mut pairs: Vec<(f64, f64)> = exponents
        .iter()
        .flat_map(|&gc| exponents.iter().map(move |&ga| (gc, ga)))
        .collect();
    pairs.sort_by(|p, q| {
        let key = |(c, a): &(f64, f64)| (c.abs() + a.abs(), *c, *a);
        key(p).partial_cmp(&key(q)).expect("finite exponents")
    });
    let holds = |c: f64, a: f64, s: &(f64, f64, f64, f64, f64)| {
        let rhs = c * (a * s.3 - s.4);
        s.2 <= rhs + 1e-12 * (1.0 + rhs.abs())
    };
    let found = pairs.iter().find(|&&(gc, ga)| {
        let (c, a) = (10f64.powf(gc), 10f64.powf(ga));
        samples.iter().all(|s| holds(c, a, s))
    });

    let worst_violation = if found.is_none() {
        let g = exponents.last().copied().unwrap_or(0.0);
        let constants = OleinikConstants {
            c: 10f64.powf(g),
            a: 10f64.powf(g),
        };
        samples
            .iter()
            .map(|s| {
                let rhs = constants.c * (constants.a * s.3 - s.4);
                (s.2 - rhs, s, rhs)
            })
            .max_by(|p, q| p.0.total_cmp(&q.0))
            .map(|(_, s, rhs)| OleinikSample {
                t: s.0,
                x: s.1,
                constants,
                lhs: s.2,
                rhs,
            })
    } else {
        None
    };
    Ok(OleinikReport {
        feasible: found.is_some(),
        constants: found.map(|&(gc, ga)| OleinikConstants {
            c: 10f64.powf(gc),
            a: 10f64.powf(ga),
        }),
        worst_violation,
        t_grid,
        x_grid,
        exponents,
    })
}
