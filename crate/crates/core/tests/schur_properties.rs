use std::collections::BTreeMap;
use std::sync::Arc;

use levichk_core::expr::{parse, Bindings};
use levichk_core::oracle::{closed_form_t, enum_homogeneous};
use levichk_core::order::{terms_match, OrderGrid};
use levichk_core::reduction::principal_from_roots;
use levichk_core::schur::{inf_norm, verify_schur, SchurData};
use levichk_core::sampling::PhasePoint;
use levichk_core::symbol::SymbolPoly;
use levichk_core::{Expr, SymbolMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

const ROOT_COEFFS: [&str; 8] = ["1", "-1", "t", "2 - t", "t^2", "cos(t)", "-2*t", "0.5"];

fn roots(m: std::ops::Range<usize>, dim: usize) -> impl Strategy<Value = Vec<SymbolPoly>> {
    prop::collection::vec(prop::collection::vec(0..ROOT_COEFFS.len(), dim), m).prop_map(|rows| {
        rows.into_iter()
            .map(|r| SymbolPoly::linear_form(&r.iter().map(|&c| parse(ROOT_COEFFS[c]).unwrap()).collect::<Vec<_>>()))
            .collect()
    })
}

fn companion(roots: &[SymbolPoly]) -> SymbolMatrix {
    let m = roots.len();
    let dim = roots[0].dim();
    let p = principal_from_roots(roots, dim).unwrap();
    let mut a = SymbolMatrix::zeros(m, dim);
    for i in 0..m - 1 {
        a.set(i, i + 1, SymbolPoly::bracket(dim));
    }
    for j in 1..=m {
        a.set(m - 1, j - 1, p[m - j].shift_weight((m - j) as i32).unwrap());
    }
    a
}

fn phase(dim: usize) -> impl Strategy<Value = PhasePoint> {
    (0.0f64..1.0, prop::collection::vec(-50.0f64..50.0, dim)).prop_map(move |(t, xi)| PhasePoint {
        t,
        x: vec![0.0; dim],
        xi,
    })
}

fn grid(dim: usize) -> OrderGrid {
    OrderGrid::new(dim, 1.0, Arc::new(BTreeMap::new()))
}

fn roots_and_points() -> impl Strategy<Value = (Vec<SymbolPoly>, Vec<PhasePoint>)> {
    (1usize..3).prop_flat_map(|d| (roots(2..7, d), prop::collection::vec(phase(d), 10)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn schur_identity((rs, pts) in roots_and_points()) {
        let s = SchurData::new(&rs).unwrap();
        let r = verify_schur(&companion(&rs), &s, &pts, &Arc::new(BTreeMap::new())).unwrap();
        prop_assert!(r <= 1e-9, "{r}");
    }

    #[test]
    fn t_times_tinv_is_identity((rs, pts) in roots_and_points()) {
        let s = SchurData::new(&rs).unwrap();
        let m = rs.len();
        for p in &pts {
            let b = Bindings::new(p.t, p.x.clone());
            let t = s.t.eval(&b, &p.xi).unwrap();
            let ti = s.tinv.eval(&b, &p.xi).unwrap();
            let id = DMatrix::<Complex64>::identity(m, m);
            prop_assert!(inf_norm(&(&t * &ti - &id)) <= 1e-10 * (1.0 + inf_norm(&t) * inf_norm(&ti)));
            prop_assert!(inf_norm(&(&ti * &t - &id)) <= 1e-10 * (1.0 + inf_norm(&t) * inf_norm(&ti)));
        }
    }

    #[test]
    fn omega_matches_enumeration(rs in roots(2..7, 1)) {
        let s = SchurData::new(&rs).unwrap();
        let g = grid(1);
        for j in 1..=rs.len() {
            for k in 1..=j {
                let e = enum_homogeneous(j - k, k, &rs).unwrap();
                prop_assert!(terms_match(&e, s.omega(j, k), &g).unwrap(), "omega({j},{k})");
            }
        }
    }

    #[test]
    fn entries_have_order_at_most_zero(rs in roots(2..6, 2)) {
        let s = SchurData::new(&rs).unwrap();
        for e in s.t.rows().flatten().chain(s.tinv.rows().flatten()) {
            prop_assert!(e.nominal_order().unwrap_or(0) <= 0);
        }
    }

    #[test]
    fn companion_spectrum_is_the_roots(rs in roots(2..6, 1), t in 0.0f64..1.0, xi in 1.0f64..30.0) {
        let b = Bindings::new(t, vec![0.0]);
        let mut want: Vec<f64> = rs.iter().map(|r| r.eval(&b, &[xi]).unwrap().re).collect();
        want.sort_by(f64::total_cmp);
        // Multiple roots make eigenvalues ill-conditioned; compare only well-separated spectra.
        prop_assume!(want.windows(2).all(|w| w[1] - w[0] > 1e-2 * xi));
        let a = companion(&rs).eval(&b, &[xi]).unwrap();
        let mut got: Vec<Complex64> = a.schur().eigenvalues().unwrap().iter().copied().collect();
        got.sort_by(|p, q| p.re.total_cmp(&q.re));
        let scale = 1.0 + (1.0 + xi * xi).sqrt();
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - Complex64::new(*w, 0.0)).norm() <= 1e-6 * scale, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn recurrence_identity(rs in roots(3..6, 1), t in 0.0f64..1.0, xi in -20.0f64..20.0) {
        // h_r(l_1..l_k) = h_r(l_1..l_{k-1}) + l_k h_{r-1}(l_1..l_k), all weighted by <xi>^-r.
        let b = Bindings::new(t, vec![0.0]);
        let bracket = (1.0 + xi * xi).sqrt();
        for k in 2..=rs.len() {
            for r in 1..=3 {
                let lhs = enum_homogeneous(r, k, &rs).unwrap().eval(&b, &[xi]).unwrap();
                let head = enum_homogeneous(r, k - 1, &rs).unwrap().eval(&b, &[xi]).unwrap();
                let tail = enum_homogeneous(r - 1, k, &rs).unwrap().eval(&b, &[xi]).unwrap();
                let lk = rs[k - 1].eval(&b, &[xi]).unwrap() / bracket;
                prop_assert!((lhs - head - lk * tail).norm() <= 1e-10 * (1.0 + lhs.norm()));
            }
        }
    }
}

#[test]
fn closed_forms_match_construction() {
    let lam = |c: &str| SymbolPoly::linear_form(&[parse(c).unwrap()]);
    let all = [lam("t"), lam("2 - t"), lam("cos(t)"), lam("t^2")];
    let g = grid(1);
    for m in 2..=4 {
        let rs = &all[..m];
        let s = SchurData::new(rs).unwrap();
        let (t, ti) = closed_form_t(rs).unwrap();
        for i in 0..m {
            for j in 0..m {
                assert!(terms_match(t.get(i, j), s.t.get(i, j), &g).unwrap(), "T[{i},{j}] m={m}");
                assert!(terms_match(ti.get(i, j), s.tinv.get(i, j), &g).unwrap(), "Tinv[{i},{j}] m={m}");
            }
        }
    }
    // m = 2: Tinv[2,1] = -lambda_1 <xi>^-1.
    let (_, ti) = closed_form_t(&all[..2]).unwrap();
    let want = SymbolPoly::monomial(1, Expr::neg(Expr::Time), vec![1], 1);
    assert!(terms_match(ti.get(1, 0), &want, &g).unwrap());
}
