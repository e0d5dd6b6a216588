//! Periodic pseudo-spectral solver for the first-order system, used as an empirical probe.

mod grid;
mod operator;
mod solver;
mod sweep;

use thiserror::Error;

pub use grid::{wavenumber, TorusGrid};
pub use operator::{apply_symbol, ApplyContext, CompiledMatrix, CompiledSymbol};
pub use solver::{
    initial_state, recover_u, root_speed, solve, zero_state, DtPolicy, Integrator, RunResult, SolveOptions, State,
};
pub use sweep::{fit_exponent, frequency_sweep, single_mode_state, SweepResult, SweepRow};

use crate::expr::EvalError;
use crate::reduction::ReductionError;
use crate::scalar::Real;
use crate::schur::SchurError;
use crate::symbol::SymbolError;

/// Scalars the FFT accepts.
pub trait SpectralReal: Real + rustfft::FftNum {}

impl<T: Real + rustfft::FftNum> SpectralReal for T {}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SpectralError {
    #[error("spectral grids support dimension 1 or 2, got {0}")]
    Dimension(usize),
    #[error("modes per axis must be a power of two >= 2, got {0}")]
    Modes(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Schur(#[from] SchurError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("{0}")]
    Config(String),
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::sync::Arc;

    use num_complex::Complex64;

    use super::*;
    use crate::expr::parse;
    use crate::symbol::SymbolPoly;

    fn mode(grid: &TorusGrid<f64>, k: &[i64]) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); grid.len()];
        v[grid.index_of(k).unwrap()] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn single_mode_multipliers() {
        let grid = TorusGrid::<f64>::new(1, 64).unwrap();
        let p = Arc::new(BTreeMap::new());
        let out = apply_symbol(&SymbolPoly::bracket(1), &mode(&grid, &[1]), &grid, 0.0, &p).unwrap();
        assert!((out[1] - Complex64::new(2f64.sqrt(), 0.0)).norm() < 1e-12);
        let out = apply_symbol(&SymbolPoly::xi(1, 0), &mode(&grid, &[3]), &grid, 0.0, &p).unwrap();
        assert!((out[3] - Complex64::new(3.0, 0.0)).norm() < 1e-12);
        assert!(out.iter().enumerate().all(|(i, v)| i == 3 || v.norm() < 1e-14));
        let c = SymbolPoly::constant(1, parse("2.5 - i").unwrap());
        let out = apply_symbol(&c, &mode(&grid, &[-5]), &grid, 0.0, &p).unwrap();
        assert!((out[grid.index_of(&[-5]).unwrap()] - Complex64::new(2.5, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn x_dependent_coefficient_shifts_modes() {
        // cos(x1) e^{2ix} = (e^{3ix} + e^{ix}) / 2
        let grid = TorusGrid::<f64>::new(1, 32).unwrap();
        let c = SymbolPoly::constant(1, parse("cos(x1)").unwrap());
        let out = apply_symbol(&c, &mode(&grid, &[2]), &grid, 0.0, &Arc::new(BTreeMap::new())).unwrap();
        assert!((out[3].re - 0.5).abs() < 1e-12 && (out[1].re - 0.5).abs() < 1e-12);
        assert!(out[2].norm() < 1e-12);
    }

    #[test]
    fn sobolev_of_single_mode() {
        let grid = TorusGrid::<f64>::new(1, 64).unwrap();
        let v = mode(&grid, &[7]);
        let s = 1.5;
        assert!((grid.sobolev_norm(&v, s) - (1.0f64 + 49.0).powf(s / 2.0)).abs() < 1e-10);
    }

    #[test]
    fn transforms_round_trip_2d() {
        let grid = TorusGrid::<f64>::new(2, 16).unwrap();
        let phys: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|x| Complex64::new((x[0] + 2.0 * x[1]).sin(), (3.0 * x[0]).cos()))
            .collect();
        let hat = grid.forward(&phys);
        let back = grid.inverse(&hat);
        let err = phys.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        // sin(x1 + 2 x2) = (e^{i(x1+2x2)} - e^{-i(x1+2x2)}) / 2i
        let k = grid.index_of(&[1, 2]).unwrap();
        assert!((hat[k] - Complex64::new(0.0, -0.5)).norm() < 1e-12);
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert_eq!(TorusGrid::<f64>::new(3, 16).unwrap_err(), SpectralError::Dimension(3));
        assert_eq!(TorusGrid::<f64>::new(1, 12).unwrap_err(), SpectralError::Modes(12));
    }

    fn spec(roots: &str, lower: &str, data: &str, horizon: f64) -> crate::problem::ProblemSpec {
        let text = format!(
            r#"{{"order": 2, "dim": 1, "horizon": {horizon}, "roots": {roots},
                "lower_order": {lower}, "data": {data}}}"#
        );
        crate::problem::ProblemFile::from_json(&text).unwrap().into_spec().unwrap()
    }

    fn fixed(dt: f64) -> SolveOptions {
        SolveOptions {
            sobolev_s: 0.0,
            dt: DtPolicy::Fixed(dt),
            cadence: 100,
            dealias: false,
        }
    }

    fn dalembert_error(dt: f64) -> f64 {
        let sp = spec(r#"[["1"], ["-1"]]"#, "[]", r#"["exp(i*x1)", "0"]"#, 1.0);
        let grid = TorusGrid::<f64>::new(1, 64).unwrap();
        let res = solve(&sp, &grid, &fixed(dt)).unwrap();
        let u = recover_u(&res.final_state, &grid);
        u.iter()
            .enumerate()
            .map(|(i, v)| {
                let exact = if i == 1 { 1f64.cos() } else { 0.0 };
                (v - Complex64::new(exact, 0.0)).norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn dalembert_single_mode() {
        let e1 = dalembert_error(1e-3);
        assert!(e1 < 1e-8, "{e1}");
        let (ea, eb) = (dalembert_error(0.1), dalembert_error(0.05));
        let ratio = ea / eb;
        assert!((ratio - 16.0).abs() <= 3.2, "{ratio}");
    }

    #[test]
    fn plane_wave_factor() {
        // (D_t - D_x)(D_t - 2 D_x) u = 0 is solved by e^{i(x+t)}.
        let sp = spec(r#"[["1"], ["2"]]"#, "[]", r#"["exp(i*x1)", "exp(i*x1)"]"#, 1.0);
        let grid = TorusGrid::<f64>::new(1, 32).unwrap();
        let res = solve(&sp, &grid, &fixed(1e-3)).unwrap();
        let u = recover_u(&res.final_state, &grid);
        let exact = Complex64::new(0.0, 1.0).exp();
        assert!((u[1] - exact).norm() < 1e-8);
        assert!(u.iter().enumerate().all(|(i, v)| i == 1 || v.norm() < 1e-12));
    }

    #[test]
    fn strictly_hyperbolic_sweep_is_flat() {
        let sp = spec(r#"[["1"], ["-1"]]"#, "[]", r#"["0", "0"]"#, 1.0);
        let opts = SolveOptions {
            sobolev_s: 0.0,
            dt: DtPolicy::Cfl(0.5),
            cadence: 1,
            dealias: false,
        };
        let res = frequency_sweep::<f64>(&sp, &[16, 32, 64], 0.25, &opts).unwrap();
        assert!(res.rows.iter().all(|r| r.rho <= 1.0 + 1e-6), "{res:?}");
        assert!(res.fitted_q.abs() < 1e-3);
    }

    #[test]
    fn fit_exponent_recovers_power() {
        let pts: Vec<(f64, f64)> = [16.0, 32.0, 64.0].iter().map(|&n: &f64| (n, 3.0 * n.powf(0.7))).collect();
        assert!((fit_exponent(&pts) - 0.7).abs() < 1e-12);
        assert_eq!(fit_exponent(&[(1.0, 1.0), (2.0, f64::INFINITY)]), f64::INFINITY);
    }
}
