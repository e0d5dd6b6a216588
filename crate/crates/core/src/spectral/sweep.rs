//! Frequency sweep: growth of the anisotropic norm for data concentrated at mode `N * fraction`.

use serde::{Deserialize, Serialize};

use super::solver::{Integrator, SolveOptions, State};
use super::{SpectralError, SpectralReal, TorusGrid};
use crate::problem::ProblemSpec;
use crate::scalar::czero;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    /// The excited mode on axis 1.
    pub mode: i64,
    /// `sup_t aniso(t) / aniso(0)`; infinite after a blowup.
    pub rho: f64,
    pub blowup: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `log rho` against `log N`; infinite if any run blew up.
    pub fitted_q: f64,
}

/// `g_1 = e^{i K x_1}`, other data zero: `U_1 = <K>^{m-1} e^{i K x_1}`.
pub fn single_mode_state<T: SpectralReal>(m: usize, k: i64, grid: &TorusGrid<T>) -> Option<State<T>> {
    let mut lattice = vec![0; grid.dim()];
    lattice[0] = k;
    let idx = grid.index_of(&lattice)?;
    let mut u = vec![vec![czero(); grid.len()]; m];
    u[0][idx] = num_complex::Complex::new(grid.brackets()[idx].powi(m as i32 - 1), T::zero());
    Some(u)
}

/// Slope of the least-squares line through `(log x, log y)`.
pub fn fit_exponent(points: &[(f64, f64)]) -> f64 {
    if points.iter().any(|p| !p.1.is_finite()) {
        return f64::INFINITY;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// One run per `N`, in parallel; runs share only immutable inputs.
pub fn frequency_sweep<T: SpectralReal>(
    spec: &ProblemSpec,
    n_list: &[usize],
    mode_fraction: f64,
    opts: &SolveOptions,
) -> Result<SweepResult, SpectralError> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SpectralError::Config("n_list must be non-empty and increasing".into()));
    }
    let run = |n: usize| -> Result<SweepRow, SpectralError> {
        let grid = TorusGrid::<T>::new(spec.dim, n)?;
        let k = (n as f64 * mode_fraction).round() as i64;
        let u0 = single_mode_state(spec.order, k, &grid)
            .ok_or_else(|| SpectralError::Config(format!("mode {k} is not resolved with N = {n}")))?;
        let result = Integrator::new(spec, grid, opts.dealias)?.run(u0, opts)?;
        Ok(SweepRow {
            n,
            mode: k,
            rho: result.growth(),
            blowup: result.blowup.map(|t| t.to_f64_lossy()),
        })
    };
    let rows = std::thread::scope(|scope| {
        let handles: Vec<_> = n_list.iter().map(|&n| scope.spawn(move || run(n))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let fitted_q = fit_exponent(&rows.iter().map(|r| (r.n as f64, r.rho)).collect::<Vec<_>>());
    Ok(SweepResult { rows, fitted_q })
}
