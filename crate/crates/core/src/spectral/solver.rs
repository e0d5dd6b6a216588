//! Classical RK4 for `d/dt U = i (A + B) U + i F` in coefficient space.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::operator::{ApplyContext, CompiledMatrix};
use super::{SpectralError, SpectralReal, TorusGrid};
use crate::expr::{convert_params, Bindings};
use crate::problem::ProblemSpec;
use crate::reduction::{build_companion, root_symbols, CompanionSystem};
use crate::sampling::linspace;
use crate::schur::SchurData;
use crate::scalar::czero;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DtPolicy {
    /// `dt = cfl / (Lambda <xi_max>)`, `Lambda = 1 + max_{t,j} sum_i |c_ij(t)|`.
    Cfl(f64),
    /// A fixed step, shortened so the last step lands on the horizon.
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub sobolev_s: f64,
    pub dt: DtPolicy,
    /// Steps between recorded norms; the initial and final states are always recorded.
    pub cadence: usize,
    pub dealias: bool,
}

impl SolveOptions {
    pub fn from_spec(spec: &ProblemSpec) -> Self {
        Self {
            sobolev_s: spec.solver.sobolev_s,
            dt: DtPolicy::Cfl(spec.solver.cfl),
            cadence: spec.solver.cadence,
            dealias: spec.solver.dealias,
        }
    }
}

/// Coefficients of `U_1..U_m`.
pub type State<T> = Vec<Vec<Complex<T>>>;

#[derive(Clone, Debug)]
pub struct RunResult<T> {
    pub times: Vec<T>,
    /// `component_norms[r][k]`: `|U_k|_{H^s}` at record `r`.
    pub component_norms: Vec<Vec<T>>,
    /// `(sum_k |V_k|^2_{H^{s+k-1}})^{1/2}` with `V = T^-1 U`.
    pub aniso: Vec<T>,
    pub final_state: State<T>,
    pub final_time: T,
    pub dt: T,
    pub steps: usize,
    /// Time of the first non-finite value, if any; the run stops there.
    pub blowup: Option<T>,
}

impl<T: SpectralReal> RunResult<T> {
    /// `sup_t aniso(t) / aniso(0)`, infinite after a blowup.
    pub fn growth(&self) -> f64 {
        if self.blowup.is_some() {
            return f64::INFINITY;
        }
        let a0 = self.aniso[0].to_f64_lossy();
        self.aniso
            .iter()
            .map(|a| a.to_f64_lossy() / a0)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `U_0 = (<D>^{m-1} g_1, ..., g_m)`.
pub fn initial_state<T: SpectralReal>(
    sys: &CompanionSystem,
    grid: &TorusGrid<T>,
    params: &BTreeMap<String, f64>,
) -> Result<State<T>, SpectralError> {
    sys.data
        .iter()
        .map(|d| {
            let hat = grid.sample_hat(&d.g, T::zero(), params)?;
            Ok(hat
                .iter()
                .zip(grid.brackets())
                .map(|(v, &b)| *v * b.powi(d.bracket_power as i32))
                .collect())
        })
        .collect()
}

/// Coefficients of `u = <D>^{-(m-1)} U_1`.
pub fn recover_u<T: SpectralReal>(state: &State<T>, grid: &TorusGrid<T>) -> Vec<Complex<T>> {
    let m = state.len() as i32;
    state[0]
        .iter()
        .zip(grid.brackets())
        .map(|(v, &b)| *v * b.powi(1 - m))
        .collect()
}

/// `1 + max_{t,j} sum_i |c_ij(t)|` over 17 times in `[0, T]`.
pub fn root_speed(spec: &ProblemSpec) -> Result<f64, SpectralError> {
    let mut speed = 0.0f64;
    for t in linspace(0.0, spec.horizon, 17) {
        let b = Bindings::with_params(t, vec![0.0; spec.dim], spec.params.clone());
        for j in 0..spec.dim {
            let mut sum = 0.0;
            for row in &spec.roots {
                sum += row[j].eval(&b)?.norm();
            }
            speed = speed.max(sum);
        }
    }
    Ok(1.0 + speed)
}

/// Everything fixed during a run.
pub struct Integrator<T: SpectralReal> {
    pub grid: TorusGrid<T>,
    generator: CompiledMatrix<T>,
    tinv: CompiledMatrix<T>,
    forcing: Option<crate::expr::Expr>,
    params: Arc<BTreeMap<String, T>>,
    dealias: Option<Vec<bool>>,
    order: usize,
    horizon: f64,
    speed: f64,
}

impl<T: SpectralReal> Integrator<T> {
    pub fn new(spec: &ProblemSpec, grid: TorusGrid<T>, dealias: bool) -> Result<Self, SpectralError> {
        if grid.dim() != spec.dim {
            return Err(SpectralError::Config(format!(
                "grid dimension {} but problem dimension {}",
                grid.dim(),
                spec.dim
            )));
        }
        let sys = build_companion(spec)?;
        let schur = SchurData::new(&root_symbols(spec))?;
        let generator = CompiledMatrix::new(&sys.a.add(&sys.b)?, &grid);
        let tinv = CompiledMatrix::new(&schur.tinv, &grid);
        let dealias = dealias.then(|| grid.dealias_mask());
        Ok(Self {
            generator,
            tinv,
            forcing: (!spec.forcing.is_zero()).then(|| spec.forcing.clone()),
            params: convert_params(&spec.params),
            dealias,
            order: spec.order,
            horizon: spec.horizon,
            speed: root_speed(spec)?,
            grid,
        })
    }

    fn ctx(&self, t: T) -> ApplyContext<'_, T> {
        ApplyContext {
            grid: &self.grid,
            t,
            params: &self.params,
            dealias: self.dealias.as_deref(),
        }
    }

    /// `i ((A + B) U + F)`.
    fn rhs(&self, t: T, u: &State<T>) -> Result<State<T>, SpectralError> {
        let mut out = self.generator.apply(u, &self.ctx(t))?;
        if let Some(f) = &self.forcing {
            let f_hat = self.grid.forward(&self.grid.sample(f, t, &self.params)?);
            for (o, v) in out[self.order - 1].iter_mut().zip(&f_hat) {
                *o = *o + *v;
            }
        }
        let i = Complex::new(T::zero(), T::one());
        for row in &mut out {
            for v in row.iter_mut() {
                *v = *v * i;
            }
        }
        Ok(out)
    }

    /// Step size and step count for `policy`.
    pub fn steps(&self, policy: DtPolicy) -> (usize, T) {
        let raw = match policy {
            DtPolicy::Cfl(cfl) => {
                let max_bracket = self
                    .grid
                    .brackets()
                    .iter()
                    .fold(0.0f64, |m, b| m.max(b.to_f64_lossy()));
                cfl / (self.speed * max_bracket)
            }
            DtPolicy::Fixed(dt) => dt,
        };
        let n = (self.horizon / raw - 1e-9).ceil().max(1.0) as usize;
        (n, T::lit(self.horizon / n as f64))
    }

    fn aniso(&self, t: T, u: &State<T>, s: T) -> Result<T, SpectralError> {
        let ctx = ApplyContext {
            dealias: None,
            ..self.ctx(t)
        };
        let v = self.tinv.apply(u, &ctx)?;
        let sq = v.iter().enumerate().fold(T::zero(), |acc, (k, vk)| {
            let nk = self.grid.sobolev_norm(vk, s + T::lit(k as f64));
            acc + nk * nk
        });
        Ok(sq.sqrt())
    }

    pub fn run(&self, u0: State<T>, opts: &SolveOptions) -> Result<RunResult<T>, SpectralError> {
        if opts.cadence == 0 {
            return Err(SpectralError::Config("cadence must be at least 1".into()));
        }
        let s = T::lit(opts.sobolev_s);
        let (steps, dt) = self.steps(opts.dt);
        let half = dt / T::lit(2.0);
        let sixth = dt / T::lit(6.0);
        let mut result = RunResult {
            times: vec![],
            component_norms: vec![],
            aniso: vec![],
            final_state: vec![],
            final_time: T::zero(),
            dt,
            steps: 0,
            blowup: None,
        };
        let record = |res: &mut RunResult<T>, t: T, u: &State<T>| -> Result<(), SpectralError> {
            res.times.push(t);
            res.component_norms
                .push(u.iter().map(|c| self.grid.sobolev_norm(c, s)).collect());
            res.aniso.push(self.aniso(t, u, s)?);
            Ok(())
        };
        let mut u = u0;
        record(&mut result, T::zero(), &u)?;
        for n in 0..steps {
            let t = T::lit(n as f64) * dt;
            let k1 = self.rhs(t, &u)?;
            let k2 = self.rhs(t + half, &axpy(&u, half, &k1))?;
            let k3 = self.rhs(t + half, &axpy(&u, half, &k2))?;
            let k4 = self.rhs(t + dt, &axpy(&u, dt, &k3))?;
            for c in 0..u.len() {
                for j in 0..u[c].len() {
                    let incr = k1[c][j] + (k2[c][j] + k3[c][j]) * T::lit(2.0) + k4[c][j];
                    u[c][j] = u[c][j] + incr * sixth;
                }
            }
            let t_next = T::lit((n + 1) as f64) * dt;
            result.steps = n + 1;
            if u.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                result.blowup = Some(t_next);
                result.final_time = t_next;
                result.final_state = u;
                return Ok(result);
            }
            if (n + 1) % opts.cadence == 0 || n + 1 == steps {
                record(&mut result, t_next, &u)?;
            }
        }
        result.final_time = T::lit(steps as f64) * dt;
        result.final_state = u;
        Ok(result)
    }
}

fn axpy<T: SpectralReal>(u: &State<T>, a: T, k: &State<T>) -> State<T> {
    u.iter()
        .zip(k)
        .map(|(uc, kc)| uc.iter().zip(kc).map(|(x, y)| *x + *y * a).collect())
        .collect()
}

/// Integrate the problem's own Cauchy data on `grid` over `[0, T]`.
pub fn solve<T: SpectralReal>(
    spec: &ProblemSpec,
    grid: &TorusGrid<T>,
    opts: &SolveOptions,
) -> Result<RunResult<T>, SpectralError> {
    let integrator = Integrator::new(spec, grid.clone(), opts.dealias)?;
    let sys = build_companion(spec)?;
    let u0 = initial_state(&sys, grid, &spec.params)?;
    integrator.run(u0, opts)
}

/// Zero state of `m` fields.
pub fn zero_state<T: SpectralReal>(m: usize, grid: &TorusGrid<T>) -> State<T> {
    vec![vec![czero(); grid.len()]; m]
}
