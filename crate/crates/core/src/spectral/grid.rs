use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{SpectralError, SpectralReal};
use crate::expr::{convert_params, Bindings, EvalError, Expr};
use crate::scalar::{czero, japanese_bracket};

/// Periodic grid on `[0, 2 pi)^n`, `n <= 2`, with `N` nodes per axis.
///
/// Fields are stored flat, axis 1 slowest. Fourier coefficients are normalized as
/// `v_hat = DFT(v) / N^n`, so `e^{i k.x}` has the single coefficient `1` and
/// `sum |v_hat|^2` is the mean square of `v`.
#[derive(Clone)]
pub struct TorusGrid<T: SpectralReal> {
    dim: usize,
    n: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    nodes: Vec<Vec<T>>,
    freqs: Vec<Vec<T>>,
    brackets: Vec<T>,
}

impl<T: SpectralReal> std::fmt::Debug for TorusGrid<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TorusGrid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .finish()
    }
}

impl<T: SpectralReal> TorusGrid<T> {
    pub fn new(dim: usize, n: usize) -> Result<Self, SpectralError> {
        if !(1..=2).contains(&dim) {
            return Err(SpectralError::Dimension(dim));
        }
        if !n.is_power_of_two() || n < 2 {
            return Err(SpectralError::Modes(n));
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let len = n.pow(dim as u32);
        let mut nodes = Vec::with_capacity(len);
        let mut freqs = Vec::with_capacity(len);
        for flat in 0..len {
            let idx = Self::split(flat, n, dim);
            nodes.push(
                idx.iter()
                    .map(|&j| T::lit(std::f64::consts::TAU * j as f64 / n as f64))
                    .collect(),
            );
            freqs.push(idx.iter().map(|&j| T::lit(wavenumber(j, n) as f64)).collect::<Vec<T>>());
        }
        let brackets = freqs.iter().map(|k| japanese_bracket(k)).collect();
        Ok(Self {
            dim,
            n,
            fwd,
            inv,
            nodes,
            freqs,
            brackets,
        })
    }

    fn split(flat: usize, n: usize, dim: usize) -> Vec<usize> {
        let mut idx = vec![0; dim];
        let mut rest = flat;
        for a in (0..dim).rev() {
            idx[a] = rest % n;
            rest /= n;
        }
        idx
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec<T>] {
        &self.nodes
    }

    /// Frequency vector of each flat index.
    pub fn freqs(&self) -> &[Vec<T>] {
        &self.freqs
    }

    /// `<k>` of each flat index.
    pub fn brackets(&self) -> &[T] {
        &self.brackets
    }

    /// Flat index of the lattice point `k`, each entry in `-N/2..N/2`.
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let half = (self.n / 2) as i64;
        let mut flat = 0;
        for &kj in k {
            if !(-half..half).contains(&kj) {
                return None;
            }
            flat = flat * self.n + kj.rem_euclid(self.n as i64) as usize;
        }
        Some(flat)
    }

    /// Modes kept by the 2/3 rule: `|k_j| <= N/3` on every axis.
    pub fn dealias_mask(&self) -> Vec<bool> {
        let cut = T::lit(self.n as f64 / 3.0);
        self.freqs
            .iter()
            .map(|k| k.iter().all(|&v| v.abs() <= cut))
            .collect()
    }

    fn transform(&self, data: &mut [Complex<T>], plan: &Arc<dyn Fft<T>>) {
        let n = self.n;
        plan.process(data);
        if self.dim == 2 {
            let mut col = vec![czero(); n];
            for j in 0..n {
                for i in 0..n {
                    col[i] = data[i * n + j];
                }
                plan.process(&mut col);
                for i in 0..n {
                    data[i * n + j] = col[i];
                }
            }
        }
    }

    /// Physical values to normalized coefficients.
    pub fn forward(&self, phys: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = phys.to_vec();
        self.transform(&mut out, &self.fwd);
        let scale = T::one() / T::lit(self.len() as f64);
        for v in &mut out {
            *v = *v * scale;
        }
        out
    }

    /// Normalized coefficients to physical values.
    pub fn inverse(&self, hat: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = hat.to_vec();
        self.transform(&mut out, &self.inv);
        out
    }

    /// `e` on the nodes at time `t`.
    pub fn sample(
        &self,
        e: &Expr,
        t: T,
        params: &Arc<BTreeMap<String, T>>,
    ) -> Result<Vec<Complex<T>>, EvalError> {
        if !e.depends_on_x() {
            let v = e.eval(&Bindings::with_params(t, vec![T::zero(); self.dim], params.clone()))?;
            return Ok(vec![v; self.len()]);
        }
        let mut b = Bindings::with_params(t, vec![T::zero(); self.dim], params.clone());
        self.nodes
            .iter()
            .map(|x| {
                b.x.clone_from(x);
                e.eval(&b)
            })
            .collect()
    }

    /// Coefficients of `e` at time `t` with `f64` parameters.
    pub fn sample_hat(&self, e: &Expr, t: T, params: &BTreeMap<String, f64>) -> Result<Vec<Complex<T>>, EvalError> {
        Ok(self.forward(&self.sample(e, t, &convert_params(params))?))
    }

    /// `(sum <k>^{2s} |v_hat_k|^2)^{1/2}`.
    pub fn sobolev_norm(&self, hat: &[Complex<T>], s: T) -> T {
        self.brackets
            .iter()
            .zip(hat)
            .fold(T::zero(), |acc, (&b, v)| acc + b.powf(s + s) * v.norm_sqr())
            .sqrt()
    }
}

/// Signed wavenumber of DFT index `j` on `N` points.
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}
