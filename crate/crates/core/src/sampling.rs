//! Deterministic sample grids and seeded randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// `n` equispaced points on `[a, b]`, endpoints included.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `n` geometrically spaced points from `lo` to `hi` (both > 0), endpoints included.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (l, h) = (lo.ln(), hi.ln());
    linspace(l, h, n).into_iter().map(f64::exp).collect()
}

/// `n` periodic nodes `2 pi j / n` on `[0, 2 pi)`.
pub fn periodic_nodes(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| std::f64::consts::TAU * j as f64 / n as f64)
        .collect()
}

/// Cartesian product of `axis` with itself `dim` times; the last axis varies fastest.
pub fn tensor_points(axis: &[f64], dim: usize) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::with_capacity(dim)];
    for _ in 0..dim {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A point `(t, x, xi)` in phase space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        let g = geomspace(1e-6, 1.0, 7);
        assert!((g[0] - 1e-6).abs() < 1e-18 && (g[6] - 1.0).abs() < 1e-12);
        assert!((g[1] / g[0] - 10.0).abs() < 1e-9);
        assert_eq!(periodic_nodes(4)[2], std::f64::consts::PI);
        let pts = tensor_points(&[0.0, 1.0], 2);
        assert_eq!(pts, vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
        assert_eq!(tensor_points(&[0.0, 1.0], 0), vec![Vec::<f64>::new()]);
    }
}
