use super::{CMatrix, C64};
use crate::{Error, Result};
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Equally spaced nodes `theta_j = 2 pi j / n` on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicGrid {
    n: usize,
}

impl PeriodicGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("grid needs at least one node".into()));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn theta(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.theta(j)).collect()
    }

    /// Evaluates `f` at every node, in node order.
    pub fn sample<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(f64) -> T + Sync,
    {
        self.nodes().into_par_iter().map(&f).collect()
    }

    pub fn try_sample<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(f64) -> Result<T> + Sync,
    {
        self.nodes().into_par_iter().map(&f).collect()
    }

    /// Trapezoid rule for `(1/2pi) int f`.
    pub fn integrate<F>(&self, f: F) -> Result<CMatrix>
    where
        F: Fn(f64) -> Result<CMatrix> + Sync,
    {
        let samples = self.try_sample(f)?;
        Ok(self.fourier_coefficient(&samples, 0))
    }

    /// `(1/n) sum_j e^{-i m theta_j} samples_j`.
    pub fn fourier_coefficient(&self, samples: &[CMatrix], m: i64) -> CMatrix {
        assert_eq!(samples.len(), self.n);
        let (r, c) = samples[0].shape();
        let mut acc = CMatrix::zeros(r, c);
        for (j, s) in samples.iter().enumerate() {
            let phase = C64::from_polar(1.0, -(m as f64) * self.theta(j));
            acc += s * phase;
        }
        acc / C64::new(self.n as f64, 0.0)
    }

    pub fn mean(&self, samples: &[f64]) -> f64 {
        samples.iter().sum::<f64>() / self.n as f64
    }
}

/// Outcome of [`integrate_adaptive`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveIntegral {
    pub value: Vec<f64>,
    pub nodes: usize,
    pub converged: bool,
    pub change: f64,
}

/// Trapezoid rule for `(1/2pi) int f` on nested grids, doubling from `n0`
/// until consecutive estimates differ by at most `tol` or `n_max` is reached.
pub fn integrate_adaptive<F>(f: F, n0: usize, tol: f64, n_max: usize) -> Result<AdaptiveIntegral>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    let grid = PeriodicGrid::new(n0)?;
    let sum_all = |thetas: Vec<f64>| -> Result<Vec<f64>> {
        let vals: Vec<Vec<f64>> = thetas.into_par_iter().map(&f).collect::<Result<_>>()?;
        let mut acc = vec![0.0; vals.first().map_or(0, Vec::len)];
        for v in &vals {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x;
            }
        }
        Ok(acc)
    };
    let mut n = n0;
    let mut total = sum_all(grid.nodes())?;
    let mut value: Vec<f64> = total.iter().map(|s| s / n as f64).collect();
    let mut change = f64::INFINITY;
    while 2 * n <= n_max {
        let fresh: Vec<f64> = (0..n).map(|j| TAU * (2 * j + 1) as f64 / (2 * n) as f64).collect();
        let extra = sum_all(fresh)?;
        for (t, e) in total.iter_mut().zip(&extra) {
            *t += e;
        }
        n *= 2;
        let next: Vec<f64> = total.iter().map(|s| s / n as f64).collect();
        change = next.iter().zip(&value).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        value = next;
        if change <= tol {
            return Ok(AdaptiveIntegral { value, nodes: n, converged: true, change });
        }
    }
    Ok(AdaptiveIntegral { value, nodes: n, converged: change <= tol, change })
}
