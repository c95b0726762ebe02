use super::eig::schur_form;
use super::{c64, max_abs, CMatrix, C64};
use crate::{Error, Result};
use nalgebra::{Dyn, DVector, LU};

/// Dimensions up to this size use the vectorized Kronecker system.
const KRONECKER_MAX_DIM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteinMethod {
    Kronecker,
    Schur,
}

#[derive(Debug, Clone)]
pub struct SteinSolution {
    pub v: CMatrix,
    pub residual: f64,
}

enum Factor {
    Kronecker(LU<C64, Dyn, Dyn>),
    Schur { q: CMatrix, t: CMatrix },
}

/// Reusable solver for `V - M V M* = X` with `rho(M) < 1`.
pub struct SteinSolver {
    m: CMatrix,
    radius: f64,
    factor: Factor,
}

impl SteinSolver {
    pub fn new(m: &CMatrix, tol_sp: f64) -> Result<Self> {
        let method = if m.nrows() <= KRONECKER_MAX_DIM { SteinMethod::Kronecker } else { SteinMethod::Schur };
        Self::with_method(m, tol_sp, method)
    }

    pub fn with_method(m: &CMatrix, tol_sp: f64, method: SteinMethod) -> Result<Self> {
        let (q, t) = schur_form(m)?;
        let radius = (0..t.nrows()).map(|i| t[(i, i)].norm()).fold(0.0, f64::max);
        if radius >= 1.0 - tol_sp {
            return Err(Error::SpectralRadiusTooLarge { radius });
        }
        let factor = match method {
            SteinMethod::Kronecker => {
                let n = m.nrows();
                let mc = m.map(|z| z.conj());
                let mut k = CMatrix::zeros(n * n, n * n);
                for q_ in 0..n {
                    for s in 0..n {
                        let a = mc[(q_, s)];
                        if a == c64(0.0, 0.0) {
                            continue;
                        }
                        for p in 0..n {
                            for r in 0..n {
                                k[(q_ * n + p, s * n + r)] = -a * m[(p, r)];
                            }
                        }
                    }
                }
                for i in 0..n * n {
                    k[(i, i)] += c64(1.0, 0.0);
                }
                Factor::Kronecker(k.lu())
            }
            SteinMethod::Schur => Factor::Schur { q, t },
        };
        Ok(Self { m: m.clone(), radius, factor })
    }

    pub fn spectral_radius(&self) -> f64 {
        self.radius
    }

    pub fn solve(&self, x: &CMatrix) -> Result<SteinSolution> {
        let n = self.m.nrows();
        if x.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "Stein right-hand side {:?} against {n}x{n}",
                x.shape()
            )));
        }
        let v = match &self.factor {
            Factor::Kronecker(lu) => {
                let b = DVector::from_column_slice(x.as_slice());
                let sol = lu.solve(&b).ok_or(Error::SpectralRadiusTooLarge { radius: self.radius })?;
                CMatrix::from_column_slice(n, n, sol.as_slice())
            }
            Factor::Schur { q, t } => {
                let xt = q.adjoint() * x * q;
                let w = triangular_stein(t, &xt);
                q * w * q.adjoint()
            }
        };
        let residual = max_abs(&(&v - &self.m * &v * self.m.adjoint() - x));
        Ok(SteinSolution { v, residual })
    }
}

/// Solves `W - T W T* = X` for upper-triangular `T`, last column first.
fn triangular_stein(t: &CMatrix, x: &CMatrix) -> CMatrix {
    let n = t.nrows();
    let mut w = CMatrix::zeros(n, n);
    let mut tw = CMatrix::zeros(n, n);
    for j in (0..n).rev() {
        let mut rhs: Vec<C64> = (0..n).map(|i| x[(i, j)]).collect();
        for l in (j + 1)..n {
            let coef = t[(j, l)].conj();
            if coef == c64(0.0, 0.0) {
                continue;
            }
            for (i, r) in rhs.iter_mut().enumerate() {
                *r += coef * tw[(i, l)];
            }
        }
        let s = t[(j, j)].conj();
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            for k in (i + 1)..n {
                acc += s * t[(i, k)] * w[(k, j)];
            }
            w[(i, j)] = acc / (c64(1.0, 0.0) - s * t[(i, i)]);
        }
        for i in 0..n {
            let mut acc = c64(0.0, 0.0);
            for k in i..n {
                acc += t[(i, k)] * w[(k, j)];
            }
            tw[(i, j)] = acc;
        }
    }
    w
}

/// One-shot solve of `V - M V M* = X`.
pub fn solve_stein(m: &CMatrix, x: &CMatrix, tol_sp: f64) -> Result<SteinSolution> {
    SteinSolver::new(m, tol_sp)?.solve(x)
}
