//! Stationary particle currents into the reservoirs.

use crate::model::{BlockUnitary, ReservoirSymbol};
use crate::numerics::{max_abs, trace_product, CMatrix, PeriodicGrid, Tolerances};
use crate::scattering::{scattering_matrix, transmission_from};
use crate::steady::Stationary;
use crate::{Error, Result};

/// Currents `J_k` (positive into reservoir `k`) with their frequency-resolved
/// integrands on a grid.
#[derive(Debug, Clone)]
pub struct CurrentReport {
    pub currents: Vec<f64>,
    pub currents_quadrature: Vec<f64>,
    pub thetas: Vec<f64>,
    /// `integrand[j][k]` is the spectral current density of reservoir `k` at node `j`.
    pub integrand: Vec<Vec<f64>>,
    pub conservation_defect: f64,
}

/// Spectral current densities `j_k(theta)` for every reservoir.
pub fn current_integrand(y: &CMatrix, res: &ReservoirSymbol, theta: f64) -> Vec<f64> {
    let n = res.n_reservoirs();
    if res.is_rank_one() {
        let c = transmission_from(y, res).matrix;
        let f: Vec<f64> = (0..n).map(|k| res.density(k, theta)).collect();
        (0..n)
            .map(|k| (0..n).filter(|&kp| kp != k).map(|kp| c[(k, kp)] * (f[kp] - f[k])).sum())
            .collect()
    } else {
        let xi = res.eval(theta);
        let p = res.projectors();
        let a = |k: usize, kp: usize| trace_product(&(y.adjoint() * &p[k] * y), &(&p[kp] * &xi)).re;
        (0..n)
            .map(|k| (0..n).filter(|&kp| kp != k).map(|kp| a(k, kp) - a(kp, k)).sum())
            .collect()
    }
}

pub fn currents(z: &BlockUnitary, res: &ReservoirSymbol, grid: &PeriodicGrid, tol: &Tolerances) -> Result<CurrentReport> {
    let st = Stationary::new(z, res, tol)?;
    currents_with(&st, grid, tol)
}

pub fn currents_with(st: &Stationary, grid: &PeriodicGrid, tol: &Tolerances) -> Result<CurrentReport> {
    let (z, res) = (st.model(), st.symbol());
    let out0 = st.outgoing_block(0)?;
    let diff = out0 - res.block(0);
    let currents: Vec<f64> = res.projectors().iter().map(|p| trace_product(p, &diff).re).collect();
    let thetas = grid.nodes();
    let integrand = grid.try_sample(|t| Ok(current_integrand(&scattering_matrix(z, t, tol)?, res, t)))?;
    let n = res.n_reservoirs();
    let currents_quadrature = (0..n)
        .map(|k| integrand.iter().map(|row| row[k]).sum::<f64>() / grid.len() as f64)
        .collect();
    let conservation_defect = currents.iter().sum::<f64>().abs();
    Ok(CurrentReport { currents, currents_quadrature, thetas, integrand, conservation_defect })
}

fn check_block_diagonal(res: &ReservoirSymbol, x: &CMatrix, tol: &Tolerances) -> Result<()> {
    if x.shape() != (res.d_b(), res.d_b()) {
        return Err(Error::DimensionMismatch(format!("observable {:?}", x.shape())));
    }
    let mut compressed = CMatrix::zeros(x.nrows(), x.ncols());
    for p in res.projectors() {
        compressed += p * x * p;
    }
    let defect = max_abs(&(x - compressed));
    if defect > tol.herm {
        return Err(Error::NotBlockDiagonal { defect });
    }
    Ok(())
}

/// Flux `tr[X int (Y Xi Y* - Xi)]` of a reservoir observable by quadrature.
pub fn flux_general(
    z: &BlockUnitary,
    res: &ReservoirSymbol,
    x: &CMatrix,
    grid: &PeriodicGrid,
    tol: &Tolerances,
) -> Result<f64> {
    check_block_diagonal(res, x, tol)?;
    let samples = grid.try_sample(|t| {
        let y = scattering_matrix(z, t, tol)?;
        let xi = res.eval(t);
        Ok(trace_product(x, &(&y * &xi * y.adjoint() - xi)).re)
    })?;
    Ok(grid.mean(&samples))
}

/// Same flux from the zeroth outgoing Fourier block, without quadrature.
pub fn flux_exact(st: &Stationary, x: &CMatrix, tol: &Tolerances) -> Result<f64> {
    check_block_diagonal(st.symbol(), x, tol)?;
    let diff = st.outgoing_block(0)? - st.symbol().block(0);
    Ok(trace_product(x, &diff).re)
}
