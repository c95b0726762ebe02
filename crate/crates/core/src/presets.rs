//! Coined spin-1/2 walk on an `n`-cycle with a left and a right reservoir.

use crate::model::{CouplingSpec, Density, ReservoirSymbol};
use crate::numerics::{c64, clusters, general_eig, CMatrix, Tolerances, C64};
use crate::perturbation::principal_angle;
use crate::{Error, Result};
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, PartialEq)]
pub struct CycleModelParams {
    pub n: usize,
    pub phi: f64,
    pub beta: f64,
    pub alpha: f64,
    pub f_left: Density,
    pub f_right: Density,
    /// Global phase `e^{i gamma}` multiplying the walk.
    pub gamma: f64,
}

impl CycleModelParams {
    pub fn new(n: usize, phi: f64, beta: f64, alpha: f64, f_left: Density, f_right: Density) -> Self {
        Self { n, phi, beta, alpha, f_left, f_right, gamma: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || !self.n.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("cycle length {} must be even and positive", self.n)));
        }
        for (name, v) in [("phi", self.phi), ("beta", self.beta)] {
            if !(v > 0.0 && v < FRAC_PI_2) {
                return Err(Error::InvalidArgument(format!("{name} = {v} outside (0, pi/2)")));
            }
        }
        Ok(())
    }
}

/// Index of `x_nu (x) e_tau`; `e_{+1}` comes first.
pub fn cycle_index(n: usize, nu: i64, tau: i8) -> usize {
    2 * nu.rem_euclid(n as i64) as usize + usize::from(tau < 0)
}

pub fn coin(phi: f64, beta: f64) -> CMatrix {
    let (s, c) = phi.sin_cos();
    CMatrix::from_row_slice(
        2,
        2,
        &[C64::from_polar(c, beta), c64(s, 0.0), c64(-s, 0.0), C64::from_polar(c, -beta)],
    )
}

/// `W = e^{i gamma} W_1 W_2` with the spin-dependent shift `W_1` and the uniform coin `W_2`.
pub fn cycle_walk(n: usize, phi: f64, beta: f64, gamma: f64) -> CMatrix {
    let d = 2 * n;
    let mut shift = CMatrix::zeros(d, d);
    let mut coins = CMatrix::zeros(d, d);
    let c = coin(phi, beta);
    for nu in 0..n as i64 {
        for tau in [1i8, -1] {
            shift[(cycle_index(n, nu + tau as i64, tau), cycle_index(n, nu, tau))] = c64(1.0, 0.0);
        }
        let o = cycle_index(n, nu, 1);
        coins.view_mut((o, o), (2, 2)).copy_from(&c);
    }
    shift * coins * C64::from_polar(1.0, gamma)
}

pub fn build_cycle_model(p: &CycleModelParams, tol: &Tolerances) -> Result<(CouplingSpec, ReservoirSymbol)> {
    p.validate()?;
    let w = cycle_walk(p.n, p.phi, p.beta, p.gamma);
    let mut a = CMatrix::zeros(2 * p.n, 2);
    a[(cycle_index(p.n, 0, 1), 0)] = c64(1.0, 0.0);
    a[(cycle_index(p.n, p.n as i64 / 2, 1), 1)] = c64(1.0, 0.0);
    let spec = CouplingSpec::new(w, a, p.alpha, tol)?;
    let res = ReservoirSymbol::standard(&[p.f_left.clone(), p.f_right.clone()], tol)?;
    Ok((spec, res))
}

/// Per-eigenvalue comparison of the closed-form weight with the eigenvector overlaps.
#[derive(Debug, Clone)]
pub struct CycleChannel {
    pub lambda: C64,
    pub theta: f64,
    pub closed_form_weight: f64,
    pub overlap_left: f64,
    pub overlap_right: f64,
    pub circuit_weight: f64,
}

pub fn cycle_channels(p: &CycleModelParams, tol: &Tolerances) -> Result<Vec<CycleChannel>> {
    p.validate()?;
    let w = cycle_walk(p.n, p.phi, p.beta, p.gamma);
    let eig = general_eig(&w, tol.cluster)?;
    if eig.simple.iter().any(|s| !s) || clusters(&eig.values, tol.cluster).iter().any(|g| g.len() > 1) {
        return Err(Error::NotSimple("cycle walk"));
    }
    let left = cycle_index(p.n, 0, 1);
    let right = cycle_index(p.n, p.n as i64 / 2, 1);
    Ok(eig
        .values
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let v = eig.right.column(i);
            let norm2 = v.norm_squared();
            let gl = v[left].norm_sqr() / norm2;
            let gr = v[right].norm_sqr() / norm2;
            let s2 = (2.0 * p.phi).sin().powi(2);
            let quoted = s2 * (c64(p.phi.sin() - 1.0, 0.0) + lambda * lambda).norm_sqr() / 4.0;
            CycleChannel {
                lambda,
                theta: principal_angle(lambda),
                closed_form_weight: quoted,
                overlap_left: gl,
                overlap_right: gr,
                circuit_weight: if gl + gr > 0.0 { gl * gr / (gl + gr) } else { 0.0 },
            }
        })
        .collect())
}

/// Leading coefficient of `J_R` from the closed-form weight.
pub fn cycle_jr_closed_form(p: &CycleModelParams, tol: &Tolerances) -> Result<f64> {
    Ok(cycle_channels(p, tol)?
        .iter()
        .map(|ch| ch.closed_form_weight * (p.f_left.eval(ch.theta) - p.f_right.eval(ch.theta)))
        .sum())
}

/// Same coefficient with the weights computed from the eigenvectors.
pub fn cycle_jr_circuit(p: &CycleModelParams, tol: &Tolerances) -> Result<f64> {
    Ok(cycle_channels(p, tol)?
        .iter()
        .map(|ch| ch.circuit_weight * (p.f_left.eval(ch.theta) - p.f_right.eval(ch.theta)))
        .sum())
}

/// `n = 8`, `phi = pi/3`, `beta = 0.1`, `alpha = 0.3`, `f_L = 0.9`, `f_R = 0.1`.
pub fn reference_cycle() -> CycleModelParams {
    CycleModelParams::new(8, std::f64::consts::FRAC_PI_3, 0.1, 0.3, Density::Constant(0.9), Density::Constant(0.1))
}

/// `f_L = 1/2 - a cos 2 theta`, `f_R = 1/2 + a cos 2 theta`.
pub fn crossing_densities(a: f64) -> (Density, Density) {
    (
        Density::Fourier { cos: vec![0.5, 0.0, -a], sin: vec![] },
        Density::Fourier { cos: vec![0.5, 0.0, a], sin: vec![] },
    )
}
