//! Scattering amplitudes of the sample and the unitary scattering matrix.

use crate::model::{BlockUnitary, ReservoirSymbol};
use crate::numerics::{frobenius, spectral_radius, trace_product, CMatrix, Tolerances, C64};
use crate::{Error, Result};
use nalgebra::DMatrix;

/// Amplitudes `Y_0 = C`, `Y_m = Z_BS M^{m-1} Z_SB`, truncated once the
/// estimated remainder drops below the requested tolerance.
#[derive(Debug, Clone)]
pub struct ScatteringSequence {
    pub blocks: Vec<CMatrix>,
    pub decay: f64,
    pub tail_bound: f64,
}

impl ScatteringSequence {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `sum_m e^{-i m theta} Y_m`.
    pub fn partial_sum(&self, theta: f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.blocks[0].nrows(), self.blocks[0].ncols());
        for (m, y) in self.blocks.iter().enumerate() {
            out += y * C64::from_polar(1.0, -(m as f64) * theta);
        }
        out
    }
}

pub fn scattering_sequence(z: &BlockUnitary, tail_tol: f64, max_len: usize) -> Result<ScatteringSequence> {
    let decay = spectral_radius(&z.m)?;
    if decay >= 1.0 {
        return Err(Error::SpectralRadiusTooLarge { radius: decay });
    }
    let scale = frobenius(&z.z_bs) * frobenius(&z.z_sb);
    let mut blocks = vec![z.c.clone()];
    let mut power = z.z_sb.clone();
    let mut tail_bound = scale / (1.0 - decay);
    while tail_bound > tail_tol && blocks.len() < max_len {
        blocks.push(&z.z_bs * &power);
        power = &z.m * power;
        tail_bound = frobenius(&z.z_bs) * frobenius(&power) / (1.0 - decay);
    }
    Ok(ScatteringSequence { blocks, decay, tail_bound })
}

/// `(M - e^{i theta})^{-1}`, rejecting near-singular resolvents.
pub fn resolvent(m: &CMatrix, theta: f64, tol: &Tolerances) -> Result<CMatrix> {
    let n = m.nrows();
    let mut a = m.clone();
    let z = C64::from_polar(1.0, theta);
    for i in 0..n {
        a[(i, i)] -= z;
    }
    let norm1 = |x: &CMatrix| (0..x.ncols()).map(|j| x.column(j).iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max);
    let inv = a.clone().try_inverse().ok_or(Error::SingularResolvent { theta, condition: f64::INFINITY })?;
    let condition = norm1(&a) * norm1(&inv);
    if !condition.is_finite() || condition * tol.sp > 1.0 {
        return Err(Error::SingularResolvent { theta, condition });
    }
    Ok(inv)
}

/// `Y(theta) = C - Z_BS (M - e^{i theta})^{-1} Z_SB`.
pub fn scattering_matrix(z: &BlockUnitary, theta: f64, tol: &Tolerances) -> Result<CMatrix> {
    if z.d_s() == 0 {
        return Ok(z.c.clone());
    }
    let r = resolvent(&z.m, theta, tol)?;
    Ok(&z.c - &z.z_bs * (r * &z.z_sb))
}

/// Transmission probabilities `C_{kk'}(theta) = tr(Y* Pi_k Y Pi_k')`.
#[derive(Debug, Clone)]
pub struct Transmission {
    pub matrix: DMatrix<f64>,
    pub rank_one: bool,
}

pub fn transmission_from(y: &CMatrix, res: &ReservoirSymbol) -> Transmission {
    let p = res.projectors();
    let n = p.len();
    let sandwiched: Vec<CMatrix> = p.iter().map(|pk| y.adjoint() * pk * y).collect();
    let matrix = DMatrix::from_fn(n, n, |k, kp| trace_product(&sandwiched[k], &p[kp]).re);
    Transmission { matrix, rank_one: res.is_rank_one() }
}

pub fn transmission(z: &BlockUnitary, res: &ReservoirSymbol, theta: f64, tol: &Tolerances) -> Result<Transmission> {
    Ok(transmission_from(&scattering_matrix(z, theta, tol)?, res))
}
