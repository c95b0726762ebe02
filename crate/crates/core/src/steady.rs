//! Asymptotic and finite-time states of the sample and of the outgoing
//! reservoir modes.

use crate::model::{BlockUnitary, ReservoirSymbol};
use crate::numerics::{eye, max_abs, CMatrix, PeriodicGrid, SteinSolver, Tolerances};
use crate::scattering::scattering_matrix;
use crate::Result;

#[derive(Debug, Clone)]
pub struct SteadySampleState {
    pub delta: CMatrix,
    pub residual: f64,
    pub spectral_radius: f64,
}

fn powers(m: &CMatrix, k: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(eye(m.nrows()));
    for i in 0..k {
        let next = m * &out[i];
        out.push(next);
    }
    out
}

/// Stationary quantities that only need one factorization of the Stein
/// operator `V -> V - M V M*`.
pub struct Stationary {
    z: BlockUnitary,
    res: ReservoirSymbol,
    solver: SteinSolver,
}

impl Stationary {
    pub fn new(z: &BlockUnitary, res: &ReservoirSymbol, tol: &Tolerances) -> Result<Self> {
        if res.d_b() != z.d_b() {
            return Err(crate::Error::DimensionMismatch(format!(
                "reservoir symbol acts on dimension {} but the unitary on {}",
                res.d_b(),
                z.d_b()
            )));
        }
        let solver = SteinSolver::new(&z.m, tol.sp)?;
        Ok(Self { z: z.clone(), res: res.clone(), solver })
    }

    pub fn model(&self) -> &BlockUnitary {
        &self.z
    }

    pub fn symbol(&self) -> &ReservoirSymbol {
        &self.res
    }

    pub fn spectral_radius(&self) -> f64 {
        self.solver.spectral_radius()
    }

    /// `S_m = sum_{a, b >= 0} M^a Z_SB Xi_{a - b + m} Z_SB* M*^b`; `S_0` is the
    /// steady sample state.
    pub fn sample_correlation(&self, m: i64) -> Result<(CMatrix, f64)> {
        let band = self.res.band() as i64;
        let b = &self.z.z_sb;
        let ds = self.z.d_s();
        let max_pow = (m.abs() + band).max(0) as usize;
        let p = powers(&self.z.m, max_pow);
        let mut r = CMatrix::zeros(ds, ds);
        for d in 0..=max_pow as i64 {
            if let Some(xi) = self.res.block_ref(d + m) {
                r += &p[d as usize] * b * xi * b.adjoint();
            }
            if d >= 1 {
                if let Some(xi) = self.res.block_ref(m - d) {
                    r += b * xi * b.adjoint() * p[d as usize].adjoint();
                }
            }
        }
        let sol = self.solver.solve(&r)?;
        Ok((sol.v, sol.residual))
    }

    pub fn sample(&self) -> Result<SteadySampleState> {
        let (v, residual) = self.sample_correlation(0)?;
        Ok(SteadySampleState {
            delta: crate::numerics::hermitian_part(&v),
            residual,
            spectral_radius: self.spectral_radius(),
        })
    }

    /// Fourier block `Xi^inf_m = sum_{l, l' >= 0} Y_l Xi_{l - l' + m} Y_l'*`,
    /// summed in closed form.
    pub fn outgoing_block(&self, m: i64) -> Result<CMatrix> {
        let z = &self.z;
        let band = self.res.band() as i64;
        let (s, _) = self.sample_correlation(m)?;
        let mut out = &z.c * self.res.block(m) * z.c.adjoint() + &z.z_bs * s * z.z_bs.adjoint();
        let top = (band - m).max(0) as usize;
        let p = powers(&z.m, top);
        let mut cross = CMatrix::zeros(z.d_b(), z.d_b());
        for l in 1..=top as i64 {
            if let Some(xi) = self.res.block_ref(l + m) {
                cross += &z.z_bs * &p[(l - 1) as usize] * &z.z_sb * xi * z.c.adjoint();
            }
        }
        let top2 = (band + m).max(0) as usize;
        let p2 = powers(&z.m, top2);
        for l in 1..=top2 as i64 {
            if let Some(xi) = self.res.block_ref(m - l) {
                out += &z.c * xi * z.z_sb.adjoint() * p2[(l - 1) as usize].adjoint() * z.z_bs.adjoint();
            }
        }
        Ok(out + cross)
    }

    /// Block `(n, m)` of the limiting environment state, in the gauge where
    /// the free reservoir dynamics is trivial.
    pub fn env_block(&self, n: i64, m: i64) -> Result<CMatrix> {
        match (n < 0, m < 0) {
            (true, true) => self.outgoing_block(m - n),
            (false, false) => Ok(self.res.block(m - n)),
            (true, false) => Ok(self.mixed_block(m - n)),
            (false, true) => Ok(self.mixed_block(n - m).adjoint()),
        }
    }

    /// `sum_{l >= 0} Y_l Xi_{l + d}`.
    fn mixed_block(&self, d: i64) -> CMatrix {
        let z = &self.z;
        let band = self.res.band() as i64;
        let mut out = &z.c * self.res.block(d);
        let top = (band - d).max(0) as usize;
        let p = powers(&z.m, top);
        for l in 1..=top as i64 {
            if let Some(xi) = self.res.block_ref(l + d) {
                out += &z.z_bs * &p[(l - 1) as usize] * &z.z_sb * xi;
            }
        }
        out
    }
}

pub fn steady_sample(z: &BlockUnitary, res: &ReservoirSymbol, tol: &Tolerances) -> Result<SteadySampleState> {
    Stationary::new(z, res, tol)?.sample()
}

/// Cross terms `H = sum_{l=1}^{min(t, band)} M^l Z_SB Xi_l Z_SB*` feeding the
/// finite-time recursion.
struct Recursion {
    source: CMatrix,
    lagged: Vec<CMatrix>,
}

impl Recursion {
    fn new(z: &BlockUnitary, res: &ReservoirSymbol) -> Self {
        let b = &z.z_sb;
        let source = b * res.block(0) * b.adjoint();
        let p = powers(&z.m, res.band());
        let lagged = (1..=res.band()).map(|l| &p[l] * b * res.block(l as i64) * b.adjoint()).collect();
        Self { source, lagged }
    }

    fn forcing(&self, t: usize, memory: bool) -> CMatrix {
        let mut f = self.source.clone();
        if memory {
            let mut h = CMatrix::zeros(f.nrows(), f.ncols());
            for p in self.lagged.iter().take(t) {
                h += p;
            }
            f += &h + h.adjoint();
        }
        f
    }
}

fn trajectory(z: &BlockUnitary, res: &ReservoirSymbol, delta0: &CMatrix, t_max: usize, memory: bool) -> Vec<CMatrix> {
    let rec = Recursion::new(z, res);
    let mut out = Vec::with_capacity(t_max + 1);
    out.push(delta0.clone());
    for t in 0..t_max {
        let next = &z.m * &out[t] * z.m.adjoint() + rec.forcing(t, memory);
        out.push(next);
    }
    out
}

/// `Delta^t = M^t Delta0 M*^t + sum_{m, n < t} M^m Z_SB Xi_{m - n} Z_SB* M*^n`.
pub fn sample_at_time(z: &BlockUnitary, res: &ReservoirSymbol, delta0: &CMatrix, t: usize) -> CMatrix {
    trajectory(z, res, delta0, t, true).pop().unwrap_or_else(|| delta0.clone())
}

/// `Delta^0, ..., Delta^{t_max}`.
pub fn sample_trajectory(z: &BlockUnitary, res: &ReservoirSymbol, delta0: &CMatrix, t_max: usize) -> Vec<CMatrix> {
    trajectory(z, res, delta0, t_max, true)
}

/// Same as [`sample_at_time`] with every `Xi_l`, `l != 0`, dropped.
pub fn sample_at_time_ris(z: &BlockUnitary, res: &ReservoirSymbol, delta0: &CMatrix, t: usize) -> CMatrix {
    trajectory(z, res, delta0, t, false).pop().unwrap_or_else(|| delta0.clone())
}

/// `Y(theta) Xi(theta) Y(theta)*`.
pub fn xi_infty(z: &BlockUnitary, res: &ReservoirSymbol, theta: f64, tol: &Tolerances) -> Result<CMatrix> {
    let y = scattering_matrix(z, theta, tol)?;
    Ok(&y * res.eval(theta) * y.adjoint())
}

/// Fourier blocks of [`xi_infty`] extracted by the trapezoid rule on `grid`.
pub fn xi_infty_blocks(
    z: &BlockUnitary,
    res: &ReservoirSymbol,
    grid: &PeriodicGrid,
    ms: &[i64],
    tol: &Tolerances,
) -> Result<Vec<CMatrix>> {
    let samples = grid.try_sample(|t| xi_infty(z, res, t, tol))?;
    Ok(ms.iter().map(|&m| grid.fourier_coefficient(&samples, m)).collect())
}

/// Largest entry of `a - b`.
pub fn distance(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a - b))
}
