//! Asymptotic entropy production rate.

use crate::model::{BlockUnitary, ReservoirSymbol};
use crate::numerics::{
    eye, herm_eig, integrate_adaptive, log_odds, trace_product, CMatrix, PeriodicGrid, SteinSolver, Tolerances,
};
use crate::scattering::scattering_matrix;
use crate::steady::Stationary;
use crate::transport::current_integrand;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct EntropyReport {
    pub sigma: f64,
    /// `sum_k int mu_k j_k`, available for rank-one reservoirs.
    pub sigma_flux: Option<f64>,
    pub nodes: usize,
    pub converged: bool,
    pub change: f64,
}

/// `tr X (log X - log Y)` for Hermitian `X, Y` with spectra in `[0, 1]`,
/// clamped at `eps_clip`.
fn relative_entropy(x: &CMatrix, y: &CMatrix, eps_clip: f64, tol: &Tolerances) -> Result<f64> {
    let ex = herm_eig(x, tol.herm)?;
    let ey = herm_eig(y, tol.herm)?;
    for e in [&ex, &ey] {
        if e.min() < -tol.clip || e.max() > 1.0 + tol.clip {
            return Err(Error::SpectrumOutOfRange { min: e.min(), max: e.max() });
        }
    }
    let clamp = |v: f64| v.clamp(eps_clip, 1.0 - eps_clip).ln();
    let xlogx: f64 = ex.values.iter().map(|&v| v * clamp(v)).sum();
    let logy = ey.apply(clamp);
    Ok(xlogx - trace_product(x, &logy).re)
}

/// `S[Y Xi Y* | Xi] + S[1 - Y Xi Y* | 1 - Xi]` at one frequency.
pub fn entropy_integrand(y: &CMatrix, xi: &CMatrix, eps_clip: f64, tol: &Tolerances) -> Result<f64> {
    let out = crate::numerics::hermitian_part(&(y * xi * y.adjoint()));
    let one = eye(xi.nrows());
    Ok(relative_entropy(&out, xi, eps_clip, tol)? + relative_entropy(&(&one - &out), &(&one - xi), eps_clip, tol)?)
}

/// `sum_k mu_k(theta) j_k(theta)` with `mu_k = log((1 - f_k) / f_k)`.
pub fn entropy_flux_integrand(y: &CMatrix, res: &ReservoirSymbol, theta: f64, eps_clip: f64) -> f64 {
    let j = current_integrand(y, res, theta);
    (0..res.n_reservoirs())
        .map(|k| {
            let f = res.density(k, theta).clamp(eps_clip, 1.0 - eps_clip);
            ((1.0 - f) / f).ln() * j[k]
        })
        .sum()
}

fn nodal(z: &BlockUnitary, res: &ReservoirSymbol, theta: f64, eps_clip: f64, tol: &Tolerances) -> Result<Vec<f64>> {
    let y = scattering_matrix(z, theta, tol)?;
    let s = entropy_integrand(&y, &res.eval(theta), eps_clip, tol)?;
    if res.is_rank_one() {
        Ok(vec![s, entropy_flux_integrand(&y, res, theta, eps_clip)])
    } else {
        Ok(vec![s])
    }
}

/// Trapezoid rule on a fixed grid.
pub fn entropy_rate(
    z: &BlockUnitary,
    res: &ReservoirSymbol,
    grid: &PeriodicGrid,
    eps_clip: f64,
    tol: &Tolerances,
) -> Result<EntropyReport> {
    let samples = grid.try_sample(|t| nodal(z, res, t, eps_clip, tol))?;
    let n = grid.len() as f64;
    let sigma = samples.iter().map(|s| s[0]).sum::<f64>() / n;
    let sigma_flux = res.is_rank_one().then(|| samples.iter().map(|s| s[1]).sum::<f64>() / n);
    Ok(EntropyReport { sigma, sigma_flux, nodes: grid.len(), converged: true, change: f64::NAN })
}

/// Nested-grid refinement from `n0` nodes until successive estimates agree to `quad_tol`.
pub fn entropy_rate_adaptive(
    z: &BlockUnitary,
    res: &ReservoirSymbol,
    n0: usize,
    quad_tol: f64,
    n_max: usize,
    eps_clip: f64,
    tol: &Tolerances,
) -> Result<EntropyReport> {
    let out = integrate_adaptive(|t| nodal(z, res, t, eps_clip, tol), n0, quad_tol, n_max)?;
    Ok(EntropyReport {
        sigma: out.value[0],
        sigma_flux: out.value.get(1).copied(),
        nodes: out.nodes,
        converged: out.converged,
        change: out.change,
    })
}

/// Fourier blocks of `log(1 - Xi) - log Xi` with the grid size at which they
/// were resolved.
fn log_odds_blocks(res: &ReservoirSymbol, eps_clip: f64, tol: &Tolerances) -> Result<Vec<(i64, CMatrix)>> {
    if res.band() == 0 {
        return Ok(vec![(0, log_odds(&res.block(0), eps_clip, tol.clip, tol.herm)?)]);
    }
    let mut n = 64usize;
    loop {
        let grid = PeriodicGrid::new(n)?;
        let samples = grid.try_sample(|t| log_odds(&res.eval(t), eps_clip, tol.clip, tol.herm))?;
        let half = (n / 2 - 1) as i64;
        let blocks: Vec<(i64, CMatrix)> =
            (-half..=half).map(|m| (m, grid.fourier_coefficient(&samples, m))).collect();
        let scale = crate::numerics::max_abs(&blocks[half as usize].1).max(1.0);
        let tail = blocks
            .iter()
            .filter(|(m, _)| m.unsigned_abs() as usize >= n / 4)
            .map(|(_, b)| crate::numerics::max_abs(b))
            .fold(0.0, f64::max);
        if tail <= 1e-14 * scale || n >= 1 << 12 {
            let keep = blocks
                .into_iter()
                .filter(|(m, b)| (m.unsigned_abs() as usize) < n / 4 && crate::numerics::max_abs(b) > 1e-16 * scale)
                .collect();
            return Ok(keep);
        }
        n *= 2;
    }
}

/// `sigma = sum_m tr[(Xi^inf_m - Xi_m) L_{-m}]` with `L` the Fourier blocks of
/// `log(1 - Xi) - log Xi`; the outgoing blocks are summed in closed form, so
/// no resolvent is sampled.
pub fn entropy_rate_exact(st: &Stationary, eps_clip: f64, tol: &Tolerances) -> Result<f64> {
    let res = st.symbol();
    let mut sigma = 0.0;
    for (m, l) in log_odds_blocks(res, eps_clip, tol)? {
        let diff = st.outgoing_block(-m)? - res.block(-m);
        sigma += trace_product(&diff, &l).re;
    }
    Ok(sigma)
}

/// Closed form for constant rank-one densities:
/// `sum_{k,k'} mu_k (f_k' - f_k) sum_l tr[Y_l* Pi_k Y_l Pi_k']`.
pub fn entropy_rate_constant(z: &BlockUnitary, res: &ReservoirSymbol, eps_clip: f64, tol: &Tolerances) -> Result<f64> {
    if res.band() != 0 {
        return Err(Error::InvalidArgument("closed form needs constant densities".into()));
    }
    if !res.is_rank_one() {
        return Err(Error::NotRankOne("constant-density entropy"));
    }
    let n = res.n_reservoirs();
    let f: Vec<f64> = (0..n).map(|k| res.density(k, 0.0).clamp(eps_clip, 1.0 - eps_clip)).collect();
    let solver = SteinSolver::new(&z.m.adjoint(), tol.sp)?;
    let p = res.projectors();
    let mut sigma = 0.0;
    for k in 0..n {
        let v = solver.solve(&(z.z_bs.adjoint() * &p[k] * &z.z_bs))?.v;
        let weight = z.c.adjoint() * &p[k] * &z.c + z.z_sb.adjoint() * v * &z.z_sb;
        let mu = ((1.0 - f[k]) / f[k]).ln();
        for kp in 0..n {
            sigma += mu * (f[kp] - f[k]) * trace_product(&weight, &p[kp]).re;
        }
    }
    Ok(sigma)
}
