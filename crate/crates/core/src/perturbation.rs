//! Leading-order behaviour as the coupling strength goes to zero.

use crate::model::{check_kalman, CouplingSpec, ReservoirSymbol};
use crate::numerics::{clusters, herm_eig, outer, trace_product, CMatrix, Tolerances, C64};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::TAU;

/// One first-order branch `j` of an eigenvalue group of `W`.
#[derive(Debug, Clone)]
pub struct Branch {
    pub c: f64,
    pub projector: CMatrix,
}

/// An eigenvalue `lambda_i` of `W` and the branches splitting off it.
#[derive(Debug, Clone)]
pub struct EigenGroup {
    pub lambda: C64,
    /// `-i log lambda` in `[0, 2 pi)`.
    pub theta: f64,
    pub projector: CMatrix,
    pub branches: Vec<Branch>,
}

#[derive(Debug, Clone)]
pub struct SplittingData {
    pub groups: Vec<EigenGroup>,
    pub simple: bool,
}

pub fn principal_angle(z: C64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

pub fn splitting(spec: &CouplingSpec, tol: &Tolerances) -> Result<SplittingData> {
    check_kalman(&spec.w, &spec.a, tol)?;
    let (q, t) = crate::numerics::eig::schur_form(&spec.w)?;
    let n = t.nrows();
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let aa = &spec.a * spec.a.adjoint();
    let mut groups = Vec::new();
    for (gi, idx) in clusters(&values, tol.cluster).into_iter().enumerate() {
        let basis = CMatrix::from_fn(n, idx.len(), |r, c| q[(r, idx[c])]);
        let lambda = idx.iter().map(|&i| values[i]).sum::<C64>() / idx.len() as f64;
        let lambda = lambda / lambda.norm();
        let compressed = basis.adjoint() * &aa * &basis;
        let e = herm_eig(&compressed, tol.herm)?;
        let ks: Vec<C64> = e.values.iter().map(|&v| C64::new(v, 0.0)).collect();
        if clusters(&ks, tol.cluster).iter().any(|g| g.len() > 1) {
            return Err(Error::UnresolvedSplitting { group: gi });
        }
        let branches = (0..idx.len())
            .map(|j| {
                let v: Vec<C64> = (&basis * e.vectors.column(j)).iter().copied().collect();
                Branch { c: e.values[j], projector: outer(&v, &v) }
            })
            .collect();
        groups.push(EigenGroup {
            lambda,
            theta: principal_angle(lambda),
            projector: &basis * basis.adjoint(),
            branches,
        });
    }
    let simple = groups.iter().all(|g| g.branches.len() == 1);
    Ok(SplittingData { groups, simple })
}

/// `sum_{j, j'} 2 / (c_j + c_j') Q_j X Q_j'` over the branches of one group.
fn weighted_sandwich(group: &EigenGroup, x: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(x.nrows(), x.ncols());
    for bj in &group.branches {
        for bk in &group.branches {
            out += &bj.projector * x * &bk.projector * C64::new(2.0 / (bj.c + bk.c), 0.0);
        }
    }
    out
}

/// The coupling-independent limit of the steady sample state.
pub fn steady_sample_leading(spec: &CouplingSpec, res: &ReservoirSymbol, split: &SplittingData) -> CMatrix {
    let a = &spec.a;
    let mut out = CMatrix::zeros(spec.d_s(), spec.d_s());
    for g in &split.groups {
        out += weighted_sandwich(g, &(a * res.eval(g.theta) * a.adjoint()));
    }
    crate::numerics::hermitian_part(&out)
}

/// Coefficients `J_k^(2)` with `J_k = alpha^2 J_k^(2) + O(alpha^4)`.
pub fn currents_leading(spec: &CouplingSpec, res: &ReservoirSymbol, split: &SplittingData) -> Vec<f64> {
    let a = &spec.a;
    let mut d = CMatrix::zeros(spec.d_b(), spec.d_b());
    for g in &split.groups {
        let xi = res.eval(g.theta);
        d -= a.adjoint() * &g.projector * a * &xi;
        d += a.adjoint() * weighted_sandwich(g, &(a * &xi * a.adjoint())) * a;
    }
    res.projectors().iter().map(|p| trace_product(p, &d).re).collect()
}

/// Star circuit attached to one eigenvalue of `W`.
#[derive(Debug, Clone)]
pub struct StarCircuit {
    pub lambda: C64,
    pub theta: f64,
    pub sources: Vec<f64>,
    pub conductances: Vec<f64>,
    pub currents: Vec<f64>,
    pub currents_kirchhoff: Vec<f64>,
}

/// `J_k = sum_k' g_k g_k' (f_k' - f_k) / sum g`; an all-open circuit carries nothing.
pub fn star_closed_form(sources: &[f64], conductances: &[f64]) -> Vec<f64> {
    let total: f64 = conductances.iter().sum();
    if total == 0.0 {
        return vec![0.0; sources.len()];
    }
    (0..sources.len())
        .map(|k| {
            (0..sources.len())
                .map(|kp| conductances[k] * conductances[kp] * (sources[kp] - sources[k]))
                .sum::<f64>()
                / total
        })
        .collect()
}

/// Modified nodal analysis of the star circuit: every branch is a source
/// `f_k` from ground in series with conductance `g_k` to a common node.
/// Returns the current flowing from the common node into each branch.
pub fn kirchhoff_star(sources: &[f64], conductances: &[f64]) -> Result<Vec<f64>> {
    let n = sources.len();
    if conductances.len() != n || conductances.iter().any(|g| *g < 0.0 || !g.is_finite()) {
        return Err(Error::InvalidArgument("conductances must be finite, nonnegative and match the sources".into()));
    }
    if conductances.iter().all(|g| *g == 0.0) {
        return Ok(vec![0.0; n]);
    }
    // unknowns: [V_top, V_1..V_n, I_1..I_n]
    let dim = 2 * n + 1;
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let mut b = DVector::<f64>::zeros(dim);
    for k in 0..n {
        let g = conductances[k];
        a[(0, 0)] -= g;
        a[(0, 1 + k)] += g;
        a[(1 + k, 1 + n + k)] = 1.0;
        a[(1 + k, 1 + k)] = -g;
        a[(1 + k, 0)] = g;
        a[(1 + n + k, 1 + k)] = 1.0;
        b[1 + n + k] = sources[k];
    }
    let x = a.lu().solve(&b).ok_or_else(|| Error::InvalidArgument("singular circuit".into()))?;
    Ok((0..n).map(|k| -x[1 + n + k]).collect())
}

pub fn star_circuit(
    spec: &CouplingSpec,
    res: &ReservoirSymbol,
    split: &SplittingData,
) -> Result<Vec<StarCircuit>> {
    if !split.simple {
        return Err(Error::NotSimple("star circuit"));
    }
    if !res.is_rank_one() {
        return Err(Error::NotRankOne("star circuit"));
    }
    let nb = res.n_reservoirs();
    let phis: Vec<CMatrix> = (0..nb)
        .map(|k| {
            let psi = res.rank_one_vector(k).expect("rank one");
            &spec.a * CMatrix::from_column_slice(psi.len(), 1, &psi)
        })
        .collect();
    split
        .groups
        .iter()
        .map(|g| {
            let sources: Vec<f64> = (0..nb).map(|k| res.density(k, g.theta)).collect();
            let conductances: Vec<f64> = phis
                .iter()
                .map(|phi| trace_product(&g.projector, &(phi * phi.adjoint())).re.max(0.0))
                .collect();
            Ok(StarCircuit {
                lambda: g.lambda,
                theta: g.theta,
                currents: star_closed_form(&sources, &conductances),
                currents_kirchhoff: kirchhoff_star(&sources, &conductances)?,
                sources,
                conductances,
            })
        })
        .collect()
}

/// `C^(2)_{k,k'} = sum_i g_{k,i} g_{k',i} / sum_k'' g_{k'',i}`.
pub fn circuit_conductance(circuits: &[StarCircuit]) -> DMatrix<f64> {
    let nb = circuits.first().map_or(0, |c| c.conductances.len());
    let mut out = DMatrix::zeros(nb, nb);
    for c in circuits {
        let total: f64 = c.conductances.iter().sum();
        if total == 0.0 {
            continue;
        }
        for k in 0..nb {
            for kp in 0..nb {
                out[(k, kp)] += c.conductances[k] * c.conductances[kp] / total;
            }
        }
    }
    out
}

/// Coefficient of `alpha^2` in the entropy production rate for constant densities.
pub fn entropy_leading(
    spec: &CouplingSpec,
    res: &ReservoirSymbol,
    split: &SplittingData,
    eps_clip: f64,
) -> Result<f64> {
    if res.band() != 0 {
        return Err(Error::InvalidArgument("leading entropy needs constant densities".into()));
    }
    let circuits = star_circuit(spec, res, split)?;
    let c2 = circuit_conductance(&circuits);
    let nb = res.n_reservoirs();
    let f: Vec<f64> = (0..nb).map(|k| res.density(k, 0.0).clamp(eps_clip, 1.0 - eps_clip)).collect();
    let mu: Vec<f64> = f.iter().map(|x| ((1.0 - x) / x).ln()).collect();
    let mut s = 0.0;
    for k in 0..nb {
        for kp in 0..nb {
            if k != kp {
                s += (mu[k] - mu[kp]) * (f[kp] - f[k]) * c2[(k, kp)];
            }
        }
    }
    Ok(0.5 * s)
}

/// Exact against leading-order quantities at one coupling strength.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub alpha: f64,
    pub currents: Vec<f64>,
    pub currents_leading: Vec<f64>,
    pub current_residual: f64,
    pub delta_residual: f64,
    pub sigma: f64,
    pub sigma_leading: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    pub current_slope: f64,
    pub delta_slope: f64,
}

/// Least-squares slope of `log y` against `log x`, ignoring nonpositive entries.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn alpha_sweep(
    spec: &CouplingSpec,
    res: &ReservoirSymbol,
    alphas: &[f64],
    eps_clip: f64,
    tol: &Tolerances,
) -> Result<SweepReport> {
    let split = splitting(spec, tol)?;
    let j2 = currents_leading(spec, res, &split);
    let d0 = steady_sample_leading(spec, res, &split);
    let s2 = if res.band() == 0 && res.is_rank_one() && split.simple {
        Some(entropy_leading(spec, res, &split, eps_clip)?)
    } else {
        None
    };
    let mut points = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let z = crate::model::build_block_unitary(&spec.with_alpha(alpha), tol)?;
        let st = crate::steady::Stationary::new(&z, res, tol)?;
        let delta = st.sample()?.delta;
        let out0 = st.outgoing_block(0)? - res.block(0);
        let currents: Vec<f64> = res.projectors().iter().map(|p| trace_product(p, &out0).re).collect();
        let leading: Vec<f64> = j2.iter().map(|j| alpha * alpha * j).collect();
        let current_residual = currents.iter().zip(&leading).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        points.push(SweepPoint {
            alpha,
            current_residual,
            delta_residual: crate::numerics::op_norm(&(delta - &d0)),
            sigma: crate::entropy::entropy_rate_exact(&st, eps_clip, tol)?,
            sigma_leading: s2.map(|s| alpha * alpha * s),
            currents,
            currents_leading: leading,
        });
    }
    let a: Vec<f64> = points.iter().map(|p| p.alpha).collect();
    let cr: Vec<f64> = points.iter().map(|p| p.current_residual).collect();
    let dr: Vec<f64> = points.iter().map(|p| p.delta_residual).collect();
    Ok(SweepReport { current_slope: loglog_slope(&a, &cr), delta_slope: loglog_slope(&a, &dr), points })
}
