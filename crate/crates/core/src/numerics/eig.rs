use super::{c64, hermiticity_defect, max_abs, CMatrix, C64};
use crate::{Error, Result};
use nalgebra::linalg::{Schur, SymmetricEigen};

/// Eigendecomposition `H = V diag(values) V*` with ascending real eigenvalues.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermEig {
    /// `V diag(f(values)) V*`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> CMatrix {
        self.apply_complex(|x| c64(f(x), 0.0))
    }

    pub fn apply_complex<F: Fn(f64) -> C64>(&self, f: F) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let fj = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Hermitian eigendecomposition; rejects inputs whose Hermiticity defect
/// exceeds `tol_herm` relative to the matrix scale.
pub fn herm_eig(h: &CMatrix, tol_herm: f64) -> Result<HermEig> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch("herm_eig needs a square matrix".into()));
    }
    let n = h.nrows();
    if n == 0 {
        return Ok(HermEig { values: vec![], vectors: CMatrix::zeros(0, 0) });
    }
    if !super::is_finite(h) {
        return Err(Error::NonFinite("herm_eig input"));
    }
    let scale = max_abs(h).max(1.0);
    let defect = hermiticity_defect(h);
    if defect > tol_herm * scale {
        return Err(Error::NotHermitian { defect });
    }
    let sym = super::hermitian_part(h);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermEig { values, vectors })
}

fn clamped_spectrum(h: &CMatrix, eps_clip: f64, tol_clip: f64, tol_herm: f64) -> Result<HermEig> {
    if !(eps_clip > 0.0 && eps_clip < 0.5) {
        return Err(Error::InvalidArgument(format!("clip level {eps_clip} outside (0, 1/2)")));
    }
    let mut e = herm_eig(h, tol_herm)?;
    if e.min() < -tol_clip || e.max() > 1.0 + tol_clip {
        return Err(Error::SpectrumOutOfRange { min: e.min(), max: e.max() });
    }
    for v in e.values.iter_mut() {
        *v = v.clamp(eps_clip, 1.0 - eps_clip);
    }
    Ok(e)
}

/// `log H` after clamping the spectrum into `[eps_clip, 1 - eps_clip]`.
///
/// Eigenvalues further than `tol_clip` outside `[0, 1]` are rejected.
pub fn matrix_log_clamped(h: &CMatrix, eps_clip: f64, tol_clip: f64, tol_herm: f64) -> Result<CMatrix> {
    Ok(clamped_spectrum(h, eps_clip, tol_clip, tol_herm)?.apply(f64::ln))
}

/// `log(1 - H) - log H` with the same clamping as [`matrix_log_clamped`].
pub fn log_odds(h: &CMatrix, eps_clip: f64, tol_clip: f64, tol_herm: f64) -> Result<CMatrix> {
    Ok(clamped_spectrum(h, eps_clip, tol_clip, tol_herm)?.apply(|x| (1.0 - x).ln() - x.ln()))
}

/// Right and left eigenvectors of a diagonalizable matrix.
///
/// Columns of `right` are unit-norm; `left` is normalized so that
/// `left* right = 1`.
#[derive(Debug, Clone)]
pub struct GeneralEig {
    pub values: Vec<C64>,
    pub right: CMatrix,
    pub left: CMatrix,
    pub simple: Vec<bool>,
}

fn schur(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = m.nrows();
    if max_abs(m) == 0.0 {
        return Ok((CMatrix::identity(n, n), CMatrix::zeros(n, n)));
    }
    let s = Schur::try_new(m.clone(), f64::EPSILON, 1000 * n.max(1)).ok_or(Error::EigenFailure)?;
    Ok(s.unpack())
}

pub(crate) fn schur_form(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("Schur form needs a square matrix".into()));
    }
    if !super::is_finite(m) {
        return Err(Error::NonFinite("Schur input"));
    }
    schur(m)
}

pub fn spectral_radius(m: &CMatrix) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let (_, t) = schur_form(m)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)].norm()).fold(0.0, f64::max))
}

/// Groups indices whose values are chained within `tol` of each other.
pub fn clusters(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut k = i;
        while p[k] != r {
            let next = p[k];
            p[k] = r;
            k = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Eigenvalues with right and left eigenvectors via complex Schur and
/// triangular back-substitution.
pub fn general_eig(m: &CMatrix, tol_cluster: f64) -> Result<GeneralEig> {
    let (q, t) = schur_form(m)?;
    let n = t.nrows();
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = max_abs(&t).max(f64::MIN_POSITIVE);
    let floor = f64::EPSILON * scale;
    let mut x = CMatrix::zeros(n, n);
    for k in 0..n {
        x[(k, k)] = c64(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = c64(0.0, 0.0);
            for i in (j + 1)..=k {
                s += t[(j, i)] * x[(i, k)];
            }
            let mut d = t[(j, j)] - t[(k, k)];
            if d.norm() < floor {
                d = c64(floor, 0.0);
            }
            x[(j, k)] = -s / d;
        }
    }
    let mut right = q * x;
    for k in 0..n {
        let nrm = right.column(k).norm();
        if nrm > 0.0 {
            right.column_mut(k).unscale_mut(nrm);
        }
    }
    let inv = right.clone().try_inverse().ok_or(Error::NotSimple("general_eig"))?;
    let left = inv.adjoint();
    let groups = clusters(&values, tol_cluster);
    let mut simple = vec![true; n];
    for g in &groups {
        if g.len() > 1 {
            for &i in g {
                simple[i] = false;
            }
        }
    }
    Ok(GeneralEig { values, right, left, simple })
}
