//! Repeated-interaction model: the one-step block unitary, its small-coupling
//! parametrization, the reservoir symbol and the standing assumption checks.

use crate::numerics::{
    c64, herm_eig, hermiticity_defect, max_abs, numerical_rank, spectral_radius,
    unitarity_defect, CMatrix, PeriodicGrid, Tolerances, C64,
};
use crate::{Error, Result};

/// One-step unitary on `H_B (+) H_S`, stored as blocks
/// `[[c, z_bs], [z_sb, m]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockUnitary {
    pub c: CMatrix,
    pub z_bs: CMatrix,
    pub z_sb: CMatrix,
    pub m: CMatrix,
}

impl BlockUnitary {
    pub fn new(c: CMatrix, z_bs: CMatrix, z_sb: CMatrix, m: CMatrix, tol: &Tolerances) -> Result<Self> {
        let db = c.nrows();
        let ds = m.nrows();
        if c.shape() != (db, db) || m.shape() != (ds, ds) || z_bs.shape() != (db, ds) || z_sb.shape() != (ds, db) {
            return Err(Error::DimensionMismatch(format!(
                "blocks C {:?}, Z_BS {:?}, Z_SB {:?}, M {:?}",
                c.shape(),
                z_bs.shape(),
                z_sb.shape(),
                m.shape()
            )));
        }
        let z = Self { c, z_bs, z_sb, m };
        if ![&z.c, &z.z_bs, &z.z_sb, &z.m].iter().all(|b| crate::numerics::is_finite(b)) {
            return Err(Error::NonFinite("block unitary"));
        }
        let defect = z.unitarity_defect();
        if defect > tol.unit {
            return Err(Error::NotUnitary { defect });
        }
        Ok(z)
    }

    pub fn d_b(&self) -> usize {
        self.c.nrows()
    }

    pub fn d_s(&self) -> usize {
        self.m.nrows()
    }

    /// The assembled `(d_B + d_S)`-square matrix.
    pub fn full(&self) -> CMatrix {
        let (db, ds) = (self.d_b(), self.d_s());
        let mut z = CMatrix::zeros(db + ds, db + ds);
        z.view_mut((0, 0), (db, db)).copy_from(&self.c);
        z.view_mut((0, db), (db, ds)).copy_from(&self.z_bs);
        z.view_mut((db, 0), (ds, db)).copy_from(&self.z_sb);
        z.view_mut((db, db), (ds, ds)).copy_from(&self.m);
        z
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.full())
    }
}

/// Small-coupling data `(W, A, alpha)` with `Z = diag(1, W) exp(-i alpha [[0, A*], [A, 0]])`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    pub w: CMatrix,
    pub a: CMatrix,
    pub alpha: f64,
}

impl CouplingSpec {
    pub fn new(w: CMatrix, a: CMatrix, alpha: f64, tol: &Tolerances) -> Result<Self> {
        let ds = w.nrows();
        if !w.is_square() || a.nrows() != ds || a.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!("W {:?} with A {:?}", w.shape(), a.shape())));
        }
        if !alpha.is_finite() || !crate::numerics::is_finite(&w) || !crate::numerics::is_finite(&a) {
            return Err(Error::NonFinite("coupling specification"));
        }
        let defect = unitarity_defect(&w);
        if defect > tol.unit {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Self { w, a, alpha })
    }

    pub fn d_s(&self) -> usize {
        self.w.nrows()
    }

    pub fn d_b(&self) -> usize {
        self.a.ncols()
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self { alpha, ..self.clone() }
    }
}

/// `sin(alpha s) / s`, continuous at `s = 0`.
fn sinc_scaled(alpha: f64, s: f64) -> f64 {
    let x = alpha * s;
    if x.abs() < 1e-4 {
        alpha * (1.0 - x * x / 6.0 + x.powi(4) / 120.0)
    } else {
        x.sin() / s
    }
}

/// Closed-form blocks of the parametrized unitary.
pub fn build_block_unitary(spec: &CouplingSpec, tol: &Tolerances) -> Result<BlockUnitary> {
    let alpha = spec.alpha;
    let a = &spec.a;
    let ata = herm_eig(&(a.adjoint() * a), tol.herm)?;
    let aat = herm_eig(&(a * a.adjoint()), tol.herm)?;
    let root = |x: f64| x.max(0.0).sqrt();
    let c = ata.apply(|x| (alpha * root(x)).cos());
    let cos_s = aat.apply(|x| (alpha * root(x)).cos());
    let g = aat.apply(|x| sinc_scaled(alpha, root(x)));
    let minus_i = c64(0.0, -1.0);
    let z_bs = a.adjoint() * &g * minus_i;
    let z_sb = &spec.w * &g * a * minus_i;
    let m = &spec.w * cos_s;
    BlockUnitary::new(c, z_bs, z_sb, m, tol)
}

/// Spectral radius of `M`; fails unless it is below `1 - tol.sp`.
pub fn check_sp(z: &BlockUnitary, tol: &Tolerances) -> Result<f64> {
    let radius = spectral_radius(&z.m)?;
    if radius >= 1.0 - tol.sp {
        return Err(Error::SpectralRadiusTooLarge { radius });
    }
    Ok(radius)
}

/// Rank of `[A, W A, ..., W^{d_S - 1} A]`; fails unless it equals `d_S`.
pub fn check_kalman(w: &CMatrix, a: &CMatrix, tol: &Tolerances) -> Result<usize> {
    let ds = w.nrows();
    let db = a.ncols();
    let mut k = CMatrix::zeros(ds, ds * db);
    let mut block = a.clone();
    for j in 0..ds {
        k.view_mut((0, j * db), (ds, db)).copy_from(&block);
        block = w * block;
    }
    let rank = numerical_rank(&k, tol.rank);
    if rank < ds {
        return Err(Error::KalmanFailed { rank, dim: ds });
    }
    Ok(rank)
}

/// A scalar density on the circle.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Constant(f64),
    /// `f(theta) = cos[0] + sum_{l >= 1} cos[l] cos(l theta) + sin[l] sin(l theta)`;
    /// `sin[0]` is ignored.
    Fourier { cos: Vec<f64>, sin: Vec<f64> },
    /// Samples at `2 pi j / n`, interpolated by the minimal real
    /// trigonometric polynomial.
    Grid(Vec<f64>),
}

impl Density {
    /// Complex Fourier coefficients `f_l` for `l = -band..=band`.
    pub fn coefficients(&self) -> Vec<C64> {
        match self {
            Density::Constant(v) => vec![c64(*v, 0.0)],
            Density::Fourier { cos, sin } => {
                let band = cos.len().max(sin.len()).saturating_sub(1);
                let mut out = vec![c64(0.0, 0.0); 2 * band + 1];
                out[band] = c64(cos.first().copied().unwrap_or(0.0), 0.0);
                for l in 1..=band {
                    let a = cos.get(l).copied().unwrap_or(0.0);
                    let b = sin.get(l).copied().unwrap_or(0.0);
                    out[band + l] = c64(a / 2.0, -b / 2.0);
                    out[band - l] = c64(a / 2.0, b / 2.0);
                }
                out
            }
            Density::Grid(samples) => {
                let n = samples.len();
                if n == 0 {
                    return vec![c64(0.0, 0.0)];
                }
                let band = n / 2;
                let dft = |l: i64| -> C64 {
                    samples
                        .iter()
                        .enumerate()
                        .map(|(j, f)| C64::from_polar(*f, -(l as f64) * std::f64::consts::TAU * j as f64 / n as f64))
                        .sum::<C64>()
                        / n as f64
                };
                let mut out = vec![c64(0.0, 0.0); 2 * band + 1];
                for l in -(band as i64)..=(band as i64) {
                    let v = if n % 2 == 0 && l.unsigned_abs() as usize == band && band > 0 {
                        dft(band as i64) * 0.5
                    } else {
                        dft(l)
                    };
                    out[(l + band as i64) as usize] = v;
                }
                out
            }
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let coeffs = self.coefficients();
        let band = (coeffs.len() / 2) as i64;
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (c * C64::from_polar(1.0, (i as i64 - band) as f64 * theta)).re)
            .sum()
    }
}

/// Finite Fourier symbol `Xi(theta) = sum_l e^{i l theta} Xi_l` together with
/// the reservoir projectors it commutes with.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirSymbol {
    blocks: Vec<CMatrix>,
    projectors: Vec<CMatrix>,
}

impl ReservoirSymbol {
    /// `blocks[i]` is `Xi_{i - band}`; the length must be odd.
    pub fn new(blocks: Vec<CMatrix>, projectors: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        if blocks.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument("need an odd number of Fourier blocks".into()));
        }
        let db = blocks[0].nrows();
        if blocks.iter().any(|b| b.shape() != (db, db)) {
            return Err(Error::DimensionMismatch("Fourier blocks differ in shape".into()));
        }
        if blocks.iter().any(|b| !crate::numerics::is_finite(b)) {
            return Err(Error::NonFinite("reservoir symbol"));
        }
        let band = blocks.len() / 2;
        for l in 0..=band {
            let d = max_abs(&(&blocks[band + l] - blocks[band - l].adjoint()));
            if d > tol.herm {
                return Err(Error::NotHermitian { defect: d });
            }
        }
        check_projectors(&projectors, db, tol)?;
        let mut defect: f64 = 0.0;
        for p in &projectors {
            for b in &blocks {
                defect = defect.max(max_abs(&(p * b - b * p)));
            }
        }
        if defect > tol.herm {
            return Err(Error::NotCommuting { defect });
        }
        let mut sym = Self { blocks, projectors };
        sym.trim();
        Ok(sym)
    }

    /// Rank-one reservoirs `Pi_k = psi_k psi_k*` with scalar densities.
    pub fn from_densities(vectors: &[Vec<C64>], densities: &[Density], tol: &Tolerances) -> Result<Self> {
        if vectors.len() != densities.len() || vectors.is_empty() {
            return Err(Error::InvalidProjectors(format!(
                "{} vectors for {} densities",
                vectors.len(),
                densities.len()
            )));
        }
        let db = vectors[0].len();
        let projectors: Vec<CMatrix> = vectors.iter().map(|v| crate::numerics::outer(v, v)).collect();
        let coeffs: Vec<Vec<C64>> = densities.iter().map(Density::coefficients).collect();
        let band = coeffs.iter().map(|c| c.len() / 2).max().unwrap_or(0);
        let mut blocks = vec![CMatrix::zeros(db, db); 2 * band + 1];
        for (p, c) in projectors.iter().zip(&coeffs) {
            let b = c.len() / 2;
            for (i, coef) in c.iter().enumerate() {
                blocks[band + i - b] += p * *coef;
            }
        }
        Self::new(blocks, projectors, tol)
    }

    /// Rank-one reservoirs on the standard basis of `C^{densities.len()}`.
    pub fn standard(densities: &[Density], tol: &Tolerances) -> Result<Self> {
        let n = densities.len();
        let vectors: Vec<Vec<C64>> = (0..n)
            .map(|k| (0..n).map(|i| c64(if i == k { 1.0 } else { 0.0 }, 0.0)).collect())
            .collect();
        Self::from_densities(&vectors, densities, tol)
    }

    fn trim(&mut self) {
        while self.blocks.len() > 1 {
            let last = self.blocks.len() - 1;
            if max_abs(&self.blocks[0]) == 0.0 && max_abs(&self.blocks[last]) == 0.0 {
                self.blocks.remove(last);
                self.blocks.remove(0);
            } else {
                break;
            }
        }
    }

    pub fn d_b(&self) -> usize {
        self.blocks[0].nrows()
    }

    /// Largest `l` with `Xi_l != 0`.
    pub fn band(&self) -> usize {
        self.blocks.len() / 2
    }

    pub fn n_reservoirs(&self) -> usize {
        self.projectors.len()
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn block(&self, l: i64) -> CMatrix {
        let band = self.band() as i64;
        if l.abs() > band {
            CMatrix::zeros(self.d_b(), self.d_b())
        } else {
            self.blocks[(l + band) as usize].clone()
        }
    }

    pub fn block_ref(&self, l: i64) -> Option<&CMatrix> {
        let band = self.band() as i64;
        (l.abs() <= band).then(|| &self.blocks[(l + band) as usize])
    }

    pub fn eval(&self, theta: f64) -> CMatrix {
        let band = self.band() as i64;
        let mut out = CMatrix::zeros(self.d_b(), self.d_b());
        for (i, b) in self.blocks.iter().enumerate() {
            out += b * C64::from_polar(1.0, (i as i64 - band) as f64 * theta);
        }
        crate::numerics::hermitian_part(&out)
    }

    pub fn is_rank_one(&self) -> bool {
        self.projectors.iter().all(|p| crate::numerics::trace(p).re.round() == 1.0)
    }

    /// Unit vector spanning `Pi_k` when it has rank one.
    pub fn rank_one_vector(&self, k: usize) -> Option<Vec<C64>> {
        let p = &self.projectors[k];
        if crate::numerics::trace(p).re.round() != 1.0 {
            return None;
        }
        let j = (0..p.ncols()).max_by(|&a, &b| p[(a, a)].re.total_cmp(&p[(b, b)].re))?;
        let col = p.column(j);
        let nrm = col.norm();
        Some(col.iter().map(|z| z / nrm).collect())
    }

    /// `f_k(theta) = tr(Pi_k Xi(theta))`, meaningful for rank-one `Pi_k`.
    pub fn density(&self, k: usize, theta: f64) -> f64 {
        crate::numerics::trace_product(&self.projectors[k], &self.eval(theta)).re
    }

    /// The symbol `theta -> Xi(theta + gamma)`.
    pub fn phase_shifted(&self, gamma: f64) -> Self {
        let band = self.band() as i64;
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| b * C64::from_polar(1.0, (i as i64 - band) as f64 * gamma))
            .collect();
        Self { blocks, projectors: self.projectors.clone() }
    }

    /// Checks `eps <= Xi(theta) <= 1 - eps` on the nodes of `grid`.
    pub fn check_interior(&self, eps: f64, grid: &PeriodicGrid, tol: &Tolerances) -> Result<()> {
        let ranges = grid.try_sample(|t| {
            let e = herm_eig(&self.eval(t), tol.herm)?;
            Ok((e.min(), e.max()))
        })?;
        let min = ranges.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
        let max = ranges.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        if min < eps || max > 1.0 - eps {
            return Err(Error::SpectrumOutOfRange { min, max });
        }
        Ok(())
    }
}

fn check_projectors(projectors: &[CMatrix], db: usize, tol: &Tolerances) -> Result<()> {
    if projectors.is_empty() {
        return Err(Error::InvalidProjectors("no projectors".into()));
    }
    let mut sum = CMatrix::zeros(db, db);
    for (k, p) in projectors.iter().enumerate() {
        if p.shape() != (db, db) {
            return Err(Error::InvalidProjectors(format!("projector {k} has shape {:?}", p.shape())));
        }
        if hermiticity_defect(p) > tol.herm || max_abs(&(p * p - p)) > tol.herm {
            return Err(Error::InvalidProjectors(format!("projector {k} is not an orthogonal projector")));
        }
        if crate::numerics::trace(p).re < 0.5 {
            return Err(Error::InvalidProjectors(format!("projector {k} vanishes")));
        }
        sum += p;
    }
    if max_abs(&(sum - CMatrix::identity(db, db))) > tol.herm {
        return Err(Error::InvalidProjectors("projectors do not resolve the identity".into()));
    }
    Ok(())
}

/// Checks `0 <= delta0 <= 1`.
pub fn check_sample_initial(delta0: &CMatrix, d_s: usize, tol: &Tolerances) -> Result<()> {
    if delta0.shape() != (d_s, d_s) {
        return Err(Error::DimensionMismatch(format!("initial sample state {:?}", delta0.shape())));
    }
    let e = herm_eig(delta0, tol.herm)?;
    if e.min() < -tol.clip || e.max() > 1.0 + tol.clip {
        return Err(Error::SpectrumOutOfRange { min: e.min(), max: e.max() });
    }
    Ok(())
}
