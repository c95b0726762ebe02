//! Brute-force evolution on a periodic lattice truncation.

use crate::model::{check_sample_initial, BlockUnitary, ReservoirSymbol};
use crate::numerics::{log_odds, trace_product, CMatrix, Tolerances, C64};
use crate::{Error, Result};
use std::f64::consts::TAU;
use std::io::Write;

/// One-step unitary on `l2({-L..L}) (x) H_B (+) H_S`; the shift wraps around.
#[derive(Debug, Clone)]
pub struct LatticeUnitary {
    z: BlockUnitary,
    radius: usize,
}

impl LatticeUnitary {
    pub fn new(z: &BlockUnitary, radius: usize) -> Result<Self> {
        if radius == 0 {
            return Err(Error::InvalidArgument("truncation radius must be positive".into()));
        }
        Ok(Self { z: z.clone(), radius })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn sites(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn dim(&self) -> usize {
        self.sites() * self.z.d_b() + self.z.d_s()
    }

    /// First row of site `n` (wrapped into `-L..L`).
    pub fn site_offset(&self, n: i64) -> usize {
        let r = self.sites() as i64;
        let i = (n + self.radius as i64).rem_euclid(r) as usize;
        i * self.z.d_b()
    }

    pub fn sample_offset(&self) -> usize {
        self.sites() * self.z.d_b()
    }

    /// `U x` for a block of columns `x`.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let db = self.z.d_b();
        let ds = self.z.d_s();
        let cols = x.ncols();
        let mut out = CMatrix::zeros(x.nrows(), cols);
        let l = self.radius as i64;
        for n in -l..=l {
            if n == -1 {
                continue;
            }
            let src = self.site_offset(n + 1);
            let dst = self.site_offset(n);
            out.rows_mut(dst, db).copy_from(&x.rows(src, db));
        }
        let s = self.sample_offset();
        let site0 = x.rows(self.site_offset(0), db);
        let sample = x.rows(s, ds);
        out.rows_mut(self.site_offset(-1), db)
            .copy_from(&(&self.z.c * site0 + &self.z.z_bs * sample));
        out.rows_mut(s, ds).copy_from(&(&self.z.z_sb * site0 + &self.z.m * sample));
        out
    }

    pub fn dense(&self) -> CMatrix {
        self.apply(&CMatrix::identity(self.dim(), self.dim()))
    }

    /// `U t U*`.
    pub fn conjugate(&self, t: &CMatrix) -> CMatrix {
        self.apply(&self.apply(t).adjoint()).adjoint()
    }
}

pub fn build_lattice_unitary(z: &BlockUnitary, radius: usize) -> Result<CMatrix> {
    Ok(LatticeUnitary::new(z, radius)?.dense())
}

/// Joint one-particle state on the truncated lattice.
#[derive(Debug, Clone)]
pub struct LatticeState {
    unitary: LatticeUnitary,
    symbol: ReservoirSymbol,
    time: usize,
    initial: CMatrix,
    initial_sample: CMatrix,
    current: CMatrix,
}

/// Sum of the blocks `Xi_{d + qR}` over all wraps `q`.
fn wrapped_block(res: &ReservoirSymbol, d: i64, r: i64) -> CMatrix {
    let mut out = CMatrix::zeros(res.d_b(), res.d_b());
    let b = res.band() as i64;
    let reach = b / r + 2;
    for q in -reach..=reach {
        let l = d + q * r;
        if l.abs() <= b {
            out += res.block(l);
        }
    }
    out
}

pub fn init_lattice_state(
    z: &BlockUnitary,
    res: &ReservoirSymbol,
    delta0: &CMatrix,
    radius: usize,
    tol: &Tolerances,
) -> Result<LatticeState> {
    if res.d_b() != z.d_b() {
        return Err(Error::DimensionMismatch(format!("reservoir {} vs model {}", res.d_b(), z.d_b())));
    }
    check_sample_initial(delta0, z.d_s(), tol)?;
    if res.band() >= radius {
        return Err(Error::InvalidArgument(format!("band {} not below radius {}", res.band(), radius)));
    }
    let u = LatticeUnitary::new(z, radius)?;
    let r = u.sites() as i64;
    let db = z.d_b();
    let blocks: Vec<CMatrix> = (0..r).map(|d| wrapped_block(res, d, r)).collect();
    let mut t = CMatrix::zeros(u.dim(), u.dim());
    for i in 0..r {
        for j in 0..r {
            let d = (j - i).rem_euclid(r) as usize;
            t.view_mut((i as usize * db, j as usize * db), (db, db)).copy_from(&blocks[d]);
        }
    }
    let s = u.sample_offset();
    t.view_mut((s, s), (z.d_s(), z.d_s())).copy_from(delta0);
    Ok(LatticeState {
        unitary: u,
        symbol: res.clone(),
        time: 0,
        initial_sample: delta0.clone(),
        initial: t.clone(),
        current: t,
    })
}

impl LatticeState {
    pub fn radius(&self) -> usize {
        self.unitary.radius
    }

    pub fn time(&self) -> usize {
        self.time
    }

    /// Last time at which the observed blocks are free of wrap-around effects.
    pub fn horizon(&self) -> usize {
        self.radius() - self.symbol.band()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.current
    }

    pub fn initial(&self) -> &CMatrix {
        &self.initial
    }

    pub fn unitary(&self) -> &LatticeUnitary {
        &self.unitary
    }

    pub fn evolve(&mut self, steps: usize) -> Result<()> {
        if self.time + steps > self.horizon() {
            return Err(Error::TruncationExceeded { time: self.time + steps, horizon: self.horizon() });
        }
        for _ in 0..steps {
            self.current = self.unitary.conjugate(&self.current);
            self.time += 1;
        }
        Ok(())
    }

    pub fn sample(&self) -> CMatrix {
        let s = self.unitary.sample_offset();
        let ds = self.unitary.z.d_s();
        self.current.view((s, s), (ds, ds)).into_owned()
    }

    /// Block between sites `n` and `m`.
    pub fn env_block(&self, n: i64, m: i64) -> CMatrix {
        let db = self.unitary.z.d_b();
        let (i, j) = (self.unitary.site_offset(n), self.unitary.site_offset(m));
        self.current.view((i, j), (db, db)).into_owned()
    }

    /// `tr[X (T_t - Xi_0)]` at site `-1`: what leaves the sample during the last step.
    pub fn flux(&self, x: &CMatrix) -> f64 {
        trace_product(x, &(self.env_block(-1, -1) - self.symbol.block(0))).re
    }

    /// Particle fluxes into every reservoir.
    pub fn currents(&self) -> Vec<f64> {
        self.symbol.projectors().iter().map(|p| self.flux(p)).collect()
    }

    /// `log(1 - T_0) - log T_0`, built from the circulant structure.
    pub fn entropy_generator(&self, eps_clip: f64, tol: &Tolerances) -> Result<CMatrix> {
        let u = &self.unitary;
        let r = u.sites();
        let db = u.z.d_b();
        let nodes: Vec<CMatrix> = (0..r)
            .map(|j| log_odds(&self.symbol.eval(TAU * j as f64 / r as f64), eps_clip, tol.clip, tol.herm))
            .collect::<Result<_>>()?;
        let blocks: Vec<CMatrix> = (0..r)
            .map(|d| {
                let mut acc = CMatrix::zeros(db, db);
                for (j, g) in nodes.iter().enumerate() {
                    let phase = C64::from_polar(1.0 / r as f64, -TAU * (d * j) as f64 / r as f64);
                    acc += g * phase;
                }
                acc
            })
            .collect();
        let mut k = CMatrix::zeros(u.dim(), u.dim());
        for i in 0..r {
            for j in 0..r {
                let d = (j + r - i) % r;
                k.view_mut((i * db, j * db), (db, db)).copy_from(&blocks[d]);
            }
        }
        let s = u.sample_offset();
        let ds = u.z.d_s();
        let ks = log_odds(&self.initial_sample, eps_clip, tol.clip, tol.herm)?;
        k.view_mut((s, s), (ds, ds)).copy_from(&ks);
        Ok(k)
    }

    /// `t^{-1} S(T_t | T_0) = t^{-1} tr[(T_t - T_0) K]` for the generator `K`.
    pub fn entropy(&self, generator: &CMatrix) -> f64 {
        if self.time == 0 {
            return 0.0;
        }
        trace_product(&(&self.current - &self.initial), generator).re / self.time as f64
    }

    /// Writes the current matrix: two little-endian `u64` dimensions, then
    /// row-major pairs of little-endian `f64` (re, im).
    pub fn dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let (rows, cols) = self.current.shape();
        w.write_all(&(rows as u64).to_le_bytes())?;
        w.write_all(&(cols as u64).to_le_bytes())?;
        for i in 0..rows {
            for j in 0..cols {
                let z = self.current[(i, j)];
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Reads a matrix written by [`LatticeState::dump`].
pub fn read_dump(bytes: &[u8]) -> Result<CMatrix> {
    let word = |i: usize| -> Result<[u8; 8]> {
        bytes
            .get(8 * i..8 * i + 8)
            .and_then(|s| s.try_into().ok())
            .ok_or_else(|| Error::InvalidArgument("truncated dump".into()))
    };
    let rows = u64::from_le_bytes(word(0)?) as usize;
    let cols = u64::from_le_bytes(word(1)?) as usize;
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let k = 2 + 2 * (i * cols + j);
            m[(i, j)] = C64::new(f64::from_le_bytes(word(k)?), f64::from_le_bytes(word(k + 1)?));
        }
    }
    Ok(m)
}
