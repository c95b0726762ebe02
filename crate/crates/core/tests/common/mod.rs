#![allow(dead_code)]

use fermiflux_core::model::{build_block_unitary, check_sp, BlockUnitary, CouplingSpec, Density, ReservoirSymbol};
use fermiflux_core::numerics::{c64, CMatrix, Tolerances};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c64(gaussian(rng), gaussian(rng)))
}

pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    random_matrix(rng, d, d).qr().q()
}

/// Density with Fourier band at most 2 and values inside `[0.1, 0.9]`.
pub fn random_density<R: Rng>(rng: &mut R) -> Density {
    let band = rng.gen_range(0..=2);
    if band == 0 {
        return Density::Constant(rng.gen_range(0.15..0.85));
    }
    let mut cos = vec![rng.gen_range(0.35..0.65)];
    let mut sin = vec![0.0];
    for _ in 0..band {
        cos.push(rng.gen_range(-0.06..0.06));
        sin.push(rng.gen_range(-0.06..0.06));
    }
    Density::Fourier { cos, sin }
}

pub struct RandomModel {
    pub spec: CouplingSpec,
    pub z: BlockUnitary,
    pub res: ReservoirSymbol,
}

/// Random walk and coupling with one rank-one projector per reservoir.
pub fn random_rank_one_model<R: Rng>(rng: &mut R, tol: &Tolerances) -> RandomModel {
    let n_b = rng.gen_range(1..=3);
    let densities: Vec<Density> = (0..n_b).map(|_| random_density(rng)).collect();
    let res = ReservoirSymbol::standard(&densities, tol).unwrap();
    random_coupling(rng, res, tol)
}

/// Random walk and coupling with scalar densities on a rank-two and a rank-one projector.
pub fn random_general_model<R: Rng>(rng: &mut R, tol: &Tolerances) -> RandomModel {
    let basis = random_unitary(rng, 3);
    let p0 = basis.columns(0, 2) * basis.columns(0, 2).adjoint();
    let p1 = basis.column(2) * basis.column(2).adjoint();
    let f0 = random_density(rng).coefficients();
    let f1 = random_density(rng).coefficients();
    let band = f0.len().max(f1.len()) / 2;
    let coeff = |f: &[fermiflux_core::C64], l: i64| {
        let b = (f.len() / 2) as i64;
        if l.abs() > b { c64(0.0, 0.0) } else { f[(l + b) as usize] }
    };
    let blocks = (-(band as i64)..=band as i64)
        .map(|l| &p0 * coeff(&f0, l) + &p1 * coeff(&f1, l))
        .collect();
    let res = ReservoirSymbol::new(blocks, vec![p0, p1], tol).unwrap();
    random_coupling(rng, res, tol)
}

fn random_coupling<R: Rng>(rng: &mut R, res: ReservoirSymbol, tol: &Tolerances) -> RandomModel {
    loop {
        let d_s = rng.gen_range(2..=4);
        let w = random_unitary(rng, d_s);
        let a = random_matrix(rng, d_s, res.d_b()) * c64(0.5, 0.0);
        let alpha = rng.gen_range(0.4..1.2);
        let spec = CouplingSpec::new(w, a, alpha, tol).unwrap();
        let z = build_block_unitary(&spec, tol).unwrap();
        if matches!(check_sp(&z, tol), Ok(r) if r < 0.995) {
            return RandomModel { spec, z, res };
        }
    }
}
