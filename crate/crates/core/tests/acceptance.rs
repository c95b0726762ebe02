//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use common::{random_general_model, random_rank_one_model, rng};
use fermiflux_core::entropy::{entropy_rate_adaptive, entropy_rate_exact};
use fermiflux_core::model::{build_block_unitary, Density, ReservoirSymbol};
use fermiflux_core::numerics::{c64, eye, op_norm, PeriodicGrid, Tolerances};
use fermiflux_core::oracle::init_lattice_state;
use fermiflux_core::perturbation::{alpha_sweep, currents_leading, kirchhoff_star, loglog_slope, splitting, star_closed_form};
use fermiflux_core::presets::{build_cycle_model, crossing_densities, cycle_channels, reference_cycle};
use fermiflux_core::scattering::{scattering_matrix, transmission};
use fermiflux_core::steady::{sample_at_time, sample_at_time_ris, Stationary};
use fermiflux_core::transport::currents_with;
use rand::Rng;
use std::io::Write;
use std::sync::OnceLock;

const EPS_CLIP: f64 = 1e-12;

/// Written to the stderr handle directly so the line shows without `--nocapture`.
fn report(n: &str, what: &str, pass: bool, detail: String) {
    let line = format!("criterion {n} {}: {what}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
}

#[test]
fn criterion_1_unitarity() {
    let tol = Tolerances::default();
    let mut r = rng(1);
    let grid = PeriodicGrid::new(64).unwrap();
    let (mut worst_unit, mut worst_stoch) = (0.0f64, 0.0f64);
    for i in 0..50 {
        let m = if i % 5 == 4 { random_general_model(&mut r, &tol) } else { random_rank_one_model(&mut r, &tol) };
        for theta in grid.nodes() {
            let y = scattering_matrix(&m.z, theta, &tol).unwrap();
            worst_unit = worst_unit.max(op_norm(&(&y * y.adjoint() - eye(y.nrows()))));
            if m.res.is_rank_one() {
                let c = transmission(&m.z, &m.res, theta, &tol).unwrap().matrix;
                for k in 0..c.nrows() {
                    worst_stoch = worst_stoch.max((c.row(k).sum() - 1.0).abs());
                    worst_stoch = worst_stoch.max((c.column(k).sum() - 1.0).abs());
                }
            }
        }
    }
    let pass = worst_unit <= 1e-10 && worst_stoch <= 1e-11;
    report("1", "scattering unitarity", pass, format!("max |YY* - 1| = {worst_unit:.2e}, max stochasticity defect = {worst_stoch:.2e}"));
    assert!(pass);
}

#[test]
fn criterion_2_conservation() {
    let tol = Tolerances::default();
    let mut r = rng(2);
    let grid = PeriodicGrid::new(64).unwrap();
    let mut worst = 0.0f64;
    for i in 0..50 {
        let m = if i % 5 == 4 { random_general_model(&mut r, &tol) } else { random_rank_one_model(&mut r, &tol) };
        let st = Stationary::new(&m.z, &m.res, &tol).unwrap();
        worst = worst.max(currents_with(&st, &grid, &tol).unwrap().conservation_defect);
    }
    let pass = worst <= 1e-10;
    report("2", "current conservation", pass, format!("max |sum J_k| = {worst:.2e}"));
    assert!(pass);
}

/// Everything measured along one lattice run of the reference cycle.
struct CycleRun {
    currents: Vec<f64>,
    flux_at_150: Vec<f64>,
    corner_gap_50: f64,
    corner_vs_steady_200: f64,
    sigma: f64,
    sigma_t: Vec<(usize, f64)>,
}

fn cycle_run() -> &'static CycleRun {
    static RUN: OnceLock<CycleRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let tol = Tolerances::default();
        let p = reference_cycle();
        let (spec, res) = build_cycle_model(&p, &tol).unwrap();
        let z = build_block_unitary(&spec, &tol).unwrap();
        let st = Stationary::new(&z, &res, &tol).unwrap();
        let currents = currents_with(&st, &PeriodicGrid::new(16).unwrap(), &tol).unwrap().currents;
        let delta_inf = st.sample().unwrap().delta;
        let sigma = entropy_rate_exact(&st, EPS_CLIP, &tol).unwrap();
        let d0 = eye(z.d_s()) * c64(0.5, 0.0);
        let mut lattice = init_lattice_state(&z, &res, &d0, 200, &tol).unwrap();
        let generator = lattice.entropy_generator(EPS_CLIP, &tol).unwrap();
        let mut corner_gap_50 = 0.0f64;
        let mut flux_at_150 = Vec::new();
        let mut sigma_t = Vec::new();
        for t in 1..=200 {
            lattice.evolve(1).unwrap();
            if t <= 50 {
                corner_gap_50 = corner_gap_50.max(op_norm(&(lattice.sample() - sample_at_time(&z, &res, &d0, t))));
            }
            if t == 150 {
                flux_at_150 = lattice.currents();
            }
            if t % 25 == 0 {
                sigma_t.push((t, lattice.entropy(&generator)));
            }
        }
        let corner_vs_steady_200 = op_norm(&(lattice.sample() - delta_inf));
        CycleRun { currents, flux_at_150, corner_gap_50, corner_vs_steady_200, sigma, sigma_t }
    })
}

#[test]
fn criterion_3_oracle_currents() {
    let run = cycle_run();
    let gap = run.flux_at_150.iter().zip(&run.currents).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let pass = gap <= 1e-5;
    report(
        "3",
        "lattice flux at t = 150 against stationary currents",
        pass,
        format!("J = {:?}, flux = {:?}, max gap = {gap:.3e}", run.currents, run.flux_at_150),
    );
    assert!(pass);
}

#[test]
fn criterion_4_oracle_steady_state() {
    let run = cycle_run();
    let pass_limit = run.corner_vs_steady_200 <= 1e-8;
    let pass_recursion = run.corner_gap_50 <= 1e-12;
    report(
        "4a",
        "lattice sample block at t = 200 against the steady state",
        pass_limit,
        format!("|corner - steady| = {:.3e}", run.corner_vs_steady_200),
    );
    report(
        "4b",
        "lattice sample block against the finite-time recursion, t <= 50",
        pass_recursion,
        format!("max gap = {:.3e}", run.corner_gap_50),
    );
    assert!(pass_limit && pass_recursion);
}

#[test]
fn criterion_5_entropy() {
    let tol = Tolerances::default();
    let mut r = rng(5);
    let mut min_sigma = f64::INFINITY;
    let mut worst_forms = 0.0f64;
    for _ in 0..20 {
        let m = random_rank_one_model(&mut r, &tol);
        let e = entropy_rate_adaptive(&m.z, &m.res, 64, 1e-12, 1 << 14, EPS_CLIP, &tol).unwrap();
        min_sigma = min_sigma.min(e.sigma);
        worst_forms = worst_forms.max((e.sigma - e.sigma_flux.unwrap()).abs());
        let st = Stationary::new(&m.z, &m.res, &tol).unwrap();
        min_sigma = min_sigma.min(entropy_rate_exact(&st, EPS_CLIP, &tol).unwrap());
    }
    for _ in 0..10 {
        let m = random_general_model(&mut r, &tol);
        let st = Stationary::new(&m.z, &m.res, &tol).unwrap();
        min_sigma = min_sigma.min(entropy_rate_exact(&st, EPS_CLIP, &tol).unwrap());
    }
    let mut worst_eq = 0.0f64;
    for _ in 0..10 {
        let mut m = random_rank_one_model(&mut r, &tol);
        let f = r.gen_range(0.1..0.9);
        let n = m.res.n_reservoirs();
        m.res = ReservoirSymbol::standard(&vec![Density::Constant(f); n], &tol).unwrap();
        let st = Stationary::new(&m.z, &m.res, &tol).unwrap();
        worst_eq = worst_eq.max(entropy_rate_exact(&st, EPS_CLIP, &tol).unwrap().abs());
    }
    let pass_sign = min_sigma >= -1e-10;
    let pass_eq = worst_eq <= 1e-12;
    let pass_forms = worst_forms <= 1e-9;
    report("5a", "nonnegative entropy production", pass_sign, format!("min sigma = {min_sigma:.3e}"));
    report("5b", "equilibrium produces no entropy", pass_eq, format!("max |sigma| = {worst_eq:.3e}"));
    report("5c", "integral and flux forms agree", pass_forms, format!("max gap = {worst_forms:.3e}"));

    let run = cycle_run();
    let gaps: Vec<f64> = run.sigma_t.iter().map(|(_, s)| (s - run.sigma).abs() / run.sigma).collect();
    let times: Vec<f64> = run.sigma_t.iter().map(|(t, _)| *t as f64).collect();
    let trend = loglog_slope(&times, &gaps);
    let at_150 = run.sigma_t.iter().zip(&gaps).find(|((t, _), _)| *t == 150).map(|(_, g)| *g).unwrap();
    let pass_time = trend < 0.0 && at_150 <= 5e-3;
    report(
        "5d",
        "finite-time entropy rate approaches the stationary rate",
        pass_time,
        format!("sigma = {:.6e}, log-log trend {trend:.3}, relative gaps at t = 25..200: {:?}", run.sigma, gaps.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>()),
    );
    assert!(pass_sign && pass_eq && pass_forms && pass_time);
}

#[test]
fn criterion_6_perturbative_order() {
    let tol = Tolerances::default();
    let (spec, res) = build_cycle_model(&reference_cycle(), &tol).unwrap();
    let sweep = alpha_sweep(&spec, &res, &[0.04, 0.02, 0.01], EPS_CLIP, &tol).unwrap();
    let pass_j = (sweep.current_slope - 4.0).abs() <= 0.5;
    let pass_d = (sweep.delta_slope - 2.0).abs() <= 0.4;
    report("6a", "current residual order", pass_j, format!("slope = {:.4}", sweep.current_slope));
    report("6b", "steady-state residual order", pass_d, format!("slope = {:.4}", sweep.delta_slope));
    assert!(pass_j && pass_d);
}

#[test]
fn criterion_7_circuit_equivalence() {
    let mut r = rng(7);
    let (mut worst_gap, mut worst_sum) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = r.gen_range(2..=6);
        let f: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..1.0)).collect();
        let g: Vec<f64> = (0..n).map(|_| if r.gen_bool(0.1) { 0.0 } else { r.gen_range(0.0..1.0) }).collect();
        let closed = star_closed_form(&f, &g);
        let solved = kirchhoff_star(&f, &g).unwrap();
        for (a, b) in closed.iter().zip(&solved) {
            worst_gap = worst_gap.max((a - b).abs());
        }
        worst_sum = worst_sum.max(closed.iter().sum::<f64>().abs()).max(solved.iter().sum::<f64>().abs());
    }
    let pass = worst_gap <= 1e-12 && worst_sum <= 1e-12;
    report("7", "star circuit closed form against nodal solve", pass, format!("max gap = {worst_gap:.2e}, max node sum = {worst_sum:.2e}"));
    assert!(pass);
}

#[test]
fn criterion_8_cycle_claims() {
    let tol = Tolerances::default();
    let p = reference_cycle();
    let channels = cycle_channels(&p, &tol).unwrap();
    let in_cone = channels.iter().all(|c| {
        let u = c.lambda.arg().abs();
        u >= p.phi - 1e-9 && u <= std::f64::consts::PI - p.phi + 1e-9
    });
    let simple = channels.len() == 2 * p.n;
    report("8a", "spectrum in cones and simple", in_cone && simple, format!("{} eigenvalues", channels.len()));

    let weight_gap = channels.iter().map(|c| (c.closed_form_weight - c.circuit_weight).abs()).fold(0.0, f64::max);
    let ratios: Vec<String> = channels.iter().map(|c| format!("{:.3}", c.closed_form_weight / c.circuit_weight)).collect();
    let pass_weight = weight_gap <= 1e-9;
    report("8b", "closed-form J_R weight against eigenvector overlaps", pass_weight, format!("max gap = {weight_gap:.3e}, ratios {ratios:?}"));

    let (fl, fr) = crossing_densities(0.3);
    let mut q = p.clone();
    q.f_left = fl;
    q.f_right = fr;
    q.alpha = 0.05;
    let jr = |q: &fermiflux_core::presets::CycleModelParams| {
        let (spec, res) = build_cycle_model(q, &tol).unwrap();
        let lead = currents_leading(&spec, &res, &splitting(&spec, &tol).unwrap())[1];
        let z = build_block_unitary(&spec, &tol).unwrap();
        let st = Stationary::new(&z, &res, &tol).unwrap();
        let exact = currents_with(&st, &PeriodicGrid::new(16).unwrap(), &tol).unwrap().currents[1];
        (lead, exact)
    };
    let plain = jr(&q);
    q.gamma = std::f64::consts::FRAC_PI_2;
    let turned = jr(&q);
    let pass_flip = plain.0 > 0.0 && plain.1 > 0.0 && turned.0 < 0.0 && turned.1 < 0.0;
    report(
        "8c",
        "quarter-turn phase reverses J_R",
        pass_flip,
        format!("W: J_R^(2) = {:.4e}, J_R = {:.4e}; iW: J_R^(2) = {:.4e}, J_R = {:.4e}", plain.0, plain.1, turned.0, turned.1),
    );
    assert!(in_cone && simple && pass_weight && pass_flip);
}

#[test]
fn criterion_9_ris_discrepancy() {
    let tol = Tolerances::default();
    let (spec, _) = build_cycle_model(&reference_cycle(), &tol).unwrap();
    let z = build_block_unitary(&spec, &tol).unwrap();
    let d0 = eye(z.d_s()) * c64(0.5, 0.0);
    let correlated = ReservoirSymbol::standard(
        &[Density::Fourier { cos: vec![0.5, 0.3], sin: vec![0.0, 0.1] }, Density::Constant(0.2)],
        &tol,
    )
    .unwrap();
    let diag = ReservoirSymbol::standard(&[Density::Constant(0.7), Density::Constant(0.2)], &tol).unwrap();
    let max_gap = |res: &ReservoirSymbol, t_max: usize| {
        (1..=t_max)
            .map(|t| op_norm(&(sample_at_time(&z, res, &d0, t) - sample_at_time_ris(&z, res, &d0, t))))
            .fold(0.0, f64::max)
    };
    let with_memory = max_gap(&correlated, 20);
    let without = max_gap(&diag, 100);
    let mut lattice = init_lattice_state(&z, &correlated, &d0, 30, &tol).unwrap();
    lattice.evolve(20).unwrap();
    let lattice_gap = op_norm(&(lattice.sample() - sample_at_time(&z, &correlated, &d0, 20)));
    let pass = with_memory > 1e-6 && without <= 1e-12 && lattice_gap <= 1e-12;
    report(
        "9",
        "memoryless recursion differs only with correlated reservoirs",
        pass,
        format!("correlated gap = {with_memory:.3e}, uncorrelated gap = {without:.3e}, lattice check = {lattice_gap:.3e}"),
    );
    assert!(pass);
}

