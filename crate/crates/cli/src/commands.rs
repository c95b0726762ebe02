use crate::config::{matrix_json, MatrixJson, RunConfig};
use crate::output::{Csv, OutDir};
use anyhow::{bail, Context};
use fermiflux_core::entropy::{entropy_integrand, entropy_rate_exact};
use fermiflux_core::model::{check_kalman, check_sample_initial, check_sp};
use fermiflux_core::numerics::{op_norm, PeriodicGrid};
use fermiflux_core::oracle::init_lattice_state;
use fermiflux_core::perturbation::{alpha_sweep, splitting, star_circuit};
use fermiflux_core::scattering::scattering_matrix;
use fermiflux_core::steady::Stationary;
use fermiflux_core::transport::currents_with;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl Check {
    fn from_result<T>(name: &'static str, r: fermiflux_core::Result<T>, value: impl Fn(&T) -> f64) -> Self {
        match r {
            Ok(v) => Check { name, pass: true, value: Some(value(&v)), message: None },
            Err(e) => Check { name, pass: false, value: None, message: Some(e.to_string()) },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub checks: Vec<Check>,
}

/// Runs every assumption check that applies to the config.
pub fn validate(cfg: &RunConfig, out: Option<&OutDir>) -> anyhow::Result<ValidationReport> {
    let tol = cfg.numerics.tolerances();
    let mut checks = Vec::new();
    let spec = cfg.coupling(&tol)?;
    let z = match cfg.block_unitary(spec.as_ref(), &tol) {
        Ok(z) => {
            checks.push(Check { name: "unitarity", pass: true, value: Some(z.unitarity_defect()), message: None });
            Some(z)
        }
        Err(e) => {
            let core = e.downcast_ref::<fermiflux_core::Error>().cloned().context("building the coupling")?;
            checks.push(Check { name: "unitarity", pass: false, value: None, message: Some(core.to_string()) });
            None
        }
    };
    if let Some(z) = &z {
        checks.push(Check::from_result("spectral_radius", check_sp(z, &tol), |r| *r));
    }
    if let Some(s) = &spec {
        checks.push(Check::from_result("kalman", check_kalman(&s.w, &s.a, &tol), |r| *r as f64));
    }
    match cfg.reservoir(&tol) {
        Ok(res) => {
            checks.push(Check { name: "reservoir_projectors", pass: true, value: Some(res.n_reservoirs() as f64), message: None });
            let grid = PeriodicGrid::new(cfg.numerics.grid)?;
            checks.push(Check::from_result(
                "reservoir_interior",
                res.check_interior(cfg.numerics.interior_margin, &grid, &tol),
                |_| cfg.numerics.interior_margin,
            ));
            if let Some(z) = &z {
                let dims = if res.d_b() == z.d_b() {
                    Ok(())
                } else {
                    Err(fermiflux_core::Error::DimensionMismatch(format!("{} against {}", res.d_b(), z.d_b())))
                };
                checks.push(Check::from_result("dimensions", dims, |_| res.d_b() as f64));
            }
        }
        Err(e) => {
            let core = e.downcast_ref::<fermiflux_core::Error>().cloned().context("building the reservoirs")?;
            checks.push(Check { name: "reservoir_projectors", pass: false, value: None, message: Some(core.to_string()) });
        }
    }
    if let Some(z) = &z {
        let d0 = cfg.delta0(z.d_s())?;
        checks.push(Check::from_result("sample_initial", check_sample_initial(&d0, z.d_s(), &tol), |_| 0.0));
    }
    let report = ValidationReport { pass: checks.iter().all(|c| c.pass), checks };
    if let Some(out) = out {
        out.json("validation.json", &report)?;
    }
    Ok(report)
}

#[derive(Debug, Serialize)]
pub struct SteadySummary {
    pub delta_inf: MatrixJson,
    pub spectral_radius: f64,
    pub stein_residual: f64,
    pub currents: Vec<f64>,
    pub currents_quadrature: Vec<f64>,
    pub conservation_defect: f64,
    pub sigma: f64,
    pub sigma_quadrature: f64,
    pub grid: usize,
}

pub fn steady(cfg: &RunConfig, out: &OutDir) -> anyhow::Result<SteadySummary> {
    let s = cfg.setup()?;
    let st = Stationary::new(&s.z, &s.res, &s.tol)?;
    let sample = st.sample()?;
    let grid = PeriodicGrid::new(cfg.numerics.grid)?;
    let report = currents_with(&st, &grid, &s.tol)?;
    let sigma = entropy_rate_exact(&st, cfg.numerics.eps_clip, &s.tol)?;
    let entropy_nodes = grid.try_sample(|t| {
        let y = scattering_matrix(&s.z, t, &s.tol)?;
        entropy_integrand(&y, &s.res.eval(t), cfg.numerics.eps_clip, &s.tol)
    })?;
    let n_b = s.res.n_reservoirs();
    let mut header = vec!["theta".to_string()];
    header.extend((1..=n_b).map(|k| format!("jhat_{k}")));
    header.push("entropy_integrand".into());
    let mut csv = Csv::new(&header);
    for (j, theta) in report.thetas.iter().enumerate() {
        let mut row = vec![*theta];
        row.extend(&report.integrand[j]);
        row.push(entropy_nodes[j]);
        csv.row(&row);
    }
    out.write("integrands.csv", &csv.into_string())?;
    let summary = SteadySummary {
        delta_inf: matrix_json(&sample.delta),
        spectral_radius: sample.spectral_radius,
        stein_residual: sample.residual,
        currents: report.currents,
        currents_quadrature: report.currents_quadrature,
        conservation_defect: report.conservation_defect,
        sigma,
        sigma_quadrature: grid.mean(&entropy_nodes),
        grid: grid.len(),
    };
    out.json("summary.json", &summary)?;
    Ok(summary)
}

/// Lattice evolution with per-step fluxes, entropy rate and distance to the steady state.
pub fn evolve(cfg: &RunConfig, t_max: usize, out: &OutDir) -> anyhow::Result<Vec<Vec<f64>>> {
    let s = cfg.setup()?;
    let st = Stationary::new(&s.z, &s.res, &s.tol)?;
    let delta_inf = st.sample()?.delta;
    let d0 = cfg.delta0(s.z.d_s())?;
    let mut lattice = init_lattice_state(&s.z, &s.res, &d0, cfg.numerics.truncation, &s.tol)?;
    if t_max > lattice.horizon() {
        return Err(fermiflux_core::Error::TruncationExceeded { time: t_max, horizon: lattice.horizon() }.into());
    }
    let generator = lattice.entropy_generator(cfg.numerics.eps_clip, &s.tol)?;
    let n_b = s.res.n_reservoirs();
    let mut header = vec!["t".to_string()];
    header.extend((1..=n_b).map(|k| format!("flux_{k}")));
    header.extend(["sigma_t".to_string(), "dist_to_Dinf".to_string()]);
    let mut csv = Csv::new(&header);
    let mut rows = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        if t > 0 {
            lattice.evolve(1)?;
        }
        let mut row = vec![t as f64];
        row.extend(lattice.currents());
        row.push(lattice.entropy(&generator));
        row.push(op_norm(&(lattice.sample() - &delta_inf)));
        csv.row(&row);
        rows.push(row);
    }
    out.write("evolution.csv", &csv.into_string())?;
    if let Some(name) = &cfg.outputs.lattice_dump {
        let file = std::fs::File::create(out.path(name))?;
        lattice.dump(std::io::BufWriter::new(file))?;
    }
    Ok(rows)
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub alphas: Vec<f64>,
    pub current_residual_slope: f64,
    pub delta_residual_slope: f64,
}

#[derive(Debug, Serialize)]
pub struct CircuitRecord {
    pub lambda: [f64; 2],
    pub theta: f64,
    pub sources: Vec<f64>,
    pub conductances: Vec<f64>,
    pub currents: Vec<f64>,
    pub currents_kirchhoff: Vec<f64>,
}

pub fn sweep(cfg: &RunConfig, out: &OutDir) -> anyhow::Result<SweepSummary> {
    let s = cfg.setup()?;
    let Some(spec) = &s.spec else {
        bail!("the sweep needs a model given by a walk and a coupling");
    };
    let alphas = &cfg.numerics.alphas;
    let report = alpha_sweep(spec, &s.res, alphas, cfg.numerics.eps_clip, &s.tol)?;
    let n_b = s.res.n_reservoirs();
    let mut header = vec!["alpha".to_string()];
    header.extend((1..=n_b).map(|k| format!("J_{k}")));
    header.extend((1..=n_b).map(|k| format!("alpha2_J2_{k}")));
    header.extend(["residual", "delta_residual", "sigma", "sigma_leading"].map(String::from));
    let mut csv = Csv::new(&header);
    for p in &report.points {
        let mut row = vec![p.alpha];
        row.extend(&p.currents);
        row.extend(&p.currents_leading);
        row.extend([p.current_residual, p.delta_residual, p.sigma, p.sigma_leading.unwrap_or(f64::NAN)]);
        csv.row(&row);
    }
    out.write("sweep.csv", &csv.into_string())?;
    let summary = SweepSummary {
        alphas: alphas.clone(),
        current_residual_slope: report.current_slope,
        delta_residual_slope: report.delta_slope,
    };
    out.json("sweep.json", &summary)?;
    let split = splitting(spec, &s.tol)?;
    if split.simple && s.res.is_rank_one() {
        let circuits: Vec<CircuitRecord> = star_circuit(spec, &s.res, &split)?
            .into_iter()
            .map(|c| CircuitRecord {
                lambda: [c.lambda.re, c.lambda.im],
                theta: c.theta,
                sources: c.sources,
                conductances: c.conductances,
                currents: c.currents,
                currents_kirchhoff: c.currents_kirchhoff,
            })
            .collect();
        out.json("circuits.json", &circuits)?;
    }
    Ok(summary)
}
