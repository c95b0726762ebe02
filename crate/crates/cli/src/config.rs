use anyhow::{bail, Context};
use fermiflux_core::model::{build_block_unitary, BlockUnitary, CouplingSpec, Density, ReservoirSymbol};
use fermiflux_core::numerics::{c64, eye, CMatrix, Tolerances};
use fermiflux_core::presets::{build_cycle_model, CycleModelParams};
use serde::Deserialize;
use std::path::Path;

pub type Complex = [f64; 2];
pub type MatrixJson = Vec<Vec<Complex>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub reservoirs: Option<ReservoirConfig>,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub preset: Option<String>,
    pub params: Option<CycleConfig>,
    pub coupling: Option<CouplingConfig>,
    pub blocks: Option<BlocksConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleConfig {
    pub n: usize,
    pub phi: f64,
    pub beta: f64,
    pub alpha: f64,
    #[serde(default)]
    pub gamma: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub w: MatrixJson,
    pub a: MatrixJson,
    pub alpha: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlocksConfig {
    pub c: MatrixJson,
    pub z_bs: MatrixJson,
    pub z_sb: MatrixJson,
    pub m: MatrixJson,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DensityConfig {
    Constant { value: f64 },
    Fourier {
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    Grid { values: Vec<f64> },
}

impl From<&DensityConfig> for Density {
    fn from(d: &DensityConfig) -> Self {
        match d {
            DensityConfig::Constant { value } => Density::Constant(*value),
            DensityConfig::Fourier { cos, sin } => Density::Fourier { cos: cos.clone(), sin: sin.clone() },
            DensityConfig::Grid { values } => Density::Grid(values.clone()),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirConfig {
    pub densities: Option<Vec<DensityConfig>>,
    /// Coupling vectors `psi_k`; the standard basis when absent.
    pub vectors: Option<Vec<Vec<Complex>>>,
    /// Fourier blocks `Xi_{-band}, ..., Xi_{band}`.
    pub blocks: Option<Vec<MatrixJson>>,
    pub projectors: Option<Vec<MatrixJson>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub eig: Option<f64>,
    pub herm: Option<f64>,
    pub sp: Option<f64>,
    pub stein: Option<f64>,
    pub clip: Option<f64>,
    pub unit: Option<f64>,
    pub rank: Option<f64>,
    pub cluster: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    pub grid: usize,
    pub truncation: usize,
    pub t_max: usize,
    pub alphas: Vec<f64>,
    pub eps_clip: f64,
    pub interior_margin: f64,
    pub delta0: Option<MatrixJson>,
    pub tolerances: ToleranceConfig,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            grid: 256,
            truncation: 200,
            t_max: 150,
            alphas: vec![0.04, 0.02, 0.01],
            eps_clip: 1e-12,
            interior_margin: 0.0,
            delta0: None,
            tolerances: ToleranceConfig::default(),
        }
    }
}

impl NumericsConfig {
    pub fn tolerances(&self) -> Tolerances {
        let d = Tolerances::default();
        let t = &self.tolerances;
        Tolerances {
            eig: t.eig.unwrap_or(d.eig),
            herm: t.herm.unwrap_or(d.herm),
            sp: t.sp.unwrap_or(d.sp),
            stein: t.stein.unwrap_or(d.stein),
            clip: t.clip.unwrap_or(d.clip),
            unit: t.unit.unwrap_or(d.unit),
            rank: t.rank.unwrap_or(d.rank),
            cluster: t.cluster.unwrap_or(d.cluster),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
    /// Dump the final lattice matrix of `evolve` to this file inside the output directory.
    pub lattice_dump: Option<String>,
}

pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    cfg.check_sources()?;
    Ok(cfg)
}

pub fn matrix(spec: &MatrixJson, what: &str) -> anyhow::Result<CMatrix> {
    let rows = spec.len();
    let cols = spec.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || spec.iter().any(|r| r.len() != cols) {
        bail!("{what} must be a non-empty rectangular array of [re, im] pairs");
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| c64(spec[i][j][0], spec[i][j][1])))
}

pub fn matrix_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}


/// The model and reservoirs described by a config.
pub struct Setup {
    pub spec: Option<CouplingSpec>,
    pub z: BlockUnitary,
    pub res: ReservoirSymbol,
    pub tol: Tolerances,
}

impl RunConfig {
    pub fn check_sources(&self) -> anyhow::Result<()> {
        let m = &self.model;
        let sources = [m.preset.is_some(), m.coupling.is_some(), m.blocks.is_some()];
        if sources.iter().filter(|s| **s).count() != 1 {
            bail!("model needs exactly one of preset, coupling or blocks");
        }
        if m.preset.is_some() != m.params.is_some() {
            bail!("model params go together with a preset");
        }
        if let Some(p) = &m.preset {
            if p != "cycle" {
                bail!("unknown preset {p:?}");
            }
        }
        let r = self.reservoirs.as_ref().context("missing reservoirs section")?;
        if r.densities.is_some() == r.blocks.is_some() {
            bail!("reservoirs need exactly one of densities or blocks");
        }
        if r.blocks.is_some() != r.projectors.is_some() {
            bail!("reservoir blocks need projectors");
        }
        if r.vectors.is_some() && r.densities.is_none() {
            bail!("reservoir vectors go together with densities");
        }
        Ok(())
    }

    pub fn reservoir_densities(&self) -> Option<Vec<Density>> {
        let r = self.reservoirs.as_ref()?;
        Some(r.densities.as_ref()?.iter().map(Density::from).collect())
    }

    /// Coupling spec for models given by `W`, `A` and `alpha`.
    pub fn coupling(&self, tol: &Tolerances) -> anyhow::Result<Option<CouplingSpec>> {
        let m = &self.model;
        if let Some(p) = &m.params {
            let densities = self.reservoir_densities().context("the cycle preset needs reservoir densities")?;
            if densities.len() != 2 {
                bail!("the cycle preset has two reservoirs, got {}", densities.len());
            }
            let mut params =
                CycleModelParams::new(p.n, p.phi, p.beta, p.alpha, densities[0].clone(), densities[1].clone());
            params.gamma = p.gamma;
            return Ok(Some(build_cycle_model(&params, tol)?.0));
        }
        if let Some(c) = &m.coupling {
            return Ok(Some(CouplingSpec::new(matrix(&c.w, "w")?, matrix(&c.a, "a")?, c.alpha, tol)?));
        }
        Ok(None)
    }

    pub fn reservoir(&self, tol: &Tolerances) -> anyhow::Result<ReservoirSymbol> {
        let r = self.reservoirs.as_ref().context("missing reservoirs section")?;
        if let Some(blocks) = &r.blocks {
            let blocks = blocks.iter().map(|b| matrix(b, "reservoir block")).collect::<anyhow::Result<_>>()?;
            let projectors = r
                .projectors
                .iter()
                .flatten()
                .map(|p| matrix(p, "projector"))
                .collect::<anyhow::Result<_>>()?;
            return Ok(ReservoirSymbol::new(blocks, projectors, tol)?);
        }
        let densities = self.reservoir_densities().unwrap_or_default();
        match &r.vectors {
            Some(vs) => {
                let vectors: Vec<Vec<_>> = vs.iter().map(|v| v.iter().map(|z| c64(z[0], z[1])).collect()).collect();
                Ok(ReservoirSymbol::from_densities(&vectors, &densities, tol)?)
            }
            None => Ok(ReservoirSymbol::standard(&densities, tol)?),
        }
    }

    pub fn block_unitary(&self, spec: Option<&CouplingSpec>, tol: &Tolerances) -> anyhow::Result<BlockUnitary> {
        match (spec, &self.model.blocks) {
            (Some(s), _) => Ok(build_block_unitary(s, tol)?),
            (None, Some(b)) => Ok(BlockUnitary::new(
                matrix(&b.c, "c")?,
                matrix(&b.z_bs, "z_bs")?,
                matrix(&b.z_sb, "z_sb")?,
                matrix(&b.m, "m")?,
                tol,
            )?),
            (None, None) => bail!("model has no source"),
        }
    }

    pub fn setup(&self) -> anyhow::Result<Setup> {
        let tol = self.numerics.tolerances();
        let spec = self.coupling(&tol)?;
        let z = self.block_unitary(spec.as_ref(), &tol)?;
        let res = self.reservoir(&tol)?;
        if res.d_b() != z.d_b() {
            return Err(fermiflux_core::Error::DimensionMismatch(format!(
                "reservoir dimension {} against coupling dimension {}",
                res.d_b(),
                z.d_b()
            ))
            .into());
        }
        Ok(Setup { spec, z, res, tol })
    }

    pub fn delta0(&self, d_s: usize) -> anyhow::Result<CMatrix> {
        match &self.numerics.delta0 {
            Some(m) => matrix(m, "delta0"),
            None => Ok(eye(d_s) * c64(0.5, 0.0)),
        }
    }
}
