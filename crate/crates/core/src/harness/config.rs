//! Experiment configuration files (TOML, `schema_version = 1`).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::entropy::EntropyKind;
use crate::error::{Error, Result};
use crate::fields::{exponents, make_grid, DerivativeBackend, Exponents, GridSpec};
use crate::mollifier::{ConvolutionPath, KernelKind};
use crate::operators::Discretization;
use crate::presets::{PhiPreset, SigmaPreset, UPreset};
use crate::spde::{DriftPreset, Stepper};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    E2Sweep,
    DoubleCommutatorSweep,
    DecompositionCheck,
    LimitResiduals,
    Theorem3Sweep,
    MomentCheck,
    SpdeRun,
    AprioriMc,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::E2Sweep,
        ExperimentKind::DoubleCommutatorSweep,
        ExperimentKind::DecompositionCheck,
        ExperimentKind::LimitResiduals,
        ExperimentKind::Theorem3Sweep,
        ExperimentKind::MomentCheck,
        ExperimentKind::SpdeRun,
        ExperimentKind::AprioriMc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::E2Sweep => "e2-sweep",
            ExperimentKind::DoubleCommutatorSweep => "double-commutator-sweep",
            ExperimentKind::DecompositionCheck => "decomposition-check",
            ExperimentKind::LimitResiduals => "limit-residuals",
            ExperimentKind::Theorem3Sweep => "theorem3-sweep",
            ExperimentKind::MomentCheck => "moment-check",
            ExperimentKind::SpdeRun => "spde-run",
            ExperimentKind::AprioriMc => "apriori-mc",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SigmaConfig {
    pub preset: SigmaPreset,
    pub m: usize,
    pub seed: u64,
}

impl Default for SigmaConfig {
    fn default() -> Self {
        Self { preset: SigmaPreset::Trig, m: 1, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UConfig {
    pub preset: UPreset,
    pub seed: u64,
}

impl Default for UConfig {
    fn default() -> Self {
        Self { preset: UPreset::Trig, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExponentConfig {
    pub p: f64,
    pub q: f64,
}

impl Default for ExponentConfig {
    fn default() -> Self {
        Self { p: 2.0, q: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderConfig {
    pub k_min: u32,
    pub k_max: u32,
    pub kernel: KernelKind,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self { k_min: 2, k_max: 6, kernel: KernelKind::Bump }
    }
}

impl LadderConfig {
    /// `δ_k = 2^{-k}`, largest first.
    pub fn deltas(&self) -> Vec<f64> {
        (self.k_min..=self.k_max).map(|k| 0.5f64.powi(k as i32)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizationConfig {
    pub backend: DerivativeBackend,
    pub dealias: bool,
    pub convolution: ConvolutionPath,
}

impl From<DiscretizationConfig> for Discretization {
    fn from(c: DiscretizationConfig) -> Self {
        Discretization { backend: c.backend, dealias: c.dealias, convolution: c.convolution }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropyConfig {
    pub kind: EntropyKind,
    pub q: f64,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self { kind: EntropyKind::Quadratic, q: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhiConfig {
    pub preset: PhiPreset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpdeConfig {
    pub stepper: Stepper,
    pub drift: DriftPreset,
    /// Final time `T`.
    pub horizon: f64,
    /// Coarsest time step; defaults to `dt_fraction · cfl_dt`. Each extra
    /// level halves it.
    pub dt: Option<f64>,
    pub dt_fraction: f64,
    /// Number of dt-halving levels sharing one Brownian path.
    pub levels: u32,
    pub paths: usize,
    pub seed: u64,
    /// Steps between binary snapshots (0 keeps only the endpoints).
    pub snapshot_every: usize,
}

impl Default for SpdeConfig {
    fn default() -> Self {
        Self {
            stepper: Stepper::Ito,
            drift: DriftPreset::Zero,
            horizon: 0.1,
            dt: None,
            dt_fraction: 1.0,
            levels: 1,
            paths: 8,
            seed: 0,
            snapshot_every: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloConfig {
    /// Independent `u` draws (seeds `u.seed + j`) averaged per ladder rung.
    pub draws: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self { draws: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    /// Re-evaluate every rung with direct quadrature and report the
    /// largest absolute difference.
    pub direct: bool,
}

/// Pass/fail thresholds. A check runs only when its threshold is present.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Criteria {
    pub strictly_decreasing: Option<bool>,
    pub max_final_ratio: Option<f64>,
    pub slope_min: Option<f64>,
    pub slope_max: Option<f64>,
    /// Every primary norm below this makes the run degenerate.
    pub degenerate_below: Option<f64>,
    pub max_identity_residual: Option<f64>,
    pub max_vanishing: Option<f64>,
    pub max_oracle_absdiff: Option<f64>,
    pub max_moment_error: Option<f64>,
    pub min_moment_resolution: Option<f64>,
    pub max_first_moment_band: Option<f64>,
    pub max_mass_drift: Option<f64>,
    pub max_linf: Option<f64>,
    pub max_static_rel_error: Option<f64>,
    pub max_stderr_multiple: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub formats: Vec<ReportFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, formats: vec![ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: ExperimentKind,
    pub grid: GridConfig,
    #[serde(default)]
    pub sigma: SigmaConfig,
    #[serde(default)]
    pub u: UConfig,
    #[serde(default)]
    pub exponents: ExponentConfig,
    #[serde(default)]
    pub ladder: LadderConfig,
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub entropy: EntropyConfig,
    #[serde(default)]
    pub phi: PhiConfig,
    #[serde(default)]
    pub spde: SpdeConfig,
    #[serde(default)]
    pub monte_carlo: MonteCarloConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub criteria: Criteria,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<usize>,
    pub delta_min_k: Option<u32>,
    pub delta_max_k: Option<u32>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is representable as TOML")
    }

    /// `--delta-min-k`/`--delta-max-k` bound the ladder exponents; `--seed`
    /// sets every seed.
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(n) = o.n {
            self.grid.n = n;
        }
        if let Some(k) = o.delta_min_k {
            self.ladder.k_min = k;
        }
        if let Some(k) = o.delta_max_k {
            self.ladder.k_max = k;
        }
        if let Some(seed) = o.seed {
            self.sigma.seed = seed;
            self.u.seed = seed;
            self.spde.seed = seed;
        }
        if let Some(out) = &o.out {
            self.output.dir = Some(out.clone());
        }
        self.validate()
    }

    /// Schema-level checks; numerical preconditions (kernel resolution, CFL)
    /// are left to the modules that own them.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version));
        }
        make_grid(self.grid.d, self.grid.n).map_err(|e| Error::Config(e.to_string()))?;
        exponents(self.exponents.p, self.exponents.q).map_err(|e| Error::Config(e.to_string()))?;
        if self.sigma.m == 0 {
            return bad("sigma.m must be positive".into());
        }
        if self.ladder.k_min > self.ladder.k_max {
            return bad(format!("ladder k_min = {} exceeds k_max = {}", self.ladder.k_min, self.ladder.k_max));
        }
        if self.ladder.k_max > 60 {
            return bad("ladder k_max too large".into());
        }
        if self.monte_carlo.draws == 0 {
            return bad("monte_carlo.draws must be at least 1".into());
        }
        let s = &self.spde;
        if !(s.horizon > 0.0) || !(s.dt_fraction > 0.0) || s.dt.is_some_and(|dt| !(dt > 0.0)) {
            return bad("spde horizon, dt and dt_fraction must be positive".into());
        }
        if s.levels == 0 || s.levels > 20 {
            return bad("spde.levels must lie in 1..=20".into());
        }
        if self.output.formats.is_empty() {
            return bad("output.formats must not be empty".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> GridSpec {
        make_grid(self.grid.d, self.grid.n).expect("validated")
    }

    pub fn exponents(&self) -> Exponents {
        exponents(self.exponents.p, self.exponents.q).expect("validated")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "schema_version = 1\nkind = \"e2-sweep\"\n[grid]\nd = 1\nn = 256\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::E2Sweep);
        assert_eq!(cfg.sigma.preset, SigmaPreset::Trig);
        assert_eq!(cfg.ladder.deltas(), vec![0.25, 0.125, 0.0625, 0.03125, 0.015625]);
        assert_eq!(cfg.criteria, Criteria::default());
    }

    #[test]
    fn toml_round_trip() {
        let text = format!(
            "{MINIMAL}[sigma]\npreset = \"fourier-decay 3\"\nm = 2\n[u]\npreset = \"box-indicator 0.25 0.75\"\n\
             [criteria]\nmax_final_ratio = 0.1\n[spde]\ndt = 1e-6\n"
        );
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn schema_violations_are_config_errors() {
        for text in [
            MINIMAL.replace("schema_version = 1", "schema_version = 2"),
            MINIMAL.replace("e2-sweep", "nonsense"),
            format!("{MINIMAL}bogus = 1\n"),
            format!("{MINIMAL}[sigma]\ncolour = \"red\"\n"),
            MINIMAL.replace("n = 256", "n = 100"),
            format!("{MINIMAL}[exponents]\np = 2\nq = 3\n"),
            format!("{MINIMAL}[ladder]\nk_min = 5\nk_max = 3\n"),
            format!("{MINIMAL}[sigma]\npreset = \"swirl\"\n"),
        ] {
            let err = ExperimentConfig::from_toml(&text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}: {err}");
        }
    }

    #[test]
    fn overrides() {
        let mut cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let o = Overrides { n: Some(512), delta_min_k: Some(3), delta_max_k: Some(5), seed: Some(9), out: None };
        cfg.apply(&o).unwrap();
        assert_eq!((cfg.grid.n, cfg.ladder.k_min, cfg.ladder.k_max), (512, 3, 5));
        assert_eq!((cfg.sigma.seed, cfg.u.seed, cfg.spde.seed), (9, 9, 9));
        assert!(cfg.apply(&Overrides { n: Some(3), ..Default::default() }).is_err());
    }
}
