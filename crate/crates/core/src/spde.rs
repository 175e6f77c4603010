//! Path simulation of `0 = du + F[u] dt + Σ_k (K u)_k ∘ dB_k`.
//!
//! The Itô stepper integrates the equivalent form
//! `du = -F[u] dt - Σ_k (K u)_k dB_k + ½ K K u dt` by Euler–Maruyama; the
//! Stratonovich stepper is the Heun predictor–corrector on the original form.
//! Both steppers see the same pre-sampled increments, so paths are coupled.
//!
//! Heun is not energy stable for pure transport: per Fourier mode it
//! amplifies by `1 + θ⁴/4` with `θ = σ κ ΔW`. Long Heun runs therefore need
//! steps well below [`cfl_dt`].

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{lq_norm, Exponent, GridSpec, ScalarField, SigmaField};
use crate::io;
use crate::operators::{Discretization, GradientNoise};
use crate::rng::CounterNormal;

/// Relative slack allowed when comparing a step against [`cfl_dt`].
const CFL_SLACK: f64 = 1e-12;
/// Streams reserved per path; one per Brownian component.
const STREAMS_PER_PATH: u64 = 1 << 16;

/// Pre-sampled Brownian increments, `steps × m`, each `Normal(0, dt)`.
///
/// Increment `(n, k)` of path `p` is draw `n` of counter stream
/// `p · 2^16 + k`, scaled by `√dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianDriver {
    m: usize,
    dt: f64,
    steps: usize,
    seed: u64,
    path: u64,
    increments: Vec<f64>,
}

pub fn sample_increments(m: usize, steps: usize, dt: f64, seed: u64) -> Result<BrownianDriver> {
    BrownianDriver::for_path(m, steps, dt, seed, 0)
}

impl BrownianDriver {
    pub fn for_path(m: usize, steps: usize, dt: f64, seed: u64, path: u64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        if m == 0 || m as u64 >= STREAMS_PER_PATH {
            return Err(Error::InvalidArgument(format!("unsupported number of Brownian components {m}")));
        }
        let scale = dt.sqrt();
        let mut increments = vec![0.0; steps * m];
        for k in 0..m {
            let mut normal = CounterNormal::new(seed, path * STREAMS_PER_PATH + k as u64);
            for n in 0..steps {
                increments[n * m + k] = scale * normal.at(n as u64);
            }
        }
        Ok(Self { m, dt, steps, seed, path, increments })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.steps as f64
    }

    /// Increments `dW_k` of step `n`.
    pub fn step(&self, n: usize) -> &[f64] {
        &self.increments[n * self.m..(n + 1) * self.m]
    }

    /// Column `k` as a time series.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.steps).map(|n| self.increments[n * self.m + k]).collect()
    }

    /// `W_k` at the end of the path.
    pub fn endpoint(&self, k: usize) -> f64 {
        self.column(k).iter().sum()
    }

    /// The same path on a grid with twice the step: consecutive pairs summed.
    pub fn coarsen(&self) -> Result<Self> {
        if !self.steps.is_multiple_of(2) {
            return Err(Error::InvalidArgument("coarsening needs an even number of steps".into()));
        }
        let steps = self.steps / 2;
        let mut increments = vec![0.0; steps * self.m];
        for n in 0..steps {
            for k in 0..self.m {
                increments[n * self.m + k] =
                    self.increments[2 * n * self.m + k] + self.increments[(2 * n + 1) * self.m + k];
            }
        }
        Ok(Self { m: self.m, dt: 2.0 * self.dt, steps, seed: self.seed, path: self.path, increments })
    }
}

/// Drift `F[u]`.
#[derive(Debug, Clone, PartialEq)]
pub enum DriftSpec {
    Zero,
    /// `F[u] = ∂_i(b_i u)`.
    LinearDivergence(Vec<ScalarField>),
}

impl DriftSpec {
    fn check(&self, grid: &GridSpec) -> Result<()> {
        if let DriftSpec::LinearDivergence(b) = self {
            if b.len() != grid.d() {
                return Err(Error::ComponentMismatch { expected: grid.d(), found: b.len() });
            }
            for c in b {
                c.check_grid(grid)?;
            }
        }
        Ok(())
    }

    fn apply(&self, u: &ScalarField, noise: &GradientNoise<'_>) -> Option<ScalarField> {
        match self {
            DriftSpec::Zero => None,
            DriftSpec::LinearDivergence(b) => {
                let mut out = ScalarField::zeros(*u.grid());
                for (i, bi) in b.iter().enumerate() {
                    out = &out + &noise.diff(&noise.product(bi, u), i);
                }
                Some(out)
            }
        }
    }
}

/// Named drift generators: `zero` or `linear-divergence a`, the latter with
/// `b_i = a (1 + ½ sin 2πx_{i+1})` (axis index mod d).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum DriftPreset {
    #[default]
    Zero,
    LinearDivergence(f64),
}

impl fmt::Display for DriftPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriftPreset::Zero => f.write_str("zero"),
            DriftPreset::LinearDivergence(a) => write!(f, "linear-divergence {a}"),
        }
    }
}

impl FromStr for DriftPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        match parts.as_slice() {
            ["zero"] => Ok(DriftPreset::Zero),
            ["linear-divergence", a] => {
                a.parse().map(DriftPreset::LinearDivergence).map_err(|_| Error::UnknownPreset(s.to_string()))
            }
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }
}

impl From<DriftPreset> for String {
    fn from(p: DriftPreset) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for DriftPreset {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

pub fn gen_drift(preset: &DriftPreset, grid: GridSpec) -> DriftSpec {
    match *preset {
        DriftPreset::Zero => DriftSpec::Zero,
        DriftPreset::LinearDivergence(a) => {
            let d = grid.d();
            DriftSpec::LinearDivergence(
                (0..d)
                    .map(|i| ScalarField::from_fn(grid, |x| a * (1.0 + 0.5 * (2.0 * PI * x[(i + 1) % d]).sin())))
                    .collect(),
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stepper {
    #[default]
    Ito,
    StratHeun,
}

impl FromStr for Stepper {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ito" => Ok(Stepper::Ito),
            "strat-heun" => Ok(Stepper::StratHeun),
            _ => Err(Error::InvalidArgument(format!("unknown stepper `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpdeState<'a> {
    pub t: f64,
    pub u: ScalarField,
    pub sigma: &'a SigmaField,
    pub drift: &'a DriftSpec,
    pub disc: Discretization,
}

impl<'a> SpdeState<'a> {
    pub fn new(u: ScalarField, sigma: &'a SigmaField, drift: &'a DriftSpec) -> Result<Self> {
        u.check_grid(sigma.grid())?;
        drift.check(sigma.grid())?;
        Ok(Self { t: 0.0, u, sigma, drift, disc: Discretization::default() })
    }

    pub fn with_discretization(mut self, disc: Discretization) -> Self {
        self.disc = disc;
        self
    }

    fn noise(&self) -> GradientNoise<'a> {
        GradientNoise::with_discretization(self.sigma, self.disc)
    }

    fn advance(&self, u: ScalarField, dt: f64) -> Self {
        Self { t: self.t + dt, u, sigma: self.sigma, drift: self.drift, disc: self.disc }
    }
}

/// `0.1 h² / max(1, max_x Σ_{i,k} σ_ik²)`.
pub fn cfl_dt(sigma: &SigmaField, grid: &GridSpec) -> f64 {
    0.1 * grid.h() * grid.h() / sigma.max_frobenius_sq().max(1.0)
}

fn check_step(state: &SpdeState<'_>, dw: &[f64], dt: f64) -> Result<()> {
    let limit = cfl_dt(state.sigma, state.sigma.grid());
    if !(dt > 0.0) || dt > limit * (1.0 + CFL_SLACK) {
        return Err(Error::CflViolation { dt, limit });
    }
    if dw.len() != state.sigma.m() {
        return Err(Error::ComponentMismatch { expected: state.sigma.m(), found: dw.len() });
    }
    Ok(())
}

/// Forward Euler for `du = -F[u] dt`.
pub fn drift_euler(u: &ScalarField, drift: &DriftSpec, noise: &GradientNoise<'_>, dt: f64) -> ScalarField {
    match drift.apply(u, noise) {
        None => u.clone(),
        Some(f) => u - &f.scale(dt),
    }
}

/// Heun for `du = -F[u] dt`.
pub fn drift_heun(u: &ScalarField, drift: &DriftSpec, noise: &GradientNoise<'_>, dt: f64) -> ScalarField {
    match drift.apply(u, noise) {
        None => u.clone(),
        Some(f0) => {
            let predictor = u - &f0.scale(dt);
            let f1 = drift.apply(&predictor, noise).expect("drift is nonzero");
            u - &(&f0 + &f1).scale(0.5 * dt)
        }
    }
}

/// `Σ_k (K u)_k dW_k`.
fn noise_increment(noise: &GradientNoise<'_>, u: &ScalarField, dw: &[f64]) -> Result<ScalarField> {
    let ku = noise.k_scalar(u)?;
    let mut out = ScalarField::zeros(*u.grid());
    for (c, w) in ku.components().iter().zip(dw) {
        out = &out + &c.scale(*w);
    }
    Ok(out)
}

/// One Euler–Maruyama step of the Itô form.
pub fn step_ito<'a>(state: &SpdeState<'a>, dw: &[f64], dt: f64) -> Result<SpdeState<'a>> {
    check_step(state, dw, dt)?;
    let noise = state.noise();
    let deterministic = drift_euler(&state.u, state.drift, &noise, dt);
    if state.sigma.is_identically_zero() {
        return Ok(state.advance(deterministic, dt));
    }
    let stochastic = noise_increment(&noise, &state.u, dw)?;
    let correction = noise.ito_correction(&state.u)?.scale(dt);
    Ok(state.advance(&(&deterministic - &stochastic) + &correction, dt))
}

/// One Heun predictor–corrector step of the Stratonovich form.
pub fn step_strat_heun<'a>(state: &SpdeState<'a>, dw: &[f64], dt: f64) -> Result<SpdeState<'a>> {
    check_step(state, dw, dt)?;
    let noise = state.noise();
    if state.sigma.is_identically_zero() {
        return Ok(state.advance(drift_heun(&state.u, state.drift, &noise, dt), dt));
    }
    let u = &state.u;
    let f0 = state.drift.apply(u, &noise);
    let g0 = noise_increment(&noise, u, dw)?;
    let mut predictor = u - &g0;
    if let Some(f) = &f0 {
        predictor = &predictor - &f.scale(dt);
    }
    let g1 = noise_increment(&noise, &predictor, dw)?;
    let mut next = u - &(&g0 + &g1).scale(0.5);
    if let Some(f) = &f0 {
        let f1 = state.drift.apply(&predictor, &noise).expect("drift is nonzero");
        next = &next - &(f + &f1).scale(0.5 * dt);
    }
    Ok(state.advance(next, dt))
}

pub fn step<'a>(stepper: Stepper, state: &SpdeState<'a>, dw: &[f64], dt: f64) -> Result<SpdeState<'a>> {
    match stepper {
        Stepper::Ito => step_ito(state, dw, dt),
        Stepper::StratHeun => step_strat_heun(state, dw, dt),
    }
}

/// Runs a whole path and returns the final state.
pub fn integrate<'a>(stepper: Stepper, state: SpdeState<'a>, driver: &BrownianDriver) -> Result<SpdeState<'a>> {
    let mut state = state;
    for n in 0..driver.steps() {
        state = step(stepper, &state, driver.step(n), driver.dt())?;
    }
    Ok(state)
}

/// `u0(x - s)` by exact Fourier translation: the solution for constant `σ`
/// with `s_i = Σ_k σ_ik W_k(t)`.
pub fn transported(u0: &ScalarField, s: &[f64]) -> Result<ScalarField> {
    let g = *u0.grid();
    if s.len() != g.d() {
        return Err(Error::ComponentMismatch { expected: g.d(), found: s.len() });
    }
    ScalarField::from_values(g, crate::spectral::shift(&g, u0.values(), s))
}

/// One row of the trajectory time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub mean: f64,
    pub l2: f64,
    pub linf: f64,
    pub lp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub p: f64,
    pub rows: Vec<TrajectoryRow>,
    pub snapshots: Vec<(f64, ScalarField)>,
}

fn summary(t: f64, u: &ScalarField, p: f64) -> Result<TrajectoryRow> {
    Ok(TrajectoryRow {
        t,
        mean: u.mean(),
        l2: lq_norm(u, Exponent::Finite(2.0))?,
        linf: lq_norm(u, Exponent::Infinite)?,
        lp: lq_norm(u, Exponent::Finite(p))?,
    })
}

/// Integrates one path, recording a summary row every step and a snapshot
/// every `snapshot_every` steps (0 keeps only the endpoints).
pub fn simulate(
    stepper: Stepper,
    state: SpdeState<'_>,
    driver: &BrownianDriver,
    p: f64,
    snapshot_every: usize,
) -> Result<Trajectory> {
    let mut state = state;
    let mut rows = vec![summary(state.t, &state.u, p)?];
    let mut snapshots = vec![(state.t, state.u.clone())];
    for n in 0..driver.steps() {
        state = step(stepper, &state, driver.step(n), driver.dt())?;
        rows.push(summary(state.t, &state.u, p)?);
        let last = n + 1 == driver.steps();
        if last || (snapshot_every > 0 && (n + 1) % snapshot_every == 0) {
            snapshots.push((state.t, state.u.clone()));
        }
    }
    Ok(Trajectory { p, rows, snapshots })
}

impl Trajectory {
    pub fn csv(&self) -> String {
        let mut out = String::from("t,mean,l2,linf,lp\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.t, r.mean, r.l2, r.linf, r.lp));
        }
        out
    }

    /// Writes `trajectory.csv` and `snapshot_NNNNN.bin` files into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        io::create_dir(dir)?;
        io::write_file(&dir.join("trajectory.csv"), self.csv().as_bytes())?;
        for (j, (_, u)) in self.snapshots.iter().enumerate() {
            let path = dir.join(format!("snapshot_{j:05}.bin"));
            let mut bytes = Vec::new();
            io::write_fields(&mut bytes, &[u])?;
            let mut file =
                std::fs::File::create(&path).map_err(|source| Error::Output { path: path.clone(), source })?;
            file.write_all(&bytes).map_err(|source| Error::Output { path, source })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AprioriConfig {
    pub paths: usize,
    pub horizon: f64,
    pub steps: usize,
    pub p: f64,
    pub seed: u64,
    pub stepper: Stepper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AprioriEstimate {
    /// Monte Carlo mean of `‖u‖^p` over `[0,T] × T^d`.
    pub mean: f64,
    pub stderr: f64,
    pub per_path: Vec<f64>,
}

/// Trapezoid-in-time estimate of `E ‖u‖^p_{L^p([0,T] × T^d)}`; paths run
/// concurrently on the current rayon pool.
pub fn estimate_apriori(
    sigma: &SigmaField,
    drift: &DriftSpec,
    u0: &ScalarField,
    cfg: &AprioriConfig,
    disc: Discretization,
) -> Result<AprioriEstimate> {
    if cfg.paths < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 paths, got {}", cfg.paths)));
    }
    if cfg.steps == 0 || !(cfg.horizon > 0.0) {
        return Err(Error::InvalidArgument("horizon and step count must be positive".into()));
    }
    if !(cfg.p >= 1.0) || !cfg.p.is_finite() {
        return Err(Error::InvalidExponent(format!("p = {}", cfg.p)));
    }
    let dt = cfg.horizon / cfg.steps as f64;
    let lp = |u: &ScalarField| -> Result<f64> { Ok(lq_norm(u, Exponent::Finite(cfg.p))?.powf(cfg.p)) };
    let per_path = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|path| -> Result<f64> {
            let driver = BrownianDriver::for_path(sigma.m(), cfg.steps, dt, cfg.seed, path)?;
            let mut state = SpdeState::new(u0.clone(), sigma, drift)?.with_discretization(disc);
            let mut acc = 0.5 * lp(&state.u)?;
            for n in 0..cfg.steps {
                state = step(cfg.stepper, &state, driver.step(n), dt)?;
                let w = if n + 1 == cfg.steps { 0.5 } else { 1.0 };
                acc += w * lp(&state.u)?;
            }
            Ok(acc * dt)
        })
        .collect::<Result<Vec<f64>>>()?;
    let p = per_path.len() as f64;
    let mean = per_path.iter().sum::<f64>() / p;
    let var = per_path.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (p - 1.0);
    Ok(AprioriEstimate { mean, stderr: (var / p).sqrt(), per_path })
}
