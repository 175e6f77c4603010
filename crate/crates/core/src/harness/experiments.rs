//! The individual experiment kinds. Each returns its rows plus the checks
//! that only it knows how to evaluate; generic checks live in `run`.

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{Check, ReportRow};
use crate::commutators::{analytic_limits_with, Commutators};
use crate::entropy::{make_entropy, proof_identity_with, theorem_combination_with, weighted_integral, Entropy};
use crate::error::{Error, Result};
use crate::fields::{lq_norm, lq_norm_vector, Exponent, GridSpec, ScalarField, SigmaField};
use crate::mollifier::{
    build_kernel, second_moment_exact, second_moment_matrix, weighted_moment_first, ConvolutionPath, MollifierKernel,
};
use crate::operators::Discretization;
use crate::presets::{gen_phi, gen_sigma, gen_u};
use crate::spde::{
    cfl_dt, estimate_apriori, gen_drift, integrate, simulate, transported, AprioriConfig, BrownianDriver, DriftSpec,
    SpdeState, Stepper,
};

/// Output of one experiment before generic assembly.
#[derive(Debug, Default)]
pub(crate) struct Outcome {
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
    /// Quantities that get a rate fit and the slope checks.
    pub fit: Vec<String>,
    /// Quantities subject to the monotonicity and final-ratio checks.
    pub decreasing: Vec<String>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Extra files, relative to the output directory.
    pub artifacts: Vec<(String, Vec<u8>)>,
}

pub(crate) fn threshold_check(name: &str, value: f64, threshold: Option<f64>) -> Option<Check> {
    threshold.map(|t| Check { name: name.to_string(), value, threshold: t, passed: value <= t })
}

/// Fixtures shared by every experiment.
pub(crate) struct Setup {
    pub grid: GridSpec,
    pub sigma: SigmaField,
    pub us: Vec<ScalarField>,
    pub disc: Discretization,
    pub q: Exponent,
}

pub(crate) fn setup(cfg: &ExperimentConfig) -> Result<Setup> {
    let grid = cfg.grid();
    let sigma = gen_sigma(&cfg.sigma.preset, grid, cfg.sigma.m, cfg.sigma.seed).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::Config(msg),
        other => other,
    })?;
    cfg.u.preset.check_lp(cfg.exponents.p, grid.d())?;
    let us = (0..cfg.monte_carlo.draws as u64).map(|j| gen_u(&cfg.u.preset, grid, cfg.u.seed + j)).collect();
    Ok(Setup { grid, sigma, us, disc: cfg.discretization.into(), q: Exponent::Finite(cfg.exponents.q) })
}

fn kernels(cfg: &ExperimentConfig, grid: GridSpec) -> Result<Vec<MollifierKernel>> {
    cfg.ladder.deltas().into_iter().map(|delta| build_kernel(cfg.ladder.kernel, delta, grid)).collect()
}

fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn direct(disc: Discretization) -> Discretization {
    Discretization { convolution: ConvolutionPath::Direct, ..disc }
}

fn max_abs_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    (a - b).max_abs()
}

pub(crate) fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.kind {
        ExperimentKind::E2Sweep | ExperimentKind::DoubleCommutatorSweep => commutator_sweep(cfg),
        ExperimentKind::DecompositionCheck => decomposition_check(cfg),
        ExperimentKind::LimitResiduals => limit_residuals(cfg),
        ExperimentKind::Theorem3Sweep => theorem3_sweep(cfg),
        ExperimentKind::MomentCheck => moment_check(cfg),
        ExperimentKind::SpdeRun => spde_run(cfg),
        ExperimentKind::AprioriMc => apriori_mc(cfg),
    }
}

fn commutator_sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = setup(cfg)?;
    let kernels = kernels(cfg, s.grid)?;
    let e2 = cfg.kind == ExperimentKind::E2Sweep;
    let mc = s.us.len() > 1;
    let rows = kernels
        .par_iter()
        .map(|k| -> Result<ReportRow> {
            let c = Commutators::with_discretization(&s.sigma, k, s.disc)?;
            let reference = cfg.oracle.direct.then(|| Commutators::with_discretization(&s.sigma, k, direct(s.disc)));
            let mut norms = Vec::with_capacity(s.us.len());
            let mut oracle: Option<f64> = None;
            let mut nested = 0.0f64;
            for u in &s.us {
                if e2 {
                    let f = c.e2(u)?;
                    norms.push(lq_norm_vector(&f, s.q)?);
                    if let Some(r) = &reference {
                        let g = r.as_ref().map_err(|e| Error::Config(e.to_string()))?.e2(u)?;
                        let diff = f.zip_components(&g, |a, b| a - b).max_abs();
                        oracle = Some(oracle.unwrap_or(0.0).max(diff));
                    }
                } else {
                    let f = c.double_commutator(u)?;
                    norms.push(lq_norm(&f, s.q)?);
                    nested = nested.max(max_abs_diff(&f, &c.nested_double_commutator(u)?));
                    if let Some(r) = &reference {
                        let g = r.as_ref().map_err(|e| Error::Config(e.to_string()))?.double_commutator(u)?;
                        oracle = Some(oracle.unwrap_or(0.0).max(max_abs_diff(&f, &g)));
                    }
                }
            }
            let (mean, stderr) = mean_and_stderr(&norms);
            let mut extra = Vec::new();
            if !e2 {
                extra.push(nested);
            }
            if mc {
                extra.push(stderr);
            }
            Ok(ReportRow { delta: k.delta(), norm_q: mean, oracle_absdiff: oracle, extra })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut columns = Vec::new();
    if !e2 {
        columns.push("nested_absdiff".to_string());
    }
    if mc {
        columns.push("mc_stderr".to_string());
    }
    let mut checks = Vec::new();
    if !e2 {
        let worst = rows.iter().map(|r| r.extra[0]).fold(0.0, f64::max);
        checks.extend(threshold_check("nested_absdiff", worst, cfg.criteria.max_identity_residual));
    }
    oracle_check(&rows, cfg, &mut checks);
    Ok(Outcome {
        columns,
        rows,
        fit: vec!["norm_q".into()],
        decreasing: vec!["norm_q".into()],
        checks,
        ..Default::default()
    })
}

fn oracle_check(rows: &[ReportRow], cfg: &ExperimentConfig, checks: &mut Vec<Check>) {
    let worst = rows.iter().filter_map(|r| r.oracle_absdiff).fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    if let Some(w) = worst {
        checks.extend(threshold_check("oracle_absdiff", w, cfg.criteria.max_oracle_absdiff));
    }
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 1e-12 {
        diff / scale
    } else {
        diff
    }
}

fn decomposition_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = setup(cfg)?;
    let kernels = kernels(cfg, s.grid)?;
    let u = &s.us[0];
    let results = kernels
        .par_iter()
        .map(|k| -> Result<(ReportRow, Option<String>)> {
            let c = Commutators::with_discretization(&s.sigma, k, s.disc)?;
            let dc = c.double_commutator(u)?;
            let terms = c.decompose(u)?;
            let residual = relative(max_abs_diff(&terms.reassembled(), &dc), dc.max_abs());
            let oracle = if cfg.oracle.direct {
                let r = Commutators::with_discretization(&s.sigma, k, direct(s.disc))?.decompose(u)?;
                Some(terms.t.iter().zip(&r.t).map(|(a, b)| max_abs_diff(a, b)).fold(0.0, f64::max))
            } else {
                None
            };
            let extra = vec![residual, terms.term(2).max_abs(), terms.term(5).max_abs(), terms.term(6).max_abs()];
            let last = (k.delta() == cfg.ladder.deltas().last().copied().unwrap_or(0.0)).then(|| terms.to_csv(&dc));
            Ok((ReportRow { delta: k.delta(), norm_q: lq_norm(&dc, s.q)?, oracle_absdiff: oracle, extra }, last))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut artifacts = Vec::new();
    let mut rows = Vec::new();
    for (row, dump) in results {
        if let Some(text) = dump {
            artifacts.push(("terms.csv".to_string(), text.into_bytes()));
        }
        rows.push(row);
    }
    let mut checks = Vec::new();
    let worst = rows.iter().map(|r| r.extra[0]).fold(0.0, f64::max);
    checks.extend(threshold_check("identity_residual", worst, cfg.criteria.max_identity_residual));
    let mut notes = Vec::new();
    if matches!(cfg.sigma.preset, crate::presets::SigmaPreset::DivergenceFree) {
        let vanish = rows.iter().flat_map(|r| r.extra[1..4].to_vec()).fold(0.0, f64::max);
        checks.extend(threshold_check("divergence_free_terms", vanish, cfg.criteria.max_vanishing));
    } else if cfg.criteria.max_vanishing.is_some() {
        notes.push("max_vanishing applies only to the divergence-free sigma preset".into());
    }
    oracle_check(&rows, cfg, &mut checks);
    Ok(Outcome {
        columns: ["identity_residual", "t2_max", "t5_max", "t6_max"].map(String::from).to_vec(),
        rows,
        fit: vec!["norm_q".into()],
        checks,
        notes,
        artifacts,
        ..Default::default()
    })
}

fn limit_residuals(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = setup(cfg)?;
    let kernels = kernels(cfg, s.grid)?;
    let u = &s.us[0];
    let noise = crate::operators::GradientNoise::with_discretization(&s.sigma, s.disc);
    let limits = analytic_limits_with(&noise, u)?;
    let cancellation = limits.sum().max_abs();
    let rows = kernels
        .par_iter()
        .map(|k| -> Result<ReportRow> {
            let c = Commutators::with_discretization(&s.sigma, k, s.disc)?;
            let terms = c.decompose(u)?;
            let dc = terms.reassembled();
            let r = [
                lq_norm(&(&terms.i1 - &limits.l1), s.q)?,
                lq_norm(&(&terms.i2 - &limits.l2), s.q)?,
                lq_norm(&(&terms.i3 - &limits.l3), s.q)?,
                lq_norm(&(&(-terms.standalone()) - &limits.l5), s.q)?,
            ];
            let mut extra = r.to_vec();
            extra.push(cancellation);
            Ok(ReportRow { delta: k.delta(), norm_q: lq_norm(&dc, s.q)?, oracle_absdiff: None, extra })
        })
        .collect::<Result<Vec<_>>>()?;
    let residuals: Vec<String> = ["r_i1", "r_i2", "r_i3", "r_t5"].map(String::from).to_vec();
    let mut columns = residuals.clone();
    columns.push("cancellation".into());
    let checks = threshold_check("cancellation", cancellation, cfg.criteria.max_identity_residual).into_iter().collect();
    Ok(Outcome { columns, rows, fit: residuals.clone(), decreasing: residuals, checks, ..Default::default() })
}

pub(crate) fn entropy_of(cfg: &ExperimentConfig) -> Result<Entropy> {
    make_entropy(cfg.entropy.kind, cfg.entropy.q).map_err(|e| Error::Config(e.to_string()))
}

fn theorem3_sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = setup(cfg)?;
    let kernels = kernels(cfg, s.grid)?;
    let entropy = entropy_of(cfg)?;
    let phi = gen_phi(&cfg.phi.preset, s.grid);
    let mc = s.us.len() > 1;
    let rows = kernels
        .par_iter()
        .map(|k| -> Result<ReportRow> {
            let c = Commutators::with_discretization(&s.sigma, k, s.disc)?;
            let mut integrals = Vec::new();
            let mut comb_norms = Vec::new();
            let mut residual = 0.0f64;
            for u in &s.us {
                let comb = theorem_combination_with(&c, u, &entropy)?;
                integrals.push(weighted_integral(&comb, &phi)?.abs());
                comb_norms.push(lq_norm(&comb, s.q)?);
                let res = proof_identity_with(&c, u, &entropy)?;
                residual = residual.max(relative(res.max_abs(), comb.max_abs()));
            }
            let (mean, stderr) = mean_and_stderr(&integrals);
            let mut extra = vec![mean_and_stderr(&comb_norms).0, residual];
            if mc {
                extra.push(stderr);
            }
            Ok(ReportRow { delta: k.delta(), norm_q: mean, oracle_absdiff: None, extra })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut columns = vec!["combination_norm_q".to_string(), "proof_residual".to_string()];
    if mc {
        columns.push("mc_stderr".into());
    }
    let worst = rows.iter().map(|r| r.extra[1]).fold(0.0, f64::max);
    let checks = threshold_check("proof_residual", worst, cfg.criteria.max_identity_residual).into_iter().collect();
    Ok(Outcome {
        columns,
        rows,
        fit: vec!["norm_q".into()],
        decreasing: vec!["norm_q".into()],
        checks,
        ..Default::default()
    })
}

fn moment_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = cfg.grid();
    let d = grid.d();
    let kernels = kernels(cfg, grid)?;
    let rows = kernels
        .par_iter()
        .map(|k| -> Result<ReportRow> {
            let mut err = 0.0f64;
            for i in 0..d {
                for j in i..d {
                    for a in 0..d {
                        for b in a..d {
                            let m = second_moment_matrix(k, i, j, a, b)?;
                            err = err.max((m - second_moment_exact(i, j, a, b)).abs());
                        }
                    }
                }
            }
            let first = (0..d).map(|i| weighted_moment_first(k, i)).collect::<Result<Vec<_>>>()?;
            let extra = vec![first.iter().copied().fold(0.0, f64::max), (k.mass() - 1.0).abs(), k.delta() / grid.h()];
            Ok(ReportRow { delta: k.delta(), norm_q: err, oracle_absdiff: None, extra })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    let floor = cfg.criteria.min_moment_resolution.unwrap_or(0.0);
    let resolved: Vec<f64> = rows.iter().filter(|r| r.extra[2] >= floor).map(|r| r.norm_q).collect();
    if !resolved.is_empty() {
        checks.extend(threshold_check("second_moment_error", resolved.iter().copied().fold(0.0, f64::max), cfg.criteria.max_moment_error));
    }
    let firsts: Vec<f64> = rows.iter().map(|r| r.extra[0]).collect();
    let lo = firsts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = firsts.iter().copied().fold(0.0, f64::max);
    checks.extend(threshold_check("first_moment_band", hi / lo, cfg.criteria.max_first_moment_band));
    let mut artifacts = Vec::new();
    if d == 1 {
        let mut buf = Vec::new();
        kernels[0].write_csv(&mut buf)?;
        artifacts.push(("kernel.csv".to_string(), buf));
    }
    Ok(Outcome {
        columns: ["first_moment", "mass_error", "resolution"].map(String::from).to_vec(),
        rows,
        checks,
        artifacts,
        ..Default::default()
    })
}

/// Coarsest step used by the SPDE experiments.
pub(crate) fn base_dt(cfg: &ExperimentConfig, sigma: &SigmaField) -> f64 {
    cfg.spde.dt.unwrap_or_else(|| cfl_dt(sigma, sigma.grid()) * cfg.spde.dt_fraction)
}

fn spde_run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = setup(cfg)?;
    let u0 = &s.us[0];
    let drift = gen_drift(&cfg.spde.drift, s.grid);
    let levels = cfg.spde.levels as usize;
    let factor = 1usize << (levels - 1);
    let steps = (cfg.spde.horizon / base_dt(cfg, &s.sigma)).ceil() as usize * factor;
    let dt = cfg.spde.horizon / steps as f64;
    let mut drivers = vec![BrownianDriver::for_path(s.sigma.m(), steps, dt, cfg.spde.seed, 0)?];
    for _ in 1..levels {
        let next = drivers.last().unwrap().coarsen()?;
        drivers.push(next);
    }
    drivers.reverse();
    let exact = s.sigma.is_spatially_constant() && matches!(drift, DriftSpec::Zero);
    let other = match cfg.spde.stepper {
        Stepper::Ito => Stepper::StratHeun,
        Stepper::StratHeun => Stepper::Ito,
    };
    let p = cfg.exponents.p;
    let results = drivers
        .par_iter()
        .map(|drv| -> Result<(ReportRow, crate::spde::Trajectory)> {
            let state = SpdeState::new(u0.clone(), &s.sigma, &drift)?.with_discretization(s.disc);
            let tr = simulate(cfg.spde.stepper, state.clone(), drv, p, cfg.spde.snapshot_every)?;
            let end = &tr.snapshots.last().expect("final snapshot").1;
            let alt = integrate(other, state, drv)?.u;
            let m0 = tr.rows[0].mean;
            let drift_max = tr.rows.iter().map(|r| (r.mean - m0).abs()).fold(0.0, f64::max);
            let linf = tr.rows.iter().map(|r| r.linf).fold(0.0, f64::max);
            let mut extra = vec![drift_max, linf, lq_norm(&(end - &alt), Exponent::Finite(2.0))?];
            if exact {
                let shift: Vec<f64> = (0..s.grid.d())
                    .map(|i| (0..s.sigma.m()).map(|k| s.sigma.get(i, k).values()[0] * drv.endpoint(k)).sum())
                    .collect();
                extra.push(lq_norm(&(end - &transported(u0, &shift)?), Exponent::Finite(2.0))?);
            }
            Ok((ReportRow { delta: drv.dt(), norm_q: lq_norm(end, s.q)?, oracle_absdiff: None, extra }, tr))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut finest = None;
    for (row, tr) in results {
        rows.push(row);
        finest = Some(tr);
    }
    let tr = finest.expect("at least one level");
    let mut artifacts = vec![("trajectory/trajectory.csv".to_string(), tr.csv().into_bytes())];
    for (j, (_, u)) in tr.snapshots.iter().enumerate() {
        artifacts.push((format!("trajectory/snapshot_{j:05}.bin"), crate::io::encode_fields(&[u])?));
    }
    let mut columns: Vec<String> = ["mass_drift", "linf_max", "ito_strat_gap"].map(String::from).to_vec();
    // Rate the error against exact characteristics when available,
    // otherwise the gap between the two steppers.
    if exact {
        columns.push("exact_error".into());
    }
    let mut rated = Vec::new();
    if levels > 1 {
        rated.push(if exact { "exact_error" } else { "ito_strat_gap" }.to_string());
    }
    let mut checks = Vec::new();
    let worst = |j: usize| rows.iter().map(|r| r.extra[j]).fold(0.0, f64::max);
    checks.extend(threshold_check("mass_drift", worst(0), cfg.criteria.max_mass_drift));
    checks.extend(threshold_check("linf_max", worst(1), cfg.criteria.max_linf));
    let notes = vec![format!("{steps} steps of dt = {dt:e} on the finest level")];
    Ok(Outcome { columns, rows, fit: rated.clone(), decreasing: rated, checks, notes, artifacts })
}

fn apriori_mc(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = setup(cfg)?;
    let u0 = &s.us[0];
    let drift = gen_drift(&cfg.spde.drift, s.grid);
    let steps = (cfg.spde.horizon / base_dt(cfg, &s.sigma)).ceil() as usize;
    let paths = cfg.spde.paths;
    let ac = AprioriConfig {
        paths: 2 * paths,
        horizon: cfg.spde.horizon,
        steps,
        p: cfg.exponents.p,
        seed: cfg.spde.seed,
        stepper: cfg.spde.stepper,
    };
    if paths < 2 {
        return Err(Error::Config(format!("spde.paths = {paths}; at least 2 paths are required")));
    }
    let est = estimate_apriori(&s.sigma, &drift, u0, &ac, s.disc)?;
    let (m1, s1) = mean_and_stderr(&est.per_path[..paths]);
    let (m2, s2) = (est.mean, est.stderr);
    let rows = vec![
        ReportRow { delta: 1.0 / paths as f64, norm_q: m1, oracle_absdiff: None, extra: vec![s1, paths as f64] },
        ReportRow { delta: 1.0 / (2 * paths) as f64, norm_q: m2, oracle_absdiff: None, extra: vec![s2, (2 * paths) as f64] },
    ];
    let mut checks = Vec::new();
    let band = (s1 * s1 + s2 * s2).sqrt();
    let multiple = if band > 0.0 { (m2 - m1).abs() / band } else if m1 == m2 { 0.0 } else { f64::INFINITY };
    checks.extend(threshold_check("stderr_multiple", multiple, cfg.criteria.max_stderr_multiple));
    let mut notes = vec![format!("{steps} steps of dt = {:e}", cfg.spde.horizon / steps as f64)];
    if s.sigma.is_identically_zero() && matches!(drift, DriftSpec::Zero) {
        let exact = cfg.spde.horizon * lq_norm(u0, Exponent::Finite(cfg.exponents.p))?.powf(cfg.exponents.p);
        checks.extend(threshold_check("static_rel_error", relative((m2 - exact).abs(), exact), cfg.criteria.max_static_rel_error));
    } else if cfg.criteria.max_static_rel_error.is_some() {
        notes.push("static_rel_error needs sigma = 0 and zero drift; skipped".into());
    }
    Ok(Outcome { columns: vec!["stderr".into(), "paths".into()], rows, checks, notes, ..Default::default() })
}
