//! Config-driven refinement experiments: run a δ ladder (or a time-step or
//! path-count ladder), fit rates and apply the configured pass/fail checks.

pub mod config;
mod experiments;
pub mod fit;
pub mod report;

use std::path::PathBuf;

use config::{Criteria, ExperimentConfig, ExperimentKind};
use fit::{fit_rate, RateOutcome};
use report::{Check, ConvergenceReport, FitRecord, Metadata, SigmaNorms, Verdict};

use crate::error::{Error, Result};
use crate::io;
use crate::presets::gen_sigma;

/// Environment variable holding the worker-pool size.
pub const WORKERS_ENV: &str = "RENORMAL_WORKERS";

/// Number of worker threads: `RENORMAL_WORKERS` when set, otherwise the
/// available parallelism.
pub fn worker_count() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(std::env::VarError::NotPresent) => {
            Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
        }
        Err(e) => Err(Error::Config(format!("{WORKERS_ENV}: {e}"))),
    }
}

/// A finished experiment together with any side files it produced.
#[derive(Debug, Clone)]
pub struct Execution {
    pub report: ConvergenceReport,
    /// `(relative path, contents)` pairs written next to the report.
    pub artifacts: Vec<(String, Vec<u8>)>,
}

/// Runs the experiment without touching the file system.
pub fn execute(cfg: &ExperimentConfig) -> Result<Execution> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count()?)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| execute_in_pool(cfg))
}

fn execute_in_pool(cfg: &ExperimentConfig) -> Result<Execution> {
    let out = experiments::run(cfg)?;
    let grid = cfg.grid();
    let ex = cfg.exponents();
    let sigma = gen_sigma(&cfg.sigma.preset, grid, cfg.sigma.m, cfg.sigma.seed)?;
    let sigma_norms = SigmaNorms { r1: sigma.regularity(ex.r1)?, r2: sigma.regularity(ex.r2)? };
    let entropy_certificate = if cfg.kind == ExperimentKind::Theorem3Sweep {
        Some(experiments::entropy_of(cfg)?.growth_certificate())
    } else {
        None
    };

    let mut report = ConvergenceReport {
        kind: cfg.kind,
        metadata: Metadata {
            config: cfg.clone(),
            h: grid.h(),
            r1: ex.r1,
            r2: ex.r2,
            sigma_norms,
            entropy_certificate,
            notes: out.notes,
        },
        columns: out.columns,
        rows: out.rows,
        fits: Vec::new(),
        checks: Vec::new(),
        verdict: Verdict::Pass,
    };
    for q in &out.fit {
        let ys = report.column(q).expect("fit quantity is a report column");
        let pts: Vec<(f64, f64)> = report.rows.iter().map(|r| r.delta).zip(ys).collect();
        report.fits.push(FitRecord { quantity: q.clone(), outcome: fit_rate(&pts) });
    }

    let c = &cfg.criteria;
    let degenerate = c.degenerate_below.is_some_and(|t| report.rows.iter().all(|r| r.norm_q.abs() <= t));
    if degenerate {
        report.metadata.notes.push("every norm is below the degeneracy threshold; rate checks skipped".into());
    } else {
        for q in &out.decreasing {
            let ys = report.column(q).expect("decreasing quantity is a report column");
            report.checks.extend(ladder_checks(q, &ys, c));
        }
        for q in &out.fit {
            report.checks.extend(slope_checks(q, report.fit(q).expect("fitted above"), c));
        }
    }
    report.checks.extend(out.checks);
    report.verdict = if !report.checks.iter().all(|ch| ch.passed) {
        Verdict::Fail
    } else if degenerate {
        Verdict::DegeneratePass
    } else {
        Verdict::Pass
    };
    Ok(Execution { report, artifacts: out.artifacts })
}

fn ladder_checks(q: &str, ys: &[f64], c: &Criteria) -> Vec<Check> {
    let mut checks = Vec::new();
    if c.strictly_decreasing == Some(true) {
        let bad = ys.windows(2).filter(|w| !(w[1] < w[0])).count();
        checks.push(Check { name: format!("strictly_decreasing:{q}"), value: bad as f64, threshold: 0.0, passed: bad == 0 });
    }
    if let (Some(t), Some(first), Some(last)) = (c.max_final_ratio, ys.first(), ys.last()) {
        let ratio = if *first != 0.0 { last / first } else { f64::INFINITY };
        checks.push(Check { name: format!("final_ratio:{q}"), value: ratio, threshold: t, passed: ratio <= t });
    }
    checks
}

fn slope_checks(q: &str, fit: &RateOutcome, c: &Criteria) -> Vec<Check> {
    let mut checks = Vec::new();
    let slope = fit.slope().unwrap_or(f64::NAN);
    if let Some(t) = c.slope_min {
        checks.push(Check { name: format!("slope_min:{q}"), value: slope, threshold: t, passed: slope >= t });
    }
    if let Some(t) = c.slope_max {
        checks.push(Check { name: format!("slope_max:{q}"), value: slope, threshold: t, passed: slope <= t });
    }
    checks
}

/// Executes the experiment and, when `output.dir` is set, writes the report
/// and artifacts there. Returns the report and the written paths.
pub fn run(cfg: &ExperimentConfig) -> Result<(ConvergenceReport, Vec<PathBuf>)> {
    let Execution { report, artifacts } = execute(cfg)?;
    let mut written = Vec::new();
    if let Some(dir) = &cfg.output.dir {
        written = report.emit(dir, &cfg.output.formats)?;
        for (rel, bytes) in &artifacts {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                io::create_dir(parent)?;
            }
            io::write_file(&path, bytes)?;
            written.push(path);
        }
    }
    Ok((report, written))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(text).unwrap()
    }

    #[test]
    fn constant_sigma_is_degenerate() {
        let c = cfg("schema_version = 1\nkind = \"e2-sweep\"\n[grid]\nd = 1\nn = 128\n[sigma]\npreset = \"constant 0.3\"\n\
                     [u]\npreset = \"box-indicator\"\n[ladder]\nk_min = 2\nk_max = 4\n\
                     [criteria]\nstrictly_decreasing = true\ndegenerate_below = 1e-12\n");
        let r = execute(&c).unwrap().report;
        assert_eq!(r.verdict, Verdict::DegeneratePass);
        assert!(r.rows.iter().all(|row| row.norm_q <= 1e-12));
        assert!(matches!(r.fit("norm_q"), Some(RateOutcome::NoRate { .. })));
    }

    #[test]
    fn decomposition_check_passes_and_dumps_terms() {
        let c = cfg("schema_version = 1\nkind = \"decomposition-check\"\n[grid]\nd = 2\nn = 64\n[sigma]\nm = 2\n\
                     [ladder]\nk_min = 2\nk_max = 3\n[criteria]\nmax_identity_residual = 1e-10\n");
        let ex = execute(&c).unwrap();
        assert_eq!(ex.report.verdict, Verdict::Pass);
        assert!(ex.report.check("identity_residual").unwrap().value <= 1e-10);
        let (name, body) = &ex.artifacts[0];
        assert_eq!(name, "terms.csv");
        assert_eq!(String::from_utf8_lossy(body).lines().count(), 64 * 64 + 1);
    }

    #[test]
    fn failing_threshold_fails_verdict() {
        let c = cfg("schema_version = 1\nkind = \"e2-sweep\"\n[grid]\nd = 1\nn = 256\n[ladder]\nk_min = 2\nk_max = 4\n\
                     [criteria]\nmax_final_ratio = 1e-9\n");
        let r = execute(&c).unwrap().report;
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(!r.check("final_ratio:norm_q").unwrap().passed);
    }

    #[test]
    fn under_resolved_ladder_is_numerical() {
        let c = cfg("schema_version = 1\nkind = \"e2-sweep\"\n[grid]\nd = 1\nn = 64\n[ladder]\nk_min = 2\nk_max = 6\n");
        assert_eq!(execute(&c).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn cfl_violation_is_numerical() {
        let c = cfg("schema_version = 1\nkind = \"spde-run\"\n[grid]\nd = 1\nn = 64\n[spde]\ndt = 0.01\nhorizon = 0.02\n");
        let err = execute(&c).unwrap_err();
        assert!(matches!(err, Error::CflViolation { .. }), "{err}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn sigma_norms_are_recorded() {
        let c = cfg("schema_version = 1\nkind = \"moment-check\"\n[grid]\nd = 1\nn = 256\n[exponents]\np = 4.0\nq = 2.0\n\
                     [ladder]\nk_min = 2\nk_max = 4\n");
        let r = execute(&c).unwrap().report;
        assert_eq!(r.metadata.r1, crate::fields::Exponent::Finite(4.0));
        assert!(r.metadata.sigma_norms.r2.w1 > 0.0);
    }

    #[test]
    fn run_writes_reports_and_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = cfg("schema_version = 1\nkind = \"spde-run\"\n[grid]\nd = 1\nn = 32\n[spde]\nhorizon = 0.001\n");
        c.output.dir = Some(dir.path().join("out"));
        let (_, written) = run(&c).unwrap();
        for name in ["report.csv", "report.json", "report.svg", "trajectory/trajectory.csv", "trajectory/snapshot_00000.bin"] {
            assert!(written.contains(&dir.path().join("out").join(name)), "{name}");
        }
    }
}
