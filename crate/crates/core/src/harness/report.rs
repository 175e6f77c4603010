//! Convergence reports and their CSV / JSON / SVG renderings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind, ReportFormat};
use super::fit::RateOutcome;
use crate::entropy::GrowthCertificate;
use crate::error::Result;
use crate::fields::{Exponent, SigmaRegularity};
use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Every measured norm is below the degeneracy threshold.
    DegeneratePass,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self != Verdict::Fail
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::DegeneratePass => "degenerate-pass",
        }
    }
}

/// One ladder rung. `delta` is the mollifier width, or the time step for
/// SPDE runs and `1/paths` for Monte Carlo runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub delta: f64,
    pub norm_q: f64,
    pub oracle_absdiff: Option<f64>,
    /// Values of the report's extra columns, in order.
    pub extra: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub quantity: String,
    #[serde(flatten)]
    pub outcome: RateOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaNorms {
    /// `W^{1,r}` and `W^{2,r}` for `r = pq/(p-q)` (∞ when p = q).
    pub r1: SigmaRegularity,
    /// The same for `r = 2pq/(p-q)`.
    pub r2: SigmaRegularity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub config: ExperimentConfig,
    pub h: f64,
    pub r1: Exponent,
    pub r2: Exponent,
    pub sigma_norms: SigmaNorms,
    pub entropy_certificate: Option<GrowthCertificate>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub kind: ExperimentKind,
    pub metadata: Metadata,
    /// Names of the extra columns after `delta,norm_q,oracle_absdiff`.
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub fits: Vec<FitRecord>,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

impl ConvergenceReport {
    /// Column `name` over all rows; `norm_q` and extra columns are accepted.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        if name == "norm_q" {
            return Some(self.rows.iter().map(|r| r.norm_q).collect());
        }
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.extra[j]).collect())
    }

    pub fn fit(&self, quantity: &str) -> Option<&RateOutcome> {
        self.fits.iter().find(|f| f.quantity == quantity).map(|f| &f.outcome)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,norm_q,oracle_absdiff");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&num(r.delta));
            out.push(',');
            out.push_str(&num(r.norm_q));
            out.push(',');
            if let Some(o) = r.oracle_absdiff {
                out.push_str(&num(o));
            }
            for v in &r.extra {
                out.push(',');
                out.push_str(&num(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Log–log plot: one series per measured quantity with positive values,
    /// fitted lines dashed.
    pub fn to_svg(&self) -> String {
        let (w, h, margin) = (640.0, 440.0, 60.0);
        let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
        let mut names = vec!["norm_q".to_string()];
        names.extend(self.columns.iter().cloned());
        for name in names {
            let ys = self.column(&name).expect("known column");
            let pts: Vec<(f64, f64)> = self
                .rows
                .iter()
                .zip(ys)
                .filter(|(r, y)| r.delta > 0.0 && *y > 0.0 && y.is_finite())
                .map(|(r, y)| (r.delta.log10(), y.log10()))
                .collect();
            if !pts.is_empty() {
                series.push((name, pts));
            }
        }
        let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.1.iter().copied()).collect();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in &all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if all.is_empty() {
            (x0, x1, y0, y1) = (-1.0, 0.0, -1.0, 0.0);
        }
        if x1 - x0 < 1e-9 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 < 1e-9 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let sx = |x: f64| margin + (x - x0) / (x1 - x0) * (w - 2.0 * margin);
        let sy = |y: f64| h - margin - (y - y0) / (y1 - y0) * (h - 2.0 * margin);
        let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

        let mut s = String::new();
        let _ = writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
        let _ = writeln!(s, "<!-- renormal {} -->", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
        );
        let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{} ({})</text>",
            w / 2.0,
            self.kind,
            self.verdict.as_str()
        );
        let _ = writeln!(
            s,
            "<path d=\"M{m:.1},{t:.1} L{m:.1},{b:.1} L{r:.1},{b:.1}\" stroke=\"black\" fill=\"none\"/>",
            m = margin,
            t = margin,
            b = h - margin,
            r = w - margin
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">log10 delta [{:.3}, {:.3}]</text>",
            w / 2.0,
            h - 20.0,
            x0,
            x1
        );
        let _ = writeln!(
            s,
            "<text x=\"16\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {:.1})\" text-anchor=\"middle\">log10 value [{:.3}, {:.3}]</text>",
            h / 2.0,
            h / 2.0,
            y0,
            y1
        );
        for (j, (name, pts)) in series.iter().enumerate() {
            let color = palette[j % palette.len()];
            let _ = writeln!(s, "<g class=\"series\" data-quantity=\"{name}\">");
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(s, "<polyline points=\"{}\" stroke=\"{color}\" fill=\"none\"/>", path.join(" "));
            for &(x, y) in pts {
                let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>", sx(x), sy(y));
            }
            if let Some(RateOutcome::Fit { slope, .. }) = self.fit(name) {
                let n = pts.len() as f64;
                let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
                let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
                let (xa, xb) = (pts.first().unwrap().0, pts.last().unwrap().0);
                let _ = writeln!(
                    s,
                    "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-dasharray=\"4 3\"/>",
                    sx(xa),
                    sy(my + slope * (xa - mx)),
                    sx(xb),
                    sy(my + slope * (xb - mx))
                );
            }
            let label = match self.fit(name).and_then(|f| f.slope()) {
                Some(slope) => format!("{name} (slope {slope:.3})"),
                None => name.clone(),
            };
            let _ = writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{color}\">{label}</text>",
                w - margin - 150.0,
                margin + 14.0 * j as f64
            );
            let _ = writeln!(s, "</g>");
        }
        let _ = writeln!(s, "</svg>");
        s
    }

    /// Writes `report.{csv,json,svg}` into `dir`; returns the written paths.
    pub fn emit(&self, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
        io::create_dir(dir)?;
        let mut written = Vec::new();
        for f in formats {
            let (name, body) = match f {
                ReportFormat::Csv => ("report.csv", self.to_csv()),
                ReportFormat::Json => ("report.json", self.to_json()),
                ReportFormat::Svg => ("report.svg", self.to_svg()),
            };
            let path = dir.join(name);
            io::write_file(&path, body.as_bytes())?;
            written.push(path);
        }
        Ok(written)
    }
}
