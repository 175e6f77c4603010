//! Log–log least-squares rate fits.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum RateOutcome {
    Fit { slope: f64, stderr: f64, r2: f64 },
    NoRate { reason: String },
}

impl RateOutcome {
    pub fn slope(&self) -> Option<f64> {
        match self {
            RateOutcome::Fit { slope, .. } => Some(*slope),
            RateOutcome::NoRate { .. } => None,
        }
    }
}

/// Fits `log value = a + slope · log δ`. Fewer than three points or any
/// nonpositive value gives [`RateOutcome::NoRate`].
pub fn fit_rate(points: &[(f64, f64)]) -> RateOutcome {
    if points.len() < 3 {
        return RateOutcome::NoRate { reason: format!("{} points, need at least 3", points.len()) };
    }
    if let Some(&(d, v)) = points.iter().find(|&&(d, v)| !(d > 0.0) || !(v > 0.0) || !v.is_finite()) {
        return RateOutcome::NoRate { reason: format!("nonpositive point ({d}, {v})") };
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return RateOutcome::NoRate { reason: "all abscissae coincide".into() };
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let stderr = (sse / (n - 2.0) / sxx).sqrt();
    RateOutcome::Fit { slope, stderr, r2 }
}
