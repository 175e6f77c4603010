//! Named generators for `σ`, `u` and the test function `φ`.
//!
//! Presets are written as a name followed by whitespace-separated numeric
//! arguments, e.g. `constant 1`, `fourier-decay 3`, `box-indicator 0.25 0.75`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{GridSpec, ScalarField, SigmaField};
use crate::rng::CounterNormal;

/// Default cap applied to singular `u` presets.
pub const DEFAULT_SINGULARITY_CAP: f64 = 1.0e6;
/// Highest wavenumber (per axis) used by the random band-limited presets.
pub const RANDOM_BAND: i64 = 3;

fn parse_args(s: &str) -> (String, Vec<f64>, Option<String>) {
    let mut parts = s.split_whitespace();
    let name = parts.next().unwrap_or("").to_string();
    let mut args = Vec::new();
    let mut bad = None;
    for p in parts {
        match p.parse::<f64>() {
            Ok(v) => args.push(v),
            Err(_) => bad = Some(p.to_string()),
        }
    }
    (name, args, bad)
}

fn arity(name: &str, args: &[f64], min: usize, max: usize) -> Result<()> {
    if args.len() < min || args.len() > max {
        Err(Error::UnknownPreset(format!("{name} expects {min}..={max} numeric arguments, got {}", args.len())))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum SigmaPreset {
    /// Every `σ_ik` equal to the constant.
    Constant(f64),
    /// Finite trigonometric polynomial without divergence-free structure.
    Trig,
    /// Random coefficients decaying like `|κ|^{-s-d}`, band-limited to
    /// `|κ|_∞ <= RANDOM_BAND`.
    FourierDecay(f64),
    /// Columns are rotated gradients (d = 2) or curls (d = 3) of smooth
    /// potentials, so `∂_i σ_ik ≡ 0`.
    DivergenceFree,
}

impl fmt::Display for SigmaPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaPreset::Constant(c) => write!(f, "constant {c}"),
            SigmaPreset::Trig => f.write_str("trig"),
            SigmaPreset::FourierDecay(s) => write!(f, "fourier-decay {s}"),
            SigmaPreset::DivergenceFree => f.write_str("divergence-free"),
        }
    }
}

impl FromStr for SigmaPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (name, args, bad) = parse_args(s);
        if let Some(bad) = bad {
            return Err(Error::UnknownPreset(format!("{s}: bad argument `{bad}`")));
        }
        match name.as_str() {
            "constant" => {
                arity(&name, &args, 1, 1)?;
                Ok(SigmaPreset::Constant(args[0]))
            }
            "trig" => {
                arity(&name, &args, 0, 0)?;
                Ok(SigmaPreset::Trig)
            }
            "fourier-decay" => {
                arity(&name, &args, 1, 1)?;
                Ok(SigmaPreset::FourierDecay(args[0]))
            }
            "divergence-free" => {
                arity(&name, &args, 0, 0)?;
                Ok(SigmaPreset::DivergenceFree)
            }
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }
}

impl From<SigmaPreset> for String {
    fn from(p: SigmaPreset) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for SigmaPreset {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

fn trig_sigma(d: usize, i: usize, k: usize, x: &[f64]) -> f64 {
    let tau = 2.0 * PI;
    match (d, k) {
        (1, _) => (tau * x[0] + k as f64 * PI / 3.0).sin(),
        (2, 0) => {
            if i == 0 {
                (tau * x[0]).sin() * (tau * x[1]).sin()
            } else {
                (tau * x[0]).cos()
            }
        }
        _ => {
            let theta = (i + 2 * k) as f64 * PI / 5.0;
            (tau * x[i] + theta).sin() * (tau * x[(i + 1) % d]).cos()
        }
    }
}

fn divergence_free_sigma(d: usize, i: usize, k: usize, x: &[f64]) -> f64 {
    let tau = 2.0 * PI;
    let phase = k as f64 * PI / 4.0;
    match d {
        // σ_{·k} = (∂_2 ψ, -∂_1 ψ)/2π with ψ = sin(2πx₁ + φ) sin(2πx₂).
        2 => {
            if i == 0 {
                (tau * x[0] + phase).sin() * (tau * x[1]).cos()
            } else {
                -(tau * x[0] + phase).cos() * (tau * x[1]).sin()
            }
        }
        // Curl of A = (sin(2πx₂+φ), sin(2πx₃+φ), sin(2πx₁+φ)) / 2π: component
        // i never depends on x_i.
        _ => -(tau * x[(i + 2) % 3] + phase).cos(),
    }
}

/// Random band-limited trigonometric polynomial with amplitude `|κ|^{-decay}`.
fn random_trig(grid: GridSpec, seed: u64, stream: u64, decay: f64) -> ScalarField {
    let d = grid.d();
    let mut normal = CounterNormal::new(seed, stream);
    let mut modes: Vec<([i64; 3], f64, f64)> = Vec::new();
    let band = RANDOM_BAND;
    let range: Vec<i64> = (-band..=band).collect();
    let mut counter = 0u64;
    let mut push = |kappa: [i64; 3], modes: &mut Vec<_>| {
        // Half-space representative: first nonzero component positive.
        let first = kappa.iter().take(d).find(|&&c| c != 0).copied().unwrap_or(0);
        if first <= 0 {
            return;
        }
        let norm = kappa.iter().take(d).map(|&c| (c * c) as f64).sum::<f64>().sqrt();
        let amp = norm.powf(-decay);
        let a = amp * normal.at(counter);
        let b = amp * normal.at(counter + 1);
        counter += 2;
        modes.push((kappa, a, b));
    };
    match d {
        1 => range.iter().for_each(|&a| push([a, 0, 0], &mut modes)),
        2 => range.iter().for_each(|&a| range.iter().for_each(|&b| push([a, b, 0], &mut modes))),
        _ => range.iter().for_each(|&a| {
            range.iter().for_each(|&b| range.iter().for_each(|&c| push([a, b, c], &mut modes)))
        }),
    }
    ScalarField::from_fn(grid, |x| {
        modes
            .iter()
            .map(|(kappa, a, b)| {
                let phase = 2.0 * PI * (0..d).map(|ax| kappa[ax] as f64 * x[ax]).sum::<f64>();
                a * phase.cos() + b * phase.sin()
            })
            .sum()
    })
}

/// Builds `σ` from a preset. `seed` only affects random presets.
pub fn gen_sigma(preset: &SigmaPreset, grid: GridSpec, m: usize, seed: u64) -> Result<SigmaField> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be positive".into()));
    }
    let d = grid.d();
    match preset {
        SigmaPreset::Constant(c) => Ok(SigmaField::constant(grid, m, *c)),
        SigmaPreset::Trig => Ok(SigmaField::from_fn(grid, m, |i, k, x| trig_sigma(d, i, k, x))),
        SigmaPreset::DivergenceFree => {
            if d == 1 {
                return Err(Error::InvalidArgument(
                    "divergence-free preset needs d >= 2 (in d = 1 only constants qualify)".into(),
                ));
            }
            Ok(SigmaField::from_fn(grid, m, |i, k, x| divergence_free_sigma(d, i, k, x)))
        }
        SigmaPreset::FourierDecay(s) => {
            let components = (0..d * m)
                .map(|c| random_trig(grid, seed, c as u64, s + d as f64))
                .collect();
            SigmaField::new(grid, m, components)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum UPreset {
    Constant(f64),
    /// `cos 2πx₁ + ½ sin 2π(x₁+…+x_d) + ¼ cos 4πx_d`.
    Trig,
    /// Seeded random band-limited trigonometric polynomial.
    RandomTrig,
    /// Indicator of the cube `[a, b)^d`.
    BoxIndicator { a: f64, b: f64 },
    /// `min(cap, |x - c|^{-α})` around the cell centre `c = (½, …, ½)`.
    PowerSingularity { alpha: f64, cap: f64 },
}

impl fmt::Display for UPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UPreset::Constant(c) => write!(f, "constant {c}"),
            UPreset::Trig => f.write_str("trig"),
            UPreset::RandomTrig => f.write_str("random-trig"),
            UPreset::BoxIndicator { a, b } => write!(f, "box-indicator {a} {b}"),
            UPreset::PowerSingularity { alpha, cap } => write!(f, "power-singularity {alpha} {cap}"),
        }
    }
}

impl FromStr for UPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (name, args, bad) = parse_args(s);
        if let Some(bad) = bad {
            return Err(Error::UnknownPreset(format!("{s}: bad argument `{bad}`")));
        }
        match name.as_str() {
            "constant" => {
                arity(&name, &args, 1, 1)?;
                Ok(UPreset::Constant(args[0]))
            }
            "trig" => {
                arity(&name, &args, 0, 0)?;
                Ok(UPreset::Trig)
            }
            "random-trig" => {
                arity(&name, &args, 0, 0)?;
                Ok(UPreset::RandomTrig)
            }
            "box-indicator" => {
                arity(&name, &args, 0, 2)?;
                let (a, b) = match args.as_slice() {
                    [a, b] => (*a, *b),
                    _ => (0.25, 0.75),
                };
                if !(0.0..=1.0).contains(&a) || !(a..=1.0).contains(&b) {
                    return Err(Error::UnknownPreset(format!("{s}: need 0 <= a <= b <= 1")));
                }
                Ok(UPreset::BoxIndicator { a, b })
            }
            "power-singularity" => {
                arity(&name, &args, 1, 2)?;
                let cap = args.get(1).copied().unwrap_or(DEFAULT_SINGULARITY_CAP);
                if args[0] <= 0.0 || cap <= 0.0 {
                    return Err(Error::UnknownPreset(format!("{s}: alpha and cap must be positive")));
                }
                Ok(UPreset::PowerSingularity { alpha: args[0], cap })
            }
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }
}

impl From<UPreset> for String {
    fn from(p: UPreset) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for UPreset {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl UPreset {
    /// Rejects presets that model a function outside `L^p(T^d)`.
    pub fn check_lp(&self, p: f64, d: usize) -> Result<()> {
        if let UPreset::PowerSingularity { alpha, .. } = self {
            if alpha * p >= d as f64 {
                return Err(Error::NotInLp {
                    p,
                    reason: format!("|x|^-{alpha} has alpha*p = {} >= d = {d}", alpha * p),
                });
            }
        }
        Ok(())
    }

    /// Continuum `L^p` norm of the (capped) preset where a closed form exists.
    pub fn continuum_lp_norm(&self, p: f64, d: usize) -> Option<f64> {
        match *self {
            UPreset::Constant(c) => Some(c.abs()),
            UPreset::BoxIndicator { a, b } => Some((b - a).powf(d as f64 / p)),
            UPreset::PowerSingularity { alpha, cap } if d == 1 => {
                let e = 1.0 - alpha * p;
                if e == 0.0 {
                    return None;
                }
                let rc = cap.powf(-1.0 / alpha);
                let integral = if rc >= 0.5 {
                    cap.powf(p)
                } else {
                    2.0 * (rc * cap.powf(p) + (0.5f64.powf(e) - rc.powf(e)) / e)
                };
                Some(integral.powf(1.0 / p))
            }
            _ => None,
        }
    }
}

/// Builds `u` from a preset. `seed` only affects `random-trig`.
pub fn gen_u(preset: &UPreset, grid: GridSpec, seed: u64) -> ScalarField {
    let d = grid.d();
    let tau = 2.0 * PI;
    match *preset {
        UPreset::Constant(c) => ScalarField::constant(grid, c),
        UPreset::Trig => ScalarField::from_fn(grid, |x| {
            (tau * x[0]).cos() + 0.5 * (tau * x.iter().sum::<f64>()).sin() + 0.25 * (2.0 * tau * x[d - 1]).cos()
        }),
        UPreset::RandomTrig => random_trig(grid, seed, 1 << 32, 1.0),
        UPreset::BoxIndicator { a, b } => {
            ScalarField::from_fn(grid, |x| if x.iter().all(|&c| c >= a && c < b) { 1.0 } else { 0.0 })
        }
        UPreset::PowerSingularity { alpha, cap } => ScalarField::from_fn(grid, |x| {
            let r = x.iter().map(|c| (c - 0.5) * (c - 0.5)).sum::<f64>().sqrt();
            if r == 0.0 {
                cap
            } else {
                r.powf(-alpha).min(cap)
            }
        }),
    }
}

/// Smooth test functions for weighted integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum PhiPreset {
    Constant(f64),
    /// `1 + a sin 2πx₁`.
    Trig(f64),
}

impl Default for PhiPreset {
    fn default() -> Self {
        PhiPreset::Trig(0.5)
    }
}

impl fmt::Display for PhiPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiPreset::Constant(c) => write!(f, "constant {c}"),
            PhiPreset::Trig(a) => write!(f, "trig {a}"),
        }
    }
}

impl FromStr for PhiPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (name, args, bad) = parse_args(s);
        if let Some(bad) = bad {
            return Err(Error::UnknownPreset(format!("{s}: bad argument `{bad}`")));
        }
        match name.as_str() {
            "constant" => {
                arity(&name, &args, 1, 1)?;
                Ok(PhiPreset::Constant(args[0]))
            }
            "trig" => {
                arity(&name, &args, 0, 1)?;
                Ok(PhiPreset::Trig(args.first().copied().unwrap_or(0.5)))
            }
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }
}

impl From<PhiPreset> for String {
    fn from(p: PhiPreset) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for PhiPreset {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

pub fn gen_phi(preset: &PhiPreset, grid: GridSpec) -> ScalarField {
    match *preset {
        PhiPreset::Constant(c) => ScalarField::constant(grid, c),
        PhiPreset::Trig(a) => ScalarField::from_fn(grid, |x| 1.0 + a * (2.0 * PI * x[0]).sin()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{derivative, lq_norm, make_grid, DerivativeBackend, Exponent};

    #[test]
    fn parse_round_trip() {
        for s in ["constant 1", "trig", "fourier-decay 3", "divergence-free"] {
            assert_eq!(s.parse::<SigmaPreset>().unwrap().to_string(), s);
        }
        for s in ["trig", "random-trig", "box-indicator 0.25 0.75", "power-singularity 0.3 1000000"] {
            assert_eq!(s.parse::<UPreset>().unwrap().to_string(), s);
        }
        assert!(matches!("swirl".parse::<SigmaPreset>(), Err(Error::UnknownPreset(_))));
        assert!("constant".parse::<SigmaPreset>().is_err());
        assert!("box-indicator 0.8 0.2".parse::<UPreset>().is_err());
    }

    #[test]
    fn constant_sigma_has_zero_divergence() {
        let g = make_grid(1, 32).unwrap();
        let s = gen_sigma(&SigmaPreset::Constant(1.0), g, 1, 0).unwrap();
        assert!(s.get(0, 0).values().iter().all(|&v| v == 1.0));
        let div = derivative(s.get(0, 0), 0, DerivativeBackend::Spectral).unwrap();
        assert!(div.max_abs() < 1e-13);
    }

    #[test]
    fn trig_sigma_is_not_divergence_free() {
        let g = make_grid(2, 32).unwrap();
        let s = gen_sigma(&SigmaPreset::Trig, g, 1, 0).unwrap();
        let div = &derivative(s.get(0, 0), 0, DerivativeBackend::Spectral).unwrap()
            + &derivative(s.get(1, 0), 1, DerivativeBackend::Spectral).unwrap();
        let expected = ScalarField::from_fn(g, |x| 2.0 * PI * (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).sin());
        assert!((&div - &expected).max_abs() < 1e-11);
        assert!(div.max_abs() > 1.0);
    }

    #[test]
    fn divergence_free_preset() {
        for d in [2, 3] {
            let g = make_grid(d, 16).unwrap();
            let s = gen_sigma(&SigmaPreset::DivergenceFree, g, 2, 0).unwrap();
            for k in 0..2 {
                let mut div = ScalarField::zeros(g);
                for i in 0..d {
                    div = &div + &derivative(s.get(i, k), i, DerivativeBackend::Spectral).unwrap();
                }
                assert!(div.max_abs() < 1e-12, "d = {d}");
                assert!(s.get(0, k).max_abs() > 0.5);
            }
        }
        assert!(gen_sigma(&SigmaPreset::DivergenceFree, make_grid(1, 16).unwrap(), 1, 0).is_err());
    }

    #[test]
    fn fourier_decay_is_seed_deterministic() {
        let g = make_grid(2, 16).unwrap();
        let a = gen_sigma(&SigmaPreset::FourierDecay(3.0), g, 2, 7).unwrap();
        let b = gen_sigma(&SigmaPreset::FourierDecay(3.0), g, 2, 7).unwrap();
        let c = gen_sigma(&SigmaPreset::FourierDecay(3.0), g, 2, 8).unwrap();
        for (x, y) in a.components().iter().zip(b.components()) {
            assert!(x.values().iter().zip(y.values()).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
        assert_ne!(a, c);
        assert!(a.get(1, 1).max_abs() > 0.0);
    }

    #[test]
    fn box_indicator_norm() {
        let g = make_grid(1, 64).unwrap();
        let u = gen_u(&"box-indicator 0.25 0.75".parse().unwrap(), g, 0);
        assert_eq!(lq_norm(&u, Exponent::Finite(1.0)).unwrap(), 0.5);
    }

    #[test]
    fn trig_u_is_band_limited() {
        let g = make_grid(1, 64).unwrap();
        let u = gen_u(&UPreset::Trig, g, 0);
        let spec = crate::spectral::forward(&g, u.values());
        for (idx, c) in spec.iter().enumerate() {
            if crate::spectral::wavenumber(idx, 64).abs() > 2 {
                assert!(c.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_preset_lp_admissibility() {
        let p: UPreset = "power-singularity 0.3".parse().unwrap();
        assert!(p.check_lp(2.0, 1).is_ok());
        assert!(matches!(p.check_lp(4.0, 1), Err(Error::NotInLp { .. })));
        assert!(p.check_lp(4.0, 2).is_ok());
    }
}
