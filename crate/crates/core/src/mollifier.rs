//! Friedrichs mollifiers on the grid and periodic convolution against them.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{derivative, derivative2, DerivativeBackend, GridSpec, ScalarField};
use crate::spectral;

/// Smallest admissible kernel width in grid spacings.
pub const RESOLUTION_FLOOR: f64 = 8.0;
/// Largest admissible kernel width; the support ball must fit in the torus.
pub const MAX_WIDTH: f64 = 0.25;
/// Direct quadrature is refused above this many grid points.
pub const DIRECT_COST_LIMIT: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// `exp(-1/(1 - |z/δ|²))` on the open ball.
    #[default]
    Bump,
    /// `exp(-|z|²/(2(δ/3)²))` cut off at `|z| = δ`.
    TruncatedGaussian,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Bump => "bump",
            KernelKind::TruncatedGaussian => "truncated-gaussian",
        })
    }
}

impl FromStr for KernelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bump" => Ok(KernelKind::Bump),
            "truncated-gaussian" => Ok(KernelKind::TruncatedGaussian),
            other => Err(Error::Config(format!("unknown kernel kind `{other}`"))),
        }
    }
}

impl KernelKind {
    fn profile(self, r2: f64) -> f64 {
        if r2 >= 1.0 {
            return 0.0;
        }
        match self {
            KernelKind::Bump => (-1.0 / (1.0 - r2)).exp(),
            KernelKind::TruncatedGaussian => (-4.5 * r2).exp(),
        }
    }
}

/// Which algorithm evaluates a periodic convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvolutionPath {
    /// FFT, `O(N^d log N)`.
    #[default]
    Transform,
    /// Literal double sum, `O(N^{2d})`; the reference semantics.
    Direct,
}

/// A sampled, discretely normalized mollifier `J_δ`, stored with its origin
/// at node 0 (wrap-around layout).
#[derive(Debug, Clone)]
pub struct MollifierKernel {
    kind: KernelKind,
    delta: f64,
    samples: ScalarField,
    spectrum: Vec<Complex64>,
}

pub fn build_kernel(kind: KernelKind, delta: f64, grid: GridSpec) -> Result<MollifierKernel> {
    let floor = RESOLUTION_FLOOR * grid.h();
    if !(delta >= floor) {
        return Err(Error::UnderResolvedKernel { delta, floor });
    }
    if delta > MAX_WIDTH {
        return Err(Error::SupportExceedsTorus { delta });
    }
    let inv = 1.0 / (delta * delta);
    let mut values: Vec<f64> = (0..grid.len())
        .map(|flat| {
            let z = grid.displacement(flat);
            let r2 = z.iter().map(|c| c * c).sum::<f64>() * inv;
            kind.profile(r2)
        })
        .collect();
    let vol = grid.cell_volume();
    let mass = vol * values.iter().sum::<f64>();
    for v in &mut values {
        *v /= mass;
    }
    // Push the last rounding residue onto the (self-symmetric) origin sample.
    let residue = 1.0 - vol * values.iter().sum::<f64>();
    values[0] += residue / vol;
    let samples = ScalarField::raw(grid, values);
    let spectrum = spectral::forward(&grid, samples.values());
    Ok(MollifierKernel { kind, delta, samples, spectrum })
}

impl MollifierKernel {
    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn grid(&self) -> &GridSpec {
        self.samples.grid()
    }

    pub fn samples(&self) -> &ScalarField {
        &self.samples
    }

    /// `h^d Σ J_δ`.
    pub fn mass(&self) -> f64 {
        self.samples.integral()
    }

    /// `max |J(z) - J(-z)|`.
    pub fn evenness_residual(&self) -> f64 {
        let g = self.grid();
        let v = self.samples.values();
        (0..g.len()).map(|n| (v[n] - v[g.reflected(n)]).abs()).fold(0.0, f64::max)
    }

    /// `∂^{axes} J_δ` of the sampled kernel.
    pub fn derivative(&self, axes: &[usize], backend: DerivativeBackend) -> Result<ScalarField> {
        match axes {
            [] => Ok(self.samples.clone()),
            [i] => derivative(&self.samples, *i, backend),
            [i, j] => derivative2(&self.samples, *i, *j, backend),
            _ => Err(Error::InvalidArgument("kernel derivatives above second order are not used".into())),
        }
    }

    /// `h^d Σ z_a J(z)`, which vanishes for an even kernel.
    pub fn first_moment(&self, a: usize) -> f64 {
        let g = self.grid();
        let v = self.samples.values();
        g.cell_volume() * (0..g.len()).map(|n| g.displacement(n)[a] * v[n]).sum::<f64>()
    }

    /// Writes `(z, J_δ(z))` rows for a one-dimensional kernel, `z` ascending.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let g = self.grid();
        if g.d() != 1 {
            return Err(Error::InvalidArgument("kernel dump is defined for d = 1".into()));
        }
        writeln!(out, "z,j")?;
        let n = g.n();
        for step in 0..n {
            let idx = (step + n / 2 + 1) % n;
            writeln!(out, "{},{}", g.displacement(idx)[0], self.samples.values()[idx])?;
        }
        Ok(())
    }
}

/// `J_δ f` through the transform path.
pub fn mollify(f: &ScalarField, k: &MollifierKernel) -> Result<ScalarField> {
    f.check_grid(k.grid())?;
    let grid = *f.grid();
    Ok(ScalarField::raw(grid, spectral::convolve_with_spectrum(&grid, &k.spectrum, f.values())))
}

/// `J_δ f` as the literal sum `h^d Σ_y J_δ(x - y) f(y)`.
pub fn direct_convolution(f: &ScalarField, k: &MollifierKernel) -> Result<ScalarField> {
    convolve(k.samples(), f, ConvolutionPath::Direct)
}

/// Periodic convolution `(a * b)(x) = h^d Σ_y a(x - y) b(y)`.
pub fn convolve(a: &ScalarField, b: &ScalarField, path: ConvolutionPath) -> Result<ScalarField> {
    b.check_grid(a.grid())?;
    let grid = *a.grid();
    match path {
        ConvolutionPath::Transform => Ok(ScalarField::raw(grid, spectral::convolve(&grid, a.values(), b.values()))),
        ConvolutionPath::Direct => {
            let points = grid.len();
            if points > DIRECT_COST_LIMIT {
                return Err(Error::CostGuard { points, limit: DIRECT_COST_LIMIT });
            }
            Ok(ScalarField::raw(grid, direct_sum(&grid, a.values(), b.values())))
        }
    }
}

fn direct_sum(grid: &GridSpec, a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let d = grid.d();
    let vol = grid.cell_volume();
    let idx: Vec<[usize; 3]> = (0..grid.len()).map(|f| grid.multi_index(f)).collect();
    (0..grid.len())
        .map(|x| {
            let xi = idx[x];
            let mut acc = 0.0;
            for (y, yi) in idx.iter().enumerate() {
                let mut diff = 0;
                for axis in 0..d {
                    diff = diff * n + (xi[axis] + n - yi[axis]) % n;
                }
                acc += a[diff] * b[y];
            }
            vol * acc
        })
        .collect()
}

/// `h^d Σ_{|z| < δ} |z| |∂_i J_δ(z)|`, the weighted `L¹` moment behind the
/// δ-uniform commutator bounds.
///
/// The sum runs over the support ball of the continuum kernel: the spectral
/// derivative of a sampled compactly supported kernel rings across the
/// whole torus, and the absolute value would otherwise accumulate that
/// ringing with weights up to `|z| = √d/2`.
pub fn weighted_moment_first(k: &MollifierKernel, i: usize) -> Result<f64> {
    let g = *k.grid();
    if i >= g.d() {
        return Err(Error::InvalidArgument(format!("axis {i} out of range for d = {}", g.d())));
    }
    let dj = k.derivative(&[i], DerivativeBackend::Spectral)?;
    let delta2 = k.delta * k.delta;
    let sum: f64 = (0..g.len())
        .filter_map(|n| {
            let z = g.displacement(n);
            let r2: f64 = z.iter().map(|c| c * c).sum();
            (r2 < delta2).then(|| r2.sqrt() * dj.values()[n].abs())
        })
        .sum();
    Ok(g.cell_volume() * sum)
}

/// `h^d Σ z_a z_b ∂²_{ij} J_δ(z)`, which approximates `δ_ia δ_jb + δ_ja δ_ib`.
pub fn second_moment_matrix(k: &MollifierKernel, i: usize, j: usize, a: usize, b: usize) -> Result<f64> {
    let g = *k.grid();
    if [i, j, a, b].iter().any(|&ax| ax >= g.d()) {
        return Err(Error::InvalidArgument(format!(
            "axes ({i},{j},{a},{b}) out of range for d = {}",
            g.d()
        )));
    }
    let d2 = k.derivative(&[i, j], DerivativeBackend::Spectral)?;
    let sum: f64 = (0..g.len())
        .map(|n| {
            let z = g.displacement(n);
            z[a] * z[b] * d2.values()[n]
        })
        .sum();
    Ok(g.cell_volume() * sum)
}

/// `δ_ia δ_jb + δ_ja δ_ib`.
pub fn second_moment_exact(i: usize, j: usize, a: usize, b: usize) -> f64 {
    let kd = |x: usize, y: usize| if x == y { 1.0 } else { 0.0 };
    kd(i, a) * kd(j, b) + kd(j, a) * kd(i, b)
}

/// The δ ladder `2^{-k}` for `k = k_min..=k_max`, dropping rungs below the
/// resolution floor.
pub fn delta_ladder(grid: &GridSpec, k_min: u32, k_max: u32) -> Vec<f64> {
    let floor = RESOLUTION_FLOOR * grid.h();
    (k_min.max(2)..=k_max)
        .map(|k| 0.5f64.powi(k as i32))
        .filter(|&delta| delta >= floor)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn bump_is_normalized_and_even() {
        let g = make_grid(1, 256).unwrap();
        let k = build_kernel(KernelKind::Bump, 0.25, g).unwrap();
        assert!((k.mass() - 1.0).abs() <= 2.0 * f64::EPSILON);
        assert!(k.evenness_residual() <= 1e-15);
        assert!(k.first_moment(0).abs() < 1e-14);
        assert!(k.samples().values().iter().all(|&v| v >= 0.0));
        let support_ok = (0..g.len()).all(|n| g.displacement(n)[0].abs() < 0.25 || k.samples().values()[n] == 0.0);
        assert!(support_ok);
    }

    #[test]
    fn width_preconditions() {
        let g = make_grid(1, 64).unwrap();
        assert!(matches!(
            build_kernel(KernelKind::Bump, 4.0 * g.h(), g),
            Err(Error::UnderResolvedKernel { .. })
        ));
        assert!(matches!(
            build_kernel(KernelKind::Bump, 0.3, make_grid(1, 1024).unwrap()),
            Err(Error::SupportExceedsTorus { .. })
        ));
        assert!(build_kernel(KernelKind::Bump, 8.0 * g.h(), g).is_ok());
    }

    #[test]
    fn constants_are_fixed_points() {
        let g = make_grid(2, 32).unwrap();
        let k = build_kernel(KernelKind::Bump, 0.25, g).unwrap();
        let c = ScalarField::constant(g, 3.25);
        let out = mollify(&c, &k).unwrap();
        assert!(out.values().iter().all(|v| (v - 3.25).abs() < 1e-14));
    }

    #[test]
    fn mollify_preserves_mean() {
        let g = make_grid(1, 128).unwrap();
        let k = build_kernel(KernelKind::TruncatedGaussian, 0.125, g).unwrap();
        let f = ScalarField::from_fn(g, |x| 1.0 + (2.0 * PI * x[0]).sin() + if x[0] < 0.3 { 2.0 } else { 0.0 });
        let out = mollify(&f, &k).unwrap();
        assert!((out.mean() - f.mean()).abs() <= 1e-13 * f.mean().abs());
    }

    #[test]
    fn delta_spike_recovers_kernel() {
        let g = make_grid(1, 64).unwrap();
        let k = build_kernel(KernelKind::Bump, 0.25, g).unwrap();
        let mut v = vec![0.0; 64];
        v[5] = 64.0;
        let spike = ScalarField::from_values(g, v).unwrap();
        let out = direct_convolution(&spike, &k).unwrap();
        for n in 0..64 {
            assert!((out.values()[n] - k.samples().values()[(n + 64 - 5) % 64]).abs() < 1e-12);
        }
        let zero = direct_convolution(&ScalarField::zeros(g), &k).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn direct_cost_guard() {
        let g = make_grid(2, 512).unwrap();
        let k = build_kernel(KernelKind::Bump, 0.25, g).unwrap();
        assert!(matches!(
            direct_convolution(&ScalarField::zeros(g), &k),
            Err(Error::CostGuard { .. })
        ));
    }

    #[test]
    fn grid_mismatch_rejected() {
        let k = build_kernel(KernelKind::Bump, 0.25, make_grid(1, 64).unwrap()).unwrap();
        let f = ScalarField::zeros(make_grid(1, 128).unwrap());
        assert!(matches!(mollify(&f, &k), Err(Error::GridMismatch)));
    }

    #[test]
    fn second_moment_identity_1d() {
        let g = make_grid(1, 512).unwrap();
        let k = build_kernel(KernelKind::Bump, 0.125, g).unwrap();
        assert!((second_moment_matrix(&k, 0, 0, 0, 0).unwrap() - 2.0).abs() < 5e-3);
        assert!(second_moment_matrix(&k, 0, 0, 0, 1).is_err());
    }

    #[test]
    fn ladder_respects_floor() {
        let g = make_grid(1, 1024).unwrap();
        let ladder = delta_ladder(&g, 2, 10);
        assert_eq!(ladder, vec![0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125]);
    }

    #[test]
    fn kernel_csv_dump() {
        let g = make_grid(1, 32).unwrap();
        let k = build_kernel(KernelKind::Bump, 0.25, g).unwrap();
        let mut buf = Vec::new();
        k.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "z,j");
        assert_eq!(lines.len(), 33);
        assert!(lines[1].starts_with("-0.46875,"));
        assert!(lines[32].starts_with("0.5,"));
    }
}
