//! FFT plumbing on the uniform periodic grid.
//!
//! All transforms are unnormalized forward / normalized inverse, so that a
//! forward-inverse round trip is the identity. Layout is row-major with axis
//! 0 slowest.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::fields::GridSpec;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

fn transform(grid: &GridSpec, data: &mut [Complex64], dir: Direction) {
    let n = grid.n();
    let d = grid.d();
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match dir {
            Direction::Forward => p.plan_fft_forward(n),
            Direction::Inverse => p.plan_fft_inverse(n),
        }
    });
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    if d == 1 {
        fft.process_with_scratch(data, &mut scratch);
        return;
    }
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[start + j * stride] = *v;
                }
            }
        }
    }
}

pub(crate) fn forward(grid: &GridSpec, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(grid, &mut data, Direction::Forward);
    data
}

/// Inverse transform, keeping the real part.
pub(crate) fn inverse_real(grid: &GridSpec, mut spectrum: Vec<Complex64>) -> Vec<f64> {
    transform(grid, &mut spectrum, Direction::Inverse);
    let scale = 1.0 / grid.len() as f64;
    spectrum.into_iter().map(|c| c.re * scale).collect()
}

/// Signed wavenumber of DFT index `idx` on an `n`-point axis. The Nyquist
/// index maps to `+n/2`.
pub(crate) fn wavenumber(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// Multiplier of one spectral first derivative along an axis; the Nyquist
/// mode is zeroed so the derivative of a real field stays real.
pub(crate) fn first_derivative_symbol(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|idx| {
            if 2 * idx == n {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, 2.0 * PI * wavenumber(idx, n) as f64)
            }
        })
        .collect()
}

/// Per-axis index of a flat spectral position.
fn axis_index(flat: usize, axis: usize, grid: &GridSpec) -> usize {
    let n = grid.n();
    let stride = n.pow((grid.d() - 1 - axis) as u32);
    (flat / stride) % n
}

/// Applies the composite derivative `∂_{axes[0]} ∂_{axes[1]} …` to a spectrum.
pub(crate) fn differentiate_spectrum(grid: &GridSpec, spectrum: &mut [Complex64], axes: &[usize]) {
    if axes.is_empty() {
        return;
    }
    let symbol = first_derivative_symbol(grid.n());
    for (flat, c) in spectrum.iter_mut().enumerate() {
        let mut factor = Complex64::new(1.0, 0.0);
        for &axis in axes {
            factor *= symbol[axis_index(flat, axis, grid)];
        }
        *c *= factor;
    }
}

pub(crate) fn derivative(grid: &GridSpec, values: &[f64], axes: &[usize]) -> Vec<f64> {
    let mut spec = forward(grid, values);
    differentiate_spectrum(grid, &mut spec, axes);
    inverse_real(grid, spec)
}

/// Periodic convolution `h^d Σ_y a(x - y) b(y)` through the transform path.
pub(crate) fn convolve(grid: &GridSpec, a: &[f64], b: &[f64]) -> Vec<f64> {
    let fa = forward(grid, a);
    let mut fb = forward(grid, b);
    let vol = grid.cell_volume();
    for (x, y) in fb.iter_mut().zip(fa.iter()) {
        *x *= *y * vol;
    }
    inverse_real(grid, fb)
}

/// Convolution against a kernel whose spectrum is already known.
pub(crate) fn convolve_with_spectrum(grid: &GridSpec, kernel_hat: &[Complex64], b: &[f64]) -> Vec<f64> {
    let mut fb = forward(grid, b);
    let vol = grid.cell_volume();
    for (x, y) in fb.iter_mut().zip(kernel_hat.iter()) {
        *x *= *y * vol;
    }
    inverse_real(grid, fb)
}

/// Trigonometric interpolant evaluated at `x - shift`; exact for fields
/// with no Nyquist content.
pub(crate) fn shift(grid: &GridSpec, values: &[f64], shift: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let mut spec = forward(grid, values);
    for (flat, c) in spec.iter_mut().enumerate() {
        let phase: f64 = (0..grid.d())
            .map(|axis| {
                let idx = axis_index(flat, axis, grid);
                if 2 * idx == n {
                    0.0
                } else {
                    wavenumber(idx, n) as f64 * shift[axis]
                }
            })
            .sum();
        *c *= Complex64::from_polar(1.0, -2.0 * PI * phase);
    }
    inverse_real(grid, spec)
}

/// 2/3-rule truncation: zero every mode with `|k| > n/3` on some axis.
pub(crate) fn dealias(grid: &GridSpec, values: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let cutoff = (n / 3) as i64;
    let mut spec = forward(grid, values);
    for (flat, c) in spec.iter_mut().enumerate() {
        let keep = (0..grid.d()).all(|axis| wavenumber(axis_index(flat, axis, grid), n).abs() <= cutoff);
        if !keep {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    inverse_real(grid, spec)
}
