//! Periodic grids on the unit torus, field containers, derivatives and norms.
//!
//! Every field lives on a uniform grid over `[0,1)^d` with `N` nodes per
//! axis, `N` a power of two. Values are stored row-major with axis 0 slowest.
//! Integrals are Riemann sums with cell volume `h^d`, so the torus carries
//! unit (probability) measure.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral;

pub const MIN_POINTS_PER_AXIS: usize = 16;
pub const MAX_DIMENSION: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    d: usize,
    n: usize,
}

impl GridSpec {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if !(1..=MAX_DIMENSION).contains(&d) {
            return Err(Error::InvalidGrid(format!("dimension {d} outside 1..=3")));
        }
        if !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("N = {n} is not a power of two")));
        }
        if n < MIN_POINTS_PER_AXIS {
            return Err(Error::InvalidGrid(format!("N = {n} is below the minimum 16")));
        }
        Ok(Self { d, n })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid spacing `1/N`; exact because `N` is a power of two.
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.d as i32)
    }

    /// Total node count `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis integer indices of a flat node index.
    pub fn multi_index(&self, flat: usize) -> [usize; MAX_DIMENSION] {
        let mut out = [0; MAX_DIMENSION];
        let mut rest = flat;
        for axis in (0..self.d).rev() {
            out[axis] = rest % self.n;
            rest /= self.n;
        }
        out
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().take(self.d).fold(0, |acc, &i| acc * self.n + (i % self.n))
    }

    /// Node coordinates `x_a = i_a h`.
    pub fn coordinates(&self, flat: usize) -> [f64; MAX_DIMENSION] {
        let idx = self.multi_index(flat);
        let h = self.h();
        let mut x = [0.0; MAX_DIMENSION];
        for axis in 0..self.d {
            x[axis] = idx[axis] as f64 * h;
        }
        x
    }

    /// Minimal-image displacement of a node from the origin, each component
    /// in `(-1/2, 1/2]`. Computed from integer offsets so that `z(-n) = -z(n)`
    /// holds exactly.
    pub fn displacement(&self, flat: usize) -> [f64; MAX_DIMENSION] {
        let idx = self.multi_index(flat);
        let h = self.h();
        let mut z = [0.0; MAX_DIMENSION];
        for axis in 0..self.d {
            z[axis] = spectral::wavenumber(idx[axis], self.n) as f64 * h;
        }
        z
    }

    /// Flat index of the node at `-x` for the node at `x`.
    pub fn reflected(&self, flat: usize) -> usize {
        let idx = self.multi_index(flat);
        let mut out = [0; MAX_DIMENSION];
        for axis in 0..self.d {
            out[axis] = (self.n - idx[axis]) % self.n;
        }
        self.flat_index(&out[..self.d])
    }
}

pub fn make_grid(d: usize, n: usize) -> Result<GridSpec> {
    GridSpec::new(d, n)
}

/// A Lebesgue exponent that may be infinite. Infinity is kept symbolic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(v) => Some(v),
            Exponent::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    fn check_at_least_one(self) -> Result<()> {
        match self {
            Exponent::Finite(v) if !(v >= 1.0) || !v.is_finite() => Err(Error::InvalidExponent(
                format!("exponent {v} must be a finite real >= 1 or infinity"),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
            other => other
                .parse::<f64>()
                .map(Exponent::Finite)
                .map_err(|_| Error::InvalidExponent(format!("cannot parse `{other}`"))),
        }
    }
}

impl From<Exponent> for String {
    fn from(e: Exponent) -> String {
        e.to_string()
    }
}

impl TryFrom<String> for Exponent {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<f64> for Exponent {
    fn from(v: f64) -> Self {
        if v.is_infinite() {
            Exponent::Infinite
        } else {
            Exponent::Finite(v)
        }
    }
}

/// The integrability pair `(p, q)` with the conjugate exponents that govern
/// the regularity of `σ`: `r1 = pq/(p-q)` and `r2 = 2pq/(p-q)`, both infinite
/// when `p = q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
    pub r1: Exponent,
    pub r2: Exponent,
}

pub fn exponents(p: f64, q: f64) -> Result<Exponents> {
    if !p.is_finite() || p < 2.0 {
        return Err(Error::InvalidExponent(format!("p = {p} must satisfy p >= 2")));
    }
    if !q.is_finite() || q < 1.0 {
        return Err(Error::InvalidExponent(format!("q = {q} must satisfy q >= 1")));
    }
    if q > p {
        return Err(Error::InvalidExponent(format!("q = {q} exceeds p = {p}")));
    }
    let (r1, r2) = if p == q {
        (Exponent::Infinite, Exponent::Infinite)
    } else {
        let r = p * q / (p - q);
        (Exponent::Finite(r), Exponent::Finite(2.0 * r))
    };
    Ok(Exponents { p, q, r1, r2 })
}

impl Exponents {
    /// `p/(p - q + 1)`, which never exceeds `q` on the admissible range.
    pub fn convexity_bound(&self) -> f64 {
        self.p / (self.p - self.q + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeBackend {
    /// Fourier multiplier; exact below the Nyquist mode.
    #[default]
    Spectral,
    /// Second-order centered difference, kept as a cross-check.
    Centered2,
}

impl FromStr for DerivativeBackend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Self::Spectral),
            "centered2" => Ok(Self::Centered2),
            other => Err(Error::Config(format!("unknown derivative backend `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at node {pos}")));
        }
        Ok(Self { grid, values })
    }

    /// Unchecked constructor for values produced by finite arithmetic.
    pub(crate) fn raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.coordinates(i);
                f(&x[..grid.d()])
            })
            .collect();
        Self { grid, values }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Self::raw(
            self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `h^d Σ f`.
    pub fn integral(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().sum::<f64>()
    }

    pub fn check_grid(&self, other: &GridSpec) -> Result<()> {
        if &self.grid == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

/// Pointwise product.
impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a * b)
    }
}

impl Mul<&ScalarField> for f64 {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        rhs.scale(self)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|v| -v)
    }
}

/// An `R^m`-valued field: `m` scalar components on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldM {
    grid: GridSpec,
    components: Vec<ScalarField>,
}

impl VectorFieldM {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidArgument("vector field needs at least one component".into()))?;
        let grid = first.grid;
        if components.iter().any(|c| c.grid != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, components })
    }

    pub fn zeros(grid: GridSpec, m: usize) -> Self {
        Self { grid, components: vec![ScalarField::zeros(grid); m] }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, k: usize) -> &ScalarField {
        &self.components[k]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    /// Pointwise Euclidean inner product `Σ_k a_k b_k`.
    pub fn dot(&self, other: &Self) -> ScalarField {
        assert_eq!(self.m(), other.m(), "component count mismatch");
        let mut out = ScalarField::zeros(self.grid);
        for (a, b) in self.components.iter().zip(&other.components) {
            for ((o, &x), &y) in out.values.iter_mut().zip(&a.values).zip(&b.values) {
                *o += x * y;
            }
        }
        out
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        self.dot(self).map(f64::sqrt)
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self { grid: self.grid, components: self.components.iter().map(f).collect() }
    }

    pub fn zip_components(&self, other: &Self, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        assert_eq!(self.m(), other.m(), "component count mismatch");
        Self {
            grid: self.grid,
            components: self.components.iter().zip(&other.components).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }
}

/// The noise coefficient matrix `σ = (σ_ik)`, `d × m` scalar components.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaField {
    grid: GridSpec,
    m: usize,
    components: Vec<ScalarField>,
}

/// Discrete Sobolev norms of `σ`, summed over its components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaRegularity {
    pub r: Exponent,
    pub w1: f64,
    pub w2: f64,
}

impl SigmaField {
    /// `components[i * m + k]` holds `σ_ik`.
    pub fn new(grid: GridSpec, m: usize, components: Vec<ScalarField>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("m must be positive".into()));
        }
        if components.len() != grid.d() * m {
            return Err(Error::ComponentMismatch { expected: grid.d() * m, found: components.len() });
        }
        if components.iter().any(|c| c.grid != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, m, components })
    }

    pub fn from_fn(grid: GridSpec, m: usize, f: impl Fn(usize, usize, &[f64]) -> f64) -> Self {
        let components = (0..grid.d())
            .flat_map(|i| (0..m).map(move |k| (i, k)))
            .map(|(i, k)| ScalarField::from_fn(grid, |x| f(i, k, x)))
            .collect();
        Self { grid, m, components }
    }

    pub fn constant(grid: GridSpec, m: usize, c: f64) -> Self {
        Self::from_fn(grid, m, |_, _, _| c)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn d(&self) -> usize {
        self.grid.d()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, k: usize) -> &ScalarField {
        &self.components[i * self.m + k]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { grid: self.grid, m: self.m, components: self.components.iter().map(|s| s.scale(c)).collect() }
    }

    /// `max_x Σ_{i,k} σ_ik(x)^2`.
    pub fn max_frobenius_sq(&self) -> f64 {
        (0..self.grid.len())
            .map(|n| self.components.iter().map(|c| c.values[n] * c.values[n]).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.components.iter().all(|c| c.values.iter().all(|&v| v == 0.0))
    }

    /// Every `σ_ik` takes a single value on the whole grid.
    pub fn is_spatially_constant(&self) -> bool {
        self.components.iter().all(|c| c.values.iter().all(|&v| v == c.values[0]))
    }

    /// Discrete `W^{1,r}` and `W^{2,r}` norms (spectral derivatives).
    pub fn regularity(&self, r: Exponent) -> Result<SigmaRegularity> {
        let mut w1 = 0.0;
        let mut w2 = 0.0;
        for c in &self.components {
            w1 += sobolev_norm(c, 1, r)?;
            w2 += sobolev_norm(c, 2, r)?;
        }
        Ok(SigmaRegularity { r, w1, w2 })
    }
}

/// `(h^d Σ |f|^q)^{1/q}`; the discrete maximum for `q = ∞`.
pub fn lq_norm(f: &ScalarField, q: Exponent) -> Result<f64> {
    q.check_at_least_one()?;
    Ok(lq_norm_values(f.grid(), f.values(), q))
}

pub(crate) fn lq_norm_values(grid: &GridSpec, values: &[f64], q: Exponent) -> f64 {
    match q {
        Exponent::Infinite => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        Exponent::Finite(q) => {
            let sum: f64 = if q == 1.0 {
                values.iter().map(|v| v.abs()).sum()
            } else if q == 2.0 {
                values.iter().map(|v| v * v).sum()
            } else {
                values.iter().map(|v| v.abs().powf(q)).sum()
            };
            (grid.cell_volume() * sum).powf(1.0 / q)
        }
    }
}

/// L^q norm of the pointwise Euclidean magnitude of a vector field.
pub fn lq_norm_vector(g: &VectorFieldM, q: Exponent) -> Result<f64> {
    lq_norm(&g.magnitude(), q)
}

pub fn derivative(f: &ScalarField, axis: usize, backend: DerivativeBackend) -> Result<ScalarField> {
    let grid = *f.grid();
    if axis >= grid.d() {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range for d = {}", grid.d())));
    }
    Ok(match backend {
        DerivativeBackend::Spectral => ScalarField::raw(grid, spectral::derivative(&grid, f.values(), &[axis])),
        DerivativeBackend::Centered2 => centered_difference(f, axis),
    })
}

/// Mixed second derivative `∂_i ∂_j f`; spectrally one multiplier pass.
pub fn derivative2(f: &ScalarField, i: usize, j: usize, backend: DerivativeBackend) -> Result<ScalarField> {
    let grid = *f.grid();
    if i >= grid.d() || j >= grid.d() {
        return Err(Error::InvalidArgument(format!("axes ({i},{j}) out of range for d = {}", grid.d())));
    }
    match backend {
        DerivativeBackend::Spectral => Ok(ScalarField::raw(grid, spectral::derivative(&grid, f.values(), &[i, j]))),
        DerivativeBackend::Centered2 => derivative(&centered_difference(f, j), i, backend),
    }
}

fn centered_difference(f: &ScalarField, axis: usize) -> ScalarField {
    let grid = *f.grid();
    let n = grid.n();
    let stride = n.pow((grid.d() - 1 - axis) as u32);
    let inv = 0.5 / grid.h();
    let values = (0..grid.len())
        .map(|flat| {
            let i = (flat / stride) % n;
            let up = flat - i * stride + ((i + 1) % n) * stride;
            let down = flat - i * stride + ((i + n - 1) % n) * stride;
            (f.values[up] - f.values[down]) * inv
        })
        .collect();
    ScalarField::raw(grid, values)
}

/// Sum of the L^r norms of `f` and all its spectral partial derivatives
/// `∂^α f` with `1 <= |α| <= order` (one term per multi-index).
pub fn sobolev_norm(f: &ScalarField, order: usize, r: Exponent) -> Result<f64> {
    r.check_at_least_one()?;
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidArgument(format!("Sobolev order {order} not in {{1, 2}}")));
    }
    let grid = *f.grid();
    let d = grid.d();
    let mut total = lq_norm_values(&grid, f.values(), r);
    for i in 0..d {
        total += lq_norm_values(&grid, &spectral::derivative(&grid, f.values(), &[i]), r);
    }
    if order == 2 {
        for i in 0..d {
            for j in i..d {
                total += lq_norm_values(&grid, &spectral::derivative(&grid, f.values(), &[i, j]), r);
            }
        }
    }
    Ok(total)
}
