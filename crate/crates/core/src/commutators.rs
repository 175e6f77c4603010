//! Mollification error terms and the double commutator.
//!
//! With `K` the gradient-noise operator and `J` convolution against `J_δ`:
//!
//! * `E2 = J K u - K J u` (an `R^m`-valued field),
//! * `E3 = ½ (K K J u - J K K u)`,
//! * `[[K, J], K] u = 2 K J K u - J K K u - K K J u`.
//!
//! The double commutator splits into eight integral terms `T1..T8` in which
//! every derivative that would fall on `u` is moved onto the kernel. Each
//! `T_n` below carries its own sign, so that
//! `2KJKu = T1 + T2`, `JKKu = T3 + T4` and `KKJu = T5 + T6 + T7 + T8`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fields::{lq_norm, Exponent, ScalarField, SigmaField, VectorFieldM};
use crate::mollifier::{build_kernel, convolve, ConvolutionPath, KernelKind, MollifierKernel};
use crate::operators::{Discretization, GradientNoise};

/// The eight literal integral terms together with the grouped sums
/// `I1 = T2 - T6`, `I2 = -T4 - T8`, `I3 = T1 - T3 - T7`; `T5` stands alone.
#[derive(Debug, Clone)]
pub struct DecompositionTerms {
    pub t: [ScalarField; 8],
    pub i1: ScalarField,
    pub i2: ScalarField,
    pub i3: ScalarField,
}

impl DecompositionTerms {
    pub fn term(&self, n: usize) -> &ScalarField {
        &self.t[n - 1]
    }

    pub fn standalone(&self) -> &ScalarField {
        &self.t[4]
    }

    /// Per-node dump: `node,T1..T8,I1,I2,I3,double_commutator`.
    pub fn to_csv(&self, double_commutator: &ScalarField) -> String {
        let mut out = String::from("node,T1,T2,T3,T4,T5,T6,T7,T8,I1,I2,I3,double_commutator\n");
        for n in 0..double_commutator.values().len() {
            let mut row = vec![n.to_string()];
            row.extend(self.t.iter().map(|f| format!("{:e}", f.values()[n])));
            for f in [&self.i1, &self.i2, &self.i3, double_commutator] {
                row.push(format!("{:e}", f.values()[n]));
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// `I1 + I2 + I3 - T5`, which equals the double commutator.
    pub fn reassembled(&self) -> ScalarField {
        &(&(&self.i1 + &self.i2) + &self.i3) - &self.t[4]
    }
}

/// Closed-form δ ↓ 0 limits of `I1`, `I2`, `I3` and `-T5`.
#[derive(Debug, Clone)]
pub struct LimitFields {
    /// `2 |∇σ|² u`
    pub l1: ScalarField,
    /// `∂_j(σ_ik ∂_i σ_jk) u`
    pub l2: ScalarField,
    /// `-(∂_j σ_ik ∂_i σ_jk + |∇σ|²) u`
    pub l3: ScalarField,
    /// `-∇(σ ∇σ) u`
    pub l5: ScalarField,
}

impl LimitFields {
    pub fn sum(&self) -> ScalarField {
        &(&(&self.l1 + &self.l2) + &self.l3) + &self.l5
    }
}

/// L^q norms of `I1 - L1`, `I2 - L2`, `I3 - L3`, `-T5 - L5`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitResiduals {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub t5: f64,
}

impl LimitResiduals {
    pub fn as_array(&self) -> [f64; 4] {
        [self.i1, self.i2, self.i3, self.t5]
    }
}

/// Commutator calculus for one `(σ, J_δ)` pair.
#[derive(Debug, Clone, Copy)]
pub struct Commutators<'a> {
    noise: GradientNoise<'a>,
    kernel: &'a MollifierKernel,
}

impl<'a> Commutators<'a> {
    pub fn new(sigma: &'a SigmaField, kernel: &'a MollifierKernel) -> Result<Self> {
        Self::with_discretization(sigma, kernel, Discretization::default())
    }

    pub fn with_discretization(
        sigma: &'a SigmaField,
        kernel: &'a MollifierKernel,
        disc: Discretization,
    ) -> Result<Self> {
        ScalarField::zeros(*sigma.grid()).check_grid(kernel.grid())?;
        Ok(Self { noise: GradientNoise::with_discretization(sigma, disc), kernel })
    }

    pub fn noise(&self) -> &GradientNoise<'a> {
        &self.noise
    }

    pub fn kernel(&self) -> &MollifierKernel {
        self.kernel
    }

    /// Constant-coefficient `K` commutes with `J` exactly; the generic path
    /// only reproduces that to roundoff.
    fn commutes(&self) -> bool {
        self.noise.sigma().is_spatially_constant()
    }

    fn path(&self) -> ConvolutionPath {
        self.noise.discretization().convolution
    }

    fn conv(&self, a: &ScalarField, f: &ScalarField) -> ScalarField {
        convolve(a, f, self.path()).expect("operands share the kernel grid; cost guard checked in mollify")
    }

    /// `J f`.
    pub fn mollify(&self, f: &ScalarField) -> Result<ScalarField> {
        f.check_grid(self.kernel.grid())?;
        convolve(self.kernel.samples(), f, self.path())
    }

    fn mollify_vector(&self, g: &VectorFieldM) -> Result<VectorFieldM> {
        VectorFieldM::new(g.components().iter().map(|c| self.mollify(c)).collect::<Result<_>>()?)
    }

    /// `E2 = J K u - K J u`.
    pub fn e2(&self, u: &ScalarField) -> Result<VectorFieldM> {
        if self.commutes() {
            u.check_grid(self.kernel.grid())?;
            return Ok(VectorFieldM::zeros(*u.grid(), self.noise.sigma().m()));
        }
        self.e2_generic(u)
    }

    fn e2_generic(&self, u: &ScalarField) -> Result<VectorFieldM> {
        let jku = self.mollify_vector(&self.noise.k_scalar(u)?)?;
        let kju = self.noise.k_scalar(&self.mollify(u)?)?;
        Ok(jku.zip_components(&kju, |a, b| a - b))
    }

    /// `[K, J] u = K J u - J K u = -E2`.
    pub fn bracket(&self, u: &ScalarField) -> Result<VectorFieldM> {
        Ok(self.e2(u)?.map_components(|c| -c))
    }

    /// `[K, J] g` for an `R^m`-valued `g` (scalar result).
    pub fn bracket_vector(&self, g: &VectorFieldM) -> Result<ScalarField> {
        if self.commutes() {
            self.noise.k_vector(g)?;
            return Ok(ScalarField::zeros(*g.grid()));
        }
        let kjg = self.noise.k_vector(&self.mollify_vector(g)?)?;
        let jkg = self.mollify(&self.noise.k_vector(g)?)?;
        Ok(&kjg - &jkg)
    }

    /// `E3 = ½ (K K J u - J K K u)`.
    pub fn e3(&self, u: &ScalarField) -> Result<ScalarField> {
        if self.commutes() {
            u.check_grid(self.kernel.grid())?;
            return Ok(ScalarField::zeros(*u.grid()));
        }
        self.e3_generic(u)
    }

    fn e3_generic(&self, u: &ScalarField) -> Result<ScalarField> {
        let kkju = self.noise.k_vector(&self.noise.k_scalar(&self.mollify(u)?)?)?;
        let jkku = self.mollify(&self.noise.k_vector(&self.noise.k_scalar(u)?)?)?;
        Ok((&kkju - &jkku).scale(0.5))
    }

    /// `E3` assembled as `½ (K [K, J] u + [K, J] K u)`.
    pub fn e3_from_brackets(&self, u: &ScalarField) -> Result<ScalarField> {
        let first = self.noise.k_vector(&self.bracket(u)?)?;
        let second = self.bracket_vector(&self.noise.k_scalar(u)?)?;
        Ok((&first + &second).scale(0.5))
    }

    /// Unpacked form `2 K J K u - J K K u - K K J u`.
    pub fn double_commutator(&self, u: &ScalarField) -> Result<ScalarField> {
        if self.commutes() {
            u.check_grid(self.kernel.grid())?;
            return Ok(ScalarField::zeros(*u.grid()));
        }
        self.double_commutator_generic(u)
    }

    fn double_commutator_generic(&self, u: &ScalarField) -> Result<ScalarField> {
        let ku = self.noise.k_scalar(u)?;
        let kjku = self.noise.k_vector(&self.mollify_vector(&ku)?)?;
        let jkku = self.mollify(&self.noise.k_vector(&ku)?)?;
        let kkju = self.noise.k_vector(&self.noise.k_scalar(&self.mollify(u)?)?)?;
        Ok(&(&kjku.scale(2.0) - &jkku) - &kkju)
    }

    /// Nested form `[K, J](K u) - K [K, J] u`.
    pub fn nested_double_commutator(&self, u: &ScalarField) -> Result<ScalarField> {
        let outer = self.bracket_vector(&self.noise.k_scalar(u)?)?;
        let inner = self.noise.k_vector(&self.bracket(u)?)?;
        Ok(&outer - &inner)
    }

    /// The eight literal terms, each a convolution against a sampled kernel
    /// derivative multiplied by `σ`-dependent coefficients.
    pub fn decompose(&self, u: &ScalarField) -> Result<DecompositionTerms> {
        u.check_grid(self.kernel.grid())?;
        let sigma = self.noise.sigma();
        let grid = *sigma.grid();
        let d = sigma.d();
        let m = sigma.m();
        let backend = self.noise.discretization().backend;
        let prod = |a: &ScalarField, b: &ScalarField| self.noise.product(a, b);

        let dj: Vec<ScalarField> = (0..d).map(|i| self.kernel.derivative(&[i], backend)).collect::<Result<_>>()?;
        let d2j: Vec<Vec<ScalarField>> = (0..d)
            .map(|i| (0..d).map(|j| self.kernel.derivative(&[i, j], backend)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        // dsig[j][i * m + k] = ∂_j σ_ik
        let dsig: Vec<Vec<ScalarField>> = (0..d)
            .map(|j| sigma.components().iter().map(|c| self.noise.diff(c, j)).collect())
            .collect();
        let ds = |j: usize, i: usize, k: usize| &dsig[j][i * m + k];
        let div = snapped_divergence(&self.noise, &dsig);
        let ju = self.mollify(u)?;
        let dju: Vec<ScalarField> = dj.iter().map(|a| self.conv(a, u)).collect();
        let d2ju: Vec<Vec<ScalarField>> = d2j.iter().map(|row| row.iter().map(|a| self.conv(a, u)).collect()).collect();

        let zero = || ScalarField::zeros(grid);
        let mut t = [zero(), zero(), zero(), zero(), zero(), zero(), zero(), zero()];
        for k in 0..m {
            let div_k = div.component(k);
            for j in 0..d {
                let su = prod(sigma.get(j, k), u);
                // T2 = 2 ∂_i σ_ik (∂_j J * σ_jk u)
                t[1] = &t[1] + &prod(div_k, &self.conv(&dj[j], &su)).scale(2.0);
                for i in 0..d {
                    let sik = sigma.get(i, k);
                    // T1 = 2 σ_ik (∂_ij J * σ_jk u)
                    t[0] = &t[0] + &prod(sik, &self.conv(&d2j[i][j], &su)).scale(2.0);
                    // T3 = ∂_ij J * (σ_ik σ_jk u)
                    t[2] = &t[2] + &self.conv(&d2j[i][j], &prod(sik, &su));
                    // T4 = -∂_i J * (σ_jk ∂_j σ_ik u)
                    t[3] = &t[3] - &self.conv(&dj[i], &prod(ds(j, i, k), &su));
                    // T7 = σ_ik σ_jk (∂_ij J * u)
                    t[6] = &t[6] + &prod(&prod(sik, sigma.get(j, k)), &d2ju[i][j]);
                    // T8 = σ_ik ∂_i σ_jk (∂_j J * u)
                    t[7] = &t[7] + &prod(&prod(sik, ds(i, j, k)), &dju[j]);
                }
                // T6 = 2 σ_jk ∂_i σ_ik (∂_j J * u)
                t[5] = &t[5] + &prod(&prod(sigma.get(j, k), div_k), &dju[j]).scale(2.0);
            }
        }
        // T5 = ∂_i(σ_ik ∂_j σ_jk) (J * u)
        t[4] = prod(&self.noise.k_vector(&div)?, &ju);

        let i1 = &t[1] - &t[5];
        let i2 = &(-&t[3]) - &t[7];
        let i3 = &(&t[0] - &t[2]) - &t[6];
        Ok(DecompositionTerms { t, i1, i2, i3 })
    }

    /// L^q distances between the grouped terms and their closed-form limits.
    pub fn limit_residuals(&self, u: &ScalarField, q: Exponent) -> Result<LimitResiduals> {
        let terms = self.decompose(u)?;
        let limits = analytic_limits_with(&self.noise, u)?;
        Ok(LimitResiduals {
            i1: lq_norm(&(&terms.i1 - &limits.l1), q)?,
            i2: lq_norm(&(&terms.i2 - &limits.l2), q)?,
            i3: lq_norm(&(&terms.i3 - &limits.l3), q)?,
            t5: lq_norm(&(&(-terms.standalone()) - &limits.l5), q)?,
        })
    }
}

/// `∇σ`, replaced by exact zeros when it is roundoff relative to the
/// individual derivatives `∂_j σ_ik` (spectral roundoff grows like `N`). Otherwise the noise gets differentiated
/// again in `T5` and amplified by up to `πN`.
fn snapped_divergence(noise: &GradientNoise<'_>, dsig: &[Vec<ScalarField>]) -> VectorFieldM {
    let div = noise.div_sigma();
    let scale = dsig.iter().flatten().map(ScalarField::max_abs).fold(0.0, f64::max);
    let grid = noise.sigma().grid();
    let floor = 8.0 * (grid.n() * grid.d()) as f64 * f64::EPSILON;
    if div.max_abs() <= floor * scale {
        VectorFieldM::zeros(*noise.sigma().grid(), noise.sigma().m())
    } else {
        div
    }
}

/// Closed-form limits with the default (spectral) discretization.
pub fn analytic_limits(sigma: &SigmaField, u: &ScalarField) -> Result<LimitFields> {
    analytic_limits_with(&GradientNoise::new(sigma), u)
}

/// `|∇σ|²` is `Σ_k (∂_i σ_ik)²`, the squared magnitude of `∇σ = K 1`.
pub fn analytic_limits_with(noise: &GradientNoise<'_>, u: &ScalarField) -> Result<LimitFields> {
    let sigma = noise.sigma();
    u.check_grid(sigma.grid())?;
    let grid = *sigma.grid();
    let (d, m) = (sigma.d(), sigma.m());
    let prod = |a: &ScalarField, b: &ScalarField| noise.product(a, b);
    let dsig: Vec<Vec<ScalarField>> =
        (0..d).map(|j| sigma.components().iter().map(|c| noise.diff(c, j)).collect()).collect();
    let div = snapped_divergence(noise, &dsig);
    let div_sq = div.components().iter().fold(ScalarField::zeros(grid), |acc, c| &acc + &prod(c, c));
    let ds = |j: usize, i: usize, k: usize| &dsig[j][i * m + k];

    let mut transport = ScalarField::zeros(grid);
    let mut cross = ScalarField::zeros(grid);
    for k in 0..m {
        for j in 0..d {
            let mut flux = ScalarField::zeros(grid);
            for i in 0..d {
                flux = &flux + &prod(sigma.get(i, k), ds(i, j, k));
                cross = &cross + &prod(ds(j, i, k), ds(i, j, k));
            }
            transport = &transport + &noise.diff(&flux, j);
        }
    }
    let drift = noise.k_vector(&div)?;
    Ok(LimitFields {
        l1: prod(&div_sq.scale(2.0), u),
        l2: prod(&transport, u),
        l3: prod(&(-&(&cross + &div_sq)), u),
        l5: prod(&(-&drift), u),
    })
}

fn bump(sigma: &SigmaField, delta: f64) -> Result<MollifierKernel> {
    build_kernel(KernelKind::Bump, delta, *sigma.grid())
}

/// `E2` with the standard bump kernel of width `delta`.
pub fn e2(sigma: &SigmaField, u: &ScalarField, delta: f64) -> Result<VectorFieldM> {
    let k = bump(sigma, delta)?;
    Commutators::new(sigma, &k)?.e2(u)
}

/// `E3` with the standard bump kernel of width `delta`.
pub fn e3(sigma: &SigmaField, u: &ScalarField, delta: f64) -> Result<ScalarField> {
    let k = bump(sigma, delta)?;
    Commutators::new(sigma, &k)?.e3(u)
}

pub fn double_commutator(sigma: &SigmaField, u: &ScalarField, delta: f64) -> Result<ScalarField> {
    let k = bump(sigma, delta)?;
    Commutators::new(sigma, &k)?.double_commutator(u)
}

pub fn decompose(sigma: &SigmaField, u: &ScalarField, delta: f64) -> Result<DecompositionTerms> {
    let k = bump(sigma, delta)?;
    Commutators::new(sigma, &k)?.decompose(u)
}

pub fn limit_residuals(sigma: &SigmaField, u: &ScalarField, delta: f64, q: Exponent) -> Result<LimitResiduals> {
    let k = bump(sigma, delta)?;
    Commutators::new(sigma, &k)?.limit_residuals(u, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::fields::{make_grid, GridSpec};
    use crate::presets::{gen_sigma, gen_u, SigmaPreset, UPreset};
    use std::f64::consts::PI;

    fn rel(a: &ScalarField, b: &ScalarField) -> f64 {
        (a - b).max_abs() / b.max_abs().max(1e-300)
    }

    fn setup(d: usize, n: usize, preset: SigmaPreset, m: usize) -> (GridSpec, SigmaField, ScalarField) {
        let g = make_grid(d, n).unwrap();
        let sigma = gen_sigma(&preset, g, m, 11).unwrap();
        let u = gen_u(&UPreset::Trig, g, 0);
        (g, sigma, u)
    }

    #[test]
    fn constant_sigma_annihilates_everything() {
        let g = make_grid(2, 32).unwrap();
        let sigma = SigmaField::constant(g, 2, 1.3);
        let u = gen_u(&"box-indicator 0.25 0.75".parse().unwrap(), g, 0);
        let k = build_kernel(KernelKind::Bump, 0.25, g).unwrap();
        let c = Commutators::new(&sigma, &k).unwrap();
        assert!(c.e2(&u).unwrap().max_abs() < 1e-12);
        assert!(c.e3(&u).unwrap().max_abs() < 1e-12);
        assert!(c.double_commutator(&u).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn generic_path_reaches_roundoff_for_constant_sigma() {
        let g = make_grid(2, 32).unwrap();
        let sigma = SigmaField::constant(g, 2, 1.3);
        let u = gen_u(&"box-indicator 0.25 0.75".parse().unwrap(), g, 0);
        let k = build_kernel(KernelKind::Bump, 0.25, g).unwrap();
        let c = Commutators::new(&sigma, &k).unwrap();
        let kku = c.noise().k_vector(&c.noise().k_scalar(&u).unwrap()).unwrap().max_abs();
        assert!(c.e2_generic(&u).unwrap().max_abs() <= 1e-14 * kku.sqrt());
        assert!(c.e3_generic(&u).unwrap().max_abs() <= 1e-14 * kku);
        assert!(c.double_commutator_generic(&u).unwrap().max_abs() <= 1e-14 * kku);
    }

    #[test]
    fn zero_u_gives_zero_e2() {
        let (g, sigma, _) = setup(1, 64, SigmaPreset::Trig, 1);
        assert_eq!(e2(&sigma, &ScalarField::zeros(g), 0.125).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn e3_operator_identity() {
        let (g, sigma, _) = setup(2, 32, SigmaPreset::FourierDecay(2.0), 2);
        let u = gen_u(&UPreset::RandomTrig, g, 5);
        let k = build_kernel(KernelKind::Bump, 0.25, g).unwrap();
        let c = Commutators::new(&sigma, &k).unwrap();
        let direct = c.e3(&u).unwrap();
        let via = c.e3_from_brackets(&u).unwrap();
        assert!((&direct - &via).max_abs() <= 1e-11 * direct.max_abs().max(1.0));
    }

    #[test]
    fn nested_equals_unpacked() {
        for d in [1, 2] {
            let (g, sigma, u) = setup(d, if d == 1 { 128 } else { 32 }, SigmaPreset::Trig, 1);
            let k = build_kernel(KernelKind::Bump, 0.25, g).unwrap();
            let c = Commutators::new(&sigma, &k).unwrap();
            let a = c.double_commutator(&u).unwrap();
            let b = c.nested_double_commutator(&u).unwrap();
            assert!((&a - &b).max_abs() <= 1e-11, "d = {d}");
        }
    }

    #[test]
    fn decomposition_reassembles() {
        for (d, preset, m) in [(1, SigmaPreset::Trig, 1), (2, SigmaPreset::Trig, 1), (2, SigmaPreset::FourierDecay(3.0), 2)] {
            let (g, sigma, u) = setup(d, if d == 1 { 64 } else { 32 }, preset, m);
            let k = build_kernel(KernelKind::Bump, 0.25, g).unwrap();
            let c = Commutators::new(&sigma, &k).unwrap();
            let dc = c.double_commutator(&u).unwrap();
            let terms = c.decompose(&u).unwrap();
            assert!(rel(&terms.reassembled(), &dc) <= 1e-10, "d = {d}, {preset}");
        }
    }

    #[test]
    fn divergence_free_terms_vanish() {
        let (g, sigma, u) = setup(2, 32, SigmaPreset::DivergenceFree, 1);
        let k = build_kernel(KernelKind::Bump, 0.25, g).unwrap();
        let terms = Commutators::new(&sigma, &k).unwrap().decompose(&u).unwrap();
        for n in [2, 5, 6] {
            assert!(terms.term(n).max_abs() <= 1e-11, "T{n}");
        }
        assert!(terms.term(1).max_abs() > 1e-3);
    }

    #[test]
    fn limits_cancel() {
        for (d, preset, m) in [
            (1, SigmaPreset::Trig, 1),
            (2, SigmaPreset::Trig, 1),
            (2, SigmaPreset::Trig, 2),
            (2, SigmaPreset::FourierDecay(3.0), 2),
            (2, SigmaPreset::DivergenceFree, 1),
            (3, SigmaPreset::Trig, 2),
        ] {
            let (_, sigma, u) = setup(d, if d == 3 { 16 } else { 32 }, preset, m);
            let limits = analytic_limits(&sigma, &u).unwrap();
            let scale = limits.l1.max_abs().max(limits.l2.max_abs()).max(1.0);
            assert!(limits.sum().max_abs() <= 1e-10 * scale, "d = {d}, {preset}");
        }
    }

    #[test]
    fn first_limit_closed_form() {
        let g = make_grid(1, 64).unwrap();
        let sigma = SigmaField::from_fn(g, 1, |_, _, x| (2.0 * PI * x[0]).sin());
        let u = ScalarField::constant(g, 1.0);
        let limits = analytic_limits(&sigma, &u).unwrap();
        let expected = ScalarField::from_fn(g, |x| 2.0 * (2.0 * PI).powi(2) * (2.0 * PI * x[0]).cos().powi(2));
        assert!((&limits.l1 - &expected).max_abs() < 1e-10);
        let zero = analytic_limits(&SigmaField::constant(g, 1, 3.0), &u).unwrap();
        for f in [&zero.l1, &zero.l2, &zero.l3, &zero.l5] {
            assert!(f.max_abs() < 1e-12);
        }
    }

    #[test]
    fn residuals_shrink_with_delta() {
        let (_, sigma, u) = setup(1, 256, SigmaPreset::Trig, 1);
        let coarse = limit_residuals(&sigma, &u, 0.25, Exponent::Finite(2.0)).unwrap();
        let fine = limit_residuals(&sigma, &u, 0.125, Exponent::Finite(2.0)).unwrap();
        for (a, b) in coarse.as_array().iter().zip(fine.as_array()) {
            assert!(b < *a);
        }
        let constant = SigmaField::constant(*sigma.grid(), 1, 0.5);
        let r = limit_residuals(&constant, &u, 0.125, Exponent::Finite(2.0)).unwrap();
        assert!(r.as_array().iter().all(|&v| v < 1e-12));
    }

    #[test]
    fn kernel_grid_must_match() {
        let (_, sigma, _) = setup(1, 64, SigmaPreset::Trig, 1);
        let k = build_kernel(KernelKind::Bump, 0.25, make_grid(1, 128).unwrap()).unwrap();
        assert!(matches!(Commutators::new(&sigma, &k), Err(Error::GridMismatch)));
        assert!(matches!(e2(&sigma, &ScalarField::zeros(*sigma.grid()), 0.01), Err(Error::UnderResolvedKernel { .. })));
    }
}
