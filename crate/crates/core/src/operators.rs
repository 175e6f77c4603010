//! Gradient-noise operators in divergence form.
//!
//! For scalar `f`, `K f` is the `R^m`-valued field with components
//! `∂_i(σ_ik f)`; for `R^m`-valued `g`, `K g = ∂_i(σ_ik g_k)` is scalar.
//! Repeated indices are summed. Every operator is evaluated as
//! "multiply, then differentiate", so each output is a discrete total
//! divergence and integrates to zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{derivative, DerivativeBackend, ScalarField, SigmaField, VectorFieldM};
use crate::mollifier::ConvolutionPath;
use crate::spectral;

/// Discretization switches shared by the operator and commutator layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Discretization {
    pub backend: DerivativeBackend,
    /// Apply the 2/3 rule to every pointwise product.
    pub dealias: bool,
    pub convolution: ConvolutionPath,
}

/// `σ` bundled with the discretization used to apply `K`.
#[derive(Debug, Clone, Copy)]
pub struct GradientNoise<'a> {
    sigma: &'a SigmaField,
    disc: Discretization,
}

impl<'a> GradientNoise<'a> {
    pub fn new(sigma: &'a SigmaField) -> Self {
        Self::with_discretization(sigma, Discretization::default())
    }

    pub fn with_discretization(sigma: &'a SigmaField, disc: Discretization) -> Self {
        Self { sigma, disc }
    }

    pub fn sigma(&self) -> &'a SigmaField {
        self.sigma
    }

    pub fn discretization(&self) -> Discretization {
        self.disc
    }

    pub(crate) fn product(&self, a: &ScalarField, b: &ScalarField) -> ScalarField {
        let p = a * b;
        if self.disc.dealias {
            ScalarField::raw(*p.grid(), spectral::dealias(p.grid(), p.values()))
        } else {
            p
        }
    }

    pub(crate) fn diff(&self, f: &ScalarField, axis: usize) -> ScalarField {
        derivative(f, axis, self.disc.backend).expect("axis checked against the grid")
    }

    /// `Σ_i ∂_i flux_i`.
    fn divergence(&self, fluxes: &[ScalarField]) -> ScalarField {
        let mut out = ScalarField::zeros(*self.sigma.grid());
        for (i, flux) in fluxes.iter().enumerate() {
            out = &out + &self.diff(flux, i);
        }
        out
    }

    /// `(K f)_k = ∂_i(σ_ik f)`.
    pub fn k_scalar(&self, f: &ScalarField) -> Result<VectorFieldM> {
        f.check_grid(self.sigma.grid())?;
        let d = self.sigma.d();
        let components = (0..self.sigma.m())
            .map(|k| {
                let fluxes: Vec<ScalarField> = (0..d).map(|i| self.product(self.sigma.get(i, k), f)).collect();
                self.divergence(&fluxes)
            })
            .collect();
        VectorFieldM::new(components)
    }

    /// `K g = ∂_i(σ_ik g_k)`.
    pub fn k_vector(&self, g: &VectorFieldM) -> Result<ScalarField> {
        if g.grid() != self.sigma.grid() {
            return Err(Error::GridMismatch);
        }
        if g.m() != self.sigma.m() {
            return Err(Error::ComponentMismatch { expected: self.sigma.m(), found: g.m() });
        }
        let grid = *self.sigma.grid();
        let fluxes: Vec<ScalarField> = (0..self.sigma.d())
            .map(|i| {
                let mut flux = ScalarField::zeros(grid);
                for k in 0..self.sigma.m() {
                    flux = &flux + &self.product(self.sigma.get(i, k), g.component(k));
                }
                flux
            })
            .collect();
        Ok(self.divergence(&fluxes))
    }

    /// `∇σ`, the `f ≡ 1` case: components `∂_i σ_ik`.
    pub fn div_sigma(&self) -> VectorFieldM {
        let one = ScalarField::constant(*self.sigma.grid(), 1.0);
        self.k_scalar(&one).expect("grid taken from sigma")
    }

    /// `½ K K u`, the Itô–Stratonovich drift correction.
    pub fn ito_correction(&self, u: &ScalarField) -> Result<ScalarField> {
        Ok(self.k_vector(&self.k_scalar(u)?)?.scale(0.5))
    }
}

pub fn apply_k_scalar(sigma: &SigmaField, f: &ScalarField) -> Result<VectorFieldM> {
    GradientNoise::new(sigma).k_scalar(f)
}

pub fn apply_k_vector(sigma: &SigmaField, g: &VectorFieldM) -> Result<ScalarField> {
    GradientNoise::new(sigma).k_vector(g)
}

pub fn div_sigma(sigma: &SigmaField) -> VectorFieldM {
    GradientNoise::new(sigma).div_sigma()
}

pub fn ito_correction(sigma: &SigmaField, u: &ScalarField) -> Result<ScalarField> {
    GradientNoise::new(sigma).ito_correction(u)
}
