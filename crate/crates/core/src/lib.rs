//! Mollification commutators for gradient-type transport noise on the
//! periodic torus.
//!
//! Fields live on a uniform grid of `[0,1)^d`. The crate provides the noise
//! operator `K`, mollifier kernels `J_δ`, the error terms `E2`, `E3`, the
//! double commutator `[[K, J], K]` with its term-by-term splitting, entropy
//! combinations, an SPDE path simulator and a config-driven experiment
//! harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commutators;
pub mod entropy;
pub mod error;
pub mod fields;
pub mod harness;
pub mod io;
pub mod mollifier;
pub mod operators;
pub mod presets;
pub mod rng;
pub mod spde;
pub(crate) mod spectral;

pub use commutators::{Commutators, DecompositionTerms, LimitFields, LimitResiduals};
pub use error::{Error, ErrorClass, Result};
pub use fields::{
    exponents, lq_norm, make_grid, DerivativeBackend, Exponent, Exponents, GridSpec, ScalarField, SigmaField,
    VectorFieldM,
};
pub use mollifier::{build_kernel, mollify, ConvolutionPath, KernelKind, MollifierKernel};
pub use operators::{apply_k_scalar, apply_k_vector, div_sigma, ito_correction, Discretization, GradientNoise};
