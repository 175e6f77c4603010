//! Entropies `S` with polynomial growth and the renormalisation combination
//! `S'(u_δ) E3 - S''(u_δ) E2 · K u_δ`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::commutators::Commutators;
use crate::error::{Error, Result};
use crate::fields::{ScalarField, SigmaField};
use crate::mollifier::{build_kernel, KernelKind};

/// Sampling range and resolution of the growth certificate scan.
pub const CERTIFICATE_RANGE: f64 = 100.0;
pub const CERTIFICATE_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyKind {
    /// `S(r) = (1 + r²)^{q/2}`
    PowerSmooth,
    /// `S(r) = r²`
    Quadratic,
    Custom,
}

impl fmt::Display for EntropyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntropyKind::PowerSmooth => "power-smooth",
            EntropyKind::Quadratic => "quadratic",
            EntropyKind::Custom => "custom",
        })
    }
}

impl FromStr for EntropyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power-smooth" => Ok(EntropyKind::PowerSmooth),
            "quadratic" => Ok(EntropyKind::Quadratic),
            "custom" => Ok(EntropyKind::Custom),
            _ => Err(Error::InvalidArgument(format!("unknown entropy kind `{s}`"))),
        }
    }
}

type RealMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Empirical constants in `|S| <= c0 max(1, |r|^q)`,
/// `|S'| <= c1 max(1, |r|^{q-1})`, `|S''| <= c2 max(1, |r|^{q-2})` over the
/// sampled range. Within a factor 2 these are the `1 + |r|^e` bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub range: f64,
    pub samples: usize,
}

impl GrowthCertificate {
    pub fn is_finite(&self) -> bool {
        self.c0.is_finite() && self.c1.is_finite() && self.c2.is_finite()
    }
}

#[derive(Clone)]
pub struct Entropy {
    kind: EntropyKind,
    q: f64,
    s: RealMap,
    ds: RealMap,
    d2s: RealMap,
}

impl fmt::Debug for Entropy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Entropy").field("kind", &self.kind).field("q", &self.q).finish()
    }
}

pub fn make_entropy(kind: EntropyKind, q: f64) -> Result<Entropy> {
    if !q.is_finite() || q < 1.0 {
        return Err(Error::InvalidExponent(format!("entropy growth exponent must be finite and >= 1, got {q}")));
    }
    match kind {
        EntropyKind::PowerSmooth => Ok(Entropy {
            kind,
            q,
            s: Arc::new(move |r| (1.0 + r * r).powf(0.5 * q)),
            ds: Arc::new(move |r| q * r * (1.0 + r * r).powf(0.5 * q - 1.0)),
            d2s: Arc::new(move |r| q * (1.0 + r * r).powf(0.5 * q - 2.0) * (1.0 + (q - 1.0) * r * r)),
        }),
        EntropyKind::Quadratic => {
            if q < 2.0 {
                return Err(Error::InvalidExponent(format!("r² grows faster than |r|^{q}; quadratic entropy needs q >= 2")));
            }
            Ok(Entropy { kind, q, s: Arc::new(|r| r * r), ds: Arc::new(|r| 2.0 * r), d2s: Arc::new(|_| 2.0) })
        }
        EntropyKind::Custom => Err(Error::InvalidArgument("custom entropies are built with Entropy::custom".into())),
    }
}

impl Entropy {
    /// User-supplied `S`, `S'`, `S''` with declared growth exponent `q`.
    pub fn custom(
        q: f64,
        s: impl Fn(f64) -> f64 + Send + Sync + 'static,
        ds: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2s: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { kind: EntropyKind::Custom, q, s: Arc::new(s), ds: Arc::new(ds), d2s: Arc::new(d2s) }
    }

    /// `S(r) = r`.
    pub fn linear() -> Self {
        Self::custom(1.0, |r| r, |_| 1.0, |_| 0.0)
    }

    pub fn kind(&self) -> EntropyKind {
        self.kind
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn s(&self, r: f64) -> f64 {
        (self.s)(r)
    }

    pub fn ds(&self, r: f64) -> f64 {
        (self.ds)(r)
    }

    pub fn d2s(&self, r: f64) -> f64 {
        (self.d2s)(r)
    }

    pub fn growth_certificate(&self) -> GrowthCertificate {
        let n = CERTIFICATE_SAMPLES;
        let ratio = |v: f64, r: f64, e: f64| v.abs() / r.abs().powf(e).max(1.0);
        let (mut c0, mut c1, mut c2) = (0.0f64, 0.0f64, 0.0f64);
        for j in 0..n {
            let r = -CERTIFICATE_RANGE + 2.0 * CERTIFICATE_RANGE * j as f64 / (n - 1) as f64;
            c0 = c0.max(ratio(self.s(r), r, self.q));
            c1 = c1.max(ratio(self.ds(r), r, self.q - 1.0));
            c2 = c2.max(ratio(self.d2s(r), r, self.q - 2.0));
        }
        GrowthCertificate { c0, c1, c2, range: CERTIFICATE_RANGE, samples: n }
    }
}

/// `S'(u_δ) E3 - S''(u_δ) Σ_k E2_k (K u_δ)_k` with `u_δ = J u`.
pub fn theorem_combination_with(c: &Commutators<'_>, u: &ScalarField, s: &Entropy) -> Result<ScalarField> {
    let ud = c.mollify(u)?;
    let e3 = c.e3(u)?;
    let dot = c.e2(u)?.dot(&c.noise().k_scalar(&ud)?);
    let values = ud
        .values()
        .iter()
        .zip(e3.values())
        .zip(dot.values())
        .map(|((&r, &a), &b)| {
            let s2 = s.d2s(r);
            if s2 == 0.0 {
                s.ds(r) * a
            } else {
                s.ds(r) * a - s2 * b
            }
        })
        .collect();
    ScalarField::from_values(*u.grid(), values)
}

/// `combination - RHS` where, with `C = [K, J] u`,
/// `RHS = ½ S'(u_δ) [[K,J],K] u + S''(u_δ) u_δ C·∇σ + K(S'(u_δ) C)`.
pub fn proof_identity_with(c: &Commutators<'_>, u: &ScalarField, s: &Entropy) -> Result<ScalarField> {
    let noise = c.noise();
    let ud = c.mollify(u)?;
    let s1 = ud.map(|r| s.ds(r));
    let s2 = ud.map(|r| s.d2s(r));
    let bracket = c.bracket(u)?;
    let first = noise.product(&s1, &c.double_commutator(u)?).scale(0.5);
    let second = noise.product(&noise.product(&s2, &ud), &bracket.dot(&noise.div_sigma()));
    let third = noise.k_vector(&bracket.map_components(|ck| noise.product(&s1, ck)))?;
    let rhs = &(&first + &second) + &third;
    Ok(&theorem_combination_with(c, u, s)? - &rhs)
}

pub fn theorem_combination(sigma: &SigmaField, u: &ScalarField, delta: f64, s: &Entropy) -> Result<ScalarField> {
    let k = build_kernel(KernelKind::Bump, delta, *sigma.grid())?;
    theorem_combination_with(&Commutators::new(sigma, &k)?, u, s)
}

pub fn proof_identity(sigma: &SigmaField, u: &ScalarField, delta: f64, s: &Entropy) -> Result<ScalarField> {
    let k = build_kernel(KernelKind::Bump, delta, *sigma.grid())?;
    proof_identity_with(&Commutators::new(sigma, &k)?, u, s)
}

/// `h^d Σ φ f`.
pub fn weighted_integral(f: &ScalarField, phi: &ScalarField) -> Result<f64> {
    f.check_grid(phi.grid())?;
    Ok(f.values().iter().zip(phi.values()).map(|(a, b)| a * b).sum::<f64>() * f.grid().cell_volume())
}
