use std::f64::consts::PI;

use proptest::prelude::*;
use renormal::commutators::Commutators;
use renormal::entropy::{make_entropy, proof_identity_with, theorem_combination_with, EntropyKind};
use renormal::fields::{derivative, lq_norm_vector};
use renormal::harness::fit::fit_rate;
use renormal::spde::{step, DriftSpec, SpdeState, Stepper};
use renormal::{
    build_kernel, lq_norm, make_grid, mollify, DerivativeBackend, Exponent, GridSpec, KernelKind, ScalarField,
    SigmaField,
};

/// Band-limited trigonometric polynomial with modes up to 3 per axis.
fn trig_value(coeffs: &[(f64, f64)], x: &[f64]) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(j, (a, b))| {
            let k = (j % 3 + 1) as f64;
            let axis = j % x.len();
            let other = x[x.len() - 1 - axis] * (j % 2) as f64;
            let phase = 2.0 * PI * (k * x[axis] + other);
            a * phase.cos() + b * phase.sin()
        })
        .sum()
}

fn trig_field(grid: GridSpec, coeffs: &[(f64, f64)]) -> ScalarField {
    ScalarField::from_fn(grid, |x| trig_value(coeffs, x))
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..5)
}

fn sigma_from(grid: GridSpec, m: usize, c: &[(f64, f64)], offset: f64) -> SigmaField {
    SigmaField::from_fn(grid, m, |i, k, x| offset + (1.0 + 0.3 * (i + 2 * k) as f64) * trig_value(c, x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mollify_preserves_mean(c in coeffs(), shift in -2.0..2.0f64, k in 2u32..5) {
        let grid = make_grid(1, 256).unwrap();
        let u = trig_field(grid, &c).map(|v| v + shift);
        let kernel = build_kernel(KernelKind::Bump, 0.5f64.powi(k as i32), grid).unwrap();
        let ju = mollify(&u, &kernel).unwrap();
        prop_assert!((ju.mean() - u.mean()).abs() <= 1e-13);
        prop_assert!(lq_norm(&ju, Exponent::Finite(2.0)).unwrap() <= lq_norm(&u, Exponent::Finite(2.0)).unwrap() + 1e-12);
    }

    #[test]
    fn lq_norms_increase_with_q(c in coeffs(), q1 in 1.0..4.0f64, dq in 0.0..4.0f64) {
        let grid = make_grid(1, 128).unwrap();
        let u = trig_field(grid, &c);
        let a = lq_norm(&u, Exponent::Finite(q1)).unwrap();
        let b = lq_norm(&u, Exponent::Finite(q1 + dq)).unwrap();
        let inf = lq_norm(&u, Exponent::Infinite).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-12) + 1e-300);
        prop_assert!(b <= inf * (1.0 + 1e-12));
    }

    #[test]
    fn spectral_derivative_is_exact_on_trig(c in coeffs()) {
        let grid = make_grid(1, 64).unwrap();
        let u = ScalarField::from_fn(grid, |x| c.iter().enumerate().map(|(j, (a, b))| {
            let k = 2.0 * PI * (j + 1) as f64;
            a * (k * x[0]).cos() + b * (k * x[0]).sin()
        }).sum());
        let du = ScalarField::from_fn(grid, |x| c.iter().enumerate().map(|(j, (a, b))| {
            let k = 2.0 * PI * (j + 1) as f64;
            k * (b * (k * x[0]).cos() - a * (k * x[0]).sin())
        }).sum());
        let got = derivative(&u, 0, DerivativeBackend::Spectral).unwrap();
        prop_assert!((&got - &du).max_abs() <= 1e-11);
    }

    #[test]
    fn constant_sigma_annihilates(c in coeffs(), s in -2.0..2.0f64, m in 1usize..3) {
        let grid = make_grid(2, 32).unwrap();
        let sigma = SigmaField::constant(grid, m, s);
        let u = trig_field(grid, &c);
        let kernel = build_kernel(KernelKind::Bump, 0.25, grid).unwrap();
        let cm = Commutators::new(&sigma, &kernel).unwrap();
        prop_assert!(cm.e2(&u).unwrap().max_abs() <= 1e-12);
        prop_assert!(cm.e3(&u).unwrap().max_abs() <= 1e-12);
        prop_assert!(cm.double_commutator(&u).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn e2_is_linear_in_u(c1 in coeffs(), c2 in coeffs(), a in -3.0..3.0f64) {
        let grid = make_grid(1, 128).unwrap();
        let sigma = sigma_from(grid, 1, &[(0.4, 0.7)], 0.2);
        let kernel = build_kernel(KernelKind::Bump, 0.125, grid).unwrap();
        let cm = Commutators::new(&sigma, &kernel).unwrap();
        let (u, v) = (trig_field(grid, &c1), trig_field(grid, &c2));
        let lhs = cm.e2(&(&u + &v.scale(a))).unwrap();
        let rhs = cm.e2(&u).unwrap().zip_components(&cm.e2(&v).unwrap(), |x, y| x + &y.scale(a));
        let diff = lhs.zip_components(&rhs, |x, y| x - y).max_abs();
        prop_assert!(diff <= 1e-11 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn decomposition_reassembles(cs in coeffs(), cu in coeffs(), m in 1usize..3, offset in -1.0..1.0f64) {
        let grid = make_grid(2, 32).unwrap();
        let sigma = sigma_from(grid, m, &cs, offset);
        let u = trig_field(grid, &cu);
        let kernel = build_kernel(KernelKind::Bump, 0.25, grid).unwrap();
        let cm = Commutators::new(&sigma, &kernel).unwrap();
        let dc = cm.double_commutator(&u).unwrap();
        let terms = cm.decompose(&u).unwrap();
        let diff = (&terms.reassembled() - &dc).max_abs();
        prop_assert!(diff <= 1e-10 * dc.max_abs() + 1e-12, "{diff:e} vs {:e}", dc.max_abs());
        let nested = cm.nested_double_commutator(&u).unwrap();
        prop_assert!((&nested - &dc).max_abs() <= 1e-11 * (1.0 + dc.max_abs()));
    }

    #[test]
    fn proof_identity_for_quadratic_entropy(cs in coeffs(), cu in coeffs()) {
        let grid = make_grid(1, 128).unwrap();
        let sigma = sigma_from(grid, 1, &cs, 0.5);
        let u = trig_field(grid, &cu);
        let kernel = build_kernel(KernelKind::Bump, 0.125, grid).unwrap();
        let cm = Commutators::new(&sigma, &kernel).unwrap();
        let s = make_entropy(EntropyKind::Quadratic, 2.0).unwrap();
        let comb = theorem_combination_with(&cm, &u, &s).unwrap();
        let res = proof_identity_with(&cm, &u, &s).unwrap();
        prop_assert!(res.max_abs() <= 1e-10 * comb.max_abs().max(1e-300) + 1e-12);
    }

    #[test]
    fn steps_conserve_mass(cu in coeffs(), dw in -0.01..0.01f64, heun in any::<bool>()) {
        let grid = make_grid(1, 64).unwrap();
        let sigma = sigma_from(grid, 1, &[(0.3, 0.2)], 0.4);
        let u = trig_field(grid, &cu).map(|v| v + 1.0);
        let drift = DriftSpec::Zero;
        let dt = renormal::spde::cfl_dt(&sigma, &grid);
        let state = SpdeState::new(u.clone(), &sigma, &drift).unwrap();
        let stepper = if heun { Stepper::StratHeun } else { Stepper::Ito };
        let next = step(stepper, &state, &[dw], dt).unwrap();
        prop_assert!((next.u.mean() - u.mean()).abs() <= 1e-13);
    }

    #[test]
    fn rate_fit_recovers_power(slope in -1.0..3.0f64, scale in 1e-3..1e3f64) {
        let pts: Vec<(f64, f64)> = (2..8).map(|k| {
            let d = 0.5f64.powi(k);
            (d, scale * d.powf(slope))
        }).collect();
        let got = fit_rate(&pts).slope().unwrap();
        prop_assert!((got - slope).abs() <= 1e-10);
    }

    #[test]
    fn vector_norm_dominates_components(c in coeffs()) {
        let grid = make_grid(1, 64).unwrap();
        let u = trig_field(grid, &c);
        let sigma = SigmaField::from_fn(grid, 2, |_, k, x| (1 + k) as f64 * (2.0 * PI * x[0]).sin());
        let g = renormal::apply_k_scalar(&sigma, &u).unwrap();
        let q = Exponent::Finite(2.0);
        let whole = lq_norm_vector(&g, q).unwrap();
        for comp in g.components() {
            prop_assert!(lq_norm(comp, q).unwrap() <= whole * (1.0 + 1e-12) + 1e-300);
        }
    }
}
