//! Cross-checks against independent direct-quadrature evaluations.

mod common;

use std::f64::consts::PI;

use common::{max_abs, max_diff, quadrature, worst_term_error};

use renormal::commutators::Commutators;
use renormal::fields::lq_norm_vector;
use renormal::mollifier::{convolve, direct_convolution};
use renormal::operators::{apply_k_scalar, apply_k_vector};
use renormal::presets::{gen_sigma, gen_u, SigmaPreset, UPreset};
use renormal::{
    build_kernel, make_grid, mollify, ConvolutionPath, Exponent, GridSpec, KernelKind,
    ScalarField, SigmaField, VectorFieldM,
};

fn check_terms(grid: GridSpec, sigma: &SigmaField, u: &ScalarField, delta: f64) {
    let kernel = build_kernel(KernelKind::Bump, delta, grid).unwrap();
    let (n, err) = worst_term_error(sigma, u, &kernel);
    assert!(err <= 1e-12, "T{n} d={}: {err:e}", grid.d());
}

#[test]
fn every_term_matches_direct_quadrature_1d() {
    let grid = make_grid(1, 64).unwrap();
    let sigma = gen_sigma(&SigmaPreset::Trig, grid, 2, 0).unwrap();
    let u = gen_u(&UPreset::BoxIndicator { a: 0.25, b: 0.75 }, grid, 0);
    check_terms(grid, &sigma, &u, 0.125);
}

#[test]
fn every_term_matches_direct_quadrature_2d() {
    let grid = make_grid(2, 32).unwrap();
    let sigma = gen_sigma(&SigmaPreset::Trig, grid, 2, 0).unwrap();
    let u = gen_u(&UPreset::Trig, grid, 0);
    check_terms(grid, &sigma, &u, 0.25);
}

#[test]
fn e2_reference_value() {
    let grid = make_grid(1, 512).unwrap();
    let sigma = SigmaField::from_fn(grid, 1, |_, _, x| (2.0 * PI * x[0]).sin());
    let u = ScalarField::from_fn(grid, |x| (2.0 * PI * x[0]).cos());
    let kernel = build_kernel(KernelKind::Bump, 1.0 / 16.0, grid).unwrap();
    let got = Commutators::new(&sigma, &kernel).unwrap().e2(&u).unwrap();

    // J(Ku) and K(Ju) with the convolutions done by direct quadrature.
    let ku = apply_k_scalar(&sigma, &u).unwrap();
    let jku = ScalarField::from_values(grid, quadrature(kernel.samples(), ku.component(0))).unwrap();
    let ju = ScalarField::from_values(grid, quadrature(kernel.samples(), &u)).unwrap();
    let kju = apply_k_scalar(&sigma, &ju).unwrap();
    let oracle: Vec<f64> = jku.values().iter().zip(kju.component(0).values()).map(|(a, b)| a - b).collect();
    let diff = max_diff(got.component(0).values(), &oracle);
    assert!(diff <= 1e-12, "{diff:e}");

    let norm = lq_norm_vector(&got, Exponent::Finite(2.0)).unwrap();
    // E2 = 2π (ĵ(2) - ĵ(1)) cos 4πx with ĵ the kernel's cosine coefficients.
    let h = grid.h();
    let jhat = |k: f64| -> f64 {
        (0..grid.len()).map(|n| h * kernel.samples().values()[n] * (2.0 * PI * k * grid.displacement(n)[0]).cos()).sum()
    };
    let closed = 2.0 * PI * (jhat(2.0) - jhat(1.0)).abs() / 2f64.sqrt();
    assert!((norm - closed).abs() <= 1e-12, "{norm:e} vs {closed:e}");
    assert!((norm - 1.590_308_236_074_754e-1).abs() <= 1e-12, "{norm:.15e}");
}

#[test]
fn e3_matches_oracle_for_rough_u() {
    let grid = make_grid(1, 256).unwrap();
    let sigma = gen_sigma(&SigmaPreset::Trig, grid, 1, 0).unwrap();
    let u = gen_u(&UPreset::BoxIndicator { a: 0.25, b: 0.75 }, grid, 0);
    let kernel = build_kernel(KernelKind::Bump, 1.0 / 16.0, grid).unwrap();
    let got = Commutators::new(&sigma, &kernel).unwrap().e3(&u).unwrap();

    let j = |f: &ScalarField| ScalarField::from_values(grid, quadrature(kernel.samples(), f)).unwrap();
    let kk = |f: &ScalarField| apply_k_vector(&sigma, &apply_k_scalar(&sigma, f).unwrap()).unwrap();
    let a = kk(&j(&u));
    let b = j(&kk(&u));
    let oracle: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| 0.5 * (x - y)).collect();
    let diff = max_diff(got.values(), &oracle);
    // E3 is a difference of two branches much larger than itself, so the
    // roundoff floor is set by the branches.
    let scale = max_abs(a.values()).max(max_abs(b.values()));
    assert!(diff <= 1e-12 * scale, "{diff:e} vs {scale:e}");
}

#[test]
fn transform_matches_direct_convolution() {
    for (d, n) in [(1, 32), (1, 64), (2, 32), (2, 64)] {
        let grid = make_grid(d, n).unwrap();
        for kind in [KernelKind::Bump, KernelKind::TruncatedGaussian] {
            let kernel = build_kernel(kind, 0.25, grid).unwrap();
            for u in [gen_u(&UPreset::BoxIndicator { a: 0.2, b: 0.7 }, grid, 0), gen_u(&UPreset::RandomTrig, grid, 3)] {
                let fast = mollify(&u, &kernel).unwrap();
                let slow = direct_convolution(&u, &kernel).unwrap();
                let diff = max_diff(fast.values(), slow.values());
                let scale = max_abs(slow.values());
                assert!(diff <= 1e-12 * scale, "d={d} n={n} {kind:?}: {diff:e} vs {scale:e}");
            }
        }
    }
}

#[test]
fn direct_path_commutators_agree() {
    let grid = make_grid(2, 32).unwrap();
    let sigma = gen_sigma(&SigmaPreset::Trig, grid, 2, 0).unwrap();
    let u = gen_u(&UPreset::BoxIndicator { a: 0.25, b: 0.75 }, grid, 0);
    let kernel = build_kernel(KernelKind::Bump, 0.25, grid).unwrap();
    let fast = Commutators::new(&sigma, &kernel).unwrap();
    let disc = renormal::Discretization { convolution: ConvolutionPath::Direct, ..Default::default() };
    let slow = Commutators::with_discretization(&sigma, &kernel, disc).unwrap();
    let a = fast.double_commutator(&u).unwrap();
    let b = slow.double_commutator(&u).unwrap();
    assert!(max_diff(a.values(), b.values()) <= 1e-12 * max_abs(b.values()));
    let e_fast: VectorFieldM = fast.e2(&u).unwrap();
    let e_slow = slow.e2(&u).unwrap();
    assert!((&e_fast.component(1).clone() - e_slow.component(1)).max_abs() <= 1e-12 * e_slow.max_abs());
    let _ = convolve(kernel.samples(), &u, ConvolutionPath::Direct).unwrap();
}

#[test]
fn rough_u_reassembly_defect_shrinks_with_resolution() {
    // For a discontinuous u the grid product rule fails by aliasing; at fixed
    // delta the kernel suppresses it as N grows.
    let mut last = f64::INFINITY;
    for n in [128, 256, 512, 1024] {
        let grid = make_grid(1, n).unwrap();
        let sigma = gen_sigma(&SigmaPreset::Trig, grid, 1, 1).unwrap();
        let u = gen_u(&UPreset::BoxIndicator { a: 0.25, b: 0.75 }, grid, 0);
        let kernel = build_kernel(KernelKind::Bump, 0.125, grid).unwrap();
        let c = Commutators::new(&sigma, &kernel).unwrap();
        let dc = c.double_commutator(&u).unwrap();
        let rel = (&c.decompose(&u).unwrap().reassembled() - &dc).max_abs() / dc.max_abs();
        assert!(rel < last / 10.0, "N={n}: {rel:e} after {last:e}");
        last = rel;
    }
    assert!(last <= 1e-6, "{last:e}");
}

#[test]
fn divergence_free_sigma_drops_terms_exactly() {
    let grid = make_grid(2, 64).unwrap();
    let sigma = gen_sigma(&SigmaPreset::DivergenceFree, grid, 2, 0).unwrap();
    let u = gen_u(&UPreset::PowerSingularity { alpha: 0.3, cap: 50.0 }, grid, 0);
    let kernel = build_kernel(KernelKind::Bump, 0.125, grid).unwrap();
    let terms = Commutators::new(&sigma, &kernel).unwrap().decompose(&u).unwrap();
    for n in [2, 5, 6] {
        assert_eq!(terms.term(n).max_abs(), 0.0, "T{n}");
    }
    assert!(terms.term(1).max_abs() > 1.0);
}
