//! Direct-quadrature oracles shared by the integration tests.

#![allow(dead_code)]

use renormal::commutators::Commutators;
use renormal::fields::derivative;
use renormal::{DerivativeBackend, MollifierKernel, ScalarField, SigmaField};

/// `h^d Σ_y a(x - y) b(y)` by explicit index arithmetic.
pub fn quadrature(a: &ScalarField, b: &ScalarField) -> Vec<f64> {
    let g = *a.grid();
    let (n, d) = (g.n(), g.d());
    let vol = g.cell_volume();
    (0..g.len())
        .map(|x| {
            let xi = g.multi_index(x);
            let mut acc = 0.0;
            for y in 0..g.len() {
                let yi = g.multi_index(y);
                let mut diff = [0usize; 3];
                for axis in 0..d {
                    diff[axis] = (xi[axis] + n - yi[axis]) % n;
                }
                acc += a.values()[g.flat_index(&diff[..d])] * b.values()[y];
            }
            vol * acc
        })
        .collect()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

pub fn add_into(acc: &mut [f64], v: &[f64], c: f64) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += c * b;
    }
}

/// T1..T8 rebuilt from their integral expressions with direct sums.
pub fn term_oracle(sigma: &SigmaField, u: &ScalarField, kernel: &MollifierKernel) -> Vec<Vec<f64>> {
    let grid = *sigma.grid();
    let (d, m, len) = (grid.d(), sigma.m(), grid.len());
    let sb = DerivativeBackend::Spectral;

    let dj: Vec<ScalarField> = (0..d).map(|i| kernel.derivative(&[i], sb).unwrap()).collect();
    let d2j = |i: usize, j: usize| kernel.derivative(&[i, j], sb).unwrap();
    let s = |i: usize, k: usize| sigma.get(i, k).values().to_vec();
    let ds = |j: usize, i: usize, k: usize| derivative(sigma.get(i, k), j, sb).unwrap().values().to_vec();
    let uv = u.values().to_vec();
    let field = |v: Vec<f64>| ScalarField::from_values(grid, v).unwrap();
    let div = |k: usize| {
        let mut acc = vec![0.0; len];
        for i in 0..d {
            add_into(&mut acc, &ds(i, i, k), 1.0);
        }
        acc
    };

    let mut oracle = vec![vec![0.0; len]; 8];
    for k in 0..m {
        let dk = div(k);
        for j in 0..d {
            let su = mul(&s(j, k), &uv);
            add_into(&mut oracle[1], &mul(&dk, &quadrature(&dj[j], &field(su.clone()))), 2.0);
            add_into(&mut oracle[5], &mul(&mul(&s(j, k), &dk), &quadrature(&dj[j], u)), 2.0);
            for i in 0..d {
                let kij = d2j(i, j);
                add_into(&mut oracle[0], &mul(&s(i, k), &quadrature(&kij, &field(su.clone()))), 2.0);
                add_into(&mut oracle[2], &quadrature(&kij, &field(mul(&s(i, k), &su))), 1.0);
                add_into(&mut oracle[3], &quadrature(&dj[i], &field(mul(&ds(j, i, k), &su))), -1.0);
                add_into(&mut oracle[6], &mul(&mul(&s(i, k), &s(j, k)), &quadrature(&kij, u)), 1.0);
                add_into(&mut oracle[7], &mul(&mul(&s(i, k), &ds(i, j, k)), &quadrature(&dj[j], u)), 1.0);
            }
        }
    }
    // T5 = ∂_i(σ_ik (∇σ)_k) (J * u)
    let ju = quadrature(kernel.samples(), u);
    let mut coeff = vec![0.0; len];
    for k in 0..m {
        let dk = div(k);
        for i in 0..d {
            let f = field(mul(&s(i, k), &dk));
            add_into(&mut coeff, derivative(&f, i, sb).unwrap().values(), 1.0);
        }
    }
    oracle[4] = mul(&coeff, &ju);
    oracle
}

/// Largest deviation of any transform-path term from its oracle, relative
/// to `max(1, |oracle|_∞)`.
pub fn worst_term_error(sigma: &SigmaField, u: &ScalarField, kernel: &MollifierKernel) -> (usize, f64) {
    let terms = Commutators::new(sigma, kernel).unwrap().decompose(u).unwrap();
    let oracle = term_oracle(sigma, u, kernel);
    let mut worst = (0, 0.0);
    for (n, o) in oracle.iter().enumerate() {
        let err = max_diff(terms.term(n + 1).values(), o) / max_abs(o).max(1.0);
        if err > worst.1 {
            worst = (n + 1, err);
        }
    }
    worst
}
