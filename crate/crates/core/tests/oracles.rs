//! Spectra compared against independent closed forms.

mod common;

use approx::assert_relative_eq;
use nalgebra::Matrix3;
use num_complex::Complex64;
use std::f64::consts::PI;

use vsl_core::asymptotics::build_model;
use vsl_core::ivp::char_det;
use vsl_core::locator::{find_eigenvalues_in_window, scan_low_spectrum, Window};
use vsl_core::verification::cluster_and_match;
use vsl_core::{PotentialSpec, Problem, SymMatrix};

fn flatten(problem: &Problem, lambda_max: f64) -> Vec<f64> {
    scan_low_spectrum(problem, lambda_max)
        .unwrap()
        .iter()
        .flat_map(|r| std::iter::repeat_n(r.lambda, r.multiplicity))
        .collect()
}

/// Constant `Q` with `H = 0`: eigenvalues are `k^2 + q_i`, `k >= 0`.
#[test]
fn constant_coupled_potential_matches_eigendecomposition() {
    let rows = [[1.0, 0.4, -0.3], [0.4, -0.5, 0.2], [-0.3, 0.2, 2.0]];
    let q = Matrix3::from_fn(|i, j| rows[i][j]);
    let qs: Vec<f64> = q.symmetric_eigen().eigenvalues.iter().copied().collect();
    let lambda_max = 40.0;
    let mut want: Vec<f64> = (0..8)
        .flat_map(|k| qs.iter().map(move |v| (k * k) as f64 + v))
        .filter(|l| *l <= lambda_max)
        .collect();
    want.sort_by(f64::total_cmp);

    let sym = SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
    let p = Problem::new(PotentialSpec::constant(sym), SymMatrix::zeros(3), SymMatrix::zeros(3)).unwrap();
    let got = flatten(&p, lambda_max);
    assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-8, "{g} vs {w}");
    }
}

/// Roots of `-mu sin(mu pi) + h cos(mu pi) + H (cos(mu pi) + h sin(mu pi)/mu)`,
/// the scalar problem `y'(0) = h y(0)`, `y'(pi) + H y(pi) = 0`, `P = 0`, found by
/// bisection on a fine grid in `mu > 0`.
fn scalar_robin_roots(h: f64, big_h: f64, mu_max: f64) -> Vec<f64> {
    let f = |mu: f64| {
        let (s, c) = (mu * PI).sin_cos();
        -mu * s + h * c + big_h * (c + h * s / mu)
    };
    let steps = 20000;
    let mut roots = Vec::new();
    let mut prev = (1e-9, f(1e-9));
    for i in 1..=steps {
        let x = 1e-9 + mu_max * i as f64 / steps as f64;
        let fx = f(x);
        if prev.1 == 0.0 || prev.1.signum() != fx.signum() {
            let (mut lo, mut hi) = (prev.0, x);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if f(mid).signum() == f(lo).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = (x, fx);
    }
    roots
}

#[test]
fn scalar_robin_matches_bisection() {
    // h = 0.5, H = 0.8: both terms push the spectrum up, so all eigenvalues are positive
    let (h, big_h) = (0.5, 0.8);
    let p = Problem::new(
        PotentialSpec::zero(1).unwrap(),
        SymMatrix::diagonal(&[-h]),
        SymMatrix::diagonal(&[big_h]),
    )
    .unwrap();
    let got = flatten(&p, 60.0);
    let want: Vec<f64> = scalar_robin_roots(h, big_h, 60f64.sqrt()).iter().map(|m| m * m).collect();
    assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-8 * w.max(1.0), "{g} vs {w}");
    }
}

#[test]
fn negative_eigenvalue_from_attractive_boundary() {
    // y'(0) = -2 y(0), y'(pi) = 0: exactly one eigenvalue below zero, near -4
    let p = Problem::new(PotentialSpec::zero(1).unwrap(), SymMatrix::diagonal(&[2.0]), SymMatrix::zeros(1)).unwrap();
    let recs = scan_low_spectrum(&p, 5.0).unwrap();
    assert!(recs[0].lambda < 0.0);
    // -kappa^2 with kappa tanh(kappa pi) = 2
    let mut k = 2.0f64;
    for _ in 0..50 {
        k -= (k * (k * PI).tanh() - 2.0) / ((k * PI).tanh() + k * PI / (k * PI).cosh().powi(2));
    }
    assert!((recs[0].lambda + k * k).abs() < 1e-8, "{} vs {}", recs[0].lambda, -k * k);
    assert!(recs[0].sqrt_lambda < 0.0);
    assert_eq!(recs[0].window, None);
}

#[test]
fn free_char_det_closed_form() {
    for n in [1usize, 2, 3] {
        let p = Problem::free(n).unwrap();
        for mu in [
            Complex64::new(0.3, 0.0),
            Complex64::new(3.7, 0.4),
            Complex64::new(11.2, -0.9),
            Complex64::new(19.6, 0.2),
        ] {
            let want = (-mu * (mu * PI).sin()).powu(n as u32);
            let got = char_det(&p, mu).unwrap();
            assert!((got - want).norm() <= 1e-8 * want.norm(), "N={n} mu={mu}: {got} vs {want}");
        }
    }
}

#[test]
fn two_identity_window_matches_shifted_free_spectrum() {
    let p = common::two_identity();
    let recs = find_eigenvalues_in_window(&p, &Window::standard(15).unwrap()).unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].multiplicity, 2);
    assert_relative_eq!(recs[0].lambda, 227.0, max_relative = 1e-9);
}

#[test]
fn generic_problem_matches_first_order_law() {
    let p = common::generic();
    let model = build_model(&p, 1).unwrap();
    let clusters = cluster_and_match(&p, &model, 20, 24).unwrap();
    for c in &clusters {
        assert!(c.is_complete(2), "{c:?}");
        // mismatch = n * gamma_n, and gamma_n = o(1/n^2)
        assert!(c.max_abs_mismatch().unwrap() < 2.0 / c.n as f64, "{c:?}");
    }
}
