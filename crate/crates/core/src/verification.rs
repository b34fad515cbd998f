//! Cross-checks between located spectra and the asymptotic model.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::asymptotics::{predict_sqrt_eigenvalues, AsymptoticModel};
use crate::error::{Error, Result};
use crate::ivp::ShootingGrid;
use crate::linalg::{symmetric_eigen, SymMatrix};
use crate::locator::{scan_low_spectrum, search_window, EigenvalueRecord, LocatorConfig, Window};
use crate::problem::{PotentialSpec, Problem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub n: u32,
    pub records: Vec<EigenvalueRecord>,
    pub multiplicity_sum: usize,
    pub rouche_count: i64,
    /// `n (sqrt(lambda) - n)`, repeated per multiplicity, ascending.
    pub residuals: Vec<f64>,
    /// Sorted alphas paired with `residuals`; empty when the window is incomplete.
    pub matched_alphas: Vec<f64>,
    pub mismatch: Vec<f64>,
}

impl ClusterReport {
    /// `multiplicity_sum == N` and the winding count agrees.
    pub fn is_complete(&self, dimension: usize) -> bool {
        self.multiplicity_sum == dimension && self.rouche_count == dimension as i64
    }

    pub fn max_abs_mismatch(&self) -> Option<f64> {
        self.mismatch.iter().map(|m| m.abs()).reduce(f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

/// Clusters for every `n` in `n_lo..=n_hi`. Windows whose multiplicities do not
/// add up to `N` are reported with empty matches rather than failing.
pub fn cluster_and_match(
    problem: &Problem,
    model: &AsymptoticModel,
    n_lo: u32,
    n_hi: u32,
) -> Result<Vec<ClusterReport>> {
    cluster_and_match_with(problem, model, n_lo, n_hi, &LocatorConfig::default())
}

pub fn cluster_and_match_with(
    problem: &Problem,
    model: &AsymptoticModel,
    n_lo: u32,
    n_hi: u32,
    config: &LocatorConfig,
) -> Result<Vec<ClusterReport>> {
    if n_lo < 1 || n_hi > 200 || n_lo > n_hi {
        return Err(Error::Precondition(format!("n range must lie within [1, 200], got {n_lo}..{n_hi}")));
    }
    (n_lo..=n_hi)
        .map(|n| {
            let window = Window::standard(n)?;
            let seeds = predict_sqrt_eigenvalues(model, n);
            let search = search_window(problem, &window, &seeds, config)?;
            Ok(match_cluster(n, search.count, search.records, &model.alphas))
        })
        .collect()
}

/// Builds the report for one window; the result does not depend on the order
/// of `records`.
pub fn match_cluster(n: u32, rouche_count: i64, mut records: Vec<EigenvalueRecord>, alphas: &[f64]) -> ClusterReport {
    records.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let nf = n as f64;
    let mut residuals: Vec<f64> = records
        .iter()
        .flat_map(|r| std::iter::repeat_n(nf * (r.sqrt_lambda - nf), r.multiplicity))
        .collect();
    residuals.sort_by(f64::total_cmp);
    let multiplicity_sum = residuals.len();
    let (matched_alphas, mismatch) = if multiplicity_sum == alphas.len() {
        let mut sorted = alphas.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mismatch = residuals.iter().zip(&sorted).map(|(r, a)| r - a).collect();
        (sorted, mismatch)
    } else {
        (Vec::new(), Vec::new())
    };
    ClusterReport {
        n,
        records,
        multiplicity_sum,
        rouche_count,
        residuals,
        matched_alphas,
        mismatch,
    }
}

/// Least-squares fit of `log(value)` against `log(n)`; `exponent = -slope`.
pub fn fit_decay(points: &[(f64, f64)]) -> Result<DecayFit> {
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::Precondition(format!("decay fit needs at least 4 distinct n, got {}", distinct.len())));
    }
    if let Some(p) = points.iter().find(|p| !(p.0 > 0.0) || !(p.1 > 0.0) || !p.1.is_finite()) {
        return Err(Error::Domain(format!("decay fit needs positive n and values, got ({}, {})", p.0, p.1)));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(DecayFit {
        exponent: -slope,
        r_squared,
        points: points.to_vec(),
    })
}

/// `(h + H + q/2) / pi` for the scalar problem `y'(0) - h y(0) = 0`,
/// `y'(pi) + H y(pi) = 0`, where `q` is the integral of the potential.
/// In [`Problem`] terms `H_L = -h` and `H_R = H`.
pub fn scalar_reference_alpha(h: f64, big_h: f64, q_integral: f64) -> f64 {
    (h + big_h + 0.5 * q_integral) / PI
}

/// Ground-truth spectrum of a decoupled problem, assembled from scalar scans of
/// its channels. Constant potentials are first rotated to their eigenbasis,
/// which must also diagonalize both boundary matrices.
pub fn oracle_decoupled_spectrum(problem: &Problem, lambda_max: f64) -> Result<Vec<f64>> {
    const TOL: f64 = 1e-12;
    let n = problem.dimension();
    let channels: Vec<Problem> = if problem.is_decoupled() {
        (0..n)
            .map(|i| {
                Problem::new(
                    problem.potential().channel(i)?,
                    SymMatrix::diagonal(&[problem.h_left().get(i, i)]),
                    SymMatrix::diagonal(&[problem.h_right().get(i, i)]),
                )
            })
            .collect::<Result<_>>()?
    } else if problem.potential().is_constant() {
        let p = problem.potential().eval(0.0)?;
        let eig = symmetric_eigen(&p);
        let u = &eig.vectors;
        let rotate = |h: &SymMatrix| u.transpose().matmul(h.matrix()).matmul(u);
        let hl = rotate(problem.h_left());
        let hr = rotate(problem.h_right());
        let off = |m: &crate::RealMatrix| {
            let mut worst: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        worst = worst.max(m.get(i, j).abs());
                    }
                }
            }
            worst
        };
        let scale = 1.0 + hl.max_abs().max(hr.max_abs());
        if off(&hl) > TOL * scale || off(&hr) > TOL * scale {
            return Err(Error::Precondition(
                "boundary matrices are not diagonal in the eigenbasis of the constant potential".into(),
            ));
        }
        (0..n)
            .map(|i| {
                Problem::new(
                    PotentialSpec::constant(SymMatrix::diagonal(&[eig.values[i]])),
                    SymMatrix::diagonal(&[hl.get(i, i)]),
                    SymMatrix::diagonal(&[hr.get(i, i)]),
                )
            })
            .collect::<Result<_>>()?
    } else {
        return Err(Error::Precondition(
            "oracle needs diagonal data or a constant potential".into(),
        ));
    };
    let mut out = Vec::new();
    for ch in &channels {
        for rec in scan_low_spectrum(ch, lambda_max)? {
            out.extend(std::iter::repeat_n(rec.lambda, rec.multiplicity));
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// `|det W(mu^2) / theta(mu) - 1|` with `theta(mu) = (-mu sin mu pi)^N`, the
/// determinant of the leading term of `W`.
pub fn factorization_deviation(problem: &Problem, mu: Complex64) -> Result<f64> {
    let grid = ShootingGrid::for_mu_bound(problem, mu.norm());
    let det = grid.char_det(mu)?;
    let theta = (-mu * (mu * PI).sin()).powu(problem.dimension() as u32);
    Ok((det / theta - 1.0).norm())
}

/// `||(-1)^n W(mu_k^2) - (G1 - a_k pi I)||_inf` at the first-order predictions
/// `mu_k = n + a_k / n`; measures how well `Psi` captures `W` near a cluster.
pub fn cluster_defect(problem: &Problem, model: &AsymptoticModel, n: u32) -> Result<f64> {
    let nf = n as f64;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let grid = ShootingGrid::for_mu_bound(problem, nf + 1.0);
    let mut worst: f64 = 0.0;
    for &a in &model.alphas {
        let mu = nf + a / nf;
        let w = grid.boundary_matrix(mu * mu)?.scaled(sign);
        let target = model.g1.sub(&SymMatrix::scaled_identity(model.dimension(), a * PI));
        worst = worst.max(w.sub(target.matrix()).norm_inf());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::build_model;
    use crate::expr::TrigPoly;

    fn constant(rows: &[Vec<f64>]) -> Problem {
        let n = rows.len();
        Problem::new(
            PotentialSpec::constant(SymMatrix::from_rows(rows).unwrap()),
            SymMatrix::zeros(n),
            SymMatrix::zeros(n),
        )
        .unwrap()
    }

    #[test]
    fn free_clusters_are_exact() {
        let p = Problem::free(2).unwrap();
        let model = build_model(&p, 1).unwrap();
        for c in cluster_and_match(&p, &model, 5, 10).unwrap() {
            assert!(c.is_complete(2));
            assert!(c.mismatch.iter().all(|m| m.abs() < 1e-7), "{c:?}");
        }
    }

    #[test]
    fn constant_two_identity_mismatch() {
        let p = constant(&[vec![2.0, 0.0], vec![0.0, 2.0]]);
        let model = build_model(&p, 1).unwrap();
        let c = &cluster_and_match(&p, &model, 10, 10).unwrap()[0];
        let want = 10.0 * ((102.0f64).sqrt() - 10.0) - 1.0;
        assert_eq!(c.mismatch.len(), 2);
        for m in &c.mismatch {
            assert!((m - want).abs() < 1e-6, "{m} vs {want}");
        }
        assert!((want + 0.00497).abs() < 1e-4);
    }

    #[test]
    fn coupled_constant_residuals() {
        let p = constant(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let model = build_model(&p, 1).unwrap();
        let c = &cluster_and_match(&p, &model, 20, 20).unwrap()[0];
        assert_eq!(c.matched_alphas.len(), 2);
        assert!((c.matched_alphas[0] + 0.5).abs() < 1e-12 && (c.matched_alphas[1] - 0.5).abs() < 1e-12);
        assert!(c.max_abs_mismatch().unwrap() <= 1e-2);
    }

    #[test]
    fn rejects_bad_range() {
        let p = Problem::free(1).unwrap();
        let model = build_model(&p, 1).unwrap();
        assert!(cluster_and_match(&p, &model, 0, 3).is_err());
        assert!(cluster_and_match(&p, &model, 5, 201).is_err());
    }

    #[test]
    fn fit_decay_examples() {
        let pts: Vec<(f64, f64)> = [10.0, 20.0, 40.0, 80.0].iter().map(|&n: &f64| (n, n.powi(-3))).collect();
        let fit = fit_decay(&pts).unwrap();
        assert!((fit.exponent - 3.0).abs() < 1e-6);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = [10.0, 20.0, 40.0, 80.0].iter().map(|&n| (n, 0.7)).collect();
        assert!(fit_decay(&flat).unwrap().exponent.abs() < 1e-12);
        assert!(matches!(fit_decay(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0)]), Err(Error::Domain(_))));
        assert!(fit_decay(&pts[..3]).is_err());
    }

    #[test]
    fn scalar_alpha_examples() {
        assert_eq!(scalar_reference_alpha(0.0, 0.0, 0.0), 0.0);
        assert!((scalar_reference_alpha(1.0, 1.0, 0.0) - 2.0 / PI).abs() < 1e-15);
        assert!((scalar_reference_alpha(0.0, 0.0, 2.0 * PI) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scalar_alpha_agrees_with_model() {
        let q = TrigPoly::from_parts(&[0.5, 0.2], &[(1.0, 0.3)], &[(2.0, -0.4)]);
        let (h, big_h) = (0.7, -0.3);
        let p = Problem::new(
            PotentialSpec::diagonal(vec![q.clone()]).unwrap(),
            SymMatrix::diagonal(&[-h]),
            SymMatrix::diagonal(&[big_h]),
        )
        .unwrap();
        let model = build_model(&p, 1).unwrap();
        let want = scalar_reference_alpha(h, big_h, q.integral(0.0, PI));
        assert!((model.alphas[0] - want).abs() < 1e-12);
    }

    #[test]
    fn oracle_examples() {
        let got = oracle_decoupled_spectrum(&Problem::free(2).unwrap(), 5.0).unwrap();
        let want = [0.0, 0.0, 1.0, 1.0, 4.0, 4.0];
        assert_eq!(got.len(), want.len());
        assert!(got.iter().zip(want).all(|(g, w)| (g - w).abs() < 1e-8));

        let got = oracle_decoupled_spectrum(&constant(&[vec![1.0, 0.0], vec![0.0, 4.0]]), 6.0).unwrap();
        let want = [1.0, 2.0, 4.0, 5.0, 5.0];
        assert_eq!(got.len(), want.len(), "{got:?}");
        assert!(got.iter().zip(want).all(|(g, w)| (g - w).abs() < 1e-8));

        // n^2 +- 1 up to 3.5 picks up 2^2 - 1 = 3
        let got = oracle_decoupled_spectrum(&constant(&[vec![0.0, 1.0], vec![1.0, 0.0]]), 3.5).unwrap();
        let want = [-1.0, 0.0, 1.0, 2.0, 3.0];
        assert_eq!(got.len(), want.len(), "{got:?}");
        assert!(got.iter().zip(want).all(|(g, w)| (g - w).abs() < 1e-8));
    }

    #[test]
    fn oracle_rejects_coupled_boundary() {
        let p = Problem::new(
            PotentialSpec::constant(SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()),
            SymMatrix::diagonal(&[1.0, 0.0]),
            SymMatrix::zeros(2),
        )
        .unwrap();
        assert!(matches!(oracle_decoupled_spectrum(&p, 3.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn factorization_deviation_is_small_for_free() {
        let d = factorization_deviation(&Problem::free(2).unwrap(), Complex64::new(7.25, 0.0)).unwrap();
        assert!(d < 1e-8);
    }

    #[test]
    fn cluster_defect_shrinks() {
        let p = constant(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let model = build_model(&p, 1).unwrap();
        let d10 = cluster_defect(&p, &model, 10).unwrap();
        let d20 = cluster_defect(&p, &model, 20).unwrap();
        assert!(d20 < 0.6 * d10 && d10 < 1.0, "{d10} {d20}");
    }
}
