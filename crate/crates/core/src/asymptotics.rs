//! Asymptotic model of the boundary matrix:
//! `W(mu^2) = -mu sin(mu pi) I + cos(mu pi) G1 + sin(mu pi)/mu G2 + cos(mu pi)/mu^2 G3 + ...`
//! with `G1 = H_R - H_L + K(pi, pi)`. The characteristic values `a_k pi` of `G1`
//! give the first-order eigenvalue law `sqrt(lambda) = n + a_k / n + o(1/n^2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ivp::ShootingGrid;
use crate::linalg::{symmetric_eigen, ComplexMatrix, Mat, RealMatrix, SymMatrix};
use crate::problem::Problem;

/// Default number of samples on a contour `|mu - mu0| = delta / n^2`.
pub const CONTOUR_SAMPLES: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticModel {
    pub g1: SymMatrix,
    pub g2: Option<RealMatrix>,
    pub g3: Option<RealMatrix>,
    /// Characteristic values of `G1` divided by `pi`, ascending with multiplicity.
    pub alphas: Vec<f64>,
    /// Orthogonal; column `k` is the eigenvector of `G1` for `alphas[k]`.
    pub u: RealMatrix,
}

impl AsymptoticModel {
    pub fn dimension(&self) -> usize {
        self.g1.order()
    }

    /// `rho_i(mu) = -mu sin(mu pi) + a_i pi cos(mu pi)`, the diagonal of `U^T Psi U`.
    pub fn rho(&self, mu: Complex64) -> Vec<Complex64> {
        let s = (mu * PI).sin();
        let c = (mu * PI).cos();
        self.alphas.iter().map(|a| -mu * s + c * (a * PI)).collect()
    }
}

/// Builds `G1` and, for `order >= 2`, `G2`; for `order == 3`, `G3`.
///
/// `G3` follows the published grouping term by term, including
/// `1/2 (P(pi) K(pi,pi) - H_L)`.
pub fn build_model(problem: &Problem, order: u8) -> Result<AsymptoticModel> {
    if !(1..=3).contains(&order) {
        return Err(Error::Precondition(format!("model order must be 1, 2 or 3, got {order}")));
    }
    let pot = problem.potential();
    let hl = problem.h_left().matrix();
    let hr = problem.h_right().matrix();
    let k_pi = pot.kernel_diag(PI)?;
    let g1 = problem.h_right().sub(problem.h_left()).add(&k_pi);
    let eig = symmetric_eigen(&g1);
    let alphas = eig.values.iter().map(|v| v / PI).collect();
    let k = k_pi.matrix();

    let mut g2 = None;
    let mut g3 = None;
    if order >= 2 {
        let p0 = pot.eval(0.0)?.into_matrix();
        let ppi = pot.eval(PI)?.into_matrix();
        let pk = pot.integral_p_kernel();
        g2 = Some(
            ppi.add(&p0)
                .scaled(0.5)
                .add(&pk.scaled(0.5))
                .add(&hr.matmul(k))
                .sub(&k.matmul(hl))
                .sub(&hr.matmul(hl)),
        );
        if order == 3 {
            let (dp0, dppi) = pot.derivative_at_ends();
            let sq = pot.integral_p_squared_minus_p_p0();
            g3 = Some(
                dppi.sub(&dp0)
                    .scaled(0.25)
                    .add(&pk.scaled(0.5).matmul(hl))
                    .add(&hr.matmul(&ppi.sub(&p0)).scaled(0.25))
                    .add(&sq.scaled(0.125))
                    .add(&ppi.matmul(k).sub(hl).scaled(0.5))
                    .add(&hr.matmul(k).matmul(hl)),
            );
        }
    }
    Ok(AsymptoticModel {
        g1,
        g2,
        g3,
        alphas,
        u: eig.vectors,
    })
}

/// `Psi(mu^2) = -mu sin(mu pi) I + cos(mu pi) G1`.
pub fn psi_matrix(model: &AsymptoticModel, mu: Complex64) -> ComplexMatrix {
    let n = model.dimension();
    let s = (mu * PI).sin();
    let c = (mu * PI).cos();
    Mat::from_fn(n, |i, j| {
        let diag = if i == j { -mu * s } else { Complex64::new(0.0, 0.0) };
        diag + c * model.g1.get(i, j)
    })
}

/// `E(mu^2) = W(mu^2) - Psi(mu^2)`.
pub fn residual_matrix(problem: &Problem, model: &AsymptoticModel, mu: Complex64) -> Result<ComplexMatrix> {
    let grid = ShootingGrid::for_mu_bound(problem, mu.norm());
    residual_on_grid(&grid, model, mu)
}

pub fn residual_on_grid(grid: &ShootingGrid<'_>, model: &AsymptoticModel, mu: Complex64) -> Result<ComplexMatrix> {
    Ok(grid.boundary_matrix(mu * mu)?.sub(&psi_matrix(model, mu)))
}

/// Contour `|mu - center| = delta / n^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub center: Complex64,
    pub delta: f64,
    pub n: u32,
    pub samples: usize,
}

impl ContourSpec {
    pub fn new(center: Complex64, delta: f64, n: u32) -> Result<Self> {
        if !(delta > 0.0) || n == 0 {
            return Err(Error::Precondition(format!(
                "contour needs delta > 0 and n >= 1 (delta = {delta}, n = {n})"
            )));
        }
        Ok(ContourSpec {
            center,
            delta,
            n,
            samples: CONTOUR_SAMPLES,
        })
    }

    pub fn radius(&self) -> f64 {
        self.delta / (self.n as f64 * self.n as f64)
    }

    /// Sample points; for a real center only the closed upper half is returned,
    /// since every quantity measured on the contour is conjugation-symmetric.
    pub fn points(&self) -> Vec<Complex64> {
        let r = self.radius();
        if self.center.im == 0.0 {
            let half = (self.samples / 2).max(2);
            (0..=half)
                .map(|k| self.center + Complex64::from_polar(r, PI * k as f64 / half as f64))
                .collect()
        } else {
            (0..self.samples.max(4))
                .map(|k| self.center + Complex64::from_polar(r, 2.0 * PI * k as f64 / self.samples as f64))
                .collect()
        }
    }
}

/// Max over contour samples of `|| U^T Psi^{-1}(mu^2) E(mu^2) U ||_inf`, with
/// `Psi^{-1}` applied through the diagonalization.
pub fn contour_norm(problem: &Problem, model: &AsymptoticModel, contour: &ContourSpec) -> Result<f64> {
    let grid = ShootingGrid::for_mu_bound(problem, contour.center.norm() + contour.radius());
    let n = model.dimension();
    let u = model.u.to_complex();
    let ut = u.transpose();
    let mut worst: f64 = 0.0;
    for mu in contour.points() {
        let rho = model.rho(mu);
        let min_rho = rho.iter().map(|r| r.norm()).fold(f64::INFINITY, f64::min);
        if min_rho < 1e-12 {
            return Err(Error::SingularPsi { min_rho });
        }
        let e = residual_on_grid(&grid, model, mu)?;
        let rotated = ut.matmul(&e).matmul(&u);
        let scaled = Mat::from_fn(n, |i, j| rotated.get(i, j) / rho[i]);
        worst = worst.max(scaled.norm_inf());
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransRootResult {
    pub alpha: f64,
    pub n: u32,
    pub root: f64,
    pub series_seed: f64,
    /// `n^3 (root - n - alpha/n)`.
    pub kappa_estimate: f64,
    pub iterations: usize,
}

/// Default residual tolerance for [`transcendental_root`], relative to `n`.
pub const TRANSROOT_TOL: f64 = 1e-13;

/// Root of `mu sin(mu pi) - alpha pi cos(mu pi) = 0` near `n`, by safeguarded
/// Newton from `n + alpha/n`.
pub fn transcendental_root(alpha: f64, n: u32) -> Result<TransRootResult> {
    transcendental_root_with_tol(alpha, n, TRANSROOT_TOL)
}

pub fn transcendental_root_with_tol(alpha: f64, n: u32, tol: f64) -> Result<TransRootResult> {
    let nf = n as f64;
    if !alpha.is_finite() || nf < 2.0 + alpha.abs() {
        return Err(Error::Precondition(format!(
            "transcendental root needs n >= 2 + |alpha| (n = {n}, alpha = {alpha})"
        )));
    }
    // Work with the offset e = mu - n: up to the sign (-1)^n the equation is
    // F(e) = (n + e) sin(pi e) - alpha pi cos(pi e).
    let f = |e: f64| (nf + e) * (PI * e).sin() - alpha * PI * (PI * e).cos();
    let df = |e: f64| {
        (PI * e).sin() + PI * (nf + e) * (PI * e).cos() + alpha * PI * PI * (PI * e).sin()
    };
    let mut e = alpha / nf;
    let mut trajectory = vec![nf + e];
    let mut converged_at = None;
    for it in 0..50 {
        let fe = f(e);
        if fe.abs() <= tol * nf {
            if converged_at.is_some() || fe == 0.0 {
                break;
            }
            converged_at = Some(it);
        }
        let d = df(e);
        let mut step = fe / d;
        // stay inside the basin |e| < 1/2
        while (e - step).abs() >= 0.5 {
            step *= 0.5;
        }
        e -= step;
        trajectory.push(nf + e);
        if converged_at.is_some() {
            break;
        }
    }
    if f(e).abs() > tol * nf {
        return Err(Error::NoConvergence {
            iterations: 50,
            trajectory,
        });
    }
    Ok(TransRootResult {
        alpha,
        n,
        root: nf + e,
        series_seed: nf + alpha / nf,
        kappa_estimate: nf * nf * nf * (e - alpha / nf),
        iterations: trajectory.len() - 1,
    })
}

/// `{ n + a_k / n }`, ascending, one per characteristic value.
pub fn predict_sqrt_eigenvalues(model: &AsymptoticModel, n: u32) -> Vec<f64> {
    let nf = n as f64;
    let mut out: Vec<f64> = model.alphas.iter().map(|a| nf + a / nf).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Like [`predict_sqrt_eigenvalues`] but with each value replaced by the root
/// of `rho_k` near `n` when `n` is large enough for the Newton basin.
pub fn predict_sqrt_eigenvalues_refined(model: &AsymptoticModel, n: u32) -> Vec<f64> {
    let nf = n as f64;
    let mut out: Vec<f64> = model
        .alphas
        .iter()
        .map(|&a| {
            transcendental_root(a, n)
                .map(|r| r.root)
                .unwrap_or(nf + a / nf)
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Largest discrepancy between the two sides of
/// `|sin mu pi|^2 = (cosh 2 t pi - cos 2 s pi) / 2`,
/// `|cos mu pi|^2 = (cosh 2 t pi + cos 2 s pi) / 2` and
/// `2 Re(mu sin(mu pi) cos(conj(mu) pi)) = s sin 2 s pi - t sinh 2 t pi`, `mu = s + i t`.
/// (The cross term carries `-t sinh`; `+t sinh` holds for `conj(mu)` in front.)
pub fn modulus_identities_check(mu: Complex64) -> f64 {
    let (s, t) = (mu.re, mu.im);
    let sin = (mu * PI).sin();
    let cos = (mu * PI).cos();
    let cos_conj = (mu.conj() * PI).cos();
    let e1 = (sin.norm_sqr() - 0.5 * ((2.0 * t * PI).cosh() - (2.0 * s * PI).cos())).abs();
    let e2 = (cos.norm_sqr() - 0.5 * ((2.0 * t * PI).cosh() + (2.0 * s * PI).cos())).abs();
    let lhs = 2.0 * (mu * sin * cos_conj).re;
    let rhs = s * (2.0 * s * PI).sin() - t * (2.0 * t * PI).sinh();
    let e3 = (lhs - rhs).abs();
    e1.max(e2).max(e3)
}
