//! Matrix initial-value problem `-Y'' + P(x) Y = lambda Y`, `Y(0) = I`,
//! `Y'(0) = -H_L`, integrated by classical RK4 on the first-order system, and
//! the boundary matrix `W(lambda) = Y'(pi) + H_R Y(pi)` built from it.
//!
//! The step count is fixed per grid, so the discrete `W` is a polynomial in
//! `lambda` and therefore analytic; winding numbers of `det W` computed on one
//! grid count the zeros of that polynomial exactly.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Lu, Mat, Scalar};
use crate::problem::Problem;

/// RK4 steps per unit of `1 + |mu|`. With `h (1 + |mu|) <= pi / 320` the relative
/// phase error of RK4 on `y'' = -mu^2 y`, about `(mu h)^4 / 120`, stays below
/// `8e-11` for every `mu`.
pub const STEPS_PER_UNIT_MU: f64 = 320.0;
pub const MIN_STEPS: usize = 64;

/// Step rule: `max(64, ceil(320 (1 + |mu|)))`.
pub fn step_count(mu_abs: f64) -> usize {
    let s = (STEPS_PER_UNIT_MU * (1.0 + mu_abs)).ceil();
    if s.is_finite() {
        (s as usize).max(MIN_STEPS)
    } else {
        MIN_STEPS
    }
}

/// Solution of the matrix IVP at `x = pi`.
#[derive(Clone, Debug, PartialEq)]
pub struct IvpSolution<T = Complex64> {
    pub y_end: Mat<T>,
    pub dy_end: Mat<T>,
    pub lambda: T,
    pub steps: usize,
}

/// `W(lambda)` together with `dW/dlambda`, differentiated through the discrete
/// scheme (variational equation integrated alongside).
#[derive(Clone, Debug)]
pub struct BoundaryDerivative<T> {
    pub w: Mat<T>,
    pub dw: Mat<T>,
}

impl<T: Scalar> BoundaryDerivative<T> {
    /// `det W`.
    pub fn determinant(&self) -> T {
        self.w.determinant()
    }

    /// `det W / (d det W / d lambda) = 1 / tr(W^{-1} W')`. Near a zero of
    /// multiplicity `m` this behaves like `(lambda - lambda0) / m`, so its zeros
    /// are simple even where `det W` has multiple ones. Returns zero when `W` is
    /// exactly singular.
    pub fn newton_ratio(&self) -> T {
        let lu = Lu::factor(&self.w);
        match lu.solve(&self.dw) {
            None => T::zero(),
            Some(x) => {
                let tr = x.trace();
                if tr.modulus() == 0.0 {
                    T::from_real(f64::INFINITY)
                } else {
                    T::one() / tr
                }
            }
        }
    }
}

/// Fixed RK4 grid over `[0, pi]` with the potential sampled at every node and
/// midpoint. Reusing one grid for many values of `lambda` keeps all those
/// evaluations on the same discrete (analytic) approximation.
#[derive(Clone, Debug)]
pub struct ShootingGrid<'a> {
    problem: &'a Problem,
    steps: usize,
    h: f64,
    samples: Vec<f64>,
}

impl<'a> ShootingGrid<'a> {
    pub fn new(problem: &'a Problem, steps: usize) -> Self {
        let steps = steps.max(1);
        let n = problem.dimension();
        let n2 = n * n;
        let h = PI / steps as f64;
        let mut samples = vec![0.0; (2 * steps + 1) * n2];
        for k in 0..=2 * steps {
            let x = if k == 2 * steps {
                PI
            } else {
                (0.5 * h * k as f64).min(PI)
            };
            problem
                .potential()
                .sample_into(x, &mut samples[k * n2..(k + 1) * n2]);
        }
        ShootingGrid {
            problem,
            steps,
            h,
            samples,
        }
    }

    /// Grid fine enough for every `|mu| <= mu_bound` under the step rule.
    pub fn for_mu_bound(problem: &'a Problem, mu_bound: f64) -> Self {
        Self::new(problem, step_count(mu_bound))
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn problem(&self) -> &Problem {
        self.problem
    }

    fn integrate<T: Scalar>(&self, lambda: T, derivative: bool) -> Result<Vec<T>> {
        let n = self.problem.dimension();
        let n2 = n * n;
        let width = if derivative { 4 * n2 } else { 2 * n2 };
        let mut u = vec![T::zero(); width];
        let hl = self.problem.h_left();
        for i in 0..n {
            u[i * n + i] = T::one();
            for j in 0..n {
                u[n2 + i * n + j] = T::from_real(-hl.get(i, j));
            }
        }
        let mut k1 = vec![T::zero(); width];
        let mut k2 = vec![T::zero(); width];
        let mut k3 = vec![T::zero(); width];
        let mut k4 = vec![T::zero(); width];
        let mut tmp = vec![T::zero(); width];
        let h = self.h;
        let half = 0.5 * h;
        for step in 0..self.steps {
            let p0 = &self.samples[2 * step * n2..(2 * step + 1) * n2];
            let pm = &self.samples[(2 * step + 1) * n2..(2 * step + 2) * n2];
            let p1 = &self.samples[(2 * step + 2) * n2..(2 * step + 3) * n2];
            rhs(p0, n, lambda, &u, &mut k1, derivative);
            axpy(&u, half, &k1, &mut tmp);
            rhs(pm, n, lambda, &tmp, &mut k2, derivative);
            axpy(&u, half, &k2, &mut tmp);
            rhs(pm, n, lambda, &tmp, &mut k3, derivative);
            axpy(&u, h, &k3, &mut tmp);
            rhs(p1, n, lambda, &tmp, &mut k4, derivative);
            let w = h / 6.0;
            for i in 0..width {
                u[i] += (k1[i] + (k2[i] + k3[i]).scale(2.0) + k4[i]).scale(w);
            }
            if (step % 32 == 31 || step + 1 == self.steps) && u.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence {
                    step: step + 1,
                    steps: self.steps,
                    lambda: format!("{:?}", lambda),
                });
            }
        }
        Ok(u)
    }

    pub fn solve<T: Scalar>(&self, lambda: T) -> Result<IvpSolution<T>> {
        let n = self.problem.dimension();
        let n2 = n * n;
        let u = self.integrate(lambda, false)?;
        Ok(IvpSolution {
            y_end: Mat::from_row_major(n, u[..n2].to_vec())?,
            dy_end: Mat::from_row_major(n, u[n2..2 * n2].to_vec())?,
            lambda,
            steps: self.steps,
        })
    }

    pub fn boundary_matrix<T: Scalar>(&self, lambda: T) -> Result<Mat<T>> {
        let sol = self.solve(lambda)?;
        Ok(apply_right_boundary(self.problem, &sol.y_end, &sol.dy_end))
    }

    pub fn boundary_with_derivative<T: Scalar>(&self, lambda: T) -> Result<BoundaryDerivative<T>> {
        let n = self.problem.dimension();
        let n2 = n * n;
        let u = self.integrate(lambda, true)?;
        let y = Mat::from_row_major(n, u[..n2].to_vec())?;
        let dy = Mat::from_row_major(n, u[n2..2 * n2].to_vec())?;
        let z = Mat::from_row_major(n, u[2 * n2..3 * n2].to_vec())?;
        let dz = Mat::from_row_major(n, u[3 * n2..].to_vec())?;
        Ok(BoundaryDerivative {
            w: apply_right_boundary(self.problem, &y, &dy),
            dw: apply_right_boundary(self.problem, &z, &dz),
        })
    }

    /// `det W(mu^2)`.
    pub fn char_det(&self, mu: Complex64) -> Result<Complex64> {
        Ok(self.boundary_matrix(mu * mu)?.determinant())
    }

    /// `det W(lambda)` for complex `lambda`.
    pub fn det_at_lambda(&self, lambda: Complex64) -> Result<Complex64> {
        Ok(self.boundary_matrix(lambda)?.determinant())
    }
}

fn apply_right_boundary<T: Scalar>(problem: &Problem, y: &Mat<T>, dy: &Mat<T>) -> Mat<T> {
    let n = problem.dimension();
    let hr = problem.h_right();
    Mat::from_fn(n, |i, j| {
        let mut s = dy.get(i, j);
        for k in 0..n {
            s += y.get(k, j).scale(hr.get(i, k));
        }
        s
    })
}

#[inline]
fn axpy<T: Scalar>(u: &[T], a: f64, k: &[T], out: &mut [T]) {
    for ((o, &ui), &ki) in out.iter_mut().zip(u).zip(k) {
        *o = ui + ki.scale(a);
    }
}

/// Right-hand side of `(Y, Y', Z, Z')' = (Y', (P - lambda) Y, Z', (P - lambda) Z - Y)`
/// where `Z = dY/dlambda`.
#[inline]
fn rhs<T: Scalar>(p: &[f64], n: usize, lambda: T, u: &[T], k: &mut [T], derivative: bool) {
    let n2 = n * n;
    k[..n2].copy_from_slice(&u[n2..2 * n2]);
    potential_product(p, n, lambda, &u[..n2], &mut k[n2..2 * n2]);
    if derivative {
        k[2 * n2..3 * n2].copy_from_slice(&u[3 * n2..4 * n2]);
        potential_product(p, n, lambda, &u[2 * n2..3 * n2], &mut k[3 * n2..4 * n2]);
        for i in 0..n2 {
            k[3 * n2 + i] -= u[i];
        }
    }
}

#[inline]
fn potential_product<T: Scalar>(p: &[f64], n: usize, lambda: T, y: &[T], out: &mut [T]) {
    for i in 0..n {
        for j in 0..n {
            let mut s = T::zero() - lambda * y[i * n + j];
            for l in 0..n {
                s += y[l * n + j].scale(p[i * n + l]);
            }
            out[i * n + j] = s;
        }
    }
}

/// `(cos(sqrt(lambda) x), sin(sqrt(lambda) x) / sqrt(lambda))`, both even in
/// `sqrt(lambda)`; small arguments use the Taylor series so that `lambda = 0`
/// is exact.
pub fn cos_and_sinc(lambda: Complex64, x: f64) -> (Complex64, Complex64) {
    let arg2 = lambda * x * x;
    if arg2.norm() < 1e-4 {
        // cos z = 1 - z^2/2 + z^4/24 - z^6/720, sin z / z = 1 - z^2/6 + z^4/120 - z^6/5040
        let c = Complex64::new(1.0, 0.0) - arg2 / 2.0 + arg2 * arg2 / 24.0 - arg2 * arg2 * arg2 / 720.0;
        let s = Complex64::new(1.0, 0.0) - arg2 / 6.0 + arg2 * arg2 / 120.0
            - arg2 * arg2 * arg2 / 5040.0;
        return (c, s * x);
    }
    let root = lambda.sqrt();
    let z = root * x;
    (z.cos(), z.sin() / root)
}

/// Closed-form solution of the free system `-C'' = lambda C`, `C(0) = I`,
/// `C'(0) = -H_L`: returns `(C(x), C'(x))`.
pub fn free_solution(problem: &Problem, x: f64, lambda: Complex64) -> (ComplexMatrix, ComplexMatrix) {
    let n = problem.dimension();
    let (c, s) = cos_and_sinc(lambda, x);
    let hl = problem.h_left();
    let value = Mat::from_fn(n, |i, j| {
        let id = if i == j { c } else { Complex64::new(0.0, 0.0) };
        id - s * hl.get(i, j)
    });
    let derivative = Mat::from_fn(n, |i, j| {
        let id = if i == j { -lambda * s } else { Complex64::new(0.0, 0.0) };
        id - c * hl.get(i, j)
    });
    (value, derivative)
}

/// Integrates the matrix IVP with the default step rule for `|mu| = sqrt|lambda|`.
pub fn solve_matrix_ivp(problem: &Problem, lambda: Complex64) -> Result<IvpSolution> {
    ShootingGrid::for_mu_bound(problem, lambda.norm().sqrt()).solve(lambda)
}

/// `W(lambda) = Y'(pi) + H_R Y(pi)`.
pub fn boundary_matrix(problem: &Problem, lambda: Complex64) -> Result<ComplexMatrix> {
    ShootingGrid::for_mu_bound(problem, lambda.norm().sqrt()).boundary_matrix(lambda)
}

/// Characteristic determinant `det W(mu^2)`.
pub fn char_det(problem: &Problem, mu: Complex64) -> Result<Complex64> {
    ShootingGrid::for_mu_bound(problem, mu.norm()).char_det(mu)
}
