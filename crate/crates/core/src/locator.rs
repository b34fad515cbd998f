//! Eigenvalue location: argument-principle counts certify how many eigenvalues
//! a disk holds, a real-axis search finds them, and the rank deficiency of
//! `W(lambda)` gives each one's multiplicity.
//!
//! The real-axis search works on `g = det W / (d det W / d lambda)`, which has a
//! simple zero (slope `1/m`) at an eigenvalue of multiplicity `m`. Zeros of `g`
//! show up as sign changes from negative to positive; poles of `g` between
//! eigenvalues change sign the other way.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{build_model, predict_sqrt_eigenvalues};
use crate::error::{Error, Result};
use crate::ivp::ShootingGrid;
use crate::linalg::singular_values;
use crate::problem::Problem;
use crate::winding::winding_number;

/// Disk `|mu - n| <= radius` in the `mu = sqrt(lambda)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: u32,
    pub radius: f64,
}

pub const DEFAULT_RADIUS: f64 = 0.25;

impl Window {
    pub fn new(center: u32, radius: f64) -> Result<Self> {
        if center == 0 {
            return Err(Error::Precondition("window center must be a positive integer".into()));
        }
        if !(radius > 0.0 && radius <= DEFAULT_RADIUS) {
            return Err(Error::Precondition(format!("window radius must lie in (0, 1/4], got {radius}")));
        }
        Ok(Window { center, radius })
    }

    /// `B_{1/4}(n)`.
    pub fn standard(center: u32) -> Result<Self> {
        Self::new(center, DEFAULT_RADIUS)
    }

    fn lo(&self) -> f64 {
        self.center as f64 - self.radius
    }

    fn hi(&self) -> f64 {
        self.center as f64 + self.radius
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueRecord {
    pub lambda: f64,
    /// `sqrt(lambda)`; for negative `lambda` this holds `-sqrt(|lambda|)`.
    pub sqrt_lambda: f64,
    pub multiplicity: usize,
    pub window: Option<u32>,
    /// `|det W(lambda)|` at the refined root.
    pub residual_det: f64,
    /// `sigma_{m+1} / sigma_m` for the singular values of `W(lambda)`.
    pub sigma_gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityEstimate {
    pub multiplicity: usize,
    pub sigma_gap: f64,
    /// `sigma_gap < 10`: the numerical rank is not clearly separated.
    pub ill_separated: bool,
}

/// Tuning knobs for the locator. Defaults follow the documented configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct LocatorConfig {
    pub contour_samples: usize,
    pub scan_points: usize,
    pub rank_tol: f64,
    pub dedup_tol: f64,
    /// How many times the real-axis scan is refined (points doubled) when the
    /// located multiplicities undercount the winding number.
    pub max_refinements: usize,
    pub boundary_distance: f64,
}

impl Default for LocatorConfig {
    fn default() -> Self {
        LocatorConfig {
            contour_samples: 256,
            scan_points: 64,
            rank_tol: 1e-6,
            dedup_tol: 1e-8,
            max_refinements: 5,
            boundary_distance: 1e-6,
        }
    }
}

/// Result of a window search: the certified count and the located records.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowSearch {
    pub window: Window,
    pub count: i64,
    pub records: Vec<EigenvalueRecord>,
}

impl WindowSearch {
    pub fn multiplicity_sum(&self) -> usize {
        self.records.iter().map(|r| r.multiplicity).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Axis {
    /// coordinate is `mu`, `lambda = mu^2`
    Mu,
    /// coordinate is `lambda`
    Lambda,
}

impl Axis {
    fn lambda(self, x: f64) -> f64 {
        match self {
            Axis::Mu => x * x,
            Axis::Lambda => x,
        }
    }
}

/// Number of zeros of `det W(mu^2)` inside the window, with multiplicity.
pub fn count_zeros_in_disk(problem: &Problem, window: &Window, samples: usize) -> Result<i64> {
    if samples < 256 {
        return Err(Error::Precondition(format!("at least 256 contour samples required, got {samples}")));
    }
    let grid = ShootingGrid::for_mu_bound(problem, window.hi());
    count_on_grid(&grid, window, samples, LocatorConfig::default().boundary_distance)
}

fn count_on_grid(grid: &ShootingGrid<'_>, window: &Window, samples: usize, min_distance: f64) -> Result<i64> {
    let w = winding_number(
        |mu| grid.char_det(mu),
        Complex64::new(window.center as f64, 0.0),
        window.radius,
        samples,
        true,
        min_distance,
    )?;
    Ok(w.count)
}

/// Every eigenvalue whose square root lies in the window, seeded by the
/// first-order asymptotic predictions.
pub fn find_eigenvalues_in_window(problem: &Problem, window: &Window) -> Result<Vec<EigenvalueRecord>> {
    let model = build_model(problem, 1)?;
    let seeds = predict_sqrt_eigenvalues(&model, window.center);
    Ok(search_window(problem, window, &seeds, &LocatorConfig::default())?.records)
}

/// Window search with explicit seeds and configuration; also reports the
/// winding-number count.
pub fn search_window(
    problem: &Problem,
    window: &Window,
    seeds: &[f64],
    config: &LocatorConfig,
) -> Result<WindowSearch> {
    let grid = ShootingGrid::for_mu_bound(problem, window.hi());
    let count = count_on_grid(&grid, window, config.contour_samples, config.boundary_distance)?;
    let records = if count == 0 {
        Vec::new()
    } else {
        locate_in_interval(&grid, Axis::Mu, window.lo(), window.hi(), seeds, count, config, || {
            format!("window B_{}({})", window.radius, window.center)
        })?
    };
    Ok(WindowSearch {
        window: *window,
        count,
        records,
    })
}

#[allow(clippy::too_many_arguments)]
fn locate_in_interval(
    grid: &ShootingGrid<'_>,
    axis: Axis,
    lo: f64,
    hi: f64,
    seeds: &[f64],
    count: i64,
    config: &LocatorConfig,
    region: impl Fn() -> String,
) -> Result<Vec<EigenvalueRecord>> {
    let mut points = config.scan_points.max(8);
    let mut last = (0i64, Vec::new());
    for _ in 0..=config.max_refinements {
        let roots = real_roots(grid, axis, lo, hi, seeds, points, config.dedup_tol)?;
        let mut records = Vec::with_capacity(roots.len());
        for x in roots {
            let lambda = axis.lambda(x);
            let (est, det) = multiplicity_on_grid(grid, lambda, config.rank_tol)?;
            if est.multiplicity == 0 {
                continue;
            }
            records.push(make_record(lambda, est, det));
        }
        let located: i64 = records.iter().map(|r| r.multiplicity as i64).sum();
        if located == count {
            return Ok(records);
        }
        last = (located, records);
        points *= 2;
    }
    Err(Error::CountMismatch {
        region: region(),
        winding: count,
        located: last.0,
        detail: format!(
            "roots {:?} after {} scan points",
            last.1.iter().map(|r| (r.lambda, r.multiplicity)).collect::<Vec<_>>(),
            points / 2
        ),
    })
}

fn make_record(lambda: f64, est: MultiplicityEstimate, det: f64) -> EigenvalueRecord {
    let sqrt_lambda = if lambda >= 0.0 {
        lambda.sqrt()
    } else {
        -(-lambda).sqrt()
    };
    let nearest = sqrt_lambda.round();
    let window = if lambda > 0.0 && nearest >= 1.0 && (sqrt_lambda - nearest).abs() <= DEFAULT_RADIUS {
        Some(nearest as u32)
    } else {
        None
    };
    EigenvalueRecord {
        lambda,
        sqrt_lambda,
        multiplicity: est.multiplicity,
        window,
        residual_det: det,
        sigma_gap: est.sigma_gap,
    }
}

fn newton_ratio_at(grid: &ShootingGrid<'_>, lambda: f64) -> Result<f64> {
    Ok(grid.boundary_with_derivative(lambda)?.newton_ratio())
}

/// Zeros of `g` on `[lo, hi]` in the given coordinate.
fn real_roots(
    grid: &ShootingGrid<'_>,
    axis: Axis,
    lo: f64,
    hi: f64,
    seeds: &[f64],
    points: usize,
    dedup_tol: f64,
) -> Result<Vec<f64>> {
    let mut xs: Vec<f64> = (0..=points)
        .map(|i| lo + (hi - lo) * i as f64 / points as f64)
        .collect();
    xs.extend(seeds.iter().copied().filter(|s| *s > lo && *s < hi));
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let gs = xs
        .iter()
        .map(|&x| newton_ratio_at(grid, axis.lambda(x)))
        .collect::<Result<Vec<f64>>>()?;
    let g = |x: f64| newton_ratio_at(grid, axis.lambda(x));

    let mut roots: Vec<f64> = Vec::new();
    for i in 0..xs.len() {
        if gs[i] == 0.0 {
            roots.push(xs[i]);
            continue;
        }
        if i + 1 == xs.len() {
            break;
        }
        let (x0, x1, g0, g1) = (xs[i], xs[i + 1], gs[i], gs[i + 1]);
        if g0 < 0.0 && g1 > 0.0 {
            let x = brent(&g, x0, x1, g0, g1)?;
            let gx = g(x)?;
            let lambda = axis.lambda(x);
            // a bracket around a pole of g converges to the pole, where |g| is huge
            if gx.abs() <= 1e-6 * lambda.abs().max(1.0) {
                roots.push(x);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < dedup_tol);
    Ok(roots)
}

/// Brent's method on a bracket with `f(a) f(b) < 0`.
fn brent(f: &impl Fn(f64) -> Result<f64>, a: f64, b: f64, fa: f64, fb: f64) -> Result<f64> {
    let (mut a, mut b, mut c) = (a, b, b);
    let (mut fa, mut fb) = (fa, fb);
    let mut fc = fb;
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..200 {
        if (fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 1e-300;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(xm) };
        fb = f(b)?;
    }
    Ok(b)
}

fn multiplicity_on_grid(
    grid: &ShootingGrid<'_>,
    lambda: f64,
    rank_tol: f64,
) -> Result<(MultiplicityEstimate, f64)> {
    let w = grid.boundary_matrix(lambda)?;
    let det = w.determinant().abs();
    let sv = singular_values(&w);
    let n = sv.len();
    let reference = sv[n - 1].max(1.0 + lambda.abs().sqrt());
    let threshold = rank_tol * reference;
    let m = sv.iter().take_while(|&&s| s < threshold).count();
    let floor = f64::MIN_POSITIVE;
    let gap = if m == 0 {
        sv[0] / threshold.max(floor)
    } else if m < n {
        sv[m] / sv[m - 1].max(floor)
    } else {
        reference / sv[n - 1].max(floor)
    };
    let gap = gap.min(1e300);
    Ok((
        MultiplicityEstimate {
            multiplicity: m,
            sigma_gap: gap,
            ill_separated: gap < 10.0,
        },
        det,
    ))
}

/// Numerical rank deficiency of `W(lambda)`: the number of singular values
/// below `rank_tol * max(sigma_max, 1 + sqrt|lambda|)`. The floor on the
/// reference scale keeps `W = 0` (every channel degenerate) at full multiplicity.
pub fn multiplicity(problem: &Problem, lambda: f64, rank_tol: f64) -> Result<MultiplicityEstimate> {
    let grid = ShootingGrid::for_mu_bound(problem, lambda.abs().sqrt());
    Ok(multiplicity_on_grid(&grid, lambda, rank_tol)?.0)
}

/// All eigenvalues in `[lower bound, lambda_max]`, ascending with
/// multiplicities.
pub fn scan_low_spectrum(problem: &Problem, lambda_max: f64) -> Result<Vec<EigenvalueRecord>> {
    scan_low_spectrum_with(problem, lambda_max, &LocatorConfig::default())
}

/// The real `lambda` axis is cut at `(k + 1/2)^2` and each piece `[a, b]` is the
/// diameter of a counting disk in the `lambda` plane. Adjacent disks touch only
/// at the cut points, so with all eigenvalues real the counts add up.
pub fn scan_low_spectrum_with(
    problem: &Problem,
    lambda_max: f64,
    config: &LocatorConfig,
) -> Result<Vec<EigenvalueRecord>> {
    if !(lambda_max >= 1.0) {
        return Err(Error::Precondition(format!("lambda_max must be >= 1, got {lambda_max}")));
    }
    let lower = problem.spectrum_lower_bound();
    if !(lower > -1e8) {
        return Err(Error::Precondition(format!(
            "spectrum lower bound {lower:e} is out of range; potential or boundary data too large"
        )));
    }
    let mut cuts = vec![lower];
    for k in 0.. {
        let c = (k as f64 + 0.5).powi(2);
        if c >= lambda_max {
            break;
        }
        if c > lower {
            cuts.push(c);
        }
    }
    cuts.push(lambda_max + 0.5);

    let mut out = Vec::new();
    let mut a = cuts[0];
    let mut idx = 1;
    let mut nudges = 0;
    while idx < cuts.len() {
        let b = cuts[idx];
        match interval_records(problem, a, b, config) {
            Ok(recs) => {
                out.extend(recs);
                a = b;
                idx += 1;
                nudges = 0;
            }
            Err(Error::BoundaryTooClose { .. }) if nudges < 8 => {
                nudges += 1;
                let room = if idx + 1 < cuts.len() {
                    cuts[idx + 1] - b
                } else {
                    b - a
                };
                cuts[idx] = b + 0.05 * room;
            }
            Err(e) => return Err(e),
        }
    }
    out.retain(|r| r.lambda <= lambda_max);
    out.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
    Ok(out)
}

fn interval_records(
    problem: &Problem,
    a: f64,
    b: f64,
    config: &LocatorConfig,
) -> Result<Vec<EigenvalueRecord>> {
    let center = 0.5 * (a + b);
    let radius = 0.5 * (b - a);
    let grid = ShootingGrid::for_mu_bound(problem, (center.abs() + radius).sqrt());
    let w = winding_number(
        |lambda| grid.det_at_lambda(lambda),
        Complex64::new(center, 0.0),
        radius,
        config.contour_samples,
        true,
        config.boundary_distance,
    )?;
    if w.count == 0 {
        return Ok(Vec::new());
    }
    locate_in_interval(&grid, Axis::Lambda, a, b, &[], w.count, config, || {
        format!("lambda interval [{a}, {b}]")
    })
}
