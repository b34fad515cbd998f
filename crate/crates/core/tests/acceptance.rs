//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use vsl_core::asymptotics::{build_model, contour_norm, modulus_identities_check, transcendental_root, ContourSpec};
use vsl_core::locator::{count_zeros_in_disk, find_eigenvalues_in_window, scan_low_spectrum, Window};
use vsl_core::verification::{
    cluster_and_match, factorization_deviation, fit_decay, oracle_decoupled_spectrum, scalar_reference_alpha,
};
use vsl_core::Problem;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn free_exactness() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [1usize, 2, 4] {
        let recs = scan_low_spectrum(&Problem::free(n).unwrap(), 30.0).map_err(|e| format!("N={n}: {e}"))?;
        let want = [0.0, 1.0, 4.0, 9.0, 16.0, 25.0];
        if recs.len() != want.len() {
            return Err(format!("N={n}: got {:?}", recs.iter().map(|r| r.lambda).collect::<Vec<_>>()));
        }
        for (r, w) in recs.iter().zip(want) {
            if r.multiplicity != n {
                return Err(format!("N={n}: lambda {} has multiplicity {}", r.lambda, r.multiplicity));
            }
            worst = worst.max((r.lambda - w).abs());
        }
    }
    let t = start.elapsed();
    check(worst <= 1e-8 && within(t, 10.0), format!("max error {worst:.2e}, {:.2}s (limit 10s)", t.as_secs_f64()))
}

fn decoupling_oracle() -> Outcome {
    let start = Instant::now();
    let p = common::decoupled();
    let recs = scan_low_spectrum(&p, 120.0).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let got: Vec<f64> = recs
        .iter()
        .flat_map(|r| std::iter::repeat_n(r.lambda, r.multiplicity))
        .collect();
    let want = oracle_decoupled_spectrum(&p, 120.0).map_err(|e| e.to_string())?;
    if got.len() != want.len() {
        return Err(format!("{} eigenvalues vs {} from the oracle", got.len(), want.len()));
    }
    let worst = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check(
        worst <= 1e-7 && within(t, 30.0),
        format!("{} eigenvalues, max error {worst:.2e}, {:.2}s (limit 30s)", got.len(), t.as_secs_f64()),
    )
}

fn first_order_law() -> Outcome {
    let start = Instant::now();
    let p = common::coupled_constant();
    let model = build_model(&p, 1).unwrap();
    let clusters = cluster_and_match(&p, &model, 10, 40).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let mut pts = Vec::new();
    for c in &clusters {
        let m = c.max_abs_mismatch().ok_or(format!("window {} incomplete: {:?}", c.n, c.residuals))?;
        pts.push((c.n as f64, m));
    }
    let last = pts.last().unwrap().1;
    let fit = fit_decay(&pts).map_err(|e| e.to_string())?;
    check(
        last <= 5e-2 && fit.exponent >= 1.5 && within(t, 60.0),
        format!(
            "mismatch at n=40 {last:.3e}, decay exponent {:.3}, {:.2}s (limit 60s)",
            fit.exponent,
            t.as_secs_f64()
        ),
    )
}

fn window_completeness() -> Outcome {
    let problems: Vec<(&str, Problem)> = vec![
        ("free N=1", Problem::free(1).unwrap()),
        ("free N=2", Problem::free(2).unwrap()),
        ("free N=4", Problem::free(4).unwrap()),
        ("decoupled", common::decoupled()),
        ("coupled constant", common::coupled_constant()),
        ("generic", common::generic()),
    ];
    let mut failures = Vec::new();
    for (name, p) in &problems {
        let dim = p.dimension();
        for n in 5..=40u32 {
            let w = Window::standard(n).unwrap();
            let count = count_zeros_in_disk(p, &w, 256);
            let located = find_eigenvalues_in_window(p, &w).map(|r| r.iter().map(|x| x.multiplicity).sum::<usize>());
            match (count, located) {
                (Ok(c), Ok(m)) if c == dim as i64 && m == dim => {}
                (c, m) => failures.push(format!("{name} n={n}: count {c:?}, located {m:?}")),
            }
        }
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} problems x 36 windows complete", problems.len())
        } else {
            failures.join("; ")
        },
    )
}

fn contour_decay() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (name, p) in [("P=2I", common::two_identity()), ("generic", common::generic())] {
        let model = build_model(&p, 1).unwrap();
        let mut pts = Vec::new();
        for n in 6..=30u32 {
            let mut worst: f64 = 0.0;
            for &a in &model.alphas {
                let center = transcendental_root(a, n).map_err(|e| e.to_string())?.root;
                let spec = ContourSpec::new(Complex64::new(center, 0.0), 1.0, n).unwrap();
                worst = worst.max(contour_norm(&p, &model, &spec).map_err(|e| e.to_string())?);
            }
            pts.push((n as f64, worst));
        }
        let fit = fit_decay(&pts).map_err(|e| e.to_string())?;
        let slope = -fit.exponent;
        let mut scaled: Vec<f64> = pts.iter().map(|(n, v)| n * v).collect();
        scaled.sort_by(f64::total_cmp);
        let median = scaled[scaled.len() / 2];
        let max = *scaled.last().unwrap();
        let good = (-1.4..=-0.6).contains(&slope) && max <= 3.0 * median;
        ok &= good;
        details.push(format!("{name}: slope {slope:.3}, max n*norm / median {:.3}", max / median));
    }
    check(ok, details.join("; "))
}

fn factorization() -> Outcome {
    let p = common::two_identity();
    let mut pts = Vec::new();
    for n in 5..=40u32 {
        let d = factorization_deviation(&p, Complex64::new(n as f64 + 0.25, 0.0)).map_err(|e| e.to_string())?;
        pts.push((n as f64, d));
    }
    let fit = fit_decay(&pts).map_err(|e| e.to_string())?;
    check(
        (0.7..=1.3).contains(&fit.exponent),
        format!("P=2I: deviation decays like n^-{:.3} (r^2 {:.4})", fit.exponent, fit.r_squared),
    )
}

/// Root of `mu tan(mu pi) = alpha pi` near `n` by bisection in `e = mu - n`.
fn bisection_root(alpha: f64, n: u32) -> f64 {
    let nf = n as f64;
    let f = |e: f64| (nf + e) * (PI * e).tan() - alpha * PI;
    let (mut lo, mut hi) = if alpha > 0.0 { (0.0, 0.5 - 1e-12) } else { (-0.5 + 1e-12, 0.0) };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f(hi) > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    nf + 0.5 * (lo + hi)
}

fn transcendental_series() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for alpha in [-1.0, 0.5, 1.0] {
        let kappa = |n: u32| transcendental_root(alpha, n).map(|r| r.kappa_estimate).map_err(|e| e.to_string());
        let (k20, k40, k80) = (kappa(20)?, kappa(40)?, kappa(80)?);
        let limit = (4.0 * k80 - k40) / 3.0;
        let oracle = -alpha * alpha - PI * PI * alpha.powi(3) / 3.0;
        let root_gap = (transcendental_root(alpha, 80).unwrap().root - bisection_root(alpha, 80)).abs();
        let converging = (k80 - k40).abs() < (k40 - k20).abs();
        let good = (limit - oracle).abs() <= 1e-3 && root_gap <= 1e-12 && converging;
        ok &= good;
        details.push(format!(
            "alpha={alpha}: limit {limit:.6} vs {oracle:.6} (raw n=80 {k80:.6}, root vs bisection {root_gap:.1e})"
        ));
    }
    check(ok, details.join("; "))
}

fn scalar_reference() -> Outcome {
    let p = common::scalar_robin();
    let model = build_model(&p, 1).unwrap();
    let a0 = scalar_reference_alpha(1.0, 1.0, 0.0);
    let clusters = cluster_and_match(&p, &model, 40, 40).map_err(|e| e.to_string())?;
    let c = &clusters[0];
    if c.residuals.len() != 1 {
        return Err(format!("window 40 holds {:?}", c.residuals));
    }
    let mismatch = (c.residuals[0] - a0).abs();
    check(
        mismatch <= 1e-2 && (model.alphas[0] - a0).abs() < 1e-12,
        format!("residual {:.6} vs 2/pi {:.6}, mismatch {mismatch:.2e}", c.residuals[0], a0),
    )
}

fn identities() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        for j in 0..20 {
            let mu = Complex64::new(10.0 * i as f64 / 19.0, -1.0 + 2.0 * j as f64 / 19.0);
            worst = worst.max(modulus_identities_check(mu));
        }
    }
    check(worst <= 1e-12, format!("max discrepancy {worst:.2e}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("free-problem exactness", free_exactness),
        ("decoupling oracle equivalence", decoupling_oracle),
        ("first-order eigenvalue law", first_order_law),
        ("window completeness", window_completeness),
        ("contour norm decay", contour_decay),
        ("determinant factorization", factorization),
        ("transcendental root series", transcendental_series),
        ("scalar reference", scalar_reference),
        ("modulus identities", identities),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {}: PASS {name}: {d} [{secs:.2}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {d} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
