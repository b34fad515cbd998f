use std::io::Write;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use thiserror::Error;
use vsl_core::asymptotics::{
    build_model, contour_norm, modulus_identities_check, predict_sqrt_eigenvalues, predict_sqrt_eigenvalues_refined,
    transcendental_root_with_tol, ContourSpec,
};
use vsl_core::locator::{scan_low_spectrum_with, LocatorConfig};
use vsl_core::verification::{cluster_and_match_with, fit_decay};

use crate::config::{Command, ConfigError, Format, RunConfig};
use crate::report::{ContourRow, IdentityRow, NamedFit, Prediction, RoucheCount, Timings, VerificationReport};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Numerical(vsl_core::Error),
    #[error("invalid request: {0}")]
    Request(vsl_core::Error),
    #[error("cannot write report to {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// 1 for configuration problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Request(_) | RunError::Io { .. } => 1,
            RunError::Numerical(_) => 2,
        }
    }
}

impl From<vsl_core::Error> for RunError {
    fn from(e: vsl_core::Error) -> Self {
        use vsl_core::Error as E;
        match e {
            E::Domain(_) | E::InvalidProblem(_) | E::Precondition(_) => RunError::Request(e),
            _ => RunError::Numerical(e),
        }
    }
}

/// Grid for the `identities` command: 20 x 20 points over `[0, 10] x [-1, 1]`.
const IDENTITY_GRID: usize = 20;

pub fn run(config: &RunConfig) -> Result<VerificationReport, RunError> {
    let start = Instant::now();
    let mut echo = config.raw.clone();
    // the destination is not part of the computation
    echo.output_path = None;
    let mut report = VerificationReport::new(config.command, echo);
    let problem = &config.problem;
    let locator = LocatorConfig {
        rank_tol: config.tolerances.rank_tol,
        ..LocatorConfig::default()
    };
    let model = build_model(problem, config.order)?;
    report.alphas = model.alphas.clone();
    let range = || {
        let (a, b) = config.n_range.expect("validated");
        a..=b
    };

    match config.command {
        Command::Spectrum => {
            let lambda_max = config.lambda_max.expect("validated");
            report.eigenvalues = scan_low_spectrum_with(problem, lambda_max, &locator)?;
        }
        Command::Predict => {
            report.predictions = range()
                .map(|n| Prediction {
                    n,
                    first_order: predict_sqrt_eigenvalues(&model, n),
                    refined: predict_sqrt_eigenvalues_refined(&model, n),
                })
                .collect();
        }
        Command::Verify => {
            let (lo, hi) = config.n_range.expect("validated");
            let clusters = cluster_and_match_with(problem, &model, lo, hi, &locator)?;
            report.rouche = clusters
                .iter()
                .map(|c| RoucheCount {
                    n: c.n,
                    count: c.rouche_count,
                })
                .collect();
            report.eigenvalues = clusters.iter().flat_map(|c| c.records.iter().cloned()).collect();
            let points: Vec<(f64, f64)> = clusters
                .iter()
                .filter_map(|c| c.max_abs_mismatch().map(|m| (c.n as f64, m)))
                .filter(|p| p.1 > 0.0)
                .collect();
            if let Ok(fit) = fit_decay(&points) {
                report.decay_fits.push(NamedFit {
                    quantity: "max_abs_mismatch".into(),
                    fit,
                });
            }
            report.clusters = clusters;
        }
        Command::Contour => {
            for n in range() {
                let mut worst: f64 = 0.0;
                for &a in &model.alphas {
                    // the root of rho_k near n, or the first-order seed where Newton is not set up
                    let center = transcendental_root_with_tol(a, n, config.tolerances.newton_tol)
                        .map(|r| r.root)
                        .unwrap_or(n as f64 + a / n as f64);
                    let spec = ContourSpec::new(Complex64::new(center, 0.0), config.delta, n)?;
                    worst = worst.max(contour_norm(problem, &model, &spec)?);
                }
                report.contour_norms.push(ContourRow { n, norm: worst });
            }
            let points: Vec<(f64, f64)> = report
                .contour_norms
                .iter()
                .map(|r| (r.n as f64, r.norm))
                .filter(|p| p.1 > 0.0)
                .collect();
            if let Ok(fit) = fit_decay(&points) {
                report.decay_fits.push(NamedFit {
                    quantity: "contour_norm".into(),
                    fit,
                });
            }
        }
        Command::Transroot => {
            let alphas = match config.alpha {
                Some(a) => vec![a],
                None => {
                    let mut v = model.alphas.clone();
                    v.dedup();
                    v
                }
            };
            for a in alphas {
                for n in range() {
                    report
                        .transcendental_roots
                        .push(transcendental_root_with_tol(a, n, config.tolerances.newton_tol)?);
                }
            }
        }
        Command::Identities => {
            let m = IDENTITY_GRID - 1;
            for i in 0..IDENTITY_GRID {
                for j in 0..IDENTITY_GRID {
                    let mu = Complex64::new(10.0 * i as f64 / m as f64, -1.0 + 2.0 * j as f64 / m as f64);
                    report.identities.push(IdentityRow {
                        re: mu.re,
                        im: mu.im,
                        discrepancy: modulus_identities_check(mu),
                    });
                }
            }
        }
    }
    report.timings = Some(Timings {
        total_seconds: start.elapsed().as_secs_f64(),
    });
    Ok(report)
}

pub fn render(report: &VerificationReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    }
}

/// Writes through a temporary file in the target directory and renames it into
/// place, so readers never see a partial report.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), RunError> {
    let io = |source| RunError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
