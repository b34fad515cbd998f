//! Report structure and its JSON / CSV encodings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use vsl_core::asymptotics::TransRootResult;
use vsl_core::locator::EigenvalueRecord;
use vsl_core::verification::{ClusterReport, DecayFit};

use crate::config::{Command, RawConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub quantity: String,
    pub fit: DecayFit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoucheCount {
    pub n: u32,
    pub count: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub n: u32,
    pub first_order: Vec<f64>,
    pub refined: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourRow {
    pub n: u32,
    pub norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub re: f64,
    pub im: f64,
    pub discrepancy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub command: Command,
    pub config: RawConfig,
    pub alphas: Vec<f64>,
    pub eigenvalues: Vec<EigenvalueRecord>,
    pub clusters: Vec<ClusterReport>,
    pub decay_fits: Vec<NamedFit>,
    pub rouche: Vec<RoucheCount>,
    pub predictions: Vec<Prediction>,
    pub contour_norms: Vec<ContourRow>,
    pub transcendental_roots: Vec<TransRootResult>,
    pub identities: Vec<IdentityRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl VerificationReport {
    pub fn new(command: Command, config: RawConfig) -> Self {
        VerificationReport {
            command,
            config,
            alphas: Vec::new(),
            eigenvalues: Vec::new(),
            clusters: Vec::new(),
            decay_fits: Vec::new(),
            rouche: Vec::new(),
            predictions: Vec::new(),
            contour_norms: Vec::new(),
            transcendental_roots: Vec::new(),
            identities: Vec::new(),
            timings: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The command's main table. Reals carry 17 significant digits, so they
    /// parse back to the same bits as the JSON values.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self.command {
            Command::Spectrum => {
                out.push_str("lambda,sqrt_lambda,multiplicity,window,sigma_gap,residual_det\n");
                for r in &self.eigenvalues {
                    let window = r.window.map(|w| w.to_string()).unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        real(r.lambda),
                        real(r.sqrt_lambda),
                        r.multiplicity,
                        window,
                        real(r.sigma_gap),
                        real(r.residual_det)
                    );
                }
            }
            Command::Predict => {
                out.push_str("n,k,first_order,refined\n");
                for p in &self.predictions {
                    for (k, (a, b)) in p.first_order.iter().zip(&p.refined).enumerate() {
                        let _ = writeln!(out, "{},{},{},{}", p.n, k, real(*a), real(*b));
                    }
                }
            }
            Command::Verify => {
                out.push_str("n,rouche_count,multiplicity_sum,k,residual,matched_alpha,mismatch\n");
                for c in &self.clusters {
                    for (k, r) in c.residuals.iter().enumerate() {
                        let alpha = c.matched_alphas.get(k).map(|v| real(*v)).unwrap_or_default();
                        let mismatch = c.mismatch.get(k).map(|v| real(*v)).unwrap_or_default();
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{},{}",
                            c.n,
                            c.rouche_count,
                            c.multiplicity_sum,
                            k,
                            real(*r),
                            alpha,
                            mismatch
                        );
                    }
                }
            }
            Command::Contour => {
                out.push_str("n,norm\n");
                for r in &self.contour_norms {
                    let _ = writeln!(out, "{},{}", r.n, real(r.norm));
                }
            }
            Command::Transroot => {
                out.push_str("alpha,n,root,series_seed,kappa_estimate,iterations\n");
                for r in &self.transcendental_roots {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        real(r.alpha),
                        r.n,
                        real(r.root),
                        real(r.series_seed),
                        real(r.kappa_estimate),
                        r.iterations
                    );
                }
            }
            Command::Identities => {
                out.push_str("re,im,discrepancy\n");
                for r in &self.identities {
                    let _ = writeln!(out, "{},{},{}", real(r.re), real(r.im), real(r.discrepancy));
                }
            }
        }
        out
    }
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}
