//! Scalar functions of the form `sum c * x^p * cos(k x)` and `sum c * x^p * sin(k x)`.
//!
//! The class is closed under addition, multiplication, differentiation and
//! integration, so every integral the asymptotic model needs (including the
//! products `P(t) K(t,t)` and `P(t)^2`) is evaluated in closed form.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wave {
    Cos,
    Sin,
}

/// One term `coef * x^power * wave(freq * x)` with `freq >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub power: u32,
    pub freq: f64,
    pub wave: Wave,
    pub coef: f64,
}

impl Term {
    fn key_cmp(&self, other: &Term) -> Ordering {
        self.power
            .cmp(&other.power)
            .then(self.freq.total_cmp(&other.freq))
            .then(self.wave.cmp(&other.wave))
    }

    fn same_key(&self, other: &Term) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }

    fn eval(&self, x: f64) -> f64 {
        let poly = if self.power == 0 {
            1.0
        } else {
            x.powi(self.power as i32)
        };
        let wave = match self.wave {
            Wave::Cos if self.freq == 0.0 => 1.0,
            Wave::Cos => (self.freq * x).cos(),
            Wave::Sin => (self.freq * x).sin(),
        };
        self.coef * poly * wave
    }
}

/// Polynomial-times-trigonometric scalar function, kept in canonical form:
/// terms sorted, like terms merged, zero coefficients and `sin(0 x)` dropped.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    terms: Vec<Term>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms(vec![Term {
            power: 0,
            freq: 0.0,
            wave: Wave::Cos,
            coef: c,
        }])
    }

    /// `sum_i poly[i] x^i + sum c cos(k x) + sum c sin(k x)`.
    pub fn from_parts(poly: &[f64], cos: &[(f64, f64)], sin: &[(f64, f64)]) -> Self {
        let mut terms = Vec::with_capacity(poly.len() + cos.len() + sin.len());
        for (p, &c) in poly.iter().enumerate() {
            terms.push(Term {
                power: p as u32,
                freq: 0.0,
                wave: Wave::Cos,
                coef: c,
            });
        }
        for &(k, c) in cos {
            terms.push(Term {
                power: 0,
                freq: k,
                wave: Wave::Cos,
                coef: c,
            });
        }
        for &(k, c) in sin {
            terms.push(Term {
                power: 0,
                freq: k,
                wave: Wave::Sin,
                coef: c,
            });
        }
        Self::from_terms(terms)
    }

    pub fn from_terms(terms: Vec<Term>) -> Self {
        let mut out: Vec<Term> = terms
            .into_iter()
            .filter_map(|mut t| {
                if t.freq < 0.0 {
                    t.freq = -t.freq;
                    if t.wave == Wave::Sin {
                        t.coef = -t.coef;
                    }
                }
                if t.freq == 0.0 && t.wave == Wave::Sin {
                    return None;
                }
                // -0.0 and 0.0 must share a key
                if t.freq == 0.0 {
                    t.freq = 0.0;
                }
                Some(t)
            })
            .collect();
        out.sort_by(|a, b| a.key_cmp(b));
        let mut merged: Vec<Term> = Vec::with_capacity(out.len());
        for t in out {
            match merged.last_mut() {
                Some(last) if last.same_key(&t) => last.coef += t.coef,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coef != 0.0);
        TrigPoly { terms: merged }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| Term {
                    coef: t.coef * s,
                    ..*t
                })
                .collect(),
        )
    }

    pub fn add(&self, other: &TrigPoly) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::from_terms(terms)
    }

    pub fn sub(&self, other: &TrigPoly) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Pointwise product via the product-to-sum identities.
    pub fn mul(&self, other: &TrigPoly) -> Self {
        let mut terms = Vec::with_capacity(2 * self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let power = a.power + b.power;
                let c = 0.5 * a.coef * b.coef;
                let (fa, fb) = (a.freq, b.freq);
                let mut push = |freq: f64, wave: Wave, coef: f64| {
                    terms.push(Term {
                        power,
                        freq,
                        wave,
                        coef,
                    })
                };
                match (a.wave, b.wave) {
                    (Wave::Cos, Wave::Cos) => {
                        push(fa - fb, Wave::Cos, c);
                        push(fa + fb, Wave::Cos, c);
                    }
                    (Wave::Sin, Wave::Sin) => {
                        push(fa - fb, Wave::Cos, c);
                        push(fa + fb, Wave::Cos, -c);
                    }
                    (Wave::Sin, Wave::Cos) => {
                        push(fa + fb, Wave::Sin, c);
                        push(fa - fb, Wave::Sin, c);
                    }
                    (Wave::Cos, Wave::Sin) => {
                        push(fb + fa, Wave::Sin, c);
                        push(fb - fa, Wave::Sin, c);
                    }
                }
            }
        }
        Self::from_terms(terms)
    }

    pub fn derivative(&self) -> Self {
        let mut terms = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.power > 0 {
                terms.push(Term {
                    power: t.power - 1,
                    coef: t.coef * t.power as f64,
                    ..*t
                });
            }
            if t.freq != 0.0 {
                let (wave, sign) = match t.wave {
                    Wave::Cos => (Wave::Sin, -1.0),
                    Wave::Sin => (Wave::Cos, 1.0),
                };
                terms.push(Term {
                    power: t.power,
                    freq: t.freq,
                    wave,
                    coef: sign * t.freq * t.coef,
                });
            }
        }
        Self::from_terms(terms)
    }

    /// An antiderivative (integration constant unspecified; use [`TrigPoly::integral`]
    /// or [`TrigPoly::primitive_from`] for definite values).
    pub fn antiderivative(&self) -> Self {
        let mut terms = Vec::new();
        for t in &self.terms {
            antiderivative_term(t.power, t.freq, t.wave, t.coef, &mut terms);
        }
        Self::from_terms(terms)
    }

    /// `x -> int_a^x f(t) dt` as a member of the class.
    pub fn primitive_from(&self, a: f64) -> Self {
        let f = self.antiderivative();
        let c = f.eval(a);
        f.add(&TrigPoly::constant(-c))
    }

    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let f = self.antiderivative();
        f.eval(b) - f.eval(a)
    }

    /// Upper bound of `|f(x)|` on `[0, x_max]` from the coefficients.
    pub fn abs_bound(&self, x_max: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef.abs() * x_max.abs().powi(t.power as i32))
            .sum()
    }

    /// Largest coefficient magnitude; used for approximate equality checks.
    pub fn max_coef(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, t| m.max(t.coef.abs()))
    }

    /// Coefficient-wise distance between two canonical forms.
    pub fn coef_distance(&self, other: &TrigPoly) -> f64 {
        self.sub(other).max_coef()
    }
}

/// Integration by parts:
/// `int x^p cos(kx) = x^p sin(kx)/k - (p/k) int x^(p-1) sin(kx)`,
/// `int x^p sin(kx) = -x^p cos(kx)/k + (p/k) int x^(p-1) cos(kx)`.
fn antiderivative_term(power: u32, freq: f64, wave: Wave, coef: f64, out: &mut Vec<Term>) {
    if freq == 0.0 {
        // only Cos survives canonicalization at zero frequency
        out.push(Term {
            power: power + 1,
            freq: 0.0,
            wave: Wave::Cos,
            coef: coef / (power as f64 + 1.0),
        });
        return;
    }
    let (head_wave, head_sign, tail_wave, tail_sign) = match wave {
        Wave::Cos => (Wave::Sin, 1.0, Wave::Sin, -1.0),
        Wave::Sin => (Wave::Cos, -1.0, Wave::Cos, 1.0),
    };
    out.push(Term {
        power,
        freq,
        wave: head_wave,
        coef: head_sign * coef / freq,
    });
    if power > 0 {
        antiderivative_term(
            power - 1,
            freq,
            tail_wave,
            tail_sign * coef * power as f64 / freq,
            out,
        );
    }
}
