//! Argument-principle zero counting on circles.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest phase increment accepted between neighbouring samples before the
/// arc is bisected.
const MAX_PHASE_STEP: f64 = 0.5 * PI;
const MAX_DEPTH: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Winding {
    pub count: i64,
    pub evaluations: usize,
    /// Smallest `|f|` seen on the contour.
    pub min_modulus: f64,
    /// Smallest estimate `|f| / |f'|` of the distance from the contour to a zero.
    pub min_distance: f64,
}

/// Winding number of `f` around 0 along `|z - center| = radius`.
///
/// With `conjugate_symmetric` (requires a real center and `f(conj z) = conj f(z)`)
/// only the upper half circle is traversed and the phase change is doubled.
/// Arcs whose phase increment exceeds `pi/2` are bisected, down to depth 30.
/// A contour passing closer than `min_distance` to a zero is rejected.
pub fn winding_number<F>(
    mut f: F,
    center: Complex64,
    radius: f64,
    samples: usize,
    conjugate_symmetric: bool,
    min_distance: f64,
) -> Result<Winding>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let point = |theta: f64| center + Complex64::from_polar(radius, theta);
    let (span, arcs) = if conjugate_symmetric {
        (PI, (samples / 2).max(2))
    } else {
        (2.0 * PI, samples.max(4))
    };
    let mut state = Tracker {
        total: 0.0,
        evaluations: 0,
        min_modulus: f64::INFINITY,
        min_distance: f64::INFINITY,
    };
    let mut eval = |theta: f64, state: &mut Tracker| -> Result<Complex64> {
        let v = f(point(theta))?;
        state.evaluations += 1;
        state.min_modulus = state.min_modulus.min(v.norm());
        if v.norm() == 0.0 {
            return Err(Error::BoundaryTooClose {
                distance: 0.0,
                location: format!("{}", point(theta)),
            });
        }
        Ok(v)
    };
    let first = eval(0.0, &mut state)?;
    let mut prev = (0.0, first);
    for k in 1..=arcs {
        let theta = span * k as f64 / arcs as f64;
        let value = if !conjugate_symmetric && k == arcs {
            first
        } else {
            eval(theta, &mut state)?
        };
        accumulate(&mut eval, &point, prev, (theta, value), 0, &mut state)?;
        prev = (theta, value);
    }
    if state.min_distance < min_distance {
        return Err(Error::BoundaryTooClose {
            distance: state.min_distance,
            location: format!("circle |z - {center}| = {radius}"),
        });
    }
    let turns = if conjugate_symmetric {
        state.total / PI
    } else {
        state.total / (2.0 * PI)
    };
    let count = turns.round();
    if (turns - count).abs() > 0.1 {
        return Err(Error::PhaseJumpUnresolved {
            depth: MAX_DEPTH,
            location: format!("circle |z - {center}| = {radius} (turns {turns})"),
        });
    }
    Ok(Winding {
        count: count as i64,
        evaluations: state.evaluations,
        min_modulus: state.min_modulus,
        min_distance: state.min_distance,
    })
}

struct Tracker {
    total: f64,
    evaluations: usize,
    min_modulus: f64,
    min_distance: f64,
}

fn accumulate<E, P>(
    eval: &mut E,
    point: &P,
    a: (f64, Complex64),
    b: (f64, Complex64),
    depth: usize,
    state: &mut Tracker,
) -> Result<()>
where
    E: FnMut(f64, &mut Tracker) -> Result<Complex64>,
    P: Fn(f64) -> Complex64,
{
    let step = (b.1 / a.1).arg();
    if step.abs() <= MAX_PHASE_STEP {
        state.total += step;
        let chord = (point(b.0) - point(a.0)).norm();
        let slope = (b.1 - a.1).norm() / chord;
        if slope > 0.0 {
            let d = a.1.norm().min(b.1.norm()) / slope;
            state.min_distance = state.min_distance.min(d);
        }
        return Ok(());
    }
    if depth >= MAX_DEPTH {
        return Err(Error::PhaseJumpUnresolved {
            depth,
            location: format!("{}", point(a.0)),
        });
    }
    let mid = 0.5 * (a.0 + b.0);
    let vm = eval(mid, state)?;
    accumulate(eval, point, a, (mid, vm), depth + 1, state)?;
    accumulate(eval, point, (mid, vm), b, depth + 1, state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(roots: &'static [f64]) -> impl FnMut(Complex64) -> Result<Complex64> {
        move |z| Ok(roots.iter().fold(Complex64::new(1.0, 0.0), |acc, r| acc * (z - r)))
    }

    #[test]
    fn counts_real_roots_with_multiplicity() {
        let w = winding_number(poly(&[1.0, 1.0, 1.2, 3.0]), Complex64::new(1.0, 0.0), 0.5, 256, false, 1e-6).unwrap();
        assert_eq!(w.count, 3);
        let w = winding_number(poly(&[1.0, 1.0, 1.2, 3.0]), Complex64::new(1.0, 0.0), 0.5, 256, true, 1e-6).unwrap();
        assert_eq!(w.count, 3);
    }

    #[test]
    fn empty_disk() {
        let w = winding_number(poly(&[5.0]), Complex64::new(5.5, 0.0), 0.25, 256, true, 1e-6).unwrap();
        assert_eq!(w.count, 0);
    }

    #[test]
    fn rejects_zero_on_contour() {
        let r = winding_number(poly(&[1.25]), Complex64::new(1.0, 0.0), 0.25, 256, true, 1e-6);
        assert!(matches!(r, Err(Error::BoundaryTooClose { .. })));
        let r = winding_number(poly(&[1.25 + 1e-9]), Complex64::new(1.0, 0.0), 0.25, 256, true, 1e-6);
        assert!(matches!(r, Err(Error::BoundaryTooClose { .. })));
    }

    #[test]
    fn rapid_phase_is_bisected() {
        // z^7 turns by 7/8 pi between 16 samples, above the accepted step
        let w = winding_number(|z| Ok(z.powu(7)), Complex64::new(0.0, 0.0), 1.0, 16, false, 1e-6).unwrap();
        assert_eq!(w.count, 7);
        assert!(w.evaluations > 16);
    }
}
