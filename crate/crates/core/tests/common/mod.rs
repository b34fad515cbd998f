#![allow(dead_code)]

use std::f64::consts::PI;

use vsl_core::expr::TrigPoly;
use vsl_core::{PotentialSpec, Problem, SymMatrix};

pub fn constant(rows: &[Vec<f64>]) -> Problem {
    let n = rows.len();
    Problem::new(
        PotentialSpec::constant(SymMatrix::from_rows(rows).unwrap()),
        SymMatrix::zeros(n),
        SymMatrix::zeros(n),
    )
    .unwrap()
}

/// `P = 2 I`, `H = 0`.
pub fn two_identity() -> Problem {
    constant(&[vec![2.0, 0.0], vec![0.0, 2.0]])
}

/// `P = [[0, 1], [1, 0]]`, `H = 0`.
pub fn coupled_constant() -> Problem {
    constant(&[vec![0.0, 1.0], vec![1.0, 0.0]])
}

/// `P = diag(1 + cos x, 4)`, `H_L = diag(0, 1)`, `H_R = diag(1, 0)`.
pub fn decoupled() -> Problem {
    Problem::new(
        PotentialSpec::diagonal(vec![
            TrigPoly::from_parts(&[1.0], &[(1.0, 1.0)], &[]),
            TrigPoly::constant(4.0),
        ])
        .unwrap(),
        SymMatrix::diagonal(&[0.0, 1.0]),
        SymMatrix::diagonal(&[1.0, 0.0]),
    )
    .unwrap()
}

/// `P = [[sin x, x/pi], [x/pi, 1]]`, `H_L = 0`, `H_R = I`.
pub fn generic() -> Problem {
    let off = TrigPoly::from_parts(&[0.0, 1.0 / PI], &[], &[]);
    Problem::new(
        PotentialSpec::dense(vec![
            vec![TrigPoly::from_parts(&[], &[], &[(1.0, 1.0)]), off.clone()],
            vec![off, TrigPoly::constant(1.0)],
        ])
        .unwrap(),
        SymMatrix::zeros(2),
        SymMatrix::identity(2),
    )
    .unwrap()
}

/// Scalar problem with `H_L = -1`, `H_R = 1`, `P = 0`.
pub fn scalar_robin() -> Problem {
    Problem::new(
        PotentialSpec::zero(1).unwrap(),
        SymMatrix::diagonal(&[-1.0]),
        SymMatrix::diagonal(&[1.0]),
    )
    .unwrap()
}
