//! The eigenvalue problem `-phi'' + P(x) phi = lambda phi` on `[0, pi]` with
//! `phi'(0) + H_L phi(0) = 0` and `phi'(pi) + H_R phi(pi) = 0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::expr::TrigPoly;
use crate::linalg::{RealMatrix, SymMatrix};

/// Tolerance used when checking that a dense specification is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialKind {
    Zero,
    Constant,
    Diagonal,
    Dense,
    Piecewise,
}

/// Square matrix of scalar functions, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FnMatrix {
    order: usize,
    entries: Vec<TrigPoly>,
}

impl FnMatrix {
    pub fn zeros(order: usize) -> Self {
        FnMatrix {
            order,
            entries: vec![TrigPoly::zero(); order * order],
        }
    }

    fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> TrigPoly) -> Self {
        let mut entries = Vec::with_capacity(order * order);
        for i in 0..order {
            for j in 0..order {
                entries.push(f(i, j));
            }
        }
        FnMatrix { order, entries }
    }

    pub fn constant(m: &RealMatrix) -> Self {
        Self::from_fn(m.order(), |i, j| TrigPoly::constant(m.get(i, j)))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entry(&self, i: usize, j: usize) -> &TrigPoly {
        &self.entries[i * self.order + j]
    }

    pub fn eval(&self, x: f64) -> RealMatrix {
        RealMatrix::from_fn(self.order, |i, j| self.entry(i, j).eval(x))
    }

    pub fn map(&self, f: impl Fn(&TrigPoly) -> TrigPoly) -> Self {
        FnMatrix {
            order: self.order,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &FnMatrix) -> Self {
        Self::from_fn(self.order, |i, j| self.entry(i, j).add(other.entry(i, j)))
    }

    pub fn matmul(&self, other: &FnMatrix) -> Self {
        Self::from_fn(self.order, |i, j| {
            (0..self.order).fold(TrigPoly::zero(), |acc, k| {
                acc.add(&self.entry(i, k).mul(other.entry(k, j)))
            })
        })
    }

    pub fn integral(&self, a: f64, b: f64) -> RealMatrix {
        RealMatrix::from_fn(self.order, |i, j| self.entry(i, j).integral(a, b))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.order).all(|i| (0..self.order).all(|j| i == j || self.entry(i, j).is_zero()))
    }

    fn is_constant(&self) -> bool {
        self.entries.iter().all(|e| {
            e.terms()
                .iter()
                .all(|t| t.power == 0 && t.freq == 0.0)
        })
    }

    /// Coefficient bound on the max absolute row sum over `[0, pi]`.
    fn sup_norm_bound(&self) -> f64 {
        (0..self.order)
            .map(|i| (0..self.order).map(|j| self.entry(i, j).abs_bound(PI)).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// A piece of the potential on `[start, end]`.
#[derive(Clone, Debug, PartialEq)]
struct Segment {
    start: f64,
    end: f64,
    matrix: FnMatrix,
}

/// The matrix potential `P(x)` on `[0, pi]`. Every constructor produces a
/// symmetric matrix function: dense input is checked and then only the upper
/// triangle is kept.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    order: usize,
    kind: PotentialKind,
    segments: Vec<Segment>,
}

impl PotentialSpec {
    fn single(order: usize, kind: PotentialKind, matrix: FnMatrix) -> Self {
        PotentialSpec {
            order,
            kind,
            segments: vec![Segment {
                start: 0.0,
                end: PI,
                matrix,
            }],
        }
    }

    pub fn zero(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidProblem("dimension must be at least 1".into()));
        }
        Ok(Self::single(order, PotentialKind::Zero, FnMatrix::zeros(order)))
    }

    pub fn constant(value: SymMatrix) -> Self {
        Self::single(
            value.order(),
            PotentialKind::Constant,
            FnMatrix::constant(value.matrix()),
        )
    }

    pub fn diagonal(entries: Vec<TrigPoly>) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::InvalidProblem("diagonal potential needs at least one entry".into()));
        }
        let m = FnMatrix::from_fn(n, |i, j| {
            if i == j {
                entries[i].clone()
            } else {
                TrigPoly::zero()
            }
        });
        Ok(Self::single(n, PotentialKind::Diagonal, m))
    }

    /// Dense potential from a full `N x N` array of entries, which must be
    /// symmetric coefficient-wise within [`SYMMETRY_TOL`].
    pub fn dense(rows: Vec<Vec<TrigPoly>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidProblem("dense potential must be a nonempty square array".into()));
        }
        for i in 0..n {
            for j in i + 1..n {
                let d = rows[i][j].coef_distance(&rows[j][i]);
                if d > SYMMETRY_TOL {
                    return Err(Error::InvalidProblem(format!(
                        "potential entries ({i},{j}) and ({j},{i}) differ by {d:.3e}"
                    )));
                }
            }
        }
        Ok(Self::dense_upper(n, |i, j| rows[i][j].clone()))
    }

    fn dense_upper(n: usize, upper: impl Fn(usize, usize) -> TrigPoly) -> Self {
        let m = FnMatrix::from_fn(n, |i, j| if i <= j { upper(i, j) } else { upper(j, i) });
        Self::single(n, PotentialKind::Dense, m)
    }

    /// Piecewise potential. `breakpoints` are the interior points (strictly
    /// increasing, inside `(0, pi)`); `pieces` has one more element. Pieces may
    /// not themselves be piecewise. Values at a breakpoint come from the piece
    /// on its right.
    pub fn piecewise(breakpoints: Vec<f64>, pieces: Vec<PotentialSpec>) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidProblem(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                pieces.len()
            )));
        }
        let mut prev = 0.0;
        for &b in &breakpoints {
            if !(b > prev && b < PI) {
                return Err(Error::InvalidProblem(
                    "breakpoints must be strictly increasing inside (0, pi)".into(),
                ));
            }
            prev = b;
        }
        let order = pieces[0].order;
        let mut segments = Vec::with_capacity(pieces.len());
        let mut bounds = vec![0.0];
        bounds.extend_from_slice(&breakpoints);
        bounds.push(PI);
        for (k, piece) in pieces.into_iter().enumerate() {
            if piece.order != order {
                return Err(Error::InvalidProblem("all pieces must share one order".into()));
            }
            if piece.kind == PotentialKind::Piecewise {
                return Err(Error::InvalidProblem("pieces cannot be piecewise".into()));
            }
            segments.push(Segment {
                start: bounds[k],
                end: bounds[k + 1],
                matrix: piece.segments.into_iter().next().unwrap().matrix,
            });
        }
        Ok(PotentialSpec {
            order,
            kind: PotentialKind::Piecewise,
            segments,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    fn segment_at(&self, x: f64) -> &Segment {
        self.segments
            .iter()
            .rev()
            .find(|s| s.start <= x)
            .unwrap_or(&self.segments[0])
    }

    fn check_point(x: f64) -> Result<()> {
        if !(0.0..=PI).contains(&x) {
            return Err(Error::Domain(format!("x = {x} lies outside [0, pi]")));
        }
        Ok(())
    }

    /// `P(x)`.
    pub fn eval(&self, x: f64) -> Result<SymMatrix> {
        Self::check_point(x)?;
        SymMatrix::new(self.segment_at(x).matrix.eval(x))
    }

    /// Writes `P(x)` row-major into `out` without validation; `x` must lie in `[0, pi]`.
    pub(crate) fn sample_into(&self, x: f64, out: &mut [f64]) {
        let seg = self.segment_at(x);
        let n = self.order;
        for i in 0..n {
            for j in i..n {
                let v = seg.matrix.entry(i, j).eval(x);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
    }

    /// Entrywise `int_a^b P(t) dt`, closed form per segment.
    pub fn integrate(&self, a: f64, b: f64) -> Result<SymMatrix> {
        if a > b {
            return Err(Error::Domain(format!("integration bounds reversed: {a} > {b}")));
        }
        Self::check_point(a)?;
        Self::check_point(b)?;
        let mut acc = RealMatrix::zeros(self.order);
        for s in &self.segments {
            let lo = a.max(s.start);
            let hi = b.min(s.end);
            if hi > lo {
                acc = acc.add(&s.matrix.integral(lo, hi));
            }
        }
        SymMatrix::new(acc)
    }

    /// Diagonal of the transformation kernel, `K(x, x) = 1/2 int_0^x P(t) dt`.
    pub fn kernel_diag(&self, x: f64) -> Result<SymMatrix> {
        Ok(self.integrate(0.0, x)?.scaled(0.5))
    }

    /// Per segment: `(start, end, P, K(t,t))` with `K` in closed form.
    fn segments_with_kernel(&self) -> Vec<(f64, f64, FnMatrix, FnMatrix)> {
        let mut acc = RealMatrix::zeros(self.order);
        let mut out = Vec::with_capacity(self.segments.len());
        for s in &self.segments {
            let start_value = acc.clone();
            let start = s.start;
            let kernel = FnMatrix::from_fn(self.order, |i, j| {
                s.matrix
                    .entry(i, j)
                    .primitive_from(start)
                    .add(&TrigPoly::constant(start_value.get(i, j)))
                    .scale(0.5)
            });
            acc = acc.add(&s.matrix.integral(s.start, s.end));
            out.push((s.start, s.end, s.matrix.clone(), kernel));
        }
        out
    }

    /// `int_0^pi P(t) K(t,t) dt` (not symmetric in general).
    pub fn integral_p_kernel(&self) -> RealMatrix {
        self.segments_with_kernel()
            .into_iter()
            .fold(RealMatrix::zeros(self.order), |acc, (a, b, p, k)| {
                acc.add(&p.matmul(&k).integral(a, b))
            })
    }

    /// `int_0^pi (P(t)^2 - P(t) P(0)) dt`.
    pub fn integral_p_squared_minus_p_p0(&self) -> RealMatrix {
        let p0 = FnMatrix::constant(&self.segments[0].matrix.eval(0.0));
        let mut acc = RealMatrix::zeros(self.order);
        for s in &self.segments {
            let sq = s.matrix.matmul(&s.matrix);
            let cross = s.matrix.matmul(&p0).map(|e| e.scale(-1.0));
            acc = acc.add(&sq.add(&cross).integral(s.start, s.end));
        }
        acc
    }

    /// `P'(0)` from the first segment and `P'(pi)` from the last.
    pub fn derivative_at_ends(&self) -> (RealMatrix, RealMatrix) {
        let first = &self.segments[0].matrix;
        let last = &self.segments[self.segments.len() - 1].matrix;
        (
            first.map(TrigPoly::derivative).eval(0.0),
            last.map(TrigPoly::derivative).eval(PI),
        )
    }

    /// Safe upper bound on `max_x ||P(x)||_inf`.
    pub fn sup_norm_bound(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.matrix.sup_norm_bound())
            .fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self) -> bool {
        self.segments.iter().all(|s| s.matrix.is_diagonal())
    }

    pub fn is_constant(&self) -> bool {
        self.segments.len() == 1 && self.segments[0].matrix.is_constant()
    }

    /// The scalar potential of channel `i` of a diagonal potential.
    pub fn channel(&self, i: usize) -> Result<PotentialSpec> {
        if !self.is_diagonal() || i >= self.order {
            return Err(Error::Precondition(format!(
                "channel {i} requested from a non-diagonal or smaller potential"
            )));
        }
        let segments = self
            .segments
            .iter()
            .map(|s| Segment {
                start: s.start,
                end: s.end,
                matrix: FnMatrix {
                    order: 1,
                    entries: vec![s.matrix.entry(i, i).clone()],
                },
            })
            .collect();
        Ok(PotentialSpec {
            order: 1,
            kind: if self.kind == PotentialKind::Piecewise {
                PotentialKind::Piecewise
            } else {
                PotentialKind::Diagonal
            },
            segments,
        })
    }
}

/// The triple `(P, H_L, H_R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    potential: PotentialSpec,
    h_left: SymMatrix,
    h_right: SymMatrix,
}

impl Problem {
    pub fn new(potential: PotentialSpec, h_left: SymMatrix, h_right: SymMatrix) -> Result<Self> {
        let n = potential.order();
        if n == 0 || h_left.order() != n || h_right.order() != n {
            return Err(Error::InvalidProblem(format!(
                "orders disagree: potential {n}, h_left {}, h_right {}",
                h_left.order(),
                h_right.order()
            )));
        }
        Ok(Problem {
            potential,
            h_left,
            h_right,
        })
    }

    /// `P = 0`, `H_L = H_R = 0`.
    pub fn free(order: usize) -> Result<Self> {
        Self::new(
            PotentialSpec::zero(order)?,
            SymMatrix::zeros(order),
            SymMatrix::zeros(order),
        )
    }

    pub fn dimension(&self) -> usize {
        self.potential.order()
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn h_left(&self) -> &SymMatrix {
        &self.h_left
    }

    pub fn h_right(&self) -> &SymMatrix {
        &self.h_right
    }

    /// True when `P`, `H_L` and `H_R` are all diagonal.
    pub fn is_decoupled(&self) -> bool {
        self.potential.is_diagonal() && self.h_left.is_diagonal() && self.h_right.is_diagonal()
    }

    /// Lower bound for the spectrum. For a normalized eigenfunction the boundary
    /// terms satisfy `|phi(end)|^2 <= eps ||phi'||^2 + (1/eps + 1/pi)`, which with
    /// `eps = 1/(2h)` gives `lambda >= -p - 4h^2 - 2h/pi`.
    pub fn spectrum_lower_bound(&self) -> f64 {
        let p = self.potential.sup_norm_bound();
        let h = self.h_left.matrix().norm_inf().max(self.h_right.matrix().norm_inf());
        let trace_bound = -p - 4.0 * h * h - 2.0 * h / PI - 1.0;
        let crude = -p - 2.0 * h - 1.0;
        trace_bound.min(crude)
    }
}
