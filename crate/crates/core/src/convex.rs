//! Convex function models and their directional derivatives.
//!
//! Three representations share one interface.  [`MaxAffineSystem`] is the
//! polyhedral workhorse: a finite maximum of affine rows `<a_t, x> - b_t`,
//! whose solution set is the polyhedron `<a_t, x> <= b_t` and whose
//! directional derivatives reduce to a maximum over the active rows.
//! [`ScalarFunction`] covers the named one-dimensional functions (shifted and
//! tilted exponentials, the zero function, the absolute value), for which
//! level sets and one-sided derivatives are available in closed form.
//! Custom evaluators make the numeric paths testable against functions the
//! structured code cannot see.
//!
//! Every constructor takes convexity on trust; it is the caller's contract,
//! spot-checked at test time by the brute-force probes in [`crate::oracle`].
//! Directional derivatives can always be approximated through the monotone
//! difference quotient `(f(x + t h) - f(x)) / t`, which for convex `f` is
//! nonincreasing as `t` shrinks; [`dirderiv_numeric`] walks a geometric
//! schedule of step sizes and reports the quotient trace along with the
//! value, so callers can audit convergence.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::geometry::{NormSpec, Polyhedron, Vector};

/// One affine row `x -> <gradient, x> - offset` of a max-affine system.
#[derive(Clone, Debug)]
pub struct AffineRow {
    pub label: String,
    pub gradient: Vector,
    pub offset: f64,
}

impl AffineRow {
    pub fn new(label: impl Into<String>, gradient: Vector, offset: f64) -> Self {
        AffineRow { label: label.into(), gradient, offset }
    }

    /// Row value `<gradient, x> - offset`.
    pub fn value(&self, x: &Vector) -> f64 {
        self.gradient.dot(x) - self.offset
    }
}

/// Finite pointwise maximum of affine rows, `f(x) = max_t <a_t, x> - b_t`,
/// together with the norm of the ambient space.
///
/// The solution set `{f <= 0}` is the polyhedron `<a_t, x> <= b_t`; the rows
/// attaining the maximum at a point form its active set, and the directional
/// derivative at `x` along `h` is the maximum of `<a_t, h>` over active rows.
#[derive(Clone, Debug)]
pub struct MaxAffineSystem {
    rows: Vec<AffineRow>,
    norm: NormSpec,
    dim: usize,
}

impl MaxAffineSystem {
    /// Validates row dimensions and label uniqueness.
    pub fn new(rows: Vec<AffineRow>, norm: NormSpec) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid_input("a max-affine system needs at least one row"));
        }
        let dim = rows[0].gradient.dim();
        for row in &rows {
            if row.gradient.dim() != dim {
                return Err(Error::invalid_input("rows must share one dimension"));
            }
            if !row.offset.is_finite() {
                return Err(Error::invalid_input("row offsets must be finite"));
            }
            if row.label.is_empty() {
                return Err(Error::invalid_input("row labels must be nonempty"));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if rows[..i].iter().any(|r| r.label == row.label) {
                return Err(Error::invalid_input(format!(
                    "duplicate row label {:?}",
                    row.label
                )));
            }
        }
        Ok(MaxAffineSystem { rows, norm, dim })
    }

    pub fn rows(&self) -> &[AffineRow] {
        &self.rows
    }

    pub fn norm(&self) -> NormSpec {
        self.norm
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.rows.iter().map(|r| r.value(x)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn row_values(&self, x: &Vector) -> Vec<f64> {
        self.rows.iter().map(|r| r.value(x)).collect()
    }

    /// Default activity tolerance at `x`: relative in the function value.
    pub fn active_tol(&self, x: &Vector) -> f64 {
        1e-9 * (1.0 + self.value(x).abs())
    }

    /// Indices of rows within `tol` of the maximum at `x` (input order).
    pub fn active_indices(&self, x: &Vector, tol: Option<f64>) -> Vec<usize> {
        let tol = tol.unwrap_or_else(|| self.active_tol(x));
        let values = self.row_values(x);
        let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v >= top - tol)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn active_labels(&self, x: &Vector, tol: Option<f64>) -> Vec<String> {
        self.active_indices(x, tol).into_iter().map(|i| self.rows[i].label.clone()).collect()
    }

    pub fn active_gradients(&self, x: &Vector, tol: Option<f64>) -> Vec<Vector> {
        self.active_indices(x, tol).into_iter().map(|i| self.rows[i].gradient.clone()).collect()
    }

    /// The solution set `{x : <a_t, x> <= b_t}` as a polyhedron.
    pub fn polyhedron(&self) -> Polyhedron {
        Polyhedron::new(self.rows.iter().map(|r| (r.gradient.clone(), r.offset)).collect())
            .expect("validated rows always form a polyhedron")
    }

    /// Exact directional derivative: maximum of `<a_t, h>` over active rows.
    pub fn dirderiv(&self, x: &Vector, h: &Vector) -> f64 {
        self.active_indices(x, None)
            .into_iter()
            .map(|i| self.rows[i].gradient.dot(h))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The tilted system `g = f + magnitude * <direction, . - anchor>`:
    /// every gradient gains `magnitude * direction` and every offset gains
    /// `magnitude * <direction, anchor>`, so labels and row count carry over.
    pub fn tilted(&self, direction: &Vector, magnitude: f64, anchor: &Vector) -> Result<Self> {
        if direction.dim() != self.dim || anchor.dim() != self.dim {
            return Err(Error::invalid_input("tilt direction and anchor must match the dimension"));
        }
        if !magnitude.is_finite() || magnitude < 0.0 {
            return Err(Error::invalid_input("tilt magnitude must be finite and nonnegative"));
        }
        let shift = magnitude * direction.dot(anchor);
        let rows = self
            .rows
            .iter()
            .map(|r| AffineRow {
                label: r.label.clone(),
                gradient: r.gradient.add_scaled(magnitude, direction),
                offset: r.offset + shift,
            })
            .collect();
        MaxAffineSystem::new(rows, self.norm)
    }

    /// Largest Euclidean gradient norm; the natural scale for tolerances.
    pub fn gradient_scale(&self) -> f64 {
        self.rows.iter().map(|r| r.gradient.norm2()).fold(0.0, f64::max)
    }
}

/// The named one-dimensional base shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarKind {
    /// `x -> e^x - 1`.
    ExpMinusOne,
    /// `x -> 0`.
    Zero,
    /// `x -> |x|`.
    Abs,
}

impl ScalarKind {
    pub fn name(self) -> &'static str {
        match self {
            ScalarKind::ExpMinusOne => "exp_minus_one",
            ScalarKind::Zero => "zero",
            ScalarKind::Abs => "abs",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "exp_minus_one" => Ok(ScalarKind::ExpMinusOne),
            "zero" => Ok(ScalarKind::Zero),
            "abs" => Ok(ScalarKind::Abs),
            other => Err(Error::invalid_input(format!(
                "unknown function {other:?} (expected exp_minus_one, zero, or abs)"
            ))),
        }
    }
}

/// Solution set of a scalar convex function: empty, or an interval whose
/// missing endpoints mark unbounded sides.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarLevelSet {
    Empty,
    Interval { lo: Option<f64>, hi: Option<f64> },
}

/// One-dimensional convex function `base(x) + slope * x + offset`.
///
/// The affine part makes the named shapes closed under tilting, and the
/// level-set endpoints stay available in closed form or by bisection on a
/// monotone branch.
#[derive(Clone, Copy, Debug)]
pub struct ScalarFunction {
    kind: ScalarKind,
    slope: f64,
    offset: f64,
}

impl ScalarFunction {
    pub fn new(kind: ScalarKind) -> Self {
        ScalarFunction { kind, slope: 0.0, offset: 0.0 }
    }

    pub fn with_affine(kind: ScalarKind, slope: f64, offset: f64) -> Result<Self> {
        if !slope.is_finite() || !offset.is_finite() {
            return Err(Error::invalid_input("scalar slope and offset must be finite"));
        }
        Ok(ScalarFunction { kind, slope, offset })
    }

    pub fn kind(&self) -> ScalarKind {
        self.kind
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn value(&self, x: f64) -> f64 {
        let base = match self.kind {
            // exp_m1 keeps full precision where e^x - 1 would cancel.
            ScalarKind::ExpMinusOne => x.exp_m1(),
            ScalarKind::Zero => 0.0,
            ScalarKind::Abs => x.abs(),
        };
        base + self.slope * x + self.offset
    }

    /// Left derivative `f'_-(x)`.
    pub fn derivative_minus(&self, x: f64) -> f64 {
        let base = match self.kind {
            ScalarKind::ExpMinusOne => x.exp(),
            ScalarKind::Zero => 0.0,
            ScalarKind::Abs => {
                if x > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        base + self.slope
    }

    /// Right derivative `f'_+(x)`.
    pub fn derivative_plus(&self, x: f64) -> f64 {
        let base = match self.kind {
            ScalarKind::ExpMinusOne => x.exp(),
            ScalarKind::Zero => 0.0,
            ScalarKind::Abs => {
                if x >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        base + self.slope
    }

    /// One-sided directional derivative along a scalar direction.
    pub fn dirderiv(&self, x: f64, h: f64) -> f64 {
        if h > 0.0 {
            h * self.derivative_plus(x)
        } else if h < 0.0 {
            h * self.derivative_minus(x)
        } else {
            0.0
        }
    }

    /// The tilted function `g = f + magnitude * u * (x - anchor)`.
    pub fn tilted(&self, u: f64, magnitude: f64, anchor: f64) -> Result<Self> {
        if !magnitude.is_finite() || magnitude < 0.0 {
            return Err(Error::invalid_input("tilt magnitude must be finite and nonnegative"));
        }
        ScalarFunction::with_affine(
            self.kind,
            self.slope + magnitude * u,
            self.offset - magnitude * u * anchor,
        )
    }

    /// Limit of `f'` as `x -> -inf`; `None` marks divergence to `-inf`.
    pub fn limit_slope_left(&self) -> Option<f64> {
        match self.kind {
            ScalarKind::ExpMinusOne => Some(self.slope),
            ScalarKind::Zero => Some(self.slope),
            ScalarKind::Abs => Some(self.slope - 1.0),
        }
    }

    /// Limit of `f'` as `x -> +inf`; `None` marks divergence to `+inf`.
    pub fn limit_slope_right(&self) -> Option<f64> {
        match self.kind {
            ScalarKind::ExpMinusOne => None,
            ScalarKind::Zero => Some(self.slope),
            ScalarKind::Abs => Some(self.slope + 1.0),
        }
    }

    /// The interval `{x : f(x) <= 0}`, exact up to bisection roundoff.
    pub fn level_set(&self) -> ScalarLevelSet {
        let s = self.slope;
        let o = self.offset;
        match self.kind {
            ScalarKind::Zero => {
                if s == 0.0 {
                    if o <= 0.0 {
                        ScalarLevelSet::Interval { lo: None, hi: None }
                    } else {
                        ScalarLevelSet::Empty
                    }
                } else if s > 0.0 {
                    ScalarLevelSet::Interval { lo: None, hi: Some(-o / s) }
                } else {
                    ScalarLevelSet::Interval { lo: Some(-o / s), hi: None }
                }
            }
            ScalarKind::Abs => {
                // Branch slopes: s - 1 on the left of zero, s + 1 on the right.
                if s > 1.0 {
                    // Strictly increasing; single root.
                    let r = if o <= 0.0 { -o / (s + 1.0) } else { -o / (s - 1.0) };
                    ScalarLevelSet::Interval { lo: None, hi: Some(r) }
                } else if s < -1.0 {
                    let r = if o <= 0.0 { -o / (s - 1.0) } else { -o / (s + 1.0) };
                    ScalarLevelSet::Interval { lo: Some(r), hi: None }
                } else if s == 1.0 {
                    // Constant `o` on the left branch.
                    if o > 0.0 {
                        ScalarLevelSet::Empty
                    } else if o == 0.0 {
                        ScalarLevelSet::Interval { lo: None, hi: Some(0.0) }
                    } else {
                        ScalarLevelSet::Interval { lo: None, hi: Some(-o / 2.0) }
                    }
                } else if s == -1.0 {
                    if o > 0.0 {
                        ScalarLevelSet::Empty
                    } else if o == 0.0 {
                        ScalarLevelSet::Interval { lo: Some(0.0), hi: None }
                    } else {
                        ScalarLevelSet::Interval { lo: Some(o / 2.0), hi: None }
                    }
                } else {
                    // V shape with minimum value `o` at zero.
                    if o > 0.0 {
                        ScalarLevelSet::Empty
                    } else {
                        ScalarLevelSet::Interval {
                            lo: Some(o / (1.0 - s)),
                            hi: Some(-o / (s + 1.0)),
                        }
                    }
                }
            }
            ScalarKind::ExpMinusOne => {
                if s >= 0.0 {
                    // f' = e^x + s > 0: strictly increasing.
                    if s == 0.0 && o >= 1.0 {
                        // f tends to o - 1 >= 0 on the left and e^x > 0 closes
                        // the o = 1 gap, so the function never reaches zero.
                        return ScalarLevelSet::Empty;
                    }
                    let hi = if s == 0.0 {
                        (1.0 - o).ln()
                    } else {
                        self.root_increasing_from(0.0)
                    };
                    ScalarLevelSet::Interval { lo: None, hi: Some(hi) }
                } else {
                    // Interior minimizer at ln(-s).
                    let xstar = (-s).ln();
                    let m = self.value(xstar);
                    if m > 0.0 {
                        ScalarLevelSet::Empty
                    } else if m == 0.0 {
                        ScalarLevelSet::Interval { lo: Some(xstar), hi: Some(xstar) }
                    } else {
                        ScalarLevelSet::Interval {
                            lo: Some(self.root_decreasing_left_of(xstar)),
                            hi: Some(self.root_increasing_from(xstar)),
                        }
                    }
                }
            }
        }
    }

    /// Root of `f` to the right of `start`, where `f` increases and
    /// `f(start) <= 0`; brackets by doubling, then bisects.
    fn root_increasing_from(&self, start: f64) -> f64 {
        let mut lo = start;
        let mut step = 1.0;
        let mut hi = start + step;
        while self.value(hi) <= 0.0 {
            lo = hi;
            step *= 2.0;
            hi = start + step;
        }
        self.bisect(lo, hi)
    }

    /// Root of `f` to the left of `start`, where `f` decreases rightward and
    /// `f(start) <= 0`; brackets by doubling, then bisects.
    fn root_decreasing_left_of(&self, start: f64) -> f64 {
        let mut hi = start;
        let mut step = 1.0;
        let mut lo = start - step;
        while self.value(lo) <= 0.0 {
            hi = lo;
            step *= 2.0;
            lo = start - step;
        }
        self.bisect(hi, lo)
    }

    /// Bisection between a nonpositive end `a` and a positive end `b`.
    fn bisect(&self, a: f64, b: f64) -> f64 {
        let mut lo = a;
        let mut hi = b;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if self.value(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Distance from `x` to the solution interval; `+inf` when it is empty.
    pub fn distance_to_level_set(&self, x: f64) -> ExtReal {
        match self.level_set() {
            ScalarLevelSet::Empty => ExtReal::PosInf,
            ScalarLevelSet::Interval { lo, hi } => {
                let below = lo.map_or(0.0, |l| (l - x).max(0.0));
                let above = hi.map_or(0.0, |h| (x - h).max(0.0));
                ExtReal::Finite(below.max(above))
            }
        }
    }

    /// Finite endpoints of the solution interval (the zero-level boundary).
    pub fn boundary_points(&self) -> Vec<f64> {
        match self.level_set() {
            ScalarLevelSet::Empty => Vec::new(),
            ScalarLevelSet::Interval { lo, hi } => {
                let mut pts = Vec::new();
                if let Some(l) = lo {
                    pts.push(l);
                }
                if let Some(h) = hi {
                    if pts.last().map_or(true, |l| (l - h).abs() > 0.0) {
                        pts.push(h);
                    }
                }
                pts
            }
        }
    }
}

/// Where a [`ConvexFunction`] came from; echoed in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    MaxAffine,
    Tilt,
    Named1d,
    User,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::MaxAffine => "max-affine",
            Provenance::Tilt => "tilt",
            Provenance::Named1d => "named-1d",
            Provenance::User => "user",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

type Evaluator = Arc<dyn Fn(&Vector) -> ExtReal + Send + Sync>;
type ExactDirDeriv = Arc<dyn Fn(&Vector, &Vector) -> f64 + Send + Sync>;

#[derive(Clone)]
struct CustomRepr {
    dim: usize,
    norm: NormSpec,
    evaluator: Evaluator,
    dirderiv: Option<ExactDirDeriv>,
}

#[derive(Clone)]
enum Repr {
    MaxAffine(MaxAffineSystem),
    Scalar(ScalarFunction),
    Custom(CustomRepr),
}

/// A proper convex function with whatever structure its representation
/// exposes: exact level sets and derivatives for the structured forms, a
/// bare evaluator otherwise.
#[derive(Clone)]
pub struct ConvexFunction {
    repr: Repr,
    provenance: Provenance,
}

impl fmt::Debug for ConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::MaxAffine(sys) => {
                write!(f, "ConvexFunction(max-affine, {} rows, dim {})", sys.rows().len(), sys.dim())
            }
            Repr::Scalar(s) => write!(
                f,
                "ConvexFunction({} {:+}x {:+})",
                s.kind().name(),
                s.slope(),
                s.offset()
            ),
            Repr::Custom(c) => write!(f, "ConvexFunction(custom, dim {})", c.dim),
        }
    }
}

impl ConvexFunction {
    pub fn from_system(sys: MaxAffineSystem) -> Self {
        ConvexFunction { repr: Repr::MaxAffine(sys), provenance: Provenance::MaxAffine }
    }

    pub fn from_scalar(f: ScalarFunction) -> Self {
        ConvexFunction { repr: Repr::Scalar(f), provenance: Provenance::Named1d }
    }

    /// Looks up a named one-dimensional function.
    pub fn named(name: &str) -> Result<Self> {
        Ok(ConvexFunction::from_scalar(ScalarFunction::new(ScalarKind::parse(name)?)))
    }

    /// Wraps a user evaluator (values in the extended reals) and an optional
    /// exact directional derivative.  The evaluator must be convex and lower
    /// semicontinuous; this is trusted, not checked.
    pub fn custom(
        dim: usize,
        norm: NormSpec,
        evaluator: impl Fn(&Vector) -> ExtReal + Send + Sync + 'static,
        dirderiv: Option<ExactDirDeriv>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid_input("dimension must be positive"));
        }
        Ok(ConvexFunction {
            repr: Repr::Custom(CustomRepr {
                dim,
                norm,
                evaluator: Arc::new(evaluator),
                dirderiv,
            }),
            provenance: Provenance::User,
        })
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::MaxAffine(sys) => sys.dim(),
            Repr::Scalar(_) => 1,
            Repr::Custom(c) => c.dim,
        }
    }

    pub fn norm(&self) -> NormSpec {
        match &self.repr {
            Repr::MaxAffine(sys) => sys.norm(),
            Repr::Scalar(_) => NormSpec::Euclidean,
            Repr::Custom(c) => c.norm,
        }
    }

    pub fn as_system(&self) -> Option<&MaxAffineSystem> {
        match &self.repr {
            Repr::MaxAffine(sys) => Some(sys),
            _ => None,
        }
    }

    pub fn as_scalar(&self) -> Option<&ScalarFunction> {
        match &self.repr {
            Repr::Scalar(f) => Some(f),
            _ => None,
        }
    }

    pub fn value(&self, x: &Vector) -> Result<ExtReal> {
        if x.dim() != self.dim() {
            return Err(Error::invalid_input("point dimension mismatch"));
        }
        Ok(match &self.repr {
            Repr::MaxAffine(sys) => ExtReal::Finite(sys.value(x)),
            Repr::Scalar(f) => ExtReal::Finite(f.value(x.coords()[0])),
            Repr::Custom(c) => (c.evaluator)(x),
        })
    }

    /// Finite value, or an invalid-input error outside the domain.
    pub fn value_finite(&self, x: &Vector) -> Result<f64> {
        match self.value(x)? {
            ExtReal::Finite(v) => Ok(v),
            ExtReal::PosInf => {
                Err(Error::invalid_input("the point lies outside the function's domain"))
            }
        }
    }

    /// Exact directional derivative where the representation has one.
    pub fn dirderiv_exact(&self, x: &Vector, h: &Vector) -> Option<f64> {
        match &self.repr {
            Repr::MaxAffine(sys) => Some(sys.dirderiv(x, h)),
            Repr::Scalar(f) => Some(f.dirderiv(x.coords()[0], h.coords()[0])),
            Repr::Custom(c) => c.dirderiv.as_ref().map(|d| d(x, h)),
        }
    }

    /// Natural tolerance scale: one plus the largest gradient magnitude the
    /// representation advertises.
    pub fn gradient_scale(&self, at: &Vector) -> f64 {
        match &self.repr {
            Repr::MaxAffine(sys) => 1.0 + sys.gradient_scale(),
            Repr::Scalar(f) => {
                let x = at.coords()[0];
                1.0 + f.derivative_minus(x).abs().max(f.derivative_plus(x).abs())
            }
            Repr::Custom(_) => 1.0,
        }
    }

    /// The tilted function `g = f + magnitude * <direction, . - anchor>`,
    /// preserving structure: tilting a max-affine system or a scalar
    /// function yields the same representation.
    pub fn tilted(&self, direction: &Vector, magnitude: f64, anchor: &Vector) -> Result<Self> {
        if direction.dim() != self.dim() || anchor.dim() != self.dim() {
            return Err(Error::invalid_input("tilt direction and anchor must match the dimension"));
        }
        let repr = match &self.repr {
            Repr::MaxAffine(sys) => Repr::MaxAffine(sys.tilted(direction, magnitude, anchor)?),
            Repr::Scalar(f) => {
                Repr::Scalar(f.tilted(direction.coords()[0], magnitude, anchor.coords()[0])?)
            }
            Repr::Custom(c) => {
                let base = c.evaluator.clone();
                let d = direction.clone();
                let a = anchor.clone();
                let eval: Evaluator = Arc::new(move |x: &Vector| match base(x) {
                    ExtReal::Finite(v) => {
                        ExtReal::Finite(v + magnitude * (d.dot(x) - d.dot(&a)))
                    }
                    ExtReal::PosInf => ExtReal::PosInf,
                });
                let dd = c.dirderiv.as_ref().map(|exact| {
                    let exact = exact.clone();
                    let d2 = direction.clone();
                    let f: ExactDirDeriv =
                        Arc::new(move |x: &Vector, h: &Vector| exact(x, h) + magnitude * d2.dot(h));
                    f
                });
                Repr::Custom(CustomRepr { dim: c.dim, norm: c.norm, evaluator: eval, dirderiv: dd })
            }
        };
        Ok(ConvexFunction { repr, provenance: Provenance::Tilt })
    }
}

/// Geometric step schedule for numeric difference quotients.
#[derive(Clone, Copy, Debug)]
pub struct QuotientSchedule {
    /// First step size.
    pub t0: f64,
    /// Multiplicative decay per step, in (0, 1).
    pub gamma: f64,
    /// Relative tolerance on successive quotients for convergence.
    pub tol: f64,
    /// Maximum number of steps.
    pub kmax: usize,
}

impl Default for QuotientSchedule {
    fn default() -> Self {
        QuotientSchedule { t0: 1.0, gamma: 0.5, tol: 1e-9, kmax: 60 }
    }
}

/// Outcome of the numeric directional-derivative iteration.
#[derive(Clone, Debug)]
pub struct NumericDerivative {
    /// The converged quotient, or `+inf` when every step left the domain.
    pub value: ExtReal,
    /// The `(t, quotient)` trace, finite entries only.
    pub quotients: Vec<(f64, f64)>,
    /// Whether successive quotients met the tolerance (always true for the
    /// `+inf` signal, which monotonicity makes unambiguous).
    pub converged: bool,
}

/// Difference quotients `(f(x + t h) - f(x)) / t` along the schedule.
///
/// For convex `f` the quotient is nondecreasing in `t`, so the sequence
/// decreases toward the directional derivative as the schedule shrinks.
/// Infinite function values report as `+inf` quotients.
pub fn difference_quotients(
    f: &ConvexFunction,
    x: &Vector,
    h: &Vector,
    schedule: &QuotientSchedule,
) -> Result<Vec<(f64, ExtReal)>> {
    let fx = f.value_finite(x)?;
    let mut out = Vec::with_capacity(schedule.kmax);
    let mut t = schedule.t0;
    for _ in 0..schedule.kmax {
        let q = match f.value(&x.add_scaled(t, h))? {
            ExtReal::Finite(v) => ExtReal::Finite((v - fx) / t),
            ExtReal::PosInf => ExtReal::PosInf,
        };
        out.push((t, q));
        t *= schedule.gamma;
    }
    Ok(out)
}

/// Numeric one-sided directional derivative by monotone quotients.
///
/// Convergence accepts a step either when successive quotients agree to the
/// schedule tolerance or when their gap falls below the roundoff floor of
/// the quotient itself, whichever is larger; an iteration that is still
/// moving when the schedule ends reports an inconclusive error rather than
/// a value.
pub fn dirderiv_numeric(
    f: &ConvexFunction,
    x: &Vector,
    h: &Vector,
    schedule: &QuotientSchedule,
) -> Result<NumericDerivative> {
    if !(schedule.gamma > 0.0 && schedule.gamma < 1.0) || schedule.t0 <= 0.0 {
        return Err(Error::invalid_input("quotient schedule needs t0 > 0 and gamma in (0, 1)"));
    }
    let fx = f.value_finite(x)?;
    let mut trace: Vec<(f64, f64)> = Vec::new();
    let mut t = schedule.t0;
    let mut prev: Option<f64> = None;
    let mut saw_infinite = false;
    for _ in 0..schedule.kmax {
        match f.value(&x.add_scaled(t, h))? {
            ExtReal::PosInf => {
                saw_infinite = true;
                prev = None;
            }
            ExtReal::Finite(v) => {
                let q = (v - fx) / t;
                trace.push((t, q));
                if let Some(p) = prev {
                    let gap = (p - q).abs();
                    let roundoff = 4.0 * f64::EPSILON * (v.abs() + fx.abs()) / t;
                    if gap <= schedule.tol * (1.0 + q.abs()) || gap <= 2.0 * roundoff {
                        return Ok(NumericDerivative {
                            value: ExtReal::Finite(q),
                            quotients: trace,
                            converged: true,
                        });
                    }
                }
                prev = Some(q);
            }
        }
        t *= schedule.gamma;
    }
    if trace.is_empty() && saw_infinite {
        // The ray leaves the domain at every step: the derivative is +inf.
        return Ok(NumericDerivative { value: ExtReal::PosInf, quotients: trace, converged: true });
    }
    Err(Error::inconclusive(
        "difference quotients were still moving when the step schedule ran out",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(coords: &[f64]) -> Vector {
        Vector::from_slice(coords)
    }

    fn triangle() -> MaxAffineSystem {
        MaxAffineSystem::new(
            vec![
                AffineRow::new("1", v(&[1.0, 1.0]), 1.0),
                AffineRow::new("2", v(&[-2.0, 1.0]), 2.0),
                AffineRow::new("3", v(&[1.0, -2.0]), 2.0),
            ],
            NormSpec::Euclidean,
        )
        .unwrap()
    }

    #[test]
    fn max_affine_values_and_active_sets() {
        let sys = triangle();
        assert_eq!(sys.value(&v(&[0.0, 0.0])), -1.0);
        assert_eq!(sys.active_labels(&v(&[0.0, 0.0]), None), vec!["1"]);
        // At (0, 1) the first row vanishes and dominates (0 > -1 > -4).
        assert_eq!(sys.value(&v(&[0.0, 1.0])), 0.0);
        assert_eq!(sys.active_labels(&v(&[0.0, 1.0]), None), vec!["1"]);
        // The corner where rows 2 and 3 tie.
        let corner = v(&[-2.0, -2.0]);
        assert_eq!(sys.active_labels(&corner, None), vec!["2", "3"]);
    }

    #[test]
    fn constructor_rejects_bad_rows() {
        assert!(MaxAffineSystem::new(vec![], NormSpec::Euclidean).is_err());
        let dup = MaxAffineSystem::new(
            vec![
                AffineRow::new("r", v(&[1.0]), 0.0),
                AffineRow::new("r", v(&[2.0]), 0.0),
            ],
            NormSpec::Euclidean,
        );
        assert!(dup.is_err());
        let mixed = MaxAffineSystem::new(
            vec![
                AffineRow::new("a", v(&[1.0]), 0.0),
                AffineRow::new("b", v(&[1.0, 2.0]), 0.0),
            ],
            NormSpec::Euclidean,
        );
        assert!(mixed.is_err());
    }

    #[test]
    fn tilt_matches_pointwise_definition() {
        let sys = triangle();
        let u = v(&[0.6, -0.8]);
        let anchor = v(&[0.0, 1.0]);
        let eps = 0.05;
        let tilted = sys.tilted(&u, eps, &anchor).unwrap();
        for x in [v(&[0.0, 0.0]), v(&[1.5, -0.3]), v(&[-2.0, 4.0])] {
            let expected = sys.value(&x) + eps * (u.dot(&x) - u.dot(&anchor));
            assert!((tilted.value(&x) - expected).abs() < 1e-12);
        }
        assert!((tilted.value(&anchor) - sys.value(&anchor)).abs() < 1e-12);
    }

    #[test]
    fn scalar_level_sets_by_kind() {
        let exp = ScalarFunction::new(ScalarKind::ExpMinusOne);
        assert_eq!(exp.level_set(), ScalarLevelSet::Interval { lo: None, hi: Some(0.0) });

        // Tilted exponential: the solution set becomes a bounded interval
        // whose left endpoint sits near -1/magnitude.
        let g = exp.tilted(-1.0, 0.05, 0.0).unwrap();
        assert_eq!(g.slope(), -0.05);
        match g.level_set() {
            ScalarLevelSet::Interval { lo: Some(lo), hi: Some(hi) } => {
                assert!(g.value(lo).abs() < 1e-9);
                assert!(hi.abs() < 1e-12);
                assert!(lo < -19.0 && lo > -21.0, "left endpoint {lo}");
            }
            other => panic!("unexpected level set {other:?}"),
        }

        let zero = ScalarFunction::new(ScalarKind::Zero);
        assert_eq!(zero.level_set(), ScalarLevelSet::Interval { lo: None, hi: None });
        assert_eq!(
            ScalarFunction::with_affine(ScalarKind::Zero, 0.0, 0.5).unwrap().level_set(),
            ScalarLevelSet::Empty
        );

        let abs = ScalarFunction::new(ScalarKind::Abs);
        assert_eq!(abs.level_set(), ScalarLevelSet::Interval { lo: Some(0.0), hi: Some(0.0) });
        let shifted = ScalarFunction::with_affine(ScalarKind::Abs, 0.0, -1.0).unwrap();
        assert_eq!(
            shifted.level_set(),
            ScalarLevelSet::Interval { lo: Some(-1.0), hi: Some(1.0) }
        );
        let plateau = ScalarFunction::with_affine(ScalarKind::Abs, 1.0, 0.0).unwrap();
        assert_eq!(plateau.level_set(), ScalarLevelSet::Interval { lo: None, hi: Some(0.0) });
    }

    #[test]
    fn scalar_distance_and_derivatives() {
        let shifted = ScalarFunction::with_affine(ScalarKind::Abs, 0.0, -1.0).unwrap();
        assert_eq!(shifted.distance_to_level_set(3.0), ExtReal::Finite(2.0));
        assert_eq!(shifted.distance_to_level_set(0.2), ExtReal::Finite(0.0));
        assert_eq!(
            ScalarFunction::with_affine(ScalarKind::Zero, 0.0, 1.0)
                .unwrap()
                .distance_to_level_set(0.0),
            ExtReal::PosInf
        );
        // d+|0|(h) = |h| from the one-sided derivatives.
        let abs = ScalarFunction::new(ScalarKind::Abs);
        assert_eq!(abs.dirderiv(0.0, 1.0), 1.0);
        assert_eq!(abs.dirderiv(0.0, -1.0), 1.0);
        let exp = ScalarFunction::new(ScalarKind::ExpMinusOne);
        assert!((exp.dirderiv(0.0, -1.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn numeric_quotients_converge_and_stay_monotone() {
        let f = ConvexFunction::from_system(triangle());
        let x = v(&[0.3, -0.4]);
        let h = v(&[0.8, 0.6]);
        let exact = f.dirderiv_exact(&x, &h).unwrap();
        let numeric = dirderiv_numeric(&f, &x, &h, &QuotientSchedule::default()).unwrap();
        assert!(numeric.converged);
        let got = numeric.value.finite().unwrap();
        assert!((got - exact).abs() < 1e-8, "numeric {got} vs exact {exact}");
        // Quotients shrink (up to roundoff) as the step shrinks.
        for pair in numeric.quotients.windows(2) {
            assert!(pair[1].1 <= pair[0].1 + 1e-10);
        }
    }

    #[test]
    fn numeric_quotients_signal_domain_exit() {
        let f = ConvexFunction::custom(
            1,
            NormSpec::Euclidean,
            |x: &Vector| {
                if x.coords()[0] > 0.0 {
                    ExtReal::PosInf
                } else {
                    ExtReal::Finite(0.0)
                }
            },
            None,
        )
        .unwrap();
        let r = dirderiv_numeric(&f, &v(&[0.0]), &v(&[1.0]), &QuotientSchedule::default()).unwrap();
        assert_eq!(r.value, ExtReal::PosInf);
        assert!(r.converged);
        let back =
            dirderiv_numeric(&f, &v(&[0.0]), &v(&[-1.0]), &QuotientSchedule::default()).unwrap();
        assert_eq!(back.value, ExtReal::Finite(0.0));
    }

    #[test]
    fn named_lookup_and_provenance() {
        let f = ConvexFunction::named("exp_minus_one").unwrap();
        assert_eq!(f.provenance().name(), "named-1d");
        assert!(ConvexFunction::named("nope").is_err());
        let sys = ConvexFunction::from_system(triangle());
        let tilted = sys.tilted(&v(&[1.0, 0.0]), 0.1, &v(&[0.0, 1.0])).unwrap();
        assert_eq!(tilted.provenance().name(), "tilt");
        assert!(tilted.as_system().is_some());
    }
}
