//! Vectors, norms, and the two geometric kernels the analysis rests on:
//! the minimum-norm point of a finite point set's convex hull (Wolfe's
//! algorithm) and Euclidean projection onto a polyhedron (a dual active-set
//! iteration certified by KKT conditions, with a cyclic Dykstra fallback).

use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{LinearProgram, LpOutcome, Relation};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Dense vector in `R^n`, `n >= 1`, with finite coordinates.
///
/// The two constructors differ only in how they report violations:
/// [`Vector::new`] returns an error (use it on external data), while
/// [`Vector::from_slice`] asserts (use it on coordinates the caller already
/// controls, e.g. literals in tests).
#[derive(Clone, Debug, PartialEq)]
pub struct Vector {
    coords: Vec<f64>,
}

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid_input("vector dimension must be at least 1"));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid_input(format!(
                "vector coordinates must be finite, got {bad}"
            )));
        }
        Ok(Self { coords })
    }

    /// Panics on empty or non-finite input; see [`Vector::new`] for the
    /// checked variant.
    pub fn from_slice(coords: &[f64]) -> Self {
        Vector::new(coords.to_vec()).expect("valid coordinates")
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector dimension must be at least 1");
        Self { coords: vec![0.0; dim] }
    }

    /// `i`-th standard basis vector of `R^dim`.
    pub fn unit(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        let mut coords = vec![0.0; dim];
        coords[i] = 1.0;
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        linalg::dot(&self.coords, &other.coords)
    }

    pub fn norm2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, c: f64) -> Vector {
        Vector { coords: self.coords.iter().map(|v| c * v).collect() }
    }

    /// `self + c * other`, the workhorse of every iteration below.
    pub fn add_scaled(&self, c: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + c * b)
                .collect(),
        }
    }

    /// Displays as `(x1, x2, ...)` using shortest round-trip float formatting,
    /// so reports are deterministic.
    pub fn display(&self) -> String {
        let parts: Vec<String> = self.coords.iter().map(|v| format!("{v}")).collect();
        format!("({})", parts.join(", "))
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        self.add_scaled(1.0, rhs)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        self.add_scaled(-1.0, rhs)
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, c: f64) -> Vector {
        self.scale(c)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

/// Which norm the ambient space carries.
///
/// The dual pairing is `Euclidean <-> Euclidean`, `Sup <-> One`,
/// `One <-> Sup`.  Only the Euclidean case feeds the certified kernels; the
/// other two route through grid evaluation, but their norming functionals are
/// still exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormSpec {
    Euclidean,
    Sup,
    One,
}

impl NormSpec {
    pub fn dual(self) -> NormSpec {
        match self {
            NormSpec::Euclidean => NormSpec::Euclidean,
            NormSpec::Sup => NormSpec::One,
            NormSpec::One => NormSpec::Sup,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NormSpec::Euclidean => "euclidean",
            NormSpec::Sup => "sup",
            NormSpec::One => "one",
        }
    }

    pub fn norm(self, v: &Vector) -> f64 {
        match self {
            NormSpec::Euclidean => v.norm2(),
            NormSpec::Sup => v.coords().iter().fold(0.0_f64, |m, c| m.max(c.abs())),
            NormSpec::One => v.coords().iter().map(|c| c.abs()).sum(),
        }
    }

    /// A functional `h*` with `dual-norm(h*) = 1` and `<h*, h> = norm(h)`.
    ///
    /// Choices are deterministic: the sup norm breaks ties at the first
    /// coordinate of maximal magnitude, and the one norm maps zero
    /// coordinates to zero.
    pub fn norming_functional(self, h: &Vector) -> Result<Vector> {
        let n = self.norm(h);
        if n == 0.0 {
            return Err(Error::invalid_input(
                "norming functional is undefined for the zero vector",
            ));
        }
        let coords = match self {
            NormSpec::Euclidean => h.coords().iter().map(|c| c / n).collect(),
            NormSpec::Sup => {
                let mut coords = vec![0.0; h.dim()];
                let mut i = 0;
                for (j, c) in h.coords().iter().enumerate() {
                    if c.abs() > h.coords()[i].abs() {
                        i = j;
                    }
                }
                coords[i] = h.coords()[i].signum();
                coords
            }
            NormSpec::One => h
                .coords()
                .iter()
                .map(|c| if *c == 0.0 { 0.0 } else { c.signum() })
                .collect(),
        };
        Ok(Vector { coords })
    }
}

/// Intersection of closed halfspaces `<a_r, x> <= b_r`.
#[derive(Clone, Debug)]
pub struct Polyhedron {
    rows: Vec<(Vector, f64)>,
    dim: usize,
}

impl Polyhedron {
    pub fn new(rows: Vec<(Vector, f64)>) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::invalid_input("polyhedron needs at least one row"))?;
        let dim = first.0.dim();
        for (a, b) in &rows {
            if a.dim() != dim {
                return Err(Error::invalid_input("polyhedron rows must share one dimension"));
            }
            if !b.is_finite() {
                return Err(Error::invalid_input("polyhedron offsets must be finite"));
            }
        }
        Ok(Self { rows, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[(Vector, f64)] {
        &self.rows
    }

    /// Largest constraint violation at `x`; nonpositive means feasible.
    pub fn max_violation(&self, x: &Vector) -> f64 {
        self.rows
            .iter()
            .map(|(a, b)| a.dot(x) - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.max_violation(x) <= tol
    }
}

/// Outcome of [`min_norm_point`]: the nearest point of the hull to the
/// origin, its Euclidean norm, and hull coefficients aligned with the input
/// order (a point of the simplex, zero for points outside the final corral).
#[derive(Clone, Debug)]
pub struct MinNormPoint {
    pub point: Vector,
    pub distance: f64,
    pub coefficients: Vec<f64>,
}

/// Minimum-norm point of `conv(points)` by Wolfe's corral algorithm.
///
/// The corral is a set of points whose affine minimizer has strictly positive
/// coefficients; each major cycle either certifies optimality through the
/// support inequality `<x, p_j> >= <x, x>` for every input point, or adds the
/// most violating point and restores the corral with line searches.  Exact
/// arithmetic terminates finitely; the working-precision port uses a relative
/// tolerance on the support test and caps the cycle count defensively.
pub fn min_norm_point(points: &[Vector]) -> Result<MinNormPoint> {
    if points.is_empty() {
        return Err(Error::invalid_input("min_norm_point needs at least one point"));
    }
    let dim = points[0].dim();
    if points.iter().any(|p| p.dim() != dim) {
        return Err(Error::invalid_input("min_norm_point inputs must share one dimension"));
    }

    let scale = points.iter().map(|p| p.dot(p)).fold(1.0_f64, f64::max);
    let support_tol = 1e-12 * scale;

    // Start from the shortest input point.
    let start = (0..points.len())
        .min_by(|&i, &j| points[i].norm2().partial_cmp(&points[j].norm2()).unwrap())
        .unwrap();
    let mut corral: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];

    let max_major = 100 * points.len().max(4);
    for _ in 0..max_major {
        let x = combine(points, &corral, &weights);
        let xx = x.dot(&x);

        let j = (0..points.len())
            .min_by(|&i, &j| x.dot(&points[i]).partial_cmp(&x.dot(&points[j])).unwrap())
            .unwrap();
        if x.dot(&points[j]) >= xx - support_tol || corral.contains(&j) {
            return Ok(finish(points, &corral, &weights));
        }
        corral.push(j);
        weights.push(0.0);

        // Minor cycles: pull the weights toward the affine minimizer of the
        // corral, dropping points whose weight hits zero on the way.
        loop {
            match affine_minimizer(points, &corral) {
                None => {
                    // Affinely dependent corral at working precision: discard
                    // the newest point and accept the previous iterate.
                    corral.pop();
                    weights.pop();
                    break;
                }
                Some(alpha) => {
                    if alpha.iter().all(|&a| a > -1e-12) {
                        weights = alpha.iter().map(|a| a.max(0.0)).collect();
                        renormalize(&mut weights);
                        break;
                    }
                    let mut theta = 1.0_f64;
                    for (w, a) in weights.iter().zip(&alpha) {
                        if *a < 0.0 {
                            theta = theta.min(w / (w - a));
                        }
                    }
                    for (w, a) in weights.iter_mut().zip(&alpha) {
                        *w = (1.0 - theta) * *w + theta * a;
                    }
                    let mut k = 0;
                    while k < corral.len() {
                        if weights[k] <= 1e-12 {
                            corral.remove(k);
                            weights.remove(k);
                        } else {
                            k += 1;
                        }
                    }
                    renormalize(&mut weights);
                }
            }
        }
    }
    Err(Error::numeric("min_norm_point major cycles", f64::NAN))
}

fn combine(points: &[Vector], corral: &[usize], weights: &[f64]) -> Vector {
    let mut x = Vector::zeros(points[0].dim());
    for (&i, &w) in corral.iter().zip(weights) {
        x = x.add_scaled(w, &points[i]);
    }
    x
}

fn renormalize(weights: &mut [f64]) {
    let s: f64 = weights.iter().sum();
    if s > 0.0 {
        for w in weights.iter_mut() {
            *w /= s;
        }
    }
}

fn finish(points: &[Vector], corral: &[usize], weights: &[f64]) -> MinNormPoint {
    let point = combine(points, corral, weights);
    let mut coefficients = vec![0.0; points.len()];
    for (&i, &w) in corral.iter().zip(weights) {
        coefficients[i] += w;
    }
    MinNormPoint { distance: point.norm2(), point, coefficients }
}

/// Minimizer of `||sum alpha_i p_i||` subject to `sum alpha_i = 1` over the
/// affine hull of the corral, from the bordered Gram system.
fn affine_minimizer(points: &[Vector], corral: &[usize]) -> Option<Vec<f64>> {
    let m = corral.len();
    let mut a = vec![vec![0.0; m + 1]; m + 1];
    let mut b = vec![0.0; m + 1];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = points[corral[i]].dot(&points[corral[j]]);
        }
        a[i][m] = 1.0;
        a[m][i] = 1.0;
    }
    b[m] = 1.0;
    let sol = linalg::solve_dense(a, b, 1e-13)?;
    Some(sol[..m].to_vec())
}

/// Tuning for [`project_polyhedron`].
#[derive(Clone, Copy, Debug)]
pub struct ProjectionConfig {
    /// Constraint-violation tolerance at the returned point.
    pub tol: f64,
    /// Maximum number of full Dykstra cycles.
    pub max_iter: usize,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 100_000 }
    }
}

/// Result of projecting a point onto a polyhedron.
#[derive(Clone, Debug)]
pub enum PolyProjection {
    Point(ProjectedPoint),
    /// The polyhedron is empty; callers treat the distance as `+inf`.
    Empty,
}

#[derive(Clone, Debug)]
pub struct ProjectedPoint {
    pub point: Vector,
    pub distance: f64,
    /// True when the active-set polish verified the KKT conditions, making
    /// the distance exact to roundoff rather than to the iteration tolerance.
    pub certified: bool,
}

/// Euclidean projection of `x` onto `p`.
///
/// The workhorse is a dual active-set iteration: the set of tight rows grows
/// one most-violated row at a time while every multiplier is kept
/// nonnegative, so the first iterate feasible for the whole system satisfies
/// the KKT conditions of the projection problem and is exact to roundoff.  A
/// violated row that turns out to be a nonpositive combination of the tight
/// rows is a Farkas certificate of emptiness; emptiness is never inferred
/// from iteration behavior alone but always confirmed by a feasibility
/// program before being reported.  If the active-set iteration stalls, a
/// cyclic Dykstra loop with periodic KKT polish finishes the job, returning
/// an uncertified point when only tolerance-level accuracy was reached.
pub fn project_polyhedron(
    x: &Vector,
    p: &Polyhedron,
    cfg: &ProjectionConfig,
) -> Result<PolyProjection> {
    if x.dim() != p.dim() {
        return Err(Error::invalid_input("point and polyhedron dimensions differ"));
    }
    if p.max_violation(x) <= 0.0 {
        return Ok(PolyProjection::Point(ProjectedPoint {
            point: x.clone(),
            distance: 0.0,
            certified: true,
        }));
    }

    let scale = 1.0 + x.norm2();
    let row_sq: Vec<f64> = p.rows().iter().map(|(a, _)| a.dot(a)).collect();
    if row_sq.iter().any(|&s| s == 0.0) {
        // A zero row is either vacuous (b >= 0) or makes the set empty.
        let mut rows = Vec::new();
        for (a, b) in p.rows() {
            if a.dot(a) == 0.0 {
                if *b < 0.0 {
                    return Ok(PolyProjection::Empty);
                }
            } else {
                rows.push((a.clone(), *b));
            }
        }
        if rows.is_empty() {
            return Ok(PolyProjection::Point(ProjectedPoint {
                point: x.clone(),
                distance: 0.0,
                certified: true,
            }));
        }
        let reduced = Polyhedron::new(rows)?;
        return project_polyhedron(x, &reduced, cfg);
    }

    match dual_active_set(x, p) {
        DualOutcome::Optimal(done) => return Ok(PolyProjection::Point(done)),
        DualOutcome::Inconsistent | DualOutcome::Stuck => {
            if !polyhedron_feasible(p)? {
                return Ok(PolyProjection::Empty);
            }
        }
    }

    // Fallback for the rare stall on a nonempty set: cyclic Dykstra with
    // periodic exact polish.
    let mut y = x.clone();
    let mut corrections: Vec<Vector> = vec![Vector::zeros(x.dim()); p.rows().len()];
    let mut stagnant_cycles = 0usize;

    for cycle in 1..=cfg.max_iter {
        let before = y.clone();
        for (r, (a, b)) in p.rows().iter().enumerate() {
            let z = &y + &corrections[r];
            let over = z.dot(a) - b;
            let projected =
                if over > 0.0 { z.add_scaled(-over / row_sq[r], a) } else { z.clone() };
            corrections[r] = &z - &projected;
            y = projected;
        }
        let displacement = (&y - &before).norm2();
        let violation = p.max_violation(&y);

        let try_polish = cycle % 200 == 0
            || cycle <= 3
            || (violation <= cfg.tol && displacement <= cfg.tol);
        if try_polish {
            if let Some(done) = polish_projection(x, p, &y, scale) {
                return Ok(PolyProjection::Point(done));
            }
        }
        if violation <= cfg.tol && displacement <= cfg.tol {
            return Ok(PolyProjection::Point(ProjectedPoint {
                distance: (x - &y).norm2(),
                point: y,
                certified: false,
            }));
        }
        // The set is known nonempty, so stagnation only means slow
        // convergence; settle for the best point at hand.
        if displacement <= 1e-13 * scale {
            stagnant_cycles += 1;
            if stagnant_cycles >= 8 {
                break;
            }
        } else {
            stagnant_cycles = 0;
        }
    }
    if let Some(done) = polish_projection(x, p, &y, scale) {
        return Ok(PolyProjection::Point(done));
    }
    let violation = p.max_violation(&y);
    if violation <= 1e-7 * scale {
        return Ok(PolyProjection::Point(ProjectedPoint {
            distance: (x - &y).norm2(),
            point: y,
            certified: false,
        }));
    }
    Err(Error::numeric("projection failed to converge", violation))
}

/// Feasibility of `{a . y <= b}` by a linear program over `y = w+ - w-`.
fn polyhedron_feasible(p: &Polyhedron) -> Result<bool> {
    let n = p.dim();
    let rows = p
        .rows()
        .iter()
        .map(|(a, b)| {
            let mut coef = Vec::with_capacity(2 * n);
            coef.extend_from_slice(a.coords());
            coef.extend(a.coords().iter().map(|c| -c));
            (coef, Relation::Le, *b)
        })
        .collect();
    let lp = LinearProgram { objective: vec![0.0; 2 * n], rows };
    Ok(!matches!(crate::lp::solve(&lp)?, LpOutcome::Infeasible))
}

enum DualOutcome {
    /// KKT-verified projection.
    Optimal(ProjectedPoint),
    /// A violated row is a nonpositive combination of the tight rows, which
    /// certifies the system inconsistent up to the roundoff of that
    /// combination; callers confirm with a feasibility program.
    Inconsistent,
    /// Budget exhausted or a degenerate solve; callers fall back.
    Stuck,
}

/// Dual active-set projection onto an intersection of halfspaces.
///
/// Invariants across iterations: `active` is an independent set of row
/// indices, `lambda` is nonnegative and supported on `active`, and `z` is
/// the equality projection of `x` onto the rows of `active`, i.e.
/// `z = x - sum lambda_i a_i` with every active row tight.  Each round adds
/// the most violated row; multiplier sign repair walks toward the new
/// equality projection, dropping rows whose multipliers would cross zero,
/// and a dependent entering row either trades against positive multipliers
/// or certifies inconsistency.
fn dual_active_set(x: &Vector, p: &Polyhedron) -> DualOutcome {
    let m = p.rows().len();
    let scale = 1.0 + x.norm2();
    let feas: Vec<f64> =
        p.rows().iter().map(|(a, _)| 1e-9 * scale * (1.0 + a.norm2())).collect();
    let mut active: Vec<usize> = Vec::new();
    let mut lambda = vec![0.0_f64; m];
    let mut z = x.clone();

    for _ in 0..(14 * m + 60) {
        let mut enter: Option<(usize, f64)> = None;
        for (i, (a, b)) in p.rows().iter().enumerate() {
            let v = a.dot(&z) - b;
            if v > feas[i] && enter.as_ref().map_or(true, |&(_, best)| v > best) {
                enter = Some((i, v));
            }
        }
        let Some((e, _)) = enter else {
            return DualOutcome::Optimal(ProjectedPoint {
                distance: (x - &z).norm2(),
                point: z,
                certified: true,
            });
        };
        if active.contains(&e) {
            // A tight row re-violating means roundoff drift; don't loop on it.
            return DualOutcome::Stuck;
        }

        // Add `e`, trading against tight rows while it stays dependent.
        let mut entered = false;
        for _ in 0..=m {
            let mut cand = active.clone();
            cand.push(e);
            let rows: Vec<Vec<f64>> =
                cand.iter().map(|&i| p.rows()[i].0.coords().to_vec()).collect();
            let rhs: Vec<f64> = cand.iter().map(|&i| p.rows()[i].1).collect();
            let Some((point, mult, kept)) =
                linalg::project_onto_affine_kept(x.coords(), &rows, &rhs)
            else {
                return DualOutcome::Stuck;
            };
            if kept.len() == cand.len() {
                // Sign repair: walk from the current multipliers toward the
                // candidate ones, dropping the first multiplier to cross
                // zero, until the equality projection has a nonnegative set.
                match repair_signs(x, p, &mut cand, point, mult, &mut lambda) {
                    Some(new_z) => {
                        z = new_z;
                        active = cand;
                        entered = true;
                    }
                    None => return DualOutcome::Stuck,
                }
                break;
            }
            // `e` depends on the tight rows: express it there and run a dual
            // ratio test.  No positive coefficient to trade against means
            // the violated row contradicts the tight ones outright.
            let gram: Vec<Vec<f64>> = active
                .iter()
                .map(|&i| active.iter().map(|&j| p.rows()[i].0.dot(&p.rows()[j].0)).collect())
                .collect();
            let rhs_c: Vec<f64> =
                active.iter().map(|&i| p.rows()[i].0.dot(&p.rows()[e].0)).collect();
            let Some(c) = linalg::solve_dense(gram, rhs_c, 1e-12) else {
                return DualOutcome::Stuck;
            };
            let mut block: Option<(usize, f64)> = None;
            for (k, &ck) in c.iter().enumerate() {
                if ck > 1e-12 {
                    let t = lambda[active[k]] / ck;
                    if block.as_ref().map_or(true, |&(_, bt)| t < bt) {
                        block = Some((k, t));
                    }
                }
            }
            let Some((bk, t)) = block else {
                return DualOutcome::Inconsistent;
            };
            for (k, &i) in active.iter().enumerate() {
                lambda[i] = (lambda[i] - t * c[k]).max(0.0);
            }
            lambda[active[bk]] = 0.0;
            active.remove(bk);
        }
        if !entered {
            return DualOutcome::Stuck;
        }
    }
    DualOutcome::Stuck
}

/// The multiplier sign-repair loop of the dual active-set iteration.
///
/// `cand` holds the tentative tight set whose equality projection is
/// `(point, mult)`; `lambda` holds the current nonnegative multipliers.  On
/// success the accepted multipliers are stored into `lambda`, `cand` is the
/// final tight set, and the equality projection is returned.
fn repair_signs(
    x: &Vector,
    p: &Polyhedron,
    cand: &mut Vec<usize>,
    point: Vec<f64>,
    mult: Vec<f64>,
    lambda: &mut [f64],
) -> Option<Vector> {
    let mut point = point;
    let mut mult = mult;
    loop {
        let mscale = 1.0 + mult.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if mult.iter().all(|&l| l >= -1e-12 * mscale) {
            for (k, &i) in cand.iter().enumerate() {
                lambda[i] = mult[k].max(0.0);
            }
            return Some(Vector { coords: point });
        }
        // Largest step toward the candidate multipliers that keeps every
        // current multiplier nonnegative; the first to cross zero leaves.
        let mut alpha = 1.0_f64;
        let mut blocker: Option<usize> = None;
        for (k, &i) in cand.iter().enumerate() {
            if mult[k] < 0.0 {
                let cur = lambda[i];
                let step = cur / (cur - mult[k]);
                if step < alpha {
                    alpha = step;
                    blocker = Some(k);
                }
            }
        }
        let bk = blocker?;
        for (k, &i) in cand.iter().enumerate() {
            lambda[i] = (lambda[i] + alpha * (mult[k] - lambda[i])).max(0.0);
        }
        lambda[cand[bk]] = 0.0;
        cand.remove(bk);
        if cand.is_empty() {
            return Some(x.clone());
        }
        let rows: Vec<Vec<f64>> =
            cand.iter().map(|&i| p.rows()[i].0.coords().to_vec()).collect();
        let rhs: Vec<f64> = cand.iter().map(|&i| p.rows()[i].1).collect();
        let (new_point, new_mult, kept) =
            linalg::project_onto_affine_kept(x.coords(), &rows, &rhs)?;
        if kept.len() != cand.len() {
            // Removing a row cannot make the rest dependent; bail out if
            // roundoff says otherwise.
            return None;
        }
        point = new_point;
        mult = new_mult;
    }
}

/// Attempts an exact projection from the rows nearly active at `y`.
///
/// The candidate set is refined the standard way: rows with negative
/// multipliers are dropped, newly violated rows are added, and success means
/// the KKT conditions of the projection problem hold to roundoff.
fn polish_projection(
    x: &Vector,
    p: &Polyhedron,
    y: &Vector,
    scale: f64,
) -> Option<ProjectedPoint> {
    let feas_tol = 1e-9 * scale;
    for tau in [1e-3 * scale, 1e-5 * scale, 1e-7 * scale] {
        let mut active: Vec<usize> = p
            .rows()
            .iter()
            .enumerate()
            .filter(|(_, (a, b))| a.dot(y) - b >= -tau)
            .map(|(i, _)| i)
            .collect();
        if active.is_empty() {
            continue;
        }
        for _ in 0..(2 * p.rows().len() + 4) {
            let rows: Vec<Vec<f64>> = active
                .iter()
                .map(|&i| p.rows()[i].0.coords().to_vec())
                .collect();
            let rhs: Vec<f64> = active.iter().map(|&i| p.rows()[i].1).collect();
            let (point, lambda) = linalg::project_onto_affine(x.coords(), &rows, &rhs)?;

            if let Some(worst) = lambda
                .iter()
                .enumerate()
                .filter(|(_, &l)| l < -1e-10)
                .min_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
                .map(|(k, _)| k)
            {
                active.remove(worst);
                if active.is_empty() {
                    break;
                }
                continue;
            }

            let z = Vector { coords: point };
            let (violated, amount) = p
                .rows()
                .iter()
                .enumerate()
                .map(|(i, (a, b))| (i, a.dot(&z) - b))
                .max_by(|(_, u), (_, v)| u.partial_cmp(v).unwrap())
                .unwrap();
            if amount <= feas_tol {
                return Some(ProjectedPoint {
                    distance: (x - &z).norm2(),
                    point: z,
                    certified: true,
                });
            }
            if active.contains(&violated) {
                break;
            }
            active.push(violated);
        }
    }
    None
}
