//! Minimizing directional derivatives over the unit sphere.
//!
//! The central quantity is `phi(x) = inf { d+f(x, h) : ||h|| = 1 }`, the
//! steepest one-sided slope of `f` at `x`.  Its sign sorts boundary points:
//! a negative value certifies descent into the solution set at a definite
//! rate, zero flags a flat direction, and a positive value at a boundary
//! point forces the solution set to be the singleton `{x}`.
//!
//! For a max-affine function the directional derivative is
//! `max_t <a_t, h>` over the active rows, so `phi` is a minimax over the
//! sphere of the active gradients.  In the Euclidean norm that minimax is
//! exactly minus the distance from the origin to the convex hull of the
//! gradients whenever that distance is positive — the min-norm point both
//! certifies the value and produces the minimizing direction.  When the
//! hull contains the origin the sphere minimum is nonnegative; the plane
//! case falls back to an exact sweep of the finitely many candidate
//! directions, and everything else is handled by seeded sampling with a
//! subgradient polish, reported as uncertified.

use crate::convex::{ConvexFunction, QuotientSchedule, dirderiv_numeric};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::geometry::{min_norm_point, NormSpec, Vector};
use crate::sample;

/// How a sphere minimum was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SphereMinMethod {
    /// Euclidean min-norm-point duality; exact.
    ExactMinNorm,
    /// Exhaustive sweep of the finitely many candidate directions (the
    /// plane case and the two-point sphere in dimension one); exact.
    AngularSweep,
    /// Seeded sampling of the unit sphere with local polish; heuristic.
    Grid,
    /// Multiple seeded starts of projected subgradient descent; heuristic.
    Multistart,
}

impl SphereMinMethod {
    pub fn name(self) -> &'static str {
        match self {
            SphereMinMethod::ExactMinNorm => "exact-minnorm",
            SphereMinMethod::AngularSweep => "angular-sweep",
            SphereMinMethod::Grid => "grid",
            SphereMinMethod::Multistart => "multistart",
        }
    }
}

/// A sphere minimum with its minimizer and certification status.
///
/// `certified` means the value is exact up to roundoff; uncertified values
/// are upper bounds (some unit direction attains them, but a smaller one
/// may have been missed).
#[derive(Clone, Debug)]
pub struct SphereMinResult {
    pub value: f64,
    pub argmin: Vector,
    pub method: SphereMinMethod,
    pub certified: bool,
}

fn support_value(gradients: &[Vector], h: &Vector) -> f64 {
    gradients.iter().map(|a| a.dot(h)).fold(f64::NEG_INFINITY, f64::max)
}

/// Minimizes `max_t <a_t, h>` over the unit sphere of `norm`.
///
/// The seed only affects the heuristic paths; exact paths ignore it.
pub fn sphere_min_over_set(
    gradients: &[Vector],
    norm: NormSpec,
    seed: u64,
) -> Result<SphereMinResult> {
    if gradients.is_empty() {
        return Err(Error::invalid_input("sphere minimization needs at least one gradient"));
    }
    let dim = gradients[0].dim();
    if gradients.iter().any(|a| a.dim() != dim) {
        return Err(Error::invalid_input("gradients must share one dimension"));
    }

    // Dimension one: the unit sphere is {-1, +1} in every norm.
    if dim == 1 {
        let plus = support_value(gradients, &Vector::from_slice(&[1.0]));
        let minus = support_value(gradients, &Vector::from_slice(&[-1.0]));
        let (value, argmin) = if plus <= minus {
            (plus, Vector::from_slice(&[1.0]))
        } else {
            (minus, Vector::from_slice(&[-1.0]))
        };
        return Ok(SphereMinResult {
            value,
            argmin,
            method: SphereMinMethod::AngularSweep,
            certified: true,
        });
    }

    match norm {
        NormSpec::Euclidean => {
            let scale = gradients.iter().map(Vector::norm2).fold(0.0, f64::max);
            let mnp = min_norm_point(gradients)?;
            if mnp.distance > 1e-9 * (1.0 + scale) {
                // The origin lies outside the hull: the minimum is minus the
                // hull distance, attained opposite the min-norm point.
                let argmin = mnp.point.scale(-1.0 / mnp.distance);
                return Ok(SphereMinResult {
                    value: -mnp.distance,
                    argmin,
                    method: SphereMinMethod::ExactMinNorm,
                    certified: true,
                });
            }
            if dim == 2 {
                return Ok(planar_sweep(gradients));
            }
            Ok(heuristic_min(gradients, norm, seed, SphereMinMethod::Multistart))
        }
        NormSpec::Sup | NormSpec::One => {
            Ok(heuristic_min(gradients, norm, seed, SphereMinMethod::Grid))
        }
    }
}

/// Exact sweep in the plane.  On each arc of the Euclidean circle where one
/// row attains the maximum the objective is a cosine, so the minimum over
/// the circle lands either on a stationary point of a single row (the
/// direction opposite its gradient) or on an arc endpoint, where two rows
/// tie (a direction perpendicular to their difference).  Sweeping that
/// finite candidate list is exhaustive.
fn planar_sweep(gradients: &[Vector]) -> SphereMinResult {
    let mut candidates: Vec<Vector> = vec![
        Vector::from_slice(&[1.0, 0.0]),
        Vector::from_slice(&[-1.0, 0.0]),
        Vector::from_slice(&[0.0, 1.0]),
        Vector::from_slice(&[0.0, -1.0]),
    ];
    let tiny = 1e-14;
    for a in gradients {
        let n = a.norm2();
        if n > tiny {
            candidates.push(a.scale(1.0 / n));
            candidates.push(a.scale(-1.0 / n));
        }
    }
    for (i, ai) in gradients.iter().enumerate() {
        for aj in &gradients[i + 1..] {
            let d = ai - aj;
            let perp = Vector::from_slice(&[-d.coords()[1], d.coords()[0]]);
            let n = perp.norm2();
            if n > tiny {
                candidates.push(perp.scale(1.0 / n));
                candidates.push(perp.scale(-1.0 / n));
            }
        }
    }
    let mut best_value = f64::INFINITY;
    let mut best = candidates[0].clone();
    for h in candidates {
        let v = support_value(gradients, &h);
        if v < best_value {
            best_value = v;
            best = h;
        }
    }
    SphereMinResult {
        value: best_value,
        argmin: best,
        method: SphereMinMethod::AngularSweep,
        certified: true,
    }
}

/// Seeded sampling plus projected-subgradient polish; an upper bound only.
fn heuristic_min(
    gradients: &[Vector],
    norm: NormSpec,
    seed: u64,
    method: SphereMinMethod,
) -> SphereMinResult {
    let dim = gradients[0].dim();
    let scale = 1.0 + gradients.iter().map(Vector::norm2).fold(0.0, f64::max);
    let mut candidates: Vec<Vector> = Vec::new();
    for i in 0..dim {
        candidates.push(Vector::unit(dim, i));
        candidates.push(-&Vector::unit(dim, i));
    }
    for a in gradients {
        let n = norm.norm(a);
        if n > 1e-14 {
            candidates.push(a.scale(1.0 / n));
            candidates.push(a.scale(-1.0 / n));
        }
    }
    let mut rng = sample::rng_from(seed);
    let random_count = 256 + 64 * dim;
    for _ in 0..random_count {
        candidates.push(sample::unit_sphere(norm, dim, &mut rng));
    }

    let mut scored: Vec<(f64, Vector)> =
        candidates.into_iter().map(|h| (support_value(gradients, &h), h)).collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

    let mut best_value = scored[0].0;
    let mut best = scored[0].1.clone();
    for (_, start) in scored.into_iter().take(16) {
        let mut h = start;
        for k in 0..300 {
            // Subgradient of the support function: the argmax gradient.
            let mut top = f64::NEG_INFINITY;
            let mut g = &gradients[0];
            for a in gradients {
                let v = a.dot(&h);
                if v > top {
                    top = v;
                    g = a;
                }
            }
            if top < best_value {
                best_value = top;
                best = h.clone();
            }
            let step = 0.4 / ((1.0 + k as f64).sqrt() * scale);
            let moved = h.add_scaled(-step, g);
            let n = norm.norm(&moved);
            if n <= 1e-12 {
                break;
            }
            h = moved.scale(1.0 / n);
        }
        let v = support_value(gradients, &h);
        if v < best_value {
            best_value = v;
            best = h;
        }
    }
    SphereMinResult { value: best_value, argmin: best, method, certified: false }
}

/// `phi(x)`: the minimum of `d+f(x, .)` over the unit sphere of `f`'s norm.
///
/// Max-affine functions reduce to [`sphere_min_over_set`] on the active
/// gradients; the named one-dimensional functions compare their two
/// one-sided derivatives exactly; custom evaluators fall back to numeric
/// difference quotients on seeded directions and report uncertified.
pub fn phi(f: &ConvexFunction, x: &Vector, seed: u64) -> Result<SphereMinResult> {
    if x.dim() != f.dim() {
        return Err(Error::invalid_input("point dimension mismatch"));
    }
    if let Some(sys) = f.as_system() {
        let gradients = sys.active_gradients(x, None);
        return sphere_min_over_set(&gradients, sys.norm(), seed);
    }
    if let Some(s) = f.as_scalar() {
        let x0 = x.coords()[0];
        let forward = s.derivative_plus(x0);
        let backward = -s.derivative_minus(x0);
        let (value, argmin) = if forward <= backward {
            (forward, Vector::from_slice(&[1.0]))
        } else {
            (backward, Vector::from_slice(&[-1.0]))
        };
        return Ok(SphereMinResult {
            value,
            argmin,
            method: SphereMinMethod::AngularSweep,
            certified: true,
        });
    }
    phi_sampled_custom(f, x, seed)
}

fn phi_sampled_custom(f: &ConvexFunction, x: &Vector, seed: u64) -> Result<SphereMinResult> {
    let dim = f.dim();
    let norm = f.norm();
    let mut directions: Vec<Vector> = Vec::new();
    for i in 0..dim {
        let e = Vector::unit(dim, i);
        let n = norm.norm(&e);
        directions.push(e.scale(1.0 / n));
        directions.push(e.scale(-1.0 / n));
    }
    let mut rng = sample::rng_from(seed);
    for _ in 0..(128 + 32 * dim) {
        directions.push(sample::unit_sphere(norm, dim, &mut rng));
    }
    let schedule = QuotientSchedule::default();
    let mut best: Option<(f64, Vector)> = None;
    let mut evaluated = 0usize;
    for h in directions {
        match dirderiv_numeric(f, x, &h, &schedule) {
            Ok(nd) => {
                evaluated += 1;
                if let ExtReal::Finite(v) = nd.value {
                    if best.as_ref().map_or(true, |(b, _)| v < *b) {
                        best = Some((v, h));
                    }
                }
            }
            Err(_) => continue,
        }
    }
    match best {
        Some((value, argmin)) => Ok(SphereMinResult {
            value,
            argmin,
            method: SphereMinMethod::Grid,
            certified: false,
        }),
        None if evaluated > 0 => Err(Error::not_applicable(
            "the directional derivative is +inf in every sampled direction",
        )),
        None => Err(Error::inconclusive(
            "no sampled difference quotient converged",
        )),
    }
}

/// Independent grid estimate of `phi(x)` from numeric difference quotients
/// only — no exact derivative formulas — for cross-checking the kernels.
pub fn phi_grid_oracle(
    f: &ConvexFunction,
    x: &Vector,
    resolution: usize,
    seed: u64,
) -> Result<f64> {
    if x.dim() != f.dim() {
        return Err(Error::invalid_input("point dimension mismatch"));
    }
    let dim = f.dim();
    let norm = f.norm();
    let mut directions: Vec<Vector> = Vec::new();
    if dim == 2 && norm == NormSpec::Euclidean {
        let n = resolution.max(16);
        for k in 0..n {
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
            directions.push(Vector::from_slice(&[theta.cos(), theta.sin()]));
        }
    } else {
        for i in 0..dim {
            let e = Vector::unit(dim, i);
            let nn = norm.norm(&e);
            directions.push(e.scale(1.0 / nn));
            directions.push(e.scale(-1.0 / nn));
        }
        let mut rng = sample::rng_from(seed);
        for _ in 0..resolution.max(16) {
            directions.push(sample::unit_sphere(norm, dim, &mut rng));
        }
    }
    let schedule = QuotientSchedule::default();
    let mut best: Option<f64> = None;
    for h in &directions {
        if let Ok(nd) = dirderiv_numeric(f, x, h, &schedule) {
            if let ExtReal::Finite(v) = nd.value {
                if best.map_or(true, |b| v < b) {
                    best = Some(v);
                }
            }
        }
    }
    best.ok_or_else(|| Error::inconclusive("no grid direction produced a converged quotient"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{AffineRow, MaxAffineSystem};

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
    fn single_gradient_gives_minus_its_norm() {
        let r = sphere_min_over_set(&[v(&[1.0, 1.0])], NormSpec::Euclidean, 1).unwrap();
        assert!(r.certified);
        assert_eq!(r.method, SphereMinMethod::ExactMinNorm);
        assert!((r.value + 2f64.sqrt()).abs() < 1e-12);
        let expected = v(&[-1.0, -1.0]).scale(1.0 / 2f64.sqrt());
        assert!((&r.argmin - &expected).norm2() < 1e-12);
    }

    #[test]
    fn opposing_gradients_reach_zero_exactly() {
        let r = sphere_min_over_set(
            &[v(&[1.0, 1.0]), v(&[-1.0, -1.0])],
            NormSpec::Euclidean,
            1,
        )
        .unwrap();
        assert!(r.certified);
        assert_eq!(r.method, SphereMinMethod::AngularSweep);
        assert_eq!(r.value, 0.0);
        // The minimizer is orthogonal to the shared gradient line.
        assert!(r.argmin.dot(&v(&[1.0, 1.0])).abs() < 1e-12);
    }

    #[test]
    fn phi_on_triangle_boundary_point() {
        let f = ConvexFunction::from_system(triangle());
        let r = phi(&f, &v(&[0.0, 1.0]), 7).unwrap();
        assert!(r.certified);
        assert!((r.value + 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn scalar_phi_values() {
        let exp = ConvexFunction::named("exp_minus_one").unwrap();
        let r = phi(&exp, &v(&[0.0]), 1).unwrap();
        assert!(r.certified);
        assert!((r.value + 1.0).abs() < 1e-15);
        assert_eq!(r.argmin.coords(), &[-1.0]);

        // |x| at the origin descends in no direction: phi = +1, so the
        // solution set must be the singleton {0}.
        let abs = ConvexFunction::named("abs").unwrap();
        let r = phi(&abs, &v(&[0.0]), 1).unwrap();
        assert_eq!(r.value, 1.0);

        let zero = ConvexFunction::named("zero").unwrap();
        assert_eq!(phi(&zero, &v(&[0.0]), 1).unwrap().value, 0.0);
    }

    #[test]
    fn multistart_approximates_known_three_dim_minimum() {
        // Gradients +-e_i: the support function is max_i |h_i|, minimized on
        // the Euclidean sphere at the diagonals with value 1/sqrt(3).
        let grads = vec![
            Vector::unit(3, 0),
            -&Vector::unit(3, 0),
            Vector::unit(3, 1),
            -&Vector::unit(3, 1),
            Vector::unit(3, 2),
            -&Vector::unit(3, 2),
        ];
        let r = sphere_min_over_set(&grads, NormSpec::Euclidean, 42).unwrap();
        assert!(!r.certified);
        assert_eq!(r.method, SphereMinMethod::Multistart);
        let target = 1.0 / 3f64.sqrt();
        // Upper bound always; close on this smooth instance.
        assert!(r.value >= target - 1e-12);
        assert!(r.value <= target + 5e-3, "value {} vs {}", r.value, target);
    }

    #[test]
    fn sup_norm_path_finds_axis_minimum() {
        let r = sphere_min_over_set(&[v(&[1.0, 0.0])], NormSpec::Sup, 3).unwrap();
        assert!(!r.certified);
        // Candidates include the normalized negated gradient, so the exact
        // minimum -1 (any sup-unit h with h_1 = -1) is reached.
        assert!((r.value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_oracle_tracks_exact_phi() {
        let f = ConvexFunction::from_system(triangle());
        let x = v(&[0.0, 1.0]);
        let exact = phi(&f, &x, 7).unwrap().value;
        let est = phi_grid_oracle(&f, &x, 512, 7).unwrap();
        assert!(est >= exact - 1e-9);
        assert!(est <= exact + 1e-3, "oracle {est} vs exact {exact}");
    }
}
