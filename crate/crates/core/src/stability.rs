//! Stability of error bounds under tilt perturbations.
//!
//! A convex inequality `f(x) <= 0` has a stable error bound at a zero-level
//! anchor exactly when the sphere-minimized directional derivative does not
//! vanish there; globally, the modulus survives small tilts exactly when the
//! same quantity is bounded away from zero along the boundary and along any
//! flat reaches of the interior.  This module turns those dichotomies into
//! verdicts with certificates: exact catalogs for max-affine systems, exact
//! slope limits for the named scalar functions, and sampled necessary checks
//! elsewhere.  When a verdict is unstable, `destabilizer_search` produces the
//! collapse constructively — a tilt of magnitude `eps` together with a
//! witness where the perturbed function is nearly flat.

use crate::convex::{ConvexFunction, MaxAffineSystem, ScalarFunction, ScalarKind, ScalarLevelSet};
use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::hoffman;
use crate::lp::{self, LinearProgram, LpOutcome, Relation};
use crate::patterns;
use crate::sample;
use crate::sphere;

/// Whether a certificate speaks about one anchor or the whole boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilityScope {
    Point,
    Global,
}

impl StabilityScope {
    pub fn name(self) -> &'static str {
        match self {
            StabilityScope::Point => "point",
            StabilityScope::Global => "global",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilityVerdict {
    Stable,
    Unstable,
    Inconclusive,
}

impl StabilityVerdict {
    pub fn name(self) -> &'static str {
        match self {
            StabilityVerdict::Stable => "stable",
            StabilityVerdict::Unstable => "unstable",
            StabilityVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// One member of the linear perturbation family
/// `g = f + magnitude * <direction, . - anchor>`.
#[derive(Clone, Debug)]
pub struct TiltSpec {
    pub anchor: Vector,
    /// Tilt direction; must lie in the dual unit ball.
    pub direction: Vector,
    pub magnitude: f64,
}

/// A point backing a verdict, with the sphere minimum observed there and the
/// tilt under which it was observed (none for the unperturbed function).
#[derive(Clone, Debug)]
pub struct WitnessRecord {
    pub point: Vector,
    pub phi_value: f64,
    pub tilt: Option<TiltSpec>,
}

#[derive(Clone, Debug)]
pub struct StabilityCertificate {
    pub scope: StabilityScope,
    pub verdict: StabilityVerdict,
    /// Certified stability level: the margin by which the relevant sphere
    /// minima clear zero.
    pub tau: Option<f64>,
    pub phi_at_anchor: Option<f64>,
    pub min_phi_over_boundary: Option<f64>,
    pub witnesses: Vec<WitnessRecord>,
    pub notes: Vec<String>,
}

/// Seeded sampler for extra zero-level points beyond the catalog witnesses.
#[derive(Clone, Copy, Debug)]
pub struct BoundarySampler {
    pub seed: u64,
    pub count: usize,
}

impl Default for BoundarySampler {
    fn default() -> Self {
        BoundarySampler { seed: 42, count: 64 }
    }
}

/// The default instability tolerance: sphere minima within this band of
/// zero count as vanishing.
pub fn instability_tol(f: &ConvexFunction, at: &Vector) -> f64 {
    1e-7 * f.gradient_scale(at)
}

/// The tilted function described by `spec`.
///
/// Validates the spec's invariant (the direction lies in the dual unit
/// ball); the anchor may be any point — tilts anchored off the zero level
/// are still well-defined functions, they just leave the anchored
/// perturbation class.
pub fn tilt(f: &ConvexFunction, spec: &TiltSpec) -> Result<ConvexFunction> {
    let dual = f.norm().dual();
    let dnorm = dual.norm(&spec.direction);
    if dnorm > 1.0 + 1e-12 {
        return Err(Error::invalid_input(format!(
            "the tilt direction must lie in the dual unit ball; its dual norm is {dnorm}"
        )));
    }
    f.tilted(&spec.direction, spec.magnitude, &spec.anchor)
}

/// Decides stability of the local error bound at a zero-level anchor.
///
/// The dichotomy is exact: the bound is stable under every small tilt when
/// the sphere minimum of the directional derivative is nonzero at the
/// anchor, and destructible when it vanishes.  A certified nonzero value of
/// magnitude `gamma` additionally guarantees the constant `gamma - eps`
/// for every tilt of magnitude `eps < gamma`.
pub fn point_stability(
    f: &ConvexFunction,
    anchor: &Vector,
    tol: Option<f64>,
) -> Result<StabilityCertificate> {
    let fx = f.value_finite(anchor)?;
    let scale = f.gradient_scale(anchor);
    if fx.abs() > 1e-9 * scale * (1.0 + anchor.norm2()) {
        return Err(Error::invalid_input(format!(
            "the anchor must lie on the zero level; f(anchor) = {fx:.3e}"
        )));
    }
    let tol = tol.unwrap_or_else(|| instability_tol(f, anchor));
    let phi = sphere::phi(f, anchor, 0)?;
    let mut notes = Vec::new();
    let mut witnesses = Vec::new();

    let (verdict, tau) = if phi.certified {
        if phi.value.abs() > tol {
            notes.push(format!(
                "certified: every tilt of magnitude eps < {:.6e} keeps a local error bound \
                 with constant at least {:.6e} - eps",
                phi.value.abs(),
                phi.value.abs()
            ));
            (StabilityVerdict::Stable, Some(phi.value.abs()))
        } else {
            notes.push(
                "certified: the sphere-minimized directional derivative vanishes at the anchor, \
                 so arbitrarily small tilts destroy the local error bound"
                    .to_string(),
            );
            witnesses.push(WitnessRecord {
                point: anchor.clone(),
                phi_value: phi.value,
                tilt: None,
            });
            (StabilityVerdict::Unstable, None)
        }
    } else if phi.value <= -tol {
        notes.push(format!(
            "sampled estimate only: the true sphere minimum is at most {:.6e}, \
             so its magnitude is at least {:.6e}",
            phi.value,
            phi.value.abs()
        ));
        (StabilityVerdict::Stable, Some(phi.value.abs()))
    } else {
        notes.push(
            "the sphere minimum is uncertified and not clearly negative; no verdict".to_string(),
        );
        (StabilityVerdict::Inconclusive, None)
    };

    Ok(StabilityCertificate {
        scope: StabilityScope::Point,
        verdict,
        tau,
        phi_at_anchor: Some(phi.value),
        min_phi_over_boundary: None,
        witnesses,
        notes,
    })
}

/// Zero-level points of the named scalar function: the finite interval
/// endpoints, plus one representative when the function vanishes on a whole
/// ray or on the whole line.
fn scalar_zero_level_points(sc: &ScalarFunction) -> Vec<f64> {
    let mut pts = sc.boundary_points();
    match sc.kind() {
        ScalarKind::Zero if sc.slope() == 0.0 && sc.offset() == 0.0 => pts.push(0.0),
        ScalarKind::Abs if sc.offset() == 0.0 && sc.slope() == 1.0 => pts.push(-1.0),
        ScalarKind::Abs if sc.offset() == 0.0 && sc.slope() == -1.0 => pts.push(1.0),
        _ => {}
    }
    pts.sort_by(|a, b| a.partial_cmp(b).expect("zero-level points are finite"));
    pts.dedup();
    pts
}

/// Emits zero-level points: every catalog witness plus seeded jitter within
/// each witness's facet, each verified to keep the facet's active set; for
/// named scalar functions, the interval endpoints.
pub fn boundary_points(f: &ConvexFunction, sampler: &BoundarySampler) -> Result<Vec<Vector>> {
    if let Some(sys) = f.as_system() {
        let catalog = hoffman::enumerate_active_sets(sys, None)?;
        let mut points = Vec::new();
        let per_entry = if catalog.entries.is_empty() {
            0
        } else {
            sampler.count / catalog.entries.len() + 1
        };
        for (i, entry) in catalog.entries.iter().enumerate() {
            points.push(entry.witness.clone());
            let rows: Vec<Vec<f64>> = entry
                .labels
                .iter()
                .map(|label| {
                    sys.rows()
                        .iter()
                        .find(|r| &r.label == label)
                        .expect("catalog labels come from the system")
                        .gradient
                        .coords()
                        .to_vec()
                })
                .collect();
            let tangent = patterns::orthonormal_nullspace(sys.dim(), &rows);
            if tangent.is_empty() {
                continue;
            }
            let mut rng = sample::rng_from(sample::mix(sampler.seed, i as u64));
            let step = 1e-4 * (1.0 + entry.witness.norm2());
            for _ in 0..per_entry {
                let coeffs = sample::gaussian_vector(&mut rng, tangent.len());
                let mut delta = vec![0.0; sys.dim()];
                for (c, basis) in coeffs.coords().iter().zip(&tangent) {
                    for (d, b) in delta.iter_mut().zip(basis) {
                        *d += c * b;
                    }
                }
                let delta = Vector::from_slice(&delta);
                let n = delta.norm2();
                if n < 1e-12 {
                    continue;
                }
                let candidate = entry.witness.add_scaled(step / n, &delta);
                let on_level = sys.value(&candidate).abs()
                    <= 1e-9 * (1.0 + sys.gradient_scale()) * (1.0 + candidate.norm2());
                if on_level && sys.active_labels(&candidate, None) == entry.labels {
                    points.push(candidate);
                }
            }
        }
        Ok(points)
    } else if let Some(sc) = f.as_scalar() {
        Ok(scalar_zero_level_points(sc)
            .into_iter()
            .map(|p| Vector::from_slice(&[p]))
            .collect())
    } else {
        Err(Error::not_applicable(
            "boundary enumeration requires a max-affine system or a named scalar function",
        ))
    }
}

/// The infimum of `|phi|` over the zero level, with per-point witnesses.
#[derive(Clone, Debug)]
pub struct BoundaryFloor {
    pub min_abs_phi: f64,
    /// True when every contributing sphere minimum was certified.
    pub exact: bool,
    pub witnesses: Vec<WitnessRecord>,
    pub notes: Vec<String>,
}

/// The boundary half of the global stability test: the infimum of `|phi|`
/// over zero-level points.  Exact for max-affine systems (the sphere
/// minimum depends only on the active set, and the realizable active sets
/// form a finite catalog) and for named scalar functions (finitely many
/// zero-level structures).
pub fn boundary_phi_floor(f: &ConvexFunction, _sampler: &BoundarySampler) -> Result<BoundaryFloor> {
    if let Some(sys) = f.as_system() {
        let catalog = hoffman::enumerate_active_sets(sys, None)?;
        if catalog.entries.is_empty() {
            return Err(Error::not_applicable(
                "the zero level is empty; the boundary condition is vacuous",
            ));
        }
        let witnesses: Vec<WitnessRecord> = catalog
            .entries
            .iter()
            .map(|e| WitnessRecord {
                point: e.witness.clone(),
                phi_value: e.op_value,
                tilt: None,
            })
            .collect();
        let min_abs_phi = catalog
            .entries
            .iter()
            .map(|e| e.op_value.abs())
            .fold(f64::INFINITY, f64::min);
        let exact = catalog.fully_certified();
        let notes = vec![format!(
            "exact over {} realizable active sets",
            catalog.entries.len()
        )];
        Ok(BoundaryFloor { min_abs_phi, exact, witnesses, notes })
    } else if let Some(sc) = f.as_scalar() {
        let pts = scalar_zero_level_points(sc);
        if pts.is_empty() {
            return Err(Error::not_applicable(
                "the zero level is empty; the boundary condition is vacuous",
            ));
        }
        let mut witnesses = Vec::new();
        let mut exact = true;
        for p in pts {
            let point = Vector::from_slice(&[p]);
            let phi = sphere::phi(f, &point, 0)?;
            exact = exact && phi.certified;
            witnesses.push(WitnessRecord { point, phi_value: phi.value, tilt: None });
        }
        let min_abs_phi = witnesses
            .iter()
            .map(|w| w.phi_value.abs())
            .fold(f64::INFINITY, f64::min);
        let notes = vec![format!("exact over {} zero-level points", witnesses.len())];
        Ok(BoundaryFloor { min_abs_phi, exact, witnesses, notes })
    } else {
        Err(Error::not_applicable(
            "the boundary floor requires a max-affine system or a named scalar function",
        ))
    }
}

/// An interior point where `|phi|` drops below a target level.
#[derive(Clone, Debug)]
pub struct TierWitness {
    /// The level the witness undercuts.
    pub target: f64,
    pub point: Vector,
    pub phi: f64,
}

/// Outcome of the interior flatness check.
#[derive(Clone, Debug)]
pub struct InteriorCheck {
    /// Whether interior sphere minima stay at the boundary level.
    pub holds: bool,
    /// True when the verdict comes from an exact finite reduction rather
    /// than sampling.
    pub exact: bool,
    /// The interior floor: the infimum of `|phi|` over flat reaches of the
    /// strict interior (`None` when no admissible sequences exist).
    pub mu_interior: Option<f64>,
    pub witnesses: Vec<TierWitness>,
    pub notes: Vec<String>,
}

/// Slope levels at which failing sequences are exhibited.
const SLOPE_TIERS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

/// The interior half of the global stability test.
///
/// The dangerous sequences are strict-interior points whose
/// residual-to-boundary slope drains to zero; along such a sequence the
/// sphere minimum must not drop below the boundary level `tau`.  For
/// max-affine systems this reduces exactly: slopes can only drain along
/// recession directions of an unbounded solution set, and the sphere
/// minimum at an interior point depends only on its argmax pattern, of
/// which finitely many are realizable.  For named scalar functions the
/// tail slopes are closed-form.  Anything else gets a seeded necessary
/// check, labeled as such.
pub fn interior_flatness_check(
    f: &ConvexFunction,
    tau: f64,
    seed: u64,
) -> Result<InteriorCheck> {
    if let Some(sys) = f.as_system() {
        interior_check_polyhedral(sys, tau)
    } else if let Some(sc) = f.as_scalar() {
        interior_check_scalar(f, sc, tau)
    } else {
        interior_check_sampled(f, tau, seed)
    }
}

fn interior_check_polyhedral(sys: &MaxAffineSystem, tau: f64) -> Result<InteriorCheck> {
    let rows_as_pairs: Vec<(Vec<f64>, f64)> = sys
        .rows()
        .iter()
        .map(|r| (r.gradient.coords().to_vec(), r.offset))
        .collect();
    if patterns::strict_solution(sys.dim(), &[], &rows_as_pairs)?.is_none() {
        return Ok(InteriorCheck {
            holds: true,
            exact: true,
            mu_interior: None,
            witnesses: Vec::new(),
            notes: vec!["the solution set has empty interior; the condition is vacuous".into()],
        });
    }
    if cone_direction(sys, &[])?.is_none() {
        return Ok(InteriorCheck {
            holds: true,
            exact: true,
            mu_interior: None,
            witnesses: Vec::new(),
            notes: vec![
                "the solution set is bounded: residual-to-boundary slopes stay bounded \
                 away from zero, so no admissible sequences exist"
                    .into(),
            ],
        });
    }

    // Unbounded with interior: enumerate the argmax patterns realizable at
    // strictly interior points via one lifted strict-feasibility question
    // per pattern (last coordinate = the common row value, forced negative).
    let t = sys.rows().len();
    let dim = sys.dim();
    let mut realized: Vec<(Vec<String>, Vector, f64, bool)> = Vec::new();
    let mut notes = Vec::new();
    let mut examined = 0usize;
    'sizes: for k in 1..=t {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            if examined >= hoffman::ENUMERATION_CAP {
                notes.push("pattern enumeration truncated; the check may be incomplete".into());
                break 'sizes;
            }
            examined += 1;
            let in_combo = |r: usize| combo.binary_search(&r).is_ok();
            let lift = |r: usize| -> Vec<f64> {
                let mut v = sys.rows()[r].gradient.coords().to_vec();
                v.push(-1.0);
                v
            };
            let equalities: Vec<(Vec<f64>, f64)> =
                combo.iter().map(|&r| (lift(r), sys.rows()[r].offset)).collect();
            let mut inequalities: Vec<(Vec<f64>, f64)> = (0..t)
                .filter(|&r| !in_combo(r))
                .map(|r| (lift(r), sys.rows()[r].offset))
                .collect();
            let mut negative_value = vec![0.0; dim];
            negative_value.push(1.0);
            inequalities.push((negative_value, 0.0));
            if let Some(w) = patterns::strict_solution(dim + 1, &equalities, &inequalities)? {
                let gradients: Vec<Vector> =
                    combo.iter().map(|&r| sys.rows()[r].gradient.clone()).collect();
                let op = sphere::sphere_min_over_set(&gradients, sys.norm(), 0)?;
                realized.push((
                    combo.iter().map(|&r| sys.rows()[r].label.clone()).collect(),
                    Vector::from_slice(&w.point[..dim]),
                    op.value,
                    op.certified,
                ));
            }
            if !hoffman::next_combination(&mut combo, t) {
                break;
            }
        }
    }

    let mu = realized
        .iter()
        .map(|(_, _, op, _)| op.abs())
        .fold(f64::INFINITY, f64::min);
    let exact = realized.iter().all(|(_, _, _, certified)| *certified);
    let holds = mu >= tau - 1e-6;
    let mut witnesses = Vec::new();
    for (labels, point, op, _) in &realized {
        if op.abs() < tau - 1e-6 {
            notes.push(format!(
                "pattern {{{}}} is realizable at strictly interior points with \
                 sphere minimum {:.6e}",
                labels.join(","),
                op
            ));
            witnesses.push(TierWitness { target: tau, point: point.clone(), phi: *op });
        }
    }
    witnesses.sort_by(|a, b| {
        a.phi.abs().partial_cmp(&b.phi.abs()).expect("sphere minima are finite")
    });
    notes.insert(
        0,
        format!("{} interior argmax patterns realizable (exact reduction)", realized.len()),
    );
    Ok(InteriorCheck {
        holds,
        exact,
        mu_interior: if realized.is_empty() { None } else { Some(mu) },
        witnesses,
        notes,
    })
}

/// The unbounded tail on which a proper interval's function goes flat, if
/// one exists: the side's slope limit is zero while the values stay
/// strictly negative.
struct FlatTail {
    /// True when the tail extends to `-inf`.
    leftward: bool,
    /// The interval's finite endpoint, which anchors destabilizing tilts.
    endpoint: f64,
}

fn scalar_flat_tail(sc: &ScalarFunction) -> Option<FlatTail> {
    match sc.level_set() {
        ScalarLevelSet::Empty => None,
        ScalarLevelSet::Interval { lo: None, hi: Some(h) } => {
            let slope = sc.limit_slope_left().unwrap_or(f64::NEG_INFINITY);
            (slope.abs() <= 1e-12 && sc.value(h - 64.0) < -1e-12)
                .then_some(FlatTail { leftward: true, endpoint: h })
        }
        ScalarLevelSet::Interval { lo: Some(l), hi: None } => match sc.limit_slope_right() {
            Some(slope) if slope.abs() <= 1e-12 && sc.value(l + 64.0) < -1e-12 => {
                Some(FlatTail { leftward: false, endpoint: l })
            }
            _ => None,
        },
        ScalarLevelSet::Interval { .. } => None,
    }
}

fn interior_check_scalar(
    f: &ConvexFunction,
    sc: &ScalarFunction,
    tau: f64,
) -> Result<InteriorCheck> {
    let (lo, hi) = match sc.level_set() {
        ScalarLevelSet::Empty => {
            return Err(Error::invalid_input("the solution set is empty"));
        }
        ScalarLevelSet::Interval { lo, hi } => (lo, hi),
    };
    if lo.is_none() && hi.is_none() {
        return Ok(InteriorCheck {
            holds: true,
            exact: true,
            mu_interior: None,
            witnesses: Vec::new(),
            notes: vec![
                "the solution set is the whole line, so there are no boundary points to pair \
                 with; the condition is vacuous"
                    .into(),
            ],
        });
    }
    if let (Some(l), Some(h)) = (lo, hi) {
        let mid = 0.5 * (l + h);
        if h - l <= 0.0 || sc.value(mid) >= -1e-12 {
            return Ok(InteriorCheck {
                holds: true,
                exact: true,
                mu_interior: None,
                witnesses: Vec::new(),
                notes: vec!["the strict interior is empty; the condition is vacuous".into()],
            });
        }
    }

    if let Some(tail) = scalar_flat_tail(sc) {
        let side = if tail.leftward { -1.0 } else { 1.0 };
        let mut witnesses = Vec::new();
        let mut notes = vec![format!(
            "the function flattens along the unbounded {} tail while staying negative",
            if tail.leftward { "left" } else { "right" }
        )];
        for tier in SLOPE_TIERS {
            let mut found = false;
            for k in 0..=60u32 {
                let z = tail.endpoint + side * f64::from(2u32).powi(k as i32);
                let point = Vector::from_slice(&[z]);
                if sc.value(z) >= -1e-12 {
                    continue;
                }
                let phi = sphere::phi(f, &point, 0)?;
                if phi.value.abs() <= tier {
                    witnesses.push(TierWitness { target: tier, point, phi: phi.value });
                    found = true;
                    break;
                }
            }
            if !found {
                notes.push(format!(
                    "no witness reached the {tier:.0e} tier within the doubling budget"
                ));
            }
        }
        notes.push(format!(
            "the interior sphere minima drain to zero, below the boundary level {tau:.6e}"
        ));
        return Ok(InteriorCheck {
            holds: false,
            exact: true,
            mu_interior: Some(0.0),
            witnesses,
            notes,
        });
    }

    // No flat tail: any unbounded side keeps a nonzero limit slope (or
    // diverges), so slopes cannot drain to zero.
    let mut side_floors = Vec::new();
    if lo.is_none() {
        if let Some(slope) = sc.limit_slope_left() {
            side_floors.push(slope.abs());
        }
    }
    if hi.is_none() {
        if let Some(slope) = sc.limit_slope_right() {
            side_floors.push(slope.abs());
        }
    }
    let mu = side_floors.iter().copied().fold(f64::INFINITY, f64::min);
    let (mu_interior, note) = if side_floors.is_empty() {
        (
            None,
            "the solution interval is bounded (or its tails diverge); no admissible \
             sequences exist"
                .to_string(),
        )
    } else {
        (
            Some(mu),
            format!("unbounded tail slopes stay at magnitude {mu:.6e}"),
        )
    };
    Ok(InteriorCheck {
        holds: true,
        exact: true,
        mu_interior,
        witnesses: Vec::new(),
        notes: vec![note],
    })
}

fn interior_check_sampled(f: &ConvexFunction, tau: f64, seed: u64) -> Result<InteriorCheck> {
    let dim = f.dim();
    let mut best: Option<(f64, Vector)> = None;
    let mut admitted = 0usize;
    for (i, radius) in [1.0, 10.0, 100.0].into_iter().enumerate() {
        let mut rng = sample::rng_from(sample::mix(seed, i as u64));
        for _ in 0..64 {
            let x = sample::in_ball(&Vector::zeros(dim), radius, &mut rng);
            let fx = match f.value(&x)? {
                crate::ext::ExtReal::Finite(v) => v,
                crate::ext::ExtReal::PosInf => continue,
            };
            if fx >= -1e-9 {
                continue;
            }
            let phi = match sphere::phi(f, &x, sample::mix(seed, 0xF1A7)) {
                Ok(p) => p,
                Err(_) => continue,
            };
            admitted += 1;
            if best.as_ref().map_or(true, |(b, _)| phi.value.abs() < *b) {
                best = Some((phi.value.abs(), x));
            }
        }
    }
    let mut notes =
        vec!["sampled necessary check: no certificate for non-polyhedral functions".to_string()];
    match best {
        Some((mu, point)) if mu < tau - 1e-6 => {
            notes.push(format!(
                "a sampled interior point has sphere-minimum magnitude {mu:.6e}, \
                 below the boundary level {tau:.6e}"
            ));
            let phi = sphere::phi(f, &point, sample::mix(seed, 0xF1A7))?;
            Ok(InteriorCheck {
                holds: false,
                exact: false,
                mu_interior: Some(mu),
                witnesses: vec![TierWitness { target: tau, point, phi: phi.value }],
                notes,
            })
        }
        Some((mu, _)) => {
            notes.push(format!(
                "{admitted} sampled interior points all kept sphere-minimum magnitude \
                 at least {mu:.6e}"
            ));
            Ok(InteriorCheck {
                holds: true,
                exact: false,
                mu_interior: Some(mu),
                witnesses: Vec::new(),
                notes,
            })
        }
        None => {
            notes.push("no strictly interior samples were found".to_string());
            Ok(InteriorCheck {
                holds: true,
                exact: false,
                mu_interior: None,
                witnesses: Vec::new(),
                notes,
            })
        }
    }
}

/// A nonzero direction of the cone `{d : <a_t, d> <= 0 for all t, with
/// equality on `equal_rows`}`, or `None` when the cone is `{0}`.
///
/// With no equality rows this decides whether the solution set is
/// unbounded; with a catalog entry's rows it finds a ray along which that
/// facet recedes.
fn cone_direction(sys: &MaxAffineSystem, equal_rows: &[usize]) -> Result<Option<Vector>> {
    let dim = sys.dim();
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    // Shift d = w - 1 into the nonnegative orthant with the box |d| <= 1.
    for (t, row) in sys.rows().iter().enumerate() {
        let a = row.gradient.coords();
        let total: f64 = a.iter().sum();
        let relation = if equal_rows.contains(&t) { Relation::Eq } else { Relation::Le };
        rows.push((a.to_vec(), relation, total));
    }
    for j in 0..dim {
        let mut e = vec![0.0; dim];
        e[j] = 1.0;
        rows.push((e, Relation::Le, 2.0));
    }
    for i in 0..dim {
        for sign in [1.0, -1.0] {
            let mut objective = vec![0.0; dim];
            objective[i] = sign;
            let outcome = lp::solve(&LinearProgram { objective, rows: rows.clone() })?;
            match outcome {
                LpOutcome::Optimal { x: w, value } => {
                    if value - sign > 1e-6 {
                        let d: Vec<f64> = w.iter().map(|v| v - 1.0).collect();
                        return Ok(Some(Vector::from_slice(&d)));
                    }
                }
                _ => {
                    return Err(Error::numeric(
                        "the recession-cone program must be feasible and bounded",
                        f64::NAN,
                    ))
                }
            }
        }
    }
    Ok(None)
}

/// A global verdict together with the two condition reports behind it.
#[derive(Clone, Debug)]
pub struct GlobalStabilityReport {
    pub certificate: StabilityCertificate,
    pub boundary: Option<BoundaryFloor>,
    pub interior: Option<InteriorCheck>,
}

/// Decides stability of the global error bound.
///
/// The certified stability level is the smaller of the boundary floor and
/// the interior floor; the verdict is stable exactly when that level clears
/// the instability tolerance.  An empty zero level (the inequality holds
/// strictly everywhere) leaves no anchor for the tilt family, so the
/// verdict is vacuously stable.
pub fn global_stability(f: &ConvexFunction, seed: u64) -> Result<GlobalStabilityReport> {
    if f.as_system().is_none() && f.as_scalar().is_none() {
        return Ok(GlobalStabilityReport {
            certificate: StabilityCertificate {
                scope: StabilityScope::Global,
                verdict: StabilityVerdict::Inconclusive,
                tau: None,
                phi_at_anchor: None,
                min_phi_over_boundary: None,
                witnesses: Vec::new(),
                notes: vec![
                    "global analysis requires a max-affine system or a named scalar function"
                        .into(),
                ],
            },
            boundary: None,
            interior: None,
        });
    }
    let sampler = BoundarySampler { seed, ..BoundarySampler::default() };
    let floor = match boundary_phi_floor(f, &sampler) {
        Ok(floor) => floor,
        Err(Error::NotApplicable(msg)) => {
            return Ok(GlobalStabilityReport {
                certificate: StabilityCertificate {
                    scope: StabilityScope::Global,
                    verdict: StabilityVerdict::Stable,
                    tau: None,
                    phi_at_anchor: None,
                    min_phi_over_boundary: None,
                    witnesses: Vec::new(),
                    notes: vec![
                        msg,
                        "no zero-level anchors exist, so the tilt perturbation family is \
                         empty and stability holds vacuously"
                            .into(),
                    ],
                },
                boundary: None,
                interior: None,
            });
        }
        Err(e) => return Err(e),
    };

    let check = interior_flatness_check(f, floor.min_abs_phi, seed)?;
    let reference = floor
        .witnesses
        .first()
        .map(|w| w.point.clone())
        .unwrap_or_else(|| Vector::zeros(f.dim()));
    let tol = instability_tol(f, &reference);
    let tau_boundary = floor.min_abs_phi;
    let tau_star = match check.mu_interior {
        Some(mu) => tau_boundary.min(mu),
        None => tau_boundary,
    };
    let exact = floor.exact && check.exact;

    let mut notes = Vec::new();
    notes.push(format!("boundary floor {tau_boundary:.6e}"));
    match check.mu_interior {
        Some(mu) => notes.push(format!("interior floor {mu:.6e}")),
        None => notes.push("interior condition vacuous".to_string()),
    }
    if !check.holds && tau_star > tol {
        notes.push(
            "the interior floor sits below the boundary floor; the certified stability \
             level is the interior floor"
                .to_string(),
        );
    }

    let mut witnesses = Vec::new();
    let verdict = if !exact {
        notes.push("a contributing check was estimate-only; no certified verdict".to_string());
        StabilityVerdict::Inconclusive
    } else if tau_star > tol {
        notes.push(format!(
            "every tilt of magnitude eps < {tau_star:.6e} keeps a global error bound"
        ));
        StabilityVerdict::Stable
    } else {
        if tau_boundary <= tol {
            if let Some(weakest) = floor
                .witnesses
                .iter()
                .min_by(|a, b| {
                    a.phi_value
                        .abs()
                        .partial_cmp(&b.phi_value.abs())
                        .expect("sphere minima are finite")
                })
            {
                witnesses.push(weakest.clone());
                notes.push(
                    "the sphere minimum vanishes at a zero-level point; arbitrarily small \
                     tilts destroy the bound"
                        .to_string(),
                );
            }
        }
        for w in &check.witnesses {
            witnesses.push(WitnessRecord {
                point: w.point.clone(),
                phi_value: w.phi,
                tilt: None,
            });
        }
        if tau_boundary > tol {
            notes.push(
                "the boundary floor is positive but interior sphere minima drain to zero \
                 along an unbounded flat reach"
                    .to_string(),
            );
        }
        StabilityVerdict::Unstable
    };

    Ok(GlobalStabilityReport {
        certificate: StabilityCertificate {
            scope: StabilityScope::Global,
            verdict,
            tau: (verdict == StabilityVerdict::Stable).then_some(tau_star),
            phi_at_anchor: None,
            min_phi_over_boundary: Some(tau_boundary),
            witnesses,
            notes,
        },
        boundary: Some(floor),
        interior: Some(check),
    })
}

/// How a destabilizer demonstrates the collapse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DestabilizerMode {
    /// A flat direction at one anchor; the witness sits on the ray along it.
    Point,
    /// A sequence escaping along a flat reach; the witness is one deep
    /// member of it.
    Sequence,
}

impl DestabilizerMode {
    pub fn name(self) -> &'static str {
        match self {
            DestabilizerMode::Point => "point",
            DestabilizerMode::Sequence => "sequence",
        }
    }

    /// The guaranteed ceiling on `-phi` at the witness, as a multiple of
    /// the tilt magnitude.
    pub fn guarantee_factor(self) -> f64 {
        match self {
            DestabilizerMode::Point => 5.0,
            DestabilizerMode::Sequence => 2.0,
        }
    }
}

/// A constructive instability proof: a tilt of magnitude `eps` and a point
/// where the tilted function is positive yet nearly flat.
#[derive(Clone, Debug)]
pub struct Destabilizer {
    pub tilt: TiltSpec,
    pub perturbed: ConvexFunction,
    pub witness: Vector,
    /// Sphere minimum of the perturbed function at the witness; its negative
    /// is at most `guarantee_factor * eps + 1e-6`.
    pub phi_at_witness: f64,
    pub mode: DestabilizerMode,
    pub notes: Vec<String>,
}

/// Constructs a destabilizing tilt of magnitude `eps`.
///
/// With an anchor, requires instability there and tilts along the norming
/// functional of the flat direction, then line-searches the ray for a
/// witness with `-phi <= 5*eps + 1e-6`.  Without an anchor, finds the
/// failing part of the global test: a vanishing boundary floor reduces to
/// the point case at the weakest witness, and a flat interior reach gets a
/// far-anchored tilt whose witness satisfies `-phi <= 2*eps + 1e-6`.
pub fn destabilizer_search(
    f: &ConvexFunction,
    anchor: Option<&Vector>,
    eps: f64,
) -> Result<Destabilizer> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::invalid_input("the tilt magnitude must be positive and finite"));
    }
    if let Some(x) = anchor {
        return destabilize_point(f, x, eps);
    }
    let report = global_stability(f, 0)?;
    match report.certificate.verdict {
        StabilityVerdict::Stable => Err(Error::not_applicable(
            "the error bound is stable; no tilt in this class destroys it",
        )),
        StabilityVerdict::Inconclusive => Err(Error::inconclusive(
            "the global stability test was inconclusive, so no failing direction is known",
        )),
        StabilityVerdict::Unstable => {
            let floor = report.boundary.as_ref().expect("unstable verdicts carry a floor");
            let reference = floor
                .witnesses
                .first()
                .map(|w| w.point.clone())
                .unwrap_or_else(|| Vector::zeros(f.dim()));
            if floor.min_abs_phi <= instability_tol(f, &reference) {
                let weakest = floor
                    .witnesses
                    .iter()
                    .min_by(|a, b| {
                        a.phi_value
                            .abs()
                            .partial_cmp(&b.phi_value.abs())
                            .expect("sphere minima are finite")
                    })
                    .expect("a nonempty floor has witnesses");
                return destabilize_point(f, &weakest.point, eps);
            }
            let check = report.interior.as_ref().expect("unstable verdicts carry the check");
            if let Some(sc) = f.as_scalar() {
                destabilize_scalar_tail(f, sc, eps)
            } else if let Some(sys) = f.as_system() {
                destabilize_flat_reach(f, sys, check, eps)
            } else {
                Err(Error::not_applicable(
                    "no constructive destabilizer exists for this representation",
                ))
            }
        }
    }
}

fn destabilize_point(f: &ConvexFunction, anchor: &Vector, eps: f64) -> Result<Destabilizer> {
    let cert = point_stability(f, anchor, None)?;
    match cert.verdict {
        StabilityVerdict::Stable => {
            return Err(Error::not_applicable(
                "no near-flat direction exists: the anchor is stable",
            ));
        }
        StabilityVerdict::Inconclusive => {
            return Err(Error::inconclusive(
                "the sphere minimum at the anchor is uncertified and not clearly negative",
            ));
        }
        StabilityVerdict::Unstable => {}
    }
    let phi = sphere::phi(f, anchor, 0)?;
    let h = phi.argmin.clone();
    let h_star = f.norm().norming_functional(&h)?;
    let spec = TiltSpec { anchor: anchor.clone(), direction: h_star, magnitude: eps };
    let g = tilt(f, &spec)?;

    let threshold = 5.0 * eps + 1e-6;
    let s0 = 1.0 + anchor.norm2();
    let mut steps: Vec<f64> = (0..=20).map(|k| s0 * f64::from(2u32).powi(k)).collect();
    steps.extend((1..=40).map(|k| s0 / f64::from(2u32).powi(k)));
    for s in steps {
        let z = anchor.add_scaled(s, &h);
        let gz = match g.value(&z)? {
            crate::ext::ExtReal::Finite(v) => v,
            crate::ext::ExtReal::PosInf => continue,
        };
        if gz <= 0.0 {
            continue;
        }
        let phi_g = match sphere::phi(&g, &z, 0) {
            Ok(p) => p,
            Err(_) => continue,
        };
        if -phi_g.value <= threshold {
            let notes = vec![
                format!(
                    "flat direction with directional derivative {:.3e} at the anchor",
                    phi.value
                ),
                format!("witness at step {s:.6e} along the flat direction"),
                format!("-phi at the witness is {:.6e} <= 5*eps + 1e-6", -phi_g.value),
            ];
            return Ok(Destabilizer {
                tilt: spec,
                perturbed: g,
                witness: z,
                phi_at_witness: phi_g.value,
                mode: DestabilizerMode::Point,
                notes,
            });
        }
    }
    Err(Error::inconclusive(
        "the witness line search exhausted its step budget without reaching the guarantee",
    ))
}

fn destabilize_scalar_tail(
    f: &ConvexFunction,
    sc: &ScalarFunction,
    eps: f64,
) -> Result<Destabilizer> {
    let tail = scalar_flat_tail(sc).ok_or_else(|| {
        Error::not_applicable("the function has no flat unbounded tail to exploit")
    })?;
    let side = if tail.leftward { -1.0 } else { 1.0 };
    let spec = TiltSpec {
        anchor: Vector::from_slice(&[tail.endpoint]),
        direction: Vector::from_slice(&[side]),
        magnitude: eps,
    };
    let g = tilt(f, &spec)?;
    let threshold = 2.0 * eps + 1e-6;
    for k in 0..=60u32 {
        let z = tail.endpoint + side * f64::from(2u32).powi(k as i32);
        let point = Vector::from_slice(&[z]);
        let gz = g.value_finite(&point)?;
        if gz <= 0.0 {
            continue;
        }
        let phi_g = sphere::phi(&g, &point, 0)?;
        if -phi_g.value <= threshold {
            let notes = vec![
                format!(
                    "tail witness at {z:.6e} on the flat {} side",
                    if tail.leftward { "left" } else { "right" }
                ),
                format!("-phi at the witness is {:.6e} <= 2*eps + 1e-6", -phi_g.value),
            ];
            return Ok(Destabilizer {
                tilt: spec,
                perturbed: g,
                witness: point,
                phi_at_witness: phi_g.value,
                mode: DestabilizerMode::Sequence,
                notes,
            });
        }
    }
    Err(Error::inconclusive(
        "the tail search exhausted its doubling budget without reaching the guarantee",
    ))
}

fn destabilize_flat_reach(
    f: &ConvexFunction,
    sys: &MaxAffineSystem,
    check: &InteriorCheck,
    eps: f64,
) -> Result<Destabilizer> {
    let flat = check
        .witnesses
        .first()
        .ok_or_else(|| Error::inconclusive("the interior check recorded no flat witness"))?;
    let z = flat.point.clone();
    let fz = sys.value(&z);

    // A zero-level anchor far from the witness: march a catalog witness
    // along its facet's recession ray.  Tilting toward the witness from far
    // away adds nearly the same amount to every row at the witness, so its
    // argmax pattern — and hence the near-zero sphere minimum — survives,
    // shifted by at most eps.
    let catalog = hoffman::enumerate_active_sets(sys, None)?;
    let threshold = 2.0 * eps + 1e-6;
    let scale = 1.0 + sys.gradient_scale();
    for entry in &catalog.entries {
        let equal_rows: Vec<usize> = entry
            .labels
            .iter()
            .map(|label| {
                sys.rows()
                    .iter()
                    .position(|r| &r.label == label)
                    .expect("catalog labels come from the system")
            })
            .collect();
        let Some(ray) = cone_direction(sys, &equal_rows)? else {
            continue;
        };
        let ray = ray.scale(1.0 / ray.norm2());
        let mut reach = 2.0 * fz.abs() / eps + 1.0 + z.norm2() + entry.witness.norm2();
        for _ in 0..=20 {
            let anchor = entry.witness.add_scaled(reach, &ray);
            if sys.value(&anchor).abs() > 1e-9 * scale * (1.0 + anchor.norm2()) {
                break;
            }
            let toward = &z - &anchor;
            let direction = f.norm().norming_functional(&toward)?;
            let spec =
                TiltSpec { anchor: anchor.clone(), direction, magnitude: eps };
            let g = tilt(f, &spec)?;
            let gz = g.value_finite(&z)?;
            if gz > 0.0 {
                let phi_g = sphere::phi(&g, &z, 0)?;
                if -phi_g.value <= threshold {
                    let notes = vec![
                        format!(
                            "flat interior pattern with sphere minimum {:.3e}",
                            flat.phi
                        ),
                        format!("tilt anchored {reach:.3e} away along a facet recession ray"),
                        format!(
                            "-phi at the witness is {:.6e} <= 2*eps + 1e-6",
                            -phi_g.value
                        ),
                    ];
                    return Ok(Destabilizer {
                        tilt: spec,
                        perturbed: g,
                        witness: z,
                        phi_at_witness: phi_g.value,
                        mode: DestabilizerMode::Sequence,
                        notes,
                    });
                }
            }
            reach *= 2.0;
        }
    }
    Err(Error::inconclusive(
        "no facet recession ray produced a far anchor within the search budget",
    ))
}

/// The affine part of `g - f` when that difference is exactly affine:
/// `(delta, c)` with `g(x) - f(x) = <delta, x> + c`.
fn affine_difference(f: &ConvexFunction, g: &ConvexFunction) -> Option<(Vector, f64)> {
    if let (Some(fs), Some(gs)) = (f.as_system(), g.as_system()) {
        if fs.rows().len() != gs.rows().len() {
            return None;
        }
        let tol = 1e-9 * (1.0 + fs.gradient_scale().max(gs.gradient_scale()));
        let delta = &gs.rows()[0].gradient - &fs.rows()[0].gradient;
        let shift = gs.rows()[0].offset - fs.rows()[0].offset;
        for (rf, rg) in fs.rows().iter().zip(gs.rows()) {
            if rf.label != rg.label {
                return None;
            }
            let d = &rg.gradient - &rf.gradient;
            if (&d - &delta).norm2() > tol || (rg.offset - rf.offset - shift).abs() > tol {
                return None;
            }
        }
        Some((delta, -shift))
    } else if let (Some(fc), Some(gc)) = (f.as_scalar(), g.as_scalar()) {
        if fc.kind() != gc.kind() {
            return None;
        }
        Some((
            Vector::from_slice(&[gc.slope() - fc.slope()]),
            gc.offset() - fc.offset(),
        ))
    } else {
        None
    }
}

/// Checks by sampling that `g` stays within the `eps`-perturbation band of
/// `f` near the anchor: the difference quotient
/// `|(g - f)(x) - (g - f)(anchor)| / ||x - anchor||` must not exceed
/// `eps + 1e-6` on any sample.  When the difference is exactly affine the
/// analytic bound (the dual norm of its linear part) decides first.  A
/// `true` is a sampled verdict, not a proof.
pub fn eps_perturbation_check(
    f: &ConvexFunction,
    g: &ConvexFunction,
    anchor: &Vector,
    eps: f64,
    radii: &[f64],
    seed: u64,
    count: usize,
) -> Result<bool> {
    let f_anchor = f.value_finite(anchor)?;
    let g_anchor = g.value_finite(anchor)?;
    if f.dim() != g.dim() {
        return Err(Error::invalid_input("the two functions live in different dimensions"));
    }
    if let Some((delta, _)) = affine_difference(f, g) {
        if f.norm().dual().norm(&delta) > eps + 1e-6 {
            return Ok(false);
        }
    }
    let base = g_anchor - f_anchor;
    for (i, radius) in radii.iter().enumerate() {
        let mut rng = sample::rng_from(sample::mix(seed, i as u64));
        for _ in 0..count {
            let x = sample::in_ball(anchor, *radius, &mut rng);
            let dist = f.norm().norm(&(&x - anchor));
            if dist < 1e-12 {
                continue;
            }
            let fx = f.value(&x)?;
            let gx = g.value(&x)?;
            let quotient = match (fx, gx) {
                (crate::ext::ExtReal::Finite(a), crate::ext::ExtReal::Finite(b)) => {
                    ((b - a) - base).abs() / dist
                }
                (crate::ext::ExtReal::PosInf, crate::ext::ExtReal::PosInf) => continue,
                _ => return Ok(false),
            };
            if quotient > eps + 1e-6 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// An estimate of `Lip(g - f)`.
#[derive(Clone, Debug)]
pub struct LipEstimate {
    pub value: f64,
    /// True for analytically exact values (affine differences); false for
    /// sampled lower estimates.
    pub exact: bool,
    pub notes: Vec<String>,
}

/// The Lipschitz constant of `g - f`: exact (the dual norm of the linear
/// part) when the difference is affine, otherwise the largest sampled
/// difference quotient — a lower estimate, flagged as such.
pub fn lip_difference_estimate(
    f: &ConvexFunction,
    g: &ConvexFunction,
    seed: u64,
    count: usize,
) -> Result<LipEstimate> {
    if f.dim() != g.dim() {
        return Err(Error::invalid_input("the two functions live in different dimensions"));
    }
    if let Some((delta, _)) = affine_difference(f, g) {
        return Ok(LipEstimate {
            value: f.norm().dual().norm(&delta),
            exact: true,
            notes: vec!["analytic: the difference is affine".into()],
        });
    }
    let dim = f.dim();
    let mut points = Vec::new();
    for (i, radius) in [1.0, 10.0].into_iter().enumerate() {
        let mut rng = sample::rng_from(sample::mix(seed, i as u64));
        for _ in 0..count {
            let x = sample::in_ball(&Vector::zeros(dim), radius, &mut rng);
            if let (crate::ext::ExtReal::Finite(a), crate::ext::ExtReal::Finite(b)) =
                (f.value(&x)?, g.value(&x)?)
            {
                points.push((x, b - a));
            }
        }
    }
    if points.len() < 2 {
        return Err(Error::not_applicable(
            "too few points where both functions are finite",
        ));
    }
    let mut value: f64 = 0.0;
    for pair in points.windows(2) {
        let (xa, da) = &pair[0];
        let (xb, db) = &pair[1];
        let dist = f.norm().norm(&(xb - xa));
        if dist > 1e-9 {
            value = value.max((db - da).abs() / dist);
        }
    }
    Ok(LipEstimate {
        value,
        exact: false,
        notes: vec!["sampled lower estimate of the Lipschitz constant".into()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::AffineRow;
    use crate::ext::ExtReal;
    use crate::geometry::NormSpec;

    fn v(coords: &[f64]) -> Vector {
        Vector::from_slice(coords)
    }

    fn system(rows: Vec<AffineRow>) -> ConvexFunction {
        ConvexFunction::from_system(MaxAffineSystem::new(rows, NormSpec::Euclidean).unwrap())
    }

    fn triangle() -> ConvexFunction {
        system(vec![
            AffineRow::new("1", v(&[1.0, 1.0]), 1.0),
            AffineRow::new("2", v(&[-2.0, 1.0]), 2.0),
            AffineRow::new("3", v(&[1.0, -2.0]), 2.0),
        ])
    }

    fn opposing() -> ConvexFunction {
        system(vec![
            AffineRow::new("1", v(&[1.0, 1.0]), 0.0),
            AffineRow::new("2", v(&[-1.0, -1.0]), 0.0),
        ])
    }

    fn slab() -> ConvexFunction {
        system(vec![
            AffineRow::new("1", v(&[0.0, 1.0]), 0.0),
            AffineRow::new("2", v(&[0.0, -1.0]), 1.0),
        ])
    }

    fn halfspace() -> ConvexFunction {
        system(vec![AffineRow::new("1", v(&[3.0, 4.0]), 0.0)])
    }

    fn zero_fn() -> ConvexFunction {
        system(vec![AffineRow::new("1", v(&[0.0, 0.0]), 0.0)])
    }

    fn exp_fn() -> ConvexFunction {
        ConvexFunction::named("exp_minus_one").unwrap()
    }

    #[test]
    fn point_verdicts_cover_the_reference_anchors() {
        let stable = point_stability(&exp_fn(), &v(&[0.0]), None).unwrap();
        assert_eq!(stable.verdict, StabilityVerdict::Stable);
        assert!((stable.phi_at_anchor.unwrap() + 1.0).abs() < 1e-12);
        assert!((stable.tau.unwrap() - 1.0).abs() < 1e-12);

        let line = point_stability(&opposing(), &v(&[0.0, 0.0]), None).unwrap();
        assert_eq!(line.verdict, StabilityVerdict::Unstable);
        assert_eq!(line.phi_at_anchor, Some(0.0));

        let flat = point_stability(&zero_fn(), &v(&[0.0, 0.0]), None).unwrap();
        assert_eq!(flat.verdict, StabilityVerdict::Unstable);
        assert_eq!(flat.phi_at_anchor, Some(0.0));

        let vertex = point_stability(&triangle(), &v(&[0.0, 1.0]), None).unwrap();
        assert_eq!(vertex.verdict, StabilityVerdict::Stable);
        assert!((vertex.tau.unwrap() - 2f64.sqrt()).abs() < 1e-9);

        assert!(matches!(
            point_stability(&triangle(), &v(&[5.0, 5.0]), None),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn tilts_match_their_closed_forms() {
        let spec = TiltSpec {
            anchor: v(&[0.0]),
            direction: v(&[-1.0]),
            magnitude: 0.05,
        };
        let g = tilt(&exp_fn(), &spec).unwrap();
        for x in [-3.0f64, -1.0, 0.0, 0.5, 2.0] {
            let expected = x.exp_m1() - 0.05 * x;
            let got = g.value_finite(&v(&[x])).unwrap();
            assert!((got - expected).abs() < 1e-12);
        }

        let eps = 0.1;
        let spec = TiltSpec {
            anchor: v(&[0.0, 0.0]),
            direction: v(&[0.0, 1.0]),
            magnitude: eps,
        };
        let g = tilt(&opposing(), &spec).unwrap();
        let sys = g.as_system().unwrap();
        assert_eq!(sys.rows()[0].gradient.coords(), &[1.0, 1.0 + eps]);
        assert_eq!(sys.rows()[1].gradient.coords(), &[-1.0, -1.0 + eps]);
        assert_eq!(sys.rows()[0].offset, 0.0);
        assert_eq!(sys.rows()[1].offset, 0.0);

        let too_long = TiltSpec {
            anchor: v(&[0.0, 0.0]),
            direction: v(&[0.0, 2.0]),
            magnitude: 0.1,
        };
        assert!(tilt(&opposing(), &too_long).is_err());
    }

    #[test]
    fn boundary_floors_match_hand_calculations() {
        let sampler = BoundarySampler::default();
        let tri = boundary_phi_floor(&triangle(), &sampler).unwrap();
        assert!((tri.min_abs_phi - 0.5f64.sqrt()).abs() < 1e-9);
        assert!(tri.exact);
        assert_eq!(tri.witnesses.len(), 6);

        let line = boundary_phi_floor(&opposing(), &sampler).unwrap();
        assert_eq!(line.min_abs_phi, 0.0);

        let half = boundary_phi_floor(&halfspace(), &sampler).unwrap();
        assert!((half.min_abs_phi - 5.0).abs() < 1e-12);

        let exp = boundary_phi_floor(&exp_fn(), &sampler).unwrap();
        assert!((exp.min_abs_phi - 1.0).abs() < 1e-12);

        // Identically zero scalar: the whole line is zero level, floor 0.
        let zero_scalar = ConvexFunction::named("zero").unwrap();
        let z = boundary_phi_floor(&zero_scalar, &sampler).unwrap();
        assert_eq!(z.min_abs_phi, 0.0);

        // Strictly negative constant: no zero level at all.
        let negative = ConvexFunction::from_scalar(
            ScalarFunction::with_affine(ScalarKind::Zero, 0.0, -1.0).unwrap(),
        );
        assert!(matches!(
            boundary_phi_floor(&negative, &sampler),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn sampled_boundary_points_stay_on_their_facets() {
        let f = triangle();
        let sys = f.as_system().unwrap();
        let catalog = hoffman::enumerate_active_sets(sys, None).unwrap();
        let pts = boundary_points(&f, &BoundarySampler::default()).unwrap();
        assert!(pts.len() > 6, "jitter should add points on the edges");
        for p in &pts {
            assert!(sys.value(p).abs() < 1e-8);
            assert!(catalog.contains(&sys.active_labels(p, None)));
        }
    }

    #[test]
    fn interior_checks_cover_all_four_shapes() {
        // Bounded: vacuous.
        let tri = interior_flatness_check(&triangle(), 0.5f64.sqrt(), 0).unwrap();
        assert!(tri.holds && tri.exact);
        assert_eq!(tri.mu_interior, None);

        // Unbounded, single pattern at the boundary level.
        let half = interior_flatness_check(&halfspace(), 5.0, 0).unwrap();
        assert!(half.holds && half.exact);
        assert!((half.mu_interior.unwrap() - 5.0).abs() < 1e-9);

        // Unbounded slab: the two-row pattern is realizable inside and flat.
        let sl = interior_flatness_check(&slab(), 1.0, 0).unwrap();
        assert!(!sl.holds);
        assert!(sl.exact);
        assert!(sl.mu_interior.unwrap().abs() < 1e-12);
        let w = &sl.witnesses[0];
        assert!((w.point.coords()[1] + 0.5).abs() < 1e-6);

        // No interior at all.
        let line = interior_flatness_check(&opposing(), 0.0, 0).unwrap();
        assert!(line.holds);
        assert_eq!(line.mu_interior, None);

        // Scalar with a flat left tail: refuted with tier witnesses.
        let exp = interior_flatness_check(&exp_fn(), 1.0, 0).unwrap();
        assert!(!exp.holds && exp.exact);
        assert_eq!(exp.mu_interior, Some(0.0));
        assert_eq!(exp.witnesses.len(), SLOPE_TIERS.len());
        for (w, tier) in exp.witnesses.iter().zip(SLOPE_TIERS) {
            assert_eq!(w.target, tier);
            assert!(w.phi.abs() <= tier);
            let z = w.point.coords()[0];
            assert!((w.phi - (z.exp() - 1.0)).abs() < 1e-12 || w.phi.abs() <= tier);
        }
    }

    #[test]
    fn global_verdicts_cover_the_corpus() {
        let tri = global_stability(&triangle(), 42).unwrap();
        assert_eq!(tri.certificate.verdict, StabilityVerdict::Stable);
        assert!((tri.certificate.tau.unwrap() - 0.5f64.sqrt()).abs() < 1e-9);

        let half = global_stability(&halfspace(), 42).unwrap();
        assert_eq!(half.certificate.verdict, StabilityVerdict::Stable);
        assert!((half.certificate.tau.unwrap() - 5.0).abs() < 1e-9);

        let line = global_stability(&opposing(), 42).unwrap();
        assert_eq!(line.certificate.verdict, StabilityVerdict::Unstable);
        assert_eq!(line.certificate.min_phi_over_boundary, Some(0.0));

        let sl = global_stability(&slab(), 42).unwrap();
        assert_eq!(sl.certificate.verdict, StabilityVerdict::Unstable);
        assert!(sl.certificate.min_phi_over_boundary.unwrap() > 0.9);

        let exp = global_stability(&exp_fn(), 42).unwrap();
        assert_eq!(exp.certificate.verdict, StabilityVerdict::Unstable);
        assert!((exp.certificate.min_phi_over_boundary.unwrap() - 1.0).abs() < 1e-12);

        // The tilted exponential has a bounded solution interval, hence a
        // stable (if weak) global bound.
        let spec = TiltSpec {
            anchor: v(&[0.0]),
            direction: v(&[-1.0]),
            magnitude: 0.05,
        };
        let g = tilt(&exp_fn(), &spec).unwrap();
        let tilted = global_stability(&g, 42).unwrap();
        assert_eq!(tilted.certificate.verdict, StabilityVerdict::Stable);
        let tau = tilted.certificate.tau.unwrap();
        assert!(tau > 0.04 && tau <= 0.05 + 1e-9, "tau {tau}");

        let flat = global_stability(&zero_fn(), 42).unwrap();
        assert_eq!(flat.certificate.verdict, StabilityVerdict::Unstable);

        let negative = ConvexFunction::from_scalar(
            ScalarFunction::with_affine(ScalarKind::Zero, 0.0, -1.0).unwrap(),
        );
        let vacuous = global_stability(&negative, 42).unwrap();
        assert_eq!(vacuous.certificate.verdict, StabilityVerdict::Stable);
        assert_eq!(vacuous.certificate.tau, None);
    }

    #[test]
    fn destabilizer_point_mode_collapses_the_opposing_rows() {
        let eps = 0.1;
        let d = destabilizer_search(&opposing(), Some(&v(&[0.0, 0.0])), eps).unwrap();
        assert_eq!(d.mode, DestabilizerMode::Point);
        // The construction achieves -phi = eps exactly, well under 5*eps.
        assert!(-d.phi_at_witness <= 5.0 * eps + 1e-6);
        assert!(-d.phi_at_witness <= eps + 1e-9);
        assert!((-d.phi_at_witness - eps).abs() < 1e-9);
        let gz = d.perturbed.value_finite(&d.witness).unwrap();
        assert!(gz > 0.0);
        // The tilt direction is the unit normal of the flat direction,
        // orthogonal to the shared gradient line.
        assert!(d.tilt.direction.dot(&v(&[1.0, 1.0])).abs() < 1e-9);
        assert!((d.tilt.direction.norm2() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn destabilizer_point_mode_handles_the_zero_function() {
        let eps = 0.2;
        let d = destabilizer_search(&zero_fn(), Some(&v(&[0.0, 0.0])), eps).unwrap();
        assert_eq!(d.mode, DestabilizerMode::Point);
        assert!((-d.phi_at_witness - eps).abs() < 1e-12);
    }

    #[test]
    fn destabilizer_sequence_mode_walks_the_exponential_tail() {
        let eps = 0.1;
        let d = destabilizer_search(&exp_fn(), None, eps).unwrap();
        assert_eq!(d.mode, DestabilizerMode::Sequence);
        assert!(-d.phi_at_witness <= 2.0 * eps + 1e-6);
        assert!(-d.phi_at_witness <= eps + 1e-9);
        assert_eq!(d.tilt.direction.coords(), &[-1.0]);
        assert_eq!(d.tilt.anchor.coords(), &[0.0]);
        assert!(d.witness.coords()[0] < -1.0);
        let gz = d.perturbed.value_finite(&d.witness).unwrap();
        assert!(gz > 0.0);
    }

    #[test]
    fn destabilizer_sequence_mode_collapses_the_slab() {
        let eps = 0.1;
        let d = destabilizer_search(&slab(), None, eps).unwrap();
        assert_eq!(d.mode, DestabilizerMode::Sequence);
        assert!(-d.phi_at_witness <= 2.0 * eps + 1e-6);
        assert!(-d.phi_at_witness > 0.0, "the witness must expose near-flatness");
        let gz = d.perturbed.value_finite(&d.witness).unwrap();
        assert!(gz > 0.0);
        // The anchor stays on the zero level of the original system.
        let sys = slab();
        let sys = sys.as_system().unwrap();
        assert!(sys.value(&d.tilt.anchor).abs() < 1e-7);
    }

    #[test]
    fn destabilizer_refuses_stable_inputs() {
        assert!(matches!(
            destabilizer_search(&triangle(), None, 0.1),
            Err(Error::NotApplicable(_))
        ));
        assert!(matches!(
            destabilizer_search(&exp_fn(), Some(&v(&[0.0])), 0.1),
            Err(Error::NotApplicable(_))
        ));
        assert!(matches!(
            destabilizer_search(&opposing(), Some(&v(&[0.0, 0.0])), 0.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn perturbation_band_check_accepts_tilts_and_rejects_excess() {
        let f = opposing();
        let anchor = v(&[0.0, 0.0]);
        let spec = TiltSpec {
            anchor: anchor.clone(),
            direction: v(&[0.0, 1.0]),
            magnitude: 0.1,
        };
        let g = tilt(&f, &spec).unwrap();
        let radii = [1.0, 0.1];
        assert!(eps_perturbation_check(&f, &g, &anchor, 0.1, &radii, 42, 64).unwrap());
        assert!(!eps_perturbation_check(&f, &g, &anchor, 0.05, &radii, 42, 64).unwrap());
        assert!(eps_perturbation_check(&f, &f, &anchor, 0.0, &radii, 42, 64).unwrap());
    }

    #[test]
    fn lip_difference_is_exact_for_tilts_and_sampled_otherwise() {
        let f = opposing();
        let spec = TiltSpec {
            anchor: v(&[0.0, 0.0]),
            direction: v(&[0.6, 0.8]),
            magnitude: 0.3,
        };
        let g = tilt(&f, &spec).unwrap();
        let est = lip_difference_estimate(&f, &g, 42, 64).unwrap();
        assert!(est.exact);
        assert!((est.value - 0.3).abs() < 1e-12);

        let same = lip_difference_estimate(&f, &f, 42, 64).unwrap();
        assert!(same.exact);
        assert_eq!(same.value, 0.0);

        // Structurally different systems: a sampled lower estimate bounded
        // by the sum of the two Lipschitz constants.
        let other = system(vec![
            AffineRow::new("a", v(&[2.0, 0.0]), 1.0),
            AffineRow::new("b", v(&[0.0, 2.0]), 1.0),
            AffineRow::new("c", v(&[-1.0, -1.0]), 3.0),
        ]);
        let est = lip_difference_estimate(&f, &other, 42, 64).unwrap();
        assert!(!est.exact);
        let lip_sum = 2f64.sqrt() + 2.0;
        assert!(est.value <= lip_sum + 1e-9, "sampled {} over {}", est.value, lip_sum);
    }

    #[test]
    fn certified_margins_survive_small_tilts() {
        // At a certified stable anchor with margin gamma, any tilt with
        // eps < gamma/2 keeps the sphere minimum at magnitude gamma - eps.
        for f in [triangle(), halfspace(), slab()] {
            let sys = f.as_system().unwrap();
            let catalog = hoffman::enumerate_active_sets(sys, None).unwrap();
            let mut rng = sample::rng_from(7);
            for entry in &catalog.entries {
                let gamma = entry.op_value.abs();
                if gamma < 0.2 {
                    continue;
                }
                let eps = 0.25 * gamma;
                let u = sample::unit_sphere(f.norm().dual(), f.dim(), &mut rng);
                let spec = TiltSpec {
                    anchor: entry.witness.clone(),
                    direction: u,
                    magnitude: eps,
                };
                let g = tilt(&f, &spec).unwrap();
                let phi_g = sphere::phi(&g, &entry.witness, 0).unwrap();
                assert!(
                    phi_g.value.abs() >= gamma - eps - 1e-9,
                    "margin {} dropped past {} - {}",
                    phi_g.value.abs(),
                    gamma,
                    eps
                );
            }
        }
    }

    #[test]
    fn vacuously_stable_systems_report_the_empty_family() {
        // A strictly negative max-affine function has no zero-level anchor.
        let f = system(vec![AffineRow::new("1", v(&[0.0, 0.0]), 5.0)]);
        let report = global_stability(&f, 42).unwrap();
        assert_eq!(report.certificate.verdict, StabilityVerdict::Stable);
        assert!(report.boundary.is_none());
        assert_eq!(
            boundary_phi_floor(&f, &BoundarySampler::default()).unwrap_err(),
            Error::not_applicable("the zero level is empty; the boundary condition is vacuous")
        );
        // Sanity: its distance function is identically zero.
        let d = crate::moduli::distance_to_solution(&f, &v(&[3.0, -2.0])).unwrap();
        assert_eq!(d.distance, ExtReal::Finite(0.0));
    }
}
