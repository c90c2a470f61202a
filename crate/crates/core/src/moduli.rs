//! Error-bound moduli: sampled infima of the ratio `f(x) / d(x, S)`.
//!
//! The global modulus of `f` is the infimum of `f(x) / d(x, S)` over the
//! points where `f` is positive, with `S = {f <= 0}`; it is positive
//! exactly when `f` admits a global error bound.  The local modulus at a
//! zero-level point takes the lower limit of the same ratio as `x`
//! approaches that point.  Both have a second characterization through the
//! sphere minimum `phi`: the same infimum taken over `-phi(x)` instead of
//! the ratio.  The two routes agree analytically, so running both and
//! comparing is a built-in cross-check; the estimates here are sampled
//! upper approximations of the true infima.
//!
//! Distances to the solution set are exact per representation: closed-form
//! intervals in dimension one, certified Euclidean projection for
//! max-affine systems, and linear programs for the sup and one norms.

use crate::convex::{ConvexFunction, ScalarLevelSet};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::geometry::{project_polyhedron, NormSpec, PolyProjection, ProjectionConfig, Vector};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::sample;
use crate::sphere;

/// Which modulus is being estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModulusKind {
    Global,
    Local,
}

impl ModulusKind {
    pub fn name(self) -> &'static str {
        match self {
            ModulusKind::Global => "global",
            ModulusKind::Local => "local",
        }
    }
}

/// Which characterization the estimate sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModulusRoute {
    /// The ratio `f(x) / d(x, S)`.
    DirectRatio,
    /// The negated sphere minimum `-phi(x)`.
    PrimalPhi,
}

impl ModulusRoute {
    pub fn name(self) -> &'static str {
        match self {
            ModulusRoute::DirectRatio => "direct-ratio",
            ModulusRoute::PrimalPhi => "primal-phi",
        }
    }
}

/// A sampled modulus estimate with its infimum witness.
#[derive(Clone, Debug)]
pub struct ModulusEstimate {
    pub kind: ModulusKind,
    pub route: ModulusRoute,
    /// Infimum over admitted samples; `+inf` when none were admitted.
    pub value: ExtReal,
    /// Number of admitted samples (positive value, usable distance).
    pub sample_count: usize,
    /// Human-readable description of the sampling region.
    pub region: String,
    /// The admitted sample attaining the infimum.
    pub infimum_witness: Option<Vector>,
    pub notes: Vec<String>,
}

/// Both routes side by side.
#[derive(Clone, Debug)]
pub struct ModulusReport {
    pub kind: ModulusKind,
    pub direct: ModulusEstimate,
    pub primal: ModulusEstimate,
}

impl ModulusReport {
    /// Absolute gap between the two routes when both are finite.
    pub fn agreement_gap(&self) -> Option<f64> {
        match (self.direct.value, self.primal.value) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => Some((a - b).abs()),
            _ => None,
        }
    }
}

/// Where to draw samples.
#[derive(Clone, Debug)]
pub enum RegionSpec {
    /// Annuli `radius/2 <= ||x - center|| <= radius`, one per radius.
    Shells { center: Vector, radii: Vec<f64> },
    /// Balls `||x - center|| <= radius`, one per radius.
    Balls { center: Vector, radii: Vec<f64> },
}

/// Seeded sampling plan: `count` points per region component.
#[derive(Clone, Debug)]
pub struct SamplerSpec {
    pub seed: u64,
    pub count: usize,
    pub region: RegionSpec,
}

impl SamplerSpec {
    /// Global default: shells of radius 1, 10, 100 around the origin.
    pub fn global_default(dim: usize) -> Self {
        SamplerSpec {
            seed: 42,
            count: 200,
            region: RegionSpec::Shells {
                center: Vector::zeros(dim),
                radii: vec![1.0, 10.0, 100.0],
            },
        }
    }

    /// Local default: balls of radius 1e-1, 1e-2, 1e-3 around the anchor.
    pub fn local_default(center: &Vector) -> Self {
        SamplerSpec {
            seed: 42,
            count: 200,
            region: RegionSpec::Balls {
                center: center.clone(),
                radii: vec![1e-1, 1e-2, 1e-3],
            },
        }
    }

    fn describe(&self) -> String {
        match &self.region {
            RegionSpec::Shells { center, radii } => format!(
                "shells radii {:?} around {} ({} samples each)",
                radii, center, self.count
            ),
            RegionSpec::Balls { center, radii } => format!(
                "balls radii {:?} around {} ({} samples each)",
                radii, center, self.count
            ),
        }
    }

    /// One labelled batch of points per region component, seeded per batch.
    fn batches(&self) -> Vec<(String, Vec<Vector>)> {
        let (center, radii, is_shell) = match &self.region {
            RegionSpec::Shells { center, radii } => (center, radii, true),
            RegionSpec::Balls { center, radii } => (center, radii, false),
        };
        radii
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let mut rng = sample::rng_from(sample::mix(self.seed, i as u64));
                let pts = (0..self.count)
                    .map(|_| {
                        if is_shell {
                            sample::in_shell(center, 0.5 * r, r, &mut rng)
                        } else {
                            sample::in_ball(center, r, &mut rng)
                        }
                    })
                    .collect();
                (format!("r={r}"), pts)
            })
            .collect()
    }
}

/// Distance from a point to the solution set `{f <= 0}`.
#[derive(Clone, Debug)]
pub struct DistanceResult {
    /// Distance in the function's own norm; `+inf` for an empty set.
    pub distance: ExtReal,
    /// A nearest point, when one is available.
    pub nearest: Option<Vector>,
    /// Whether the value is exact up to roundoff.
    pub certified: bool,
}

/// Computes `d(x, S)` in `f`'s norm: closed form in dimension one,
/// certified Euclidean projection for max-affine systems, linear programs
/// for the sup and one norms.  Custom evaluators expose no solution-set
/// structure and report not-applicable.
pub fn distance_to_solution(f: &ConvexFunction, x: &Vector) -> Result<DistanceResult> {
    if x.dim() != f.dim() {
        return Err(Error::invalid_input("point dimension mismatch"));
    }
    if let Some(s) = f.as_scalar() {
        let x0 = x.coords()[0];
        return Ok(match s.level_set() {
            ScalarLevelSet::Empty => {
                DistanceResult { distance: ExtReal::PosInf, nearest: None, certified: true }
            }
            ScalarLevelSet::Interval { lo, hi } => {
                let clamped = x0
                    .max(lo.unwrap_or(f64::NEG_INFINITY))
                    .min(hi.unwrap_or(f64::INFINITY));
                DistanceResult {
                    distance: ExtReal::Finite((x0 - clamped).abs()),
                    nearest: Some(Vector::from_slice(&[clamped])),
                    certified: true,
                }
            }
        });
    }
    let sys = match f.as_system() {
        Some(sys) => sys,
        None => {
            return Err(Error::not_applicable(
                "custom functions expose no solution-set structure to measure distance against",
            ))
        }
    };
    match sys.norm() {
        NormSpec::Euclidean => {
            let poly = sys.polyhedron();
            match project_polyhedron(x, &poly, &ProjectionConfig::default())? {
                PolyProjection::Point(p) => Ok(DistanceResult {
                    distance: ExtReal::Finite(p.distance),
                    nearest: Some(p.point),
                    certified: p.certified,
                }),
                PolyProjection::Empty => {
                    // Stagnation is a heuristic emptiness signal; confirm it
                    // with a feasibility program before reporting +inf.
                    if polyhedron_is_empty(sys)? {
                        Ok(DistanceResult {
                            distance: ExtReal::PosInf,
                            nearest: None,
                            certified: true,
                        })
                    } else {
                        Err(Error::numeric(
                            "projection stagnated on a set the feasibility program says is nonempty",
                            f64::NAN,
                        ))
                    }
                }
            }
        }
        NormSpec::Sup => lp_distance(sys, x, true),
        NormSpec::One => lp_distance(sys, x, false),
    }
}

/// Feasibility of `{a_t . y <= b_t}` by linear programming over the split
/// `y = w+ - w-`.
pub(crate) fn polyhedron_is_empty(sys: &crate::convex::MaxAffineSystem) -> Result<bool> {
    let n = sys.dim();
    let rows = sys
        .rows()
        .iter()
        .map(|r| {
            let mut coef = Vec::with_capacity(2 * n);
            coef.extend_from_slice(r.gradient.coords());
            coef.extend(r.gradient.coords().iter().map(|c| -c));
            (coef, Relation::Le, r.offset)
        })
        .collect();
    let lp = LinearProgram { objective: vec![0.0; 2 * n], rows };
    Ok(matches!(crate::lp::solve(&lp)?, LpOutcome::Infeasible))
}

/// Exact `d(x, S)` in the sup norm (`sup_mode`) or the one norm, as the
/// optimum of a linear program over `y = x + w+ - w-`.
fn lp_distance(
    sys: &crate::convex::MaxAffineSystem,
    x: &Vector,
    sup_mode: bool,
) -> Result<DistanceResult> {
    let n = sys.dim();
    let nvars = if sup_mode { 2 * n + 1 } else { 2 * n };
    let mut rows = Vec::new();
    for r in sys.rows() {
        let mut coef = vec![0.0; nvars];
        for i in 0..n {
            coef[i] = r.gradient.coords()[i];
            coef[n + i] = -r.gradient.coords()[i];
        }
        rows.push((coef, Relation::Le, r.offset - r.gradient.dot(x)));
    }
    let mut objective = vec![0.0; nvars];
    if sup_mode {
        // One slack bounds every coordinate move; minimize it.
        for i in 0..n {
            let mut coef = vec![0.0; nvars];
            coef[i] = 1.0;
            coef[n + i] = 1.0;
            coef[2 * n] = -1.0;
            rows.push((coef, Relation::Le, 0.0));
        }
        objective[2 * n] = -1.0;
    } else {
        // Minimize the total coordinate move.
        for c in objective.iter_mut() {
            *c = -1.0;
        }
    }
    match crate::lp::solve(&LinearProgram { objective, rows })? {
        LpOutcome::Optimal { x: sol, value } => {
            let mut nearest = x.coords().to_vec();
            for i in 0..n {
                nearest[i] += sol[i] - sol[n + i];
            }
            Ok(DistanceResult {
                distance: ExtReal::Finite(-value),
                nearest: Some(Vector::from_slice(&nearest)),
                certified: true,
            })
        }
        LpOutcome::Infeasible => {
            Ok(DistanceResult { distance: ExtReal::PosInf, nearest: None, certified: true })
        }
        LpOutcome::Unbounded => Err(Error::numeric(
            "distance program reported an unbounded objective",
            f64::NAN,
        )),
    }
}

/// Positivity threshold: values below this count as numerically zero.
fn positive_tol(f: &ConvexFunction, x: &Vector) -> f64 {
    1e-12 * f.gradient_scale(x) * (1.0 + x.norm2())
}

struct BatchScan {
    best: Option<(f64, Vector)>,
    admitted: usize,
    notes: Vec<String>,
    empty_set_seen: bool,
}

/// Scans one batch with a per-point evaluator returning an optional ratio.
fn scan_batch<E>(points: &[Vector], mut eval: E) -> Result<BatchScan>
where
    E: FnMut(&Vector) -> Result<Option<(f64, bool)>>,
{
    let mut best: Option<(f64, Vector)> = None;
    let mut admitted = 0usize;
    let mut empty_set_seen = false;
    for p in points {
        match eval(p)? {
            None => continue,
            Some((value, empty_set)) => {
                admitted += 1;
                empty_set_seen |= empty_set;
                if best.as_ref().map_or(true, |(b, _)| value < *b) {
                    best = Some((value, p.clone()));
                }
            }
        }
    }
    Ok(BatchScan { best, admitted, notes: Vec::new(), empty_set_seen })
}

fn assemble_estimate(
    kind: ModulusKind,
    route: ModulusRoute,
    region: String,
    batches: Vec<(String, BatchScan)>,
    local: bool,
) -> ModulusEstimate {
    let mut notes = Vec::new();
    let mut total_admitted = 0usize;
    let mut overall: Option<(f64, Vector)> = None;
    let mut empty_set_seen = false;
    let last = batches.len().saturating_sub(1);
    for (i, (label, scan)) in batches.into_iter().enumerate() {
        total_admitted += scan.admitted;
        empty_set_seen |= scan.empty_set_seen;
        match &scan.best {
            Some((v, _)) => notes.push(format!(
                "{label}: infimum {v:.6e} over {} admitted samples",
                scan.admitted
            )),
            None => notes.push(format!("{label}: no admitted samples")),
        }
        notes.extend(scan.notes);
        // Local estimates keep only the smallest region, approximating the
        // lower limit; global estimates keep the minimum over everything.
        let keep = !local || i == last;
        if keep {
            if let Some((v, w)) = scan.best {
                if overall.as_ref().map_or(true, |(b, _)| v < *b) {
                    overall = Some((v, w));
                }
            }
        }
    }
    if empty_set_seen {
        notes.push("the solution set is empty; ratios degenerate to zero".to_string());
    }
    let (value, witness) = match overall {
        Some((v, w)) => (ExtReal::Finite(v), Some(w)),
        None => {
            notes.push(
                "no sample had a positive function value; the infimum over an empty set is +inf"
                    .to_string(),
            );
            (ExtReal::PosInf, None)
        }
    };
    ModulusEstimate {
        kind,
        route,
        value,
        sample_count: total_admitted,
        region,
        infimum_witness: witness,
        notes,
    }
}

fn direct_estimate(
    f: &ConvexFunction,
    spec: &SamplerSpec,
    kind: ModulusKind,
) -> Result<ModulusEstimate> {
    let local = kind == ModulusKind::Local;
    let mut batches = Vec::new();
    for (label, points) in spec.batches() {
        let scan = scan_batch(&points, |p| {
            let fx = match f.value(p)? {
                ExtReal::Finite(v) => v,
                ExtReal::PosInf => return Ok(None),
            };
            if fx <= positive_tol(f, p) {
                return Ok(None);
            }
            match distance_to_solution(f, p)?.distance {
                ExtReal::PosInf => Ok(Some((0.0, true))),
                ExtReal::Finite(d) => {
                    if d <= 0.0 {
                        // A positive value with zero distance is roundoff
                        // at the boundary; the ratio is not trustworthy.
                        Ok(None)
                    } else {
                        Ok(Some((fx / d, false)))
                    }
                }
            }
        })?;
        batches.push((label, scan));
    }
    Ok(assemble_estimate(kind, ModulusRoute::DirectRatio, spec.describe(), batches, local))
}

fn primal_estimate(
    f: &ConvexFunction,
    spec: &SamplerSpec,
    kind: ModulusKind,
) -> Result<ModulusEstimate> {
    let local = kind == ModulusKind::Local;
    let mut batches = Vec::new();
    let mut anomaly = false;
    for (label, points) in spec.batches() {
        let scan = scan_batch(&points, |p| {
            let fx = match f.value(p)? {
                ExtReal::Finite(v) => v,
                ExtReal::PosInf => return Ok(None),
            };
            if fx <= positive_tol(f, p) {
                return Ok(None);
            }
            let r = sphere::phi(f, p, spec.seed)?;
            if r.value > 0.0 {
                anomaly = true;
            }
            Ok(Some((-r.value, false)))
        })?;
        batches.push((label, scan));
    }
    let mut est =
        assemble_estimate(kind, ModulusRoute::PrimalPhi, spec.describe(), batches, local);
    if anomaly {
        est.notes.push(
            "a positive sphere minimum at an infeasible point indicates an empty solution set"
                .to_string(),
        );
    }
    Ok(est)
}

/// Sampled global modulus along the ratio route.
pub fn global_modulus_direct(f: &ConvexFunction, spec: &SamplerSpec) -> Result<ModulusEstimate> {
    direct_estimate(f, spec, ModulusKind::Global)
}

/// Sampled global modulus along the sphere-minimum route.
pub fn global_modulus_primal(f: &ConvexFunction, spec: &SamplerSpec) -> Result<ModulusEstimate> {
    primal_estimate(f, spec, ModulusKind::Global)
}

/// Both global routes side by side.
pub fn global_modulus(f: &ConvexFunction, spec: &SamplerSpec) -> Result<ModulusReport> {
    Ok(ModulusReport {
        kind: ModulusKind::Global,
        direct: global_modulus_direct(f, spec)?,
        primal: global_modulus_primal(f, spec)?,
    })
}

/// Both local routes at a zero-level anchor.  The anchor must satisfy
/// `f(anchor) = 0` up to roundoff; the estimate is the infimum over the
/// smallest sampled ball, with the larger balls reported in the notes.
pub fn local_modulus(
    f: &ConvexFunction,
    anchor: &Vector,
    spec: Option<&SamplerSpec>,
) -> Result<ModulusReport> {
    let fx = f.value_finite(anchor)?;
    let tol = 1e-9 * f.gradient_scale(anchor) * (1.0 + anchor.norm2());
    if fx.abs() > tol {
        return Err(Error::not_applicable(format!(
            "the local modulus is defined at zero-level points; f(anchor) = {fx:.3e}"
        )));
    }
    let default_spec;
    let spec = match spec {
        Some(s) => s,
        None => {
            default_spec = SamplerSpec::local_default(anchor);
            &default_spec
        }
    };
    Ok(ModulusReport {
        kind: ModulusKind::Local,
        direct: direct_estimate(f, spec, ModulusKind::Local)?,
        primal: primal_estimate(f, spec, ModulusKind::Local)?,
    })
}

/// Certified pointwise lower bound on the local modulus: when the sphere
/// minimum at a zero-level point is exact and nonzero, its magnitude
/// bounds the local modulus from below.
pub fn modulus_lower_bound_point(f: &ConvexFunction, anchor: &Vector) -> Result<f64> {
    let r = sphere::phi(f, anchor, 0)?;
    let tol = 1e-12 * f.gradient_scale(anchor);
    if !r.certified {
        return Err(Error::inconclusive(
            "the sphere minimum at the anchor is uncertified; no certified bound follows",
        ));
    }
    if r.value.abs() <= tol {
        return Err(Error::not_applicable(
            "the sphere minimum vanishes at the anchor; no positive lower bound follows",
        ));
    }
    Ok(r.value.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{AffineRow, MaxAffineSystem};

    fn v(coords: &[f64]) -> Vector {
        Vector::from_slice(coords)
    }

    fn system(rows: Vec<(&str, &[f64], f64)>, norm: NormSpec) -> ConvexFunction {
        let rows = rows
            .into_iter()
            .map(|(l, a, b)| AffineRow::new(l, v(a), b))
            .collect();
        ConvexFunction::from_system(MaxAffineSystem::new(rows, norm).unwrap())
    }

    #[test]
    fn halfspace_global_modulus_is_gradient_norm() {
        let f = system(vec![("h", &[3.0, 4.0], 0.0)], NormSpec::Euclidean);
        let report = global_modulus(&f, &SamplerSpec::global_default(2)).unwrap();
        let direct = report.direct.value.finite().unwrap();
        let primal = report.primal.value.finite().unwrap();
        assert!((direct - 5.0).abs() < 1e-6, "direct {direct}");
        assert!((primal - 5.0).abs() < 1e-6, "primal {primal}");
        assert!(report.agreement_gap().unwrap() < 1e-6);
        assert!(report.direct.sample_count > 100);
    }

    #[test]
    fn exponential_local_modulus_at_origin_is_one() {
        let f = ConvexFunction::named("exp_minus_one").unwrap();
        let report = local_modulus(&f, &v(&[0.0]), None).unwrap();
        let direct = report.direct.value.finite().unwrap();
        let primal = report.primal.value.finite().unwrap();
        assert!((direct - 1.0).abs() < 1e-3, "direct {direct}");
        assert!((primal - 1.0).abs() < 1e-3, "primal {primal}");
    }

    #[test]
    fn zero_function_local_modulus_is_infinite() {
        let f = ConvexFunction::named("zero").unwrap();
        let report = local_modulus(&f, &v(&[0.0]), None).unwrap();
        assert_eq!(report.direct.value, ExtReal::PosInf);
        assert_eq!(report.primal.value, ExtReal::PosInf);
        assert_eq!(report.direct.sample_count, 0);
    }

    #[test]
    fn local_modulus_rejects_off_level_anchors() {
        let f = ConvexFunction::named("exp_minus_one").unwrap();
        assert!(local_modulus(&f, &v(&[1.0]), None).is_err());
    }

    #[test]
    fn distances_differ_by_norm() {
        // S = {x1 + x2 <= 0}; from (1, 1) the Euclidean, sup, and one
        // distances are sqrt(2), 1, and 2.
        for (norm, expected) in [
            (NormSpec::Euclidean, 2f64.sqrt()),
            (NormSpec::Sup, 1.0),
            (NormSpec::One, 2.0),
        ] {
            let f = system(vec![("s", &[1.0, 1.0], 0.0)], norm);
            let d = distance_to_solution(&f, &v(&[1.0, 1.0])).unwrap();
            let got = d.distance.finite().unwrap();
            assert!((got - expected).abs() < 1e-9, "{norm:?}: {got} vs {expected}");
            assert!(d.certified);
            let near = d.nearest.unwrap();
            assert!(f.value_finite(&near).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn empty_solution_set_reports_infinite_distance_and_zero_modulus() {
        // A zero gradient with negative offset keeps the value at +1
        // everywhere, so the solution set is empty.
        let f = system(vec![("c", &[0.0, 0.0], -1.0)], NormSpec::Euclidean);
        let d = distance_to_solution(&f, &v(&[0.3, -0.2])).unwrap();
        assert_eq!(d.distance, ExtReal::PosInf);
        assert!(d.certified);
        let est = global_modulus_direct(&f, &SamplerSpec::global_default(2)).unwrap();
        assert_eq!(est.value, ExtReal::Finite(0.0));
        assert!(est.notes.iter().any(|n| n.contains("empty")));
    }

    #[test]
    fn pointwise_lower_bound_follows_phi() {
        let f = system(
            vec![
                ("1", &[1.0, 1.0], 1.0),
                ("2", &[-2.0, 1.0], 2.0),
                ("3", &[1.0, -2.0], 2.0),
            ],
            NormSpec::Euclidean,
        );
        let bound = modulus_lower_bound_point(&f, &v(&[0.0, 1.0])).unwrap();
        assert!((bound - 2f64.sqrt()).abs() < 1e-12);
        let opposing = system(
            vec![("p", &[1.0, 1.0], 0.0), ("m", &[-1.0, -1.0], 0.0)],
            NormSpec::Euclidean,
        );
        assert!(modulus_lower_bound_point(&opposing, &v(&[0.0, 0.0])).is_err());
    }
}
