//! Independent brute-force oracles.
//!
//! Every certified kernel has a dumb counterpart here: distances by
//! feasibility-filtered grids, sphere minima by meshing the unit sphere,
//! minimum-norm points by seeded search over the simplex of coefficients.
//! Nothing in this module calls the kernels it double-checks — independence
//! is the point — and everything is deterministic for a fixed config.
//! These are orders of magnitude slower than the kernels and capped at
//! three dimensions where they grid; that is the honest scale for a
//! brute-force reference.

use crate::convex::ConvexFunction;
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::geometry::{NormSpec, Polyhedron, Vector};
use crate::sample;

/// Knobs for every oracle; outputs are deterministic given the config.
#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    pub seed: u64,
    /// Per-axis grid density; angular and spherical meshes scale with it.
    pub resolution: usize,
    /// Sample count for the randomized searches.
    pub sample_count: usize,
    /// Initial search radius, scaled by the query point's size.
    pub radius: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { seed: 42, resolution: 64, sample_count: 200, radius: 4.0 }
    }
}

/// A brute-force value with an honesty flag for exhausted searches.
#[derive(Clone, Debug)]
pub struct OracleEstimate {
    pub value: ExtReal,
    /// True when the search found nothing and the value is a default, not
    /// an observation.
    pub low_confidence: bool,
    /// The point attaining the value, when one was observed.
    pub witness: Option<Vector>,
}

/// Euclidean distance from `x` to the polyhedron by a shrinking grid.
///
/// Grid nodes are admitted when their largest constraint violation fits
/// inside a band proportional to the current mesh — without the band, a
/// grid could never land on a solution set of measure zero (a line, a
/// single point).  Each round re-grids around the incumbent with a smaller
/// mesh and a proportionally tighter band, so the estimate converges to the
/// true distance as the mesh shrinks.  When the initial grid admits
/// nothing, the box expands (four times, three rounds deep) while the band
/// stays at its initial width, so a genuinely empty set is never "found" by
/// loosened tolerances; exhaustion reports `+inf` with the low-confidence
/// flag, which cannot distinguish a far-off degenerate set from an empty
/// one.
pub fn brute_distance(x: &Vector, p: &Polyhedron, cfg: &OracleConfig) -> Result<OracleEstimate> {
    let dim = x.dim();
    if dim != p.dim() {
        return Err(Error::invalid_input("point and polyhedron dimensions differ"));
    }
    if dim > 3 {
        return Err(Error::invalid_input("grid oracles are capped at three dimensions"));
    }
    if p.max_violation(x) <= 0.0 {
        return Ok(OracleEstimate {
            value: ExtReal::Finite(0.0),
            low_confidence: false,
            witness: Some(x.clone()),
        });
    }

    let n = per_axis_points(dim, cfg.resolution);
    let row_scale = p
        .rows()
        .iter()
        .map(|(a, _)| a.norm2())
        .fold(0.0_f64, f64::max)
        .max(1e-12);
    let base_radius = cfg.radius * (1.0 + x.norm2());
    // A node within half a mesh cell (per axis) of the set has violation at
    // most `row_scale * mesh * sqrt(dim) / 2`; 0.9 covers dim <= 3.
    let band_for = |half_width: f64| {
        0.9 * row_scale * 2.0 * half_width / ((n - 1) as f64) + 1e-9 * row_scale
    };

    // Expansion phase: find any admitted point with the band frozen at its
    // initial width.
    let base_band = band_for(base_radius);
    let mut half = base_radius;
    let mut found = None;
    for _ in 0..=3 {
        found = best_admitted_on_grid(x, p, x, half, n, base_band);
        if found.is_some() {
            break;
        }
        half *= 4.0;
    }
    let Some((mut best_d, mut best_p)) = found else {
        return Ok(OracleEstimate {
            value: ExtReal::PosInf,
            low_confidence: true,
            witness: None,
        });
    };

    // Refinement phase: shrink box and band around the incumbent on
    // success, widen on failure.  Widening matters for thin wedges: a point
    // admitted by the band can be far from the set in euclidean terms (the
    // ratio is the system's own Hoffman constant), so a fixed shrink rate
    // can strand the incumbent outside the next box's reach.
    let width_floor = 1e-9 * (1.0 + x.norm2());
    let mut width = half;
    for _ in 0..24 {
        match best_admitted_on_grid(x, p, &best_p, width, n, band_for(width)) {
            Some((d, q)) => {
                best_d = d;
                best_p = q;
                width = (width * 6.0 / n as f64).max(width_floor);
            }
            None => width *= 4.0,
        }
    }
    Ok(OracleEstimate {
        value: ExtReal::Finite(best_d),
        low_confidence: false,
        witness: Some(best_p),
    })
}

fn per_axis_points(dim: usize, resolution: usize) -> usize {
    match dim {
        1 => (resolution * resolution).max(64),
        2 => (resolution * 2).max(32),
        _ => (resolution / 2).max(16),
    }
}

/// The admitted grid node nearest to `x` on the axis-aligned grid of `n`
/// points per side centered at `center`, if any; admission means the
/// largest constraint violation fits inside `band`.
fn best_admitted_on_grid(
    x: &Vector,
    p: &Polyhedron,
    center: &Vector,
    half_width: f64,
    n: usize,
    band: f64,
) -> Option<(f64, Vector)> {
    let dim = x.dim();
    let n = n.max(2);
    let mut best: Option<(f64, Vector)> = None;
    let mut idx = vec![0usize; dim];
    let coord = |j: usize, i: usize| {
        center.coords()[j] - half_width + 2.0 * half_width * (i as f64) / ((n - 1) as f64)
    };
    loop {
        let point = Vector::from_slice(
            &idx.iter().enumerate().map(|(j, &i)| coord(j, i)).collect::<Vec<_>>(),
        );
        if p.max_violation(&point) <= band {
            let d = (&point - x).norm2();
            if best.as_ref().map_or(true, |(b, _)| d < *b) {
                best = Some((d, point));
            }
        }
        // Odometer increment over the grid indices.
        let mut j = 0;
        loop {
            if j == dim {
                return best;
            }
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// `min_{||h|| = 1} max_t <a_t, h>` by meshing the norm's unit sphere.
///
/// Dimension one checks the two unit points; dimension two walks an angular
/// grid (at least 1024 points) with deterministic window refinement;
/// dimension three covers a Fibonacci point set (at least 4096 points) and
/// refines with seeded shrinking perturbations.
pub fn brute_sphere_min(
    gradients: &[Vector],
    norm: NormSpec,
    cfg: &OracleConfig,
) -> Result<f64> {
    if gradients.is_empty() {
        return Err(Error::invalid_input("sphere oracle needs at least one gradient"));
    }
    let dim = gradients[0].dim();
    if gradients.iter().any(|g| g.dim() != dim) {
        return Err(Error::invalid_input("gradients must share one dimension"));
    }
    if dim > 3 {
        return Err(Error::invalid_input("grid oracles are capped at three dimensions"));
    }
    let objective = |h: &Vector| -> f64 {
        gradients.iter().map(|a| a.dot(h)).fold(f64::NEG_INFINITY, f64::max)
    };
    let normalize = |raw: &[f64]| -> Option<Vector> {
        let v = Vector::from_slice(raw);
        let n = norm.norm(&v);
        (n > 1e-12).then(|| v.scale(1.0 / n))
    };

    match dim {
        1 => {
            let left = objective(&Vector::from_slice(&[-1.0]));
            let right = objective(&Vector::from_slice(&[1.0]));
            Ok(left.min(right))
        }
        2 => {
            let n = (cfg.resolution * 32).max(1024);
            let eval_angle = |theta: f64| -> f64 {
                let h = normalize(&[theta.cos(), theta.sin()]).expect("unit circle point");
                objective(&h)
            };
            let mut best_theta = 0.0;
            let mut best = f64::INFINITY;
            for i in 0..n {
                let theta = 2.0 * std::f64::consts::PI * (i as f64) / (n as f64);
                let v = eval_angle(theta);
                if v < best {
                    best = v;
                    best_theta = theta;
                }
            }
            let mut window = 2.0 * std::f64::consts::PI / (n as f64);
            for _ in 0..6 {
                for i in 0..=128 {
                    let theta = best_theta - window + 2.0 * window * (i as f64) / 128.0;
                    let v = eval_angle(theta);
                    if v < best {
                        best = v;
                        best_theta = theta;
                    }
                }
                window /= 8.0;
            }
            Ok(best)
        }
        _ => {
            let n = (cfg.resolution * 64).max(4096);
            let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            let mut best_h: Option<Vector> = None;
            let mut best = f64::INFINITY;
            for i in 0..n {
                let y = 1.0 - 2.0 * ((i as f64) + 0.5) / (n as f64);
                let r = (1.0 - y * y).max(0.0).sqrt();
                let theta = golden * (i as f64);
                if let Some(h) = normalize(&[r * theta.cos(), y, r * theta.sin()]) {
                    let v = objective(&h);
                    if v < best {
                        best = v;
                        best_h = Some(h);
                    }
                }
            }
            let mut center = best_h.expect("a Fibonacci point set is never empty");
            let mut scale = (4.0 * std::f64::consts::PI / (n as f64)).sqrt();
            let mut rng = sample::rng_from(sample::mix(cfg.seed, 0x0b5e));
            for _ in 0..12 {
                for _ in 0..cfg.sample_count.max(64) {
                    let noise = sample::gaussian_vector(&mut rng, dim);
                    let raw: Vec<f64> = center
                        .coords()
                        .iter()
                        .zip(noise.coords())
                        .map(|(c, g)| c + scale * g)
                        .collect();
                    if let Some(h) = normalize(&raw) {
                        let v = objective(&h);
                        if v < best {
                            best = v;
                            center = h;
                        }
                    }
                }
                scale /= 2.0;
            }
            Ok(best)
        }
    }
}

/// The Euclidean norm of the minimum-norm point of `conv(points)` by
/// seeded search over coefficient vectors on the simplex.
pub fn brute_min_norm(points: &[Vector], cfg: &OracleConfig) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::invalid_input("min-norm oracle needs at least one point"));
    }
    let dim = points[0].dim();
    if points.iter().any(|p| p.dim() != dim) {
        return Err(Error::invalid_input("points must share one dimension"));
    }
    let m = points.len();
    let combine = |coeffs: &[f64]| -> Vector {
        let mut p = Vector::zeros(dim);
        for (c, q) in coeffs.iter().zip(points) {
            p = p.add_scaled(*c, q);
        }
        p
    };
    let normalize_simplex = |raw: &mut Vec<f64>| {
        let mut total = 0.0;
        for c in raw.iter_mut() {
            *c = c.max(0.0);
            total += *c;
        }
        if total <= 0.0 {
            raw.fill(1.0 / m as f64);
        } else {
            for c in raw.iter_mut() {
                *c /= total;
            }
        }
    };

    // Deterministic starts: each vertex and the barycenter.
    let mut best_coeffs = vec![1.0 / m as f64; m];
    let mut best = combine(&best_coeffs).norm2();
    for k in 0..m {
        let mut coeffs = vec![0.0; m];
        coeffs[k] = 1.0;
        let v = combine(&coeffs).norm2();
        if v < best {
            best = v;
            best_coeffs = coeffs;
        }
    }

    let mut rng = sample::rng_from(sample::mix(cfg.seed, 0x517e));
    let mut scale = 1.0;
    for _ in 0..40 {
        for _ in 0..cfg.sample_count.max(64) {
            let noise = sample::gaussian_vector(&mut rng, m);
            let mut coeffs: Vec<f64> = best_coeffs
                .iter()
                .zip(noise.coords())
                .map(|(c, g)| c + scale * g)
                .collect();
            normalize_simplex(&mut coeffs);
            let v = combine(&coeffs).norm2();
            if v < best {
                best = v;
                best_coeffs = coeffs;
            }
        }
        scale *= 0.7;
    }
    Ok(best)
}

/// A convexity violation: two points whose midpoint value exceeds the
/// chord, by `gap`.
#[derive(Clone, Debug)]
pub struct ConvexityViolation {
    pub a: Vector,
    pub b: Vector,
    pub gap: f64,
}

/// Spot-checks midpoint convexity and lower semicontinuity on seeded
/// samples.  `None` means no violation was found (a sampled verdict, not a
/// proof); a violation comes back with the offending pair.
pub fn convexity_probe(
    f: &ConvexFunction,
    cfg: &OracleConfig,
) -> Result<Option<ConvexityViolation>> {
    let dim = f.dim();
    let mut rng = sample::rng_from(sample::mix(cfg.seed, 0x0602));
    for round in 0..3 {
        let radius = cfg.radius * f64::from(2u32).powi(round - 1);
        for _ in 0..cfg.sample_count {
            let a = sample::in_ball(&Vector::zeros(dim), radius, &mut rng);
            let b = sample::in_ball(&Vector::zeros(dim), radius, &mut rng);
            let mid = a.add_scaled(1.0, &b).scale(0.5);
            let (fa, fb, fm) = (f.value(&a)?, f.value(&b)?, f.value(&mid)?);
            match (fa, fb, fm) {
                (ExtReal::Finite(va), ExtReal::Finite(vb), ExtReal::Finite(vm)) => {
                    let slack = 1e-9 * (1.0 + va.abs() + vb.abs());
                    let gap = vm - 0.5 * (va + vb);
                    if gap > slack {
                        return Ok(Some(ConvexityViolation { a, b, gap }));
                    }
                }
                (ExtReal::Finite(_), ExtReal::Finite(_), ExtReal::PosInf) => {
                    return Ok(Some(ConvexityViolation { a, b, gap: f64::INFINITY }));
                }
                _ => {}
            }
            // Lower semicontinuity along a shrinking approach to `a`: deep
            // in the limit (steps of 1e-8 and below, so slope effects stay
            // far under the slack) the values must not undercut f(a).
            if let ExtReal::Finite(va) = fa {
                let direction = sample::unit_sphere(f.norm(), dim, &mut rng);
                let mut approached = f64::INFINITY;
                for k in 26..=32 {
                    let t = 2.0f64.powi(-k);
                    if let ExtReal::Finite(v) = f.value(&a.add_scaled(t, &direction))? {
                        approached = approached.min(v);
                    }
                }
                if approached.is_finite() && approached < va - 1e-6 * (1.0 + va.abs()) {
                    let witness = a.add_scaled(1e-8, &direction);
                    return Ok(Some(ConvexityViolation {
                        a: a.clone(),
                        b: witness,
                        gap: va - approached,
                    }));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{AffineRow, MaxAffineSystem};

    fn v(coords: &[f64]) -> Vector {
        Vector::from_slice(coords)
    }

    #[test]
    fn distance_oracle_matches_halfspace_formula() {
        let p = Polyhedron::new(vec![(v(&[1.0, 1.0]), 0.0)]).unwrap();
        let cfg = OracleConfig::default();
        let est = brute_distance(&v(&[1.0, 1.0]), &p, &cfg).unwrap();
        let d = est.value.finite().unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-3, "oracle distance {d}");
        assert!(!est.low_confidence);
        // Admission ends within a hair of true feasibility, so the oracle
        // bounds the distance from above up to that hair.
        assert!(d >= 2f64.sqrt() - 1e-6);

        let feasible = brute_distance(&v(&[-1.0, -2.0]), &p, &cfg).unwrap();
        assert_eq!(feasible.value, ExtReal::Finite(0.0));
    }

    #[test]
    fn distance_oracle_matches_the_collapsing_wedge() {
        // The opposing-rows system tilted by 0.1 in the second coordinate.
        let p = Polyhedron::new(vec![
            (v(&[1.0, 1.1]), 0.0),
            (v(&[-1.0, -0.9]), 0.0),
        ])
        .unwrap();
        let est = brute_distance(&v(&[-0.1, 0.1]), &p, &OracleConfig::default()).unwrap();
        let d = est.value.finite().unwrap();
        let expected = 0.1 * 2f64.sqrt();
        assert!((d - expected).abs() <= 0.02 * expected, "oracle {d} vs {expected}");
    }

    #[test]
    fn distance_oracle_flags_unreachable_sets() {
        // An empty polyhedron: x <= -1 and -x <= -1 (x >= 1) together.
        let p = Polyhedron::new(vec![(v(&[1.0]), -1.0), (v(&[-1.0]), -1.0)]).unwrap();
        let est = brute_distance(&v(&[0.0]), &p, &OracleConfig::default()).unwrap();
        assert_eq!(est.value, ExtReal::PosInf);
        assert!(est.low_confidence);
    }

    #[test]
    fn sphere_oracle_matches_hand_values() {
        let cfg = OracleConfig::default();
        let weak_pair = brute_sphere_min(
            &[v(&[-2.0, 1.0]), v(&[1.0, -2.0])],
            NormSpec::Euclidean,
            &cfg,
        )
        .unwrap();
        assert!((weak_pair + 0.5f64.sqrt()).abs() < 1e-3);

        let opposing = brute_sphere_min(
            &[v(&[1.0, 1.0]), v(&[-1.0, -1.0])],
            NormSpec::Euclidean,
            &cfg,
        )
        .unwrap();
        assert!(opposing.abs() < 1e-3);

        let single = brute_sphere_min(&[v(&[3.0, 4.0])], NormSpec::Euclidean, &cfg).unwrap();
        assert!((single + 5.0).abs() < 1e-3);

        let one_dim = brute_sphere_min(&[v(&[2.0])], NormSpec::Euclidean, &cfg).unwrap();
        assert!((one_dim + 2.0).abs() < 1e-12);

        let three_dim =
            brute_sphere_min(&[v(&[1.0, 2.0, 2.0])], NormSpec::Euclidean, &cfg).unwrap();
        assert!((three_dim + 3.0).abs() < 1e-3);
    }

    #[test]
    fn doubling_resolution_never_worsens_past_the_old_mesh() {
        let gradients = [v(&[-2.0, 1.0]), v(&[1.0, -2.0]), v(&[1.0, 1.0])];
        let coarse_cfg = OracleConfig { resolution: 32, ..OracleConfig::default() };
        let fine_cfg = OracleConfig { resolution: 64, ..OracleConfig::default() };
        let coarse = brute_sphere_min(&gradients, NormSpec::Euclidean, &coarse_cfg).unwrap();
        let fine = brute_sphere_min(&gradients, NormSpec::Euclidean, &fine_cfg).unwrap();
        let coarse_mesh = 2.0 * std::f64::consts::PI / (32.0 * 32.0);
        assert!(fine <= coarse + coarse_mesh);
    }

    #[test]
    fn min_norm_oracle_handles_hull_geometry() {
        let cfg = OracleConfig::default();
        // Hull of two opposite points contains the origin.
        let through_zero =
            brute_min_norm(&[v(&[1.0, 1.0]), v(&[-1.0, -1.0])], &cfg).unwrap();
        assert!(through_zero < 1e-6);
        // Segment offset from the origin: nearest point is (1/2, 1/2).
        let segment = brute_min_norm(&[v(&[0.0, 1.0]), v(&[1.0, 0.0])], &cfg).unwrap();
        assert!((segment - 0.5f64.sqrt()).abs() < 1e-3);
        // A singleton's min-norm point is itself.
        let single = brute_min_norm(&[v(&[3.0, 4.0])], &cfg).unwrap();
        assert!((single - 5.0).abs() < 1e-9);
    }

    #[test]
    fn convexity_probe_accepts_convex_and_rejects_concave() {
        let cfg = OracleConfig::default();
        let exp = ConvexFunction::named("exp_minus_one").unwrap();
        assert!(convexity_probe(&exp, &cfg).unwrap().is_none());

        let sys = MaxAffineSystem::new(
            vec![
                AffineRow::new("1", v(&[1.0, 1.0]), 1.0),
                AffineRow::new("2", v(&[-2.0, 1.0]), 2.0),
            ],
            NormSpec::Euclidean,
        )
        .unwrap();
        assert!(convexity_probe(&ConvexFunction::from_system(sys), &cfg)
            .unwrap()
            .is_none());

        let concave = ConvexFunction::custom(
            2,
            NormSpec::Euclidean,
            |x: &Vector| ExtReal::Finite(-x.dot(x)),
            None,
        )
        .unwrap();
        let violation = convexity_probe(&concave, &cfg).unwrap();
        let violation = violation.expect("a concave bowl must fail the midpoint check");
        assert!(violation.gap > 0.0);
    }
}
