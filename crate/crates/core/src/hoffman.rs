//! Hoffman bounds for finite linear inequality systems.
//!
//! For `f(x) = max_t (<a_t, x> - b_t)` with nonempty solution set, the
//! Hoffman constant is the infimum of `f(x) / d(x, S)` over infeasible
//! points.  Every zero-level point carries an active set, the active sets
//! that actually occur form a finite catalog, and the minimum over the
//! catalog of `|min_{||h||=1} max_{t in J} <a_t, h>|` bounds the Hoffman
//! constant from below.  This module enumerates the catalog exactly (each
//! candidate set reduces to a strict feasibility question), evaluates the
//! per-set sphere minima, estimates the constant by seeded sampling, and
//! sweeps tilt perturbations over an epsilon grid to expose systems whose
//! bound collapses under arbitrarily small data changes.

use crate::convex::{ConvexFunction, MaxAffineSystem};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::geometry::Vector;
use crate::moduli;
use crate::patterns;
use crate::sample;
use crate::sphere;

/// One realizable active set: its row labels, a zero-level point whose
/// active rows are exactly these, and the sphere minimum of its gradients.
#[derive(Clone, Debug)]
pub struct ActiveSetEntry {
    pub labels: Vec<String>,
    pub witness: Vector,
    pub op_value: f64,
    pub op_argmin: Vector,
    pub op_certified: bool,
}

/// Every realizable active set up to the searched size, in order of size
/// and then row position.
#[derive(Clone, Debug)]
pub struct ActiveSetCatalog {
    pub entries: Vec<ActiveSetEntry>,
    pub max_size_searched: usize,
    pub notes: Vec<String>,
}

impl ActiveSetCatalog {
    /// Looks a pattern up by its sorted labels.
    pub fn contains(&self, labels: &[String]) -> bool {
        let mut key: Vec<&str> = labels.iter().map(String::as_str).collect();
        key.sort_unstable();
        self.entries.iter().any(|e| {
            let mut have: Vec<&str> = e.labels.iter().map(String::as_str).collect();
            have.sort_unstable();
            have == key
        })
    }

    /// Minimum of `|op_value|` over the catalog; `+inf` when empty.
    pub fn lower_bound(&self) -> ExtReal {
        self.entries
            .iter()
            .map(|e| ExtReal::Finite(e.op_value.abs()))
            .fold(ExtReal::PosInf, ExtReal::min)
    }

    /// True when every per-set sphere minimum came from a certified method.
    pub fn fully_certified(&self) -> bool {
        self.entries.iter().all(|e| e.op_certified)
    }

    /// The entry with the smallest `|op_value|`, if any.
    pub fn weakest(&self) -> Option<&ActiveSetEntry> {
        self.entries.iter().min_by(|a, b| {
            a.op_value
                .abs()
                .partial_cmp(&b.op_value.abs())
                .expect("op values are finite")
        })
    }
}

/// Hard cap on examined candidate sets; larger searches truncate with a note.
pub(crate) const ENUMERATION_CAP: usize = 1 << 20;

/// Advances `combo` to the next size-`k` subset of `0..n` in lexicographic
/// order; returns false after the last one.
pub(crate) fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in (i + 1)..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Enumerates every realizable active set of size at most `max_size`
/// (default: all sizes).  A set `J` is realizable when some point has
/// `<a_t, x> = b_t` exactly for `t` in `J` and `<a_t, x> < b_t` strictly
/// otherwise; such a point is a zero-level point of `f` and is recorded as
/// the witness.  Requires a nonempty solution set.
pub fn enumerate_active_sets(
    sys: &MaxAffineSystem,
    max_size: Option<usize>,
) -> Result<ActiveSetCatalog> {
    if moduli::polyhedron_is_empty(sys)? {
        return Err(Error::invalid_input(
            "the solution set is empty; active sets of the zero level are undefined",
        ));
    }
    let t = sys.rows().len();
    let cap_size = max_size.unwrap_or(t).min(t);
    let mut entries = Vec::new();
    let mut notes = Vec::new();
    let mut examined = 0usize;
    let mut truncated = false;

    'sizes: for k in 1..=cap_size {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            if examined >= ENUMERATION_CAP {
                truncated = true;
                break 'sizes;
            }
            examined += 1;
            if let Some(entry) = realize(sys, &combo)? {
                entries.push(entry);
            }
            if !next_combination(&mut combo, t) {
                break;
            }
        }
    }
    if truncated {
        notes.push(format!(
            "enumeration truncated after {ENUMERATION_CAP} candidate sets; \
             the catalog may be incomplete"
        ));
    }
    Ok(ActiveSetCatalog { entries, max_size_searched: cap_size, notes })
}

/// Decides one candidate set and assembles its catalog entry.
fn realize(sys: &MaxAffineSystem, combo: &[usize]) -> Result<Option<ActiveSetEntry>> {
    let in_combo = |r: usize| combo.binary_search(&r).is_ok();
    let equalities: Vec<(Vec<f64>, f64)> = combo
        .iter()
        .map(|&t| (sys.rows()[t].gradient.coords().to_vec(), sys.rows()[t].offset))
        .collect();
    let inequalities: Vec<(Vec<f64>, f64)> = (0..sys.rows().len())
        .filter(|&r| !in_combo(r))
        .map(|r| (sys.rows()[r].gradient.coords().to_vec(), sys.rows()[r].offset))
        .collect();
    let witness = match patterns::strict_solution(sys.dim(), &equalities, &inequalities)? {
        None => return Ok(None),
        Some(w) => Vector::from_slice(&w.point),
    };
    let gradients: Vec<Vector> =
        combo.iter().map(|&t| sys.rows()[t].gradient.clone()).collect();
    let op = sphere::sphere_min_over_set(&gradients, sys.norm(), 0)?;
    Ok(Some(ActiveSetEntry {
        labels: combo.iter().map(|&t| sys.rows()[t].label.clone()).collect(),
        witness,
        op_value: op.value,
        op_argmin: op.argmin,
        op_certified: op.certified,
    }))
}

/// A lower bound on the Hoffman constant with its certification status.
#[derive(Clone, Copy, Debug)]
pub struct LowerBound {
    /// Minimum of `|op_value|` over realizable sets; `+inf` for an empty
    /// catalog (a solution set with no zero-level points).
    pub value: ExtReal,
    /// False when any per-set sphere minimum was estimate-only.
    pub certified: bool,
}

/// The catalog lower bound on the Hoffman constant.
pub fn hoffman_lower_bound(sys: &MaxAffineSystem, max_size: Option<usize>) -> Result<LowerBound> {
    let catalog = enumerate_active_sets(sys, max_size)?;
    Ok(LowerBound { value: catalog.lower_bound(), certified: catalog.fully_certified() })
}

/// The sphere minimum of one labeled row subset.
pub fn op_j(sys: &MaxAffineSystem, labels: &[&str]) -> Result<sphere::SphereMinResult> {
    let mut gradients = Vec::with_capacity(labels.len());
    for label in labels {
        let row = sys
            .rows()
            .iter()
            .find(|r| r.label == *label)
            .ok_or_else(|| Error::invalid_input(format!("unknown row label {label:?}")))?;
        gradients.push(row.gradient.clone());
    }
    sphere::sphere_min_over_set(&gradients, sys.norm(), 0)
}

/// A sampled estimate of the Hoffman constant.
#[derive(Clone, Debug)]
pub struct SampledSigma {
    /// Minimum observed ratio `f(x) / d(x, S)`; `+inf` if no sample
    /// qualified.
    pub value: ExtReal,
    /// Number of admitted samples.
    pub sample_count: usize,
    /// The admitted sample attaining the minimum.
    pub witness: Option<Vector>,
    pub notes: Vec<String>,
}

/// Estimates the Hoffman constant by sampling the ratio `f(x) / d(x, S)`.
///
/// Two sample sources: seeded shells around the origin and around the
/// first catalog witness, and deterministic probes marching from each
/// catalog witness along its escape direction (the negated sphere-minimum
/// argmin), where the ratio approaches `|op_value|`.  Samples are admitted
/// when the value is meaningfully positive and the distance is at least
/// `1e-4`, keeping roundoff out of the ratio.
pub fn hoffman_sampled(
    sys: &MaxAffineSystem,
    catalog: &ActiveSetCatalog,
    seed: u64,
    count: usize,
) -> Result<SampledSigma> {
    let f = ConvexFunction::from_system(sys.clone());
    let gscale = 1.0 + sys.gradient_scale();
    let mut notes = Vec::new();

    let mut points: Vec<Vector> = Vec::new();
    let mut probe_count = 0usize;
    for entry in &catalog.entries {
        if entry.op_value.abs() <= 1e-12 * gscale {
            continue;
        }
        let escape = -&entry.op_argmin;
        let base = 1.0 + entry.witness.norm2();
        for scale in [1e-3, 1e-2, 1e-1, 1.0] {
            points.push(entry.witness.add_scaled(scale * base, &escape));
            probe_count += 1;
        }
    }

    let mut centers: Vec<Vector> = vec![Vector::zeros(sys.dim())];
    if let Some(first) = catalog.entries.first() {
        centers.push(first.witness.clone());
    }
    let mut shell_index = 0u64;
    for center in &centers {
        for radius in [1.0, 10.0, 100.0] {
            let mut rng = sample::rng_from(sample::mix(seed, shell_index));
            shell_index += 1;
            for _ in 0..count {
                points.push(sample::in_shell(center, 0.5 * radius, radius, &mut rng));
            }
        }
    }
    notes.push(format!(
        "{probe_count} witness probes plus {} shell samples",
        points.len() - probe_count
    ));

    let mut best: Option<(f64, Vector)> = None;
    let mut admitted = 0usize;
    let mut positive_seen = false;
    for x in &points {
        let fx = sys.value(x);
        if fx <= 1e-12 * gscale * (1.0 + x.norm2()) {
            continue;
        }
        positive_seen = true;
        let d = match moduli::distance_to_solution(&f, x)?.distance {
            ExtReal::Finite(d) => d,
            ExtReal::PosInf => {
                return Err(Error::invalid_input(
                    "the solution set is empty; the Hoffman ratio is undefined",
                ))
            }
        };
        if d < 1e-4 {
            continue;
        }
        admitted += 1;
        let ratio = fx / d;
        if best.as_ref().map_or(true, |(b, _)| ratio < *b) {
            best = Some((ratio, x.clone()));
        }
    }
    if !positive_seen {
        notes.push(
            "every sample was feasible; the system may be satisfied on the whole region"
                .to_string(),
        );
    }
    let (value, witness) = match best {
        Some((v, w)) => (ExtReal::Finite(v), Some(w)),
        None => (ExtReal::PosInf, None),
    };
    Ok(SampledSigma { value, sample_count: admitted, witness, notes })
}

/// The tilted system `g = f + eps * <direction, . - anchor>`: every gradient
/// gains `eps * direction` and every offset absorbs the anchor shift, so
/// the anchor keeps its value and stays on the zero level.
///
/// The anchor must be a zero-level point of `sys` and the direction must
/// lie in the dual unit ball (up to roundoff), matching the perturbation
/// class whose stability the sweep explores.
pub fn perturb_system(
    sys: &MaxAffineSystem,
    anchor: &Vector,
    direction: &Vector,
    eps: f64,
) -> Result<MaxAffineSystem> {
    let fx = sys.value(anchor);
    let tol = 1e-9 * (1.0 + sys.gradient_scale()) * (1.0 + anchor.norm2());
    if fx.abs() > tol {
        return Err(Error::invalid_input(format!(
            "the perturbation anchor must lie on the zero level; f(anchor) = {fx:.3e}"
        )));
    }
    let dual = sys.norm().dual();
    let dnorm = dual.norm(direction);
    if dnorm > 1.0 + 1e-12 {
        return Err(Error::invalid_input(format!(
            "the tilt direction must lie in the dual unit ball; its dual norm is {dnorm}"
        )));
    }
    sys.tilted(direction, eps, anchor)
}

/// Plan for a perturbation sweep over tilt magnitudes and directions.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    /// Tilt magnitudes; zero cells reproduce the unperturbed report.
    pub eps_grid: Vec<f64>,
    /// Seeded random dual-unit directions appended to the axis directions.
    pub random_directions: usize,
    pub seed: u64,
    /// Catalog size cap forwarded to the per-cell enumeration.
    pub max_size: Option<usize>,
    /// Shell sample count forwarded to the per-cell sigma estimate.
    pub sample_count: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            eps_grid: vec![0.0, 0.01, 0.1],
            random_directions: 2,
            seed: 42,
            max_size: None,
            sample_count: 200,
        }
    }
}

/// One sweep cell: the bound and sampled constant of a tilted system.
#[derive(Clone, Debug)]
pub struct SweepCell {
    pub eps: f64,
    pub anchor_id: String,
    pub direction_id: String,
    pub lower_bound: ExtReal,
    pub sigma_sampled: ExtReal,
    /// A per-cell failure message; failing cells do not abort the sweep.
    pub error: Option<String>,
}

/// The sweep grid with per-epsilon minima.
#[derive(Clone, Debug)]
pub struct SweepTable {
    pub anchors: Vec<(String, Vector)>,
    pub directions: Vec<(String, Vector)>,
    /// Cells sorted by (eps, anchor index, direction index).
    pub cells: Vec<SweepCell>,
    /// Per-epsilon minima of (lower bound, sampled sigma) over the grid.
    pub summaries: Vec<(f64, ExtReal, ExtReal)>,
}

/// Sweeps tilt perturbations over the epsilon grid.  Anchors default to
/// one witness per catalog entry; directions are the signed coordinate
/// units followed by seeded random dual-unit vectors.  Each cell tilts the
/// system, re-enumerates its catalog, and re-samples its constant with the
/// same base seed, so the table is deterministic for a fixed config.
pub fn perturbation_sweep(sys: &MaxAffineSystem, cfg: &SweepConfig) -> Result<SweepTable> {
    let base_catalog = enumerate_active_sets(sys, cfg.max_size)?;
    if base_catalog.entries.is_empty() {
        return Err(Error::not_applicable(
            "the zero level is empty, so there is no anchor to perturb around",
        ));
    }
    let anchors: Vec<(String, Vector)> = base_catalog
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| (format!("a{i}"), e.witness.clone()))
        .collect();

    let dim = sys.dim();
    let dual = sys.norm().dual();
    let mut directions: Vec<(String, Vector)> = Vec::new();
    for i in 0..dim {
        directions.push((format!("+e{i}"), Vector::unit(dim, i)));
        directions.push((format!("-e{i}"), -&Vector::unit(dim, i)));
    }
    let mut rng = sample::rng_from(sample::mix(cfg.seed, 0xD1A));
    for r in 0..cfg.random_directions {
        directions.push((format!("r{r}"), sample::unit_sphere(dual, dim, &mut rng)));
    }

    let mut eps_grid = cfg.eps_grid.clone();
    eps_grid.sort_by(|a, b| a.partial_cmp(b).expect("epsilon grid entries must be comparable"));
    eps_grid.dedup();

    let mut cells = Vec::new();
    let mut summaries = Vec::new();
    // The zero cell is independent of anchor and direction; compute once.
    let unperturbed = if eps_grid.contains(&0.0) {
        let sampled = hoffman_sampled(sys, &base_catalog, cfg.seed, cfg.sample_count)?;
        Some((base_catalog.lower_bound(), sampled.value))
    } else {
        None
    };

    for &eps in &eps_grid {
        let mut eps_lower = ExtReal::PosInf;
        let mut eps_sigma = ExtReal::PosInf;
        for (anchor_id, anchor) in &anchors {
            for (direction_id, direction) in &directions {
                let (lower, sigma, error) = if eps == 0.0 {
                    let (l, s) = unperturbed.clone().expect("zero cell precomputed");
                    (l, s, None)
                } else {
                    match sweep_cell(sys, anchor, direction, eps, cfg) {
                        Ok((l, s)) => (l, s, None),
                        Err(e) => (ExtReal::PosInf, ExtReal::PosInf, Some(e.to_string())),
                    }
                };
                if error.is_none() {
                    eps_lower = eps_lower.min(lower);
                    eps_sigma = eps_sigma.min(sigma);
                }
                cells.push(SweepCell {
                    eps,
                    anchor_id: anchor_id.clone(),
                    direction_id: direction_id.clone(),
                    lower_bound: lower,
                    sigma_sampled: sigma,
                    error,
                });
            }
        }
        summaries.push((eps, eps_lower, eps_sigma));
    }
    Ok(SweepTable { anchors, directions, cells, summaries })
}

fn sweep_cell(
    sys: &MaxAffineSystem,
    anchor: &Vector,
    direction: &Vector,
    eps: f64,
    cfg: &SweepConfig,
) -> Result<(ExtReal, ExtReal)> {
    let tilted = perturb_system(sys, anchor, direction, eps)?;
    let catalog = enumerate_active_sets(&tilted, cfg.max_size)?;
    let lower = catalog.lower_bound();
    let sampled = hoffman_sampled(&tilted, &catalog, cfg.seed, cfg.sample_count)?;
    Ok((lower, sampled.value))
}

/// What `analyze` computes beyond the always-on catalog and bound.
#[derive(Clone, Debug)]
pub struct AnalyzeOptions {
    /// Catalog size cap; `None` searches every size.
    pub max_size: Option<usize>,
    pub seed: u64,
    /// Shell sample count for the sigma estimate.
    pub sample_count: usize,
    /// Runs a perturbation sweep when present.
    pub sweep: Option<SweepConfig>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { max_size: None, seed: 42, sample_count: 200, sweep: None }
    }
}

/// Everything this module knows about one system: the catalog, the
/// certified bound, the sampled constant, the stability verdict, and an
/// optional perturbation sweep.
#[derive(Clone, Debug)]
pub struct HoffmanReport {
    pub catalog: ActiveSetCatalog,
    pub lower_bound: LowerBound,
    pub sampled: SampledSigma,
    pub stability: crate::stability::GlobalStabilityReport,
    pub sweep: Option<SweepTable>,
}

/// Runs the full pipeline on one system.
pub fn analyze(sys: &MaxAffineSystem, opts: &AnalyzeOptions) -> Result<HoffmanReport> {
    let catalog = enumerate_active_sets(sys, opts.max_size)?;
    let lower_bound =
        LowerBound { value: catalog.lower_bound(), certified: catalog.fully_certified() };
    let sampled = hoffman_sampled(sys, &catalog, opts.seed, opts.sample_count)?;
    let stability = crate::stability::global_stability(
        &ConvexFunction::from_system(sys.clone()),
        opts.seed,
    )?;
    let sweep = match &opts.sweep {
        Some(cfg) => Some(perturbation_sweep(sys, cfg)?),
        None => None,
    };
    Ok(HoffmanReport { catalog, lower_bound, sampled, stability, sweep })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::AffineRow;
    use crate::geometry::NormSpec;

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

    fn opposing() -> MaxAffineSystem {
        MaxAffineSystem::new(
            vec![
                AffineRow::new("1", v(&[1.0, 1.0]), 0.0),
                AffineRow::new("2", v(&[-1.0, -1.0]), 0.0),
            ],
            NormSpec::Euclidean,
        )
        .unwrap()
    }

    #[test]
    fn triangle_catalog_has_exactly_six_sets() {
        let catalog = enumerate_active_sets(&triangle(), None).unwrap();
        let found: Vec<Vec<&str>> = catalog
            .entries
            .iter()
            .map(|e| e.labels.iter().map(String::as_str).collect())
            .collect();
        let expected: Vec<Vec<&str>> = vec![
            vec!["1"],
            vec!["2"],
            vec!["3"],
            vec!["1", "2"],
            vec!["1", "3"],
            vec!["2", "3"],
        ];
        assert_eq!(found, expected);
        // Every witness is a zero-level point with its pattern exact.
        let sys = triangle();
        for e in &catalog.entries {
            assert!(sys.value(&e.witness).abs() < 1e-9);
            assert_eq!(sys.active_labels(&e.witness, None), e.labels);
        }
        let bound = catalog.lower_bound();
        assert!((bound.finite().unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
        assert!(catalog.entries.iter().all(|e| e.op_certified));
    }

    #[test]
    fn opposing_catalog_is_the_pair_alone_with_zero_bound() {
        let catalog = enumerate_active_sets(&opposing(), None).unwrap();
        assert_eq!(catalog.entries.len(), 1);
        assert_eq!(catalog.entries[0].labels, vec!["1", "2"]);
        assert_eq!(catalog.lower_bound(), ExtReal::Finite(0.0));
    }

    #[test]
    fn sampled_sigma_respects_the_catalog_bound() {
        let sys = triangle();
        let catalog = enumerate_active_sets(&sys, None).unwrap();
        let bound = catalog.lower_bound().finite().unwrap();
        let sampled = hoffman_sampled(&sys, &catalog, 42, 100).unwrap();
        let sigma = sampled.value.finite().unwrap();
        assert!(sigma >= bound - 1e-6, "sigma {sigma} under bound {bound}");
        // Probes along the escape direction of the weakest set approach the
        // bound, so the estimate should not be far above it either.
        assert!(sigma <= bound + 1e-3, "sigma {sigma} far above bound {bound}");
        assert!(sampled.sample_count > 0);
    }

    #[test]
    fn perturbed_opposing_rows_reproduce_the_collapse() {
        // Tilt along +e2 around the origin: the known destabilizing data
        // perturbation whose Hoffman constant falls to eps/sqrt(2).
        let sys = opposing();
        for eps in [0.1, 0.01] {
            let tilted = perturb_system(&sys, &v(&[0.0, 0.0]), &v(&[0.0, 1.0]), eps).unwrap();
            let catalog = enumerate_active_sets(&tilted, None).unwrap();
            let bound = catalog.lower_bound().finite().unwrap();
            let expected = eps / 2f64.sqrt();
            assert!((bound - expected).abs() < 1e-12, "bound {bound} vs {expected}");
            let sampled = hoffman_sampled(&tilted, &catalog, 42, 100).unwrap();
            let sigma = sampled.value.finite().unwrap();
            assert!(sigma >= bound - 1e-6);
            assert!(sigma <= 1.05 * eps, "sigma {sigma} should collapse below {}", 1.05 * eps);
            // The ratio at the paper's witness point is eps/sqrt(2) exactly.
            let w = v(&[-eps, eps]);
            let fw = tilted.value(&w);
            let f = ConvexFunction::from_system(tilted.clone());
            let dw = moduli::distance_to_solution(&f, &w)
                .unwrap()
                .distance
                .finite()
                .unwrap();
            let ratio = fw / dw;
            assert!(
                (ratio - expected).abs() <= 0.02 * expected,
                "witness ratio {ratio} vs {expected}"
            );
        }
    }

    #[test]
    fn perturbation_rejects_bad_anchors_and_directions() {
        let sys = opposing();
        assert!(perturb_system(&sys, &v(&[1.0, 0.0]), &v(&[0.0, 1.0]), 0.1).is_err());
        assert!(perturb_system(&sys, &v(&[0.0, 0.0]), &v(&[0.0, 2.0]), 0.1).is_err());
    }

    #[test]
    fn sweep_zero_cells_match_the_unperturbed_report() {
        let sys = triangle();
        let cfg = SweepConfig {
            eps_grid: vec![0.0, 0.1],
            random_directions: 1,
            seed: 42,
            max_size: None,
            sample_count: 50,
        };
        let table = perturbation_sweep(&sys, &cfg).unwrap();
        let catalog = enumerate_active_sets(&sys, None).unwrap();
        let bound = catalog.lower_bound();
        let sigma = hoffman_sampled(&sys, &catalog, 42, 50).unwrap().value;
        for cell in table.cells.iter().filter(|c| c.eps == 0.0) {
            assert_eq!(cell.lower_bound, bound);
            assert_eq!(cell.sigma_sampled, sigma);
            assert!(cell.error.is_none());
        }
        // Sorted by (eps, anchor, direction): zero cells come first.
        let mut previous = (-1.0, usize::MAX, usize::MAX);
        let anchor_pos =
            |id: &str| table.anchors.iter().position(|(a, _)| a == id).unwrap();
        let dir_pos =
            |id: &str| table.directions.iter().position(|(d, _)| d == id).unwrap();
        for cell in &table.cells {
            let key = (cell.eps, anchor_pos(&cell.anchor_id), dir_pos(&cell.direction_id));
            assert!(
                key.0 > previous.0
                    || (key.0 == previous.0 && key.1 > previous.1)
                    || (key.0 == previous.0 && key.1 == previous.1 && key.2 > previous.2)
                    || previous.1 == usize::MAX,
                "cells out of order"
            );
            previous = key;
        }
        assert_eq!(table.summaries.len(), 2);
    }

    #[test]
    fn sweep_cells_keep_sigma_above_bound() {
        let table = perturbation_sweep(
            &opposing(),
            &SweepConfig {
                eps_grid: vec![0.01, 0.1],
                random_directions: 2,
                seed: 7,
                max_size: None,
                sample_count: 60,
            },
        )
        .unwrap();
        for cell in &table.cells {
            assert!(cell.error.is_none(), "cell failed: {:?}", cell.error);
            if let (ExtReal::Finite(l), ExtReal::Finite(s)) =
                (cell.lower_bound, cell.sigma_sampled)
            {
                assert!(s >= l - 1e-6, "cell sigma {s} under bound {l}");
            }
        }
    }

    #[test]
    fn truncation_is_reported_for_tiny_caps() {
        let catalog = enumerate_active_sets(&triangle(), Some(1)).unwrap();
        assert_eq!(catalog.max_size_searched, 1);
        assert_eq!(catalog.entries.len(), 3);
    }

    #[test]
    fn bound_and_per_set_values_match_hand_calculations() {
        let sys = triangle();
        let bound = hoffman_lower_bound(&sys, None).unwrap();
        assert!(bound.certified);
        assert!((bound.value.finite().unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
        // Per-set sphere minima: a singleton gives the negated row norm,
        // and the weakest pair attains the overall bound.
        let single = op_j(&sys, &["1"]).unwrap();
        assert!((single.value + 2f64.sqrt()).abs() < 1e-9);
        let pair = op_j(&sys, &["2", "3"]).unwrap();
        assert!((pair.value + 0.5f64.sqrt()).abs() < 1e-9);
        assert!(op_j(&sys, &["7"]).is_err());
    }

    #[test]
    fn analyze_assembles_the_full_report() {
        use crate::stability::StabilityVerdict;

        let report = analyze(&triangle(), &AnalyzeOptions::default()).unwrap();
        assert_eq!(report.catalog.entries.len(), 6);
        assert!(report.lower_bound.certified);
        let bound = report.lower_bound.value.finite().unwrap();
        assert!((bound - 0.5f64.sqrt()).abs() < 1e-9);
        let sigma = report.sampled.value.finite().unwrap();
        assert!(sigma >= bound - 1e-6);
        assert_eq!(report.stability.certificate.verdict, StabilityVerdict::Stable);
        assert!(report.sweep.is_none());

        let opts = AnalyzeOptions {
            sweep: Some(SweepConfig {
                eps_grid: vec![0.0, 0.1],
                random_directions: 0,
                sample_count: 60,
                ..SweepConfig::default()
            }),
            sample_count: 60,
            ..AnalyzeOptions::default()
        };
        let report = analyze(&opposing(), &opts).unwrap();
        assert_eq!(report.lower_bound.value, ExtReal::Finite(0.0));
        assert_eq!(report.stability.certificate.verdict, StabilityVerdict::Unstable);
        let sweep = report.sweep.unwrap();
        assert_eq!(sweep.summaries.len(), 2);
    }
}
