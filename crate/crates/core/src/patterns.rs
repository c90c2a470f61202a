//! Strict feasibility of mixed equality/strict-inequality systems.
//!
//! Both the zero-level active-set catalog and the interior flatness check
//! reduce to one question: is there a point satisfying a handful of
//! equalities exactly and the remaining inequalities with strictly positive
//! margin?  The equalities are eliminated first (projecting the origin onto
//! their affine set and verifying every row, including dependent ones, to
//! catch inconsistency), and the margin program runs in the nullspace
//! coordinates with each free coordinate split into positive and negative
//! parts, so the solver only ever sees data-scale numbers.  Elimination
//! keeps degenerate structure exact — a row that is constant over the
//! affine slice reduces to a genuinely zero row.  Every witness is verified
//! against the original inequalities before it is returned.

use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{LinearProgram, LpOutcome, Relation};

/// A strictly feasible point and its worst inequality margin
/// (`+inf` when there are no inequalities).
#[derive(Clone, Debug)]
pub(crate) struct StrictWitness {
    pub point: Vec<f64>,
    #[allow(dead_code)] // Catalog callers take the point; tests assert on the margin.
    pub margin: f64,
}

/// Cap on the margin variable; realizability only needs a positive margin,
/// so capping keeps the program bounded without changing the decision.
const MARGIN_CAP: f64 = 1.0;
/// Margins above this count as strictly positive.
const STRICT_TOL: f64 = 1e-9;

/// Orthonormal basis of the orthogonal complement of `span(rows)`.
pub(crate) fn orthonormal_nullspace(dim: usize, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let push_orthogonalized = |v: &[f64], basis: &mut Vec<Vec<f64>>| -> Option<Vec<f64>> {
        let mut r = v.to_vec();
        for q in basis.iter() {
            let proj = linalg::dot(&r, q);
            for (ri, qi) in r.iter_mut().zip(q) {
                *ri -= proj * qi;
            }
        }
        let norm = linalg::dot(&r, &r).sqrt();
        if norm > 1e-10 {
            for x in r.iter_mut() {
                *x /= norm;
            }
            Some(r)
        } else {
            None
        }
    };
    for row in rows {
        if let Some(q) = push_orthogonalized(row, &mut basis) {
            basis.push(q);
        }
    }
    let span_dim = basis.len();
    let mut complement = Vec::new();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        if let Some(q) = push_orthogonalized(&e, &mut basis) {
            basis.push(q.clone());
            complement.push(q);
        }
        if basis.len() == dim {
            break;
        }
    }
    debug_assert_eq!(span_dim + complement.len(), dim);
    complement
}

fn min_margin(point: &[f64], inequalities: &[(Vec<f64>, f64)]) -> f64 {
    inequalities
        .iter()
        .map(|(c, d)| d - linalg::dot(c, point))
        .fold(f64::INFINITY, f64::min)
}

/// Finds a point with `<a, x> = b` exactly for every equality and
/// `<c, x> < d` with margin above `1e-9` for every inequality, preferring
/// points near the projection of the origin onto the equality set.
/// `Ok(None)` means no such point exists.
pub(crate) fn strict_solution(
    dim: usize,
    equalities: &[(Vec<f64>, f64)],
    inequalities: &[(Vec<f64>, f64)],
) -> Result<Option<StrictWitness>> {
    // Eliminate the equalities.
    let (anchor, eq_rows) = if equalities.is_empty() {
        (vec![0.0; dim], Vec::new())
    } else {
        let rows: Vec<Vec<f64>> = equalities.iter().map(|(a, _)| a.clone()).collect();
        let rhs: Vec<f64> = equalities.iter().map(|(_, b)| *b).collect();
        let origin = vec![0.0; dim];
        match linalg::project_onto_affine(&origin, &rows, &rhs) {
            None => return Ok(None),
            Some((p, _)) => (p, rows),
        }
    };
    // Verify every equality at the anchor — dependent rows were dropped by
    // the projection, so an inconsistent system surfaces only here.
    for (a, b) in equalities {
        let scale = 1.0 + b.abs() + linalg::dot(a, a).sqrt() * (1.0 + linalg::dot(&anchor, &anchor).sqrt());
        if (linalg::dot(a, &anchor) - b).abs() > 1e-8 * scale {
            return Ok(None);
        }
    }

    // The anchor itself may already be strictly feasible.
    let anchor_margin = min_margin(&anchor, inequalities);
    if anchor_margin > STRICT_TOL {
        return Ok(Some(StrictWitness { point: anchor, margin: anchor_margin }));
    }

    let nullspace = orthonormal_nullspace(dim, &eq_rows);
    if nullspace.is_empty() {
        // The equalities pin the point down completely.
        return Ok(None);
    }

    match margin_program(&anchor, &nullspace, inequalities)? {
        Some(x) => {
            let witness = polished_witness(&anchor, x, inequalities);
            // Final verification in the original data; an unverifiable
            // margin means the pattern is not strictly realizable.
            if witness.margin > STRICT_TOL {
                Ok(Some(witness))
            } else {
                Ok(None)
            }
        }
        None => Ok(None),
    }
}

/// Maximizes the margin over `anchor + span(nullspace)`.  Each nullspace
/// coordinate is split into positive and negative parts, so the program
/// stays at the scale of the data; the margin cap keeps it bounded.
fn margin_program(
    anchor: &[f64],
    nullspace: &[Vec<f64>],
    inequalities: &[(Vec<f64>, f64)],
) -> Result<Option<Vec<f64>>> {
    let k = nullspace.len();
    // Variables: (z_i^+, z_i^-) pairs for the free nullspace coordinates,
    // then the margin s in [0, cap].
    let nvars = 2 * k + 1;
    let mut rows = Vec::with_capacity(inequalities.len() + 1);
    for (c, d) in inequalities {
        let mut coef = vec![0.0; nvars];
        let c_norm = linalg::dot(c, c).sqrt().max(1.0);
        for (i, n) in nullspace.iter().enumerate() {
            let mut ci = linalg::dot(c, n);
            // Rows constant over the affine slice reduce to exactly zero;
            // snap roundoff so it cannot masquerade as a degree of freedom.
            if ci.abs() <= 1e-12 * c_norm {
                ci = 0.0;
            }
            coef[2 * i] = ci;
            coef[2 * i + 1] = -ci;
        }
        coef[2 * k] = 1.0;
        rows.push((coef, Relation::Le, d - linalg::dot(c, anchor)));
    }
    let mut cap = vec![0.0; nvars];
    cap[2 * k] = 1.0;
    rows.push((cap, Relation::Le, MARGIN_CAP));
    let mut objective = vec![0.0; nvars];
    objective[2 * k] = 1.0;

    match crate::lp::solve(&LinearProgram { objective, rows })? {
        LpOutcome::Optimal { x, value } => {
            if value > STRICT_TOL {
                let mut point = anchor.to_vec();
                for (i, n) in nullspace.iter().enumerate() {
                    let z = x[2 * i] - x[2 * i + 1];
                    for (pj, nj) in point.iter_mut().zip(n) {
                        *pj += z * nj;
                    }
                }
                Ok(Some(point))
            } else {
                Ok(None)
            }
        }
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::numeric(
            "margin program reported an unbounded objective despite its cap",
            f64::NAN,
        )),
    }
}

/// Pulls an LP vertex witness back toward the anchor along their segment,
/// keeping the worst margin at `min(margin at vertex, 1e-3)`.  The anchor is
/// the projection of the origin onto the equality slice, so the polished
/// point is the closest segment point that still clears the target margin,
/// which keeps witness coordinates at the scale of the data.
fn polished_witness(
    anchor: &[f64],
    vertex: Vec<f64>,
    inequalities: &[(Vec<f64>, f64)],
) -> StrictWitness {
    let vertex_margin = min_margin(&vertex, inequalities);
    let target = vertex_margin.min(1e-3);
    let mut lambda: f64 = 0.0;
    for (c, d) in inequalities {
        let at_anchor = d - linalg::dot(c, anchor);
        let at_vertex = d - linalg::dot(c, &vertex);
        if at_anchor < target && at_vertex > at_anchor {
            lambda = lambda.max((target - at_anchor) / (at_vertex - at_anchor));
        }
    }
    lambda = lambda.clamp(0.0, 1.0);
    let point: Vec<f64> = anchor
        .iter()
        .zip(&vertex)
        .map(|(a, v)| a + lambda * (v - a))
        .collect();
    let margin = min_margin(&point, inequalities);
    if margin > STRICT_TOL {
        StrictWitness { point, margin }
    } else {
        // Roundoff spoiled the interpolation; fall back to the raw vertex.
        StrictWitness { point: vertex, margin: vertex_margin }
    }
}
