//! Crate-private linear programming: a dense two-phase simplex over
//! nonnegative variables.  Callers express free variables either by a
//! nonnegative shift with box rows at data scale or by splitting into
//! positive and negative parts; every program this solver sees is small
//! and bounded in its objective.
//!
//! Rows are equilibrated to unit coefficient scale up front, and the pivot
//! tolerance is derived from coefficients and objective only — right-hand
//! sides may legitimately dwarf the coefficients, and letting them inflate
//! the tolerance once let an infeasible program through as "solved".
//! Bland's least-index rule governs both the entering and leaving choices,
//! which rules out cycling; an iteration cap remains as a defensive backstop.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Relation {
    Le,
    Eq,
}

/// Maximize `objective . x` subject to `rows` and `x >= 0`.
#[derive(Clone, Debug)]
pub(crate) struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Relation, f64)>,
}

#[derive(Clone, Debug)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    /// Constraint rows; each row has `ncols` coefficients then the rhs.
    rows: Vec<Vec<f64>>,
    /// Reduced costs `z_j - c_j` for the active objective.
    cost: Vec<f64>,
    kinds: Vec<ColKind>,
    basis: Vec<usize>,
    tol: f64,
    /// Largest right-hand side after equilibration; pivot arithmetic smears
    /// roundoff of this magnitude into the rhs column, so feasibility
    /// decisions must tolerate it.
    rhs_scale: f64,
}

pub(crate) fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.objective.len();
    for (a, _, _) in &lp.rows {
        if a.len() != n {
            return Err(Error::invalid_input("lp row length differs from objective"));
        }
    }

    let mut t = build_tableau(lp);

    // Phase 1: maximize minus the sum of artificials.
    let mut art_cost = vec![0.0; t.kinds.len()];
    for (j, k) in t.kinds.iter().enumerate() {
        if *k == ColKind::Artificial {
            art_cost[j] = -1.0;
        }
    }
    t.load_objective(&art_cost);
    let phase1 = t.run(true)?;
    if matches!(phase1, RunEnd::Unbounded) {
        // Phase 1 is bounded above by zero; reaching this means a broken
        // tableau rather than a property of the input.
        return Err(Error::numeric("phase-1 objective escaped its bound", f64::NAN));
    }
    // Artificial values live at rhs scale, so the feasibility verdict uses a
    // threshold that tracks rhs roundoff rather than the coefficient tol.
    let phase1_tol = (t.tol * 10.0).max(1e-11 * (1.0 + t.rhs_scale));
    let phase1_value = t.objective_value();
    if phase1_value > phase1_tol {
        // The phase-1 objective is minus a sum of nonnegative variables and
        // cannot be positive; a positive value means the tableau is corrupt.
        return Err(Error::numeric("phase-1 objective drifted positive", phase1_value));
    }
    if phase1_value < -phase1_tol {
        return Ok(LpOutcome::Infeasible);
    }
    t.evict_artificials();

    // Phase 2: the real objective over the feasible tableau.
    let mut full_cost = vec![0.0; t.kinds.len()];
    full_cost[..n].copy_from_slice(&lp.objective);
    t.load_objective(&full_cost);
    match t.run(false)? {
        RunEnd::Unbounded => Ok(LpOutcome::Unbounded),
        RunEnd::Optimal => {
            let mut x = vec![0.0; n];
            for (i, &b) in t.basis.iter().enumerate() {
                if b < n {
                    x[b] = *t.rows[i].last().unwrap();
                }
            }
            Ok(LpOutcome::Optimal { x, value: t.objective_value_of(&lp.objective) })
        }
    }
}

fn build_tableau(lp: &LinearProgram) -> Tableau {
    let n = lp.objective.len();
    let m = lp.rows.len();

    // Flip rows so every rhs is nonnegative; a flipped Le needs a surplus
    // column and an artificial, an unflipped Le just a slack.
    #[derive(Clone, Copy, PartialEq)]
    enum RowForm {
        Slack,
        SurplusArtificial,
        Artificial,
    }
    let mut body: Vec<(Vec<f64>, f64, RowForm)> = Vec::with_capacity(m);
    for (a, rel, b) in &lp.rows {
        // Equilibrate to unit coefficient scale so one badly scaled row
        // cannot blunt the shared pivot tolerance.
        let row_scale = a.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
        let (a, b) = if row_scale > 0.0 {
            (a.iter().map(|v| v / row_scale).collect::<Vec<f64>>(), b / row_scale)
        } else {
            (a.clone(), *b)
        };
        let flip = b < 0.0;
        let (a, b) = if flip {
            (a.iter().map(|v| -v).collect::<Vec<f64>>(), -b)
        } else {
            (a, b)
        };
        let form = match (rel, flip) {
            (Relation::Le, false) => RowForm::Slack,
            (Relation::Le, true) => RowForm::SurplusArtificial,
            (Relation::Eq, _) => RowForm::Artificial,
        };
        body.push((a, b, form));
    }

    let n_extra = body
        .iter()
        .map(|(_, _, f)| match f {
            RowForm::Slack | RowForm::Artificial => 1,
            RowForm::SurplusArtificial => 2,
        })
        .sum::<usize>();
    let ncols = n + n_extra;

    let mut kinds = vec![ColKind::Structural; n];
    let mut rows = vec![vec![0.0; ncols + 1]; m];
    let mut basis = vec![0usize; m];
    let mut next = n;
    for (i, (a, b, form)) in body.iter().enumerate() {
        rows[i][..n].copy_from_slice(a);
        rows[i][ncols] = *b;
        match form {
            RowForm::Slack => {
                rows[i][next] = 1.0;
                kinds.push(ColKind::Slack);
                basis[i] = next;
                next += 1;
            }
            RowForm::SurplusArtificial => {
                rows[i][next] = -1.0;
                kinds.push(ColKind::Slack);
                next += 1;
                rows[i][next] = 1.0;
                kinds.push(ColKind::Artificial);
                basis[i] = next;
                next += 1;
            }
            RowForm::Artificial => {
                rows[i][next] = 1.0;
                kinds.push(ColKind::Artificial);
                basis[i] = next;
                next += 1;
            }
        }
    }

    // Coefficients are equilibrated to at most one; the rhs column is
    // deliberately excluded from the pivot tolerance.
    let scale = rows
        .iter()
        .flat_map(|r| r[..ncols].iter())
        .chain(lp.objective.iter())
        .fold(1.0_f64, |s, v| s.max(v.abs()));
    let rhs_scale = rows.iter().map(|r| r[ncols].abs()).fold(0.0_f64, f64::max);
    Tableau { rows, cost: vec![0.0; ncols], kinds, basis, tol: 1e-9 * scale, rhs_scale }
}

enum RunEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.kinds.len()
    }

    /// Recomputes reduced costs `z_j - c_j` and the objective value for a new
    /// cost vector against the current basis.
    fn load_objective(&mut self, c: &[f64]) {
        let ncols = self.ncols();
        let mut cost = c.iter().map(|v| -v).collect::<Vec<f64>>();
        let mut value = 0.0;
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = c[b];
            if cb != 0.0 {
                for j in 0..ncols {
                    cost[j] += cb * self.rows[i][j];
                }
                value += cb * self.rows[i][ncols];
            }
        }
        cost.push(value);
        self.cost = cost;
    }

    fn objective_value(&self) -> f64 {
        *self.cost.last().unwrap()
    }

    fn objective_value_of(&self, c: &[f64]) -> f64 {
        let ncols = self.ncols();
        self.basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b < c.len())
            .map(|(i, &b)| c[b] * self.rows[i][ncols])
            .sum()
    }

    /// Bland-rule simplex on the loaded objective.  When `allow_artificial`
    /// is false, artificial columns are barred from entering the basis.
    fn run(&mut self, allow_artificial: bool) -> Result<RunEnd> {
        let ncols = self.ncols();
        let cap = 2000 + 200 * (self.rows.len() + ncols);
        for _ in 0..cap {
            let entering = (0..ncols).find(|&j| {
                self.cost[j] < -self.tol
                    && (allow_artificial || self.kinds[j] != ColKind::Artificial)
                    && !self.basis.contains(&j)
            });
            let j = match entering {
                None => return Ok(RunEnd::Optimal),
                Some(j) => j,
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][j];
                if a > self.tol {
                    // Roundoff can leave a basic rhs at a tiny negative
                    // value; clamping keeps the ratio test from treating it
                    // as an aggressively tight bound.
                    let ratio = (self.rows[i][ncols] / a).max(0.0);
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - self.tol
                                || (ratio < lr + self.tol && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                None => return Ok(RunEnd::Unbounded),
                Some((r, _)) => self.pivot(r, j),
            }
        }
        Err(Error::numeric("simplex iteration cap", self.objective_value()))
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let ncols = self.ncols();
        let piv = self.rows[r][j];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        for i in 0..self.rows.len() {
            if i != r {
                let f = self.rows[i][j];
                if f != 0.0 {
                    for k in 0..=ncols {
                        self.rows[i][k] -= f * self.rows[r][k];
                    }
                    self.rows[i][j] = 0.0;
                }
            }
        }
        let f = self.cost[j];
        if f != 0.0 {
            for k in 0..=ncols {
                self.cost[k] -= f * self.rows[r][k];
            }
            self.cost[j] = 0.0;
        }
        self.basis[r] = j;
    }

    /// After phase 1, pivot any artificial still in the basis out to a real
    /// column, or drop its row entirely when the row is redundant.
    fn evict_artificials(&mut self) {
        let ncols = self.ncols();
        let mut i = 0;
        while i < self.rows.len() {
            if self.kinds[self.basis[i]] != ColKind::Artificial {
                i += 1;
                continue;
            }
            let pivot_col = (0..ncols).find(|&j| {
                self.kinds[j] != ColKind::Artificial && self.rows[i][j].abs() > self.tol
            });
            match pivot_col {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    // All real coefficients vanished: the original row was a
                    // linear combination of the others.
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn optimal(lp: &LinearProgram) -> (Vec<f64>, f64) {
        match solve(lp).unwrap() {
            LpOutcome::Optimal { x, value } => (x, value),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn two_variable_vertex_optimum() {
        let lp = LinearProgram {
            objective: vec![1.0, 1.0],
            rows: vec![
                (vec![1.0, 2.0], Relation::Le, 4.0),
                (vec![3.0, 1.0], Relation::Le, 6.0),
            ],
        };
        let (x, value) = optimal(&lp);
        assert!((value - 2.8).abs() < 1e-9);
        assert!((x[0] - 1.6).abs() < 1e-9 && (x[1] - 1.2).abs() < 1e-9);
    }

    #[test]
    fn equality_and_inequality_mix() {
        // max y with x + y = 2 and y <= x: the optimum sits at x = y = 1.
        let lp = LinearProgram {
            objective: vec![0.0, 1.0],
            rows: vec![
                (vec![1.0, 1.0], Relation::Eq, 2.0),
                (vec![-1.0, 1.0], Relation::Le, 0.0),
            ],
        };
        let (x, value) = optimal(&lp);
        assert!((value - 1.0).abs() < 1e-9);
        assert!((x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_rows() {
        let lp = LinearProgram {
            objective: vec![1.0],
            rows: vec![(vec![1.0], Relation::Le, -1.0)],
        };
        assert!(matches!(solve(&lp).unwrap(), LpOutcome::Infeasible));
    }

    #[test]
    fn detects_unbounded_objective() {
        let lp = LinearProgram {
            objective: vec![1.0],
            rows: vec![(vec![-1.0], Relation::Le, 1.0)],
        };
        assert!(matches!(solve(&lp).unwrap(), LpOutcome::Unbounded));
    }

    #[test]
    fn survives_redundant_equality() {
        // The second equality is twice the first, leaving a basic artificial
        // at zero that must be evicted or dropped.
        let lp = LinearProgram {
            objective: vec![1.0, 0.0],
            rows: vec![
                (vec![1.0, 1.0], Relation::Eq, 2.0),
                (vec![2.0, 2.0], Relation::Eq, 4.0),
                (vec![1.0, 0.0], Relation::Le, 5.0),
            ],
        };
        let (x, value) = optimal(&lp);
        assert!((value - 2.0).abs() < 1e-9);
        assert!((x[0] - 2.0).abs() < 1e-9 && x[1].abs() < 1e-9);
    }

    #[test]
    fn degenerate_vertex_does_not_cycle() {
        let lp = LinearProgram {
            objective: vec![1.0, 1.0],
            rows: vec![
                (vec![1.0, 0.0], Relation::Le, 1.0),
                (vec![1.0, 0.0], Relation::Le, 1.0),
                (vec![0.0, 1.0], Relation::Le, 1.0),
                (vec![1.0, 1.0], Relation::Le, 2.0),
            ],
        };
        let (_, value) = optimal(&lp);
        assert!((value - 2.0).abs() < 1e-9);
    }

    /// Brute-force 2-D oracle: enumerate every pairwise constraint
    /// intersection (axes included), keep the feasible ones, and take the
    /// best objective value.  Valid because a bounded feasible 2-D program
    /// attains its optimum at such a vertex.
    fn vertex_oracle(lp: &LinearProgram) -> Option<f64> {
        let mut lines: Vec<(Vec<f64>, f64)> =
            lp.rows.iter().map(|(a, _, b)| (a.clone(), *b)).collect();
        lines.push((vec![1.0, 0.0], 0.0));
        lines.push((vec![0.0, 1.0], 0.0));
        let feasible = |x: &[f64]| {
            x[0] >= -1e-7
                && x[1] >= -1e-7
                && lp.rows.iter().all(|(a, rel, b)| {
                    let v = linalg::dot(a, x) - b;
                    match rel {
                        Relation::Le => v <= 1e-7,
                        Relation::Eq => v.abs() <= 1e-7,
                    }
                })
        };
        let mut best: Option<f64> = None;
        for i in 0..lines.len() {
            for j in (i + 1)..lines.len() {
                let a = vec![lines[i].0.clone(), lines[j].0.clone()];
                let b = vec![lines[i].1, lines[j].1];
                if let Some(x) = linalg::solve_dense(a, b, 1e-9) {
                    if feasible(&x) {
                        let v = linalg::dot(&lp.objective, &x);
                        best = Some(best.map_or(v, |u: f64| u.max(v)));
                    }
                }
            }
        }
        best
    }

    #[test]
    fn agrees_with_vertex_enumeration_on_random_programs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in 0..60 {
            let k = rng.gen_range(1..=4);
            let mut rows = Vec::new();
            for _ in 0..k {
                let rel = if rng.gen_bool(0.25) { Relation::Eq } else { Relation::Le };
                rows.push((
                    vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                    rel,
                    rng.gen_range(-1.0..2.0),
                ));
            }
            // Box rows keep every instance bounded.
            rows.push((vec![1.0, 0.0], Relation::Le, 10.0));
            rows.push((vec![0.0, 1.0], Relation::Le, 10.0));
            let lp = LinearProgram {
                objective: vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                rows,
            };
            match (solve(&lp).unwrap(), vertex_oracle(&lp)) {
                (LpOutcome::Optimal { value, .. }, Some(expect)) => {
                    assert!(
                        (value - expect).abs() <= 1e-6 * (1.0 + expect.abs()),
                        "case {case}: simplex {value}, oracle {expect}"
                    );
                }
                (LpOutcome::Infeasible, None) => {}
                (got, oracle) => panic!("case {case}: simplex {got:?}, oracle {oracle:?}"),
            }
        }
    }
}
