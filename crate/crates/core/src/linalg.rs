//! Small dense linear-algebra helpers shared by the geometric kernels.
//!
//! Everything here works on systems of at most a few dozen unknowns, so the
//! implementations favor clarity over blocking or ordering tricks: Gaussian
//! elimination with partial pivoting and Gram-matrix solves cover every need.

/// Solves `A x = b` in place for a dense square system.
///
/// Returns `None` when a pivot falls below `tol` times the largest initial
/// entry, i.e. when the system is singular at working precision.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, tol: f64) -> Option<Vec<f64>> {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n) && b.len() == n);
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(1e-300);

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot_row][col].abs() < tol * scale {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }

    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Greedily selects a maximal linearly independent subset of `rows`,
/// preserving order, via modified Gram-Schmidt with a relative threshold.
pub(crate) fn independent_rows(rows: &[Vec<f64>], tol: f64) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    for (idx, row) in rows.iter().enumerate() {
        let mut r = row.clone();
        let norm0 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            continue;
        }
        for q in &basis {
            let proj: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
            for (ri, qi) in r.iter_mut().zip(q) {
                *ri -= proj * qi;
            }
        }
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > tol * norm0 {
            for v in r.iter_mut() {
                *v /= norm;
            }
            basis.push(r);
            kept.push(idx);
        }
    }
    kept
}

/// Projects `x0` onto the affine set `{x : <rows[i], x> = rhs[i]}`.
///
/// Dependent rows are dropped first; the remaining normal equations
/// `G lambda = A x0 - b` are solved and the multipliers are scattered back so
/// callers can run sign checks against the original row order.  Returns
/// `(projection, multipliers)` or `None` when the reduced Gram matrix is
/// still singular numerically.
pub(crate) fn project_onto_affine(
    x0: &[f64],
    rows: &[Vec<f64>],
    rhs: &[f64],
) -> Option<(Vec<f64>, Vec<f64>)> {
    project_onto_affine_kept(x0, rows, rhs).map(|(p, l, _)| (p, l))
}

/// Like [`project_onto_affine`], additionally reporting which row indices
/// survived the independence filter; dropped rows carry zero multipliers.
pub(crate) fn project_onto_affine_kept(
    x0: &[f64],
    rows: &[Vec<f64>],
    rhs: &[f64],
) -> Option<(Vec<f64>, Vec<f64>, Vec<usize>)> {
    let kept = independent_rows(rows, 1e-11);
    if kept.is_empty() {
        return Some((x0.to_vec(), vec![0.0; rows.len()], kept));
    }
    let m = kept.len();
    let mut gram = vec![vec![0.0; m]; m];
    let mut resid = vec![0.0; m];
    for (i, &ri) in kept.iter().enumerate() {
        for (j, &rj) in kept.iter().enumerate() {
            gram[i][j] = dot(&rows[ri], &rows[rj]);
        }
        resid[i] = dot(&rows[ri], x0) - rhs[ri];
    }
    let lambda_kept = solve_dense(gram, resid, 1e-12)?;
    let mut point = x0.to_vec();
    let mut lambda = vec![0.0; rows.len()];
    for (i, &ri) in kept.iter().enumerate() {
        lambda[ri] = lambda_kept[i];
        for (pk, ak) in point.iter_mut().zip(&rows[ri]) {
            *pk -= lambda_kept[i] * ak;
        }
    }
    Some((point, lambda, kept))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
