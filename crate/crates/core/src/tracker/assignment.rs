//! Minimum-cost rectangular assignment (Hungarian method with row-by-row
//! shortest augmenting paths and dual potentials), O(n²m).

use nalgebra::DMatrix;

use super::TrackError;

/// Finite stand-in for a disallowed pairing. Large enough to lose against any
/// combination of ordinary costs in `[0, 1]`.
pub const FORBIDDEN: f64 = 1e6;

/// Returns `min(n, m)` `(row, col)` pairs with globally minimal total cost,
/// sorted by row.
///
/// Rows are inserted in ascending order and column scans run in ascending
/// order with strict comparisons, so among equal-cost optima the result is
/// a fixed function of the input on every platform.
pub fn hungarian(cost: &DMatrix<f64>) -> Result<Vec<(usize, usize)>, TrackError> {
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(TrackError::NonFiniteCost);
    }
    let (n, m) = cost.shape();
    if n == 0 || m == 0 {
        return Ok(Vec::new());
    }
    if n > m {
        let t = cost.transpose();
        let mut pairs: Vec<(usize, usize)> = solve(&t).into_iter().map(|(c, r)| (r, c)).collect();
        pairs.sort_unstable();
        return Ok(pairs);
    }
    Ok(solve(cost))
}

/// Requires rows ≤ cols.
fn solve(a: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let (n, m) = a.shape();
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    // row_of[j]: 1-based row assigned to column j (0 = free); index 0 is the
    // virtual column the augmenting path starts from.
    let mut row_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = a[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> = (1..=m)
        .filter(|&j| row_of[j] != 0)
        .map(|j| (row_of[j] - 1, j - 1))
        .collect();
    pairs.sort_unstable();
    pairs
}

/// Sum of the chosen entries in row order.
pub fn assignment_cost(cost: &DMatrix<f64>, pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().map(|&(r, c)| cost[(r, c)]).sum()
}
