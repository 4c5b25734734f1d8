//! Minimum-cost assignment (Hungarian algorithm, Jonker–Volgenant style
//! shortest augmenting paths with potentials), O(n³).
//!
//! Used to match predicted atoms to ground-truth atoms per species. Kept
//! free of any crystal types so it can be tested as a plain LAP solver.

use crate::error::{Result, XtalError};

/// Solve the square linear assignment problem.
///
/// `cost[i][j]` is the cost of assigning row `i` to column `j`; all
/// entries must be finite. Returns `perm` with `perm[i] = j` (a
/// permutation) minimizing `Σ cost[i][perm[i]]`, and that minimal total.
/// Ties are broken deterministically (first optimal column found).
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Result<(Vec<usize>, f64)> {
    let n = cost.len();
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }
    for row in cost {
        if row.len() != n {
            return Err(XtalError::DimensionMismatch(format!(
                "cost matrix must be square: {n} rows but a row of length {}",
                row.len()
            )));
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(XtalError::NonFinite("assignment cost".into()));
        }
    }

    // 1-based arrays with a virtual 0th row/column, the standard
    // formulation of the potentials method.
    let mut u = vec![0.0f64; n + 1]; // row potentials
    let mut v = vec![0.0f64; n + 1]; // column potentials
    let mut p = vec![0usize; n + 1]; // p[j] = row currently matched to column j
    let mut way = vec![0usize; n + 1]; // predecessor column on the augmenting path

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        // unwind the augmenting path
        while j0 != 0 {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        }
    }

    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[p[j] - 1] = j - 1;
    }
    let total = perm
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .sum::<f64>();
    Ok((perm, total))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive minimum for cross-checking (test-only, n ≤ 6 or so).
    fn brute_force(cost: &[Vec<f64>]) -> f64 {
        fn rec(cost: &[Vec<f64>], row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
            if row == cost.len() {
                *best = best.min(acc);
                return;
            }
            for j in 0..cost.len() {
                if !used[j] {
                    used[j] = true;
                    rec(cost, row + 1, used, acc + cost[row][j], best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(cost, 0, &mut vec![false; cost.len()], 0.0, &mut best);
        best
    }

    #[test]
    fn empty_and_single() {
        assert_eq!(min_cost_assignment(&[]).unwrap(), (vec![], 0.0));
        let (perm, total) = min_cost_assignment(&[vec![7.5]]).unwrap();
        assert_eq!(perm, [0]);
        assert_eq!(total, 7.5);
    }

    #[test]
    fn hand_worked_matrices() {
        // off-diagonal is cheaper
        let (perm, total) = min_cost_assignment(&[vec![4.0, 1.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(perm, [1, 0]);
        assert_eq!(total, 3.0);

        // 3×3 with a non-obvious optimum (anti-diagonal, total 10)
        let cost = vec![
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![3.0, 6.0, 9.0],
        ];
        let (perm, total) = min_cost_assignment(&cost).unwrap();
        assert_eq!(total, 10.0);
        let mut seen = perm.clone();
        seen.sort_unstable();
        assert_eq!(seen, [0, 1, 2]); // a permutation
    }

    #[test]
    fn matches_brute_force_on_deterministic_random_matrices() {
        let mut rng = crate::split::SplitMix64::new(0xA55A);
        for n in 1..=6 {
            for _ in 0..20 {
                let cost: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.next_f64() * 10.0).collect())
                    .collect();
                let (perm, total) = min_cost_assignment(&cost).unwrap();
                let check: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
                assert!((total - check).abs() < 1e-9);
                let best = brute_force(&cost);
                assert!(
                    (total - best).abs() < 1e-9,
                    "n={n}: hungarian {total} vs brute force {best}"
                );
            }
        }
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(min_cost_assignment(&[vec![1.0, 2.0]]).is_err());
        assert!(min_cost_assignment(&[vec![f64::NAN]]).is_err());
    }
}
