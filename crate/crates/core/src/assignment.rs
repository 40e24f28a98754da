//! Exact minimum-cost perfect assignment on square cost matrices.
//!
//! Shortest augmenting path Hungarian method with row/column potentials,
//! O(n^3). Costs are real; the reported total is re-summed from the chosen
//! entries rather than read off the potentials.

use crate::error::{Error, Result};

/// Dense square matrix of nonnegative finite costs, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::contract(format!(
                "cost matrix of size {n} needs {} entries, got {}",
                n * n,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::contract(format!(
                "cost entries must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(CostMatrix { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::contract("cost matrix is not square"));
        }
        Self::new(n, rows.concat())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Row `i` is matched to column `permutation[i]`.
    pub permutation: Vec<usize>,
    pub total_cost: f64,
}

/// Sums the chosen entries in ascending order of value, so the total depends
/// only on the multiset of selected costs and not on row order.
pub fn assignment_cost(c: &CostMatrix, permutation: &[usize]) -> f64 {
    dense_cost(c.n, &c.data, permutation)
}

fn dense_cost(n: usize, data: &[f64], permutation: &[usize]) -> f64 {
    let mut picked: Vec<f64> = permutation
        .iter()
        .enumerate()
        .map(|(i, &j)| data[i * n + j])
        .collect();
    picked.sort_unstable_by(f64::total_cmp);
    picked.iter().sum()
}

/// Minimum cost of a row-major `n x n` buffer whose entries are already
/// known to be finite and nonnegative.
pub(crate) fn min_cost_dense(n: usize, data: &[f64]) -> f64 {
    match n {
        0 => 0.0,
        1 => data[0],
        2 => (data[0] + data[3]).min(data[1] + data[2]),
        _ => dense_cost(n, data, &hungarian(n, data)),
    }
}

pub fn solve_assignment(c: &CostMatrix) -> Assignment {
    let permutation = hungarian(c.n, &c.data);
    let total_cost = assignment_cost(c, &permutation);
    Assignment {
        permutation,
        total_cost,
    }
}

/// Minimum assignment cost only.
pub fn min_cost(c: &CostMatrix) -> f64 {
    min_cost_dense(c.n, &c.data)
}

fn hungarian(n: usize, data: &[f64]) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    // 1-based rows/cols with a sentinel column 0.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let row = &data[(i0 - 1) * n..i0 * n];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = row[j - 1] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
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

    let mut permutation = vec![0usize; n];
    for j in 1..=n {
        permutation[row_of[j] - 1] = j - 1;
    }
    permutation
}

/// Exhaustive minimum over all `n!` permutations. Reference implementation
/// for small `n`; refuses `n > 10`.
pub fn brute_force_min_cost(c: &CostMatrix) -> Result<f64> {
    if c.n > 10 {
        return Err(Error::Resource(format!(
            "exhaustive assignment over {}! permutations",
            c.n
        )));
    }
    let mut perm: Vec<usize> = (0..c.n).collect();
    let mut best = f64::INFINITY;
    for_each_permutation(&mut perm, 0, &mut |p| {
        let cost = assignment_cost(c, p);
        if cost < best {
            best = cost;
        }
    });
    Ok(if c.n == 0 { 0.0 } else { best })
}

fn for_each_permutation(perm: &mut [usize], k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == perm.len() {
        f(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        for_each_permutation(perm, k + 1, f);
        perm.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(r: &[&[f64]]) -> CostMatrix {
        CostMatrix::from_rows(&r.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn one_by_one() {
        let a = solve_assignment(&rows(&[&[7.0]]));
        assert_eq!(a.permutation, vec![0]);
        assert_eq!(a.total_cost, 7.0);
    }

    #[test]
    fn zero_diagonal() {
        let a = solve_assignment(&rows(&[&[0.0, 1.0], &[1.0, 0.0]]));
        assert_eq!(a.permutation, vec![0, 1]);
        assert_eq!(a.total_cost, 0.0);
    }

    #[test]
    fn two_by_two_enumerated() {
        // min(1 + 4, 2 + 3) = 5; both permutations tie.
        let c = rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(solve_assignment(&c).total_cost, 5.0);
        assert_eq!(brute_force_min_cost(&c).unwrap(), 5.0);
    }

    #[test]
    fn empty_matrix() {
        let c = CostMatrix::new(0, vec![]).unwrap();
        assert_eq!(solve_assignment(&c).total_cost, 0.0);
        assert_eq!(min_cost(&c), 0.0);
    }

    #[test]
    fn contract_errors() {
        assert!(CostMatrix::from_rows(&[vec![1.0, 2.0]]).is_err());
        assert!(CostMatrix::new(1, vec![f64::NAN]).is_err());
        assert!(CostMatrix::new(1, vec![-1.0]).is_err());
        assert!(CostMatrix::new(2, vec![1.0]).is_err());
    }

    #[test]
    fn permutation_is_bijection_and_cost_matches() {
        let c = rows(&[
            &[4.0, 1.0, 3.0],
            &[2.0, 0.0, 5.0],
            &[3.0, 2.0, 2.0],
        ]);
        let a = solve_assignment(&c);
        let mut seen = a.permutation.clone();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2]);
        assert_eq!(a.total_cost, assignment_cost(&c, &a.permutation));
        assert_eq!(a.total_cost, 5.0);
    }
}
