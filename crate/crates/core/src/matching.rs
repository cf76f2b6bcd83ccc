//! Optimal pairing of two point multisets in the complex plane.

use num_complex::Complex64;

/// Result of pairing `a[i]` with `b[assignment[i]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pairing {
    pub assignment: Vec<usize>,
    /// Largest distance over the matched pairs.
    pub max_distance: f64,
}

/// Pairs two equally sized multisets so that the total distance is minimal
/// and reports the largest matched distance.
///
/// `distance` gets `(a_i, b_j)`.
pub fn pair_by<F>(a: &[Complex64], b: &[Complex64], distance: F) -> Pairing
where
    F: Fn(Complex64, Complex64) -> f64,
{
    assert_eq!(a.len(), b.len(), "pairing needs equally sized sets");
    let n = a.len();
    if n == 0 {
        return Pairing {
            assignment: Vec::new(),
            max_distance: 0.0,
        };
    }
    let cost: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| distance(*x, *y)).collect()).collect();
    let assignment = hungarian(&cost);
    let max_distance = assignment
        .iter()
        .enumerate()
        .map(|(i, j)| cost[i][*j])
        .fold(0.0, f64::max);
    Pairing {
        assignment,
        max_distance,
    }
}

/// Euclidean pairing distance: the largest `|a_i − b_σ(i)|` under the
/// minimum-total assignment σ.
pub fn pairing_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    pair_by(a, b, |x, y| (x - y).norm()).max_distance
}

/// Shortest-augmenting-path Hungarian algorithm on a square cost matrix.
/// Returns, for each row, the column assigned to it.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based potentials and matching, column 0 is a sentinel
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
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
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}
