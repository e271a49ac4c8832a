//! Optimal-transport multivariate ranks: a minimum-cost bijection from a
//! pooled sample onto the fixed reference set.

use crate::error::{Error, Result};
use crate::sequence::reference_set;

/// Two stacked samples sharing one empirical measure, first block first.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledSample {
    dim: usize,
    points: Vec<Vec<f64>>,
    block_sizes: (usize, usize),
}

impl PooledSample {
    /// Pools `x` and `y`, keeping `x` first.
    pub fn from_blocks(x: Vec<Vec<f64>>, y: Vec<Vec<f64>>) -> Result<Self> {
        let n = x.len();
        let m = y.len();
        let mut points = x;
        points.extend(y);
        Self::new(points, (n, m))
    }

    /// Pools `points` with the first `left` entries forming the first block.
    pub fn split(points: Vec<Vec<f64>>, left: usize) -> Result<Self> {
        let right = points.len().saturating_sub(left);
        Self::new(points, (left, right))
    }

    fn new(points: Vec<Vec<f64>>, block_sizes: (usize, usize)) -> Result<Self> {
        let len = points.len();
        if len < 2 {
            return Err(Error::PooledTooSmall { len });
        }
        let (n, m) = block_sizes;
        if n == 0 || m == 0 || n + m != len {
            return Err(Error::BadBlockSizes { n, m, len });
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                index: 0,
                got: 0,
                expected: 1,
            });
        }
        for (index, point) in points.iter().enumerate() {
            if point.len() != dim {
                return Err(Error::DimensionMismatch {
                    index,
                    got: point.len(),
                    expected: dim,
                });
            }
            if point.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFiniteObservation { index });
            }
        }
        Ok(Self {
            dim,
            points,
            block_sizes,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn block_sizes(&self) -> (usize, usize) {
        self.block_sizes
    }
}

/// The rank image of a pooled sample.
#[derive(Debug, Clone, PartialEq)]
pub struct RankMap {
    /// `assignment[i]` is the reference index given to sample point `i`;
    /// always a bijection onto `0..N`.
    pub assignment: Vec<usize>,
    /// `ranks[i]` is the reference point assigned to sample point `i`.
    pub ranks: Vec<Vec<f64>>,
    /// Total squared-distance transport cost of the assignment.
    pub cost: f64,
}

/// Exact minimum-cost perfect assignment on a square cost matrix.
///
/// Shortest-augmenting-path method with dual potentials, O(N^3). When
/// several permutations tie for the optimum (within 1e-12 of it, scaled by
/// the largest cost magnitude), the lexicographically smallest one is
/// returned, so degenerate inputs still give one reproducible answer.
pub fn solve_assignment(costs: &[Vec<f64>]) -> Result<Vec<usize>> {
    let n = costs.len();
    for (row, entries) in costs.iter().enumerate() {
        if entries.len() != n {
            return Err(Error::NonSquareCostMatrix {
                row,
                len: entries.len(),
                expected: n,
            });
        }
        for (col, &c) in entries.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFiniteCost { row, col });
            }
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    let (row_to_col, row_duals, col_duals) = shortest_augmenting_path(costs);
    let scale = costs
        .iter()
        .flatten()
        .fold(1.0f64, |acc, &c| acc.max(c.abs()));
    let tolerance = 1e-12 * scale;
    Ok(lexicographic_tight_matching(
        costs, &row_duals, &col_duals, tolerance, row_to_col,
    ))
}

/// Classic O(N^3) assignment with potentials; 1-based internally, column 0
/// is the virtual source. Returns the matching and the final dual values.
fn shortest_augmenting_path(costs: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = costs.len();
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut col_owner = vec![0usize; n + 1];
    let mut previous = vec![0usize; n + 1];

    for row in 1..=n {
        col_owner[0] = row;
        let mut j0 = 0usize;
        let mut min_reduced = vec![f64::INFINITY; n + 1];
        let mut visited = vec![false; n + 1];
        loop {
            visited[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if visited[j] {
                    continue;
                }
                let reduced = costs[i0 - 1][j - 1] - u[i0] - v[j];
                if reduced < min_reduced[j] {
                    min_reduced[j] = reduced;
                    previous[j] = j0;
                }
                if min_reduced[j] < delta {
                    delta = min_reduced[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if visited[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_reduced[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = previous[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if col_owner[j] > 0 {
            row_to_col[col_owner[j] - 1] = j - 1;
        }
    }
    (row_to_col, u[1..].to_vec(), v[1..].to_vec())
}

/// Rebuilds the matching row by row, always keeping the smallest tight
/// column that still leaves the remaining rows matchable. Every optimal
/// permutation lives on the tight edges of the final duals, so the result
/// is the lexicographically smallest optimum.
fn lexicographic_tight_matching(
    costs: &[Vec<f64>],
    row_duals: &[f64],
    col_duals: &[f64],
    tolerance: f64,
    initial: Vec<usize>,
) -> Vec<usize> {
    let n = initial.len();
    let tight: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| costs[i][j] - row_duals[i] - col_duals[j] <= tolerance)
                .collect()
        })
        .collect();

    let mut row_to_col = initial;
    let mut col_to_row = vec![usize::MAX; n];
    for (i, &j) in row_to_col.iter().enumerate() {
        col_to_row[j] = i;
    }
    let mut fixed = vec![false; n];

    for i in 0..n {
        for &j in &tight[i] {
            if fixed[j] {
                continue;
            }
            if row_to_col[i] == j {
                break;
            }
            let saved_rows = row_to_col.clone();
            let saved_cols = col_to_row.clone();
            let freed = row_to_col[i];
            let displaced = col_to_row[j];
            col_to_row[freed] = usize::MAX;
            row_to_col[i] = j;
            col_to_row[j] = i;
            let mut visited = vec![false; n];
            visited[j] = true;
            let rematched = displaced == usize::MAX
                || augment(
                    displaced,
                    &tight,
                    &mut row_to_col,
                    &mut col_to_row,
                    &fixed,
                    &mut visited,
                );
            if rematched {
                break;
            }
            row_to_col = saved_rows;
            col_to_row = saved_cols;
        }
        fixed[row_to_col[i]] = true;
    }
    row_to_col
}

fn augment(
    row: usize,
    tight: &[Vec<usize>],
    row_to_col: &mut [usize],
    col_to_row: &mut [usize],
    fixed: &[bool],
    visited: &mut [bool],
) -> bool {
    for &j in &tight[row] {
        if fixed[j] || visited[j] {
            continue;
        }
        visited[j] = true;
        let owner = col_to_row[j];
        if owner == usize::MAX || augment(owner, tight, row_to_col, col_to_row, fixed, visited) {
            row_to_col[row] = j;
            col_to_row[j] = row;
            return true;
        }
    }
    false
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Joint empirical rank map of a pooled sample.
///
/// The reference set for the pooled size is built and each sample point
/// receives exactly one reference point. Dimension 1 sorts the values
/// (ties keep their original order) against the grid; higher dimensions
/// solve the assignment problem on squared Euclidean costs.
pub fn rank_map(pooled: &PooledSample) -> Result<RankMap> {
    let n = pooled.len();
    let refs = reference_set(n, pooled.dim())?;
    let assignment = if pooled.dim() == 1 {
        let points = pooled.points();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(a.cmp(&b)));
        let mut assignment = vec![0usize; n];
        for (position, &sample) in order.iter().enumerate() {
            assignment[sample] = position;
        }
        assignment
    } else {
        let costs: Vec<Vec<f64>> = pooled
            .points()
            .iter()
            .map(|z| {
                refs.points
                    .iter()
                    .map(|h| squared_distance(z, h))
                    .collect()
            })
            .collect();
        solve_assignment(&costs)?
    };
    let ranks: Vec<Vec<f64>> = assignment
        .iter()
        .map(|&j| refs.points[j].clone())
        .collect();
    let cost = pooled
        .points()
        .iter()
        .zip(&ranks)
        .map(|(z, h)| squared_distance(z, h))
        .sum();
    Ok(RankMap {
        assignment,
        ranks,
        cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Minimum-cost permutation by exhaustive search; among permutations
    /// within `1e-12` of the optimum, the lexicographically smallest.
    fn brute_force(costs: &[Vec<f64>]) -> (Vec<usize>, f64) {
        let n = costs.len();
        let mut best_cost = f64::INFINITY;
        for perm in (0..n).permutations(n) {
            let total: f64 = perm.iter().enumerate().map(|(i, &j)| costs[i][j]).sum();
            if total < best_cost {
                best_cost = total;
            }
        }
        for perm in (0..n).permutations(n) {
            let total: f64 = perm.iter().enumerate().map(|(i, &j)| costs[i][j]).sum();
            if total <= best_cost + 1e-12 {
                return (perm, best_cost);
            }
        }
        unreachable!("some permutation attains the minimum");
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(0.0..10.0)).collect())
            .collect()
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect()
    }

    #[test]
    fn single_entry_matrix() {
        assert_eq!(solve_assignment(&[vec![7.0]]).unwrap(), vec![0]);
    }

    #[test]
    fn diagonal_zero_matrix_picks_identity() {
        let costs: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| ((i as f64) - (j as f64)).powi(2)).collect())
            .collect();
        assert_eq!(solve_assignment(&costs).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn seeded_5x5_matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let costs = random_matrix(&mut rng, 5);
        let (expected, expected_cost) = brute_force(&costs);
        let got = solve_assignment(&costs).unwrap();
        let got_cost: f64 = got.iter().enumerate().map(|(i, &j)| costs[i][j]).sum();
        assert_eq!(got, expected);
        assert!((got_cost - expected_cost).abs() <= 1e-9);
    }

    #[test]
    fn optimality_over_small_random_instances() {
        for n in 2..=6 {
            for seed in 0..20u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed * 100 + n as u64);
                let costs = random_matrix(&mut rng, n);
                let (expected, expected_cost) = brute_force(&costs);
                let got = solve_assignment(&costs).unwrap();
                let got_cost: f64 = got.iter().enumerate().map(|(i, &j)| costs[i][j]).sum();
                assert!(
                    (got_cost - expected_cost).abs() <= 1e-9,
                    "n={n} seed={seed}: cost {got_cost} vs {expected_cost}"
                );
                assert_eq!(got, expected, "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn ties_resolve_to_lexicographically_smallest() {
        assert_eq!(
            solve_assignment(&[vec![0.0; 4], vec![0.0; 4], vec![0.0; 4], vec![0.0; 4]]).unwrap(),
            vec![0, 1, 2, 3]
        );
        // Rows 0 and 1 tie on columns 0 and 1; row 2 must take column 2.
        let costs = vec![
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0],
            vec![5.0, 5.0, 0.0],
        ];
        assert_eq!(solve_assignment(&costs).unwrap(), vec![0, 1, 2]);
        // The cheap edge forces the anti-diagonal despite the tie-break.
        let costs = vec![vec![0.0, 0.0], vec![0.0, -5.0]];
        assert_eq!(solve_assignment(&costs).unwrap(), vec![0, 1]);
        let costs = vec![vec![0.0, 0.0], vec![-5.0, 0.0]];
        assert_eq!(solve_assignment(&costs).unwrap(), vec![1, 0]);
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(matches!(
            solve_assignment(&[vec![1.0, 2.0], vec![3.0]]),
            Err(Error::NonSquareCostMatrix { row: 1, .. })
        ));
        assert!(matches!(
            solve_assignment(&[vec![1.0, f64::NAN], vec![3.0, 4.0]]),
            Err(Error::NonFiniteCost { row: 0, col: 1 })
        ));
        assert!(solve_assignment(&[vec![f64::INFINITY]]).is_err());
    }

    #[test]
    fn pooled_sample_validation() {
        assert!(matches!(
            PooledSample::split(vec![vec![1.0]], 1),
            Err(Error::PooledTooSmall { len: 1 })
        ));
        assert!(PooledSample::split(vec![vec![1.0], vec![2.0]], 0).is_err());
        assert!(PooledSample::split(vec![vec![1.0], vec![2.0]], 2).is_err());
        assert!(matches!(
            PooledSample::from_blocks(vec![vec![1.0]], vec![vec![2.0, 3.0]]),
            Err(Error::DimensionMismatch { index: 1, .. })
        ));
        assert!(matches!(
            PooledSample::from_blocks(vec![vec![1.0]], vec![vec![f64::NAN]]),
            Err(Error::NonFiniteObservation { index: 1 })
        ));
        let pooled = PooledSample::from_blocks(vec![vec![1.0], vec![2.0]], vec![vec![3.0]]).unwrap();
        assert_eq!(pooled.block_sizes(), (2, 1));
        assert_eq!(pooled.len(), 3);
        assert_eq!(pooled.dim(), 1);
    }

    #[test]
    fn univariate_ranks_sort_against_the_grid() {
        let pooled =
            PooledSample::split(vec![vec![1.0], vec![3.0], vec![2.0], vec![4.0]], 2).unwrap();
        let map = rank_map(&pooled).unwrap();
        assert_eq!(
            map.ranks,
            vec![vec![0.25], vec![0.75], vec![0.5], vec![1.0]]
        );
        assert_eq!(map.assignment, vec![0, 2, 1, 3]);
    }

    #[test]
    fn univariate_ties_keep_original_order() {
        let pooled =
            PooledSample::split(vec![vec![5.0], vec![5.0], vec![1.0], vec![5.0]], 2).unwrap();
        let map = rank_map(&pooled).unwrap();
        assert_eq!(map.assignment, vec![1, 2, 0, 3]);
    }

    #[test]
    fn bivariate_cost_matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let points = random_points(&mut rng, 6, 2);
        let pooled = PooledSample::split(points.clone(), 3).unwrap();
        let map = rank_map(&pooled).unwrap();

        let refs = reference_set(6, 2).unwrap();
        let mut best = f64::INFINITY;
        for perm in (0..6).permutations(6) {
            let total: f64 = perm
                .iter()
                .enumerate()
                .map(|(i, &j)| squared_distance(&points[i], &refs.points[j]))
                .sum();
            best = best.min(total);
        }
        assert!((map.cost - best).abs() <= 1e-9);
    }

    #[test]
    fn optimal_cost_over_many_small_instances() {
        for &dim in &[2usize, 3] {
            for n in 4..=6 {
                for seed in 0..25u64 {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000 * n as u64 + dim as u64);
                    let points = random_points(&mut rng, n, dim);
                    let pooled = PooledSample::split(points.clone(), 2).unwrap();
                    let map = rank_map(&pooled).unwrap();
                    let refs = reference_set(n, dim).unwrap();
                    let mut best = f64::INFINITY;
                    for perm in (0..n).permutations(n) {
                        let total: f64 = perm
                            .iter()
                            .enumerate()
                            .map(|(i, &j)| squared_distance(&points[i], &refs.points[j]))
                            .sum();
                        best = best.min(total);
                    }
                    assert!(
                        (map.cost - best).abs() <= 1e-9,
                        "n={n} dim={dim} seed={seed}"
                    );
                }
            }
        }
    }

    #[test]
    fn assignment_is_a_bijection_for_larger_inputs() {
        for &(n, dim) in &[(37usize, 2usize), (120, 3), (500, 2)] {
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            let points = random_points(&mut rng, n, dim);
            let pooled = PooledSample::split(points, n / 2).unwrap();
            let map = rank_map(&pooled).unwrap();
            let mut targets: Vec<usize> = map.assignment.clone();
            targets.sort_unstable();
            assert_eq!(targets, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn affine_maps_leave_the_assignment_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let points = random_points(&mut rng, 12, 2);
            let scale: f64 = rng.gen_range(0.1..4.0);
            let shift = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let mapped: Vec<Vec<f64>> = points
                .iter()
                .map(|p| p.iter().zip(shift.iter()).map(|(c, s)| scale * c + s).collect())
                .collect();
            let base = rank_map(&PooledSample::split(points, 6).unwrap()).unwrap();
            let moved = rank_map(&PooledSample::split(mapped, 6).unwrap()).unwrap();
            assert_eq!(base.assignment, moved.assignment);
        }
    }

    #[test]
    fn univariate_sort_agrees_with_the_assignment_solver() {
        for n in 2..=8usize {
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64 + 77);
            let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let points: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
            let pooled = PooledSample::split(points.clone(), 1).unwrap();
            let sorted_map = rank_map(&pooled).unwrap();

            let refs = reference_set(n, 1).unwrap();
            let costs: Vec<Vec<f64>> = points
                .iter()
                .map(|z| refs.points.iter().map(|h| squared_distance(z, h)).collect())
                .collect();
            let solved = solve_assignment(&costs).unwrap();
            assert_eq!(sorted_map.assignment, solved, "n={n}");
        }
    }
}
