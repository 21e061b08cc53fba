//! Minimum-cost bipartite assignment with a cost gate.
//!
//! The tracker matches predicted track boxes against detections on
//! `1 - IoU` cost; pairs whose cost exceeds the gate (or is non-finite,
//! used for class gating) are inadmissible. The solver maximizes the
//! number of admissible matches first, then minimizes total cost, then
//! prefers lexicographically small `(row, col)` pairs so equal-cost
//! optima resolve the same way on every run.

/// Result of an assignment: matched pairs plus the leftovers on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Matched `(row, col)` pairs, sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
    /// Sum of matched costs, accumulated in row order.
    pub total_cost: f64,
}

/// Dense row-major cost matrix.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CostMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged cost matrix");
        CostMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

#[inline]
fn admissible(cost: f64, gate: f64) -> bool {
    cost.is_finite() && cost <= gate
}

/// Solves the gated assignment problem.
///
/// Inadmissible pairs (cost above `gate`, or NaN/infinite) never appear in
/// the output; rows and columns that end up without an admissible partner
/// are reported as unmatched. An empty matrix yields an empty assignment.
pub fn min_cost_assignment(cost: &CostMatrix, gate: f64) -> Assignment {
    let (r, c) = (cost.rows(), cost.cols());
    if r == 0 || c == 0 {
        return Assignment {
            pairs: Vec::new(),
            unmatched_rows: (0..r).collect(),
            unmatched_cols: (0..c).collect(),
            total_cost: 0.0,
        };
    }

    // Square augmentation of side r + c: real row i may fall back to dummy
    // column c + i (staying unmatched), dummy row r + j may absorb real
    // column j. The unmatch penalty exceeds any admissible total, so
    // cardinality dominates cost; BIG keeps inadmissible pairs out entirely.
    let mut scale = 0.0f64;
    for i in 0..r {
        for j in 0..c {
            let v = cost.at(i, j);
            if admissible(v, gate) {
                scale += v.abs();
            }
        }
    }
    let penalty = scale + 1.0;
    let big = penalty * 4.0 * (r + c) as f64;

    let dim = r + c;
    let mut a = vec![big; dim * dim];
    for i in 0..r {
        for j in 0..c {
            let v = cost.at(i, j);
            if admissible(v, gate) {
                a[i * dim + j] = v;
            }
        }
        a[i * dim + (c + i)] = penalty;
    }
    for j in 0..c {
        a[(r + j) * dim + j] = penalty;
    }
    for i in 0..c {
        for j in 0..r {
            a[(r + i) * dim + (c + j)] = 0.0;
        }
    }

    let col_to_row = solve_square(&a, dim);

    let mut row_to_col: Vec<Option<usize>> = vec![None; r];
    for (col, &row) in col_to_row.iter().enumerate() {
        if row < r && col < c && admissible(cost.at(row, col), gate) {
            row_to_col[row] = Some(col);
        }
    }

    lexicographic_refine(cost, gate, &mut row_to_col);

    let mut pairs = Vec::new();
    let mut unmatched_rows = Vec::new();
    let mut used_cols = vec![false; c];
    let mut total = 0.0;
    for (row, assigned) in row_to_col.iter().enumerate() {
        match assigned {
            Some(col) => {
                pairs.push((row, *col));
                used_cols[*col] = true;
                total += cost.at(row, *col);
            }
            None => unmatched_rows.push(row),
        }
    }
    let unmatched_cols = (0..c).filter(|&j| !used_cols[j]).collect();

    Assignment { pairs, unmatched_rows, unmatched_cols, total_cost: total }
}

/// O(n^3) shortest-augmenting-path assignment on a square matrix.
/// Returns `col -> row`. Scan order is fixed, so the result is
/// deterministic for a given matrix.
fn solve_square(a: &[f64], n: usize) -> Vec<usize> {
    // 1-indexed with a virtual column 0, the classic potentials formulation.
    let inf = f64::INFINITY;
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j]: row matched to column j
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = a[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
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

    let mut col_to_row = vec![usize::MAX; n];
    for j in 1..=n {
        if p[j] != 0 {
            col_to_row[j - 1] = p[j] - 1;
        }
    }
    col_to_row
}

/// Cost-preserving exchange pass: among equal-cost optima, move matches
/// toward lexicographically smaller `(row, col)` pairs. Only exchanges
/// whose pairwise sums are exactly equal are taken, so optimality and
/// cardinality are untouched.
fn lexicographic_refine(cost: &CostMatrix, gate: f64, row_to_col: &mut [Option<usize>]) {
    let r = row_to_col.len();
    let c = cost.cols();
    let mut col_owner: Vec<Option<usize>> = vec![None; c];
    for (row, assigned) in row_to_col.iter().enumerate() {
        if let Some(col) = assigned {
            col_owner[*col] = Some(row);
        }
    }

    let max_passes = r * c + 1;
    for _ in 0..max_passes {
        let mut changed = false;
        for i in 0..r {
            let current = row_to_col[i];
            // only columns below the current one can improve row i's slot;
            // an unmatched row may claim any column from a later owner
            let limit = current.unwrap_or(c);
            for j in 0..limit {
                if !admissible(cost.at(i, j), gate) {
                    continue;
                }
                match (current, col_owner[j]) {
                    (Some(ci), Some(owner)) => {
                        // swap columns with the owner when both sums agree exactly
                        if owner > i
                            && admissible(cost.at(owner, ci), gate)
                            && cost.at(i, ci) + cost.at(owner, j)
                                == cost.at(i, j) + cost.at(owner, ci)
                        {
                            row_to_col[i] = Some(j);
                            row_to_col[owner] = Some(ci);
                            col_owner[j] = Some(i);
                            col_owner[ci] = Some(owner);
                            changed = true;
                        }
                    }
                    (Some(ci), None) => {
                        // same row, cheaper-indexed free column at equal cost
                        if cost.at(i, j) == cost.at(i, ci) {
                            row_to_col[i] = Some(j);
                            col_owner[ci] = None;
                            col_owner[j] = Some(i);
                            changed = true;
                        }
                    }
                    (None, Some(owner)) => {
                        // claim the column from a later row at equal cost
                        if owner > i && cost.at(i, j) == cost.at(owner, j) {
                            row_to_col[i] = Some(j);
                            row_to_col[owner] = None;
                            col_owner[j] = Some(i);
                            changed = true;
                        }
                    }
                    (None, None) => {}
                }
                if changed {
                    break;
                }
            }
            if changed {
                break;
            }
        }
        if !changed {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive oracle: every row takes an unused admissible column or
    /// stays unmatched; best by (max matches, min cost, lex pairs).
    fn brute_force(cost: &CostMatrix, gate: f64) -> (usize, f64, Vec<(usize, usize)>) {
        fn rec(
            cost: &CostMatrix,
            gate: f64,
            row: usize,
            used: &mut Vec<bool>,
            cur: &mut Vec<(usize, usize)>,
            cur_cost: f64,
            best: &mut (usize, f64, Vec<(usize, usize)>),
        ) {
            if row == cost.rows() {
                let cand = (cur.len(), cur_cost, cur.clone());
                let better = cand.0 > best.0
                    || (cand.0 == best.0 && cand.1 < best.1)
                    || (cand.0 == best.0 && cand.1 == best.1 && cand.2 < best.2);
                if better {
                    *best = cand;
                }
                return;
            }
            for col in 0..cost.cols() {
                let v = cost.at(row, col);
                if !used[col] && v.is_finite() && v <= gate {
                    used[col] = true;
                    cur.push((row, col));
                    rec(cost, gate, row + 1, used, cur, cur_cost + v, best);
                    cur.pop();
                    used[col] = false;
                }
            }
            rec(cost, gate, row + 1, used, cur, cur_cost, best);
        }

        let mut best = (0usize, f64::INFINITY, Vec::new());
        let mut used = vec![false; cost.cols()];
        rec(cost, gate, 0, &mut used, &mut Vec::new(), 0.0, &mut best);
        if best.0 == 0 {
            best.1 = 0.0;
        }
        best
    }

    #[test]
    fn single_cell() {
        let m = CostMatrix::from_rows(vec![vec![0.4]]);
        let a = min_cost_assignment(&m, 0.5);
        assert_eq!(a.pairs, vec![(0, 0)]);
        assert!(a.unmatched_rows.is_empty());
        assert!(a.unmatched_cols.is_empty());

        let blocked = min_cost_assignment(&m, 0.3);
        assert!(blocked.pairs.is_empty());
        assert_eq!(blocked.unmatched_rows, vec![0]);
        assert_eq!(blocked.unmatched_cols, vec![0]);
    }

    #[test]
    fn two_by_two_diagonal() {
        let m = CostMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
        let a = min_cost_assignment(&m, 10.0);
        assert_eq!(a.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(a.total_cost, 2.0);
    }

    #[test]
    fn empty_matrix() {
        let m = CostMatrix::from_rows(vec![]);
        let a = min_cost_assignment(&m, 1.0);
        assert!(a.pairs.is_empty());
        assert_eq!(a.total_cost, 0.0);
    }

    #[test]
    fn tie_break_prefers_lexicographic() {
        let m = CostMatrix::from_rows(vec![vec![5.0, 5.0], vec![5.0, 5.0]]);
        let a = min_cost_assignment(&m, 10.0);
        assert_eq!(a.pairs, vec![(0, 0), (1, 1)]);

        // both diagonals cost 3; the lexicographically smaller one wins
        let m = CostMatrix::from_rows(vec![vec![1.0, 2.0], vec![1.0, 2.0]]);
        let a = min_cost_assignment(&m, 10.0);
        assert_eq!(a.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(a.total_cost, 3.0);
    }

    #[test]
    fn non_finite_costs_are_inadmissible() {
        let m = CostMatrix::from_rows(vec![
            vec![f64::INFINITY, 0.2],
            vec![0.1, f64::NAN],
        ]);
        let a = min_cost_assignment(&m, 1.0);
        assert_eq!(a.pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn prefers_cardinality_over_cost() {
        // cheapest single pair is (0,0)=0.1 but two matches are possible
        let m = CostMatrix::from_rows(vec![vec![0.1, 9.0], vec![f64::INFINITY, 9.0]]);
        let a = min_cost_assignment(&m, 10.0);
        assert_eq!(a.pairs.len(), 2);
        assert_eq!(a.pairs, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn rectangular_reports_unmatched() {
        let m = CostMatrix::from_rows(vec![vec![3.0, 1.0, 2.0]]);
        let a = min_cost_assignment(&m, 10.0);
        assert_eq!(a.pairs, vec![(0, 1)]);
        assert_eq!(a.unmatched_cols, vec![0, 2]);
    }

    fn arb_matrix(max_dim: usize) -> impl Strategy<Value = CostMatrix> {
        (1..=max_dim, 1..=max_dim).prop_flat_map(|(r, c)| {
            proptest::collection::vec(0.0..100.0f64, r * c)
                .prop_map(move |data| CostMatrix { rows: r, cols: c, data })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn matches_brute_force_total(m in arb_matrix(5), gate in 20.0..120.0f64) {
            let a = min_cost_assignment(&m, gate);
            let (n, total, _) = brute_force(&m, gate);
            prop_assert_eq!(a.pairs.len(), n);
            prop_assert!((a.total_cost - total).abs() < 1e-9,
                "got {} want {}", a.total_cost, total);
        }

        #[test]
        fn output_is_a_matching(m in arb_matrix(6), gate in 0.0..100.0f64) {
            let a = min_cost_assignment(&m, gate);
            let mut rows: Vec<_> = a.pairs.iter().map(|p| p.0).collect();
            let mut cols: Vec<_> = a.pairs.iter().map(|p| p.1).collect();
            rows.sort_unstable();
            rows.dedup();
            cols.sort_unstable();
            cols.dedup();
            prop_assert_eq!(rows.len(), a.pairs.len());
            prop_assert_eq!(cols.len(), a.pairs.len());
            // matched + unmatched partitions both sides
            prop_assert_eq!(a.pairs.len() + a.unmatched_rows.len(), m.rows());
            prop_assert_eq!(a.pairs.len() + a.unmatched_cols.len(), m.cols());
        }
    }
}
