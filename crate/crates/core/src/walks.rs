//! Hypergraph random walks and Markov-chain diagnostics.
//!
//! All walks are instances of `P ∝ Q1 · W · ρ(D_E) · Q2ᵀ` where `Q1`, `Q2`
//! are weighted incidence matrices, `W = diag(ω)` and `D_E = diag(δ)`:
//!
//! * Zhou walk: `Q1 = Q2 = Y`, `ρ(x) = 1/x`, scaled by `D_V⁻¹`.
//! * EDVW walk: `Q1 = Y`, `Q2 = R` (normalized), `ρ(x) = 1/x`, scaled by `D_V⁻¹`.
//! * Unified walk: arbitrary `Q1`, `Q2`, `ρ`, row-normalized.

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;

use crate::edvw::EdvwMatrix;
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkKind {
    Zhou,
    Edvw,
    Unified,
    /// Any row-stochastic matrix supplied by the caller.
    External,
}

/// Scaling applied to the hyperedge-degree matrix in the unified walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeDegreeMap {
    Inverse,
    Identity,
}

/// Row-stochastic n × n transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    values: Array2<f64>,
    kind: WalkKind,
}

/// Maximum allowed deviation of a row sum from one.
pub const ROW_SUM_TOL: f64 = 1e-10;

impl TransitionMatrix {
    /// Validates a caller-provided matrix: square, nonnegative, rows summing to 1.
    pub fn from_matrix(values: Array2<f64>) -> Result<Self> {
        Self::checked(values, WalkKind::External)
    }

    fn checked(values: Array2<f64>, kind: WalkKind) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(Error::Dimension(format!(
                "transition matrix is {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        for (i, row) in values.rows().into_iter().enumerate() {
            if row.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
                return Err(Error::Invalid(format!(
                    "row {i} has a negative or non-finite entry"
                )));
            }
            let s: f64 = row.sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Invalid(format!("row {i} sums to {s}")));
            }
        }
        Ok(Self { values, kind })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn kind(&self) -> WalkKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Largest `|row sum − 1|`.
    pub fn stochasticity_error(&self) -> f64 {
        self.values
            .rows()
            .into_iter()
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `(P + I) / 2`.
    pub fn lazy(&self) -> Self {
        let n = self.n();
        let mut v = self.values.mapv(|p| 0.5 * p);
        for i in 0..n {
            v[[i, i]] += 0.5;
        }
        Self {
            values: v,
            kind: self.kind,
        }
    }
}

/// `Σ_e Q1[v,e] · ω(e) · ρ(δ(e)) · Q2[u,e]` accumulated densely.
fn edge_product(
    h: &Hypergraph,
    q1: &EdvwMatrix,
    q2: &EdvwMatrix,
    rho: EdgeDegreeMap,
) -> Array2<f64> {
    let n = h.n_vertices();
    let mut m = Array2::zeros((n, n));
    for (j, edge) in h.edges().iter().enumerate() {
        let delta = edge.len() as f64;
        let scale = h.edge_weights()[j]
            * match rho {
                EdgeDegreeMap::Inverse => 1.0 / delta,
                EdgeDegreeMap::Identity => delta,
            };
        let (c1, c2) = (q1.column(j), q2.column(j));
        for (a, &v) in edge.iter().enumerate() {
            let left = c1[a] * scale;
            for (b, &u) in edge.iter().enumerate() {
                m[[v, u]] += left * c2[b];
            }
        }
    }
    m
}

fn check_degrees(h: &Hypergraph) -> Result<Vec<f64>> {
    let d = h.vertex_degrees();
    match d.iter().position(|&x| x == 0.0) {
        Some(vertex) => Err(Error::IsolatedVertex { vertex }),
        None => Ok(d),
    }
}

fn scale_rows(mut m: Array2<f64>, d: &[f64]) -> Array2<f64> {
    for (mut row, &dv) in m.rows_mut().into_iter().zip(d) {
        row.mapv_inplace(|x| x / dv);
    }
    m
}

/// Zhou's random walk: pick an incident edge ∝ ω, then a member uniformly.
/// `P = D_V⁻¹ Y W D_E⁻¹ Yᵀ`.
pub fn zhou_transition(h: &Hypergraph) -> Result<TransitionMatrix> {
    let d = check_degrees(h)?;
    let y = EdvwMatrix::incidence(h);
    let m = edge_product(h, &y, &y, EdgeDegreeMap::Inverse);
    TransitionMatrix::checked(scale_rows(m, &d), WalkKind::Zhou)
}

/// EDVW random walk: pick an incident edge ∝ ω, then a member ∝ `γ_e`.
/// `P = D_V⁻¹ Y W D_E⁻¹ Rᵀ`, which is row-stochastic because `R` is
/// normalized to column sums `δ(e)`.
pub fn edvw_transition(h: &Hypergraph, r: &EdvwMatrix) -> Result<TransitionMatrix> {
    r.check_shape(h)?;
    if let Some(edge) = r
        .columns()
        .iter()
        .position(|c| c.iter().sum::<f64>() <= 0.0)
    {
        return Err(Error::ZeroEdvwColumn { edge });
    }
    if !r.is_normalized() {
        return Err(Error::EdvwNotNormalized);
    }
    let d = check_degrees(h)?;
    let y = EdvwMatrix::incidence(h);
    let m = edge_product(h, &y, r, EdgeDegreeMap::Inverse);
    TransitionMatrix::checked(scale_rows(m, &d), WalkKind::Edvw)
}

/// Unified two-weighting walk `P ∝ Q1 W ρ(D_E) Q2ᵀ`, row-normalized.
pub fn unified_transition(
    h: &Hypergraph,
    q1: &EdvwMatrix,
    q2: &EdvwMatrix,
    rho: EdgeDegreeMap,
) -> Result<TransitionMatrix> {
    q1.check_shape(h)?;
    q2.check_shape(h)?;
    check_degrees(h)?;
    let m = edge_product(h, q1, q2, rho);
    let sums: Vec<f64> = m.rows().into_iter().map(|r| r.sum()).collect();
    if let Some(vertex) = sums.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::IsolatedVertex { vertex });
    }
    TransitionMatrix::checked(scale_rows(m, &sums), WalkKind::Unified)
}

/// Which chain the stationary distribution was computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainUsed {
    Original,
    /// `(P + I) / 2`; shares its stationary distribution with `P`.
    Lazy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Fall back to the lazy chain when `P` is periodic.
    pub allow_lazy: bool,
    /// Largest `n` for which a dense solve replaces a stalled power iteration.
    pub dense_fallback_max_n: usize,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100_000,
            allow_lazy: false,
            dense_fallback_max_n: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub values: Vec<f64>,
    /// `‖πP − π‖₁` on the original chain.
    pub residual: f64,
    pub chain: ChainUsed,
    pub iterations: usize,
}

/// Stationary distribution by power iteration, with a dense solve fallback
/// for small chains.
pub fn stationary_distribution(
    p: &TransitionMatrix,
    opts: &StationaryOptions,
) -> Result<StationaryDistribution> {
    let n = p.n();
    if n == 0 {
        return Err(Error::Invalid("empty chain".into()));
    }
    let components = strongly_connected_components(p.values());
    if components > 1 {
        return Err(Error::Reducible { components });
    }
    let (chain, work) = if period(p.values()) > 1 {
        if !opts.allow_lazy {
            return Err(Error::Periodic);
        }
        (ChainUsed::Lazy, p.lazy())
    } else {
        (ChainUsed::Original, p.clone())
    };

    let mut pi = vec![1.0 / n as f64; n];
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut next = left_multiply(&pi, work.values());
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let step = l1_distance(&next, &pi);
        pi = next;
        if step <= opts.tol {
            break;
        }
    }
    let mut residual = l1_distance(&left_multiply(&pi, p.values()), &pi);

    if residual > opts.tol && n <= opts.dense_fallback_max_n {
        if let Some(solved) = dense_stationary(p.values()) {
            let r = l1_distance(&left_multiply(&solved, p.values()), &solved);
            if r < residual {
                pi = solved;
                residual = r;
            }
        }
    }
    if residual > opts.tol {
        return Err(Error::NoConvergence {
            what: "stationary distribution",
            iterations,
            residual,
        });
    }
    Ok(StationaryDistribution {
        values: pi,
        residual,
        chain,
        iterations,
    })
}

fn left_multiply(pi: &[f64], p: &Array2<f64>) -> Vec<f64> {
    let n = pi.len();
    let mut out = vec![0.0; n];
    for (i, row) in p.rows().into_iter().enumerate() {
        let w = pi[i];
        if w == 0.0 {
            continue;
        }
        for (o, &pij) in out.iter_mut().zip(row.iter()) {
            *o += w * pij;
        }
    }
    out
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Solves `(Pᵀ − I) π = 0`, `Σ π = 1` by replacing the last balance
/// equation with the normalization row.
fn dense_stationary(p: &Array2<f64>) -> Option<Vec<f64>> {
    let n = p.nrows();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = p[[j, i]] - if i == j { 1.0 } else { 0.0 };
        }
    }
    let mut b = DVector::<f64>::zeros(n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b)?;
    let mut pi: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= total);
    Some(pi)
}

/// Returns `(reversible, residual)` with residual `max_ij |π_i P_ij − π_j P_ji|`.
pub fn is_reversible(p: &TransitionMatrix, pi: &StationaryDistribution, tol: f64) -> (bool, f64) {
    let residual = detailed_balance_residual(p.values(), &pi.values);
    (residual <= tol, residual)
}

pub fn detailed_balance_residual(p: &Array2<f64>, pi: &[f64]) -> f64 {
    let n = p.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((pi[i] * p[[i, j]] - pi[j] * p[[j, i]]).abs());
        }
    }
    worst
}

/// Expected hitting times: entry `(u, v)` is the expected number of steps
/// from `u` to first reach `v`, with zero diagonal. One linear solve per target.
pub fn hitting_times(p: &TransitionMatrix) -> Result<Array2<f64>> {
    let n = p.n();
    let components = strongly_connected_components(p.values());
    if components > 1 {
        return Err(Error::Reducible { components });
    }
    let mut h = Array2::zeros((n, n));
    if n == 1 {
        return Ok(h);
    }
    for target in 0..n {
        let others: Vec<usize> = (0..n).filter(|&u| u != target).collect();
        let k = others.len();
        let mut a = DMatrix::<f64>::zeros(k, k);
        for (r, &u) in others.iter().enumerate() {
            for (c, &w) in others.iter().enumerate() {
                a[(r, c)] = if r == c { 1.0 } else { 0.0 } - p.values()[[u, w]];
            }
        }
        let b = DVector::<f64>::from_element(k, 1.0);
        let x = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Singular(format!("hitting-time system for target {target}")))?;
        for (r, &u) in others.iter().enumerate() {
            if !x[r].is_finite() {
                return Err(Error::Singular(format!(
                    "hitting-time system for target {target}"
                )));
            }
            h[[u, target]] = x[r];
        }
    }
    Ok(h)
}

/// Weighted edge list `(u, v, P_uv)` of all positive entries, row-major.
pub fn representative_digraph(p: &TransitionMatrix) -> Vec<(usize, usize, f64)> {
    p.values()
        .indexed_iter()
        .filter(|(_, &w)| w > 0.0)
        .map(|((u, v), &w)| (u, v, w))
        .collect()
}

/// Number of strongly connected components of the positive-entry digraph.
pub fn strongly_connected_components(p: &Array2<f64>) -> usize {
    let n = p.nrows();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|u| (0..n).filter(|&v| p[[u, v]] > 0.0).collect())
        .collect();
    tarjan(&adj)
}

// Iterative Tarjan; returns the component count.
fn tarjan(adj: &[Vec<usize>]) -> usize {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut count = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    count += 1;
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        if w == v {
                            break;
                        }
                    }
                }
            }
        }
    }
    count
}

/// Period of an irreducible chain: gcd of `level(u) + 1 − level(v)` over
/// all positive transitions, with BFS levels from vertex 0.
pub fn period(p: &Array2<f64>) -> usize {
    let n = p.nrows();
    if n == 0 {
        return 1;
    }
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut g = 0usize;
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if p[[u, v]] <= 0.0 {
                continue;
            }
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            } else {
                let diff = (level[u] + 1).abs_diff(level[v]);
                g = gcd(g, diff);
            }
        }
    }
    g.max(1)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn zhou_single_edge() {
        let h = Hypergraph::from_edges(2, vec![vec![0, 1]], None).unwrap();
        let p = zhou_transition(&h).unwrap();
        assert_eq!(p.values(), &array![[0.5, 0.5], [0.5, 0.5]]);
        let g = representative_digraph(&p);
        assert_eq!(g.len(), 4);
        assert!(g.iter().all(|&(_, _, w)| w == 0.5));
    }

    #[test]
    fn zhou_path_middle_row() {
        let h = Hypergraph::from_edges(3, vec![vec![0, 1], vec![1, 2]], None).unwrap();
        let p = zhou_transition(&h).unwrap();
        let row: Vec<f64> = p.values().row(1).to_vec();
        assert_eq!(row, vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn zhou_isolated_vertex_named() {
        let h = Hypergraph::from_edges(3, vec![vec![0, 1]], None).unwrap();
        match zhou_transition(&h) {
            Err(Error::IsolatedVertex { vertex }) => assert_eq!(vertex, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn edvw_requires_normalization() {
        let h = Hypergraph::from_edges(3, vec![vec![0, 1, 2]], None).unwrap();
        let r = EdvwMatrix::new(&h, vec![vec![7.0, 1.0, 1.0]]).unwrap();
        assert!(matches!(
            edvw_transition(&h, &r),
            Err(Error::EdvwNotNormalized)
        ));
        let p = edvw_transition(&h, &r.normalized()).unwrap();
        // from vertex 2, the heavy vertex 0 is more likely than vertex 1
        assert!(p.values()[[2, 0]] > p.values()[[2, 1]]);
        assert!(close(p.values()[[2, 0]], 7.0 / 9.0, 1e-15));
    }

    #[test]
    fn unified_dimension_mismatch() {
        let h = Hypergraph::from_edges(3, vec![vec![0, 1, 2]], None).unwrap();
        let other = Hypergraph::from_edges(3, vec![vec![0, 1]], None).unwrap();
        let y = EdvwMatrix::incidence(&h);
        let bad = EdvwMatrix::incidence(&other);
        assert!(matches!(
            unified_transition(&h, &y, &bad, EdgeDegreeMap::Inverse),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn stationary_two_state() {
        let p = TransitionMatrix::from_matrix(array![[0.9, 0.1], [0.5, 0.5]]).unwrap();
        let pi = stationary_distribution(&p, &StationaryOptions::default()).unwrap();
        assert!(close(pi.values[0], 5.0 / 6.0, 1e-11));
        assert!(close(pi.values[1], 1.0 / 6.0, 1e-11));
        assert_eq!(pi.chain, ChainUsed::Original);
    }

    #[test]
    fn stationary_doubly_stochastic_is_uniform() {
        let p = TransitionMatrix::from_matrix(array![
            [0.2, 0.3, 0.5],
            [0.5, 0.2, 0.3],
            [0.3, 0.5, 0.2]
        ])
        .unwrap();
        let pi = stationary_distribution(&p, &StationaryOptions::default()).unwrap();
        for x in &pi.values {
            assert!(close(*x, 1.0 / 3.0, 1e-12));
        }
    }

    #[test]
    fn stationary_rejects_reducible_and_periodic() {
        let reducible = TransitionMatrix::from_matrix(array![[1.0, 0.0], [0.5, 0.5]]).unwrap();
        assert!(matches!(
            stationary_distribution(&reducible, &StationaryOptions::default()),
            Err(Error::Reducible { components: 2 })
        ));
        let flip = TransitionMatrix::from_matrix(array![[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(
            stationary_distribution(&flip, &StationaryOptions::default()),
            Err(Error::Periodic)
        ));
        let opts = StationaryOptions {
            allow_lazy: true,
            ..Default::default()
        };
        let pi = stationary_distribution(&flip, &opts).unwrap();
        assert_eq!(pi.chain, ChainUsed::Lazy);
        assert!(close(pi.values[0], 0.5, 1e-12));
    }

    #[test]
    fn hitting_time_geometric() {
        let p = 0.2;
        let t = TransitionMatrix::from_matrix(array![[1.0 - p, p], [0.3, 0.7]]).unwrap();
        let h = hitting_times(&t).unwrap();
        assert!(close(h[[0, 1]], 1.0 / p, 1e-12));
        assert_eq!(h[[0, 0]], 0.0);
    }

    #[test]
    fn hitting_times_symmetric_cycle() {
        let t = TransitionMatrix::from_matrix(array![
            [0.0, 0.5, 0.5],
            [0.5, 0.0, 0.5],
            [0.5, 0.5, 0.0]
        ])
        .unwrap();
        let h = hitting_times(&t).unwrap();
        for u in 0..3 {
            for v in 0..3 {
                if u != v {
                    assert!(close(h[[u, v]], 2.0, 1e-12));
                }
            }
        }
    }

    #[test]
    fn hitting_times_reducible_errors() {
        let t = TransitionMatrix::from_matrix(array![[1.0, 0.0], [0.5, 0.5]]).unwrap();
        assert!(hitting_times(&t).is_err());
    }

    #[test]
    fn identity_digraph_is_self_loops() {
        let t = TransitionMatrix::from_matrix(Array2::eye(4)).unwrap();
        let g = representative_digraph(&t);
        assert_eq!(g, (0..4).map(|i| (i, i, 1.0)).collect::<Vec<_>>());
    }

    #[test]
    fn from_matrix_validates() {
        assert!(TransitionMatrix::from_matrix(array![[0.5, 0.4], [0.5, 0.5]]).is_err());
        assert!(TransitionMatrix::from_matrix(array![[1.5, -0.5], [0.5, 0.5]]).is_err());
        assert!(TransitionMatrix::from_matrix(Array2::zeros((2, 3))).is_err());
    }

    #[test]
    fn period_detection() {
        assert_eq!(period(&array![[0.0, 1.0], [1.0, 0.0]]), 2);
        assert_eq!(
            period(&array![[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]),
            3
        );
        assert_eq!(period(&array![[0.5, 0.5], [1.0, 0.0]]), 1);
    }
}
