//! Edge-dependent vertex weights (EDVW) and constructors that derive them
//! from hypergraph structure, term counts, or point features.

use ndarray::{Array2, ArrayView2};

use crate::error::{invalid, Error, Result};
use crate::hypergraph::{Hypergraph, IdMap};

/// Sparse n × m weighted incidence matrix `R` with `R[v, e] = γ_e(v)`.
///
/// Values are stored per hyperedge, parallel to the hyperedge's vertex list,
/// so the support always equals the incidence support.
#[derive(Debug, Clone, PartialEq)]
pub struct EdvwMatrix {
    n_vertices: usize,
    columns: Vec<Vec<f64>>,
    normalized: bool,
}

impl EdvwMatrix {
    /// Wraps per-edge weight columns; every weight must be strictly positive.
    pub fn new(h: &Hypergraph, columns: Vec<Vec<f64>>) -> Result<Self> {
        if columns.len() != h.n_edges() {
            return Err(Error::Dimension(format!(
                "{} EDVW columns for {} edges",
                columns.len(),
                h.n_edges()
            )));
        }
        for (j, (col, edge)) in columns.iter().zip(h.edges()).enumerate() {
            if col.len() != edge.len() {
                return Err(Error::Dimension(format!(
                    "edge {j}: {} weights for {} vertices",
                    col.len(),
                    edge.len()
                )));
            }
            if let Some(w) = col.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                return invalid(format!("edge {j} has nonpositive vertex weight {w}"));
            }
        }
        Ok(Self {
            n_vertices: h.n_vertices(),
            columns,
            normalized: false,
        })
    }

    /// The binary incidence matrix `Y` as an EDVW matrix. It is already
    /// normalized since each column sums to `δ(e)`.
    pub fn incidence(h: &Hypergraph) -> Self {
        Self {
            n_vertices: h.n_vertices(),
            columns: h.edges().iter().map(|e| vec![1.0; e.len()]).collect(),
            normalized: true,
        }
    }

    /// Constant weight `c` on every incident pair (an EIVW).
    pub fn uniform(h: &Hypergraph, c: f64) -> Result<Self> {
        Self::new(h, h.edges().iter().map(|e| vec![c; e.len()]).collect())
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, e: usize) -> &[f64] {
        &self.columns[e]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Rescales every column so that it sums to the hyperedge cardinality.
    /// An already normalized matrix is returned unchanged.
    pub fn normalized(&self) -> Self {
        if self.normalized {
            return self.clone();
        }
        let columns = self
            .columns
            .iter()
            .map(|col| {
                let total: f64 = col.iter().sum();
                let scale = col.len() as f64 / total;
                col.iter().map(|w| w * scale).collect()
            })
            .collect();
        Self {
            n_vertices: self.n_vertices,
            columns,
            normalized: true,
        }
    }

    /// Marks the matrix normalized if every column already sums to its
    /// hyperedge cardinality within `tol` (relative).
    pub fn mark_normalized(mut self, tol: f64) -> Result<Self> {
        for (j, col) in self.columns.iter().enumerate() {
            let total: f64 = col.iter().sum();
            let want = col.len() as f64;
            if (total - want).abs() > tol * want {
                return invalid(format!(
                    "edge {j}: EDVW column sums to {total}, expected {want}"
                ));
            }
        }
        self.normalized = true;
        Ok(self)
    }

    /// `k · R`. Scaling keeps the normalized flag only when `k == 1`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            n_vertices: self.n_vertices,
            columns: self
                .columns
                .iter()
                .map(|c| c.iter().map(|w| w * k).collect())
                .collect(),
            normalized: self.normalized && k == 1.0,
        }
    }

    /// Checks that this matrix was built for `h`.
    pub fn check_shape(&self, h: &Hypergraph) -> Result<()> {
        let fits = self.n_vertices == h.n_vertices()
            && self.columns.len() == h.n_edges()
            && self
                .columns
                .iter()
                .zip(h.edges())
                .all(|(c, e)| c.len() == e.len());
        if fits {
            Ok(())
        } else {
            Err(Error::Dimension(
                "EDVW matrix does not match hypergraph".into(),
            ))
        }
    }

    /// Dense n × m matrix.
    pub fn to_dense(&self, h: &Hypergraph) -> Array2<f64> {
        let mut r = Array2::zeros((self.n_vertices, self.columns.len()));
        for (j, (col, edge)) in self.columns.iter().zip(h.edges()).enumerate() {
            for (&v, &w) in edge.iter().zip(col) {
                r[[v, j]] = w;
            }
        }
        r
    }
}

/// Degree-based EDVW: `R[v, e] = d(v) / Σ_{u ∈ e} d(u)`, with `ω`-weighted
/// degrees. Columns sum to one; call [`EdvwMatrix::normalized`] before
/// building a random walk.
pub fn degree_edvw(h: &Hypergraph) -> Result<EdvwMatrix> {
    if h.n_edges() == 0 {
        return invalid("hypergraph has no edges");
    }
    let d = h.vertex_degrees();
    let columns = h
        .edges()
        .iter()
        .map(|edge| {
            let total: f64 = edge.iter().map(|&v| d[v]).sum();
            edge.iter().map(|&v| d[v] / total).collect()
        })
        .collect();
    EdvwMatrix::new(h, columns)
}

/// Sparse document × term count matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DocTermCounts {
    pub n_terms: usize,
    /// Per document, `(term, count)` pairs with positive counts.
    pub docs: Vec<Vec<(usize, u32)>>,
}

impl DocTermCounts {
    pub fn from_dense(counts: ArrayView2<u32>) -> Self {
        let docs = counts
            .rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(t, &c)| (t, c))
                    .collect()
            })
            .collect();
        Self {
            n_terms: counts.ncols(),
            docs,
        }
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }
}

/// tf-idf score of every nonzero (document, term) count:
/// `tf = f_{t,d} / Σ_{t'} f_{t',d}`, `idf = ln(|D| / df(t))`.
///
/// Returned per term as `(doc, score)` pairs in document order. Terms that
/// occur in no document have an empty list.
pub fn tfidf_scores(counts: &DocTermCounts) -> Result<Vec<Vec<(usize, f64)>>> {
    let n_docs = counts.n_docs();
    let mut df = vec![0usize; counts.n_terms];
    for (d, doc) in counts.docs.iter().enumerate() {
        let mut total = 0u64;
        for &(t, c) in doc {
            if t >= counts.n_terms {
                return invalid(format!(
                    "document {d} references term {t} >= {}",
                    counts.n_terms
                ));
            }
            if c > 0 {
                df[t] += 1;
                total += c as u64;
            }
        }
        if total == 0 {
            return invalid(format!("document {d} has no terms"));
        }
    }
    let mut scores = vec![Vec::new(); counts.n_terms];
    for (d, doc) in counts.docs.iter().enumerate() {
        let total: u64 = doc.iter().map(|&(_, c)| c as u64).sum();
        for &(t, c) in doc {
            if c == 0 {
                continue;
            }
            let tf = c as f64 / total as f64;
            let idf = (n_docs as f64 / df[t] as f64).ln();
            scores[t].push((d, tf * idf));
        }
    }
    Ok(scores)
}

/// Documents as vertices, terms as hyperedges, tf-idf as the EDVW and the
/// population standard deviation of each hyperedge's EDVW as its weight.
///
/// Terms absent from every document, present in every document (idf = 0),
/// or with zero EDVW spread (including single-document terms) are dropped
/// since they would yield a nonpositive hyperedge weight. Edge identifiers
/// are the original term indices.
pub fn tfidf_edvw(counts: &DocTermCounts) -> Result<(Hypergraph, EdvwMatrix)> {
    let scores = tfidf_scores(counts)?;
    let n_docs = counts.n_docs();
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    let mut columns = Vec::new();
    let mut edge_ids = IdMap::new();
    for (t, col) in scores.iter().enumerate() {
        if col.is_empty() || col.len() == n_docs {
            continue;
        }
        let vals: Vec<f64> = col.iter().map(|&(_, s)| s).collect();
        let sd = population_std(&vals);
        if !(sd > 0.0) {
            continue;
        }
        edges.push(col.iter().map(|&(d, _)| d).collect());
        weights.push(sd);
        columns.push(vals);
        edge_ids.intern(&t.to_string());
    }
    let h = Hypergraph::from_parts(n_docs, edges, weights, IdMap::numeric(n_docs), edge_ids)?;
    let r = EdvwMatrix::new(&h, columns)?;
    Ok((h, r))
}

fn population_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// k-nearest-neighbour hypergraph: one hyperedge per vertex holding the
/// vertex and its `k` nearest neighbours by Euclidean distance (ties broken
/// by lower index). The EDVW of neighbour `u` in `v`'s edge is the RBF value
/// `exp(-2 D_vu / bandwidth)`; `v` itself gets weight 1.
pub fn knn_hypergraph(
    features: ArrayView2<f64>,
    k: usize,
    bandwidth: f64,
) -> Result<(Hypergraph, EdvwMatrix)> {
    let n = features.nrows();
    if k >= n {
        return invalid(format!("k = {k} must be below the number of points {n}"));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return invalid(format!("bandwidth must be positive, got {bandwidth}"));
    }
    let mut edges = Vec::with_capacity(n);
    let mut columns = Vec::with_capacity(n);
    for v in 0..n {
        let mut dist: Vec<(f64, usize)> = (0..n)
            .filter(|&u| u != v)
            .map(|u| {
                let d2: f64 = features
                    .row(v)
                    .iter()
                    .zip(features.row(u))
                    .map(|(a, b)| (a - b).powi(2))
                    .sum();
                (d2.sqrt(), u)
            })
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut edge = vec![v];
        let mut col = vec![1.0];
        for &(d, u) in dist.iter().take(k) {
            edge.push(u);
            col.push(rbf(d, bandwidth));
        }
        edges.push(edge);
        columns.push(col);
    }
    let h = Hypergraph::from_edges(n, edges, None)?;
    let r = EdvwMatrix::new(&h, columns)?;
    Ok((h, r))
}

/// `exp(-2 d / bandwidth)`, floored at the smallest positive normal so the
/// EDVW support never loses an incident pair to underflow.
pub fn rbf(distance: f64, bandwidth: f64) -> f64 {
    (-2.0 * distance / bandwidth).exp().max(f64::MIN_POSITIVE)
}
