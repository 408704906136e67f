//! Hypergraph data model and its graph expansions.
//!
//! Vertices are dense indices `0..n`. Each hyperedge is a nonempty list of
//! distinct vertices with a strictly positive weight `ω(e)`. The vertex
//! degree is `d(v) = Σ_{e ∋ v} ω(e)` and the hyperedge degree `δ(e)` is the
//! edge's cardinality.

use ndarray::Array2;
use std::collections::HashMap;

use crate::error::{invalid, Error, Result};

/// Bidirectional map between external string identifiers and dense indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IdMap {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Identifiers `"0"`, `"1"`, ... for `n` items.
    pub fn numeric(n: usize) -> Self {
        let mut map = Self::new();
        for i in 0..n {
            map.intern(&i.to_string());
        }
        map
    }

    /// Returns the index of `name`, assigning the next free index if unseen.
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, i: usize) -> Option<&str> {
        self.names.get(i).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// A weighted hypergraph with optional vertex labels and features.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    n_vertices: usize,
    edges: Vec<Vec<usize>>,
    edge_weights: Vec<f64>,
    labels: Option<Vec<Option<usize>>>,
    features: Option<Array2<f64>>,
    vertex_ids: IdMap,
    edge_ids: IdMap,
}

impl Hypergraph {
    /// Builds a hypergraph from `(edge_id, vertices)` pairs. Omitted weights
    /// default to 1. Edges keep their input order; degree-1 edges are kept.
    pub fn build<S: AsRef<str>>(
        n_vertices: usize,
        incidence: Vec<(S, Vec<usize>)>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        let m = incidence.len();
        let weights = weights.unwrap_or_else(|| vec![1.0; m]);
        if weights.len() != m {
            return Err(Error::Dimension(format!(
                "{} edge weights for {} edges",
                weights.len(),
                m
            )));
        }
        let mut edge_ids = IdMap::new();
        let mut edges = Vec::with_capacity(m);
        for (id, verts) in incidence {
            let before = edge_ids.len();
            edge_ids.intern(id.as_ref());
            if edge_ids.len() == before {
                return invalid(format!("duplicate edge id {:?}", id.as_ref()));
            }
            edges.push(verts);
        }
        Self::from_parts(
            n_vertices,
            edges,
            weights,
            IdMap::numeric(n_vertices),
            edge_ids,
        )
    }

    /// Builds a hypergraph with numeric identifiers.
    pub fn from_edges(
        n_vertices: usize,
        edges: Vec<Vec<usize>>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        let m = edges.len();
        let weights = weights.unwrap_or_else(|| vec![1.0; m]);
        Self::from_parts(
            n_vertices,
            edges,
            weights,
            IdMap::numeric(n_vertices),
            IdMap::numeric(m),
        )
    }

    pub(crate) fn from_parts(
        n_vertices: usize,
        edges: Vec<Vec<usize>>,
        edge_weights: Vec<f64>,
        vertex_ids: IdMap,
        edge_ids: IdMap,
    ) -> Result<Self> {
        if edges.len() != edge_weights.len() {
            return Err(Error::Dimension(format!(
                "{} edge weights for {} edges",
                edge_weights.len(),
                edges.len()
            )));
        }
        if vertex_ids.len() != n_vertices || edge_ids.len() != edges.len() {
            return Err(Error::Dimension("identifier map size mismatch".into()));
        }
        let mut seen = vec![usize::MAX; n_vertices];
        for (j, edge) in edges.iter().enumerate() {
            if edge.is_empty() {
                return invalid(format!("edge {j} is empty"));
            }
            for &v in edge {
                if v >= n_vertices {
                    return invalid(format!("edge {j} references vertex {v} >= {n_vertices}"));
                }
                if seen[v] == j {
                    return invalid(format!("edge {j} lists vertex {v} twice"));
                }
                seen[v] = j;
            }
            let w = edge_weights[j];
            if !(w.is_finite() && w > 0.0) {
                return invalid(format!("edge {j} has nonpositive weight {w}"));
            }
        }
        Ok(Self {
            n_vertices,
            edges,
            edge_weights,
            labels: None,
            features: None,
            vertex_ids,
            edge_ids,
        })
    }

    pub fn with_labels(mut self, labels: Vec<Option<usize>>) -> Result<Self> {
        if labels.len() != self.n_vertices {
            return Err(Error::Dimension(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.n_vertices
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_features(mut self, features: Array2<f64>) -> Result<Self> {
        if features.nrows() != self.n_vertices {
            return Err(Error::Dimension(format!(
                "feature matrix has {} rows for {} vertices",
                features.nrows(),
                self.n_vertices
            )));
        }
        self.features = Some(features);
        Ok(self)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &[usize] {
        &self.edges[e]
    }

    pub fn edge_weights(&self) -> &[f64] {
        &self.edge_weights
    }

    pub fn labels(&self) -> Option<&[Option<usize>]> {
        self.labels.as_deref()
    }

    pub fn features(&self) -> Option<&Array2<f64>> {
        self.features.as_ref()
    }

    pub fn vertex_ids(&self) -> &IdMap {
        &self.vertex_ids
    }

    pub fn edge_ids(&self) -> &IdMap {
        &self.edge_ids
    }

    /// `d(v) = Σ_{e ∋ v} ω(e)`.
    pub fn vertex_degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n_vertices];
        for (edge, &w) in self.edges.iter().zip(&self.edge_weights) {
            for &v in edge {
                d[v] += w;
            }
        }
        d
    }

    /// `δ(e) = |e|`.
    pub fn edge_degrees(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.len() as f64).collect()
    }

    /// Binary incidence matrix `Y` (n × m).
    pub fn incidence(&self) -> Array2<f64> {
        let mut y = Array2::zeros((self.n_vertices, self.edges.len()));
        for (j, edge) in self.edges.iter().enumerate() {
            for &v in edge {
                y[[v, j]] = 1.0;
            }
        }
        y
    }

    /// First vertex with zero degree, if any.
    pub fn isolated_vertex(&self) -> Option<usize> {
        self.vertex_degrees().iter().position(|&d| d == 0.0)
    }

    /// Copy without hyperedges of cardinality below `min_size`.
    pub fn filter_edges_by_size(&self, min_size: usize) -> Self {
        let mut edges = Vec::new();
        let mut weights = Vec::new();
        let mut ids = IdMap::new();
        for (j, edge) in self.edges.iter().enumerate() {
            if edge.len() >= min_size {
                edges.push(edge.clone());
                weights.push(self.edge_weights[j]);
                ids.intern(self.edge_ids.name(j).unwrap_or_default());
            }
        }
        Self {
            n_vertices: self.n_vertices,
            edges,
            edge_weights: weights,
            labels: self.labels.clone(),
            features: self.features.clone(),
            vertex_ids: self.vertex_ids.clone(),
            edge_ids: ids,
        }
    }

    /// Clique expansion `YYᵀ` with the diagonal zeroed. Entry `(u, v)` counts
    /// the hyperedges shared by `u` and `v`.
    pub fn clique_expansion(&self) -> Array2<f64> {
        let n = self.n_vertices;
        let mut adj = Array2::zeros((n, n));
        for edge in &self.edges {
            for &u in edge {
                for &v in edge {
                    if u != v {
                        adj[[u, v]] += 1.0;
                    }
                }
            }
        }
        adj
    }

    /// Bipartite star expansion on `V ∪ E`.
    pub fn star_expansion(&self) -> StarGraph {
        let n = self.n_vertices;
        let edges = self
            .edges
            .iter()
            .enumerate()
            .flat_map(|(j, e)| e.iter().map(move |&v| (v, n + j)))
            .collect();
        StarGraph {
            n_vertices: n,
            n_edge_nodes: self.edges.len(),
            edges,
        }
    }
}

/// Star expansion: original vertices first, then one node per hyperedge.
#[derive(Debug, Clone, PartialEq)]
pub struct StarGraph {
    pub n_vertices: usize,
    pub n_edge_nodes: usize,
    /// `(vertex, n_vertices + edge index)` pairs in edge order.
    pub edges: Vec<(usize, usize)>,
}

impl StarGraph {
    pub fn n_nodes(&self) -> usize {
        self.n_vertices + self.n_edge_nodes
    }

    /// Symmetric 0/1 adjacency `[[0, Y], [Yᵀ, 0]]`.
    pub fn adjacency(&self) -> Array2<f64> {
        let k = self.n_nodes();
        let mut a = Array2::zeros((k, k));
        for &(u, v) in &self.edges {
            a[[u, v]] = 1.0;
            a[[v, u]] = 1.0;
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path() -> Hypergraph {
        Hypergraph::from_edges(3, vec![vec![0, 1], vec![1, 2]], None).unwrap()
    }

    #[test]
    fn degrees_of_two_edge_path() {
        let h = path();
        assert_eq!(h.vertex_degrees(), vec![1.0, 2.0, 1.0]);
        assert_eq!(h.edge_degrees(), vec![2.0, 2.0]);
    }

    #[test]
    fn weighted_single_edge_degrees() {
        let h = Hypergraph::from_edges(3, vec![vec![0, 1, 2]], Some(vec![3.0])).unwrap();
        assert_eq!(h.vertex_degrees(), vec![3.0; 3]);
        assert_eq!(h.edge_degrees(), vec![3.0]);
    }

    #[test]
    fn build_rejects_bad_input() {
        assert!(Hypergraph::from_edges(3, vec![vec![]], None).is_err());
        assert!(Hypergraph::from_edges(3, vec![vec![0, 3]], None).is_err());
        assert!(Hypergraph::from_edges(3, vec![vec![0, 0]], None).is_err());
        assert!(Hypergraph::from_edges(3, vec![vec![0, 1]], Some(vec![0.0])).is_err());
        assert!(Hypergraph::from_edges(3, vec![vec![0, 1]], Some(vec![-1.0])).is_err());
        assert!(Hypergraph::build(3, vec![("a", vec![0]), ("a", vec![1])], None).is_err());
    }

    #[test]
    fn build_keeps_ids_and_degree_one_edges() {
        let h = Hypergraph::build(
            3,
            vec![("x", vec![2, 0]), ("y", vec![1])],
            Some(vec![2.0, 1.0]),
        )
        .unwrap();
        assert_eq!(h.edge_ids().get("y"), Some(1));
        assert_eq!(h.edge(0), &[2, 0]);
        assert_eq!(h.n_edges(), 2);
        assert_eq!(h.filter_edges_by_size(2).n_edges(), 1);
    }

    #[test]
    fn clique_expansion_counts_shared_edges() {
        let a = path().clique_expansion();
        assert_eq!(a[[0, 1]], 1.0);
        assert_eq!(a[[1, 2]], 1.0);
        assert_eq!(a[[0, 2]], 0.0);
        assert_eq!(a[[1, 1]], 0.0);

        let c = Hypergraph::from_edges(3, vec![vec![0, 1, 2]], None)
            .unwrap()
            .clique_expansion();
        for u in 0..3 {
            for v in 0..3 {
                assert_eq!(c[[u, v]], if u == v { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn star_expansion_sizes() {
        let s = Hypergraph::from_edges(2, vec![vec![0, 1]], None)
            .unwrap()
            .star_expansion();
        assert_eq!((s.n_nodes(), s.edges.len()), (3, 2));
        let h = Hypergraph::from_edges(3, vec![vec![0, 1, 2], vec![2]], None).unwrap();
        let s = h.star_expansion();
        assert_eq!((s.n_nodes(), s.edges.len()), (5, 4));

        let a = s.adjacency();
        let y = h.incidence();
        for v in 0..3 {
            for e in 0..2 {
                assert_eq!(a[[v, 3 + e]], y[[v, e]]);
                assert_eq!(a[[3 + e, v]], y[[v, e]]);
            }
            for u in 0..3 {
                assert_eq!(a[[u, v]], 0.0);
            }
        }
        assert_eq!(a[[3, 4]], 0.0);
    }

    #[test]
    fn features_and_labels_shape_checked() {
        let h = path();
        assert!(h.clone().with_features(Array2::zeros((2, 4))).is_err());
        assert!(h.clone().with_labels(vec![Some(0)]).is_err());
        let h = h.with_features(Array2::zeros((3, 4))).unwrap();
        assert_eq!(h.features().unwrap().ncols(), 4);
    }
}
