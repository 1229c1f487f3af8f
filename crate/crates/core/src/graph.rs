//! Homogeneous graph model, unnormalized Laplacian and the heterophily factor.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::matrix::{CsrMatrix, DenseMatrix};

/// Undirected weighted graph with dense node features and optional labels.
///
/// The adjacency is stored as a symmetric CSR matrix (both directions of
/// every edge) with an empty diagonal and strictly positive weights.
#[derive(Clone, Debug)]
pub struct Graph {
    adjacency: CsrMatrix,
    features: DenseMatrix,
    labels: Option<Vec<i64>>,
    edge_count: usize,
}

impl Graph {
    /// Wraps an already symmetric adjacency matrix.
    pub fn new(adjacency: CsrMatrix, features: DenseMatrix, labels: Option<Vec<i64>>) -> Result<Self> {
        let n = adjacency.rows();
        if adjacency.cols() != n {
            return Err(Error::InvalidGraph("adjacency is not square".into()));
        }
        if features.rows() != n {
            return Err(Error::InvalidGraph(format!(
                "features have {} rows for {n} nodes",
                features.rows()
            )));
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::InvalidGraph(format!("{} labels for {n} nodes", l.len())));
            }
        }
        let mut edge_count = 0;
        for (r, c, w) in adjacency.triplets() {
            if r == c {
                return Err(Error::InvalidGraph(format!("self-loop on node {r}")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidGraph(format!("edge ({r}, {c}) has weight {w}")));
            }
            if adjacency.get(c, r) != w {
                return Err(Error::InvalidGraph(format!("edge ({r}, {c}) has no mirror")));
            }
            if r < c {
                edge_count += 1;
            }
        }
        Ok(Self {
            adjacency,
            features,
            labels,
            edge_count,
        })
    }

    /// Builds a graph from a possibly redundant edge list.
    ///
    /// Repeated `(u, v)` pairs in the same orientation have their weights
    /// summed. An edge listed in both orientations is one edge; if the two
    /// orientations disagree the larger weight wins. Self-loops and
    /// zero-weight edges are dropped.
    pub fn from_edges<I>(num_nodes: usize, edges: I, features: DenseMatrix, labels: Option<Vec<i64>>) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut directed: HashMap<(usize, usize), f64> = HashMap::new();
        let mut self_loops = 0usize;
        for (u, v, w) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) references a node outside 0..{num_nodes}"
                )));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) has weight {w}")));
            }
            if u == v {
                self_loops += 1;
                continue;
            }
            *directed.entry((u, v)).or_insert(0.0) += w;
        }
        if self_loops > 0 {
            log::warn!("dropped {self_loops} self-loop(s)");
        }
        let mut undirected: HashMap<(usize, usize), f64> = HashMap::with_capacity(directed.len());
        for ((u, v), w) in directed {
            let key = (u.min(v), u.max(v));
            let slot = undirected.entry(key).or_insert(0.0);
            *slot = slot.max(w);
        }
        let adjacency = CsrMatrix::from_triplets(
            num_nodes,
            num_nodes,
            undirected
                .into_iter()
                .filter(|&(_, w)| w > 0.0)
                .flat_map(|((u, v), w)| [(u, v, w), (v, u, w)]),
        )?;
        Self::new(adjacency, features, labels)
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.adjacency.rows()
    }

    /// Number of undirected edges, each counted once.
    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adjacency
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    /// Undirected edges `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.triplets().filter(|&(i, j, _)| i < j)
    }

    /// Sum of undirected edge weights, each edge once.
    pub fn total_weight(&self) -> f64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.adjacency.row(i).1.iter().sum()
    }

    pub fn into_parts(self) -> (CsrMatrix, DenseMatrix, Option<Vec<i64>>) {
        (self.adjacency, self.features, self.labels)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaplacianKind {
    Unnormalized,
}

/// Combinatorial Laplacian `L = D - A`.
#[derive(Clone, Debug)]
pub struct Laplacian {
    matrix: CsrMatrix,
    kind: LaplacianKind,
}

impl Laplacian {
    /// Builds `D - A` from a symmetric nonnegative adjacency matrix. Diagonal
    /// entries of `adjacency` are ignored.
    pub fn from_adjacency(adjacency: &CsrMatrix) -> Result<Self> {
        let n = adjacency.rows();
        if adjacency.cols() != n {
            return Err(Error::InvalidGraph("adjacency is not square".into()));
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(adjacency.nnz() + n);
        let mut values = Vec::with_capacity(adjacency.nnz() + n);
        indptr.push(0);
        for i in 0..n {
            let degree: f64 = adjacency.row_iter(i).filter(|&(j, _)| j != i).map(|(_, w)| w).sum();
            let mut diag_written = false;
            for (j, w) in adjacency.row_iter(i) {
                if j == i {
                    continue;
                }
                if j > i && !diag_written {
                    indices.push(i);
                    values.push(degree);
                    diag_written = true;
                }
                indices.push(j);
                values.push(-w);
            }
            if !diag_written {
                indices.push(i);
                values.push(degree);
            }
            indptr.push(indices.len());
        }
        let matrix = CsrMatrix::from_raw(n, n, indptr, indices, values)?;
        Ok(Self {
            matrix,
            kind: LaplacianKind::Unnormalized,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> LaplacianKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

/// Unnormalized Laplacian of `g`.
pub fn build_laplacian(g: &Graph) -> Laplacian {
    Laplacian::from_adjacency(g.adjacency()).expect("a valid graph has a square adjacency")
}

/// Fraction of undirected edges whose endpoints carry different labels.
///
/// Edges are counted, not weighted, so the value does not change under any
/// rescaling of edge weights.
pub fn heterophily_factor(g: &Graph) -> Result<f64> {
    let labels = g.labels().ok_or(Error::MissingLabels)?;
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let cross = g.edges().filter(|&(i, j, _)| labels[i] != labels[j]).count();
    Ok(cross as f64 / g.edge_count() as f64)
}
