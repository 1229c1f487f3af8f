//! Assembly of the coarsened graph `Ã = CᵀAC` from a partition.

use crate::error::{Error, Result};
use crate::graph::{Graph, Laplacian};
use crate::matrix::{CsrMatrix, DenseMatrix};
use crate::schedule::CoarseningMatrix;

/// Graph over supernodes.
///
/// The adjacency carries inter-supernode weights only; the weight of edges
/// inside a supernode is kept separately in `self_weights` so the adjacency
/// stays a valid (zero-diagonal) graph.
#[derive(Clone, Debug)]
pub struct CoarsenedGraph {
    adjacency: CsrMatrix,
    self_weights: Vec<f64>,
    features: DenseMatrix,
    labels: Option<Vec<i64>>,
    coarsening: CoarseningMatrix,
}

impl CoarsenedGraph {
    pub fn num_supernodes(&self) -> usize {
        self.coarsening.num_supernodes()
    }

    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adjacency
    }

    pub fn self_weights(&self) -> &[f64] {
        &self.self_weights
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn coarsening(&self) -> &CoarseningMatrix {
        &self.coarsening
    }

    /// Sum of inter-supernode weights, each pair once.
    pub fn inter_weight(&self) -> f64 {
        self.adjacency
            .triplets()
            .filter(|&(u, v, _)| u < v)
            .map(|(_, _, w)| w)
            .sum()
    }

    pub fn intra_weight(&self) -> f64 {
        self.self_weights.iter().sum()
    }

    /// Laplacian of the supernode graph, self weights excluded.
    pub fn laplacian(&self) -> Laplacian {
        Laplacian::from_adjacency(&self.adjacency).expect("coarse adjacency is square")
    }

    /// The supernode graph as an ordinary [`Graph`].
    pub fn to_graph(&self) -> Graph {
        Graph::new(self.adjacency.clone(), self.features.clone(), self.labels.clone())
            .expect("coarse adjacency is symmetric with an empty diagonal")
    }
}

/// Nodes grouped by supernode: `nodes[ptr[u]..ptr[u+1]]` are the members of
/// `u` in ascending order.
pub(crate) struct Groups {
    pub ptr: Vec<usize>,
    pub nodes: Vec<usize>,
}

pub(crate) fn group_members(c: &CoarseningMatrix) -> Groups {
    let n = c.num_supernodes();
    let mut ptr = vec![0usize; n + 1];
    for (u, &s) in c.sizes().iter().enumerate() {
        ptr[u + 1] = ptr[u] + s;
    }
    let mut fill = ptr.clone();
    let mut nodes = vec![0usize; c.num_nodes()];
    for (i, &u) in c.assignment().iter().enumerate() {
        nodes[fill[u]] = i;
        fill[u] += 1;
    }
    Groups { ptr, nodes }
}

impl Groups {
    pub fn members(&self, u: usize) -> &[usize] {
        &self.nodes[self.ptr[u]..self.ptr[u + 1]]
    }
}

/// Coarsens `g` under the partition `c`.
///
/// One pass over the edges accumulates `(π(i), π(j))` weights: pairs with
/// `π(i) < π(j)` build the upper triangle, which is mirrored to keep the
/// result exactly symmetric; pairs inside a supernode go to `self_weights`.
/// Features are member means; labels are the per-supernode majority with
/// ties going to the smallest label.
pub fn coarsen_graph(g: &Graph, c: &CoarseningMatrix) -> Result<CoarsenedGraph> {
    if c.num_nodes() != g.num_nodes() {
        return Err(Error::SizeMismatch(format!(
            "partition covers {} nodes, graph has {}",
            c.num_nodes(),
            g.num_nodes()
        )));
    }
    let n = c.num_supernodes();
    let groups = group_members(c);
    let assign = c.assignment();
    let adj = g.adjacency();

    let mut self_weights = vec![0.0; n];
    let mut up_ptr = Vec::with_capacity(n + 1);
    let mut up_idx = Vec::new();
    let mut up_val = Vec::new();
    let mut slot = vec![usize::MAX; n];
    let mut row: Vec<(usize, f64)> = Vec::new();
    up_ptr.push(0);
    for u in 0..n {
        row.clear();
        for &i in groups.members(u) {
            let (cols, vals) = adj.row(i);
            for (&j, &w) in cols.iter().zip(vals) {
                let v = assign[j];
                if v == u {
                    if i < j {
                        self_weights[u] += w;
                    }
                } else if v > u {
                    match slot[v] {
                        usize::MAX => {
                            slot[v] = row.len();
                            row.push((v, w));
                        }
                        s => row[s].1 += w,
                    }
                }
            }
        }
        for &(v, _) in &row {
            slot[v] = usize::MAX;
        }
        row.sort_unstable_by_key(|&(v, _)| v);
        up_idx.extend(row.iter().map(|&(v, _)| v));
        up_val.extend(row.iter().map(|&(_, w)| w));
        up_ptr.push(up_idx.len());
    }
    let upper = CsrMatrix::from_raw_trusted(n, n, up_ptr, up_idx, up_val);
    let adjacency = mirror_upper(&upper);

    let features = mean_rows(g.features(), &groups);
    let labels = g.labels().map(|l| majority_labels(l, &groups));
    Ok(CoarsenedGraph {
        adjacency,
        self_weights,
        features,
        labels,
        coarsening: c.clone(),
    })
}

/// `U + Uᵀ` for a strictly upper-triangular `U`. Rows of `Uᵀ` only hold
/// columns below the diagonal, so each output row is the concatenation of
/// the two.
fn mirror_upper(upper: &CsrMatrix) -> CsrMatrix {
    let lower = upper.transpose();
    let n = upper.rows();
    let mut ptr = Vec::with_capacity(n + 1);
    let mut idx = Vec::with_capacity(2 * upper.nnz());
    let mut val = Vec::with_capacity(2 * upper.nnz());
    ptr.push(0);
    for u in 0..n {
        for (v, w) in lower.row_iter(u).chain(upper.row_iter(u)) {
            idx.push(v);
            val.push(w);
        }
        ptr.push(idx.len());
    }
    CsrMatrix::from_raw_trusted(n, n, ptr, idx, val)
}

pub(crate) fn mean_rows(x: &DenseMatrix, groups: &Groups) -> DenseMatrix {
    let n = groups.ptr.len() - 1;
    let mut out = DenseMatrix::zeros(n, x.cols());
    for u in 0..n {
        let members = groups.members(u);
        let dst = out.row_mut(u);
        for &i in members {
            for (d, &s) in dst.iter_mut().zip(x.row(i)) {
                *d += s;
            }
        }
        let inv = 1.0 / members.len() as f64;
        dst.iter_mut().for_each(|d| *d *= inv);
    }
    out
}

pub(crate) fn majority_labels(labels: &[i64], groups: &Groups) -> Vec<i64> {
    let n = groups.ptr.len() - 1;
    let mut buf = Vec::new();
    (0..n)
        .map(|u| {
            buf.clear();
            buf.extend(groups.members(u).iter().map(|&i| labels[i]));
            buf.sort_unstable();
            majority_of_sorted(&buf)
        })
        .collect()
}

/// Most frequent value; ties go to the smallest.
pub fn majority_vote(values: &[i64]) -> i64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    majority_of_sorted(&sorted)
}

fn majority_of_sorted(sorted: &[i64]) -> i64 {
    let mut best = (0usize, i64::MAX);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if j - i > best.0 {
            best = (j - i, sorted[i]);
        }
        i = j;
    }
    best.1
}
