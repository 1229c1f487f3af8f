//! Random-projection hashing of the augmented node representation.
//!
//! Every node is described by its (scaled) feature row concatenated with its
//! (scaled) adjacency row. The concatenation is never materialized: the
//! projection matrix is split into a feature block and a structure block and
//! the two dot products are combined per node, so the cost is
//! `O((N·d + nnz(A))·ℓ)` rather than `O(N²·ℓ)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::{CsrMatrix, DenseMatrix};

/// Default number of random projectors.
pub const DEFAULT_PROJECTORS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionDistribution {
    Gaussian,
}

/// How per-projector scores are combined into one scalar per node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    #[default]
    Mean,
    Max,
    Median,
}

impl Aggregate {
    fn apply(self, values: &[f64]) -> f64 {
        match self {
            Aggregate::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Aggregate::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Aggregate::Median => {
                let mut v = values.to_vec();
                v.sort_by(f64::total_cmp);
                let m = v.len() / 2;
                if v.len() % 2 == 1 {
                    v[m]
                } else {
                    0.5 * (v[m - 1] + v[m])
                }
            }
        }
    }
}

impl std::str::FromStr for Aggregate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Aggregate::Mean),
            "max" => Ok(Aggregate::Max),
            "median" => Ok(Aggregate::Median),
            other => Err(Error::InvalidParams(format!("unknown aggregate `{other}`"))),
        }
    }
}

/// Seeded Gaussian projection matrix (`d_aug × ℓ`, row-major) and bias.
#[derive(Clone, Debug)]
pub struct ProjectionSet {
    weights: DenseMatrix,
    bias: Vec<f64>,
    seed: u64,
    distribution: ProjectionDistribution,
}

impl ProjectionSet {
    #[inline]
    pub fn input_dim(&self) -> usize {
        self.weights.rows()
    }

    #[inline]
    pub fn num_projectors(&self) -> usize {
        self.weights.cols()
    }

    pub fn weights(&self) -> &DenseMatrix {
        &self.weights
    }

    /// Row `r` of the weight matrix: the coefficient of input dimension `r`
    /// in each of the projectors.
    #[inline]
    pub fn weight_row(&self, r: usize) -> &[f64] {
        self.weights.row(r)
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn distribution(&self) -> ProjectionDistribution {
        self.distribution
    }
}

/// Draws a `d_aug × ℓ` standard-normal projection matrix and a length-`ℓ`
/// bias from a ChaCha8 stream seeded with `seed`. Weights are drawn
/// row-major, then the bias.
pub fn sample_projections(d_aug: usize, num_projectors: usize, seed: u64) -> Result<ProjectionSet> {
    if d_aug == 0 || num_projectors == 0 {
        return Err(Error::InvalidDimension(format!(
            "projection needs d_aug >= 1 and projectors >= 1, got {d_aug} and {num_projectors}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..d_aug * num_projectors)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let bias = (0..num_projectors).map(|_| StandardNormal.sample(&mut rng)).collect();
    Ok(ProjectionSet {
        weights: DenseMatrix::new(d_aug, num_projectors, weights)?,
        bias,
        seed,
        distribution: ProjectionDistribution::Gaussian,
    })
}

/// Aggregated hash score per node.
#[derive(Clone, Debug)]
pub struct ScoreVector {
    pub scores: Vec<f64>,
    /// `N × ℓ` individual projector scores, when requested.
    pub per_projector: Option<DenseMatrix>,
    pub alpha_used: f64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ScoreOptions {
    pub aggregate: Aggregate,
    pub keep_per_projector: bool,
}

/// The two halves of an augmented representation. Either half may be absent;
/// its projection block is then empty.
#[derive(Clone, Copy, Debug)]
pub struct AugmentedRows<'a> {
    pub dense: Option<&'a DenseMatrix>,
    pub sparse: Option<&'a CsrMatrix>,
}

impl AugmentedRows<'_> {
    pub fn num_rows(&self) -> Option<usize> {
        self.dense
            .map(DenseMatrix::rows)
            .or_else(|| self.sparse.map(CsrMatrix::rows))
    }

    pub fn dense_dim(&self) -> usize {
        self.dense.map_or(0, DenseMatrix::cols)
    }

    pub fn sparse_dim(&self) -> usize {
        self.sparse.map_or(0, CsrMatrix::cols)
    }

    pub fn dim(&self) -> usize {
        self.dense_dim() + self.sparse_dim()
    }
}

/// Scores `s_i^k = (1-α)·⟨W_x[:,k], X_i⟩ + α·⟨W_a[:,k], A_i⟩ + b_k` for every
/// row and aggregates them per node.
pub fn project_rows(
    rows: AugmentedRows<'_>,
    alpha: f64,
    projections: &ProjectionSet,
    options: ScoreOptions,
) -> Result<ScoreVector> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParams(format!("alpha {alpha} outside [0, 1]")));
    }
    let n = rows
        .num_rows()
        .ok_or_else(|| Error::InvalidDimension("no input rows to project".into()))?;
    if let (Some(d), Some(s)) = (rows.dense, rows.sparse) {
        if d.rows() != s.rows() {
            return Err(Error::DimensionMismatch {
                expected: d.rows(),
                found: s.rows(),
            });
        }
    }
    if projections.input_dim() != rows.dim() {
        return Err(Error::DimensionMismatch {
            expected: rows.dim(),
            found: projections.input_dim(),
        });
    }

    let l = projections.num_projectors();
    let offset = rows.dense_dim();
    let mut raw = vec![0.0; n * l];
    raw.par_chunks_mut(l).enumerate().for_each(|(i, out)| {
        let mut feat = vec![0.0; l];
        let mut structure = vec![0.0; l];
        if let Some(x) = rows.dense {
            for (r, &v) in x.row(i).iter().enumerate() {
                if v != 0.0 {
                    axpy(&mut feat, v, projections.weight_row(r));
                }
            }
        }
        if let Some(a) = rows.sparse {
            for (j, v) in a.row_iter(i) {
                axpy(&mut structure, v, projections.weight_row(offset + j));
            }
        }
        for k in 0..l {
            out[k] = (1.0 - alpha) * feat[k] + alpha * structure[k] + projections.bias()[k];
        }
    });

    let scores = raw.par_chunks(l).map(|s| options.aggregate.apply(s)).collect();
    let per_projector = if options.keep_per_projector {
        Some(DenseMatrix::new(n, l, raw)?)
    } else {
        None
    };
    Ok(ScoreVector {
        scores,
        per_projector,
        alpha_used: alpha,
    })
}

#[inline]
fn axpy(acc: &mut [f64], a: f64, x: &[f64]) {
    for (y, &x) in acc.iter_mut().zip(x) {
        *y += a * x;
    }
}

/// Mean-aggregated scores for a homogeneous graph: features in the first
/// block, adjacency rows in the second.
pub fn project_scores(g: &Graph, alpha: f64, projections: &ProjectionSet) -> Result<ScoreVector> {
    project_scores_with(g, alpha, projections, ScoreOptions::default())
}

pub fn project_scores_with(
    g: &Graph,
    alpha: f64,
    projections: &ProjectionSet,
    options: ScoreOptions,
) -> Result<ScoreVector> {
    let rows = AugmentedRows {
        dense: Some(g.features()),
        sparse: Some(g.adjacency()),
    };
    project_rows(rows, alpha, projections, options)
}

/// Input dimension of the augmented representation of `g`.
pub fn augmented_dim(g: &Graph) -> usize {
    g.features().cols() + g.num_nodes()
}

/// Per-column z-scoring. Constant columns become zero.
pub fn standardize_columns(x: &DenseMatrix) -> DenseMatrix {
    let (n, d) = (x.rows(), x.cols());
    if n == 0 {
        return x.clone();
    }
    let mut mean = vec![0.0; d];
    for row in x.iter_rows() {
        axpy(&mut mean, 1.0, row);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; d];
    for row in x.iter_rows() {
        for c in 0..d {
            var[c] += (row[c] - mean[c]).powi(2);
        }
    }
    let std: Vec<f64> = var.iter().map(|v| (v / n as f64).sqrt()).collect();
    let mut out = DenseMatrix::zeros(n, d);
    for i in 0..n {
        let src = x.row(i);
        for (c, dst) in out.row_mut(i).iter_mut().enumerate() {
            *dst = if std[c] > 0.0 { (src[c] - mean[c]) / std[c] } else { 0.0 };
        }
    }
    out
}

/// Nodes sorted by ascending score, ties broken by ascending node id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeOrder {
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl NodeOrder {
    /// `0, 1, ..., n-1`.
    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
            rank: (0..n).collect(),
        }
    }

    /// Wraps an explicit permutation.
    pub fn from_permutation(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut rank = vec![usize::MAX; n];
        for (pos, &node) in order.iter().enumerate() {
            if node >= n || rank[node] != usize::MAX {
                return Err(Error::InvalidParams("order is not a permutation".into()));
            }
            rank[node] = pos;
        }
        Ok(Self { order, rank })
    }

    /// Node at ring position `pos`.
    #[inline]
    pub fn node_at(&self, pos: usize) -> usize {
        self.order[pos]
    }

    /// Ring position of `node`.
    #[inline]
    pub fn rank_of(&self, node: usize) -> usize {
        self.rank[node]
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn rank(&self) -> &[usize] {
        &self.rank
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

pub fn build_order(scores: &ScoreVector) -> NodeOrder {
    let s = &scores.scores;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]).then(a.cmp(&b)));
    NodeOrder::from_permutation(order).expect("sorted indices form a permutation")
}
