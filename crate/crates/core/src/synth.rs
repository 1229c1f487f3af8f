//! Seeded synthetic graphs for tests, benchmarks and the theory checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::graph::Graph;
use crate::hetero::{HeteroGraph, NodeType, Relation};
use crate::matrix::{CsrMatrix, DenseMatrix};

/// Random geometric graph on the unit square.
///
/// `n` points are drawn uniformly; two points are joined by a unit-weight
/// edge when their distance is below `r = sqrt(avg_degree / (π n))`, which
/// gives an expected degree of about `avg_degree` away from the border.
/// Features are the coordinates followed by `feature_dim - 2` smooth
/// functions of them plus small Gaussian noise; the label is the quadrant
/// (0..4) of the point. Neighbour search uses a uniform cell grid, so
/// generation is `O(n · avg_degree)`.
pub fn random_geometric(n: usize, avg_degree: f64, feature_dim: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let radius = (avg_degree / (std::f64::consts::PI * n.max(1) as f64)).sqrt().min(1.0);

    let cells = ((1.0 / radius).floor() as usize).max(1);
    let cell_of = |v: f64| ((v * cells as f64) as usize).min(cells - 1);
    let mut grid: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
    for (i, &(x, y)) in pts.iter().enumerate() {
        grid[cell_of(y) * cells + cell_of(x)].push(i);
    }

    let r2 = radius * radius;
    let mut indptr = Vec::with_capacity(n + 1);
    let mut indices = Vec::new();
    indptr.push(0);
    let mut row = Vec::new();
    for &(x, y) in &pts {
        let (cx, cy) = (cell_of(x), cell_of(y));
        row.clear();
        for gy in cy.saturating_sub(1)..=(cy + 1).min(cells - 1) {
            for gx in cx.saturating_sub(1)..=(cx + 1).min(cells - 1) {
                for &j in &grid[gy * cells + gx] {
                    let (px, py) = pts[j];
                    let d2 = (px - x).powi(2) + (py - y).powi(2);
                    if d2 < r2 && (px, py) != (x, y) {
                        row.push(j);
                    }
                }
            }
        }
        row.sort_unstable();
        row.dedup();
        indices.extend_from_slice(&row);
        indptr.push(indices.len());
    }
    let values = vec![1.0; indices.len()];
    let adjacency = CsrMatrix::from_raw(n, n, indptr, indices, values).expect("rows are sorted");

    let mut feats = Vec::with_capacity(n * feature_dim);
    for &(x, y) in &pts {
        for k in 0..feature_dim {
            let v = match k {
                0 => x,
                1 => y,
                _ => {
                    let kf = k as f64;
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    (std::f64::consts::PI * (kf * x + (kf - 1.0) * y)).sin() + 0.05 * noise
                }
            };
            feats.push(v);
        }
    }
    let features = DenseMatrix::new(n, feature_dim, feats).expect("feature buffer sized n*d");
    let labels = pts
        .iter()
        .map(|&(x, y)| i64::from(x > 0.5) + 2 * i64::from(y > 0.5))
        .collect();
    Graph::new(adjacency, features, Some(labels)).expect("geometric graph is symmetric")
}

/// Erdős–Rényi graph with uniform `(0.5, 1.5)` weights, Gaussian features
/// and uniform labels in `0..classes`. Meant for small oracle tests.
pub fn random_graph(n: usize, edge_prob: f64, feature_dim: usize, classes: i64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < edge_prob {
                edges.push((i, j, 0.5 + rng.random::<f64>()));
            }
        }
    }
    let features = gaussian_matrix(&mut rng, n, feature_dim);
    let labels = (0..n).map(|_| rng.random_range(0..classes.max(1))).collect();
    Graph::from_edges(n, edges, features, Some(labels)).expect("generated edges are valid")
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| StandardNormal.sample(&mut *rng)).collect();
    DenseMatrix::new(rows, cols, data).expect("buffer sized rows*cols")
}

fn random_relation(rng: &mut ChaCha8Rng, src: usize, dst: usize, per_src: usize, skip_diagonal: bool) -> CsrMatrix {
    let mut triplets = Vec::with_capacity(src * per_src);
    for i in 0..src {
        for _ in 0..per_src {
            let j = rng.random_range(0..dst);
            if skip_diagonal && i == j {
                continue;
            }
            triplets.push((i, j, 1.0));
        }
    }
    CsrMatrix::from_triplets(src, dst, triplets).expect("indices drawn in range")
}

/// Three-type toy schema in the shape of a bibliographic network:
/// `author` (4 features), `paper` (6 features, labelled target) and
/// `term` (no features), with relations `author-writes-paper`,
/// `paper-cites-paper` and `paper-has-term`. Relation entries count
/// repeated draws, so some weights exceed one.
pub fn hetero_bibliographic(authors: usize, papers: usize, terms: usize, seed: u64) -> HeteroGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let author_x = gaussian_matrix(&mut rng, authors, 4);
    let paper_x = gaussian_matrix(&mut rng, papers, 6);
    let paper_y = (0..papers).map(|_| rng.random_range(0..3)).collect();
    let writes = random_relation(&mut rng, authors, papers, 3, false);
    let cites = random_relation(&mut rng, papers, papers, 2, true);
    let has = random_relation(&mut rng, papers, terms, 4, false);
    HeteroGraph::new(
        vec![
            NodeType::new("author", authors, Some(author_x), None),
            NodeType::new("paper", papers, Some(paper_x), Some(paper_y)),
            NodeType::new("term", terms, None, None),
        ],
        vec![
            Relation::new("author", "writes", "paper", writes),
            Relation::new("paper", "cites", "paper", cites),
            Relation::new("paper", "has", "term", has),
        ],
        "paper",
    )
    .expect("synthetic schema is consistent")
}
