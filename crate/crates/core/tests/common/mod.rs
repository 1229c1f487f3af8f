//! Independent reference implementations. Everything here is dense and
//! deliberately naive; none of it calls into the code under test beyond
//! reading inputs.
#![allow(dead_code)]

use hashcoarsen::{CoarseningMatrix, DenseMatrix, Graph, ProjectionSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn zeros(r: usize, c: usize) -> Dense {
    vec![vec![0.0; c]; r]
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, m, p) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    let mut out = zeros(n, p);
    for i in 0..n {
        for k in 0..m {
            for j in 0..p {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn transpose(a: &Dense) -> Dense {
    let (n, m) = (a.len(), a.first().map_or(0, Vec::len));
    let mut out = zeros(m, n);
    for i in 0..n {
        for j in 0..m {
            out[j][i] = a[i][j];
        }
    }
    out
}

pub fn dense_adjacency(g: &Graph) -> Dense {
    let n = g.num_nodes();
    let mut a = zeros(n, n);
    for (i, j, w) in g.edges() {
        a[i][j] = w;
        a[j][i] = w;
    }
    a
}

/// Binary `C` with `C[i][π(i)] = 1`.
pub fn dense_c(c: &CoarseningMatrix) -> Dense {
    let mut m = zeros(c.num_nodes(), c.num_supernodes());
    for (i, &s) in c.assignment().iter().enumerate() {
        m[i][s] = 1.0;
    }
    m
}

pub fn laplacian(a: &Dense) -> Dense {
    let n = a.len();
    let mut l = zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                l[i][j] = -a[i][j];
                l[i][i] += a[i][j];
            }
        }
    }
    l
}

/// `(1 − α)X ⊕ αA` concatenated, times `W`, plus `b`, mean over projectors.
pub fn dense_scores(g: &Graph, alpha: f64, p: &ProjectionSet) -> Vec<f64> {
    let a = dense_adjacency(g);
    let x = g.features();
    let l = p.num_projectors();
    (0..g.num_nodes())
        .map(|i| {
            let mut f: Vec<f64> = x.row(i).iter().map(|v| (1.0 - alpha) * v).collect();
            f.extend(a[i].iter().map(|v| alpha * v));
            let total: f64 = (0..l)
                .map(|k| {
                    let dot: f64 = f.iter().enumerate().map(|(r, v)| v * p.weights().get(r, k)).sum();
                    dot + p.bias()[k]
                })
                .sum();
            total / l as f64
        })
        .collect()
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
pub fn jacobi_eigenvalues(m: &Dense) -> Vec<f64> {
    let n = m.len();
    let mut a = m.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Every structural requirement on a partition, checked from the assignment
/// alone. Returns a description of the first violation.
pub fn check_partition(c: &CoarseningMatrix, n: usize, expected_supernodes: usize) -> Result<(), String> {
    if c.num_nodes() != n || c.assignment().len() != n {
        return Err(format!("covers {} nodes, expected {n}", c.num_nodes()));
    }
    if c.num_supernodes() != expected_supernodes {
        return Err(format!(
            "{} supernodes, expected {expected_supernodes}",
            c.num_supernodes()
        ));
    }
    let dense = dense_c(c);
    for (i, row) in dense.iter().enumerate() {
        if row.iter().filter(|&&v| v == 1.0).count() != 1 || row.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(format!("row {i} is not a unit vector"));
        }
    }
    let gram = matmul(&transpose(&dense), &dense);
    for (a, row) in gram.iter().enumerate() {
        for (b, &v) in row.iter().enumerate() {
            if a != b && v != 0.0 {
                return Err(format!("columns {a} and {b} overlap"));
            }
        }
        if row[a] == 0.0 {
            return Err(format!("supernode {a} is empty"));
        }
        if row[a] as usize != c.sizes()[a] {
            return Err(format!("size of {a} recorded as {}, counted {}", c.sizes()[a], row[a]));
        }
    }
    if c.sizes().iter().sum::<usize>() != n {
        return Err("sizes do not sum to N".into());
    }
    Ok(())
}

/// Every supernode of `fine` lies inside one supernode of `coarse`.
pub fn refines(fine: &CoarseningMatrix, coarse: &CoarseningMatrix) -> bool {
    let mut image = vec![usize::MAX; fine.num_supernodes()];
    for (i, &f) in fine.assignment().iter().enumerate() {
        let c = coarse.assignment()[i];
        if image[f] == usize::MAX {
            image[f] = c;
        } else if image[f] != c {
            return false;
        }
    }
    true
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

/// `round(r·N)` clamped to `[1, N]`.
pub fn expected_supernodes(n: usize, r: f64) -> usize {
    ((r * n as f64).round() as usize).clamp(1, n)
}

/// Erdős–Rényi graph with weights in [0.1, 3), uniform features and three
/// label classes.
pub fn weighted_graph(n: usize, p: f64, d: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j, rng.random_range(0.1..3.0)));
            }
        }
    }
    let x: Vec<f64> = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y = (0..n).map(|_| rng.random_range(0..3)).collect();
    Graph::from_edges(n, edges, DenseMatrix::new(n, d, x).unwrap(), Some(y)).unwrap()
}
