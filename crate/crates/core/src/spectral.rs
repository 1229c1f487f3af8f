//! Spectral fidelity between a graph and its coarsening: relative eigenvalue
//! error (REE), hyperbolic error (HE) and reconstruction error (RcE).
//!
//! HE and RcE go through the lifted Laplacian `L_lift = C L_c Cᵀ`, which is
//! block-constant over supernode pairs. Neither metric materializes it:
//! `L_lift X` is `C (L_c (Cᵀ X))`, and the Frobenius distance is accumulated
//! block by block over the nonzeros of `L` and `L_c`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::coarsen::{group_members, CoarsenedGraph};
use crate::error::{Error, Result};
use crate::graph::{build_laplacian, Graph, Laplacian};
use crate::matrix::{CsrMatrix, DenseMatrix};
use crate::schedule::CoarseningMatrix;

/// Largest graph handled by the dense eigensolver unless overridden.
pub const DEFAULT_DENSE_LIMIT: usize = 4000;

/// Eigenvalues below this are treated as zero by REE.
pub const ZERO_EIGENVALUE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumEnd {
    /// The `k` smallest eigenvalues.
    #[default]
    Low,
    /// The `k` largest eigenvalues.
    High,
}

impl std::str::FromStr for SpectrumEnd {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(SpectrumEnd::Low),
            "high" => Ok(SpectrumEnd::High),
            other => Err(Error::InvalidParams(format!("unknown spectrum end `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenOptions {
    pub dense_limit: usize,
    /// Use Lanczos iteration above `dense_limit` instead of refusing.
    pub iterative: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dense_limit: DEFAULT_DENSE_LIMIT,
            iterative: false,
        }
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidParams(format!("k = {k} must lie in 1..={n}")));
    }
    Ok(())
}

/// All eigenvalues of a dense symmetric matrix, ascending.
pub fn dense_spectrum(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// The `k` smallest eigenvalues of `l`, ascending.
pub fn eigenvalues_smallest(l: &Laplacian, k: usize, options: EigenOptions) -> Result<Vec<f64>> {
    eigenvalues(l, k, SpectrumEnd::Low, options)
}

/// The `k` eigenvalues at `end` of the spectrum, ordered from that end
/// (ascending for `Low`, descending for `High`).
pub fn eigenvalues(l: &Laplacian, k: usize, end: SpectrumEnd, options: EigenOptions) -> Result<Vec<f64>> {
    let n = l.dim();
    check_k(k, n)?;
    if n <= options.dense_limit {
        let all = dense_spectrum(l.matrix().to_dense());
        return Ok(match end {
            SpectrumEnd::Low => all[..k].to_vec(),
            SpectrumEnd::High => all.iter().rev().take(k).copied().collect(),
        });
    }
    if !options.iterative {
        return Err(Error::TooLarge {
            n,
            limit: options.dense_limit,
        });
    }
    Ok(match end {
        SpectrumEnd::Low => lanczos_extreme(l.matrix(), k, 1.0),
        SpectrumEnd::High => lanczos_extreme(l.matrix(), k, -1.0).into_iter().map(|v| -v).collect(),
    })
}

/// Smallest `k` eigenvalues of `sign · m` by Lanczos with full
/// reorthogonalization, locking one converged Ritz vector per round. Each
/// round works in the orthogonal complement of the locked vectors, so
/// repeated eigenvalues are found once per multiplicity.
fn lanczos_extreme(m: &CsrMatrix, k: usize, sign: f64) -> Vec<f64> {
    let n = m.rows();
    let norm_est = (0..n)
        .map(|i| m.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1.0);
    let tol = 1e-10 * norm_est;
    let mut rng = ChaCha8Rng::seed_from_u64(0x1A2C_705E);
    let mut locked: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);

    let apply = |x: &DVector<f64>| -> DVector<f64> {
        DVector::from_iterator(
            n,
            (0..n).map(|i| sign * m.row_iter(i).map(|(j, v)| v * x[j]).sum::<f64>()),
        )
    };
    let project_out = |w: &mut DVector<f64>, basis: &[DVector<f64>]| {
        for _ in 0..2 {
            for u in basis {
                let c = w.dot(u);
                w.axpy(-c, u, 1.0);
            }
        }
    };

    while values.len() < k {
        let room = n - locked.len();
        let mut steps = room.min(64);
        loop {
            let mut v = DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(&mut rng)));
            project_out(&mut v, &locked);
            v.normalize_mut();
            let mut basis: Vec<DVector<f64>> = Vec::with_capacity(steps);
            let mut alphas = Vec::with_capacity(steps);
            let mut betas: Vec<f64> = Vec::with_capacity(steps);
            let mut last_beta = 0.0;
            for j in 0..steps {
                let mut w = apply(&v);
                if j > 0 {
                    w.axpy(-betas[j - 1], &basis[j - 1], 1.0);
                }
                let a = w.dot(&v);
                w.axpy(-a, &v, 1.0);
                basis.push(v.clone());
                alphas.push(a);
                project_out(&mut w, &locked);
                project_out(&mut w, &basis);
                let b = w.norm();
                last_beta = b;
                if b <= 1e-12 * norm_est || j + 1 == steps {
                    break;
                }
                betas.push(b);
                v = w / b;
            }
            let dim = alphas.len();
            let mut t = DMatrix::zeros(dim, dim);
            for i in 0..dim {
                t[(i, i)] = alphas[i];
                if i + 1 < dim {
                    t[(i, i + 1)] = betas[i];
                    t[(i + 1, i)] = betas[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let (idx, theta) = eig
                .eigenvalues
                .iter()
                .copied()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("at least one Lanczos step");
            let s = eig.eigenvectors.column(idx);
            let residual = (last_beta * s[dim - 1]).abs();
            if residual <= tol || steps >= room {
                let mut y = DVector::zeros(n);
                for (c, b) in s.iter().zip(&basis) {
                    y.axpy(*c, b, 1.0);
                }
                project_out(&mut y, &locked);
                y.normalize_mut();
                locked.push(y);
                values.push(theta);
                break;
            }
            steps = (steps * 2).min(room);
        }
    }
    values.sort_by(f64::total_cmp);
    values
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReeValue {
    pub value: f64,
    pub k_used: usize,
    pub skipped: usize,
}

/// Mean relative error over paired eigenvalues. Pairs whose original
/// eigenvalue is below [`ZERO_EIGENVALUE`] are skipped and counted.
pub fn ree_from_spectra(original: &[f64], coarse: &[f64]) -> Result<ReeValue> {
    if original.len() != coarse.len() {
        return Err(Error::DimensionMismatch {
            expected: original.len(),
            found: coarse.len(),
        });
    }
    let mut sum = 0.0;
    let mut used = 0;
    for (&lam, &lam_c) in original.iter().zip(coarse) {
        if lam < ZERO_EIGENVALUE {
            continue;
        }
        sum += (lam_c - lam).abs() / lam;
        used += 1;
    }
    if used == 0 {
        return Err(Error::AllZeroEigenvalues);
    }
    Ok(ReeValue {
        value: sum / used as f64,
        k_used: used,
        skipped: original.len() - used,
    })
}

/// Relative eigenvalue error between `l` and the coarse Laplacian `lc`.
pub fn ree(l: &Laplacian, lc: &Laplacian, k: usize, end: SpectrumEnd, options: EigenOptions) -> Result<ReeValue> {
    check_k(k, lc.dim())?;
    let a = eigenvalues(l, k, end, options)?;
    let b = eigenvalues(lc, k, end, options)?;
    ree_from_spectra(&a, &b)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiftNorm {
    /// Binary membership `C`.
    #[default]
    Binary,
    /// Columns of `C` scaled by `1 / size`.
    Normalized,
}

impl std::str::FromStr for LiftNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(LiftNorm::Binary),
            "normalized" => Ok(LiftNorm::Normalized),
            other => Err(Error::InvalidParams(format!("unknown lift normalization `{other}`"))),
        }
    }
}

/// `C L_c Cᵀ`, kept in factored form.
#[derive(Clone, Debug)]
pub struct LiftedLaplacian {
    coarsening: CoarseningMatrix,
    coarse: Laplacian,
    norm: LiftNorm,
}

impl LiftedLaplacian {
    pub fn new(coarsening: CoarseningMatrix, coarse: Laplacian, norm: LiftNorm) -> Result<Self> {
        if coarse.dim() != coarsening.num_supernodes() {
            return Err(Error::SizeMismatch(format!(
                "coarse Laplacian is {}x{0}, partition has {} supernodes",
                coarse.dim(),
                coarsening.num_supernodes()
            )));
        }
        Ok(Self {
            coarsening,
            coarse,
            norm,
        })
    }

    pub fn from_coarsened(cg: &CoarsenedGraph, norm: LiftNorm) -> Self {
        Self::new(cg.coarsening().clone(), cg.laplacian(), norm).expect("sizes agree by construction")
    }

    pub fn dim(&self) -> usize {
        self.coarsening.num_nodes()
    }

    fn column_scale(&self, supernode: usize) -> f64 {
        match self.norm {
            LiftNorm::Binary => 1.0,
            LiftNorm::Normalized => 1.0 / self.coarsening.sizes()[supernode] as f64,
        }
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.block(self.coarsening.supernode_of(i), self.coarsening.supernode_of(j))
    }

    /// The constant value on block `(a, b)`.
    fn block(&self, a: usize, b: usize) -> f64 {
        self.column_scale(a) * self.column_scale(b) * self.coarse.matrix().get(a, b)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.get(i, j))
    }

    /// Returns `(Cᵀ X, L_c Cᵀ X)` with the column scaling applied.
    fn reduce(&self, x: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
        let n = self.coarsening.num_supernodes();
        let d = x.cols();
        let groups = group_members(&self.coarsening);
        let mut y = DenseMatrix::zeros(n, d);
        for a in 0..n {
            let scale = self.column_scale(a);
            let row = y.row_mut(a);
            for &i in groups.members(a) {
                for (dst, &v) in row.iter_mut().zip(x.row(i)) {
                    *dst += v;
                }
            }
            row.iter_mut().for_each(|v| *v *= scale);
        }
        let z = sparse_times_dense(self.coarse.matrix(), &y);
        (y, z)
    }

    /// `L_lift X`.
    pub fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        let (_, z) = self.reduce(x);
        let mut out = DenseMatrix::zeros(x.rows(), x.cols());
        for i in 0..x.rows() {
            let a = self.coarsening.supernode_of(i);
            let scale = self.column_scale(a);
            for (dst, &v) in out.row_mut(i).iter_mut().zip(z.row(a)) {
                *dst = scale * v;
            }
        }
        out
    }
}

fn sparse_times_dense(a: &CsrMatrix, x: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(a.rows(), x.cols());
    for i in 0..a.rows() {
        let dst = out.row_mut(i);
        for (j, w) in a.row_iter(i) {
            for (d, &v) in dst.iter_mut().zip(x.row(j)) {
                *d += w * v;
            }
        }
    }
    out
}

fn dot_rows(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum()
}

/// Smallest trace accepted by [`hyperbolic_error`].
pub const MIN_TRACE: f64 = 1e-12;

/// `arccosh(‖(L − L_lift)X‖²_F ‖X‖²_F / (2 tr(XᵀLX) tr(XᵀL_lift X)) + 1)`.
pub fn hyperbolic_error(l: &Laplacian, lift: &LiftedLaplacian, x: &DenseMatrix) -> Result<f64> {
    if l.dim() != lift.dim() || x.rows() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: x.rows(),
        });
    }
    let lx = sparse_times_dense(l.matrix(), x);
    let (y, z) = lift.reduce(x);
    let lift_x = lift.apply(x);
    let trace = dot_rows(x, &lx);
    let trace_lift = dot_rows(&y, &z);
    if trace <= MIN_TRACE || trace_lift <= MIN_TRACE {
        return Err(Error::DegenerateFeatures(format!(
            "tr(XᵀLX) = {trace:e}, tr(XᵀL_lift X) = {trace_lift:e}"
        )));
    }
    let diff: f64 = lx
        .as_slice()
        .iter()
        .zip(lift_x.as_slice())
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    let arg = diff * x.frobenius_sq() / (2.0 * trace * trace_lift) + 1.0;
    assert!(arg >= 1.0, "arccosh argument {arg} below 1");
    Ok(arg.acosh())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionError {
    pub raw: f64,
    pub log10: f64,
}

/// `‖L − L_lift‖²_F` and its base-10 logarithm.
pub fn reconstruction_error(l: &Laplacian, lift: &LiftedLaplacian) -> Result<ReconstructionError> {
    if l.dim() != lift.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: lift.dim(),
        });
    }
    let c = &lift.coarsening;
    let sizes = c.sizes();
    let block_value = |a: usize, b: usize| lift.block(a, b);
    // (a, b) -> (Σ (L_ij − c_ab)² over stored L entries, count)
    let mut blocks: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    for (i, j, v) in l.matrix().triplets() {
        let key = (c.supernode_of(i), c.supernode_of(j));
        let e = blocks.entry(key).or_insert((0.0, 0));
        e.0 += (v - block_value(key.0, key.1)).powi(2);
        e.1 += 1;
    }
    let mut raw = 0.0;
    for (&(a, b), &(sq, count)) in &blocks {
        let cab = block_value(a, b);
        raw += sq + (sizes[a] * sizes[b] - count) as f64 * cab * cab;
    }
    for (a, b, _) in lift.coarse.matrix().triplets() {
        if !blocks.contains_key(&(a, b)) {
            let cab = block_value(a, b);
            raw += (sizes[a] * sizes[b]) as f64 * cab * cab;
        }
    }
    Ok(ReconstructionError {
        raw,
        log10: raw.log10(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricOptions {
    pub k: usize,
    pub end: SpectrumEnd,
    pub lift: LiftNorm,
    pub eigen: EigenOptions,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            k: 10,
            end: SpectrumEnd::Low,
            lift: LiftNorm::Binary,
            eigen: EigenOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub ratio: f64,
    pub ree: f64,
    pub he: f64,
    pub rce_raw: f64,
    /// `-inf` (serialized as `null`) when the raw error is exactly zero.
    pub rce_log10: f64,
    #[serde(rename = "k")]
    pub k_used: usize,
    #[serde(rename = "skipped")]
    pub skipped_eigenvalues: usize,
}

/// All three metrics for one coarsening of `g`. `k` is capped at the number
/// of supernodes.
pub fn spectral_report(g: &Graph, cg: &CoarsenedGraph, options: MetricOptions) -> Result<SpectralReport> {
    let l = build_laplacian(g);
    let lc = cg.laplacian();
    let k = options.k.min(cg.num_supernodes());
    let ree = ree(&l, &lc, k, options.end, options.eigen)?;
    let lift = LiftedLaplacian::new(cg.coarsening().clone(), lc, options.lift)?;
    let he = hyperbolic_error(&l, &lift, g.features())?;
    let rce = reconstruction_error(&l, &lift)?;
    Ok(SpectralReport {
        ratio: cg.num_supernodes() as f64 / g.num_nodes() as f64,
        ree: ree.value,
        he,
        rce_raw: rce.raw,
        rce_log10: rce.log10,
        k_used: ree.k_used,
        skipped_eigenvalues: ree.skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarsen::coarsen_graph;
    use crate::synth::random_graph;

    fn graph(edges: &[(usize, usize)], n: usize) -> Graph {
        Graph::from_edges(
            n,
            edges.iter().map(|&(u, v)| (u, v, 1.0)),
            DenseMatrix::zeros(n, 1),
            None,
        )
        .unwrap()
    }

    #[test]
    fn path_and_complete_spectra() {
        let p3 = build_laplacian(&graph(&[(0, 1), (1, 2)], 3));
        let ev = eigenvalues_smallest(&p3, 3, EigenOptions::default()).unwrap();
        for (a, b) in ev.iter().zip([0.0, 1.0, 3.0]) {
            assert!((a - b).abs() < 1e-8);
        }
        let k4 = build_laplacian(&graph(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], 4));
        let ev = eigenvalues_smallest(&k4, 4, EigenOptions::default()).unwrap();
        for (a, b) in ev.iter().zip([0.0, 4.0, 4.0, 4.0]) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn too_large_without_iterative() {
        let g = random_graph(30, 0.2, 2, 2, 1);
        let options = EigenOptions {
            dense_limit: 10,
            iterative: false,
        };
        assert!(matches!(
            eigenvalues_smallest(&build_laplacian(&g), 3, options),
            Err(Error::TooLarge { n: 30, limit: 10 })
        ));
    }

    #[test]
    fn lanczos_matches_dense() {
        // two components, so the zero eigenvalue is repeated
        let mut g = random_graph(120, 0.05, 2, 2, 4);
        let (a, x, y) = g.clone().into_parts();
        let edges = a
            .triplets()
            .filter(|&(i, j, _)| i < j && (i < 60) == (j < 60))
            .collect::<Vec<_>>();
        g = Graph::from_edges(120, edges, x, y).unwrap();
        let l = build_laplacian(&g);
        let dense = eigenvalues(&l, 6, SpectrumEnd::Low, EigenOptions::default()).unwrap();
        let it = EigenOptions {
            dense_limit: 10,
            iterative: true,
        };
        let lanczos = eigenvalues(&l, 6, SpectrumEnd::Low, it).unwrap();
        for (a, b) in dense.iter().zip(&lanczos) {
            assert!((a - b).abs() < 1e-8, "{dense:?} vs {lanczos:?}");
        }
        let dense_hi = eigenvalues(&l, 3, SpectrumEnd::High, EigenOptions::default()).unwrap();
        let lanczos_hi = eigenvalues(&l, 3, SpectrumEnd::High, it).unwrap();
        let mut lanczos_hi_sorted = lanczos_hi.clone();
        lanczos_hi_sorted.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in dense_hi.iter().zip(&lanczos_hi_sorted) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn ree_skip_rule() {
        let r = ree_from_spectra(&[0.0, 1.0, 3.0], &[0.0, 2.0, 3.0]).unwrap();
        assert!((r.value - 0.5).abs() < 1e-15);
        assert_eq!((r.k_used, r.skipped), (2, 1));
        assert!(matches!(
            ree_from_spectra(&[0.0, 1e-9], &[1.0, 1.0]),
            Err(Error::AllZeroEigenvalues)
        ));
    }

    #[test]
    fn identity_coarsening_is_exact() {
        let g = random_graph(25, 0.3, 3, 2, 8);
        let cg = coarsen_graph(&g, &CoarseningMatrix::identity(25)).unwrap();
        let report = spectral_report(&g, &cg, MetricOptions::default()).unwrap();
        assert!(report.ree.abs() < 1e-9);
        assert!(report.he.abs() < 1e-9);
        assert_eq!(report.rce_raw, 0.0);
    }

    #[test]
    fn constant_features_are_degenerate() {
        let g = Graph::from_edges(
            3,
            [(0, 1, 1.0), (1, 2, 1.0)],
            DenseMatrix::from_rows(&[[2.0], [2.0], [2.0]]).unwrap(),
            None,
        )
        .unwrap();
        let cg = coarsen_graph(&g, &CoarseningMatrix::identity(3)).unwrap();
        let lift = LiftedLaplacian::from_coarsened(&cg, LiftNorm::Binary);
        assert!(matches!(
            hyperbolic_error(&build_laplacian(&g), &lift, g.features()),
            Err(Error::DegenerateFeatures(_))
        ));
    }

    #[test]
    fn parse_switches() {
        assert_eq!("high".parse::<SpectrumEnd>().unwrap(), SpectrumEnd::High);
        assert_eq!("normalized".parse::<LiftNorm>().unwrap(), LiftNorm::Normalized);
        assert!("mid".parse::<SpectrumEnd>().is_err());
    }
}
