//! Timing harness: one-pass multi-resolution coarsening against rerunning
//! the whole pipeline per ratio, and runtime scaling in `N`.
//!
//! File I/O is never timed. Each measurement is the minimum over `repeats`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::pipeline::{AdaptiveCoarsener, CoarsenConfig};
use crate::synth::random_geometric;

/// `0.55, 0.50, …, 0.10`.
pub fn table_ratios() -> Vec<f64> {
    (0..10).map(|i| (55 - 5 * i) as f64 / 100.0).collect()
}

fn min_time<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<f64> {
    let mut best = f64::INFINITY;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        std::hint::black_box(f()?);
        best = best.min(start.elapsed().as_secs_f64());
    }
    Ok(best)
}

fn check_ratios(ratios: &[f64]) -> Result<f64> {
    if ratios.is_empty() {
        return Err(Error::InvalidParams("no ratios".into()));
    }
    Ok(ratios.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Hash, sort and schedule once, then extract and coarsen every ratio.
pub fn run_adaptive(g: &Graph, config: &CoarsenConfig, ratios: &[f64]) -> Result<usize> {
    let coarsener = AdaptiveCoarsener::new(g, config, check_ratios(ratios)?)?;
    let mut total = 0;
    for &r in ratios {
        total += coarsener.coarsen(g, r)?.num_supernodes();
    }
    Ok(total)
}

/// The full pipeline from scratch for every ratio.
pub fn run_naive(g: &Graph, config: &CoarsenConfig, ratios: &[f64]) -> Result<usize> {
    check_ratios(ratios)?;
    let mut total = 0;
    for &r in ratios {
        total += AdaptiveCoarsener::new(g, config, r)?.coarsen(g, r)?.num_supernodes();
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptivityResult {
    pub num_nodes: usize,
    pub num_ratios: usize,
    pub adaptive_s: f64,
    pub naive_s: f64,
    pub speedup: f64,
}

pub fn compare_adaptive(g: &Graph, config: &CoarsenConfig, ratios: &[f64], repeats: usize) -> Result<AdaptivityResult> {
    let adaptive_s = min_time(repeats, || run_adaptive(g, config, ratios))?;
    let naive_s = min_time(repeats, || run_naive(g, config, ratios))?;
    Ok(AdaptivityResult {
        num_nodes: g.num_nodes(),
        num_ratios: ratios.len(),
        adaptive_s,
        naive_s,
        speedup: naive_s / adaptive_s,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub num_nodes: usize,
    pub num_edges: usize,
    pub seconds: f64,
}

/// Adaptive runtime on random geometric graphs of each size.
pub fn scaling(
    sizes: &[usize],
    avg_degree: f64,
    feature_dim: usize,
    config: &CoarsenConfig,
    ratios: &[f64],
    repeats: usize,
) -> Result<Vec<ScalingPoint>> {
    sizes
        .iter()
        .map(|&n| {
            let g = random_geometric(n, avg_degree, feature_dim, config.seed);
            let seconds = min_time(repeats, || run_adaptive(&g, config, ratios))?;
            Ok(ScalingPoint {
                num_nodes: n,
                num_edges: g.edge_count(),
                seconds,
            })
        })
        .collect()
}

/// Least-squares slope of `log t` against `log N`.
pub fn loglog_slope(points: &[ScalingPoint]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidParams("slope needs at least two points".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.num_nodes as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.seconds.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParams("slope needs distinct sizes".into()));
    }
    Ok(sxy / sxx)
}
