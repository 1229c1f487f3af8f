//! Closed-form guarantees of the hashing scheme and Monte-Carlo checks of
//! them.
//!
//! * load balance: after `n − k` uniform rightward merges the largest
//!   supernode is at most `n/k + n(ln k + c)/k` with probability at least
//!   `1 − e^{−c}`;
//! * proximity: for `h(x) = Σ_j r_jᵀ x` with `ℓ` standard-normal `r_j`,
//!   `Pr[|h(x) − h(y)| ≤ ε] = erf(ε / (√(2ℓ)‖x − y‖))`;
//! * separation: `Pr[h(x) < h(z) < h(y)] ≤ Φ(‖x − y‖ / (√ℓ ‖x − z‖))`.
//!
//! Validators use the production code paths: the load-balance check runs
//! the real merge scheduler and the projection checks draw real
//! [`ProjectionSet`](crate::lsh::ProjectionSet)s. Trials get independent
//! derived seeds and run in parallel; results only depend on the seed.

use std::collections::BTreeMap;

use libm::{erf, erfc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lsh::{sample_projections, NodeOrder};
use crate::pipeline::mix_seed;
use crate::schedule::build_schedule;

/// Outcome of one Monte-Carlo check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub empirical: f64,
    pub analytic: f64,
    pub trials: usize,
    pub pass: bool,
    /// Allowed deviation from `analytic` in the direction(s) being checked.
    pub tolerance: f64,
}

/// Binomial standard error at success probability `p`.
pub fn binomial_se(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

fn params<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// `n/k + n(ln k + c)/k`.
pub fn load_balance_bound(n: usize, k: usize, c: f64) -> Result<f64> {
    if k == 0 || k > n || !(c > 0.0) {
        return Err(Error::InvalidParams(format!(
            "load balance needs 1 <= k <= n and c > 0, got n={n}, k={k}, c={c}"
        )));
    }
    let (n, k) = (n as f64, k as f64);
    Ok(n / k + n * (k.ln() + c) / k)
}

/// Largest supernode after `n − k` seeded merges over `n` ring positions.
pub fn max_supernode_after_merges(n: usize, k: usize, seed: u64) -> Result<usize> {
    let schedule = build_schedule(NodeOrder::identity(n), k as f64 / n as f64, seed)?;
    Ok(schedule.partition_after(n - k)?.max_size())
}

/// Fraction of trials whose largest supernode respects the load-balance
/// bound. Passes when it is at least `1 − e^{−c} − 3σ`.
pub fn validate_load_balance(n: usize, k: usize, c: f64, trials: usize, seed: u64) -> Result<BoundCheck> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be positive".into()));
    }
    let bound = load_balance_bound(n, k, c)?;
    let within = (0..trials)
        .into_par_iter()
        .map(|t| max_supernode_after_merges(n, k, mix_seed(seed, t as u64)).map(|m| m as f64 <= bound))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&ok| ok)
        .count();
    let empirical = within as f64 / trials as f64;
    let analytic = 1.0 - (-c).exp();
    let tolerance = 3.0 * binomial_se(analytic, trials);
    Ok(BoundCheck {
        name: "load_balance".into(),
        params: params([("n", n as f64), ("k", k as f64), ("c", c), ("bound", bound)]),
        empirical,
        analytic,
        trials,
        pass: empirical >= analytic - tolerance,
        tolerance,
    })
}

/// `erf(ε / (√(2ℓ)·dist))`.
///
/// A zero distance returns [`Error::ZeroDistance`] carrying the limit value 1.
pub fn proximity_probability(eps: f64, projectors: usize, dist: f64) -> Result<f64> {
    if !(eps >= 0.0) || projectors == 0 || !(dist >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "need eps >= 0, projectors >= 1, dist >= 0; got {eps}, {projectors}, {dist}"
        )));
    }
    if dist == 0.0 {
        return Err(Error::ZeroDistance { limit: 1.0 });
    }
    Ok(erf(eps / ((2.0 * projectors as f64).sqrt() * dist)))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `Φ(‖x − y‖ / (√ℓ ‖x − z‖))`.
pub fn separation_bound(x: &[f64], y: &[f64], z: &[f64], projectors: usize) -> Result<f64> {
    if x.len() != y.len() || x.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: if x.len() != y.len() { y.len() } else { z.len() },
        });
    }
    if projectors == 0 {
        return Err(Error::InvalidParams("projectors must be positive".into()));
    }
    let far = distance(x, z);
    if far == 0.0 {
        return Err(Error::ZeroDistance { limit: 1.0 });
    }
    Ok(normal_cdf(distance(x, y) / ((projectors as f64).sqrt() * far)))
}

/// Sum-of-projections hash `h(v) = Σ_k W[:,k]ᵀ v` for each vector under one
/// seeded projection set. The bias is omitted: it shifts every hash equally.
pub fn sum_projection_hashes(vectors: &[&[f64]], projectors: usize, seed: u64) -> Result<Vec<f64>> {
    let d = vectors.first().map_or(0, |v| v.len());
    let p = sample_projections(d, projectors, seed)?;
    Ok(vectors
        .iter()
        .map(|v| {
            v.iter()
                .enumerate()
                .map(|(r, &vr)| vr * p.weight_row(r).iter().sum::<f64>())
                .sum()
        })
        .collect())
}

fn check_pair(x: &[f64], y: &[f64], trials: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be positive".into()));
    }
    let dist = distance(x, y);
    if dist == 0.0 {
        return Err(Error::DegenerateInput("x and y coincide".into()));
    }
    Ok(dist)
}

/// `h(x) − h(y)` for each trial.
pub fn projection_differences(x: &[f64], y: &[f64], projectors: usize, trials: usize, seed: u64) -> Result<Vec<f64>> {
    check_pair(x, y, trials)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let h = sum_projection_hashes(&[x, y], projectors, mix_seed(seed, t as u64))?;
            Ok(h[0] - h[1])
        })
        .collect()
}

/// Empirical `Pr[|h(x) − h(y)| ≤ ε]` against the erf law; passes when
/// within `max(0.01, 3σ)` on either side.
pub fn validate_proximity(
    x: &[f64],
    y: &[f64],
    projectors: usize,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<BoundCheck> {
    let dist = check_pair(x, y, trials)?;
    let diffs = projection_differences(x, y, projectors, trials, seed)?;
    proximity_check(&diffs, dist, projectors, eps)
}

fn proximity_check(diffs: &[f64], dist: f64, projectors: usize, eps: f64) -> Result<BoundCheck> {
    let trials = diffs.len();
    let empirical = diffs.iter().filter(|d| d.abs() <= eps).count() as f64 / trials as f64;
    let analytic = proximity_probability(eps, projectors, dist)?;
    let tolerance = 0.01f64.max(3.0 * binomial_se(analytic, trials));
    Ok(BoundCheck {
        name: "proximity".into(),
        params: params([("eps", eps), ("projectors", projectors as f64), ("dist", dist)]),
        empirical,
        analytic,
        trials,
        pass: (empirical - analytic).abs() <= tolerance,
        tolerance,
    })
}

/// Sample variance of `h(x) − h(y)` against `ℓ‖x − y‖²`; passes within a
/// relative tolerance of 2%.
pub fn validate_projection_variance(
    x: &[f64],
    y: &[f64],
    projectors: usize,
    trials: usize,
    seed: u64,
) -> Result<BoundCheck> {
    let dist = check_pair(x, y, trials)?;
    if trials < 2 {
        return Err(Error::InvalidParams("variance needs at least two trials".into()));
    }
    let diffs = projection_differences(x, y, projectors, trials, seed)?;
    let mean = diffs.iter().sum::<f64>() / trials as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    let analytic = projectors as f64 * dist * dist;
    let tolerance = 0.02 * analytic;
    Ok(BoundCheck {
        name: "projection_variance".into(),
        params: params([("projectors", projectors as f64), ("dist", dist)]),
        empirical: var,
        analytic,
        trials,
        pass: (var - analytic).abs() <= tolerance,
        tolerance,
    })
}

/// Empirical `Pr[h(x) < h(z) < h(y)]` against the separation bound; passes
/// when at most the bound plus `3σ`.
pub fn validate_separation(
    x: &[f64],
    y: &[f64],
    z: &[f64],
    projectors: usize,
    trials: usize,
    seed: u64,
) -> Result<BoundCheck> {
    let analytic = separation_bound(x, y, z, projectors)?;
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be positive".into()));
    }
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| {
            let h = sum_projection_hashes(&[x, y, z], projectors, mix_seed(seed, t as u64))?;
            Ok(h[0] < h[2] && h[2] < h[1])
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&b| b)
        .count();
    let empirical = hits as f64 / trials as f64;
    let tolerance = 3.0 * binomial_se(analytic, trials);
    Ok(BoundCheck {
        name: "separation".into(),
        params: params([
            ("projectors", projectors as f64),
            ("near", distance(x, y)),
            ("far", distance(x, z)),
        ]),
        empirical,
        analytic,
        trials,
        pass: empirical <= analytic + tolerance,
        tolerance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub eps: f64,
    pub empirical: f64,
    pub analytic: f64,
}

/// Empirical and analytic proximity probability over a grid of `ε`, all
/// from one set of trials.
pub fn proximity_curve(
    x: &[f64],
    y: &[f64],
    projectors: usize,
    eps_values: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    let dist = check_pair(x, y, trials)?;
    let diffs = projection_differences(x, y, projectors, trials, seed)?;
    eps_values
        .iter()
        .map(|&eps| {
            let c = proximity_check(&diffs, dist, projectors, eps)?;
            Ok(CurvePoint {
                eps,
                empirical: c.empirical,
                analytic: c.analytic,
            })
        })
        .collect()
}
