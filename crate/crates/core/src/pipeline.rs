//! End-to-end adaptive coarsening: hash once, schedule once, then extract
//! as many resolutions as needed.

use serde::{Deserialize, Serialize};

use crate::coarsen::{coarsen_graph, CoarsenedGraph};
use crate::error::{Error, Result};
use crate::graph::{heterophily_factor, Graph};
use crate::lsh::{
    build_order, project_rows, sample_projections, standardize_columns, Aggregate, AugmentedRows, ScoreOptions,
    ScoreVector, DEFAULT_PROJECTORS,
};
use crate::schedule::{build_schedule, CoarseningMatrix, MergeSchedule};
use crate::timing::{Phase, PhaseTimer};

/// How the feature/structure blend `α` is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaMode {
    /// Cross-label edge fraction of the input graph (needs labels).
    #[default]
    Auto,
    Fixed(f64),
}

impl std::str::FromStr for AlphaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(AlphaMode::Auto);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::InvalidParams(format!("alpha must be `auto` or a number, got `{s}`")))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParams(format!("alpha {v} outside [0, 1]")));
        }
        Ok(AlphaMode::Fixed(v))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoarsenConfig {
    pub alpha: AlphaMode,
    pub projectors: usize,
    pub seed: u64,
    pub aggregate: Aggregate,
    /// z-score feature columns before hashing. Coarsened features are always
    /// means of the original, unscaled features.
    pub standardize: bool,
}

impl Default for CoarsenConfig {
    fn default() -> Self {
        Self {
            alpha: AlphaMode::Auto,
            projectors: DEFAULT_PROJECTORS,
            seed: 0,
            aggregate: Aggregate::Mean,
            standardize: false,
        }
    }
}

/// SplitMix64 finalizer; used to derive independent sub-seeds.
pub fn mix_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SCHEDULE_TAG: u64 = 0x5C4E_D01E;

pub fn resolve_alpha(g: &Graph, mode: AlphaMode) -> Result<f64> {
    match mode {
        AlphaMode::Fixed(a) => Ok(a),
        AlphaMode::Auto => heterophily_factor(g),
    }
}

/// The hashing and scheduling state shared by every resolution of one graph.
#[derive(Clone, Debug)]
pub struct AdaptiveCoarsener {
    alpha: f64,
    scores: ScoreVector,
    schedule: MergeSchedule,
}

impl AdaptiveCoarsener {
    /// Hashes `g`, sorts the scores and builds a merge schedule deep enough
    /// for every ratio down to `min_ratio`.
    pub fn new(g: &Graph, config: &CoarsenConfig, min_ratio: f64) -> Result<Self> {
        Self::new_timed(g, config, min_ratio, &mut PhaseTimer::default())
    }

    pub fn new_timed(g: &Graph, config: &CoarsenConfig, min_ratio: f64, timer: &mut PhaseTimer) -> Result<Self> {
        let alpha = resolve_alpha(g, config.alpha)?;
        let standardized = config.standardize.then(|| standardize_columns(g.features()));
        let rows = AugmentedRows {
            dense: Some(standardized.as_ref().unwrap_or(g.features())),
            sparse: Some(g.adjacency()),
        };
        Self::from_rows(rows, alpha, config, min_ratio, timer)
    }

    /// Hash-sort-schedule over arbitrary augmented rows with a fixed `alpha`.
    /// Rows of zero total width all tie, which yields the identity order.
    pub fn from_rows(
        rows: AugmentedRows<'_>,
        alpha: f64,
        config: &CoarsenConfig,
        min_ratio: f64,
        timer: &mut PhaseTimer,
    ) -> Result<Self> {
        let n = rows
            .num_rows()
            .ok_or_else(|| Error::InvalidDimension("no input rows".into()))?;
        let scores = timer.time(Phase::Project, None, || {
            if rows.dim() == 0 {
                return Ok(ScoreVector {
                    scores: vec![0.0; n],
                    per_projector: None,
                    alpha_used: alpha,
                });
            }
            let projections = sample_projections(rows.dim(), config.projectors, config.seed)?;
            project_rows(
                rows,
                alpha,
                &projections,
                ScoreOptions {
                    aggregate: config.aggregate,
                    keep_per_projector: false,
                },
            )
        })?;
        let order = timer.time(Phase::Sort, None, || build_order(&scores));
        let schedule = timer.time(Phase::Schedule, None, || {
            build_schedule(order, min_ratio, mix_seed(config.seed, SCHEDULE_TAG))
        })?;
        Ok(Self {
            alpha,
            scores,
            schedule,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scores(&self) -> &ScoreVector {
        &self.scores
    }

    pub fn schedule(&self) -> &MergeSchedule {
        &self.schedule
    }

    pub fn partition(&self, ratio: f64) -> Result<CoarseningMatrix> {
        self.schedule.partition_at_ratio(ratio)
    }

    pub fn coarsen(&self, g: &Graph, ratio: f64) -> Result<CoarsenedGraph> {
        coarsen_graph(g, &self.partition(ratio)?)
    }
}

/// Coarsened graphs for every ratio from one hashing pass.
pub fn coarsen_at_ratios(g: &Graph, config: &CoarsenConfig, ratios: &[f64]) -> Result<Vec<CoarsenedGraph>> {
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    if ratios.is_empty() {
        return Ok(Vec::new());
    }
    let coarsener = AdaptiveCoarsener::new(g, config, min_ratio)?;
    ratios.iter().map(|&r| coarsener.coarsen(g, r)).collect()
}
