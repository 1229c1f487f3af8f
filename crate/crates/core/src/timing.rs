//! Wall-clock phase timing for the CLI and the benchmark harness.

use std::time::Instant;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Load,
    Project,
    Sort,
    Schedule,
    PerRatioExtract,
    Coarsen,
    Metrics,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Load => "load",
            Phase::Project => "project",
            Phase::Sort => "sort",
            Phase::Schedule => "schedule",
            Phase::PerRatioExtract => "per_ratio_extract",
            Phase::Coarsen => "coarsen",
            Phase::Metrics => "metrics",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub phase: Phase,
    pub wall_time: f64,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct PhaseTimer {
    records: Vec<TimingRecord>,
}

impl PhaseTimer {
    pub fn time<T>(&mut self, phase: Phase, ratio: Option<f64>, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.records.push(TimingRecord {
            phase,
            wall_time: start.elapsed().as_secs_f64(),
            ratio,
        });
        out
    }

    pub fn records(&self) -> &[TimingRecord] {
        &self.records
    }

    pub fn total(&self) -> f64 {
        self.records.iter().map(|r| r.wall_time).sum()
    }

    pub fn total_excluding(&self, phases: &[Phase]) -> f64 {
        self.records
            .iter()
            .filter(|r| !phases.contains(&r.phase))
            .map(|r| r.wall_time)
            .sum()
    }

    /// `phase,ratio,wall_time_s` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phase,ratio,wall_time_s\n");
        for r in &self.records {
            let ratio = r.ratio.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{:.9}\n", r.phase.as_str(), ratio, r.wall_time));
        }
        out
    }
}
