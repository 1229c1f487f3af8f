//! Consistent-hashing merge schedule and the partitions it induces.
//!
//! The sorted node order is treated as a ring. Every live supernode owns the
//! gap on its clockwise side; a merge picks a live supernode uniformly at
//! random and closes that gap, absorbing the clockwise neighbour (the last
//! supernode wraps around to the first). Supernodes are therefore always
//! contiguous arcs of the ring.
//!
//! Because a merge only ever closes gaps, the partition after `m` merges is
//! determined by which gaps were closed among the first `m` steps. The
//! schedule records the step at which each gap closed, so the partition for
//! any ratio at or above the schedule's minimum is an `O(N)` scan with no
//! replay and no re-hashing.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lsh::NodeOrder;

const OPEN: usize = usize::MAX;

/// Number of supernodes targeted at ratio `r` for `n` nodes:
/// `max(1, round(r·n))`, capped at `n`.
pub fn target_supernodes(n: usize, ratio: f64) -> usize {
    ((ratio * n as f64).round() as usize).clamp(1, n.max(1))
}

fn check_ratio(ratio: f64) -> Result<()> {
    if ratio > 0.0 && ratio <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidRatio(ratio))
    }
}

/// One rightward merge. `left` and `right` are ring positions of the heads
/// (first positions) of the two merged supernodes; `right` is absorbed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Merge {
    pub step: usize,
    pub left: usize,
    pub right: usize,
}

/// Circular doubly linked list of live supernode heads with O(1) uniform
/// sampling.
struct Ring {
    next: Vec<usize>,
    prev: Vec<usize>,
    live: Vec<usize>,
    slot: Vec<usize>,
}

impl Ring {
    fn new(n: usize) -> Self {
        Self {
            next: (0..n).map(|p| (p + 1) % n).collect(),
            prev: (0..n).map(|p| (p + n - 1) % n).collect(),
            live: (0..n).collect(),
            slot: (0..n).collect(),
        }
    }

    fn is_live(&self, head: usize) -> bool {
        self.slot.get(head).is_some_and(|&s| s != OPEN)
    }

    /// Absorbs the clockwise neighbour of `head`; returns its head.
    fn merge_right(&mut self, head: usize) -> Option<usize> {
        let right = self.next[head];
        if right == head {
            return None;
        }
        let after = self.next[right];
        self.next[head] = after;
        self.prev[after] = head;

        let s = self.slot[right];
        self.live.swap_remove(s);
        if let Some(&moved) = self.live.get(s) {
            self.slot[moved] = s;
        }
        self.slot[right] = OPEN;
        Some(right)
    }
}

/// Seeded sequence of rightward merges over a fixed node order.
#[derive(Clone, Debug)]
pub struct MergeSchedule {
    base_order: NodeOrder,
    merges: Vec<Merge>,
    /// `cut_step[q]` is the step that closed the gap in front of position
    /// `q`, or `OPEN`.
    cut_step: Vec<usize>,
    seed: u64,
    min_ratio: f64,
}

/// Builds the merge schedule down to `max(1, round(min_ratio·N))` supernodes.
///
/// At each step the merging supernode is drawn uniformly from the live
/// supernodes with a ChaCha8 stream seeded by `seed`.
pub fn build_schedule(order: NodeOrder, min_ratio: f64, seed: u64) -> Result<MergeSchedule> {
    check_ratio(min_ratio)?;
    let n = order.len();
    if n == 0 {
        return Err(Error::InvalidParams("cannot schedule merges over zero nodes".into()));
    }
    let num_merges = n - target_supernodes(n, min_ratio);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ring = Ring::new(n);
    let mut merges = Vec::with_capacity(num_merges);
    let mut cut_step = vec![OPEN; n];
    for step in 0..num_merges {
        let left = ring.live[rng.random_range(0..ring.live.len())];
        let right = ring.merge_right(left).expect("at least two supernodes are live");
        cut_step[right] = step;
        merges.push(Merge { step, left, right });
    }
    Ok(MergeSchedule {
        base_order: order,
        merges,
        cut_step,
        seed,
        min_ratio,
    })
}

impl MergeSchedule {
    /// Replays an explicit sequence of merging heads (ring positions). Each
    /// head must be live at its step.
    pub fn from_heads(order: NodeOrder, heads: &[usize]) -> Result<Self> {
        let n = order.len();
        if heads.len() >= n.max(1) {
            return Err(Error::InvalidParams(format!(
                "{} merges requested for {n} nodes",
                heads.len()
            )));
        }
        let mut ring = Ring::new(n);
        let mut merges = Vec::with_capacity(heads.len());
        let mut cut_step = vec![OPEN; n];
        for (step, &left) in heads.iter().enumerate() {
            if !ring.is_live(left) {
                return Err(Error::InvalidParams(format!(
                    "position {left} is not a live supernode head at step {step}"
                )));
            }
            let right = ring.merge_right(left).expect("at least two supernodes are live");
            cut_step[right] = step;
            merges.push(Merge { step, left, right });
        }
        let min_ratio = (n - merges.len()) as f64 / n as f64;
        Ok(Self {
            base_order: order,
            merges,
            cut_step,
            seed: 0,
            min_ratio,
        })
    }

    pub fn base_order(&self) -> &NodeOrder {
        &self.base_order
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn min_ratio(&self) -> f64 {
        self.min_ratio
    }

    pub fn num_nodes(&self) -> usize {
        self.base_order.len()
    }

    /// Partition after the first `num_merges` merges.
    ///
    /// Supernode ids are canonical: numbered by smallest member node id, so
    /// zero merges give the identity.
    pub fn partition_after(&self, num_merges: usize) -> Result<CoarseningMatrix> {
        if num_merges > self.merges.len() {
            return Err(Error::InvalidParams(format!(
                "schedule holds {} merges, {num_merges} requested",
                self.merges.len()
            )));
        }
        let n = self.num_nodes();
        let open = |q: usize| self.cut_step[q] >= num_merges;
        let start = (0..n).find(|&q| open(q)).expect("fewer than N merges leave a gap open");
        let mut ring_id = vec![0usize; n];
        let mut id = 0usize;
        for t in 0..n {
            let pos = (start + t) % n;
            if t > 0 && open(pos) {
                id += 1;
            }
            ring_id[self.base_order.node_at(pos)] = id;
        }
        debug_assert_eq!(id + 1, n - num_merges);
        Ok(CoarseningMatrix::canonical(&ring_id, id + 1))
    }

    /// Partition at ratio `r`: `N - max(1, round(r·N))` merges applied.
    pub fn partition_at_ratio(&self, ratio: f64) -> Result<CoarseningMatrix> {
        check_ratio(ratio)?;
        let n = self.num_nodes();
        let needed = n - target_supernodes(n, ratio);
        if ratio < self.min_ratio || needed > self.merges.len() {
            return Err(Error::RatioBelowSchedule {
                ratio,
                min_ratio: self.min_ratio,
            });
        }
        self.partition_after(needed)
    }
}

/// Free-function form of [`MergeSchedule::partition_at_ratio`].
pub fn partition_at_ratio(schedule: &MergeSchedule, ratio: f64) -> Result<CoarseningMatrix> {
    schedule.partition_at_ratio(ratio)
}

/// Node-to-supernode assignment realizing a binary coarsening matrix
/// `C ∈ {0,1}^{N×n}` with `C[i, π(i)] = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoarseningMatrix {
    assignment: Vec<usize>,
    num_supernodes: usize,
    sizes: Vec<usize>,
}

impl CoarseningMatrix {
    /// Validates an assignment vector: ids in `0..num_supernodes`, every
    /// supernode nonempty.
    pub fn from_assignment(assignment: Vec<usize>, num_supernodes: usize) -> Result<Self> {
        let mut sizes = vec![0usize; num_supernodes];
        for (node, &s) in assignment.iter().enumerate() {
            if s >= num_supernodes {
                return Err(Error::InvalidPartition(format!(
                    "node {node} assigned to {s}, only {num_supernodes} supernodes"
                )));
            }
            sizes[s] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidPartition(format!("supernode {empty} is empty")));
        }
        Ok(Self {
            assignment,
            num_supernodes,
            sizes,
        })
    }

    /// Relabels `raw` (ids in `0..k`, all used) in order of first appearance.
    fn canonical(raw: &[usize], k: usize) -> Self {
        let mut relabel = vec![OPEN; k];
        let mut sizes = Vec::with_capacity(k);
        let assignment = raw
            .iter()
            .map(|&r| {
                if relabel[r] == OPEN {
                    relabel[r] = sizes.len();
                    sizes.push(0);
                }
                sizes[relabel[r]] += 1;
                relabel[r]
            })
            .collect();
        Self {
            assignment,
            num_supernodes: k,
            sizes,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            assignment: (0..n).collect(),
            num_supernodes: n,
            sizes: vec![1; n],
        }
    }

    #[inline]
    pub fn supernode_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn num_nodes(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_supernodes(&self) -> usize {
        self.num_supernodes
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn max_size(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    /// Member lists per supernode, each in ascending node order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (node, &s) in self.assignment.iter().enumerate() {
            out[s].push(node);
        }
        out
    }

    /// Dense binary `N × n` matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut c = DMatrix::zeros(self.num_nodes(), self.num_supernodes);
        for (i, &s) in self.assignment.iter().enumerate() {
            c[(i, s)] = 1.0;
        }
        c
    }

    /// True when every supernode of `self` lies inside a single supernode of
    /// `coarser`.
    pub fn refines(&self, coarser: &CoarseningMatrix) -> bool {
        if self.num_nodes() != coarser.num_nodes() {
            return false;
        }
        let mut parent = vec![OPEN; self.num_supernodes];
        self.assignment
            .iter()
            .zip(&coarser.assignment)
            .all(|(&fine, &coarse)| match parent[fine] {
                OPEN => {
                    parent[fine] = coarse;
                    true
                }
                p => p == coarse,
            })
    }
}
