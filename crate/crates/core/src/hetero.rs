//! Type-isolated coarsening of heterogeneous graphs.
//!
//! Each node type is hashed, scheduled and partitioned on its own, so every
//! supernode holds nodes of exactly one type. Relations are then coarsened
//! with the two endpoint types' assignments in a single pass over their
//! entries, which realizes `Ã_(e) = C_(src)ᵀ A_(e) C_(dst)` in the `N × n`
//! orientation.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::coarsen::{group_members, majority_labels, mean_rows};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::lsh::{Aggregate, AugmentedRows, DEFAULT_PROJECTORS};
use crate::matrix::{CsrMatrix, DenseMatrix};
use crate::pipeline::{AdaptiveCoarsener, AlphaMode, CoarsenConfig};
use crate::schedule::{target_supernodes, CoarseningMatrix};
use crate::timing::PhaseTimer;

#[derive(Clone, Debug)]
pub struct NodeType {
    pub name: String,
    pub count: usize,
    pub features: Option<DenseMatrix>,
    pub labels: Option<Vec<i64>>,
}

impl NodeType {
    pub fn new(name: impl Into<String>, count: usize, features: Option<DenseMatrix>, labels: Option<Vec<i64>>) -> Self {
        Self {
            name: name.into(),
            count,
            features,
            labels,
        }
    }
}

/// Typed relation `(src, rel, dst)` stored as a `|V_src| × |V_dst|` matrix.
#[derive(Clone, Debug)]
pub struct Relation {
    pub src: String,
    pub rel: String,
    pub dst: String,
    pub matrix: CsrMatrix,
}

impl Relation {
    pub fn new(src: impl Into<String>, rel: impl Into<String>, dst: impl Into<String>, matrix: CsrMatrix) -> Self {
        Self {
            src: src.into(),
            rel: rel.into(),
            dst: dst.into(),
            matrix,
        }
    }

    pub fn key(&self) -> (&str, &str, &str) {
        (&self.src, &self.rel, &self.dst)
    }
}

#[derive(Clone, Debug)]
pub struct HeteroGraph {
    types: Vec<NodeType>,
    relations: Vec<Relation>,
    target_type: String,
}

impl HeteroGraph {
    pub fn new(types: Vec<NodeType>, relations: Vec<Relation>, target_type: impl Into<String>) -> Result<Self> {
        let target_type = target_type.into();
        let mut names = HashSet::new();
        for t in &types {
            if !names.insert(t.name.as_str()) {
                return Err(Error::Schema(format!("duplicate node type `{}`", t.name)));
            }
            if let Some(x) = &t.features {
                if x.rows() != t.count {
                    return Err(Error::Schema(format!(
                        "type `{}` has {} feature rows for {} nodes",
                        t.name,
                        x.rows(),
                        t.count
                    )));
                }
            }
            if let Some(y) = &t.labels {
                if y.len() != t.count {
                    return Err(Error::Schema(format!(
                        "type `{}` has {} labels for {} nodes",
                        t.name,
                        y.len(),
                        t.count
                    )));
                }
            }
        }
        if !names.contains(target_type.as_str()) {
            return Err(Error::Schema(format!("unknown target type `{target_type}`")));
        }
        let count_of = |name: &str| types.iter().find(|t| t.name == name).map(|t| t.count);
        let mut keys = HashSet::new();
        for r in &relations {
            if !keys.insert(r.key()) {
                return Err(Error::Schema(format!(
                    "duplicate relation ({}, {}, {})",
                    r.src, r.rel, r.dst
                )));
            }
            let src = count_of(&r.src).ok_or_else(|| Error::Schema(format!("unknown type `{}`", r.src)))?;
            let dst = count_of(&r.dst).ok_or_else(|| Error::Schema(format!("unknown type `{}`", r.dst)))?;
            if r.matrix.rows() != src || r.matrix.cols() != dst {
                return Err(Error::Schema(format!(
                    "relation ({}, {}, {}) is {}x{}, expected {src}x{dst}",
                    r.src,
                    r.rel,
                    r.dst,
                    r.matrix.rows(),
                    r.matrix.cols()
                )));
            }
            if r.matrix.values().iter().any(|&w| !(w.is_finite() && w >= 0.0)) {
                return Err(Error::Schema(format!(
                    "relation ({}, {}, {}) has a negative or non-finite weight",
                    r.src, r.rel, r.dst
                )));
            }
        }
        Ok(Self {
            types,
            relations,
            target_type,
        })
    }

    pub fn types(&self) -> &[NodeType] {
        &self.types
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn target_type(&self) -> &str {
        &self.target_type
    }

    pub fn type_index(&self, name: &str) -> Result<usize> {
        self.types
            .iter()
            .position(|t| t.name == name)
            .ok_or_else(|| Error::UnknownType(name.to_string()))
    }

    pub fn node_type(&self, name: &str) -> Result<&NodeType> {
        Ok(&self.types[self.type_index(name)?])
    }
}

/// Where the structural half of a type's augmented representation comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureSource {
    /// Symmetrized union of the relations whose endpoints are both this type.
    WithinType,
    /// Concatenated incidence rows of every relation touching the type; used
    /// when the type has no features.
    Incidence,
}

/// Input of one per-type coarsening run.
#[derive(Clone, Debug)]
pub struct TypeInput {
    pub features: Option<DenseMatrix>,
    pub structure: CsrMatrix,
    pub source: StructureSource,
    /// Blend forced by the input's shape, if any: 1 for incidence-only types,
    /// 0 for featured types without same-type edges.
    pub forced_alpha: Option<f64>,
}

/// Builds the per-type augmented input for type `name`.
pub fn type_features(h: &HeteroGraph, name: &str) -> Result<TypeInput> {
    let t = h.node_type(name)?;
    match &t.features {
        Some(x) => {
            let within = within_type_adjacency(h, t)?;
            let forced_alpha = (within.nnz() == 0).then_some(0.0);
            Ok(TypeInput {
                features: Some(x.clone()),
                structure: within,
                source: StructureSource::WithinType,
                forced_alpha,
            })
        }
        None => Ok(TypeInput {
            features: None,
            structure: incidence_rows(h, t)?,
            source: StructureSource::Incidence,
            forced_alpha: Some(1.0),
        }),
    }
}

fn within_type_adjacency(h: &HeteroGraph, t: &NodeType) -> Result<CsrMatrix> {
    let edges = h
        .relations
        .iter()
        .filter(|r| r.src == t.name && r.dst == t.name)
        .flat_map(|r| r.matrix.triplets());
    let g = Graph::from_edges(t.count, edges, DenseMatrix::zeros(t.count, 0), None)?;
    Ok(g.into_parts().0)
}

fn incidence_rows(h: &HeteroGraph, t: &NodeType) -> Result<CsrMatrix> {
    let mut blocks = Vec::new();
    for r in &h.relations {
        if r.src == t.name {
            blocks.push(r.matrix.clone());
        }
        if r.dst == t.name {
            blocks.push(r.matrix.transpose());
        }
    }
    let width: usize = blocks.iter().map(CsrMatrix::cols).sum();
    let mut indptr = Vec::with_capacity(t.count + 1);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    indptr.push(0);
    for i in 0..t.count {
        let mut offset = 0;
        for b in &blocks {
            for (j, w) in b.row_iter(i) {
                indices.push(offset + j);
                values.push(w);
            }
            offset += b.cols();
        }
        indptr.push(indices.len());
    }
    CsrMatrix::from_raw(t.count, width, indptr, indices, values)
}

/// FNV-1a, used to give every type a seed that does not depend on which
/// other types exist.
fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn type_seed(seed: u64, name: &str) -> u64 {
    seed ^ fnv1a(name)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeteroConfig {
    pub projectors: usize,
    pub seed: u64,
    pub aggregate: Aggregate,
    /// Blend for types that have both features and same-type edges. `Auto`
    /// uses the cross-label edge fraction when the type is labelled and 0.5
    /// otherwise.
    pub alpha: AlphaMode,
    /// Per-type ratio overrides.
    pub type_ratios: BTreeMap<String, f64>,
}

impl Default for HeteroConfig {
    fn default() -> Self {
        Self {
            projectors: DEFAULT_PROJECTORS,
            seed: 0,
            aggregate: Aggregate::Mean,
            alpha: AlphaMode::Auto,
            type_ratios: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CoarsenedType {
    pub name: String,
    pub ratio: f64,
    pub alpha: f64,
    pub source: StructureSource,
    pub coarsening: CoarseningMatrix,
    pub features: Option<DenseMatrix>,
    pub labels: Option<Vec<i64>>,
}

#[derive(Clone, Debug)]
pub struct HeteroCoarsenedGraph {
    pub types: Vec<CoarsenedType>,
    pub relations: Vec<Relation>,
    pub target_type: String,
}

impl HeteroCoarsenedGraph {
    pub fn coarsened_type(&self, name: &str) -> Result<&CoarsenedType> {
        self.types
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::UnknownType(name.to_string()))
    }

    /// Fraction of supernodes whose members all share one node type,
    /// computed over the global node and supernode numbering.
    pub fn purity(&self) -> f64 {
        let mut node_type = Vec::new();
        let mut global_super = Vec::new();
        let mut super_offset = 0;
        for (t, ct) in self.types.iter().enumerate() {
            for &s in ct.coarsening.assignment() {
                node_type.push(t);
                global_super.push(super_offset + s);
            }
            super_offset += ct.coarsening.num_supernodes();
        }
        if super_offset == 0 {
            return 1.0;
        }
        let mut seen: Vec<Option<usize>> = vec![None; super_offset];
        let mut mixed = vec![false; super_offset];
        for (&t, &s) in node_type.iter().zip(&global_super) {
            match seen[s] {
                None => seen[s] = Some(t),
                Some(prev) if prev != t => mixed[s] = true,
                _ => {}
            }
        }
        1.0 - mixed.iter().filter(|&&m| m).count() as f64 / super_offset as f64
    }
}

/// Coarsens every node type to `max(1, round(η_t·|V_t|))` supernodes and
/// every relation through the resulting assignments.
pub fn coarsen_hetero(h: &HeteroGraph, eta: f64, config: &HeteroConfig) -> Result<HeteroCoarsenedGraph> {
    if h.types.is_empty() {
        return Err(Error::InvalidParams("heterogeneous graph has no node types".into()));
    }
    let target = h.node_type(&h.target_type)?;
    if target.labels.is_none() {
        return Err(Error::MissingTargetLabels(h.target_type.clone()));
    }
    let mut types = Vec::with_capacity(h.types.len());
    for t in &h.types {
        let ratio = config.type_ratios.get(&t.name).copied().unwrap_or(eta);
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(Error::InvalidRatio(ratio));
        }
        if t.count == 0 {
            return Err(Error::EmptyType(t.name.clone()));
        }
        types.push(coarsen_type(h, t, ratio, config)?);
    }

    let relations = h
        .relations
        .iter()
        .map(|r| {
            let src = &types[h.type_index(&r.src)?].coarsening;
            let dst = &types[h.type_index(&r.dst)?].coarsening;
            Ok(Relation {
                src: r.src.clone(),
                rel: r.rel.clone(),
                dst: r.dst.clone(),
                matrix: coarsen_relation(&r.matrix, src, dst)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HeteroCoarsenedGraph {
        types,
        relations,
        target_type: h.target_type.clone(),
    })
}

fn coarsen_type(h: &HeteroGraph, t: &NodeType, ratio: f64, config: &HeteroConfig) -> Result<CoarsenedType> {
    let input = type_features(h, &t.name)?;
    let alpha = match input.forced_alpha {
        Some(a) => a,
        None => match config.alpha {
            AlphaMode::Fixed(a) => a,
            AlphaMode::Auto => match &t.labels {
                Some(labels) => {
                    let g = Graph::new(
                        input.structure.clone(),
                        DenseMatrix::zeros(t.count, 0),
                        Some(labels.clone()),
                    )?;
                    crate::graph::heterophily_factor(&g)?
                }
                None => 0.5,
            },
        },
    };
    let run_config = CoarsenConfig {
        alpha: AlphaMode::Fixed(alpha),
        projectors: config.projectors,
        seed: type_seed(config.seed, &t.name),
        aggregate: config.aggregate,
        standardize: false,
    };
    let rows = AugmentedRows {
        dense: input.features.as_ref(),
        sparse: Some(&input.structure),
    };
    let coarsener = AdaptiveCoarsener::from_rows(rows, alpha, &run_config, ratio, &mut PhaseTimer::default())?;
    let coarsening = coarsener
        .schedule()
        .partition_after(t.count - target_supernodes(t.count, ratio))?;
    let groups = group_members(&coarsening);
    Ok(CoarsenedType {
        name: t.name.clone(),
        ratio,
        alpha,
        source: input.source,
        features: t.features.as_ref().map(|x| mean_rows(x, &groups)),
        labels: t.labels.as_ref().map(|y| majority_labels(y, &groups)),
        coarsening,
    })
}

/// `Ã[π_src(i), π_dst(j)] += A[i, j]` over every stored entry.
pub fn coarsen_relation(a: &CsrMatrix, src: &CoarseningMatrix, dst: &CoarseningMatrix) -> Result<CsrMatrix> {
    if a.rows() != src.num_nodes() || a.cols() != dst.num_nodes() {
        return Err(Error::SizeMismatch(format!(
            "relation is {}x{}, partitions cover {} and {} nodes",
            a.rows(),
            a.cols(),
            src.num_nodes(),
            dst.num_nodes()
        )));
    }
    CsrMatrix::from_triplets(
        src.num_supernodes(),
        dst.num_supernodes(),
        a.triplets()
            .map(|(i, j, w)| (src.supernode_of(i), dst.supernode_of(j), w)),
    )
}
