//! Text formats.
//!
//! * edge list: `src<TAB>dst[<TAB>weight]` per line, 0-indexed, `#` comments,
//!   missing weight = 1;
//! * features: headerless CSV, one row per node;
//! * labels and assignments: one integer per line;
//! * heterogeneous manifest: JSON naming per-type and per-relation files,
//!   resolved relative to the manifest's directory.
//!
//! Every parse error carries the file path and a 1-based line number.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coarsen::CoarsenedGraph;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hetero::{HeteroCoarsenedGraph, HeteroGraph, NodeType, Relation};
use crate::lsh::Aggregate;
use crate::matrix::{CsrMatrix, DenseMatrix};
use crate::schedule::CoarseningMatrix;

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Reads an edge list. `limits` bounds source and destination ids.
pub fn read_edge_list(path: &Path, limits: Option<(usize, usize)>) -> Result<Vec<(usize, usize, f64)>> {
    let mut edges = Vec::new();
    for (idx, line) in open(path)?.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected `src<TAB>dst[<TAB>weight]`, got {} field(s)", fields.len()),
            ));
        }
        let id = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(path, lineno, format!("invalid {what} id `{s}`")))
        };
        let (u, v) = (id(fields[0], "source")?, id(fields[1], "destination")?);
        let w = match fields.get(2) {
            Some(s) => s
                .parse::<f64>()
                .ok()
                .filter(|w| w.is_finite() && *w >= 0.0)
                .ok_or_else(|| Error::parse(path, lineno, format!("invalid weight `{s}`")))?,
            None => 1.0,
        };
        if let Some((src_n, dst_n)) = limits {
            if u >= src_n || v >= dst_n {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("edge ({u}, {v}) outside the {src_n}x{dst_n} id range"),
                ));
            }
        }
        edges.push((u, v, w));
    }
    Ok(edges)
}

pub fn read_features(path: &Path) -> Result<DenseMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        if *cols.get_or_insert(record.len()) != record.len() {
            return Err(Error::parse(
                path,
                line,
                format!("expected {} columns, found {}", cols.unwrap(), record.len()),
            ));
        }
        for field in &record {
            let v: f64 = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::parse(path, line, format!("invalid number `{field}`")))?;
            data.push(v);
        }
        rows += 1;
    }
    DenseMatrix::new(rows, cols.unwrap_or(0), data)
}

fn read_integers<T: std::str::FromStr>(path: &Path, what: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (idx, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let s = line.trim();
        if s.is_empty() {
            continue;
        }
        out.push(
            s.parse()
                .map_err(|_| Error::parse(path, idx + 1, format!("invalid {what} `{s}`")))?,
        );
    }
    Ok(out)
}

pub fn read_labels(path: &Path) -> Result<Vec<i64>> {
    read_integers(path, "label")
}

pub fn read_assignment(path: &Path) -> Result<Vec<usize>> {
    read_integers(path, "supernode id")
}

/// Loads a homogeneous graph. The node count is the number of feature rows.
pub fn load_graph(edges: &Path, features: &Path, labels: Option<&Path>) -> Result<Graph> {
    let x = read_features(features)?;
    let n = x.rows();
    let e = read_edge_list(edges, Some((n, n)))?;
    let y = labels.map(read_labels).transpose()?;
    if let (Some(y), Some(path)) = (&y, labels) {
        if y.len() != n {
            return Err(Error::parse(
                path,
                y.len(),
                format!("{} labels for {n} feature rows", y.len()),
            ));
        }
    }
    Graph::from_edges(n, e, x, y)
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Writes `(i, j, w)` lines; callers pass each undirected edge once.
pub fn write_edge_list<I>(path: &Path, edges: I) -> Result<()>
where
    I: IntoIterator<Item = (usize, usize, f64)>,
{
    let mut w = create(path)?;
    for (i, j, v) in edges {
        writeln!(w, "{i}\t{j}\t{}", fmt_f64(v)).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_features(path: &Path, x: &DenseMatrix) -> Result<()> {
    let mut w = create(path)?;
    for row in x.iter_rows() {
        let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(w, "{}", line.join(",")).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_lines<T: std::fmt::Display>(path: &Path, values: &[T]) -> Result<()> {
    let mut w = create(path)?;
    for v in values {
        writeln!(w, "{v}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_assignment(path: &Path, c: &CoarseningMatrix) -> Result<()> {
    write_lines(path, c.assignment())
}

pub fn read_coarsening(path: &Path) -> Result<CoarseningMatrix> {
    let a = read_assignment(path)?;
    let n = a.iter().max().map_or(0, |m| m + 1);
    CoarseningMatrix::from_assignment(a, n).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

/// JSON with keys in sorted order, pretty-printed, trailing newline.
pub fn to_stable_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_stable_json(value)?).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

/// Original inputs a coarsened artifact was produced from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceFiles {
    pub edges: String,
    pub features: String,
    pub labels: Option<String>,
}

/// Description written next to every coarsened graph. File names are
/// relative to the sidecar's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub ratio: f64,
    pub num_nodes: usize,
    pub num_supernodes: usize,
    pub seed: u64,
    pub alpha: f64,
    pub projectors: usize,
    pub aggregate: Aggregate,
    pub assignment_file: String,
    pub edges_file: String,
    pub features_file: String,
    pub labels_file: Option<String>,
    pub self_weights_file: String,
    pub source: SourceFiles,
}

/// Writes `cg` into `dir` under the file names recorded in `sidecar`, then
/// the sidecar itself as `sidecar.json`.
pub fn write_coarsened(dir: &Path, cg: &CoarsenedGraph, sidecar: &Sidecar) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_assignment(&dir.join(&sidecar.assignment_file), cg.coarsening())?;
    write_edge_list(
        &dir.join(&sidecar.edges_file),
        cg.adjacency().triplets().filter(|&(i, j, _)| i < j),
    )?;
    write_features(&dir.join(&sidecar.features_file), cg.features())?;
    write_lines(&dir.join(&sidecar.self_weights_file), cg.self_weights())?;
    if let (Some(f), Some(y)) = (&sidecar.labels_file, cg.labels()) {
        write_lines(&dir.join(f), y)?;
    }
    let path = dir.join("sidecar.json");
    write_json(&path, sidecar)?;
    Ok(path)
}

/// Reloads the original graph and the assignment a sidecar points at.
pub fn load_sidecar(path: &Path) -> Result<(Sidecar, Graph, CoarseningMatrix)> {
    let sidecar: Sidecar = read_json(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let g = load_graph(
        Path::new(&sidecar.source.edges),
        Path::new(&sidecar.source.features),
        sidecar.source.labels.as_deref().map(Path::new),
    )?;
    let apath = resolve(base, &sidecar.assignment_file);
    let assignment = read_assignment(&apath)?;
    if assignment.len() != g.num_nodes() {
        return Err(Error::Schema(format!(
            "{}: {} assignments for {} nodes",
            apath.display(),
            assignment.len(),
            g.num_nodes()
        )));
    }
    let c = CoarseningMatrix::from_assignment(assignment, sidecar.num_supernodes)
        .map_err(|e| Error::Schema(format!("{}: {e}", apath.display())))?;
    Ok((sidecar, g, c))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeEntry {
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels_file: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationEntry {
    pub src: String,
    pub rel: String,
    pub dst: String,
    pub edges_file: String,
}

/// Heterogeneous dataset manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeteroManifest {
    pub types: BTreeMap<String, TypeEntry>,
    pub relations: Vec<RelationEntry>,
    pub target_type: String,
}

fn resolve(base: &Path, file: &str) -> PathBuf {
    base.join(file)
}

/// Loads a manifest and every file it references, validating ids against
/// the declared type sizes.
pub fn load_hetero(manifest_path: &Path) -> Result<HeteroGraph> {
    let manifest: HeteroManifest = read_json(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    if !manifest.types.contains_key(&manifest.target_type) {
        return Err(Error::Schema(format!(
            "target type `{}` is not declared",
            manifest.target_type
        )));
    }
    let mut types = Vec::with_capacity(manifest.types.len());
    for (name, entry) in &manifest.types {
        let features = match &entry.features_file {
            Some(f) => {
                let path = resolve(base, f);
                let x = read_features(&path)?;
                if x.rows() != entry.count {
                    return Err(Error::parse(
                        &path,
                        x.rows(),
                        format!("{} rows for type `{name}` of size {}", x.rows(), entry.count),
                    ));
                }
                Some(x)
            }
            None => None,
        };
        let labels = match &entry.labels_file {
            Some(f) => {
                let path = resolve(base, f);
                let y = read_labels(&path)?;
                if y.len() != entry.count {
                    return Err(Error::parse(
                        &path,
                        y.len(),
                        format!("{} labels for type `{name}` of size {}", y.len(), entry.count),
                    ));
                }
                Some(y)
            }
            None => None,
        };
        types.push(NodeType::new(name.clone(), entry.count, features, labels));
    }
    let mut relations = Vec::with_capacity(manifest.relations.len());
    for r in &manifest.relations {
        let size = |t: &str| {
            manifest
                .types
                .get(t)
                .map(|e| e.count)
                .ok_or_else(|| Error::Schema(format!("relation references unknown type `{t}`")))
        };
        let (src_n, dst_n) = (size(&r.src)?, size(&r.dst)?);
        let path = resolve(base, &r.edges_file);
        let edges = read_edge_list(&path, Some((src_n, dst_n)))?;
        let matrix = CsrMatrix::from_triplets(src_n, dst_n, edges)?;
        relations.push(Relation::new(r.src.clone(), r.rel.clone(), r.dst.clone(), matrix));
    }
    HeteroGraph::new(types, relations, manifest.target_type)
}

/// Writes `h` in manifest form into `dir`.
pub fn write_hetero(dir: &Path, h: &HeteroGraph) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut types = BTreeMap::new();
    for t in h.types() {
        let features_file = match &t.features {
            Some(x) => {
                let f = format!("features_{}.csv", t.name);
                write_features(&dir.join(&f), x)?;
                Some(f)
            }
            None => None,
        };
        let labels_file = match &t.labels {
            Some(y) => {
                let f = format!("labels_{}.txt", t.name);
                write_lines(&dir.join(&f), y)?;
                Some(f)
            }
            None => None,
        };
        types.insert(
            t.name.clone(),
            TypeEntry {
                count: t.count,
                features_file,
                labels_file,
            },
        );
    }
    let relations = write_relations(dir, h.relations())?;
    let path = dir.join("manifest.json");
    write_json(
        &path,
        &HeteroManifest {
            types,
            relations,
            target_type: h.target_type().to_string(),
        },
    )?;
    Ok(path)
}

fn write_relations(dir: &Path, relations: &[Relation]) -> Result<Vec<RelationEntry>> {
    relations
        .iter()
        .map(|r| {
            let f = format!("edges_{}__{}__{}.tsv", r.src, r.rel, r.dst);
            write_edge_list(&dir.join(&f), r.matrix.triplets())?;
            Ok(RelationEntry {
                src: r.src.clone(),
                rel: r.rel.clone(),
                dst: r.dst.clone(),
                edges_file: f,
            })
        })
        .collect()
}

/// Writes a coarsened heterogeneous graph as a manifest (so it can be fed
/// back in) plus one assignment file per type.
pub fn write_hetero_coarsened(dir: &Path, out: &HeteroCoarsenedGraph) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut types = BTreeMap::new();
    for t in &out.types {
        write_assignment(&dir.join(format!("assignment_{}.txt", t.name)), &t.coarsening)?;
        let features_file = match &t.features {
            Some(x) => {
                let f = format!("features_{}.csv", t.name);
                write_features(&dir.join(&f), x)?;
                Some(f)
            }
            None => None,
        };
        let labels_file = match &t.labels {
            Some(y) => {
                let f = format!("labels_{}.txt", t.name);
                write_lines(&dir.join(&f), y)?;
                Some(f)
            }
            None => None,
        };
        types.insert(
            t.name.clone(),
            TypeEntry {
                count: t.coarsening.num_supernodes(),
                features_file,
                labels_file,
            },
        );
    }
    let relations = write_relations(dir, &out.relations)?;
    let path = dir.join("manifest.json");
    write_json(
        &path,
        &HeteroManifest {
            types,
            relations,
            target_type: out.target_type.clone(),
        },
    )?;
    Ok(path)
}
