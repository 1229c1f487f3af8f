use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Result;
use hashcoarsen::bench::{compare_adaptive, loglog_slope, ScalingPoint};
use hashcoarsen::coarsen::coarsen_graph;
use hashcoarsen::hetero::{self, HeteroConfig};
use hashcoarsen::io::{self, Sidecar, SourceFiles};
use hashcoarsen::spectral::{spectral_report, EigenOptions, MetricOptions, SpectralReport};
use hashcoarsen::synth::random_geometric;
use hashcoarsen::theory::{
    proximity_curve, validate_load_balance, validate_projection_variance, validate_proximity, validate_separation,
    BoundCheck,
};
use hashcoarsen::timing::{Phase, PhaseTimer};
use hashcoarsen::{AdaptiveCoarsener, CoarsenConfig, Error};
use serde_json::json;

use crate::{BenchArgs, CoarsenArgs, EigenArgs, HashArgs, HeteroArgs, MetricsArgs, TheoryArgs};

/// Fractions in (0, 1], strictly descending. Values above 1 are percents.
pub fn parse_ratios(raw: &[String]) -> Result<Vec<f64>, Error> {
    let mut out: Vec<f64> = Vec::with_capacity(raw.len());
    for s in raw {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParams(format!("invalid ratio `{s}`")))?;
        let r = if v > 1.0 { v / 100.0 } else { v };
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidRatio(v));
        }
        if let Some(&prev) = out.last() {
            if r >= prev {
                return Err(Error::InvalidParams(format!(
                    "ratios must be strictly descending, {r} follows {prev}"
                )));
            }
        }
        out.push(r);
    }
    if out.is_empty() {
        return Err(Error::InvalidParams("no ratios given".into()));
    }
    Ok(out)
}

fn ratio_dir(out: &Path, r: f64) -> PathBuf {
    out.join(format!("ratio_{r}"))
}

fn absolute(p: &Path) -> Result<String, Error> {
    fs::canonicalize(p)
        .map(|p| p.to_string_lossy().into_owned())
        .map_err(|e| Error::io(p, e))
}

fn create_dir(p: &Path) -> Result<(), Error> {
    fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}

fn write_text(p: &Path, text: &str) -> Result<(), Error> {
    fs::write(p, text).map_err(|e| Error::io(p, e))
}

fn config(hash: &HashArgs, standardize: bool) -> Result<CoarsenConfig, Error> {
    if hash.projectors == 0 {
        return Err(Error::InvalidParams("--projectors must be at least 1".into()));
    }
    Ok(CoarsenConfig {
        alpha: hash.alpha,
        projectors: hash.projectors,
        seed: hash.seed,
        aggregate: hash.aggregate,
        standardize,
    })
}

fn metric_options(e: &EigenArgs) -> Result<MetricOptions, Error> {
    if e.ree_k == 0 {
        return Err(Error::InvalidParams("--ree-k must be at least 1".into()));
    }
    Ok(MetricOptions {
        k: e.ree_k,
        end: e.ree_end,
        lift: e.lift,
        eigen: EigenOptions {
            dense_limit: e.dense_eig_limit,
            iterative: e.iterative,
        },
    })
}

fn metrics_csv(reports: &[SpectralReport]) -> String {
    let mut s = String::from("ratio,ree,he,rce_raw,rce_log10,k,skipped\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.ratio, r.ree, r.he, r.rce_raw, r.rce_log10, r.k_used, r.skipped_eigenvalues
        );
    }
    s
}

pub fn coarsen(a: &CoarsenArgs) -> Result<u8> {
    let ratios = parse_ratios(&a.ratios)?;
    let cfg = config(&a.hash, a.standardize)?;
    let metric_opts = a.emit_metrics.then(|| metric_options(&a.eigen)).transpose()?;
    let mut timer = PhaseTimer::default();
    let g = timer.time(Phase::Load, None, || {
        io::load_graph(&a.edges, &a.features, a.labels.as_deref())
    })?;
    let source = SourceFiles {
        edges: absolute(&a.edges)?,
        features: absolute(&a.features)?,
        labels: a.labels.as_deref().map(absolute).transpose()?,
    };
    let min_ratio = *ratios.last().expect("nonempty");
    let coarsener = AdaptiveCoarsener::new_timed(&g, &cfg, min_ratio, &mut timer)?;
    create_dir(&a.out)?;
    let mut reports = Vec::new();
    for &r in &ratios {
        let c = timer.time(Phase::PerRatioExtract, Some(r), || coarsener.partition(r))?;
        let cg = timer.time(Phase::Coarsen, Some(r), || coarsen_graph(&g, &c))?;
        let sidecar = Sidecar {
            ratio: r,
            num_nodes: g.num_nodes(),
            num_supernodes: cg.num_supernodes(),
            seed: cfg.seed,
            alpha: coarsener.alpha(),
            projectors: cfg.projectors,
            aggregate: cfg.aggregate,
            assignment_file: "assignment.txt".into(),
            edges_file: "edges.tsv".into(),
            features_file: "features.csv".into(),
            labels_file: cg.labels().map(|_| "labels.txt".into()),
            self_weights_file: "self_weights.txt".into(),
            source: source.clone(),
        };
        let dir = ratio_dir(&a.out, r);
        io::write_coarsened(&dir, &cg, &sidecar)?;
        if let Some(opts) = metric_opts {
            let mut report = timer.time(Phase::Metrics, Some(r), || spectral_report(&g, &cg, opts))?;
            report.ratio = r;
            io::write_json(&dir.join("metrics.json"), &report)?;
            reports.push(report);
        }
        println!("ratio {r}: {} supernodes -> {}", cg.num_supernodes(), dir.display());
    }
    if !reports.is_empty() {
        write_text(&a.out.join("metrics.csv"), &metrics_csv(&reports))?;
    }
    write_text(&a.out.join("timing.csv"), &timer.to_csv())?;
    Ok(0)
}

fn parse_type_ratios(raw: &[String]) -> Result<BTreeMap<String, f64>, Error> {
    raw.iter()
        .map(|s| {
            let (name, v) = s
                .split_once('=')
                .ok_or_else(|| Error::InvalidParams(format!("expected `name=ratio`, got `{s}`")))?;
            let r = parse_ratios(&[v.to_string()])?[0];
            Ok((name.to_string(), r))
        })
        .collect()
}

pub fn coarsen_hetero(a: &HeteroArgs) -> Result<u8> {
    let ratios = parse_ratios(&a.ratios)?;
    let type_ratios = parse_type_ratios(&a.type_ratios)?;
    config(&a.hash, false)?;
    let h = io::load_hetero(&a.manifest)?;
    for name in type_ratios.keys() {
        h.type_index(name)?;
    }
    let cfg = HeteroConfig {
        projectors: a.hash.projectors,
        seed: a.hash.seed,
        aggregate: a.hash.aggregate,
        alpha: a.hash.alpha,
        type_ratios,
    };
    let manifest = absolute(&a.manifest)?;
    create_dir(&a.out)?;
    for &eta in &ratios {
        let out = hetero::coarsen_hetero(&h, eta, &cfg)?;
        let dir = ratio_dir(&a.out, eta);
        io::write_hetero_coarsened(&dir, &out)?;
        let purity = out.purity();
        let mut relations = BTreeMap::new();
        for (orig, coarse) in h.relations().iter().zip(&out.relations) {
            relations.insert(
                format!("{}__{}__{}", orig.src, orig.rel, orig.dst),
                json!({ "original_weight": orig.matrix.sum(), "coarsened_weight": coarse.matrix.sum() }),
            );
        }
        let mut types = BTreeMap::new();
        for t in &out.types {
            types.insert(
                t.name.clone(),
                json!({
                    "alpha": t.alpha,
                    "ratio": t.ratio,
                    "num_nodes": t.coarsening.num_nodes(),
                    "num_supernodes": t.coarsening.num_supernodes(),
                    "source": t.source,
                    "assignment_file": format!("assignment_{}.txt", t.name),
                }),
            );
        }
        io::write_json(
            &dir.join("purity.json"),
            &json!({
                "purity": purity,
                "num_supernodes": out.types.iter().map(|t| t.coarsening.num_supernodes()).sum::<usize>(),
                "relations": relations,
            }),
        )?;
        io::write_json(
            &dir.join("sidecar.json"),
            &json!({
                "ratio": eta,
                "seed": cfg.seed,
                "projectors": cfg.projectors,
                "aggregate": cfg.aggregate,
                "manifest": manifest,
                "coarsened_manifest": "manifest.json",
                "target_type": out.target_type,
                "types": types,
            }),
        )?;
        println!("ratio {eta}: purity {:.2}% -> {}", 100.0 * purity, dir.display());
    }
    Ok(0)
}

pub fn metrics(a: &MetricsArgs) -> Result<u8> {
    let opts = metric_options(&a.eigen)?;
    let mut reports = Vec::with_capacity(a.sidecars.len());
    for path in &a.sidecars {
        let (sidecar, g, c) = io::load_sidecar(path)?;
        let cg = coarsen_graph(&g, &c)?;
        let mut report = spectral_report(&g, &cg, opts)?;
        report.ratio = sidecar.ratio;
        reports.push(report);
    }
    let text = if reports.len() == 1 {
        io::to_stable_json(&reports[0])?
    } else {
        io::to_stable_json(&reports)?
    };
    match &a.out {
        Some(p) => write_text(p, &text)?,
        None => print!("{text}"),
    }
    if let Some(p) = &a.csv {
        write_text(p, &metrics_csv(&reports))?;
    }
    Ok(0)
}

pub fn validate_theory(a: &TheoryArgs) -> Result<u8> {
    if a.trials == 0 || a.lb_trials == 0 {
        return Err(Error::InvalidParams("trial counts must be positive".into()).into());
    }
    let near = a.projectors.unwrap_or(4);
    let sep = a.projectors.unwrap_or(16);
    let origin = [0.0, 0.0, 0.0];
    let unit = [1.0, 0.0, 0.0];
    let eps = 2.0 * 2f64.sqrt();
    let checks: Vec<BoundCheck> = vec![
        validate_load_balance(a.lb_nodes, a.lb_supernodes, a.lb_c, a.lb_trials, a.seed)?,
        validate_proximity(&origin, &unit, near, eps, a.trials, a.seed)?,
        validate_projection_variance(&origin, &unit, near, a.trials, a.seed)?,
        validate_separation(&origin, &[0.1, 0.0, 0.0], &[0.0, 1.0, 0.0], sep, a.trials, a.seed)?,
    ];
    let grid: Vec<f64> = (1..=40).map(|i| i as f64 * 0.25).collect();
    let curve = proximity_curve(&origin, &unit, near, &grid, a.trials, a.seed)?;
    let mut csv = String::from("eps,empirical,analytic\n");
    for p in &curve {
        let _ = writeln!(csv, "{},{},{}", p.eps, p.empirical, p.analytic);
    }
    let json = io::to_stable_json(&checks)?;
    match &a.out {
        Some(dir) => {
            create_dir(dir)?;
            io::write_json(&dir.join("checks.json"), &checks)?;
            write_text(&dir.join("proximity_curve.csv"), &csv)?;
        }
        None => print!("{json}"),
    }
    for c in &checks {
        eprintln!("{}: {}", c.name, if c.pass { "pass" } else { "FAIL" });
    }
    Ok(if checks.iter().all(|c| c.pass) { 0 } else { 1 })
}

pub fn bench(a: &BenchArgs) -> Result<u8> {
    let ratios = parse_ratios(&a.ratios)?;
    let cfg = config(&a.hash, false)?;
    if a.sizes.is_empty() || a.sizes.contains(&0) {
        return Err(Error::InvalidParams("--sizes must be positive".into()).into());
    }
    let mut csv = String::from("num_nodes,num_edges,num_ratios,adaptive_s,naive_s,speedup\n");
    let mut points = Vec::new();
    for &n in &a.sizes {
        let g = random_geometric(n, a.avg_degree, a.feature_dim, cfg.seed);
        let r = compare_adaptive(&g, &cfg, &ratios, a.repeats)?;
        let _ = writeln!(
            csv,
            "{},{},{},{:.6},{:.6},{:.3}",
            n,
            g.edge_count(),
            r.num_ratios,
            r.adaptive_s,
            r.naive_s,
            r.speedup
        );
        points.push(ScalingPoint {
            num_nodes: n,
            num_edges: g.edge_count(),
            seconds: r.adaptive_s,
        });
    }
    match &a.out {
        Some(p) => write_text(p, &csv)?,
        None => print!("{csv}"),
    }
    if points.len() >= 2 {
        eprintln!("log-log slope of adaptive time: {:.3}", loglog_slope(&points)?);
    }
    Ok(0)
}
