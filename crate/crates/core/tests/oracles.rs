mod common;

use approx::assert_abs_diff_eq;
use common::*;
use hashcoarsen::graph::build_laplacian;
use hashcoarsen::hetero::{coarsen_hetero, HeteroConfig};
use hashcoarsen::lsh::{project_scores, sample_projections};
use hashcoarsen::schedule::build_schedule;
use hashcoarsen::spectral::{
    eigenvalues, eigenvalues_smallest, hyperbolic_error, reconstruction_error, spectral_report, EigenOptions, LiftNorm,
    LiftedLaplacian, MetricOptions, SpectrumEnd,
};
use hashcoarsen::synth::{hetero_bibliographic, random_graph};
use hashcoarsen::theory::{load_balance_bound, proximity_probability};
use hashcoarsen::{build_order, coarsen_graph, CoarseningMatrix, DenseMatrix, Graph};

fn p3() -> Graph {
    let x = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 1.0]]).unwrap();
    Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)], x, None).unwrap()
}

fn p3_partition() -> CoarseningMatrix {
    CoarseningMatrix::from_assignment(vec![0, 0, 1], 2).unwrap()
}

#[test]
fn scores_match_dense_concatenation() {
    for seed in 0..20 {
        let g = weighted_graph(25, 0.2, 4, seed);
        let alpha = (seed as f64) / 19.0;
        let p = sample_projections(4 + 25, 10, seed).unwrap();
        let got = project_scores(&g, alpha, &p).unwrap();
        let want = dense_scores(&g, alpha, &p);
        for (a, b) in got.scores.iter().zip(&want) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }
}

#[test]
fn coarse_adjacency_matches_ctac() {
    for seed in 0..20 {
        let g = weighted_graph(30, 0.25, 2, seed);
        let p = sample_projections(32, 10, seed).unwrap();
        let order = build_order(&project_scores(&g, 0.5, &p).unwrap());
        let schedule = build_schedule(order, 0.2, seed).unwrap();
        for r in [0.8, 0.5, 0.2] {
            let c = schedule.partition_at_ratio(r).unwrap();
            let cg = coarsen_graph(&g, &c).unwrap();
            let dc = dense_c(&c);
            let ctac = matmul(&matmul(&transpose(&dc), &dense_adjacency(&g)), &dc);
            for u in 0..c.num_supernodes() {
                for v in 0..c.num_supernodes() {
                    let got = cg.adjacency().get(u, v);
                    if u == v {
                        assert_eq!(got, 0.0);
                        assert_abs_diff_eq!(2.0 * cg.self_weights()[u], ctac[u][u], epsilon = 1e-12);
                    } else {
                        assert_abs_diff_eq!(got, ctac[u][v], epsilon = 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn coarse_features_are_member_means() {
    let g = weighted_graph(20, 0.3, 3, 4);
    let c = CoarseningMatrix::from_assignment((0..20).map(|i| i % 6).collect(), 6).unwrap();
    let cg = coarsen_graph(&g, &c).unwrap();
    for u in 0..6 {
        let members: Vec<usize> = (0..20).filter(|i| i % 6 == u).collect();
        for k in 0..3 {
            let mean = members.iter().map(|&i| g.features().get(i, k)).sum::<f64>() / members.len() as f64;
            assert_abs_diff_eq!(cg.features().get(u, k), mean, epsilon = 1e-14);
        }
    }
}

#[test]
fn hetero_relations_match_dense_products() {
    for seed in 0..10 {
        let h = hetero_bibliographic(12, 20, 9, seed);
        let out = coarsen_hetero(
            &h,
            0.4,
            &HeteroConfig {
                seed,
                ..Default::default()
            },
        )
        .unwrap();
        for (orig, coarse) in h.relations().iter().zip(&out.relations) {
            let cs = dense_c(&out.coarsened_type(&orig.src).unwrap().coarsening);
            let cd = dense_c(&out.coarsened_type(&orig.dst).unwrap().coarsening);
            let a = orig.matrix.to_dense();
            let a: Dense = (0..a.nrows())
                .map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect())
                .collect();
            let want = matmul(&matmul(&transpose(&cs), &a), &cd);
            for (u, row) in want.iter().enumerate() {
                for (v, &w) in row.iter().enumerate() {
                    assert_abs_diff_eq!(coarse.matrix.get(u, v), w, epsilon = 1e-12);
                }
            }
        }
    }
}

#[test]
fn spectra_match_jacobi() {
    for seed in 0..5 {
        let g = weighted_graph(50, 0.1, 1, seed);
        let l = build_laplacian(&g);
        let want = jacobi_eigenvalues(&laplacian(&dense_adjacency(&g)));
        let low = eigenvalues_smallest(&l, 10, EigenOptions::default()).unwrap();
        for (a, b) in low.iter().zip(&want) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
        let high = eigenvalues(&l, 5, SpectrumEnd::High, EigenOptions::default()).unwrap();
        for (a, b) in high.iter().zip(want.iter().rev()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }
}

#[test]
fn iterative_spectrum_matches_jacobi() {
    let g = weighted_graph(60, 0.08, 1, 3);
    let l = build_laplacian(&g);
    let want = jacobi_eigenvalues(&laplacian(&dense_adjacency(&g)));
    let opts = EigenOptions {
        dense_limit: 10,
        iterative: true,
    };
    let got = eigenvalues_smallest(&l, 6, opts).unwrap();
    for (a, b) in got.iter().zip(&want) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-8);
    }
}

#[test]
fn fixture_spectra() {
    let l = build_laplacian(&p3());
    let ev = eigenvalues_smallest(&l, 3, EigenOptions::default()).unwrap();
    for (a, b) in ev.iter().zip([0.0, 1.0, 3.0]) {
        assert_abs_diff_eq!(*a, b, epsilon = 1e-8);
    }
    let k4 = Graph::from_edges(
        4,
        (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j, 1.0))),
        DenseMatrix::zeros(4, 1),
        None,
    )
    .unwrap();
    let ev = eigenvalues_smallest(&build_laplacian(&k4), 4, EigenOptions::default()).unwrap();
    for (a, b) in ev.iter().zip([0.0, 4.0, 4.0, 4.0]) {
        assert_abs_diff_eq!(*a, b, epsilon = 1e-8);
    }
}

#[test]
fn p3_metrics_match_frozen_constants() {
    // Evaluated independently in double precision from the dense definitions.
    let g = p3();
    let cg = coarsen_graph(&g, &p3_partition()).unwrap();
    let l = build_laplacian(&g);
    let binary = LiftedLaplacian::from_coarsened(&cg, LiftNorm::Binary);
    let normalized = LiftedLaplacian::from_coarsened(&cg, LiftNorm::Normalized);
    assert_abs_diff_eq!(
        hyperbolic_error(&l, &binary, g.features()).unwrap(),
        1.9826969446812033,
        epsilon = 1e-12
    );
    assert_abs_diff_eq!(
        hyperbolic_error(&l, &normalized, g.features()).unwrap(),
        1.8143450515964108,
        epsilon = 1e-12
    );
    assert_abs_diff_eq!(reconstruction_error(&l, &binary).unwrap().raw, 11.0, epsilon = 1e-12);
    assert_abs_diff_eq!(
        reconstruction_error(&l, &normalized).unwrap().raw,
        7.75,
        epsilon = 1e-12
    );
    let report = spectral_report(&g, &cg, MetricOptions::default()).unwrap();
    assert_eq!((report.k_used, report.skipped_eigenvalues), (1, 1));
    assert_abs_diff_eq!(report.ree, 1.0, epsilon = 1e-12);
}

#[test]
fn lifted_laplacian_matches_dense_product() {
    let g = weighted_graph(15, 0.3, 2, 8);
    let c = CoarseningMatrix::from_assignment((0..15).map(|i| i / 4).collect(), 4).unwrap();
    let cg = coarsen_graph(&g, &c).unwrap();
    let dc = dense_c(&c);
    let lc = laplacian(&matmul(&matmul(&transpose(&dc), &dense_adjacency(&g)), &dc));
    let want = matmul(&matmul(&dc, &lc), &transpose(&dc));
    let lift = LiftedLaplacian::from_coarsened(&cg, LiftNorm::Binary).to_dense();
    for i in 0..15 {
        for j in 0..15 {
            assert_abs_diff_eq!(lift[(i, j)], want[i][j], epsilon = 1e-12);
        }
    }
    let l = laplacian(&dense_adjacency(&g));
    let rce: f64 = (0..15)
        .flat_map(|i| (0..15).map(move |j| (i, j)))
        .map(|(i, j)| (l[i][j] - want[i][j]).powi(2))
        .sum();
    let got = reconstruction_error(
        &build_laplacian(&g),
        &LiftedLaplacian::from_coarsened(&cg, LiftNorm::Binary),
    )
    .unwrap();
    assert_abs_diff_eq!(got.raw, rce, epsilon = 1e-9);
}

#[test]
fn rce_against_zero_lift_is_laplacian_norm() {
    let g = p3();
    let c = CoarseningMatrix::from_assignment(vec![0, 0, 0], 1).unwrap();
    let cg = coarsen_graph(&g, &c).unwrap();
    let lift = LiftedLaplacian::from_coarsened(&cg, LiftNorm::Binary);
    // ‖L‖²_F of P3: diagonal 1 + 4 + 1, four off-diagonal −1 entries.
    assert_eq!(reconstruction_error(&build_laplacian(&g), &lift).unwrap().raw, 10.0);
}

/// Maclaurin series `erf(x) = 2/√π Σ (−1)^n x^(2n+1) / (n! (2n+1))`.
fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    for n in 1..60 {
        term *= -x * x / n as f64;
        sum += term / (2 * n + 1) as f64;
    }
    2.0 / std::f64::consts::PI.sqrt() * sum
}

#[test]
fn proximity_law_at_unit_argument() {
    let p = proximity_probability(2.0 * 2f64.sqrt(), 4, 1.0).unwrap();
    assert_abs_diff_eq!(p, erf_series(1.0), epsilon = 1e-14);
    assert_abs_diff_eq!(p, 0.8427007929, epsilon = 1e-10);
}

#[test]
fn load_bound_value() {
    let want = 100.0 + 100.0 * (100f64.ln() + 3.0);
    assert_abs_diff_eq!(load_balance_bound(10_000, 100, 3.0).unwrap(), want, epsilon = 1e-9);
    assert_abs_diff_eq!(want, 860.517, epsilon = 1e-3);
}

#[test]
fn identity_partition_has_zero_error() {
    for seed in 0..5 {
        let g = random_graph(25, 0.3, 3, 3, seed);
        let cg = coarsen_graph(&g, &CoarseningMatrix::identity(25)).unwrap();
        let r = spectral_report(&g, &cg, MetricOptions::default()).unwrap();
        assert!(r.ree.abs() <= 1e-9 && r.he.abs() <= 1e-9 && r.rce_raw == 0.0, "{r:?}");
        assert_eq!(r.rce_log10, f64::NEG_INFINITY);
    }
}
