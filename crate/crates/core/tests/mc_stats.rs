use mgbm::fixtures;
use mgbm::graph::{GraphPoint, VertexId};
use mgbm::mc::{ck_test, estimate_hitting_lt, estimate_resolvent, sum_disjoint, McConfig, Welford};
use mgbm::paste::build_process;
use mgbm::resolvent::{parse_function, Constant};
use proptest::prelude::*;

#[test]
fn trap_start_is_deterministic() {
    let (g, d) = fixtures::single_vertex(0.0, 0.0, 1.0);
    let spec = build_process(&g, &d).unwrap();
    let cfg = McConfig::new(100, 7.0, 1e-3, 1);
    let est = estimate_resolvent(&spec, &GraphPoint::Vertex(VertexId(0)), &Constant(1.0), 0.5, &cfg).unwrap();
    let exact = (1.0 - (-0.5f64 * 7.0).exp()) / 0.5;
    assert!((est.mean - exact).abs() < 1e-12, "{} vs {exact}", est.mean);
    assert!(est.stderr < 1e-12);
    assert!(est.truncated);
}

#[test]
fn conservative_graph_integrates_to_one_over_lambda() {
    let (g, d) = fixtures::two_vertex_conservative();
    let spec = build_process(&g, &d).unwrap();
    let cfg = McConfig::new(200, 40.0, 1e-3, 2);
    let est = estimate_resolvent(&spec, &g.point_on("i", 0.5).unwrap(), &Constant(1.0), 0.5, &cfg).unwrap();
    assert!((est.mean - 2.0).abs() <= 3.0 * est.stderr + 2.0 * (-20.0f64).exp() + 1e-9, "{est:?}");
    assert!(!est.truncated);
}

#[test]
fn starting_on_the_target_gives_one() {
    let (g, d) = fixtures::half_line();
    let spec = build_process(&g, &d).unwrap();
    let v = g.vertex_id("v").unwrap();
    let est = estimate_hitting_lt(&spec, &GraphPoint::Vertex(v), 0.5, &[v], &McConfig::new(50, 40.0, 1e-3, 3)).unwrap();
    assert_eq!(est[0].1.mean, 1.0);
    assert_eq!(est[0].1.stderr, 0.0);
}

#[test]
fn interval_hitting_weights() {
    let (g, d) = fixtures::interval(1.0);
    let spec = build_process(&g, &d).unwrap();
    let cfg = McConfig::new(50_000, 40.0, 1e-4, 4);
    let est = estimate_hitting_lt(&spec, &g.point_on("i", 0.5).unwrap(), 0.5, &[VertexId(0), VertexId(1)], &cfg).unwrap();
    let reference = 0.5f64.sinh() / 1.0f64.sinh();
    for (_, e) in &est {
        assert!(e.z(reference).abs() <= 3.0, "{e:?}");
    }
    let total = sum_disjoint(&est[0].1, &est[1].1);
    assert!(total.z(2.0 * reference).abs() <= 3.0, "{total:?}");
    // the total varies far less than either part
    assert!(total.stderr < 0.5 * est[0].1.stderr);
}

#[test]
fn stderr_scales_as_inverse_root_n() {
    let (g, d) = fixtures::half_line();
    let spec = build_process(&g, &d).unwrap();
    let v = g.vertex_id("v").unwrap();
    let start = g.point_on("e", 1.0).unwrap();
    let se = |n: u64| {
        estimate_hitting_lt(&spec, &start, 0.5, &[v], &McConfig::new(n, 40.0, 1e-3, n)).unwrap()[0].1.stderr
    };
    let ratio = se(5_000) / se(20_000);
    assert!((ratio - 2.0).abs() <= 0.4, "ratio {ratio}");
}

#[test]
fn resolvent_estimates_are_independent_of_workers() {
    let (g, d) = fixtures::two_vertex();
    let spec = build_process(&g, &d).unwrap();
    let f = parse_function(&g, "bump:i@0.3:0.6").unwrap();
    let start = g.point_on("i", 0.3).unwrap();
    let runs: Vec<_> = [1, 2, 5]
        .into_iter()
        .map(|w| {
            let cfg = McConfig::new(2_000, 40.0, 1e-3, 9).with_workers(w);
            estimate_resolvent(&spec, &start, &f, 0.5, &cfg).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn semigroup_test_passes_on_the_reflecting_interval() {
    let (g, d) = fixtures::interval(1.0);
    let spec = build_process(&g, &d).unwrap();
    let cfg = McConfig::new(20_000, 60.0, 1e-3, 10);
    // the smallest λ approximates plain hitting probabilities
    let report = ck_test(&spec, &spec, VertexId(0), &[1e-6, 0.5, 2.0], &cfg).unwrap();
    assert!(report.max_abs_z() <= 3.0, "{:?}", report.rows);
    let back = report.rows.iter().find(|r| r.lambda == 1e-6 && r.target == "v1").unwrap();
    assert!((back.two_step - 1.0).abs() < 1e-3 && (back.composed - 1.0).abs() < 1e-3, "{back:?}");
}

proptest! {
    #[test]
    fn merging_any_partition_reproduces_the_whole(
        xs in proptest::collection::vec(-5.0f64..5.0, 2..300),
        cuts in proptest::collection::vec(0usize..300, 0..6),
    ) {
        let mut whole = Welford::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut bounds: Vec<usize> = cuts.into_iter().map(|c| c % xs.len()).collect();
        bounds.push(0);
        bounds.push(xs.len());
        bounds.sort_unstable();
        let mut merged = Welford::default();
        for w in bounds.windows(2) {
            let mut part = Welford::default();
            xs[w[0]..w[1]].iter().for_each(|&x| part.push(x));
            merged.merge(&part);
        }
        let scale = whole.mean.abs().max(1.0);
        prop_assert_eq!(merged.n, whole.n);
        prop_assert!((merged.mean - whole.mean).abs() <= 1e-12 * scale);
        prop_assert!((merged.stderr() - whole.stderr()).abs() <= 1e-12 * whole.stderr().max(1e-300) + 1e-15);
    }
}
