//! Resolvent solver against a finite-difference oracle, plus property
//! tests.

use mgbm::fixtures;
use mgbm::graph::{expand_tadpoles, End, GraphPoint, MetricGraph};
use mgbm::mc::{estimate_resolvent, McConfig};
use mgbm::paste::build_process;
use mgbm::resolvent::{
    check_domain, dirichlet_kernel, parse_function, solve_resolvent, Constant, ExpandedFunction, FromFn,
    GraphFunction,
};
use mgbm::wentzell::{VertexData, WentzellData};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Solves `-lo u[k-1] + d u[k] - up u[k+1] = r[k]` for the interior nodes
/// with the given boundary values.
fn thomas(d: f64, off: f64, r: &[f64], left: f64, right: f64) -> Vec<f64> {
    let n = r.len();
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    for k in 0..n {
        let mut rhs = r[k];
        if k == 0 {
            rhs += off * left;
        }
        if k == n - 1 {
            rhs += off * right;
        }
        let denom = if k == 0 { d } else { d + off * c[k - 1] };
        c[k] = -off / denom;
        y[k] = if k == 0 { rhs / d } else { (rhs + off * y[k - 1]) / denom };
    }
    let mut u = vec![0.0; n];
    for k in (0..n).rev() {
        u[k] = y[k] - if k + 1 < n { c[k] * u[k + 1] } else { 0.0 };
    }
    let mut full = vec![left];
    full.extend(u);
    full.push(right);
    full
}

/// Second-order finite differences: on each edge `u = φ + U_from ψ_from +
/// U_to ψ_to` from three tridiagonal solves, then the vertex conditions give
/// a small dense system for the vertex values. External edges are cut at
/// `cut` with `u = 0` there.
struct FdSolution {
    /// Per edge: grid step and nodal values.
    edges: Vec<(f64, Vec<f64>)>,
}

impl FdSolution {
    fn solve(g: &MetricGraph, data: &WentzellData, f: &dyn Fn(&GraphPoint) -> f64, lambda: f64, n: usize, cut: f64) -> Self {
        let nv = g.vertex_count();
        // per edge: (dx, φ, ψ at start vertex, ψ at end vertex, endpoints)
        let mut parts = Vec::new();
        for e in g.edge_ids() {
            let edge = g.edge(e);
            let len = edge.length().unwrap_or(cut);
            let m = if edge.is_internal() { n } else { (n as f64 * cut / 2.0) as usize };
            let dx = len / m as f64;
            let d = 2.0 * lambda + 2.0 / (dx * dx);
            let off = 1.0 / (dx * dx);
            let rhs: Vec<f64> = (1..m)
                .map(|k| {
                    let p = g.point(e, k as f64 * dx).unwrap();
                    2.0 * f(&p)
                })
                .collect();
            let zero = vec![0.0; m - 1];
            let phi = thomas(d, off, &rhs, 0.0, 0.0);
            let psi_start = thomas(d, off, &zero, 1.0, 0.0);
            let psi_end = thomas(d, off, &zero, 0.0, 1.0);
            parts.push((dx, phi, psi_start, psi_end, edge.vertex_at(End::Start), edge.is_internal().then(|| edge.vertex_at(End::Finish))));
        }
        let slope = |u: &[f64], dx: f64, end: End| match end {
            End::Start => (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx),
            End::Finish => {
                let k = u.len() - 1;
                (-3.0 * u[k] + 4.0 * u[k - 1] - u[k - 2]) / (2.0 * dx)
            }
        };
        let mut m = DMatrix::<f64>::zeros(nv, nv);
        let mut r = DVector::<f64>::zeros(nv);
        for v in g.vertices() {
            let vd = data.vertex(v);
            m[(v.0, v.0)] += vd.a + vd.c * lambda;
            r[v.0] += vd.c * f(&GraphPoint::Vertex(v));
            for (inc, b) in g.incidences(v).iter().zip(&vd.b) {
                let (dx, phi, ps, pe, from, to) = &parts[inc.edge.0];
                r[v.0] += b * slope(phi, *dx, inc.end);
                m[(v.0, from.0)] -= b * slope(ps, *dx, inc.end);
                if let Some(to) = to {
                    m[(v.0, to.0)] -= b * slope(pe, *dx, inc.end);
                }
            }
        }
        let uv = m.lu().solve(&r).expect("nonsingular vertex system");
        let edges = parts
            .into_iter()
            .map(|(dx, phi, ps, pe, from, to)| {
                let u = (0..phi.len())
                    .map(|k| phi[k] + uv[from.0] * ps[k] + to.map_or(0.0, |t| uv[t.0] * pe[k]))
                    .collect();
                (dx, u)
            })
            .collect();
        Self { edges }
    }
}

fn compare_with_fd(g: &MetricGraph, data: &WentzellData, fid: &str, lambda: f64, tol: f64) {
    let f = parse_function(g, fid).unwrap();
    let sol = solve_resolvent(g, data, &f, lambda).unwrap();
    let fd = FdSolution::solve(g, data, &|p| f.value(p), lambda, 2000, 40.0);
    let mut worst: f64 = 0.0;
    for e in g.edge_ids() {
        let (dx, u) = &fd.edges[e.0];
        let len = g.edge(e).length().unwrap_or(4.0);
        let step = (u.len() / 40).max(1);
        for k in (0..u.len()).step_by(step) {
            let x = k as f64 * dx;
            if x > len {
                break;
            }
            let exact = sol.value(&g.point(e, x).unwrap());
            worst = worst.max((exact - u[k]).abs());
        }
    }
    assert!(worst <= tol, "{fid} at λ={lambda}: max deviation {worst:e}");
}

#[test]
fn two_vertex_model_matches_finite_differences() {
    let (g, d) = fixtures::two_vertex();
    compare_with_fd(&g, &d, "bump:i@0.3:0.6", 0.5, 2e-6);
    compare_with_fd(&g, &d, "plateau:v2:0.3:0.4", 2.0, 2e-6);
    compare_with_fd(&g, &d, "const:1", 0.25, 2e-6);
}

#[test]
fn joined_graph_matches_finite_differences() {
    let j = fixtures::joined();
    let g = &j.graph;
    let data = WentzellData::from_vertex_data(
        g,
        g.vertices()
            .map(|v| {
                let deg = g.degree(v);
                let (a, c) = if v.0 % 2 == 0 { (0.1, 0.2) } else { (0.0, 0.05) };
                let b = (0..deg).map(|k| (1.0 - a - c) * (k + 1) as f64 / (deg * (deg + 1) / 2) as f64).collect();
                VertexData { a, b, c }
            })
            .collect(),
    )
    .unwrap();
    compare_with_fd(g, &data, "bump:v2:1.5", 0.5, 5e-6);
}

#[test]
fn elastic_interval_agrees_with_monte_carlo() {
    let g = MetricGraph::builder("interval")
        .vertex("v1")
        .vertex("v2")
        .internal("i", "v1", "v2", 1.0)
        .build()
        .unwrap();
    let data = WentzellData::from_vertex_data(
        &g,
        vec![VertexData { a: 0.5, b: vec![0.5], c: 0.0 }, VertexData { a: 0.5, b: vec![0.5], c: 0.0 }],
    )
    .unwrap();
    let sol = solve_resolvent(&g, &data, Constant(1.0), 0.5).unwrap();
    let mid = g.point_on("i", 0.5).unwrap();
    let spec = build_process(&g, &data).unwrap();
    let cfg = McConfig::new(20_000, 40.0, 1e-3, 5);
    let est = estimate_resolvent(&spec, &mid, &Constant(1.0), 0.5, &cfg).unwrap();
    let reference = sol.value(&mid);
    assert!(est.z(reference).abs() <= 3.0, "{est:?} vs {reference}");
}

#[test]
fn trap_vertex_condition_is_the_equation_itself() {
    let g = fixtures::two_vertex_graph();
    let d = fixtures::two_vertex_data(&g, [0.1, 0.4, 0.4, 0.1], [0.0, 0.0, 0.0, 1.0]);
    let f = parse_function(&g, "bump:i@0.8:0.5").unwrap();
    let sol = solve_resolvent(&g, &d, &f, 1.5).unwrap();
    let v2 = g.vertex_id("v2").unwrap();
    // λu = f at an absorbing vertex
    assert!((1.5 * sol.vertex_values[v2.0] - f.value(&GraphPoint::Vertex(v2))).abs() < 1e-12);
    assert!(check_domain(&sol, &d, &f, 1.5).max_residual() < 1e-10);
}

fn normalised(raw: &[f64]) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kernel_is_symmetric(lambda in 0.01f64..20.0, u in 0.0f64..1.0, w in 0.0f64..1.0, ext in any::<bool>()) {
        let (g, _) = fixtures::two_vertex();
        let (e, len) = if ext { (g.edge_id("e1").unwrap(), 5.0) } else { (g.edge_id("i").unwrap(), 1.0) };
        let (x, y) = (u * len, w * len);
        let k1 = dirichlet_kernel(&g, e, lambda, x, y);
        let k2 = dirichlet_kernel(&g, e, lambda, y, x);
        prop_assert!((k1 - k2).abs() <= 1e-12 * k1.abs().max(1.0));
    }

    #[test]
    fn no_killing_conserves_mass(
        raw in proptest::collection::vec(0.01f64..1.0, 20),
        lambda in 0.05f64..10.0,
        x in 0.0f64..1.0,
    ) {
        let j = fixtures::joined();
        let g = &j.graph;
        let mut it = raw.iter().cycle();
        let data = WentzellData::from_vertex_data(
            g,
            g.vertices()
                .map(|v| {
                    let w: Vec<f64> = (0..=g.degree(v)).map(|_| *it.next().unwrap()).collect();
                    let w = normalised(&w);
                    VertexData { a: 0.0, c: w[0], b: w[1..].to_vec() }
                })
                .collect(),
        )
        .unwrap();
        let sol = solve_resolvent(g, &data, Constant(1.0), lambda).unwrap();
        for e in g.edge_ids() {
            let len = g.edge(e).length().unwrap_or(3.0);
            let u = sol.value(&g.point(e, x * len).unwrap());
            prop_assert!((lambda * u - 1.0).abs() <= 1e-8, "λu = {}", lambda * u);
        }
    }

    #[test]
    fn tadpole_solve_matches_its_expansion(
        raw in proptest::collection::vec(0.01f64..1.0, 5),
        lambda in 0.1f64..5.0,
    ) {
        let w = normalised(&raw);
        // keep a < 1 by construction: w[0] ≤ 1 − 4·0.01/Σ
        let g = MetricGraph::builder("tadpole")
            .vertex("v")
            .tadpole("t", "v", 2.0)
            .external("e", "v")
            .build_with_tadpoles()
            .unwrap();
        let spec = mgbm::wentzell::WentzellSpec::new()
            .vertex("v", w[0], w[4])
            .b_end("v", "t", End::Start, w[1])
            .b_end("v", "t", End::Finish, w[2])
            .b("v", "e", w[3]);
        let data = WentzellData::from_spec(&spec, &g).unwrap();
        let f = parse_function(&g, "bump:t@0.6:0.9").unwrap();
        let direct = solve_resolvent(&g, &data, &f, lambda).unwrap();
        let exp = expand_tadpoles(&g, &data).unwrap();
        let ef = ExpandedFunction { expansion: &exp, f: &f };
        let expanded = solve_resolvent(&exp.graph, &exp.data, &ef, lambda).unwrap();
        for k in 0..=20 {
            for (edge, len) in [("t", 2.0), ("e", 3.0)] {
                let p = g.point_on(edge, len * k as f64 / 20.0).unwrap();
                let diff = (direct.value(&p) - expanded.value(&exp.forward(&p))).abs();
                prop_assert!(diff <= 1e-8, "{} differs by {diff:e}", g.describe_point(&p));
            }
        }
    }

    #[test]
    fn resolvent_identity_holds(lambda in 0.2f64..3.0, mu in 0.2f64..3.0) {
        let (g, d) = fixtures::two_vertex();
        let f = parse_function(&g, "bump:i@0.5:0.7").unwrap();
        let r_l = solve_resolvent(&g, &d, &f, lambda).unwrap();
        let r_m = solve_resolvent(&g, &d, &f, mu).unwrap();
        let r_lm = solve_resolvent(&g, &d, FromFn(|p: &GraphPoint| r_m.value(p)), lambda).unwrap();
        for p in ["v1", "i@0.25", "i@0.5", "v2", "e1@0.4", "e2@1.5"] {
            let p = g.parse_point(p).unwrap();
            let lhs = r_l.value(&p) - r_m.value(&p);
            let rhs = (mu - lambda) * r_lm.value(&p);
            prop_assert!((lhs - rhs).abs() <= 1e-6, "{lhs} vs {rhs}");
        }
    }
}
