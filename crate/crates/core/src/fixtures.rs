//! Small graphs used by the verification suite, the tests and the docs.

use crate::graph::{join_graphs, JoinPair, JoinPlan, JoinResult, MetricGraph};
use crate::wentzell::{WentzellData, WentzellSpec};

/// `v1 —i— v2` with one external edge at each vertex (`e1` at `v1`, `e2`
/// at `v2`), `i` of length 1.
pub fn two_vertex_graph() -> MetricGraph {
    MetricGraph::builder("two-vertex")
        .vertex("v1")
        .vertex("v2")
        .internal("i", "v1", "v2", 1.0)
        .external("e1", "v1")
        .external("e2", "v2")
        .build()
        .expect("fixture graph is valid")
}

/// Wentzell data on [`two_vertex_graph`] from `(a, b_i, b_e, c)` per vertex.
pub fn two_vertex_data(g: &MetricGraph, v1: [f64; 4], v2: [f64; 4]) -> WentzellData {
    let spec = WentzellSpec::new()
        .vertex("v1", v1[0], v1[3])
        .b("v1", "i", v1[1])
        .b("v1", "e1", v1[2])
        .vertex("v2", v2[0], v2[3])
        .b("v2", "i", v2[1])
        .b("v2", "e2", v2[2]);
    WentzellData::from_spec(&spec, g).expect("fixture data is valid")
}

/// The two-vertex model: elastic and sticky at `v1`, sticky at `v2`.
pub fn two_vertex() -> (MetricGraph, WentzellData) {
    let g = two_vertex_graph();
    let d = two_vertex_data(&g, [0.1, 0.4, 0.4, 0.1], [0.0, 0.3, 0.5, 0.2]);
    (g, d)
}

/// Same graph with a much stickier `v2`.
pub fn two_vertex_sticky() -> (MetricGraph, WentzellData) {
    let g = two_vertex_graph();
    let d = two_vertex_data(&g, [0.1, 0.4, 0.4, 0.1], [0.0, 0.15, 0.25, 0.6]);
    (g, d)
}

/// Same graph without killing.
pub fn two_vertex_conservative() -> (MetricGraph, WentzellData) {
    let g = two_vertex_graph();
    let d = two_vertex_data(&g, [0.0, 0.5, 0.4, 0.1], [0.0, 0.3, 0.5, 0.2]);
    (g, d)
}

/// Interval `[0, a]` with reflecting ends.
pub fn interval(a: f64) -> (MetricGraph, WentzellData) {
    let g = MetricGraph::builder("interval")
        .vertex("v1")
        .vertex("v2")
        .internal("i", "v1", "v2", a)
        .build()
        .expect("fixture graph is valid");
    let d = WentzellData::walsh_uniform(&g);
    (g, d)
}

/// Half-line with a reflecting vertex.
pub fn half_line() -> (MetricGraph, WentzellData) {
    let g = MetricGraph::builder("half-line")
        .vertex("v")
        .external("e", "v")
        .build()
        .expect("fixture graph is valid");
    let d = WentzellData::walsh_uniform(&g);
    (g, d)
}

/// A star of external edges `r1, r2, …` with Walsh weights `p`.
pub fn walsh_star(p: &[f64]) -> (MetricGraph, WentzellData) {
    let mut b = MetricGraph::builder("star").vertex("v");
    for k in 0..p.len() {
        b = b.external(format!("r{}", k + 1), "v");
    }
    let g = b.build().expect("fixture graph is valid");
    let mut spec = WentzellSpec::new().vertex("v", 0.0, 0.0);
    for (k, &w) in p.iter().enumerate() {
        spec = spec.b("v", &format!("r{}", k + 1), w);
    }
    let d = WentzellData::from_spec(&spec, &g).expect("fixture data is valid");
    (g, d)
}

/// One vertex with a single external edge and weights `(a, b, c)`.
pub fn single_vertex(a: f64, b: f64, c: f64) -> (MetricGraph, WentzellData) {
    let g = MetricGraph::builder("single")
        .vertex("v")
        .external("e", "v")
        .build()
        .expect("fixture graph is valid");
    let spec = WentzellSpec::new().vertex("v", a, c).b("v", "e", b);
    let d = WentzellData::from_spec(&spec, &g).expect("fixture data is valid");
    (g, d)
}

/// Vertex `v` with a tadpole `t` of length 2 and an external edge `e`.
pub fn tadpole() -> (MetricGraph, WentzellData) {
    let g = MetricGraph::builder("tadpole")
        .vertex("v")
        .tadpole("t", "v", 2.0)
        .external("e", "v")
        .build_with_tadpoles()
        .expect("fixture graph is valid");
    let spec = WentzellSpec::new()
        .vertex("v", 0.1, 0.2)
        .b_end("v", "t", crate::graph::End::Start, 0.3)
        .b_end("v", "t", crate::graph::End::Finish, 0.2)
        .b("v", "e", 0.2);
    let d = WentzellData::from_spec(&spec, &g).expect("fixture data is valid");
    (g, d)
}

/// The two graphs of the join example.
///
/// `G1`: path `v1 — v3 — v4` with external edges `x1` at `v1` and `e3` at
/// `v3`, and a separate star `v2` with external edges `e1, e2`. `G2`: path
/// `w1 — w2 — w3` with `l1` at `w1`, `l2, l3` at `w2` and `y1` at `w3`.
pub fn join_parts() -> (MetricGraph, MetricGraph) {
    let g1 = MetricGraph::builder("G1")
        .vertex("v1")
        .vertex("v2")
        .vertex("v3")
        .vertex("v4")
        .internal("i1", "v1", "v3", 1.0)
        .internal("i3", "v3", "v4", 0.8)
        .external("x1", "v1")
        .external("e1", "v2")
        .external("e2", "v2")
        .external("e3", "v3")
        .build()
        .expect("fixture graph is valid");
    let g2 = MetricGraph::builder("G2")
        .vertex("w1")
        .vertex("w2")
        .vertex("w3")
        .internal("j1", "w1", "w2", 1.2)
        .internal("j2", "w2", "w3", 0.7)
        .external("l1", "w1")
        .external("l2", "w2")
        .external("l3", "w2")
        .external("y1", "w3")
        .build()
        .expect("fixture graph is valid");
    (g1, g2)
}

/// `G1` and `G2` joined by `(e1, l1)`, `(e2, l2)` and `(e3, l3)` with lengths
/// `1`, `√2` and `1`; the result has 7 vertices and `V_c = {v2, v3, w1, w2}`.
pub fn joined() -> JoinResult {
    let (g1, g2) = join_parts();
    let plan = JoinPlan::new(vec![
        JoinPair::new("e1", "l1", 1.0),
        JoinPair::new("e2", "l2", std::f64::consts::SQRT_2).reversed(),
        JoinPair::new("e3", "l3", 1.0),
    ]);
    join_graphs(&g1, &g2, &plan).expect("fixture plan is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        two_vertex();
        two_vertex_sticky();
        two_vertex_conservative();
        interval(1.0);
        half_line();
        walsh_star(&[0.5, 0.3, 0.2]);
        single_vertex(0.2, 0.0, 0.8);
        tadpole();
        let j = joined();
        assert_eq!(j.graph.vertex_count(), 7);
        let names: Vec<&str> = j.connected.iter().map(|&v| j.graph.vertex_name(v)).collect();
        assert_eq!(names, ["v2", "v3", "w1", "w2"]);
    }
}
