//! Vertex boundary data `(a_v, b_{v_l}, c_v)` and the simulation regime each
//! vertex falls into.
//!
//! The boundary condition at `v` reads
//! `a_v u(v) - Σ_l b_{v_l} u'(v_l) + ½ c_v u''(v) = 0`
//! with `a_v + Σ_l b_{v_l} + c_v = 1` and `a_v < 1`.

use std::collections::HashMap;
use std::fmt;

use crate::graph::{End, GraphError, Incidence, MetricGraph, VertexId};

/// Tolerance on `a + Σb + c = 1` before renormalisation.
pub const SUM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct VertexData {
    pub a: f64,
    pub c: f64,
    /// One weight per incidence, aligned with [`MetricGraph::incidences`].
    pub b: Vec<f64>,
}

impl VertexData {
    pub fn total_b(&self) -> f64 {
        self.b.iter().sum()
    }
}

/// Validated boundary data for every vertex of a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct WentzellData {
    vertices: Vec<VertexData>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    UnknownVertex(String),
    NonIncident { vertex: String, edge: String },
    OutOfRange { vertex: String, what: String, value: f64 },
    KillingWeightOne { vertex: String },
    SumMismatch { vertex: String, sum: f64 },
    DuplicateEntry { vertex: String, what: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownVertex(v) => write!(f, "undeclared vertex {v}"),
            Violation::NonIncident { vertex, edge } => {
                write!(f, "vertex {vertex}: edge {edge} is not incident")
            }
            Violation::OutOfRange {
                vertex,
                what,
                value,
            } => write!(f, "vertex {vertex}: {what} = {value} outside [0, 1]"),
            Violation::KillingWeightOne { vertex } => {
                write!(f, "vertex {vertex}: a_v must be < 1")
            }
            Violation::SumMismatch { vertex, sum } => {
                write!(f, "vertex {vertex}: a + Σb + c = {sum}, expected 1")
            }
            Violation::DuplicateEntry { vertex, what } => {
                write!(f, "vertex {vertex}: {what} given more than once")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WentzellError {
    #[error("invalid Wentzell data: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Clone, Debug, Default, PartialEq)]
struct RawVertex {
    a: Option<f64>,
    c: Option<f64>,
    b: Vec<(String, Option<End>, f64)>,
}

/// Unvalidated boundary data keyed by names, as read from a graph file.
///
/// Missing `a`, `c` and `b` entries are zero. A `b` entry naming a tadpole
/// without an end applies to both of its ends.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WentzellSpec {
    order: Vec<String>,
    vertices: HashMap<String, RawVertex>,
    duplicates: Vec<Violation>,
}

impl WentzellSpec {
    pub fn new() -> Self {
        Self::default()
    }

    fn entry(&mut self, v: &str) -> &mut RawVertex {
        if !self.vertices.contains_key(v) {
            self.order.push(v.to_string());
        }
        self.vertices.entry(v.to_string()).or_default()
    }

    /// Sets `a_v` and `c_v`.
    pub fn vertex(mut self, v: &str, a: f64, c: f64) -> Self {
        self.set_vertex(v, a, c);
        self
    }

    pub fn set_vertex(&mut self, v: &str, a: f64, c: f64) {
        let raw = self.entry(v);
        let dup = raw.a.is_some() || raw.c.is_some();
        raw.a = Some(a);
        raw.c = Some(c);
        if dup {
            self.duplicates.push(Violation::DuplicateEntry {
                vertex: v.to_string(),
                what: "wentzell".into(),
            });
        }
    }

    /// Sets `b_{v_l}` for the edge `edge`.
    pub fn b(mut self, v: &str, edge: &str, value: f64) -> Self {
        self.set_b(v, edge, None, value);
        self
    }

    /// Sets `b_{v_l}` for one end of an edge (needed to tell tadpole ends apart).
    pub fn b_end(mut self, v: &str, edge: &str, end: End, value: f64) -> Self {
        self.set_b(v, edge, Some(end), value);
        self
    }

    pub fn set_b(&mut self, v: &str, edge: &str, end: Option<End>, value: f64) {
        let raw = self.entry(v);
        let dup = raw.b.iter().any(|(e, en, _)| e == edge && *en == end);
        raw.b.push((edge.to_string(), end, value));
        if dup {
            self.duplicates.push(Violation::DuplicateEntry {
                vertex: v.to_string(),
                what: format!("b for {edge}"),
            });
        }
    }
}

/// Checks boundary data against the graph's incidence structure.
pub fn validate(spec: &WentzellSpec, g: &MetricGraph) -> Result<(), Vec<Violation>> {
    resolve(spec, g).map(|_| ())
}

fn resolve(spec: &WentzellSpec, g: &MetricGraph) -> Result<Vec<VertexData>, Vec<Violation>> {
    let mut violations = spec.duplicates.clone();
    for name in &spec.order {
        if g.vertex_id(name).is_none() {
            violations.push(Violation::UnknownVertex(name.clone()));
        }
    }
    let mut out = Vec::with_capacity(g.vertex_count());
    for v in g.vertices() {
        let name = g.vertex_name(v);
        let empty = RawVertex::default();
        let raw = spec.vertices.get(name).unwrap_or(&empty);
        let incidences = g.incidences(v);
        let mut b = vec![0.0; incidences.len()];
        for (edge, end, value) in &raw.b {
            let matches: Vec<usize> = incidences
                .iter()
                .enumerate()
                .filter(|(_, inc)| {
                    g.edge_name(inc.edge) == edge && end.is_none_or(|e| e == inc.end)
                })
                .map(|(k, _)| k)
                .collect();
            if matches.is_empty() {
                violations.push(Violation::NonIncident {
                    vertex: name.to_string(),
                    edge: edge.clone(),
                });
            }
            for k in matches {
                b[k] = *value;
            }
        }
        let a = raw.a.unwrap_or(0.0);
        let c = raw.c.unwrap_or(0.0);
        let mut bad = false;
        let mut check = |what: String, value: f64| {
            if !(0.0..=1.0).contains(&value) {
                violations.push(Violation::OutOfRange {
                    vertex: name.to_string(),
                    what,
                    value,
                });
                bad = true;
            }
        };
        check("a".into(), a);
        check("c".into(), c);
        for (inc, value) in incidences.iter().zip(&b) {
            check(format!("b[{}]", g.edge_name(inc.edge)), *value);
        }
        if bad {
            continue;
        }
        let sum = a + c + b.iter().sum::<f64>();
        if (sum - 1.0).abs() > SUM_TOL {
            violations.push(Violation::SumMismatch {
                vertex: name.to_string(),
                sum,
            });
            continue;
        }
        let (a, c) = (a / sum, c / sum);
        let b: Vec<f64> = b.iter().map(|x| x / sum).collect();
        if a >= 1.0 {
            violations.push(Violation::KillingWeightOne {
                vertex: name.to_string(),
            });
            continue;
        }
        out.push(VertexData { a, c, b });
    }
    if violations.is_empty() {
        Ok(out)
    } else {
        Err(violations)
    }
}

impl WentzellData {
    pub fn from_spec(spec: &WentzellSpec, g: &MetricGraph) -> Result<Self, WentzellError> {
        resolve(spec, g)
            .map(|vertices| Self { vertices })
            .map_err(WentzellError::Invalid)
    }

    /// Builds data from per-vertex values aligned with the graph's
    /// incidences, validating and renormalising as [`WentzellData::from_spec`].
    pub fn from_vertex_data(g: &MetricGraph, data: Vec<VertexData>) -> Result<Self, WentzellError> {
        let mut spec = WentzellSpec::new();
        for (v, d) in g.vertices().zip(&data) {
            let name = g.vertex_name(v);
            spec.set_vertex(name, d.a, d.c);
            for (inc, b) in g.incidences(v).iter().zip(&d.b) {
                spec.set_b(name, g.edge_name(inc.edge), Some(inc.end), *b);
            }
        }
        if data.len() != g.vertex_count()
            || g.vertices().zip(&data).any(|(v, d)| d.b.len() != g.degree(v))
        {
            return Err(WentzellError::Invalid(vec![Violation::SumMismatch {
                vertex: "<shape>".into(),
                sum: f64::NAN,
            }]));
        }
        Self::from_spec(&spec, g)
    }

    /// Pure Walsh data: no killing, no stickiness, equal weights on all edges.
    pub fn walsh_uniform(g: &MetricGraph) -> Self {
        let vertices = g
            .vertices()
            .map(|v| {
                let d = g.degree(v);
                VertexData {
                    a: 0.0,
                    c: 0.0,
                    b: vec![1.0 / d as f64; d],
                }
            })
            .collect();
        Self { vertices }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, v: VertexId) -> &VertexData {
        &self.vertices[v.0]
    }

    pub fn a(&self, v: VertexId) -> f64 {
        self.vertices[v.0].a
    }

    pub fn c(&self, v: VertexId) -> f64 {
        self.vertices[v.0].c
    }

    pub fn b(&self, v: VertexId) -> &[f64] {
        &self.vertices[v.0].b
    }

    /// `b_{v_l}` for a given incidence of `v`.
    pub fn b_at(&self, g: &MetricGraph, v: VertexId, inc: Incidence) -> f64 {
        g.incidences(v)
            .iter()
            .position(|i| *i == inc)
            .map(|k| self.vertices[v.0].b[k])
            .unwrap_or(0.0)
    }

    pub fn total_b(&self, v: VertexId) -> f64 {
        self.vertices[v.0].total_b()
    }

    pub fn has_killing(&self) -> bool {
        self.vertices.iter().any(|d| d.a > 0.0)
    }

    pub fn classify(&self, v: VertexId) -> VertexRegime {
        classify(self, v)
    }

    /// Back to a name-keyed spec (used by the file writer).
    pub fn to_spec(&self, g: &MetricGraph) -> WentzellSpec {
        let mut spec = WentzellSpec::new();
        for v in g.vertices() {
            let d = self.vertex(v);
            let name = g.vertex_name(v);
            spec.set_vertex(name, d.a, d.c);
            for (inc, b) in g.incidences(v).iter().zip(&d.b) {
                let end = g.edge(inc.edge).is_tadpole().then_some(inc.end);
                spec.set_b(name, g.edge_name(inc.edge), end, *b);
            }
        }
        spec
    }
}

/// Parameters of a vertex where the process behaves like a Walsh process
/// with a sticky delay and killing, both on the local-time scale.
#[derive(Clone, Debug, PartialEq)]
pub struct StickyParams {
    /// Edge-selection probabilities `p_l = b_{v_l} / B_v`, aligned with
    /// the incidences of the vertex.
    pub probs: Vec<f64>,
    /// Real time added per unit local time, `ρ_v = c_v / B_v`.
    pub delay: f64,
    /// Killing rate per unit local time, `γ_v = a_v / B_v`.
    pub kill_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum VertexRegime {
    /// Absorbing vertex: `a = 0, B = 0, c = 1`.
    Trap,
    /// Exponential holding at the vertex followed by a jump to the cemetery.
    HoldKill { rate: f64 },
    Sticky(StickyParams),
}

/// Classifies a vertex of validated data.
pub fn classify(data: &WentzellData, v: VertexId) -> VertexRegime {
    let d = data.vertex(v);
    classify_weights(d.a, &d.b, d.c)
}

/// Classification from raw, not necessarily normalised weights. The result
/// is invariant under a common positive rescaling of `(a, b, c)`.
pub fn classify_weights(a: f64, b: &[f64], c: f64) -> VertexRegime {
    let total: f64 = b.iter().sum();
    if total > 0.0 {
        VertexRegime::Sticky(StickyParams {
            probs: b.iter().map(|x| x / total).collect(),
            delay: c / total,
            kill_rate: a / total,
        })
    } else if a > 0.0 {
        VertexRegime::HoldKill { rate: a / c }
    } else {
        VertexRegime::Trap
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn star3() -> MetricGraph {
        MetricGraph::builder("star")
            .vertex("v")
            .external("e1", "v")
            .external("e2", "v")
            .external("e3", "v")
            .build()
            .unwrap()
    }

    fn two_edge() -> MetricGraph {
        MetricGraph::builder("g")
            .vertex("v")
            .external("e1", "v")
            .external("e2", "v")
            .build()
            .unwrap()
    }

    #[test]
    fn accepts_normalised_data() {
        let g = two_edge();
        let spec = WentzellSpec::new()
            .vertex("v", 0.0, 0.2)
            .b("v", "e1", 0.5)
            .b("v", "e2", 0.3);
        let data = WentzellData::from_spec(&spec, &g).unwrap();
        assert!((data.total_b(VertexId(0)) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn rejects_full_killing() {
        let g = two_edge();
        let spec = WentzellSpec::new().vertex("v", 1.0, 0.0);
        let err = validate(&spec, &g).unwrap_err();
        assert_eq!(err, vec![Violation::KillingWeightOne { vertex: "v".into() }]);
        assert_eq!(err[0].to_string(), "vertex v: a_v must be < 1");
    }

    #[test]
    fn rejects_sum_violation() {
        let g = two_edge();
        let spec = WentzellSpec::new()
            .vertex("v", 0.1, 0.1)
            .b("v", "e1", 0.5)
            .b("v", "e2", 0.5);
        match validate(&spec, &g).unwrap_err().as_slice() {
            [Violation::SumMismatch { vertex, sum }] => {
                assert_eq!(vertex, "v");
                assert!((sum - 1.2).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_incident_edge_and_unknown_vertex() {
        let g = two_edge();
        let spec = WentzellSpec::new()
            .vertex("v", 0.0, 0.0)
            .b("v", "e1", 0.5)
            .b("v", "e2", 0.5)
            .b("v", "zz", 0.0)
            .vertex("w", 0.0, 1.0);
        let err = validate(&spec, &g).unwrap_err();
        assert!(err.contains(&Violation::NonIncident {
            vertex: "v".into(),
            edge: "zz".into()
        }));
        assert!(err.contains(&Violation::UnknownVertex("w".into())));
    }

    #[test]
    fn renormalises_within_tolerance() {
        let g = two_edge();
        let spec = WentzellSpec::new()
            .vertex("v", 0.0, 0.2 + 5e-10)
            .b("v", "e1", 0.5)
            .b("v", "e2", 0.3);
        let data = WentzellData::from_spec(&spec, &g).unwrap();
        let d = data.vertex(VertexId(0));
        assert!((d.a + d.c + d.total_b() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn classifies_regimes() {
        let g = star3();
        let trap = WentzellSpec::new().vertex("v", 0.0, 1.0);
        let data = WentzellData::from_spec(&trap, &g).unwrap();
        assert_eq!(data.classify(VertexId(0)), VertexRegime::Trap);

        let hold = WentzellSpec::new().vertex("v", 0.2, 0.8);
        let data = WentzellData::from_spec(&hold, &g).unwrap();
        match data.classify(VertexId(0)) {
            VertexRegime::HoldKill { rate } => assert!((rate - 0.25).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }

        let walsh = WentzellSpec::new()
            .vertex("v", 0.0, 0.0)
            .b("v", "e1", 0.5)
            .b("v", "e2", 0.3)
            .b("v", "e3", 0.2);
        let data = WentzellData::from_spec(&walsh, &g).unwrap();
        assert_eq!(
            data.classify(VertexId(0)),
            VertexRegime::Sticky(StickyParams {
                probs: vec![0.5, 0.3, 0.2],
                delay: 0.0,
                kill_rate: 0.0
            })
        );
    }

    #[test]
    fn tadpole_entries_without_end_apply_to_both_ends() {
        let g = MetricGraph::builder("g")
            .vertex("v")
            .tadpole("t", "v", 1.0)
            .build_with_tadpoles()
            .unwrap();
        let spec = WentzellSpec::new().vertex("v", 0.0, 0.0).b("v", "t", 0.5);
        let data = WentzellData::from_spec(&spec, &g).unwrap();
        assert_eq!(data.b(VertexId(0)), &[0.5, 0.5]);
    }

    fn weights() -> impl Strategy<Value = (f64, Vec<f64>, f64)> {
        (
            0.0..1.0f64,
            prop::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64], 1..5),
            0.0..1.0f64,
        )
    }

    proptest! {
        #[test]
        fn classification_is_scale_invariant((a, b, c) in weights(), k in 0.01..100.0f64) {
            let scaled: Vec<f64> = b.iter().map(|x| x * k).collect();
            let r1 = classify_weights(a, &b, c);
            let r2 = classify_weights(a * k, &scaled, c * k);
            match (r1, r2) {
                (VertexRegime::Trap, VertexRegime::Trap) => {}
                (VertexRegime::HoldKill { rate: x }, VertexRegime::HoldKill { rate: y }) => {
                    prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
                }
                (VertexRegime::Sticky(p), VertexRegime::Sticky(q)) => {
                    prop_assert!((p.delay - q.delay).abs() <= 1e-12 * p.delay.max(1.0));
                    prop_assert!((p.kill_rate - q.kill_rate).abs() <= 1e-12 * p.kill_rate.max(1.0));
                    for (x, y) in p.probs.iter().zip(&q.probs) {
                        prop_assert!((x - y).abs() <= 1e-12);
                    }
                    prop_assert!((p.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
                (x, y) => prop_assert!(false, "regime changed: {x:?} vs {y:?}"),
            }
        }

        #[test]
        fn classification_is_exhaustive((a, b, c) in weights()) {
            let total = a + c + b.iter().sum::<f64>();
            prop_assume!(total > 0.0 && a / total < 1.0);
            let b: Vec<f64> = b.iter().map(|x| x / total).collect();
            match classify_weights(a / total, &b, c / total) {
                VertexRegime::Trap => prop_assert!(a == 0.0 && b.iter().all(|x| *x == 0.0)),
                VertexRegime::HoldKill { rate } => prop_assert!(rate.is_finite() && rate > 0.0),
                VertexRegime::Sticky(p) => {
                    prop_assert!(p.delay.is_finite() && p.kill_rate.is_finite());
                    prop_assert!(p.delay >= 0.0 && p.kill_rate >= 0.0);
                }
            }
        }
    }
}
