//! Star (single-vertex graph) decomposition of a metric graph.
//!
//! Every vertex `v` gets a star `G(v)` with one ray per incidence. A ray of
//! an internal edge `i` carries a shadow point at distance `a_i`; reaching it
//! in `G(v)` stands for reaching the opposite endpoint of `i` in the graph.

use super::{
    join_graphs, EdgeId, EdgeKind, End, GraphError, GraphPoint, Incidence, JoinPair, JoinPlan,
    MetricGraph, VertexId,
};

#[derive(Clone, Debug, PartialEq)]
pub enum RayKind {
    External,
    /// Ray of an internal edge; its shadow point sits at distance `length`
    /// and maps to `target`.
    Internal { length: f64, target: VertexId },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ray {
    pub incidence: Incidence,
    pub edge_name: String,
    pub kind: RayKind,
}

impl Ray {
    /// Name of the ray when the star is viewed as a graph of its own.
    pub fn ray_name(&self) -> String {
        match self.kind {
            RayKind::External => self.edge_name.clone(),
            RayKind::Internal { .. } => match self.incidence.end {
                End::Start => format!("{}/start", self.edge_name),
                End::Finish => format!("{}/finish", self.edge_name),
            },
        }
    }

    /// Shadow point `(distance, κ-target)`, if any.
    pub fn shadow(&self) -> Option<(f64, VertexId)> {
        match self.kind {
            RayKind::Internal { length, target } => Some((length, target)),
            RayKind::External => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StarGraph {
    pub vertex: VertexId,
    pub vertex_name: String,
    pub rays: Vec<Ray>,
}

impl StarGraph {
    /// Global point at distance `r` from the vertex along ray `ray`.
    ///
    /// `r` equal to the shadow distance gives the opposite vertex.
    pub fn to_global(&self, g: &MetricGraph, ray: usize, r: f64) -> GraphPoint {
        let inc = self.rays[ray].incidence;
        let x = match inc.end {
            End::Start => r,
            End::Finish => g.edge(inc.edge).coordinate_of(End::Finish) - r,
        };
        if r <= 0.0 {
            return GraphPoint::Vertex(self.vertex);
        }
        g.point(inc.edge, x)
            .unwrap_or(GraphPoint::Vertex(g.edge(inc.edge).vertex_at(opposite(inc.end))))
    }

    /// Star coordinates `(ray, r)` of a global point, when the point lies on
    /// the closed star neighbourhood of this vertex. For the vertex itself
    /// the ray is 0. A point on a tadpole gets the nearer end.
    pub fn from_global(&self, g: &MetricGraph, p: &GraphPoint) -> Option<(usize, f64)> {
        match *p {
            GraphPoint::Vertex(v) if v == self.vertex => Some((0, 0.0)),
            GraphPoint::Vertex(v) => self.rays.iter().position(|r| matches!(r.kind, RayKind::Internal { target, .. } if target == v)).map(|k| {
                (k, g.edge(self.rays[k].incidence.edge).length().unwrap())
            }),
            GraphPoint::Edge { edge, x } => {
                let mut best: Option<(usize, f64)> = None;
                for (k, ray) in self.rays.iter().enumerate() {
                    if ray.incidence.edge != edge {
                        continue;
                    }
                    let r = match ray.incidence.end {
                        End::Start => x,
                        End::Finish => g.edge(edge).coordinate_of(End::Finish) - x,
                    };
                    if best.is_none_or(|(_, b)| r < b) {
                        best = Some((k, r));
                    }
                }
                best
            }
        }
    }

    /// Shadow points of this star as `(ray, distance, κ-target)`.
    pub fn shadow_points(&self) -> Vec<(usize, f64, VertexId)> {
        self.rays
            .iter()
            .enumerate()
            .filter_map(|(k, r)| r.shadow().map(|(d, t)| (k, d, t)))
            .collect()
    }

    /// The star as a single-vertex graph with one external edge per ray.
    pub fn to_graph(&self) -> MetricGraph {
        let mut b = MetricGraph::builder(format!("G({})", self.vertex_name)).vertex(&self.vertex_name);
        for ray in &self.rays {
            b = b.external(ray.ray_name(), &self.vertex_name);
        }
        b.build().expect("a star with at least one ray is a valid graph")
    }
}

fn opposite(end: End) -> End {
    match end {
        End::Start => End::Finish,
        End::Finish => End::Start,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StarDecomposition {
    /// One star per vertex, indexed by vertex id.
    pub stars: Vec<StarGraph>,
    /// Lengths and end names of internal edges, needed to reassemble.
    internal: Vec<(String, String, String, f64)>,
}

impl StarDecomposition {
    pub fn star(&self, v: VertexId) -> &StarGraph {
        &self.stars[v.0]
    }

    /// `V_c`: vertices with at least one shadow point.
    pub fn connected(&self) -> Vec<VertexId> {
        self.stars
            .iter()
            .filter(|s| s.rays.iter().any(|r| r.shadow().is_some()))
            .map(|s| s.vertex)
            .collect()
    }

    pub fn shadow_count(&self) -> usize {
        self.stars.iter().map(|s| s.shadow_points().len()).sum()
    }
}

/// Splits a tadpole-free graph into its stars.
pub fn decompose_to_stars(g: &MetricGraph) -> Result<StarDecomposition, GraphError> {
    if let Some(t) = g.edge_ids().find(|e| g.edge(*e).is_tadpole()) {
        return Err(GraphError::Tadpole(g.edge_name(t).to_string()));
    }
    let stars = g
        .vertices()
        .map(|v| StarGraph {
            vertex: v,
            vertex_name: g.vertex_name(v).to_string(),
            rays: g
                .incidences(v)
                .iter()
                .map(|inc| {
                    let edge = g.edge(inc.edge);
                    let kind = match edge.kind {
                        EdgeKind::Internal { length, .. } => RayKind::Internal {
                            length,
                            target: edge.vertex_at(opposite(inc.end)),
                        },
                        EdgeKind::External { .. } => RayKind::External,
                    };
                    Ray {
                        incidence: *inc,
                        edge_name: edge.name.clone(),
                        kind,
                    }
                })
                .collect(),
        })
        .collect();
    let internal = g
        .internal_edges()
        .map(|e: EdgeId| {
            let edge = g.edge(e);
            (
                edge.name.clone(),
                g.vertex_name(edge.vertex_at(End::Start)).to_string(),
                g.vertex_name(edge.vertex_at(End::Finish)).to_string(),
                edge.length().unwrap(),
            )
        })
        .collect();
    Ok(StarDecomposition { stars, internal })
}

/// Rebuilds the graph by joining the stars one at a time.
///
/// Star `k` is joined to the union of stars `0..k` through every internal
/// edge between them in a single join, so cycles close correctly.
pub fn reassemble(d: &StarDecomposition, name: &str) -> Result<MetricGraph, GraphError> {
    let mut stars = d.stars.iter();
    let first = stars.next().ok_or(GraphError::Empty)?;
    let mut acc = first.to_graph();
    let mut placed = vec![first.vertex_name.clone()];
    for star in stars {
        let sg = star.to_graph();
        let mut pairs = Vec::new();
        for ray in &star.rays {
            if let RayKind::Internal { length, .. } = ray.kind {
                let (_, from, to, _) = d
                    .internal
                    .iter()
                    .find(|(n, ..)| *n == ray.edge_name)
                    .expect("internal edge recorded");
                let other_end = opposite(ray.incidence.end);
                let other_vertex = match other_end {
                    End::Start => from,
                    End::Finish => to,
                };
                if !placed.contains(other_vertex) {
                    continue;
                }
                let left = Ray {
                    incidence: Incidence {
                        edge: ray.incidence.edge,
                        end: other_end,
                    },
                    edge_name: ray.edge_name.clone(),
                    kind: ray.kind.clone(),
                }
                .ray_name();
                let mut pair = JoinPair::new(left, ray.ray_name(), length).named(&ray.edge_name);
                // σ = +1 iff the initial vertex sits in the accumulated graph
                if other_end == End::Finish {
                    pair = pair.reversed();
                }
                pairs.push(pair);
            }
        }
        acc = join_graphs(&acc, &sg, &JoinPlan::new(pairs))?.graph;
        placed.push(star.vertex_name.clone());
    }
    // rename: join names the graph after its parts
    let mut b = MetricGraph::builder(name);
    for v in acc.vertices() {
        b = b.vertex(acc.vertex_name(v));
    }
    for e in acc.edge_ids() {
        let edge = acc.edge(e);
        b = match edge.kind {
            EdgeKind::Internal { from, to, length } => b.internal(
                edge.name.clone(),
                acc.vertex_name(from),
                acc.vertex_name(to),
                length,
            ),
            EdgeKind::External { from } => b.external(edge.name.clone(), acc.vertex_name(from)),
        };
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn interval() -> MetricGraph {
        MetricGraph::builder("interval")
            .vertex("v1")
            .vertex("v2")
            .internal("i1", "v1", "v2", 1.0)
            .build()
            .unwrap()
    }

    #[test]
    fn interval_stars_carry_one_shadow_each() {
        let g = interval();
        let d = decompose_to_stars(&g).unwrap();
        assert_eq!(d.stars.len(), 2);
        for (k, star) in d.stars.iter().enumerate() {
            assert_eq!(star.rays.len(), 1);
            let shadows = star.shadow_points();
            assert_eq!(shadows.len(), 1);
            assert_eq!(shadows[0].1, 1.0);
            assert_eq!(shadows[0].2, VertexId(1 - k));
        }
    }

    #[test]
    fn star_with_only_external_edges_has_no_shadows() {
        let g = MetricGraph::builder("g")
            .vertex("v")
            .external("e1", "v")
            .external("e2", "v")
            .build()
            .unwrap();
        let d = decompose_to_stars(&g).unwrap();
        assert!(d.stars[0].shadow_points().is_empty());
        assert!(d.connected().is_empty());
    }

    #[test]
    fn coordinates_round_trip_through_star() {
        let g = interval();
        let d = decompose_to_stars(&g).unwrap();
        let s2 = d.star(VertexId(1));
        let p = s2.to_global(&g, 0, 0.25);
        assert_eq!(p, g.point_on("i1", 0.75).unwrap());
        let (ray, r) = s2.from_global(&g, &p).unwrap();
        assert_eq!(ray, 0);
        assert!((r - 0.25).abs() < 1e-15);
        assert_eq!(s2.to_global(&g, 0, 1.0), GraphPoint::Vertex(VertexId(0)));
    }

    #[test]
    fn tadpoles_must_be_expanded_first() {
        let g = MetricGraph::builder("g")
            .vertex("v")
            .tadpole("t", "v", 1.0)
            .build_with_tadpoles()
            .unwrap();
        assert!(matches!(decompose_to_stars(&g), Err(GraphError::Tadpole(_))));
    }

    /// Random tadpole-free graphs on up to 8 vertices, every vertex incident
    /// with at least one edge.
    pub(crate) fn arb_graph() -> impl Strategy<Value = MetricGraph> {
        (1usize..=8)
            .prop_flat_map(|n| {
                (
                    Just(n),
                    prop::collection::vec((0..n, 0..n, 0.1..5.0f64), 0..12),
                    prop::collection::vec(0..n, 0..6),
                )
            })
            .prop_map(|(n, internal, external)| {
                let mut b = MetricGraph::builder("random");
                for k in 0..n {
                    b = b.vertex(format!("v{k}"));
                }
                let mut touched = vec![false; n];
                for (k, (u, w, len)) in internal.into_iter().enumerate() {
                    if u == w {
                        continue;
                    }
                    touched[u] = true;
                    touched[w] = true;
                    b = b.internal(format!("i{k}"), format!("v{u}"), format!("v{w}"), len);
                }
                for (k, u) in external.into_iter().enumerate() {
                    touched[u] = true;
                    b = b.external(format!("e{k}"), format!("v{u}"));
                }
                for (k, t) in touched.iter().enumerate() {
                    if !t {
                        b = b.external(format!("x{k}"), format!("v{k}"));
                    }
                }
                b.build().unwrap()
            })
    }

    proptest! {
        #[test]
        fn reassembly_reproduces_the_graph(g in arb_graph()) {
            let d = decompose_to_stars(&g).unwrap();
            let h = reassemble(&d, g.name()).unwrap();
            prop_assert_eq!(h.canonical_form(), g.canonical_form());
        }

        #[test]
        fn each_internal_edge_gives_two_shadows(g in arb_graph()) {
            let d = decompose_to_stars(&g).unwrap();
            prop_assert_eq!(d.shadow_count(), 2 * g.internal_edges().count());
            for star in &d.stars {
                for (ray, dist, target) in star.shadow_points() {
                    let e = star.rays[ray].incidence.edge;
                    prop_assert_eq!(Some(dist), g.edge(e).length());
                    prop_assert!(target != star.vertex);
                    prop_assert_eq!(star.to_global(&g, ray, dist), GraphPoint::Vertex(target));
                }
            }
        }

        #[test]
        fn star_coordinates_invert(g in arb_graph(), frac in 0.01..0.49f64) {
            let d = decompose_to_stars(&g).unwrap();
            for star in &d.stars {
                for (k, ray) in star.rays.iter().enumerate() {
                    let r = match ray.kind {
                        RayKind::Internal { length, .. } => frac * length,
                        RayKind::External => 10.0 * frac,
                    };
                    let p = star.to_global(&g, k, r);
                    let (k2, r2) = star.from_global(&g, &p).unwrap();
                    prop_assert!((r - r2).abs() < 1e-12);
                    prop_assert_eq!(star.rays[k2].incidence.edge, ray.incidence.edge);
                }
            }
        }
    }
}
