//! Rewriting tadpoles into ordinary edges.
//!
//! A tadpole `t` of length `b_t` at `v` becomes an auxiliary vertex `v0`
//! joined to `v` by two internal edges of length `b_t / 2`. The auxiliary
//! vertex carries `a = 0`, `c = 0` and equal weights `1/2` on its two edges,
//! so the motion passes through it as a standard Brownian motion.

use super::{EdgeId, EdgeKind, End, GraphPoint, Incidence, MetricGraph};
use crate::wentzell::{VertexData, WentzellData, WentzellError};

#[derive(Clone, Debug)]
struct Rewrite {
    tadpole: EdgeId,
    half: f64,
    first: EdgeId,
    second: EdgeId,
}

/// Result of [`expand_tadpoles`] with the coordinate maps between the two
/// graphs.
#[derive(Clone, Debug)]
pub struct TadpoleExpansion {
    pub original: MetricGraph,
    pub graph: MetricGraph,
    pub data: WentzellData,
    rewrites: Vec<Rewrite>,
}

impl TadpoleExpansion {
    /// Maps a point of the original graph into the expanded graph.
    pub fn forward(&self, p: &GraphPoint) -> GraphPoint {
        match *p {
            GraphPoint::Vertex(v) => self
                .graph
                .vertex_point(self.original.vertex_name(v))
                .expect("original vertices are kept"),
            GraphPoint::Edge { edge, x } => {
                if let Some(rw) = self.rewrites.iter().find(|r| r.tadpole == edge) {
                    if x <= rw.half {
                        self.graph.point(rw.first, x).expect("in range")
                    } else {
                        self.graph.point(rw.second, x - rw.half).expect("in range")
                    }
                } else {
                    let id = self
                        .graph
                        .edge_id(self.original.edge_name(edge))
                        .expect("original edges are kept");
                    self.graph.point(id, x).expect("in range")
                }
            }
        }
    }

    /// Maps a point of the expanded graph back to the original graph.
    pub fn backward(&self, p: &GraphPoint) -> GraphPoint {
        match *p {
            GraphPoint::Vertex(v) => {
                let name = self.graph.vertex_name(v);
                match self.original.vertex_id(name) {
                    Some(id) => GraphPoint::Vertex(id),
                    None => {
                        let rw = self
                            .rewrites
                            .iter()
                            .find(|r| self.graph.edge(r.first).vertex_at(End::Finish) == v)
                            .expect("auxiliary vertex belongs to a rewrite");
                        GraphPoint::Edge {
                            edge: rw.tadpole,
                            x: rw.half,
                        }
                    }
                }
            }
            GraphPoint::Edge { edge, x } => {
                if let Some(rw) = self.rewrites.iter().find(|r| r.first == edge) {
                    GraphPoint::Edge {
                        edge: rw.tadpole,
                        x,
                    }
                } else if let Some(rw) = self.rewrites.iter().find(|r| r.second == edge) {
                    GraphPoint::Edge {
                        edge: rw.tadpole,
                        x: x + rw.half,
                    }
                } else {
                    let id = self
                        .original
                        .edge_id(self.graph.edge_name(edge))
                        .expect("edge kept");
                    GraphPoint::Edge { edge: id, x }
                }
            }
        }
    }

    pub fn tadpole_count(&self) -> usize {
        self.rewrites.len()
    }
}

/// Replaces every tadpole by an auxiliary vertex and two half-length edges.
/// Tadpole-free graphs come back unchanged.
pub fn expand_tadpoles(
    g: &MetricGraph,
    data: &WentzellData,
) -> Result<TadpoleExpansion, WentzellError> {
    let mut b = MetricGraph::builder(g.name());
    for v in g.vertices() {
        b = b.vertex(g.vertex_name(v));
    }
    let mut aux = Vec::new();
    for e in g.edge_ids() {
        let edge = g.edge(e);
        match edge.kind {
            EdgeKind::Internal { from, to, length } if from == to => {
                let v0 = format!("{}.v0", edge.name);
                let v = g.vertex_name(from);
                b = b
                    .vertex(&v0)
                    .internal(format!("{}.a", edge.name), v, &v0, length / 2.0)
                    .internal(format!("{}.b", edge.name), &v0, v, length / 2.0);
                aux.push((e, length / 2.0));
            }
            EdgeKind::Internal { from, to, length } => {
                b = b.internal(&edge.name, g.vertex_name(from), g.vertex_name(to), length)
            }
            EdgeKind::External { from } => b = b.external(&edge.name, g.vertex_name(from)),
        }
    }
    let graph = b.build()?;
    let rewrites: Vec<Rewrite> = aux
        .into_iter()
        .map(|(t, half)| {
            let name = g.edge_name(t);
            Rewrite {
                tadpole: t,
                half,
                first: graph.edge_id(&format!("{name}.a")).unwrap(),
                second: graph.edge_id(&format!("{name}.b")).unwrap(),
            }
        })
        .collect();

    let mut vertex_data = Vec::with_capacity(graph.vertex_count());
    for v in graph.vertices() {
        let name = graph.vertex_name(v);
        match g.vertex_id(name) {
            Some(old) => {
                let d = data.vertex(old);
                let b = graph
                    .incidences(v)
                    .iter()
                    .map(|inc| {
                        let old_inc = match rewrites
                            .iter()
                            .find(|r| r.first == inc.edge || r.second == inc.edge)
                        {
                            Some(rw) if rw.first == inc.edge => Incidence {
                                edge: rw.tadpole,
                                end: End::Start,
                            },
                            Some(rw) => Incidence {
                                edge: rw.tadpole,
                                end: End::Finish,
                            },
                            None => Incidence {
                                edge: g.edge_id(graph.edge_name(inc.edge)).unwrap(),
                                end: inc.end,
                            },
                        };
                        data.b_at(g, old, old_inc)
                    })
                    .collect();
                vertex_data.push(VertexData { a: d.a, c: d.c, b });
            }
            None => vertex_data.push(VertexData {
                a: 0.0,
                c: 0.0,
                b: vec![0.5, 0.5],
            }),
        }
    }
    let data = WentzellData::from_vertex_data(&graph, vertex_data)?;
    Ok(TadpoleExpansion {
        original: g.clone(),
        graph,
        data,
        rewrites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexId;
    use crate::wentzell::WentzellSpec;

    fn tadpole_graph() -> (MetricGraph, WentzellData) {
        let g = MetricGraph::builder("tad")
            .vertex("v")
            .tadpole("t", "v", 2.0)
            .external("e", "v")
            .build_with_tadpoles()
            .unwrap();
        let spec = WentzellSpec::new()
            .vertex("v", 0.1, 0.2)
            .b_end("v", "t", End::Start, 0.3)
            .b_end("v", "t", End::Finish, 0.1)
            .b("v", "e", 0.3);
        let data = WentzellData::from_spec(&spec, &g).unwrap();
        (g, data)
    }

    #[test]
    fn tadpole_becomes_two_half_edges() {
        let (g, data) = tadpole_graph();
        let ex = expand_tadpoles(&g, &data).unwrap();
        let h = &ex.graph;
        assert_eq!(h.vertex_count(), 2);
        assert_eq!(h.internal_edges().count(), 2);
        assert!(!h.has_tadpoles());
        for e in h.internal_edges() {
            assert_eq!(h.edge(e).length(), Some(1.0));
        }
        let v0 = h.vertex_id("t.v0").unwrap();
        let d0 = ex.data.vertex(v0);
        assert_eq!((d0.a, d0.c), (0.0, 0.0));
        assert_eq!(d0.b, vec![0.5, 0.5]);
        // data at v is carried over edge by edge
        let v = h.vertex_id("v").unwrap();
        let dv = ex.data.vertex(v);
        assert!((dv.a - 0.1).abs() < 1e-15 && (dv.c - 0.2).abs() < 1e-15);
        let mut bs = dv.b.clone();
        bs.sort_by(f64::total_cmp);
        assert_eq!(bs, vec![0.1, 0.3, 0.3]);
        let ta = h.edge_id("t.a").unwrap();
        assert_eq!(ex.data.b_at(h, v, Incidence { edge: ta, end: End::Start }), 0.3);
    }

    #[test]
    fn coordinate_maps_invert() {
        let (g, data) = tadpole_graph();
        let ex = expand_tadpoles(&g, &data).unwrap();
        let t = g.edge_id("t").unwrap();
        for x in [0.1, 0.7, 1.0, 1.3, 1.9] {
            let p = g.point(t, x).unwrap();
            let q = ex.forward(&p);
            assert_eq!(ex.backward(&q), p);
        }
        let mid = ex.forward(&g.point(t, 1.0).unwrap());
        assert_eq!(mid, GraphPoint::Vertex(ex.graph.vertex_id("t.v0").unwrap()));
        assert_eq!(ex.forward(&GraphPoint::Vertex(VertexId(0))), GraphPoint::Vertex(VertexId(0)));
    }

    #[test]
    fn tadpole_free_graph_is_unchanged() {
        let g = MetricGraph::builder("g")
            .vertex("v1")
            .vertex("v2")
            .internal("i", "v1", "v2", 1.5)
            .external("e", "v2")
            .build()
            .unwrap();
        let data = WentzellData::walsh_uniform(&g);
        let ex = expand_tadpoles(&g, &data).unwrap();
        assert_eq!(ex.graph.canonical_form(), g.canonical_form());
        for v in g.vertices() {
            let (d0, d1) = (data.vertex(v), ex.data.vertex(v));
            assert_eq!(d0.b.len(), d1.b.len());
            for (x, y) in d0.b.iter().zip(&d1.b) {
                assert!((x - y).abs() < 1e-15);
            }
        }
        assert_eq!(ex.tadpole_count(), 0);
    }

    #[test]
    fn two_tadpoles_add_two_vertices() {
        let g = MetricGraph::builder("g")
            .vertex("v1")
            .vertex("v2")
            .internal("i", "v1", "v2", 1.0)
            .tadpole("t1", "v1", 1.0)
            .tadpole("t2", "v2", 3.0)
            .build_with_tadpoles()
            .unwrap();
        let data = WentzellData::walsh_uniform(&g);
        let ex = expand_tadpoles(&g, &data).unwrap();
        assert_eq!(ex.graph.vertex_count(), 4);
        assert_eq!(ex.graph.internal_edges().count(), 3 + 2);
    }
}
