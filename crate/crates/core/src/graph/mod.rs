//! Finite metric graphs: vertices, internal edges (compact intervals) and
//! external edges (half-lines) glued at their endpoints.
//!
//! Edges carry a local coordinate. An internal edge `i` with length `a_i` is
//! parametrised by `x ∈ [0, a_i]`, with `x = 0` at the initial vertex `∂⁻(i)`
//! and `x = a_i` at the final vertex `∂⁺(i)`. An external edge is parametrised
//! by `x ∈ [0, ∞)` with `x = 0` at its vertex.

mod join;
mod star;
mod tadpole;
pub mod text;

use std::collections::HashMap;
use std::fmt;

pub use join::{join_graphs, JoinPair, JoinPlan, JoinResult, ShadowVertex, Side};
pub use star::{decompose_to_stars, reassemble, Ray, RayKind, StarDecomposition, StarGraph};
pub use tadpole::{expand_tadpoles, TadpoleExpansion};

/// Relative tolerance used when snapping coordinates onto vertices.
pub const ENDPOINT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

/// Which end of an edge's coordinate interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    /// `x = 0`.
    Start,
    /// `x = a_i` (internal edges only).
    Finish,
}

/// An edge end attached to a vertex: one element of `L(v)`.
///
/// Tadpoles contribute two incidences to their vertex, one per end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Incidence {
    pub edge: EdgeId,
    pub end: End,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EdgeKind {
    Internal {
        from: VertexId,
        to: VertexId,
        length: f64,
    },
    External {
        from: VertexId,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub name: String,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn length(&self) -> Option<f64> {
        match self.kind {
            EdgeKind::Internal { length, .. } => Some(length),
            EdgeKind::External { .. } => None,
        }
    }

    pub fn is_internal(&self) -> bool {
        matches!(self.kind, EdgeKind::Internal { .. })
    }

    pub fn is_tadpole(&self) -> bool {
        matches!(self.kind, EdgeKind::Internal { from, to, .. } if from == to)
    }

    /// Vertex sitting at the given end.
    pub fn vertex_at(&self, end: End) -> VertexId {
        match (self.kind, end) {
            (EdgeKind::Internal { from, .. }, End::Start) => from,
            (EdgeKind::Internal { to, .. }, End::Finish) => to,
            (EdgeKind::External { from }, _) => from,
        }
    }

    /// Coordinate of the given end.
    pub fn coordinate_of(&self, end: End) -> f64 {
        match (self.kind, end) {
            (EdgeKind::Internal { length, .. }, End::Finish) => length,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("undeclared vertex {0}")]
    UndeclaredVertex(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("edge {edge} has invalid length {length}")]
    InvalidLength { edge: String, length: f64 },
    #[error("edge {0} is a tadpole; expand tadpoles first")]
    Tadpole(String),
    #[error("vertex {0} has no incident edges")]
    IsolatedVertex(String),
    #[error("unknown edge {0}")]
    UnknownEdge(String),
    #[error("edge {0} is not an external edge")]
    NotExternal(String),
    #[error("edge {0} is used in more than one join pair")]
    ReusedEdge(String),
    #[error("coordinate {x} is outside edge {edge}")]
    CoordinateOutOfRange { edge: String, x: f64 },
    #[error("graph has no vertices")]
    Empty,
}

/// A point of the graph, in canonical form: endpoints are always
/// represented by their vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GraphPoint {
    Vertex(VertexId),
    Edge { edge: EdgeId, x: f64 },
}

#[derive(Clone, Debug)]
pub struct MetricGraph {
    name: String,
    vertices: Vec<String>,
    edges: Vec<Edge>,
    incidences: Vec<Vec<Incidence>>,
    vertex_index: HashMap<String, VertexId>,
    edge_index: HashMap<String, EdgeId>,
    // Shortest-path distances between vertices along internal edges.
    vertex_dist: Vec<Vec<f64>>,
}

/// Incremental constructor for [`MetricGraph`].
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    name: String,
    vertices: Vec<String>,
    edges: Vec<(String, String, Option<String>, Option<f64>)>,
}

impl GraphBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn vertex(mut self, id: impl Into<String>) -> Self {
        self.vertices.push(id.into());
        self
    }

    pub fn internal(
        mut self,
        id: impl Into<String>,
        from: impl Into<String>,
        to: impl Into<String>,
        length: f64,
    ) -> Self {
        self.edges
            .push((id.into(), from.into(), Some(to.into()), Some(length)));
        self
    }

    pub fn external(mut self, id: impl Into<String>, from: impl Into<String>) -> Self {
        self.edges.push((id.into(), from.into(), None, None));
        self
    }

    /// Adds an internal edge from `v` to itself.
    pub fn tadpole(self, id: impl Into<String>, v: impl Into<String>, length: f64) -> Self {
        let v = v.into();
        self.internal(id, v.clone(), v, length)
    }

    /// Builds a tadpole-free graph.
    pub fn build(self) -> Result<MetricGraph, GraphError> {
        self.finish(false)
    }

    /// Builds a graph that may still contain tadpoles (input to
    /// [`expand_tadpoles`], or to the resolvent solver which handles them
    /// directly).
    pub fn build_with_tadpoles(self) -> Result<MetricGraph, GraphError> {
        self.finish(true)
    }

    fn finish(self, allow_tadpoles: bool) -> Result<MetricGraph, GraphError> {
        if self.vertices.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut vertex_index = HashMap::new();
        for (k, v) in self.vertices.iter().enumerate() {
            if vertex_index.insert(v.clone(), VertexId(k)).is_some() {
                return Err(GraphError::DuplicateId(v.clone()));
            }
        }
        let lookup = |name: &str| {
            vertex_index
                .get(name)
                .copied()
                .ok_or_else(|| GraphError::UndeclaredVertex(name.to_string()))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut edge_index = HashMap::new();
        for (k, (id, from, to, length)) in self.edges.iter().enumerate() {
            if edge_index.insert(id.clone(), EdgeId(k)).is_some()
                || vertex_index.contains_key(id)
            {
                return Err(GraphError::DuplicateId(id.clone()));
            }
            let from = lookup(from)?;
            let kind = match (to, length) {
                (Some(to), Some(length)) => {
                    let to = lookup(to)?;
                    if !(length.is_finite() && *length > 0.0) {
                        return Err(GraphError::InvalidLength {
                            edge: id.clone(),
                            length: *length,
                        });
                    }
                    if from == to && !allow_tadpoles {
                        return Err(GraphError::Tadpole(id.clone()));
                    }
                    EdgeKind::Internal {
                        from,
                        to,
                        length: *length,
                    }
                }
                _ => EdgeKind::External { from },
            };
            edges.push(Edge {
                name: id.clone(),
                kind,
            });
        }
        let mut incidences = vec![Vec::new(); self.vertices.len()];
        for (k, e) in edges.iter().enumerate() {
            let edge = EdgeId(k);
            match e.kind {
                EdgeKind::Internal { from, to, .. } => {
                    incidences[from.0].push(Incidence {
                        edge,
                        end: End::Start,
                    });
                    incidences[to.0].push(Incidence {
                        edge,
                        end: End::Finish,
                    });
                }
                EdgeKind::External { from } => incidences[from.0].push(Incidence {
                    edge,
                    end: End::Start,
                }),
            }
        }
        if let Some(k) = incidences.iter().position(Vec::is_empty) {
            return Err(GraphError::IsolatedVertex(self.vertices[k].clone()));
        }
        let vertex_dist = all_pairs_distance(self.vertices.len(), &edges);
        Ok(MetricGraph {
            name: self.name,
            vertices: self.vertices,
            edges,
            incidences,
            vertex_index,
            edge_index,
            vertex_dist,
        })
    }
}

fn all_pairs_distance(n: usize, edges: &[Edge]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (k, row) in d.iter_mut().enumerate() {
        row[k] = 0.0;
    }
    for e in edges {
        if let EdgeKind::Internal { from, to, length } = e.kind {
            if length < d[from.0][to.0] {
                d[from.0][to.0] = length;
                d[to.0][from.0] = length;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

impl MetricGraph {
    pub fn builder(name: impl Into<String>) -> GraphBuilder {
        GraphBuilder::new(name)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn internal_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edge_ids().filter(|e| self.edge(*e).is_internal())
    }

    pub fn external_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edge_ids().filter(|e| !self.edge(*e).is_internal())
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.0]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e.0].name
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.vertex_index.get(name).copied()
    }

    pub fn edge_id(&self, name: &str) -> Option<EdgeId> {
        self.edge_index.get(name).copied()
    }

    /// `L(v)`: the edge ends attached to `v`, in declaration order.
    pub fn incidences(&self, v: VertexId) -> &[Incidence] {
        &self.incidences[v.0]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incidences[v.0].len()
    }

    pub fn has_tadpoles(&self) -> bool {
        self.edges.iter().any(Edge::is_tadpole)
    }

    pub fn min_internal_length(&self) -> Option<f64> {
        self.edges
            .iter()
            .filter_map(Edge::length)
            .min_by(f64::total_cmp)
    }

    /// Canonical point for local coordinates `(edge, x)`; endpoints within
    /// `1e-12 · max(1, a_i)` snap to their vertex.
    pub fn point(&self, edge: EdgeId, x: f64) -> Result<GraphPoint, GraphError> {
        let e = self.edge(edge);
        let out_of_range = || GraphError::CoordinateOutOfRange {
            edge: e.name.clone(),
            x,
        };
        if !x.is_finite() {
            return Err(out_of_range());
        }
        match e.kind {
            EdgeKind::Internal { from, to, length } => {
                let tol = ENDPOINT_TOL * length.max(1.0);
                if x < -tol || x > length + tol {
                    Err(out_of_range())
                } else if x <= tol {
                    Ok(GraphPoint::Vertex(from))
                } else if x >= length - tol {
                    Ok(GraphPoint::Vertex(to))
                } else {
                    Ok(GraphPoint::Edge { edge, x })
                }
            }
            EdgeKind::External { from } => {
                if x < -ENDPOINT_TOL {
                    Err(out_of_range())
                } else if x <= ENDPOINT_TOL {
                    Ok(GraphPoint::Vertex(from))
                } else {
                    Ok(GraphPoint::Edge { edge, x })
                }
            }
        }
    }

    /// Same as [`MetricGraph::point`] but addressed by edge name.
    pub fn point_on(&self, edge: &str, x: f64) -> Result<GraphPoint, GraphError> {
        let id = self
            .edge_id(edge)
            .ok_or_else(|| GraphError::UnknownEdge(edge.to_string()))?;
        self.point(id, x)
    }

    pub fn vertex_point(&self, name: &str) -> Result<GraphPoint, GraphError> {
        self.vertex_id(name)
            .map(GraphPoint::Vertex)
            .ok_or_else(|| GraphError::UndeclaredVertex(name.to_string()))
    }

    /// The same point expressed from the other end of an internal edge.
    pub fn reversed_coordinate(&self, edge: EdgeId, x: f64) -> Option<f64> {
        self.edge(edge).length().map(|a| a - x)
    }

    /// Shortest-path distance between two points.
    pub fn distance(&self, p: &GraphPoint, q: &GraphPoint) -> f64 {
        let mut best = f64::INFINITY;
        if let (
            GraphPoint::Edge { edge: e1, x },
            GraphPoint::Edge { edge: e2, x: y },
        ) = (p, q)
        {
            if e1 == e2 {
                best = (x - y).abs();
            }
        }
        for (u, du) in self.anchors(p) {
            for (w, dw) in self.anchors(q) {
                best = best.min(du + self.vertex_dist[u.0][w.0] + dw);
            }
        }
        best
    }

    /// Distance from a point to the nearest vertex of a set (∞ when empty).
    pub fn distance_to_set(&self, p: &GraphPoint, set: &[VertexId]) -> f64 {
        set.iter()
            .map(|v| self.distance(p, &GraphPoint::Vertex(*v)))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn vertex_distance(&self, u: VertexId, w: VertexId) -> f64 {
        self.vertex_dist[u.0][w.0]
    }

    /// Endpoints reachable directly from `p` along its own edge, with offsets.
    fn anchors(&self, p: &GraphPoint) -> Vec<(VertexId, f64)> {
        match *p {
            GraphPoint::Vertex(v) => vec![(v, 0.0)],
            GraphPoint::Edge { edge, x } => match self.edge(edge).kind {
                EdgeKind::Internal { from, to, length } => vec![(from, x), (to, length - x)],
                EdgeKind::External { from } => vec![(from, x)],
            },
        }
    }

    /// Local coordinates of a point, using the first incident edge for
    /// vertices.
    pub fn local_coordinates(&self, p: &GraphPoint) -> (EdgeId, f64) {
        match *p {
            GraphPoint::Edge { edge, x } => (edge, x),
            GraphPoint::Vertex(v) => {
                let inc = self.incidences(v)[0];
                (inc.edge, self.edge(inc.edge).coordinate_of(inc.end))
            }
        }
    }

    pub fn describe_point(&self, p: &GraphPoint) -> String {
        match *p {
            GraphPoint::Vertex(v) => self.vertex_name(v).to_string(),
            GraphPoint::Edge { edge, x } => format!("{}@{}", self.edge_name(edge), x),
        }
    }

    /// Parses `vertex` or `edge@x` into a point.
    pub fn parse_point(&self, s: &str) -> Result<GraphPoint, GraphError> {
        match s.split_once('@') {
            Some((edge, x)) => {
                let x: f64 = x.trim().parse().map_err(|_| GraphError::CoordinateOutOfRange {
                    edge: edge.to_string(),
                    x: f64::NAN,
                })?;
                self.point_on(edge.trim(), x)
            }
            None => self.vertex_point(s.trim()),
        }
    }

    /// Order- and index-independent description used for graph equality.
    pub fn canonical_form(&self) -> CanonicalGraph {
        let mut vertices = self.vertices.clone();
        vertices.sort();
        let mut edges: Vec<CanonicalEdge> = self
            .edges
            .iter()
            .map(|e| CanonicalEdge {
                id: e.name.clone(),
                from: self.vertex_name(e.vertex_at(End::Start)).to_string(),
                to: match e.kind {
                    EdgeKind::Internal { to, .. } => Some(self.vertex_name(to).to_string()),
                    EdgeKind::External { .. } => None,
                },
                length_bits: e.length().map(f64::to_bits),
            })
            .collect();
        edges.sort();
        CanonicalGraph { vertices, edges }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CanonicalEdge {
    pub id: String,
    pub from: String,
    pub to: Option<String>,
    pub length_bits: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalGraph {
    pub vertices: Vec<String>,
    pub edges: Vec<CanonicalEdge>,
}

impl fmt::Display for MetricGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "graph {} (|V|={}, |I|={}, |E|={})",
            self.name,
            self.vertex_count(),
            self.internal_edges().count(),
            self.external_edges().count()
        )
    }
}
