use std::collections::HashSet;

use super::{EdgeId, EdgeKind, End, GraphBuilder, GraphError, MetricGraph, VertexId};

/// Orientation `σ_k` of a new internal edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// The point lies in (or the edge starts from) the first graph.
    First,
    /// The point lies in (or the edge starts from) the second graph.
    Second,
}

/// One pair `(e_k, l_k)` of external edges to be connected by a new
/// internal edge of length `b_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct JoinPair {
    /// External edge of the first graph.
    pub left: String,
    /// External edge of the second graph.
    pub right: String,
    pub length: f64,
    /// `σ_k = +1`: the new edge runs from the first graph's vertex to the
    /// second's. `σ_k = -1`: the reverse.
    pub forward: bool,
    /// Name of the new internal edge; defaults to `left~right`.
    pub id: Option<String>,
}

impl JoinPair {
    pub fn new(left: impl Into<String>, right: impl Into<String>, length: f64) -> Self {
        Self {
            left: left.into(),
            right: right.into(),
            length,
            forward: true,
            id: None,
        }
    }

    pub fn reversed(mut self) -> Self {
        self.forward = false;
        self
    }

    pub fn named(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    fn edge_name(&self) -> String {
        self.id
            .clone()
            .unwrap_or_else(|| format!("{}~{}", self.left, self.right))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct JoinPlan {
    pub pairs: Vec<JoinPair>,
}

impl JoinPlan {
    pub fn new(pairs: Vec<JoinPair>) -> Self {
        Self { pairs }
    }
}

/// A shadow vertex: the point at distance `b_k` on a joined external edge,
/// whose hitting stands for arrival at the vertex `κ(η)` on the other side.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadowVertex {
    /// Graph containing the point.
    pub side: Side,
    /// The joined external edge carrying the point (name in its own graph).
    pub edge: String,
    pub distance: f64,
    /// `κ(η)`, as a vertex of the joined graph.
    pub kappa: VertexId,
}

#[derive(Clone, Debug)]
pub struct JoinResult {
    pub graph: MetricGraph,
    /// `I_c`, the new internal edges, in plan order.
    pub new_edges: Vec<EdgeId>,
    /// `V_c`, sorted.
    pub connected: Vec<VertexId>,
    /// `V_s`, two per pair.
    pub shadows: Vec<ShadowVertex>,
}

/// Connects pairs of external edges of two disjoint graphs by new internal
/// edges.
pub fn join_graphs(
    g1: &MetricGraph,
    g2: &MetricGraph,
    plan: &JoinPlan,
) -> Result<JoinResult, GraphError> {
    let mut used = HashSet::new();
    let mut ends = Vec::with_capacity(plan.pairs.len());
    for pair in &plan.pairs {
        if !(pair.length.is_finite() && pair.length > 0.0) {
            return Err(GraphError::InvalidLength {
                edge: pair.edge_name(),
                length: pair.length,
            });
        }
        let v1 = external_vertex(g1, &pair.left)?;
        let v2 = external_vertex(g2, &pair.right)?;
        if !used.insert((Side::First as u8, pair.left.clone()))
            || !used.insert((Side::Second as u8, pair.right.clone()))
        {
            let name = if used.contains(&(Side::Second as u8, pair.right.clone())) {
                pair.right.clone()
            } else {
                pair.left.clone()
            };
            return Err(GraphError::ReusedEdge(name));
        }
        ends.push((g1.vertex_name(v1).to_string(), g2.vertex_name(v2).to_string()));
    }
    let joined_left: HashSet<&str> = plan.pairs.iter().map(|p| p.left.as_str()).collect();
    let joined_right: HashSet<&str> = plan.pairs.iter().map(|p| p.right.as_str()).collect();

    let mut b = GraphBuilder::new(format!("{}+{}", g1.name(), g2.name()));
    for g in [g1, g2] {
        for v in g.vertices() {
            b = b.vertex(g.vertex_name(v));
        }
    }
    for (g, joined) in [(g1, &joined_left), (g2, &joined_right)] {
        for e in g.edge_ids() {
            let edge = g.edge(e);
            b = match edge.kind {
                EdgeKind::Internal { from, to, length } => b.internal(
                    edge.name.clone(),
                    g.vertex_name(from),
                    g.vertex_name(to),
                    length,
                ),
                EdgeKind::External { from } if !joined.contains(edge.name.as_str()) => {
                    b.external(edge.name.clone(), g.vertex_name(from))
                }
                EdgeKind::External { .. } => b,
            };
        }
    }
    for (pair, (u1, u2)) in plan.pairs.iter().zip(&ends) {
        let (from, to) = if pair.forward { (u1, u2) } else { (u2, u1) };
        b = b.internal(pair.edge_name(), from.clone(), to.clone(), pair.length);
    }
    let graph = if g1.has_tadpoles() || g2.has_tadpoles() {
        b.build_with_tadpoles()?
    } else {
        b.build()?
    };

    let mut new_edges = Vec::with_capacity(plan.pairs.len());
    let mut connected = Vec::new();
    let mut shadows = Vec::with_capacity(2 * plan.pairs.len());
    for (pair, (u1, u2)) in plan.pairs.iter().zip(&ends) {
        let id = graph.edge_id(&pair.edge_name()).expect("new edge present");
        new_edges.push(id);
        let w1 = graph.vertex_id(u1).expect("vertex kept");
        let w2 = graph.vertex_id(u2).expect("vertex kept");
        connected.push(w1);
        connected.push(w2);
        // the shadow of the first graph's vertex lives on the second graph's edge
        shadows.push(ShadowVertex {
            side: Side::Second,
            edge: pair.right.clone(),
            distance: pair.length,
            kappa: w1,
        });
        shadows.push(ShadowVertex {
            side: Side::First,
            edge: pair.left.clone(),
            distance: pair.length,
            kappa: w2,
        });
    }
    connected.sort();
    connected.dedup();
    Ok(JoinResult {
        graph,
        new_edges,
        connected,
        shadows,
    })
}

fn external_vertex(g: &MetricGraph, name: &str) -> Result<VertexId, GraphError> {
    let id = g
        .edge_id(name)
        .ok_or_else(|| GraphError::UnknownEdge(name.to_string()))?;
    match g.edge(id).kind {
        EdgeKind::External { from } => Ok(from),
        EdgeKind::Internal { .. } => Err(GraphError::NotExternal(name.to_string())),
    }
}

impl JoinResult {
    /// Endpoint of a new edge on the requested side.
    pub fn endpoint(&self, k: usize, end: End) -> VertexId {
        self.graph.edge(self.new_edges[k]).vertex_at(end)
    }
}
