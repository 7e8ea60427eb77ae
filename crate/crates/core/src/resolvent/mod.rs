//! Semi-analytic resolvent `u = R_λ f`, the solution of `λu − ½u'' = f` on
//! the graph with Wentzell conditions at every vertex.
//!
//! On each edge `u` is the Dirichlet particular part `φ(x) = ∫ r^D(x, y) f(y) dy`
//! plus a homogeneous part. With `s = √(2λ)`:
//!
//! * internal edge of length `a`: `α e^{−sx} + β e^{−s(a−x)}`,
//! * external edge: `α e^{−sx}`.
//!
//! The unknowns `α, β` and the vertex values `u(v)` solve one continuity
//! equation per incidence and, per vertex,
//! `(a + cλ) u(v) − Σ_l b_l u'_l(v) = c f(v)` with inward derivatives `u'_l`.

mod functions;
pub mod kernel;
pub mod quad;

pub use functions::{parse_function, BuiltinFunction, Bump, Constant, FromFn, FunctionError, GraphFunction, Plateau};
pub use kernel::{dirichlet_kernel, hitting_lt};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::graph::{EdgeId, EdgeKind, End, GraphPoint, Incidence, MetricGraph, TadpoleExpansion};
use crate::wentzell::WentzellData;
use kernel::{half_line_boundary_derivative, half_line_kernel, interval_boundary_derivative, interval_kernel_closed};

/// Absolute tolerance of every quadrature in the solve.
pub const QUAD_TOL: f64 = 1e-10;

/// External edges are integrated out to `x + TAIL / s`.
const TAIL: f64 = 40.0;

const MAX_CONDITION: f64 = 1e14;

#[derive(Debug, Error)]
pub enum ResolventError {
    #[error("λ must be positive and finite, got {0}")]
    BadLambda(f64),
    #[error("Wentzell data has {data} vertices but the graph has {graph}")]
    DataMismatch { data: usize, graph: usize },
    #[error("singular system (condition estimate {condition:.3e})")]
    Singular { condition: f64 },
}

/// Solution of the resolvent equation for one `λ` and right-hand side `f`.
#[derive(Clone, Debug)]
pub struct ResolventSolution<F> {
    pub lambda: f64,
    pub s: f64,
    /// Coefficient of `e^{−sx}`, per edge.
    pub alpha: Vec<f64>,
    /// Coefficient of `e^{−s(a−x)}`, per edge; zero on external edges.
    pub beta: Vec<f64>,
    pub vertex_values: Vec<f64>,
    /// Inward derivative of `φ` at (start, finish), per edge.
    pub particular_derivative: Vec<[f64; 2]>,
    /// 2-norm condition number of the assembled matrix.
    pub condition: f64,
    graph: MetricGraph,
    f: F,
}

impl<F: GraphFunction> ResolventSolution<F> {
    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn rhs(&self) -> &F {
        &self.f
    }

    /// `u` at a point.
    pub fn value(&self, p: &GraphPoint) -> f64 {
        match *p {
            GraphPoint::Vertex(v) => self.vertex_values[v.0],
            GraphPoint::Edge { edge, x } => {
                particular(&self.graph, &self.f, self.s, edge, x) + self.homogeneous(edge, x)
            }
        }
    }

    /// Homogeneous part on an edge.
    pub fn homogeneous(&self, edge: EdgeId, x: f64) -> f64 {
        let s = self.s;
        match self.graph.edge(edge).kind {
            EdgeKind::Internal { length, .. } => {
                self.alpha[edge.0] * (-s * x).exp() + self.beta[edge.0] * (-s * (length - x)).exp()
            }
            EdgeKind::External { .. } => self.alpha[edge.0] * (-s * x).exp(),
        }
    }

    /// Derivative of `u` at an edge end, pointing into the edge.
    pub fn inward_derivative(&self, inc: Incidence) -> f64 {
        let e = inc.edge.0;
        let hom = homogeneous_row(&self.graph, self.s, inc)
            .iter()
            .map(|&(k, coef)| coef * if k == 0 { self.alpha[e] } else { self.beta[e] })
            .sum::<f64>();
        let end = match inc.end {
            End::Start => 0,
            End::Finish => 1,
        };
        hom + self.particular_derivative[e][end]
    }

    /// Value of the homogeneous part at an edge end; `φ` vanishes there.
    pub fn end_value(&self, inc: Incidence) -> f64 {
        let x = self.graph.edge(inc.edge).coordinate_of(inc.end);
        self.homogeneous(inc.edge, x)
    }

    /// `n` equally spaced samples of `u` on an edge, endpoints included;
    /// external edges are sampled on `[0, reach]`.
    pub fn sample_edge(&self, edge: EdgeId, n: usize, reach: f64) -> Vec<(f64, f64)> {
        let len = self.graph.edge(edge).length().unwrap_or(reach);
        (0..n)
            .map(|k| {
                let x = if n > 1 { len * k as f64 / (n - 1) as f64 } else { 0.0 };
                let p = self.graph.point(edge, x).expect("coordinate inside the edge");
                (x, self.value(&p))
            })
            .collect()
    }
}

impl<F: GraphFunction> GraphFunction for ResolventSolution<F> {
    fn value(&self, p: &GraphPoint) -> f64 {
        ResolventSolution::value(self, p)
    }
    fn support_end(&self, _e: EdgeId) -> Option<f64> {
        None
    }
}

/// `(slot, coefficient)` pairs giving the homogeneous inward derivative at
/// an edge end; slot 0 is `α`, slot 1 is `β`.
fn homogeneous_row(g: &MetricGraph, s: f64, inc: Incidence) -> Vec<(usize, f64)> {
    match (g.edge(inc.edge).kind, inc.end) {
        (EdgeKind::Internal { length, .. }, End::Start) => {
            vec![(0, -s), (1, s * (-s * length).exp())]
        }
        (EdgeKind::Internal { length, .. }, End::Finish) => {
            vec![(0, s * (-s * length).exp()), (1, -s)]
        }
        (EdgeKind::External { .. }, _) => vec![(0, -s)],
    }
}

/// `(slot, coefficient)` pairs giving the homogeneous value at an edge end.
fn value_row(g: &MetricGraph, s: f64, inc: Incidence) -> Vec<(usize, f64)> {
    match (g.edge(inc.edge).kind, inc.end) {
        (EdgeKind::Internal { length, .. }, End::Start) => vec![(0, 1.0), (1, (-s * length).exp())],
        (EdgeKind::Internal { length, .. }, End::Finish) => vec![(0, (-s * length).exp()), (1, 1.0)],
        (EdgeKind::External { .. }, _) => vec![(0, 1.0)],
    }
}

fn on_edge<F: GraphFunction>(f: &F, edge: EdgeId) -> impl Fn(f64) -> f64 + '_ {
    move |y| f.value(&GraphPoint::Edge { edge, x: y })
}

fn external_reach<F: GraphFunction>(f: &F, edge: EdgeId, limit: f64) -> f64 {
    match f.support_end(edge) {
        Some(end) => end.max(0.0).min(limit),
        None => limit,
    }
}

/// Dirichlet particular part `φ` at `x` on an edge.
fn particular<F: GraphFunction>(g: &MetricGraph, f: &F, s: f64, edge: EdgeId, x: f64) -> f64 {
    let fy = on_edge(f, edge);
    match g.edge(edge).kind {
        EdgeKind::Internal { length, .. } => {
            if x <= 0.0 || x >= length {
                return 0.0;
            }
            let k = |y: f64| interval_kernel_closed(length, s, x, y) * fy(y);
            quad::integrate(k, 0.0, x, QUAD_TOL) + quad::integrate(k, x, length, QUAD_TOL)
        }
        EdgeKind::External { .. } => {
            if x <= 0.0 {
                return 0.0;
            }
            let hi = external_reach(f, edge, x + TAIL / s);
            let k = |y: f64| half_line_kernel(s, x, y) * fy(y);
            quad::integrate(k, 0.0, x.min(hi), QUAD_TOL) + quad::integrate(k, x, hi, QUAD_TOL)
        }
    }
}

/// Inward derivatives of `φ` at (start, finish).
fn particular_derivatives<F: GraphFunction>(g: &MetricGraph, f: &F, s: f64, edge: EdgeId) -> [f64; 2] {
    let fy = on_edge(f, edge);
    match g.edge(edge).kind {
        EdgeKind::Internal { length, .. } => [
            quad::integrate(|y| interval_boundary_derivative(length, s, y) * fy(y), 0.0, length, QUAD_TOL),
            quad::integrate(
                |y| interval_boundary_derivative(length, s, length - y) * fy(y),
                0.0,
                length,
                QUAD_TOL,
            ),
        ],
        EdgeKind::External { .. } => {
            let hi = external_reach(f, edge, TAIL / s);
            [quad::integrate(|y| half_line_boundary_derivative(s, y) * fy(y), 0.0, hi, QUAD_TOL), 0.0]
        }
    }
}

/// Solves `λu − ½u'' = f` with the Wentzell conditions of `data`.
pub fn solve_resolvent<F: GraphFunction>(
    g: &MetricGraph,
    data: &WentzellData,
    f: F,
    lambda: f64,
) -> Result<ResolventSolution<F>, ResolventError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ResolventError::BadLambda(lambda));
    }
    if data.vertex_count() != g.vertex_count() {
        return Err(ResolventError::DataMismatch {
            data: data.vertex_count(),
            graph: g.vertex_count(),
        });
    }
    let s = (2.0 * lambda).sqrt();

    // column layout: per edge α (and β if internal), then one U per vertex
    let mut col = Vec::with_capacity(g.edge_count());
    let mut n = 0;
    for e in g.edge_ids() {
        col.push(n);
        n += if g.edge(e).is_internal() { 2 } else { 1 };
    }
    let u_col = |v: usize| n + v;
    let size = n + g.vertex_count();

    let pd: Vec<[f64; 2]> = g.edge_ids().map(|e| particular_derivatives(g, &f, s, e)).collect();
    let end_index = |end: End| if end == End::Start { 0 } else { 1 };

    let mut m = DMatrix::<f64>::zeros(size, size);
    let mut rhs = DVector::<f64>::zeros(size);
    let mut row = 0;
    for v in g.vertices() {
        let vd = data.vertex(v);
        for inc in g.incidences(v) {
            for (k, coef) in value_row(g, s, *inc) {
                m[(row, col[inc.edge.0] + k)] += coef;
            }
            m[(row, u_col(v.0))] -= 1.0;
            row += 1;
        }
        m[(row, u_col(v.0))] = vd.a + vd.c * lambda;
        let mut r = vd.c * f.value(&GraphPoint::Vertex(v));
        for (inc, &b) in g.incidences(v).iter().zip(&vd.b) {
            if b == 0.0 {
                continue;
            }
            for (k, coef) in homogeneous_row(g, s, *inc) {
                m[(row, col[inc.edge.0] + k)] -= b * coef;
            }
            r += b * pd[inc.edge.0][end_index(inc.end)];
        }
        rhs[row] = r;
        row += 1;
    }
    debug_assert_eq!(row, size);

    let sv = m.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition < MAX_CONDITION) {
        return Err(ResolventError::Singular { condition });
    }
    let x = m.lu().solve(&rhs).ok_or(ResolventError::Singular { condition })?;

    let mut alpha = vec![0.0; g.edge_count()];
    let mut beta = vec![0.0; g.edge_count()];
    for e in g.edge_ids() {
        alpha[e.0] = x[col[e.0]];
        if g.edge(e).is_internal() {
            beta[e.0] = x[col[e.0] + 1];
        }
    }
    Ok(ResolventSolution {
        lambda,
        s,
        alpha,
        beta,
        vertex_values: (0..g.vertex_count()).map(|v| x[u_col(v)]).collect(),
        particular_derivative: pd,
        condition,
        graph: g.clone(),
        f,
    })
}

/// Residuals of the vertex conditions for a solved system.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainReport {
    /// `a u(v) − Σ b u'_l(v) + ½ c u''(v)` with `½u'' = λu − f`, per vertex.
    pub wentzell: Vec<f64>,
    /// Largest `|u_l(v) − u(v)|` over the incidences of each vertex.
    pub continuity: Vec<f64>,
}

impl DomainReport {
    pub fn max_wentzell(&self) -> f64 {
        self.wentzell.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn max_continuity(&self) -> f64 {
        self.continuity.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn max_residual(&self) -> f64 {
        self.max_wentzell().max(self.max_continuity())
    }
}

/// Evaluates the vertex conditions of `data` on a solution.
pub fn check_domain<F: GraphFunction, G: GraphFunction>(
    sol: &ResolventSolution<F>,
    data: &WentzellData,
    f: &G,
    lambda: f64,
) -> DomainReport {
    let g = &sol.graph;
    let mut wentzell = Vec::with_capacity(g.vertex_count());
    let mut continuity = Vec::with_capacity(g.vertex_count());
    for v in g.vertices() {
        let vd = data.vertex(v);
        let u = sol.vertex_values[v.0];
        let flux: f64 = g
            .incidences(v)
            .iter()
            .zip(&vd.b)
            .map(|(inc, b)| b * sol.inward_derivative(*inc))
            .sum();
        let half_second = lambda * u - f.value(&GraphPoint::Vertex(v));
        wentzell.push(vd.a * u - flux + vd.c * half_second);
        continuity.push(
            g.incidences(v)
                .iter()
                .map(|inc| (sol.end_value(*inc) - u).abs())
                .fold(0.0, f64::max),
        );
    }
    DomainReport { wentzell, continuity }
}

/// A function on a tadpole expansion, read back on the original graph.
pub struct ExpandedFunction<'a, F> {
    pub expansion: &'a TadpoleExpansion,
    pub f: F,
}

impl<F: GraphFunction> GraphFunction for ExpandedFunction<'_, F> {
    fn value(&self, p: &GraphPoint) -> f64 {
        self.f.value(&self.expansion.backward(p))
    }
    fn support_end(&self, e: EdgeId) -> Option<f64> {
        // external edges keep their names through the expansion
        let name = self.expansion.graph.edge_name(e);
        self.f.support_end(self.expansion.original.edge_id(name)?)
    }
}
