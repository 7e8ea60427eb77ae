//! Functions on a graph used as resolvent right-hand sides.
//!
//! Built-in families, by their command-line ids:
//!
//! * `const:<c>`: the constant `c`.
//! * `bump:<point>:<w>`: `φ(d / w)` where `d` is the graph distance to
//!   `<point>` and `φ(u) = exp(1 − 1/(1 − u²))` for `|u| < 1`, else 0. The
//!   peak value is 1.
//! * `plateau:<point>:<r>:<w>`: 1 within distance `r` of `<point>`,
//!   falling to 0 over a further distance `w` along the smoothstep
//!   `1 − 3u² + 2u³`.
//!
//! `<point>` is a vertex id or `edge@x`.

use thiserror::Error;

use crate::graph::{EdgeId, EdgeKind, GraphError, GraphPoint, MetricGraph};

/// A bounded function on the points of a graph.
pub trait GraphFunction: Sync {
    fn value(&self, p: &GraphPoint) -> f64;

    /// Distance along external edge `e` beyond which the function vanishes.
    fn support_end(&self, _e: EdgeId) -> Option<f64> {
        None
    }
}

impl<T: GraphFunction + ?Sized> GraphFunction for &T {
    fn value(&self, p: &GraphPoint) -> f64 {
        (**self).value(p)
    }
    fn support_end(&self, e: EdgeId) -> Option<f64> {
        (**self).support_end(e)
    }
}

/// Wraps a closure as a function without support information.
#[derive(Clone, Copy, Debug)]
pub struct FromFn<F>(pub F);

impl<F: Fn(&GraphPoint) -> f64 + Sync> GraphFunction for FromFn<F> {
    fn value(&self, p: &GraphPoint) -> f64 {
        (self.0)(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constant(pub f64);

impl GraphFunction for Constant {
    fn value(&self, _p: &GraphPoint) -> f64 {
        self.0
    }
}

/// Distances from a fixed center point, precomputed to every vertex.
#[derive(Clone, Debug)]
struct Radial {
    center: GraphPoint,
    to_vertex: Vec<f64>,
    edges: Vec<EdgeKind>,
}

impl Radial {
    fn new(g: &MetricGraph, center: GraphPoint) -> Self {
        let to_vertex = g
            .vertices()
            .map(|v| g.distance(&center, &GraphPoint::Vertex(v)))
            .collect();
        Self {
            center,
            to_vertex,
            edges: g.edge_ids().map(|e| g.edge(e).kind).collect(),
        }
    }

    fn distance(&self, p: &GraphPoint) -> f64 {
        match *p {
            GraphPoint::Vertex(v) => self.to_vertex[v.0],
            GraphPoint::Edge { edge, x } => {
                let mut d = match self.edges[edge.0] {
                    EdgeKind::Internal { from, to, length } => {
                        (self.to_vertex[from.0] + x).min(self.to_vertex[to.0] + length - x)
                    }
                    EdgeKind::External { from } => self.to_vertex[from.0] + x,
                };
                if let GraphPoint::Edge { edge: ce, x: cx } = self.center {
                    if ce == edge {
                        d = d.min((x - cx).abs());
                    }
                }
                d
            }
        }
    }

    /// Largest coordinate on external edge `e` within distance `reach`.
    fn reach_on(&self, e: EdgeId, reach: f64) -> Option<f64> {
        match self.edges[e.0] {
            EdgeKind::External { from } => {
                let mut end = (reach - self.to_vertex[from.0]).max(0.0);
                if let GraphPoint::Edge { edge, x } = self.center {
                    if edge == e {
                        end = end.max(x + reach);
                    }
                }
                Some(end)
            }
            EdgeKind::Internal { .. } => None,
        }
    }
}

/// Smooth compactly supported bump, peak 1 at the center.
#[derive(Clone, Debug)]
pub struct Bump {
    radial: Radial,
    pub width: f64,
}

impl Bump {
    pub fn new(g: &MetricGraph, center: GraphPoint, width: f64) -> Self {
        Self {
            radial: Radial::new(g, center),
            width,
        }
    }

    pub fn profile(u: f64) -> f64 {
        if u.abs() < 1.0 {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        } else {
            0.0
        }
    }
}

impl GraphFunction for Bump {
    fn value(&self, p: &GraphPoint) -> f64 {
        Self::profile(self.radial.distance(p) / self.width)
    }
    fn support_end(&self, e: EdgeId) -> Option<f64> {
        self.radial.reach_on(e, self.width)
    }
}

/// Smoothed indicator of a ball.
#[derive(Clone, Debug)]
pub struct Plateau {
    radial: Radial,
    pub radius: f64,
    pub width: f64,
}

impl Plateau {
    pub fn new(g: &MetricGraph, center: GraphPoint, radius: f64, width: f64) -> Self {
        Self {
            radial: Radial::new(g, center),
            radius,
            width,
        }
    }
}

impl GraphFunction for Plateau {
    fn value(&self, p: &GraphPoint) -> f64 {
        let d = self.radial.distance(p);
        if d <= self.radius {
            1.0
        } else if d >= self.radius + self.width {
            0.0
        } else {
            let u = (d - self.radius) / self.width;
            1.0 - u * u * (3.0 - 2.0 * u)
        }
    }
    fn support_end(&self, e: EdgeId) -> Option<f64> {
        self.radial.reach_on(e, self.radius + self.width)
    }
}

/// One of the built-in families.
#[derive(Clone, Debug)]
pub enum BuiltinFunction {
    Constant(Constant),
    Bump(Bump),
    Plateau(Plateau),
}

impl GraphFunction for BuiltinFunction {
    fn value(&self, p: &GraphPoint) -> f64 {
        match self {
            Self::Constant(f) => f.value(p),
            Self::Bump(f) => f.value(p),
            Self::Plateau(f) => f.value(p),
        }
    }
    fn support_end(&self, e: EdgeId) -> Option<f64> {
        match self {
            Self::Constant(f) => f.support_end(e),
            Self::Bump(f) => f.support_end(e),
            Self::Plateau(f) => f.support_end(e),
        }
    }
}

#[derive(Debug, Error)]
pub enum FunctionError {
    #[error("unknown function family `{0}` (expected const, bump or plateau)")]
    UnknownFamily(String),
    #[error("`{0}`: wrong number of parameters")]
    Arity(String),
    #[error("`{0}` is not a number")]
    Number(String),
    #[error("parameters must be positive")]
    NonPositive,
    #[error(transparent)]
    Point(#[from] GraphError),
}

/// Parses a built-in function id against a graph.
pub fn parse_function(g: &MetricGraph, id: &str) -> Result<BuiltinFunction, FunctionError> {
    let parts: Vec<&str> = id.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| FunctionError::Number(s.to_string()));
    let positive = |x: f64| if x > 0.0 { Ok(x) } else { Err(FunctionError::NonPositive) };
    match parts[0] {
        "const" if parts.len() == 2 => Ok(BuiltinFunction::Constant(Constant(num(parts[1])?))),
        "bump" if parts.len() == 3 => Ok(BuiltinFunction::Bump(Bump::new(
            g,
            g.parse_point(parts[1])?,
            positive(num(parts[2])?)?,
        ))),
        "plateau" if parts.len() == 4 => Ok(BuiltinFunction::Plateau(Plateau::new(
            g,
            g.parse_point(parts[1])?,
            num(parts[2])?.max(0.0),
            positive(num(parts[3])?)?,
        ))),
        "const" | "bump" | "plateau" => Err(FunctionError::Arity(id.to_string())),
        other => Err(FunctionError::UnknownFamily(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph() -> MetricGraph {
        MetricGraph::builder("g")
            .vertex("v1")
            .vertex("v2")
            .internal("i", "v1", "v2", 1.0)
            .external("e1", "v1")
            .external("e2", "v2")
            .build()
            .unwrap()
    }

    #[test]
    fn bump_values_and_support() {
        let g = graph();
        let f = parse_function(&g, "bump:i@0.3:0.6").unwrap();
        let at = |s: &str| f.value(&g.parse_point(s).unwrap());
        assert_eq!(at("i@0.3"), 1.0);
        assert!((at("v1") - (1.0f64 - 1.0 / (1.0 - 0.25)).exp()).abs() < 1e-15);
        assert_eq!(at("v2"), 0.0);
        assert!((at("e1@0.1") - at("i@0.7")).abs() < 1e-15);
        let e1 = g.edge_id("e1").unwrap();
        let e2 = g.edge_id("e2").unwrap();
        assert!((f.support_end(e1).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(f.support_end(e2), Some(0.0));
    }

    #[test]
    fn plateau_is_one_inside_and_zero_outside() {
        let g = graph();
        let f = parse_function(&g, "plateau:v1:0.2:0.3").unwrap();
        let at = |s: &str| f.value(&g.parse_point(s).unwrap());
        assert_eq!(at("e1@0.2"), 1.0);
        assert_eq!(at("i@0.6"), 0.0);
        assert!((at("i@0.35") - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_malformed_ids() {
        let g = graph();
        assert!(matches!(parse_function(&g, "sine:1"), Err(FunctionError::UnknownFamily(_))));
        assert!(matches!(parse_function(&g, "bump:i@0.3"), Err(FunctionError::Arity(_))));
        assert!(matches!(parse_function(&g, "const:x"), Err(FunctionError::Number(_))));
        assert!(parse_function(&g, "bump:i@3:1").is_err());
    }
}
