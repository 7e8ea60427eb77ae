//! Closed-form kernels of Brownian motion on a single edge killed at its
//! endpoints, and hitting Laplace transforms. `s = sqrt(2λ)` throughout.

use crate::graph::{EdgeId, EdgeKind, GraphPoint, MetricGraph, VertexId};

/// Number of image pairs kept on each side for an edge of length `a`; the
/// neglected tail `4 e^{−2saK} / (s (1 − e^{−2sa}))` is below `1e-13`.
pub fn image_terms(s: f64, a: f64) -> usize {
    let q = 2.0 * s * a;
    let log_prefactor = (4.0 / (s * -(-q).exp_m1())).ln();
    ((log_prefactor + 13.0 * std::f64::consts::LN_10) / q).ceil().max(1.0) as usize
}

/// Resolvent density of the killed motion on `[0, a]`, by the image series.
pub fn interval_kernel(a: f64, s: f64, x: f64, y: f64) -> f64 {
    interval_kernel_terms(a, s, x, y, image_terms(s, a))
}

/// As [`interval_kernel`] with an explicit number of image pairs.
pub fn interval_kernel_terms(a: f64, s: f64, x: f64, y: f64, k_max: usize) -> f64 {
    if x <= 0.0 || x >= a || y <= 0.0 || y >= a {
        return 0.0;
    }
    let k_max = k_max as i64;
    let mut sum = 0.0;
    for k in -k_max..=k_max {
        let shift = 2.0 * k as f64 * a;
        sum += (-s * (x - y + shift).abs()).exp() - (-s * (x + y + shift).abs()).exp();
    }
    sum / s
}

/// Resolvent density of the killed motion on `[0, ∞)`.
pub fn half_line_kernel(s: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 || y <= 0.0 {
        return 0.0;
    }
    ((-s * (x - y).abs()).exp() - (-s * (x + y)).exp()) / s
}

/// Dirichlet kernel of an edge at local coordinates `x, y`.
pub fn dirichlet_kernel(g: &MetricGraph, edge: EdgeId, lambda: f64, x: f64, y: f64) -> f64 {
    let s = (2.0 * lambda).sqrt();
    match g.edge(edge).kind {
        EdgeKind::Internal { length, .. } => interval_kernel(length, s, x, y),
        EdgeKind::External { .. } => half_line_kernel(s, x, y),
    }
}

/// The interval kernel in product form, written with decaying exponentials.
/// Agrees with the image series; cheaper inside quadrature loops.
pub fn interval_kernel_closed(a: f64, s: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 || x >= a || y <= 0.0 || y >= a {
        return 0.0;
    }
    let (d, m) = ((x - y).abs(), x + y);
    let e = |u: f64| (-s * u).exp();
    (e(d) - e(m) - e(2.0 * a - m) + e(2.0 * a - d)) / (s * -(-2.0 * s * a).exp_m1())
}

/// `∂_x` of the interval kernel at `x = 0+`: `2 sinh(s(a−y)) / sinh(sa)`.
pub fn interval_boundary_derivative(a: f64, s: f64, y: f64) -> f64 {
    2.0 * ((-s * y).exp() - (-s * (2.0 * a - y)).exp()) / -(-2.0 * s * a).exp_m1()
}

/// `∂_x` of the half-line kernel at `x = 0+`.
pub fn half_line_boundary_derivative(s: f64, y: f64) -> f64 {
    2.0 * (-s * y).exp()
}

/// Laplace transform of the time to reach the vertices, split by the
/// vertex reached first.
pub fn hitting_lt(g: &MetricGraph, p: &GraphPoint, lambda: f64) -> Vec<(VertexId, f64)> {
    let s = (2.0 * lambda).sqrt();
    match *p {
        GraphPoint::Vertex(v) => vec![(v, 1.0)],
        GraphPoint::Edge { edge, x } => match g.edge(edge).kind {
            EdgeKind::Internal { from, to, length } => {
                let (near, far) = interval_hitting(length, s, x);
                if from == to {
                    vec![(from, near + far)]
                } else {
                    vec![(from, near), (to, far)]
                }
            }
            EdgeKind::External { from } => vec![(from, (-s * x).exp())],
        },
    }
}

/// `(E e^{-λH_0}; H_0 < H_a, E e^{-λH_a}; H_a < H_0)` from `x ∈ [0, a]`,
/// written with decaying exponentials only.
pub fn interval_hitting(a: f64, s: f64, x: f64) -> (f64, f64) {
    let d = 1.0 - (-2.0 * s * a).exp();
    let ratio = |u: f64| ((-s * (a - u)).exp() - (-s * (a + u)).exp()) / d;
    (ratio(a - x), ratio(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_form(a: f64, s: f64, x: f64, y: f64) -> f64 {
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        2.0 * (s * lo).sinh() * (s * (a - hi)).sinh() / (s * (s * a).sinh())
    }

    #[test]
    fn unit_values() {
        let ext = half_line_kernel(1.0, 1.0, 2.0);
        assert!((ext - ((-1.0f64).exp() - (-3.0f64).exp())).abs() < 1e-15);
        assert!((ext - 0.318092).abs() < 5e-7);
        let int = interval_kernel(1.0, 1.0, 0.5, 0.5);
        assert!((int - 0.5f64.tanh()).abs() < 1e-12);
        assert!((int - 2.0 * 0.5f64.sinh().powi(2) / 1.0f64.sinh()).abs() < 1e-12);
        assert!((int - 0.462117).abs() < 5e-7);
    }

    #[test]
    fn image_series_matches_product_form() {
        for &(a, s) in &[(1.0, 1.0), (0.3, 0.2), (2.5, 3.0), (0.05, 0.7)] {
            for &(fx, fy) in &[(0.1, 0.9), (0.5, 0.5), (0.77, 0.2), (0.01, 0.99)] {
                let (x, y) = (fx * a, fy * a);
                let d = interval_kernel(a, s, x, y) - closed_form(a, s, x, y);
                assert!(d.abs() < 1e-12, "a={a} s={s}: {d}");
                let d = interval_kernel_closed(a, s, x, y) - closed_form(a, s, x, y);
                assert!(d.abs() < 1e-12, "closed a={a} s={s}: {d}");
            }
        }
    }

    #[test]
    fn boundary_derivative_matches_product_form() {
        let (a, s): (f64, f64) = (1.3, 0.8);
        for y in [0.05, 0.4, 1.1] {
            let exact = 2.0 * (s * (a - y)).sinh() / (s * a).sinh();
            assert!((interval_boundary_derivative(a, s, y) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn hitting_weights() {
        let (l, r) = interval_hitting(1.0, 1.0, 0.5);
        let v = 0.5f64.sinh() / 1.0f64.sinh();
        assert!((l - v).abs() < 1e-15 && (r - v).abs() < 1e-15);
        assert!((v - 0.443409).abs() < 5e-7);
        assert_eq!(interval_hitting(1.0, 3.0, 0.0), (1.0, 0.0));
    }
}
