//! Monte Carlo estimators over pasted paths and their comparison with
//! reference values.
//!
//! Paths are split into fixed blocks. Blocks run on a worker pool and their
//! accumulators are merged in block order, so results do not depend on the
//! number of workers.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{EdgeId, GraphPoint, VertexId};
use crate::paste::{run_path, PastedProcessSpec, PathEnd, PathObserver, QuietMap, RunOptions};
use crate::resolvent::GraphFunction;
use crate::rng::derive_seed;
use crate::sv::{StarPoint, StepControl};

/// Paths per block of the parallel runner.
pub const BLOCK: u64 = 512;

/// `λT` below which the horizon cut is flagged.
pub const MIN_LAMBDA_T: f64 = 20.0;

#[derive(Debug, Error)]
pub enum McError {
    #[error("need at least 2 paths, got {0}")]
    TooFewPaths(u64),
    #[error("λ must be positive and finite, got {0}")]
    BadLambda(f64),
    #[error("no target vertices")]
    NoTargets,
    #[error("vertex {0} does not carry a shadow point")]
    NotConnected(String),
    #[error("could not start a worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: u64,
    pub seed: u64,
    pub h: f64,
    /// Set when `λT` is below [`MIN_LAMBDA_T`].
    pub truncated: bool,
}

impl Estimate {
    /// `(mean − reference) / stderr`; zero for an exact match with zero
    /// spread.
    pub fn z(&self, reference: f64) -> f64 {
        z_score(self.mean - reference, self.stderr)
    }
}

fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Running mean and sum of squared deviations.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Welford {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Welford) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * (self.n as f64 * o.n as f64 / n as f64);
        self.n = n;
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn estimate(&self, cfg: &McConfig, truncated: bool) -> Estimate {
        Estimate {
            mean: self.mean,
            stderr: self.stderr(),
            n_paths: self.n,
            seed: cfg.seed,
            h: cfg.ctl.h,
            truncated,
        }
    }
}

/// Accumulator that can absorb another one covering later paths.
pub trait Merge: Default + Send {
    fn merge(&mut self, later: Self);
}

impl Merge for Welford {
    fn merge(&mut self, later: Self) {
        Welford::merge(self, &later)
    }
}

impl Merge for Vec<Welford> {
    fn merge(&mut self, later: Self) {
        if self.is_empty() {
            *self = later;
        } else {
            for (a, b) in self.iter_mut().zip(&later) {
                a.merge(b);
            }
        }
    }
}

impl<T: Send> Merge for Vec<Option<T>> {
    fn merge(&mut self, mut later: Self) {
        self.append(&mut later);
    }
}

/// Runs `per_path` for paths `0..n` on `workers` threads (0 means one per
/// core) and merges block accumulators in path order.
pub fn run_paths<A, F>(n: u64, workers: usize, per_path: F) -> Result<A, McError>
where
    A: Merge,
    F: Fn(u64, &mut A) + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    let job = || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut acc = A::default();
                for path in b * BLOCK..((b + 1) * BLOCK).min(n) {
                    per_path(path, &mut acc);
                }
                acc
            })
            .collect::<Vec<A>>()
    };
    let parts = if workers == 1 {
        (0..blocks)
            .map(|b| {
                let mut acc = A::default();
                for path in b * BLOCK..((b + 1) * BLOCK).min(n) {
                    per_path(path, &mut acc);
                }
                acc
            })
            .collect()
    } else {
        rayon::ThreadPoolBuilder::new().num_threads(workers).build()?.install(job)
    };
    let mut total = A::default();
    for p in parts {
        total.merge(p);
    }
    Ok(total)
}

/// Shared Monte Carlo settings.
#[derive(Clone, Copy, Debug)]
pub struct McConfig {
    pub n_paths: u64,
    pub horizon: f64,
    pub seed: u64,
    pub workers: usize,
    pub ctl: StepControl,
}

impl McConfig {
    /// Adaptive refined steps with base `h`, all cores.
    pub fn new(n_paths: u64, horizon: f64, h: f64, seed: u64) -> Self {
        Self {
            n_paths,
            horizon,
            seed,
            workers: 0,
            ctl: StepControl::adaptive(h),
        }
    }

    pub fn with_ctl(mut self, ctl: StepControl) -> Self {
        self.ctl = ctl;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn check(&self) -> Result<(), McError> {
        if self.n_paths < 2 {
            return Err(McError::TooFewPaths(self.n_paths));
        }
        Ok(())
    }
}

fn check_lambda(lambda: f64) -> Result<(), McError> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(McError::BadLambda(lambda))
    }
}

/// Quiet distances for external rays, from a per-edge rule.
pub fn external_quiet_map(spec: &PastedProcessSpec, rule: impl Fn(EdgeId) -> Option<f64>) -> QuietMap {
    spec.graph
        .vertices()
        .map(|v| {
            (0..spec.dynamics[v.0].ray_count())
                .map(|ray| {
                    let inc = spec.ray_incidence(v, ray);
                    if spec.graph.edge(inc.edge).is_internal() {
                        None
                    } else {
                        rule(inc.edge)
                    }
                })
                .collect()
        })
        .collect()
}

/// `∫ e^{−λt} g(t) dt` over `[t0, t1]` for `g` linear between `f0` and `f1`.
pub fn exp_trapezoid(lambda: f64, t0: f64, t1: f64, f0: f64, f1: f64) -> f64 {
    let e0 = (-lambda * t0).exp();
    exp_trapezoid_from(lambda, t1 - t0, e0, (-lambda * t1).exp(), f0, f1)
}

/// As [`exp_trapezoid`] given the discount factors `e0, e1` at both ends.
fn exp_trapezoid_from(lambda: f64, dt: f64, e0: f64, e1: f64, f0: f64, f1: f64) -> f64 {
    if dt <= 0.0 || e0 == 0.0 || (f0 == 0.0 && f1 == 0.0) {
        return 0.0;
    }
    let x = lambda * dt;
    // I0 = (1 − e^{−x}) / λ, I1 = (1 − e^{−x}(1 + x)) / λ², by series near 0
    let (i0, i1) = if x < 1e-3 {
        (
            dt * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0),
            dt * dt * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0),
        )
    } else {
        let decay = e1 / e0;
        ((1.0 - decay) / lambda, (1.0 - decay * (1.0 + x)) / (lambda * lambda))
    };
    e0 * (f0 * i0 + (f1 - f0) * i1 / dt)
}

struct Discounted<'a, F> {
    f: &'a F,
    lambda: f64,
    // time, f and discount factor at the previous knot
    last: Option<(f64, f64, f64)>,
    sum: f64,
}

impl<F: GraphFunction> PathObserver for Discounted<'_, F> {
    fn knot(&mut self, t: f64, _star: VertexId, _p: StarPoint, x: GraphPoint) {
        let fx = self.f.value(&x);
        let e = (-self.lambda * t).exp();
        if let Some((t0, f0, e0)) = self.last {
            self.sum += exp_trapezoid_from(self.lambda, t - t0, e0, e, f0, fx);
        }
        self.last = Some((t, fx, e));
    }
}

/// `E_ξ ∫₀^{ζ∧T} e^{−λt} f(X_t) dt`, by the exponentially weighted
/// trapezoid rule between the knots of each path. External edges are
/// skipped by exact first-passage jumps beyond the support of `f`.
pub fn estimate_resolvent<F: GraphFunction>(
    spec: &PastedProcessSpec,
    start: &GraphPoint,
    f: &F,
    lambda: f64,
    cfg: &McConfig,
) -> Result<Estimate, McError> {
    cfg.check()?;
    check_lambda(lambda)?;
    let quiet = external_quiet_map(spec, |e| f.support_end(e));
    let opts = RunOptions {
        quiet: Some(&quiet),
        ..Default::default()
    };
    let acc: Welford = run_paths(cfg.n_paths, cfg.workers, |path, acc: &mut Welford| {
        let mut obs = Discounted {
            f,
            lambda,
            last: None,
            sum: 0.0,
        };
        run_path(spec, start, cfg.horizon, &cfg.ctl, cfg.seed, path, opts, &mut obs);
        acc.push(obs.sum);
    })?;
    Ok(acc.estimate(cfg, lambda * cfg.horizon < MIN_LAMBDA_T))
}

/// `E_ξ[e^{−λH}; first target reached is w]` for every target `w`.
/// Paths reaching no target before the horizon contribute 0.
pub fn estimate_hitting_lt(
    spec: &PastedProcessSpec,
    start: &GraphPoint,
    lambda: f64,
    targets: &[VertexId],
    cfg: &McConfig,
) -> Result<Vec<(VertexId, Estimate)>, McError> {
    cfg.check()?;
    check_lambda(lambda)?;
    if targets.is_empty() {
        return Err(McError::NoTargets);
    }
    let mut halt = vec![false; spec.graph.vertex_count()];
    for t in targets {
        halt[t.0] = true;
    }
    // beyond the start the path only needs to come back; elsewhere on
    // external edges only the time to reach the vertex matters
    let start_edge = match *start {
        GraphPoint::Edge { edge, x } => Some((edge, x)),
        GraphPoint::Vertex(_) => None,
    };
    let quiet = external_quiet_map(spec, |e| match start_edge {
        Some((se, x)) if se == e => Some(x),
        _ => Some(0.0),
    });
    let opts = RunOptions {
        quiet: Some(&quiet),
        halt: Some(&halt),
        ..Default::default()
    };
    let acc: Vec<Welford> = run_paths(cfg.n_paths, cfg.workers, |path, acc: &mut Vec<Welford>| {
        if acc.is_empty() {
            acc.resize(targets.len(), Welford::default());
        }
        let out = run_path(spec, start, cfg.horizon, &cfg.ctl, cfg.seed, path, opts, &mut ());
        let hit = match out.end {
            PathEnd::Halted { t, v } => Some((v, (-lambda * t).exp())),
            _ => None,
        };
        for (k, w) in targets.iter().enumerate() {
            acc[k].push(match hit {
                Some((v, x)) if v == *w => x,
                _ => 0.0,
            });
        }
    })?;
    let truncated = lambda * cfg.horizon < MIN_LAMBDA_T;
    Ok(targets
        .iter()
        .zip(acc)
        .map(|(w, a)| (*w, a.estimate(cfg, truncated)))
        .collect())
}

/// Samples of `(S_n, K_n)` from a start vertex, `None` when the path dies
/// or reaches the horizon first.
pub fn chain_samples(
    spec: &PastedProcessSpec,
    v: VertexId,
    steps: usize,
    cfg: &McConfig,
) -> Result<Vec<Option<(f64, VertexId)>>, McError> {
    cfg.check()?;
    if !spec.connected.contains(&v) {
        return Err(McError::NotConnected(spec.graph.vertex_name(v).to_string()));
    }
    // positions on external edges never matter for the chain
    let quiet = external_quiet_map(spec, |_| Some(0.0));
    let opts = RunOptions {
        quiet: Some(&quiet),
        max_crossovers: Some(steps),
        ..Default::default()
    };
    let start = GraphPoint::Vertex(v);
    run_paths(cfg.n_paths, cfg.workers, |path, acc: &mut Vec<Option<(f64, VertexId)>>| {
        let out = run_path(spec, &start, cfg.horizon, &cfg.ctl, cfg.seed, path, opts, &mut ());
        acc.push(match out.end {
            PathEnd::Halted { t, v } if out.crossovers == steps => Some((t, v)),
            _ => None,
        });
    })
}

/// One-step kernel of the crossover chain from a vertex.
#[derive(Clone, Debug)]
pub struct EmpiricalChainKernel {
    pub start: VertexId,
    pub samples: Vec<Option<(f64, VertexId)>>,
    /// Targets, in the order of `histogram` and the rows of `laplace`.
    pub targets: Vec<VertexId>,
    /// Fraction of paths with `K_1 = w`, per target.
    pub histogram: Vec<f64>,
    /// Fraction of paths with no crossover before death or the horizon.
    pub lost: f64,
    pub lambdas: Vec<f64>,
    /// `E[e^{−λS_1}; K_1 = w]`, indexed `[target][λ]`.
    pub laplace: Vec<Vec<Welford>>,
}

impl EmpiricalChainKernel {
    pub fn from_samples(
        start: VertexId,
        targets: &[VertexId],
        lambdas: &[f64],
        samples: Vec<Option<(f64, VertexId)>>,
    ) -> Self {
        let n = samples.len() as f64;
        let mut histogram = vec![0.0; targets.len()];
        let mut laplace = vec![vec![Welford::default(); lambdas.len()]; targets.len()];
        let mut lost = 0.0;
        for s in &samples {
            if s.is_none() {
                lost += 1.0;
            }
            for (k, w) in targets.iter().enumerate() {
                let hit = s.filter(|(_, v)| v == w);
                if hit.is_some() {
                    histogram[k] += 1.0;
                }
                for (j, &l) in lambdas.iter().enumerate() {
                    laplace[k][j].push(hit.map_or(0.0, |(t, _)| (-l * t).exp()));
                }
            }
        }
        for x in &mut histogram {
            *x /= n;
        }
        Self {
            start,
            samples,
            targets: targets.to_vec(),
            histogram,
            lost: lost / n,
            lambdas: lambdas.to_vec(),
            laplace,
        }
    }

    /// Total mass of the histogram plus lost paths.
    pub fn mass(&self) -> f64 {
        self.histogram.iter().sum::<f64>() + self.lost
    }
}

/// Samples the one-step crossover kernel from `v`.
pub fn chain_kernel(
    spec: &PastedProcessSpec,
    v: VertexId,
    lambdas: &[f64],
    cfg: &McConfig,
) -> Result<EmpiricalChainKernel, McError> {
    let samples = chain_samples(spec, v, 1, cfg)?;
    Ok(EmpiricalChainKernel::from_samples(v, &spec.connected, lambdas, samples))
}

/// One `(λ, g = 1{w})` comparison of the semigroup test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CkRow {
    pub lambda: f64,
    pub target: String,
    /// `E_v[e^{−λS_2}; K_2 = w]`.
    pub two_step: f64,
    pub two_step_se: f64,
    /// `Σ_u E_v[e^{−λS_1}; K_1 = u] E_u[e^{−λS_1}; K_1 = w]`.
    pub composed: f64,
    pub composed_se: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CkReport {
    pub rows: Vec<CkRow>,
    /// Rows lacking any crossover in either side.
    pub starved: usize,
}

impl CkReport {
    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.z.abs()))
    }
}

/// Semigroup test of the crossover chain started at `v`: the two-step
/// Laplace functional sampled under `two_step` against the composition of
/// one-step kernels sampled under `one_step`. Each kernel uses its own
/// batch of paths. The composed standard error is the delta-method value.
pub fn ck_test(
    one_step: &PastedProcessSpec,
    two_step: &PastedProcessSpec,
    v: VertexId,
    lambdas: &[f64],
    cfg: &McConfig,
) -> Result<CkReport, McError> {
    let targets = one_step.connected.clone();
    let batch = |tag: u64| cfg.with_seed(derive_seed(cfg.seed, tag));
    let first = chain_kernel(one_step, v, lambdas, &batch(0))?;
    let mut next = Vec::with_capacity(targets.len());
    for (k, &u) in targets.iter().enumerate() {
        next.push(chain_kernel(one_step, u, lambdas, &batch(1 + k as u64))?);
    }
    let pair = chain_samples(two_step, v, 2, &batch(1000))?;
    let pair = EmpiricalChainKernel::from_samples(v, &targets, lambdas, pair);

    let mut rows = Vec::new();
    let mut starved = 0;
    for (j, &lambda) in lambdas.iter().enumerate() {
        for (w, &target) in targets.iter().enumerate() {
            let b: Vec<f64> = next.iter().map(|k| k.laplace[w][j].mean).collect();
            let composed: f64 = (0..targets.len()).map(|u| first.laplace[u][j].mean * b[u]).sum();
            // first batch: per path b_{K_1} e^{−λ S_1}
            let mut y = Welford::default();
            for s in &first.samples {
                y.push(s.map_or(0.0, |(t, k)| {
                    let u = targets.iter().position(|x| *x == k).expect("crossover targets lie in V_c");
                    b[u] * (-lambda * t).exp()
                }));
            }
            let var_b: f64 = (0..targets.len())
                .map(|u| first.laplace[u][j].mean.powi(2) * next[u].laplace[w][j].stderr().powi(2))
                .sum();
            let composed_se = (y.stderr().powi(2) + var_b).sqrt();
            let two = &pair.laplace[w][j];
            if composed_se == 0.0 && two.stderr() == 0.0 {
                starved += 1;
            }
            let se = (composed_se.powi(2) + two.stderr().powi(2)).sqrt();
            rows.push(CkRow {
                lambda,
                target: one_step.graph.vertex_name(target).to_string(),
                two_step: two.mean,
                two_step_se: two.stderr(),
                composed,
                composed_se,
                z: z_score(two.mean - composed, se),
            });
        }
    }
    Ok(CkReport { rows, starved })
}

/// One row of the report CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub experiment_id: String,
    pub quantity: String,
    pub reference: f64,
    pub mean: f64,
    pub stderr: f64,
    pub z: f64,
    pub n_paths: u64,
    pub h: f64,
    pub seed: u64,
    pub pass: bool,
}

/// Sum of two per-target estimates taken from the same paths. At most one
/// of the two is nonzero on any path, so `Σ(x + y)² = Σx² + Σy²` and the
/// standard error of the sum follows from the parts exactly.
pub fn sum_disjoint(a: &Estimate, b: &Estimate) -> Estimate {
    let n = a.n_paths as f64;
    let var = a.stderr.powi(2) + b.stderr.powi(2) - 2.0 * a.mean * b.mean / (n - 1.0);
    Estimate {
        mean: a.mean + b.mean,
        stderr: var.max(0.0).sqrt(),
        ..*a
    }
}

/// Checks an estimate against a reference: it passes iff
/// `|mean − reference| ≤ max(sigma · stderr, floor)`.
pub fn compare(
    experiment_id: &str,
    quantity: &str,
    reference: f64,
    est: &Estimate,
    sigma: f64,
    floor: f64,
) -> ReportRow {
    let diff = (est.mean - reference).abs();
    ReportRow {
        experiment_id: experiment_id.to_string(),
        quantity: quantity.to_string(),
        reference,
        mean: est.mean,
        stderr: est.stderr,
        z: est.z(reference),
        n_paths: est.n_paths,
        h: est.h,
        seed: est.seed,
        pass: diff <= (sigma * est.stderr).max(floor),
    }
}

/// Bias floor `2 C h` for an estimator with bias constant `C`.
pub fn bias_floor(c: f64, h: f64) -> f64 {
    2.0 * c * h
}

pub fn write_report<W: Write>(rows: &[ReportRow], out: W) -> Result<(), McError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// One-sample Kolmogorov–Smirnov statistic and asymptotic p-value against
/// a continuous distribution function.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sn = n.sqrt();
    (d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d))
}

/// `P(K > x)` for the Kolmogorov distribution.
fn kolmogorov_q(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        sum += if k as i64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
