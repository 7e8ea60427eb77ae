//! The pasted process on a whole graph.
//!
//! A path runs the star process of one vertex until it reaches a shadow
//! point. It then restarts, at the same time, as the star process of the
//! vertex the shadow point stands for. The times and vertices of these
//! hand-overs form the crossover chain `(S_n, K_n)`.

use std::io::Write;

use thiserror::Error;

use crate::graph::{
    decompose_to_stars, EdgeId, EdgeKind, End, GraphError, GraphPoint, Incidence, MetricGraph,
    RayKind, StarDecomposition, VertexId,
};
use crate::rng::stream;
use crate::sv::{run_star, StarDynamics, StarEnd, StarObserver, StarPoint, StarRun, StepControl};
use crate::wentzell::{VertexRegime, WentzellData};

#[derive(Debug, Error)]
pub enum PasteError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("data has {data} vertices but the graph has {graph}")]
    DataMismatch { data: usize, graph: usize },
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug)]
struct RayMap {
    edge: EdgeId,
    end: End,
    /// Shadow distance and κ-target for internal rays.
    shadow: Option<(f64, VertexId)>,
}

/// Everything needed to sample the pasted process; immutable and shared by
/// all paths.
#[derive(Clone, Debug)]
pub struct PastedProcessSpec {
    pub graph: MetricGraph,
    pub data: WentzellData,
    pub stars: StarDecomposition,
    /// Star dynamics, indexed by vertex.
    pub dynamics: Vec<StarDynamics>,
    /// `V_c`: vertices carrying at least one shadow point, sorted.
    pub connected: Vec<VertexId>,
    rays: Vec<Vec<RayMap>>,
}

/// Builds the pasting blueprint of a tadpole-free graph.
pub fn build_process(g: &MetricGraph, data: &WentzellData) -> Result<PastedProcessSpec, PasteError> {
    if data.vertex_count() != g.vertex_count() {
        return Err(PasteError::DataMismatch {
            data: data.vertex_count(),
            graph: g.vertex_count(),
        });
    }
    let stars = decompose_to_stars(g)?;
    let mut dynamics = Vec::with_capacity(g.vertex_count());
    let mut rays = Vec::with_capacity(g.vertex_count());
    for v in g.vertices() {
        let star = stars.star(v);
        let stops = star.rays.iter().map(|r| r.shadow().map(|(d, _)| d)).collect();
        dynamics.push(StarDynamics::new(data.classify(v), stops));
        rays.push(
            star.rays
                .iter()
                .map(|r| RayMap {
                    edge: r.incidence.edge,
                    end: r.incidence.end,
                    shadow: match r.kind {
                        RayKind::Internal { length, target } => Some((length, target)),
                        RayKind::External => None,
                    },
                })
                .collect(),
        );
    }
    let connected = stars.connected();
    Ok(PastedProcessSpec {
        graph: g.clone(),
        data: data.clone(),
        stars,
        dynamics,
        connected,
        rays,
    })
}

impl PastedProcessSpec {
    pub fn regime(&self, v: VertexId) -> &VertexRegime {
        &self.dynamics[v.0].regime
    }

    pub fn stop_count(&self, v: VertexId) -> usize {
        self.dynamics[v.0].stops.iter().flatten().count()
    }

    /// Star and star coordinates a path started at `p` begins with: the
    /// nearer endpoint of an internal edge, ties going to the initial
    /// vertex.
    pub fn start_star(&self, p: &GraphPoint) -> (VertexId, StarPoint) {
        self.start_star_at(p, None)
    }

    /// As [`start_star`](Self::start_star), with the star of an internal
    /// edge chosen by `end` when given.
    pub fn start_star_at(&self, p: &GraphPoint, end: Option<End>) -> (VertexId, StarPoint) {
        match *p {
            GraphPoint::Vertex(v) => (v, StarPoint::VERTEX),
            GraphPoint::Edge { edge, x } => match self.graph.edge(edge).kind {
                EdgeKind::Internal { from, to, length } => {
                    let near_start = end.map_or(x <= 0.5 * length, |e| e == End::Start);
                    if near_start {
                        (from, StarPoint::new(self.ray_of(from, edge, End::Start), x))
                    } else {
                        (to, StarPoint::new(self.ray_of(to, edge, End::Finish), length - x))
                    }
                }
                EdgeKind::External { from } => {
                    (from, StarPoint::new(self.ray_of(from, edge, End::Start), x))
                }
            },
        }
    }

    fn ray_of(&self, v: VertexId, edge: EdgeId, end: End) -> usize {
        self.rays[v.0]
            .iter()
            .position(|r| r.edge == edge && r.end == end)
            .expect("edge is incident with its endpoint")
    }

    /// Edge and end carried by a ray of the star at `v`.
    pub fn ray_incidence(&self, v: VertexId, ray: usize) -> Incidence {
        let r = self.rays[v.0][ray];
        Incidence {
            edge: r.edge,
            end: r.end,
        }
    }

    /// κ-target of the shadow point on a ray, if it has one.
    pub fn kappa(&self, v: VertexId, ray: usize) -> Option<VertexId> {
        self.rays[v.0][ray].shadow.map(|(_, k)| k)
    }

    /// Global point of a star point of the star at `v`.
    pub fn to_global(&self, v: VertexId, p: StarPoint) -> GraphPoint {
        if p.is_vertex() {
            return GraphPoint::Vertex(v);
        }
        let ray = self.rays[v.0][p.ray];
        match ray.shadow {
            Some((len, target)) => {
                if p.r >= len - crate::graph::ENDPOINT_TOL * len.max(1.0) {
                    return GraphPoint::Vertex(target);
                }
                let x = match ray.end {
                    End::Start => p.r,
                    End::Finish => len - p.r,
                };
                GraphPoint::Edge { edge: ray.edge, x }
            }
            None => GraphPoint::Edge {
                edge: ray.edge,
                x: p.r,
            },
        }
    }
}

/// Per-star, per-ray distances beyond which a run may skip ahead with an
/// exact first-passage jump (see [`StarRun::quiet`]).
pub type QuietMap = Vec<Vec<Option<f64>>>;

/// Extra controls for [`run_path`].
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions<'a> {
    pub quiet: Option<&'a QuietMap>,
    /// Vertices at which the run halts on arrival, indexed by vertex.
    pub halt: Option<&'a [bool]>,
    /// Halt at the crossover with this index.
    pub max_crossovers: Option<usize>,
    /// End of an internal start edge whose star begins the path; the
    /// nearer end by default.
    pub start_end: Option<End>,
}

/// Receives a pasted path.
pub trait PathObserver {
    fn knot(&mut self, t: f64, star: VertexId, p: StarPoint, x: GraphPoint);
    fn crossover(&mut self, _n: usize, _t: f64, _k: VertexId) {}
    fn segment_start(&mut self, _n: usize, _star: VertexId) {}
}

impl PathObserver for () {
    fn knot(&mut self, _t: f64, _star: VertexId, _p: StarPoint, _x: GraphPoint) {}
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PathEnd {
    Horizon,
    Died { t: f64 },
    /// Arrived at a halting vertex.
    Halted { t: f64, v: VertexId },
}

#[derive(Clone, Copy, Debug)]
pub struct PathOutcome {
    pub end: PathEnd,
    pub crossovers: usize,
    pub steps: u64,
}

struct Adapter<'a, O> {
    spec: &'a PastedProcessSpec,
    star: VertexId,
    obs: &'a mut O,
    // rays visited, as a bit mask (rays past 63 share the top bit)
    rays: u64,
}

impl<O: PathObserver> StarObserver for Adapter<'_, O> {
    fn knot(&mut self, t: f64, p: StarPoint) {
        if !p.is_vertex() {
            self.rays |= 1 << p.ray.min(63);
        }
        let x = self.spec.to_global(self.star, p);
        self.obs.knot(t, self.star, p, x);
    }
}

/// Samples path `path` of the experiment keyed by `seed`. Segment `n`
/// (after the `n`-th crossover) draws from stream `(seed, path, n)`.
pub fn run_path<O: PathObserver>(
    spec: &PastedProcessSpec,
    start: &GraphPoint,
    horizon: f64,
    ctl: &StepControl,
    seed: u64,
    path: u64,
    opts: RunOptions,
    obs: &mut O,
) -> PathOutcome {
    run_path_with(spec, start, horizon, ctl, seed, path, opts, obs, |_, _, _, _| {})
}

#[allow(clippy::too_many_arguments)]
fn run_path_with<O: PathObserver>(
    spec: &PastedProcessSpec,
    start: &GraphPoint,
    horizon: f64,
    ctl: &StepControl,
    seed: u64,
    path: u64,
    opts: RunOptions,
    obs: &mut O,
    mut on_segment: impl FnMut(VertexId, f64, f64, u64),
) -> PathOutcome {
    let (mut v, mut sp) = spec.start_star_at(start, opts.start_end);
    let halts = |w: VertexId| opts.halt.is_some_and(|h| h[w.0]);
    if let GraphPoint::Vertex(w) = *start {
        if halts(w) {
            return PathOutcome {
                end: PathEnd::Halted { t: 0.0, v: w },
                crossovers: 0,
                steps: 0,
            };
        }
    }
    let mut t = 0.0;
    let mut n = 0usize;
    let mut steps = 0u64;
    loop {
        let mut rng = stream(seed, path, n as u64);
        let run = StarRun {
            dynamics: &spec.dynamics[v.0],
            start: sp,
            t0: t,
            horizon,
            ctl,
            quiet: opts.quiet.map(|q| q[v.0].as_slice()),
            halt_at_vertex: halts(v),
        };
        obs.segment_start(n, v);
        let seg_start = t;
        let mut adapter = Adapter {
            spec,
            star: v,
            obs,
            rays: 0,
        };
        let out = run_star(&run, &mut rng, &mut adapter);
        let rays = adapter.rays;
        steps += out.steps;
        let done = |end, n| PathOutcome {
            end,
            crossovers: n,
            steps,
        };
        match out.end {
            StarEnd::Stopped { t: s, ray } => {
                on_segment(v, seg_start, s, rays);
                let k = spec.kappa(v, ray).expect("stops sit on internal rays");
                n += 1;
                obs.crossover(n, s, k);
                if halts(k) || opts.max_crossovers == Some(n) {
                    return done(PathEnd::Halted { t: s, v: k }, n);
                }
                v = k;
                sp = StarPoint::VERTEX;
                t = s;
            }
            StarEnd::VertexReached { t: s } => {
                on_segment(v, seg_start, s, rays);
                return done(PathEnd::Halted { t: s, v }, n);
            }
            StarEnd::Killed { t: s } => {
                on_segment(v, seg_start, s, rays);
                return done(PathEnd::Died { t: s }, n);
            }
            StarEnd::Horizon => {
                on_segment(v, seg_start, horizon, rays);
                return done(PathEnd::Horizon, n);
            }
        }
    }
}

/// How a crossover record ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Terminal {
    Died,
    Horizon,
}

/// The crossover chain of one path: `(S_n, K_n)` for every finite `S_n`
/// within the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossoverRecord {
    pub times: Vec<f64>,
    pub vertices: Vec<VertexId>,
    pub terminal: Terminal,
}

/// Which star produced a stretch of the path.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub star: VertexId,
    pub from: f64,
    pub to: f64,
    /// Rays of the star visited during the segment.
    pub rays: Vec<usize>,
}

/// A pasted path on the uniform grid `k h`.
#[derive(Clone, Debug)]
pub struct GlobalPathRecord {
    pub path_id: u64,
    pub h: f64,
    pub horizon: f64,
    pub start: GraphPoint,
    /// `None` is the cemetery.
    pub samples: Vec<Option<GraphPoint>>,
    pub crossovers: CrossoverRecord,
    pub segments: Vec<Segment>,
    pub zeta: Option<f64>,
}

#[derive(Default)]
struct KnotLog {
    knots: Vec<(f64, usize, VertexId, StarPoint)>,
    times: Vec<f64>,
    vertices: Vec<VertexId>,
    segment: usize,
}

impl PathObserver for KnotLog {
    fn knot(&mut self, t: f64, star: VertexId, p: StarPoint, _x: GraphPoint) {
        self.knots.push((t, self.segment, star, p));
    }
    fn crossover(&mut self, n: usize, t: f64, k: VertexId) {
        self.times.push(t);
        self.vertices.push(k);
        self.segment = n;
    }
}

/// Samples one pasted path with fixed step `h` and records it on the grid.
pub fn sample_path(
    spec: &PastedProcessSpec,
    start: &GraphPoint,
    horizon: f64,
    h: f64,
    seed: u64,
    path: u64,
) -> GlobalPathRecord {
    let ctl = StepControl::fixed(h);
    let mut log = KnotLog::default();
    let mut segments = Vec::new();
    let out = run_path_with(
        spec,
        start,
        horizon,
        &ctl,
        seed,
        path,
        RunOptions::default(),
        &mut log,
        |star, from, to, rays| {
            segments.push(Segment {
                star,
                from,
                to,
                rays: (0..64).filter(|k| rays >> k & 1 == 1).collect(),
            })
        },
    );
    let zeta = match out.end {
        PathEnd::Died { t } => Some(t),
        _ => None,
    };
    let n = (horizon / h + 1e-9).floor() as usize;
    let mut samples = Vec::with_capacity(n + 1);
    let mut j = 0;
    let knots = &log.knots;
    for k in 0..=n {
        let s = k as f64 * h;
        if zeta.is_some_and(|z| s >= z) {
            samples.push(None);
            continue;
        }
        while j + 1 < knots.len() && knots[j + 1].0 < s {
            j += 1;
        }
        let (ta, sa, va, pa) = knots[j];
        let p = match knots.get(j + 1) {
            Some(&(tb, sb, _, pb)) if sb == sa => {
                crate::sv::interpolate((ta, pa), (tb, pb), s)
            }
            Some(&(_, _, vb, pb)) if s >= ta => {
                samples.push(Some(spec.to_global(vb, pb)));
                continue;
            }
            _ => pa,
        };
        samples.push(Some(spec.to_global(va, p)));
    }
    GlobalPathRecord {
        path_id: path,
        h,
        horizon,
        start: *start,
        samples,
        crossovers: CrossoverRecord {
            times: log.times,
            vertices: log.vertices,
            terminal: if zeta.is_some() {
                Terminal::Died
            } else {
                Terminal::Horizon
            },
        },
        segments,
        zeta,
    }
}

/// Violation counts found by [`check_crossover`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CrossoverDiagnostics {
    /// `S_n <= S_{n-1}`.
    pub not_increasing: usize,
    /// `Y(S_n)` farther than the grid bound from `K_n`.
    pub position_mismatch: usize,
    /// No visit near `V_c \ {K_{n-1}}` between `S_{n-1}` and `S_n`.
    pub hitting: usize,
    /// `K_n` outside `V_c`, or equal to `K_{n-1}`.
    pub bad_target: usize,
    /// A live sample after the first cemetery sample.
    pub not_absorbed: usize,
}

impl CrossoverDiagnostics {
    pub fn total(&self) -> usize {
        self.not_increasing + self.position_mismatch + self.hitting + self.bad_target + self.not_absorbed
    }

    pub fn add(&mut self, other: &CrossoverDiagnostics) {
        self.not_increasing += other.not_increasing;
        self.position_mismatch += other.position_mismatch;
        self.hitting += other.hitting;
        self.bad_target += other.bad_target;
        self.not_absorbed += other.not_absorbed;
    }
}

/// Grid-resolution bound `4 sqrt(h log(1/h))` used by the path checks.
pub fn grid_bound(h: f64) -> f64 {
    4.0 * (h * (1.0 / h).ln().max(1.0)).sqrt()
}

/// Checks a recorded path against the defining properties of the crossover
/// chain.
pub fn check_crossover(
    g: &MetricGraph,
    connected: &[VertexId],
    record: &GlobalPathRecord,
) -> CrossoverDiagnostics {
    let mut d = CrossoverDiagnostics::default();
    let h = record.h;
    let bound = grid_bound(h);
    let cx = &record.crossovers;
    let sample_at = |t: f64| -> Option<GraphPoint> {
        let k = ((t / h).round() as usize).min(record.samples.len().saturating_sub(1));
        record.samples.get(k).copied().flatten()
    };

    let mut prev_t = 0.0;
    let mut prev_k: Option<VertexId> = match record.start {
        GraphPoint::Vertex(v) => Some(v),
        _ => None,
    };
    for (&s, &k) in cx.times.iter().zip(&cx.vertices) {
        if !(s > prev_t) {
            d.not_increasing += 1;
        }
        if !connected.contains(&k) || prev_k == Some(k) {
            d.bad_target += 1;
        }
        match sample_at(s) {
            Some(p) if g.distance(&p, &GraphPoint::Vertex(k)) <= bound => {}
            _ => d.position_mismatch += 1,
        }
        // some grid time in [S_{n-1}, S_n] must be close to V_c \ {K_{n-1}}
        let targets: Vec<VertexId> = connected.iter().copied().filter(|&w| Some(w) != prev_k).collect();
        let lo = (prev_t.min(s) / h).floor() as usize;
        let hi = ((prev_t.max(s) / h).ceil() as usize).min(record.samples.len().saturating_sub(1));
        let seen = (lo..=hi).any(|j| {
            record.samples[j].is_some_and(|p| g.distance_to_set(&p, &targets) <= bound)
        });
        if !seen {
            d.hitting += 1;
        }
        prev_t = s;
        prev_k = Some(k);
    }
    if let Some(first_dead) = record.samples.iter().position(Option::is_none) {
        d.not_absorbed += record.samples[first_dead..].iter().filter(|s| s.is_some()).count();
    }
    d
}

fn point_columns(g: &MetricGraph, p: &GraphPoint) -> (String, f64) {
    match *p {
        GraphPoint::Edge { edge, x } => (g.edge_name(edge).to_string(), x),
        GraphPoint::Vertex(v) => {
            let inc = g.incidences(v)[0];
            let e = g.edge(inc.edge);
            (e.name.clone(), e.coordinate_of(inc.end))
        }
    }
}

/// Writes grid samples as `path_id,t,edge_id,x,alive`. Vertices are written
/// as the endpoint of their first incident edge; cemetery rows have empty
/// edge and coordinate.
pub fn write_paths_csv<W: Write>(
    g: &MetricGraph,
    records: &[GlobalPathRecord],
    out: W,
) -> Result<(), PasteError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["path_id", "t", "edge_id", "x", "alive"])?;
    for rec in records {
        for (k, s) in rec.samples.iter().enumerate() {
            let t = format!("{:?}", k as f64 * rec.h);
            match s {
                Some(p) => {
                    let (e, x) = point_columns(g, p);
                    w.write_record([rec.path_id.to_string(), t, e, format!("{x:?}"), "1".into()])?;
                }
                None => {
                    w.write_record([rec.path_id.to_string(), t, String::new(), String::new(), "0".into()])?
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes crossover chains as `path_id,n,S_n,K_n`. A path that died gets a
/// final row with `S_n = inf` and `K_n = Δ`.
pub fn write_crossovers_csv<W: Write>(
    g: &MetricGraph,
    records: &[GlobalPathRecord],
    out: W,
) -> Result<(), PasteError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["path_id", "n", "S_n", "K_n"])?;
    for rec in records {
        let cx = &rec.crossovers;
        for (i, (s, k)) in cx.times.iter().zip(&cx.vertices).enumerate() {
            w.write_record([
                rec.path_id.to_string(),
                (i + 1).to_string(),
                format!("{s:?}"),
                g.vertex_name(*k).to_string(),
            ])?;
        }
        if cx.terminal == Terminal::Died {
            w.write_record([
                rec.path_id.to_string(),
                (cx.times.len() + 1).to_string(),
                "inf".into(),
                "Δ".into(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wentzell::{VertexData, WentzellSpec};

    fn interval(data: [(f64, f64, f64); 2]) -> (MetricGraph, WentzellData) {
        let g = MetricGraph::builder("interval")
            .vertex("v1")
            .vertex("v2")
            .internal("i", "v1", "v2", 1.0)
            .build()
            .unwrap();
        let d = WentzellData::from_vertex_data(
            &g,
            data.iter()
                .map(|&(a, b, c)| VertexData { a, c, b: vec![b] })
                .collect(),
        )
        .unwrap();
        (g, d)
    }

    #[test]
    fn interval_with_traps_has_one_stop_per_star() {
        let (g, d) = interval([(0.0, 0.0, 1.0), (0.0, 0.0, 1.0)]);
        let spec = build_process(&g, &d).unwrap();
        assert_eq!(spec.dynamics.len(), 2);
        for v in g.vertices() {
            assert_eq!(spec.dynamics[v.0].ray_count(), 1);
            assert_eq!(spec.dynamics[v.0].stops, vec![Some(1.0)]);
            assert_eq!(*spec.regime(v), VertexRegime::Trap);
        }
    }

    #[test]
    fn trap_start_is_constant_without_crossovers() {
        let (g, d) = interval([(0.0, 0.0, 1.0), (0.0, 1.0, 0.0)]);
        let spec = build_process(&g, &d).unwrap();
        let v1 = GraphPoint::Vertex(g.vertex_id("v1").unwrap());
        let rec = sample_path(&spec, &v1, 1.0, 0.01, 1, 0);
        assert!(rec.samples.iter().all(|s| *s == Some(v1)));
        assert!(rec.crossovers.times.is_empty());
        assert_eq!(check_crossover(&g, &spec.connected, &rec).total(), 0);
    }

    #[test]
    fn hold_kill_vertex_ends_the_path() {
        let g = MetricGraph::builder("g")
            .vertex("u")
            .vertex("w")
            .internal("i", "u", "w", 0.5)
            .external("e", "w")
            .build()
            .unwrap();
        let spec = WentzellSpec::new()
            .vertex("u", 0.5, 0.5)
            .vertex("w", 0.0, 0.0)
            .b("w", "i", 0.5)
            .b("w", "e", 0.5);
        let d = WentzellData::from_spec(&spec, &g).unwrap();
        let p = build_process(&g, &d).unwrap();
        let u = g.vertex_id("u").unwrap();
        assert_eq!(*p.regime(u), VertexRegime::HoldKill { rate: 1.0 });
        let rec = sample_path(&p, &GraphPoint::Vertex(u), 50.0, 0.01, 3, 0);
        assert!(rec.zeta.is_some());
        assert_eq!(rec.crossovers.terminal, Terminal::Died);
        assert_eq!(rec.samples.last(), Some(&None));
    }

    #[test]
    fn start_star_uses_the_nearer_endpoint() {
        let (g, d) = interval([(0.0, 1.0, 0.0), (0.0, 1.0, 0.0)]);
        let spec = build_process(&g, &d).unwrap();
        let i = g.edge_id("i").unwrap();
        let (v, p) = spec.start_star(&g.point(i, 0.5).unwrap());
        assert_eq!(v, g.vertex_id("v1").unwrap());
        assert_eq!(p.r, 0.5);
        let (v, p) = spec.start_star(&g.point(i, 0.75).unwrap());
        assert_eq!(v, g.vertex_id("v2").unwrap());
        assert_eq!(p.r, 0.25);
        assert_eq!(spec.to_global(v, p), g.point(i, 0.75).unwrap());
    }

    #[test]
    fn swapped_crossover_times_are_flagged() {
        let (g, d) = interval([(0.0, 1.0, 0.0), (0.0, 1.0, 0.0)]);
        let spec = build_process(&g, &d).unwrap();
        let start = g.point_on("i", 0.5).unwrap();
        let mut checked = 0;
        for path in 0..200 {
            let rec = sample_path(&spec, &start, 3.0, 1e-3, 21, path);
            assert_eq!(check_crossover(&g, &spec.connected, &rec).total(), 0, "path {path}");
            if rec.crossovers.times.len() >= 2 {
                let mut bad = rec.clone();
                bad.crossovers.times.swap(0, 1);
                let diag = check_crossover(&g, &spec.connected, &bad);
                assert!(diag.not_increasing >= 1);
                assert!(diag.position_mismatch >= 1);
                checked += 1;
            }
        }
        assert!(checked > 50);
    }

    #[test]
    fn csv_dumps_have_the_documented_columns() {
        let (g, d) = interval([(0.2, 0.8, 0.0), (0.0, 1.0, 0.0)]);
        let spec = build_process(&g, &d).unwrap();
        let start = g.point_on("i", 0.3).unwrap();
        let recs: Vec<_> = (0..3).map(|k| sample_path(&spec, &start, 0.5, 0.05, 4, k)).collect();
        let mut buf = Vec::new();
        write_paths_csv(&g, &recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("path_id,t,edge_id,x,alive\n"));
        assert_eq!(text.lines().count(), 1 + 3 * 11);
        let mut buf = Vec::new();
        write_crossovers_csv(&g, &recs, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("path_id,n,S_n,K_n\n"));
    }
}
