//! Brownian motion on a single-vertex star graph.
//!
//! Away from the vertex the motion is driven by Gaussian increments with a
//! Brownian-bridge correction for every barrier between two grid times. At
//! the vertex the behaviour depends on the regime. In the sticky regime the
//! radial part follows the Lévy construction `r = β − min β`, `ℓ = −min β`,
//! sampled exactly at grid times via the law of the bridge minimum. Each
//! step that touches the vertex redraws the active ray, adds `ρ Δℓ` of real
//! time spent at the vertex, and kills once `ℓ` passes an exponential
//! threshold of rate `γ`.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use thiserror::Error;

use crate::wentzell::VertexRegime;

/// Position on a star: distance `r` from the vertex along ray `ray`.
/// `r == 0` is the vertex, whatever the ray.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarPoint {
    pub ray: usize,
    pub r: f64,
}

impl StarPoint {
    pub const VERTEX: StarPoint = StarPoint { ray: 0, r: 0.0 };

    pub fn new(ray: usize, r: f64) -> Self {
        if r <= 0.0 {
            Self::VERTEX
        } else {
            Self { ray, r }
        }
    }

    pub fn is_vertex(&self) -> bool {
        self.r <= 0.0
    }
}

/// Linear interpolation at time `s` between two knots of a star path.
/// Consecutive knots are either on the same ray or one of them is the
/// vertex.
pub fn interpolate(a: (f64, StarPoint), b: (f64, StarPoint), s: f64) -> StarPoint {
    let (ta, pa) = a;
    let (tb, pb) = b;
    let w = if tb > ta { ((s - ta) / (tb - ta)).clamp(0.0, 1.0) } else { 1.0 };
    let ray = if pa.is_vertex() { pb.ray } else { pa.ray };
    StarPoint::new(ray, pa.r + w * (pb.r - pa.r))
}

/// Vertex behaviour and stop points of one star.
#[derive(Clone, Debug)]
pub struct StarDynamics {
    pub regime: VertexRegime,
    /// Stop distance per ray.
    pub stops: Vec<Option<f64>>,
    cumulative: Vec<f64>,
}

impl StarDynamics {
    pub fn new(regime: VertexRegime, stops: Vec<Option<f64>>) -> Self {
        let cumulative = match &regime {
            VertexRegime::Sticky(p) => p
                .probs
                .iter()
                .scan(0.0, |acc, x| {
                    *acc += x;
                    Some(*acc)
                })
                .collect(),
            _ => Vec::new(),
        };
        Self {
            regime,
            stops,
            cumulative,
        }
    }

    pub fn ray_count(&self) -> usize {
        self.stops.len()
    }

    fn pick_ray<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cumulative.len() - 1)
    }
}

/// Step-size policy.
#[derive(Clone, Copy, Debug)]
pub struct Adaptive {
    /// Steps are `(d / kappa)^2` where `d` is the distance to the nearest
    /// barrier (the vertex or a stop point).
    pub kappa: f64,
    pub h_max: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct StepControl {
    /// Base step, used as-is near barriers and at the vertex.
    pub h: f64,
    pub adaptive: Option<Adaptive>,
    /// Locate barrier passages inside a step by bisecting the Brownian
    /// bridge. Without it, passages are dated at the end of the step.
    pub refine_hits: bool,
}

impl StepControl {
    /// Fixed step `h`, passages dated at the end of the step.
    pub fn fixed(h: f64) -> Self {
        Self {
            h,
            adaptive: None,
            refine_hits: false,
        }
    }

    /// Steps growing away from barriers, with refined passage times.
    pub fn adaptive(h: f64) -> Self {
        Self {
            h,
            adaptive: Some(Adaptive {
                kappa: 8.0,
                h_max: 0.05_f64.max(h),
            }),
            refine_hits: true,
        }
    }

    pub fn refined(mut self) -> Self {
        self.refine_hits = true;
        self
    }

    fn step(&self, d: f64) -> f64 {
        match self.adaptive {
            None => self.h,
            Some(a) => {
                let s = d / a.kappa;
                (s * s).clamp(self.h, a.h_max)
            }
        }
    }
}

/// How a star run ended.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StarEnd {
    /// Reached the stop point of `ray`.
    Stopped { t: f64, ray: usize },
    /// Reached the vertex with `halt_at_vertex` set.
    VertexReached { t: f64 },
    /// Jumped to the cemetery from the vertex.
    Killed { t: f64 },
    Horizon,
}

#[derive(Clone, Copy, Debug)]
pub struct StarOutcome {
    pub end: StarEnd,
    pub local_time: f64,
    /// Time of the first visit to the vertex.
    pub first_vertex_hit: Option<f64>,
    pub steps: u64,
}

/// Receives a star path as a sequence of knots. Between two knots the path
/// is linear in star coordinates.
pub trait StarObserver {
    fn knot(&mut self, t: f64, p: StarPoint);
    fn ray_switch(&mut self, _t: f64, _from: usize, _to: usize) {}
    fn vertex_visit(&mut self, _from: f64, _to: f64) {}
}

impl StarObserver for () {
    fn knot(&mut self, _t: f64, _p: StarPoint) {}
}

/// One run of the star process.
#[derive(Clone, Copy, Debug)]
pub struct StarRun<'a> {
    pub dynamics: &'a StarDynamics,
    pub start: StarPoint,
    /// Real time at the start.
    pub t0: f64,
    pub horizon: f64,
    pub ctl: &'a StepControl,
    /// Per ray, a distance beyond which the caller does not care where the
    /// path is. Beyond it the path returns by an exact first-passage jump.
    pub quiet: Option<&'a [Option<f64>]>,
    pub halt_at_vertex: bool,
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn open01<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Probability that a Brownian bridge of duration `dt` between points at
/// distances `d0, d1 >= 0` from a level touches it.
fn bridge_cross(d0: f64, d1: f64, dt: f64) -> f64 {
    let e = 2.0 * d0 * d1 / dt;
    if e > 50.0 {
        0.0
    } else {
        (-e).exp()
    }
}

/// First time a Brownian bridge over `[0, dt]` reaches a level, given that
/// it does. `z0 > 0` is the distance to the level at the start and `z1` the
/// signed distance at the end. A bridge ending on the near side is
/// reflected at its passage time, which leaves the law of that time
/// unchanged.
///
/// With `a = z0`, `b = |z1|`, the ratio `τ / (dt − τ)` is inverse Gaussian
/// with mean `a / b` and shape `a² / dt`; it is drawn by the
/// Michael–Schucany–Haas method with the small root taken in a
/// cancellation-free form.
pub fn bridge_passage_time<R: Rng>(rng: &mut R, z0: f64, z1: f64, dt: f64) -> f64 {
    if z0 <= 0.0 {
        return 0.0;
    }
    let shape = z0 * z0 / dt;
    let nu = normal(rng).powi(2);
    let b = z1.abs();
    let y = if b * 1e12 < z0 {
        // mean beyond reach: the Lévy limit
        shape / nu
    } else {
        let mu = z0 / b;
        let q = mu * nu / (2.0 * shape);
        let big = 1.0 + q + (q * (2.0 + q)).sqrt();
        let small = mu / big;
        if rng.random::<f64>() * (mu + small) <= mu {
            small
        } else {
            mu * big
        }
    };
    (dt * (y / (1.0 + y))).clamp(0.0, dt)
}

struct Emitter<'o, O> {
    obs: &'o mut O,
    last: (f64, StarPoint),
    horizon: f64,
}

impl<O: StarObserver> Emitter<'_, O> {
    /// Emits a knot, clipped at the horizon. Returns false once the
    /// horizon is reached.
    fn emit(&mut self, t: f64, p: StarPoint) -> bool {
        if t >= self.horizon {
            let q = interpolate(self.last, (t, p), self.horizon);
            if self.last.0 < self.horizon {
                self.obs.knot(self.horizon, q);
            }
            self.last = (self.horizon, q);
            return false;
        }
        self.obs.knot(t, p);
        self.last = (t, p);
        true
    }
}

/// Runs the star process until it stops, dies, reaches the vertex (when
/// asked to) or reaches the horizon.
pub fn run_star<R: Rng, O: StarObserver>(run: &StarRun, rng: &mut R, obs: &mut O) -> StarOutcome {
    let dyn_ = run.dynamics;
    let ctl = run.ctl;
    let mut t = run.t0;
    let mut p = run.start;
    let mut ell = 0.0;
    let mut steps = 0u64;
    let mut first_hit = p.is_vertex().then_some(t);
    let mut em = Emitter {
        obs,
        last: (t, p),
        horizon: run.horizon,
    };
    em.obs.knot(t, p);
    let (delay, threshold) = match &dyn_.regime {
        VertexRegime::Sticky(s) if s.kill_rate > 0.0 => {
            let e: f64 = rng.sample(Exp1);
            (s.delay, e / s.kill_rate)
        }
        VertexRegime::Sticky(s) => (s.delay, f64::INFINITY),
        _ => (0.0, f64::INFINITY),
    };
    let out = |end, ell, first_hit, steps| StarOutcome {
        end,
        local_time: ell,
        first_vertex_hit: first_hit,
        steps,
    };

    if !p.is_vertex() {
        if let Some(a) = dyn_.stops[p.ray] {
            if p.r >= a {
                return out(StarEnd::Stopped { t, ray: p.ray }, ell, first_hit, steps);
            }
        }
    }

    loop {
        if t >= run.horizon {
            return out(StarEnd::Horizon, ell, first_hit, steps);
        }
        if p.is_vertex() {
            if run.halt_at_vertex {
                return out(StarEnd::VertexReached { t }, ell, first_hit, steps);
            }
            match &dyn_.regime {
                VertexRegime::Trap => {
                    em.obs.vertex_visit(t, run.horizon);
                    em.emit(run.horizon, p);
                    return out(StarEnd::Horizon, ell, first_hit, steps);
                }
                VertexRegime::HoldKill { rate } => {
                    let hold: f64 = rng.sample::<f64, _>(Exp1) / rate;
                    em.obs.vertex_visit(t, (t + hold).min(run.horizon));
                    if !em.emit(t + hold, p) {
                        return out(StarEnd::Horizon, ell, first_hit, steps);
                    }
                    return out(StarEnd::Killed { t: t + hold }, ell, first_hit, steps);
                }
                VertexRegime::Sticky(_) => {}
            }
        }

        if !p.is_vertex() {
            if let Some(q) = run.quiet.and_then(|qs| qs[p.ray]) {
                if p.r > q && dyn_.stops[p.ray].is_none() {
                    // exact first passage from r down to q
                    let z = normal(rng);
                    let tau = (p.r - q) * (p.r - q) / (z * z);
                    steps += 1;
                    t += tau;
                    p = StarPoint::new(p.ray, q);
                    if !em.emit(t, p) {
                        return out(StarEnd::Horizon, ell, first_hit, steps);
                    }
                    continue;
                }
            }
        }

        let stop = if p.is_vertex() { None } else { dyn_.stops[p.ray] };
        let d = match stop {
            Some(a) => p.r.min(a - p.r),
            None => p.r,
        };
        let dt = ctl.step(d);
        let sd = dt.sqrt();
        let r = p.r;
        let y = r + normal(rng) * sd;
        steps += 1;

        // does the bridge from r to y touch the vertex?
        let mut u_touch = 1.0;
        let touched = r <= 0.0 || y <= 0.0 || {
            let pc = bridge_cross(r, y, dt);
            pc > 0.0 && {
                u_touch = open01(rng);
                u_touch < pc
            }
        };

        if !touched {
            if let Some(a) = stop {
                if y >= a || rng.random::<f64>() < bridge_cross(a - r, a - y, dt) {
                    let tau = if ctl.refine_hits {
                        bridge_passage_time(rng, a - r, a - y, dt)
                    } else {
                        dt
                    };
                    if !em.emit(t + tau, StarPoint::new(p.ray, a)) {
                        return out(StarEnd::Horizon, ell, first_hit, steps);
                    }
                    return out(StarEnd::Stopped { t: t + tau, ray: p.ray }, ell, first_hit, steps);
                }
            }
            t += dt;
            p = StarPoint::new(p.ray, y);
            if !em.emit(t, p) {
                return out(StarEnd::Horizon, ell, first_hit, steps);
            }
            continue;
        }

        // touched: the old ray may still reach its stop before the vertex
        if let Some(a) = stop {
            if rng.random::<f64>() < bridge_cross(a - r, a, dt) {
                let tau = if ctl.refine_hits {
                    bridge_passage_time(rng, a - r, a, dt)
                } else {
                    dt
                };
                if !em.emit(t + tau, StarPoint::new(p.ray, a)) {
                    return out(StarEnd::Horizon, ell, first_hit, steps);
                }
                return out(StarEnd::Stopped { t: t + tau, ray: p.ray }, ell, first_hit, steps);
            }
        }
        let tau0 = if r <= 0.0 {
            0.0
        } else if ctl.refine_hits {
            bridge_passage_time(rng, r, y, dt)
        } else if matches!(dyn_.regime, VertexRegime::Sticky(_)) {
            0.5 * dt
        } else {
            dt
        };
        if first_hit.is_none() {
            first_hit = Some(t + tau0);
        }
        let sticky = matches!(dyn_.regime, VertexRegime::Sticky(_));
        if !sticky || (run.halt_at_vertex && r > 0.0) {
            t += tau0;
            p = StarPoint::VERTEX;
            if !em.emit(t, p) {
                return out(StarEnd::Horizon, ell, first_hit, steps);
            }
            continue;
        }

        // Lévy step: minimum of the bridge, conditioned to be <= 0
        let u = if y <= 0.0 || r <= 0.0 { open01(rng) } else { u_touch };
        let m = 0.5 * (r + y - ((y - r) * (y - r) - 2.0 * dt * u.ln()).sqrt());
        let m = m.min(0.0).min(y);
        let d_ell = -m;
        let r_new = y - m;
        let t_touch = if ctl.refine_hits {
            t + tau0 + (dt - tau0) / 3.0
        } else {
            t + tau0
        };

        if ell + d_ell >= threshold {
            let rest = threshold - ell;
            let tau_l = if ctl.refine_hits {
                bridge_passage_time(rng, r + rest, y + rest, dt).max(tau0)
            } else {
                tau0
            };
            let t_kill = t + tau_l + delay * rest;
            ell = threshold;
            em.obs.vertex_visit(t + tau0, t_kill.min(run.horizon));
            if !em.emit(t + tau0, StarPoint::VERTEX) || !em.emit(t_kill, StarPoint::VERTEX) {
                return out(StarEnd::Horizon, ell, first_hit, steps);
            }
            return out(StarEnd::Killed { t: t_kill }, ell, first_hit, steps);
        }

        ell += d_ell;
        let plateau = delay * d_ell;
        let new_ray = dyn_.pick_ray(rng);
        if new_ray != p.ray {
            em.obs.ray_switch(t_touch, p.ray, new_ray);
        }
        em.obs.vertex_visit(t_touch, (t_touch + plateau).min(run.horizon));
        if !em.emit(t_touch, StarPoint::VERTEX) {
            return out(StarEnd::Horizon, ell, first_hit, steps);
        }
        if plateau > 0.0 && !em.emit(t_touch + plateau, StarPoint::VERTEX) {
            return out(StarEnd::Horizon, ell, first_hit, steps);
        }
        t += dt + plateau;

        if let Some(a) = dyn_.stops[new_ray] {
            if r_new >= a || rng.random::<f64>() < bridge_cross(a, a - r_new, dt) {
                if !em.emit(t, StarPoint::new(new_ray, a)) {
                    return out(StarEnd::Horizon, ell, first_hit, steps);
                }
                return out(StarEnd::Stopped { t, ray: new_ray }, ell, first_hit, steps);
            }
        }
        // the vertex keeps the active ray so that switches are reported
        p = StarPoint {
            ray: new_ray,
            r: r_new.max(0.0),
        };
        if !em.emit(t, p) {
            return out(StarEnd::Horizon, ell, first_hit, steps);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SvError {
    #[error("stop point on ray {0} is at the vertex")]
    StopAtVertex(usize),
    #[error("ray {0} does not exist")]
    NoSuchRay(usize),
    #[error("barriers must enclose an interval of positive length")]
    DegenerateBarriers,
    #[error("start {0} lies outside the barriers")]
    StartOutside(f64),
    #[error("step and horizon must be positive")]
    BadStep,
}

/// A sampled star path on a uniform grid, with its events.
#[derive(Clone, Debug, Default)]
pub struct SvPathRecord {
    pub h: f64,
    /// Samples at times `k h`; `None` is the cemetery.
    pub samples: Vec<Option<StarPoint>>,
    pub knots: Vec<(f64, StarPoint)>,
    /// `(time, from, to)` for every change of the active ray.
    pub switches: Vec<(f64, usize, usize)>,
    pub vertex_visits: Vec<(f64, f64)>,
    /// Lifetime; `None` when the path survives the horizon.
    pub zeta: Option<f64>,
    /// First hit of the stop set as `(time, index into the stop set)`.
    pub stop_hit: Option<(f64, usize)>,
    pub local_time: f64,
}

#[derive(Default)]
struct Recorder {
    knots: Vec<(f64, StarPoint)>,
    switches: Vec<(f64, usize, usize)>,
    visits: Vec<(f64, f64)>,
}

impl StarObserver for Recorder {
    fn knot(&mut self, t: f64, p: StarPoint) {
        self.knots.push((t, p));
    }
    fn ray_switch(&mut self, t: f64, from: usize, to: usize) {
        self.switches.push((t, from, to));
    }
    fn vertex_visit(&mut self, from: f64, to: f64) {
        self.visits.push((from, to));
    }
}

/// Resamples knots onto the grid `k h`, `k h <= end`.
pub fn grid_samples(knots: &[(f64, StarPoint)], h: f64, end: f64) -> Vec<StarPoint> {
    let n = (end / h + 1e-9).floor() as usize;
    let mut out = Vec::with_capacity(n + 1);
    let mut j = 0;
    for k in 0..=n {
        let s = k as f64 * h;
        while j + 1 < knots.len() && knots[j + 1].0 < s {
            j += 1;
        }
        if j + 1 < knots.len() {
            out.push(interpolate(knots[j], knots[j + 1], s));
        } else {
            out.push(knots[j].1);
        }
    }
    out
}

/// Samples one path of the star process with fixed step `h` and the given
/// stop set `(ray, distance)`.
pub fn sample_sv_path<R: Rng>(
    regime: &VertexRegime,
    rays: usize,
    start: StarPoint,
    horizon: f64,
    h: f64,
    stop_set: &[(usize, f64)],
    rng: &mut R,
) -> Result<SvPathRecord, SvError> {
    if !(h > 0.0 && horizon > 0.0) {
        return Err(SvError::BadStep);
    }
    let mut stops = vec![None; rays];
    for &(ray, d) in stop_set {
        if ray >= rays {
            return Err(SvError::NoSuchRay(ray));
        }
        if d <= 0.0 {
            return Err(SvError::StopAtVertex(ray));
        }
        stops[ray] = Some(d);
    }
    let dynamics = StarDynamics::new(regime.clone(), stops);
    let ctl = StepControl::fixed(h);
    let run = StarRun {
        dynamics: &dynamics,
        start,
        t0: 0.0,
        horizon,
        ctl: &ctl,
        quiet: None,
        halt_at_vertex: false,
    };
    let mut rec = Recorder::default();
    let outcome = run_star(&run, rng, &mut rec);
    let (end, zeta, stop_hit) = match outcome.end {
        StarEnd::Killed { t } => (horizon, Some(t), None),
        StarEnd::Stopped { t, ray } => (
            t,
            None,
            stop_set.iter().position(|s| s.0 == ray).map(|k| (t, k)),
        ),
        _ => (horizon, None, None),
    };
    let alive_end = zeta.map_or(end, |z| z.min(end));
    let mut samples: Vec<Option<StarPoint>> =
        grid_samples(&rec.knots, h, alive_end).into_iter().map(Some).collect();
    if zeta.is_some() {
        let n = (horizon / h + 1e-9).floor() as usize;
        while samples.len() <= n {
            samples.push(None);
        }
    }
    Ok(SvPathRecord {
        h,
        samples,
        knots: rec.knots,
        switches: rec.switches,
        vertex_visits: rec.visits,
        zeta,
        stop_hit,
        local_time: outcome.local_time,
    })
}

/// Side of an interval through which a segment exits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitSide {
    Lower,
    Upper,
}

#[derive(Clone, Debug)]
pub struct EdgeSegment {
    /// `None` when the horizon came first.
    pub exit: Option<ExitSide>,
    pub time: f64,
    /// `(t, x)` at grid times, ending with the exit point.
    pub path: Vec<(f64, f64)>,
}

/// Standard Brownian motion on an interval with absorption at the
/// barriers. `upper` may be infinite.
pub fn sample_edge_segment<R: Rng>(
    start: f64,
    (lower, upper): (f64, f64),
    h: f64,
    horizon: f64,
    refine: bool,
    rng: &mut R,
) -> Result<EdgeSegment, SvError> {
    if !(upper > lower) {
        return Err(SvError::DegenerateBarriers);
    }
    if !(h > 0.0 && horizon > 0.0) {
        return Err(SvError::BadStep);
    }
    if !(lower..=upper).contains(&start) {
        return Err(SvError::StartOutside(start));
    }
    let mut path = vec![(0.0, start)];
    if start <= lower || start >= upper {
        let side = if start <= lower { ExitSide::Lower } else { ExitSide::Upper };
        return Ok(EdgeSegment {
            exit: Some(side),
            time: 0.0,
            path,
        });
    }
    let sd = h.sqrt();
    let mut t = 0.0;
    let mut x = start;
    while t < horizon {
        let y = x + normal(rng) * sd;
        let lo_hit = y <= lower || rng.random::<f64>() < bridge_cross(x - lower, y - lower, h);
        let hi_hit = upper.is_finite()
            && (y >= upper || rng.random::<f64>() < bridge_cross(upper - x, upper - y, h));
        if lo_hit || hi_hit {
            let (side, level, z0, z1) = if lo_hit && (!hi_hit || y - lower < upper - y) {
                (ExitSide::Lower, lower, x - lower, y - lower)
            } else {
                (ExitSide::Upper, upper, upper - x, upper - y)
            };
            let tau = if refine {
                bridge_passage_time(rng, z0, z1, h)
            } else {
                h
            };
            path.push((t + tau, level));
            return Ok(EdgeSegment {
                exit: Some(side),
                time: t + tau,
                path,
            });
        }
        t += h;
        x = y;
        path.push((t, x));
    }
    Ok(EdgeSegment {
        exit: None,
        time: horizon,
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::wentzell::{classify_weights, StickyParams};

    fn walsh(probs: &[f64]) -> VertexRegime {
        VertexRegime::Sticky(StickyParams {
            probs: probs.to_vec(),
            delay: 0.0,
            kill_rate: 0.0,
        })
    }

    #[test]
    fn trap_start_is_constant() {
        let mut rng = stream(1, 0, 0);
        let rec = sample_sv_path(&VertexRegime::Trap, 2, StarPoint::VERTEX, 1.0, 0.01, &[], &mut rng)
            .unwrap();
        assert!(rec.samples.iter().all(|s| *s == Some(StarPoint::VERTEX)));
        assert_eq!(rec.zeta, None);
        assert_eq!(rec.local_time, 0.0);
        assert_eq!(rec.samples.len(), 101);
    }

    #[test]
    fn start_at_barrier_exits_immediately() {
        let mut rng = stream(1, 0, 0);
        let seg = sample_edge_segment(1.0, (0.0, 1.0), 1e-3, 10.0, false, &mut rng).unwrap();
        assert_eq!(seg.exit, Some(ExitSide::Upper));
        assert_eq!(seg.time, 0.0);
        assert!(sample_edge_segment(0.5, (1.0, 1.0), 1e-3, 1.0, false, &mut rng).is_err());
    }

    #[test]
    fn stop_at_vertex_is_rejected() {
        let mut rng = stream(1, 0, 0);
        let err = sample_sv_path(&walsh(&[1.0]), 1, StarPoint::VERTEX, 1.0, 0.01, &[(0, 0.0)], &mut rng)
            .unwrap_err();
        assert_eq!(err, SvError::StopAtVertex(0));
    }

    #[test]
    fn samples_die_from_the_vertex() {
        let regime = classify_weights(0.3, &[0.4, 0.3], 0.0);
        let h = 1e-3;
        let (mut deaths, mut far) = (0, 0);
        for path in 0..400 {
            let mut rng = stream(5, path, 0);
            let rec = sample_sv_path(&regime, 2, StarPoint::new(0, 0.2), 5.0, h, &[], &mut rng).unwrap();
            if let Some(z) = rec.zeta {
                deaths += 1;
                let (tz, left) = *rec.knots.last().unwrap();
                assert_eq!(tz, z);
                assert!(left.is_vertex());
                let k = (z / h).floor() as usize;
                if let Some(p) = rec.samples[k] {
                    if p.r >= 2.0 * h.sqrt() {
                        far += 1;
                    }
                }
                assert!(rec.samples[k + 1..].iter().all(Option::is_none));
            }
        }
        assert!(deaths > 100);
        assert!(far * 20 < deaths, "{far} of {deaths} deaths sampled away from the vertex");
    }

    #[test]
    fn knots_are_time_ordered_and_plateaus_add_delay() {
        let regime = classify_weights(0.0, &[0.25, 0.25], 0.5);
        let mut rng = stream(9, 0, 0);
        let rec = sample_sv_path(&regime, 2, StarPoint::VERTEX, 2.0, 1e-3, &[], &mut rng).unwrap();
        assert!(rec.knots.windows(2).all(|w| w[0].0 <= w[1].0));
        let held: f64 = rec.vertex_visits.iter().map(|(a, b)| b - a).sum();
        // rho = 1: real time at the vertex equals the accumulated local time
        assert!((held - rec.local_time).abs() < 1e-9 + 1e-3, "{held} vs {}", rec.local_time);
    }

    #[test]
    fn bridge_passage_time_is_inside_the_step() {
        let mut rng = stream(3, 0, 0);
        for _ in 0..1000 {
            let tau = bridge_passage_time(&mut rng, 0.05, -0.02, 0.01);
            assert!((0.0..=0.01).contains(&tau));
        }
    }
}
