//! The stochastic approximation template and its concrete methods.
//!
//! Every method here realizes one step of
//!
//! ```text
//! x_{n+1} = exp_{x_n}(gamma_n * v_n)
//! ```
//!
//! for its own surrogate `v_n`, and records the surrogate's decomposition
//! into drift, zero-mean noise and offset when asked to. Retraction-based
//! methods (projection retractions, mirror-descent prox steps, natural
//! gradient) report the implied surrogate `v_n = log_{x_n}(x_{n+1}) / gamma_n`,
//! which makes the template identity hold exactly and keeps the recorded
//! offset at the O(gamma) scale the step-size conditions require.
//!
//! Methods:
//! * [`step_rsgd`]   - geodesic stochastic gradient descent;
//! * [`step_resgd`]  - retraction-based stochastic gradient descent;
//! * [`step_smd`]    - stochastic mirror descent via the prox-mapping of a
//!   Hessian-metric domain (equivalently: the prox retraction);
//! * [`step_rog`]    - optimistic gradient with parallel-transported
//!   corrections, reusing the previous oracle draw as the leader direction;
//! * [`step_ngd`]    - natural gradient descent (metric-preconditioned
//!   Euclidean update);
//! * [`step_rppm`]   - implicit proximal point, solved by an inner Picard
//!   iteration with two-cycle averaging;
//! * [`step_rseg`]   - extragradient with two independent oracle draws.

use crate::geometry::{GeomError, Manifold, ManifoldKind, Point, RetractionKind, Tangent};
use crate::linalg;
use crate::objective::Objective;
use crate::oracles::{self, NoiseModel, SurrogateGradient};
use crate::rng::Stream;
use crate::schedules::{ScheduleError, StepSchedule};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MethodError {
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("invalid method configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodKind {
    Rsgd,
    Resgd {
        retraction: RetractionChoice,
    },
    Smd,
    Rog,
    Ngd,
    Rppm {
        #[serde(default = "default_inner_iters")]
        inner_iters: usize,
        #[serde(default = "default_inner_tol")]
        inner_tol: f64,
    },
    Rseg,
}

fn default_inner_iters() -> usize {
    50
}

fn default_inner_tol() -> f64 {
    1e-10
}

/// Serializable mirror of [`RetractionKind`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetractionChoice {
    Exponential,
    Projection,
    Prox,
}

impl From<RetractionChoice> for RetractionKind {
    fn from(c: RetractionChoice) -> RetractionKind {
        match c {
            RetractionChoice::Exponential => RetractionKind::Exponential,
            RetractionChoice::Projection => RetractionKind::Projection,
            RetractionChoice::Prox => RetractionKind::Prox,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodConfig {
    pub method: MethodKind,
    pub schedule: StepSchedule,
    pub noise: NoiseModel,
    pub max_iters: u64,
    #[serde(default)]
    pub record_decomposition: bool,
}

impl MethodConfig {
    pub fn validate(&self, m: &Manifold) -> Result<(), MethodError> {
        self.schedule.validate()?;
        let hessian_metric = matches!(m.kind(), ManifoldKind::HessianRiemannian { .. });
        match &self.method {
            MethodKind::Smd | MethodKind::Ngd if !hessian_metric => Err(MethodError::Config(
                "mirror descent and natural gradient need a Hessian-metric manifold".into(),
            )),
            MethodKind::Rppm { inner_tol, .. } if !(*inner_tol > 0.0) => Err(MethodError::Config(
                "proximal point needs inner_tol > 0".into(),
            )),
            MethodKind::Resgd { retraction } => {
                let kind: RetractionKind = (*retraction).into();
                if kind == RetractionKind::Prox && !hessian_metric {
                    return Err(MethodError::Config(
                        "prox retraction needs a Hessian-metric manifold".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Mutable per-trajectory state. `previous_leader` and `previous_draw` exist
/// only for the optimistic method, which reuses the last oracle realization
/// (queried at the previous leader) as its next leader direction.
#[derive(Debug, Clone)]
pub struct MethodState {
    pub current: Point,
    pub previous_leader: Option<Point>,
    pub previous_draw: Option<Tangent>,
    pub iter: u64,
}

impl MethodState {
    pub fn new(x0: Point) -> Self {
        MethodState {
            current: x0,
            previous_leader: None,
            previous_draw: None,
            iter: 0,
        }
    }
}

/// What one step did: the realized surrogate (with optional decomposition),
/// and the guard flags it tripped.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub gamma: f64,
    pub surrogate: SurrogateGradient,
    pub clipped: bool,
    /// Set when an inner solver hit its iteration cap before its tolerance.
    pub non_contractive: bool,
}

/// An iterate sequence with its effective-time clock tau_n = sum_{k<n}
/// gamma_k (tau_1 = 0) and, optionally, the per-step surrogates.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub points: Vec<Point>,
    pub effective_times: Vec<f64>,
    pub step_records: Option<Vec<SurrogateGradient>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn terminal(&self) -> &Point {
        self.points.last().expect("trajectory never empty")
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub clip_events: u64,
    pub non_contractive_events: u64,
    /// First unrecoverable error, when the run aborted early; the trajectory
    /// holds everything up to the failing step.
    pub error: Option<MethodError>,
}

/// The template step: exp_x(gamma * v).
pub fn rrm_step(m: &Manifold, x: &Point, gamma: f64, v: &Tangent) -> Result<Point, MethodError> {
    if !(gamma > 0.0) {
        return Err(MethodError::Config(format!(
            "step size must be positive, got {gamma}"
        )));
    }
    Ok(m.exp_map(x, &v.scaled(gamma))?)
}

/// Scale `v` down when the step gamma*||v|| would leave the guard radius
/// 0.9 * iota inside which log maps and transports stay well defined.
fn clip_to_guard(m: &Manifold, gamma: f64, v: Tangent, clipped: &mut bool) -> Tangent {
    let bound = 0.9 * m.injectivity_lower_bound();
    if !bound.is_finite() {
        return v;
    }
    let step_len = gamma * m.norm(&v);
    if step_len > bound {
        *clipped = true;
        v.scaled(bound / step_len)
    } else {
        v
    }
}

fn record_from(
    m: &Manifold,
    f: &dyn Objective,
    x: &Point,
    gamma: f64,
    value: Tangent,
    noise: Option<Tangent>,
    record: bool,
    clipped: bool,
    non_contractive: bool,
) -> StepRecord {
    let surrogate = if record {
        let drift = m.riemannian_gradient(f, x).scaled(-1.0);
        let noise = noise.unwrap_or_else(|| Tangent::zero_at(x));
        let offset = Tangent::new(
            x.clone(),
            linalg::sub(&linalg::sub(&value.vec, &drift.vec), &noise.vec),
        );
        let mean = Tangent::new(x.clone(), linalg::add(&drift.vec, &offset.vec));
        SurrogateGradient {
            base: x.clone(),
            value,
            mean_estimate: Some(mean),
            noise_part: Some(noise),
            offset_part: Some(offset),
        }
    } else {
        SurrogateGradient {
            base: x.clone(),
            value,
            mean_estimate: None,
            noise_part: None,
            offset_part: None,
        }
    };
    StepRecord {
        gamma,
        surrogate,
        clipped,
        non_contractive,
    }
}

/// Geodesic stochastic gradient descent: one oracle query, one exponential
/// step. Zero offset by construction.
pub fn step_rsgd(
    m: &Manifold,
    f: &dyn Objective,
    state: &mut MethodState,
    noise: &NoiseModel,
    stream: &mut Stream,
    gamma: f64,
) -> Result<StepRecord, MethodError> {
    let x = state.current.clone();
    let q = oracles::query(noise, m, f, &x, stream);
    let mut clipped = false;
    let v = clip_to_guard(m, gamma, q.value, &mut clipped);
    let next = rrm_step(m, &x, gamma, &v)?;
    state.current = next;
    state.iter += 1;
    Ok(record_from(
        m, f, &x, gamma, v, q.noise_part, true, clipped, false,
    ))
}

/// Retraction-based stochastic gradient descent. The recorded surrogate is
/// the implied one, log_x(R_x(gamma w)) / gamma, so the reported offset is
/// exactly the retraction's deviation from the exponential map.
pub fn step_resgd(
    m: &Manifold,
    f: &dyn Objective,
    state: &mut MethodState,
    noise: &NoiseModel,
    stream: &mut Stream,
    gamma: f64,
    kind: RetractionKind,
) -> Result<StepRecord, MethodError> {
    if kind == RetractionKind::Exponential {
        // identical to the geodesic method, bitwise
        return step_rsgd(m, f, state, noise, stream, gamma);
    }
    let x = state.current.clone();
    let q = oracles::query(noise, m, f, &x, stream);
    let mut clipped = false;
    let w = clip_to_guard(m, gamma, q.value, &mut clipped);
    let next = m.retract(&x, &w.scaled(gamma), kind)?;
    let implied = m.log_map(&x, &next)?.scaled(1.0 / gamma);
    state.current = next;
    state.iter += 1;
    Ok(record_from(
        m,
        f,
        &x,
        gamma,
        implied,
        q.noise_part,
        true,
        clipped,
        false,
    ))
}

/// Stochastic mirror descent on a Hessian-metric domain:
/// x_{n+1} = P_x(gamma * (-grad f(x) + dual noise)). The same step is the
/// prox retraction applied to the primal surrogate; with decomposition
/// recording on, both routes are computed and must agree to 1e-10.
pub fn step_smd(
    m: &Manifold,
    f: &dyn Objective,
    state: &mut MethodState,
    noise: &NoiseModel,
    stream: &mut Stream,
    gamma: f64,
) -> Result<StepRecord, MethodError> {
    let x = state.current.clone();
    let q = oracles::query(noise, m, f, &x, stream);
    // dual route: P_x(gamma * (-grad f + G U)) with the raw coordinate
    // gradient; the tangency projection only shifts the dual by a multiple
    // of the all-ones vector, which the prox quotients out
    let mut dual = linalg::scale(&f.gradient(&x.coords), -1.0);
    if let Some(u) = &q.noise_part {
        dual = linalg::add(&dual, &m.to_dual(&x, u)?);
    }
    let next = m.prox_mapping(&x, &linalg::scale(&dual, gamma))?;
    // the retraction route must land on the same point
    let retr = m.retract(&x, &q.value.scaled(gamma), RetractionKind::Prox)?;
    let dev = linalg::norm(&linalg::sub(&retr.coords, &next.coords));
    if dev > 1e-10 {
        return Err(MethodError::Config(format!(
            "prox and retraction routes disagree by {dev:.3e}"
        )));
    }
    let implied = m.log_map(&x, &next)?.scaled(1.0 / gamma);
    state.current = next;
    state.iter += 1;
    Ok(record_from(
        m,
        f,
        &x,
        gamma,
        implied,
        q.noise_part,
        true,
        false,
        false,
    ))
}

/// Optimistic gradient: the leader step reuses the previous iteration's
/// oracle draw (made at the previous leader), the follower step queries the
/// oracle once at the new leader and transports the answer back.
pub fn step_rog(
    m: &Manifold,
    f: &dyn Objective,
    state: &mut MethodState,
    noise: &NoiseModel,
    stream: &mut Stream,
    gamma: f64,
) -> Result<StepRecord, MethodError> {
    let x = state.current.clone();
    // bootstrap: the missing pre-history leader is the start point itself
    let prev_leader = state.previous_leader.clone().unwrap_or_else(|| x.clone());
    let prev_draw = match state.previous_draw.clone() {
        Some(d) => d,
        None => oracles::query(noise, m, f, &prev_leader, stream).value,
    };
    let stale_at_x = if prev_leader.coords == x.coords {
        Tangent::new(x.clone(), prev_draw.vec.clone())
    } else {
        m.transport(&prev_leader, &x, &prev_draw)?
    };
    let mut clipped = false;
    let lead_dir = clip_to_guard(m, gamma, stale_at_x, &mut clipped);
    let lead_step = lead_dir.scaled(gamma);
    let leader = m.exp_map(&x, &lead_step)?;
    let q = oracles::query(noise, m, f, &leader, stream);
    let value_at_x = m.pullback_along(&x, &lead_step, &leader, &q.value)?;
    let noise_at_x = match &q.noise_part {
        Some(u) => Some(m.pullback_along(&x, &lead_step, &leader, u)?),
        None => None,
    };
    let v = clip_to_guard(m, gamma, value_at_x, &mut clipped);
    let next = rrm_step(m, &x, gamma, &v)?;
    state.current = next;
    state.previous_leader = Some(leader);
    state.previous_draw = Some(q.value);
    state.iter += 1;
    Ok(record_from(
        m, f, &x, gamma, v, noise_at_x, true, clipped, false,
    ))
}

/// Natural gradient descent: a Euclidean coordinate update along the
/// metric-preconditioned gradient plus tangent-frame noise.
pub fn step_ngd(
    m: &Manifold,
    f: &dyn Objective,
    state: &mut MethodState,
    noise: &NoiseModel,
    stream: &mut Stream,
    gamma: f64,
) -> Result<StepRecord, MethodError> {
    let x = state.current.clone();
    let q = oracles::query(noise, m, f, &x, stream);
    let next_coords = linalg::axpy(&x.coords, gamma, &q.value.vec);
    let residual = m.constraint_residual(&next_coords);
    if !residual.is_finite() {
        return Err(MethodError::Geometry(GeomError::DomainEscape));
    }
    if residual > m.tolerances().point_residual {
        return Err(MethodError::Geometry(GeomError::OffManifold(residual)));
    }
    let next = Point::new(next_coords);
    let implied = m.log_map(&x, &next)?.scaled(1.0 / gamma);
    state.current = next;
    state.iter += 1;
    Ok(record_from(
        m,
        f,
        &x,
        gamma,
        implied,
        q.noise_part,
        true,
        false,
        false,
    ))
}

/// Implicit proximal point: solve log_{x+}(x) = -gamma v(x+) by Picard
/// iteration z -> exp_x(gamma * transport(v(z), z -> x)). At gamma L = 1 the
/// plain iteration settles into a two-cycle; when one is detected the next
/// iterate is the geodesic midpoint of the cycle (a single averaging step),
/// which restores convergence without touching the gamma L < 1 behavior.
/// With a stochastic oracle each inner iterate draws a fresh seed, so the
/// implicit point is only approximated; non-convergence within the budget is
/// flagged, not fatal.
pub fn step_rppm(
    m: &Manifold,
    f: &dyn Objective,
    state: &mut MethodState,
    noise: &NoiseModel,
    stream: &mut Stream,
    gamma: f64,
    inner_iters: usize,
    inner_tol: f64,
) -> Result<StepRecord, MethodError> {
    let x = state.current.clone();
    let mut z = x.clone();
    let mut z_prev: Option<Point> = None;
    let mut result = x.clone();
    let mut last_tangent = Tangent::zero_at(&x);
    let mut last_noise: Option<Tangent> = None;
    let mut converged = false;
    for _ in 0..inner_iters {
        let q = oracles::query(noise, m, f, &z, stream);
        let (w_at_x, noise_at_x) = if z.coords == x.coords {
            (
                Tangent::new(x.clone(), q.value.vec.clone()),
                q.noise_part
                    .as_ref()
                    .map(|u| Tangent::new(x.clone(), u.vec.clone())),
            )
        } else {
            let w = m.transport(&z, &x, &q.value)?;
            let u = match &q.noise_part {
                Some(u) => Some(m.transport(&z, &x, u)?),
                None => None,
            };
            (w, u)
        };
        let mut clipped = false;
        let w_at_x = clip_to_guard(m, gamma, w_at_x, &mut clipped);
        let zn = m.exp_map(&x, &w_at_x.scaled(gamma))?;
        last_tangent = w_at_x;
        last_noise = noise_at_x;
        result = zn.clone();
        let moved = m.dist(&zn, &z)?;
        if moved < inner_tol {
            converged = true;
            break;
        }
        // two-cycle detection: zn returned next to the point before last;
        // continue from the cycle's geodesic midpoint
        if let Some(prev) = &z_prev {
            if m.dist(&zn, prev)? < inner_tol {
                let half = m.log_map(&z, &zn)?.scaled(0.5);
                let mid = m.exp_map(&z, &half)?;
                z_prev = Some(z);
                z = mid;
                continue;
            }
        }
        z_prev = Some(z);
        z = zn;
    }
    // returned point always matches the implied surrogate exactly
    let next = result;
    let value = last_tangent;
    state.current = next;
    state.iter += 1;
    Ok(record_from(
        m,
        f,
        &x,
        gamma,
        value,
        last_noise,
        true,
        false,
        !converged,
    ))
}

/// Extragradient: an exploratory step from a first oracle draw, then the
/// actual step along the transported second draw. The two queries consume
/// distinct sub-streams.
pub fn step_rseg(
    m: &Manifold,
    f: &dyn Objective,
    state: &mut MethodState,
    noise: &NoiseModel,
    stream: &mut Stream,
    gamma: f64,
) -> Result<StepRecord, MethodError> {
    let x = state.current.clone();
    let q1 = oracles::query(noise, m, f, &x, stream);
    let mut clipped = false;
    let lead_dir = clip_to_guard(m, gamma, q1.value, &mut clipped);
    let lead_step = lead_dir.scaled(gamma);
    let leader = m.exp_map(&x, &lead_step)?;
    let q2 = oracles::query(noise, m, f, &leader, stream);
    let value_at_x = m.pullback_along(&x, &lead_step, &leader, &q2.value)?;
    let noise_at_x = match &q2.noise_part {
        Some(u) => Some(m.pullback_along(&x, &lead_step, &leader, u)?),
        None => None,
    };
    let v = clip_to_guard(m, gamma, value_at_x, &mut clipped);
    let next = rrm_step(m, &x, gamma, &v)?;
    state.current = next;
    state.iter += 1;
    Ok(record_from(
        m, f, &x, gamma, v, noise_at_x, true, clipped, false,
    ))
}

/// Apply one step of the configured method.
pub fn step_once(
    m: &Manifold,
    f: &dyn Objective,
    cfg: &MethodConfig,
    state: &mut MethodState,
    stream: &mut Stream,
    n: u64,
) -> Result<StepRecord, MethodError> {
    let gamma = cfg.schedule.step_at(n)?;
    match &cfg.method {
        MethodKind::Rsgd => step_rsgd(m, f, state, &cfg.noise, stream, gamma),
        MethodKind::Resgd { retraction } => {
            step_resgd(m, f, state, &cfg.noise, stream, gamma, (*retraction).into())
        }
        MethodKind::Smd => step_smd(m, f, state, &cfg.noise, stream, gamma),
        MethodKind::Rog => step_rog(m, f, state, &cfg.noise, stream, gamma),
        MethodKind::Ngd => step_ngd(m, f, state, &cfg.noise, stream, gamma),
        MethodKind::Rppm {
            inner_iters,
            inner_tol,
        } => step_rppm(
            m,
            f,
            state,
            &cfg.noise,
            stream,
            gamma,
            *inner_iters,
            *inner_tol,
        ),
        MethodKind::Rseg => step_rseg(m, f, state, &cfg.noise, stream, gamma),
    }
}

/// Residence tolerance for iterates: violations are reported as errors, not
/// silently projected away.
const RESIDENCE_TOL: f64 = 1e-8;

fn run_driver<F>(
    m: &Manifold,
    f: &dyn Objective,
    cfg: &MethodConfig,
    x0: Point,
    stream: &mut Stream,
    mut observe: F,
) -> (MethodState, u64, u64, u64, Option<MethodError>)
where
    F: FnMut(u64, &Point, &StepRecord),
{
    let mut state = MethodState::new(x0);
    let mut clip_events = 0;
    let mut non_contractive_events = 0;
    let mut completed = 0;
    let mut error = None;
    for n in 1..=cfg.max_iters {
        match step_once(m, f, cfg, &mut state, stream, n) {
            Ok(rec) => {
                let residual = m.constraint_residual(&state.current.coords);
                if !(residual <= RESIDENCE_TOL) {
                    error = Some(MethodError::Geometry(GeomError::OffManifold(residual)));
                    break;
                }
                if rec.clipped {
                    clip_events += 1;
                }
                if rec.non_contractive {
                    non_contractive_events += 1;
                }
                completed = n;
                observe(n, &state.current, &rec);
            }
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    (state, clip_events, non_contractive_events, completed, error)
}

/// Run the configured method from `x0`, recording the full trajectory.
/// Deterministic given the stream's seed. The first unrecoverable error
/// aborts the run; everything up to it is kept.
pub fn run(
    m: &Manifold,
    f: &dyn Objective,
    cfg: &MethodConfig,
    x0: Point,
    stream: &mut Stream,
) -> Result<RunOutput, MethodError> {
    cfg.validate(m)?;
    let x0 = m
        .point(x0.coords)
        .map_err(MethodError::Geometry)?;
    let mut points = vec![x0.clone()];
    let mut times = vec![0.0];
    let mut records = if cfg.record_decomposition {
        Some(Vec::with_capacity(cfg.max_iters as usize))
    } else {
        None
    };
    let (_state, clip_events, non_contractive_events, _completed, error) =
        run_driver(m, f, cfg, x0, stream, |_n, x, rec| {
            points.push(x.clone());
            times.push(times.last().unwrap() + rec.gamma);
            if let Some(r) = records.as_mut() {
                r.push(rec.surrogate.clone());
            }
        });
    Ok(RunOutput {
        trajectory: Trajectory {
            points,
            effective_times: times,
            step_records: records,
        },
        clip_events,
        non_contractive_events,
        error,
    })
}

/// Lean variant for large trial batches: keeps the terminal point and
/// counters, plus (optionally) every `stride`-th iterate for plotting.
pub struct TerminalRun {
    pub terminal: Point,
    pub iters_completed: u64,
    pub clip_events: u64,
    pub non_contractive_events: u64,
    pub error: Option<MethodError>,
    pub path_sample: Vec<Point>,
}

pub fn run_terminal(
    m: &Manifold,
    f: &dyn Objective,
    cfg: &MethodConfig,
    x0: Point,
    stream: &mut Stream,
    path_stride: Option<u64>,
) -> Result<TerminalRun, MethodError> {
    cfg.validate(m)?;
    let x0 = m.point(x0.coords).map_err(MethodError::Geometry)?;
    let mut path_sample = Vec::new();
    if path_stride.is_some() {
        path_sample.push(x0.clone());
    }
    let (state, clip_events, non_contractive_events, completed, error) =
        run_driver(m, f, cfg, x0, stream, |n, x, _rec| {
            if let Some(stride) = path_stride {
                if n % stride.max(1) == 0 {
                    path_sample.push(x.clone());
                }
            }
        });
    Ok(TerminalRun {
        terminal: state.current,
        iters_completed: completed,
        clip_events,
        non_contractive_events,
        error,
        path_sample,
    })
}

#[cfg(test)]
mod tests;
