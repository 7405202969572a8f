//! Multi-trial experiment driver.
//!
//! An experiment runs `trials` independent trajectories of one method on one
//! manifold/objective pair, classifies every terminal point against the
//! objective's critical-point catalog, and aggregates the verdicts into
//! avoidance statistics (with a Wilson interval on the saddle-convergence
//! frequency). Trials derive their random streams from
//! `(master_seed, trial_index)`, so reports are byte-identical regardless of
//! how many worker threads execute them.
//!
//! The driver also hosts the assumption validators: analytic step-size
//! verdicts, sampled Lipschitz estimates for the drift field, Monte-Carlo
//! excitability estimates for the noise, offset-versus-step-size ratios for
//! the configured method, and the injectivity guard.

mod config;
mod output;

pub use config::{
    AnchorSpec, AptSpec, ClassifySpec, ConfigError, ExperimentConfig, InitSpec, ManifoldSpec,
};
pub use output::{csv_string, render_svg, summary_string, write_csv, write_summary};

use crate::dynamics::{apt_report, AptReport, FlowIntegrator};
use crate::geometry::{Manifold, Point};
use crate::methods::{self, MethodConfig, MethodState};
use crate::objective::Objective;
use crate::oracles;
use crate::rng::Stream;
use crate::saddle::{self, Classification, CriticalCatalog, SaddleTolerances};
use crate::schedules::Verdict as ScheduleVerdict;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("assumption gate: {0} (pass --override-assumptions to run anyway)")]
    AssumptionGate(String),
    #[error("experiment setup failed: {0}")]
    Setup(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TrialVerdict {
    ConvergedToMin(String),
    ConvergedToSaddle(String),
    NonConverged,
}

impl std::fmt::Display for TrialVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrialVerdict::ConvergedToMin(l) => write!(f, "converged_to_min:{l}"),
            TrialVerdict::ConvergedToSaddle(l) => write!(f, "converged_to_saddle:{l}"),
            TrialVerdict::NonConverged => write!(f, "non_converged"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrialReport {
    pub trial: u64,
    pub seed: u64,
    pub terminal: Point,
    /// Distance from the terminal point to each cataloged critical point,
    /// in catalog order.
    pub dists: Vec<f64>,
    pub verdict: TrialVerdict,
    pub clip_events: u64,
    pub iters: u64,
    pub non_contractive_events: u64,
    pub error: Option<String>,
    /// Thinned iterate path, kept only for the first few trials for plotting.
    pub path_sample: Vec<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Warn,
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaCheck {
    pub lambda: f64,
    pub partial_sum: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    /// Sampled Lipschitz constant of the drift field.
    pub lipschitz_estimate: f64,
    pub regularity: Status,
    pub divergence_partial_sum: f64,
    pub lambda_checks: Vec<LambdaCheck>,
    pub step_size: Status,
    /// Smallest excitability estimate over the probed points/directions.
    pub excitability_min: f64,
    pub excitability_se: f64,
    /// Largest observed noise norm across the probes.
    pub noise_sup: f64,
    /// ||offset||/gamma of the configured method across the gamma grid.
    pub offset_ratios: Vec<(f64, f64)>,
    pub oracle: Status,
    pub injectivity_lower_bound: f64,
    pub injectivity: Status,
}

impl AssumptionReport {
    pub fn schedule_passes(&self) -> bool {
        self.step_size == Status::Pass
    }

    /// Condensed oracle statistics: the noise bound, excitability and
    /// offset-coefficient estimates the validators measured.
    pub fn oracle_stats(&self) -> oracles::OracleStats {
        oracles::OracleStats {
            sup_noise_norm: self.noise_sup,
            excitability: self.excitability_min,
            bias_over_step: self
                .offset_ratios
                .iter()
                .map(|(_, r)| *r)
                .fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WilsonInterval {
    pub frequency: f64,
    pub lo: f64,
    pub hi: f64,
}

/// 95% Wilson score interval for a binomial frequency.
pub fn wilson_interval(successes: u64, trials: u64) -> WilsonInterval {
    let z = 1.959_963_984_540_054f64;
    let n = trials as f64;
    if trials == 0 {
        return WilsonInterval {
            frequency: 0.0,
            lo: 0.0,
            hi: 1.0,
        };
    }
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()) / denom;
    WilsonInterval {
        frequency: p,
        lo: (center - half).max(0.0),
        hi: (center + half).min(1.0),
    }
}

#[derive(Debug)]
pub struct AggregateReport {
    pub trials: u64,
    pub converged_to_min: u64,
    pub converged_to_saddle: u64,
    pub non_converged: u64,
    pub saddle_frequency: WilsonInterval,
    pub mean_iters: f64,
    pub clip_total: u64,
    pub assumption_report: AssumptionReport,
    pub trial_reports: Vec<TrialReport>,
    pub catalog: CriticalCatalog,
    pub apt: Option<AptReport>,
}

/// Resolve the anchors of an init spec against the catalog.
fn resolve_anchors(
    m: &Manifold,
    catalog: &CriticalCatalog,
    init: &InitSpec,
) -> Result<Vec<Point>, HarnessError> {
    init.anchors
        .iter()
        .map(|a| match a {
            AnchorSpec::Label { label } => catalog
                .by_label(label)
                .map(|cp| cp.location.clone())
                .ok_or_else(|| {
                    let known: Vec<&str> =
                        catalog.points.iter().map(|p| p.label.as_str()).collect();
                    HarnessError::Setup(format!(
                        "unknown anchor label `{label}`; catalog has {known:?}"
                    ))
                }),
            AnchorSpec::Coords { coords } => m
                .point(coords.clone())
                .map_err(|e| HarnessError::Setup(format!("anchor coords invalid: {e}"))),
        })
        .collect()
}

/// Start a trial within `radius` of its anchor: a uniform tangent direction
/// scaled by a uniform fraction of the radius, pushed through the
/// exponential map. Radius zero starts exactly at the anchor.
fn sample_init(m: &Manifold, anchor: &Point, radius: f64, stream: &mut Stream) -> Point {
    if radius == 0.0 {
        return anchor.clone();
    }
    let r = radius * stream.next_f64();
    let dir = m.random_tangent(anchor, 1.0, stream);
    m.exp_map(anchor, &dir.scaled(r))
        .unwrap_or_else(|_| anchor.clone())
}

fn classify_terminal(
    m: &Manifold,
    f: &dyn Objective,
    catalog: &CriticalCatalog,
    spec: &ClassifySpec,
    terminal: &Point,
) -> (Vec<f64>, TrialVerdict) {
    let mut dists = Vec::with_capacity(catalog.points.len());
    for cp in &catalog.points {
        dists.push(m.dist(terminal, &cp.location).unwrap_or(f64::INFINITY));
    }
    if dists.is_empty() {
        return (dists, TrialVerdict::NonConverged);
    }
    let (nearest, d) = dists
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, d)| (i, *d))
        .unwrap();
    let cp = &catalog.points[nearest];
    let radius = match cp.classification {
        Classification::LocalMin => spec.r_min,
        _ => spec.r_saddle,
    };
    let grad_ok = m.norm(&m.riemannian_gradient(f, terminal)) <= spec.terminal_grad_tol;
    let verdict = if d <= radius && grad_ok {
        match cp.classification {
            Classification::LocalMin => TrialVerdict::ConvergedToMin(cp.label.clone()),
            Classification::StrictSaddle => TrialVerdict::ConvergedToSaddle(cp.label.clone()),
            Classification::Degenerate => TrialVerdict::NonConverged,
        }
    } else {
        TrialVerdict::NonConverged
    };
    (dists, verdict)
}

/// Build the catalog for a config's manifold/objective pair.
pub fn catalog_for(cfg: &ExperimentConfig) -> Result<(Manifold, CriticalCatalog), HarnessError> {
    let m = cfg.manifold.build()?;
    let catalog = saddle::build_catalog(
        &m,
        &cfg.objective,
        cfg.catalog_candidates,
        &SaddleTolerances::default(),
    )
    .map_err(|e| HarnessError::Setup(format!("catalog construction failed: {e}")))?;
    Ok((m, catalog))
}

/// Run the validators for all four standing assumptions. Report-only; the
/// experiment gate looks at the step-size status.
pub fn validate_assumptions(cfg: &ExperimentConfig) -> Result<AssumptionReport, HarnessError> {
    let m = cfg.manifold.build()?;
    let f = &cfg.objective;
    let mut stream = Stream::derive(cfg.master_seed, u64::MAX);

    // regularity: sampled geodesic Lipschitz constant of the drift
    let mut lipschitz: f64 = 0.0;
    for _ in 0..60 {
        let x = m.random_point(&mut stream);
        let step = 0.05 + 0.2 * stream.next_f64();
        let dir = m.random_tangent(&x, step, &mut stream);
        let y = match m.exp_map(&x, &dir) {
            Ok(y) => y,
            Err(_) => continue,
        };
        let d = match m.dist(&x, &y) {
            Ok(d) if d > 1e-9 => d,
            _ => continue,
        };
        let vx = m.riemannian_gradient(f, &x).scaled(-1.0);
        let vy = m.riemannian_gradient(f, &y).scaled(-1.0);
        if let Ok(vx_at_y) = m.transport(&x, &y, &vx) {
            let diff = crate::linalg::sub(&vx_at_y.vec, &vy.vec);
            let num = m
                .inner(
                    &y,
                    &crate::geometry::Tangent::new(y.clone(), diff.clone()),
                    &crate::geometry::Tangent::new(y.clone(), diff),
                )
                .unwrap_or(0.0)
                .max(0.0)
                .sqrt();
            lipschitz = lipschitz.max(num / d);
        }
    }

    // step-size conditions
    let divergence = cfg.schedule.check_divergence(10_000);
    let mut lambda_checks = Vec::new();
    let mut schedule_ok = divergence.verdict == ScheduleVerdict::PassesHeuristic;
    for lambda in [0.25, 0.5, 0.75] {
        let r = cfg
            .schedule
            .check_lambda_summability(lambda, 10_000)
            .expect("lambda in range");
        let passes = r.verdict == ScheduleVerdict::PassesHeuristic;
        schedule_ok &= passes;
        lambda_checks.push(LambdaCheck {
            lambda,
            partial_sum: r.partial_sum,
            passes,
        });
    }

    // oracle noise: excitability over sampled points/directions, noise
    // bound, and the method's offset across a three-decade gamma grid
    let mut excitability_min = f64::INFINITY;
    let mut excitability_se = 0.0;
    let mut noise_sup: f64 = 0.0;
    for _ in 0..20 {
        let x = m.random_point(&mut stream);
        let frame = m.tangent_frame(&x);
        let pick = (stream.next_u64() as usize) % frame.len();
        let v = frame[pick].clone();
        let (est, se) =
            oracles::estimate_excitability(&cfg.noise, &m, f, &x, &v, 10_000, &mut stream);
        if est < excitability_min {
            excitability_min = est;
            excitability_se = se;
        }
        for _ in 0..200 {
            let q = oracles::query(&cfg.noise, &m, f, &x, &mut stream);
            if let Some(u) = &q.noise_part {
                noise_sup = noise_sup.max(m.norm(u));
            }
        }
    }

    let mut offset_ratios = Vec::new();
    {
        let x = m.random_point(&mut stream);
        for gamma in [1e-1, 1e-2, 1e-3] {
            let method = cfg.method.clone();
            let noise = cfg.noise.clone();
            let b = oracles::estimate_offset(
                |s: &mut Stream, g: f64| {
                    let mut state = MethodState::new(x.clone());
                    let step_cfg = MethodConfig {
                        method: method.clone(),
                        schedule: crate::schedules::StepSchedule::Constant { c: g },
                        noise: noise.clone(),
                        max_iters: 1,
                        record_decomposition: true,
                    };
                    let rec = methods::step_once(&m, f, &step_cfg, &mut state, s, 1)
                        .map_err(|e| match e {
                            methods::MethodError::Geometry(g) => g,
                            other => crate::geometry::GeomError::ContractViolation(
                                other.to_string(),
                            ),
                        })?;
                    Ok(rec.surrogate)
                },
                &m,
                f,
                &x,
                gamma,
                1_000,
                &mut stream,
            )
            .map_err(|e| HarnessError::Setup(format!("offset estimation failed: {e}")))?;
            offset_ratios.push((gamma, m.norm(&b) / gamma));
        }
    }
    // warn when the ratio blows up as gamma shrinks (offset not O(gamma)),
    // or when the noise has no uniform excitation
    let ratios_bounded = {
        let largest_gamma_ratio = offset_ratios.first().map(|r| r.1).unwrap_or(0.0);
        let smallest_gamma_ratio = offset_ratios.last().map(|r| r.1).unwrap_or(0.0);
        smallest_gamma_ratio <= (2.0 * largest_gamma_ratio).max(0.05)
    };
    let excitability_ok = excitability_min - 3.0 * excitability_se > 0.0;
    let oracle_status = if ratios_bounded && excitability_ok {
        Status::Pass
    } else {
        Status::Warn
    };

    Ok(AssumptionReport {
        lipschitz_estimate: lipschitz,
        regularity: if lipschitz.is_finite() {
            Status::Pass
        } else {
            Status::Warn
        },
        divergence_partial_sum: divergence.partial_sum,
        lambda_checks,
        step_size: if schedule_ok { Status::Pass } else { Status::Warn },
        excitability_min,
        excitability_se,
        noise_sup,
        offset_ratios,
        oracle: oracle_status,
        injectivity_lower_bound: m.injectivity_lower_bound(),
        injectivity: if m.injectivity_lower_bound() > 0.0 {
            Status::Pass
        } else {
            Status::Warn
        },
    })
}

/// Run the full experiment: catalog, assumption gate, parallel trials,
/// aggregation. Deterministic for a fixed config regardless of `threads`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    threads: Option<usize>,
    override_assumptions: bool,
) -> Result<AggregateReport, HarnessError> {
    cfg.validate()?;
    let (m, catalog) = catalog_for(cfg)?;
    let f = &cfg.objective;

    let assumption_report = validate_assumptions(cfg)?;
    if !assumption_report.schedule_passes() && !override_assumptions {
        return Err(HarnessError::AssumptionGate(
            "step-size schedule fails the summability condition".into(),
        ));
    }

    let method_cfg = MethodConfig {
        method: cfg.method.clone(),
        schedule: cfg.schedule.clone(),
        noise: cfg.noise.clone(),
        max_iters: cfg.max_iters,
        record_decomposition: cfg.record_decomposition,
    };
    method_cfg
        .validate(&m)
        .map_err(|e| HarnessError::Setup(e.to_string()))?;
    let anchors = resolve_anchors(&m, &catalog, &cfg.init)?;

    let path_stride = (cfg.max_iters / 2000).max(1);
    let run_one = |trial: u64| -> TrialReport {
        let mut stream = Stream::derive(cfg.master_seed, trial);
        let seed = cfg.master_seed ^ trial;
        let anchor = &anchors[(trial % anchors.len() as u64) as usize];
        let x0 = sample_init(&m, anchor, cfg.init.radius, &mut stream);
        let keep_path = if trial < cfg.svg_trajectories {
            Some(path_stride)
        } else {
            None
        };
        match methods::run_terminal(&m, f, &method_cfg, x0.clone(), &mut stream, keep_path) {
            Ok(out) => {
                let (dists, verdict) =
                    classify_terminal(&m, f, &catalog, &cfg.classify, &out.terminal);
                TrialReport {
                    trial,
                    seed,
                    terminal: out.terminal,
                    dists,
                    verdict,
                    clip_events: out.clip_events,
                    iters: out.iters_completed,
                    non_contractive_events: out.non_contractive_events,
                    error: out.error.map(|e| e.to_string()),
                    path_sample: out.path_sample,
                }
            }
            Err(e) => TrialReport {
                trial,
                seed,
                terminal: x0.clone(),
                dists: vec![f64::INFINITY; catalog.points.len()],
                verdict: TrialVerdict::NonConverged,
                clip_events: 0,
                iters: 0,
                non_contractive_events: 0,
                error: Some(e.to_string()),
                path_sample: Vec::new(),
            },
        }
    };

    let trial_ids: Vec<u64> = (0..cfg.trials).collect();
    let trial_reports: Vec<TrialReport> = match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| HarnessError::Setup(e.to_string()))?;
            pool.install(|| trial_ids.par_iter().map(|t| run_one(*t)).collect())
        }
        None => trial_ids.par_iter().map(|t| run_one(*t)).collect(),
    };

    // aggregation is a deterministic fold in trial order
    let mut converged_to_min = 0;
    let mut converged_to_saddle = 0;
    let mut non_converged = 0;
    let mut clip_total = 0;
    let mut iter_sum = 0u64;
    for tr in &trial_reports {
        match tr.verdict {
            TrialVerdict::ConvergedToMin(_) => converged_to_min += 1,
            TrialVerdict::ConvergedToSaddle(_) => converged_to_saddle += 1,
            TrialVerdict::NonConverged => non_converged += 1,
        }
        clip_total += tr.clip_events;
        iter_sum += tr.iters;
    }

    // optional shadowing report on a dedicated recorded trajectory
    let apt = match &cfg.apt {
        Some(spec) => Some(run_apt(cfg, &m, spec)?),
        None => None,
    };

    Ok(AggregateReport {
        trials: cfg.trials,
        converged_to_min,
        converged_to_saddle,
        non_converged,
        saddle_frequency: wilson_interval(converged_to_saddle, cfg.trials),
        mean_iters: iter_sum as f64 / cfg.trials as f64,
        clip_total,
        assumption_report,
        trial_reports,
        catalog,
        apt,
    })
}

/// Run one recorded trajectory and measure flow-shadowing deviations at the
/// configured probe indices.
pub fn run_apt(
    cfg: &ExperimentConfig,
    m: &Manifold,
    spec: &AptSpec,
) -> Result<AptReport, HarnessError> {
    let f = &cfg.objective;
    let (_, catalog) = catalog_for(cfg)?;
    let anchors = resolve_anchors(m, &catalog, &cfg.init)?;
    let mut stream = Stream::derive(cfg.master_seed, 0);
    let x0 = sample_init(m, &anchors[0], cfg.init.radius, &mut stream);
    let method_cfg = MethodConfig {
        method: cfg.method.clone(),
        schedule: cfg.schedule.clone(),
        noise: cfg.noise.clone(),
        max_iters: cfg.max_iters,
        record_decomposition: true,
    };
    let out = methods::run(m, f, &method_cfg, x0, &mut stream)
        .map_err(|e| HarnessError::Setup(e.to_string()))?;
    if let Some(e) = out.error {
        return Err(HarnessError::Setup(format!("trajectory aborted: {e}")));
    }
    let traj = out.trajectory;
    let last = *traj.effective_times.last().unwrap();
    let mut probe_times = Vec::new();
    for &n in &spec.probe_indices {
        let idx = n as usize;
        if idx >= traj.effective_times.len() {
            return Err(HarnessError::Setup(format!(
                "probe index {n} beyond trajectory length {}",
                traj.effective_times.len() - 1
            )));
        }
        let t = traj.effective_times[idx];
        if t + spec.window > last {
            return Err(HarnessError::Setup(format!(
                "probe at index {n} (t={t:.3}) has no room for window {}",
                spec.window
            )));
        }
        probe_times.push(t);
    }
    let integ = FlowIntegrator::default();
    apt_report(
        m,
        f,
        &traj,
        &probe_times,
        spec.window,
        spec.probe_grid,
        &integ,
    )
    .map_err(|e| HarnessError::Setup(e.to_string()))
}
