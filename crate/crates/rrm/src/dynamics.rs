//! Continuous-time companions of the discrete methods: the Riemannian
//! gradient flow, the geodesic interpolation of an iterate sequence on its
//! effective-time clock, and the deviation measurements that quantify how
//! closely the interpolated iterates shadow the flow over fixed-length
//! windows.

use crate::geometry::{GeomError, GeomResult, Manifold, Point, Tangent};
use crate::linalg;
use crate::methods::Trajectory;
use crate::objective::Objective;

/// Fixed-step integrator for the gradient flow dx/dt = -grad f(x).
/// Each substep combines the four classical Runge-Kutta stage velocities in
/// the tangent space at the substep's base point (stage velocities evaluated
/// downstream are parallel-transported back) and advances with one
/// exponential step.
#[derive(Debug, Clone)]
pub struct FlowIntegrator {
    pub dt: f64,
}

impl Default for FlowIntegrator {
    fn default() -> Self {
        FlowIntegrator { dt: 1e-3 }
    }
}

impl FlowIntegrator {
    pub fn new(dt: f64) -> GeomResult<Self> {
        if !(dt > 0.0 && dt <= 1e-2) {
            return Err(GeomError::ContractViolation(format!(
                "flow integrator step must be in (0, 1e-2], got {dt}"
            )));
        }
        Ok(FlowIntegrator { dt })
    }

    fn drift(&self, m: &Manifold, f: &dyn Objective, x: &Point) -> Tangent {
        m.riemannian_gradient(f, x).scaled(-1.0)
    }

    fn substep(&self, m: &Manifold, f: &dyn Objective, x: &Point, h: f64) -> GeomResult<Point> {
        let k1 = self.drift(m, f, x);
        let x2 = m.exp_map(x, &k1.scaled(0.5 * h))?;
        let k2_raw = self.drift(m, f, &x2);
        let k2 = m.transport(&x2, x, &k2_raw)?;
        let x3 = m.exp_map(x, &k2.scaled(0.5 * h))?;
        let k3_raw = self.drift(m, f, &x3);
        let k3 = m.transport(&x3, x, &k3_raw)?;
        let x4 = m.exp_map(x, &k3.scaled(h))?;
        let k4_raw = self.drift(m, f, &x4);
        let k4 = m.transport(&x4, x, &k4_raw)?;
        let mut combo = vec![0.0; x.coords.len()];
        combo = linalg::axpy(&combo, 1.0, &k1.vec);
        combo = linalg::axpy(&combo, 2.0, &k2.vec);
        combo = linalg::axpy(&combo, 2.0, &k3.vec);
        combo = linalg::axpy(&combo, 1.0, &k4.vec);
        let step = Tangent::new(x.clone(), linalg::scale(&combo, h / 6.0));
        m.exp_map(x, &step)
    }

    /// Position of the flow through `x` after time `h >= 0`.
    pub fn flow(&self, m: &Manifold, f: &dyn Objective, x: &Point, h: f64) -> GeomResult<Point> {
        if h < 0.0 {
            return Err(GeomError::ContractViolation(
                "flow time must be nonnegative".into(),
            ));
        }
        if h == 0.0 {
            return Ok(x.clone());
        }
        let n = (h / self.dt).ceil().max(1.0) as usize;
        let dt = h / n as f64;
        let mut x = x.clone();
        for _ in 0..n {
            x = self.substep(m, f, &x, dt)?;
        }
        Ok(x)
    }

    /// Flow positions at each requested time (ascending), integrating once.
    pub fn flow_at_times(
        &self,
        m: &Manifold,
        f: &dyn Objective,
        x: &Point,
        times: &[f64],
    ) -> GeomResult<Vec<Point>> {
        let mut out = Vec::with_capacity(times.len());
        let mut cur = x.clone();
        let mut t = 0.0;
        for &target in times {
            if target < t {
                return Err(GeomError::ContractViolation(
                    "flow probe times must be ascending".into(),
                ));
            }
            if target > t {
                cur = self.flow(m, f, &cur, target - t)?;
                t = target;
            }
            out.push(cur.clone());
        }
        Ok(out)
    }
}

/// Largest 1-based step index n with tau_n <= t, for a trajectory's
/// effective-time clock.
pub fn tinv(traj: &Trajectory, t: f64) -> GeomResult<usize> {
    let times = &traj.effective_times;
    if times.is_empty() || t < times[0] {
        return Err(GeomError::ContractViolation(format!(
            "time {t} precedes the trajectory clock"
        )));
    }
    // binary search for the last index with tau <= t
    let mut lo = 0usize;
    let mut hi = times.len() - 1;
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if times[mid] <= t {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo + 1)
}

/// The geodesic interpolation of a trajectory: within segment n the point
/// moves along exp_{x_n}((t - tau_n) v_n) for the recorded surrogate v_n, so
/// the interpolation passes through every iterate at its effective time and
/// each segment is a geodesic.
pub fn geodesic_interpolation(
    m: &Manifold,
    traj: &Trajectory,
    t: f64,
) -> GeomResult<Point> {
    let records = traj.step_records.as_ref().ok_or(GeomError::ContractViolation(
        "geodesic interpolation needs recorded surrogates".into(),
    ))?;
    let times = &traj.effective_times;
    let last = *times.last().unwrap();
    if t > last {
        return Err(GeomError::ContractViolation(format!(
            "time {t} beyond the trajectory clock (last {last})"
        )));
    }
    let n = tinv(traj, t)?;
    let idx = n - 1;
    if idx >= records.len() {
        // t == tau_last exactly
        return Ok(traj.points[idx].clone());
    }
    let dt = t - times[idx];
    if dt == 0.0 {
        return Ok(traj.points[idx].clone());
    }
    let v = &records[idx].value;
    m.exp_map(&traj.points[idx], &v.scaled(dt))
}

/// Report of flow-shadowing deviations measured at a set of probe times.
#[derive(Debug, Clone)]
pub struct AptReport {
    pub window: f64,
    pub probe_times: Vec<f64>,
    /// sup-deviation over the window at each probe time.
    pub deviations: Vec<f64>,
}

/// sup over a grid of h in [0, T] of
/// dist(interpolation(t + h), flow_h(interpolation(t))).
pub fn apt_deviation(
    m: &Manifold,
    f: &dyn Objective,
    traj: &Trajectory,
    t: f64,
    window: f64,
    probe_grid: usize,
    integrator: &FlowIntegrator,
) -> GeomResult<f64> {
    let last = *traj.effective_times.last().unwrap();
    if t + window > last {
        return Err(GeomError::ContractViolation(format!(
            "probe window [{t}, {}] exceeds the trajectory clock (last {last})",
            t + window
        )));
    }
    let grid = probe_grid.max(2);
    let start = geodesic_interpolation(m, traj, t)?;
    let hs: Vec<f64> = (0..grid)
        .map(|j| window * j as f64 / (grid - 1) as f64)
        .collect();
    let flow_points = integrator.flow_at_times(m, f, &start, &hs)?;
    let mut sup = 0.0f64;
    for (h, fp) in hs.iter().zip(&flow_points) {
        let alpha = geodesic_interpolation(m, traj, t + h)?;
        let d = m.dist(&alpha, fp)?;
        sup = sup.max(d);
    }
    Ok(sup)
}

/// Measure the sup-deviation at several probe times with a shared window.
pub fn apt_report(
    m: &Manifold,
    f: &dyn Objective,
    traj: &Trajectory,
    probe_times: &[f64],
    window: f64,
    probe_grid: usize,
    integrator: &FlowIntegrator,
) -> GeomResult<AptReport> {
    let mut deviations = Vec::with_capacity(probe_times.len());
    for &t in probe_times {
        deviations.push(apt_deviation(m, f, traj, t, window, probe_grid, integrator)?);
    }
    Ok(AptReport {
        window,
        probe_times: probe_times.to_vec(),
        deviations,
    })
}

/// Per-step scaling probe ||exp_x(gamma v) - x - gamma v|| / gamma^2 along a
/// recorded trajectory; on embedded manifolds this ratio stays bounded, which
/// is the second-order offset law the step analysis rests on.
pub fn offset_scaling_probe(
    m: &Manifold,
    traj: &Trajectory,
) -> GeomResult<Vec<f64>> {
    let records = traj.step_records.as_ref().ok_or(GeomError::ContractViolation(
        "offset probe needs recorded surrogates".into(),
    ))?;
    let times = &traj.effective_times;
    let mut out = Vec::with_capacity(records.len());
    for (idx, rec) in records.iter().enumerate() {
        let gamma = times[idx + 1] - times[idx];
        let x = &traj.points[idx];
        let off = m.geodesic_offset(x, &rec.value.scaled(gamma))?;
        out.push(linalg::norm(&off) / (gamma * gamma));
    }
    Ok(out)
}
