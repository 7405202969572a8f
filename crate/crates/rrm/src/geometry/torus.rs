//! Kernels for the torus of revolution embedded in R^3,
//!
//!   p(theta, phi) = ((R + r cos theta) cos phi, (R + r cos theta) sin phi,
//!                    r sin theta),
//!
//! with the induced metric ds^2 = r^2 dtheta^2 + (R + r cos theta)^2 dphi^2.
//! Points and tangent vectors cross this module boundary in ambient
//! coordinates; internally everything runs in angle coordinates.
//!
//! The exponential map integrates the geodesic equations with classical RK4,
//! resolving at most `torus_arc_substep` of arc length per substep. The log
//! map shoots for the initial velocity with a damped Gauss-Newton iteration,
//! trying the wrap classes of the angle difference and keeping the shortest
//! geodesic that converges.

use super::{GeoTolerances, GeomError, GeomResult};
use crate::linalg::{axpy, dot, norm};
use std::f64::consts::{PI, TAU};

pub fn point_of(theta: f64, phi: f64, r_major: f64, r_minor: f64) -> [f64; 3] {
    let a = r_major + r_minor * theta.cos();
    [a * phi.cos(), a * phi.sin(), r_minor * theta.sin()]
}

pub fn angles_of(p: &[f64], r_major: f64, _r_minor: f64) -> (f64, f64) {
    let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
    let theta = p[2].atan2(rho - r_major);
    let phi = p[1].atan2(p[0]);
    (theta, phi)
}

pub fn implicit_residual(p: &[f64], r_major: f64, r_minor: f64) -> f64 {
    let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
    let q = rho - r_major;
    ((q * q + p[2] * p[2]).sqrt() - r_minor).abs()
}

/// Outward unit normal at an ambient point of the surface.
pub fn unit_normal(p: &[f64], r_major: f64, r_minor: f64) -> [f64; 3] {
    let (theta, phi) = angles_of(p, r_major, r_minor);
    [
        theta.cos() * phi.cos(),
        theta.cos() * phi.sin(),
        theta.sin(),
    ]
}

/// Coordinate tangent vectors d/dtheta and d/dphi at (theta, phi), ambient.
fn coordinate_basis(theta: f64, phi: f64, r_major: f64, r_minor: f64) -> ([f64; 3], [f64; 3]) {
    let a = r_major + r_minor * theta.cos();
    let dtheta = [
        -r_minor * theta.sin() * phi.cos(),
        -r_minor * theta.sin() * phi.sin(),
        r_minor * theta.cos(),
    ];
    let dphi = [-a * phi.sin(), a * phi.cos(), 0.0];
    (dtheta, dphi)
}

/// Orthonormal frame (normalized d/dtheta, d/dphi), ambient coordinates.
pub fn orthonormal_frame(p: &[f64], r_major: f64, r_minor: f64) -> Vec<Vec<f64>> {
    let (theta, phi) = angles_of(p, r_major, r_minor);
    let (dt, dp) = coordinate_basis(theta, phi, r_major, r_minor);
    let a = r_major + r_minor * theta.cos();
    vec![
        dt.iter().map(|c| c / r_minor).collect(),
        dp.iter().map(|c| c / a).collect(),
    ]
}

pub fn project_tangent(p: &[f64], w: &[f64], r_major: f64, r_minor: f64) -> Vec<f64> {
    let n = unit_normal(p, r_major, r_minor);
    axpy(w, -dot(w, &n), &n)
}

/// Ambient tangent -> angle-coordinate velocity (v_theta, v_phi).
fn ambient_to_angle(theta: f64, phi: f64, w: &[f64], r_major: f64, r_minor: f64) -> (f64, f64) {
    let (dt, dp) = coordinate_basis(theta, phi, r_major, r_minor);
    let a = r_major + r_minor * theta.cos();
    (dot(w, &dt) / (r_minor * r_minor), dot(w, &dp) / (a * a))
}

fn angle_to_ambient(
    theta: f64,
    phi: f64,
    vt: f64,
    vp: f64,
    r_major: f64,
    r_minor: f64,
) -> Vec<f64> {
    let (dt, dp) = coordinate_basis(theta, phi, r_major, r_minor);
    (0..3).map(|i| vt * dt[i] + vp * dp[i]).collect()
}

/// Metric norm of an angle-coordinate velocity at colatitude theta.
fn metric_norm(theta: f64, vt: f64, vp: f64, r_major: f64, r_minor: f64) -> f64 {
    let a = r_major + r_minor * theta.cos();
    (r_minor * r_minor * vt * vt + a * a * vp * vp).sqrt()
}

/// Geodesic equations in angle coordinates:
///   theta'' = -(A sin theta / r) phi'^2,
///   phi''   = (2 r sin theta / A) theta' phi',      A = R + r cos theta.
#[inline]
fn geodesic_rhs(s: &[f64; 4], r_major: f64, r_minor: f64) -> [f64; 4] {
    let (theta, _phi, pt, pp) = (s[0], s[1], s[2], s[3]);
    let (sin_t, cos_t) = theta.sin_cos();
    let a = r_major + r_minor * cos_t;
    [
        pt,
        pp,
        -(a * sin_t / r_minor) * pp * pp,
        (2.0 * r_minor * sin_t / a) * pt * pp,
    ]
}

fn substep_count(arclen: f64, arc_substep: f64) -> usize {
    ((arclen / arc_substep).ceil() as usize).clamp(1, 4_000_000)
}

/// Integrates the geodesic with initial angle state over unit time, resolving
/// at most `arc_substep` of arc length per RK4 substep. Returns the final
/// (theta, phi, theta', phi').
fn integrate_geodesic(
    mut state: [f64; 4],
    r_major: f64,
    r_minor: f64,
    arc_substep: f64,
) -> [f64; 4] {
    let arclen = metric_norm(state[0], state[2], state[3], r_major, r_minor);
    let n = substep_count(arclen, arc_substep);
    let h = 1.0 / n as f64;
    for _ in 0..n {
        let k1 = geodesic_rhs(&state, r_major, r_minor);
        let mut s2 = state;
        for i in 0..4 {
            s2[i] += 0.5 * h * k1[i];
        }
        let k2 = geodesic_rhs(&s2, r_major, r_minor);
        let mut s3 = state;
        for i in 0..4 {
            s3[i] += 0.5 * h * k2[i];
        }
        let k3 = geodesic_rhs(&s3, r_major, r_minor);
        let mut s4 = state;
        for i in 0..4 {
            s4[i] += h * k3[i];
        }
        let k4 = geodesic_rhs(&s4, r_major, r_minor);
        for i in 0..4 {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    state
}

/// Geodesic plus the parallel transport of the coordinate basis along it.
/// The extra four components hold the 2x2 matrix T (column-major) with
/// T(:,j) = transport of basis vector j from the start to the current point,
/// in angle coordinates:
///   Wt' = -(A sin theta / r) phi' Wp,
///   Wp' =  (r sin theta / A)(theta' Wp + phi' Wt).
fn integrate_geodesic_with_basis_transport(
    start: [f64; 4],
    r_major: f64,
    r_minor: f64,
    arc_substep: f64,
) -> ([f64; 4], [f64; 4]) {
    let arclen = metric_norm(start[0], start[2], start[3], r_major, r_minor);
    let n = substep_count(arclen, arc_substep);
    let h = 1.0 / n as f64;
    let mut state = [
        start[0], start[1], start[2], start[3], 1.0, 0.0, 0.0, 1.0,
    ];
    let rhs = |s: &[f64; 8]| -> [f64; 8] {
        let geo = geodesic_rhs(&[s[0], s[1], s[2], s[3]], r_major, r_minor);
        let (sin_t, cos_t) = s[0].sin_cos();
        let a = r_major + r_minor * cos_t;
        let (pt, pp) = (s[2], s[3]);
        let col = |wt: f64, wp: f64| {
            (
                -(a * sin_t / r_minor) * pp * wp,
                (r_minor * sin_t / a) * (pt * wp + pp * wt),
            )
        };
        let (c0t, c0p) = col(s[4], s[5]);
        let (c1t, c1p) = col(s[6], s[7]);
        [geo[0], geo[1], geo[2], geo[3], c0t, c0p, c1t, c1p]
    };
    for _ in 0..n {
        let k1 = rhs(&state);
        let mut s2 = state;
        for i in 0..8 {
            s2[i] += 0.5 * h * k1[i];
        }
        let k2 = rhs(&s2);
        let mut s3 = state;
        for i in 0..8 {
            s3[i] += 0.5 * h * k2[i];
        }
        let k3 = rhs(&s3);
        let mut s4 = state;
        for i in 0..8 {
            s4[i] += h * k3[i];
        }
        let k4 = rhs(&s4);
        for i in 0..8 {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    (
        [state[0], state[1], state[2], state[3]],
        [state[4], state[5], state[6], state[7]],
    )
}

pub fn exp(p: &[f64], w: &[f64], r_major: f64, r_minor: f64, tol: &GeoTolerances) -> Vec<f64> {
    if norm(w) < 1e-300 {
        return p.to_vec();
    }
    let (theta, phi) = angles_of(p, r_major, r_minor);
    let (vt, vp) = ambient_to_angle(theta, phi, w, r_major, r_minor);
    let end = integrate_geodesic([theta, phi, vt, vp], r_major, r_minor, tol.torus_arc_substep);
    point_of(end[0], end[1], r_major, r_minor).to_vec()
}

fn wrap_angle(a: f64) -> f64 {
    // wrap to (-pi, pi]
    let mut x = a.rem_euclid(TAU);
    if x > PI {
        x -= TAU;
    }
    x
}

/// Geodesic plus its variational equations: the sensitivity of the endpoint
/// state to the initial velocity. Returns the endpoint state and the 2x2
/// block d(theta_end, phi_end)/d(v_theta0, v_phi0), which is exactly the
/// Jacobian Gauss-Newton shooting needs.
fn integrate_geodesic_with_jacobian(
    start: [f64; 4],
    r_major: f64,
    r_minor: f64,
    arc_substep: f64,
) -> ([f64; 4], [f64; 4]) {
    let arclen = metric_norm(start[0], start[2], start[3], r_major, r_minor);
    let n = substep_count(arclen, arc_substep);
    let h = 1.0 / n as f64;
    // s[0..4] geodesic state, s[4..12] the 4x2 sensitivity columns
    // (d state / d vt0, d state / d vp0), column-major.
    let mut state = [0.0f64; 12];
    state[..4].copy_from_slice(&start);
    state[6] = 1.0; // d ptheta / d vt0
    state[11] = 1.0; // d pphi / d vp0
    let rhs = |s: &[f64; 12]| -> [f64; 12] {
        let (theta, pt, pp) = (s[0], s[2], s[3]);
        let (sin_t, cos_t) = theta.sin_cos();
        let a = r_major + r_minor * cos_t;
        let geo = [
            pt,
            pp,
            -(a * sin_t / r_minor) * pp * pp,
            (2.0 * r_minor * sin_t / a) * pt * pp,
        ];
        // rows of DF: partials of the geodesic field wrt (theta, phi, pt, pp)
        let df3_dtheta = -(pp * pp / r_minor) * (a * cos_t - r_minor * sin_t * sin_t);
        let df3_dpp = -2.0 * (a * sin_t / r_minor) * pp;
        let df4_dtheta = 2.0 * r_minor * pt * pp * (a * cos_t + r_minor * sin_t * sin_t) / (a * a);
        let df4_dpt = 2.0 * r_minor * sin_t * pp / a;
        let df4_dpp = 2.0 * r_minor * sin_t * pt / a;
        let mut out = [0.0f64; 12];
        out[..4].copy_from_slice(&geo);
        for col in 0..2 {
            let j = &s[4 + 4 * col..8 + 4 * col];
            let dj = [
                j[2],
                j[3],
                df3_dtheta * j[0] + df3_dpp * j[3],
                df4_dtheta * j[0] + df4_dpt * j[2] + df4_dpp * j[3],
            ];
            out[4 + 4 * col..8 + 4 * col].copy_from_slice(&dj);
        }
        out
    };
    for _ in 0..n {
        let k1 = rhs(&state);
        let mut s2 = state;
        for i in 0..12 {
            s2[i] += 0.5 * h * k1[i];
        }
        let k2 = rhs(&s2);
        let mut s3 = state;
        for i in 0..12 {
            s3[i] += 0.5 * h * k2[i];
        }
        let k3 = rhs(&s3);
        let mut s4 = state;
        for i in 0..12 {
            s4[i] += h * k3[i];
        }
        let k4 = rhs(&s4);
        for i in 0..12 {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    let end = [state[0], state[1], state[2], state[3]];
    // row-major 2x2: d(theta,phi)_end / d(vt0,vp0)
    let jac = [state[4], state[8], state[5], state[9]];
    (end, jac)
}

/// Damped Gauss-Newton shooting at one integrator resolution: drive the
/// endpoint residual from the start `v0` below `goal` within `max_iters`.
fn gauss_newton_stage(
    start: (f64, f64),
    target: (f64, f64),
    v0: (f64, f64),
    r_major: f64,
    r_minor: f64,
    substep: f64,
    goal: f64,
    max_iters: usize,
    backtracks: usize,
) -> Option<(f64, f64)> {
    let plain_residual = |vt: f64, vp: f64| -> (f64, f64) {
        let end = integrate_geodesic([start.0, start.1, vt, vp], r_major, r_minor, substep);
        (wrap_angle(end[0] - target.0), wrap_angle(end[1] - target.1))
    };
    let res_norm = |rt: f64, rp: f64| (rt * rt + rp * rp).sqrt();
    let (mut vt, mut vp) = v0;
    for _ in 0..max_iters {
        let (end, jac) = integrate_geodesic_with_jacobian(
            [start.0, start.1, vt, vp],
            r_major,
            r_minor,
            substep,
        );
        let rt = wrap_angle(end[0] - target.0);
        let rp = wrap_angle(end[1] - target.1);
        let rn = res_norm(rt, rp);
        if rn <= goal {
            return Some((vt, vp));
        }
        let delta = crate::linalg::solve(&jac, &[-rt, -rp], 2)?;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..backtracks {
            let cand = (vt + step * delta[0], vp + step * delta[1]);
            let (nrt, nrp) = plain_residual(cand.0, cand.1);
            if res_norm(nrt, nrp) < rn {
                vt = cand.0;
                vp = cand.1;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    // converged exactly at the budget boundary?
    let (rt, rp) = plain_residual(vt, vp);
    (res_norm(rt, rp) <= goal).then_some((vt, vp))
}

/// Cheap stage of a shooting solve: converge to a loose residual at a coarse
/// integrator resolution. Candidates that fail here are dropped without
/// spending fine-resolution effort.
fn shoot_coarse(
    start: (f64, f64),
    target: (f64, f64),
    v0: (f64, f64),
    r_major: f64,
    r_minor: f64,
    tol: &GeoTolerances,
) -> Option<(f64, f64)> {
    let coarse = (tol.torus_arc_substep * 10.0).min(1e-2);
    let coarse_target = (tol.shoot_residual * 1e3).max(1e-6);
    gauss_newton_stage(
        start,
        target,
        v0,
        r_major,
        r_minor,
        coarse,
        coarse_target,
        tol.shoot_max_iters,
        12,
    )
}

/// Full-resolution polish of a coarse shooting solution down to the
/// shooting residual. Quadratically convergent from a good start, so the
/// iteration budget is small.
fn shoot_polish(
    start: (f64, f64),
    target: (f64, f64),
    v0: (f64, f64),
    r_major: f64,
    r_minor: f64,
    tol: &GeoTolerances,
) -> Option<(f64, f64)> {
    gauss_newton_stage(
        start,
        target,
        v0,
        r_major,
        r_minor,
        tol.torus_arc_substep,
        tol.shoot_residual,
        12.min(tol.shoot_max_iters),
        6,
    )
}

/// Sweep unit-speed geodesics over a fan of launch directions, recording for
/// each direction the arc length of its closest approach to the target.
/// Returns the most promising (initial velocity, arc length) pairs as warm
/// starts for the local polish. The sweep is what makes long-distance
/// shooting global: between distant points the exponential map folds, and a
/// flat-metric initial guess alone can land Gauss-Newton on a much longer
/// geodesic in the same residual class.
fn direction_scan(
    start: (f64, f64),
    target: (f64, f64),
    r_major: f64,
    r_minor: f64,
) -> Vec<(f64, f64)> {
    const DIRECTIONS: usize = 72;
    const KEEP: usize = 5;
    // any two torus points connect over the tube and the inner equator
    let s_max = PI * r_minor + PI * (r_major - r_minor) + 0.5;
    let h_arc = 7.5e-3;
    let steps = (s_max / h_arc).ceil() as usize;
    let q_target = point_of(target.0, target.1, r_major, r_minor);
    let a0 = r_major + r_minor * start.0.cos();
    let mut best: Vec<(f64, (f64, f64))> = Vec::new(); // (chord, velocity)
    for j in 0..DIRECTIONS {
        let psi = TAU * (j as f64) / (DIRECTIONS as f64);
        let v = (psi.cos() / r_minor, psi.sin() / a0);
        // integrate at unit speed, tracking the closest ambient approach
        let mut state = [start.0, start.1, v.0, v.1];
        let h = 1.0 / steps as f64 * s_max;
        let mut closest = (f64::INFINITY, 0.0f64);
        for k in 1..=steps {
            let k1 = geodesic_rhs(&state, r_major, r_minor);
            let mut s2 = state;
            for i in 0..4 {
                s2[i] += 0.5 * h * k1[i];
            }
            let k2 = geodesic_rhs(&s2, r_major, r_minor);
            let mut s3 = state;
            for i in 0..4 {
                s3[i] += 0.5 * h * k2[i];
            }
            let k3 = geodesic_rhs(&s3, r_major, r_minor);
            let mut s4 = state;
            for i in 0..4 {
                s4[i] += h * k3[i];
            }
            let k4 = geodesic_rhs(&s4, r_major, r_minor);
            for i in 0..4 {
                state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            let pos = point_of(state[0], state[1], r_major, r_minor);
            let chord = (0..3).map(|i| (pos[i] - q_target[i]).powi(2)).sum::<f64>().sqrt();
            if chord < closest.0 {
                closest = (chord, k as f64 * h);
            }
        }
        let s_star = closest.1;
        best.push((closest.0, (s_star * v.0, s_star * v.1)));
    }
    best.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    best.truncate(KEEP);
    best.into_iter().map(|(_, v)| v).collect()
}

/// Shoot for the shortest geodesic from p to q.
///
/// Stage one tries the wrap classes of the flat angle difference, ordered by
/// the flat-metric length lower bound sqrt((r dtheta)^2 + ((R-r) dphi)^2) and
/// pruned against the best converged length; minimizers on this torus never
/// wrap more than once per angle. For nearby points the direct class
/// converges immediately and is provably minimal; for distant points the
/// exponential map can fold within a residual class, so stage two sweeps
/// launch directions globally and polishes the best approaches, keeping the
/// overall shortest converged geodesic.
fn shoot_shortest(
    p: &[f64],
    q: &[f64],
    r_major: f64,
    r_minor: f64,
    tol: &GeoTolerances,
) -> GeomResult<(f64, f64, f64, f64)> {
    let (t0, p0) = angles_of(p, r_major, r_minor);
    let (t1, p1) = angles_of(q, r_major, r_minor);
    let direct = (wrap_angle(t1 - t0), wrap_angle(p1 - p0));
    let mut coarse_best: Option<(f64, (f64, f64))> = None;
    let consider = |cand: Option<(f64, f64)>, best: &mut Option<(f64, (f64, f64))>| {
        if let Some((vt, vp)) = cand {
            let len = metric_norm(t0, vt, vp, r_major, r_minor);
            if best.map_or(true, |(l, _)| len < l) {
                *best = Some((len, (vt, vp)));
            }
        }
    };
    let cand = shoot_coarse((t0, p0), (t1, p1), direct, r_major, r_minor, tol);
    consider(cand, &mut coarse_best);
    // Every non-direct geodesic wraps an angle and has length at least
    // pi * min(r, R - r); below half of that the direct solution is the
    // minimizer and the global stage is unnecessary.
    let direct_suffices = coarse_best
        .map_or(false, |(len, _)| len <= 0.5 * PI * r_minor.min(r_major - r_minor));
    if !direct_suffices {
        for init in direction_scan((t0, p0), (t1, p1), r_major, r_minor) {
            let cand = shoot_coarse((t0, p0), (t1, p1), init, r_major, r_minor, tol);
            consider(cand, &mut coarse_best);
        }
    }
    // only the winning candidate pays for the full-resolution polish
    let (_, coarse_v) = coarse_best.ok_or(GeomError::OutsideInjectivityRadius)?;
    let (vt, vp) = shoot_polish((t0, p0), (t1, p1), coarse_v, r_major, r_minor, tol)
        .ok_or(GeomError::OutsideInjectivityRadius)?;
    Ok((t0, p0, vt, vp))
}

pub fn log(
    p: &[f64],
    q: &[f64],
    r_major: f64,
    r_minor: f64,
    tol: &GeoTolerances,
) -> GeomResult<Vec<f64>> {
    if p.iter().zip(q).all(|(a, b)| (a - b).abs() < 1e-14) {
        return Ok(vec![0.0; 3]);
    }
    let (t0, p0, vt, vp) = shoot_shortest(p, q, r_major, r_minor, tol)?;
    Ok(angle_to_ambient(t0, p0, vt, vp, r_major, r_minor))
}

pub fn dist(
    p: &[f64],
    q: &[f64],
    r_major: f64,
    r_minor: f64,
    tol: &GeoTolerances,
) -> GeomResult<f64> {
    if p.iter().zip(q).all(|(a, b)| (a - b).abs() < 1e-14) {
        return Ok(0.0);
    }
    let (t0, _p0, vt, vp) = shoot_shortest(p, q, r_major, r_minor, tol)?;
    Ok(metric_norm(t0, vt, vp, r_major, r_minor))
}

pub fn transport(
    p: &[f64],
    q: &[f64],
    w: &[f64],
    r_major: f64,
    r_minor: f64,
    tol: &GeoTolerances,
) -> GeomResult<Vec<f64>> {
    if p.iter().zip(q).all(|(a, b)| (a - b).abs() < 1e-14) {
        return Ok(w.to_vec());
    }
    let (t0, p0, vt, vp) = shoot_shortest(p, q, r_major, r_minor, tol)?;
    let (wt, wp) = ambient_to_angle(t0, p0, w, r_major, r_minor);
    let (end, t_mat) = integrate_geodesic_with_basis_transport(
        [t0, p0, vt, vp],
        r_major,
        r_minor,
        tol.torus_arc_substep,
    );
    // columns of t_mat are the transported basis vectors
    let out_t = t_mat[0] * wt + t_mat[2] * wp;
    let out_p = t_mat[1] * wt + t_mat[3] * wp;
    let amb = angle_to_ambient(end[0], end[1], out_t, out_p, r_major, r_minor);
    Ok(project_tangent(q, &amb, r_major, r_minor))
}

/// Transport of `w` from the endpoint of the geodesic exp_p(v) back to p,
/// reusing the geodesic rather than shooting for it. `v` and `w` are ambient;
/// the result is the tangent at p with Gamma_{exp_p(v) -> p} w.
pub fn transport_back_along_exp(
    p: &[f64],
    v: &[f64],
    w: &[f64],
    r_major: f64,
    r_minor: f64,
    tol: &GeoTolerances,
) -> Vec<f64> {
    if norm(v) < 1e-300 {
        return w.to_vec();
    }
    let (t0, p0) = angles_of(p, r_major, r_minor);
    let (vt, vp) = ambient_to_angle(t0, p0, v, r_major, r_minor);
    let (end, t_mat) = integrate_geodesic_with_basis_transport(
        [t0, p0, vt, vp],
        r_major,
        r_minor,
        tol.torus_arc_substep,
    );
    let (wt, wp) = ambient_to_angle(end[0], end[1], w, r_major, r_minor);
    // forward transport is the matrix T; going back is its inverse
    let det = t_mat[0] * t_mat[3] - t_mat[2] * t_mat[1];
    let bt = (t_mat[3] * wt - t_mat[2] * wp) / det;
    let bp = (-t_mat[1] * wt + t_mat[0] * wp) / det;
    angle_to_ambient(t0, p0, bt, bp, r_major, r_minor)
}

/// Closed-form nearest point on the torus: pick the tube section by azimuth,
/// then the tube angle towards the query point.
pub fn nearest_point(p: &[f64], r_major: f64, r_minor: f64) -> GeomResult<Vec<f64>> {
    let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
    if rho < 1e-12 {
        return Err(GeomError::ContractViolation(
            "nearest torus point undefined on the symmetry axis".into(),
        ));
    }
    let phi = p[1].atan2(p[0]);
    let q = rho - r_major;
    if q.abs() < 1e-300 && p[2].abs() < 1e-300 {
        return Err(GeomError::ContractViolation(
            "nearest torus point undefined on the core circle".into(),
        ));
    }
    let theta = p[2].atan2(q);
    Ok(point_of(theta, phi, r_major, r_minor).to_vec())
}
