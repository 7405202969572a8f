//! Closed-form kernels for the unit sphere S^{d-1} with the induced metric.

use super::{GeomError, GeomResult};
use crate::linalg::{axpy, clamp_unit, dot, norm, scale};

pub fn project_tangent(x: &[f64], w: &[f64]) -> Vec<f64> {
    // divide by <x,x> so the projector stays exact for points a few ulps off
    // unit norm; otherwise the error re-enters the normal direction and
    // compounds across iterations
    axpy(w, -dot(w, x) / dot(x, x), x)
}

pub fn exp(x: &[f64], v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    if n < 1e-300 {
        return x.to_vec();
    }
    let (s, c) = n.sin_cos();
    x.iter()
        .zip(v)
        .map(|(xi, vi)| c * xi + s * vi / n)
        .collect()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    let c = dot(x, y);
    if c > 0.5 {
        // chord form: acos loses sqrt(eps) accuracy near 1, the chord does not
        let chord = norm(&crate::linalg::sub(x, y));
        2.0 * clamp_unit(0.5 * chord).asin()
    } else {
        clamp_unit(c).acos()
    }
}

pub fn log(x: &[f64], y: &[f64], cut_margin: f64) -> GeomResult<Vec<f64>> {
    let c = dot(x, y);
    let perp = axpy(y, -c, x);
    let np = norm(&perp);
    // atan2 keeps full relative accuracy for small angles
    let theta = np.atan2(c);
    if theta < 1e-300 {
        return Ok(vec![0.0; x.len()]);
    }
    if std::f64::consts::PI - theta < cut_margin || np < 1e-300 {
        return Err(GeomError::OutsideInjectivityRadius);
    }
    Ok(scale(&perp, theta / np))
}

/// Parallel transport along the minimizing geodesic from x to y. The
/// component of `v` along the geodesic direction rotates with it; the
/// orthogonal complement is untouched.
pub fn transport(x: &[f64], y: &[f64], v: &[f64], cut_margin: f64) -> GeomResult<Vec<f64>> {
    let u = log(x, y, cut_margin)?;
    let d = norm(&u);
    if d < 1e-300 {
        return Ok(v.to_vec());
    }
    let uhat = scale(&u, 1.0 / d);
    let a = dot(v, &uhat);
    let (s, c) = d.sin_cos();
    // v + a ((cos d - 1) uhat - sin d x)
    let mut out = v.to_vec();
    out = axpy(&out, a * (c - 1.0), &uhat);
    out = axpy(&out, -a * s, x);
    // scrub numerical drift out of the tangent plane at y
    Ok(axpy(&out, -dot(&out, y), y))
}

/// Test oracle: integrate the ambient geodesic equation x'' = -|x'|^2 x with
/// RK4 instead of using the closed form. Kept here (not in test code) so both
/// the unit tests and the torus kernels' cross-checks can use it.
#[cfg(test)]
pub fn exp_ode_oracle(x: &[f64], v: &[f64], steps: usize) -> Vec<f64> {
    let d = x.len();
    let mut state: Vec<f64> = x.iter().chain(v.iter()).cloned().collect();
    let h = 1.0 / steps as f64;
    let deriv = |s: &[f64]| -> Vec<f64> {
        let (p, q) = s.split_at(d);
        let speed2 = dot(q, q);
        let mut out = Vec::with_capacity(2 * d);
        out.extend_from_slice(q);
        out.extend(p.iter().map(|pi| -speed2 * pi));
        out
    };
    for _ in 0..steps {
        let k1 = deriv(&state);
        let s2: Vec<f64> = state.iter().zip(&k1).map(|(s, k)| s + 0.5 * h * k).collect();
        let k2 = deriv(&s2);
        let s3: Vec<f64> = state.iter().zip(&k2).map(|(s, k)| s + 0.5 * h * k).collect();
        let k3 = deriv(&s3);
        let s4: Vec<f64> = state.iter().zip(&k3).map(|(s, k)| s + h * k).collect();
        let k4 = deriv(&s4);
        for i in 0..2 * d {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    state[..d].to_vec()
}
