//! Kernels for open convex domains carrying the Hessian metric
//! G(x) = Hess h(x) of a Legendre function h.
//!
//! Three choices of h are supported:
//!
//! * negative entropy, h(x) = sum x_i log x_i, on the open probability
//!   simplex; G(x) = diag(1/x_i) and the prox-mapping is the multiplicative
//!   weights update,
//! * log-barrier, h(x) = -sum log x_i, on the open positive orthant;
//!   G(x) = diag(1/x_i^2),
//! * the quadratic h(x) = ||x||^2/2 on all of R^n, which makes everything
//!   flat and Euclidean.
//!
//! The exponential map exposed for these manifolds is the prox retraction
//! R_x(v) = P_x(G(x) v); it agrees with the metric geodesic to first order
//! and is exact only in the quadratic case. Distances and parallel transport
//! use the metric itself (the entropy simplex is isometric to a sphere
//! orthant under x -> sqrt(x); the log-barrier orthant is flat in log
//! coordinates).

use super::{sphere, GeomError, GeomResult, LegendreKind};
use crate::linalg::{dot, norm, sub};
use crate::rng::Stream;

pub fn domain_residual(kind: LegendreKind, x: &[f64]) -> f64 {
    match kind {
        LegendreKind::NegativeEntropy => {
            let interior = x.iter().all(|&xi| xi > 0.0);
            let sum_res = (x.iter().sum::<f64>() - 1.0).abs();
            if interior {
                sum_res
            } else {
                f64::INFINITY
            }
        }
        LegendreKind::LogBarrier => {
            if x.iter().all(|&xi| xi > 0.0) {
                0.0
            } else {
                f64::INFINITY
            }
        }
        LegendreKind::Euclidean => 0.0,
    }
}

pub fn metric_inner(kind: LegendreKind, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
    match kind {
        LegendreKind::NegativeEntropy => u
            .iter()
            .zip(v)
            .zip(x)
            .map(|((ui, vi), xi)| ui * vi / xi)
            .sum(),
        LegendreKind::LogBarrier => u
            .iter()
            .zip(v)
            .zip(x)
            .map(|((ui, vi), xi)| ui * vi / (xi * xi))
            .sum(),
        LegendreKind::Euclidean => dot(u, v),
    }
}

/// y = G(x) v.
pub fn apply_metric(kind: LegendreKind, x: &[f64], v: &[f64]) -> Vec<f64> {
    match kind {
        LegendreKind::NegativeEntropy => v.iter().zip(x).map(|(vi, xi)| vi / xi).collect(),
        LegendreKind::LogBarrier => v.iter().zip(x).map(|(vi, xi)| vi / (xi * xi)).collect(),
        LegendreKind::Euclidean => v.to_vec(),
    }
}

/// v = G(x)^{-1} y (not yet projected onto the domain's tangent constraint).
pub fn apply_inverse_metric(kind: LegendreKind, x: &[f64], y: &[f64]) -> Vec<f64> {
    match kind {
        LegendreKind::NegativeEntropy => y.iter().zip(x).map(|(yi, xi)| yi * xi).collect(),
        LegendreKind::LogBarrier => y.iter().zip(x).map(|(yi, xi)| yi * xi * xi).collect(),
        LegendreKind::Euclidean => y.to_vec(),
    }
}

/// G-orthogonal projection onto the tangent constraint of the domain. The
/// simplex tangent space is {v : sum v_i = 0}; projecting w there
/// G-orthogonally gives w - (sum w_i) x, the replicator correction.
pub fn project_tangent(kind: LegendreKind, x: &[f64], w: &[f64]) -> Vec<f64> {
    match kind {
        LegendreKind::NegativeEntropy => {
            let s: f64 = w.iter().sum();
            w.iter().zip(x).map(|(wi, xi)| wi - s * xi).collect()
        }
        LegendreKind::LogBarrier | LegendreKind::Euclidean => w.to_vec(),
    }
}

/// Prox-mapping P_x(y) = grad h*(grad h(x) + y) for a dual vector y.
pub fn prox(kind: LegendreKind, x: &[f64], y: &[f64]) -> GeomResult<Vec<f64>> {
    match kind {
        LegendreKind::NegativeEntropy => {
            // softmax(log x + y), stabilized by subtracting the max exponent
            let logits: Vec<f64> = x.iter().zip(y).map(|(xi, yi)| xi.ln() + yi).collect();
            let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
            let z: f64 = w.iter().sum();
            if !z.is_finite() || z <= 0.0 {
                return Err(GeomError::NonFinite);
            }
            Ok(w.iter().map(|wi| wi / z).collect())
        }
        LegendreKind::LogBarrier => {
            // grad h(x)_i = -1/x_i, so the new point solves -1/z = -1/x + y
            let mut out = Vec::with_capacity(x.len());
            for (xi, yi) in x.iter().zip(y) {
                let denom = 1.0 - xi * yi;
                if denom <= 0.0 {
                    return Err(GeomError::DomainEscape);
                }
                out.push(xi / denom);
            }
            Ok(out)
        }
        LegendreKind::Euclidean => Ok(x.iter().zip(y).map(|(xi, yi)| xi + yi).collect()),
    }
}

/// The prox retraction R_x(v) = P_x(G(x) v) for a tangent vector v.
pub fn prox_retract(kind: LegendreKind, x: &[f64], v: &[f64]) -> GeomResult<Vec<f64>> {
    prox(kind, x, &apply_metric(kind, x, v))
}

/// Inverse of the prox retraction: the v with R_x(v) = y,
/// v = G(x)^{-1}(grad h(y) - grad h(x)), projected onto the tangent
/// constraint (the simplex prox is invariant to constant dual shifts, and the
/// projection quotients exactly that freedom out).
pub fn prox_log(kind: LegendreKind, x: &[f64], y: &[f64]) -> GeomResult<Vec<f64>> {
    if y.iter().any(|&yi| !yi.is_finite()) {
        return Err(GeomError::NonFinite);
    }
    match kind {
        LegendreKind::NegativeEntropy => {
            if y.iter().any(|&yi| yi <= 0.0) {
                return Err(GeomError::DomainEscape);
            }
            let w: Vec<f64> = x
                .iter()
                .zip(y)
                .map(|(xi, yi)| xi * (yi / xi).ln())
                .collect();
            Ok(project_tangent(kind, x, &w))
        }
        LegendreKind::LogBarrier => {
            if y.iter().any(|&yi| yi <= 0.0) {
                return Err(GeomError::DomainEscape);
            }
            Ok(x.iter().zip(y).map(|(xi, yi)| xi - xi * xi / yi).collect())
        }
        LegendreKind::Euclidean => Ok(sub(y, x)),
    }
}

/// Riemannian distance of the Hessian metric.
pub fn dist(kind: LegendreKind, x: &[f64], y: &[f64]) -> f64 {
    match kind {
        LegendreKind::NegativeEntropy => {
            // x -> sqrt(x) is an isometry onto (a quarter of) the radius-2
            // sphere, so the distance is the Fisher-Rao / Hellinger arc;
            // computed through the sqrt-chord, which stays accurate when the
            // points nearly coincide
            let qx: Vec<f64> = x.iter().map(|xi| xi.max(0.0).sqrt()).collect();
            let qy: Vec<f64> = y.iter().map(|yi| yi.max(0.0).sqrt()).collect();
            2.0 * sphere::dist(&qx, &qy)
        }
        LegendreKind::LogBarrier => {
            let d: Vec<f64> = x
                .iter()
                .zip(y)
                .map(|(xi, yi)| (xi / yi).ln())
                .collect();
            norm(&d)
        }
        LegendreKind::Euclidean => norm(&sub(x, y)),
    }
}

/// Parallel transport of the Hessian metric, via the sqrt isometry for the
/// simplex and log coordinates for the orthant.
pub fn transport(kind: LegendreKind, x: &[f64], y: &[f64], v: &[f64]) -> Vec<f64> {
    match kind {
        LegendreKind::NegativeEntropy => {
            let qx: Vec<f64> = x.iter().map(|xi| xi.sqrt()).collect();
            let qy: Vec<f64> = y.iter().map(|yi| yi.sqrt()).collect();
            // pushforward of v under x -> sqrt(x)
            let w: Vec<f64> = v.iter().zip(&qx).map(|(vi, qi)| vi / (2.0 * qi)).collect();
            // unit-sphere transport (metric scaling does not change it);
            // qx and qy are interior so never antipodal
            let w_at_y = sphere::transport(&qx, &qy, &w, 1e-9)
                .expect("interior simplex points are never antipodal");
            w_at_y.iter().zip(&qy).map(|(wi, qi)| 2.0 * qi * wi).collect()
        }
        LegendreKind::LogBarrier => v
            .iter()
            .zip(x)
            .zip(y)
            .map(|((vi, xi), yi)| vi * yi / xi)
            .collect(),
        LegendreKind::Euclidean => v.to_vec(),
    }
}

/// Deterministic spanning candidates for the tangent constraint, fed to
/// Gram-Schmidt by the caller.
pub fn frame_candidates(kind: LegendreKind, n: usize) -> Vec<Vec<f64>> {
    match kind {
        LegendreKind::NegativeEntropy => (0..n.saturating_sub(1))
            .map(|i| {
                let mut c = vec![0.0; n];
                c[i] = 1.0;
                c[i + 1] = -1.0;
                c
            })
            .collect(),
        LegendreKind::LogBarrier | LegendreKind::Euclidean => (0..n)
            .map(|i| {
                let mut c = vec![0.0; n];
                c[i] = 1.0;
                c
            })
            .collect(),
    }
}

pub fn random_interior(kind: LegendreKind, n: usize, stream: &mut Stream) -> Vec<f64> {
    match kind {
        LegendreKind::NegativeEntropy => {
            // softmax of Gaussians stays comfortably interior
            let g = stream.gaussians(n);
            let m = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = g.iter().map(|gi| (gi - m).exp()).collect();
            let z: f64 = w.iter().sum();
            w.iter().map(|wi| wi / z).collect()
        }
        LegendreKind::LogBarrier => stream.gaussians(n).iter().map(|g| (0.5 * g).exp()).collect(),
        LegendreKind::Euclidean => stream.gaussians(n),
    }
}
