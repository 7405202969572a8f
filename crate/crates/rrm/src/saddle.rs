//! Critical-point machinery: polishing approximate critical points, strict
//! saddle classification from Hessian spectra, catalogs of an objective's
//! critical set, and distance-to-set measurements.
//!
//! A critical point is a strict saddle when its Riemannian Hessian has an
//! eigenvalue below -tol_eig (local maxima count: every direction of strict
//! decrease qualifies); a local minimizer has all eigenvalues above +tol_eig;
//! anything else is degenerate within tolerance.

use crate::geometry::{GeomError, GeomResult, Manifold, Point, Tangent};
use crate::linalg;
use crate::objective::Objective;
use crate::rng::Stream;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    LocalMin,
    StrictSaddle,
    Degenerate,
}

#[derive(Debug, Clone)]
pub struct CriticalPoint {
    pub location: Point,
    pub classification: Classification,
    pub spectrum: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct CriticalCatalog {
    pub points: Vec<CriticalPoint>,
}

impl CriticalCatalog {
    pub fn minimizers(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.points
            .iter()
            .filter(|p| p.classification == Classification::LocalMin)
    }

    pub fn saddles(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.points
            .iter()
            .filter(|p| p.classification == Classification::StrictSaddle)
    }

    pub fn by_label(&self, label: &str) -> Option<&CriticalPoint> {
        self.points.iter().find(|p| p.label == label)
    }
}

/// Tolerances for criticality, eigenvalue signs and catalog deduplication.
#[derive(Debug, Clone)]
pub struct SaddleTolerances {
    pub tol_grad: f64,
    pub tol_eig: f64,
    pub merge_tol: f64,
}

impl Default for SaddleTolerances {
    fn default() -> Self {
        SaddleTolerances {
            tol_grad: 1e-8,
            tol_eig: 1e-4,
            merge_tol: 1e-6,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SaddleError {
    #[error("point did not refine to a critical point (final gradient norm {0:.3e})")]
    NotCritical(f64),
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

/// Polish an approximate critical point by damped Newton steps on the
/// gradient in an orthonormal tangent frame. Returns the refined point once
/// the Riemannian gradient norm drops below `tol`.
pub fn refine_critical(
    m: &Manifold,
    f: &dyn Objective,
    x0: &Point,
    max_iters: usize,
    tol: f64,
) -> Result<Point, SaddleError> {
    let mut x = x0.clone();
    let mut grad_norm = m.norm(&m.riemannian_gradient(f, &x));
    if grad_norm <= tol {
        return Ok(x);
    }
    let mut damping = 0.0f64;
    for _ in 0..max_iters {
        let d = m.intrinsic_dim();
        let frame = m.tangent_frame(&x);
        let grad = m.riemannian_gradient(f, &x);
        let g_coeff: Vec<f64> = frame
            .iter()
            .map(|e| m.inner(&x, &grad, e).expect("frame lives at x"))
            .collect();
        // finite-difference Hessian in the frame (same stencil the spectrum
        // uses), then a damped Newton solve
        let h = m.tolerances().fd_step;
        let eval = |coeff: &[f64]| -> GeomResult<f64> {
            let mut vec = vec![0.0; m.ambient_dim()];
            for (c, e) in coeff.iter().zip(&frame) {
                vec = linalg::axpy(&vec, *c, &e.vec);
            }
            let p = m.exp_map(&x, &Tangent::new(x.clone(), vec))?;
            Ok(f.value(&p.coords))
        };
        let f0 = f.value(&x.coords);
        let mut hess = vec![0.0; d * d];
        for i in 0..d {
            let mut c = vec![0.0; d];
            c[i] = h;
            let fp = eval(&c)?;
            c[i] = -h;
            let fm = eval(&c)?;
            hess[i * d + i] = (fp - 2.0 * f0 + fm) / (h * h);
        }
        for i in 0..d {
            for j in (i + 1)..d {
                let mut c = vec![0.0; d];
                c[i] = h;
                c[j] = h;
                let fpp = eval(&c)?;
                c[j] = -h;
                let fpm = eval(&c)?;
                c[i] = -h;
                c[j] = h;
                let fmp = eval(&c)?;
                c[j] = -h;
                let fmm = eval(&c)?;
                let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
                hess[i * d + j] = v;
                hess[j * d + i] = v;
            }
        }
        // Newton direction for grad = 0; damป with a Levenberg shift against
        // the absolute eigenvalue scale when the plain solve stalls
        let mut step_coeff = None;
        for _ in 0..8 {
            let mut shifted = hess.clone();
            for i in 0..d {
                // shift towards |H| so saddle directions still give descent
                // on ||grad||
                shifted[i * d + i] += damping;
            }
            if let Some(delta) = linalg::solve(&shifted, &linalg::scale(&g_coeff, -1.0), d) {
                let mut vec = vec![0.0; m.ambient_dim()];
                for (c, e) in delta.iter().zip(&frame) {
                    vec = linalg::axpy(&vec, *c, &e.vec);
                }
                let cand = m.exp_map(&x, &Tangent::new(x.clone(), vec))?;
                let cand_norm = m.norm(&m.riemannian_gradient(f, &cand));
                if cand_norm < grad_norm {
                    step_coeff = Some((cand, cand_norm));
                    damping = (damping * 0.25).max(0.0);
                    break;
                }
            }
            damping = if damping == 0.0 { 1e-6 } else { damping * 10.0 };
        }
        match step_coeff {
            Some((cand, cand_norm)) => {
                x = cand;
                grad_norm = cand_norm;
                if grad_norm <= tol {
                    return Ok(x);
                }
            }
            None => break,
        }
    }
    if grad_norm <= tol {
        Ok(x)
    } else {
        Err(SaddleError::NotCritical(grad_norm))
    }
}

/// Classify a critical point from its Hessian spectrum. The gradient must
/// already be below `tol_grad`.
pub fn classify(
    m: &Manifold,
    f: &dyn Objective,
    x: &Point,
    tol: &SaddleTolerances,
) -> Result<CriticalPoint, SaddleError> {
    let grad_norm = m.norm(&m.riemannian_gradient(f, x));
    if grad_norm > tol.tol_grad {
        return Err(SaddleError::NotCritical(grad_norm));
    }
    let spectrum = m.hessian_spectrum(f, x)?;
    let eigs = spectrum.eigenvalues;
    let classification = if eigs.iter().any(|e| *e < -tol.tol_eig) {
        Classification::StrictSaddle
    } else if eigs.iter().all(|e| *e > tol.tol_eig) {
        Classification::LocalMin
    } else {
        Classification::Degenerate
    };
    Ok(CriticalPoint {
        location: x.clone(),
        classification,
        spectrum: eigs,
        value: f.value(&x.coords),
        grad_norm,
        label: String::new(),
    })
}

/// Minimum geodesic distance from `x` to a nonempty set of points.
pub fn dist_to_set(m: &Manifold, x: &Point, set: &[Point]) -> GeomResult<f64> {
    if set.is_empty() {
        return Err(GeomError::ContractViolation(
            "distance to an empty set is undefined".into(),
        ));
    }
    let mut best = f64::INFINITY;
    for s in set {
        best = best.min(m.dist(x, s)?);
    }
    Ok(best)
}

/// Build a catalog of critical points by refining a deterministic batch of
/// candidate starts (a fixed-seed sample of the manifold), deduplicating to
/// `merge_tol`, classifying, and labeling by class and ascending objective
/// value: `min0, min1, ..., saddle0, ..., degenerate0, ...`.
pub fn build_catalog(
    m: &Manifold,
    f: &dyn Objective,
    candidates: usize,
    tol: &SaddleTolerances,
) -> Result<CriticalCatalog, SaddleError> {
    // catalog construction is deterministic and independent of experiment
    // seeds: a fixed internal stream generates the candidate starts
    let mut stream = Stream::new(0x5eed_ca7a_1060);
    let mut found: Vec<CriticalPoint> = Vec::new();
    for _ in 0..candidates {
        let x0 = m.random_point(&mut stream);
        let refined = match refine_critical(m, f, &x0, 100, tol.tol_grad) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let dup = found
            .iter()
            .any(|cp| m.dist(&cp.location, &refined).map(|d| d <= 2.0 * tol.merge_tol).unwrap_or(false));
        if dup {
            continue;
        }
        if let Ok(cp) = classify(m, f, &refined, tol) {
            found.push(cp);
        }
    }
    // deterministic ordering: by class, then value, then coordinates
    let class_rank = |c: Classification| match c {
        Classification::LocalMin => 0usize,
        Classification::StrictSaddle => 1,
        Classification::Degenerate => 2,
    };
    found.sort_by(|a, b| {
        class_rank(a.classification)
            .cmp(&class_rank(b.classification))
            .then(a.value.partial_cmp(&b.value).unwrap())
            .then_with(|| {
                a.location
                    .coords
                    .iter()
                    .zip(&b.location.coords)
                    .find_map(|(x, y)| {
                        let o = x.partial_cmp(y).unwrap();
                        (o != std::cmp::Ordering::Equal).then_some(o)
                    })
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    let mut counts = [0usize; 3];
    for cp in &mut found {
        let k = class_rank(cp.classification);
        let prefix = match cp.classification {
            Classification::LocalMin => "min",
            Classification::StrictSaddle => "saddle",
            Classification::Degenerate => "degenerate",
        };
        cp.label = format!("{prefix}{}", counts[k]);
        counts[k] += 1;
    }
    Ok(CriticalCatalog { points: found })
}
