//! Manifold geometry: points, tangent vectors, and the kernel operations
//! (metric, exponential/logarithm maps, parallel transport, distance,
//! retractions, prox-mappings, gradients and Hessian spectra) for the three
//! manifold families this crate ships:
//!
//! * the unit sphere S^{d-1} in R^d (closed-form kernels),
//! * the embedded torus in R^3 (numeric geodesic integration and shooting),
//! * open convex domains with a Hessian metric G(x) = Hess h(x) induced by a
//!   Legendre function h (negative entropy on the simplex, log-barrier on the
//!   positive orthant, and the flat quadratic case).
//!
//! All operations are pure; a `Manifold` is immutable after construction and
//! freely shareable across threads.

mod legendre;
mod sphere;
mod torus;

use crate::linalg;
use crate::objective::Objective;
use crate::rng::Stream;
use thiserror::Error;

/// A point on a manifold, stored in ambient coordinates for the sphere and
/// torus, and in domain coordinates for Hessian-metric manifolds.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }
}

/// A tangent vector attached to a base point, in the same coordinate frame
/// as the point.
#[derive(Debug, Clone)]
pub struct Tangent {
    pub base: Point,
    pub vec: Vec<f64>,
}

impl Tangent {
    pub fn new(base: Point, vec: Vec<f64>) -> Self {
        Tangent { base, vec }
    }

    pub fn zero_at(base: &Point) -> Self {
        Tangent {
            base: base.clone(),
            vec: vec![0.0; base.coords.len()],
        }
    }

    pub fn scaled(&self, s: f64) -> Tangent {
        Tangent {
            base: self.base.clone(),
            vec: linalg::scale(&self.vec, s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetractionKind {
    /// The exponential map itself.
    Exponential,
    /// Step in ambient coordinates, then map to the nearest manifold point.
    Projection,
    /// The prox-mapping retraction R_x(v) = P_x(G(x) v) of a Hessian-metric
    /// manifold.
    Prox,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LegendreKind {
    /// h(x) = sum x_i log x_i on the open probability simplex;
    /// G(x) = diag(1/x_i).
    NegativeEntropy,
    /// h(x) = -sum log x_i on the open positive orthant; G(x) = diag(1/x_i^2).
    LogBarrier,
    /// h(x) = ||x||^2 / 2 on all of R^n; G = I. The flat case, where the
    /// prox retraction coincides with the exponential map.
    Euclidean,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ManifoldKind {
    Sphere { ambient_dim: usize },
    TorusEmbedded { major_radius: f64, minor_radius: f64 },
    HessianRiemannian { legendre: LegendreKind, coords: usize },
}

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("target lies outside the injectivity domain of the base point")]
    OutsideInjectivityRadius,
    #[error("retraction kind is not supported on this manifold")]
    UnsupportedRetraction,
    #[error("operation not supported on this manifold: {0}")]
    UnsupportedOperation(&'static str),
    #[error("update left the manifold domain")]
    DomainEscape,
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("non-finite input")]
    NonFinite,
    #[error("point off the manifold (constraint residual {0:.3e})")]
    OffManifold(f64),
}

pub type GeomResult<T> = Result<T, GeomError>;

/// Numeric tolerances and resolutions used by the geometry kernels. The
/// defaults are what the rest of the crate assumes; tests that stress the
/// kernels can override individual fields.
#[derive(Debug, Clone)]
pub struct GeoTolerances {
    /// Construction-time residual allowed on the manifold's defining
    /// equation.
    pub point_residual: f64,
    /// Construction-time residual allowed on tangency constraints.
    pub tangent_residual: f64,
    /// Arc length covered by one RK4 substep of the torus geodesic
    /// integrator.
    pub torus_arc_substep: f64,
    /// Iteration cap for the torus log-map shooting solver.
    pub shoot_max_iters: usize,
    /// Residual (in angle coordinates) below which shooting is converged.
    pub shoot_residual: f64,
    /// Gradient norm below which a point counts as critical for Hessian
    /// spectra.
    pub criticality_grad_tol: f64,
    /// Step used by the central finite differences of the Hessian.
    pub fd_step: f64,
    /// How close to the sphere's cut locus the log map still answers.
    pub cut_locus_margin: f64,
}

impl Default for GeoTolerances {
    fn default() -> Self {
        GeoTolerances {
            point_residual: 1e-10,
            tangent_residual: 1e-10,
            torus_arc_substep: 1e-3,
            shoot_max_iters: 100,
            shoot_residual: 1e-10,
            criticality_grad_tol: 1e-6,
            fd_step: 1.22e-4,
            cut_locus_margin: 1e-9,
        }
    }
}

/// Hessian spectrum of an objective at a point, with a criticality flag.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Eigenvalues of the Riemannian Hessian, sorted ascending.
    pub eigenvalues: Vec<f64>,
    /// Riemannian gradient norm at the evaluation point.
    pub grad_norm: f64,
    /// Set when the point is not critical to tolerance; the spectrum is then
    /// frame-dependent and should be treated as indicative only.
    pub non_critical: bool,
}

/// A manifold instance: its kind, dimensions, injectivity-radius lower bound
/// and the numeric tolerances its kernels run with.
#[derive(Debug, Clone)]
pub struct Manifold {
    kind: ManifoldKind,
    intrinsic_dim: usize,
    injectivity_lower_bound: f64,
    tol: GeoTolerances,
}

impl Manifold {
    pub fn sphere(ambient_dim: usize) -> GeomResult<Self> {
        if ambient_dim < 2 {
            return Err(GeomError::ContractViolation(
                "sphere needs ambient dimension >= 2".into(),
            ));
        }
        Ok(Manifold {
            kind: ManifoldKind::Sphere { ambient_dim },
            intrinsic_dim: ambient_dim - 1,
            injectivity_lower_bound: std::f64::consts::PI,
            tol: GeoTolerances::default(),
        })
    }

    /// Torus of revolution in R^3 with tube radius `minor` around a circle of
    /// radius `major`; requires major > minor > 0 so the surface is embedded.
    /// The injectivity bound pi*r*(1 - r/R)/2 is a conservative guard, not a
    /// sharp constant.
    pub fn torus(major_radius: f64, minor_radius: f64) -> GeomResult<Self> {
        if !(major_radius > minor_radius && minor_radius > 0.0) {
            return Err(GeomError::ContractViolation(
                "torus requires major_radius > minor_radius > 0".into(),
            ));
        }
        let iota =
            std::f64::consts::PI * minor_radius * (1.0 - minor_radius / major_radius) / 2.0;
        Ok(Manifold {
            kind: ManifoldKind::TorusEmbedded {
                major_radius,
                minor_radius,
            },
            intrinsic_dim: 2,
            injectivity_lower_bound: iota,
            tol: GeoTolerances::default(),
        })
    }

    /// Open probability simplex with `coords` coordinates under the negative
    /// entropy metric diag(1/x_i).
    pub fn entropy_simplex(coords: usize) -> GeomResult<Self> {
        if coords < 2 {
            return Err(GeomError::ContractViolation(
                "simplex needs at least 2 coordinates".into(),
            ));
        }
        Ok(Manifold {
            kind: ManifoldKind::HessianRiemannian {
                legendre: LegendreKind::NegativeEntropy,
                coords,
            },
            intrinsic_dim: coords - 1,
            injectivity_lower_bound: f64::INFINITY,
            tol: GeoTolerances::default(),
        })
    }

    /// Open positive orthant of R^n under the log-barrier metric
    /// diag(1/x_i^2).
    pub fn log_barrier(coords: usize) -> GeomResult<Self> {
        if coords < 1 {
            return Err(GeomError::ContractViolation(
                "log-barrier domain needs at least 1 coordinate".into(),
            ));
        }
        Ok(Manifold {
            kind: ManifoldKind::HessianRiemannian {
                legendre: LegendreKind::LogBarrier,
                coords,
            },
            intrinsic_dim: coords,
            injectivity_lower_bound: f64::INFINITY,
        tol: GeoTolerances::default(),
        })
    }

    /// Flat R^n with the identity metric (the quadratic Legendre case).
    pub fn euclidean(coords: usize) -> GeomResult<Self> {
        if coords < 1 {
            return Err(GeomError::ContractViolation(
                "euclidean space needs at least 1 coordinate".into(),
            ));
        }
        Ok(Manifold {
            kind: ManifoldKind::HessianRiemannian {
                legendre: LegendreKind::Euclidean,
                coords,
            },
            intrinsic_dim: coords,
            injectivity_lower_bound: f64::INFINITY,
            tol: GeoTolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tol: GeoTolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn kind(&self) -> &ManifoldKind {
        &self.kind
    }

    pub fn tolerances(&self) -> &GeoTolerances {
        &self.tol
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    pub fn ambient_dim(&self) -> usize {
        match &self.kind {
            ManifoldKind::Sphere { ambient_dim } => *ambient_dim,
            ManifoldKind::TorusEmbedded { .. } => 3,
            ManifoldKind::HessianRiemannian { coords, .. } => *coords,
        }
    }

    pub fn injectivity_lower_bound(&self) -> f64 {
        self.injectivity_lower_bound
    }

    /// Residual of the manifold's defining constraint at raw coordinates
    /// (0 when the constraint is an open condition that holds).
    pub fn constraint_residual(&self, coords: &[f64]) -> f64 {
        match &self.kind {
            ManifoldKind::Sphere { .. } => (linalg::norm(coords) - 1.0).abs(),
            ManifoldKind::TorusEmbedded {
                major_radius,
                minor_radius,
            } => torus::implicit_residual(coords, *major_radius, *minor_radius),
            ManifoldKind::HessianRiemannian { legendre, .. } => {
                legendre::domain_residual(*legendre, coords)
            }
        }
    }

    /// Validate raw coordinates as a manifold point.
    pub fn point(&self, coords: Vec<f64>) -> GeomResult<Point> {
        if coords.len() != self.ambient_dim() {
            return Err(GeomError::ContractViolation(format!(
                "expected {} coordinates, got {}",
                self.ambient_dim(),
                coords.len()
            )));
        }
        if !linalg::all_finite(&coords) {
            return Err(GeomError::NonFinite);
        }
        let res = self.constraint_residual(&coords);
        if res > self.tol.point_residual {
            return Err(GeomError::OffManifold(res));
        }
        Ok(Point::new(coords))
    }

    /// Validate a raw vector as a tangent vector at `x`.
    pub fn tangent(&self, x: &Point, vec: Vec<f64>) -> GeomResult<Tangent> {
        if !linalg::all_finite(&vec) {
            return Err(GeomError::NonFinite);
        }
        let res = self.tangency_residual(x, &vec);
        if res > self.tol.tangent_residual {
            return Err(GeomError::ContractViolation(format!(
                "vector not tangent (residual {res:.3e})"
            )));
        }
        Ok(Tangent::new(x.clone(), vec))
    }

    fn tangency_residual(&self, x: &Point, vec: &[f64]) -> f64 {
        match &self.kind {
            ManifoldKind::Sphere { .. } => linalg::dot(vec, &x.coords).abs(),
            ManifoldKind::TorusEmbedded {
                major_radius,
                minor_radius,
            } => {
                let n = torus::unit_normal(&x.coords, *major_radius, *minor_radius);
                linalg::dot(vec, &n).abs()
            }
            ManifoldKind::HessianRiemannian { legendre, .. } => match legendre {
                LegendreKind::NegativeEntropy => vec.iter().sum::<f64>().abs(),
                LegendreKind::LogBarrier | LegendreKind::Euclidean => 0.0,
            },
        }
    }

    /// Project an arbitrary coordinate vector onto the tangent space at `x`
    /// (orthogonally with respect to the manifold's metric).
    pub fn project_tangent(&self, x: &Point, w: &[f64]) -> Tangent {
        let vec = match &self.kind {
            ManifoldKind::Sphere { .. } => sphere::project_tangent(&x.coords, w),
            ManifoldKind::TorusEmbedded {
                major_radius,
                minor_radius,
            } => torus::project_tangent(&x.coords, w, *major_radius, *minor_radius),
            ManifoldKind::HessianRiemannian { legendre, .. } => {
                legendre::project_tangent(*legendre, &x.coords, w)
            }
        };
        Tangent::new(x.clone(), vec)
    }

    fn check_base(&self, x: &Point, t: &Tangent, what: &str) -> GeomResult<()> {
        let d = x
            .coords
            .iter()
            .zip(&t.base.coords)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if d > 1e-12 {
            return Err(GeomError::ContractViolation(format!(
                "{what}: tangent base does not match the evaluation point (max diff {d:.3e})"
            )));
        }
        Ok(())
    }

    /// The Riemannian metric at `x` applied to two tangent vectors.
    pub fn inner(&self, x: &Point, u: &Tangent, v: &Tangent) -> GeomResult<f64> {
        self.check_base(x, u, "inner")?;
        self.check_base(x, v, "inner")?;
        Ok(self.inner_raw(x, &u.vec, &v.vec))
    }

    fn inner_raw(&self, x: &Point, u: &[f64], v: &[f64]) -> f64 {
        match &self.kind {
            ManifoldKind::Sphere { .. } | ManifoldKind::TorusEmbedded { .. } => linalg::dot(u, v),
            ManifoldKind::HessianRiemannian { legendre, .. } => {
                legendre::metric_inner(*legendre, &x.coords, u, v)
            }
        }
    }

    /// Metric norm of a tangent vector at its own base point.
    pub fn norm(&self, v: &Tangent) -> f64 {
        self.inner_raw(&v.base, &v.vec, &v.vec).max(0.0).sqrt()
    }

    /// Endpoint at time 1 of the geodesic from `x` with initial velocity `v`.
    /// On Hessian-metric manifolds this is the prox retraction (exact only in
    /// the flat quadratic case); see [`Manifold::retract`].
    pub fn exp_map(&self, x: &Point, v: &Tangent) -> GeomResult<Point> {
        self.check_base(x, v, "exp_map")?;
        if !linalg::all_finite(&v.vec) {
            return Err(GeomError::NonFinite);
        }
        match &self.kind {
            ManifoldKind::Sphere { .. } => Ok(Point::new(sphere::exp(&x.coords, &v.vec))),
            ManifoldKind::TorusEmbedded {
                major_radius,
                minor_radius,
            } => Ok(Point::new(torus::exp(
                &x.coords,
                &v.vec,
                *major_radius,
                *minor_radius,
                &self.tol,
            ))),
            ManifoldKind::HessianRiemannian { legendre, .. } => {
                legendre::prox_retract(*legendre, &x.coords, &v.vec).map(Point::new)
            }
        }
    }

    /// Initial velocity of the minimizing geodesic from `x` to `y`, when one
    /// is found; inverse of [`Manifold::exp_map`].
    pub fn log_map(&self, x: &Point, y: &Point) -> GeomResult<Tangent> {
        match &self.kind {
            ManifoldKind::Sphere { .. } => {
                let v = sphere::log(&x.coords, &y.coords, self.tol.cut_locus_margin)?;
                Ok(Tangent::new(x.clone(), v))
            }
            ManifoldKind::TorusEmbedded {
                major_radius,
                minor_radius,
            } => {
                let v = torus::log(
                    &x.coords,
                    &y.coords,
                    *major_radius,
                    *minor_radius,
                    &self.tol,
                )?;
                Ok(Tangent::new(x.clone(), v))
            }
            ManifoldKind::HessianRiemannian { legendre, .. } => {
                let v = legendre::prox_log(*legendre, &x.coords, &y.coords)?;
                Ok(Tangent::new(x.clone(), v))
            }
        }
    }

    /// Parallel transport of `v` from `x` to `y` along a minimizing geodesic.
    pub fn transport(&self, x: &Point, y: &Point, v: &Tangent) -> GeomResult<Tangent> {
        self.check_base(x, v, "transport")?;
        match &self.kind {
            ManifoldKind::Sphere { .. } => {
                let w = sphere::transport(
                    &x.coords,
                    &y.coords,
                    &v.vec,
                    self.tol.cut_locus_margin,
                )?;
                Ok(Tangent::new(y.clone(), w))
            }
            ManifoldKind::TorusEmbedded {
                major_radius,
                minor_radius,
            } => {
                let w = torus::transport(
                    &x.coords,
                    &y.coords,
                    &v.vec,
                    *major_radius,
                    *minor_radius,
                    &self.tol,
                )?;
                Ok(Tangent::new(y.clone(), w))
            }
            ManifoldKind::HessianRiemannian { legendre, .. } => {
                let w = legendre::transport(*legendre, &x.coords, &y.coords, &v.vec);
                Ok(Tangent::new(y.clone(), w))
            }
        }
    }

    /// Geodesic distance.
    pub fn dist(&self, x: &Point, y: &Point) -> GeomResult<f64> {
        match &self.kind {
            ManifoldKind::Sphere { .. } => Ok(sphere::dist(&x.coords, &y.coords)),
            ManifoldKind::TorusEmbedded {
                major_radius,
                minor_radius,
            } => torus::dist(
                &x.coords,
                &y.coords,
                *major_radius,
                *minor_radius,
                &self.tol,
            ),
            ManifoldKind::HessianRiemannian { legendre, .. } => {
                Ok(legendre::dist(*legendre, &x.coords, &y.coords))
            }
        }
    }

    /// Apply a retraction of the requested kind.
    pub fn retract(&self, x: &Point, v: &Tangent, kind: RetractionKind) -> GeomResult<Point> {
        self.check_base(x, v, "retract")?;
        match kind {
            RetractionKind::Exponential => self.exp_map(x, v),
            RetractionKind::Projection => match &self.kind {
                ManifoldKind::Sphere { .. } => Ok(Point::new(linalg::normalize(&linalg::add(
                    &x.coords, &v.vec,
                )))),
                ManifoldKind::TorusEmbedded {
                    major_radius,
                    minor_radius,
                } => {
                    let p = linalg::add(&x.coords, &v.vec);
                    torus::nearest_point(&p, *major_radius, *minor_radius).map(Point::new)
                }
                ManifoldKind::HessianRiemannian { .. } => Err(GeomError::UnsupportedRetraction),
            },
            RetractionKind::Prox => match &self.kind {
                ManifoldKind::HessianRiemannian { legendre, .. } => {
                    legendre::prox_retract(*legendre, &x.coords, &v.vec).map(Point::new)
                }
                _ => Err(GeomError::UnsupportedRetraction),
            },
        }
    }

    /// Prox-mapping P_x(y) = grad h*(grad h(x) + y) for a dual vector `y`.
    /// Only Hessian-metric manifolds carry one.
    pub fn prox_mapping(&self, x: &Point, dual: &[f64]) -> GeomResult<Point> {
        if !linalg::all_finite(dual) {
            return Err(GeomError::NonFinite);
        }
        match &self.kind {
            ManifoldKind::HessianRiemannian { legendre, .. } => {
                legendre::prox(*legendre, &x.coords, dual).map(Point::new)
            }
            _ => Err(GeomError::UnsupportedOperation(
                "prox_mapping requires a Hessian-metric manifold",
            )),
        }
    }

    /// Dual of a tangent vector: y = G(x) v. Inverse of the primal-from-dual
    /// conversion used by mirror-descent steps.
    pub fn to_dual(&self, x: &Point, v: &Tangent) -> GeomResult<Vec<f64>> {
        self.check_base(x, v, "to_dual")?;
        match &self.kind {
            ManifoldKind::HessianRiemannian { legendre, .. } => {
                Ok(legendre::apply_metric(*legendre, &x.coords, &v.vec))
            }
            _ => Err(GeomError::UnsupportedOperation(
                "to_dual requires a Hessian-metric manifold",
            )),
        }
    }

    /// Primal (tangent) vector of a dual vector: v = G(x)^{-1} y, projected
    /// onto the tangent constraint of the domain.
    pub fn from_dual(&self, x: &Point, dual: &[f64]) -> GeomResult<Tangent> {
        match &self.kind {
            ManifoldKind::HessianRiemannian { legendre, .. } => {
                let raw = legendre::apply_inverse_metric(*legendre, &x.coords, dual);
                Ok(self.project_tangent(x, &raw))
            }
            _ => Err(GeomError::UnsupportedOperation(
                "from_dual requires a Hessian-metric manifold",
            )),
        }
    }

    /// Riemannian gradient of `f` at `x` (the positive gradient; negate for
    /// the descent drift).
    pub fn riemannian_gradient(&self, f: &dyn Objective, x: &Point) -> Tangent {
        let g = f.gradient(&x.coords);
        match &self.kind {
            ManifoldKind::Sphere { .. } | ManifoldKind::TorusEmbedded { .. } => {
                self.project_tangent(x, &g)
            }
            ManifoldKind::HessianRiemannian { legendre, .. } => {
                let raw = legendre::apply_inverse_metric(*legendre, &x.coords, &g);
                self.project_tangent(x, &raw)
            }
        }
    }

    /// An orthonormal basis of the tangent space at `x` (orthonormal in the
    /// manifold's metric). Deterministic: Gram-Schmidt over a fixed candidate
    /// order.
    pub fn tangent_frame(&self, x: &Point) -> Vec<Tangent> {
        let candidates: Vec<Vec<f64>> = match &self.kind {
            ManifoldKind::Sphere { ambient_dim } => (0..*ambient_dim)
                .map(|i| {
                    let mut e = vec![0.0; *ambient_dim];
                    e[i] = 1.0;
                    sphere::project_tangent(&x.coords, &e)
                })
                .collect(),
            ManifoldKind::TorusEmbedded {
                major_radius,
                minor_radius,
            } => {
                return torus::orthonormal_frame(&x.coords, *major_radius, *minor_radius)
                    .into_iter()
                    .map(|v| Tangent::new(x.clone(), v))
                    .collect();
            }
            ManifoldKind::HessianRiemannian { legendre, coords } => {
                legendre::frame_candidates(*legendre, *coords)
                    .into_iter()
                    .map(|c| legendre::project_tangent(*legendre, &x.coords, &c))
                    .collect()
            }
        };
        let mut frame: Vec<Vec<f64>> = Vec::with_capacity(self.intrinsic_dim);
        for cand in candidates {
            if frame.len() == self.intrinsic_dim {
                break;
            }
            let mut w = cand;
            for e in &frame {
                let c = self.inner_raw(x, &w, e);
                w = linalg::axpy(&w, -c, e);
            }
            let n = self.inner_raw(x, &w, &w).max(0.0).sqrt();
            if n > 1e-8 {
                frame.push(linalg::scale(&w, 1.0 / n));
            }
        }
        debug_assert_eq!(frame.len(), self.intrinsic_dim, "rank-deficient frame");
        frame
            .into_iter()
            .map(|v| Tangent::new(x.clone(), v))
            .collect()
    }

    /// Eigenvalues of the Riemannian Hessian of `f` at `x`, computed by
    /// central finite differences of f(exp_x(.)) over an orthonormal tangent
    /// frame and symmetrized. Meaningful as a spectrum at critical points;
    /// `non_critical` is set otherwise.
    pub fn hessian_spectrum(&self, f: &dyn Objective, x: &Point) -> GeomResult<SpectrumResult> {
        let d = self.intrinsic_dim;
        let frame = self.tangent_frame(x);
        let grad_norm = self.norm(&self.riemannian_gradient(f, x));
        let h = self.tol.fd_step;
        let eval = |coeff: &[f64]| -> GeomResult<f64> {
            let mut vec = vec![0.0; self.ambient_dim()];
            for (c, e) in coeff.iter().zip(&frame) {
                vec = linalg::axpy(&vec, *c, &e.vec);
            }
            let p = self.exp_map(x, &Tangent::new(x.clone(), vec))?;
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
        Ok(SpectrumResult {
            eigenvalues: linalg::symmetric_eigenvalues(&hess, d),
            grad_norm,
            non_critical: grad_norm > self.tol.criticality_grad_tol,
        })
    }

    /// Transport `w` (a tangent at `endpoint = exp_x(step)`) back to `x`
    /// along that same geodesic. Equivalent to `transport(endpoint, x, w)`
    /// when the geodesic is minimizing, but reuses the known geodesic instead
    /// of searching for one, which matters on the torus.
    pub(crate) fn pullback_along(
        &self,
        x: &Point,
        step: &Tangent,
        endpoint: &Point,
        w: &Tangent,
    ) -> GeomResult<Tangent> {
        if endpoint.coords == x.coords {
            return Ok(Tangent::new(x.clone(), w.vec.clone()));
        }
        match &self.kind {
            ManifoldKind::Sphere { .. } => {
                let v = sphere::transport(
                    &endpoint.coords,
                    &x.coords,
                    &w.vec,
                    self.tol.cut_locus_margin,
                )?;
                Ok(Tangent::new(x.clone(), v))
            }
            ManifoldKind::TorusEmbedded {
                major_radius,
                minor_radius,
            } => {
                let v = torus::transport_back_along_exp(
                    &x.coords,
                    &step.vec,
                    &w.vec,
                    *major_radius,
                    *minor_radius,
                    &self.tol,
                );
                Ok(Tangent::new(x.clone(), v))
            }
            ManifoldKind::HessianRiemannian { legendre, .. } => {
                let v = legendre::transport(*legendre, &endpoint.coords, &x.coords, &w.vec);
                Ok(Tangent::new(x.clone(), v))
            }
        }
    }

    /// Geodesic offset exp_x(v) - x - v in ambient coordinates; second order
    /// in v. Only defined for manifolds embedded with their induced metric.
    pub fn geodesic_offset(&self, x: &Point, v: &Tangent) -> GeomResult<Vec<f64>> {
        match &self.kind {
            ManifoldKind::Sphere { .. } | ManifoldKind::TorusEmbedded { .. } => {
                let y = self.exp_map(x, v)?;
                Ok(linalg::sub(&linalg::sub(&y.coords, &x.coords), &v.vec))
            }
            ManifoldKind::HessianRiemannian { .. } => Err(GeomError::UnsupportedOperation(
                "geodesic offset needs an ambient embedding",
            )),
        }
    }

    /// A uniformly-spread random point, for samplers and tests.
    pub fn random_point(&self, stream: &mut Stream) -> Point {
        match &self.kind {
            ManifoldKind::Sphere { ambient_dim } => Point::new(stream.unit_vector(*ambient_dim)),
            ManifoldKind::TorusEmbedded {
                major_radius,
                minor_radius,
            } => {
                let theta = stream.next_f64() * std::f64::consts::TAU;
                let phi = stream.next_f64() * std::f64::consts::TAU;
                Point::new(torus::point_of(theta, phi, *major_radius, *minor_radius).to_vec())
            }
            ManifoldKind::HessianRiemannian { legendre, coords } => {
                Point::new(legendre::random_interior(*legendre, *coords, stream))
            }
        }
    }

    /// A random tangent vector at `x` with the requested metric norm.
    pub fn random_tangent(&self, x: &Point, norm: f64, stream: &mut Stream) -> Tangent {
        let frame = self.tangent_frame(x);
        let coeff = stream.unit_vector(frame.len());
        let mut vec = vec![0.0; self.ambient_dim()];
        for (c, e) in coeff.iter().zip(&frame) {
            vec = linalg::axpy(&vec, c * norm, &e.vec);
        }
        Tangent::new(x.clone(), vec)
    }
}

#[cfg(test)]
mod tests;
