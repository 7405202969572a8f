//! Stochastic optimization on Riemannian manifolds.
//!
//! This crate implements a family of stochastic approximation methods whose
//! common template is
//!
//! ```text
//! x_{n+1} = exp_{x_n}(gamma_n * v_n)
//! ```
//!
//! where `v_n` is a surrogate for the negative Riemannian gradient of an
//! objective, decomposed into drift, zero-mean noise and a step-size-sized
//! offset. Concrete members include geodesic stochastic gradient descent,
//! retraction-based variants, stochastic mirror descent on Hessian-metric
//! domains (where the prox-mapping is itself a retraction), natural gradient
//! descent, optimistic and extragradient two-step schemes, and an implicit
//! proximal-point method.
//!
//! Around the methods sit:
//!
//! * [`geometry`] - sphere, embedded torus and Hessian-metric manifolds with
//!   exponential/log maps, parallel transport, distances, retractions and
//!   Hessian spectra;
//! * [`oracles`] - stochastic first-order oracles with bounded, uniformly
//!   exciting noise models and estimators for their statistics;
//! * [`schedules`] - step-size policies and validators for the divergence
//!   and lambda-summability conditions they must satisfy;
//! * [`dynamics`] - the Riemannian gradient flow, geodesic interpolation of
//!   iterate sequences, and the deviation measurements that quantify how
//!   closely interpolated iterates shadow the flow;
//! * [`saddle`] - critical-point refinement, strict-saddle classification
//!   and distance-to-set measurements;
//! * [`harness`] - a seeded, parallel multi-trial experiment driver with
//!   assumption validation and CSV/SVG output, exposed through the `rrm`
//!   binary.
//!
//! See the crate examples for runnable end-to-end demonstrations of each
//! capability.

pub mod dynamics;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod methods;
pub mod objective;
pub mod oracles;
pub mod rng;
pub mod saddle;
pub mod schedules;

pub use geometry::{
    GeomError, GeomResult, LegendreKind, Manifold, ManifoldKind, Point, RetractionKind, Tangent,
};
pub use objective::{BuiltinObjective, Objective};
pub use rng::Stream;
