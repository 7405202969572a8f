//! Smooth objective functions over manifold coordinates.
//!
//! An objective exposes its value and its coordinate (ambient) gradient; the
//! geometry layer turns the latter into a Riemannian gradient for the
//! manifold at hand.

use serde::{Deserialize, Serialize};

/// A smooth function of point coordinates.
pub trait Objective: Sync {
    fn value(&self, coords: &[f64]) -> f64;

    /// Gradient in the same coordinate frame as the point (ambient
    /// coordinates for embedded manifolds, domain coordinates otherwise).
    fn gradient(&self, coords: &[f64]) -> Vec<f64>;

    /// Optional a-priori bound on the Lipschitz constant of the negative
    /// gradient field, used by diagnostics when available.
    fn lipschitz_hint(&self) -> Option<f64> {
        None
    }
}

/// The objectives the experiment harness knows by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BuiltinObjective {
    /// f(x) = sum_i d_i x_i^2. Restricted to the unit sphere this is the
    /// Rayleigh quotient of diag(d); its critical points are the coordinate
    /// axes.
    Rayleigh { diag: Vec<f64> },
    /// f(p) = p_x, the height-along-x Morse function. On the embedded torus
    /// it has one minimum, one maximum and two proper saddles.
    TorusHeight,
    /// f(x) = <c, x>.
    Linear { c: Vec<f64> },
    /// f(x) = sum_i a_i x_i^2 + sum_i b_i x_i, the general diagonal quadratic.
    Quadratic { a: Vec<f64>, b: Vec<f64> },
}

impl Objective for BuiltinObjective {
    fn value(&self, x: &[f64]) -> f64 {
        match self {
            BuiltinObjective::Rayleigh { diag } => {
                diag.iter().zip(x).map(|(d, xi)| d * xi * xi).sum()
            }
            BuiltinObjective::TorusHeight => x[0],
            BuiltinObjective::Linear { c } => c.iter().zip(x).map(|(ci, xi)| ci * xi).sum(),
            BuiltinObjective::Quadratic { a, b } => {
                let quad: f64 = a.iter().zip(x).map(|(ai, xi)| ai * xi * xi).sum();
                let lin: f64 = b.iter().zip(x).map(|(bi, xi)| bi * xi).sum();
                quad + lin
            }
        }
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            BuiltinObjective::Rayleigh { diag } => {
                diag.iter().zip(x).map(|(d, xi)| 2.0 * d * xi).collect()
            }
            BuiltinObjective::TorusHeight => {
                let mut g = vec![0.0; x.len()];
                g[0] = 1.0;
                g
            }
            BuiltinObjective::Linear { c } => c.clone(),
            BuiltinObjective::Quadratic { a, b } => a
                .iter()
                .zip(b)
                .zip(x)
                .map(|((ai, bi), xi)| 2.0 * ai * xi + bi)
                .collect(),
        }
    }
}
