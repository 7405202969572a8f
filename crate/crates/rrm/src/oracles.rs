//! Stochastic first-order oracles.
//!
//! A query at x returns a surrogate for the negative Riemannian gradient,
//! `value = -grad f(x) + U`, with the noise U drawn by a pluggable model in a
//! deterministic orthonormal tangent frame. The frame models keep ||U|| = sigma
//! exactly per draw (bounded noise) and have zero conditional mean with a
//! strictly positive expected positive-part correlation against every unit
//! direction, which is what pushes iterates off unstable sets.
//!
//! The module also carries the estimators used by the assumption validators:
//! a Monte-Carlo estimate of the excitability constant
//! E[(<U, v>)_+] over unit directions v, and an offset estimator that
//! averages a method's realized surrogate against the true drift over fresh
//! seeds.

use crate::geometry::{GeomResult, Manifold, Point, Tangent};
use crate::linalg;
use crate::objective::Objective;
use crate::rng::Stream;
use serde::{Deserialize, Serialize};

/// Noise model powering a stochastic first-order oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    /// U = sigma * (uniform direction in the tangent frame); ||U|| = sigma.
    UniformSphereFrame { sigma: f64 },
    /// U = sigma/sqrt(d) * (random signs on the frame axes); ||U|| = sigma.
    RademacherFrame { sigma: f64 },
    /// Sample a minibatch of component objectives without replacement; the
    /// noise is the minibatch gradient's deviation from the full mean
    /// gradient. The objective handed to `query` must be the mean of the
    /// components for the decomposition bookkeeping to close.
    FiniteSumMinibatch {
        components: Vec<crate::objective::BuiltinObjective>,
        batch_size: usize,
    },
}

impl NoiseModel {
    pub fn sigma(&self) -> Option<f64> {
        match self {
            NoiseModel::UniformSphereFrame { sigma } | NoiseModel::RademacherFrame { sigma } => {
                Some(*sigma)
            }
            NoiseModel::FiniteSumMinibatch { .. } => None,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        match self {
            NoiseModel::UniformSphereFrame { sigma } | NoiseModel::RademacherFrame { sigma } => {
                *sigma == 0.0
            }
            NoiseModel::FiniteSumMinibatch {
                components,
                batch_size,
            } => *batch_size >= components.len(),
        }
    }
}

/// One realized surrogate gradient with optional decomposition bookkeeping.
/// When all parts are present, `value = mean_estimate + noise_part` and
/// `mean_estimate = -grad f(base) + offset_part`, so
/// `value = drift + noise + offset` componentwise.
#[derive(Debug, Clone)]
pub struct SurrogateGradient {
    pub base: Point,
    /// The realized surrogate driving the step.
    pub value: Tangent,
    /// Estimate of the conditional mean of `value` given the history.
    pub mean_estimate: Option<Tangent>,
    /// The zero-conditional-mean part.
    pub noise_part: Option<Tangent>,
    /// The systematic step-size-sized part.
    pub offset_part: Option<Tangent>,
}

impl SurrogateGradient {
    /// Residual of the decomposition identity
    /// value - drift - noise - offset (max-abs over components); requires the
    /// bookkeeping parts.
    pub fn decomposition_residual(&self, drift: &Tangent) -> Option<f64> {
        let noise = self.noise_part.as_ref()?;
        let offset = self.offset_part.as_ref()?;
        let r = self
            .value
            .vec
            .iter()
            .zip(&drift.vec)
            .zip(&noise.vec)
            .zip(&offset.vec)
            .map(|(((v, d), n), o)| (v - d - n - o).abs())
            .fold(0.0, f64::max);
        Some(r)
    }
}

/// Summary statistics of an oracle at a point, as estimated by sampling.
#[derive(Debug, Clone, Serialize)]
pub struct OracleStats {
    /// Largest observed noise norm (estimate of the uniform bound M).
    pub sup_noise_norm: f64,
    /// Estimate of the excitability constant c.
    pub excitability: f64,
    /// Largest observed ||offset|| / gamma across the probe grid (estimate
    /// of the offset coefficient B).
    pub bias_over_step: f64,
}

/// Draw the noise vector for a model in an explicitly supplied orthonormal
/// frame. Exposed at crate level so frame-independence can be tested; normal
/// callers go through [`query`], which uses the manifold's canonical frame.
pub(crate) fn draw_noise_in_frame(
    model: &NoiseModel,
    m: &Manifold,
    f: &dyn Objective,
    x: &Point,
    frame: &[Tangent],
    stream: &mut Stream,
) -> Tangent {
    match model {
        NoiseModel::UniformSphereFrame { sigma } => {
            if *sigma == 0.0 {
                return Tangent::zero_at(x);
            }
            let coeff = stream.unit_vector(frame.len());
            frame_combination(x, frame, &coeff, *sigma)
        }
        NoiseModel::RademacherFrame { sigma } => {
            if *sigma == 0.0 {
                return Tangent::zero_at(x);
            }
            let scale = 1.0 / (frame.len() as f64).sqrt();
            let coeff: Vec<f64> = (0..frame.len())
                .map(|_| if stream.next_u64() & 1 == 0 { scale } else { -scale })
                .collect();
            frame_combination(x, frame, &coeff, *sigma)
        }
        NoiseModel::FiniteSumMinibatch {
            components,
            batch_size,
        } => {
            let n = components.len();
            let b = (*batch_size).clamp(1, n);
            let idx = stream.sample_without_replacement(n, b);
            let mut g = vec![0.0; x.coords.len()];
            for i in idx {
                let gi = components[i].gradient(&x.coords);
                g = linalg::axpy(&g, 1.0 / b as f64, &gi);
            }
            let batch_drift = m.project_tangent(x, &linalg::scale(&g, -1.0));
            let full_drift = m.riemannian_gradient(f, x).scaled(-1.0);
            Tangent::new(x.clone(), linalg::sub(&batch_drift.vec, &full_drift.vec))
        }
    }
}

fn frame_combination(x: &Point, frame: &[Tangent], coeff: &[f64], scale: f64) -> Tangent {
    let mut vec = vec![0.0; x.coords.len()];
    for (c, e) in coeff.iter().zip(frame) {
        vec = linalg::axpy(&vec, c * scale, &e.vec);
    }
    Tangent::new(x.clone(), vec)
}

/// Query the oracle: one realized surrogate `-grad f(x) + U` with full
/// decomposition bookkeeping (the oracle itself has zero offset). Each query
/// consumes its own sub-stream split off `stream`, so replaying a stream
/// reproduces every draw bitwise.
pub fn query(
    model: &NoiseModel,
    m: &Manifold,
    f: &dyn Objective,
    x: &Point,
    stream: &mut Stream,
) -> SurrogateGradient {
    let mut sub = stream.split();
    let frame = m.tangent_frame(x);
    let noise = draw_noise_in_frame(model, m, f, x, &frame, &mut sub);
    let drift = m.riemannian_gradient(f, x).scaled(-1.0);
    let value = Tangent::new(x.clone(), linalg::add(&drift.vec, &noise.vec));
    SurrogateGradient {
        base: x.clone(),
        value,
        mean_estimate: Some(drift),
        noise_part: Some(noise),
        offset_part: Some(Tangent::zero_at(x)),
    }
}

/// Monte-Carlo estimate of E[(<U, v>_x)_+] for a unit direction v, with its
/// standard error.
pub fn estimate_excitability(
    model: &NoiseModel,
    m: &Manifold,
    f: &dyn Objective,
    x: &Point,
    v: &Tangent,
    samples: usize,
    stream: &mut Stream,
) -> (f64, f64) {
    let frame = m.tangent_frame(x);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let u = draw_noise_in_frame(model, m, f, x, &frame, stream);
        let inner = m
            .inner(x, &u, v)
            .expect("excitability probe direction must be tangent at x");
        let pos = inner.max(0.0);
        sum += pos;
        sum_sq += pos * pos;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// Estimate a method's offset b = E[surrogate] - drift at a fixed point by
/// averaging realized surrogates over fresh seeds. When a surrogate carries
/// its noise bookkeeping the known zero-mean noise part is subtracted before
/// averaging; that changes nothing in expectation and removes the O(1/sqrt(S))
/// Monte-Carlo floor that would otherwise swamp an O(gamma) offset at small
/// step sizes.
pub fn estimate_offset<F>(
    mut one_surrogate: F,
    m: &Manifold,
    f: &dyn Objective,
    x: &Point,
    gamma: f64,
    samples: usize,
    stream: &mut Stream,
) -> GeomResult<Tangent>
where
    F: FnMut(&mut Stream, f64) -> GeomResult<SurrogateGradient>,
{
    let drift = m.riemannian_gradient(f, x).scaled(-1.0);
    let mut acc = vec![0.0; x.coords.len()];
    for _ in 0..samples {
        let s = one_surrogate(stream, gamma)?;
        let mut dev = linalg::sub(&s.value.vec, &drift.vec);
        if let Some(noise) = &s.noise_part {
            dev = linalg::sub(&dev, &noise.vec);
        }
        acc = linalg::axpy(&acc, 1.0 / samples as f64, &dev);
    }
    Ok(Tangent::new(x.clone(), acc))
}
