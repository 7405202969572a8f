//! Step-size schedules and validators for the two conditions a
//! Robbins-Monro step sequence must satisfy: the partial sums of gamma_n must
//! diverge, and sum_n lambda^(1/gamma_n) must converge for every lambda in
//! (0,1).
//!
//! Summability cannot be decided from finitely many terms, so the verdicts
//! here are analytic per variant; the numeric partial sums are printed
//! evidence, not the decision.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("invalid schedule: {0}")]
    Invalid(String),
    #[error("step index {n} below start index {start}")]
    IndexBeforeStart { n: u64, start: u64 },
}

/// Step-size policy gamma_n, defined for n >= start_index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepSchedule {
    /// gamma_n = c / n^p with p in (0, 1].
    Power { c: f64, p: f64 },
    /// gamma_n = c / log(n+1)^(1+eps), the near-constant family.
    /// log(n+1) rather than log(n) so the n = 1 term is finite.
    LogPower { c: f64, eps: f64 },
    /// gamma_n = c.
    Constant { c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    PassesHeuristic,
    FailsHeuristic,
}

#[derive(Debug, Clone, Copy)]
pub struct CheckResult {
    pub partial_sum: f64,
    pub verdict: Verdict,
}

impl StepSchedule {
    pub fn validate(&self) -> Result<(), ScheduleError> {
        match self {
            StepSchedule::Power { c, p } => {
                if !(*c > 0.0) {
                    return Err(ScheduleError::Invalid("power schedule needs c > 0".into()));
                }
                if !(*p > 0.0 && *p <= 1.0) {
                    return Err(ScheduleError::Invalid(
                        "power schedule needs p in (0, 1]".into(),
                    ));
                }
            }
            StepSchedule::LogPower { c, eps } => {
                if !(*c > 0.0) {
                    return Err(ScheduleError::Invalid(
                        "log-power schedule needs c > 0".into(),
                    ));
                }
                if !(*eps > 0.0) {
                    return Err(ScheduleError::Invalid(
                        "log-power schedule needs eps > 0".into(),
                    ));
                }
            }
            StepSchedule::Constant { c } => {
                if !(*c > 0.0) {
                    return Err(ScheduleError::Invalid(
                        "constant schedule needs c > 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn start_index(&self) -> u64 {
        1
    }

    /// gamma_n. Errors below the start index.
    pub fn step_at(&self, n: u64) -> Result<f64, ScheduleError> {
        let start = self.start_index();
        if n < start {
            return Err(ScheduleError::IndexBeforeStart { n, start });
        }
        Ok(match self {
            StepSchedule::Power { c, p } => c / (n as f64).powf(*p),
            StepSchedule::LogPower { c, eps } => c / ((n as f64) + 1.0).ln().powf(1.0 + eps),
            StepSchedule::Constant { c } => *c,
        })
    }

    /// Partial sum of gamma_n up to N, plus the analytic divergence verdict.
    /// Every supported variant diverges (power exponents are capped at 1).
    pub fn check_divergence(&self, n_terms: u64) -> CheckResult {
        let partial_sum = (self.start_index()..=n_terms)
            .map(|n| self.step_at(n).expect("n >= start"))
            .sum();
        CheckResult {
            partial_sum,
            verdict: Verdict::PassesHeuristic,
        }
    }

    /// Partial sum of lambda^(1/gamma_n) up to N, plus the analytic verdict:
    /// power and log-power schedules make the series converge for every
    /// lambda in (0,1); a constant schedule gives constant terms and fails.
    pub fn check_lambda_summability(
        &self,
        lambda: f64,
        n_terms: u64,
    ) -> Result<CheckResult, ScheduleError> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(ScheduleError::Invalid(format!(
                "lambda must be in (0,1), got {lambda}"
            )));
        }
        let ln_lambda = lambda.ln();
        let partial_sum = (self.start_index()..=n_terms)
            .map(|n| {
                let g = self.step_at(n).expect("n >= start");
                (ln_lambda / g).exp()
            })
            .sum();
        let verdict = match self {
            StepSchedule::Power { .. } | StepSchedule::LogPower { .. } => Verdict::PassesHeuristic,
            StepSchedule::Constant { .. } => Verdict::FailsHeuristic,
        };
        Ok(CheckResult {
            partial_sum,
            verdict,
        })
    }

    /// Whether the schedule satisfies both step-size conditions (analytic).
    pub fn passes_both_conditions(&self) -> bool {
        self.check_divergence(1).verdict == Verdict::PassesHeuristic
            && self
                .check_lambda_summability(0.5, 1)
                .map(|r| r.verdict == Verdict::PassesHeuristic)
                .unwrap_or(false)
    }
}
