//! The validators behind `rrm validate`: analytic step-size verdicts with
//! numeric partial sums as evidence, Monte-Carlo excitability of the noise,
//! sampled Lipschitz constants, and the offset-versus-step-size ratios of a
//! configured method.
//!
//! ```text
//! cargo run --release --example assumption_check
//! ```

use rrm::harness::{validate_assumptions, ExperimentConfig};
use rrm::schedules::{StepSchedule, Verdict};

fn main() {
    println!("step-size policies against the two required conditions:");
    for (name, s) in [
        ("power 0.5/n^0.6", StepSchedule::Power { c: 0.5, p: 0.6 }),
        ("log-power 1/log(n+1)^1.1", StepSchedule::LogPower { c: 1.0, eps: 0.1 }),
        ("constant 0.1", StepSchedule::Constant { c: 0.1 }),
    ] {
        let div = s.check_divergence(10_000);
        let lam = s.check_lambda_summability(0.5, 10_000).unwrap();
        println!(
            "  {name:<26} sum gamma = {:>9.3}  sum 0.5^(1/gamma) = {:>12.6e}  [{}]",
            div.partial_sum,
            lam.partial_sum,
            match lam.verdict {
                Verdict::PassesHeuristic => "passes",
                Verdict::FailsHeuristic => "FAILS",
            }
        );
    }

    let json = r#"{
        "manifold": {"kind": "sphere", "ambient_dim": 3},
        "objective": {"kind": "rayleigh", "diag": [1.0, 2.0, 3.0]},
        "method": {"kind": "resgd", "retraction": "projection"},
        "schedule": {"kind": "power", "c": 0.5, "p": 0.6},
        "noise": {"kind": "uniform_sphere_frame", "sigma": 1.0},
        "max_iters": 100,
        "trials": 1,
        "master_seed": 8,
        "init": {"anchors": [{"label": "saddle0"}], "radius": 1e-3}
    }"#;
    let cfg = ExperimentConfig::from_json(json).unwrap();
    let report = validate_assumptions(&cfg).unwrap();
    println!("\nfull validator pass for projection-retraction descent on the sphere:");
    println!(
        "  drift field Lipschitz estimate : {:.4}",
        report.lipschitz_estimate
    );
    println!(
        "  excitability (min over probes) : {:.4} +- {:.1e}  (1/pi = {:.4} for this noise)",
        report.excitability_min,
        report.excitability_se,
        1.0 / std::f64::consts::PI
    );
    println!("  sup noise norm                 : {:.4}", report.noise_sup);
    for (gamma, ratio) in &report.offset_ratios {
        println!("  ||offset||/gamma at gamma={gamma:<5e}: {ratio:.6}");
    }
    println!(
        "  injectivity radius lower bound : {}",
        report.injectivity_lower_bound
    );
}
