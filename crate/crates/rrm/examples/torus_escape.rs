//! The height function on an embedded torus has one minimizer and three
//! strict saddles (counting the maximum). Stochastic gradient and
//! extragradient trials started next to each saddle wander off and settle at
//! the minimizer; the angle-square picture of the trajectories lands in
//! `torus_escape.svg`.
//!
//! ```text
//! cargo run --release --example torus_escape
//! ```

use rrm::harness::{render_svg, run_experiment, ExperimentConfig};

fn main() {
    for method in ["rsgd", "rseg"] {
        let json = format!(
            r#"{{
            "manifold": {{"kind": "torus", "major_radius": 2.0, "minor_radius": 1.0}},
            "objective": {{"kind": "torus_height"}},
            "method": {{"kind": "{method}"}},
            "schedule": {{"kind": "power", "c": 0.5, "p": 0.6}},
            "noise": {{"kind": "uniform_sphere_frame", "sigma": 0.1}},
            "max_iters": 10000,
            "trials": 30,
            "master_seed": 31415,
            "init": {{"anchors": [{{"label": "saddle0"}}, {{"label": "saddle1"}}, {{"label": "saddle2"}}], "radius": 1e-2}},
            "classify": {{"r_min": 1e-2, "r_saddle": 1e-2, "terminal_grad_tol": 5e-2}},
            "svg_trajectories": 6
        }}"#
        );
        let cfg = ExperimentConfig::from_json(&json).unwrap();
        let report = run_experiment(&cfg, None, false).unwrap();
        println!("== {method} ==");
        for cp in &report.catalog.points {
            println!(
                "  {}: value {:+.1}, spectrum {:?}",
                cp.label, cp.value, cp.spectrum
            );
        }
        println!(
            "  verdicts: min={} saddle={} non-converged={}",
            report.converged_to_min, report.converged_to_saddle, report.non_converged
        );
        if method == "rsgd" {
            let m = cfg.manifold.build().unwrap();
            if let Some(svg) = render_svg(&m, &report, 640) {
                std::fs::write("torus_escape.svg", svg).unwrap();
                println!("  wrote torus_escape.svg");
            }
        }
    }
}
