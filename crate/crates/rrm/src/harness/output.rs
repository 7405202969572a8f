//! Report serialization: per-trial CSV, a plain-text summary, and an SVG
//! chart of torus trajectories in the angle square.

use super::{AggregateReport, Status};
use crate::geometry::{Manifold, ManifoldKind, Point};
use crate::saddle::Classification;
use std::fmt::Write as _;
use std::f64::consts::TAU;

/// One row per trial:
/// `trial,seed,verdict,x0..,dist_<label>..,clip_events,iters`.
/// With `timestamp` set, a comment header line records the generation time;
/// suppressing it makes reruns byte-identical.
pub fn csv_string(report: &AggregateReport, timestamp: Option<u64>) -> String {
    let mut out = String::new();
    if let Some(ts) = timestamp {
        let _ = writeln!(out, "# generated_at_unix {ts}");
    }
    let dim = report
        .trial_reports
        .first()
        .map(|t| t.terminal.coords.len())
        .unwrap_or(0);
    let mut header = String::from("trial,seed,verdict");
    for i in 0..dim {
        let _ = write!(header, ",x{i}");
    }
    for cp in &report.catalog.points {
        let _ = write!(header, ",dist_{}", cp.label);
    }
    header.push_str(",clip_events,iters");
    let _ = writeln!(out, "{header}");
    for tr in &report.trial_reports {
        let _ = write!(out, "{},{},{}", tr.trial, tr.seed, tr.verdict);
        for c in &tr.terminal.coords {
            let _ = write!(out, ",{c}");
        }
        for d in &tr.dists {
            let _ = write!(out, ",{d}");
        }
        let _ = writeln!(out, ",{},{}", tr.clip_events, tr.iters);
    }
    out
}

pub fn write_csv(
    report: &AggregateReport,
    path: &std::path::Path,
    timestamp: Option<u64>,
) -> std::io::Result<()> {
    std::fs::write(path, csv_string(report, timestamp))
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Warn => "WARN",
    }
}

/// Human-readable aggregate summary.
pub fn summary_string(report: &AggregateReport) -> String {
    let mut out = String::new();
    let a = &report.assumption_report;
    let _ = writeln!(out, "trials: {}", report.trials);
    let _ = writeln!(
        out,
        "verdicts: converged_to_min={} converged_to_saddle={} non_converged={}",
        report.converged_to_min, report.converged_to_saddle, report.non_converged
    );
    let w = report.saddle_frequency;
    let _ = writeln!(
        out,
        "saddle convergence frequency: {:.4} (95% Wilson [{:.4}, {:.4}])",
        w.frequency, w.lo, w.hi
    );
    let _ = writeln!(out, "mean iterations: {:.1}", report.mean_iters);
    let _ = writeln!(out, "clip events: {}", report.clip_total);
    let _ = writeln!(out, "critical catalog:");
    for cp in &report.catalog.points {
        let class = match cp.classification {
            Classification::LocalMin => "min",
            Classification::StrictSaddle => "strict saddle",
            Classification::Degenerate => "degenerate",
        };
        let _ = writeln!(
            out,
            "  {}: {} value={:.6} spectrum={:?} at {:?}",
            cp.label, class, cp.value, cp.spectrum, cp.location.coords
        );
    }
    let _ = writeln!(out, "assumption validators:");
    let _ = writeln!(
        out,
        "  regularity:    [{}] sampled Lipschitz estimate {:.4}",
        status_str(a.regularity),
        a.lipschitz_estimate
    );
    let _ = writeln!(
        out,
        "  step sizes:    [{}] sum gamma (N=1e4) = {:.4}",
        status_str(a.step_size),
        a.divergence_partial_sum
    );
    for lc in &a.lambda_checks {
        let _ = writeln!(
            out,
            "                 lambda={}: partial sum {:.6e} ({})",
            lc.lambda,
            lc.partial_sum,
            if lc.passes { "passes" } else { "FAILS" }
        );
    }
    let _ = writeln!(
        out,
        "  oracle noise:  [{}] excitability >= {:.4} (se {:.1e}), sup||noise|| = {:.4}",
        status_str(a.oracle),
        a.excitability_min,
        a.excitability_se,
        a.noise_sup
    );
    for (gamma, ratio) in &a.offset_ratios {
        let _ = writeln!(out, "                 gamma={gamma:.0e}: ||offset||/gamma = {ratio:.4}");
    }
    let _ = writeln!(
        out,
        "  injectivity:   [{}] lower bound {}",
        status_str(a.injectivity),
        a.injectivity_lower_bound
    );
    if let Some(apt) = &report.apt {
        let _ = writeln!(out, "flow shadowing (window {}):", apt.window);
        for (t, d) in apt.probe_times.iter().zip(&apt.deviations) {
            let _ = writeln!(out, "  t={t:.3}: sup deviation {d:.6e}");
        }
    }
    out
}

pub fn write_summary(report: &AggregateReport, path: &std::path::Path) -> std::io::Result<()> {
    std::fs::write(path, summary_string(report))
}

fn wrap_tau(a: f64) -> f64 {
    a.rem_euclid(TAU)
}

/// Render torus trajectories into the (theta, phi) angle square, with
/// periodic wrap cuts (a jump above pi in either angle splits the polyline),
/// saddles as black markers and minimizers as red markers.
pub fn render_svg(m: &Manifold, report: &AggregateReport, size: u32) -> Option<String> {
    let (major, minor) = match m.kind() {
        ManifoldKind::TorusEmbedded {
            major_radius,
            minor_radius,
        } => (*major_radius, *minor_radius),
        _ => return None,
    };
    let angles = |p: &Point| -> (f64, f64) {
        let rho = (p.coords[0] * p.coords[0] + p.coords[1] * p.coords[1]).sqrt();
        let theta = p.coords[2].atan2(rho - major);
        let phi = p.coords[1].atan2(p.coords[0]);
        let _ = minor;
        (wrap_tau(theta), wrap_tau(phi))
    };
    let px = |a: f64| a / TAU * size as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(
        out,
        "<rect width=\"{size}\" height=\"{size}\" fill=\"white\" stroke=\"black\"/>"
    );
    let palette = ["#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"];
    let mut traj_idx = 0usize;
    for tr in &report.trial_reports {
        if tr.path_sample.is_empty() {
            continue;
        }
        let color = palette[traj_idx % palette.len()];
        let _ = writeln!(out, "<g class=\"traj\" id=\"traj{}\">", tr.trial);
        let pts: Vec<(f64, f64)> = tr.path_sample.iter().map(&angles).collect();
        let mut segment: Vec<(f64, f64)> = Vec::new();
        let flush = |seg: &mut Vec<(f64, f64)>, out: &mut String| {
            if seg.len() >= 2 {
                let coords: Vec<String> = seg
                    .iter()
                    .map(|(t, p)| format!("{:.2},{:.2}", px(*p), size as f64 - px(*t)))
                    .collect();
                let _ = writeln!(
                    out,
                    "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" points=\"{}\"/>",
                    coords.join(" ")
                );
            }
            seg.clear();
        };
        for (i, pt) in pts.iter().enumerate() {
            if i > 0 {
                let prev = pts[i - 1];
                // consecutive angle jump above pi means the path wrapped
                // around the square, not across it
                if (pt.0 - prev.0).abs() > std::f64::consts::PI
                    || (pt.1 - prev.1).abs() > std::f64::consts::PI
                {
                    flush(&mut segment, &mut out);
                }
            }
            segment.push(*pt);
        }
        flush(&mut segment, &mut out);
        let _ = writeln!(out, "</g>");
        traj_idx += 1;
    }
    for cp in &report.catalog.points {
        let (t, p) = angles(&cp.location);
        let (color, class) = match cp.classification {
            Classification::LocalMin => ("red", "min"),
            Classification::StrictSaddle => ("black", "saddle"),
            Classification::Degenerate => ("gray", "degenerate"),
        };
        let _ = writeln!(
            out,
            "<circle class=\"{class}\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"{color}\"/>",
            px(p),
            size as f64 - px(t)
        );
    }
    let _ = writeln!(out, "</svg>");
    Some(out)
}
