//! Command-line driver for seeded manifold optimization experiments.
//!
//! ```text
//! rrm run <config.json>      [--out DIR] [--threads N] [--override-assumptions] [--no-timestamp]
//! rrm validate <config.json>
//! rrm apt <config.json>      [--out DIR] [--no-timestamp]
//! rrm classify <config.json> [--out DIR]
//! ```
//!
//! Exit codes: 0 success, 2 config error, 3 assumption-gate refusal.

use rrm::harness::{self, ExperimentConfig, HarnessError};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_GATE: u8 = 3;

struct Args {
    command: String,
    config: PathBuf,
    out_dir: PathBuf,
    threads: Option<usize>,
    override_assumptions: bool,
    no_timestamp: bool,
}

fn usage() -> ! {
    eprintln!(
        "usage: rrm <run|validate|apt|classify> <config.json> \
         [--out DIR] [--threads N] [--override-assumptions] [--no-timestamp]"
    );
    std::process::exit(EXIT_CONFIG as i32)
}

fn parse_args() -> Args {
    let mut argv = std::env::args().skip(1);
    let command = argv.next().unwrap_or_else(|| usage());
    let config = PathBuf::from(argv.next().unwrap_or_else(|| usage()));
    let mut args = Args {
        command,
        config,
        out_dir: PathBuf::from("."),
        threads: None,
        override_assumptions: false,
        no_timestamp: false,
    };
    while let Some(flag) = argv.next() {
        match flag.as_str() {
            "--out" => {
                args.out_dir = PathBuf::from(argv.next().unwrap_or_else(|| usage()));
            }
            "--threads" => {
                let n = argv.next().unwrap_or_else(|| usage());
                args.threads = Some(n.parse().unwrap_or_else(|_| usage()));
            }
            "--override-assumptions" => args.override_assumptions = true,
            "--no-timestamp" => args.no_timestamp = true,
            _ => usage(),
        }
    }
    args
}

fn timestamp(args: &Args) -> Option<u64> {
    if args.no_timestamp {
        None
    } else {
        Some(
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        )
    }
}

fn main() -> ExitCode {
    let args = parse_args();
    let cfg = match ExperimentConfig::from_path(&args.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let result = match args.command.as_str() {
        "run" => cmd_run(&cfg, &args),
        "validate" => cmd_validate(&cfg),
        "apt" => cmd_apt(&cfg, &args),
        "classify" => cmd_classify(&cfg, &args),
        _ => usage(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(HarnessError::AssumptionGate(msg)) => {
            eprintln!("refusing to run: {msg}");
            ExitCode::from(EXIT_GATE)
        }
        Err(HarnessError::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn ensure_out_dir(args: &Args) -> Result<(), HarnessError> {
    std::fs::create_dir_all(&args.out_dir)?;
    Ok(())
}

fn cmd_run(cfg: &ExperimentConfig, args: &Args) -> Result<(), HarnessError> {
    ensure_out_dir(args)?;
    let report = harness::run_experiment(cfg, args.threads, args.override_assumptions)?;
    let csv_path = args.out_dir.join("trials.csv");
    harness::write_csv(&report, &csv_path, timestamp(args))?;
    let summary_path = args.out_dir.join("summary.txt");
    harness::write_summary(&report, &summary_path)?;
    let m = cfg.manifold.build()?;
    if let Some(svg) = harness::render_svg(&m, &report, 640) {
        std::fs::write(args.out_dir.join("trajectories.svg"), svg)?;
    }
    print!("{}", harness::summary_string(&report));
    println!("wrote {}", csv_path.display());
    Ok(())
}

fn cmd_validate(cfg: &ExperimentConfig) -> Result<(), HarnessError> {
    let report = harness::validate_assumptions(cfg)?;
    let fake = harness::AggregateReport {
        trials: 0,
        converged_to_min: 0,
        converged_to_saddle: 0,
        non_converged: 0,
        saddle_frequency: harness::wilson_interval(0, 0),
        mean_iters: 0.0,
        clip_total: 0,
        assumption_report: report,
        trial_reports: Vec::new(),
        catalog: rrm::saddle::CriticalCatalog { points: Vec::new() },
        apt: None,
    };
    // reuse the summary renderer's validator section
    for line in harness::summary_string(&fake).lines() {
        if line.starts_with("trials")
            || line.starts_with("verdicts")
            || line.starts_with("saddle convergence")
            || line.starts_with("mean iterations")
            || line.starts_with("clip events")
            || line.starts_with("critical catalog")
        {
            continue;
        }
        println!("{line}");
    }
    Ok(())
}

fn cmd_apt(cfg: &ExperimentConfig, args: &Args) -> Result<(), HarnessError> {
    ensure_out_dir(args)?;
    let m = cfg.manifold.build()?;
    let spec = cfg.apt.clone().unwrap_or_default();
    let report = harness::run_apt(cfg, &m, &spec)?;
    let mut csv = String::new();
    if let Some(ts) = timestamp(args) {
        csv.push_str(&format!("# generated_at_unix {ts}\n"));
    }
    csv.push_str("probe_index,t,deviation\n");
    for ((n, t), d) in spec
        .probe_indices
        .iter()
        .zip(&report.probe_times)
        .zip(&report.deviations)
    {
        csv.push_str(&format!("{n},{t},{d}\n"));
        println!("probe n={n}: t={t:.4} sup deviation {d:.6e}");
    }
    let path = args.out_dir.join("apt.csv");
    std::fs::write(&path, csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_classify(cfg: &ExperimentConfig, args: &Args) -> Result<(), HarnessError> {
    ensure_out_dir(args)?;
    let (m, catalog) = harness::catalog_for(cfg)?;
    let mut csv = String::from("label,classification,value,grad_norm,spectrum,coords\n");
    for cp in &catalog.points {
        let class = match cp.classification {
            rrm::saddle::Classification::LocalMin => "local_min",
            rrm::saddle::Classification::StrictSaddle => "strict_saddle",
            rrm::saddle::Classification::Degenerate => "degenerate",
        };
        let spectrum = cp
            .spectrum
            .iter()
            .map(|e| format!("{e:.6}"))
            .collect::<Vec<_>>()
            .join(";");
        let coords = cp
            .location
            .coords
            .iter()
            .map(|c| format!("{c}"))
            .collect::<Vec<_>>()
            .join(";");
        csv.push_str(&format!(
            "{},{},{},{:.3e},{},{}\n",
            cp.label, class, cp.value, cp.grad_norm, spectrum, coords
        ));
        println!(
            "{}: {} value={:.6} spectrum={:?} at {:?}",
            cp.label, class, cp.value, cp.spectrum, cp.location.coords
        );
    }
    let path = args.out_dir.join("catalog.csv");
    std::fs::write(&path, csv)?;
    println!("wrote {} ({} critical points on {:?})", path.display(), catalog.points.len(), m.kind());
    Ok(())
}
