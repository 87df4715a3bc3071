use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lipbound_harness::properties::{property_names, property_suite, SuiteOptions};
use lipbound_harness::run::{plot_rows, Metrics, Row};
use lipbound_harness::{run_experiment, ExperimentConfig, HarnessError};

/// Experiment runner for the gradient-bound solver.
///
/// Exit codes: 0 when everything passes, 1 on assertion or solver failure, 2 on usage
/// or configuration errors. `LIPBOUND_THREADS` sets the worker count.
#[derive(Parser)]
#[command(name = "lipbound", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Directory for the CSV and SVG outputs.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run the seeded property suite.
    Properties {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Multiplier on the number of draws per property.
        #[arg(long, default_value_t = 1.0)]
        draw_scale: f64,
        /// Only run properties whose name starts with this prefix.
        #[arg(long)]
        only: Option<String>,
        /// Swap in a non-monotone `b` for the field checks (negative control).
        #[arg(long)]
        broken_young: bool,
        /// List property names and exit.
        #[arg(long)]
        list: bool,
    },
    /// Plot a column of an existing CSV report.
    Report {
        csv: PathBuf,
        #[arg(long)]
        plot: PathBuf,
        #[arg(long, default_value = "grad_ratio")]
        column: String,
    },
}

fn configure_threads() -> Result<(), HarnessError> {
    let Ok(v) = std::env::var("LIPBOUND_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| HarnessError::Config(format!("LIPBOUND_THREADS={v} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| HarnessError::Config(e.to_string()))
}

fn run(config: PathBuf, out_dir: PathBuf) -> Result<ExitCode, HarnessError> {
    let cfg = ExperimentConfig::from_path(&config)?;
    let report = run_experiment(&cfg, &out_dir)?;
    for r in &report.rows {
        match &r.result {
            Ok(m) => println!(
                "instance {} h {} : grad_sup {:.6e} grad_ratio {} ({:.2} s)",
                r.instance,
                r.h,
                m.grad_sup,
                m.grad_ratio.map_or("-".into(), |v| format!("{v:.6e}")),
                r.seconds
            ),
            Err(e) => println!("instance {} h {} : FAILED {e}", r.instance, r.h),
        }
    }
    for a in &report.assertions {
        println!("{} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.description, a.detail);
    }
    for p in [&report.csv, &report.timing, &report.svg].into_iter().flatten() {
        println!("wrote {}", p.display());
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn properties(opts: SuiteOptions, only: Option<String>, list: bool) -> ExitCode {
    if list {
        for n in property_names() {
            println!("{n}");
        }
        return ExitCode::SUCCESS;
    }
    let out = property_suite(&opts, only.as_deref());
    let mut failed = 0;
    for o in &out {
        println!(
            "{} {:<40} draws {:>6} failures {}",
            if o.passed() { "PASS" } else { "FAIL" },
            o.name,
            o.draws,
            o.failures
        );
        if let Some(w) = &o.witness {
            println!("     witness: {w}");
            failed += 1;
        }
    }
    println!("{} of {} properties passed (seed {})", out.len() - failed, out.len(), opts.seed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn parse_cell(s: &str) -> Option<f64> {
    s.parse().ok()
}

fn report(csv: PathBuf, plot: PathBuf, column: String) -> Result<ExitCode, HarnessError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(&csv)?;
    let headers = reader.headers()?.clone();
    let idx = |name: &str| headers.iter().position(|h| h == name);
    let (Some(ci), Some(vi), Some(hi), Some(ii)) = (idx(&column), idx("value"), idx("h"), idx("instance")) else {
        return Err(HarnessError::Config(format!("{}: missing column {column}", csv.display())));
    };
    let mut rows = Vec::new();
    let mut swept = false;
    for rec in reader.records() {
        let rec = rec?;
        let value = parse_cell(&rec[vi]);
        swept |= value.is_some();
        // the plot only needs one column; carry it in grad_ratio
        let y = parse_cell(&rec[ci]);
        rows.push(Row {
            instance: rec[ii].parse().unwrap_or(0),
            value,
            h: parse_cell(&rec[hi]).unwrap_or(f64::NAN),
            nodes: 0,
            triangles: 0,
            result: Ok(Metrics {
                grad_ratio: y,
                ..Default::default()
            }),
            seconds: 0.0,
        });
    }
    let mut p = plot_rows(&rows, "grad_ratio", swept.then_some("value"));
    p.y_label = column.clone();
    p.title = format!("{column} vs {}", if swept { "value" } else { "h" });
    std::fs::write(&plot, p.render()).map_err(|e| HarnessError::Io { path: plot.clone(), source: e })?;
    println!("wrote {}", plot.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Run { config, out_dir } => run(config, out_dir),
        Command::Properties {
            seed,
            draw_scale,
            only,
            broken_young,
            list,
        } => Ok(properties(
            SuiteOptions {
                seed,
                draw_scale,
                broken_young,
            },
            only,
            list,
        )),
        Command::Report { csv, plot, column } => report(csv, plot, column),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
