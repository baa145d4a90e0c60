use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use freespec::block::{phase_classify, BlockModelSpec};
use freespec::free::{default_eta, default_threshold, free_density, free_support, lehner_max, lehner_min, LehnerOptions};
use freespec::harness::{figure_config, resolve_threads, run, write_outputs, ExperimentConfig};
use freespec::model::{compute_parameters, io::model_from_json};
use freespec::Result;

#[derive(Parser)]
#[command(name = "freespec", version, about = "Free-model spectra, edges and outlier thresholds for structured random matrices")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// σ, v, σ* and ṽ of a model.
    Params { model: PathBuf },
    /// λmax and λmin of the free model.
    FreeEdge { model: PathBuf },
    /// Free density on a grid, as CSV.
    FreeDensity {
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        xlo: f64,
        #[arg(long, allow_hyphen_values = true)]
        xhi: f64,
        #[arg(long, default_value_t = 400)]
        steps: usize,
        /// Defaults to 1e-4·σ.
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Phase report for a block model.
    Phase { spec: PathBuf },
    /// Run a sweep from a config file.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        /// CSV path; summary and plot spec are written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one of the bundled sweeps (simplebbp, bbp, scov1, scov2).
    Figure {
        name: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn print_json(v: &Value) -> Result<()> {
    println!("{}", fmt_floats(v));
    Ok(())
}

/// Pretty JSON with every float at 17 significant digits.
fn fmt_floats(v: &Value) -> String {
    fn walk(v: &Value, ind: usize, out: &mut String) {
        let pad = "  ".repeat(ind + 1);
        match v {
            Value::Number(n) if n.is_f64() => out.push_str(&format!("{:.16e}", n.as_f64().unwrap())),
            Value::Array(a) if !a.is_empty() => {
                out.push_str("[\n");
                for (i, x) in a.iter().enumerate() {
                    out.push_str(&pad);
                    walk(x, ind + 1, out);
                    out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
                }
                out.push_str(&"  ".repeat(ind));
                out.push(']');
            }
            Value::Object(m) if !m.is_empty() => {
                out.push_str("{\n");
                for (i, (k, x)) in m.iter().enumerate() {
                    out.push_str(&format!("{pad}{}: ", Value::String(k.clone())));
                    walk(x, ind + 1, out);
                    out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
                }
                out.push_str(&"  ".repeat(ind));
                out.push('}');
            }
            other => out.push_str(&other.to_string()),
        }
    }
    let mut s = String::new();
    walk(v, 0, &mut s);
    s
}

fn simulate(config: ExperimentConfig, threads: Option<usize>, out: PathBuf) -> Result<()> {
    let threads = resolve_threads(threads, &config)?;
    let output = run(&config, threads)?;
    let paths = write_outputs(&output, &out, &config.plot_style())?;
    print_json(&json!({
        "config_sha256": output.config_hash,
        "records": output.records.len(),
        "threads": threads,
        "csv": paths[0],
        "summary": paths[1],
        "plot": paths[2],
    }))
}

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Params { model } => {
            let m = model_from_json(&read(&model)?)?;
            print_json(&serde_json::to_value(compute_parameters(&m))?)
        }
        Cmd::FreeEdge { model } => {
            let m = model_from_json(&read(&model)?)?;
            let opts = LehnerOptions::default();
            let hi = lehner_max(&m, &opts)?;
            let lo = lehner_min(&m, &opts)?;
            let support = free_support(&m, default_eta(&m), default_threshold(&m)).ok();
            print_json(&json!({
                "lambda_max": hi.value,
                "lambda_min": lo.value,
                "converged": hi.converged && lo.converged,
                "kkt_residual": hi.kkt_residual.max(lo.kkt_residual),
                "support": support,
            }))
        }
        Cmd::FreeDensity { model, xlo, xhi, steps, eta } => {
            let m = model_from_json(&read(&model)?)?;
            let sol = free_density(&m, xlo, xhi, steps, eta.unwrap_or_else(|| default_eta(&m)))?;
            print!("{}", sol.to_csv());
            Ok(())
        }
        Cmd::Phase { spec } => {
            let s = BlockModelSpec::from_json(&read(&spec)?)?;
            print_json(&serde_json::to_value(phase_classify(&s)?)?)
        }
        Cmd::Simulate { config, threads, out } => {
            let cfg = ExperimentConfig::from_json(&read(&config)?)?;
            let out = out.or_else(|| cfg.output.as_ref().map(PathBuf::from)).unwrap_or_else(|| config.with_extension("csv"));
            simulate(cfg, threads, out)
        }
        Cmd::Figure { name, out, threads } => {
            let cfg = figure_config(&name)?;
            simulate(cfg, threads, out.join(format!("{name}.csv")))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
