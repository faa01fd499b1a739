//! `asvrg`: run experiments, solve for reference optima and inspect penalty
//! spectra from the command line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use asvrg_admm::harness::experiment::{cached_reference, ExperimentData, SPECTRAL_MAX_ITER, SPECTRAL_TOL};
use asvrg_admm::harness::{build_graph_matrix, parse_libsvm, ExperimentConfig};
use asvrg_admm::linalg::SpectralConstants;
use asvrg_admm::losses::FiniteSum;
use asvrg_admm::metrics::kkt_residuals;

#[derive(Parser)]
#[command(name = "asvrg", version, about = "Stochastic ADMM benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured solver and seed, writing one trace CSV per run.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated solver names; overrides the config file.
        #[arg(long)]
        solver: Option<String>,
        /// Comma-separated seeds; overrides the config file.
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Extra `key=value` overrides, applied after the file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Solve the configured problem to a KKT tolerance and print the optimum
    /// as JSON.
    Reference {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Spectral constants of the correlation-graph penalty built from a
    /// LIBSVM file.
    Spectra {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        threshold: f64,
    },
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig> {
    ExperimentConfig::from_file(path).with_context(|| format!("loading config {}", path.display()))
}

fn run(
    config: PathBuf,
    solver: Option<String>,
    seed: Option<String>,
    epochs: Option<usize>,
    output_dir: Option<PathBuf>,
    overrides: Vec<String>,
) -> Result<()> {
    let mut cfg = load_config(&config)?;
    let mut settings: Vec<(String, String)> = Vec::new();
    for o in &overrides {
        let (k, v) = o.split_once('=').with_context(|| format!("override '{o}' is not KEY=VALUE"))?;
        settings.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(s) = solver {
        settings.push(("solvers".into(), s));
    }
    if let Some(s) = seed {
        settings.push(("seeds".into(), s));
    }
    if let Some(e) = epochs {
        settings.push(("epochs".into(), e.to_string()));
    }
    for (k, v) in &settings {
        cfg.set(k, v).with_context(|| format!("--{k}"))?;
    }
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    cfg.validate()?;

    let report = asvrg_admm::harness::run_experiment(&cfg)?;
    println!(
        "reference objective {:.12e} (KKT residual {:.2e})",
        report.reference.objective_star, report.reference.kkt_residual
    );
    for run in &report.runs {
        let last = run.records.last().expect("traces contain epoch 0");
        println!(
            "{:<9} seed {:<4} epochs {:<4} passes {:>8.2}  gap {:.3e}  P {:.3e}  -> {}",
            run.kind.name(),
            run.seed,
            last.epoch,
            last.passes,
            last.objective_gap,
            last.p_criterion,
            run.path.display()
        );
    }
    println!("summary: {}", report.summary_path.display());
    Ok(())
}

fn reference(config: PathBuf, tol: Option<f64>, output: Option<PathBuf>) -> Result<()> {
    let cfg = load_config(&config)?;
    let tol = tol.unwrap_or(cfg.reference_tol);
    let data = ExperimentData::prepare(&cfg)?;
    let problem = data.problem()?;
    let r = cached_reference(&problem, tol, cfg.cache_dir.as_deref())?;
    let kkt = kkt_residuals(&problem, &r.x_star, &r.y_star, &r.lambda_star, r.beta);
    eprintln!(
        "objective {:.12e}; KKT primal {:.2e}, stationarity {:.2e}, subgradient {:.2e}; {} iterations",
        r.objective_star, kkt.primal, kkt.stationarity, kkt.subgradient, r.iterations
    );
    let mut out: Box<dyn Write> = match &output {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(std::io::stdout().lock()),
    };
    serde_json::to_writer_pretty(&mut out, &r)?;
    writeln!(out)?;
    Ok(())
}

fn spectra(data: PathBuf, threshold: f64) -> Result<()> {
    let ds = parse_libsvm(&data).with_context(|| format!("reading {}", data.display()))?;
    let a = build_graph_matrix(&ds, threshold)?;
    let sc = SpectralConstants::compute(&a, SPECTRAL_TOL, SPECTRAL_MAX_ITER)?;
    let l = asvrg_admm::losses::Loss::new(asvrg_admm::losses::LossKind::Logistic, &ds)?.smoothness();
    println!("samples        {}", ds.len());
    println!("features       {}", ds.dim());
    println!("edges          {}", a.rows() - ds.dim());
    println!("ata_norm       {:.10e}", sc.ata_norm);
    println!("aat_min_eig    {:.10e}", sc.aat_min_eig);
    println!("omega          {:.10e}", sc.omega());
    println!("logistic_L     {:.10e}", l);
    println!("power_iters    {}", sc.iters_used);
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run { config, solver, seed, epochs, output_dir, overrides } => {
            run(config, solver, seed, epochs, output_dir, overrides)
        }
        Command::Reference { config, tol, output } => reference(config, tol, output),
        Command::Spectra { data, threshold } => spectra(data, threshold),
    }
}
