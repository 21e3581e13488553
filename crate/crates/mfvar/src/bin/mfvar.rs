//! Command-line front end: simulate a mixed-frequency panel, benchmark
//! the samplers, estimate a model from CSV, or compute the
//! Beveridge-Nelson cycle from stored draws.
//!
//! Exit codes: 0 success, 2 bad input (files, config, shapes), 3
//! numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;

use mfvar::bench::{BenchConfig, BenchmarkGrid};
use mfvar::bn::bn_cycle;
use mfvar::constraint::AggregationScheme;
use mfvar::dgp::{simulate_dgp, DgpSpec};
use mfvar::error::MfError;
use mfvar::gibbs::{coef_matrix_to_params, posterior_summary, run_gibbs, NiwPrior};
use mfvar::io::{
    read_draw_store, read_panel_csv, write_benchmark_csv, write_cycle_csv, write_draw_store,
    write_panel_csv, write_summary, EstimateConfig,
};
use mfvar::run_benchmark;

#[derive(Parser)]
#[command(name = "mfvar", about = "Precision-based mixed-frequency VAR sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a panel from the Monte Carlo design and write it as CSV.
    Simulate(SimulateArgs),
    /// Run the sampler benchmark grid and write a results table.
    Benchmark(BenchmarkArgs),
    /// Estimate the VAR on a panel CSV and store posterior draws.
    Estimate(EstimateArgs),
    /// Beveridge-Nelson cycle from a panel and stored draws.
    Bn(BnArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 4)]
    n_o: usize,
    #[arg(long, default_value_t = 1)]
    n_u: usize,
    #[arg(long, default_value_t = 500)]
    t_len: usize,
    #[arg(long, default_value_t = 4)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "log_diff_triangle")]
    scheme: String,
    /// Panel CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// Optional CSV of the latent truth.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Comma-separated `n_o:n_u` pairs, e.g. `4:1,4:5`.
    #[arg(long, default_value = "4:1")]
    cells: String,
    #[arg(long, default_value_t = 120)]
    t_len: usize,
    #[arg(long, default_value_t = 4)]
    p: usize,
    /// Replications per cell; 0 writes an empty table.
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 500)]
    n_draws: usize,
    #[arg(long, default_value_t = 100)]
    n_burn: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fix parameters at the truth (isolates the missing-data step).
    #[arg(long)]
    fixed_params: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    panel: PathBuf,
    #[arg(long)]
    config: PathBuf,
    /// Directory for draws, summary, and metadata.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BnArgs {
    #[arg(long)]
    panel: PathBuf,
    /// Draw-store directory written by `estimate`.
    #[arg(long)]
    store_dir: PathBuf,
    /// Recompute the cycle for every retained draw and report the
    /// median with a 68 per cent band instead of the point cycle.
    #[arg(long)]
    per_draw: bool,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Bn(a) => cmd_bn(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &MfError) -> u8 {
    match e {
        MfError::NotPositiveDefinite { .. }
        | MfError::SingularW
        | MfError::SingularDesign
        | MfError::FilterDivergence(_)
        | MfError::NonStationary(_) => 3,
        MfError::AtDraw { source, .. } => exit_code(source),
        _ => 2,
    }
}

fn cmd_simulate(a: SimulateArgs) -> mfvar::Result<()> {
    let mut spec = DgpSpec::new(a.n_o, a.n_u, a.t_len, a.seed);
    spec.p = a.p;
    spec.scheme = AggregationScheme::parse(&a.scheme)?;
    let out = simulate_dgp(&spec)?;
    write_panel_csv(&out.panel, None, &a.out)?;
    if let Some(truth_path) = a.truth {
        write_cycle_csv(&out.truth, out.panel.names(), None, &truth_path)?;
    }
    println!(
        "wrote {} periods x {} variables to {}",
        a.t_len,
        spec.n(),
        a.out.display()
    );
    Ok(())
}

fn parse_cells(s: &str) -> mfvar::Result<Vec<(usize, usize)>> {
    s.split(',')
        .map(|pair| {
            let (o, u) = pair
                .split_once(':')
                .ok_or_else(|| MfError::ConfigError(format!("bad cell {pair:?}, want n_o:n_u")))?;
            let n_o = o
                .trim()
                .parse()
                .map_err(|_| MfError::ConfigError(format!("bad n_o in {pair:?}")))?;
            let n_u = u
                .trim()
                .parse()
                .map_err(|_| MfError::ConfigError(format!("bad n_u in {pair:?}")))?;
            Ok((n_o, n_u))
        })
        .collect()
}

fn cmd_benchmark(a: BenchmarkArgs) -> mfvar::Result<()> {
    let pairs = parse_cells(&a.cells)?;
    let grid = BenchmarkGrid::cross(&pairs, a.t_len, a.p);
    let mut cfg = BenchConfig::new(a.reps, a.n_draws, a.n_burn, a.seed);
    cfg.fixed_params = a.fixed_params;
    let result = run_benchmark(&grid, &cfg)?;
    write_benchmark_csv(&result, &a.out)?;
    for row in &result.rows {
        match (&row.mse, &row.error) {
            (Some(m), _) => println!(
                "n_o={} n_u={} T={} p={} {}: mse={:.6e} run={:.2}s",
                row.cell.n_o, row.cell.n_u, row.cell.t_len, row.cell.p, row.method, m, row.run_secs
            ),
            (None, Some(e)) => println!(
                "n_o={} n_u={} T={} p={} {}: failed: {}",
                row.cell.n_o, row.cell.n_u, row.cell.t_len, row.cell.p, row.method, e
            ),
            (None, None) => {}
        }
    }
    Ok(())
}

fn cmd_estimate(a: EstimateArgs) -> mfvar::Result<()> {
    let (panel, _labels) = read_panel_csv(&a.panel)?;
    let cfg = EstimateConfig::from_file(&a.config)?;
    let prior = NiwPrior::noninformative(panel.n(), cfg.lags);
    let store = run_gibbs(&panel, cfg.scheme, &prior, &cfg.to_gibbs())?;
    write_draw_store(&store, &a.out_dir)?;
    let summary = posterior_summary(&store)?;
    write_summary(&summary, &store, &a.out_dir.join("summary_yu.csv"))?;
    println!(
        "retained {} draws ({} missing cells) in {:.2}s -> {}",
        store.retained(),
        store.u_cells.len(),
        store.meta.total_secs,
        a.out_dir.display()
    );
    Ok(())
}

fn cmd_bn(a: BnArgs) -> mfvar::Result<()> {
    let (mut panel, labels) = read_panel_csv(&a.panel)?;
    let store = read_draw_store(&a.store_dir)?;
    if store.b_draws.is_empty() {
        return Err(MfError::ConfigError(
            "draw store has no parameter draws; rerun estimate without fixed parameters".into(),
        ));
    }
    if store.u_cells != panel.u_cells() {
        return Err(MfError::MaskInconsistent(
            "draw store does not match the panel's missing cells".into(),
        ));
    }

    if a.per_draw {
        let cycles = per_draw_cycles(&mut panel, &store)?;
        write_cycle_bands_csv(&cycles, panel.names(), &labels, &a.out)?;
        println!(
            "wrote cycle bands over {} draws to {}",
            store.retained(),
            a.out.display()
        );
        return Ok(());
    }

    // point version: posterior-median completed panel, posterior-mean
    // parameters
    let summary = posterior_summary(&store)?;
    panel.fill_missing(&summary.yu_median)?;
    let completed = panel.completed()?;
    let coef = summary.coef_mean.expect("b_draws nonempty");
    let sigma = summary.sigma_mean.expect("sigma_draws nonempty");
    let params = coef_matrix_to_params(&coef, sigma, store.meta.n, store.meta.p)?;

    let cycle: DMatrix<f64> = bn_cycle(&params, &completed)?;
    write_cycle_csv(&cycle, panel.names(), Some(&labels), &a.out)?;
    println!(
        "wrote cycle for {} periods x {} variables to {}",
        cycle.nrows(),
        cycle.ncols(),
        a.out.display()
    );
    Ok(())
}

fn per_draw_cycles(
    panel: &mut mfvar::MixedPanel,
    store: &mfvar::DrawStore,
) -> mfvar::Result<Vec<DMatrix<f64>>> {
    let mut cycles = Vec::with_capacity(store.retained());
    for k in 0..store.retained() {
        let params = coef_matrix_to_params(
            &store.b_draws[k],
            store.sigma_draws[k].clone(),
            store.meta.n,
            store.meta.p,
        )?;
        panel.fill_missing(&store.yu_draws[k])?;
        cycles.push(bn_cycle(&params, &panel.completed()?)?);
    }
    Ok(cycles)
}

fn write_cycle_bands_csv(
    cycles: &[DMatrix<f64>],
    names: &[String],
    labels: &[String],
    path: &std::path::Path,
) -> mfvar::Result<()> {
    use std::fmt::Write as _;
    let first = cycles.first().ok_or(MfError::EmptyStore)?;
    let (t_len, n) = first.shape();
    let mut out = String::from("period");
    for name in names {
        let _ = write!(out, ",{name}_median,{name}_lo68,{name}_hi68");
    }
    out.push('\n');
    let mut buf = Vec::with_capacity(cycles.len());
    for t in 0..t_len {
        out.push_str(&labels[t]);
        for i in 0..n {
            buf.clear();
            buf.extend(cycles.iter().map(|c| c[(t, i)]).filter(|v| v.is_finite()));
            if buf.is_empty() {
                out.push_str(",,,");
                continue;
            }
            buf.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let q = |p: f64| {
                let pos = p * (buf.len() - 1) as f64;
                let lo = pos.floor() as usize;
                let hi = pos.ceil() as usize;
                buf[lo] + (buf[hi] - buf[lo]) * (pos - lo as f64)
            };
            let _ = write!(out, ",{},{},{}", q(0.5), q(0.16), q(0.84));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}
