//! Benchmark harness: run the competing missing-data samplers over a
//! grid of panel sizes and record accuracy against the simulated truth
//! together with wall-clock cost.

use std::time::Instant;

use crate::constraint::AggregationScheme;
use crate::dgp::{simulate_dgp, DgpSpec};
use crate::error::Result;
use crate::gibbs::{posterior_summary, run_gibbs, GibbsConfig, NiwPrior, YuMethod};

/// One grid point of the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridCell {
    pub n_o: usize,
    pub n_u: usize,
    pub t_len: usize,
    pub p: usize,
}

/// The set of configurations to benchmark.
#[derive(Debug, Clone)]
pub struct BenchmarkGrid {
    pub cells: Vec<GridCell>,
    pub methods: Vec<YuMethod>,
}

impl BenchmarkGrid {
    /// Grid over `(n_o, n_u)` pairs at a common sample length and lag
    /// order, comparing all three samplers.
    pub fn cross(pairs: &[(usize, usize)], t_len: usize, p: usize) -> Self {
        BenchmarkGrid {
            cells: pairs
                .iter()
                .map(|&(n_o, n_u)| GridCell { n_o, n_u, t_len, p })
                .collect(),
            methods: vec![
                YuMethod::PrecisionHard,
                YuMethod::PrecisionSoft { o_diag: 1e-8 },
                YuMethod::KalmanFilter,
            ],
        }
    }
}

/// Run settings shared by all cells.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub reps: usize,
    pub n_draws: usize,
    pub n_burn: usize,
    pub seed: u64,
    pub scheme: AggregationScheme,
    /// Fix the parameters at the truth instead of sampling them; much
    /// faster and isolates the missing-data step.
    pub fixed_params: bool,
}

impl BenchConfig {
    pub fn new(reps: usize, n_draws: usize, n_burn: usize, seed: u64) -> Self {
        BenchConfig {
            reps,
            n_draws,
            n_burn,
            seed,
            scheme: AggregationScheme::LogDiffTriangle,
            fixed_params: false,
        }
    }
}

/// One output row: a cell/method pair. `mse` is the mean over
/// replications of the mean squared error of the posterior median
/// against the latent truth, over missing cells in periods after the
/// first `p`. `ten_draw_secs` times ten fixed-parameter sweeps of the
/// missing-data step alone.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub cell: GridCell,
    pub method: String,
    pub mse: Option<f64>,
    pub run_secs: f64,
    pub ten_draw_secs: Option<f64>,
    pub error: Option<String>,
}

/// All rows of a benchmark run.
#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub rows: Vec<BenchRow>,
}

fn cell_seed(base: u64, cell_idx: usize, rep: usize) -> u64 {
    base.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add((cell_idx as u64) << 20)
        .wrapping_add(rep as u64)
}

/// Runs the full grid. Failures in one cell/method are recorded in that
/// row's `error` field and the run continues. `reps = 0` yields an empty
/// table. Identical inputs give identical output.
pub fn run_benchmark(grid: &BenchmarkGrid, cfg: &BenchConfig) -> Result<BenchmarkResult> {
    let mut rows = Vec::new();
    if cfg.reps == 0 {
        return Ok(BenchmarkResult { rows });
    }
    for (ci, cell) in grid.cells.iter().enumerate() {
        for method in &grid.methods {
            rows.push(run_cell(*cell, ci, *method, cfg));
        }
    }
    Ok(BenchmarkResult { rows })
}

fn run_cell(cell: GridCell, cell_idx: usize, method: YuMethod, cfg: &BenchConfig) -> BenchRow {
    let start = Instant::now();
    let mut mse_sum = 0.0;
    let mut first_err = None;
    let mut ok_reps = 0usize;
    let mut ten_draw = None;

    for rep in 0..cfg.reps {
        let mut spec = DgpSpec::new(cell.n_o, cell.n_u, cell.t_len, cell_seed(cfg.seed, cell_idx, rep));
        spec.p = cell.p;
        spec.scheme = cfg.scheme;
        let out = match simulate_dgp(&spec) {
            Ok(o) => o,
            Err(e) => {
                first_err.get_or_insert_with(|| e.to_string());
                continue;
            }
        };
        let prior = NiwPrior::noninformative(spec.n(), cell.p);
        let mut gc = GibbsConfig::new(
            cfg.n_draws,
            cfg.n_burn,
            cell_seed(cfg.seed, cell_idx, rep) ^ 0x5555,
            cell.p,
            method,
        );
        if cfg.fixed_params {
            gc.fixed_params = Some(out.params.clone());
        }
        // timing is best-effort: a pathological warm-up draw could
        // still leave a singular precision without invalidating the run
        if rep == 0 && ten_draw.is_none() {
            ten_draw = time_ten_draws(&out, cfg.scheme, method).ok();
        }
        let run = (|| {
            let store = run_gibbs(&out.panel, cfg.scheme, &prior, &gc)?;
            let summary = posterior_summary(&store)?;
            let mut sq = 0.0;
            let mut count = 0usize;
            for (k, &(t, i)) in store.u_cells.iter().enumerate() {
                if t >= cell.p {
                    let d = summary.yu_median[k] - out.truth[(t, i)];
                    sq += d * d;
                    count += 1;
                }
            }
            Ok::<f64, crate::error::MfError>(sq / count.max(1) as f64)
        })();
        match run {
            Ok(m) => {
                mse_sum += m;
                ok_reps += 1;
            }
            Err(e) => {
                first_err.get_or_insert_with(|| e.to_string());
            }
        }
    }

    BenchRow {
        cell,
        method: method.name().to_string(),
        mse: if ok_reps > 0 {
            Some(mse_sum / ok_reps as f64)
        } else {
            None
        },
        run_secs: start.elapsed().as_secs_f64(),
        ten_draw_secs: ten_draw,
        error: first_err,
    }
}

/// Times ten sweeps of the missing-data step at fixed parameters,
/// excluding any per-run setup shared across sweeps.
///
/// The parameters are a posterior draw from a short warm-up chain, not
/// the simulation truth: the exactly decoupled truth of the Monte Carlo
/// design leaves the missing block unidentified (singular precision), a
/// measure-zero configuration that a sampled parameter draw avoids. For
/// the filter baseline an explosive warm-up draw (possible when the
/// design is weakly identified) is rescaled toward stationarity, which
/// leaves the band structure — the thing that determines the cost being
/// timed — unchanged.
pub fn time_ten_draws(
    out: &crate::dgp::DgpOutput,
    scheme: AggregationScheme,
    method: YuMethod,
) -> Result<f64> {
    let n = out.params.n();
    let p = out.params.p();
    let prior = NiwPrior::noninformative(n, p);
    // warm up with the soft sampler regardless of the method being
    // timed: it tolerates the explosive parameter draws that a weakly
    // identified first sweep can produce, where the filter would diverge
    let warm = run_gibbs(
        &out.panel,
        scheme,
        &prior,
        &GibbsConfig::new(3, 0, 777, p, YuMethod::PrecisionSoft { o_diag: 1e-8 }),
    )?;
    let last = warm.b_draws.len() - 1;
    let mut params = crate::gibbs::coef_matrix_to_params(
        &warm.b_draws[last],
        warm.sigma_draws[last].clone(),
        n,
        p,
    )?;
    if matches!(method, YuMethod::KalmanFilter) {
        let np = n * p;
        let mut f = nalgebra::DMatrix::zeros(np, np);
        for (j, b) in params.lags().iter().enumerate() {
            f.view_mut((0, j * n), (n, n)).copy_from(b);
        }
        for j in 1..p {
            f.view_mut((j * n, (j - 1) * n), (n, n))
                .fill_with_identity();
        }
        let rho = crate::bn::spectral_radius_of(&f);
        if rho >= 0.95 {
            let c = 0.9 / rho;
            let lags: Vec<_> = params
                .lags()
                .iter()
                .enumerate()
                .map(|(j, b)| b * c.powi(j as i32 + 1))
                .collect();
            params = crate::model::VarParams::new(
                params.b0().clone(),
                lags,
                params.sigma().clone(),
            )?;
        }
    }
    let mut gc = GibbsConfig::new(10, 0, 778, p, method);
    gc.fixed_params = Some(params);
    let t0 = Instant::now();
    let store = run_gibbs(&out.panel, scheme, &prior, &gc)?;
    let _ = store;
    Ok(t0.elapsed().as_secs_f64())
}
