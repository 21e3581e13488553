//! Beveridge-Nelson decomposition of a completed mixed-frequency panel:
//! estimate the VAR, fill in the latent series at its posterior median,
//! and split each series into trend and cycle.
//!
//! Run with: cargo run --release --example bn_cycle

use mfvar::bn::{bn_cycle, CompanionForm};
use mfvar::constraint::AggregationScheme;
use mfvar::dgp::{simulate_dgp, DgpSpec};
use mfvar::gibbs::{coef_matrix_to_params, posterior_summary, run_gibbs, GibbsConfig, NiwPrior, YuMethod};

fn main() {
    let spec = DgpSpec::new(2, 1, 240, 5);
    let out = simulate_dgp(&spec).unwrap();

    let prior = NiwPrior::noninformative(spec.n(), spec.p);
    let cfg = GibbsConfig::new(1000, 400, 1, spec.p, YuMethod::PrecisionSoft { o_diag: 1e-8 });
    let store = run_gibbs(&out.panel, AggregationScheme::LogDiffTriangle, &prior, &cfg).unwrap();
    let summary = posterior_summary(&store).unwrap();

    let mut panel = out.panel.clone();
    panel.fill_missing(&summary.yu_median).unwrap();
    let completed = panel.completed().unwrap();
    let params = coef_matrix_to_params(
        summary.coef_mean.as_ref().unwrap(),
        summary.sigma_mean.clone().unwrap(),
        spec.n(),
        spec.p,
    )
    .unwrap();

    let companion = CompanionForm::from_params(&params).unwrap();
    println!("companion spectral radius: {:.4}", companion.spectral_radius());

    let cycle = bn_cycle(&params, &completed).unwrap();
    // the first p rows have no cycle (not enough lags)
    let mut max_abs = vec![0.0f64; spec.n()];
    for t in spec.p..cycle.nrows() {
        for i in 0..spec.n() {
            max_abs[i] = max_abs[i].max(cycle[(t, i)].abs());
        }
    }
    for (i, name) in panel.names().iter().enumerate() {
        println!("{name}: max |cycle| = {:.4}", max_abs[i]);
    }
    println!("\nlast 6 periods:");
    for t in cycle.nrows() - 6..cycle.nrows() {
        let row: Vec<String> = (0..spec.n()).map(|i| format!("{:+.4}", cycle[(t, i)])).collect();
        println!("t={:>3}  {}", t + 1, row.join("  "));
    }
}
