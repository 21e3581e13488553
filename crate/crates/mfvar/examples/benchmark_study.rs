//! Compare the three missing-data samplers on a small grid: accuracy
//! against the simulated truth and the cost of ten sweeps of the
//! missing-data step alone.
//!
//! Run with: cargo run --release --example benchmark_study

use mfvar::bench::{run_benchmark, BenchConfig, BenchmarkGrid};

fn main() {
    let grid = BenchmarkGrid::cross(&[(4, 1), (4, 3)], 120, 4);
    let cfg = BenchConfig::new(2, 600, 200, 19);
    let result = run_benchmark(&grid, &cfg).unwrap();

    println!("{:<6}{:<6}{:<18}{:>12}{:>12}{:>14}", "n_o", "n_u", "method", "mse", "run (s)", "10 draws (s)");
    for row in &result.rows {
        let mse = row.mse.map_or("-".into(), |m| format!("{m:.5}"));
        let ten = row.ten_draw_secs.map_or("-".into(), |s| format!("{s:.4}"));
        println!(
            "{:<6}{:<6}{:<18}{:>12}{:>12.2}{:>14}",
            row.cell.n_o, row.cell.n_u, row.method, mse, row.run_secs, ten
        );
        if let Some(e) = &row.error {
            println!("      note: {e}");
        }
    }
}
