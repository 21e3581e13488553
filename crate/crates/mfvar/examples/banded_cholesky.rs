//! Factor a banded SPD matrix and solve a system without ever forming a
//! dense inverse.
//!
//! Run with: cargo run --example banded_cholesky

use mfvar::band::{band_cholesky, solve_spd, BandMatrix};

fn main() {
    // pentadiagonal SPD matrix: 2 on the diagonal, -0.5 / 0.1 off it
    let dim = 12;
    let mut a = BandMatrix::zeros(dim, dim, 2, 2);
    for i in 0..dim {
        a.set(i, i, 2.0);
        if i + 1 < dim {
            a.set(i, i + 1, -0.5);
            a.set(i + 1, i, -0.5);
        }
        if i + 2 < dim {
            a.set(i, i + 2, 0.1);
            a.set(i + 2, i, 0.1);
        }
    }

    let chol = band_cholesky(&a).expect("matrix is positive definite");
    println!("log|A| = {:.6}", 2.0 * chol.log_det());

    let b: Vec<f64> = (0..dim).map(|i| (i as f64 * 0.3).sin()).collect();
    let x = solve_spd(&chol, &b).expect("solve");
    println!("solution x = {x:.*?}", 4);

    // verify: A x should reproduce b
    let ax = a.matvec(&x).expect("matvec");
    let resid = ax
        .iter()
        .zip(&b)
        .map(|(l, r)| (l - r).abs())
        .fold(0.0f64, f64::max);
    println!("max |A x - b| = {resid:.3e}");
}
