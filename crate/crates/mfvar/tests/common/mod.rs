//! Dense reference implementations used to check the banded samplers.
//! Everything here is built from scratch with dense nalgebra operations
//! and no banded shortcuts.

// not every test target uses every oracle
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use mfvar::constraint::ConstraintSet;
use mfvar::model::{MixedPanel, VarParams};

/// Dense stacked system: returns `(H, c, xi_inv)` with `H` of size
/// `(T-p)n x Tn`.
pub fn dense_stacked(params: &VarParams, t_len: usize) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let n = params.n();
    let p = params.p();
    let eq = t_len - p;
    let mut h = DMatrix::zeros(eq * n, t_len * n);
    for r in 0..eq {
        h.view_mut((r * n, (r + p) * n), (n, n))
            .copy_from(&DMatrix::identity(n, n));
        for (j, lag) in params.lags().iter().enumerate() {
            h.view_mut((r * n, (r + p - 1 - j) * n), (n, n))
                .copy_from(&(-lag));
        }
    }
    let mut c = DVector::zeros(eq * n);
    let mut xi_inv = DMatrix::zeros(eq * n, eq * n);
    for r in 0..eq {
        c.rows_mut(r * n, n).copy_from(params.b0());
        let sinv = params
            .sigma_at(r)
            .clone()
            .try_inverse()
            .expect("sigma invertible");
        xi_inv.view_mut((r * n, r * n), (n, n)).copy_from(&sinv);
    }
    (h, c, xi_inv)
}

/// Dense selection matrices `(M_u, M_o)` mapping the missing / observed
/// cells into the `Tn` stacked vector.
pub fn dense_selections(panel: &MixedPanel) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = panel.n();
    let t_len = panel.t_len();
    let u = panel.u_cells();
    let o = panel.o_cells();
    let mut mu = DMatrix::zeros(t_len * n, u.len());
    for (k, &(t, i)) in u.iter().enumerate() {
        mu[(t * n + i, k)] = 1.0;
    }
    let mut mo = DMatrix::zeros(t_len * n, o.len());
    for (k, &(t, i)) in o.iter().enumerate() {
        mo[(t * n + i, k)] = 1.0;
    }
    (mu, mo)
}

/// Conditional precision and right-hand side of `Y^u | Y^o` computed
/// densely: `(K, K mu)`.
pub fn dense_precision(params: &VarParams, panel: &MixedPanel) -> (DMatrix<f64>, DVector<f64>) {
    let (h, c, xi_inv) = dense_stacked(params, panel.t_len());
    let (mu_sel, mo_sel) = dense_selections(panel);
    let yo = DVector::from_vec(
        panel
            .o_cells()
            .iter()
            .map(|&(t, i)| panel.value(t, i))
            .collect(),
    );
    let hu = &h * &mu_sel;
    let ho = &h * &mo_sel;
    let k = hu.transpose() * &xi_inv * &hu;
    let rhs = hu.transpose() * &xi_inv * (&c - &ho * &yo);
    (k, rhs)
}

/// Moments of `Y^u | Y^o` computed densely: `(mean, covariance)`.
pub fn dense_conditional(params: &VarParams, panel: &MixedPanel) -> (DVector<f64>, DMatrix<f64>) {
    let (k, rhs) = dense_precision(params, panel);
    let cov = k.try_inverse().expect("K invertible");
    let mean = &cov * rhs;
    (mean, cov)
}

/// Dense constraint matrix and target from a [`ConstraintSet`].
pub fn dense_constraints(cs: &ConstraintSet) -> (DMatrix<f64>, DVector<f64>) {
    let mut a = DMatrix::zeros(cs.k(), cs.dim());
    for (r, row) in cs.rows().iter().enumerate() {
        for (c, w) in row.cols.iter().zip(&row.weights) {
            a[(r, *c)] += w;
        }
    }
    (a, DVector::from_vec(cs.y_tilde()))
}

/// Moments after conditioning a Gaussian `(mean, cov)` on `A x = v`
/// exactly.
pub fn dense_hard_conditioned(
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    a: &DMatrix<f64>,
    v: &DVector<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    let s = a * cov * a.transpose();
    let sinv = s.try_inverse().expect("A cov A' invertible");
    let gain = cov * a.transpose() * sinv;
    let mean_c = mean + &gain * (v - a * mean);
    let cov_c = cov - &gain * a * cov;
    (mean_c, cov_c)
}

/// Moments after folding soft constraints with diagonal noise `o` into a
/// Gaussian given by precision `k` and right-hand side `k * mean`.
pub fn dense_soft_conditioned(
    k: &DMatrix<f64>,
    rhs: &DVector<f64>,
    a: &DMatrix<f64>,
    v: &DVector<f64>,
    o_diag: &[f64],
) -> (DVector<f64>, DMatrix<f64>) {
    let o_inv = DMatrix::from_diagonal(&DVector::from_vec(
        o_diag.iter().map(|o| 1.0 / o).collect(),
    ));
    let kk = k + a.transpose() * &o_inv * a;
    let rr = rhs + a.transpose() * &o_inv * v;
    let cov = kk.try_inverse().expect("soft precision invertible");
    let mean = &cov * rr;
    (mean, cov)
}

/// Empirical mean and covariance of a set of draws (rows).
pub fn sample_moments(draws: &[Vec<f64>]) -> (DVector<f64>, DMatrix<f64>) {
    let n = draws.len();
    let m = draws[0].len();
    let mut mean = DVector::zeros(m);
    for d in draws {
        for i in 0..m {
            mean[i] += d[i];
        }
    }
    mean /= n as f64;
    let mut cov = DMatrix::zeros(m, m);
    for d in draws {
        for i in 0..m {
            let di = d[i] - mean[i];
            for j in i..m {
                cov[(i, j)] += di * (d[j] - mean[j]);
            }
        }
    }
    for i in 0..m {
        for j in i..m {
            cov[(i, j)] /= (n - 1) as f64;
            cov[(j, i)] = cov[(i, j)];
        }
    }
    (mean, cov)
}

/// Checks empirical moments against target moments within `z` Monte
/// Carlo standard errors; returns the worst standardized deviation over
/// means and covariance entries.
pub fn moment_max_z(
    emp_mean: &DVector<f64>,
    emp_cov: &DMatrix<f64>,
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    n_draws: usize,
) -> f64 {
    let m = mean.len();
    let nf = n_draws as f64;
    let mut worst: f64 = 0.0;
    for i in 0..m {
        let se = (cov[(i, i)] / nf).sqrt();
        worst = worst.max((emp_mean[i] - mean[i]).abs() / se);
    }
    for i in 0..m {
        for j in i..m {
            let var = (cov[(i, i)] * cov[(j, j)] + cov[(i, j)] * cov[(i, j)]) / nf;
            let se = var.sqrt();
            worst = worst.max((emp_cov[(i, j)] - cov[(i, j)]).abs() / se);
        }
    }
    worst
}
