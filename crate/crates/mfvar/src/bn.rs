//! Multivariate Beveridge-Nelson trend-cycle decomposition of a
//! completed panel under the fitted VAR.

use nalgebra::{DMatrix, DVector};

use crate::error::{MfError, Result};
use crate::model::VarParams;

/// Margin below 1 at which the companion spectral radius is treated as
/// non-stationary.
pub const STATIONARITY_MARGIN: f64 = 1e-8;

/// Companion form of a VAR(p): `X_t = g + F X_{t-1} + e_t` with
/// `X_t = (y_t', ..., y_{t-p+1}')'`.
#[derive(Debug, Clone)]
pub struct CompanionForm {
    f: DMatrix<f64>,
    g: DVector<f64>,
    mu: DVector<f64>,
}

impl CompanionForm {
    /// Builds the companion form and checks stationarity; errors with the
    /// offending spectral radius when the largest eigenvalue modulus is
    /// within [`STATIONARITY_MARGIN`] of one.
    pub fn from_params(params: &VarParams) -> Result<Self> {
        let n = params.n();
        let p = params.p();
        let dim = n * p;
        let mut f = DMatrix::zeros(dim, dim);
        for (j, lag) in params.lags().iter().enumerate() {
            f.view_mut((0, j * n), (n, n)).copy_from(lag);
        }
        for b in 1..p {
            f.view_mut((b * n, (b - 1) * n), (n, n))
                .copy_from(&DMatrix::identity(n, n));
        }
        let mut g = DVector::zeros(dim);
        g.rows_mut(0, n).copy_from(params.b0());

        let rho = spectral_radius_of(&f);
        if rho >= 1.0 - STATIONARITY_MARGIN {
            return Err(MfError::NonStationary(rho));
        }

        // unconditional mean: (I - F) mu = g
        let imf = DMatrix::identity(dim, dim) - &f;
        let mu = imf
            .lu()
            .solve(&g)
            .ok_or(MfError::NonStationary(rho))?;
        Ok(CompanionForm { f, g, mu })
    }

    pub fn f(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn g(&self) -> &DVector<f64> {
        &self.g
    }

    /// Unconditional mean of the companion state.
    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn spectral_radius(&self) -> f64 {
        spectral_radius_of(&self.f)
    }
}

/// Spectral radius via Gelfand's formula with repeated squaring:
/// `rho = lim ||A^m||^(1/m)` along `m = 2^k`. Sixty squarings drive the
/// polynomial and conditioning factors below 1e-14 relative error, and
/// unlike an iterative eigensolver this cannot fail to terminate.
pub fn spectral_radius_of(m: &DMatrix<f64>) -> f64 {
    let mut a = m.clone();
    let mut log_scale = 0.0f64; // A^(2^k) = exp(log_scale) * a
    for _ in 0..60 {
        let norm = a.norm();
        if norm == 0.0 {
            return 0.0;
        }
        if !norm.is_finite() {
            return f64::INFINITY;
        }
        log_scale = 2.0 * (log_scale + norm.ln());
        a /= norm;
        a = &a * &a;
    }
    let m_pow = (2.0f64).powi(60);
    ((log_scale + a.norm().ln()) / m_pow).exp()
}

/// Beveridge-Nelson cycle `c_t = -F (I - F)^{-1} (X_t - mu)` for each
/// period with a full lag window; rows `0..p-1` of the result are NaN.
///
/// `completed` is the `T x n` panel with missing cells filled in.
pub fn bn_cycle(params: &VarParams, completed: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = params.n();
    let p = params.p();
    let t_len = completed.nrows();
    if completed.ncols() != n {
        return Err(MfError::DimensionMismatch(format!(
            "panel has {} columns, parameters have n = {n}",
            completed.ncols()
        )));
    }
    if t_len < p {
        return Err(MfError::DimensionMismatch(format!(
            "panel has {t_len} periods, need at least p = {p}"
        )));
    }
    let comp = CompanionForm::from_params(params)?;
    let dim = n * p;

    // A = -F (I - F)^{-1}; only the first n rows enter the cycle.
    let imf = DMatrix::identity(dim, dim) - comp.f();
    let inv = imf
        .lu()
        .try_inverse()
        .ok_or_else(|| MfError::NonStationary(comp.spectral_radius()))?;
    let a_top = (-comp.f() * inv).rows(0, n).into_owned();

    let mut cycle = DMatrix::from_element(t_len, n, f64::NAN);
    let mut x = DVector::zeros(dim);
    for t in (p - 1)..t_len {
        for j in 0..p {
            for i in 0..n {
                x[j * n + i] = completed[(t - j, i)] - comp.mu()[j * n + i];
            }
        }
        let c = &a_top * &x;
        for i in 0..n {
            cycle[(t, i)] = c[i];
        }
    }
    Ok(cycle)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ar1(phi: f64) -> VarParams {
        VarParams::constant(
            DVector::from_element(1, 0.0),
            vec![DMatrix::from_element(1, 1, phi)],
            DMatrix::identity(1, 1),
        )
        .unwrap()
    }

    #[test]
    fn ar1_cycle_closed_form() {
        // c_t = -phi/(1-phi) (x_t - mu); phi = 0.5, x - mu = 1 -> -1
        let params = ar1(0.5);
        let completed = DMatrix::from_element(5, 1, 1.0);
        let cycle = bn_cycle(&params, &completed).unwrap();
        for t in 0..5 {
            assert!((cycle[(t, 0)] + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_coefficients_give_zero_cycle() {
        let params = VarParams::constant(
            DVector::from_element(2, 0.3),
            vec![DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)],
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let completed = DMatrix::from_fn(8, 2, |t, i| (t + i) as f64);
        let cycle = bn_cycle(&params, &completed).unwrap();
        assert!(cycle[(0, 0)].is_nan());
        for t in 1..8 {
            for i in 0..2 {
                assert_eq!(cycle[(t, i)], 0.0);
            }
        }
    }

    #[test]
    fn cycle_matches_forecast_sum() {
        // c_t = -sum_{h>=1} F^h (X_t - mu), truncated far past convergence
        let params = VarParams::constant(
            DVector::from_vec(vec![0.1, -0.2]),
            vec![
                DMatrix::from_row_slice(2, 2, &[0.5, 0.1, -0.2, 0.3]),
                DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.05, -0.1]),
            ],
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let completed = DMatrix::from_fn(6, 2, |t, i| 0.3 * ((t * 2 + i) as f64).sin());
        let cycle = bn_cycle(&params, &completed).unwrap();
        let comp = CompanionForm::from_params(&params).unwrap();
        let t = 4usize;
        let mut x = DVector::zeros(4);
        for j in 0..2 {
            for i in 0..2 {
                x[j * 2 + i] = completed[(t - j, i)] - comp.mu()[j * 2 + i];
            }
        }
        let mut v = x.clone();
        let mut acc = DVector::zeros(4);
        for _ in 0..5000 {
            v = comp.f() * v;
            acc += &v;
        }
        for i in 0..2 {
            assert!((cycle[(t, i)] + acc[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn unit_root_rejected() {
        let params = ar1(1.0);
        let completed = DMatrix::zeros(4, 1);
        match bn_cycle(&params, &completed) {
            Err(MfError::NonStationary(rho)) => assert!((rho - 1.0).abs() < 1e-10),
            other => panic!("expected NonStationary, got {other:?}"),
        }
    }

    #[test]
    fn near_unit_root_rejected() {
        let params = ar1(1.0 - 1e-9);
        assert!(matches!(
            CompanionForm::from_params(&params),
            Err(MfError::NonStationary(_))
        ));
    }

    #[test]
    fn unconditional_mean_solves_fixed_point() {
        let params = VarParams::constant(
            DVector::from_vec(vec![0.02, 0.01]),
            vec![DMatrix::from_row_slice(2, 2, &[0.4, 0.1, 0.0, 0.6])],
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let comp = CompanionForm::from_params(&params).unwrap();
        let lhs = comp.mu() - comp.f() * comp.mu();
        assert!((lhs - comp.g()).abs().max() < 1e-12);
    }
}
