//! The stacked mixed-frequency VAR system and the conditional Gaussian
//! distribution of the missing observations.
//!
//! The VAR over `t = p+1..T` is rewritten as `H Y = c + eps` where `Y`
//! stacks all `T` periods, `H` is a banded difference operator and the
//! innovation covariance is block diagonal. Splitting `Y` into observed
//! and missing cells through selection matrices gives the missing block
//! a Gaussian conditional with banded precision
//! `K = M_u' H' Xi^-1 H M_u` and mean defined by
//! `K mu = M_u' H' Xi^-1 (c - H M_o Y^o)`.
//!
//! `K` and the right-hand side are assembled directly from the per-period
//! coefficient blocks; the selection matrices are never formed densely
//! and `K^-1` is never formed at all.

use nalgebra::{DMatrix, DVector};

use crate::band::{band_cholesky, solve_spd, BandMatrix};
use crate::error::{MfError, Result};

/// Innovation covariance: one matrix for all periods, or one per
/// equation period `t = p+1..T` (length `T - p`).
#[derive(Debug, Clone)]
pub enum SigmaSpec {
    Constant(DMatrix<f64>),
    TimeVarying(Vec<DMatrix<f64>>),
}

/// VAR(p) parameters: intercept, lag matrices and innovation covariance.
#[derive(Debug, Clone)]
pub struct VarParams {
    n: usize,
    p: usize,
    b0: DVector<f64>,
    lags: Vec<DMatrix<f64>>,
    sigma: SigmaSpec,
}

impl VarParams {
    /// Validates shapes and symmetry of the covariance(s).
    pub fn new(b0: DVector<f64>, lags: Vec<DMatrix<f64>>, sigma: SigmaSpec) -> Result<Self> {
        let n = b0.len();
        let p = lags.len();
        if n == 0 || p == 0 {
            return Err(MfError::DimensionMismatch(
                "need n >= 1 variables and p >= 1 lags".into(),
            ));
        }
        for (j, b) in lags.iter().enumerate() {
            if b.nrows() != n || b.ncols() != n {
                return Err(MfError::DimensionMismatch(format!(
                    "lag matrix B{} is {}x{}, expected {}x{}",
                    j + 1,
                    b.nrows(),
                    b.ncols(),
                    n,
                    n
                )));
            }
        }
        let check_sym = |s: &DMatrix<f64>| -> Result<()> {
            if s.nrows() != n || s.ncols() != n {
                return Err(MfError::DimensionMismatch(format!(
                    "covariance is {}x{}, expected {}x{}",
                    s.nrows(),
                    s.ncols(),
                    n,
                    n
                )));
            }
            let asym = (s - s.transpose()).abs().max();
            if asym > 1e-8 * (1.0 + s.abs().max()) {
                return Err(MfError::DimensionMismatch(
                    "covariance is not symmetric".into(),
                ));
            }
            Ok(())
        };
        match &sigma {
            SigmaSpec::Constant(s) => check_sym(s)?,
            SigmaSpec::TimeVarying(seq) => {
                if seq.is_empty() {
                    return Err(MfError::DimensionMismatch(
                        "time-varying covariance sequence is empty".into(),
                    ));
                }
                for s in seq {
                    check_sym(s)?;
                }
            }
        }
        Ok(VarParams {
            n,
            p,
            b0,
            lags,
            sigma,
        })
    }

    /// Convenience constructor for a constant covariance.
    pub fn constant(b0: DVector<f64>, lags: Vec<DMatrix<f64>>, sigma: DMatrix<f64>) -> Result<Self> {
        VarParams::new(b0, lags, SigmaSpec::Constant(sigma))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn b0(&self) -> &DVector<f64> {
        &self.b0
    }

    /// Lag matrices `B1..Bp`.
    pub fn lags(&self) -> &[DMatrix<f64>] {
        &self.lags
    }

    pub fn sigma(&self) -> &SigmaSpec {
        &self.sigma
    }

    /// Covariance at equation period index `r = t - p - 1` (0-based over
    /// the `T - p` equation periods).
    pub fn sigma_at(&self, r: usize) -> &DMatrix<f64> {
        match &self.sigma {
            SigmaSpec::Constant(s) => s,
            SigmaSpec::TimeVarying(seq) => &seq[r],
        }
    }

    fn sigma_inverses(&self, eq_count: usize) -> Result<SigmaInv> {
        let inv = |s: &DMatrix<f64>| -> Result<DMatrix<f64>> {
            s.clone()
                .cholesky()
                .map(|c| c.inverse())
                .ok_or(MfError::NotPositiveDefinite { pivot: 0, value: 0.0 })
        };
        match &self.sigma {
            SigmaSpec::Constant(s) => Ok(SigmaInv::Constant(inv(s)?)),
            SigmaSpec::TimeVarying(seq) => {
                if seq.len() != eq_count {
                    return Err(MfError::DimensionMismatch(format!(
                        "time-varying covariance sequence has length {}, expected {}",
                        seq.len(),
                        eq_count
                    )));
                }
                Ok(SigmaInv::Seq(seq.iter().map(inv).collect::<Result<_>>()?))
            }
        }
    }
}

enum SigmaInv {
    Constant(DMatrix<f64>),
    Seq(Vec<DMatrix<f64>>),
}

impl SigmaInv {
    fn at(&self, r: usize) -> &DMatrix<f64> {
        match self {
            SigmaInv::Constant(s) => s,
            SigmaInv::Seq(v) => &v[r],
        }
    }

    fn is_constant(&self) -> bool {
        matches!(self, SigmaInv::Constant(_))
    }
}

/// An observed low-frequency aggregate: the value tied to variable
/// column `var` whose aggregation window ends at 1-based period `period`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub var: usize,
    pub period: usize,
    pub value: f64,
}

/// A `T x n` data panel with an explicit observedness mask and the
/// observed low-frequency aggregates.
///
/// Columns are conventionally ordered observed block first, unobserved
/// block second; the mask is the source of truth and may describe any
/// missingness pattern.
#[derive(Debug, Clone)]
pub struct MixedPanel {
    t_len: usize,
    n: usize,
    names: Vec<String>,
    values: Vec<f64>,
    mask: Vec<bool>,
    aggregates: Vec<Aggregate>,
}

impl MixedPanel {
    /// General constructor. `values` and `mask` are row-major `T x n`;
    /// masked-off cells may hold NaN.
    pub fn new(
        t_len: usize,
        names: Vec<String>,
        values: Vec<f64>,
        mask: Vec<bool>,
        aggregates: Vec<Aggregate>,
    ) -> Result<Self> {
        let n = names.len();
        if values.len() != t_len * n || mask.len() != t_len * n {
            return Err(MfError::DimensionMismatch(format!(
                "panel is {}x{} but values/mask have lengths {}/{}",
                t_len,
                n,
                values.len(),
                mask.len()
            )));
        }
        for t in 0..t_len {
            for i in 0..n {
                if mask[t * n + i] && !values[t * n + i].is_finite() {
                    return Err(MfError::MaskInconsistent(format!(
                        "cell ({}, {}) marked observed but not finite",
                        t + 1,
                        i + 1
                    )));
                }
            }
        }
        for a in &aggregates {
            if a.period == 0 || a.period > t_len {
                return Err(MfError::MaskInconsistent(format!(
                    "aggregate stamp {} outside 1..{}",
                    a.period, t_len
                )));
            }
            if a.var >= n {
                return Err(MfError::MaskInconsistent(format!(
                    "aggregate references variable {} of {}",
                    a.var + 1,
                    n
                )));
            }
        }
        Ok(MixedPanel {
            t_len,
            n,
            names,
            values,
            mask,
            aggregates,
        })
    }

    /// Standard block layout: the first `n_o` columns fully observed, the
    /// last `n_u` columns fully missing with their aggregates attached.
    pub fn from_blocks(
        t_len: usize,
        observed: &DMatrix<f64>,
        n_u: usize,
        aggregates: Vec<Aggregate>,
    ) -> Result<Self> {
        let n_o = observed.ncols();
        if observed.nrows() != t_len {
            return Err(MfError::DimensionMismatch(format!(
                "observed block has {} rows, expected {}",
                observed.nrows(),
                t_len
            )));
        }
        let n = n_o + n_u;
        let names = (0..n)
            .map(|i| {
                if i < n_o {
                    format!("obs{}", i + 1)
                } else {
                    format!("lat{}", i + 1 - n_o)
                }
            })
            .collect();
        let mut values = vec![f64::NAN; t_len * n];
        let mut mask = vec![false; t_len * n];
        for t in 0..t_len {
            for i in 0..n_o {
                values[t * n + i] = observed[(t, i)];
                mask[t * n + i] = true;
            }
        }
        let aggregates = aggregates
            .into_iter()
            .map(|a| Aggregate {
                var: a.var + n_o,
                ..a
            })
            .collect();
        MixedPanel::new(t_len, names, values, mask, aggregates)
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn aggregates(&self) -> &[Aggregate] {
        &self.aggregates
    }

    #[inline]
    pub fn is_observed(&self, t: usize, i: usize) -> bool {
        self.mask[t * self.n + i]
    }

    #[inline]
    pub fn value(&self, t: usize, i: usize) -> f64 {
        self.values[t * self.n + i]
    }

    pub fn set_value(&mut self, t: usize, i: usize, v: f64) {
        self.values[t * self.n + i] = v;
    }

    /// Number of fully observed columns.
    pub fn n_obs_cols(&self) -> usize {
        (0..self.n)
            .filter(|&i| (0..self.t_len).all(|t| self.is_observed(t, i)))
            .count()
    }

    /// Columns with at least one missing cell.
    pub fn missing_cols(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| (0..self.t_len).any(|t| !self.is_observed(t, i)))
            .collect()
    }

    /// Missing cells in stacking order `(t, i)`, `t` 0-based.
    pub fn u_cells(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for t in 0..self.t_len {
            for i in 0..self.n {
                if !self.is_observed(t, i) {
                    v.push((t, i));
                }
            }
        }
        v
    }

    /// Observed cells in stacking order.
    pub fn o_cells(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for t in 0..self.t_len {
            for i in 0..self.n {
                if self.is_observed(t, i) {
                    v.push((t, i));
                }
            }
        }
        v
    }

    /// Cell index -> position in the stacked missing vector, `None` for
    /// observed cells.
    pub fn u_positions(&self) -> Vec<Option<usize>> {
        let mut pos = vec![None; self.t_len * self.n];
        let mut k = 0;
        for (c, &obs) in self.mask.iter().enumerate() {
            if !obs {
                pos[c] = Some(k);
                k += 1;
            }
        }
        pos
    }

    /// Writes a stacked missing-value draw back into the panel cells.
    pub fn fill_missing(&mut self, yu: &[f64]) -> Result<()> {
        let cells = self.u_cells();
        if yu.len() != cells.len() {
            return Err(MfError::DimensionMismatch(format!(
                "draw has {} entries for {} missing cells",
                yu.len(),
                cells.len()
            )));
        }
        for (&(t, i), &v) in cells.iter().zip(yu) {
            self.values[t * self.n + i] = v;
        }
        Ok(())
    }

    /// Completed panel as a dense `T x n` matrix; fails if any cell is
    /// still NaN.
    pub fn completed(&self) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.t_len, self.n);
        for t in 0..self.t_len {
            for i in 0..self.n {
                let v = self.value(t, i);
                if !v.is_finite() {
                    return Err(MfError::MaskInconsistent(format!(
                        "cell ({}, {}) not filled",
                        t + 1,
                        i + 1
                    )));
                }
                m[(t, i)] = v;
            }
        }
        Ok(m)
    }
}

/// A 0/1 selection matrix stored as the row index of the single 1 in
/// each column.
#[derive(Debug, Clone)]
pub struct SelectionMatrix {
    rows: usize,
    col_to_row: Vec<usize>,
}

impl SelectionMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.col_to_row.len()
    }

    /// Row index of the 1 in column `c`.
    pub fn row_of(&self, c: usize) -> usize {
        self.col_to_row[c]
    }

    /// `M x`: scatter the packed vector into the stacked vector.
    pub fn scatter(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols() {
            return Err(MfError::DimensionMismatch(format!(
                "scatter: {} columns, vector of length {}",
                self.cols(),
                x.len()
            )));
        }
        let mut y = vec![0.0; self.rows];
        for (c, &r) in self.col_to_row.iter().enumerate() {
            y[r] = x[c];
        }
        Ok(y)
    }

    /// `M' y`: gather the selected entries of the stacked vector.
    pub fn gather(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(MfError::DimensionMismatch(format!(
                "gather: {} rows, vector of length {}",
                self.rows,
                y.len()
            )));
        }
        Ok(self.col_to_row.iter().map(|&r| y[r]).collect())
    }
}

/// Selection matrices `(M_o, M_u)` with `Y = M_o Y^o + M_u Y^u`.
pub fn build_selection(panel: &MixedPanel) -> Result<(SelectionMatrix, SelectionMatrix)> {
    let n = panel.n();
    let rows = panel.t_len() * n;
    let m_o = SelectionMatrix {
        rows,
        col_to_row: panel.o_cells().iter().map(|&(t, i)| t * n + i).collect(),
    };
    let m_u = SelectionMatrix {
        rows,
        col_to_row: panel.u_cells().iter().map(|&(t, i)| t * n + i).collect(),
    };
    Ok((m_o, m_u))
}

/// The banded difference operator of the stacked system, with the
/// stacked intercept `c = 1_{T-p} (x) b0`.
///
/// `H` is `(T-p)n x Tn`; block row `r` carries `(-B_p, ..., -B_1, I_n)`
/// over column blocks `r .. r+p`.
pub fn build_stacked_h(params: &VarParams, t_len: usize) -> Result<(BandMatrix, Vec<f64>)> {
    let n = params.n();
    let p = params.p();
    if t_len <= p {
        return Err(MfError::DimensionMismatch(format!(
            "need T > p, got T = {}, p = {}",
            t_len, p
        )));
    }
    let eq = t_len - p;
    let mut h = BandMatrix::zeros(eq * n, t_len * n, n - 1, (p + 1) * n - 1);
    for r in 0..eq {
        for j in 0..=p {
            // column block r + j: -B_{p-j} for j < p, identity at j = p
            for i1 in 0..n {
                for i2 in 0..n {
                    let v = if j == p {
                        if i1 == i2 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        -params.lags()[p - j - 1][(i1, i2)]
                    };
                    if v != 0.0 {
                        h.set(r * n + i1, (r + j) * n + i2, v);
                    }
                }
            }
        }
    }
    let mut c = vec![0.0; eq * n];
    for r in 0..eq {
        for i in 0..n {
            c[r * n + i] = params.b0()[i];
        }
    }
    Ok((h, c))
}

/// The conditional Gaussian of the stacked missing observations: banded
/// precision `K` and the right-hand side `K mu`. The mean is recovered
/// on demand by banded solves; `K^-1` is never formed.
#[derive(Debug, Clone)]
pub struct ConditionalGaussian {
    pub precision: BandMatrix,
    pub scaled_mean_rhs: Vec<f64>,
}

impl ConditionalGaussian {
    pub fn dim(&self) -> usize {
        self.scaled_mean_rhs.len()
    }

    /// Conditional mean, solving `K mu = rhs`.
    pub fn mean(&self) -> Result<Vec<f64>> {
        let chol = band_cholesky(&self.precision)?;
        solve_spd(&chol, &self.scaled_mean_rhs)
    }
}

/// Assembles `K = M_u' H' Xi^-1 H M_u` and `K mu` directly from the
/// per-equation coefficient blocks.
///
/// Missing cells of the first `p` periods are part of the missing vector;
/// they enter `K` only through the equations that reference them as lags,
/// so identification requires each missing variable to load on some lag
/// matrix. A rank-deficient block surfaces as `NotPositiveDefinite` when
/// the precision is factorized.
pub fn build_conditional(params: &VarParams, panel: &MixedPanel) -> Result<ConditionalGaussian> {
    let n = params.n();
    let p = params.p();
    let t_len = panel.t_len();
    if panel.n() != n {
        return Err(MfError::DimensionMismatch(format!(
            "panel has {} variables, params have {}",
            panel.n(),
            n
        )));
    }
    if t_len <= p {
        return Err(MfError::DimensionMismatch(format!(
            "need T > p, got T = {}, p = {}",
            t_len, p
        )));
    }
    let eq = t_len - p;
    let upos_flat = panel.u_positions();
    let upos = |t: usize, i: usize| upos_flat[t * n + i];
    let nu_total = upos_flat.iter().flatten().count();
    if nu_total == 0 {
        return Err(MfError::MaskInconsistent(
            "panel has no missing cells".into(),
        ));
    }

    // Missing-cell counts per period prefix, for the exact bandwidth.
    let mut prefix = vec![0usize; t_len + 1];
    for t in 0..t_len {
        let cnt = (0..n).filter(|&i| !panel.is_observed(t, i)).count();
        prefix[t + 1] = prefix[t] + cnt;
    }
    let mut bw = 0usize;
    for r in 0..eq {
        let hi = prefix[(r + p + 1).min(t_len)];
        let lo = prefix[r];
        if hi > lo {
            bw = bw.max(hi - lo - 1);
        }
    }

    let sig_inv = params.sigma_inverses(eq)?;

    // G_j: coefficient of period block r + j in equation block r.
    let eye = DMatrix::<f64>::identity(n, n);
    let g = |j: usize| -> DMatrix<f64> {
        if j == p {
            eye.clone()
        } else {
            -&params.lags()[p - j - 1]
        }
    };
    let gs: Vec<DMatrix<f64>> = (0..=p).map(g).collect();

    let make_blocks = |s: &DMatrix<f64>| -> (Vec<Vec<DMatrix<f64>>>, Vec<DVector<f64>>) {
        let sg: Vec<DMatrix<f64>> = gs.iter().map(|gj| s * gj).collect();
        let blocks = gs
            .iter()
            .map(|g1| sg.iter().map(|sg2| g1.transpose() * sg2).collect())
            .collect();
        let cvec = gs
            .iter()
            .map(|g1| g1.transpose() * (s * params.b0()))
            .collect();
        (blocks, cvec)
    };

    let constant_blocks = if sig_inv.is_constant() {
        Some(make_blocks(sig_inv.at(0)))
    } else {
        None
    };

    let mut k = BandMatrix::zeros(nu_total, nu_total, bw, bw);
    let mut rhs = vec![0.0; nu_total];

    let mut varying: Option<(Vec<Vec<DMatrix<f64>>>, Vec<DVector<f64>>)>;
    for r in 0..eq {
        let (blocks, cvec) = match &constant_blocks {
            Some(b) => b,
            None => {
                varying = Some(make_blocks(sig_inv.at(r)));
                varying.as_ref().unwrap()
            }
        };
        for j1 in 0..=p {
            let t1 = r + j1;
            for i1 in 0..n {
                let row = match upos(t1, i1) {
                    Some(row) => row,
                    None => continue,
                };
                rhs[row] += cvec[j1][i1];
                for j2 in 0..=p {
                    let t2 = r + j2;
                    let mb = &blocks[j1][j2];
                    for i2 in 0..n {
                        let v = mb[(i1, i2)];
                        if v == 0.0 {
                            continue;
                        }
                        match upos(t2, i2) {
                            Some(col) => {
                                // assemble the upper triangle only
                                if col >= row {
                                    k.add_to(row, col, v);
                                }
                            }
                            None => rhs[row] -= v * panel.value(t2, i2),
                        }
                    }
                }
            }
        }
    }

    // Mirror the upper triangle so K is symmetric exactly.
    for col in 0..nu_total {
        let hi = (col + bw).min(nu_total - 1);
        for row in (col + 1)..=hi {
            let v = k.get(col, row);
            k.set(row, col, v);
        }
    }

    Ok(ConditionalGaussian {
        precision: k,
        scaled_mean_rhs: rhs,
    })
}
