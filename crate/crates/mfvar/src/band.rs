//! Banded matrix kernel: storage, products, banded Cholesky and
//! triangular solves.
//!
//! Every structural matrix in the stacked mixed-frequency system (the
//! difference operator H, the block-diagonal innovation precision, the
//! conditional precision K and its soft-constraint variant) has a fixed
//! bandwidth, so a LAPACK-style diagonal band layout is used throughout
//! instead of a general sparse format.

use crate::error::{MfError, Result};

/// Relative floor below which a Cholesky pivot is treated as a sign of a
/// singular or indefinite matrix rather than roundoff.
pub const PD_FLOOR: f64 = 1e-12;

/// Rectangular matrix stored by diagonals.
///
/// Entry `(i, j)` is stored iff `-lower_bw <= j - i <= upper_bw`; all
/// entries outside the band are identically zero and never stored.
/// Storage is column-major over the band: column `j` occupies a slab of
/// `lower_bw + upper_bw + 1` values holding rows
/// `j - upper_bw ..= j + lower_bw` (clipped to the matrix).
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    rows: usize,
    cols: usize,
    lower_bw: usize,
    upper_bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    /// All-zero band matrix with the given shape and bandwidths.
    pub fn zeros(rows: usize, cols: usize, lower_bw: usize, upper_bw: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        assert!(lower_bw < rows, "lower_bw must be < rows");
        assert!(upper_bw < cols, "upper_bw must be < cols");
        let stride = lower_bw + upper_bw + 1;
        BandMatrix {
            rows,
            cols,
            lower_bw,
            upper_bw,
            data: vec![0.0; stride * cols],
        }
    }

    /// Square identity.
    pub fn identity(n: usize) -> Self {
        let mut m = BandMatrix::zeros(n, n, 0, 0);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Build from a dense row-major slice, detecting the bandwidths.
    pub fn from_dense(rows: usize, cols: usize, dense: &[f64]) -> Self {
        assert_eq!(dense.len(), rows * cols);
        let mut lower = 0usize;
        let mut upper = 0usize;
        for i in 0..rows {
            for j in 0..cols {
                if dense[i * cols + j] != 0.0 {
                    if i > j {
                        lower = lower.max(i - j);
                    } else {
                        upper = upper.max(j - i);
                    }
                }
            }
        }
        let mut m = BandMatrix::zeros(rows, cols, lower, upper);
        for i in 0..rows {
            for j in 0..cols {
                let v = dense[i * cols + j];
                if v != 0.0 {
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn lower_bw(&self) -> usize {
        self.lower_bw
    }

    pub fn upper_bw(&self) -> usize {
        self.upper_bw
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        (j <= i + self.upper_bw) && (i <= j + self.lower_bw)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        let stride = self.lower_bw + self.upper_bw + 1;
        j * stride + (i + self.upper_bw - j)
    }

    /// Entry `(i, j)`; zero outside the band.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Set entry `(i, j)`. Panics if the position lies outside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        assert!(
            self.in_band(i, j),
            "({}, {}) outside band (lower {}, upper {})",
            i,
            j,
            self.lower_bw,
            self.upper_bw
        );
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    /// Add `v` to entry `(i, j)`. Panics outside the band.
    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        assert!(self.in_band(i, j), "({}, {}) outside band", i, j);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// Row range `[lo, hi)` of stored entries in column `j`.
    #[inline]
    pub fn col_range(&self, j: usize) -> (usize, usize) {
        let lo = j.saturating_sub(self.upper_bw);
        let hi = (j + self.lower_bw + 1).min(self.rows);
        (lo, hi)
    }

    /// Column range `[lo, hi)` of stored entries in row `i`.
    #[inline]
    pub fn row_range(&self, i: usize) -> (usize, usize) {
        let lo = i.saturating_sub(self.lower_bw);
        let hi = (i + self.upper_bw + 1).min(self.cols);
        (lo, hi)
    }

    /// Dense row-major copy; intended for small instances and tests.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for j in 0..self.cols {
            let (lo, hi) = self.col_range(j);
            for i in lo..hi {
                out[i * self.cols + j] = self.data[self.idx(i, j)];
            }
        }
        out
    }

    /// Transpose (bandwidths swap).
    pub fn transpose(&self) -> BandMatrix {
        let mut t = BandMatrix::zeros(self.cols, self.rows, self.upper_bw, self.lower_bw);
        for j in 0..self.cols {
            let (lo, hi) = self.col_range(j);
            for i in lo..hi {
                t.set(j, i, self.data[self.idx(i, j)]);
            }
        }
        t
    }

    /// Matrix-vector product `A x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(MfError::DimensionMismatch(format!(
                "matvec: {}x{} by vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut y = vec![0.0; self.rows];
        for j in 0..self.cols {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let (lo, hi) = self.col_range(j);
            for i in lo..hi {
                y[i] += self.data[self.idx(i, j)] * xj;
            }
        }
        Ok(y)
    }

    /// Transposed matrix-vector product `A' x`.
    pub fn matvec_t(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(MfError::DimensionMismatch(format!(
                "matvec_t: {}x{} transposed by vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut y = vec![0.0; self.cols];
        for j in 0..self.cols {
            let (lo, hi) = self.col_range(j);
            let mut acc = 0.0;
            for i in lo..hi {
                acc += self.data[self.idx(i, j)] * x[i];
            }
            y[j] = acc;
        }
        Ok(y)
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let mut row_sums = vec![0.0f64; self.rows];
        for j in 0..self.cols {
            let (lo, hi) = self.col_range(j);
            for i in lo..hi {
                row_sums[i] += self.data[self.idx(i, j)].abs();
            }
        }
        row_sums.into_iter().fold(0.0, f64::max)
    }
}

/// Banded product `A B`. The result bandwidths are the sums of the operand
/// bandwidths, clipped to the result shape.
pub fn band_matmul(a: &BandMatrix, b: &BandMatrix) -> Result<BandMatrix> {
    if a.cols != b.rows {
        return Err(MfError::DimensionMismatch(format!(
            "matmul: {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let lower = (a.lower_bw + b.lower_bw).min(a.rows - 1);
    let upper = (a.upper_bw + b.upper_bw).min(b.cols - 1);
    let mut c = BandMatrix::zeros(a.rows, b.cols, lower, upper);
    for j in 0..b.cols {
        let (klo, khi) = b.col_range(j);
        for k in klo..khi {
            let bkj = b.data[b.idx(k, j)];
            if bkj == 0.0 {
                continue;
            }
            let (ilo, ihi) = a.col_range(k);
            for i in ilo..ihi {
                let v = a.data[a.idx(i, k)] * bkj;
                if v != 0.0 {
                    c.add_to(i, j, v);
                }
            }
        }
    }
    Ok(c)
}

/// Lower-triangular Cholesky factor of a banded SPD matrix.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    l: BandMatrix,
}

impl CholeskyFactor {
    /// The factor `L` with `A = L L'`.
    pub fn l(&self) -> &BandMatrix {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows
    }

    /// Log-determinant of the factored matrix, `2 sum log L_ii`.
    pub fn log_det(&self) -> f64 {
        (0..self.l.rows).map(|i| 2.0 * self.l.get(i, i).ln()).sum()
    }
}

/// Banded Cholesky factorization `A = L L'` of a symmetric positive
/// definite band matrix. Cost is proportional to `rows * bandwidth^2`.
///
/// Fails with `NotPositiveDefinite` when a pivot falls below
/// `PD_FLOOR` relative to its own diagonal entry, which signals genuine
/// rank deficiency (e.g. a non-identified missing block) rather than
/// roundoff. The floor is per row, not global, because well-posed
/// systems can legitimately mix diagonal scales.
pub fn band_cholesky(a: &BandMatrix) -> Result<CholeskyFactor> {
    if a.rows != a.cols {
        return Err(MfError::DimensionMismatch(format!(
            "cholesky of non-square {}x{}",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    let bw = a.lower_bw.max(a.upper_bw);

    let mut l = BandMatrix::zeros(n, n, bw, 0);
    for j in 0..n {
        // pivot
        let mut d = a.get(j, j);
        let klo = j.saturating_sub(bw);
        for k in klo..j {
            let ljk = l.get(j, k);
            d -= ljk * ljk;
        }
        if d <= PD_FLOOR * a.get(j, j).abs().max(f64::MIN_POSITIVE) {
            return Err(MfError::NotPositiveDefinite { pivot: j, value: d });
        }
        let ljj = d.sqrt();
        l.set(j, j, ljj);
        // column below the pivot
        let ihi = (j + bw + 1).min(n);
        for i in (j + 1)..ihi {
            let mut s = a.get(i, j);
            let klo = i.saturating_sub(bw).max(j.saturating_sub(bw));
            for k in klo..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / ljj);
        }
    }
    Ok(CholeskyFactor { l })
}

/// Forward substitution: solve `L x = b`.
pub fn solve_lower(chol: &CholeskyFactor, b: &[f64]) -> Result<Vec<f64>> {
    let l = &chol.l;
    let n = l.rows;
    if b.len() != n {
        return Err(MfError::DimensionMismatch(format!(
            "solve_lower: system of size {} with rhs of length {}",
            n,
            b.len()
        )));
    }
    let mut x = b.to_vec();
    let bw = l.lower_bw;
    for i in 0..n {
        let jlo = i.saturating_sub(bw);
        let mut s = x[i];
        for j in jlo..i {
            s -= l.get(i, j) * x[j];
        }
        x[i] = s / l.get(i, i);
    }
    Ok(x)
}

/// Backward substitution: solve `L' x = b`.
pub fn solve_upper(chol: &CholeskyFactor, b: &[f64]) -> Result<Vec<f64>> {
    let l = &chol.l;
    let n = l.rows;
    if b.len() != n {
        return Err(MfError::DimensionMismatch(format!(
            "solve_upper: system of size {} with rhs of length {}",
            n,
            b.len()
        )));
    }
    let mut x = b.to_vec();
    let bw = l.lower_bw;
    for i in (0..n).rev() {
        let jhi = (i + bw + 1).min(n);
        let mut s = x[i];
        // L'(i, j) = L(j, i)
        for j in (i + 1)..jhi {
            s -= l.get(j, i) * x[j];
        }
        x[i] = s / l.get(i, i);
    }
    Ok(x)
}

/// Solve `A x = b` given the factor of `A`, by forward then backward
/// substitution.
pub fn solve_spd(chol: &CholeskyFactor, b: &[f64]) -> Result<Vec<f64>> {
    let y = solve_lower(chol, b)?;
    solve_upper(chol, &y)
}
