//! Inter-temporal aggregation constraints and the precision-based
//! samplers for the missing observations.
//!
//! Three samplers share the same target `N(mu, K^-1)` from
//! [`ConditionalGaussian`]:
//!
//! - unconstrained: factor `K = C C'`, solve `C' v = x` for standard
//!   normal `x`, return `mu + v`;
//! - hard constraints `y~ = M_a Y^u`: draw unconstrained, then correct by
//!   conditioning-by-kriging using only banded solves plus one small
//!   `k x k` dense factorization;
//! - soft constraints `y~ = M_a Y^u + u`, `u ~ N(0, O)`: fold the
//!   constraint rows into the precision, `K_bar = M_a' O^-1 M_a + K`,
//!   which stays banded, and sample from `N(mu_bar, K_bar^-1)`.
//!
//! The soft sampler with a very small `O` (default diagonal `1e-8`) is
//! the baseline; the hard sampler is exact and kept for small numbers of
//! constraints.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::band::{band_cholesky, solve_spd, solve_upper, BandMatrix, CholeskyFactor};
use crate::error::{MfError, Result};
use crate::model::{ConditionalGaussian, MixedPanel};

/// Default soft-constraint error variance.
pub const DEFAULT_O_DIAG: f64 = 1e-8;

/// How a low-frequency observation aggregates the high-frequency cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregationScheme {
    /// Log-linear approximation of a quarterly growth rate from monthly
    /// growth rates: weights (1/3, 2/3, 1, 2/3, 1/3) over lags 0..4.
    LogDiffTriangle,
    /// Arithmetic average of three months for a variable in (log) levels:
    /// weights (1/3, 1/3, 1/3) over lags 0..2.
    LevelAverage,
}

impl AggregationScheme {
    /// Weights ordered by lag, starting at lag 0 (the stamped period).
    pub fn weights(&self) -> &'static [f64] {
        const THIRD: f64 = 1.0 / 3.0;
        const TWO_THIRDS: f64 = 2.0 / 3.0;
        match self {
            AggregationScheme::LogDiffTriangle => {
                &[THIRD, TWO_THIRDS, 1.0, TWO_THIRDS, THIRD]
            }
            AggregationScheme::LevelAverage => &[THIRD, THIRD, THIRD],
        }
    }

    /// Lag span in high-frequency periods.
    pub fn span(&self) -> usize {
        self.weights().len()
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "log_diff_triangle" => Ok(AggregationScheme::LogDiffTriangle),
            "level_average" => Ok(AggregationScheme::LevelAverage),
            other => Err(MfError::ConfigError(format!(
                "unknown scheme '{other}' (expected log_diff_triangle or level_average)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AggregationScheme::LogDiffTriangle => "log_diff_triangle",
            AggregationScheme::LevelAverage => "level_average",
        }
    }
}

/// One row of `M_a`: sparse weights over positions in the stacked
/// missing vector, with the observed aggregate value.
#[derive(Debug, Clone)]
pub struct ConstraintRow {
    pub cols: Vec<usize>,
    pub weights: Vec<f64>,
    pub value: f64,
}

impl ConstraintRow {
    fn dot(&self, x: &[f64]) -> f64 {
        self.cols
            .iter()
            .zip(&self.weights)
            .map(|(&c, &w)| w * x[c])
            .sum()
    }
}

/// The stacked constraint system `y~ = M_a Y^u` with soft-error
/// variances `diag(O)`.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    dim: usize,
    rows: Vec<ConstraintRow>,
    o_diag: Vec<f64>,
    dropped: usize,
}

impl ConstraintSet {
    /// An empty constraint set over a missing vector of length `dim`.
    pub fn empty(dim: usize) -> Self {
        ConstraintSet {
            dim,
            rows: Vec::new(),
            o_diag: Vec::new(),
            dropped: 0,
        }
    }

    /// Number of constraints `k`.
    pub fn k(&self) -> usize {
        self.rows.len()
    }

    /// Length of the missing vector the rows index into.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[ConstraintRow] {
        &self.rows
    }

    /// Observed aggregate values, one per row.
    pub fn y_tilde(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    pub fn o_diag(&self) -> &[f64] {
        &self.o_diag
    }

    /// Rows dropped because their aggregation window left the sample.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    /// Sets every soft-error variance to `o`.
    pub fn with_o_diag(mut self, o: f64) -> Self {
        self.o_diag = vec![o; self.rows.len()];
        self
    }

    /// `M_a x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.dot(x)).collect()
    }

    /// Constraint residual `y~ - M_a x`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.value - r.dot(x)).collect()
    }
}

/// Builds the aggregation rows for every observed aggregate in the
/// panel. Aggregates whose window reaches before period 1, or whose
/// cells are not missing, are dropped and counted rather than truncated.
pub fn build_ma(panel: &MixedPanel, scheme: AggregationScheme) -> Result<ConstraintSet> {
    let n = panel.n();
    let upos = panel.u_positions();
    let dim = upos.iter().flatten().count();
    let span = scheme.span();
    let weights = scheme.weights();

    let mut aggs: Vec<_> = panel.aggregates().to_vec();
    aggs.sort_by_key(|a| (a.period, a.var));

    let mut rows = Vec::new();
    let mut dropped = 0usize;
    'agg: for a in &aggs {
        if a.period < span {
            dropped += 1;
            continue;
        }
        let mut cols = Vec::with_capacity(span);
        let mut w = Vec::with_capacity(span);
        // iterate oldest lag first so columns come out increasing
        for l in (0..span).rev() {
            let t = a.period - 1 - l; // 0-based period
            match upos[t * n + a.var] {
                Some(pos) => {
                    cols.push(pos);
                    w.push(weights[l]);
                }
                None => {
                    dropped += 1;
                    continue 'agg;
                }
            }
        }
        rows.push(ConstraintRow {
            cols,
            weights: w,
            value: a.value,
        });
    }
    let k = rows.len();
    Ok(ConstraintSet {
        dim,
        rows,
        o_diag: vec![DEFAULT_O_DIAG; k],
        dropped,
    })
}

fn standard_normal_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Reusable unconstrained sampler: the precision is factorized once and
/// each draw costs two triangular solves.
pub struct PrecisionSampler {
    chol: CholeskyFactor,
    mean: Vec<f64>,
}

impl PrecisionSampler {
    pub fn new(cg: &ConditionalGaussian) -> Result<Self> {
        let chol = band_cholesky(&cg.precision)?;
        let mean = solve_spd(&chol, &cg.scaled_mean_rhs)?;
        Ok(PrecisionSampler { chol, mean })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn chol(&self) -> &CholeskyFactor {
        &self.chol
    }

    /// One draw `mu + C^-T x`, `x ~ N(0, I)`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let x = standard_normal_vec(self.mean.len(), rng);
        let v = solve_upper(&self.chol, &x).expect("factor and rhs sizes agree");
        self.mean.iter().zip(v).map(|(m, v)| m + v).collect()
    }
}

/// Hard-constraint sampler: unconstrained draw plus a kriging
/// correction. The draw-independent pieces (`V = K^-1 M_a'` and the
/// factor of `W = M_a V`) are precomputed.
pub struct HardSampler {
    base: PrecisionSampler,
    rows: Vec<ConstraintRow>,
    v: DMatrix<f64>,
    w_chol: Option<Cholesky<f64, Dyn>>,
}

impl HardSampler {
    pub fn new(cg: &ConditionalGaussian, cs: &ConstraintSet) -> Result<Self> {
        if cs.k() > 0 && cs.dim() != cg.dim() {
            return Err(MfError::DimensionMismatch(format!(
                "constraints index a vector of length {}, conditional has {}",
                cs.dim(),
                cg.dim()
            )));
        }
        let base = PrecisionSampler::new(cg)?;
        let nu = cg.dim();
        let k = cs.k();
        let mut v = DMatrix::zeros(nu, k);
        for (j, row) in cs.rows().iter().enumerate() {
            let mut e = vec![0.0; nu];
            for (&c, &w) in row.cols.iter().zip(&row.weights) {
                e[c] = w;
            }
            let col = solve_spd(&base.chol, &e)?;
            v.column_mut(j).copy_from_slice(&col);
        }
        let mut w = DMatrix::zeros(k, k);
        for (i, row) in cs.rows().iter().enumerate() {
            for j in 0..k {
                let mut acc = 0.0;
                for (&c, &wt) in row.cols.iter().zip(&row.weights) {
                    acc += wt * v[(c, j)];
                }
                w[(i, j)] = acc;
            }
        }
        let w_chol = if k > 0 {
            let chol = Cholesky::new(w).ok_or(MfError::SingularW)?;
            // redundant constraints leave W positive semi-definite; the
            // factorization can still succeed on rounding noise, so
            // check the pivots
            let diag = chol.l_dirty();
            let max_piv = (0..k).map(|i| diag[(i, i)]).fold(0.0f64, f64::max);
            if (0..k).any(|i| diag[(i, i)] <= 1e-6 * max_piv) {
                return Err(MfError::SingularW);
            }
            Some(chol)
        } else {
            None
        };
        Ok(HardSampler {
            base,
            rows: cs.rows().to_vec(),
            v,
            w_chol,
        })
    }

    /// One draw satisfying `M_a Y^u = y~` exactly.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut z = self.base.draw(rng);
        let Some(w_chol) = &self.w_chol else {
            return z;
        };
        let r = DVector::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|row| row.value - row.dot(&z)),
        );
        let s = w_chol.solve(&r);
        let corr = &self.v * s;
        for (zi, ci) in z.iter_mut().zip(corr.iter()) {
            *zi += ci;
        }
        z
    }

    /// Mean of the constrained distribution.
    pub fn constrained_mean(&self) -> Vec<f64> {
        let mut m = self.base.mean().to_vec();
        let Some(w_chol) = &self.w_chol else {
            return m;
        };
        let r = DVector::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|row| row.value - row.dot(&m)),
        );
        let s = w_chol.solve(&r);
        let corr = &self.v * s;
        for (mi, ci) in m.iter_mut().zip(corr.iter()) {
            *mi += ci;
        }
        m
    }
}

/// Soft-constraint sampler from `N(mu_bar, K_bar^-1)` with
/// `K_bar = M_a' O^-1 M_a + K`, still banded.
pub struct SoftSampler {
    inner: PrecisionSampler,
}

impl SoftSampler {
    pub fn new(cg: &ConditionalGaussian, cs: &ConstraintSet) -> Result<Self> {
        if cs.k() > 0 && cs.dim() != cg.dim() {
            return Err(MfError::DimensionMismatch(format!(
                "constraints index a vector of length {}, conditional has {}",
                cs.dim(),
                cg.dim()
            )));
        }
        for (i, &o) in cs.o_diag().iter().enumerate() {
            if !(o > 0.0) {
                return Err(MfError::ConfigError(format!(
                    "soft-error variance for constraint {} must be positive, got {}",
                    i + 1,
                    o
                )));
            }
        }
        let nu = cg.dim();
        let mut bw = cg.precision.lower_bw().max(cg.precision.upper_bw());
        for row in cs.rows() {
            if let (Some(&lo), Some(&hi)) = (row.cols.first(), row.cols.last()) {
                bw = bw.max(hi - lo);
            }
        }
        let mut k_bar = BandMatrix::zeros(nu, nu, bw, bw);
        for j in 0..nu {
            let (lo, hi) = cg.precision.col_range(j);
            for i in lo..hi {
                let v = cg.precision.get(i, j);
                if v != 0.0 {
                    k_bar.set(i, j, v);
                }
            }
        }
        let mut rhs = cg.scaled_mean_rhs.clone();
        for (row, &o) in cs.rows().iter().zip(cs.o_diag()) {
            let oinv = 1.0 / o;
            for (&ci, &wi) in row.cols.iter().zip(&row.weights) {
                for (&cj, &wj) in row.cols.iter().zip(&row.weights) {
                    k_bar.add_to(ci, cj, wi * wj * oinv);
                }
                rhs[ci] += wi * oinv * row.value;
            }
        }
        let cg_bar = ConditionalGaussian {
            precision: k_bar,
            scaled_mean_rhs: rhs,
        };
        Ok(SoftSampler {
            inner: PrecisionSampler::new(&cg_bar)?,
        })
    }

    pub fn mean(&self) -> &[f64] {
        self.inner.mean()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.inner.draw(rng)
    }
}

/// One unconstrained draw of `Y^u`.
pub fn sample_unconstrained<R: Rng + ?Sized>(
    cg: &ConditionalGaussian,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(PrecisionSampler::new(cg)?.draw(rng))
}

/// One draw of `Y^u` under the hard constraints `y~ = M_a Y^u`.
pub fn sample_hard<R: Rng + ?Sized>(
    cg: &ConditionalGaussian,
    cs: &ConstraintSet,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(HardSampler::new(cg, cs)?.draw(rng))
}

/// One draw of `Y^u` under the soft constraints with error variances
/// `diag(O)`.
pub fn sample_soft<R: Rng + ?Sized>(
    cg: &ConditionalGaussian,
    cs: &ConstraintSet,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(SoftSampler::new(cg, cs)?.draw(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_conditional, Aggregate, MixedPanel, VarParams};
    use nalgebra::{dmatrix, DMatrix, DVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn quarterly_panel(t_len: usize, scheme: AggregationScheme) -> MixedPanel {
        let obs = DMatrix::from_fn(t_len, 1, |t, _| (t as f64 * 0.31).sin() * 0.1);
        let aggs: Vec<Aggregate> = (1..=t_len)
            .filter(|t| t % 3 == 0)
            .map(|t| Aggregate {
                var: 0,
                period: t,
                value: 0.05 * t as f64,
            })
            .collect();
        let _ = scheme;
        MixedPanel::from_blocks(t_len, &obs, 1, aggs).unwrap()
    }

    #[test]
    fn triangle_weights_are_mariano_murasawa() {
        let w = AggregationScheme::LogDiffTriangle.weights();
        assert_eq!(w.len(), 5);
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((w[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((w[2] - 1.0).abs() < 1e-15);
        assert!((w[3] - 2.0 / 3.0).abs() < 1e-15);
        assert!((w[4] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn level_average_rows() {
        // one quarterly variable, T = 6, aggregates at t = 3 and t = 6
        let panel = quarterly_panel(6, AggregationScheme::LevelAverage);
        let cs = build_ma(&panel, AggregationScheme::LevelAverage).unwrap();
        assert_eq!(cs.k(), 2);
        assert_eq!(cs.dropped(), 0);
        assert_eq!(cs.rows()[0].cols, vec![0, 1, 2]);
        assert_eq!(cs.rows()[1].cols, vec![3, 4, 5]);
        for row in cs.rows() {
            for &w in &row.weights {
                assert!((w - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn triangle_single_row() {
        let obs = DMatrix::from_element(5, 1, 0.0);
        let panel = MixedPanel::from_blocks(
            5,
            &obs,
            1,
            vec![Aggregate {
                var: 0,
                period: 5,
                value: 1.0,
            }],
        )
        .unwrap();
        let cs = build_ma(&panel, AggregationScheme::LogDiffTriangle).unwrap();
        assert_eq!(cs.k(), 1);
        assert_eq!(cs.rows()[0].cols, vec![0, 1, 2, 3, 4]);
        let w = &cs.rows()[0].weights;
        let expect = [1.0 / 3.0, 2.0 / 3.0, 1.0, 2.0 / 3.0, 1.0 / 3.0];
        for (a, b) in w.iter().zip(expect.iter().rev()) {
            // oldest lag first: symmetric weights, so order matches either way
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn presample_window_is_dropped() {
        let obs = DMatrix::from_element(6, 1, 0.0);
        let panel = MixedPanel::from_blocks(
            6,
            &obs,
            1,
            vec![
                Aggregate {
                    var: 0,
                    period: 4,
                    value: 1.0,
                },
                Aggregate {
                    var: 0,
                    period: 6,
                    value: 2.0,
                },
            ],
        )
        .unwrap();
        let cs = build_ma(&panel, AggregationScheme::LogDiffTriangle).unwrap();
        assert_eq!(cs.k(), 1);
        assert_eq!(cs.dropped(), 1);
        assert_eq!(cs.rows()[0].value, 2.0);
    }

    fn small_conditional() -> (crate::model::ConditionalGaussian, ConstraintSet) {
        let panel = quarterly_panel(12, AggregationScheme::LevelAverage);
        let params = VarParams::constant(
            DVector::from_column_slice(&[0.01, 0.01]),
            vec![dmatrix![0.5, 0.1; 0.05, 0.4]],
            dmatrix![0.01, 0.002; 0.002, 0.01],
        )
        .unwrap();
        let cg = build_conditional(&params, &panel).unwrap();
        let cs = build_ma(&panel, AggregationScheme::LevelAverage).unwrap();
        (cg, cs)
    }

    #[test]
    fn identity_precision_draw_is_raw_normal() {
        let n = 5;
        let cg = crate::model::ConditionalGaussian {
            precision: BandMatrix::identity(n),
            scaled_mean_rhs: vec![0.0; n],
        };
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let draw = sample_unconstrained(&cg, &mut rng).unwrap();
        let mut rng2 = ChaCha12Rng::seed_from_u64(42);
        let raw = standard_normal_vec(n, &mut rng2);
        assert_eq!(draw, raw);
    }

    #[test]
    fn same_seed_same_draws() {
        let (cg, cs) = small_conditional();
        for _ in 0..2 {
            let mut a = ChaCha12Rng::seed_from_u64(9);
            let mut b = ChaCha12Rng::seed_from_u64(9);
            assert_eq!(
                sample_unconstrained(&cg, &mut a).unwrap(),
                sample_unconstrained(&cg, &mut b).unwrap()
            );
            let mut a = ChaCha12Rng::seed_from_u64(10);
            let mut b = ChaCha12Rng::seed_from_u64(10);
            assert_eq!(
                sample_hard(&cg, &cs, &mut a).unwrap(),
                sample_hard(&cg, &cs, &mut b).unwrap()
            );
            let mut a = ChaCha12Rng::seed_from_u64(11);
            let mut b = ChaCha12Rng::seed_from_u64(11);
            assert_eq!(
                sample_soft(&cg, &cs, &mut a).unwrap(),
                sample_soft(&cg, &cs, &mut b).unwrap()
            );
        }
    }

    #[test]
    fn empty_constraints_match_unconstrained() {
        let (cg, _) = small_conditional();
        let cs = ConstraintSet::empty(cg.dim());
        let mut a = ChaCha12Rng::seed_from_u64(3);
        let mut b = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..5 {
            assert_eq!(
                sample_hard(&cg, &cs, &mut a).unwrap(),
                sample_unconstrained(&cg, &mut b).unwrap()
            );
        }
    }

    #[test]
    fn hard_draws_satisfy_constraints_exactly() {
        let (cg, cs) = small_conditional();
        let sampler = HardSampler::new(&cg, &cs).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        for _ in 0..200 {
            let y = sampler.draw(&mut rng);
            let res = cs.residual(&y);
            let max = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
            assert!(max <= 1e-8, "constraint residual {max:e}");
        }
    }

    #[test]
    fn redundant_constraints_are_singular() {
        let (cg, mut cs) = small_conditional();
        let dup = cs.rows[0].clone();
        cs.rows.push(dup);
        cs.o_diag.push(DEFAULT_O_DIAG);
        match HardSampler::new(&cg, &cs) {
            Err(MfError::SingularW) => {}
            other => panic!("expected SingularW, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn soft_residual_scales_with_sqrt_o() {
        let (cg, cs) = small_conditional();
        let mut rms = Vec::new();
        for &o in &[1e-2, 1e-4, 1e-6] {
            let cs_o = cs.clone().with_o_diag(o);
            let sampler = SoftSampler::new(&cg, &cs_o).unwrap();
            let mut rng = ChaCha12Rng::seed_from_u64(500);
            let mut acc = 0.0;
            let mut cnt = 0usize;
            for _ in 0..400 {
                let y = sampler.draw(&mut rng);
                for r in cs_o.residual(&y) {
                    acc += r * r;
                    cnt += 1;
                }
            }
            rms.push((acc / cnt as f64).sqrt());
        }
        // o scales by 1e-2 per step, so rms should scale by ~1e-1
        for w in rms.windows(2) {
            let ratio = w[1] / w[0];
            assert!(
                (0.04..0.25).contains(&ratio),
                "rms ratio {ratio} outside sqrt scaling"
            );
        }
    }

    #[test]
    fn soft_rejects_nonpositive_o() {
        let (cg, cs) = small_conditional();
        let cs = cs.with_o_diag(0.0);
        assert!(matches!(
            SoftSampler::new(&cg, &cs),
            Err(MfError::ConfigError(_))
        ));
    }
}
