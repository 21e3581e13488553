//! Kalman-filter simulation smoother baseline.
//!
//! The mixed-frequency VAR is cast as a linear Gaussian state-space model
//! with companion state `x_t = (y_t', ..., y_{t-s+1}')'`, where
//! `s = max(p, span)` so that both the VAR transition and the
//! aggregation rows only reference the current state. Missing
//! observations are handled by deleting rows of the time-varying
//! observation matrix; aggregates enter as (near-)exact observation
//! rows. A forward filter / backward sampling pass draws the joint state
//! path, from which the missing cells are extracted.
//!
//! This targets the same conditional distribution as the precision-based
//! samplers and serves as the benchmark comparator; it is deliberately a
//! straightforward implementation, not a speed-tuned one.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::constraint::AggregationScheme;
use crate::error::{MfError, Result};
use crate::model::{MixedPanel, SigmaSpec, VarParams};

/// Diffuse-prior variance on the initial state.
///
/// Together with [`OBS_NOISE_FLOOR`] this sets the filter's dynamic
/// range (14 orders of magnitude); pushing either end further makes the
/// covariance recursion numerically unreliable in double precision.
const DIFFUSE_VAR: f64 = 1e4;
/// Observation-noise floor keeping innovation variances positive when
/// rows are exact.
const OBS_NOISE_FLOOR: f64 = 1e-10;

/// Observation block for one filter step: `d = H x + noise`.
#[derive(Debug, Clone)]
struct ObsBlock {
    h: DMatrix<f64>,
    d: DVector<f64>,
    r_diag: DVector<f64>,
}

/// State-space form of the mixed-frequency VAR.
pub struct StateSpaceForm {
    n: usize,
    p: usize,
    s: usize,
    t_len: usize,
    transition: DMatrix<f64>,
    intercept: DVector<f64>,
    sigma: SigmaSpec,
    /// One observation block per filter step; step 0 sits at period `p`
    /// (1-based) and bundles everything observed in periods `1..=p`.
    obs: Vec<ObsBlock>,
    /// Missing cells `(t, i)` of the panel, in stacking order.
    u_cells: Vec<(usize, usize)>,
}

impl StateSpaceForm {
    /// Companion state dimension `n * s`.
    pub fn state_dim(&self) -> usize {
        self.n * self.s
    }

    /// Number of state blocks carried, `max(p, span)`.
    pub fn n_blocks(&self) -> usize {
        self.s
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    /// Observation row count at filter step `j`.
    pub fn obs_rows(&self, j: usize) -> usize {
        self.obs[j].h.nrows()
    }

    fn steps(&self) -> usize {
        self.obs.len()
    }

    fn sigma_at_step(&self, j: usize) -> &DMatrix<f64> {
        // step j >= 1 carries the VAR equation for 0-based period p-1+j
        match &self.sigma {
            SigmaSpec::Constant(s) => s,
            SigmaSpec::TimeVarying(seq) => &seq[j - 1],
        }
    }
}

/// Builds the companion-form state space for the panel, expressing the
/// aggregation constraints as observation rows over current and lagged
/// state blocks. `agg_noise` is the aggregate-row observation variance;
/// `None` treats aggregates as exact (hard) rows at the numeric floor.
pub fn to_state_space(
    params: &VarParams,
    panel: &MixedPanel,
    scheme: AggregationScheme,
    agg_noise: Option<f64>,
) -> Result<StateSpaceForm> {
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
    let span = scheme.span();
    let s = p.max(span);
    let dim = n * s;
    let agg_var = agg_noise.unwrap_or(OBS_NOISE_FLOOR).max(OBS_NOISE_FLOOR);

    // companion transition
    let mut f = DMatrix::zeros(dim, dim);
    for (j, b) in params.lags().iter().enumerate() {
        f.view_mut((0, j * n), (n, n)).copy_from(b);
    }
    for b in 1..s {
        for i in 0..n {
            f[(b * n + i, (b - 1) * n + i)] = 1.0;
        }
    }
    let mut intercept = DVector::zeros(dim);
    intercept.rows_mut(0, n).copy_from(params.b0());

    let weights = scheme.weights();
    // q: 0-based period of the initial state (the last conditioning period)
    let q = p - 1;
    let steps = t_len - q;

    let mut obs = Vec::with_capacity(steps);
    for j in 0..steps {
        let t = q + j; // 0-based period of this step
        let mut rows: Vec<(Vec<(usize, f64)>, f64, f64)> = Vec::new();
        if j == 0 {
            // pin every observed cell of periods 0..=q
            for tau in 0..=q {
                let block = q - tau;
                for i in 0..n {
                    if panel.is_observed(tau, i) {
                        rows.push((
                            vec![(block * n + i, 1.0)],
                            panel.value(tau, i),
                            OBS_NOISE_FLOOR,
                        ));
                    }
                }
            }
        } else {
            for i in 0..n {
                if panel.is_observed(t, i) {
                    rows.push((vec![(i, 1.0)], panel.value(t, i), OBS_NOISE_FLOOR));
                }
            }
        }
        // aggregates whose window ends here (step 0 collects all due by q)
        for a in panel.aggregates() {
            let te = a.period - 1;
            let due = if j == 0 { te <= q } else { te == t };
            if !due || te + 1 < span {
                continue;
            }
            let mut entries = Vec::with_capacity(span);
            let mut ok = true;
            for (l, &w) in weights.iter().enumerate() {
                let tau = te - l;
                let block = t - tau; // lag within this step's state
                if block >= s {
                    ok = false;
                    break;
                }
                entries.push((block * n + a.var, w));
            }
            if ok {
                rows.push((entries, a.value, agg_var));
            }
        }
        let m = rows.len();
        let mut h = DMatrix::zeros(m, dim);
        let mut d = DVector::zeros(m);
        let mut r_diag = DVector::zeros(m);
        for (r, (entries, value, var)) in rows.into_iter().enumerate() {
            for (c, w) in entries {
                h[(r, c)] += w;
            }
            d[r] = value;
            r_diag[r] = var;
        }
        obs.push(ObsBlock { h, d, r_diag });
    }

    Ok(StateSpaceForm {
        n,
        p,
        s,
        t_len,
        transition: f,
        intercept,
        sigma: params.sigma().clone(),
        obs,
        u_cells: panel.u_cells(),
    })
}

fn symmetrize(p: &mut DMatrix<f64>) {
    let pt = p.transpose();
    *p += pt;
    *p *= 0.5;
}

/// Draw from N(mean, cov) via a symmetric eigendecomposition, clipping
/// tiny negative eigenvalues to zero.
fn draw_gaussian<R: Rng + ?Sized>(
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    rng: &mut R,
) -> DVector<f64> {
    let dim = mean.len();
    let eig = cov.clone().symmetric_eigen();
    let mut x = mean.clone();
    for k in 0..dim {
        let lam = eig.eigenvalues[k].max(0.0);
        let z: f64 = rng.sample(StandardNormal);
        let scale = lam.sqrt() * z;
        x += eig.eigenvectors.column(k) * scale;
    }
    x
}

/// Solve `P_aa X = B` robustly for a PSD `P_aa` (pseudo-inverse through
/// eigenvalue clipping when a Cholesky fails).
fn psd_solve(p_aa: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(ch) = p_aa.clone().cholesky() {
        return ch.solve(b);
    }
    let eig = p_aa.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let tol = lmax * 1e-14;
    let mut out = DMatrix::zeros(b.nrows(), b.ncols());
    for k in 0..p_aa.nrows() {
        let lam = eig.eigenvalues[k];
        if lam > tol {
            let u = eig.eigenvectors.column(k);
            let proj = u.transpose() * b;
            out += (u * proj) / lam;
        }
    }
    out
}

/// Filtered moments of the state path, ready for backward sampling.
pub struct FilteredStates {
    means: Vec<DVector<f64>>,
    covs: Vec<DMatrix<f64>>,
    log_likelihood: f64,
}

impl FilteredStates {
    /// Innovation-form log-likelihood accumulated over all observation
    /// rows (includes the diffuse-prior contribution of the first step).
    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }
}

/// Forward Kalman filter. Covariances are re-symmetrized after every
/// step and updates use the Joseph form.
pub fn filter(ssf: &StateSpaceForm) -> Result<FilteredStates> {
    let dim = ssf.state_dim();
    let n = ssf.n;
    let steps = ssf.steps();
    let mut means = Vec::with_capacity(steps);
    let mut covs = Vec::with_capacity(steps);
    let mut loglik = 0.0;

    let mut m = DVector::zeros(dim);
    let mut p_mat = DMatrix::identity(dim, dim) * DIFFUSE_VAR;

    for j in 0..steps {
        if j > 0 {
            // predict
            m = &ssf.transition * &m + &ssf.intercept;
            p_mat = &ssf.transition * &p_mat * ssf.transition.transpose();
            let sig = ssf.sigma_at_step(j);
            p_mat.view_mut((0, 0), (n, n)).zip_apply(sig, |a, b| *a += b);
            symmetrize(&mut p_mat);
        }
        // observation rows are processed one scalar at a time: the
        // block innovation covariance mixes exact rows (noise 1e-12)
        // with diffuse variances (1e6) and is hopeless to factor, while
        // each scalar innovation variance is bounded below by its own
        // observation noise
        let ob = &ssf.obs[j];
        for r in 0..ob.h.nrows() {
            let h_r = ob.h.row(r).transpose();
            let ph = &p_mat * &h_r;
            let s = (h_r.dot(&ph) + ob.r_diag[r]).max(ob.r_diag[r]);
            let innov = ob.d[r] - h_r.dot(&m);
            if !s.is_finite() || !innov.is_finite() {
                return Err(MfError::FilterDivergence(j));
            }
            loglik += -0.5 * (2.0 * std::f64::consts::PI).ln()
                - 0.5 * s.ln()
                - 0.5 * innov * innov / s;
            // Joseph update with scalar gain
            let gain = &ph / s;
            m += &gain * innov;
            let ikh = DMatrix::identity(dim, dim) - &gain * h_r.transpose();
            p_mat = &ikh * &p_mat * ikh.transpose()
                + (&gain * gain.transpose()) * ob.r_diag[r];
            symmetrize(&mut p_mat);
        }
        means.push(m.clone());
        covs.push(p_mat.clone());
    }
    Ok(FilteredStates {
        means,
        covs,
        log_likelihood: loglik,
    })
}

impl FilteredStates {
    /// Backward-sampling pass: one joint draw of the state path given all
    /// observations. Returns the missing cells in stacking order.
    pub fn draw_missing<R: Rng + ?Sized>(
        &self,
        ssf: &StateSpaceForm,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let steps = self.means.len();
        let n = ssf.n;
        let s = ssf.s;
        let p = ssf.p;
        let q = p - 1;
        let upper = (s - 1) * n;

        // drawn y_t for real periods, filled back-to-front
        let mut y_path: Vec<Option<DVector<f64>>> = vec![None; ssf.t_len];

        let mut state = draw_gaussian(&self.means[steps - 1], &self.covs[steps - 1], rng);
        y_path[ssf.t_len - 1] = Some(state.rows(0, n).into_owned());

        for j in (0..steps - 1).rev() {
            let m_t = &self.means[j];
            let p_t = &self.covs[j];
            // blocks 0..s-2 of x_t equal blocks 1..s-1 of the drawn x_{t+1}
            let known = state.rows(n, upper).into_owned();
            let p_aa = p_t.view((0, 0), (upper, upper)).into_owned();
            let p_az = p_t.view((0, upper), (upper, n)).into_owned();
            let diff = &known - m_t.rows(0, upper);
            let w = psd_solve(&p_aa, &p_az); // P_aa^-1 P_az
            let mut z_mean = m_t.rows(upper, n).into_owned() + w.transpose() * &diff;
            let mut z_cov =
                p_t.view((upper, upper), (n, n)).into_owned() - p_az.transpose() * &w;
            symmetrize(&mut z_cov);
            // when p == s the next period's VAR equation also loads on z
            if p == s {
                let sig = ssf.sigma_at_step(j + 1);
                let b_last = ssf.transition.view((0, (s - 1) * n), (n, n)).into_owned();
                let next_top = state.rows(0, n).into_owned();
                let mut pred = ssf.intercept.rows(0, n).into_owned();
                for blk in 0..s - 1 {
                    let b = ssf.transition.view((0, blk * n), (n, n)).into_owned();
                    pred += &b * known.rows(blk * n, n).into_owned();
                }
                let resid = next_top - pred - &b_last * &z_mean;
                let s_z = &b_last * &z_cov * b_last.transpose() + sig;
                let gain = &z_cov * b_last.transpose() * psd_inverse(&s_z);
                z_mean += &gain * resid;
                z_cov -= &gain * &b_last * &z_cov;
                symmetrize(&mut z_cov);
            }
            let z = draw_gaussian(&z_mean, &z_cov, rng);
            let mut new_state = DVector::zeros(s * n);
            new_state.rows_mut(0, upper).copy_from(&known);
            new_state.rows_mut(upper, n).copy_from(&z);
            state = new_state;
            let t = q + j;
            y_path[t] = Some(state.rows(0, n).into_owned());
        }
        // initial state carries periods 0..q in its lagged blocks
        for tau in 0..q {
            let block = q - tau;
            y_path[tau] = Some(state.rows(block * n, n).into_owned());
        }

        let mut out = Vec::with_capacity(ssf.u_cells.len());
        for &(t, i) in &ssf.u_cells {
            let y = y_path[t]
                .as_ref()
                .ok_or(MfError::FilterDivergence(t))?;
            out.push(y[i]);
        }
        Ok(out)
    }
}

fn psd_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    psd_solve(m, &DMatrix::identity(m.nrows(), m.ncols()))
}

/// One joint draw of the missing observations via forward filtering and
/// backward sampling.
pub fn simulation_smoother<R: Rng + ?Sized>(
    ssf: &StateSpaceForm,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let f = filter(ssf)?;
    f.draw_missing(ssf, rng)
}
