//! Precision-based samplers for state-space mixed-frequency VARs.
//!
//! A VAR estimated at the highest observed frequency treats the
//! high-frequency values of low-frequency variables (e.g. monthly GDP)
//! as missing data. Conditional on the observed cells and the VAR
//! parameters, the missing cells are jointly Gaussian with a banded
//! precision matrix, so they can be drawn in one step by banded Cholesky
//! factorization and triangular solves instead of Kalman filtering.
//!
//! The crate provides:
//!
//! - [`band`]: the banded matrix kernel (storage, products, Cholesky,
//!   triangular solves);
//! - [`model`]: the stacked system and the conditional Gaussian of the
//!   missing observations;
//! - [`constraint`]: inter-temporal aggregation constraints and the
//!   unconstrained / hard-constraint / soft-constraint samplers;
//! - [`gibbs`]: the full posterior simulator alternating the missing-data
//!   draw with a normal-inverse-Wishart draw of the VAR parameters;
//! - [`kalman`]: a simulation-smoother baseline targeting the same
//!   distribution, used for benchmarking;
//! - [`bn`]: the multivariate Beveridge-Nelson trend-cycle decomposition;
//! - [`dgp`], [`bench`]: simulation study and benchmark harness;
//! - [`io`]: CSV panel / config / draw-store file formats for the CLI.
//!
//! See the `examples/` directory for one runnable example per capability,
//! and the `mfvar` binary for the command-line surface.

pub mod band;
pub mod bench;
pub mod bn;
pub mod constraint;
pub mod dgp;
pub mod error;
pub mod gibbs;
pub mod io;
pub mod kalman;
pub mod model;

pub use band::{band_cholesky, band_matmul, solve_lower, solve_spd, solve_upper, BandMatrix, CholeskyFactor};
pub use bench::{run_benchmark, BenchmarkGrid, BenchmarkResult};
pub use bn::{bn_cycle, CompanionForm};
pub use constraint::{
    build_ma, sample_hard, sample_soft, sample_unconstrained, AggregationScheme, ConstraintSet,
};
pub use dgp::{simulate_dgp, DgpSpec};
pub use error::{MfError, Result};
pub use gibbs::{
    draw_var_params, posterior_summary, run_gibbs, DrawStore, GibbsConfig, NiwPrior, YuMethod,
};
pub use kalman::{simulation_smoother, to_state_space, StateSpaceForm};
pub use model::{
    build_conditional, build_selection, build_stacked_h, ConditionalGaussian, MixedPanel,
    SelectionMatrix, SigmaSpec, VarParams,
};
