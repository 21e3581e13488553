//! The simulation smoother draws from the same constrained law as the
//! precision-based hard sampler; their long-run averages agree.
//!
//! Run with: cargo run --example kalman_baseline

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use mfvar::constraint::{build_ma, AggregationScheme, HardSampler};
use mfvar::kalman::{simulation_smoother, to_state_space};
use mfvar::model::{build_conditional, Aggregate, MixedPanel, VarParams};

fn main() {
    let b0 = DVector::from_vec(vec![0.05, 0.0]);
    let lag = DMatrix::from_row_slice(2, 2, &[0.4, 0.15, 0.1, 0.5]);
    let sigma = DMatrix::from_row_slice(2, 2, &[0.03, 0.005, 0.005, 0.04]);
    let params = VarParams::constant(b0, vec![lag], sigma).unwrap();

    let t_len = 18;
    let obs = DMatrix::from_fn(t_len, 1, |t, _| 0.1 * (t as f64 * 0.3).cos());
    let aggs: Vec<Aggregate> = (1..=t_len)
        .filter(|t| t % 3 == 0)
        .map(|t| Aggregate { var: 0, period: t, value: 0.05 })
        .collect();
    let panel = MixedPanel::from_blocks(t_len, &obs, 1, aggs).unwrap();
    let scheme = AggregationScheme::LevelAverage;

    // precision route: exact constrained mean in closed form
    let cg = build_conditional(&params, &panel).unwrap();
    let cs = build_ma(&panel, scheme).unwrap();
    let hard_mean = HardSampler::new(&cg, &cs).unwrap().constrained_mean();

    // state-space route: average many smoother draws
    let ssf = to_state_space(&params, &panel, scheme, None).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let n_draws = 20_000;
    let mut acc = vec![0.0; hard_mean.len()];
    for _ in 0..n_draws {
        let d = simulation_smoother(&ssf, &mut rng).unwrap();
        for (a, v) in acc.iter_mut().zip(&d) {
            *a += v;
        }
    }
    for a in &mut acc {
        *a /= n_draws as f64;
    }

    let max_diff = acc
        .iter()
        .zip(&hard_mean)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("missing cells: {}", hard_mean.len());
    println!("max |smoother average - hard mean| over {n_draws} draws: {max_diff:.4e}");
    for (k, (a, b)) in acc.iter().zip(&hard_mean).enumerate().take(6) {
        println!("cell {k}: smoother {a:+.5}  precision {b:+.5}");
    }
}
