use serde::{Deserialize, Serialize};

use crate::linalg::{norm2, DenseMatrix};

/// Slope of the least-squares fit of `log‖e_t‖` below which a trace counts as decaying.
pub const DECAY_SLOPE: f64 = -1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceState {
    pub e_curr: Vec<f64>,
    pub e_prev: Vec<f64>,
    /// Smoothed error `ē`. Starts at zero so the first EMA update yields `(1−β₁)e₀`.
    pub ema: Vec<f64>,
}

impl RecurrenceState {
    /// Matched start for both forms: `e₋₁ = e₀`, `ē₋₁ = 0`.
    pub fn new(e0: Vec<f64>) -> Self {
        let ema = vec![0.0; e0.len()];
        RecurrenceState { e_prev: e0.clone(), e_curr: e0, ema }
    }

    pub fn dim(&self) -> usize {
        self.e_curr.len()
    }
}

fn check_dims(state: &RecurrenceState, s: &DenseMatrix) {
    let m = state.dim();
    assert!(
        s.rows() == m && s.cols() == m && state.e_prev.len() == m && state.ema.len() == m,
        "state of dimension {m} does not match S ({}x{})",
        s.rows(),
        s.cols()
    );
}

/// `e_{t+1} = ((1+β₁)I + η(1−β₁)S)e_t − β₁e_{t−1}`.
pub fn step_second_order(state: &RecurrenceState, s: &DenseMatrix, beta1: f64, eta: f64) -> RecurrenceState {
    check_dims(state, s);
    let se = s.matvec(&state.e_curr);
    let c = eta * (1.0 - beta1);
    let next = (0..state.dim())
        .map(|i| (1.0 + beta1) * state.e_curr[i] + c * se[i] - beta1 * state.e_prev[i])
        .collect();
    RecurrenceState { e_prev: state.e_curr.clone(), e_curr: next, ema: state.ema.clone() }
}

/// `ē_t = β₁ē_{t−1} + (1−β₁)e_t`, then `e_{t+1} = e_t + ηSē_t`.
pub fn step_first_order_ema(state: &RecurrenceState, s: &DenseMatrix, beta1: f64, eta: f64) -> RecurrenceState {
    check_dims(state, s);
    let ema: Vec<f64> = state.ema.iter().zip(&state.e_curr).map(|(m, e)| beta1 * m + (1.0 - beta1) * e).collect();
    let sm = s.matvec(&ema);
    let next = state.e_curr.iter().zip(&sm).map(|(e, d)| e + eta * d).collect();
    RecurrenceState { e_prev: state.e_curr.clone(), e_curr: next, ema }
}

/// Runs the second-order recurrence and returns `‖e_t‖` for `t = 0..=steps`.
///
/// Stops early once the norm leaves `[lo, hi]` when bounds are given.
pub fn simulate_norms(
    s: &DenseMatrix,
    beta1: f64,
    eta: f64,
    e0: Vec<f64>,
    steps: usize,
    bounds: Option<(f64, f64)>,
) -> Vec<f64> {
    let mut state = RecurrenceState::new(e0);
    let mut norms = Vec::with_capacity(steps.min(1 << 20) + 1);
    norms.push(norm2(&state.e_curr));
    for _ in 0..steps {
        state = step_second_order(&state, s, beta1, eta);
        let n = norm2(&state.e_curr);
        norms.push(n);
        if let Some((lo, hi)) = bounds {
            if !(n >= lo && n <= hi) {
                break;
            }
        }
    }
    norms
}

/// Least-squares slope of `log‖e_t‖` against `t` over the last half of a trace.
///
/// Zero norms are floored at the smallest positive double.
pub fn decay_slope(norms: &[f64]) -> f64 {
    let start = norms.len() / 2;
    let tail = &norms[start..];
    if tail.len() < 2 {
        return 0.0;
    }
    let n = tail.len() as f64;
    let ys: Vec<f64> = tail.iter().map(|x| x.max(f64::MIN_POSITIVE).ln()).collect();
    let tbar = (start as f64) + (n - 1.0) / 2.0;
    let ybar = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, y) in ys.iter().enumerate() {
        let dt = (start + k) as f64 - tbar;
        sxy += dt * (y - ybar);
        sxx += dt * dt;
    }
    sxy / sxx
}

pub fn decays(norms: &[f64]) -> bool {
    decay_slope(norms) < DECAY_SLOPE
}
