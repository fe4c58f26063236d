use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub eta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    /// Critic learning rate 1e-4 with β₁ = 0.9, β₂ = 0.999, ε = 1e-4.
    fn default() -> Self {
        AdamConfig { eta: 1e-4, beta1: 0.9, beta2: 0.999, eps: 1e-4 }
    }
}

impl AdamConfig {
    pub fn with_eta(self, eta: f64) -> Self {
        AdamConfig { eta, ..self }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.eta > 0.0
            && self.eta.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps > 0.0;
        if ok {
            Ok(())
        } else {
            Err(crate::LabError::Config(format!("invalid Adam configuration {self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub t: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(p: usize) -> Self {
        AdamState { t: 0, m: vec![0.0; p], v: vec![0.0; p] }
    }

    /// Diagonal of `D = Diag(1/(√v̂ + ε))` for the current bias-corrected `v̂`.
    ///
    /// Before the first step `v̂ = 0`, so every entry is `1/ε`.
    pub fn preconditioner(&self, cfg: &AdamConfig) -> Vec<f64> {
        let bc2 = if self.t == 0 { 1.0 } else { 1.0 - cfg.beta2.powf(self.t as f64) };
        self.v.iter().map(|&v| 1.0 / ((v / bc2).sqrt() + cfg.eps)).collect()
    }
}

/// Advances the moments with `g` and returns `u = m̂ / (√v̂ + ε)`.
///
/// The caller applies `θ ← θ − η·u`.
pub fn adam_direction(state: &mut AdamState, g: &[f64], cfg: &AdamConfig) -> Vec<f64> {
    assert_eq!(g.len(), state.m.len(), "gradient length mismatch");
    state.t += 1;
    let t = state.t as f64;
    let bc1 = 1.0 - cfg.beta1.powf(t);
    let bc2 = 1.0 - cfg.beta2.powf(t);
    let mut u = Vec::with_capacity(g.len());
    for ((m, v), &gi) in state.m.iter_mut().zip(state.v.iter_mut()).zip(g) {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * gi;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * gi * gi;
        u.push((*m / bc1) / ((*v / bc2).sqrt() + cfg.eps));
    }
    u
}

/// Plain Adam update `θ − η·u`.
pub fn adam_step(params: &[f64], g: &[f64], state: &mut AdamState, cfg: &AdamConfig) -> Vec<f64> {
    let u = adam_direction(state, g, cfg);
    params.iter().zip(&u).map(|(p, ui)| p - cfg.eta * ui).collect()
}
