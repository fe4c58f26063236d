use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::features::FeatureMap;
use super::layout::ParamLayout;
use crate::error::{LabError, Result};
use crate::linalg::{dot, spectral_norm, DenseMatrix};
use crate::rng;

/// Architecture of a critic, everything except its parameter values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Architecture {
    Linear,
    /// tanh hidden layers of the given widths followed by a scalar linear head.
    Mlp { hidden: Vec<usize> },
}

/// A Q-function `Q_θ(s, a)` over a fixed feature map.
///
/// Parameters live in one flat vector described by [`ParamLayout`], so the
/// optimizer and the target network can treat every critic uniformly.
#[derive(Clone, Debug, PartialEq)]
pub struct Critic {
    features: FeatureMap,
    arch: Architecture,
    layout: ParamLayout,
    params: Vec<f64>,
}

impl Critic {
    /// Linear critic `Q(x) = ⟨θ, φ(x)⟩` with `θ = 0`.
    pub fn linear(features: FeatureMap) -> Self {
        let p = features.dim();
        Critic {
            layout: ParamLayout::sequential(&[("theta", p, 1, false)]),
            params: vec![0.0; p],
            features,
            arch: Architecture::Linear,
        }
    }

    /// tanh MLP with `W_ℓ ~ N(0, 1/fan_in)`, zero biases, and head `w ~ N(0, 1/width)`.
    pub fn mlp(features: FeatureMap, hidden: &[usize], seed: u64) -> Result<Self> {
        if hidden.is_empty() || hidden.contains(&0) {
            return Err(LabError::Config("an MLP critic needs at least one nonempty hidden layer".into()));
        }
        let layout = mlp_layout(features.dim(), hidden);
        let mut r = rng::seeded(seed);
        let mut params = vec![0.0; layout.total()];
        for b in layout.blocks() {
            let fan_in = b.cols as f64;
            if b.matrix || b.id == "w" {
                for x in &mut params[b.range()] {
                    *x = rng::normal(&mut r) / fan_in.sqrt();
                }
            }
        }
        Ok(Critic { features, arch: Architecture::Mlp { hidden: hidden.to_vec() }, layout, params })
    }

    pub fn from_parts(features: FeatureMap, arch: Architecture, params: Vec<f64>) -> Result<Self> {
        let layout = Self::layout_for(&features, &arch);
        if params.len() != layout.total() {
            return Err(LabError::Dimension(format!("{} parameters, architecture needs {}", params.len(), layout.total())));
        }
        if let Some(index) = params.iter().position(|x| !x.is_finite()) {
            return Err(LabError::NonFinite { index });
        }
        Ok(Critic { features, arch, layout, params })
    }

    /// Parameter layout an architecture induces over a feature map.
    pub fn layout_for(features: &FeatureMap, arch: &Architecture) -> ParamLayout {
        match arch {
            Architecture::Linear => ParamLayout::sequential(&[("theta", features.dim(), 1, false)]),
            Architecture::Mlp { hidden } => mlp_layout(features.dim(), hidden),
        }
    }

    pub fn features(&self) -> &FeatureMap {
        &self.features
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.params.len());
        self.params.copy_from_slice(params);
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params_by_block(&self) -> BTreeMap<String, Vec<f64>> {
        self.layout.unflatten(&self.params).expect("layout matches params")
    }

    pub fn q_value(&self, s: &[f64], a: usize) -> f64 {
        self.q_value_at(&self.params, s, a)
    }

    /// Q evaluated with an arbitrary parameter vector of this layout (e.g. a target network).
    pub fn q_value_at(&self, params: &[f64], s: &[f64], a: usize) -> f64 {
        let phi = self.features.embed(s, a);
        match &self.arch {
            Architecture::Linear => dot(params, &phi),
            Architecture::Mlp { .. } => self.mlp_forward(params, &phi).0,
        }
    }

    pub fn jacobian_column(&self, s: &[f64], a: usize) -> Vec<f64> {
        self.jacobian_column_at(&self.params, s, a)
    }

    /// `∂Q/∂θ` flattened in layout order.
    pub fn jacobian_column_at(&self, params: &[f64], s: &[f64], a: usize) -> Vec<f64> {
        let phi = self.features.embed(s, a);
        match &self.arch {
            Architecture::Linear => phi,
            Architecture::Mlp { .. } => self.mlp_backward(params, &phi),
        }
    }

    /// `P × M` matrix with column `i` equal to the Jacobian at input `i`.
    pub fn batch_jacobian<'a>(&self, inputs: impl IntoIterator<Item = (&'a [f64], usize)>) -> DenseMatrix {
        self.batch_jacobian_at(&self.params, inputs)
    }

    pub fn batch_jacobian_at<'a>(
        &self,
        params: &[f64],
        inputs: impl IntoIterator<Item = (&'a [f64], usize)>,
    ) -> DenseMatrix {
        let cols: Vec<Vec<f64>> = inputs.into_iter().map(|(s, a)| self.jacobian_column_at(params, s, a)).collect();
        if cols.is_empty() {
            return DenseMatrix::zeros(self.param_count(), 0);
        }
        DenseMatrix::from_columns(&cols)
    }

    /// Divides every hidden weight matrix by `max(1, ‖W_ℓ‖₂)`.
    pub fn project_spectral(&mut self) -> Result<()> {
        let blocks: Vec<_> = self.layout.matrix_blocks().cloned().collect();
        for b in blocks {
            let w = self.layout.matrix(&self.params, &b);
            let norm = spectral_norm(&w)?;
            if norm > 1.0 {
                self.params[b.range()].iter_mut().for_each(|x| *x /= norm);
            }
        }
        Ok(())
    }

    fn hidden_widths(&self) -> &[usize] {
        match &self.arch {
            Architecture::Mlp { hidden } => hidden,
            Architecture::Linear => &[],
        }
    }

    /// Returns `(Q, activations h₀..h_{L−1})`.
    fn mlp_forward(&self, params: &[f64], phi: &[f64]) -> (f64, Vec<Vec<f64>>) {
        let widths = self.hidden_widths();
        let blocks = self.layout.blocks();
        let mut acts = Vec::with_capacity(widths.len() + 1);
        acts.push(phi.to_vec());
        for l in 0..widths.len() {
            let (wb, bb) = (&blocks[2 * l], &blocks[2 * l + 1]);
            let w = &params[wb.range()];
            let b = &params[bb.range()];
            let h_prev = acts.last().expect("input layer");
            let h: Vec<f64> = (0..wb.rows)
                .map(|i| (dot(&w[i * wb.cols..(i + 1) * wb.cols], h_prev) + b[i]).tanh())
                .collect();
            acts.push(h);
        }
        let head = &blocks[2 * widths.len()];
        let bias = &blocks[2 * widths.len() + 1];
        let q = dot(&params[head.range()], acts.last().expect("hidden layer")) + params[bias.offset];
        (q, acts)
    }

    fn mlp_backward(&self, params: &[f64], phi: &[f64]) -> Vec<f64> {
        let (_, acts) = self.mlp_forward(params, phi);
        let widths = self.hidden_widths();
        let blocks = self.layout.blocks();
        let n_hidden = widths.len();
        let mut grad = vec![0.0; self.layout.total()];
        let head = &blocks[2 * n_hidden];
        grad[head.range()].copy_from_slice(&acts[n_hidden]);
        grad[blocks[2 * n_hidden + 1].offset] = 1.0;

        // delta_ℓ = ∂Q/∂u_ℓ for pre-activation u_ℓ
        let w_head = &params[head.range()];
        let mut delta: Vec<f64> = w_head
            .iter()
            .zip(&acts[n_hidden])
            .map(|(w, h)| w * (1.0 - h * h))
            .collect();
        for l in (0..n_hidden).rev() {
            let (wb, bb) = (&blocks[2 * l], &blocks[2 * l + 1]);
            let h_prev = &acts[l];
            for i in 0..wb.rows {
                for j in 0..wb.cols {
                    grad[wb.offset + i * wb.cols + j] = delta[i] * h_prev[j];
                }
            }
            grad[bb.range()].copy_from_slice(&delta);
            if l > 0 {
                let w = &params[wb.range()];
                delta = (0..wb.cols)
                    .map(|j| {
                        let back: f64 = (0..wb.rows).map(|i| w[i * wb.cols + j] * delta[i]).sum();
                        back * (1.0 - h_prev[j] * h_prev[j])
                    })
                    .collect();
            }
        }
        grad
    }
}

fn mlp_layout(d0: usize, hidden: &[usize]) -> ParamLayout {
    let mut names = Vec::new();
    let mut prev = d0;
    for (l, &h) in hidden.iter().enumerate() {
        names.push((format!("W{}", l + 1), h, prev, true));
        names.push((format!("b{}", l + 1), h, 1, false));
        prev = h;
    }
    names.push(("w".to_string(), 1, prev, false));
    names.push(("bL".to_string(), 1, 1, false));
    let shapes: Vec<(&str, usize, usize, bool)> =
        names.iter().map(|(n, r, c, m)| (n.as_str(), *r, *c, *m)).collect();
    ParamLayout::sequential(&shapes)
}

/// Upper bound on `‖∇_θ Q‖₂` for a tanh-type network with `‖W_ℓ‖₂ ≤ 1`,
/// `‖w‖₂ ≤ s`, `‖b_ℓ‖₂ ≤ b_bias` and `‖φ(x)‖₂ ≤ r`.
///
/// `H₀ = R`, `H_ℓ = κ_σ(H_{ℓ−1} + B)`,
/// `C² = H_{L−1}² + 1 + s² Σ_{ℓ=1}^{L−1} κ_σ^{2(L−ℓ)} (H_{ℓ−1}² + 1)`.
pub fn grad_norm_bound(r: f64, kappa_sigma: f64, s: f64, b_bias: f64, layers: usize) -> f64 {
    assert!(layers >= 2, "need at least one hidden layer");
    let mut h = vec![r];
    for _ in 1..layers {
        let prev = *h.last().expect("nonempty");
        h.push(kappa_sigma * (prev + b_bias));
    }
    let top = h[layers - 1];
    let mut sum = 0.0;
    for l in 1..layers {
        sum += kappa_sigma.powi(2 * (layers - l) as i32) * (h[l - 1] * h[l - 1] + 1.0);
    }
    (top * top + 1.0 + s * s * sum).sqrt()
}
