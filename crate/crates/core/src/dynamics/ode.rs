use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{dot, DenseMatrix};
use crate::network::ParamLayout;
use crate::optim::{budgeted_scale, orth_gradient, reference_step, OrthConfig};

/// A smooth loss with its gradient.
pub trait Objective {
    fn loss(&self, w: &[f64]) -> f64;
    fn grad(&self, w: &[f64]) -> Vec<f64>;
}

/// `L(w) = ½wᵀAw − bᵀw`, with `A` symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadratic {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
}

impl Objective for Quadratic {
    fn loss(&self, w: &[f64]) -> f64 {
        0.5 * dot(w, &self.a.matvec(w)) - dot(&self.b, w)
    }

    fn grad(&self, w: &[f64]) -> Vec<f64> {
        self.a.matvec(w).iter().zip(&self.b).map(|(aw, b)| aw - b).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeState {
    pub w: Vec<f64>,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub time: f64,
}

impl OdeState {
    pub fn new(w: Vec<f64>) -> Self {
        let n = w.len();
        OdeState { w, m: vec![0.0; n], v: vec![0.0; n], time: 0.0 }
    }

    fn axpy(&self, h: f64, d: &OdeDerivative) -> OdeState {
        let add = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a + h * b).collect();
        OdeState { w: add(&self.w, &d.dw), m: add(&self.m, &d.dm), v: add(&self.v, &d.dv), time: self.time + h }
    }

    fn is_finite(&self) -> bool {
        self.w.iter().chain(&self.m).chain(&self.v).all(|x| x.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeDerivative {
    pub dw: Vec<f64>,
    pub dm: Vec<f64>,
    pub dv: Vec<f64>,
}

/// Moment rates and `ε` of the continuous-time model (no bias correction).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

/// `D(v) = diag(1/(√v + ε))`; tiny negative `v` from integration error is read as zero.
pub fn precond(v: &[f64], eps: f64) -> Vec<f64> {
    v.iter().map(|x| 1.0 / (x.max(0.0).sqrt() + eps)).collect()
}

fn moments(state: &OdeState, g: &[f64], cfg: &OdeConfig) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let d = precond(&state.v, cfg.eps);
    let u: Vec<f64> = d.iter().zip(&state.m).map(|(d, m)| d * m).collect();
    let dm = g.iter().zip(&state.m).map(|(g, m)| cfg.beta1 * (g - m)).collect();
    let dv = g.iter().zip(&state.v).map(|(g, v)| cfg.beta2 * (g * g - v)).collect();
    (u, dm, dv)
}

/// `ẇ = −D(v)m`, `ṁ = β₁(g − m)`, `v̇ = β₂(g² − v)`.
pub fn adam_ode_rhs(state: &OdeState, obj: &dyn Objective, cfg: &OdeConfig) -> OdeDerivative {
    let g = obj.grad(&state.w);
    let (u, dm, dv) = moments(state, &g, cfg);
    OdeDerivative { dw: u.iter().map(|x| -x).collect(), dm, dv }
}

/// `δ` for the continuous-time AdamO flow, using the same per-block budgeted map as the discrete step.
pub fn orth_correction(
    w: &[f64],
    g: &[f64],
    u: &[f64],
    orth: &OrthConfig,
    layout: &ParamLayout,
) -> Result<Vec<f64>> {
    let mut delta = vec![0.0; w.len()];
    if orth.kappa_orth == 0.0 {
        return Ok(delta);
    }
    for b in orth.blocks(layout)? {
        let wb = layout.matrix(w, b);
        let gb = layout.matrix(g, b);
        let ub = layout.matrix(u, b);
        let d0 = reference_step(&ub, &orth_gradient(&wb), orth.kappa_orth, orth.eps_r);
        let step = budgeted_scale(&gb, &ub, &d0, orth.tau);
        delta[b.range()].copy_from_slice(step.delta.as_slice());
    }
    Ok(delta)
}

/// `ẇ = −u − δ` with the Adam moment dynamics unchanged.
pub fn adamo_ode_rhs(
    state: &OdeState,
    obj: &dyn Objective,
    cfg: &OdeConfig,
    orth: &OrthConfig,
    layout: &ParamLayout,
) -> Result<OdeDerivative> {
    let g = obj.grad(&state.w);
    let (u, dm, dv) = moments(state, &g, cfg);
    let delta = orth_correction(&state.w, &g, &u, orth, layout)?;
    let dw = u.iter().zip(&delta).map(|(u, d)| -u - d).collect();
    Ok(OdeDerivative { dw, dm, dv })
}

fn require_beta1(beta1: f64) -> Result<()> {
    if beta1 > 0.0 {
        Ok(())
    } else {
        Err(LabError::Config(format!("the Hamiltonian needs beta1 > 0, got {beta1}")))
    }
}

/// `H = L(w) + (1/(2β₁))⟨m, D(v)m⟩`.
pub fn hamiltonian(state: &OdeState, obj: &dyn Objective, beta1: f64, eps: f64) -> Result<f64> {
    require_beta1(beta1)?;
    let d = precond(&state.v, eps);
    let kinetic: f64 = state.m.iter().zip(&d).map(|(m, d)| m * m * d).sum();
    Ok(obj.loss(&state.w) + kinetic / (2.0 * beta1))
}

/// `(1 − β₂/(4β₁))⟨m, D(v)m⟩ + (β₂/(4β₁))⟨m²/(v^{3/2} + ε), g²⟩`.
pub fn dissipation(state: &OdeState, g: &[f64], beta1: f64, beta2: f64, eps: f64) -> Result<f64> {
    require_beta1(beta1)?;
    let c = beta2 / (4.0 * beta1);
    let mut first = 0.0;
    let mut cross = 0.0;
    for ((m, v), g) in state.m.iter().zip(&state.v).zip(g) {
        let v = v.max(0.0);
        let m2 = m * m;
        first += m2 / (v.sqrt() + eps);
        cross += m2 * g * g / (v.powf(1.5) + eps);
    }
    Ok((1.0 - c) * first + c * cross)
}

/// `τ Σ_b (⟨g_b, u_b⟩)₊` over the constrained blocks, or `τ(⟨g, u⟩)₊` without a layout.
pub fn budget_term(g: &[f64], u: &[f64], tau: f64, blocks: Option<(&OrthConfig, &ParamLayout)>) -> Result<f64> {
    match blocks {
        None => Ok(tau * dot(g, u).max(0.0)),
        Some((orth, layout)) => Ok(orth
            .blocks(layout)?
            .into_iter()
            .map(|b| tau * dot(&g[b.range()], &u[b.range()]).max(0.0))
            .sum()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianPoint {
    pub time: f64,
    pub h: f64,
    pub dissipation: f64,
    pub budget_term: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianTrace {
    pub points: Vec<HamiltonianPoint>,
}

impl HamiltonianTrace {
    /// Largest increase of `H` per unit time between consecutive points.
    pub fn max_rise_rate(&self) -> f64 {
        self.points
            .windows(2)
            .map(|p| (p[1].h - p[0].h) / (p[1].time - p[0].time))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One classical RK4 step.
pub fn rk4_step<F>(rhs: &F, state: &OdeState, dt: f64) -> Result<OdeState>
where
    F: Fn(&OdeState) -> Result<OdeDerivative>,
{
    let k1 = rhs(state)?;
    let k2 = rhs(&state.axpy(dt / 2.0, &k1))?;
    let k3 = rhs(&state.axpy(dt / 2.0, &k2))?;
    let k4 = rhs(&state.axpy(dt, &k3))?;
    let combine = |a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
        (0..a.len()).map(|i| (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]) / 6.0).collect()
    };
    let slope = OdeDerivative {
        dw: combine(&k1.dw, &k2.dw, &k3.dw, &k4.dw),
        dm: combine(&k1.dm, &k2.dm, &k3.dm, &k4.dm),
        dv: combine(&k1.dv, &k2.dv, &k3.dv, &k4.dv),
    };
    Ok(state.axpy(dt, &slope))
}

/// Integrates `steps` RK4 steps, calling `sink` on the initial state and after every step.
pub fn rk4_integrate<F, S>(rhs: F, state: OdeState, dt: f64, steps: usize, mut sink: S) -> Result<OdeState>
where
    F: Fn(&OdeState) -> Result<OdeDerivative>,
    S: FnMut(&OdeState) -> Result<()>,
{
    if !(dt > 0.0) {
        return Err(LabError::Config(format!("dt must be positive, got {dt}")));
    }
    let mut state = state;
    sink(&state)?;
    for _ in 0..steps {
        state = rk4_step(&rhs, &state, dt)?;
        if !state.is_finite() {
            return Err(LabError::NonFiniteState { time: state.time });
        }
        sink(&state)?;
    }
    Ok(state)
}

/// Integrates the Adam (`orth = None`) or AdamO flow and records `H`, `Δ` and the budget term.
pub fn integrate_hamiltonian(
    obj: &dyn Objective,
    cfg: &OdeConfig,
    orth: Option<(&OrthConfig, &ParamLayout)>,
    state: OdeState,
    dt: f64,
    steps: usize,
) -> Result<(OdeState, HamiltonianTrace)> {
    let mut trace = HamiltonianTrace::default();
    let rhs = |s: &OdeState| match orth {
        None => Ok(adam_ode_rhs(s, obj, cfg)),
        Some((o, layout)) => adamo_ode_rhs(s, obj, cfg, o, layout),
    };
    let tau = orth.map_or(0.0, |(o, _)| if o.kappa_orth == 0.0 { 0.0 } else { o.tau });
    let sink = |s: &OdeState| -> Result<()> {
        let g = obj.grad(&s.w);
        let d = precond(&s.v, cfg.eps);
        let u: Vec<f64> = d.iter().zip(&s.m).map(|(d, m)| d * m).collect();
        trace.points.push(HamiltonianPoint {
            time: s.time,
            h: hamiltonian(s, obj, cfg.beta1, cfg.eps)?,
            dissipation: dissipation(s, &g, cfg.beta1, cfg.beta2, cfg.eps)?,
            budget_term: budget_term(&g, &u, tau, orth)?,
        });
        Ok(())
    };
    let end = rk4_integrate(rhs, state, dt, steps, sink)?;
    Ok((end, trace))
}

/// `H(0) + τ∫(⟨g,u⟩)₊ − H(t) − ∫Δ` with trapezoidal integrals; the budget term is pre-multiplied by `τ`.
pub fn budget_integral_check(trace: &HamiltonianTrace) -> f64 {
    let p = &trace.points;
    let (Some(first), Some(last)) = (p.first(), p.last()) else {
        return 0.0;
    };
    let mut budget = 0.0;
    let mut diss = 0.0;
    for w in p.windows(2) {
        let dt = w[1].time - w[0].time;
        budget += 0.5 * dt * (w[0].budget_term + w[1].budget_term);
        diss += 0.5 * dt * (w[0].dissipation + w[1].dissipation);
    }
    first.h + budget - last.h - diss
}
