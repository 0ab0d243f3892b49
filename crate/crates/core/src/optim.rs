//! Second-moment exponential scaling (SMES).
//!
//! One update rule covers SGD-shaped and Adam-shaped steps:
//!
//! ```text
//! m_t = β₁ m_{t-1} + (1 - β₁) g_t          m̂_t = m_t / (1 - β₁ᵗ)
//! v_t = β₂ v_{t-1} + (1 - β₂) g_t²         v̂_t = v_t / (1 - β₂ᵗ)
//! θ_t = θ_{t-1} - η m̂_t / (v̂_tᵅ + ε)
//! ```
//!
//! `α = 0` makes the denominator `1 + ε` (the second moment is inert), `α = 0.5`
//! is Adam. For `α < 0`, `v̂` is floored at `v_floor` before exponentiation so
//! that `0ᵅ` never appears.
//!
//! Note that the `α = 0` limit keeps the bias-corrected EMA in the numerator; it
//! is not heavy-ball SGD (`m = μ m + g`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayMode {
    /// `g ← g + λ θ` before the moments are updated.
    CoupledL2,
    /// `θ ← θ - η λ θ_prev` after the adaptive step.
    Decoupled,
    None,
}

impl DecayMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DecayMode::CoupledL2 => "coupled_l2",
            DecayMode::Decoupled => "decoupled",
            DecayMode::None => "none",
        }
    }
}

impl fmt::Display for DecayMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecayMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coupled_l2" | "coupled" => Ok(DecayMode::CoupledL2),
            "decoupled" => Ok(DecayMode::Decoupled),
            "none" => Ok(DecayMode::None),
            other => Err(Error::invalid(format!("unknown decay mode `{other}`"))),
        }
    }
}

pub const DEFAULT_V_FLOOR: f64 = 1e-12;

/// SMES hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmesConfig {
    /// Learning rate η.
    pub eta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Balance coefficient: exponent applied to `v̂`.
    pub alpha: f64,
    pub weight_decay: f64,
    pub decay_mode: DecayMode,
    /// Global-norm clipping threshold, applied by [`smes_step_group`].
    pub clip_threshold: Option<f64>,
    /// Lower bound on `v̂` when `alpha < 0`.
    pub v_floor: f64,
}

impl Default for SmesConfig {
    /// The Adam preset.
    fn default() -> Self {
        SmesConfig {
            eta: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            alpha: 0.5,
            weight_decay: 0.0,
            decay_mode: DecayMode::CoupledL2,
            clip_threshold: None,
            v_floor: DEFAULT_V_FLOOR,
        }
    }
}

impl SmesConfig {
    /// SGD-shaped limit (`α = 0`) with η = 0.1 and coupled weight decay 5e-4.
    pub fn sgd() -> Self {
        SmesConfig {
            eta: 0.1,
            alpha: 0.0,
            weight_decay: 5e-4,
            decay_mode: DecayMode::CoupledL2,
            ..SmesConfig::default()
        }
    }

    /// Adam (`α = 0.5`, β₁ = 0.9, β₂ = 0.999, ε = 1e-8, η = 0.001).
    pub fn adam() -> Self {
        SmesConfig::default()
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(Error::invalid(msg)) };
        check(self.eta > 0.0 && self.eta.is_finite(), "eta must be > 0")?;
        check((0.0..1.0).contains(&self.beta1), "beta1 must be in [0, 1)")?;
        check((0.0..1.0).contains(&self.beta2), "beta2 must be in [0, 1)")?;
        check(self.epsilon > 0.0 && self.epsilon.is_finite(), "epsilon must be > 0")?;
        check(self.alpha.is_finite(), "alpha must be finite")?;
        check(
            self.weight_decay >= 0.0 && self.weight_decay.is_finite(),
            "weight_decay must be >= 0",
        )?;
        check(self.v_floor > 0.0 && self.v_floor.is_finite(), "v_floor must be > 0")?;
        if let Some(c) = self.clip_threshold {
            check(c > 0.0 && c.is_finite(), "clip_threshold must be > 0")?;
        }
        Ok(())
    }

    /// `v̂ᵅ + ε` for a single element.
    ///
    /// `powf` already gives `0ᵅ = 0` for `α > 0` and `x⁰ = 1` for every `x`.
    #[inline]
    pub fn denominator(&self, v_hat: f64) -> f64 {
        let base = if self.alpha < 0.0 {
            v_hat.max(self.v_floor)
        } else {
            v_hat
        };
        base.powf(self.alpha) + self.epsilon
    }
}

/// Looks up a named preset (`sgd` or `adam`).
pub fn preset(name: &str) -> Result<SmesConfig> {
    match name {
        "sgd" => Ok(SmesConfig::sgd()),
        "adam" => Ok(SmesConfig::adam()),
        other => Err(Error::invalid(format!("unknown preset `{other}`"))),
    }
}

/// Moment accumulators for one parameter tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmesState {
    pub shape: Vec<usize>,
    pub m: Tensor,
    pub v: Tensor,
    pub t: u64,
}

impl SmesState {
    pub fn new(param_shape: &[usize]) -> Self {
        SmesState {
            shape: param_shape.to_vec(),
            m: Tensor::zeros(param_shape),
            v: Tensor::zeros(param_shape),
            t: 0,
        }
    }

    /// `(m̂, v̂)` for the current step count. Both are zero before the first step.
    pub fn corrected(&self, cfg: &SmesConfig) -> (Tensor, Tensor) {
        if self.t == 0 {
            return (self.m.clone(), self.v.clone());
        }
        let c1 = 1.0 - powi_u64(cfg.beta1, self.t);
        let c2 = 1.0 - powi_u64(cfg.beta2, self.t);
        (self.m.map(|m| m / c1), self.v.map(|v| v / c2))
    }

    /// Single-line JSON checkpoint of `(shape, m, v, t)`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state serializes")
    }

    pub fn from_json(line: &str) -> Result<Self> {
        let state: SmesState = serde_json::from_str(line).map_err(|e| Error::CorruptRecord {
            offset: e.column().saturating_sub(1) as u64,
            message: e.to_string(),
        })?;
        if state.m.shape() != state.shape.as_slice() || state.v.shape() != state.shape.as_slice() {
            return Err(Error::ShapeMismatch {
                left: state.shape.clone(),
                right: state.m.shape().to_vec(),
            });
        }
        Ok(state)
    }
}

/// `base^t` with an integer exponent that may exceed `i32`.
fn powi_u64(base: f64, t: u64) -> f64 {
    match i32::try_from(t) {
        Ok(t) => base.powi(t),
        Err(_) => base.powf(t as f64),
    }
}

/// Joint L2 norm of a gradient list.
pub fn global_norm<'a>(grads: impl IntoIterator<Item = &'a Tensor>) -> f64 {
    grads.into_iter().map(Tensor::norm_sq).sum::<f64>().sqrt()
}

/// Rescales `grads` so that their joint L2 norm is at most `threshold`.
pub fn clip_global_norm(grads: &[Tensor], threshold: f64) -> Vec<Tensor> {
    let mut out = grads.to_vec();
    clip_global_norm_in_place(&mut out, threshold);
    out
}

pub fn clip_global_norm_in_place(grads: &mut [Tensor], threshold: f64) {
    debug_assert!(threshold > 0.0);
    let norm = global_norm(grads.iter());
    if norm > threshold {
        let scale = threshold / norm;
        for g in grads {
            for x in g.data_mut() {
                *x *= scale;
            }
        }
    }
}

/// Applies one SMES update to `param`.
///
/// On a non-finite result the moments and step count have already advanced
/// but `param` is left untouched.
pub fn smes_step(param: &mut Tensor, grad: &Tensor, state: &mut SmesState, cfg: &SmesConfig) -> Result<()> {
    step_indexed(0, param, grad, state, cfg)
}

fn step_indexed(
    index: usize,
    param: &mut Tensor,
    grad: &Tensor,
    state: &mut SmesState,
    cfg: &SmesConfig,
) -> Result<()> {
    param.check_same_shape(grad)?;
    if state.shape.as_slice() != param.shape() {
        return Err(Error::ShapeMismatch {
            left: param.shape().to_vec(),
            right: state.shape.clone(),
        });
    }
    if !grad.is_finite() {
        return Err(Error::NonFiniteGradient { index });
    }

    state.t += 1;
    let c1 = 1.0 - powi_u64(cfg.beta1, state.t);
    let c2 = 1.0 - powi_u64(cfg.beta2, state.t);
    let coupled = cfg.decay_mode == DecayMode::CoupledL2 && cfg.weight_decay != 0.0;
    let decoupled = cfg.decay_mode == DecayMode::Decoupled && cfg.weight_decay != 0.0;

    let mut updated = Vec::with_capacity(param.len());
    let m = state.m.data_mut();
    let v = state.v.data_mut();
    for (i, (&p, &g_raw)) in param.data().iter().zip(grad.data()).enumerate() {
        let g = if coupled { g_raw + cfg.weight_decay * p } else { g_raw };
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        let mut next = p - cfg.eta * m_hat / cfg.denominator(v_hat);
        if decoupled {
            next -= cfg.eta * cfg.weight_decay * p;
        }
        updated.push(next);
    }
    if updated.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteParameter { index });
    }
    param.data_mut().copy_from_slice(&updated);
    Ok(())
}

/// Clips (if configured) and then steps every `(param, grad, state)` triple.
///
/// Clipping sees the raw gradients of the whole group, before weight decay.
pub fn smes_step_group<'a>(
    params: impl IntoIterator<Item = &'a mut Tensor>,
    grads: &[Tensor],
    states: &mut [SmesState],
    cfg: &SmesConfig,
) -> Result<()> {
    let params: Vec<&mut Tensor> = params.into_iter().collect();
    if params.len() != grads.len() || grads.len() != states.len() {
        return Err(Error::invalid(format!(
            "group lists misaligned: {} params, {} grads, {} states",
            params.len(),
            grads.len(),
            states.len()
        )));
    }
    let clipped;
    let grads = match cfg.clip_threshold {
        Some(threshold) => {
            if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
                return Err(Error::NonFiniteGradient { index });
            }
            clipped = clip_global_norm(grads, threshold);
            &clipped[..]
        }
        None => grads,
    };
    for (index, ((param, grad), state)) in params.into_iter().zip(grads).zip(states.iter_mut()).enumerate() {
        step_indexed(index, param, grad, state, cfg)?;
    }
    Ok(())
}

/// Owns one state per parameter tensor and steps them together.
#[derive(Debug, Clone)]
pub struct Smes {
    pub config: SmesConfig,
    pub states: Vec<SmesState>,
}

impl Smes {
    pub fn new<'a>(config: SmesConfig, params: impl IntoIterator<Item = &'a Tensor>) -> Result<Self> {
        config.validate()?;
        let states = params.into_iter().map(|p| SmesState::new(p.shape())).collect();
        Ok(Smes { config, states })
    }

    pub fn step<'a>(&mut self, params: impl IntoIterator<Item = &'a mut Tensor>, grads: &[Tensor]) -> Result<()> {
        smes_step_group(params, grads, &mut self.states, &self.config)
    }
}
