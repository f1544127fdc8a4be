use alloc::vec::Vec;

use super::{GradientSet, MlpParams};
use crate::error::invalid;
use crate::{Error, Result};

/// Adam hyperparameters. Defaults follow the usual adversarial-training setting.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 2e-4,
            beta1: 0.5,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(invalid("adam: need lr > 0, beta1/beta2 in [0, 1), epsilon > 0"))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Moments {
    weight_m: Vec<f64>,
    weight_v: Vec<f64>,
    bias_m: Vec<f64>,
    bias_v: Vec<f64>,
}

/// First/second moment estimates for every parameter, plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    config: AdamConfig,
    moments: Vec<Moments>,
    step: u64,
}

impl OptimizerState {
    pub fn new(params: &MlpParams, config: AdamConfig) -> Self {
        let moments = params
            .layers()
            .iter()
            .map(|l| {
                let w = l.weight().as_slice().len();
                let b = l.bias().len();
                Moments {
                    weight_m: alloc::vec![0.0; w],
                    weight_v: alloc::vec![0.0; w],
                    bias_m: alloc::vec![0.0; b],
                    bias_v: alloc::vec![0.0; b],
                }
            })
            .collect();
        Self {
            config,
            moments,
            step: 0,
        }
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    fn congruent(&self, params: &MlpParams) -> bool {
        self.moments.len() == params.layers().len()
            && self
                .moments
                .iter()
                .zip(params.layers())
                .all(|(m, l)| m.weight_m.len() == l.weight().as_slice().len() && m.bias_m.len() == l.bias().len())
    }
}

#[inline]
fn update(p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], c: &AdamConfig, bc1: f64, bc2: f64) {
    for i in 0..p.len() {
        m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
        v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        p[i] -= c.learning_rate * m_hat / (libm::sqrt(v_hat) + c.epsilon);
    }
}

/// Applies one bias-corrected Adam update in place.
///
/// Non-finite gradients are rejected before anything is modified.
pub fn adam_step(params: &mut MlpParams, grads: &GradientSet, state: &mut OptimizerState) -> Result<()> {
    if !grads.is_congruent(params) || !state.congruent(params) {
        return Err(Error::Shape {
            context: "optimizer layers",
            expected: params.layers().len(),
            found: grads.layers.len(),
        });
    }
    if let Some(layer) = grads
        .layers
        .iter()
        .position(|g| !g.d_weight.is_finite() || g.d_bias.iter().any(|b| !b.is_finite()))
    {
        return Err(Error::NonFiniteGradient { layer });
    }
    state.step += 1;
    let c = state.config;
    let t = state.step as f64;
    let bc1 = 1.0 - libm::pow(c.beta1, t);
    let bc2 = 1.0 - libm::pow(c.beta2, t);
    for ((layer, g), m) in params
        .layers_mut()
        .iter_mut()
        .zip(&grads.layers)
        .zip(&mut state.moments)
    {
        update(
            layer.weight_mut(),
            g.d_weight.as_slice(),
            &mut m.weight_m,
            &mut m.weight_v,
            &c,
            bc1,
            bc2,
        );
        update(layer.bias_mut(), &g.d_bias, &mut m.bias_m, &mut m.bias_v, &c, bc1, bc2);
    }
    Ok(())
}
