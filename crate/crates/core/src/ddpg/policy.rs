//! Versioned JSON policy files and the trained-policy controller.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::nn::{Activation, Layer, Mlp};
use super::normalize::StateNormalizer;
use super::DdpgError;
use crate::env::{Controller, ControllerError, StepContext};

pub const POLICY_FORMAT: &str = "ecofollower-policy";
pub const POLICY_VERSION: u32 = 1;

/// A trained actor plus the observation/action mappings it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub actor: Mlp<f64>,
    pub normalizer: StateNormalizer,
    /// Actor output 1.0 maps to this acceleration, m/s².
    pub action_scale: f64,
}

#[derive(Serialize, Deserialize)]
struct LayerRecord {
    inputs: usize,
    outputs: usize,
    activation: Activation,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PolicyFile {
    format: String,
    version: u32,
    normalizer: StateNormalizer,
    action_scale: f64,
    layers: Vec<LayerRecord>,
}

impl Policy {
    pub fn to_json(&self) -> String {
        let file = PolicyFile {
            format: POLICY_FORMAT.into(),
            version: POLICY_VERSION,
            normalizer: self.normalizer,
            action_scale: self.action_scale,
            layers: self
                .actor
                .layers
                .iter()
                .map(|l| LayerRecord {
                    inputs: l.inputs,
                    outputs: l.outputs,
                    activation: l.activation,
                    weights: l.weights.clone(),
                    biases: l.biases.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("policy serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DdpgError> {
        let file: PolicyFile =
            serde_json::from_str(text).map_err(|e| DdpgError::Load(e.to_string()))?;
        if file.format != POLICY_FORMAT {
            return Err(DdpgError::Load(format!(
                "unexpected format tag `{}`",
                file.format
            )));
        }
        if file.version != POLICY_VERSION {
            return Err(DdpgError::Load(format!(
                "unsupported policy version {} (expected {POLICY_VERSION})",
                file.version
            )));
        }
        if file.layers.is_empty() {
            return Err(DdpgError::Shape("policy has no layers".into()));
        }
        let mut layers = Vec::with_capacity(file.layers.len());
        for (k, l) in file.layers.into_iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs {
                return Err(DdpgError::Shape(format!(
                    "layer {k}: {}×{} needs {} weights and {} biases, found {} and {}",
                    l.outputs,
                    l.inputs,
                    l.inputs * l.outputs,
                    l.outputs,
                    l.weights.len(),
                    l.biases.len()
                )));
            }
            if let Some(prev) = layers.last().map(|p: &Layer<f64>| p.outputs) {
                if prev != l.inputs {
                    return Err(DdpgError::Shape(format!(
                        "layer {k} expects {} inputs but previous layer emits {prev}",
                        l.inputs
                    )));
                }
            }
            layers.push(Layer {
                inputs: l.inputs,
                outputs: l.outputs,
                weights: l.weights,
                biases: l.biases,
                activation: l.activation,
            });
        }
        let actor = Mlp { layers };
        if actor.input_size() != 3 || actor.output_size() != 1 {
            return Err(DdpgError::Shape(format!(
                "actor must map 3 → 1, found {:?}",
                actor.sizes()
            )));
        }
        Ok(Self {
            actor,
            normalizer: file.normalizer,
            action_scale: file.action_scale,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DdpgError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json())
            .map_err(|e| DdpgError::Load(format!("{}: {e}", path.display())))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DdpgError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| DdpgError::Load(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Loads and checks the layer sizes against `expected`.
    pub fn load_expecting(path: impl AsRef<Path>, expected: &[usize]) -> Result<Self, DdpgError> {
        let p = Self::load(path)?;
        if p.actor.sizes() != expected {
            return Err(DdpgError::Shape(format!(
                "policy layer sizes {:?} differ from expected {expected:?}",
                p.actor.sizes()
            )));
        }
        Ok(p)
    }

    /// Actor output in `[−1, 1]` for a raw environment state.
    pub fn normalized_action(&self, state: &crate::env::EnvState) -> f64 {
        self.actor.forward(&self.normalizer.normalize(state))[0]
    }
}

/// Runs a trained policy without exploration noise.
#[derive(Debug, Clone)]
pub struct PolicyController {
    pub policy: Policy,
    name: String,
}

impl PolicyController {
    pub fn new(policy: Policy) -> Self {
        Self {
            policy,
            name: "ecofollower".into(),
        }
    }
}

impl Controller for PolicyController {
    fn name(&self) -> &str {
        &self.name
    }

    fn accel(&self, ctx: &StepContext<'_>) -> Result<f64, ControllerError> {
        let y = self.policy.normalized_action(&ctx.state);
        if y.is_finite() {
            Ok(y * self.policy.action_scale)
        } else {
            Err(ControllerError(format!("policy produced {y}")))
        }
    }
}
