//! Versioned JSON encoding of a trained network.

use std::path::Path;

use capsule_core::control::Limits;
use capsule_core::neural::{Activation, AffineScaler, Mlp, OutputActivation, INPUTS};
use serde::{Deserialize, Serialize};

use crate::meta::write_json;
use crate::{AppError, Result};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Architecture {
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Activations {
    pub hidden: Activation,
    pub output: OutputActivation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scalers {
    pub input: AffineScaler,
    pub target: AffineScaler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    /// Hidden-layer weights, `hidden × inputs`, row-major.
    pub hidden: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    /// Output weights, `1 × hidden`.
    pub output: Vec<f64>,
    pub output_bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: u32,
    pub architecture: Architecture,
    pub activations: Activations,
    pub limits: Limits,
    pub scalers: Scalers,
    pub weights: Weights,
}

impl ModelFile {
    pub fn from_mlp(net: &Mlp) -> Result<Self> {
        let (Some(input), Some(target)) = (&net.input_scaler, &net.target_scaler) else {
            return Err(capsule_core::Error::ScalerMissing.into());
        };
        Ok(ModelFile {
            version: MODEL_VERSION,
            architecture: Architecture {
                inputs: INPUTS,
                hidden: net.n_hidden(),
                outputs: 1,
            },
            activations: Activations {
                hidden: net.hidden_act,
                output: net.output_act,
            },
            limits: net.limits,
            scalers: Scalers {
                input: input.clone(),
                target: target.clone(),
            },
            weights: Weights {
                hidden: net.w_hidden.iter().flatten().copied().collect(),
                hidden_bias: net.b_hidden.clone(),
                output: net.w_out.clone(),
                output_bias: net.b_out,
            },
        })
    }

    pub fn into_mlp(self) -> Result<Mlp> {
        if self.version != MODEL_VERSION {
            return Err(AppError::Usage(format!(
                "unsupported model version {} (expected {MODEL_VERSION})",
                self.version
            )));
        }
        let a = &self.architecture;
        let w = &self.weights;
        if a.inputs != INPUTS || a.outputs != 1 {
            return Err(capsule_core::Error::invalid("architecture", "expected 3 inputs and 1 output").into());
        }
        if w.hidden.len() != a.hidden * INPUTS {
            return Err(capsule_core::Error::LengthMismatch {
                left: w.hidden.len(),
                right: a.hidden * INPUTS,
            }
            .into());
        }
        let net = Mlp {
            hidden_act: self.activations.hidden,
            output_act: self.activations.output,
            w_hidden: w
                .hidden
                .chunks_exact(INPUTS)
                .map(|c| [c[0], c[1], c[2]])
                .collect(),
            b_hidden: w.hidden_bias.clone(),
            w_out: w.output.clone(),
            b_out: w.output_bias,
            input_scaler: Some(self.scalers.input),
            target_scaler: Some(self.scalers.target),
            limits: self.limits,
        };
        net.validate()?;
        Ok(net)
    }
}

pub fn save_model(path: &Path, net: &Mlp) -> Result<()> {
    write_json(path, &ModelFile::from_mlp(net)?)
}

pub fn load_model(path: &Path) -> Result<Mlp> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| AppError::format(path, e))?;
    file.into_mlp()
}
