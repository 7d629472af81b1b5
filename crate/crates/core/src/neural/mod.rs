//! Single-hidden-layer regression network mapping `(θ, θ', z')` to a control
//! value, trained with mini-batch Adam on mean squared error.
//!
//! Hidden neuron `n` computes `a_n = f(b_n + Σ_i W_ni x_i)`; the output is
//! `g(b_o + Σ_n w_n a_n)` with `g` either identity or logistic.

mod adam;
mod dataset;
mod grid;
mod metrics;
mod train;

pub use adam::{adam_step, AdamConfig, Moments};
pub use dataset::{build_dataset, split_shuffle, Dataset};
pub use grid::{grid_run, run_cell, select_best, CellOutcome, GridCell, GridSpec, RepeatOutcome};
pub use metrics::{mse, r2};
pub use train::{fit_scalers, train, TrainConfig, TrainReport, SIGMOID_TARGET_MARGIN};

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::control::Limits;
use crate::{Error, Result};

/// Number of network inputs.
pub const INPUTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum OutputActivation {
    Linear,
    Sigmoid,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

impl Activation {
    pub const ALL: [Activation; 3] = [Activation::Relu, Activation::Sigmoid, Activation::Tanh];

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => sigmoid(x),
            Activation::Tanh => libm::tanh(x),
        }
    }

    /// Derivative with respect to the pre-activation `x`. ReLU uses 0 at the kink.
    pub fn deriv(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            Activation::Tanh => {
                let t = libm::tanh(x);
                1.0 - t * t
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        }
    }
}

impl OutputActivation {
    pub const ALL: [OutputActivation; 2] = [OutputActivation::Linear, OutputActivation::Sigmoid];

    pub fn apply(self, x: f64) -> f64 {
        match self {
            OutputActivation::Linear => x,
            OutputActivation::Sigmoid => sigmoid(x),
        }
    }

    pub fn deriv(self, x: f64) -> f64 {
        match self {
            OutputActivation::Linear => 1.0,
            OutputActivation::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OutputActivation::Linear => "linear",
            OutputActivation::Sigmoid => "sigmoid",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for OutputActivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            _ => Err(Error::invalid("hidden_act", "expected relu, sigmoid or tanh")),
        }
    }
}

impl FromStr for OutputActivation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(OutputActivation::Linear),
            "sigmoid" => Ok(OutputActivation::Sigmoid),
            _ => Err(Error::invalid("output_act", "expected linear or sigmoid")),
        }
    }
}

/// Per-component affine map `scaled = (x - offset) / scale`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AffineScaler {
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

impl AffineScaler {
    pub fn identity(dim: usize) -> Self {
        AffineScaler {
            offset: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    /// Z-score standardization fitted on `rows`. Constant columns get unit scale.
    pub fn standardize<const D: usize>(rows: impl Iterator<Item = [f64; D]> + Clone) -> Self {
        let mut mean = [0.0; D];
        let mut n = 0usize;
        for r in rows.clone() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
            n += 1;
        }
        if n == 0 {
            return Self::identity(D);
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = [0.0; D];
        for r in rows {
            for ((acc, v), m) in var.iter_mut().zip(r).zip(mean) {
                *acc += (v - m) * (v - m);
            }
        }
        let scale = var
            .iter()
            .map(|v| {
                let sd = libm::sqrt(v / n as f64);
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        AffineScaler {
            offset: mean.to_vec(),
            scale,
        }
    }

    /// Maps `[limits.min, limits.max]` onto `[margin, 1 - margin]`.
    pub fn onto_unit_interval(limits: Limits, margin: f64) -> Self {
        let scale = limits.width() / (1.0 - 2.0 * margin);
        AffineScaler {
            offset: vec![limits.min - margin * scale],
            scale: vec![scale],
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.offset.len() != dim || self.scale.len() != dim {
            return Err(Error::LengthMismatch {
                left: self.offset.len().max(self.scale.len()),
                right: dim,
            });
        }
        if self.offset.iter().any(|o| !o.is_finite())
            || self.scale.iter().any(|s| !(s.is_finite() && *s > 0.0))
        {
            return Err(Error::invalid("scaler", "offsets finite and scales > 0 required"));
        }
        Ok(())
    }

    pub fn scale_at(&self, i: usize, x: f64) -> f64 {
        (x - self.offset[i]) / self.scale[i]
    }

    pub fn unscale_at(&self, i: usize, y: f64) -> f64 {
        y * self.scale[i] + self.offset[i]
    }
}

/// Network parameters and the scalers fitted with them.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mlp {
    pub hidden_act: Activation,
    pub output_act: OutputActivation,
    /// One row of input weights per hidden neuron.
    pub w_hidden: Vec<[f64; INPUTS]>,
    pub b_hidden: Vec<f64>,
    pub w_out: Vec<f64>,
    pub b_out: f64,
    /// `None` until fitted.
    pub input_scaler: Option<AffineScaler>,
    /// `None` until fitted; identity for a linear output.
    pub target_scaler: Option<AffineScaler>,
    pub limits: Limits,
}

/// Gradient of a loss with respect to every parameter of an [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w_hidden: Vec<[f64; INPUTS]>,
    pub b_hidden: Vec<f64>,
    pub w_out: Vec<f64>,
    pub b_out: f64,
}

impl Gradients {
    pub fn zeros(n_hidden: usize) -> Self {
        Gradients {
            w_hidden: vec![[0.0; INPUTS]; n_hidden],
            b_hidden: vec![0.0; n_hidden],
            w_out: vec![0.0; n_hidden],
            b_out: 0.0,
        }
    }

    /// Parameter groups in the same order as [`Mlp::param_groups_mut`].
    pub fn groups(&self) -> [&[f64]; 4] {
        [
            self.w_hidden.as_flattened(),
            &self.b_hidden,
            &self.w_out,
            core::slice::from_ref(&self.b_out),
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.groups()
            .iter()
            .flat_map(|g| g.iter())
            .fold(0.0, |m, g| m.max(g.abs()))
    }
}

impl Mlp {
    /// Network with every weight and bias zero and no fitted scalers.
    pub fn zeroed(
        n_hidden: usize,
        hidden_act: Activation,
        output_act: OutputActivation,
        limits: Limits,
    ) -> Self {
        Mlp {
            hidden_act,
            output_act,
            w_hidden: vec![[0.0; INPUTS]; n_hidden],
            b_hidden: vec![0.0; n_hidden],
            w_out: vec![0.0; n_hidden],
            b_out: 0.0,
            input_scaler: None,
            target_scaler: None,
            limits,
        }
    }

    /// Uniform initialization in `[-L, L]`, `L = √(6 / (fan_in + fan_out))`,
    /// with zero biases.
    pub fn init<R: Rng + ?Sized>(
        n_hidden: usize,
        hidden_act: Activation,
        output_act: OutputActivation,
        limits: Limits,
        rng: &mut R,
    ) -> Self {
        let mut net = Self::zeroed(n_hidden, hidden_act, output_act, limits);
        let lh = libm::sqrt(6.0 / (INPUTS + n_hidden) as f64);
        for row in &mut net.w_hidden {
            for w in row.iter_mut() {
                *w = rng.gen_range(-lh..=lh);
            }
        }
        let lo = libm::sqrt(6.0 / (n_hidden + 1) as f64);
        for w in &mut net.w_out {
            *w = rng.gen_range(-lo..=lo);
        }
        net
    }

    pub fn n_hidden(&self) -> usize {
        self.b_hidden.len()
    }

    pub fn is_fitted(&self) -> bool {
        self.input_scaler.is_some() && self.target_scaler.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_hidden();
        if n == 0 {
            return Err(Error::invalid("n_hidden", "must be >= 1"));
        }
        for len in [self.w_hidden.len(), self.w_out.len()] {
            if len != n {
                return Err(Error::LengthMismatch { left: len, right: n });
            }
        }
        if let Some(s) = &self.input_scaler {
            s.validate(INPUTS)?;
        }
        if let Some(s) = &self.target_scaler {
            s.validate(1)?;
        }
        self.limits.validate()
    }

    pub fn scale_input(&self, x: &[f64; INPUTS]) -> Result<[f64; INPUTS]> {
        let s = self.input_scaler.as_ref().ok_or(Error::ScalerMissing)?;
        Ok(core::array::from_fn(|i| s.scale_at(i, x[i])))
    }

    pub fn scale_target(&self, u: f64) -> Result<f64> {
        let s = self.target_scaler.as_ref().ok_or(Error::ScalerMissing)?;
        Ok(s.scale_at(0, u))
    }

    pub fn unscale_target(&self, y: f64) -> Result<f64> {
        let s = self.target_scaler.as_ref().ok_or(Error::ScalerMissing)?;
        Ok(s.unscale_at(0, y))
    }

    fn hidden_pre(&self, n: usize, x: &[f64; INPUTS]) -> f64 {
        let w = &self.w_hidden[n];
        self.b_hidden[n] + w[0] * x[0] + w[1] * x[1] + w[2] * x[2]
    }

    /// Output for an already scaled input, in the scaled target domain.
    pub fn forward(&self, x: &[f64; INPUTS]) -> f64 {
        let mut o = self.b_out;
        for n in 0..self.n_hidden() {
            o += self.w_out[n] * self.hidden_act.apply(self.hidden_pre(n, x));
        }
        self.output_act.apply(o)
    }

    /// Accumulates into `grads` the gradient of `mean((forward(x) - y)²)` over
    /// the batch. `grads` is overwritten. Returns the batch loss.
    pub fn backward_into(&self, xs: &[[f64; INPUTS]], ys: &[f64], grads: &mut Gradients) -> f64 {
        let n = self.n_hidden();
        if grads.b_hidden.len() != n {
            *grads = Gradients::zeros(n);
        } else {
            grads.w_hidden.iter_mut().for_each(|r| *r = [0.0; INPUTS]);
            grads.b_hidden.iter_mut().for_each(|g| *g = 0.0);
            grads.w_out.iter_mut().for_each(|g| *g = 0.0);
            grads.b_out = 0.0;
        }
        if xs.is_empty() {
            return 0.0;
        }
        let inv = 1.0 / xs.len() as f64;
        let mut pre = vec![0.0; n];
        let mut act = vec![0.0; n];
        let mut loss = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            let mut o = self.b_out;
            for j in 0..n {
                pre[j] = self.hidden_pre(j, x);
                act[j] = self.hidden_act.apply(pre[j]);
                o += self.w_out[j] * act[j];
            }
            let err = self.output_act.apply(o) - y;
            loss += err * err * inv;
            let delta_out = 2.0 * err * inv * self.output_act.deriv(o);
            if delta_out == 0.0 {
                continue;
            }
            grads.b_out += delta_out;
            for j in 0..n {
                grads.w_out[j] += delta_out * act[j];
                let delta_h = delta_out * self.w_out[j] * self.hidden_act.deriv(pre[j]);
                grads.b_hidden[j] += delta_h;
                let g = &mut grads.w_hidden[j];
                g[0] += delta_h * x[0];
                g[1] += delta_h * x[1];
                g[2] += delta_h * x[2];
            }
        }
        loss
    }

    /// Gradient of the batch MSE with respect to every parameter.
    pub fn backward(&self, xs: &[[f64; INPUTS]], ys: &[f64]) -> Gradients {
        let mut g = Gradients::zeros(self.n_hidden());
        self.backward_into(xs, ys, &mut g);
        g
    }

    /// Mutable parameter groups: hidden weights (row-major), hidden biases,
    /// output weights, output bias.
    pub fn param_groups_mut(&mut self) -> [&mut [f64]; 4] {
        [
            self.w_hidden.as_flattened_mut(),
            &mut self.b_hidden,
            &mut self.w_out,
            core::slice::from_mut(&mut self.b_out),
        ]
    }

    pub fn param_count(&self) -> usize {
        self.n_hidden() * (INPUTS + 2) + 1
    }
}
