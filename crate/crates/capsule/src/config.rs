//! Run configuration: one TOML file with a section per pipeline stage.

use std::path::Path;

use capsule_core::control::{FourierControl, Limits, OPTIMIZED_A, OPTIMIZED_A0, OPTIMIZED_B, OPTIMIZED_OMEGA};
use capsule_core::model::CapsuleParams;
use capsule_core::neural::{Activation, AdamConfig, GridSpec, OutputActivation, TrainConfig};
use capsule_core::robustness::SweepConfig;
use capsule_core::sim::SimConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::AppError;

/// Truncated Fourier signal and the admissible control range shared by
/// every controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FourierSection {
    pub a0: f64,
    pub omega: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub u_min: f64,
    pub u_max: f64,
}

impl Default for FourierSection {
    fn default() -> Self {
        let l = Limits::default();
        FourierSection {
            a0: OPTIMIZED_A0,
            omega: OPTIMIZED_OMEGA,
            a: OPTIMIZED_A.to_vec(),
            b: OPTIMIZED_B.to_vec(),
            u_min: l.min,
            u_max: l.max,
        }
    }
}

impl FourierSection {
    pub fn limits(&self) -> Limits {
        Limits {
            min: self.u_min,
            max: self.u_max,
        }
    }

    pub fn controller(&self) -> capsule_core::Result<FourierControl> {
        FourierControl::new(self.a0, self.omega, self.a.clone(), self.b.clone(), self.limits())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    /// Fraction of rows used for training; the rest is the test split.
    pub train_fraction: f64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        DatasetSection { train_fraction: 0.8 }
    }
}

/// Training hyperparameters. The control range comes from `[fourier]` and
/// the seed from `[seeds]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub hidden_act: Activation,
    pub output_act: OutputActivation,
    pub neurons: usize,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
    pub min_delta: f64,
    pub standardize: bool,
    pub restore_best: bool,
    pub adam: AdamConfig,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            hidden_act: t.hidden_act,
            output_act: t.output_act,
            neurons: t.neurons,
            max_epochs: t.max_epochs,
            batch_size: t.batch_size,
            patience: t.patience,
            min_delta: t.min_delta,
            standardize: t.standardize,
            restore_best: t.restore_best,
            adam: t.adam,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub deltas: Vec<f64>,
    pub trials: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        let s = SweepConfig::default();
        SweepSection {
            deltas: s.deltas,
            trials: s.trials,
        }
    }
}

/// Seeds of every stochastic stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    /// Train/test shuffle.
    pub split: u64,
    /// Weight initialization and batch order; grid repeats derive from it.
    pub train: u64,
    /// Base seed of the friction fields.
    pub sweep: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds {
            split: 0,
            train: 0,
            sweep: SweepConfig::default().base_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub capsule: CapsuleParams,
    pub sim: SimConfig,
    pub fourier: FourierSection,
    pub dataset: DatasetSection,
    pub train: TrainSection,
    pub grid: GridSpec,
    pub sweep: SweepSection,
    pub seeds: Seeds,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, AppError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| AppError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Checks every section before any work starts.
    pub fn validate(&self) -> Result<(), AppError> {
        self.capsule.validate()?;
        self.sim.validate()?;
        self.fourier.controller()?;
        if !(self.dataset.train_fraction > 0.0 && self.dataset.train_fraction < 1.0) {
            return Err(capsule_core::Error::invalid("train_fraction", "must lie in (0, 1)").into());
        }
        self.train_config().validate()?;
        let g = &self.grid;
        if g.hidden.is_empty() || g.output.is_empty() || g.neurons.is_empty() || g.repeats == 0 {
            return Err(capsule_core::Error::invalid("grid", "every axis needs at least one entry").into());
        }
        if g.neurons.contains(&0) {
            return Err(capsule_core::Error::invalid("grid", "neuron counts must be >= 1").into());
        }
        self.sweep_config().validate(self.capsule.mu)?;
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            hidden_act: t.hidden_act,
            output_act: t.output_act,
            neurons: t.neurons,
            limits: self.fourier.limits(),
            max_epochs: t.max_epochs,
            adam: t.adam,
            batch_size: t.batch_size,
            patience: t.patience,
            min_delta: t.min_delta,
            standardize: t.standardize,
            restore_best: t.restore_best,
            seed: self.seeds.train,
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            deltas: self.sweep.deltas.clone(),
            trials: self.sweep.trials,
            base_seed: self.seeds.sweep,
        }
    }

    /// SHA-256 of the canonical TOML encoding, so formatting and comments in
    /// the source file do not matter.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.sim.tau_end, 100.0);
        assert_eq!(c.fourier.a.len(), 5);
    }

    #[test]
    fn roundtrip_preserves_hash() {
        let c = RunConfig::default();
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn partial_sections_and_validation() {
        let c = RunConfig::from_toml("[fourier]\nu_min = -2.0\nu_max = 2.0\n[seeds]\ntrain = 7\n").unwrap();
        assert_eq!(c.fourier.a0, OPTIMIZED_A0);
        assert_eq!(c.train_config().limits.max, 2.0);
        assert_eq!(c.train_config().seed, 7);
        assert!(RunConfig::from_toml("[fourier]\nu_min = 3.0\nu_max = 2.0\n").is_err());
        assert!(RunConfig::from_toml("[sweep]\ndeltas = [0.5]\n").is_err());
        assert!(RunConfig::from_toml("[capsule]\nbogus = 1.0\n").is_err());
    }
}
