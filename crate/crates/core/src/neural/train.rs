use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    adam_step, mse, r2, Activation, AdamConfig, AffineScaler, Dataset, Gradients, Mlp, Moments,
    OutputActivation, INPUTS,
};
use crate::control::Limits;
use crate::{Error, Result};

/// A sigmoid output is trained on targets mapped into `[m, 1 - m]`.
pub const SIGMOID_TARGET_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TrainConfig {
    pub hidden_act: Activation,
    pub output_act: OutputActivation,
    pub neurons: usize,
    pub limits: Limits,
    pub max_epochs: usize,
    pub adam: AdamConfig,
    pub batch_size: usize,
    /// Epochs without a test-MSE improvement larger than `min_delta` before stopping.
    pub patience: usize,
    pub min_delta: f64,
    /// Z-score the inputs using training-split statistics.
    pub standardize: bool,
    /// Return the weights of the best test epoch rather than the last one.
    pub restore_best: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden_act: Activation::Relu,
            output_act: OutputActivation::Linear,
            neurons: 50,
            limits: Limits::default(),
            max_epochs: 1000,
            adam: AdamConfig::default(),
            batch_size: 32,
            patience: 50,
            min_delta: 1e-6,
            standardize: true,
            restore_best: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.neurons == 0 {
            return Err(Error::invalid("neurons", "must be >= 1"));
        }
        if self.max_epochs == 0 {
            return Err(Error::invalid("max_epochs", "must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be >= 1"));
        }
        let a = &self.adam;
        if !(a.beta1 > 0.0 && a.beta1 < 1.0 && a.beta2 > 0.0 && a.beta2 < 1.0) {
            return Err(Error::invalid("adam", "betas must lie in (0, 1)"));
        }
        if !(a.learning_rate > 0.0 && a.epsilon > 0.0) {
            return Err(Error::invalid("adam", "learning rate and epsilon must be > 0"));
        }
        if !(self.min_delta >= 0.0) {
            return Err(Error::invalid("min_delta", "must be >= 0"));
        }
        self.limits.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainReport {
    /// Mean batch loss per epoch, in the scaled target domain.
    pub train_mse: Vec<f64>,
    /// Test MSE after each epoch, in the scaled target domain.
    pub test_mse: Vec<f64>,
    /// Test MSE of the returned network in control units.
    pub final_test_mse: f64,
    /// Test MSE with controls expressed as a fraction of the admissible range,
    /// `final_test_mse / (u_max - u_min)²`.
    pub final_test_mse_unit: f64,
    /// `None` when the test targets are constant.
    pub final_test_r2: Option<f64>,
    pub epochs_run: usize,
    /// 1-based epoch whose weights were returned.
    pub best_epoch: usize,
    /// Filled in by callers that can read a clock.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub wall_time_secs: Option<f64>,
}

fn scaled_rows(
    net: &Mlp,
    d: &Dataset,
    idx: &[usize],
) -> Result<(Vec<[f64; INPUTS]>, Vec<f64>)> {
    let mut xs = Vec::with_capacity(idx.len());
    let mut ys = Vec::with_capacity(idx.len());
    for &i in idx {
        xs.push(net.scale_input(&d.inputs[i])?);
        ys.push(net.scale_target(d.targets[i])?);
    }
    Ok((xs, ys))
}

fn scaled_mse(net: &Mlp, xs: &[[f64; INPUTS]], ys: &[f64]) -> f64 {
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = net.forward(x) - y;
            e * e
        })
        .sum();
    ss / ys.len() as f64
}

/// Fits the input and target scalers for `net` from the training split.
pub fn fit_scalers(net: &mut Mlp, d: &Dataset, standardize: bool) {
    net.input_scaler = Some(if standardize {
        AffineScaler::standardize(d.train.iter().map(|&i| d.inputs[i]))
    } else {
        AffineScaler::identity(INPUTS)
    });
    net.target_scaler = Some(match net.output_act {
        OutputActivation::Linear => AffineScaler::identity(1),
        OutputActivation::Sigmoid => {
            AffineScaler::onto_unit_interval(net.limits, SIGMOID_TARGET_MARGIN)
        }
    });
}

/// Mini-batch Adam on the training split with early stopping on test MSE.
pub fn train(d: &Dataset, cfg: &TrainConfig) -> Result<(Mlp, TrainReport)> {
    cfg.validate()?;
    if !d.is_split() {
        return Err(Error::invalid("dataset", "must be split into train and test rows"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = Mlp::init(cfg.neurons, cfg.hidden_act, cfg.output_act, cfg.limits, &mut rng);
    fit_scalers(&mut net, d, cfg.standardize);

    let (train_x, train_y) = scaled_rows(&net, d, &d.train)?;
    let (test_x, test_y) = scaled_rows(&net, d, &d.test)?;

    let mut moments = [
        Moments::zeros(net.n_hidden() * INPUTS),
        Moments::zeros(net.n_hidden()),
        Moments::zeros(net.n_hidden()),
        Moments::zeros(1),
    ];
    let mut grads = Gradients::zeros(net.n_hidden());
    let mut order: Vec<usize> = (0..train_x.len()).collect();
    let mut batch_x = Vec::with_capacity(cfg.batch_size);
    let mut batch_y = Vec::with_capacity(cfg.batch_size);
    let mut step = 0u64;

    let mut train_hist = Vec::new();
    let mut test_hist = Vec::new();
    let mut best = (f64::INFINITY, 0usize, net.clone());
    let mut stale = 0usize;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            batch_x.clear();
            batch_y.clear();
            batch_x.extend(chunk.iter().map(|&i| train_x[i]));
            batch_y.extend(chunk.iter().map(|&i| train_y[i]));
            let loss = net.backward_into(&batch_x, &batch_y, &mut grads);
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            epoch_loss += loss * chunk.len() as f64;
            step += 1;
            let groups = grads.groups();
            for ((params, g), m) in net.param_groups_mut().into_iter().zip(groups).zip(&mut moments) {
                adam_step(params, g, m, step, &cfg.adam);
            }
        }
        train_hist.push(epoch_loss / train_x.len() as f64);

        let test = scaled_mse(&net, &test_x, &test_y);
        if !test.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        test_hist.push(test);
        if test < best.0 - cfg.min_delta {
            best = (test, epoch, net.clone());
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }

    let epochs_run = test_hist.len();
    let best_epoch = if cfg.restore_best && best.1 > 0 {
        net = best.2;
        best.1
    } else {
        epochs_run
    };

    let pred: Vec<f64> = test_x
        .iter()
        .map(|x| net.unscale_target(net.forward(x)))
        .collect::<Result<_>>()?;
    let target: Vec<f64> = d.test.iter().map(|&i| d.targets[i]).collect();
    let final_test_mse = mse(&pred, &target)?;
    let width = cfg.limits.width();
    let report = TrainReport {
        train_mse: train_hist,
        test_mse: test_hist,
        final_test_mse,
        final_test_mse_unit: final_test_mse / (width * width),
        final_test_r2: match r2(&pred, &target) {
            Ok(v) => Some(v),
            Err(Error::ConstantTarget) => None,
            Err(e) => return Err(e),
        },
        epochs_run,
        best_epoch,
        wall_time_secs: None,
    };
    Ok((net, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::split_shuffle;

    fn linear_data(n: usize) -> Dataset {
        let rows = (0..n).map(|i| {
            let a = (i as f64 * 0.37).sin();
            let b = (i as f64 * 0.11).cos();
            let c = (i as f64 * 0.05).sin() * 0.3;
            ([a, b, c], 0.5 * a - b + 2.0 * c)
        });
        split_shuffle(Dataset::from_rows(rows), 0.8, 1).unwrap()
    }

    #[test]
    fn constant_target_converges() {
        let rows = (0..200).map(|i| ([i as f64 * 0.01, (i as f64).sin(), 0.0], 1.25));
        let d = split_shuffle(Dataset::from_rows(rows), 0.8, 9).unwrap();
        let cfg = TrainConfig {
            neurons: 4,
            max_epochs: 2000,
            min_delta: 0.0,
            patience: 2000,
            ..TrainConfig::default()
        };
        let (net, report) = train(&d, &cfg).unwrap();
        assert!(report.final_test_mse < 1e-8, "{}", report.final_test_mse);
        assert_eq!(report.final_test_r2, None);
        let x = net.scale_input(&[0.5, 0.1, 0.0]).unwrap();
        assert!((net.forward(&x) - 1.25).abs() < 1e-3);
    }

    #[test]
    fn learns_a_linear_map() {
        let d = linear_data(500);
        let cfg = TrainConfig {
            neurons: 8,
            hidden_act: Activation::Tanh,
            max_epochs: 200,
            ..TrainConfig::default()
        };
        let (_, report) = train(&d, &cfg).unwrap();
        assert!(report.final_test_r2.unwrap() > 0.99, "{report:?}");
        assert_eq!(report.test_mse.len(), report.epochs_run);
        assert!(report.best_epoch <= report.epochs_run);
    }

    #[test]
    fn training_is_deterministic() {
        let d = linear_data(200);
        let cfg = TrainConfig {
            neurons: 5,
            max_epochs: 20,
            seed: 17,
            ..TrainConfig::default()
        };
        let (a, ra) = train(&d, &cfg).unwrap();
        let (b, rb) = train(&d, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }

    #[test]
    fn sigmoid_output_uses_margin_scaler() {
        let d = linear_data(200);
        let cfg = TrainConfig {
            neurons: 5,
            output_act: OutputActivation::Sigmoid,
            max_epochs: 5,
            ..TrainConfig::default()
        };
        let (net, _) = train(&d, &cfg).unwrap();
        assert!((net.scale_target(4.0).unwrap() - 0.95).abs() < 1e-12);
        assert!((net.scale_target(-4.0).unwrap() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn divergence_is_reported() {
        let d = linear_data(200);
        let cfg = TrainConfig {
            neurons: 5,
            max_epochs: 50,
            adam: AdamConfig {
                learning_rate: f64::MAX,
                ..AdamConfig::default()
            },
            ..TrainConfig::default()
        };
        assert!(matches!(train(&d, &cfg), Err(Error::TrainingDiverged { .. })));
    }

    #[test]
    fn unsplit_dataset_rejected() {
        let d = Dataset::from_rows((0..20).map(|i| ([i as f64, 0.0, 0.0], 0.0)));
        assert!(train(&d, &TrainConfig::default()).is_err());
    }
}
