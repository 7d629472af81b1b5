use alloc::vec::Vec;

use super::{train, Activation, Dataset, Mlp, OutputActivation, TrainConfig, TrainReport};
use crate::seeds::derive_seed;
use crate::Result;

/// Hidden activation × output activation × width, each trained `repeats` times.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GridSpec {
    pub hidden: Vec<Activation>,
    pub output: Vec<OutputActivation>,
    pub neurons: Vec<usize>,
    pub repeats: usize,
}

impl Default for GridSpec {
    /// 3 × 2 × 5 = 30 configurations, three repeats each. 17 neurons is the
    /// "two thirds of the inputs plus the outputs" rule of thumb.
    fn default() -> Self {
        GridSpec {
            hidden: Activation::ALL.to_vec(),
            output: OutputActivation::ALL.to_vec(),
            neurons: alloc::vec![3, 10, 17, 30, 50],
            repeats: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridCell {
    pub hidden: Activation,
    pub output: OutputActivation,
    pub neurons: usize,
}

impl GridSpec {
    /// Cells ordered by hidden activation, then width, then output activation.
    pub fn cells(&self) -> Vec<GridCell> {
        let mut cells = Vec::with_capacity(self.hidden.len() * self.neurons.len() * self.output.len());
        for &hidden in &self.hidden {
            for &neurons in &self.neurons {
                for &output in &self.output {
                    cells.push(GridCell {
                        hidden,
                        output,
                        neurons,
                    });
                }
            }
        }
        cells
    }

    /// Training configuration for repeat `repeat` of cell `index`.
    pub fn config_for(&self, base: &TrainConfig, index: usize, repeat: usize) -> TrainConfig {
        let cell = self.cells()[index];
        TrainConfig {
            hidden_act: cell.hidden,
            output_act: cell.output,
            neurons: cell.neurons,
            seed: derive_seed(base.seed, index, repeat),
            ..base.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeatOutcome {
    pub net: Mlp,
    pub report: TrainReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub cell: GridCell,
    pub repeats: Vec<Result<RepeatOutcome>>,
    /// Index into `repeats` of the reported repeat.
    pub selected: Option<usize>,
}

impl CellOutcome {
    pub fn best(&self) -> Option<&RepeatOutcome> {
        self.selected.and_then(|i| self.repeats[i].as_ref().ok())
    }
}

/// Highest test R², ties broken by lower test MSE. Failed repeats and
/// repeats without an R² are skipped.
pub fn select_best(repeats: &[Result<RepeatOutcome>]) -> Option<usize> {
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, r) in repeats.iter().enumerate() {
        let Ok(r) = r else { continue };
        let Some(r2) = r.report.final_test_r2 else { continue };
        let mse = r.report.final_test_mse;
        let better = match best {
            None => true,
            Some((_, b_r2, b_mse)) => r2 > b_r2 || (r2 == b_r2 && mse < b_mse),
        };
        if better {
            best = Some((i, r2, mse));
        }
    }
    best.map(|b| b.0)
}

/// All repeats of one cell.
pub fn run_cell(spec: &GridSpec, index: usize, d: &Dataset, base: &TrainConfig) -> CellOutcome {
    let repeats: Vec<_> = (0..spec.repeats)
        .map(|r| {
            let cfg = spec.config_for(base, index, r);
            train(d, &cfg).map(|(net, report)| RepeatOutcome { net, report })
        })
        .collect();
    CellOutcome {
        cell: spec.cells()[index],
        selected: select_best(&repeats),
        repeats,
    }
}

/// Sequential grid; outcomes are in [`GridSpec::cells`] order.
pub fn grid_run(spec: &GridSpec, d: &Dataset, base: &TrainConfig) -> Vec<CellOutcome> {
    (0..spec.cells().len()).map(|i| run_cell(spec, i, d, base)).collect()
}
