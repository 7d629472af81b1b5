use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::INPUTS;
use crate::control::network_input;
use crate::sim::Trajectory;
use crate::{Error, Result};

/// Supervised pairs `(θ, θ', z') -> u` with an optional train/test partition.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub inputs: Vec<[f64; INPUTS]>,
    pub targets: Vec<f64>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub shuffle_seed: Option<u64>,
}

impl Dataset {
    /// Unsplit dataset; rows with a non-finite entry are dropped.
    pub fn from_rows(rows: impl IntoIterator<Item = ([f64; INPUTS], f64)>) -> Self {
        let (inputs, targets) = rows
            .into_iter()
            .filter(|(x, y)| y.is_finite() && x.iter().all(|v| v.is_finite()))
            .unzip();
        Dataset {
            inputs,
            targets,
            ..Dataset::default()
        }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn is_split(&self) -> bool {
        !self.train.is_empty() && !self.test.is_empty()
    }

    pub fn rows(&self, idx: &[usize]) -> (Vec<[f64; INPUTS]>, Vec<f64>) {
        idx.iter().map(|&i| (self.inputs[i], self.targets[i])).unzip()
    }
}

/// One row per recorded sample: the state without `z`, and the applied control.
pub fn build_dataset(t: &Trajectory) -> Result<Dataset> {
    if t.samples.is_empty() {
        return Err(Error::Empty("trajectory"));
    }
    let d = Dataset::from_rows(t.samples.iter().map(|s| (network_input(&s.state), s.u)));
    if d.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    Ok(d)
}

/// Seeded permutation of all rows; the first `⌊fraction · N⌋` go to training.
pub fn split_shuffle(mut d: Dataset, fraction: f64, seed: u64) -> Result<Dataset> {
    if d.len() < 10 {
        return Err(Error::invalid("dataset", "at least 10 rows are required to split"));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid("fraction", "must lie in (0, 1)"));
    }
    let mut perm: Vec<usize> = (0..d.len()).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = libm::floor(fraction * d.len() as f64) as usize;
    d.test = perm.split_off(n_train);
    d.train = perm;
    d.shuffle_seed = Some(seed);
    Ok(d)
}
