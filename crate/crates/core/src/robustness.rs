//! Friction perturbation study.
//!
//! The path is cut into segments of length 0.1; each segment gets its own
//! friction coefficient drawn uniformly from `[μ - Δ, μ + Δ]`. Draws are keyed
//! on `(seed, segment index)` through the ChaCha stream id, so a segment's
//! value does not depend on the order in which segments are visited.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::control::ControlLaw;
use crate::model::{CapsuleParams, State};
use crate::seeds::derive_seed;
use crate::sim::{distance, simulate, SimConfig};
use crate::{Error, Result};

pub const SEGMENT_LEN: f64 = 0.1;

/// Seeded, piecewise-constant random friction coefficient along the path.
#[derive(Debug, Clone)]
pub struct FrictionField {
    mu: f64,
    delta: f64,
    segment_len: f64,
    seed: u64,
    cache: BTreeMap<i64, f64>,
}

impl FrictionField {
    pub fn new(mu: f64, delta: f64, seed: u64) -> Result<Self> {
        Self::with_segment_len(mu, delta, SEGMENT_LEN, seed)
    }

    pub fn with_segment_len(mu: f64, delta: f64, segment_len: f64, seed: u64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::invalid("mu", "must be > 0"));
        }
        if !(delta >= 0.0 && delta <= mu) {
            return Err(Error::invalid("delta", "must satisfy 0 <= delta <= mu"));
        }
        if !(segment_len.is_finite() && segment_len > 0.0) {
            return Err(Error::invalid("segment_len", "must be > 0"));
        }
        Ok(FrictionField {
            mu,
            delta,
            segment_len,
            seed,
            cache: BTreeMap::new(),
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn segment_of(&self, z: f64) -> i64 {
        libm::floor(z / self.segment_len) as i64
    }

    /// The coefficient of segment `index`, without touching the cache.
    pub fn draw(&self, index: i64) -> f64 {
        if self.delta == 0.0 {
            return self.mu;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let unit: f64 = rng.gen();
        self.mu - self.delta + 2.0 * self.delta * unit
    }

    pub fn mu_at(&mut self, z: f64) -> f64 {
        let index = self.segment_of(z);
        if let Some(&mu) = self.cache.get(&index) {
            return mu;
        }
        let mu = self.draw(index);
        self.cache.insert(index, mu);
        mu
    }

    /// Number of segments visited so far.
    pub fn visited(&self) -> usize {
        self.cache.len()
    }
}

/// Seed for trial `trial` at deviation index `delta_index`. Both controllers
/// of a sweep use the same seed for the same pair.
pub fn trial_seed(base_seed: u64, delta_index: usize, trial: usize) -> u64 {
    derive_seed(base_seed, delta_index, trial)
}

/// Distance covered from rest when friction is perturbed by up to `delta`.
pub fn run_trial<C: ControlLaw + ?Sized>(
    controller: &C,
    p: &CapsuleParams,
    cfg: &SimConfig,
    delta: f64,
    seed: u64,
) -> Result<f64> {
    let mut field = FrictionField::new(p.mu, delta, seed)?;
    let t = simulate(State::default(), controller, p, cfg, Some(&mut field))?;
    distance(&t)
}

/// Unperturbed distance from rest at nominal friction.
pub fn nominal_distance<C: ControlLaw + ?Sized>(
    controller: &C,
    p: &CapsuleParams,
    cfg: &SimConfig,
) -> Result<f64> {
    distance(&simulate(State::default(), controller, p, cfg, None)?)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SweepConfig {
    pub deltas: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            deltas: (0..=20).map(|i| i as f64 / 100.0).collect(),
            trials: 30,
            base_seed: 2022,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self, mu: f64) -> Result<()> {
        if self.trials < 2 {
            return Err(Error::invalid("trials", "at least 2 trials are needed for a deviation"));
        }
        if self.deltas.is_empty() {
            return Err(Error::Empty("deltas"));
        }
        if self.deltas.iter().any(|d| !(*d >= 0.0 && *d <= mu)) {
            return Err(Error::invalid("deltas", "every delta must satisfy 0 <= delta <= mu"));
        }
        Ok(())
    }
}

/// Mean and sample standard deviation of one controller's trials.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialStats {
    pub mean: f64,
    pub sd: f64,
    /// `100 (mean - unperturbed) / unperturbed`; `None` when the unperturbed
    /// distance is zero.
    pub rel_pct: Option<f64>,
    pub succeeded: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRow {
    pub delta: f64,
    pub open_loop: TrialStats,
    pub neural: TrialStats,
    /// `100 (neural.mean - open_loop.mean) / open_loop.mean`; `None` when the
    /// open-loop mean is zero.
    pub cross_rel_pct: Option<f64>,
    pub trials: usize,
}

/// Relative change in percent; `+ 0.0` turns a negative zero positive.
fn rel_pct(value: f64, reference: f64) -> Option<f64> {
    (reference != 0.0).then(|| 100.0 * (value - reference) / reference + 0.0)
}

/// Mean and sample SD of the successful entries, or `None` if fewer than
/// 90 % succeeded.
pub fn trial_stats(distances: &[Result<f64>], unperturbed: f64) -> Option<TrialStats> {
    let ok: Vec<f64> = distances.iter().filter_map(|d| d.as_ref().ok().copied()).collect();
    if ok.is_empty() || (ok.len() as f64) < 0.9 * distances.len() as f64 {
        return None;
    }
    let n = ok.len() as f64;
    // Shifted by the first value so identical trials give an exact mean and zero SD.
    let mean = ok[0] + ok.iter().map(|d| d - ok[0]).sum::<f64>() / n;
    let sd = if ok.len() > 1 {
        libm::sqrt(ok.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0))
    } else {
        0.0
    };
    Some(TrialStats {
        mean,
        sd,
        rel_pct: rel_pct(mean, unperturbed),
        succeeded: ok.len(),
    })
}

/// Builds a row from per-trial results of both controllers.
pub fn sweep_row(
    delta: f64,
    unperturbed: (f64, f64),
    open_loop: &[Result<f64>],
    neural: &[Result<f64>],
) -> Option<SweepRow> {
    let ol = trial_stats(open_loop, unperturbed.0)?;
    let nn = trial_stats(neural, unperturbed.1)?;
    Some(SweepRow {
        delta,
        open_loop: ol,
        neural: nn,
        cross_rel_pct: rel_pct(nn.mean, ol.mean),
        trials: open_loop.len(),
    })
}

/// Outcome of a sweep: one entry per requested deviation, `None` where too
/// many trials failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub unperturbed: (f64, f64),
    pub rows: Vec<Option<SweepRow>>,
    pub failures: Vec<(usize, usize, Error)>,
}

/// Sequential sweep over every deviation in `sc.deltas`.
pub fn sweep<A, B>(
    open_loop: &A,
    neural: &B,
    p: &CapsuleParams,
    cfg: &SimConfig,
    sc: &SweepConfig,
) -> Result<SweepResult>
where
    A: ControlLaw + ?Sized,
    B: ControlLaw + ?Sized,
{
    sc.validate(p.mu)?;
    let unperturbed = (nominal_distance(open_loop, p, cfg)?, nominal_distance(neural, p, cfg)?);
    let mut rows = Vec::with_capacity(sc.deltas.len());
    let mut failures = Vec::new();
    for (di, &delta) in sc.deltas.iter().enumerate() {
        let mut ol = Vec::with_capacity(sc.trials);
        let mut nn = Vec::with_capacity(sc.trials);
        for trial in 0..sc.trials {
            let seed = trial_seed(sc.base_seed, di, trial);
            for (out, res) in [
                (&mut ol, run_trial(open_loop, p, cfg, delta, seed)),
                (&mut nn, run_trial(neural, p, cfg, delta, seed)),
            ] {
                if let Err(e) = &res {
                    failures.push((di, trial, e.clone()));
                }
                out.push(res.map_err(|e| Error::Trial {
                    trial,
                    source: alloc::boxed::Box::new(e),
                }));
            }
        }
        rows.push(sweep_row(delta, unperturbed, &ol, &nn));
    }
    Ok(SweepResult {
        unperturbed,
        rows,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_delta_is_nominal() {
        let mut f = FrictionField::new(0.3, 0.0, 99).unwrap();
        for i in -50..50 {
            assert_eq!(f.mu_at(i as f64 * 0.037), 0.3);
        }
    }

    #[test]
    fn repeated_queries_are_cached() {
        let mut f = FrictionField::new(0.3, 0.2, 5).unwrap();
        let a = f.mu_at(1.234);
        let _ = f.mu_at(7.0);
        let _ = f.mu_at(-3.0);
        assert_eq!(f.mu_at(1.234), a);
        assert_eq!(f.mu_at(1.2001), a);
        assert_eq!(f.visited(), 3);
    }

    #[test]
    fn draws_are_order_independent() {
        let mut forward = FrictionField::new(0.3, 0.2, 11).unwrap();
        let mut backward = FrictionField::new(0.3, 0.2, 11).unwrap();
        let a: Vec<f64> = (0..100).map(|i| forward.mu_at(i as f64 * 0.1 + 0.05)).collect();
        let mut b: Vec<f64> = (0..100).rev().map(|i| backward.mu_at(i as f64 * 0.1 + 0.05)).collect();
        b.reverse();
        assert_eq!(a, b);
    }

    #[test]
    fn negative_positions_use_floor() {
        let f = FrictionField::new(0.3, 0.2, 1).unwrap();
        assert_eq!(f.segment_of(-0.05), -1);
        assert_eq!(f.segment_of(0.05), 0);
        assert_eq!(f.segment_of(0.1), 1);
    }

    #[test]
    fn uniform_distribution() {
        let f = FrictionField::new(0.3, 0.2, 2024).unwrap();
        let draws: Vec<f64> = (0..10_000).map(|i| f.draw(i)).collect();
        assert!(draws.iter().all(|m| (0.1..=0.5).contains(m)));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 0.3).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn delta_must_not_exceed_mu() {
        assert!(FrictionField::new(0.3, 0.31, 0).is_err());
        assert!(FrictionField::new(0.3, -0.01, 0).is_err());
        assert!(FrictionField::new(0.3, 0.3, 0).is_ok());
    }

    #[test]
    fn stats_and_failure_threshold() {
        let ok = [Ok(1.0), Ok(3.0)];
        let s = trial_stats(&ok, 2.0).unwrap();
        assert_eq!(s.mean, 2.0);
        assert!((s.sd - libm::sqrt(2.0)).abs() < 1e-15);
        assert_eq!(s.rel_pct, Some(0.0));
        assert_eq!(trial_stats(&ok, 0.0).unwrap().rel_pct, None);

        let mut mixed: Vec<Result<f64>> = (0..9).map(|_| Ok(1.0)).collect();
        mixed.push(Err(Error::Divergence { tau: 1.0 }));
        assert!(trial_stats(&mixed, 1.0).is_some());
        mixed.push(Err(Error::Divergence { tau: 1.0 }));
        assert!(trial_stats(&mixed, 1.0).is_none());
    }

    #[test]
    fn identical_trials_have_zero_sd() {
        let same: Vec<Result<f64>> = (0..30).map(|_| Ok(-4.215390580025309)).collect();
        let s = trial_stats(&same, -4.215390580025309).unwrap();
        assert_eq!(s.mean, -4.215390580025309);
        assert_eq!(s.sd, 0.0);
        assert!(s.rel_pct.unwrap().is_sign_positive());
    }

    #[test]
    fn default_sweep_has_21_deltas() {
        let sc = SweepConfig::default();
        assert_eq!(sc.deltas.len(), 21);
        assert_eq!(sc.deltas[20], 0.2);
        assert!(sc.validate(0.3).is_ok());
        assert!(SweepConfig { trials: 1, ..sc.clone() }.validate(0.3).is_err());
    }
}
