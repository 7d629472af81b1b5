//! Thread-parallel grid and sweep drivers. Work items are independent and
//! results are gathered by index, so output matches the sequential drivers
//! in `capsule-core` exactly regardless of thread count.

use capsule_core::control::ControlLaw;
use capsule_core::model::CapsuleParams;
use capsule_core::neural::{select_best, train, CellOutcome, Dataset, GridSpec, RepeatOutcome, TrainConfig};
use capsule_core::robustness::{nominal_distance, run_trial, sweep_row, trial_seed, SweepConfig, SweepResult};
use capsule_core::sim::SimConfig;
use capsule_core::{Error, Result};
use rayon::prelude::*;

/// Every (cell, repeat) training in parallel; outcomes in cell order.
pub fn par_grid(spec: &GridSpec, d: &Dataset, base: &TrainConfig) -> Vec<CellOutcome> {
    let cells = spec.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.repeats).map(move |r| (c, r)))
        .collect();
    let mut results: Vec<Option<Result<RepeatOutcome>>> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let cfg = spec.config_for(base, c, r);
            Some(train(d, &cfg).map(|(net, report)| RepeatOutcome { net, report }))
        })
        .collect();
    cells
        .iter()
        .enumerate()
        .map(|(c, &cell)| {
            let repeats: Vec<_> = results[c * spec.repeats..(c + 1) * spec.repeats]
                .iter_mut()
                .map(|r| r.take().expect("each job is consumed once"))
                .collect();
            CellOutcome {
                cell,
                selected: select_best(&repeats),
                repeats,
            }
        })
        .collect()
}

/// Parallel version of [`capsule_core::robustness::sweep`].
pub fn par_sweep<A, B>(
    open_loop: &A,
    neural: &B,
    p: &CapsuleParams,
    cfg: &SimConfig,
    sc: &SweepConfig,
) -> Result<SweepResult>
where
    A: ControlLaw + Sync + ?Sized,
    B: ControlLaw + Sync + ?Sized,
{
    sc.validate(p.mu)?;
    let (ol0, nn0) = rayon::join(|| nominal_distance(open_loop, p, cfg), || nominal_distance(neural, p, cfg));
    let unperturbed = (ol0?, nn0?);
    let jobs: Vec<(usize, usize, bool)> = (0..sc.deltas.len())
        .flat_map(|d| (0..sc.trials).flat_map(move |t| [(d, t, false), (d, t, true)]))
        .collect();
    let results: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(d, t, nn)| {
            let seed = trial_seed(sc.base_seed, d, t);
            if nn {
                run_trial(neural, p, cfg, sc.deltas[d], seed)
            } else {
                run_trial(open_loop, p, cfg, sc.deltas[d], seed)
            }
        })
        .collect();

    let mut rows = Vec::with_capacity(sc.deltas.len());
    let mut failures = Vec::new();
    for (di, &delta) in sc.deltas.iter().enumerate() {
        let mut ol = Vec::with_capacity(sc.trials);
        let mut nn = Vec::with_capacity(sc.trials);
        for trial in 0..sc.trials {
            let k = 2 * (di * sc.trials + trial);
            for (out, res) in [(&mut ol, &results[k]), (&mut nn, &results[k + 1])] {
                if let Err(e) = res {
                    failures.push((di, trial, e.clone()));
                }
                out.push(res.clone().map_err(|e| Error::Trial {
                    trial,
                    source: Box::new(e),
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
