//! CSV formats. Floats are written in shortest round-trip form, so reading
//! a file back reproduces the exact values.

use std::collections::HashMap;
use std::path::Path;

use capsule_core::model::{ContactMode, State};
use capsule_core::neural::{CellOutcome, Dataset, TrainReport, INPUTS};
use capsule_core::robustness::SweepResult;
use capsule_core::sim::{Sample, Trajectory};

use crate::{AppError, Result};

pub const TRAJECTORY_HEADER: [&str; 10] =
    ["tau", "theta", "theta_dot", "z", "z_dot", "u", "mode", "r_y", "r_z", "f_z"];
pub const DATASET_HEADER: [&str; 6] = ["sample", "split", "theta", "theta_dot", "z_dot", "u"];
pub const GRID_HEADER: [&str; 7] = ["hidden_act", "output_act", "neurons", "repeat", "r2", "mse", "selected"];
pub const SWEEP_HEADER: [&str; 10] = [
    "delta",
    "ol_mean",
    "ol_sd",
    "ol_rel_pct",
    "nn_mean",
    "nn_sd",
    "nn_rel_pct",
    "cross_rel_pct",
    "trials",
    "base_seed",
];
pub const HISTORY_HEADER: [&str; 3] = ["epoch", "train_mse", "test_mse"];
pub const PREDICTION_HEADER: [&str; 4] = ["sample", "split", "actual", "predicted"];

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| AppError::format(path, e))?;
    w.write_record(header).map_err(|e| AppError::format(path, e))?;
    for r in rows {
        w.write_record(r.into_iter().collect::<Vec<_>>())
            .map_err(|e| AppError::format(path, e))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// A CSV file held as text cells addressed by column name.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => AppError::io(path, std::io::Error::other(e.to_string())),
            _ => AppError::format(path, e),
        })?;
        let header = r
            .headers()
            .map_err(|e| AppError::format(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<Result<Vec<Vec<String>>, _>>()
            .map_err(|e| AppError::format(path, e))?;
        Ok(Table { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Column indices for `names`, failing on the first absent one.
    pub fn require(&self, path: &Path, names: &[&str]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.column(n)
                    .ok_or_else(|| AppError::format(path, format!("no column `{n}`")))
            })
            .collect()
    }

    /// Numeric values of one column; empty cells are `None`.
    pub fn floats(&self, path: &Path, name: &str) -> Result<Vec<Option<f64>>> {
        let c = self.require(path, &[name])?[0];
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let cell = r[c].trim();
                if cell.is_empty() {
                    return Ok(None);
                }
                cell.parse().map(Some).map_err(|_| {
                    AppError::format(path, format!("row {}: `{cell}` in `{name}` is not a number", i + 2))
                })
            })
            .collect()
    }

    fn dense(&self, path: &Path, name: &str) -> Result<Vec<f64>> {
        self.floats(path, name)?
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| AppError::format(path, format!("row {}: empty `{name}`", i + 2))))
            .collect()
    }
}

pub fn write_trajectory(path: &Path, t: &Trajectory) -> Result<()> {
    write_csv(
        path,
        &TRAJECTORY_HEADER,
        t.samples.iter().map(|s| {
            let st = &s.state;
            [
                num(st.tau),
                num(st.theta),
                num(st.theta_dot),
                num(st.z),
                num(st.z_dot),
                num(s.u),
                s.mode.label().to_string(),
                num(s.r_y),
                num(s.r_z),
                num(s.f_z),
            ]
        }),
    )
}

pub fn read_trajectory(path: &Path) -> Result<Vec<Sample>> {
    let t = Table::read(path)?;
    let cols: HashMap<&str, Vec<f64>> = TRAJECTORY_HEADER
        .iter()
        .filter(|&&h| h != "mode")
        .map(|&h| Ok((h, t.dense(path, h)?)))
        .collect::<Result<_>>()?;
    let mode_col = t.require(path, &["mode"])?[0];
    (0..t.rows.len())
        .map(|i| {
            let label = &t.rows[i][mode_col];
            let mode = ContactMode::from_label(label)
                .ok_or_else(|| AppError::format(path, format!("row {}: unknown mode `{label}`", i + 2)))?;
            Ok(Sample {
                state: State {
                    tau: cols["tau"][i],
                    theta: cols["theta"][i],
                    theta_dot: cols["theta_dot"][i],
                    z: cols["z"][i],
                    z_dot: cols["z_dot"][i],
                },
                u: cols["u"][i],
                mode,
                r_y: cols["r_y"][i],
                r_z: cols["r_z"][i],
                f_z: cols["f_z"][i],
            })
        })
        .collect()
}

/// Rows are written training split first, each split in shuffled order, so
/// the partition and its order survive a round trip.
pub fn write_dataset(path: &Path, d: &Dataset) -> Result<()> {
    let rows = d
        .train
        .iter()
        .map(|&i| (i, "train"))
        .chain(d.test.iter().map(|&i| (i, "test")))
        .map(|(i, split)| {
            let x = d.inputs[i];
            [i.to_string(), split.to_string(), num(x[0]), num(x[1]), num(x[2]), num(d.targets[i])]
        });
    write_csv(path, &DATASET_HEADER, rows)
}

/// Reads a split dataset; row `k` of the file becomes row `k` of the result.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let t = Table::read(path)?;
    let split_col = t.require(path, &["split"])?[0];
    let x: Vec<Vec<f64>> = DATASET_HEADER[2..5].iter().map(|h| t.dense(path, h)).collect::<Result<_>>()?;
    let u = t.dense(path, "u")?;
    let mut d = Dataset::default();
    for (i, row) in t.rows.iter().enumerate() {
        let mut input = [0.0; INPUTS];
        for (j, v) in input.iter_mut().enumerate() {
            *v = x[j][i];
        }
        d.inputs.push(input);
        d.targets.push(u[i]);
        match row[split_col].as_str() {
            "train" if d.test.is_empty() => d.train.push(i),
            "test" => d.test.push(i),
            other => {
                return Err(AppError::format(
                    path,
                    format!("row {}: split `{other}` out of order or unknown", i + 2),
                ))
            }
        }
    }
    if !d.is_split() {
        return Err(AppError::format(path, "dataset needs both train and test rows"));
    }
    Ok(d)
}

/// One row per training run; `mse` is range-normalized, `selected` marks the
/// repeat reported for its cell.
pub fn write_grid(path: &Path, cells: &[CellOutcome]) -> Result<()> {
    let rows = cells.iter().flat_map(|c| {
        c.repeats.iter().enumerate().map(move |(r, rep)| {
            let (r2, mse) = match rep {
                Ok(o) => (o.report.final_test_r2, Some(o.report.final_test_mse_unit)),
                Err(_) => (None, None),
            };
            [
                c.cell.hidden.name().to_string(),
                c.cell.output.name().to_string(),
                c.cell.neurons.to_string(),
                r.to_string(),
                opt(r2),
                opt(mse),
                u8::from(c.selected == Some(r)).to_string(),
            ]
        })
    });
    write_csv(path, &GRID_HEADER, rows)
}

pub fn write_sweep(path: &Path, s: &SweepResult, deltas: &[f64], trials: usize, base_seed: u64) -> Result<()> {
    let rows = deltas.iter().zip(&s.rows).map(|(&delta, row)| {
        let mut cells = vec![num(delta)];
        match row {
            Some(r) => cells.extend([
                num(r.open_loop.mean),
                num(r.open_loop.sd),
                opt(r.open_loop.rel_pct),
                num(r.neural.mean),
                num(r.neural.sd),
                opt(r.neural.rel_pct),
                opt(r.cross_rel_pct),
            ]),
            None => cells.extend(std::iter::repeat_n(String::new(), 7)),
        }
        cells.push(trials.to_string());
        cells.push(base_seed.to_string());
        cells
    });
    write_csv(path, &SWEEP_HEADER, rows)
}

pub fn write_history(path: &Path, r: &TrainReport) -> Result<()> {
    let rows = r
        .train_mse
        .iter()
        .zip(&r.test_mse)
        .enumerate()
        .map(|(e, (tr, te))| [(e + 1).to_string(), num(*tr), num(*te)]);
    write_csv(path, &HISTORY_HEADER, rows)
}

/// `(sample, split, actual, predicted)` rows.
pub fn write_predictions(path: &Path, rows: &[(usize, &str, f64, f64)]) -> Result<()> {
    write_csv(
        path,
        &PREDICTION_HEADER,
        rows.iter()
            .map(|&(i, s, a, p)| [i.to_string(), s.to_string(), num(a), num(p)]),
    )
}
