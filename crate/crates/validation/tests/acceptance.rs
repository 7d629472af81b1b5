//! Acceptance criteria at production settings. Prints one pass/fail line per
//! criterion and exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use capsule::commands::{self, Context, ControllerChoice};
use capsule::config::RunConfig;
use capsule::parallel::par_sweep;
use capsule_core::control::{FourierControl, Idle, Limits, NeuralController};
use capsule_core::model::{
    equation_residuals, slip_kinetics, slip_kinetics_with, stick_kinetics_with, CapsuleParams, Direction,
    LiftOffPolicy, State,
};
use capsule_core::neural::{
    adam_step, build_dataset, split_shuffle, train, Activation, AdamConfig, Dataset, GridSpec, Mlp, Moments,
    OutputActivation, TrainConfig, INPUTS,
};
use capsule_core::robustness::SweepConfig;
use capsule_core::sim::{distance, simulate, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const P: CapsuleParams = CapsuleParams::NOMINAL;
const PAPER_DISTANCE: f64 = 6.065;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(n: usize, name: &str, secs: f64, limit: f64, o: &Outcome) -> bool {
    let timely = secs < limit;
    let pass = o.pass && timely;
    println!(
        "criterion {n} {name}: {} — {}; {secs:.1} s (limit {limit:.0} s{})",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        if timely { "" } else { ", exceeded" }
    );
    pass
}

fn open_loop_distance() -> (f64, usize) {
    let t = simulate(State::default(), &FourierControl::optimized(), &P, &SimConfig::default(), None).unwrap();
    (distance(&t).unwrap(), t.meta.lift_off_samples)
}

fn criterion_1(d: f64, lift_off: usize) -> Outcome {
    let rel = (d - PAPER_DISTANCE) / PAPER_DISTANCE;
    Outcome {
        pass: rel.abs() <= 0.02,
        detail: format!(
            "distance {d:.4} vs {PAPER_DISTANCE} ± 2% (deviation {:+.1}%); contact force non-positive at {lift_off} of 10001 samples",
            100.0 * rel
        ),
    }
}

fn open_loop_dataset() -> Dataset {
    let t = simulate(State::default(), &FourierControl::optimized(), &P, &SimConfig::default(), None).unwrap();
    split_shuffle(build_dataset(&t).unwrap(), 0.8, 0).unwrap()
}

fn criterion_2(d: &Dataset) -> (Outcome, Mlp) {
    let (net, r) = train(d, &TrainConfig::default()).unwrap();
    let r2 = r.final_test_r2.unwrap_or(f64::NAN);
    let pass = r2 >= 0.995 && r.final_test_mse_unit <= 5e-4;
    let detail = format!(
        "relu/linear/50: test R2 {r2:.5} (>= 0.995), test MSE {:.2e} range-normalized (<= 5e-4; {:.2e} in control units), best epoch {}/{}",
        r.final_test_mse_unit, r.final_test_mse, r.best_epoch, r.epochs_run
    );
    (Outcome { pass, detail }, net)
}

const TOP_CELLS: [(Activation, OutputActivation, usize); 9] = [
    (Activation::Relu, OutputActivation::Linear, 50),
    (Activation::Relu, OutputActivation::Sigmoid, 50),
    (Activation::Sigmoid, OutputActivation::Sigmoid, 17),
    (Activation::Sigmoid, OutputActivation::Sigmoid, 30),
    (Activation::Sigmoid, OutputActivation::Sigmoid, 50),
    (Activation::Tanh, OutputActivation::Sigmoid, 10),
    (Activation::Tanh, OutputActivation::Sigmoid, 17),
    (Activation::Tanh, OutputActivation::Sigmoid, 30),
    (Activation::Tanh, OutputActivation::Sigmoid, 50),
];

fn closed_loop_distance(net: &Mlp) -> f64 {
    let nn = NeuralController::new(net.clone()).unwrap();
    match simulate(State::default(), &nn, &P, &SimConfig::default(), None) {
        Ok(t) => distance(&t).unwrap(),
        Err(_) => f64::NAN,
    }
}

fn criterion_3(d: &Dataset, net: &Mlp, ol: f64) -> Outcome {
    let main = closed_loop_distance(net) / ol;
    let spec = GridSpec::default();
    let cells = spec.cells();
    let base = TrainConfig::default();
    let mut ratios = Vec::new();
    for (h, o, n) in TOP_CELLS {
        let index = cells
            .iter()
            .position(|c| c.hidden == h && c.output == o && c.neurons == n)
            .unwrap();
        let ratio = match train(d, &spec.config_for(&base, index, 0)) {
            Ok((net, _)) => closed_loop_distance(&net) / ol,
            Err(_) => f64::NAN,
        };
        ratios.push((format!("{h}/{o}/{n}"), ratio));
    }
    let best = ratios.iter().map(|r| r.1).filter(|r| r.is_finite()).fold(f64::MIN, f64::max);
    let pass = (0.97..=1.04).contains(&main) && best >= 1.0;
    let cells: Vec<String> = ratios.iter().map(|(n, r)| format!("{n} {r:.3}")).collect();
    Outcome {
        pass,
        detail: format!(
            "relu/linear/50 closed loop {main:.4} x open loop (in [0.97, 1.04]); best of nine {best:.4} x (>= 1.00) [{}]",
            cells.join(", ")
        ),
    }
}

fn criterion_4(net: &Mlp) -> Outcome {
    let nn = NeuralController::new(net.clone()).unwrap();
    let fc = FourierControl::optimized();
    let sc = SweepConfig::default();
    let res = par_sweep(&fc, &nn, &P, &SimConfig::default(), &sc).unwrap();
    let row = |delta: f64| {
        sc.deltas
            .iter()
            .position(|d| (d - delta).abs() < 1e-12)
            .and_then(|i| res.rows[i].clone())
    };
    let Some(last) = row(0.20) else {
        return Outcome {
            pass: false,
            detail: "no statistics at delta 0.20".into(),
        };
    };
    let ol_rel = last.open_loop.rel_pct.unwrap_or(f64::NAN);
    let nn_rel = last.neural.rel_pct.unwrap_or(f64::NAN);
    // Distances are compared along the direction of nominal open-loop travel.
    let heading = res.unperturbed.0.signum();
    let (mut ol_sum, mut nn_sum, mut n) = (0.0, 0.0, 0);
    for k in 12..=20 {
        if let Some(r) = row(k as f64 / 100.0) {
            ol_sum += heading * r.open_loop.mean;
            nn_sum += heading * r.neural.mean;
            n += 1;
        }
    }
    let (ol_avg, nn_avg) = (ol_sum / n as f64, nn_sum / n as f64);
    let pass = sc.trials >= 30
        && (-14.0..=-6.0).contains(&ol_rel)
        && (-13.0..=-5.0).contains(&nn_rel)
        && n == 9
        && nn_avg > ol_avg;
    Outcome {
        pass,
        detail: format!(
            "{} trials; at delta 0.20 open loop {ol_rel:+.2}% (in [-14, -6]), network {nn_rel:+.2}% (in [-13, -5]); \
             mean distance over delta 0.12..0.20: network {nn_avg:.4} vs open loop {ol_avg:.4} (network must exceed); {} failed trials",
            sc.trials,
            res.failures.len()
        ),
    }
}

fn residual_suite() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let n = 10_000;
    for i in 0..n {
        let s = State {
            tau: 0.0,
            theta: rng.gen_range(-3.5..3.5),
            theta_dot: rng.gen_range(-5.0..5.0),
            z: 0.0,
            z_dot: 0.0,
        };
        let u = rng.gen_range(-4.0..4.0);
        let mu = rng.gen_range(0.0..0.6);
        let any = LiftOffPolicy::PermanentContact;
        let k = match i % 3 {
            0 => stick_kinetics_with(&s, u, &P, any),
            1 => slip_kinetics_with(&s, u, Direction::Positive, mu, &P, any),
            _ => slip_kinetics_with(&s, u, Direction::Negative, mu, &P, any),
        }
        .unwrap();
        for r in equation_residuals(&s, u, &k, &P) {
            worst = worst.max(r.abs());
        }
    }
    (worst < 1e-10, format!("residuals max {worst:.1e} over {n} states"))
}

fn oracle_suite() -> (bool, String) {
    let k = slip_kinetics(&State::default(), 4.0, Direction::Positive, 0.3, &P).unwrap();
    let e = (k.theta_ddot - 4.07).abs().max((k.z_ddot - 0.07).abs());
    (e < 1e-12, format!("slip oracle error {e:.1e}"))
}

fn gradient_suite() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let loss = |net: &Mlp, xs: &[[f64; INPUTS]], ys: &[f64]| {
        xs.iter().zip(ys).map(|(x, y)| (net.forward(x) - y).powi(2)).sum::<f64>() / ys.len() as f64
    };
    for hidden in Activation::ALL {
        for output in OutputActivation::ALL {
            let mut done = 0;
            while done < 3 {
                let mut net = Mlp::init(8, hidden, output, Limits::default(), &mut rng);
                for b in net.b_hidden.iter_mut() {
                    *b = rng.gen_range(-0.5..0.5);
                }
                let (xs, ys): (Vec<[f64; INPUTS]>, Vec<f64>) = (0..6)
                    .map(|_| ([rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)], rng.gen_range(0.1..0.9)))
                    .unzip();
                let kink = xs.iter().any(|x| {
                    net.w_hidden
                        .iter()
                        .zip(&net.b_hidden)
                        .any(|(w, b)| (b + w[0] * x[0] + w[1] * x[1] + w[2] * x[2]).abs() < 1e-3)
                });
                if hidden == Activation::Relu && kink {
                    continue;
                }
                let g = net.backward(&xs, &ys);
                let analytic: Vec<f64> = g.groups().iter().flat_map(|s| s.iter().copied()).collect();
                let mut k = 0;
                for group in 0..4 {
                    for j in 0..net.param_groups_mut()[group].len() {
                        let orig = net.param_groups_mut()[group][j];
                        net.param_groups_mut()[group][j] = orig + h;
                        let up = loss(&net, &xs, &ys);
                        net.param_groups_mut()[group][j] = orig - h;
                        let down = loss(&net, &xs, &ys);
                        net.param_groups_mut()[group][j] = orig;
                        let fd = (up - down) / (2.0 * h);
                        let a = analytic[k];
                        worst = worst.max((a - fd).abs() / a.abs().max(fd.abs()).max(1e-4));
                        k += 1;
                    }
                }
                done += 1;
            }
        }
    }
    (worst < 1e-5, format!("backprop vs finite differences max rel. error {worst:.1e} over 6 activation pairs"))
}

fn adam_suite() -> (bool, String) {
    let cfg = AdamConfig::default();
    let mut p = [0.0];
    let mut m = Moments::zeros(1);
    adam_step(&mut p, &[0.7], &mut m, 1, &cfg);
    let e = (p[0] + cfg.learning_rate).abs();
    (e < 1e-9, format!("Adam first step error {e:.1e}"))
}

fn rk4_suite() -> (bool, String) {
    let run = |dt: f64| {
        let cfg = SimConfig {
            dt,
            tau_end: 1.0,
            event_tol: 1e-12,
            record_stride: 0.1,
            ..SimConfig::default()
        };
        let start = State {
            z_dot: 1.0,
            ..State::default()
        };
        let t = simulate(start, &Idle, &P, &cfg, None).unwrap();
        (t.samples.last().unwrap().state, t.meta.events)
    };
    let (reference, _) = run(0.1 / 8.0);
    let err = |s: State| {
        [s.theta - reference.theta, s.theta_dot - reference.theta_dot, s.z - reference.z, s.z_dot - reference.z_dot]
            .iter()
            .fold(0.0f64, |m, e| m.max(e.abs()))
    };
    let (coarse, ec) = run(0.1);
    let (fine, ef) = run(0.05);
    let ratio = err(coarse) / err(fine);
    (ec == 0 && ef == 0 && (10.0..=22.0).contains(&ratio), format!("RK4 error ratio {ratio:.2}"))
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    files
}

fn pipeline(out: &Path) -> capsule::Result<()> {
    let cfg = RunConfig::from_toml(
        "[sim]\ntau_end = 10.0\n[train]\nneurons = 8\nmax_epochs = 20\n\
         [grid]\nneurons = [3]\nrepeats = 2\n[sweep]\ndeltas = [0.0, 0.2]\ntrials = 3\n",
    )?;
    let ctx = Context::new(cfg, out)?;
    commands::cmd_simulate(&ctx, &ControllerChoice::Fourier)?;
    commands::cmd_dataset(&ctx)?;
    commands::cmd_train(&ctx)?;
    let model = ControllerChoice::Model(ctx.path(commands::MODEL));
    commands::cmd_simulate(&ctx, &model)?;
    commands::cmd_grid(&ctx)?;
    commands::cmd_sweep(&ctx, &model)?;
    commands::cmd_plot(&ctx, Vec::new())?;
    Ok(())
}

fn determinism_suite() -> (bool, String) {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    if let Err(e) = pipeline(&a).and_then(|_| pipeline(&b)) {
        return (false, format!("pipeline failed: {e}"));
    }
    let (sa, sb) = (snapshot(&a), snapshot(&b));
    let same = sa == sb;
    (same, format!("{} output files byte-identical across reruns: {same}", sa.len()))
}

fn criterion_5() -> Outcome {
    let parts = [
        residual_suite(),
        oracle_suite(),
        gradient_suite(),
        adam_suite(),
        rk4_suite(),
        determinism_suite(),
    ];
    Outcome {
        pass: parts.iter().all(|p| p.0),
        detail: parts
            .iter()
            .map(|(ok, d)| format!("{d} [{}]", if *ok { "ok" } else { "FAIL" }))
            .collect::<Vec<_>>()
            .join("; "),
    }
}

fn main() -> ExitCode {
    let mut all = true;

    let t = Instant::now();
    let (ol, lift_off) = open_loop_distance();
    all &= report(1, "open-loop reproduction", t.elapsed().as_secs_f64(), 5.0, &criterion_1(ol, lift_off));

    let t = Instant::now();
    let d = open_loop_dataset();
    let (c2, net) = criterion_2(&d);
    all &= report(2, "distillation quality", t.elapsed().as_secs_f64(), 120.0, &c2);

    let t = Instant::now();
    let c3 = criterion_3(&d, &net, ol);
    all &= report(3, "closed-loop performance", t.elapsed().as_secs_f64(), 300.0, &c3);

    let t = Instant::now();
    let c4 = criterion_4(&net);
    all &= report(4, "robustness sweep", t.elapsed().as_secs_f64(), 900.0, &c4);

    let t = Instant::now();
    let c5 = criterion_5();
    all &= report(5, "property suites", t.elapsed().as_secs_f64(), 600.0, &c5);

    if all {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: at least one criterion failed");
        ExitCode::FAILURE
    }
}
