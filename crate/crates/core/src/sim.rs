//! Event-driven integration of the hybrid stick/slip system.
//!
//! Within a contact mode the state is advanced with classical RK4. While
//! slipping, a sign change of `z'` inside a step is located by bisection on
//! the step length; the mode at the resulting rest point is then chosen by
//! [`mode_decision`]. While sticking, `z'` is held at zero and the break-away
//! condition is checked at every step boundary.
//!
//! Steps are shortened so that every recording instant `k · record_stride`
//! is hit exactly; no interpolation is involved in the output.

use alloc::vec::Vec;

use crate::control::{ControlLaw, LawKind};
use crate::model::{
    eval_dynamics, mode_decision, CapsuleParams, ContactMode, Direction, LiftOffPolicy, State,
    StateRate, STICK_VEL_TOL,
};
use crate::robustness::FrictionField;
use crate::{Error, Result};

/// Upper bound on contact-mode switches before a run is declared chattering.
pub const MAX_MODE_SWITCHES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SimConfig {
    /// RK4 step.
    pub dt: f64,
    /// Integration horizon; the run covers `[0, tau_end]`.
    pub tau_end: f64,
    /// Width of the final bracket when locating a velocity reversal.
    pub event_tol: f64,
    /// Spacing of recorded samples.
    pub record_stride: f64,
    /// Handling of a non-positive contact force. The published open-loop
    /// control drives `r_y` below zero under nominal parameters, so the
    /// default keeps the permanent-contact equations.
    pub lift_off: LiftOffPolicy,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 1e-3,
            tau_end: 100.0,
            event_tol: 1e-10,
            record_stride: 0.01,
            lift_off: LiftOffPolicy::PermanentContact,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        if !(self.tau_end.is_finite() && self.tau_end > 0.0) {
            return Err(Error::invalid("tau_end", "must be > 0"));
        }
        if !(self.event_tol > 0.0 && self.event_tol < self.dt) {
            return Err(Error::invalid("event_tol", "must lie in (0, dt)"));
        }
        if !(self.record_stride.is_finite() && self.record_stride >= self.dt) {
            return Err(Error::invalid("record_stride", "must be >= dt"));
        }
        Ok(())
    }

    /// Number of recorded samples, including `τ = 0`.
    pub fn sample_count(&self) -> usize {
        libm::ceil(self.tau_end / self.record_stride - 1e-9) as usize + 1
    }

    fn record_time(&self, k: usize) -> f64 {
        (k as f64 * self.record_stride).min(self.tau_end)
    }
}

/// One recorded instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub state: State,
    pub u: f64,
    pub mode: ContactMode,
    pub r_y: f64,
    pub r_z: f64,
    pub f_z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub params: CapsuleParams,
    pub config: SimConfig,
    pub controller: LawKind,
    /// Seed and deviation of the friction field, if one was used.
    pub friction: Option<(u64, f64)>,
    /// Number of contact-mode changes over the run.
    pub mode_switches: usize,
    /// Number of located velocity reversals.
    pub events: usize,
    /// Number of recorded samples with `r_y ≤ 0`.
    pub lift_off_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn first(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

/// Net displacement `z(τ_end) - z(0)`.
pub fn distance(t: &Trajectory) -> Result<f64> {
    match (t.first(), t.last()) {
        (Some(a), Some(b)) => Ok(b.state.z - a.state.z),
        _ => Err(Error::Empty("trajectory")),
    }
}

enum Friction<'a> {
    Nominal(f64),
    Field(&'a mut FrictionField),
}

impl Friction<'_> {
    fn mu_at(&mut self, z: f64) -> f64 {
        match self {
            Friction::Nominal(mu) => *mu,
            Friction::Field(f) => f.mu_at(z),
        }
    }
}

struct Integrator<'a, C: ?Sized> {
    controller: &'a C,
    params: &'a CapsuleParams,
    friction: Friction<'a>,
    lift_off: LiftOffPolicy,
}

fn advance(s: &State, r: &StateRate, h: f64) -> State {
    State {
        tau: s.tau + h,
        theta: s.theta + h * r.theta,
        theta_dot: s.theta_dot + h * r.theta_dot,
        z: s.z + h * r.z,
        z_dot: s.z_dot + h * r.z_dot,
    }
}

impl<C: ControlLaw + ?Sized> Integrator<'_, C> {
    fn rate(&mut self, s: &State, mode: ContactMode) -> Result<StateRate> {
        let u = self.controller.control(s.tau, s);
        let mu = self.friction.mu_at(s.z);
        Ok(eval_dynamics(s, u, mode, mu, self.params, self.lift_off)?.0)
    }

    fn rk4(&mut self, s: &State, h: f64, mode: ContactMode) -> Result<State> {
        let k1 = self.rate(s, mode)?;
        let k2 = self.rate(&advance(s, &k1, 0.5 * h), mode)?;
        let k3 = self.rate(&advance(s, &k2, 0.5 * h), mode)?;
        let k4 = self.rate(&advance(s, &k3, h), mode)?;
        let mut next = State {
            tau: s.tau + h,
            theta: s.theta + h / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta),
            theta_dot: s.theta_dot
                + h / 6.0 * (k1.theta_dot + 2.0 * k2.theta_dot + 2.0 * k3.theta_dot + k4.theta_dot),
            z: s.z + h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
            z_dot: s.z_dot + h / 6.0 * (k1.z_dot + 2.0 * k2.z_dot + 2.0 * k3.z_dot + k4.z_dot),
        };
        if mode == ContactMode::Stick {
            next.z = s.z;
            next.z_dot = 0.0;
        }
        if !next.is_finite() {
            return Err(Error::Divergence { tau: s.tau });
        }
        Ok(next)
    }

    fn decide(&mut self, s: &State) -> Result<ContactMode> {
        let u = self.controller.control(s.tau, s);
        let mu = self.friction.mu_at(s.z);
        mode_decision(s, u, mu, self.params, self.lift_off)
    }

    fn sample(&mut self, s: &State, mode: ContactMode) -> Result<Sample> {
        let u = self.controller.control(s.tau, s);
        let mu = self.friction.mu_at(s.z);
        let (_, k) = eval_dynamics(s, u, mode, mu, self.params, self.lift_off)?;
        Ok(Sample {
            state: *s,
            u,
            mode,
            r_y: k.r_y,
            r_z: k.r_z,
            f_z: k.f_z,
        })
    }

    /// Largest step in `(0, h]` that keeps `sign(z') = dir`, to within `tol`.
    /// Returns the step length and the state just past the reversal.
    fn locate_reversal(
        &mut self,
        s: &State,
        h: f64,
        dir: Direction,
        tol: f64,
    ) -> Result<(f64, State)> {
        let mut lo = 0.0;
        let mut hi = h;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            let probe = self.rk4(s, mid, ContactMode::Slip(dir))?;
            if dir.sign() * probe.z_dot > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let end = self.rk4(s, hi, ContactMode::Slip(dir))?;
        Ok((hi, end))
    }
}

/// Integrate from `initial` over `[initial.tau, cfg.tau_end]`.
///
/// Friction is `field.mu_at(z)` when a field is given and `p.mu` otherwise.
/// `initial.tau` is expected to be 0.
pub fn simulate<C: ControlLaw + ?Sized>(
    initial: State,
    controller: &C,
    p: &CapsuleParams,
    cfg: &SimConfig,
    field: Option<&mut FrictionField>,
) -> Result<Trajectory> {
    p.validate()?;
    cfg.validate()?;
    if !initial.is_finite() {
        return Err(Error::invalid("initial", "state must be finite"));
    }
    let friction_meta = field.as_ref().map(|f| (f.seed(), f.delta()));
    let friction = match field {
        Some(f) => Friction::Field(f),
        None => Friction::Nominal(p.mu),
    };
    let mut it = Integrator {
        controller,
        params: p,
        friction,
        lift_off: cfg.lift_off,
    };

    let mut state = initial;
    if state.z_dot.abs() <= STICK_VEL_TOL {
        state.z_dot = 0.0;
    }
    let mut mode = it.decide(&state)?;
    let mut samples = Vec::with_capacity(cfg.sample_count());
    samples.push(it.sample(&state, mode)?);

    let mut next_record = 1usize;
    let mut switches = 0usize;
    let mut events = 0usize;
    // Set after a mode change: the next step runs in the new mode unconditionally.
    let mut hold = false;

    while samples.len() < cfg.sample_count() {
        let target = cfg.record_time(next_record);
        let h = cfg.dt.min(target - state.tau);

        if !hold {
            let wanted = match mode {
                ContactMode::Stick => it.decide(&state)?,
                ContactMode::Slip(d) if d.sign() * state.z_dot < -STICK_VEL_TOL => {
                    ContactMode::Slip(d.reversed())
                }
                m => m,
            };
            if wanted != mode {
                mode = wanted;
                switches += 1;
                hold = true;
            }
        }

        let step = it.rk4(&state, h, mode)?;
        match mode {
            ContactMode::Slip(d) if !hold && d.sign() * step.z_dot <= 0.0 => {
                let (taken, mut end) = it.locate_reversal(&state, h, d, cfg.event_tol)?;
                end.z_dot = 0.0;
                end.tau = state.tau + taken;
                state = end;
                events += 1;
                let next = it.decide(&state)?;
                if next != mode {
                    switches += 1;
                }
                mode = next;
                hold = true;
            }
            _ => {
                state = step;
                hold = false;
            }
        }

        if switches > MAX_MODE_SWITCHES {
            return Err(Error::Divergence { tau: state.tau });
        }

        if target - state.tau <= 1e-12 {
            state.tau = target;
            samples.push(it.sample(&state, mode)?);
            next_record += 1;
        }
    }

    let lift_off_samples = samples.iter().filter(|s| s.r_y <= 0.0).count();
    Ok(Trajectory {
        samples,
        meta: TrajectoryMeta {
            params: *p,
            config: *cfg,
            controller: controller.kind(),
            friction: friction_meta,
            mode_switches: switches,
            events,
            lift_off_samples,
        },
    })
}
