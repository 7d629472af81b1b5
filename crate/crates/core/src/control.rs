//! Control laws: the truncated Fourier open-loop signal and the neural
//! closed-loop wrapper. Both saturate to the same admissible range.

use alloc::vec::Vec;

use crate::model::State;
use crate::neural::Mlp;
use crate::{Error, Result};

/// Admissible control range.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Limits {
    pub min: f64,
    pub max: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { min: -4.0, max: 4.0 }
    }
}

impl Limits {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        let l = Limits { min, max };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min.is_finite() && self.max.is_finite() && self.min < self.max {
            Ok(())
        } else {
            Err(Error::invalid("limits", "require finite u_min < u_max"))
        }
    }

    pub fn clamp(&self, u: f64) -> f64 {
        u.clamp(self.min, self.max)
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawKind {
    /// Depends on time only.
    OpenLoop,
    /// Depends on the measured state only.
    ClosedLoop,
}

/// A control law `u(τ, state)` whose output always lies within its limits.
pub trait ControlLaw {
    fn control(&self, tau: f64, state: &State) -> f64;
    fn kind(&self) -> LawKind;
    fn limits(&self) -> Limits;
}

impl<C: ControlLaw + ?Sized> ControlLaw for &C {
    fn control(&self, tau: f64, state: &State) -> f64 {
        (**self).control(tau, state)
    }
    fn kind(&self) -> LawKind {
        (**self).kind()
    }
    fn limits(&self) -> Limits {
        (**self).limits()
    }
}

/// Zero control, mostly useful as a baseline.
#[derive(Debug, Clone, Copy, Default)]
pub struct Idle;

impl ControlLaw for Idle {
    fn control(&self, _tau: f64, _state: &State) -> f64 {
        0.0
    }
    fn kind(&self) -> LawKind {
        LawKind::OpenLoop
    }
    fn limits(&self) -> Limits {
        Limits::default()
    }
}

/// `u(τ) = a0/2 + Σ a_k cos(kωτ) + Σ b_k sin(kωτ)`, saturated to `limits`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FourierControl {
    pub a0: f64,
    pub omega: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub limits: Limits,
}

pub const OPTIMIZED_A0: f64 = 1.62506;
pub const OPTIMIZED_OMEGA: f64 = 1.64722;
pub const OPTIMIZED_A: [f64; 5] = [-3.43222, -1.95285, -0.68182, 0.38493, 0.17389];
pub const OPTIMIZED_B: [f64; 5] = [-0.41690, 0.12411, -0.10468, 0.13722, 0.27902];

impl Default for FourierControl {
    fn default() -> Self {
        Self::optimized()
    }
}

impl FourierControl {
    pub fn new(a0: f64, omega: f64, a: Vec<f64>, b: Vec<f64>, limits: Limits) -> Result<Self> {
        let fc = FourierControl {
            a0,
            omega,
            a,
            b,
            limits,
        };
        fc.validate()?;
        Ok(fc)
    }

    /// Five-harmonic signal optimized for distance over τ ∈ [0, 100] at
    /// nominal parameters with `u` restricted to [-4, 4].
    pub fn optimized() -> Self {
        FourierControl {
            a0: OPTIMIZED_A0,
            omega: OPTIMIZED_OMEGA,
            a: OPTIMIZED_A.to_vec(),
            b: OPTIMIZED_B.to_vec(),
            limits: Limits::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.is_empty() || self.a.len() != self.b.len() {
            return Err(Error::invalid(
                "fourier",
                "`a` and `b` must be non-empty and of equal length",
            ));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::invalid("omega", "must be > 0"));
        }
        if !self.a0.is_finite() || self.a.iter().chain(&self.b).any(|c| !c.is_finite()) {
            return Err(Error::invalid("fourier", "coefficients must be finite"));
        }
        self.limits.validate()
    }

    pub fn harmonics(&self) -> usize {
        self.a.len()
    }

    pub fn period(&self) -> f64 {
        2.0 * core::f64::consts::PI / self.omega
    }

    /// Unsaturated series value.
    pub fn raw(&self, tau: f64) -> f64 {
        let mut u = 0.5 * self.a0;
        for (k, (a, b)) in self.a.iter().zip(&self.b).enumerate() {
            let (sin, cos) = libm::sincos((k + 1) as f64 * self.omega * tau);
            u += a * cos + b * sin;
        }
        u
    }

    pub fn eval(&self, tau: f64) -> f64 {
        self.limits.clamp(self.raw(tau))
    }

    /// Fraction of one period during which saturation is active, estimated on
    /// `samples` evenly spaced points.
    pub fn saturated_fraction(&self, samples: usize) -> f64 {
        if samples == 0 {
            return 0.0;
        }
        let period = self.period();
        let hits = (0..samples)
            .filter(|&i| {
                let raw = self.raw(period * i as f64 / samples as f64);
                raw < self.limits.min || raw > self.limits.max
            })
            .count();
        hits as f64 / samples as f64
    }
}

impl ControlLaw for FourierControl {
    fn control(&self, tau: f64, _state: &State) -> f64 {
        self.eval(tau)
    }
    fn kind(&self) -> LawKind {
        LawKind::OpenLoop
    }
    fn limits(&self) -> Limits {
        self.limits
    }
}

/// Network input built from a state: `(θ, θ', z')`. The position `z` is not
/// an input.
pub fn network_input(s: &State) -> [f64; 3] {
    [s.theta, s.theta_dot, s.z_dot]
}

/// Scale the state, run the network, undo the target scaling and saturate.
pub fn neural_control(net: &Mlp, s: &State) -> Result<f64> {
    let x = net.scale_input(&network_input(s))?;
    let y = net.forward(&x);
    Ok(net.limits.clamp(net.unscale_target(y)?))
}

/// Closed-loop law backed by a trained network.
#[derive(Debug, Clone)]
pub struct NeuralController {
    net: Mlp,
}

impl NeuralController {
    pub fn new(net: Mlp) -> Result<Self> {
        if !net.is_fitted() {
            return Err(Error::ScalerMissing);
        }
        net.validate()?;
        Ok(NeuralController { net })
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn into_inner(self) -> Mlp {
        self.net
    }
}

impl ControlLaw for NeuralController {
    fn control(&self, _tau: f64, state: &State) -> f64 {
        // Scalers were checked in `new`.
        neural_control(&self.net, state).unwrap_or(0.0)
    }
    fn kind(&self) -> LawKind {
        LawKind::ClosedLoop
    }
    fn limits(&self) -> Limits {
        self.net.limits
    }
}
