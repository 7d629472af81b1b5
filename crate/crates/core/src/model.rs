//! Dimensionless capsule-pendulum dynamics.
//!
//! The pendulum angle `theta` and capsule position `z` obey
//!
//! ```text
//! [ 1        -cos θ ] [θ'']   [ sin θ - ρθ - νθ' + u ]
//! [ -cos θ    γ + 1 ] [z''] = [ -θ'² sin θ - f_z     ]
//! ```
//!
//! with contact force `r_y = (γ+1) - θ'' sin θ - θ'² cos θ`, horizontal load
//! `r_z = θ'' cos θ - θ'² sin θ` and Coulomb friction `f_z` chosen by the
//! contact mode. In slip the friction depends on `r_y`, which depends on
//! `θ''`, so the slip system is solved with a modified coefficient matrix.

use crate::{Error, Result};

/// Velocities with `|z'|` at or below this are treated as "at rest".
pub const STICK_VEL_TOL: f64 = 1e-9;

/// Physical (dimensional) parameters of the drive.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DimensionalParams {
    /// Capsule mass (kg).
    pub capsule_mass: f64,
    /// Pendulum mass (kg).
    pub pendulum_mass: f64,
    /// Pendulum length (m).
    pub length: f64,
    /// Rotational spring stiffness (N·m/rad).
    pub stiffness: f64,
    /// Rotational damping (N·m·s/rad).
    pub damping: f64,
    /// Gravitational acceleration (m/s²).
    pub gravity: f64,
}

/// Result of [`DimensionalParams::nondimensionalize`]: everything except the
/// friction coefficient, which is dimensionless already.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nondimensional {
    pub gamma: f64,
    pub rho: f64,
    pub nu: f64,
    /// `Ω = √(g/l)`; physical time is `t = τ / Ω` and `ẋ = Ω x'`, `ẍ = Ω² x''`.
    pub time_scale: f64,
}

impl Nondimensional {
    pub fn with_friction(self, mu: f64) -> Result<CapsuleParams> {
        let p = CapsuleParams {
            gamma: self.gamma,
            rho: self.rho,
            nu: self.nu,
            mu,
        };
        p.validate()?;
        Ok(p)
    }
}

impl DimensionalParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("capsule_mass", self.capsule_mass),
            ("pendulum_mass", self.pendulum_mass),
            ("length", self.length),
            ("stiffness", self.stiffness),
            ("damping", self.damping),
            ("gravity", self.gravity),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, "must be finite and strictly positive"));
            }
        }
        Ok(())
    }

    pub fn nondimensionalize(&self) -> Result<Nondimensional> {
        self.validate()?;
        let omega = libm::sqrt(self.gravity / self.length);
        let m = self.pendulum_mass;
        let l = self.length;
        Ok(Nondimensional {
            gamma: self.capsule_mass / m,
            rho: self.stiffness / (m * omega * omega * l * l),
            nu: self.damping / (m * omega * l * l),
            time_scale: omega,
        })
    }
}

/// Dimensionless system parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct CapsuleParams {
    /// Mass ratio M/m.
    pub gamma: f64,
    /// Spring stiffness.
    pub rho: f64,
    /// Damping.
    pub nu: f64,
    /// Nominal friction coefficient.
    pub mu: f64,
}

impl Default for CapsuleParams {
    fn default() -> Self {
        Self::NOMINAL
    }
}

impl CapsuleParams {
    pub const NOMINAL: CapsuleParams = CapsuleParams {
        gamma: 10.0,
        rho: 2.5,
        nu: 1.0,
        mu: 0.3,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::invalid("gamma", "must be > 0"));
        }
        if !(self.rho.is_finite() && self.rho >= 0.0) {
            return Err(Error::invalid("rho", "must be >= 0"));
        }
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            return Err(Error::invalid("nu", "must be >= 0"));
        }
        if !(self.mu >= 0.0 && self.mu < 1.0) {
            return Err(Error::invalid("mu", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Instantaneous configuration of the system.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct State {
    pub tau: f64,
    pub theta: f64,
    pub theta_dot: f64,
    pub z: f64,
    pub z_dot: f64,
}

impl State {
    pub fn is_finite(&self) -> bool {
        self.tau.is_finite()
            && self.theta.is_finite()
            && self.theta_dot.is_finite()
            && self.z.is_finite()
            && self.z_dot.is_finite()
    }
}

/// Direction of sliding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Direction {
    Negative,
    Positive,
}

impl Direction {
    /// Sign of a nonzero value; zero maps to `Positive`.
    pub fn of(v: f64) -> Self {
        if v < 0.0 {
            Direction::Negative
        } else {
            Direction::Positive
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Direction::Negative => -1.0,
            Direction::Positive => 1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Negative => Direction::Positive,
            Direction::Positive => Direction::Negative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ContactMode {
    Stick,
    Slip(Direction),
}

impl ContactMode {
    /// Short label used in trajectory files: `stick`, `slip+` or `slip-`.
    pub fn label(self) -> &'static str {
        match self {
            ContactMode::Stick => "stick",
            ContactMode::Slip(Direction::Positive) => "slip+",
            ContactMode::Slip(Direction::Negative) => "slip-",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "stick" => Some(ContactMode::Stick),
            "slip+" => Some(ContactMode::Slip(Direction::Positive)),
            "slip-" => Some(ContactMode::Slip(Direction::Negative)),
            _ => None,
        }
    }
}

/// Accelerations and forces at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinetics {
    pub theta_ddot: f64,
    pub z_ddot: f64,
    /// Contact (normal) force.
    pub r_y: f64,
    /// Horizontal load transmitted by the pendulum.
    pub r_z: f64,
    /// Friction force.
    pub f_z: f64,
    pub mode: ContactMode,
}

/// Time derivative of `(θ, θ', z, z')`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateRate {
    pub theta: f64,
    pub theta_dot: f64,
    pub z: f64,
    pub z_dot: f64,
}

/// Generalized pendulum torque: the right-hand side of the first equation.
fn pendulum_drive(s: &State, u: f64, p: &CapsuleParams) -> f64 {
    libm::sin(s.theta) - p.rho * s.theta - p.nu * s.theta_dot + u
}

fn contact_force(s: &State, theta_ddot: f64, p: &CapsuleParams) -> f64 {
    let (sin, cos) = libm::sincos(s.theta);
    (p.gamma + 1.0) - theta_ddot * sin - s.theta_dot * s.theta_dot * cos
}

fn horizontal_load(s: &State, theta_ddot: f64) -> f64 {
    let (sin, cos) = libm::sincos(s.theta);
    theta_ddot * cos - s.theta_dot * s.theta_dot * sin
}

/// What to do when the contact force is not positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LiftOffPolicy {
    /// Fail with [`Error::LiftOff`].
    #[default]
    Reject,
    /// Keep the permanent-contact equations as written, including the
    /// friction law `f_z = μ r_y sgn z'` with `r_y ≤ 0`.
    PermanentContact,
}

fn check_contact(s: &State, r_y: f64, policy: LiftOffPolicy) -> Result<()> {
    if r_y > 0.0 || policy == LiftOffPolicy::PermanentContact {
        Ok(())
    } else {
        Err(Error::LiftOff { tau: s.tau, r_y })
    }
}

/// Kinetics with the capsule held at rest by static friction.
pub fn stick_kinetics(s: &State, u: f64, p: &CapsuleParams) -> Result<Kinetics> {
    stick_kinetics_with(s, u, p, LiftOffPolicy::Reject)
}

/// [`stick_kinetics`] under an explicit lift-off policy.
pub fn stick_kinetics_with(
    s: &State,
    u: f64,
    p: &CapsuleParams,
    policy: LiftOffPolicy,
) -> Result<Kinetics> {
    let theta_ddot = pendulum_drive(s, u, p);
    let r_y = contact_force(s, theta_ddot, p);
    check_contact(s, r_y, policy)?;
    let r_z = horizontal_load(s, theta_ddot);
    Ok(Kinetics {
        theta_ddot,
        z_ddot: 0.0,
        r_y,
        r_z,
        f_z: r_z,
        mode: ContactMode::Stick,
    })
}

/// Kinetics while sliding in `direction` with kinetic friction `mu_eff`.
///
/// Substituting `f_z = μ s r_y(θ'')` into the second equation moves the
/// `θ''` dependence to the left:
///
/// ```text
/// [ 1                   -cos θ ] [θ'']   [ sin θ - ρθ - νθ' + u               ]
/// [ -cos θ - μ s sin θ   γ + 1 ] [z''] = [ -θ'² sin θ - μ s (γ+1 - θ'² cos θ) ]
/// ```
///
/// with determinant `(γ+1) - cos θ (cos θ + μ s sin θ) ≥ γ - μ/2`.
pub fn slip_kinetics(
    s: &State,
    u: f64,
    direction: Direction,
    mu_eff: f64,
    p: &CapsuleParams,
) -> Result<Kinetics> {
    slip_kinetics_with(s, u, direction, mu_eff, p, LiftOffPolicy::Reject)
}

/// [`slip_kinetics`] under an explicit lift-off policy.
pub fn slip_kinetics_with(
    s: &State,
    u: f64,
    direction: Direction,
    mu_eff: f64,
    p: &CapsuleParams,
    policy: LiftOffPolicy,
) -> Result<Kinetics> {
    let sign = direction.sign();
    let (sin, cos) = libm::sincos(s.theta);
    let w2 = s.theta_dot * s.theta_dot;
    let ms = mu_eff * sign;

    let a21 = -cos - ms * sin;
    let a22 = p.gamma + 1.0;
    let rhs1 = pendulum_drive(s, u, p);
    let rhs2 = -w2 * sin - ms * (p.gamma + 1.0 - w2 * cos);
    let det = a22 + cos * a21;
    if !(det > 0.0) {
        return Err(Error::Degenerate { tau: s.tau, det });
    }

    let theta_ddot = (rhs1 * a22 + cos * rhs2) / det;
    let z_ddot = (rhs2 - a21 * rhs1) / det;
    let r_y = contact_force(s, theta_ddot, p);
    check_contact(s, r_y, policy)?;
    let r_z = horizontal_load(s, theta_ddot);
    Ok(Kinetics {
        theta_ddot,
        z_ddot,
        r_y,
        r_z,
        f_z: ms * r_y,
        mode: ContactMode::Slip(direction),
    })
}

/// Select the contact regime at `s`.
///
/// A moving capsule slips in the direction of motion. A capsule at rest
/// sticks while `|r_z| < μ r_y` and otherwise breaks away along `r_z`.
pub fn mode_decision(
    s: &State,
    u: f64,
    mu_eff: f64,
    p: &CapsuleParams,
    policy: LiftOffPolicy,
) -> Result<ContactMode> {
    if s.z_dot.abs() > STICK_VEL_TOL {
        return Ok(ContactMode::Slip(Direction::of(s.z_dot)));
    }
    let k = stick_kinetics_with(s, u, p, policy)?;
    if k.r_z.abs() < mu_eff * k.r_y {
        Ok(ContactMode::Stick)
    } else {
        Ok(ContactMode::Slip(Direction::of(k.r_z)))
    }
}

/// State derivative for the integrator in a fixed contact mode.
///
/// In stick the capsule velocity is held at exactly zero.
pub fn eval_dynamics(
    s: &State,
    u: f64,
    mode: ContactMode,
    mu_eff: f64,
    p: &CapsuleParams,
    policy: LiftOffPolicy,
) -> Result<(StateRate, Kinetics)> {
    let k = match mode {
        ContactMode::Stick => {
            if s.z_dot.abs() > STICK_VEL_TOL {
                return Err(Error::ModeContract {
                    mode: "stick",
                    z_dot: s.z_dot,
                });
            }
            stick_kinetics_with(s, u, p, policy)?
        }
        ContactMode::Slip(d) => slip_kinetics_with(s, u, d, mu_eff, p, policy)?,
    };
    let z_rate = match mode {
        ContactMode::Stick => 0.0,
        ContactMode::Slip(_) => s.z_dot,
    };
    Ok((
        StateRate {
            theta: s.theta_dot,
            theta_dot: k.theta_ddot,
            z: z_rate,
            z_dot: k.z_ddot,
        },
        k,
    ))
}

/// Residuals of the two equations of motion and the contact-force relation
/// for a computed [`Kinetics`]. All three vanish for a consistent solve.
pub fn equation_residuals(s: &State, u: f64, k: &Kinetics, p: &CapsuleParams) -> [f64; 3] {
    let (sin, cos) = libm::sincos(s.theta);
    let w2 = s.theta_dot * s.theta_dot;
    let row1 = k.theta_ddot - cos * k.z_ddot - pendulum_drive(s, u, p);
    let row2 = -cos * k.theta_ddot + (p.gamma + 1.0) * k.z_ddot - (-w2 * sin - k.f_z);
    let contact = k.r_y - ((p.gamma + 1.0) - k.theta_ddot * sin - w2 * cos);
    [row1, row2, contact]
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;
    use proptest::prelude::*;

    const P: CapsuleParams = CapsuleParams::NOMINAL;
    const R: LiftOffPolicy = LiftOffPolicy::Reject;

    fn at(theta: f64, theta_dot: f64, z_dot: f64) -> State {
        State {
            theta,
            theta_dot,
            z_dot,
            ..State::default()
        }
    }

    #[test]
    fn nondimensionalize_examples() {
        let dim = DimensionalParams {
            capsule_mass: 1.0,
            pendulum_mass: 0.1,
            length: 0.0981,
            stiffness: 0.2405903,
            damping: 0.1,
            gravity: 9.81,
        };
        let nd = dim.nondimensionalize().unwrap();
        assert!((nd.time_scale - 10.0).abs() < 1e-12);
        assert!((nd.gamma - 10.0).abs() < 1e-12);
        assert!((nd.rho - 2.5).abs() < 1e-6);

        // round trip rho -> k -> rho
        let k = 2.5 * 0.1 * 100.0 * 0.0981 * 0.0981;
        let nd2 = DimensionalParams { stiffness: k, ..dim }.nondimensionalize().unwrap();
        assert!((nd2.rho - 2.5).abs() < 1e-12);

        let same = DimensionalParams { capsule_mass: 0.1, ..dim }.nondimensionalize().unwrap();
        assert_eq!(same.gamma, 1.0);

        let p = nd.with_friction(0.3).unwrap();
        assert_eq!(p.mu, 0.3);
    }

    #[test]
    fn nondimensionalize_rejects_nonpositive() {
        let dim = DimensionalParams {
            capsule_mass: 1.0,
            pendulum_mass: 0.0,
            length: 1.0,
            stiffness: 1.0,
            damping: 1.0,
            gravity: 9.81,
        };
        assert!(matches!(
            dim.nondimensionalize(),
            Err(Error::InvalidParameter { name: "pendulum_mass", .. })
        ));
    }

    #[test]
    fn params_validation() {
        assert!(P.validate().is_ok());
        assert!(CapsuleParams { mu: 1.0, ..P }.validate().is_err());
        assert!(CapsuleParams { gamma: 0.0, ..P }.validate().is_err());
        assert!(CapsuleParams { rho: -1.0, ..P }.validate().is_err());
    }

    #[test]
    fn stick_examples() {
        let k = stick_kinetics(&at(0.0, 0.0, 0.0), 0.0, &P).unwrap();
        assert_eq!((k.theta_ddot, k.r_z, k.r_y, k.f_z), (0.0, 0.0, 11.0, 0.0));

        let k = stick_kinetics(&at(0.0, 0.0, 0.0), 1.0, &P).unwrap();
        assert_eq!((k.theta_ddot, k.r_z, k.r_y), (1.0, 1.0, 11.0));

        let k = stick_kinetics(&at(FRAC_PI_2, 0.0, 0.0), 0.0, &P).unwrap();
        assert!((k.theta_ddot - (1.0 - 2.5 * FRAC_PI_2)).abs() < 1e-12);
        assert!((k.theta_ddot + 2.92699).abs() < 1e-5);
        assert!((k.r_y - 13.92699).abs() < 1e-5);
        assert!(k.r_z.abs() < 1e-12);
    }

    #[test]
    fn slip_examples() {
        let s = at(0.0, 0.0, 0.0);
        let k = slip_kinetics(&s, 4.0, Direction::Positive, 0.3, &P).unwrap();
        assert!((k.r_y - 11.0).abs() < 1e-12);
        assert!((k.f_z - 3.3).abs() < 1e-12);
        assert!((k.theta_ddot - 4.07).abs() < 1e-12);
        assert!((k.z_ddot - 0.07).abs() < 1e-12);

        let k = slip_kinetics(&s, 4.0, Direction::Positive, 0.0, &P).unwrap();
        assert!((k.theta_ddot - 4.4).abs() < 1e-12);
        assert!((k.z_ddot - 0.4).abs() < 1e-12);

        let k = slip_kinetics(&s, 4.0, Direction::Negative, 0.3, &P).unwrap();
        assert!((k.f_z + 3.3).abs() < 1e-12);
        assert!((k.theta_ddot - 4.73).abs() < 1e-12);
        assert!((k.z_ddot - 0.73).abs() < 1e-12);
    }

    #[test]
    fn lift_off_is_an_error() {
        // A light capsule with a fast pendulum at the top of its swing.
        let light = CapsuleParams { gamma: 0.1, ..P };
        let s = at(0.0, 5.0, 0.0);
        assert!(matches!(stick_kinetics(&s, 0.0, &light), Err(Error::LiftOff { .. })));
        assert!(matches!(
            slip_kinetics(&s, 0.0, Direction::Positive, 0.3, &light),
            Err(Error::LiftOff { .. })
        ));
        let k = stick_kinetics_with(&s, 0.0, &light, LiftOffPolicy::PermanentContact).unwrap();
        assert!(k.r_y < 0.0);
        let k = slip_kinetics_with(&s, 0.0, Direction::Positive, 0.3, &light, LiftOffPolicy::PermanentContact)
            .unwrap();
        assert!((k.f_z - 0.3 * k.r_y).abs() < 1e-12);
    }

    #[test]
    fn mode_decision_examples() {
        assert_eq!(
            mode_decision(&at(0.0, 0.0, 0.5), 0.0, 0.3, &P, R).unwrap(),
            ContactMode::Slip(Direction::Positive)
        );
        assert_eq!(
            mode_decision(&at(0.0, 0.0, -0.5), 0.0, 0.3, &P, R).unwrap(),
            ContactMode::Slip(Direction::Negative)
        );
        assert_eq!(mode_decision(&at(0.0, 0.0, 0.0), 1.0, 0.3, &P, R).unwrap(), ContactMode::Stick);
        assert_eq!(
            mode_decision(&at(0.0, 0.0, 0.0), 4.0, 0.3, &P, R).unwrap(),
            ContactMode::Slip(Direction::Positive)
        );
        assert_eq!(
            mode_decision(&at(0.0, 0.0, 0.0), -4.0, 0.3, &P, R).unwrap(),
            ContactMode::Slip(Direction::Negative)
        );
        // |r_z| == μ r_y exactly: 0.25 * 12 = 3 and u = 3 gives r_z = 3.
        let p = CapsuleParams { gamma: 11.0, mu: 0.25, ..P };
        assert_eq!(
            mode_decision(&at(0.0, 0.0, 0.0), 3.0, 0.25, &p, R).unwrap(),
            ContactMode::Slip(Direction::Positive)
        );
    }

    #[test]
    fn eval_dynamics_examples() {
        let zero = State::default();
        let (rate, _) = eval_dynamics(&zero, 0.0, ContactMode::Stick, 0.3, &P, R).unwrap();
        assert_eq!(rate, StateRate::default());

        let (rate, _) =
            eval_dynamics(&zero, 4.0, ContactMode::Slip(Direction::Positive), 0.3, &P, R).unwrap();
        assert_eq!(rate.theta, 0.0);
        assert!((rate.theta_dot - 4.07).abs() < 1e-12);
        assert_eq!(rate.z, 0.0);
        assert!((rate.z_dot - 0.07).abs() < 1e-12);

        let moving = at(0.0, 0.0, 0.3);
        assert!(matches!(
            eval_dynamics(&moving, 0.0, ContactMode::Stick, 0.3, &P, R),
            Err(Error::ModeContract { .. })
        ));
    }

    #[test]
    fn determinant_bounds() {
        for i in 0..=1000 {
            let theta = -10.0 + 20.0 * i as f64 / 1000.0;
            let (sin, cos) = libm::sincos(theta);
            assert!((P.gamma + 1.0) - cos * cos >= P.gamma);
            for s in [-1.0, 1.0] {
                let det = (P.gamma + 1.0) - cos * (cos + 0.5 * s * sin);
                assert!(det >= P.gamma - 0.5 - 1e-12);
            }
        }
    }

    fn state_strategy() -> impl Strategy<Value = State> {
        (-3.5f64..3.5, -4.0f64..4.0, -2.0f64..2.0, -1.0f64..1.0).prop_map(
            |(theta, theta_dot, z, z_dot)| State {
                tau: 0.0,
                theta,
                theta_dot,
                z,
                z_dot,
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn stick_consistency(s in state_strategy(), u in -4.0f64..4.0) {
            let k = stick_kinetics_with(&s, u, &P, LiftOffPolicy::PermanentContact).unwrap();
            prop_assert_eq!(k.z_ddot, 0.0);
            prop_assert_eq!(k.f_z, k.r_z);
        }

        #[test]
        fn slip_is_dissipative(s in state_strategy(), u in -4.0f64..4.0, mu in 0.0f64..0.5, pos in any::<bool>()) {
            let d = if pos { Direction::Positive } else { Direction::Negative };
            let k = match slip_kinetics(&s, u, d, mu, &P) {
                Err(Error::LiftOff { .. }) => return Err(TestCaseError::reject("lift-off")),
                k => k.unwrap(),
            };
            prop_assert!(k.r_y > 0.0);
            prop_assert!(k.f_z * d.sign() >= 0.0);
        }

        #[test]
        fn slip_mirror_symmetry(s in state_strategy(), u in -4.0f64..4.0, mu in 0.0f64..0.5, pos in any::<bool>()) {
            let d = if pos { Direction::Positive } else { Direction::Negative };
            let mirrored = State { theta: -s.theta, theta_dot: -s.theta_dot, ..s };
            let any = LiftOffPolicy::PermanentContact;
            let a = slip_kinetics_with(&s, u, d, mu, &P, any).unwrap();
            let b = slip_kinetics_with(&mirrored, -u, d.reversed(), mu, &P, any).unwrap();
            prop_assert!((a.theta_ddot + b.theta_ddot).abs() < 1e-12);
            prop_assert!((a.z_ddot + b.z_ddot).abs() < 1e-12);
            prop_assert!((a.r_z + b.r_z).abs() < 1e-12);
            prop_assert!((a.f_z + b.f_z).abs() < 1e-12);
            prop_assert!((a.r_y - b.r_y).abs() < 1e-12);
        }
    }
}
