use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("capsule lifted off the surface at tau={tau} (r_y={r_y})")]
    LiftOff { tau: f64, r_y: f64 },

    #[error("slip-mode coefficient matrix is degenerate at tau={tau} (det={det})")]
    Degenerate { tau: f64, det: f64 },

    #[error("contact mode {mode} is inconsistent with z_dot={z_dot}")]
    ModeContract { mode: &'static str, z_dot: f64 },

    #[error("simulation diverged at tau={tau}")]
    Divergence { tau: f64 },

    #[error("R^2 is undefined for a constant target")]
    ConstantTarget,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("network scalers are not fitted")]
    ScalerMissing,

    #[error("training diverged at epoch {epoch}")]
    TrainingDiverged { epoch: usize },

    #[error("trial {trial} failed: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
