use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cavity pinches shut: J = {width:.6e} at u = {at:.6}")]
    Pinched { at: f64, width: f64 },

    #[error("interface width {found} differs from lead width {expected}")]
    InterfaceMismatch { expected: f64, found: f64 },

    #[error("point ({x}, {y}) lies outside the cavity")]
    OutsideCavity { x: f64, y: f64 },

    #[error("eigensolver failed to converge")]
    EigenSolver,

    #[error("energy {energy} sits on channel threshold {channel}")]
    Threshold { energy: f64, channel: usize },

    #[error("energy {energy} is within {distance:.3e} of cavity pole {pole}")]
    NearPole {
        energy: f64,
        pole: f64,
        distance: f64,
    },

    #[error("no open channels at energy {0}")]
    NoOpenChannels(f64),

    #[error("ill-conditioned 1 + iR (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("k-grid is not uniform")]
    NonUniformGrid,

    #[error("window has only {open} open channels, {requested} requested")]
    TooFewChannels { open: usize, requested: usize },

    #[error("quadrature did not converge: q and 2q differ by {0:.3e}")]
    QuadratureNotConverged(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
