use thiserror::Error;

/// Which coupling pole a parameter point sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pole {
    /// `w^2 = 1` (u = 0): `e^{K1}` diverges.
    WSquaredOne,
    /// `w^2 = q` (u = lambda/2): `e^{K2}`, `xi` and `Delta` diverge.
    WSquaredQ,
}

impl std::fmt::Display for Pole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Pole::WSquaredOne => write!(f, "w^2 = 1"),
            Pole::WSquaredQ => write!(f, "w^2 = q"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole at {0}")]
    Pole(Pole),

    #[error("series error: {0}")]
    Series(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("free energies not stabilized: residual first nonzero at t^{order}")]
    NotStabilized { order: i32 },

    #[error("root continuation failed: {0}")]
    Continuation(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
