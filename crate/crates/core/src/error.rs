use std::fmt;

/// Errors surfaced by the solvers, the simulator and the experiment harness.
///
/// The variants fall into two families that the CLI maps onto distinct exit
/// codes: configuration problems (bad values, unknown keys, length mismatches)
/// and numerical failures (solver inconsistencies, quadrature that does not
/// converge, oracle non-convergence).
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its domain (e.g. a non-positive distance).
    Domain(String),
    /// A configuration value or file is invalid.
    Config(String),
    /// An internal consistency check of a solver failed.
    Solver(String),
    /// Adaptive quadrature could not meet its tolerance.
    Quadrature { lo: f64, hi: f64, estimate: f64, error: f64 },
    /// An I/O failure while reading configuration or writing output.
    Io(String),
}

impl Error {
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Config(_) | Error::Io(_))
    }

    /// Wraps the message with the sweep point (or other context) that failed.
    pub fn context(self, ctx: impl fmt::Display) -> Self {
        match self {
            Error::Domain(m) => Error::Domain(format!("{ctx}: {m}")),
            Error::Config(m) => Error::Config(format!("{ctx}: {m}")),
            Error::Solver(m) => Error::Solver(format!("{ctx}: {m}")),
            Error::Io(m) => Error::Io(format!("{ctx}: {m}")),
            q @ Error::Quadrature { .. } => Error::Solver(format!("{ctx}: {q}")),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Solver(m) => write!(f, "solver error: {m}"),
            Error::Quadrature { lo, hi, estimate, error } => write!(
                f,
                "quadrature did not converge on [{lo}, {hi}] (estimate {estimate:e}, error {error:e})"
            ),
            Error::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
