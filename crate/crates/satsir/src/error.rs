use thiserror::Error;

/// Errors produced by model construction, analysis and the numerical solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or field violated its invariant at construction time.
    #[error("invalid value for `{name}`: {value} ({reason})")]
    InvalidValue {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A quantity that must be nonnegative was negative.
    #[error("`{name}` must be nonnegative, got {value}")]
    Negative { name: &'static str, value: f64 },

    /// A formula's denominator vanished (degenerate parameter combination).
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    /// An integrator produced a non-finite value.
    #[error("non-finite value at grid node {node} (t = {t})")]
    NonFinite { node: usize, t: f64 },

    /// The forward-backward sweep blew up at the given iteration.
    #[error("non-finite value during sweep iteration {iteration}: {source}")]
    SweepBlowUp {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    /// Two objects that must share a time grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),

    /// Simpson's rule needs an odd sample count (even interval count).
    #[error("Simpson's 1/3 rule requires an even interval count, got {intervals} intervals")]
    OddIntervalCount { intervals: usize },

    /// A state passed as an equilibrium does not satisfy H(I) = 0.
    #[error("state is not an equilibrium: |H(I)| relative residual = {residual:e}")]
    NotAnEquilibrium { residual: f64 },

    /// Configuration file problems (I/O, parse, or invariant violation).
    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
