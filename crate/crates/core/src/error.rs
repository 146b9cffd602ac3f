use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computed quantity became NaN or infinite.
    #[error("non-finite {quantity} at node {node} (theta = {theta:.6}, phi = {phi:.6})")]
    NonFinite {
        quantity: &'static str,
        node: usize,
        theta: f64,
        phi: f64,
    },

    /// Curvature left the Garding cone where the flow speed requires it.
    #[error("cone exit: sigma_{order} = {value:e} at node {node} (theta = {theta:.6}, phi = {phi:.6})")]
    ConeExit {
        order: usize,
        value: f64,
        node: usize,
        theta: f64,
        phi: f64,
    },

    /// The adaptive step size dropped below the floor.
    #[error("time step underflow at t = {t}: dt = {dt:e}")]
    StepUnderflow { t: f64, dt: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors that come from the numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
