//! Quermassintegrals, curvature functionals and curvature flows of radial
//! graphs over S^1 and S^2.

pub mod error;
pub mod flows;
pub mod geometry;
pub mod harmonics;
pub mod oracle;
pub mod shapes;
pub mod spheregrid;
pub mod symfun;
pub mod verify;

pub use error::{Error, Result};
pub use flows::{DiagnosticsRow, FlowConfig, FlowKind, FlowState, RunOutput};
pub use geometry::{CurvatureBundle, Hypersurface, ShapeReport};
pub use harmonics::HarmonicSpectrum;
pub use shapes::{ShapeSpec, ShapeType};
pub use spheregrid::{build_grid, integrate, DerivativeScheme, GridSpec, Jet, ScalarField, SupNorms};
