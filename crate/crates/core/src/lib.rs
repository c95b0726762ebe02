mod error;
pub mod numerics;

pub use error::{Error, Result};
pub use numerics::{CMatrix, Tolerances, C64};
pub mod model;
pub mod scattering;
pub mod steady;
pub mod transport;
pub mod entropy;
pub mod perturbation;
pub mod oracle;
pub mod presets;
