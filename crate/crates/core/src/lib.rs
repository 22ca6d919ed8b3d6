//! Phase estimation with photon-catalyzed squeezed vacuum in a Mach-Zehnder
//! interferometer with parity detection.

pub mod catalysis;
pub mod engine;
pub mod error;
pub mod ideal;
pub mod lossy;
pub mod oracle;
pub mod series;
pub mod sweep;

pub use catalysis::{CatalysisKernel, SystemParams};
pub use engine::{ClosedForm, EngineKind, PhaseEngine};
pub use error::{Error, Result};
pub use lossy::{LossChannel, LossConfig};
pub use oracle::FockOracle;
pub use series::BiSeries;
