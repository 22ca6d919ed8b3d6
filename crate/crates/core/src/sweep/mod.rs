//! Parameter sweeps, η optimization and figure datasets.

pub mod figures;
pub mod format;
pub mod optimize;
pub mod runner;
pub mod spec;

pub use figures::{figure, FigureData, FIGURE_IDS};
pub use format::{Cell, Table};
pub use optimize::{optimize_eta, EtaOptResult, EtaOptimizer, EtaSearch};
pub use runner::{run_sweep, scaled_delta, solve_alpha, SweepReport};
pub use spec::{Axis, AxisName, FixedParams, GridPoint, LossSpec, Output, SweepSpec};
