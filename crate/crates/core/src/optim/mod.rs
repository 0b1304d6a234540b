//! Direct minimization of the affine and flow objectives.
//!
//! Both registrations use Adam on the analytic gradients from
//! [`crate::losses`] and return the best iterate seen together with the
//! per-iteration loss trace.

mod adam;
mod affine;
mod flow;
mod pipeline;
mod pyramid;
mod sweep;
mod trace;

pub use adam::{Adam, OptimizerConfig, STALL_WINDOW};
pub use affine::{register_affine, AffineRegistration};
pub use flow::{average_flow_magnitude, register_flow, FlowRegistration, RESIDUAL_LR_SCALE};
pub use pipeline::{register_volume_pipeline, PipelineConfig, PipelineResult, Stage};
pub use pyramid::{downsample, upsample_flow, Pyramid, DEFAULT_LEVELS};
pub use trace::{LossTrace, TraceEntry};
pub use sweep::{alpha_sweep, AlphaSweepRow, DEFAULT_ALPHAS};
