//! Volumetric registration by direct optimization.
//!
//! A 12-parameter affine transform is fitted in 3D by minimizing a
//! correlation loss, then each axial slice is refined by a coarse-to-fine
//! dense flow that minimizes a Charbonnier photometric term, a correlation
//! term and a Charbonnier smoothness term. Both stages are plain Adam on
//! analytic gradients: no networks are trained.
//!
//! The [`metrics`] module scores registrations for structural integrity,
//! spatial alignment and intensity similarity, and [`phantom`] builds
//! synthetic heads with exact masks and known transforms for testing.

pub mod cli;
pub mod error;
pub mod io;
pub mod losses;
pub mod metrics;
pub mod optim;
pub mod phantom;
pub mod resample;
pub mod volume;

pub use error::{Error, Result};
pub use losses::LossWeights;
pub use optim::{OptimizerConfig, Pyramid};
pub use resample::{AffineTransform, FlowField};
pub use volume::{LabelMask, Slice, Volume};
