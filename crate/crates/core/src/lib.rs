//! Sample-efficient black-box optimisation with a warped Gaussian-process
//! surrogate.
//!
//! The pieces, bottom up:
//!
//! * [`design_space`]: typed search spaces and their encoding into the unit cube.
//! * [`transforms`]: Box-Cox / Yeo-Johnson output transforms and Kumaraswamy input warping.
//! * [`surrogate`]: Matérn-5/2 ARD Gaussian process on warped inputs and transformed labels.
//! * [`acquisition`]: EI, PI and UCB plus the additive-noise robust wrapper.
//! * [`moo`]: NSGA-II used to maximise the three acquisitions jointly.
//! * [`optimizer`]: the ask/tell loop tying it all together.
//! * [`stats`]: Levene, Fligner-Killeen and paired t-tests with their special functions.
//! * [`bench`]: synthetic black boxes, the experiment runner and normalised scores.
//!
//! The optimiser maximises. Benchmark losses are negated before they reach it.

pub mod acquisition;
pub mod bench;
pub mod design_space;
mod error;
pub mod moo;
pub mod optim;
pub mod optimizer;
pub mod rng;
pub mod stats;
pub mod surrogate;
pub mod transforms;

pub use acquisition::{AcquisitionContext, AcquisitionKind};
pub use design_space::{Configuration, DesignSpace, Kind, Parameter, Scale, Value};
pub use error::{Error, Result};
pub use moo::{Individual, MooConfig};
pub use optimizer::{Batch, Hebo, HeboConfig};
pub use surrogate::{FitConfig, FittedGP, KernelParams};
pub use transforms::{InputWarp, OutputTransform, TransformFamily};
