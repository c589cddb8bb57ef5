//! Simulation, Gaussian pseudo-maximum-likelihood estimation and inference for
//! ARCH(infinity) volatility models with parametric weight families.

pub mod cli;
pub mod error;
pub mod estimator;
pub mod inference;
pub mod innovations;
pub mod likelihood;
pub mod montecarlo;
pub mod params;
pub mod process;
pub mod series;
pub mod special;
pub mod stats;
pub mod weights;

pub use error::{Error, Result};
pub use estimator::{fit, FitOptions, FitResult};
pub use inference::{sandwich, InferenceResult};
pub use innovations::GedShape;
pub use likelihood::{sigma_bar_sq, Likelihood};
pub use montecarlo::{run_mc, MCConfig, MCReport};
pub use params::{ParamBounds, ParamVector};
pub use process::{moment_condition, simulate, MomentCondition, SimConfig, Verdict};
pub use series::Series;
pub use weights::{weights, Family, ModelSpec, ShapeExponents};
