//! capstab-core: stability and Morse-index analysis for minimal surfaces that
//! meet the boundary of a geodesic ball at constant contact angle, in the three
//! constant-curvature ambients (Euclidean, hyperbolic, spherical).
//!
//! The crate is organised along the pipeline:
//!
//! * [`spaceform`]: conformal ball models, Killing and position fields,
//!   curvature of the ambient.
//! * [`surface`]: analytic surface patches (disks, caps, catenoids), meshes,
//!   boundary frames, contact angles, and shape data.
//! * [`discretize`]: finite-element assembly of the stability quadratic form.
//! * [`spectrum`]: Robin eigenproblem, negative counts, Morse-index brackets.
//! * [`identities`]: residual checks of the exact identities behind the
//!   stability arguments, and a finite-difference second variation.
//! * [`topology`]: Euler data, harmonic 1-form bases, index lower bounds.

pub mod discretize;
pub mod error;
pub mod identities;
pub mod quad;
pub mod report;
pub mod sparse;
pub mod spaceform;
pub mod spectrum;
pub mod surface;
pub mod topology;

pub use error::{Error, Result};
pub use spaceform::{AmbientBall, AmbientSpace, SpaceKind};
pub use surface::{Immersion, SurfaceFamily, TriMesh};
