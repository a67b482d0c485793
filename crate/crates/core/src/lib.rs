//! Thin-shell elasticity laboratory: the three-dimensional thin-shell energy, the
//! hierarchy of two-dimensional limit functionals, and numerical checks of their
//! energy-scaling laws and isometry constraints.

pub mod error;
pub mod experiments;
pub mod functionals;
pub mod geometry;
pub mod kinematics;
pub mod material;
pub mod report;
pub mod scalar;
pub mod study;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SurfacePatch64 = geometry::SurfacePatch<f64>;
pub type Material64 = material::Material<f64>;
pub type DisplacementField64 = kinematics::DisplacementField<f64>;
pub type DisplacementHierarchy64 = kinematics::DisplacementHierarchy<f64>;
pub type MidsurfaceDeformation64 = kinematics::MidsurfaceDeformation<f64>;
