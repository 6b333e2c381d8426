//! Analysis of smooth planar involutions: parsing maps, checking the
//! involution property, spectral hypotheses, the standard linearizing map
//! and the foliations it pulls back.

pub mod analysis;
pub mod expr;
pub mod foliation;
pub mod gallery;
pub mod involution;
pub mod linalg2;
pub mod linearize;
pub mod render;
mod sampling;
pub mod spectral;

pub use analysis::{
    analyze, foliate, AnalysisError, AnalysisOptions, AnalysisReport, MapSpec, Phase,
};
pub use expr::{parse, PlanarMap, PlaneMap};
pub use linalg2::{Mat2, Point};
