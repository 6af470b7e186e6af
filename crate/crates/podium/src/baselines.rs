//! Comparison baselines: the Laplace and Staircase mechanisms.

pub mod laplace;
pub mod staircase;

pub use laplace::Laplace;
pub use staircase::StaircaseShape;
