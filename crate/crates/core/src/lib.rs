//! Exact and differentiable Euler Characteristic Transforms of geometric
//! simplicial complexes, plus gradient-descent fitting of directions and
//! point coordinates against a target transform.

pub mod complex;
pub mod ect;
pub mod error;
pub mod filtration;
pub mod fixtures;
pub mod io;
pub mod optimize;
pub mod parallel;
pub mod sampling;
pub mod soft;

pub use complex::{normalize_points, normalize_to_unit_ball, GeometricSimplicialComplex, Simplex};
pub use ect::{ecc, ect, ect_distance, EctMatrix, Strategy, ThresholdGrid};
pub use error::{EctError, Result};
pub use filtration::DirectionSet;
pub use parallel::Execution;
pub use soft::{soft_ecc, soft_ect, soft_ect_backward, GradientBundle, SmoothEctMatrix};
