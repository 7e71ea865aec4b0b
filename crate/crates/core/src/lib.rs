//! Systoles of cube-dual tesselated hyperbolic surfaces: combinatorics, symmetry,
//! minimal filling sets, homological rank and the Morse index of the systole function.

pub mod bits;
pub mod cli;
pub mod error;
pub mod filling;
pub mod homology;
pub mod hyperbolic;
pub mod surface;
pub mod symmetry;

pub use bits::Bits;
pub use error::{Error, Result};
pub use surface::{build_surface, SurfaceModel, SurfaceParams, Systole};
