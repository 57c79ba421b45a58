//! Exact construction of the top two degrees of the Voronoi complex of
//! `GL_n(Z)` and `SL_n(Z)`, verification of the canonical top cycle, and an
//! abstract framework for tessellations of cones by finite-stabilizer tiles.

pub mod complex;
pub mod cone;
pub mod dd;
pub mod error;
pub mod forms;
pub mod group;
pub mod homology;
pub mod isometry;
pub mod linalg;
pub mod perfect;
pub mod persist;
pub mod properties;
pub mod serde_util;
pub mod tess;

pub use error::{Error, Result};
pub use forms::{MinVecSet, QForm};
pub use group::{GroupElement, MatGroup};
pub use linalg::{IntMat, RatMat, RatVec, Sign};
