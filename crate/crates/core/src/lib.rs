pub mod bubbling;
pub mod checks;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod grid;
pub mod identities;
pub mod quadrature;
pub mod torsion;
pub mod tubular;
pub mod vecmath;

pub use error::{Error, Result};
