pub mod bounds;
pub mod dump;
pub mod fields;
pub mod solver;

pub use bounds::{lemma22_bounds_check, Lemma22Report};
pub use fields::{solve_torsion, NormalDerivative, TorsionSolution};
