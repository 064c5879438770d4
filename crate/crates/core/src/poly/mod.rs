//! Sparse homogeneous and multihomogeneous polynomials, quadratic-surd
//! coefficients, exact norms and heights, and the text serialization used
//! by the CLI.

pub mod block;
pub mod heights;
pub mod homog;
pub mod monomial;
pub mod surd;
pub mod text;

pub use block::BlockPoly;
pub use homog::HomogeneousPoly;
pub use monomial::{monomials_of_degree, Monomial};
pub use surd::QuadraticSurd;
