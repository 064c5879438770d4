//! Exact computational machinery for heights of projective points and
//! polynomials over Q and real/imaginary quadratic fields: normalized
//! places and Weil heights, polynomial norms, sphere-measure Monte Carlo,
//! Hilbert functions and weights, Chow forms and their weights, twisted
//! heights with dual-weight reduction, explicit constant formulas, and a
//! census harness that hunts solutions of the product inequality on a
//! projective system and fits hypersurfaces through what it finds.
//!
//! Everything downstream of a random number generator is Monte Carlo and
//! says so in its result type; every other path is exact rational or
//! interval arithmetic with tracked error bounds.

pub mod arith;
pub mod bounds;
pub mod census;
pub mod chow;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod measure;
pub mod poly;
pub mod theight;
pub mod variety;

pub use arith::field::{FieldElement, NumberField};
pub use arith::height::LogHeight;
pub use arith::place::Place;
pub use arith::rational::Rational;
pub use error::CoreError;
