//! Exact scalar substrate: rationals with prime-factorization helpers,
//! fixed-point high-precision reals with tracked error, quadratic number
//! fields, normalized places, and logarithmic heights.

pub mod field;
pub mod height;
pub mod place;
pub mod rational;
pub mod real;
