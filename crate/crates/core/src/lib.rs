//! Okounkov bodies, weighted Chebyshev constants and transfinite diameters
//! for algebraic subvarieties of complex affine space.

pub mod algebra;
pub mod chebyshev;
pub mod diameter;
pub mod fixtures;
pub mod ideals;
pub mod hull;
pub mod okounkov;
pub mod series;
pub mod sets;
