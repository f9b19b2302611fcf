//! Exact scalars, base polynomials, fiber monomials and wedge words.

mod factorial;
mod poly;
mod scalar;
mod wedge;

pub use factorial::{factorial, factorial_ratio};
pub use poly::{BasePolynomial, QExponents};
pub use scalar::GaussianRational;
pub use wedge::{wedge_normalize, FiberMonomial, WedgeWord};
