use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};

pub fn factorial(n: u32) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `∏ nᵢ! / ∏ dⱼ!` in exact arithmetic.
pub fn factorial_ratio(numerators: &[i64], denominators: &[i64]) -> Result<BigRational> {
    if let Some(&n) = numerators.iter().chain(denominators).find(|&&n| n < 0) {
        return Err(Error::NegativeArgument(n));
    }
    let num = numerators.iter().fold(BigInt::one(), |acc, &n| acc * factorial(n as u32));
    let den = denominators.iter().fold(BigInt::one(), |acc, &n| acc * factorial(n as u32));
    Ok(BigRational::new(num, den))
}
