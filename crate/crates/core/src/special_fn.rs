//! Bessel functions of the first kind for small real arguments.

use crate::error::{Error, Result};

/// Largest order accepted by [`bessel_j`].
pub const MAX_ORDER: u32 = 8;

/// Arguments beyond this magnitude are rejected.
pub const MAX_ARGUMENT: f64 = 10.0;

/// Order `n` of a Bessel function `J_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct BesselOrder(u32);

impl BesselOrder {
    pub fn new(n: u32) -> Result<Self> {
        if n > MAX_ORDER {
            return Err(Error::InvalidParameter(format!(
                "Bessel order {n} exceeds the supported maximum {MAX_ORDER}"
            )));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// `J_n(x)` by its power series `Σ_k (−1)^k / (k! (n+k)!) (x/2)^{n+2k}`.
///
/// Terms are summed until one drops below `1e-18` relative to the running sum.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    if !(x.abs() <= MAX_ARGUMENT) {
        return Err(Error::Domain {
            x,
            limit: MAX_ARGUMENT,
        });
    }
    let n = order.0;
    // parity is applied exactly instead of relying on odd powers of a negative half-argument
    let sign = if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let half = 0.5 * x.abs();
    let mut term = (1..=n).fold(1.0, |acc, j| acc * half / f64::from(j));
    if term == 0.0 {
        return Ok(0.0);
    }
    let q = half * half;
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= -q / (f64::from(k) * f64::from(n + k));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) || k > 200 {
            break;
        }
    }
    Ok(sign * sum)
}

/// Convenience for the orders 0, 1, 2 used by the semiclassical tiers.
pub(crate) fn j012(x: f64) -> Result<[f64; 3]> {
    Ok([
        bessel_j(BesselOrder(0), x)?,
        bessel_j(BesselOrder(1), x)?,
        bessel_j(BesselOrder(2), x)?,
    ])
}
