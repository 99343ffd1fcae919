//! Bessel functions of the first kind for the small modulation indices used
//! by the sideband parameter maps.

use crate::error::{Error, Result};

pub const MAX_ORDER: i32 = 64;
pub const MAX_ARGUMENT: f64 = 10.0;

/// Integer Bessel order, `|m| <= 64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BesselOrder(i32);

impl BesselOrder {
    pub fn new(m: i32) -> Result<Self> {
        if m.abs() > MAX_ORDER {
            return Err(Error::BesselOrder(m));
        }
        Ok(Self(m))
    }

    pub fn get(self) -> i32 {
        self.0
    }
}

/// `J_m(mu)` by the ascending series with Neumaier-compensated summation.
pub fn bessel_j(m: BesselOrder, mu: f64) -> Result<f64> {
    if !mu.is_finite() || mu.abs() > MAX_ARGUMENT {
        return Err(Error::BesselArgument(mu));
    }
    let order = m.get().unsigned_abs();
    let value = series(order, mu);
    Ok(if m.get() < 0 && order % 2 == 1 { -value } else { value })
}

/// Shorthand for orders known to be in range.
pub fn j(m: i32, mu: f64) -> f64 {
    bessel_j(BesselOrder::new(m).expect("order in range"), mu).expect("argument in range")
}

fn series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // leading term (x/2)^m / m!
    let mut term = 1.0;
    for k in 1..=order {
        term *= half / k as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let q = -half * half;
    let mut sum = term;
    let mut comp = 0.0;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= q / (k as f64 * (k + order) as f64);
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        // terms decrease monotonically once k exceeds |x|/2
        if k as f64 > half.abs() && term.abs() <= f64::EPSILON * 1e-3 * sum.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if k > 500 {
            break;
        }
    }
    sum + comp
}

/// `Σ_{|m| > m_keep} |J_m(mu)|` summed out to `|m| = 64`.
///
/// Bounds the amplitude of the Jacobi–Anger terms dropped when only the
/// harmonics `|m| <= m_keep` are retained.
pub fn jacobi_anger_truncation_error(mu: f64, m_keep: u32) -> Result<f64> {
    if !(mu >= 0.0) {
        return Err(Error::BesselArgument(mu));
    }
    if mu > MAX_ARGUMENT {
        return Err(Error::BesselArgument(mu));
    }
    let mut total = 0.0;
    for m in (m_keep as i32 + 1)..=MAX_ORDER {
        // |J_{-m}| = |J_m|
        total += 2.0 * j(m, mu).abs();
    }
    Ok(total)
}
