//! Exact comparisons involving base-2 logarithms.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Largest denominator for which `2^p ≤ m^q` is evaluated with big integers.
const MAX_EXACT_DENOM: u64 = 4096;

/// Outcome of `x ≤ log₂ m`. `exact` is false when the denominator of `x`
/// was too large and the decision fell back to floating point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LogCmp {
    pub holds: bool,
    pub exact: bool,
}

/// Decides `x ≤ log₂ m` for rational `x` and `m ≥ 1`.
pub fn le_log2(x: &BigRational, m: u64) -> LogCmp {
    assert!(m >= 1, "log of zero");
    if !x.is_positive() {
        return LogCmp { holds: true, exact: true };
    }
    let k = 63 - m.leading_zeros() as i64; // floor(log₂ m)
    let kk = BigRational::from_integer(BigInt::from(k));
    if *x <= kk {
        return LogCmp { holds: true, exact: true };
    }
    if *x >= kk + BigRational::from_integer(BigInt::from(1)) {
        return LogCmp { holds: false, exact: true };
    }
    // x = p/q lies strictly between k and k + 1.
    let q = x.denom().to_u64();
    match q {
        Some(q) if q <= MAX_EXACT_DENOM => {
            let p = x.numer().to_u64().expect("bounded numerator");
            let lhs = BigUint::from(1u32) << p as usize;
            let rhs = BigUint::from(m).pow(q as u32);
            LogCmp { holds: lhs <= rhs, exact: true }
        }
        _ => LogCmp {
            holds: x.to_f64().unwrap_or(f64::INFINITY) <= (m as f64).log2(),
            exact: false,
        },
    }
}

/// Decides `lhs ≤ c · (log₂ m + shift)` for `c ≥ 0`.
pub fn le_scaled_log2(lhs: &BigRational, c: &BigRational, m: u64, shift: i64) -> LogCmp {
    if c.is_zero() {
        return LogCmp {
            holds: !lhs.is_positive(),
            exact: true,
        };
    }
    let x = lhs / c - BigRational::from_integer(BigInt::from(shift));
    le_log2(&x, m)
}
