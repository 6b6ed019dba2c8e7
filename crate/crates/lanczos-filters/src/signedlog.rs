//! Sign/log-magnitude arithmetic.
//!
//! The determinant recurrences grow or shrink like products of eigenvalues,
//! which silently leave the `f64` range long before the quantities that
//! matter (ratios of them) do. Every recurrence in [`crate::tridiag`] is
//! therefore carried both in plain doubles and in this representation, and
//! ratio-consuming code switches to the log track when the plain track
//! leaves a safe magnitude window.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Magnitude window inside which plain-double ratios are trusted.
pub const PLAIN_SAFE_MAX: f64 = 1e250;
pub const PLAIN_SAFE_MIN: f64 = 1e-250;

/// A real number stored as `sign * exp(ln)`.
///
/// `sign` is -1, 0 or 1; zero is canonically `(0, -inf)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog {
    sign: i8,
    ln: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        ln: f64::NEG_INFINITY,
    };
    pub const ONE: SignedLog = SignedLog { sign: 1, ln: 0.0 };

    pub fn new(x: f64) -> Self {
        debug_assert!(!x.is_nan());
        if x == 0.0 {
            SignedLog::ZERO
        } else {
            SignedLog {
                sign: if x > 0.0 { 1 } else { -1 },
                ln: x.abs().ln(),
            }
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    /// Natural log of the magnitude (`-inf` for zero).
    pub fn ln_abs(self) -> f64 {
        self.ln
    }

    /// Convert back to a double. Overflows to signed infinity and
    /// underflows to zero; callers that care use `ln_abs` instead.
    pub fn to_f64(self) -> f64 {
        f64::from(self.sign) * self.ln.exp()
    }

    pub fn abs(self) -> Self {
        SignedLog {
            sign: self.sign.abs(),
            ln: self.ln,
        }
    }
}

impl From<f64> for SignedLog {
    fn from(x: f64) -> Self {
        SignedLog::new(x)
    }
}

impl Neg for SignedLog {
    type Output = SignedLog;
    fn neg(self) -> SignedLog {
        SignedLog {
            sign: -self.sign,
            ln: self.ln,
        }
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;
    fn mul(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 || rhs.sign == 0 {
            return SignedLog::ZERO;
        }
        SignedLog {
            sign: self.sign * rhs.sign,
            ln: self.ln + rhs.ln,
        }
    }
}

impl Div for SignedLog {
    type Output = SignedLog;
    fn div(self, rhs: SignedLog) -> SignedLog {
        debug_assert!(rhs.sign != 0, "signed-log division by zero");
        if self.sign == 0 {
            return SignedLog::ZERO;
        }
        SignedLog {
            sign: self.sign * rhs.sign,
            ln: self.ln - rhs.ln,
        }
    }
}

impl Add for SignedLog {
    type Output = SignedLog;
    fn add(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        // Factor out the larger magnitude so the exp() arguments are <= 0.
        let (hi, lo) = if self.ln >= rhs.ln {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let r = f64::from(hi.sign) + f64::from(lo.sign) * (lo.ln - hi.ln).exp();
        if r == 0.0 {
            SignedLog::ZERO
        } else {
            SignedLog {
                sign: if r > 0.0 { 1 } else { -1 },
                ln: hi.ln + r.abs().ln(),
            }
        }
    }
}

impl Sub for SignedLog {
    type Output = SignedLog;
    fn sub(self, rhs: SignedLog) -> SignedLog {
        self + (-rhs)
    }
}

/// True when `x` can take part in plain-double products and ratios without
/// risking overflow or underflow.
pub fn plain_safe(x: f64) -> bool {
    x == 0.0 || (x.abs() < PLAIN_SAFE_MAX && x.abs() > PLAIN_SAFE_MIN)
}
