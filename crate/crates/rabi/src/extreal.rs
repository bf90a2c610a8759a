//! Extended-range floating point: a sign-carrying mantissa in [1, 2) with a
//! separate 64-bit power-of-two exponent.
//!
//! Series coefficients in this crate routinely reach factorial or `(2g)^-n`
//! magnitudes that overflow `f64` long before the terms that matter are
//! summed.  `ExtReal` keeps the full 53-bit precision of `f64` while
//! extending the exponent range far beyond any chain length used here.
//!
//! ```
//! use rabi::extreal::ExtReal;
//!
//! // 2^40000 is far outside f64 range but routine here.
//! let mut x = ExtReal::ONE;
//! for _ in 0..40_000 {
//!     x = x * ExtReal::from_f64(2.0);
//! }
//! assert_eq!(x.log2_abs(), 40_000.0);
//! assert!((x * x.recip()).to_f64() == 1.0);
//! ```

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

/// value = `mantissa * 2^exp2`, with `|mantissa| in [1, 2)` or exactly 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtReal {
    mantissa: f64,
    exp2: i64,
}

/// Split a finite nonzero `f64` into `(m, e)` with `|m| in [1, 2)` and
/// `x = m * 2^e`, exactly.
fn frexp2(x: f64) -> (f64, i64) {
    debug_assert!(x.is_finite() && x != 0.0);
    let bits = x.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    if raw_exp == 0 {
        // subnormal: scale into the normal range first
        let scaled = x * f64::from_bits((1023u64 + 64) << 52);
        let (m, e) = frexp2(scaled);
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1023u64 << 52));
    (m, raw_exp - 1023)
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal { mantissa: 0.0, exp2: 0 };
    pub const ONE: ExtReal = ExtReal { mantissa: 1.0, exp2: 0 };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return Self::ZERO;
        }
        let (mantissa, exp2) = frexp2(x);
        ExtReal { mantissa, exp2 }
    }

    /// Renormalize after arithmetic left the mantissa outside [1, 2).
    fn normalized(mantissa: f64, exp2: i64) -> Self {
        if mantissa == 0.0 {
            return Self::ZERO;
        }
        let (m, shift) = frexp2(mantissa);
        ExtReal { mantissa: m, exp2: exp2 + shift }
    }

    pub fn is_zero(self) -> bool {
        self.mantissa == 0.0
    }

    /// -1, 0 or +1.
    pub fn signum(self) -> i8 {
        if self.mantissa > 0.0 {
            1
        } else if self.mantissa < 0.0 {
            -1
        } else {
            0
        }
    }

    pub fn abs(self) -> Self {
        ExtReal { mantissa: self.mantissa.abs(), exp2: self.exp2 }
    }

    pub fn recip(self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero ExtReal");
        // 1/m in (0.5, 1]; fold the half-step into the exponent
        Self::normalized(1.0 / self.mantissa, -self.exp2)
    }

    /// log2 of the magnitude; -inf for zero.
    pub fn log2_abs(self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.exp2 as f64 + self.mantissa.abs().log2()
        }
    }

    /// Collapse to `f64`, saturating to `±inf`/`0` outside its range.
    pub fn to_f64(self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        if self.exp2 > 1024 {
            return f64::INFINITY.copysign(self.mantissa);
        }
        if self.exp2 < -1075 {
            return 0.0f64.copysign(self.mantissa);
        }
        self.mantissa * 2.0f64.powi(self.exp2 as i32)
    }

    pub fn scale_f64(self, k: f64) -> Self {
        self * Self::from_f64(k)
    }

    /// Compare magnitudes without collapsing to `f64`.
    pub fn cmp_abs(self, other: Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => (self.exp2, self.mantissa.abs())
                .partial_cmp(&(other.exp2, other.mantissa.abs()))
                .unwrap(),
        }
    }
}

impl Mul for ExtReal {
    type Output = ExtReal;
    fn mul(self, rhs: ExtReal) -> ExtReal {
        if self.is_zero() || rhs.is_zero() {
            return ExtReal::ZERO;
        }
        // |m| in [1, 4): a single renormalization step
        ExtReal::normalized(self.mantissa * rhs.mantissa, self.exp2 + rhs.exp2)
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exp2 >= rhs.exp2 { (self, rhs) } else { (rhs, self) };
        let shift = lo.exp2 - hi.exp2;
        if shift < -120 {
            return hi; // below one ulp of hi
        }
        let m = hi.mantissa + lo.mantissa * 2.0f64.powi(shift as i32);
        ExtReal::normalized(m, hi.exp2)
    }
}

impl Sub for ExtReal {
    type Output = ExtReal;
    fn sub(self, rhs: ExtReal) -> ExtReal {
        self + (-rhs)
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        ExtReal { mantissa: -self.mantissa, exp2: self.exp2 }
    }
}
