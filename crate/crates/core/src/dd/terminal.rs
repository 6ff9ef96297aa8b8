//! Canonical keys for complex terminal values.
//!
//! Each component is rounded to a fixed number of significant decimal digits
//! (round-half-to-even on the decimal mantissa), but never to a finer decimal
//! place than the zero threshold. Values whose magnitude falls below the zero
//! threshold collapse to exactly zero, and `-0.0` keys as `0.0`.
//!
//! A terminal stores the first value created under its key, so arithmetic on
//! stored values keeps full working precision.

use num_complex::Complex64;

use super::DdError;

/// Largest digit count whose mantissa still fits in an `i64`.
pub const MAX_DIGITS: u32 = 17;

/// Terminal rounding policy of a manager.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rounding {
    /// Significant decimal digits kept per component.
    pub digits: u32,
    /// Components with `|x| < zero_threshold` are stored as zero.
    pub zero_threshold: f64,
}

impl Default for Rounding {
    fn default() -> Self {
        Rounding {
            digits: 12,
            zero_threshold: 1e-13,
        }
    }
}

impl Rounding {
    pub fn new(digits: u32, zero_threshold: f64) -> Result<Self, DdError> {
        if digits == 0 || digits > MAX_DIGITS || !(zero_threshold >= 0.0) {
            return Err(DdError::InvalidRounding {
                digits,
                zero_threshold,
            });
        }
        Ok(Rounding {
            digits,
            zero_threshold,
        })
    }

    pub(crate) fn key(&self, c: Complex64) -> Result<TerminalKey, DdError> {
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(DdError::NonFiniteTerminal { re: c.re, im: c.im });
        }
        Ok(TerminalKey {
            re: self.round_component(c.re),
            im: self.round_component(c.im),
        })
    }

    /// `c` with sub-threshold components set to zero and `-0.0` made positive.
    pub(crate) fn flush(&self, c: Complex64) -> Complex64 {
        let f = |x: f64| if x.abs() < self.zero_threshold || x == 0.0 { 0.0 } else { x };
        Complex64::new(f(c.re), f(c.im))
    }

    /// Decimal exponent of the zero threshold: no key resolves finer than this.
    fn min_shift(&self) -> Option<i32> {
        (self.zero_threshold > 0.0).then(|| (self.zero_threshold.log10() + 1e-9).floor() as i32)
    }

    fn round_component(&self, x: f64) -> Decimal {
        if x.abs() < self.zero_threshold || x == 0.0 {
            return Decimal::ZERO;
        }
        let d = self.round_significant(x);
        match self.min_shift() {
            Some(floor) if d.shift < floor => {
                let mantissa = scale10(x, -floor).round_ties_even() as i64;
                if mantissa == 0 {
                    Decimal::ZERO
                } else {
                    Decimal { mantissa, shift: floor }
                }
            }
            _ => d,
        }
    }

    fn round_significant(&self, x: f64) -> Decimal {
        let digits = self.digits as i32;
        let upper = 10f64.powi(digits);
        let lower = 10f64.powi(digits - 1);
        let mut exp = x.abs().log10().floor() as i32;
        // log10 can be off by one near powers of ten; at most two corrections.
        for _ in 0..3 {
            let shift = exp - digits + 1;
            let m = scale10(x, -shift).round_ties_even();
            if m.abs() >= upper {
                exp += 1;
            } else if m.abs() < lower {
                exp -= 1;
            } else {
                return Decimal {
                    mantissa: m as i64,
                    shift,
                };
            }
        }
        let shift = exp - digits + 1;
        Decimal {
            mantissa: scale10(x, -shift).round_ties_even() as i64,
            shift,
        }
    }
}

/// `x * 10^p`, dividing by an exact power of ten when `p` is negative.
fn scale10(x: f64, p: i32) -> f64 {
    if p >= 0 {
        x * 10f64.powi(p)
    } else {
        x / 10f64.powi(-p)
    }
}

/// `mantissa * 10^shift`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Decimal {
    mantissa: i64,
    shift: i32,
}

impl Decimal {
    const ZERO: Decimal = Decimal {
        mantissa: 0,
        shift: 0,
    };

    #[cfg(test)]
    fn value(self) -> f64 {
        if self.mantissa == 0 {
            0.0
        } else {
            scale10(self.mantissa as f64, self.shift)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) struct TerminalKey {
    re: Decimal,
    im: Decimal,
}

impl TerminalKey {
    /// The rounded value the key stands for.
    #[cfg(test)]
    pub(crate) fn value(self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}
