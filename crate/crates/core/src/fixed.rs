//! Non-negative fixed-point numbers with six decimal places.
//!
//! Interval guard endpoints and policy parameters are stored as an integer
//! count of millionths so that comparisons against integer clock values are
//! exact and reproducible on every platform.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Number of fixed-point units per whole unit.
pub const SCALE: u64 = 1_000_000;

/// A non-negative decimal with denominator [`SCALE`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fixed(u64);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FixedParseError {
    #[error("empty number")]
    Empty,
    #[error("invalid number `{0}`")]
    Invalid(String),
    #[error("`{0}` has more than 6 fractional digits")]
    TooPrecise(String),
    #[error("`{0}` is out of range")]
    Overflow(String),
}

impl Fixed {
    pub const ZERO: Fixed = Fixed(0);
    pub const ONE: Fixed = Fixed(SCALE);

    pub const fn from_micros(micros: u64) -> Self {
        Fixed(micros)
    }

    pub const fn micros(self) -> u64 {
        self.0
    }

    /// Whole number `v`, saturating at the representable maximum.
    pub fn from_int(v: u64) -> Self {
        Fixed(v.saturating_mul(SCALE))
    }

    /// Rounds `x` down to the nearest millionth (negative values clamp to 0).
    pub fn floor_f64(x: f64) -> Self {
        if x.is_nan() || x <= 0.0 {
            return Fixed::ZERO;
        }
        Fixed(saturate_f64((x * SCALE as f64).floor()))
    }

    /// Rounds `x` up to the nearest millionth (negative values clamp to 0).
    pub fn ceil_f64(x: f64) -> Self {
        if x.is_nan() || x <= 0.0 {
            return Fixed::ZERO;
        }
        Fixed(saturate_f64((x * SCALE as f64).ceil()))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    /// `lo <= v <= hi` comparisons against integer clock values.
    pub fn le_int(self, v: u64) -> bool {
        u128::from(self.0) <= u128::from(v) * u128::from(SCALE)
    }

    pub fn ge_int(self, v: u64) -> bool {
        u128::from(self.0) >= u128::from(v) * u128::from(SCALE)
    }

    /// Exact product of an integer and this value.
    pub fn mul_int(self, v: u64) -> Fixed {
        let p = u128::from(self.0) * u128::from(v);
        Fixed(u64::try_from(p).unwrap_or(u64::MAX))
    }

    /// `v * self` rounded half-up to an integer.
    pub fn scale_int_round(self, v: u64) -> u64 {
        let p = u128::from(self.0) * u128::from(v) + u128::from(SCALE / 2);
        u64::try_from(p / u128::from(SCALE)).unwrap_or(u64::MAX)
    }

    pub fn checked_sub(self, other: Fixed) -> Option<Fixed> {
        self.0.checked_sub(other.0).map(Fixed)
    }

    pub fn saturating_add(self, other: Fixed) -> Fixed {
        Fixed(self.0.saturating_add(other.0))
    }
}

fn saturate_f64(x: f64) -> u64 {
    if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x as u64
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / SCALE;
        let frac = self.0 % SCALE;
        if frac == 0 {
            write!(f, "{whole}")
        } else {
            let digits = format!("{frac:06}");
            write!(f, "{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl FromStr for Fixed {
    type Err = FixedParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(FixedParseError::Empty);
        }
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, f),
            None => (s, ""),
        };
        let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        if whole.is_empty() || !all_digits(whole) || !all_digits(frac) || (s.contains('.') && frac.is_empty()) {
            return Err(FixedParseError::Invalid(s.to_owned()));
        }
        if frac.len() > 6 {
            return Err(FixedParseError::TooPrecise(s.to_owned()));
        }
        let overflow = || FixedParseError::Overflow(s.to_owned());
        let w: u64 = whole.parse().map_err(|_| overflow())?;
        let mut f: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| overflow())? };
        for _ in frac.len()..6 {
            f *= 10;
        }
        w.checked_mul(SCALE)
            .and_then(|m| m.checked_add(f))
            .map(Fixed)
            .ok_or_else(overflow)
    }
}

impl serde::Serialize for Fixed {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn display_trims_trailing_zeros() {
        assert_eq!(Fixed::from_micros(3_500_000).to_string(), "3.5");
        assert_eq!(Fixed::from_int(23).to_string(), "23");
        assert_eq!(Fixed::from_micros(4_456_386).to_string(), "4.456386");
        assert_eq!(Fixed::from_micros(50_000).to_string(), "0.05");
    }

    #[test]
    fn parse_rejects_junk() {
        assert!("".parse::<Fixed>().is_err());
        assert!("1.".parse::<Fixed>().is_err());
        assert!(".5".parse::<Fixed>().is_err());
        assert!("-1".parse::<Fixed>().is_err());
        assert!("1.1234567".parse::<Fixed>().is_err());
        assert!("99999999999999999999".parse::<Fixed>().is_err());
        assert_eq!("0.05".parse::<Fixed>(), Ok(Fixed::from_micros(50_000)));
    }

    #[test]
    fn outward_rounding() {
        assert_eq!(Fixed::floor_f64(-3.0), Fixed::ZERO);
        assert_eq!(Fixed::floor_f64(1.0000004), Fixed::from_micros(1_000_000));
        assert_eq!(Fixed::ceil_f64(1.0000004), Fixed::from_micros(1_000_001));
        assert_eq!(Fixed::scale_int_round(Fixed::from_int(3), 10), 30);
    }

    proptest! {
        #[test]
        fn display_parse_roundtrip(m in any::<u64>()) {
            let f = Fixed::from_micros(m);
            prop_assert_eq!(f.to_string().parse::<Fixed>(), Ok(f));
        }
    }
}
