//! Numeric abstraction shared by the score-, rate- and metric-producing code.
//!
//! Everything that is a ratio of counts or a weighted mean of detector scores
//! is computed over a [`Scalar`]. `f64` is the fast path; [`Exact`](crate::Exact)
//! (`Ratio<i128>`) gives exact decimal behaviour at decision boundaries.

use num_rational::Ratio;
use num_traits::Num;
use std::fmt::Debug;

/// Decimal places kept when a binary float enters an exact scalar.
pub const DECIMAL_PLACES: u32 = 12;

const DECIMAL_SCALE: i128 = 1_000_000_000_000;

pub trait Scalar: Num + Copy + PartialOrd + Debug + Send + Sync + 'static {
    /// Convert a float. Exact scalars round to [`DECIMAL_PLACES`] places.
    fn from_f64(x: f64) -> Self;

    fn to_f64(self) -> f64;

    fn from_count(n: u64) -> Self;

    /// `num / den`, exact for rational scalars. `den` must be non-zero.
    fn ratio(num: u64, den: u64) -> Self {
        Self::from_count(num) / Self::from_count(den)
    }

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    fn clamp_unit(self) -> Self {
        if self < Self::zero() {
            Self::zero()
        } else if self > Self::one() {
            Self::one()
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn from_count(n: u64) -> Self {
        n as f64
    }
}

impl Scalar for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }

    fn from_count(n: u64) -> Self {
        n as f32
    }
}

impl Scalar for Ratio<i128> {
    fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite value {x} cannot become an exact scalar");
        let scaled = (x * DECIMAL_SCALE as f64).round() as i128;
        Ratio::new(scaled, DECIMAL_SCALE)
    }

    fn to_f64(self) -> f64 {
        // Split off the integer part so large numerators keep precision.
        let whole = self.numer() / self.denom();
        let rem = self.numer() % self.denom();
        whole as f64 + rem as f64 / *self.denom() as f64
    }

    fn from_count(n: u64) -> Self {
        Ratio::from_integer(n as i128)
    }

    fn ratio(num: u64, den: u64) -> Self {
        Ratio::new(num as i128, den as i128)
    }
}

/// Parse a plain decimal literal (`"0.53"`, `"-1.25"`, `"7"`) without going
/// through binary floating point.
pub fn parse_decimal<S: Scalar>(text: &str) -> Option<S> {
    let text = text.trim();
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let ten = S::from_count(10);
    let mut value = S::zero();
    for b in int_part.bytes() {
        value = value * ten + S::from_count(u64::from(b - b'0'));
    }
    let mut scale = S::one();
    for b in frac_part.bytes() {
        scale = scale / ten;
        value = value + S::from_count(u64::from(b - b'0')) * scale;
    }
    Some(if negative { S::zero() - value } else { value })
}

pub(crate) fn sum<S: Scalar>(values: impl IntoIterator<Item = S>) -> S {
    values.into_iter().fold(S::zero(), |acc, v| acc + v)
}

pub(crate) fn is_unit<S: Scalar>(value: S) -> bool {
    value >= S::zero() && value <= S::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;

    #[test]
    fn exact_from_f64_recovers_short_decimals() {
        assert_eq!(Exact::from_f64(0.53), Ratio::new(53, 100));
        assert_eq!(Exact::from_f64(0.1) + Exact::from_f64(0.2), Exact::from_f64(0.3));
        assert_eq!(Exact::from_f64(0.51666), Ratio::new(51_666, 100_000));
    }

    #[test]
    fn ratio_is_exact() {
        let third: Exact = Scalar::ratio(1, 3);
        assert_eq!(third * Exact::from_count(3), Exact::from_integer(1));
        assert!((Scalar::to_f64(third) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn half_and_clamp() {
        assert_eq!(<f64 as Scalar>::half(), 0.5);
        assert_eq!(Exact::half(), Ratio::new(1, 2));
        assert_eq!(1.5f64.clamp_unit(), 1.0);
        assert_eq!((-0.1f32).clamp_unit(), 0.0);
    }

    #[test]
    fn parse_decimal_literals() {
        assert_eq!(parse_decimal::<Exact>("0.53"), Some(Ratio::new(53, 100)));
        assert_eq!(parse_decimal::<Exact>("-1.25"), Some(Ratio::new(-5, 4)));
        assert_eq!(parse_decimal::<Exact>("7"), Some(Ratio::from_integer(7)));
        assert_eq!(parse_decimal::<Exact>(".5"), Some(Ratio::new(1, 2)));
        assert_eq!(parse_decimal::<Exact>("1e3"), None);
        assert_eq!(parse_decimal::<Exact>(""), None);
        assert_eq!(parse_decimal::<f64>("0.25"), Some(0.25));
    }

    #[test]
    fn to_f64_handles_large_values() {
        let v = Exact::from_count(1 << 60) + Ratio::new(1, 4);
        assert_eq!(Scalar::to_f64(v), (1u64 << 60) as f64 + 0.25);
    }
}
