//! Numeric backends for the fractional (symmetric) models: plain `f64` for
//! speed and [`Dyadic`] for exact verification runs.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// Exact nonnegative dyadic rational `numerator / 2^exponent`.
///
/// Kept normalized: the numerator is odd, or the value is zero with exponent 0.
/// Equality is therefore structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numerator: BigUint,
    exponent: u64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            numerator: BigUint::zero(),
            exponent: 0,
        }
    }

    pub fn from_u64(n: u64) -> Self {
        Dyadic::new(BigUint::from(n), 0)
    }

    pub fn new(numerator: BigUint, exponent: u64) -> Self {
        let mut d = Dyadic {
            numerator,
            exponent,
        };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.numerator.is_zero() {
            self.exponent = 0;
            return;
        }
        let tz = self
            .numerator
            .trailing_zeros()
            .unwrap_or(0)
            .min(self.exponent);
        if tz > 0 {
            self.numerator >>= tz;
            self.exponent -= tz;
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// Numerators of `self` and `other` scaled to a common exponent.
    fn aligned(&self, other: &Dyadic) -> (BigUint, BigUint, u64) {
        let e = self.exponent.max(other.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &other.numerator << (e - other.exponent);
        (a, b, e)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(other);
        Dyadic::new(a + b, e)
    }

    /// `self - other`, or `None` if the result would be negative.
    pub fn checked_sub(&self, other: &Dyadic) -> Option<Dyadic> {
        let (a, b, e) = self.aligned(other);
        (a >= b).then(|| Dyadic::new(a - b, e))
    }

    /// `self / 2^k`.
    pub fn shr(&self, k: u64) -> Dyadic {
        Dyadic::new(self.numerator.clone(), self.exponent + k)
    }

    /// `self * n`.
    pub fn mul_u64(&self, n: u64) -> Dyadic {
        Dyadic::new(&self.numerator * BigUint::from(n), self.exponent)
    }

    /// Nearest `f64` (up to one unit of rounding in the last place).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.numerator.bits();
        let drop = bits.saturating_sub(64);
        let top = (&self.numerator >> drop).to_f64().unwrap_or(f64::INFINITY);
        ldexp(top, drop as i64 - self.exponent as i64)
    }
}

/// `x * 2^e` without intermediate overflow or underflow.
fn ldexp(mut x: f64, mut e: i64) -> f64 {
    const STEP: i64 = 1000;
    while e > STEP {
        x *= 2f64.powi(STEP as i32);
        e -= STEP;
    }
    while e < -STEP {
        x *= 2f64.powi(-STEP as i32);
        e += STEP;
    }
    x * 2f64.powi(e as i32)
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.exponent)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Ant mass in the fractional models.
pub trait Mass: Clone + Default + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn from_count(n: u64) -> Self;
    fn is_zero(&self) -> bool;
    /// `self >= 1`: the site still has ants to hand out.
    fn at_least_one(&self) -> bool;
    /// `(self - 1) / 2^shift`. Only called when `at_least_one()`.
    fn surplus_share(&self, shift: u32) -> Self;
    fn accumulate(&mut self, other: &Self);
    fn to_f64(&self) -> f64;
}

impl Mass for f64 {
    fn zero() -> Self {
        0.0
    }

    fn from_count(n: u64) -> Self {
        n as f64
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn at_least_one(&self) -> bool {
        *self >= 1.0
    }

    fn surplus_share(&self, shift: u32) -> Self {
        (*self - 1.0) / f64::from(1u32 << shift)
    }

    fn accumulate(&mut self, other: &Self) {
        *self += *other;
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Mass for Dyadic {
    fn zero() -> Self {
        Dyadic::zero()
    }

    fn from_count(n: u64) -> Self {
        Dyadic::from_u64(n)
    }

    fn is_zero(&self) -> bool {
        Dyadic::is_zero(self)
    }

    fn at_least_one(&self) -> bool {
        self.numerator >= (BigUint::one() << self.exponent)
    }

    fn surplus_share(&self, shift: u32) -> Self {
        self.checked_sub(&Dyadic::from_u64(1))
            .expect("surplus_share below one")
            .shr(u64::from(shift))
    }

    fn accumulate(&mut self, other: &Self) {
        *self = self.add(other);
    }

    fn to_f64(&self) -> f64 {
        Dyadic::to_f64(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalization() {
        let d = Dyadic::new(BigUint::from(12u32), 4);
        assert_eq!(d.numerator(), &BigUint::from(3u32));
        assert_eq!(d.exponent(), 2);
        assert_eq!(Dyadic::new(BigUint::zero(), 9), Dyadic::zero());
        assert_eq!(Dyadic::from_u64(8).exponent(), 0);
    }

    #[test]
    fn shift_keeps_normal_form() {
        assert_eq!(Dyadic::from_u64(64).shr(1), Dyadic::from_u64(32));
        assert_eq!(
            Dyadic::from_u64(3).shr(2),
            Dyadic::new(BigUint::from(3u32), 2)
        );
        assert_eq!(Dyadic::zero().shr(5), Dyadic::zero());
    }

    #[test]
    fn surplus_arithmetic() {
        let four = Dyadic::from_u64(4);
        let half = four.surplus_share(1);
        assert_eq!(half.to_f64(), 1.5);
        let q = half.surplus_share(1);
        assert_eq!(q.to_f64(), 0.25);
        assert!(!q.at_least_one());
        assert!(Dyadic::from_u64(1).at_least_one());
        assert!(Dyadic::from_u64(1).surplus_share(2).is_zero());
    }

    #[test]
    fn huge_exponents_convert() {
        let tiny = Dyadic::new(BigUint::from(3u32), 2000);
        assert_eq!(tiny.to_f64(), 0.0);
        let big_num = Dyadic::new((BigUint::one() << 3000u32) + 1u32, 2999);
        assert_eq!(big_num.to_f64(), 2.0);
    }

    proptest! {
        #[test]
        fn add_sub_exact(a in 0u64..1 << 40, ea in 0u64..80, b in 0u64..1 << 40, eb in 0u64..80) {
            let x = Dyadic::new(BigUint::from(a), ea);
            let y = Dyadic::new(BigUint::from(b), eb);
            let s = x.add(&y);
            prop_assert_eq!(s.checked_sub(&y).unwrap(), x.clone());
            prop_assert_eq!(s.checked_sub(&x).unwrap(), y.clone());
            prop_assert_eq!(x.cmp(&y), x.to_f64().partial_cmp(&y.to_f64()).unwrap());
        }

        #[test]
        fn f64_conversion_matches_exact_values(a in 0u64..1 << 52, e in 0u64..200) {
            let x = Dyadic::new(BigUint::from(a), e);
            prop_assert_eq!(x.to_f64(), a as f64 * 2f64.powi(-(e as i32)));
        }
    }
}
