//! Configurable-precision reals and the tolerance-aware comparison layer.
//!
//! Every quantity in the crate (times, works, speeds) is a [`Real`]: a binary
//! floating point number whose precision in bits is chosen at construction.
//! Equality decisions go through [`PrecisionContext::compare`], which
//! separates exact ties from differences too small to trust.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use dashu_base::Abs;
use dashu_base::{BitTest, DivRem, UnsignedAbs};
use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, Sign, UBig};

use crate::error::{Error, Result};

type Binary = FBig<HalfEven, 2>;

/// Default working precision in bits.
pub const DEFAULT_BITS: usize = 128;

/// Guard bits left between the working precision and the default tolerance.
const GUARD_BITS: usize = 16;

/// A binary floating point number carrying its own precision.
///
/// Binary operations round to the larger precision of the two operands.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Real(Binary);

impl Real {
    pub fn zero(bits: usize) -> Self {
        Self::from_i64(0, bits)
    }

    pub fn one(bits: usize) -> Self {
        Self::from_i64(1, bits)
    }

    pub fn from_i64(v: i64, bits: usize) -> Self {
        Real(Binary::from(v).with_precision(bits).value())
    }

    pub fn from_u64(v: u64, bits: usize) -> Self {
        Real(Binary::from(v).with_precision(bits).value())
    }

    /// `num / den` rounded to `bits`.
    pub fn ratio(num: i64, den: i64, bits: usize) -> Self {
        Self::from_i64(num, bits) / Self::from_i64(den, bits)
    }

    /// Exact conversion of a finite `f64`, then rounding to `bits`.
    pub fn from_f64(v: f64, bits: usize) -> Result<Self> {
        let exact = Binary::try_from(v).map_err(|_| Error::Parse(v.to_string()))?;
        Ok(Real(exact.with_precision(bits).value()))
    }

    /// Parses a decimal string (`"12.5"`, `"-3e-4"`) and rounds it once,
    /// to nearest with ties to even, to `bits`.
    pub fn parse_decimal(s: &str, bits: usize) -> Result<Self> {
        let (negative, mantissa, exp10) =
            parse_decimal_parts(s.trim()).ok_or_else(|| Error::Parse(s.to_string()))?;
        Ok(Self::from_decimal_parts(negative, mantissa, exp10, bits))
    }

    /// `(-1)^negative * mantissa * 10^exp10` rounded to `bits`.
    fn from_decimal_parts(negative: bool, mantissa: UBig, exp10: isize, bits: usize) -> Self {
        if mantissa.is_zero() {
            return Real::zero(bits);
        }
        let (significand, exp2) = if exp10 >= 0 {
            (mantissa * pow10(exp10 as usize), 0isize)
        } else {
            let den = pow10((-exp10) as usize);
            // enough quotient bits that a sticky low bit sits below the rounding position
            let shift = (bits + 2 + den.bit_len()).saturating_sub(mantissa.bit_len()) + 1;
            let (q, r) = (mantissa << shift).div_rem(&den);
            let q = if r.is_zero() { q } else { q | UBig::ONE };
            (q, -(shift as isize))
        };
        let signed = if negative {
            -IBig::from(significand)
        } else {
            IBig::from(significand)
        };
        Real(
            Binary::from_parts(signed, exp2)
                .with_precision(bits)
                .value(),
        )
    }

    /// Decimal `(n, e)` with `|n| < 10^digits` and `n * 10^e` the value
    /// rounded to `digits` significant digits, ties to even.
    fn to_decimal_parts(&self, digits: usize) -> (IBig, isize) {
        let repr = self.0.repr();
        let negative = repr.significand().sign() == Sign::Negative;
        let magnitude = repr.significand().unsigned_abs();
        let exp2 = repr.exponent();
        let top = pow10(digits);
        let bottom = pow10(digits - 1);
        // floor(log10 |x|) to within one
        let log10 = ((magnitude.bit_len() as f64 - 1.0 + exp2 as f64) * std::f64::consts::LOG10_2)
            .floor() as isize;
        let mut exp10 = log10 - (digits as isize - 1);
        loop {
            let mut num = magnitude.clone();
            let mut den = UBig::ONE;
            if exp2 >= 0 {
                num <<= exp2 as usize;
            } else {
                den <<= (-exp2) as usize;
            }
            if exp10 >= 0 {
                den *= pow10(exp10 as usize);
            } else {
                num *= pow10((-exp10) as usize);
            }
            let (mut q, r) = num.div_rem(&den);
            let twice = r << 1;
            if twice > den || (twice == den && q.bit(0)) {
                q += UBig::ONE;
            }
            if q >= top {
                exp10 += 1;
            } else if q < bottom {
                exp10 -= 1;
            } else {
                let n = if negative {
                    -IBig::from(q)
                } else {
                    IBig::from(q)
                };
                return (n, exp10);
            }
        }
    }

    /// Shortest decimal string that parses back to exactly this value at
    /// this value's precision.
    pub fn to_decimal_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let bits = self.bits();
        // ceil(bits * log10(2)) + 1 digits always round-trip; fewer digits
        // round-tripping implies more do too, so bisect
        let (mut lo, mut hi) = (1usize, bits * 30103 / 100_000 + 2);
        while lo < hi {
            let mid = (lo + hi) / 2;
            let (n, e) = self.to_decimal_parts(mid);
            let back =
                Real::from_decimal_parts(n.sign() == Sign::Negative, n.unsigned_abs(), e, bits);
            if back == *self {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let (n, e) = self.to_decimal_parts(lo);
        format_decimal(&n, e)
    }

    /// Rounds to a decimal with `digits` significant digits.
    pub fn to_decimal_digits(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let (n, e) = self.to_decimal_parts(digits.max(1));
        format_decimal(&n, e)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    pub fn bits(&self) -> usize {
        self.0.precision()
    }

    /// Exact value as `(significand, exponent)` with value `significand * 2^exponent`.
    pub fn to_binary_parts(&self) -> (String, isize) {
        let repr = self.0.repr();
        (repr.significand().to_string(), repr.exponent())
    }

    /// Re-rounds to a different precision.
    pub fn with_bits(&self, bits: usize) -> Self {
        Real(self.0.clone().with_precision(bits).value())
    }

    pub fn is_zero(&self) -> bool {
        self.0 == Binary::ZERO
    }

    pub fn is_negative(&self) -> bool {
        self.0 < Binary::ZERO
    }

    pub fn is_positive(&self) -> bool {
        self.0 > Binary::ZERO
    }

    pub fn abs(&self) -> Self {
        Real(self.0.clone().abs())
    }

    /// Square root; negative input is a domain error.
    pub fn sqrt(&self) -> Result<Self> {
        if self.is_negative() {
            return Err(Error::Domain(format!(
                "square root of negative value {}",
                self.to_decimal_digits(12)
            )));
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        Ok(Real(exact::sqrt(&self.0)))
    }

    /// Square root clamping tiny negative rounding residue to zero.
    pub(crate) fn sqrt_clamped(&self) -> Self {
        if self.is_positive() {
            Real(exact::sqrt(&self.0))
        } else {
            Real::zero(self.bits())
        }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn ln(&self) -> Self {
        Real(self.0.ln())
    }

    pub fn exp(&self) -> Self {
        Real(self.0.exp())
    }

    pub fn floor(&self) -> Self {
        Real(self.0.floor())
    }

    pub fn ceil(&self) -> Self {
        Real(self.0.ceil())
    }

    /// `self * 2^-shift`.
    pub fn shr(&self, shift: usize) -> Self {
        Real(self.0.clone() >> shift as isize)
    }

    pub fn max_of(&self, other: &Self) -> Self {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn min_of(&self, other: &Self) -> Self {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }
}

fn pow10(k: usize) -> UBig {
    UBig::from(10u8).pow(k)
}

/// Sign, integer mantissa and decimal exponent of `[+-]digits[.digits][(e|E)[+-]digits]`.
fn parse_decimal_parts(s: &str) -> Option<(bool, UBig, isize)> {
    let (negative, rest) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (body, exponent) = match rest.find(['e', 'E']) {
        Some(i) => (&rest[..i], Some(&rest[i + 1..])),
        None => (rest, None),
    };
    let (int_part, frac_part) = match body.find('.') {
        Some(i) => (&body[..i], &body[i + 1..]),
        None => (body, ""),
    };
    let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if int_part.len() + frac_part.len() == 0 || !all_digits(int_part) || !all_digits(frac_part) {
        return None;
    }
    let mut exp10: isize = match exponent {
        Some(e) => {
            let digits = e.strip_prefix(['+', '-']).unwrap_or(e);
            if digits.is_empty() || !all_digits(digits) || digits.len() > 9 {
                return None;
            }
            e.parse().ok()?
        }
        None => 0,
    };
    exp10 -= frac_part.len() as isize;
    let mantissa = UBig::from_str_radix(&format!("{int_part}{frac_part}"), 10).ok()?;
    Some((negative, mantissa, exp10))
}

/// Plain decimal text for `n * 10^e`, switching to exponent form far from 1.
fn format_decimal(n: &IBig, e: isize) -> String {
    let sign = if n.sign() == Sign::Negative { "-" } else { "" };
    let mut digits = n.unsigned_abs().to_string();
    let mut e = e;
    while digits.len() > 1 && digits.ends_with('0') {
        digits.pop();
        e += 1;
    }
    let len = digits.len() as isize;
    let point = len + e;
    if e >= 0 && point <= 40 {
        format!("{sign}{digits}{}", "0".repeat(e as usize))
    } else if point > 0 && e < 0 {
        let (a, b) = digits.split_at(point as usize);
        format!("{sign}{a}.{b}")
    } else if point <= 0 && point > -20 {
        format!("{sign}0.{}{digits}", "0".repeat((-point) as usize))
    } else {
        let (a, b) = digits.split_at(1);
        let frac = if b.is_empty() {
            String::new()
        } else {
            format!(".{b}")
        };
        format!("{sign}{a}{frac}e{}", point - 1)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({})", self.to_decimal_digits(20))
    }
}

macro_rules! impl_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                Real(exact::$method(&self.0, &rhs.0))
            }
        }
        impl<'a> $tr<&'a Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &'a Real) -> Real {
                Real(exact::$method(&self.0, &rhs.0))
            }
        }
        impl<'a> $tr<Real> for &'a Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                Real(exact::$method(&self.0, &rhs.0))
            }
        }
        impl<'a, 'b> $tr<&'b Real> for &'a Real {
            type Output = Real;
            fn $method(self, rhs: &'b Real) -> Real {
                Real(exact::$method(&self.0, &rhs.0))
            }
        }
        impl $tr<i64> for Real {
            type Output = Real;
            fn $method(self, rhs: i64) -> Real {
                let bits = self.bits();
                $tr::$method(self, Real::from_i64(rhs, bits))
            }
        }
        impl<'a> $tr<i64> for &'a Real {
            type Output = Real;
            fn $method(self, rhs: i64) -> Real {
                $tr::$method(self, Real::from_i64(rhs, self.bits()))
            }
        }
    };
}

impl_binop!(Add, add);
impl_binop!(Sub, sub);
impl_binop!(Mul, mul);
impl_binop!(Div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0.clone())
    }
}

impl AddAssign<&Real> for Real {
    fn add_assign(&mut self, rhs: &Real) {
        self.0 = exact::add(&self.0, &rhs.0);
    }
}

impl SubAssign<&Real> for Real {
    fn sub_assign(&mut self, rhs: &Real) {
        self.0 = exact::sub(&self.0, &rhs.0);
    }
}

/// Correctly rounded arithmetic: each result is computed exactly in
/// integers (or with a sticky bit below the rounding position) and rounded
/// once to the wider operand precision.
mod exact {
    use super::Binary;
    use dashu_base::{BitTest, DivRem, SquareRootRem, UnsignedAbs};
    use dashu_int::{IBig, UBig};

    fn parts(x: &Binary) -> (IBig, isize) {
        (x.repr().significand().clone(), x.repr().exponent())
    }

    fn round(significand: IBig, exponent: isize, bits: usize) -> Binary {
        Binary::from_parts(significand, exponent)
            .with_precision(bits)
            .value()
    }

    fn msb(significand: &IBig, exponent: isize) -> isize {
        exponent + significand.unsigned_abs().bit_len() as isize
    }

    pub fn add(a: &Binary, b: &Binary) -> Binary {
        let bits = a.precision().max(b.precision());
        let (sa, ea) = parts(a);
        let (sb, eb) = parts(b);
        if sb == IBig::ZERO {
            return round(sa, ea, bits);
        }
        if sa == IBig::ZERO {
            return round(sb, eb, bits);
        }
        // an operand far below the other's rounding position only
        // contributes its sign; stand it in with a single low bit
        let (big, small) = if msb(&sa, ea) >= msb(&sb, eb) {
            ((sa, ea), (sb, eb))
        } else {
            ((sb, eb), (sa, ea))
        };
        let floor = big.1.min(msb(&big.0, big.1) - bits as isize - 4) - 1;
        let small = if msb(&small.0, small.1) <= floor {
            let unit = if small.0 < IBig::ZERO {
                IBig::NEG_ONE
            } else {
                IBig::ONE
            };
            (unit, floor - 1)
        } else {
            small
        };
        let e = big.1.min(small.1);
        let sum = (big.0 << (big.1 - e) as usize) + (small.0 << (small.1 - e) as usize);
        round(sum, e, bits)
    }

    pub fn sub(a: &Binary, b: &Binary) -> Binary {
        add(a, &-b.clone())
    }

    pub fn mul(a: &Binary, b: &Binary) -> Binary {
        let bits = a.precision().max(b.precision());
        let (sa, ea) = parts(a);
        let (sb, eb) = parts(b);
        round(sa * sb, ea + eb, bits)
    }

    pub fn div(a: &Binary, b: &Binary) -> Binary {
        let bits = a.precision().max(b.precision());
        let (sa, ea) = parts(a);
        let (sb, eb) = parts(b);
        assert!(sb != IBig::ZERO, "division by zero");
        let negative = (sa < IBig::ZERO) != (sb < IBig::ZERO);
        let (na, nb) = (sa.unsigned_abs(), sb.unsigned_abs());
        // quotient keeps at least bits + 2 bits so the sticky bit is below rounding
        let shift = (bits + 2 + nb.bit_len()).saturating_sub(na.bit_len()) + 1;
        let (q, r) = (na << shift).div_rem(&nb);
        let q = if r == UBig::ZERO { q } else { q | UBig::ONE };
        let q = if negative {
            -IBig::from(q)
        } else {
            IBig::from(q)
        };
        round(q, ea - eb - shift as isize, bits)
    }

    /// Square root of a positive value.
    pub fn sqrt(x: &Binary) -> Binary {
        let bits = x.precision();
        let (s, e) = parts(x);
        let n = s.unsigned_abs();
        let mut shift = (2 * (bits + 2)).saturating_sub(n.bit_len()) + 1;
        if (e - shift as isize).rem_euclid(2) != 0 {
            shift += 1;
        }
        let (root, rem) = (n << shift).sqrt_rem();
        let root = if rem == UBig::ZERO {
            root
        } else {
            root | UBig::ONE
        };
        round(IBig::from(root), (e - shift as isize) / 2, bits)
    }
}

/// Outcome of a tolerance-aware comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparison {
    Less,
    /// Bit-for-bit equal at working precision.
    Equal,
    Greater,
    /// Nonzero difference that lies within tolerance.
    Indeterminate,
}

impl Comparison {
    pub fn reverse(self) -> Self {
        match self {
            Comparison::Less => Comparison::Greater,
            Comparison::Greater => Comparison::Less,
            other => other,
        }
    }

    /// True unless the left side is decidedly greater.
    pub fn is_le(self) -> bool {
        !matches!(self, Comparison::Greater)
    }

    /// True unless the left side is decidedly smaller.
    pub fn is_ge(self) -> bool {
        !matches!(self, Comparison::Less)
    }

    /// Equal or too close to call.
    pub fn is_tie(self) -> bool {
        matches!(self, Comparison::Equal | Comparison::Indeterminate)
    }
}

/// Numeric policy shared by every algorithm: working precision plus the
/// relative and absolute tolerances that define [`Comparison::Indeterminate`].
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionContext {
    bits: usize,
    rel_tol: Real,
    abs_tol: Real,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self::new(DEFAULT_BITS)
    }
}

impl PrecisionContext {
    /// Context with tolerances `2^-(bits - 16)`.
    pub fn new(bits: usize) -> Self {
        let bits = bits.max(GUARD_BITS + 8);
        let tol = Real::one(bits).shr(bits - GUARD_BITS);
        PrecisionContext {
            bits,
            rel_tol: tol.clone(),
            abs_tol: tol,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: Real) -> Self {
        self.rel_tol = rel_tol.with_bits(self.bits);
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: Real) -> Self {
        self.abs_tol = abs_tol.with_bits(self.bits);
        self
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn rel_tol(&self) -> &Real {
        &self.rel_tol
    }

    pub fn abs_tol(&self) -> &Real {
        &self.abs_tol
    }

    /// Same tolerances policy at `factor` times the precision.
    pub fn scaled(&self, factor: usize) -> Self {
        Self::new(self.bits * factor)
    }

    pub fn int(&self, v: i64) -> Real {
        Real::from_i64(v, self.bits)
    }

    pub fn zero(&self) -> Real {
        Real::zero(self.bits)
    }

    pub fn one(&self) -> Real {
        Real::one(self.bits)
    }

    pub fn ratio(&self, num: i64, den: i64) -> Real {
        Real::ratio(num, den, self.bits)
    }

    pub fn from_f64(&self, v: f64) -> Real {
        Real::from_f64(v, self.bits).expect("finite f64")
    }

    pub fn parse(&self, s: &str) -> Result<Real> {
        Real::parse_decimal(s, self.bits)
    }

    /// Largest difference between `a` and `b` that counts as a tie.
    pub fn tolerance_for(&self, a: &Real, b: &Real) -> Real {
        let scale = a.abs().max_of(&b.abs());
        (&self.rel_tol * &scale).max_of(&self.abs_tol)
    }

    pub fn compare(&self, a: &Real, b: &Real) -> Comparison {
        match a.cmp(b) {
            Ordering::Equal => Comparison::Equal,
            ord => {
                let diff = (a - b).abs();
                if diff <= self.tolerance_for(a, b) {
                    Comparison::Indeterminate
                } else if ord == Ordering::Less {
                    Comparison::Less
                } else {
                    Comparison::Greater
                }
            }
        }
    }

    /// Sign of `x` relative to zero under this context.
    pub fn sign(&self, x: &Real) -> Comparison {
        self.compare(x, &self.zero())
    }

    pub fn approx_eq(&self, a: &Real, b: &Real) -> bool {
        self.compare(a, b).is_tie()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tolerance_leaves_guard_bits() {
        let ctx = PrecisionContext::new(128);
        let expected = Real::one(128).shr(112);
        assert_eq!(ctx.rel_tol(), &expected);
        assert_eq!(ctx.abs_tol(), &expected);
    }

    #[test]
    fn compare_distinguishes_equal_from_indeterminate() {
        let ctx = PrecisionContext::new(64);
        let one = ctx.one();
        let nudged = &one + &one.shr(60);
        assert_eq!(ctx.compare(&one, &one), Comparison::Equal);
        assert_eq!(ctx.compare(&one, &nudged), Comparison::Indeterminate);
        assert_eq!(ctx.compare(&one, &ctx.int(2)), Comparison::Less);
        assert_eq!(ctx.compare(&ctx.int(2), &one), Comparison::Greater);
    }

    #[test]
    fn decimal_round_trip_is_shortest() {
        let ctx = PrecisionContext::new(128);
        for s in ["0.1", "2", "-3.25", "1234.5678", "0.000001"] {
            let x = ctx.parse(s).unwrap();
            assert_eq!(x.to_decimal_string(), s);
        }
        let root2 = ctx.int(2).sqrt().unwrap();
        let text = root2.to_decimal_string();
        assert_eq!(ctx.parse(&text).unwrap(), root2);
    }

    #[test]
    fn sqrt_rejects_negative() {
        let ctx = PrecisionContext::default();
        assert!(ctx.int(-1).sqrt().is_err());
        assert_eq!(ctx.int(9).sqrt().unwrap(), ctx.int(3));
    }

    #[test]
    fn parse_rejects_garbage() {
        let ctx = PrecisionContext::default();
        assert!(ctx.parse("").is_err());
        assert!(ctx.parse("1.2.3").is_err());
        assert!(ctx.parse("abc").is_err());
    }

    #[test]
    fn mixed_precision_rounds_to_larger() {
        let a = Real::from_i64(2, 64);
        let b = Real::from_i64(3, 256);
        assert_eq!((a / b).bits(), 256);
    }
}
