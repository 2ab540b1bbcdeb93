//! Exact dyadic rationals and interval enclosures.
//!
//! A [`Dyadic`] is `mantissa * 2^exponent` kept in canonical form (odd
//! mantissa, or zero with exponent 0). Addition, subtraction and
//! multiplication are exact. Operations that leave the dyadics (division,
//! `exp`) take an explicit [`Precision`] and round outward, so every
//! [`DyadicInterval`] produced here is a sound enclosure of the real result.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Target output width `2^-k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(pub u32);

impl Precision {
    pub fn bits(self) -> u32 {
        self.0
    }

    /// Width `2^-k` as an exact dyadic.
    pub fn width(self) -> Dyadic {
        Dyadic::pow2(-(self.0 as i64))
    }

    pub fn finer(self, extra: u32) -> Precision {
        Precision(self.0 + extra)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

impl Dyadic {
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        if mantissa.is_zero() {
            return Self::zero();
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        Dyadic {
            mantissa: mantissa >> tz,
            exponent: exponent + tz as i64,
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            mantissa: BigInt::one(),
            exponent: 0,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(BigInt::from(n), 0)
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::new(n, 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic {
            mantissa: BigInt::one(),
            exponent: e,
        }
    }

    /// `n / 2^k`.
    pub fn ratio_pow2(n: i64, k: u32) -> Self {
        Self::new(BigInt::from(n), -(k as i64))
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa.is_positive()
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    /// Multiply by `2^k` (exact).
    pub fn shl(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return Self::zero();
        }
        Dyadic {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + k,
        }
    }

    /// Smallest `k` such that this value is an integer multiple of `2^-k`.
    pub fn level(&self) -> i64 {
        -self.exponent
    }

    pub fn floor(&self) -> BigInt {
        if self.exponent >= 0 {
            &self.mantissa << self.exponent as usize
        } else {
            self.mantissa
                .div_floor(&(BigInt::one() << (-self.exponent) as usize))
        }
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    /// Largest multiple of `2^-g` that is `<= self`.
    pub fn round_down(&self, g: i64) -> Dyadic {
        if self.exponent >= -g {
            return self.clone();
        }
        Dyadic::new(self.shl(g).floor(), -g)
    }

    /// Smallest multiple of `2^-g` that is `>= self`.
    pub fn round_up(&self, g: i64) -> Dyadic {
        if self.exponent >= -g {
            return self.clone();
        }
        Dyadic::new(self.shl(g).ceil(), -g)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << self.exponent as usize)
        } else {
            BigRational::new(
                self.mantissa.clone(),
                BigInt::one() << (-self.exponent) as usize,
            )
        }
    }

    /// Largest multiple of `2^-g` below `q`.
    pub fn floor_rational(q: &BigRational, g: i64) -> Dyadic {
        let scaled = scale_rational(q, g);
        Dyadic::new(scaled.floor().to_integer(), -g)
    }

    /// Smallest multiple of `2^-g` above `q`.
    pub fn ceil_rational(q: &BigRational, g: i64) -> Dyadic {
        let scaled = scale_rational(q, g);
        Dyadic::new(scaled.ceil().to_integer(), -g)
    }

    /// Exact conversion; fails when the denominator is not a power of two.
    pub fn try_from_rational(q: &BigRational) -> Result<Dyadic> {
        let den = q.denom();
        let tz = den.trailing_zeros().unwrap_or(0);
        if (den >> tz as usize) != BigInt::one() {
            return Err(Error::InvalidInput(format!("{q} is not a dyadic rational")));
        }
        Ok(Dyadic::new(q.numer().clone(), -(tz as i64)))
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits() as i64;
        let (m, e) = if bits > 60 {
            let shift = bits - 60;
            (&self.mantissa >> shift as usize, self.exponent + shift)
        } else {
            (self.mantissa.clone(), self.exponent)
        };
        let m = m.to_f64().unwrap_or(0.0);
        // split the power so neither factor under/overflows prematurely
        let half = (e / 2) as i32;
        let rest = (e - half as i64) as i32;
        m * 2f64.powi(half) * 2f64.powi(rest)
    }

    pub fn min(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn max(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// Decimal rendering with `digits` places after the point (truncated toward -inf).
    pub fn to_decimal(&self, digits: usize) -> String {
        rational_to_decimal(&self.to_rational(), digits)
    }
}

/// `floor(x * 2^g)`, exact when `x` is on the grid.
fn scaled_int(x: &Dyadic, g: i64) -> BigInt {
    x.shl(g).floor()
}

fn scale_rational(q: &BigRational, g: i64) -> BigRational {
    if g >= 0 {
        q * BigRational::from_integer(BigInt::one() << g as usize)
    } else {
        q / BigRational::from_integer(BigInt::one() << (-g) as usize)
    }
}

/// Decimal rendering of an exact rational, rounded toward negative infinity.
pub fn rational_to_decimal(q: &BigRational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (q * BigRational::from_integer(scale.clone())).floor().to_integer();
    let neg = scaled.is_negative();
    let abs = scaled.abs();
    let (int, frac) = abs.div_rem(&scale);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int}");
    }
    format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits)
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.exponent == other.exponent {
            return self.mantissa.cmp(&other.mantissa);
        }
        let s1 = self.mantissa.sign();
        let s2 = other.mantissa.sign();
        if s1 != s2 {
            return s1.cmp(&s2);
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &other.mantissa << (other.exponent - e) as usize;
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let e = self.exponent.min(rhs.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &rhs.mantissa << (rhs.exponent - e) as usize;
        Dyadic::new(a + b, e)
    }
}

impl Sub<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl Mul<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mantissa * &rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident, $t:ty) => {
        impl $tr<$t> for $t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&$t> for $t {
            type Output = $t;
            fn $m(self, rhs: &$t) -> $t {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add, Dyadic);
forward_owned!(Sub, sub, Dyadic);
forward_owned!(Mul, mul, Dyadic);

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

/// Parses `p/q`, decimals (`0.375`), integers, and `m*2^e` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("cannot parse number {s:?}"));
    if let Some((m, e)) = s.split_once("*2^") {
        let m: BigInt = m.trim().parse().map_err(|_| bad())?;
        let e: i64 = e.trim().parse().map_err(|_| bad())?;
        return Ok(Dyadic::new(m, e).to_rational());
    }
    if let Some(e) = s.strip_prefix("2^") {
        let e: i64 = e.trim().parse().map_err(|_| bad())?;
        return Ok(Dyadic::pow2(e).to_rational());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        let int_digits = if int_digits.is_empty() { "0" } else { int_digits };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let i: BigInt = int_digits.parse().map_err(|_| bad())?;
        let fnum: BigInt = frac.parse().map_err(|_| bad())?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let mag = BigRational::new(i * &den + fnum, den);
        return Ok(if neg { -mag } else { mag });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

impl FromStr for Dyadic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Dyadic::try_from_rational(&parse_rational(s)?)
    }
}

/// Closed interval `[lo, hi]` with dyadic endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    lo: Dyadic,
    hi: Dyadic,
}

impl DyadicInterval {
    /// Panics when `lo > hi`; use [`DyadicInterval::try_new`] for untrusted input.
    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        assert!(lo <= hi, "interval endpoints out of order: [{lo}, {hi}]");
        DyadicInterval { lo, hi }
    }

    pub fn try_new(lo: Dyadic, hi: Dyadic) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidInput(format!("[{lo}, {hi}] is empty")));
        }
        Ok(DyadicInterval { lo, hi })
    }

    pub fn point(x: Dyadic) -> Self {
        DyadicInterval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn zero() -> Self {
        Self::point(Dyadic::zero())
    }

    pub fn unit() -> Self {
        Self::new(Dyadic::zero(), Dyadic::one())
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn width(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Dyadic {
        (&self.lo + &self.hi).shl(-1)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        &self.lo.to_rational() <= q && q <= &self.hi.to_rational()
    }

    /// `self ⊆ other`.
    pub fn is_subset(&self, other: &DyadicInterval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn hull(&self, other: &DyadicInterval) -> DyadicInterval {
        DyadicInterval {
            lo: Dyadic::min(&self.lo, &other.lo),
            hi: Dyadic::max(&self.hi, &other.hi),
        }
    }

    pub fn intersect(&self, other: &DyadicInterval) -> Option<DyadicInterval> {
        let lo = Dyadic::max(&self.lo, &other.lo);
        let hi = Dyadic::min(&self.hi, &other.hi);
        (lo <= hi).then_some(DyadicInterval { lo, hi })
    }

    /// Multiply both endpoints by `2^k`.
    pub fn shl(&self, k: i64) -> DyadicInterval {
        DyadicInterval {
            lo: self.lo.shl(k),
            hi: self.hi.shl(k),
        }
    }

    pub fn scale(&self, c: &Dyadic) -> DyadicInterval {
        let a = &self.lo * c;
        let b = &self.hi * c;
        if a <= b {
            DyadicInterval { lo: a, hi: b }
        } else {
            DyadicInterval { lo: b, hi: a }
        }
    }

    /// Round endpoints outward onto the grid `2^-g`.
    pub fn round_outward(&self, g: i64) -> DyadicInterval {
        DyadicInterval {
            lo: self.lo.round_down(g),
            hi: self.hi.round_up(g),
        }
    }

    /// Clamp into `[a, b]`, assuming the true value is known to lie there.
    pub fn clamp(&self, a: &Dyadic, b: &Dyadic) -> DyadicInterval {
        let lo = Dyadic::min(&Dyadic::max(&self.lo, a), b);
        let hi = Dyadic::max(&Dyadic::min(&self.hi, b), a);
        DyadicInterval { lo, hi }
    }

    /// Absolute value range.
    pub fn abs(&self) -> DyadicInterval {
        if self.contains_zero() {
            DyadicInterval {
                lo: Dyadic::zero(),
                hi: Dyadic::max(&self.lo.abs(), &self.hi.abs()),
            }
        } else if self.lo.is_positive() {
            self.clone()
        } else {
            -self
        }
    }

    /// Exact range of `x^2`.
    pub fn square(&self) -> DyadicInterval {
        let a = self.abs();
        DyadicInterval {
            lo: &a.lo * &a.lo,
            hi: &a.hi * &a.hi,
        }
    }

    pub fn magnitude(&self) -> Dyadic {
        Dyadic::max(&self.lo.abs(), &self.hi.abs())
    }

    pub fn to_rational_pair(&self) -> (BigRational, BigRational) {
        (self.lo.to_rational(), self.hi.to_rational())
    }

    /// Outward enclosure of `num/den`-style rational bounds.
    pub fn from_rationals(lo: &BigRational, hi: &BigRational, p: Precision) -> DyadicInterval {
        let g = p.0 as i64 + 1;
        DyadicInterval::new(Dyadic::floor_rational(lo, g), Dyadic::ceil_rational(hi, g))
    }

    pub fn enclose_rational(q: &BigRational, p: Precision) -> DyadicInterval {
        Self::from_rationals(q, q, p)
    }

    pub fn div(&self, other: &DyadicInterval, p: Precision) -> Result<DyadicInterval> {
        interval_div(self, other, p)
    }

    pub fn exp(&self, p: Precision) -> DyadicInterval {
        interval_exp(self, p)
    }

    /// Divide by a positive integer, rounding outward on the grid `2^-g`.
    pub fn div_int(&self, n: u64, g: i64) -> DyadicInterval {
        let n = BigInt::from(n);
        let lo = Dyadic::new(scaled_int(&self.lo, g).div_floor(&n), -g);
        let hi = Dyadic::new(-(-scaled_int(&self.hi, g)).div_floor(&n), -g);
        DyadicInterval::new(lo, hi)
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Add<&DyadicInterval> for &DyadicInterval {
    type Output = DyadicInterval;
    fn add(self, rhs: &DyadicInterval) -> DyadicInterval {
        DyadicInterval {
            lo: &self.lo + &rhs.lo,
            hi: &self.hi + &rhs.hi,
        }
    }
}

impl Sub<&DyadicInterval> for &DyadicInterval {
    type Output = DyadicInterval;
    fn sub(self, rhs: &DyadicInterval) -> DyadicInterval {
        DyadicInterval {
            lo: &self.lo - &rhs.hi,
            hi: &self.hi - &rhs.lo,
        }
    }
}

impl Mul<&DyadicInterval> for &DyadicInterval {
    type Output = DyadicInterval;
    fn mul(self, rhs: &DyadicInterval) -> DyadicInterval {
        let c = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = c.iter().min().cloned().unwrap_or_else(Dyadic::zero);
        let hi = c.iter().max().cloned().unwrap_or_else(Dyadic::zero);
        DyadicInterval { lo, hi }
    }
}

impl Neg for &DyadicInterval {
    type Output = DyadicInterval;
    fn neg(self) -> DyadicInterval {
        DyadicInterval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }
}

forward_owned!(Add, add, DyadicInterval);
forward_owned!(Sub, sub, DyadicInterval);
forward_owned!(Mul, mul, DyadicInterval);

pub fn interval_add(a: &DyadicInterval, b: &DyadicInterval) -> DyadicInterval {
    a + b
}

pub fn interval_sub(a: &DyadicInterval, b: &DyadicInterval) -> DyadicInterval {
    a - b
}

pub fn interval_mul(a: &DyadicInterval, b: &DyadicInterval) -> DyadicInterval {
    a * b
}

/// Outward-rounded quotient hull; endpoints land on the grid `2^-(k+1)`,
/// so the result is at most `2^-k` wider than the exact hull.
pub fn interval_div(a: &DyadicInterval, b: &DyadicInterval, p: Precision) -> Result<DyadicInterval> {
    if b.contains_zero() {
        return Err(Error::DivisorStraddlesZero);
    }
    let g = p.0 as i64 + 1;
    let pairs = [(&a.lo, &b.lo), (&a.lo, &b.hi), (&a.hi, &b.lo), (&a.hi, &b.hi)];
    let lo = pairs.iter().map(|(x, y)| quotient_floor(x, y, g)).min().expect("four candidates");
    let hi = pairs.iter().map(|(x, y)| quotient_ceil(x, y, g)).max().expect("four candidates");
    Ok(DyadicInterval::new(Dyadic::new(lo, -g), Dyadic::new(hi, -g)))
}

/// `(num, den)` with `x / y * 2^g = num / den` and `den > 0`.
fn quotient_parts(x: &Dyadic, y: &Dyadic, g: i64) -> (BigInt, BigInt) {
    let shift = x.exponent - y.exponent + g;
    let (mut num, mut den) = if shift >= 0 {
        (&x.mantissa << shift as usize, y.mantissa.clone())
    } else {
        (x.mantissa.clone(), &y.mantissa << (-shift) as usize)
    };
    if den.is_negative() {
        num = -num;
        den = -den;
    }
    (num, den)
}

fn quotient_floor(x: &Dyadic, y: &Dyadic, g: i64) -> BigInt {
    let (num, den) = quotient_parts(x, y, g);
    num.div_floor(&den)
}

fn quotient_ceil(x: &Dyadic, y: &Dyadic, g: i64) -> BigInt {
    let (num, den) = quotient_parts(x, y, g);
    -(-num).div_floor(&den)
}

/// Enclosure of `{e^x : x ∈ a}` at most `2^-k` wider than the exact hull.
pub fn interval_exp(a: &DyadicInterval, p: Precision) -> DyadicInterval {
    let target = p.0 as i64 + 3;
    let lo = exp_point(&a.lo, target).lo;
    let hi = exp_point(&a.hi, target).hi;
    DyadicInterval::new(lo.round_down(target), hi.round_up(target))
}

/// Enclosure of `e^x` of width at most `2^-target`.
fn exp_point(x: &Dyadic, target: i64) -> DyadicInterval {
    if x.is_zero() {
        return DyadicInterval::point(Dyadic::one());
    }
    // e^x < 2^-target once x < -(target + 4)
    if *x < Dyadic::from_int(-(target + 4)) {
        return DyadicInterval::new(Dyadic::zero(), Dyadic::pow2(-target));
    }
    let int_bits = x.abs().floor().bits() as i64;
    let s = if x.abs() <= Dyadic::pow2(-1) { 0 } else { int_bits + 1 };
    let y = x.shl(-s);
    let pos_mag = if x.is_positive() {
        2 * x.ceil().to_i64().unwrap_or(i64::MAX / 4) + 1
    } else {
        0
    };
    let mut w = target + s + pos_mag + 16;
    loop {
        let mut acc = exp_series(&y, w);
        for _ in 0..s {
            acc = acc.square().round_outward(w);
        }
        if acc.width() <= Dyadic::pow2(-target) {
            return acc;
        }
        w += 32;
    }
}

/// Taylor series for `e^y`, `|y| <= 1/2`, in fixed point with `g = w + 12`
/// fractional bits.
///
/// Each computed term is within 6 ulps of the true term: truncating `Y`,
/// the product and the division each cost at most one ulp, and the error
/// inherited from the previous term is at least halved by `|y| <= 1/2`.
/// Once a term drops below 32 ulps, the rest of the series is below that
/// term plus its error.
fn exp_series(y: &Dyadic, w: i64) -> DyadicInterval {
    let g = w + 12;
    let yy = y.shl(g).floor();
    let mut term = BigInt::one() << g as usize;
    let mut sum = term.clone();
    let mut n: u64 = 0;
    loop {
        n += 1;
        term = (&term * &yy) >> g as usize;
        term /= BigInt::from(n);
        sum += &term;
        if term.magnitude().bits() <= 5 {
            break;
        }
    }
    let radius = BigInt::from(6 * n + 6 + 2) + term.abs();
    DyadicInterval::new(Dyadic::new(&sum - &radius, -g), Dyadic::new(&sum + &radius, -g))
}

/// Closed interval with exact rational endpoints, for piecewise-constant
/// densities whose values (2/3, 4/3) are not dyadic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RationalInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "rational interval out of order");
        RationalInterval { lo, hi }
    }

    pub fn point(q: BigRational) -> Self {
        RationalInterval {
            lo: q.clone(),
            hi: q,
        }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn hull(&self, other: &RationalInterval) -> RationalInterval {
        RationalInterval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn add(&self, other: &RationalInterval) -> RationalInterval {
        RationalInterval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn mul(&self, other: &RationalInterval) -> RationalInterval {
        let c = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        RationalInterval {
            lo: c.iter().min().cloned().expect("nonempty"),
            hi: c.iter().max().cloned().expect("nonempty"),
        }
    }

    pub fn scale(&self, c: &BigRational) -> RationalInterval {
        self.mul(&RationalInterval::point(c.clone()))
    }

    pub fn div(&self, other: &RationalInterval) -> Result<RationalInterval> {
        if other.lo <= BigRational::zero() && other.hi >= BigRational::zero() {
            return Err(Error::DivisorStraddlesZero);
        }
        let inv = RationalInterval {
            lo: other.hi.recip(),
            hi: other.lo.recip(),
        };
        Ok(self.mul(&inv))
    }

    /// Outward dyadic enclosure with rounding slack at most `2^-k`.
    pub fn enclose(&self, p: Precision) -> DyadicInterval {
        DyadicInterval::from_rationals(&self.lo, &self.hi, p)
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn iv(a: &str, b: &str) -> DyadicInterval {
        DyadicInterval::new(d(a), d(b))
    }

    fn q(n: i64, den: i64) -> BigRational {
        BigRational::new(n.into(), den.into())
    }

    #[test]
    fn canonical_form() {
        let x = Dyadic::new(BigInt::from(12), 0);
        assert_eq!(x.mantissa(), &BigInt::from(3));
        assert_eq!(x.exponent(), 2);
        let z = Dyadic::new(BigInt::zero(), 17);
        assert_eq!(z.exponent(), 0);
        assert_eq!(d("1/2"), Dyadic::pow2(-1));
        assert_eq!(d("0.375").to_string(), "3*2^-3");
    }

    #[test]
    fn non_dyadic_parse_fails() {
        assert!("1/3".parse::<Dyadic>().is_err());
        assert!("0.3".parse::<Dyadic>().is_err());
    }

    #[test]
    fn ordering_across_exponents() {
        assert!(d("1/4") < d("1/2"));
        assert!(d("-3") < d("1/1024"));
        assert!(d("5*2^-3") > d("1/2"));
        assert_eq!(d("8").cmp(&Dyadic::pow2(3)), Ordering::Equal);
    }

    #[test]
    fn add_examples() {
        assert_eq!(interval_add(&iv("0", "1"), &iv("0", "1")), iv("0", "2"));
        assert_eq!(interval_add(&iv("1/4", "1/2"), &iv("-1/2", "-1/4")), iv("-1/4", "1/4"));
        assert_eq!(interval_add(&iv("0", "0"), &iv("3/8", "5")), iv("3/8", "5"));
    }

    #[test]
    fn mul_examples() {
        assert_eq!(interval_mul(&iv("-1", "2"), &iv("3", "4")), iv("-4", "8"));
        assert_eq!(interval_mul(&iv("0", "0"), &iv("-3", "5")), iv("0", "0"));
        assert_eq!(interval_mul(&iv("1", "1"), &iv("-3", "5/2")), iv("-3", "5/2"));
    }

    #[test]
    fn div_examples() {
        let r = interval_div(&iv("1", "1"), &iv("2", "2"), Precision(10)).unwrap();
        assert_eq!(r, iv("1/2", "1/2"));
        let r = interval_div(&iv("1", "1"), &iv("3", "3"), Precision(4)).unwrap();
        assert!(r.width() <= Precision(4).width());
        assert!(r.contains_rational(&q(1, 3)));
        assert_eq!(
            interval_div(&iv("1", "2"), &iv("0", "1"), Precision(4)),
            Err(Error::DivisorStraddlesZero)
        );
    }

    #[test]
    fn exp_at_zero() {
        let r = interval_exp(&iv("0", "0"), Precision(20));
        assert!(r.contains(&Dyadic::one()));
        assert!(r.width() <= Precision(20).width());
    }

    #[test]
    fn exp_of_large_negative_is_tiny() {
        let r = interval_exp(&iv("-1000", "-1000"), Precision(30));
        assert_eq!(r.lo(), &Dyadic::zero());
        assert!(r.hi() <= &Precision(30).width());
    }

    #[test]
    fn floor_and_rounding() {
        assert_eq!(d("-1/2").floor(), BigInt::from(-1));
        assert_eq!(d("-1/2").ceil(), BigInt::from(0));
        assert_eq!(d("5/8").round_down(1), d("1/2"));
        assert_eq!(d("5/8").round_up(1), d("1"));
        assert_eq!(Dyadic::floor_rational(&q(1, 3), 2), d("1/4"));
        assert_eq!(Dyadic::ceil_rational(&q(1, 3), 2), d("1/2"));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3*2^-2").unwrap(), q(3, 4));
        assert_eq!(parse_rational("-0.25").unwrap(), q(-1, 4));
        assert_eq!(parse_rational("2/6").unwrap(), q(1, 3));
        assert_eq!(parse_rational("2^-3").unwrap(), q(1, 8));
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(d("3/8").to_decimal(4), "0.3750");
        assert_eq!(rational_to_decimal(&q(-1, 3), 3), "-0.334");
        assert!((d("-5*2^-3").to_f64() + 0.625).abs() < 1e-15);
    }

    #[test]
    fn rational_interval_enclosure() {
        let r = RationalInterval::point(q(4, 3)).enclose(Precision(20));
        assert!(r.contains_rational(&q(4, 3)));
        assert!(r.width() <= Precision(20).width());
    }

    /// Truncated Taylor series of e^x with a rational tail bound, as an interval.
    fn exp_oracle(x: &BigRational, terms: u32) -> (BigRational, BigRational) {
        let mut sum = BigRational::zero();
        let mut term = BigRational::one();
        for i in 0..terms {
            sum += &term;
            term = term * x / BigRational::from_integer(BigInt::from(i + 1));
        }
        // remainder <= |x|^N/N! * e^|x| <= |term| * 3^ceil|x|
        let a = x.abs().ceil().to_integer().to_u32().unwrap();
        let r = term.abs() * BigRational::from_integer(BigInt::from(3u32).pow(a));
        (&sum - &r, sum + r)
    }

    #[test]
    fn exp_minus_one_contains_series_oracle() {
        let r = interval_exp(&iv("-1", "-1"), Precision(20));
        let (lo, hi) = exp_oracle(&q(-1, 1), 30);
        assert!(r.lo().to_rational() <= lo && hi <= r.hi().to_rational());
        assert!(r.width() <= Precision(20).width());
        assert!((r.lo().to_f64() - 0.36787944).abs() < 1e-6);
    }

    fn small_dyadic() -> impl Strategy<Value = Dyadic> {
        (-4096i64..4096, 0u32..12).prop_map(|(m, k)| Dyadic::ratio_pow2(m, k))
    }

    fn interval() -> impl Strategy<Value = DyadicInterval> {
        (small_dyadic(), small_dyadic()).prop_map(|(a, b)| {
            if a <= b {
                DyadicInterval::new(a, b)
            } else {
                DyadicInterval::new(b, a)
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn ring_ops_match_rationals(a in interval(), b in interval()) {
            let (al, ah) = a.to_rational_pair();
            let (bl, bh) = b.to_rational_pair();
            let s = &a + &b;
            prop_assert_eq!(s.to_rational_pair(), (&al + &bl, &ah + &bh));
            let d = &a - &b;
            prop_assert_eq!(d.to_rational_pair(), (&al - &bh, &ah - &bl));
            let c = [&al * &bl, &al * &bh, &ah * &bl, &ah * &bh];
            let m = &a * &b;
            prop_assert_eq!(
                m.to_rational_pair(),
                (c.iter().min().unwrap().clone(), c.iter().max().unwrap().clone())
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn exp_contains_oracle(m in -2048i64..2048, k in prop::sample::select(vec![8u32, 16, 32])) {
            let x = Dyadic::ratio_pow2(m, 8);
            let r = interval_exp(&DyadicInterval::point(x.clone()), Precision(k));
            let (lo, hi) = exp_oracle(&x.to_rational(), 60);
            prop_assert!(r.lo().to_rational() <= lo && hi <= r.hi().to_rational());
            prop_assert!(r.width() <= Precision(k).width());
        }

        #[test]
        fn exp_inclusion_monotone(a in interval(), b in interval()) {
            // keep magnitudes moderate: absolute width on e^4000 needs thousands of bits
            let a = a.shl(-6);
            let b = b.shl(-6);
            let outer = a.hull(&b);
            let p = Precision(12);
            let slack = DyadicInterval::new(-p.width(), p.width());
            let big = &interval_exp(&outer, p) + &slack;
            prop_assert!(interval_exp(&a, p).is_subset(&big));
        }

        #[test]
        fn div_contains_quotients(a in interval(), b in interval(), k in 0u32..30) {
            match interval_div(&a, &b, Precision(k)) {
                Err(e) => prop_assert!(b.contains_zero() && e == Error::DivisorStraddlesZero),
                Ok(r) => {
                    let (al, ah) = a.to_rational_pair();
                    let (bl, bh) = b.to_rational_pair();
                    let c = [&al / &bl, &al / &bh, &ah / &bl, &ah / &bh];
                    let lo = c.iter().min().unwrap();
                    let hi = c.iter().max().unwrap();
                    prop_assert!(r.contains_rational(lo) && r.contains_rational(hi));
                    let extra = r.width().to_rational() - (hi - lo);
                    prop_assert!(extra <= Precision(k).width().to_rational());
                }
            }
        }
    }
}
