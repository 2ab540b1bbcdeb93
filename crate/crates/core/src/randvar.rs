//! Computable reals and random variables driven by bit tapes.

use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::dyadic::{Dyadic, DyadicInterval, Precision};
use crate::error::{Error, Result};
use crate::tape::{BitSource, BitTape};

/// Default bit budget per sample.
pub const DEFAULT_BUDGET: u64 = 10_000;

pub trait RealQuery: Send + Sync {
    /// Enclosure of width at most `2^-k`, nested in `k`.
    fn query(&self, p: Precision) -> Result<DyadicInterval>;
}

/// A computable real: any precision on demand.
#[derive(Clone)]
pub struct CReal(Arc<dyn RealQuery>);

impl fmt::Debug for CReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.query(Precision(16)) {
            Ok(i) => write!(f, "CReal~{i}"),
            Err(e) => write!(f, "CReal<{e}>"),
        }
    }
}

struct Exact(Dyadic);

impl RealQuery for Exact {
    fn query(&self, _: Precision) -> Result<DyadicInterval> {
        Ok(DyadicInterval::point(self.0.clone()))
    }
}

struct Rational(BigRational);

impl RealQuery for Rational {
    fn query(&self, p: Precision) -> Result<DyadicInterval> {
        let g = p.0 as i64;
        Ok(DyadicInterval::new(
            Dyadic::floor_rational(&self.0, g),
            Dyadic::ceil_rational(&self.0, g),
        ))
    }
}

struct FromFn<F>(F);

impl<F> RealQuery for FromFn<F>
where
    F: Fn(Precision) -> Result<DyadicInterval> + Send + Sync,
{
    fn query(&self, p: Precision) -> Result<DyadicInterval> {
        (self.0)(p)
    }
}

impl CReal {
    pub fn new(q: impl RealQuery + 'static) -> Self {
        CReal(Arc::new(q))
    }

    pub fn exact(x: Dyadic) -> Self {
        Self::new(Exact(x))
    }

    /// Rationals snap to the grid `2^-k`; dyadic values come back as points.
    pub fn rational(q: BigRational) -> Self {
        match Dyadic::try_from_rational(&q) {
            Ok(d) => Self::exact(d),
            Err(_) => Self::new(Rational(q)),
        }
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::rational(BigRational::new(n.into(), d.into()))
    }

    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(Precision) -> Result<DyadicInterval> + Send + Sync + 'static,
    {
        Self::new(FromFn(f))
    }

    pub fn query(&self, p: Precision) -> Result<DyadicInterval> {
        self.0.query(p)
    }

    /// Rough float value, for display only.
    pub fn approx(&self, k: u32) -> Result<f64> {
        Ok(self.query(Precision(k))?.midpoint().to_f64())
    }
}

/// Tape bits read on demand and remembered, so repeated queries of a lazy
/// sample see the same prefix.
pub struct LazyBits {
    inner: Mutex<(Box<dyn BitSource>, Vec<bool>)>,
}

impl LazyBits {
    pub fn new(src: impl BitSource + 'static) -> Self {
        LazyBits {
            inner: Mutex::new((Box::new(src), Vec::new())),
        }
    }

    pub fn bit(&self, j: usize) -> bool {
        let mut g = self.inner.lock().expect("tape lock");
        let (src, seen) = &mut *g;
        while seen.len() <= j {
            seen.push(src.next_bit());
        }
        seen[j]
    }

    /// The first `k` bits as an integer, most significant first.
    pub fn prefix_int(&self, k: usize) -> BigInt {
        if k > 0 {
            self.bit(k - 1);
        }
        let g = self.inner.lock().expect("tape lock");
        g.1[..k]
            .iter()
            .fold(BigInt::zero(), |acc, &b| (acc << 1) + (b as u8))
    }

    pub fn consumed(&self) -> u64 {
        self.inner.lock().expect("tape lock").1.len() as u64
    }
}

/// Uniform `[0,1]` real whose `k`-th query reads only the first `k` bits.
pub struct UniformReal {
    bits: LazyBits,
}

impl UniformReal {
    pub fn bits(&self) -> &LazyBits {
        &self.bits
    }
}

impl RealQuery for UniformReal {
    fn query(&self, p: Precision) -> Result<DyadicInterval> {
        let k = p.0 as usize;
        let m = self.bits.prefix_int(k);
        let lo = Dyadic::new(m.clone(), -(k as i64));
        let hi = Dyadic::new(m + 1, -(k as i64));
        Ok(DyadicInterval::new(lo, hi))
    }
}

pub fn uniform(t: impl BitSource + 'static) -> CReal {
    CReal::new(UniformReal {
        bits: LazyBits::new(t),
    })
}

/// A uniform draw that keeps a handle on how many bits it has read.
pub fn uniform_tracked(t: impl BitSource + 'static) -> (CReal, Arc<UniformReal>) {
    let u = Arc::new(UniformReal {
        bits: LazyBits::new(t),
    });
    (CReal(u.clone()), u)
}

pub fn fair_coin<T: BitSource + ?Sized>(t: &mut T) -> bool {
    t.next_bit()
}

/// Returns whether the tape value `0.x0x1...` is below `alpha`.
///
/// After `n` bits the tape value lies in the cylinder `[s, s + 2^-n)`; we stop
/// as soon as that cylinder sits entirely on one side of an enclosure of alpha.
pub fn bernoulli<T: BitSource + ?Sized>(alpha: &CReal, t: &mut T, budget: u64) -> Result<bool> {
    let mut s = BigInt::zero();
    for n in 1..=budget {
        s = (s << 1) + (t.next_bit() as u8);
        let a = alpha.query(Precision(n as u32 + 4))?;
        let lo = Dyadic::new(s.clone(), -(n as i64));
        let hi = Dyadic::new(&s + 1, -(n as i64));
        if &hi <= a.lo() {
            return Ok(true);
        }
        if &lo >= a.hi() {
            return Ok(false);
        }
    }
    Err(Error::BudgetExceeded { budget })
}

/// Number of zeros before the first one.
pub fn geometric<T: BitSource + ?Sized>(t: &mut T, budget: u64) -> Result<u64> {
    for n in 0..budget {
        if t.next_bit() {
            return Ok(n);
        }
    }
    Err(Error::BudgetExceeded { budget })
}

/// Uniform on `{0..m-1}` by rejection on `ceil(log2 m)`-bit blocks.
pub fn discrete_uniform<T: BitSource + ?Sized>(t: &mut T, m: u64, budget: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::InvalidInput("discrete_uniform needs m >= 1".into()));
    }
    if m == 1 {
        return Ok(0);
    }
    let bits = 64 - (m - 1).leading_zeros() as u64;
    let mut used = 0;
    while used + bits <= budget.max(bits) {
        let v = (0..bits).fold(0u64, |acc, _| (acc << 1) | t.next_bit() as u64);
        used += bits;
        if v < m {
            return Ok(v);
        }
    }
    Err(Error::BudgetExceeded { budget })
}

/// Binary digit `n` of `x` in `[0,1)`, i.e. `floor(2^{n+1} x) mod 2`.
///
/// The enclosure must land strictly inside one open cell of width
/// `2^-(n+1)`; a value sitting on a cell boundary has two expansions and
/// is reported as [`Error::DyadicBoundary`].
pub fn binary_digit(x: &CReal, n: u64, budget: u32) -> Result<bool> {
    let shift = n as i64 + 1;
    for i in 0..=budget {
        let k = n as u32 + 2 + 4 * i;
        let e = x.query(Precision(k))?;
        let lo = e.lo().shl(shift);
        let hi = e.hi().shl(shift);
        let a = lo.floor();
        if a == hi.floor() && lo != Dyadic::from_bigint(a.clone()) {
            return Ok(a.bit(0));
        }
        if e.is_point() {
            break;
        }
    }
    Err(Error::DyadicBoundary { digit: n })
}

/// Lazy real-valued random variable.
#[derive(Clone)]
pub struct RandVarReal {
    draw: Arc<dyn Fn(BitTape) -> Result<CReal> + Send + Sync>,
    pub bit_budget: Option<u64>,
}

impl RandVarReal {
    pub fn new<F>(f: F, bit_budget: Option<u64>) -> Self
    where
        F: Fn(BitTape) -> Result<CReal> + Send + Sync + 'static,
    {
        RandVarReal {
            draw: Arc::new(f),
            bit_budget,
        }
    }

    pub fn uniform() -> Self {
        Self::new(|t| Ok(uniform(t)), None)
    }

    /// One lazy draw; the tape is owned by the returned real.
    pub fn draw(&self, t: BitTape) -> Result<CReal> {
        (self.draw)(t)
    }

    pub fn sample(&self, t: BitTape, p: Precision) -> Result<DyadicInterval> {
        self.draw(t)?.query(p)
    }
}

type DiscreteDraw = Arc<dyn Fn(&mut dyn BitSource) -> Result<u64> + Send + Sync>;

#[derive(Clone)]
pub struct RandVarDiscrete {
    draw: DiscreteDraw,
    pub bit_budget: Option<u64>,
}

impl RandVarDiscrete {
    pub fn new<F>(f: F, bit_budget: Option<u64>) -> Self
    where
        F: Fn(&mut dyn BitSource) -> Result<u64> + Send + Sync + 'static,
    {
        RandVarDiscrete {
            draw: Arc::new(f),
            bit_budget,
        }
    }

    pub fn geometric() -> Self {
        Self::new(|t| geometric(t, DEFAULT_BUDGET), Some(DEFAULT_BUDGET))
    }

    pub fn discrete_uniform(m: u64) -> Self {
        Self::new(
            move |t| discrete_uniform(t, m, DEFAULT_BUDGET),
            Some(DEFAULT_BUDGET),
        )
    }

    pub fn bernoulli(alpha: CReal) -> Self {
        Self::new(
            move |t| bernoulli(&alpha, t, DEFAULT_BUDGET).map(u64::from),
            Some(DEFAULT_BUDGET),
        )
    }

    pub fn sample(&self, t: &mut dyn BitSource) -> Result<u64> {
        (self.draw)(t)
    }
}

/// Float view of an exact rational, for reporting.
pub fn rational_f64(q: &BigRational) -> f64 {
    q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
}
