//! Probability measures on `[0,1]` queried through lower and upper bounds
//! on finite unions of open intervals.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::dyadic::{parse_rational, Dyadic, DyadicInterval};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_interval, IntervalFn, QuadOptions};
use crate::randvar::RandVarReal;
use crate::tape::BitTape;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Finite union of open intervals, sorted and merged. Endpoints may lie
/// outside `[0,1]`; that is how a set says it contains the boundary points.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OpenSetUnion {
    intervals: Vec<(Dyadic, Dyadic)>,
}

impl OpenSetUnion {
    pub fn new(mut v: Vec<(Dyadic, Dyadic)>) -> Self {
        v.retain(|(a, b)| a < b);
        v.sort();
        let mut out: Vec<(Dyadic, Dyadic)> = Vec::with_capacity(v.len());
        for (a, b) in v {
            match out.last_mut() {
                Some(last) if a < last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => out.push((a, b)),
            }
        }
        OpenSetUnion { intervals: out }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// An open set covering all of `[0,1]`.
    pub fn whole() -> Self {
        Self::interval(Dyadic::from_int(-1), Dyadic::from_int(2))
    }

    pub fn interval(a: Dyadic, b: Dyadic) -> Self {
        Self::new(vec![(a, b)])
    }

    pub fn intervals(&self) -> &[(Dyadic, Dyadic)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn union(&self, other: &OpenSetUnion) -> OpenSetUnion {
        let mut v = self.intervals.clone();
        v.extend(other.intervals.iter().cloned());
        Self::new(v)
    }

    pub fn intersect(&self, other: &OpenSetUnion) -> OpenSetUnion {
        let mut v = Vec::new();
        for (a, b) in &self.intervals {
            for (c, d) in &other.intervals {
                v.push((Dyadic::max(a, c), Dyadic::min(b, d)));
            }
        }
        Self::new(v)
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.intervals
            .iter()
            .any(|(a, b)| &a.to_rational() < x && x < &b.to_rational())
    }

    /// Closed interval lies inside one open component.
    pub fn contains_interval(&self, x: &DyadicInterval) -> bool {
        self.intervals
            .iter()
            .any(|(a, b)| a < x.lo() && x.hi() < b)
    }

    /// Closed interval misses the set entirely.
    pub fn disjoint_from(&self, x: &DyadicInterval) -> bool {
        self.intervals
            .iter()
            .all(|(a, b)| x.hi() <= a || x.lo() >= b)
    }

    /// Lebesgue measure of the part inside `[0,1]`.
    pub fn lebesgue(&self) -> BigRational {
        self.clipped()
            .iter()
            .map(|(a, b)| (b - a).to_rational())
            .fold(BigRational::zero(), |s, x| s + x)
    }

    /// Components intersected with `[0,1]`, dropping empties.
    pub fn clipped(&self) -> Vec<(Dyadic, Dyadic)> {
        let (z, o) = (Dyadic::zero(), Dyadic::one());
        self.intervals
            .iter()
            .map(|(a, b)| (Dyadic::max(a, &z), Dyadic::min(b, &o)))
            .filter(|(a, b)| a < b)
            .collect()
    }

    /// Parses `(a,b);(c,d)` with dyadic endpoints; `""` or `"{}"` is empty.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "{}" {
            return Ok(Self::empty());
        }
        let mut v = Vec::new();
        for part in s.split(';') {
            let part = part.trim();
            let inner = part
                .strip_prefix('(')
                .and_then(|p| p.strip_suffix(')'))
                .ok_or_else(|| Error::Parse(format!("expected (a,b), got {part:?}")))?;
            let (a, b) = inner
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("expected (a,b), got {part:?}")))?;
            v.push((a.trim().parse::<Dyadic>()?, b.trim().parse::<Dyadic>()?));
        }
        Ok(Self::new(v))
    }
}

impl fmt::Display for OpenSetUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("{}");
        }
        let parts: Vec<String> = self
            .intervals
            .iter()
            .map(|(a, b)| format!("({a},{b})"))
            .collect();
        f.write_str(&parts.join(";"))
    }
}

/// First `k` intervals of an enumeration, merged.
pub fn nested_approx(u: &[(Dyadic, Dyadic)], k: usize) -> OpenSetUnion {
    OpenSetUnion::new(u.iter().take(k).cloned().collect())
}

/// Piecewise-constant density on a dyadic partition of `[0,1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseConst {
    breaks: Vec<Dyadic>,
    values: Vec<BigRational>,
}

impl PiecewiseConst {
    pub fn new(breaks: Vec<Dyadic>, values: Vec<BigRational>) -> Result<Self> {
        let ok = breaks.len() == values.len() + 1
            && breaks.first() == Some(&Dyadic::zero())
            && breaks.last() == Some(&Dyadic::one())
            && breaks.windows(2).all(|w| w[0] < w[1])
            && values.iter().all(|v| v >= &BigRational::zero());
        if !ok {
            return Err(Error::InvalidInput("malformed piecewise-constant density".into()));
        }
        let d = PiecewiseConst { breaks, values };
        if d.mass(&OpenSetUnion::whole()) != BigRational::one() {
            return Err(Error::InvalidInput("density does not integrate to 1".into()));
        }
        Ok(d)
    }

    pub fn breaks(&self) -> &[Dyadic] {
        &self.breaks
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    /// Exact integral over `U`.
    pub fn mass(&self, u: &OpenSetUnion) -> BigRational {
        let mut s = BigRational::zero();
        for (a, b) in u.clipped() {
            for (i, v) in self.values.iter().enumerate() {
                let lo = Dyadic::max(&a, &self.breaks[i]);
                let hi = Dyadic::min(&b, &self.breaks[i + 1]);
                if lo < hi {
                    s += (&hi - &lo).to_rational() * v;
                }
            }
        }
        s
    }

    /// Exact range of values over a closed interval.
    pub fn eval_range(&self, x: &DyadicInterval) -> (BigRational, BigRational) {
        let mut lo: Option<BigRational> = None;
        let mut hi: Option<BigRational> = None;
        for (i, v) in self.values.iter().enumerate() {
            // closed cells so boundary points see both neighbours
            if &self.breaks[i] <= x.hi() && x.lo() <= &self.breaks[i + 1] {
                lo = Some(lo.map_or(v.clone(), |l| l.min(v.clone())));
                hi = Some(hi.map_or(v.clone(), |h| h.max(v.clone())));
            }
        }
        (lo.unwrap_or_else(BigRational::zero), hi.unwrap_or_else(BigRational::zero))
    }
}

/// A density given by an interval extension, with a known sup bound.
#[derive(Clone)]
pub struct SmoothDensity {
    pub f: Arc<dyn IntervalFn>,
    pub sup: Dyadic,
}

impl fmt::Debug for SmoothDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothDensity(sup={})", self.sup)
    }
}

#[derive(Debug, Clone)]
pub enum Density {
    Uniform,
    PiecewiseConst(PiecewiseConst),
    Smooth(SmoothDensity),
}

type AtomFn = Arc<dyn Fn(usize) -> (BigRational, BigRational) + Send + Sync>;
type TailFn = Arc<dyn Fn(usize) -> BigRational + Send + Sync>;

#[derive(Clone)]
pub enum Atoms {
    /// `(point, mass)` pairs with masses summing to 1.
    Finite(Vec<(BigRational, BigRational)>),
    /// Infinitely many atoms; `tail(e)` bounds the mass of atoms `e, e+1, ...`.
    Enumerated { atom: AtomFn, tail: TailFn },
}

impl fmt::Debug for Atoms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atoms::Finite(v) => write!(f, "Atoms::Finite({} atoms)", v.len()),
            Atoms::Enumerated { .. } => f.write_str("Atoms::Enumerated"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Part {
    Density(Density),
    Atoms(Atoms),
}

type LowerFn = Arc<dyn Fn(&OpenSetUnion, u32) -> Dyadic + Send + Sync>;

#[derive(Clone)]
pub enum ComputableMeasure {
    /// Convex combination of density and atom parts.
    Composite(Vec<(BigRational, Part)>),
    /// Only lower bounds are available.
    LowerOnly(LowerFn),
    Conditioned(Box<ComputableMeasure>, AlmostDecidablePair),
}

impl fmt::Debug for ComputableMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComputableMeasure::Composite(parts) => f.debug_list().entries(parts).finish(),
            ComputableMeasure::LowerOnly(_) => f.write_str("LowerOnly"),
            ComputableMeasure::Conditioned(m, a) => write!(f, "Conditioned({m:?} | {a:?})"),
        }
    }
}

/// Effort ceiling for quadrature-backed parts.
const MAX_SMOOTH_EFFORT: u32 = 24;

fn grid(effort: u32) -> i64 {
    effort as i64 + 4
}

impl ComputableMeasure {
    pub fn lebesgue() -> Self {
        ComputableMeasure::Composite(vec![(BigRational::one(), Part::Density(Density::Uniform))])
    }

    pub fn piecewise(d: PiecewiseConst) -> Self {
        ComputableMeasure::Composite(vec![(
            BigRational::one(),
            Part::Density(Density::PiecewiseConst(d)),
        )])
    }

    pub fn smooth(d: SmoothDensity) -> Self {
        ComputableMeasure::Composite(vec![(BigRational::one(), Part::Density(Density::Smooth(d)))])
    }

    pub fn atoms(v: Vec<(BigRational, BigRational)>) -> Result<Self> {
        let total = v.iter().fold(BigRational::zero(), |s, (_, m)| s + m);
        if total != BigRational::one() || v.iter().any(|(_, m)| m < &BigRational::zero()) {
            return Err(Error::InvalidInput("atom masses must be nonnegative and sum to 1".into()));
        }
        Ok(ComputableMeasure::Composite(vec![(
            BigRational::one(),
            Part::Atoms(Atoms::Finite(v)),
        )]))
    }

    /// Half uniform, half on the rationals: atom `r_k` has mass `2^-(k+2)`.
    pub fn uniform_atom_mixture() -> Self {
        let atom: AtomFn = Arc::new(|k| {
            (
                crate::constructions::mixture::rational_enum(k as u64),
                BigRational::new(BigInt::one(), BigInt::one() << (k + 1)),
            )
        });
        let tail: TailFn = Arc::new(|e| BigRational::new(BigInt::one(), BigInt::one() << e));
        ComputableMeasure::Composite(vec![
            (q(1, 2), Part::Density(Density::Uniform)),
            (q(1, 2), Part::Atoms(Atoms::Enumerated { atom, tail })),
        ])
    }

    /// Rational bounds; `None` upper means only lower bounds are known.
    fn bounds(&self, u: &OpenSetUnion, effort: u32) -> Result<(BigRational, Option<BigRational>)> {
        match self {
            ComputableMeasure::LowerOnly(f) => Ok((f(u, effort).to_rational(), None)),
            ComputableMeasure::Composite(parts) => {
                let mut lo = BigRational::zero();
                let mut hi = BigRational::zero();
                for (w, part) in parts {
                    let (l, h) = part_bounds(part, u, effort)?;
                    lo += w * l;
                    hi += w * h;
                }
                Ok((lo, Some(hi)))
            }
            ComputableMeasure::Conditioned(base, a) => {
                let (l, h) = conditioned_bounds(base, a, u, effort)?;
                Ok((l, Some(h)))
            }
        }
    }

    pub fn lower(&self, u: &OpenSetUnion, effort: u32) -> Dyadic {
        lower_bound(self, u, effort)
    }

    pub fn upper(&self, u: &OpenSetUnion, effort: u32) -> Result<Dyadic> {
        upper_bound(self, u, effort)
    }

    /// Exact rational enclosure at this effort (before dyadic rounding).
    pub fn rational_bounds(&self, u: &OpenSetUnion, effort: u32) -> Result<(BigRational, BigRational)> {
        match self.bounds(u, effort)? {
            (l, Some(h)) => Ok((l, h)),
            _ => Err(Error::UnsupportedRepresentation),
        }
    }
}

fn part_bounds(part: &Part, u: &OpenSetUnion, effort: u32) -> Result<(BigRational, BigRational)> {
    match part {
        Part::Density(Density::Uniform) => {
            let m = u.lebesgue();
            Ok((m.clone(), m))
        }
        Part::Density(Density::PiecewiseConst(d)) => {
            let m = d.mass(u);
            Ok((m.clone(), m))
        }
        Part::Density(Density::Smooth(d)) => smooth_bounds(d, u, effort),
        Part::Atoms(Atoms::Finite(v)) => {
            let m = v
                .iter()
                .filter(|(x, _)| u.contains(x))
                .fold(BigRational::zero(), |s, (_, m)| s + m);
            Ok((m.clone(), m))
        }
        Part::Atoms(Atoms::Enumerated { atom, tail }) => {
            let e = effort as usize;
            let mut m = BigRational::zero();
            for k in 0..e {
                let (x, w) = atom(k);
                if u.contains(&x) {
                    m += w;
                }
            }
            let hi = &m + tail(e);
            Ok((m, hi))
        }
    }
}

/// Quadrature at every effort up to `effort`, keeping the tightest bounds so
/// the result is monotone in effort.
fn smooth_bounds(d: &SmoothDensity, u: &OpenSetUnion, effort: u32) -> Result<(BigRational, BigRational)> {
    let clipped = u.clipped();
    let top = effort.min(MAX_SMOOTH_EFFORT);
    let mut best: Option<(BigRational, BigRational)> = None;
    for e in 0..=top {
        let eps = Dyadic::pow2(-(e as i64) - 2);
        let mut lo = BigRational::zero();
        let mut hi = BigRational::zero();
        for (a, b) in &clipped {
            let r = integrate_interval(d.f.as_ref(), a, b, &eps, &QuadOptions::default())?;
            lo += r.lo().to_rational();
            hi += r.hi().to_rational();
        }
        lo = lo.max(BigRational::zero());
        hi = hi.min(BigRational::one());
        best = Some(match best {
            None => (lo, hi),
            Some((l, h)) => (l.max(lo), h.min(hi)),
        });
    }
    Ok(best.expect("at least one effort level"))
}

pub fn lower_bound(mu: &ComputableMeasure, u: &OpenSetUnion, effort: u32) -> Dyadic {
    if u.is_empty() {
        return Dyadic::zero();
    }
    match mu.bounds(u, effort) {
        Ok((l, _)) => Dyadic::floor_rational(&l.max(BigRational::zero()), grid(effort)),
        Err(_) => Dyadic::zero(),
    }
}

pub fn upper_bound(mu: &ComputableMeasure, u: &OpenSetUnion, effort: u32) -> Result<Dyadic> {
    if u.is_empty() {
        return Ok(Dyadic::zero());
    }
    match mu.bounds(u, effort)? {
        (_, Some(h)) => Ok(Dyadic::ceil_rational(&h.min(BigRational::one()), grid(effort))),
        _ => Err(Error::UnsupportedRepresentation),
    }
}

/// Inner and outer open approximations of a set whose boundary has small mass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlmostDecidablePair {
    pub inside: OpenSetUnion,
    pub outside: OpenSetUnion,
    /// Certified bound on `1 - mu(inside) - mu(outside)` at `effort`.
    pub gap: Dyadic,
    pub effort: u32,
}

impl AlmostDecidablePair {
    /// `(a,b)` against the rest of `[0,1]`; sound when `a` and `b` carry no atoms.
    pub fn interval(mu: &ComputableMeasure, a: Dyadic, b: Dyadic, effort: u32) -> Self {
        let inside = OpenSetUnion::interval(a.clone(), b.clone());
        let outside = OpenSetUnion::new(vec![
            (Dyadic::from_int(-1), a),
            (b, Dyadic::from_int(2)),
        ]);
        Self::from_sets(mu, inside, outside, effort)
    }

    pub fn whole() -> Self {
        AlmostDecidablePair {
            inside: OpenSetUnion::whole(),
            outside: OpenSetUnion::empty(),
            gap: Dyadic::zero(),
            effort: 0,
        }
    }

    pub fn from_sets(mu: &ComputableMeasure, inside: OpenSetUnion, outside: OpenSetUnion, effort: u32) -> Self {
        let li = lower_bound(mu, &inside, effort);
        let lo = lower_bound(mu, &outside, effort);
        let gap = Dyadic::max(&Dyadic::zero(), &(&(&Dyadic::one() - &li) - &lo));
        AlmostDecidablePair {
            inside,
            outside,
            gap,
            effort,
        }
    }
}

fn ball(center: &Dyadic, r: &Dyadic) -> OpenSetUnion {
    OpenSetUnion::interval(center - r, center + r)
}

fn outside_ball(center: &Dyadic, r: &Dyadic) -> OpenSetUnion {
    OpenSetUnion::new(vec![
        (Dyadic::from_int(-1), center - r),
        (center + r, Dyadic::from_int(2)),
    ])
}

/// Find radii `a < b` inside `(r_lo, r_hi)` such that `B(c, a)` and the
/// complement of the closed ball `B(c, b)` together miss at most `eps` mass.
///
/// Each round cuts the current range into three, measures the certified gap
/// of each piece, and keeps the piece with the smallest gap.
pub fn almost_decidable_ball(
    mu: &ComputableMeasure,
    center: &Dyadic,
    r_lo: &BigRational,
    r_hi: &BigRational,
    eps: &BigRational,
    effort: u32,
) -> Result<AlmostDecidablePair> {
    if r_lo >= r_hi {
        return Err(Error::InvalidInput("need r_lo < r_hi".into()));
    }
    // inward dyadic endpoints, strictly inside the open range
    let g = 48;
    let mut lo = Dyadic::floor_rational(r_lo, g) + Dyadic::pow2(-g);
    let mut hi = Dyadic::ceil_rational(r_hi, g) - Dyadic::pow2(-g);
    if lo >= hi {
        return Err(Error::SearchBudgetExceeded { effort });
    }
    let gap_of = |a: &Dyadic, b: &Dyadic| -> Dyadic {
        let li = lower_bound(mu, &ball(center, a), effort);
        let lo = lower_bound(mu, &outside_ball(center, b), effort);
        Dyadic::max(&Dyadic::zero(), &(&(&Dyadic::one() - &li) - &lo))
    };
    for _ in 0..=effort.max(8) * 2 {
        let w = &hi - &lo;
        let cuts = [
            lo.clone(),
            &lo + &(&w * &Dyadic::ratio_pow2(11, 5)),
            &lo + &(&w * &Dyadic::ratio_pow2(21, 5)),
            hi.clone(),
        ];
        let mut best: Option<(Dyadic, usize)> = None;
        for i in 0..3 {
            let gap = gap_of(&cuts[i], &cuts[i + 1]);
            if best.as_ref().is_none_or(|(b, _)| gap < *b) {
                best = Some((gap, i));
            }
        }
        let (gap, i) = best.expect("three candidates");
        if gap.to_rational() <= *eps {
            return Ok(AlmostDecidablePair {
                inside: ball(center, &cuts[i]),
                outside: outside_ball(center, &cuts[i + 1]),
                gap,
                effort,
            });
        }
        lo = cuts[i].clone();
        hi = cuts[i + 1].clone();
    }
    Err(Error::SearchBudgetExceeded { effort })
}

/// Effort used to certify that a conditioning event has positive mass.
pub const MAX_EFFORT: u32 = 30;

pub fn condition_on_event(mu: &ComputableMeasure, a: &AlmostDecidablePair) -> Result<ComputableMeasure> {
    if lower_bound(mu, &a.inside, MAX_EFFORT).is_zero() {
        return Err(Error::NullConditioningEvent);
    }
    mu.rational_bounds(&a.inside, 0)?;
    Ok(ComputableMeasure::Conditioned(Box::new(mu.clone()), a.clone()))
}

fn conditioned_bounds(
    base: &ComputableMeasure,
    a: &AlmostDecidablePair,
    u: &OpenSetUnion,
    effort: u32,
) -> Result<(BigRational, BigRational)> {
    let one = BigRational::one();
    let (num_lo, _) = base.rational_bounds(&u.intersect(&a.inside), effort)?;
    let (_, u_hi) = base.rational_bounds(u, effort)?;
    let (u_out_lo, _) = base.rational_bounds(&u.intersect(&a.outside), effort)?;
    let (den_lo, _) = base.rational_bounds(&a.inside, effort)?;
    let (out_lo, _) = base.rational_bounds(&a.outside, effort)?;
    let den_hi = &one - out_lo;
    let num_hi = (u_hi - u_out_lo).min(den_hi.clone());
    if den_lo <= BigRational::zero() {
        return Ok((BigRational::zero(), one));
    }
    let lo = (num_lo / den_hi).max(BigRational::zero());
    let hi = (num_hi / den_lo).min(one);
    Ok((lo.clone().min(hi.clone()), hi))
}

/// Monte Carlo estimate of `P(X in U)` with a 3-sigma half-width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Empirical {
    pub frequency: Dyadic,
    pub ci: Dyadic,
    pub straddled: u64,
}

pub fn empirical_measure(
    sampler: &RandVarReal,
    n: u64,
    u: &OpenSetUnion,
    t: &mut BitTape,
) -> Result<Empirical> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let mut inside = 0u64;
    let mut straddled = 0u64;
    if u.is_empty() {
        return Ok(Empirical {
            frequency: Dyadic::zero(),
            ci: Dyadic::zero(),
            straddled: 0,
        });
    }
    for _ in 0..n {
        let x = sampler.draw(t.fork())?;
        let mut decided = false;
        for k in [8u32, 16, 24, 32, 40] {
            let e = x.query(crate::dyadic::Precision(k))?;
            if u.contains_interval(&e) {
                inside += 1;
                decided = true;
                break;
            }
            if u.disjoint_from(&e) {
                decided = true;
                break;
            }
        }
        if !decided {
            straddled += 1;
        }
    }
    let g = 40;
    let freq = BigRational::new((2 * inside + straddled).into(), (2 * n).into());
    let frequency = Dyadic::floor_rational(&freq, g);
    // 3 sqrt(n/4)/n, rounded up, plus the straddle allowance and rounding
    let sd = Dyadic::ceil_rational(&sqrt_upper(&BigRational::new(1.into(), (4 * n).into()), g), g);
    let ci = &(&sd * &Dyadic::from_int(3))
        + &(&Dyadic::ceil_rational(&BigRational::new(straddled.into(), (2 * n).into()), g)
            + &Dyadic::pow2(-g));
    Ok(Empirical {
        frequency,
        ci,
        straddled,
    })
}

/// Rational upper bound on `sqrt(x)` within `2^-g`.
fn sqrt_upper(x: &BigRational, g: i64) -> BigRational {
    let scale = BigInt::one() << (2 * g as usize);
    let v = (x * BigRational::from_integer(scale)).ceil().to_integer();
    let r = v.sqrt() + 1;
    BigRational::new(r, BigInt::one() << g as usize)
}

/// Parses a dyadic or rational and returns it as an exact rational.
pub fn parse_point(s: &str) -> Result<BigRational> {
    parse_rational(s)
}
