//! The smooth variant: the step density of `X_k` is replaced by a density
//! built from the bump `f(x) = exp(-1/(1-x^2))`, so the conditional density
//! of `Z` given `N` is continuous everywhere.
//!
//! `Phi(y)` is the integral of the bump from -1. It is tabulated once on a
//! grid of width `2^-12`, together with `M(y) = int s f(s) ds`, which gives
//! the CDF of `F` by parts.

use std::sync::{Arc, Mutex, OnceLock};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::constructions::halting::{classify, spliced, Digits, RatioClassification, SplicedRef, Verdict};
use crate::dyadic::{Dyadic, DyadicInterval, Precision, RationalInterval};
use crate::error::{Error, Result};
use crate::machines::{HaltStatus, HaltingBudget, MachineTable};
use crate::measure::{ComputableMeasure, OpenSetUnion, SmoothDensity};
use crate::quadrature::IntervalFn;
use crate::randvar::{bernoulli, discrete_uniform, geometric, uniform, CReal, LazyBits, RealQuery, DEFAULT_BUDGET};
use crate::tape::BitTape;

const TABLE_LEVEL: i64 = 12;
const TABLE_PREC: Precision = Precision(64);

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn one() -> DyadicInterval {
    DyadicInterval::point(Dyadic::one())
}

/// `1 - x^2`, computed from `|x|` so the square is tight.
fn one_minus_sq(x: &DyadicInterval) -> DyadicInterval {
    let sq = x.abs().square();
    DyadicInterval::new(Dyadic::one() - sq.hi(), Dyadic::one() - sq.lo())
}

/// `exp(-1/g)` at a single positive `g`.
fn exp_neg_inv(g: &Dyadic, p: Precision) -> DyadicInterval {
    let e = DyadicInterval::point(-Dyadic::one())
        .div(&DyadicInterval::point(g.clone()), p.finer(4))
        .expect("g is positive");
    e.exp(p.finer(2))
}

pub fn bump(x: &DyadicInterval, p: Precision) -> DyadicInterval {
    let g = one_minus_sq(x);
    if !g.hi().is_positive() {
        return DyadicInterval::zero();
    }
    // f is increasing in g
    let hi = exp_neg_inv(g.hi(), p).hi().clone();
    let lo = if g.is_point() {
        return exp_neg_inv(g.hi(), p).clamp(&Dyadic::zero(), &Dyadic::one());
    } else if g.lo().is_positive() {
        exp_neg_inv(g.lo(), p).lo().clone()
    } else {
        Dyadic::zero()
    };
    DyadicInterval::new(Dyadic::max(&lo, &Dyadic::zero()), hi)
}

/// `1/g` for a cell strictly inside `(-1, 1)`.
fn inv_g(x: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
    let g = one_minus_sq(x);
    if !g.lo().is_positive() {
        return None;
    }
    one().div(&g, p).ok()
}

/// `f'/f = -2x / g^2`.
fn d1_factor(x: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
    let ig = inv_g(x, p.finer(8))?;
    Some(-&(&x.shl(1) * &ig.square()))
}

/// `f''/f = 4x^2/g^4 - 2/g^2 - 8x^2/g^3`.
fn d2_factor(x: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
    let ig = inv_g(x, p.finer(8))?;
    let x2 = x.abs().square();
    let ig2 = ig.square();
    let ig3 = &ig2 * &ig;
    let ig4 = ig2.square();
    Some(&(&(&x2 * &ig4).shl(2) - &ig2.shl(1)) - &(&x2 * &ig3).shl(3))
}

pub fn bump_d1(x: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
    Some(&bump(x, p) * &d1_factor(x, p)?)
}

pub fn bump_d2(x: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
    Some(&bump(x, p) * &d2_factor(x, p)?)
}

pub struct Bump;

impl IntervalFn for Bump {
    fn eval(&self, dom: &DyadicInterval, p: Precision) -> DyadicInterval {
        bump(dom, p)
    }
    fn first_derivative(&self, dom: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
        bump_d1(dom, p)
    }
    fn second_derivative(&self, dom: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
        bump_d2(dom, p)
    }
}

struct PhiTable {
    /// `f` at the grid points `-1 + i 2^-12`.
    f: Vec<DyadicInterval>,
    /// `Phi` at the grid points.
    phi: Vec<DyadicInterval>,
    /// `M(y) = int_{-1}^y s f(s) ds` at the grid points.
    moment: Vec<DyadicInterval>,
}

fn grid_point(i: usize) -> Dyadic {
    Dyadic::new((i as i64).into(), -TABLE_LEVEL) - Dyadic::one()
}

fn intersect_or(est: DyadicInterval, rect: DyadicInterval) -> DyadicInterval {
    est.intersect(&rect).unwrap_or(rect)
}

/// Integrals of `f` and of `s f(s)` over `[a, b]`, a cell that does not
/// contain 0, given `f` at both ends. `f` is monotone on such a cell, so
/// its range is the hull of the end values, and only the midpoint needs a
/// fresh `exp`.
fn cell_pair(a: &Dyadic, b: &Dyadic, fa: &DyadicInterval, fb: &DyadicInterval) -> (DyadicInterval, DyadicInterval) {
    let p = TABLE_PREC;
    let h = b - a;
    let dom = DyadicInterval::new(a.clone(), b.clone());
    let fr = fa.hull(fb);
    let rect_phi = fr.scale(&h);
    let rect_mom = (&dom * &fr).scale(&h);
    let (Some(d1), Some(d2)) = (d1_factor(&dom, p), d2_factor(&dom, p)) else {
        return (rect_phi, rect_mom);
    };
    let m = dom.midpoint();
    let fm = bump(&DyadicInterval::point(m.clone()), p);
    let h3 = &(&h * &h) * &h;
    let g = p.0 as i64 + 2;
    let f2 = &fr * &d2;
    let est_phi = &fm.scale(&h) + &f2.scale(&h3).div_int(24, g);
    // (s f)'' = 2 f' + s f''
    let sf2 = &fr * &(&d1.shl(1) + &(&dom * &d2));
    let est_mom = &fm.scale(&(&m * &h)) + &sf2.scale(&h3).div_int(24, g);
    (intersect_or(est_phi, rect_phi), intersect_or(est_mom, rect_mom))
}

fn table() -> &'static PhiTable {
    static T: OnceLock<PhiTable> = OnceLock::new();
    T.get_or_init(|| {
        let cells = 2usize << TABLE_LEVEL;
        let f: Vec<DyadicInterval> = (0..=cells)
            .map(|i| bump(&DyadicInterval::point(grid_point(i)), TABLE_PREC))
            .collect();
        let mut phi = vec![DyadicInterval::zero()];
        let mut moment = vec![DyadicInterval::zero()];
        for i in 0..cells {
            let (cp, cm) = cell_pair(&grid_point(i), &grid_point(i + 1), &f[i], &f[i + 1]);
            phi.push(&phi[i] + &cp);
            moment.push(&moment[i] + &cm);
        }
        PhiTable { f, phi, moment }
    })
}

/// `(Phi(s), M(s))`.
fn table_at(s: &Dyadic) -> (DyadicInterval, DyadicInterval) {
    let t = table();
    if s <= &-Dyadic::one() {
        return (DyadicInterval::zero(), DyadicInterval::zero());
    }
    let last = t.phi.len() - 1;
    if s >= &Dyadic::one() {
        return (t.phi[last].clone(), t.moment[last].clone());
    }
    let i = (s + &Dyadic::one()).shl(TABLE_LEVEL).floor();
    let i: usize = i.try_into().unwrap_or(last).min(last);
    let a = grid_point(i);
    if &a == s {
        return (t.phi[i].clone(), t.moment[i].clone());
    }
    let fs = bump(&DyadicInterval::point(s.clone()), TABLE_PREC);
    let (cp, cm) = cell_pair(&a, s, &t.f[i], &fs);
    (&t.phi[i] + &cp, &t.moment[i] + &cm)
}

/// `Phi(1)`, the total mass of the bump.
pub fn phi_total() -> DyadicInterval {
    table_at(&Dyadic::one()).0
}

/// Enclosure of `Phi(y)`. Its width is bounded below by the table's own
/// error, around `2^-36`.
pub fn phi(y: &DyadicInterval, _p: Precision) -> DyadicInterval {
    let lo = table_at(y.lo()).0;
    let hi = table_at(y.hi()).0;
    DyadicInterval::new(lo.lo().clone(), hi.hi().clone())
}

/// Outward enclosure of `(2/3)(r + 1)` for `r` in `[lo, hi]`.
fn two_thirds_plus(lo: &BigRational, hi: &BigRational, g: i64) -> DyadicInterval {
    let c = q(2, 3);
    DyadicInterval::new(
        Dyadic::floor_rational(&(&c * (lo + BigRational::one())), g),
        Dyadic::ceil_rational(&(&c * (hi + BigRational::one())), g),
    )
}

/// `p_F(y) = (2/3)(Phi(2y-1)/Phi(1) + 1)` on `[0, 1]`.
///
/// `Phi(1)` is split as `A + B` with `A = Phi(t)` and `B = Phi(-t)`, and the
/// ratio `A/(A+B)` is bounded monotonically, so `y = 0` and `y = 1` come out
/// exact before the final rounding.
pub fn density_f(y: &DyadicInterval, p: Precision) -> DyadicInterval {
    let y = y.clamp(&Dyadic::zero(), &Dyadic::one());
    let t = &y.shl(1) - &one();
    let a = phi(&t, p);
    let b = phi(&(-&t), p);
    let (alo, ahi) = (a.lo().to_rational(), a.hi().to_rational());
    let (blo, bhi) = (b.lo().to_rational(), b.hi().to_rational());
    let ratio = |n: &BigRational, d: BigRational| {
        if d.is_zero() {
            None
        } else {
            Some(n / d)
        }
    };
    let rlo = ratio(&alo, &alo + &bhi).unwrap_or_else(BigRational::zero);
    let rhi = ratio(&ahi, &ahi + &blo).unwrap_or_else(BigRational::one);
    two_thirds_plus(&rlo.max(BigRational::zero()), &rhi.min(BigRational::one()), p.0 as i64 + 2)
}

fn times_ratio(x: &DyadicInterval, num: i64, den: u64, g: i64) -> DyadicInterval {
    x.scale(&Dyadic::from_int(num)).div_int(den, g)
}

fn inv_phi_total(p: Precision) -> DyadicInterval {
    one().div(&phi_total(), p).expect("Phi(1) is positive")
}

/// `p_F'(y) = (4/3) f(2y-1) / Phi(1)`.
pub fn density_f_d1(y: &DyadicInterval, p: Precision) -> DyadicInterval {
    let t = &y.shl(1) - &one();
    times_ratio(&(&bump(&t, p) * &inv_phi_total(p)), 4, 3, p.0 as i64 + 4)
}

/// `p_F''(y) = (8/3) f'(2y-1) / Phi(1)`.
pub fn density_f_d2(y: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
    let t = &y.shl(1) - &one();
    let d = bump_d1(&t, p)?;
    Some(times_ratio(&(&d * &inv_phi_total(p)), 8, 3, p.0 as i64 + 4))
}

pub struct DensityF;

impl IntervalFn for DensityF {
    fn eval(&self, dom: &DyadicInterval, p: Precision) -> DyadicInterval {
        density_f(dom, p)
    }
    fn first_derivative(&self, dom: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
        Some(density_f_d1(dom, p))
    }
    fn second_derivative(&self, dom: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
        density_f_d2(dom, p)
    }
}

/// `CDF_F(y) = (2/3)(y + (t Phi(t) - M(t)) / (2 Phi(1)))` with `t = 2y - 1`.
pub fn cdf_f(y: &Dyadic) -> DyadicInterval {
    if !y.is_positive() {
        return DyadicInterval::zero();
    }
    if y >= &Dyadic::one() {
        return one();
    }
    let p = TABLE_PREC;
    let t = y.shl(1) - Dyadic::one();
    let (ph, mo) = table_at(&t);
    let inner = &ph.scale(&t) - &mo;
    let frac = inner.div(&phi_total().shl(1), p).expect("Phi(1) is positive");
    let s = &frac + &DyadicInterval::point(y.clone());
    times_ratio(&s, 2, 3, p.0 as i64).clamp(&Dyadic::zero(), &Dyadic::one())
}

/// Lazy binary digits of `F = CDF_F^{-1}(u)`, found by bisection of `[0,1]`:
/// each decision halves the bracket, so the decisions are the digits.
pub struct FDigits {
    u: CReal,
    state: Mutex<Vec<bool>>,
}

impl FDigits {
    pub fn new(u: CReal) -> Self {
        FDigits {
            u,
            state: Mutex::new(Vec::new()),
        }
    }

    fn decide(&self, lo: &Dyadic, level: i64) -> Result<bool> {
        let m = lo + &Dyadic::pow2(-(level + 1));
        let c = cdf_f(&m);
        for k in [8u32, 16, 24, 32, 48, 64] {
            let u = self.u.query(Precision(k))?;
            if u.hi() < c.lo() {
                return Ok(false);
            }
            if u.lo() > c.hi() {
                return Ok(true);
            }
        }
        Err(Error::BudgetExceeded { budget: 64 })
    }

    /// Bracket of width `2^-k` after `k` digits.
    pub fn bracket(&self, k: usize) -> Result<DyadicInterval> {
        if k > 0 {
            self.digit(k - 1)?;
        }
        let st = self.state.lock().expect("F digits");
        let mut lo = Dyadic::zero();
        for (j, b) in st[..k].iter().enumerate() {
            if *b {
                lo = lo + Dyadic::pow2(-(j as i64) - 1);
            }
        }
        let hi = &lo + &Dyadic::pow2(-(k as i64));
        Ok(DyadicInterval::new(lo, hi))
    }
}

impl Digits for FDigits {
    fn digit(&self, j: usize) -> Result<bool> {
        let mut st = self.state.lock().expect("F digits");
        while st.len() <= j {
            let mut lo = Dyadic::zero();
            for (i, b) in st.iter().enumerate() {
                if *b {
                    lo = lo + Dyadic::pow2(-(i as i64) - 1);
                }
            }
            let d = self.decide(&lo, st.len() as i64)?;
            st.push(d);
        }
        Ok(st[j])
    }
}

pub fn sample_f(t: &BitTape, p: Precision) -> Result<DyadicInterval> {
    FDigits::new(uniform(t.split(0))).bracket(p.0 as usize)
}

/// `S = (1/8) * { F if D = 0; 4 + (1 - F) if D = 4; 4C + (D mod 4) + U otherwise }`.
pub struct SmoothSample {
    pub d: u64,
    pub c: bool,
    u: LazyBits,
    f: FDigits,
}

impl SmoothSample {
    pub fn real(self: &Arc<Self>) -> CReal {
        CReal::new(DigitsReal(self.clone()))
    }
}

impl Digits for SmoothSample {
    fn digit(&self, j: usize) -> Result<bool> {
        let lead = match self.d {
            0 => 0,
            4 => 4,
            d => 4 * self.c as u64 + d % 4,
        };
        if j < 3 {
            return Ok(lead >> (2 - j) & 1 == 1);
        }
        match self.d {
            0 => self.f.digit(j - 3),
            // 1 - F flips every digit, up to a null set of dyadic F
            4 => Ok(!self.f.digit(j - 3)?),
            _ => Ok(self.u.bit(j - 3)),
        }
    }
}

/// The real with the given digits.
pub struct DigitsReal<D: Digits>(pub D);

impl<D: Digits> RealQuery for DigitsReal<D> {
    fn query(&self, p: Precision) -> Result<DyadicInterval> {
        let k = p.0 as usize;
        let mut m = num_bigint::BigInt::zero();
        for j in 0..k {
            m = (m << 1) + (self.0.digit(j)? as u8);
        }
        let lo = Dyadic::new(m.clone(), -(k as i64));
        let hi = Dyadic::new(m + 1, -(k as i64));
        Ok(DyadicInterval::new(lo, hi))
    }
}

/// Lanes: 0 for `D`, 1 for `C`, 2 for `U`, 3 for the uniform behind `F`.
pub fn draw_s(t: &BitTape) -> Result<Arc<SmoothSample>> {
    let d = discrete_uniform(&mut t.split(0), 8, DEFAULT_BUDGET)?;
    let c = bernoulli(&CReal::ratio(1, 3), &mut t.split(1), DEFAULT_BUDGET)?;
    Ok(Arc::new(SmoothSample {
        d,
        c,
        u: LazyBits::new(t.split(2)),
        f: FDigits::new(uniform(t.split(3))),
    }))
}

pub fn sample_s(t: &BitTape, p: Precision) -> Result<DyadicInterval> {
    draw_s(t)?.real().query(p)
}

pub struct ZSample {
    pub n: u64,
    pub s: Arc<SmoothSample>,
    pub x: CReal,
}

/// Lanes: 0 for `N`, 1 for `V`, 2 seeds the tape of `S`.
pub fn draw_z(t: &BitTape, table: &Arc<MachineTable>, n_override: Option<u64>) -> Result<ZSample> {
    let n = match n_override {
        Some(n) => n,
        None => geometric(&mut t.split(0), DEFAULT_BUDGET)?,
    };
    let s = draw_s(&t.split(2).fork())?;
    let z = spliced(table, n, LazyBits::new(t.split(1)), Box::new(s.clone()));
    Ok(ZSample {
        n,
        s,
        x: CReal::new(SplicedRef(z)),
    })
}

pub fn sample_z(
    t: &BitTape,
    table: &Arc<MachineTable>,
    n_override: Option<u64>,
    p: Precision,
) -> Result<DyadicInterval> {
    draw_z(t, table, n_override)?.x.query(p)
}

/// Where `frac(2^k x)` falls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zone {
    /// `(1/8, 1/2)`, density 4/3.
    Low,
    /// `(5/8, 1)`, density 2/3.
    High,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityRegion {
    pub k: Option<u64>,
}

impl ValidityRegion {
    pub fn new(k: Option<u64>) -> Self {
        ValidityRegion { k }
    }

    /// The region as a union of open intervals, for `k <= 16`.
    pub fn region(&self) -> Result<OpenSetUnion> {
        let Some(k) = self.k else {
            return Ok(OpenSetUnion::whole());
        };
        if k > 16 {
            return Err(Error::InvalidInput(format!("validity region at level {k} is too large to list")));
        }
        let w = -(k as i64) - 3;
        let mut v = Vec::new();
        for j in 0..1i64 << k {
            let base = 8 * j;
            v.push((Dyadic::new((base + 1).into(), w), Dyadic::new((base + 4).into(), w)));
            v.push((Dyadic::new((base + 5).into(), w), Dyadic::new((base + 8).into(), w)));
        }
        Ok(OpenSetUnion::new(v))
    }

    pub fn lebesgue(&self) -> BigRational {
        match self.k {
            Some(_) => q(3, 4),
            None => BigRational::one(),
        }
    }

    /// `None` when the enclosure does not settle the zone.
    pub fn zone(&self, x: &DyadicInterval) -> Option<Zone> {
        let Some(k) = self.k else {
            return Some(Zone::Low);
        };
        let s = k as i64;
        let base = x.lo().shl(s).floor();
        let shift = Dyadic::from_bigint(base);
        let lo = x.lo().shl(s) - &shift;
        let hi = x.hi().shl(s) - &shift;
        let e = |n| Dyadic::ratio_pow2(n, 3);
        if lo > e(1) && hi < e(4) {
            Some(Zone::Low)
        } else if lo > e(5) && hi < e(8) {
            Some(Zone::High)
        } else if hi <= e(1) || (lo >= e(4) && hi <= e(5)) {
            Some(Zone::Invalid)
        } else {
            None
        }
    }

    pub fn contains(&self, x: &DyadicInterval) -> Option<bool> {
        self.zone(x).map(|z| z != Zone::Invalid)
    }

    /// Refines `x` until its zone is settled.
    pub fn classify(&self, x: &CReal) -> Result<Zone> {
        let k = self.k.unwrap_or(0) as u32;
        let mut prec = k + 3;
        loop {
            if let Some(z) = self.zone(&x.query(Precision(prec))?) {
                return Ok(z);
            }
            if prec >= k + 64 {
                return Err(Error::DyadicBoundary { digit: k as u64 });
            }
            prec += 4;
        }
    }
}

fn piece_f(x: &DyadicInterval, a: i64, b: i64, p: Precision, order: u8) -> Option<DyadicInterval> {
    // y = a + b * 8x, restricted to its piece by the caller
    let y = &DyadicInterval::point(Dyadic::from_int(a)) + &x.shl(3).scale(&Dyadic::from_int(b));
    let y = y.clamp(&Dyadic::zero(), &Dyadic::one());
    Some(match order {
        0 => density_f(&y, p),
        1 => density_f_d1(&y, p).scale(&Dyadic::from_int(8 * b)),
        _ => density_f_d2(&y, p)?.scale(&Dyadic::from_int(64)),
    })
}

fn const_piece(v: &BigRational, p: Precision, order: u8) -> DyadicInterval {
    if order == 0 {
        DyadicInterval::enclose_rational(v, p.finer(2))
    } else {
        DyadicInterval::zero()
    }
}

/// `p_S`, derivatives included, as the hull over the pieces `x` meets.
fn density_s_order(x: &DyadicInterval, p: Precision, order: u8) -> Option<DyadicInterval> {
    let x = x.clamp(&Dyadic::zero(), &Dyadic::one());
    let e = |n| Dyadic::ratio_pow2(n, 3);
    let pieces: [(Dyadic, Dyadic); 4] = [(e(0), e(1)), (e(1), e(4)), (e(4), e(5)), (e(5), e(8))];
    let mut out: Option<DyadicInterval> = None;
    for (i, (a, b)) in pieces.iter().enumerate() {
        let Some(part) = x.intersect(&DyadicInterval::new(a.clone(), b.clone())) else {
            continue;
        };
        let v = match i {
            0 => piece_f(&part, 0, 1, p, order)?,
            1 => const_piece(&q(4, 3), p, order),
            2 => piece_f(&part, 5, -1, p, order)?,
            _ => const_piece(&q(2, 3), p, order),
        };
        out = Some(match out {
            None => v,
            Some(o) => o.hull(&v),
        });
    }
    out
}

pub fn density_s(x: &DyadicInterval, p: Precision) -> DyadicInterval {
    density_s_order(x, p, 0).unwrap_or_else(DyadicInterval::zero)
}

pub struct DensityS;

impl IntervalFn for DensityS {
    fn eval(&self, dom: &DyadicInterval, p: Precision) -> DyadicInterval {
        density_s(dom, p)
    }
    fn first_derivative(&self, dom: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
        density_s_order(dom, p, 1)
    }
    fn second_derivative(&self, dom: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
        density_s_order(dom, p, 2)
    }
}

/// Law of `S` as a measure on `[0,1]`.
pub fn smooth_s_measure() -> ComputableMeasure {
    ComputableMeasure::smooth(SmoothDensity {
        f: Arc::new(DensityS),
        sup: Dyadic::ratio_pow2(11, 3),
    })
}

fn zone_density(st: HaltStatus, zone: Option<Zone>) -> RationalInterval {
    match (st, zone) {
        (HaltStatus::NeverHalts, _) => RationalInterval::point(BigRational::one()),
        (HaltStatus::Halted(_), Some(Zone::Low)) => RationalInterval::point(q(4, 3)),
        (HaltStatus::Halted(_), Some(Zone::High)) => RationalInterval::point(q(2, 3)),
        _ => RationalInterval::new(q(2, 3), q(4, 3)),
    }
}

/// `tau` for the smooth pair: `p_{Z_k}(x) = p_S(frac(2^k x))`, which is 4/3
/// or 2/3 at valid points. Points invalid for either machine are
/// `Indeterminate`.
pub fn tau_smooth(
    m: usize,
    n: usize,
    x: &CReal,
    table: &MachineTable,
    budget: HaltingBudget,
) -> Result<RatioClassification> {
    let sm = table.status(m, budget);
    let sn = table.status(n, budget);
    let zone = |st: HaltStatus| -> Result<Option<Zone>> {
        match st {
            HaltStatus::Halted(k) => ValidityRegion::new(Some(k)).classify(x).map(Some),
            HaltStatus::NeverHalts => Ok(Some(Zone::Low)),
            HaltStatus::Unknown(_) => Ok(None),
        }
    };
    let (zm, zn) = (zone(sm)?, zone(sn)?);
    let value = zone_density(sm, zm).div(&zone_density(sn, zn))?;
    let valid = |z: Option<Zone>| matches!(z, Some(Zone::Low | Zone::High));
    if !valid(zm) || !valid(zn) {
        return Ok(RatioClassification {
            value,
            verdict: Verdict::Indeterminate,
        });
    }
    Ok(classify(value, sm, sn))
}
