//! Conditioning where it is computable: on discrete variables, and by
//! Bayes' rule when a bounded conditional density is available.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::dyadic::{parse_rational, Dyadic, DyadicInterval, Precision, RationalInterval};
use crate::error::{Error, Result};
use crate::measure::{Atoms, ComputableMeasure, Density, OpenSetUnion, Part};
use crate::quadrature::{integrate_interval, IntervalFn, Product, QuadOptions};
use crate::randvar::RandVarDiscrete;
use crate::tape::BitTape;

/// Draws before rejection sampling gives up on an atom.
pub const MAX_REJECTION_DRAWS: u64 = 1_000_000;

pub enum DiscreteJoint {
    /// `((x, y), mass)` with masses summing to 1.
    Table(Vec<((u64, u64), BigRational)>),
    /// `X` and `Y` each read their own copy of the same tape, which is how
    /// they become dependent.
    Sampler { x: RandVarDiscrete, y: RandVarDiscrete },
}

impl DiscreteJoint {
    pub fn table(rows: Vec<((u64, u64), BigRational)>) -> Result<Self> {
        let total = rows.iter().fold(BigRational::zero(), |s, (_, m)| s + m);
        if rows.iter().any(|(_, m)| m < &BigRational::zero()) || total != BigRational::one() {
            return Err(Error::InvalidInput("joint masses must be nonnegative and sum to 1".into()));
        }
        Ok(DiscreteJoint::Table(rows))
    }

    /// A sampler with the same law as a table.
    pub fn sampler_of(rows: &[((u64, u64), BigRational)]) -> Self {
        let masses: Arc<Vec<BigRational>> = Arc::new(rows.iter().map(|(_, m)| m.clone()).collect());
        let xs: Vec<u64> = rows.iter().map(|((x, _), _)| *x).collect();
        let ys: Vec<u64> = rows.iter().map(|((_, y), _)| *y).collect();
        let mx = masses.clone();
        DiscreteJoint::Sampler {
            x: RandVarDiscrete::new(move |t| Ok(xs[categorical(t, &mx)?]), None),
            y: RandVarDiscrete::new(move |t| Ok(ys[categorical(t, &masses)?]), None),
        }
    }

    /// Parses `x,y:mass; x,y:mass; ...`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for item in s.split(';').map(str::trim).filter(|i| !i.is_empty()) {
            let (xy, m) = item
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected x,y:mass in {item:?}")))?;
            let (x, y) = xy
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("expected x,y in {xy:?}")))?;
            let atom = |v: &str| v.trim().parse::<u64>().map_err(|e| Error::Parse(format!("{v:?}: {e}")));
            rows.push(((atom(x)?, atom(y)?), parse_rational(m.trim())?));
        }
        Self::table(rows)
    }
}

/// Index `i` with `u` in `[c_i, c_{i+1})` for the cumulative masses `c`,
/// reading bits of `u` until the bracket is settled.
fn categorical(t: &mut dyn crate::tape::BitSource, masses: &[BigRational]) -> Result<usize> {
    let mut bits = Vec::new();
    let mut cum = vec![BigRational::zero()];
    for m in masses {
        let next = cum.last().expect("nonempty") + m;
        cum.push(next);
    }
    for k in 1..=256u32 {
        bits.push(t.next_bit());
        let m = bits.iter().fold(BigInt::zero(), |acc, b| (acc << 1) + (*b as u8));
        let scale = BigInt::one() << k as usize;
        let lo = BigRational::new(m.clone(), scale.clone());
        let hi = BigRational::new(m + 1, scale);
        for i in 0..masses.len() {
            if masses[i].is_zero() {
                continue;
            }
            if cum[i] <= lo && hi <= cum[i + 1] {
                return Ok(i);
            }
        }
    }
    Err(Error::BudgetExceeded { budget: 256 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// Exact rational masses.
    Exact,
    /// Frequencies with 3 sigma intervals. Statistical, not validated.
    MonteCarlo,
}

/// Conditional law of `Y` given `X = x`, as intervals per atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conditional {
    pub atoms: BTreeMap<u64, RationalInterval>,
    pub kind: KernelKind,
    /// Samples kept by rejection; 0 in table mode.
    pub accepted: u64,
}

#[derive(Debug, Clone)]
pub struct SamplerOptions {
    pub draws: u64,
    pub seed: u64,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            draws: 100_000,
            seed: 0,
        }
    }
}

fn clip01(v: f64) -> BigRational {
    BigRational::from_float(v.clamp(0.0, 1.0)).unwrap_or_else(BigRational::zero)
}

pub fn condition_discrete(j: &DiscreteJoint, x: u64, opts: &SamplerOptions) -> Result<Conditional> {
    match j {
        DiscreteJoint::Table(rows) => {
            let marginal = rows
                .iter()
                .filter(|((a, _), _)| *a == x)
                .fold(BigRational::zero(), |s, (_, m)| s + m);
            if marginal.is_zero() {
                return Err(Error::NullAtom);
            }
            let mut atoms: BTreeMap<u64, BigRational> = BTreeMap::new();
            for ((a, y), m) in rows {
                if *a == x {
                    *atoms.entry(*y).or_insert_with(BigRational::zero) += m;
                }
            }
            Ok(Conditional {
                atoms: atoms
                    .into_iter()
                    .map(|(y, m)| (y, RationalInterval::point(m / &marginal)))
                    .collect(),
                kind: KernelKind::Exact,
                accepted: 0,
            })
        }
        DiscreteJoint::Sampler { x: xv, y: yv } => {
            let mut master = BitTape::new(opts.seed);
            let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
            let mut accepted = 0u64;
            let mut draws = 0u64;
            while draws < MAX_REJECTION_DRAWS && (draws < opts.draws || accepted == 0) {
                draws += 1;
                let t = master.fork();
                if xv.sample(&mut t.clone())? != x {
                    continue;
                }
                accepted += 1;
                *counts.entry(yv.sample(&mut t.clone())?).or_insert(0) += 1;
            }
            if accepted == 0 {
                return Err(Error::BudgetExceeded { budget: MAX_REJECTION_DRAWS });
            }
            let n = accepted as f64;
            let atoms = counts
                .into_iter()
                .map(|(y, c)| {
                    let p = c as f64 / n;
                    let s = 3.0 * (p * (1.0 - p) / n).sqrt();
                    (y, RationalInterval::new(clip01(p - s), clip01(p + s)))
                })
                .collect();
            Ok(Conditional {
                atoms,
                kind: KernelKind::MonteCarlo,
                accepted,
            })
        }
    }
}

/// Conditioning on a real `X` whose support is discrete, through an integer
/// witness `f` that is injective on the support.
pub fn condition_witnessed(
    rows: &[((BigRational, u64), BigRational)],
    witness: &dyn Fn(&DyadicInterval) -> DyadicInterval,
    x: &DyadicInterval,
) -> Result<Conditional> {
    let label = |e: &DyadicInterval| -> Result<u64> {
        let lo = e.lo().ceil();
        let hi = e.hi().floor();
        if lo != hi {
            return Err(Error::WitnessUnresolved);
        }
        lo.to_u64().ok_or(Error::WitnessUnresolved)
    };
    let target = label(&witness(x))?;
    let mut image = Vec::with_capacity(rows.len());
    for ((xr, y), m) in rows {
        let e = DyadicInterval::enclose_rational(xr, Precision(64));
        image.push(((label(&witness(&e))?, *y), m.clone()));
    }
    condition_discrete(&DiscreteJoint::table(image)?, target, &SamplerOptions::default())
}

fn floor_pow2(x: &Dyadic) -> Dyadic {
    // largest power of two not above x
    let k = x.mantissa().bits() as i64 - 1 + x.exponent();
    Dyadic::pow2(k)
}

fn enclose_scaled(r: &RationalInterval, g: i64) -> DyadicInterval {
    DyadicInterval::new(Dyadic::floor_rational(&r.lo, g), Dyadic::ceil_rational(&r.hi, g))
}

fn level_of(eps: &Dyadic) -> i64 {
    -(floor_pow2(eps).exponent())
}

/// `int_region f dmu` with total width at most `eps`. `sup` bounds `|f|`
/// and is only needed for the tail of infinitely many atoms.
pub fn integrate(
    f: &dyn IntervalFn,
    sup: &Dyadic,
    mu: &ComputableMeasure,
    region: &OpenSetUnion,
    eps: &Dyadic,
) -> Result<DyadicInterval> {
    if !eps.is_positive() {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let ComputableMeasure::Composite(parts) = mu else {
        return Err(Error::UnsupportedRepresentation);
    };
    let spans = region.clipped();
    let pieces: usize = parts
        .iter()
        .map(|(_, p)| match p {
            Part::Density(Density::PiecewiseConst(d)) => spans.len() * d.values().len(),
            _ => spans.len().max(1),
        })
        .sum::<usize>()
        .max(1);
    // half the budget for quadrature, the rest for rounding
    let share = floor_pow2(&(eps.shl(-1) * Dyadic::pow2(-((usize::BITS - pieces.leading_zeros()) as i64))));
    let g = level_of(eps) + 4;
    let p = Precision(level_of(&share) as u32 + 8);
    let opts = QuadOptions::default();
    let mut total = RationalInterval::point(BigRational::zero());
    for (w, part) in parts {
        let r = match part {
            Part::Density(Density::Uniform) => {
                let mut s = DyadicInterval::zero();
                for (a, b) in &spans {
                    s = &s + &integrate_interval(f, a, b, &share, &opts)?;
                }
                rational_pair(&s)
            }
            Part::Density(Density::Smooth(d)) => {
                let prod = Product(f, d.f.as_ref());
                let mut s = DyadicInterval::zero();
                for (a, b) in &spans {
                    s = &s + &integrate_interval(&prod, a, b, &share, &opts)?;
                }
                rational_pair(&s)
            }
            Part::Density(Density::PiecewiseConst(d)) => {
                let mut s = RationalInterval::point(BigRational::zero());
                for (a, b) in &spans {
                    for (i, v) in d.values().iter().enumerate() {
                        let lo = Dyadic::max(a, &d.breaks()[i]);
                        let hi = Dyadic::min(b, &d.breaks()[i + 1]);
                        if lo < hi && !v.is_zero() {
                            // value <= sup of the density, so scale the share down
                            let vb = Dyadic::ceil_rational(v, 0).max(Dyadic::one());
                            let e = floor_pow2(&(&share * &Dyadic::pow2(-(vb.mantissa().bits() as i64 + vb.exponent()))));
                            let r = integrate_interval(f, &lo, &hi, &e, &opts)?;
                            s = s.add(&rational_pair(&r).scale(v));
                        }
                    }
                }
                s
            }
            Part::Atoms(Atoms::Finite(v)) => {
                let mut s = RationalInterval::point(BigRational::zero());
                for (x, m) in v {
                    if region.contains(x) {
                        let fx = f.eval(&DyadicInterval::enclose_rational(x, p), p);
                        s = s.add(&rational_pair(&fx).scale(m));
                    }
                }
                s
            }
            Part::Atoms(Atoms::Enumerated { atom, tail }) => {
                let sup_r = sup.to_rational();
                let limit = share.to_rational();
                let mut s = RationalInterval::point(BigRational::zero());
                let mut i = 0usize;
                while &tail(i) * &sup_r > limit {
                    if i > 1 << 20 {
                        return Err(Error::EffortExceeded);
                    }
                    let (x, m) = atom(i);
                    if region.contains(&x) {
                        let fx = f.eval(&DyadicInterval::enclose_rational(&x, p), p);
                        s = s.add(&rational_pair(&fx).scale(&m));
                    }
                    i += 1;
                }
                let t = &tail(i) * &sup_r;
                s.add(&RationalInterval::new(-t.clone(), t))
            }
        };
        total = total.add(&r.scale(w));
    }
    Ok(enclose_scaled(&total, g))
}

fn rational_pair(x: &DyadicInterval) -> RationalInterval {
    let (lo, hi) = x.to_rational_pair();
    RationalInterval::new(lo, hi)
}

/// Likelihood of an observation, as a function of the latent value.
pub type Likelihood = Arc<dyn Fn(&Dyadic) -> Box<dyn IntervalFn> + Send + Sync>;

#[derive(Clone)]
pub struct DensityModel {
    /// Law of the latent variable, on `[0,1]`.
    pub prior: ComputableMeasure,
    /// `x_obs -> (y -> p(x_obs | y))`.
    pub likelihood: Likelihood,
    pub sup: Dyadic,
}

/// Finest eps level tried before giving up.
const MAX_LEVEL: i64 = 40;

/// `P(Y in B | X = x_obs)` by Bayes' rule.
///
/// Numerator and denominator are integrated at eps `2^-L` for
/// `L = 2, 3, ...` and the quotients intersected, so the answer for a
/// smaller eps always lies inside the answer for a larger one.
pub fn bayes_posterior(model: &DensityModel, x_obs: &Dyadic, b: &OpenSetUnion, eps: &Dyadic) -> Result<DyadicInterval> {
    if !eps.is_positive() {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let lik = (model.likelihood)(x_obs);
    let whole = OpenSetUnion::whole();
    let target = level_of(eps);
    let mut acc = DyadicInterval::unit();
    let mut level = 2;
    loop {
        let e = Dyadic::pow2(-level);
        let den = match integrate(lik.as_ref(), &model.sup, &model.prior, &whole, &e) {
            Ok(d) => d,
            Err(Error::EffortExceeded) => return Err(Error::EffortExceeded),
            Err(err) => return Err(err),
        };
        if !den.hi().is_positive() {
            return Err(Error::VanishingEvidence);
        }
        if den.lo().is_positive() {
            let num = integrate(lik.as_ref(), &model.sup, &model.prior, b, &e)?
                .clamp(&Dyadic::zero(), den.hi());
            let q = num.div(&den, Precision(level as u32 + 8))?;
            acc = acc.intersect(&q).unwrap_or(q);
            if level >= target && acc.width() <= *eps {
                return Ok(acc);
            }
        }
        level += 1;
        if level > MAX_LEVEL.max(target + 4) {
            return Err(if den.lo().is_positive() {
                Error::EffortExceeded
            } else {
                Error::VanishingEvidence
            });
        }
    }
}

/// The posterior given one observation, with its evidence computed once.
pub struct PosteriorEnclosure {
    model: DensityModel,
    x_obs: Dyadic,
    eps: Dyadic,
    pub normalizer: DyadicInterval,
}

impl PosteriorEnclosure {
    pub fn new(model: DensityModel, x_obs: Dyadic, eps: Dyadic) -> Result<Self> {
        let lik = (model.likelihood)(&x_obs);
        let normalizer = integrate(lik.as_ref(), &model.sup, &model.prior, &OpenSetUnion::whole(), &eps)?;
        if !normalizer.lo().is_positive() {
            return Err(Error::VanishingEvidence);
        }
        Ok(PosteriorEnclosure {
            model,
            x_obs,
            eps,
            normalizer,
        })
    }

    pub fn query(&self, b: &OpenSetUnion) -> Result<DyadicInterval> {
        bayes_posterior(&self.model, &self.x_obs, b, &self.eps)
    }
}

/// Likelihood `y -> noise(x - y)`.
struct Shifted {
    noise: Arc<dyn IntervalFn>,
    x: Dyadic,
}

impl Shifted {
    fn arg(&self, y: &DyadicInterval) -> DyadicInterval {
        &DyadicInterval::point(self.x.clone()) - y
    }
}

impl IntervalFn for Shifted {
    fn eval(&self, dom: &DyadicInterval, p: Precision) -> DyadicInterval {
        self.noise.eval(&self.arg(dom), p)
    }
    fn first_derivative(&self, dom: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
        Some(-&self.noise.first_derivative(&self.arg(dom), p)?)
    }
    fn second_derivative(&self, dom: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
        self.noise.second_derivative(&self.arg(dom), p)
    }
}

/// Observation `x = u + e` with `e` independent noise.
pub fn noise_model(prior: ComputableMeasure, noise: Arc<dyn IntervalFn>, sup: Dyadic) -> DensityModel {
    DensityModel {
        prior,
        likelihood: Arc::new(move |x: &Dyadic| {
            Box::new(Shifted {
                noise: noise.clone(),
                x: x.clone(),
            }) as Box<dyn IntervalFn>
        }),
        sup,
    }
}

pub fn noise_posterior(
    prior: ComputableMeasure,
    noise: Arc<dyn IntervalFn>,
    sup: Dyadic,
    y_obs: &Dyadic,
    b: &OpenSetUnion,
    eps: &Dyadic,
) -> Result<DyadicInterval> {
    bayes_posterior(&noise_model(prior, noise, sup), y_obs, b, eps)
}

/// `1/sqrt(2 pi)`, from decimal bounds checked against bounds on `pi`.
fn inv_sqrt_2pi() -> &'static DyadicInterval {
    static C: OnceLock<DyadicInterval> = OnceLock::new();
    C.get_or_init(|| {
        let r = |s: &str| parse_rational(s).expect("constant");
        let (pi_lo, pi_hi) = (r("3.14159265358979323846264338327950"), r("3.14159265358979323846264338327951"));
        let (c_lo, c_hi) = (r("0.398942280401432677939946059934"), r("0.398942280401432677939946059935"));
        let two = BigRational::from_integer(2.into());
        assert!(&c_lo * &c_lo * &two * pi_hi <= BigRational::one());
        assert!(&c_hi * &c_hi * &two * pi_lo >= BigRational::one());
        DyadicInterval::from_rationals(&c_lo, &c_hi, Precision(100))
    })
}

/// Centered normal noise with standard deviation `1/k`.
pub struct GaussianNoise {
    pub k: Dyadic,
}

impl GaussianNoise {
    pub fn standard() -> Self {
        GaussianNoise { k: Dyadic::one() }
    }

    pub fn with_inv_scale(k: Dyadic) -> Result<Self> {
        if !k.is_positive() {
            return Err(Error::InvalidInput("noise scale must be positive".into()));
        }
        Ok(GaussianNoise { k })
    }

    /// `sup p = k / sqrt(2 pi)`, rounded up.
    pub fn sup(&self) -> Dyadic {
        self.k.clone() * Dyadic::ratio_pow2(103, 8)
    }

    fn kk(&self) -> DyadicInterval {
        DyadicInterval::point(self.k.clone())
    }
}

impl IntervalFn for GaussianNoise {
    fn eval(&self, dom: &DyadicInterval, p: Precision) -> DyadicInterval {
        let z = &self.kk() * dom;
        let e = (-&z.abs().square().shl(-1)).exp(p.finer(4));
        &(&e * inv_sqrt_2pi()) * &self.kk()
    }
    fn first_derivative(&self, dom: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
        let k2 = self.kk().square();
        Some(-&(&(&k2 * dom) * &self.eval(dom, p)))
    }
    fn second_derivative(&self, dom: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
        let k2 = self.kk().square();
        let z2 = (&self.kk() * dom).abs().square();
        Some(&(&k2 * &(&z2 - &DyadicInterval::point(Dyadic::one()))) * &self.eval(dom, p))
    }
}

/// Triangular density on `[-w, w]` with `w = 2^e`.
pub struct TriangularNoise {
    pub e: i64,
}

impl TriangularNoise {
    pub fn quarter() -> Self {
        TriangularNoise { e: -2 }
    }

    pub fn sup(&self) -> Dyadic {
        Dyadic::pow2(-self.e)
    }

    fn at(&self, a: &Dyadic) -> Dyadic {
        let v = Dyadic::pow2(-self.e) - Dyadic::pow2(-2 * self.e) * a.clone();
        Dyadic::max(&v, &Dyadic::zero())
    }
}

impl IntervalFn for TriangularNoise {
    fn eval(&self, dom: &DyadicInterval, _: Precision) -> DyadicInterval {
        let a = dom.abs();
        DyadicInterval::new(self.at(a.hi()), self.at(a.lo()))
    }
    fn first_derivative(&self, dom: &DyadicInterval, _: Precision) -> Option<DyadicInterval> {
        let w = Dyadic::pow2(self.e);
        let s = Dyadic::pow2(-2 * self.e);
        if dom.hi() < &-&w || dom.lo() > &w {
            Some(DyadicInterval::zero())
        } else if dom.lo() > &-&w && dom.hi() < &Dyadic::zero() {
            Some(DyadicInterval::point(s))
        } else if dom.lo() > &Dyadic::zero() && dom.hi() < &w {
            Some(DyadicInterval::point(-s))
        } else {
            None
        }
    }
    fn second_derivative(&self, dom: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
        self.first_derivative(dom, p).map(|_| DyadicInterval::zero())
    }
}
