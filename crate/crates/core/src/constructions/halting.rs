//! The pair `(N, X)` with `X = X_{h(N)}`, where
//! `X_k = (2 floor(2^k V) + C + U) / 2^{k+1}` and `h` is the halting time
//! of machine `N`.
//!
//! `X` is sampled digit by digit: digit `k` only needs `h(N)` compared with
//! `k`, which a `k`-step simulation settles. Conditioning on `X` is another
//! story: the kernel needs `h(n)` itself, so at a finite budget unresolved
//! machines contribute the whole density hull `[2/3, 4/3]`.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::dyadic::{Dyadic, DyadicInterval, Precision, RationalInterval};
use crate::error::{Error, Result};
use crate::machines::{HaltStatus, HaltingBudget, MachineTable};
use crate::measure::{ComputableMeasure, PiecewiseConst};
use crate::randvar::{bernoulli, geometric, CReal, LazyBits, RealQuery, DEFAULT_BUDGET};
use crate::tape::BitTape;
#[cfg(test)]
use crate::tape::BitSource;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

/// Extra refinement allowed past the level of interest before giving up.
const PARITY_SLACK: u32 = 64;

/// Binary digits read on demand.
pub trait Digits: Send + Sync {
    fn digit(&self, j: usize) -> Result<bool>;
}

impl<T: Digits + ?Sized> Digits for Arc<T> {
    fn digit(&self, j: usize) -> Result<bool> {
        (**self).digit(j)
    }
}

impl Digits for LazyBits {
    fn digit(&self, j: usize) -> Result<bool> {
        Ok(self.bit(j))
    }
}

/// `C` followed by the digits of `U`.
struct CoinThen {
    c: bool,
    rest: LazyBits,
}

impl Digits for CoinThen {
    fn digit(&self, j: usize) -> Result<bool> {
        if j == 0 {
            Ok(self.c)
        } else {
            Ok(self.rest.bit(j - 1))
        }
    }
}

/// Remembers the longest simulation run so far for one machine index.
pub struct HaltOracle {
    table: Arc<MachineTable>,
    n: usize,
    memo: Mutex<Option<(u64, HaltStatus)>>,
}

impl HaltOracle {
    pub fn new(table: Arc<MachineTable>, n: usize) -> Self {
        HaltOracle {
            table,
            n,
            memo: Mutex::new(None),
        }
    }

    /// `Some(h)` when the machine is known to halt at `h <= t`.
    pub fn halts_within(&self, t: u64) -> Option<u64> {
        let mut memo = self.memo.lock().expect("halt memo");
        if let Some((run, st)) = *memo {
            match st {
                HaltStatus::Halted(h) => return (h <= t).then_some(h),
                HaltStatus::NeverHalts => return None,
                HaltStatus::Unknown(_) if run >= t => return None,
                HaltStatus::Unknown(_) => {}
            }
        }
        let st = self.table.status(self.n, HaltingBudget(t));
        *memo = Some((t, st));
        st.halting_time().filter(|h| *h <= t)
    }
}

/// A real whose digit `k` is `head_k` while `h(N) > k` and `tail_{k-h}` after.
pub struct SplicedReal {
    oracle: HaltOracle,
    head: LazyBits,
    tail: Box<dyn Digits>,
}

impl SplicedReal {
    pub fn digit(&self, k: usize) -> Result<bool> {
        match self.oracle.halts_within(k as u64) {
            Some(h) => self.tail.digit(k - h as usize),
            None => Ok(self.head.bit(k)),
        }
    }
}

impl RealQuery for SplicedReal {
    fn query(&self, p: Precision) -> Result<DyadicInterval> {
        let k = p.0 as usize;
        let mut m = BigInt::zero();
        for j in 0..k {
            m = (m << 1) + (self.digit(j)? as u8);
        }
        let lo = Dyadic::new(m.clone(), -(k as i64));
        let hi = Dyadic::new(m + 1, -(k as i64));
        Ok(DyadicInterval::new(lo, hi))
    }
}

pub struct HaltingSample {
    pub n: u64,
    pub c: bool,
    pub x: CReal,
    spliced: Arc<SplicedReal>,
}

impl HaltingSample {
    pub fn digit(&self, k: usize) -> Result<bool> {
        self.spliced.digit(k)
    }
}

/// Lanes: 0 for `N`, 1 for `C`, 2 for `U`, 3 for `V`.
pub fn sample_x(t: &BitTape, table: &Arc<MachineTable>, n_override: Option<u64>) -> Result<HaltingSample> {
    let n = match n_override {
        Some(n) => n,
        None => geometric(&mut t.split(0), DEFAULT_BUDGET)?,
    };
    let c = bernoulli(&CReal::ratio(1, 3), &mut t.split(1), DEFAULT_BUDGET)?;
    let spliced = Arc::new(SplicedReal {
        oracle: HaltOracle::new(table.clone(), n as usize),
        head: LazyBits::new(t.split(3)),
        tail: Box::new(CoinThen {
            c,
            rest: LazyBits::new(t.split(2)),
        }),
    });
    Ok(HaltingSample {
        n,
        c,
        x: CReal::new(SplicedRef(spliced.clone())),
        spliced,
    })
}

pub(crate) struct SplicedRef(pub(crate) Arc<SplicedReal>);

impl RealQuery for SplicedRef {
    fn query(&self, p: Precision) -> Result<DyadicInterval> {
        self.0.query(p)
    }
}

pub(crate) fn spliced(
    table: &Arc<MachineTable>,
    n: u64,
    head: LazyBits,
    tail: Box<dyn Digits>,
) -> Arc<SplicedReal> {
    Arc::new(SplicedReal {
        oracle: HaltOracle::new(table.clone(), n as usize),
        head,
        tail,
    })
}

/// Density of `X_k` (`None` for `k = infinity`) over an interval: the exact
/// value when `floor(2^{k+1} x)` is constant on it, else the hull.
pub fn density_xk(k: Option<u64>, x: &DyadicInterval) -> RationalInterval {
    let Some(k) = k else {
        return RationalInterval::point(BigRational::one());
    };
    let s = k as i64 + 1;
    let a = x.lo().shl(s).floor();
    let b = x.hi().shl(s).floor();
    if a == b {
        let v = if a.bit(0) { q(2, 3) } else { q(4, 3) };
        RationalInterval::point(v)
    } else {
        RationalInterval::new(q(2, 3), q(4, 3))
    }
}

/// Exact CDF of `X_k` at a rational point.
pub fn cdf_xk(k: Option<u64>, x: &BigRational) -> BigRational {
    if x <= &BigRational::zero() {
        return BigRational::zero();
    }
    if x >= &BigRational::one() {
        return BigRational::one();
    }
    let Some(k) = k else {
        return x.clone();
    };
    let w = pow2(-(k as i64) - 1);
    let j = (x / &w).floor().to_integer();
    let pairs = BigRational::from_integer(&j >> 1usize);
    let mut s = pairs * pow2(-(k as i64));
    let odd = j.bit(0);
    if odd {
        s += pow2(-(k as i64)) * q(2, 3);
    }
    let dens = if odd { q(2, 3) } else { q(4, 3) };
    s + dens * (x - BigRational::from_integer(j) * &w)
}

/// Exact `P(X_k in (a, b))`.
pub fn mass_xk(k: Option<u64>, a: &BigRational, b: &BigRational) -> BigRational {
    cdf_xk(k, b) - cdf_xk(k, a)
}

/// Law of `X_k` as a step density, for `k <= 16`.
pub fn xk_measure(k: u64) -> Result<ComputableMeasure> {
    if k > 16 {
        return Err(Error::InvalidInput(format!("xk:{k} has too many cells; use k <= 16")));
    }
    let cells = 1i64 << (k + 1);
    let breaks = (0..=cells).map(|i| Dyadic::ratio_pow2(i, k as u32 + 1)).collect();
    let values = (0..cells).map(|i| if i % 2 == 0 { q(4, 3) } else { q(2, 3) }).collect();
    Ok(ComputableMeasure::piecewise(PiecewiseConst::new(breaks, values)?))
}

fn status_density(st: HaltStatus, x: &DyadicInterval) -> RationalInterval {
    match st {
        HaltStatus::Halted(k) => density_xk(Some(k), x),
        HaltStatus::NeverHalts => RationalInterval::point(BigRational::one()),
        HaltStatus::Unknown(_) => RationalInterval::new(q(2, 3), q(4, 3)),
    }
}

/// Refine `x` until `floor(2^level x)` is pinned down.
pub fn resolve_level(x: &CReal, level: u32) -> Result<DyadicInterval> {
    let s = level as i64;
    let mut k = level + 2;
    loop {
        let e = x.query(Precision(k))?;
        if e.lo().shl(s).floor() == e.hi().shl(s).floor() {
            return Ok(e);
        }
        if k >= level + PARITY_SLACK {
            return Err(Error::DyadicBoundary { digit: level as u64 });
        }
        k += 8;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KernelEnclosure {
    pub n_max: u64,
    /// Enclosures of `kappa(x, {n})` for `n = 0..=n_max`.
    #[serde(skip)]
    pub probs: Vec<RationalInterval>,
    /// Upper bound on `kappa(x, {n : n > n_max})`.
    #[serde(skip)]
    pub tail: BigRational,
}

impl KernelEnclosure {
    pub fn enclosures(&self, p: Precision) -> Vec<DyadicInterval> {
        self.probs.iter().map(|r| r.enclose(p)).collect()
    }
}

/// Smallest `n` with `(4/3) 2^-(n+1) < eps/2`.
pub fn kernel_cutoff(eps: &BigRational) -> u64 {
    let mut n = 0u64;
    while q(4, 3) * pow2(-(n as i64) - 1) >= eps / BigRational::from_integer(2.into()) {
        n += 1;
    }
    n
}

/// Bayes-rule enclosure of `P(N = n | X = x)` at halting budget `T`.
pub fn kernel_n_given_x(
    x: &CReal,
    table: &MachineTable,
    budget: HaltingBudget,
    eps: &BigRational,
) -> Result<KernelEnclosure> {
    if eps <= &BigRational::zero() {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let n_max = kernel_cutoff(eps);
    let statuses: Vec<HaltStatus> = (0..=n_max)
        .map(|n| table.status(n as usize, budget))
        .collect();
    let level = statuses
        .iter()
        .filter_map(|s| s.halting_time())
        .max()
        .map_or(1, |k| k as u32 + 1);
    let xe = resolve_level(x, level)?;
    let nums: Vec<RationalInterval> = statuses
        .iter()
        .enumerate()
        .map(|(n, st)| status_density(*st, &xe).scale(&pow2(-(n as i64) - 1)))
        .collect();
    let tail_w = pow2(-(n_max as i64) - 1);
    // past the table every machine is a non-halter, density exactly 1
    let tail = if n_max + 1 >= table.len() as u64 {
        RationalInterval::point(tail_w)
    } else {
        RationalInterval::new(q(2, 3) * &tail_w, q(4, 3) * &tail_w)
    };
    let total = nums.iter().fold(tail.clone(), |acc, r| acc.add(r));
    let probs = nums
        .iter()
        .map(|num| {
            // a / (a + rest) is increasing in a and decreasing in rest
            let rest_lo = &total.lo - &num.lo;
            let rest_hi = &total.hi - &num.hi;
            let lo = &num.lo / (&num.lo + rest_hi.max(BigRational::zero()));
            let hi = &num.hi / (&num.hi + rest_lo.max(BigRational::zero()));
            RationalInterval::new(lo.clone().min(hi.clone()), hi.max(lo))
        })
        .collect();
    Ok(KernelEnclosure {
        n_max,
        probs,
        tail: &tail.hi / &total.lo,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Verdict {
    BothHalted,
    BothUnknown,
    Mixed,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioClassification {
    pub value: RationalInterval,
    pub verdict: Verdict,
}

pub(crate) fn classify(value: RationalInterval, sm: HaltStatus, sn: HaltStatus) -> RatioClassification {
    let verdict = if !value.is_point() {
        Verdict::Indeterminate
    } else {
        let v = &value.lo;
        if [q(1, 2), q(2, 1)].contains(v) {
            Verdict::BothHalted
        } else if [q(2, 3), q(3, 4), q(4, 3), q(3, 2)].contains(v) {
            Verdict::Mixed
        } else if v == &BigRational::one() {
            match (sm, sn) {
                (HaltStatus::Halted(_), HaltStatus::Halted(_)) => Verdict::BothHalted,
                (HaltStatus::NeverHalts, HaltStatus::NeverHalts) => Verdict::BothUnknown,
                _ => Verdict::Indeterminate,
            }
        } else {
            Verdict::Indeterminate
        }
    };
    RatioClassification { value, verdict }
}

/// `tau_{m,n}(x) = p_{X_{h(m)}}(x) / p_{X_{h(n)}}(x)`; the prior and the
/// `2^{m-n}` factor cancel.
pub fn tau(
    m: usize,
    n: usize,
    x: &CReal,
    table: &MachineTable,
    budget: HaltingBudget,
) -> Result<RatioClassification> {
    let sm = table.status(m, budget);
    let sn = table.status(n, budget);
    let level = [sm, sn]
        .iter()
        .filter_map(|s| s.halting_time())
        .max()
        .map_or(1, |k| k as u32 + 1);
    let xe = resolve_level(x, level)?;
    let value = status_density(sm, &xe).div(&status_density(sn, &xe))?;
    Ok(classify(value, sm, sn))
}

#[derive(Debug, Clone, Serialize)]
pub struct BudgetReport {
    pub budget: u64,
    pub machine_status: HaltStatus,
    pub reference_status: HaltStatus,
    pub verdicts: BTreeMap<Verdict, u64>,
    pub errors: u64,
    /// First few ratio enclosures, as `[lo, hi]` rationals.
    pub examples: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub machine: String,
    pub reference: String,
    pub seed: u64,
    pub samples: u64,
    pub budgets: Vec<BudgetReport>,
}

/// Sample `x` from `X`, then classify `tau_{m,n}(x)` at each budget.
pub fn halting_demo(
    m: usize,
    n: usize,
    table: &Arc<MachineTable>,
    budgets: &[u64],
    samples: u64,
    seed: u64,
) -> Result<DemoReport> {
    let min_t = budgets.iter().copied().min().unwrap_or(0);
    if table.status(n, HaltingBudget(min_t)).halting_time().is_none() {
        return Err(Error::InvalidInput(format!(
            "reference machine {n} does not halt within budget {min_t}"
        )));
    }
    let mut master = BitTape::new(seed);
    let xs: Vec<HaltingSample> = (0..samples)
        .map(|_| sample_x(&master.fork(), table, None))
        .collect::<Result<_>>()?;
    let mut reports = Vec::new();
    for &t in budgets {
        let b = HaltingBudget(t);
        let mut verdicts = BTreeMap::new();
        let mut errors = 0;
        let mut examples = Vec::new();
        for s in &xs {
            match tau(m, n, &s.x, table, b) {
                Ok(r) => {
                    *verdicts.entry(r.verdict).or_insert(0) += 1;
                    if examples.len() < 4 {
                        examples.push(r.value.to_string());
                    }
                }
                Err(_) => errors += 1,
            }
        }
        reports.push(BudgetReport {
            budget: t,
            machine_status: table.status(m, b),
            reference_status: table.status(n, b),
            verdicts,
            errors,
            examples,
        });
    }
    let name = |i: usize| {
        table
            .get(i)
            .map(|p| p.name.clone())
            .unwrap_or_else(|_| format!("#{i}"))
    };
    Ok(DemoReport {
        machine: name(m),
        reference: name(n),
        seed,
        samples,
        budgets: reports,
    })
}

/// Sample's digit stream helper used by tests and the smooth variant.
pub fn first_digits(x: &HaltingSample, k: usize) -> Result<Vec<bool>> {
    (0..k).map(|j| x.digit(j)).collect()
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::machines::{fixtures, synthetic_machine};
    use num_traits::Signed;

    fn take_bits<T: BitSource>(t: &mut T, k: usize) -> Vec<bool> {
        (0..k).map(|_| t.next_bit()).collect()
    }

    fn table(times: &[Option<u64>]) -> Arc<MachineTable> {
        Arc::new(MachineTable::synthetic(times))
    }

    fn pt(s: &str) -> DyadicInterval {
        DyadicInterval::point(s.parse().unwrap())
    }

    #[test]
    fn xk_measure_matches_cdf() {
        let m = xk_measure(1).unwrap();
        let u = crate::measure::OpenSetUnion::interval(Dyadic::zero(), Dyadic::ratio_pow2(3, 3));
        let (lo, hi) = m.rational_bounds(&u, 8).unwrap();
        let exact = mass_xk(Some(1), &BigRational::zero(), &q(3, 8));
        assert!(lo <= exact && exact <= hi);
        assert_eq!(exact, q(1, 3) + q(1, 12));
        assert!(xk_measure(17).is_err());
    }

    #[test]
    fn density_examples() {
        let x03 = DyadicInterval::enclose_rational(&q(3, 10), Precision(20));
        assert_eq!(density_xk(Some(0), &x03), RationalInterval::point(q(4, 3)));
        let x06 = DyadicInterval::enclose_rational(&q(6, 10), Precision(20));
        assert_eq!(density_xk(Some(0), &x06), RationalInterval::point(q(2, 3)));
        assert_eq!(density_xk(None, &x06), RationalInterval::point(q(1, 1)));
        let wide = DyadicInterval::new("1/4".parse().unwrap(), "3/4".parse().unwrap());
        assert_eq!(density_xk(Some(0), &wide), RationalInterval::new(q(2, 3), q(4, 3)));
    }

    #[test]
    fn cdf_integrates_density() {
        for k in [Some(0), Some(1), Some(3), None] {
            assert_eq!(cdf_xk(k, &q(1, 1)), q(1, 1));
            // riemann sum over fine dyadic cells is exact for step densities
            let cells = 64;
            let mut s = BigRational::zero();
            for i in 0..cells {
                let mid = DyadicInterval::point(Dyadic::ratio_pow2(2 * i + 1, 7));
                s += density_xk(k, &mid).lo * q(1, cells);
                assert_eq!(cdf_xk(k, &q(i + 1, cells)), s);
            }
        }
    }

    #[test]
    fn digits_for_nonhalter_are_v() {
        let tb = table(&[None]);
        let t = BitTape::new(9);
        let s = sample_x(&t, &tb, Some(0)).unwrap();
        let v = take_bits(&mut t.split(3), 40);
        assert_eq!(first_digits(&s, 40).unwrap(), v);
    }

    #[test]
    fn digits_for_h1() {
        let tb = table(&[Some(1)]);
        let t = BitTape::new(10);
        let s = sample_x(&t, &tb, Some(0)).unwrap();
        let v = take_bits(&mut t.split(3), 1);
        let u = take_bits(&mut t.split(2), 30);
        let d = first_digits(&s, 32).unwrap();
        assert_eq!(d[0], v[0]);
        assert_eq!(d[1], s.c);
        assert_eq!(&d[2..], &u[..]);
    }

    #[test]
    fn digits_match_formula() {
        // floor(2^{k+1} X_k) = 2 floor(2^k V) + C with fractional part U
        for k in 0..=20u64 {
            let tb = table(&[Some(k)]);
            let t = BitTape::new(100 + k);
            let s = sample_x(&t, &tb, Some(0)).unwrap();
            let v = take_bits(&mut t.split(3), k as usize);
            let u = take_bits(&mut t.split(2), 40);
            let mut m = BigInt::zero();
            for b in v.iter().chain([s.c].iter()).chain(u.iter()) {
                m = (m << 1) + (*b as u8);
            }
            let k1 = k as i64 + 41;
            let formula = DyadicInterval::new(Dyadic::new(m.clone(), -k1), Dyadic::new(m + 1, -k1));
            let got = s.x.query(Precision(40)).unwrap();
            assert!(formula.is_subset(&got), "k={k}");
        }
    }

    #[test]
    fn parity_frequency_h2() {
        let tb = table(&[Some(2)]);
        let mut master = BitTape::new(2024);
        let n = 100_000;
        let mut even = 0;
        for _ in 0..n {
            let s = sample_x(&master.fork(), &tb, Some(0)).unwrap();
            if !s.digit(2).unwrap() {
                even += 1;
            }
        }
        let p = even as f64 / n as f64;
        assert!((p - 2.0 / 3.0).abs() < 3.0 * ((2.0 / 9.0) / n as f64).sqrt());
    }

    #[test]
    fn kernel_all_nonhalting_is_prior() {
        let tb = table(&[None, None, None, None]);
        let x = CReal::ratio(1, 3);
        let eps = q(1, 1000);
        let k = kernel_n_given_x(&x, &tb, HaltingBudget(100), &eps).unwrap();
        for (n, p) in k.probs.iter().enumerate() {
            assert!(p.contains(&pow2(-(n as i64) - 1)));
        }
    }

    #[test]
    fn kernel_two_machine_oracle() {
        let tb = table(&[Some(1), None]);
        // floor(4x) = 0 and floor(2x) = 0
        let x = CReal::ratio(1, 5);
        let eps = q(1, 1000);
        let k = kernel_n_given_x(&x, &tb, HaltingBudget(10), &eps).unwrap();
        // 4/3*1/2 / (4/3*1/2 + 1*1/4 + sum_{n>=2} 2^-(n+1))
        let oracle = (q(4, 3) * q(1, 2)) / (q(4, 3) * q(1, 2) + q(1, 4) + q(1, 4));
        assert!(k.probs[0].contains(&oracle));
        assert_eq!(oracle, q(4, 7));
    }

    #[test]
    fn kernel_sums_to_one() {
        let tb = table(&[Some(1), Some(4), None, Some(0), Some(7)]);
        let x = CReal::ratio(2, 7);
        let eps = q(1, 1000);
        let k = kernel_n_given_x(&x, &tb, HaltingBudget(100), &eps).unwrap();
        let mid: BigRational = k
            .probs
            .iter()
            .fold(BigRational::zero(), |s, p| s + (&p.lo + &p.hi) / BigRational::from_integer(2.into()));
        assert!((mid - q(1, 1)).abs() < eps);
        let lo_sum = k.probs.iter().fold(BigRational::zero(), |s, p| s + &p.lo);
        let hi_sum = k.probs.iter().fold(BigRational::zero(), |s, p| s + &p.hi);
        assert!(lo_sum <= q(1, 1) && q(1, 1) <= hi_sum + &k.tail);
    }

    #[test]
    fn kernel_with_unresolved_machine_is_sound() {
        let tb = table(&[Some(1), Some(50)]);
        let x = CReal::ratio(1, 5);
        let k = kernel_n_given_x(&x, &tb, HaltingBudget(10), &q(1, 100)).unwrap();
        let resolved = kernel_n_given_x(&x, &tb, HaltingBudget(100), &q(1, 100)).unwrap();
        for (a, b) in k.probs.iter().zip(&resolved.probs) {
            assert!(a.lo <= b.lo && b.hi <= a.hi);
        }
        assert!(!k.probs[1].is_point());
    }

    #[test]
    fn tau_sets() {
        let tb = table(&[Some(1), Some(2), None, None, Some(50)]);
        let x = CReal::ratio(2, 7);
        let b = HaltingBudget(10);
        let r = tau(0, 1, &x, &tb, b).unwrap();
        assert!([q(1, 2), q(1, 1), q(2, 1)].contains(&r.value.lo) && r.value.is_point());
        assert_eq!(r.verdict, Verdict::BothHalted);
        let r = tau(2, 3, &x, &tb, b).unwrap();
        assert_eq!(r.value, RationalInterval::point(q(1, 1)));
        assert_eq!(r.verdict, Verdict::BothUnknown);
        let r = tau(0, 2, &x, &tb, b).unwrap();
        assert_eq!(r.verdict, Verdict::Mixed);
        let r = tau(0, 4, &x, &tb, b).unwrap();
        assert_eq!(r.verdict, Verdict::Indeterminate);
        assert!(q(1, 2) <= r.value.lo && r.value.hi <= q(2, 1));
    }

    #[test]
    fn tau_is_density_ratio() {
        let tb = table(&[Some(3), Some(6)]);
        for (num, den) in [(1, 3), (5, 7), (2, 9), (7, 11)] {
            let x = CReal::ratio(num, den);
            let r = tau(0, 1, &x, &tb, HaltingBudget(10)).unwrap();
            let xe = x.query(Precision(60)).unwrap();
            let want = density_xk(Some(3), &xe).div(&density_xk(Some(6), &xe)).unwrap();
            assert_eq!(r.value, want);
            // the unnormalized Bayes ratio with the prior left in agrees too
            let k = kernel_n_given_x(&x, &tb, HaltingBudget(10), &q(1, 1000)).unwrap();
            // 2^{m-n} = 1/2 here
            let ratio = &k.probs[0].lo / (&k.probs[1].lo * BigRational::from_integer(2.into()));
            assert_eq!(RationalInterval::point(ratio), want);
        }
    }

    #[test]
    fn demo_flips_at_halting_time() {
        let tb = Arc::new(MachineTable::new(vec![
            synthetic_machine(Some(1)),
            synthetic_machine(Some(50)),
            synthetic_machine(None),
        ]));
        let r = halting_demo(1, 0, &tb, &[10, 100], 20, 7).unwrap();
        assert_eq!(r.budgets[0].verdicts.get(&Verdict::Indeterminate), Some(&20));
        assert_eq!(r.budgets[1].verdicts.get(&Verdict::BothHalted), Some(&20));
        let r2 = halting_demo(1, 0, &tb, &[10, 100], 20, 7).unwrap();
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            serde_json::to_string(&r2).unwrap()
        );
        let lp = halting_demo(2, 0, &tb, &[1, 10, 1000], 20, 7).unwrap();
        for b in &lp.budgets {
            assert!(!b.verdicts.contains_key(&Verdict::BothHalted));
        }
    }

    #[test]
    fn fixtures_load() {
        let f = Arc::new(fixtures());
        let s = sample_x(&BitTape::new(1), &f, Some(4)).unwrap();
        assert!(s.x.query(Precision(30)).unwrap().width() <= Precision(30).width());
        let _ = pt("1/2");
    }
}
