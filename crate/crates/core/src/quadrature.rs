//! Validated adaptive quadrature over dyadic intervals.
//!
//! Each cell `[a,b]` gets the enclosure `h * f([a,b])`. When the integrand can
//! bound its second derivative we also use the midpoint rule
//! `h f(m) + h^3/24 f''([a,b])` and keep the intersection of the two.

use crate::dyadic::{Dyadic, DyadicInterval, Precision};
use crate::error::{Error, Result};

/// A real function with an interval extension.
pub trait IntervalFn: Send + Sync {
    /// Enclosure of `{f(x) : x in dom}`, inflated by at most `2^-k` rounding.
    fn eval(&self, dom: &DyadicInterval, p: Precision) -> DyadicInterval;

    fn first_derivative(&self, _dom: &DyadicInterval, _p: Precision) -> Option<DyadicInterval> {
        None
    }

    fn second_derivative(&self, _dom: &DyadicInterval, _p: Precision) -> Option<DyadicInterval> {
        None
    }
}

impl<F> IntervalFn for F
where
    F: Fn(&DyadicInterval, Precision) -> DyadicInterval + Send + Sync,
{
    fn eval(&self, dom: &DyadicInterval, p: Precision) -> DyadicInterval {
        self(dom, p)
    }
}

/// `f(x) = c`.
pub struct Constant(pub Dyadic);

impl IntervalFn for Constant {
    fn eval(&self, _: &DyadicInterval, _: Precision) -> DyadicInterval {
        DyadicInterval::point(self.0.clone())
    }
    fn first_derivative(&self, _: &DyadicInterval, _: Precision) -> Option<DyadicInterval> {
        Some(DyadicInterval::zero())
    }
    fn second_derivative(&self, _: &DyadicInterval, _: Precision) -> Option<DyadicInterval> {
        Some(DyadicInterval::zero())
    }
}

/// `f(x) = x`.
pub struct Identity;

impl IntervalFn for Identity {
    fn eval(&self, dom: &DyadicInterval, _: Precision) -> DyadicInterval {
        dom.clone()
    }
    fn first_derivative(&self, _: &DyadicInterval, _: Precision) -> Option<DyadicInterval> {
        Some(DyadicInterval::point(Dyadic::one()))
    }
    fn second_derivative(&self, _: &DyadicInterval, _: Precision) -> Option<DyadicInterval> {
        Some(DyadicInterval::zero())
    }
}

/// Pointwise product; derivatives follow the product rule when both sides have them.
pub struct Product<'a>(pub &'a dyn IntervalFn, pub &'a dyn IntervalFn);

impl IntervalFn for Product<'_> {
    fn eval(&self, dom: &DyadicInterval, p: Precision) -> DyadicInterval {
        &self.0.eval(dom, p) * &self.1.eval(dom, p)
    }

    fn first_derivative(&self, dom: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
        let (f, g) = (self.0.eval(dom, p), self.1.eval(dom, p));
        let (f1, g1) = (self.0.first_derivative(dom, p)?, self.1.first_derivative(dom, p)?);
        Some(&(&f1 * &g) + &(&f * &g1))
    }

    fn second_derivative(&self, dom: &DyadicInterval, p: Precision) -> Option<DyadicInterval> {
        let (f, g) = (self.0.eval(dom, p), self.1.eval(dom, p));
        let (f1, g1) = (self.0.first_derivative(dom, p)?, self.1.first_derivative(dom, p)?);
        let (f2, g2) = (self.0.second_derivative(dom, p)?, self.1.second_derivative(dom, p)?);
        let cross = (&f1 * &g1).shl(1);
        Some(&(&(&f2 * &g) + &cross) + &(&f * &g2))
    }
}

#[derive(Debug, Clone)]
pub struct QuadOptions {
    pub max_cells: usize,
    /// Extra bits of evaluation precision beyond the target.
    pub guard_bits: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            max_cells: 1 << 18,
            guard_bits: 8,
        }
    }
}

/// Enclosure of one cell's integral.
pub fn cell_enclosure(f: &dyn IntervalFn, a: &Dyadic, b: &Dyadic, p: Precision) -> DyadicInterval {
    let h = b - a;
    let dom = DyadicInterval::new(a.clone(), b.clone());
    let rect = f.eval(&dom, p).scale(&h);
    let Some(f2) = f.second_derivative(&dom, p) else {
        return rect;
    };
    let m = dom.midpoint();
    let mid = f.eval(&DyadicInterval::point(m), p).scale(&h);
    // h^3/24 f'' is enclosed by (h^3/16) f'' widened, then we divide exactly
    let h3 = &(&h * &h) * &h;
    let err = f2.scale(&h3).div_int(24, p.0 as i64 + 2);
    let est = &mid + &err;
    est.intersect(&rect).unwrap_or(est)
}

fn bits_of(eps: &Dyadic) -> u32 {
    // smallest k with 2^-k <= eps
    let mut k: i64 = -(eps.mantissa().bits() as i64) - eps.exponent() + 1;
    while Dyadic::pow2(-k) > *eps {
        k += 1;
    }
    while k > 0 && Dyadic::pow2(-(k - 1)) <= *eps {
        k -= 1;
    }
    k.max(0) as u32
}

/// Integral of `f` over `[a, b]` with total enclosure width at most `eps`.
pub fn integrate_interval(
    f: &dyn IntervalFn,
    a: &Dyadic,
    b: &Dyadic,
    eps: &Dyadic,
    opts: &QuadOptions,
) -> Result<DyadicInterval> {
    if a >= b {
        return Ok(DyadicInterval::zero());
    }
    if !eps.is_positive() {
        return Err(Error::EffortExceeded);
    }
    let len = b - a;
    let p = Precision(bits_of(eps) + opts.guard_bits + bits_of(&len.abs().shl(-30)).min(40));
    let mut cells: Vec<(Dyadic, Dyadic, DyadicInterval)> =
        vec![(a.clone(), b.clone(), cell_enclosure(f, a, b, p))];
    loop {
        let total = cells
            .iter()
            .fold(DyadicInterval::zero(), |acc, c| &acc + &c.2);
        if total.width() <= *eps {
            return Ok(total);
        }
        let mut next = Vec::with_capacity(cells.len() * 2);
        let mut split_any = false;
        for (lo, hi, enc) in cells {
            // a cell may use its length-proportional share of half the budget
            let share = &(&(&hi - &lo) * eps) * &Dyadic::pow2(-1);
            if &enc.width() * &len > share {
                split_any = true;
                let m = (&lo + &hi).shl(-1);
                let left = cell_enclosure(f, &lo, &m, p);
                let right = cell_enclosure(f, &m, &hi, p);
                next.push((lo, m.clone(), left));
                next.push((m, hi, right));
            } else {
                next.push((lo, hi, enc));
            }
        }
        if !split_any || next.len() > opts.max_cells {
            return Err(Error::EffortExceeded);
        }
        cells = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps(k: i64) -> Dyadic {
        Dyadic::pow2(-k)
    }

    #[test]
    fn constant_is_exact() {
        let r = integrate_interval(
            &Constant(Dyadic::one()),
            &Dyadic::zero(),
            &Dyadic::one(),
            &eps(20),
            &QuadOptions::default(),
        )
        .unwrap();
        assert_eq!(r, DyadicInterval::point(Dyadic::one()));
    }

    #[test]
    fn linear_moment() {
        let r = integrate_interval(
            &Identity,
            &Dyadic::zero(),
            &Dyadic::one(),
            &eps(20),
            &QuadOptions::default(),
        )
        .unwrap();
        assert!(r.contains(&Dyadic::pow2(-1)));
        assert!(r.width() <= eps(20));
    }

    #[test]
    fn rectangle_only_integrand() {
        let sq = |x: &DyadicInterval, _: Precision| x.square();
        let r = integrate_interval(
            &sq,
            &Dyadic::zero(),
            &Dyadic::one(),
            &eps(10),
            &QuadOptions::default(),
        )
        .unwrap();
        assert!(r.contains_rational(&num_rational::BigRational::new(1.into(), 3.into())));
    }

    #[test]
    fn impossible_eps_reports_effort() {
        let sq = |x: &DyadicInterval, _: Precision| x.square();
        let opts = QuadOptions {
            max_cells: 64,
            guard_bits: 8,
        };
        let r = integrate_interval(&sq, &Dyadic::zero(), &Dyadic::one(), &eps(30), &opts);
        assert_eq!(r, Err(Error::EffortExceeded));
    }

    #[test]
    fn eps_bits() {
        assert_eq!(bits_of(&eps(10)), 10);
        assert_eq!(bits_of(&Dyadic::ratio_pow2(3, 10)), 9);
        assert_eq!(bits_of(&Dyadic::from_int(4)), 0);
    }
}
