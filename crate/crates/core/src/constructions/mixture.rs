//! Half uniform, half concentrated on the rationals.
//!
//! `X = U` when the coin `C` is 1 and `X = r_N` otherwise, with `N`
//! geometric. Conditioning on `X = r_k` pins `C = 0`, while every
//! neighbourhood of `r_k` is dominated by the uniform part.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::Result;
use crate::randvar::{geometric, uniform, CReal, DEFAULT_BUDGET};
use crate::tape::{BitSource, BitTape};

/// Breadth-first Stern–Brocot order on the rationals in `(0,1)`:
/// `1/2, 1/3, 2/3, 1/4, 2/5, 3/5, 3/4, ...`.
pub fn rational_enum(i: u64) -> BigRational {
    let level = 63 - (i + 1).leading_zeros();
    let pos = i + 1 - (1u64 << level);
    let (mut ln, mut ld) = (BigInt::zero(), BigInt::one());
    let (mut hn, mut hd) = (BigInt::one(), BigInt::one());
    let (mut n, mut d) = (BigInt::one(), BigInt::from(2));
    for b in (0..level).rev() {
        if (pos >> b) & 1 == 0 {
            hn = n.clone();
            hd = d.clone();
        } else {
            ln = n.clone();
            ld = d.clone();
        }
        n = &ln + &hn;
        d = &ld + &hd;
    }
    BigRational::new(n, d)
}

#[derive(Debug, Clone)]
pub enum MixtureValue {
    Uniform(CReal),
    Atom { index: u64, value: BigRational },
}

#[derive(Debug, Clone)]
pub struct MixtureSample {
    pub x: MixtureValue,
    pub c: bool,
}

/// `C`, `U`, `N` come from lanes 0, 1, 2 of the tape.
pub fn sample_mixture(t: &BitTape) -> Result<MixtureSample> {
    let c = t.split(0).next_bit();
    if c {
        return Ok(MixtureSample {
            x: MixtureValue::Uniform(uniform(t.split(1))),
            c,
        });
    }
    let n = geometric(&mut t.split(2), DEFAULT_BUDGET)?;
    Ok(MixtureSample {
        x: MixtureValue::Atom {
            index: n,
            value: rational_enum(n),
        },
        c,
    })
}

/// `P(X = r_k, C = 0)`; the uniform branch puts no mass on any point.
pub fn atom_mass(k: u64) -> (BigRational, BigRational) {
    let from_atoms = BigRational::new(BigInt::one(), BigInt::one() << (k + 2));
    (from_atoms, BigRational::zero())
}

/// `P(C = 0 | X = r_k)` as a ratio of exact point masses.
pub fn mixture_conditional_at_rational(k: u64) -> BigRational {
    let (c0, c1) = atom_mass(k);
    &c0 / (&c0 + &c1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn first_levels() {
        let got: Vec<BigRational> = (0..7).map(rational_enum).collect();
        let want = [q(1, 2), q(1, 3), q(2, 3), q(1, 4), q(2, 5), q(3, 5), q(3, 4)];
        assert_eq!(got, want);
    }

    #[test]
    fn injective_and_in_range() {
        let mut seen = HashSet::new();
        for i in 0..10_000 {
            let r = rational_enum(i);
            assert!(r > q(0, 1) && r < q(1, 1));
            assert!(seen.insert(r));
        }
    }

    #[test]
    fn every_small_denominator_appears() {
        let seen: HashSet<BigRational> = (0..(1 << 12)).map(rational_enum).collect();
        for d in 2..=12i64 {
            for n in 1..d {
                assert!(seen.contains(&q(n, d)), "{n}/{d}");
            }
        }
    }

    #[test]
    fn conditional_is_one() {
        assert_eq!(mixture_conditional_at_rational(0), q(1, 1));
        assert_eq!(mixture_conditional_at_rational(7), q(1, 1));
        assert_eq!(q(1, 1) - mixture_conditional_at_rational(3), q(0, 1));
    }

    #[test]
    fn sampled_atoms() {
        let mut master = BitTape::new(17);
        let n = 1_000_000;
        let mut counts = [0usize; 5];
        let mut c0 = 0usize;
        for _ in 0..n {
            let t = master.fork();
            let s = sample_mixture(&t).unwrap();
            if !s.c {
                c0 += 1;
            }
            if let MixtureValue::Atom { index, value } = s.x {
                assert!(!s.c);
                assert_eq!(value, rational_enum(index));
                if index < 5 {
                    counts[index as usize] += 1;
                }
            }
        }
        let sig = |p: f64| 3.0 * (p * (1.0 - p) / n as f64).sqrt();
        assert!((c0 as f64 / n as f64 - 0.5).abs() < sig(0.5));
        for (k, c) in counts.iter().enumerate() {
            let p = 0.5f64.powi(k as i32 + 2);
            assert!((*c as f64 / n as f64 - p).abs() < sig(p), "k={k}");
        }
    }
}
