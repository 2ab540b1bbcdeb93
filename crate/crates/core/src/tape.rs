//! Seeded, replayable fair-bit tapes.
//!
//! Bits are produced by a counter-based mixing function of `(seed, index)`,
//! so any index can be read directly. That is what lets [`SubTape`] lanes
//! read the parent's bits at `pair(i, j)` without materializing a prefix.

use std::sync::Arc;

/// Anything that hands out fair bits in order and counts them.
pub trait BitSource: Send {
    fn next_bit(&mut self) -> bool;
    /// Bits consumed so far.
    fn position(&self) -> u64;
}

/// Cantor pairing `(i+j)(i+j+1)/2 + j`.
pub fn pair(i: u64, j: u64) -> u64 {
    let s = i.checked_add(j).expect("pairing index overflow");
    let (a, b) = if s.is_multiple_of(2) { (s / 2, s + 1) } else { (s, s.div_ceil(2)) };
    a.checked_mul(b)
        .and_then(|t| t.checked_add(j))
        .expect("pairing index overflow")
}

/// Inverse of [`pair`].
pub fn unpair(z: u64) -> (u64, u64) {
    let mut w = (((8.0 * z as f64 + 1.0).sqrt() - 1.0) / 2.0) as u64;
    // fix up float rounding
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    let j = z - w * (w + 1) / 2;
    (w - j, j)
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn word(seed: u64, w: u64) -> u64 {
    mix64(seed ^ mix64(w.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// The root bit sequence shared by a tape and all of its lanes.
#[derive(Debug, Clone)]
struct Root {
    seed: u64,
    prefix: Option<Arc<Vec<bool>>>,
}

impl Root {
    fn bit(&self, index: u64, cache: &mut Option<(u64, u64)>) -> bool {
        if let Some(p) = &self.prefix {
            if let Some(&b) = p.get(index as usize) {
                return b;
            }
        }
        let w = index >> 6;
        let bits = match *cache {
            Some((cw, v)) if cw == w => v,
            _ => {
                let v = word(self.seed, w);
                *cache = Some((w, v));
                v
            }
        };
        (bits >> (index & 63)) & 1 == 1
    }
}

#[derive(Debug, Clone)]
pub struct BitTape {
    root: Root,
    position: u64,
    cache: Option<(u64, u64)>,
}

impl BitTape {
    pub fn new(seed: u64) -> Self {
        BitTape {
            root: Root { seed, prefix: None },
            position: 0,
            cache: None,
        }
    }

    /// A tape whose first bits are `bits`, continuing pseudo-randomly from `seed`.
    pub fn with_prefix(bits: &[bool], seed: u64) -> Self {
        BitTape {
            root: Root {
                seed,
                prefix: Some(Arc::new(bits.to_vec())),
            },
            position: 0,
            cache: None,
        }
    }

    /// Convenience for tests: `"101"` becomes the prefix 1,0,1.
    pub fn from_bit_str(bits: &str, seed: u64) -> Self {
        let v: Vec<bool> = bits
            .chars()
            .filter(|c| *c == '0' || *c == '1')
            .map(|c| c == '1')
            .collect();
        Self::with_prefix(&v, seed)
    }

    pub fn seed(&self) -> u64 {
        self.root.seed
    }

    /// Random access to bit `index` without consuming anything.
    pub fn bit_at(&mut self, index: u64) -> bool {
        self.root.bit(index, &mut self.cache)
    }

    /// Lane `i`: reads parent bits at `pair(i, 0), pair(i, 1), ...`.
    pub fn split(&self, i: u64) -> SubTape {
        SubTape {
            root: self.root.clone(),
            path: vec![i],
            position: 0,
            cache: None,
        }
    }

    /// Consume 64 bits and use them to seed an independent fresh tape.
    pub fn fork(&mut self) -> BitTape {
        BitTape::new(take_u64(self))
    }
}

impl BitSource for BitTape {
    fn next_bit(&mut self) -> bool {
        let b = self.root.bit(self.position, &mut self.cache);
        self.position += 1;
        b
    }

    fn position(&self) -> u64 {
        self.position
    }
}

/// A disjoint subsequence of a parent tape. Lanes of lanes nest through
/// repeated pairing, so they stay disjoint at every level.
#[derive(Debug, Clone)]
pub struct SubTape {
    root: Root,
    path: Vec<u64>,
    position: u64,
    cache: Option<(u64, u64)>,
}

impl SubTape {
    pub fn lane(&self) -> u64 {
        *self.path.last().expect("subtape path is nonempty")
    }

    /// Root index read for this lane's bit `j`.
    pub fn parent_index(&self, j: u64) -> u64 {
        self.path.iter().rev().fold(j, |acc, &i| pair(i, acc))
    }

    pub fn bit_at(&mut self, j: u64) -> bool {
        let idx = self.parent_index(j);
        self.root.bit(idx, &mut self.cache)
    }

    pub fn split(&self, i: u64) -> SubTape {
        let mut path = self.path.clone();
        path.push(i);
        SubTape {
            root: self.root.clone(),
            path,
            position: 0,
            cache: None,
        }
    }

    pub fn fork(&mut self) -> BitTape {
        BitTape::new(take_u64(self))
    }
}

impl BitSource for SubTape {
    fn next_bit(&mut self) -> bool {
        let b = self.bit_at(self.position);
        self.position += 1;
        b
    }

    fn position(&self) -> u64 {
        self.position
    }
}

fn take_u64<T: BitSource + ?Sized>(t: &mut T) -> u64 {
    (0..64).fold(0u64, |acc, _| (acc << 1) | t.next_bit() as u64)
}

/// Free-function form of [`BitSource::next_bit`].
pub fn next_bit<T: BitSource + ?Sized>(t: &mut T) -> bool {
    t.next_bit()
}

pub fn split(t: &BitTape, i: u64) -> SubTape {
    t.split(i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn replay_is_identical() {
        let mut a = BitTape::new(42);
        let mut b = BitTape::new(42);
        for _ in 0..1_000_000 {
            assert_eq!(a.next_bit(), b.next_bit());
        }
        assert_eq!(a.position(), 1_000_000);
    }

    #[test]
    fn first_bits_match_random_access() {
        let mut t = BitTape::new(7);
        let mut r = BitTape::new(7);
        let x0 = t.next_bit();
        let x1 = t.next_bit();
        assert_eq!((x0, x1), (r.bit_at(0), r.bit_at(1)));
    }

    #[test]
    fn mean_is_fair() {
        let mut t = BitTape::new(1);
        let n = 1_000_000;
        let ones = (0..n).filter(|_| t.next_bit()).count() as f64;
        let tol = 3.0 * 0.5 / (n as f64).sqrt();
        assert!((ones / n as f64 - 0.5).abs() < tol);
    }

    #[test]
    fn lanes_are_disjoint() {
        let t = BitTape::new(3);
        let a: HashSet<u64> = (0..1000).map(|j| t.split(0).parent_index(j)).collect();
        let b: HashSet<u64> = (0..1000).map(|j| t.split(1).parent_index(j)).collect();
        assert!(a.is_disjoint(&b));
    }

    #[test]
    fn lanes_replay_and_are_fair() {
        let t = BitTape::new(11);
        for lane in 0..8 {
            let mut s1 = t.split(lane);
            let mut s2 = t.split(lane);
            let n = 100_000;
            let mut ones = 0;
            for _ in 0..n {
                let b = s1.next_bit();
                assert_eq!(b, s2.next_bit());
                ones += b as u32;
            }
            let tol = 3.0 * 0.5 / (n as f64).sqrt();
            assert!((ones as f64 / n as f64 - 0.5).abs() < tol, "lane {lane}");
        }
    }

    #[test]
    fn lane_reads_parent_bits() {
        let mut parent = BitTape::new(5);
        let mut lane = parent.split(2);
        for j in 0..100 {
            assert_eq!(lane.next_bit(), parent.bit_at(pair(2, j)));
        }
    }

    #[test]
    fn prefix_comes_first() {
        let mut t = BitTape::from_bit_str("101", 0);
        assert!(t.next_bit());
        assert!(!t.next_bit());
        assert!(t.next_bit());
        assert_eq!(t.position(), 3);
    }

    #[test]
    fn pairing_small_values() {
        assert_eq!(pair(0, 0), 0);
        assert_eq!(pair(1, 0), 1);
        assert_eq!(pair(0, 1), 2);
        assert_eq!(pair(2, 0), 3);
    }

    proptest! {
        #[test]
        fn pairing_roundtrip(i in 0u64..1_000_000, j in 0u64..1_000_000) {
            prop_assert_eq!(unpair(pair(i, j)), (i, j));
        }

        #[test]
        fn nested_lanes_disjoint(a in 0u64..16, b in 0u64..16, j in 0u64..200, k in 0u64..200) {
            let t = BitTape::new(0);
            let x = t.split(a).split(b).parent_index(j);
            let y = t.split(a).split(b + 1).parent_index(k);
            prop_assert_ne!(x, y);
        }

        #[test]
        fn position_counts_calls(n in 0usize..500, seed in any::<u64>()) {
            let mut t = BitTape::new(seed);
            for _ in 0..n { t.next_bit(); }
            prop_assert_eq!(t.position(), n as u64);
        }
    }
}
