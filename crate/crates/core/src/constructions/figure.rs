//! The joint law of `(X, Y)` on a pixel grid, where `Y` is uniform and
//! `N = floor(-log2 Y)`. Pixel masses are exact rationals; machines that are
//! unresolved at the budget make a pixel an interval.

use std::io::Write;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::constructions::halting::mass_xk;
use crate::dyadic::RationalInterval;
use crate::error::{Error, Result};
use crate::machines::{HaltStatus, HaltingBudget, MachineTable};

fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

fn frac(n: usize, d: usize) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[derive(Debug, Clone)]
pub struct FigureGrid {
    pub res: usize,
    /// Row `j` covers `Y` in `[1 - (j+1)/res, 1 - j/res]`, so row 0 is the
    /// top of the picture. Column `i` covers `X` in `[i/res, (i+1)/res]`.
    pub cells: Vec<Vec<RationalInterval>>,
}

/// `lambda((a1, b1) ∩ (a2, b2))`.
fn overlap(a1: &BigRational, b1: &BigRational, a2: &BigRational, b2: &BigRational) -> BigRational {
    let lo = a1.max(a2);
    let hi = b1.min(b2);
    if hi > lo {
        hi - lo
    } else {
        BigRational::zero()
    }
}

/// Mass of `X_{h(n)}` on `(a, b)`, an interval when `h(n)` is unresolved.
fn stripe_mass(st: HaltStatus, a: &BigRational, b: &BigRational, levels: u64) -> RationalInterval {
    match st {
        HaltStatus::Halted(k) => RationalInterval::point(mass_xk(Some(k), a, b)),
        HaltStatus::NeverHalts => RationalInterval::point(mass_xk(None, a, b)),
        HaltStatus::Unknown(t) => {
            // past `levels` every pixel holds whole parity pairs, as for h = infinity
            let mut r = RationalInterval::point(mass_xk(None, a, b));
            for k in t + 1..=levels.max(t + 1) {
                r = r.hull(&RationalInterval::point(mass_xk(Some(k), a, b)));
            }
            r
        }
    }
}

pub fn figure_grid(res: usize, table: &MachineTable, budget: HaltingBudget) -> Result<FigureGrid> {
    if res == 0 || !res.is_power_of_two() {
        return Err(Error::InvalidInput(format!("resolution {res} is not a power of two")));
    }
    let r = res.trailing_zeros() as u64;
    // every index past the table is non-halting, so the tail is exact
    let n_max = (table.len() as u64).max(2 * r + 4);
    let statuses: Vec<HaltStatus> = (0..=n_max).map(|n| table.status(n as usize, budget)).collect();
    let tail_top = pow2(-(n_max as i64) - 1);
    let mut cells = Vec::with_capacity(res);
    for j in 0..res {
        let y_lo = BigRational::one() - frac(j + 1, res);
        let y_hi = BigRational::one() - frac(j, res);
        let mut weights: Vec<(HaltStatus, BigRational)> = Vec::new();
        for (n, st) in statuses.iter().enumerate() {
            let w = overlap(&y_lo, &y_hi, &pow2(-(n as i64) - 1), &pow2(-(n as i64)));
            if !w.is_zero() {
                weights.push((*st, w));
            }
        }
        let tail = overlap(&y_lo, &y_hi, &BigRational::zero(), &tail_top);
        if !tail.is_zero() {
            weights.push((HaltStatus::NeverHalts, tail));
        }
        let row = (0..res)
            .map(|i| {
                let (a, b) = (frac(i, res), frac(i + 1, res));
                weights.iter().fold(RationalInterval::point(BigRational::zero()), |acc, (st, w)| {
                    acc.add(&stripe_mass(*st, &a, &b, r).scale(w))
                })
            })
            .collect();
        cells.push(row);
    }
    Ok(FigureGrid { res, cells })
}

fn rat(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl FigureGrid {
    pub fn row_sum(&self, j: usize) -> RationalInterval {
        self.cells[j]
            .iter()
            .fold(RationalInterval::point(BigRational::zero()), |acc, c| acc.add(c))
    }

    /// Exact lower pixel masses, one row per line.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for row in &self.cells {
            let line: Vec<String> = row.iter().map(|c| rat(&c.lo)).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    /// Width of each pixel's enclosure.
    pub fn uncertainty_csv(&self) -> String {
        let mut s = String::new();
        for row in &self.cells {
            let line: Vec<String> = row.iter().map(|c| rat(&c.width())).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    /// 16-bit binary PGM, darker where the mass is larger.
    pub fn to_pgm(&self) -> Vec<u8> {
        let max = self
            .cells
            .iter()
            .flatten()
            .map(|c| c.hi.clone())
            .max()
            .unwrap_or_else(BigRational::one);
        let mut out = format!("P5\n{} {}\n65535\n", self.res, self.res).into_bytes();
        for row in &self.cells {
            for c in row {
                let v = if max.is_zero() {
                    0
                } else {
                    let mid = (&c.lo + &c.hi) / BigRational::from_integer(2.into());
                    (mid / &max * BigRational::from_integer(65535.into()))
                        .round()
                        .to_integer()
                        .to_u16()
                        .unwrap_or(u16::MAX)
                };
                out.extend_from_slice(&(65535 - v).to_be_bytes());
            }
        }
        out
    }

    /// Writes the PGM to `path` and the two CSV files next to it, each CSV
    /// starting with `header` as `#` comment lines.
    pub fn write_files(&self, path: &Path, header: &[String]) -> Result<()> {
        let io = |e: std::io::Error| Error::Io(e.to_string());
        let dir = path.parent().unwrap_or(Path::new("."));
        let comments: String = header.iter().map(|h| format!("# {h}\n")).collect();
        std::fs::File::create(path).and_then(|mut f| f.write_all(&self.to_pgm())).map_err(io)?;
        std::fs::write(dir.join("grid.csv"), comments.clone() + &self.to_csv()).map_err(io)?;
        std::fs::write(dir.join("grid.unc.csv"), comments + &self.uncertainty_csv()).map_err(io)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machines::fixtures;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn top_half_holds_half_the_mass() {
        let g = figure_grid(16, &fixtures(), HaltingBudget(32)).unwrap();
        let top = (0..8).fold(BigRational::zero(), |s, j| s + g.row_sum(j).lo);
        assert_eq!(top, q(1, 2));
        for j in 0..16 {
            assert_eq!(g.row_sum(j), RationalInterval::point(q(1, 16)));
        }
    }

    #[test]
    fn nonhalting_set_is_flat_within_rows() {
        let tb = MachineTable::synthetic(&[None, None, None]);
        let g = figure_grid(8, &tb, HaltingBudget(5)).unwrap();
        for row in &g.cells {
            assert!(row.iter().all(|c| c == &row[0]));
        }
    }

    #[test]
    fn h0_stripe_alternates() {
        let tb = MachineTable::synthetic(&[Some(0)]);
        let g = figure_grid(8, &tb, HaltingBudget(5)).unwrap();
        // rows 0..4 are the stripe N = 0, which holds X_0: 4/3 on [0,1/2), 2/3 after
        let row = &g.cells[0];
        for (i, c) in row.iter().enumerate() {
            let dens = if i < 4 { q(4, 3) } else { q(2, 3) };
            assert_eq!(c.lo, dens * q(1, 8) * q(1, 8));
        }
    }

    #[test]
    fn column_sums_match_stripe_marginal() {
        let tb = MachineTable::synthetic(&[Some(2), Some(1), None]);
        let res = 16;
        let g = figure_grid(res, &tb, HaltingBudget(5)).unwrap();
        // stripe N = 1 is Y in (1/4, 1/2]: rows 8..12
        for i in 0..res {
            let s = (8..12).fold(BigRational::zero(), |s, j| s + &g.cells[j][i].lo);
            let a = q(i as i64, res as i64);
            let b = q(i as i64 + 1, res as i64);
            assert_eq!(s, q(1, 4) * mass_xk(Some(1), &a, &b));
        }
    }

    #[test]
    fn unresolved_machine_leaves_uncertainty() {
        let tb = MachineTable::synthetic(&[Some(40)]);
        let g = figure_grid(16, &tb, HaltingBudget(0)).unwrap();
        assert!(g.cells[0].iter().any(|c| !c.is_point()));
        let g = figure_grid(16, &tb, HaltingBudget(3)).unwrap();
        assert!(g.cells.iter().flatten().all(|c| c.is_point()));
    }

    #[test]
    fn pgm_header_and_size() {
        let g = figure_grid(4, &fixtures(), HaltingBudget(10)).unwrap();
        let pgm = g.to_pgm();
        let header = b"P5\n4 4\n65535\n";
        assert!(pgm.starts_with(header));
        assert_eq!(pgm.len(), header.len() + 2 * 16);
        assert_eq!(g.to_csv().lines().count(), 4);
    }
}
