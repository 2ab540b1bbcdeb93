//! Two-counter machines with step-budgeted simulation.
//!
//! Steps are counted per executed instruction, `HALT` included. Falling off
//! the end of the program halts without taking another step, so the empty
//! program halts at step 0.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Counter {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instr {
    Inc(Counter),
    /// Decrement if positive, otherwise jump.
    Dec(Counter, usize),
    /// Jump if zero.
    Jz(Counter, usize),
    Halt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub name: String,
    pub instrs: Vec<Instr>,
    /// Known never to halt. Only fixtures carry this; the simulator never infers it.
    pub certified_nonhalting: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct HaltingBudget(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepResult {
    HaltedAt(u64),
    UnknownBeyond(u64),
}

/// What the constructions may assume about `h(n)` at a given budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HaltStatus {
    Halted(u64),
    NeverHalts,
    Unknown(u64),
}

impl HaltStatus {
    pub fn halting_time(self) -> Option<u64> {
        match self {
            HaltStatus::Halted(k) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for Counter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Counter::A => "a",
            Counter::B => "b",
        })
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Inc(c) => write!(f, "INC {c}"),
            Instr::Dec(c, l) => write!(f, "DEC {c} {l}"),
            Instr::Jz(c, l) => write!(f, "JZ {c} {l}"),
            Instr::Halt => f.write_str("HALT"),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.instrs.iter().map(|i| i.to_string()).collect();
        write!(f, "{}: {}", self.name, body.join("; "))?;
        if self.certified_nonhalting {
            f.write_str(" @never")?;
        }
        Ok(())
    }
}

impl Program {
    pub fn new(name: impl Into<String>, instrs: Vec<Instr>) -> Result<Self> {
        let p = Program {
            name: name.into(),
            instrs,
            certified_nonhalting: false,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let len = self.instrs.len();
        for (i, ins) in self.instrs.iter().enumerate() {
            if let Instr::Dec(_, l) | Instr::Jz(_, l) = ins {
                if *l >= len {
                    return Err(Error::Parse(format!(
                        "{}: instruction {i} jumps to {l}, outside 0..{len}",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Run from `pc = 0, a = b = 0` for at most `budget` steps.
    pub fn run(&self, budget: HaltingBudget) -> StepResult {
        let (mut pc, mut a, mut b) = (0usize, 0u64, 0u64);
        let mut steps = 0u64;
        loop {
            if pc >= self.instrs.len() {
                return StepResult::HaltedAt(steps);
            }
            if steps == budget.0 {
                return StepResult::UnknownBeyond(budget.0);
            }
            steps += 1;
            match self.instrs[pc] {
                Instr::Halt => return StepResult::HaltedAt(steps),
                Instr::Inc(c) => {
                    match c {
                        Counter::A => a += 1,
                        Counter::B => b += 1,
                    }
                    pc += 1;
                }
                Instr::Dec(c, l) => {
                    let v = match c {
                        Counter::A => &mut a,
                        Counter::B => &mut b,
                    };
                    if *v > 0 {
                        *v -= 1;
                        pc += 1;
                    } else {
                        pc = l;
                    }
                }
                Instr::Jz(c, l) => {
                    let v = match c {
                        Counter::A => a,
                        Counter::B => b,
                    };
                    pc = if v == 0 { l } else { pc + 1 };
                }
            }
        }
    }
}

fn parse_counter(s: &str) -> Result<Counter> {
    match s {
        "a" | "A" => Ok(Counter::A),
        "b" | "B" => Ok(Counter::B),
        _ => Err(Error::Parse(format!("unknown counter {s:?}"))),
    }
}

fn parse_label(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::Parse(format!("bad label {s:?}")))
}

pub fn parse_instr(s: &str) -> Result<Instr> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    match parts.as_slice() {
        ["INC", c] => Ok(Instr::Inc(parse_counter(c)?)),
        ["DEC", c, l] => Ok(Instr::Dec(parse_counter(c)?, parse_label(l)?)),
        ["JZ", c, l] => Ok(Instr::Jz(parse_counter(c)?, parse_label(l)?)),
        ["HALT"] => Ok(Instr::Halt),
        _ => Err(Error::Parse(format!("cannot parse instruction {s:?}"))),
    }
}

/// One program per line: `name: INSTR; INSTR; ...`, optionally ending in `@never`.
pub fn parse_program(line: &str) -> Result<Program> {
    let (name, body) = line
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("missing `name:` in {line:?}")))?;
    let name = name.trim();
    if name.is_empty() {
        return Err(Error::Parse("empty program name".into()));
    }
    let mut body = body.trim();
    let mut never = false;
    if let Some(rest) = body.strip_suffix("@never") {
        never = true;
        body = rest.trim();
    }
    let instrs = body
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_instr)
        .collect::<Result<Vec<_>>>()?;
    let mut p = Program::new(name, instrs)?;
    p.certified_nonhalting = never;
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineTable {
    programs: Vec<Program>,
}

impl MachineTable {
    pub fn new(programs: Vec<Program>) -> Self {
        MachineTable { programs }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let programs = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(parse_program)
            .collect::<Result<Vec<_>>>()?;
        Ok(MachineTable { programs })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Machines with the given halting times, in order (`None` never halts).
    pub fn synthetic(times: &[Option<u64>]) -> Self {
        MachineTable::new(times.iter().map(|t| synthetic_machine(*t)).collect())
    }

    pub fn len(&self) -> usize {
        self.programs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.programs.is_empty()
    }

    pub fn programs(&self) -> &[Program] {
        &self.programs
    }

    pub fn get(&self, n: usize) -> Result<&Program> {
        self.programs.get(n).ok_or(Error::IndexOutOfRange {
            index: n,
            len: self.programs.len(),
        })
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.programs
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| Error::InvalidInput(format!("no machine named {name:?}")))
    }

    pub fn steps_to_halt(&self, n: usize, budget: HaltingBudget) -> Result<StepResult> {
        Ok(self.get(n)?.run(budget))
    }

    /// Indices past the end of the table stand for machines that never halt.
    pub fn status(&self, n: usize, budget: HaltingBudget) -> HaltStatus {
        let Some(p) = self.programs.get(n) else {
            return HaltStatus::NeverHalts;
        };
        if p.certified_nonhalting {
            return HaltStatus::NeverHalts;
        }
        match p.run(budget) {
            StepResult::HaltedAt(k) => HaltStatus::Halted(k),
            StepResult::UnknownBeyond(t) => HaltStatus::Unknown(t),
        }
    }

    pub fn to_text(&self) -> String {
        self.programs.iter().map(|p| format!("{p}\n")).collect()
    }
}

/// A program halting at exactly `halt_step`, or a self-loop for `None`.
///
/// For `k >= 2`: load `n = (k-2)/3` into `a`, pad with `r` no-op jumps, then
/// count down with a two-instruction loop: `n + r + 2n + 2 = k` steps.
pub fn synthetic_machine(halt_step: Option<u64>) -> Program {
    use Counter::*;
    let Some(k) = halt_step else {
        return Program {
            name: "never".into(),
            instrs: vec![Instr::Jz(A, 0)],
            certified_nonhalting: true,
        };
    };
    let instrs = match k {
        0 => vec![],
        1 => vec![Instr::Halt],
        _ => {
            let n = ((k - 2) / 3) as usize;
            let r = ((k - 2) % 3) as usize;
            let mut v = vec![Instr::Inc(A); n];
            for i in n..n + r {
                v.push(Instr::Jz(B, i + 1));
            }
            let l = n + r;
            v.push(Instr::Dec(A, l + 2));
            v.push(Instr::Jz(B, l));
            v.push(Instr::Halt);
            v
        }
    };
    Program {
        name: format!("h{k}"),
        instrs,
        certified_nonhalting: false,
    }
}

/// Bundled fixtures: `h0, halt-immediate, h2, h5, loop, count-50, h50`.
pub fn fixtures() -> MachineTable {
    let named = |name: &str, mut p: Program| {
        p.name = name.into();
        p
    };
    let mut count = vec![Instr::Inc(Counter::A); 50];
    count.push(Instr::Halt);
    MachineTable::new(vec![
        synthetic_machine(Some(0)),
        named("halt-immediate", synthetic_machine(Some(1))),
        synthetic_machine(Some(2)),
        synthetic_machine(Some(5)),
        named("loop", synthetic_machine(None)),
        Program {
            name: "count-50".into(),
            instrs: count,
            certified_nonhalting: false,
        },
        synthetic_machine(Some(50)),
    ])
}

pub const FIXTURES_TEXT: &str = include_str!("../fixtures/fixtures.cm");

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent reference interpreter that records every executed pc.
    fn trace(instrs: &[Instr], limit: usize) -> (Vec<usize>, bool) {
        let mut regs = [0u64; 2];
        let idx = |c: Counter| if c == Counter::A { 0 } else { 1 };
        let mut pc = 0;
        let mut t = Vec::new();
        while pc < instrs.len() && t.len() < limit {
            t.push(pc);
            pc = match instrs[pc] {
                Instr::Halt => return (t, true),
                Instr::Inc(c) => {
                    regs[idx(c)] += 1;
                    pc + 1
                }
                Instr::Dec(c, l) if regs[idx(c)] == 0 => l,
                Instr::Dec(c, _) => {
                    regs[idx(c)] -= 1;
                    pc + 1
                }
                Instr::Jz(c, l) => {
                    if regs[idx(c)] == 0 {
                        l
                    } else {
                        pc + 1
                    }
                }
            };
        }
        (t, pc >= instrs.len())
    }

    #[test]
    fn halt_immediate_and_loop() {
        let f = fixtures();
        let hi = f.index_of("halt-immediate").unwrap();
        assert_eq!(f.steps_to_halt(hi, HaltingBudget(10)), Ok(StepResult::HaltedAt(1)));
        let lp = f.index_of("loop").unwrap();
        for t in [1, 10, 1000, 1_000_000] {
            assert_eq!(
                f.steps_to_halt(lp, HaltingBudget(t)),
                Ok(StepResult::UnknownBeyond(t))
            );
        }
        assert_eq!(f.status(lp, HaltingBudget(10)), HaltStatus::NeverHalts);
    }

    #[test]
    fn count_50_matches_trace() {
        let f = fixtures();
        let n = f.index_of("count-50").unwrap();
        let (t, halted) = trace(&f.get(n).unwrap().instrs, 100);
        assert!(halted);
        assert_eq!(t.len(), 51);
        assert_eq!(
            f.steps_to_halt(n, HaltingBudget(100)),
            Ok(StepResult::HaltedAt(t.len() as u64))
        );
    }

    #[test]
    fn synthetic_examples() {
        let m = MachineTable::synthetic(&[Some(5), None, Some(1), Some(0)]);
        assert_eq!(m.steps_to_halt(0, HaltingBudget(10)), Ok(StepResult::HaltedAt(5)));
        assert_eq!(
            m.steps_to_halt(1, HaltingBudget(1_000_000)),
            Ok(StepResult::UnknownBeyond(1_000_000))
        );
        assert_eq!(m.steps_to_halt(2, HaltingBudget(1)), Ok(StepResult::HaltedAt(1)));
        assert_eq!(m.steps_to_halt(3, HaltingBudget(1)), Ok(StepResult::HaltedAt(0)));
        assert_eq!(
            m.steps_to_halt(4, HaltingBudget(1)),
            Err(Error::IndexOutOfRange { index: 4, len: 4 })
        );
    }

    #[test]
    fn bundled_file_matches_fixtures() {
        assert_eq!(MachineTable::parse(FIXTURES_TEXT).unwrap(), fixtures());
    }

    #[test]
    fn text_roundtrip() {
        let f = fixtures();
        assert_eq!(MachineTable::parse(&f.to_text()).unwrap(), f);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_program("x: INC c").is_err());
        assert!(parse_program("x: JZ a 3").is_err());
        assert!(parse_program("INC a").is_err());
        assert!(MachineTable::parse("# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn out_of_table_indices_never_halt() {
        let f = fixtures();
        assert_eq!(f.status(f.len() + 3, HaltingBudget(5)), HaltStatus::NeverHalts);
        assert_eq!(f.status(6, HaltingBudget(10)), HaltStatus::Unknown(10));
        assert_eq!(f.status(6, HaltingBudget(50)), HaltStatus::Halted(50));
    }

    proptest! {
        #[test]
        fn synthetic_halts_exactly(k in 0u64..400) {
            let p = synthetic_machine(Some(k));
            let (t, halted) = trace(&p.instrs, 1000);
            prop_assert!(halted);
            prop_assert_eq!(t.len() as u64, k);
            prop_assert_eq!(p.run(HaltingBudget(k.max(1))), StepResult::HaltedAt(k));
            if k > 1 {
                prop_assert_eq!(p.run(HaltingBudget(k - 1)), StepResult::UnknownBeyond(k - 1));
            }
        }

        #[test]
        fn budget_monotone(k in 0u64..200, t in 1u64..300, extra in 0u64..300) {
            let p = synthetic_machine(Some(k));
            match p.run(HaltingBudget(t)) {
                StepResult::HaltedAt(h) => {
                    prop_assert_eq!(p.run(HaltingBudget(t + extra)), StepResult::HaltedAt(h))
                }
                StepResult::UnknownBeyond(_) => prop_assert!(k > t),
            }
        }
    }
}
