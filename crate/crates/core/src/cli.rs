//! Command-line front end. Every subcommand echoes its configuration as
//! `#` lines (or JSON fields) so a run can be reproduced from its output.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::json;

use crate::conditioning::{
    condition_discrete, noise_posterior, DiscreteJoint, GaussianNoise, SamplerOptions, TriangularNoise,
};
use crate::constructions::figure::figure_grid;
use crate::constructions::halting::{halting_demo, mass_xk, tau, xk_measure, Verdict};
use crate::constructions::smooth::{density_f, smooth_s_measure, DensityF};
use crate::dyadic::{parse_rational, Dyadic, DyadicInterval, Precision};
use crate::error::{Error, Result};
use crate::machines::{fixtures, HaltingBudget, MachineTable};
use crate::measure::{ComputableMeasure, OpenSetUnion, SmoothDensity};
use crate::quadrature::IntervalFn;
use crate::randvar::{bernoulli, fair_coin, geometric, uniform_tracked, CReal, RandVarDiscrete};
use crate::tape::{BitSource, BitTape};

#[derive(Parser, Debug)]
#[command(name = "condprob", version, about = "Computable probability: samplers, enclosures and conditioning")]
pub struct Cli {
    /// Tape seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw samples from an elementary random variable.
    Sample(SampleArgs),
    /// Lower and upper bounds on the measure of an open set.
    Measure(MeasureArgs),
    /// Posterior probability of a set under additive noise.
    Posterior(PosteriorArgs),
    /// Joint law of (X, Y) on a pixel grid, as PGM and CSV.
    Figure(FigureArgs),
    /// Classify tau(x) for one machine against a reference at several budgets.
    HaltingDemo(DemoArgs),
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// coin, bernoulli, uniform or geometric.
    #[arg(long)]
    pub var: String,
    /// Success probability for `bernoulli`.
    #[arg(long, default_value = "1/3")]
    pub alpha: String,
    #[arg(long, default_value_t = 10)]
    pub n: u64,
    /// Bits of precision for `uniform`.
    #[arg(long, default_value_t = 32)]
    pub precision: u32,
}

#[derive(Args, Debug)]
pub struct MeasureArgs {
    /// lebesgue, xk:<k>, mixture or smooth-s.
    #[arg(long)]
    pub measure: String,
    /// Open set such as `(0,1/2);(3/4,1)`.
    #[arg(long)]
    pub set: String,
    #[arg(long, default_value_t = 16)]
    pub effort: u32,
}

#[derive(Args, Debug)]
pub struct PosteriorArgs {
    /// uniform, atoms:<file> or density:<name>.
    #[arg(long, default_value = "uniform")]
    pub prior: String,
    /// normal, normal:<sigma>, triangular or triangular:<w>.
    #[arg(long, default_value = "normal")]
    pub noise: String,
    #[arg(long)]
    pub observe: String,
    #[arg(long)]
    pub set: String,
    /// Target width, e.g. `2^-12` or `1/4096`.
    #[arg(long, default_value = "2^-12")]
    pub eps: String,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    #[arg(long, default_value_t = 64)]
    pub res: usize,
    #[arg(long, default_value_t = 32)]
    pub budget: u64,
    /// Machine table; the bundled fixtures when absent.
    #[arg(long)]
    pub machine_file: Option<PathBuf>,
    #[arg(long, default_value = "grid.pgm")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    #[arg(long)]
    pub machine: String,
    #[arg(long)]
    pub reference: String,
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
    pub budgets: Vec<u64>,
    #[arg(long, default_value_t = 100)]
    pub samples: u64,
    #[arg(long)]
    pub machine_file: Option<PathBuf>,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code: 0 on success, 2 on usage errors, 3 on domain errors.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", e.name());
            3
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let seed = cli.seed;
    match &cli.command {
        Command::Sample(a) => sample(a, seed, out).map(|_| 0),
        Command::Measure(a) => measure(a, out).map(|_| 0),
        Command::Posterior(a) => posterior(a, out).map(|_| 0),
        Command::Figure(a) => figure(a, out).map(|_| 0),
        Command::HaltingDemo(a) => demo(a, seed, out).map(|_| 0),
        Command::Selftest => selftest(out),
    }
}

fn io(r: std::io::Result<()>) -> Result<()> {
    r.map_err(Error::from)
}

fn sample(a: &SampleArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    io(writeln!(out, "# condprob sample var={} alpha={} n={} precision={} seed={seed}", a.var, a.alpha, a.n, a.precision))?;
    let mut master = BitTape::new(seed);
    match a.var.as_str() {
        "uniform" => {
            io(writeln!(out, "index,lo,hi,approx,bits"))?;
            for i in 0..a.n {
                let (x, u) = uniform_tracked(master.fork());
                let e = x.query(Precision(a.precision))?;
                io(writeln!(out, "{i},{},{},{},{}", e.lo(), e.hi(), e.lo().to_decimal(12), u.bits().consumed()))?;
            }
        }
        "coin" | "bernoulli" | "geometric" => {
            let alpha = CReal::rational(parse_rational(&a.alpha)?);
            io(writeln!(out, "index,value,bits"))?;
            for i in 0..a.n {
                let mut t = master.fork();
                let v = match a.var.as_str() {
                    "coin" => fair_coin(&mut t) as u64,
                    "bernoulli" => bernoulli(&alpha, &mut t, 1 << 16)? as u64,
                    _ => geometric(&mut t, 1 << 16)?,
                };
                io(writeln!(out, "{i},{v},{}", t.position()))?;
            }
        }
        other => return Err(Error::InvalidInput(format!("unknown variable {other:?}"))),
    }
    Ok(())
}

fn named_measure(name: &str) -> Result<ComputableMeasure> {
    if let Some(k) = name.strip_prefix("xk:") {
        let k = k.parse::<u64>().map_err(|e| Error::Parse(format!("xk index {k:?}: {e}")))?;
        return xk_measure(k);
    }
    match name {
        "lebesgue" | "uniform" => Ok(ComputableMeasure::lebesgue()),
        "mixture" => Ok(ComputableMeasure::uniform_atom_mixture()),
        "smooth-s" => Ok(smooth_s_measure()),
        "f" => Ok(ComputableMeasure::smooth(SmoothDensity {
            f: Arc::new(DensityF),
            sup: Dyadic::from_int(2),
        })),
        other => Err(Error::InvalidInput(format!("unknown measure {other:?}"))),
    }
}

fn bound_line(label: &str, d: &Dyadic) -> String {
    format!("{label},{d},{}", d.to_decimal(12))
}

fn measure(a: &MeasureArgs, out: &mut dyn Write) -> Result<()> {
    let mu = named_measure(&a.measure)?;
    let u = OpenSetUnion::parse(&a.set)?;
    io(writeln!(out, "# condprob measure measure={} set={} effort={}", a.measure, u, a.effort))?;
    let lo = mu.lower(&u, a.effort);
    io(writeln!(out, "{}", bound_line("lower", &lo)))?;
    let hi = mu.upper(&u, a.effort)?;
    io(writeln!(out, "{}", bound_line("upper", &hi)))?;
    Ok(())
}

/// `2^-k`, `2^k` or any dyadic literal.
pub fn parse_eps(s: &str) -> Result<Dyadic> {
    if let Some(e) = s.trim().strip_prefix("2^") {
        let e = e.parse::<i64>().map_err(|x| Error::Parse(format!("exponent {e:?}: {x}")))?;
        return Ok(Dyadic::pow2(e));
    }
    s.parse()
}

fn load_atoms(path: &Path) -> Result<ComputableMeasure> {
    let text = std::fs::read_to_string(path)?;
    let mut v = Vec::new();
    for line in text.lines().map(|l| l.split('#').next().unwrap_or("").trim()) {
        if line.is_empty() {
            continue;
        }
        let mut it = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty());
        let (Some(x), Some(m), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Parse(format!("expected `point mass`, got {line:?}")));
        };
        v.push((parse_rational(x)?, parse_rational(m)?));
    }
    ComputableMeasure::atoms(v)
}

fn prior(spec: &str) -> Result<ComputableMeasure> {
    if let Some(p) = spec.strip_prefix("atoms:") {
        return load_atoms(Path::new(p));
    }
    if let Some(n) = spec.strip_prefix("density:") {
        return named_measure(n);
    }
    match spec {
        "uniform" => Ok(ComputableMeasure::lebesgue()),
        other => Err(Error::InvalidInput(format!("unknown prior {other:?}"))),
    }
}

fn noise(spec: &str) -> Result<(Arc<dyn IntervalFn>, Dyadic)> {
    let (kind, arg) = spec.split_once(':').map_or((spec, None), |(k, a)| (k, Some(a)));
    match kind {
        "normal" => {
            let g = match arg {
                None => GaussianNoise::standard(),
                Some(s) => {
                    let sigma = parse_rational(s)?;
                    if sigma <= BigRational::zero() {
                        return Err(Error::InvalidInput("sigma must be positive".into()));
                    }
                    let k = Dyadic::try_from_rational(&(BigRational::one() / sigma))
                        .map_err(|_| Error::InvalidInput(format!("1/sigma must be dyadic, got sigma = {s}")))?;
                    GaussianNoise::with_inv_scale(k)?
                }
            };
            let sup = g.sup();
            Ok((Arc::new(g), sup))
        }
        "triangular" => {
            let t = match arg {
                None => TriangularNoise::quarter(),
                Some(s) => {
                    let w: Dyadic = s.parse()?;
                    let e = w.exponent() + w.mantissa().bits() as i64 - 1;
                    if w != Dyadic::pow2(e) {
                        return Err(Error::InvalidInput(format!("triangular width must be a power of two, got {s}")));
                    }
                    TriangularNoise { e }
                }
            };
            let sup = t.sup();
            Ok((Arc::new(t), sup))
        }
        other => Err(Error::InvalidInput(format!("unknown noise {other:?}"))),
    }
}

fn posterior(a: &PosteriorArgs, out: &mut dyn Write) -> Result<()> {
    let pr = prior(&a.prior)?;
    let (nz, sup) = noise(&a.noise)?;
    let y: Dyadic = a.observe.parse()?;
    let b = OpenSetUnion::parse(&a.set)?;
    let eps = parse_eps(&a.eps)?;
    let r = noise_posterior(pr, nz, sup, &y, &b, &eps)?;
    if a.json {
        let v = json!({
            "prior": a.prior,
            "noise": a.noise,
            "observe": y.to_string(),
            "set": b.to_string(),
            "eps": eps.to_string(),
            "lo": r.lo().to_string(),
            "hi": r.hi().to_string(),
            "lo_decimal": r.lo().to_decimal(12),
            "hi_decimal": r.hi().to_decimal(12),
        });
        io(writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json")))?;
    } else {
        io(writeln!(
            out,
            "# condprob posterior prior={} noise={} observe={} set={} eps={}",
            a.prior, a.noise, y, b, eps
        ))?;
        io(writeln!(out, "{}", bound_line("lo", r.lo())))?;
        io(writeln!(out, "{}", bound_line("hi", r.hi())))?;
    }
    Ok(())
}

fn table(path: &Option<PathBuf>) -> Result<MachineTable> {
    match path {
        Some(p) => MachineTable::load(p),
        None => Ok(fixtures()),
    }
}

fn figure(a: &FigureArgs, out: &mut dyn Write) -> Result<()> {
    let tb = table(&a.machine_file)?;
    let source = a.machine_file.as_ref().map_or("fixtures".to_string(), |p| p.display().to_string());
    let header = vec![
        format!("condprob figure res={} budget={} machine_file={}", a.res, a.budget, source),
        "rows run from Y near 1 (top) to Y near 0; columns from X = 0 to X = 1".to_string(),
    ];
    let g = figure_grid(a.res, &tb, HaltingBudget(a.budget))?;
    g.write_files(&a.out, &header)?;
    for h in &header {
        io(writeln!(out, "# {h}"))?;
    }
    let unresolved = g.cells.iter().flatten().filter(|c| !c.is_point()).count();
    io(writeln!(out, "wrote {}", a.out.display()))?;
    io(writeln!(out, "unresolved_pixels,{unresolved}"))?;
    Ok(())
}

fn demo(a: &DemoArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    let tb = Arc::new(table(&a.machine_file)?);
    let m = tb.index_of(&a.machine)?;
    let n = tb.index_of(&a.reference)?;
    let report = halting_demo(m, n, &tb, &a.budgets, a.samples, seed)?;
    io(writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("json")))?;
    Ok(())
}

type Check = (&'static str, fn() -> Result<bool>);

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

const CHECKS: &[Check] = &[
    ("exp(1) encloses e", || {
        let e = DyadicInterval::point(Dyadic::one()).exp(Precision(40));
        Ok(e.lo().to_f64() <= std::f64::consts::E && std::f64::consts::E <= e.hi().to_f64())
    }),
    ("bernoulli(1/3) frequency within 3 sigma", || {
        let alpha = CReal::rational(q(1, 3));
        let v = RandVarDiscrete::bernoulli(alpha);
        let mut master = BitTape::new(7);
        let n = 20_000u64;
        let mut hits = 0u64;
        for _ in 0..n {
            hits += v.sample(&mut master.fork())?;
        }
        let p = hits as f64 / n as f64;
        Ok((p - 1.0 / 3.0).abs() <= 3.0 * (2.0f64 / 9.0 / n as f64).sqrt())
    }),
    ("X_k cell masses are 2^-k (2/3, 1/3)", || {
        let mut ok = true;
        for k in 0..3u64 {
            let w = q(1, 1 << (k + 1));
            for l in 0..(1i64 << (k + 1)) {
                let a = &w * BigRational::from_integer(l.into());
                let m = mass_xk(Some(k), &a, &(&a + &w));
                let expect = q(1, 1 << k) * if l % 2 == 0 { q(2, 3) } else { q(1, 3) };
                ok &= m == expect;
            }
        }
        Ok(ok)
    }),
    ("p_F takes 2/3 at 0 and 4/3 at 1", || {
        let p = Precision(40);
        let at0 = density_f(&DyadicInterval::point(Dyadic::zero()), p);
        let at1 = density_f(&DyadicInterval::point(Dyadic::one()), p);
        let two_thirds = q(2, 3);
        let inside = |x: &DyadicInterval, v: &BigRational| {
            let (lo, hi) = x.to_rational_pair();
            &lo <= v && v <= &hi
        };
        Ok(inside(&at0, &two_thirds) && inside(&at1, &(&two_thirds * BigRational::from_integer(2.into()))))
    }),
    ("figure rows carry their geometric mass", || {
        let g = figure_grid(16, &fixtures(), HaltingBudget(32))?;
        Ok((0..16).all(|j| g.row_sum(j).is_point() && g.row_sum(j).lo == q(1, 16)))
    }),
    ("tau between halting fixtures lies in {1/2, 1, 2}", || {
        let tb = Arc::new(fixtures());
        let mut master = BitTape::new(11);
        let allowed = [q(1, 2), q(1, 1), q(2, 1)];
        for _ in 0..50 {
            let s = crate::constructions::halting::sample_x(&master.fork(), &tb, None)?;
            let r = tau(1, 2, &s.x, &tb, HaltingBudget(100))?;
            if r.verdict != Verdict::BothHalted || !r.value.is_point() || !allowed.contains(&r.value.lo) {
                return Ok(false);
            }
        }
        Ok(true)
    }),
    ("table conditioning gives exact ratios", || {
        let j = DiscreteJoint::parse("0,0:1/4; 0,1:1/4; 1,1:1/2")?;
        let c = condition_discrete(&j, 0, &SamplerOptions::default())?;
        Ok(c.atoms.values().all(|v| v.is_point() && v.lo == q(1, 2)))
    }),
    ("normal-noise posterior of (0,1) encloses 1", || {
        let g = GaussianNoise::standard();
        let sup = g.sup();
        let r = noise_posterior(
            ComputableMeasure::lebesgue(),
            Arc::new(g),
            sup,
            &Dyadic::ratio_pow2(1, 1),
            &OpenSetUnion::interval(Dyadic::zero(), Dyadic::one()),
            &Dyadic::pow2(-10),
        )?;
        Ok(r.contains(&Dyadic::one()))
    }),
    ("smooth S has total mass 1", || {
        let mu = smooth_s_measure();
        let (lo, hi) = mu.rational_bounds(&OpenSetUnion::whole(), 10)?;
        Ok(lo <= BigRational::one() && BigRational::one() <= hi)
    }),
];

/// Runs [`CHECKS`]; exit code 0 when all pass, 1 otherwise.
fn selftest(out: &mut dyn Write) -> Result<i32> {
    io(writeln!(out, "# condprob selftest checks={}", CHECKS.len()))?;
    let mut failed = 0;
    for (name, f) in CHECKS {
        let status = match f() {
            Ok(true) => "ok".to_string(),
            Ok(false) => {
                failed += 1;
                "FAIL".to_string()
            }
            Err(e) => {
                failed += 1;
                format!("FAIL ({})", e.name())
            }
        };
        io(writeln!(out, "{status} {name}"))?;
    }
    io(writeln!(out, "{} passed, {failed} failed", CHECKS.len() - failed))?;
    Ok(if failed == 0 { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["condprob"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let (code, _, err) = run_str(&["sample", "--bogus"]);
        assert_eq!(code, 2);
        assert!(err.contains("bogus"));
        assert_eq!(run_str(&[]).0, 2);
    }

    #[test]
    fn domain_error_exit_code() {
        let (code, _, err) = run_str(&["posterior", "--noise", "triangular", "--observe", "3", "--set", "(0,1)", "--eps", "2^-6"]);
        assert_eq!(code, 3);
        assert!(err.contains("VanishingEvidence"), "{err}");
        let (code, _, err) = run_str(&["measure", "--measure", "nope", "--set", "(0,1)"]);
        assert_eq!(code, 3);
        assert!(err.contains("InvalidInput"));
    }

    #[test]
    fn measure_bounds_xk() {
        let (code, out, _) = run_str(&["measure", "--measure", "xk:0", "--set", "(0,1/2)", "--effort", "20"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert!(lines[0].starts_with("# condprob measure"));
        assert!(lines[1].starts_with("lower,") && lines[2].starts_with("upper,"));
        let lo: Dyadic = lines[1].split(',').nth(1).unwrap().parse().unwrap();
        let hi: Dyadic = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        let two_thirds = q(2, 3);
        assert!(lo.to_rational() <= two_thirds && two_thirds <= hi.to_rational());
    }

    #[test]
    fn sample_is_deterministic() {
        let a = run_str(&["--seed", "5", "sample", "--var", "bernoulli", "--n", "50"]);
        let b = run_str(&["sample", "--var", "bernoulli", "--n", "50", "--seed", "5"]);
        assert_eq!(a, b);
        assert_eq!(a.1.lines().count(), 52);
        let c = run_str(&["--seed", "6", "sample", "--var", "bernoulli", "--n", "50"]);
        assert_ne!(a.1, c.1);
    }

    #[test]
    fn uniform_samples_have_requested_width() {
        let (code, out, _) = run_str(&["sample", "--var", "uniform", "--n", "3", "--precision", "20"]);
        assert_eq!(code, 0);
        for line in out.lines().skip(2) {
            let f: Vec<&str> = line.split(',').collect();
            let lo: Dyadic = f[1].parse().unwrap();
            let hi: Dyadic = f[2].parse().unwrap();
            assert!(&hi - &lo <= Dyadic::pow2(-20));
        }
    }

    #[test]
    fn parse_noise_specs() {
        assert!(noise("normal:1/4").is_ok());
        assert!(noise("normal:3").is_err());
        assert!(noise("triangular:1/8").is_ok());
        assert!(noise("triangular:3/8").is_err());
        assert_eq!(parse_eps("2^-12").unwrap(), Dyadic::pow2(-12));
    }

    #[test]
    fn posterior_json_and_text() {
        let (code, out, _) = run_str(&["posterior", "--observe", "1/2", "--set", "(0,1/2)", "--eps", "2^-10", "--json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let lo: Dyadic = v["lo"].as_str().unwrap().parse().unwrap();
        let hi: Dyadic = v["hi"].as_str().unwrap().parse().unwrap();
        assert!(lo <= Dyadic::ratio_pow2(1, 1) && Dyadic::ratio_pow2(1, 1) <= hi);
    }

    #[test]
    fn atoms_prior_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("atoms.txt");
        std::fs::write(&p, "# two atoms\n1/4 1/2\n3/4 1/2\n").unwrap();
        let prior = format!("atoms:{}", p.display());
        let (code, out, err) = run_str(&["posterior", "--prior", &prior, "--observe", "1/2", "--set", "(0,1/2)"]);
        assert_eq!(code, 0, "{err}");
        let lo: Dyadic = out.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        let hi: Dyadic = out.lines().nth(2).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert!(lo <= Dyadic::ratio_pow2(1, 1) && Dyadic::ratio_pow2(1, 1) <= hi);
    }

    #[test]
    fn figure_writes_three_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("g.pgm");
        let (code, _, err) = run_str(&["figure", "--res", "8", "--budget", "16", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
        assert!(std::fs::read(&out).unwrap().starts_with(b"P5\n8 8\n65535\n"));
        let csv = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
        assert!(csv.starts_with("# condprob figure res=8"));
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 8);
        assert!(dir.path().join("grid.unc.csv").exists());
    }

    #[test]
    fn demo_emits_json() {
        let (code, out, err) = run_str(&["halting-demo", "--machine", "h50", "--reference", "h2", "--budgets", "10,100", "--samples", "5"]);
        assert_eq!(code, 0, "{err}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["budgets"].as_array().unwrap().len(), 2);
    }
}
