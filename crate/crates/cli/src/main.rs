//! `acris`: thin command-line shells over the acris-core operations.

mod config;
mod report;

use acris_core::acris::{fprime, fprime_iter, gamma, IcrisWitness};
use acris_core::covec::{f_inverse, f_map};
use acris_core::dieudonne::{default_suite, solve_sw, verify_theorem_with, SuiteEntry};
use acris_core::multlog::{log_teich, solve_units, UnitElement};
use acris_core::perfring::{RingDescriptor, WittSeries};
use acris_core::serial::{from_json, to_json, Element};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use config::{parse_box, SessionConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use report::Report;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "acris", version, about = "Exact A_cris, Witt vector and Dieudonné point-group computations")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// JSON session config; flags override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    p: Option<u32>,
    /// p-adic precision N
    #[arg(long, global = true)]
    prec: Option<u32>,
    #[arg(long, global = true)]
    xvars: Option<usize>,
    #[arg(long, global = true)]
    yvars: Option<usize>,
    /// exponent box as E,D
    #[arg(long = "box", global = true, value_parser = parse_box)]
    bx: Option<(u32, u64)>,
    /// input element (JSON); `-` reads stdin
    #[arg(long = "in", global = true)]
    input: Option<PathBuf>,
    /// output path; stdout if absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// default | empty | comma-separated module names | path to a JSON suite
    #[arg(long, global = true)]
    suite: Option<String>,
    /// seed for the sampled checks in `verify`
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// record wall-clock per instance (reports are then not reproducible)
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse an element and print its canonical form
    Eval,
    /// Teichmüller lift of a tilt element
    Teich,
    /// Divided power γ_m of an element of I_cris
    Gamma {
        #[arg(long)]
        m: u64,
    },
    /// (F′)^n; n = 1 needs I_cris membership, n > 1 needs β_n(z) = 0
    Fprime {
        #[arg(long, default_value_t = 1)]
        n: u32,
    },
    /// β_n to W(C)/p^n; n defaults to the element's precision
    Beta {
        #[arg(long)]
        n: Option<u32>,
    },
    /// f: M(C) → A_cris(C) on a V-expansion or p-fraction
    Fmap,
    /// Inverse of f on the box
    Finv,
    /// log of the Teichmüller lift of a unit in 1 + Ker ν₀
    Log,
    /// Unit c with log[c] = u for u with F(u) = p·u
    Units,
    /// Hom(N, A_cris(C)/p^N) for a Dieudonné module on the box
    Points,
    /// Compare both sides of the point-group comparison over a suite
    Verify,
}

/// A failed mathematical check (exit 1), as opposed to bad input (exit 2).
#[derive(Debug)]
struct CheckFailed(String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<CheckFailed>().is_some() {
        return 1;
    }
    match e.downcast_ref::<acris_core::Error>() {
        Some(acris_core::Error::Verification(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Config file (if any) with flags layered on top; also reports which of p/prec were set explicitly.
fn session(o: &Opts) -> Result<(SessionConfig, bool, bool)> {
    let file = o.config.as_deref().map(SessionConfig::load).transpose()?;
    let explicit_p = o.p.is_some() || file.is_some();
    let explicit_prec = o.prec.is_some() || file.is_some();
    let mut c = file.unwrap_or_default();
    if let Some(p) = o.p {
        c.p = p;
    }
    if let Some(n) = o.prec {
        c.prec = n;
    }
    if let Some(x) = o.xvars {
        c.xvars = x;
    }
    if let Some(y) = o.yvars {
        c.yvars = y;
    }
    if o.bx.is_some() {
        c.bx = o.bx;
    }
    if let Some(s) = &o.suite {
        c.suite = s.clone();
    }
    if o.out.is_some() {
        c.out = o.out.clone();
    }
    if o.seed.is_some() {
        c.seed = o.seed;
    }
    Ok((c, explicit_p, explicit_prec))
}

fn read_input(path: Option<&Path>) -> Result<Element> {
    let text = match path {
        None => bail!("--in is required for this command"),
        Some(p) if p == Path::new("-") => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
    };
    Ok(from_json(&text)?)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn element_desc(e: &Element) -> Option<RingDescriptor> {
    Some(match e {
        Element::Tilt(t) => t.desc,
        Element::WittSeries(w) => w.desc,
        Element::WcElement(w) => w.series.desc,
        Element::Divided(u) => u.desc,
        Element::VExpansion(v) => v.desc,
        Element::PFraction(f) => f.w.desc,
        Element::DModule(_) | Element::Solution(_) => return None,
    })
}

fn want_kind(e: &Element, kinds: &[&str]) -> Result<()> {
    if kinds.contains(&e.kind()) {
        Ok(())
    } else {
        bail!("input kind {} not accepted here; expected {}", e.kind(), kinds.join(" or "))
    }
}

fn parse_suite(spec: &str, p: u32, prec: u32) -> Result<Vec<SuiteEntry>> {
    match spec {
        "default" => Ok(default_suite(p, prec)),
        "empty" | "" => Ok(Vec::new()),
        s if Path::new(s).is_file() => {
            let text = std::fs::read_to_string(s)?;
            serde_json::from_str(&text).with_context(|| format!("suite file {s}"))
        }
        s => s.split(',').map(|n| Ok(SuiteEntry::named(n.trim(), p, prec)?)).collect(),
    }
}

fn run(cli: Cli) -> Result<()> {
    let (cfg, explicit_p, explicit_prec) = session(&cli.opts)?;
    if let Cmd::Verify = cli.cmd {
        return verify(&cfg, cli.opts.timings);
    }
    let input = read_input(cli.opts.input.as_deref())?;
    if let Some(d) = element_desc(&input) {
        if explicit_p && d.p != cfg.p {
            bail!("input is over p = {} but p = {} was requested", d.p, cfg.p);
        }
    }
    let prec_or = |own: u32| if explicit_prec { cfg.prec } else { own };
    let out = match (&cli.cmd, input) {
        (Cmd::Eval, e) => e,
        (Cmd::Teich, Element::Tilt(c)) => Element::WittSeries(WittSeries::teich(&c, prec_or(c.desc.prec))?),
        (Cmd::Gamma { m }, Element::Divided(z)) => Element::Divided(gamma(*m, &IcrisWitness::new(z)?)?),
        (Cmd::Fprime { n: 1 }, Element::Divided(z)) => Element::Divided(fprime(&IcrisWitness::new(z)?)?),
        (Cmd::Fprime { n }, Element::Divided(z)) => Element::Divided(fprime_iter(*n, &z)?),
        (Cmd::Beta { n }, Element::Divided(z)) => Element::WcElement(z.beta_n(n.unwrap_or(z.prec))?),
        (Cmd::Fmap, Element::VExpansion(v)) => Element::Divided(f_map(&v)?),
        (Cmd::Fmap, Element::PFraction(f)) => Element::Divided(f.f_map()?),
        (Cmd::Finv, Element::Divided(u)) => Element::VExpansion(f_inverse(&u, &cfg.exp_box()?)?),
        (Cmd::Log, Element::Tilt(c)) => {
            let prec = prec_or(c.desc.prec);
            Element::Divided(log_teich(&UnitElement::new(c)?, prec)?)
        }
        (Cmd::Units, Element::Divided(u)) => Element::Tilt(solve_units(&u, &cfg.exp_box()?)?.get().clone()),
        (Cmd::Points, Element::DModule(n)) => {
            let desc = RingDescriptor::new(n.p, cfg.xvars, cfg.yvars, n.prec)?;
            Element::Solution(solve_sw(&n, &desc, &cfg.exp_box()?)?)
        }
        (cmd, e) => {
            let kinds: &[&str] = match cmd {
                Cmd::Teich | Cmd::Log => &["tilt"],
                Cmd::Fmap => &["vexpansion", "pfraction"],
                Cmd::Points => &["dmodule"],
                _ => &["divided"],
            };
            want_kind(&e, kinds)?;
            unreachable!("accepted kinds are handled above")
        }
    };
    write_output(cfg.out.as_deref(), &to_json(&out))
}

fn verify(cfg: &SessionConfig, timings: bool) -> Result<()> {
    let desc = cfg.descriptor()?;
    let bx = cfg.checked_box()?;
    let suite = parse_suite(&cfg.suite, cfg.p, cfg.prec)?;
    let mut rng = cfg.seed.map(ChaCha8Rng::seed_from_u64);
    let mut draw = rng.as_mut().map(|r| move |q: u64| r.gen_range(0..q));
    let t = verify_theorem_with(&suite, &desc, &bx, timings, draw.as_mut().map(|d| d as &mut dyn FnMut(u64) -> u64))?;
    let report = Report::new(cfg.clone(), t);
    write_output(cfg.out.as_deref(), &report.to_json())?;
    if !report.summary.pass {
        let names: Vec<&str> = report.instances.iter().filter(|i| !i.pass).map(|i| i.name.as_str()).collect();
        return Err(anyhow!(CheckFailed(format!("verification failed for {}", names.join(", ")))));
    }
    Ok(())
}
