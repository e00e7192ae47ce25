//! End-to-end comparison of the A_cris point groups with the independent sides.

use super::classical::{pushforward_certificate, solve_classical};
use super::sw::{check_f_equivariant, solve_sw};
use super::units::{unit_group_divisors, unit_round_trip};
use super::{dd_split, DieudonneModule, SolutionModule};
use crate::acris::DividedSeries;
use crate::error::{Error, Result};
use crate::perfring::{ExpBox, RingDescriptor};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub name: String,
    pub module: DieudonneModule,
}

impl SuiteEntry {
    /// One of `etale`, `multiplicative`, `supersingular`, `etale+multiplicative`.
    pub fn named(name: &str, p: u32, prec: u32) -> Result<Self> {
        let module = match name {
            "etale" => DieudonneModule::etale(p, 1, prec),
            "multiplicative" => DieudonneModule::multiplicative(p, 1, prec),
            "supersingular" => DieudonneModule::supersingular(p, prec),
            "etale+multiplicative" => DieudonneModule::etale(p, 1, prec).direct_sum(&DieudonneModule::multiplicative(p, 1, prec))?,
            _ => return Err(Error::Invalid(format!("unknown suite module {name:?}"))),
        };
        Ok(SuiteEntry { name: name.to_string(), module })
    }
}

pub const DEFAULT_SUITE: [&str; 4] = ["etale", "multiplicative", "supersingular", "etale+multiplicative"];

pub fn default_suite(p: u32, prec: u32) -> Vec<SuiteEntry> {
    DEFAULT_SUITE.iter().map(|n| SuiteEntry::named(n, p, prec).expect("built-in module")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub p: u32,
    pub prec: u32,
    pub xvars: usize,
    pub yvars: usize,
    #[serde(rename = "box")]
    pub bx: (u32, u64),
    pub rank: usize,
    pub nilpotent_rank: usize,
    pub invertible_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub name: String,
    pub params: InstanceParams,
    /// elementary divisors of Hom(N, A_cris(C)/p^N) on the box
    pub sw_divisors: Vec<u32>,
    /// the same from W(C) (nilpotent part) and the unit group (multiplicative part)
    pub independent_divisors: Vec<u32>,
    /// named bijection checks
    pub round_trips: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub millis: Option<u64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub instances: Vec<InstanceReport>,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
}

impl TheoremReport {
    pub fn from_instances(instances: Vec<InstanceReport>) -> Self {
        let passed = instances.iter().filter(|i| i.pass).count();
        let failed = instances.len() - passed;
        TheoremReport { instances, passed, failed, pass: failed == 0 }
    }
}

/// Random combinations drawn per block when sampling is on.
pub const SAMPLES_PER_BLOCK: usize = 4;

/// F-equivariance of random Z/p^N combinations of the generators; `draw(q)` is uniform in [0, q).
fn sampled_equivariance(n: &DieudonneModule, sw: &SolutionModule<DividedSeries>, draw: &mut dyn FnMut(u64) -> u64) -> Result<Option<String>> {
    let q = (n.p as u64).pow(sw.prec);
    for b in &sw.blocks {
        let Some(first) = b.generators.first() else { continue };
        for _ in 0..SAMPLES_PER_BLOCK {
            let mut u: Vec<DividedSeries> = first.iter().map(|x| DividedSeries::zero(x.desc, sw.prec)).collect();
            for g in &b.generators {
                let c = draw(q) as i64;
                for (ui, gi) in u.iter_mut().zip(g) {
                    *ui = ui.add(&gi.scale(c))?;
                }
            }
            if !check_f_equivariant(n, &u)? {
                let shown: Vec<String> = u.iter().map(|x| x.to_string()).collect();
                return Ok(Some(format!("sampled solution [{}] is not F-equivariant", shown.join(", "))));
            }
        }
    }
    Ok(None)
}

fn run_instance(
    e: &SuiteEntry,
    desc: &RingDescriptor,
    bx: &ExpBox,
    draw: &mut Option<&mut dyn FnMut(u64) -> u64>,
) -> Result<InstanceReport> {
    let n = &e.module;
    let split = dd_split(n)?;
    let params = InstanceParams {
        p: desc.p,
        prec: desc.prec,
        xvars: desc.n,
        yvars: desc.m,
        bx: (bx.e, bx.d),
        rank: n.rank,
        nilpotent_rank: split.nil.rank,
        invertible_rank: split.inv.rank,
    };
    let sw = solve_sw(n, desc, bx)?;
    let mut independent = Vec::new();
    let mut trips = BTreeMap::new();
    let mut detail = Vec::new();
    if let Some(draw) = draw.as_mut() {
        let bad = sampled_equivariance(n, &sw, &mut **draw)?;
        trips.insert("sampled_f_equivariant".to_string(), bad.is_none());
        detail.extend(bad);
    }
    if split.nil.rank > 0 {
        let cl = solve_classical(&split.nil, desc, bx)?;
        independent.extend(cl.divisors());
        let cert = pushforward_certificate(&split.nil, desc, bx, &cl)?;
        trips.insert("beta_generates".to_string(), cert.generates);
        trips.insert("lift_matches".to_string(), cert.lifts_match);
        trips.insert("lift_m_independent".to_string(), cert.m_independent);
        trips.insert("f_lift_beta_identity".to_string(), cert.round_trip);
    }
    if split.inv.rank > 0 {
        if !split.inv.is_split_multiplicative() {
            return Ok(InstanceReport {
                name: e.name.clone(),
                params,
                sw_divisors: sw.divisors(),
                independent_divisors: independent,
                round_trips: trips,
                millis: None,
                pass: false,
                detail: Some(match sw.blocks.iter().flat_map(|b| b.generators.first()).next() {
                    Some(g) => {
                        let shown: Vec<String> = g.iter().map(|x| x.to_string()).collect();
                        format!("invertible part is not split multiplicative; solution [{}] has no independent counterpart", shown.join(", "))
                    }
                    None => "invertible part is not split multiplicative; no independent oracle".into(),
                }),
            });
        }
        independent.extend(unit_group_divisors(desc, bx, split.inv.rank, desc.prec)?);
        let sw_inv = solve_sw(&split.inv, desc, bx)?;
        let rt = unit_round_trip(&split.inv, desc, bx, &sw_inv)?;
        trips.insert("log_solve_units".to_string(), rt.from_acris);
        trips.insert("log_artin_hasse_in_span".to_string(), rt.from_units);
        if let Some(c) = rt.counterexample {
            detail.push(c);
        }
    }
    independent.sort_unstable_by(|a, b| b.cmp(a));
    let sw_divisors = sw.divisors();
    if sw_divisors != independent {
        detail.push(format!("divisors differ: {sw_divisors:?} vs {independent:?}"));
    }
    for (k, ok) in &trips {
        if !ok {
            detail.push(format!("{k} failed"));
        }
    }
    let pass = detail.is_empty();
    Ok(InstanceReport {
        name: e.name.clone(),
        params,
        sw_divisors,
        independent_divisors: independent,
        round_trips: trips,
        millis: None,
        pass,
        detail: (!pass).then(|| detail.join("; ")),
    })
}

/// Compare both sides for every suite entry; wall-clock is recorded only when `timings` is set.
pub fn verify_theorem(suite: &[SuiteEntry], desc: &RingDescriptor, bx: &ExpBox, timings: bool) -> Result<TheoremReport> {
    verify_theorem_with(suite, desc, bx, timings, None)
}

/// As `verify_theorem`, adding a sampled F-equivariance check on every solution block when `draw` is given.
pub fn verify_theorem_with(
    suite: &[SuiteEntry],
    desc: &RingDescriptor,
    bx: &ExpBox,
    timings: bool,
    mut draw: Option<&mut dyn FnMut(u64) -> u64>,
) -> Result<TheoremReport> {
    if !bx.meets_threshold(desc.p, desc.prec) {
        return Err(Error::Precondition(format!(
            "box (E={}, D={}) below threshold for p={}, N={}",
            bx.e, bx.d, desc.p, desc.prec
        )));
    }
    for e in suite {
        e.module.validate()?;
        if e.module.p != desc.p {
            return Err(Error::PrimeMismatch(e.module.p, desc.p));
        }
    }
    let mut out = Vec::with_capacity(suite.len());
    for e in suite {
        let t = Instant::now();
        let mut r = run_instance(e, desc, bx, &mut draw)?;
        if timings {
            r.millis = Some(t.elapsed().as_millis() as u64);
        }
        out.push(r);
    }
    Ok(TheoremReport::from_instances(out))
}
