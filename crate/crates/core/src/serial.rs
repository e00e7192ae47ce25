//! Canonical JSON for every value type: exponents as ["num", den_exp], coefficients as decimal strings.

use crate::acris::DividedSeries;
use crate::covec::{PFraction, VExpansion};
use crate::dieudonne::{ChainBlock, DieudonneModule, SolutionModule};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::padic::{MultiExp, PExp};
use crate::perfring::{wc::wc_normal_form, RingDescriptor, TiltPoly, WCElement, WittSeries};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub type WireExp = Vec<(String, u32)>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireDesc {
    pub p: u32,
    pub xvars: usize,
    pub yvars: usize,
    pub prec: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireTerm {
    pub exp: WireExp,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireDigit {
    pub index: i32,
    pub flat_prec: Option<u32>,
    pub terms: Vec<WireTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireBlock {
    pub anchor: Option<WireExp>,
    pub divisors: Vec<u32>,
    pub generators: Vec<Vec<Vec<WireTerm>>>,
    pub coords: Vec<(usize, WireExp)>,
    pub span: Vec<Vec<String>>,
    pub span_prec: u32,
}

/// The wire format; `kind` selects the variant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Wire {
    Tilt { descriptor: WireDesc, flat_prec: Option<u32>, terms: Vec<WireTerm> },
    WittSeries { descriptor: WireDesc, prec: u32, terms: Vec<WireTerm> },
    WcElement { descriptor: WireDesc, prec: u32, terms: Vec<WireTerm> },
    Divided { descriptor: WireDesc, prec: u32, terms: Vec<WireTerm> },
    VExpansion { descriptor: WireDesc, prec: u32, digits: Vec<WireDigit> },
    PFraction { descriptor: WireDesc, j: u32, prec: u32, terms: Vec<WireTerm> },
    DModule(DieudonneModule),
    Solution { descriptor: WireDesc, prec: u32, below_threshold: bool, blocks: Vec<WireBlock> },
}

/// A parsed value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Element {
    Tilt(TiltPoly),
    WittSeries(WittSeries),
    WcElement(WCElement),
    Divided(DividedSeries),
    VExpansion(VExpansion),
    PFraction(PFraction),
    DModule(DieudonneModule),
    Solution(SolutionModule<DividedSeries>),
}

impl Element {
    pub fn kind(&self) -> &'static str {
        match self {
            Element::Tilt(_) => "tilt",
            Element::WittSeries(_) => "wittseries",
            Element::WcElement(_) => "wcelement",
            Element::Divided(_) => "divided",
            Element::VExpansion(_) => "vexpansion",
            Element::PFraction(_) => "pfraction",
            Element::DModule(_) => "dmodule",
            Element::Solution(_) => "solution",
        }
    }
}

fn wire_desc(d: &RingDescriptor) -> WireDesc {
    WireDesc { p: d.p, xvars: d.n, yvars: d.m, prec: d.prec }
}

fn read_desc(w: &WireDesc) -> Result<RingDescriptor> {
    RingDescriptor::new(w.p, w.xvars, w.yvars, w.prec)
}

fn wire_exp(a: &MultiExp) -> WireExp {
    a.0.iter().map(|e| (e.num.to_string(), e.den)).collect()
}

fn read_exp(d: &RingDescriptor, e: &WireExp, at: &str) -> Result<MultiExp> {
    if e.len() != d.nvars() {
        return Err(Error::Invalid(format!("{at}: exponent has {} coordinates, expected {}", e.len(), d.nvars())));
    }
    let coords = e
        .iter()
        .map(|(num, den)| {
            let n: u64 = num.parse().map_err(|_| Error::Invalid(format!("{at}: bad exponent numerator {num:?}")))?;
            let x = PExp::new(n, *den, d.p).map_err(|err| Error::Invalid(format!("{at}: {err}")))?;
            if x.num != n || x.den != *den {
                return Err(Error::Invalid(format!("{at}: exponent {num}/p^{den} is not in lowest terms")));
            }
            Ok(x)
        })
        .collect::<Result<_>>()?;
    Ok(MultiExp(coords))
}

fn wire_terms<C: ToString>(t: &BTreeMap<MultiExp, C>) -> Vec<WireTerm> {
    t.iter().map(|(a, c)| WireTerm { exp: wire_exp(a), coeff: c.to_string() }).collect()
}

/// Terms with coefficients below `bound`, strictly increasing exponents.
fn read_terms(d: &RingDescriptor, ts: &[WireTerm], bound: u64, what: &str) -> Result<Vec<(MultiExp, u64)>> {
    let mut out: Vec<(MultiExp, u64)> = Vec::with_capacity(ts.len());
    for (i, t) in ts.iter().enumerate() {
        let at = format!("{what} term {i}");
        let a = read_exp(d, &t.exp, &at)?;
        let c: u64 = t.coeff.parse().map_err(|_| Error::Invalid(format!("{at}: bad coefficient {:?}", t.coeff)))?;
        if c == 0 || c >= bound {
            return Err(Error::Invalid(format!("{at}: coefficient {c} outside 1..{bound}")));
        }
        if out.last().is_some_and(|(b, _)| *b >= a) {
            return Err(Error::Invalid(format!("{at}: exponents not strictly increasing")));
        }
        out.push((a, c));
    }
    Ok(out)
}

fn signed(v: Vec<(MultiExp, u64)>) -> Vec<(MultiExp, i64)> {
    v.into_iter().map(|(a, c)| (a, c as i64)).collect()
}

fn canonical<T: PartialEq + std::fmt::Debug>(parsed: T, rebuilt: T, what: &str) -> Result<T> {
    if parsed != rebuilt {
        return Err(Error::Invalid(format!("{what} is not in canonical form")));
    }
    Ok(rebuilt)
}

fn read_tilt(d: &RingDescriptor, flat: Option<u32>, ts: &[WireTerm], what: &str) -> Result<TiltPoly> {
    let terms = read_terms(d, ts, d.p as u64, what)?;
    let raw: BTreeMap<MultiExp, u32> = terms.iter().map(|(a, c)| (a.clone(), *c as u32)).collect();
    let t = TiltPoly::from_terms(*d, terms.into_iter().map(|(a, c)| (a, c as u32)), flat);
    canonical(raw, t.terms.clone(), what)?;
    Ok(t)
}

fn read_witt(d: &RingDescriptor, prec: u32, ts: &[WireTerm], what: &str) -> Result<WittSeries> {
    let bound = crate::padic::ppow(d.p, prec)?;
    WittSeries::from_terms(*d, signed(read_terms(d, ts, bound, what)?), prec)
}

fn read_divided(d: &RingDescriptor, prec: u32, ts: &[WireTerm], what: &str) -> Result<DividedSeries> {
    let bound = crate::padic::ppow(d.p, prec)?;
    DividedSeries::from_terms(*d, signed(read_terms(d, ts, bound, what)?), prec)
}

fn wire_mat(m: &Mat) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
}

fn read_mat(m: &[Vec<String>], what: &str) -> Result<Mat> {
    m.iter()
        .map(|r| r.iter().map(|x| x.parse().map_err(|_| Error::Invalid(format!("{what}: bad entry {x:?}")))).collect())
        .collect()
}

pub fn to_wire(e: &Element) -> Wire {
    match e {
        Element::Tilt(t) => Wire::Tilt { descriptor: wire_desc(&t.desc), flat_prec: t.flat_prec, terms: wire_terms(&t.terms) },
        Element::WittSeries(w) => Wire::WittSeries { descriptor: wire_desc(&w.desc), prec: w.prec, terms: wire_terms(&w.terms) },
        Element::WcElement(w) => {
            Wire::WcElement { descriptor: wire_desc(&w.series.desc), prec: w.prec(), terms: wire_terms(&w.series.terms) }
        }
        Element::Divided(u) => Wire::Divided { descriptor: wire_desc(&u.desc), prec: u.prec, terms: wire_terms(&u.terms) },
        Element::VExpansion(v) => Wire::VExpansion {
            descriptor: wire_desc(&v.desc),
            prec: v.prec,
            digits: v
                .digits
                .iter()
                .map(|(&index, c)| WireDigit { index, flat_prec: c.flat_prec, terms: wire_terms(&c.terms) })
                .collect(),
        },
        Element::PFraction(f) => {
            Wire::PFraction { descriptor: wire_desc(&f.w.desc), j: f.j, prec: f.w.prec, terms: wire_terms(&f.w.terms) }
        }
        Element::DModule(m) => Wire::DModule(m.clone()),
        Element::Solution(s) => {
            let desc = s
                .blocks
                .iter()
                .flat_map(|b| b.generators.iter().flatten())
                .map(|u| u.desc)
                .next()
                .unwrap_or(RingDescriptor { p: 2, n: 0, m: 0, prec: s.prec });
            Wire::Solution {
                descriptor: wire_desc(&desc),
                prec: s.prec,
                below_threshold: s.below_threshold,
                blocks: s
                    .blocks
                    .iter()
                    .map(|b| WireBlock {
                        anchor: b.anchor.as_ref().map(wire_exp),
                        divisors: b.divisors.clone(),
                        generators: b.generators.iter().map(|g| g.iter().map(|u| wire_terms(&u.terms)).collect()).collect(),
                        coords: b.coords.iter().map(|(i, a)| (*i, wire_exp(a))).collect(),
                        span: wire_mat(&b.span),
                        span_prec: b.span_prec,
                    })
                    .collect(),
            }
        }
    }
}

pub fn from_wire(w: &Wire) -> Result<Element> {
    Ok(match w {
        Wire::Tilt { descriptor, flat_prec, terms } => {
            let d = read_desc(descriptor)?;
            Element::Tilt(read_tilt(&d, *flat_prec, terms, "tilt")?)
        }
        Wire::WittSeries { descriptor, prec, terms } => {
            let d = read_desc(descriptor)?;
            Element::WittSeries(read_witt(&d, *prec, terms, "wittseries")?)
        }
        Wire::WcElement { descriptor, prec, terms } => {
            let d = read_desc(descriptor)?;
            let w = read_witt(&d, *prec, terms, "wcelement")?;
            let nf = wc_normal_form(&w);
            Element::WcElement(canonical(w.terms.clone(), nf.series.terms.clone(), "wcelement").map(|_| nf)?)
        }
        Wire::Divided { descriptor, prec, terms } => {
            let d = read_desc(descriptor)?;
            Element::Divided(read_divided(&d, *prec, terms, "divided")?)
        }
        Wire::VExpansion { descriptor, prec, digits } => {
            let d = read_desc(descriptor)?;
            let mut ds = Vec::with_capacity(digits.len());
            for g in digits {
                ds.push((g.index, read_tilt(&d, g.flat_prec, &g.terms, &format!("digit {}", g.index))?));
            }
            let v = VExpansion::new(d, ds.clone(), *prec)?;
            let raw: BTreeMap<i32, TiltPoly> = ds.into_iter().collect();
            Element::VExpansion(canonical(raw, v.digits.clone(), "vexpansion").map(|_| v)?)
        }
        Wire::PFraction { descriptor, j, prec, terms } => {
            let d = read_desc(descriptor)?;
            if *prec <= *j {
                return Err(Error::Invalid(format!("pfraction precision {prec} must exceed j = {j}")));
            }
            Element::PFraction(PFraction { j: *j, w: read_witt(&d, *prec, terms, "pfraction")? })
        }
        Wire::DModule(m) => {
            m.validate()?;
            Element::DModule(m.clone())
        }
        Wire::Solution { descriptor, prec, below_threshold, blocks } => {
            let d = read_desc(descriptor)?;
            let blocks = blocks
                .iter()
                .enumerate()
                .map(|(k, b)| {
                    let at = format!("block {k}");
                    Ok(ChainBlock {
                        anchor: b.anchor.as_ref().map(|a| read_exp(&d, a, &at)).transpose()?,
                        generators: b
                            .generators
                            .iter()
                            .map(|g| g.iter().map(|ts| read_divided(&d, *prec, ts, &at)).collect())
                            .collect::<Result<_>>()?,
                        coords: b.coords.iter().map(|(i, a)| Ok((*i, read_exp(&d, a, &at)?))).collect::<Result<_>>()?,
                        span: read_mat(&b.span, &at)?,
                        span_prec: b.span_prec,
                        divisors: b.divisors.clone(),
                    })
                })
                .collect::<Result<_>>()?;
            Element::Solution(SolutionModule { prec: *prec, below_threshold: *below_threshold, blocks })
        }
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json(e: &Element) -> String {
    let mut s = serde_json::to_string_pretty(&to_wire(e)).expect("wire types serialize");
    s.push('\n');
    s
}

pub fn from_json(s: &str) -> Result<Element> {
    let w: Wire = serde_json::from_str(s).map_err(|e| Error::Invalid(format!("malformed input: {e}")))?;
    from_wire(&w)
}
