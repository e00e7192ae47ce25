//! Integer polynomials and the Witt structure polynomials.

use super::ring::CoeffRing;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

/// Sparse monomial: sorted (variable, exponent) pairs.
pub type Mono = Vec<(u16, u32)>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntPoly {
    pub terms: BTreeMap<Mono, BigInt>,
}

/// Term bound for structure-polynomial generation.
pub const TERM_BOUND: usize = 400_000;

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl IntPoly {
    pub fn var(v: u16) -> Self {
        Self::monomial(vec![(v, 1)], BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::monomial(vec![], c)
    }

    pub fn monomial(mut m: Mono, c: BigInt) -> Self {
        m.sort();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        IntPoly { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &IntPoly) -> IntPoly {
        let mut terms = self.terms.clone();
        for (m, c) in &o.terms {
            let e = terms.entry(m.clone()).or_insert_with(BigInt::zero);
            *e += c;
            if e.is_zero() {
                terms.remove(m);
            }
        }
        IntPoly { terms }
    }

    pub fn scale(&self, k: &BigInt) -> IntPoly {
        if k.is_zero() {
            return IntPoly::default();
        }
        IntPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn sub(&self, o: &IntPoly) -> IntPoly {
        self.add(&o.scale(&BigInt::from(-1)))
    }

    pub fn mul(&self, o: &IntPoly) -> Result<IntPoly> {
        let mut acc: HashMap<Mono, BigInt> = HashMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                *acc.entry(mono_mul(ma, mb)).or_insert_with(BigInt::zero) += ca * cb;
            }
            if acc.len() > TERM_BOUND {
                return Err(Error::ResourceLimit(format!("polynomial exceeds {TERM_BOUND} terms")));
            }
        }
        Ok(IntPoly { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() })
    }

    pub fn pow(&self, e: u64) -> Result<IntPoly> {
        let mut r = IntPoly::constant(BigInt::one());
        for _ in 0..e {
            r = r.mul(self)?;
        }
        Ok(r)
    }

    /// Exact division by an integer; an inexact division is an internal error.
    pub fn div_exact(&self, d: &BigInt) -> IntPoly {
        IntPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let (q, r) = c.div_rem(d);
                    assert!(r.is_zero(), "inexact division in ghost recursion");
                    (m.clone(), q)
                })
                .collect(),
        }
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_default()
    }

    /// Evaluate at ring elements; `vars[v]` is the value of variable v.
    pub fn eval<R: CoeffRing>(&self, vars: &[R], like: &R) -> R {
        let mut cache: HashMap<(u16, u32), R> = HashMap::new();
        let mut acc = like.zero_like();
        for (m, c) in &self.terms {
            let cr = like.from_bigint_like(c);
            if cr.vanishes() {
                continue;
            }
            let mut t = cr;
            for &(v, e) in m {
                let pw = cache.entry((v, e)).or_insert_with(|| vars[v as usize].pow(e as u64));
                t = t.mul(pw);
            }
            acc = acc.add(&t);
        }
        acc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolyKind {
    Sum,
    Prod,
    Neg,
    Frob,
}

/// Variable index of a_k.
pub fn va(k: usize) -> u16 {
    (2 * k) as u16
}

/// Variable index of b_k.
pub fn vb(k: usize) -> u16 {
    (2 * k + 1) as u16
}

/// w_i over variables chosen by `var`.
fn ghost_poly(p: u32, i: usize, var: fn(usize) -> u16) -> Result<IntPoly> {
    let mut w = IntPoly::default();
    for j in 0..=i {
        let t = IntPoly::monomial(vec![(var(j), p.pow((i - j) as u32))], BigInt::from(p).pow(j as u32));
        w = w.add(&t);
    }
    Ok(w)
}

type Cache = RwLock<HashMap<(u32, usize, PolyKind), Arc<IntPoly>>>;

fn cache() -> &'static Cache {
    static C: OnceLock<Cache> = OnceLock::new();
    C.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Structure polynomial of the given kind at index i, cached per (p, i, kind).
pub fn structure_poly(p: u32, i: usize, kind: PolyKind) -> Result<Arc<IntPoly>> {
    if let Some(v) = cache().read().unwrap().get(&(p, i, kind)) {
        return Ok(v.clone());
    }
    let target = match kind {
        PolyKind::Sum => ghost_poly(p, i, va)?.add(&ghost_poly(p, i, vb)?),
        PolyKind::Prod => ghost_poly(p, i, va)?.mul(&ghost_poly(p, i, vb)?)?,
        PolyKind::Neg => ghost_poly(p, i, va)?.scale(&BigInt::from(-1)),
        PolyKind::Frob => ghost_poly(p, i + 1, va)?,
    };
    let mut rest = target;
    for j in 0..i {
        let sj = structure_poly(p, j, kind)?;
        let pw = sj.pow((p as u64).pow((i - j) as u32))?;
        rest = rest.sub(&pw.scale(&BigInt::from(p).pow(j as u32)));
    }
    let poly = Arc::new(rest.div_exact(&BigInt::from(p).pow(i as u32)));
    // racing initializers compute equal values
    cache().write().unwrap().entry((p, i, kind)).or_insert_with(|| poly.clone());
    Ok(poly)
}

/// S_i and P_i for (p, i).
pub struct WittStructurePolys {
    pub p: u32,
    pub i: usize,
    pub sum: Arc<IntPoly>,
    pub prod: Arc<IntPoly>,
}

pub fn gen_structure_polys(p: u32, i: usize) -> Result<WittStructurePolys> {
    Ok(WittStructurePolys { p, i, sum: structure_poly(p, i, PolyKind::Sum)?, prod: structure_poly(p, i, PolyKind::Prod)? })
}
