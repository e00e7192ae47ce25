//! Fontaine's module M(C) at finite support: digit expansions Σ V^m [x_m] and fractions p^{-j} w.

use crate::acris::DividedSeries;
use crate::error::{Error, Result};
use crate::padic::{fact_p, m_of, MultiExp};
use crate::perfring::{wc::wc_normal_form, ExpBox, RingDescriptor, TiltPoly, WCElement, WittSeries};
use std::collections::BTreeMap;
use std::fmt;

/// Σ_m V^m [c_m] modulo p^N. Digit m is stored modulo Ker ν_N (m < 0) or Ker ν_{N-m} (0 ≤ m < N).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VExpansion {
    pub desc: RingDescriptor,
    pub digits: BTreeMap<i32, TiltPoly>,
    pub prec: u32,
}

/// p^{-j} w with w at precision N + j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PFraction {
    pub j: u32,
    pub w: WittSeries,
}

/// ♭-precision at which digit m is significant modulo p^N; `None` when it is not.
pub fn digit_flat_prec(m: i32, prec: u32) -> Option<u32> {
    if m < 0 || (m as u32) < prec {
        Some(prec)
    } else {
        None
    }
}

impl VExpansion {
    pub fn zero(desc: RingDescriptor, prec: u32) -> Self {
        VExpansion { desc, digits: BTreeMap::new(), prec }
    }

    /// Build from digits, checking the Ker ν_0 constraint and truncating canonically.
    pub fn new(desc: RingDescriptor, digits: impl IntoIterator<Item = (i32, TiltPoly)>, prec: u32) -> Result<Self> {
        if prec == 0 {
            return Err(Error::Invalid("precision must be at least 1".into()));
        }
        let mut out = BTreeMap::new();
        for (m, c) in digits {
            desc.check(&c.desc)?;
            if m < 0 && !c.ker_nu_r_test(0) {
                return Err(Error::Precondition(format!("digit {m} is not in Ker ν_0")));
            }
            let Some(r) = digit_flat_prec(m, prec) else { continue };
            let c = c.reduce_flat(r)?;
            if !c.is_zero() {
                out.insert(m, c);
            }
        }
        Ok(VExpansion { desc, digits: out, prec })
    }

    /// [c] as a single digit at index 0.
    pub fn teich(c: &TiltPoly, prec: u32) -> Result<Self> {
        Self::new(c.desc, [(0, c.clone())], prec)
    }

    /// V^m [c].
    pub fn single(m: i32, c: &TiltPoly, prec: u32) -> Result<Self> {
        Self::new(c.desc, [(m, c.clone())], prec)
    }

    pub fn from_witt(w: &WittSeries) -> Result<Self> {
        Self::new(w.desc, w.digit_extract()?.into_iter().enumerate().map(|(m, c)| (m as i32, c)), w.prec)
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn digit(&self, m: i32) -> TiltPoly {
        self.digits.get(&m).cloned().unwrap_or_else(|| TiltPoly::zero(self.desc, digit_flat_prec(m, self.prec)))
    }

    /// Depth j of the most negative nonzero digit.
    pub fn depth(&self) -> u32 {
        self.digits.keys().next().map_or(0, |&m| if m < 0 { (-m) as u32 } else { 0 })
    }

    /// Re-read the same digits at a different precision (representatives kept).
    pub fn with_prec(&self, prec: u32) -> Result<Self> {
        Self::new(self.desc, self.digits.iter().map(|(m, c)| (*m, c.retag(None))), prec)
    }

    pub fn to_fraction(&self) -> Result<PFraction> {
        let j = self.depth();
        let n = self.prec;
        let top = n + j;
        let mut w = WittSeries::zero(self.desc, top);
        for (&m, c) in &self.digits {
            let t = if m < 0 {
                let l = (-m) as u32;
                let mut f = c.clone();
                for _ in 0..l {
                    f = f.frob()?;
                }
                WittSeries::teich(&f, n + l)?.lift_prec(top)?.scale((self.desc.p as i64).pow(j - l))
            } else {
                let mut t = WittSeries::teich(c, n - m as u32)?;
                for _ in 0..m {
                    t = t.ver()?;
                }
                t.lift_prec(top)?.scale((self.desc.p as i64).pow(j))
            };
            w = w.add(&t)?;
        }
        Ok(PFraction { j, w })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.to_fraction()?.add(&o.to_fraction()?)?.to_expansion()
    }

    pub fn neg(&self) -> Result<Self> {
        let f = self.to_fraction()?;
        PFraction { j: f.j, w: f.w.neg() }.to_expansion()
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg()?)
    }

    /// W(C♭)-action: p^{-j} w ↦ p^{-j}(u·w).
    pub fn scalar_mul(&self, u: &WittSeries) -> Result<Self> {
        let f = self.to_fraction()?;
        let u = u.lift_prec(u.prec.max(f.w.prec))?;
        PFraction { j: f.j, w: u.mul(&f.w)? }.to_expansion_at(self.prec.min(u.prec))
    }

    pub fn scale(&self, k: i64) -> Result<Self> {
        let f = self.to_fraction()?;
        PFraction { j: f.j, w: f.w.scale(k) }.to_expansion()
    }

    /// F: digits c_m ↦ c_m^p.
    pub fn frob(&self) -> Result<Self> {
        let f = self.to_fraction()?;
        PFraction { j: f.j, w: f.w.frob()? }.to_expansion()
    }

    /// V: digit index shift by one; precision is kept.
    pub fn ver(&self) -> Result<Self> {
        Self::new(self.desc, self.digits.iter().map(|(m, c)| (m + 1, c.retag(None))), self.prec)
    }

    /// Σ_{m ≥ 0} V^m [ν_0(c_m)] in W(C).
    pub fn canonical_epi(&self) -> Result<WCElement> {
        let n = self.prec;
        let mut w = WittSeries::zero(self.desc, n);
        for (&m, c) in self.digits.range(0..) {
            let mut t = WittSeries::teich(c, n - m as u32)?;
            for _ in 0..m {
                t = t.ver()?;
            }
            w = w.add(&t)?;
        }
        Ok(wc_normal_form(&w))
    }

    /// Membership in p^r M(C).
    pub fn p_power_membership(&self, r: u32) -> bool {
        // V^m[c] = p^m[c^{p^{-m}}], so every digit below r must lie in Ker ν_r
        self.digits.iter().all(|(&m, c)| m >= 0 && m as u32 >= r || c.ker_nu_r_test(r))
    }
}

impl PFraction {
    pub fn prec(&self) -> u32 {
        self.w.prec - self.j
    }

    fn raise(&self, j: u32) -> Result<WittSeries> {
        let k = j - self.j;
        Ok(self.w.lift_prec(self.w.prec + k)?.scale((self.w.desc.p as i64).pow(k)))
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let j = self.j.max(o.j);
        let w = self.raise(j)?.add(&o.raise(j)?)?;
        Ok(PFraction { j, w })
    }

    /// Membership in M_0(C): β_j(F^{-j} w) = 0.
    pub fn in_m0(&self) -> Result<bool> {
        if self.j == 0 {
            return Ok(true);
        }
        let mut v = self.w.clone();
        for _ in 0..self.j {
            v = v.frob_inv()?;
        }
        Ok(crate::perfring::wc::beta_r(&v, self.j)?.is_zero())
    }

    pub fn to_expansion(&self) -> Result<VExpansion> {
        self.to_expansion_at(self.prec())
    }

    fn to_expansion_at(&self, prec: u32) -> Result<VExpansion> {
        if !self.in_m0()? {
            return Err(Error::Precondition("fraction is not in M_0(C)".into()));
        }
        let w = self.w.reduce_prec(prec + self.j)?;
        let digits = w.digit_extract()?;
        let mut out = Vec::with_capacity(digits.len());
        for (k, d) in digits.into_iter().enumerate() {
            out.push((k as i32 - self.j as i32, d.frob_inv_iter(self.j)?));
        }
        VExpansion::new(self.w.desc, out, prec)
    }

    /// f on fraction form: embed(w)/p^j.
    pub fn f_map(&self) -> Result<DividedSeries> {
        DividedSeries::embed_witt(&self.w).divide_by_ppow(self.j)
    }
}

/// The map f: M(C) → A_cris(C).
pub fn f_map(x: &VExpansion) -> Result<DividedSeries> {
    x.to_fraction()?.f_map()
}

/// Largest s(α) − m(α) over the box.
pub fn aprime_excess(desc: &RingDescriptor, bx: &ExpBox) -> u32 {
    bx.points(desc).iter().map(|a| (fact_p(a, desc.n) - m_of(a, desc.n) as u64) as u32).max().unwrap_or(0)
}

/// Inverse of f on the A″ box. Output precision is N − max_box(s − m).
pub fn f_inverse(u: &DividedSeries, bx: &ExpBox) -> Result<VExpansion> {
    let desc = u.desc;
    if let Some(a) = u.terms.keys().find(|a| !bx.contains(a, &desc)) {
        return Err(Error::Precondition(format!("exponent {a} outside the box")));
    }
    let excess = aprime_excess(&desc, bx);
    if u.prec <= excess {
        return Err(Error::PrecisionExhausted(format!("f_inverse needs precision above {excess}")));
    }
    let out = u.prec - excess;
    let rep = u.aprime_tests();
    let coords = rep.coords.ok_or_else(|| Error::Precondition("element is not in A″".into()))?;
    let j = coords.iter().map(|(a, _)| m_of(a, desc.n)).max().unwrap_or(0);
    let p = desc.p as i64;
    let terms = coords.iter().map(|(a, b)| (a.clone(), b.value as i64 * p.pow(j - m_of(a, desc.n))));
    let w = WittSeries::from_terms(desc, terms.collect::<Vec<_>>(), out + j)?;
    PFraction { j, w }.to_expansion()
}

/// Graded piece i of C♭ ↦ M(C)/p: c ↦ [c] (i = 0) or V^{-i}[c^{p^{-i}}].
pub fn graded_iso(i: u32, c: &TiltPoly) -> Result<VExpansion> {
    if i > 0 && (!c.ker_nu_r_test(i) || c.ker_nu_r_test(i + 1)) {
        return Err(Error::Precondition(format!("element is not in graded piece {i}")));
    }
    if i == 0 {
        return VExpansion::teich(c, 1);
    }
    VExpansion::single(-(i as i32), &c.retag(None).frob_inv_iter(i)?, 1)
}

impl fmt::Display for VExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.digits.is_empty() {
            return write!(f, "0 (mod {}^{})", self.desc.p, self.prec);
        }
        for (i, (m, c)) in self.digits.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "V^{m}[{c}]")?;
        }
        write!(f, " (mod {}^{})", self.desc.p, self.prec)
    }
}

/// Exponent helper used by callers building monomial digits.
pub fn mono(desc: RingDescriptor, alpha: MultiExp) -> TiltPoly {
    TiltPoly::monomial(desc, alpha, 1, None)
}
