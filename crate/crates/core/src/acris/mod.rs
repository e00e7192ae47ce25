//! A_cris(C)/p^N in the divided-monomial basis M_α = x^α/(α!)_p.

use crate::error::{Error, Result};
use crate::padic::{fact_p, m_of, s_int, Modulus, MultiExp, Zmod};
use crate::perfring::{wc::wc_normal_form, RingDescriptor, TiltPoly, WCElement, WittSeries};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};

mod universal;

pub use universal::{
    alpha_n, base_change, base_change_bijection, extend_y, gamma_wc, teich_wc, universal_witt, universality_on_generators,
    UniversalityReport,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DividedSeries {
    pub desc: RingDescriptor,
    pub terms: BTreeMap<MultiExp, u64>,
    pub prec: u32,
}

/// A divided series certified to lie in I_cris.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IcrisWitness(DividedSeries);

impl IcrisWitness {
    pub fn new(z: DividedSeries) -> Result<Self> {
        if !z.icris_test() {
            return Err(Error::Precondition("element is not in I_cris".into()));
        }
        Ok(IcrisWitness(z))
    }

    pub fn get(&self) -> &DividedSeries {
        &self.0
    }
}

/// Unit part of j! modulo m.
pub fn fact_unit(j: u64, m: &Modulus) -> u64 {
    let p = m.p as u64;
    let mut r = 1 % m.m;
    for mut k in 2..=j {
        while k % p == 0 {
            k /= p;
        }
        r = m.mul(r, k);
    }
    r
}

/// p^e mod m, zero once e ≥ prec.
pub fn ppow_mod(e: u64, m: &Modulus) -> u64 {
    if e >= m.prec as u64 {
        0
    } else {
        (m.p as u64).pow(e as u32)
    }
}

impl DividedSeries {
    pub fn zero(desc: RingDescriptor, prec: u32) -> Self {
        DividedSeries { desc, terms: BTreeMap::new(), prec }
    }

    /// c · M_α.
    pub fn monomial(desc: RingDescriptor, alpha: MultiExp, c: i64, prec: u32) -> Result<Self> {
        Self::from_terms(desc, [(alpha, c)], prec)
    }

    pub fn constant(desc: RingDescriptor, c: i64, prec: u32) -> Result<Self> {
        Self::monomial(desc, desc.zero_exp(), c, prec)
    }

    pub fn one(desc: RingDescriptor, prec: u32) -> Self {
        Self::constant(desc, 1, prec).unwrap()
    }

    /// c · x^α = c p^{s(α)} M_α.
    pub fn x_power(desc: RingDescriptor, alpha: MultiExp, c: i64, prec: u32) -> Result<Self> {
        let m = Modulus::new(desc.p, prec)?;
        let v = m.mul(m.reduce_i128(c as i128), ppow_mod(fact_p(&alpha, desc.n), &m));
        let mut s = Self::zero(desc, prec);
        if v != 0 {
            s.terms.insert(alpha, v);
        }
        Ok(s)
    }

    pub fn from_terms(desc: RingDescriptor, terms: impl IntoIterator<Item = (MultiExp, i64)>, prec: u32) -> Result<Self> {
        let m = Modulus::new(desc.p, prec)?;
        let mut s = Self::zero(desc, prec);
        for (a, c) in terms {
            if a.len() != desc.nvars() {
                return Err(Error::LengthMismatch(a.len(), desc.nvars()));
            }
            let e = s.terms.entry(a).or_insert(0);
            *e = m.add(*e, m.reduce_i128(c as i128));
        }
        s.terms.retain(|_, c| *c != 0);
        Ok(s)
    }

    pub fn modulus(&self) -> Modulus {
        Modulus::new(self.desc.p, self.prec).unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, alpha: &MultiExp) -> u64 {
        self.terms.get(alpha).copied().unwrap_or(0)
    }

    fn s(&self, a: &MultiExp) -> u64 {
        fact_p(a, self.desc.n)
    }

    /// Whether all x-exponents are < 1.
    fn small(&self, a: &MultiExp) -> bool {
        !a.any_x_ge(self.desc.n, 0)
    }

    pub fn embed_witt(w: &WittSeries) -> Self {
        let m = w.modulus();
        let terms = w
            .terms
            .iter()
            .map(|(a, c)| (a.clone(), m.mul(*c, ppow_mod(fact_p(a, w.desc.n), &m))))
            .filter(|(_, c)| *c != 0)
            .collect();
        DividedSeries { desc: w.desc, terms, prec: w.prec }
    }

    pub fn reduce_prec(&self, prec: u32) -> Result<Self> {
        if prec > self.prec {
            return Err(Error::Precondition(format!("cannot raise precision {} to {prec}", self.prec)));
        }
        let m = Modulus::new(self.desc.p, prec)?;
        let terms = self.terms.iter().map(|(a, c)| (a.clone(), m.reduce(*c))).filter(|(_, c)| *c != 0).collect();
        Ok(DividedSeries { desc: self.desc, terms, prec })
    }

    /// Reinterpret representatives at a higher precision.
    pub fn lift_prec(&self, prec: u32) -> Result<Self> {
        Modulus::new(self.desc.p, prec)?;
        if prec < self.prec {
            return self.reduce_prec(prec);
        }
        Ok(DividedSeries { prec, ..self.clone() })
    }

    /// p·u at precision prec+1, exact.
    pub fn mul_p_raise(&self) -> Result<Self> {
        let m = Modulus::new(self.desc.p, self.prec + 1)?;
        let terms = self.terms.iter().map(|(a, c)| (a.clone(), m.mul(*c, self.desc.p as u64))).collect();
        Ok(DividedSeries { desc: self.desc, terms, prec: self.prec + 1 })
    }

    /// Exact division by p^k, precision down by k.
    pub fn divide_by_ppow(&self, k: u32) -> Result<Self> {
        if k >= self.prec {
            return Err(Error::PrecisionExhausted(format!("division by p^{k} at precision {}", self.prec)));
        }
        let q = (self.desc.p as u64).pow(k);
        if self.terms.values().any(|c| c % q != 0) {
            return Err(Error::NotDivisible("divided series".into()));
        }
        let terms = self.terms.iter().map(|(a, c)| (a.clone(), c / q)).collect();
        Ok(DividedSeries { desc: self.desc, terms, prec: self.prec - k })
    }

    fn meet(&self, o: &Self) -> Result<(Self, Self)> {
        self.desc.check(&o.desc)?;
        let k = self.prec.min(o.prec);
        Ok((self.reduce_prec(k)?, o.reduce_prec(k)?))
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let (mut a, b) = self.meet(o)?;
        let m = a.modulus();
        for (e, c) in b.terms {
            let t = a.terms.entry(e).or_insert(0);
            *t = m.add(*t, c);
        }
        a.terms.retain(|_, c| *c != 0);
        Ok(a)
    }

    pub fn neg(&self) -> Self {
        let m = self.modulus();
        DividedSeries { terms: self.terms.iter().map(|(a, c)| (a.clone(), m.neg(*c))).collect(), ..self.clone() }
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: i64) -> Self {
        let m = self.modulus();
        let k = m.reduce_i128(k as i128);
        let terms = self.terms.iter().map(|(a, c)| (a.clone(), m.mul(*c, k))).filter(|(_, c)| *c != 0).collect();
        DividedSeries { terms, ..self.clone() }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let (a, b) = self.meet(o)?;
        let m = a.modulus();
        let n = a.desc.n;
        let mut out: BTreeMap<MultiExp, u64> = BTreeMap::new();
        for (ea, ca) in &a.terms {
            let sa = fact_p(ea, n);
            for (eb, cb) in &b.terms {
                let g = ea.add(eb)?;
                let sg = fact_p(&g, n);
                let sb = fact_p(eb, n);
                assert!(sg >= sa + sb, "negative carry exponent");
                let f = ppow_mod(sg - sa - sb, &m);
                if f == 0 {
                    continue;
                }
                let t = out.entry(g).or_insert(0);
                *t = m.add(*t, m.mul(m.mul(*ca, *cb), f));
            }
        }
        out.retain(|_, c| *c != 0);
        Ok(DividedSeries { desc: a.desc, terms: out, prec: a.prec })
    }

    pub fn pow(&self, mut e: u64) -> Result<Self> {
        let mut r = Self::one(self.desc, self.prec);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b)?;
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b)?;
            }
        }
        Ok(r)
    }

    /// Image in C: terms with all x-exponents < 1, coefficients mod p.
    pub fn aug(&self) -> TiltPoly {
        let p = self.desc.p as u64;
        TiltPoly::from_terms(
            self.desc,
            self.terms.iter().filter(|(a, _)| self.small(a)).map(|(a, c)| (a.clone(), (c % p) as u32)),
            Some(0),
        )
    }

    /// Membership in I_cris: every small term has coefficient divisible by p.
    pub fn icris_test(&self) -> bool {
        let p = self.desc.p as u64;
        self.terms.iter().all(|(a, c)| !self.small(a) || c % p == 0)
    }

    /// F: a M_α ↦ a p^{σ(α)} M_{pα}.
    pub fn frob_f(&self) -> Result<Self> {
        let m = self.modulus();
        let mut terms = BTreeMap::new();
        for (a, c) in &self.terms {
            let v = m.mul(*c, ppow_mod(a.sigma(self.desc.n), &m));
            if v != 0 {
                terms.insert(a.scale_p(1)?, v);
            }
        }
        Ok(DividedSeries { desc: self.desc, terms, prec: self.prec })
    }

    /// Coefficients in the x^α/p^{m(α)} basis, when the element is in A′.
    pub fn aprime_tests(&self) -> AprimeReport {
        let m = self.modulus();
        let mut coords = Vec::new();
        let mut member = true;
        for (a, c) in &self.terms {
            let need = self.s(a) - m_of(a, self.desc.n) as u64;
            if (m.val(*c) as u64) < need {
                member = false;
                break;
            }
            let q = (self.desc.p as u64).pow(need as u32);
            coords.push((a.clone(), Zmod::new(c / q, self.desc.p, self.prec - need as u32).unwrap()));
        }
        AprimeReport { in_a_prime: member, in_a_dprime: member, coords: member.then_some(coords) }
    }

    /// β: drop terms with s(α) > 0 and take the W(C) normal form.
    pub fn beta(&self) -> WCElement {
        let terms = self.terms.iter().filter(|(a, _)| self.s(a) == 0).map(|(a, c)| (a.clone(), *c)).collect();
        wc_normal_form(&WittSeries { desc: self.desc, terms, prec: self.prec })
    }

    /// β_n: image in W_n(C).
    pub fn beta_n(&self, n: u32) -> Result<WCElement> {
        self.beta().reduce_prec(n.min(self.prec))
    }

    /// Drop terms outside a predicate (used for box truncation).
    pub fn retain(&self, f: impl Fn(&MultiExp) -> bool) -> Self {
        DividedSeries { terms: self.terms.iter().filter(|(a, _)| f(a)).map(|(a, c)| (a.clone(), *c)).collect(), ..self.clone() }
    }
}

/// Result of the A′/A″ membership test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AprimeReport {
    pub in_a_prime: bool,
    /// At finite support this coincides with `in_a_prime`.
    pub in_a_dprime: bool,
    pub coords: Option<Vec<(MultiExp, Zmod)>>,
}

impl fmt::Display for DividedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 (mod {}^{})", self.desc.p, self.prec);
        }
        for (i, (a, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*M{a}")?;
        }
        write!(f, " (mod {}^{})", self.desc.p, self.prec)
    }
}

/// γ_j of a single term c·M_α in I_cris, as (coefficient, exponent jα).
fn gamma_term(j: u64, alpha: &MultiExp, c: u64, desc: &RingDescriptor, m: &Modulus) -> Result<(u64, MultiExp)> {
    let n = desc.n;
    let ja = alpha.mul_int(j)?;
    let uinv = m.inv(fact_unit(j, m))?;
    let p = desc.p as u64;
    let (base, e) = if alpha.any_x_ge(n, 0) {
        let e = fact_p(&ja, n) as i64 - j as i64 * fact_p(alpha, n) as i64 - s_int(j, desc.p) as i64;
        assert!(e >= 0, "negative divided-power valuation");
        (c, e as u64)
    } else {
        debug_assert!(c.is_multiple_of(p));
        (c / p, j + fact_p(&ja, n) - s_int(j, desc.p))
    };
    Ok((m.mul(m.mul(m.pow(base, j), ppow_mod(e, m)), uinv), ja))
}

/// γ_m(z) by the composition rule over the terms of z.
pub fn gamma(m: u64, z: &IcrisWitness) -> Result<DividedSeries> {
    gamma_cancellable(m, z, &AtomicBool::new(false))
}

/// γ_m with a cooperative cancellation flag checked once per term.
pub fn gamma_cancellable(mdeg: u64, z: &IcrisWitness, cancel: &AtomicBool) -> Result<DividedSeries> {
    if mdeg == 0 {
        return Ok(DividedSeries::one(z.0.desc, z.0.prec));
    }
    let z = &z.0;
    let md = z.modulus();
    let mut g: Vec<DividedSeries> = (0..=mdeg)
        .map(|j| if j == 0 { DividedSeries::one(z.desc, z.prec) } else { DividedSeries::zero(z.desc, z.prec) })
        .collect();
    for (alpha, c) in &z.terms {
        if cancel.load(Ordering::Relaxed) {
            return Err(Error::Cancelled);
        }
        let gt: Vec<DividedSeries> = (0..=mdeg)
            .map(|j| {
                if j == 0 {
                    return Ok(DividedSeries::one(z.desc, z.prec));
                }
                let (v, ja) = gamma_term(j, alpha, *c, &z.desc, &md)?;
                DividedSeries::from_terms(z.desc, [(ja, v as i64)], z.prec)
            })
            .collect::<Result<_>>()?;
        let mut next = Vec::with_capacity(g.len());
        for j in 0..=mdeg as usize {
            let mut acc = DividedSeries::zero(z.desc, z.prec);
            for i in 0..=j {
                if g[i].is_zero() || gt[j - i].is_zero() {
                    continue;
                }
                acc = acc.add(&g[i].mul(&gt[j - i])?)?;
            }
            next.push(acc);
        }
        g = next;
    }
    Ok(g.pop().unwrap())
}

/// p^k · y^n / n!, lifting y by v_p(n!) digits when k does not absorb the denominator.
pub fn power_divide(y: &DividedSeries, n: u64, k: u64) -> Result<DividedSeries> {
    let v = s_int(n, y.desc.p);
    let md = y.modulus();
    let uinv = md.inv(fact_unit(n, &md))? as i64;
    if k >= v {
        let t = y.pow(n)?;
        let f = ppow_mod(k - v, &md) as i64;
        return Ok(t.scale(f).scale(uinv));
    }
    let hi = y.lift_prec(y.prec + v as u32)?;
    let t = hi.pow(n)?.scale(ppow_mod(k, &hi.modulus()) as i64);
    let t = t.divide_by_ppow(v as u32).map_err(|_| Error::NotDivisible("power is not divisible by n!".into()))?;
    Ok(t.scale(uinv))
}

/// γ_m(z) via z^m/m! at raised precision; an independent route to `gamma`.
pub fn gamma_via_power(m: u64, z: &IcrisWitness) -> Result<DividedSeries> {
    power_divide(&z.0, m, 0)
}

/// ψ(b) = (p−1)!·γ_p(b) + δ(b) for b ∈ Ker(W(C♭) → C); input precision N+1, output N.
pub fn psi(b: &WittSeries) -> Result<DividedSeries> {
    let eb = IcrisWitness::new(DividedSeries::embed_witt(b))?;
    let p = b.desc.p as u64;
    let n = b.prec - 1;
    let g = gamma(p, &eb)?.scale((1..p as i64).product()).reduce_prec(n)?;
    let d = DividedSeries::embed_witt(&b.delta()?);
    g.add(&d)
}

/// F′ on I_cris, termwise; output precision N−1.
pub fn fprime(z: &IcrisWitness) -> Result<DividedSeries> {
    let z = &z.0;
    if z.prec < 2 {
        return Err(Error::PrecisionExhausted("F′ at precision 1".into()));
    }
    let out = Modulus::new(z.desc.p, z.prec - 1)?;
    let p = z.desc.p as u64;
    let mut terms = BTreeMap::new();
    for (a, c) in &z.terms {
        let v = if z.small(a) {
            out.reduce(c / p)
        } else {
            out.mul(*c, ppow_mod(a.sigma(z.desc.n) - 1, &out))
        };
        if v != 0 {
            terms.insert(a.scale_p(1)?, v);
        }
    }
    Ok(DividedSeries { desc: z.desc, terms, prec: z.prec - 1 })
}

/// (F′)^n on Ker β_n; each step checks I_cris membership and costs one digit.
pub fn fprime_iter(n: u32, z: &DividedSeries) -> Result<DividedSeries> {
    if n as u64 > 0 && !z.beta_n(n)?.is_zero() {
        return Err(Error::Precondition(format!("β_{n}(z) ≠ 0")));
    }
    let mut u = z.clone();
    for _ in 0..n {
        u = fprime(&IcrisWitness::new(u)?)?;
    }
    Ok(u)
}

#[cfg(test)]
mod tests;
