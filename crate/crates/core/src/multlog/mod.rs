//! The unit-group side: Artin–Hasse exponential, log of Teichmüller units and
//! its explicit inverse on A_cris^{F=p}.

use crate::acris::DividedSeries;
use crate::error::{Error, Result};
use crate::padic::{s_int, val_u64, Modulus, MultiExp, Zmod};
use crate::perfring::{ExpBox, RingDescriptor, TiltPoly, WittSeries};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// A truncated power series in one variable with coefficients mod p^prec.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntSeries {
    pub p: u32,
    pub prec: u32,
    /// coefficient of t^k at index k; length is the degree bound
    pub coeffs: Vec<u64>,
}

impl IntSeries {
    pub fn one(p: u32, prec: u32, d: usize) -> Result<Self> {
        let m = Modulus::new(p, prec)?;
        let mut coeffs = vec![0; d];
        if d > 0 {
            coeffs[0] = m.reduce(1);
        }
        Ok(IntSeries { p, prec, coeffs })
    }

    pub fn modulus(&self) -> Modulus {
        Modulus::new(self.p, self.prec).unwrap()
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len()
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.p != o.p {
            return Err(Error::PrimeMismatch(self.p, o.p));
        }
        let prec = self.prec.min(o.prec);
        let m = Modulus::new(self.p, prec)?;
        let d = self.coeffs.len().min(o.coeffs.len());
        let mut coeffs = vec![0; d];
        for (i, &a) in self.coeffs.iter().enumerate().take(d) {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate().take(d - i) {
                coeffs[i + j] = m.add(coeffs[i + j], m.mul(a, b));
            }
        }
        Ok(IntSeries { p: self.p, prec, coeffs })
    }

    /// y ↦ b·y^k substituted into the series, truncated at the same bound.
    pub fn substitute_monomial(&self, b: u64, k: usize) -> Self {
        let m = self.modulus();
        let mut coeffs = vec![0; self.coeffs.len()];
        let mut bp = m.reduce(1);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if i * k >= coeffs.len() {
                break;
            }
            coeffs[i * k] = m.mul(c, bp);
            bp = m.mul(bp, b);
        }
        IntSeries { coeffs, ..self.clone() }
    }

    pub fn reduce_prec(&self, prec: u32) -> Result<Self> {
        let m = Modulus::new(self.p, prec.min(self.prec))?;
        Ok(IntSeries { p: self.p, prec: m.prec, coeffs: self.coeffs.iter().map(|&c| m.reduce(c)).collect() })
    }
}

/// E_p(y) = exp(Σ y^{p^i}/p^i) mod (p^prec, y^d).
///
/// With f_n = n!·e_n the recursion n·e_n = Σ_i e_{n−p^i} becomes an integer one.
pub fn artin_hasse(p: u32, prec: u32, d: usize) -> Result<IntSeries> {
    let m = Modulus::new(p, prec)?;
    let mut f: Vec<BigInt> = Vec::with_capacity(d);
    let mut fact = BigInt::one();
    let mut coeffs = Vec::with_capacity(d);
    for n in 0..d {
        if n == 0 {
            f.push(BigInt::one());
        } else {
            let mut acc = BigInt::zero();
            let mut q = 1usize;
            while q <= n {
                // (n−1)!/(n−q)!
                let mut r = BigInt::one();
                for k in (n - q + 1)..n {
                    r *= k;
                }
                acc += r * &f[n - q];
                q *= p as usize;
            }
            f.push(acc);
            fact *= n;
        }
        let (num, den) = (&f[n], &fact);
        let g = num.gcd(den);
        let (num, den) = (num / &g, den / &g);
        let big_m = BigInt::from(m.m);
        if (&den % p).is_zero() {
            // denominators of E_p are prime to p
            return Err(Error::Verification(format!("E_{p} coefficient {n} is not p-integral")));
        }
        let num_r = num.mod_floor(&big_m).to_u64().unwrap();
        let den_r = den.mod_floor(&big_m).to_u64().unwrap();
        coeffs.push(m.mul(num_r, m.inv(den_r)?));
    }
    Ok(IntSeries { p, prec, coeffs })
}

/// Witt coordinates of a ∈ W(F_p)/p^N = Z/p^N: a = Σ p^i [b_i].
pub fn witt_digits(a: &Zmod) -> Vec<u64> {
    let p = a.p as u64;
    let mut out = Vec::new();
    let mut cur = *a;
    for _ in 0..a.prec {
        let b = cur.value % p;
        out.push(b);
        let m = cur.modulus();
        let t = m.pow(b, p.pow(cur.prec.saturating_sub(1)));
        let rest = m.sub(cur.value, t);
        if cur.prec == 1 {
            break;
        }
        cur = Zmod::new(rest / p, a.p, cur.prec - 1).unwrap();
    }
    out
}

/// f^a(t) = Π_i E_p(b_i t^{p^i}) over B = F_p, truncated at t^d.
pub fn witt_to_unit_series(a: &Zmod, d: usize) -> Result<IntSeries> {
    let e = artin_hasse(a.p, 1, d)?;
    let mut out = IntSeries::one(a.p, 1, d)?;
    let mut step = 1usize;
    for b in witt_digits(a) {
        if step >= d.max(1) {
            break;
        }
        if b != 0 {
            out = out.mul(&e.substitute_monomial(b, step))?;
        }
        step *= a.p as usize;
    }
    Ok(out)
}

/// A unit of C♭ congruent to 1 mod Ker ν₀.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitElement(TiltPoly);

impl UnitElement {
    pub fn new(c: TiltPoly) -> Result<Self> {
        if c.aug_to_c() != TiltPoly::one(c.desc, Some(0)) {
            return Err(Error::Precondition(format!("{c} is not 1 mod Ker ν_0")));
        }
        Ok(UnitElement(c))
    }

    pub fn one(desc: RingDescriptor, flat: Option<u32>) -> Self {
        UnitElement(TiltPoly::one(desc, flat))
    }

    pub fn get(&self) -> &TiltPoly {
        &self.0
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        Ok(UnitElement(self.0.mul(&o.0)?))
    }
}

/// Evaluate a series over F_p at c ∈ Ker ν₀, modulo Ker ν_r.
pub fn eval_series_tilt(s: &IntSeries, c: &TiltPoly, r: u32) -> Result<TiltPoly> {
    let p = c.desc.p;
    let c = c.retag(None);
    let mut acc = TiltPoly::zero(c.desc, None);
    let mut pw = TiltPoly::one(c.desc, None);
    for &k in &s.coeffs {
        if pw.is_zero() {
            break;
        }
        let k = (k % p as u64) as u32;
        if k != 0 {
            acc = acc.add(&pw.scale(k))?;
        }
        pw = pw.mul(&c)?.reduce_flat(r)?.retag(None);
    }
    acc.reduce_flat(r)
}

/// Truncation of E_p(c) to its class mod Ker ν_r.
pub fn artin_hasse_unit(c: &TiltPoly, r: u32) -> Result<UnitElement> {
    if !c.ker_nu_r_test(0) {
        return Err(Error::Precondition(format!("{c} is not in Ker ν_0")));
    }
    let d = (c.desc.p as usize).pow(r) + 1;
    UnitElement::new(eval_series_tilt(&artin_hasse(c.desc.p, 1, d)?, c, r)?)
}

fn has_positive_x(a: &MultiExp, n: usize) -> bool {
    a.0[..n].iter().any(|e| !e.is_zero())
}

const EXP_TERM_CAP: u64 = 4096;

/// exp(p·z) = Σ (p^k/k!) z^k for z supported on positive x-exponents.
pub fn exp_py(z: &DividedSeries) -> Result<DividedSeries> {
    let n = z.desc.n;
    if z.terms.keys().any(|a| !has_positive_x(a, n)) {
        return Err(Error::Precondition("exp(pz) needs z without x-free terms".into()));
    }
    let m = z.modulus();
    let p = z.desc.p as u64;
    let mut acc = DividedSeries::one(z.desc, z.prec);
    let mut pw = DividedSeries::one(z.desc, z.prec);
    let mut k = 0u64;
    loop {
        k += 1;
        if k > EXP_TERM_CAP {
            return Err(Error::ResourceLimit("exp(pz) did not terminate".into()));
        }
        pw = pw.mul(z)?;
        if pw.is_zero() {
            break;
        }
        // p^k/k! = p^{k − v(k!)} · unit(k!)^{-1}
        let e = k - s_int(k, z.desc.p);
        if e >= z.prec as u64 {
            continue;
        }
        let coef = m.mul(m.pow(p, e), m.inv(crate::acris::fact_unit(k, &m))?);
        acc = acc.add(&pw.scale(coef as i64))?;
    }
    Ok(acc)
}

/// Largest n whose term (n−1)!γ_n can survive mod p^prec.
pub fn log_cutoff(p: u32, prec: u32) -> u64 {
    let mut n = 1;
    while s_int(n, p) < prec as u64 {
        n += 1;
    }
    n
}

/// Internal precision used for log[c] at output precision `prec`.
pub fn log_reserve(p: u32, prec: u32) -> u32 {
    (1..=log_cutoff(p, prec)).map(|n| val_u64(n, p).unwrap_or(0)).max().unwrap_or(0)
}

/// log[c] = −Σ_{n≥1} (1−[c])^n/n at precision `prec`.
///
/// Only the class of c mod 1 + Ker ν_prec matters, so any lift is used for [c].
pub fn log_teich(c: &UnitElement, prec: u32) -> Result<DividedSeries> {
    let c = c.get();
    if c.flat_prec.is_some_and(|r| r < prec) {
        return Err(Error::PrecisionExhausted(format!("log needs ♭-precision {prec}, unit has {:?}", c.flat_prec)));
    }
    let p = c.desc.p;
    let work = prec + log_reserve(p, prec);
    let t = WittSeries::teich(&c.retag(None), work)?;
    let z = DividedSeries::one(c.desc, work).sub(&DividedSeries::embed_witt(&t))?;
    let mut acc = DividedSeries::zero(c.desc, prec);
    let mut pw = DividedSeries::one(c.desc, work);
    for n in 1..=log_cutoff(p, prec) {
        pw = pw.mul(&z)?;
        let v = val_u64(n, p).unwrap_or(0);
        let q = pw.divide_by_ppow(v)?.reduce_prec(prec)?;
        let m = q.modulus();
        let unit = m.inv(n / (p as u64).pow(v))?;
        acc = acc.sub(&q.scale(unit as i64))?;
    }
    if acc.frob_f()? != acc.scale(p as i64) {
        return Err(Error::Verification(format!("F(log[c]) ≠ p·log[c] for c = {c}")));
    }
    Ok(acc)
}

/// The explicit inverse: c = Π_{α ∈ S ∩ box} f^{a_α}(x^α) modulo Ker ν_prec.
pub fn solve_units(u: &DividedSeries, bx: &ExpBox) -> Result<UnitElement> {
    let desc = u.desc;
    let p = desc.p;
    if u.frob_f()? != u.scale(p as i64) {
        return Err(Error::Precondition("F(u) ≠ p·u".into()));
    }
    if !u.aprime_tests().in_a_prime {
        return Err(Error::Precondition("u has coefficients outside A′".into()));
    }
    let r = u.prec;
    let mut c = TiltPoly::one(desc, None);
    let bound = (p as usize).pow(r) + 1;
    for alpha in bx.annulus(&desc) {
        let a = u.coeff(&alpha);
        if a == 0 {
            continue;
        }
        let series = witt_to_unit_series(&Zmod::new(a, p, r)?, bound)?;
        let factor = eval_series_tilt(&series, &TiltPoly::monomial(desc, alpha, 1, None), r)?;
        c = c.mul(&factor.retag(None))?.reduce_flat(r)?.retag(None);
    }
    UnitElement::new(c.reduce_flat(r)?)
}

/// Intermediate witnesses of the injectivity argument for a unit with log[c] = 0.
#[derive(Clone, Debug)]
pub struct InjectivityCertificate {
    /// ([c]^p − 1)/p in A_cris
    pub first: DividedSeries,
    /// ([c]^{p²} − 1)/p² in A_cris
    pub second: DividedSeries,
    /// [c]^{p²} = 1 in W(C♭)/p^prec
    pub teich_power_is_one: bool,
    /// c^{p²} = 1 at ♭-precision prec + 2
    pub tilt_power_is_one: bool,
    /// c = 1 at ♭-precision prec, by perfectness
    pub unit_is_one: bool,
}

pub fn injectivity_certificate(c: &UnitElement, prec: u32) -> Result<InjectivityCertificate> {
    if !log_teich(c, prec)?.is_zero() {
        return Err(Error::Precondition("log[c] ≠ 0".into()));
    }
    let desc = c.get().desc;
    let p = desc.p;
    let work = prec + 2;
    // canonical representative of the class mod Ker ν_prec
    let lifted = c.get().reduce_flat(prec)?.retag(None);
    let t = WittSeries::teich(&lifted, work)?;
    let one = WittSeries::one(desc, work);
    let step = |e: u64, k: u32| -> Result<DividedSeries> {
        DividedSeries::embed_witt(&t.pow(e)?.sub(&one)?).divide_by_ppow(k).map_err(|_| {
            Error::Verification(format!("[c]^{e} − 1 is not divisible by p^{k}"))
        })
    };
    let first = step(p as u64, 1)?;
    let second = step((p * p) as u64, 2)?;
    let tp = t.reduce_prec(prec)?.pow((p * p) as u64)?;
    let teich_power_is_one = tp == WittSeries::one(desc, prec);
    let cp = lifted.frob()?.frob()?.reduce_flat(prec + 2)?;
    let tilt_power_is_one = cp == TiltPoly::one(desc, Some(prec + 2));
    let back = cp.frob_inv()?.frob_inv()?;
    let unit_is_one = back == TiltPoly::one(desc, Some(prec));
    if !(teich_power_is_one && tilt_power_is_one && unit_is_one) {
        return Err(Error::Verification(format!("injectivity chain fails for {}", c.get())));
    }
    Ok(InjectivityCertificate { first, second, teich_power_is_one, tilt_power_is_one, unit_is_one })
}

/// S-coefficients of u (the free parameters of A_cris^{F=p}) on the box.
pub fn annulus_coefficients(u: &DividedSeries, bx: &ExpBox) -> BTreeMap<MultiExp, u64> {
    bx.annulus(&u.desc).into_iter().map(|a| (a.clone(), u.coeff(&a))).filter(|(_, c)| *c != 0).collect()
}
