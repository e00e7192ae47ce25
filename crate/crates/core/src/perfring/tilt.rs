//! Elements of the tilt C♭ = B[x^{1/p^∞}] modulo Ker ν_r.
//!
//! `flat_prec = Some(r)` stores a representative modulo Ker ν_r: monomials with some
//! x-exponent ≥ p^r are dropped. `Some(0)` is the ring C itself. `None` is exact.

use super::RingDescriptor;
use crate::error::{Error, Result};
use crate::padic::MultiExp;
use crate::wittgen::CoeffRing;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TiltPoly {
    pub desc: RingDescriptor,
    pub terms: BTreeMap<MultiExp, u32>,
    pub flat_prec: Option<u32>,
}

fn meet(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl TiltPoly {
    pub fn zero(desc: RingDescriptor, flat_prec: Option<u32>) -> Self {
        TiltPoly { desc, terms: BTreeMap::new(), flat_prec }
    }

    pub fn constant(desc: RingDescriptor, c: u32, flat_prec: Option<u32>) -> Self {
        Self::monomial(desc, desc.zero_exp(), c, flat_prec)
    }

    pub fn one(desc: RingDescriptor, flat_prec: Option<u32>) -> Self {
        Self::constant(desc, 1, flat_prec)
    }

    pub fn monomial(desc: RingDescriptor, alpha: MultiExp, c: u32, flat_prec: Option<u32>) -> Self {
        let mut t = Self::zero(desc, flat_prec);
        t.terms.insert(alpha, c);
        t.normalize()
    }

    pub fn from_terms(desc: RingDescriptor, terms: impl IntoIterator<Item = (MultiExp, u32)>, flat_prec: Option<u32>) -> Self {
        let mut t = Self::zero(desc, flat_prec);
        for (a, c) in terms {
            *t.terms.entry(a).or_insert(0) += c % desc.p;
        }
        t.normalize()
    }

    fn normalize(mut self) -> Self {
        let p = self.desc.p;
        let (n, r) = (self.desc.n, self.flat_prec);
        self.terms.retain(|a, c| {
            *c %= p;
            *c != 0 && !r.is_some_and(|r| a.any_x_ge(n, r as i32))
        });
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.flat_prec.is_none()
    }

    /// Reduce modulo Ker ν_r for r at most the current precision.
    pub fn reduce_flat(&self, r: u32) -> Result<Self> {
        if self.flat_prec.is_some_and(|s| s < r) {
            return Err(Error::Precondition(format!("cannot raise ♭-precision to {r}")));
        }
        Ok(TiltPoly { flat_prec: Some(r), ..self.clone() }.normalize())
    }

    /// Reinterpret with another ♭-precision tag, treating the representative as exact.
    pub fn retag(&self, r: Option<u32>) -> Self {
        TiltPoly { flat_prec: r, ..self.clone() }.normalize()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.desc.check(&o.desc)?;
        let mut t = TiltPoly { flat_prec: meet(self.flat_prec, o.flat_prec), ..self.clone() };
        for (a, c) in &o.terms {
            *t.terms.entry(a.clone()).or_insert(0) += c;
        }
        Ok(t.normalize())
    }

    pub fn neg(&self) -> Self {
        let p = self.desc.p;
        TiltPoly { terms: self.terms.iter().map(|(a, c)| (a.clone(), (p - c) % p)).collect(), ..self.clone() }.normalize()
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: u32) -> Self {
        let p = self.desc.p;
        TiltPoly { terms: self.terms.iter().map(|(a, c)| (a.clone(), c * (k % p) % p)).collect(), ..self.clone() }.normalize()
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.desc.check(&o.desc)?;
        let fp = meet(self.flat_prec, o.flat_prec);
        let (n, p) = (self.desc.n, self.desc.p);
        let mut out: BTreeMap<MultiExp, u32> = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                let s = a.add(b)?;
                if fp.is_some_and(|r| s.any_x_ge(n, r as i32)) {
                    continue;
                }
                let e = out.entry(s).or_insert(0);
                *e = (*e + ca * cb) % p;
            }
        }
        Ok(TiltPoly { desc: self.desc, terms: out, flat_prec: fp }.normalize())
    }

    pub fn pow_u(&self, mut e: u64) -> Result<Self> {
        let mut r = Self::one(self.desc, self.flat_prec);
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

    /// Frobenius: exponents times p, ♭-precision up by one.
    pub fn frob(&self) -> Result<Self> {
        let terms = self.terms.iter().map(|(a, c)| Ok((a.scale_p(1)?, *c))).collect::<Result<_>>()?;
        Ok(TiltPoly { desc: self.desc, terms, flat_prec: self.flat_prec.map(|r| r + 1) })
    }

    /// Inverse Frobenius: exponents divided by p, ♭-precision down by one.
    pub fn frob_inv(&self) -> Result<Self> {
        if self.flat_prec.is_some_and(|r| r <= 1) {
            return Err(Error::PrecisionExhausted("inverse Frobenius at ♭-precision 1".into()));
        }
        let terms = self.terms.iter().map(|(a, c)| Ok((a.scale_p(-1)?, *c))).collect::<Result<_>>()?;
        Ok(TiltPoly { desc: self.desc, terms, flat_prec: self.flat_prec.map(|r| r - 1) })
    }

    pub fn frob_inv_iter(&self, k: u32) -> Result<Self> {
        let mut c = self.clone();
        for _ in 0..k {
            c = c.frob_inv()?;
        }
        Ok(c)
    }

    /// Image in C: drop monomials with some x-exponent ≥ 1.
    pub fn aug_to_c(&self) -> Self {
        TiltPoly { flat_prec: Some(0), ..self.clone() }.normalize()
    }

    /// Membership in Ker ν_r: every monomial has some x-exponent ≥ p^r.
    pub fn ker_nu_r_test(&self, r: u32) -> bool {
        self.terms.keys().all(|a| a.any_x_ge(self.desc.n, r as i32))
    }
}

/// A count t such that any product of t elements of Ker(Fr^j) on C vanishes.
pub fn fr_kernel_nilpotency(desc: &RingDescriptor, j: u32) -> u64 {
    (desc.n as u64 * (desc.p as u64).pow(j)).max(1)
}

impl fmt::Display for TiltPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (a, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*x^{a}")?;
        }
        Ok(())
    }
}

impl CoeffRing for TiltPoly {
    fn zero_like(&self) -> Self {
        Self::zero(self.desc, self.flat_prec)
    }
    fn one_like(&self) -> Self {
        Self::one(self.desc, self.flat_prec)
    }
    fn add(&self, o: &Self) -> Self {
        TiltPoly::add(self, o).expect("descriptor mismatch")
    }
    fn mul(&self, o: &Self) -> Self {
        TiltPoly::mul(self, o).expect("descriptor mismatch")
    }
    fn neg(&self) -> Self {
        TiltPoly::neg(self)
    }
    fn from_bigint_like(&self, n: &BigInt) -> Self {
        let c = n.mod_floor(&BigInt::from(self.desc.p)).to_u32().unwrap();
        Self::constant(self.desc, c, self.flat_prec)
    }
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
    fn char_p(&self) -> Option<u32> {
        Some(self.desc.p)
    }
    fn pth_root(&self) -> Result<Self> {
        if !self.is_exact() {
            return Err(Error::Precondition("p-th root needs an exact element of a perfect ring".into()));
        }
        self.frob_inv()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d() -> RingDescriptor {
        RingDescriptor::new(2, 1, 0, 2).unwrap()
    }

    fn mono(num: u64, den: u32, fp: Option<u32>) -> TiltPoly {
        TiltPoly::monomial(d(), d().exp(&[(num, den)]).unwrap(), 1, fp)
    }

    #[test]
    fn ker_nu_examples() {
        let x3 = mono(3, 0, None);
        assert!(x3.ker_nu_r_test(1));
        assert!(!x3.ker_nu_r_test(2));
    }

    #[test]
    fn aug_example() {
        let c = mono(0, 0, None).add(&mono(1, 1, None)).unwrap().add(&mono(1, 0, None)).unwrap();
        let want = mono(0, 0, Some(0)).add(&mono(1, 1, Some(0))).unwrap();
        assert_eq!(c.aug_to_c(), want);
    }

    #[test]
    fn nilpotency_example() {
        assert_eq!(fr_kernel_nilpotency(&d(), 1), 2);
        let h = mono(1, 1, Some(0));
        assert!(h.mul(&h).unwrap().is_zero());
    }

    #[test]
    fn frob_ledger() {
        let c = mono(3, 2, Some(2));
        let f = c.frob().unwrap();
        assert_eq!(f.flat_prec, Some(3));
        assert_eq!(f.frob_inv().unwrap(), c);
        assert!(mono(1, 0, Some(1)).frob_inv().is_err());
    }

    fn tilt() -> impl Strategy<Value = TiltPoly> {
        proptest::collection::vec((0u64..16, 0u32..3), 0..4)
            .prop_map(|v| TiltPoly::from_terms(d(), v.into_iter().map(|(a, e)| (d().exp(&[(a, e)]).unwrap(), 1)), None))
    }

    proptest! {
        #[test]
        fn frob_bijective(c in tilt()) {
            prop_assert_eq!(c.frob().unwrap().frob_inv().unwrap(), c.clone());
            prop_assert_eq!(c.frob_inv().unwrap().frob().unwrap(), c);
        }

        #[test]
        fn ker_nu_multiplicative(a in 0u64..16, b in 0u64..16, r in 0u32..3, s in 0u32..3) {
            let (x, y) = (mono(a, 0, None), mono(b, 1, None));
            // Ker ν_r is an ideal and the filtration is decreasing
            if x.ker_nu_r_test(r) && y.ker_nu_r_test(s) {
                prop_assert!(x.mul(&y).unwrap().ker_nu_r_test(r.max(s)));
            }
            if x.ker_nu_r_test(r) {
                prop_assert!(x.mul(&y).unwrap().ker_nu_r_test(r));
            }
        }
    }
}
