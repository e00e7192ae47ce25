//! W(C♭)/p^N as series Σ a_α x^α with x^α a product of Teichmüller elements.

use super::{RingDescriptor, TiltPoly};
use crate::error::{Error, Result};
use crate::padic::{Modulus, MultiExp, MAX_MODULUS};
use std::collections::BTreeMap;
use std::fmt;

/// Largest precision whose modulus fits the residue representation.
pub fn max_prec(p: u32) -> u32 {
    let mut k = 0;
    let mut t: u64 = 1;
    while let Some(v) = t.checked_mul(p as u64).filter(|&v| v < MAX_MODULUS) {
        t = v;
        k += 1;
    }
    k
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WittSeries {
    pub desc: RingDescriptor,
    pub terms: BTreeMap<MultiExp, u64>,
    pub prec: u32,
}

impl WittSeries {
    pub fn zero(desc: RingDescriptor, prec: u32) -> Self {
        WittSeries { desc, terms: BTreeMap::new(), prec }
    }

    pub fn monomial(desc: RingDescriptor, alpha: MultiExp, c: i64, prec: u32) -> Result<Self> {
        let m = Modulus::new(desc.p, prec)?;
        let mut s = Self::zero(desc, prec);
        let v = m.reduce_i128(c as i128);
        if v != 0 {
            s.terms.insert(alpha, v);
        }
        Ok(s)
    }

    pub fn constant(desc: RingDescriptor, c: i64, prec: u32) -> Result<Self> {
        Self::monomial(desc, desc.zero_exp(), c, prec)
    }

    pub fn one(desc: RingDescriptor, prec: u32) -> Self {
        Self::constant(desc, 1, prec).unwrap()
    }

    pub fn from_terms(desc: RingDescriptor, terms: impl IntoIterator<Item = (MultiExp, i64)>, prec: u32) -> Result<Self> {
        let m = Modulus::new(desc.p, prec)?;
        let mut s = Self::zero(desc, prec);
        for (a, c) in terms {
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

    /// Reduce to a lower precision.
    pub fn reduce_prec(&self, prec: u32) -> Result<Self> {
        if prec > self.prec {
            return Err(Error::Precondition(format!("cannot raise precision {} to {prec}", self.prec)));
        }
        if prec == 0 {
            return Err(Error::PrecisionExhausted("precision 0".into()));
        }
        let m = Modulus::new(self.desc.p, prec)?;
        let terms = self.terms.iter().map(|(a, c)| (a.clone(), m.reduce(*c))).filter(|(_, c)| *c != 0).collect();
        Ok(WittSeries { desc: self.desc, terms, prec })
    }

    /// Reinterpret the residues at a higher precision (representatives in [0, p^prec)).
    pub fn lift_prec(&self, prec: u32) -> Result<Self> {
        Modulus::new(self.desc.p, prec)?;
        Ok(WittSeries { prec, ..self.clone() })
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
        WittSeries { terms: self.terms.iter().map(|(a, c)| (a.clone(), m.neg(*c))).collect(), ..self.clone() }
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: i64) -> Self {
        let m = self.modulus();
        let k = m.reduce_i128(k as i128);
        let terms = self.terms.iter().map(|(a, c)| (a.clone(), m.mul(*c, k))).filter(|(_, c)| *c != 0).collect();
        WittSeries { terms, ..self.clone() }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let (a, b) = self.meet(o)?;
        let m = a.modulus();
        let mut out: BTreeMap<MultiExp, u64> = BTreeMap::new();
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let t = out.entry(ea.add(eb)?).or_insert(0);
                *t = m.add(*t, m.mul(*ca, *cb));
            }
        }
        out.retain(|_, c| *c != 0);
        Ok(WittSeries { desc: a.desc, terms: out, prec: a.prec })
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

    /// F: a x^α ↦ a x^{pα}.
    pub fn frob(&self) -> Result<Self> {
        let terms = self.terms.iter().map(|(a, c)| Ok((a.scale_p(1)?, *c))).collect::<Result<_>>()?;
        Ok(WittSeries { terms, ..self.clone() })
    }

    pub fn frob_inv(&self) -> Result<Self> {
        let terms = self.terms.iter().map(|(a, c)| Ok((a.scale_p(-1)?, *c))).collect::<Result<_>>()?;
        Ok(WittSeries { terms, ..self.clone() })
    }

    /// V: a x^α ↦ p a x^{α/p}, precision up by one (capped).
    pub fn ver(&self) -> Result<Self> {
        let prec = (self.prec + 1).min(max_prec(self.desc.p));
        let m = Modulus::new(self.desc.p, prec)?;
        let terms = self
            .terms
            .iter()
            .map(|(a, c)| Ok((a.scale_p(-1)?, m.mul(*c, self.desc.p as u64))))
            .filter(|r| !matches!(r, Ok((_, 0))))
            .collect::<Result<_>>()?;
        Ok(WittSeries { desc: self.desc, terms, prec })
    }

    /// Minimum valuation of the coefficients; `prec` for zero.
    pub fn val(&self) -> u32 {
        let m = self.modulus();
        self.terms.values().map(|c| m.val(*c)).min().unwrap_or(self.prec)
    }

    /// Exact division by p, precision down by one.
    pub fn divide_by_p(&self) -> Result<Self> {
        if self.prec <= 1 {
            return Err(Error::PrecisionExhausted("division by p at precision 1".into()));
        }
        let p = self.desc.p as u64;
        if self.terms.values().any(|c| c % p != 0) {
            return Err(Error::NotDivisible("Witt series".into()));
        }
        let terms = self.terms.iter().map(|(a, c)| (a.clone(), c / p)).collect();
        Ok(WittSeries { desc: self.desc, terms, prec: self.prec - 1 })
    }

    /// Reduction mod p as an exact element of C♭.
    pub fn mod_p(&self) -> TiltPoly {
        let p = self.desc.p as u64;
        TiltPoly::from_terms(self.desc, self.terms.iter().map(|(a, c)| (a.clone(), (c % p) as u32)), None)
    }

    /// Coefficientwise integer lift of an element of C♭.
    pub fn lift(c: &TiltPoly, prec: u32) -> Result<Self> {
        Self::from_terms(c.desc, c.terms.iter().map(|(a, v)| (a.clone(), *v as i64)), prec)
    }

    /// Teichmüller lift [c] mod p^N as (lift of c^{p^{-(N-1)}})^{p^{N-1}}.
    pub fn teich(c: &TiltPoly, prec: u32) -> Result<Self> {
        if c.flat_prec.is_some_and(|r| r < prec) {
            return Err(Error::PrecisionExhausted(format!("♭-precision {:?} below {prec}", c.flat_prec)));
        }
        let root = c.retag(None).frob_inv_iter(prec - 1)?;
        Self::lift(&root, prec)?.pow((c.desc.p as u64).pow(prec - 1))
    }

    /// Digits (c_0, ..., c_{N-1}) with w = Σ V^m [c_m]; digits are exact elements of C♭.
    pub fn digit_extract(&self) -> Result<Vec<TiltPoly>> {
        let mut out = Vec::with_capacity(self.prec as usize);
        let mut w = self.clone();
        loop {
            let c = w.mod_p();
            out.push(c.clone());
            if w.prec == 1 {
                break;
            }
            let rest = w.sub(&Self::teich(&c, w.prec)?)?;
            w = rest.divide_by_p()?.frob()?;
        }
        Ok(out)
    }

    /// Σ V^m [c_m] at precision `prec`.
    pub fn from_digits(desc: RingDescriptor, digits: &[TiltPoly], prec: u32) -> Result<Self> {
        let mut acc = Self::zero(desc, prec);
        for (m, c) in digits.iter().enumerate().take(prec as usize) {
            let mut t = Self::teich(&c.retag(None), prec - m as u32)?;
            for _ in 0..m {
                t = t.ver()?;
            }
            acc = acc.add(&t.lift_prec(prec)?)?;
        }
        Ok(acc)
    }

    /// δ(b) = (F(b) − b^p)/p, consuming one digit of precision.
    pub fn delta(&self) -> Result<Self> {
        if self.prec < 2 {
            return Err(Error::PrecisionExhausted("δ needs precision at least 2".into()));
        }
        let d = self.frob()?.sub(&self.pow(self.desc.p as u64)?)?;
        d.divide_by_p().map_err(|e| match e {
            Error::NotDivisible(_) => panic!("F(b) - b^p not divisible by p"),
            e => e,
        })
    }
}

impl fmt::Display for WittSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 (mod {}^{})", self.desc.p, self.prec);
        }
        for (i, (a, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*x^{a}")?;
        }
        write!(f, " (mod {}^{})", self.desc.p, self.prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wittgen::WittVec;
    use proptest::prelude::*;

    fn d() -> RingDescriptor {
        RingDescriptor::new(2, 1, 0, 2).unwrap()
    }

    fn e(num: u64, den: u32) -> MultiExp {
        d().exp(&[(num, den)]).unwrap()
    }

    fn tp(v: &[(u64, u32)]) -> TiltPoly {
        TiltPoly::from_terms(d(), v.iter().map(|&(a, b)| (e(a, b), 1)), None)
    }

    fn ws(v: &[(u64, u32, i64)], prec: u32) -> WittSeries {
        WittSeries::from_terms(d(), v.iter().map(|&(a, b, c)| (e(a, b), c)), prec).unwrap()
    }

    #[test]
    fn teich_examples() {
        assert_eq!(WittSeries::teich(&tp(&[(1, 1)]), 3).unwrap(), ws(&[(1, 1, 1)], 3));
        let t = WittSeries::teich(&tp(&[(0, 0), (1, 2)]), 2).unwrap();
        assert_eq!(t, ws(&[(0, 0, 1), (1, 3, 2), (1, 2, 1)], 2));
        let t = WittSeries::teich(&tp(&[(0, 0), (1, 0)]), 2).unwrap();
        assert_eq!(t, ws(&[(0, 0, 1), (1, 1, 2), (1, 0, 1)], 2));
        assert!(WittSeries::teich(&tp(&[(1, 0)]).retag(Some(1)), 2).is_err());
    }

    #[test]
    fn frob_ver_examples() {
        assert_eq!(ws(&[(1, 1, 1)], 2).frob().unwrap(), ws(&[(1, 0, 1)], 2));
        let v = ws(&[(1, 0, 1)], 2).ver().unwrap();
        assert_eq!(v, ws(&[(1, 1, 2)], 3));
        assert_eq!(v.frob().unwrap(), ws(&[(1, 0, 2)], 3));
        let c = tp(&[(0, 0), (1, 0)]);
        let t = WittSeries::teich(&c, 2).unwrap();
        assert_eq!(t.mul(&t).unwrap(), WittSeries::teich(&c.mul(&c).unwrap(), 2).unwrap());
    }

    #[test]
    fn delta_examples() {
        let t = WittSeries::teich(&tp(&[(0, 0), (1, 1)]), 3).unwrap();
        assert!(t.delta().unwrap().is_zero());
        assert_eq!(ws(&[(1, 1, 2)], 3).delta().unwrap(), ws(&[(1, 0, -1)], 2));
        assert_eq!(ws(&[(0, 0, 1), (1, 0, 1)], 3).delta().unwrap(), ws(&[(1, 0, -1)], 2));
        assert!(ws(&[(1, 0, 1)], 1).delta().is_err());
    }

    #[test]
    fn digit_examples() {
        let dg = ws(&[(1, 1, 1), (1, 2, 2)], 2).digit_extract().unwrap();
        assert_eq!(dg, vec![tp(&[(1, 1)]), tp(&[(1, 1)])]);
        let c = tp(&[(0, 0), (3, 2)]);
        let dg = WittSeries::teich(&c, 3).unwrap().digit_extract().unwrap();
        assert_eq!(dg, vec![c, tp(&[]), tp(&[])]);
        let dg = ws(&[(0, 0, 2)], 2).digit_extract().unwrap();
        assert_eq!(dg, vec![tp(&[]), tp(&[(0, 0)])]);
    }

    fn tilt_strat() -> impl Strategy<Value = TiltPoly> {
        proptest::collection::vec((0u64..9, 0u32..3), 0..3).prop_map(|v| tp(&v))
    }

    fn digits_strat() -> impl Strategy<Value = Vec<TiltPoly>> {
        proptest::collection::vec(tilt_strat(), 3)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn digit_round_trip(dg in digits_strat(), n in 1u32..=3) {
            let w = WittSeries::from_digits(d(), &dg, n).unwrap();
            let back = w.digit_extract().unwrap();
            prop_assert_eq!(&back[..], &dg[..n as usize]);
        }

        #[test]
        fn agrees_with_structure_polys(a in digits_strat(), b in digits_strat(), n in 1u32..=3) {
            let wa = WittSeries::from_digits(d(), &a, n).unwrap();
            let wb = WittSeries::from_digits(d(), &b, n).unwrap();
            let red = |v: &[TiltPoly]| WittVec::new(2, v[..n as usize].iter().map(|c| c.reduce_flat(n).unwrap()).collect()).unwrap();
            let (va, vb) = (red(&a), red(&b));
            prop_assert_eq!(red(&wa.add(&wb).unwrap().digit_extract().unwrap()), va.add(&vb).unwrap());
            prop_assert_eq!(red(&wa.mul(&wb).unwrap().digit_extract().unwrap()), va.mul(&vb).unwrap());
        }

        #[test]
        fn teich_multiplicative_section(a in tilt_strat(), b in tilt_strat(), n in 1u32..=3) {
            let ta = WittSeries::teich(&a, n).unwrap();
            let tb = WittSeries::teich(&b, n).unwrap();
            prop_assert_eq!(ta.mul(&tb).unwrap(), WittSeries::teich(&a.mul(&b).unwrap(), n).unwrap());
            prop_assert_eq!(ta.mod_p(), a);
        }

        #[test]
        fn fv_vf_is_p(a in digits_strat()) {
            let w = WittSeries::from_digits(d(), &a, 2).unwrap();
            let p_w = w.lift_prec(3).unwrap().scale(2);
            prop_assert_eq!(w.ver().unwrap().frob().unwrap(), p_w.clone());
            prop_assert_eq!(w.frob().unwrap().ver().unwrap(), p_w);
        }
    }
}
