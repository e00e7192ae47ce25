//! W(C)/p^N as normal forms of Witt series.

use super::{RingDescriptor, WittSeries};
use crate::error::Result;
use crate::padic::{Modulus, MultiExp};
use crate::wittgen::CoeffRing;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use std::fmt;

/// A Witt series whose coefficient at α is reduced mod p^{min(N, t(α))}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WCElement {
    pub series: WittSeries,
}

/// Precision at which the coefficient of x^α lives in W(C)/p^N.
pub fn wc_coeff_prec(alpha: &MultiExp, desc: &RingDescriptor, prec: u32) -> u32 {
    alpha.t_of(desc.n).map_or(prec, |t| t.min(prec))
}

pub fn wc_normal_form(w: &WittSeries) -> WCElement {
    let p = w.desc.p;
    let mut s = w.clone();
    s.terms = w
        .terms
        .iter()
        .filter_map(|(a, c)| {
            let k = wc_coeff_prec(a, &w.desc, w.prec);
            let r = c % (p as u64).pow(k);
            (r != 0).then(|| (a.clone(), r))
        })
        .collect();
    WCElement { series: s }
}

impl WCElement {
    pub fn zero(desc: RingDescriptor, prec: u32) -> Self {
        WCElement { series: WittSeries::zero(desc, prec) }
    }

    pub fn one(desc: RingDescriptor, prec: u32) -> Self {
        wc_normal_form(&WittSeries::one(desc, prec))
    }

    pub fn desc(&self) -> RingDescriptor {
        self.series.desc
    }

    pub fn prec(&self) -> u32 {
        self.series.prec
    }

    pub fn is_zero(&self) -> bool {
        self.series.is_zero()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        Ok(wc_normal_form(&self.series.add(&o.series)?))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        Ok(wc_normal_form(&self.series.sub(&o.series)?))
    }

    pub fn neg(&self) -> Self {
        wc_normal_form(&self.series.neg())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        Ok(wc_normal_form(&self.series.mul(&o.series)?))
    }

    pub fn scale(&self, k: i64) -> Self {
        wc_normal_form(&self.series.scale(k))
    }

    pub fn frob(&self) -> Result<Self> {
        Ok(wc_normal_form(&self.series.frob()?))
    }

    /// V, keeping the precision (W(C)/p^N is W_N(C) for semiperfect C).
    pub fn ver(&self) -> Result<Self> {
        Ok(wc_normal_form(&self.series.ver()?.reduce_prec(self.prec())?))
    }

    /// Whether the element lies in V W(C): every normal-form coefficient is divisible by p.
    pub fn in_image_of_v(&self) -> bool {
        let p = self.desc().p as u64;
        self.series.terms.values().all(|c| c % p == 0)
    }

    /// V^{-1} on V W(C): F(w/p), precision down by one.
    pub fn ver_inv(&self) -> Result<Self> {
        if !self.in_image_of_v() {
            return Err(crate::error::Error::Precondition("element is not in V W(C)".into()));
        }
        if self.prec() == 1 {
            return Err(crate::error::Error::PrecisionExhausted("V^{-1} at precision 1".into()));
        }
        Ok(wc_normal_form(&self.series.divide_by_p()?.frob()?))
    }

    pub fn reduce_prec(&self, prec: u32) -> Result<Self> {
        Ok(wc_normal_form(&self.series.reduce_prec(prec)?))
    }

    /// Witt coordinates in W_N(C), as elements of C (♭-precision 0).
    pub fn coords(&self) -> Result<Vec<super::TiltPoly>> {
        Ok(self.series.digit_extract()?.into_iter().map(|c| c.aug_to_c()).collect())
    }
}

/// Image of w in W_r(C).
pub fn beta_r(w: &WittSeries, r: u32) -> Result<WCElement> {
    Ok(wc_normal_form(&w.reduce_prec(r.min(w.prec))?))
}

impl fmt::Display for WCElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.series)
    }
}

impl CoeffRing for WCElement {
    fn zero_like(&self) -> Self {
        WCElement::zero(self.desc(), self.prec())
    }
    fn one_like(&self) -> Self {
        WCElement::one(self.desc(), self.prec())
    }
    fn add(&self, o: &Self) -> Self {
        WCElement::add(self, o).expect("descriptor mismatch")
    }
    fn mul(&self, o: &Self) -> Self {
        WCElement::mul(self, o).expect("descriptor mismatch")
    }
    fn neg(&self) -> Self {
        WCElement::neg(self)
    }
    fn from_bigint_like(&self, n: &BigInt) -> Self {
        let m = Modulus::new(self.desc().p, self.prec()).unwrap();
        let c = n.mod_floor(&BigInt::from(m.m)).to_i64().unwrap();
        wc_normal_form(&WittSeries::constant(self.desc(), c, self.prec()).unwrap())
    }
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perfring::TiltPoly;
    use crate::wittgen::{quotient_kernel_generators, WittVec};
    use proptest::prelude::*;

    fn d() -> RingDescriptor {
        RingDescriptor::new(2, 1, 0, 2).unwrap()
    }

    fn ws(v: &[(u64, u32, i64)], prec: u32) -> WittSeries {
        WittSeries::from_terms(d(), v.iter().map(|&(a, b, c)| (d().exp(&[(a, b)]).unwrap(), c)), prec).unwrap()
    }

    #[test]
    fn normal_form_examples() {
        assert!(wc_normal_form(&ws(&[(1, 1, 2)], 2)).is_zero());
        assert_eq!(wc_normal_form(&ws(&[(1, 2, 2)], 2)).series, ws(&[(1, 2, 2)], 2));
        assert!(wc_normal_form(&ws(&[(3, 1, 1)], 2)).is_zero());
    }

    #[test]
    fn kernel_generators_vanish() {
        let x = TiltPoly::monomial(d(), d().unit_exp(0), 1, None);
        let zero = TiltPoly::zero(d(), None);
        for r in 1..=3u32 {
            let gens = quotient_kernel_generators(2, &[(x.clone(), zero.clone())], r as usize).unwrap();
            for g in gens {
                let w = WittSeries::from_digits(d(), &g.coords, r).unwrap();
                assert!(wc_normal_form(&w).is_zero());
            }
        }
    }

    /// Order exponent of x^γ in W(C)/p^N via the normal form.
    fn order(desc: RingDescriptor, g: &MultiExp, prec: u32) -> u32 {
        (0..=prec)
            .find(|&k| wc_normal_form(&WittSeries::monomial(desc, g.clone(), 2i64.pow(k), prec).unwrap()).is_zero())
            .unwrap()
    }

    #[test]
    fn tensor_product_length_count() {
        let d1 = d();
        let d2 = RingDescriptor::new(2, 2, 0, 2).unwrap();
        let bx = crate::perfring::ExpBox::new(2, 2).unwrap();
        let pts = bx.points(&d1);
        let mut lhs = 0;
        for a in &pts {
            for b in &pts {
                let ab = MultiExp(vec![a.0[0], b.0[0]]);
                // [x^a] ⊗ [y^b] ↦ [x^a y^b]
                let img = WittSeries::monomial(d2, ab.clone(), 1, 2).unwrap();
                let k = order(d1, a, 2).min(order(d1, b, 2));
                lhs += k;
                assert_eq!(order(d2, &ab, 2), k);
                assert_eq!(wc_normal_form(&img).is_zero(), k == 0);
            }
        }
        let rhs: u32 = crate::perfring::ExpBox::new(2, 2).unwrap().points(&d2).iter().map(|g| order(d2, g, 2)).sum();
        assert_eq!(lhs, rhs);
    }

    fn series_strat(n: u32) -> impl Strategy<Value = WittSeries> {
        proptest::collection::vec((0u64..12, 0u32..3, -8i64..8), 0..4).prop_map(move |v| ws(&v, n))
    }

    proptest! {
        #[test]
        fn congruence(a in series_strat(3), b in series_strat(3)) {
            let nf = |w: &WittSeries| wc_normal_form(w);
            prop_assert_eq!(nf(&a.mul(&b).unwrap()), nf(&nf(&a).series.mul(&nf(&b).series).unwrap()));
            prop_assert_eq!(nf(&a.add(&b).unwrap()), nf(&nf(&a).series.add(&nf(&b).series).unwrap()));
            prop_assert_eq!(nf(&nf(&a).series), nf(&a));
        }

        #[test]
        fn matches_witt_coords_over_c(a in series_strat(3), b in series_strat(3)) {
            // the digits of the normal form are the Witt coordinates of the image in W_3(C)
            let wa = wc_normal_form(&a);
            let wb = wc_normal_form(&b);
            let va = WittVec::new(2, wa.coords().unwrap()).unwrap();
            let vb = WittVec::new(2, wb.coords().unwrap()).unwrap();
            let direct = WittVec::new(2, a.digit_extract().unwrap().into_iter().map(|c| c.aug_to_c()).collect()).unwrap();
            prop_assert_eq!(&va, &direct);
            prop_assert_eq!(WittVec::new(2, wa.mul(&wb).unwrap().coords().unwrap()).unwrap(), va.mul(&vb).unwrap());
            prop_assert_eq!(WittVec::new(2, wa.add(&wb).unwrap().coords().unwrap()).unwrap(), va.add(&vb).unwrap());
        }
    }
}
