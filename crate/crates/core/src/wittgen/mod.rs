//! Truncated p-typical Witt vectors over a pluggable coefficient ring.
//!
//! Length r means coordinates a_0..a_{r-1}.

pub mod poly;
pub mod ring;

pub use poly::{gen_structure_polys, structure_poly, IntPoly, PolyKind, WittStructurePolys};
pub use ring::CoeffRing;

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq)]
pub struct WittVec<R> {
    pub p: u32,
    pub coords: Vec<R>,
}

impl<R: CoeffRing> WittVec<R> {
    pub fn new(p: u32, coords: Vec<R>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Invalid("Witt vector of length 0".into()));
        }
        Ok(WittVec { p, coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    fn like(&self) -> &R {
        &self.coords[0]
    }

    pub fn zero(p: u32, like: &R, len: usize) -> Self {
        WittVec { p, coords: vec![like.zero_like(); len] }
    }

    pub fn one(p: u32, like: &R, len: usize) -> Self {
        Self::teich(p, &like.one_like(), len)
    }

    /// [a] = (a, 0, ..., 0).
    pub fn teich(p: u32, a: &R, len: usize) -> Self {
        let mut coords = vec![a.zero_like(); len];
        coords[0] = a.clone();
        WittVec { p, coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.vanishes())
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.p != o.p {
            return Err(Error::PrimeMismatch(self.p, o.p));
        }
        if self.len() != o.len() {
            return Err(Error::LengthMismatch(self.len(), o.len()));
        }
        Ok(())
    }

    fn binop(&self, o: &Self, kind: PolyKind) -> Result<Self> {
        self.check(o)?;
        let mut vars = Vec::with_capacity(2 * self.len());
        for (a, b) in self.coords.iter().zip(&o.coords) {
            vars.push(a.clone());
            vars.push(b.clone());
        }
        let coords = (0..self.len())
            .map(|i| Ok(structure_poly(self.p, i, kind)?.eval(&vars, self.like())))
            .collect::<Result<_>>()?;
        Ok(WittVec { p: self.p, coords })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.binop(o, PolyKind::Sum)
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.binop(o, PolyKind::Prod)
    }

    pub fn neg(&self) -> Result<Self> {
        if self.p != 2 {
            return Ok(WittVec { p: self.p, coords: self.coords.iter().map(|c| c.neg()).collect() });
        }
        let vars = self.interleave_a();
        let coords = (0..self.len())
            .map(|i| Ok(structure_poly(self.p, i, PolyKind::Neg)?.eval(&vars, self.like())))
            .collect::<Result<_>>()?;
        Ok(WittVec { p: self.p, coords })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg()?)
    }

    fn interleave_a(&self) -> Vec<R> {
        self.coords.iter().flat_map(|a| [a.clone(), a.zero_like()]).collect()
    }

    /// V(a_0, ..., a_{r-1}) = (0, a_0, ..., a_{r-2}).
    pub fn verschiebung(&self) -> Self {
        let mut coords = vec![self.like().zero_like()];
        coords.extend_from_slice(&self.coords[..self.len() - 1]);
        WittVec { p: self.p, coords }
    }

    /// V into length r+1, losing nothing.
    pub fn verschiebung_extend(&self) -> Self {
        let mut coords = vec![self.like().zero_like()];
        coords.extend_from_slice(&self.coords);
        WittVec { p: self.p, coords }
    }

    /// Frobenius. Over an F_p-algebra it is coordinatewise x ↦ x^p and keeps length;
    /// otherwise it maps W_{r} to W_{r-1}.
    pub fn frobenius(&self) -> Result<Self> {
        if self.like().char_p() == Some(self.p) {
            return Ok(WittVec { p: self.p, coords: self.coords.iter().map(|c| c.pow(self.p as u64)).collect() });
        }
        if self.len() < 2 {
            return Err(Error::PrecisionExhausted("Frobenius on length 1 over a non-F_p-algebra".into()));
        }
        let vars = self.interleave_a();
        let coords = (0..self.len() - 1)
            .map(|i| Ok(structure_poly(self.p, i, PolyKind::Frob)?.eval(&vars, self.like())))
            .collect::<Result<_>>()?;
        Ok(WittVec { p: self.p, coords })
    }

    /// ghost_i = Σ_j p^j a_j^{p^{i-j}}.
    pub fn ghost(&self) -> Vec<R> {
        (0..self.len()).map(|i| bar_w_n(self.p, &self.coords[..=i])).collect()
    }

    /// The Witt vector of an integer.
    pub fn from_int(p: u32, n: &BigInt, like: &R, len: usize) -> Result<Self> {
        let one = Self::one(p, like, len);
        let mut acc = Self::zero(p, like, len);
        let mut base = one;
        let mut k = n.abs();
        while !k.is_zero() {
            if k.is_odd() {
                acc = acc.add(&base)?;
            }
            k >>= 1;
            if !k.is_zero() {
                base = base.add(&base)?;
            }
        }
        if n.is_negative() {
            acc = acc.neg()?;
        }
        Ok(acc)
    }

    pub fn mul_int(&self, n: &BigInt) -> Result<Self> {
        self.mul(&Self::from_int(self.p, n, self.like(), self.len())?)
    }

    pub fn pow(&self, e: u64) -> Result<Self> {
        let mut r = Self::one(self.p, self.like(), self.len());
        for _ in 0..e {
            r = r.mul(self)?;
        }
        Ok(r)
    }
}

/// w̄_n(â_0, ..., â_n) = Σ_{j=0}^{n} p^j â_j^{p^{n-j}} on n+1 lifted coordinates.
pub fn bar_w_n<R: CoeffRing>(p: u32, lifted: &[R]) -> R {
    let n = lifted.len() - 1;
    let like = &lifted[0];
    let mut acc = like.zero_like();
    for (j, a) in lifted.iter().enumerate() {
        let pj = like.from_bigint_like(&BigInt::from(p).pow(j as u32));
        acc = acc.add(&pj.mul(&a.pow((p as u64).pow((n - j) as u32))));
    }
    acc
}

/// γ_m(V a) = (p^{m-1}/m!) V(a^m) on the ideal V W(R).
pub fn pd_gamma_v<R: CoeffRing>(m: u64, a: &WittVec<R>) -> Result<WittVec<R>> {
    if m == 0 {
        return Err(Error::Invalid("divided power index 0".into()));
    }
    let p = a.p;
    let mut fact = BigInt::one();
    for k in 2..=m {
        fact *= k;
    }
    let pb = BigInt::from(p);
    let mut v = 0u32;
    while (&fact % &pb).is_zero() {
        fact /= &pb;
        v += 1;
    }
    let e = (m - 1) as u32 - v;
    let unit_inv = if fact.is_one() {
        BigInt::one()
    } else if a.coords[0].char_p() == Some(p) {
        let modulus = pb.pow(a.len() as u32);
        
        fact
            .modpow(&(num_euler_phi(&pb, a.len() as u32) - 1u32), &modulus)
    } else {
        return Err(Error::Precondition(format!("{fact} is not invertible in W(R)")));
    };
    let c = pb.pow(e) * unit_inv;
    a.pow(m)?.verschiebung().mul_int(&c)
}

fn num_euler_phi(p: &BigInt, k: u32) -> BigInt {
    (p - 1u32) * p.pow(k - 1)
}

/// {V^m([b] - [b′]) : 0 ≤ m < r} generating Ker(W_r(B) → W_r(B/I)) for perfect B.
pub fn quotient_kernel_generators<R: CoeffRing>(p: u32, relations: &[(R, R)], r: usize) -> Result<Vec<WittVec<R>>> {
    let mut out = Vec::new();
    for (b, b2) in relations {
        b.pth_root()?;
        b2.pth_root()?;
        let mut g = WittVec::teich(p, b, r).sub(&WittVec::teich(p, b2, r))?;
        for _ in 0..r {
            out.push(g.clone());
            g = g.verschiebung();
        }
    }
    Ok(out)
}

/// Coordinates as i64 for display and tests over Z.
pub fn coords_i64(w: &WittVec<BigInt>) -> Vec<i64> {
    w.coords.iter().map(|c| c.to_i64().unwrap()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::Zmod;
    use proptest::prelude::*;

    fn z(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn zm(v: u64, p: u32, n: u32) -> Zmod {
        Zmod::new(v, p, n).unwrap()
    }

    #[test]
    fn teich_sum_in_w2z() {
        let a = WittVec::teich(2, &z(2), 2);
        let b = WittVec::teich(2, &z(3), 2);
        let s = a.add(&b).unwrap();
        assert_eq!(coords_i64(&s), vec![5, -6]);
        let g = s.ghost();
        assert_eq!(g[1], z(4 + 9));
    }

    #[test]
    fn ghost_of_teich() {
        let t = WittVec::teich(3, &z(2), 3);
        assert_eq!(t.ghost(), vec![z(2), z(8), z(512)]);
    }

    #[test]
    fn fv_is_p() {
        for p in [2u32, 3] {
            let a = WittVec::new(p, vec![zm(5, p, 6), zm(7, p, 6), zm(2, p, 6)]).unwrap();
            let fv = a.verschiebung_extend().frobenius().unwrap();
            assert_eq!(fv, a.mul_int(&BigInt::from(p)).unwrap());
            let t = WittVec::teich(p, &zm(4, p, 6), 3);
            assert_eq!(t.verschiebung_extend().frobenius().unwrap(), t.mul_int(&BigInt::from(p)).unwrap());
        }
    }

    #[test]
    fn bar_w_examples() {
        let c = |v: &[u64]| v.iter().map(|&x| zm(x, 2, 2)).collect::<Vec<_>>();
        assert_eq!(bar_w_n(2, &c(&[1, 1, 0])).value, 3);
        assert_eq!(bar_w_n(2, &c(&[3, 1, 0])).value, 3);
        assert_eq!(bar_w_n(2, &c(&[1, 0, 0])).value, 1);
        assert_eq!(bar_w_n(2, &c(&[0, 1, 1])).value, 2);
    }

    #[test]
    fn pd_gamma_examples() {
        let one = WittVec::one(2, &zm(1, 2, 1), 3);
        let v1 = one.verschiebung();
        assert_eq!(pd_gamma_v(2, &one).unwrap(), v1);
        assert_eq!(v1, one.mul_int(&z(2)).unwrap());
        assert_eq!(pd_gamma_v(1, &one).unwrap(), v1);
        assert!(pd_gamma_v(0, &one).is_err());
        // γ_3(V1) over F_2: 4/6 · V(1) = 2/3 · 2 = 4/3
        let g3 = pd_gamma_v(3, &one).unwrap();
        let three = one.mul_int(&z(3)).unwrap();
        assert_eq!(g3.mul(&three).unwrap(), one.mul_int(&z(4)).unwrap());
    }

    #[test]
    fn kernel_generators_trivial() {
        let g = quotient_kernel_generators::<Zmod>(2, &[], 2).unwrap();
        assert!(g.is_empty());
        let x = zm(1, 2, 1);
        let g = quotient_kernel_generators(2, &[(x, x)], 3).unwrap();
        assert_eq!(g.len(), 3);
        assert!(g.iter().all(|w| w.is_zero()));
        assert!(quotient_kernel_generators(2, &[(zm(1, 2, 2), zm(0, 2, 2))], 2).is_err());
    }

    fn wv(p: u32, len: usize, v: &[u64]) -> WittVec<Zmod> {
        WittVec::new(p, v[..len].iter().map(|&x| zm(x, p, 6)).collect()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn ghost_oracle(p in prop_oneof![Just(2u32), Just(3u32)], len in 1usize..=3,
                        a in proptest::collection::vec(0u64..1000, 3), b in proptest::collection::vec(0u64..1000, 3)) {
            let (x, y) = (wv(p, len, &a), wv(p, len, &b));
            let (gx, gy) = (x.ghost(), y.ghost());
            let gs = x.add(&y).unwrap().ghost();
            let gm = x.mul(&y).unwrap().ghost();
            for i in 0..len {
                prop_assert_eq!(gs[i], gx[i].add(&gy[i]).unwrap());
                prop_assert_eq!(gm[i], gx[i].mul(&gy[i]).unwrap());
            }
        }

        #[test]
        fn ring_axioms(p in prop_oneof![Just(2u32), Just(3u32)],
                       a in proptest::collection::vec(0u64..1000, 2), b in proptest::collection::vec(0u64..1000, 2),
                       c in proptest::collection::vec(0u64..1000, 2)) {
            let (x, y, w) = (wv(p, 2, &a), wv(p, 2, &b), wv(p, 2, &c));
            prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
            prop_assert_eq!(x.mul(&y.add(&w).unwrap()).unwrap(), x.mul(&y).unwrap().add(&x.mul(&w).unwrap()).unwrap());
            prop_assert_eq!(x.mul(&y).unwrap().mul(&w).unwrap(), x.mul(&y.mul(&w).unwrap()).unwrap());
            prop_assert!(x.add(&x.neg().unwrap()).unwrap().is_zero());
        }

        #[test]
        fn bar_w_lift_independent(c in proptest::collection::vec(0u64..2, 3), l in proptest::collection::vec(0u64..2, 3)) {
            let base: Vec<_> = c.iter().map(|&x| zm(x, 2, 2)).collect();
            let lifted: Vec<_> = c.iter().zip(&l).map(|(&x, &t)| zm(x + 2 * t, 2, 2)).collect();
            prop_assert_eq!(bar_w_n(2, &base), bar_w_n(2, &lifted));
        }
    }
}
