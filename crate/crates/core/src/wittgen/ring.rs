//! Coefficient-ring interface for Witt vectors.

use crate::error::{Error, Result};
use crate::padic::{Modulus, Zmod};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use std::fmt::Debug;

/// A commutative ring whose elements know their own ambient data.
pub trait CoeffRing: Clone + PartialEq + Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_bigint_like(&self, n: &BigInt) -> Self;
    fn vanishes(&self) -> bool;

    /// `Some(p)` when the ring is an F_p-algebra.
    fn char_p(&self) -> Option<u32> {
        None
    }

    /// p-th root, only where perfectness is asserted.
    fn pth_root(&self) -> Result<Self> {
        Err(Error::Precondition("ring is not perfect".into()))
    }

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    fn pow(&self, mut e: u64) -> Self {
        let mut r = self.one_like();
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b);
            }
        }
        r
    }
}

impl CoeffRing for BigInt {
    fn zero_like(&self) -> Self {
        BigInt::zero()
    }
    fn one_like(&self) -> Self {
        BigInt::from(1)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_bigint_like(&self, n: &BigInt) -> Self {
        n.clone()
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
}

fn bigint_mod(n: &BigInt, m: u64) -> u64 {
    n.mod_floor(&BigInt::from(m)).to_u64().unwrap()
}

/// Z/p^N; mixing primes inside a Witt computation is an internal error.
impl CoeffRing for Zmod {
    fn zero_like(&self) -> Self {
        Zmod { value: 0, ..*self }
    }
    fn one_like(&self) -> Self {
        Zmod { value: 1 % self.modulus().m, ..*self }
    }
    fn add(&self, o: &Self) -> Self {
        Zmod::add(self, o).expect("prime mismatch")
    }
    fn mul(&self, o: &Self) -> Self {
        Zmod::mul(self, o).expect("prime mismatch")
    }
    fn neg(&self) -> Self {
        Zmod::neg(self)
    }
    fn from_bigint_like(&self, n: &BigInt) -> Self {
        Zmod { value: bigint_mod(n, self.modulus().m), ..*self }
    }
    fn vanishes(&self) -> bool {
        self.value == 0
    }
    fn char_p(&self) -> Option<u32> {
        (self.prec == 1).then_some(self.p)
    }
    fn pth_root(&self) -> Result<Self> {
        // F_p is perfect with trivial Frobenius
        if self.prec == 1 {
            Ok(*self)
        } else {
            Err(Error::Precondition("Z/p^N is not perfect for N > 1".into()))
        }
    }
}

/// Reduce a big integer into a modulus.
pub fn reduce_big(n: &BigInt, m: &Modulus) -> u64 {
    bigint_mod(n, m.m)
}
