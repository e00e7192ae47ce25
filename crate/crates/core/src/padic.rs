//! Integers mod p^N, p-adic valuations, factorial valuations and exponents in Z[1/p].

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::fmt;

/// Largest admissible modulus is below 2^63 so that products fit in u128.
pub const MAX_MODULUS: u64 = 1 << 63;

pub fn check_prime(p: u32) -> Result<()> {
    if p < 2 || (2..p).any(|d| d * d <= p && p.is_multiple_of(d)) {
        return Err(Error::Invalid(format!("{p} is not prime")));
    }
    Ok(())
}

/// p^e, failing if it does not fit below 2^63.
pub fn ppow(p: u32, e: u32) -> Result<u64> {
    let mut r: u64 = 1;
    for _ in 0..e {
        r = r
            .checked_mul(p as u64)
            .filter(|&v| v < MAX_MODULUS)
            .ok_or(Error::ModulusTooLarge { p, prec: e })?;
    }
    Ok(r)
}

/// Valuation of a nonzero integer; `None` for zero.
pub fn val_u64(mut x: u64, p: u32) -> Option<u32> {
    if x == 0 {
        return None;
    }
    let mut v = 0;
    while x.is_multiple_of(p as u64) {
        x /= p as u64;
        v += 1;
    }
    Some(v)
}

pub fn val_u128(mut x: u128, p: u32) -> Option<u32> {
    if x == 0 {
        return None;
    }
    let mut v = 0;
    while x.is_multiple_of(p as u128) {
        x /= p as u128;
        v += 1;
    }
    Some(v)
}

/// The modulus p^prec with cached value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    pub p: u32,
    pub prec: u32,
    pub m: u64,
}

impl Modulus {
    pub fn new(p: u32, prec: u32) -> Result<Self> {
        Ok(Modulus { p, prec, m: ppow(p, prec)? })
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.m
    }

    #[inline]
    pub fn reduce_i128(&self, x: i128) -> u64 {
        x.rem_euclid(self.m as i128) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.m as u128) as u64
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + self.m as u128 - (b % self.m) as u128) % self.m as u128) as u64
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        (self.m - a % self.m) % self.m
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.m as u128) as u64
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a % self.m;
        let mut r = 1 % self.m;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        r
    }

    /// Valuation of a residue, capped at `prec` for zero.
    pub fn val(&self, a: u64) -> u32 {
        val_u64(a % self.m, self.p).unwrap_or(self.prec)
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        let a = a % self.m;
        if self.m == 1 {
            return Ok(0);
        }
        if a.is_multiple_of(self.p as u64) {
            return Err(Error::NotUnit(format!("{a} mod {}", self.m)));
        }
        let (mut r0, mut r1) = (self.m as i128, a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        Ok(self.reduce_i128(t0))
    }
}

/// An integer mod p^prec.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Zmod {
    pub value: u64,
    pub prec: u32,
    pub p: u32,
}

impl Zmod {
    pub fn new(value: u64, p: u32, prec: u32) -> Result<Self> {
        if prec == 0 {
            return Err(Error::PrecisionExhausted("precision 0".into()));
        }
        let m = Modulus::new(p, prec)?;
        Ok(Zmod { value: m.reduce(value), prec, p })
    }

    pub fn from_i64(value: i64, p: u32, prec: u32) -> Result<Self> {
        let m = Modulus::new(p, prec)?;
        Ok(Zmod { value: m.reduce_i128(value as i128), prec, p })
    }

    pub fn modulus(&self) -> Modulus {
        Modulus { p: self.p, prec: self.prec, m: ppow(self.p, self.prec).unwrap() }
    }

    fn meet(&self, o: &Zmod) -> Result<Modulus> {
        if self.p != o.p {
            return Err(Error::PrimeMismatch(self.p, o.p));
        }
        Modulus::new(self.p, self.prec.min(o.prec))
    }

    pub fn add(&self, o: &Zmod) -> Result<Zmod> {
        let m = self.meet(o)?;
        Ok(Zmod { value: m.add(m.reduce(self.value), m.reduce(o.value)), prec: m.prec, p: m.p })
    }

    pub fn sub(&self, o: &Zmod) -> Result<Zmod> {
        let m = self.meet(o)?;
        Ok(Zmod { value: m.sub(m.reduce(self.value), m.reduce(o.value)), prec: m.prec, p: m.p })
    }

    pub fn mul(&self, o: &Zmod) -> Result<Zmod> {
        let m = self.meet(o)?;
        Ok(Zmod { value: m.mul(self.value, o.value), prec: m.prec, p: m.p })
    }

    pub fn neg(&self) -> Zmod {
        let m = self.modulus();
        Zmod { value: m.neg(self.value), ..*self }
    }

    /// Valuation; `None` for zero (infinite valuation at this precision).
    pub fn v_p(&self) -> Option<u32> {
        val_u64(self.value, self.p)
    }

    pub fn unit_inverse(&self) -> Result<Zmod> {
        Ok(Zmod { value: self.modulus().inv(self.value)?, ..*self })
    }

    pub fn divide_by_p(&self) -> Result<Zmod> {
        if self.prec <= 1 {
            return Err(Error::PrecisionExhausted("divide_by_p at precision 1".into()));
        }
        if !self.value.is_multiple_of(self.p as u64) {
            return Err(Error::NotDivisible(format!("{}", self.value)));
        }
        Ok(Zmod { value: self.value / self.p as u64, prec: self.prec - 1, p: self.p })
    }

    /// Reduce to a lower precision.
    pub fn truncate(&self, prec: u32) -> Result<Zmod> {
        if prec > self.prec {
            return Err(Error::Precondition("cannot raise precision".into()));
        }
        Zmod::new(self.value, self.p, prec)
    }
}

impl fmt::Display for Zmod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.value, self.p, self.prec)
    }
}

/// A nonnegative rational num/p^den, normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PExp {
    pub num: u64,
    pub den: u32,
    pub p: u32,
}

impl PExp {
    pub fn new(num: u64, den: u32, p: u32) -> Result<Self> {
        let (mut num, mut den) = (num, den);
        while den > 0 && num % p as u64 == 0 {
            num /= p as u64;
            den -= 1;
        }
        if num == 0 {
            den = 0;
        }
        ppow(p, den)?;
        Ok(PExp { num, den, p })
    }

    pub fn int(n: u64, p: u32) -> Self {
        PExp { num: n, den: 0, p }
    }

    pub fn zero(p: u32) -> Self {
        PExp::int(0, p)
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_integer(&self) -> bool {
        self.den == 0
    }

    fn pden(&self) -> u64 {
        (self.p as u64).pow(self.den)
    }

    pub fn floor(&self) -> u64 {
        self.num / self.pden()
    }

    pub fn add(&self, o: &PExp) -> Result<PExp> {
        if self.p != o.p {
            return Err(Error::PrimeMismatch(self.p, o.p));
        }
        let d = self.den.max(o.den);
        let a = self.num as u128 * (self.p as u128).pow(d - self.den);
        let b = o.num as u128 * (self.p as u128).pow(d - o.den);
        let s = u64::try_from(a + b).map_err(|_| Error::ResourceLimit("exponent overflow".into()))?;
        PExp::new(s, d, self.p)
    }

    /// Saturating subtraction; `None` if o > self.
    pub fn checked_sub(&self, o: &PExp) -> Option<PExp> {
        let d = self.den.max(o.den);
        let a = self.num as u128 * (self.p as u128).pow(d - self.den);
        let b = o.num as u128 * (self.p as u128).pow(d - o.den);
        if b > a {
            return None;
        }
        PExp::new((a - b) as u64, d, self.p).ok()
    }

    pub fn mul_int(&self, k: u64) -> Result<PExp> {
        let n = self
            .num
            .checked_mul(k)
            .ok_or_else(|| Error::ResourceLimit("exponent overflow".into()))?;
        PExp::new(n, self.den, self.p)
    }

    /// Multiply by p^k (k may be negative).
    pub fn scale_p(&self, k: i32) -> Result<PExp> {
        if self.num == 0 {
            return Ok(*self);
        }
        if k >= 0 {
            let mut num = self.num;
            let mut den = self.den;
            for _ in 0..k {
                if den > 0 {
                    den -= 1;
                } else {
                    num = num
                        .checked_mul(self.p as u64)
                        .ok_or_else(|| Error::ResourceLimit("exponent overflow".into()))?;
                }
            }
            Ok(PExp { num, den, p: self.p })
        } else {
            PExp::new(self.num, self.den + (-k) as u32, self.p)
        }
    }

    /// Whether self ≥ p^k for an integer k of any sign.
    pub fn ge_ppow(&self, k: i32) -> bool {
        if self.num == 0 {
            return false;
        }
        let e = k + self.den as i32;
        if e <= 0 {
            return true;
        }
        match (self.p as u128).checked_pow(e as u32) {
            Some(t) => self.num as u128 >= t,
            None => false,
        }
    }

    /// ⌊log_p self⌋ for self ≥ 1.
    pub fn floor_log(&self) -> Option<u32> {
        let f = self.floor();
        if f == 0 {
            return None;
        }
        let mut k = 0;
        let mut t = self.p as u64;
        while t <= f {
            k += 1;
            match t.checked_mul(self.p as u64) {
                Some(v) => t = v,
                None => break,
            }
        }
        Some(k)
    }
}

impl Ord for PExp {
    fn cmp(&self, o: &Self) -> Ordering {
        let d = self.den.max(o.den);
        let a = self.num as u128 * (self.p as u128).pow(d - self.den);
        let b = o.num as u128 * (o.p as u128).pow(d - o.den);
        a.cmp(&b)
    }
}

impl PartialOrd for PExp {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for PExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.pden())
        }
    }
}

/// An exponent vector; the first `nx` coordinates are x-variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiExp(pub Vec<PExp>);

impl MultiExp {
    pub fn zero(len: usize, p: u32) -> Self {
        MultiExp(vec![PExp::zero(p); len])
    }

    pub fn from_ints(v: &[u64], p: u32) -> Self {
        MultiExp(v.iter().map(|&n| PExp::int(n, p)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &MultiExp) -> Result<MultiExp> {
        if self.len() != o.len() {
            return Err(Error::LengthMismatch(self.len(), o.len()));
        }
        self.0.iter().zip(&o.0).map(|(a, b)| a.add(b)).collect::<Result<_>>().map(MultiExp)
    }

    pub fn mul_int(&self, k: u64) -> Result<MultiExp> {
        self.0.iter().map(|a| a.mul_int(k)).collect::<Result<_>>().map(MultiExp)
    }

    pub fn scale_p(&self, k: i32) -> Result<MultiExp> {
        self.0.iter().map(|a| a.scale_p(k)).collect::<Result<_>>().map(MultiExp)
    }

    /// Some x-coordinate is ≥ p^k.
    pub fn any_x_ge(&self, nx: usize, k: i32) -> bool {
        self.0[..nx].iter().any(|a| a.ge_ppow(k))
    }

    /// Every x-coordinate is an integer.
    pub fn x_integral(&self, nx: usize) -> bool {
        self.0[..nx].iter().all(|a| a.is_integer())
    }

    /// Largest denominator exponent among all coordinates.
    pub fn max_den(&self) -> u32 {
        self.0.iter().map(|a| a.den).max().unwrap_or(0)
    }

    /// σ(α) = Σ ⌊α_i⌋ over x-coordinates.
    pub fn sigma(&self, nx: usize) -> u64 {
        self.0[..nx].iter().map(|a| a.floor()).sum()
    }

    /// t(α): least m ≥ 0 with some x-coordinate ≥ p^{-m}; `None` if all x-coordinates vanish.
    pub fn t_of(&self, nx: usize) -> Option<u32> {
        self.0[..nx]
            .iter()
            .filter(|a| !a.is_zero())
            .map(|a| {
                let mut m = 0u32;
                while !a.ge_ppow(-(m as i32)) {
                    m += 1;
                }
                m
            })
            .min()
    }
}

impl fmt::Display for MultiExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// s_p of an integer: Σ_j ⌊n/p^j⌋.
pub fn s_int(mut n: u64, p: u32) -> u64 {
    let mut s = 0;
    while n > 0 {
        n /= p as u64;
        s += n;
    }
    s
}

/// s_p(y) = Σ_{j≥1} ⌊y/p^j⌋.
pub fn s_p(y: &PExp) -> u64 {
    s_int(y.floor(), y.p)
}

/// s_p on a possibly negative rational given as (num, den); rejects negatives.
pub fn s_p_signed(num: i64, den: u32, p: u32) -> Result<u64> {
    if num < 0 {
        return Err(Error::Negative(format!("{num}/{p}^{den}")));
    }
    Ok(s_p(&PExp::new(num as u64, den, p)?))
}

/// Exponent of (α!)_p over the first `nx` coordinates.
pub fn fact_p(alpha: &MultiExp, nx: usize) -> u64 {
    alpha.0[..nx].iter().map(s_p).sum()
}

/// m(α) = max(0, ⌊log_p α_i⌋) over the first `nx` coordinates.
pub fn m_of(alpha: &MultiExp, nx: usize) -> u32 {
    alpha.0[..nx].iter().filter_map(|a| a.floor_log()).max().unwrap_or(0)
}
