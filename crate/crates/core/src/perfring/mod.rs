//! Perfect polynomial rings, the quotient C = B[x^{1/p^∞}]/(x), its tilt, and Witt series.

pub mod series;
pub mod tilt;
pub mod wc;

pub use series::WittSeries;
pub use tilt::TiltPoly;
pub use wc::WCElement;

use crate::error::{Error, Result};
use crate::padic::{check_prime, ppow, MultiExp, PExp};
use serde::{Deserialize, Serialize};

/// Ambient data: prime, x-variables (quotiented), y-variables (perfect base), precision.
///
/// Equality compares the ring (p, n, m) only; `prec` is the default working precision,
/// while each element carries its own.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RingDescriptor {
    pub p: u32,
    pub n: usize,
    pub m: usize,
    pub prec: u32,
}

impl PartialEq for RingDescriptor {
    fn eq(&self, o: &Self) -> bool {
        (self.p, self.n, self.m) == (o.p, o.n, o.m)
    }
}

impl Eq for RingDescriptor {}

impl std::hash::Hash for RingDescriptor {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        (self.p, self.n, self.m).hash(h)
    }
}

impl RingDescriptor {
    pub fn new(p: u32, n: usize, m: usize, prec: u32) -> Result<Self> {
        check_prime(p)?;
        if prec == 0 {
            return Err(Error::Invalid("precision must be at least 1".into()));
        }
        ppow(p, prec)?;
        Ok(RingDescriptor { p, n, m, prec })
    }

    pub fn nvars(&self) -> usize {
        self.n + self.m
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        RingDescriptor { prec, ..*self }
    }

    pub fn zero_exp(&self) -> MultiExp {
        MultiExp::zero(self.nvars(), self.p)
    }

    /// Exponent with x_i^1.
    pub fn unit_exp(&self, i: usize) -> MultiExp {
        let mut e = self.zero_exp();
        e.0[i] = PExp::int(1, self.p);
        e
    }

    /// Exponent from (num, den_exp) pairs.
    pub fn exp(&self, coords: &[(u64, u32)]) -> Result<MultiExp> {
        if coords.len() != self.nvars() {
            return Err(Error::LengthMismatch(coords.len(), self.nvars()));
        }
        coords.iter().map(|&(a, d)| PExp::new(a, d, self.p)).collect::<Result<_>>().map(MultiExp)
    }

    pub fn check(&self, o: &RingDescriptor) -> Result<()> {
        if self != o {
            return Err(Error::DescriptorMismatch(format!("{self:?} vs {o:?}")));
        }
        Ok(())
    }

    /// Whether the ring is the y-free F_p case used by acceptance fixtures.
    pub fn is_plain(&self) -> bool {
        self.m == 0
    }
}

/// Exponent box: x-coordinates in p^{-(E-1)}Z ∩ [0, D], y-coordinates zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExpBox {
    pub e: u32,
    pub d: u64,
}

impl ExpBox {
    pub fn new(e: u32, d: u64) -> Result<Self> {
        if e == 0 {
            return Err(Error::Invalid("box denominator exponent must be at least 1".into()));
        }
        Ok(ExpBox { e, d })
    }

    /// Stability threshold for theorem verification: D ≥ p^{N+1}, E ≥ N+1.
    pub fn meets_threshold(&self, p: u32, prec: u32) -> bool {
        self.e > prec && ppow(p, prec + 1).map(|t| self.d >= t).unwrap_or(false)
    }

    pub fn den(&self) -> u32 {
        self.e - 1
    }

    pub fn contains(&self, alpha: &MultiExp, desc: &RingDescriptor) -> bool {
        alpha.0[..desc.n].iter().all(|a| a.den <= self.den() && *a <= PExp::int(self.d, desc.p))
            && alpha.0[desc.n..].iter().all(|a| a.is_zero())
    }

    /// All x-coordinate values in the box.
    pub fn coord_values(&self, p: u32) -> Vec<PExp> {
        let q = (p as u64).pow(self.den());
        (0..=self.d * q).map(|k| PExp::new(k, self.den(), p).unwrap()).collect()
    }

    /// All exponents in the box, y-part zero.
    pub fn points(&self, desc: &RingDescriptor) -> Vec<MultiExp> {
        let vals = self.coord_values(desc.p);
        let mut out = vec![desc.zero_exp()];
        for i in 0..desc.n {
            let mut next = Vec::with_capacity(out.len() * vals.len());
            for a in &out {
                for v in &vals {
                    let mut b = a.clone();
                    b.0[i] = *v;
                    next.push(b);
                }
            }
            out = next;
        }
        out
    }

    /// S ∩ box where S = [0,p)^n ∖ [0,1)^n.
    pub fn annulus(&self, desc: &RingDescriptor) -> Vec<MultiExp> {
        let p = PExp::int(desc.p as u64, desc.p);
        let one = PExp::int(1, desc.p);
        self.points(desc)
            .into_iter()
            .filter(|a| a.0[..desc.n].iter().all(|c| *c < p) && a.0[..desc.n].iter().any(|c| *c >= one))
            .collect()
    }
}
