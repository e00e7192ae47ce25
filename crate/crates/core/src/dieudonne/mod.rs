//! Dieudonné modules over W(F_p) and their point groups on the key-example rings.
//!
//! Matrices act on column vectors: F e_j = Σ_i f[i][j] e_i.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::padic::{Modulus, MultiExp};
use serde::{Deserialize, Serialize};

mod classical;
mod sw;
mod units;
mod verify;

pub use classical::{beta_pushforward, lift_m, lift_to_m, pushforward_certificate, solve_classical, ClassicalDepth};
pub use sw::{check_f_equivariant, nil_part, solve_sw, solve_sw_at};
pub use units::{unit_group_divisors, unit_round_trip, UnitSifter};
pub use verify::{default_suite, verify_theorem, verify_theorem_with, InstanceReport, SuiteEntry, TheoremReport};

pub type IntMat = Vec<Vec<i64>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DieudonneModule {
    pub p: u32,
    pub rank: usize,
    #[serde(rename = "F")]
    pub f: IntMat,
    #[serde(rename = "V")]
    pub v: IntMat,
    pub prec: u32,
}

fn scalar(r: usize, d: i64, off: i64) -> IntMat {
    (0..r).map(|i| (0..r).map(|j| if i == j { d } else { off }).collect()).collect()
}

fn int_mul(a: &IntMat, b: &IntMat) -> Vec<Vec<i128>> {
    let r = a.len();
    (0..r).map(|i| (0..r).map(|j| (0..r).map(|k| a[i][k] as i128 * b[k][j] as i128).sum()).collect()).collect()
}

impl DieudonneModule {
    pub fn new(p: u32, f: IntMat, v: IntMat, prec: u32) -> Result<Self> {
        let m = DieudonneModule { p, rank: f.len(), f, v, prec };
        m.validate()?;
        Ok(m)
    }

    pub fn etale(p: u32, r: usize, prec: u32) -> Self {
        DieudonneModule { p, rank: r, f: scalar(r, 1, 0), v: scalar(r, p as i64, 0), prec }
    }

    pub fn multiplicative(p: u32, r: usize, prec: u32) -> Self {
        DieudonneModule { p, rank: r, f: scalar(r, p as i64, 0), v: scalar(r, 1, 0), prec }
    }

    pub fn supersingular(p: u32, prec: u32) -> Self {
        let m = vec![vec![0, p as i64], vec![1, 0]];
        DieudonneModule { p, rank: 2, f: m.clone(), v: m, prec }
    }

    pub fn zero(p: u32, prec: u32) -> Self {
        DieudonneModule { p, rank: 0, f: vec![], v: vec![], prec }
    }

    pub fn direct_sum(&self, o: &Self) -> Result<Self> {
        if self.p != o.p {
            return Err(Error::PrimeMismatch(self.p, o.p));
        }
        let r = self.rank + o.rank;
        let block = |a: &IntMat, b: &IntMat| -> IntMat {
            let mut out = vec![vec![0; r]; r];
            for (i, row) in a.iter().enumerate() {
                out[i][..self.rank].copy_from_slice(row);
            }
            for (i, row) in b.iter().enumerate() {
                out[self.rank + i][self.rank..].copy_from_slice(row);
            }
            out
        };
        Ok(DieudonneModule { p: self.p, rank: r, f: block(&self.f, &o.f), v: block(&self.v, &o.v), prec: self.prec.min(o.prec) })
    }

    fn check_shape(&self) -> Result<()> {
        crate::padic::check_prime(self.p)?;
        for m in [&self.f, &self.v] {
            if m.len() != self.rank {
                return Err(Error::LengthMismatch(m.len(), self.rank));
            }
            if let Some(row) = m.iter().find(|row| row.len() != self.rank) {
                return Err(Error::LengthMismatch(row.len(), self.rank));
            }
        }
        Ok(())
    }

    /// FV = VF = p·I mod p^N.
    pub fn validate(&self) -> Result<()> {
        self.check_shape()?;
        let md = self.modulus(self.prec)?;
        let p = self.p as i128;
        for prod in [int_mul(&self.f, &self.v), int_mul(&self.v, &self.f)] {
            for (i, row) in prod.iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    let want = if i == j { p } else { 0 };
                    if md.reduce_i128(x - want) != 0 {
                        return Err(Error::Invalid(format!("FV or VF differs from p·I at ({i},{j})")));
                    }
                }
            }
        }
        Ok(())
    }

    /// FV = VF = p·I over the integers, so the matrices serve at every precision.
    pub fn is_exact(&self) -> bool {
        let p = self.p as i128;
        self.check_shape().is_ok()
            && [int_mul(&self.f, &self.v), int_mul(&self.v, &self.f)].iter().all(|prod| {
                prod.iter().enumerate().all(|(i, row)| row.iter().enumerate().all(|(j, &x)| x == if i == j { p } else { 0 }))
            })
    }

    pub fn modulus(&self, prec: u32) -> Result<Modulus> {
        Modulus::new(self.p, prec)
    }

    fn reduce(&self, a: &IntMat, prec: u32) -> Result<Mat> {
        if prec > self.prec && !self.is_exact() {
            return Err(Error::PrecisionExhausted(format!(
                "module known mod p^{} only, solver needs p^{prec}",
                self.prec
            )));
        }
        let md = self.modulus(prec)?;
        Ok(a.iter().map(|r| r.iter().map(|&x| md.reduce_i128(x as i128)).collect()).collect())
    }

    /// Fmat mod p^prec.
    pub fn f_mod(&self, prec: u32) -> Result<Mat> {
        self.reduce(&self.f, prec)
    }

    pub fn v_mod(&self, prec: u32) -> Result<Mat> {
        self.reduce(&self.v, prec)
    }

    /// V^r ≡ 0 mod p: V topologically nilpotent.
    pub fn v_nilpotent(&self) -> Result<bool> {
        let md = self.modulus(1)?;
        let v = self.v_mod(1)?;
        let mut acc = linalg::identity(self.rank);
        for _ in 0..self.rank {
            acc = linalg::mat_mul(&md, &acc, &v, self.rank, self.rank);
        }
        Ok(acc.iter().all(|r| r.iter().all(|&x| x == 0)))
    }

    /// F = p·I and V = I: a direct sum of copies of the multiplicative module.
    pub fn is_split_multiplicative(&self) -> bool {
        self.f == scalar(self.rank, self.p as i64, 0) && self.v == scalar(self.rank, 1, 0)
    }
}

/// Result of the D′ ⊕ D″ splitting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    /// V topologically nilpotent
    pub nil: DieudonneModule,
    /// V invertible
    pub inv: DieudonneModule,
    /// columns: basis of the nilpotent part, then of the invertible part (mod p^N)
    pub basis: Mat,
}

/// Rows whose reductions mod p are independent; a basis when the span is a free summand.
fn lift_basis(p: u32, rows: Mat, cols: usize) -> Result<Mat> {
    let fp = Modulus::new(p, 1)?;
    let mut out: Mat = Vec::new();
    let mut red: Mat = Vec::new();
    for row in rows {
        red.push(row.iter().map(|&x| fp.reduce(x)).collect());
        if linalg::span_log_order(&fp, &red, cols)? as usize > out.len() {
            out.push(row);
        } else {
            red.pop();
        }
    }
    Ok(out)
}

fn is_permutation(b: &Mat) -> bool {
    b.iter().all(|r| r.iter().filter(|&&x| x == 1).count() == 1 && r.iter().all(|&x| x <= 1))
        && (0..b.len()).all(|j| b.iter().filter(|r| r[j] == 1).count() == 1)
}

/// Split N = N′ ⊕ N″ by the stable kernel and stable image of V^{r·N}.
pub fn dd_split(n: &DieudonneModule) -> Result<Split> {
    n.validate()?;
    let (r, prec) = (n.rank, n.prec);
    let md = n.modulus(prec)?;
    let v = n.v_mod(prec)?;
    let mut t = linalg::identity(r);
    for _ in 0..r * prec as usize {
        t = linalg::mat_mul(&md, &t, &v, r, r);
    }
    let ker = lift_basis(n.p, linalg::howell(&md, &linalg::kernel(&md, &t, r)?, r)?, r)?;
    let img = lift_basis(n.p, linalg::howell(&md, &linalg::transpose(&t, r), r)?, r)?;
    if ker.len() + img.len() != r {
        return Err(Error::Verification("stable kernel and image of V are not complementary".into()));
    }
    let cols: Mat = ker.iter().chain(&img).cloned().collect();
    let basis = linalg::transpose(&cols, r);
    let binv = linalg::inverse(&md, &basis)
        .map_err(|_| Error::Verification("stable kernel and image of V are not complementary".into()))?;
    let (a, b) = (ker.len(), img.len());
    if is_permutation(&basis) {
        let pick = |idx: &[usize], m: &IntMat| -> IntMat { idx.iter().map(|&i| idx.iter().map(|&j| m[i][j]).collect()).collect() };
        let pos = |c: &Vec<u64>| c.iter().position(|&x| x == 1).unwrap();
        let ia: Vec<usize> = ker.iter().map(pos).collect();
        let ib: Vec<usize> = img.iter().map(pos).collect();
        let sub = |idx: &[usize]| DieudonneModule { p: n.p, rank: idx.len(), f: pick(idx, &n.f), v: pick(idx, &n.v), prec };
        let (nil, inv) = (sub(&ia), sub(&ib));
        for (x, y) in [(&ia, &ib), (&ib, &ia)] {
            if x.iter().any(|&i| y.iter().any(|&j| n.f[i][j] != 0 || n.v[i][j] != 0)) {
                return Err(Error::Verification("splitting is not F, V-stable".into()));
            }
        }
        return Ok(Split { nil, inv, basis });
    }
    let conj = |m: &Mat| linalg::mat_mul(&md, &linalg::mat_mul(&md, &binv, m, r, r), &basis, r, r);
    let (fc, vc) = (conj(&n.f_mod(prec)?), conj(&v));
    let signed = |x: u64| -> i64 { x as i64 };
    for m in [&fc, &vc] {
        let off = (0..a).any(|i| (a..r).any(|j| m[i][j] != 0 || m[j][i] != 0));
        if off {
            return Err(Error::Verification("splitting is not F, V-stable".into()));
        }
    }
    let block = |m: &Mat, lo: usize, k: usize| -> IntMat { (lo..lo + k).map(|i| (lo..lo + k).map(|j| signed(m[i][j])).collect()).collect() };
    let nil = DieudonneModule { p: n.p, rank: a, f: block(&fc, 0, a), v: block(&vc, 0, a), prec };
    let inv = DieudonneModule { p: n.p, rank: b, f: block(&fc, a, b), v: block(&vc, a, b), prec };
    Ok(Split { nil, inv, basis })
}

/// One orbit chain of the solution: the anchor α₀ ∈ S (None for the exponent-0 chain).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainBlock<T> {
    pub anchor: Option<MultiExp>,
    /// per generator, the image of each basis vector of N
    pub generators: Vec<Vec<T>>,
    /// coordinates (basis index of N, exponent) of `span`
    pub coords: Vec<(usize, MultiExp)>,
    /// Howell form of the generators' coordinate span
    pub span: Mat,
    /// modulus exponent of `span`
    pub span_prec: u32,
    /// elementary divisors of this block of X/p^N
    pub divisors: Vec<u32>,
}

/// A point-group solution space on a box, split into orbit chains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionModule<T> {
    pub prec: u32,
    pub below_threshold: bool,
    pub blocks: Vec<ChainBlock<T>>,
}

impl<T> SolutionModule<T> {
    /// Elementary divisors of X/p^N, descending.
    pub fn divisors(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.blocks.iter().flat_map(|b| b.divisors.iter().copied()).collect();
        d.sort_unstable_by(|a, b| b.cmp(a));
        d
    }

    pub fn block(&self, anchor: Option<&MultiExp>) -> Option<&ChainBlock<T>> {
        self.blocks.iter().find(|b| b.anchor.as_ref() == anchor)
    }

    pub fn generator_count(&self) -> usize {
        self.blocks.iter().map(|b| b.generators.len()).sum()
    }
}

#[cfg(test)]
mod tests;
