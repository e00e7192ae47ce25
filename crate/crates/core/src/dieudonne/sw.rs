//! Hom_{W(k)[F]}(N, A_cris(C)) on a box, solved chain by chain.
//!
//! On the chain {p^j α₀} the coefficient vectors a_j satisfy Fᵀ a_j = p^{σ(p^{j−1}α₀)} a_{j−1}.
//! Below the annulus σ vanishes, so the chain descends by Fᵀ and has to die out
//! p-adically; above it a_j = p^{σ−1} Vᵀ a_{j−1} and the factor kills the tail.

use super::{ChainBlock, DieudonneModule, SolutionModule};
use crate::acris::DividedSeries;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::padic::{Modulus, MultiExp};
use crate::perfring::{ExpBox, RingDescriptor};

/// Extra p-adic digits carried above the output precision.
const SLACK: u32 = 3;

fn transpose_mod(a: &Mat, r: usize) -> Mat {
    linalg::transpose(a, r)
}

/// Rows spanning the topologically nilpotent part of Fᵀ mod p^prec (closed form used as oracle).
pub fn nil_part(n: &DieudonneModule, prec: u32) -> Result<Mat> {
    let r = n.rank;
    let md = n.modulus(prec)?;
    let ft = transpose_mod(&n.f_mod(prec)?, r);
    let mut t = linalg::identity(r);
    for _ in 0..r * prec as usize {
        t = linalg::mat_mul(&md, &t, &ft, r, r);
    }
    linalg::howell(&md, &linalg::kernel(&md, &t, r)?, r)
}

struct Window {
    lo: i32,
    hi: i32,
}

impl Window {
    fn blocks(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    fn idx(&self, j: i32) -> usize {
        (j - self.lo) as usize
    }
}

fn sigma_at(alpha0: &MultiExp, j: i32, nx: usize) -> Result<u64> {
    Ok(if j < 0 { 0 } else { alpha0.scale_p(j)?.sigma(nx) })
}

/// Solution vectors (a_j)_{lo ≤ j ≤ hi} mod p^prec for one anchor, working with `work` digits.
fn chain_kernel(n: &DieudonneModule, alpha0: &MultiExp, nx: usize, prec: u32, work: u32) -> Result<(Window, Mat)> {
    let r = n.rank;
    let big = work + 2;
    let md = n.modulus(big)?;
    let ft = transpose_mod(&n.f_mod(big)?, r);
    let vt = transpose_mod(&n.v_mod(big)?, r);
    let mut hi = 0;
    while sigma_at(alpha0, hi, nx)? <= prec as u64 {
        hi += 1;
    }
    let win = Window { lo: -((r as u32 * work) as i32), hi };
    let nb = win.blocks();
    let cols = r * nb;
    let mut rows: Mat = Vec::new();
    for j in win.lo + 1..=win.hi {
        let s = sigma_at(alpha0, j - 1, nx)?;
        for i in 0..r {
            let mut row = vec![0; cols];
            if j <= 0 {
                // a_{j−1} = Fᵀ a_j
                row[win.idx(j) * r..win.idx(j) * r + r].copy_from_slice(&ft[i]);
                let c = win.idx(j - 1) * r + i;
                row[c] = md.sub(row[c], 1);
            } else {
                // Fᵀ a_j = p^s a_{j−1} with s ≥ 1 is a_j = p^{s−1} Vᵀ a_{j−1}, as VᵀFᵀ = p
                if s == 0 {
                    return Err(Error::Precondition(format!("anchor {alpha0} has σ = 0")));
                }
                let ps = if s > big as u64 { 0 } else { md.pow(n.p as u64, s - 1) };
                row[win.idx(j) * r + i] = 1;
                for k in 0..r {
                    let c = win.idx(j - 1) * r + k;
                    row[c] = md.sub(row[c], md.mul(ps, vt[i][k]));
                }
            }
            rows.push(row);
        }
    }
    // a_lo ∈ p^work: everything below the window is ≡ 0 mod p^work
    let pw = md.pow(n.p as u64, (big - work) as u64);
    for i in 0..r {
        let mut row = vec![0; cols];
        row[win.idx(win.lo) * r + i] = pw;
        rows.push(row);
    }
    let sat = linalg::saturated_kernel(&md, &rows, cols, prec)?;
    if sat.ambiguous > 0 {
        return Err(Error::PrecisionExhausted(format!("chain at {alpha0}: {} undecided directions", sat.ambiguous)));
    }
    Ok((win, sat.basis))
}

fn materialize(desc: &RingDescriptor, alpha0: &MultiExp, win: &Window, r: usize, v: &[u64], prec: u32) -> Result<Vec<DividedSeries>> {
    (0..r)
        .map(|i| {
            let mut terms = Vec::new();
            for j in win.lo..=win.hi {
                let c = v[win.idx(j) * r + i];
                if c != 0 {
                    terms.push((alpha0.scale_p(j)?, c as i64));
                }
            }
            DividedSeries::from_terms(*desc, terms, prec)
        })
        .collect()
}

/// Coordinates (basis index, exponent) covering every term of the generators.
pub(super) fn coords_of(gens: &[Vec<DividedSeries>]) -> Vec<(usize, MultiExp)> {
    let mut c: Vec<(usize, MultiExp)> =
        gens.iter().flat_map(|g| g.iter().enumerate().flat_map(|(i, u)| u.terms.keys().map(move |a| (i, a.clone())))).collect();
    c.sort();
    c.dedup();
    c
}

/// Coordinate vector of a hom in the given coordinates; None if it has terms outside them.
pub(super) fn coord_vector(coords: &[(usize, MultiExp)], u: &[DividedSeries]) -> Option<Vec<u64>> {
    let mut v = vec![0; coords.len()];
    for (i, s) in u.iter().enumerate() {
        for (a, &c) in &s.terms {
            let k = coords.binary_search(&(i, a.clone())).ok()?;
            v[k] = c;
        }
    }
    Some(v)
}

/// Σ_i F_ij u_i = F(u_j) for every j.
pub fn check_f_equivariant(n: &DieudonneModule, u: &[DividedSeries]) -> Result<bool> {
    for j in 0..n.rank {
        let mut lhs = DividedSeries::zero(u[j].desc, u[j].prec);
        for (i, ui) in u.iter().enumerate() {
            lhs = lhs.add(&ui.scale(n.f[i][j]))?;
        }
        if lhs != u[j].frob_f()? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn block_from(anchor: Option<MultiExp>, gens: Vec<Vec<DividedSeries>>, prec: u32, p: u32) -> Result<ChainBlock<DividedSeries>> {
    let md = Modulus::new(p, prec)?;
    let coords = coords_of(&gens);
    let rows: Mat = gens.iter().map(|g| coord_vector(&coords, g).unwrap()).collect();
    let span = linalg::howell(&md, &rows, coords.len())?;
    let divisors = linalg::span_divisors(&md, &rows, coords.len())?;
    Ok(ChainBlock { anchor, generators: gens, coords, span, span_prec: prec, divisors })
}

fn solve_anchor(n: &DieudonneModule, desc: &RingDescriptor, alpha0: &MultiExp, prec: u32, work: u32) -> Result<Vec<Vec<DividedSeries>>> {
    let (win, basis) = chain_kernel(n, alpha0, desc.n, prec, work)?;
    basis.iter().map(|v| materialize(desc, alpha0, &win, n.rank, v, prec)).collect()
}

fn solve_zero_chain(n: &DieudonneModule, desc: &RingDescriptor, prec: u32) -> Result<Vec<Vec<DividedSeries>>> {
    let r = n.rank;
    let big = prec + 8;
    let md = n.modulus(big)?;
    let mut a = transpose_mod(&n.f_mod(big)?, r);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = md.sub(row[i], 1);
    }
    let sat = linalg::saturated_kernel(&md, &a, r, prec)?;
    if sat.ambiguous > 0 {
        return Err(Error::PrecisionExhausted("exponent-0 chain undecided".into()));
    }
    sat.basis
        .iter()
        .map(|v| v.iter().map(|&c| DividedSeries::constant(*desc, c as i64, prec)).collect())
        .collect()
}

/// Hom_{W(k)[F]}(N, A_cris(C)/p^prec) on the anchors S ∩ box and the exponent-0 chain.
pub fn solve_sw_at(n: &DieudonneModule, desc: &RingDescriptor, bx: &ExpBox, prec: u32) -> Result<SolutionModule<DividedSeries>> {
    n.validate()?;
    if n.p != desc.p {
        return Err(Error::PrimeMismatch(n.p, desc.p));
    }
    let mut blocks = Vec::new();
    let zero = solve_zero_chain(n, desc, prec)?;
    blocks.push(block_from(None, zero, prec, n.p)?);
    for alpha0 in bx.annulus(desc) {
        let gens = solve_anchor(n, desc, &alpha0, prec, prec + SLACK)?;
        // the dropped tails must not matter: more digits give the same span
        let wider = solve_anchor(n, desc, &alpha0, prec, prec + 2 * SLACK)?;
        let b = block_from(Some(alpha0.clone()), gens, prec, n.p)?;
        let w = block_from(Some(alpha0.clone()), wider, prec, n.p)?;
        if b.span != w.span || b.coords != w.coords {
            return Err(Error::Verification(format!("chain at {alpha0} is not stable under more working digits")));
        }
        blocks.push(b);
    }
    for b in &blocks {
        for g in &b.generators {
            if !check_f_equivariant(n, g)? {
                return Err(Error::Verification(format!("generator on chain {:?} is not F-equivariant", b.anchor)));
            }
        }
    }
    Ok(SolutionModule { prec, below_threshold: !bx.meets_threshold(n.p, prec), blocks })
}

/// [`solve_sw_at`] at the ring's precision.
pub fn solve_sw(n: &DieudonneModule, desc: &RingDescriptor, bx: &ExpBox) -> Result<SolutionModule<DividedSeries>> {
    solve_sw_at(n, desc, bx, desc.prec)
}
