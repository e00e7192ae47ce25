//! Hom_{D_k}(N, W(C)) for V topologically nilpotent, the lift to M(C) and the β-pushforward.
//!
//! On the chain α₀/p^k (k ≥ 1) a hom is a sequence b_k ∈ (Z/p^k)^r with
//! b_{k+1} ≡ Fᵀ b_k and p b_{k−1} ≡ Vᵀ b_k mod p^k, Vᵀ b_1 ≡ 0 mod p, and v(b_k) → ∞.
//! Levels are embedded into one Z/p^K via b_k ↦ p^{K−k} b_k, which turns the
//! mixed-modulus system into a linear one.

use super::sw::{coord_vector, solve_sw_at};
use super::{ChainBlock, DieudonneModule, SolutionModule};
use crate::acris::DividedSeries;
use crate::covec::VExpansion;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::padic::{Modulus, MultiExp};
use crate::perfring::{wc::wc_normal_form, ExpBox, RingDescriptor, WCElement, WittSeries};

const CHAIN_SEARCH: u32 = 256;

/// Depths used by the classical solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassicalDepth {
    /// output precision N
    pub prec: u32,
    /// m with V^{m+N} ≡ 0 mod p^N, so that V^m N ⊆ F^N N
    pub m: u32,
    /// levels kept: K = r(N + m + 1)
    pub levels: u32,
    /// levels solved before projecting: rK + r
    pub solved: u32,
}

fn int_pow(a: &[Vec<i64>], e: u32) -> Vec<Vec<i128>> {
    let r = a.len();
    let mut acc: Vec<Vec<i128>> = (0..r).map(|i| (0..r).map(|j| i128::from(i == j)).collect()).collect();
    for _ in 0..e {
        acc = (0..r).map(|i| (0..r).map(|j| (0..r).map(|k| acc[i][k] * a[k][j] as i128).sum()).collect()).collect();
    }
    acc
}

/// Least m with V^{m+N} ≡ 0 mod p^N, over exact matrices.
pub fn lift_m(n: &DieudonneModule, prec: u32) -> Result<u32> {
    let q = (n.p as i128).pow(prec);
    let bound = n.rank as u32 * prec + n.rank as u32 + 1;
    for m in 0..=bound {
        if int_pow(&n.v, m + prec).iter().all(|r| r.iter().all(|&x| x % q == 0)) {
            return Ok(m);
        }
    }
    Err(Error::Precondition("V is not topologically nilpotent".into()))
}

impl ClassicalDepth {
    pub fn new(n: &DieudonneModule, prec: u32) -> Result<Self> {
        let m = lift_m(n, prec)?;
        let r = n.rank.max(1) as u32;
        let levels = r * (prec + m + 1);
        Ok(ClassicalDepth { prec, m, levels, solved: r * levels + r })
    }
}

fn anchor_level(alpha0: &MultiExp, k: u32) -> Result<MultiExp> {
    alpha0.scale_p(-(k as i32))
}

/// Subgroup of (Z/p^K)^{rK} (levels embedded) cut out by the truncated system.
fn level_image(n: &DieudonneModule, levels: u32, solved: u32) -> Result<Mat> {
    let r = n.rank;
    if r == 0 {
        return Ok(Vec::new());
    }
    let md = n.modulus(solved)?;
    let ft = linalg::transpose(&n.f_mod(solved)?, r);
    let vt = linalg::transpose(&n.v_mod(solved)?, r);
    let p = n.p as u64;
    let kk = solved as usize;
    let cols = r * kk;
    let col = |k: usize, i: usize| (k - 1) * r + i;
    let mut rows: Mat = Vec::new();
    for k in 1..=kk {
        for i in 0..r {
            // F: p·y_{k+1} = Fᵀ y_k
            if k < kk {
                let mut row = vec![0; cols];
                row[col(k + 1, i)] = p % md.m;
                for j in 0..r {
                    row[col(k, j)] = md.sub(row[col(k, j)], ft[i][j]);
                }
                rows.push(row);
            }
            // V: y_{k−1} = Vᵀ y_k, and Vᵀ y_1 = 0
            let mut row = vec![0; cols];
            if k > 1 {
                row[col(k - 1, i)] = 1;
            }
            for j in 0..r {
                row[col(k, j)] = md.sub(row[col(k, j)], vt[i][j]);
            }
            rows.push(row);
            // y_k ∈ p^{K'−k} Z/p^{K'}
            if k < kk {
                let mut row = vec![0; cols];
                row[col(k, i)] = md.pow(p, k as u64);
                rows.push(row);
            }
        }
    }
    // decay at the last level: b_{K'} ≡ 0 mod p^{⌊K'/r⌋}
    let keep = solved - solved / r as u32;
    for i in 0..r {
        let mut row = vec![0; cols];
        row[col(kk, i)] = md.pow(p, keep as u64);
        rows.push(row);
    }
    let ker = linalg::kernel(&md, &rows, cols)?;
    let low = n.modulus(levels)?;
    let out: Mat = ker
        .iter()
        .map(|y| {
            (1..=levels as usize)
                .flat_map(|k| {
                    (0..r).map(move |i| {
                        let b = y[col(k, i)] / p.pow(solved - k as u32);
                        low.mul(b % p.pow(k as u32), p.pow(levels - k as u32))
                    })
                })
                .collect()
        })
        .collect();
    linalg::howell(&low, &out, r * levels as usize)
}

/// Read b_k (mod p^min(k, prec)) out of an embedded level vector.
fn levels_to_wc(desc: &RingDescriptor, alpha0: &MultiExp, r: usize, levels: u32, z: &[u64], prec: u32) -> Result<Vec<WCElement>> {
    let p = desc.p as u64;
    (0..r)
        .map(|i| {
            let mut terms = Vec::new();
            for k in 1..=levels {
                let b = z[(k as usize - 1) * r + i] / p.pow(levels - k);
                let b = b % p.pow(k.min(prec));
                if b != 0 {
                    terms.push((anchor_level(alpha0, k)?, b as i64));
                }
            }
            Ok(wc_normal_form(&WittSeries::from_terms(*desc, terms, prec)?))
        })
        .collect()
}

fn wc_coords(alpha0: &MultiExp, r: usize, levels: u32) -> Result<Vec<(usize, MultiExp)>> {
    let mut c = Vec::new();
    for k in 1..=levels {
        for i in 0..r {
            c.push((i, anchor_level(alpha0, k)?));
        }
    }
    Ok(c)
}

/// Embedded level vector of W(C)-values on one chain, projected to the first `levels` levels.
fn wc_to_levels(alpha0: &MultiExp, w: &[WCElement], levels: u32, md: &Modulus) -> Result<Vec<u64>> {
    let r = w.len();
    let p = md.p as u64;
    let mut z = vec![0; r * levels as usize];
    for (i, wi) in w.iter().enumerate() {
        for (a, &c) in &wi.series.terms {
            let k = (1..=CHAIN_SEARCH).find(|&k| anchor_level(alpha0, k).is_ok_and(|b| &b == a));
            let Some(k) = k else {
                return Err(Error::Invalid(format!("term at {a} is off the chain of {alpha0}")));
            };
            if k > levels {
                continue;
            }
            z[(k as usize - 1) * r + i] = md.mul(c % p.pow(k), p.pow(levels - k));
        }
    }
    Ok(z)
}

/// Σ_i X_ij w_i = op(w_j) for X ∈ {F, V}.
fn check_equivariant(n: &DieudonneModule, w: &[WCElement]) -> Result<bool> {
    for j in 0..n.rank {
        let mut lf = WCElement::zero(w[j].desc(), w[j].prec());
        let mut lv = lf.clone();
        for (i, wi) in w.iter().enumerate() {
            lf = lf.add(&wi.scale(n.f[i][j]))?;
            lv = lv.add(&wi.scale(n.v[i][j]))?;
        }
        if lf != w[j].frob()? || lv != w[j].ver()? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn classical_anchor(n: &DieudonneModule, desc: &RingDescriptor, alpha0: &MultiExp, d: &ClassicalDepth) -> Result<ChainBlock<WCElement>> {
    let r = n.rank;
    let img = level_image(n, d.levels, d.solved)?;
    // Mittag-Leffler check: solving deeper leaves the image unchanged
    if level_image(n, d.levels, d.solved + r as u32)? != img {
        return Err(Error::Verification(format!("level image at {alpha0} has not stabilized")));
    }
    let low = n.modulus(d.levels)?;
    let e = linalg::span_divisors(&low, &img, r * d.levels as usize)?;
    let divisors: Vec<u32> = e.iter().map(|&x| x.min(d.prec)).filter(|&x| x > 0).collect();
    let lift_prec = d.prec + d.m;
    let gens = img.iter().map(|z| levels_to_wc(desc, alpha0, r, d.levels, z, lift_prec)).collect::<Result<Vec<_>>>()?;
    for g in &gens {
        if !check_equivariant(n, g)? {
            return Err(Error::Verification(format!("classical generator at {alpha0} is not D-linear")));
        }
    }
    Ok(ChainBlock {
        anchor: Some(alpha0.clone()),
        generators: gens,
        coords: wc_coords(alpha0, r, d.levels)?,
        span: img,
        span_prec: d.levels,
        divisors,
    })
}

fn classical_zero(n: &DieudonneModule, desc: &RingDescriptor, d: &ClassicalDepth) -> Result<ChainBlock<WCElement>> {
    let r = n.rank;
    let lift_prec = d.prec + d.m;
    let big = lift_prec + 8;
    let md = n.modulus(big)?;
    let ft = linalg::transpose(&n.f_mod(big)?, r);
    let vt = linalg::transpose(&n.v_mod(big)?, r);
    let mut rows: Mat = Vec::new();
    for i in 0..r {
        let mut a = ft[i].clone();
        a[i] = md.sub(a[i], 1);
        rows.push(a);
        let mut b = vt[i].clone();
        b[i] = md.sub(b[i], n.p as u64);
        rows.push(b);
    }
    let sat = linalg::saturated_kernel(&md, &rows, r, lift_prec)?;
    if sat.ambiguous > 0 {
        return Err(Error::PrecisionExhausted("exponent-0 chain undecided".into()));
    }
    let gens: Vec<Vec<WCElement>> = sat
        .basis
        .iter()
        .map(|v| v.iter().map(|&c| Ok(wc_normal_form(&WittSeries::constant(*desc, c as i64, lift_prec)?))).collect())
        .collect::<Result<_>>()?;
    let low = n.modulus(d.prec)?;
    let span_rows: Mat = sat.basis.iter().map(|v| v.iter().map(|&c| low.reduce(c)).collect()).collect();
    Ok(ChainBlock {
        anchor: None,
        generators: gens,
        coords: (0..r).map(|i| (i, desc.zero_exp())).collect(),
        span: linalg::howell(&low, &span_rows, r)?,
        span_prec: d.prec,
        divisors: linalg::span_divisors(&low, &span_rows, r)?,
    })
}

/// Hom_{D_k}(N, W(C)) on S ∩ box and the exponent-0 chain; generators carry N + m digits for lifting.
pub fn solve_classical(n: &DieudonneModule, desc: &RingDescriptor, bx: &ExpBox) -> Result<SolutionModule<WCElement>> {
    n.validate()?;
    if n.p != desc.p {
        return Err(Error::PrimeMismatch(n.p, desc.p));
    }
    if !n.v_nilpotent()? {
        return Err(Error::Precondition("V is not topologically nilpotent; use the unit-group side for D″".into()));
    }
    let prec = desc.prec;
    let d = ClassicalDepth::new(n, prec)?;
    let mut blocks = vec![classical_zero(n, desc, &d)?];
    for alpha0 in bx.annulus(desc) {
        blocks.push(classical_anchor(n, desc, &alpha0, &d)?);
    }
    Ok(SolutionModule { prec, below_threshold: !bx.meets_threshold(n.p, prec), blocks })
}

/// x ↦ V^{−m} F^N α(F^{−N} V^m x) on the basis of N.
pub fn lift_to_m(n: &DieudonneModule, alpha: &[WCElement], m: u32, prec: u32) -> Result<Vec<VExpansion>> {
    let r = n.rank;
    if alpha.len() != r {
        return Err(Error::LengthMismatch(alpha.len(), r));
    }
    let q = (n.p as i128).pow(prec);
    let vp = int_pow(&n.v, m + prec);
    if vp.iter().any(|row| row.iter().any(|&x| x % q != 0)) {
        return Err(Error::Precondition(format!("V^{m} N is not inside F^{prec} N")));
    }
    let depth = prec + m;
    let desc = alpha.first().map(|a| a.desc()).ok_or_else(|| Error::Invalid("empty module".into()))?;
    let md = n.modulus(depth)?;
    let mut out = Vec::with_capacity(r);
    for j in 0..r {
        if alpha.iter().any(|a| a.prec() < depth) {
            return Err(Error::PrecisionExhausted(format!("lift needs W(C) values at precision {depth}")));
        }
        let mut y = WittSeries::zero(desc, depth);
        for (i, a) in alpha.iter().enumerate() {
            let c = md.reduce_i128(vp[i][j] / q);
            y = y.add(&a.series.reduce_prec(depth)?.scale(c as i64))?;
        }
        for _ in 0..prec {
            y = y.frob()?;
        }
        let digits = y.digit_extract()?;
        out.push(VExpansion::new(desc, digits.into_iter().enumerate().map(|(i, c)| (i as i32 - m as i32, c)), prec)?);
    }
    Ok(out)
}

/// β applied to every generator, reported in level coordinates mod p^N.
pub fn beta_pushforward(sw: &SolutionModule<DividedSeries>) -> Result<SolutionModule<WCElement>> {
    let prec = sw.prec;
    let mut blocks = Vec::new();
    for b in &sw.blocks {
        let gens: Vec<Vec<WCElement>> =
            b.generators.iter().map(|g| g.iter().map(|u| u.beta_n(prec)).collect::<Result<_>>()).collect::<Result<_>>()?;
        let r = b.generators.first().map_or(0, |g| g.len());
        let md = Modulus::new(sw.blocks.first().and_then(|x| x.generators.first()).map_or(2, |g| g[0].desc.p), prec)?;
        let (coords, rows) = match &b.anchor {
            None => {
                let coords: Vec<(usize, MultiExp)> =
                    (0..r).map(|i| (i, gens[0][0].desc().zero_exp())).collect();
                let rows = gens.iter().map(|g| g.iter().map(|w| w.series.coeff(&coords[0].1)).collect()).collect();
                (coords, rows)
            }
            Some(a) => {
                let rows = gens.iter().map(|g| wc_to_levels(a, g, prec, &md)).collect::<Result<Mat>>()?;
                (wc_coords(a, r, prec)?, rows)
            }
        };
        let cols = coords.len();
        blocks.push(ChainBlock {
            anchor: b.anchor.clone(),
            divisors: linalg::span_divisors(&md, &rows, cols)?,
            span: linalg::howell(&md, &rows, cols)?,
            span_prec: prec,
            coords,
            generators: gens,
        });
    }
    Ok(SolutionModule { prec, below_threshold: sw.below_threshold, blocks })
}

/// Outcome of comparing the two sides of one D′ instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PushforwardCertificate {
    /// β-images of A_cris solutions generate the W(C) solutions modulo p^N
    pub generates: bool,
    /// every lifted W(C) solution maps under f into the A_cris solution span, and back under β
    pub lifts_match: bool,
    /// lifts with m and m + 1 agree
    pub m_independent: bool,
    /// f∘lift∘β is the identity on A_cris generators
    pub round_trip: bool,
}

impl PushforwardCertificate {
    pub fn ok(&self) -> bool {
        self.generates && self.lifts_match && self.m_independent && self.round_trip
    }
}

/// Check the theorem bijection on a D′ module chain by chain.
pub fn pushforward_certificate(
    n: &DieudonneModule,
    desc: &RingDescriptor,
    bx: &ExpBox,
    classical: &SolutionModule<WCElement>,
) -> Result<PushforwardCertificate> {
    let prec = desc.prec;
    let d = ClassicalDepth::new(n, prec)?;
    // A_cris solutions with enough digits to be compared at every kept level
    let deep = solve_sw_at(n, desc, bx, d.levels)?;
    let sw = solve_sw_at(n, desc, bx, prec)?;
    let mut cert = PushforwardCertificate { generates: true, lifts_match: true, m_independent: true, round_trip: true };
    let p = n.p as u64;
    for cb in &classical.blocks {
        let Some(db) = deep.block(cb.anchor.as_ref()) else {
            return Err(Error::Verification("A_cris side lacks a chain".into()));
        };
        let sb = sw.block(cb.anchor.as_ref()).unwrap();
        let md = Modulus::new(n.p, cb.span_prec)?;
        let cols = cb.coords.len();
        // ⟨β(gens), p^N·I⟩ = I
        let mut rows: Mat = Vec::new();
        for g in &db.generators {
            let w: Vec<WCElement> = g.iter().map(|u| u.beta_n(cb.span_prec)).collect::<Result<_>>()?;
            rows.push(match &cb.anchor {
                None => w.iter().map(|x| md.reduce(x.series.coeff(&desc.zero_exp()))).collect(),
                Some(a) => wc_to_levels(a, &w, cb.span_prec, &md)?,
            });
        }
        for row in &rows {
            if !linalg::in_span(&md, &cb.span, row)? {
                cert.generates = false;
            }
        }
        let pp = md.pow(p, prec as u64);
        rows.extend(cb.span.iter().map(|r| r.iter().map(|&x| md.mul(x, pp)).collect::<Vec<_>>()));
        if linalg::span_log_order(&md, &rows, cols)? != linalg::span_log_order(&md, &cb.span, cols)? {
            cert.generates = false;
        }
        let low = Modulus::new(n.p, prec)?;
        let in_sw = |u: &[DividedSeries]| -> Result<bool> {
            match coord_vector(&sb.coords, u) {
                Some(v) => linalg::in_span(&low, &sb.span, &v),
                None => Ok(u.iter().all(|x| x.is_zero())),
            }
        };
        for g in &cb.generators {
            let lifted = lift_to_m(n, g, d.m, prec)?;
            let image: Vec<DividedSeries> = lifted.iter().map(crate::covec::f_map).collect::<Result<_>>()?;
            let back: Vec<WCElement> = lifted.iter().map(|x| x.canonical_epi()).collect::<Result<_>>()?;
            let want: Vec<WCElement> = g.iter().map(|w| w.reduce_prec(prec)).collect::<Result<_>>()?;
            if !super::sw::check_f_equivariant(n, &image)? || !in_sw(&image)? || back != want {
                cert.lifts_match = false;
            }
        }
        // lift independence in m: the generators only carry N + m digits, so compare on β-images of deep solutions
        for g in &db.generators {
            let w: Vec<WCElement> = g.iter().map(|u| u.beta_n(prec + d.m + 1)).collect::<Result<_>>()?;
            let a = lift_to_m(n, &w, d.m, prec)?;
            let b = lift_to_m(n, &w, d.m + 1, prec)?;
            let fa: Vec<DividedSeries> = a.iter().map(crate::covec::f_map).collect::<Result<_>>()?;
            let fb: Vec<DividedSeries> = b.iter().map(crate::covec::f_map).collect::<Result<_>>()?;
            if fa != fb {
                cert.m_independent = false;
            }
            let orig: Vec<DividedSeries> = g.iter().map(|u| u.reduce_prec(prec)).collect::<Result<_>>()?;
            if fa != orig {
                cert.round_trip = false;
            }
        }
    }
    Ok(cert)
}
