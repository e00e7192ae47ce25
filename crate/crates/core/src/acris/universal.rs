//! The initial map A_cris(C)/p^n → W_n(C) built from w̄_n, and base change along F_p → F_p[y^{1/p^∞}].

use super::{gamma, DividedSeries, IcrisWitness};
use crate::error::{Error, Result};
use crate::padic::{s_int, Modulus, MultiExp, PExp};
use crate::perfring::{wc::wc_normal_form, ExpBox, RingDescriptor, TiltPoly, WCElement, WittSeries};
use crate::wittgen::bar_w_n;

/// ν₀ ∘ Fr^{−n}: C♭ → C.
pub fn alpha_n(c: &TiltPoly, n: u32) -> Result<TiltPoly> {
    Ok(c.retag(None).frob_inv_iter(n)?.aug_to_c())
}

/// Teichmüller representative of an element of C in W(C)/p^n.
pub fn teich_wc(a: &TiltPoly, n: u32) -> Result<WCElement> {
    Ok(wc_normal_form(&WittSeries::teich(&a.retag(None), n)?))
}

/// w̄_n ∘ α_n on an element of W(C♭), with coordinate lifts [a_j] + noise_j.
///
/// `noise` entries must lie in the kernel V W(C) of W(C)/p^n → C; missing entries are zero.
pub fn universal_witt(w: &WittSeries, n: u32, noise: &[WCElement]) -> Result<WCElement> {
    if n == 0 {
        return Err(Error::Invalid("n must be positive".into()));
    }
    let desc = w.desc;
    let digits = w.digit_extract()?;
    let mut lifts = Vec::with_capacity(n as usize + 1);
    for j in 0..=n as usize {
        let a = match digits.get(j) {
            Some(c) => alpha_n(c, n)?,
            None => TiltPoly::zero(desc, Some(0)),
        };
        let mut l = teich_wc(&a, n)?;
        if let Some(e) = noise.get(j) {
            if !e.in_image_of_v() {
                return Err(Error::Precondition(format!("lift noise {e} is not in V W(C)")));
            }
            l = l.add(&e.reduce_prec(n)?)?;
        }
        lifts.push(l);
    }
    Ok(bar_w_n(desc.p, &lifts))
}

/// γ_m(V a) = (p^{m−1}/m!) V(a^m) on V W(C) ⊂ W(C)/p^n.
pub fn gamma_wc(m: u64, x: &WCElement) -> Result<WCElement> {
    if m == 0 {
        return Err(Error::Invalid("divided power index 0".into()));
    }
    let (p, n) = (x.desc().p, x.prec());
    if !x.in_image_of_v() {
        return Err(Error::Precondition(format!("{x} is not in V W(C)")));
    }
    if m == 1 {
        return Ok(x.clone());
    }
    if n == 1 {
        // V W(C) is zero mod p
        return Ok(WCElement::zero(x.desc(), 1));
    }
    let a = x.ver_inv()?;
    let vam = wc_normal_form(&a.series.pow(m)?.ver()?);
    let md = Modulus::new(p, n)?;
    let e = m - 1 - s_int(m, p);
    let unit = md.inv(super::fact_unit(m, &md))?;
    let scalar = md.mul(md.pow(p as u64, e), unit);
    Ok(vam.scale(scalar as i64))
}

/// First mismatch of the universal map against β on a generating set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UniversalityReport {
    pub checked: usize,
    pub mismatch: Option<String>,
}

impl UniversalityReport {
    pub fn ok(&self) -> bool {
        self.mismatch.is_none()
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.mismatch.is_none() {
            self.mismatch = Some(what());
        }
    }
}

/// Compare w̄_n ∘ α_n (extended as a PD map) with β mod p^n on γ_m([c]) and V^i[u].
///
/// Elements of `cs` must lie in Ker ν₀; `noise` supplies lift perturbations per generator.
pub fn universality_on_generators(
    cs: &[TiltPoly],
    us: &[TiltPoly],
    max_m: u64,
    n: u32,
    mut noise: impl FnMut() -> Vec<WCElement>,
) -> Result<UniversalityReport> {
    let mut rep = UniversalityReport::default();
    for c in cs {
        let tc = WittSeries::teich(&c.retag(None), n)?;
        let z = IcrisWitness::new(DividedSeries::embed_witt(&tc))?;
        let f = universal_witt(&tc, n, &noise())?;
        for m in 1..=max_m {
            let lhs = gamma_wc(m, &f)?;
            let rhs = gamma(m, &z)?.beta_n(n)?;
            rep.record(lhs == rhs, || format!("γ_{m}([{c}]): {lhs} vs β = {rhs}"));
        }
    }
    for u in us {
        let mut w = WittSeries::teich(&u.retag(None), n)?;
        for i in 0..n {
            let lhs = universal_witt(&w, n, &noise())?;
            let rhs = DividedSeries::embed_witt(&w).beta_n(n)?;
            rep.record(lhs == rhs, || format!("V^{i}[{u}]: {lhs} vs β = {rhs}"));
            w = w.ver()?.reduce_prec(n)?;
        }
    }
    Ok(rep)
}

/// Append zero y-coordinates: the map induced by C → C ⊗_B B′.
pub fn extend_y(u: &DividedSeries, target: &RingDescriptor) -> Result<DividedSeries> {
    if u.desc.p != target.p || u.desc.n != target.n || u.desc.m > target.m {
        return Err(Error::DescriptorMismatch(format!("{:?} does not embed in {:?}", u.desc, target)));
    }
    let pad = target.m - u.desc.m;
    let terms = u.terms.iter().map(|(a, &c)| {
        let mut v = a.0.clone();
        v.extend(std::iter::repeat_n(PExp::zero(target.p), pad));
        (MultiExp(v), c)
    });
    Ok(DividedSeries { desc: *target, terms: terms.collect(), prec: u.prec })
}

/// a ⊗ b ↦ a · b for a ∈ A_cris(C), b ∈ W(B′) given as a y-only Witt series on the target.
pub fn base_change(a: &DividedSeries, b: &WittSeries) -> Result<DividedSeries> {
    let target = b.desc;
    if b.terms.keys().any(|e| e.0[..target.n].iter().any(|x| !x.is_zero())) {
        return Err(Error::Precondition("W(B′) factor has x-exponents".into()));
    }
    let prec = a.prec.min(b.prec);
    extend_y(&a.reduce_prec(prec)?, &target)?.mul(&DividedSeries::embed_witt(&b.reduce_prec(prec)?))
}

/// Whether M_α ⊗ [y^β] ↦ unit · M_{(α,β)} is a bijection of box bases (α in the x-box, β in the y-values).
pub fn base_change_bijection(src: &RingDescriptor, target: &RingDescriptor, bx: &ExpBox) -> Result<bool> {
    let prec = src.prec.min(target.prec);
    let ys = bx.coord_values(target.p);
    let mut hit = std::collections::BTreeSet::new();
    for alpha in bx.points(src) {
        let a = DividedSeries::monomial(*src, alpha.clone(), 1, prec)?;
        for y in &ys {
            let mut e = target.zero_exp();
            e.0[target.n] = *y;
            let b = WittSeries::monomial(*target, e, 1, prec)?;
            let img = base_change(&a, &b)?;
            let mut want = alpha.0.clone();
            want.push(*y);
            want.extend(std::iter::repeat_n(PExp::zero(target.p), target.m - 1));
            let want = MultiExp(want);
            let single = img.terms.len() == 1 && img.terms.get(&want).is_some_and(|&c| c % target.p as u64 != 0);
            if !single || !hit.insert(want) {
                return Ok(false);
            }
        }
    }
    // surjective onto the target box with y in the same range
    let count = bx.points(src).len() * ys.len();
    Ok(hit.len() == count)
}
