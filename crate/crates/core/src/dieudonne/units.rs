//! The split multiplicative side: point groups of (F = p, V = 1)^s are s copies of
//! the unit group generated by E_p(x^α₀), checked against A_cris through log.

use super::sw::coord_vector;
use super::{DieudonneModule, SolutionModule};
use crate::acris::DividedSeries;
use crate::error::{Error, Result};
use crate::linalg;
use crate::multlog::{artin_hasse_unit, log_teich, solve_units};
use crate::padic::{Modulus, MultiExp};
use crate::perfring::{ExpBox, RingDescriptor, TiltPoly};
use std::collections::{BTreeMap, VecDeque};

/// F_p-echelon basis of a finite subgroup of 1 + Ker ν₀ in C♭ / Ker ν_r.
///
/// Elements are sifted by the leading term of u − 1 (least exponent); closing the
/// basis under u ↦ u^p makes |H| = p^{#basis}.
#[derive(Clone, Debug)]
pub struct UnitSifter {
    desc: RingDescriptor,
    flat: u32,
    basis: BTreeMap<MultiExp, TiltPoly>,
}

impl UnitSifter {
    pub fn new(desc: RingDescriptor, flat: u32) -> Self {
        UnitSifter { desc, flat, basis: BTreeMap::new() }
    }

    fn lead(&self, u: &TiltPoly) -> Option<(MultiExp, u32)> {
        let one = self.desc.zero_exp();
        u.terms.iter().find(|(a, _)| **a != one).map(|(a, &c)| (a.clone(), c)).or_else(|| {
            let c0 = u.terms.get(&one).copied().unwrap_or(0);
            (c0 != 1).then(|| (one, (c0 + self.desc.p - 1) % self.desc.p))
        })
    }

    fn normalize(&self, u: &TiltPoly) -> Result<TiltPoly> {
        if u.aug_to_c() != TiltPoly::one(self.desc, Some(0)) {
            return Err(Error::Precondition(format!("{u} is not a unit over 1 + Ker ν₀")));
        }
        u.retag(None).reduce_flat(self.flat)
    }

    /// Reduce u by the basis; the remainder is 1 iff u lies in the span.
    pub fn reduce(&self, u: &TiltPoly) -> Result<TiltPoly> {
        let order = (self.desc.p as u64).pow(self.flat);
        let mut u = self.normalize(u)?;
        while let Some((a, c)) = self.lead(&u) {
            let Some(b) = self.basis.get(&a) else { break };
            u = u.mul(&b.pow_u(order - c as u64)?)?;
        }
        Ok(u)
    }

    pub fn contains(&self, u: &TiltPoly) -> Result<bool> {
        Ok(self.lead(&self.reduce(u)?).is_none())
    }

    /// Add the subgroup generated by `gens`; returns the new log_p of the order.
    pub fn extend(&mut self, gens: impl IntoIterator<Item = TiltPoly>) -> Result<usize> {
        let p = self.desc.p;
        let mut queue: VecDeque<TiltPoly> = gens.into_iter().collect();
        while let Some(g) = queue.pop_front() {
            let u = self.reduce(&g)?;
            let Some((a, c)) = self.lead(&u) else { continue };
            let k = Modulus::new(p, 1)?.inv(c as u64)?;
            let u = u.pow_u(k)?;
            queue.push_back(u.frob()?);
            self.basis.insert(a, u);
        }
        Ok(self.basis.len())
    }

    pub fn log_order(&self) -> usize {
        self.basis.len()
    }
}

fn unit_generators(desc: &RingDescriptor, bx: &ExpBox, flat: u32) -> Result<Vec<TiltPoly>> {
    bx.annulus(desc)
        .into_iter()
        .map(|a| Ok(artin_hasse_unit(&TiltPoly::monomial(*desc, a, 1, None), flat)?.get().clone()))
        .collect()
}

/// Elementary divisors of H_A^s mod p^N, H_A = ⟨E_p(x^α₀) : α₀ ∈ S ∩ box⟩ ⊂ (C♭/Ker ν_N)^×.
///
/// p^k H = Frob^k H, so h_k − h_{k+1} counts the cyclic factors of order > p^k.
pub fn unit_group_divisors(desc: &RingDescriptor, bx: &ExpBox, s: usize, prec: u32) -> Result<Vec<u32>> {
    let mut gens = unit_generators(desc, bx, prec)?;
    let mut h = Vec::new();
    for _ in 0..=prec {
        let mut sift = UnitSifter::new(*desc, prec);
        h.push(sift.extend(gens.iter().cloned())?);
        gens = gens.iter().map(|g| g.frob()).collect::<Result<_>>()?;
    }
    let gt: Vec<usize> = (0..prec as usize).map(|k| h[k] - h[k + 1]).chain([0]).collect();
    let mut out = Vec::new();
    for k in 0..prec as usize {
        out.extend(std::iter::repeat_n(k as u32 + 1, (gt[k] - gt[k + 1]) * s));
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    Ok(out)
}

/// Outcome of the two unit-group round trips on one split multiplicative module.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct UnitRoundTrip {
    /// every A_cris solution component u satisfies log(solve_units(u)) = u with solve_units(u) ∈ H_A
    pub from_acris: bool,
    /// log E_p(x^α₀) lies in the A_cris solution span for every anchor and basis vector
    pub from_units: bool,
    /// first failing element, printed
    pub counterexample: Option<String>,
}

impl UnitRoundTrip {
    pub fn ok(&self) -> bool {
        self.from_acris && self.from_units
    }
}

/// Round trips between solve_sw on (F = p, V = 1)^s and the unit group.
pub fn unit_round_trip(
    n: &DieudonneModule,
    desc: &RingDescriptor,
    bx: &ExpBox,
    sw: &SolutionModule<DividedSeries>,
) -> Result<UnitRoundTrip> {
    if !n.is_split_multiplicative() {
        return Err(Error::Precondition("unit-group oracle needs F = p·I, V = I".into()));
    }
    let prec = sw.prec;
    let mut sift = UnitSifter::new(*desc, prec);
    sift.extend(unit_generators(desc, bx, prec)?)?;
    let mut rt = UnitRoundTrip { from_acris: true, from_units: true, counterexample: None };
    for b in &sw.blocks {
        for g in &b.generators {
            for u in g {
                if u.is_zero() {
                    continue;
                }
                let c = solve_units(u, bx)?;
                let back = log_teich(&c, prec)?;
                if !sift.contains(c.get())? || back != *u {
                    rt.from_acris = false;
                    rt.counterexample.get_or_insert_with(|| format!("u = {u}, c = {}", c.get()));
                }
            }
        }
    }
    let md = Modulus::new(n.p, prec)?;
    for a in bx.annulus(desc) {
        let c = artin_hasse_unit(&TiltPoly::monomial(*desc, a.clone(), 1, None), prec)?;
        let l = log_teich(&c, prec)?;
        let block = sw.block(Some(&a));
        for i in 0..n.rank {
            let mut hom = vec![DividedSeries::zero(*desc, prec); n.rank];
            hom[i] = l.clone();
            let inside = match block.and_then(|b| coord_vector(&b.coords, &hom).map(|v| (b, v))) {
                Some((b, v)) => linalg::in_span(&md, &b.span, &v)?,
                None => false,
            };
            if !inside {
                rt.from_units = false;
                rt.counterexample.get_or_insert_with(|| format!("log E_p(x^{a}) = {l} in slot {i}"));
            }
        }
    }
    Ok(rt)
}
