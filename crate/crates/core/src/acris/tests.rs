use super::*;
use crate::padic::PExp;
use proptest::prelude::*;

fn d(p: u32, n: usize, prec: u32) -> RingDescriptor {
    RingDescriptor::new(p, n, 0, prec).unwrap()
}

fn e1(p: u32, num: u64, den: u32) -> MultiExp {
    MultiExp(vec![PExp::new(num, den, p).unwrap()])
}

fn ds(p: u32, prec: u32, v: &[(u64, u32, i64)]) -> DividedSeries {
    DividedSeries::from_terms(d(p, 1, prec), v.iter().map(|&(a, b, c)| (e1(p, a, b), c)), prec).unwrap()
}

fn icris(z: DividedSeries) -> IcrisWitness {
    IcrisWitness::new(z).unwrap()
}

#[test]
fn product_examples() {
    assert_eq!(ds(2, 3, &[(1, 0, 1)]).mul(&ds(2, 3, &[(1, 0, 1)])).unwrap(), ds(2, 3, &[(2, 0, 2)]));
    assert_eq!(ds(2, 3, &[(2, 0, 1)]).mul(&ds(2, 3, &[(2, 0, 1)])).unwrap(), ds(2, 3, &[(4, 0, 2)]));
    let a = ds(2, 3, &[(5, 1, 3)]);
    assert_eq!(a.mul(&DividedSeries::one(a.desc, 3)).unwrap(), a);
}

#[test]
fn gamma_examples() {
    assert_eq!(gamma(2, &icris(ds(2, 3, &[(1, 0, 1)]))).unwrap(), ds(2, 3, &[(2, 0, 1)]));
    assert_eq!(gamma(2, &icris(ds(2, 3, &[(0, 0, 2)]))).unwrap(), ds(2, 3, &[(0, 0, 2)]));
    let g = gamma(2, &icris(ds(2, 2, &[(1, 0, 1), (0, 0, 2)]))).unwrap();
    assert_eq!(g, ds(2, 2, &[(2, 0, 1), (1, 0, 2), (0, 0, 2)]));
    assert!(IcrisWitness::new(ds(2, 2, &[(0, 0, 1)])).is_err());
}

#[test]
fn frob_examples() {
    assert_eq!(ds(2, 3, &[(1, 1, 1)]).frob_f().unwrap(), ds(2, 3, &[(1, 0, 1)]));
    assert_eq!(ds(2, 3, &[(2, 0, 1)]).frob_f().unwrap(), ds(2, 3, &[(4, 0, 4)]));
    assert_eq!(ds(2, 3, &[(1, 0, 1)]).frob_f().unwrap(), ds(2, 3, &[(2, 0, 2)]));
}

fn ws(p: u32, prec: u32, v: &[(u64, u32, i64)]) -> WittSeries {
    WittSeries::from_terms(d(p, 1, prec), v.iter().map(|&(a, b, c)| (e1(p, a, b), c)), prec).unwrap()
}

#[test]
fn psi_examples() {
    for p in [2u32, 3] {
        assert_eq!(psi(&ws(p, 3, &[(0, 0, p as i64)])).unwrap(), ds(p, 2, &[(0, 0, 1)]));
        assert_eq!(psi(&ws(p, 3, &[(1, 0, 1)])).unwrap(), ds(p, 2, &[(p as u64, 0, 1)]));
        let b = ws(p, 2, &[(1, 1, 1), (2, 0, 5), (0, 0, 1)]);
        let pb = ws(p, 3, &[(1, 1, p as i64), (2, 0, 5 * p as i64), (0, 0, p as i64)]);
        assert_eq!(psi(&pb).unwrap(), DividedSeries::embed_witt(&b.frob().unwrap()));
    }
    assert!(psi(&ws(2, 3, &[(0, 0, 1)])).is_err());
}

#[test]
fn fprime_examples() {
    assert_eq!(fprime(&icris(ds(2, 3, &[(1, 1, 2)]))).unwrap(), ds(2, 2, &[(1, 0, 1)]));
    assert_eq!(fprime(&icris(ds(2, 3, &[(1, 0, 1)]))).unwrap(), ds(2, 2, &[(2, 0, 1)]));
    let g = gamma(2, &icris(ds(2, 3, &[(1, 0, 1)]))).unwrap();
    assert_eq!(fprime(&icris(g)).unwrap(), ds(2, 2, &[(4, 0, 2)]));
}

#[test]
fn beta_examples() {
    assert!(ds(2, 2, &[(2, 0, 1)]).beta().is_zero());
    assert_eq!(ds(2, 2, &[(0, 0, 3)]).beta().series, ws(2, 2, &[(0, 0, 3)]));
    let u = DividedSeries::embed_witt(&ws(2, 2, &[(1, 0, 1), (1, 3, 2)]));
    assert_eq!(u.beta().series, ws(2, 2, &[(1, 3, 2)]));
}

#[test]
fn aprime_examples() {
    let r = ds(2, 1, &[(2, 0, 1)]).aprime_tests();
    assert!(r.in_a_prime);
    assert_eq!(r.coords.unwrap()[0].1.value, 1);
    let r = ds(2, 3, &[(4, 0, 1)]).aprime_tests();
    assert!(!r.in_a_prime && r.coords.is_none());
    let w = DividedSeries::embed_witt(&ws(2, 3, &[(4, 0, 1), (7, 1, 3), (1, 2, 1)]));
    assert!(w.aprime_tests().in_a_prime);
}

// ---- random elements ----

fn exp_strat(p: u32, n: usize) -> impl Strategy<Value = MultiExp> {
    proptest::collection::vec((0u64..(3 * p as u64 * p as u64), 0u32..3), n)
        .prop_map(move |v| MultiExp(v.into_iter().map(|(a, b)| PExp::new(a, b, p).unwrap()).collect()))
}

fn series_strat(p: u32, n: usize, prec: u32) -> impl Strategy<Value = DividedSeries> {
    proptest::collection::vec((exp_strat(p, n), 0i64..1000), 0..4)
        .prop_map(move |v| DividedSeries::from_terms(d(p, n, prec), v, prec).unwrap())
}

fn icris_strat(p: u32, n: usize, prec: u32) -> impl Strategy<Value = IcrisWitness> {
    series_strat(p, n, prec).prop_map(move |z| {
        let pp = p as u64;
        let terms = z
            .terms
            .iter()
            .map(|(a, c)| (a.clone(), if a.any_x_ge(n, 0) { *c as i64 } else { (*c * pp) as i64 }))
            .collect::<Vec<_>>();
        IcrisWitness::new(DividedSeries::from_terms(z.desc, terms, prec).unwrap()).unwrap()
    })
}

fn witt_strat(p: u32, n: usize, prec: u32) -> impl Strategy<Value = WittSeries> {
    proptest::collection::vec((exp_strat(p, n), 0i64..1000), 0..4)
        .prop_map(move |v| WittSeries::from_terms(d(p, n, prec), v, prec).unwrap())
}

/// Kernel of W(C♭) → C: reduction mod p has every monomial with an x-exponent ≥ 1.
fn witt_ker_strat(p: u32, n: usize, prec: u32) -> impl Strategy<Value = WittSeries> {
    witt_strat(p, n, prec).prop_map(move |w| {
        let pp = p as i64;
        let terms = w.terms.iter().map(|(a, c)| (a.clone(), if a.any_x_ge(n, 0) { *c as i64 } else { *c as i64 * pp }));
        WittSeries::from_terms(w.desc, terms.collect::<Vec<_>>(), prec).unwrap()
    })
}

fn prime() -> impl Strategy<Value = u32> {
    prop_oneof![Just(2u32), Just(3u32)]
}

/// F′ through the defining identities only.
fn fprime_by_identities(z: &IcrisWitness) -> DividedSeries {
    let z = z.get();
    let (desc, n, p) = (z.desc, z.desc.n, z.desc.p as u64);
    let out = z.prec - 1;
    let mut acc = DividedSeries::zero(desc, out);
    for (a, c) in &z.terms {
        let t = if !a.any_x_ge(n, 0) {
            // F′(p·b) = F(b)
            DividedSeries::from_terms(desc, [(a.clone(), (c / p) as i64)], out).unwrap().frob_f().unwrap()
        } else {
            let i0 = (0..n).find(|&i| a.0[i].floor() >= 1).unwrap();
            let k = a.0[i0].floor();
            let mut rest = a.clone();
            rest.0[i0] = a.0[i0].checked_sub(&PExp::int(k, desc.p)).unwrap();
            let f_rest = DividedSeries::from_terms(desc, [(rest, *c as i64)], out).unwrap().frob_f().unwrap();
            // F′(x_i) = ψ([x_i])
            let xi = WittSeries::monomial(desc, desc.unit_exp(i0), 1, out + 1).unwrap();
            let fx = psi(&xi).unwrap();
            // M_k = u(k!) γ_k(x_i), F′(γ_k(b)) = p^{k-1}/k! F′(b)^k
            let md = fx.modulus();
            let g = power_divide(&fx, k, k - 1).unwrap().scale(fact_unit(k, &md) as i64);
            f_rest.mul(&g).unwrap()
        };
        acc = acc.add(&t).unwrap();
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ring_axioms((a, b, c) in prime().prop_flat_map(|p| (series_strat(p, 2, 3), series_strat(p, 2, 3), series_strat(p, 2, 3)))) {
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&b.add(&c).unwrap()).unwrap(), a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.frob_f().unwrap().mul(&b.frob_f().unwrap()).unwrap(), a.mul(&b).unwrap().frob_f().unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn embed_is_ring_hom((a, b) in prime().prop_flat_map(|p| (witt_strat(p, 1, 3), witt_strat(p, 1, 3)))) {
        let e = DividedSeries::embed_witt;
        prop_assert_eq!(e(&a.mul(&b).unwrap()), e(&a).mul(&e(&b)).unwrap());
        prop_assert_eq!(e(&a.add(&b).unwrap()), e(&a).add(&e(&b)).unwrap());
        prop_assert_eq!(e(&a).beta(), wc_normal_form(&a));
    }

    #[test]
    fn pd_axioms(z in icris_strat(2, 1, 3), y in icris_strat(2, 1, 3), r in series_strat(2, 1, 3), m in 1u64..5, b in 1u64..4) {
        let g = |k, w: &IcrisWitness| gamma(k, w).unwrap();
        prop_assert_eq!(g(m, &z), gamma_via_power(m, &z).unwrap());
        let zy = icris(z.get().add(y.get()).unwrap());
        let mut sum = DividedSeries::zero(z.get().desc, 3);
        for i in 0..=m {
            sum = sum.add(&g(i, &z).mul(&g(m - i, &y)).unwrap()).unwrap();
        }
        prop_assert_eq!(g(m, &zy), sum);
        let binom = (1..=b).fold(1i64, |acc, k| acc * (m + k) as i64 / k as i64);
        prop_assert_eq!(g(m, &z).mul(&g(b, &z)).unwrap(), g(m + b, &z).scale(binom));
        let rz = icris(r.mul(z.get()).unwrap());
        prop_assert_eq!(g(m, &rz), r.pow(m).unwrap().mul(&g(m, &z)).unwrap());
    }

    #[test]
    fn pd_axioms_p3(z in icris_strat(3, 2, 2), m in 1u64..5) {
        prop_assert_eq!(gamma(m, &z).unwrap(), gamma_via_power(m, &z).unwrap());
    }

    #[test]
    fn fprime_identities((b, z, w, x) in prime().prop_flat_map(|p| (series_strat(p, 2, 3), icris_strat(p, 2, 3), witt_ker_strat(p, 2, 4), witt_strat(p, 2, 3)))) {
        // F(b) = F′(pb)
        let pb = icris(b.mul_p_raise().unwrap());
        prop_assert_eq!(fprime(&pb).unwrap(), b.frob_f().unwrap());
        // F′(γ_k(z)) = p^{k-1}/k! F′(z)^k
        for k in 1..=4u64 {
            let lhs = fprime(&icris(gamma(k, &z).unwrap())).unwrap();
            let rhs = power_divide(&fprime(&z).unwrap(), k, k - 1).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
        // F′ = (p−1)!γ_p + δ on Ker(W(C♭) → C)
        let ew = icris(DividedSeries::embed_witt(&w));
        prop_assert_eq!(fprime(&ew).unwrap(), psi(&w).unwrap().reduce_prec(3).unwrap());
        // p·F′ = F
        let fz = fprime(&z).unwrap();
        prop_assert_eq!(fz.mul_p_raise().unwrap(), z.get().frob_f().unwrap());
        // F′V = id
        let vx = icris(DividedSeries::embed_witt(&x.ver().unwrap()));
        prop_assert_eq!(fprime(&vx).unwrap(), DividedSeries::embed_witt(&x));
        // F-linearity
        let bz = icris(b.mul(z.get()).unwrap());
        prop_assert_eq!(fprime(&bz).unwrap(), b.frob_f().unwrap().reduce_prec(2).unwrap().mul(&fz).unwrap());
        // identity-driven evaluation agrees with the closed form
        prop_assert_eq!(fprime_by_identities(&z), fz);
    }

    #[test]
    fn beta_properties((a, b, z) in prime().prop_flat_map(|p| (series_strat(p, 1, 3), series_strat(p, 1, 3), icris_strat(p, 1, 3)))) {
        prop_assert_eq!(a.mul(&b).unwrap().beta(), a.beta().mul(&b.beta()).unwrap());
        prop_assert_eq!(a.add(&b).unwrap().beta(), a.beta().add(&b.beta()).unwrap());
        let bz = z.get().beta();
        if bz.in_image_of_v() {
            prop_assert_eq!(fprime(&z).unwrap().beta(), bz.ver_inv().unwrap());
        }
    }
}

// ---- universal map and base change ----

fn tilt(p: u32, v: &[(u64, u32)]) -> TiltPoly {
    TiltPoly::from_terms(d(p, 1, 2), v.iter().map(|&(a, b)| (e1(p, a, b), 1)), None)
}

fn noise_strat(p: u32, n: u32, k: usize) -> impl Strategy<Value = Vec<WCElement>> {
    proptest::collection::vec(witt_strat(p, 1, n), k).prop_map(move |v| v.iter().map(|w| wc_normal_form(&w.scale(p as i64))).collect())
}

#[test]
fn universal_map_on_generators() {
    for p in [2u32, 3] {
        let cs = [tilt(p, &[(1, 0)]), tilt(p, &[(2 * p as u64 - 1, 1)]), tilt(p, &[(1, 0), (p as u64 * p as u64 + 1, 2)])];
        let us = [tilt(p, &[(1, 1)]), tilt(p, &[(0, 0), (1, 2)]), tilt(p, &[(1, 2), (1, 0)])];
        let rep = universality_on_generators(&cs, &us, 2 * p as u64 + 1, 2, Vec::new).unwrap();
        assert!(rep.ok(), "{rep:?}");
        assert_eq!(rep.checked, 3 * (2 * p as usize + 1) + 3 * 2);
    }
}

#[test]
fn universal_map_examples() {
    // [x^{1/2}] ↦ w̄_2([x^{1/8}], 0, 0) = [x^{1/8}]^4 = [x^{1/2}]
    let c = tilt(2, &[(1, 1)]);
    let w = WittSeries::teich(&c, 2).unwrap();
    assert_eq!(universal_witt(&w, 2, &[]).unwrap(), teich_wc(&c.aug_to_c(), 2).unwrap());
    // [x] maps to 0 in W(C)
    let w = WittSeries::teich(&tilt(2, &[(1, 0)]), 2).unwrap();
    assert!(universal_witt(&w, 2, &[]).unwrap().is_zero());
    assert_eq!(alpha_n(&tilt(2, &[(1, 0)]), 2).unwrap(), tilt(2, &[(1, 2)]).aug_to_c());
}

#[test]
fn gamma_wc_examples() {
    let desc = d(2, 1, 2);
    // γ_2(2) = 2 in W(F_2)/4
    let two = WCElement::one(desc, 2).scale(2);
    assert_eq!(gamma_wc(2, &two).unwrap(), two);
    assert!(gamma_wc(2, &WCElement::one(desc, 2)).is_err());
}

#[test]
fn base_change_box_bijection() {
    let src = d(2, 1, 2);
    let target = RingDescriptor::new(2, 1, 1, 2).unwrap();
    assert!(base_change_bijection(&src, &target, &crate::perfring::ExpBox::new(2, 2).unwrap()).unwrap());
    assert!(base_change_bijection(&d(3, 1, 2), &RingDescriptor::new(3, 1, 1, 2).unwrap(), &crate::perfring::ExpBox::new(2, 3).unwrap()).unwrap());
}

fn y_witt_strat(prec: u32) -> impl Strategy<Value = WittSeries> {
    let target = RingDescriptor::new(2, 1, 1, prec).unwrap();
    proptest::collection::vec(((0u64..12, 0u32..3), 0i64..1000), 0..4).prop_map(move |v| {
        let terms = v.into_iter().map(|((a, b), c)| (MultiExp(vec![PExp::zero(2), PExp::new(a, b, 2).unwrap()]), c));
        WittSeries::from_terms(target, terms.collect::<Vec<_>>(), prec).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    /// w̄_2 ∘ α_2 does not depend on the lifts of the coordinates.
    #[test]
    fn universal_lift_independence(w in witt_strat(2, 1, 2), noise in noise_strat(2, 2, 3)) {
        let plain = universal_witt(&w, 2, &[]).unwrap();
        prop_assert_eq!(universal_witt(&w, 2, &noise).unwrap(), plain.clone());
        prop_assert_eq!(plain, DividedSeries::embed_witt(&w).beta_n(2).unwrap());
    }

    #[test]
    fn base_change_is_multiplicative(a in series_strat(2, 1, 2), a2 in series_strat(2, 1, 2), b in y_witt_strat(2), b2 in y_witt_strat(2)) {
        let lhs = base_change(&a.mul(&a2).unwrap(), &b.mul(&b2).unwrap()).unwrap();
        let rhs = base_change(&a, &b).unwrap().mul(&base_change(&a2, &b2).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
