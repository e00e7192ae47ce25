use super::*;
use crate::covec::f_map;
use crate::perfring::{ExpBox, RingDescriptor, WCElement};
use proptest::prelude::*;

fn ring(p: u32, prec: u32) -> RingDescriptor {
    RingDescriptor::new(p, 1, 0, prec).unwrap()
}

fn bx(e: u32, d: u64) -> ExpBox {
    ExpBox::new(e, d).unwrap()
}

fn conj_example(p: u32) -> DieudonneModule {
    // etale ⊕ mult in the basis (e₁, e₁ + e₂)
    let p = p as i64;
    DieudonneModule::new(p as u32, vec![vec![1, 1 - p], vec![0, p]], vec![vec![p, p - 1], vec![0, 1]], 4).unwrap()
}

#[test]
fn etale_has_constant_generator() {
    let desc = ring(2, 2);
    let sol = solve_sw(&DieudonneModule::etale(2, 1, 2), &desc, &bx(3, 8)).unwrap();
    assert_eq!(sol.divisors(), vec![2]);
    assert_eq!(sol.generator_count(), 1);
    let zero = sol.block(None).unwrap();
    assert_eq!(zero.generators[0][0], crate::acris::DividedSeries::one(desc, 2));
    assert!(!sol.below_threshold);
}

#[test]
fn multiplicative_dimension_two() {
    let sol = solve_sw(&DieudonneModule::multiplicative(2, 1, 1), &ring(2, 1), &bx(2, 4)).unwrap();
    assert_eq!(sol.divisors(), vec![1, 1]);
    assert!(sol.block(None).unwrap().generators.is_empty());
}

#[test]
fn supersingular_sides_agree() {
    let n = DieudonneModule::supersingular(2, 1);
    let desc = ring(2, 1);
    let b = bx(2, 4);
    let sw = solve_sw(&n, &desc, &b).unwrap();
    let cl = solve_classical(&n, &desc, &b).unwrap();
    assert_eq!(sw.divisors(), cl.divisors());
    // two anchors {1, 3/2}, each a free rank-2 block
    assert_eq!(sw.divisors(), vec![1, 1, 1, 1]);
    let cert = pushforward_certificate(&n, &desc, &b, &cl).unwrap();
    assert!(cert.ok(), "{cert:?}");
}

#[test]
fn zero_module() {
    let n = DieudonneModule::zero(2, 2);
    let desc = ring(2, 2);
    assert!(solve_sw(&n, &desc, &bx(3, 8)).unwrap().divisors().is_empty());
    assert!(solve_classical(&n, &desc, &bx(3, 8)).unwrap().divisors().is_empty());
}

#[test]
fn corrupted_module_rejected() {
    let mut n = DieudonneModule::supersingular(2, 2);
    n.f[0][1] = 3;
    assert!(matches!(n.validate(), Err(Error::Invalid(_))));
    assert!(solve_sw(&n, &ring(2, 2), &bx(3, 8)).is_err());
    let suite = [SuiteEntry { name: "bad".into(), module: n }];
    assert!(matches!(verify_theorem(&suite, &ring(2, 2), &bx(3, 8), false), Err(Error::Invalid(_))));
    assert!(DieudonneModule::new(2, vec![vec![1]], vec![vec![1]], 1).is_err());
}

#[test]
fn below_threshold_is_an_error_for_verify() {
    let r = verify_theorem(&default_suite(2, 2), &ring(2, 2), &bx(2, 8), false);
    assert!(matches!(r, Err(Error::Precondition(_))));
    let sol = solve_sw(&DieudonneModule::etale(2, 1, 2), &ring(2, 2), &bx(2, 4)).unwrap();
    assert!(sol.below_threshold);
}

#[test]
fn split_examples() {
    let e = DieudonneModule::etale(2, 1, 3);
    let m = DieudonneModule::multiplicative(2, 1, 3);
    let s = dd_split(&e.direct_sum(&m).unwrap()).unwrap();
    assert_eq!(s.nil, e);
    assert_eq!(s.inv, m);
    let s = dd_split(&m.direct_sum(&e).unwrap()).unwrap();
    assert_eq!((s.nil.rank, s.inv.rank), (1, 1));
    assert_eq!(s.basis, vec![vec![0, 1], vec![1, 0]]);
    let s = dd_split(&DieudonneModule::supersingular(3, 2)).unwrap();
    assert_eq!((s.nil.rank, s.inv.rank), (2, 0));
}

#[test]
fn split_non_permutation_basis() {
    let n = conj_example(2);
    let s = dd_split(&n).unwrap();
    let md = n.modulus(n.prec).unwrap();
    assert!(linalg::inverse(&md, &s.basis).is_ok());
    assert!(s.nil.validate().is_ok() && s.inv.validate().is_ok());
    assert!(s.nil.v_nilpotent().unwrap());
    assert!(s.inv.is_split_multiplicative(), "{:?}", s.inv);
    // idempotent on the pieces
    assert_eq!(dd_split(&s.nil).unwrap().nil, s.nil);
    assert_eq!(dd_split(&s.inv).unwrap().inv, s.inv);
}

#[test]
fn classical_needs_nilpotent_v() {
    let n = DieudonneModule::multiplicative(2, 1, 2);
    assert!(matches!(solve_classical(&n, &ring(2, 2), &bx(3, 8)), Err(Error::Precondition(_))));
    assert!(lift_m(&n, 2).is_err());
}

#[test]
fn lift_m_values() {
    assert_eq!(lift_m(&DieudonneModule::etale(2, 1, 2), 2).unwrap(), 0);
    assert_eq!(lift_m(&DieudonneModule::supersingular(2, 2), 2).unwrap(), 2);
    assert_eq!(lift_m(&DieudonneModule::supersingular(3, 1), 1).unwrap(), 1);
}

#[test]
fn etale_lift_is_constant_one() {
    let desc = ring(2, 2);
    let n = DieudonneModule::etale(2, 1, 2);
    let one = WCElement::one(desc, 2);
    let l = lift_to_m(&n, std::slice::from_ref(&one), 0, 2).unwrap();
    assert_eq!(l[0].canonical_epi().unwrap(), one);
    assert_eq!(f_map(&l[0]).unwrap(), crate::acris::DividedSeries::one(desc, 2));
    let b = beta_pushforward(&solve_sw(&n, &desc, &bx(3, 8)).unwrap()).unwrap();
    assert_eq!(b.block(None).unwrap().generators[0][0], one);
}

#[test]
fn supersingular_lift_matches_acris_generator() {
    let n = DieudonneModule::supersingular(2, 2);
    let desc = ring(2, 2);
    let b = bx(3, 8);
    let cl = solve_classical(&n, &desc, &b).unwrap();
    let sw = solve_sw(&n, &desc, &b).unwrap();
    let m = lift_m(&n, 2).unwrap();
    for blk in cl.blocks.iter().filter(|b| b.anchor.is_some()) {
        let swb = sw.block(blk.anchor.as_ref()).unwrap();
        let md = Modulus::new(2, 2).unwrap();
        for g in &blk.generators {
            let img: Vec<_> = lift_to_m(&n, g, m, 2).unwrap().iter().map(|x| f_map(x).unwrap()).collect();
            let v = sw::coord_vector(&swb.coords, &img).expect("image inside the chain coordinates");
            assert!(linalg::in_span(&md, &swb.span, &v).unwrap());
        }
    }
}

#[test]
fn multiplicative_unit_side() {
    let desc = ring(2, 2);
    let b = bx(3, 8);
    let n = DieudonneModule::multiplicative(2, 1, 2);
    let sw = solve_sw(&n, &desc, &b).unwrap();
    assert_eq!(unit_group_divisors(&desc, &b, 1, 2).unwrap(), sw.divisors());
    assert!(unit_round_trip(&n, &desc, &b, &sw).unwrap().ok());
    // s copies
    assert_eq!(unit_group_divisors(&desc, &b, 2, 2).unwrap().len(), 2 * sw.divisors().len());
}

#[test]
fn sifter_counts_cyclic_group() {
    // ⟨1 + x⟩ in C♭/Ker ν_2 at p = 2: (1+x)^2 = 1 + x², (1+x)^4 = 1 + x⁴ = 1
    let desc = ring(2, 2);
    let one = desc.zero_exp();
    let x = desc.unit_exp(0);
    let u = crate::perfring::TiltPoly::from_terms(desc, [(one, 1), (x, 1)], None);
    let mut s = UnitSifter::new(desc, 2);
    assert_eq!(s.extend([u.clone()]).unwrap(), 2);
    assert!(s.contains(&u.pow_u(3).unwrap()).unwrap());
    let x2 = desc.exp(&[(3, 1)]).unwrap();
    let w = crate::perfring::TiltPoly::from_terms(desc, [(desc.zero_exp(), 1), (x2, 1)], None);
    assert!(!s.contains(&w).unwrap());
}

/// Coefficients at α₀ span Nil(Fᵀ): the chain is determined by its anchor value.
#[test]
fn anchor_values_span_nil_part() {
    let cases = [
        (DieudonneModule::etale(2, 1, 2), 2u32),
        (DieudonneModule::multiplicative(2, 1, 2), 2),
        (DieudonneModule::supersingular(2, 2), 2),
        (DieudonneModule::supersingular(3, 2), 3),
        (conj_example(2), 2),
    ];
    for (n, p) in cases {
        let prec = 2;
        let desc = ring(p, prec);
        let b = bx(3, (p as u64).pow(3));
        let sol = solve_sw(&n, &desc, &b).unwrap();
        let md = Modulus::new(p, prec).unwrap();
        let want = nil_part(&n, prec).unwrap();
        for blk in sol.blocks.iter().filter(|b| b.anchor.is_some()) {
            let a0 = blk.anchor.clone().unwrap();
            let rows: Mat = blk.generators.iter().map(|g| g.iter().map(|u| u.coeff(&a0)).collect()).collect();
            assert_eq!(linalg::howell(&md, &rows, n.rank).unwrap(), want, "{n:?} at {a0}");
        }
    }
}

#[test]
fn box_stability() {
    for (p, small, large) in [(2u32, bx(3, 8), bx(4, 16)), (3, bx(3, 27), bx(4, 81))] {
        let desc = ring(p, 2);
        for e in default_suite(p, 2) {
            let a = solve_sw(&e.module, &desc, &small).unwrap();
            let b = solve_sw(&e.module, &desc, &large).unwrap();
            for blk in &a.blocks {
                assert_eq!(Some(blk), b.block(blk.anchor.as_ref()), "{} at {:?}", e.name, blk.anchor);
            }
            assert!(b.divisors().len() >= a.divisors().len());
        }
    }
}

#[test]
fn default_suite_passes_p2() {
    let r = verify_theorem(&default_suite(2, 2), &ring(2, 2), &bx(3, 8), false).unwrap();
    assert_eq!(r.instances.len(), 4);
    assert!(r.pass, "{r:#?}");
}

#[test]
fn default_suite_passes_p3() {
    let r = verify_theorem(&default_suite(3, 2), &ring(3, 2), &bx(3, 27), false).unwrap();
    assert!(r.pass, "{r:#?}");
}

#[test]
fn report_is_deterministic_without_timings() {
    let run = || serde_json::to_string(&verify_theorem(&default_suite(2, 1), &ring(2, 1), &bx(2, 4), false).unwrap()).unwrap();
    assert_eq!(run(), run());
    assert!(!run().contains("millis"));
}

#[test]
fn empty_suite() {
    let r = verify_theorem(&[], &ring(2, 2), &bx(3, 8), false).unwrap();
    assert!(r.instances.is_empty() && r.pass);
}

fn unimodular() -> impl Strategy<Value = (i64, i64)> {
    (-3i64..=3, -3i64..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Conjugating etale ⊕ mult by [[1, a], [b, 1 + ab]] keeps the split and its invariants.
    #[test]
    fn split_under_base_change((a, b) in unimodular()) {
        let p = 2i64;
        let bm = [[1, a], [b, 1 + a * b]];
        let bi = [[1 + a * b, -a], [-b, 1]];
        let conj = |d: [i64; 2]| -> IntMat {
            (0..2).map(|i| (0..2).map(|j| (0..2).map(|k| bi[i][k] * d[k] * bm[k][j]).sum()).collect()).collect()
        };
        let n = DieudonneModule::new(2, conj([1, p]), conj([p, 1]), 3).unwrap();
        let s = dd_split(&n).unwrap();
        prop_assert_eq!((s.nil.rank, s.inv.rank), (1, 1));
        let md = n.modulus(3).unwrap();
        prop_assert!(linalg::inverse(&md, &s.basis).is_ok());
        prop_assert!(s.nil.v_nilpotent().unwrap());
        prop_assert!(!s.inv.v_nilpotent().unwrap());
        let again = dd_split(&s.nil).unwrap();
        prop_assert_eq!(again.nil.rank, 1);
        let desc = ring(2, 2);
        let sw = solve_sw(&n, &desc, &bx(3, 8)).unwrap();
        let plain = solve_sw(&DieudonneModule::etale(2, 1, 2).direct_sum(&DieudonneModule::multiplicative(2, 1, 2)).unwrap(), &desc, &bx(3, 8)).unwrap();
        prop_assert_eq!(sw.divisors(), plain.divisors());
    }
}
