use fbl_core::algebras::{CrossSectional, ExelOracle};
use fbl_core::bundle::FellBundle;
use fbl_core::conv::{convolve, ell1_norm, involute, Section};
use fbl_core::corpus;
use fbl_core::fdalg::FdCStar;
use fbl_core::isg::{search_idempotent_pure_grading, Group, InverseSemigroup, MulTable};
use fbl_core::linalg::{random_cvec, CVec};
use fbl_core::regrep::RegularRepresentation;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-10;

const SMALL_BUNDLES: [&str; 8] = [
    "z2_trivial",
    "e3_trivial",
    "e3_trivial_contracted",
    "i2_trivial",
    "i2_action",
    "e3_partial",
    "z2_swap_action",
    "z2_partial",
];

fn bundle(k: usize) -> FellBundle {
    corpus::bundle_by_name(SMALL_BUNDLES[k % SMALL_BUNDLES.len()]).unwrap()
}

/// The inverse subsemigroup of `I_3` generated by the chosen elements.
fn generated_subsemigroup(picks: &[usize]) -> InverseSemigroup {
    let full = corpus::i3();
    let mut elems: Vec<usize> = picks.iter().map(|p| p % full.size()).collect();
    elems.extend(elems.clone().into_iter().map(|x| full.inv(x)).collect::<Vec<_>>());
    elems.sort_unstable();
    elems.dedup();
    loop {
        let mut next = elems.clone();
        for &a in &elems {
            for &b in &elems {
                next.push(full.mul(a, b));
            }
        }
        next.sort_unstable();
        next.dedup();
        if next.len() == elems.len() {
            break;
        }
        elems = next;
    }
    full.restrict(&elems).unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn natural_order_is_a_compatible_partial_order(picks in prop::collection::vec(0usize..34, 1..4)) {
        let s = generated_subsemigroup(&picks);
        let n = s.size();
        for a in 0..n {
            prop_assert!(s.natural_leq(a, a));
            for b in 0..n {
                if s.natural_leq(a, b) {
                    prop_assert!(a == b || !s.natural_leq(b, a));
                    prop_assert!(s.natural_leq(s.inv(a), s.inv(b)));
                    for c in 0..n {
                        prop_assert!(s.natural_leq(s.mul(a, c), s.mul(b, c)));
                        if s.natural_leq(b, c) {
                            prop_assert!(s.natural_leq(a, c));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn wagner_preston_is_an_injective_homomorphism(picks in prop::collection::vec(0usize..34, 1..4)) {
        let s = generated_subsemigroup(&picks);
        let n = s.size();
        let maps: Vec<_> = (0..n).map(|u| s.wagner_preston(u)).collect();
        for u in 0..n {
            prop_assert!(maps[u].is_injective());
            prop_assert_eq!(&maps[s.inv(u)], &maps[u].inverse());
            for v in 0..n {
                prop_assert_eq!(&maps[s.mul(u, v)], &maps[u].compose(&maps[v]));
                if u != v {
                    prop_assert_ne!(&maps[u], &maps[v]);
                }
            }
        }
    }

    #[test]
    fn filters_are_exactly_the_brute_force_filters(picks in prop::collection::vec(0usize..34, 1..4)) {
        let s = generated_subsemigroup(&picks);
        let e = s.idempotents().to_vec();
        prop_assume!(e.len() <= 10);
        let mut brute = Vec::new();
        for mask in 1u32..(1 << e.len()) {
            let sub: Vec<usize> = (0..e.len()).filter(|i| mask & (1 << i) != 0).map(|i| e[i]).collect();
            if s.is_filter(&sub) {
                brute.push(sub);
            }
        }
        let mut fast: Vec<Vec<usize>> = s.filters().into_iter().map(|f| f.elements).collect();
        fast.sort();
        brute.sort();
        prop_assert_eq!(fast, brute);
    }

    #[test]
    fn found_gradings_verify(picks in prop::collection::vec(0usize..34, 1..4), k in 1usize..5) {
        let s = generated_subsemigroup(&picks);
        let g = Group::cyclic(k);
        if let Some(sigma) = search_idempotent_pure_grading(&s, &g) {
            prop_assert!(sigma.verify(&s, &g).is_ok());
        }
    }

    #[test]
    fn tables_survive_relabelling(seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let s = corpus::i2();
        let mut perm: Vec<usize> = (0..s.size()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut inv = vec![0; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let t = MulTable::from_fn(s.size(), |a, b| perm[s.mul(inv[a], inv[b])]).unwrap();
        let r = InverseSemigroup::new(t).unwrap();
        prop_assert_eq!(r.idempotents().len(), 4);
        prop_assert!(r.is_e_star_unitary());
    }

    #[test]
    fn cstar_identity_in_direct_sums(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for alg in [FdCStar::matrix_algebra(2), FdCStar::commutative(3)] {
            let a = random_cvec(&mut rng, alg.dim());
            let b = random_cvec(&mut rng, alg.dim());
            let na = alg.norm(&a);
            prop_assert!((alg.norm(&alg.mul(&alg.star(&a), &a)) - na * na).abs() < TOL * (1.0 + na * na));
            prop_assert!(alg.norm(&alg.mul(&a, &b)) <= na * alg.norm(&b) + TOL);
            prop_assert!((alg.norm(&alg.star(&a)) - na).abs() < TOL * (1.0 + na));
            prop_assert!(alg.is_positive(&alg.mul(&alg.star(&a), &a)));
        }
    }

    #[test]
    fn convolution_is_an_associative_star_algebra(k in 0usize..8, seed in any::<u64>()) {
        let b = bundle(k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Section::random(&b, &mut rng);
        let g = Section::random(&b, &mut rng);
        let h = Section::random(&b, &mut rng);
        let lhs = convolve(&convolve(&f, &g).unwrap(), &h).unwrap();
        let rhs = convolve(&f, &convolve(&g, &h).unwrap()).unwrap();
        prop_assert!((lhs.coords() - rhs.coords()).norm() < TOL);
        let a = involute(&convolve(&f, &g).unwrap());
        let b2 = convolve(&involute(&g), &involute(&f)).unwrap();
        prop_assert!((a.coords() - b2.coords()).norm() < TOL);
        prop_assert!((involute(&involute(&f)).coords() - f.coords()).norm() < TOL);
    }

    #[test]
    fn regular_representation_is_a_contractive_star_homomorphism(k in 0usize..8, seed in any::<u64>()) {
        let b = bundle(k);
        let rep = RegularRepresentation::new(&b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Section::random(&b, &mut rng);
        let g = Section::random(&b, &mut rng);
        let (pf, pg) = (rep.phi(&f).unwrap(), rep.phi(&g).unwrap());
        let pfg = rep.phi(&convolve(&f, &g).unwrap()).unwrap();
        prop_assert!(pfg.sub(&pf.mul(&pg)).norm() < TOL);
        prop_assert!(rep.phi(&involute(&f)).unwrap().sub(&pf.adjoint()).norm() < TOL);
        prop_assert!(pf.norm() <= ell1_norm(&f) + TOL);
        let nf = pf.norm();
        prop_assert!((pf.adjoint().mul(&pf).norm() - nf * nf).abs() < TOL * (1.0 + nf * nf));
    }

    #[test]
    fn delta_sections_are_bounded_by_fiber_norms(k in 0usize..8, seed in any::<u64>()) {
        let b = bundle(k);
        let rep = RegularRepresentation::new(&b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for s in 0..b.base().size() {
            if b.dim(s) == 0 {
                continue;
            }
            let a = random_cvec(&mut rng, b.dim(s));
            let r = rep.reduced_norm(&Section::delta(&b, s, &a)).unwrap();
            let fiber = b.fiber_norm(s, &a);
            prop_assert!(r <= fiber + TOL);
            // A_{s*s} is nonzero whenever A_s is, so the module norm is attained
            prop_assert!((r - fiber).abs() < 1e-8 * (1.0 + fiber));
        }
    }

    #[test]
    fn compression_is_a_faithful_contraction(k in 0usize..8, seed in any::<u64>()) {
        let b = bundle(k);
        let rep = RegularRepresentation::new(&b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = rep.phi_coords(&random_cvec(&mut rng, b.total_dim()));
        let e = rep.eks(&t);
        prop_assert!(e.norm() <= t.norm() + TOL);
        if t.norm() > 1e-8 {
            prop_assert!(rep.eks(&t.adjoint().mul(&t)).norm() > 1e-12 * t.norm() * t.norm());
        }
    }

    #[test]
    fn quotient_norms_are_cstar_norms(k in 0usize..6, seed in any::<u64>()) {
        let names = ["z2_trivial", "e3_trivial_contracted", "e3_partial", "z2_swap_action", "z2_partial", "i2_action"];
        let b = corpus::bundle_by_name(names[k]).unwrap();
        let cs = CrossSectional::new(&b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_cvec(&mut rng, b.total_dim());
        let t = cs.operator(&g);
        for ideal in [cs.ideal_ia(), cs.ideal_ja().unwrap()] {
            let q = cs.quotient(&ideal).unwrap();
            let n = q.norm(&t);
            prop_assert!((q.norm(&t.adjoint().mul(&t)) - n * n).abs() < 1e-9 * (1.0 + n * n));
            prop_assert!(n <= t.norm() + TOL);
        }
        let oracle = ExelOracle::new(&cs, seed).unwrap();
        let qj = cs.quotient(&cs.ideal_ja().unwrap()).unwrap();
        prop_assert!((oracle.norm(&g) - qj.norm(&t)).abs() < 1e-8);
    }
}

#[test]
fn zero_section_has_zero_norms() {
    let b = corpus::i2_action();
    let cs = CrossSectional::new(&b).unwrap();
    let z = CVec::zeros(b.total_dim());
    let t = cs.operator(&z);
    assert_eq!(t.norm(), 0.0);
    assert_eq!(ExelOracle::new(&cs, 0).unwrap().norm(&z), 0.0);
    assert_eq!(cs.quotient(&cs.ideal_ia()).unwrap().norm(&t), 0.0);
    assert_eq!(ell1_norm(&Section::zero(&b)), 0.0);
}
