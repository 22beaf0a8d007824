use fbl_core::algebras::{CrossSectional, ExelOracle, ReportOptions};
use fbl_core::bundle::{
    bundle_from_partial_action, is_saturated, restrict_to_idempotents, saturation_failures, trivial_line_bundle,
    validate_bundle, FellBundle, PartialActionSpec, ValidationOptions, ZeroFiber,
};
use fbl_core::conv::{na_spanning_set, Section};
use fbl_core::corpus;
use fbl_core::fdalg::FdCStar;
use fbl_core::linalg::{c, identity, re, zeros, CMat, CVec};
use fbl_core::regrep::RegularRepresentation;

fn one() -> CVec {
    CVec::from_element(1, re(1.0))
}

fn unit(d: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[i] = re(1.0);
    v
}

#[test]
fn z2_sum_of_deltas_has_norm_two() {
    let b = trivial_line_bundle(&corpus::z2(), ZeroFiber::Full);
    let rep = RegularRepresentation::new(&b).unwrap();
    let f = Section::from_coords(&b, CVec::from_vec(vec![re(1.0), re(1.0)])).unwrap();
    assert!((rep.reduced_norm(&f).unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn compression_by_gammas_picks_out_dominating_elements() {
    for b in [
        trivial_line_bundle(&corpus::i2(), ZeroFiber::Full),
        trivial_line_bundle(&corpus::i3(), ZeroFiber::Full),
        corpus::i2_action(),
        corpus::e3_partial(),
    ] {
        let rep = RegularRepresentation::new(&b).unwrap();
        let s = b.base();
        for &e in s.idempotents() {
            let elems = rep.module(e).elements.clone();
            for &x in &elems {
                let gx = rep.gamma(x);
                for &y in &elems {
                    let gy = rep.gamma(y);
                    let xy = s.mul(x, s.inv(y));
                    for u in 0..s.size() {
                        for i in 0..b.dim(u) {
                            let a = unit(b.dim(u), i);
                            let got = gx.adjoint() * rep.lambda_op(e, u, &a) * &gy;
                            let expected = if s.natural_leq(xy, u) {
                                assert_eq!(s.mul(u, y), x);
                                rep.left_action(u, &a, y)
                            } else {
                                zeros(b.dim(x), b.dim(y))
                            };
                            assert!((got - expected).norm() < 1e-10, "e={e} s={x} t={y} u={u}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn non_e_star_unitary_base_has_nonzero_off_diagonal_compression() {
    let b = trivial_line_bundle(&corpus::i3(), ZeroFiber::Full);
    let (e, u) = b.base().e_star_unitary_witness().unwrap();
    let rep = RegularRepresentation::new(&b).unwrap();
    let g = rep.gamma(e);
    let comp = g.adjoint() * rep.lambda_op(e, u, &one()) * g;
    assert!((comp[(0, 0)] - re(1.0)).norm() < 1e-12);
}

#[test]
fn compression_of_z2_keeps_the_identity_coefficient() {
    let b = trivial_line_bundle(&corpus::z2(), ZeroFiber::Full);
    let cs = CrossSectional::new(&b).unwrap();
    let (alpha, beta) = (c(2.0, -1.0), c(0.5, 3.0));
    let t = cs.operator(&CVec::from_vec(vec![alpha, beta]));
    let e = cs.eks(&t);
    let expected = cs.diagonal_rep().phi_coords(&CVec::from_vec(vec![alpha]));
    assert!(e.sub(&expected).norm() < 1e-12);
}

#[test]
fn semilattice_translations_multiply_or_vanish() {
    let b = trivial_line_bundle(&corpus::e3(), ZeroFiber::Full);
    let rep = RegularRepresentation::new(&b).unwrap();
    let s = b.base();
    for &e in s.idempotents() {
        for f in 0..s.size() {
            let l = rep.lambda_op(e, f, &CVec::from_element(1, re(3.0)));
            let expected = if s.natural_leq(e, f) { 3.0 } else { 0.0 };
            assert_eq!(l.shape(), (1, 1));
            assert!((l[(0, 0)] - re(expected)).norm() < 1e-12);
        }
    }
}

#[test]
fn group_bundles_have_zero_ideals_and_coinciding_algebras() {
    for n in 2..=4 {
        let b = trivial_line_bundle(&corpus::cyclic(n), ZeroFiber::Full);
        let cs = CrossSectional::new(&b).unwrap();
        let r = cs.report(&[], ReportOptions::default()).unwrap();
        assert!(r.injective);
        assert_eq!((r.dims.crks, r.dims.ia, r.dims.ja), (n, 0, Some(0)));
        assert_eq!((r.dims.alt, r.dims.reduced), (n, Some(n)));
        assert_eq!(r.ia_equals_ja, Some(true));
    }
}

#[test]
fn sections_in_the_reduced_kernel_have_zero_oracle_norm() {
    let b = corpus::i2_action();
    let cs = CrossSectional::new(&b).unwrap();
    let ja = cs.ideal_ja().unwrap();
    assert!(ja.dim() > 0);
    let oracle = ExelOracle::new(&cs, 7).unwrap();
    for k in 0..ja.dim() {
        let g = ja.coords.column(k).into_owned();
        assert!(oracle.norm(&g) < 1e-9);
        assert!(cs.operator(&g).norm() > 1e-3);
    }
}

#[test]
fn partial_action_examples() {
    let swap = corpus::z2_swap_action();
    assert!(validate_bundle(&swap, ValidationOptions::default()).passed());
    assert!(is_saturated(&swap));

    let e3p = corpus::e3_partial();
    assert_eq!(e3p.dims(), &[2, 1, 0]);
    assert!(validate_bundle(&e3p, ValidationOptions::default()).passed());
    let (r, emb) = restrict_to_idempotents(&e3p);
    assert_eq!(emb, vec![0, 1, 2]);
    assert_eq!(r.dims(), e3p.dims());
    // A_1 . A_e = J_e = A_e, so every pair is saturated
    assert!(saturation_failures(&e3p).is_empty());

    let zp = corpus::z2_partial();
    assert!(validate_bundle(&zp, ValidationOptions::default()).passed());
    assert_eq!(saturation_failures(&zp), vec![(1, 1)]);
}

#[test]
fn trivial_action_on_scalars_is_the_trivial_line_bundle() {
    let s = corpus::i2();
    let n = s.size();
    let gens = vec![vec![one()]; n];
    let spec = PartialActionSpec::new(FdCStar::commutative(1), &gens, vec![identity(1); n]);
    let b = bundle_from_partial_action(&s, &spec).unwrap();
    let t = trivial_line_bundle(&s, ZeroFiber::Full);
    let same = |x: &CMat, y: &CMat| (x - y).norm() < 1e-12;
    for x in 0..n {
        assert!(same(b.star_matrix(x), t.star_matrix(x)));
        for y in 0..n {
            assert!(same(b.mu_matrix(x, y), t.mu_matrix(x, y)));
        }
    }
}

#[test]
fn order_ideal_dimensions() {
    let dim = |b: &FellBundle| na_spanning_set(b).dim();
    assert_eq!(dim(&trivial_line_bundle(&corpus::z2(), ZeroFiber::Full)), 0);
    assert_eq!(dim(&trivial_line_bundle(&corpus::e3(), ZeroFiber::Full)), 2);
    // every element of I_2 lies above 0, so the order graph is connected
    assert_eq!(dim(&trivial_line_bundle(&corpus::i2(), ZeroFiber::Full)), 6);
}

#[test]
fn reports_are_reproducible() {
    let b = corpus::i2_action();
    let cs = CrossSectional::new(&b).unwrap();
    let sections = vec![("g".to_string(), CVec::from_fn(b.total_dim(), |k, _| c(k as f64, 1.0)))];
    let opts = ReportOptions { seed: 3, oracle: true };
    let a = serde_json::to_string(&cs.report(&sections, opts).unwrap()).unwrap();
    let again = serde_json::to_string(&CrossSectional::new(&b).unwrap().report(&sections, opts).unwrap()).unwrap();
    assert_eq!(a, again);
}
