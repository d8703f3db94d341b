use braidq::algebra::{generator_matrix, Degree, Index, Letter};
use braidq::braided::{sort_word, sort_word_bubble, LegLayout, LeggedLetter, LeggedPoly};
use braidq::fusion::{conjugate_irrep, dimension, fuse, word_bar, Gen, Irrep, Word};
use braidq::scalars::{rat, Scalar, ZetaSpec};
use braidq::simplify::{replay_trace, verify_identity, RelationSet};
use proptest::prelude::*;

fn scalar() -> impl Strategy<Value = Scalar> {
    prop::collection::vec(
        (
            -5i64..=5,
            1i64..=4,
            -3i64..=3,
            prop::sample::select(vec![1u64, 2, 3, 6]),
        ),
        0..4,
    )
    .prop_map(|ts| {
        let mut s = Scalar::zero();
        for (n, d, e, r) in ts {
            s += &Scalar::monomial(rat(n, d), e, r);
        }
        s
    })
}

fn letter() -> impl Strategy<Value = Letter> {
    (1u32..=2, 1u32..=2, any::<bool>(), -2i64..=2).prop_map(|(i, j, st, deg)| {
        let l = Letter::new("u", Index::Two(i, j), deg);
        if st {
            l.star()
        } else {
            l
        }
    })
}

fn legged_word(legs: usize) -> impl Strategy<Value = Vec<LeggedLetter>> {
    prop::collection::vec(
        (1..=legs, letter()).prop_map(|(k, l)| LeggedLetter::new(k, l)),
        0..5,
    )
}

fn legged_poly(legs: usize) -> impl Strategy<Value = LeggedPoly> {
    prop::collection::vec((legged_word(legs), scalar()), 0..4)
        .prop_map(move |ws| LeggedPoly::from_words(&LegLayout::braided(legs), ws))
}

fn fusion_word(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(prop::sample::select(vec![Gen::A, Gen::B]), 0..=max).prop_map(Word)
}

fn irrep(max: usize) -> impl Strategy<Value = Irrep> {
    (-3i64..=3, fusion_word(max)).prop_map(|(x, w)| Irrep::new(x, w))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_ring_axioms(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &Scalar::one(), a.clone());
    }

    #[test]
    fn scalar_star_involutive_and_multiplicative(a in scalar(), b in scalar()) {
        prop_assert_eq!(a.star().star(), a.clone());
        prop_assert_eq!((&a * &b).star(), &a.star() * &b.star());
    }

    #[test]
    fn specialization_is_a_ring_map(
        a in scalar(),
        b in scalar(),
        n in prop::sample::select(vec![2u32, 3, 4, 6, 8]),
    ) {
        let s = ZetaSpec::RootOfUnity(n);
        prop_assert_eq!(
            (&a * &b).specialize(s),
            (&a.specialize(s) * &b.specialize(s)).specialize(s)
        );
        prop_assert_eq!(
            (&a + &b).specialize(s),
            &a.specialize(s) + &b.specialize(s)
        );
        prop_assert_eq!(Scalar::zeta_pow(n as i64).specialize(s), Scalar::one());
        prop_assert_eq!(a.specialize(s).specialize(s), a.specialize(s));
    }

    #[test]
    fn scalar_print_parse_round_trip(a in scalar()) {
        let back: Scalar = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn units_invert(c in 1i64..=6, d in 1i64..=6, e in -4i64..=4, r in prop::sample::select(vec![1u64, 2, 3, 5])) {
        let x = Scalar::monomial(rat(c, d), e, r);
        let y = &x + &Scalar::monomial(rat(1, 1), e, 1);
        for v in [x, y] {
            let inv = v.inverse().unwrap();
            prop_assert!((&v * &inv).is_one());
        }
    }

    #[test]
    fn braided_product_associative(
        p in legged_poly(3),
        q in legged_poly(3),
        r in legged_poly(3),
    ) {
        prop_assert_eq!(p.mul(&q).mul(&r), p.mul(&q.mul(&r)));
    }

    #[test]
    fn leg_sorting_confluent(w in legged_word(3)) {
        let lay = LegLayout::braided(3);
        let mut a = w.clone();
        let mut b = w.clone();
        let pa = sort_word(&mut a, &lay);
        let (pb, _) = sort_word_bubble(&mut b, &lay);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(pa, pb);
    }

    #[test]
    fn tensor_legs_commute_without_phase(w in legged_word(4)) {
        let lay = LegLayout::tensor(&[2, 2]);
        let mut a = w.clone();
        let phase = sort_word(&mut a, &lay);
        // Only pairs inside one braided block contribute.
        let mut expect = 0;
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                let (x, y) = (w[i], w[j]);
                if x.leg > y.leg && lay.block_of(x.leg) == lay.block_of(y.leg) {
                    expect += x.letter.degree * y.letter.degree;
                }
            }
        }
        prop_assert_eq!(phase, expect);
    }

    #[test]
    fn star_involutive_antimultiplicative(p in legged_poly(2), q in legged_poly(2)) {
        prop_assert_eq!(p.star().star(), p.clone());
        prop_assert_eq!(p.mul(&q).star(), q.star().mul(&p.star()));
    }

    #[test]
    fn degree_additive(a in legged_word(2), b in legged_word(2)) {
        let lay = LegLayout::braided(2);
        let p = LeggedPoly::from_words(&lay, [(a, Scalar::one())]);
        let q = LeggedPoly::from_words(&lay, [(b, Scalar::one())]);
        match (p.degree(), q.degree()) {
            (Degree::Homogeneous(x), Degree::Homogeneous(y)) => {
                prop_assert_eq!(p.mul(&q).degree(), Degree::Homogeneous(x + y));
            }
            other => prop_assert!(false, "monomials are homogeneous: {:?}", other),
        }
    }

    #[test]
    fn trace_replay_reaches_zero(
        d in prop::collection::vec(-2i64..=2, 2),
        i in 1usize..=2,
        j in 1usize..=2,
        pre in legged_word(2),
        post in legged_word(2),
        spec in prop::sample::select(vec![ZetaSpec::Formal, ZetaSpec::RootOfUnity(3)]),
    ) {
        let u = generator_matrix("u", &d);
        let mut rels = RelationSet::new();
        rels.add_unitary("u", &u).unwrap();
        let lay = LegLayout::braided(2);
        let mut core = LeggedPoly::zero(&lay);
        for k in 1..=2 {
            let a = Letter::new("u", Index::Two(i as u32, k), d[k as usize - 1] - d[i - 1]);
            let b = Letter::new("u", Index::Two(j as u32, k), d[k as usize - 1] - d[j - 1]).star();
            core.add_word(
                vec![LeggedLetter::new(2, a), LeggedLetter::new(2, b)],
                Scalar::one(),
            );
        }
        let pre = LeggedPoly::from_words(&lay, [(pre, Scalar::one())]);
        let post = LeggedPoly::from_words(&lay, [(post, Scalar::one())]);
        let lhs = pre.mul(&core).mul(&post);
        let rhs = if i == j { pre.mul(&post) } else { LeggedPoly::zero(&lay) };
        let report = braidq::simplify::verify_identity_in(&lhs, &rhs, &rels, spec);
        prop_assert!(report.is_verified());
        let residual = replay_trace(&lhs.minus(&rhs), &report.trace, &rels, spec).unwrap();
        prop_assert!(residual.specialize(spec).is_zero());
        if spec == ZetaSpec::Formal {
            prop_assert!(verify_identity(&lhs, &rhs, &rels).is_verified());
        }
    }

    #[test]
    fn word_bar_involutive_antimultiplicative(v in fusion_word(5), w in fusion_word(5)) {
        prop_assert_eq!(word_bar(&word_bar(&v)), v.clone());
        prop_assert_eq!(word_bar(&v.concat(&w)), word_bar(&w).concat(&word_bar(&v)));
    }

    #[test]
    fn fusion_associative(r in irrep(3), s in irrep(3), t in irrep(3)) {
        let left = fuse(&r, &s).fuse_with(&braidq::fusion::FusionResult::single(t.clone()));
        let right = braidq::fusion::FusionResult::single(r.clone()).fuse_with(&fuse(&s, &t));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn fusion_respects_dimension_and_conjugation(
        r in irrep(4),
        s in irrep(4),
        n in 2u64..=4,
    ) {
        let f = fuse(&r, &s);
        prop_assert_eq!(f.dimension(n), dimension(&r.w, n) * dimension(&s.w, n));
        let rev = fuse(&conjugate_irrep(&s), &conjugate_irrep(&r));
        prop_assert_eq!(f.map(conjugate_irrep), rev);
        for (x, _) in f.iter() {
            prop_assert_eq!(x.x, r.x + s.x);
        }
        let trivial = fuse(&r, &conjugate_irrep(&r));
        prop_assert_eq!(trivial.multiplicity(&Irrep::trivial()), 1);
    }
}
