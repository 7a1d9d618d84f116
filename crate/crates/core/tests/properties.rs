mod common;

use num_bigint::BigInt;
use proptest::prelude::*;
use qsieve::arith::is_squarefree;
use qsieve::forms::{forms_to_json, mazur_discard, parse_forms_str, resultant_monic, PStatus};
use qsieve::frey::{build_curve, division_poly_constant, isogeny_identity_check};
use qsieve::poly::{resultant, zpoly};
use qsieve::quadfield::{make_field, QuadInt};
use qsieve::solutions::search_general;

use common::*;

fn squarefree_d() -> impl Strategy<Value = u64> {
    (2u64..400).prop_filter("squarefree", |&d| is_squarefree(d))
}

fn primitive_pair(max: i64) -> impl Strategy<Value = (i64, i64)> {
    (-max..=max, -max..=max).prop_filter("primitive", |&(a, b)| num_integer::gcd(a, b) == 1)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn norm_is_multiplicative(d in squarefree_d(), x in -50i64..50, y in -50i64..50, u in -50i64..50, v in -50i64..50) {
        let a = QuadInt::new(d, x, y);
        let b = QuadInt::new(d, u, v);
        prop_assert_eq!((&a * &b).norm(), a.norm() * b.norm());
        prop_assert_eq!(a.conj().conj(), a.clone());
        prop_assert_eq!(&a + &a.conj(), QuadInt::from_int(d, a.trace()));
    }

    #[test]
    fn squares_are_recognised(d in squarefree_d(), x in -40i64..40, y in -40i64..40) {
        let s = QuadInt::new(d, x, y);
        let z = &s * &s;
        prop_assert!(is_square_in_ok(&z));
        let r = z.sqrt_exact().expect("library finds the root");
        prop_assert_eq!(&r * &r, z);
    }

    #[test]
    fn fundamental_unit_has_unit_norm(d in squarefree_d()) {
        let f = make_field(d).unwrap();
        let u = qsieve::quadfield::fundamental_unit(&f);
        prop_assert!(u.value.is_unit());
        prop_assert_eq!(u.value.norm(), BigInt::from(u.norm));
    }

    #[test]
    fn division_constants_and_isogeny((a, b) in primitive_pair(200), d in squarefree_d()) {
        let f = make_field(d).unwrap();
        if let Ok(c) = build_curve(a, b, &f) {
            prop_assert_eq!(division_poly_constant(&c, 3).unwrap().value, QuadInt::from_int(d, -3));
            prop_assert_eq!(division_poly_constant(&c, 5).unwrap().value, QuadInt::from_int(d, 5));
            prop_assert!(isogeny_identity_check(&c));
        }
    }

    #[test]
    fn companion_resultant_matches_sylvester(
        mp in prop::collection::vec(-30i64..30, 1..4),
        p in prop::collection::vec(-30i64..30, 1..7),
    ) {
        let mut monic = mp.clone();
        monic.push(1);
        let big: Vec<BigInt> = monic.iter().map(|&c| BigInt::from(c)).collect();
        let g = zpoly(&p);
        prop_assume!(!g.is_zero());
        let a = resultant_monic(&big, &g);
        let b = resultant(&zpoly(&monic), &g);
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 20, ..ProptestConfig::default() })]

    #[test]
    fn self_matched_forms_survive((a, b) in primitive_pair(60), d in squarefree_d(), order in prop::sample::select(vec![1u32, 2])) {
        let f = make_field(d).unwrap();
        prop_assume!(build_curve(a, b, &f).is_ok());
        let aux = aux_for(d, 19);
        let form = self_match(a, b, &f, &aux, order);
        let v = mazur_discard(&f, &form, &aux, (20, 500)).unwrap();
        prop_assert!(v.statuses.values().all(|s| *s == PStatus::SurvivorUnknown), "{:?}", v.certificates);
    }

    #[test]
    fn certificates_recompute(d in squarefree_d(), q_idx in 0usize..5, a in -8i64..=8, order in prop::sample::select(vec![1u32, 2])) {
        let f = make_field(d).unwrap();
        let aux = aux_for(d, 19);
        let q = aux[q_idx % aux.len()];
        let form = record("c".into(), order, 1, [(q, vec![-a, 1])].into());
        let v = mazur_discard(&f, &form, &[q], (20, 400)).unwrap();
        let cert: BigInt = v.certificates[&q].parse().unwrap();
        prop_assert_eq!(&cert, &certificate_by_sylvester(&f, q, &form));
        for (&p, s) in &v.statuses {
            let divides = (&cert % BigInt::from(p)) == BigInt::from(0);
            match s {
                PStatus::Discarded { .. } => prop_assert!(!divides),
                _ => prop_assert!(divides),
            }
        }
    }

    #[test]
    fn forms_json_round_trip(seed_a in prop::collection::vec(-1000i64..=1000, 6)) {
        // scale into the Hasse interval for each q
        let aps = [5u64, 7, 11, 13, 17, 19]
            .iter()
            .zip(&seed_a)
            .map(|(&q, &s)| {
                let h = (2.0 * (q as f64).sqrt()).floor() as i64;
                (q, vec![-(s % (h + 1)), 1])
            })
            .collect();
        let rec = record("768.2.a".into(), 2, 1, aps);
        let text = forms_to_json(std::slice::from_ref(&rec));
        let back = parse_forms_str(&text).unwrap();
        prop_assert_eq!(back, vec![rec]);
    }

    #[test]
    fn search_hits_verify(d in squarefree_d(), p in prop::sample::select(vec![3u64, 5, 7])) {
        for r in search_general(d, p, 40).unwrap() {
            prop_assert!(r.verify());
        }
    }
}
