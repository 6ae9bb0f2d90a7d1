use fmarkov::finprob::{cond_exp, is_measurable};
use fmarkov::fword::{equal, normal_form, GroupWord};
use fmarkov::pl::word_to_pl;
use fmarkov::random::{random_square_instance, small_ratio};
use fmarkov::sites::{beta_pull, beta_push, BiSite};
use fmarkov::Rational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn word() -> impl Strategy<Value = GroupWord> {
    prop::collection::vec((0u64..6, prop_oneof![Just(1i64), Just(-1i64)]), 0..24).prop_map(GroupWord::from_pairs)
}

fn site() -> impl Strategy<Value = BiSite> {
    prop_oneof![
        Just(BiSite::Mark),
        (0u64..1000, 0u64..12).prop_map(|(i, j)| BiSite::Cell(i, j))
    ]
}

proptest! {
    #[test]
    fn nf_is_a_pl_invariant(w in word()) {
        let nf = normal_form(&w).unwrap();
        prop_assert_eq!(word_to_pl(&nf.to_word()), word_to_pl(&w));
    }

    #[test]
    fn product_with_inverse_is_trivial(u in word(), v in word()) {
        let uv = u.multiply(&v);
        prop_assert!(equal(&uv.multiply(&v.inverse()), &u).unwrap());
        prop_assert_eq!(word_to_pl(&uv), word_to_pl(&u).compose(&word_to_pl(&v)));
    }

    #[test]
    fn push_undoes_pull(k in 0u64..8, s in site()) {
        prop_assert_eq!(beta_push(k, beta_pull(k, s)), s);
        prop_assert_eq!(beta_pull(k, beta_push(k, s)), s);
    }

    #[test]
    fn conditional_expectation_tower(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (space, p1, _, p0) = random_square_instance(&mut rng);
        let f: Vec<Rational> = (0..space.len()).map(|_| small_ratio(&mut rng)).collect();
        let e1 = cond_exp(&space, &p1, &f);
        prop_assert!(is_measurable(&p1, &e1));
        prop_assert_eq!(space.expectation(&e1), space.expectation(&f));
        // p0 is coarser than p1 for every instance
        prop_assert_eq!(cond_exp(&space, &p0, &e1), cond_exp(&space, &p0, &f));
    }
}
