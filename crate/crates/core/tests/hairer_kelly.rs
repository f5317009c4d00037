use num_bigint::BigInt;
use num_traits::{One, Signed};
use proptest::prelude::*;
use roughforge::bck::bck_coproduct;
use roughforge::forest::{enumerate_forests_with, DecoratedForest, DEFAULT_MAX_BASIS};
use roughforge::hairer_kelly::{psi, psi_via_partitions, PsiCache, TreeWord, TreeWordComb};
use roughforge::lincomb::{LinComb, TensorKey};
use roughforge::scalar::Rational;
use roughforge::shuffle::{deconcat_coproduct, shuffle_comb, Word};

fn f(s: &str) -> DecoratedForest {
    s.parse().unwrap()
}

fn w(s: &str) -> TreeWord {
    Word::parse(s).unwrap()
}

fn comb(words: &[&str]) -> TreeWordComb {
    words.iter().map(|s| (w(s), Rational::one())).collect()
}

fn small_forests() -> Vec<DecoratedForest> {
    enumerate_forests_with(4, &[1, 2], DEFAULT_MAX_BASIS).unwrap()
}

#[test]
fn recursion_agrees_with_partition_formula() {
    for forest in small_forests() {
        assert_eq!(
            psi(&forest, 4).unwrap(),
            psi_via_partitions(&forest, 4).unwrap(),
            "on {forest}"
        );
    }
}

#[test]
fn short_displays() {
    assert_eq!(psi(&f("[1]"), 1).unwrap(), comb(&["[1]"]));
    assert_eq!(psi(&f("[1][2]"), 2).unwrap(), comb(&["[1].[2]", "[2].[1]"]));
    assert_eq!(psi(&f("[1[2]]"), 2).unwrap(), comb(&["[1[2]]", "[2].[1]"]));
}

#[test]
fn twelve_term_display() {
    // a = 1, b = 2, c = 3, d = 4 on the host a[c[d]][b].
    let expected = comb(&[
        "[1[2][3[4]]]",
        "[2].[1[3[4]]]",
        "[4].[1[2][3]]",
        "[3[4]].[1[2]]",
        "[4].[3].[1[2]]",
        "[4].[2].[1[3]]",
        "[2].[4].[1[3]]",
        "[3[4]].[2].[1]",
        "[2].[3[4]].[1]",
        "[4].[3].[2].[1]",
        "[4].[2].[3].[1]",
        "[2].[4].[3].[1]",
    ]);
    let got = psi(&f("[1[2][3[4]]]"), 4).unwrap();
    assert_eq!(got.len(), 12);
    assert_eq!(got, expected);
}

fn psi_tensor(t: &roughforge::bck::ForestTensor, cache: &mut PsiCache) -> LinComb<TensorKey<TreeWord>> {
    t.map_linear(|k| {
        let left = cache.forest(&k.0[0]);
        let right = cache.forest(&k.0[1]);
        left.bilinear(&right, |a, b| LinComb::single(TensorKey(vec![a.clone(), b.clone()])))
    })
}

#[test]
fn psi_intertwines_coproducts() {
    let mut cache = PsiCache::new();
    for forest in small_forests() {
        let lhs = psi_tensor(&bck_coproduct(&forest), &mut cache);
        let rhs = cache.forest(&forest).map_linear(deconcat_coproduct);
        assert_eq!(lhs, rhs, "on {forest}");
    }
}

#[test]
fn size_guard() {
    assert!(psi(&f("[1[1][1]]"), 2).is_err());
}

fn arb_forest(n: usize) -> impl Strategy<Value = DecoratedForest> {
    let all = enumerate_forests_with(n, &[1, 2, 3], DEFAULT_MAX_BASIS).unwrap();
    (0..all.len()).prop_map(move |i| all[i].clone())
}

proptest! {
    #[test]
    fn psi_is_multiplicative(a in arb_forest(3), b in arb_forest(2)) {
        let mut cache = PsiCache::new();
        let lhs = cache.forest(&a.product(&b));
        let rhs = shuffle_comb(&cache.forest(&a), &cache.forest(&b));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn psi_preserves_node_count_with_positive_integer_coefficients(a in arb_forest(4)) {
        let image = psi(&a, 4).unwrap();
        for (word, c) in image.iter() {
            prop_assert_eq!(word.node_count(), a.size());
            prop_assert!(c.is_integer() && c.is_positive());
        }
    }

    #[test]
    fn single_letter_coefficient_is_one(a in arb_forest(4)) {
        prop_assume!(a.trees().len() == 1);
        let tree = a.trees()[0].clone();
        let image = psi(&a, 4).unwrap();
        prop_assert_eq!(image.coeff(&Word::letter(tree)), Rational::from_integer(BigInt::from(1)));
    }
}
