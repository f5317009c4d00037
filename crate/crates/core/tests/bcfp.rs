use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::{One, Signed};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roughforge::action::{solve_translation, ActionOptions, BranchedRP};
use roughforge::bcfp::{
    bcfp_extraction, bcfp_to_action, check_bound, m_v, CharacterInput, ConstantCharacter, DEFAULT_BOUND_LIMIT,
};
use roughforge::bck::ForestTensor;
use roughforge::construct::{chen_residual, holder_report};
use roughforge::forest::{enumerate_trees_with, DecoratedForest, DecoratedTree, DEFAULT_MAX_BASIS};
use roughforge::lincomb::TensorKey;
use roughforge::scalar::Rational;
use roughforge::signature::{arborified_grid_path, from_samples};
use roughforge::Error;

fn f(s: &str) -> DecoratedForest {
    s.parse().unwrap()
}

fn pair(a: &str, b: &str) -> TensorKey<DecoratedForest> {
    let left = if a.is_empty() { DecoratedForest::unit() } else { f(a) };
    TensorKey(vec![left, f(b)])
}

/// Lift with a time channel on decoration 0 and two signal channels.
fn lift(depth: u32, n: usize, gamma: Rational64) -> BranchedRP {
    let cells = 1usize << depth;
    let time: Vec<f64> = (0..=cells).map(|k| k as f64 / cells as f64).collect();
    let a: Vec<f64> = time.iter().map(|t| (5.0 * t).sin()).collect();
    let b: Vec<f64> = time.iter().map(|t| (2.0 * t).cos() * t).collect();
    let path = from_samples(depth, vec![0, 1, 2], vec![time, a, b]).unwrap();
    arborified_grid_path(&path, depth, n, gamma, DEFAULT_MAX_BASIS).unwrap()
}

fn random_character(n: usize, rng: &mut ChaCha8Rng) -> CharacterInput {
    let values: BTreeMap<DecoratedTree, f64> = enumerate_trees_with(n, &[1, 2], DEFAULT_MAX_BASIS)
        .unwrap()
        .into_iter()
        .map(|t| (t, rng.gen_range(-1.0..1.0)))
        .collect();
    CharacterInput::Constant(ConstantCharacter::new(values).unwrap())
}

#[test]
fn single_node_extraction() {
    let expected = ForestTensor::from_terms([
        (pair("", "[2]"), Rational::one()),
        (pair("[2]", "[0]"), Rational::one()),
    ]);
    assert_eq!(bcfp_extraction(&f("[2]")).unwrap(), expected);
}

#[test]
fn cherry_extraction_against_display() {
    // i = 1, j = 2, k = 3 on the cherry with root i.
    let displayed = [
        ("", "[1[2][3]]"),
        ("[1]", "[0[2][3]]"),
        ("[2]", "[1[0][3]]"),
        ("[3]", "[1[2][0]]"),
        ("[1[2]]", "[0[3]]"),
        ("[1[3]]", "[0[2]]"),
        ("[1][2]", "[0[0][3]]"),
        ("[1][3]", "[0[2][0]]"),
        ("[2][3]", "[1[0][0]]"),
        ("[1[2]][3]", "[0[0]]"),
        ("[1[3]][2]", "[0[0]]"),
        ("[1[2][3]]", "[0]"),
    ];
    let got = bcfp_extraction(&f("[1[2][3]]")).unwrap();
    for (a, b) in displayed {
        assert_eq!(got.coeff(&pair(a, b)), Rational::one(), "{a} ⊗ {b}");
    }
    // Extracting all three nodes separately is a family of disjoint
    // connected pieces as well; it is the one term beyond the twelve shown.
    let extra = pair("[1][2][3]", "[0[0][0]]");
    assert_eq!(got.coeff(&extra), Rational::one());
    assert_eq!(got.len(), displayed.len() + 1);
}

#[test]
fn counit_character_is_identity_on_zero_free_trees() {
    let x = lift(4, 2, Rational64::new(2, 5));
    let y = m_v(
        &x,
        &CharacterInput::Constant(ConstantCharacter::counit()),
        DEFAULT_BOUND_LIMIT,
    )
    .unwrap();
    for (a, b) in x.states().iter().zip(y.states()) {
        for (i, key) in x.basis().keys().iter().enumerate() {
            if key.zero_count() == 0 {
                assert!((a.at(i) - b.get(key)).abs() <= 1e-14, "{key}");
            }
        }
    }
    let g = bcfp_to_action(
        &x,
        &CharacterInput::Constant(ConstantCharacter::counit()),
        DEFAULT_BOUND_LIMIT,
        ActionOptions::default(),
    )
    .unwrap();
    assert!(g.values().values().flatten().all(|v| v.abs() <= 1e-12));
}

#[test]
fn renormalised_paths_satisfy_chen_and_match_the_solver() {
    let x = lift(5, 3, Rational64::new(3, 10));
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..5 {
        let v = random_character(3, &mut rng);
        let y = m_v(&x, &v, DEFAULT_BOUND_LIMIT).unwrap();
        assert!(chen_residual(&y) <= 1e-10, "chen {}", chen_residual(&y));
        assert!(holder_report(&y).all_finite());
        let g = bcfp_to_action(&x, &v, DEFAULT_BOUND_LIMIT, ActionOptions::default()).unwrap();
        let h = solve_translation(&x, &y, ActionOptions::default()).unwrap();
        assert!(g.max_distance(&h) <= 1e-8, "gap {}", g.max_distance(&h));
    }
}

#[test]
fn levels_beyond_the_exponent_are_rejected() {
    let x = lift(3, 3, Rational64::new(2, 5));
    let v = random_character(2, &mut ChaCha8Rng::seed_from_u64(1));
    assert!(matches!(
        bcfp_to_action(&x, &v, DEFAULT_BOUND_LIMIT, ActionOptions::default()),
        Err(Error::LevelOverflow { level: 3, max: 2 })
    ));
}

#[test]
fn time_dependent_characters_are_rejected() {
    let x = lift(3, 2, Rational64::new(2, 5));
    let v = CharacterInput::from_json(&serde_json::json!({"[1]": [0.1, 0.2, 0.3]})).unwrap();
    assert_eq!(
        m_v(&x, &v, DEFAULT_BOUND_LIMIT).unwrap_err(),
        Error::TimeDependentCharacter
    );
}

#[test]
fn bound_violation_is_reported() {
    let x = lift(4, 2, Rational64::new(2, 5));
    assert!(check_bound(&x, DEFAULT_BOUND_LIMIT).is_ok());
    assert!(check_bound(&x, 1e-6).is_err());
}

#[test]
fn characters_may_not_touch_decoration_zero() {
    let values: BTreeMap<DecoratedTree, f64> = [("[1[0]]".parse().unwrap(), 1.0)].into_iter().collect();
    assert!(ConstantCharacter::new(values).is_err());
}

fn arb_tree() -> impl Strategy<Value = DecoratedTree> {
    let all = enumerate_trees_with(5, &[1, 2], DEFAULT_MAX_BASIS).unwrap();
    (0..all.len()).prop_map(move |i| all[i].clone())
}

proptest! {
    #[test]
    fn extraction_shape(tree in arb_tree()) {
        let psi = bcfp_extraction(&DecoratedForest::single(tree.clone())).unwrap();
        let mut counit_side = ForestTensor::zero();
        for (k, c) in psi.iter() {
            let (left, right) = (&k.0[0], &k.0[1]);
            prop_assert!(c.is_integer() && c.is_positive());
            prop_assert_eq!(left.zero_count(), 0);
            prop_assert_eq!(right.trees().len(), 1);
            prop_assert_eq!(right.size() + left.size(), tree.size() + left.trees().len());
            prop_assert_eq!(right.zero_count(), left.trees().len());
            if left.is_unit() {
                counit_side.add_term(k.clone(), c.clone());
            }
        }
        prop_assert_eq!(counit_side.len(), 1);
        prop_assert!(counit_side.keys().all(|k| k.0[1] == DecoratedForest::single(tree.clone())));
    }
}
