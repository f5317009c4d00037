mod common;

use std::collections::BTreeMap;

use common::{forest_oracle, q, random_lie_functional, random_tree_functional, word_oracle, Functional, Oracle};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use roughforge::basis::{bck_truncation, shuffle_truncation};
use roughforge::bch::{bch, bch_term, descent_coefficients, phi_k};
use roughforge::dual::DualElement;
use roughforge::forest::{DecoratedForest, DEFAULT_MAX_BASIS};
use roughforge::scalar::Rational;

#[test]
fn bch_matches_series_on_forests() {
    let basis = bck_truncation(4, 2, DEFAULT_MAX_BASIS).unwrap();
    let oracle = forest_oracle(&basis);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let a = random_tree_functional(&basis, &mut rng);
        let b = random_tree_functional(&basis, &mut rng);
        let expected = oracle.log(&oracle.convolve(&oracle.exp(&a, 4), &oracle.exp(&b, 4)), 4);
        let got = bch(&oracle.to_dual(&basis, &a), &oracle.to_dual(&basis, &b)).unwrap();
        assert_eq!(
            oracle.from_dual(&got),
            oracle.from_dual(&oracle.to_dual(&basis, &expected))
        );
    }
}

#[test]
fn bch_matches_series_on_words() {
    let basis = shuffle_truncation(4, 2, DEFAULT_MAX_BASIS).unwrap();
    let oracle = word_oracle(&basis);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let a = random_lie_functional(&oracle, &mut rng);
        let b = random_lie_functional(&oracle, &mut rng);
        let expected = oracle.log(&oracle.convolve(&oracle.exp(&a, 4), &oracle.exp(&b, 4)), 4);
        let got = bch(&oracle.to_dual(&basis, &a), &oracle.to_dual(&basis, &b)).unwrap();
        assert_eq!(
            oracle.from_dual(&got),
            oracle.from_dual(&oracle.to_dual(&basis, &expected))
        );
    }
}

#[test]
fn homogeneous_terms_sum_to_bch_and_stay_infinitesimal() {
    let basis = bck_truncation(4, 2, DEFAULT_MAX_BASIS).unwrap();
    let oracle = forest_oracle(&basis);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let a = oracle.to_dual(&basis, &random_tree_functional(&basis, &mut rng));
    let b = oracle.to_dual(&basis, &random_tree_functional(&basis, &mut rng));
    let mut sum = DualElement::zero(&basis);
    for k in 1..=4 {
        let term = bch_term(&a, &b, k).unwrap();
        assert!(term.is_infinitesimal());
        sum = sum.plus(&term).unwrap();
    }
    assert_eq!(sum, bch(&a, &b).unwrap());
}

#[test]
fn coefficient_tables_for_orders_two_and_three() {
    let two: BTreeMap<Vec<usize>, Rational> = descent_coefficients(2)
        .unwrap()
        .rows
        .iter()
        .map(|r| (r.permutation.clone(), r.coefficient.clone()))
        .collect();
    assert_eq!(two[&vec![1, 2]], q(1, 2));
    assert_eq!(two[&vec![2, 1]], q(-1, 2));

    let three: BTreeMap<Vec<usize>, Rational> = descent_coefficients(3)
        .unwrap()
        .rows
        .iter()
        .map(|r| (r.permutation.clone(), r.coefficient.clone()))
        .collect();
    let expected = [
        (vec![1, 2, 3], q(1, 3)),
        (vec![2, 1, 3], q(-1, 6)),
        (vec![1, 3, 2], q(-1, 6)),
        (vec![2, 3, 1], q(-1, 6)),
        (vec![3, 1, 2], q(-1, 6)),
        (vec![3, 2, 1], q(1, 3)),
    ];
    assert_eq!(three.len(), 6);
    for (p, c) in expected {
        assert_eq!(three[&p], c, "coefficient of {p:?}");
    }
}

#[test]
fn phi_three_matches_product_expansion() {
    let basis = bck_truncation(4, 2, DEFAULT_MAX_BASIS).unwrap();
    let oracle = forest_oracle(&basis);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let alphas: Vec<Functional<DecoratedForest>> = (0..3).map(|_| random_tree_functional(&basis, &mut rng)).collect();
    let duals: Vec<_> = alphas.iter().map(|a| oracle.to_dual(&basis, a)).collect();
    let prod = |i: usize, j: usize, k: usize| oracle.convolve(&oracle.convolve(&alphas[i], &alphas[j]), &alphas[k]);
    let mut expected = BTreeMap::new();
    Oracle::add_scaled(&mut expected, &prod(0, 1, 2), &q(1, 3));
    for (i, j, k) in [(1, 0, 2), (0, 2, 1), (1, 2, 0), (2, 0, 1)] {
        Oracle::add_scaled(&mut expected, &prod(i, j, k), &q(-1, 6));
    }
    Oracle::add_scaled(&mut expected, &prod(2, 1, 0), &q(1, 3));
    let got = phi_k(&duals).unwrap();
    assert_eq!(
        oracle.from_dual(&got),
        oracle.from_dual(&oracle.to_dual(&basis, &expected))
    );

    let two = phi_k(&duals[..2]).unwrap();
    let mut expected2 = BTreeMap::new();
    Oracle::add_scaled(&mut expected2, &oracle.convolve(&alphas[0], &alphas[1]), &q(1, 2));
    Oracle::add_scaled(&mut expected2, &oracle.convolve(&alphas[1], &alphas[0]), &q(-1, 2));
    assert_eq!(
        oracle.from_dual(&two),
        oracle.from_dual(&oracle.to_dual(&basis, &expected2))
    );
}
