use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roughforge::basis::{bck_truncation, shuffle_truncation};
use roughforge::construct::chen_residual;
use roughforge::forest::{DecoratedForest, DEFAULT_MAX_BASIS};
use roughforge::scalar::Rational;
use roughforge::shuffle::{deconcat_coproduct, shuffle, words_up_to, Word};
use roughforge::signature::{arborified_grid_path, from_samples, Arborification, PiecewiseLinearPath};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Random rational PL path on `[0, 1]` with 2 to 5 pieces.
fn random_path(rng: &mut ChaCha8Rng) -> PiecewiseLinearPath<Rational> {
    let pieces = rng.gen_range(2..=5);
    let mut interior: Vec<Rational> = (0..pieces - 1).map(|_| q(rng.gen_range(1..60), 60)).collect();
    interior.sort();
    interior.dedup();
    let mut times = vec![Rational::zero()];
    times.extend(interior);
    times.push(Rational::one());
    let values = (0..2)
        .map(|_| {
            times
                .iter()
                .map(|_| q(rng.gen_range(-9..=9), rng.gen_range(1..=5)))
                .collect()
        })
        .collect();
    PiecewiseLinearPath::new(times, vec![1, 2], values).unwrap()
}

fn random_window(rng: &mut ChaCha8Rng) -> (Rational, Rational, Rational) {
    let mut pts: Vec<i64> = Vec::new();
    while pts.len() < 3 {
        let p = rng.gen_range(0..=70);
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    pts.sort_unstable();
    (q(pts[0], 70), q(pts[1], 70), q(pts[2], 70))
}

fn all_words() -> Vec<Word<u32>> {
    let mut out = vec![Word::empty()];
    out.extend(words_up_to(&[1, 2], 4));
    out
}

fn word_values(p: &PiecewiseLinearPath<Rational>, s: &Rational, t: &Rational) -> BTreeMap<Word<u32>, Rational> {
    all_words()
        .into_iter()
        .map(|w| {
            let v = p.signature(s, t, &w).unwrap();
            (w, v)
        })
        .collect()
}

#[test]
fn shuffle_identity_and_chen_in_exact_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let words = all_words();
    for _ in 0..20 {
        let p = random_path(&mut rng);
        let (s, u, t) = random_window(&mut rng);
        let st = word_values(&p, &s, &t);
        let su = word_values(&p, &s, &u);
        let ut = word_values(&p, &u, &t);
        for a in &words {
            for b in &words {
                if a.len() + b.len() > 4 {
                    continue;
                }
                let rhs = shuffle(a, b)
                    .iter()
                    .fold(Rational::zero(), |acc, (w, c)| acc + c * &st[w]);
                assert_eq!(&st[a] * &st[b], rhs, "shuffle {a} ⧢ {b}");
            }
            let chen = deconcat_coproduct(a)
                .iter()
                .fold(Rational::zero(), |acc, (k, c)| acc + c * &su[&k.0[0]] * &ut[&k.0[1]]);
            assert_eq!(chen, st[a], "chen on {a}");
        }
    }
}

#[test]
fn character_route_matches_word_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let basis = shuffle_truncation(4, 2, DEFAULT_MAX_BASIS).unwrap();
    for _ in 0..5 {
        let p = random_path(&mut rng);
        let (s, _, t) = random_window(&mut rng);
        let x = p.signature_character(&s, &t, &basis).unwrap();
        assert!(x.is_character());
        for (i, w) in basis.keys().iter().enumerate() {
            assert_eq!(*x.at(i), p.signature(&s, &t, w).unwrap());
        }
    }
}

#[test]
fn single_letter_powers_depend_only_on_the_increment() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..5 {
        let p = random_path(&mut rng);
        let (s, _, t) = random_window(&mut rng);
        let dx = p.value_at(0, &t) - p.value_at(0, &s);
        let mut expected = Rational::one();
        for k in 1..=4i64 {
            expected = expected * &dx / Rational::from_integer(BigInt::from(k));
            let w = Word::new(vec![1; k as usize]);
            assert_eq!(p.signature(&s, &t, &w).unwrap(), expected);
        }
    }
}

#[test]
fn arborified_signature_is_a_branched_character() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let forests = bck_truncation(4, 2, DEFAULT_MAX_BASIS).unwrap();
    let words = shuffle_truncation(4, 2, DEFAULT_MAX_BASIS).unwrap();
    let arb = Arborification::new(&forests, &words).unwrap();
    for _ in 0..5 {
        let p = random_path(&mut rng);
        let (s, u, t) = random_window(&mut rng);
        let x = |a: &Rational, b: &Rational| arb.apply(&p.signature_character(a, b, &words).unwrap()).unwrap();
        let (xst, xsu, xut) = (x(&s, &t), x(&s, &u), x(&u, &t));
        assert!(xst.is_character());
        assert_eq!(xsu.convolve(&xut).unwrap(), xst);
        let ladder: DecoratedForest = "[1[2]]".parse().unwrap();
        assert_eq!(
            xst.get(&ladder),
            p.signature(&s, &t, &Word::parse("2.1").unwrap()).unwrap()
        );
    }
}

#[test]
fn rejects_bad_windows_and_breakpoints() {
    let p = PiecewiseLinearPath::new(vec![q(0, 1), q(1, 1)], vec![1], vec![vec![q(0, 1), q(1, 1)]]).unwrap();
    assert!(p.signature(&q(1, 2), &q(1, 4), &Word::letter(1)).is_err());
    assert!(p.signature(&q(0, 1), &q(2, 1), &Word::letter(1)).is_err());
    assert!(PiecewiseLinearPath::new(vec![q(0, 1), q(0, 1)], vec![1], vec![vec![q(0, 1), q(1, 1)]]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn float_grid_lift_satisfies_chen(values in prop::collection::vec(-2.0f64..2.0, 18)) {
        let (a, b) = values.split_at(9);
        let p = from_samples(3, vec![1, 2], vec![a.to_vec(), b.to_vec()]).unwrap();
        let x = arborified_grid_path(&p, 3, 3, Rational64::new(3, 10), DEFAULT_MAX_BASIS).unwrap();
        prop_assert!(chen_residual(&x) <= 1e-10);
    }
}
