mod common;

use common::{random_walk, test_paths, weierstrass};
use num_rational::Rational64;
use proptest::prelude::*;
use roughforge::basis::HopfKey;
use roughforge::construct::{
    build_anisotropic, build_bck, build_shuffle, character_residual, chen_residual, correction_residual, holder_report,
    ConstructionConfig, DyadicGroupPath, SampledPath,
};
use roughforge::forest::DEFAULT_MAX_BASIS;
use roughforge::shuffle::{Alphabet, Word};

fn assert_same_states<K: HopfKey>(a: &DyadicGroupPath<K>, b: &DyadicGroupPath<K>) {
    assert_eq!(a.points(), b.points());
    for (sa, sb) in a.states().iter().zip(b.states()) {
        for i in 0..b.basis().len() {
            let k = b.basis().key(i);
            assert_eq!(sa.get(k).to_bits(), sb.at(i).to_bits(), "key {k}");
        }
    }
}

#[test]
fn branched_lifts_satisfy_chen_and_holder() {
    for gamma in [Rational64::new(2, 5), Rational64::new(3, 10)] {
        let n = gamma.recip().to_integer() as usize;
        for x in test_paths(6) {
            let (p, traces) = build_bck(&x, gamma, n, ConstructionConfig::default(), DEFAULT_MAX_BASIS).unwrap();
            assert_eq!(p.level(), n);
            assert!(chen_residual(&p) <= 1e-10, "chen {}", chen_residual(&p));
            assert!(character_residual(&p) <= 1e-10);
            assert!(holder_report(&p).all_finite());
            for t in &traces {
                assert!(correction_residual(&p.restricted(t.level), t).unwrap() <= 1e-10);
            }
        }
    }
}

#[test]
fn geometric_lifts_satisfy_chen() {
    for x in test_paths(6) {
        let (p, _) = build_shuffle(
            &x,
            Rational64::new(3, 10),
            3,
            ConstructionConfig::default(),
            DEFAULT_MAX_BASIS,
        )
        .unwrap();
        assert!(chen_residual(&p) <= 1e-10);
        assert!(character_residual(&p) <= 1e-10);
        assert!(holder_report(&p).all_finite());
    }
}

#[test]
fn scalar_channel_square_closed_form() {
    let x = SampledPath::from_fn(8, 1, |_, t| weierstrass(t, 0.5)).unwrap();
    let (p, _) = build_shuffle(
        &x,
        Rational64::new(2, 5),
        2,
        ConstructionConfig::default(),
        DEFAULT_MAX_BASIS,
    )
    .unwrap();
    let aa = Word::parse("1.1").unwrap();
    for t in 0..p.points() {
        let dx = x.channels()[0][t] - x.channels()[0][0];
        assert!((p.state(t).get(&aa) - 0.5 * dx * dx).abs() <= 1e-12);
    }
}

#[test]
fn equal_exponent_anisotropic_build_is_bit_identical() {
    let gamma = Rational64::new(3, 10);
    for x in test_paths(5) {
        let (iso, _) = build_shuffle(&x, gamma, 3, ConstructionConfig::default(), DEFAULT_MAX_BASIS).unwrap();
        let alphabet = Alphabet::uniform(vec![1u32, 2], gamma).unwrap();
        let (aniso, _) = build_anisotropic(&x, &alphabet, ConstructionConfig::default(), DEFAULT_MAX_BASIS).unwrap();
        assert_eq!(aniso.basis().len(), iso.basis().len());
        assert_same_states(&aniso, &iso);
    }
}

#[test]
fn alphabet_extension_restricts_exactly() {
    let w = |n, d| Rational64::new(n, d);
    let small = Alphabet::new(vec![1u32, 2], vec![w(2, 5), w(7, 20)]).unwrap();
    let large = Alphabet::new(vec![1u32, 2, 3], vec![w(2, 5), w(7, 20), w(9, 20)]).unwrap();
    let x2 = random_walk(5, 3);
    let mut channels = x2.channels().to_vec();
    channels.push((0..x2.points()).map(|k| (k as f64 / 8.0).sin()).collect());
    let x3 = SampledPath::new(5, channels).unwrap();
    let (p2, _) = build_anisotropic(&x2, &small, ConstructionConfig::default(), DEFAULT_MAX_BASIS).unwrap();
    let (p3, _) = build_anisotropic(&x3, &large, ConstructionConfig::default(), DEFAULT_MAX_BASIS).unwrap();
    assert_same_states(&p3, &p2);
    assert!(chen_residual(&p3) <= 1e-10);
}

#[test]
fn lower_levels_are_untouched_by_extension() {
    let x = random_walk(5, 9);
    let (p3, _) = build_bck(
        &x,
        Rational64::new(3, 10),
        3,
        ConstructionConfig::default(),
        DEFAULT_MAX_BASIS,
    )
    .unwrap();
    let (p2, _) = build_bck(
        &x,
        Rational64::new(3, 10),
        2,
        ConstructionConfig::default(),
        DEFAULT_MAX_BASIS,
    )
    .unwrap();
    assert_same_states(&p3, &p2);
}

#[test]
fn invalid_exponents_are_rejected() {
    let x = random_walk(3, 1);
    let cfg = ConstructionConfig::default();
    assert!(build_bck(&x, Rational64::new(1, 2), 2, cfg, DEFAULT_MAX_BASIS).is_err());
    assert!(build_shuffle(&x, Rational64::new(1, 3), 3, cfg, DEFAULT_MAX_BASIS).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn any_config_gives_chen(seed in 0u64..1000, z_init in -2.0f64..2.0, split in 0.0f64..=1.0) {
        let x = random_walk(4, seed);
        let cfg = ConstructionConfig { z_init, split_weight: split };
        let (p, traces) = build_bck(&x, Rational64::new(3, 10), 3, cfg, DEFAULT_MAX_BASIS).unwrap();
        prop_assert!(chen_residual(&p) <= 1e-10);
        prop_assert!(character_residual(&p) <= 1e-10);
        for t in &traces {
            prop_assert!(t.recursion_holds);
        }
    }
}
