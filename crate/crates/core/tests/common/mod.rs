//! Oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roughforge::basis::{HopfKey, Truncation};
use roughforge::bck::bck_coproduct;
use roughforge::construct::SampledPath;
use roughforge::dual::DualElement;
use roughforge::forest::DecoratedForest;
use roughforge::lincomb::{LinComb, TensorKey};
use roughforge::scalar::Rational;
use roughforge::shuffle::{deconcat_coproduct, Word};

pub type Functional<K> = BTreeMap<K, Rational>;

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Convolution from the symbolic coproduct, restricted to the truncation.
pub struct Oracle<K: HopfKey> {
    pub keys: Vec<K>,
    pub splits: Vec<Vec<(K, K, Rational)>>,
}

impl<K: HopfKey> Oracle<K> {
    pub fn new(basis: &Truncation<K>, coproduct: impl Fn(&K) -> Vec<(K, K, Rational)>) -> Self {
        let keys = basis.keys().to_vec();
        let splits = keys.iter().map(&coproduct).collect();
        Oracle { keys, splits }
    }

    pub fn get(a: &Functional<K>, k: &K) -> Rational {
        a.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn convolve(&self, a: &Functional<K>, b: &Functional<K>) -> Functional<K> {
        self.keys
            .iter()
            .zip(&self.splits)
            .map(|(k, split)| {
                let v = split.iter().fold(Rational::zero(), |acc, (l, r, c)| {
                    acc + c * Self::get(a, l) * Self::get(b, r)
                });
                (k.clone(), v)
            })
            .collect()
    }

    pub fn counit(&self) -> Functional<K> {
        let mut e: Functional<K> = self.keys.iter().map(|k| (k.clone(), Rational::zero())).collect();
        e.insert(K::unit(), Rational::one());
        e
    }

    pub fn add_scaled(acc: &mut Functional<K>, x: &Functional<K>, c: &Rational) {
        for (k, v) in x {
            *acc.entry(k.clone()).or_insert_with(Rational::zero) += v * c;
        }
    }

    pub fn exp(&self, a: &Functional<K>, n: usize) -> Functional<K> {
        let mut out = self.counit();
        let mut power = self.counit();
        let mut fact = Rational::one();
        for k in 1..=n {
            power = self.convolve(&power, a);
            fact *= Rational::from_integer(BigInt::from(k));
            Self::add_scaled(&mut out, &power, &(Rational::one() / &fact));
        }
        out
    }

    pub fn log(&self, x: &Functional<K>, n: usize) -> Functional<K> {
        let mut shifted = x.clone();
        Self::add_scaled(&mut shifted, &self.counit(), &-Rational::one());
        let mut out: Functional<K> = BTreeMap::new();
        let mut power = self.counit();
        for k in 1..=n {
            power = self.convolve(&power, &shifted);
            let sign = if k % 2 == 1 { 1 } else { -1 };
            Self::add_scaled(&mut out, &power, &q(sign, k as i64));
        }
        out
    }

    pub fn to_dual(&self, basis: &Arc<Truncation<K>>, a: &Functional<K>) -> DualElement<Rational, K> {
        DualElement::from_terms(basis, a.iter().map(|(k, v)| (k.clone(), v.clone()))).unwrap()
    }

    pub fn from_dual(&self, a: &DualElement<Rational, K>) -> Functional<K> {
        self.keys.iter().map(|k| (k.clone(), a.get(k))).collect()
    }
}

pub fn forest_oracle(basis: &Truncation<DecoratedForest>) -> Oracle<DecoratedForest> {
    Oracle::new(basis, |f| {
        bck_coproduct(f)
            .iter()
            .map(|(k, c)| (k.0[0].clone(), k.0[1].clone(), c.clone()))
            .collect()
    })
}

pub fn word_oracle(basis: &Truncation<Word<u32>>) -> Oracle<Word<u32>> {
    Oracle::new(basis, |w| {
        deconcat_coproduct(w)
            .iter()
            .map(|(k, c)| (k.0[0].clone(), k.0[1].clone(), c.clone()))
            .collect()
    })
}

pub fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    q(rng.gen_range(-5..=5), rng.gen_range(1..=4))
}

/// Infinitesimal characters on forests are exactly the functionals
/// supported on single trees.
pub fn random_tree_functional(
    basis: &Truncation<DecoratedForest>,
    rng: &mut ChaCha8Rng,
) -> Functional<DecoratedForest> {
    let mut out = BTreeMap::new();
    for f in basis.keys().iter().filter(|f| f.trees().len() == 1) {
        if rng.gen_bool(0.6) {
            out.insert(f.clone(), random_rational(rng));
        }
    }
    out
}

/// Random Lie polynomial: a combination of letters and nested brackets,
/// with the bracket taken in the dual (concatenation) algebra.
pub fn random_lie_functional(oracle: &Oracle<Word<u32>>, rng: &mut ChaCha8Rng) -> Functional<Word<u32>> {
    let letter = |a: u32| -> Functional<Word<u32>> {
        let mut f = BTreeMap::new();
        f.insert(Word::letter(a), Rational::one());
        f
    };
    let bracket = |x: &Functional<Word<u32>>, y: &Functional<Word<u32>>| {
        let mut out = oracle.convolve(x, y);
        Oracle::add_scaled(&mut out, &oracle.convolve(y, x), &-Rational::one());
        out
    };
    let mut out: Functional<Word<u32>> = BTreeMap::new();
    for _ in 0..4 {
        let depth = rng.gen_range(1..=4);
        let mut e = letter(rng.gen_range(1..=2));
        for _ in 1..depth {
            e = bracket(&letter(rng.gen_range(1..=2)), &e);
        }
        Oracle::add_scaled(&mut out, &e, &random_rational(rng));
    }
    out
}

/// Applies `Δ` to factor `slot` of every tensor in `t`.
pub fn split_slot<T: Ord + Clone>(
    t: &LinComb<TensorKey<T>>,
    slot: usize,
    delta: impl Fn(&T) -> LinComb<TensorKey<T>>,
) -> LinComb<TensorKey<T>> {
    t.map_linear(|key| {
        delta(&key.0[slot]).map_linear(|pair| {
            let mut v = key.0[..slot].to_vec();
            v.extend(pair.0.iter().cloned());
            v.extend(key.0[slot + 1..].iter().cloned());
            LinComb::single(TensorKey(v))
        })
    })
}

pub fn random_walk(depth: u32, seed: u64) -> SampledPath {
    let n = 1usize << depth;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (1.0 / n as f64).sqrt();
    let channels = (0..2)
        .map(|_| {
            let mut v = vec![0.0];
            for _ in 0..n {
                let step: f64 = if rng.gen_bool(0.5) { scale } else { -scale };
                v.push(v.last().unwrap() + step);
            }
            v
        })
        .collect();
    SampledPath::new(depth, channels).unwrap()
}

pub fn weierstrass(t: f64, h: f64) -> f64 {
    (0..12)
        .map(|k| 2f64.powf(-h * k as f64) * (2f64.powi(k) * PI * t).cos())
        .sum()
}

/// The five deterministic two-channel test signals.
pub fn test_paths(depth: u32) -> Vec<SampledPath> {
    vec![
        SampledPath::from_fn(depth, 2, |a, t| if a == 0 { (3.0 * t).sin() } else { (2.0 * t).cos() }).unwrap(),
        SampledPath::from_fn(depth, 2, |a, t| if a == 0 { t } else { t * t }).unwrap(),
        SampledPath::from_fn(depth, 2, |a, t| if a == 0 { (t - 0.5).abs() } else { t.powi(3) - t }).unwrap(),
        random_walk(depth, 7),
        SampledPath::from_fn(depth, 2, |a, t| {
            if a == 0 {
                weierstrass(t, 0.6)
            } else {
                weierstrass(1.0 - t, 0.8)
            }
        })
        .unwrap(),
    ]
}
