//! Butcher–Connes–Kreimer Hopf algebra on decorated forests.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::forest::{DecoratedForest, DecoratedTree};
use crate::lincomb::{LinComb, TensorKey};
use crate::scalar::Rational;

/// Rational combination of forests.
pub type ForestComb = LinComb<DecoratedForest>;
/// Element of `H^{⊗k}`: rational combination of `k`-tuples of forests.
pub type ForestTensor = LinComb<TensorKey<DecoratedForest>>;

fn pair(a: DecoratedForest, b: DecoratedForest) -> TensorKey<DecoratedForest> {
    TensorKey(vec![a, b])
}

/// `Δτ = τ⊗1 + 1⊗τ + Σ_C P^C(τ)⊗R^C(τ)` on a single tree.
pub fn tree_coproduct(tree: &DecoratedTree) -> ForestTensor {
    let whole = DecoratedForest::single(tree.clone());
    let mut out = ForestTensor::zero();
    out.add_term(pair(whole.clone(), DecoratedForest::unit()), Rational::one());
    out.add_term(pair(DecoratedForest::unit(), whole), Rational::one());
    for cut in tree.cuts() {
        out.add_term(
            pair(cut.pruned, DecoratedForest::single(cut.root_part)),
            Rational::one(),
        );
    }
    out
}

/// Coproduct extended multiplicatively to forests.
pub fn bck_coproduct(forest: &DecoratedForest) -> ForestTensor {
    let mut acc = ForestTensor::single(pair(DecoratedForest::unit(), DecoratedForest::unit()));
    for t in forest.trees() {
        acc = tensor_product(&acc, &tree_coproduct(t));
    }
    acc
}

/// Factor-wise product in `H^{⊗k}`.
pub fn tensor_product(a: &ForestTensor, b: &ForestTensor) -> ForestTensor {
    a.bilinear(b, |x, y| {
        LinComb::single(TensorKey(x.0.iter().zip(&y.0).map(|(p, q)| p.product(q)).collect()))
    })
}

pub fn counit(forest: &DecoratedForest) -> Rational {
    if forest.is_unit() {
        Rational::one()
    } else {
        Rational::zero()
    }
}

/// `Δ'x = Δx − x⊗1 − 1⊗x` on non-unit forests; `Δ'1 = 0`.
pub fn reduced_coproduct_forest(forest: &DecoratedForest) -> ForestTensor {
    if forest.is_unit() {
        return ForestTensor::zero();
    }
    let mut out = ForestTensor::zero();
    for (k, c) in bck_coproduct(forest).iter() {
        if k.0.iter().all(|f| !f.is_unit()) {
            out.add_term(k.clone(), c.clone());
        }
    }
    out
}

pub fn reduced_coproduct(x: &ForestComb) -> ForestTensor {
    x.map_linear(reduced_coproduct_forest)
}

/// `Δ'_n x` of arity `n + 1`, obtained by repeatedly splitting the first
/// factor with `Δ'`. `Δ'_0` is the identity on the augmentation ideal.
pub fn iterated_reduced(x: &ForestComb, n: usize) -> ForestTensor {
    let mut acc: ForestTensor = x
        .iter()
        .filter(|(f, _)| !f.is_unit())
        .map(|(f, c)| (TensorKey(vec![f.clone()]), c.clone()))
        .collect();
    for _ in 0..n {
        acc = acc.map_linear(|key| {
            let (first, rest) = key.0.split_first().unwrap();
            reduced_coproduct_forest(first).map_linear(|split| {
                let mut v = split.0.clone();
                v.extend(rest.iter().cloned());
                LinComb::single(TensorKey(v))
            })
        });
    }
    acc
}

/// Antipode via the cut recursion `S(τ) = −τ − Σ_C S(P^C(τ))·R^C(τ)`,
/// extended multiplicatively (the algebra is commutative).
pub fn antipode(forest: &DecoratedForest) -> ForestComb {
    let mut memo = HashMap::new();
    antipode_memo(forest, &mut memo)
}

pub fn antipode_memo(forest: &DecoratedForest, memo: &mut HashMap<DecoratedTree, ForestComb>) -> ForestComb {
    let mut acc = ForestComb::single(DecoratedForest::unit());
    for t in forest.trees() {
        let st = tree_antipode(t, memo);
        acc = forest_comb_product(&acc, &st);
    }
    acc
}

fn tree_antipode(tree: &DecoratedTree, memo: &mut HashMap<DecoratedTree, ForestComb>) -> ForestComb {
    if let Some(v) = memo.get(tree) {
        return v.clone();
    }
    let mut out = ForestComb::zero();
    out.add_term(DecoratedForest::single(tree.clone()), -Rational::one());
    for cut in tree.cuts() {
        let sp = antipode_memo(&cut.pruned, memo);
        let r = ForestComb::single(DecoratedForest::single(cut.root_part));
        out.sub_assign(&forest_comb_product(&sp, &r));
    }
    memo.insert(tree.clone(), out.clone());
    out
}

pub fn forest_comb_product(a: &ForestComb, b: &ForestComb) -> ForestComb {
    a.bilinear(b, |x, y| LinComb::single(x.product(y)))
}

/// Multiplication `m: H⊗H → H`.
pub fn multiply(t: &ForestTensor) -> ForestComb {
    t.map_linear(|k| {
        let mut f = DecoratedForest::unit();
        for x in &k.0 {
            f = f.product(x);
        }
        LinComb::single(f)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn f(s: &str) -> DecoratedForest {
        s.parse().unwrap()
    }

    fn q(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    fn tensor(terms: &[(&str, &str, i64)]) -> ForestTensor {
        terms.iter().map(|(a, b, c)| (pair(f(a), f(b)), q(*c))).collect()
    }

    #[test]
    fn coproduct_examples() {
        assert_eq!(bck_coproduct(&f("[1]")), tensor(&[("[1]", "1", 1), ("1", "[1]", 1)]));
        assert_eq!(
            bck_coproduct(&f("[1[2]]")),
            tensor(&[("[1[2]]", "1", 1), ("1", "[1[2]]", 1), ("[2]", "[1]", 1)])
        );
        assert_eq!(
            bck_coproduct(&f("[1][2]")),
            tensor(&[
                ("[1][2]", "1", 1),
                ("1", "[1][2]", 1),
                ("[1]", "[2]", 1),
                ("[2]", "[1]", 1)
            ])
        );
        // Repeated factors produce multiplicities.
        assert_eq!(bck_coproduct(&f("[1][1]")).coeff(&pair(f("[1]"), f("[1]"))), q(2));
    }

    #[test]
    fn reduced_examples() {
        assert!(reduced_coproduct_forest(&f("[3]")).is_zero());
        assert_eq!(reduced_coproduct_forest(&f("[1[2]]")), tensor(&[("[2]", "[1]", 1)]));
        let x = ForestComb::single(f("[1[2[3]]]"));
        let d2 = iterated_reduced(&x, 2);
        assert_eq!(d2.len(), 1);
        for (k, _) in d2.iter() {
            assert!(k.0.iter().all(|p| p.size() == 1));
        }
    }

    #[test]
    fn antipode_examples() {
        assert_eq!(
            antipode(&DecoratedForest::unit()),
            ForestComb::single(DecoratedForest::unit())
        );
        assert_eq!(antipode(&f("[2]")), ForestComb::from_terms([(f("[2]"), q(-1))]));
        assert_eq!(
            antipode(&f("[1[2]]")),
            ForestComb::from_terms([(f("[1[2]]"), q(-1)), (f("[1][2]"), q(1))])
        );
    }
}
