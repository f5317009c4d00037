//! Reutenauer's permutation form of the Baker–Campbell–Hausdorff series,
//! evaluated against iterated reduced coproducts.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::Zero;

use crate::basis::{HopfKey, Truncation};
use crate::dual::DualElement;
use crate::error::{Error, Result};
use crate::scalar::{factorial, format_rational, Rational, Scalar};

/// Largest supported permutation order.
pub const MAX_ORDER: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct PermutationRow {
    /// One-line notation, 1-based.
    pub permutation: Vec<usize>,
    pub descents: usize,
    pub coefficient: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PermutationTable {
    pub order: usize,
    pub rows: Vec<PermutationRow>,
    /// `w(S) = Σ_{σ : σ⁻¹{1..|S|} = S} a_σ / (|S|! (k − |S|)!)` for every
    /// subset `S` of positions, as a bitmask.
    pub mask_weights: Vec<Rational>,
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (1..=k).collect();
    heap_lexicographic(&mut current, 0, &mut out);
    out.sort();
    out
}

fn heap_lexicographic(v: &mut Vec<usize>, start: usize, out: &mut Vec<Vec<usize>>) {
    if start == v.len() {
        out.push(v.clone());
        return;
    }
    for i in start..v.len() {
        v.swap(start, i);
        heap_lexicographic(v, start + 1, out);
        v.swap(start, i);
    }
}

/// `a_σ = (−1)^{d(σ)} / (k · C(k−1, d(σ)))`.
pub fn descent_weight(k: usize, descents: usize) -> Rational {
    let sign = if descents % 2 == 0 { 1 } else { -1 };
    let denom = BigInt::from(k) * binomial(BigInt::from(k - 1), BigInt::from(descents));
    Rational::new(BigInt::from(sign), denom)
}

fn build_table(k: usize) -> PermutationTable {
    let rows: Vec<PermutationRow> = permutations(k)
        .into_iter()
        .map(|p| {
            let descents = p.windows(2).filter(|w| w[0] > w[1]).count();
            PermutationRow {
                coefficient: descent_weight(k, descents),
                permutation: p,
                descents,
            }
        })
        .collect();
    let mut mask_weights = vec![Rational::zero(); 1 << k];
    for split in 0..=k {
        let norm = Rational::from_integer(BigInt::from(factorial(split) * factorial(k - split)));
        for row in &rows {
            let mask = row
                .permutation
                .iter()
                .enumerate()
                .filter(|(_, &s)| s <= split)
                .fold(0usize, |m, (j, _)| m | (1 << j));
            mask_weights[mask] += &row.coefficient / &norm;
        }
    }
    PermutationTable {
        order: k,
        rows,
        mask_weights,
    }
}

/// Permutation table for `S_k`, built once per order.
pub fn descent_coefficients(k: usize) -> Result<&'static PermutationTable> {
    static TABLES: [OnceLock<PermutationTable>; MAX_ORDER + 1] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    if k == 0 || k > MAX_ORDER {
        return Err(Error::PermutationCap { k, cap: MAX_ORDER });
    }
    Ok(TABLES[k].get_or_init(|| build_table(k)))
}

impl PermutationTable {
    /// CSV rows `k,permutation,descents,coefficient`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,permutation,descents,coefficient\n");
        for r in &self.rows {
            let perm: String = r.permutation.iter().map(|p| p.to_string()).collect();
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.order,
                perm,
                r.descents,
                format_rational(&r.coefficient)
            ));
        }
        out
    }
}

fn require_infinitesimal<S: Scalar, K: HopfKey>(alpha: &DualElement<S, K>) -> Result<()> {
    if alpha.is_infinitesimal() {
        Ok(())
    } else {
        Err(Error::Precondition("input is not an infinitesimal character".into()))
    }
}

fn same_basis<S: Scalar, K: HopfKey>(a: &DualElement<S, K>, b: &DualElement<S, K>) -> Result<()> {
    if a.basis().same_as(b.basis()) {
        Ok(())
    } else {
        Err(Error::BasisMismatch("operands live on different truncations".into()))
    }
}

/// `⟨φ_k(α_1⊗⋯⊗α_k), x⟩ = Σ_{Δ'_{k−1}x} Σ_σ a_σ Π_j ⟨α_{σ(j)}, x_(j)⟩`.
pub fn phi_k<S: Scalar, K: HopfKey>(alphas: &[DualElement<S, K>]) -> Result<DualElement<S, K>> {
    let k = alphas.len();
    let table = descent_coefficients(k)?;
    for a in alphas {
        same_basis(&alphas[0], a)?;
        require_infinitesimal(a)?;
    }
    let basis = alphas[0].basis();
    let weights: Vec<S> = table.rows.iter().map(|r| S::from_rational(&r.coefficient)).collect();
    let rows = basis.iterated_reduced(k - 1);
    let mut out = DualElement::zero(basis);
    for (x, terms) in rows.iter().enumerate() {
        let mut acc = S::zero();
        for (tuple, c) in terms {
            let mut inner = S::zero();
            for (row, w) in table.rows.iter().zip(&weights) {
                let mut prod = w.clone();
                for (j, &pos) in tuple.iter().enumerate() {
                    prod = prod * alphas[row.permutation[j] - 1].at(pos).clone();
                }
                inner = inner + prod;
            }
            acc = acc + S::from_i64(*c) * inner;
        }
        out.set(x, acc);
    }
    Ok(out)
}

/// Evaluates `Σ_{k ∈ orders} BCH_(k)(α, β)` on the keys `targets`,
/// without precondition checks.
pub(crate) fn bch_eval<S: Scalar, K: HopfKey>(
    alpha: &[S],
    beta: &[S],
    basis: &Truncation<K>,
    orders: std::ops::RangeInclusive<usize>,
    targets: std::ops::Range<usize>,
) -> Result<Vec<S>> {
    let mut weights: Vec<(usize, Vec<S>)> = Vec::new();
    for k in orders {
        let table = descent_coefficients(k)?;
        weights.push((k, table.mask_weights.iter().map(S::from_rational).collect()));
    }
    let mut out = Vec::with_capacity(targets.len());
    let mut a_vals: Vec<S> = Vec::new();
    let mut b_vals: Vec<S> = Vec::new();
    for x in targets {
        let mut acc = S::zero();
        for (k, w) in &weights {
            for (tuple, c) in &basis.iterated_reduced(k - 1)[x] {
                a_vals.clear();
                b_vals.clear();
                a_vals.extend(tuple.iter().map(|&p| alpha[p].clone()));
                b_vals.extend(tuple.iter().map(|&p| beta[p].clone()));
                let mut inner = S::zero();
                for (mask, wm) in w.iter().enumerate() {
                    if wm.is_zero() {
                        continue;
                    }
                    let mut prod = wm.clone();
                    for j in 0..*k {
                        let v = if mask & (1 << j) != 0 { &a_vals[j] } else { &b_vals[j] };
                        prod = prod * v.clone();
                    }
                    inner = inner + prod;
                }
                acc = acc + if *c == 1 { inner } else { S::from_i64(*c) * inner };
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// `BCH_N(α, β) = Σ_{k ≤ N} Σ_{i+j=k} φ_k(α^{⊗i}⊗β^{⊗j})/(i! j!)`, with `N`
/// the top grade of the truncation.
pub fn bch<S: Scalar, K: HopfKey>(alpha: &DualElement<S, K>, beta: &DualElement<S, K>) -> Result<DualElement<S, K>> {
    let n = alpha.basis().max_grade();
    bch_orders(alpha, beta, 1..=n)
}

/// The homogeneous term `BCH_(k)(α, β)`.
pub fn bch_term<S: Scalar, K: HopfKey>(
    alpha: &DualElement<S, K>,
    beta: &DualElement<S, K>,
    k: usize,
) -> Result<DualElement<S, K>> {
    if k == 0 {
        return Err(Error::Precondition("BCH order must be positive".into()));
    }
    bch_orders(alpha, beta, k..=k)
}

fn bch_orders<S: Scalar, K: HopfKey>(
    alpha: &DualElement<S, K>,
    beta: &DualElement<S, K>,
    orders: std::ops::RangeInclusive<usize>,
) -> Result<DualElement<S, K>> {
    same_basis(alpha, beta)?;
    require_infinitesimal(alpha)?;
    require_infinitesimal(beta)?;
    let basis = alpha.basis();
    let mut coeffs = bch_eval(alpha.coeffs(), beta.coeffs(), basis, orders, 0..basis.len())?;
    coeffs[0] = S::zero();
    DualElement::from_coeffs(basis, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn small_tables() {
        let t1 = descent_coefficients(1).unwrap();
        assert_eq!(t1.rows.len(), 1);
        assert!(t1.rows[0].coefficient.is_one());
        let t2 = descent_coefficients(2).unwrap();
        assert_eq!(t2.rows[0].coefficient, q(1, 2));
        assert_eq!(t2.rows[1].coefficient, q(-1, 2));
        let t3 = descent_coefficients(3).unwrap();
        for r in &t3.rows {
            let expected = match r.descents {
                0 => q(1, 3),
                1 => q(-1, 6),
                _ => q(1, 3),
            };
            assert_eq!(r.coefficient, expected);
        }
        assert_eq!(descent_coefficients(6).unwrap().rows.len(), 720);
        assert!(matches!(descent_coefficients(7), Err(Error::PermutationCap { .. })));
    }

    #[test]
    fn csv_layout() {
        let csv = descent_coefficients(2).unwrap().to_csv();
        assert_eq!(csv, "k,permutation,descents,coefficient\n2,12,0,1/2\n2,21,1,-1/2\n");
    }

    #[test]
    fn mask_weights_order_two() {
        // BCH_(2) = ½αβ − ½βα: masks {1} (α first) and {2}.
        let t = descent_coefficients(2).unwrap();
        assert_eq!(t.mask_weights[0b01], q(1, 2));
        assert_eq!(t.mask_weights[0b10], q(-1, 2));
        assert_eq!(t.mask_weights[0b00], Rational::zero());
    }

    #[test]
    fn matches_series_oracle_on_ladders() {
        use crate::basis::bck_truncation;
        use crate::forest::{DecoratedForest, DEFAULT_MAX_BASIS};
        let b = bck_truncation(3, 2, DEFAULT_MAX_BASIS).unwrap();
        let f = |s: &str| s.parse::<DecoratedForest>().unwrap();
        let alpha = DualElement::from_terms(
            &b,
            [
                (f("[1]"), q(1, 2)),
                (f("[2]"), q(2, 3)),
                (f("[2[1]]"), q(-1, 5)),
                (f("[1[1][2]]"), q(3, 1)),
            ],
        )
        .unwrap();
        let beta = DualElement::from_terms(
            &b,
            [(f("[1]"), q(-1, 1)), (f("[2]"), q(1, 4)), (f("[1[2[2]]]"), q(2, 9))],
        )
        .unwrap();
        let lhs = bch(&alpha, &beta).unwrap();
        let rhs = alpha
            .exp()
            .unwrap()
            .convolve(&beta.exp().unwrap())
            .unwrap()
            .log()
            .unwrap();
        assert_eq!(lhs, rhs);
    }
}
