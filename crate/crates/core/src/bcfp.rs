//! Renormalisation by a constant character through the extraction /
//! contraction map, and its expression as an element of the action.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::One;
use serde_json::Value;

use crate::action::{encode, solve_against, ActionOptions, BranchedRP, HolderFamily, PairReader};
use crate::bck::ForestTensor;
use crate::construct::{holder_report_with, DyadicGroupPath, HolderReport};
use crate::dual::DualElement;
use crate::error::{Error, Result};
use crate::forest::{DecoratedForest, DecoratedTree, FlatTree};
use crate::lincomb::TensorKey;
use crate::scalar::{small_to_f64, Rational};

/// Decoration given to contracted nodes.
pub const CONTRACTED: u32 = 0;
/// Largest forest the brute-force extraction accepts.
pub const MAX_EXTRACTION_NODES: usize = 5;
/// Default ceiling for the weighted Hölder constants of the input.
pub const DEFAULT_BOUND_LIMIT: f64 = 1e6;

/// Constant character on `0`-free trees, extended multiplicatively and by
/// zero on every tree it does not list.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstantCharacter {
    values: BTreeMap<DecoratedTree, f64>,
}

/// Character as supplied by a caller; only the constant case is usable.
#[derive(Clone, Debug, PartialEq)]
pub enum CharacterInput {
    Constant(ConstantCharacter),
    /// Per-tree samples on the grid that are not constant in time.
    TimeDependent(BTreeMap<DecoratedTree, Vec<f64>>),
}

impl ConstantCharacter {
    pub fn new(values: BTreeMap<DecoratedTree, f64>) -> Result<Self> {
        for (t, v) in &values {
            if t.zero_count() > 0 {
                return Err(Error::Precondition(format!(
                    "character must vanish on trees with decoration 0, got {t}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Invalid(format!("character value on {t} is not finite")));
            }
        }
        Ok(ConstantCharacter { values })
    }

    /// The counit: `1` on the empty forest, `0` elsewhere.
    pub fn counit() -> Self {
        ConstantCharacter::default()
    }

    pub fn values(&self) -> &BTreeMap<DecoratedTree, f64> {
        &self.values
    }

    pub fn on_tree(&self, t: &DecoratedTree) -> f64 {
        self.values.get(t).copied().unwrap_or(0.0)
    }

    pub fn on_forest(&self, f: &DecoratedForest) -> f64 {
        f.trees().iter().map(|t| self.on_tree(t)).product()
    }
}

impl CharacterInput {
    /// `{"[1]": 0.5}` is constant; an array value is a time series and is
    /// constant only if all its samples agree.
    pub fn from_json(value: &Value) -> Result<Self> {
        let map = value
            .as_object()
            .ok_or_else(|| Error::Invalid("character JSON must be an object".into()))?;
        let mut constant = BTreeMap::new();
        let mut series = BTreeMap::new();
        let mut varies = false;
        for (key, v) in map {
            let tree: DecoratedTree = key.parse()?;
            let samples: Vec<f64> = match v {
                Value::Array(a) => a
                    .iter()
                    .map(|x| {
                        x.as_f64()
                            .ok_or_else(|| Error::Invalid(format!("entry {key} holds a non-number")))
                    })
                    .collect::<Result<_>>()?,
                other => vec![other
                    .as_f64()
                    .ok_or_else(|| Error::Invalid(format!("entry {key} is not a number")))?],
            };
            if samples.is_empty() {
                return Err(Error::Invalid(format!("entry {key} is empty")));
            }
            varies |= samples.iter().any(|x| *x != samples[0]);
            constant.insert(tree.clone(), samples[0]);
            series.insert(tree, samples);
        }
        if varies {
            Ok(CharacterInput::TimeDependent(series))
        } else {
            Ok(CharacterInput::Constant(ConstantCharacter::new(constant)?))
        }
    }

    pub fn constant(&self) -> Result<&ConstantCharacter> {
        match self {
            CharacterInput::Constant(c) => Ok(c),
            CharacterInput::TimeDependent(_) => Err(Error::TimeDependentCharacter),
        }
    }
}

/// Connected node sets of a flattened tree, as bitmasks.
fn connected_sets(flat: &FlatTree) -> Vec<u32> {
    let n = flat.len();
    (1u32..(1 << n))
        .filter(|&mask| {
            let tops = (0..n)
                .filter(|&v| mask & (1 << v) != 0)
                .filter(|&v| flat.parent[v].map_or(true, |p| mask & (1 << p) == 0))
                .count();
            tops == 1
        })
        .collect()
}

/// All collections of pairwise disjoint connected node sets, each listed
/// once with its pieces in increasing mask order.
fn disjoint_families(pieces: &[u32]) -> Vec<Vec<u32>> {
    fn rec(pieces: &[u32], start: usize, used: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        out.push(cur.clone());
        for i in start..pieces.len() {
            if pieces[i] & used == 0 {
                cur.push(pieces[i]);
                rec(pieces, i + 1, used | pieces[i], cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(pieces, 0, 0, &mut Vec::new(), &mut out);
    out
}

fn top_of(flat: &FlatTree, mask: u32) -> usize {
    (0..flat.len())
        .find(|&v| mask & (1 << v) != 0 && flat.parent[v].map_or(true, |p| mask & (1 << p) == 0))
        .expect("connected set has a top")
}

/// Tree obtained by collapsing each piece to one node decorated `0`.
fn contract(flat: &FlatTree, pieces: &[u32], v: usize) -> DecoratedTree {
    match pieces.iter().find(|&&m| m & (1 << v) != 0) {
        Some(&mask) => {
            let children = (0..flat.len())
                .filter(|&u| mask & (1 << u) != 0)
                .flat_map(|u| flat.children[u].iter().copied())
                .filter(|&c| mask & (1 << c) == 0)
                .map(|c| contract(flat, pieces, c))
                .collect();
            DecoratedTree::new(CONTRACTED, children)
        }
        None => {
            let children = flat.children[v].iter().map(|&c| contract(flat, pieces, c)).collect();
            DecoratedTree::new(flat.decoration[v], children)
        }
    }
}

/// `Ψ(τ)` for a tree: extracted forest on the left, contracted tree on the
/// right.
pub fn tree_extraction(tree: &DecoratedTree) -> Result<ForestTensor> {
    if tree.size() > MAX_EXTRACTION_NODES {
        return Err(Error::Precondition(format!(
            "extraction is limited to {MAX_EXTRACTION_NODES} nodes, got {}",
            tree.size()
        )));
    }
    let flat = tree.flatten();
    let mut out = ForestTensor::zero();
    for family in disjoint_families(&connected_sets(&flat)) {
        let left = DecoratedForest::from_trees(
            family
                .iter()
                .map(|&m| flat.subtree_where(top_of(&flat, m), |u| m & (1 << u) != 0))
                .collect(),
        );
        let right = DecoratedForest::single(contract(&flat, &family, 0));
        out.add_term(TensorKey(vec![left, right]), Rational::one());
    }
    Ok(out)
}

/// `Ψ` extended multiplicatively to forests.
pub fn bcfp_extraction(forest: &DecoratedForest) -> Result<ForestTensor> {
    if forest.size() > MAX_EXTRACTION_NODES {
        return Err(Error::Precondition(format!(
            "extraction is limited to {MAX_EXTRACTION_NODES} nodes, got {}",
            forest.size()
        )));
    }
    let mut acc = ForestTensor::single(TensorKey(vec![DecoratedForest::unit(), DecoratedForest::unit()]));
    for t in forest.trees() {
        acc = crate::bck::tensor_product(&acc, &tree_extraction(t)?);
    }
    Ok(acc)
}

/// `(v ⊗ id)Ψ(F)` as `(basis index, coefficient)` on `basis`.
fn contracted_row(
    forest: &DecoratedForest,
    v: &ConstantCharacter,
    basis: &crate::basis::Truncation<DecoratedForest>,
) -> Result<Vec<(usize, f64)>> {
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    for (key, c) in bcfp_extraction(forest)?.iter() {
        let weight = v.on_forest(&key.0[0]);
        if weight == 0.0 {
            continue;
        }
        let j = basis.require_index(&key.0[1])?;
        *acc.entry(j).or_default() += weight * crate::scalar::rational_to_f64(c);
    }
    Ok(acc.into_iter().collect())
}

/// Exponent `(1 − γ)|τ|_0 + γ|τ|` per forest key of `x`.
pub fn weighted_report(x: &BranchedRP) -> HolderReport {
    let gamma = small_to_f64(x.holder_scale());
    let basis = Arc::clone(x.basis());
    holder_report_with(x, |i| {
        let f = basis.key(i);
        (1.0 - gamma) * f.zero_count() as f64 + gamma * f.size() as f64
    })
}

/// Checks the weighted bound on every key that carries decoration `0`.
pub fn check_bound(x: &BranchedRP, limit: f64) -> Result<()> {
    let report = weighted_report(x);
    // Report slots follow basis indices 1, 2, ….
    for (slot, (k, c)) in report.keys.iter().zip(&report.constants).enumerate() {
        if x.basis().key(slot + 1).zero_count() > 0 && !(*c <= limit) {
            return Err(Error::BoundViolation {
                element: k.clone(),
                constant: *c,
                limit,
            });
        }
    }
    Ok(())
}

/// `⟨(M_vX)_0t, F⟩ = ⟨X_0t, (v ⊗ id)Ψ(F)⟩` on every forest of `x`.
pub fn m_v(x: &BranchedRP, v: &CharacterInput, limit: f64) -> Result<BranchedRP> {
    let v = v.constant()?;
    check_bound(x, limit)?;
    let basis = x.basis();
    let rows = basis
        .keys()
        .iter()
        .map(|f| contracted_row(f, v, basis))
        .collect::<Result<Vec<_>>>()?;
    let states = x
        .states()
        .iter()
        .map(|s| {
            let coeffs = rows.iter().map(|r| r.iter().map(|&(j, c)| c * s.at(j)).sum()).collect();
            DualElement::from_coeffs(basis, coeffs)
        })
        .collect::<Result<Vec<_>>>()?;
    DyadicGroupPath::from_states(
        Arc::clone(basis),
        x.algebra().clone(),
        x.depth(),
        x.level(),
        x.holder_scale(),
        x.config(),
        states,
    )
}

/// The family `g` with `act(g, X) = M_vX`, read off increment by increment
/// from `⟨X_st, (v ⊗ id)Ψ(τ)⟩` without forming `M_vX`.
pub fn bcfp_to_action(x: &BranchedRP, v: &CharacterInput, limit: f64, options: ActionOptions) -> Result<HolderFamily> {
    let v = v.constant()?;
    check_bound(x, limit)?;
    let basis = x.basis();
    let enc = encode(x, options)?;
    let mut rows: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for (tree, idx) in enc.layout.trees_upto(enc.layout.max_size()) {
        rows.insert(*idx, contracted_row(&DecoratedForest::single(tree.clone()), v, basis)?);
    }
    let reader = PairReader::new(x);
    solve_against(x, &enc, options, |_, idx, s, t| reader.pair(s, t, &rows[&idx]))
}
