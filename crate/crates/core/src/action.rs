//! Encoding of branched paths as anisotropic geometric paths over tree
//! letters, the action of tree-indexed Hölder families on branched paths,
//! and the solver that recovers the family translating one path into
//! another.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::sync::Arc;

use num_rational::Rational64;
use serde_json::{Map, Value};

use crate::basis::{anisotropic_truncation, HopfKey, Truncation};
use crate::construct::{build_anisotropic, ConstructionConfig, DyadicGroupPath, SampledPath};
use crate::dual::DualElement;
use crate::error::{Error, Result};
use crate::forest::{DecoratedForest, DecoratedTree, DEFAULT_MAX_BASIS};
use crate::hairer_kelly::{PsiCache, TreeWordComb};
use crate::scalar::rational_to_f64;
use crate::shuffle::{Alphabet, Word};

pub type BranchedRP = DyadicGroupPath<DecoratedForest>;
pub type AnisotropicRP = DyadicGroupPath<Word<DecoratedTree>>;

/// Default sup-norm tolerance for the vanishing of `δ`.
pub const DELTA_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionOptions {
    /// Relative tolerance `|H_st − (f_t − f_s)| ≤ tol · max(1, |H_st|)`.
    pub tolerance: f64,
    /// Enumeration cap for the anisotropic word bases.
    pub cap: usize,
}

impl Default for ActionOptions {
    fn default() -> Self {
        ActionOptions {
            tolerance: DELTA_TOLERANCE,
            cap: DEFAULT_MAX_BASIS,
        }
    }
}

/// Tree-indexed family of grid functions `g^τ` with `g^τ_0 = 0`. Trees not
/// stored are identically zero.
#[derive(Clone, Debug, PartialEq)]
pub struct HolderFamily {
    depth: u32,
    values: BTreeMap<DecoratedTree, Vec<f64>>,
}

impl HolderFamily {
    pub fn zero(depth: u32) -> Self {
        HolderFamily {
            depth,
            values: BTreeMap::new(),
        }
    }

    pub fn new(depth: u32, values: BTreeMap<DecoratedTree, Vec<f64>>) -> Result<Self> {
        let points = (1usize << depth) + 1;
        for (tree, v) in &values {
            if v.len() != points {
                return Err(Error::Invalid(format!(
                    "family entry {tree} has {} samples, expected {points}",
                    v.len()
                )));
            }
            if v[0] != 0.0 {
                return Err(Error::Precondition(format!("family entry {tree} must vanish at t = 0")));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Invalid(format!("family entry {tree} is not finite")));
            }
        }
        Ok(HolderFamily { depth, values })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn points(&self) -> usize {
        (1usize << self.depth) + 1
    }

    pub fn trees(&self) -> impl Iterator<Item = &DecoratedTree> {
        self.values.keys()
    }

    pub fn values(&self) -> &BTreeMap<DecoratedTree, Vec<f64>> {
        &self.values
    }

    pub fn get(&self, tree: &DecoratedTree) -> Option<&[f64]> {
        self.values.get(tree).map(|v| v.as_slice())
    }

    pub fn at(&self, tree: &DecoratedTree, t: usize) -> f64 {
        self.values.get(tree).map_or(0.0, |v| v[t])
    }

    pub fn set(&mut self, tree: DecoratedTree, values: Vec<f64>) -> Result<()> {
        let mut one = BTreeMap::new();
        one.insert(tree, values);
        let checked = HolderFamily::new(self.depth, one)?;
        self.values.extend(checked.values);
        Ok(())
    }

    /// Pointwise sum `(g + h)^τ = g^τ + h^τ`.
    pub fn plus(&self, other: &HolderFamily) -> Result<HolderFamily> {
        if self.depth != other.depth {
            return Err(Error::DepthMismatch {
                left: self.depth,
                right: other.depth,
            });
        }
        let mut values = self.values.clone();
        for (tree, v) in &other.values {
            let slot = values.entry(tree.clone()).or_insert_with(|| vec![0.0; v.len()]);
            for (a, b) in slot.iter_mut().zip(v) {
                *a += b;
            }
        }
        Ok(HolderFamily {
            depth: self.depth,
            values,
        })
    }

    /// Per-tree sup distance over the union of stored trees.
    pub fn sup_distance(&self, other: &HolderFamily) -> BTreeMap<DecoratedTree, f64> {
        let mut out = BTreeMap::new();
        for tree in self.values.keys().chain(other.values.keys()) {
            let d = (0..self.points())
                .map(|t| (self.at(tree, t) - other.at(tree, t)).abs())
                .fold(0.0, f64::max);
            out.insert(tree.clone(), d);
        }
        out
    }

    pub fn max_distance(&self, other: &HolderFamily) -> f64 {
        self.sup_distance(other).values().copied().fold(0.0, f64::max)
    }

    /// `{"[1[2]]": [0.0, …], …}` in canonical tree order.
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for (tree, v) in &self.values {
            map.insert(tree.to_string(), Value::from(v.clone()));
        }
        Value::Object(map)
    }

    pub fn from_json(value: &Value) -> Result<HolderFamily> {
        let map = value
            .as_object()
            .ok_or_else(|| Error::Invalid("family JSON must be an object".into()))?;
        let mut values = BTreeMap::new();
        let mut depth = None;
        for (key, arr) in map {
            let tree: DecoratedTree = key.parse()?;
            let arr = arr
                .as_array()
                .ok_or_else(|| Error::Invalid(format!("entry {key} must be an array")))?;
            let v = arr
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| Error::Invalid(format!("entry {key} holds a non-number")))
                })
                .collect::<Result<Vec<f64>>>()?;
            let cells = v.len().saturating_sub(1);
            if !cells.is_power_of_two() {
                return Err(Error::Invalid(format!("entry {key} length is not 2^M + 1")));
            }
            let m = cells.trailing_zeros();
            if *depth.get_or_insert(m) != m {
                return Err(Error::DepthMismatch {
                    left: depth.unwrap(),
                    right: m,
                });
            }
            values.insert(tree, v);
        }
        HolderFamily::new(depth.unwrap_or(1), values)
    }
}

/// Coefficient reader for increments `⟨X_st, ·⟩` of a stored grid path.
pub(crate) struct PairReader<'a, K: HopfKey> {
    path: &'a DyadicGroupPath<K>,
    inverses: Vec<DualElement<f64, K>>,
}

impl<'a, K: HopfKey> PairReader<'a, K> {
    pub(crate) fn new(path: &'a DyadicGroupPath<K>) -> Self {
        PairReader {
            inverses: path.inverses(),
            path,
        }
    }

    pub(crate) fn at(&self, s: usize, t: usize, i: usize) -> f64 {
        self.inverses[s].convolve_at(self.path.state(t), i)
    }

    pub(crate) fn pair(&self, s: usize, t: usize, terms: &[(usize, f64)]) -> f64 {
        terms.iter().map(|&(i, c)| c * self.at(s, t, i)).sum()
    }
}

/// Constructive inverse of `δ` on the grid: `f_t = H_{0t}`, after checking
/// `H_st = f_t − f_s` on every pair.
pub(crate) fn invert_delta<F: Fn(usize, usize) -> f64>(
    points: usize,
    h: F,
    tolerance: f64,
    element: &dyn Display,
) -> Result<Vec<f64>> {
    let mut f = vec![0.0; points];
    for (t, slot) in f.iter_mut().enumerate().skip(1) {
        *slot = h(0, t);
    }
    let mut worst = 0.0f64;
    for s in 1..points {
        for t in s + 1..points {
            let hv = h(s, t);
            let r = (hv - (f[t] - f[s])).abs() / 1f64.max(hv.abs());
            worst = worst.max(r);
        }
    }
    if worst > tolerance {
        return Err(Error::DeltaNotVanishing {
            element: element.to_string(),
            residual: worst,
            tolerance,
        });
    }
    Ok(f)
}

/// Trees of a forest truncation grouped by size, with their basis indices.
#[derive(Clone, Debug)]
pub struct TreeLayout {
    pub by_size: Vec<Vec<(DecoratedTree, usize)>>,
}

impl TreeLayout {
    pub fn new(basis: &Truncation<DecoratedForest>) -> Self {
        let mut by_size = vec![Vec::new(); basis.max_grade() + 1];
        for (i, f) in basis.keys().iter().enumerate() {
            if let Some(t) = f.as_tree() {
                by_size[t.size()].push((t.clone(), i));
            }
        }
        TreeLayout { by_size }
    }

    pub fn max_size(&self) -> usize {
        self.by_size.len() - 1
    }

    pub fn trees_upto(&self, k: usize) -> impl Iterator<Item = &(DecoratedTree, usize)> {
        self.by_size.iter().take(k + 1).flatten()
    }
}

fn require_branched(x: &BranchedRP) -> Result<()> {
    if x.level() != x.basis().max_grade() {
        return Err(Error::Precondition(format!(
            "branched path built to level {} of a truncation of order {}",
            x.level(),
            x.basis().max_grade()
        )));
    }
    // Every tree must be a letter of weight `γ|τ| ≤ 1`.
    let top = x.holder_scale().recip().to_integer() as usize;
    if x.level() > top {
        return Err(Error::LevelOverflow {
            level: x.level(),
            max: top,
        });
    }
    Ok(())
}

/// Anisotropic lift over the trees of size `≤ k`, letter `τ` with exponent
/// `γ|τ|`, driven by `channels[τ]`.
pub fn lift_tree_channels(
    channels: &BTreeMap<DecoratedTree, Vec<f64>>,
    k: usize,
    gamma: Rational64,
    depth: u32,
    config: ConstructionConfig,
    cap: usize,
) -> Result<AnisotropicRP> {
    let letters: Vec<DecoratedTree> = channels.keys().filter(|t| t.size() <= k).cloned().collect();
    let weights: Vec<Rational64> = letters
        .iter()
        .map(|t| gamma * Rational64::from(t.size() as i64))
        .collect();
    let alphabet = Alphabet::new(letters, weights)?;
    let data = alphabet.letters().iter().map(|t| channels[t].clone()).collect();
    let x = SampledPath::new(depth, data)?;
    let (path, _) = build_anisotropic(&x, &alphabet, config, cap)?;
    Ok(path)
}

/// Dense rows `ψ(F)` as `(word index, coefficient)` on a word basis.
fn psi_rows(
    psi: &mut PsiCache,
    forests: impl Iterator<Item = DecoratedForest>,
    words: &Truncation<Word<DecoratedTree>>,
    tail: bool,
) -> Result<Vec<Vec<(usize, f64)>>> {
    forests
        .map(|f| {
            let comb: TreeWordComb = match (tail, f.as_tree()) {
                (true, Some(t)) => psi.tree_tail(t),
                _ => psi.forest(&f),
            };
            comb.iter()
                .map(|(w, c)| Ok((words.require_index(w)?, rational_to_f64(c))))
                .collect()
        })
        .collect()
}

/// Result of `encode`: the tree increments `x^τ` and the anisotropic lifts
/// over `𝒯_k` for every `k ≤ N`.
#[derive(Clone, Debug)]
pub struct Encoding {
    pub gamma: Rational64,
    pub config: ConstructionConfig,
    pub layout: TreeLayout,
    pub increments: BTreeMap<DecoratedTree, Vec<f64>>,
    /// `stages[k − 1]` lives on the trees of size `≤ k`.
    pub stages: Vec<AnisotropicRP>,
}

impl Encoding {
    /// `X̄`, the lift over all of `𝒯_N`.
    pub fn xbar(&self) -> &AnisotropicRP {
        self.stages.last().expect("at least one stage")
    }
}

fn construction_config(x: &BranchedRP) -> ConstructionConfig {
    x.config().unwrap_or_default()
}

/// Size recursion shared by `encode` and the translation solvers:
/// `f^τ_t − f^τ_s = target(τ, s, t) − ⟨Y^{(k−1)}_st, ψ_{k−1}(τ)⟩`, where
/// `Y^{(k−1)}` is lifted from `shift + f` on the trees of size `< k`.
fn size_recursion<T: Fn(&DecoratedTree, usize, usize, usize) -> f64>(
    layout: &TreeLayout,
    gamma: Rational64,
    depth: u32,
    config: ConstructionConfig,
    options: ActionOptions,
    shift: Option<&BTreeMap<DecoratedTree, Vec<f64>>>,
    target: T,
) -> Result<(BTreeMap<DecoratedTree, Vec<f64>>, Vec<AnisotropicRP>)> {
    let points = (1usize << depth) + 1;
    let mut solved: BTreeMap<DecoratedTree, Vec<f64>> = BTreeMap::new();
    let mut stages: Vec<AnisotropicRP> = Vec::new();
    let mut psi = PsiCache::new();
    let channel = |solved: &BTreeMap<DecoratedTree, Vec<f64>>, t: &DecoratedTree| -> Vec<f64> {
        let mut v = solved[t].clone();
        if let Some(sh) = shift {
            for (a, b) in v.iter_mut().zip(&sh[t]) {
                *a += b;
            }
        }
        v
    };
    for k in 1..=layout.max_size() {
        let trees = &layout.by_size[k];
        if k == 1 {
            for (tree, idx) in trees {
                let f = invert_delta(points, |s, t| target(tree, *idx, s, t), options.tolerance, tree)?;
                solved.insert(tree.clone(), f);
            }
        } else {
            let prev = stages.last().expect("stage k − 1 exists");
            let rows = psi_rows(
                &mut psi,
                trees.iter().map(|(t, _)| DecoratedForest::single(t.clone())),
                prev.basis(),
                true,
            )?;
            let reader = PairReader::new(prev);
            for ((tree, idx), row) in trees.iter().zip(&rows) {
                let f = invert_delta(
                    points,
                    |s, t| target(tree, *idx, s, t) - reader.pair(s, t, row),
                    options.tolerance,
                    tree,
                )?;
                solved.insert(tree.clone(), f);
            }
        }
        let channels: BTreeMap<DecoratedTree, Vec<f64>> = layout
            .trees_upto(k)
            .map(|(t, _)| (t.clone(), channel(&solved, t)))
            .collect();
        stages.push(lift_tree_channels(&channels, k, gamma, depth, config, options.cap)?);
    }
    Ok((solved, stages))
}

/// Branched → anisotropic encoding: solves for `x^τ` size by size so that
/// `⟨X_st, τ⟩ = ⟨X̄_st, ψ(τ)⟩`.
pub fn encode(x: &BranchedRP, options: ActionOptions) -> Result<Encoding> {
    require_branched(x)?;
    let layout = TreeLayout::new(x.basis());
    let config = construction_config(x);
    let reader = PairReader::new(x);
    let (increments, stages) = size_recursion(
        &layout,
        x.holder_scale(),
        x.depth(),
        config,
        options,
        None,
        |_, idx, s, t| reader.at(s, t, idx),
    )?;
    Ok(Encoding {
        gamma: x.holder_scale(),
        config,
        layout,
        increments,
        stages,
    })
}

/// `⟨Z_0t, F⟩ = ⟨Y_0t, ψ(F)⟩` for every forest `F` of `x`'s truncation.
pub fn pull_back(y: &AnisotropicRP, x: &BranchedRP) -> Result<BranchedRP> {
    let basis = x.basis();
    let rows = psi_rows(&mut PsiCache::new(), basis.keys().iter().cloned(), y.basis(), false)?;
    let states = y
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

fn check_family(g: &HolderFamily, x: &BranchedRP, layout: &TreeLayout) -> Result<()> {
    if g.depth() != x.depth() {
        return Err(Error::DepthMismatch {
            left: g.depth(),
            right: x.depth(),
        });
    }
    for tree in g.trees() {
        if !layout.trees_upto(layout.max_size()).any(|(t, _)| t == tree) {
            return Err(Error::NotInBasis(tree.to_string()));
        }
    }
    Ok(())
}

/// `gX`: lifts `x^τ + g^τ` anisotropically and pulls back through `ψ`.
///
/// States are written as `⟨X_0t, F⟩ + ⟨gX̄_0t − X̄_0t, ψ(F)⟩`, so a zero
/// family reproduces `X` bit for bit.
pub fn act(g: &HolderFamily, x: &BranchedRP, options: ActionOptions) -> Result<BranchedRP> {
    let enc = encode(x, options)?;
    act_encoded(g, x, &enc, options)
}

/// `act` with a precomputed encoding of `x`.
pub fn act_encoded(g: &HolderFamily, x: &BranchedRP, enc: &Encoding, options: ActionOptions) -> Result<BranchedRP> {
    check_family(g, x, &enc.layout)?;
    let channels: BTreeMap<DecoratedTree, Vec<f64>> = enc
        .increments
        .iter()
        .map(|(t, v)| (t.clone(), v.iter().enumerate().map(|(i, a)| a + g.at(t, i)).collect()))
        .collect();
    let xbar = enc.xbar();
    let gxbar = lift_tree_channels(
        &channels,
        enc.layout.max_size(),
        enc.gamma,
        x.depth(),
        enc.config,
        options.cap,
    )?;
    let basis = x.basis();
    let rows = psi_rows(&mut PsiCache::new(), basis.keys().iter().cloned(), xbar.basis(), false)?;
    let states = (0..x.points())
        .map(|t| {
            let (old, new) = (xbar.state(t), gxbar.state(t));
            let coeffs = rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let shift: f64 = r.iter().map(|&(j, c)| c * (new.at(j) - old.at(j))).sum();
                    x.state(t).at(i) + shift
                })
                .collect();
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

/// Configuration both paths agree on; `None` means the default.
fn shared_config(x: &BranchedRP, y: &BranchedRP) -> Result<()> {
    if let (Some(a), Some(b)) = (x.config(), y.config()) {
        if a != b {
            return Err(Error::ConfigMismatch(format!("{a:?} vs {b:?}")));
        }
    }
    Ok(())
}

fn check_compatible(x: &BranchedRP, y: &BranchedRP) -> Result<()> {
    if x.depth() != y.depth() {
        return Err(Error::DepthMismatch {
            left: x.depth(),
            right: y.depth(),
        });
    }
    if !x.basis().same_as(y.basis()) {
        return Err(Error::BasisMismatch(
            "paths live on different forest truncations".into(),
        ));
    }
    if x.holder_scale() != y.holder_scale() {
        return Err(Error::Precondition("paths carry different exponents".into()));
    }
    shared_config(x, y)
}

/// Family `g` with `g^τ_0 = 0` and `⟨X′_st, τ⟩ = δx^τ_st + δg^τ_st +
/// ⟨gX̄_st, ψ_{|τ|−1}(τ)⟩`, i.e. `act(g, X) = X′`.
pub fn solve_translation(x: &BranchedRP, target: &BranchedRP, options: ActionOptions) -> Result<HolderFamily> {
    check_compatible(x, target)?;
    require_branched(target)?;
    let enc = encode(x, options)?;
    let reader = PairReader::new(target);
    solve_against(x, &enc, options, |_, idx, s, t| reader.at(s, t, idx))
}

/// Solver core with the target increments supplied as `target(τ, index, s, t)`.
pub(crate) fn solve_against<T: Fn(&DecoratedTree, usize, usize, usize) -> f64>(
    x: &BranchedRP,
    enc: &Encoding,
    options: ActionOptions,
    target: T,
) -> Result<HolderFamily> {
    let xinc = &enc.increments;
    let (g, _) = size_recursion(
        &enc.layout,
        enc.gamma,
        x.depth(),
        enc.config,
        options,
        Some(xinc),
        |tree, idx, s, t| target(tree, idx, s, t) - (xinc[tree][t] - xinc[tree][s]),
    )?;
    HolderFamily::new(x.depth(), g)
}

/// Alphabet-extension check: `X̄^{(k)}` restricted to the letters of
/// `X̄^{(k−1)}` coincides with it. Returns the largest coefficient gap.
pub fn extension_gap(enc: &Encoding) -> f64 {
    let mut worst = 0.0f64;
    for pair in enc.stages.windows(2) {
        let (small, big) = (&pair[0], &pair[1]);
        for (a, b) in small.states().iter().zip(big.states()) {
            for (i, w) in small.basis().keys().iter().enumerate() {
                worst = worst.max((a.at(i) - b.get(w)).abs());
            }
        }
    }
    worst
}

/// Anisotropic basis over the trees of size `≤ k` of `layout`.
pub fn tree_word_basis(
    layout: &TreeLayout,
    k: usize,
    gamma: Rational64,
    cap: usize,
) -> Result<Arc<Truncation<Word<DecoratedTree>>>> {
    let letters: Vec<DecoratedTree> = layout.trees_upto(k).map(|(t, _)| t.clone()).collect();
    let weights = letters
        .iter()
        .map(|t| gamma * Rational64::from(t.size() as i64))
        .collect();
    anisotropic_truncation(&Alphabet::new(letters, weights)?, cap)
}

/// Largest `|⟨A_st − B_st, v⟩|` over all grid pairs and keys.
pub fn max_increment_gap<K: HopfKey>(a: &DyadicGroupPath<K>, b: &DyadicGroupPath<K>) -> f64 {
    let (ra, rb) = (PairReader::new(a), PairReader::new(b));
    let mut worst = 0.0f64;
    for s in 0..a.points() {
        for t in s + 1..a.points() {
            for i in 1..a.basis().len() {
                worst = worst.max((ra.at(s, t, i) - rb.at(s, t, i)).abs());
            }
        }
    }
    worst
}
