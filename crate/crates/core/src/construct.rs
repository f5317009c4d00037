//! Level-by-level lift of sampled paths to group-valued paths on the dyadic
//! grid, with Hölder-constant estimation and Chen residual checks.

use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::basis::{anisotropic_truncation, bck_truncation, shuffle_truncation, HopfKey, Truncation};
use crate::bch::bch_eval;
use crate::dual::DualElement;
use crate::error::{Error, Result};
use crate::forest::DecoratedForest;
use crate::scalar::{format_small, small_to_f64};
use crate::shuffle::{Alphabet, Letter, Word};

/// Deepest supported dyadic grid.
pub const MAX_DEPTH: u32 = 14;
/// Default grid depth.
pub const DEFAULT_DEPTH: u32 = 10;

/// The two free choices of the dyadic recursion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstructionConfig {
    /// `Z_{0,1} = z_init · B_{0,1}` at every level.
    pub z_init: f64,
    /// `Z_left = λ(Z_parent − B)`, `Z_right = (1 − λ)(Z_parent − B)`.
    pub split_weight: f64,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        ConstructionConfig {
            z_init: 0.0,
            split_weight: 0.5,
        }
    }
}

impl ConstructionConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.z_init.is_finite() {
            return Err(Error::Precondition("z_init must be finite".into()));
        }
        if !(0.0..=1.0).contains(&self.split_weight) {
            return Err(Error::Precondition("split_weight must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Description of the algebra a path lives on, enough to rebuild its basis.
#[derive(Clone, Debug, PartialEq)]
pub enum AlgebraKind {
    Bck {
        decorations: Vec<u32>,
        max_nodes: usize,
    },
    Shuffle {
        letters: Vec<u32>,
        max_length: usize,
    },
    Anisotropic {
        letters: Vec<String>,
        weights: Vec<Rational64>,
    },
}

impl AlgebraKind {
    pub fn name(&self) -> &'static str {
        match self {
            AlgebraKind::Bck { .. } => "bck",
            AlgebraKind::Shuffle { .. } => "shuffle",
            AlgebraKind::Anisotropic { .. } => "aniso",
        }
    }
}

/// Real-valued channels sampled at the `2^M + 1` dyadic points of `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPath {
    depth: u32,
    channels: Vec<Vec<f64>>,
}

impl SampledPath {
    pub fn new(depth: u32, channels: Vec<Vec<f64>>) -> Result<Self> {
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::Precondition(format!("depth must lie in 1..={MAX_DEPTH}")));
        }
        let len = (1usize << depth) + 1;
        if channels.is_empty() {
            return Err(Error::Invalid("path needs at least one channel".into()));
        }
        for c in &channels {
            if c.len() != len {
                return Err(Error::Invalid(format!(
                    "channel has {} samples, expected 2^{depth}+1 = {len}",
                    c.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Invalid("non-finite sample".into()));
            }
        }
        Ok(SampledPath { depth, channels })
    }

    /// Samples `f(a, t)` for letters `0..d` at every grid point.
    pub fn from_fn<F: Fn(usize, f64) -> f64>(depth: u32, d: usize, f: F) -> Result<Self> {
        let n = 1usize << depth;
        let channels = (0..d)
            .map(|a| (0..=n).map(|k| f(a, k as f64 / n as f64)).collect())
            .collect();
        SampledPath::new(depth, channels)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn dimension(&self) -> usize {
        self.channels.len()
    }

    pub fn points(&self) -> usize {
        (1usize << self.depth) + 1
    }
}

/// Group-valued path `t ↦ 𝕏_t` on the dyadic grid; increments are
/// `X_st = 𝕏_s⁻¹ ⋆ 𝕏_t`.
#[derive(Clone, Debug)]
pub struct DyadicGroupPath<K: HopfKey> {
    basis: Arc<Truncation<K>>,
    algebra: AlgebraKind,
    depth: u32,
    level: usize,
    /// Hölder exponent of key `v` is `holder_scale · homogeneity(v)`.
    holder_scale: Rational64,
    config: Option<ConstructionConfig>,
    states: Vec<DualElement<f64, K>>,
}

impl<K: HopfKey> PartialEq for DyadicGroupPath<K> {
    fn eq(&self, other: &Self) -> bool {
        self.basis.same_as(&other.basis)
            && self.depth == other.depth
            && self.level == other.level
            && self.states.len() == other.states.len()
            && self
                .states
                .iter()
                .zip(&other.states)
                .all(|(a, b)| a.coeffs() == b.coeffs())
    }
}

impl<K: HopfKey> DyadicGroupPath<K> {
    pub fn from_states(
        basis: Arc<Truncation<K>>,
        algebra: AlgebraKind,
        depth: u32,
        level: usize,
        holder_scale: Rational64,
        config: Option<ConstructionConfig>,
        states: Vec<DualElement<f64, K>>,
    ) -> Result<Self> {
        if states.len() != (1usize << depth) + 1 {
            return Err(Error::Invalid(format!("{} states for depth {depth}", states.len())));
        }
        if level > basis.max_grade() {
            return Err(Error::LevelOverflow {
                level,
                max: basis.max_grade(),
            });
        }
        for s in &states {
            if !s.basis().same_as(&basis) {
                return Err(Error::BasisMismatch("state on a foreign basis".into()));
            }
        }
        Ok(DyadicGroupPath {
            basis,
            algebra,
            depth,
            level,
            holder_scale,
            config,
            states,
        })
    }

    pub fn basis(&self) -> &Arc<Truncation<K>> {
        &self.basis
    }

    pub fn algebra(&self) -> &AlgebraKind {
        &self.algebra
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn holder_scale(&self) -> Rational64 {
        self.holder_scale
    }

    pub fn config(&self) -> Option<ConstructionConfig> {
        self.config
    }

    pub fn states(&self) -> &[DualElement<f64, K>] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &DualElement<f64, K> {
        &self.states[i]
    }

    pub fn points(&self) -> usize {
        self.states.len()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 / (1usize << self.depth) as f64
    }

    /// Hölder exponent attached to basis index `i`.
    pub fn exponent(&self, i: usize) -> f64 {
        small_to_f64(self.holder_scale * self.basis.homogeneity(i))
    }

    /// `X_st = 𝕏_s⁻¹ ⋆ 𝕏_t` on grades up to the current level.
    pub fn increment(&self, s: usize, t: usize) -> DualElement<f64, K> {
        self.states[s].inverse().convolve_upto(&self.states[t], self.level)
    }

    /// Increment computed from precomputed inverse states.
    pub(crate) fn increment_with(&self, inverses: &[DualElement<f64, K>], s: usize, t: usize) -> DualElement<f64, K> {
        inverses[s].convolve_upto(&self.states[t], self.level)
    }

    pub fn inverses(&self) -> Vec<DualElement<f64, K>> {
        self.states.iter().map(|s| s.inverse()).collect()
    }

    /// Path restricted to grades `≤ level` (exact copy of those coefficients).
    pub fn restricted(&self, level: usize) -> Self {
        let level = level.min(self.level);
        DyadicGroupPath {
            states: self.states.iter().map(|s| s.truncated(level)).collect(),
            level,
            ..self.clone()
        }
    }

    /// Same path sampled on the coarser grid of depth `m`.
    pub fn coarsened(&self, m: u32) -> Result<Self> {
        if m == 0 || m > self.depth {
            return Err(Error::Precondition(format!(
                "coarse depth {m} outside 1..={}",
                self.depth
            )));
        }
        let stride = 1usize << (self.depth - m);
        Ok(DyadicGroupPath {
            states: self.states.iter().step_by(stride).cloned().collect(),
            depth: m,
            ..self.clone()
        })
    }

    pub fn with_config(mut self, config: Option<ConstructionConfig>) -> Self {
        self.config = config;
        self
    }
}

/// `γ ∈ (0, 1)` with `γ⁻¹ ∉ ℕ`, decided exactly.
pub fn check_isotropic_gamma(gamma: Rational64) -> Result<()> {
    if gamma <= Rational64::zero() || gamma >= Rational64::one() {
        return Err(Error::Precondition(format!(
            "gamma {} outside (0,1)",
            format_small(gamma)
        )));
    }
    if *gamma.numer() == 1 {
        return Err(Error::IntegerInverse {
            gamma: format_small(gamma),
        });
    }
    Ok(())
}

/// `1 ∉ Σ_a γ_a ℕ`: no non-trivial non-negative integer combination of the
/// exponents equals one. Decided by unbounded coin-change over the common
/// denominator.
pub fn check_exponent_lattice(weights: &[Rational64]) -> Result<()> {
    let denom = weights.iter().fold(1i64, |acc, w| num_integer::lcm(acc, *w.denom()));
    if denom > 50_000_000 {
        return Err(Error::Precondition("exponent denominators too large to decide".into()));
    }
    let target = denom as usize;
    let coins: Vec<usize> = weights
        .iter()
        .map(|w| (*w.numer() * (denom / *w.denom())) as usize)
        .filter(|&c| c > 0 && c <= target)
        .collect();
    let mut reachable = vec![false; target + 1];
    reachable[0] = true;
    for v in 1..=target {
        reachable[v] = coins.iter().any(|&c| c <= v && reachable[v - c]);
    }
    if reachable[target] {
        return Err(Error::ExponentLattice {
            gammas: weights.iter().map(|w| format_small(*w)).collect::<Vec<_>>().join(","),
        });
    }
    Ok(())
}

/// Per-level record of the correction bound monitor.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelTrace {
    /// Grade added by this step.
    pub level: usize,
    /// `κ`: smallest Hölder exponent among the new keys.
    pub kappa: f64,
    /// `a_m = 2^{mκ} max_k ⦀Z_{t^m_k t^m_{k+1}}⦀`, `m = 0..=M`.
    pub a: Vec<f64>,
    /// `b_m = 2^{mκ} max_k ⦀B_{t^m_k t^m_{k+1}}⦀` for the BCH corrections
    /// splitting level `m − 1` intervals (`b_0` is the top-interval term).
    pub b: Vec<f64>,
    /// `a_{m+1} ≤ 2^κ w a_m + w b_{m+1}` held at every `m`, with
    /// `w = max(λ, 1 − λ)`.
    pub recursion_holds: bool,
    /// Top-grade corrections `Z` per level `m`, interval `k`, new key.
    pub corrections: Vec<Vec<Vec<f64>>>,
}

impl LevelTrace {
    pub fn sup_a(&self) -> f64 {
        self.a.iter().copied().fold(0.0, f64::max)
    }
}

fn primitive_indices<K: HopfKey>(basis: &Truncation<K>, keys: &[K]) -> Result<Vec<usize>> {
    let range = basis.grade_range(1);
    if keys.len() != range.len() {
        return Err(Error::BasisMismatch(format!(
            "{} channels for {} degree-one keys",
            keys.len(),
            range.len()
        )));
    }
    keys.iter().map(|k| basis.require_index(k)).collect()
}

/// Level-one path `⟨𝕏_t, e_a⟩ = x^a_t − x^a_0`.
pub fn level_one<K: HopfKey>(
    basis: &Arc<Truncation<K>>,
    algebra: AlgebraKind,
    primitives: &[K],
    x: &SampledPath,
    holder_scale: Rational64,
    config: ConstructionConfig,
) -> Result<DyadicGroupPath<K>> {
    config.validate()?;
    let idx = primitive_indices(basis, primitives)?;
    if idx.len() != x.dimension() {
        return Err(Error::Invalid("channel count does not match the alphabet".into()));
    }
    let states = (0..x.points())
        .map(|t| {
            let mut s = DualElement::counit(basis);
            for (a, &i) in idx.iter().enumerate() {
                s.set(i, x.channels()[a][t] - x.channels()[a][0]);
            }
            s
        })
        .collect();
    DyadicGroupPath::from_states(
        Arc::clone(basis),
        algebra,
        x.depth(),
        1,
        holder_scale,
        Some(config),
        states,
    )
}

/// One step of the dyadic recursion: extends a level-`n` path to level
/// `n + 1` without touching grades `≤ n`.
pub fn extend_level<K: HopfKey>(path: &DyadicGroupPath<K>) -> Result<(DyadicGroupPath<K>, LevelTrace)> {
    let n = path.level;
    let basis = Arc::clone(&path.basis);
    if n + 1 > basis.max_grade() {
        return Err(Error::LevelOverflow {
            level: n + 1,
            max: basis.max_grade(),
        });
    }
    let config = path.config.unwrap_or_default();
    config.validate()?;
    let lambda = config.split_weight;
    let top = basis.grade_range(n + 1);
    let depth = path.depth as usize;
    let cells = 1usize << depth;
    let inverses = path.inverses();
    let log_of =
        |s: usize, t: usize| -> Result<DualElement<f64, K>> { path.increment_with(&inverses, s, t).log_upto(n) };
    let kappa = top.clone().map(|i| path.exponent(i)).fold(f64::INFINITY, f64::min);
    let kappa = if kappa.is_finite() { kappa } else { 0.0 };
    let d_const = basis.norm_constant();
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs())) * d_const;

    // Level 0: the whole interval.
    let half = cells / 2;
    let l_left = log_of(0, half)?;
    let l_right = log_of(half, cells)?;
    let b_top = bch_eval(l_left.coeffs(), l_right.coeffs(), &basis, 1..=n + 1, top.clone())?;
    let z_root: Vec<f64> = b_top.iter().map(|b| config.z_init * b).collect();
    let mut a = vec![sup(&z_root)];
    let mut b = vec![sup(&b_top)];
    let mut corrections = vec![vec![z_root]];

    for m in 1..=depth {
        let width = cells >> m;
        let parents = &corrections[m - 1];
        let mut level_z = Vec::with_capacity(parents.len() * 2);
        let mut level_b = 0.0f64;
        for (k, zp) in parents.iter().enumerate() {
            let s = 2 * k * width;
            let u = s + width;
            let t = u + width;
            let lsu = log_of(s, u)?;
            let lut = log_of(u, t)?;
            let bt = bch_eval(lsu.coeffs(), lut.coeffs(), &basis, 1..=n + 1, top.clone())?;
            level_b = level_b.max(sup(&bt));
            let rest: Vec<f64> = zp.iter().zip(&bt).map(|(z, b)| z - b).collect();
            level_z.push(rest.iter().map(|r| lambda * r).collect::<Vec<_>>());
            level_z.push(rest.iter().map(|r| (1.0 - lambda) * r).collect::<Vec<_>>());
        }
        let scale = 2f64.powf(m as f64 * kappa);
        let max_z = level_z.iter().map(|z| sup(z)).fold(0.0, f64::max);
        a.push(scale * max_z);
        b.push(scale * level_b);
        corrections.push(level_z);
    }
    let w = lambda.max(1.0 - lambda);
    let recursion_holds = (0..depth).all(|m| {
        let bound = 2f64.powf(kappa) * w * a[m] + w * b[m + 1];
        a[m + 1] <= bound * (1.0 + 1e-9) + 1e-300
    });

    // Finest-grid increments Y_j = exp_{n+1}(L_j + Z_j) and new states.
    let finest = &corrections[depth];
    let mut states = Vec::with_capacity(cells + 1);
    states.push(path.states[0].clone());
    for j in 0..cells {
        let mut lz = log_of(j, j + 1)?;
        for (slot, z) in top.clone().zip(&finest[j]) {
            lz.set(slot, *z);
        }
        let y = lz.exp_upto(n + 1)?;
        let prev: &DualElement<f64, K> = &states[j];
        let mut next = path.states[j + 1].clone();
        for i in top.clone() {
            next.set(i, prev.convolve_at(&y, i));
        }
        states.push(next);
    }
    let out = DyadicGroupPath {
        basis,
        algebra: path.algebra.clone(),
        depth: path.depth,
        level: n + 1,
        holder_scale: path.holder_scale,
        config: Some(config),
        states,
    };
    let trace = LevelTrace {
        level: n + 1,
        kappa,
        a,
        b,
        recursion_holds,
        corrections,
    };
    Ok((out, trace))
}

/// Iterates `extend_level` up to the top grade of the basis.
pub fn extend_to_top<K: HopfKey>(mut path: DyadicGroupPath<K>) -> Result<(DyadicGroupPath<K>, Vec<LevelTrace>)> {
    let mut traces = Vec::new();
    while path.level < path.basis.max_grade() {
        let (next, trace) = extend_level(&path)?;
        traces.push(trace);
        path = next;
    }
    Ok((path, traces))
}

/// Isotropic lift over the forests `𝓕_N` with decorations `1..=d`.
pub fn build_bck(
    x: &SampledPath,
    gamma: Rational64,
    n: usize,
    config: ConstructionConfig,
    cap: usize,
) -> Result<(DyadicGroupPath<DecoratedForest>, Vec<LevelTrace>)> {
    check_isotropic_gamma(gamma)?;
    let d = x.dimension() as u32;
    let basis = bck_truncation(n, d, cap)?;
    let primitives: Vec<DecoratedForest> = (1..=d)
        .map(|i| DecoratedForest::single(crate::forest::DecoratedTree::leaf(i)))
        .collect();
    let kind = AlgebraKind::Bck {
        decorations: (1..=d).collect(),
        max_nodes: n,
    };
    extend_to_top(level_one(&basis, kind, &primitives, x, gamma, config)?)
}

/// Isotropic lift over words of length `≤ N` in letters `1..=d`.
pub fn build_shuffle(
    x: &SampledPath,
    gamma: Rational64,
    n: usize,
    config: ConstructionConfig,
    cap: usize,
) -> Result<(DyadicGroupPath<Word<u32>>, Vec<LevelTrace>)> {
    check_isotropic_gamma(gamma)?;
    let d = x.dimension() as u32;
    let basis = shuffle_truncation(n, d, cap)?;
    let primitives: Vec<Word<u32>> = (1..=d).map(Word::letter).collect();
    let kind = AlgebraKind::Shuffle {
        letters: (1..=d).collect(),
        max_length: n,
    };
    extend_to_top(level_one(&basis, kind, &primitives, x, gamma, config)?)
}

/// Anisotropic lift over `𝔏`; channel `a` drives the `a`-th letter of the
/// alphabet in its sorted order.
pub fn build_anisotropic<L: Letter>(
    x: &SampledPath,
    alphabet: &Alphabet<L>,
    config: ConstructionConfig,
    cap: usize,
) -> Result<(DyadicGroupPath<Word<L>>, Vec<LevelTrace>)> {
    check_exponent_lattice(alphabet.weights())?;
    let basis = anisotropic_truncation(alphabet, cap)?;
    let primitives: Vec<Word<L>> = alphabet.letters().iter().cloned().map(Word::letter).collect();
    let kind = AlgebraKind::Anisotropic {
        letters: alphabet.letters().iter().map(|l| l.to_string()).collect(),
        weights: alphabet.weights().to_vec(),
    };
    extend_to_top(level_one(&basis, kind, &primitives, x, alphabet.min_weight(), config)?)
}

/// Per-key sup of `|⟨X_st, v⟩| / |t − s|^{exponent(v)}` over dyadic pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct HolderReport {
    pub keys: Vec<String>,
    pub exponents: Vec<f64>,
    pub constants: Vec<f64>,
}

impl HolderReport {
    pub fn all_finite(&self) -> bool {
        self.constants.iter().all(|c| c.is_finite())
    }

    pub fn max_constant(&self) -> f64 {
        self.constants.iter().copied().fold(0.0, f64::max)
    }
}

/// Sup over all dyadic pairs `s < t` of the stored grid.
pub fn holder_report<K: HopfKey>(path: &DyadicGroupPath<K>) -> HolderReport {
    holder_report_with(path, |i| path.exponent(i))
}

/// Same sup with caller-supplied exponents per basis index.
pub fn holder_report_with<K: HopfKey, F: Fn(usize) -> f64>(path: &DyadicGroupPath<K>, exponent: F) -> HolderReport {
    let basis = path.basis();
    let keys: Vec<usize> = (1..basis.grade_range(path.level()).end).collect();
    let exponents: Vec<f64> = keys.iter().map(|&i| exponent(i)).collect();
    let mut constants = vec![0.0f64; keys.len()];
    let inverses = path.inverses();
    let p = path.points();
    for s in 0..p {
        for t in s + 1..p {
            let inc = path.increment_with(&inverses, s, t);
            let dt = path.time(t) - path.time(s);
            for (slot, (&i, &e)) in keys.iter().zip(&exponents).enumerate() {
                let c = inc.at(i).abs() / dt.powf(e);
                if c > constants[slot] {
                    constants[slot] = c;
                }
            }
        }
    }
    HolderReport {
        keys: keys.iter().map(|&i| basis.key(i).to_string()).collect(),
        exponents,
        constants,
    }
}

/// Worst relative residual `|⟨X_su⋆X_ut − X_st, v⟩| / max(1, |·|)` over all
/// dyadic triples of the grid.
pub fn chen_residual<K: HopfKey>(path: &DyadicGroupPath<K>) -> f64 {
    let inverses = path.inverses();
    let p = path.points();
    let mut incs: Vec<Vec<Option<DualElement<f64, K>>>> = vec![vec![None; p]; p];
    for s in 0..p {
        for t in s + 1..p {
            incs[s][t] = Some(path.increment_with(&inverses, s, t));
        }
    }
    let mut worst = 0.0f64;
    for s in 0..p {
        for u in s + 1..p {
            let xsu = incs[s][u].as_ref().unwrap();
            for t in u + 1..p {
                let xut = incs[u][t].as_ref().unwrap();
                let xst = incs[s][t].as_ref().unwrap();
                let prod = xsu.convolve_upto(xut, path.level());
                for (a, b) in prod.coeffs().iter().zip(xst.coeffs()) {
                    let r = (a - b).abs() / 1f64.max(a.abs()).max(b.abs());
                    worst = worst.max(r);
                }
            }
        }
    }
    worst
}

/// Worst residual of `exp(L_st + Z_st) = X_st` over every dyadic interval
/// `[t^m_k, t^m_{k+1}]` for the step recorded in `trace`.
pub fn correction_residual<K: HopfKey>(path: &DyadicGroupPath<K>, trace: &LevelTrace) -> Result<f64> {
    let n1 = trace.level;
    let top = path.basis().grade_range(n1);
    let inverses = path.inverses();
    let cells = 1usize << path.depth();
    let mut worst = 0.0f64;
    for (m, zs) in trace.corrections.iter().enumerate() {
        let width = cells >> m;
        for (k, z) in zs.iter().enumerate() {
            let (s, t) = (k * width, (k + 1) * width);
            let inc = path.increment_with(&inverses, s, t).truncated(n1);
            let mut lz = inc.log_upto(n1 - 1)?;
            for (slot, zv) in top.clone().zip(z) {
                lz.set(slot, *zv);
            }
            let y = lz.exp_upto(n1)?;
            for (a, b) in y.coeffs().iter().zip(inc.coeffs()) {
                worst = worst.max((a - b).abs() / 1f64.max(a.abs()).max(b.abs()));
            }
        }
    }
    Ok(worst)
}

/// Worst character residual over all stored states.
pub fn character_residual<K: HopfKey>(path: &DyadicGroupPath<K>) -> f64 {
    let basis = path.basis();
    let mut worst = 0.0f64;
    for s in path.states() {
        worst = worst.max((s.at(0) - 1.0).abs());
        for (i, j, terms) in basis.products() {
            if basis.grade(*i) + basis.grade(*j) > path.level() {
                continue;
            }
            let lhs: f64 = terms.iter().map(|&(k, c)| c as f64 * s.at(k)).sum();
            let rhs = s.at(*i) * s.at(*j);
            worst = worst.max((lhs - rhs).abs() / 1f64.max(lhs.abs()).max(rhs.abs()));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::DEFAULT_MAX_BASIS;

    #[test]
    fn lattice_checks() {
        assert!(check_isotropic_gamma(Rational64::new(2, 5)).is_ok());
        assert!(matches!(
            check_isotropic_gamma(Rational64::new(1, 3)),
            Err(Error::IntegerInverse { .. })
        ));
        assert!(check_exponent_lattice(&[Rational64::new(2, 5), Rational64::new(7, 20)]).is_ok());
        // 2·(3/10) + 2/5 = 1
        assert!(check_exponent_lattice(&[Rational64::new(3, 10), Rational64::new(2, 5)]).is_err());
    }

    #[test]
    fn single_letter_level_two_is_half_square() {
        let x = SampledPath::from_fn(6, 1, |_, t| (3.0 * t).sin()).unwrap();
        let (p, _) = build_shuffle(
            &x,
            Rational64::new(2, 5),
            2,
            ConstructionConfig::default(),
            DEFAULT_MAX_BASIS,
        )
        .unwrap();
        let aa = p.basis().index_of(&Word::parse("1.1").unwrap()).unwrap();
        for t in 0..p.points() {
            let dx = x.channels()[0][t] - x.channels()[0][0];
            assert!((p.state(t).at(aa) - 0.5 * dx * dx).abs() < 1e-12);
        }
    }

    #[test]
    fn restriction_is_exact_and_chen_holds() {
        let x = SampledPath::from_fn(5, 2, |a, t| if a == 0 { t } else { t * t }).unwrap();
        let (p, traces) = build_bck(
            &x,
            Rational64::new(3, 10),
            3,
            ConstructionConfig::default(),
            DEFAULT_MAX_BASIS,
        )
        .unwrap();
        let (l1, _) = build_bck(
            &x,
            Rational64::new(3, 10),
            1,
            ConstructionConfig::default(),
            DEFAULT_MAX_BASIS,
        )
        .unwrap();
        for (a, b) in p.states().iter().zip(l1.states()) {
            for i in 0..l1.basis().len() {
                assert_eq!(a.get(l1.basis().key(i)), *b.at(i));
            }
        }
        assert!(chen_residual(&p) < 1e-10);
        assert!(character_residual(&p) < 1e-10);
        for t in &traces {
            assert!(t.recursion_holds);
        }
    }

    #[test]
    fn constant_path_stays_at_counit() {
        let x = SampledPath::from_fn(4, 2, |_, _| 1.5).unwrap();
        let (p, _) = build_bck(
            &x,
            Rational64::new(2, 5),
            2,
            ConstructionConfig::default(),
            DEFAULT_MAX_BASIS,
        )
        .unwrap();
        let eps = DualElement::counit(p.basis());
        assert!(p.states().iter().all(|s| *s == eps));
    }
}
