//! Signatures of piecewise-linear paths, exact in rational mode, and their
//! arborification to forests. Used as ground truth for the constructions.

use std::collections::HashMap;
use std::sync::Arc;

use num_rational::Rational64;

use crate::basis::Truncation;
use crate::construct::{AlgebraKind, DyadicGroupPath};
use crate::dual::DualElement;
use crate::error::{Error, Result};
use crate::forest::{DecoratedForest, DecoratedTree, Decoration};
use crate::scalar::{factorial, Scalar};
use crate::shuffle::Word;

/// Path linear between breakpoints; channel `c` drives letter `letters[c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearPath<S: Scalar> {
    times: Vec<S>,
    letters: Vec<u32>,
    values: Vec<Vec<S>>,
}

impl<S: Scalar + PartialOrd> PiecewiseLinearPath<S> {
    pub fn new(times: Vec<S>, letters: Vec<u32>, values: Vec<Vec<S>>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::Invalid("need at least two breakpoints".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("breakpoint times must increase strictly".into()));
        }
        if letters.len() != values.len() || letters.is_empty() {
            return Err(Error::Invalid("one letter per channel required".into()));
        }
        let mut seen = letters.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != letters.len() {
            return Err(Error::Invalid("repeated letter".into()));
        }
        if values.iter().any(|v| v.len() != times.len()) {
            return Err(Error::Invalid("channel length differs from breakpoint count".into()));
        }
        Ok(PiecewiseLinearPath { times, letters, values })
    }

    pub fn times(&self) -> &[S] {
        &self.times
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn values(&self) -> &[Vec<S>] {
        &self.values
    }

    fn check_window(&self, s: &S, t: &S) -> Result<()> {
        let first = &self.times[0];
        let last = &self.times[self.times.len() - 1];
        if !(s < t) || s < first || t > last {
            return Err(Error::Precondition("need times[0] ≤ s < t ≤ times[last]".into()));
        }
        Ok(())
    }

    /// Value of channel `c` at time `t` by linear interpolation.
    pub fn value_at(&self, c: usize, t: &S) -> S {
        let k = self.segment_of(t);
        let (t0, t1) = (&self.times[k], &self.times[k + 1]);
        let (x0, x1) = (&self.values[c][k], &self.values[c][k + 1]);
        let frac = (t.clone() - t0.clone()) / (t1.clone() - t0.clone());
        x0.clone() + (x1.clone() - x0.clone()) * frac
    }

    fn segment_of(&self, t: &S) -> usize {
        let last = self.times.len() - 2;
        (0..=last).find(|&k| *t <= self.times[k + 1]).unwrap_or(last)
    }

    /// Knots `s = u_0 < u_1 < ⋯ < u_r = t` of the path on `[s, t]`.
    fn knots(&self, s: &S, t: &S) -> Vec<S> {
        let mut out = vec![s.clone()];
        out.extend(self.times.iter().filter(|u| *u > s && *u < t).cloned());
        out.push(t.clone());
        out
    }

    /// Per-letter increments over each linear piece of `[s, t]`.
    fn pieces(&self, s: &S, t: &S) -> Vec<HashMap<u32, S>> {
        let knots = self.knots(s, t);
        knots
            .windows(2)
            .map(|w| {
                self.letters
                    .iter()
                    .enumerate()
                    .map(|(c, &a)| (a, self.value_at(c, &w[1]) - self.value_at(c, &w[0])))
                    .collect()
            })
            .collect()
    }

    /// `⟨S(x)_st, a_1⋯a_k⟩` for a single word, by Chen over the pieces.
    pub fn signature(&self, s: &S, t: &S, word: &Word<u32>) -> Result<S> {
        self.check_window(s, t)?;
        let letters = word.letters();
        let k = letters.len();
        // prefix[j] = ⟨S_{s,u}, a_1⋯a_j⟩
        let mut prefix = vec![S::zero(); k + 1];
        prefix[0] = S::one();
        for inc in self.pieces(s, t) {
            let dx = |a: &u32| inc.get(a).cloned().unwrap_or_else(S::zero);
            let mut next = vec![S::zero(); k + 1];
            for j in 0..=k {
                let mut acc = S::zero();
                let mut run = S::one();
                for i in (0..=j).rev() {
                    if i < j {
                        run = run * dx(&letters[i]);
                    }
                    acc = acc + prefix[i].clone() * run.clone() * S::ratio(1, factorial(j - i));
                }
                next[j] = acc;
            }
            prefix = next;
        }
        Ok(prefix.pop().unwrap())
    }

    /// `S(x)_st` on a word truncation: exact when `S` is rational.
    pub fn signature_character(
        &self,
        s: &S,
        t: &S,
        basis: &Arc<Truncation<Word<u32>>>,
    ) -> Result<DualElement<S, Word<u32>>> {
        self.check_window(s, t)?;
        let mut acc = DualElement::counit(basis);
        for inc in self.pieces(s, t) {
            acc = acc.convolve_unchecked(&segment_signature(&inc, basis));
        }
        Ok(acc)
    }
}

/// `⟨S, a_1⋯a_k⟩ = Π_i Δx^{a_i} / k!` on a single linear piece.
pub fn segment_signature<S: Scalar>(
    increments: &HashMap<u32, S>,
    basis: &Arc<Truncation<Word<u32>>>,
) -> DualElement<S, Word<u32>> {
    let coeffs = basis
        .keys()
        .iter()
        .map(|w| {
            let prod = w
                .letters()
                .iter()
                .fold(S::one(), |p, a| p * increments.get(a).cloned().unwrap_or_else(S::zero));
            prod * S::ratio(1, factorial(w.len()))
        })
        .collect();
    DualElement::from_coeffs(basis, coeffs).expect("coefficient count matches basis")
}

/// Sum of words `⟨·, v⟩` over linear extensions of each forest, descendants
/// before ancestors so that a root is read last.
#[derive(Clone, Debug)]
pub struct Arborification {
    forests: Arc<Truncation<DecoratedForest>>,
    words: Arc<Truncation<Word<u32>>>,
    rows: Vec<Vec<(usize, i64)>>,
}

impl Arborification {
    pub fn new(forests: &Arc<Truncation<DecoratedForest>>, words: &Arc<Truncation<Word<u32>>>) -> Result<Self> {
        let mut rows = Vec::with_capacity(forests.len());
        for f in forests.keys() {
            let mut counts: HashMap<usize, i64> = HashMap::new();
            for w in linear_extensions(f) {
                let j = words.require_index(&w)?;
                *counts.entry(j).or_default() += 1;
            }
            let mut row: Vec<(usize, i64)> = counts.into_iter().collect();
            row.sort_unstable();
            rows.push(row);
        }
        Ok(Arborification {
            forests: Arc::clone(forests),
            words: Arc::clone(words),
            rows,
        })
    }

    pub fn apply<S: Scalar>(&self, x: &DualElement<S, Word<u32>>) -> Result<DualElement<S, DecoratedForest>> {
        if !x.basis().same_as(&self.words) {
            return Err(Error::BasisMismatch("word functional on a foreign truncation".into()));
        }
        let coeffs = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .fold(S::zero(), |acc, &(j, c)| acc + S::from_i64(c) * x.at(j).clone())
            })
            .collect();
        DualElement::from_coeffs(&self.forests, coeffs)
    }
}

/// Words of decorations, one per linear extension of the forest order
/// with every node after all of its descendants.
pub fn linear_extensions(forest: &DecoratedForest) -> Vec<Word<u32>> {
    let mut decoration = Vec::new();
    let mut children: Vec<Vec<usize>> = Vec::new();
    fn push(t: &DecoratedTree, dec: &mut Vec<Decoration>, ch: &mut Vec<Vec<usize>>) -> usize {
        let id = dec.len();
        dec.push(t.decoration());
        ch.push(Vec::new());
        for c in t.children() {
            let cid = push(c, dec, ch);
            ch[id].push(cid);
        }
        id
    }
    for t in forest.trees() {
        push(t, &mut decoration, &mut children);
    }
    let n = decoration.len();
    let mut out = Vec::new();
    let mut placed = vec![false; n];
    let mut word = Vec::with_capacity(n);
    fn extend(
        dec: &[Decoration],
        ch: &[Vec<usize>],
        placed: &mut [bool],
        word: &mut Vec<u32>,
        out: &mut Vec<Word<u32>>,
    ) {
        if word.len() == dec.len() {
            out.push(Word::new(word.clone()));
            return;
        }
        for v in 0..dec.len() {
            if !placed[v] && ch[v].iter().all(|&c| placed[c]) {
                placed[v] = true;
                word.push(dec[v]);
                extend(dec, ch, placed, word, out);
                word.pop();
                placed[v] = false;
            }
        }
    }
    extend(&decoration, &children, &mut placed, &mut word, &mut out);
    out
}

/// Grid path `t ↦ S(x)_{0,t}` at the `2^depth + 1` dyadic points of
/// `[0, 1]`, which must lie inside the path's time span.
pub fn signature_grid_path(
    path: &PiecewiseLinearPath<f64>,
    depth: u32,
    basis: &Arc<Truncation<Word<u32>>>,
    algebra: AlgebraKind,
    holder_scale: Rational64,
) -> Result<DyadicGroupPath<Word<u32>>> {
    let states = grid_states(path, depth, basis)?;
    DyadicGroupPath::from_states(
        Arc::clone(basis),
        algebra,
        depth,
        basis.max_grade(),
        holder_scale,
        None,
        states,
    )
}

fn grid_states(
    path: &PiecewiseLinearPath<f64>,
    depth: u32,
    basis: &Arc<Truncation<Word<u32>>>,
) -> Result<Vec<DualElement<f64, Word<u32>>>> {
    let cells = 1usize << depth;
    path.check_window(&0.0, &1.0)?;
    let mut states = Vec::with_capacity(cells + 1);
    states.push(DualElement::counit(basis));
    for k in 0..cells {
        let s = k as f64 / cells as f64;
        let t = (k + 1) as f64 / cells as f64;
        let step = path.signature_character(&s, &t, basis)?;
        let next = states[k].convolve_unchecked(&step);
        states.push(next);
    }
    Ok(states)
}

/// Branched lift of a piecewise-linear path by arborifying its signature.
/// Decorations are the path's letters; forests have at most `n` nodes.
pub fn arborified_grid_path(
    path: &PiecewiseLinearPath<f64>,
    depth: u32,
    n: usize,
    gamma: Rational64,
    cap: usize,
) -> Result<DyadicGroupPath<DecoratedForest>> {
    let mut decorations = path.letters().to_vec();
    decorations.sort_unstable();
    let forests = crate::basis::forest_truncation(n, &decorations, cap)?;
    let words = crate::basis::word_truncation(&decorations, n, cap)?;
    let arb = Arborification::new(&forests, &words)?;
    let states = grid_states(path, depth, &words)?
        .iter()
        .map(|s| arb.apply(s))
        .collect::<Result<Vec<_>>>()?;
    let kind = AlgebraKind::Bck {
        decorations,
        max_nodes: n,
    };
    DyadicGroupPath::from_states(forests, kind, depth, n, gamma, None, states)
}

/// Dyadic samples `x(k/2^M)` turned into a piecewise-linear path on `[0, 1]`.
pub fn from_samples(depth: u32, letters: Vec<u32>, channels: Vec<Vec<f64>>) -> Result<PiecewiseLinearPath<f64>> {
    let cells = 1usize << depth;
    let times = (0..=cells).map(|k| k as f64 / cells as f64).collect();
    PiecewiseLinearPath::new(times, letters, channels)
}
