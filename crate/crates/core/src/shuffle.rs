//! Shuffle Hopf algebra `T^c(A)` over an abstract ordered alphabet, and the
//! weight-bounded word set spanning the anisotropic subcoalgebra.

use std::cmp::Ordering;
use std::fmt;
use std::hash::Hash;

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::forest::DecoratedTree;
use crate::lincomb::{LinComb, TensorKey};
use crate::scalar::{format_small, small_to_f64, Rational};

/// Opaque ordered letter. Implemented for integer letters `1..=d` and for
/// decorated trees, so that words of trees share the same machinery.
pub trait Letter: Clone + Ord + Hash + Eq + fmt::Display + fmt::Debug + Send + Sync + 'static {
    fn parse_letter(text: &str) -> Result<Self>;

    /// Node count when the letter is a tree; `1` for plain letters.
    fn letter_size(&self) -> usize {
        1
    }
}

impl Letter for u32 {
    fn parse_letter(text: &str) -> Result<Self> {
        text.trim().parse().map_err(|_| Error::Parse {
            position: 0,
            message: format!("invalid letter {text:?}"),
        })
    }
}

impl Letter for DecoratedTree {
    fn parse_letter(text: &str) -> Result<Self> {
        text.parse()
    }

    fn letter_size(&self) -> usize {
        self.size()
    }
}

/// Finite word; the empty word is the coalgebra unit.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word<L> {
    letters: Vec<L>,
}

impl<L: Letter> Word<L> {
    pub fn empty() -> Self {
        Word { letters: Vec::new() }
    }

    pub fn new(letters: Vec<L>) -> Self {
        Word { letters }
    }

    pub fn letter(a: L) -> Self {
        Word { letters: vec![a] }
    }

    pub fn letters(&self) -> &[L] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &Word<L>) -> Word<L> {
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        Word { letters }
    }

    pub fn reversed(&self) -> Word<L> {
        let mut letters = self.letters.clone();
        letters.reverse();
        Word { letters }
    }

    /// Total node count of the letters (equals the length for plain letters).
    pub fn node_count(&self) -> usize {
        self.letters.iter().map(|a| a.letter_size()).sum()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.is_empty() {
            return Ok(Word::empty());
        }
        t.split('.')
            .map(L::parse_letter)
            .collect::<Result<Vec<_>>>()
            .map(Word::new)
    }
}

impl<L: Letter> Ord for Word<L> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl<L: Letter> PartialOrd for Word<L> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Letters separated by `.`; the empty word prints as the empty string.
impl<L: Letter> fmt::Display for Word<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl<L: Letter> fmt::Debug for Word<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            write!(f, "∅")
        } else {
            fmt::Display::fmt(self, f)
        }
    }
}

pub type WordComb<L> = LinComb<Word<L>>;
pub type WordTensor<L> = LinComb<TensorKey<Word<L>>>;

/// Recursive shuffle `au ⧢ bv = a(u ⧢ bv) + b(au ⧢ v)`.
pub fn shuffle<L: Letter>(u: &Word<L>, v: &Word<L>) -> WordComb<L> {
    let mut out = WordComb::zero();
    let mut buf = Vec::with_capacity(u.len() + v.len());
    shuffle_into(&u.letters, &v.letters, &mut buf, &mut out);
    out
}

fn shuffle_into<L: Letter>(u: &[L], v: &[L], buf: &mut Vec<L>, out: &mut WordComb<L>) {
    if u.is_empty() || v.is_empty() {
        let mut w = buf.clone();
        w.extend_from_slice(u);
        w.extend_from_slice(v);
        out.add_term(Word::new(w), Rational::one());
        return;
    }
    buf.push(u[0].clone());
    shuffle_into(&u[1..], v, buf, out);
    buf.pop();
    buf.push(v[0].clone());
    shuffle_into(u, &v[1..], buf, out);
    buf.pop();
}

pub fn shuffle_comb<L: Letter>(a: &WordComb<L>, b: &WordComb<L>) -> WordComb<L> {
    a.bilinear(b, shuffle)
}

/// Deconcatenation `Δ̄(a1…an) = Σ_k a1…ak ⊗ a(k+1)…an`.
pub fn deconcat_coproduct<L: Letter>(v: &Word<L>) -> WordTensor<L> {
    (0..=v.len())
        .map(|k| {
            (
                TensorKey(vec![
                    Word::new(v.letters[..k].to_vec()),
                    Word::new(v.letters[k..].to_vec()),
                ]),
                Rational::one(),
            )
        })
        .collect()
}

/// `Δ̄'_n v`: all splittings into `n + 1` non-empty consecutive factors.
pub fn iterated_reduced_deconcat<L: Letter>(v: &Word<L>, n: usize) -> WordTensor<L> {
    let mut out = WordTensor::zero();
    if v.is_empty() {
        return out;
    }
    let parts = n + 1;
    if parts > v.len() {
        return out;
    }
    // Choose n cut points among len-1 interior positions.
    let mut cuts: Vec<usize> = (1..=n).collect();
    loop {
        let mut pieces = Vec::with_capacity(parts);
        let mut prev = 0;
        for &c in &cuts {
            pieces.push(Word::new(v.letters[prev..c].to_vec()));
            prev = c;
        }
        pieces.push(Word::new(v.letters[prev..].to_vec()));
        out.add_term(TensorKey(pieces), Rational::one());
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cuts[i] < v.len() - (n - i) {
                cuts[i] += 1;
                for j in i + 1..n {
                    cuts[j] = cuts[j - 1] + 1;
                }
                break;
            }
        }
        if n == 0 {
            return out;
        }
    }
}

/// `S(a1…an) = (−1)^n an…a1`.
pub fn word_antipode<L: Letter>(v: &Word<L>) -> (i64, Word<L>) {
    let sign = if v.len() % 2 == 0 { 1 } else { -1 };
    (sign, v.reversed())
}

/// Ordered alphabet with per-letter Hölder exponents in `(0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Alphabet<L> {
    letters: Vec<L>,
    weights: Vec<Rational64>,
}

impl<L: Letter> Alphabet<L> {
    pub fn new(letters: Vec<L>, weights: Vec<Rational64>) -> Result<Self> {
        if letters.len() != weights.len() {
            return Err(Error::Invalid("one exponent per letter required".into()));
        }
        if letters.is_empty() {
            return Err(Error::Invalid("empty alphabet".into()));
        }
        for w in &weights {
            if *w <= Rational64::zero() || *w >= Rational64::one() {
                return Err(Error::Precondition(format!(
                    "exponent {} outside (0,1)",
                    format_small(*w)
                )));
            }
        }
        let mut pairs: Vec<(L, Rational64)> = letters.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Invalid("repeated letter".into()));
        }
        let (letters, weights) = pairs.into_iter().unzip();
        Ok(Alphabet { letters, weights })
    }

    /// All letters share one exponent.
    pub fn uniform(letters: Vec<L>, gamma: Rational64) -> Result<Self> {
        let n = letters.len();
        Alphabet::new(letters, vec![gamma; n])
    }

    pub fn letters(&self) -> &[L] {
        &self.letters
    }

    pub fn weights(&self) -> &[Rational64] {
        &self.weights
    }

    pub fn weight_of(&self, a: &L) -> Option<Rational64> {
        self.letters.binary_search(a).ok().map(|i| self.weights[i])
    }

    /// `ĥγ = min_a γ_a`.
    pub fn min_weight(&self) -> Rational64 {
        *self.weights.iter().min().unwrap()
    }

    /// `Σ_i γ_{v_i}`, exact.
    pub fn total_weight(&self, v: &Word<L>) -> Option<Rational64> {
        v.letters
            .iter()
            .try_fold(Rational64::zero(), |acc, a| self.weight_of(a).map(|w| acc + w))
    }

    /// `ω(v) = Σ_i γ_{v_i} / ĥγ`.
    pub fn omega(&self, v: &Word<L>) -> Option<Rational64> {
        self.total_weight(v).map(|w| w / self.min_weight())
    }

    pub fn omega_f64(&self, v: &Word<L>) -> Option<f64> {
        self.omega(v).map(small_to_f64)
    }

    /// `N_a = ⌊ĥγ⁻¹⌋`.
    pub fn max_length(&self) -> usize {
        let inv = self.min_weight().recip();
        inv.to_integer() as usize
    }

    /// Restriction to the letters satisfying `keep`.
    pub fn restrict<F: Fn(&L) -> bool>(&self, keep: F) -> Result<Alphabet<L>> {
        let (letters, weights) = self
            .letters
            .iter()
            .zip(&self.weights)
            .filter(|(a, _)| keep(a))
            .map(|(a, w)| (a.clone(), *w))
            .unzip();
        Alphabet::new(letters, weights)
    }
}

/// The set `𝔏` of non-empty words with `Σ_i γ_{v_i} ≤ 1`, i.e.
/// `ω(v) ≤ ĥγ⁻¹`, in length-lexicographic order.
pub fn anisotropic_basis<L: Letter>(alphabet: &Alphabet<L>) -> Vec<Word<L>> {
    let one = Rational64::one();
    let mut out = Vec::new();
    let mut frontier: Vec<(Word<L>, Rational64)> = vec![(Word::empty(), Rational64::zero())];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (w, weight) in &frontier {
            for (a, ga) in alphabet.letters.iter().zip(&alphabet.weights) {
                let total = *weight + *ga;
                if total <= one {
                    let mut letters = w.letters.clone();
                    letters.push(a.clone());
                    next.push((Word::new(letters), total));
                }
            }
        }
        next.sort_by(|a, b| a.0.cmp(&b.0));
        out.extend(next.iter().map(|(w, _)| w.clone()));
        frontier = next;
    }
    out
}

/// All non-empty words of length at most `n`.
pub fn words_up_to<L: Letter>(letters: &[L], n: usize) -> Vec<Word<L>> {
    let mut sorted = letters.to_vec();
    sorted.sort();
    let mut out = Vec::new();
    let mut layer = vec![Word::empty()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(layer.len() * sorted.len());
        for w in &layer {
            for a in &sorted {
                let mut letters = w.letters.clone();
                letters.push(a.clone());
                next.push(Word::new(letters));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}
