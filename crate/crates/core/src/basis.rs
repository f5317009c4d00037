//! Finite truncations of a graded connected Hopf algebra, with structure
//! constants tabulated against a fixed ordered basis.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::sync::{Arc, OnceLock};

use num_rational::Rational64;
use num_traits::ToPrimitive;

use crate::bck;
use crate::error::{Error, Result};
use crate::forest::{enumerate_forests_with, DecoratedForest, Decoration};
use crate::lincomb::LinComb;
use crate::scalar::Rational;
use crate::shuffle::{self, anisotropic_basis, words_up_to, Alphabet, Letter, Word};

/// Basis element of a graded connected Hopf algebra with integer structure
/// constants.
pub trait HopfKey: Clone + Ord + Hash + Eq + fmt::Display + fmt::Debug + Send + Sync + 'static {
    fn unit() -> Self;
    fn is_unit(&self) -> bool;
    /// Degree used for truncation: node count or word length.
    fn grade(&self) -> usize;
    /// Full coproduct, unit terms included.
    fn coproduct_terms(&self) -> Vec<(Self, Self, i64)>;
    fn product_terms(&self, other: &Self) -> Vec<(Self, i64)>;
    fn antipode_terms(&self) -> Vec<(Self, i64)>;
    fn parse_key(text: &str) -> Result<Self>;
}

fn integral(c: &Rational) -> i64 {
    assert!(c.is_integer(), "structure constant {c} is not an integer");
    c.to_integer().to_i64().expect("structure constant overflow")
}

fn flatten<T: Ord + Clone>(comb: LinComb<T>) -> Vec<(T, i64)> {
    comb.iter().map(|(k, c)| (k.clone(), integral(c))).collect()
}

impl HopfKey for DecoratedForest {
    fn unit() -> Self {
        DecoratedForest::unit()
    }

    fn is_unit(&self) -> bool {
        DecoratedForest::is_unit(self)
    }

    fn grade(&self) -> usize {
        self.size()
    }

    fn coproduct_terms(&self) -> Vec<(Self, Self, i64)> {
        bck::bck_coproduct(self)
            .iter()
            .map(|(k, c)| (k.0[0].clone(), k.0[1].clone(), integral(c)))
            .collect()
    }

    fn product_terms(&self, other: &Self) -> Vec<(Self, i64)> {
        vec![(self.product(other), 1)]
    }

    fn antipode_terms(&self) -> Vec<(Self, i64)> {
        flatten(bck::antipode(self))
    }

    fn parse_key(text: &str) -> Result<Self> {
        text.parse()
    }
}

impl<L: Letter> HopfKey for Word<L> {
    fn unit() -> Self {
        Word::empty()
    }

    fn is_unit(&self) -> bool {
        self.is_empty()
    }

    fn grade(&self) -> usize {
        self.len()
    }

    fn coproduct_terms(&self) -> Vec<(Self, Self, i64)> {
        // Split position order; independent of the ambient alphabet.
        (0..=self.len())
            .map(|k| {
                (
                    Word::new(self.letters()[..k].to_vec()),
                    Word::new(self.letters()[k..].to_vec()),
                    1,
                )
            })
            .collect()
    }

    fn product_terms(&self, other: &Self) -> Vec<(Self, i64)> {
        flatten(shuffle::shuffle(self, other))
    }

    fn antipode_terms(&self) -> Vec<(Self, i64)> {
        let (sign, w) = shuffle::word_antipode(self);
        vec![(w, sign)]
    }

    fn parse_key(text: &str) -> Result<Self> {
        Word::parse(text)
    }
}

/// Index tuple with integer multiplicity.
pub type IndexTerm = (Vec<usize>, i64);

/// Ordered basis `{𝟏} ∪ B` of a finite subcoalgebra, closed under the
/// antipode, with tabulated coproduct. Index 0 is always the unit.
pub struct Truncation<K: HopfKey> {
    keys: Vec<K>,
    index: HashMap<K, usize>,
    grades: Vec<usize>,
    homogeneity: Vec<Rational64>,
    max_grade: usize,
    coproduct: Vec<Vec<(usize, usize, i64)>>,
    antipode: Vec<Vec<(usize, i64)>>,
    iterated: Vec<OnceLock<Vec<Vec<IndexTerm>>>>,
    products: OnceLock<Vec<(usize, usize, Vec<(usize, i64)>)>>,
    norm_constant: OnceLock<f64>,
}

impl<K: HopfKey> fmt::Debug for Truncation<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Truncation")
            .field("size", &self.keys.len())
            .field("max_grade", &self.max_grade)
            .finish()
    }
}

impl<K: HopfKey> Truncation<K> {
    /// Builds a truncation from non-unit keys and their homogeneities
    /// (dilation exponents). Fails if the span is not a subcoalgebra closed
    /// under the antipode.
    pub fn new(keys: Vec<(K, Rational64)>) -> Result<Self> {
        let mut keys = keys;
        keys.retain(|(k, _)| !k.is_unit());
        keys.sort_by(|a, b| a.0.grade().cmp(&b.0.grade()).then_with(|| a.0.cmp(&b.0)));
        keys.dedup_by(|a, b| a.0 == b.0);
        let mut all = vec![K::unit()];
        let mut homogeneity = vec![Rational64::from_integer(0)];
        for (k, h) in keys {
            all.push(k);
            homogeneity.push(h);
        }
        let index: HashMap<K, usize> = all.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        let grades: Vec<usize> = all.iter().map(|k| k.grade()).collect();
        let max_grade = grades.iter().copied().max().unwrap_or(0);
        let lookup = |k: &K| {
            index
                .get(k)
                .copied()
                .ok_or_else(|| Error::BasisMismatch(format!("basis is not closed: {k} is missing")))
        };
        let mut coproduct = Vec::with_capacity(all.len());
        let mut antipode = Vec::with_capacity(all.len());
        for k in &all {
            let mut row = Vec::new();
            for (a, b, c) in k.coproduct_terms() {
                row.push((lookup(&a)?, lookup(&b)?, c));
            }
            coproduct.push(row);
            let mut srow = Vec::new();
            for (a, c) in k.antipode_terms() {
                srow.push((lookup(&a)?, c));
            }
            antipode.push(srow);
        }
        let iterated = (0..=max_grade).map(|_| OnceLock::new()).collect();
        Ok(Truncation {
            keys: all,
            index,
            grades,
            homogeneity,
            max_grade,
            coproduct,
            antipode,
            iterated,
            products: OnceLock::new(),
            norm_constant: OnceLock::new(),
        })
    }

    /// Keys graded by their degree.
    pub fn graded(keys: Vec<K>) -> Result<Self> {
        Truncation::new(
            keys.into_iter()
                .map(|k| {
                    let g = k.grade() as i64;
                    (k, Rational64::from_integer(g))
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.len() <= 1
    }

    pub fn keys(&self) -> &[K] {
        &self.keys
    }

    pub fn key(&self, i: usize) -> &K {
        &self.keys[i]
    }

    pub fn index_of(&self, k: &K) -> Option<usize> {
        self.index.get(k).copied()
    }

    pub fn require_index(&self, k: &K) -> Result<usize> {
        self.index_of(k).ok_or_else(|| Error::NotInBasis(k.to_string()))
    }

    pub fn grade(&self, i: usize) -> usize {
        self.grades[i]
    }

    pub fn homogeneity(&self, i: usize) -> Rational64 {
        self.homogeneity[i]
    }

    pub fn max_grade(&self) -> usize {
        self.max_grade
    }

    /// Indices of keys with the given grade (contiguous).
    pub fn grade_range(&self, g: usize) -> std::ops::Range<usize> {
        let lo = self.grades.partition_point(|&x| x < g);
        let hi = self.grades.partition_point(|&x| x <= g);
        lo..hi
    }

    pub fn coproduct(&self, i: usize) -> &[(usize, usize, i64)] {
        &self.coproduct[i]
    }

    pub fn antipode(&self, i: usize) -> &[(usize, i64)] {
        &self.antipode[i]
    }

    /// `Δ'_n` as index tuples of arity `n + 1`, for every key. Terms appear
    /// in generation order, duplicates merged at their first occurrence.
    pub fn iterated_reduced(&self, n: usize) -> &[Vec<IndexTerm>] {
        // Beyond the top grade every row is empty, as it is at `max_grade`.
        let n = n.min(self.max_grade);
        self.iterated[n].get_or_init(|| self.build_iterated(n))
    }

    fn build_iterated(&self, n: usize) -> Vec<Vec<IndexTerm>> {
        if n == 0 {
            return (0..self.len())
                .map(|i| if i == 0 { Vec::new() } else { vec![(vec![i], 1)] })
                .collect();
        }
        let prev = self.iterated_reduced(n - 1);
        (0..self.len())
            .map(|x| {
                let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
                let mut out: Vec<IndexTerm> = Vec::new();
                for &(a, b, c) in &self.coproduct[x] {
                    if a == 0 || b == 0 {
                        continue;
                    }
                    for (tuple, c2) in &prev[a] {
                        let mut t = tuple.clone();
                        t.push(b);
                        let coeff = c * c2;
                        match seen.get(&t) {
                            Some(&pos) => out[pos].1 += coeff,
                            None => {
                                seen.insert(t.clone(), out.len());
                                out.push((t, coeff));
                            }
                        }
                    }
                }
                out.retain(|(_, c)| *c != 0);
                out
            })
            .collect()
    }

    /// Pairs of non-unit keys whose product lies entirely in the truncation,
    /// with the expansion of that product.
    pub fn products(&self) -> &[(usize, usize, Vec<(usize, i64)>)] {
        self.products.get_or_init(|| {
            let mut out = Vec::new();
            for i in 1..self.len() {
                for j in i..self.len() {
                    if self.grades[i] + self.grades[j] > self.max_grade {
                        break;
                    }
                    let terms = self.keys[i].product_terms(&self.keys[j]);
                    let mapped: Option<Vec<(usize, i64)>> =
                        terms.iter().map(|(k, c)| self.index_of(k).map(|x| (x, *c))).collect();
                    if let Some(m) = mapped {
                        out.push((i, j, m));
                    }
                }
            }
            out
        })
    }

    /// `D = max_v Σ_{(v)} |c(v1, v2; v)|` over the full coproduct.
    pub fn norm_constant(&self) -> f64 {
        *self.norm_constant.get_or_init(|| {
            self.coproduct
                .iter()
                .map(|row| row.iter().map(|(_, _, c)| c.unsigned_abs() as f64).sum::<f64>())
                .fold(0.0, f64::max)
        })
    }

    /// Structural equality of two truncations (same ordered keys).
    pub fn same_as(&self, other: &Truncation<K>) -> bool {
        std::ptr::eq(self, other) || self.keys == other.keys
    }
}

/// All forests with at most `n` nodes over the given decorations.
pub fn forest_truncation(n: usize, decorations: &[Decoration], cap: usize) -> Result<Arc<Truncation<DecoratedForest>>> {
    let forests = enumerate_forests_with(n, decorations, cap)?;
    Ok(Arc::new(Truncation::graded(forests)?))
}

/// Forests over `{1..d}` with at most `n` nodes.
pub fn bck_truncation(n: usize, d: u32, cap: usize) -> Result<Arc<Truncation<DecoratedForest>>> {
    if d == 0 {
        return Err(Error::Invalid("alphabet size must be positive".into()));
    }
    let decorations: Vec<Decoration> = (1..=d).collect();
    forest_truncation(n, &decorations, cap)
}

/// Words of length at most `n` over the given letters, graded by length.
pub fn word_truncation<L: Letter>(letters: &[L], n: usize, cap: usize) -> Result<Arc<Truncation<Word<L>>>> {
    let count: usize = (1..=n).map(|k| letters.len().saturating_pow(k as u32)).sum();
    if count > cap {
        return Err(Error::BasisTooLarge { count, cap });
    }
    Ok(Arc::new(Truncation::graded(words_up_to(letters, n))?))
}

/// Words over `{1..d}` of length at most `n`.
pub fn shuffle_truncation(n: usize, d: u32, cap: usize) -> Result<Arc<Truncation<Word<u32>>>> {
    let letters: Vec<u32> = (1..=d).collect();
    word_truncation(&letters, n, cap)
}

/// The anisotropic word set `𝔏`, with homogeneity `ω(v)` and grade `ℓ(v)`.
pub fn anisotropic_truncation<L: Letter>(alphabet: &Alphabet<L>, cap: usize) -> Result<Arc<Truncation<Word<L>>>> {
    let words = anisotropic_basis(alphabet);
    if words.len() > cap {
        return Err(Error::BasisTooLarge {
            count: words.len(),
            cap,
        });
    }
    let keyed = words
        .into_iter()
        .map(|w| {
            let om = alphabet.omega(&w).expect("word over alphabet");
            (w, om)
        })
        .collect();
    Ok(Arc::new(Truncation::new(keyed)?))
}
