//! The Hairer–Kelly map from forests to words of trees, by its cut
//! recursion and by admissible extended decorations.

use std::collections::HashMap;

use num_traits::One;

use crate::bck::ForestComb;
use crate::error::{Error, Result};
use crate::forest::{DecoratedForest, DecoratedTree, Decoration};
use crate::scalar::Rational;
use crate::shuffle::{shuffle_comb, Word, WordComb};

/// Words whose letters are trees.
pub type TreeWord = Word<DecoratedTree>;
pub type TreeWordComb = WordComb<DecoratedTree>;

/// Memo table for `ψ` on trees. Not shared between threads.
#[derive(Default)]
pub struct PsiCache {
    trees: HashMap<DecoratedTree, TreeWordComb>,
}

impl PsiCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// `ψ(τ) = τ + Σ_C ψ(P^C(τ)) ⊗ R^C(τ)`: the root part is the last letter.
    pub fn tree(&mut self, tree: &DecoratedTree) -> TreeWordComb {
        if let Some(v) = self.trees.get(tree) {
            return v.clone();
        }
        let mut out = TreeWordComb::single(Word::letter(tree.clone()));
        for cut in tree.cuts() {
            let head = self.forest(&cut.pruned);
            let tail = Word::letter(cut.root_part.clone());
            out.add_assign(&head.map_linear(|w| TreeWordComb::single(w.concat(&tail))));
        }
        self.trees.insert(tree.clone(), out.clone());
        out
    }

    /// Multiplicative extension: shuffle of the factors' images.
    pub fn forest(&mut self, forest: &DecoratedForest) -> TreeWordComb {
        let mut acc = TreeWordComb::single(Word::empty());
        for t in forest.trees() {
            let pt = self.tree(t);
            acc = shuffle_comb(&acc, &pt);
        }
        acc
    }

    pub fn comb(&mut self, x: &ForestComb) -> TreeWordComb {
        x.map_linear(|f| self.forest(f))
    }

    /// `ψ_{|τ|−1}(τ) = ψ(τ) − τ`.
    pub fn tree_tail(&mut self, tree: &DecoratedTree) -> TreeWordComb {
        let mut out = self.tree(tree);
        out.add_term(Word::letter(tree.clone()), -Rational::one());
        out
    }
}

/// `ψ(F)` with the size guard `|F| ≤ n`.
pub fn psi(forest: &DecoratedForest, n: usize) -> Result<TreeWordComb> {
    if forest.size() > n {
        return Err(Error::LevelOverflow {
            level: forest.size(),
            max: n,
        });
    }
    Ok(PsiCache::new().forest(forest))
}

/// Nodes of a forest in preorder, tree by tree.
#[derive(Clone, Debug)]
struct FlatForest {
    decoration: Vec<Decoration>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl FlatForest {
    fn new(forest: &DecoratedForest) -> Self {
        let mut flat = FlatForest {
            decoration: Vec::new(),
            parent: Vec::new(),
            children: Vec::new(),
        };
        for t in forest.trees() {
            flat.push(t, None);
        }
        flat
    }

    fn push(&mut self, tree: &DecoratedTree, parent: Option<usize>) {
        let id = self.decoration.len();
        self.decoration.push(tree.decoration());
        self.parent.push(parent);
        self.children.push(Vec::new());
        if let Some(p) = parent {
            self.children[p].push(id);
        }
        for c in tree.children() {
            self.push(c, Some(id));
        }
    }

    fn len(&self) -> usize {
        self.decoration.len()
    }

    fn subtree_where<F: Fn(usize) -> bool + Copy>(&self, root: usize, keep: F) -> DecoratedTree {
        let children = self.children[root]
            .iter()
            .filter(|&&c| keep(c))
            .map(|&c| self.subtree_where(c, keep))
            .collect();
        DecoratedTree::new(self.decoration[root], children)
    }
}

/// Labelling `𝔬` of the nodes of a forest (preorder, tree by tree).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedDecoration {
    pub host: DecoratedForest,
    pub labels: Vec<u32>,
}

impl ExtendedDecoration {
    pub fn max_label(&self) -> u32 {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// Admissibility: labels form `{1..m}`, weakly increase away from the
    /// roots, and each level set spans a single subtree.
    pub fn is_admissible(&self) -> bool {
        let flat = FlatForest::new(&self.host);
        self.labels.len() == flat.len() && admissible(&flat, &self.labels)
    }

    /// `(τ_1, …, τ_m)`, `τ_j` spanned by the nodes labelled `j`.
    pub fn parts(&self) -> Option<Vec<DecoratedTree>> {
        let flat = FlatForest::new(&self.host);
        if !admissible(&flat, &self.labels) {
            return None;
        }
        Some(parts(&flat, &self.labels))
    }

    /// The word `τ_m ⊗ ⋯ ⊗ τ_1`.
    pub fn word(&self) -> Option<TreeWord> {
        self.parts().map(|mut p| {
            p.reverse();
            Word::new(p)
        })
    }
}

fn admissible(flat: &FlatForest, labels: &[u32]) -> bool {
    let n = flat.len();
    if labels.len() != n {
        return false;
    }
    if n == 0 {
        return true;
    }
    let m = *labels.iter().max().unwrap();
    if m as usize > n || labels.iter().any(|&l| l == 0) {
        return false;
    }
    let mut present = vec![false; m as usize + 1];
    for &l in labels {
        present[l as usize] = true;
    }
    if present.iter().skip(1).any(|p| !p) {
        return false;
    }
    for v in 0..n {
        if let Some(p) = flat.parent[v] {
            if labels[p] > labels[v] {
                return false;
            }
        }
    }
    // A level set is connected iff exactly one of its nodes has no parent
    // inside it.
    let mut tops = vec![0usize; m as usize + 1];
    for v in 0..n {
        let l = labels[v];
        let inside = flat.parent[v].map(|p| labels[p] == l).unwrap_or(false);
        if !inside {
            tops[l as usize] += 1;
        }
    }
    tops.iter().skip(1).all(|&c| c == 1)
}

fn parts(flat: &FlatForest, labels: &[u32]) -> Vec<DecoratedTree> {
    let m = labels.iter().copied().max().unwrap_or(0);
    (1..=m)
        .map(|j| {
            let top = (0..flat.len())
                .find(|&v| labels[v] == j && flat.parent[v].map(|p| labels[p] != j).unwrap_or(true))
                .expect("admissible level set has a top node");
            flat.subtree_where(top, |v| labels[v] == j)
        })
        .collect()
}

/// All admissible extended decorations, by brute force over labellings.
pub fn enumerate_extended_decorations(host: &DecoratedForest) -> Vec<ExtendedDecoration> {
    let flat = FlatForest::new(host);
    let n = flat.len();
    let mut out = Vec::new();
    if n == 0 {
        out.push(ExtendedDecoration {
            host: host.clone(),
            labels: Vec::new(),
        });
        return out;
    }
    let mut labels = vec![1u32; n];
    loop {
        if admissible(&flat, &labels) {
            out.push(ExtendedDecoration {
                host: host.clone(),
                labels: labels.clone(),
            });
        }
        // Odometer over {1..n}^n.
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            if labels[i] < n as u32 {
                labels[i] += 1;
                break;
            }
            labels[i] = 1;
            i += 1;
        }
    }
}

/// `ψ(F) = Σ_{𝔬 ∈ 𝔒(F)} τ_m ⊗ ⋯ ⊗ τ_1`.
pub fn psi_via_partitions(forest: &DecoratedForest, n: usize) -> Result<TreeWordComb> {
    if forest.size() > n {
        return Err(Error::LevelOverflow {
            level: forest.size(),
            max: n,
        });
    }
    let mut out = TreeWordComb::zero();
    for o in enumerate_extended_decorations(forest) {
        let w = o.word().expect("enumerated decorations are admissible");
        out.add_term(w, Rational::one());
    }
    Ok(out)
}
