//! Decorated non-planar rooted trees and forests in canonical form.
//!
//! Children are kept sorted under the total order "node count, then root
//! decoration, then the sorted child list lexicographically", so structural
//! equality coincides with isomorphism of decorated rooted trees.
//!
//! Text grammar: `tree := "[" decoration { tree } "]"`,
//! `forest := tree { tree } | "1"`. Whitespace between tokens is ignored.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Node decoration. Decorations `1..=d` form the alphabet; `0` is reserved
/// for contracted nodes of the extraction/contraction coproduct.
pub type Decoration = u32;

/// Default cap on the number of enumerated basis elements.
pub const DEFAULT_MAX_BASIS: usize = 20_000;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DecoratedTree {
    decoration: Decoration,
    children: Vec<DecoratedTree>,
    size: usize,
}

impl DecoratedTree {
    /// Builds `[children]_decoration`, canonicalizing the child multiset.
    pub fn new(decoration: Decoration, mut children: Vec<DecoratedTree>) -> Self {
        children.sort();
        let size = 1 + children.iter().map(|c| c.size).sum::<usize>();
        DecoratedTree {
            decoration,
            children,
            size,
        }
    }

    pub fn leaf(decoration: Decoration) -> Self {
        DecoratedTree::new(decoration, Vec::new())
    }

    /// Ladder `[[..]_{d2}]_{d1}` from root to leaf.
    pub fn ladder(decorations: &[Decoration]) -> Self {
        let (first, rest) = decorations.split_first().expect("ladder needs at least one node");
        if rest.is_empty() {
            DecoratedTree::leaf(*first)
        } else {
            DecoratedTree::new(*first, vec![DecoratedTree::ladder(rest)])
        }
    }

    pub fn decoration(&self) -> Decoration {
        self.decoration
    }

    pub fn children(&self) -> &[DecoratedTree] {
        &self.children
    }

    /// Number of nodes `|τ|`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of nodes carrying decoration `0`.
    pub fn zero_count(&self) -> usize {
        usize::from(self.decoration == 0) + self.children.iter().map(|c| c.zero_count()).sum::<usize>()
    }

    pub fn max_decoration(&self) -> Decoration {
        self.children
            .iter()
            .map(|c| c.max_decoration())
            .fold(self.decoration, Decoration::max)
    }

    /// The forest of children, i.e. the tree with its root removed.
    pub fn branches(&self) -> DecoratedForest {
        DecoratedForest::from_trees(self.children.clone())
    }

    pub fn flatten(&self) -> FlatTree {
        FlatTree::from_tree(self)
    }

    /// Admissible cuts of this tree, see [`admissible_cuts`].
    pub fn cuts(&self) -> Vec<AdmissibleCut> {
        admissible_cuts(self)
    }
}

impl Ord for DecoratedTree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size
            .cmp(&other.size)
            .then(self.decoration.cmp(&other.decoration))
            .then_with(|| self.children.cmp(&other.children))
    }
}

impl PartialOrd for DecoratedTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DecoratedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.decoration)?;
        for c in &self.children {
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for DecoratedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for DecoratedTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser::new(s);
        let t = p.tree()?;
        p.expect_end()?;
        Ok(t)
    }
}

/// Commutative monomial of trees; the empty forest is the unit `1`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct DecoratedForest {
    trees: Vec<DecoratedTree>,
}

impl DecoratedForest {
    pub fn unit() -> Self {
        DecoratedForest { trees: Vec::new() }
    }

    pub fn from_trees(mut trees: Vec<DecoratedTree>) -> Self {
        trees.sort();
        DecoratedForest { trees }
    }

    pub fn single(tree: DecoratedTree) -> Self {
        DecoratedForest { trees: vec![tree] }
    }

    pub fn trees(&self) -> &[DecoratedTree] {
        &self.trees
    }

    pub fn is_unit(&self) -> bool {
        self.trees.is_empty()
    }

    /// Returns the tree if the forest has exactly one factor.
    pub fn as_tree(&self) -> Option<&DecoratedTree> {
        match self.trees.as_slice() {
            [t] => Some(t),
            _ => None,
        }
    }

    pub fn size(&self) -> usize {
        self.trees.iter().map(|t| t.size).sum()
    }

    pub fn zero_count(&self) -> usize {
        self.trees.iter().map(|t| t.zero_count()).sum()
    }

    /// Forest product (disjoint union).
    pub fn product(&self, other: &DecoratedForest) -> DecoratedForest {
        let mut trees = self.trees.clone();
        trees.extend(other.trees.iter().cloned());
        DecoratedForest::from_trees(trees)
    }
}

impl From<DecoratedTree> for DecoratedForest {
    fn from(t: DecoratedTree) -> Self {
        DecoratedForest::single(t)
    }
}

impl Ord for DecoratedForest {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size()
            .cmp(&other.size())
            .then_with(|| self.trees.cmp(&other.trees))
    }
}

impl PartialOrd for DecoratedForest {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DecoratedForest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.trees.is_empty() {
            return write!(f, "1");
        }
        for t in &self.trees {
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for DecoratedForest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for DecoratedForest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser::new(s);
        p.skip_ws();
        if p.peek() == Some(b'1') {
            p.pos += 1;
            p.expect_end()?;
            return Ok(DecoratedForest::unit());
        }
        let mut trees = vec![p.tree()?];
        loop {
            p.skip_ws();
            if p.peek().is_none() {
                break;
            }
            trees.push(p.tree()?);
        }
        Ok(DecoratedForest::from_trees(trees))
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Parser {
            bytes: s.as_bytes(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn err(&self, message: &str) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn expect_end(&mut self) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.err("trailing input")),
        }
    }

    fn tree(&mut self) -> Result<DecoratedTree> {
        self.skip_ws();
        if self.peek() != Some(b'[') {
            return Err(self.err("expected '['"));
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected decoration"));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        let decoration: Decoration = text.parse().map_err(|_| self.err("decoration out of range"))?;
        let mut children = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b']') => {
                    self.pos += 1;
                    break;
                }
                Some(b'[') => children.push(self.tree()?),
                _ => return Err(self.err("expected '[' or ']'")),
            }
        }
        Ok(DecoratedTree::new(decoration, children))
    }
}

/// Grafts the trees of `forest` onto a new root decorated `decoration`.
pub fn graft(forest: &DecoratedForest, decoration: Decoration, d: u32) -> Result<DecoratedTree> {
    if decoration == 0 || decoration > d {
        return Err(Error::DecorationOutOfRange { decoration, max: d });
    }
    Ok(DecoratedTree::new(decoration, forest.trees.clone()))
}

/// Node arrays of a canonical tree in preorder. Node `0` is the root and
/// the edge above node `k > 0` is identified with `k`.
#[derive(Clone, Debug)]
pub struct FlatTree {
    pub decoration: Vec<Decoration>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
}

impl FlatTree {
    pub fn from_tree(tree: &DecoratedTree) -> Self {
        let mut flat = FlatTree {
            decoration: Vec::with_capacity(tree.size),
            parent: Vec::with_capacity(tree.size),
            children: Vec::with_capacity(tree.size),
        };
        flat.push(tree, None);
        flat
    }

    fn push(&mut self, tree: &DecoratedTree, parent: Option<usize>) -> usize {
        let id = self.decoration.len();
        self.decoration.push(tree.decoration);
        self.parent.push(parent);
        self.children.push(Vec::new());
        if let Some(p) = parent {
            self.children[p].push(id);
        }
        for c in &tree.children {
            self.push(c, Some(id));
        }
        id
    }

    pub fn len(&self) -> usize {
        self.decoration.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decoration.is_empty()
    }

    /// Edge identifiers (child endpoints), i.e. `1..len`.
    pub fn edges(&self) -> std::ops::Range<usize> {
        1..self.len()
    }

    /// Subtree rooted at `root` restricted to nodes where `keep` holds.
    /// `keep(root)` must hold.
    pub fn subtree_where<F: Fn(usize) -> bool + Copy>(&self, root: usize, keep: F) -> DecoratedTree {
        let children = self.children[root]
            .iter()
            .filter(|&&c| keep(c))
            .map(|&c| self.subtree_where(c, keep))
            .collect();
        DecoratedTree::new(self.decoration[root], children)
    }

    /// Full subtree below and including `root`.
    pub fn subtree(&self, root: usize) -> DecoratedTree {
        self.subtree_where(root, |_| true)
    }

    /// Nodes on the path from `node` up to the root, excluding the root.
    pub fn edges_to_root(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = node;
        while let Some(p) = self.parent[cur] {
            out.push(cur);
            cur = p;
        }
        out
    }

    /// True if `a` lies on the path from the root to `b` (tree order `a ≤ b`).
    pub fn is_ancestor_or_self(&self, a: usize, b: usize) -> bool {
        let mut cur = Some(b);
        while let Some(c) = cur {
            if c == a {
                return true;
            }
            cur = self.parent[c];
        }
        false
    }
}

/// Non-empty set of edges such that every path from a node to the root
/// meets at most one of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibleCut {
    /// Edge identifiers (child endpoints in the preorder numbering).
    pub edges: Vec<usize>,
    /// `P^C(τ)`: the forest of subtrees hanging below the cut edges.
    pub pruned: DecoratedForest,
    /// `R^C(τ)`: the component containing the root.
    pub root_part: DecoratedTree,
}

pub fn admissible_cuts(tree: &DecoratedTree) -> Vec<AdmissibleCut> {
    let flat = tree.flatten();
    let mut out = Vec::new();
    for mut edges in cut_sets(&flat, 0) {
        if edges.is_empty() {
            continue;
        }
        edges.sort_unstable();
        out.push(cut_from_edges(&flat, edges));
    }
    out
}

/// Builds `(P^C, R^C)` for a given edge set on a flattened tree.
pub fn cut_from_edges(flat: &FlatTree, edges: Vec<usize>) -> AdmissibleCut {
    let pruned = DecoratedForest::from_trees(edges.iter().map(|&e| flat.subtree(e)).collect());
    let root_part = flat.subtree_where(0, |n| !edges.contains(&n));
    AdmissibleCut {
        edges,
        pruned,
        root_part,
    }
}

// All admissible edge sets inside the subtree at `node` (edge above excluded),
// including the empty set.
fn cut_sets(flat: &FlatTree, node: usize) -> Vec<Vec<usize>> {
    let mut acc: Vec<Vec<usize>> = vec![Vec::new()];
    for &c in &flat.children[node] {
        let mut options = vec![vec![c]];
        options.extend(cut_sets(flat, c));
        let mut next = Vec::with_capacity(acc.len() * options.len());
        for a in &acc {
            for o in &options {
                let mut v = a.clone();
                v.extend_from_slice(o);
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

/// All trees with at most `n` nodes and decorations drawn from `decorations`,
/// in canonical order.
pub fn enumerate_trees_with(n: usize, decorations: &[Decoration], cap: usize) -> Result<Vec<DecoratedTree>> {
    let mut decos = decorations.to_vec();
    decos.sort_unstable();
    decos.dedup();
    let mut all: Vec<DecoratedTree> = Vec::new();
    for size in 1..=n {
        let mut layer = Vec::new();
        for children in forests_of_size(&all, size - 1, cap)? {
            for &dec in &decos {
                layer.push(DecoratedTree::new(dec, children.clone()));
                if all.len() + layer.len() > cap {
                    return Err(Error::BasisTooLarge {
                        count: all.len() + layer.len(),
                        cap,
                    });
                }
            }
        }
        layer.sort();
        all.extend(layer);
    }
    Ok(all)
}

/// All trees with at most `n` nodes over the alphabet `1..=d`.
pub fn enumerate_trees(n: usize, d: u32, cap: usize) -> Result<Vec<DecoratedTree>> {
    if n == 0 || d == 0 {
        return Err(Error::Precondition("enumerate_trees needs n >= 1 and d >= 1".into()));
    }
    let decos: Vec<Decoration> = (1..=d).collect();
    enumerate_trees_with(n, &decos, cap)
}

/// All forests (including the unit) with at most `n` nodes, in canonical order.
pub fn enumerate_forests_with(n: usize, decorations: &[Decoration], cap: usize) -> Result<Vec<DecoratedForest>> {
    let trees = enumerate_trees_with(n, decorations, cap)?;
    let mut out = vec![DecoratedForest::unit()];
    for size in 1..=n {
        let mut layer: Vec<DecoratedForest> = forests_of_size(&trees, size, cap)?
            .into_iter()
            .map(DecoratedForest::from_trees)
            .collect();
        layer.sort();
        out.extend(layer);
        if out.len() > cap {
            return Err(Error::BasisTooLarge { count: out.len(), cap });
        }
    }
    Ok(out)
}

// Multisets (as non-decreasing index sequences) of trees from `pool` whose
// sizes add up to `size`.
fn forests_of_size(pool: &[DecoratedTree], size: usize, cap: usize) -> Result<Vec<Vec<DecoratedTree>>> {
    fn go(
        pool: &[DecoratedTree],
        start: usize,
        remaining: usize,
        current: &mut Vec<DecoratedTree>,
        out: &mut Vec<Vec<DecoratedTree>>,
        cap: usize,
    ) -> Result<()> {
        if remaining == 0 {
            out.push(current.clone());
            if out.len() > cap {
                return Err(Error::BasisTooLarge { count: out.len(), cap });
            }
            return Ok(());
        }
        for i in start..pool.len() {
            let t = &pool[i];
            if t.size > remaining {
                continue;
            }
            current.push(t.clone());
            go(pool, i, remaining - t.size, current, out, cap)?;
            current.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    go(pool, 0, size, &mut Vec::new(), &mut out, cap)?;
    Ok(out)
}

/// True iff some connected subtree of `sigma`, rooted at its node closest to
/// the root of `sigma`, is isomorphic to `tau`.
pub fn contains(sigma: &DecoratedTree, tau: &DecoratedTree) -> bool {
    if tau.size > sigma.size {
        return false;
    }
    let flat = sigma.flatten();
    (0..flat.len()).any(|u| embeds_at(&flat, u, tau))
}

fn embeds_at(flat: &FlatTree, node: usize, tau: &DecoratedTree) -> bool {
    if flat.decoration[node] != tau.decoration {
        return false;
    }
    let hosts = &flat.children[node];
    if tau.children.len() > hosts.len() {
        return false;
    }
    let mut used = vec![false; hosts.len()];
    assign_children(flat, hosts, &tau.children, &mut used)
}

fn assign_children(flat: &FlatTree, hosts: &[usize], pattern: &[DecoratedTree], used: &mut [bool]) -> bool {
    let Some((first, rest)) = pattern.split_first() else {
        return true;
    };
    for i in 0..hosts.len() {
        if used[i] || !embeds_at(flat, hosts[i], first) {
            continue;
        }
        used[i] = true;
        if assign_children(flat, hosts, rest, used) {
            return true;
        }
        used[i] = false;
    }
    false
}
