//! Finite posets and the order-theoretic primitives the rest of the crate
//! builds on.
//!
//! Elements are identified by their position; labels only matter for
//! input and output.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("CycleDetected({0},{1})")]
    CycleDetected(String, String),
    #[error("DuplicateLabel({0})")]
    DuplicateLabel(String),
    #[error("UnknownLabel({0})")]
    UnknownLabel(String),
    #[error("NotComparable({0},{1})")]
    NotComparable(String, String),
    #[error("NoTop")]
    NoTop,
    #[error("NotALattice({0},{1})")]
    NotALattice(String, String),
}

/// A finite partial order stored as its full relation plus the cover
/// relation (the Hasse diagram).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    names: Vec<String>,
    leq: Vec<bool>,
    covers: Vec<(usize, usize)>,
}

impl Poset {
    /// Builds a poset from declared labels and `(lower, upper)` pairs.
    /// Pairs may be redundant; the stored covers are the transitive
    /// reduction of the closure.
    pub fn build<S: AsRef<str>>(elements: &[S], pairs: &[(S, S)]) -> Result<Self, OrderError> {
        let mut index = HashMap::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            if index.insert(e.as_ref().to_string(), i).is_some() {
                return Err(OrderError::DuplicateLabel(e.as_ref().to_string()));
            }
        }
        let lookup =
            |s: &S| index.get(s.as_ref()).copied().ok_or_else(|| OrderError::UnknownLabel(s.as_ref().to_string()));
        let mut idx_pairs = Vec::with_capacity(pairs.len());
        for (lo, hi) in pairs {
            idx_pairs.push((lookup(lo)?, lookup(hi)?));
        }
        let names = elements.iter().map(|e| e.as_ref().to_string()).collect();
        Self::from_relation(names, &idx_pairs)
    }

    /// Index-based constructor: reflexive-transitive closure of `pairs`.
    pub fn from_relation(names: Vec<String>, pairs: &[(usize, usize)]) -> Result<Self, OrderError> {
        let n = names.len();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for &(lo, hi) in pairs {
            leq[lo * n + hi] = true;
        }
        // Warshall
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if leq[i * n + j] && leq[j * n + i] {
                    return Err(OrderError::CycleDetected(names[i].clone(), names[j].clone()));
                }
            }
        }
        Ok(Self::from_closed(names, leq))
    }

    /// `leq` must already be a partial order in row-major layout.
    pub(crate) fn from_closed(names: Vec<String>, leq: Vec<bool>) -> Self {
        let n = names.len();
        debug_assert_eq!(leq.len(), n * n);
        let mut covers = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && leq[i * n + j] && !(0..n).any(|k| k != i && k != j && leq[i * n + k] && leq[k * n + j]) {
                    covers.push((i, j));
                }
            }
        }
        Poset { names, leq, covers }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.names.iter().position(|n| n == label)
    }

    #[inline]
    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.leq[x * self.names.len() + y]
    }

    #[inline]
    pub fn lt(&self, x: usize, y: usize) -> bool {
        x != y && self.leq(x, y)
    }

    pub fn comparable(&self, x: usize, y: usize) -> bool {
        self.leq(x, y) || self.leq(y, x)
    }

    /// Cover pairs `(lower, upper)` in lexicographic index order.
    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn upper_bounds(&self, xs: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|&u| xs.iter().all(|&x| self.leq(x, u))).collect()
    }

    pub fn lower_bounds(&self, xs: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|&l| xs.iter().all(|&x| self.leq(l, x))).collect()
    }

    pub fn minimal_elements(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| !(0..self.len()).any(|y| self.lt(y, x))).collect()
    }

    pub fn maximal_elements(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| !(0..self.len()).any(|y| self.lt(x, y))).collect()
    }

    /// The greatest element, if there is one.
    pub fn top(&self) -> Option<usize> {
        (0..self.len()).find(|&t| (0..self.len()).all(|x| self.leq(x, t)))
    }

    pub fn bottom(&self) -> Option<usize> {
        (0..self.len()).find(|&b| (0..self.len()).all(|x| self.leq(b, x)))
    }

    /// Least element of `set` under the order, if one exists.
    pub fn least_of(&self, set: &[usize]) -> Option<usize> {
        set.iter().copied().find(|&c| set.iter().all(|&s| self.leq(c, s)))
    }

    pub fn greatest_of(&self, set: &[usize]) -> Option<usize> {
        set.iter().copied().find(|&c| set.iter().all(|&s| self.leq(s, c)))
    }

    pub fn up_set(&self, x: usize) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.leq(x, y)).collect()
    }

    pub fn down_set(&self, x: usize) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.leq(y, x)).collect()
    }

    pub fn interval(&self, a: usize, b: usize) -> Result<SubIntervalView<'_>, OrderError> {
        if !self.leq(a, b) {
            return Err(OrderError::NotComparable(self.names[a].clone(), self.names[b].clone()));
        }
        let members = (0..self.len()).filter(|&x| self.leq(a, x) && self.leq(x, b)).collect();
        Ok(SubIntervalView { parent: self, members })
    }

    /// The whole poset seen as a view, for lattice tests on posets that are
    /// not themselves an interval.
    pub fn full_view(&self) -> SubIntervalView<'_> {
        SubIntervalView { parent: self, members: (0..self.len()).collect() }
    }

    /// Length of the longest chain from `x` up to the top.
    pub fn coheight(&self, x: usize) -> Result<usize, OrderError> {
        let top = self.top().ok_or(OrderError::NoTop)?;
        let mut memo = vec![None; self.len()];
        Ok(self.coheight_memo(x, top, &mut memo))
    }

    /// Coheight of every element; errors when there is no top.
    pub fn coheights(&self) -> Result<Vec<usize>, OrderError> {
        let top = self.top().ok_or(OrderError::NoTop)?;
        let mut memo = vec![None; self.len()];
        Ok((0..self.len()).map(|x| self.coheight_memo(x, top, &mut memo)).collect())
    }

    fn coheight_memo(&self, x: usize, top: usize, memo: &mut [Option<usize>]) -> usize {
        if x == top {
            return 0;
        }
        if let Some(h) = memo[x] {
            return h;
        }
        let uppers: Vec<usize> = self.covers.iter().filter(|&&(lo, _)| lo == x).map(|&(_, hi)| hi).collect();
        let h = 1 + uppers.into_iter().map(|u| self.coheight_memo(u, top, memo)).max().unwrap_or(0);
        memo[x] = Some(h);
        h
    }

    /// Cover pairs as labels; handy for serialization.
    pub fn labeled_covers(&self) -> Vec<(String, String)> {
        self.covers.iter().map(|&(l, h)| (self.names[l].clone(), self.names[h].clone())).collect()
    }

    /// Poset induced on `members` (in the given order), labels preserved.
    pub fn induced(&self, members: &[usize]) -> Poset {
        let names = members.iter().map(|&m| self.names[m].clone()).collect();
        let k = members.len();
        let mut leq = vec![false; k * k];
        for (i, &x) in members.iter().enumerate() {
            for (j, &y) in members.iter().enumerate() {
                leq[i * k + j] = self.leq(x, y);
            }
        }
        Poset::from_closed(names, leq)
    }

    /// Adjoins a new greatest element.
    pub fn with_top(&self, label: &str) -> Poset {
        let n = self.len();
        let mut names = self.names.clone();
        names.push(label.to_string());
        let mut leq = vec![false; (n + 1) * (n + 1)];
        for i in 0..n {
            for j in 0..n {
                leq[i * (n + 1) + j] = self.leq(i, j);
            }
            leq[i * (n + 1) + n] = true;
        }
        leq[n * (n + 1) + n] = true;
        Poset::from_closed(names, leq)
    }
}

/// The elements `members` of `parent` under the induced order; usually an
/// interval `[a, b]`.
#[derive(Debug, Clone)]
pub struct SubIntervalView<'p> {
    parent: &'p Poset,
    members: Vec<usize>,
}

impl<'p> SubIntervalView<'p> {
    pub fn new(parent: &'p Poset, members: Vec<usize>) -> Self {
        SubIntervalView { parent, members }
    }

    pub fn parent(&self) -> &'p Poset {
        self.parent
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn join(&self, x: usize, y: usize) -> Option<usize> {
        let ubs: Vec<usize> =
            self.members.iter().copied().filter(|&u| self.parent.leq(x, u) && self.parent.leq(y, u)).collect();
        self.parent.least_of(&ubs)
    }

    pub fn meet(&self, x: usize, y: usize) -> Option<usize> {
        let lbs: Vec<usize> =
            self.members.iter().copied().filter(|&l| self.parent.leq(l, x) && self.parent.leq(l, y)).collect();
        self.parent.greatest_of(&lbs)
    }

    fn first_non_lattice_pair(&self) -> Option<(usize, usize)> {
        for (i, &x) in self.members.iter().enumerate() {
            for &y in &self.members[i + 1..] {
                if self.join(x, y).is_none() || self.meet(x, y).is_none() {
                    return Some((x, y));
                }
            }
        }
        None
    }

    pub fn is_lattice(&self) -> bool {
        self.first_non_lattice_pair().is_none()
    }

    /// Checks `x ∧ (y ∨ z) = (x ∧ y) ∨ (x ∧ z)` over every triple.
    pub fn is_distributive(&self) -> Result<bool, OrderError> {
        if let Some((x, y)) = self.first_non_lattice_pair() {
            let p = self.parent;
            return Err(OrderError::NotALattice(p.name(x).to_string(), p.name(y).to_string()));
        }
        let k = self.members.len();
        let mut join = vec![0; k * k];
        let mut meet = vec![0; k * k];
        let pos: HashMap<usize, usize> = self.members.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        for i in 0..k {
            for j in 0..k {
                let (x, y) = (self.members[i], self.members[j]);
                join[i * k + j] = pos[&self.join(x, y).expect("lattice")];
                meet[i * k + j] = pos[&self.meet(x, y).expect("lattice")];
            }
        }
        for x in 0..k {
            for y in 0..k {
                for z in 0..k {
                    let lhs = meet[x * k + join[y * k + z]];
                    let rhs = join[meet[x * k + y] * k + meet[x * k + z]];
                    if lhs != rhs {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

/// Labels of `xs`, sorted and joined; used in witnesses and reports.
pub fn label_set(p: &Poset, xs: impl IntoIterator<Item = usize>) -> String {
    let set: BTreeSet<usize> = xs.into_iter().collect();
    let parts: Vec<&str> = set.into_iter().map(|x| p.name(x)).collect();
    format!("{{{}}}", parts.join(","))
}
