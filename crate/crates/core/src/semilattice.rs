//! Strong upper semilattices: joins everywhere, meets wherever a lower
//! bound exists, plus the meet-irreducibles and the `x⁺` construction.

use thiserror::Error;

use crate::order::{label_set, Poset};
use crate::report::VerificationItem;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SusError {
    #[error("NoTop")]
    NoTop,
    #[error("JoinMissing({0},{1})")]
    JoinMissing(String, String),
    #[error("StrongConditionFails({0},{1})")]
    StrongConditionFails(String, String),
    #[error("IntervalNotDistributive({0},{1})")]
    IntervalNotDistributive(String, String),
    #[error("NoLowerBound({0})")]
    NoLowerBound(String),
    #[error("NotMeetIrreducible({0})")]
    NotMeetIrreducible(String),
    #[error("IsTop({0})")]
    IsTop(String),
    #[error("EmptySet")]
    EmptySet,
}

/// A validated strong upper semilattice with its operation tables.
#[derive(Debug, Clone)]
pub struct Sus {
    base: Poset,
    top: usize,
    join: Vec<usize>,
    meet: Vec<Option<usize>>,
    irreducibles: Vec<usize>,
    minimal: Vec<usize>,
    distributive: bool,
}

/// Validates `p` as a distributive strong upper semilattice.
pub fn validate_sus(p: Poset) -> Result<Sus, SusError> {
    Sus::new(p, true)
}

/// Validates the strong-semilattice axioms only; the distributive flag
/// records whether every interval is distributive.
pub fn validate_strong(p: Poset) -> Result<Sus, SusError> {
    Sus::new(p, false)
}

impl Sus {
    fn new(p: Poset, require_distributive: bool) -> Result<Self, SusError> {
        let n = p.len();
        let top = p.top().ok_or(SusError::NoTop)?;
        let mut join = vec![0; n * n];
        let mut meet = vec![None; n * n];
        for x in 0..n {
            for y in x..n {
                let j = p
                    .least_of(&p.upper_bounds(&[x, y]))
                    .ok_or_else(|| SusError::JoinMissing(p.name(x).into(), p.name(y).into()))?;
                join[x * n + y] = j;
                join[y * n + x] = j;
                let lbs = p.lower_bounds(&[x, y]);
                if !lbs.is_empty() {
                    let m = p
                        .greatest_of(&lbs)
                        .ok_or_else(|| SusError::StrongConditionFails(p.name(x).into(), p.name(y).into()))?;
                    meet[x * n + y] = Some(m);
                    meet[y * n + x] = Some(m);
                }
            }
        }
        let minimal = p.minimal_elements();
        let mut sus = Sus { base: p, top, join, meet, irreducibles: vec![], minimal, distributive: true };
        // Every interval sits inside some [a, 1] with a minimal, and
        // sublattices of distributive lattices are distributive.
        let all_ok = sus.minimal.iter().all(|&a| sus.members_distributive(&sus.base.up_set(a)));
        if !all_ok {
            if require_distributive {
                let (a, b) = sus.first_bad_interval().expect("some interval fails");
                return Err(SusError::IntervalNotDistributive(sus.name(a).into(), sus.name(b).into()));
            }
            sus.distributive = false;
        }
        sus.irreducibles = sus.compute_meet_irreducibles();
        Ok(sus)
    }

    /// Direct distributive law on a set closed under the tables' operations
    /// and bounded below.
    fn members_distributive(&self, members: &[usize]) -> bool {
        members.iter().all(|&x| {
            members.iter().all(|&y| {
                members.iter().all(|&z| {
                    let m = |u, v| self.meet(u, v).expect("bounded below");
                    m(x, self.join(y, z)) == self.join(m(x, y), m(x, z))
                })
            })
        })
    }

    fn first_bad_interval(&self) -> Option<(usize, usize)> {
        let n = self.len();
        (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|&(a, b)| self.leq(a, b)).find(|&(a, b)| {
            let view = self.base.interval(a, b).expect("a <= b");
            !self.members_distributive(view.members())
        })
    }

    fn compute_meet_irreducibles(&self) -> Vec<usize> {
        let n = self.len();
        (0..n)
            .filter(|&m| {
                (0..n).all(|p| {
                    (0..n).all(|q| match self.meet(p, q) {
                        Some(r) if r == m => p == m || q == m,
                        _ => true,
                    })
                })
            })
            .collect()
    }

    pub fn poset(&self) -> &Poset {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn name(&self, x: usize) -> &str {
        self.base.name(x)
    }

    pub fn top(&self) -> usize {
        self.top
    }

    /// The least element, when the semilattice is a lattice.
    pub fn bottom(&self) -> Option<usize> {
        self.base.bottom()
    }

    /// True when every pair has a meet.
    pub fn is_lattice(&self) -> bool {
        self.meet.iter().all(Option::is_some)
    }

    pub fn is_distributive(&self) -> bool {
        self.distributive
    }

    #[inline]
    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.base.leq(x, y)
    }

    #[inline]
    pub fn join(&self, x: usize, y: usize) -> usize {
        self.join[x * self.len() + y]
    }

    #[inline]
    pub fn meet(&self, x: usize, y: usize) -> Option<usize> {
        self.meet[x * self.len() + y]
    }

    /// Join of a nonempty set.
    pub fn join_all(&self, xs: impl IntoIterator<Item = usize>) -> Option<usize> {
        xs.into_iter().reduce(|acc, x| self.join(acc, x))
    }

    /// The meet-irreducible elements, top included.
    pub fn meet_irreducibles(&self) -> &[usize] {
        &self.irreducibles
    }

    pub fn is_meet_irreducible(&self, x: usize) -> bool {
        self.irreducibles.binary_search(&x).is_ok()
    }

    pub fn minimal_elements(&self) -> &[usize] {
        &self.minimal
    }

    /// `𝓜^x`: the meet-irreducibles above `x`.
    pub fn m_up(&self, x: usize) -> Vec<usize> {
        self.irreducibles.iter().copied().filter(|&m| self.leq(x, m)).collect()
    }

    /// Greatest lower bound of a nonempty set, by a left fold of binary meets.
    pub fn wedge(&self, xs: &[usize]) -> Result<usize, SusError> {
        let (&first, rest) = xs.split_first().ok_or(SusError::EmptySet)?;
        if self.base.lower_bounds(xs).is_empty() {
            return Err(SusError::NoLowerBound(label_set(&self.base, xs.iter().copied())));
        }
        Ok(rest
            .iter()
            .fold(first, |acc, &x| self.meet(acc, x).expect("pairwise meets exist below a common lower bound")))
    }

    /// `x⁺`: the meet of all meet-irreducibles strictly above `x`.
    pub fn x_plus(&self, x: usize) -> Result<usize, SusError> {
        if x == self.top {
            return Err(SusError::IsTop(self.name(x).into()));
        }
        if !self.is_meet_irreducible(x) {
            return Err(SusError::NotMeetIrreducible(self.name(x).into()));
        }
        let above: Vec<usize> = self.irreducibles.iter().copied().filter(|&m| self.base.lt(x, m)).collect();
        self.wedge(&above)
    }

    /// The principal filter `[a, 𝟏]` as its own semilattice, with the map
    /// from its indices back into `self`.
    pub fn principal_filter(&self, a: usize) -> (Sus, Vec<usize>) {
        let members = self.base.up_set(a);
        let sub = self.base.induced(&members);
        let sus = Sus::new(sub, false).expect("principal filters of a strong semilattice are lattices");
        (sus, members)
    }
}

/// The Boolean lattice of subsets of a `k`-set; labels are bit strings with
/// the highest coordinate first.
pub fn boolean_lattice(k: usize) -> Sus {
    let size = 1usize << k;
    let names: Vec<String> = (0..size).map(|m| if k == 0 { "1".to_string() } else { format!("{m:0k$b}") }).collect();
    let mut pairs = vec![];
    for m in 0..size {
        for bit in 0..k {
            if m & (1 << bit) == 0 {
                pairs.push((m, m | (1 << bit)));
            }
        }
    }
    let p = Poset::from_relation(names, &pairs).expect("subset order is acyclic");
    validate_sus(p).expect("Boolean lattices are distributive")
}

/// Every element is the meet of the meet-irreducibles above it.
pub fn check_wedge_mi(s: &Sus) -> VerificationItem {
    let failure = (0..s.len()).find_map(|x| {
        let ups = s.m_up(x);
        match s.wedge(&ups) {
            Ok(w) if w == x => None,
            Ok(w) => Some(format!("x={} but meet of M^x is {}", s.name(x), s.name(w))),
            Err(e) => Some(format!("x={}: {e}", s.name(x))),
        }
    });
    VerificationItem::from_first_failure("wedge_mi", failure)
}

/// The three parts of the `x⁺` lemma for every non-top meet-irreducible
/// `x`: (i) `x < x⁺`; (ii) `x ∨ z = x⁺ ∨ z` for meet-irreducible `z ≰ x`;
/// (iii) `x ∨ z = x⁺ ∨ z⁺` for non-top meet-irreducible `z` incomparable
/// to `x`.
///
/// Read with only `z ≠ x` as hypothesis, (ii) fails whenever `z < x` (on the
/// 3-chain: `m ∨ 0 = m` but `m⁺ ∨ 0 = 1`), and (iii) fails whenever `x` and
/// `z` are comparable. The argument for (ii) uses `x ∨ z > x` and the one
/// for (iii) applies (ii) in both directions, so those are the hypotheses
/// checked here. Pairs where only the unrestricted reading fails are
/// counted in a note.
pub fn check_xplus_lemma(s: &Sus) -> VerificationItem {
    let top = s.top();
    let mut failure = None;
    let mut outside = 0usize;
    let mut first_outside = None;
    'outer: for &x in s.meet_irreducibles() {
        if x == top {
            continue;
        }
        let xp = match s.x_plus(x) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(format!("x={}: {e}", s.name(x)));
                break;
            }
        };
        if !s.poset().lt(x, xp) {
            failure = Some(format!("(i) x={} x+={}", s.name(x), s.name(xp)));
            break;
        }
        for &z in s.meet_irreducibles() {
            if z == x {
                continue;
            }
            let xz = s.join(x, z);
            let ii = xz == s.join(xp, z);
            if s.leq(z, x) {
                if !ii {
                    outside += 1;
                    first_outside.get_or_insert_with(|| format!("(ii) x={} z={}", s.name(x), s.name(z)));
                }
            } else if !ii {
                failure = Some(format!("(ii) x={} z={}", s.name(x), s.name(z)));
                break 'outer;
            }
            if z != top {
                let zp = s.x_plus(z).expect("z is a non-top meet-irreducible");
                let iii = xz == s.join(xp, zp);
                if s.poset().comparable(x, z) {
                    if !iii {
                        outside += 1;
                        first_outside.get_or_insert_with(|| format!("(iii) x={} z={}", s.name(x), s.name(z)));
                    }
                } else if !iii {
                    failure = Some(format!("(iii) x={} z={}", s.name(x), s.name(z)));
                    break 'outer;
                }
            }
        }
    }
    let item = VerificationItem::from_first_failure("xplus_lemma", failure);
    match first_outside {
        Some(w) => {
            item.with_note(format!("unrestricted z != x reading fails on {outside} comparable pair(s), first {w}"))
        }
        None => item,
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::report::Outcome;

    #[test]
    fn v3_meets_only_on_comparable_pairs() {
        let s = v3();
        let (a, b, t) = (id(&s, "a"), id(&s, "b"), id(&s, "1"));
        assert_eq!(s.meet(a, b), None);
        assert_eq!(s.meet(a, t), Some(a));
        assert_eq!(s.join(a, b), t);
        assert!(!s.is_lattice());
    }

    #[test]
    fn m3_and_n5_rejected() {
        let m3 = poset(
            &["0", "a", "b", "c", "1"],
            &[("0", "a"), ("0", "b"), ("0", "c"), ("a", "1"), ("b", "1"), ("c", "1")],
        );
        assert_eq!(validate_sus(m3.clone()).unwrap_err(), SusError::IntervalNotDistributive("0".into(), "1".into()));
        assert!(!validate_strong(m3).unwrap().is_distributive());
        let n5 = poset(&["0", "a", "c", "b", "1"], &[("0", "a"), ("a", "c"), ("c", "1"), ("0", "b"), ("b", "1")]);
        assert!(matches!(validate_sus(n5), Err(SusError::IntervalNotDistributive(..))));
    }

    #[test]
    fn validation_errors() {
        let anti = poset(&["x", "y"], &[]);
        assert_eq!(validate_sus(anti).unwrap_err(), SusError::NoTop);
        // x, y below both p and q, which are below 1: join of x,y missing
        let bowtie = poset(
            &["x", "y", "p", "q", "1"],
            &[("x", "p"), ("x", "q"), ("y", "p"), ("y", "q"), ("p", "1"), ("q", "1")],
        );
        assert_eq!(validate_sus(bowtie).unwrap_err(), SusError::JoinMissing("x".into(), "y".into()));
        // Finite posets with all joins always satisfy the strong condition:
        // the join of the common lower bounds is their glb.
        let with_meet = poset(
            &["x", "y", "j", "p", "q", "1"],
            &[("x", "j"), ("y", "j"), ("j", "p"), ("j", "q"), ("p", "1"), ("q", "1")],
        );
        let s = validate_strong(with_meet).unwrap();
        assert_eq!(s.meet(3, 4), Some(2));
    }

    #[test]
    fn one_element_sus() {
        let s = validate_sus(poset(&["1"], &[])).unwrap();
        assert_eq!(s.meet_irreducibles(), &[0]);
        assert_eq!(s.minimal_elements(), &[0]);
        assert_eq!(check_wedge_mi(&s).outcome, Outcome::Pass);
    }

    #[test]
    fn meet_irreducible_examples() {
        let b = b2();
        assert_eq!(b.meet_irreducibles(), idx(&b, &["a", "b", "1"]).as_slice());
        let v = v3();
        assert_eq!(v.meet_irreducibles(), idx(&v, &["a", "b", "1"]).as_slice());
        let c = chain3();
        assert_eq!(c.meet_irreducibles(), idx(&c, &["0", "m", "1"]).as_slice());
    }

    #[test]
    fn m_up_examples() {
        let b = b2();
        assert_eq!(b.m_up(id(&b, "0")), idx(&b, &["a", "b", "1"]));
        assert_eq!(b.m_up(b.top()), vec![b.top()]);
        let v = v3();
        assert_eq!(v.m_up(id(&v, "a")), idx(&v, &["a", "1"]));
    }

    #[test]
    fn wedge_examples() {
        let b = b2();
        assert_eq!(b.wedge(&idx(&b, &["a", "b"])), Ok(id(&b, "0")));
        assert_eq!(b.wedge(&idx(&b, &["a"])), Ok(id(&b, "a")));
        let v = v3();
        assert!(matches!(v.wedge(&idx(&v, &["a", "b"])), Err(SusError::NoLowerBound(_))));
        assert_eq!(v.wedge(&[]), Err(SusError::EmptySet));
    }

    #[test]
    fn x_plus_examples() {
        let b = b2();
        assert_eq!(b.x_plus(id(&b, "a")), Ok(b.top()));
        assert_eq!(b.x_plus(b.top()), Err(SusError::IsTop("1".into())));
        assert_eq!(b.x_plus(id(&b, "0")), Err(SusError::NotMeetIrreducible("0".into())));
        let c = chain3();
        assert_eq!(c.x_plus(id(&c, "0")), Ok(id(&c, "m")));
    }

    #[test]
    fn lemma_checks_on_named_instances() {
        for s in [b2(), v3(), k4(), chain3(), b3()] {
            assert_eq!(check_wedge_mi(&s).outcome, Outcome::Pass);
            assert_eq!(check_xplus_lemma(&s).outcome, Outcome::Pass);
        }
    }

    #[test]
    fn xplus_unrestricted_reading_fails_on_chain() {
        let c = chain3();
        let (z, m) = (id(&c, "0"), id(&c, "m"));
        let mp = c.x_plus(m).unwrap();
        assert_eq!(c.join(m, z), m);
        assert_eq!(c.join(mp, z), c.top());
        let item = check_xplus_lemma(&c);
        assert_eq!(item.outcome, Outcome::Pass);
        assert_eq!(item.notes.len(), 1);
    }

    #[test]
    fn b2_xplus_joins() {
        let b = b2();
        let (a, bb) = (id(&b, "a"), id(&b, "b"));
        let ap = b.x_plus(a).unwrap();
        assert_eq!(b.join(a, bb), b.top());
        assert_eq!(b.join(ap, bb), b.top());
        let c = chain3();
        let (z, m) = (id(&c, "0"), id(&c, "m"));
        assert_eq!(c.join(z, m), m);
        assert_eq!(c.join(c.x_plus(z).unwrap(), m), m);
    }

    #[test]
    fn principal_filter_of_v3() {
        let v = v3();
        let (sub, map) = v.principal_filter(id(&v, "a"));
        assert_eq!(sub.len(), 2);
        assert_eq!(map, idx(&v, &["a", "1"]));
        assert!(sub.is_lattice());
    }
}
