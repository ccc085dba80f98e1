//! The filter-lattice envelope: order filters of the meet-irreducibles
//! under reverse inclusion, the embedding `ν(x) = 𝓜^x`, the localizations
//! `f_a`, and the extension `φ̂(F) = ⋀φ[F]` of structure-preserving maps.

use std::collections::HashMap;

use thiserror::Error;

use crate::order::Poset;
use crate::report::VerificationItem;
use crate::semilattice::{validate_sus, Sus};

/// Default bound on `|M|` before the envelope is materialized.
pub const DEFAULT_SIZE_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BirkhoffError {
    #[error("SizeCap: {irreducibles} meet-irreducibles exceeds the cap of {cap}")]
    SizeCap { irreducibles: usize, cap: usize },
    #[error("NotMinimal({0})")]
    NotMinimal(String),
    #[error("FlagsNotVerified({0})")]
    FlagsNotVerified(String),
    #[error("CodomainNotLattice")]
    CodomainNotLattice,
    #[error("MapShape: expected {expected} images, got {got}")]
    MapShape { expected: usize, got: usize },
}

/// A set of meet-irreducibles, as a bit mask over positions in `M`.
pub type FilterBits = u64;

/// The envelope `𝒟`: nonempty up-sets of `⟨M, ≤⟩`, ordered by reverse
/// inclusion. Meet is union, join is intersection; `M` itself is the
/// bottom and `{𝟏}` the top.
#[derive(Debug, Clone)]
pub struct FilterLattice<'s> {
    source: &'s Sus,
    irreducibles: Vec<usize>,
    position: Vec<Option<usize>>,
    filters: Vec<FilterBits>,
    index: HashMap<FilterBits, usize>,
    nu_map: Vec<usize>,
}

pub fn build_envelope(s: &Sus) -> Result<FilterLattice<'_>, BirkhoffError> {
    build_envelope_capped(s, DEFAULT_SIZE_CAP)
}

pub fn build_envelope_capped(s: &Sus, cap: usize) -> Result<FilterLattice<'_>, BirkhoffError> {
    let irreducibles = s.meet_irreducibles().to_vec();
    let cap = cap.min(63);
    if irreducibles.len() > cap {
        return Err(BirkhoffError::SizeCap { irreducibles: irreducibles.len(), cap });
    }
    let mut position = vec![None; s.len()];
    for (i, &m) in irreducibles.iter().enumerate() {
        position[m] = Some(i);
    }
    // Top-down order, so everything above an element is decided first.
    let coheight = s.poset().coheights().expect("a Sus has a top");
    let mut order: Vec<usize> = (0..irreducibles.len()).collect();
    order.sort_by_key(|&i| (coheight[irreducibles[i]], i));
    let above: Vec<FilterBits> =
        (0..irreducibles.len())
            .map(|i| {
                irreducibles.iter().enumerate().fold(0, |acc, (j, &m)| {
                    if s.poset().lt(irreducibles[i], m) {
                        acc | (1 << j)
                    } else {
                        acc
                    }
                })
            })
            .collect();
    let mut filters = Vec::new();
    enumerate_up_sets(&order, &above, 0, 0, &mut filters);
    filters.retain(|&f| f != 0);
    filters.sort_by_key(|&f| (std::cmp::Reverse(f.count_ones()), f));
    let index = filters.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let mut e = FilterLattice { source: s, irreducibles, position, filters, index, nu_map: vec![] };
    e.nu_map = (0..s.len()).map(|x| e.index[&e.m_up_bits(x)]).collect();
    Ok(e)
}

fn enumerate_up_sets(
    order: &[usize],
    above: &[FilterBits],
    depth: usize,
    current: FilterBits,
    out: &mut Vec<FilterBits>,
) {
    let Some(&i) = order.get(depth) else {
        out.push(current);
        return;
    };
    enumerate_up_sets(order, above, depth + 1, current, out);
    if above[i] & !current == 0 {
        enumerate_up_sets(order, above, depth + 1, current | (1 << i), out);
    }
}

impl<'s> FilterLattice<'s> {
    pub fn source(&self) -> &'s Sus {
        self.source
    }

    /// Meet-irreducibles of the source; bit `i` of a filter is `irreducibles()[i]`.
    pub fn irreducibles(&self) -> &[usize] {
        &self.irreducibles
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn filters(&self) -> &[FilterBits] {
        &self.filters
    }

    pub fn bits(&self, f: usize) -> FilterBits {
        self.filters[f]
    }

    pub fn index_of(&self, bits: FilterBits) -> Option<usize> {
        self.index.get(&bits).copied()
    }

    /// Source elements in filter `f`, increasing.
    pub fn members(&self, f: usize) -> Vec<usize> {
        self.elements_of(self.filters[f])
    }

    pub fn elements_of(&self, bits: FilterBits) -> Vec<usize> {
        self.irreducibles.iter().enumerate().filter(|&(i, _)| bits & (1 << i) != 0).map(|(_, &m)| m).collect()
    }

    /// Bit mask of `𝓜^x`.
    pub fn m_up_bits(&self, x: usize) -> FilterBits {
        self.irreducibles.iter().enumerate().fold(
            0,
            |acc, (i, &m)| {
                if self.source.leq(x, m) {
                    acc | (1 << i)
                } else {
                    acc
                }
            },
        )
    }

    /// `F_X = ⋃ 𝓜^x`, the filter generated by a nonempty set of source elements.
    pub fn generated(&self, xs: &[usize]) -> Option<usize> {
        let bits = xs.iter().fold(0, |acc, &x| acc | self.m_up_bits(x));
        self.index_of(bits)
    }

    /// Position of `m` in the irreducible list, if it is meet-irreducible.
    pub fn bit_of(&self, m: usize) -> Option<usize> {
        self.position[m]
    }

    /// `F ≤ G` in `𝒟`, i.e. `F ⊇ G`.
    pub fn leq(&self, f: usize, g: usize) -> bool {
        let (a, b) = (self.filters[f], self.filters[g]);
        a & b == b
    }

    /// Join in `𝒟` (intersection).
    pub fn join(&self, f: usize, g: usize) -> usize {
        self.index[&(self.filters[f] & self.filters[g])]
    }

    /// Meet in `𝒟` (union).
    pub fn meet(&self, f: usize, g: usize) -> usize {
        self.index[&(self.filters[f] | self.filters[g])]
    }

    /// The least filter, all of `M`.
    pub fn bottom(&self) -> usize {
        0
    }

    /// The greatest filter, `{𝟏}`.
    pub fn top(&self) -> usize {
        self.nu_map[self.source.top()]
    }

    pub fn nu(&self, x: usize) -> usize {
        self.nu_map[x]
    }

    pub fn nu_map(&self) -> &[usize] {
        &self.nu_map
    }

    /// `f_a(F) = ⋀(F ∩ [a, 𝟏])` for a minimal element `a`.
    pub fn f_a(&self, a: usize, f: usize) -> Result<usize, BirkhoffError> {
        if !self.source.minimal_elements().contains(&a) {
            return Err(BirkhoffError::NotMinimal(self.source.name(a).into()));
        }
        let above_a: Vec<usize> = self.members(f).into_iter().filter(|&m| self.source.leq(a, m)).collect();
        Ok(self.source.wedge(&above_a).expect("a bounds F ∩ [a, 1], which contains 1"))
    }

    pub fn label(&self, f: usize) -> String {
        let names: Vec<&str> = self.members(f).into_iter().map(|m| self.source.name(m)).collect();
        format!("{{{}}}", names.join(","))
    }

    /// `𝒟` as a poset with filter labels, in filter index order.
    pub fn to_poset(&self) -> Poset {
        let n = self.len();
        let names = (0..n).map(|f| self.label(f)).collect();
        let mut leq = vec![false; n * n];
        for f in 0..n {
            for g in 0..n {
                leq[f * n + g] = self.leq(f, g);
            }
        }
        Poset::from_closed(names, leq)
    }

    /// `𝒟` as a validated semilattice. Index `f` of the result is filter `f`.
    pub fn to_sus(&self) -> Sus {
        validate_sus(self.to_poset()).expect("the filter lattice is a distributive lattice")
    }
}

/// A map between semilattices together with which structure it was
/// checked to preserve.
#[derive(Debug, Clone)]
pub struct SemiHom<'a> {
    domain: &'a Sus,
    codomain: &'a Sus,
    map: Vec<usize>,
    preserves_join: bool,
    preserves_top: bool,
    preserves_extant_meets: bool,
}

impl<'a> SemiHom<'a> {
    /// Wraps `map` and checks each preservation property over every pair.
    pub fn new(domain: &'a Sus, codomain: &'a Sus, map: Vec<usize>) -> Result<Self, BirkhoffError> {
        if map.len() != domain.len() || map.iter().any(|&y| y >= codomain.len()) {
            return Err(BirkhoffError::MapShape { expected: domain.len(), got: map.len() });
        }
        let n = domain.len();
        let preserves_join = (0..n).all(|x| (0..n).all(|y| map[domain.join(x, y)] == codomain.join(map[x], map[y])));
        let preserves_top = map[domain.top()] == codomain.top();
        let preserves_extant_meets = (0..n).all(|x| {
            (0..n).all(|y| match domain.meet(x, y) {
                Some(m) => codomain.meet(map[x], map[y]) == Some(map[m]),
                None => true,
            })
        });
        Ok(SemiHom { domain, codomain, map, preserves_join, preserves_top, preserves_extant_meets })
    }

    pub fn domain(&self) -> &'a Sus {
        self.domain
    }

    pub fn codomain(&self) -> &'a Sus {
        self.codomain
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn preserves_join(&self) -> bool {
        self.preserves_join
    }

    pub fn preserves_top(&self) -> bool {
        self.preserves_top
    }

    pub fn preserves_extant_meets(&self) -> bool {
        self.preserves_extant_meets
    }

    pub fn verified(&self) -> bool {
        self.preserves_join && self.preserves_top && self.preserves_extant_meets
    }

    pub(crate) fn require_verified(&self) -> Result<(), BirkhoffError> {
        let mut missing = vec![];
        if !self.preserves_join {
            missing.push("join");
        }
        if !self.preserves_top {
            missing.push("top");
        }
        if !self.preserves_extant_meets {
            missing.push("meets");
        }
        if missing.is_empty() {
            Ok(())
        } else {
            Err(BirkhoffError::FlagsNotVerified(missing.join(",")))
        }
    }
}

/// `φ̂(F) = ⋀ φ[F]`, indexed by filter.
pub fn extend_hom(e: &FilterLattice<'_>, h: &SemiHom<'_>) -> Result<Vec<usize>, BirkhoffError> {
    h.require_verified()?;
    let s = h.codomain();
    if !s.is_lattice() {
        return Err(BirkhoffError::CodomainNotLattice);
    }
    Ok((0..e.len())
        .map(|f| {
            e.members(f)
                .into_iter()
                .map(|m| h.apply(m))
                .reduce(|acc, y| s.meet(acc, y).expect("codomain is a lattice"))
                .expect("filters are nonempty")
        })
        .collect())
}

/// Outcome of the universal-property check for one map.
#[derive(Debug, Clone)]
pub struct UniversalCheck {
    pub item: VerificationItem,
    /// Whether `φ̂` sends the bottom filter to the codomain's bottom; not
    /// required by the property.
    pub preserves_bottom: bool,
}

pub fn check_universal(e: &FilterLattice<'_>, h: &SemiHom<'_>) -> Result<UniversalCheck, BirkhoffError> {
    const NAME: &str = "universal";
    let ext = extend_hom(e, h)?;
    let s = h.codomain();
    let src = e.source();
    let first_failure = (|| {
        for x in 0..src.len() {
            if ext[e.nu(x)] != h.apply(x) {
                return Some(format!("phi_hat(nu({})) != phi({})", src.name(x), src.name(x)));
            }
        }
        for f in 0..e.len() {
            for g in 0..e.len() {
                if ext[e.join(f, g)] != s.join(ext[f], ext[g]) {
                    return Some(format!("join {} {}", e.label(f), e.label(g)));
                }
                if Some(ext[e.meet(f, g)]) != s.meet(ext[f], ext[g]) {
                    return Some(format!("meet {} {}", e.label(f), e.label(g)));
                }
            }
        }
        if ext[e.top()] != s.top() {
            return Some("top not preserved".to_string());
        }
        // every filter is the 𝒟-meet of the ν(m), m ∈ F, so any
        // homomorphism agreeing with φ on ν[L] is determined
        for f in 0..e.len() {
            let via_nu =
                e.members(f).into_iter().map(|m| ext[e.nu(m)]).reduce(|acc, y| s.meet(acc, y).expect("lattice"));
            if via_nu != Some(ext[f]) {
                return Some(format!("uniqueness at {}", e.label(f)));
            }
            let as_meet = e.members(f).into_iter().map(|m| e.nu(m)).reduce(|acc, g| e.meet(acc, g));
            if as_meet != Some(f) {
                return Some(format!("{} is not a meet of nu-images", e.label(f)));
            }
        }
        None
    })();
    let preserves_bottom = s.bottom() == Some(ext[e.bottom()]);
    let mut item = VerificationItem::from_first_failure(NAME, first_failure);
    if !preserves_bottom {
        item = item.with_note("bottom filter not sent to codomain bottom");
    }
    Ok(UniversalCheck { item, preserves_bottom })
}

/// ν is an order embedding preserving joins, top, and existing meets, with
/// image upward closed in `𝒟`.
pub fn check_embedding(e: &FilterLattice<'_>) -> VerificationItem {
    let s = e.source();
    let n = s.len();
    let failure = (|| {
        let mut seen = vec![None; e.len()];
        for x in 0..n {
            if e.bits(e.nu(x)) != e.m_up_bits(x) {
                return Some(format!("nu({}) != M^x", s.name(x)));
            }
            if let Some(y) = seen[e.nu(x)].replace(x) {
                return Some(format!("nu({}) = nu({})", s.name(y), s.name(x)));
            }
        }
        for x in 0..n {
            for y in 0..n {
                if s.leq(x, y) != e.leq(e.nu(x), e.nu(y)) {
                    return Some(format!("order at ({}, {})", s.name(x), s.name(y)));
                }
                if e.nu(s.join(x, y)) != e.join(e.nu(x), e.nu(y)) {
                    return Some(format!("join at ({}, {})", s.name(x), s.name(y)));
                }
                if let Some(m) = s.meet(x, y) {
                    if e.nu(m) != e.meet(e.nu(x), e.nu(y)) {
                        return Some(format!("meet at ({}, {})", s.name(x), s.name(y)));
                    }
                }
            }
        }
        if e.bits(e.nu(s.top())) != 1 << e.bit_of(s.top()).expect("top is in M") {
            return Some("nu(1) != {1}".into());
        }
        // upward closed: G ≥ ν(x) in 𝒟 means G ⊆ ν(x)
        for x in 0..n {
            for (g, preimage) in seen.iter().enumerate() {
                if e.leq(e.nu(x), g) && preimage.is_none() {
                    return Some(format!("{} above nu({}) has no preimage", e.label(g), s.name(x)));
                }
            }
        }
        None
    })();
    VerificationItem::from_first_failure("embedding", failure)
}

/// `𝒟` validates as a distributive lattice with `M` at the bottom and
/// `{𝟏}` at the top.
pub fn check_envelope_lattice(e: &FilterLattice<'_>) -> VerificationItem {
    let failure = match validate_sus(e.to_poset()) {
        Err(err) => Some(err.to_string()),
        Ok(d) if !d.is_lattice() => Some("filter lattice lacks a bottom".into()),
        Ok(d) if d.bottom() != Some(e.bottom()) || d.top() != e.top() => Some("bounds are not M and {1}".into()),
        Ok(_) => None,
    };
    VerificationItem::from_first_failure("envelope_lattice", failure)
}

/// The two `f_a` identities, the membership lemma, and `f_a(ν(x)) = x` for
/// `x ≥ a`, over every minimal `a` and every pair of filters.
pub fn check_fa_lemmas(e: &FilterLattice<'_>) -> VerificationItem {
    let s = e.source();
    let failure = (|| {
        for &a in s.minimal_elements() {
            let fa: Vec<usize> = (0..e.len()).map(|f| e.f_a(a, f).expect("a minimal")).collect();
            for f in 0..e.len() {
                for &p in e.irreducibles() {
                    if s.leq(fa[f], p) && !e.members(f).contains(&p) {
                        return Some(format!("a={} p={} not in {}", s.name(a), s.name(p), e.label(f)));
                    }
                }
                for g in 0..e.len() {
                    if Some(fa[e.meet(f, g)]) != s.meet(fa[f], fa[g]) {
                        return Some(format!("f_a(F∪G) a={} F={} G={}", s.name(a), e.label(f), e.label(g)));
                    }
                    if fa[e.join(f, g)] != s.join(fa[f], fa[g]) {
                        return Some(format!("f_a(F∩G) a={} F={} G={}", s.name(a), e.label(f), e.label(g)));
                    }
                }
            }
            for x in 0..s.len() {
                if s.leq(a, x) && fa[e.nu(x)] != x {
                    return Some(format!("f_a(nu(x)) a={} x={}", s.name(a), s.name(x)));
                }
            }
        }
        None
    })();
    VerificationItem::from_first_failure("fa_lemmas", failure)
}

/// `x ↦ [x ≰ p]` into the two-element chain; preserves joins, top, and
/// existing meets when `p` is a non-top meet-irreducible of a distributive
/// semilattice.
pub fn coordinate_map(s: &Sus, p: usize) -> impl Fn(usize) -> bool + '_ {
    move |x| !s.leq(x, p)
}
