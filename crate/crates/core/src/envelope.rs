//! The envelope built inside the valuation ring, and its comparison with
//! the filter lattice.
//!
//! A set `X ⊆ L` gets the virtual meet
//!
//! ```text
//! ⋀X = Σ_{∅ ≠ B ⊆ min X} (−1)^{|B|+1} ι(⋁B)
//! ```
//!
//! in `V(L)`. The range of this operation is paired with `𝒟` through
//! `X ↦ F_X = ⋃_{x∈X} 𝓜^x`, and the pairing is checked to be an
//! isomorphism.
//!
//! The sum runs over every nonempty `B`. Dropping the full set `B = min X`
//! instead (a proper-subset convention) gives `0` on singletons and so does
//! not reproduce `ι`; [`meet_in_v_proper_subsets`] implements that variant
//! only so the difference can be tested.

use std::collections::HashMap;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::birkhoff::FilterLattice;
use crate::report::VerificationItem;
use crate::semilattice::Sus;
use crate::vring::{
    build_vring, induced_hom, is_valuation, prime_filter_valuations, valuation_from_basis_values, FreeVector,
    GroupValuation, ValuationRing,
};

/// Largest filter accepted by [`j_of`].
pub const J_OF_CAP: usize = 20;
/// Largest set for which explicit subset enumeration is attempted.
pub const SUBSET_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvelopeError {
    #[error("PairingFailure({0})")]
    PairingFailure(String),
    #[error("TooLarge: {size} exceeds the cap of {cap}")]
    TooLarge { size: usize, cap: usize },
}

pub fn minimals(s: &Sus, xs: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = xs.iter().copied().filter(|&x| !xs.iter().any(|&y| y != x && s.leq(y, x))).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// `Σ_{∅ ≠ B ⊆ xs} (−1)^{|B|+1} e_{⋁B}` without reduction, by tracking
/// the signed multiplicity of each join value as elements are added.
fn signed_join_sum(s: &Sus, xs: &[usize]) -> FreeVector {
    let n = s.len();
    let mut counts = vec![BigInt::from(0); n];
    for &h in xs {
        let mut next = counts.clone();
        for (v, c) in counts.iter().enumerate() {
            if *c != BigInt::from(0) {
                next[s.join(v, h)] -= c;
            }
        }
        next[h] += 1;
        counts = next;
    }
    FreeVector::from_coeffs(counts)
}

/// `ι(x) + ι(y) − ι(x∨y)`.
pub fn pair_meet_v(r: &ValuationRing<'_>, x: usize, y: usize) -> FreeVector {
    let s = r.source();
    let mut v = FreeVector::zero(s.len());
    v.add_term(x, 1);
    v.add_term(y, 1);
    v.add_term(s.join(x, y), -1);
    r.canonical(&v)
}

/// The virtual meet of a nonempty set, summed over subsets of its minimal
/// elements.
pub fn meet_in_v(r: &ValuationRing<'_>, xs: &[usize]) -> FreeVector {
    let s = r.source();
    r.canonical(&signed_join_sum(s, &minimals(s, xs)))
}

/// Inclusion–exclusion over every nonempty subset of `xs` itself, by
/// explicit enumeration.
pub fn inclusion_exclusion(r: &ValuationRing<'_>, xs: &[usize]) -> Result<FreeVector, EnvelopeError> {
    subset_sum(r, xs, |_| true)
}

/// The proper-subset convention: nonempty `B ⊂ min X` with `B ≠ min X`.
pub fn meet_in_v_proper_subsets(r: &ValuationRing<'_>, xs: &[usize]) -> Result<FreeVector, EnvelopeError> {
    let mins = minimals(r.source(), xs);
    let full = (1u64 << mins.len()) - 1;
    subset_sum(r, &mins, |mask| mask != full)
}

fn subset_sum(r: &ValuationRing<'_>, xs: &[usize], keep: impl Fn(u64) -> bool) -> Result<FreeVector, EnvelopeError> {
    if xs.len() > SUBSET_CAP {
        return Err(EnvelopeError::TooLarge { size: xs.len(), cap: SUBSET_CAP });
    }
    let s = r.source();
    let mut v = FreeVector::zero(s.len());
    for mask in 1u64..(1 << xs.len()) {
        if !keep(mask) {
            continue;
        }
        let join = s
            .join_all(xs.iter().enumerate().filter(|&(i, _)| mask & (1 << i) != 0).map(|(_, &x)| x))
            .expect("nonempty");
        v.add_term(join, if mask.count_ones() % 2 == 1 { 1 } else { -1 });
    }
    Ok(r.canonical(&v))
}

/// `i(F) = Σ_{∅ ≠ B ⊆ A} (−1)^{|B|+1} ι(⋁_{b∈B} f_b(F))` over the minimal
/// elements `A`.
pub fn i_of(r: &ValuationRing<'_>, e: &FilterLattice<'_>, f: usize) -> FreeVector {
    let s = r.source();
    let locals: Vec<usize> = s.minimal_elements().iter().map(|&a| e.f_a(a, f).expect("a is minimal")).collect();
    r.canonical(&signed_join_sum(s, &locals))
}

/// `j(F) = Σ_{∅ ≠ H ⊆ F} (−1)^{|H|+1} ι(⋁H)`.
pub fn j_of(r: &ValuationRing<'_>, e: &FilterLattice<'_>, f: usize) -> Result<FreeVector, EnvelopeError> {
    let members = e.members(f);
    if members.len() > J_OF_CAP {
        return Err(EnvelopeError::TooLarge { size: members.len(), cap: J_OF_CAP });
    }
    Ok(r.canonical(&signed_join_sum(r.source(), &members)))
}

/// Range of the virtual meet, paired with the filters of `𝒟`.
#[derive(Debug, Clone)]
pub struct VEnvelope {
    elements: Vec<FreeVector>,
    filter_of: Vec<usize>,
    preimage: Vec<Option<usize>>,
}

impl VEnvelope {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[FreeVector] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &FreeVector {
        &self.elements[i]
    }

    /// Filter of `𝒟` represented by element `i`.
    pub fn filter_of(&self, i: usize) -> usize {
        self.filter_of[i]
    }

    /// The source element `x` with `ι(x)` equal to element `i`, if any.
    pub fn preimage(&self, i: usize) -> Option<usize> {
        self.preimage[i]
    }

    pub fn index_of_filter(&self, f: usize) -> Option<usize> {
        self.filter_of.iter().position(|&g| g == f)
    }

    /// Elements with no preimage under `ι`.
    pub fn new_elements(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.preimage[i].is_none())
    }
}

/// Every nonempty antichain of the source, in a fixed order.
fn antichains(s: &Sus) -> Vec<Vec<usize>> {
    fn go(s: &Sus, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for x in start..s.len() {
            if current.iter().all(|&y| !s.poset().comparable(x, y)) {
                current.push(x);
                out.push(current.clone());
                go(s, x + 1, current, out);
                current.pop();
            }
        }
    }
    let mut out = vec![];
    go(s, 0, &mut vec![], &mut out);
    out
}

/// Enumerates `⋀X` over all nonempty antichains `X` (every set has the
/// same virtual meet as its minimal elements) and pairs each value with
/// `F_X`. Fails if two sets with the same filter get different values,
/// two filters share a value, or some filter is missed.
pub fn build_venvelope(r: &ValuationRing<'_>, e: &FilterLattice<'_>) -> Result<VEnvelope, EnvelopeError> {
    let s = r.source();
    let mut by_filter: Vec<Option<FreeVector>> = vec![None; e.len()];
    for x in antichains(s) {
        let value = meet_in_v(r, &x);
        let f = e.generated(&x).expect("a union of filters is a filter");
        match &by_filter[f] {
            Some(prev) if *prev != value => {
                return Err(EnvelopeError::PairingFailure(format!(
                    "{} has two values {} and {}",
                    e.label(f),
                    r.display(prev),
                    r.display(&value)
                )))
            }
            Some(_) => {}
            None => by_filter[f] = Some(value),
        }
    }
    let mut owner: HashMap<FreeVector, usize> = HashMap::new();
    let mut values = Vec::with_capacity(e.len());
    for (f, v) in by_filter.into_iter().enumerate() {
        let v = v.ok_or_else(|| EnvelopeError::PairingFailure(format!("{} is not hit", e.label(f))))?;
        if let Some(g) = owner.insert(v.clone(), f) {
            return Err(EnvelopeError::PairingFailure(format!(
                "{} and {} share the value {}",
                e.label(g),
                e.label(f),
                r.display(&v)
            )));
        }
        values.push(v);
    }
    // ι(L) first in source order, then the new elements in filter order.
    let mut order: Vec<usize> = (0..s.len()).map(|x| e.nu(x)).collect();
    let rest: Vec<usize> = (0..e.len()).filter(|f| !order.contains(f)).collect();
    order.extend(rest);
    let preimage = order.iter().map(|&f| (0..s.len()).find(|&x| e.nu(x) == f)).collect();
    Ok(VEnvelope { elements: order.iter().map(|&f| values[f].clone()).collect(), filter_of: order, preimage })
}

/// Inclusion–exclusion against the meet table: for every nonempty
/// `X ⊆ L` with a lower bound, the full subset sum equals `ι(⋀X)`; for
/// every `X`, the sum over `min X` agrees with the full sum.
pub fn check_inclusion_exclusion(r: &ValuationRing<'_>) -> VerificationItem {
    let s = r.source();
    let n = s.len();
    let max_size = if n <= 12 { n } else { 3 };
    let failure = subsets_up_to(n, max_size).into_iter().find_map(|xs| {
        let full = match inclusion_exclusion(r, &xs) {
            Ok(v) => v,
            Err(e) => return Some(e.to_string()),
        };
        let label = crate::order::label_set(s.poset(), xs.iter().copied());
        if let Ok(g) = s.wedge(&xs) {
            if full != *r.iota(g) {
                return Some(format!("X={label}: sum {} but glb {}", r.display(&full), s.name(g)));
            }
        }
        if meet_in_v(r, &xs) != full {
            return Some(format!("X={label}: minimal-element sum differs"));
        }
        None
    });
    let mut item = VerificationItem::from_first_failure("inclusion_exclusion", failure);
    if max_size < n {
        item = item.with_note(format!("subsets capped at size {max_size}"));
    }
    item
}

/// The implemented nonempty-subset convention reproduces `ι` on singletons
/// and on every existing glb; the proper-subset convention is evaluated on
/// the same sets and its mismatches are counted in a note.
pub fn check_meet_convention(r: &ValuationRing<'_>) -> VerificationItem {
    let s = r.source();
    let n = s.len();
    let max_size = if n <= 12 { n } else { 3 };
    let mut failure = None;
    let mut literal_failures = 0usize;
    let mut checked = 0usize;
    for xs in subsets_up_to(n, max_size) {
        let Ok(g) = s.wedge(&xs) else { continue };
        checked += 1;
        if failure.is_none() && meet_in_v(r, &xs) != *r.iota(g) {
            failure = Some(format!("X={} glb {}", crate::order::label_set(s.poset(), xs.iter().copied()), s.name(g)));
        }
        match meet_in_v_proper_subsets(r, &xs) {
            Ok(v) if v == *r.iota(g) => {}
            _ => literal_failures += 1,
        }
    }
    VerificationItem::from_first_failure("meet_convention", failure).with_note(format!(
        "convention: nonempty B ⊆ min X; proper-subset convention disagrees on {literal_failures} of {checked} lower-bounded sets"
    ))
}

fn subsets_up_to(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, max: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for x in start..n {
            cur.push(x);
            out.push(cur.clone());
            if cur.len() < max {
                go(n, max, x + 1, cur, out);
            }
            cur.pop();
        }
    }
    let mut out = vec![];
    if max_size > 0 {
        go(n, max_size, 0, &mut vec![], &mut out);
    }
    out
}

/// Number of random valuations tried in each direction by
/// [`check_equivalence`].
pub const RANDOM_VALUATIONS: usize = 4;

/// The valuation-ring envelope coincides with `𝒟`:
///
/// 1. `i(F) = j(F) = ⋀F` for every filter;
/// 2. the virtual meets pair bijectively with the filters;
/// 3. the pairing turns the virtual meet of a union into the meet of `𝒟`
///    and the order `u ≤ w ⟺ u ∧ w = u` into reverse inclusion;
/// 4. `rank V(L) = rank V(𝒟) = |M|`;
/// 5. the meet-irreducibles of `𝒟` are exactly the `ν(m)`;
/// 6. valuations on `L` lift through `i` to valuations on `𝒟` restricting
///    back to themselves, and valuations on `𝒟` restrict through `ν` and
///    lift back unchanged.
pub fn check_equivalence(r: &ValuationRing<'_>, e: &FilterLattice<'_>, seed: u64) -> VerificationItem {
    const NAME: &str = "equivalence";
    let s = r.source();
    let fail = |part: u8, msg: String| VerificationItem::fail(NAME, format!("({part}) {msg}"));

    // (1)
    let mut meets = Vec::with_capacity(e.len());
    for f in 0..e.len() {
        let via_meet = meet_in_v(r, &e.members(f));
        let via_i = i_of(r, e, f);
        if via_i != via_meet {
            return fail(1, format!("i({}) = {} but meet {}", e.label(f), r.display(&via_i), r.display(&via_meet)));
        }
        match j_of(r, e, f) {
            Ok(j) if j == via_meet => {}
            Ok(j) => return fail(1, format!("j({}) = {}", e.label(f), r.display(&j))),
            Err(err) => return fail(1, err.to_string()),
        }
        meets.push(via_meet);
    }
    // (2)
    let env = match build_venvelope(r, e) {
        Ok(env) => env,
        Err(err) => return fail(2, err.to_string()),
    };
    if env.len() != e.len() {
        return fail(2, format!("{} values for {} filters", env.len(), e.len()));
    }
    for i in 0..env.len() {
        if *env.element(i) != meets[env.filter_of(i)] {
            return fail(2, format!("pairing disagrees at {}", e.label(env.filter_of(i))));
        }
        if let Some(x) = env.preimage(i) {
            if env.element(i) != r.iota(x) {
                return fail(2, format!("iota({}) not paired with nu", s.name(x)));
            }
        }
    }
    // (3)
    let lookup: HashMap<&FreeVector, usize> = meets.iter().enumerate().map(|(f, v)| (v, f)).collect();
    for (f, meet_f) in meets.iter().enumerate() {
        for g in 0..e.len() {
            let mut union = e.members(f);
            union.extend(e.members(g));
            let m = meet_in_v(r, &union);
            match lookup.get(&m) {
                Some(&h) if h == e.meet(f, g) => {}
                _ => return fail(3, format!("meet of {} and {}", e.label(f), e.label(g))),
            }
            if (m == *meet_f) != e.leq(f, g) {
                return fail(3, format!("order at {} {}", e.label(f), e.label(g)));
            }
        }
    }
    // (4) and (5)
    let d = e.to_sus();
    let rd = build_vring(&d);
    if r.rank() != rd.rank() || r.rank() != s.meet_irreducibles().len() {
        return fail(
            4,
            format!("rank V(L) = {}, rank V(D) = {}, |M| = {}", r.rank(), rd.rank(), s.meet_irreducibles().len()),
        );
    }
    let mut nu_m: Vec<usize> = s.meet_irreducibles().iter().map(|&m| e.nu(m)).collect();
    nu_m.sort_unstable();
    if d.meet_irreducibles() != nu_m.as_slice() {
        return fail(5, "meet-irreducibles of D differ from nu(M)".into());
    }
    // (6)
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut on_l: Vec<GroupValuation> =
        vec![GroupValuation::constant(s.len(), 0, 1), GroupValuation::constant(s.len(), 3, 2)];
    if let Ok(primes) = prime_filter_valuations(&d) {
        on_l.extend(primes.into_iter().map(|p| restrict(&p, e)));
    }
    for _ in 0..RANDOM_VALUATIONS {
        let values = random_values(&mut rng, s.meet_irreducibles().len());
        match valuation_from_basis_values(r, 0, &values) {
            Ok(f) => on_l.push(f),
            Err(err) => return fail(6, format!("valuation from basis values: {err}")),
        }
    }
    for f in &on_l {
        let Ok(phi) = induced_hom(r, f) else {
            return fail(6, "a restricted valuation is not a valuation on L".into());
        };
        let lifted = GroupValuation::new(f.modulus, (0..e.len()).map(|g| phi.apply(&i_of(r, e, g))).collect());
        if !is_valuation(&d, &lifted) {
            return fail(6, "lift through i is not a valuation on D".into());
        }
        if restrict(&lifted, e) != *f {
            return fail(6, "lift does not restrict back".into());
        }
    }
    for _ in 0..RANDOM_VALUATIONS {
        let values = random_values(&mut rng, d.meet_irreducibles().len());
        let g = match valuation_from_basis_values(&rd, 0, &values) {
            Ok(g) => g,
            Err(err) => return fail(6, format!("valuation on D from basis values: {err}")),
        };
        let f = restrict(&g, e);
        if !is_valuation(s, &f) {
            return fail(6, "restriction to L is not a valuation".into());
        }
        let phi = induced_hom(r, &f).expect("checked above");
        if (0..e.len()).any(|h| phi.apply(&i_of(r, e, h)) != *g.value(h)) {
            return fail(6, "valuation on D not recovered from its restriction".into());
        }
    }
    VerificationItem::pass(NAME).with_note(format!(
        "|D| = {}, new elements = {}, valuations lifted = {}",
        e.len(),
        env.new_elements().count(),
        on_l.len() + RANDOM_VALUATIONS
    ))
}

/// `f ∘ ν` for a valuation `f` on `𝒟`.
pub fn restrict(f: &GroupValuation, e: &FilterLattice<'_>) -> GroupValuation {
    GroupValuation::new(f.modulus, e.nu_map().iter().map(|&g| f.value(g).clone()).collect())
}

fn random_values(rng: &mut ChaCha8Rng, k: usize) -> Vec<BigInt> {
    (0..k).map(|_| BigInt::from(rng.gen_range(-9i64..=9))).collect()
}
