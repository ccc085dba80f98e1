//! Exhaustive generation of small instances and the full verification
//! suite run over them.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::birkhoff::{
    build_envelope_capped, check_embedding, check_envelope_lattice, check_fa_lemmas, check_universal, coordinate_map,
    FilterLattice, SemiHom, DEFAULT_SIZE_CAP,
};
use crate::envelope::{check_equivalence, check_inclusion_exclusion, check_meet_convention};
use crate::order::Poset;
use crate::report::{VerificationItem, VerificationReport};
use crate::semilattice::{boolean_lattice, check_wedge_mi, check_xplus_lemma, validate_sus, Sus};
use crate::vring::{
    build_vring, check_basis, check_ideal, check_infinite_order, check_iota_injective, check_prime_separation,
    check_retract,
};

pub const MAX_ENUMERATION_SIZE: usize = 7;
/// Relabelings tried before [`instance_id`] falls back to the given labeling.
const CANONICAL_SEARCH_CAP: usize = 40_320;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("SizeCap: {n} exceeds the enumeration limit of {max}")]
    SizeCap { n: usize, max: usize },
    #[error("size must be at least 1")]
    Empty,
    #[error("thread pool: {0}")]
    Pool(String),
}

fn check_size(n: usize) -> Result<(), EnumError> {
    if n == 0 {
        Err(EnumError::Empty)
    } else if n > MAX_ENUMERATION_SIZE {
        Err(EnumError::SizeCap { n, max: MAX_ENUMERATION_SIZE })
    } else {
        Ok(())
    }
}

/// `up[i]` has bit `j` set iff `i ≤ j`.
type UpSets = Vec<u8>;

fn down_sets(up: &[u8]) -> Vec<u8> {
    let k = up.len();
    (0u16..1 << k).map(|s| s as u8).filter(|&s| (0..k).all(|j| s & (1 << j) != 0 || up[j] & s == 0)).collect()
}

fn up_sets(up: &[u8]) -> Vec<u8> {
    let k = up.len();
    (0u16..1 << k).map(|s| s as u8).filter(|&s| (0..k).all(|i| s & (1 << i) == 0 || up[i] & !s == 0)).collect()
}

/// Adds element `k = up.len()` above `below` and beneath `above`.
fn extend(up: &[u8], below: u8, above: u8) -> UpSets {
    let k = up.len();
    let own = above | (1 << k);
    let mut next: UpSets = up.to_vec();
    for (d, row) in next.iter_mut().enumerate() {
        if below & (1 << d) != 0 {
            *row |= own;
        }
    }
    next.push(own);
    next
}

/// Every partial order on `{0..n}`, each exactly once: the order on the
/// first `k` elements is extended by a new element with a down-set `D`
/// below and an up-set `U` above, where every element of `D` lies below
/// every element of `U`.
fn labeled_orders(n: usize) -> Vec<UpSets> {
    let mut level: Vec<UpSets> = vec![vec![]];
    for _ in 0..n {
        let mut next = vec![];
        for up in &level {
            let downs = down_sets(up);
            let ups = up_sets(up);
            for &d in &downs {
                let allowed = (0..up.len()).filter(|&i| d & (1 << i) != 0).fold(u8::MAX, |acc, i| acc & up[i]);
                for &u in &ups {
                    if u & d == 0 && u & !allowed == 0 {
                        next.push(extend(up, d, u));
                    }
                }
            }
        }
        level = next;
    }
    level
}

/// One representative per isomorphism class, in canonical labeling.
/// Every poset arises from a smaller one by adding a maximal element, so
/// each level only extends the representatives of the previous one.
fn unlabeled_orders(n: usize) -> Vec<UpSets> {
    let mut level: Vec<UpSets> = vec![vec![]];
    for _ in 0..n {
        let mut seen = BTreeSet::new();
        let mut next = vec![];
        for up in &level {
            for d in down_sets(up) {
                let ext = extend(up, d, 0);
                let m = ext.len();
                let canon =
                    canonical_labeling(m, |i, j| ext[i] & (1 << j) != 0, usize::MAX).expect("search is uncapped");
                let relabeled: UpSets = (0..m)
                    .map(|p| (0..m).filter(|&q| ext[canon[p]] & (1 << canon[q]) != 0).fold(0u8, |acc, q| acc | 1 << q))
                    .collect();
                if seen.insert(relabeled.clone()) {
                    next.push(relabeled);
                }
            }
        }
        level = next;
    }
    level.sort();
    level
}

fn letter_names(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
}

fn to_poset(up: &[u8], names: Vec<String>) -> Poset {
    let n = up.len();
    let leq = (0..n * n).map(|k| up[k / n] & (1 << (k % n)) != 0).collect();
    Poset::from_closed(names, leq)
}

/// All partial orders on `n` elements labeled `a, b, …`; with `up_to_iso`,
/// one canonically labeled representative per isomorphism class, in which
/// the labeling is a linear extension.
pub fn gen_posets(n: usize, up_to_iso: bool) -> Result<Vec<Poset>, EnumError> {
    check_size(n)?;
    let orders = if up_to_iso { unlabeled_orders(n) } else { labeled_orders(n) };
    Ok(orders.iter().map(|up| to_poset(up, letter_names(n))).collect())
}

/// Number of partial orders on `n` labeled elements, and of isomorphism
/// classes.
pub fn count_posets(n: usize) -> Result<(usize, usize), EnumError> {
    check_size(n)?;
    Ok((labeled_orders(n).len(), unlabeled_orders(n).len()))
}

/// Distributive strong upper semilattices on `n` elements up to
/// isomorphism: a poset with a top is the top added to an arbitrary poset
/// on `n − 1` elements.
pub fn gen_dsus(n: usize) -> Result<Vec<Sus>, EnumError> {
    check_size(n)?;
    let bases = if n == 1 { vec![vec![]] } else { unlabeled_orders(n - 1) };
    Ok(bases.iter().filter_map(|up| validate_sus(to_poset(up, letter_names(n - 1)).with_top("1")).ok()).collect())
}

/// Position-to-element assignment minimizing the relabeled relation,
/// searched only among assignments that respect an iteratively refined
/// partition by (down-set size, up-set size). `None` if more than `cap`
/// assignments would be needed.
fn canonical_labeling(n: usize, leq: impl Fn(usize, usize) -> bool, cap: usize) -> Option<Vec<usize>> {
    let mut color: Vec<usize> = {
        let sig: Vec<(usize, usize)> =
            (0..n).map(|i| ((0..n).filter(|&j| leq(j, i)).count(), (0..n).filter(|&j| leq(i, j)).count())).collect();
        renumber(&sig)
    };
    loop {
        let sig: Vec<(usize, Vec<usize>, Vec<usize>)> = (0..n)
            .map(|i| {
                let mut below: Vec<usize> = (0..n).filter(|&j| j != i && leq(j, i)).map(|j| color[j]).collect();
                let mut above: Vec<usize> = (0..n).filter(|&j| j != i && leq(i, j)).map(|j| color[j]).collect();
                below.sort_unstable();
                above.sort_unstable();
                (color[i], below, above)
            })
            .collect();
        let next = renumber(&sig);
        let classes = |c: &[usize]| c.iter().collect::<BTreeSet<_>>().len();
        let done = classes(&next) == classes(&color);
        color = next;
        if done {
            break;
        }
    }
    let ncolors = color.iter().max().map_or(0, |&c| c + 1);
    let mut classes: Vec<Vec<usize>> = vec![vec![]; ncolors];
    for (i, &c) in color.iter().enumerate() {
        classes[c].push(i);
    }
    let mut work = 1usize;
    for class in &classes {
        for k in 1..=class.len() {
            work = work.saturating_mul(k);
        }
    }
    if work > cap {
        return None;
    }

    let mut best: Option<(Vec<bool>, Vec<usize>)> = None;
    let mut assignment = Vec::with_capacity(n);
    search(&classes, 0, &mut assignment, &leq, &mut best);
    best.map(|(_, a)| a)
}

fn renumber<T: Ord + Clone>(sig: &[T]) -> Vec<usize> {
    let distinct: Vec<T> = sig.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    sig.iter().map(|s| distinct.binary_search(s).expect("present")).collect()
}

fn search(
    classes: &[Vec<usize>],
    c: usize,
    assignment: &mut Vec<usize>,
    leq: &impl Fn(usize, usize) -> bool,
    best: &mut Option<(Vec<bool>, Vec<usize>)>,
) {
    if c == classes.len() {
        let code = relation_code(assignment, leq);
        if best.as_ref().is_none_or(|(b, _)| code < *b) {
            *best = Some((code, assignment.clone()));
        }
        return;
    }
    permute(&classes[c], &mut vec![false; classes[c].len()], assignment, &mut |assignment| {
        search(classes, c + 1, assignment, leq, best)
    });
}

fn permute(items: &[usize], used: &mut Vec<bool>, out: &mut Vec<usize>, visit: &mut dyn FnMut(&mut Vec<usize>)) {
    if used.iter().all(|&u| u) {
        visit(out);
        return;
    }
    for k in 0..items.len() {
        if !used[k] {
            used[k] = true;
            out.push(items[k]);
            permute(items, used, out, visit);
            out.pop();
            used[k] = false;
        }
    }
}

fn relation_code(order: &[usize], leq: &impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let n = order.len();
    (0..n * n).map(|k| leq(order[k / n], order[k % n])).collect()
}

fn hex(bits: &[bool]) -> String {
    bits.chunks(4)
        .map(|c| {
            let v = c.iter().enumerate().fold(0u32, |acc, (i, &b)| acc | (b as u32) << (3 - i));
            char::from_digit(v, 16).expect("nibble")
        })
        .collect()
}

/// Isomorphism-invariant identifier: size plus the hex-packed relation
/// matrix under the canonical labeling. Instances too symmetric for the
/// capped search get an `L`-marked identifier of their given labeling.
pub fn instance_id(s: &Sus) -> String {
    let p = s.poset();
    let n = p.len();
    let leq = |i, j| p.leq(i, j);
    match canonical_labeling(n, leq, CANONICAL_SEARCH_CAP) {
        Some(order) => format!("n{n}-{}", hex(&relation_code(&order, &leq))),
        None => {
            let identity: Vec<usize> = (0..n).collect();
            format!("n{n}-L{}", hex(&relation_code(&identity, &leq)))
        }
    }
}

pub const DEFAULT_SEED: u64 = 0;

/// Order of items in every report.
pub const SUITE_ITEMS: [&str; 16] = [
    "wedge_mi",
    "xplus_lemma",
    "envelope_lattice",
    "embedding",
    "fa_lemmas",
    "universal",
    "ideal",
    "iota_injective",
    "infinite_order",
    "basis",
    "snf_invariants",
    "retract",
    "prime_separation",
    "inclusion_exclusion",
    "meet_convention",
    "equivalence",
];

/// Maps used to test the universal property: `ν` into `𝒟`, the product of
/// coordinate maps of the first `k` non-top meet-irreducibles into `2^k`
/// (remaining coordinates constantly 1), and the constant map onto the top
/// of `2`.
fn universal_family(s: &Sus, e: &FilterLattice<'_>) -> Vec<(String, Sus, Vec<usize>)> {
    let mut family = vec![("D".to_string(), e.to_sus(), e.nu_map().to_vec())];
    let coords: Vec<usize> = s.meet_irreducibles().iter().copied().filter(|&m| m != s.top()).collect();
    for k in 1..=3 {
        let map = (0..s.len())
            .map(|x| {
                (0..k).fold(0usize, |acc, bit| {
                    let on = coords.get(bit).is_none_or(|&p| coordinate_map(s, p)(x));
                    acc | (on as usize) << bit
                })
            })
            .collect();
        family.push((format!("B{k}"), boolean_lattice(k), map));
    }
    family.push(("B1 constant top".to_string(), boolean_lattice(1), vec![1; s.len()]));
    family
}

fn universal_item(s: &Sus, e: &FilterLattice<'_>) -> VerificationItem {
    let mut not_bottom = vec![];
    for (name, codomain, map) in universal_family(s, e) {
        let check = SemiHom::new(s, &codomain, map).and_then(|h| check_universal(e, &h));
        match check {
            Ok(c) if c.item.passed() => {
                if !c.preserves_bottom {
                    not_bottom.push(name);
                }
            }
            Ok(c) => {
                return VerificationItem::fail("universal", format!("{name}: {}", c.item.witness.unwrap_or_default()))
            }
            Err(err) => return VerificationItem::fail("universal", format!("{name}: {err}")),
        }
    }
    let item = VerificationItem::pass("universal");
    if not_bottom.is_empty() {
        item
    } else {
        item.with_note(format!("bottom not preserved: {}", not_bottom.join(", ")))
    }
}

/// Whether a report exhibits an extension that does not preserve bottom.
pub fn exhibits_bottom_caveat(report: &VerificationReport) -> bool {
    report.item("universal").is_some_and(|i| i.notes.iter().any(|n| n.starts_with("bottom not preserved")))
}

pub fn run_suite(s: &Sus, seed: u64) -> VerificationReport {
    run_suite_capped(s, seed, DEFAULT_SIZE_CAP)
}

/// Every registered check on one instance, in [`SUITE_ITEMS`] order.
/// Checks needing `𝒟` are not applicable when `|M|` exceeds `cap`.
pub fn run_suite_capped(s: &Sus, seed: u64, cap: usize) -> VerificationReport {
    let mut items = vec![];
    let mut timings = vec![];
    let mut timed = |item: VerificationItem, start: Instant| {
        timings.push((item.name.clone(), start.elapsed()));
        items.push(item);
    };

    let t = Instant::now();
    timed(check_wedge_mi(s), t);
    let t = Instant::now();
    timed(check_xplus_lemma(s), t);

    let t = Instant::now();
    let envelope = build_envelope_capped(s, cap);
    let envelope_time = t.elapsed();
    match &envelope {
        Ok(e) => {
            let t = Instant::now() - envelope_time;
            timed(check_envelope_lattice(e), t);
            let t = Instant::now();
            timed(check_embedding(e), t);
            let t = Instant::now();
            timed(check_fa_lemmas(e), t);
            let t = Instant::now();
            timed(universal_item(s, e), t);
        }
        Err(err) => {
            for name in ["envelope_lattice", "embedding", "fa_lemmas", "universal"] {
                timed(VerificationItem::not_applicable(name, err.to_string()), Instant::now());
            }
        }
    }

    let t = Instant::now();
    let r = build_vring(s);
    timed(check_ideal(&r), t);
    let t = Instant::now();
    timed(check_iota_injective(&r), t);
    let t = Instant::now();
    timed(check_infinite_order(&r), t);
    let t = Instant::now();
    timed(check_basis(&r), t);
    let t = Instant::now();
    let invariants = r.ideal().snf_invariants();
    let snf = match invariants.iter().find(|d| **d != 1.into()) {
        None => VerificationItem::pass("snf_invariants"),
        Some(d) => VerificationItem::fail("snf_invariants", format!("invariant {d}")),
    };
    timed(snf.with_note(format!("{} invariants", invariants.len())), t);

    let t = Instant::now();
    let retract = s
        .minimal_elements()
        .iter()
        .map(|&a| match check_retract(&r, a) {
            Ok(item) => item,
            Err(err) => VerificationItem::fail("retract", err.to_string()),
        })
        .find(|item| !item.passed());
    let retract = match retract {
        None => VerificationItem::pass("retract"),
        Some(item) => VerificationItem::fail("retract", format!("{}: {}", item.name, item.witness.unwrap_or_default())),
    };
    timed(retract, t);

    let t = Instant::now();
    timed(check_prime_separation(s), t);
    let t = Instant::now();
    timed(check_inclusion_exclusion(&r), t);
    let t = Instant::now();
    timed(check_meet_convention(&r), t);
    let t = Instant::now();
    match &envelope {
        Ok(e) => timed(check_equivalence(&r, e, seed), t),
        Err(err) => timed(VerificationItem::not_applicable("equivalence", err.to_string()), t),
    }

    VerificationReport { instance_id: instance_id(s), size: s.len(), items, timings }
}

#[derive(Debug, Clone, Serialize)]
pub struct SizeSummary {
    pub size: usize,
    pub instances: usize,
    pub passed: usize,
    pub failed_items: usize,
    pub bottom_caveat: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub max_size: usize,
    pub seed: u64,
    pub sizes: Vec<SizeSummary>,
    pub instances: usize,
    pub passed: usize,
    pub failed_items: usize,
    pub bottom_caveat: usize,
    /// One record per instance, ordered by size then instance id.
    pub reports: Vec<VerificationReport>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SweepSummary {
    pub fn all_passed(&self) -> bool {
        self.failed_items == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = (&VerificationReport, &VerificationItem)> {
        self.reports.iter().flat_map(|r| r.failures().map(move |i| (r, i)))
    }
}

/// `run_suite` over `gen_dsus(n)` for every `n ≤ max_n`, spread over
/// `jobs` worker threads (0 lets the pool choose).
pub fn sweep(max_n: usize, jobs: usize, seed: u64) -> Result<SweepSummary, EnumError> {
    check_size(max_n)?;
    let start = Instant::now();
    let mut instances = vec![];
    for n in 1..=max_n {
        instances.extend(gen_dsus(n)?);
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| EnumError::Pool(e.to_string()))?;
    let mut reports: Vec<VerificationReport> =
        pool.install(|| instances.par_iter().map(|s| run_suite(s, seed)).collect());
    reports.sort_by(|a, b| (a.size, &a.instance_id).cmp(&(b.size, &b.instance_id)));

    let sizes: Vec<SizeSummary> = (1..=max_n)
        .map(|size| {
            let of_size: Vec<&VerificationReport> = reports.iter().filter(|r| r.size == size).collect();
            SizeSummary {
                size,
                instances: of_size.len(),
                passed: of_size.iter().filter(|r| r.all_passed()).count(),
                failed_items: of_size.iter().map(|r| r.failures().count()).sum(),
                bottom_caveat: of_size.iter().filter(|r| exhibits_bottom_caveat(r)).count(),
            }
        })
        .collect();
    Ok(SweepSummary {
        max_size: max_n,
        seed,
        instances: reports.len(),
        passed: sizes.iter().map(|s| s.passed).sum(),
        failed_items: sizes.iter().map(|s| s.failed_items).sum(),
        bottom_caveat: sizes.iter().map(|s| s.bottom_caveat).sum(),
        sizes,
        reports,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Outcome;
    use crate::semilattice::fixtures::*;

    #[test]
    fn small_counts() {
        assert_eq!(gen_posets(1, true).unwrap().len(), 1);
        assert_eq!(gen_posets(2, true).unwrap().len(), 2);
        assert_eq!(gen_posets(3, true).unwrap().len(), 5);
        assert_eq!(count_posets(4).unwrap(), (219, 16));
    }

    #[test]
    fn size_limits() {
        assert_eq!(gen_posets(8, true).unwrap_err(), EnumError::SizeCap { n: 8, max: 7 });
        assert_eq!(gen_dsus(0).unwrap_err(), EnumError::Empty);
        assert!(matches!(sweep(8, 1, 0), Err(EnumError::SizeCap { .. })));
    }

    #[test]
    fn representatives_are_naturally_labeled() {
        for p in gen_posets(5, true).unwrap() {
            for &(lo, hi) in p.covers() {
                assert!(lo < hi);
            }
        }
    }

    #[test]
    fn dsus_examples() {
        assert_eq!(gen_dsus(1).unwrap().len(), 1);
        assert_eq!(gen_dsus(2).unwrap().len(), 1);
        let ids = |n| gen_dsus(n).unwrap().iter().map(instance_id).collect::<Vec<_>>();
        let three = ids(3);
        assert!(three.contains(&instance_id(&chain3())));
        assert!(three.contains(&instance_id(&v3())));
        let four = ids(4);
        for s in [b2(), k4(), chain(4)] {
            assert!(four.contains(&instance_id(&s)));
        }
    }

    #[test]
    fn instance_id_ignores_labeling() {
        let a = v3();
        let b = validate_sus(poset(&["1", "q", "p"], &[("p", "1"), ("q", "1")])).unwrap();
        assert_eq!(instance_id(&a), instance_id(&b));
        assert_ne!(instance_id(&a), instance_id(&chain3()));
    }

    #[test]
    fn suite_passes_on_named_instances() {
        for s in [v3(), b2(), k4(), chain3(), b3()] {
            let report = run_suite(&s, 1);
            let names: Vec<&str> = report.items.iter().map(|i| i.name.as_str()).collect();
            assert_eq!(names, SUITE_ITEMS);
            assert!(report.all_passed(), "{:?}", report.failures().collect::<Vec<_>>());
            assert!(exhibits_bottom_caveat(&report));
        }
    }

    #[test]
    fn prime_separation_not_applicable_without_bottom() {
        let report = run_suite(&v3(), 0);
        assert_eq!(report.item("prime_separation").unwrap().outcome, Outcome::NotApplicable);
    }

    #[test]
    fn sweep_small() {
        let summary = sweep(4, 2, 0).unwrap();
        assert!(summary.all_passed());
        assert_eq!(summary.instances, summary.sizes.iter().map(|s| s.instances).sum::<usize>());
        let again = sweep(4, 1, 0).unwrap();
        assert_eq!(serde_json::to_string(&summary.reports).unwrap(), serde_json::to_string(&again.reports).unwrap());
    }
}
