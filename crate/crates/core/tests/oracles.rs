mod common;

use common::*;
use envelope_kit::birkhoff::build_envelope;
use envelope_kit::enumeration::{count_posets, gen_dsus, gen_posets, instance_id};
use envelope_kit::semilattice::{validate_strong, validate_sus};
use envelope_kit::vring::build_vring;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

#[test]
fn poset_counts_match_direct_method() {
    for n in 1..=5 {
        let (labeled, unlabeled) = direct_poset_counts(n);
        assert_eq!(count_posets(n).unwrap(), (labeled, unlabeled), "n = {n}");
        assert_eq!(labeled, LABELED_POSET_COUNTS[n - 1]);
        assert_eq!(unlabeled, UNLABELED_POSET_COUNTS[n - 1]);
    }
}

#[test]
fn unlabeled_counts_to_seven() {
    for n in 1..=7 {
        assert_eq!(gen_posets(n, true).unwrap().len(), UNLABELED_POSET_COUNTS[n - 1]);
    }
}

#[test]
fn representatives_pairwise_non_isomorphic() {
    for n in 1..=5 {
        let perms = permutations(n);
        let canon = |p: &envelope_kit::order::Poset| {
            perms.iter().map(|q| (0..n * n).map(|k| p.leq(q[k / n], q[k % n])).collect::<Vec<bool>>()).min().unwrap()
        };
        let forms: std::collections::HashSet<_> = gen_posets(n, true).unwrap().iter().map(canon).collect();
        assert_eq!(forms.len(), UNLABELED_POSET_COUNTS[n - 1]);
    }
}

#[test]
fn dsus_generator_matches_forbidden_sublattice_filter() {
    for n in 1..=6 {
        let expected =
            gen_posets(n, true).unwrap().into_iter().filter(|p| Relation::of(p).is_distributive_sus()).count();
        let generated = gen_dsus(n).unwrap();
        assert_eq!(generated.len(), expected, "n = {n}");
        let ids: std::collections::HashSet<String> = generated.iter().map(instance_id).collect();
        assert_eq!(ids.len(), generated.len());
    }
}

#[test]
fn validation_agrees_with_oracle_on_all_posets() {
    for n in 1..=6 {
        for p in gen_posets(n, true).unwrap() {
            let oracle = Relation::of(&p).is_distributive_sus();
            assert_eq!(validate_sus(p.clone()).is_ok(), oracle, "{:?}", p.labeled_covers());
        }
    }
}

#[test]
fn lattice_distributivity_direct_law_vs_forbidden_sublattices() {
    let mut lattices = 0;
    for n in 1..=6 {
        for p in gen_posets(n, true).unwrap() {
            let rel = Relation::of(&p);
            if !rel.is_lattice_on(&rel.all()) {
                continue;
            }
            lattices += 1;
            let direct = p.full_view().is_distributive().unwrap();
            assert_eq!(direct, !rel.has_forbidden_sublattice(&rel.all()));
        }
    }
    // lattices on 1..=6 elements up to isomorphism
    assert_eq!(lattices, 1 + 1 + 1 + 2 + 5 + 15);
}

#[test]
fn meet_table_matches_lower_bound_maximum() {
    for n in 1..=6 {
        for p in gen_posets(n, true).unwrap() {
            let rel = Relation::of(&p);
            let Ok(s) = validate_strong(p) else { continue };
            let all = rel.all();
            for x in 0..n {
                for y in 0..n {
                    assert_eq!(s.meet(x, y), rel.glb(&all, x, y));
                    assert_eq!(Some(s.join(x, y)), rel.lub(&all, x, y));
                }
            }
        }
    }
}

#[test]
fn filter_count_matches_brute_force() {
    for n in 1..=6 {
        for s in gen_dsus(n).unwrap() {
            let m = s.meet_irreducibles();
            let upward = (1u64..1 << m.len())
                .filter(|mask| {
                    (0..m.len()).all(|i| {
                        mask & (1 << i) == 0 || (0..m.len()).all(|j| !s.poset().leq(m[i], m[j]) || mask & (1 << j) != 0)
                    })
                })
                .count();
            assert_eq!(build_envelope(&s).unwrap().len(), upward);
        }
    }
}

fn rational_rank(rows: &[Vec<i64>], ncols: usize) -> usize {
    let mut m: Vec<Vec<BigRational>> =
        rows.iter().map(|r| r.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect()).collect();
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, p);
        let inv = BigRational::one() / m[rank][c].clone();
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let f = m[i][c].clone() * inv.clone();
                let pivot_row = m[rank].clone();
                for (entry, p) in m[i].iter_mut().zip(&pivot_row) {
                    *entry -= p.clone() * f.clone();
                }
            }
        }
        rank += 1;
    }
    rank
}

#[test]
fn vring_rank_matches_rational_oracle() {
    for n in 1..=6 {
        for s in gen_dsus(n).unwrap() {
            let all: Vec<usize> = (0..n).collect();
            let rel = Relation::of(s.poset());
            let mut rows = vec![];
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let ac = rel.lub(&all, a, c).unwrap();
                        let bc = rel.lub(&all, b, c).unwrap();
                        let Some(m) = rel.glb(&all, ac, bc) else { continue };
                        let abc = rel.lub(&all, rel.lub(&all, a, b).unwrap(), c).unwrap();
                        let mut row = vec![0i64; n];
                        row[abc] += 1;
                        row[m] += 1;
                        row[ac] -= 1;
                        row[bc] -= 1;
                        rows.push(row);
                    }
                }
            }
            let r = build_vring(&s);
            assert_eq!(r.rank(), n - rational_rank(&rows, n));
            assert_eq!(r.rank(), s.meet_irreducibles().len());
        }
    }
}
