//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. All comparisons are exact.

mod common;

use std::time::Instant;

use common::*;
use envelope_kit::birkhoff::build_envelope;
use envelope_kit::cli::{self, InstanceDocument};
use envelope_kit::enumeration::{count_posets, gen_dsus, gen_posets, sweep, DEFAULT_SEED, SUITE_ITEMS};
use envelope_kit::envelope::{build_venvelope, meet_in_v, meet_in_v_proper_subsets};
use envelope_kit::semilattice::{validate_strong, validate_sus, Sus, SusError};
use envelope_kit::vring::{build_vring, FreeVector};

const MAX_SIZE: usize = 6;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn load(text: &str) -> Result<Sus, String> {
    let p = InstanceDocument::parse(text).and_then(|d| d.to_poset()).map_err(|e| e.to_string())?;
    validate_sus(p).map_err(|e| e.to_string())
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = vec![];
    let mut err = vec![];
    let mut argv = vec!["envelope-kit"];
    argv.extend_from_slice(args);
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).expect("utf-8"))
}

fn criterion_sweep() -> Outcome {
    let start = Instant::now();
    let summary = sweep(MAX_SIZE, 0, DEFAULT_SEED).map_err(|e| e.to_string())?;
    for report in &summary.reports {
        let names: Vec<&str> = report.items.iter().map(|i| i.name.as_str()).collect();
        ensure(names == SUITE_ITEMS, || format!("{}: items {names:?}", report.instance_id))?;
    }
    if let Some((report, item)) = summary.failures().next() {
        return Err(format!(
            "{} failed items, first {} {}: {}",
            summary.failed_items,
            report.instance_id,
            item.name,
            item.witness.as_deref().unwrap_or("")
        ));
    }
    ensure(summary.bottom_caveat >= 1, || "no instance exhibits the bottom caveat".into())?;
    let expected: usize = (1..=MAX_SIZE).map(|n| gen_dsus(n).unwrap().len()).sum();
    ensure(summary.instances == expected, || format!("{} instances, expected {expected}", summary.instances))?;
    Ok(format!(
        "{} instances on <= {MAX_SIZE} elements, 0 failed items, bottom caveat on {}, {:.2}s",
        summary.instances,
        summary.bottom_caveat,
        start.elapsed().as_secs_f64()
    ))
}

fn new_elements(s: &Sus) -> Result<(usize, usize, Vec<String>), String> {
    let e = build_envelope(s).map_err(|e| e.to_string())?;
    let r = build_vring(s);
    let env = build_venvelope(&r, &e).map_err(|e| e.to_string())?;
    let new = env.new_elements().map(|i| r.display(env.element(i))).collect();
    Ok((e.len(), r.rank(), new))
}

fn criterion_named() -> Outcome {
    let v3 = load(&v3_doc())?;
    let (d, rank, new) = new_elements(&v3)?;
    ensure(d == 4 && rank == 3 && new == ["a + b - 1"], || format!("V3: |D|={d} rank={rank} new={new:?}"))?;

    let b2 = load(&b2_doc())?;
    let e = build_envelope(&b2).map_err(|e| e.to_string())?;
    let nu_bijective = e.len() == b2.len() && {
        let mut image = e.nu_map().to_vec();
        image.sort_unstable();
        image.dedup();
        image.len() == e.len()
    };
    let r = build_vring(&b2);
    let generators = r.ideal().generators();
    let expected = FreeVector::from_i64(&[1, -1, -1, 1]);
    let single = generators.len() == 1 && (generators[0] == expected || generators[0] == -&expected);
    ensure(nu_bijective && single && r.rank() == 3, || {
        format!("B2: nu bijective {nu_bijective}, generators {}, rank {}", generators.len(), r.rank())
    })?;

    let k4 = load(&k4_doc())?;
    let (d, _, new) = new_elements(&k4)?;
    ensure(d == 5 && new == ["a + b - t"], || format!("K4: |D|={d} new={new:?}"))?;

    for (name, text) in [("M3", m3_doc()), ("N5", n5_doc())] {
        let p = InstanceDocument::parse(&text).and_then(|d| d.to_poset()).map_err(|e| e.to_string())?;
        let rejected = matches!(validate_sus(p), Err(SusError::IntervalNotDistributive(..)));
        ensure(rejected, || format!("{name} not rejected"))?;
    }

    let mut reports = vec![];
    for (name, text) in [("v3", v3_doc()), ("b2", b2_doc()), ("k4", k4_doc())] {
        let path = temp_file(&format!("acceptance_{name}.json"), &text);
        let path = path.to_str().unwrap();
        for command in ["verify", "envelope", "vring"] {
            let first = run_bin(&["--json", command, path]);
            let second = run_bin(&["--json", command, path]);
            ensure(first.code == 0 && first.stdout == second.stdout, || format!("{name} {command} JSON differs"))?;
            reports.push(first.stdout);
        }
    }
    Ok(format!(
        "V3 |D|=4 rank 3 new a+b-1; B2 single relation, rank 3, nu bijective; K4 |D|=5 new a+b-t; M3, N5 rejected; {} JSON reports byte-identical",
        reports.len()
    ))
}

fn criterion_erratum() -> Outcome {
    let mut sets = 0usize;
    let mut literal_failures = 0usize;
    for n in 1..=MAX_SIZE {
        for s in gen_dsus(n).unwrap() {
            let r = build_vring(&s);
            for x in 0..n {
                ensure(meet_in_v(&r, &[x]) == *r.iota(x), || {
                    format!("singleton {} in {:?}", s.name(x), s.poset().labeled_covers())
                })?;
            }
            for mask in 1u32..1 << n {
                let xs: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
                let Ok(g) = s.wedge(&xs) else { continue };
                sets += 1;
                ensure(meet_in_v(&r, &xs) == *r.iota(g), || format!("glb of {xs:?}"))?;
                if meet_in_v_proper_subsets(&r, &xs).map_err(|e| e.to_string())? != *r.iota(g) {
                    literal_failures += 1;
                }
            }
        }
    }
    ensure(literal_failures > 0, || "proper-subset reading never disagrees".into())?;
    Ok(format!(
        "nonempty-subset convention matches iota(wedge X) on all {sets} lower-bounded sets; proper-subset reading fails on {literal_failures}"
    ))
}

fn criterion_oracles() -> Outcome {
    let mut lattices = 0;
    for n in 1..=MAX_SIZE {
        for p in gen_posets(n, true).unwrap() {
            let rel = Relation::of(&p);
            if rel.is_lattice_on(&rel.all()) {
                lattices += 1;
                let direct = p.full_view().is_distributive().map_err(|e| e.to_string())?;
                ensure(direct != rel.has_forbidden_sublattice(&rel.all()), || {
                    format!("distributivity disagrees on {:?}", p.labeled_covers())
                })?;
            }
        }
    }
    let mut pairs = 0;
    for n in 1..=MAX_SIZE {
        for p in gen_posets(n, true).unwrap() {
            let rel = Relation::of(&p);
            let Ok(s) = validate_strong(p) else { continue };
            for x in 0..n {
                for y in 0..n {
                    if let Some(m) = s.meet(x, y) {
                        pairs += 1;
                        ensure(Some(m) == rel.glb(&rel.all(), x, y), || format!("glb({x},{y})"))?;
                    }
                }
            }
        }
    }
    for n in 1..=5 {
        let direct = direct_poset_counts(n);
        let generated = count_posets(n).map_err(|e| e.to_string())?;
        ensure(direct == generated, || format!("n={n}: generator {generated:?}, direct {direct:?}"))?;
    }
    Ok(format!(
        "{lattices} lattices agree on distributivity; {pairs} defined meets agree; poset counts agree for n <= 5"
    ))
}

fn criterion_interface() -> Outcome {
    let mut documents = 0;
    for n in 1..=MAX_SIZE {
        for s in gen_dsus(n).unwrap() {
            let doc = InstanceDocument::from_poset(s.poset());
            let back = InstanceDocument::parse(&doc.serialize()).map_err(|e| e.to_string())?;
            ensure(back == doc, || "document round trip".into())?;
            let p = back.to_poset().map_err(|e| e.to_string())?;
            ensure((0..n).all(|x| (0..n).all(|y| p.leq(x, y) == s.leq(x, y))), || "order round trip".into())?;
            documents += 1;
        }
    }

    let v3 = temp_file("iface_v3.json", &v3_doc());
    let m3 = temp_file("iface_m3.json", &m3_doc());
    let cyclic = temp_file("iface_cyclic.json", &doc(&["a", "b"], &[("a", "b"), ("b", "a")]));
    let broken = temp_file("iface_broken.json", "not json");
    let (v3, m3, cyclic, broken) =
        (v3.to_str().unwrap(), m3.to_str().unwrap(), cyclic.to_str().unwrap(), broken.to_str().unwrap());
    let cases: [(&[&str], i32); 8] = [
        (&["check", v3], 0),
        (&["verify", v3], 0),
        (&["check", m3], 1),
        (&["verify", m3], 1),
        (&["check", cyclic], 2),
        (&["verify", broken], 2),
        (&["sweep", "--max-size", "9"], 2),
        (&["sweep", "--max-size", "3"], 0),
    ];
    for (args, expected) in cases {
        let (code, _) = run_cli(args);
        ensure(code == expected, || format!("{args:?}: exit {code}, expected {expected}"))?;
        let bin = run_bin(args);
        ensure(bin.code == expected, || format!("binary {args:?}: exit {}, expected {expected}", bin.code))?;
    }

    for target in ["poset", "envelope"] {
        let first = run_bin(&["dot", "--target", target, v3]);
        let second = run_bin(&["dot", "--target", target, v3]);
        ensure(first.code == 0 && first.stdout == second.stdout, || format!("dot {target} unstable"))?;
    }
    Ok(format!("{documents} documents round-trip; exit codes 0/1/2 as specified; DOT stable"))
}

fn main() {
    let criteria: [Criterion; 5] = [
        ("1 exhaustive lemma sweep", criterion_sweep),
        ("2 named-instance regressions", criterion_named),
        ("3 summation convention erratum", criterion_erratum),
        ("4 independent-oracle cross-checks", criterion_oracles),
        ("5 determinism and interface contract", criterion_interface),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  criterion {name} [tolerance: exact]: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name} [tolerance: exact]: {why}");
            }
        }
    }
    println!("acceptance: {} of 5 criteria passed", 5 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
