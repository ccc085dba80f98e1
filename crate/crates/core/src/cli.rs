//! Command-line front end. [`run`] takes the argument list and writers so
//! it can be driven from tests; `main` only forwards the exit code.
//!
//! Exit codes: 0 when every check passes, 1 when a mathematical check or
//! validation fails, 2 for unreadable input or bad usage.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::birkhoff::{build_envelope_capped, BirkhoffError, FilterLattice, DEFAULT_SIZE_CAP};
use crate::enumeration::{run_suite_capped, sweep, EnumError, DEFAULT_SEED, MAX_ENUMERATION_SIZE};
use crate::envelope::{build_venvelope, check_equivalence};
use crate::order::{OrderError, Poset};
use crate::report::Outcome;
use crate::semilattice::{validate_sus, Sus, SusError};
use crate::vring::{build_vring, check_basis, FreeVector};

pub const SIZE_CAP_ENV: &str = "ENVELOPE_KIT_SIZE_CAP";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// An instance file: labels in index order and `[lower, upper]` pairs
/// whose reflexive-transitive closure is the order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub elements: Vec<String>,
    pub covers: Vec<(String, String)>,
}

impl InstanceDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: InstanceDocument = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        for (lo, hi) in &doc.covers {
            for label in [lo, hi] {
                if !doc.elements.contains(label) {
                    return Err(CliError::Order(OrderError::UnknownLabel(label.clone())));
                }
            }
        }
        Ok(doc)
    }

    pub fn serialize(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn from_poset(p: &Poset) -> Self {
        InstanceDocument { elements: p.names().to_vec(), covers: p.labeled_covers() }
    }

    pub fn to_poset(&self) -> Result<Poset, CliError> {
        Ok(Poset::build(&self.elements, &self.covers)?)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("ParseError: {0}")]
    Parse(String),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("{0}")]
    Order(#[from] OrderError),
    #[error("{0}")]
    Sus(#[from] SusError),
    #[error("{0}")]
    Birkhoff(#[from] BirkhoffError),
    #[error("{0}")]
    Enumeration(#[from] EnumError),
    #[error("{SIZE_CAP_ENV}: {0}")]
    BadCap(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Sus(_) => EXIT_FAIL,
            _ => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "envelope-kit", version, about = "Envelopes of finite distributive strong upper semilattices")]
struct Cli {
    /// Emit machine-readable JSON
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized valuation checks
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate the strong upper semilattice axioms and distributivity
    Check { path: PathBuf },
    /// Build the filter envelope, the valuation-ring envelope, or both
    Envelope {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Present the valuation ring
    Vring { path: PathBuf },
    /// Run every check on one instance
    Verify { path: PathBuf },
    /// Run every check on all instances up to a size
    Sweep {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=MAX_ENUMERATION_SIZE as u64))]
        max_size: u64,
        /// Worker threads; 0 uses all cores
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Hasse diagram in DOT syntax
    Dot {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Target::Poset)]
        target: Target,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Birkhoff,
    Valuation,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Poset,
    Envelope,
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Check { path } => cmd_check(path, cli.json),
        Command::Envelope { path, method } => cmd_envelope(path, *method, cli.json, cli.seed),
        Command::Vring { path } => cmd_vring(path, cli.json),
        Command::Verify { path } => cmd_verify(path, cli.json, cli.seed),
        Command::Sweep { max_size, jobs } => cmd_sweep(*max_size as usize, *jobs, cli.json, cli.seed),
        Command::Dot { path, target } => cmd_dot(path, *target),
    };
    match result {
        Ok((code, text)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(e) => {
            if cli.json {
                let _ = writeln!(out, "{}", serde_json::json!({ "error": e.to_string() }));
            }
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

type CmdResult = Result<(i32, String), CliError>;

fn read_instance(path: &Path) -> Result<Poset, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    InstanceDocument::parse(&text)?.to_poset()
}

fn load(path: &Path) -> Result<Sus, CliError> {
    Ok(validate_sus(read_instance(path)?)?)
}

fn size_cap() -> Result<usize, CliError> {
    match std::env::var(SIZE_CAP_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::BadCap(v)),
        Err(_) => Ok(DEFAULT_SIZE_CAP),
    }
}

fn envelope_of(s: &Sus) -> Result<FilterLattice<'_>, CliError> {
    Ok(build_envelope_capped(s, size_cap()?)?)
}

fn json_line(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data");
    s.push('\n');
    s
}

fn cmd_check(path: &Path, json: bool) -> CmdResult {
    let poset = read_instance(path)?;
    match validate_sus(poset) {
        Ok(s) => {
            let text = if json {
                json_line(&serde_json::json!({
                    "valid": true,
                    "kind": "distributive strong upper semilattice",
                    "size": s.len(),
                    "lattice": s.is_lattice(),
                    "meet_irreducibles": s.meet_irreducibles().iter().map(|&m| s.name(m)).collect::<Vec<_>>(),
                }))
            } else {
                format!("distributive strong upper semilattice ({} elements)\n", s.len())
            };
            Ok((EXIT_PASS, text))
        }
        Err(e) => {
            let text = if json {
                json_line(&serde_json::json!({ "valid": false, "error": e.to_string() }))
            } else {
                format!("{e}\n")
            };
            Ok((EXIT_FAIL, text))
        }
    }
}

#[derive(Serialize)]
struct FilterRecord {
    label: String,
    members: Vec<String>,
}

#[derive(Serialize)]
struct BirkhoffReport {
    size: usize,
    filters: Vec<FilterRecord>,
    covers: Vec<(String, String)>,
    nu: Vec<(String, String)>,
    nu_bijective: bool,
}

fn envelope_covers(e: &FilterLattice<'_>) -> Vec<(usize, usize)> {
    // G covers F iff G ⊂ F with one fewer member
    let mut covers = vec![];
    for f in 0..e.len() {
        for g in 0..e.len() {
            let (bf, bg) = (e.bits(f), e.bits(g));
            if bg & !bf == 0 && bf.count_ones() == bg.count_ones() + 1 {
                covers.push((f, g));
            }
        }
    }
    covers
}

fn birkhoff_report(e: &FilterLattice<'_>) -> BirkhoffReport {
    let s = e.source();
    let mut covers: Vec<(String, String)> =
        envelope_covers(e).into_iter().map(|(f, g)| (e.label(f), e.label(g))).collect();
    covers.sort();
    BirkhoffReport {
        size: e.len(),
        filters: (0..e.len())
            .map(|f| FilterRecord {
                label: e.label(f),
                members: e.members(f).into_iter().map(|m| s.name(m).to_string()).collect(),
            })
            .collect(),
        covers,
        nu: (0..s.len()).map(|x| (s.name(x).to_string(), e.label(e.nu(x)))).collect(),
        nu_bijective: e.len() == s.len(),
    }
}

#[derive(Serialize)]
struct ValuationEnvelopeRecord {
    form: String,
    filter: String,
    preimage: Option<String>,
}

#[derive(Serialize)]
struct EnvelopeReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    birkhoff: Option<BirkhoffReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    valuation: Option<Vec<ValuationEnvelopeRecord>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    equivalence: Option<crate::report::VerificationItem>,
}

fn cmd_envelope(path: &Path, method: Method, json: bool, seed: u64) -> CmdResult {
    let s = load(path)?;
    let e = envelope_of(&s)?;
    let mut report = EnvelopeReport { birkhoff: None, valuation: None, equivalence: None };
    let mut code = EXIT_PASS;
    if method != Method::Valuation {
        report.birkhoff = Some(birkhoff_report(&e));
    }
    if method != Method::Birkhoff {
        let r = build_vring(&s);
        match build_venvelope(&r, &e) {
            Ok(env) => {
                report.valuation = Some(
                    (0..env.len())
                        .map(|i| ValuationEnvelopeRecord {
                            form: r.display(env.element(i)),
                            filter: e.label(env.filter_of(i)),
                            preimage: env.preimage(i).map(|x| s.name(x).to_string()),
                        })
                        .collect(),
                );
            }
            Err(err) => {
                report.equivalence = Some(crate::report::VerificationItem::fail("equivalence", err.to_string()));
                code = EXIT_FAIL;
            }
        }
        if method == Method::Both && code == EXIT_PASS {
            let item = check_equivalence(&r, &e, seed);
            if !item.passed() {
                code = EXIT_FAIL;
            }
            report.equivalence = Some(item);
        }
    }
    if json {
        return Ok((code, json_line(&report)));
    }
    let mut text = String::new();
    if let Some(b) = &report.birkhoff {
        let _ = writeln!(text, "filter envelope: {} elements", b.size);
        for f in &b.filters {
            let _ = writeln!(text, "  {}", f.label);
        }
        let _ = writeln!(text, "covers:");
        for (lo, hi) in &b.covers {
            let _ = writeln!(text, "  {lo} < {hi}");
        }
        let _ = writeln!(text, "nu:");
        for (x, f) in &b.nu {
            let _ = writeln!(text, "  {x} -> {f}");
        }
        let _ = writeln!(text, "nu bijective: {}", yes_no(b.nu_bijective));
    }
    if let Some(v) = &report.valuation {
        let _ = writeln!(text, "valuation envelope: {} elements", v.len());
        for rec in v {
            let origin = match &rec.preimage {
                Some(x) => format!("iota({x})"),
                None => "new".to_string(),
            };
            let _ = writeln!(text, "  {}  <-> {}  [{origin}]", rec.form, rec.filter);
        }
    }
    if let Some(item) = &report.equivalence {
        let _ = writeln!(text, "isomorphic: {}", yes_no(item.passed()));
        if let Some(w) = &item.witness {
            let _ = writeln!(text, "  {w}");
        }
    }
    Ok((code, text))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

#[derive(Serialize)]
struct VringReport {
    generators: usize,
    hnf_basis: Vec<String>,
    snf_invariants: Vec<String>,
    rank: usize,
    iota: Vec<(String, String)>,
    basis: crate::report::VerificationItem,
}

fn cmd_vring(path: &Path, json: bool) -> CmdResult {
    let s = load(path)?;
    let r = build_vring(&s);
    let basis = check_basis(&r);
    let code = if basis.passed() { EXIT_PASS } else { EXIT_FAIL };
    let report = VringReport {
        generators: r.ideal().generators().len(),
        hnf_basis: r
            .ideal()
            .hnf()
            .rows()
            .iter()
            .map(|row| FreeVector::from_coeffs(row.clone()).display(r.labels()).to_string())
            .collect(),
        snf_invariants: r.ideal().snf_invariants().iter().map(|d| d.to_string()).collect(),
        rank: r.rank(),
        iota: (0..s.len()).map(|x| (s.name(x).to_string(), r.display(r.iota(x)))).collect(),
        basis,
    };
    if json {
        return Ok((code, json_line(&report)));
    }
    let mut text = String::new();
    let _ = writeln!(text, "relation generators: {}", report.generators);
    let _ = writeln!(text, "relation basis ({}):", report.hnf_basis.len());
    for row in &report.hnf_basis {
        let _ = writeln!(text, "  {row}");
    }
    let _ = writeln!(text, "snf invariants: [{}]", report.snf_invariants.join(", "));
    let _ = writeln!(text, "rank: {}", report.rank);
    let _ = writeln!(text, "iota:");
    for (x, v) in &report.iota {
        let _ = writeln!(text, "  {x} -> {v}");
    }
    let verdict = if report.basis.passed() { "yes" } else { "no" };
    let _ = writeln!(text, "meet-irreducibles form a basis: {verdict}");
    if let Some(w) = &report.basis.witness {
        let _ = writeln!(text, "  {w}");
    }
    Ok((code, text))
}

fn outcome_tag(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "PASS",
        Outcome::Fail => "FAIL",
        Outcome::NotApplicable => "N/A ",
    }
}

fn cmd_verify(path: &Path, json: bool, seed: u64) -> CmdResult {
    let s = load(path)?;
    let report = run_suite_capped(&s, seed, size_cap()?);
    let code = if report.all_passed() { EXIT_PASS } else { EXIT_FAIL };
    if json {
        return Ok((code, json_line(&report)));
    }
    let mut text = format!("instance {} ({} elements)\n", report.instance_id, report.size);
    for item in &report.items {
        let _ = write!(text, "{} {}", outcome_tag(item.outcome), item.name);
        if let Some(w) = &item.witness {
            let _ = write!(text, ": {w}");
        }
        text.push('\n');
        for note in &item.notes {
            let _ = writeln!(text, "       {note}");
        }
    }
    let _ = writeln!(text, "{}", if report.all_passed() { "all checks passed" } else { "some checks failed" });
    Ok((code, text))
}

fn cmd_sweep(max_size: usize, jobs: usize, json: bool, seed: u64) -> CmdResult {
    let summary = sweep(max_size, jobs, seed)?;
    let code = if summary.all_passed() { EXIT_PASS } else { EXIT_FAIL };
    if json {
        return Ok((code, json_line(&summary)));
    }
    let mut text = String::new();
    let _ = writeln!(text, "size  instances  passed  failed-items  bottom-caveat");
    for s in &summary.sizes {
        let _ = writeln!(
            text,
            "{:>4}  {:>9}  {:>6}  {:>12}  {:>13}",
            s.size, s.instances, s.passed, s.failed_items, s.bottom_caveat
        );
    }
    let _ = writeln!(
        text,
        "total {:>9}  {:>6}  {:>12}  {:>13}",
        summary.instances, summary.passed, summary.failed_items, summary.bottom_caveat
    );
    for (report, item) in summary.failures() {
        let _ = writeln!(text, "FAIL {} {}: {}", report.instance_id, item.name, item.witness.as_deref().unwrap_or(""));
    }
    let _ = writeln!(text, "wall time: {:.2}s", summary.wall_time.as_secs_f64());
    Ok((code, text))
}

fn dot_text(name: &str, mut nodes: Vec<String>, mut edges: Vec<(String, String)>) -> String {
    nodes.sort();
    edges.sort();
    let mut text = format!("digraph {name} {{\n  rankdir=BT;\n");
    for n in &nodes {
        let _ = writeln!(text, "  {n:?};");
    }
    for (lo, hi) in &edges {
        let _ = writeln!(text, "  {lo:?} -> {hi:?};");
    }
    text.push_str("}\n");
    text
}

fn cmd_dot(path: &Path, target: Target) -> CmdResult {
    match target {
        Target::Poset => {
            let p = read_instance(path)?;
            Ok((EXIT_PASS, dot_text("poset", p.names().to_vec(), p.labeled_covers())))
        }
        Target::Envelope => {
            let s = load(path)?;
            let e = envelope_of(&s)?;
            let nodes = (0..e.len()).map(|f| e.label(f)).collect();
            let edges = envelope_covers(&e).into_iter().map(|(f, g)| (e.label(f), e.label(g))).collect();
            Ok((EXIT_PASS, dot_text("envelope", nodes, edges)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const V3: &str = r#"{"elements": ["a", "b", "1"], "covers": [["a", "1"], ["b", "1"]]}"#;

    #[test]
    fn document_round_trip() {
        let doc = InstanceDocument::parse(V3).unwrap();
        assert_eq!(InstanceDocument::parse(&doc.serialize()).unwrap(), doc);
        let p = doc.to_poset().unwrap();
        assert_eq!(InstanceDocument::from_poset(&p), doc);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(InstanceDocument::parse("{"), Err(CliError::Parse(_))));
        assert!(matches!(
            InstanceDocument::parse(r#"{"elements": ["a"], "covers": [["a", "z"]]}"#),
            Err(CliError::Order(OrderError::UnknownLabel(_)))
        ));
        assert!(matches!(
            InstanceDocument::parse(r#"{"elements": ["a"], "covers": [], "extra": 1}"#),
            Err(CliError::Parse(_))
        ));
    }

    #[test]
    fn dot_nodes_and_edges_sorted() {
        let text = dot_text("poset", vec!["b".into(), "a".into()], vec![("b".into(), "a".into())]);
        assert_eq!(text, "digraph poset {\n  rankdir=BT;\n  \"a\";\n  \"b\";\n  \"b\" -> \"a\";\n}\n");
    }
}
