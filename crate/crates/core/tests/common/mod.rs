//! Independent oracles. Nothing here calls the library's lattice
//! operations; everything is recomputed from the order relation.
#![allow(dead_code)]

use envelope_kit::order::Poset;

pub struct Relation {
    pub n: usize,
    pub leq: Vec<bool>,
}

impl Relation {
    pub fn of(p: &Poset) -> Self {
        let n = p.len();
        Relation { n, leq: (0..n * n).map(|k| p.leq(k / n, k % n)).collect() }
    }

    pub fn le(&self, x: usize, y: usize) -> bool {
        self.leq[x * self.n + y]
    }

    /// Greatest element of the common lower bounds inside `within`.
    pub fn glb(&self, within: &[usize], x: usize, y: usize) -> Option<usize> {
        let lower: Vec<usize> = within.iter().copied().filter(|&z| self.le(z, x) && self.le(z, y)).collect();
        lower.iter().copied().find(|&g| lower.iter().all(|&z| self.le(z, g)))
    }

    /// Least element of the common upper bounds inside `within`.
    pub fn lub(&self, within: &[usize], x: usize, y: usize) -> Option<usize> {
        let upper: Vec<usize> = within.iter().copied().filter(|&z| self.le(x, z) && self.le(y, z)).collect();
        upper.iter().copied().find(|&l| upper.iter().all(|&z| self.le(l, z)))
    }

    pub fn all(&self) -> Vec<usize> {
        (0..self.n).collect()
    }

    pub fn interval(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.n).filter(|&z| self.le(a, z) && self.le(z, b)).collect()
    }

    pub fn is_lattice_on(&self, within: &[usize]) -> bool {
        within
            .iter()
            .all(|&x| within.iter().all(|&y| self.glb(within, x, y).is_some() && self.lub(within, x, y).is_some()))
    }

    /// Searches `within` (assumed a lattice) for a five-element sublattice
    /// isomorphic to M3 or N5.
    pub fn has_forbidden_sublattice(&self, within: &[usize]) -> bool {
        let meet = |x, y| self.glb(within, x, y).expect("lattice");
        let join = |x, y| self.lub(within, x, y).expect("lattice");
        for &o in within {
            for &i in within {
                if o == i || !self.le(o, i) {
                    continue;
                }
                for &x in within {
                    for &y in within {
                        for &z in within {
                            let distinct = [o, i, x, y, z];
                            if (0..5).any(|p| (p + 1..5).any(|q| distinct[p] == distinct[q])) {
                                continue;
                            }
                            let pair = |u, v| meet(u, v) == o && join(u, v) == i;
                            let m3 = pair(x, y) && pair(y, z) && pair(x, z);
                            let n5 = self.le(x, z) && pair(x, y) && pair(z, y);
                            if m3 || n5 {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }

    /// Top exists, every pair has a least upper bound, every pair with a
    /// common lower bound has a greatest one, and every interval has no
    /// M3 or N5 sublattice.
    pub fn is_distributive_sus(&self) -> bool {
        let all = self.all();
        let has_top = all.iter().any(|&t| all.iter().all(|&z| self.le(z, t)));
        if !has_top {
            return false;
        }
        for &x in &all {
            for &y in &all {
                if self.lub(&all, x, y).is_none() {
                    return false;
                }
                let bounded = all.iter().any(|&z| self.le(z, x) && self.le(z, y));
                if bounded && self.glb(&all, x, y).is_none() {
                    return false;
                }
            }
        }
        all.iter().all(|&a| {
            all.iter().filter(|&&b| self.le(a, b)).all(|&b| !self.has_forbidden_sublattice(&self.interval(a, b)))
        })
    }
}

/// Partial orders on `n ≤ 5` labeled points by testing every relation on
/// the off-diagonal pairs; returns (labeled, up to isomorphism) counts.
pub fn direct_poset_counts(n: usize) -> (usize, usize) {
    assert!(n <= 5);
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let perms = permutations(n);
    let mut labeled = 0;
    let mut classes = std::collections::HashSet::new();
    for mask in 0u64..(1 << pairs.len()) {
        let mut rel = vec![false; n * n];
        for i in 0..n {
            rel[i * n + i] = true;
        }
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if mask & (1 << k) != 0 {
                rel[i * n + j] = true;
            }
        }
        let antisymmetric = pairs.iter().all(|&(i, j)| !(rel[i * n + j] && rel[j * n + i]));
        let transitive =
            (0..n).all(|i| (0..n).all(|j| !rel[i * n + j] || (0..n).all(|k| !rel[j * n + k] || rel[i * n + k])));
        if antisymmetric && transitive {
            labeled += 1;
            let canon = perms
                .iter()
                .map(|p| (0..n * n).map(|k| rel[p[k / n] * n + p[k % n]]).collect::<Vec<bool>>())
                .min()
                .expect("at least one permutation");
            classes.insert(canon);
        }
    }
    (labeled, classes.len())
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

pub const UNLABELED_POSET_COUNTS: [usize; 7] = [1, 2, 5, 16, 63, 318, 2045];
pub const LABELED_POSET_COUNTS: [usize; 5] = [1, 3, 19, 219, 4231];

pub fn doc(elements: &[&str], covers: &[(&str, &str)]) -> String {
    let covers: Vec<[&str; 2]> = covers.iter().map(|&(a, b)| [a, b]).collect();
    serde_json::json!({ "elements": elements, "covers": covers }).to_string()
}

pub fn v3_doc() -> String {
    doc(&["a", "b", "1"], &[("a", "1"), ("b", "1")])
}

pub fn b2_doc() -> String {
    doc(&["0", "a", "b", "1"], &[("0", "a"), ("0", "b"), ("a", "1"), ("b", "1")])
}

pub fn k4_doc() -> String {
    doc(&["a", "b", "t", "1"], &[("a", "t"), ("b", "t"), ("t", "1")])
}

pub fn m3_doc() -> String {
    doc(&["0", "a", "b", "c", "1"], &[("0", "a"), ("0", "b"), ("0", "c"), ("a", "1"), ("b", "1"), ("c", "1")])
}

pub fn n5_doc() -> String {
    doc(&["0", "a", "c", "b", "1"], &[("0", "a"), ("a", "c"), ("c", "1"), ("0", "b"), ("b", "1")])
}

/// Writes `contents` to a fresh file under the system temp directory.
pub fn temp_file(name: &str, contents: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("envelope-kit-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join(name);
    std::fs::write(&path, contents).expect("write temp file");
    path
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the built binary.
pub fn run_bin(args: &[&str]) -> Run {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_envelope-kit")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).expect("utf-8"),
        stderr: String::from_utf8(out.stderr).expect("utf-8"),
    }
}
