//! Integer lattices in ℤⁿ: row-style Hermite normal form, Smith
//! invariants, and a small exact rational solver.
//!
//! All arithmetic is arbitrary precision.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type IntVec = Vec<BigInt>;

/// Row basis of a sublattice of ℤⁿ in Hermite normal form.
///
/// Rows are in echelon order by pivot column. After [`Hnf::normalize`]
/// every pivot is positive and every entry above a pivot lies in
/// `[0, pivot)`, which makes the basis unique for the lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hnf {
    ncols: usize,
    rows: Vec<IntVec>,
    pivots: Vec<usize>,
    normalized: bool,
}

fn first_nonzero(v: &[BigInt]) -> Option<usize> {
    v.iter().position(|x| !x.is_zero())
}

/// `v -= q * r`, skipping zero entries of `r`.
fn sub_multiple(v: &mut [BigInt], q: &BigInt, r: &[BigInt]) {
    if q.is_zero() {
        return;
    }
    for (vi, ri) in v.iter_mut().zip(r) {
        if !ri.is_zero() {
            *vi -= q * ri;
        }
    }
}

impl Hnf {
    pub fn new(ncols: usize) -> Self {
        Hnf { ncols, rows: vec![], pivots: vec![], normalized: true }
    }

    pub fn from_rows<I: IntoIterator<Item = IntVec>>(ncols: usize, rows: I) -> Self {
        let mut h = Hnf::new(ncols);
        for r in rows {
            h.insert(r);
        }
        h.normalize();
        h
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Number of basis rows, i.e. the rank of the lattice.
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[IntVec] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Columns without a pivot, in increasing order.
    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.ncols).filter(|c| self.pivots.binary_search(c).is_err()).collect()
    }

    /// Adds `v` to the generating set. Returns `true` if the rank increased.
    pub fn insert(&mut self, mut v: IntVec) -> bool {
        assert_eq!(v.len(), self.ncols, "vector length");
        loop {
            let Some(c) = first_nonzero(&v) else { return false };
            match self.pivots.binary_search(&c) {
                Ok(i) => {
                    let a = self.rows[i][c].clone();
                    let b = v[c].clone();
                    if b.is_multiple_of(&a) {
                        let q = &b / &a;
                        sub_multiple(&mut v, &q, &self.rows[i]);
                        continue;
                    }
                    // Unimodular 2x2 step: the new row has pivot gcd(a, b),
                    // the remainder vector is zero at column c.
                    let eg = a.extended_gcd(&b);
                    let (g, s, t) = (eg.gcd, eg.x, eg.y);
                    let (ag, bg) = (&a / &g, &b / &g);
                    let r = &self.rows[i];
                    let new_row: IntVec = r.iter().zip(&v).map(|(ri, vi)| &s * ri + &t * vi).collect();
                    let rest: IntVec = r.iter().zip(&v).map(|(ri, vi)| &bg * ri - &ag * vi).collect();
                    self.rows[i] = new_row;
                    self.normalized = false;
                    v = rest;
                }
                Err(i) => {
                    self.rows.insert(i, v);
                    self.pivots.insert(i, c);
                    self.normalized = false;
                    return true;
                }
            }
        }
    }

    /// Brings the basis into canonical form.
    pub fn normalize(&mut self) {
        if self.normalized {
            return;
        }
        for (row, &p) in self.rows.iter_mut().zip(&self.pivots) {
            if row[p].is_negative() {
                for x in row.iter_mut() {
                    *x = -&*x;
                }
            }
        }
        let k = self.rows.len();
        for i in (0..k).rev() {
            for j in (i + 1)..k {
                let p = self.pivots[j];
                let q = self.rows[i][p].div_floor(&self.rows[j][p]);
                if !q.is_zero() {
                    let (head, tail) = self.rows.split_at_mut(j);
                    sub_multiple(&mut head[i], &q, &tail[0]);
                }
            }
        }
        self.normalized = true;
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Unique representative of `v` modulo the lattice.
    pub fn reduce(&self, v: &[BigInt]) -> IntVec {
        assert!(self.normalized, "reduce requires a normalized basis");
        assert_eq!(v.len(), self.ncols, "vector length");
        let mut out = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let q = out[p].div_floor(&row[p]);
            sub_multiple(&mut out, &q, row);
        }
        out
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    /// Checks the shape conditions of a normalized Hermite basis.
    pub fn is_canonical(&self) -> bool {
        let echelon = self.rows.iter().zip(&self.pivots).all(|(r, &p)| first_nonzero(r) == Some(p))
            && self.pivots.windows(2).all(|w| w[0] < w[1]);
        let reduced = self.rows.iter().enumerate().all(|(i, r)| {
            r[self.pivots[i]].is_positive()
                && self.pivots[i + 1..].iter().enumerate().all(|(dj, &p)| {
                    let d = &self.rows[i + 1 + dj][p];
                    !r[p].is_negative() && &r[p] < d
                })
        });
        echelon && reduced
    }
}

/// Invariant factors (nonzero diagonal of the Smith form) of the matrix
/// with the given rows, in divisibility order.
pub fn smith_invariants(rows: &[IntVec]) -> Vec<BigInt> {
    let mut a: Vec<IntVec> = rows.to_vec();
    let nr = a.len();
    let nc = a.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    let mut t = 0;
    while t < nr.min(nc) {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..nr {
            for j in t..nc {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        loop {
            let mut clean = true;
            for i in (t + 1)..nr {
                if !a[i][t].is_zero() {
                    let q = &a[i][t] / &a[t][t];
                    let (head, tail) = a.split_at_mut(i);
                    sub_multiple(&mut tail[0], &q, &head[t]);
                    clean &= a[i][t].is_zero();
                }
            }
            for j in (t + 1)..nc {
                if !a[t][j].is_zero() {
                    let q = &a[t][j] / &a[t][t];
                    for row in a.iter_mut() {
                        let d = &q * &row[t];
                        row[j] -= d;
                    }
                    clean &= a[t][j].is_zero();
                }
            }
            if !clean {
                // a remainder smaller than the pivot exists in row/column t
                let mut best = (t, t);
                for i in t..nr {
                    if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t..nc {
                    if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                a.swap(t, best.0);
                for row in a.iter_mut() {
                    row.swap(t, best.1);
                }
                continue;
            }
            let p = a[t][t].clone();
            let bad = ((t + 1)..nr).find(|&i| ((t + 1)..nc).any(|j| !a[i][j].is_multiple_of(&p)));
            match bad {
                Some(i) => {
                    let (head, tail) = a.split_at_mut(i);
                    for (x, y) in head[t].iter_mut().zip(&tail[0]) {
                        *x += y;
                    }
                }
                None => break,
            }
        }
        out.push(a[t][t].abs());
        t += 1;
    }
    out
}

/// Solves `a · x = b` exactly over ℚ for square nonsingular `a`.
pub fn solve_rational(a: &[IntVec], b: &[BigInt]) -> Option<Vec<BigRational>> {
    let n = a.len();
    if b.len() != n || a.iter().any(|r| r.len() != n) {
        return None;
    }
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| row.iter().chain(std::iter::once(bi)).map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let inv = BigRational::one() / &m[col][col];
        for x in m[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let (pivot_row, other) = if r < col {
                    let (h, t) = m.split_at_mut(col);
                    (&t[0], &mut h[r])
                } else {
                    let (h, t) = m.split_at_mut(r);
                    (&h[col], &mut t[0])
                };
                for (x, p) in other.iter_mut().zip(pivot_row) {
                    *x -= &f * p;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

pub fn int_vec(xs: &[i64]) -> IntVec {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}
