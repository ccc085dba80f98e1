//! The valuation ring `V(L)`: the free abelian group on the elements of `L`
//! modulo the valuation relations
//!
//! ```text
//! a∨b∨c + (a∨c)∧(b∨c) − a∨c − b∨c
//! ```
//!
//! with multiplication induced by join. Equality in the quotient is decided
//! by reducing against a Hermite basis of the relation lattice.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::birkhoff::SemiHom;
use crate::intmat::{smith_invariants, solve_rational, Hnf};
use crate::report::VerificationItem;
use crate::semilattice::Sus;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VringError {
    #[error("NotAValuation({0})")]
    NotAValuation(String),
    #[error("FlagsNotVerified({0})")]
    FlagsNotVerified(String),
    #[error("NotWellDefined({0})")]
    NotWellDefined(String),
    #[error("NotMinimal({0})")]
    NotMinimal(String),
    #[error("NotALattice")]
    NotALattice,
    #[error("NotABasis")]
    NotABasis,
    #[error("ShapeMismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
}

/// An element of `ℤ^L`: one integer coefficient per element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeVector(Vec<BigInt>);

impl FreeVector {
    pub fn zero(n: usize) -> Self {
        FreeVector(vec![BigInt::zero(); n])
    }

    pub fn unit(n: usize, x: usize) -> Self {
        let mut v = Self::zero(n);
        v.0[x] = BigInt::one();
        v
    }

    pub fn from_coeffs(coeffs: Vec<BigInt>) -> Self {
        FreeVector(coeffs)
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        FreeVector(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.0
    }

    pub fn coeff(&self, x: usize) -> &BigInt {
        &self.0[x]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Adds `c · e_x`.
    pub fn add_term(&mut self, x: usize, c: impl Into<BigInt>) {
        self.0[x] += c.into();
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        FreeVector(self.0.iter().map(|x| x * c).collect())
    }

    /// Renders with element labels, e.g. `a + b - 1`.
    pub fn display<'a>(&'a self, labels: &'a [String]) -> impl fmt::Display + 'a {
        LabeledVector { v: self, labels }
    }
}

struct LabeledVector<'a> {
    v: &'a FreeVector,
    labels: &'a [String],
}

impl fmt::Display for LabeledVector<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, label) in self.v.0.iter().zip(self.labels) {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            match (first, c.is_negative()) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            if mag.is_one() {
                write!(f, "{label}")?;
            } else {
                write!(f, "{mag}*{label}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for &FreeVector {
    type Output = FreeVector;
    fn add(self, rhs: &FreeVector) -> FreeVector {
        FreeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &FreeVector {
    type Output = FreeVector;
    fn sub(self, rhs: &FreeVector) -> FreeVector {
        FreeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &FreeVector {
    type Output = FreeVector;
    fn neg(self) -> FreeVector {
        FreeVector(self.0.iter().map(|a| -a).collect())
    }
}

/// The relation subgroup `M(L)`: its generators, a Hermite basis and the
/// invariant factors of the relation matrix.
#[derive(Debug, Clone)]
pub struct RelationIdeal {
    generators: Vec<FreeVector>,
    hnf: Hnf,
    snf_invariants: Vec<BigInt>,
}

impl RelationIdeal {
    pub fn generators(&self) -> &[FreeVector] {
        &self.generators
    }

    pub fn hnf(&self) -> &Hnf {
        &self.hnf
    }

    pub fn snf_invariants(&self) -> &[BigInt] {
        &self.snf_invariants
    }
}

/// Relation vector of the triple `(a, b, c)`, as sparse `(element, coeff)`
/// terms with zero coefficients removed.
fn relation_terms(s: &Sus, a: usize, b: usize, c: usize) -> Vec<(usize, i64)> {
    let ac = s.join(a, c);
    let bc = s.join(b, c);
    let abc = s.join(ac, bc);
    let m = s.meet(ac, bc).expect("a∨c and b∨c both lie above c");
    let mut terms: Vec<(usize, i64)> = vec![(abc, 1), (m, 1), (ac, -1), (bc, -1)];
    terms.sort_unstable();
    let mut merged: Vec<(usize, i64)> = Vec::with_capacity(4);
    for (x, k) in terms {
        match merged.last_mut() {
            Some((y, acc)) if *y == x => *acc += k,
            _ => merged.push((x, k)),
        }
    }
    merged.retain(|&(_, k)| k != 0);
    merged
}

/// One vector per ordered triple `(a, b, c)`, zero vectors dropped and
/// duplicates removed (first occurrence kept).
pub fn relation_generators(s: &Sus) -> Vec<FreeVector> {
    let n = s.len();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let terms = relation_terms(s, a, b, c);
                if terms.is_empty() || !seen.insert(terms.clone()) {
                    continue;
                }
                let mut v = FreeVector::zero(n);
                for (x, k) in terms {
                    v.add_term(x, k);
                }
                out.push(v);
            }
        }
    }
    out
}

/// A group valuation into `ℤ` (`modulus == 0`) or `ℤ/m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupValuation {
    pub modulus: u64,
    pub values: Vec<BigInt>,
}

impl GroupValuation {
    pub fn new(modulus: u64, values: Vec<BigInt>) -> Self {
        let mut v = GroupValuation { modulus, values };
        v.values = v.values.iter().map(|x| v.reduce(x.clone())).collect();
        v
    }

    pub fn integer(values: &[i64]) -> Self {
        Self::new(0, values.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn constant(n: usize, modulus: u64, c: i64) -> Self {
        Self::new(modulus, vec![BigInt::from(c); n])
    }

    /// Canonical residue in the target group.
    pub fn reduce(&self, x: BigInt) -> BigInt {
        if self.modulus == 0 {
            x
        } else {
            x.mod_floor(&BigInt::from(self.modulus))
        }
    }

    pub fn value(&self, x: usize) -> &BigInt {
        &self.values[x]
    }

    /// Linear extension to `ℤ^L`.
    pub fn evaluate(&self, v: &FreeVector) -> BigInt {
        self.reduce(v.0.iter().zip(&self.values).map(|(c, f)| c * f).sum())
    }
}

/// `f(x∨y∨z) + f((x∨z)∧(y∨z)) = f(x∨z) + f(y∨z)` for every triple.
pub fn is_valuation(s: &Sus, f: &GroupValuation) -> bool {
    if f.values.len() != s.len() {
        return false;
    }
    let n = s.len();
    (0..n).all(|x| {
        (0..n).all(|y| {
            (0..n).all(|z| {
                let terms = relation_terms(s, x, y, z);
                f.reduce(terms.iter().map(|&(e, k)| BigInt::from(k) * &f.values[e]).sum()).is_zero()
            })
        })
    })
}

/// `V(L)` presented as `ℤ^L / M(L)`.
#[derive(Debug, Clone)]
pub struct ValuationRing<'s> {
    source: &'s Sus,
    ideal: RelationIdeal,
    rank: usize,
    iota_table: Vec<FreeVector>,
    basis_cols: Vec<usize>,
}

pub fn build_vring(s: &Sus) -> ValuationRing<'_> {
    let n = s.len();
    let generators = relation_generators(s);
    let hnf = Hnf::from_rows(n, generators.iter().map(|g| g.0.clone()));
    let snf_invariants = smith_invariants(hnf.rows());
    let basis_cols = hnf.free_columns();
    let rank = basis_cols.len();
    let ideal = RelationIdeal { generators, hnf, snf_invariants };
    let mut r = ValuationRing { source: s, ideal, rank, iota_table: vec![], basis_cols };
    r.iota_table = (0..n).map(|x| r.canonical(&FreeVector::unit(n, x))).collect();
    r
}

impl<'s> ValuationRing<'s> {
    pub fn source(&self) -> &'s Sus {
        self.source
    }

    pub fn ideal(&self) -> &RelationIdeal {
        &self.ideal
    }

    /// Rank of `V(L)` as an abelian group (its free part).
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn basis_cols(&self) -> &[usize] {
        &self.basis_cols
    }

    pub fn iota_table(&self) -> &[FreeVector] {
        &self.iota_table
    }

    pub fn dim(&self) -> usize {
        self.source.len()
    }

    pub fn labels(&self) -> &[String] {
        self.source.poset().names()
    }

    pub fn is_torsion_free(&self) -> bool {
        self.ideal.snf_invariants.iter().all(One::is_one)
    }

    /// Unique representative of `v + M(L)`.
    pub fn canonical(&self, v: &FreeVector) -> FreeVector {
        FreeVector(self.ideal.hnf.reduce(&v.0))
    }

    pub fn equivalent(&self, v: &FreeVector, w: &FreeVector) -> bool {
        self.canonical(&(v - w)).is_zero()
    }

    pub fn iota(&self, x: usize) -> &FreeVector {
        &self.iota_table[x]
    }

    /// Bilinear extension of join, reduced.
    pub fn multiply(&self, u: &FreeVector, v: &FreeVector) -> FreeVector {
        self.canonical(&self.multiply_raw(u, v))
    }

    fn multiply_raw(&self, u: &FreeVector, v: &FreeVector) -> FreeVector {
        let n = self.dim();
        let mut out = FreeVector::zero(n);
        for (x, cx) in u.0.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            for (y, cy) in v.0.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                out.0[self.source.join(x, y)] += cx * cy;
            }
        }
        out
    }

    pub fn add(&self, u: &FreeVector, v: &FreeVector) -> FreeVector {
        self.canonical(&(u + v))
    }

    /// True if `v` has infinite order in the quotient, i.e. it is not in
    /// the rational span of the relations.
    pub fn has_infinite_order(&self, v: &FreeVector) -> bool {
        let mut h = self.ideal.hnf.clone();
        h.insert(v.0.clone())
    }

    /// Whether `vs` are linearly independent in `V(L) ⊗ ℚ`.
    pub fn independent(&self, vs: &[FreeVector]) -> bool {
        let mut h = self.ideal.hnf.clone();
        vs.iter().all(|v| h.insert(v.0.clone()))
    }

    pub fn display(&self, v: &FreeVector) -> String {
        v.display(self.labels()).to_string()
    }
}

/// The homomorphism `V(L) → G` induced by a valuation.
#[derive(Debug, Clone)]
pub struct InducedHom {
    valuation: GroupValuation,
}

impl InducedHom {
    pub fn apply(&self, v: &FreeVector) -> BigInt {
        self.valuation.evaluate(v)
    }

    pub fn valuation(&self) -> &GroupValuation {
        &self.valuation
    }
}

pub fn induced_hom(r: &ValuationRing<'_>, f: &GroupValuation) -> Result<InducedHom, VringError> {
    if f.values.len() != r.dim() {
        return Err(VringError::ShapeMismatch { expected: r.dim(), got: f.values.len() });
    }
    if let Some(g) = r.ideal.generators.iter().find(|g| !f.evaluate(g).is_zero()) {
        return Err(VringError::NotAValuation(r.display(g)));
    }
    Ok(InducedHom { valuation: f.clone() })
}

/// `V(h)`: the linear extension of `x ↦ ι₂(h(x))`.
#[derive(Debug, Clone)]
pub struct LinearMap<'a, 'b> {
    target: &'a ValuationRing<'b>,
    images: Vec<FreeVector>,
}

impl LinearMap<'_, '_> {
    pub fn apply(&self, v: &FreeVector) -> FreeVector {
        let mut out = FreeVector::zero(self.target.dim());
        for (x, c) in v.0.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            for (o, i) in out.0.iter_mut().zip(&self.images[x].0) {
                *o += c * i;
            }
        }
        self.target.canonical(&out)
    }

    pub fn images(&self) -> &[FreeVector] {
        &self.images
    }

    /// `self ∘ first`.
    pub fn after<'c, 'd>(&self, first: &LinearMap<'c, 'd>) -> Vec<FreeVector> {
        first.images.iter().map(|v| self.apply(v)).collect()
    }
}

pub fn v_functor<'a, 'b>(
    r1: &ValuationRing<'_>,
    r2: &'a ValuationRing<'b>,
    h: &SemiHom<'_>,
) -> Result<LinearMap<'a, 'b>, VringError> {
    h.require_verified().map_err(|e| VringError::FlagsNotVerified(e.to_string()))?;
    if h.domain().len() != r1.dim() || h.codomain().len() != r2.dim() {
        return Err(VringError::ShapeMismatch { expected: r1.dim(), got: h.domain().len() });
    }
    let images = (0..r1.dim()).map(|x| r2.iota(h.apply(x)).clone()).collect();
    let map = LinearMap { target: r2, images };
    if let Some(g) = r1.ideal.generators.iter().find(|g| !map.apply(g).is_zero()) {
        return Err(VringError::NotWellDefined(r1.display(g)));
    }
    Ok(map)
}

/// Each generator times each `ι(t)` reduces to zero.
pub fn check_ideal(r: &ValuationRing<'_>) -> VerificationItem {
    let n = r.dim();
    let failure = r.ideal.generators.iter().find_map(|g| {
        (0..n).find_map(|t| {
            let prod = r.multiply(g, &FreeVector::unit(n, t));
            (!prod.is_zero()).then(|| format!("({}) * {}", r.display(g), r.source.name(t)))
        })
    });
    VerificationItem::from_first_failure("ideal", failure)
}

pub fn check_iota_injective(r: &ValuationRing<'_>) -> VerificationItem {
    let s = r.source;
    let mut failure = None;
    'outer: for x in 0..s.len() {
        for y in (x + 1)..s.len() {
            if r.iota(x) == r.iota(y) {
                failure = Some(format!("iota({}) = iota({})", s.name(x), s.name(y)));
                break 'outer;
            }
        }
    }
    VerificationItem::from_first_failure("iota_injective", failure)
}

pub fn check_infinite_order(r: &ValuationRing<'_>) -> VerificationItem {
    let s = r.source;
    let failure = (0..s.len()).find_map(|l| {
        let v = r.iota(l);
        if v.is_zero() {
            Some(format!("iota({}) = 0", s.name(l)))
        } else if !r.has_infinite_order(v) {
            Some(format!("iota({}) is torsion", s.name(l)))
        } else {
            None
        }
    });
    VerificationItem::from_first_failure("infinite_order", failure)
}

/// `V(L)` is free of rank `|M|` with `{ι(m) : m ∈ M}` as a basis.
pub fn check_basis(r: &ValuationRing<'_>) -> VerificationItem {
    let s = r.source;
    let m = s.meet_irreducibles();
    let failure = if r.rank != m.len() {
        Some(format!("rank {} != |M| = {}", r.rank, m.len()))
    } else if !r.is_torsion_free() {
        Some(format!("torsion invariants {:?}", r.ideal.snf_invariants))
    } else if !spans_with(r, m) {
        Some("iota(M) does not span".to_string())
    } else {
        None
    };
    VerificationItem::from_first_failure("basis", failure)
}

/// Whether relations together with `e_m` (m ∈ ms) generate all of `ℤ^L`.
fn spans_with(r: &ValuationRing<'_>, ms: &[usize]) -> bool {
    let n = r.dim();
    let mut h = r.ideal.hnf.clone();
    for &m in ms {
        h.insert(FreeVector::unit(n, m).0);
    }
    h.normalize();
    h.rank() == n && h.rows().iter().zip(h.pivots()).all(|(row, &p)| row[p].is_one())
}

/// Builds the valuation with the given values on the meet-irreducibles
/// (in the order of `Sus::meet_irreducibles`), using that they form a
/// basis of `V(L)`.
pub fn valuation_from_basis_values(
    r: &ValuationRing<'_>,
    modulus: u64,
    values: &[BigInt],
) -> Result<GroupValuation, VringError> {
    let s = r.source;
    let m = s.meet_irreducibles();
    let n = r.dim();
    if values.len() != m.len() {
        return Err(VringError::ShapeMismatch { expected: m.len(), got: values.len() });
    }
    if r.rank != m.len() || !r.is_torsion_free() || !spans_with(r, m) {
        return Err(VringError::NotABasis);
    }
    // w · row = 0 for each relation row, w · e_m = value(m)
    let mut a: Vec<Vec<BigInt>> = r.ideal.hnf.rows().to_vec();
    let mut b: Vec<BigInt> = vec![BigInt::zero(); a.len()];
    for (&mi, v) in m.iter().zip(values) {
        a.push(FreeVector::unit(n, mi).0);
        b.push(v.clone());
    }
    let w = solve_rational(&a, &b).ok_or(VringError::NotABasis)?;
    let ints: Option<Vec<BigInt>> = w.into_iter().map(|q| q.is_integer().then(|| q.to_integer())).collect();
    Ok(GroupValuation::new(modulus, ints.ok_or(VringError::NotABasis)?))
}

/// Principal filters `↑x` of a finite lattice that are prime, by generator.
pub fn prime_filters(s: &Sus) -> Result<Vec<usize>, VringError> {
    let bottom = s.bottom().filter(|_| s.is_lattice()).ok_or(VringError::NotALattice)?;
    let n = s.len();
    Ok((0..n)
        .filter(|&g| g != bottom)
        .filter(|&g| (0..n).all(|x| (0..n).all(|y| !s.leq(g, s.join(x, y)) || s.leq(g, x) || s.leq(g, y))))
        .collect())
}

/// `ℤ₂` characteristic functions of the prime filters.
pub fn prime_filter_valuations(s: &Sus) -> Result<Vec<GroupValuation>, VringError> {
    Ok(prime_filters(s)?
        .into_iter()
        .map(|g| GroupValuation::new(2, (0..s.len()).map(|x| BigInt::from(s.leq(g, x) as u8)).collect()))
        .collect())
}

/// Prime-filter valuations are valuations and separate every pair.
pub fn check_prime_separation(s: &Sus) -> VerificationItem {
    const NAME: &str = "prime_separation";
    let Ok(vals) = prime_filter_valuations(s) else {
        return VerificationItem::not_applicable(NAME, "not a lattice");
    };
    let failure = (|| {
        if let Some(i) = vals.iter().position(|f| !is_valuation(s, f)) {
            return Some(format!("prime filter valuation {i} is not a valuation"));
        }
        for x in 0..s.len() {
            for y in (x + 1)..s.len() {
                if !vals.iter().any(|f| f.value(x) != f.value(y)) {
                    return Some(format!("{} and {} not separated", s.name(x), s.name(y)));
                }
            }
        }
        None
    })();
    VerificationItem::from_first_failure(NAME, failure)
}

/// The localization at a minimal element `a`: `θ_a = V(incl)` is injective,
/// `φ_a ∘ θ_a = id` with `φ_a = V(x ↦ x ∨ a)`, and
/// `M([a,𝟏]) = M(L) ∩ ℤ^[a,𝟏]`.
pub fn check_retract(r: &ValuationRing<'_>, a: usize) -> Result<VerificationItem, VringError> {
    let s = r.source;
    if !s.minimal_elements().contains(&a) {
        return Err(VringError::NotMinimal(s.name(a).into()));
    }
    let name = format!("retract[{}]", s.name(a));
    let (sub, members) = s.principal_filter(a);
    let ra = build_vring(&sub);
    let mut pos = vec![usize::MAX; s.len()];
    for (i, &m) in members.iter().enumerate() {
        pos[m] = i;
    }
    let incl = SemiHom::new(&sub, s, members.clone()).expect("members index s");
    let j_a = SemiHom::new(s, &sub, (0..s.len()).map(|x| pos[s.join(x, a)]).collect()).expect("x ∨ a lies in [a, 1]");
    let theta = match v_functor(&ra, r, &incl) {
        Ok(t) => t,
        Err(e) => return Ok(VerificationItem::fail(&name, format!("theta: {e}"))),
    };
    let phi = match v_functor(r, &ra, &j_a) {
        Ok(p) => p,
        Err(e) => return Ok(VerificationItem::fail(&name, format!("phi: {e}"))),
    };
    let failure = (|| {
        let basis_images: Vec<FreeVector> =
            ra.basis_cols().iter().map(|&c| theta.apply(&FreeVector::unit(sub.len(), c))).collect();
        if !ra.is_torsion_free() || !r.independent(&basis_images) {
            return Some("theta not injective".to_string());
        }
        for x in 0..sub.len() {
            let e = FreeVector::unit(sub.len(), x);
            if phi.apply(&theta.apply(&e)) != ra.canonical(&e) {
                return Some(format!("phi(theta({})) != {}", sub.name(x), sub.name(x)));
            }
        }
        if intersect_with_coordinates(r, &members) != *ra.ideal.hnf() {
            return Some("M([a,1]) != M(L) ∩ Z^[a,1]".to_string());
        }
        None
    })();
    Ok(VerificationItem::from_first_failure(&name, failure))
}

/// Hermite basis, in the coordinates of `members`, of the relation lattice
/// intersected with the coordinate subgroup on `members`.
fn intersect_with_coordinates(r: &ValuationRing<'_>, members: &[usize]) -> Hnf {
    let n = r.dim();
    let mut inside = vec![false; n];
    for &m in members {
        inside[m] = true;
    }
    // outside coordinates first, then members in order
    let perm: Vec<usize> = (0..n).filter(|&x| !inside[x]).chain(members.iter().copied()).collect();
    let outside = n - members.len();
    let permuted = r.ideal.generators.iter().map(|g| perm.iter().map(|&x| g.0[x].clone()).collect::<Vec<_>>());
    let h = Hnf::from_rows(n, permuted);
    let rows = h.rows().iter().zip(h.pivots()).filter(|&(_, &p)| p >= outside).map(|(row, _)| row[outside..].to_vec());
    Hnf::from_rows(members.len(), rows)
}
