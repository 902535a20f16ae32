//! Modular invariants: the rational commutant of (S, T), exhaustive
//! enumeration, monomial invariants, the Haagerup↔dihedral block
//! correspondence, canonical-invariant checks and Galois selection rules.
//!
//! A *modular invariant* of a modular datum (S, T) is a square matrix Z of
//! nonnegative integers with Z_{00} = 1 (index 0 the vacuum), ZS = SZ and
//! ZT = TZ, all exactly.  The T condition forces Z_{ij} = 0 unless
//! T_i = T_j, and commuting with S gives Z = SZS†, whose vacuum entry reads
//!
//! ```text
//!   1 = Σ_{i,j} S_{0,i} Z_{ij} S_{0,j} ,
//! ```
//!
//! so with a strictly positive vacuum row every entry obeys
//! Z_{ij} ≤ 1/(S_{0,i}S_{0,j}) and the number of invariants is finite.
//! [`enumerate_invariants`] walks exactly that finite box: it computes the
//! rational commutant {M : MS = SM, MT = TM} once, re-expresses it so that a
//! short list of *pivot* entries (ordered by decreasing S_{0,i}S_{0,j})
//! determines the rest linearly, and backtracks over integer values of the
//! pivots with the running vacuum-sum bound as the prune.
//!
//! A *monomial* invariant is Z = u·uᵀ for a nonnegative-integer vector u
//! with u_0 = 1, Su = u and Tu = u; [`monomial_invariants`] finds all of
//! them by the same bounded search inside the rational 1-eigenspace, using
//! Σ_i S_{0,i} u_i = 1.
//!
//! For the Haagerup–Izumi datum of odd ν (primary classes 0,𝔟 | 𝔞 | 𝔠 | 𝔡
//! with μ = ν² + 4, m = (ν²+3)/2) and the sign-twisted dihedral double of
//! the same ν, every invariant vanishes on the cross-blocks with the 𝔡
//! class and restricts on {0,𝔟} to either the identity or the all-ones
//! matrix.  [`hg_dihedral_map`] implements the block correspondence
//!
//! ```text
//!   φ(M) = (M on classes 0𝔟/𝔞/𝔠) ⊕ (M_{0,0} − M_{0,𝔟}) I₂ ,
//! ```
//!
//! a bijection on invariants with M_{0,𝔟} ≠ 0 and, in the other direction,
//! a fiber of 2^{k−1} preimages (k the number of distinct primes of μ)
//! whose 𝔡-blocks are the permutations π_ℓ(l) ≡ ±ℓl mod μ, one for each
//! 1 ≤ ℓ ≤ m with ℓ² ≡ 1 mod μ.
//!
//! [`canonical_checks`] confirms the two distinguished monomial invariants
//! of an (untwisted) group double — u_{(e,χ)} = χ(e) over the identity
//! class, and the indicator of one class representative per class with the
//! trivial character — and [`galois_selection_check`] verifies, for every
//! Galois unit σ of the datum's cyclotomic field,
//!
//! ```text
//!   Z_{ij} = s_σ(i) s_σ(j) Z_{σi,σj} ,    Z_{ij} ≠ 0 ⇒ s_σ(i) = s_σ(j).
//! ```

use crate::cyclotomic::{Cyc, ScalarError};
use crate::mdata::{galois_act, MdataError, ModularData};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Errors from invariant enumeration and the block correspondences.
#[derive(Debug, thiserror::Error)]
pub enum InvariantError {
    #[error("enumeration is limited to {limit} primaries, got {dim}")]
    TooLarge { dim: usize, limit: usize },
    #[error("block structure mismatch: {0}")]
    BlockMismatch(String),
    #[error("not a 1-eigenvector of S and T: {0}")]
    NotEigenvector(String),
    #[error("not a modular invariant: {0}")]
    NotInvariant(String),
    #[error(transparent)]
    Mdata(#[from] MdataError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// A dense rational matrix, row major.
pub type RationalMatrix = Vec<Vec<BigRational>>;

/// The hard ceiling of [`enumerate_invariants`]; larger data must go
/// through [`enumerate_invariants_limited`] explicitly.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 16;

/// A verified modular invariant: nonnegative integers with Z_{00} = 1 that
/// commute exactly with both S and T.  Ordering is lexicographic on the
/// entries, which is the deterministic order [`enumerate_invariants`]
/// returns.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ModularInvariant {
    pub z: Vec<Vec<u32>>,
}

impl ModularInvariant {
    /// Validates Z against the datum: shape, Z at the vacuum, ZT = TZ and
    /// ZS = SZ, all exact.
    pub fn new(md: &ModularData, z: Vec<Vec<u32>>) -> Result<Self, InvariantError> {
        let n = md.dim();
        if z.len() != n || z.iter().any(|r| r.len() != n) {
            return Err(InvariantError::NotInvariant(format!(
                "shape {}x{} does not match {n} primaries",
                z.len(),
                z.first().map_or(0, |r| r.len())
            )));
        }
        let v = md.vacuum;
        if z[v][v] != 1 {
            return Err(InvariantError::NotInvariant(format!(
                "vacuum entry is {}, not 1",
                z[v][v]
            )));
        }
        for i in 0..n {
            for j in 0..n {
                if z[i][j] != 0 && md.t[i] != md.t[j] {
                    return Err(InvariantError::NotInvariant(format!(
                        "ZT = TZ fails at ({i},{j}): T values differ"
                    )));
                }
            }
        }
        // ZS = SZ, exploiting the integer sparsity of Z:
        //   (ZS)_{ij} = Σ_k Z_{ik} S_{kj},   (SZ)_{ij} = Σ_k S_{ik} Z_{kj}.
        let rows: Vec<Vec<(usize, u32)>> = (0..n)
            .map(|i| (0..n).filter(|&k| z[i][k] != 0).map(|k| (k, z[i][k])).collect())
            .collect();
        let cols: Vec<Vec<(usize, u32)>> = (0..n)
            .map(|j| (0..n).filter(|&k| z[k][j] != 0).map(|k| (k, z[k][j])).collect())
            .collect();
        for i in 0..n {
            for j in 0..n {
                let lhs = sparse_combination(&rows[i], |k| &md.s[k][j]);
                let rhs = sparse_combination(&cols[j], |k| &md.s[i][k]);
                if lhs != rhs {
                    return Err(InvariantError::NotInvariant(format!(
                        "ZS = SZ fails at ({i},{j})"
                    )));
                }
            }
        }
        Ok(ModularInvariant { z })
    }

    /// The identity matrix, which is an invariant of every modular datum.
    pub fn identity(md: &ModularData) -> Self {
        let n = md.dim();
        let z = (0..n)
            .map(|i| (0..n).map(|j| u32::from(i == j)).collect())
            .collect();
        ModularInvariant { z }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// The vacuum row, whose entries weight the characters in Z_{0,·}.
    pub fn vacuum_row(&self, md: &ModularData) -> Vec<u32> {
        self.z[md.vacuum].clone()
    }
}

/// A monomial invariant: u ≥ 0 integral, u_0 = 1, Su = u, Tu = u.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MonomialInvariant {
    pub u: Vec<u32>,
}

impl MonomialInvariant {
    /// The rank-one invariant Z = u·uᵀ, verified against the datum.
    pub fn to_invariant(&self, md: &ModularData) -> Result<ModularInvariant, InvariantError> {
        let z = self
            .u
            .iter()
            .map(|&a| self.u.iter().map(|&b| a * b).collect())
            .collect();
        ModularInvariant::new(md, z)
    }
}

/// Σ_k c_k · f(k) over a sparse integer vector, as an exact scalar.
fn sparse_combination<'a>(
    terms: &[(usize, u32)],
    f: impl Fn(usize) -> &'a Cyc,
) -> Cyc {
    let mut acc = Cyc::zero(1);
    for &(k, c) in terms {
        acc = acc.add(&f(k).scale(&BigRational::from_integer(BigInt::from(c))));
    }
    acc
}

// ------------------------------------------------------- rational commutant

/// A sparse rational linear equation Σ coeff·x_coord = 0.
type SparseRow = Vec<(usize, BigRational)>;

/// Cuts the span of `basis` down by one equation; O(m·d) rational ops.
fn impose(basis: &mut Vec<Vec<BigRational>>, row: &SparseRow) {
    let dots: Vec<BigRational> = basis
        .iter()
        .map(|b| {
            let mut acc = BigRational::zero();
            for (c, q) in row {
                if !b[*c].is_zero() {
                    acc += q * &b[*c];
                }
            }
            acc
        })
        .collect();
    let Some(p) = dots.iter().position(|d| !d.is_zero()) else {
        return;
    };
    let pivot = basis.remove(p);
    let dp = dots[p].clone();
    for (t, b) in basis.iter_mut().enumerate() {
        let dt = if t < p { &dots[t] } else { &dots[t + 1] };
        if !dt.is_zero() {
            let f = dt / &dp;
            for (bc, pc) in b.iter_mut().zip(&pivot) {
                if !pc.is_zero() {
                    *bc -= &f * pc;
                }
            }
        }
    }
}

/// Gauss–Jordan `basis` against the coordinates in `coord_order`, returning
/// the chosen pivot coordinates; afterwards basis[t] is 1 at pivot t and 0
/// at every other pivot, so a solution is determined by its pivot values.
fn cardinalize(basis: &mut Vec<Vec<BigRational>>, coord_order: &[usize]) -> Vec<usize> {
    let d = basis.len();
    let mut pivots = Vec::with_capacity(d);
    let mut used = vec![false; d];
    for &c in coord_order {
        if pivots.len() == d {
            break;
        }
        let Some(t) = (0..d).find(|&t| !used[t] && !basis[t][c].is_zero()) else {
            continue;
        };
        used[t] = true;
        let f = basis[t][c].clone();
        for v in basis[t].iter_mut() {
            *v /= &f;
        }
        let pivot_vec = basis[t].clone();
        for (t2, b) in basis.iter_mut().enumerate() {
            if t2 != t && !b[c].is_zero() {
                let f2 = b[c].clone();
                for (bc, pc) in b.iter_mut().zip(&pivot_vec) {
                    if !pc.is_zero() {
                        *bc -= &f2 * pc;
                    }
                }
            }
        }
        pivots.push((t, c));
    }
    assert_eq!(pivots.len(), d, "independent basis must admit full pivoting");
    let reordered: Vec<Vec<BigRational>> =
        pivots.iter().map(|&(t, _)| basis[t].clone()).collect();
    *basis = reordered;
    pivots.into_iter().map(|(_, c)| c).collect()
}

/// The rational solution space of a list of cyclotomic-coefficient
/// equations over `m` coordinates: each equation is expanded through the
/// canonical tensor basis of Q[ξ_order] into rational rows first.
fn rational_nullspace(
    m: usize,
    order: u64,
    equations: impl Iterator<Item = BTreeMap<usize, Cyc>>,
) -> Vec<Vec<BigRational>> {
    let mut basis: Vec<Vec<BigRational>> = (0..m)
        .map(|t| {
            let mut v = vec![BigRational::zero(); m];
            v[t] = BigRational::from_integer(BigInt::from(1));
            v
        })
        .collect();
    for eq in equations {
        if basis.is_empty() {
            break;
        }
        let mut rows: BTreeMap<u64, SparseRow> = BTreeMap::new();
        for (coord, coeff) in eq {
            for (idx, q) in coeff.coords_at(order) {
                rows.entry(idx).or_default().push((coord, q));
            }
        }
        for row in rows.values() {
            impose(&mut basis, row);
        }
    }
    basis
}

/// The strictly positive vacuum row of S as f64, used only for pruning
/// bounds (the final arithmetic stays exact).
fn vacuum_row_f64(md: &ModularData) -> Result<Vec<f64>, InvariantError> {
    let row = &md.s[md.vacuum];
    let mut out = Vec::with_capacity(row.len());
    for (i, v) in row.iter().enumerate() {
        let (re, im) = v.embed(96).to_f64_pair();
        if im.abs() > 1e-12 || re <= 1e-12 {
            return Err(InvariantError::NotInvariant(format!(
                "vacuum row entry {i} is not strictly positive"
            )));
        }
        out.push(re);
    }
    Ok(out)
}

/// Bounded lattice-point search: enumerate integer pivot assignments with
/// the running vacuum-sum prune, reconstruct candidates exactly, and keep
/// those that are nonnegative integers everywhere.  `weights[c]` is the
/// (positive) vacuum weight of coordinate c; every admissible solution has
/// Σ_c weights[c]·x_c = 1, so a partial sum over assigned pivots already
/// exceeding 1 kills the branch.  The first pivot is the vacuum coordinate,
/// pinned to 1; the search parallelizes over the first free pivot.
fn bounded_search(
    basis: &[Vec<BigRational>],
    pivots: &[usize],
    bounds: &[i64],
    weights: &[f64],
) -> Vec<Vec<i64>> {
    let d = basis.len();
    let m = weights.len();
    debug_assert_eq!(pivots.len(), d);
    if d == 0 {
        return Vec::new();
    }
    const EPS: f64 = 1e-6;

    let reconstruct = |vals: &[i64]| -> Option<Vec<i64>> {
        let mut out = vec![0i64; m];
        for c in 0..m {
            let mut acc = BigRational::zero();
            for (t, &v) in vals.iter().enumerate() {
                if v != 0 && !basis[t][c].is_zero() {
                    acc += BigRational::from_integer(BigInt::from(v)) * &basis[t][c];
                }
            }
            if !acc.is_integer() || acc.is_negative() {
                return None;
            }
            out[c] = acc.to_integer().to_i64()?;
        }
        Some(out)
    };

    fn rec(
        t: usize,
        acc: f64,
        vals: &mut Vec<i64>,
        d: usize,
        pivots: &[usize],
        bounds: &[i64],
        weights: &[f64],
        leaves: &mut Vec<Vec<i64>>,
    ) {
        if t == d {
            leaves.push(vals.clone());
            return;
        }
        let c = pivots[t];
        for v in 0..=bounds[c] {
            let next = acc + weights[c] * v as f64;
            if next > 1.0 + 1e-6 {
                break;
            }
            vals.push(v);
            rec(t + 1, next, vals, d, pivots, bounds, weights, leaves);
            vals.pop();
        }
    }

    // vacuum pivot: exactly 1
    let base_acc = weights[pivots[0]];
    if base_acc > 1.0 + EPS {
        return Vec::new();
    }
    let leaves: Vec<Vec<i64>> = if d == 1 {
        vec![vec![1]]
    } else {
        let c1 = pivots[1];
        (0..=bounds[c1])
            .into_par_iter()
            .map(|v1| {
                let acc = base_acc + weights[c1] * v1 as f64;
                let mut out = Vec::new();
                if acc <= 1.0 + EPS {
                    let mut vals = vec![1, v1];
                    rec(2, acc, &mut vals, d, pivots, bounds, weights, &mut out);
                }
                out
            })
            .reduce(Vec::new, |mut a, mut b| {
                a.append(&mut b);
                a
            })
    };
    leaves.iter().filter_map(|vals| reconstruct(vals)).collect()
}

/// A basis over the rationals of {M : MS = SM, MT = TM, M rational}.
///
/// The T condition is imposed by restricting support to pairs with equal T
/// values; the S condition is expanded through the tensor basis of
/// Q[ξ_order] into exact rational equations.  The result is in cardinal
/// form: basis k is 1 at its own pivot entry and 0 at the other pivots,
/// pivots ordered vacuum first, then by decreasing vacuum weight
/// S_{0,i}S_{0,j}.
pub fn commutant_basis(md: &ModularData) -> Result<Vec<RationalMatrix>, InvariantError> {
    let (allowed, basis, _pivots) = commutant_internal(md)?;
    let n = md.dim();
    Ok(basis
        .iter()
        .map(|b| {
            let mut mat = vec![vec![BigRational::zero(); n]; n];
            for (c, &(i, j)) in allowed.iter().enumerate() {
                mat[i][j] = b[c].clone();
            }
            mat
        })
        .collect())
}

#[allow(clippy::type_complexity)]
fn commutant_internal(
    md: &ModularData,
) -> Result<(Vec<(usize, usize)>, Vec<Vec<BigRational>>, Vec<usize>), InvariantError> {
    let n = md.dim();
    let allowed: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| md.t[i] == md.t[j])
        .collect();
    let pos: BTreeMap<(usize, usize), usize> = allowed
        .iter()
        .enumerate()
        .map(|(c, &e)| (e, c))
        .collect();
    let m = allowed.len();

    let equations = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| {
        let mut eq: BTreeMap<usize, Cyc> = BTreeMap::new();
        for k in 0..n {
            if let Some(&c) = pos.get(&(i, k)) {
                let entry = eq.entry(c).or_insert_with(|| Cyc::zero(1));
                *entry = entry.add(&md.s[k][j]);
            }
            if let Some(&c) = pos.get(&(k, j)) {
                let entry = eq.entry(c).or_insert_with(|| Cyc::zero(1));
                *entry = entry.sub(&md.s[i][k]);
            }
        }
        eq
    });
    let mut basis = rational_nullspace(m, md.order, equations);

    let s0 = vacuum_row_f64(md)?;
    let weight = |c: usize| {
        let (i, j) = allowed[c];
        s0[i] * s0[j]
    };
    let vacuum_coord = pos[&(md.vacuum, md.vacuum)];
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        (a != vacuum_coord)
            .cmp(&(b != vacuum_coord))
            .then(weight(b).partial_cmp(&weight(a)).unwrap())
            .then(a.cmp(&b))
    });
    let pivots = cardinalize(&mut basis, &order);
    Ok((allowed, basis, pivots))
}

/// All modular invariants of the datum, in lexicographic order of the
/// integer matrices, with the default primary-count ceiling.
pub fn enumerate_invariants(md: &ModularData) -> Result<Vec<ModularInvariant>, InvariantError> {
    enumerate_invariants_limited(md, DEFAULT_ENUMERATION_LIMIT)
}

/// [`enumerate_invariants`] with an explicit primary-count ceiling.
pub fn enumerate_invariants_limited(
    md: &ModularData,
    limit: usize,
) -> Result<Vec<ModularInvariant>, InvariantError> {
    let n = md.dim();
    if n > limit {
        return Err(InvariantError::TooLarge { dim: n, limit });
    }
    let (allowed, basis, pivots) = commutant_internal(md)?;
    let m = allowed.len();
    let s0 = vacuum_row_f64(md)?;
    let mut weights = vec![0.0; m];
    let mut bounds = vec![0i64; m];
    for (c, &(i, j)) in allowed.iter().enumerate() {
        weights[c] = s0[i] * s0[j];
        bounds[c] = (1.0 / weights[c] + 1e-9).floor() as i64;
    }
    if basis.is_empty() || pivots.first() != Some(&allowed.iter().position(|&e| e == (md.vacuum, md.vacuum)).unwrap()) {
        // the vacuum entry is identically zero on the commutant: no solutions
        return Ok(Vec::new());
    }

    let mut out = Vec::new();
    for coords in bounded_search(&basis, &pivots, &bounds, &weights) {
        let mut z = vec![vec![0u32; n]; n];
        let mut fits = true;
        for (c, &(i, j)) in allowed.iter().enumerate() {
            match u32::try_from(coords[c]) {
                Ok(v) => z[i][j] = v,
                Err(_) => {
                    fits = false;
                    break;
                }
            }
        }
        if !fits || z[md.vacuum][md.vacuum] != 1 {
            continue;
        }
        // candidates live in the exact commutant by construction; this
        // re-verifies independently
        out.push(ModularInvariant::new(md, z)?);
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// All monomial invariants: nonnegative-integer u with u_0 = 1, Su = u and
/// Tu = u, by bounded search in the rational 1-eigenspace.  Works at any
/// primary count; when T_0 ≠ 1 there are none.
pub fn monomial_invariants(md: &ModularData) -> Result<Vec<MonomialInvariant>, InvariantError> {
    let n = md.dim();
    let one = Cyc::one();
    let support: Vec<usize> = (0..n).filter(|&i| md.t[i] == one).collect();
    if !support.contains(&md.vacuum) {
        return Ok(Vec::new());
    }
    let pos: BTreeMap<usize, usize> = support.iter().enumerate().map(|(c, &i)| (i, c)).collect();
    let m = support.len();

    // (Su)_i = u_i for every i, over the T-fixed support
    let equations = (0..n).map(|i| {
        let mut eq: BTreeMap<usize, Cyc> = BTreeMap::new();
        for (&j, &c) in &pos {
            eq.insert(c, md.s[i][j].clone());
        }
        if let Some(&c) = pos.get(&i) {
            let entry = eq.entry(c).or_insert_with(|| Cyc::zero(1));
            *entry = entry.sub(&one);
        }
        eq
    });
    let mut basis = rational_nullspace(m, md.order, equations);
    if basis.is_empty() {
        return Ok(Vec::new());
    }

    let s0 = vacuum_row_f64(md)?;
    let weights: Vec<f64> = support.iter().map(|&i| s0[i]).collect();
    let bounds: Vec<i64> = weights
        .iter()
        .map(|w| (1.0 / w + 1e-9).floor() as i64)
        .collect();
    let vacuum_coord = pos[&md.vacuum];
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        (a != vacuum_coord)
            .cmp(&(b != vacuum_coord))
            .then(weights[b].partial_cmp(&weights[a]).unwrap())
            .then(a.cmp(&b))
    });
    let pivots = cardinalize(&mut basis, &order);
    if pivots.first() != Some(&vacuum_coord) {
        return Ok(Vec::new());
    }

    let mut out = Vec::new();
    for coords in bounded_search(&basis, &pivots, &bounds, &weights) {
        let mut u = vec![0u32; n];
        let mut fits = coords[vacuum_coord] == 1;
        for (c, &i) in support.iter().enumerate() {
            match u32::try_from(coords[c]) {
                Ok(v) => u[i] = v,
                Err(_) => {
                    fits = false;
                    break;
                }
            }
        }
        if !fits {
            continue;
        }
        let cand = MonomialInvariant { u };
        if is_one_eigenvector(md, &cand.u) {
            out.push(cand);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Su = u and Tu = u, exactly.
fn is_one_eigenvector(md: &ModularData, u: &[u32]) -> bool {
    let n = md.dim();
    if u.len() != n {
        return false;
    }
    let terms: Vec<(usize, u32)> = (0..n).filter(|&k| u[k] != 0).map(|k| (k, u[k])).collect();
    for (i, &ui) in u.iter().enumerate() {
        if ui != 0 && md.t[i] != Cyc::one() {
            return false;
        }
        let su = sparse_combination(&terms, |k| &md.s[i][k]);
        if su != Cyc::from_integer(i64::from(ui)) {
            return false;
        }
    }
    true
}

// ------------------------------------------------ Haagerup↔dihedral blocks

/// Which way [`hg_dihedral_map`] runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapDirection {
    /// Haagerup–Izumi invariant → dihedral invariant (the block map φ).
    Forward,
    /// Dihedral invariant → all its φ-preimages.
    Fiber,
}

struct FourClassLayout {
    nu: u64,
    /// primaries before the 𝔡 class: 2 + n + nν
    top: usize,
    /// size of the 𝔡 class (m for Haagerup–Izumi, 2 for the dihedral double)
    d_len: usize,
}

fn four_class_layout(md: &ModularData, what: &str) -> Result<FourClassLayout, InvariantError> {
    let labels = &md.labels;
    let bad = |msg: &str| InvariantError::BlockMismatch(format!("{what}: {msg}"));
    if labels.len() < 4 || labels[0] != "0" || labels[1] != "b" {
        return Err(bad("expected labels starting 0, b"));
    }
    let n = labels[2..].iter().take_while(|l| l.starts_with('a')).count();
    let c_len = labels[2 + n..].iter().take_while(|l| l.starts_with('c')).count();
    let d_len = labels[2 + n + c_len..].iter().take_while(|l| l.starts_with('d')).count();
    let nu = 2 * n as u64 + 1;
    if c_len != n * nu as usize || 2 + n + c_len + d_len != labels.len() {
        return Err(bad("labels do not split into the four classes 0𝔟/𝔞/𝔠/𝔡"));
    }
    Ok(FourClassLayout {
        nu,
        top: 2 + n + c_len,
        d_len,
    })
}

/// The Theorem-style block correspondence between invariants of the
/// Haagerup–Izumi datum `hg` and of the sign-twisted dihedral double
/// `dihedral` at the same odd ν.
///
/// * `Forward`: `m` is an invariant of `hg`; returns the single image,
///   which keeps the 0𝔟/𝔞/𝔠 blocks, zeroes the cross-blocks and puts
///   (M_{0,0} − M_{0,𝔟})·I₂ in the 𝔡 block.
/// * `Fiber`: `m` is an invariant of `dihedral`; returns every preimage.
///   With b = M_{0,𝔟} ≠ 0 the 𝔡-block of the preimage vanishes and the
///   fiber is a single invariant; with b = 0 it consists of the
///   permutations π_ℓ(l) ≡ ±ℓl mod μ for each 1 ≤ ℓ ≤ m with
///   ℓ² ≡ 1 mod μ, in ascending order of ℓ.
///
/// Every returned matrix is re-verified exactly against its datum.
pub fn hg_dihedral_map(
    hg: &ModularData,
    dihedral: &ModularData,
    m: &ModularInvariant,
    direction: MapDirection,
) -> Result<Vec<ModularInvariant>, InvariantError> {
    let hg_layout = four_class_layout(hg, "haagerup-izumi datum")?;
    let dd_layout = four_class_layout(dihedral, "dihedral datum")?;
    if hg_layout.nu != dd_layout.nu {
        return Err(InvariantError::BlockMismatch(format!(
            "ν differs: {} vs {}",
            hg_layout.nu, dd_layout.nu
        )));
    }
    let nu = hg_layout.nu;
    let mu = nu * nu + 4;
    let m_int = ((nu * nu + 3) / 2) as usize;
    if hg_layout.d_len != m_int || dd_layout.d_len != 2 {
        return Err(InvariantError::BlockMismatch(format!(
            "𝔡 classes have sizes {} and {}, want {m_int} and 2",
            hg_layout.d_len, dd_layout.d_len
        )));
    }
    let top = hg_layout.top;

    match direction {
        MapDirection::Forward => {
            if m.dim() != hg.dim() {
                return Err(InvariantError::BlockMismatch(
                    "invariant size does not match the Haagerup–Izumi datum".into(),
                ));
            }
            let b = m.z[0][1];
            if m.z[0][0] < b {
                return Err(InvariantError::BlockMismatch(
                    "vacuum block has M_{0,b} > M_{0,0}".into(),
                ));
            }
            let ab = m.z[0][0] - b;
            let nd = top + 2;
            let mut z = vec![vec![0u32; nd]; nd];
            for i in 0..top {
                for j in 0..top {
                    z[i][j] = m.z[i][j];
                }
            }
            z[top][top] = ab;
            z[top + 1][top + 1] = ab;
            Ok(vec![ModularInvariant::new(dihedral, z)?])
        }
        MapDirection::Fiber => {
            if m.dim() != dihedral.dim() {
                return Err(InvariantError::BlockMismatch(
                    "invariant size does not match the dihedral datum".into(),
                ));
            }
            let b = m.z[0][1];
            let nd = top + m_int;
            let mut base = vec![vec![0u32; nd]; nd];
            for i in 0..top {
                for j in 0..top {
                    base[i][j] = m.z[i][j];
                }
            }
            if b != 0 {
                return Ok(vec![ModularInvariant::new(hg, base)?]);
            }
            let mut out = Vec::new();
            for ell in 1..=m_int as u64 {
                if (ell * ell) % mu != 1 {
                    continue;
                }
                let mut z = base.clone();
                for l in 1..=m_int as u64 {
                    let p = (ell * l) % mu;
                    let p = p.min(mu - p) as usize;
                    z[top + l as usize - 1][top + p - 1] = 1;
                }
                out.push(ModularInvariant::new(hg, z)?);
            }
            Ok(out)
        }
    }
}

// --------------------------------------------------------- canonical checks

/// The two distinguished group-double vectors, when the datum is an
/// untwisted dihedral or cyclic double.
#[derive(Clone, Debug)]
pub struct GroupDoubleCanon {
    /// u_{(e,χ)} = χ(e): the dimensions of the irreducible characters over
    /// the identity class, zero elsewhere.
    pub canonical: MonomialInvariant,
    /// One primary per conjugacy class, carrying the trivial character.
    pub dual: MonomialInvariant,
    pub canonical_is_monomial: bool,
    pub dual_is_monomial: bool,
}

/// What [`canonical_checks`] verified.
#[derive(Clone, Debug)]
pub struct CanonicalReport {
    /// Z = u·uᵀ passed exact invariant verification.
    pub square_is_invariant: bool,
    /// Present when the datum is an untwisted group double.
    pub group_double: Option<GroupDoubleCanon>,
    /// Caveats (e.g. the exactly-three expectation for Haagerup–Izumi
    /// monomials is only backed for ν with at most two prime factors).
    pub notes: Vec<String>,
}

/// Confirms that `u` is a 1-eigenvector of S and T, that its square is a
/// modular invariant, and — for untwisted group doubles — that the two
/// canonical vectors are among [`monomial_invariants`].
pub fn canonical_checks(
    md: &ModularData,
    u: &MonomialInvariant,
) -> Result<CanonicalReport, InvariantError> {
    if u.u.len() != md.dim() || u.u[md.vacuum] != 1 {
        return Err(InvariantError::NotEigenvector(
            "u must have length dim and vacuum entry 1".into(),
        ));
    }
    if !is_one_eigenvector(md, &u.u) {
        return Err(InvariantError::NotEigenvector(
            "Su = u and Tu = u fail".into(),
        ));
    }
    let square_is_invariant = u.to_invariant(md).is_ok();
    let mut notes = Vec::new();

    let family = md.meta.get("family").and_then(|v| v.as_str()).unwrap_or("");
    let omega = md.meta.get("omega").and_then(|v| v.as_i64()).unwrap_or(0);
    let nu = md.meta.get("nu").and_then(|v| v.as_u64()).unwrap_or(0);

    if (family == "haagerup_izumi" || family == "galois_twist_hg") && nu > 0 {
        let mut k = 0u32;
        let mut rest = nu;
        for p in 2..=rest {
            while rest % p == 0 {
                rest /= p;
                k += 1;
            }
        }
        if k > 2 {
            notes.push(format!(
                "ν = {nu} has {k} prime factors: the exactly-three count for \
                 monomial invariants is only proven for ν = p or pq"
            ));
        }
    }

    let group_double = match family {
        "dihedral_double"
            if omega == 0
                && md.meta.get("sign").and_then(|v| v.as_str()) == Some("+")
                && nu > 0 =>
        {
            let n = ((nu - 1) / 2) as usize;
            let dim = md.dim();
            // identity class: 0, 𝔟 (dim 1) and each 𝔞_i (dim 2)
            let mut canonical = vec![0u32; dim];
            canonical[0] = 1;
            canonical[1] = 1;
            for i in 0..n {
                canonical[2 + i] = 2;
            }
            // class representatives with the trivial character: 0, each
            // 𝔠_{h,0}, and 𝔡₁
            let mut dual = vec![0u32; dim];
            dual[0] = 1;
            for h in 0..n {
                dual[2 + n + h * nu as usize] = 1;
            }
            dual[2 + n + n * nu as usize] = 1;
            Some((canonical, dual))
        }
        "cyclic_double" if omega == 0 && nu > 0 => {
            let dim = md.dim();
            // pairs (a, b) in lexicographic order: identity class a = 0
            // comes first; (a, trivial character) sits at a·ν
            let mut canonical = vec![0u32; dim];
            let mut dual = vec![0u32; dim];
            for b in 0..nu as usize {
                canonical[b] = 1;
            }
            for a in 0..nu as usize {
                dual[a * nu as usize] = 1;
            }
            Some((canonical, dual))
        }
        _ => None,
    }
    .map(|(canonical, dual)| {
        let monomials = monomial_invariants(md)?;
        let canonical = MonomialInvariant { u: canonical };
        let dual = MonomialInvariant { u: dual };
        Ok::<_, InvariantError>(GroupDoubleCanon {
            canonical_is_monomial: monomials.contains(&canonical),
            dual_is_monomial: monomials.contains(&dual),
            canonical,
            dual,
        })
    })
    .transpose()?;

    Ok(CanonicalReport {
        square_is_invariant,
        group_double,
        notes,
    })
}

// ----------------------------------------------------- Galois selection

/// Outcome of [`galois_selection_check`] across all Galois units.
#[derive(Clone, Debug)]
pub struct GaloisReport {
    pub units: Vec<u64>,
    /// (ℓ, i, j) where Z_{ij} ≠ s_σ(i)s_σ(j) Z_{σi,σj}.
    pub symmetry_failures: Vec<(u64, usize, usize)>,
    /// (ℓ, i, j) where Z_{ij} ≠ 0 but s_σ(i) ≠ s_σ(j).
    pub selection_failures: Vec<(u64, usize, usize)>,
}

impl GaloisReport {
    pub fn passed(&self) -> bool {
        self.symmetry_failures.is_empty() && self.selection_failures.is_empty()
    }
}

/// Verifies the Galois symmetry Z_{ij} = s_σ(i)s_σ(j) Z_{σi,σj} and the
/// selection rule Z_{ij} ≠ 0 ⇒ s_σ(i) = s_σ(j), for every unit σ = σ_ℓ of
/// the datum's cyclotomic field Q[ξ_order].
///
/// Both are theorems for genuine modular invariants, so a failure indicates
/// the matrix does not commute with this datum's S and T.
pub fn galois_selection_check(
    md: &ModularData,
    z: &ModularInvariant,
) -> Result<GaloisReport, InvariantError> {
    let n = md.dim();
    if z.dim() != n {
        return Err(InvariantError::BlockMismatch(
            "invariant size does not match the datum".into(),
        ));
    }
    let mut report = GaloisReport {
        units: Vec::new(),
        symmetry_failures: Vec::new(),
        selection_failures: Vec::new(),
    };
    for ell in 1..md.order {
        if num_integer::gcd(ell, md.order) != 1 {
            continue;
        }
        let (_, action) = galois_act(md, ell)?;
        report.units.push(ell);
        for i in 0..n {
            for j in 0..n {
                let zij = i64::from(z.z[i][j]);
                let sgn = i64::from(action.signs[i]) * i64::from(action.signs[j]);
                let mapped = sgn * i64::from(z.z[action.perm[i]][action.perm[j]]);
                if zij != mapped {
                    report.symmetry_failures.push((ell, i, j));
                }
                if zij != 0 && action.signs[i] != action.signs[j] {
                    report.selection_failures.push((ell, i, j));
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{cyclic_double, dihedral_double, haagerup_izumi, so_level2, Sign};

    fn qi(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    /// MS = SM over the exact cyclotomics, for a rational M.
    fn rational_commutes_with_s(md: &ModularData, m: &[Vec<BigRational>]) -> bool {
        let n = md.dim();
        for i in 0..n {
            for j in 0..n {
                let mut lhs = Cyc::zero(1);
                let mut rhs = Cyc::zero(1);
                for k in 0..n {
                    if !m[i][k].is_zero() {
                        lhs = lhs.add(&md.s[k][j].scale(&m[i][k]));
                    }
                    if !m[k][j].is_zero() {
                        rhs = rhs.add(&md.s[i][k].scale(&m[k][j]));
                    }
                }
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }

    /// The three closed-form monomial vectors of the Haagerup–Izumi datum:
    /// 2 on the 𝔞 class, 1 on 𝔞 and the 𝔠_{h,0}, or 2 on the 𝔠_{h,0}.
    fn hg_monomial_triple(nu: u64, dim: usize) -> Vec<MonomialInvariant> {
        let n = ((nu - 1) / 2) as usize;
        let a_pos: Vec<usize> = (2..2 + n).collect();
        let c0_pos: Vec<usize> = (0..n).map(|h| 2 + n + h * nu as usize).collect();
        let mut all = Vec::new();
        for (wa, wc) in [(2u32, 0u32), (1, 1), (0, 2)] {
            let mut u = vec![0u32; dim];
            u[0] = 1;
            u[1] = 1;
            for &p in &a_pos {
                u[p] = wa;
            }
            for &p in &c0_pos {
                u[p] = wc;
            }
            all.push(MonomialInvariant { u });
        }
        all.sort();
        all
    }

    #[test]
    fn commutant_dimensions_match_independent_computation() {
        let cases = [
            (dihedral_double(3, Sign::Plus, 0).unwrap(), 11usize),
            (dihedral_double(3, Sign::Minus, 1).unwrap(), 3),
            (dihedral_double(3, Sign::Plus, 1).unwrap(), 6),
            (dihedral_double(3, Sign::Minus, 0).unwrap(), 6),
            (haagerup_izumi(&[3], 0).unwrap(), 6),
        ];
        for (md, want) in cases {
            let basis = commutant_basis(&md).unwrap();
            assert_eq!(basis.len(), want, "{:?}", md.meta);
            for b in &basis {
                assert!(rational_commutes_with_s(&md, b));
            }
        }
        let triv = cyclic_double(1, 0).unwrap();
        assert_eq!(commutant_basis(&triv).unwrap().len(), 1);
    }

    #[test]
    fn invariant_counts_match_independent_computation() {
        let cases = [
            (dihedral_double(3, Sign::Plus, 0).unwrap(), 48usize),
            (dihedral_double(3, Sign::Minus, 1).unwrap(), 5),
            (dihedral_double(3, Sign::Plus, 1).unwrap(), 9),
            (dihedral_double(3, Sign::Minus, 0).unwrap(), 28),
            (haagerup_izumi(&[3], 0).unwrap(), 28),
        ];
        for (md, want) in cases {
            let inv = enumerate_invariants(&md).unwrap();
            assert_eq!(inv.len(), want, "{:?}", md.meta);
            assert!(inv.contains(&ModularInvariant::identity(&md)));
            assert!(inv.windows(2).all(|w| w[0] < w[1]), "sorted without repeats");
        }
    }

    #[test]
    fn products_of_invariants_still_commute_with_s() {
        let md = dihedral_double(3, Sign::Plus, 0).unwrap();
        let inv = enumerate_invariants(&md).unwrap();
        let n = md.dim();
        for (x, y) in [(0usize, 1usize), (5, 7), (13, 40)] {
            let (a, b) = (&inv[x].z, &inv[y].z);
            let mut prod = vec![vec![BigRational::zero(); n]; n];
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0i64;
                    for k in 0..n {
                        acc += i64::from(a[i][k]) * i64::from(b[k][j]);
                    }
                    prod[i][j] = qi(acc);
                }
            }
            assert!(rational_commutes_with_s(&md, &prod));
        }
    }

    #[test]
    fn haagerup_invariants_have_the_four_class_block_structure() {
        let md = haagerup_izumi(&[3], 0).unwrap();
        let inv = enumerate_invariants(&md).unwrap();
        assert_eq!(inv.len(), 28);
        let top = 6; // 2 + n + nν for ν = 3
        let dim = md.dim();
        let mut b_zero = 0usize;
        for z in &inv {
            let b = z.z[0][1];
            assert!(b <= 1);
            assert_eq!(z.z[0][0], 1);
            assert_eq!(z.z[1][1], 1);
            assert_eq!(z.z[1][0], b);
            // cross-blocks between the 𝔡 class and everything else vanish
            for i in 0..top {
                for j in top..dim {
                    assert_eq!(z.z[i][j], 0);
                    assert_eq!(z.z[j][i], 0);
                }
            }
            if b == 0 {
                b_zero += 1;
            }
        }
        assert_eq!(b_zero, 6);
        assert_eq!(inv.len() - b_zero, 22);
    }

    #[test]
    fn monomial_invariants_of_small_haagerup_data() {
        for nu in [3u64, 5, 7] {
            let md = haagerup_izumi(&[nu], 0).unwrap();
            let got = monomial_invariants(&md).unwrap();
            assert_eq!(got, hg_monomial_triple(nu, md.dim()), "ν = {nu}");
            for u in &got {
                u.to_invariant(&md).unwrap();
            }
        }
    }

    #[test]
    fn dihedral_plus_monomials_are_the_frozen_five() {
        let md = dihedral_double(3, Sign::Plus, 0).unwrap();
        let got = monomial_invariants(&md).unwrap();
        let want: Vec<MonomialInvariant> = [
            vec![1, 0, 0, 1, 0, 0, 1, 0],
            vec![1, 0, 1, 0, 0, 0, 1, 0],
            vec![1, 1, 0, 2, 0, 0, 0, 0],
            vec![1, 1, 1, 1, 0, 0, 0, 0],
            vec![1, 1, 2, 0, 0, 0, 0, 0],
        ]
        .into_iter()
        .map(|u| MonomialInvariant { u })
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn trivial_datum_has_only_the_identity() {
        let md = cyclic_double(1, 0).unwrap();
        assert_eq!(
            enumerate_invariants(&md).unwrap(),
            vec![ModularInvariant::identity(&md)]
        );
        assert_eq!(
            monomial_invariants(&md).unwrap(),
            vec![MonomialInvariant { u: vec![1] }]
        );
    }

    #[test]
    fn enumeration_guard_rejects_large_data() {
        let md = haagerup_izumi(&[5], 0).unwrap();
        assert!(matches!(
            enumerate_invariants(&md),
            Err(InvariantError::TooLarge { dim: 28, limit: 16 })
        ));
        // the explicit-limit entry point accepts it in principle (not run
        // here: the point of the guard is that the caller must opt in)
        assert!(enumerate_invariants_limited(&md, 16).is_err());
    }

    #[test]
    fn block_map_bijects_for_nu_three() {
        let hg3 = haagerup_izumi(&[3], 0).unwrap();
        let dd3 = dihedral_double(3, Sign::Minus, 0).unwrap();
        let hg_inv = enumerate_invariants(&hg3).unwrap();
        let dd_inv = enumerate_invariants(&dd3).unwrap();
        let mut images: Vec<ModularInvariant> = hg_inv
            .iter()
            .map(|m| {
                let img = hg_dihedral_map(&hg3, &dd3, m, MapDirection::Forward).unwrap();
                assert_eq!(img.len(), 1);
                img.into_iter().next().unwrap()
            })
            .collect();
        images.sort();
        images.dedup();
        assert_eq!(images, dd_inv, "13 prime: the block map is a bijection");

        let id_hg = ModularInvariant::identity(&hg3);
        let id_dd = ModularInvariant::identity(&dd3);
        assert_eq!(
            hg_dihedral_map(&hg3, &dd3, &id_hg, MapDirection::Forward).unwrap(),
            vec![id_dd.clone()]
        );
        assert_eq!(
            hg_dihedral_map(&hg3, &dd3, &id_dd, MapDirection::Fiber).unwrap(),
            vec![id_hg]
        );
    }

    #[test]
    fn fiber_for_nu_nine_contains_two_invariants() {
        let hg9 = haagerup_izumi(&[9], 0).unwrap();
        let dd9 = dihedral_double(9, Sign::Minus, 0).unwrap();
        let id_dd = ModularInvariant::identity(&dd9);
        let fiber = hg_dihedral_map(&hg9, &dd9, &id_dd, MapDirection::Fiber).unwrap();
        // 85 = 5 · 17 has two prime factors, so the fiber over b = 0 has
        // 2^{2−1} = 2 elements: ℓ = 1 and ℓ = 16
        assert_eq!(fiber.len(), 2);
        assert_eq!(fiber[0], ModularInvariant::identity(&hg9));
        let (top, mu) = (42usize, 85u64);
        for l in 1..=42u64 {
            let p = (16 * l) % mu;
            let p = p.min(mu - p);
            assert_eq!(fiber[1].z[top + l as usize - 1][top + p as usize - 1], 1);
        }
        for i in top..84 {
            assert_eq!(fiber[1].z[i][top..].iter().sum::<u32>(), 1);
            assert_eq!(fiber[1].z[i][..top].iter().sum::<u32>(), 0);
        }
        for m in &fiber {
            assert_eq!(
                hg_dihedral_map(&hg9, &dd9, m, MapDirection::Forward).unwrap(),
                vec![id_dd.clone()]
            );
        }
    }

    #[test]
    fn canonical_vectors_of_group_doubles() {
        let dd = dihedral_double(3, Sign::Plus, 0).unwrap();
        let u = MonomialInvariant {
            u: vec![1, 1, 2, 0, 0, 0, 0, 0],
        };
        let report = canonical_checks(&dd, &u).unwrap();
        assert!(report.square_is_invariant);
        assert!(report.notes.is_empty());
        let gd = report.group_double.expect("untwisted double of a group");
        assert_eq!(gd.canonical.u, vec![1, 1, 2, 0, 0, 0, 0, 0]);
        assert_eq!(gd.dual.u, vec![1, 0, 0, 1, 0, 0, 1, 0]);
        assert!(gd.canonical_is_monomial);
        assert!(gd.dual_is_monomial);

        let dz3 = cyclic_double(3, 0).unwrap();
        let u = MonomialInvariant {
            u: vec![1, 1, 1, 0, 0, 0, 0, 0, 0],
        };
        let gd = canonical_checks(&dz3, &u).unwrap().group_double.unwrap();
        assert!(gd.canonical_is_monomial);
        assert!(gd.dual_is_monomial);
        assert_eq!(gd.canonical.u, vec![1, 1, 1, 0, 0, 0, 0, 0, 0]);
        assert_eq!(gd.dual.u, vec![1, 0, 0, 1, 0, 0, 1, 0, 0]);

        // a non-eigenvector is rejected
        let bad = MonomialInvariant {
            u: vec![1, 1, 0, 0, 0, 0, 0, 0],
        };
        assert!(matches!(
            canonical_checks(&dd, &bad),
            Err(InvariantError::NotEigenvector(_))
        ));
    }

    #[test]
    fn haagerup_checks_flag_unproven_monomial_counts() {
        // the exactly-three statement is proven for ν with ≤ 2 prime
        // factors; a datum tagged with ν = 27 must carry the caveat
        let mut md = haagerup_izumi(&[3], 0).unwrap();
        md.meta.insert("nu".into(), serde_json::json!(27));
        let u = MonomialInvariant {
            u: vec![1, 1, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        };
        let report = canonical_checks(&md, &u).unwrap();
        assert!(report.notes.iter().any(|s| s.contains("only proven")));
        assert!(report.group_double.is_none());

        // ν = 9 = 3² is covered by the proof: no caveat
        let md9 = haagerup_izumi(&[3], 0).unwrap();
        let mut md9 = md9;
        md9.meta.insert("nu".into(), serde_json::json!(9));
        let report = canonical_checks(&md9, &u).unwrap();
        assert!(report.notes.is_empty());
    }

    #[test]
    fn galois_symmetry_and_selection_hold() {
        let md = haagerup_izumi(&[3], 0).unwrap();
        let unit_count = (1..md.order)
            .filter(|&l| num_integer::gcd(l, md.order) == 1)
            .count();
        for z in enumerate_invariants(&md).unwrap() {
            let rep = galois_selection_check(&md, &z).unwrap();
            assert_eq!(rep.units.len(), unit_count);
            assert!(rep.passed());
        }
        let so = so_level2(2).unwrap();
        let rep = galois_selection_check(&so, &ModularInvariant::identity(&so)).unwrap();
        assert!(!rep.units.is_empty());
        assert!(rep.passed());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(6))]
        #[test]
        fn cyclic_double_invariants_are_consistent(pick in 0usize..2, omega in 0i64..3) {
            let nu = [1u64, 3][pick];
            let md = cyclic_double(nu, omega % nu as i64).unwrap();
            let inv = enumerate_invariants(&md).unwrap();
            proptest::prop_assert!(inv.contains(&ModularInvariant::identity(&md)));
            for u in monomial_invariants(&md).unwrap() {
                proptest::prop_assert!(inv.contains(&u.to_invariant(&md).unwrap()));
            }
            for z in &inv {
                proptest::prop_assert!(galois_selection_check(&md, z).unwrap().passed());
            }
        }
    }
}
