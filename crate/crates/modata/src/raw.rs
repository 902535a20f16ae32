//! Integer-scaled group-algebra engine for exact matrix identities.
//!
//! Verifying S·S̄ᵀ = I, (ST)³ = S² = C and the Verlinde certificates means
//! millions of products of cyclotomic values.  Doing each one through the
//! general `Cyc` type (rational coefficients, per-operation reduction) is
//! needlessly slow, so the heavy checks run here instead: a whole matrix is
//! scaled by the common denominator of its coefficients, entries become
//! lists of (exponent, i128) pairs over Z[x]/(x^L − 1), products are plain
//! convolutions accumulated into dense buffers indexed by raw exponent, and
//! canonical reduction through Φ_{pᵉ} happens once per finished entry via a
//! precomputed expansion table.  Every arithmetic step is overflow-checked;
//! an `Overflow` bubbles up and the caller falls back to the general path.

use crate::cyclotomic::{order_info, Cyc};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Overflow;

/// A canonically-reduced value: sorted (raw exponent of a tensor-basis
/// monomial, integer coefficient) pairs.  The true value is this divided by
/// the owning matrix's scale.
pub(crate) type Entry = Vec<(u64, i128)>;

/// Expansion of every raw exponent into signed tensor-basis monomial
/// exponents; `None` marks exponents that are already canonical.
struct ExpandTable {
    order: u64,
    table: Vec<Option<Vec<(u64, i8)>>>,
}

static EXPAND_TABLES: Lazy<RwLock<HashMap<u64, Arc<ExpandTable>>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

fn expand_table(order: u64) -> Arc<ExpandTable> {
    if let Some(t) = EXPAND_TABLES.read().unwrap().get(&order) {
        return t.clone();
    }
    let oi = order_info(order);
    let mut table: Vec<Option<Vec<(u64, i8)>>> = Vec::with_capacity(order as usize);
    for e in 0..order {
        // per-factor exponent and whether it needs the Φ_{pᵉ} rewrite
        let mut parts: Vec<Vec<(u64, i8)>> = Vec::with_capacity(oi.factors.len());
        let mut canonical = true;
        for f in &oi.factors {
            let a = (e as u128 * f.crt_inv as u128 % f.pe as u128) as u64;
            if a < f.phi {
                parts.push(vec![(a as u64 * f.cofactor % order, 1)]);
            } else {
                canonical = false;
                let j = a - f.phi;
                parts.push(
                    (0..f.p - 1)
                        .map(|s| (((s * f.pe1 + j) % f.pe) * f.cofactor % order, -1))
                        .collect(),
                );
            }
        }
        if canonical {
            table.push(None);
            continue;
        }
        let mut acc: Vec<(u64, i8)> = vec![(0, 1)];
        for part in parts {
            let mut next = Vec::with_capacity(acc.len() * part.len());
            for &(x, sx) in &acc {
                for &(y, sy) in &part {
                    next.push(((x + y) % order, sx * sy));
                }
            }
            acc = next;
        }
        table.push(Some(acc));
    }
    let t = Arc::new(ExpandTable { order, table });
    EXPAND_TABLES.write().unwrap().insert(order, t.clone());
    t
}

/// Per-thread workspace: a raw accumulator over all exponents mod L and a
/// canonical accumulator over tensor-basis exponents.
pub(crate) struct RawEngine {
    expand: Arc<ExpandTable>,
    raw: Vec<i128>,
    raw_touched: Vec<u64>,
    canon: Vec<i128>,
    canon_touched: Vec<u64>,
}

impl RawEngine {
    pub fn new(order: u64) -> Self {
        let expand = expand_table(order);
        RawEngine {
            expand,
            raw: vec![0; order as usize],
            raw_touched: Vec::new(),
            canon: vec![0; order as usize],
            canon_touched: Vec::new(),
        }
    }

    /// raw += a · b (group-algebra convolution).
    pub fn convolve(&mut self, a: &Entry, b: &Entry) -> Result<(), Overflow> {
        let l = self.expand.order;
        for &(ea, ca) in a {
            for &(eb, cb) in b {
                let mut e = ea + eb;
                if e >= l {
                    e -= l;
                }
                let c = ca.checked_mul(cb).ok_or(Overflow)?;
                let slot = &mut self.raw[e as usize];
                if *slot == 0 {
                    self.raw_touched.push(e);
                }
                *slot = slot.checked_add(c).ok_or(Overflow)?;
            }
        }
        Ok(())
    }

    /// raw += s · a without convolution (a may be any raw terms).
    pub fn add_scaled(&mut self, a: &Entry, s: i128) -> Result<(), Overflow> {
        if s == 0 {
            return Ok(());
        }
        for &(e, c) in a {
            let c = c.checked_mul(s).ok_or(Overflow)?;
            let slot = &mut self.raw[e as usize];
            if *slot == 0 {
                self.raw_touched.push(e);
            }
            *slot = slot.checked_add(c).ok_or(Overflow)?;
        }
        Ok(())
    }

    /// Drains the raw accumulator through the expansion table into the
    /// canonical accumulator and returns the finished entry.
    pub fn reduce(&mut self) -> Result<Entry, Overflow> {
        for idx in 0..self.raw_touched.len() {
            let e = self.raw_touched[idx];
            let c = self.raw[e as usize];
            self.raw[e as usize] = 0;
            if c == 0 {
                continue;
            }
            match &self.expand.table[e as usize] {
                None => {
                    let slot = &mut self.canon[e as usize];
                    if *slot == 0 {
                        self.canon_touched.push(e);
                    }
                    *slot = slot.checked_add(c).ok_or(Overflow)?;
                }
                Some(terms) => {
                    for &(m, s) in terms {
                        let signed = if s > 0 { c } else { c.checked_neg().ok_or(Overflow)? };
                        let slot = &mut self.canon[m as usize];
                        if *slot == 0 {
                            self.canon_touched.push(m);
                        }
                        *slot = slot.checked_add(signed).ok_or(Overflow)?;
                    }
                }
            }
        }
        self.raw_touched.clear();
        self.canon_touched.sort_unstable();
        let mut out = Entry::new();
        for &m in &self.canon_touched {
            let c = self.canon[m as usize];
            self.canon[m as usize] = 0;
            if c != 0 {
                out.push((m, c));
            }
        }
        self.canon_touched.clear();
        Ok(out)
    }
}

/// A matrix of cyclotomic values held as integer-scaled canonical entries;
/// the mathematical value of entry (i, j) is `e[i][j] / scale`.
#[derive(Clone)]
pub(crate) struct ScaledMatrix {
    pub order: u64,
    pub scale: BigInt,
    pub e: Vec<Vec<Entry>>,
}

impl ScaledMatrix {
    pub fn rows(&self) -> usize {
        self.e.len()
    }

    /// Builds from exact values, lifting everything to `order` and scaling
    /// by the common denominator of all coefficients.
    pub fn from_cyc(m: &[Vec<Cyc>], order: u64) -> Result<Self, Overflow> {
        let mut denom = BigInt::one();
        let lifted: Vec<Vec<Cyc>> = m
            .iter()
            .map(|row| row.iter().map(|v| v.lift(order)).collect())
            .collect();
        for row in &lifted {
            for v in row {
                for (_, c) in v.raw_pairs() {
                    denom = denom.lcm(c.denom());
                }
            }
        }
        let e = lifted
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| {
                        let mut entry: Entry = v
                            .raw_pairs()
                            .into_iter()
                            .map(|(k, c)| {
                                let scaled = c.numer() * (&denom / c.denom());
                                scaled.to_i128().map(|ci| (k, ci)).ok_or(Overflow)
                            })
                            .collect::<Result<_, _>>()?;
                        entry.sort_unstable_by_key(|t| t.0);
                        Ok(entry)
                    })
                    .collect::<Result<Vec<_>, Overflow>>()
            })
            .collect::<Result<Vec<_>, Overflow>>()?;
        Ok(ScaledMatrix {
            order,
            scale: denom,
            e,
        })
    }

    pub fn entry_to_cyc(&self, i: u64, j: u64) -> Cyc {
        entry_to_cyc(self.order, &self.e[i as usize][j as usize], &self.scale)
    }

    /// Matrix product, parallel over rows.
    pub fn mul(&self, rhs: &ScaledMatrix) -> Result<ScaledMatrix, Overflow> {
        assert_eq!(self.order, rhs.order);
        let n = self.e[0].len();
        assert_eq!(n, rhs.e.len());
        let cols = rhs.e[0].len();
        use rayon::prelude::*;
        let e: Result<Vec<Vec<Entry>>, Overflow> = self
            .e
            .par_iter()
            .map(|arow| {
                let mut eng = RawEngine::new(self.order);
                let mut out = Vec::with_capacity(cols);
                for j in 0..cols {
                    for (t, a) in arow.iter().enumerate() {
                        eng.convolve(a, &rhs.e[t][j])?;
                    }
                    out.push(eng.reduce()?);
                }
                Ok(out)
            })
            .collect();
        Ok(ScaledMatrix {
            order: self.order,
            scale: &self.scale * &rhs.scale,
            e: e?,
        })
    }

    /// Entrywise complex conjugation (exponent negation plus re-reduction).
    pub fn conjugate(&self) -> Result<ScaledMatrix, Overflow> {
        let l = self.order;
        let mut eng = RawEngine::new(l);
        let e = self
            .e
            .iter()
            .map(|row| {
                row.iter()
                    .map(|entry| {
                        let flipped: Entry =
                            entry.iter().map(|&(k, c)| ((l - k) % l, c)).collect();
                        eng.add_scaled(&flipped, 1)?;
                        eng.reduce()
                    })
                    .collect::<Result<Vec<_>, Overflow>>()
            })
            .collect::<Result<Vec<_>, Overflow>>()?;
        Ok(ScaledMatrix {
            order: l,
            scale: self.scale.clone(),
            e,
        })
    }

    pub fn transpose(&self) -> ScaledMatrix {
        let rows = self.e.len();
        let cols = self.e[0].len();
        let e = (0..cols)
            .map(|j| (0..rows).map(|i| self.e[i][j].clone()).collect())
            .collect();
        ScaledMatrix {
            order: self.order,
            scale: self.scale.clone(),
            e,
        }
    }

    /// Scales column j by the (unit-circle) diagonal value t_j.
    pub fn scale_columns(&self, t: &ScaledMatrix) -> Result<ScaledMatrix, Overflow> {
        // t is 1×n or n×1 flattened: expect t.e to hold n entries in row-major order
        let diag: Vec<&Entry> = t.e.iter().flat_map(|r| r.iter()).collect();
        let mut eng = RawEngine::new(self.order);
        let e = self
            .e
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&diag)
                    .map(|(a, d)| {
                        eng.convolve(a, d)?;
                        eng.reduce()
                    })
                    .collect::<Result<Vec<_>, Overflow>>()
            })
            .collect::<Result<Vec<_>, Overflow>>()?;
        Ok(ScaledMatrix {
            order: self.order,
            scale: &self.scale * &t.scale,
            e,
        })
    }

    /// Some(permutation) when self equals `scale` times a permutation matrix.
    pub fn as_permutation(&self) -> Option<Vec<usize>> {
        let n = self.e.len();
        let unit = self.scale.to_i128()?;
        let mut perm = vec![usize::MAX; n];
        for (i, row) in self.e.iter().enumerate() {
            let mut hit = None;
            for (j, entry) in row.iter().enumerate() {
                if entry.is_empty() {
                    continue;
                }
                if entry.len() == 1 && entry[0] == (0, unit) && hit.is_none() {
                    hit = Some(j);
                } else {
                    return None;
                }
            }
            perm[i] = hit?;
        }
        // bijectivity
        let mut seen = vec![false; n];
        for &j in &perm {
            if seen[j] {
                return None;
            }
            seen[j] = true;
        }
        Some(perm)
    }

    pub fn is_identity(&self) -> bool {
        self.as_permutation()
            .map_or(false, |p| p.iter().enumerate().all(|(i, &j)| i == j))
    }

    /// Exact equality of the represented values across different scales.
    pub fn equals(&self, rhs: &ScaledMatrix) -> bool {
        if self.order != rhs.order || self.e.len() != rhs.e.len() {
            return false;
        }
        for (ra, rb) in self.e.iter().zip(&rhs.e) {
            if ra.len() != rb.len() {
                return false;
            }
            for (a, b) in ra.iter().zip(rb) {
                if !entries_equal(a, &self.scale, b, &rhs.scale) {
                    return false;
                }
            }
        }
        true
    }
}

fn entries_equal(a: &Entry, sa: &BigInt, b: &Entry, sb: &BigInt) -> bool {
    if a.len() != b.len() {
        return false;
    }
    for (&(ea, ca), &(eb, cb)) in a.iter().zip(b) {
        if ea != eb {
            return false;
        }
        if sa == sb {
            if ca != cb {
                return false;
            }
        } else if BigInt::from(ca) * sb != BigInt::from(cb) * sa {
            return false;
        }
    }
    true
}

pub(crate) fn entry_to_cyc(order: u64, entry: &Entry, scale: &BigInt) -> Cyc {
    use num_rational::BigRational;
    let mut acc = Cyc::zero(order);
    for &(k, c) in entry {
        let q = BigRational::new(BigInt::from(c), scale.clone());
        let mono = Cyc::root_of_unity(order, k as i64).scale(&q);
        acc = acc.add(&mono);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn c(n: i64, d: i64) -> Cyc {
        Cyc::from_rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    #[test]
    fn scaled_matrix_round_trip() {
        let m = vec![
            vec![c(1, 2), Cyc::root_of_unity(12, 5).scale(&BigRational::new(3.into(), 4.into()))],
            vec![Cyc::root_of_unity(3, 1), c(-7, 6)],
        ];
        let sm = ScaledMatrix::from_cyc(&m, 12).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(sm.entry_to_cyc(i as u64, j as u64), m[i][j].lift(12));
            }
        }
    }

    #[test]
    fn products_match_generic_path() {
        let z = |k| Cyc::root_of_unity(9, k);
        let a = vec![
            vec![z(1).add(&z(5)), c(1, 3)],
            vec![z(7).sub(&Cyc::one()), z(2).scale(&BigRational::new(2.into(), 1.into()))],
        ];
        let b = vec![
            vec![z(4), z(8).add(&c(1, 2))],
            vec![c(-1, 1), z(3)],
        ];
        let sa = ScaledMatrix::from_cyc(&a, 9).unwrap();
        let sb = ScaledMatrix::from_cyc(&b, 9).unwrap();
        let sp = sa.mul(&sb).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut want = Cyc::zero(9);
                for t in 0..2 {
                    want = want.add(&a[i][t].mul(&b[t][j]));
                }
                assert_eq!(sp.entry_to_cyc(i as u64, j as u64), want, "({}, {})", i, j);
            }
        }
    }

    #[test]
    fn conjugate_and_permutation() {
        let z = Cyc::root_of_unity(5, 2);
        let m = vec![
            vec![Cyc::zero(5), z.clone()],
            vec![z.conjugate(), Cyc::zero(5)],
        ];
        let sm = ScaledMatrix::from_cyc(&m, 5).unwrap();
        let conj = sm.conjugate().unwrap();
        assert_eq!(conj.entry_to_cyc(0, 1), z.conjugate());
        // z · z̄ = 1, so the product of sm with its conjugate transpose is I
        let prod = sm.mul(&conj.transpose()).unwrap();
        assert!(prod.is_identity());
        assert_eq!(prod.as_permutation(), Some(vec![0, 1]));
    }
}
