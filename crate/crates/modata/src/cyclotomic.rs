//! Exact arithmetic in cyclotomic fields Q[ξ_L], ξ_L = exp(2πi/L).
//!
//! Values are sparse rational combinations of the *tensor basis*: after
//! factoring L = ∏ pᵉ, the products ∏_p ξ_{pᵉ}^{a_p} with 0 ≤ a_p < φ(pᵉ)
//! form a Q-basis of Q[ξ_L].  Reduction into the basis uses the one-step
//! rewrite coming from Φ_{pᵉ}(x) = Σ_{s<p} x^{s·p^{e−1}}:
//!
//! ξ_{pᵉ}^{φ(pᵉ)+j} = −Σ_{s<p−1} ξ_{pᵉ}^{s·p^{e−1}+j},   0 ≤ j < p^{e−1}.
//!
//! Every value is kept in canonical form, so equality is coefficient
//! comparison and zero-testing is emptiness.  Mixed orders lift to the lcm.
//! The tensor basis of Q[ξ_{L'}] for L' | L maps *into* the tensor basis of
//! Q[ξ_L] (exponents scale by L/L'), which makes conductor detection a
//! support inspection rather than a Galois-theory computation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::numeric::{self, BigComplex};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("division by zero in a cyclotomic field")]
    InvertZero,
    #[error("{0} is not a unit modulo {1}")]
    NotAUnit(u64, u64),
    #[error("bad modulus {0}: squarefree part must be 1 mod 4")]
    BadModulus(u64),
    #[error("power-basis conversion needs phi({0}) = {1} <= {2}")]
    OrderTooLarge(u64, u64, u64),
    #[error("coefficient vector has length {0}, expected phi({1}) = {2}")]
    BadCoeffLength(usize, u64, u64),
}

/// One prime-power factor pᵉ of the order, with the data needed to move
/// between raw exponents mod L and tensor-basis tuples.
#[derive(Debug, Clone)]
pub(crate) struct Factor {
    pub(crate) p: u64,
    pub(crate) pe: u64,   // p^e
    pub(crate) pe1: u64,  // p^(e-1)
    pub(crate) phi: u64,  // φ(p^e)
    pub(crate) stride: u64,
    pub(crate) cofactor: u64, // L / p^e
    pub(crate) crt_inv: u64,  // (L / p^e)^(-1) mod p^e
}

#[derive(Debug)]
pub(crate) struct OrderInfo {
    pub(crate) order: u64,
    pub(crate) phi: u64,
    pub(crate) factors: Vec<Factor>,
}

static ORDERS: Lazy<RwLock<HashMap<u64, Arc<OrderInfo>>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

fn mod_inv(a: u64, m: u64) -> u64 {
    // extended Euclid; gcd(a, m) = 1 assumed
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1);
    t.rem_euclid(m as i128) as u64
}

pub(crate) fn order_info(order: u64) -> Arc<OrderInfo> {
    assert!(order >= 1, "cyclotomic order must be positive");
    if let Some(oi) = ORDERS.read().unwrap().get(&order) {
        return oi.clone();
    }
    let mut factors = Vec::new();
    let mut n = order;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut pe = 1;
            while n % p == 0 {
                n /= p;
                pe *= p;
            }
            factors.push((p, pe));
        }
        p += 1;
    }
    if n > 1 {
        factors.push((n, n));
    }
    let mut stride = 1;
    let mut phi_total = 1;
    let factors: Vec<Factor> = factors
        .into_iter()
        .map(|(p, pe)| {
            let pe1 = pe / p;
            let phi = pe - pe1;
            let cofactor = order / pe;
            let f = Factor {
                p,
                pe,
                pe1,
                phi,
                stride,
                cofactor,
                crt_inv: mod_inv(cofactor % pe, pe),
            };
            stride *= phi;
            phi_total *= phi;
            f
        })
        .collect();
    let oi = Arc::new(OrderInfo {
        order,
        phi: phi_total,
        factors,
    });
    ORDERS.write().unwrap().insert(order, oi.clone());
    oi
}

pub fn euler_phi(n: u64) -> u64 {
    order_info(n).phi
}

/// An exact element of Q[ξ_L].  `terms` maps tensor-basis indices
/// (mixed-radix over the factor strides) to nonzero rational coefficients.
#[derive(Clone)]
pub struct Cyc {
    order: u64,
    terms: BTreeMap<u64, BigRational>,
}

impl Cyc {
    pub fn zero(order: u64) -> Self {
        order_info(order);
        Cyc {
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Cyc::from_rational(BigRational::one())
    }

    pub fn from_rational(q: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(0, q);
        }
        Cyc { order: 1, terms }
    }

    pub fn from_integer(n: i64) -> Self {
        Cyc::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// ξ_L^k as an exact value.
    pub fn root_of_unity(order: u64, k: i64) -> Self {
        let k = k.rem_euclid(order as i64) as u64;
        let mut c = Cyc::zero(order);
        c.add_raw_monomial(k, &BigRational::one());
        c
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Some(q) when the value lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().map_or(false, |q| q.is_one())
    }

    fn decode(&self, idx: u64) -> Vec<u64> {
        let oi = order_info(self.order);
        oi.factors
            .iter()
            .map(|f| (idx / f.stride) % f.phi)
            .collect()
    }

    /// Raw exponent k with ξ_L^k equal to the tensor-basis monomial `idx`.
    fn raw_exponent(&self, idx: u64) -> u64 {
        let oi = order_info(self.order);
        let mut k: u128 = 0;
        for f in &oi.factors {
            let a = (idx / f.stride) % f.phi;
            k += a as u128 * f.cofactor as u128;
        }
        (k % self.order as u128) as u64
    }

    /// Adds coeff·ξ_L^k (raw exponent, not necessarily in the basis box),
    /// expanding through the prime-power reductions.
    fn add_raw_monomial(&mut self, k: u64, coeff: &BigRational) {
        if coeff.is_zero() {
            return;
        }
        let oi = order_info(self.order);
        // (basis index, sign) accumulator across factors
        let mut acc: Vec<(u64, bool)> = vec![(0, false)];
        for f in &oi.factors {
            let a = (k as u128 * f.crt_inv as u128 % f.pe as u128) as u64;
            let expanded = expand_factor(f, a);
            let mut next = Vec::with_capacity(acc.len() * expanded.len());
            for &(idx, neg) in &acc {
                for &(b, bneg) in &expanded {
                    next.push((idx + b * f.stride, neg ^ bneg));
                }
            }
            acc = next;
        }
        for (idx, neg) in acc {
            let entry = self.terms.entry(idx).or_insert_with(BigRational::zero);
            if neg {
                *entry -= coeff;
            } else {
                *entry += coeff;
            }
            if entry.is_zero() {
                self.terms.remove(&idx);
            }
        }
    }

    /// Rewrites the value over a multiple of its order.
    pub fn lift(&self, new_order: u64) -> Cyc {
        if new_order == self.order {
            return self.clone();
        }
        assert!(
            new_order % self.order == 0,
            "lift target {} is not a multiple of {}",
            new_order,
            self.order
        );
        let ratio = new_order / self.order;
        let mut out = Cyc::zero(new_order);
        for (&idx, coeff) in &self.terms {
            let k = self.raw_exponent(idx);
            out.add_raw_monomial(k * ratio, coeff);
        }
        out
    }

    /// Sparse rational coordinates of the value in the canonical tensor
    /// basis of Q[ξ_order]; `order` must be a multiple of the stored order.
    /// The basis is canonical per order, so two values are equal iff their
    /// coordinates at a common order agree, and the map is Q-linear: it
    /// turns an equation with cyclotomic coefficients into φ(order) rational
    /// equations, one per basis monomial.
    pub fn coords_at(&self, order: u64) -> Vec<(u64, BigRational)> {
        self.lift(order).terms.into_iter().collect()
    }

    fn common_order(a: &Cyc, b: &Cyc) -> u64 {
        num_integer::lcm(a.order, b.order)
    }

    pub fn add(&self, rhs: &Cyc) -> Cyc {
        let l = Cyc::common_order(self, rhs);
        let mut out = self.lift(l);
        for (&idx, coeff) in &rhs.lift(l).terms {
            let entry = out.terms.entry(idx).or_insert_with(BigRational::zero);
            *entry += coeff;
            if entry.is_zero() {
                out.terms.remove(&idx);
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Cyc) -> Cyc {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Cyc {
        Cyc {
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|(&i, c)| (i, -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> Cyc {
        if q.is_zero() {
            return Cyc::zero(self.order);
        }
        Cyc {
            order: self.order,
            terms: self.terms.iter().map(|(&i, c)| (i, c * q)).collect(),
        }
    }

    pub fn mul(&self, rhs: &Cyc) -> Cyc {
        // rational fast paths keep orders small
        if let Some(q) = self.as_rational() {
            return rhs.scale(&q);
        }
        if let Some(q) = rhs.as_rational() {
            return self.scale(&q);
        }
        let l = Cyc::common_order(self, rhs);
        let a = self.lift(l);
        let b = rhs.lift(l);
        let oi = order_info(l);
        let a_tuples: Vec<(Vec<u64>, &BigRational)> =
            a.terms.iter().map(|(&i, c)| (a.decode(i), c)).collect();
        let b_tuples: Vec<(Vec<u64>, &BigRational)> =
            b.terms.iter().map(|(&i, c)| (b.decode(i), c)).collect();
        let mut out = Cyc::zero(l);
        for (ta, ca) in &a_tuples {
            for (tb, cb) in &b_tuples {
                let coeff = *ca * *cb;
                // combine per factor, then expand whatever left the box
                let mut acc: Vec<(u64, bool)> = vec![(0, false)];
                for (fi, f) in oi.factors.iter().enumerate() {
                    let mut t = ta[fi] + tb[fi];
                    if t >= f.pe {
                        t -= f.pe;
                    }
                    let expanded = expand_factor(f, t);
                    let mut next = Vec::with_capacity(acc.len() * expanded.len());
                    for &(idx, neg) in &acc {
                        for &(b2, bneg) in &expanded {
                            next.push((idx + b2 * f.stride, neg ^ bneg));
                        }
                    }
                    acc = next;
                }
                for (idx, neg) in acc {
                    let entry = out.terms.entry(idx).or_insert_with(BigRational::zero);
                    if neg {
                        *entry -= &coeff;
                    } else {
                        *entry += &coeff;
                    }
                    if entry.is_zero() {
                        out.terms.remove(&idx);
                    }
                }
            }
        }
        out
    }

    /// Complex conjugation, ξ ↦ ξ̄ = ξ^{L−1}.
    pub fn conjugate(&self) -> Cyc {
        self.galois_raw(self.order - 1)
    }

    pub fn is_real(&self) -> bool {
        *self == self.conjugate()
    }

    /// The Galois automorphism ξ_L ↦ ξ_L^m for gcd(m, L) = 1.
    pub fn galois(&self, m: u64) -> Result<Cyc, ScalarError> {
        let m = m % self.order;
        if num_integer::gcd(m, self.order) != 1 {
            return Err(ScalarError::NotAUnit(m, self.order));
        }
        Ok(self.galois_raw(m))
    }

    fn galois_raw(&self, m: u64) -> Cyc {
        let mut out = Cyc::zero(self.order);
        for (&idx, coeff) in &self.terms {
            let k = self.raw_exponent(idx);
            out.add_raw_monomial(((k as u128 * m as u128) % self.order as u128) as u64, coeff);
        }
        out
    }

    /// Multiplicative inverse.  Monomials invert in O(1); otherwise the
    /// minimal polynomial is found by linear algebra on successive powers
    /// (the degree is tiny for the structured values this crate builds).
    pub fn invert(&self) -> Result<Cyc, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::InvertZero);
        }
        if self.terms.len() == 1 {
            let (&idx, coeff) = self.terms.iter().next().unwrap();
            let k = self.raw_exponent(idx);
            let mut out = Cyc::zero(self.order);
            out.add_raw_monomial((self.order - k) % self.order, &coeff.recip());
            return Ok(out);
        }
        // powers 1, a, a², …  until linearly dependent
        let mut powers: Vec<Cyc> = vec![Cyc::one().lift(self.order)];
        loop {
            let next = powers.last().unwrap().mul(self);
            let n = powers.len();
            // solve Σ c_i powers[i] = next over the joint support
            let mut cols: BTreeMap<u64, usize> = BTreeMap::new();
            for p in powers.iter().chain(std::iter::once(&next)) {
                for &i in p.terms.keys() {
                    let len = cols.len();
                    cols.entry(i).or_insert(len);
                }
            }
            let rows = cols.len();
            let mut m = vec![vec![BigRational::zero(); n + 1]; rows];
            for (j, p) in powers.iter().enumerate() {
                for (&i, c) in &p.terms {
                    m[cols[&i]][j] = c.clone();
                }
            }
            for (&i, c) in &next.terms {
                m[cols[&i]][n] = c.clone();
            }
            if let Some(sol) = solve_rational(&mut m, n) {
                // next = Σ sol_i a^i  ⇒  a·(a^{n-1} − Σ_{i≥1} sol_i a^{i-1}) = sol_0
                if sol[0].is_zero() {
                    // a divides a zero combination yet a ≠ 0: impossible for
                    // a field element; keep extending
                    powers.push(next);
                    continue;
                }
                let mut num = powers[n - 1].clone();
                for (i, s) in sol.iter().enumerate().skip(1) {
                    num = num.sub(&powers[i - 1].scale(s));
                }
                return Ok(num.scale(&sol[0].recip()));
            }
            powers.push(next);
        }
    }

    /// Numerical embedding ξ_L ↦ exp(2πi/L) at the given precision.
    pub fn embed(&self, precision: usize) -> BigComplex {
        let mut acc = BigComplex::zero(precision);
        for (&idx, coeff) in &self.terms {
            let k = self.raw_exponent(idx);
            let root = numeric::unit_root(self.order, k, precision);
            acc = acc.add(&root.scale_ratio(coeff));
        }
        acc
    }

    /// Exact sign of a real value (errors if the value is not real).
    pub fn real_sign(&self) -> std::cmp::Ordering {
        assert!(self.is_real(), "real_sign on a non-real value");
        if self.is_zero() {
            return std::cmp::Ordering::Equal;
        }
        let mut prec = 128;
        loop {
            let v = self.embed(prec);
            // error from the embedding is far below 2^(16-prec) here
            let threshold = numeric::pow2(-(prec as i64) + 32, prec);
            if v.re.abs().cmp(&threshold).map_or(false, |c| c > 0) {
                return if v.re.is_negative() {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Greater
                };
            }
            prec *= 2;
            assert!(prec <= 1 << 16, "sign test failed to resolve");
        }
    }

    /// The smallest L' with the value inside Q[ξ_{L'}].  Because the tensor
    /// basis of a divisor order sits inside the tensor basis of L, this only
    /// inspects exponent divisibility.
    pub fn conductor(&self) -> u64 {
        let oi = order_info(self.order);
        let mut cond = 1u64;
        for (fi, f) in oi.factors.iter().enumerate() {
            let mut need = 1u64; // p^j actually required
            for &idx in self.terms.keys() {
                let a = self.decode(idx)[fi];
                if a == 0 {
                    continue;
                }
                // smallest p-power p^(e-j) with p^j | a gives the level needed
                let mut aa = a;
                let mut level = f.pe;
                while aa % f.p == 0 && level > f.p {
                    aa /= f.p;
                    level /= f.p;
                }
                need = need.max(level);
                if need == f.pe {
                    break;
                }
            }
            cond *= need;
        }
        // ξ with odd conductor never needs the factor 2^1 (ξ_2 = −1 ∈ Q)
        cond
    }

    /// Rewrites over the conductor order (smallest field containing the value).
    pub fn reduce_order(&self) -> Cyc {
        let cond = self.conductor();
        if cond == self.order {
            return self.clone();
        }
        let ratio = self.order / cond;
        let mut out = Cyc::zero(cond);
        for (&idx, coeff) in &self.terms {
            let k = self.raw_exponent(idx);
            debug_assert_eq!(k % ratio, 0);
            out.add_raw_monomial(k / ratio, coeff);
        }
        out
    }

    /// Coefficients over the power basis ξ_L^0 … ξ_L^{φ(L)−1} of the value's
    /// own conductor; returns (conductor, coeffs).
    pub fn to_power_basis(&self) -> Result<(u64, Vec<BigRational>), ScalarError> {
        let reduced = self.reduce_order();
        let l = reduced.order;
        let phi = order_info(l).phi;
        const LIMIT: u64 = 2048;
        if phi > LIMIT {
            return Err(ScalarError::OrderTooLarge(l, phi, LIMIT));
        }
        let inv = power_basis_inverse(l);
        let mut coeffs = vec![BigRational::zero(); phi as usize];
        for (&idx, c) in &reduced.terms {
            for (j, coeff) in coeffs.iter_mut().enumerate() {
                let m = &inv[j][idx as usize];
                if !m.is_zero() {
                    *coeff += m * c;
                }
            }
        }
        Ok((l, coeffs))
    }

    /// The value's terms as (raw exponent mod L, coefficient) pairs; the
    /// exponents are those of canonical tensor-basis monomials.
    pub(crate) fn raw_pairs(&self) -> Vec<(u64, &BigRational)> {
        self.terms
            .iter()
            .map(|(&idx, c)| (self.raw_exponent(idx), c))
            .collect()
    }

    /// Some((L, k)) with gcd(L, k·…) reduced when the value equals ξ_L^k
    /// exactly.  Roots of order 2L sit inside Q(ξ_L) for odd L (e.g. −1 in
    /// the rationals), so the search runs at twice the stored order.
    pub fn as_root_of_unity(&self) -> Option<(u64, u64)> {
        if self.is_zero() {
            return None;
        }
        let l2 = 2 * self.order;
        // locate the angle numerically, then certify exactly
        let v = self.embed(96);
        let angle = crate::numeric::real::atan2(&v.im, &v.re);
        let tau = crate::numeric::pi(96).mul(
            &astro_float::BigFloat::from_u64(2, 96),
            96,
            astro_float::RoundingMode::ToEven,
        );
        let frac = angle
            .div(&tau, 96, astro_float::RoundingMode::ToEven)
            .mul(
                &astro_float::BigFloat::from_u64(l2, 96),
                96,
                astro_float::RoundingMode::ToEven,
            );
        use crate::numeric::ToF64;
        let k = (frac.to_f64().round() as i64).rem_euclid(l2 as i64) as u64;
        if *self == Cyc::root_of_unity(l2, k as i64) {
            if k == 0 {
                return Some((1, 0));
            }
            let g = num_integer::Integer::gcd(&l2, &k);
            Some((l2 / g, k / g))
        } else {
            None
        }
    }

    /// Value from power-basis coefficients (length φ(L)).
    pub fn from_power_basis(order: u64, coeffs: &[BigRational]) -> Result<Cyc, ScalarError> {
        let phi = order_info(order).phi;
        if coeffs.len() as u64 != phi {
            return Err(ScalarError::BadCoeffLength(coeffs.len(), order, phi));
        }
        let mut out = Cyc::zero(order);
        for (j, c) in coeffs.iter().enumerate() {
            out.add_raw_monomial(j as u64, c);
        }
        Ok(out)
    }
}

/// Expands ξ_{pᵉ}^t (0 ≤ t < pᵉ) into signed tensor-basis exponents.
fn expand_factor(f: &Factor, t: u64) -> Vec<(u64, bool)> {
    if t < f.phi {
        vec![(t, false)]
    } else {
        let j = t - f.phi;
        (0..f.p - 1).map(|s| (s * f.pe1 + j, true)).collect()
    }
}

/// Gaussian elimination; returns x with M·x = rhs when the system (rows of
/// width n+1, last column the rhs) is consistent and determines x uniquely.
fn solve_rational(m: &mut [Vec<BigRational>], n: usize) -> Option<Vec<BigRational>> {
    let rows = m.len();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..n {
        let Some(r) = (pivot_row..rows).find(|&r| !m[r][col].is_zero()) else {
            return None; // underdetermined
        };
        m.swap(pivot_row, r);
        let inv = m[pivot_row][col].recip();
        for c in col..=n {
            m[pivot_row][c] = &m[pivot_row][c] * &inv;
        }
        for r in 0..rows {
            if r != pivot_row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..=n {
                    let delta = &factor * &m[pivot_row][c];
                    m[r][c] = &m[r][c] - &delta;
                }
            }
        }
        pivots.push(col);
        pivot_row += 1;
        if pivot_row == rows {
            break;
        }
    }
    if pivots.len() < n {
        return None;
    }
    // consistency of the remaining rows
    for r in pivot_row..rows {
        if !m[r][n].is_zero() {
            return None;
        }
    }
    Some((0..n).map(|i| m[i][n].clone()).collect())
}

static POWER_BASIS_INV: Lazy<RwLock<HashMap<u64, Arc<Vec<Vec<BigRational>>>>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

/// Matrix sending tensor-basis coordinates to power-basis coordinates;
/// row j gives the ξ_L^j-coefficient of each tensor-basis monomial.
fn power_basis_inverse(order: u64) -> Arc<Vec<Vec<BigRational>>> {
    if let Some(m) = POWER_BASIS_INV.read().unwrap().get(&order) {
        return m.clone();
    }
    let phi = order_info(order).phi as usize;
    // columns of P: tensor coordinates of ξ_L^j
    let mut p = vec![vec![BigRational::zero(); phi]; phi];
    for j in 0..phi {
        let mut mono = Cyc::zero(order);
        mono.add_raw_monomial(j as u64, &BigRational::one());
        for (&idx, c) in &mono.terms {
            p[idx as usize][j] = c.clone();
        }
    }
    // invert by solving P X = I column by column
    let mut inv = vec![vec![BigRational::zero(); phi]; phi];
    let mut aug = vec![vec![BigRational::zero(); 2 * phi]; phi];
    for r in 0..phi {
        for c in 0..phi {
            aug[r][c] = p[r][c].clone();
        }
        aug[r][phi + r] = BigRational::one();
    }
    for col in 0..phi {
        let r = (col..phi)
            .find(|&r| !aug[r][col].is_zero())
            .expect("power basis is a basis");
        aug.swap(col, r);
        let invp = aug[col][col].recip();
        for c in col..2 * phi {
            aug[col][c] = &aug[col][c] * &invp;
        }
        for r in 0..phi {
            if r != col && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                for c in col..2 * phi {
                    let delta = &f * &aug[col][c];
                    aug[r][c] = &aug[r][c] - &delta;
                }
            }
        }
    }
    for r in 0..phi {
        for c in 0..phi {
            // X = P^{-1}: row r of X maps tensor idx c to power coeff r
            inv[r][c] = aug[r][phi + c].clone();
        }
    }
    let arc = Arc::new(inv);
    POWER_BASIS_INV
        .write()
        .unwrap()
        .insert(order, arc.clone());
    arc
}

impl PartialEq for Cyc {
    fn eq(&self, other: &Self) -> bool {
        let l = Cyc::common_order(self, other);
        self.lift(l).terms == other.lift(l).terms
    }
}
impl Eq for Cyc {}

impl fmt::Debug for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&idx, c)| {
                let k = self.raw_exponent(idx);
                if k == 0 {
                    format!("{}", c)
                } else {
                    format!("{}*z{}^{}", c, self.order, k)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl std::ops::Add for &Cyc {
    type Output = Cyc;
    fn add(self, rhs: &Cyc) -> Cyc {
        Cyc::add(self, rhs)
    }
}
impl std::ops::Sub for &Cyc {
    type Output = Cyc;
    fn sub(self, rhs: &Cyc) -> Cyc {
        Cyc::sub(self, rhs)
    }
}
impl std::ops::Mul for &Cyc {
    type Output = Cyc;
    fn mul(self, rhs: &Cyc) -> Cyc {
        Cyc::mul(self, rhs)
    }
}
impl std::ops::Neg for &Cyc {
    type Output = Cyc;
    fn neg(self) -> Cyc {
        Cyc::neg(self)
    }
}

/// Jacobi symbol (a|n) for odd n > 0.
pub fn jacobi(mut a: i64, mut n: u64) -> i32 {
    assert!(n % 2 == 1);
    a = a.rem_euclid(n as i64);
    let mut result = 1i32;
    let mut aa = a as u64;
    while aa != 0 {
        while aa % 2 == 0 {
            aa /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut aa, &mut n);
        if aa % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        aa %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// The quadratic Gauss sum Σ_a (a|f) ξ_f^a for squarefree f ≡ 1 mod 4
/// squares to f and embeds to the positive root.  General p = s²·f is
/// handled by scaling: the returned value squares to p exactly.
pub fn sqrt_as_gauss_sum(p: u64) -> Result<Cyc, ScalarError> {
    // split off the square part
    let mut f = p;
    let mut s = 1u64;
    let mut d = 2u64;
    while d * d <= f {
        while f % (d * d) == 0 {
            f /= d * d;
            s *= d;
        }
        d += 1;
    }
    if f % 4 != 1 {
        return Err(ScalarError::BadModulus(p));
    }
    let mut sum = Cyc::zero(f);
    for a in 1..f {
        let j = jacobi(a as i64, f);
        if j != 0 {
            sum.add_raw_monomial(a, &BigRational::from_integer(BigInt::from(j)));
        }
    }
    Ok(sum.scale(&BigRational::from_integer(BigInt::from(s))))
}

/// Exact positive square root of any positive integer, assembled from
/// Gauss sums:  √2 = ξ_8 − ξ_8³,  √p = g_p (p ≡ 1 mod 4),  √p = −i·g_p
/// (p ≡ 3 mod 4, since g_p = i√p there).
pub fn sqrt_positive_integer(n: u64) -> Cyc {
    assert!(n > 0);
    let mut f = n;
    let mut s = 1u64;
    let mut d = 2u64;
    while d * d <= f {
        while f % (d * d) == 0 {
            f /= d * d;
            s *= d;
        }
        d += 1;
    }
    let mut out = Cyc::from_rational(BigRational::from_integer(BigInt::from(s)));
    let mut m = f;
    let mut p = 2u64;
    while p * p <= m || (m > 1 && p <= m) {
        if m % p == 0 {
            m /= p;
            let root = if p == 2 {
                let a = Cyc::root_of_unity(8, 1);
                let b = Cyc::root_of_unity(8, 3);
                a.sub(&b)
            } else {
                let mut g = Cyc::zero(p);
                for a in 1..p {
                    let j = jacobi(a as i64, p);
                    g.add_raw_monomial(a, &BigRational::from_integer(BigInt::from(j)));
                }
                if p % 4 == 1 {
                    g
                } else {
                    // √p = ξ_4^3 · g_p
                    g.mul(&Cyc::root_of_unity(4, 3))
                }
            };
            out = out.mul(&root);
        } else {
            p += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ToF64;
    use num_traits::FromPrimitive;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn roots_of_unity_sum_to_minus_one() {
        // ξ_13 + ξ_13² + … + ξ_13¹² = −1
        let mut sum = Cyc::zero(13);
        for k in 1..13 {
            sum = sum.add(&Cyc::root_of_unity(13, k));
        }
        assert_eq!(sum, Cyc::from_integer(-1));
    }

    #[test]
    fn conjugate_is_involution() {
        let a = Cyc::root_of_unity(3, 1)
            .add(&Cyc::root_of_unity(5, 2).scale(&q(3, 7)));
        assert_eq!(a.conjugate().conjugate(), a);
        let b = Cyc::root_of_unity(9, 4);
        assert_eq!(
            a.mul(&b).conjugate(),
            a.conjugate().mul(&b.conjugate())
        );
    }

    #[test]
    fn gauss_sums_square_to_p() {
        // μ = ν² + 4 for ν = 1, 3, …, 19
        for p in [5u64, 13, 29, 53, 85, 125, 173, 229, 293, 365] {
            let g = sqrt_as_gauss_sum(p).unwrap();
            assert_eq!(g.mul(&g), Cyc::from_integer(p as i64), "p = {}", p);
            // embeds to the positive root
            let v = g.embed(128);
            let approx = v.re.to_f64();
            assert!(v.im.to_f64().abs() < 1e-30);
            assert!((approx - (p as f64).sqrt()).abs() < 1e-9, "p = {}", p);
        }
    }

    #[test]
    fn sqrt_of_general_integers() {
        for n in [2u64, 3, 6, 8, 12, 13, 75] {
            let r = sqrt_positive_integer(n);
            assert_eq!(r.mul(&r), Cyc::from_integer(n as i64), "n = {}", n);
            assert!(r.embed(128).re.to_f64() > 0.0);
        }
    }

    #[test]
    fn golden_style_inverse() {
        // δ = (3 + √13)/2 satisfies δ² = 3δ + 1, so δ⁻¹ = δ − 3
        let rt13 = sqrt_as_gauss_sum(13).unwrap();
        let delta = rt13.add(&Cyc::from_integer(3)).scale(&q(1, 2));
        let inv = delta.invert().unwrap();
        assert_eq!(delta.mul(&inv), Cyc::one());
        assert_eq!(inv, delta.sub(&Cyc::from_integer(3)));
    }

    #[test]
    fn coords_at_is_linear_and_separating() {
        // the same value stored at different orders has identical coordinates
        let a = Cyc::root_of_unity(3, 1);
        let b = Cyc::root_of_unity(9, 3);
        assert_eq!(a.coords_at(9), b.coords_at(9));
        // linearity: coords(x + λy) = coords(x) + λ·coords(y)
        let x = Cyc::root_of_unity(9, 2).add(&Cyc::root_of_unity(9, 5).scale(&q(2, 3)));
        let y = Cyc::root_of_unity(3, 2).sub(&Cyc::from_integer(4));
        let lam = q(-5, 7);
        let combined = x.add(&y.scale(&lam));
        let mut expect: BTreeMap<u64, BigRational> = x.coords_at(9).into_iter().collect();
        for (idx, c) in y.coords_at(9) {
            *expect.entry(idx).or_insert_with(BigRational::zero) += &lam * c;
        }
        expect.retain(|_, v| !v.is_zero());
        let got: BTreeMap<u64, BigRational> = combined.coords_at(9).into_iter().collect();
        assert_eq!(got, expect);
        // separation: distinct values give distinct coordinates
        assert_ne!(
            Cyc::root_of_unity(9, 1).coords_at(9),
            Cyc::root_of_unity(9, 2).coords_at(9)
        );
        assert!(Cyc::zero(9).coords_at(9).is_empty());
    }

    #[test]
    fn mixed_order_arithmetic() {
        // ξ_3 · ξ_5 = ξ_15^8
        let a = Cyc::root_of_unity(3, 1);
        let b = Cyc::root_of_unity(5, 1);
        assert_eq!(a.mul(&b), Cyc::root_of_unity(15, 8));
        // (1 + ξ_4)(1 − ξ_4) = 2
        let i = Cyc::root_of_unity(4, 1);
        let lhs = Cyc::one().add(&i).mul(&Cyc::one().sub(&i));
        assert_eq!(lhs, Cyc::from_integer(2));
    }

    #[test]
    fn conductor_detection() {
        let lifted = Cyc::root_of_unity(3, 1).lift(45);
        assert_eq!(lifted.conductor(), 3);
        assert_eq!(lifted.reduce_order(), Cyc::root_of_unity(3, 1));
        assert_eq!(Cyc::from_integer(7).lift(360).conductor(), 1);
        assert_eq!(Cyc::root_of_unity(8, 1).conductor(), 8);
    }

    #[test]
    fn power_basis_round_trip() {
        let val = Cyc::root_of_unity(36, 7)
            .scale(&q(2, 3))
            .add(&Cyc::root_of_unity(36, 31).scale(&q(-5, 4)))
            .add(&Cyc::from_integer(1));
        let (l, coeffs) = val.to_power_basis().unwrap();
        assert_eq!(l, 36);
        assert_eq!(coeffs.len(), 12);
        let back = Cyc::from_power_basis(l, &coeffs).unwrap();
        assert_eq!(back, val);
    }

    #[test]
    fn embedding_matches_f64() {
        let a = Cyc::root_of_unity(7, 2);
        let v = a.embed(192);
        let theta = 2.0 * std::f64::consts::PI * 2.0 / 7.0;
        assert!((v.re.to_f64() - theta.cos()).abs() < 1e-12);
        assert!((v.im.to_f64() - theta.sin()).abs() < 1e-12);
        let q32 = BigRational::from_f64(0.0).unwrap();
        assert!(Cyc::from_rational(q32).is_zero());
    }

    #[test]
    fn real_sign_test() {
        let rt13 = sqrt_as_gauss_sum(13).unwrap();
        assert_eq!(rt13.real_sign(), std::cmp::Ordering::Greater);
        assert_eq!(rt13.neg().real_sign(), std::cmp::Ordering::Less);
        assert_eq!(Cyc::zero(13).real_sign(), std::cmp::Ordering::Equal);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn ring_axioms(
            ka in 0i64..24, kb in 0i64..24, kc in 0i64..24,
            na in -6i64..6, nb in -6i64..6, nc in -6i64..6,
            da in 1i64..5, db in 1i64..5, dc in 1i64..5,
        ) {
            let a = Cyc::root_of_unity(24, ka).scale(&q(na, da));
            let b = Cyc::root_of_unity(24, kb).scale(&q(nb, db)).add(&Cyc::one());
            let c = Cyc::root_of_unity(24, kc).scale(&q(nc, dc)).sub(&Cyc::root_of_unity(8, 1));
            // associativity and distributivity
            proptest::prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            proptest::prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            // conjugation is a ring homomorphism
            proptest::prop_assert_eq!(a.mul(&b).conjugate(), a.conjugate().mul(&b.conjugate()));
        }

        #[test]
        fn embedding_is_homomorphic(
            ka in 0i64..36, kb in 0i64..36,
            na in -5i64..5, nb in -5i64..5,
        ) {
            let a = Cyc::root_of_unity(36, ka).scale(&q(na, 3)).add(&Cyc::one());
            let b = Cyc::root_of_unity(36, kb).scale(&q(nb, 2)).sub(&Cyc::root_of_unity(4, 1));
            let p = 160;
            let lhs = a.mul(&b).embed(p);
            let rhs = a.embed(p).mul(&b.embed(p));
            let diff = lhs.sub(&rhs).abs();
            proptest::prop_assert!(diff.to_f64() < 1e-40);
        }
    }
}
