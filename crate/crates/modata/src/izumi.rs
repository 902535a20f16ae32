//! Numerical solver for the Cuntz-algebra equation system over an odd cyclic
//! group, the tube linear system attached to a solution, and numerical
//! reconstruction of the associated quantum-double modular data.
//!
//! For K = Z_ν (ν odd), μ = ν² + 4 and δ = (ν + √μ)/2, a ν×ν complex matrix
//! A is a solution of the system when
//!
//! ```text
//!   Σ_m A_{g+m,h}·conj(A_{m,h})                = δ_{g,0} − δ_{h,0}/δ      (all g, h)
//!   Σ_m A_{m,g+h}·conj(A_{m+k,g}·A_{m+l,h})    = A_{g+l,k}·A_{h+k,l}
//!                                                − δ_{g,0}·δ_{h,0}/δ      (all g, h, k, l)
//! ```
//!
//! subject to the symmetries A_{g,h} = conj(A_{h,g}) = A_{−h,g−h}, with the
//! boundary values A_{0,0} = (δ−2)/(δ−1) and A_{g,0} = A_{0,g} = A_{g,g} =
//! −1/(δ−1).  Off the boundary every entry has modulus √δ/(δ−1), so a
//! solution is determined by n = (ν−1)/2 free phases j_2, …, j_{n+1}:
//! writing J_1 = 0, J_x = j_x for 2 ≤ x ≤ n+1 and the reflection
//! J_{n+1+i} = J_{n+1} + J_n − J_{n−i}, the oscillating entries are
//! A_{g,h} = (√δ/(δ−1))·exp(i(J_h − J_g − J_{h−g})) for 0 < g < h < ν.
//!
//! [`solve_matrices`] minimises the squared residual of the system over the
//! angle torus: multi-start Nelder–Mead at double precision, a double-
//! precision Gauss–Newton polish, then a damped Gauss–Newton (Levenberg)
//! iteration in arbitrary precision on one representative per cluster.
//! Classes are reported up to the relabelling action of Z_ν^× (which includes
//! complex conjugation as −1) with a canonical lexicographically-smallest
//! angle vector per class.
//!
//! A solved matrix feeds the tube linear system: for a root of unity ω the
//! ν² + 1 equations
//!
//! ```text
//!   Σ_g C_{0,g} = ω − conj(ω)/δ
//!   ω·C_{g,h} − Σ_k A_{g+k,2h}·C_{h,k} = δ_{h,0}·conj(ω)/δ
//! ```
//!
//! determine the half-braiding vectors C.  The number of independent
//! solutions per candidate ω, less the bookkeeping count of redundant ones,
//! recovers the T-values of the double's 𝔡-sector, and the sesquilinear form
//!
//! ```text
//!   S′_{l,l′} = (ω_l·ω_{l′} + δ·Σ_{g,h} conj(C^l_{g,g+h}·C^{l′}_{−g,h})) / (νδ + 2)
//! ```
//!
//! recovers its S-block, certified against the closed-form family through a
//! rigidity bound: entrywise agreement below 1/(18√μ) forces exact equality.

use crate::cyclotomic::{sqrt_positive_integer, Cyc, ScalarError};
use crate::families::{self, FamilyError};
use crate::mdata::{MdataError, ModularData};
use crate::numeric::{self, bf_cmp, default_precision, pi, real, unit_root, BigComplex, ToF64};
use astro_float::BigFloat;
use num_integer::Integer;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Errors from the equation solver, the tube linear system and the
/// reconstruction pipeline.
#[derive(Debug, Error)]
pub enum IzumiError {
    /// The group order is even, zero, or beyond the configured maximum.
    #[error("unsupported group order {nu}: need an odd ν with 1 ≤ ν ≤ {max}")]
    UnsupportedOrder { nu: u64, max: u64 },
    /// No start converged below the refinement tolerance.
    #[error("no angle vector reached the refinement tolerance from any start")]
    NoSolutionFound,
    /// A rank decision failed the singular-value gap test.
    #[error("rank decision for ω = ξ_{order}^{power} failed the singular-value gap test")]
    IllConditioned { order: u64, power: u64 },
    /// Some ω carries more than one non-redundant tube solution (or a
    /// solution space of positive dimension), so the S-block formula has no
    /// unambiguous input.  The recovered T-values are still reported.
    #[error("ω = ξ_{order}^{power} carries multiple independent tube solutions; S reconstruction aborted (T′ recovered)")]
    AmbiguousMultiplicity {
        order: u64,
        power: u64,
        /// The 𝔡-sector T-values implied by the multiplicities, phase-sorted.
        t_prime: Vec<Cyc>,
    },
    /// The non-redundant solution count across candidates is not m.
    #[error("tube produced {found} 𝔡-sector solutions, expected {expected}")]
    TubeCountMismatch { found: u64, expected: u64 },
    /// Input data violates a documented precondition.
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Mdata(#[from] MdataError),
}

/// A root of unity ξ_order^power with gcd(power, order) reduced away.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RootOfUnity {
    pub order: u64,
    pub power: u64,
}

impl RootOfUnity {
    /// ξ_order^power in lowest terms (order 1 for the value 1).
    pub fn new(order: u64, power: u64) -> Self {
        assert!(order >= 1, "root of unity needs a positive order");
        let power = power % order;
        if power == 0 {
            return RootOfUnity { order: 1, power: 0 };
        }
        let g = order.gcd(&power);
        RootOfUnity {
            order: order / g,
            power: power / g,
        }
    }

    /// Numerical value at `p` bits.
    pub fn value(&self, p: usize) -> BigComplex {
        unit_root(self.order, self.power, p)
    }

    /// Exact cyclotomic value.
    pub fn cyc(&self) -> Cyc {
        Cyc::root_of_unity(self.order, self.power as i64)
    }

    /// Comparison by principal argument in [0, 2π).
    fn phase_cmp(&self, other: &Self) -> Ordering {
        let lhs = self.power as u128 * other.order as u128;
        let rhs = other.power as u128 * self.order as u128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order == 1 {
            write!(f, "1")
        } else {
            write!(f, "ξ_{}^{}", self.order, self.power)
        }
    }
}

/// Knobs for [`solve_matrices`] and the refinement stage.
#[derive(Clone, Debug)]
pub struct SolveConfig {
    /// Number of uniform starts in (−π, π]^n.
    pub starts: usize,
    /// Seed for the start generator (ChaCha8).
    pub seed: u64,
    /// Working precision in bits for the refinement stage and the tube.
    pub precision: usize,
    /// Coarse (double-precision) residual target per start.
    pub tol_coarse: f64,
    /// Acceptance threshold on the refined squared residual.
    pub tol_refine: f64,
    /// Largest supported ν.
    pub max_nu: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            starts: 500,
            seed: 0,
            precision: default_precision().max(256),
            tol_coarse: 1e-10,
            tol_refine: 1e-40,
            max_nu: 19,
        }
    }
}

/// The free phases j_2, …, j_{n+1} of a candidate matrix for Z_ν.
#[derive(Clone, Debug)]
pub struct AngleVector {
    pub nu: u64,
    /// n = (ν−1)/2 angles, index p holding j_{p+2}.
    pub j: Vec<BigFloat>,
}

impl AngleVector {
    /// Wraps a free-angle vector, checking the length against ν.
    pub fn new(nu: u64, j: Vec<BigFloat>) -> Result<Self, IzumiError> {
        if nu == 0 || nu % 2 == 0 {
            return Err(IzumiError::UnsupportedOrder { nu, max: u64::MAX });
        }
        let n = ((nu - 1) / 2) as usize;
        if j.len() != n {
            return Err(IzumiError::PreconditionViolated(format!(
                "angle vector for ν = {nu} needs {n} entries, got {}",
                j.len()
            )));
        }
        Ok(AngleVector { nu, j })
    }

    /// Lifts double-precision angles to `p` bits.
    pub fn from_f64(nu: u64, j: &[f64], p: usize) -> Result<Self, IzumiError> {
        AngleVector::new(nu, j.iter().map(|&x| real::from_f64(x, p)).collect())
    }

    /// Double-precision view.
    pub fn to_f64(&self) -> Vec<f64> {
        self.j.iter().map(|x| x.to_f64()).collect()
    }

    fn precision(&self) -> usize {
        self.j
            .iter()
            .map(|x| x.mantissa_max_bit_len().unwrap_or(64))
            .max()
            .unwrap_or(default_precision())
    }

    /// Canonical representative of the equivalence class: the
    /// lexicographically smallest angle vector over the Z_ν^× relabelling
    /// orbit (complex conjugation is the action of −1), entries reduced to
    /// (−π, π].
    pub fn canonical(&self) -> AngleVector {
        if self.j.is_empty() {
            return self.clone();
        }
        let p = self.precision();
        AngleVector {
            nu: self.nu,
            j: canonical_big(self.nu as usize, &self.j, p),
        }
    }

    /// Number of distinct angle vectors in the Z_ν^× orbit.
    pub fn orbit_size(&self) -> usize {
        if self.j.is_empty() {
            return 1;
        }
        let p = self.precision();
        orbit_size_big(self.nu as usize, &self.j, p)
    }
}

/// A candidate ν×ν matrix with its exact dimension scalar.
#[derive(Clone)]
pub struct IzumiMatrix {
    pub nu: u64,
    /// Row-major entries A_{g,h}.
    pub a: Vec<Vec<BigComplex>>,
    /// δ = (ν + √μ)/2 as an exact cyclotomic value.
    pub delta: Cyc,
    pub precision: usize,
}

/// δ = (ν + √(ν²+4))/2 at `p` bits.
fn delta_big(nu: u64, p: usize) -> BigFloat {
    let mu = nu * nu + 4;
    real::div(
        &real::add(&real::from_u64(nu, p), &real::sqrt(&real::from_u64(mu, p))),
        &real::from_u64(2, p),
    )
}

/// δ as an exact element of a cyclotomic field.
fn delta_cyc(nu: u64) -> Cyc {
    let mu = nu * nu + 4;
    Cyc::from_integer(nu as i64)
        .add(&sqrt_positive_integer(mu))
        .scale(&BigRational::new(1.into(), 2.into()))
}

/// Full phase table J_1..J_{ν−1} (J_1 = 0, free block, reflection block).
fn full_angles_big(nu: usize, free: &[BigFloat], p: usize) -> Vec<BigFloat> {
    let n = (nu - 1) / 2;
    let zero = real::from_u64(0, p);
    let mut j = vec![zero; nu.max(2)];
    for (i, v) in free.iter().enumerate() {
        j[2 + i] = v.clone();
    }
    for i in 1..n {
        let t = real::add(&j[n + 1], &j[n]);
        j[n + 1 + i] = real::sub(&t, &j[n - i]);
    }
    j
}

/// Assembles the ν×ν matrix determined by a free-angle vector.
pub fn angles_to_matrix(j: &AngleVector, precision: usize) -> IzumiMatrix {
    let nu = j.nu as usize;
    let p = precision;
    let d = delta_big(j.nu, p);
    let one = real::from_u64(1, p);
    let dm1 = real::sub(&d, &one);
    let a00 = real::div(&real::sub(&d, &real::from_u64(2, p)), &dm1);
    let aneg = real::div(&one, &dm1).neg();
    let rho = real::div(&real::sqrt(&d), &dm1);
    let jj = full_angles_big(nu, &j.j, p);

    let mut a = vec![vec![BigComplex::zero(p); nu]; nu];
    a[0][0] = BigComplex::real(a00);
    for g in 1..nu {
        a[g][0] = BigComplex::real(aneg.clone());
        a[0][g] = BigComplex::real(aneg.clone());
        a[g][g] = BigComplex::real(aneg.clone());
    }
    for g in 1..nu {
        for h in g + 1..nu {
            let theta = real::sub(&real::sub(&jj[h], &jj[g]), &jj[h - g]);
            let e = BigComplex::cis(&theta, p).scale_bf(&rho);
            a[h][g] = e.conj();
            a[g][h] = e;
        }
    }
    IzumiMatrix {
        nu: j.nu,
        a,
        delta: delta_cyc(j.nu),
        precision: p,
    }
}

/// Sum of squared absolute residuals of the full equation system, evaluated
/// directly from the matrix entries (no angle parametrization assumed).
/// Zero exactly on solutions.
pub fn residual_norm(a: &IzumiMatrix) -> BigFloat {
    let nu = a.nu as usize;
    let p = a.precision;
    let d = delta_big(a.nu, p);
    let inv_d = real::div(&real::from_u64(1, p), &d);
    let m = &a.a;

    let eq1 = |g: usize, h: usize| -> BigFloat {
        let mut s = BigComplex::zero(p);
        for mm in 0..nu {
            s = s.add(&m[(g + mm) % nu][h].mul(&m[mm][h].conj()));
        }
        if g == 0 {
            s = s.sub(&BigComplex::one(p));
        }
        if h == 0 {
            s = s.add(&BigComplex::real(inv_d.clone()));
        }
        s.abs2()
    };
    let eq2 = |g: usize, h: usize, k: usize, l: usize| -> BigFloat {
        let mut s = BigComplex::zero(p);
        for mm in 0..nu {
            let t = m[mm][(g + h) % nu]
                .mul(&m[(mm + k) % nu][g].mul(&m[(mm + l) % nu][h]).conj());
            s = s.add(&t);
        }
        s = s.sub(&m[(g + l) % nu][k].mul(&m[(h + k) % nu][l]));
        if g == 0 && h == 0 {
            s = s.add(&BigComplex::real(inv_d.clone()));
        }
        s.abs2()
    };

    let partials: Vec<BigFloat> = (0..nu)
        .into_par_iter()
        .map(|g| {
            let mut acc = real::from_u64(0, p);
            for h in 0..nu {
                acc = real::add(&acc, &eq1(g, h));
                for k in 0..nu {
                    for l in 0..nu {
                        acc = real::add(&acc, &eq2(g, h, k, l));
                    }
                }
            }
            acc
        })
        .collect();
    partials
        .into_iter()
        .fold(real::from_u64(0, p), |s, x| real::add(&s, &x))
}

/// Largest deviation of |(δ−1)·A_{g,h}|² from δ over entries with g, h and
/// g−h all nonzero (the scaled entries of a solution lie on a circle of
/// radius √δ).
pub fn modulus_defect(a: &IzumiMatrix) -> BigFloat {
    let nu = a.nu as usize;
    let p = a.precision;
    let d = delta_big(a.nu, p);
    let dm1 = real::sub(&d, &real::from_u64(1, p));
    let dm1_sq = real::mul(&dm1, &dm1);
    let mut worst = real::from_u64(0, p);
    for g in 1..nu {
        for h in 1..nu {
            if g == h {
                continue;
            }
            let dev = real::sub(&real::mul(&a.a[g][h].abs2(), &dm1_sq), &d).abs();
            if bf_cmp(&dev, &worst) == Ordering::Greater {
                worst = dev;
            }
        }
    }
    worst
}

/// Largest deviation in the cross relation
/// A_{g+k,h}·A_{h,k} = A_{−k,g}·A_{g,h−k} over g, h ≠ 0, g ≠ h and all k.
pub fn cross_relation_defect(a: &IzumiMatrix) -> BigFloat {
    let nu = a.nu as usize;
    let p = a.precision;
    let m = &a.a;
    let mut worst = real::from_u64(0, p);
    for g in 1..nu {
        for h in 1..nu {
            if g == h {
                continue;
            }
            for k in 0..nu {
                let lhs = m[(g + k) % nu][h].mul(&m[h][k]);
                let rhs = m[(nu - k) % nu][g].mul(&m[g][(h + nu - k) % nu]);
                let dev = lhs.sub(&rhs).abs();
                if bf_cmp(&dev, &worst) == Ordering::Greater {
                    worst = dev;
                }
            }
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// Compiled residual system
//
// Every equation term is a product of two or three matrix entries (possibly
// conjugated).  Constant entries contribute real factors; oscillating entries
// contribute ρ·cis(±⟨row, j⟩) with an integer row over the free angles.  A
// term therefore collapses to  coeff · cis(⟨l, j⟩)  with coeff in a small set
// of real classes (δ-dependent) and l an integer vector, which makes both
// the residual and its Jacobian cheap at any precision.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq)]
struct CoeffClass {
    sign: i8,
    n00: u8,
    nneg: u8,
    nrho: u8,
}

struct CompiledSystem {
    n: usize,
    classes: Vec<CoeffClass>,
    term_class: Vec<u8>,
    /// Concatenated integer rows, `n` entries per term.
    term_l: Vec<i16>,
    /// Term range per equation, length eqs + 1.
    eq_first: Vec<u32>,
    /// Per-equation constant id into `const_defs`.
    eq_const: Vec<u8>,
    /// Distinct (c0, c1) with constant value c0 + c1/δ.
    const_defs: Vec<(i8, i8)>,
    /// Largest |l| entry across terms.
    max_pow: usize,
}

enum EntryKind {
    A00,
    Neg,
    Osc(Vec<i32>),
}

fn compile_system(nu: usize) -> CompiledSystem {
    let n = (nu - 1) / 2;
    // J-coefficient rows over the free angles.
    let mut rows = vec![vec![0i32; n]; nu.max(2)];
    for x in 2..=n + 1 {
        rows[x][x - 2] = 1;
    }
    for i in 1..n {
        let mut r = vec![0i32; n];
        for p in 0..n {
            r[p] = rows[n + 1][p] + rows[n][p] - rows[n - i][p];
        }
        rows[n + 1 + i] = r;
    }
    // Entry classification with the g > h conjugation folded into the row.
    let entry = |g: usize, h: usize| -> EntryKind {
        if g == 0 && h == 0 {
            EntryKind::A00
        } else if g == 0 || h == 0 || g == h {
            EntryKind::Neg
        } else if g < h {
            let mut l = vec![0i32; n];
            for p in 0..n {
                l[p] = rows[h][p] - rows[g][p] - rows[h - g][p];
            }
            EntryKind::Osc(l)
        } else {
            let mut l = vec![0i32; n];
            for p in 0..n {
                l[p] = -(rows[g][p] - rows[h][p] - rows[g - h][p]);
            }
            EntryKind::Osc(l)
        }
    };
    let mut kinds = Vec::with_capacity(nu * nu);
    for g in 0..nu {
        for h in 0..nu {
            kinds.push(entry(g, h));
        }
    }
    let kind = |g: usize, h: usize| &kinds[g * nu + h];

    let mut sys = CompiledSystem {
        n,
        classes: Vec::new(),
        term_class: Vec::new(),
        term_l: Vec::new(),
        eq_first: vec![0],
        eq_const: Vec::new(),
        const_defs: Vec::new(),
        max_pow: 0,
    };
    let push_term = |sys: &mut CompiledSystem, sign: i8, factors: &[(usize, usize, bool)]| {
        let mut c = CoeffClass {
            sign,
            n00: 0,
            nneg: 0,
            nrho: 0,
        };
        let mut l = vec![0i32; n];
        for &(g, h, conj) in factors {
            match kind(g, h) {
                EntryKind::A00 => c.n00 += 1,
                EntryKind::Neg => c.nneg += 1,
                EntryKind::Osc(row) => {
                    c.nrho += 1;
                    if conj {
                        for p in 0..n {
                            l[p] -= row[p];
                        }
                    } else {
                        for p in 0..n {
                            l[p] += row[p];
                        }
                    }
                }
            }
        }
        let id = match sys.classes.iter().position(|x| *x == c) {
            Some(i) => i,
            None => {
                sys.classes.push(c);
                sys.classes.len() - 1
            }
        };
        sys.term_class.push(id as u8);
        for &v in &l {
            sys.max_pow = sys.max_pow.max(v.unsigned_abs() as usize);
            sys.term_l.push(v as i16);
        }
    };
    let push_const = |sys: &mut CompiledSystem, c0: i8, c1: i8| {
        let id = match sys.const_defs.iter().position(|&x| x == (c0, c1)) {
            Some(i) => i,
            None => {
                sys.const_defs.push((c0, c1));
                sys.const_defs.len() - 1
            }
        };
        sys.eq_const.push(id as u8);
        sys.eq_first.push(sys.term_class.len() as u32);
    };

    for g in 0..nu {
        for h in 0..nu {
            for m in 0..nu {
                push_term(&mut sys, 1, &[((g + m) % nu, h, false), (m, h, true)]);
            }
            push_const(&mut sys, -((g == 0) as i8), (h == 0) as i8);
        }
    }
    for g in 0..nu {
        for h in 0..nu {
            for k in 0..nu {
                for l in 0..nu {
                    for m in 0..nu {
                        push_term(
                            &mut sys,
                            1,
                            &[
                                (m, (g + h) % nu, false),
                                ((m + k) % nu, g, true),
                                ((m + l) % nu, h, true),
                            ],
                        );
                    }
                    push_term(&mut sys, -1, &[((g + l) % nu, k, false), ((h + k) % nu, l, false)]);
                    push_const(&mut sys, 0, (g == 0 && h == 0) as i8);
                }
            }
        }
    }
    sys
}

impl CompiledSystem {
    fn eqs(&self) -> usize {
        self.eq_first.len() - 1
    }

    fn class_values_f64(&self, nu: u64) -> (Vec<f64>, Vec<f64>) {
        let mu = (nu * nu + 4) as f64;
        let d = (nu as f64 + mu.sqrt()) / 2.0;
        let c00 = (d - 2.0) / (d - 1.0);
        let cneg = -1.0 / (d - 1.0);
        let rho = d.sqrt() / (d - 1.0);
        let cls = self
            .classes
            .iter()
            .map(|c| {
                c.sign as f64
                    * c00.powi(c.n00 as i32)
                    * cneg.powi(c.nneg as i32)
                    * rho.powi(c.nrho as i32)
            })
            .collect();
        let consts = self
            .const_defs
            .iter()
            .map(|&(c0, c1)| c0 as f64 + c1 as f64 / d)
            .collect();
        (cls, consts)
    }

    fn class_values_big(&self, nu: u64, p: usize) -> (Vec<BigFloat>, Vec<BigFloat>) {
        let d = delta_big(nu, p);
        let one = real::from_u64(1, p);
        let dm1 = real::sub(&d, &one);
        let c00 = real::div(&real::sub(&d, &real::from_u64(2, p)), &dm1);
        let cneg = real::div(&one, &dm1).neg();
        let rho = real::div(&real::sqrt(&d), &dm1);
        let powi = |b: &BigFloat, e: u8| -> BigFloat {
            let mut acc = real::from_u64(1, p);
            for _ in 0..e {
                acc = real::mul(&acc, b);
            }
            acc
        };
        let cls = self
            .classes
            .iter()
            .map(|c| {
                let v = real::mul(
                    &real::mul(&powi(&c00, c.n00), &powi(&cneg, c.nneg)),
                    &powi(&rho, c.nrho),
                );
                if c.sign < 0 {
                    v.neg()
                } else {
                    v
                }
            })
            .collect();
        let consts = self
            .const_defs
            .iter()
            .map(|&(c0, c1)| {
                real::add(
                    &real::from_i64(c0 as i64, p),
                    &real::div(&real::from_i64(c1 as i64, p), &d),
                )
            })
            .collect();
        (cls, consts)
    }
}

/// Squared residual at double precision; optionally accumulates the
/// Gauss–Newton normal equations (JᵀJ, Jᵀr) over the real and imaginary
/// residual components.
fn eval_f64(
    sys: &CompiledSystem,
    cls: &[f64],
    consts: &[f64],
    j: &[f64],
    grad: Option<(&mut [f64], &mut [f64])>,
) -> f64 {
    let n = sys.n;
    let stride = 2 * sys.max_pow + 1;
    let k0 = sys.max_pow as i32;
    // pow[p][k0 + e] = cis(e·j_p)
    let mut pw = vec![(0.0f64, 0.0f64); n * stride];
    for p in 0..n {
        let (s, c) = j[p].sin_cos();
        let base = p * stride;
        pw[base + k0 as usize] = (1.0, 0.0);
        for e in 1..=sys.max_pow {
            let (ar, ai) = pw[base + k0 as usize + e - 1];
            pw[base + k0 as usize + e] = (ar * c - ai * s, ar * s + ai * c);
            let (br, bi) = pw[base + k0 as usize + 1 - e];
            pw[base + k0 as usize - e] = (br * c + bi * s, bi * c - br * s);
        }
    }
    let mut jtj_jtr = grad;
    if let Some((jtj, jtr)) = jtj_jtr.as_mut() {
        jtj.fill(0.0);
        jtr.fill(0.0);
    }
    let mut total = 0.0;
    let mut wr = vec![0.0f64; n];
    let mut wi = vec![0.0f64; n];
    for e in 0..sys.eqs() {
        let mut re = consts[sys.eq_const[e] as usize];
        let mut im = 0.0;
        if jtj_jtr.is_some() {
            wr.fill(0.0);
            wi.fill(0.0);
        }
        for t in sys.eq_first[e] as usize..sys.eq_first[e + 1] as usize {
            let mut vr = cls[sys.term_class[t] as usize];
            let mut vi = 0.0;
            let lbase = t * n;
            for p in 0..n {
                let lp = sys.term_l[lbase + p];
                if lp != 0 {
                    let (ar, ai) = pw[p * stride + (k0 + lp as i32) as usize];
                    let nr = vr * ar - vi * ai;
                    vi = vr * ai + vi * ar;
                    vr = nr;
                }
            }
            re += vr;
            im += vi;
            if jtj_jtr.is_some() {
                for p in 0..n {
                    let lp = sys.term_l[lbase + p];
                    if lp != 0 {
                        wr[p] += lp as f64 * vr;
                        wi[p] += lp as f64 * vi;
                    }
                }
            }
        }
        total += re * re + im * im;
        if let Some((jtj, jtr)) = jtj_jtr.as_mut() {
            // ∂re/∂j_p = −Im(w_p), ∂im/∂j_p = Re(w_p)
            for p in 0..n {
                jtr[p] += -wi[p] * re + wr[p] * im;
                for q in 0..n {
                    jtj[p * n + q] += wr[p] * wr[q] + wi[p] * wi[q];
                }
            }
        }
    }
    total
}

/// Squared residual at `p` bits, equations chunked across threads with an
/// ordered reduction (bitwise deterministic).  With `grad` set, also returns
/// the Gauss–Newton normal equations.
#[allow(clippy::type_complexity)]
fn eval_big(
    sys: &CompiledSystem,
    cls: &[BigFloat],
    consts: &[BigFloat],
    j: &[BigFloat],
    p: usize,
    grad: bool,
) -> (BigFloat, Option<(Vec<BigFloat>, Vec<BigFloat>)>) {
    let n = sys.n;
    let stride = 2 * sys.max_pow + 1;
    let k0 = sys.max_pow;
    let mut pw = vec![BigComplex::one(p); n * stride];
    for q in 0..n {
        let u = BigComplex::cis(&j[q], p);
        let ub = u.conj();
        let base = q * stride;
        for e in 1..=sys.max_pow {
            pw[base + k0 + e] = pw[base + k0 + e - 1].mul(&u);
            pw[base + k0 - e] = pw[base + k0 - e + 1].mul(&ub);
        }
    }
    let zero = || real::from_u64(0, p);
    let eqs = sys.eqs();
    let chunk = 2048usize;
    let ranges: Vec<(usize, usize)> = (0..eqs)
        .step_by(chunk)
        .map(|lo| (lo, (lo + chunk).min(eqs)))
        .collect();
    let partials: Vec<(BigFloat, Vec<BigFloat>, Vec<BigFloat>)> = ranges
        .par_iter()
        .map(|&(lo, hi)| {
            let mut total = zero();
            let mut jtj = if grad { vec![zero(); n * n] } else { Vec::new() };
            let mut jtr = if grad { vec![zero(); n] } else { Vec::new() };
            let mut w = vec![BigComplex::zero(p); n];
            for e in lo..hi {
                let mut r = BigComplex::real(consts[sys.eq_const[e] as usize].clone());
                if grad {
                    for x in w.iter_mut() {
                        *x = BigComplex::zero(p);
                    }
                }
                for t in sys.eq_first[e] as usize..sys.eq_first[e + 1] as usize {
                    let mut v = BigComplex::real(cls[sys.term_class[t] as usize].clone());
                    let lbase = t * n;
                    for q in 0..n {
                        let lp = sys.term_l[lbase + q];
                        if lp != 0 {
                            v = v.mul(&pw[q * stride + (k0 as i32 + lp as i32) as usize]);
                        }
                    }
                    if grad {
                        for q in 0..n {
                            let lp = sys.term_l[lbase + q];
                            if lp != 0 {
                                let sc = real::from_i64(lp as i64, p);
                                w[q] = w[q].add(&v.scale_bf(&sc));
                            }
                        }
                    }
                    r = r.add(&v);
                }
                total = real::add(&total, &r.abs2());
                if grad {
                    for a in 0..n {
                        // ∂re/∂j = −Im(w), ∂im/∂j = Re(w)
                        let ga = real::sub(&real::mul(&w[a].re, &r.im), &real::mul(&w[a].im, &r.re));
                        jtr[a] = real::add(&jtr[a], &ga);
                        for b in 0..n {
                            let t1 = real::add(
                                &real::mul(&w[a].re, &w[b].re),
                                &real::mul(&w[a].im, &w[b].im),
                            );
                            jtj[a * n + b] = real::add(&jtj[a * n + b], &t1);
                        }
                    }
                }
            }
            (total, jtj, jtr)
        })
        .collect();
    let mut total = zero();
    let mut jtj = if grad { vec![zero(); n * n] } else { Vec::new() };
    let mut jtr = if grad { vec![zero(); n] } else { Vec::new() };
    for (t, pj, pr) in partials {
        total = real::add(&total, &t);
        if grad {
            for i in 0..n * n {
                jtj[i] = real::add(&jtj[i], &pj[i]);
            }
            for i in 0..n {
                jtr[i] = real::add(&jtr[i], &pr[i]);
            }
        }
    }
    (total, if grad { Some((jtj, jtr)) } else { None })
}

// ---------------------------------------------------------------------------
// Local minimisation
// ---------------------------------------------------------------------------

/// Standard Nelder–Mead on f, started at `x0` with simplex step `step`.
fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    tol_f: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
    simplex.push((f(x0), x0.to_vec()));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push((f(&x), x));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let best = simplex[0].0;
        let worst = simplex[n].0;
        if best < tol_f || worst - best < 1e-15 * (1.0 + best.abs()) {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (_, x) in &simplex[..n] {
            for i in 0..n {
                centroid[i] += x[i] / n as f64;
            }
        }
        let xr: Vec<f64> = (0..n)
            .map(|i| centroid[i] + alpha * (centroid[i] - simplex[n].1[i]))
            .collect();
        let fr = f(&xr);
        if fr < simplex[0].0 {
            let xe: Vec<f64> = (0..n)
                .map(|i| centroid[i] + gamma * (xr[i] - centroid[i]))
                .collect();
            let fe = f(&xe);
            simplex[n] = if fe < fr { (fe, xe) } else { (fr, xr) };
        } else if fr < simplex[n - 1].0 {
            simplex[n] = (fr, xr);
        } else {
            let xc: Vec<f64> = (0..n)
                .map(|i| centroid[i] + rho * (simplex[n].1[i] - centroid[i]))
                .collect();
            let fc = f(&xc);
            if fc < simplex[n].0 {
                simplex[n] = (fc, xc);
            } else {
                let x0v = simplex[0].1.clone();
                for s in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = (0..n).map(|i| x0v[i] + sigma * (s.1[i] - x0v[i])).collect();
                    *s = (f(&x), x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let (fbest, xbest) = simplex.swap_remove(0);
    (xbest, fbest)
}

/// n×n real solve with partial pivoting; `None` on a vanishing pivot.
fn solve_f64(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| {
            m[i][k]
                .abs()
                .partial_cmp(&m[j][k].abs())
                .unwrap_or(Ordering::Equal)
        })?;
        if m[piv][k] == 0.0 {
            return None;
        }
        m.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for jx in k..n {
                m[i][jx] -= f * m[k][jx];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for jx in k + 1..n {
            s -= m[k][jx] * x[jx];
        }
        x[k] = s / m[k][k];
    }
    Some(x)
}

/// Double-precision damped Gauss–Newton polish.
fn lm_f64(sys: &CompiledSystem, cls: &[f64], consts: &[f64], mut x: Vec<f64>) -> (Vec<f64>, f64) {
    let n = sys.n;
    let mut jtj = vec![0.0; n * n];
    let mut jtr = vec![0.0; n];
    let mut lam = 1e-6;
    let mut r = eval_f64(sys, cls, consts, &x, Some((&mut jtj, &mut jtr)));
    for _ in 0..24 {
        let scale = (0..n).map(|i| jtj[i * n + i]).fold(0.0f64, f64::max).max(1e-300);
        let mut improved = false;
        for _ in 0..10 {
            let mut m = vec![vec![0.0; n]; n];
            for a in 0..n {
                for b in 0..n {
                    m[a][b] = jtj[a * n + b];
                }
                m[a][a] += lam * scale;
            }
            let Some(d) = solve_f64(m, jtr.iter().map(|v| -v).collect()) else {
                lam *= 8.0;
                continue;
            };
            let xn: Vec<f64> = (0..n).map(|i| x[i] + d[i]).collect();
            let rn = eval_f64(sys, cls, consts, &xn, None);
            if rn < r {
                x = xn;
                r = rn;
                lam = (lam * 0.25).max(1e-14);
                improved = true;
                break;
            }
            lam *= 8.0;
        }
        if !improved || r < 1e-28 {
            break;
        }
        r = eval_f64(sys, cls, consts, &x, Some((&mut jtj, &mut jtr)));
    }
    (x, r)
}

/// n×n real solve at `p` bits with partial pivoting.
fn solve_big(mut m: Vec<Vec<BigFloat>>, mut b: Vec<BigFloat>, p: usize) -> Option<Vec<BigFloat>> {
    let n = b.len();
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if bf_cmp(&m[i][k].abs(), &m[piv][k].abs()) == Ordering::Greater {
                piv = i;
            }
        }
        if m[piv][k].is_zero() {
            return None;
        }
        m.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = real::div(&m[i][k], &m[k][k]);
            for jx in k..n {
                let t = real::mul(&f, &m[k][jx]);
                m[i][jx] = real::sub(&m[i][jx], &t);
            }
            let t = real::mul(&f, &b[k]);
            b[i] = real::sub(&b[i], &t);
        }
    }
    let mut x = vec![real::from_u64(0, p); n];
    for k in (0..n).rev() {
        let mut s = b[k].clone();
        for jx in k + 1..n {
            s = real::sub(&s, &real::mul(&m[k][jx], &x[jx]));
        }
        x[k] = real::div(&s, &m[k][k]);
    }
    Some(x)
}

/// Damped Gauss–Newton at `p` bits, iterated to its convergence floor.
fn lm_big(
    sys: &CompiledSystem,
    cls: &[BigFloat],
    consts: &[BigFloat],
    mut x: Vec<BigFloat>,
    p: usize,
) -> (Vec<BigFloat>, BigFloat) {
    let mut lam = real::from_f64(1e-8, p);
    let lam_min = numeric::pow2(-160, p);
    let lam_max = numeric::pow2(80, p);
    let (mut r, mut grad) = eval_big(sys, cls, consts, &x, p, true);
    for _ in 0..48 {
        let (jtj, jtr) = grad.as_ref().expect("gradient requested");
        let n = sys.n;
        let mut scale = real::from_u64(0, p);
        for i in 0..n {
            if bf_cmp(&jtj[i * n + i], &scale) == Ordering::Greater {
                scale = jtj[i * n + i].clone();
            }
        }
        if scale.is_zero() {
            break;
        }
        let mut improved = false;
        for _ in 0..14 {
            let mut m = vec![vec![real::from_u64(0, p); n]; n];
            for a in 0..n {
                for b in 0..n {
                    m[a][b] = jtj[a * n + b].clone();
                }
                m[a][a] = real::add(&m[a][a], &real::mul(&lam, &scale));
            }
            let rhs: Vec<BigFloat> = jtr.iter().map(|v| v.neg()).collect();
            let Some(d) = solve_big(m, rhs, p) else {
                lam = real::mul(&lam, &real::from_u64(8, p));
                continue;
            };
            let xn: Vec<BigFloat> = (0..n).map(|i| real::add(&x[i], &d[i])).collect();
            let (rn, _) = eval_big(sys, cls, consts, &xn, p, false);
            if bf_cmp(&rn, &r) == Ordering::Less {
                x = xn;
                r = rn;
                lam = real::mul(&lam, &real::from_f64(0.25, p));
                if bf_cmp(&lam, &lam_min) == Ordering::Less {
                    lam = lam_min.clone();
                }
                improved = true;
                break;
            }
            lam = real::mul(&lam, &real::from_u64(8, p));
            if bf_cmp(&lam, &lam_max) == Ordering::Greater {
                break;
            }
        }
        if !improved || r.is_zero() {
            break;
        }
        let (rg, g) = eval_big(sys, cls, consts, &x, p, true);
        r = rg;
        grad = g;
    }
    (x, r)
}

// ---------------------------------------------------------------------------
// Canonical forms under the Z_ν^× relabelling action
//
// A unit α acts by A ↦ A^α with A^α_{g,h} = A_{αg,αh}; on phases this sends
// θ(g,h) = J_h − J_g − J_{h−g} to θ(αg, αh), and a full angle table for the
// image is recovered by telescoping J′_x = Σ_{y=2..x} θ′(1,y).  α = −1 is
// complex conjugation.  The canonical form is the lexicographically smallest
// reduced free-angle vector over all units.
// ---------------------------------------------------------------------------

fn reduce_f64(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let y = (x + std::f64::consts::PI).rem_euclid(tau) - std::f64::consts::PI;
    if y <= -std::f64::consts::PI + 1e-15 {
        std::f64::consts::PI
    } else {
        y
    }
}

fn full_angles_f64(nu: usize, free: &[f64]) -> Vec<f64> {
    let n = (nu - 1) / 2;
    let mut j = vec![0.0; nu.max(2)];
    for (i, v) in free.iter().enumerate() {
        j[2 + i] = *v;
    }
    for i in 1..n {
        j[n + 1 + i] = j[n + 1] + j[n] - j[n - i];
    }
    j
}

fn orbit_candidates_f64(nu: usize, free: &[f64]) -> Vec<Vec<f64>> {
    let n = (nu - 1) / 2;
    let j = full_angles_f64(nu, free);
    let theta = |g: usize, h: usize| -> f64 {
        if g < h {
            j[h] - j[g] - j[h - g]
        } else {
            -(j[g] - j[h] - j[g - h])
        }
    };
    let mut out = Vec::new();
    for a in 1..nu {
        if a.gcd(&nu) != 1 {
            continue;
        }
        let mut acc = 0.0;
        let mut cand = Vec::with_capacity(n);
        for x in 2..=n + 1 {
            acc += theta((a * (x - 1)) % nu, (a * x) % nu);
            cand.push(reduce_f64(acc));
        }
        out.push(cand);
    }
    out
}

fn lex_less_f64(a: &[f64], b: &[f64], tol: f64) -> bool {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() < tol {
            continue;
        }
        return x < y;
    }
    false
}

fn canonical_f64(nu: usize, free: &[f64]) -> Vec<f64> {
    let mut best: Option<Vec<f64>> = None;
    for cand in orbit_candidates_f64(nu, free) {
        if best.as_ref().is_none_or(|b| lex_less_f64(&cand, b, 1e-9)) {
            best = Some(cand);
        }
    }
    best.expect("nu >= 3 has at least the identity unit")
}

fn reduce_big(x: &BigFloat, p: usize) -> BigFloat {
    let pi_v = pi(p);
    let tau = real::add(&pi_v, &pi_v);
    let k = (x.to_f64() / std::f64::consts::TAU).round();
    let mut y = real::sub(x, &real::mul(&tau, &real::from_f64(k, p)));
    let eps = numeric::pow2(-48, p);
    for _ in 0..4 {
        if bf_cmp(&y, &pi_v) == Ordering::Greater {
            y = real::sub(&y, &tau);
        } else if bf_cmp(&y, &real::add(&pi_v.neg(), &eps)) != Ordering::Greater {
            y = real::add(&y, &tau);
        } else {
            break;
        }
    }
    y
}

fn orbit_candidates_big(nu: usize, free: &[BigFloat], p: usize) -> Vec<Vec<BigFloat>> {
    let n = (nu - 1) / 2;
    let j = full_angles_big(nu, free, p);
    let theta = |g: usize, h: usize| -> BigFloat {
        if g < h {
            real::sub(&real::sub(&j[h], &j[g]), &j[h - g])
        } else {
            real::sub(&real::sub(&j[g], &j[h]), &j[g - h]).neg()
        }
    };
    let mut out = Vec::new();
    for a in 1..nu {
        if a.gcd(&nu) != 1 {
            continue;
        }
        let mut acc = real::from_u64(0, p);
        let mut cand = Vec::with_capacity(n);
        for x in 2..=n + 1 {
            acc = real::add(&acc, &theta((a * (x - 1)) % nu, (a * x) % nu));
            cand.push(reduce_big(&acc, p));
        }
        out.push(cand);
    }
    out
}

fn lex_less_big(a: &[BigFloat], b: &[BigFloat], tol: &BigFloat) -> bool {
    for (x, y) in a.iter().zip(b) {
        let d = real::sub(x, y);
        if bf_cmp(&d.abs(), tol) == Ordering::Less {
            continue;
        }
        return d.is_negative();
    }
    false
}

fn canonical_big(nu: usize, free: &[BigFloat], p: usize) -> Vec<BigFloat> {
    let tol = numeric::pow2(-64, p);
    let mut best: Option<Vec<BigFloat>> = None;
    for cand in orbit_candidates_big(nu, free, p) {
        if best.as_ref().is_none_or(|b| lex_less_big(&cand, b, &tol)) {
            best = Some(cand);
        }
    }
    best.expect("nu >= 3 has at least the identity unit")
}

fn orbit_size_big(nu: usize, free: &[BigFloat], p: usize) -> usize {
    let tol = numeric::pow2(-40, p);
    let mut seen: Vec<Vec<BigFloat>> = Vec::new();
    for cand in orbit_candidates_big(nu, free, p) {
        let dup = seen.iter().any(|s| {
            s.iter()
                .zip(&cand)
                .all(|(x, y)| bf_cmp(&real::sub(x, y).abs(), &tol) == Ordering::Less)
        });
        if !dup {
            seen.push(cand);
        }
    }
    seen.len()
}

// ---------------------------------------------------------------------------
// Multi-start solver
// ---------------------------------------------------------------------------

/// One equivalence class of solutions.
#[derive(Clone, Debug)]
pub struct SolvedClass {
    /// Canonical angle vector of the class.
    pub angles: AngleVector,
    /// Refined squared residual.
    pub residual: BigFloat,
    /// Number of distinct angle vectors in the Z_ν^× orbit.
    pub orbit_size: usize,
}

/// Refines an angle vector at `config.precision` bits with damped
/// Gauss–Newton, returning the polished (non-canonical) vector and its
/// squared residual.
pub fn refine_angles(
    start: &AngleVector,
    config: &SolveConfig,
) -> Result<(AngleVector, BigFloat), IzumiError> {
    check_order(start.nu, config.max_nu)?;
    let p = config.precision;
    if start.j.is_empty() {
        let r = residual_norm(&angles_to_matrix(start, p));
        return Ok((start.clone(), r));
    }
    let sys = compile_system(start.nu as usize);
    let (cls, consts) = sys.class_values_big(start.nu, p);
    let x: Vec<BigFloat> = start.j.iter().map(|v| {
        // lift to working precision
        real::add(&real::from_u64(0, p), v)
    }).collect();
    let (xr, r) = lm_big(&sys, &cls, &consts, x, p);
    Ok((AngleVector { nu: start.nu, j: xr }, r))
}

fn check_order(nu: u64, max_nu: u64) -> Result<(), IzumiError> {
    if nu == 0 || nu % 2 == 0 || nu > max_nu {
        return Err(IzumiError::UnsupportedOrder { nu, max: max_nu });
    }
    Ok(())
}

/// Finds all equivalence classes of solutions for K = Z_ν by multi-start
/// minimisation: Nelder–Mead at double precision from `config.starts`
/// uniform points of (−π, π]^n, a double-precision Gauss–Newton polish, then
/// a damped Gauss–Newton refinement at `config.precision` bits on one
/// representative per cluster.  Classes with refined squared residual below
/// `config.tol_refine` are reported once, in canonical form, sorted
/// lexicographically.  The run is deterministic for a fixed seed.
pub fn solve_matrices(nu: u64, config: &SolveConfig) -> Result<Vec<SolvedClass>, IzumiError> {
    check_order(nu, config.max_nu)?;
    let p = config.precision;
    if nu == 1 {
        let angles = AngleVector { nu: 1, j: Vec::new() };
        let residual = residual_norm(&angles_to_matrix(&angles, p));
        return Ok(vec![SolvedClass {
            angles,
            residual,
            orbit_size: 1,
        }]);
    }
    let nuz = nu as usize;
    let n = (nuz - 1) / 2;
    let sys = compile_system(nuz);
    let (cls, consts) = sys.class_values_f64(nu);

    // Deterministic start points.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let starts: Vec<Vec<f64>> = (0..config.starts)
        .map(|_| {
            (0..n)
                .map(|_| std::f64::consts::PI - std::f64::consts::TAU * rng.gen::<f64>())
                .collect()
        })
        .collect();

    // Coarse descent + double-precision polish, in parallel, order preserved.
    let tol_coarse = config.tol_coarse;
    let hits: Vec<Option<(Vec<f64>, f64)>> = starts
        .par_iter()
        .map(|x0| {
            let (x1, f1) = nelder_mead(
                |x| eval_f64(&sys, &cls, &consts, x, None),
                x0,
                0.6,
                tol_coarse,
                600 * n + 200,
            );
            if !f1.is_finite() || f1 > 1e-2 {
                return None;
            }
            let (x2, f2) = lm_f64(&sys, &cls, &consts, x1);
            if f2 <= 1e-16 {
                Some((x2, f2))
            } else {
                None
            }
        })
        .collect();

    // Cluster by double-precision canonical form.
    let mut clusters: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new(); // (key, raw, f)
    for hit in hits.into_iter().flatten() {
        let key = canonical_f64(nuz, &hit.0);
        match clusters.iter_mut().find(|(k, _, _)| {
            k.iter().zip(&key).all(|(a, b)| (a - b).abs() < 1e-6)
        }) {
            Some(c) => {
                if hit.1 < c.2 {
                    c.1 = hit.0;
                    c.2 = hit.1;
                }
            }
            None => clusters.push((key, hit.0, hit.1)),
        }
    }

    // High-precision refinement of one representative per cluster.
    let (clsb, constsb) = sys.class_values_big(nu, p);
    let tol_refine = real::from_f64(config.tol_refine, p);
    let refined: Vec<Option<(Vec<BigFloat>, BigFloat)>> = clusters
        .par_iter()
        .map(|(_, raw, _)| {
            let x0: Vec<BigFloat> = raw.iter().map(|&v| real::from_f64(v, p)).collect();
            let (xr, r) = lm_big(&sys, &clsb, &constsb, x0, p);
            if bf_cmp(&r, &tol_refine) == Ordering::Less {
                Some((xr, r))
            } else {
                None
            }
        })
        .collect();

    // Canonicalize, dedup, sort.
    let dup_tol = numeric::pow2(-60, p);
    let mut classes: Vec<(Vec<BigFloat>, BigFloat)> = Vec::new();
    for (xr, r) in refined.into_iter().flatten() {
        let key = canonical_big(nuz, &xr, p);
        let dup = classes.iter().any(|(k, _)| {
            k.iter()
                .zip(&key)
                .all(|(a, b)| bf_cmp(&real::sub(a, b).abs(), &dup_tol) == Ordering::Less)
        });
        if !dup {
            classes.push((key, r));
        }
    }
    classes.sort_by(|a, b| {
        for (x, y) in a.0.iter().zip(&b.0) {
            match bf_cmp(x, y) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    });
    if classes.is_empty() {
        return Err(IzumiError::NoSolutionFound);
    }
    Ok(classes
        .into_iter()
        .map(|(j, residual)| {
            let angles = AngleVector { nu, j };
            let orbit_size = angles.orbit_size();
            SolvedClass {
                angles,
                residual,
                orbit_size,
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Tube linear system
// ---------------------------------------------------------------------------

/// Outcome for one candidate ω.
#[derive(Clone)]
pub struct TubeCandidate {
    pub omega: RootOfUnity,
    /// Whether the linear system is consistent.
    pub consistent: bool,
    /// Number of independent solutions: nullity + 1 when consistent, else 0.
    pub multiplicity: u64,
    /// Bookkeeping count of redundant solutions at this ω (roots of order
    /// dividing ν): 1 + n + ½·Σ_{g|ν, g<ν} g·φ(ν/g) at ω = 1 (this equals
    /// σ₁(ν) − 1 for squarefree ν) and ½·Σ_{g|(ν/d)} g·φ(ν/g) for a
    /// primitive d-th root with d | ν, d > 1; zero otherwise.
    pub redundant: u64,
    /// The unique half-braiding vector C_{g,h} (flattened as g·ν + h) when
    /// the system is consistent with full column rank.
    pub c: Option<Vec<BigComplex>>,
}

/// Tube outcomes across a candidate list.
#[derive(Clone)]
pub struct TubeSolution {
    pub nu: u64,
    pub precision: usize,
    pub candidates: Vec<TubeCandidate>,
}

/// Euler's totient by trial division.
fn euler_phi(mut x: u64) -> u64 {
    let mut out = x;
    let mut q = 2;
    while q * q <= x {
        if x % q == 0 {
            while x % q == 0 {
                x /= q;
            }
            out -= out / q;
        }
        q += 1;
    }
    if x > 1 {
        out -= out / x;
    }
    out
}

/// The counting rule for redundant tube solutions at a root of unity of the
/// given order (multiplicities at such ω come from an already-accounted
/// sector of the double, not from the 𝔡-sector).
pub fn redundant_count(nu: u64, order: u64) -> u64 {
    if order == 0 || nu % order != 0 {
        return 0;
    }
    if order == 1 {
        let n = (nu - 1) / 2;
        let tail: u64 = (1..nu).filter(|g| nu % g == 0).map(|g| g * euler_phi(nu / g)).sum();
        return 1 + n + tail / 2;
    }
    let q = nu / order;
    (1..=q)
        .filter(|g| q % g == 0)
        .map(|g| g * euler_phi(nu / g))
        .sum::<u64>()
        / 2
}

/// Default ω candidates for ν: every primitive d-th root of unity for d
/// dividing μ = ν²+4 or dividing ν (the only orders observed to carry tube
/// solutions), a single representative ξ_d for every other d with
/// φ(d) ≤ 2m (screening), and the closed-form exponent list ξ_μ^{m·l²}.
pub fn default_omega_candidates(nu: u64) -> Vec<RootOfUnity> {
    let mu = nu * nu + 4;
    let m = (nu * nu + 3) / 2;
    let bound = 2 * m;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut push = |r: RootOfUnity, out: &mut Vec<RootOfUnity>| {
        if seen.insert((r.order, r.power)) {
            out.push(r);
        }
    };
    let mut special: Vec<u64> = (1..=mu).filter(|d| mu % d == 0).collect();
    special.extend((1..=nu).filter(|d| nu % d == 0));
    special.sort_unstable();
    special.dedup();
    for &d in &special {
        if euler_phi(d) > bound {
            continue;
        }
        if d == 1 {
            push(RootOfUnity::new(1, 0), &mut out);
            continue;
        }
        for k in 1..d {
            if k.gcd(&d) == 1 {
                push(RootOfUnity::new(d, k), &mut out);
            }
        }
    }
    // Single representative per remaining eligible order; φ(d) ≥ √(d/2)
    // bounds the search range rigorously.
    let cap = 2 * bound * bound;
    let mut phi: Vec<u64> = (0..=cap).collect();
    for i in 2..=cap as usize {
        if phi[i] == i as u64 {
            let mut j = i;
            while j <= cap as usize {
                phi[j] -= phi[j] / i as u64;
                j += i;
            }
        }
    }
    for d in 1..=cap {
        if phi[d as usize] <= bound && !special.contains(&d) {
            push(RootOfUnity::new(d, 1), &mut out);
        }
    }
    for l in 1..=m {
        push(RootOfUnity::new(mu, (m * l * l) % mu), &mut out);
    }
    out
}

struct TubeDiag {
    consistent: bool,
    nullity: usize,
    solution: Option<Vec<BigComplex>>,
}

/// Householder QR with column pivoting on the (ν²+1)×ν² tube system,
/// with rigorous rank and consistency verdicts at `p` bits.
///
/// Thresholds (relative to t0, the largest squared column norm ≈ σ_max²):
/// columns whose remaining tail norm² falls below t0·2⁻²⁰⁰ are dropped;
/// a full-rank verdict additionally requires σ_min(R₁₁)² ≥ t0·2⁻¹²⁰ and a
/// deficient one σ_min(R₁₁)² ≥ 2⁴⁰·‖R₂₂‖_F² (sound since σ_r(M) ≥
/// σ_min(R₁₁) and σ_{r+1}(M) ≤ ‖R₂₂‖_F); the consistency residual must
/// satisfy ‖Qᴴb‖²_{tail} ≤ 2⁻⁸⁰·‖b‖² (consistent) or ≥ 2⁻⁴⁰·‖b‖²
/// (inconsistent).  Anything between the cuts is IllConditioned.
fn tube_candidate_diag(
    a: &IzumiMatrix,
    omega: &RootOfUnity,
    p: usize,
) -> Result<TubeDiag, IzumiError> {
    let nu = a.nu as usize;
    let nn = nu * nu;
    let w = omega.value(p);
    let wbar = w.conj();
    let d = delta_big(a.nu, p);
    let wbar_over_d = BigComplex {
        re: real::div(&wbar.re, &d),
        im: real::div(&wbar.im, &d),
    };

    let nrows = nn + 1;
    let mut m = vec![vec![BigComplex::zero(p); nn]; nrows];
    let mut b = vec![BigComplex::zero(p); nrows];
    for g in 0..nu {
        m[0][g] = BigComplex::one(p);
    }
    b[0] = w.sub(&wbar_over_d);
    let mut r = 1;
    for g in 0..nu {
        for h in 0..nu {
            m[r][g * nu + h] = m[r][g * nu + h].add(&w);
            for k in 0..nu {
                m[r][h * nu + k] = m[r][h * nu + k].sub(&a.a[(g + k) % nu][(2 * h) % nu]);
            }
            if h == 0 {
                b[r] = wbar_over_d.clone();
            }
            r += 1;
        }
    }

    let zero = real::from_u64(0, p);
    let mut perm: Vec<usize> = (0..nn).collect();
    let mut tail: Vec<BigFloat> = (0..nn)
        .map(|jx| {
            let mut s = zero.clone();
            for row in m.iter() {
                s = real::add(&s, &row[jx].abs2());
            }
            s
        })
        .collect();
    let mut t0 = zero.clone();
    for t in &tail {
        if bf_cmp(t, &t0) == Ordering::Greater {
            t0 = t.clone();
        }
    }
    let pivot_cut = real::mul(&t0, &numeric::pow2(-200, p));
    let mut rank = nn;
    for k in 0..nn {
        let mut jmax = k;
        for jx in k + 1..nn {
            if bf_cmp(&tail[jx], &tail[jmax]) == Ordering::Greater {
                jmax = jx;
            }
        }
        if bf_cmp(&tail[jmax], &pivot_cut) != Ordering::Greater {
            rank = k;
            break;
        }
        if jmax != k {
            for row in m.iter_mut() {
                row.swap(k, jmax);
            }
            perm.swap(k, jmax);
            tail.swap(k, jmax);
        }
        // Householder reflector for column k on rows k...
        let mut norm2 = zero.clone();
        for row in m.iter().skip(k) {
            norm2 = real::add(&norm2, &row[k].abs2());
        }
        let norm = real::sqrt(&norm2);
        let x0 = m[k][k].clone();
        let alpha = if x0.is_zero() {
            BigComplex::real(norm.neg())
        } else {
            x0.scale_bf(&real::div(&norm, &x0.abs())).neg()
        };
        let mut v: Vec<BigComplex> = Vec::with_capacity(nrows - k);
        v.push(x0.sub(&alpha));
        for row in m.iter().skip(k + 1) {
            v.push(row[k].clone());
        }
        let mut vnorm2 = zero.clone();
        for vi in &v {
            vnorm2 = real::add(&vnorm2, &vi.abs2());
        }
        if !vnorm2.is_zero() {
            let beta = real::div(&real::from_u64(2, p), &vnorm2);
            for jx in k + 1..nn {
                let mut wsum = BigComplex::zero(p);
                for (i, vi) in v.iter().enumerate() {
                    wsum = wsum.add(&vi.conj().mul(&m[k + i][jx]));
                }
                let wb = wsum.scale_bf(&beta);
                for (i, vi) in v.iter().enumerate() {
                    m[k + i][jx] = m[k + i][jx].sub(&vi.mul(&wb));
                }
            }
            let mut wsum = BigComplex::zero(p);
            for (i, vi) in v.iter().enumerate() {
                wsum = wsum.add(&vi.conj().mul(&b[k + i]));
            }
            let wb = wsum.scale_bf(&beta);
            for (i, vi) in v.iter().enumerate() {
                b[k + i] = b[k + i].sub(&vi.mul(&wb));
            }
        }
        m[k][k] = alpha;
        for row in m.iter_mut().skip(k + 1) {
            row[k] = BigComplex::zero(p);
        }
        for jx in k + 1..nn {
            tail[jx] = real::sub(&tail[jx], &m[k][jx].abs2());
            if tail[jx].is_negative() {
                tail[jx] = zero.clone();
            }
        }
    }

    // Smallest singular value of R11 by inverse iteration on R11ᴴR11.
    let sigma_keep2 = if rank == 0 {
        zero.clone()
    } else {
        let r11 = &m;
        let mut z: Vec<BigComplex> = vec![BigComplex::one(p); rank];
        let invs = real::div(&real::from_u64(1, p), &real::sqrt(&real::from_u64(rank as u64, p)));
        for zi in z.iter_mut() {
            *zi = zi.scale_bf(&invs);
        }
        for _ in 0..8 {
            // forward solve R11ᴴ u = z
            let mut u = vec![BigComplex::zero(p); rank];
            for i in 0..rank {
                let mut s = z[i].clone();
                for jx in 0..i {
                    s = s.sub(&r11[jx][i].conj().mul(&u[jx]));
                }
                u[i] = s.div(&r11[i][i].conj());
            }
            // back solve R11 w = u
            let mut wv = vec![BigComplex::zero(p); rank];
            for i in (0..rank).rev() {
                let mut s = u[i].clone();
                for jx in i + 1..rank {
                    s = s.sub(&r11[i][jx].mul(&wv[jx]));
                }
                wv[i] = s.div(&r11[i][i]);
            }
            let mut wn2 = zero.clone();
            for wi in &wv {
                wn2 = real::add(&wn2, &wi.abs2());
            }
            if wn2.is_zero() {
                break;
            }
            let inv = real::div(&real::from_u64(1, p), &real::sqrt(&wn2));
            for (zi, wi) in z.iter_mut().zip(&wv) {
                *zi = wi.scale_bf(&inv);
            }
        }
        let mut y2 = zero.clone();
        for i in 0..rank {
            let mut s = BigComplex::zero(p);
            for jx in i..rank {
                s = s.add(&r11[i][jx].mul(&z[jx]));
            }
            y2 = real::add(&y2, &s.abs2());
        }
        y2
    };
    let ill = || IzumiError::IllConditioned {
        order: omega.order,
        power: omega.power,
    };
    if rank < nn {
        let mut drop2 = zero.clone();
        for t in tail.iter().take(nn).skip(rank) {
            drop2 = real::add(&drop2, t);
        }
        if !drop2.is_zero()
            && bf_cmp(&sigma_keep2, &real::mul(&drop2, &numeric::pow2(40, p))) == Ordering::Less
        {
            return Err(ill());
        }
    } else if bf_cmp(&sigma_keep2, &real::mul(&t0, &numeric::pow2(-120, p))) == Ordering::Less {
        return Err(ill());
    }

    let mut bnorm2 = zero.clone();
    for bi in &b {
        bnorm2 = real::add(&bnorm2, &bi.abs2());
    }
    let mut resid2 = zero.clone();
    for bi in b.iter().skip(rank) {
        resid2 = real::add(&resid2, &bi.abs2());
    }
    let consistent = if bf_cmp(&resid2, &real::mul(&bnorm2, &numeric::pow2(-80, p)))
        != Ordering::Greater
    {
        true
    } else if bf_cmp(&resid2, &real::mul(&bnorm2, &numeric::pow2(-40, p))) != Ordering::Less {
        false
    } else {
        return Err(ill());
    };

    let solution = if consistent && rank == nn {
        let mut y = vec![BigComplex::zero(p); nn];
        for i in (0..nn).rev() {
            let mut s = b[i].clone();
            for jx in i + 1..nn {
                s = s.sub(&m[i][jx].mul(&y[jx]));
            }
            y[i] = s.div(&m[i][i]);
        }
        let mut x = vec![BigComplex::zero(p); nn];
        for (jx, &col) in perm.iter().enumerate() {
            x[col] = y[jx].clone();
        }
        Some(x)
    } else {
        None
    };
    Ok(TubeDiag {
        consistent,
        nullity: nn - rank,
        solution,
    })
}

/// Solves the tube linear system for every candidate ω and reports solution
/// counts with redundancy flags.  Requires `a` to be refined to its
/// convergence floor (residual well below 10⁻⁴⁰) so that rank decisions have
/// their full margin.
pub fn tube_solve(a: &IzumiMatrix, candidates: &[RootOfUnity]) -> Result<TubeSolution, IzumiError> {
    let p = a.precision;
    let mut seen = BTreeSet::new();
    let list: Vec<RootOfUnity> = candidates
        .iter()
        .map(|r| RootOfUnity::new(r.order, r.power))
        .filter(|r| seen.insert((r.order, r.power)))
        .collect();
    let results: Vec<Result<TubeCandidate, IzumiError>> = list
        .par_iter()
        .map(|omega| {
            let diag = tube_candidate_diag(a, omega, p)?;
            let multiplicity = if diag.consistent {
                diag.nullity as u64 + 1
            } else {
                0
            };
            Ok(TubeCandidate {
                omega: *omega,
                consistent: diag.consistent,
                multiplicity,
                redundant: redundant_count(a.nu, omega.order),
                c: diag.solution,
            })
        })
        .collect();
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        out.push(r?);
    }
    Ok(TubeSolution {
        nu: a.nu,
        precision: p,
        candidates: out,
    })
}

// ---------------------------------------------------------------------------
// Reconstruction
// ---------------------------------------------------------------------------

/// Numerically reconstructed modular data of the double: exact T, numeric S.
#[derive(Clone)]
pub struct ReconstructedDouble {
    pub nu: u64,
    pub precision: usize,
    pub labels: Vec<String>,
    /// Full S′ matrix: closed-form blocks embedded numerically, the 𝔡×𝔡
    /// block rebuilt from the tube solutions.
    pub s: Vec<Vec<BigComplex>>,
    /// Full T′ vector, exact (𝔡-entries recognised as roots of unity).
    pub t: Vec<Cyc>,
}

/// Match verdict for a reconstructed S′ against exact target data.
#[derive(Clone)]
pub enum MatchVerdict {
    /// Entrywise deviation on the 𝔡-block fell below the rigidity bound
    /// 1/(18√μ), so S′ equals the target exactly; the exact data is
    /// returned.
    Matched {
        deviation: BigFloat,
        data: ModularData,
    },
    /// Deviation at or above the bound.
    Unmatched { deviation: BigFloat },
}

impl fmt::Debug for MatchVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchVerdict::Matched { deviation, .. } => f
                .debug_struct("Matched")
                .field("deviation", &deviation.to_f64())
                .finish_non_exhaustive(),
            MatchVerdict::Unmatched { deviation } => f
                .debug_struct("Unmatched")
                .field("deviation", &deviation.to_f64())
                .finish(),
        }
    }
}

/// Reconstructs the double's modular data from tube outcomes at central
/// charge `c_mod_24`: the non-redundant solution count per ω must total
/// m = (ν²+3)/2 with every count equal to 1, the 𝔡-sector T-values are
/// ξ₂₄^{−c}·ω exactly, and the 𝔡-block of S′ comes from the sesquilinear
/// reconstruction formula.  Non-𝔡 blocks are copied from the closed-form
/// family.  A count above 1 (or an underdetermined C) aborts with
/// [`IzumiError::AmbiguousMultiplicity`] carrying the recovered T-values.
pub fn reconstruct_double(
    a: &IzumiMatrix,
    tube: &TubeSolution,
    c_mod_24: i64,
) -> Result<ReconstructedDouble, IzumiError> {
    if tube.nu != a.nu {
        return Err(IzumiError::PreconditionViolated(format!(
            "tube was solved for ν = {}, matrix has ν = {}",
            tube.nu, a.nu
        )));
    }
    let nu = a.nu;
    let nuz = nu as usize;
    let n = ((nu - 1) / 2) as usize;
    let mu = nu * nu + 4;
    let m = ((nu * nu + 3) / 2) as usize;
    let p = a.precision;
    let twist = Cyc::root_of_unity(24, -(c_mod_24.rem_euclid(24)));

    let used: Vec<(&TubeCandidate, u64)> = tube
        .candidates
        .iter()
        .map(|c| (c, c.multiplicity.saturating_sub(c.redundant.min(c.multiplicity))))
        .filter(|&(_, nonred)| nonred > 0)
        .collect();
    let t_prime_all = || -> Vec<Cyc> {
        let mut roots: Vec<RootOfUnity> = Vec::new();
        for &(cand, nonred) in &used {
            for _ in 0..nonred {
                roots.push(cand.omega);
            }
        }
        roots.sort_by(|x, y| x.phase_cmp(y));
        roots.iter().map(|r| twist.mul(&r.cyc())).collect()
    };
    if let Some(&(cand, _)) = used
        .iter()
        .find(|&&(cand, nonred)| nonred > 1 || cand.c.is_none())
    {
        return Err(IzumiError::AmbiguousMultiplicity {
            order: cand.omega.order,
            power: cand.omega.power,
            t_prime: t_prime_all(),
        });
    }
    let total: u64 = used.iter().map(|&(_, nr)| nr).sum();
    if total != m as u64 {
        return Err(IzumiError::TubeCountMismatch {
            found: total,
            expected: m as u64,
        });
    }

    // Order the m solutions: by the closed-form label l when the ω multiset
    // matches ξ_μ^{m·l²} exactly, else by phase.
    let expected: Vec<RootOfUnity> = (1..=m as u64)
        .map(|l| RootOfUnity::new(mu, (m as u64 * l * l) % mu))
        .collect();
    let mut expected_sorted = expected.clone();
    expected_sorted.sort_unstable();
    let mut found_sorted: Vec<RootOfUnity> = used.iter().map(|&(c, _)| c.omega).collect();
    found_sorted.sort_unstable();
    let ordered: Vec<&TubeCandidate> = if expected_sorted == found_sorted {
        expected
            .iter()
            .map(|want| {
                used.iter()
                    .find(|&&(c, _)| c.omega == *want)
                    .map(|&(c, _)| c)
                    .expect("multiset equality guarantees a match")
            })
            .collect()
    } else {
        let mut by_phase: Vec<&TubeCandidate> = used.iter().map(|&(c, _)| c).collect();
        by_phase.sort_by(|x, y| x.omega.phase_cmp(&y.omega));
        by_phase
    };

    let family = families::haagerup_izumi(&[nu], 0)?;
    let top = 2 + n + n * nuz;
    let mut s: Vec<Vec<BigComplex>> = family
        .s
        .iter()
        .map(|row| row.iter().map(|e| e.embed(p)).collect())
        .collect();
    let d = delta_big(nu, p);
    let denom = real::add(&real::mul(&real::from_u64(nu, p), &d), &real::from_u64(2, p));
    let inv_denom = real::div(&real::from_u64(1, p), &denom);
    let omertas: Vec<BigComplex> = ordered.iter().map(|c| c.omega.value(p)).collect();
    let rows: Vec<Vec<BigComplex>> = (0..m)
        .into_par_iter()
        .map(|l| {
            let cl = ordered[l].c.as_ref().expect("checked above");
            (0..m)
                .map(|l2| {
                    let cl2 = ordered[l2].c.as_ref().expect("checked above");
                    let mut acc = BigComplex::zero(p);
                    for g in 0..nuz {
                        for h in 0..nuz {
                            let t = cl[g * nuz + (g + h) % nuz]
                                .mul(&cl2[((nuz - g) % nuz) * nuz + h]);
                            acc = acc.add(&t.conj());
                        }
                    }
                    omertas[l]
                        .mul(&omertas[l2])
                        .add(&acc.scale_bf(&d))
                        .scale_bf(&inv_denom)
                })
                .collect()
        })
        .collect();
    for (l, row) in rows.into_iter().enumerate() {
        for (l2, v) in row.into_iter().enumerate() {
            s[top + l][top + l2] = v;
        }
    }
    let mut t = family.t.clone();
    for (l, cand) in ordered.iter().enumerate() {
        t[top + l] = twist.mul(&cand.omega.cyc());
    }
    Ok(ReconstructedDouble {
        nu,
        precision: p,
        labels: family.labels.clone(),
        s,
        t,
    })
}

/// Certifies a reconstructed S′ against exact target data.  The labels and
/// T must agree exactly and the non-𝔡 blocks must already coincide (they
/// are closed-form copies); the 𝔡-block comparison applies the rigidity
/// bound 1/(18√μ): a maximal entrywise deviation below the bound forces
/// exact equality, and the exact data is returned.
pub fn match_and_exactify(
    recon: &ReconstructedDouble,
    target: &ModularData,
) -> Result<MatchVerdict, IzumiError> {
    if target.labels != recon.labels {
        return Err(IzumiError::PreconditionViolated(
            "target labels differ from the reconstruction".into(),
        ));
    }
    if target.t != recon.t {
        return Err(IzumiError::PreconditionViolated(
            "target T differs from the exactly recovered T′".into(),
        ));
    }
    let p = recon.precision;
    let nu = recon.nu;
    let n = ((nu - 1) / 2) as usize;
    let top = 2 + n + n * nu as usize;
    let dim = recon.labels.len();
    let tol_copy = numeric::pow2(-60, p);
    let mut dev_d = real::from_u64(0, p);
    for i in 0..dim {
        for j in 0..dim {
            let dev = recon.s[i][j].sub(&target.s[i][j].embed(p)).abs();
            if i >= top && j >= top {
                if bf_cmp(&dev, &dev_d) == Ordering::Greater {
                    dev_d = dev;
                }
            } else if bf_cmp(&dev, &tol_copy) == Ordering::Greater {
                return Err(IzumiError::PreconditionViolated(format!(
                    "non-𝔡 entry ({i},{j}) deviates by {}",
                    dev.to_f64()
                )));
            }
        }
    }
    let mu = nu * nu + 4;
    let bound = real::div(
        &real::from_u64(1, p),
        &real::mul(&real::from_u64(18, p), &real::sqrt(&real::from_u64(mu, p))),
    );
    if bf_cmp(&dev_d, &bound) == Ordering::Less {
        Ok(MatchVerdict::Matched {
            deviation: dev_d,
            data: target.clone(),
        })
    } else {
        Ok(MatchVerdict::Unmatched { deviation: dev_d })
    }
}

/// Checks T^e = I for an exact T vector of roots of unity (the checkable
/// half of the order conjecture, with e = 2μν for the doubles built here).
pub fn t_power_is_identity(t: &[Cyc], exponent: u64) -> bool {
    t.iter().all(|x| match x.as_root_of_unity() {
        Some((l, k)) => (exponent as u128 * k as u128) % l as u128 == 0,
        None => false,
    })
}

// ---------------------------------------------------------------------------
// Raw-entry search for noncyclic groups
// ---------------------------------------------------------------------------

/// A raw-entry solution candidate over a noncyclic abelian group.
#[derive(Clone, Debug)]
pub struct RawSolution {
    pub k_orders: Vec<u64>,
    /// Entries A_{g,h} (row-major, double precision).
    pub entries: Vec<Vec<(f64, f64)>>,
    pub residual: f64,
}

/// Multi-start search over the raw free entries of A for an abelian group
/// given by its cyclic factor orders (the symmetries A_{g,h} = conj(A_{h,g})
/// = A_{−h,g−h} cut the unknowns to one complex value per orbit).  Runs at
/// double precision as a screening device; solutions below 10⁻¹⁸ in squared
/// residual are reported, and an empty result documents the absence of
/// solutions at this search effort (no proof is implied).
pub fn solve_noncyclic(
    k_orders: &[u64],
    config: &SolveConfig,
) -> Result<Vec<RawSolution>, IzumiError> {
    let nu: u64 = k_orders.iter().product();
    if k_orders.is_empty() || k_orders.iter().any(|&o| o < 2) || nu % 2 == 0 || nu > 9 {
        return Err(IzumiError::UnsupportedOrder { nu, max: 9 });
    }
    let nz = nu as usize;
    // Mixed-radix element encoding and group tables.
    let orders: Vec<u64> = k_orders.to_vec();
    let decode = |mut e: usize| -> Vec<u64> {
        let mut c = Vec::with_capacity(orders.len());
        for &o in &orders {
            c.push(e as u64 % o);
            e /= o as usize;
        }
        c
    };
    let encode = |c: &[u64]| -> usize {
        let mut e = 0usize;
        for (i, &o) in orders.iter().enumerate().rev() {
            e = e * o as usize + c[i] as usize;
        }
        e
    };
    let mut add = vec![0usize; nz * nz];
    let mut neg = vec![0usize; nz];
    for x in 0..nz {
        let cx = decode(x);
        let cneg: Vec<u64> = cx.iter().zip(&orders).map(|(&a, &o)| (o - a) % o).collect();
        neg[x] = encode(&cneg);
        for y in 0..nz {
            let cy = decode(y);
            let cs: Vec<u64> = cx
                .iter()
                .zip(&cy)
                .zip(&orders)
                .map(|((&a, &b), &o)| (a + b) % o)
                .collect();
            add[x * nz + y] = encode(&cs);
        }
    }
    let addf = |x: usize, y: usize| add[x * nz + y];
    let subf = |x: usize, y: usize| add[x * nz + neg[y]];

    // Orbit structure of the free pairs under (g,h) ↦ (−h, g−h) and the
    // conjugate-transpose pairing.
    #[derive(Clone)]
    enum Var {
        Real { cells: Vec<(usize, usize)> },
        Complex {
            cells: Vec<(usize, usize)>,
            conj_cells: Vec<(usize, usize)>,
        },
    }
    let rot = |g: usize, h: usize| (neg[h], subf(g, h));
    let mut visited = vec![false; nz * nz];
    let mut vars: Vec<Var> = Vec::new();
    for g in 0..nz {
        for h in 0..nz {
            if g == 0 || h == 0 || g == h || visited[g * nz + h] {
                continue;
            }
            let mut orbit = vec![(g, h)];
            loop {
                let (a, b) = *orbit.last().unwrap();
                let nx = rot(a, b);
                if nx == (g, h) {
                    break;
                }
                orbit.push(nx);
            }
            for &(a, b) in &orbit {
                visited[a * nz + b] = true;
            }
            let tau: Vec<(usize, usize)> = orbit.iter().map(|&(a, b)| (b, a)).collect();
            if tau.contains(&(g, h)) {
                vars.push(Var::Real { cells: orbit });
            } else {
                for &(a, b) in &tau {
                    visited[a * nz + b] = true;
                }
                vars.push(Var::Complex {
                    cells: orbit,
                    conj_cells: tau,
                });
            }
        }
    }
    let dim: usize = vars
        .iter()
        .map(|v| if matches!(v, Var::Real { .. }) { 1 } else { 2 })
        .sum();

    let mub = (nu * nu + 4) as f64;
    let d = (nu as f64 + mub.sqrt()) / 2.0;
    let a00 = (d - 2.0) / (d - 1.0);
    let aneg = -1.0 / (d - 1.0);
    let rho = d.sqrt() / (d - 1.0);

    let build = |x: &[f64]| -> Vec<(f64, f64)> {
        let mut a = vec![(0.0, 0.0); nz * nz];
        a[0] = (a00, 0.0);
        for g in 1..nz {
            a[g * nz] = (aneg, 0.0);
            a[g] = (aneg, 0.0);
            a[g * nz + g] = (aneg, 0.0);
        }
        let mut i = 0;
        for v in &vars {
            match v {
                Var::Real { cells } => {
                    for &(g, h) in cells {
                        a[g * nz + h] = (x[i], 0.0);
                    }
                    i += 1;
                }
                Var::Complex { cells, conj_cells } => {
                    for &(g, h) in cells {
                        a[g * nz + h] = (x[i], x[i + 1]);
                    }
                    for &(g, h) in conj_cells {
                        a[g * nz + h] = (x[i], -x[i + 1]);
                    }
                    i += 2;
                }
            }
        }
        a
    };
    let residual_vec = |a: &[(f64, f64)], out: &mut Vec<f64>| {
        out.clear();
        let cm = |(ar, ai): (f64, f64), (br, bi): (f64, f64)| (ar * br - ai * bi, ar * bi + ai * br);
        let cj = |(ar, ai): (f64, f64)| (ar, -ai);
        for g in 0..nz {
            for h in 0..nz {
                let mut s = (0.0, 0.0);
                for mm in 0..nz {
                    let t = cm(a[addf(g, mm) * nz + h], cj(a[mm * nz + h]));
                    s = (s.0 + t.0, s.1 + t.1);
                }
                if g == 0 {
                    s.0 -= 1.0;
                }
                if h == 0 {
                    s.0 += 1.0 / d;
                }
                out.push(s.0);
                out.push(s.1);
            }
        }
        for g in 0..nz {
            for h in 0..nz {
                for k in 0..nz {
                    for l in 0..nz {
                        let mut s = (0.0, 0.0);
                        for mm in 0..nz {
                            let t = cm(
                                a[mm * nz + addf(g, h)],
                                cj(cm(a[addf(mm, k) * nz + g], a[addf(mm, l) * nz + h])),
                            );
                            s = (s.0 + t.0, s.1 + t.1);
                        }
                        let t = cm(a[addf(g, l) * nz + k], a[addf(h, k) * nz + l]);
                        s = (s.0 - t.0, s.1 - t.1);
                        if g == 0 && h == 0 {
                            s.0 += 1.0 / d;
                        }
                        out.push(s.0);
                        out.push(s.1);
                    }
                }
            }
        }
    };
    let rnorm = |x: &[f64]| -> f64 {
        let a = build(x);
        let mut r = Vec::new();
        residual_vec(&a, &mut r);
        r.iter().map(|v| v * v).sum()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let nstarts = (config.starts / 25).max(8);
    let starts: Vec<Vec<f64>> = (0..nstarts)
        .map(|_| (0..dim).map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * 2.0 * rho).collect())
        .collect();

    // Gauss–Newton with a numerically differentiated Jacobian.
    let polish = |mut x: Vec<f64>| -> (Vec<f64>, f64) {
        let mut r = rnorm(&x);
        let mut lam = 1e-4;
        let rlen = 2 * (nz * nz + nz * nz * nz * nz);
        let mut rv = Vec::with_capacity(rlen);
        for _ in 0..40 {
            residual_vec(&build(&x), &mut rv);
            let r0 = rv.clone();
            let h = 1e-6;
            let mut jt = vec![vec![0.0; rlen]; dim];
            for (i, jrow) in jt.iter_mut().enumerate() {
                let mut xp = x.clone();
                xp[i] += h;
                residual_vec(&build(&xp), &mut rv);
                for (k, v) in rv.iter().enumerate() {
                    jrow[k] = (v - r0[k]) / h;
                }
            }
            let mut jtj = vec![vec![0.0; dim]; dim];
            let mut jtr = vec![0.0; dim];
            for a_i in 0..dim {
                for b_i in 0..dim {
                    jtj[a_i][b_i] = jt[a_i].iter().zip(&jt[b_i]).map(|(u, v)| u * v).sum();
                }
                jtr[a_i] = jt[a_i].iter().zip(&r0).map(|(u, v)| u * v).sum();
            }
            let scale = (0..dim).map(|i| jtj[i][i]).fold(1e-300, f64::max);
            let mut improved = false;
            for _ in 0..8 {
                let mut m = jtj.clone();
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] += lam * scale;
                }
                if let Some(dx) = solve_f64(m, jtr.iter().map(|v| -v).collect()) {
                    let xn: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
                    let rn = rnorm(&xn);
                    if rn < r {
                        x = xn;
                        r = rn;
                        lam = (lam * 0.25).max(1e-12);
                        improved = true;
                        break;
                    }
                }
                lam *= 8.0;
            }
            if !improved || r < 1e-24 {
                break;
            }
        }
        (x, r)
    };

    let found: Vec<RawSolution> = starts
        .par_iter()
        .map(|x0| polish(x0.clone()))
        .collect::<Vec<_>>()
        .into_iter()
        .filter(|(_, r)| *r < 1e-18)
        .map(|(x, residual)| {
            let flat = build(&x);
            let entries = (0..nz)
                .map(|g| (0..nz).map(|h| flat[g * nz + h]).collect())
                .collect();
            RawSolution {
                k_orders: orders.clone(),
                entries,
                residual,
            }
        })
        .collect();
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bf(x: f64) -> BigFloat {
        real::from_f64(x, 256)
    }

    /// The exact-root matrix at ν = 3: a = (1 + i√(4δ−1))/2 solves
    /// a² − a + δ = 0, and A built from it satisfies the full system.
    fn exact_matrix_nu3(p: usize) -> IzumiMatrix {
        let d = delta_big(3, p);
        let one = real::from_u64(1, p);
        let dm1 = real::sub(&d, &one);
        let four_d_m1 = real::sub(&real::mul(&real::from_u64(4, p), &d), &one);
        let a_re = real::div(&one, &real::from_u64(2, p));
        let a_im = real::div(&real::sqrt(&four_d_m1), &real::from_u64(2, p));
        let a = BigComplex { re: a_re, im: a_im };
        let a00 = BigComplex::real(real::div(&real::sub(&d, &real::from_u64(2, p)), &dm1));
        let aneg = BigComplex::real(real::div(&one, &dm1).neg());
        let inv_dm1 = real::div(&one, &dm1);
        let a12 = a.scale_bf(&inv_dm1);
        let a21 = a12.conj();
        IzumiMatrix {
            nu: 3,
            a: vec![
                vec![a00, aneg.clone(), aneg.clone()],
                vec![aneg.clone(), aneg.clone(), a12],
                vec![aneg.clone(), a21, aneg],
            ],
            delta: delta_cyc(3),
            precision: p,
        }
    }

    #[test]
    fn exact_root_matrix_satisfies_the_system() {
        let m = exact_matrix_nu3(256);
        let r = residual_norm(&m);
        assert!(
            bf_cmp(&r, &bf(1e-60)) == Ordering::Less,
            "residual {:?} not below 1e-60",
            r.to_f64()
        );
        let md = modulus_defect(&m);
        assert!(bf_cmp(&md, &bf(1e-70)) == Ordering::Less);
        let cd = cross_relation_defect(&m);
        assert!(bf_cmp(&cd, &bf(1e-70)) == Ordering::Less);
        // the angle of the oscillating entry
        let j2 = real::atan2(&m.a[1][2].im, &m.a[1][2].re).to_f64();
        assert!((j2 - 1.2920763374025679).abs() < 1e-12, "j2 = {j2}");
    }

    #[test]
    fn angle_parametrization_matches_the_exact_root() {
        let p = 256;
        let exact = exact_matrix_nu3(p);
        let j2 = real::atan2(&exact.a[1][2].im, &exact.a[1][2].re);
        let av = AngleVector::new(3, vec![j2]).unwrap();
        let built = angles_to_matrix(&av, p);
        let mut worst = real::from_u64(0, p);
        for g in 0..3 {
            for h in 0..3 {
                let dev = built.a[g][h].sub(&exact.a[g][h]).abs();
                if bf_cmp(&dev, &worst) == Ordering::Greater {
                    worst = dev;
                }
            }
        }
        assert!(
            bf_cmp(&worst, &bf(1e-70)) == Ordering::Less,
            "max dev {:?}",
            worst.to_f64()
        );
        assert!(bf_cmp(&residual_norm(&built), &bf(1e-60)) == Ordering::Less);
    }

    #[test]
    fn wrong_angles_are_rejected() {
        let av = AngleVector::from_f64(3, &[0.0], 128).unwrap();
        let r = residual_norm(&angles_to_matrix(&av, 128)).to_f64();
        assert!(r > 0.1, "residual at j2 = 0 is {r}");
        assert!((r - 4.682619460395114).abs() < 1e-6, "frozen value drifted: {r}");
    }

    #[test]
    fn golden_case_has_zero_residual() {
        let av = AngleVector::new(1, Vec::new()).unwrap();
        let r = residual_norm(&angles_to_matrix(&av, 256));
        assert!(bf_cmp(&r, &bf(1e-70)) == Ordering::Less);
        let classes = solve_matrices(1, &SolveConfig::default()).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].orbit_size, 1);
    }

    #[test]
    fn compiled_evaluator_agrees_with_direct_residual() {
        let p = 256;
        let sys = compile_system(5);
        let (cls, consts) = sys.class_values_big(5, p);
        let j = [0.7, -1.3];
        let jb: Vec<BigFloat> = j.iter().map(|&x| real::from_f64(x, p)).collect();
        let (r_compiled, _) = eval_big(&sys, &cls, &consts, &jb, p, false);
        let av = AngleVector::from_f64(5, &j, p).unwrap();
        let r_direct = residual_norm(&angles_to_matrix(&av, p));
        let dev = real::sub(&r_compiled, &r_direct).abs().to_f64();
        assert!(dev < 1e-40, "compiled vs direct deviate by {dev}");
        // f64 evaluator agrees too
        let (clsf, constsf) = sys.class_values_f64(5);
        let rf = eval_f64(&sys, &clsf, &constsf, &j, None);
        assert!((rf - r_direct.to_f64()).abs() < 1e-10);
    }

    #[test]
    fn solver_finds_the_unique_class_nu3() {
        let config = SolveConfig {
            starts: 60,
            ..SolveConfig::default()
        };
        let classes = solve_matrices(3, &config).unwrap();
        assert_eq!(classes.len(), 1);
        let c = &classes[0];
        assert!(bf_cmp(&c.residual, &bf(1e-40)) == Ordering::Less);
        assert_eq!(c.orbit_size, 2);
        let j = c.angles.to_f64();
        assert!(
            (j[0] - (-1.292076337403)).abs() < 1e-5,
            "canonical angle {j:?}"
        );
    }

    #[test]
    fn solver_finds_the_unique_class_nu5() {
        let config = SolveConfig {
            starts: 120,
            ..SolveConfig::default()
        };
        let classes = solve_matrices(5, &config).unwrap();
        assert_eq!(classes.len(), 1);
        let c = &classes[0];
        assert_eq!(c.orbit_size, 4);
        let j = c.angles.to_f64();
        let want = [-1.413783982606, -1.229097770630];
        for (a, b) in j.iter().zip(&want) {
            assert!((a - b).abs() < 1e-5, "canonical {j:?} vs {want:?}");
        }
        // canonicalization is idempotent
        let again = c.angles.canonical().to_f64();
        for (a, b) in j.iter().zip(&again) {
            assert!((a - b).abs() < 1e-12);
        }
        // solved entries satisfy the exact quartic
        // a⁴ − δa³ + (3δ−2)a² − δ²a + δ² = 0 for a = (δ−1)·A_{1,2}
        let p = 256;
        let m = angles_to_matrix(&c.angles, p);
        let d = delta_big(5, p);
        let dm1 = real::sub(&d, &real::from_u64(1, p));
        let a = m.a[1][2].scale_bf(&dm1);
        let a2 = a.mul(&a);
        let a3 = a2.mul(&a);
        let a4 = a3.mul(&a2).div(&a); // a⁴
        let c2 = real::sub(&real::mul(&real::from_u64(3, p), &d), &real::from_u64(2, p));
        let d2 = real::mul(&d, &d);
        let q = a4
            .sub(&a3.scale_bf(&d))
            .add(&a2.scale_bf(&c2))
            .sub(&a.scale_bf(&d2))
            .add(&BigComplex::real(d2.clone()));
        assert!(
            bf_cmp(&q.abs(), &bf(1e-20)) == Ordering::Less,
            "quartic defect {:?}",
            q.abs().to_f64()
        );
        assert!(bf_cmp(&modulus_defect(&m), &bf(1e-20)) == Ordering::Less);
        assert!(bf_cmp(&cross_relation_defect(&m), &bf(1e-20)) == Ordering::Less);
    }

    #[test]
    fn solver_finds_the_unique_class_nu7() {
        let config = SolveConfig {
            starts: 48,
            ..SolveConfig::default()
        };
        let classes = solve_matrices(7, &config).unwrap();
        assert_eq!(classes.len(), 1);
        let c = &classes[0];
        assert_eq!(c.orbit_size, 6);
        let j = c.angles.to_f64();
        let want = [-2.471228040092, -0.516855541958, -0.213772438300];
        for (a, b) in j.iter().zip(&want) {
            assert!((a - b).abs() < 1e-5, "canonical {j:?} vs {want:?}");
        }
    }

    #[test]
    fn tube_multiplicities_nu3() {
        let a = exact_matrix_nu3(256);
        let mut cands = vec![
            RootOfUnity::new(1, 0),
            RootOfUnity::new(3, 1),
            RootOfUnity::new(3, 2),
            RootOfUnity::new(7, 1),
            RootOfUnity::new(9, 1),
            RootOfUnity::new(4, 1),
            RootOfUnity::new(2, 1),
        ];
        for l in 1..=6u64 {
            cands.push(RootOfUnity::new(13, (6 * l * l) % 13));
        }
        let tube = tube_solve(&a, &cands).unwrap();
        let get = |order: u64, power: u64| {
            let want = RootOfUnity::new(order, power);
            tube.candidates
                .iter()
                .find(|c| c.omega == want)
                .unwrap_or_else(|| panic!("candidate {want} missing"))
        };
        let c1 = get(1, 0);
        assert!(c1.consistent && c1.multiplicity == 3 && c1.redundant == 3);
        for power in [1, 2] {
            let c3 = get(3, power);
            assert!(c3.consistent && c3.multiplicity == 1 && c3.redundant == 1);
        }
        for (order, power) in [(7, 1), (9, 1), (4, 1), (2, 1)] {
            let c = get(order, power);
            assert!(!c.consistent && c.multiplicity == 0, "ω = ξ_{order}^{power}");
        }
        for l in 1..=6u64 {
            let c = get(13, (6 * l * l) % 13);
            assert!(c.consistent && c.multiplicity == 1 && c.redundant == 0);
            assert!(c.c.is_some());
        }
    }

    #[test]
    fn reconstruction_nu3_matches_the_closed_form() {
        let a = exact_matrix_nu3(256);
        let cands: Vec<RootOfUnity> =
            (1..=6u64).map(|l| RootOfUnity::new(13, (6 * l * l) % 13)).collect();
        let tube = tube_solve(&a, &cands).unwrap();
        let recon = reconstruct_double(&a, &tube, 0).unwrap();
        let family = families::haagerup_izumi(&[3], 0).unwrap();
        assert_eq!(recon.labels, family.labels);
        assert_eq!(recon.t, family.t);
        // d-block deviation from the closed form
        let top = 2 + 1 + 3;
        let mut dev = 0.0f64;
        for l in 0..6 {
            for l2 in 0..6 {
                let want = family.s[top + l][top + l2].embed(256);
                let got = &recon.s[top + l][top + l2];
                dev = dev.max(got.sub(&want).abs().to_f64());
            }
        }
        assert!(dev < 2e-9, "d-block deviation {dev}");
        match match_and_exactify(&recon, &family).unwrap() {
            MatchVerdict::Matched { data, .. } => {
                assert_eq!(data.t, family.t);
            }
            MatchVerdict::Unmatched { deviation } => {
                panic!("expected a match, got deviation {:?}", deviation.to_f64())
            }
        }
        // perturbing one d-entry past the bound breaks the match
        let mut bad = recon.clone();
        bad.s[top][top] = bad.s[top][top].add(&BigComplex::from_f64(0.1, 0.0, 256));
        match match_and_exactify(&bad, &family).unwrap() {
            MatchVerdict::Unmatched { deviation } => {
                assert!((deviation.to_f64() - 0.1).abs() < 1e-6);
            }
            MatchVerdict::Matched { .. } => panic!("perturbed S′ must not match"),
        }
        // conjectured T order: (T′)^{2μν} = I
        assert!(t_power_is_identity(&recon.t, 2 * 13 * 3));
        assert!(!t_power_is_identity(&recon.t, 2));
    }

    #[test]
    fn reconstruction_reports_ambiguity_for_nu9() {
        // refine the known class-1 angles, then probe the collided ω
        let start = AngleVector::from_f64(
            9,
            &[2.396976693, 2.079251103, -0.2079168419, -2.508673987],
            256,
        )
        .unwrap();
        let config = SolveConfig::default();
        let (refined, r) = refine_angles(&start, &config).unwrap();
        assert!(bf_cmp(&r, &bf(1e-40)) == Ordering::Less, "residual {:?}", r.to_f64());
        let a = angles_to_matrix(&refined, 256);
        let tube = tube_solve(&a, &[RootOfUnity::new(85, 42)]).unwrap();
        let cand = &tube.candidates[0];
        assert!(cand.consistent);
        assert_eq!(cand.multiplicity, 2, "ξ₈₅^42 collides (l = 1 and l = 16)");
        assert_eq!(cand.redundant, 0);
        match reconstruct_double(&a, &tube, 0) {
            Err(IzumiError::AmbiguousMultiplicity { order, power, t_prime }) => {
                assert_eq!((order, power), (85, 42));
                assert_eq!(t_prime.len(), 2);
                assert_eq!(t_prime[0], Cyc::root_of_unity(85, 42));
            }
            other => panic!(
                "expected AmbiguousMultiplicity, got {:?}",
                other.err().map(|e| e.to_string())
            ),
        }
    }

    #[test]
    fn redundancy_rule_table() {
        let table: [(u64, &[(u64, u64)]); 5] = [
            (3, &[(1, 3), (3, 1)]),
            (5, &[(1, 5), (5, 2)]),
            (7, &[(1, 7), (7, 3)]),
            (9, &[(1, 11), (3, 6), (9, 3)]),
            (15, &[(1, 23), (3, 9), (5, 10), (15, 4)]),
        ];
        for (nu, rows) in table {
            for &(order, want) in rows {
                assert_eq!(
                    redundant_count(nu, order),
                    want,
                    "redundant_count({nu}, {order})"
                );
            }
            // non-divisor orders carry no redundancy
            assert_eq!(redundant_count(nu, 2), 0);
            assert_eq!(redundant_count(nu, nu + 2), 0);
        }
    }

    #[test]
    fn default_candidates_contain_the_required_roots() {
        let cands = default_omega_candidates(3);
        let has = |order: u64, power: u64| {
            cands.contains(&RootOfUnity::new(order, power))
        };
        assert!(has(1, 0));
        assert!(has(2, 1), "-1");
        assert!(has(4, 1), "i");
        assert!(has(7, 1));
        assert!(has(9, 1));
        for l in 1..=6u64 {
            assert!(has(13, (6 * l * l) % 13), "μ-list entry l = {l}");
        }
        // full primitive set at the divisors of μ
        for k in 1..13 {
            assert!(has(13, k));
        }
        // normalized and deduplicated
        let mut seen = BTreeSet::new();
        for c in &cands {
            assert!(c.power < c.order || c.order == 1);
            assert!(seen.insert((c.order, c.power)), "duplicate {c}");
        }
    }

    #[test]
    fn canonical_form_is_orbit_invariant() {
        // all orbit images of a generic vector share one canonical form
        let free = [0.9, -2.1];
        let p = 192;
        let cands = orbit_candidates_big(5, &free.map(|x| real::from_f64(x, p)), p);
        assert_eq!(cands.len(), 4);
        let base = canonical_big(5, &free.map(|x| real::from_f64(x, p)), p);
        for cand in &cands {
            let again = canonical_big(5, cand, p);
            for (a, b) in base.iter().zip(&again) {
                assert!(
                    real::sub(a, b).abs().to_f64() < 1e-9,
                    "orbit image changed the canonical form"
                );
            }
        }
        // entries reduced to (−π, π]
        for cand in &cands {
            for v in cand {
                let x = v.to_f64();
                assert!(x > -std::f64::consts::PI - 1e-12 && x <= std::f64::consts::PI + 1e-12);
            }
        }
    }

    #[test]
    fn noncyclic_raw_search_reports_absence() {
        let config = SolveConfig {
            starts: 200, // 8 effective starts for the raw search
            ..SolveConfig::default()
        };
        let found = solve_noncyclic(&[3, 3], &config).unwrap();
        assert!(
            found.is_empty(),
            "unexpected raw solutions: {:?}",
            found.iter().map(|s| s.residual).collect::<Vec<_>>()
        );
        assert!(solve_noncyclic(&[3, 5], &config).is_err(), "|K| = 15 over the cap");
    }
}
