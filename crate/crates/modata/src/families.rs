//! Exact constructors for the built-in modular-data families, together with
//! the Z₂-lamination detector and the graft combinator that splices two
//! laminated data sets into a third.
//!
//! The families:
//!
//! * [`lattice_double`] — the abelian data of an even positive-definite
//!   lattice `L`, living on the discriminant group `L*/L`:
//!   S_{[u],[v]} = |L*/L|^{−1/2} e^{−2πi u·v}, T_{[u]} = e^{πi u·u − πi n/12}
//!   (the sign in S is pinned by (ST)³ = S², matching the theta-series
//!   transformation law).
//! * [`cyclic_double`] — the twisted quantum double of Z_ν (ν odd) with the
//!   standard 3-cocycle ω_q(a,b,c) = e^{2πi q a (b+c−[b+c]_ν)/ν²}; primaries
//!   are pairs (a,b) ∈ Z_ν², T_{(a,b)} = e^{2πi(ωa²+νab)/ν²}.
//! * [`dihedral_double`] — the twisted double of the dihedral group D_ν
//!   (ν odd), twist group Z₂ × Z_ν recorded as a sign `s` and ω mod ν.
//! * [`so_level2`] — affine so(2m+1) at level 2, with m+4 primaries and
//!   central charge 2m.
//! * [`haagerup_izumi`] — the two-parameter series attached to an odd
//!   abelian group K (|K| = ν) and twist ω mod ν: 2+n+nν+m primaries with
//!   n = (ν−1)/2, m = (ν²+3)/2, golden-like unit δ = (ν+√μ)/2, μ = ν²+4.
//!   For noncyclic K the twist must vanish and the cosine blocks become
//!   character evaluations on the generalized dihedral group K ⋊ Z₂.
//! * [`galois_twist_hg`] — entrywise Galois images of the Haagerup–Izumi
//!   data selected by an even-size set P of primes dividing μ; these keep
//!   the fusion ring but change the modular equivalence class.
//!
//! A modular datum with real S is *Z₂-laminated* when its primaries split as
//! (0, 𝔟; 𝔞₁…𝔞_p; 𝔡₁…𝔡_q) with
//!
//! ```text
//!       ⎛ x  x   a⃗   d⃗ ⎞
//!   S = ⎜ x  x   a⃗  −d⃗ ⎟ ,   T = diag(r, r; s⃗; t⃗),
//!       ⎜ a⃗ᵀ a⃗ᵀ  A   0 ⎟
//!       ⎝ d⃗ᵀ −d⃗ᵀ 0   D ⎠
//! ```
//!
//! in which case there are integers M, L, N with 2x = 1/√M, N and 4^L
//! dividing 4M, 2^{1−L}√M·a⃗ and 2√(M/N)·d⃗ primitive integral vectors.
//! [`graft`] replaces the (d⃗, D, t⃗) slot of one laminated datum by the
//! corresponding slot of another: either verbatim (equal x and r), or — when
//! x > x′ and r = −r′ζ for a third root of unity ζ — by the donor's
//! (a⃗′, A′, t⃗′) slot with flipped signs, which shifts the vacuum block to
//! x ± x′ and rescales t⃗′ by −ζ.  The second form is how the Haagerup–Izumi
//! datum arises from the dihedral double of the same ν and so(μ) level 2.

use crate::cyclotomic::{jacobi, sqrt_positive_integer, Cyc, ScalarError};
use crate::mdata::{
    galois_act, verify_axioms, verlinde, MdataError, ModularData, VerifyMode,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::HashSet;

/// Errors from family constructors, lamination detection and grafting.
#[derive(Debug, thiserror::Error)]
pub enum FamilyError {
    #[error("invalid discriminant form: {0}")]
    InvalidForm(String),
    #[error("group order {0} is even; this family needs an odd order")]
    EvenOrder(u64),
    #[error("a nontrivial twist needs a cyclic group")]
    NoncyclicTwist,
    #[error("no Galois unit realises the requested sign pattern: {0}")]
    NoSuchUnit(String),
    #[error("{0} is not Z2-laminated")]
    NotLaminated(String),
    #[error("incompatible graft charges: {0}")]
    IncompatibleCharges(String),
    #[error("grafted fusion number at donor primaries ({0},{1},{2}) would be negative")]
    NegativeFusion(usize, usize, usize),
    #[error(transparent)]
    Mdata(#[from] MdataError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

fn meta_object(pairs: &[(&str, serde_json::Value)]) -> serde_json::Map<String, serde_json::Value> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

/// e^{2πi r} for rational r, exact.
fn exp2pi(r: &BigRational) -> Result<Cyc, FamilyError> {
    let den = r
        .denom()
        .to_i64()
        .and_then(|d| u64::try_from(d).ok())
        .ok_or_else(|| FamilyError::InvalidForm(format!("phase denominator {} too large", r.denom())))?;
    let num = r.numer().mod_floor(r.denom()).to_i64().unwrap_or_default();
    Ok(Cyc::root_of_unity(den, num))
}

/// ξ_order^k + ξ_order^{−k} = 2cos(2πk/order).
fn two_cos(order: u64, k: i64) -> Cyc {
    Cyc::root_of_unity(order, k).add(&Cyc::root_of_unity(order, -k))
}

fn rat(p: i64, q: u64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// All tuples of ∏ Z_{d_i} in lexicographic order (first coordinate most
/// significant); the zero tuple comes first.
fn enumerate_tuples(dims: &[u64]) -> Vec<Vec<u64>> {
    let total: u64 = dims.iter().product();
    let mut out = Vec::with_capacity(total as usize);
    let mut cur = vec![0u64; dims.len()];
    loop {
        out.push(cur.clone());
        let mut pos = dims.len();
        while pos > 0 {
            pos -= 1;
            cur[pos] += 1;
            if cur[pos] < dims[pos] {
                break;
            }
            cur[pos] = 0;
            if pos == 0 {
                return out;
            }
        }
        if dims.is_empty() {
            return out;
        }
    }
}

// ---------------------------------------------------------------------------
// Lattice doubles
// ---------------------------------------------------------------------------

/// The discriminant form of an even positive-definite lattice: the finite
/// abelian group L*/L presented by cyclic generator orders, the quadratic
/// values q(e_i) = e_i·e_i mod 2, the symmetric pairing e_i·e_j mod 1, and
/// the lattice dimension mod 24 (which only enters through T's overall
/// phase e^{−πi n/12}).
#[derive(Clone, Debug)]
pub struct DiscriminantForm {
    pub group: Vec<u64>,
    pub qvals: Vec<BigRational>,
    pub pairing: Vec<Vec<BigRational>>,
    pub dim_mod_24: i64,
}

impl DiscriminantForm {
    pub fn new(
        group: Vec<u64>,
        qvals: Vec<BigRational>,
        pairing: Vec<Vec<BigRational>>,
        dim_mod_24: i64,
    ) -> Result<Self, FamilyError> {
        let form = DiscriminantForm {
            group,
            qvals,
            pairing,
            dim_mod_24,
        };
        form.validate()?;
        Ok(form)
    }

    /// The E₈ lattice: trivial discriminant group, dimension 8.
    pub fn e8() -> Self {
        DiscriminantForm {
            group: vec![],
            qvals: vec![],
            pairing: vec![],
            dim_mod_24: 8,
        }
    }

    /// The A₂ root lattice: Z₃ with q(g) = 2/3, from the Gram matrix
    /// [[2,1],[1,2]] (the dual quotient is generated by a fundamental
    /// weight of norm 2/3).
    pub fn a2() -> Self {
        DiscriminantForm {
            group: vec![3],
            qvals: vec![rat(2, 3)],
            pairing: vec![vec![rat(2, 3)]],
            dim_mod_24: 2,
        }
    }

    /// A₂ ⊕ E₆: Z₃ × Z₃ with q = (2/3, 4/3), a rank-8 even lattice.
    pub fn a2_e6() -> Self {
        DiscriminantForm {
            group: vec![3, 3],
            qvals: vec![rat(2, 3), rat(4, 3)],
            pairing: vec![vec![rat(2, 3), rat(0, 1)], vec![rat(0, 1), rat(1, 3)]],
            dim_mod_24: 8,
        }
    }

    fn validate(&self) -> Result<(), FamilyError> {
        let r = self.group.len();
        if self.qvals.len() != r || self.pairing.len() != r {
            return Err(FamilyError::InvalidForm(
                "generator count mismatch between group, qvals and pairing".into(),
            ));
        }
        if self.group.iter().any(|&d| d == 0) {
            return Err(FamilyError::InvalidForm("zero generator order".into()));
        }
        for (i, row) in self.pairing.iter().enumerate() {
            if row.len() != r {
                return Err(FamilyError::InvalidForm("pairing is not square".into()));
            }
            for (j, bij) in row.iter().enumerate() {
                if *bij != self.pairing[j][i] {
                    return Err(FamilyError::InvalidForm("pairing is not symmetric".into()));
                }
                // well-defined on Z_{d_i}: d_i · (e_i·e_j) ∈ Z
                let scaled = bij * BigRational::from_integer(BigInt::from(self.group[i]));
                if !scaled.is_integer() {
                    return Err(FamilyError::InvalidForm(format!(
                        "pairing entry ({i},{j}) is not defined modulo the generator orders"
                    )));
                }
            }
        }
        for (i, q) in self.qvals.iter().enumerate() {
            // q(e_i) ≡ e_i·e_i mod 1 ties the quadratic lift to the pairing
            if !(q - &self.pairing[i][i]).is_integer() {
                return Err(FamilyError::InvalidForm(format!(
                    "qvals[{i}] does not lift pairing[{i}][{i}]"
                )));
            }
            // q(d_i e_i) = d_i² q(e_i) must vanish mod 2
            let d2 = BigRational::from_integer(BigInt::from(self.group[i] * self.group[i]));
            if !(q * d2 / BigRational::from_integer(BigInt::from(2))).is_integer() {
                return Err(FamilyError::InvalidForm(format!(
                    "qvals[{i}] is not defined modulo 2 on Z_{}",
                    self.group[i]
                )));
            }
        }
        Ok(())
    }

    /// u·v mod 1.
    fn pair(&self, u: &[u64], v: &[u64]) -> BigRational {
        let mut acc = BigRational::zero();
        for i in 0..u.len() {
            for j in 0..v.len() {
                acc += &self.pairing[i][j] * BigRational::from_integer(BigInt::from(u[i] * v[j]));
            }
        }
        rational_mod(acc, 1)
    }

    /// q(u) = u·u mod 2, via q(Σ uᵢeᵢ) = Σ uᵢ² q(eᵢ) + 2 Σ_{i<j} uᵢuⱼ eᵢ·eⱼ.
    fn q(&self, u: &[u64]) -> BigRational {
        let mut acc = BigRational::zero();
        for i in 0..u.len() {
            acc += &self.qvals[i] * BigRational::from_integer(BigInt::from(u[i] * u[i]));
            for j in i + 1..u.len() {
                acc += &self.pairing[i][j]
                    * BigRational::from_integer(BigInt::from(2 * u[i] * u[j]));
            }
        }
        rational_mod(acc, 2)
    }
}

fn rational_mod(r: BigRational, modulus: i64) -> BigRational {
    let m = BigRational::from_integer(BigInt::from(modulus));
    let f = (&r / &m).floor();
    r - f * m
}

/// Modular data of the discriminant double of an even lattice:
/// S_{[u],[v]} = |L*/L|^{−1/2} e^{−2πi u·v}, T_{[u]} = e^{πi u·u − πi n/12}.
pub fn lattice_double(form: &DiscriminantForm) -> Result<ModularData, FamilyError> {
    form.validate()?;
    let elems = enumerate_tuples(&form.group);
    let n = elems.len();
    let order: u64 = form.group.iter().product();
    let inv_sqrt = sqrt_positive_integer(order.max(1)).invert()?;
    let mut s = vec![vec![Cyc::zero(1); n]; n];
    for i in 0..n {
        for j in i..n {
            let phase = rational_mod(-form.pair(&elems[i], &elems[j]), 1);
            let v = inv_sqrt.mul(&exp2pi(&phase)?);
            s[i][j] = v.clone();
            s[j][i] = v;
        }
    }
    let shift = rat(-form.dim_mod_24.rem_euclid(24), 24);
    let mut t = Vec::with_capacity(n);
    for u in &elems {
        let phase = form.q(u) / BigRational::from_integer(BigInt::from(2)) + &shift;
        t.push(exp2pi(&rational_mod(phase, 1))?);
    }
    let labels: Vec<String> = elems
        .iter()
        .map(|u| {
            let coords: Vec<String> = u.iter().map(|c| c.to_string()).collect();
            format!("[{}]", coords.join(","))
        })
        .collect();
    let meta = meta_object(&[
        ("family", "lattice_double".into()),
        ("group", serde_json::json!(form.group)),
        ("dim_mod_24", serde_json::json!(form.dim_mod_24)),
    ]);
    Ok(ModularData::new(labels, 0, s, t, meta)?)
}

// ---------------------------------------------------------------------------
// Cyclic doubles
// ---------------------------------------------------------------------------

/// Twisted quantum double of Z_ν, ν odd, with twist ω mod ν.  Primaries are
/// pairs (a,b) ∈ Z_ν² ordered lexicographically,
///
///   T_{(a,b)}      = e^{2πi (ωa² + νab)/ν²},
///   S_{(a,b),(a′,b′)} = ν^{−1} e^{−2πi (ν(ab′+a′b) + 2ωaa′)/ν²},
///
/// the S entries coming from the 1-cochains ε_a(g) = e^{2πi ω a g/ν²} that
/// trivialise the cocycle restricted to each centraliser (the axiom suite
/// re-checks this choice rather than trusting it).
pub fn cyclic_double(nu: u64, omega: i64) -> Result<ModularData, FamilyError> {
    if nu == 0 || nu % 2 == 0 {
        return Err(FamilyError::EvenOrder(nu));
    }
    let om = omega.rem_euclid(nu as i64);
    let nsq = nu * nu;
    let count = (nu * nu) as usize;
    let pairs: Vec<(i64, i64)> = (0..nu as i64)
        .flat_map(|a| (0..nu as i64).map(move |b| (a, b)))
        .collect();
    let inv_nu = rat(1, nu);
    let mut s = vec![vec![Cyc::zero(1); count]; count];
    let mut t = Vec::with_capacity(count);
    for (i, &(a, b)) in pairs.iter().enumerate() {
        t.push(Cyc::root_of_unity(nsq, om * a * a + nu as i64 * a * b));
        for (j, &(a2, b2)) in pairs.iter().enumerate() {
            let e = -(nu as i64 * (a * b2 + a2 * b) + 2 * om * a * a2);
            s[i][j] = Cyc::root_of_unity(nsq, e).scale(&inv_nu);
        }
    }
    let labels: Vec<String> = pairs.iter().map(|(a, b)| format!("({a},{b})")).collect();
    let meta = meta_object(&[
        ("family", "cyclic_double".into()),
        ("nu", serde_json::json!(nu)),
        ("omega", serde_json::json!(om)),
    ]);
    Ok(ModularData::new(labels, 0, s, t, meta)?)
}

// ---------------------------------------------------------------------------
// Dihedral doubles
// ---------------------------------------------------------------------------

/// The Z₂ part of the dihedral twist group Z₂ × Z_ν.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Twisted quantum double of the dihedral group D_ν, ν = 2n+1 odd, with
/// twist (s, ω) ∈ Z₂ × Z_ν.  Primaries in order (0, 𝔟; 𝔞₁…𝔞_n;
/// 𝔠_{1,0}…𝔠_{n,ν−1}; 𝔡₁, 𝔡₂):
///
/// ```text
///   T = diag(1, 1; 1…1; e^{2πi(ωh²+νhj)/ν²}; t, −t),   t = 1 or i per s,
///   νS row blocks: [½ ½ | 1 | 1 | ±ν/2], [1 | 2 | D | 0], [1 | Dᵀ | E | 0],
///                  [±ν/2 | 0 | 0 | sν·F]
/// ```
///
/// with D_{i,(h,j)} = 2cos(2πih/ν), E_{(h,j),(h′,j′)} =
/// 2cos(2π(2ωhh′+νhj′+νh′j)/ν²), and F = ½[[1,−1],[−1,1]].
pub fn dihedral_double(nu: u64, s: Sign, omega: i64) -> Result<ModularData, FamilyError> {
    if nu == 0 || nu % 2 == 0 {
        return Err(FamilyError::EvenOrder(nu));
    }
    let om = omega.rem_euclid(nu as i64);
    let n = ((nu - 1) / 2) as usize;
    let nsq = nu * nu;
    let count = 2 + n + n * nu as usize + 2;
    let c_base = 2 + n;
    let d_base = c_base + n * nu as usize;
    let inv_nu = rat(1, nu);
    let mut labels = vec!["0".to_string(), "b".to_string()];
    labels.extend((1..=n).map(|i| format!("a{i}")));
    for h in 1..=n {
        labels.extend((0..nu).map(|j| format!("c{h},{j}")));
    }
    labels.push("d1".into());
    labels.push("d2".into());

    let mut t = vec![Cyc::one(); 2 + n];
    for h in 1..=n as i64 {
        for j in 0..nu as i64 {
            t.push(Cyc::root_of_unity(nsq, om * h * h + nu as i64 * h * j));
        }
    }
    let tphase = match s {
        Sign::Plus => Cyc::one(),
        Sign::Minus => Cyc::root_of_unity(4, 1),
    };
    t.push(tphase.clone());
    t.push(tphase.neg());

    let mut m = vec![vec![Cyc::zero(1); count]; count];
    let put = |mat: &mut Vec<Vec<Cyc>>, i: usize, j: usize, v: Cyc| {
        mat[i][j] = v.clone();
        mat[j][i] = v;
    };
    let half = Cyc::from_rational(rat(1, 2 * nu));
    let one_over_nu = Cyc::from_rational(inv_nu.clone());
    for i in 0..2 {
        for j in i..2 {
            put(&mut m, i, j, half.clone());
        }
        for k in 2..d_base {
            put(&mut m, i, k, one_over_nu.clone());
        }
        // ±ν/2 entries: (1/ν)·(ν/2) = 1/2, sign − on the 𝔟 row
        let v = Cyc::from_rational(rat(if i == 0 { 1 } else { -1 }, 2));
        put(&mut m, i, d_base, v.clone());
        put(&mut m, i, d_base + 1, v);
    }
    let two_over_nu = Cyc::from_rational(rat(2, nu));
    for i in 2..2 + n {
        for j in i..2 + n {
            put(&mut m, i, j, two_over_nu.clone());
        }
        let ai = (i - 1) as i64;
        for h in 1..=n as i64 {
            for j in 0..nu as i64 {
                let col = c_base + ((h - 1) as usize) * nu as usize + j as usize;
                put(&mut m, i, col, two_cos(nu, ai * h).scale(&inv_nu));
            }
        }
    }
    for h in 1..=n as i64 {
        for j in 0..nu as i64 {
            let row = c_base + ((h - 1) as usize) * nu as usize + j as usize;
            for h2 in 1..=n as i64 {
                for j2 in 0..nu as i64 {
                    let col = c_base + ((h2 - 1) as usize) * nu as usize + j2 as usize;
                    if col < row {
                        continue;
                    }
                    let e = 2 * om * h * h2 + nu as i64 * (h * j2 + h2 * j);
                    put(&mut m, row, col, two_cos(nsq, e).scale(&inv_nu));
                }
            }
        }
    }
    let sgn = match s {
        Sign::Plus => 1,
        Sign::Minus => -1,
    };
    let f_diag = Cyc::from_rational(rat(sgn, 2));
    let f_off = Cyc::from_rational(rat(-sgn, 2));
    put(&mut m, d_base, d_base, f_diag.clone());
    put(&mut m, d_base + 1, d_base + 1, f_diag);
    put(&mut m, d_base, d_base + 1, f_off);

    let meta = meta_object(&[
        ("family", "dihedral_double".into()),
        ("nu", serde_json::json!(nu)),
        ("sign", serde_json::json!(s.to_string())),
        ("omega", serde_json::json!(om)),
    ]);
    Ok(ModularData::new(labels, 0, m, t, meta)?)
}

// ---------------------------------------------------------------------------
// Affine so(2m+1) level 2
// ---------------------------------------------------------------------------

/// Affine so(2m+1) at level 2 (m ≥ 2), central charge 2m, μ = 2m+1.
/// Primaries (0, 𝔟; 𝔞₁, 𝔞₂; 𝔡₁…𝔡_m) with
///
///   T = ξ₁₂^{−m} diag(1, 1; ξ₈^m, −ξ₈^m; ξ_μ^{ml²}),
///   S = [[x/2, B, x], [Bᵀ, F, 0], [x, 0, H]],
///
/// where x = 1/√μ, B = ½[[1,1],[−1,−1]], F = ½[[1,−1],[−1,1]], and
/// H_{l,l′} = 2x cos(2πll′/μ).
pub fn so_level2(m: u64) -> Result<ModularData, FamilyError> {
    if m < 2 {
        return Err(FamilyError::InvalidForm(format!(
            "so(2m+1) level 2 needs m >= 2, got {m}"
        )));
    }
    let mu = 2 * m + 1;
    let count = (m + 4) as usize;
    let x = sqrt_positive_integer(mu).invert()?;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let prefactor = Cyc::root_of_unity(12, -(m as i64));
    let mut t = vec![
        prefactor.clone(),
        prefactor.clone(),
        prefactor.mul(&Cyc::root_of_unity(8, m as i64)),
        prefactor.mul(&Cyc::root_of_unity(8, m as i64)).neg(),
    ];
    for l in 1..=m as i64 {
        t.push(prefactor.mul(&Cyc::root_of_unity(mu, m as i64 * l * l)));
    }
    let mut s = vec![vec![Cyc::zero(1); count]; count];
    let put = |mat: &mut Vec<Vec<Cyc>>, i: usize, j: usize, v: Cyc| {
        mat[i][j] = v.clone();
        mat[j][i] = v;
    };
    let xh = x.scale(&half);
    for i in 0..2 {
        for j in i..2 {
            put(&mut s, i, j, xh.clone());
        }
        let sgn = if i == 0 { 1 } else { -1 };
        put(&mut s, i, 2, Cyc::from_rational(rat(sgn, 2)));
        put(&mut s, i, 3, Cyc::from_rational(rat(sgn, 2)));
        for l in 1..=m {
            put(&mut s, i, 3 + l as usize, x.clone());
        }
    }
    put(&mut s, 2, 2, Cyc::from_rational(rat(1, 2)));
    put(&mut s, 3, 3, Cyc::from_rational(rat(1, 2)));
    put(&mut s, 2, 3, Cyc::from_rational(rat(-1, 2)));
    for l in 1..=m as i64 {
        for l2 in l..=m as i64 {
            put(
                &mut s,
                3 + l as usize,
                3 + l2 as usize,
                x.mul(&two_cos(mu, l * l2)),
            );
        }
    }
    let mut labels = vec!["0".into(), "b".into(), "a1".into(), "a2".into()];
    labels.extend((1..=m).map(|l| format!("d{l}")));
    let meta = meta_object(&[
        ("family", "so_level2".into()),
        ("m", serde_json::json!(m)),
        ("mu", serde_json::json!(mu)),
    ]);
    Ok(ModularData::new(labels, 0, s, t, meta)?)
}

// ---------------------------------------------------------------------------
// Haagerup–Izumi series
// ---------------------------------------------------------------------------

/// Haagerup–Izumi modular data for an odd abelian group K (given by its
/// cyclic factor orders) and twist ω mod ν, ν = |K|.  Writing n = (ν−1)/2,
/// m = (ν²+3)/2, μ = ν²+4 and y = ν/√μ, the primaries in order
/// (0, 𝔟; 𝔞₁…𝔞_n; 𝔠_{1,0}…𝔠_{n,ν−1}; 𝔡₁…𝔡_m) carry
///
/// ```text
///   T = diag(1, 1; 1…1; e^{2πi(ωh²+νhj)/ν²}; e^{2πi l²m/μ}),
///   νS = ⎛ A       1    1    B′ ⎞      A  = ½[[1−y, 1+y], [1+y, 1−y]],
///        ⎜ 1       2    D    0  ⎟      B′ = y[[1…1], [−1…−1]],
///        ⎜ 1       Dᵀ   E    0  ⎟      νH_{l,l′} = 2y cos(2πll′/μ),
///        ⎝ B′ᵀ     0    0   −νH ⎠
/// ```
///
/// with the same D and E cosine blocks as the dihedral double.  The 𝔞 labels
/// run over the inversion pairs {k,−k} of K (lexicographically smallest
/// representatives), the 𝔠 labels over such a pair index together with a
/// character of K; for noncyclic K (which forces ω = 0) the cosines are the
/// real parts of the corresponding character evaluations.
pub fn haagerup_izumi(k_orders: &[u64], omega: i64) -> Result<ModularData, FamilyError> {
    if k_orders.iter().any(|&d| d == 0) {
        return Err(FamilyError::InvalidForm("zero cyclic order".into()));
    }
    let nu: u64 = k_orders.iter().product();
    if nu % 2 == 0 {
        return Err(FamilyError::EvenOrder(nu));
    }
    let om = omega.rem_euclid(nu as i64);
    let cyclic = k_orders.iter().filter(|&&d| d > 1).count() <= 1;
    if !cyclic && om != 0 {
        return Err(FamilyError::NoncyclicTwist);
    }
    let n = ((nu - 1) / 2) as usize;
    let m = (nu * nu + 3) / 2;
    let mu = nu * nu + 4;
    let nsq = nu * nu;

    let elems = enumerate_tuples(k_orders);
    let zero = vec![0u64; k_orders.len()];
    let neg = |e: &[u64]| -> Vec<u64> {
        e.iter()
            .zip(k_orders)
            .map(|(&x, &d)| (d - x) % d)
            .collect()
    };
    let mut reps: Vec<Vec<u64>> = Vec::with_capacity(n);
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    for e in &elems {
        if *e == zero || seen.contains(e) {
            continue;
        }
        seen.insert(e.clone());
        seen.insert(neg(e));
        reps.push(e.clone());
    }
    debug_assert_eq!(reps.len(), n);

    // χ_j(h) = e^{2πi Σ_c j_c h_c / d_c}
    let chi = |j: &[u64], h: &[u64]| -> Result<Cyc, FamilyError> {
        let mut phase = BigRational::zero();
        for ((&jc, &hc), &dc) in j.iter().zip(h).zip(k_orders) {
            phase += rat((jc * hc) as i64, dc);
        }
        exp2pi(&rational_mod(phase, 1))
    };
    // the integer representing a rep inside the single nontrivial factor
    let cyc_coord = k_orders.iter().position(|&d| d > 1);
    let h_int = |e: &[u64]| -> i64 { cyc_coord.map_or(0, |c| e[c] as i64) };

    let c_base = 2 + n;
    let d_base = c_base + n * nu as usize;
    let count = d_base + m as usize;

    let sqrt_mu_inv = sqrt_positive_integer(mu).invert()?;
    let y = sqrt_mu_inv.scale(&rat(nu as i64, 1));
    let inv_nu = rat(1, nu);
    let inv_2nu = rat(1, 2 * nu);
    let one = Cyc::one();

    let mut t = vec![one.clone(); c_base];
    for (hi, h) in reps.iter().enumerate() {
        for (ji, j) in elems.iter().enumerate() {
            let val = if cyclic {
                let hh = h_int(h);
                Cyc::root_of_unity(nsq, om * hh * hh + nu as i64 * hh * ji as i64)
            } else {
                chi(j, h)?
            };
            debug_assert_eq!(c_base + hi * nu as usize + ji, t.len());
            t.push(val);
        }
    }
    for l in 1..=m as i64 {
        t.push(Cyc::root_of_unity(mu, m as i64 * l * l));
    }

    let mut s = vec![vec![Cyc::zero(1); count]; count];
    let put = |mat: &mut Vec<Vec<Cyc>>, i: usize, j: usize, v: Cyc| {
        mat[i][j] = v.clone();
        mat[j][i] = v;
    };
    let s00 = one.sub(&y).scale(&inv_2nu);
    let s0b = one.add(&y).scale(&inv_2nu);
    put(&mut s, 0, 0, s00.clone());
    put(&mut s, 1, 1, s00);
    put(&mut s, 0, 1, s0b);
    let one_over_nu = Cyc::from_rational(inv_nu.clone());
    for i in 0..2 {
        for k in 2..d_base {
            put(&mut s, i, k, one_over_nu.clone());
        }
        // B′ entries: (1/ν)·(±y) = ±1/√μ
        let v = if i == 0 {
            sqrt_mu_inv.clone()
        } else {
            sqrt_mu_inv.neg()
        };
        for l in 0..m as usize {
            put(&mut s, i, d_base + l, v.clone());
        }
    }
    let two_over_nu = Cyc::from_rational(rat(2, nu));
    for i in 2..2 + n {
        for j in i..2 + n {
            put(&mut s, i, j, two_over_nu.clone());
        }
    }
    for (ai, arep) in reps.iter().enumerate() {
        for (hi, h) in reps.iter().enumerate() {
            for ji in 0..nu as usize {
                let col = c_base + hi * nu as usize + ji;
                let val = if cyclic {
                    two_cos(nu, h_int(arep) * h_int(h))
                } else {
                    let z = chi(arep, h)?;
                    z.add(&z.conjugate())
                };
                put(&mut s, 2 + ai, col, val.scale(&inv_nu));
            }
        }
    }
    for (hi, h) in reps.iter().enumerate() {
        for (ji, j) in elems.iter().enumerate() {
            let row = c_base + hi * nu as usize + ji;
            for (hi2, h2) in reps.iter().enumerate() {
                for (ji2, j2) in elems.iter().enumerate() {
                    let col = c_base + hi2 * nu as usize + ji2;
                    if col < row {
                        continue;
                    }
                    let val = if cyclic {
                        let e = 2 * om * h_int(h) * h_int(h2)
                            + nu as i64 * (h_int(h) * ji2 as i64 + h_int(h2) * ji as i64);
                        two_cos(nsq, e)
                    } else {
                        let z = chi(j2, h)?.mul(&chi(j, h2)?);
                        z.add(&z.conjugate())
                    };
                    put(&mut s, row, col, val.scale(&inv_nu));
                }
            }
        }
    }
    for l in 1..=m as i64 {
        for l2 in l..=m as i64 {
            let val = sqrt_mu_inv.mul(&two_cos(mu, l * l2)).neg();
            put(
                &mut s,
                d_base + l as usize - 1,
                d_base + l2 as usize - 1,
                val,
            );
        }
    }

    let mut labels = vec!["0".to_string(), "b".to_string()];
    labels.extend((1..=n).map(|i| format!("a{i}")));
    for hi in 1..=n {
        labels.extend((0..nu).map(|ji| format!("c{hi},{ji}")));
    }
    labels.extend((1..=m).map(|l| format!("d{l}")));
    let meta = meta_object(&[
        ("family", "haagerup_izumi".into()),
        ("k", serde_json::json!(k_orders)),
        ("nu", serde_json::json!(nu)),
        ("omega", serde_json::json!(om)),
        ("mu", serde_json::json!(mu)),
    ]);
    Ok(ModularData::new(labels, 0, s, t, meta)?)
}

/// The closed-form fusion number N_{i,j,k} of `haagerup_izumi(&[ν], ω)` in
/// the fixed primary order (charge conjugation is trivial, so the tensor is
/// totally symmetric).  Away from the vacuum every number is 1 except:
/// N(𝔟,𝔞ᵢ,𝔞ᵢ) = N(𝔟,𝔠,𝔠) = 2, N(𝔟,𝔡,𝔡) = 0, the 𝔞/𝔠 sign-pattern doublings,
/// and N(𝔡_l,𝔡_{l′},𝔡_{l″}) = 0 when l″ ≡ ±l±l′ mod μ.
pub fn hg_fusion_closed_form(nu: u64, omega: i64, i: usize, j: usize, k: usize) -> u32 {
    #[derive(PartialOrd, Ord, PartialEq, Eq, Clone, Copy)]
    enum Cls {
        A(i64),
        B,
        C(i64, i64),
        D(i64),
    }
    let n = ((nu - 1) / 2) as usize;
    let m = (nu * nu + 3) / 2;
    let mu = (nu * nu + 4) as i64;
    let om = omega.rem_euclid(nu as i64);
    let nu = nu as i64;
    if i == 0 || j == 0 || k == 0 {
        let (p, q) = if i == 0 { (j, k) } else if j == 0 { (i, k) } else { (i, j) };
        return u32::from(p == q);
    }
    let cls = |x: usize| -> Cls {
        if x == 1 {
            Cls::B
        } else if x < 2 + n {
            Cls::A((x - 1) as i64)
        } else if x < 2 + n + n * nu as usize {
            let off = (x - 2 - n) as i64;
            Cls::C(off / nu + 1, off % nu)
        } else {
            Cls::D((x - 1 - n - n * nu as usize) as i64)
        }
    };
    debug_assert!(k < 2 + n + n * nu as usize + m as usize);
    let mut t = [cls(i), cls(j), cls(k)];
    t.sort();
    let signs = [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)];
    match t {
        [Cls::A(i1), Cls::A(i2), Cls::B] => 1 + u32::from(i1 == i2),
        [Cls::B, Cls::C(h1, j1), Cls::C(h2, j2)] => 1 + u32::from((h1, j1) == (h2, j2)),
        [Cls::B, Cls::D(l1), Cls::D(l2)] => u32::from(l1 != l2),
        [Cls::A(i1), Cls::A(i2), Cls::A(i3)] => {
            let double = signs
                .iter()
                .any(|&(s1, s2)| (s1 * i1 + s2 * i2 - i3).rem_euclid(nu) == 0);
            1 + u32::from(double)
        }
        [Cls::A(i1), Cls::C(h1, j1), Cls::C(h2, j2)] => {
            let double =
                h1 == h2 && [1, -1].iter().any(|&s| (s * i1 - (j1 - j2)).rem_euclid(nu) == 0);
            1 + u32::from(double)
        }
        [Cls::C(h1, j1), Cls::C(h2, j2), Cls::C(h3, j3)] => {
            let double = signs.iter().any(|&(s1, s2)| {
                let h = s1 * h1 + s2 * h2 - h3;
                h.rem_euclid(nu) == 0
                    && (s1 * j1 + s2 * j2 + 2 * om * (h / nu) - j3).rem_euclid(nu) == 0
            });
            1 + u32::from(double)
        }
        [Cls::D(l1), Cls::D(l2), Cls::D(l3)] => {
            let zero = signs
                .iter()
                .any(|&(s1, s2)| (s1 * l1 + s2 * l2 - l3).rem_euclid(mu) == 0);
            u32::from(!zero)
        }
        _ => 1,
    }
}

// ---------------------------------------------------------------------------
// Galois twists of the Haagerup–Izumi series
// ---------------------------------------------------------------------------

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = vec![];
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// The smallest `count` units ℓ ≡ 1 mod ν² whose Legendre symbol mod p is
/// −1 exactly for the primes p ∈ P dividing μ = ν²+4.  Requires |P| even
/// (counted with odd multiplicity in μ) so that the entrywise Galois map
/// σ_ℓ fixes √μ and keeps the data unitary.
pub fn galois_units(nu: u64, p_set: &[u64], count: usize) -> Result<Vec<u64>, FamilyError> {
    let mu = nu * nu + 4;
    let factors = factorize(mu);
    let mut p_sorted: Vec<u64> = p_set.to_vec();
    p_sorted.sort_unstable();
    p_sorted.dedup();
    if p_sorted.len() != p_set.len() {
        return Err(FamilyError::NoSuchUnit("repeated primes in P".into()));
    }
    for &p in &p_sorted {
        if !factors.iter().any(|&(q, _)| q == p) {
            return Err(FamilyError::NoSuchUnit(format!("{p} does not divide {mu}")));
        }
    }
    if p_sorted.len() % 2 != 0 {
        return Err(FamilyError::NoSuchUnit(
            "an odd number of sign flips would negate the square root".into(),
        ));
    }
    let odd_flips = factors
        .iter()
        .filter(|&&(p, e)| e % 2 == 1 && p_sorted.contains(&p))
        .count();
    if odd_flips % 2 != 0 {
        return Err(FamilyError::NoSuchUnit(
            "sign flips at odd-multiplicity primes must pair up".into(),
        ));
    }
    let nsq = nu * nu;
    let modulus = nsq * mu;
    let mut out = vec![];
    let mut ell = 1u64;
    while ell < modulus && out.len() < count {
        if ell.gcd(&mu) == 1 {
            let good = factors.iter().all(|&(p, _)| {
                let want = if p_sorted.contains(&p) { -1 } else { 1 };
                jacobi(ell as i64, p) == want
            });
            if good {
                out.push(ell);
            }
        }
        ell += nsq;
    }
    if out.len() < count {
        return Err(FamilyError::NoSuchUnit(format!(
            "only {} of {count} units below {modulus}",
            out.len()
        )));
    }
    Ok(out)
}

/// Entrywise Galois twist of `haagerup_izumi(&[ν], ω)` by σ_{ℓ_P} for the
/// smallest admissible unit ℓ_P.  The result keeps the fusion ring of the
/// untwisted datum; for nonempty P it lands in a different equivalence
/// class (and for P = ∅ it is the datum itself).
pub fn galois_twist_hg(nu: u64, omega: i64, p_set: &[u64]) -> Result<ModularData, FamilyError> {
    let hg = haagerup_izumi(&[nu], omega)?;
    let ell = galois_units(nu, p_set, 1)?[0];
    let (mut out, action) = galois_act(&hg, ell % hg.order)?;
    if out
        .meta
        .get("unitary")
        .and_then(|v| v.as_bool())
        != Some(true)
    {
        return Err(FamilyError::NoSuchUnit(format!(
            "unit {ell} flips the sign of the vacuum row"
        )));
    }
    debug_assert_eq!(action.ell, ell % hg.order);
    out.meta.insert("family".into(), "galois_twist_hg".into());
    out.meta.insert("nu".into(), serde_json::json!(nu));
    out.meta
        .insert("omega".into(), serde_json::json!(omega.rem_euclid(nu as i64)));
    out.meta.insert("p_set".into(), serde_json::json!(p_set));
    out.meta.insert("ell".into(), serde_json::json!(ell));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Z₂-lamination and grafting
// ---------------------------------------------------------------------------

/// The block decomposition of a Z₂-laminated modular datum, together with
/// the arithmetic invariants M, L, N: 2x = 1/√M, the rescaled 𝔞-row
/// a⃗/x = 2^L·(odd primitive vector), and 2√(M/N)·d⃗ primitive integral.
#[derive(Clone, Debug)]
pub struct LaminationBlocks {
    /// Index of the simple current 𝔟 (S_{0,𝔟} = S_{0,0}, T_𝔟 = T_0).
    pub b: usize,
    /// Primaries with S_{𝔟,i} = +S_{0,i}.
    pub a_idx: Vec<usize>,
    /// Primaries with S_{𝔟,i} = −S_{0,i}.
    pub d_idx: Vec<usize>,
    /// x = S_{0,0}.
    pub x: Cyc,
    /// r = T_{0,0}.
    pub r: Cyc,
    pub a_row: Vec<Cyc>,
    pub d_row: Vec<Cyc>,
    pub a_block: Vec<Vec<Cyc>>,
    pub d_block: Vec<Vec<Cyc>>,
    pub t_a: Vec<Cyc>,
    pub t_d: Vec<Cyc>,
    pub m_int: u64,
    pub l_exp: u32,
    pub n_int: u64,
    /// a⃗/x, positive integers with gcd 2^L.
    pub a_dims: Vec<u64>,
    /// The primitive integral rescaling of d⃗.
    pub d_prim: Vec<u64>,
}

fn lamination_candidate(md: &ModularData, b: usize) -> Option<LaminationBlocks> {
    let v = md.vacuum;
    let n = md.dim();
    if md.t[b] != md.t[v] || md.s[v][b] != md.s[v][v] || md.s[b][b] != md.s[v][v] {
        return None;
    }
    let mut a_idx = vec![];
    let mut d_idx = vec![];
    for j in 0..n {
        if j == v || j == b {
            continue;
        }
        if md.s[b][j] == md.s[v][j] {
            a_idx.push(j);
        } else if md.s[b][j] == md.s[v][j].neg() {
            d_idx.push(j);
        } else {
            return None;
        }
    }
    if d_idx.is_empty() {
        return None;
    }
    for &i in &a_idx {
        for &k in &d_idx {
            if !md.s[i][k].is_zero() {
                return None;
            }
        }
    }
    let x = md.s[v][v].clone();
    let two_x = x.add(&x);
    let m_rat = two_x.mul(&two_x).invert().ok()?.as_rational()?;
    if !m_rat.is_integer() || !m_rat.is_positive() {
        return None;
    }
    let m_int = m_rat.to_integer().to_u64()?;
    let x_inv = x.invert().ok()?;
    let mut a_dims = Vec::with_capacity(a_idx.len());
    for &i in &a_idx {
        let w = md.s[v][i].mul(&x_inv).as_rational()?;
        if !w.is_integer() || !w.is_positive() {
            return None;
        }
        a_dims.push(w.to_integer().to_u64()?);
    }
    let l_exp = if a_dims.is_empty() {
        (4 * m_int).trailing_zeros() / 2
    } else {
        let g = a_dims.iter().fold(0u64, |acc, &w| acc.gcd(&w));
        if !g.is_power_of_two() {
            return None;
        }
        g.trailing_zeros()
    };
    if (4 * m_int) % 4u64.pow(l_exp) != 0 {
        return None;
    }
    // primitive integral vector proportional to d⃗
    let d0_inv = md.s[v][d_idx[0]].invert().ok()?;
    let mut num = Vec::with_capacity(d_idx.len());
    let mut den_lcm = BigInt::one();
    for &k in &d_idx {
        let r = md.s[v][k].mul(&d0_inv).as_rational()?;
        if !r.is_positive() {
            return None;
        }
        den_lcm = den_lcm.lcm(r.denom());
        num.push(r);
    }
    let ints: Vec<BigInt> = num
        .iter()
        .map(|r| (r * BigRational::from_integer(den_lcm.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    let d_prim: Vec<u64> = ints.iter().map(|v| (v / &g).to_u64()).collect::<Option<_>>()?;
    let gamma2 = 2 * d_prim.iter().map(|&v| v * v).sum::<u64>();
    if gamma2 == 0 || (4 * m_int) % gamma2 != 0 {
        return None;
    }
    let n_int = 4 * m_int / gamma2;
    Some(LaminationBlocks {
        b,
        x,
        r: md.t[v].clone(),
        a_row: a_idx.iter().map(|&i| md.s[v][i].clone()).collect(),
        d_row: d_idx.iter().map(|&i| md.s[v][i].clone()).collect(),
        a_block: a_idx
            .iter()
            .map(|&i| a_idx.iter().map(|&j| md.s[i][j].clone()).collect())
            .collect(),
        d_block: d_idx
            .iter()
            .map(|&i| d_idx.iter().map(|&j| md.s[i][j].clone()).collect())
            .collect(),
        t_a: a_idx.iter().map(|&i| md.t[i].clone()).collect(),
        t_d: d_idx.iter().map(|&i| md.t[i].clone()).collect(),
        a_idx,
        d_idx,
        m_int,
        l_exp,
        n_int,
        a_dims,
        d_prim,
    })
}

/// Decide whether a unitary modular datum with real S is Z₂-laminated, and
/// if so return its block split and the invariants M, L, N.
pub fn detect_lamination(md: &ModularData) -> Option<LaminationBlocks> {
    let v = md.vacuum;
    for row in &md.s {
        for e in row {
            if !e.is_real() {
                return None;
            }
        }
    }
    for j in 0..md.dim() {
        if md.s[v][j].real_sign() != Ordering::Greater {
            return None;
        }
    }
    (0..md.dim())
        .filter(|&b| b != v)
        .find_map(|b| lamination_candidate(md, b))
}

/// Graft the 𝔡-slot of `donor` onto `base`.  Both inputs must be
/// Z₂-laminated.  When x = x′ and r = r′ the donor's (d⃗′, D′, t⃗′) replaces
/// the base's verbatim; when x > x′ and r = −r′ζ for a third root of unity
/// ζ, the donor's 𝔞-slot moves into the 𝔡-slot with negated block, the
/// vacuum square becomes [[x−x′, x+x′], [x+x′, x−x′]], and t⃗ becomes −ζt⃗′.
/// The second form needs M′ − M = 4, L > 0, L′ > 0 and the donor's 𝔞-fusion
/// numbers bounded by w′w′w′/8, and the output is re-verified exactly.
pub fn graft(base: &ModularData, donor: &ModularData) -> Result<ModularData, FamilyError> {
    let lb = detect_lamination(base).ok_or_else(|| FamilyError::NotLaminated("base".into()))?;
    let ld = detect_lamination(donor).ok_or_else(|| FamilyError::NotLaminated("donor".into()))?;
    let p = lb.a_idx.len();

    let assemble = |x_diag: Cyc,
                    x_off: Cyc,
                    d_row: &[Cyc],
                    d_block: &[Vec<Cyc>],
                    t_d: Vec<Cyc>,
                    d_labels: Vec<String>,
                    case: &str|
     -> Result<ModularData, FamilyError> {
        let q = d_row.len();
        let count = 2 + p + q;
        let mut s = vec![vec![Cyc::zero(1); count]; count];
        s[0][0] = x_diag.clone();
        s[1][1] = x_diag;
        s[0][1] = x_off.clone();
        s[1][0] = x_off;
        for (i, ai) in lb.a_row.iter().enumerate() {
            s[0][2 + i] = ai.clone();
            s[2 + i][0] = ai.clone();
            s[1][2 + i] = ai.clone();
            s[2 + i][1] = ai.clone();
        }
        for (k, dk) in d_row.iter().enumerate() {
            s[0][2 + p + k] = dk.clone();
            s[2 + p + k][0] = dk.clone();
            s[1][2 + p + k] = dk.neg();
            s[2 + p + k][1] = dk.neg();
        }
        for i in 0..p {
            for j in 0..p {
                s[2 + i][2 + j] = lb.a_block[i][j].clone();
            }
        }
        for i in 0..q {
            for j in 0..q {
                s[2 + p + i][2 + p + j] = d_block[i][j].clone();
            }
        }
        let mut t = vec![lb.r.clone(), lb.r.clone()];
        t.extend(lb.t_a.iter().cloned());
        t.extend(t_d);

        let mut labels = vec![];
        let mut used: HashSet<String> = HashSet::new();
        let mut push = |labels: &mut Vec<String>, mut l: String| {
            while used.contains(&l) {
                l.push('\'');
            }
            used.insert(l.clone());
            labels.push(l);
        };
        push(&mut labels, base.labels[base.vacuum].clone());
        push(&mut labels, base.labels[lb.b].clone());
        for &i in &lb.a_idx {
            push(&mut labels, base.labels[i].clone());
        }
        for l in d_labels {
            push(&mut labels, l);
        }
        let meta = meta_object(&[
            ("family", "graft".into()),
            ("case", case.into()),
            ("base_m", serde_json::json!(lb.m_int)),
            ("donor_m", serde_json::json!(ld.m_int)),
        ]);
        let out = ModularData::new(labels, 0, s, t, meta)?;
        let report = verify_axioms(&out, VerifyMode::Exact)?;
        if !report.passed() || !report.unitary {
            let failing: Vec<String> = report
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.clone())
                .collect();
            return Err(FamilyError::Mdata(MdataError::Inconsistent(format!(
                "grafted datum fails: {}",
                failing.join(", ")
            ))));
        }
        Ok(out)
    };

    if lb.x == ld.x && lb.r == ld.r {
        let d_labels = ld.d_idx.iter().map(|&i| donor.labels[i].clone()).collect();
        return assemble(
            lb.x.clone(),
            lb.x.clone(),
            &ld.d_row,
            &ld.d_block,
            ld.t_d.clone(),
            d_labels,
            "b",
        );
    }

    if lb.x.sub(&ld.x).real_sign() != Ordering::Greater {
        return Err(FamilyError::IncompatibleCharges(
            "need either equal vacuum entries and charges, or a strictly smaller donor vacuum entry"
                .into(),
        ));
    }
    let zeta = (0..3)
        .map(|g| Cyc::root_of_unity(3, g))
        .find(|z| lb.r == ld.r.mul(z).neg())
        .ok_or_else(|| {
            FamilyError::IncompatibleCharges(
                "vacuum T entries do not differ by minus a third root of unity".into(),
            )
        })?;
    let dm = ld.m_int.checked_sub(lb.m_int).unwrap_or(0);
    if dm == 0 || dm % 4 != 0 || 4 % dm != 0 {
        return Err(FamilyError::IncompatibleCharges(format!(
            "4/(M'-M) and (M'-M)/4 must be integers, got M = {}, M' = {}",
            lb.m_int, ld.m_int
        )));
    }
    if lb.l_exp == 0 || ld.l_exp == 0 {
        return Err(FamilyError::IncompatibleCharges(format!(
            "both 2-adic exponents must be positive, got L = {}, L' = {}",
            lb.l_exp, ld.l_exp
        )));
    }
    // Donor 𝔞-fusion bound: the grafted number w′w′w′/(2(M′−M)) − N′ ≥ 0.
    let nt = verlinde(donor)?;
    let q = ld.a_idx.len();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                let hat = ld.a_dims[a] * ld.a_dims[b] * ld.a_dims[c];
                debug_assert_eq!(hat % (2 * dm), 0);
                let have = nt.get(ld.a_idx[a], ld.a_idx[b], ld.a_idx[c]) as u64;
                if hat / (2 * dm) < have {
                    return Err(FamilyError::NegativeFusion(
                        ld.a_idx[a],
                        ld.a_idx[b],
                        ld.a_idx[c],
                    ));
                }
            }
        }
    }
    let x_minus = lb.x.sub(&ld.x);
    let x_plus = lb.x.add(&ld.x);
    let neg_zeta_t: Vec<Cyc> = ld.t_a.iter().map(|t| t.mul(&zeta).neg()).collect();
    let neg_block: Vec<Vec<Cyc>> = ld
        .a_block
        .iter()
        .map(|row| row.iter().map(Cyc::neg).collect())
        .collect();
    let d_labels = ld.a_idx.iter().map(|&i| donor.labels[i].clone()).collect();
    assemble(
        x_minus,
        x_plus,
        &ld.a_row,
        &neg_block,
        neg_zeta_t,
        d_labels,
        "c",
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdata::{equivalent, quantum_profile, verlinde_numeric, FusionTensor};

    fn exact_ok(md: &ModularData) -> bool {
        let report = verify_axioms(md, VerifyMode::Exact).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{}: {} ({})", md.meta["family"], c.name, c.detail);
        }
        report.unitary
    }

    fn int(v: i64) -> Cyc {
        Cyc::from_integer(v)
    }

    #[test]
    fn lattice_e8_is_trivial() {
        let md = lattice_double(&DiscriminantForm::e8()).unwrap();
        assert_eq!(md.dim(), 1);
        assert!(md.s[0][0].is_one());
        assert_eq!(md.t[0], Cyc::root_of_unity(3, 2));
        assert!(exact_ok(&md));
    }

    #[test]
    fn lattice_a2_matches_su3_level1() {
        let md = lattice_double(&DiscriminantForm::a2()).unwrap();
        assert_eq!(md.dim(), 3);
        assert_eq!(md.labels, vec!["[0]", "[1]", "[2]"]);
        let inv_sqrt3 = sqrt_positive_integer(3).invert().unwrap();
        // S = 3^{−1/2} ξ₃^{uv}
        for u in 0..3i64 {
            for v in 0..3i64 {
                assert_eq!(
                    md.s[u as usize][v as usize],
                    inv_sqrt3.mul(&Cyc::root_of_unity(3, u * v))
                );
            }
        }
        let i = Cyc::root_of_unity(4, 1);
        assert_eq!(md.t, vec![Cyc::root_of_unity(12, -1), i.clone(), i]);
        assert!(exact_ok(&md));
        let profile = quantum_profile(&md).unwrap();
        assert_eq!(profile.global_dim, sqrt_positive_integer(3));
        // charge conjugation swaps the two nontrivial classes
        assert_eq!(profile.charge_conjugation, vec![0, 2, 1]);
    }

    #[test]
    fn lattice_a2_e6_has_central_charge_8() {
        let md = lattice_double(&DiscriminantForm::a2_e6()).unwrap();
        assert_eq!(md.dim(), 9);
        assert!(exact_ok(&md));
        let profile = quantum_profile(&md).unwrap();
        assert_eq!(profile.c_mod_24, rat(8, 1));
        assert_eq!(profile.global_dim, int(3));
    }

    #[test]
    fn discriminant_form_polarization_identity() {
        // q(u+v) − q(u) − q(v) ≡ 2 u·v (mod 2)
        let form = DiscriminantForm::a2_e6();
        let elems = enumerate_tuples(&form.group);
        for u in &elems {
            for v in &elems {
                let sum: Vec<u64> = u
                    .iter()
                    .zip(v)
                    .zip(&form.group)
                    .map(|((&a, &b), &d)| (a + b) % d)
                    .collect();
                let lhs = rational_mod(form.q(&sum) - form.q(u) - form.q(v), 2);
                let rhs = rational_mod(form.pair(u, v) * rat(2, 1), 2);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn discriminant_form_rejects_bad_input() {
        // asymmetric pairing
        let bad = DiscriminantForm::new(
            vec![3, 3],
            vec![rat(2, 3), rat(2, 3)],
            vec![vec![rat(2, 3), rat(1, 3)], vec![rat(2, 3), rat(2, 3)]],
            2,
        );
        assert!(matches!(bad, Err(FamilyError::InvalidForm(_))));
        // q does not lift the diagonal of the pairing
        let bad = DiscriminantForm::new(vec![3], vec![rat(4, 3)], vec![vec![rat(2, 3)]], 2);
        assert!(matches!(bad, Err(FamilyError::InvalidForm(_))));
        // pairing not defined modulo the generator order
        let bad = DiscriminantForm::new(vec![3], vec![rat(1, 2)], vec![vec![rat(1, 2)]], 2);
        assert!(matches!(bad, Err(FamilyError::InvalidForm(_))));
    }

    #[test]
    fn cyclic_double_is_modular() {
        for (nu, omega) in [(1, 0), (3, 0), (3, 1), (3, 2), (5, 2)] {
            let md = cyclic_double(nu, omega).unwrap();
            assert_eq!(md.dim(), (nu * nu) as usize);
            assert!(exact_ok(&md));
        }
        assert!(matches!(cyclic_double(4, 0), Err(FamilyError::EvenOrder(4))));
    }

    #[test]
    fn cyclic_double_frozen_entries() {
        let md = cyclic_double(3, 1).unwrap();
        // primary (1,0) sits at index 3; T_{(1,0)} = ξ₉
        assert_eq!(md.labels[3], "(1,0)");
        assert_eq!(md.t[3], Cyc::root_of_unity(9, 1));
        assert_eq!(
            md.s[3][3],
            Cyc::root_of_unity(9, -2).scale(&rat(1, 3))
        );
        // untwisted charge conjugation sends (a,b) to (−a,−b)
        let md0 = cyclic_double(3, 0).unwrap();
        let profile = quantum_profile(&md0).unwrap();
        let idx = |a: u64, b: u64| (a * 3 + b) as usize;
        for a in 0..3u64 {
            for b in 0..3u64 {
                assert_eq!(
                    profile.charge_conjugation[idx(a, b)],
                    idx((3 - a) % 3, (3 - b) % 3)
                );
            }
        }
    }

    /// The dihedral double at ν = 3 is the untwisted double of the symmetric
    /// group on three letters; this 8×8 matrix (times 6) and T vector were
    /// frozen from an independent evaluation of the general finite-group
    /// double (sum over conjugacy classes and centralizer characters).
    #[test]
    fn dihedral_s3_matches_group_double() {
        let md = dihedral_double(3, Sign::Plus, 0).unwrap();
        assert_eq!(
            md.labels,
            vec!["0", "b", "a1", "c1,0", "c1,1", "c1,2", "d1", "d2"]
        );
        let s6: [[i64; 8]; 8] = [
            [1, 1, 2, 2, 2, 2, 3, 3],
            [1, 1, 2, 2, 2, 2, -3, -3],
            [2, 2, 4, -2, -2, -2, 0, 0],
            [2, 2, -2, 4, -2, -2, 0, 0],
            [2, 2, -2, -2, -2, 4, 0, 0],
            [2, 2, -2, -2, 4, -2, 0, 0],
            [3, -3, 0, 0, 0, 0, 3, -3],
            [3, -3, 0, 0, 0, 0, -3, 3],
        ];
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(md.s[i][j].scale(&rat(6, 1)), int(s6[i][j]), "S[{i}][{j}]");
            }
        }
        let xi3 = |k: i64| Cyc::root_of_unity(3, k);
        assert_eq!(
            md.t,
            vec![
                int(1),
                int(1),
                int(1),
                int(1),
                xi3(1),
                xi3(2),
                int(1),
                int(-1)
            ]
        );
        assert!(exact_ok(&md));
    }

    #[test]
    fn dihedral_doubles_are_modular() {
        for nu in [1u64, 3, 5] {
            for s in [Sign::Plus, Sign::Minus] {
                for omega in [0i64, 1] {
                    let md = dihedral_double(nu, s, omega).unwrap();
                    let n = ((nu - 1) / 2) as usize;
                    assert_eq!(md.dim(), 4 + n + n * nu as usize);
                    assert!(exact_ok(&md));
                }
            }
        }
        assert!(matches!(
            dihedral_double(2, Sign::Plus, 0),
            Err(FamilyError::EvenOrder(2))
        ));
    }

    #[test]
    fn dihedral_minus_twist_has_quarter_phases() {
        let md = dihedral_double(3, Sign::Minus, 0).unwrap();
        let i = Cyc::root_of_unity(4, 1);
        assert_eq!(md.t[6], i);
        assert_eq!(md.t[7], i.neg());
    }

    #[test]
    fn dihedral_twists_equivalent_exactly_for_square_ratios() {
        // ω and ℓ²ω give equivalent data; 1 and 2 differ at ν = 5 (2 is not
        // a square mod 5), as do distinct ω orders or s signs.
        let d1 = dihedral_double(5, Sign::Plus, 1).unwrap();
        let d4 = dihedral_double(5, Sign::Plus, 4).unwrap();
        assert!(equivalent(&d1, &d4).is_some());
        let d2 = dihedral_double(5, Sign::Plus, 2).unwrap();
        assert!(equivalent(&d1, &d2).is_none());
        let d0 = dihedral_double(5, Sign::Plus, 0).unwrap();
        assert!(equivalent(&d1, &d0).is_none());
        let dm = dihedral_double(5, Sign::Minus, 1).unwrap();
        assert!(equivalent(&d1, &dm).is_none());
    }

    #[test]
    fn so_level2_is_modular_with_expected_profile() {
        for m in [2u64, 6] {
            let md = so_level2(m).unwrap();
            assert_eq!(md.dim(), (m + 4) as usize);
            assert!(exact_ok(&md));
            let profile = quantum_profile(&md).unwrap();
            let mu = 2 * m + 1;
            // dims 1, 1; √μ, √μ; 2, …, 2
            assert_eq!(profile.dims[1], int(1));
            assert_eq!(profile.dims[2], sqrt_positive_integer(mu));
            assert_eq!(profile.dims[3], sqrt_positive_integer(mu));
            for l in 0..m as usize {
                assert_eq!(profile.dims[4 + l], int(2));
            }
            assert_eq!(profile.c_mod_24, rat(2 * m as i64, 1));
        }
        assert!(matches!(so_level2(1), Err(FamilyError::InvalidForm(_))));
    }

    #[test]
    fn so13_level2_d_block_is_negated_hg3_d_block() {
        let so = so_level2(6).unwrap();
        let hg = haagerup_izumi(&[3], 0).unwrap();
        for l in 0..6 {
            for l2 in 0..6 {
                assert_eq!(so.s[4 + l][4 + l2], hg.s[6 + l][6 + l2].neg());
            }
        }
        // same for so(29)₂ against Hg₅
        let so = so_level2(14).unwrap();
        let hg = haagerup_izumi(&[5], 0).unwrap();
        for l in 0..14 {
            for l2 in 0..14 {
                assert_eq!(so.s[4 + l][4 + l2], hg.s[14 + l][14 + l2].neg());
            }
        }
    }

    /// Frozen 12×12 data for ν = 3, ω = 0: x = (13−3√13)/26 in the corner,
    /// 1/3 across the 𝔞/𝔠 rows, ±1/√13 in the 𝔟-column of the 𝔡-block, and
    /// 𝔡-block entries −(2/√13)cos(2πll′/13) following the multiplication
    /// table of ±l·l′ folded into {1..6}.
    #[test]
    fn hg3_matches_frozen_matrix() {
        let md = haagerup_izumi(&[3], 0).unwrap();
        assert_eq!(md.dim(), 12);
        assert_eq!(
            md.labels,
            vec![
                "0", "b", "a1", "c1,0", "c1,1", "c1,2", "d1", "d2", "d3", "d4", "d5", "d6"
            ]
        );
        let sqrt13_inv = sqrt_positive_integer(13).invert().unwrap();
        let y = sqrt13_inv.scale(&rat(3, 1));
        let x = Cyc::one().sub(&y).scale(&rat(1, 6));
        let xb = Cyc::one().add(&y).scale(&rat(1, 6));
        assert_eq!(md.s[0][0], x);
        assert_eq!(md.s[1][1], x);
        assert_eq!(md.s[0][1], xb);
        let third = Cyc::from_rational(rat(1, 3));
        for j in 2..6 {
            assert_eq!(md.s[0][j], third);
            assert_eq!(md.s[1][j], third);
        }
        for l in 6..12 {
            assert_eq!(md.s[0][l], sqrt13_inv);
            assert_eq!(md.s[1][l], sqrt13_inv.neg());
            for j in 2..6 {
                assert!(md.s[j][l].is_zero());
            }
        }
        // 𝔞/𝔠 block: S_{a,a} = 2/3, S_{a,c} = 2cos(2π/3)/3 = −1/3,
        // S_{c(1,j),c(1,j')} = 2cos(2π(j+j')/3)/3
        assert_eq!(md.s[2][2], Cyc::from_rational(rat(2, 3)));
        for j in 3..6 {
            assert_eq!(md.s[2][j], Cyc::from_rational(rat(-1, 3)));
        }
        for j in 0..3i64 {
            for j2 in 0..3i64 {
                assert_eq!(
                    md.s[3 + j as usize][3 + j2 as usize],
                    two_cos(3, j + j2).scale(&rat(1, 3))
                );
            }
        }
        let tab: [[i64; 6]; 6] = [
            [1, 2, 3, 4, 5, 6],
            [2, 4, 6, 5, 3, 1],
            [3, 6, 4, 1, 2, 5],
            [4, 5, 1, 3, 6, 2],
            [5, 3, 2, 6, 1, 4],
            [6, 1, 5, 2, 4, 3],
        ];
        for l in 0..6 {
            for l2 in 0..6 {
                assert_eq!(
                    md.s[6 + l][6 + l2],
                    sqrt13_inv.mul(&two_cos(13, tab[l][l2])).neg(),
                    "d-block ({l},{l2})"
                );
            }
        }
        let xi13 = |k: i64| Cyc::root_of_unity(13, k);
        let xi3 = |k: i64| Cyc::root_of_unity(3, k);
        assert_eq!(
            md.t,
            vec![
                int(1),
                int(1),
                int(1),
                int(1),
                xi3(1),
                xi3(2),
                xi13(6),
                xi13(-2),
                xi13(2),
                xi13(5),
                xi13(-6),
                xi13(-5)
            ]
        );
        assert!(exact_ok(&md));
    }

    #[test]
    fn hg_small_instances_are_modular() {
        for (nu, omega) in [(1u64, 0i64), (3, 1), (3, 2), (5, 0)] {
            let md = haagerup_izumi(&[nu], omega).unwrap();
            let n = (nu - 1) / 2;
            let m = (nu * nu + 3) / 2;
            assert_eq!(md.dim(), (2 + n + n * nu + m) as usize);
            assert!(exact_ok(&md));
        }
    }

    #[test]
    fn hg1_is_the_golden_pair() {
        let md = haagerup_izumi(&[1], 0).unwrap();
        assert_eq!(md.dim(), 4);
        assert!(exact_ok(&md));
        // dims (1, 1+δ; δ, δ) with δ = (1+√5)/2
        let profile = quantum_profile(&md).unwrap();
        let delta = Cyc::one().add(&sqrt_positive_integer(5)).scale(&rat(1, 2));
        assert_eq!(profile.dims[1], Cyc::one().add(&delta));
        assert_eq!(profile.dims[2], delta);
        assert_eq!(profile.dims[3], delta);
    }

    #[test]
    fn hg_rejects_bad_input() {
        assert!(matches!(
            haagerup_izumi(&[3, 3], 1),
            Err(FamilyError::NoncyclicTwist)
        ));
        assert!(matches!(
            haagerup_izumi(&[2], 0),
            Err(FamilyError::EvenOrder(2))
        ));
        assert!(matches!(
            haagerup_izumi(&[3, 2], 0),
            Err(FamilyError::EvenOrder(6))
        ));
    }

    #[test]
    fn hg_noncyclic_z3z3_verifies() {
        let md = haagerup_izumi(&[3, 3], 0).unwrap();
        // 2 + n + nν + m with ν = 9: 2 + 4 + 36 + 42
        assert_eq!(md.dim(), 84);
        let report = verify_axioms(
            &md,
            VerifyMode::Numeric {
                precision: 128,
                tol: 1e-20,
            },
        )
        .unwrap();
        assert!(report.passed(), "{:?}", report.checks);
        assert!(report.unitary);
    }

    fn closed_form_tensor(nu: u64, omega: i64, dim: usize) -> FusionTensor {
        let mut data = Vec::with_capacity(dim * dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    data.push(hg_fusion_closed_form(nu, omega, i, j, k));
                }
            }
        }
        FusionTensor { n: dim, data }
    }

    #[test]
    fn hg_fusion_matches_closed_form_exactly() {
        for (nu, omega) in [(1u64, 0i64), (3, 0), (3, 1), (3, 2), (5, 0), (5, 3)] {
            let md = haagerup_izumi(&[nu], omega).unwrap();
            let nt = verlinde(&md).unwrap();
            assert_eq!(nt, closed_form_tensor(nu, omega, md.dim()), "nu={nu} omega={omega}");
        }
    }

    #[test]
    fn hg_fusion_matches_closed_form_numerically_for_larger_nu() {
        for (nu, omega) in [(7u64, 0i64), (7, 3), (9, 0), (9, 4)] {
            let md = haagerup_izumi(&[nu], omega).unwrap();
            let nt = verlinde_numeric(&md, 1e-6).unwrap();
            assert_eq!(nt, closed_form_tensor(nu, omega, md.dim()), "nu={nu} omega={omega}");
        }
    }

    #[test]
    fn hg_twists_equivalent_for_square_ratios() {
        // ω = 1 and ω = ℓ²·1 = 4 are equivalent at ν = 5; ω = 1 and 0 are not
        let h1 = haagerup_izumi(&[5], 1).unwrap();
        let h4 = haagerup_izumi(&[5], 4).unwrap();
        assert!(equivalent(&h1, &h4).is_some());
        let h0 = haagerup_izumi(&[5], 0).unwrap();
        assert!(equivalent(&h1, &h0).is_none());
    }

    #[test]
    fn lamination_invariants_for_dihedral_and_so() {
        let md = dihedral_double(3, Sign::Plus, 0).unwrap();
        let lam = detect_lamination(&md).unwrap();
        assert_eq!(lam.b, 1);
        assert_eq!((lam.m_int, lam.l_exp, lam.n_int), (9, 1, 9));
        assert_eq!(lam.a_dims, vec![2, 2, 2, 2]);
        assert_eq!(lam.d_prim, vec![1, 1]);
        // 2x = 1/√M exactly
        assert!(lam
            .x
            .scale(&rat(2, 1))
            .mul(&sqrt_positive_integer(lam.m_int))
            .is_one());
        // 2^{1−L}√M·a_i integral with gcd 1
        let odd: Vec<u64> = lam.a_dims.iter().map(|w| w >> lam.l_exp).collect();
        assert_eq!(odd.iter().fold(0, |acc, &w| acc.gcd(&w)), 1);

        let so = so_level2(6).unwrap();
        let lam = detect_lamination(&so).unwrap();
        assert_eq!(lam.b, 1);
        assert_eq!((lam.m_int, lam.l_exp, lam.n_int), (13, 1, 13));
        assert_eq!(lam.a_dims, vec![2; 6]);
        assert_eq!(lam.d_prim, vec![1, 1]);
        // the 𝔡-class of so(13)₂ is its spinor pair
        assert_eq!(lam.d_idx, vec![2, 3]);
    }

    #[test]
    fn hg_and_cyclic_double_are_not_laminated() {
        // S_{0,𝔟} ≠ S_{0,0} for the Haagerup–Izumi corner
        let hg = haagerup_izumi(&[3], 0).unwrap();
        assert!(detect_lamination(&hg).is_none());
        // complex S never qualifies
        let zc = cyclic_double(3, 0).unwrap();
        assert!(detect_lamination(&zc).is_none());
    }

    #[test]
    fn graft_of_so_level2_reproduces_hg3_entrywise() {
        let base = dihedral_double(3, Sign::Plus, 0).unwrap();
        let donor = so_level2(6).unwrap();
        let grafted = graft(&base, &donor).unwrap();
        let hg = haagerup_izumi(&[3], 0).unwrap();
        assert_eq!(grafted.labels, hg.labels);
        assert_eq!(grafted.t, hg.t);
        assert_eq!(grafted.s, hg.s);
    }

    #[test]
    fn graft_swaps_dihedral_sign_in_case_b() {
        let base = dihedral_double(3, Sign::Plus, 1).unwrap();
        let donor = dihedral_double(3, Sign::Minus, 0).unwrap();
        let grafted = graft(&base, &donor).unwrap();
        let want = dihedral_double(3, Sign::Minus, 1).unwrap();
        assert_eq!(grafted.labels, want.labels);
        assert_eq!(grafted.t, want.t);
        assert_eq!(grafted.s, want.s);
        // grafting a datum onto itself is the identity
        let again = graft(&base, &base).unwrap();
        assert_eq!(again.s, base.s);
        assert_eq!(again.t, base.t);
    }

    #[test]
    fn graft_rejects_incompatible_inputs() {
        let d3 = dihedral_double(3, Sign::Plus, 0).unwrap();
        let d5 = dihedral_double(5, Sign::Plus, 0).unwrap();
        assert!(matches!(
            graft(&d3, &d5),
            Err(FamilyError::IncompatibleCharges(_))
        ));
        // M′ − M = 20 fails the divisibility conditions
        let so14 = so_level2(14).unwrap();
        assert!(matches!(
            graft(&d3, &so14),
            Err(FamilyError::IncompatibleCharges(_))
        ));
        let hg = haagerup_izumi(&[3], 0).unwrap();
        assert!(matches!(graft(&hg, &so14), Err(FamilyError::NotLaminated(_))));
        let so6 = so_level2(6).unwrap();
        assert!(matches!(graft(&so6, &hg), Err(FamilyError::NotLaminated(_))));
    }

    #[test]
    fn galois_units_frozen_for_nu9() {
        assert_eq!(galois_units(9, &[5, 17], 2).unwrap(), vec![82, 163]);
        assert_eq!(galois_units(9, &[], 1).unwrap(), vec![1]);
        assert!(matches!(
            galois_units(9, &[5], 1),
            Err(FamilyError::NoSuchUnit(_))
        ));
        assert!(matches!(
            galois_units(9, &[7, 17], 1),
            Err(FamilyError::NoSuchUnit(_))
        ));
        assert!(matches!(
            galois_units(3, &[13, 13], 1),
            Err(FamilyError::NoSuchUnit(_))
        ));
    }

    #[test]
    fn galois_twist_with_empty_set_is_identity() {
        let hg = haagerup_izumi(&[3], 0).unwrap();
        let tw = galois_twist_hg(3, 0, &[]).unwrap();
        assert_eq!(tw.s, hg.s);
        assert_eq!(tw.t, hg.t);
    }

    #[test]
    fn galois_twist_nu9_changes_class_but_not_fusion() {
        let hg = haagerup_izumi(&[9], 0).unwrap();
        let tw = galois_twist_hg(9, 0, &[5, 17]).unwrap();
        assert_eq!(tw.meta["ell"], serde_json::json!(82));
        // different modular datum, same fusion ring
        assert!(equivalent(&tw, &hg).is_none());
        let nt = verlinde_numeric(&hg, 1e-6).unwrap();
        let nt_tw = verlinde_numeric(&tw, 1e-6).unwrap();
        assert_eq!(nt, nt_tw);
        // the second admissible unit gives an equivalent twist
        let (tw2, _) = galois_act(&hg, 163 % hg.order).unwrap();
        assert!(equivalent(&tw, &tw2).is_some());
    }
}
