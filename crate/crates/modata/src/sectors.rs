//! Finite fusion rings of the sector systems attached to an Izumi-type
//! subfactor N ⊂ M of index δ + 1 for K = Z_ν, the bimodule product tables
//! between them, and the alpha-induction maps into the quantum double.
//!
//! The N-N system is Δ = {u_g, ρu_g : g ∈ Z_ν}, generated by
//!
//! ```text
//!   [u_g][u_h] = [u_{g+h}],   [u_g][ρ] = [ρ][u_{−g}],
//!   [ρ]² = [id] + Σ_g [ρu_g],
//! ```
//!
//! with dim u_g = 1 and dim ρu_g = δ.  The M-M system is
//! Δ̂ = {id, a, b_i, c_i : 1 ≤ i ≤ n} with dim a = δ, dim b_i = δ − 1,
//! dim c_i = δ + 1 and the commutative table
//!
//! ```text
//!   [a]² = [id]+[a]+Σ[b]+Σ[c],   [a][b_i] = [a]+Σ[b]−[b_i]+Σ[c],
//!   [a][c_i] = [a]+Σ[b]+[c_i]+Σ[c],   [b_i][c_j] = [a]+Σ[b]+Σ[c],
//!   [b_i][b_j] = δ_{ij}[id]+(1−δ_{ij})[a]+Σ[b]−[b_{i+j}]−[b_{i−j}]+Σ[c],
//!   [c_i][c_j] = δ_{ij}[id]+(1+δ_{ij})[a]+Σ[b]+[c_{i+j}]+[c_{i−j}]+Σ[c],
//! ```
//!
//! where indices fold through [x_{−i}] = [x_i] and [x_0] = 0.  The M-N
//! sectors κu_g, κ′ (dim λ, λ(δ−1) with λ² = 1 + δ) link the two rings
//! through four product tables, every row of which is dimension-additive.
//!
//! Alpha-induction sends the primaries of the double into Δ (and Δ̂):
//!
//! ```text
//!   α𝔟 = id + Σρu,  α𝔞_i = 2·id + Σρu,  α𝔠_{i,j} = u_i + u_{−i} + Σρu,
//!   α𝔡_l = Σρu;
//!   α̂𝔟 = id + a + Σb + Σc,  α̂𝔞_i = id + 2a + Σb − b_i + Σc,
//!   α̂𝔠_{i,j} = δ_{j,0}·id + (1−δ_{j,0})(a − b_i) + Σb + c_i + Σc,
//!   α̂𝔡_l = a + Σb + Σc,
//! ```
//!
//! and both maps are unital ring homomorphisms from the fusion ring of the
//! untwisted double — [`alpha_tables`] verifies this on every pair of
//! primaries against the closed-form fusion numbers.  The Δ̂ table and the
//! tables involving it hold under the standard hypothesis that the double's
//! fusions match the closed form and that the dual canonical endomorphism is
//! θ̂ = 1 + 𝔟 + Σ𝔞_i + Σ𝔠_{h,0}; [`SectorSystems::hat_assumes_double_fusions`]
//! flags this assumption rather than deciding it.

use crate::families::{hg_fusion_closed_form, FamilyError};
use crate::numeric::{bf_cmp, real, ToF64};
use astro_float::BigFloat;
use std::cmp::Ordering;
use thiserror::Error;

/// Working precision for the dimension checks in this module.
const PREC: usize = 256;

/// Errors from sector-system construction and the alpha-table audit.
#[derive(Debug, Error)]
pub enum SectorError {
    /// The group order is even or below 3.
    #[error("unsupported group order {nu}: need an odd ν ≥ 3")]
    UnsupportedOrder { nu: u64 },
    /// An alpha-induction table failed the ring-homomorphism check on a
    /// pair of primaries (signals a table transcription error).
    #[error("{map} is not multiplicative on the pair ({x}, {y})")]
    HomomorphismFailure {
        map: &'static str,
        x: String,
        y: String,
    },
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// A based ring with nonnegative-integer structure constants and numeric
/// Perron–Frobenius dimensions.
#[derive(Clone, Debug)]
pub struct FusionRing {
    /// Sector names; index 0 is the unit.
    pub basis: Vec<String>,
    /// Structure constants: `n[a][b][c]` is the coefficient of `c` in `a·b`.
    pub n: Vec<Vec<Vec<u64>>>,
    /// Perron–Frobenius dimensions at 256 bits.
    pub dims: Vec<BigFloat>,
    /// Conjugation permutation, when one is declared.
    pub conj: Option<Vec<usize>>,
}

impl FusionRing {
    /// Number of basis sectors.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Bilinear extension of the product to nonnegative combinations.
    pub fn product(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let d = self.dim();
        let mut out = vec![0u64; d];
        for a in 0..d {
            if x[a] == 0 {
                continue;
            }
            for b in 0..d {
                if y[b] == 0 {
                    continue;
                }
                let c = x[a] * y[b];
                for (o, row) in out.iter_mut().zip(&self.n[a][b]) {
                    *o += c * row;
                }
            }
        }
        out
    }

    /// Numeric dimension of a nonnegative combination.
    pub fn dim_of(&self, x: &[u64]) -> BigFloat {
        let mut acc = real::from_u64(0, PREC);
        for (c, d) in x.iter().zip(&self.dims) {
            if *c != 0 {
                acc = real::add(&acc, &real::mul(&real::from_u64(*c, PREC), d));
            }
        }
        acc
    }
}

/// The four integer product tables linking Δ, Δ̂ and the M-N sectors.
#[derive(Clone, Debug)]
pub struct BimoduleTables {
    /// M-N sector names: κu_0, …, κu_{ν−1}, κ′.
    pub mn_basis: Vec<String>,
    /// dim κu_g = λ, dim κ′ = λ(δ−1), λ = √(1+δ).
    pub mn_dims: Vec<BigFloat>,
    /// M-N × N-N → M-N: `[x][d][y]` = coefficient of κ-sector y in x·d.
    pub mn_by_nn: Vec<Vec<Vec<u64>>>,
    /// M-M × M-N → M-N: `[m][x][y]` = coefficient of y in m·x.
    pub mm_by_mn: Vec<Vec<Vec<u64>>>,
    /// N-M × M-N → N-N: `[x][y][d]` = coefficient of Δ-sector d in x̄·y.
    pub nm_mn_to_nn: Vec<Vec<Vec<u64>>>,
    /// M-N × N-M → M-M: `[x][y][m]` = coefficient of Δ̂-sector m in x·ȳ.
    pub mn_nm_to_mm: Vec<Vec<Vec<u64>>>,
}

/// Both fusion rings and the bimodule tables for one subfactor.
#[derive(Clone, Debug)]
pub struct SectorSystems {
    pub nu: u64,
    /// The noncommutative N-N ring Δ (basis id, u_1, …, ρ, ρu_1, …).
    pub delta: FusionRing,
    /// The commutative M-M ring Δ̂ (basis id, a, b_1, …, c_1, …).
    pub delta_hat: FusionRing,
    pub tables: BimoduleTables,
    /// The Δ̂ table (and the products valued in it) assume the double's
    /// fusions match the closed form and θ̂ is the canonical one; the
    /// ν = 11 twisted solution is the known case violating the fusion
    /// hypothesis, so consumers must treat this as a precondition.
    pub hat_assumes_double_fusions: bool,
}

fn delta_value(nu: u64) -> BigFloat {
    let mu = nu * nu + 4;
    real::div(
        &real::add(
            &real::from_u64(nu, PREC),
            &real::sqrt(&real::from_u64(mu, PREC)),
        ),
        &real::from_u64(2, PREC),
    )
}

/// Folds a Z_ν index into the representative set {0, …, n} of {±i}.
fn fold(x: i64, nu: u64) -> usize {
    let r = x.rem_euclid(nu as i64) as u64;
    r.min(nu - r) as usize
}

fn delta_ring(nu: u64) -> FusionRing {
    let nz = nu as usize;
    let d = delta_value(nu);
    let mut basis = vec!["id".to_string()];
    basis.extend((1..nz).map(|g| format!("u{g}")));
    basis.push("rho".into());
    basis.extend((1..nz).map(|g| format!("rhou{g}")));
    let one = real::from_u64(1, PREC);
    let mut dims = vec![one; nz];
    dims.extend(std::iter::repeat_n(d, nz));
    let dim = 2 * nz;
    let mut n = vec![vec![vec![0u64; dim]; dim]; dim];
    let u = |g: usize| g % nz;
    let ru = |g: usize| nz + g % nz;
    for g in 0..nz {
        for h in 0..nz {
            n[u(g)][u(h)][u(g + h)] += 1;
            n[u(g)][ru(h)][ru(nz + h - g)] += 1;
            n[ru(h)][u(g)][ru(h + g)] += 1;
            n[ru(g)][ru(h)][u(nz + h - g)] += 1;
            for k in 0..nz {
                n[ru(g)][ru(h)][ru(k)] += 1;
            }
        }
    }
    let mut conj: Vec<usize> = (0..nz).map(|g| u(nz - g)).collect();
    conj.extend(nz..2 * nz);
    FusionRing {
        basis,
        n,
        dims,
        conj: Some(conj),
    }
}

fn delta_hat_ring(nu: u64) -> FusionRing {
    let nn = ((nu - 1) / 2) as usize;
    let d = delta_value(nu);
    let one = real::from_u64(1, PREC);
    let mut basis = vec!["id".to_string(), "a".to_string()];
    basis.extend((1..=nn).map(|i| format!("b{i}")));
    basis.extend((1..=nn).map(|i| format!("c{i}")));
    let mut dims = vec![one.clone(), d.clone()];
    dims.extend(std::iter::repeat_n(real::sub(&d, &one), nn));
    dims.extend(std::iter::repeat_n(real::add(&d, &one), nn));
    let dim = 2 + 2 * nn;
    let b = |i: usize| 1 + i; // i in 1..=n
    let c = |i: usize| 1 + nn + i;
    // a·a, a·b_i, a·c_i, b_i·b_j, b_i·c_j, c_i·c_j as count vectors
    let mut n = vec![vec![vec![0u64; dim]; dim]; dim];
    for x in 0..dim {
        n[0][x][x] += 1;
        if x > 0 {
            n[x][0][x] += 1;
        }
    }
    let all_b = |v: &mut [u64]| {
        for i in 1..=nn {
            v[b(i)] += 1;
        }
    };
    let all_c = |v: &mut [u64]| {
        for i in 1..=nn {
            v[c(i)] += 1;
        }
    };
    {
        let v = &mut n[1][1];
        v[0] += 1;
        v[1] += 1;
        all_b(v);
        all_c(v);
    }
    for i in 1..=nn {
        for (row, col) in [(1, b(i)), (b(i), 1)] {
            let v = &mut n[row][col];
            v[1] += 1;
            all_b(v);
            v[b(i)] -= 1;
            all_c(v);
        }
        for (row, col) in [(1, c(i)), (c(i), 1)] {
            let v = &mut n[row][col];
            v[1] += 1;
            all_b(v);
            v[c(i)] += 1;
            all_c(v);
        }
        for j in 1..=nn {
            {
                let v = &mut n[b(i)][b(j)];
                if i == j {
                    v[0] += 1;
                } else {
                    v[1] += 1;
                }
                all_b(v);
                let fp = fold((i + j) as i64, nu);
                if fp != 0 {
                    v[b(fp)] -= 1;
                }
                let fm = fold(i as i64 - j as i64, nu);
                if fm != 0 {
                    v[b(fm)] -= 1;
                }
                all_c(v);
            }
            {
                let v = &mut n[c(i)][c(j)];
                v[1] += 1;
                if i == j {
                    v[0] += 1;
                    v[1] += 1;
                }
                all_b(v);
                all_c(v);
                let fp = fold((i + j) as i64, nu);
                if fp != 0 {
                    v[c(fp)] += 1;
                }
                let fm = fold(i as i64 - j as i64, nu);
                if fm != 0 {
                    v[c(fm)] += 1;
                }
            }
            for (row, col) in [(b(i), c(j)), (c(j), b(i))] {
                let v = &mut n[row][col];
                if v.iter().all(|&x| x == 0) {
                    v[1] += 1;
                    all_b(v);
                    all_c(v);
                }
            }
        }
    }
    FusionRing {
        basis,
        n,
        dims,
        conj: Some((0..dim).collect()),
    }
}

fn bimodule_tables(nu: u64, hat: &FusionRing) -> BimoduleTables {
    let nz = nu as usize;
    let nn = ((nu - 1) / 2) as usize;
    let d = delta_value(nu);
    let one = real::from_u64(1, PREC);
    let lambda = real::sqrt(&real::add(&one, &d));
    let mut mn_basis: Vec<String> = (0..nz).map(|g| format!("ku{g}")).collect();
    mn_basis.push("kprime".into());
    let mut mn_dims = vec![lambda.clone(); nz];
    mn_dims.push(real::mul(&lambda, &real::sub(&d, &one)));
    let mdim = nz + 1;
    let kp = nz;
    let nndim = 2 * nz;
    let hdim = hat.dim();
    let u = |g: usize| g % nz;
    let ru = |g: usize| nz + g % nz;
    let b = |i: usize| 1 + i;
    let c = |i: usize| 1 + nn + i;

    // M-N × N-N → M-N
    let mut mn_by_nn = vec![vec![vec![0u64; mdim]; nndim]; mdim];
    for g in 0..nz {
        for h in 0..nz {
            mn_by_nn[g][u(h)][u(g + h)] += 1;
            mn_by_nn[g][ru(h)][kp] += 1;
            mn_by_nn[g][ru(h)][u(nz + h - g)] += 1;
        }
    }
    for h in 0..nz {
        mn_by_nn[kp][u(h)][kp] += 1;
        for g in 0..nz {
            mn_by_nn[kp][ru(h)][g] += 1;
        }
        mn_by_nn[kp][ru(h)][kp] += nu - 1;
    }

    // M-M × M-N → M-N
    let mut mm_by_mn = vec![vec![vec![0u64; mdim]; mdim]; hdim];
    for x in 0..mdim {
        mm_by_mn[0][x][x] += 1;
    }
    for g in 0..nz {
        mm_by_mn[1][g][g] += 1;
        mm_by_mn[1][g][kp] += 1;
    }
    for g in 0..nz {
        mm_by_mn[1][kp][g] += 1;
    }
    mm_by_mn[1][kp][kp] += nu - 1;
    for i in 1..=nn {
        for g in 0..nz {
            mm_by_mn[b(i)][g][kp] += 1;
            mm_by_mn[c(i)][g][u(g + i)] += 1;
            mm_by_mn[c(i)][g][u(nz + g - i)] += 1;
            mm_by_mn[c(i)][g][kp] += 1;
            mm_by_mn[b(i)][kp][g] += 1;
            mm_by_mn[c(i)][kp][g] += 1;
        }
        mm_by_mn[b(i)][kp][kp] += nu - 2;
        mm_by_mn[c(i)][kp][kp] += nu;
    }

    // N-M × M-N → N-N (x̄·y)
    let mut nm_mn_to_nn = vec![vec![vec![0u64; nndim]; mdim]; mdim];
    for g in 0..nz {
        for h in 0..nz {
            nm_mn_to_nn[g][h][u(nz + h - g)] += 1;
            nm_mn_to_nn[g][h][ru(h + g)] += 1;
        }
        for h in 0..nz {
            nm_mn_to_nn[kp][g][ru(h)] += 1;
            nm_mn_to_nn[g][kp][ru(h)] += 1;
        }
    }
    for g in 0..nz {
        nm_mn_to_nn[kp][kp][u(g)] += 1;
        nm_mn_to_nn[kp][kp][ru(g)] += nu - 1;
    }

    // M-N × N-M → M-M (x·ȳ)
    let mut mn_nm_to_mm = vec![vec![vec![0u64; hdim]; mdim]; mdim];
    for g in 0..nz {
        for h in 0..nz {
            if g == h {
                mn_nm_to_mm[g][h][0] += 1;
                mn_nm_to_mm[g][h][1] += 1;
            } else {
                mn_nm_to_mm[g][h][c(fold(g as i64 - h as i64, nu))] += 1;
            }
        }
        for (row, col) in [(g, kp), (kp, g)] {
            let v = &mut mn_nm_to_mm[row][col];
            v[1] += 1;
            for i in 1..=nn {
                v[b(i)] += 1;
                v[c(i)] += 1;
            }
        }
    }
    mn_nm_to_mm[kp][kp][0] += 1;
    mn_nm_to_mm[kp][kp][1] += nu - 1;
    for i in 1..=nn {
        mn_nm_to_mm[kp][kp][b(i)] += nu - 2;
        mn_nm_to_mm[kp][kp][c(i)] += nu;
    }

    BimoduleTables {
        mn_basis,
        mn_dims,
        mn_by_nn,
        mm_by_mn,
        nm_mn_to_nn,
        mn_nm_to_mm,
    }
}

/// Builds Δ, Δ̂ and the four bimodule tables for an odd ν ≥ 3.
pub fn build_systems(nu: u64) -> Result<SectorSystems, SectorError> {
    if nu < 3 || nu % 2 == 0 {
        return Err(SectorError::UnsupportedOrder { nu });
    }
    let delta = delta_ring(nu);
    let delta_hat = delta_hat_ring(nu);
    let tables = bimodule_tables(nu, &delta_hat);
    Ok(SectorSystems {
        nu,
        delta,
        delta_hat,
        tables,
        hat_assumes_double_fusions: true,
    })
}

/// Alpha-induction images of the double's primaries, in the family's label
/// order, as nonnegative combinations over the Δ and Δ̂ bases.
#[derive(Clone, Debug)]
pub struct AlphaTables {
    /// Primary labels of the untwisted double (0, 𝔟, 𝔞_i, 𝔠_{h,j}, 𝔡_l).
    pub labels: Vec<String>,
    /// α images over the Δ basis.
    pub alpha: Vec<Vec<u64>>,
    /// α̂ images over the Δ̂ basis.
    pub alpha_hat: Vec<Vec<u64>>,
}

/// Builds the α and α̂ tables for an odd ν ≥ 3 and verifies both are unital
/// ring homomorphisms from the double's fusion ring on every pair of
/// primaries (via the closed-form fusion numbers).
pub fn alpha_tables(nu: u64) -> Result<AlphaTables, SectorError> {
    let sys = build_systems(nu)?;
    let nz = nu as usize;
    let nn = ((nu - 1) / 2) as usize;
    let m = ((nu * nu + 3) / 2) as usize;
    let u = |g: usize| g % nz;
    let ru = |g: usize| nz + g % nz;
    let b = |i: usize| 1 + i;
    let c = |i: usize| 1 + nn + i;
    let ddim = sys.delta.dim();
    let hdim = sys.delta_hat.dim();

    let mut labels = vec!["0".to_string(), "b".to_string()];
    labels.extend((1..=nn).map(|i| format!("a{i}")));
    for h in 1..=nn {
        labels.extend((0..nz).map(|j| format!("c{h},{j}")));
    }
    labels.extend((1..=m).map(|l| format!("d{l}")));

    let sum_ru = |v: &mut [u64]| {
        for g in 0..nz {
            v[ru(g)] += 1;
        }
    };
    let hat_bc = |v: &mut [u64]| {
        for i in 1..=nn {
            v[b(i)] += 1;
            v[c(i)] += 1;
        }
    };
    let mut alpha = Vec::with_capacity(labels.len());
    let mut alpha_hat = Vec::with_capacity(labels.len());
    // 0
    let mut av = vec![0u64; ddim];
    av[0] = 1;
    alpha.push(av);
    let mut hv = vec![0u64; hdim];
    hv[0] = 1;
    alpha_hat.push(hv);
    // 𝔟
    let mut av = vec![0u64; ddim];
    av[0] = 1;
    sum_ru(&mut av);
    alpha.push(av);
    let mut hv = vec![0u64; hdim];
    hv[0] = 1;
    hv[1] = 1;
    hat_bc(&mut hv);
    alpha_hat.push(hv);
    // 𝔞_i
    for i in 1..=nn {
        let mut av = vec![0u64; ddim];
        av[0] = 2;
        sum_ru(&mut av);
        alpha.push(av);
        let mut hv = vec![0u64; hdim];
        hv[0] = 1;
        hv[1] = 2;
        hat_bc(&mut hv);
        hv[b(i)] -= 1;
        alpha_hat.push(hv);
    }
    // 𝔠_{i,j}
    for i in 1..=nn {
        for j in 0..nz {
            let mut av = vec![0u64; ddim];
            av[u(i)] += 1;
            av[u(nz - i)] += 1;
            sum_ru(&mut av);
            alpha.push(av);
            let mut hv = vec![0u64; hdim];
            hat_bc(&mut hv);
            hv[c(i)] += 1;
            if j == 0 {
                hv[0] += 1;
            } else {
                hv[1] += 1;
                hv[b(i)] -= 1;
            }
            alpha_hat.push(hv);
        }
    }
    // 𝔡_l
    for _ in 1..=m {
        let mut av = vec![0u64; ddim];
        sum_ru(&mut av);
        alpha.push(av);
        let mut hv = vec![0u64; hdim];
        hv[1] = 1;
        hat_bc(&mut hv);
        alpha_hat.push(hv);
    }

    // Homomorphism audit against the closed-form fusion of the double.
    let dim = labels.len();
    for (map, ring, table) in [
        ("alpha", &sys.delta, &alpha),
        ("alpha_hat", &sys.delta_hat, &alpha_hat),
    ] {
        for x in 0..dim {
            for y in 0..dim {
                let lhs = ring.product(&table[x], &table[y]);
                let mut rhs = vec![0u64; ring.dim()];
                for (z, img) in table.iter().enumerate() {
                    let nxy = hg_fusion_closed_form(nu, 0, x, y, z) as u64;
                    if nxy != 0 {
                        for (r, v) in rhs.iter_mut().zip(img) {
                            *r += nxy * v;
                        }
                    }
                }
                if lhs != rhs {
                    return Err(SectorError::HomomorphismFailure {
                        map,
                        x: labels[x].clone(),
                        y: labels[y].clone(),
                    });
                }
            }
        }
    }
    Ok(AlphaTables {
        labels,
        alpha,
        alpha_hat,
    })
}

/// Audit report for one fusion ring.
#[derive(Clone, Debug)]
pub struct RingReport {
    /// Basis element 0 is a two-sided unit.
    pub unit_ok: bool,
    /// Σ_m N_{ab}^m N_{mc}^d = Σ_m N_{bc}^m N_{am}^d for all quadruples.
    pub associative: bool,
    /// dim_a·dim_b = Σ_c N_{ab}^c dim_c to 10⁻²⁰ (Perron–Frobenius
    /// eigenvalue consistency).
    pub dims_multiplicative: bool,
    /// N_{ab}^c = N_{c b̄}^a and N_{ab}^0 = δ_{b,ā}; `None` when no
    /// conjugation is declared.
    pub frobenius_ok: Option<bool>,
    /// Localized failure descriptions (capped).
    pub failures: Vec<String>,
}

impl RingReport {
    /// All performed checks passed.
    pub fn all_ok(&self) -> bool {
        self.unit_ok
            && self.associative
            && self.dims_multiplicative
            && self.frobenius_ok.unwrap_or(true)
    }
}

const MAX_FAILURES: usize = 8;

fn push_failure(failures: &mut Vec<String>, msg: String) {
    if failures.len() < MAX_FAILURES {
        failures.push(msg);
    }
}

/// Audits a fusion ring: unit, associativity, dimension multiplicativity,
/// and Frobenius symmetry when a conjugation is declared.
pub fn verify_ring(fr: &FusionRing) -> RingReport {
    let d = fr.dim();
    let mut failures = Vec::new();
    let mut unit_ok = true;
    for x in 0..d {
        for y in 0..d {
            let left = fr.n[0][x][y];
            let right = fr.n[x][0][y];
            let want = u64::from(x == y);
            if left != want || right != want {
                unit_ok = false;
                push_failure(
                    &mut failures,
                    format!("unit fails at ({}, {})", fr.basis[x], fr.basis[y]),
                );
            }
        }
    }
    let mut associative = true;
    for a in 0..d {
        for bx in 0..d {
            for cx in 0..d {
                for dx in 0..d {
                    let lhs: u64 = (0..d).map(|m| fr.n[a][bx][m] * fr.n[m][cx][dx]).sum();
                    let rhs: u64 = (0..d).map(|m| fr.n[bx][cx][m] * fr.n[a][m][dx]).sum();
                    if lhs != rhs {
                        associative = false;
                        push_failure(
                            &mut failures,
                            format!(
                                "associativity fails at ({}, {}, {}) on {}: {} vs {}",
                                fr.basis[a], fr.basis[bx], fr.basis[cx], fr.basis[dx], lhs, rhs
                            ),
                        );
                    }
                }
            }
        }
    }
    let tol = real::from_f64(1e-20, PREC);
    let mut dims_multiplicative = true;
    for a in 0..d {
        for bx in 0..d {
            let want = real::mul(&fr.dims[a], &fr.dims[bx]);
            let got = fr.dim_of(&fr.n[a][bx]);
            if bf_cmp(&real::sub(&want, &got).abs(), &tol) != Ordering::Less {
                dims_multiplicative = false;
                push_failure(
                    &mut failures,
                    format!(
                        "dimension additivity fails at ({}, {}): defect {:e}",
                        fr.basis[a],
                        fr.basis[bx],
                        real::sub(&want, &got).abs().to_f64()
                    ),
                );
            }
        }
    }
    let frobenius_ok = fr.conj.as_ref().map(|conj| {
        let mut ok = conj.iter().enumerate().all(|(i, &j)| conj[j] == i);
        if !ok {
            push_failure(&mut failures, "conjugation is not an involution".into());
        }
        for a in 0..d {
            for bx in 0..d {
                if fr.n[a][bx][0] != u64::from(conj[a] == bx) {
                    ok = false;
                    push_failure(
                        &mut failures,
                        format!("vacuum pairing fails at ({}, {})", fr.basis[a], fr.basis[bx]),
                    );
                }
                for cx in 0..d {
                    if fr.n[a][bx][cx] != fr.n[cx][conj[bx]][a] {
                        ok = false;
                        push_failure(
                            &mut failures,
                            format!(
                                "Frobenius symmetry fails at ({}, {}, {})",
                                fr.basis[a], fr.basis[bx], fr.basis[cx]
                            ),
                        );
                    }
                }
            }
        }
        ok
    });
    RingReport {
        unit_ok,
        associative,
        dims_multiplicative,
        frobenius_ok,
        failures,
    }
}

/// Audit report for the bimodule tables.
#[derive(Clone, Debug)]
pub struct TableReport {
    /// Every row of every table is dimension-additive to 10⁻²⁰.
    pub dimension_additive: bool,
    /// Frobenius reciprocity identities across the four tables.
    pub frobenius_ok: bool,
    /// Localized failure descriptions (capped).
    pub failures: Vec<String>,
}

impl TableReport {
    /// All checks passed.
    pub fn all_ok(&self) -> bool {
        self.dimension_additive && self.frobenius_ok
    }
}

/// Audits the bimodule tables: dimension additivity of every product row
/// and the Frobenius reciprocity identities linking the tables.
pub fn verify_tables(sys: &SectorSystems) -> TableReport {
    let t = &sys.tables;
    let tol = real::from_f64(1e-20, PREC);
    let mut failures = Vec::new();
    let mut dimension_additive = true;
    let mdim = t.mn_basis.len();
    let dim_combo = |coeffs: &[u64], dims: &[BigFloat]| {
        let mut acc = real::from_u64(0, PREC);
        for (c, d) in coeffs.iter().zip(dims) {
            if *c != 0 {
                acc = real::add(&acc, &real::mul(&real::from_u64(*c, PREC), d));
            }
        }
        acc
    };
    let mut check_row = |want: &BigFloat, got: &BigFloat, what: String| {
        if bf_cmp(&real::sub(want, got).abs(), &tol) != Ordering::Less {
            dimension_additive = false;
            push_failure(
                &mut failures,
                format!(
                    "dimension additivity fails for {what}: defect {:e}",
                    real::sub(want, got).abs().to_f64()
                ),
            );
        }
    };
    for x in 0..mdim {
        for (dsec, row) in t.mn_by_nn[x].iter().enumerate() {
            check_row(
                &real::mul(&t.mn_dims[x], &sys.delta.dims[dsec]),
                &dim_combo(row, &t.mn_dims),
                format!("{}·{}", t.mn_basis[x], sys.delta.basis[dsec]),
            );
        }
        for y in 0..mdim {
            check_row(
                &real::mul(&t.mn_dims[x], &t.mn_dims[y]),
                &dim_combo(&t.nm_mn_to_nn[x][y], &sys.delta.dims),
                format!("conj({})·{}", t.mn_basis[x], t.mn_basis[y]),
            );
            check_row(
                &real::mul(&t.mn_dims[x], &t.mn_dims[y]),
                &dim_combo(&t.mn_nm_to_mm[x][y], &sys.delta_hat.dims),
                format!("{}·conj({})", t.mn_basis[x], t.mn_basis[y]),
            );
        }
    }
    for (msec, block) in t.mm_by_mn.iter().enumerate() {
        for (x, row) in block.iter().enumerate() {
            check_row(
                &real::mul(&sys.delta_hat.dims[msec], &t.mn_dims[x]),
                &dim_combo(row, &t.mn_dims),
                format!("{}·{}", sys.delta_hat.basis[msec], t.mn_basis[x]),
            );
        }
    }

    let conj_nn = sys
        .delta
        .conj
        .as_ref()
        .expect("Δ declares a conjugation")
        .clone();
    let mut frobenius_ok = true;
    let nndim = sys.delta.dim();
    let hdim = sys.delta_hat.dim();
    for x in 0..mdim {
        for dsec in 0..nndim {
            for y in 0..mdim {
                // ⟨x·d, y⟩ = ⟨x, y·d̄⟩
                if t.mn_by_nn[x][dsec][y] != t.mn_by_nn[y][conj_nn[dsec]][x] {
                    frobenius_ok = false;
                    push_failure(
                        &mut failures,
                        format!(
                            "reciprocity fails: ⟨{}·{}, {}⟩",
                            t.mn_basis[x], sys.delta.basis[dsec], t.mn_basis[y]
                        ),
                    );
                }
                // ⟨x̄·y, d⟩ = ⟨y, x·d⟩
                if t.nm_mn_to_nn[x][y][dsec] != t.mn_by_nn[x][dsec][y] {
                    frobenius_ok = false;
                    push_failure(
                        &mut failures,
                        format!(
                            "reciprocity fails: ⟨conj({})·{}, {}⟩",
                            t.mn_basis[x], t.mn_basis[y], sys.delta.basis[dsec]
                        ),
                    );
                }
            }
        }
        for y in 0..mdim {
            for msec in 0..hdim {
                // ⟨m·x, y⟩ = ⟨m, y·x̄⟩
                if t.mm_by_mn[msec][x][y] != t.mn_nm_to_mm[y][x][msec] {
                    frobenius_ok = false;
                    push_failure(
                        &mut failures,
                        format!(
                            "reciprocity fails: ⟨{}·{}, {}⟩",
                            sys.delta_hat.basis[msec], t.mn_basis[x], t.mn_basis[y]
                        ),
                    );
                }
            }
        }
    }
    TableReport {
        dimension_additive,
        frobenius_ok,
        failures,
    }
}
