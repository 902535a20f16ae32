//! Arbitrary-precision real and complex arithmetic used for the numerical
//! side of the pipeline: embeddings of exact cyclotomic values, unitarity
//! residuals, nonlinear solving, and q-expansion evaluation.
//!
//! Reals are `astro_float::BigFloat` handled through small helpers that make
//! the precision explicit; complex values are pairs of reals.  Binary
//! operations run at the larger of the two operand precisions, so precision
//! never silently degrades through a computation.  The default precision is
//! 256 bits and can be raised with the `MODATA_PRECISION_BITS` environment
//! variable.

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed as _;
use once_cell::sync::Lazy;
use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::RwLock;

const RM: RoundingMode = RoundingMode::ToEven;

/// Default working precision in bits; `MODATA_PRECISION_BITS` overrides,
/// clamped below at 53.
pub fn default_precision() -> usize {
    static PREC: Lazy<usize> = Lazy::new(|| {
        std::env::var("MODATA_PRECISION_BITS")
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .map(|p| p.max(53))
            .unwrap_or(256)
    });
    *PREC
}

thread_local! {
    static CONSTS: RefCell<Consts> =
        RefCell::new(Consts::new().expect("constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

pub fn pi(p: usize) -> BigFloat {
    with_consts(|cc| cc.pi(p, RM))
}

fn prec_of(x: &BigFloat) -> usize {
    x.mantissa_max_bit_len().unwrap_or(default_precision())
}

fn join(a: &BigFloat, b: &BigFloat) -> usize {
    prec_of(a).max(prec_of(b))
}

/// Exact conversion of a big integer.
pub fn bf_from_bigint(n: &BigInt, p: usize) -> BigFloat {
    let (sign, digits) = n.to_u64_digits();
    let wp = p.max(64 * digits.len().max(1) + 64);
    let two64 = BigFloat::from_u128(1u128 << 64, wp);
    let mut acc = BigFloat::from_f64(0.0, wp);
    for &d in digits.iter().rev() {
        acc = acc.mul(&two64, wp, RM).add(&BigFloat::from_u64(d, wp), wp, RM);
    }
    if sign == num_bigint::Sign::Minus {
        acc = acc.neg();
    }
    let mut acc = acc;
    acc.set_precision(p, RM).expect("set_precision");
    acc
}

/// Correctly-rounded conversion of a rational.
pub fn bf_from_ratio(q: &BigRational, p: usize) -> BigFloat {
    let num = bf_from_bigint(q.numer(), p + 32);
    let den = bf_from_bigint(q.denom(), p + 32);
    let mut v = num.div(&den, p + 32, RM);
    v.set_precision(p, RM).expect("set_precision");
    v
}

/// 2^k at precision p (exact).
pub fn pow2(k: i64, p: usize) -> BigFloat {
    let mut one = BigFloat::from_f64(1.0, p);
    one.set_exponent((k + 1) as astro_float::Exponent);
    one
}

/// Nearest f64 (approximate; fine for display and coarse phases).
pub trait ToF64 {
    fn to_f64(&self) -> f64;
}

impl ToF64 for BigFloat {
    fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        if self.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((words, _n, sign, e, _)) = self.as_raw_parts() else {
            return f64::NAN;
        };
        let wlen = words.len();
        let mut frac = 0.0f64;
        if wlen >= 1 {
            frac += words[wlen - 1] as f64 / 2f64.powi(64);
        }
        if wlen >= 2 {
            frac += words[wlen - 2] as f64 / 2f64.powi(128);
        }
        let mut v = frac * 2f64.powi(e);
        if sign == Sign::Neg {
            v = -v;
        }
        v
    }
}

/// Total order on finite values (panics on NaN, which never arises here).
pub fn bf_cmp(a: &BigFloat, b: &BigFloat) -> Ordering {
    match a.cmp(b) {
        Some(c) if c < 0 => Ordering::Less,
        Some(c) if c > 0 => Ordering::Greater,
        Some(_) => Ordering::Equal,
        None => panic!("NaN in comparison"),
    }
}

/// Decimal rendering with roughly `digits` significant digits.
pub fn bf_to_decimal(x: &BigFloat, digits: usize) -> String {
    if x.is_zero() {
        return "0".into();
    }
    // reduce precision so the formatter emits about the right digit count
    let bits = ((digits as f64) * 3.322).ceil() as usize + 8;
    let mut y = x.clone();
    if prec_of(&y) > bits {
        y.set_precision(bits, RM).ok();
    }
    with_consts(|cc| y.format(Radix::Dec, RM, cc))
        .unwrap_or_else(|_| "?".into())
}

/// exp(iθ) for θ = 2πk/L, cached per (L, k, precision).
pub fn unit_root(order: u64, k: u64, p: usize) -> BigComplex {
    static CACHE: Lazy<RwLock<HashMap<(u64, u64, usize), BigComplex>>> =
        Lazy::new(|| RwLock::new(HashMap::new()));
    let key = (order, k % order, p);
    if let Some(z) = CACHE.read().unwrap().get(&key) {
        return z.clone();
    }
    let wp = p + 32;
    let theta = pi(wp)
        .mul(&BigFloat::from_u64(2 * key.1, wp), wp, RM)
        .div(&BigFloat::from_u64(order, wp), wp, RM);
    let z = with_consts(|cc| {
        let mut re = theta.cos(wp, RM, cc);
        let mut im = theta.sin(wp, RM, cc);
        re.set_precision(p, RM).ok();
        im.set_precision(p, RM).ok();
        BigComplex { re, im }
    });
    CACHE.write().unwrap().insert(key, z.clone());
    z
}

/// A complex number with explicit-precision real and imaginary parts.
#[derive(Clone, Debug)]
pub struct BigComplex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl BigComplex {
    pub fn zero(p: usize) -> Self {
        BigComplex {
            re: BigFloat::from_f64(0.0, p),
            im: BigFloat::from_f64(0.0, p),
        }
    }

    pub fn one(p: usize) -> Self {
        BigComplex {
            re: BigFloat::from_f64(1.0, p),
            im: BigFloat::from_f64(0.0, p),
        }
    }

    pub fn from_f64(re: f64, im: f64, p: usize) -> Self {
        BigComplex {
            re: BigFloat::from_f64(re, p),
            im: BigFloat::from_f64(im, p),
        }
    }

    pub fn real(re: BigFloat) -> Self {
        let p = prec_of(&re);
        BigComplex {
            re,
            im: BigFloat::from_f64(0.0, p),
        }
    }

    pub fn precision(&self) -> usize {
        prec_of(&self.re).max(prec_of(&self.im))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let p = self.precision().max(rhs.precision());
        BigComplex {
            re: self.re.add(&rhs.re, p, RM),
            im: self.im.add(&rhs.im, p, RM),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let p = self.precision().max(rhs.precision());
        BigComplex {
            re: self.re.sub(&rhs.re, p, RM),
            im: self.im.sub(&rhs.im, p, RM),
        }
    }

    pub fn neg(&self) -> Self {
        BigComplex {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let p = self.precision().max(rhs.precision());
        let ac = self.re.mul(&rhs.re, p, RM);
        let bd = self.im.mul(&rhs.im, p, RM);
        let ad = self.re.mul(&rhs.im, p, RM);
        let bc = self.im.mul(&rhs.re, p, RM);
        BigComplex {
            re: ac.sub(&bd, p, RM),
            im: ad.add(&bc, p, RM),
        }
    }

    pub fn conj(&self) -> Self {
        BigComplex {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    pub fn scale_bf(&self, s: &BigFloat) -> Self {
        let p = self.precision().max(prec_of(s));
        BigComplex {
            re: self.re.mul(s, p, RM),
            im: self.im.mul(s, p, RM),
        }
    }

    pub fn scale_ratio(&self, q: &BigRational) -> Self {
        if q.is_negative() || q.is_positive() {
            let s = bf_from_ratio(q, self.precision());
            self.scale_bf(&s)
        } else {
            BigComplex::zero(self.precision())
        }
    }

    pub fn abs2(&self) -> BigFloat {
        let p = self.precision();
        let rr = self.re.mul(&self.re, p, RM);
        let ii = self.im.mul(&self.im, p, RM);
        rr.add(&ii, p, RM)
    }

    pub fn abs(&self) -> BigFloat {
        let p = self.precision();
        self.abs2().sqrt(p, RM)
    }

    pub fn div(&self, rhs: &Self) -> Self {
        let p = self.precision().max(rhs.precision());
        let d = rhs.abs2();
        let num = self.mul(&rhs.conj());
        BigComplex {
            re: num.re.div(&d, p, RM),
            im: num.im.div(&d, p, RM),
        }
    }

    pub fn inv(&self) -> Self {
        BigComplex::one(self.precision()).div(self)
    }

    /// exp(iθ).
    pub fn cis(theta: &BigFloat, p: usize) -> Self {
        with_consts(|cc| BigComplex {
            re: theta.cos(p, RM, cc),
            im: theta.sin(p, RM, cc),
        })
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

/// Convenience real-arithmetic helpers with explicit precision.
pub mod real {
    use super::*;

    pub fn add(a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, join(a, b), RM)
    }
    pub fn sub(a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, join(a, b), RM)
    }
    pub fn mul(a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, join(a, b), RM)
    }
    pub fn div(a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, join(a, b), RM)
    }
    pub fn sqrt(a: &BigFloat) -> BigFloat {
        a.sqrt(prec_of(a), RM)
    }
    pub fn from_u64(x: u64, p: usize) -> BigFloat {
        BigFloat::from_u64(x, p)
    }
    pub fn from_i64(x: i64, p: usize) -> BigFloat {
        BigFloat::from_i64(x, p)
    }
    pub fn from_f64(x: f64, p: usize) -> BigFloat {
        BigFloat::from_f64(x, p)
    }
    pub fn cos(a: &BigFloat) -> BigFloat {
        with_consts(|cc| a.cos(prec_of(a), RM, cc))
    }
    pub fn sin(a: &BigFloat) -> BigFloat {
        with_consts(|cc| a.sin(prec_of(a), RM, cc))
    }
    pub fn exp(a: &BigFloat) -> BigFloat {
        with_consts(|cc| a.exp(prec_of(a), RM, cc))
    }
    pub fn ln(a: &BigFloat) -> BigFloat {
        with_consts(|cc| a.ln(prec_of(a), RM, cc))
    }
    pub fn atan2(y: &BigFloat, x: &BigFloat) -> BigFloat {
        let p = join(x, y);
        if x.is_zero() && y.is_zero() {
            return BigFloat::from_f64(0.0, p);
        }
        let pi_p = pi(p);
        if x.is_zero() {
            let half = pi_p.div(&BigFloat::from_u64(2, p), p, RM);
            return if y.is_negative() { half.neg() } else { half };
        }
        let base = with_consts(|cc| y.div(x, p, RM).atan(p, RM, cc));
        if x.is_negative() {
            if y.is_negative() {
                base.sub(&pi_p, p, RM)
            } else {
                base.add(&pi_p, p, RM)
            }
        } else {
            base
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn bigint_conversion_is_exact() {
        let n = BigInt::parse_bytes(b"340282366920938463463374607431768211507", 10).unwrap();
        let x = bf_from_bigint(&n, 256);
        let back = x.sub(&bf_from_bigint(&(n.clone() - 1), 256), 256, RM);
        assert_eq!(back.to_f64(), 1.0);
    }

    #[test]
    fn ratio_conversion() {
        let q = BigRational::new(BigInt::from(1), BigInt::from(3));
        let x = bf_from_ratio(&q, 128);
        assert!((x.to_f64() - 1.0 / 3.0).abs() < 1e-15);
        let one = BigRational::one();
        assert_eq!(bf_from_ratio(&one, 64).to_f64(), 1.0);
    }

    #[test]
    fn unit_roots_lie_on_circle() {
        for (l, k) in [(3u64, 1u64), (7, 3), (12, 5), (55080, 12345)] {
            let z = unit_root(l, k, 192);
            let r = z.abs();
            assert!((r.to_f64() - 1.0).abs() < 1e-40, "({}, {})", l, k);
        }
    }

    #[test]
    fn complex_field_ops() {
        let a = BigComplex::from_f64(1.5, -2.25, 128);
        let b = BigComplex::from_f64(-0.5, 3.0, 128);
        let prod = a.mul(&b);
        let (re, im) = prod.to_f64_pair();
        assert!((re - (1.5 * -0.5 - -2.25 * 3.0)).abs() < 1e-14);
        assert!((im - (1.5 * 3.0 + -2.25 * -0.5)).abs() < 1e-14);
        let quot = prod.div(&b);
        let diff = quot.sub(&a).abs();
        assert!(diff.to_f64() < 1e-30);
    }

    #[test]
    fn pow2_and_thresholds() {
        assert_eq!(pow2(-10, 64).to_f64(), 2f64.powi(-10));
        assert_eq!(pow2(20, 64).to_f64(), 2f64.powi(20));
    }

    #[test]
    fn atan2_quadrants() {
        let p = 96;
        for (y, x, want) in [
            (1.0, 1.0, std::f64::consts::FRAC_PI_4),
            (1.0, -1.0, 3.0 * std::f64::consts::FRAC_PI_4),
            (-1.0, -1.0, -3.0 * std::f64::consts::FRAC_PI_4),
            (-1.0, 1.0, -std::f64::consts::FRAC_PI_4),
            (1.0, 0.0, std::f64::consts::FRAC_PI_2),
        ] {
            let got = real::atan2(&real::from_f64(y, p), &real::from_f64(x, p));
            assert!((got.to_f64() - want).abs() < 1e-14, "atan2({y}, {x})");
        }
    }

    #[test]
    fn decimal_preview() {
        let x = real::from_f64(0.125, 128);
        let s = bf_to_decimal(&x, 10);
        assert!(s.contains("1.25") || s.contains("0.125"), "{}", s);
    }
}
