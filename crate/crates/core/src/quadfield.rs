//! Exact arithmetic in real quadratic fields K = Q(√d).
//!
//! Elements of the ring of integers are stored over the integral basis
//! {1, ω} with ω = (1+√d)/2 when d ≡ 1 (mod 4) and ω = √d otherwise, so the
//! half-integral units of d ≡ 1 (mod 4) fields are exact. √d always means the
//! positive real root.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::arith;
use crate::error::{Error, Result};

/// How a rational prime decomposes in K.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

/// An element x + yω of the ring of integers of Q(√d).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadInt {
    pub x: BigInt,
    pub y: BigInt,
    d: u64,
}

impl QuadInt {
    pub fn new(d: u64, x: impl Into<BigInt>, y: impl Into<BigInt>) -> Self {
        QuadInt { x: x.into(), y: y.into(), d }
    }

    pub fn from_int(d: u64, n: impl Into<BigInt>) -> Self {
        Self::new(d, n, 0)
    }

    pub fn zero(d: u64) -> Self {
        Self::new(d, 0, 0)
    }

    pub fn one(d: u64) -> Self {
        Self::new(d, 1, 0)
    }

    /// The positive square root of d in ω-coordinates.
    pub fn sqrt_d(d: u64) -> Self {
        if d % 4 == 1 {
            Self::new(d, -1, 2)
        } else {
            Self::new(d, 0, 1)
        }
    }

    /// a + b√d, for integers a, b.
    pub fn from_sqrt_coords(d: u64, a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        let (a, b) = (a.into(), b.into());
        if d % 4 == 1 {
            Self::new(d, &a - &b, &b * 2)
        } else {
            Self::new(d, a, b)
        }
    }

    /// (a2, b2) with self = (a2 + b2·√d)/2.
    pub fn sqrt_coords_halved(&self) -> (BigInt, BigInt) {
        if self.half() {
            (&self.x * 2 + &self.y, self.y.clone())
        } else {
            (&self.x * 2, &self.y * 2)
        }
    }

    /// (a, b) with self = a + b√d when both are integers.
    pub fn sqrt_coords(&self) -> Option<(BigInt, BigInt)> {
        let (a2, b2) = self.sqrt_coords_halved();
        if a2.is_even() && b2.is_even() {
            Some((a2 / 2, b2 / 2))
        } else {
            None
        }
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    fn half(&self) -> bool {
        self.d % 4 == 1
    }

    fn omega_sq_const(&self) -> BigInt {
        if self.half() {
            BigInt::from((self.d - 1) / 4)
        } else {
            BigInt::from(self.d)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.x.is_one() && self.y.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.y.is_zero()
    }

    pub fn conj(&self) -> Self {
        if self.half() {
            Self::new(self.d, &self.x + &self.y, -&self.y)
        } else {
            Self::new(self.d, self.x.clone(), -&self.y)
        }
    }

    pub fn norm(&self) -> BigInt {
        if self.half() {
            &self.x * &self.x + &self.x * &self.y - &self.y * &self.y * self.omega_sq_const()
        } else {
            &self.x * &self.x - &self.y * &self.y * self.omega_sq_const()
        }
    }

    pub fn trace(&self) -> BigInt {
        if self.half() {
            &self.x * 2 + &self.y
        } else {
            &self.x * 2
        }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(self.d, &self.x * k, &self.y * k)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.d);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn is_unit(&self) -> bool {
        self.norm().abs().is_one()
    }

    /// Exact quotient self / other when it lies in the ring.
    pub fn exact_div(&self, other: &QuadInt) -> Option<QuadInt> {
        let n = other.norm();
        if n.is_zero() {
            return None;
        }
        let num = self * &other.conj();
        let (qx, rx) = num.x.div_rem(&n);
        let (qy, ry) = num.y.div_rem(&n);
        if rx.is_zero() && ry.is_zero() {
            Some(Self::new(self.d, qx, qy))
        } else {
            None
        }
    }

    /// Inverse of a unit.
    pub fn unit_inverse(&self) -> Option<QuadInt> {
        Self::one(self.d).exact_div(self)
    }

    /// Divisibility by a rational integer.
    pub fn divisible_by_int(&self, m: &BigInt) -> bool {
        (&self.x % m).is_zero() && (&self.y % m).is_zero()
    }

    /// Sign under the embedding √d ↦ +√d (or −√d when `conjugate`).
    pub fn sign(&self, conjugate: bool) -> Ordering {
        let (a2, mut b2) = self.sqrt_coords_halved();
        if conjugate {
            b2 = -b2;
        }
        // sign of a2 + b2·√d
        match (a2.sign(), b2.sign()) {
            (num_bigint::Sign::NoSign, s) | (s, num_bigint::Sign::NoSign) => sign_to_ord(s),
            (sa, sb) if sa == sb => sign_to_ord(sa),
            (sa, _) => {
                let lhs = &a2 * &a2;
                let rhs = &b2 * &b2 * BigInt::from(self.d);
                match lhs.cmp(&rhs) {
                    Ordering::Greater => sign_to_ord(sa),
                    Ordering::Less => sign_to_ord(sa).reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn is_totally_positive(&self) -> bool {
        self.sign(false) == Ordering::Greater && self.sign(true) == Ordering::Greater
    }

    /// Floating-point value under the embedding √d ↦ +√d.
    pub fn to_f64(&self) -> f64 {
        let (a2, b2) = self.sqrt_coords_halved();
        let a = a2.to_f64().unwrap_or(f64::NAN);
        let b = b2.to_f64().unwrap_or(f64::NAN);
        (a + b * (self.d as f64).sqrt()) / 2.0
    }

    /// Exact square root in the ring, if self is a perfect square.
    ///
    /// If w² = z then N(w) = s with s² = N(z), and Tr(w)·w = z + s. The
    /// trace is recovered from Tr(w)² = Tr(z) + 2s.
    pub fn sqrt_exact(&self) -> Option<QuadInt> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let n = arith::exact_sqrt(&self.norm())?;
        let tz = self.trace();
        for s in [n.clone(), -n.clone()] {
            let t2 = &tz + &s * 2;
            let Some(t) = arith::exact_sqrt(&t2) else { continue };
            if t.is_zero() {
                // trace-zero root: w = k√d, w² = k²d rational
                if self.is_rational() && (&self.x % BigInt::from(self.d)).is_zero() {
                    if let Some(k) = arith::exact_sqrt(&(&self.x / BigInt::from(self.d))) {
                        let w = QuadInt::sqrt_d(self.d).scale(&k);
                        if &w * &w == *self {
                            return Some(w);
                        }
                    }
                }
                continue;
            }
            let num = self + &QuadInt::from_int(self.d, s.clone());
            if num.divisible_by_int(&t) {
                let w = QuadInt::new(self.d, &num.x / &t, &num.y / &t);
                if &w * &w == *self {
                    return Some(w);
                }
            }
        }
        None
    }

    pub fn is_square(&self) -> bool {
        self.sqrt_exact().is_some()
    }
}

fn sign_to_ord(s: num_bigint::Sign) -> Ordering {
    match s {
        num_bigint::Sign::Minus => Ordering::Less,
        num_bigint::Sign::NoSign => Ordering::Equal,
        num_bigint::Sign::Plus => Ordering::Greater,
    }
}

impl<'a> Add<&'a QuadInt> for &'a QuadInt {
    type Output = QuadInt;
    fn add(self, o: &QuadInt) -> QuadInt {
        debug_assert_eq!(self.d, o.d);
        QuadInt::new(self.d, &self.x + &o.x, &self.y + &o.y)
    }
}

impl<'a> Sub<&'a QuadInt> for &'a QuadInt {
    type Output = QuadInt;
    fn sub(self, o: &QuadInt) -> QuadInt {
        debug_assert_eq!(self.d, o.d);
        QuadInt::new(self.d, &self.x - &o.x, &self.y - &o.y)
    }
}

impl<'a> Mul<&'a QuadInt> for &'a QuadInt {
    type Output = QuadInt;
    fn mul(self, o: &QuadInt) -> QuadInt {
        debug_assert_eq!(self.d, o.d);
        let c = self.omega_sq_const();
        let yy = &self.y * &o.y;
        let x = &self.x * &o.x + &yy * &c;
        let mut y = &self.x * &o.y + &self.y * &o.x;
        if self.half() {
            y += &yy;
        }
        QuadInt::new(self.d, x, y)
    }
}

impl Neg for &QuadInt {
    type Output = QuadInt;
    fn neg(self) -> QuadInt {
        QuadInt::new(self.d, -&self.x, -&self.y)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<QuadInt> for QuadInt {
            type Output = QuadInt;
            fn $m(self, o: QuadInt) -> QuadInt {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for QuadInt {
    type Output = QuadInt;
    fn neg(self) -> QuadInt {
        -&self
    }
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a2, b2) = self.sqrt_coords_halved();
        let halves = !(a2.is_even() && b2.is_even());
        let (a, b) = if halves { (a2, b2) } else { (a2 / 2, b2 / 2) };
        let body = if b.is_zero() {
            a.to_string()
        } else {
            let sq = format!("sqrt({})", self.d);
            let bpart = if b.abs().is_one() { sq.clone() } else { format!("{}*{}", b.abs(), sq) };
            match (a.is_zero(), b.is_negative()) {
                (true, false) => bpart,
                (true, true) => format!("-{bpart}"),
                (false, false) => format!("{a} + {bpart}"),
                (false, true) => format!("{a} - {bpart}"),
            }
        };
        if halves {
            write!(f, "({body})/2")
        } else {
            f.write_str(&body)
        }
    }
}

impl Serialize for QuadInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("QuadInt", 3)?;
        st.serialize_field("x", &self.x.to_string())?;
        st.serialize_field("y", &self.y.to_string())?;
        st.serialize_field("display", &self.to_string())?;
        st.end()
    }
}

/// A prime ideal above a rational prime q.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeIdeal {
    pub q: u64,
    pub residue_degree: u32,
    /// ω mod this prime, for residue degree 1.
    pub omega_residue: Option<u64>,
    /// √d mod this prime, for odd q of residue degree 1.
    pub sqrt_d_residue: Option<u64>,
    pub generators: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeDecomposition {
    pub q: u64,
    pub kind: Splitting,
    pub ideals: Vec<PrimeIdeal>,
}

/// Structure data of K = Q(√d).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuadField {
    pub d: u64,
    pub disc: u64,
    pub two_splitting: Splitting,
    pub ramified_odd_primes: Vec<u64>,
    /// Odd prime divisors of d by residue mod 8 (keys 1, 3, 5, 7).
    pub qi: BTreeMap<u8, Vec<u64>>,
}

impl QuadField {
    pub fn q(&self, i: u8) -> &[u64] {
        self.qi.get(&i).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn half(&self) -> bool {
        self.d % 4 == 1
    }

    pub fn elt(&self, x: impl Into<BigInt>, y: impl Into<BigInt>) -> QuadInt {
        QuadInt::new(self.d, x, y)
    }

    pub fn int(&self, n: impl Into<BigInt>) -> QuadInt {
        QuadInt::from_int(self.d, n)
    }

    pub fn sqrt_d(&self) -> QuadInt {
        QuadInt::sqrt_d(self.d)
    }

    /// D/4 when 4 | D; this is the radicand d itself for d ≢ 1 (mod 4).
    pub fn d_tilde(&self) -> Option<u64> {
        if self.half() {
            None
        } else {
            Some(self.d)
        }
    }

    /// v_2(D): 0, 2 or 3.
    pub fn v2_disc(&self) -> u32 {
        self.disc.trailing_zeros()
    }

    /// Constant c with ω² = (1 if half else 0)·ω + c.
    pub fn omega_sq_const(&self) -> i64 {
        if self.half() {
            ((self.d - 1) / 4) as i64
        } else {
            self.d as i64
        }
    }

    /// Roots of the minimal polynomial of ω modulo an odd prime q.
    fn omega_roots_mod(&self, q: u64) -> Vec<u64> {
        let c = self.omega_sq_const().rem_euclid(q as i64) as u64;
        let lin = if self.half() { 1 } else { 0 };
        (0..q).filter(|&r| (arith::mul_mod(r, r, q) + q * 2 - (lin * r) % q - c).is_multiple_of(q)).collect()
    }

    pub fn splitting_of(&self, q: u64) -> Splitting {
        match arith::kronecker_prime(self.disc as i64, q) {
            1 => Splitting::Split,
            -1 => Splitting::Inert,
            _ => Splitting::Ramified,
        }
    }

    /// Splitting type of q together with generators of the primes above it.
    pub fn splitting_and_trace_data(&self, q: u64) -> Result<PrimeDecomposition> {
        if !arith::is_prime_u64(q) {
            return Err(Error::Field(format!("{q} is not prime")));
        }
        let kind = self.splitting_of(q);
        let sq = format!("sqrt({})", self.d);
        let w = if self.half() { "w".to_string() } else { sq.clone() };
        let ideals = if q == 2 {
            match kind {
                Splitting::Inert => vec![PrimeIdeal {
                    q,
                    residue_degree: 2,
                    omega_residue: None,
                    sqrt_d_residue: None,
                    generators: "<2>".into(),
                }],
                Splitting::Ramified => {
                    let gen = if self.d.is_multiple_of(2) { sq.clone() } else { format!("1 + {sq}") };
                    vec![PrimeIdeal {
                        q,
                        residue_degree: 1,
                        omega_residue: Some(self.d % 2),
                        sqrt_d_residue: None,
                        generators: format!("<2, {gen}>"),
                    }]
                }
                Splitting::Split => vec![
                    PrimeIdeal {
                        q,
                        residue_degree: 1,
                        omega_residue: Some(0),
                        sqrt_d_residue: None,
                        generators: format!("<2, {w}>"),
                    },
                    PrimeIdeal {
                        q,
                        residue_degree: 1,
                        omega_residue: Some(1),
                        sqrt_d_residue: None,
                        generators: format!("<2, {w} - 1>"),
                    },
                ],
            }
        } else {
            let to_sqrt = |r: u64| -> u64 {
                if self.half() {
                    (2 * r + q - 1) % q
                } else {
                    r
                }
            };
            match kind {
                Splitting::Inert => vec![PrimeIdeal {
                    q,
                    residue_degree: 2,
                    omega_residue: None,
                    sqrt_d_residue: None,
                    generators: format!("<{q}>"),
                }],
                Splitting::Ramified => {
                    let r = self.omega_roots_mod(q)[0];
                    vec![PrimeIdeal {
                        q,
                        residue_degree: 1,
                        omega_residue: Some(r),
                        sqrt_d_residue: Some(0),
                        generators: format!("<{q}, {sq}>"),
                    }]
                }
                Splitting::Split => self
                    .omega_roots_mod(q)
                    .into_iter()
                    .map(|r| {
                        let s = to_sqrt(r);
                        PrimeIdeal {
                            q,
                            residue_degree: 1,
                            omega_residue: Some(r),
                            sqrt_d_residue: Some(s),
                            generators: format!("<{q}, {sq} - {s}>"),
                        }
                    })
                    .collect(),
            }
        };
        Ok(PrimeDecomposition { q, kind, ideals })
    }
}

/// Build the field data for a squarefree radicand d > 1.
pub fn make_field(d: u64) -> Result<QuadField> {
    if d <= 1 {
        return Err(Error::Field(format!("d = {d} must exceed 1")));
    }
    if !arith::is_squarefree(d) {
        return Err(Error::Field(format!("d = {d} is not squarefree")));
    }
    let disc = if d % 4 == 1 { d } else { 4 * d };
    let two_splitting = match d % 8 {
        1 => Splitting::Split,
        5 => Splitting::Inert,
        _ => Splitting::Ramified,
    };
    let odd = arith::odd_prime_divisors(d);
    let mut qi: BTreeMap<u8, Vec<u64>> = [1u8, 3, 5, 7].iter().map(|&i| (i, Vec::new())).collect();
    for &p in &odd {
        qi.get_mut(&((p % 8) as u8)).expect("odd residue").push(p);
    }
    Ok(QuadField { d, disc, two_splitting, ramified_odd_primes: odd, qi })
}

/// The fundamental unit ε > 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FundamentalUnit {
    pub value: QuadInt,
    pub norm: i8,
    pub totally_positive: bool,
}

/// Smallest unit > 1, from the continued fraction of ω.
///
/// The expansion of (P + √d)/Q starts at (0, 1) for ω = √d and at (1, 2)
/// for ω = (1+√d)/2. The first convergent h/k whose associated element has
/// norm ±1 gives ε.
pub fn fundamental_unit(field: &QuadField) -> FundamentalUnit {
    let d = field.d;
    let dd = BigInt::from(d);
    let s = BigInt::from(num_integer::Roots::sqrt(&d));
    let (mut p, mut q) = if field.half() { (BigInt::one(), BigInt::from(2)) } else { (BigInt::zero(), BigInt::one()) };
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    loop {
        let a = (&p + &s).div_floor(&q);
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let u = if field.half() { field.elt(&h1 - &k1, k1.clone()) } else { field.elt(h1.clone(), k1.clone()) };
        let n = u.norm();
        if n.abs().is_one() {
            let norm = if n.is_positive() { 1 } else { -1 };
            let totally_positive = u.is_totally_positive();
            return FundamentalUnit { value: u, norm, totally_positive };
        }
        p = &a * &q - &p;
        q = (&dd - &p * &p) / &q;
    }
}

impl FundamentalUnit {
    /// Totally positive generator of the norm-one units modulo ±1: ε itself
    /// when it has norm +1 (sign normalized), else ε².
    pub fn totally_positive_unit(&self) -> QuadInt {
        if self.norm == 1 {
            if self.value.is_totally_positive() {
                self.value.clone()
            } else {
                -&self.value
            }
        } else {
            self.value.pow(2)
        }
    }
}
