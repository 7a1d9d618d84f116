//! The Frey curve E_(A,B): y² = x³ + 4A·x² + 2(A² + B√d)·x.
//!
//! Reductions are counted naively over F_q and F_{q²}; that is all the
//! sieve needs at q ≤ 100. Division-polynomial constants and the isogeny
//! to the conjugate curve are checked as exact polynomial identities over
//! O_K.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::arith::{is_squarefree, legendre, sqrt_mod_all};
use crate::error::{Error, Result};
use crate::hecke::{build_nebentypus, NebentypusSpec};
use crate::poly::{discriminant, Poly};
use crate::quadfield::{make_field, QuadField, QuadInt, Splitting};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FreyCurve {
    pub a: i64,
    pub b: i64,
    pub d: u64,
    /// Coefficient of x²: 4A.
    pub a2: QuadInt,
    /// Coefficient of x: 2(A² + B√d).
    pub a4: QuadInt,
}

/// An element a + b√d of K with rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KNumber {
    pub a: BigRational,
    pub b: BigRational,
    pub d: u64,
}

impl KNumber {
    /// num/den for integral num, den ≠ 0.
    pub fn from_quotient(num: &QuadInt, den: &QuadInt) -> Result<Self> {
        let n = den.norm();
        if n.is_zero() {
            return Err(Error::Frey("division by zero".into()));
        }
        let (x, y) = (num * &den.conj()).sqrt_coords_halved();
        let two_n: BigInt = &n * 2;
        Ok(KNumber { a: BigRational::new(x, two_n.clone()), b: BigRational::new(y, two_n), d: num.d() })
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        KNumber { a: self.a.clone(), b: -self.b.clone(), d: self.d }
    }
}

impl fmt::Display for KNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let sign = if self.b.is_negative() { "-" } else { "+" };
        let b = self.b.abs();
        let coef = if b.is_one() { String::new() } else { format!("{b}*") };
        if self.a.is_zero() {
            let s = if self.b.is_negative() { "-" } else { "" };
            write!(f, "{s}{coef}sqrt({})", self.d)
        } else {
            write!(f, "{} {sign} {coef}sqrt({})", self.a, self.d)
        }
    }
}

impl Serialize for KNumber {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn build_curve(a: i64, b: i64, field: &QuadField) -> Result<FreyCurve> {
    if a == 0 && b == 0 {
        return Err(Error::Frey("(A, B) = (0, 0)".into()));
    }
    if a.gcd(&b) != 1 {
        return Err(Error::Frey(format!("(A, B) = ({a}, {b}) is not primitive")));
    }
    let d = field.d;
    let a2 = field.int(4 * a as i128);
    let a4 = QuadInt::from_sqrt_coords(d, BigInt::from(2 * a as i128 * a as i128), BigInt::from(2 * b as i128));
    let curve = FreyCurve { a, b, d, a2, a4 };
    let expect = BigInt::from(1u32 << 18) * (BigInt::from(a).pow(4) - BigInt::from(d) * BigInt::from(b).pow(2)).pow(3);
    if curve.discriminant().norm() != expect {
        return Err(Error::Frey("discriminant norm identity failed".into()));
    }
    Ok(curve)
}

impl FreyCurve {
    /// 16·a4²·(a2² − 4a4) = 2⁹(A²+B√d)²(A²−B√d).
    pub fn discriminant(&self) -> QuadInt {
        let t = &(&self.a2 * &self.a2) - &self.a4.scale(&BigInt::from(4));
        (&(&self.a4 * &self.a4) * &t).scale(&BigInt::from(16))
    }

    /// j = 256(a2² − 3a4)³ / (a4²(a2² − 4a4)).
    pub fn j_invariant(&self) -> Result<KNumber> {
        let sq = &self.a2 * &self.a2;
        let c = &sq - &self.a4.scale(&BigInt::from(3));
        let num = c.pow(3).scale(&BigInt::from(256));
        let den = &(&self.a4 * &self.a4) * &(&sq - &self.a4.scale(&BigInt::from(4)));
        KNumber::from_quotient(&num, &den)
    }

    /// The conjugate curve coefficient 2(A² − B√d).
    pub fn a4_conj(&self) -> QuadInt {
        self.a4.conj()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    Good,
    Multiplicative,
    Additive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceResult {
    pub q: u64,
    pub prime: String,
    pub residue_degree: u32,
    pub splitting: Splitting,
    pub reduction: Reduction,
    /// q^f + 1 − #E(F_{q^f}); for multiplicative reduction this is ±1.
    pub a: Option<i64>,
}

fn md(x: i64, q: u64) -> u64 {
    x.rem_euclid(q as i64) as u64
}

/// −Σ (f(x)/q) for f = x³ + a x² + b x over F_q.
fn trace_fq(a: u64, b: u64, q: u64) -> i64 {
    let leg: Vec<i64> = (0..q).map(|r| legendre(r as i64, q) as i64).collect();
    let mut s = 0i64;
    for x in 0..q {
        let fx = (((x * x % q) * x) % q + (a * x % q) * x % q + b * x % q) % q;
        s += leg[fx as usize];
    }
    -s
}

/// Arithmetic in F_q[t]/(t² − n).
#[derive(Clone, Copy)]
struct Fq2 {
    q: u64,
    n: u64,
}

impl Fq2 {
    fn mul(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        let q = self.q;
        ((x.0 * y.0 + self.n * (x.1 * y.1 % q)) % q, (x.0 * y.1 + x.1 * y.0) % q)
    }
    fn add(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        ((x.0 + y.0) % self.q, (x.1 + y.1) % self.q)
    }
    fn norm(&self, x: (u64, u64)) -> u64 {
        let q = self.q;
        (x.0 * x.0 % q + q * q - self.n * (x.1 * x.1 % q) % q) % q
    }
}

fn least_nonresidue(q: u64) -> u64 {
    (2..q).find(|&n| legendre(n as i64, q) == -1).expect("odd prime has a non-residue")
}

/// Trace over F_{q²} for f = x³ + a x² + b x, a ∈ F_q, b ∈ F_{q²}.
fn trace_fq2(a: u64, b: (u64, u64), k: Fq2) -> i64 {
    let q = k.q;
    let leg: Vec<i64> = (0..q).map(|r| legendre(r as i64, q) as i64).collect();
    let mut s = 0i64;
    for u in 0..q {
        for v in 0..q {
            let x = (u, v);
            let x2 = k.mul(x, x);
            let inner = k.add(k.add(x2, k.mul((a, 0), x)), b);
            let fx = k.mul(inner, x);
            // quadratic character of F_{q²} is the Legendre symbol of the norm
            s += leg[k.norm(fx) as usize];
        }
    }
    -s
}

fn classify_disc(disc_zero: bool, a_zero_and_b_zero: bool) -> Reduction {
    match (disc_zero, a_zero_and_b_zero) {
        (false, _) => Reduction::Good,
        (true, true) => Reduction::Additive,
        (true, false) => Reduction::Multiplicative,
    }
}

/// Reduction type and trace at each prime above the odd prime q.
pub fn reduce_and_trace(curve: &FreyCurve, field: &QuadField, q: u64) -> Result<Vec<TraceResult>> {
    if q.is_multiple_of(2) {
        return Err(Error::Frey("q must be odd".into()));
    }
    let dec = field.splitting_and_trace_data(q)?;
    let (a, b) = (curve.a, curve.b);
    let mut out = Vec::new();
    match dec.kind {
        Splitting::Ramified | Splitting::Split => {
            for ideal in &dec.ideals {
                let s = ideal.sqrt_d_residue.unwrap_or(0) as i64;
                let a2 = md(4 * a, q);
                let a4 = md(2 * (a * a + s * b), q);
                let conj = md(a * a - s * b, q);
                let disc_zero = a4 == 0 || conj == 0;
                let red = classify_disc(disc_zero, a2 == 0 && a4 == 0);
                let t = (red != Reduction::Additive).then(|| trace_fq(a2, a4, q));
                out.push(TraceResult {
                    q,
                    prime: ideal.generators.clone(),
                    residue_degree: 1,
                    splitting: dec.kind,
                    reduction: red,
                    a: t,
                });
            }
        }
        Splitting::Inert => {
            let n = least_nonresidue(q);
            let k = Fq2 { q, n };
            // √d = c·t with c² n = d
            let dn = (md(field.d as i64, q) * crate::arith::pow_mod(n, q - 2, q)) % q;
            let c = *sqrt_mod_all(dn as i64, q).iter().min().expect("d/n is a residue") as i64;
            let a2 = md(4 * a, q);
            let a4 = (md(2 * a * a, q), md(2 * c * b, q));
            let conj = (md(a * a, q), md(-c * b, q));
            let disc_zero = a4 == (0, 0) || conj == (0, 0);
            let red = classify_disc(disc_zero, a2 == 0 && a4 == (0, 0));
            let t = (red != Reduction::Additive).then(|| trace_fq2(a2, a4, k));
            out.push(TraceResult {
                q,
                prime: dec.ideals.first().map(|i| i.generators.clone()).unwrap_or_default(),
                residue_degree: 2,
                splitting: dec.kind,
                reduction: red,
                a: t,
            });
        }
    }
    Ok(out)
}

/// Traces of E_(A,B) at primes above q over all (A, B) mod q.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceSet {
    pub q: u64,
    pub splitting: Splitting,
    pub residue_degree: u32,
    /// Traces at primes of good reduction.
    pub good: BTreeSet<i64>,
    /// Some residue pair gives multiplicative reduction.
    pub multiplicative_possible: bool,
    /// Some residue pair gives additive reduction. Such pairs cannot come
    /// from a primitive solution (they force q | A and q | d) and are left
    /// out of `good`.
    pub additive_possible: bool,
    /// Multiset of |a| over good pairs, sorted.
    #[serde(skip)]
    pub abs_multiset: Vec<i64>,
}

pub fn trace_set(field: &QuadField, q: u64) -> Result<TraceSet> {
    if q.is_multiple_of(2) {
        return Err(Error::Frey("q must be odd".into()));
    }
    let dec = field.splitting_and_trace_data(q)?;
    let mut good = BTreeSet::new();
    let mut abs_multiset = Vec::new();
    let (mut mult, mut add) = (false, false);
    let mut residue_degree = 1;
    let qi = q as i64;
    for a in 0..qi {
        for b in 0..qi {
            if a == 0 && b == 0 {
                continue;
            }
            let curve = FreyCurve {
                a,
                b,
                d: field.d,
                a2: field.int(4 * a),
                a4: QuadInt::from_sqrt_coords(field.d, 2 * a * a, 2 * b),
            };
            for t in reduce_and_trace(&curve, field, q)? {
                residue_degree = t.residue_degree;
                match t.reduction {
                    Reduction::Good => {
                        let v = t.a.expect("good reduction has a trace");
                        good.insert(v);
                        abs_multiset.push(v.abs());
                    }
                    Reduction::Multiplicative => mult = true,
                    Reduction::Additive => add = true,
                }
            }
        }
    }
    abs_multiset.sort_unstable();
    Ok(TraceSet {
        q,
        splitting: dec.kind,
        residue_degree,
        good,
        multiplicative_possible: mult,
        additive_possible: add,
        abs_multiset,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelRecipe {
    pub d: u64,
    pub odd_part: u64,
    pub odd_part_factored: String,
    pub e_options: Vec<u32>,
    pub levels: Vec<u64>,
    /// The level picked by the parity of C, when 2 splits and a parity is given.
    pub selected_level: Option<u64>,
    pub nebentypus: NebentypusSpec,
    /// Some odd prime > 3 ramifies in K.
    pub hypothesis_holds: bool,
    /// d ∈ {3, 6}: the result holds with 5-torsion in place of 3-torsion.
    pub five_torsion_variant: bool,
    /// d = 2: no general proof is available.
    pub conjectural: bool,
}

/// Level and Nebentypus of the newform attached to a solution, after
/// level lowering.
pub fn level_recipe(field: &QuadField, c_even: Option<bool>) -> Result<LevelRecipe> {
    let d = field.d;
    let hypothesis_holds = field.ramified_odd_primes.iter().any(|&p| p > 3);
    let five_torsion_variant = d == 3 || d == 6;
    let conjectural = d == 2;
    if !hypothesis_holds && !five_torsion_variant && !conjectural {
        return Err(Error::Frey(format!("no prime > 3 ramifies in Q(sqrt({d}))")));
    }
    let mut odd_part = 1u64;
    let mut parts = Vec::new();
    for &p in &field.ramified_odd_primes {
        if p % 8 == 3 {
            odd_part *= p;
            parts.push(p.to_string());
        } else {
            odd_part *= p * p;
            parts.push(format!("{p}^2"));
        }
    }
    let e_options = match field.two_splitting {
        Splitting::Split => vec![1, 8],
        Splitting::Inert => vec![8],
        Splitting::Ramified if d % 2 == 1 => vec![6, 7],
        Splitting::Ramified => vec![8, 9],
    };
    let levels: Vec<u64> = e_options.iter().map(|&e| (1u64 << e) * odd_part).collect();
    let selected_level = match (field.two_splitting, c_even) {
        (Splitting::Split, Some(true)) => Some(levels[0]),
        (Splitting::Split, Some(false)) => Some(levels[1]),
        _ => None,
    };
    Ok(LevelRecipe {
        d,
        odd_part,
        odd_part_factored: if parts.is_empty() { "1".into() } else { parts.join("*") },
        e_options,
        levels,
        selected_level,
        nebentypus: build_nebentypus(field),
        hypothesis_holds,
        five_torsion_variant,
        conjectural,
    })
}

fn qpoly(coeffs: Vec<QuadInt>, d: u64) -> Poly<QuadInt> {
    Poly::new(coeffs, &QuadInt::zero(d))
}

/// ψ₃ = 3x⁴ + 4a x³ + 6b x² − b² for y² = x³ + a x² + b x.
pub fn psi3(a: &QuadInt, b: &QuadInt) -> Poly<QuadInt> {
    let d = a.d();
    let k = |n: i64| BigInt::from(n);
    qpoly(vec![-(b * b), QuadInt::zero(d), b.scale(&k(6)), a.scale(&k(4)), QuadInt::from_int(d, 3)], d)
}

/// ψ₅ = ψ₄ψ₂³ − ψ₃³ with ψ₂² = 4f, so ψ₅ = 16 f² G − ψ₃³ where ψ₄ = ψ₂·G.
pub fn psi5(a: &QuadInt, b: &QuadInt) -> Poly<QuadInt> {
    let d = a.d();
    let k = |n: i64| BigInt::from(n);
    let zero = QuadInt::zero(d);
    // b2 = 4a, b4 = 2b, b6 = 0, b8 = −b²
    let b2 = a.scale(&k(4));
    let b4 = b.scale(&k(2));
    let b8 = -(b * b);
    let g = qpoly(
        vec![
            &b4 * &b8,
            &b2 * &b8,
            b8.scale(&k(10)),
            zero.clone(),
            b4.scale(&k(5)),
            b2.clone(),
            QuadInt::from_int(d, 2),
        ],
        d,
    );
    let f = qpoly(vec![zero, b.clone(), a.clone(), QuadInt::one(d)], d);
    let p3 = psi3(a, b);
    f.mul(&f).mul(&g).scale(&QuadInt::from_int(d, 16)).sub(&p3.pow(3))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivPolyConstant {
    pub ell: u32,
    /// Disc(ψ₃)/(2⁸·3²·b⁴·(a²−4b)²) or Disc(ψ₅)/(2⁸⁸·5¹⁰·b⁴⁴·(a²−4b)²²).
    pub value: QuadInt,
    /// For ℓ = 3, the quotient when (a²−4b)/4 is used in place of a²−4b.
    pub value_with_quarter_normalization: Option<QuadInt>,
}

pub fn division_poly_constant(curve: &FreyCurve, ell: u32) -> Result<DivPolyConstant> {
    let (a, b) = (&curve.a2, &curve.a4);
    let d = curve.d;
    let c = &(a * a) - &b.scale(&BigInt::from(4));
    if b.is_zero() || c.is_zero() {
        return Err(Error::Frey("degenerate curve: b = 0 or a^2 = 4b".into()));
    }
    let big = |n: BigInt| QuadInt::from_int(d, n);
    let div = |x: &QuadInt, y: &QuadInt| {
        x.exact_div(y).ok_or_else(|| Error::Frey("normalizing factor does not divide the discriminant".into()))
    };
    match ell {
        3 => {
            let disc = discriminant(&psi3(a, b));
            let base = big(BigInt::from(2u32.pow(8) * 9)) * b.pow(4);
            let value = div(&disc, &(&base * &c.pow(2)))?;
            let quarter = c.exact_div(&QuadInt::from_int(d, 4));
            let value_with_quarter_normalization = match quarter {
                Some(cb) => Some(div(&disc, &(&base * &cb.pow(2)))?),
                None => None,
            };
            Ok(DivPolyConstant { ell, value, value_with_quarter_normalization })
        }
        5 => {
            let disc = discriminant(&psi5(a, b));
            let k = big(BigInt::from(2).pow(88) * BigInt::from(5).pow(10));
            let value = div(&disc, &(&(&k * &b.pow(44)) * &c.pow(22)))?;
            Ok(DivPolyConstant { ell, value, value_with_quarter_normalization: None })
        }
        _ => Err(Error::Frey(format!("ell = {ell} is not supported (3 or 5)"))),
    }
}

/// φ(x, y) = (−y²/2x², y(b − x²)/(2√−2·x²)) maps E to the conjugate curve.
///
/// With y² = f(x), the image satisfies Y² = X³ + aX² + b̄X iff
/// f·(b − x²)²·x² = f³ − 2a·f²·x² + 4b̄·f·x⁴ in O_K[x].
pub fn isogeny_identity_check(curve: &FreyCurve) -> bool {
    let d = curve.d;
    let (a, b) = (&curve.a2, &curve.a4);
    let bbar = curve.a4_conj();
    let zero = QuadInt::zero(d);
    let one = QuadInt::one(d);
    let f = qpoly(vec![zero.clone(), b.clone(), a.clone(), one.clone()], d);
    let x2 = Poly::monomial(one.clone(), 2);
    let x4 = Poly::monomial(one.clone(), 4);
    let bx = qpoly(vec![b.clone(), zero.clone(), -&one], d);
    let lhs = f.mul(&bx.mul(&bx)).mul(&x2);
    let f2 = f.mul(&f);
    let rhs = f2
        .mul(&f)
        .sub(&f2.mul(&x2).scale(&a.scale(&BigInt::from(2))))
        .add(&f.mul(&x4).scale(&bbar.scale(&BigInt::from(4))));
    lhs == rhs
}

/// Deterministic random primitive (A, B, d) with squarefree d in [2, max_d].
pub fn random_triples(seed: u64, count: usize, max_ab: i64, max_d: u64) -> Vec<(i64, i64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = rng.gen_range(-max_ab..=max_ab);
        let b = rng.gen_range(-max_ab..=max_ab);
        let d = rng.gen_range(2..=max_d);
        if (a == 0 && b == 0) || a.gcd(&b) != 1 || !is_squarefree(d) || make_field(d).is_err() {
            continue;
        }
        out.push((a, b, d));
    }
    out
}
