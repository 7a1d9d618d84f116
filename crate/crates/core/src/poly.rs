//! Dense univariate polynomials over an integral domain with exact division,
//! and fraction-free (Bareiss) resultants and discriminants.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::quadfield::QuadInt;

/// Minimal ring interface. Constants are produced from a template element so
/// that field elements can carry their radicand.
pub trait Ring: Clone + PartialEq + Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero_elt(&self) -> bool;
    fn add_r(&self, o: &Self) -> Self;
    fn sub_r(&self, o: &Self) -> Self;
    fn mul_r(&self, o: &Self) -> Self;
    fn neg_r(&self) -> Self;
    fn mul_int(&self, k: i64) -> Self;
    /// self / o when the quotient exists in the ring.
    fn exact_div_r(&self, o: &Self) -> Option<Self>;
}

impl Ring for BigInt {
    fn zero_like(&self) -> Self {
        BigInt::zero()
    }
    fn one_like(&self) -> Self {
        BigInt::one()
    }
    fn is_zero_elt(&self) -> bool {
        self.is_zero()
    }
    fn add_r(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_r(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_r(&self, o: &Self) -> Self {
        self * o
    }
    fn neg_r(&self) -> Self {
        -self
    }
    fn mul_int(&self, k: i64) -> Self {
        self * k
    }
    fn exact_div_r(&self, o: &Self) -> Option<Self> {
        if o.is_zero() {
            return None;
        }
        let (q, r) = self.div_rem(o);
        r.is_zero().then_some(q)
    }
}

impl Ring for QuadInt {
    fn zero_like(&self) -> Self {
        QuadInt::zero(self.d())
    }
    fn one_like(&self) -> Self {
        QuadInt::one(self.d())
    }
    fn is_zero_elt(&self) -> bool {
        self.is_zero()
    }
    fn add_r(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_r(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_r(&self, o: &Self) -> Self {
        self * o
    }
    fn neg_r(&self) -> Self {
        -self
    }
    fn mul_int(&self, k: i64) -> Self {
        self.scale(&BigInt::from(k))
    }
    fn exact_div_r(&self, o: &Self) -> Option<Self> {
        self.exact_div(o)
    }
}

/// Coefficients from the constant term upward; no trailing zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<R: Ring> {
    pub coeffs: Vec<R>,
    template: R,
}

impl<R: Ring> Poly<R> {
    pub fn new(coeffs: Vec<R>, template: &R) -> Self {
        let mut p = Poly { coeffs, template: template.zero_like() };
        p.trim();
        p
    }

    pub fn zero(template: &R) -> Self {
        Self::new(Vec::new(), template)
    }

    pub fn constant(c: R) -> Self {
        let t = c.zero_like();
        Self::new(vec![c], &t)
    }

    /// The monomial c·x^n.
    pub fn monomial(c: R, n: usize) -> Self {
        let t = c.zero_like();
        let mut v = vec![t.clone(); n];
        v.push(c);
        Self::new(v, &t)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero_elt()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> R {
        self.coeffs.last().cloned().unwrap_or_else(|| self.template.clone())
    }

    pub fn coeff(&self, i: usize) -> R {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.template.clone())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let v = (0..n).map(|i| self.coeff(i).add_r(&o.coeff(i))).collect();
        Self::new(v, &self.template)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let v = (0..n).map(|i| self.coeff(i).sub_r(&o.coeff(i))).collect();
        Self::new(v, &self.template)
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(&self.template);
        }
        let mut v = vec![self.template.clone(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] = v[i + j].add_r(&a.mul_r(b));
            }
        }
        Self::new(v, &self.template)
    }

    pub fn scale(&self, c: &R) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.mul_r(c)).collect(), &self.template)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.template.one_like());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let v = self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c.mul_int(i as i64)).collect();
        Self::new(v, &self.template)
    }

    pub fn eval(&self, x: &R) -> R {
        self.coeffs.iter().rev().fold(self.template.clone(), |acc, c| acc.mul_r(x).add_r(c))
    }
}

/// Determinant by fraction-free Gaussian elimination with row pivoting.
pub fn det_bareiss<R: Ring>(mut m: Vec<Vec<R>>, template: &R) -> R {
    let n = m.len();
    if n == 0 {
        return template.one_like();
    }
    let mut sign_flip = false;
    let mut prev = template.one_like();
    for k in 0..n - 1 {
        if m[k][k].is_zero_elt() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero_elt()) {
                Some(i) => {
                    m.swap(k, i);
                    sign_flip = !sign_flip;
                }
                None => return template.zero_like(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[i][j].mul_r(&m[k][k]).sub_r(&m[i][k].mul_r(&m[k][j]));
                m[i][j] = num.exact_div_r(&prev).expect("Bareiss division is exact");
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign_flip {
        det.neg_r()
    } else {
        det
    }
}

/// Sylvester matrix of f (degree m) and g (degree n), size m+n.
pub fn sylvester<R: Ring>(f: &Poly<R>, g: &Poly<R>) -> Vec<Vec<R>> {
    let m = f.degree().unwrap_or(0);
    let n = g.degree().unwrap_or(0);
    let size = m + n;
    let z = f.lead().zero_like();
    let mut rows = Vec::with_capacity(size);
    for i in 0..n {
        let mut row = vec![z.clone(); size];
        for (j, c) in f.coeffs.iter().rev().enumerate() {
            row[i + j] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..m {
        let mut row = vec![z.clone(); size];
        for (j, c) in g.coeffs.iter().rev().enumerate() {
            row[i + j] = c.clone();
        }
        rows.push(row);
    }
    rows
}

/// Res(f, g) = lc(f)^deg g · ∏ g(roots of f).
pub fn resultant<R: Ring>(f: &Poly<R>, g: &Poly<R>) -> R {
    let t = f.lead().zero_like();
    if f.is_zero() || g.is_zero() {
        return t;
    }
    if f.degree() == Some(0) {
        return pow_r(&f.lead(), g.degree().unwrap_or(0));
    }
    if g.degree() == Some(0) {
        return pow_r(&g.lead(), f.degree().unwrap_or(0));
    }
    det_bareiss(sylvester(f, g), &t)
}

fn pow_r<R: Ring>(a: &R, e: usize) -> R {
    (0..e).fold(a.one_like(), |acc, _| acc.mul_r(a))
}

/// Disc(f) = (−1)^{n(n−1)/2} Res(f, f′) / lc(f).
pub fn discriminant<R: Ring>(f: &Poly<R>) -> R {
    let n = f.degree().unwrap_or(0);
    let r = resultant(f, &f.derivative());
    let r = if (n * n.saturating_sub(1) / 2) % 2 == 1 { r.neg_r() } else { r };
    r.exact_div_r(&f.lead()).expect("leading coefficient divides the resultant")
}

/// Integer polynomial from i64 coefficients, constant term first.
pub fn zpoly(coeffs: &[i64]) -> Poly<BigInt> {
    Poly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect(), &BigInt::zero())
}

pub fn zpoly_big(coeffs: Vec<BigInt>) -> Poly<BigInt> {
    Poly::new(coeffs, &BigInt::zero())
}

/// x^n − c over Z.
pub fn x_pow_minus(n: usize, c: &BigInt) -> Poly<BigInt> {
    let mut v = vec![BigInt::zero(); n + 1];
    v[0] = -c;
    v[n] = BigInt::one();
    zpoly_big(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resultant_of_linear_factors() {
        // Res((x-2)(x-3), x-5) = (5-2)(5-3)·(sign) = 6
        let f = zpoly(&[6, -5, 1]);
        let g = zpoly(&[-5, 1]);
        assert_eq!(resultant(&f, &g), BigInt::from(6));
        assert_eq!(resultant(&g, &f), BigInt::from(6));
    }

    #[test]
    fn discriminant_of_quadratic_and_cubic() {
        assert_eq!(discriminant(&zpoly(&[3, 2, 1])), BigInt::from(4 - 12));
        // x^3 + a x + b: -4a^3 - 27b^2
        assert_eq!(discriminant(&zpoly(&[1, -1, 0, 1])), BigInt::from(4 - 27));
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let m: Vec<Vec<BigInt>> =
            [[2, -1, 0], [1, 3, 4], [0, 5, -2]].iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        // 2(3·-2 - 20) + 1(1·-2 - 0) = -52 - 2 = -54
        assert_eq!(det_bareiss(m, &BigInt::zero()), BigInt::from(-54));
    }

    #[test]
    fn resultant_with_cyclotomic_closed_form() {
        // Res(x^2 - t x + Q, x^12 - 1) against the reduction of x^12 modulo the quadratic
        for (t, q) in [(2i64, 3i64), (-2, 3), (0, 7), (5, 49)] {
            let f = zpoly(&[q, -t, 1]);
            let g = x_pow_minus(12, &BigInt::one());
            // x^n = c1 x + c0 modulo f
            let (mut c1, mut c0) = (BigInt::zero(), BigInt::one());
            for _ in 0..12 {
                let nc1 = &c1 * t + &c0;
                let nc0 = -&c1 * q;
                c1 = nc1;
                c0 = nc0;
            }
            let a = &c0 - 1;
            let expect = &a * &a + &a * &c1 * t + &c1 * &c1 * q;
            assert_eq!(resultant(&f, &g), expect, "t={t} q={q}");
        }
    }
}
