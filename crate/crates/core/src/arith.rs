//! Elementary integer arithmetic: primality, factorization, residue symbols
//! and exact roots.
//!
//! Machine-word routines are deterministic. Big-integer factorization uses
//! trial division, Pollard-Brent and Miller-Rabin; anything it cannot split
//! within its iteration budget is reported as an unfactored cofactor rather
//! than silently treated as prime.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

fn pollard_brent_u64(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut y, m) = (2u64, 128u64);
        let (mut g, mut r, mut q) = (1u64, 1u64, 1u64);
        let mut x = y;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd_u64(q, n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u64(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

/// Complete factorization of a 64-bit integer, primes ascending.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out: BTreeMap<u64, u32> = BTreeMap::new();
    if n <= 1 {
        return Vec::new();
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        while n.is_multiple_of(p) {
            *out.entry(p).or_default() += 1;
            n /= p;
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            *out.entry(m).or_default() += 1;
            continue;
        }
        let f = pollard_brent_u64(m);
        stack.push(f);
        stack.push(m / f);
    }
    out.into_iter().collect()
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && factor_u64(n).iter().all(|&(_, e)| e == 1)
}

/// Odd prime divisors of n, ascending.
pub fn odd_prime_divisors(n: u64) -> Vec<u64> {
    factor_u64(n).into_iter().map(|(p, _)| p).filter(|&p| p != 2).collect()
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u64).collect()
}

pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| is_prime_u64(n)).collect()
}

/// Least prime >= n.
pub fn next_prime(n: u64) -> u64 {
    let mut m = n.max(2);
    while !is_prime_u64(m) {
        m += 1;
    }
    m
}

/// Legendre symbol (a/p) for an odd prime p.
pub fn legendre(a: i64, p: u64) -> i32 {
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Kronecker symbol (D/q) for a prime q, D a discriminant.
pub fn kronecker_prime(disc: i64, q: u64) -> i32 {
    if q == 2 {
        if disc % 2 == 0 {
            0
        } else if matches!(disc.rem_euclid(8), 1 | 7) {
            1
        } else {
            -1
        }
    } else {
        legendre(disc, q)
    }
}

/// All x in [0, p) with x^2 = a mod p. Brute force; p is small here.
pub fn sqrt_mod_all(a: i64, p: u64) -> Vec<u64> {
    let a = a.rem_euclid(p as i64) as u64;
    (0..p).filter(|&x| mul_mod(x, x, p) == a).collect()
}

/// Number of positive divisors.
pub fn tau(n: u64) -> u64 {
    factor_u64(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

/// Least primitive root modulo an odd prime p.
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let fs = factor_u64(p - 1);
    (2..p)
        .find(|&g| fs.iter().all(|&(q, _)| pow_mod(g, (p - 1) / q, p) != 1))
        .expect("a primitive root exists modulo a prime")
}

/// Discrete logarithm of a to base g modulo p, by exhaustive search.
pub fn discrete_log(g: u64, a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    let mut x = 1u64;
    for k in 0..p {
        if x == a {
            return Some(k);
        }
        x = mul_mod(x, g, p);
    }
    None
}

/// Exact 2-adic valuation; `None` for zero.
pub fn v2_i128(n: i128) -> Option<u32> {
    if n == 0 {
        None
    } else {
        Some(n.trailing_zeros())
    }
}

pub fn valuation_big(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut m = n.abs();
    let mut k = 0;
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return Some(k);
        }
        m = q;
        k += 1;
    }
}

/// Square root of a perfect square, `None` otherwise.
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

/// Exact k-th root with sign handling for odd k.
pub fn exact_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if k == 0 {
        return None;
    }
    if n.is_negative() {
        if k.is_multiple_of(2) {
            return None;
        }
        return exact_root(&-n, k).map(|r| -r);
    }
    let r = n.nth_root(k);
    if num_traits::pow(r.clone(), k as usize) == *n {
        Some(r)
    } else {
        None
    }
}

fn is_probable_prime_big(n: &BigUint) -> bool {
    if let Some(m) = n.to_u64() {
        return is_prime_u64(m);
    }
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    if n.is_even() {
        return false;
    }
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'witness: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53] {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_brent_big(n: &BigUint, budget: u64) -> Option<BigUint> {
    let one = BigUint::one();
    for c in 1u32..8 {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut x = y.clone();
        let mut ys = y.clone();
        let mut g = one.clone();
        let mut q = one.clone();
        let mut r = 1u64;
        let m = 64u64;
        let mut spent = 0u64;
        while g == one && spent < budget {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == one {
                ys = y.clone();
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += m;
                spent += m;
            }
            r *= 2;
        }
        if g == *n {
            let mut tries = 0;
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                tries += 1;
                if g > one || tries > budget {
                    break;
                }
            }
        }
        if g > one && g != *n {
            return Some(g);
        }
    }
    None
}

/// A factored nonzero integer. Prime keys are ascending. Cofactors that
/// could not be split are kept in `unfactored`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization {
    pub negative: bool,
    pub primes: BTreeMap<BigUint, u32>,
    pub unfactored: Vec<BigUint>,
}

impl Factorization {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn is_complete(&self) -> bool {
        self.unfactored.is_empty()
    }

    pub fn value(&self) -> BigInt {
        let mut v = BigUint::one();
        for (p, e) in &self.primes {
            v *= num_traits::pow(p.clone(), *e as usize);
        }
        for c in &self.unfactored {
            v *= c;
        }
        let s = if self.negative { Sign::Minus } else { Sign::Plus };
        BigInt::from_biguint(s, v)
    }

    /// Prime support (completed part only).
    pub fn support(&self) -> Vec<BigUint> {
        self.primes.keys().cloned().collect()
    }

    pub fn support_u64(&self) -> Vec<u64> {
        self.primes.keys().filter_map(|p| p.to_u64()).collect()
    }

    pub fn merge(&mut self, other: &Factorization) {
        self.negative ^= other.negative;
        for (p, e) in &other.primes {
            *self.primes.entry(p.clone()).or_default() += e;
        }
        self.unfactored.extend(other.unfactored.iter().cloned());
    }

    /// Human-readable form such as `2^7 * 3^5 * 97^2`.
    pub fn pretty(&self) -> String {
        let mut parts: Vec<String> =
            self.primes.iter().map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") }).collect();
        parts.extend(self.unfactored.iter().map(|c| format!("[{c}]")));
        let body = if parts.is_empty() { "1".to_string() } else { parts.join(" * ") };
        if self.negative {
            format!("-{body}")
        } else {
            body
        }
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

impl Serialize for Factorization {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Factorization", 4)?;
        st.serialize_field("value", &self.value().to_string())?;
        st.serialize_field("pretty", &self.pretty())?;
        let primes: Vec<(String, u32)> = self.primes.iter().map(|(p, e)| (p.to_string(), *e)).collect();
        st.serialize_field("primes", &primes)?;
        let unf: Vec<String> = self.unfactored.iter().map(|c| c.to_string()).collect();
        st.serialize_field("unfactored", &unf)?;
        st.end()
    }
}

/// Pollard-Brent iterations per polynomial before a cofactor is given up on.
pub const RHO_BUDGET: u64 = 200_000;

/// Factor a nonzero big integer. Zero is rejected by returning `None`.
pub fn factor_big(n: &BigInt) -> Option<Factorization> {
    if n.is_zero() {
        return None;
    }
    let mut out = Factorization { negative: n.is_negative(), ..Default::default() };
    let mut m = n.magnitude().clone();
    for p in primes_up_to(20_000) {
        let bp = BigUint::from(p);
        if m.is_one() {
            break;
        }
        while (&m % &bp).is_zero() {
            *out.primes.entry(bp.clone()).or_default() += 1;
            m /= &bp;
        }
    }
    let mut stack = vec![m];
    while let Some(c) = stack.pop() {
        if c.is_one() {
            continue;
        }
        if let Some(small) = c.to_u64() {
            for (p, e) in factor_u64(small) {
                *out.primes.entry(BigUint::from(p)).or_default() += e;
            }
            continue;
        }
        if is_probable_prime_big(&c) {
            *out.primes.entry(c).or_default() += 1;
            continue;
        }
        match pollard_brent_big(&c, RHO_BUDGET) {
            Some(f) => {
                let g = &c / &f;
                stack.push(f);
                stack.push(g);
            }
            None => out.unfactored.push(c),
        }
    }
    out.unfactored.sort();
    Some(out)
}

pub fn factor_i128(n: i128) -> Option<Factorization> {
    factor_big(&BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_matches_sieve() {
        let sieve = primes_up_to(10_000);
        let mr: Vec<u64> = (0..=10_000).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(sieve, mr);
    }

    #[test]
    fn factor_small_and_semiprime() {
        assert_eq!(factor_u64(360), vec![(2, 3), (3, 2), (5, 1)]);
        let n = 1_000_000_007u64 * 998_244_353;
        assert_eq!(factor_u64(n), vec![(998_244_353, 1), (1_000_000_007, 1)]);
    }

    #[test]
    fn factor_big_roundtrip() {
        // 1000000007 * 1000000009 * 2^64+13 (prime), negated
        let big_prime: BigInt = "18446744073709551629".parse().unwrap();
        let n: BigInt = -(BigInt::from(1_000_000_007u64) * 1_000_000_009u64 * &big_prime);
        let f = factor_big(&n).unwrap();
        assert_eq!(f.value(), n);
        assert!(f.negative);
        assert!(f.is_complete());
        assert_eq!(f.primes.len(), 3);
    }

    #[test]
    fn residue_symbols() {
        assert_eq!(legendre(6, 5), 1);
        assert_eq!(legendre(129, 7), -1);
        assert_eq!(kronecker_prime(129, 2), 1);
        assert_eq!(kronecker_prime(5, 2), -1);
        assert_eq!(kronecker_prime(24, 2), 0);
    }

    #[test]
    fn roots_and_tau() {
        assert_eq!(exact_root(&BigInt::from(-343), 3), Some(BigInt::from(-7)));
        assert_eq!(exact_root(&BigInt::from(344), 3), None);
        assert_eq!(exact_sqrt(&BigInt::from(144)), Some(BigInt::from(12)));
        assert_eq!(tau(129), 4);
        assert_eq!(tau(49), 3);
        assert_eq!(primitive_root(5), 2);
        assert_eq!(primitive_root(13), 2);
    }

    #[test]
    fn squarefree() {
        assert!(is_squarefree(129));
        assert!(!is_squarefree(12));
        assert_eq!(odd_prime_divisors(129), vec![3, 43]);
    }
}
