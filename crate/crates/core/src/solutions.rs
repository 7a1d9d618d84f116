//! Brute-force searches for primitive solutions of A⁴ − dB² = Cᵖ.

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Serialize, Serializer};

use crate::arith::{exact_root, exact_sqrt, is_prime_u64, is_squarefree};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    /// C = 1, so the identity holds for every exponent.
    All,
    /// C = −1, holds for every odd exponent.
    AllOdd,
    P(u64),
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::All => s.serialize_str("all"),
            Exponent::AllOdd => s.serialize_str("all odd"),
            Exponent::P(p) => s.serialize_u64(*p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionRecord {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub p: Exponent,
    pub d: u64,
    /// B = 0, i.e. (±1, 0, 1).
    pub trivial: bool,
    pub c_is_unit: bool,
}

impl SolutionRecord {
    /// Re-check A⁴ − dB² = Cᵖ exactly (for a marker exponent, with p = 1 or 3).
    pub fn verify(&self) -> bool {
        let lhs = BigInt::from(self.a).pow(4) - BigInt::from(self.d) * BigInt::from(self.b).pow(2);
        let p = match self.p {
            Exponent::All | Exponent::AllOdd => 3,
            Exponent::P(p) => p as u32,
        };
        let unit_ok = match self.p {
            Exponent::All => self.c == 1,
            Exponent::AllOdd => self.c == -1,
            Exponent::P(_) => true,
        };
        unit_ok && self.a.gcd(&self.b) == 1 && lhs == BigInt::from(self.c).pow(p)
    }
}

fn sign_orbit(a: i64, b: i64) -> Vec<(i64, i64)> {
    let sa: &[i64] = if a == 0 { &[1] } else { &[-1, 1] };
    let sb: &[i64] = if b == 0 { &[1] } else { &[-1, 1] };
    let mut out = Vec::new();
    for &x in sa {
        for &y in sb {
            out.push((x * a, y * b));
        }
    }
    out
}

fn push_orbit(out: &mut Vec<SolutionRecord>, a: i64, b: i64, c: i64, p: Exponent, d: u64) {
    for (x, y) in sign_orbit(a, b) {
        out.push(SolutionRecord { a: x, b: y, c, p, d, trivial: b == 0, c_is_unit: c.abs() == 1 });
    }
}

fn sort_records(v: &mut [SolutionRecord]) {
    v.sort_by_key(|r| (r.a, r.b, r.c));
}

/// All (A, B) with |A|, |B| ≤ H, gcd(A, B) = 1 and A⁴ − dB² = ±1.
pub fn search_c_pm1(d: u64, h: u64) -> Result<Vec<SolutionRecord>> {
    if h == 0 {
        return Err(Error::Solutions("H must be at least 1".into()));
    }
    let mut out = Vec::new();
    let dd = BigInt::from(d);
    for a in 0..=h as i64 {
        let a4 = BigInt::from(a).pow(4);
        for c in [1i64, -1] {
            let num = &a4 - c;
            if num < BigInt::from(0) || !num.is_multiple_of(&dd) {
                continue;
            }
            let Some(b) = exact_sqrt(&(num / &dd)) else { continue };
            let Ok(b) = i64::try_from(b) else { continue };
            if b <= h as i64 && a.gcd(&b) == 1 {
                let p = if c == 1 { Exponent::All } else { Exponent::AllOdd };
                push_orbit(&mut out, a, b, c, p, d);
            }
        }
    }
    sort_records(&mut out);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogueEntry {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: u64,
}

impl CatalogueEntry {
    pub fn display(&self) -> String {
        format!("(±{},±{},{},{})", self.a, self.b, self.c, self.d)
    }
}

/// Non-trivial C = ±1 solutions for squarefree 1 < d < 20, one entry per
/// sign orbit.
pub fn reproduce_catalogue(h: u64) -> Result<Vec<CatalogueEntry>> {
    if h < 20 {
        return Err(Error::Solutions("H must be at least 20".into()));
    }
    let mut out = Vec::new();
    for d in (2..20).filter(|&d| is_squarefree(d)) {
        for r in search_c_pm1(d, h)? {
            if !r.trivial && r.a > 0 && r.b > 0 {
                out.push(CatalogueEntry { a: r.a, b: r.b, c: r.c, d });
            }
        }
    }
    Ok(out)
}

/// Primitive solutions with |A|, |B| ≤ H and A⁴ − dB² a perfect p-th power
/// (C = ±1 included).
pub fn search_general(d: u64, p: u64, h: u64) -> Result<Vec<SolutionRecord>> {
    if p < 3 || !is_prime_u64(p) {
        return Err(Error::Solutions(format!("p = {p} must be an odd prime")));
    }
    let pe = u32::try_from(p).map_err(|_| Error::Solutions("p too large".into()))?;
    let dd = BigInt::from(d);
    let mut out = Vec::new();
    for a in 0..=h as i64 {
        let a4 = BigInt::from(a).pow(4);
        for b in 0..=h as i64 {
            if a.gcd(&b) != 1 {
                continue;
            }
            let n = &a4 - &dd * BigInt::from(b) * BigInt::from(b);
            let neg = n < BigInt::from(0);
            let m = if neg { -n.clone() } else { n.clone() };
            let Some(r) = exact_root(&m, pe) else { continue };
            let Ok(c) = i64::try_from(if neg { -r } else { r }) else { continue };
            let e = match c {
                1 => Exponent::All,
                -1 => Exponent::AllOdd,
                _ => Exponent::P(p),
            };
            push_orbit(&mut out, a, b, c, e, d);
        }
    }
    sort_records(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nontrivial(v: &[SolutionRecord]) -> Vec<(i64, i64, i64)> {
        v.iter().filter(|r| !r.trivial).map(|r| (r.a, r.b, r.c)).collect()
    }

    #[test]
    fn unit_searches() {
        let s6 = search_c_pm1(6, 100).unwrap();
        assert!(s6.iter().all(SolutionRecord::verify));
        assert_eq!(s6.iter().filter(|r| r.trivial).count(), 2);
        assert_eq!(nontrivial(&s6), vec![(-7, -20, 1), (-7, 20, 1), (7, -20, 1), (7, 20, 1)]);
        let s17 = search_c_pm1(17, 100).unwrap();
        assert_eq!(nontrivial(&s17), vec![(-2, -1, -1), (-2, 1, -1), (2, -1, -1), (2, 1, -1)]);
        assert!(nontrivial(&search_c_pm1(7, 10_000).unwrap()).is_empty());
        assert!(search_c_pm1(7, 0).is_err());
    }

    #[test]
    fn catalogue() {
        let c: Vec<String> = reproduce_catalogue(1000).unwrap().iter().map(CatalogueEntry::display).collect();
        assert_eq!(c, ["(±1,±1,-1,2)", "(±3,±4,1,5)", "(±7,±20,1,6)", "(±2,±1,1,15)", "(±2,±1,-1,17)"]);
    }

    #[test]
    fn general_windows() {
        let s = search_general(6, 5, 200).unwrap();
        assert!(s.iter().all(|r| r.c_is_unit && r.verify()));
        assert!(s.iter().any(|r| (r.a, r.b, r.c, r.p) == (1, 0, 1, Exponent::All)));
        // 1 − 129 = (−2)⁷: a genuine solution at an exponent below the theorem's range
        let s = search_general(129, 7, 200).unwrap();
        assert_eq!(nontrivial(&s), vec![(-1, -1, -2), (-1, 1, -2), (1, -1, -2), (1, 1, -2)]);
        let s = search_general(129, 23, 200).unwrap();
        assert!(s.iter().all(|r| r.trivial));
        // every hit re-verifies under exact arithmetic
        let s = search_general(2, 3, 50).unwrap();
        assert!(s.iter().all(SolutionRecord::verify));
        assert!(search_general(6, 4, 10).is_err());
    }

    #[test]
    fn at_most_one_nontrivial_unit_solution_per_sign() {
        for d in (2..1000).filter(|&d| is_squarefree(d)) {
            let s = search_c_pm1(d, 1000).unwrap();
            for c in [1, -1] {
                let n = s.iter().filter(|r| !r.trivial && r.c == c && r.a > 0 && r.b > 0).count();
                assert!(n <= 1, "d = {d}, C = {c}");
            }
        }
    }
}
