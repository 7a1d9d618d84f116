//! Primes where the residual representation of a Frey curve might be
//! reducible: the unit term N(ε¹² − 1) combined with trace resultants
//! Res(x² − t·x + q^f, x¹² − 1) at auxiliary primes q.
//!
//! A prime p > 3 outside `excluded_primes` divides neither the unit term
//! nor, for some constraining q, any resultant over the possible traces.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{factor_big, Factorization};
use crate::error::{Error, Result};
use crate::frey::trace_set;
use crate::poly::{resultant, x_pow_minus, zpoly_big};
use crate::quadfield::{fundamental_unit, QuadField, QuadInt, Splitting};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitLcm {
    pub epsilon: QuadInt,
    /// lcm(N(ε¹²−1), N(ε̄¹²−1)); both norms coincide, so this is |N(ε¹²−1)|.
    pub factorization: Factorization,
    /// The value from the binomial expansion agrees with repeated squaring.
    pub expansion_paths_agree: bool,
}

/// (a + b√d)^n by the binomial theorem, returned in √d-coordinates.
fn binomial_power(a: &BigInt, b: &BigInt, d: u64, n: u32) -> (BigInt, BigInt) {
    let (mut re, mut im) = (BigInt::zero(), BigInt::zero());
    let mut binom = BigInt::one();
    let dd = BigInt::from(d);
    for k in 0..=n {
        let term = &binom * num_traits::pow(a.clone(), (n - k) as usize) * num_traits::pow(b.clone(), k as usize);
        let term = term * num_traits::pow(dd.clone(), (k / 2) as usize);
        if k % 2 == 0 {
            re += term;
        } else {
            im += term;
        }
        binom = binom * BigInt::from(n - k) / BigInt::from(k + 1);
    }
    (re, im)
}

pub fn unit_lcm_bound(field: &QuadField) -> Result<UnitLcm> {
    let eps = fundamental_unit(field).value;
    let d = field.d;
    let e12 = eps.pow(12);
    let one = QuadInt::one(d);
    let direct = (&e12 - &one).norm();
    if direct.is_zero() {
        return Err(Error::Irred("eps^12 = 1".into()));
    }
    let (a2, b2) = eps.sqrt_coords_halved();
    let (x, y) = binomial_power(&a2, &b2, d, 12);
    // (a2 + b2√d)^12 = 2^12·ε^12
    let scale = BigInt::from(1u32 << 12);
    let n_binom = {
        let (xx, yy) = (&x - &scale, y);
        (&xx * &xx - BigInt::from(d) * &yy * &yy) / (&scale * &scale)
    };
    let conj_norm = (&e12.conj() - &one).norm();
    let expansion_paths_agree = n_binom == direct && conj_norm == direct;
    // ε¹² − 1 = ∏_{k | 12} Φ_k(ε); factor the smaller norms.
    let e2 = eps.pow(2);
    let pieces =
        [&eps - &one, &eps + &one, &(&e2 + &eps) + &one, &e2 + &one, &(&e2 - &eps) + &one, &(&eps.pow(4) - &e2) + &one];
    let mut factorization = Factorization::one();
    for piece in &pieces {
        let n = piece.norm();
        let f = factor_big(&n).ok_or_else(|| Error::Irred("zero cyclotomic norm".into()))?;
        factorization.merge(&f);
    }
    factorization.negative = false;
    if factorization.value() != direct.magnitude().clone().into() {
        return Err(Error::Irred("cyclotomic factorization does not multiply back".into()));
    }
    Ok(UnitLcm { epsilon: eps, factorization, expansion_paths_agree })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResultantEntry {
    pub t: i64,
    pub resultant: String,
    pub factorization: Factorization,
}

/// Res(x² − t·x + q^f, x¹² − 1) for each supplied trace t.
pub fn trace_resultant_entries(q: u64, f: u32, traces: &[i64]) -> Result<Vec<ResultantEntry>> {
    let qf = BigInt::from(q).pow(f);
    let cyc = x_pow_minus(12, &BigInt::one());
    traces
        .iter()
        .map(|&t| {
            let charpoly = zpoly_big(vec![qf.clone(), BigInt::from(-t), BigInt::one()]);
            let r = resultant(&charpoly, &cyc);
            let factorization = factor_big(&r).ok_or_else(|| Error::Irred(format!("zero resultant at t = {t}")))?;
            Ok(ResultantEntry { t, resultant: r.to_string(), factorization })
        })
        .collect()
}

/// Prime support of the trace resultants at q; f is the residue degree of q in K.
pub fn trace_resultants(field: &QuadField, q: u64, traces: &[i64]) -> Result<BTreeSet<BigUint>> {
    let f = if field.splitting_of(q) == Splitting::Inert { 2 } else { 1 };
    let mut out = BTreeSet::new();
    for e in trace_resultant_entries(q, f, traces)? {
        if !e.factorization.is_complete() {
            return Err(Error::Irred(format!("resultant at t = {} not fully factored", e.t)));
        }
        out.extend(e.factorization.support());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuxData {
    pub q: u64,
    pub splitting: Splitting,
    pub residue_degree: u32,
    pub traces: Vec<i64>,
    /// A split q can divide C; that case gives no resultant constraint here.
    pub multiplicative_possible: bool,
    pub constrains: bool,
    pub resultants: Vec<ResultantEntry>,
    /// Primes of the unit term dividing some resultant at q.
    pub unit_primes_hit: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IrredBound {
    pub d: u64,
    pub unit_lcm: UnitLcm,
    pub aux_data: Vec<AuxData>,
    pub excluded_primes: BTreeSet<u64>,
    /// The unit term has cofactors that could not be split; their prime
    /// factors are excluded too but cannot be listed.
    pub unfactored_cofactors: Vec<String>,
}

/// Default auxiliary primes: the least odd ramified prime, then the two
/// least primes ≥ 5 not dividing d.
pub fn default_aux_primes(field: &QuadField) -> Vec<u64> {
    let mut out: Vec<u64> = field.ramified_odd_primes.first().copied().into_iter().collect();
    let mut p = 5;
    let mut extra = 0;
    while extra < 2 {
        if crate::arith::is_prime_u64(p) && !field.d.is_multiple_of(p) && !out.contains(&p) {
            out.push(p);
            extra += 1;
        }
        p += 2;
    }
    out
}

pub fn irreducible_outside(field: &QuadField, aux: &[u64]) -> Result<IrredBound> {
    if aux.is_empty() {
        return Err(Error::Irred("no auxiliary primes".into()));
    }
    if aux.iter().any(|&q| q == 2 || !crate::arith::is_prime_u64(q)) {
        return Err(Error::Irred("auxiliary primes must be odd primes".into()));
    }
    let unit_lcm = unit_lcm_bound(field)?;
    let unit_primes: Vec<BigUint> = unit_lcm.factorization.support();
    let mut candidates: BTreeSet<BigUint> = unit_primes.iter().cloned().collect();
    let mut aux_data = Vec::new();
    for &q in aux {
        let ts = trace_set(field, q)?;
        let traces: Vec<i64> = ts.good.iter().copied().collect();
        let resultants = trace_resultant_entries(q, ts.residue_degree, &traces)?;
        let multiplicative_possible = ts.multiplicative_possible;
        let mut hit = BTreeSet::new();
        for e in &resultants {
            let r: BigInt = e.resultant.parse().map_err(|_| Error::Irred("bad resultant".into()))?;
            let r = r.magnitude().clone();
            for p in &unit_primes {
                if (&r % p).is_zero() {
                    hit.insert(p.clone());
                }
            }
        }
        let constrains = !multiplicative_possible;
        if constrains {
            candidates = candidates.intersection(&hit).cloned().collect();
        }
        aux_data.push(AuxData {
            q,
            splitting: ts.splitting,
            residue_degree: ts.residue_degree,
            traces,
            multiplicative_possible,
            constrains,
            resultants,
            unit_primes_hit: hit.iter().filter_map(|p| p.to_u64()).collect(),
        });
    }
    let mut excluded: BTreeSet<u64> = [2, 3].into_iter().collect();
    excluded.extend(candidates.iter().filter_map(|p| p.to_u64()));
    Ok(IrredBound {
        d: field.d,
        unit_lcm: unit_lcm.clone(),
        aux_data,
        excluded_primes: excluded,
        unfactored_cofactors: unit_lcm.factorization.unfactored.iter().map(|c| c.to_string()).collect(),
    })
}
