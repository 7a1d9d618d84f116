//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use qsieve::arith::{exact_sqrt, is_prime_u64, primes_in};
use qsieve::forms::{candidate_polys, NewformRecord};
use qsieve::frey::{build_curve, reduce_and_trace, trace_set, Reduction};
use qsieve::poly::{resultant, zpoly_big};
use qsieve::quadfield::{make_field, QuadField, QuadInt, Splitting};

/// Level used for synthetic forms; a power of 2 so every odd q is coprime to it.
pub const SYNTH_LEVEL: u64 = 256;

pub fn aux_for(d: u64, max_q: u64) -> Vec<u64> {
    primes_in(3, max_q).into_iter().filter(|q| !d.is_multiple_of(*q)).collect()
}

pub fn record(label: String, order: u32, degree: u32, ap: BTreeMap<u64, Vec<i64>>) -> NewformRecord {
    NewformRecord {
        label,
        level: SYNTH_LEVEL,
        char_conductor: 1,
        char_order: order,
        field_degree: degree,
        eigenvalues: ap.into_iter().map(|(q, v)| (q, v.into_iter().map(BigInt::from).collect())).collect(),
        cm_discriminant: None,
    }
}

/// A form whose a_q agree with the Frey curve E_(A,B) at every aux prime:
/// linear for split q, x² − (a_{q²} + 2q) for inert q.
pub fn self_match(a: i64, b: i64, field: &QuadField, aux: &[u64], order: u32) -> NewformRecord {
    let curve = build_curve(a, b, field).expect("non-degenerate curve");
    let mut ap = BTreeMap::new();
    let mut degree = 1;
    for &q in aux {
        let tr = &reduce_and_trace(&curve, field, q).expect("trace")[0];
        let qi = q as i64;
        let mp = match (tr.reduction, tr.splitting) {
            (Reduction::Multiplicative, Splitting::Split) => vec![-(qi + 1), 1],
            (Reduction::Good, Splitting::Split) => vec![-tr.a.unwrap(), 1],
            (Reduction::Good, Splitting::Inert) => {
                degree = 2;
                vec![-(tr.a.unwrap() + 2 * qi), 0, 1]
            }
            other => panic!("unexpected reduction {other:?} at q = {q}"),
        };
        ap.insert(q, mp);
    }
    record(format!("self({a},{b},{})", field.d), order, degree, ap)
}

/// B_q recomputed from Sylvester resultants, without the companion-matrix path.
pub fn certificate_by_sylvester(field: &QuadField, q: u64, form: &NewformRecord) -> BigInt {
    let ts = trace_set(field, q).unwrap();
    let mp = zpoly_big(form.eigenvalues[&q].clone());
    let mut b = BigInt::from(q);
    for (_, poly) in candidate_polys(&ts, form.char_order).unwrap() {
        b *= resultant(&mp, &poly);
    }
    b.abs()
}

/// B_q for a linear a_q = a at a split q, from the closed form
/// q · ∏_t (a^{2m} − t^{2m}) · (a^{2m} − (q+1)^{2m}), with the trace set
/// enumerated by brute force over residues.
pub fn certificate_closed_form(field: &QuadField, q: u64, a: i64, m: u32) -> BigInt {
    let mut traces = std::collections::BTreeSet::new();
    let mut mult = false;
    for x in 0..q as i64 {
        for y in 0..q as i64 {
            if x == 0 && y == 0 {
                continue;
            }
            // lift the residue pair to a primitive integer pair
            let qi = q as i64;
            let Some(c) = (0..4)
                .flat_map(|i| (0..4).map(move |j| (x + i * qi, y + j * qi)))
                .find_map(|(a, b)| build_curve(a, b, field).ok())
            else {
                panic!("no primitive lift of ({x}, {y}) mod {q}");
            };
            let tr = reduce_and_trace(&c, field, q).unwrap();
            for t in tr {
                match t.reduction {
                    Reduction::Good => {
                        traces.insert(t.a.unwrap());
                    }
                    Reduction::Multiplicative => mult = true,
                    _ => {}
                }
            }
        }
    }
    let k = 2 * m as usize;
    let ak = num_traits::pow(BigInt::from(a), k);
    let mut b = BigInt::from(q);
    for t in traces {
        b *= &ak - num_traits::pow(BigInt::from(t), k);
    }
    if mult {
        b *= &ak - num_traits::pow(BigInt::from(q + 1), k);
    }
    b.abs()
}

/// Whether z ∈ O_K is a square in O_K, by solving s = (a + b√d)/2 with
/// a² + d b² = 2X and ab = Y for z = (X + Y√d)/2.
pub fn is_square_in_ok(z: &QuadInt) -> bool {
    let d = z.d();
    let (x, y) = z.sqrt_coords_halved();
    let dd = BigInt::from(d);
    let four_n = &x * &x - &dd * &y * &y;
    if four_n.is_negative() {
        return false;
    }
    let Some(two_n) = exact_sqrt(&four_n) else { return false };
    let admissible = |a: &BigInt, b: &BigInt| {
        let even = |v: &BigInt| (v % 2u32).is_zero();
        (even(a) && even(b)) || (d % 4 == 1 && even(&(a - b)))
    };
    for u in [&x + &two_n, &x - &two_n] {
        if u.is_negative() {
            continue;
        }
        let Some(a) = exact_sqrt(&u) else { continue };
        if a.is_zero() {
            // z = d b² / 2
            let t: BigInt = &x * 2;
            if (&t % &dd).is_zero() {
                if let Some(b) = exact_sqrt(&(t / &dd)) {
                    if y.is_zero() && admissible(&a, &b) {
                        return true;
                    }
                }
            }
            continue;
        }
        if !(&y % &a).is_zero() {
            continue;
        }
        let b = &y / &a;
        if &a * &a + &dd * &b * &b == &x * 2 && admissible(&a, &b) {
            return true;
        }
    }
    false
}

pub fn field(d: u64) -> QuadField {
    make_field(d).unwrap()
}

pub fn odd_primes_dividing(d: u64) -> Vec<u64> {
    (3..=d).filter(|&p| d.is_multiple_of(p) && is_prime_u64(p)).collect()
}
