//! Writes the synthetic newform fixtures used by the replay tests.
//!
//! The records are stand-ins, not real newforms. Non-CM records get random
//! Hasse-compliant eigenvalues, and a draw is kept only if the trace sieve
//! discards it at every prime in [20, 1000]. CM records carry the Frobenius
//! traces of y² = x³ + 4x² + 2x and of its quadratic twists by −4 and 12.
//!
//! Usage: cargo run --example gen_forms -- <output dir>

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_bigint::BigInt;
use qsieve::arith::{kronecker_prime, legendre};
use qsieve::forms::{forms_to_json, NewformRecord, SieveContext};
use qsieve::quadfield::make_field;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const AUX: [u64; 6] = [5, 7, 11, 13, 17, 19];

struct Space {
    file: &'static str,
    d: u64,
    level: u64,
    char_conductor: u64,
    non_cm: usize,
    cm: usize,
}

const SPACES: [Space; 4] = [
    Space { file: "d6_768.json", d: 6, level: 768, char_conductor: 12, non_cm: 7, cm: 3 },
    Space { file: "d6_1536.json", d: 6, level: 1536, char_conductor: 12, non_cm: 13, cm: 0 },
    Space { file: "d129_258.json", d: 129, level: 258, char_conductor: 129, non_cm: 4, cm: 0 },
    Space { file: "d129_33024.json", d: 129, level: 33024, char_conductor: 129, non_cm: 34, cm: 2 },
];

fn label(level: u64, i: usize) -> String {
    let mut s = String::new();
    let mut n = i;
    loop {
        s.insert(0, (b'a' + (n % 26) as u8) as char);
        if n < 26 {
            break;
        }
        n = n / 26 - 1;
    }
    format!("{level}.2.{s}")
}

fn cm_trace(q: u64) -> i64 {
    let qi = q as i64;
    -(0..qi).map(|x| legendre(x * x * x + 4 * x * x + 2 * x, q) as i64).sum::<i64>()
}

fn random_minpoly(rng: &mut ChaCha8Rng, q: u64, degree: u32) -> Vec<i64> {
    let bound = 2.0 * (q as f64).sqrt();
    loop {
        if degree == 1 {
            let b = bound.floor() as i64;
            return vec![-rng.gen_range(-b..=b), 1];
        }
        // x² − t·x + n with real irrational roots inside the Hasse interval
        let b = (2.0 * bound).floor() as i64;
        let t = rng.gen_range(-b..=b);
        let n = rng.gen_range(-(4 * q as i64)..=(4 * q as i64));
        let disc = t * t - 4 * n;
        if disc <= 0 || (disc as f64).sqrt().fract() == 0.0 {
            continue;
        }
        let r = ((t.abs() as f64) + (disc as f64).sqrt()) / 2.0;
        if r <= bound - 1e-9 {
            return vec![n, -t, 1];
        }
    }
}

fn main() {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "crates/core/data/forms".into()).into();
    std::fs::create_dir_all(&out).expect("create output dir");
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    for sp in &SPACES {
        let field = make_field(sp.d).expect("field");
        let aux: Vec<u64> = AUX.iter().copied().filter(|q| sp.level % q != 0 && sp.d % q != 0).collect();
        let ctx = SieveContext::new(&field, &aux).expect("sieve context");
        let mut forms = Vec::new();
        let mut rejected = 0;
        while forms.len() < sp.non_cm {
            let field_degree = if rng.gen_bool(0.5) { 1 } else { 2 };
            let eigenvalues: BTreeMap<u64, Vec<BigInt>> = aux
                .iter()
                .map(|&q| {
                    let deg = if field_degree == 2 && rng.gen_bool(0.7) { 2 } else { 1 };
                    (q, random_minpoly(&mut rng, q, deg).into_iter().map(BigInt::from).collect())
                })
                .collect();
            let rec = NewformRecord {
                label: label(sp.level, forms.len()),
                level: sp.level,
                char_conductor: sp.char_conductor,
                char_order: 2,
                field_degree,
                eigenvalues,
                cm_discriminant: None,
            };
            rec.validate().expect("generated record is valid");
            let v = ctx.discard(&rec, (20, 1000)).expect("sieve");
            if v.survivors().is_empty() {
                forms.push(rec);
            } else {
                rejected += 1;
            }
        }
        for k in 0..sp.cm {
            let twist: i64 = [1, -4, 12][k % 3];
            let eigenvalues = aux
                .iter()
                .map(|&q| {
                    let s = if twist == 1 { 1 } else { kronecker_prime(twist, q) as i64 };
                    (q, vec![BigInt::from(-s * cm_trace(q)), BigInt::from(1)])
                })
                .collect();
            forms.push(NewformRecord {
                label: label(sp.level, forms.len()),
                level: sp.level,
                char_conductor: sp.char_conductor,
                char_order: 2,
                field_degree: 1,
                eigenvalues,
                cm_discriminant: Some(-8),
            });
        }
        let path = out.join(sp.file);
        std::fs::write(&path, forms_to_json(&forms) + "\n").expect("write fixture");
        println!("{}: {} records ({} draws rejected)", path.display(), forms.len(), rejected);
    }
}
