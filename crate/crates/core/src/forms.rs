//! Newform eigenvalue records, JSON ingestion, the trace sieve ("Mazur's
//! trick") and the CM-form criterion.
//!
//! For a form f and an auxiliary prime q the sieve builds an integer B_q
//! that every exponent p compatible with some Frey curve must divide. The
//! candidate eigenvalues are closed under the twist ambiguity of the
//! character: with m the character order,
//!
//! * q split, good reduction: a = ζ·t with ζ^{2m} = 1, t a possible trace;
//! * q split, multiplicative: a = ζ·(q+1) with ζ^{2m} = 1;
//! * q inert: a² − 2qη = ζ·t with η^m = 1, ζ^{2m} = 1, t a trace over F_{q²}.
//!
//! Each family is the root set of an integer polynomial P, and B_q is
//! q·∏ Res(minpoly(a_q), P). Resultants against a monic minpoly are computed
//! as det P(C) for the companion matrix C.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::is_prime_u64;
use crate::error::{Error, Result};
use crate::frey::{trace_set, TraceSet};
use crate::poly::{det_bareiss, zpoly_big, Poly};
use crate::quadfield::{QuadField, Splitting};

const HASSE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewformRecord {
    pub label: String,
    pub level: u64,
    pub char_conductor: u64,
    pub char_order: u32,
    pub field_degree: u32,
    /// q → monic minimal polynomial of a_q, constant term first.
    pub eigenvalues: BTreeMap<u64, Vec<BigInt>>,
    pub cm_discriminant: Option<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    label: String,
    level: u64,
    char_conductor: u64,
    char_order: u32,
    field_degree: u32,
    ap: BTreeMap<String, Vec<i64>>,
    cm: serde_json::Value,
}

#[derive(Serialize)]
struct RawRecordOut<'a> {
    label: &'a str,
    level: u64,
    char_conductor: u64,
    char_order: u32,
    field_degree: u32,
    ap: BTreeMap<String, Vec<i64>>,
    cm: Option<i64>,
}

impl NewformRecord {
    /// Check monicity, degrees and the Hasse bound.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Forms(format!("{}: {msg}", self.label)));
        if self.level == 0 || self.char_order == 0 || self.field_degree == 0 || self.char_conductor == 0 {
            return fail("level, char_conductor, char_order and field_degree must be positive".into());
        }
        for (&q, mp) in &self.eigenvalues {
            if !is_prime_u64(q) {
                return fail(format!("ap key {q} is not prime"));
            }
            if mp.len() < 2 {
                return fail(format!("minpoly of a_{q} has degree < 1"));
            }
            if !mp.last().is_some_and(|c| c.is_one()) {
                return fail(format!("minpoly of a_{q} is not monic"));
            }
            let deg = (mp.len() - 1) as u32;
            if !self.field_degree.is_multiple_of(deg) {
                return fail(format!("minpoly of a_{q} has degree {deg} not dividing {}", self.field_degree));
            }
            let worst = max_root_abs(mp)?;
            let bound = 2.0 * (q as f64).sqrt();
            if worst > bound + HASSE_TOL {
                return fail(format!("a_{q} violates the Hasse bound: |root| = {worst:.6} > {bound:.6}"));
            }
        }
        Ok(())
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let ap = self
            .eigenvalues
            .iter()
            .map(|(q, v)| (q.to_string(), v.iter().map(|c| c.to_i64().unwrap_or(i64::MAX)).collect()))
            .collect();
        serde_json::to_value(RawRecordOut {
            label: &self.label,
            level: self.level,
            char_conductor: self.char_conductor,
            char_order: self.char_order,
            field_degree: self.field_degree,
            ap,
            cm: self.cm_discriminant,
        })
        .expect("record serializes")
    }
}

impl Serialize for NewformRecord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(s)
    }
}

/// Largest absolute value of a root of a monic integer polynomial.
pub fn max_root_abs(mp: &[BigInt]) -> Result<f64> {
    let n = mp.len() - 1;
    let c: Vec<f64> = mp.iter().map(|x| x.to_f64().unwrap_or(f64::INFINITY)).collect();
    if n == 1 {
        return Ok(c[0].abs());
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i];
    }
    let eig = m.complex_eigenvalues();
    let worst = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !worst.is_finite() {
        return Err(Error::Forms("eigenvalue computation did not converge".into()));
    }
    Ok(worst)
}

fn line_of_nth_label(text: &str, n: usize) -> Option<usize> {
    let (pos, _) = text.match_indices("\"label\"").nth(n)?;
    Some(text[..pos].matches('\n').count() + 1)
}

pub fn parse_forms_str(text: &str) -> Result<Vec<NewformRecord>> {
    let raw: Vec<RawRecord> =
        serde_json::from_str(text).map_err(|e| Error::Forms(format!("malformed forms file: {e}")))?;
    let mut out = Vec::with_capacity(raw.len());
    for (i, r) in raw.into_iter().enumerate() {
        let line = line_of_nth_label(text, i).map(|l| format!("line {l}, ")).unwrap_or_default();
        let ctx = |msg: String| Error::Forms(format!("{line}record {i} ({}): {msg}", r.label));
        let cm_discriminant = match &r.cm {
            serde_json::Value::Null => None,
            v => Some(v.as_i64().ok_or_else(|| ctx("cm must be an integer or null".into()))?),
        };
        let mut eigenvalues = BTreeMap::new();
        for (k, v) in &r.ap {
            let q: u64 = k.parse().map_err(|_| ctx(format!("ap key {k:?} is not a decimal prime")))?;
            eigenvalues.insert(q, v.iter().map(|&c| BigInt::from(c)).collect());
        }
        let rec = NewformRecord {
            label: r.label.clone(),
            level: r.level,
            char_conductor: r.char_conductor,
            char_order: r.char_order,
            field_degree: r.field_degree,
            eigenvalues,
            cm_discriminant,
        };
        rec.validate().map_err(|e| {
            let msg = match e {
                Error::Forms(m) => m,
                other => other.to_string(),
            };
            let prefix = format!("{}: ", r.label);
            ctx(msg.strip_prefix(&prefix).map(str::to_string).unwrap_or(msg))
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn parse_forms(path: &Path) -> Result<Vec<NewformRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_forms_str(&text).map_err(|e| match e {
        Error::Forms(m) => Error::Forms(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// One record per line, keys in file-format order, ap keys ascending.
pub fn forms_to_json(forms: &[NewformRecord]) -> String {
    let lines: Vec<String> = forms
        .iter()
        .map(|f| {
            let ap: Vec<String> = f
                .eigenvalues
                .iter()
                .map(|(q, v)| {
                    let cs: Vec<String> = v.iter().map(|c| c.to_string()).collect();
                    format!("\"{q}\": [{}]", cs.join(", "))
                })
                .collect();
            let cm = f.cm_discriminant.map_or("null".to_string(), |c| c.to_string());
            format!(
                "  {{\"label\": {}, \"level\": {}, \"char_conductor\": {}, \"char_order\": {}, \"field_degree\": {}, \"ap\": {{{}}}, \"cm\": {cm}}}",
                serde_json::to_string(&f.label).expect("string serializes"),
                f.level,
                f.char_conductor,
                f.char_order,
                f.field_degree,
                ap.join(", ")
            )
        })
        .collect();
    format!("[\n{}\n]", lines.join(",\n"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PStatus {
    Discarded { q: u64 },
    SurvivorCm,
    SurvivorUnknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SieveVerdict {
    pub label: String,
    pub statuses: BTreeMap<u64, PStatus>,
    /// q → B_q in decimal. A discard at q certifies p ∤ B_q ≠ 0.
    pub certificates: BTreeMap<u64, String>,
}

impl SieveVerdict {
    pub fn survivors(&self) -> BTreeSet<u64> {
        self.statuses.iter().filter(|(_, s)| !matches!(s, PStatus::Discarded { .. })).map(|(&p, _)| p).collect()
    }
}

/// x^k − c^k.
fn binom_diff(k: usize, c: &BigInt) -> Poly<BigInt> {
    let mut v = vec![BigInt::zero(); k + 1];
    v[0] = -num_traits::pow(c.clone(), k);
    v[k] = BigInt::one();
    zpoly_big(v)
}

/// (x² − s)^k as a polynomial in x, s an integer.
fn shifted_square_pow(s: &BigInt, k: u32) -> Poly<BigInt> {
    zpoly_big(vec![-s.clone(), BigInt::zero(), BigInt::one()]).pow(k)
}

/// Real and imaginary parts of (x² − i·s)^k.
fn shifted_square_pow_imag(s: &BigInt, k: u32) -> (Poly<BigInt>, Poly<BigInt>) {
    let z = BigInt::zero();
    let mut re = zpoly_big(vec![BigInt::one()]);
    let mut im = zpoly_big(vec![]);
    let x2 = zpoly_big(vec![z.clone(), z.clone(), BigInt::one()]);
    let ms = zpoly_big(vec![-s.clone()]);
    // (re + i·im)(x² − i s) = (re·x² + im·s) + i(im·x² − re·s)
    for _ in 0..k {
        let nre = re.mul(&x2).sub(&im.mul(&ms));
        let nim = im.mul(&x2).add(&re.mul(&ms));
        re = nre;
        im = nim;
    }
    (re, im)
}

/// Polynomial whose roots are the inert-case candidates for one trace t.
fn inert_candidates(q: u64, t: i64, m: u32) -> Result<Poly<BigInt>> {
    let s = BigInt::from(2 * q);
    let tk = num_traits::pow(BigInt::from(t), 2 * m as usize);
    let minus_tk = zpoly_big(vec![-tk.clone()]);
    let real_factor = |sign: i64| shifted_square_pow(&(&s * sign), 2 * m).add(&minus_tk);
    match m {
        1 => Ok(real_factor(1)),
        2 => Ok(real_factor(1).mul(&real_factor(-1))),
        4 => {
            let (re, im) = shifted_square_pow_imag(&s, 2 * m);
            let re = re.add(&minus_tk);
            // h(i)·h(−i) = re² + im²
            let imag_pair = re.mul(&re).add(&im.mul(&im));
            Ok(real_factor(1).mul(&real_factor(-1)).mul(&imag_pair))
        }
        _ => Err(Error::Forms(format!("character order {m} is not supported by the sieve"))),
    }
}

/// Res(mp, P) for monic mp, as det P(C_mp).
pub fn resultant_monic(mp: &[BigInt], p: &Poly<BigInt>) -> BigInt {
    let n = mp.len() - 1;
    let mut c = vec![vec![BigInt::zero(); n]; n];
    for i in 1..n {
        c[i][i - 1] = BigInt::one();
    }
    for i in 0..n {
        c[i][n - 1] = -mp[i].clone();
    }
    let matmul = |a: &Vec<Vec<BigInt>>, b: &Vec<Vec<BigInt>>| -> Vec<Vec<BigInt>> {
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).fold(BigInt::zero(), |acc, k| acc + &a[i][k] * &b[k][j])).collect())
            .collect()
    };
    // Horner: acc = acc·C + coeff·I
    let mut acc = vec![vec![BigInt::zero(); n]; n];
    for coeff in p.coeffs.iter().rev() {
        acc = matmul(&acc, &c);
        for (i, row) in acc.iter_mut().enumerate() {
            row[i] += coeff;
        }
    }
    det_bareiss(acc, &BigInt::zero())
}

/// The candidate polynomials entering B_q, with a short description each.
pub fn candidate_polys(ts: &TraceSet, m: u32) -> Result<Vec<(String, Poly<BigInt>)>> {
    let q = ts.q;
    let k = 2 * m as usize;
    let mut out = Vec::new();
    match ts.splitting {
        Splitting::Split => {
            for &t in &ts.good {
                out.push((format!("trace {t}"), binom_diff(k, &BigInt::from(t))));
            }
            if ts.multiplicative_possible {
                out.push(("multiplicative".into(), binom_diff(k, &BigInt::from(q + 1))));
            }
        }
        Splitting::Inert => {
            for &t in &ts.good {
                out.push((format!("trace {t}"), inert_candidates(q, t, m)?));
            }
        }
        Splitting::Ramified => return Err(Error::Forms(format!("auxiliary prime {q} ramifies in K"))),
    }
    Ok(out)
}

/// B_q for one form; `None` if the form has no a_q.
pub fn sieve_certificate(ts: &TraceSet, form: &NewformRecord) -> Result<Option<BigInt>> {
    let Some(mp) = form.eigenvalues.get(&ts.q) else {
        return Ok(None);
    };
    let mut b = BigInt::from(ts.q);
    for (_, poly) in candidate_polys(ts, form.char_order)? {
        b *= resultant_monic(mp, &poly);
        if b.is_zero() {
            break;
        }
    }
    Ok(Some(b.abs()))
}

/// Trace data for a fixed field and set of auxiliary primes, reusable
/// across forms.
pub struct SieveContext {
    pub d: u64,
    pub aux: Vec<u64>,
    traces: Vec<TraceSet>,
}

impl SieveContext {
    pub fn new(field: &QuadField, aux_qs: &[u64]) -> Result<Self> {
        let aux: Vec<u64> = aux_qs.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if aux.is_empty() {
            return Err(Error::Forms("no auxiliary primes".into()));
        }
        for &q in &aux {
            if q == 2 || !is_prime_u64(q) || field.d.is_multiple_of(q) {
                return Err(Error::Forms(format!("auxiliary prime {q} must be an odd prime coprime to 2d")));
            }
        }
        let traces = aux.iter().map(|&q| trace_set(field, q)).collect::<Result<Vec<_>>>()?;
        Ok(SieveContext { d: field.d, aux, traces })
    }

    pub fn discard(&self, form: &NewformRecord, p_range: (u64, u64)) -> Result<SieveVerdict> {
        if let Some(q) = self.aux.iter().find(|&&q| form.level.is_multiple_of(q)) {
            return Err(Error::Forms(format!("{}: auxiliary prime {q} divides the level", form.label)));
        }
        let mut certs: Vec<(u64, BigInt)> = Vec::new();
        for ts in &self.traces {
            if let Some(b) = sieve_certificate(ts, form)? {
                certs.push((ts.q, b));
            }
        }
        let survivor = if form.cm_discriminant.is_some() { PStatus::SurvivorCm } else { PStatus::SurvivorUnknown };
        let mut statuses = BTreeMap::new();
        for p in crate::arith::primes_in(p_range.0, p_range.1) {
            let pb = BigInt::from(p);
            let status = certs
                .iter()
                .find(|(_, b)| !b.is_zero() && !b.is_multiple_of(&pb))
                .map(|&(q, _)| PStatus::Discarded { q })
                .unwrap_or(survivor);
            statuses.insert(p, status);
        }
        Ok(SieveVerdict {
            label: form.label.clone(),
            statuses,
            certificates: certs.into_iter().map(|(q, b)| (q, b.to_string())).collect(),
        })
    }
}

pub fn mazur_discard(
    field: &QuadField,
    form: &NewformRecord,
    aux_qs: &[u64],
    p_range: (u64, u64),
) -> Result<SieveVerdict> {
    SieveContext::new(field, aux_qs)?.discard(form, p_range)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CmDecision {
    DiscardSplitCartan,
    DiscardEllenberg,
    Keep,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CmOutcome {
    pub decision: CmDecision,
    pub warning: Option<String>,
}

/// Forms with CM by Z[√−2]: p ≡ 1, 3 mod 8 splits in Q(√−2), so the image
/// lies in a split Cartan; otherwise an analytic threshold (usable only
/// when 2 splits in K) may apply.
pub fn cm_criterion(form: &NewformRecord, p: u64, field: &QuadField, threshold: Option<u64>) -> CmOutcome {
    if form.cm_discriminant != Some(-8) {
        return CmOutcome {
            decision: CmDecision::Keep,
            warning: Some(format!("{}: unsupported CM discriminant {:?}", form.label, form.cm_discriminant)),
        };
    }
    if matches!(p % 8, 1 | 3) {
        return CmOutcome { decision: CmDecision::DiscardSplitCartan, warning: None };
    }
    match threshold {
        Some(t) if p > t && field.d % 8 == 1 => CmOutcome { decision: CmDecision::DiscardEllenberg, warning: None },
        Some(_) if field.d % 8 != 1 => CmOutcome {
            decision: CmDecision::Keep,
            warning: Some(format!("threshold ignored: 2 does not split in Q(sqrt({}))", field.d)),
        },
        _ => CmOutcome { decision: CmDecision::Keep, warning: None },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::resultant;
    use crate::quadfield::make_field;

    fn rec(ap: &[(u64, &[i64])], order: u32, cm: Option<i64>) -> NewformRecord {
        NewformRecord {
            label: "t".into(),
            level: 768,
            char_conductor: 12,
            char_order: order,
            field_degree: 2,
            eigenvalues: ap.iter().map(|(q, c)| (*q, c.iter().map(|&x| BigInt::from(x)).collect())).collect(),
            cm_discriminant: cm,
        }
    }

    #[test]
    fn parse_accepts_and_rejects() {
        let ok = r#"[{"label":"768.a","level":768,"char_conductor":12,"char_order":2,
            "field_degree":1,"ap":{"5":[2,1]},"cm":null}]"#;
        let f = parse_forms_str(ok).unwrap();
        assert_eq!(f[0].eigenvalues[&5], vec![BigInt::from(2), BigInt::one()]);
        let hasse = ok.replace("[2,1]", "[7,1]");
        let e = parse_forms_str(&hasse).unwrap_err().to_string();
        assert!(e.contains("Hasse") && e.contains("768.a") && e.contains("line 1"), "{e}");
        let nonmonic = ok.replace("[2,1]", "[2,2]");
        assert!(parse_forms_str(&nonmonic).unwrap_err().to_string().contains("monic"));
        let missing = ok.replace(",\"cm\":null", "");
        assert!(parse_forms_str(&missing).unwrap_err().to_string().contains("cm"));
        assert!(parse_forms_str("[{").is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = vec![rec(&[(5, &[-20, 0, 1]), (11, &[3, 1])], 2, Some(-8))];
        assert_eq!(parse_forms_str(&forms_to_json(&f)).unwrap(), f);
    }

    #[test]
    fn hasse_on_quadratic_minpoly() {
        // x² − 20: roots ±4.47 ≤ 2√5 = 4.472
        assert!(rec(&[(5, &[-20, 0, 1])], 1, None).validate().is_ok());
        assert!(rec(&[(5, &[-21, 0, 1])], 1, None).validate().is_err());
        // x² + 2x + 5: complex roots of modulus √5
        assert!(rec(&[(5, &[5, 2, 1])], 1, None).validate().is_ok());
    }

    #[test]
    fn companion_resultant_matches_sylvester() {
        let mp: Vec<BigInt> = [-3i64, 1, 1].iter().map(|&x| BigInt::from(x)).collect();
        let ts = trace_set(&make_field(6).unwrap(), 7).unwrap();
        for (_, p) in candidate_polys(&ts, 2).unwrap() {
            assert_eq!(resultant_monic(&mp, &p), resultant(&zpoly_big(mp.clone()), &p));
        }
    }

    #[test]
    fn gaussian_pair_is_the_norm() {
        // m = 4 closure contains the m = 2 closure
        let f = make_field(6).unwrap();
        let ts = trace_set(&f, 7).unwrap();
        let t = *ts.good.iter().next().unwrap();
        let p4 = inert_candidates(7, t, 4).unwrap();
        let p2 = inert_candidates(7, t, 2).unwrap();
        assert_eq!(p4.degree(), Some(64));
        // x² = 14 + t is a root of both
        let mp = vec![BigInt::from(-(14 + t)), BigInt::zero(), BigInt::one()];
        assert!(resultant_monic(&mp, &p2).is_zero());
        assert!(resultant_monic(&mp, &p4).is_zero());
    }

    #[test]
    fn self_match_survives_and_large_trace_is_discarded() {
        let f = make_field(6).unwrap();
        let curve = crate::frey::build_curve(1, 1, &f).unwrap();
        let mut ap = Vec::new();
        for q in [5u64, 7, 11, 13] {
            let tr = crate::frey::reduce_and_trace(&curve, &f, q).unwrap();
            let t = tr[0].a.unwrap();
            let qi = q as i64;
            ap.push(match (tr[0].reduction, tr[0].residue_degree) {
                (crate::frey::Reduction::Multiplicative, _) => (q, vec![-(qi + 1), 1]),
                (_, 1) => (q, vec![-t, 1]),
                _ => (q, vec![-(t + 2 * qi), 0, 1]),
            });
        }
        let ap_ref: Vec<(u64, &[i64])> = ap.iter().map(|(q, v)| (*q, v.as_slice())).collect();
        let v = mazur_discard(&f, &rec(&ap_ref, 2, None), &[5, 7, 11, 13], (20, 1000)).unwrap();
        assert!(v.statuses.values().all(|s| *s == PStatus::SurvivorUnknown));

        // a_5 = 5 with trivial character: B_5 = 5·∏(25 − t²)·(25 − 36)
        let v = mazur_discard(&f, &rec(&[(5, &[-5, 1])], 1, None), &[5], (20, 1000)).unwrap();
        assert!(v.survivors().is_empty(), "{:?}", v.survivors());
        // with a quadratic character the multiplicative term 5⁴ − 6⁴ = −11·61 survives at 61
        let v = mazur_discard(&f, &rec(&[(5, &[-5, 1])], 2, None), &[5], (20, 1000)).unwrap();
        assert!(v.survivors().contains(&61));
    }

    #[test]
    fn aux_errors() {
        let f = make_field(6).unwrap();
        let r = rec(&[], 2, None);
        assert!(mazur_discard(&f, &r, &[], (20, 30)).is_err());
        assert!(mazur_discard(&f, &r, &[3], (20, 30)).is_err());
        let mut r2 = r.clone();
        r2.level = 768 * 5;
        assert!(mazur_discard(&f, &r2, &[5], (20, 30)).is_err());
    }

    #[test]
    fn cm_decisions() {
        let f6 = make_field(6).unwrap();
        let f129 = make_field(129).unwrap();
        let cm = rec(&[], 2, Some(-8));
        assert_eq!(cm_criterion(&cm, 17, &f6, None).decision, CmDecision::DiscardSplitCartan);
        assert_eq!(cm_criterion(&cm, 70000, &f129, Some(64690)).decision, CmDecision::DiscardEllenberg);
        assert_eq!(cm_criterion(&cm, 23, &f6, None).decision, CmDecision::Keep);
        let other = rec(&[], 2, Some(-4));
        let o = cm_criterion(&other, 17, &f6, None);
        assert_eq!(o.decision, CmDecision::Keep);
        assert!(o.warning.is_some());
    }
}
