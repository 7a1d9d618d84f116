//! The Nebentypus ε and the local data of the Hecke character χ.
//!
//! Character values are stored as exponents k of i (value i^k, k mod 4).
//! χ at the primes above 2 is defined on (O/8)^× by its values on a
//! generator list and extended by a closure walk that also checks
//! consistency. Nothing here evaluates χ on ideles; only local components
//! and the unit compatibility identities are needed.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::arith::{discrete_log, legendre, primitive_root};
use crate::error::{Error, Result};
use crate::quadfield::{fundamental_unit, QuadField, QuadInt, Splitting};
use crate::residue::{Elt, Modulus, NormForm, ResidueRing};
use crate::unitgenus::classify_unit;

/// Exponent of i for δ_m(n), m ∈ {−1, 2, −2}, n odd.
pub fn delta(m: i8, n: i64) -> u8 {
    let r = n.rem_euclid(8);
    let trivial = match m {
        -1 => r % 4 == 1,
        2 => r == 1 || r == 7,
        -2 => r == 1 || r == 3,
        _ => panic!("delta is defined for -1, 2, -2 only"),
    };
    if trivial {
        0
    } else {
        2
    }
}

fn legendre_exp(n: i64, p: u64) -> u8 {
    if legendre(n, p) == 1 {
        0
    } else {
        2
    }
}

/// Which printed rule fixes the exponent of 2 in N_ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ERule {
    /// e = 2 iff #Q3 + #Q5 is odd, the rule forced by ε₂ = δ₋₁^{#Q3+#Q5}.
    Corrected,
    /// e = 2 iff #Q5 + #Q7 is odd, as stated next to the definition of N_ε.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalComponent {
    Trivial,
    QuadraticLegendre,
    Order4,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NebentypusSpec {
    pub local_components: BTreeMap<u64, LocalComponent>,
    /// ε₂ = δ₋₁ when true, trivial otherwise.
    pub two_component_is_delta_minus1: bool,
    pub e_rule: ERule,
    pub two_exponent: u32,
    pub conductor: u64,
    pub order: u8,
    pub fixed_field_degree: u8,
    pub fixed_field: String,
    /// Radicand m with fixed field Q(√m), when the order is at most 2.
    pub fixed_field_radicand: Option<u64>,
    /// Least primitive root g per order-4 component; ε_p(g) = i.
    pub order4_generators: BTreeMap<u64, u64>,
    pub parity_even: bool,
}

impl NebentypusSpec {
    /// ε_p(n) for a finite component p (p = 2 is ε₂), as an exponent of i.
    pub fn eval_local(&self, p: u64, n: i64) -> Option<u8> {
        if p == 2 {
            if n % 2 == 0 {
                return None;
            }
            return Some(if self.two_component_is_delta_minus1 { delta(-1, n) } else { 0 });
        }
        let comp = self.local_components.get(&p)?;
        let r = n.rem_euclid(p as i64) as u64;
        if r == 0 {
            return None;
        }
        Some(match comp {
            LocalComponent::Trivial => 0,
            LocalComponent::QuadraticLegendre => legendre_exp(n, p),
            LocalComponent::Order4 => {
                let g = self.order4_generators[&p];
                (discrete_log(g, r, p).expect("g is a primitive root") % 4) as u8
            }
        })
    }

    /// ε₂(n) as an exponent of i.
    pub fn eps2(&self, n: i64) -> u8 {
        self.eval_local(2, n).unwrap_or(0)
    }
}

pub fn build_nebentypus(field: &QuadField) -> NebentypusSpec {
    build_nebentypus_with_rule(field, ERule::Corrected)
}

pub fn build_nebentypus_with_rule(field: &QuadField, rule: ERule) -> NebentypusSpec {
    let (n3, n5, n7) = (field.q(3).len(), field.q(5).len(), field.q(7).len());
    let mut local_components = BTreeMap::new();
    let mut order4_generators = BTreeMap::new();
    for &p in &field.ramified_odd_primes {
        let c = match p % 8 {
            3 => LocalComponent::QuadraticLegendre,
            5 => {
                order4_generators.insert(p, primitive_root(p));
                LocalComponent::Order4
            }
            _ => LocalComponent::Trivial,
        };
        local_components.insert(p, c);
    }
    let odd_count = match rule {
        ERule::Corrected => n3 + n5,
        ERule::Printed => n5 + n7,
    };
    let two_exponent = if odd_count % 2 == 1 { 2 } else { 0 };
    let odd_part: u64 = field.q(3).iter().chain(field.q(5)).product();
    let conductor = (1u64 << two_exponent) * odd_part;
    let (order, fixed_field_degree) = if n5 > 0 {
        (4, 4)
    } else if n3 > 0 {
        (2, 2)
    } else {
        (1, 1)
    };
    let (fixed_field, fixed_field_radicand) = match order {
        1 => ("Q".to_string(), None),
        2 => {
            let m: u64 = field.q(3).iter().product();
            (format!("Q(sqrt({m}))"), Some(m))
        }
        _ => {
            let m: u64 = field.q(5).iter().product();
            (format!("cyclic quartic field containing Q(sqrt({m}))"), None)
        }
    };
    let mut spec = NebentypusSpec {
        local_components,
        two_component_is_delta_minus1: (n3 + n5) % 2 == 1,
        e_rule: rule,
        two_exponent,
        conductor,
        order,
        fixed_field_degree,
        fixed_field,
        fixed_field_radicand,
        order4_generators,
        parity_even: false,
    };
    let mut total = spec.eps2(-1) as u32;
    for &p in &field.ramified_odd_primes {
        total += spec.eval_local(p, -1).unwrap_or(0) as u32;
    }
    spec.parity_even = total.is_multiple_of(4);
    spec
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OddChi {
    Trivial,
    /// The quadratic character δ_p of (Z/p)^×.
    Delta,
    /// ε_p·δ_p for p ≡ 5 mod 8.
    EpsDelta,
}

/// The case distinctions for χ at 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoCase {
    /// d ≡ 1 mod 8: δ₋₂ on 𝔭₂, trivial on the conjugate.
    Split,
    /// d ≡ 5 mod 8.
    Inert,
    Class7,
    Class15,
    Class3,
    Class11,
    /// d̃ ≡ 6 mod 8 with #Q3 + #Q5 even.
    Class6Even,
    /// d̃ ≡ 6 mod 8 with #Q3 + #Q5 odd.
    Class6Odd,
    /// d̃ ≡ 2 mod 8 with #Q3 + #Q5 even.
    Class2Even,
    /// d̃ ≡ 2 mod 8 with #Q3 + #Q5 odd.
    Class2Odd,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratorValue {
    pub generator: String,
    /// Exponent of i.
    pub value: u8,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChiLocalData {
    pub d: u64,
    pub odd_components: BTreeMap<u64, OddChi>,
    pub two_case: TwoCase,
    pub generator_values: Vec<GeneratorValue>,
    /// Exponent a of the conductor at 2 as tabulated (an exponent of 𝔭₂
    /// when 2 ramifies or splits, of 2 when 2 is inert).
    pub conductor_exponent: u32,
    /// The same exponent computed from the character values.
    pub conductor_exponent_computed: u32,
    pub conductor_table_agrees: bool,
    /// Odd primes where χ ramifies: Q1 ∪ Q5 ∪ Q7.
    pub odd_conductor_primes: Vec<u64>,
    /// Archimedean components at the two real places.
    pub archimedean: [String; 2],
    /// For d ≡ 1 mod 8: the even root r of x² − x − (d−1)/4 mod 8, so that
    /// ω ↦ r under the completion at 𝔭₂.
    pub split_root: Option<i64>,
    #[serde(skip)]
    ring: ResidueRing,
    #[serde(skip)]
    values: HashMap<Elt, u8>,
}

fn two_case_of(field: &QuadField) -> TwoCase {
    let d = field.d;
    let n35 = field.q(3).len() + field.q(5).len();
    match d % 8 {
        1 => TwoCase::Split,
        5 => TwoCase::Inert,
        _ if d % 4 == 3 => match d % 16 {
            7 => TwoCase::Class7,
            15 => TwoCase::Class15,
            3 => TwoCase::Class3,
            _ => TwoCase::Class11,
        },
        _ if d % 8 == 6 => {
            if n35.is_multiple_of(2) {
                TwoCase::Class6Even
            } else {
                TwoCase::Class6Odd
            }
        }
        _ => {
            if n35.is_multiple_of(2) {
                TwoCase::Class2Even
            } else {
                TwoCase::Class2Odd
            }
        }
    }
}

/// Tabulated exponent a; the split case is fixed to 3 on 𝔭₂.
fn table_exponent(d: u64) -> u32 {
    match d % 8 {
        1 | 5 => 3,
        _ if d % 4 == 3 => 5,
        _ => match d % 16 {
            14 => 0,
            6 => 4,
            2 => 3,
            _ => 4,
        },
    }
}

impl ChiLocalData {
    /// χ₂(u) as an exponent of i, for u with odd norm.
    pub fn eval_chi2(&self, u: &QuadInt) -> Result<u8> {
        self.eval_residue(self.ring.reduce(u))
    }

    /// χ₂ on a residue of (O/8)^×.
    pub fn eval_residue(&self, u: Elt) -> Result<u8> {
        let u = self.ring.canon(u.0 as i128, u.1 as i128);
        if let Some(r) = self.split_root {
            let n = (u.0 + u.1 * r).rem_euclid(8);
            if n % 2 == 0 {
                return Err(Error::Hecke("element is not a unit at the prime above 2".into()));
            }
            return Ok(delta(-2, n));
        }
        self.values.get(&u).copied().ok_or_else(|| Error::Hecke(format!("{u:?} is not a unit of O/8")))
    }

    pub fn eval_int(&self, n: i64) -> Result<u8> {
        self.eval_residue(self.ring.from_int(n))
    }

    pub fn ring(&self) -> &ResidueRing {
        &self.ring
    }
}

/// Closure walk assigning χ on all of (O/8)^× from generator values.
fn extend_character(ring: &ResidueRing, gens: &[(Elt, u8)]) -> Result<HashMap<Elt, u8>> {
    let mut values = HashMap::new();
    let one = ring.one();
    values.insert(one, 0u8);
    let mut stack = vec![one];
    while let Some(x) = stack.pop() {
        for &(g, k) in gens {
            let y = ring.mul(x, g);
            let vy = (values[&x] + k) % 4;
            match values.get(&y) {
                Some(&v) if v != vy => {
                    return Err(Error::Hecke(format!("generator values are inconsistent at {y:?}")));
                }
                Some(_) => {}
                None => {
                    values.insert(y, vy);
                    stack.push(y);
                }
            }
        }
    }
    if values.len() != ring.units().len() {
        return Err(Error::Hecke("generators do not generate (O/8)^x".into()));
    }
    Ok(values)
}

pub fn build_chi_local(field: &QuadField) -> Result<ChiLocalData> {
    let d = field.d;
    let ring = ResidueRing::build(field, Modulus::Rational2(3))?;
    let case = two_case_of(field);
    let mut odd_components = BTreeMap::new();
    for &p in &field.ramified_odd_primes {
        let c = match p % 8 {
            1 | 7 => OddChi::Delta,
            5 => OddChi::EpsDelta,
            _ => OddChi::Trivial,
        };
        odd_components.insert(p, c);
    }
    let gv = |s: &str, v: u8| GeneratorValue { generator: s.to_string(), value: v };
    let mut split_root = None;
    let mut values = HashMap::new();
    let generator_values;
    if case == TwoCase::Split {
        let c = ((d - 1) / 4) as i64;
        let r = (0..8i64)
            .find(|&r| r % 2 == 0 && (r * r - r - c).rem_euclid(8) == 0)
            .ok_or_else(|| Error::Hecke("no even root of x^2 - x - (d-1)/4 mod 8".into()))?;
        split_root = Some(r);
        // Z₂^× at 𝔭₂ is generated by −1 and 3.
        generator_values = vec![gv("-1 at p2", delta(-2, -1)), gv("3 at p2", delta(-2, 3))];
    } else {
        let s = ring.reduce(&field.sqrt_d());
        let (labelled, gens): (Vec<GeneratorValue>, Vec<(Elt, u8)>) = match case {
            TwoCase::Inert => {
                let zeta = *ring
                    .units()
                    .iter()
                    .filter(|&&u| u != ring.one() && ring.pow(u, 3) == ring.one())
                    .min()
                    .ok_or_else(|| Error::Hecke("no cube root of unity mod 8".into()))?;
                // 3 + 2√d = 1 + 4ω
                let t = ring.canon(1, 4);
                (
                    vec![gv("zeta3", 0), gv("sqrt(d)", 1), gv("3+2sqrt(d)", 0), gv("-1", 0)],
                    vec![(zeta, 0), (s, 1), (t, 0), (ring.from_int(-1), 0)],
                )
            }
            TwoCase::Class7 | TwoCase::Class15 | TwoCase::Class3 | TwoCase::Class11 => {
                let vs = if matches!(case, TwoCase::Class7 | TwoCase::Class3) { 2 } else { 0 };
                let (third, label) =
                    if matches!(case, TwoCase::Class7 | TwoCase::Class15) { (5, "5") } else { (-1, "-1") };
                (
                    vec![gv("sqrt(d)", vs), gv("1+2sqrt(d)", 0), gv(label, 2)],
                    vec![(s, vs), (ring.canon(1, 2), 0), (ring.from_int(third), 2)],
                )
            }
            _ => {
                let (v1, vm1) = match case {
                    TwoCase::Class6Even => (0, 0),
                    TwoCase::Class6Odd => (1, 2),
                    TwoCase::Class2Even => (0, 2),
                    _ => (1, 0),
                };
                // χ(5) = 1 is read off the restriction to Z₂^×.
                (
                    vec![gv("1+sqrt(d)", v1), gv("-1", vm1), gv("5", 0)],
                    vec![(ring.canon(1, 1), v1), (ring.from_int(-1), vm1), (ring.from_int(5), 0)],
                )
            }
        };
        values = extend_character(&ring, &gens)?;
        generator_values = labelled;
    }
    let odd_conductor_primes = field.ramified_odd_primes.iter().copied().filter(|p| p % 8 != 3).collect();
    let mut data = ChiLocalData {
        d,
        odd_components,
        two_case: case,
        generator_values,
        conductor_exponent: table_exponent(d),
        conductor_exponent_computed: 0,
        conductor_table_agrees: false,
        odd_conductor_primes,
        archimedean: ["trivial".into(), "sign".into()],
        split_root,
        ring,
        values,
    };
    data.conductor_exponent_computed = computed_conductor(field, &data)?;
    data.conductor_table_agrees = data.conductor_exponent == data.conductor_exponent_computed;
    Ok(data)
}

/// Least k with χ₂ trivial on units ≡ 1 modulo the k-th power of the
/// relevant prime (𝔭₂ when 2 ramifies or splits, (2) when inert).
fn computed_conductor(field: &QuadField, chi: &ChiLocalData) -> Result<u32> {
    let ring = &chi.ring;
    let max_k = match field.two_splitting {
        Splitting::Ramified => 6,
        _ => 3,
    };
    for k in 0..=max_k {
        let mut trivial = true;
        for &u in ring.units() {
            let (x, y) = (u.0 - 1, u.1);
            let in_kernel = match field.two_splitting {
                Splitting::Split => {
                    let r = chi.split_root.unwrap_or(0);
                    (x + y * r).rem_euclid(1 << k) == 0
                }
                Splitting::Inert => x.rem_euclid(1 << k) == 0 && y.rem_euclid(1 << k) == 0,
                Splitting::Ramified => {
                    let n = ring.norm_rep((x, y));
                    n == 0 || n.trailing_zeros() >= k
                }
            };
            if in_kernel && chi.eval_residue(u)? != 0 {
                trivial = false;
                break;
            }
        }
        if trivial {
            return Ok(k);
        }
    }
    Err(Error::Hecke("character is not defined modulo 8".into()))
}

/// χ₂ on 3, 5, 7 against δ₂^{v₂(D)+1}·δ₋₁^{#Q5+#Q7+1}.
pub fn verify_chi2_restriction(field: &QuadField) -> Result<bool> {
    let chi = build_chi_local(field)?;
    let v = field.v2_disc();
    let n57 = (field.q(5).len() + field.q(7).len()) as u32;
    for n in [3i64, 5, 7] {
        let want = ((delta(2, n) as u32 * (v + 1) + delta(-1, n) as u32 * (n57 + 1)) % 4) as u8;
        if chi.eval_int(n)? != want {
            return Ok(false);
        }
    }
    Ok(true)
}

/// χ² = ε₂∘N on every unit of O/8.
pub fn verify_chi_squared(field: &QuadField) -> Result<bool> {
    let chi = build_chi_local(field)?;
    let neb = build_nebentypus(field);
    for &u in chi.ring.units() {
        let n = chi.ring.norm_rep(u) as i64;
        if (2 * chi.eval_residue(u)?) % 4 != neb.eps2(n) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// χ₂(d₀)·ε₂(d₀)·δ₋₂(d₀) = 1 for every odd d₀ that is a norm mod 16.
pub fn verify_comp2(field: &QuadField) -> Result<bool> {
    let chi = build_chi_local(field)?;
    let neb = build_nebentypus(field);
    let ring16 = ResidueRing::build(field, Modulus::Rational2(4))?;
    let norms = ring16.norm_classes_with_constraint(NormForm::Norm)?;
    for &n in &norms {
        let n = n as i64;
        if !(chi.eval_int(n)? + neb.eps2(n) + delta(-2, n)).is_multiple_of(4) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Residue classes mod 8 that are norms, the set used by [`verify_comp2`].
pub fn norm_residues(field: &QuadField) -> Result<BTreeSet<u8>> {
    ResidueRing::build(field, Modulus::Rational2(4))?.norm_classes_with_constraint(NormForm::Norm)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompatibilityReport {
    pub at_minus_one: bool,
    pub at_epsilon: bool,
    /// True when the fundamental unit has norm −1 and the check at ε was
    /// not performed (it is known in that case).
    pub skipped_norm_minus_one: bool,
    pub chi2_at_epsilon: Option<u8>,
    pub p_minus_in_q5_q7: usize,
}

/// Product of all local components of χ at −1 and at ε.
pub fn verify_compatibility(field: &QuadField) -> Result<CompatibilityReport> {
    let chi = build_chi_local(field)?;
    let n57 = field.q(5).len() + field.q(7).len();
    // χ₂(−1), the sign at the second real place, and −1 from each p in Q5 ∪ Q7.
    let at_minus_one = (chi.eval_int(-1)? as usize + 2 + 2 * n57).is_multiple_of(4);
    let eps = fundamental_unit(field);
    if eps.norm == -1 {
        return Ok(CompatibilityReport {
            at_minus_one,
            at_epsilon: true,
            skipped_norm_minus_one: true,
            chi2_at_epsilon: None,
            p_minus_in_q5_q7: 0,
        });
    }
    let report = classify_unit(field, &eps)?;
    let c = report.p_minus.iter().filter(|&&p| p % 8 == 5 || p % 8 == 7).count();
    let v = chi.eval_chi2(&report.epsilon)?;
    Ok(CompatibilityReport {
        at_minus_one,
        at_epsilon: (v as usize + 2 * c).is_multiple_of(4),
        skipped_norm_minus_one: false,
        chi2_at_epsilon: Some(v),
        p_minus_in_q5_q7: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfield::make_field;

    #[test]
    fn nebentypus_examples() {
        let n6 = build_nebentypus(&make_field(6).unwrap());
        assert_eq!((n6.conductor, n6.order), (12, 2));
        assert_eq!(n6.fixed_field_radicand, Some(3));
        let n129 = build_nebentypus(&make_field(129).unwrap());
        assert_eq!((n129.conductor, n129.fixed_field_radicand), (129, Some(129)));
        let n5 = build_nebentypus(&make_field(5).unwrap());
        assert_eq!(n5.order, 4);
        assert_eq!(n5.local_components[&5], LocalComponent::Order4);
        assert_eq!(n5.eval_local(5, 2), Some(1));
        // the printed rule disagrees on d = 6
        let p6 = build_nebentypus_with_rule(&make_field(6).unwrap(), ERule::Printed);
        assert_eq!(p6.conductor, 3);
    }

    #[test]
    fn chi_at_generators_for_d6() {
        let f = make_field(6).unwrap();
        let chi = build_chi_local(&f).unwrap();
        assert_eq!(chi.two_case, TwoCase::Class6Odd);
        assert_eq!(chi.eval_chi2(&f.elt(1, 1)).unwrap(), 1);
        assert_eq!(chi.eval_int(-1).unwrap(), 2);
        assert_eq!(chi.eval_int(1).unwrap(), 0);
        assert_eq!(chi.conductor_exponent, 4);
    }

    #[test]
    fn tabulated_exponents() {
        assert_eq!(build_chi_local(&make_field(5).unwrap()).unwrap().conductor_exponent, 3);
        assert_eq!(build_chi_local(&make_field(14).unwrap()).unwrap().conductor_exponent, 0);
        let c13 = build_chi_local(&make_field(13).unwrap()).unwrap();
        assert_eq!(c13.conductor_exponent_computed, 3);
        let c7 = build_chi_local(&make_field(7).unwrap()).unwrap();
        assert_eq!(c7.conductor_exponent_computed, 5);
    }

    #[test]
    fn restriction_and_compatibility_examples() {
        for d in [6u64, 129, 21] {
            let f = make_field(d).unwrap();
            assert!(verify_chi2_restriction(&f).unwrap(), "d={d}");
            assert!(verify_chi_squared(&f).unwrap(), "d={d}");
            assert!(verify_comp2(&f).unwrap(), "d={d}");
            let c = verify_compatibility(&f).unwrap();
            assert!(c.at_minus_one && c.at_epsilon, "d={d}");
        }
    }

    #[test]
    fn delta_values() {
        assert_eq!([1, 3, 5, 7].map(|n| delta(-2, n)), [0, 0, 2, 2]);
        assert_eq!([1, 3, 5, 7].map(|n| delta(2, n)), [0, 2, 2, 0]);
        assert_eq!([1, 3, 5, 7].map(|n| delta(-1, n)), [0, 2, 0, 2]);
    }
}
