//! Genus data of the fundamental unit: the primes where ε ≡ −1, the integer
//! d₀, which of K(√d₀), K(√2d₀) equals K(√ε), and regeneration of the
//! residue tables relating ε mod 8 to d₀ mod 8.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadfield::{make_field, FundamentalUnit, QuadField, QuadInt};
use crate::residue::{Elt, Modulus, NormForm, ResidueRing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GenusCase {
    /// ε·d₀ is a square in O_K.
    D0,
    /// ε·2d₀ is a square in O_K.
    TwoD0,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitGenusReport {
    pub d: u64,
    pub epsilon: QuadInt,
    pub p_minus: Vec<u64>,
    pub p_plus: Vec<u64>,
    pub d0: u64,
    pub genus_case: GenusCase,
    /// Square root of ε·d₀ or ε·2d₀, whichever exists.
    pub square_root: QuadInt,
    /// ε ≡ −1 mod 𝔭₂³, present only when 8 | D.
    pub eps_mod_p2cubed: Option<bool>,
    /// (v_𝔭₂(ε+1), v_𝔭₂(ε−1)) when 8 | D.
    pub two_adic_valuations: Option<(u32, u32)>,
    /// Whether the valuation criterion agrees with the square oracle.
    pub valuation_criterion_agrees: Option<bool>,
}

/// Residue of a unit modulo the prime above an odd ramified p, as ±1.
fn sign_mod_ramified(field: &QuadField, u: &QuadInt, p: u64) -> Result<i8> {
    let ring = ResidueRing::build(field, Modulus::OddRamified(p))?;
    let r = ring.reduce(u);
    if r == ring.one() {
        Ok(1)
    } else if r == ring.from_int(-1) {
        Ok(-1)
    } else {
        Err(Error::UnitGenus(format!("unit is not ±1 modulo the prime above {p}")))
    }
}

/// Valuation at the ramified prime above 2 (v₂ of the norm).
fn v_p2(z: &QuadInt) -> u32 {
    crate::arith::valuation_big(&z.norm(), 2).unwrap_or(u32::MAX)
}

/// Genus classification of a norm +1 fundamental unit.
pub fn classify_unit(field: &QuadField, eps: &FundamentalUnit) -> Result<UnitGenusReport> {
    if eps.norm == -1 {
        return Err(Error::UnitGenus(format!(
            "norm -1 unit for d = {}: the genus description needs a norm +1 fundamental unit",
            field.d
        )));
    }
    if !eps.value.is_unit() {
        return Err(Error::UnitGenus("not a unit".into()));
    }
    let e = eps.totally_positive_unit();
    let mut p_minus = Vec::new();
    let mut p_plus = Vec::new();
    for &p in &field.ramified_odd_primes {
        if sign_mod_ramified(field, &e, p)? < 0 {
            p_minus.push(p);
        } else {
            p_plus.push(p);
        }
    }
    let d0: u64 = p_minus.iter().product();
    let sq1 = e.scale(&BigInt::from(d0)).sqrt_exact();
    let sq2 = e.scale(&BigInt::from(2 * d0)).sqrt_exact();
    let (genus_case, square_root) = match (sq1, sq2) {
        (Some(w), None) => (GenusCase::D0, w),
        (None, Some(w)) => (GenusCase::TwoD0, w),
        (Some(_), Some(_)) => {
            return Err(Error::UnitGenus("both eps*d0 and eps*2d0 are squares".into()));
        }
        (None, None) => {
            return Err(Error::UnitGenus(format!("neither eps*d0 nor eps*2d0 is a square for d = {}", field.d)));
        }
    };
    let multiplier = if genus_case == GenusCase::TwoD0 { 2 * d0 } else { d0 };
    if multiplier <= 1 {
        return Err(Error::UnitGenus("K(sqrt(eps)) would equal K".into()));
    }
    let (eps_mod_p2cubed, two_adic_valuations, valuation_criterion_agrees) = if field.disc.is_multiple_of(8) {
        let one = field.int(1);
        let vp = v_p2(&(&e + &one));
        let vm = v_p2(&(&e - &one));
        let crit = vp >= 3 && vm == 2;
        (Some(vp >= 3), Some((vp, vm)), Some(crit == (genus_case == GenusCase::TwoD0)))
    } else {
        (None, None, None)
    };
    Ok(UnitGenusReport {
        d: field.d,
        epsilon: e,
        p_minus,
        p_plus,
        d0,
        genus_case,
        square_root,
        eps_mod_p2cubed,
        two_adic_valuations,
        valuation_criterion_agrees,
    })
}

/// ε ≡ −1 at every 𝔭 | d₀ and ε ≡ +1 at the other odd ramified primes.
pub fn verify_theorem12_congruences(field: &QuadField, report: &UnitGenusReport) -> bool {
    let mut all: Vec<u64> = report.p_minus.iter().chain(&report.p_plus).copied().collect();
    all.sort_unstable();
    if all != field.ramified_odd_primes {
        return false;
    }
    if report.d0 != report.p_minus.iter().product::<u64>() {
        return false;
    }
    let check = |ps: &[u64], want: i8| {
        ps.iter().all(|&p| sign_mod_ramified(field, &report.epsilon, p).map(|s| s == want).unwrap_or(false))
    };
    check(&report.p_minus, -1) && check(&report.p_plus, 1)
}

/// How d₀ residues are listed in the unit/genus tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TablePresentation {
    /// Classes 3 and 11 list the square-class set before intersecting with
    /// the norm constraint, as the reference tables do.
    Published,
    /// Every row is intersected with the norm constraint.
    Refined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub dtilde_class: u8,
    pub eps_class: String,
    pub d0_residues: BTreeSet<u8>,
}

impl TableRow {
    pub fn d0_display(&self) -> String {
        let v: Vec<String> = self.d0_residues.iter().map(|n| n.to_string()).collect();
        if v.len() == 1 {
            v[0].clone()
        } else {
            format!("{{{}}}", v.join(","))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableBlock {
    pub dtilde_class: u8,
    pub rows: Vec<TableRow>,
    /// Residues n mod 8 with 2n a norm from O/16.
    pub norm_set: BTreeSet<u8>,
    pub note: Option<String>,
}

/// Classes covered, in the order the tables list them.
pub const TABLE_CLASSES: [u8; 7] = [3, 7, 11, 15, 2, 10, 6];

fn square_set(ring16: &ResidueRing) -> HashSet<Elt> {
    ring16.elements().iter().map(|&a| ring16.mul(a, a)).collect()
}

/// n ∈ {1,3,5,7} with 2nε a square modulo 16.
fn square_classes(ring16: &ResidueRing, squares: &HashSet<Elt>, eps: Elt) -> BTreeSet<u8> {
    [1u8, 3, 5, 7]
        .into_iter()
        .filter(|&n| {
            let t = ring16.canon(2 * n as i128 * eps.0 as i128, 2 * n as i128 * eps.1 as i128);
            squares.contains(&t)
        })
        .collect()
}

fn eps_expression(exps: &[u32]) -> String {
    let (a, b, c) = (exps[0], exps[1], exps[2]);
    let sign = if a == 1 { "-" } else { "" };
    let five = if b == 1 { "5" } else { "" };
    if c == 0 {
        let core = if b == 1 { "5" } else { "1" };
        format!("{sign}{core}")
    } else {
        format!("{sign}{five}(1+sqrt(d))^{c}")
    }
}

/// Rows of the ε / d₀ relation for a residue class of d̃ modulo 16.
pub fn regenerate_table(dtilde_class: u8, presentation: TablePresentation) -> Result<TableBlock> {
    if ![2u8, 3, 6, 7, 10, 11, 14, 15].contains(&dtilde_class) {
        return Err(Error::UnitGenus(format!(
            "class {dtilde_class} mod 16 is not covered (expected one of 2,3,6,7,10,11,14,15)"
        )));
    }
    // Every listed class is itself squarefree, so it serves as representative.
    let d = dtilde_class as u64;
    let field = make_field(d)?;
    let ring8 = ResidueRing::build(&field, Modulus::Rational2(3))?;
    let ring16 = ResidueRing::build(&field, Modulus::Rational2(4))?;
    let squares = square_set(&ring16);
    let norm_set = ring16.norm_classes_with_constraint(NormForm::TwiceNorm)?;
    let mut rows = Vec::new();
    let mut note = None;
    match dtilde_class % 4 {
        3 => {
            let g3 = if dtilde_class % 8 == 3 { ring8.from_int(-1) } else { ring8.from_int(5) };
            let gens = [ring8.canon(0, 1), ring8.canon(1, 2), g3];
            if !ring8.generates(&gens) {
                return Err(Error::UnitGenus("table generators do not generate (O/8)^x".into()));
            }
            let refine = presentation == TablePresentation::Refined || dtilde_class % 8 == 7;
            for a in 0..4u32 {
                for b in 0..4u32 {
                    for c in 0..2u32 {
                        let e = ring8.evaluate(&gens, &[a, b, c]);
                        let s = square_classes(&ring16, &squares, e);
                        let admissible: BTreeSet<u8> = s.intersection(&norm_set).copied().collect();
                        if admissible.is_empty() {
                            continue;
                        }
                        rows.push(TableRow {
                            dtilde_class,
                            eps_class: format!("({a},{b},{c})"),
                            d0_residues: if refine { admissible } else { s },
                        });
                    }
                }
            }
        }
        _ => {
            let gens = [ring8.from_int(-1), ring8.from_int(5), ring8.canon(1, 1)];
            if !ring8.generates(&gens) {
                return Err(Error::UnitGenus("table generators do not generate (O/8)^x".into()));
            }
            if dtilde_class == 14 {
                note = Some("no table for this class: the norm condition alone forces d0 = 1,3 mod 8".into());
            } else {
                let mut found = Vec::new();
                for a in 0..2u32 {
                    for b in 0..2u32 {
                        for c in 0..8u32 {
                            let e = ring8.evaluate(&gens, &[a, b, c]);
                            // ε ≡ −1 mod 𝔭₂³
                            let plus_one = ring8.add(e, ring8.one());
                            let n = ring8.norm_rep(plus_one);
                            if n != 0 && n.trailing_zeros() < 3 {
                                continue;
                            }
                            let s = square_classes(&ring16, &squares, e);
                            let admissible: BTreeSet<u8> = s.intersection(&norm_set).copied().collect();
                            if !admissible.is_empty() {
                                found.push((c, a, b, admissible));
                            }
                        }
                    }
                }
                found.sort();
                for (c, a, b, adm) in found {
                    rows.push(TableRow { dtilde_class, eps_class: eps_expression(&[a, b, c]), d0_residues: adm });
                }
            }
        }
    }
    Ok(TableBlock { dtilde_class, rows, norm_set, note })
}

/// All table rows as CSV with header `dtilde_class,eps_class,d0_residues`.
pub fn tables_csv(presentation: TablePresentation) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["dtilde_class", "eps_class", "d0_residues"]).map_err(|e| Error::Io(e.to_string()))?;
    for class in TABLE_CLASSES {
        for row in regenerate_table(class, presentation)?.rows {
            w.write_record([row.dtilde_class.to_string(), row.eps_class.clone(), row.d0_display()])
                .map_err(|e| Error::Io(e.to_string()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfield::fundamental_unit;

    fn report(d: u64) -> Result<UnitGenusReport> {
        let f = make_field(d).unwrap();
        classify_unit(&f, &fundamental_unit(&f))
    }

    #[test]
    fn d6_and_d3() {
        let r = report(6).unwrap();
        assert_eq!(r.p_minus, vec![3]);
        assert_eq!(r.d0, 3);
        assert_eq!(r.genus_case, GenusCase::D0);
        assert_eq!(
            r.square_root.sqrt_coords().map(|(a, b)| (a.to_string(), b.to_string())),
            Some(("3".to_string(), "1".to_string()))
        );
        assert_eq!(r.valuation_criterion_agrees, Some(true));
        let r = report(3).unwrap();
        assert_eq!(r.d0, 3);
        assert_eq!(r.genus_case, GenusCase::TwoD0);
    }

    #[test]
    fn norm_minus_one_rejected() {
        assert!(report(2).is_err());
        assert!(report(5).is_err());
    }

    #[test]
    fn congruence_check_and_negation() {
        let f = make_field(21).unwrap();
        let r = classify_unit(&f, &fundamental_unit(&f)).unwrap();
        assert!(verify_theorem12_congruences(&f, &r));
        let mut swapped = r.clone();
        std::mem::swap(&mut swapped.p_minus, &mut swapped.p_plus);
        swapped.d0 = swapped.p_minus.iter().product();
        assert!(!verify_theorem12_congruences(&f, &swapped));
        let f6 = make_field(6).unwrap();
        assert!(verify_theorem12_congruences(&f6, &report(6).unwrap()));
    }

    #[test]
    fn table_examples() {
        let t7 = regenerate_table(7, TablePresentation::Published).unwrap();
        let row = t7.rows.iter().find(|r| r.eps_class == "(1,0,0)").unwrap();
        assert_eq!(row.d0_display(), "5");
        let t15 = regenerate_table(15, TablePresentation::Published).unwrap();
        assert_eq!(t15.rows.iter().find(|r| r.eps_class == "(1,0,1)").unwrap().d0_display(), "5");
        let t10 = regenerate_table(10, TablePresentation::Published).unwrap();
        assert_eq!(t10.rows[0].eps_class, "-1");
        assert_eq!(t10.rows[0].d0_display(), "3");
        let t14 = regenerate_table(14, TablePresentation::Published).unwrap();
        assert!(t14.rows.is_empty() && t14.note.is_some());
        assert_eq!(t14.norm_set.iter().copied().collect::<Vec<_>>(), vec![1, 3]);
        assert!(regenerate_table(5, TablePresentation::Published).is_err());
    }

    #[test]
    fn refined_presentation_shrinks_published_sets() {
        for class in [3u8, 11] {
            let p = regenerate_table(class, TablePresentation::Published).unwrap();
            let r = regenerate_table(class, TablePresentation::Refined).unwrap();
            assert_eq!(p.rows.len(), r.rows.len());
            for (a, b) in p.rows.iter().zip(&r.rows) {
                assert!(b.d0_residues.is_subset(&a.d0_residues));
                assert_eq!(b.d0_residues.len(), 1);
            }
        }
    }
}
