//! Finite quotients O/𝔪 of a quadratic order, with exhaustive unit-group
//! enumeration.
//!
//! Elements are canonical pairs (x, y) in ω-coordinates. For quotients that
//! are cyclic as rings (a split prime power above 2, an odd ramified prime)
//! the canonical pair is (x + y·r mod n, 0) for the appropriate root r.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadfield::{QuadField, QuadInt, Splitting};

/// Residue pair in ω-coordinates.
pub type Elt = (i64, i64);

/// Supported moduli.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Modulus {
    /// The rational ideal (2^k).
    Rational2(u32),
    /// 𝔭^k for the prime 𝔭 above 2 (the first one when 2 splits).
    PrimeAbove2(u32),
    /// The prime above an odd ramified p.
    OddRamified(u64),
}

#[derive(Debug, Clone)]
enum Shape {
    /// Pairs modulo m; `canon` maps the m² raw pairs to canonical ones.
    Pairs { m: i64, canon: Option<Vec<Elt>> },
    /// Ring isomorphic to Z/n via x + yω ↦ x + y·r.
    Linear { n: i64, r: i64 },
}

/// A finite quotient ring with its unit group listed.
#[derive(Debug, Clone)]
pub struct ResidueRing {
    pub d: i64,
    pub half: bool,
    pub modulus: Modulus,
    two_splitting: Splitting,
    shape: Shape,
    elements: Vec<Elt>,
    units: Vec<Elt>,
    unit_index: HashMap<Elt, usize>,
}

/// Exponents over a generator list, reduced modulo each generator's order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ExponentVector {
    pub exponents: Vec<u32>,
    pub orders: Vec<u32>,
}

/// Which norm equation constrains the residues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormForm {
    /// n = N(α) with N(α) odd.
    Norm,
    /// 2n = N(α) with v₂(N(α)) = 1.
    TwiceNorm,
}

fn two_splitting_of(d: i64) -> Splitting {
    match d.rem_euclid(8) {
        1 => Splitting::Split,
        5 => Splitting::Inert,
        _ => Splitting::Ramified,
    }
}

impl ResidueRing {
    /// Quotient of O_K for a field.
    pub fn build(field: &QuadField, modulus: Modulus) -> Result<Self> {
        if let Modulus::OddRamified(p) = modulus {
            if !field.ramified_odd_primes.contains(&p) {
                return Err(Error::Residue(format!("{p} is not an odd ramified prime of Q(sqrt({}))", field.d)));
            }
        }
        Self::for_order(field.d as i64, field.half(), modulus)
    }

    /// Quotient of the order Z[ω] for any nonsquare d (squarefree or not);
    /// `half` selects ω = (1+√d)/2, which needs d ≡ 1 (mod 4).
    pub fn for_order(d: i64, half: bool, modulus: Modulus) -> Result<Self> {
        if half && d.rem_euclid(4) != 1 {
            return Err(Error::Residue("half-integral basis needs d = 1 mod 4".into()));
        }
        let two_splitting = if half { two_splitting_of(d) } else { Splitting::Ramified };
        let c = if half { (d - 1) / 4 } else { d };
        let shape = match modulus {
            Modulus::Rational2(k) => {
                check_k(k)?;
                Shape::Pairs { m: 1 << k, canon: None }
            }
            Modulus::PrimeAbove2(k) => {
                check_k(k)?;
                if !half && d.rem_euclid(4) == 1 {
                    return Err(Error::Residue("prime powers above 2 need the maximal order".into()));
                }
                match two_splitting {
                    Splitting::Inert => Shape::Pairs { m: 1 << k, canon: None },
                    Splitting::Split => {
                        let n = 1i64 << k;
                        // even root of x² - x - c modulo 2^k
                        let r = (0..n)
                            .step_by(2)
                            .find(|&r| (r * r - r - c).rem_euclid(n) == 0)
                            .ok_or_else(|| Error::Residue("no 2-adic root".into()))?;
                        Shape::Linear { n, r }
                    }
                    Splitting::Ramified => ramified_two_power(d, half, k),
                }
            }
            Modulus::OddRamified(p) => {
                let p = p as i64;
                if p < 3 || d.rem_euclid(p) != 0 || !crate::arith::is_prime_u64(p as u64) {
                    return Err(Error::Residue(format!("{p} is not an odd prime dividing {d}")));
                }
                let lin = if half { 1 } else { 0 };
                let r = (0..p)
                    .find(|&r| (r * r - lin * r - c).rem_euclid(p) == 0)
                    .expect("ramified prime has a double root");
                Shape::Linear { n: p, r }
            }
        };
        let mut ring = ResidueRing {
            d,
            half,
            modulus,
            two_splitting,
            shape,
            elements: Vec::new(),
            units: Vec::new(),
            unit_index: HashMap::new(),
        };
        ring.enumerate();
        Ok(ring)
    }

    fn enumerate(&mut self) {
        let mut seen = BTreeSet::new();
        match &self.shape {
            Shape::Pairs { m, .. } => {
                for x in 0..*m {
                    for y in 0..*m {
                        seen.insert(self.canon(x as i128, y as i128));
                    }
                }
            }
            Shape::Linear { n, .. } => {
                for x in 0..*n {
                    seen.insert((x, 0));
                }
            }
        }
        self.elements = seen.into_iter().collect();
        self.units = self.elements.iter().copied().filter(|&e| self.is_unit(e)).collect();
        self.unit_index = self.units.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    }

    fn omega_c(&self) -> i128 {
        if self.half {
            ((self.d - 1) / 4) as i128
        } else {
            self.d as i128
        }
    }

    /// Canonical representative of x + yω.
    pub fn canon(&self, x: i128, y: i128) -> Elt {
        match &self.shape {
            Shape::Pairs { m, canon } => {
                let m = *m as i128;
                let (a, b) = (x.rem_euclid(m) as i64, y.rem_euclid(m) as i64);
                match canon {
                    None => (a, b),
                    Some(t) => t[(a * m as i64 + b) as usize],
                }
            }
            Shape::Linear { n, r } => {
                let n = *n as i128;
                (((x + y * *r as i128).rem_euclid(n)) as i64, 0)
            }
        }
    }

    pub fn reduce(&self, z: &QuadInt) -> Elt {
        let m: i128 = match &self.shape {
            Shape::Pairs { m, .. } => *m as i128,
            Shape::Linear { n, .. } => *n as i128,
        };
        let big_m = num_bigint::BigInt::from(m);
        let x = z.x.mod_floor(&big_m).to_i128().expect("reduced");
        let y = z.y.mod_floor(&big_m).to_i128().expect("reduced");
        self.canon(x, y)
    }

    pub fn from_int(&self, n: i64) -> Elt {
        self.canon(n as i128, 0)
    }

    pub fn one(&self) -> Elt {
        self.from_int(1)
    }

    pub fn mul(&self, a: Elt, b: Elt) -> Elt {
        let (x1, y1) = (a.0 as i128, a.1 as i128);
        let (x2, y2) = (b.0 as i128, b.1 as i128);
        let yy = y1 * y2;
        let x = x1 * x2 + yy * self.omega_c();
        let mut y = x1 * y2 + y1 * x2;
        if self.half {
            y += yy;
        }
        self.canon(x, y)
    }

    pub fn add(&self, a: Elt, b: Elt) -> Elt {
        self.canon(a.0 as i128 + b.0 as i128, a.1 as i128 + b.1 as i128)
    }

    pub fn neg(&self, a: Elt) -> Elt {
        self.canon(-(a.0 as i128), -(a.1 as i128))
    }

    pub fn pow(&self, a: Elt, mut e: u64) -> Elt {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Norm of the canonical representative as an integer. It is well
    /// defined modulo 2^k on (2^k) and modulo p on an odd ramified prime.
    pub fn norm_rep(&self, a: Elt) -> i128 {
        let (x, y) = (a.0 as i128, a.1 as i128);
        if self.half {
            x * x + x * y - y * y * self.omega_c()
        } else {
            x * x - y * y * self.omega_c()
        }
    }

    pub fn is_unit(&self, a: Elt) -> bool {
        match &self.shape {
            Shape::Linear { n, .. } => a.0.gcd(n) == 1,
            Shape::Pairs { .. } => self.norm_rep(a) % 2 != 0,
        }
    }

    pub fn elements(&self) -> &[Elt] {
        &self.elements
    }

    pub fn units(&self) -> &[Elt] {
        &self.units
    }

    pub fn unit_position(&self, u: Elt) -> Option<usize> {
        self.unit_index.get(&u).copied()
    }

    /// |(O/𝔪)^×| from the standard formula.
    pub fn expected_unit_count(&self) -> usize {
        match self.modulus {
            Modulus::Rational2(k) => {
                let q = 1usize << (2 * k);
                match self.two_splitting {
                    Splitting::Split => q / 4,
                    Splitting::Inert => q / 4 * 3,
                    Splitting::Ramified => q / 2,
                }
            }
            Modulus::PrimeAbove2(k) => match self.two_splitting {
                Splitting::Inert => (1usize << (2 * k)) / 4 * 3,
                _ => 1usize << (k - 1),
            },
            Modulus::OddRamified(p) => p as usize - 1,
        }
    }

    pub fn order(&self, u: Elt) -> u32 {
        let one = self.one();
        let mut x = u;
        let mut k = 1;
        while x != one {
            x = self.mul(x, u);
            k += 1;
        }
        k
    }

    /// Subgroup generated by a list of units.
    pub fn closure(&self, gens: &[Elt]) -> HashSet<Elt> {
        let mut seen = HashSet::new();
        let one = self.one();
        seen.insert(one);
        let mut queue = VecDeque::from([one]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    pub fn generates(&self, gens: &[Elt]) -> bool {
        self.closure(gens).len() == self.units.len()
    }

    pub fn evaluate(&self, gens: &[Elt], exps: &[u32]) -> Elt {
        gens.iter().zip(exps).fold(self.one(), |acc, (&g, &e)| self.mul(acc, self.pow(g, e as u64)))
    }

    /// Exponent vector of u over the generators, by exhaustive search.
    pub fn decompose(&self, u: Elt, gens: &[Elt]) -> Result<ExponentVector> {
        if gens.iter().any(|&g| !self.is_unit(g)) {
            return Err(Error::Residue("generator is not a unit".into()));
        }
        if !self.generates(gens) {
            return Err(Error::Residue("not generated: generators span a proper subgroup".into()));
        }
        let orders: Vec<u32> = gens.iter().map(|&g| self.order(g)).collect();
        let mut exps = vec![0u32; gens.len()];
        loop {
            if self.evaluate(gens, &exps) == u {
                return Ok(ExponentVector { exponents: exps, orders });
            }
            let mut i = 0;
            loop {
                if i == exps.len() {
                    return Err(Error::Residue("element is not a unit of this ring".into()));
                }
                exps[i] += 1;
                if exps[i] < orders[i] {
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
        }
    }

    /// Residues n mod 8 with n = N(α) (odd) or 2n = N(α) (v₂ = 1), α ranging
    /// over the ring. Needs the rational modulus 2^k with k ≥ 4.
    pub fn norm_classes_with_constraint(&self, form: NormForm) -> Result<BTreeSet<u8>> {
        match self.modulus {
            Modulus::Rational2(k) if k >= 4 => {}
            _ => return Err(Error::Residue("norm classes need the modulus 2^k, k >= 4".into())),
        }
        let mut out = BTreeSet::new();
        for &a in &self.elements {
            let n = self.norm_rep(a);
            match form {
                NormForm::Norm if n % 2 != 0 => {
                    out.insert(n.rem_euclid(8) as u8);
                }
                NormForm::TwiceNorm if n.rem_euclid(4) == 2 => {
                    out.insert((n / 2).rem_euclid(8) as u8);
                }
                _ => {}
            }
        }
        Ok(out)
    }
}

fn check_k(k: u32) -> Result<()> {
    if (1..=8).contains(&k) {
        Ok(())
    } else {
        Err(Error::Residue(format!("exponent {k} outside the supported range 1..=8")))
    }
}

/// O/𝔭^k for the ramified prime above 2: pairs modulo 2^⌈k/2⌉ identified
/// when their difference has v₂(N) ≥ k.
fn ramified_two_power(d: i64, half: bool, k: u32) -> Shape {
    let m = 1i64 << k.div_ceil(2);
    let c = if half { (d - 1) / 4 } else { d } as i128;
    let norm = |x: i128, y: i128| if half { x * x + x * y - y * y * c } else { x * x - y * y * c };
    let in_ideal = |x: i64, y: i64| {
        let n = norm(x as i128, y as i128);
        n == 0 || n.trailing_zeros() >= k
    };
    let ideal: Vec<Elt> = (0..m).flat_map(|x| (0..m).map(move |y| (x, y))).filter(|&(x, y)| in_ideal(x, y)).collect();
    let mut canon: Vec<Option<Elt>> = vec![None; (m * m) as usize];
    for x in 0..m {
        for y in 0..m {
            if canon[(x * m + y) as usize].is_some() {
                continue;
            }
            for &(ix, iy) in &ideal {
                let (a, b) = ((x + ix).rem_euclid(m), (y + iy).rem_euclid(m));
                canon[(a * m + b) as usize] = Some((x, y));
            }
        }
    }
    Shape::Pairs { m, canon: Some(canon.into_iter().map(|c| c.expect("assigned")).collect()) }
}

/// Convenience wrapper matching the module's public operation.
pub fn build_ring(field: &QuadField, modulus: Modulus) -> Result<ResidueRing> {
    ResidueRing::build(field, modulus)
}

pub fn decompose(ring: &ResidueRing, u: Elt, generators: &[Elt]) -> Result<ExponentVector> {
    ring.decompose(u, generators)
}

pub fn norm_classes_with_constraint(ring: &ResidueRing, form: NormForm) -> Result<BTreeSet<u8>> {
    ring.norm_classes_with_constraint(form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfield::make_field;

    #[test]
    fn unit_counts() {
        let f6 = make_field(6).unwrap();
        let r = build_ring(&f6, Modulus::Rational2(4)).unwrap();
        assert_eq!(r.elements().len(), 256);
        assert_eq!(r.units().len(), 128);
        let r3 = build_ring(&f6, Modulus::OddRamified(3)).unwrap();
        assert_eq!(r3.units().len(), 2);
        let f5 = make_field(5).unwrap();
        let r5 = build_ring(&f5, Modulus::Rational2(3)).unwrap();
        assert_eq!(r5.units().len(), 48);
        assert_eq!(r5.expected_unit_count(), 48);
    }

    #[test]
    fn prime_power_rings_have_prime_power_size() {
        for d in [2u64, 3, 6, 7, 17, 41, 5] {
            let f = make_field(d).unwrap();
            for k in 1..=6 {
                let r = build_ring(&f, Modulus::PrimeAbove2(k)).unwrap();
                let size = match f.two_splitting {
                    Splitting::Inert => 1usize << (2 * k),
                    _ => 1usize << k,
                };
                assert_eq!(r.elements().len(), size, "d={d} k={k}");
                assert_eq!(r.units().len(), r.expected_unit_count(), "d={d} k={k}");
            }
        }
    }

    #[test]
    fn decompose_examples() {
        let f6 = make_field(6).unwrap();
        let r = build_ring(&f6, Modulus::Rational2(3)).unwrap();
        let gens = [r.from_int(-1), r.from_int(5), r.canon(1, 1)];
        let one = decompose(&r, r.one(), &gens).unwrap();
        assert_eq!(one.exponents, vec![0, 0, 0]);
        assert_eq!(one.orders, vec![2, 2, 8]);
        let eps = r.reduce(&QuadInt::from_sqrt_coords(6, 5, 2));
        let v = decompose(&r, eps, &gens).unwrap();
        assert_eq!(r.evaluate(&gens, &v.exponents), eps);
    }

    #[test]
    fn decompose_rejects_non_generating_sets() {
        let f6 = make_field(6).unwrap();
        let r = build_ring(&f6, Modulus::Rational2(3)).unwrap();
        let gens = [r.from_int(-1), r.from_int(5)];
        assert!(decompose(&r, r.canon(1, 1), &gens).is_err());
    }

    #[test]
    fn norm_class_examples() {
        let classes = |dt: u64, form| {
            let f = make_field(dt).unwrap();
            let r = build_ring(&f, Modulus::Rational2(4)).unwrap();
            r.norm_classes_with_constraint(form).unwrap().into_iter().collect::<Vec<_>>()
        };
        assert_eq!(classes(2, NormForm::TwiceNorm), vec![1, 7]);
        assert_eq!(classes(10, NormForm::TwiceNorm), vec![3, 5]);
        assert_eq!(classes(3, NormForm::Norm), vec![1, 5]);
        assert_eq!(classes(11, NormForm::Norm), vec![1, 5]);
    }
}
