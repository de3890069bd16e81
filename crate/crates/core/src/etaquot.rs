//! Eta quotients `prod eta(delta z)^(r_delta)`: q-expansions, the weight and
//! character test for modularity on `Gamma0(N)`, orders at cusps, and the
//! catalog of generators used to span `M_k(Gamma0(p))` for `p in {2, 3, 5}`.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, gcd, kronecker};
use crate::error::{Error, Result};
use crate::qseries::{Modulus, QExpansion};

/// `prod_{n>=1} (1 - q^n)` to `prec` coefficients, filled in from Euler's
/// pentagonal number theorem: `sum_k (-1)^k q^(k(3k-1)/2)` over all integers `k`.
pub fn euler_product(prec: usize, modulus: Option<Modulus>) -> QExpansion {
    let mut coeffs = vec![0i128; prec];
    if prec > 0 {
        coeffs[0] = 1;
    }
    let mut k: usize = 1;
    loop {
        let sign: i128 = if k % 2 == 1 { -1 } else { 1 };
        let g1 = k * (3 * k - 1) / 2;
        let g2 = k * (3 * k + 1) / 2;
        if g1 >= prec {
            break;
        }
        coeffs[g1] = sign;
        if g2 < prec {
            coeffs[g2] = sign;
        }
        k += 1;
    }
    QExpansion::new(0, coeffs, modulus)
}

/// `eta(z) = q^(1/24) prod (1 - q^n)`.
pub fn eta_series(prec: usize, modulus: Option<Modulus>) -> Result<QExpansion> {
    if prec == 0 {
        return Err(Error::InvalidParameters(
            "eta_series needs prec >= 1".into(),
        ));
    }
    Ok(QExpansion::new(
        1,
        euler_product(prec, modulus).coeffs().to_vec(),
        modulus,
    ))
}

/// An eta quotient of level `N`: `prod_{delta | N} eta(delta z)^(r_delta)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EtaQuotient {
    level: u64,
    exponents: BTreeMap<u64, i64>,
}

impl EtaQuotient {
    pub fn new(level: u64, exponents: impl IntoIterator<Item = (u64, i64)>) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidParameters(
                "eta quotient level must be >= 1".into(),
            ));
        }
        let mut map = BTreeMap::new();
        for (delta, r) in exponents {
            if delta == 0 || !level.is_multiple_of(delta) {
                return Err(Error::InvalidParameters(format!(
                    "eta factor {delta} does not divide level {level}"
                )));
            }
            if r != 0 {
                *map.entry(delta).or_insert(0) += r;
            }
        }
        map.retain(|_, r| *r != 0);
        Ok(EtaQuotient {
            level,
            exponents: map,
        })
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn exponents(&self) -> &BTreeMap<u64, i64> {
        &self.exponents
    }

    /// `2k = sum r_delta`.
    pub fn twice_weight(&self) -> i64 {
        self.exponents.values().sum()
    }

    /// Exponent offset in 24ths: `sum delta r_delta`.
    pub fn offset_num(&self) -> i64 {
        self.exponents.iter().map(|(&d, &r)| d as i64 * r).sum()
    }

    /// Same exponents regarded at another level (which all factors must divide).
    pub fn at_level(&self, level: u64) -> Result<Self> {
        EtaQuotient::new(level, self.exponents.iter().map(|(&d, &r)| (d, r)))
    }

    /// Product of two eta quotients of the same level.
    pub fn mul(&self, other: &EtaQuotient) -> Result<Self> {
        if self.level != other.level {
            return Err(Error::InvalidParameters(format!(
                "eta quotient levels differ: {} vs {}",
                self.level, other.level
            )));
        }
        EtaQuotient::new(
            self.level,
            self.exponents
                .iter()
                .chain(other.exponents.iter())
                .map(|(&d, &r)| (d, r)),
        )
    }

    pub fn pow(&self, e: i64) -> Self {
        EtaQuotient {
            level: self.level,
            exponents: self
                .exponents
                .iter()
                .map(|(&d, &r)| (d, r * e))
                .filter(|(_, r)| *r != 0)
                .collect(),
        }
    }
}

impl fmt::Display for EtaQuotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponents.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .exponents
            .iter()
            .map(|(&d, &r)| {
                let base = if d == 1 {
                    "eta(z)".to_string()
                } else {
                    format!("eta({d}z)")
                };
                if r == 1 {
                    base
                } else {
                    format!("{base}^{r}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// q-expansion of an eta quotient to relative precision `prec`.
pub fn etaquot_series(
    e: &EtaQuotient,
    prec: usize,
    modulus: Option<Modulus>,
) -> Result<QExpansion> {
    if prec == 0 {
        return Err(Error::InvalidParameters(
            "etaquot_series needs prec >= 1".into(),
        ));
    }
    let mut acc = QExpansion::one(prec, modulus);
    let mut inverse: Option<QExpansion> = None;
    for (&delta, &r) in e.exponents() {
        let inner_prec = prec.div_ceil(delta as usize);
        let base = if r > 0 {
            euler_product(inner_prec, modulus)
        } else {
            // prod (1 - q^n)^-1 has a sparse denominator; invert once per precision.
            match &inverse {
                Some(inv) if inv.prec() >= inner_prec => inv.truncate(inner_prec),
                _ => {
                    let inv = euler_product(inner_prec, modulus).inv()?;
                    inverse = Some(inv.clone());
                    inv
                }
            }
        };
        let factor = base.pow(r.abs())?.dilate(delta)?.truncate(prec);
        acc = acc.mul(&factor)?;
    }
    Ok(QExpansion::new(
        e.offset_num(),
        acc.coeffs().to_vec(),
        modulus,
    ))
}

/// Weight and character data of an eta quotient on `Gamma0(N)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightCharacter {
    pub weight: i64,
    /// `sum delta r_delta`; must be divisible by 24.
    pub sum_delta_r: i64,
    /// `N sum r_delta / delta`; must be divisible by 24.
    pub level_sum: i64,
    pub infinity_condition: bool,
    pub zero_condition: bool,
    /// `s = prod delta^(r_delta)` in factored form.
    pub s_factors: Vec<(u64, i64)>,
    /// Squarefree representative of `(-1)^k s`, defining `chi(d) = (disc / d)`.
    pub discriminant: i64,
}

impl WeightCharacter {
    pub fn conditions_hold(&self) -> bool {
        self.infinity_condition && self.zero_condition
    }

    pub fn trivial_character(&self) -> bool {
        self.discriminant == 1
    }

    pub fn character(&self, d: u64) -> i8 {
        kronecker(self.discriminant, d)
    }

    pub fn s_display(&self) -> String {
        if self.s_factors.is_empty() {
            return "1".into();
        }
        self.s_factors
            .iter()
            .map(|(p, e)| format!("{p}^{e}"))
            .collect::<Vec<_>>()
            .join("*")
    }
}

pub fn weight_and_character(e: &EtaQuotient) -> Result<WeightCharacter> {
    let twice = e.twice_weight();
    if twice % 2 != 0 {
        return Err(Error::OddWeight(twice));
    }
    let weight = twice / 2;
    let sum_delta_r = e.offset_num();
    let level_sum: i64 = e
        .exponents()
        .iter()
        .map(|(&d, &r)| (e.level() / d) as i64 * r)
        .sum();
    let mut prime_exps: BTreeMap<u64, i64> = BTreeMap::new();
    for (&d, &r) in e.exponents() {
        for (p, a) in factorize(d) {
            *prime_exps.entry(p).or_insert(0) += a as i64 * r;
        }
    }
    prime_exps.retain(|_, a| *a != 0);
    let kernel: i64 = prime_exps
        .iter()
        .filter(|(_, &a)| a.rem_euclid(2) == 1)
        .map(|(&p, _)| p as i64)
        .product();
    let discriminant = if weight % 2 == 0 { kernel } else { -kernel };
    Ok(WeightCharacter {
        weight,
        sum_delta_r,
        level_sum,
        infinity_condition: sum_delta_r % 24 == 0,
        zero_condition: level_sum % 24 == 0,
        s_factors: prime_exps.into_iter().collect(),
        discriminant,
    })
}

/// Width of the cusp `c/d` on `Gamma0(N)`: `N / gcd(d^2, N)`.
pub fn cusp_width(d: u64, level: u64) -> u64 {
    level / gcd(d * d, level)
}

/// Order of vanishing at a cusp `c/d`: `(1/24) sum gcd(d, delta)^2 r_delta / delta`,
/// optionally multiplied by the cusp width (order in the local uniformizer).
pub fn cusp_order(e: &EtaQuotient, d: u64, normalized: bool) -> Ratio<i64> {
    let mut total = Ratio::from_integer(0i64);
    for (&delta, &r) in e.exponents() {
        let g = gcd(d, delta) as i64;
        total += Ratio::new(g * g * r, delta as i64);
    }
    let raw = total / 24;
    if normalized {
        raw * cusp_width(d, e.level()) as i64
    } else {
        raw
    }
}

/// How a catalog generator is built.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    EtaQuotient(EtaQuotient),
    /// `(p E2(pz) - E2(z)) / (p - 1)` with `E2 = 1 - 24 sum sigma_1(n) q^n`.
    Eisenstein2,
    /// `(E4(z) - E4(pz)) / 240 = sum sigma_3(n) (q^n - q^(pn))`.
    Eisenstein4Difference,
}

/// Catalog entry without its expansion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub weight: u32,
    pub lead_exponent: u32,
    pub kind: GeneratorKind,
}

impl CatalogEntry {
    /// Eisenstein entries only fill the weights the eta quotients cannot reach.
    pub fn is_auxiliary(&self) -> bool {
        !matches!(self.kind, GeneratorKind::EtaQuotient(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorForm {
    pub entry: CatalogEntry,
    pub expansion: QExpansion,
}

fn eta_entry(name: &str, level: u64, exps: &[(u64, i64)], lead: u32) -> CatalogEntry {
    let e = EtaQuotient::new(level, exps.iter().copied()).expect("static catalog data");
    CatalogEntry {
        name: name.into(),
        weight: (e.twice_weight() / 2) as u32,
        lead_exponent: lead,
        kind: GeneratorKind::EtaQuotient(e),
    }
}

/// Generators for `p in {2, 3, 5}`, Eisenstein entries first.
pub fn catalog_entries(p: u64) -> Result<Vec<CatalogEntry>> {
    let e2 = CatalogEntry {
        name: format!("E2_{p}"),
        weight: 2,
        lead_exponent: 0,
        kind: GeneratorKind::Eisenstein2,
    };
    let entries = match p {
        2 => vec![
            e2,
            eta_entry("a0", 2, &[(1, 16), (2, -8)], 0),
            eta_entry("a1", 2, &[(1, -8), (2, 16)], 1),
        ],
        3 => vec![
            e2,
            CatalogEntry {
                name: "E4_3".into(),
                weight: 4,
                lead_exponent: 1,
                kind: GeneratorKind::Eisenstein4Difference,
            },
            eta_entry("g0", 3, &[(1, 18), (3, -6)], 0),
            eta_entry("g1", 3, &[(1, 6), (3, 6)], 1),
            eta_entry("g2", 3, &[(1, -6), (3, 18)], 2),
        ],
        5 => vec![
            e2,
            eta_entry("f0", 5, &[(1, 10), (5, -2)], 0),
            eta_entry("f1", 5, &[(1, 4), (5, 4)], 1),
            eta_entry("f2", 5, &[(1, -2), (5, 10)], 2),
        ],
        _ => return Err(Error::UnsupportedPrime(p)),
    };
    Ok(entries)
}

/// `sigma_k(n)` for `0 < n < len` (index 0 is 0). Trial division for short
/// tables, a divisor sieve beyond 10^4 entries.
pub fn divisor_sums(len: usize, k: u32) -> Vec<i128> {
    let mut out = vec![0i128; len];
    if len > 10_000 {
        for d in 1..len {
            let dk = (d as i128).pow(k);
            let mut n = d;
            while n < len {
                out[n] += dk;
                n += d;
            }
        }
    } else {
        for (n, slot) in out.iter_mut().enumerate().skip(1) {
            let mut s = 0i128;
            let mut d = 1usize;
            while d * d <= n {
                if n % d == 0 {
                    s += (d as i128).pow(k);
                    let e = n / d;
                    if e != d {
                        s += (e as i128).pow(k);
                    }
                }
                d += 1;
            }
            *slot = s;
        }
    }
    out
}

fn eisenstein2(p: u64, prec: usize, modulus: Option<Modulus>) -> QExpansion {
    let scale = (24 / (p - 1)) as i128;
    let sigma = divisor_sums(prec, 1);
    let p = p as usize;
    let mut coeffs = vec![0i128; prec];
    if prec > 0 {
        coeffs[0] = 1;
    }
    for n in 1..prec {
        coeffs[n] += scale * sigma[n];
        if n * p < prec {
            coeffs[n * p] -= scale * p as i128 * sigma[n];
        }
    }
    QExpansion::new(0, coeffs, modulus)
}

fn eisenstein4_difference(p: u64, prec: usize, modulus: Option<Modulus>) -> QExpansion {
    let sigma = divisor_sums(prec, 3);
    let p = p as usize;
    let mut coeffs = vec![0i128; prec];
    for n in 1..prec {
        coeffs[n] += sigma[n];
        if n * p < prec {
            coeffs[n * p] -= sigma[n];
        }
    }
    QExpansion::new(0, coeffs, modulus)
}

/// Expansion of a catalog entry at level `p`, offset 0, `prec` coefficients.
pub fn expand_entry(
    p: u64,
    entry: &CatalogEntry,
    prec: usize,
    modulus: Option<Modulus>,
) -> Result<QExpansion> {
    match &entry.kind {
        GeneratorKind::EtaQuotient(e) => {
            Ok(etaquot_series(e, prec, modulus)?.rebase(0)?.truncate(prec))
        }
        GeneratorKind::Eisenstein2 => Ok(eisenstein2(p, prec, modulus)),
        GeneratorKind::Eisenstein4Difference => Ok(eisenstein4_difference(p, prec, modulus)),
    }
}

/// The generator catalog for `p in {2, 3, 5}` with expansions to `prec`.
pub fn generator_catalog(
    p: u64,
    prec: usize,
    modulus: Option<Modulus>,
) -> Result<Vec<GeneratorForm>> {
    catalog_entries(p)?
        .into_iter()
        .map(|entry| {
            let expansion = expand_entry(p, &entry, prec, modulus)?;
            Ok(GeneratorForm { entry, expansion })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct expansion of prod_{n<prec}(1 - q^n), one binomial at a time.
    fn naive_euler(prec: usize) -> Vec<i128> {
        let mut c = vec![0i128; prec];
        c[0] = 1;
        for n in 1..prec {
            for i in (n..prec).rev() {
                c[i] -= c[i - n];
            }
        }
        c
    }

    #[test]
    fn euler_product_first_coefficients() {
        let e = euler_product(13, None);
        assert_eq!(e.coeffs(), &[1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1]);
        assert_eq!(
            euler_product(400, None).coeffs(),
            naive_euler(400).as_slice()
        );
    }

    #[test]
    fn eta_series_offset_and_inverse() {
        let eta = eta_series(12, None).unwrap();
        assert_eq!(eta.offset_num(), 1);
        let inv = eta.inv().unwrap();
        assert_eq!(inv.offset_num(), -1);
        assert_eq!(inv.coeffs(), &[1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56]);
        assert!(eta_series(0, None).is_err());
    }

    #[test]
    fn basis_leading_terms_for_level_five() {
        let f0 = EtaQuotient::new(5, [(1, 10), (5, -2)]).unwrap();
        let s = etaquot_series(&f0, 10, None).unwrap();
        assert_eq!(s.offset_num(), 0);
        assert_eq!(s.coeffs()[0], 1);
        let f1 = EtaQuotient::new(5, [(1, 4), (5, 4)]).unwrap();
        let s = etaquot_series(&f1, 10, None).unwrap();
        assert_eq!(s.offset_num(), 24);
        assert_eq!(s.coeffs()[0], 1);
        let f51 = EtaQuotient::new(5, [(5, 5), (1, -1)]).unwrap();
        assert_eq!(f51.offset_num(), 24);
        assert_eq!(f51.twice_weight(), 4);
    }

    #[test]
    fn etaquot_agrees_with_manual_product() {
        let md = Some(Modulus::new(49).unwrap());
        let e = EtaQuotient::new(3, [(1, -6), (3, 18)]).unwrap();
        let direct = etaquot_series(&e, 60, md).unwrap();
        let eta = eta_series(60, md).unwrap();
        let eta3 = eta.dilate(3).unwrap().truncate(60);
        let manual = eta3.pow(18).unwrap().mul(&eta.pow(-6).unwrap()).unwrap();
        assert_eq!(direct, manual);
    }

    #[test]
    fn weight_and_character_examples() {
        let f1 = EtaQuotient::new(5, [(1, 4), (5, 4)]).unwrap();
        let wc = weight_and_character(&f1).unwrap();
        assert_eq!(wc.weight, 4);
        assert_eq!(wc.sum_delta_r, 24);
        assert_eq!(wc.level_sum, 24);
        assert!(wc.conditions_hold());
        assert_eq!(wc.s_factors, vec![(5, 4)]);
        assert!(wc.trivial_character());

        let trivial = EtaQuotient::new(7, []).unwrap();
        let wc = weight_and_character(&trivial).unwrap();
        assert_eq!(wc.weight, 0);
        assert!(wc.conditions_hold() && wc.trivial_character());

        let at10 = weight_and_character(&f1.at_level(10).unwrap()).unwrap();
        assert_eq!(at10.level_sum, 10 * 4 + 2 * 4);
        let bad = weight_and_character(&EtaQuotient::new(2, [(1, 2), (2, 2)]).unwrap()).unwrap();
        assert_eq!(bad.weight, 2);
        assert!(!bad.infinity_condition && !bad.zero_condition);

        let odd = EtaQuotient::new(1, [(1, 1)]).unwrap();
        assert!(matches!(
            weight_and_character(&odd),
            Err(Error::OddWeight(1))
        ));

        // (eta(6z) eta(18z))^5 has character (-3 / .)
        let h = EtaQuotient::new(108, [(6, 5), (18, 5)]).unwrap();
        let wc = weight_and_character(&h).unwrap();
        assert!(wc.conditions_hold());
        assert_eq!(wc.discriminant, -3);
    }

    #[test]
    fn cusp_orders() {
        let f = EtaQuotient::new(5, [(1, 4), (5, 4)]).unwrap();
        assert_eq!(cusp_order(&f, 1, false), Ratio::new(1, 5));
        assert_eq!(cusp_order(&f, 1, true), Ratio::from_integer(1));
        assert_eq!(cusp_order(&f, 5, false), Ratio::from_integer(1));
        assert_eq!(cusp_order(&f, 5, true), Ratio::from_integer(1));
        let eta = EtaQuotient::new(1, [(1, 1)]).unwrap();
        assert_eq!(cusp_order(&eta, 1, false), Ratio::new(1, 24));
    }

    #[test]
    fn eisenstein_level_two() {
        let e = eisenstein2(2, 5, None);
        assert_eq!(e.coeffs(), &[1, 24, 24, 96, 24]);
    }

    #[test]
    fn divisor_sum_methods_agree() {
        let small = divisor_sums(10_000, 1);
        let big = divisor_sums(10_001, 1);
        assert_eq!(&big[..10_000], small.as_slice());
        assert_eq!(&small[..7], &[0, 1, 3, 4, 7, 6, 12]);
    }

    #[test]
    fn catalog_leading_terms_and_validity() {
        for p in [2u64, 3, 5] {
            for g in generator_catalog(p, 40, None).unwrap() {
                let lead = g.expansion.leading_index().unwrap();
                assert_eq!(lead as u32, g.entry.lead_exponent, "{}", g.entry.name);
                assert_eq!(g.expansion.coeffs()[lead], 1, "{}", g.entry.name);
                if let GeneratorKind::EtaQuotient(e) = &g.entry.kind {
                    let wc = weight_and_character(e).unwrap();
                    assert!(wc.conditions_hold(), "{}", g.entry.name);
                    assert!(wc.trivial_character(), "{}", g.entry.name);
                    assert_eq!(wc.weight as u32, g.entry.weight);
                    for d in [1, p] {
                        assert!(cusp_order(e, d, true) >= Ratio::from_integer(0));
                    }
                    assert_eq!(cusp_order(e, p, true), Ratio::from_integer(lead as i64));
                }
            }
        }
        assert!(matches!(
            catalog_entries(7),
            Err(Error::UnsupportedPrime(7))
        ));
        let names: Vec<String> = catalog_entries(5)
            .unwrap()
            .into_iter()
            .map(|e| e.name)
            .collect();
        assert_eq!(names, ["E2_5", "f0", "f1", "f2"]);
    }
}
