//! Bases of `M_k(Gamma0(p))` for `p in {2, 3, 5}` built from monomials in the
//! generator catalog, and bases of the invariant spaces
//! `{(eta(Dz) eta(Dpz))^y H(Dz) : H in M_k(Gamma0(p))}`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::arith::{factorize, inv_mod, mul_mod};
use crate::error::{Error, Result};
use crate::etaquot::{catalog_entries, etaquot_series, expand_entry, CatalogEntry, EtaQuotient};
use crate::params::CongruenceParams;
use crate::qseries::{Modulus, QExpansion};

/// Extra coefficients beyond the Sturm bound used by the rank check.
pub const DEFAULT_MARGIN: usize = 16;

/// Prime modulus for the rank computation.
const RANK_PRIME: u64 = (1 << 61) - 1;

pub fn dim_mk(p: u64, k: i64) -> Result<usize> {
    if k < 0 || k % 2 != 0 {
        return Err(Error::OddWeight(k));
    }
    let k = k as usize;
    match p {
        2 => Ok(k / 4 + 1),
        3 => Ok(k / 3 + 1),
        5 => Ok(2 * (k / 4) + 1),
        _ => Err(Error::UnsupportedPrime(p)),
    }
}

/// Index of `Gamma0(N)` in `SL2(Z)`.
pub fn gamma0_index(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (r, _)| acc / r * (r + 1))
}

/// `ceil(s [SL2(Z) : Gamma0(N)] / 12) + 1` coefficients determine a form in `M_s(Gamma0(N))`.
pub fn sturm_precision(s: u64, level: u64) -> usize {
    ((s * gamma0_index(level)).div_ceil(12) + 1) as usize
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceBasis {
    pub p: u64,
    pub k: i64,
    pub modulus: Option<Modulus>,
    pub prec: usize,
    pub elements: Vec<QExpansion>,
    /// Exponent of each catalog generator in the monomial behind each element.
    pub provenance: Vec<Vec<u32>>,
    pub generator_names: Vec<String>,
    pub lead_exponents: Vec<usize>,
}

/// Monomial exponent vector with its lead exponent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub lead: usize,
}

impl Monomial {
    pub fn describe(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .exponents
            .iter()
            .zip(names)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, n)| {
                if e == 1 {
                    n.clone()
                } else {
                    format!("{n}^{e}")
                }
            })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

/// All monomials of total weight `k` in the catalog generators.
pub fn monomials(entries: &[CatalogEntry], k: u32) -> Vec<Monomial> {
    fn rec(
        entries: &[CatalogEntry],
        i: usize,
        left: u32,
        cur: &mut Vec<u32>,
        out: &mut Vec<Monomial>,
    ) {
        if i == entries.len() {
            if left == 0 {
                let lead = cur
                    .iter()
                    .zip(entries)
                    .map(|(&e, g)| e as usize * g.lead_exponent as usize)
                    .sum();
                out.push(Monomial {
                    exponents: cur.clone(),
                    lead,
                });
            }
            return;
        }
        let w = entries[i].weight;
        for e in 0..=left / w {
            cur.push(e);
            rec(entries, i + 1, left - e * w, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(entries, 0, k, &mut Vec::new(), &mut out);
    out
}

/// Chooses one monomial per lead exponent `0..dim`: least auxiliary (Eisenstein)
/// weight, then the smallest power of the generator with the largest lead, so
/// that the basis stays a product of eta quotients wherever possible.
fn select_monomials(
    entries: &[CatalogEntry],
    all: &[Monomial],
    dim: usize,
) -> Option<Vec<Monomial>> {
    let top = entries
        .iter()
        .enumerate()
        .max_by_key(|(_, g)| g.lead_exponent)
        .map(|(i, _)| i)?;
    let key = |m: &Monomial| {
        let aux: u32 = m
            .exponents
            .iter()
            .zip(entries)
            .filter(|(_, g)| g.is_auxiliary())
            .map(|(&e, g)| e * g.weight)
            .sum();
        (aux, m.exponents[top])
    };
    (0..dim)
        .map(|lead| {
            all.iter()
                .filter(|m| m.lead == lead)
                .min_by_key(|m| key(m))
                .cloned()
        })
        .collect()
}

/// Expands monomials, sharing powers of each generator.
struct PowerCache<'a> {
    p: u64,
    entries: &'a [CatalogEntry],
    prec: usize,
    modulus: Option<Modulus>,
    powers: HashMap<(usize, u32), QExpansion>,
}

impl<'a> PowerCache<'a> {
    fn new(p: u64, entries: &'a [CatalogEntry], prec: usize, modulus: Option<Modulus>) -> Self {
        PowerCache {
            p,
            entries,
            prec,
            modulus,
            powers: HashMap::new(),
        }
    }

    fn power(&mut self, i: usize, e: u32) -> Result<QExpansion> {
        if e == 0 {
            return Ok(QExpansion::one(self.prec, self.modulus));
        }
        if let Some(s) = self.powers.get(&(i, e)) {
            return Ok(s.clone());
        }
        let s = if e == 1 {
            expand_entry(self.p, &self.entries[i], self.prec, self.modulus)?
        } else {
            let half = self.power(i, e / 2)?;
            let sq = half.mul(&half)?;
            if e % 2 == 1 {
                sq.mul(&self.power(i, 1)?)?
            } else {
                sq
            }
        };
        self.powers.insert((i, e), s.clone());
        Ok(s)
    }

    fn monomial(&mut self, m: &Monomial) -> Result<QExpansion> {
        let mut acc: Option<QExpansion> = None;
        for (i, &e) in m.exponents.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let f = self.power(i, e)?;
            acc = Some(match acc {
                None => f,
                Some(a) => a.mul(&f)?,
            });
        }
        Ok(acc.unwrap_or_else(|| QExpansion::one(self.prec, self.modulus)))
    }
}

/// Rank of a list of residue vectors modulo a prime.
fn rank_mod_prime(mut rows: Vec<Vec<u64>>, m: u64) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = inv_mod(rows[rank][col], m).expect("prime modulus");
        let pivot_row: Vec<u64> = rows[rank].iter().map(|&v| mul_mod(v, inv, m)).collect();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] != 0 {
                let f = row[col];
                for (x, &pv) in row.iter_mut().zip(&pivot_row) {
                    *x = (*x + m - mul_mod(f, pv, m)) % m;
                }
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Rank of all weight-`k` catalog monomials, computed modulo a large prime from
/// `sturm_precision(k, p) + margin` coefficients.
pub fn monomial_span_rank(p: u64, k: i64, margin: usize) -> Result<usize> {
    let entries = catalog_entries(p)?;
    let all = monomials(&entries, k as u32);
    let prec = sturm_precision(k as u64, p) + margin;
    let md = Some(Modulus::new(RANK_PRIME)?);
    let mut cache = PowerCache::new(p, &entries, prec, md);
    let rows = all
        .iter()
        .map(|m| {
            Ok(cache
                .monomial(m)?
                .coeffs()
                .iter()
                .map(|&c| c as u64)
                .collect())
        })
        .collect::<Result<Vec<Vec<u64>>>>()?;
    Ok(rank_mod_prime(rows, RANK_PRIME))
}

pub fn echelon_basis(p: u64, k: i64, prec: usize, modulus: Option<Modulus>) -> Result<SpaceBasis> {
    echelon_basis_with_margin(p, k, prec, modulus, DEFAULT_MARGIN)
}

/// Triangular basis of `M_k(Gamma0(p))` with lead exponents `0..dim` and pivots 1.
/// Fails if the catalog monomials do not span a space of the expected dimension.
pub fn echelon_basis_with_margin(
    p: u64,
    k: i64,
    prec: usize,
    modulus: Option<Modulus>,
    margin: usize,
) -> Result<SpaceBasis> {
    let dim = dim_mk(p, k)?;
    let sturm = sturm_precision(k as u64, p);
    if prec < sturm {
        return Err(Error::InsufficientPrecision {
            context: format!("basis of M_{k}(Gamma0({p}))"),
            needed: sturm,
            available: prec,
        });
    }
    let rank = monomial_span_rank(p, k, margin)?;
    let entries = catalog_entries(p)?;
    let all = monomials(&entries, k as u32);
    let chosen = select_monomials(&entries, &all, dim);
    let chosen = match chosen {
        Some(c) if rank == dim => c,
        _ => {
            return Err(Error::RankDeficient {
                p,
                k: k as u64,
                rank,
                dim,
            })
        }
    };
    let mut cache = PowerCache::new(p, &entries, prec, modulus);
    let mut elements = Vec::with_capacity(dim);
    for m in &chosen {
        let f = cache.monomial(m)?;
        let pivot = f.coeffs()[m.lead];
        if pivot != 1 || f.coeffs()[..m.lead].iter().any(|&c| c != 0) {
            return Err(Error::NonUnitPivot {
                exponent: m.lead,
                value: pivot.rem_euclid(modulus.map_or(i128::MAX, |m| m.get() as i128)) as u64,
                modulus: modulus.map_or(0, Modulus::get),
            });
        }
        elements.push(f);
    }
    Ok(SpaceBasis {
        p,
        k,
        modulus,
        prec,
        lead_exponents: chosen.iter().map(|m| m.lead).collect(),
        provenance: chosen.into_iter().map(|m| m.exponents).collect(),
        generator_names: entries.into_iter().map(|e| e.name).collect(),
        elements,
    })
}

impl SpaceBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// Human-readable monomial behind element `i`.
    pub fn describe(&self, i: usize) -> String {
        Monomial {
            exponents: self.provenance[i].clone(),
            lead: self.lead_exponents[i],
        }
        .describe(&self.generator_names)
    }

    /// Coordinates of `f` in this basis by back substitution on the pivots;
    /// the residual must vanish on every coefficient both series know.
    pub fn coordinates(&self, f: &QExpansion) -> Result<Vec<i128>> {
        let mut residual = f.rebase(0)?;
        let n = residual.prec().min(self.prec);
        if let Some(&last) = self.lead_exponents.last() {
            if last >= n {
                return Err(Error::InsufficientPrecision {
                    context: "coordinates in basis".into(),
                    needed: last + 1,
                    available: n,
                });
            }
        }
        residual = residual.truncate(n);
        let mut coords = Vec::with_capacity(self.dim());
        for (e, &lead) in self.elements.iter().zip(&self.lead_exponents) {
            let c = residual.coeffs()[lead];
            coords.push(c);
            if c != 0 {
                residual = residual.sub(&e.truncate(n).scale(c)?)?;
            }
        }
        if let Some(index) = residual.leading_index() {
            return Err(Error::NonzeroResidual {
                context: format!("series is not in the span of the weight-{} basis", self.k),
                index,
            });
        }
        Ok(coords)
    }

    /// `sum c_i element_i`.
    pub fn combine(&self, coords: &[i128]) -> Result<QExpansion> {
        let mut acc = QExpansion::zero(self.prec, self.modulus);
        for (e, &c) in self.elements.iter().zip(coords) {
            if c != 0 {
                acc = acc.add(&e.scale(c)?)?;
            }
        }
        Ok(acc)
    }
}

/// Lead exponent of `(eta(Dz) eta(Dpz))^y`: `y (p + 1) D / 24`.
pub fn a_offset(params: &CongruenceParams) -> Result<usize> {
    let num = params.y * (params.p as i64 + 1) * params.d;
    if params.y < 0 || num % 24 != 0 {
        return Err(Error::InvalidParameters(format!(
            "y = {} gives no holomorphic invariant space",
            params.y
        )));
    }
    Ok((num / 24) as usize)
}

/// Basis of the invariant space for `params`, each element given on the
/// exponents `0..prec` of `q`. Element `i` is `(eta(Dz) eta(Dpz))^y H_i(Dz)`
/// with `H_i` the triangular basis of `M_k(Gamma0(p))`; leads are `offset + D i`.
pub fn basis_a(
    params: &CongruenceParams,
    prec: usize,
    modulus: Option<Modulus>,
) -> Result<SpaceBasis> {
    basis_a_with_margin(params, prec, modulus, DEFAULT_MARGIN)
}

pub fn basis_a_with_margin(
    params: &CongruenceParams,
    prec: usize,
    modulus: Option<Modulus>,
    margin: usize,
) -> Result<SpaceBasis> {
    let p = params.p;
    if ![2, 3, 5].contains(&p) {
        return Err(Error::UnsupportedPrime(p));
    }
    let e0 = a_offset(params)?;
    let d = params.d as usize;
    let dim = dim_mk(p, params.k)?;
    let last_lead = e0 + d * (dim - 1);
    if prec <= last_lead {
        return Err(Error::InsufficientPrecision {
            context: "invariant-space basis".into(),
            needed: last_lead + 1,
            available: prec,
        });
    }
    // Work at z: (eta(z) eta(pz))^y H_i(z) has offset y(p+1)/24, then q -> q^D.
    let inner_prec = (prec - e0).div_ceil(d);
    let h_prec = inner_prec.max(sturm_precision(params.k as u64, p));
    let h = echelon_basis_with_margin(p, params.k, h_prec, modulus, margin)?;
    let g = etaquot_series(
        &EtaQuotient::new(p, [(1, params.y), (p, params.y)])?,
        inner_prec,
        modulus,
    )?;
    let elements = h
        .elements
        .iter()
        .map(|hi| {
            let inner = g.mul(&hi.truncate(inner_prec))?;
            let outer = inner.dilate(d as u64)?;
            Ok(outer.rebase(0)?.truncate(prec))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpaceBasis {
        p,
        k: params.k,
        modulus,
        prec,
        lead_exponents: (0..dim).map(|i| e0 + d * i).collect(),
        provenance: h.provenance,
        generator_names: h.generator_names,
        elements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::compute_params;

    #[test]
    fn dimensions() {
        assert_eq!(dim_mk(5, 8).unwrap(), 5);
        assert_eq!(dim_mk(3, 36).unwrap(), 13);
        assert_eq!(dim_mk(5, 4).unwrap(), 3);
        assert_eq!(dim_mk(2, 0).unwrap(), 1);
        assert!(matches!(dim_mk(5, 3), Err(Error::OddWeight(3))));
        assert!(matches!(dim_mk(7, 4), Err(Error::UnsupportedPrime(7))));
    }

    #[test]
    fn sturm_values() {
        assert_eq!(sturm_precision(11, 80), 133);
        assert_eq!(sturm_precision(41, 108), 739);
        assert_eq!(sturm_precision(24, 1), 3);
        assert_eq!(gamma0_index(108), 216);
    }

    #[test]
    fn weight_four_level_five_is_eta_basis() {
        let b = echelon_basis(5, 4, 30, None).unwrap();
        assert_eq!(b.lead_exponents, vec![0, 1, 2]);
        let names: Vec<String> = (0..3).map(|i| b.describe(i)).collect();
        assert_eq!(names, ["f0", "f1", "f2"]);
    }

    #[test]
    fn monomial_choices_for_worked_examples() {
        let b = echelon_basis(5, 8, 40, None).unwrap();
        let names: Vec<String> = (0..b.dim()).map(|i| b.describe(i)).collect();
        assert_eq!(names, ["f0^2", "f0*f1", "f1^2", "f1*f2", "f2^2"]);
        let b = echelon_basis(3, 36, 60, None).unwrap();
        let names: Vec<String> = (0..b.dim()).map(|i| b.describe(i)).collect();
        assert_eq!(names[0], "g0^6");
        assert_eq!(names[3], "g0^3*g1^3");
        assert_eq!(names[6], "g1^6");
        assert_eq!(names[7], "g1^5*g2");
        assert_eq!(names[12], "g2^6");
    }

    #[test]
    fn trivial_weight() {
        let b = echelon_basis(3, 0, 5, None).unwrap();
        assert_eq!(b.dim(), 1);
        assert_eq!(b.elements[0].coeffs(), &[1, 0, 0, 0, 0]);
    }

    #[test]
    fn rank_matches_dimension_up_to_weight_sixty() {
        for p in [2u64, 3, 5] {
            for k in (0..=60).step_by(2) {
                let prec = sturm_precision(k as u64, p) + 4;
                let b = echelon_basis(p, k, prec, None).unwrap();
                assert_eq!(b.dim(), dim_mk(p, k).unwrap(), "p={p} k={k}");
                for (e, &lead) in b.elements.iter().zip(&b.lead_exponents) {
                    assert_eq!(e.leading_index(), Some(lead));
                    assert_eq!(e.coeffs()[lead], 1);
                }
            }
        }
        assert_eq!(dim_mk(5, 38).unwrap(), 19);
    }

    #[test]
    fn insufficient_precision_rejected() {
        assert!(matches!(
            echelon_basis(5, 8, 3, None),
            Err(Error::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn coordinates_round_trip() {
        let m = Modulus::new(13).unwrap();
        let b = echelon_basis(5, 8, 40, Some(m)).unwrap();
        let coords = vec![12, 2, 6, 3, 1];
        let f = b.combine(&coords).unwrap();
        assert_eq!(b.coordinates(&f).unwrap(), coords);
        let mut bad = f.coeffs().to_vec();
        bad[30] += 1;
        let bad = QExpansion::new(0, bad, Some(m));
        assert!(matches!(
            b.coordinates(&bad),
            Err(Error::NonzeroResidual { index: 30, .. })
        ));
    }

    #[test]
    fn invariant_space_leads() {
        let params = compute_params(5, 13, 1).unwrap();
        let b = basis_a(&params, 200, Some(Modulus::new(13).unwrap())).unwrap();
        assert_eq!(b.lead_exponents, vec![3, 7, 11, 15, 19]);
        for (e, &lead) in b.elements.iter().zip(&b.lead_exponents) {
            assert_eq!(e.leading_index(), Some(lead));
            for (n, &c) in e.coeffs().iter().enumerate() {
                if c != 0 {
                    assert_eq!(n % 4, 3);
                }
            }
        }
        let params = compute_params(3, 7, 2).unwrap();
        let b = basis_a(&params, 400, Some(Modulus::new(49).unwrap())).unwrap();
        assert_eq!(b.dim(), 13);
        assert_eq!(b.lead_exponents[0], 5);
        assert_eq!(b.lead_exponents[12], 5 + 6 * 12);
    }

    #[test]
    fn invariant_space_matches_direct_product() {
        let params = compute_params(5, 7, 1).unwrap();
        let b = basis_a(&params, 120, None).unwrap();
        let g =
            etaquot_series(&EtaQuotient::new(20, [(4, 1), (20, 1)]).unwrap(), 120, None).unwrap();
        let h = echelon_basis(5, 4, 40, None).unwrap();
        for (i, hi) in h.elements.iter().enumerate() {
            let direct = g
                .mul(&hi.dilate(4).unwrap().truncate(120))
                .unwrap()
                .rebase(0)
                .unwrap()
                .truncate(120);
            assert_eq!(b.elements[i], direct);
        }
    }
}
