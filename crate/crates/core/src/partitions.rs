//! Two-colour partitions `p_[1,p](n)`: generating series, an independent
//! combinatorial oracle, and arithmetic-progression subseries.

use crate::error::{Error, Result};
use crate::etaquot::euler_product;
use crate::qseries::{Modulus, QExpansion};

/// `sum p_[1,p](n) q^n = prod (1 - q^n)^-1 (1 - q^(pn))^-1` to `prec` terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionSeries {
    pub p: u64,
    pub series: QExpansion,
}

impl PartitionSeries {
    pub fn prec(&self) -> usize {
        self.series.prec()
    }

    pub fn coefficient(&self, n: usize) -> Option<i128> {
        self.series.coeffs().get(n).copied()
    }
}

pub fn pfn_series(p: u64, prec: usize, modulus: Option<Modulus>) -> Result<PartitionSeries> {
    if prec == 0 {
        return Err(Error::InvalidParameters(
            "pfn_series needs prec >= 1".into(),
        ));
    }
    if p == 0 {
        return Err(Error::InvalidParameters("pfn_series needs p >= 1".into()));
    }
    let e = euler_product(prec, modulus);
    let denom = e.mul(&e.dilate(p)?.truncate(prec))?;
    Ok(PartitionSeries {
        p,
        series: denom.inv()?,
    })
}

/// Counts multisets of coloured parts summing to `n`: parts `1..=n` in the first
/// colour and multiples of `p` in the second, one unbounded-knapsack pass per
/// (part, colour) pair.
pub fn pfn_oracle(p: u64, n: usize) -> u128 {
    let mut ways = vec![0u128; n + 1];
    ways[0] = 1;
    let mut parts: Vec<usize> = (1..=n).collect();
    if p > 0 {
        parts.extend((1..).map(|k| k * p as usize).take_while(|&x| x <= n));
    }
    for part in parts {
        for total in part..=n {
            ways[total] += ways[total - part];
        }
    }
    ways[n]
}

/// `sum_n p_[1,p]((l^j n + 1)/D) q^n`, with non-integral arguments contributing 0.
pub fn extract_progression(
    s: &PartitionSeries,
    ell_j: u64,
    d: u64,
    out_len: usize,
) -> Result<QExpansion> {
    if d == 0 || ell_j == 0 {
        return Err(Error::InvalidParameters(
            "progression needs l^j >= 1 and D >= 1".into(),
        ));
    }
    let mut needed = 0usize;
    let mut coeffs = vec![0i128; out_len];
    for (n, slot) in coeffs.iter_mut().enumerate() {
        let arg = ell_j as u128 * n as u128 + 1;
        if arg.is_multiple_of(d as u128) {
            let idx = (arg / d as u128) as usize;
            needed = needed.max(idx + 1);
            if let Some(c) = s.coefficient(idx) {
                *slot = c;
            }
        }
    }
    if needed > s.prec() {
        return Err(Error::InsufficientPrecision {
            context: "progression (l^j n + 1)/D".into(),
            needed,
            available: s.prec(),
        });
    }
    Ok(QExpansion::new(0, coeffs, s.series.modulus()))
}

/// `sum_r p_[1,p](m r + beta) q^r`.
pub fn unrescaled_progression(
    s: &PartitionSeries,
    m: u64,
    beta: u64,
    out_len: usize,
) -> Result<QExpansion> {
    if m == 0 {
        return Err(Error::InvalidParameters(
            "progression needs modulus m >= 1".into(),
        ));
    }
    let needed = if out_len == 0 {
        0
    } else {
        (m as usize) * (out_len - 1) + beta as usize + 1
    };
    if needed > s.prec() {
        return Err(Error::InsufficientPrecision {
            context: "progression m r + beta".into(),
            needed,
            available: s.prec(),
        });
    }
    let coeffs = (0..out_len)
        .map(|r| s.series.coeffs()[m as usize * r + beta as usize])
        .collect();
    Ok(QExpansion::new(0, coeffs, s.series.modulus()))
}
