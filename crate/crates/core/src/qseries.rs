//! Truncated power series in `q` with an exponent offset measured in 24ths.
//!
//! A [`QExpansion`] stores `prec` consecutive coefficients; the coefficient at
//! index `n` belongs to `q^(offset_num/24 + n)`. Coefficients are exact
//! integers (checked `i128` arithmetic) or residues modulo a word-sized
//! [`Modulus`]. Precision is never extended silently: every operation reports
//! the range of exponents it actually knows.

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, inv_mod, reduce_i128};
use crate::error::{Error, Result};
use crate::ntt;

/// A modulus `M` with `2 <= M <= 2^63 - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Modulus(u64);

impl Modulus {
    pub fn new(m: u64) -> Result<Self> {
        if m < 2 || m > i64::MAX as u64 {
            return Err(Error::InvalidModulus(m));
        }
        Ok(Modulus(m))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }
}

impl TryFrom<u64> for Modulus {
    type Error = Error;
    fn try_from(m: u64) -> Result<Self> {
        Modulus::new(m)
    }
}

impl From<Modulus> for u64 {
    fn from(m: Modulus) -> u64 {
        m.0
    }
}

/// Coefficient ring: `Z` with overflow checks, or `Z/MZ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Ring {
    Exact,
    Mod(u64),
}

impl Ring {
    pub(crate) fn of(modulus: Option<Modulus>) -> Ring {
        match modulus {
            Some(m) => Ring::Mod(m.get()),
            None => Ring::Exact,
        }
    }

    #[inline]
    pub(crate) fn norm(self, a: i128) -> i128 {
        match self {
            Ring::Exact => a,
            Ring::Mod(m) => a.rem_euclid(m as i128),
        }
    }

    #[inline]
    pub(crate) fn add(self, a: i128, b: i128) -> Result<i128> {
        match self {
            Ring::Exact => a.checked_add(b).ok_or(Error::Overflow),
            Ring::Mod(m) => Ok((a + b).rem_euclid(m as i128)),
        }
    }

    #[inline]
    pub(crate) fn mul(self, a: i128, b: i128) -> Result<i128> {
        match self {
            Ring::Exact => a.checked_mul(b).ok_or(Error::Overflow),
            Ring::Mod(m) => Ok((a * b).rem_euclid(m as i128)),
        }
    }

    /// `base^exp` in the ring (exact powers are overflow-checked).
    pub(crate) fn pow(self, base: i128, exp: u64) -> Result<i128> {
        match self {
            Ring::Exact => {
                let e = u32::try_from(exp).map_err(|_| Error::Overflow)?;
                base.checked_pow(e).ok_or(Error::Overflow)
            }
            Ring::Mod(m) => Ok(crate::arith::pow_mod(reduce_i128(base, m), exp, m) as i128),
        }
    }

    fn is_unit(self, a: i128) -> bool {
        match self {
            Ring::Exact => a == 1 || a == -1,
            Ring::Mod(m) => gcd(reduce_i128(a, m), m) == 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QExpansion {
    offset_num: i64,
    coeffs: Vec<i128>,
    modulus: Option<Modulus>,
}

impl QExpansion {
    /// Builds a series, reducing coefficients into `[0, M)` when a modulus is given.
    pub fn new(offset_num: i64, coeffs: Vec<i128>, modulus: Option<Modulus>) -> Self {
        let ring = Ring::of(modulus);
        let coeffs = match ring {
            Ring::Exact => coeffs,
            Ring::Mod(_) => coeffs.into_iter().map(|c| ring.norm(c)).collect(),
        };
        QExpansion {
            offset_num,
            coeffs,
            modulus,
        }
    }

    /// Exact series with offset 0 from small integer coefficients.
    pub fn integral(coeffs: &[i64]) -> Self {
        QExpansion::new(0, coeffs.iter().map(|&c| c as i128).collect(), None)
    }

    pub fn zero(prec: usize, modulus: Option<Modulus>) -> Self {
        QExpansion::new(0, vec![0; prec], modulus)
    }

    pub fn one(prec: usize, modulus: Option<Modulus>) -> Self {
        let mut coeffs = vec![0; prec];
        if prec > 0 {
            coeffs[0] = 1;
        }
        QExpansion::new(0, coeffs, modulus)
    }

    #[inline]
    pub fn prec(&self) -> usize {
        self.coeffs.len()
    }

    #[inline]
    pub fn offset_num(&self) -> i64 {
        self.offset_num
    }

    #[inline]
    pub fn modulus(&self) -> Option<Modulus> {
        self.modulus
    }

    #[inline]
    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub(crate) fn ring(&self) -> Ring {
        Ring::of(self.modulus)
    }

    /// The exponent offset as an integer, if it is one.
    pub fn integral_offset(&self) -> Result<i64> {
        if self.offset_num % 24 == 0 {
            Ok(self.offset_num / 24)
        } else {
            Err(Error::FractionalOffset(self.offset_num))
        }
    }

    /// Coefficient of `q^exponent` for an integral-offset series: `Some(0)` below
    /// the offset, `None` at or beyond the precision.
    pub fn coefficient(&self, exponent: i64) -> Option<i128> {
        let off = self.integral_offset().ok()?;
        if exponent < off {
            return Some(0);
        }
        self.coeffs.get((exponent - off) as usize).copied()
    }

    /// Index of the first nonzero coefficient.
    pub fn leading_index(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn truncate(&self, prec: usize) -> Self {
        let mut out = self.clone();
        out.coeffs.truncate(prec);
        out
    }

    /// Multiplies by `q^k`.
    pub fn shift(&self, k: i64) -> Self {
        let mut out = self.clone();
        out.offset_num += 24 * k;
        out
    }

    /// Re-expresses the series with a different offset (differing by whole
    /// exponents). Moving the offset down pads with zeros; moving it up drops
    /// leading coefficients, which must be zero.
    pub fn rebase(&self, new_offset_num: i64) -> Result<Self> {
        let gap = self.offset_num - new_offset_num;
        if gap % 24 != 0 {
            return Err(Error::OffsetGap {
                left: self.offset_num,
                right: new_offset_num,
            });
        }
        let steps = gap / 24;
        let coeffs = if steps >= 0 {
            let mut c = vec![0i128; steps as usize];
            c.extend_from_slice(&self.coeffs);
            c
        } else {
            let drop = (-steps) as usize;
            if let Some(i) = self.coeffs.iter().take(drop).position(|&c| c != 0) {
                return Err(Error::NonzeroResidual {
                    context: "rebase drops a nonzero coefficient".into(),
                    index: i,
                });
            }
            self.coeffs.iter().skip(drop).copied().collect()
        };
        Ok(QExpansion {
            offset_num: new_offset_num,
            coeffs,
            modulus: self.modulus,
        })
    }

    /// Reduces modulo `m`. An existing modulus `M` must be a multiple of `m`.
    pub fn reduce_mod(&self, m: Modulus) -> Result<Self> {
        if let Some(existing) = self.modulus {
            if existing.get() % m.get() != 0 {
                return Err(Error::ModulusMismatch {
                    left: Some(existing.get()),
                    right: Some(m.get()),
                });
            }
        }
        Ok(QExpansion::new(
            self.offset_num,
            self.coeffs.clone(),
            Some(m),
        ))
    }

    fn check_modulus(&self, other: &QExpansion) -> Result<Ring> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus.map(Modulus::get),
                right: other.modulus.map(Modulus::get),
            });
        }
        Ok(self.ring())
    }

    pub fn add(&self, other: &QExpansion) -> Result<Self> {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &QExpansion) -> Result<Self> {
        self.combine(other, true)
    }

    fn combine(&self, other: &QExpansion, negate: bool) -> Result<Self> {
        let ring = self.check_modulus(other)?;
        let gap = other.offset_num - self.offset_num;
        if gap % 24 != 0 {
            return Err(Error::OffsetGap {
                left: self.offset_num,
                right: other.offset_num,
            });
        }
        let base = self.offset_num.min(other.offset_num);
        let start_a = ((self.offset_num - base) / 24) as usize;
        let start_b = ((other.offset_num - base) / 24) as usize;
        let end = (start_a + self.prec()).min(start_b + other.prec());
        let mut coeffs = vec![0i128; end];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let a = if i >= start_a {
                self.coeffs[i - start_a]
            } else {
                0
            };
            let b = if i >= start_b {
                other.coeffs[i - start_b]
            } else {
                0
            };
            let b = if negate {
                b.checked_neg().ok_or(Error::Overflow)?
            } else {
                b
            };
            *c = ring.add(a, b)?;
        }
        Ok(QExpansion {
            offset_num: base,
            coeffs,
            modulus: self.modulus,
        })
    }

    pub fn neg(&self) -> Result<Self> {
        self.scale(-1)
    }

    pub fn scale(&self, c: i128) -> Result<Self> {
        let ring = self.ring();
        let c = ring.norm(c);
        let coeffs = self
            .coeffs
            .iter()
            .map(|&a| ring.mul(a, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(QExpansion {
            offset_num: self.offset_num,
            coeffs,
            modulus: self.modulus,
        })
    }

    /// Cauchy product. Offsets add; the precision is the smaller of the two.
    pub fn mul(&self, other: &QExpansion) -> Result<Self> {
        let ring = self.check_modulus(other)?;
        let prec = self.prec().min(other.prec());
        let coeffs = mul_trunc(ring, &self.coeffs, &other.coeffs, prec)?;
        Ok(QExpansion {
            offset_num: self.offset_num + other.offset_num,
            coeffs,
            modulus: self.modulus,
        })
    }

    /// Multiplicative inverse to the working precision; the coefficient at
    /// index 0 must be a unit. The offset negates.
    pub fn inv(&self) -> Result<Self> {
        let ring = self.ring();
        let n = self.prec();
        if n == 0 {
            return Ok(self.clone());
        }
        let lead = self.coeffs[0];
        if !ring.is_unit(lead) {
            return Err(Error::NonUnitLeading(lead));
        }
        let coeffs = match ring {
            Ring::Exact => inv_by_recurrence(ring, &self.coeffs, lead)?,
            Ring::Mod(m) => {
                let nnz = self.coeffs.iter().filter(|&&c| c != 0).count();
                if nnz <= sparse_threshold(n) {
                    let lead_inv = inv_mod(lead as u64, m).expect("unit checked") as i128;
                    inv_by_recurrence(ring, &self.coeffs, lead_inv)?
                } else {
                    let a: Vec<u64> = self.coeffs.iter().map(|&c| c as u64).collect();
                    inv_newton_mod(&a, m)
                        .into_iter()
                        .map(|c| c as i128)
                        .collect()
                }
            }
        };
        Ok(QExpansion {
            offset_num: -self.offset_num,
            coeffs,
            modulus: self.modulus,
        })
    }

    /// `self^e` by binary exponentiation; negative `e` inverts first.
    pub fn pow(&self, e: i64) -> Result<Self> {
        let offset_num = self.offset_num.checked_mul(e).ok_or(Error::Overflow)?;
        if e == 0 {
            let mut one = QExpansion::one(self.prec(), self.modulus);
            one.offset_num = 0;
            return Ok(one);
        }
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut exp = e.unsigned_abs();
        let ring = self.ring();
        let prec = self.prec();
        let mut acc: Option<Vec<i128>> = None;
        let mut sq = base.coeffs;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = Some(match acc {
                    None => sq.clone(),
                    Some(a) => mul_trunc(ring, &a, &sq, prec)?,
                });
            }
            exp >>= 1;
            if exp > 0 {
                sq = mul_trunc(ring, &sq, &sq, prec)?;
            }
        }
        Ok(QExpansion {
            offset_num,
            coeffs: acc.expect("e != 0"),
            modulus: self.modulus,
        })
    }

    /// `f | U_d = sum a(d n) q^n`. Needs an integral offset; a nonnegative offset
    /// yields a result with offset 0.
    pub fn apply_u(&self, d: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameters("U_d needs d >= 1".into()));
        }
        let off = self.integral_offset()?;
        let d = d as i64;
        let start = if off >= 0 {
            0
        } else {
            off.div_euclid(d) + i64::from(off.rem_euclid(d) != 0)
        };
        let known_end = off + self.prec() as i64; // exclusive
        let end = (known_end - 1).div_euclid(d) + 1;
        let len = (end - start).max(0) as usize;
        let coeffs = (0..len)
            .map(|i| {
                let e = (start + i as i64) * d;
                if e < off {
                    0
                } else {
                    self.coeffs[(e - off) as usize]
                }
            })
            .collect();
        Ok(QExpansion {
            offset_num: 24 * start,
            coeffs,
            modulus: self.modulus,
        })
    }

    /// `f | V_d = sum a(n) q^(d n)`; the precision scales by `d`.
    pub fn apply_v(&self, d: u64) -> Result<Self> {
        self.integral_offset()?;
        self.dilate(d)
    }

    /// `q -> q^d` with no restriction on the offset (used for eta factors
    /// `eta(d z)` whose offsets are fractional before dilation).
    pub fn dilate(&self, d: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameters("dilation needs d >= 1".into()));
        }
        let d_us = d as usize;
        let mut coeffs = vec![0i128; self.prec() * d_us];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i * d_us] = c;
        }
        Ok(QExpansion {
            offset_num: self
                .offset_num
                .checked_mul(d as i64)
                .ok_or(Error::Overflow)?,
            coeffs,
            modulus: self.modulus,
        })
    }

    /// Twist by the trivial character modulo `m`: zero every coefficient whose
    /// exponent is divisible by `m`.
    pub fn twist_trivial(&self, m: u64) -> Result<Self> {
        let off = self.integral_offset()?;
        let m = m as i64;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if (off + i as i64).rem_euclid(m) == 0 {
                    0
                } else {
                    c
                }
            })
            .collect();
        Ok(QExpansion {
            offset_num: self.offset_num,
            coeffs,
            modulus: self.modulus,
        })
    }
}

/// Sparse operands (few nonzeros) multiply faster by direct accumulation.
fn sparse_threshold(n: usize) -> usize {
    let log = usize::BITS - n.max(1).leading_zeros();
    32 + 3 * log as usize
}

fn nonzero_terms(a: &[i128]) -> Vec<(usize, i128)> {
    a.iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| (i, c))
        .collect()
}

/// Truncated product of two coefficient vectors in the given ring. The
/// algorithm (sparse accumulation, NTT, schoolbook) depends on sizes only; the
/// result is identical in every case.
pub(crate) fn mul_trunc(ring: Ring, a: &[i128], b: &[i128], n: usize) -> Result<Vec<i128>> {
    let a = &a[..a.len().min(n)];
    let b = &b[..b.len().min(n)];
    let mut out = vec![0i128; n];
    if a.is_empty() || b.is_empty() || n == 0 {
        return Ok(out);
    }
    let nz_a = nonzero_terms(a);
    let nz_b = nonzero_terms(b);
    let (sparse, dense) = if nz_a.len() <= nz_b.len() {
        (&nz_a, b)
    } else {
        (&nz_b, a)
    };
    match ring {
        Ring::Mod(m) => {
            let use_dense = sparse.len() > sparse_threshold(n)
                && a.len().min(b.len()) > 64
                && ntt::supported(a.len(), b.len(), m);
            if use_dense {
                let au: Vec<u64> = a.iter().map(|&c| c as u64).collect();
                let bu: Vec<u64> = b.iter().map(|&c| c as u64).collect();
                let r = ntt::convolve_mod(&au, &bu, m, n);
                for (o, x) in out.iter_mut().zip(r) {
                    *o = x as i128;
                }
            } else {
                let m128 = m as u128;
                let mut acc = vec![0u128; n];
                for &(i, c) in sparse.iter() {
                    let c = c as u128;
                    for (j, &d) in dense.iter().enumerate().take(n - i) {
                        if d != 0 {
                            let slot = &mut acc[i + j];
                            *slot = (*slot + c * d as u128) % m128;
                        }
                    }
                }
                for (o, x) in out.iter_mut().zip(acc) {
                    *o = x as i128;
                }
            }
        }
        Ring::Exact => {
            for &(i, c) in sparse.iter() {
                for (j, &d) in dense.iter().enumerate().take(n - i) {
                    if d != 0 {
                        let prod = c.checked_mul(d).ok_or(Error::Overflow)?;
                        out[i + j] = out[i + j].checked_add(prod).ok_or(Error::Overflow)?;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `b_n = -lead_inv * sum_{k>=1} a_k b_{n-k}`, iterating only over nonzero `a_k`.
fn inv_by_recurrence(ring: Ring, a: &[i128], lead_inv: i128) -> Result<Vec<i128>> {
    let n = a.len();
    let nz: Vec<(usize, i128)> = nonzero_terms(a)
        .into_iter()
        .filter(|&(i, _)| i > 0)
        .collect();
    let mut b = vec![0i128; n];
    b[0] = ring.norm(lead_inv);
    for i in 1..n {
        let mut s: i128 = 0;
        for &(k, ak) in nz.iter() {
            if k > i {
                break;
            }
            let t = ring.mul(ak, b[i - k])?;
            s = ring.add(s, t)?;
        }
        let neg = s.checked_neg().ok_or(Error::Overflow)?;
        b[i] = ring.mul(neg, lead_inv)?;
    }
    Ok(b)
}

/// Newton iteration `b <- b (2 - a b)` modulo `m`, doubling the precision.
fn inv_newton_mod(a: &[u64], m: u64) -> Vec<u64> {
    let n = a.len();
    let ring = Ring::Mod(m);
    let lead_inv = inv_mod(a[0], m).expect("unit checked");
    let mut b: Vec<i128> = vec![lead_inv as i128];
    let a128: Vec<i128> = a.iter().map(|&c| c as i128).collect();
    let mut len = 1usize;
    while len < n {
        let len2 = (2 * len).min(n);
        let ab = mul_trunc(ring, &a128[..len2], &b, len2).expect("modular product");
        let mut corr: Vec<i128> = ab.iter().map(|&c| ring.norm(-c)).collect();
        corr[0] = ring.norm(corr[0] + 2);
        b = mul_trunc(ring, &b, &corr, len2).expect("modular product");
        len = len2;
    }
    b.into_iter().map(|c| c as u64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: u64) -> Option<Modulus> {
        Some(Modulus::new(v).unwrap())
    }

    fn euler_product(n: usize) -> QExpansion {
        let mut p = QExpansion::one(n, None);
        for k in 1..n {
            let mut f = vec![0i64; n];
            f[0] = 1;
            f[k] = -1;
            p = p.mul(&QExpansion::integral(&f)).unwrap();
        }
        p
    }

    #[test]
    fn cancellation_and_identity() {
        let a = QExpansion::integral(&[1, -1, 0, 0]);
        let b = QExpansion::integral(&[0, 1, 0, 0]);
        assert_eq!(a.add(&b).unwrap(), QExpansion::integral(&[1, 0, 0, 0]));
        let z = QExpansion::zero(4, None);
        assert_eq!(a.add(&z).unwrap(), a);
    }

    #[test]
    fn additive_inverse_keeps_offset() {
        let mut eta = euler_product(20);
        eta.offset_num = 1;
        let sum = eta.add(&eta.neg().unwrap()).unwrap();
        assert!(sum.is_zero());
        assert_eq!(sum.offset_num(), 1);
        assert_eq!(sum.prec(), 20);
    }

    #[test]
    fn add_aligns_offsets_and_takes_overlap() {
        let a = QExpansion::integral(&[1, 1, 1, 1, 1]); // known through q^4
        let b = QExpansion::integral(&[5, 5]).shift(2); // known through q^3
        let s = a.add(&b).unwrap();
        assert_eq!(s.offset_num(), 0);
        assert_eq!(s.coeffs(), &[1, 1, 6, 6]);
        let frac = QExpansion::new(1, vec![1], None);
        assert!(matches!(a.add(&frac), Err(Error::OffsetGap { .. })));
        assert!(matches!(
            a.add(&a.reduce_mod(Modulus::new(7).unwrap()).unwrap()),
            Err(Error::ModulusMismatch { .. })
        ));
    }

    #[test]
    fn geometric_series_inverse() {
        let n = 12;
        let one_minus_q = QExpansion::integral(&{
            let mut v = vec![0i64; n];
            v[0] = 1;
            v[1] = -1;
            v
        });
        let geo = one_minus_q.inv().unwrap();
        assert!(geo.coeffs().iter().all(|&c| c == 1));
        assert_eq!(one_minus_q.mul(&geo).unwrap(), QExpansion::one(n, None));
        assert_eq!(
            QExpansion::one(5, None).inv().unwrap(),
            QExpansion::one(5, None)
        );
    }

    #[test]
    fn inverse_of_euler_product_gives_partitions() {
        let p = euler_product(11).inv().unwrap();
        assert_eq!(p.coeffs(), &[1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]);
    }

    #[test]
    fn inverse_rejects_non_unit() {
        let a = QExpansion::integral(&[2, 1]);
        assert!(matches!(a.inv(), Err(Error::NonUnitLeading(2))));
        let b = QExpansion::new(0, vec![7, 1], m(49));
        assert!(matches!(b.inv(), Err(Error::NonUnitLeading(7))));
        assert!(matches!(b.pow(-1), Err(Error::NonUnitLeading(7))));
    }

    #[test]
    fn powers() {
        let a = QExpansion::integral(&[1, -1, 0, 0]);
        assert_eq!(a.pow(2).unwrap().coeffs(), &[1, -2, 1, 0]);
        let mut eta = euler_product(10);
        eta.offset_num = 1;
        assert_eq!(eta.pow(24).unwrap().offset_num(), 24);
        let inv = eta.pow(-1).unwrap();
        assert_eq!(inv.offset_num(), -1);
        assert_eq!(inv.coeffs(), &[1, 1, 2, 3, 5, 7, 11, 15, 22, 30]);
        assert_eq!(eta.pow(0).unwrap(), QExpansion::one(10, None));
    }

    #[test]
    fn u_and_v_on_examples() {
        let a = QExpansion::integral(&[1, 1, 2, 3]);
        assert_eq!(a.apply_u(1).unwrap(), a);
        assert_eq!(a.apply_u(3).unwrap().coeffs(), &[1, 3]);
        let all_ones = QExpansion::integral(&[1; 10]);
        assert_eq!(all_ones.apply_u(2).unwrap().coeffs(), &[1; 5]);
        let one_plus_q = QExpansion::integral(&[1, 1]);
        let v = one_plus_q.apply_v(3).unwrap();
        assert_eq!(v.coeffs(), &[1, 0, 0, 1, 0, 0]);
        assert_eq!(a.apply_v(1).unwrap(), a);
        assert!(matches!(
            QExpansion::new(1, vec![1], None).apply_u(2),
            Err(Error::FractionalOffset(1))
        ));
        assert!(matches!(
            QExpansion::new(5, vec![1], None).apply_v(2),
            Err(Error::FractionalOffset(5))
        ));
    }

    #[test]
    fn u_respects_offsets() {
        // q^3 + 2 q^4 + ... + 7 q^8 known through q^8
        let a = QExpansion::new(72, vec![1, 2, 3, 4, 5, 6], None);
        let u = a.apply_u(2).unwrap();
        assert_eq!(u.offset_num(), 0);
        assert_eq!(u.coeffs(), &[0, 0, 2, 4, 6]);
        // q^-3 + q^-2 + ... known through q^1
        let b = QExpansion::new(-72, vec![1, 1, 1, 1, 1], None);
        let u = b.apply_u(2).unwrap();
        assert_eq!(u.offset_num(), -24);
        assert_eq!(u.coeffs(), &[1, 1]);
    }

    #[test]
    fn twist_examples() {
        let ones = QExpansion::integral(&[1; 7]);
        assert_eq!(
            ones.twist_trivial(3).unwrap().coeffs(),
            &[0, 1, 1, 0, 1, 1, 0]
        );
        assert!(QExpansion::one(3, None).twist_trivial(5).unwrap().is_zero());
    }

    #[test]
    fn modular_dense_path_matches_exact() {
        let n = 600;
        let mut s = 7u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((s >> 33) % 1000) as i64 - 500
        };
        let a: Vec<i64> = (0..n).map(|_| next()).collect();
        let b: Vec<i64> = (0..n).map(|_| next()).collect();
        let exact = QExpansion::integral(&a)
            .mul(&QExpansion::integral(&b))
            .unwrap();
        let md = Modulus::new(49).unwrap();
        let via_mod = QExpansion::integral(&a)
            .reduce_mod(md)
            .unwrap()
            .mul(&QExpansion::integral(&b).reduce_mod(md).unwrap())
            .unwrap();
        assert_eq!(exact.reduce_mod(md).unwrap(), via_mod);
    }

    #[test]
    fn newton_inverse_matches_recurrence() {
        let md = m(1_000_003);
        let n = 700;
        let coeffs: Vec<i128> = (0..n)
            .map(|i| ((i * i * 31 + 7) % 1_000_003) as i128)
            .collect();
        let a = QExpansion::new(0, coeffs.clone(), md);
        let newton = a.inv().unwrap();
        let ring = Ring::Mod(1_000_003);
        let lead_inv = inv_mod(7, 1_000_003).unwrap() as i128;
        let rec = inv_by_recurrence(ring, &coeffs, lead_inv).unwrap();
        assert_eq!(newton.coeffs(), rec.as_slice());
    }

    #[test]
    fn modulus_bounds() {
        assert!(Modulus::new(1).is_err());
        assert!(Modulus::new(1 << 63).is_err());
        assert!(Modulus::new(i64::MAX as u64).is_ok());
    }

    #[test]
    fn exact_overflow_is_reported() {
        let a = QExpansion::new(0, vec![1, 1 << 70, 0], None);
        assert!(matches!(a.pow(2), Err(Error::Overflow)));
    }
}
