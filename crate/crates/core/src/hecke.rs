//! Hecke operators `T_n` on q-expansions of forms in `M_s(Gamma0(N), psi)`,
//! and the matrix recurrence describing iterates of `U_{m^2}` on a
//! `T_{m^2}`-stable family.

use serde::{Deserialize, Serialize};

use crate::arith::{divisors, gcd, reduce_i128};
use crate::error::{Error, Result};
use crate::matrix::ModMatrix;
use crate::params::CharacterSpec;
use crate::qseries::{Modulus, QExpansion, Ring};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeckeContext {
    pub weight: i64,
    pub level: u64,
    pub character: CharacterSpec,
    pub modulus: Option<Modulus>,
}

impl HeckeContext {
    /// `psi(d) d^(s-1)` in the coefficient ring.
    fn divisor_factor(&self, d: u64) -> Result<i128> {
        let ring = Ring::of(self.modulus);
        let psi = self.character.value(d) as i128;
        let power = ring.pow(d as i128, (self.weight - 1).max(0) as u64)?;
        ring.mul(psi, power)
    }
}

/// `f | T_n = sum_{d | n} psi(d) d^(s-1) f | U_{n/d} | V_d`, on `floor(prec / n)`
/// coefficients. `n` must be coprime to the level.
pub fn hecke_t(f: &QExpansion, n: u64, ctx: &HeckeContext) -> Result<QExpansion> {
    if n == 0 {
        return Err(Error::InvalidParameters("Hecke index must be >= 1".into()));
    }
    if gcd(n, ctx.level) != 1 {
        return Err(Error::NotCoprimeToLevel {
            index: n,
            level: ctx.level,
        });
    }
    if f.modulus() != ctx.modulus {
        return Err(Error::ModulusMismatch {
            left: f.modulus().map(Modulus::get),
            right: ctx.modulus.map(Modulus::get),
        });
    }
    let off = f.integral_offset()?;
    if off < 0 {
        return Err(Error::InvalidParameters(
            "Hecke operators need a holomorphic expansion".into(),
        ));
    }
    let f = f.rebase(0)?;
    let out_len = f.prec() / n as usize;
    if out_len == 0 {
        return Err(Error::InsufficientPrecision {
            context: format!("T_{n}"),
            needed: n as usize,
            available: f.prec(),
        });
    }
    let mut acc = QExpansion::zero(out_len, ctx.modulus);
    for d in divisors(n) {
        let factor = ctx.divisor_factor(d)?;
        if factor != 0 {
            let term = f
                .apply_u(n / d)?
                .truncate(out_len.div_ceil(d as usize))
                .apply_v(d)?
                .truncate(out_len);
            acc = acc.add(&term.scale(factor)?)?;
        }
    }
    Ok(acc)
}

/// The matrices `(M_i, N_i, O_i)` with
/// `f | U_{m^2}^i = M_i f + N_i (f (x) 1_m) + O_i (f | V_{m^2})` given
/// `f | T_{m^2} = M f` (row action: row `r` of `M` holds the coordinates of `T f_r`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceMatrices {
    pub m_i: ModMatrix,
    pub n_i: ModMatrix,
    pub o_i: ModMatrix,
}

/// Scalars `psi(m) m^(s-1)` and `m^(2s-2)` modulo `modulus`.
pub fn hecke_scalars(s: i64, psi_m: i8, m: u64, modulus: u64) -> Result<(u64, u64)> {
    let ring = Ring::Mod(modulus);
    let ms1 = ring.pow(m as i128, (s - 1).max(0) as u64)?;
    let a = reduce_i128(psi_m as i128 * ms1, modulus);
    let b = reduce_i128(ring.mul(ms1, ms1)?, modulus);
    Ok((a, b))
}

/// `M_i` via `M_{i+1} = M_1 M_i - m^(2s-2) M_{i-1}`, `M_0 = I`,
/// `M_1 = M - psi(m) m^(s-1) I`; then `N_i = psi(m) m^(s-1) M_{i-1}`,
/// `O_i = -m^(2s-2) M_{i-1}`.
pub fn recurrence_matrices(
    m_row: &ModMatrix,
    s: i64,
    psi_m: i8,
    m: u64,
    i: u64,
) -> Result<RecurrenceMatrices> {
    let md = m_row.modulus();
    let d = m_row.size();
    let (a, b) = hecke_scalars(s, psi_m, m, md)?;
    if i == 0 {
        return Ok(RecurrenceMatrices {
            m_i: ModMatrix::identity(d, md),
            n_i: ModMatrix::zeros(d, md),
            o_i: ModMatrix::zeros(d, md),
        });
    }
    let m1 = m_row.sub(&ModMatrix::scalar(d, a, md));
    let mut prev = ModMatrix::identity(d, md);
    let mut cur = m1.clone();
    for _ in 1..i {
        let next = m1.mul(&cur).sub(&prev.scale(b as i128));
        prev = cur;
        cur = next;
    }
    Ok(RecurrenceMatrices {
        n_i: prev.scale(a as i128),
        o_i: prev.scale(-(b as i128)),
        m_i: cur,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecurrenceCheck {
    pub i: u64,
    pub prec: usize,
    pub holds: bool,
    /// `(basis index, exponent)` of the first disagreement.
    pub first_mismatch: Option<(usize, usize)>,
}

/// Checks the `U_{m^2}^i` identity coefficientwise on `0..prec` for a family
/// `fvec` with Hecke matrix `m_row` (row action) over `ctx.modulus`.
pub fn verify_recurrence(
    fvec: &[QExpansion],
    m_row: &ModMatrix,
    ctx: &HeckeContext,
    m: u64,
    i: u64,
    prec: usize,
) -> Result<RecurrenceCheck> {
    let md = ctx
        .modulus
        .ok_or_else(|| Error::InvalidParameters("matrix identities need a modulus".into()))?;
    let psi_m = ctx.character.value(m);
    let mats = recurrence_matrices(m_row, ctx.weight, psi_m, m, i)?;
    let m2 = m * m;
    let u_index = m2.checked_pow(i as u32).ok_or(Error::Overflow)?;
    let base: Vec<QExpansion> = fvec.iter().map(|f| f.rebase(0)).collect::<Result<_>>()?;
    let needed = (u_index as usize).saturating_mul(prec.saturating_sub(1)) + 1;
    for f in &base {
        if f.prec() < needed || f.prec() < prec {
            return Err(Error::InsufficientPrecision {
                context: format!("U_{{{m}^2}}^{i} identity"),
                needed: needed.max(prec),
                available: f.prec(),
            });
        }
    }
    let twisted: Vec<QExpansion> = base
        .iter()
        .map(|f| f.truncate(prec).twist_trivial(m))
        .collect::<Result<_>>()?;
    let v: Vec<QExpansion> = base
        .iter()
        .map(|f| Ok(f.truncate(prec).apply_v(m2)?.truncate(prec)))
        .collect::<Result<_>>()?;
    let mv = md.get();
    for (r, f) in base.iter().enumerate() {
        let lhs = f.apply_u(u_index)?;
        for n in 0..prec {
            let mut rhs: u64 = 0;
            for c in 0..base.len() {
                for (mat, series) in [
                    (&mats.m_i, &base[c]),
                    (&mats.n_i, &twisted[c]),
                    (&mats.o_i, &v[c]),
                ] {
                    let coef = mat.get(r, c);
                    if coef != 0 {
                        let val = reduce_i128(series.coeffs()[n], mv);
                        rhs = ((rhs as u128 + coef as u128 * val as u128) % mv as u128) as u64;
                    }
                }
            }
            if reduce_i128(lhs.coeffs()[n], mv) != rhs {
                return Ok(RecurrenceCheck {
                    i,
                    prec,
                    holds: false,
                    first_mismatch: Some((r, n)),
                });
            }
        }
    }
    Ok(RecurrenceCheck {
        i,
        prec,
        holds: true,
        first_mismatch: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn ctx(weight: i64, level: u64, md: Option<u64>) -> HeckeContext {
        HeckeContext {
            weight,
            level,
            character: CharacterSpec::Quadratic { discriminant: -5 },
            modulus: md.map(|m| Modulus::new(m).unwrap()),
        }
    }

    fn random_series(len: usize, md: u64, seed: u64) -> QExpansion {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        QExpansion::new(
            0,
            (0..len).map(|_| rng.gen_range(0..md as i128)).collect(),
            Some(Modulus::new(md).unwrap()),
        )
    }

    #[test]
    fn t1_is_identity_and_low_coefficients() {
        let c = ctx(11, 80, Some(13));
        let f = random_series(500, 13, 1);
        assert_eq!(hecke_t(&f, 1, &c).unwrap(), f);
        let t = hecke_t(&f, 49, &c).unwrap();
        assert_eq!(t.prec(), 500 / 49);
        let a = f.coeffs();
        assert_eq!(t.coeffs()[1], a[49]);
        // psi(7) = (-5/7) = 1, 7^10 = 4 mod 13
        let psi_term = 7i128.pow(10) % 13;
        assert_eq!(t.coeffs()[7], (a[343] + psi_term * a[7]) % 13);
        assert_eq!(
            t.coeffs()[0],
            (a[0] + psi_term * a[0] + psi_term * psi_term % 13 * a[0]) % 13
        );
    }

    #[test]
    fn exact_hecke_on_delta() {
        // Delta = q prod (1 - q^n)^24; T_2 Delta = -24 Delta.
        let e = crate::etaquot::euler_product(40, None)
            .pow(24)
            .unwrap()
            .shift(1)
            .rebase(0)
            .unwrap();
        let c = HeckeContext {
            weight: 12,
            level: 1,
            character: CharacterSpec::Trivial,
            modulus: None,
        };
        let t = hecke_t(&e, 2, &c).unwrap();
        assert_eq!(t, e.truncate(20).scale(-24).unwrap());
    }

    #[test]
    fn rejects_index_sharing_level() {
        let c = ctx(4, 80, Some(13));
        let f = random_series(100, 13, 2);
        assert!(matches!(
            hecke_t(&f, 25, &c),
            Err(Error::NotCoprimeToLevel { .. })
        ));
    }

    #[test]
    fn recurrence_small_cases() {
        let md = 13;
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let rows: Vec<Vec<i128>> = (0..3)
            .map(|_| (0..3).map(|_| rng.gen_range(0..13)).collect())
            .collect();
        let m = ModMatrix::from_rows(&rows, md).unwrap();
        let e0 = recurrence_matrices(&m, 11, 1, 7, 0).unwrap();
        assert!(e0.m_i.is_identity());
        let (a, b) = hecke_scalars(11, 1, 7, md).unwrap();
        let e1 = recurrence_matrices(&m, 11, 1, 7, 1).unwrap();
        assert_eq!(e1.m_i, m.sub(&ModMatrix::scalar(3, a, md)));
        assert_eq!(e1.n_i, ModMatrix::scalar(3, a, md));
        assert_eq!(e1.o_i, ModMatrix::scalar(3, b, md).scale(-1));
        for i in 1..=5 {
            let ei = recurrence_matrices(&m, 11, 1, 7, i).unwrap();
            let next = recurrence_matrices(&m, 11, 1, 7, i + 1).unwrap();
            assert_eq!(next.m_i, ei.m_i.mul(&e1.m_i).add(&ei.o_i));
            // Block power A^i applied to (I, 0).
            let blk = ModMatrix::block(
                &e1.m_i,
                &ModMatrix::scalar(3, b, md).scale(-1),
                &ModMatrix::identity(3, md),
                &ModMatrix::zeros(3, md),
            );
            let p = blk.pow(i);
            for r in 0..3 {
                for c in 0..3 {
                    assert_eq!(p.get(r, c), ei.m_i.get(r, c));
                }
            }
        }
    }

    #[test]
    fn u_power_and_twist_identities() {
        let f = random_series(3000, 49, 3);
        assert_eq!(
            f.apply_u(49).unwrap().apply_u(49).unwrap(),
            f.apply_u(2401).unwrap()
        );
        let tw = f.twist_trivial(7).unwrap();
        assert!(tw.apply_u(7).unwrap().is_zero());
        let short = f.truncate(400);
        assert_eq!(
            short.apply_v(49).unwrap().apply_u(7).unwrap().truncate(400),
            short.apply_v(7).unwrap().truncate(400)
        );
    }
}
