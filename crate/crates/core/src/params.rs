//! Parameters attached to a triple `(p, l, j)`: the progression offset `beta`,
//! the shift `delta`, the weight `k` and power `y` of the modular form
//! realising the congruence, and its character.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, is_prime, kronecker};
use crate::error::{Error, Result};

/// Nebentypus of the form in a congruence: trivial or `(-p / .)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CharacterSpec {
    Trivial,
    Quadratic { discriminant: i64 },
}

impl CharacterSpec {
    pub fn value(&self, d: u64) -> i8 {
        match self {
            CharacterSpec::Trivial => 1,
            CharacterSpec::Quadratic { discriminant } => kronecker(*discriminant, d),
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, CharacterSpec::Trivial)
    }
}

impl fmt::Display for CharacterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CharacterSpec::Trivial => write!(f, "trivial"),
            CharacterSpec::Quadratic { discriminant } => write!(f, "({discriminant}/.)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceParams {
    pub p: u64,
    pub ell: u64,
    pub j: u32,
    /// `l^j`.
    pub ell_j: i64,
    /// `gcd(24, p + 1)`.
    pub delta_gcd: i64,
    /// `24 / gcd(24, p + 1)`.
    pub d: i64,
    pub alpha: i64,
    /// `0 <= beta < l^j` with `24 beta = p + 1 (mod l^j)`.
    pub beta: i64,
    /// `(l^(2j) - 1)(p + 1) / 24`.
    pub delta: i64,
    pub t: i64,
    pub x: Ratio<i64>,
    pub y: i64,
    pub k: i64,
    pub s: i64,
    pub lambda: i64,
    pub character: CharacterSpec,
}

impl CongruenceParams {
    /// `(beta + delta) / l^j`, an integer.
    pub fn shifted_offset(&self) -> i64 {
        (self.beta + self.delta) / self.ell_j
    }

    /// `(p + 1) / gcd(24, p + 1)`.
    pub fn unit(&self) -> i64 {
        (self.p as i64 + 1) / self.delta_gcd
    }
}

fn to_i64(v: i128) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Overflow)
}

fn validate(p: u64, ell: u64, j: u32) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::InvalidParameters(format!("p = {p} is not prime")));
    }
    if ell < 5 || !is_prime(ell) {
        return Err(Error::InvalidParameters(format!(
            "l = {ell} must be a prime >= 5"
        )));
    }
    if ell == p {
        return Err(Error::InvalidParameters("l must differ from p".into()));
    }
    if j == 0 {
        return Err(Error::InvalidParameters("j must be >= 1".into()));
    }
    Ok(())
}

pub fn compute_params(p: u64, ell: u64, j: u32) -> Result<CongruenceParams> {
    validate(p, ell, j)?;
    let pp = p as i128 + 1;
    let l = ell as i128;
    let lj = l.checked_pow(j).ok_or(Error::Overflow)?;
    let l2j = lj.checked_mul(lj).ok_or(Error::Overflow)?;
    let delta_gcd = gcd(24, p + 1) as i128;
    let d = 24 / delta_gcd;

    let alpha = if j.is_multiple_of(2) {
        (lj - 1) * pp / 24
    } else {
        (lj.checked_mul(l).ok_or(Error::Overflow)? - 1) * pp / 24
    };
    let beta = lj * (1 + (alpha - 1).div_euclid(lj)) - alpha;
    debug_assert_eq!((24 * beta - pp).rem_euclid(lj), 0);

    let delta = (l2j - 1).checked_mul(pp).ok_or(Error::Overflow)? / 24;
    let shifted = (beta + delta) / lj;
    let unit = pp / delta_gcd;
    let t = shifted / unit;
    let y = d * t - lj;
    let lambda = lj - 1 + (lj / l) * (l - 1);
    let k = lambda - d * t;
    let x = Ratio::from_integer(to_i64(shifted)?) - Ratio::new(to_i64(lj * pp)?, 24);
    let character = if (d * t) % 2 == 0 {
        CharacterSpec::Trivial
    } else {
        CharacterSpec::Quadratic {
            discriminant: -(p as i64),
        }
    };
    Ok(CongruenceParams {
        p,
        ell,
        j,
        ell_j: to_i64(lj)?,
        delta_gcd: delta_gcd as i64,
        d: d as i64,
        alpha: to_i64(alpha)?,
        beta: to_i64(beta)?,
        delta: to_i64(delta)?,
        t: to_i64(t)?,
        x,
        y: to_i64(y)?,
        k: to_i64(k)?,
        s: to_i64(k + y)?,
        lambda: to_i64(lambda)?,
        character,
    })
}

/// `beta` by scanning residues `0..l^j` for `24 beta = p + 1`.
pub fn beta_by_scan(p: u64, ell_j: u64) -> Option<u64> {
    (0..ell_j).find(|&b| (24 * b as u128) % ell_j as u128 == (p as u128 + 1) % ell_j as u128)
}

/// Rows of the closed-form tables for `x, y, k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableRow {
    /// j odd, 24 | p+1, (p+1)/D < l^j.
    OddLargeP,
    /// j odd, 24 | p+1, (p+1)/D >= l^j.
    OddSmallL,
    /// j odd, p+1 | 24, or p in {13,17,19} with l = -1 mod D.
    OddDivisor,
    /// j odd, all remaining cases.
    OddGeneric,
    /// j even, 24 | p+1 with (p+1)/D < l^j, or p+1 | 24.
    EvenDivisor,
    /// j even, 24 | p+1, (p+1)/D >= l^j.
    EvenSmallL,
    /// j even, remaining cases.
    EvenGeneric,
}

impl fmt::Display for TableRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TableRow::OddLargeP => "j odd, 24 | p+1, (p+1)/D < l^j",
            TableRow::OddSmallL => "j odd, 24 | p+1, (p+1)/D >= l^j",
            TableRow::OddDivisor => "j odd, p+1 | 24 or l = -1 mod D",
            TableRow::OddGeneric => "j odd, generic",
            TableRow::EvenDivisor => "j even, p+1 | 24 or (24 | p+1, (p+1)/D < l^j)",
            TableRow::EvenSmallL => "j even, 24 | p+1, (p+1)/D >= l^j",
            TableRow::EvenGeneric => "j even, generic",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableCheck {
    pub row: TableRow,
    pub table_x: Ratio<i64>,
    pub table_y: i64,
    pub table_k: i64,
    pub params: CongruenceParams,
}

impl TableCheck {
    pub fn matches(&self) -> bool {
        self.table_x == self.params.x
            && self.table_y == self.params.y
            && self.table_k == self.params.k
    }
}

fn floor(r: Ratio<i64>) -> i64 {
    r.floor().to_integer()
}

/// Evaluates the closed-form table row matching `(p, l, j)` (rows are tried in
/// order) and pairs it with the values from [`compute_params`].
pub fn crosscheck_tables(p: u64, ell: u64, j: u32) -> Result<TableCheck> {
    let params = compute_params(p, ell, j)?;
    let pi = p as i64;
    let l = ell as i64;
    let lj = params.ell_j;
    let lj1 = lj / l;
    let d = params.d;
    let u = Ratio::new(pi + 1, params.delta_gcd);
    let fl = l / d;
    let l_over_d = Ratio::new(l, d);
    let p1_mult_24 = (pi + 1) % 24 == 0;
    let p1_div_24 = 24 % (pi + 1) == 0;
    let u_small = u < Ratio::from_integer(lj);
    let one = Ratio::from_integer(1);

    let (row, x, y, k) = if j % 2 == 1 {
        if p1_mult_24 && u_small {
            (
                TableRow::OddLargeP,
                Ratio::from_integer(0),
                0,
                lj1 * (l - 1) - 1,
            )
        } else if p1_mult_24 {
            let x = -floor(Ratio::new(pi + 1, params.delta_gcd * lj));
            (
                TableRow::OddSmallL,
                Ratio::from_integer(x),
                -1,
                lj1 * (l - 1),
            )
        } else if p1_div_24
            || ([13, 17, 19].contains(&p) && l % d == d - 1 && (p, ell, j) != (19, 5, 1))
        {
            let x = u * (one + fl - l_over_d);
            let y = d * (1 + fl) - l;
            let k = (l - 1) * (lj1 + 1) - d * (1 + fl);
            (TableRow::OddDivisor, x, y, k)
        } else {
            let inner = u * (l_over_d - fl - Ratio::new(1, d * lj)) - Ratio::new(1, lj);
            let x = u * (Ratio::from_integer(fl) - l_over_d) + 1 + floor(inner);
            let y = d * fl - l;
            let k = (l - 1) * (lj1 + 1) - d * fl;
            (TableRow::OddGeneric, x, y, k)
        }
    } else if (p1_mult_24 && u_small) || p1_div_24 {
        (
            TableRow::EvenDivisor,
            Ratio::new(d - 1, d),
            d - 1,
            lj1 * (l - 1) - d,
        )
    } else if p1_mult_24 {
        let x = -floor(Ratio::new(pi + 1, params.delta_gcd * lj));
        (
            TableRow::EvenSmallL,
            Ratio::from_integer(x),
            -1,
            lj1 * (l - 1),
        )
    } else {
        let c = Ratio::new(pi + 1, 24);
        let x = one + floor(c - (c + one) / lj) - c;
        (TableRow::EvenGeneric, x, -1, lj1 * (l - 1))
    };
    Ok(TableCheck {
        row,
        table_x: x,
        table_y: y,
        table_k: k,
        params,
    })
}

/// Character `(-p / .)^(D t)` in the regime `p + 1 | 24`. It is quadratic
/// exactly for `p = 7` with `j` even or `l = 1 mod 6`, and for `p = 23`; the
/// weight `k` is odd precisely when the character is.
pub fn char_for(p: u64, ell: u64, j: u32) -> Result<CharacterSpec> {
    if 24 % (p + 1) != 0 {
        return Err(Error::InvalidParameters(format!(
            "closed-form character applies only when p + 1 divides 24 (p = {p})"
        )));
    }
    Ok(compute_params(p, ell, j)?.character)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn primes(lo: u64, hi: u64) -> Vec<u64> {
        (lo..hi).filter(|&n| is_prime(n)).collect()
    }

    #[test]
    fn documented_examples() {
        let a = compute_params(5, 13, 1).unwrap();
        assert_eq!((a.delta_gcd, a.d, a.beta, a.delta, a.t), (6, 4, 10, 42, 4));
        assert_eq!((a.x, a.y, a.k, a.s), (Ratio::new(3, 4), 3, 8, 11));
        assert!(a.character.is_trivial());

        let b = compute_params(5, 7, 1).unwrap();
        assert_eq!((b.beta, b.delta, b.t, b.y, b.k), (2, 12, 2, 1, 4));
        assert_eq!(b.x, Ratio::new(1, 4));

        let c = compute_params(3, 7, 2).unwrap();
        assert_eq!((c.d, c.y, c.k, c.s), (6, 5, 36, 41));
        assert_eq!(c.ell_j, 49);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(compute_params(4, 13, 1).is_err());
        assert!(compute_params(5, 3, 1).is_err());
        assert!(compute_params(7, 7, 1).is_err());
        assert!(compute_params(5, 7, 0).is_err());
    }

    #[test]
    fn grid_invariants() {
        for p in primes(2, 50) {
            for ell in primes(5, 50) {
                if ell == p {
                    continue;
                }
                for j in 1..=4 {
                    let c = compute_params(p, ell, j).unwrap();
                    assert_eq!(Some(c.beta as u64), beta_by_scan(p, c.ell_j as u64));
                    assert_eq!((c.beta + c.delta) % c.ell_j, 0);
                    assert_eq!(c.s, c.k + c.y);
                    assert!((c.x * c.d).is_integer());
                    assert_eq!(c.x.is_integer(), (p + 1) % 24 == 0, "({p},{ell},{j})");
                    if [2, 3, 5].contains(&p) {
                        assert!(c.y >= 0 && c.k >= 0);
                        assert!(c.character.is_trivial());
                        if p == 5 && j % 2 == 1 {
                            assert_eq!(c.k % 4, 0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tables_agree_on_grid() {
        for p in primes(2, 50) {
            for ell in primes(5, 50) {
                if ell == p {
                    continue;
                }
                for j in 1..=4 {
                    let chk = crosscheck_tables(p, ell, j).unwrap();
                    assert!(chk.matches(), "({p},{ell},{j}) {:?}", chk);
                }
            }
        }
    }

    #[test]
    fn table_rows_for_examples() {
        let chk = crosscheck_tables(5, 13, 1).unwrap();
        assert_eq!(chk.row, TableRow::OddDivisor);
        assert_eq!((chk.table_y, chk.table_k), (3, 8));
        let chk = crosscheck_tables(3, 7, 2).unwrap();
        assert_eq!(chk.row, TableRow::EvenDivisor);
        assert_eq!((chk.table_y, chk.table_k), (5, 36));
        let chk = crosscheck_tables(23, 5, 1).unwrap();
        assert_eq!(chk.params.d, 1);
        assert!(chk.matches());
    }

    #[test]
    fn character_rule() {
        assert_eq!(char_for(5, 13, 1).unwrap(), CharacterSpec::Trivial);
        // D t = 12 here, so the character is trivial and the weight k = 8 even.
        let c = compute_params(7, 11, 1).unwrap();
        assert_eq!((c.d * c.t, c.k), (12, 8));
        assert_eq!(char_for(7, 11, 1).unwrap(), CharacterSpec::Trivial);
        assert_eq!(
            char_for(7, 13, 1).unwrap(),
            CharacterSpec::Quadratic { discriminant: -7 }
        );
        for p in [2u64, 3, 5, 7, 11, 23] {
            for ell in primes(5, 60) {
                if ell == p {
                    continue;
                }
                for j in 1..=4 {
                    let chi = char_for(p, ell, j).unwrap();
                    let quadratic = (p == 7 && (j % 2 == 0 || ell % 6 == 1)) || p == 23;
                    assert_eq!(!chi.is_trivial(), quadratic, "({p},{ell},{j})");
                    let k = compute_params(p, ell, j).unwrap().k;
                    assert_eq!(k.rem_euclid(2) == 1, quadratic);
                }
            }
        }
        assert!(char_for(13, 5, 1).is_err());
        assert_eq!(CharacterSpec::Quadratic { discriminant: -5 }.value(7), 1);
    }
}
