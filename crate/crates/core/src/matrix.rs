//! Dense square matrices over `Z/MZ`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, inv_mod, mul_mod, reduce_i128};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModMatrix {
    n: usize,
    modulus: u64,
    /// Row-major residues in `[0, M)`.
    data: Vec<u64>,
}

impl ModMatrix {
    pub fn zeros(n: usize, modulus: u64) -> Self {
        ModMatrix {
            n,
            modulus,
            data: vec![0; n * n],
        }
    }

    pub fn identity(n: usize, modulus: u64) -> Self {
        Self::scalar(n, 1, modulus)
    }

    pub fn scalar(n: usize, c: u64, modulus: u64) -> Self {
        let mut m = Self::zeros(n, modulus);
        for i in 0..n {
            m.data[i * n + i] = c % modulus;
        }
        m
    }

    /// From signed rows; every row must have length `rows.len()`.
    pub fn from_rows(rows: &[Vec<i128>], modulus: u64) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameters(
                "matrix rows must form a square".into(),
            ));
        }
        Ok(ModMatrix {
            n,
            modulus,
            data: rows
                .iter()
                .flatten()
                .map(|&v| reduce_i128(v, modulus))
                .collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i128) {
        self.data[i * self.n + j] = reduce_i128(v, self.modulus);
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.data
            .chunks(self.n.max(1))
            .take(self.n)
            .map(<[u64]>::to_vec)
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n, self.modulus);
        for i in 0..self.n {
            for j in 0..self.n {
                t.data[j * self.n + i] = self.get(i, j);
            }
        }
        t
    }

    fn check(&self, other: &ModMatrix) {
        assert_eq!(self.n, other.n, "matrix size mismatch");
        assert_eq!(self.modulus, other.modulus, "matrix modulus mismatch");
    }

    pub fn add(&self, other: &ModMatrix) -> Self {
        self.check(other);
        let m = self.modulus;
        ModMatrix {
            n: self.n,
            modulus: m,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| ((a as u128 + b as u128) % m as u128) as u64)
                .collect(),
        }
    }

    pub fn sub(&self, other: &ModMatrix) -> Self {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, c: i128) -> Self {
        let c = reduce_i128(c, self.modulus);
        ModMatrix {
            n: self.n,
            modulus: self.modulus,
            data: self
                .data
                .iter()
                .map(|&a| mul_mod(a, c, self.modulus))
                .collect(),
        }
    }

    pub fn mul(&self, other: &ModMatrix) -> Self {
        self.check(other);
        let n = self.n;
        let m = self.modulus as u128;
        let mut out = vec![0u64; n * n];
        // Accumulate in u128 and reduce only when the next product could overflow.
        let bound = u128::MAX - (m - 1) * (m - 1);
        for i in 0..n {
            for j in 0..n {
                let mut acc: u128 = 0;
                for k in 0..n {
                    acc += self.data[i * n + k] as u128 * other.data[k * n + j] as u128;
                    if acc > bound {
                        acc %= m;
                    }
                }
                out[i * n + j] = (acc % m) as u64;
            }
        }
        ModMatrix {
            n,
            modulus: self.modulus,
            data: out,
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::identity(self.n, self.modulus);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// `Some(c)` if the matrix equals `c I`.
    pub fn scalar_value(&self) -> Option<u64> {
        let c = self.data.first().copied().unwrap_or(0);
        for i in 0..self.n {
            for j in 0..self.n {
                let expected = if i == j { c } else { 0 };
                if self.get(i, j) != expected {
                    return None;
                }
            }
        }
        Some(c)
    }

    pub fn is_identity(&self) -> bool {
        self.scalar_value() == Some(1 % self.modulus)
    }

    /// Determinant by Euclidean row reduction, valid for any modulus.
    pub fn det(&self) -> u64 {
        let n = self.n;
        let m = self.modulus;
        let mut a: Vec<Vec<u64>> = self.rows();
        let mut det: u64 = 1 % m;
        for col in 0..n {
            loop {
                // Row with the smallest nonzero entry in this column becomes the pivot.
                let piv = (col..n)
                    .filter(|&r| a[r][col] != 0)
                    .min_by_key(|&r| a[r][col]);
                let Some(piv) = piv else {
                    return 0;
                };
                if piv != col {
                    a.swap(piv, col);
                    det = (m - det) % m;
                }
                let mut done = true;
                for r in col + 1..n {
                    if a[r][col] != 0 {
                        let q = a[r][col] / a[col][col];
                        let (top, bottom) = a.split_at_mut(r);
                        for (x, &y) in bottom[0].iter_mut().zip(&top[col]) {
                            *x = (*x + m - mul_mod(q % m, y, m)) % m;
                        }
                        if a[r][col] != 0 {
                            done = false;
                        }
                    }
                }
                if done {
                    break;
                }
            }
            det = mul_mod(det, a[col][col], m);
        }
        det
    }

    pub fn is_invertible(&self) -> bool {
        gcd(self.det(), self.modulus) == 1
    }

    /// Inverse by Gauss-Jordan with unit pivots.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let m = self.modulus;
        let mut a = self.rows();
        let mut inv = Self::identity(n, m).rows();
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| gcd(a[r][col], m) == 1)
                .ok_or(Error::NotInvertible(m))?;
            a.swap(piv, col);
            inv.swap(piv, col);
            let u = inv_mod(a[col][col], m).ok_or(Error::NotInvertible(m))?;
            for x in a[col].iter_mut().chain(inv[col].iter_mut()) {
                *x = mul_mod(*x, u, m);
            }
            for r in 0..n {
                if r != col && a[r][col] != 0 {
                    let f = a[r][col];
                    for c in 0..n {
                        a[r][c] = (a[r][c] + m - mul_mod(f, a[col][c], m)) % m;
                        inv[r][c] = (inv[r][c] + m - mul_mod(f, inv[col][c], m)) % m;
                    }
                }
            }
        }
        let rows: Vec<Vec<i128>> = inv
            .into_iter()
            .map(|r| r.into_iter().map(i128::from).collect())
            .collect();
        ModMatrix::from_rows(&rows, m)
    }

    /// `[[a, b], [c, d]]` from four equally sized blocks.
    pub fn block(a: &ModMatrix, b: &ModMatrix, c: &ModMatrix, d: &ModMatrix) -> Self {
        a.check(b);
        a.check(c);
        a.check(d);
        let n = a.n;
        let mut out = Self::zeros(2 * n, a.modulus);
        for i in 0..n {
            for j in 0..n {
                out.data[i * 2 * n + j] = a.get(i, j);
                out.data[i * 2 * n + n + j] = b.get(i, j);
                out.data[(n + i) * 2 * n + j] = c.get(i, j);
                out.data[(n + i) * 2 * n + n + j] = d.get(i, j);
            }
        }
        out
    }
}

impl fmt::Display for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.modulus.saturating_sub(1).to_string().len();
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>width$}")).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i128]], md: u64) -> ModMatrix {
        ModMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), md).unwrap()
    }

    #[test]
    fn arithmetic() {
        let a = m(&[&[1, 2], &[3, 4]], 13);
        let b = m(&[&[0, 1], &[1, 0]], 13);
        assert_eq!(a.mul(&b), m(&[&[2, 1], &[4, 3]], 13));
        assert_eq!(a.sub(&a), ModMatrix::zeros(2, 13));
        assert_eq!(a.transpose().get(0, 1), 3);
        assert_eq!(a.pow(0), ModMatrix::identity(2, 13));
        assert_eq!(a.pow(3), a.mul(&a).mul(&a));
        assert_eq!(ModMatrix::scalar(3, 5, 13).scalar_value(), Some(5));
        assert_eq!(a.scalar_value(), None);
    }

    #[test]
    fn determinant_and_inverse() {
        let a = m(&[&[1, 2], &[3, 4]], 49);
        assert_eq!(a.det(), 47);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).is_identity());
        let singular = m(&[&[7, 0], &[0, 1]], 49);
        assert_eq!(singular.det(), 7);
        assert!(!singular.is_invertible());
        assert!(matches!(singular.inverse(), Err(Error::NotInvertible(49))));
        let b = m(&[&[2, 3, 1], &[4, 1, 5], &[6, 2, 9]], 1_000_003);
        // 2(9-10) - 3(36-30) + 1(8-6) = -18
        assert_eq!(b.det(), 1_000_003 - 18);
    }

    #[test]
    fn block_layout() {
        let i = ModMatrix::identity(1, 7);
        let z = ModMatrix::zeros(1, 7);
        let a = ModMatrix::block(&i.scale(-1), &i.scale(-1), &i, &z);
        assert_eq!(a.rows(), vec![vec![6, 6], vec![1, 0]]);
        assert!(a.pow(3).is_identity());
    }
}
