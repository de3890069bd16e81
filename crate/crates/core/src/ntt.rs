//! Number-theoretic transform convolution modulo an arbitrary word-sized
//! modulus, via up to three NTT-friendly primes and CRT reconstruction.

use crate::arith::{inv_mod, mul_mod, pow_mod};

const P1: u64 = 998_244_353;
const P2: u64 = 167_772_161;
const P3: u64 = 469_762_049;
const PRIMITIVE_ROOT: u64 = 3;

/// Length limit imposed by the smallest 2-adic valuation among the primes.
pub const MAX_LEN: usize = 1 << 23;

fn ntt<const P: u64>(a: &mut [u64], invert: bool) {
    let n = a.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j ^= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut w = pow_mod(PRIMITIVE_ROOT, (P - 1) / len as u64, P);
        if invert {
            w = inv_mod(w, P).expect("prime modulus");
        }
        let half = len / 2;
        let mut twiddles = Vec::with_capacity(half);
        let mut t = 1u64;
        for _ in 0..half {
            twiddles.push(t);
            t = t * w % P;
        }
        for chunk in a.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for k in 0..half {
                let u = lo[k];
                let v = hi[k] * twiddles[k] % P;
                lo[k] = if u + v >= P { u + v - P } else { u + v };
                hi[k] = if u >= v { u - v } else { u + P - v };
            }
        }
        len <<= 1;
    }
    if invert {
        let n_inv = inv_mod(n as u64, P).expect("prime modulus");
        for x in a.iter_mut() {
            *x = *x * n_inv % P;
        }
    }
}

fn convolve_prime<const P: u64>(a: &[u64], b: &[u64], out_len: usize) -> Vec<u64> {
    let size = (a.len() + b.len() - 1).next_power_of_two();
    let mut fa = vec![0u64; size];
    let mut fb = vec![0u64; size];
    for (dst, &src) in fa.iter_mut().zip(a) {
        *dst = src % P;
    }
    for (dst, &src) in fb.iter_mut().zip(b) {
        *dst = src % P;
    }
    ntt::<P>(&mut fa, false);
    ntt::<P>(&mut fb, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = *x * *y % P;
    }
    ntt::<P>(&mut fa, true);
    fa.truncate(out_len);
    fa
}

/// Number of primes needed so that the exact convolution (entries below
/// `min_len * (m-1)^2`) is recovered by CRT, or `None` if three do not suffice.
fn primes_needed(min_len: usize, m: u64) -> Option<usize> {
    let bound = (min_len as u128).checked_mul((m as u128 - 1) * (m as u128 - 1))?;
    let p12 = P1 as u128 * P2 as u128;
    if bound < P1 as u128 {
        Some(1)
    } else if bound < p12 {
        Some(2)
    } else if bound / (P3 as u128) < p12 {
        Some(3)
    } else {
        None
    }
}

/// Whether [`convolve_mod`] can handle these operand sizes and modulus.
pub fn supported(len_a: usize, len_b: usize, m: u64) -> bool {
    len_a > 0
        && len_b > 0
        && len_a + len_b - 1 <= MAX_LEN
        && primes_needed(len_a.min(len_b), m).is_some()
}

/// Cyclic-free convolution of residues in `[0, m)`, truncated to `out_len`,
/// reduced modulo `m`. Callers must check [`supported`] first.
pub fn convolve_mod(a: &[u64], b: &[u64], m: u64, out_len: usize) -> Vec<u64> {
    let a = &a[..a.len().min(out_len)];
    let b = &b[..b.len().min(out_len)];
    let needed = primes_needed(a.len().min(b.len()), m).expect("checked by caller");
    let r1 = convolve_prime::<P1>(a, b, out_len);
    let mut out = vec![0u64; out_len];
    match needed {
        1 => {
            for (o, x) in out.iter_mut().zip(&r1) {
                *o = x % m;
            }
        }
        2 => {
            let r2 = convolve_prime::<P2>(a, b, out_len);
            let inv_p1_mod_p2 = inv_mod(P1 % P2, P2).unwrap();
            for i in 0..r1.len() {
                // x = r1 + P1 * t, t = (r2 - r1) / P1 mod P2
                let t = mul_mod((r2[i] + P2 - r1[i] % P2) % P2, inv_p1_mod_p2, P2);
                let x = r1[i] as u128 + P1 as u128 * t as u128;
                out[i] = (x % m as u128) as u64;
            }
        }
        _ => {
            let r2 = convolve_prime::<P2>(a, b, out_len);
            let r3 = convolve_prime::<P3>(a, b, out_len);
            let inv_p1_mod_p2 = inv_mod(P1 % P2, P2).unwrap();
            let p12_mod_p3 = mul_mod(P1 % P3, P2 % P3, P3);
            let inv_p12_mod_p3 = inv_mod(p12_mod_p3, P3).unwrap();
            let p12 = P1 as u128 * P2 as u128;
            for i in 0..r1.len() {
                let t2 = mul_mod((r2[i] + P2 - r1[i] % P2) % P2, inv_p1_mod_p2, P2);
                let x12 = r1[i] as u128 + P1 as u128 * t2 as u128;
                let x12_mod_p3 = (x12 % P3 as u128) as u64;
                let t3 = mul_mod((r3[i] + P3 - x12_mod_p3) % P3, inv_p12_mod_p3, P3);
                // x = x12 + p12 * t3, reduced mod m without overflowing u128.
                let term = mul_mod((p12 % m as u128) as u64, t3 % m, m);
                out[i] = (((x12 % m as u128) as u64) as u128 + term as u128) as u64 % m;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &[u64], b: &[u64], m: u64, n: usize) -> Vec<u64> {
        let mut out = vec![0u64; n];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                if i + j < n {
                    out[i + j] = (out[i + j] + mul_mod(x, y, m)) % m;
                }
            }
        }
        out
    }

    #[test]
    fn matches_schoolbook_for_each_prime_count() {
        let mut state = 12345u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            state >> 11
        };
        for &m in &[13u64, 49, 1_000_003, 4_294_967_291, (1u64 << 38) + 7] {
            let a: Vec<u64> = (0..300).map(|_| next() % m).collect();
            let b: Vec<u64> = (0..257).map(|_| next() % m).collect();
            assert!(supported(a.len(), b.len(), m));
            assert_eq!(
                convolve_mod(&a, &b, m, 400),
                naive(&a, &b, m, 400),
                "m = {m}"
            );
        }
    }

    #[test]
    fn rejects_moduli_beyond_crt_range() {
        assert!(!supported(1 << 16, 1 << 16, (1u64 << 62) - 57));
        assert!(!supported(300, 257, (1u64 << 40) + 15));
    }
}
