//! Exact values of `p_[1,p](n)` as big integers.

use num_bigint::BigInt;

/// `p(0..=n)` by the pentagonal number recurrence.
pub fn partitions_upto(n: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::from(0); n + 1];
    p[0] = BigInt::from(1);
    for m in 1..=n {
        let mut acc = BigInt::from(0);
        for k in 1.. {
            let g1 = k * (3 * k - 1) / 2;
            if g1 > m {
                break;
            }
            let sign_pos = k % 2 == 1;
            let g2 = k * (3 * k + 1) / 2;
            for g in [g1, g2] {
                if g <= m {
                    if sign_pos {
                        acc += &p[m - g];
                    } else {
                        acc -= &p[m - g];
                    }
                }
            }
        }
        p[m] = acc;
    }
    p
}

/// `p_[1,p](n) = sum_{k >= 0} p(n - p k) p(k)`.
pub fn pfn_exact(p: u64, n: usize) -> BigInt {
    let table = partitions_upto(n);
    let step = p as usize;
    (0..=n / step)
        .map(|k| &table[n - step * k] * &table[k])
        .sum()
}
