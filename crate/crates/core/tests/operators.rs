use etacong::{Modulus, QExpansion};
use proptest::prelude::*;

const MODULI: [Option<u64>; 4] = [None, Some(13), Some(49), Some(1_000_003)];

fn series(len: std::ops::Range<usize>) -> impl Strategy<Value = QExpansion> {
    (prop::collection::vec(-1000i128..1000, len), 0..MODULI.len()).prop_map(|(c, mi)| {
        let md = MODULI[mi].map(|m| Modulus::new(m).unwrap());
        let f = QExpansion::new(0, c, None);
        match md {
            Some(m) => f.reduce_mod(m).unwrap(),
            None => f,
        }
    })
}

fn small_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7, 11, 13])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn u_undoes_v(f in series(1..200), d in 1u64..12) {
        prop_assert_eq!(f.apply_v(d).unwrap().apply_u(d).unwrap(), f);
    }

    #[test]
    fn u_factorization(f in series(1..200), g in series(1..200), d in 1u64..8) {
        let g = same_ring(&g, &f);
        let lhs = f.mul(&g.apply_v(d).unwrap()).unwrap().apply_u(d).unwrap();
        let rhs = f.apply_u(d).unwrap().mul(&g).unwrap();
        let n = lhs.prec().min(rhs.prec());
        prop_assert_eq!(lhs.truncate(n), rhs.truncate(n));
    }

    #[test]
    fn twist_is_complement_of_v_u(f in series(1..200), m in small_prime()) {
        let vu = f.apply_u(m).unwrap().apply_v(m).unwrap().truncate(f.prec());
        prop_assert_eq!(vu, f.sub(&f.twist_trivial(m).unwrap()).unwrap());
    }

    #[test]
    fn u_powers_compose(f in series(1..400), a in 1u64..6, b in 1u64..6, alpha in 1u32..4) {
        prop_assert_eq!(f.apply_u(a).unwrap().apply_u(b).unwrap(), f.apply_u(a * b).unwrap());
        let mut iterated = f.clone();
        for _ in 0..alpha {
            iterated = iterated.apply_u(a).unwrap();
        }
        prop_assert_eq!(iterated, f.apply_u(a.pow(alpha)).unwrap());
    }
}

/// `g`'s coefficients placed in the coefficient ring of `f`.
fn same_ring(g: &QExpansion, f: &QExpansion) -> QExpansion {
    let g = QExpansion::new(0, g.coeffs().to_vec(), None);
    match f.modulus() {
        Some(m) => g.reduce_mod(m).unwrap(),
        None => g,
    }
}
