mod common;

use common::q;
use elliptic::exterior::{binomial, blades_of_degree, top_pairing, Blade, Multivector};
use proptest::prelude::*;

const N: usize = 5;

/// Sign of sorting the concatenation of two index lists, by counting inversions.
fn sort_sign(a: &[usize], b: &[usize]) -> Option<i64> {
    let all: Vec<usize> = a.iter().chain(b).copied().collect();
    let mut inversions = 0;
    for i in 0..all.len() {
        for j in (i + 1)..all.len() {
            if all[i] == all[j] {
                return None;
            }
            if all[i] > all[j] {
                inversions += 1;
            }
        }
    }
    Some(if inversions % 2 == 0 { 1 } else { -1 })
}

fn multivector(coeffs: &[i64]) -> Multivector {
    let mut m = Multivector::zero(N);
    for (mask, &c) in coeffs.iter().enumerate() {
        if c != 0 {
            m = &m + &Multivector::from_blade(N, Blade::from_mask(mask as u32), q(c));
        }
    }
    m
}

fn homogeneous(k: usize, coeffs: &[i64]) -> Multivector {
    let mut m = Multivector::zero(N);
    for (b, &c) in blades_of_degree(N, k).into_iter().zip(coeffs) {
        m = &m + &Multivector::from_blade(N, b, q(c));
    }
    m
}

fn any_mv() -> impl Strategy<Value = Multivector> {
    prop::collection::vec(-3i64..=3, 1 << N).prop_map(|c| multivector(&c))
}

proptest! {
    #[test]
    fn blade_wedge_matches_inversion_oracle(a in 0u32..(1 << N), b in 0u32..(1 << N)) {
        let (ba, bb) = (Blade::from_mask(a), Blade::from_mask(b));
        let w = Multivector::from_blade(N, ba, q(1)).wedge(&Multivector::from_blade(N, bb, q(1))).unwrap();
        match sort_sign(&ba.indices(), &bb.indices()) {
            None => prop_assert!(w.is_zero()),
            Some(s) => prop_assert_eq!(w.coefficient(Blade::from_mask(a | b)), q(s)),
        }
    }

    #[test]
    fn wedge_is_associative_and_bilinear(x in any_mv(), y in any_mv(), z in any_mv()) {
        let left = x.wedge(&y).unwrap().wedge(&z).unwrap();
        let right = x.wedge(&y.wedge(&z).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        let sum = x.wedge(&(&y + &z)).unwrap();
        prop_assert_eq!(sum, &x.wedge(&y).unwrap() + &x.wedge(&z).unwrap());
    }

    #[test]
    fn graded_commutativity(j in 0usize..=N, k in 0usize..=N,
                            c1 in prop::collection::vec(-3i64..=3, 10),
                            c2 in prop::collection::vec(-3i64..=3, 10)) {
        let (a, b) = (homogeneous(j, &c1), homogeneous(k, &c2));
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        let expected = if (j * k) % 2 == 0 { ba } else { -&ba };
        prop_assert_eq!(ab, expected);
    }

    #[test]
    fn top_pairing_is_graded_symmetric(j in 0usize..=N, c1 in prop::collection::vec(-3i64..=3, 10),
                                       c2 in prop::collection::vec(-3i64..=3, 10)) {
        let k = N - j;
        let (a, b) = (homogeneous(j, &c1), homogeneous(k, &c2));
        let s = if (j * k) % 2 == 0 { q(1) } else { q(-1) };
        prop_assert_eq!(top_pairing(&a, &b).unwrap(), &s * top_pairing(&b, &a).unwrap());
    }
}

#[test]
fn graded_dimensions_are_binomial() {
    for n in 0..=8 {
        for k in 0..=n {
            assert_eq!(blades_of_degree(n, k).len() as u64, binomial(n, k));
        }
    }
}

#[test]
fn two_form_powers() {
    // ω = e12 + e34 + e56: ω³ = 3! e123456
    let n = 6;
    let e = |i: usize, j: usize| Multivector::basis(n, &[i, j]).unwrap();
    let w = &(&e(1, 2) + &e(3, 4)) + &e(5, 6);
    let w3 = w.wedge(&w).unwrap().wedge(&w).unwrap();
    assert_eq!(w3.coefficient(Blade::top(n)), q(6));
    assert!(w3.wedge(&w).unwrap().is_zero());
}
