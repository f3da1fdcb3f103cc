mod common;

use common::{q, random_nilpotent, random_pd_subalgebra};
use elliptic::algebra::AlgebraPresentation;
use elliptic::quadform::{hilbert_symbol, Place, QuadraticForm};
use elliptic::Rational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Poincaré polynomial of a product of spheres, as a coefficient vector.
fn sphere_product_poly(dims: &[u32]) -> Vec<usize> {
    let mut p = vec![1usize];
    for &d in dims {
        let mut next = vec![0; p.len() + d as usize];
        for (i, &c) in p.iter().enumerate() {
            next[i] += c;
            next[i + d as usize] += c;
        }
        p = next;
    }
    p
}

fn sphere_product(dims: &[u32]) -> AlgebraPresentation {
    let names: Vec<String> = (0..dims.len()).map(|i| format!("x{i}")).collect();
    let gens: Vec<(&str, u32)> = names.iter().map(|s| s.as_str()).zip(dims.iter().copied()).collect();
    // even spheres need x² = 0; odd ones get it for free
    let rels: Vec<String> = names
        .iter()
        .zip(dims)
        .filter(|(_, d)| *d % 2 == 0)
        .map(|(s, _)| format!("{s}^2"))
        .collect();
    let rel_refs: Vec<&str> = rels.iter().map(|s| s.as_str()).collect();
    let n: u32 = dims.iter().sum();
    AlgebraPresentation::parse(&gens, &rel_refs, n, &names.join("*")).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sphere_products_match_poincare_polynomial(dims in prop::collection::vec(1u32..=4, 1..=4)) {
        let a = sphere_product(&dims);
        let basis = a.basis_and_dims().unwrap();
        prop_assert_eq!(basis.ranks(), sphere_product_poly(&dims));
        prop_assert!(basis.poincare_duality().holds);
        let chi: i64 = if dims.iter().any(|d| d % 2 == 1) { 0 } else { 1 << dims.len() };
        prop_assert_eq!(basis.euler_characteristic(), chi);
    }

    #[test]
    fn generated_pd_subalgebras_are_pd(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, _) = random_pd_subalgebra(&mut rng, n);
        prop_assert!(a.is_poincare_duality().unwrap());
        let dims = a.dims();
        let top = a.top_degree();
        for k in 0..=top {
            prop_assert_eq!(dims[k], dims[top - k]);
        }
    }
}

/// (a, b)_p by brute force for squarefree a, b: does z² = a x² + b y² have a
/// primitive solution mod p³ (mod 32 for p = 2)? Hensel lifting makes that
/// modulus sufficient.
fn hilbert_brute(a: i64, b: i64, p: i64) -> i8 {
    let m = if p == 2 { 32 } else { p * p * p };
    let squares: Vec<i64> = (0..m).map(|z| z * z % m).collect();
    let unit_square = |v: i64| (0..m).any(|z| z % p != 0 && squares[z as usize] == v);
    let any_square = |v: i64| squares.contains(&v);
    for x in 0..m {
        for y in 0..m {
            let v = (a * squares[x as usize] + b * squares[y as usize]).rem_euclid(m);
            let ok = if x % p != 0 || y % p != 0 {
                any_square(v)
            } else {
                unit_square(v)
            };
            if ok {
                return 1;
            }
        }
    }
    -1
}

#[test]
fn hilbert_symbol_matches_brute_force() {
    let vals = [-6i64, -5, -3, -2, -1, 1, 2, 3, 5, 6, 7, 10];
    for &p in &[2i64, 3, 5] {
        for &a in &vals {
            for &b in &vals {
                let h = hilbert_symbol(&q(a), &q(b), Place::Prime(p as u64)).unwrap();
                assert_eq!(h, hilbert_brute(a, b, p), "({a},{b})_{p}");
            }
        }
    }
}

proptest! {
    #[test]
    fn hilbert_reciprocity(a in (-60i64..=60).prop_filter("nonzero", |x| *x != 0),
                           b in (-60i64..=60).prop_filter("nonzero", |x| *x != 0)) {
        let places = [Place::Infinity, Place::Prime(2), Place::Prime(3), Place::Prime(5), Place::Prime(7),
                      Place::Prime(11), Place::Prime(13), Place::Prime(17), Place::Prime(19), Place::Prime(23),
                      Place::Prime(29), Place::Prime(31), Place::Prime(37), Place::Prime(41), Place::Prime(43),
                      Place::Prime(47), Place::Prime(53), Place::Prime(59)];
        let prod: i64 = places.iter().map(|&v| hilbert_symbol(&q(a), &q(b), v).unwrap() as i64).product();
        prop_assert_eq!(prod, 1);
    }

    #[test]
    fn equivalence_is_congruence_invariant(diag in prop::collection::vec((-9i64..=9).prop_filter("nonzero", |x| *x != 0), 1..=4),
                                           seed in any::<u64>()) {
        let f = QuadraticForm::from_integers(&diag);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = common::random_invertible(&mut rng, diag.len());
        // Pᵀ G P
        let g = f.gram();
        let m = diag.len();
        let gp: Vec<Vec<Rational>> = (0..m)
            .map(|i| (0..m).map(|j| (0..m).map(|k| &p[k][i] * &g[k][k] * &p[k][j]).sum()).collect())
            .collect();
        let h = QuadraticForm::new(gp).unwrap();
        prop_assert!(f.rationally_equivalent(&h).unwrap());
        prop_assert_eq!(f.signature().unwrap(), h.signature().unwrap());
    }
}

#[test]
fn nilpotent_cohomology_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let g = random_nilpotent(&mut rng, 6);
        let m = g.dim();
        let b = g.lie_cohomology_dims().unwrap();
        assert_eq!(b.len(), m + 1);
        for k in 0..=m {
            assert_eq!(b[k], b[m - k], "Poincaré duality of CE cohomology");
        }
        let chi: i64 = b
            .iter()
            .enumerate()
            .map(|(k, &x)| if k % 2 == 0 { x as i64 } else { -(x as i64) })
            .sum();
        assert_eq!(chi, 0);
        let lcs = g.lower_central_series().unwrap();
        assert_eq!(b[1], m - lcs[1]);
        assert!(g.nomizu_kernel().unwrap().matches());
    }
}
