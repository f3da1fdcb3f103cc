#![allow(dead_code)]

use elliptic::algebra::ConcreteSubalgebra;
use elliptic::exterior::Multivector;
use elliptic::geom2d::{LatticeLoop, Step};
use elliptic::nilcoh::{Bracket, NilLieAlgebra};
use elliptic::Rational;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Random nonabelian nilpotent Lie algebra of dimension 3..=max_dim.
///
/// Brackets only raise the index, [e_i, e_j] ∈ span{e_k : k > j}, which makes
/// any Jacobi-consistent table nilpotent; inconsistent tables are redrawn.
/// A random unimodular-ish change of basis then hides the triangular shape.
pub fn random_nilpotent(rng: &mut ChaCha8Rng, max_dim: usize) -> NilLieAlgebra {
    loop {
        let m = rng.random_range(3..=max_dim);
        let mut brackets = Vec::new();
        for i in 0..m {
            for j in (i + 1)..m {
                for k in (j + 1)..m {
                    if rng.random_bool(0.3) {
                        let c = *[-2i64, -1, 1, 2].choose(rng).unwrap();
                        brackets.push(Bracket { i, j, k, coeff: q(c) });
                    }
                }
            }
        }
        if brackets.is_empty() {
            continue;
        }
        let Ok(g) = NilLieAlgebra::new(m, &brackets) else {
            continue;
        };
        if !g.jacobi_check() || g.is_abelian() {
            continue;
        }
        return g.change_basis(&random_invertible(rng, m));
    }
}

/// Lower unitriangular times upper unitriangular with small entries.
pub fn random_invertible(rng: &mut ChaCha8Rng, m: usize) -> Vec<Vec<Rational>> {
    let mut l = vec![vec![q(0); m]; m];
    let mut u = vec![vec![q(0); m]; m];
    for i in 0..m {
        l[i][i] = q(1);
        u[i][i] = q(1);
        for j in 0..i {
            l[i][j] = q(rng.random_range(-1..=1));
            u[j][i] = q(rng.random_range(-1..=1));
        }
    }
    (0..m)
        .map(|i| (0..m).map(|j| (0..m).map(|k| &l[i][k] * &u[k][j]).sum()).collect())
        .collect()
}

/// Random 1-forms v_1..v_n forming a basis of Λ¹ℚⁿ.
pub fn random_frame(rng: &mut ChaCha8Rng, n: usize) -> Vec<Multivector> {
    let p = random_invertible(rng, n);
    (0..n)
        .map(|i| {
            let mut v = Multivector::zero(n);
            for (j, c) in p[i].iter().enumerate() {
                let e = Multivector::basis(n, &[j + 1]).unwrap();
                v = &v + &e.scale(c);
            }
            v
        })
        .collect()
}

/// A Poincaré duality subalgebra of Λ*ℚⁿ and the generators used.
///
/// In a random frame the coordinates split into an exterior block, some
/// symplectic clusters and unused directions. The exterior block contributes
/// Λ* of its 1-forms; each cluster of m pairs contributes ⟨1, ω, …, ω^m⟩.
/// Blocks use disjoint directions, so the generated algebra is their tensor
/// product and hence satisfies Poincaré duality.
pub fn random_pd_subalgebra(rng: &mut ChaCha8Rng, n: usize) -> (ConcreteSubalgebra, Vec<Multivector>) {
    let frame = random_frame(rng, n);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let exterior = rng.random_range(0..=n);
    let mut gens: Vec<Multivector> = idx[..exterior].iter().map(|&i| frame[i].clone()).collect();
    let mut rest = &idx[exterior..];
    while rest.len() >= 2 {
        let pairs = rng.random_range(1..=rest.len() / 2);
        if rng.random_bool(0.25) {
            break;
        }
        let mut omega = Multivector::zero(n);
        for p in 0..pairs {
            let c = q(rng.random_range(1..=3));
            let w = frame[rest[2 * p]].wedge(&frame[rest[2 * p + 1]]).unwrap().scale(&c);
            omega = &omega + &w;
        }
        gens.push(omega);
        rest = &rest[2 * pairs..];
    }
    let a = ConcreteSubalgebra::generated_by(n, &gens).unwrap();
    (a, gens)
}

pub fn random_step(rng: &mut ChaCha8Rng) -> Step {
    *Step::ALL.choose(rng).unwrap()
}

/// A random nonempty cyclically reduced loop of length at most `2 * half`.
pub fn random_reduced_loop(rng: &mut ChaCha8Rng, half: usize) -> LatticeLoop {
    // half = 1 always cancels to nothing
    let half = half.max(2);
    loop {
        let mut steps: Vec<Step> = (0..half).map(|_| random_step(rng)).collect();
        // close it up by walking back along a shuffled copy of the inverse
        let mut back: Vec<Step> = steps.iter().map(|s| s.inverse()).collect();
        back.shuffle(rng);
        steps.extend(back);
        let start = (rng.random_range(-5..=5), rng.random_range(-5..=5));
        let g = LatticeLoop::new(start, steps).unwrap().reduce();
        if !g.is_empty() {
            return g;
        }
    }
}

/// A random path of the given length.
pub fn random_path(rng: &mut ChaCha8Rng, len: usize) -> Vec<Step> {
    (0..len).map(|_| random_step(rng)).collect()
}
