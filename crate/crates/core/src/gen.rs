//! Seeded random instance generators for property sweeps and the CLI.

use num_bigint::BigInt;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mpoly::MPoly;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn coeff<R: Rng>(rng: &mut R, bound: i64) -> BigInt {
    loop {
        let c = rng.gen_range(-bound..=bound);
        if c != 0 {
            return BigInt::from(c);
        }
    }
}

/// Random monomial of degree `d` in `num_vars` variables, where variables
/// listed in `capped` get exponent at most 1. Returns `None` if impossible.
fn monomial<R: Rng>(
    rng: &mut R,
    num_vars: usize,
    d: u32,
    capped: &[bool],
    allowed: &[usize],
) -> Option<Vec<u32>> {
    let mut e = vec![0u32; num_vars];
    for _ in 0..d {
        let open: Vec<usize> = allowed
            .iter()
            .copied()
            .filter(|&i| !capped[i] || e[i] == 0)
            .collect();
        let &i = open.choose(rng)?;
        e[i] += 1;
    }
    Some(e)
}

/// Homogeneous form of degree `d` with up to `max_terms` terms, coefficients
/// in `[-bound, bound]`. Repeated monomials are summed and may cancel.
pub fn homogeneous<R: Rng>(
    rng: &mut R,
    num_vars: usize,
    d: u32,
    max_terms: usize,
    bound: i64,
) -> MPoly {
    let vars: Vec<usize> = (0..num_vars).collect();
    let capped = vec![false; num_vars];
    let k = rng.gen_range(1..=max_terms.max(1));
    let terms: Vec<(Vec<u32>, BigInt)> = (0..k)
        .map(|_| {
            (
                monomial(rng, num_vars, d, &capped, &vars).unwrap(),
                coeff(rng, bound),
            )
        })
        .collect();
    MPoly::from_terms(num_vars, terms).unwrap()
}

/// Homogeneous system in `n + 1` variables with `Σ deg < n + 1`.
pub fn cw_system<R: Rng>(rng: &mut R, n: usize) -> Vec<MPoly> {
    let mut budget = n as u32;
    let mut out = Vec::new();
    while budget > 0 && (out.is_empty() || rng.gen_bool(0.5)) {
        let d = rng.gen_range(1..=budget);
        budget -= d;
        out.push(homogeneous(rng, n + 1, d, 6, 3));
    }
    out
}

/// Cubic form in `x0..x3`. With `singular`, the point `e_3` is singular:
/// `x3·q(x0, x1, x2) + c(x0, x1, x2)`.
pub fn cubic_surface<R: Rng>(rng: &mut R, singular: bool) -> MPoly {
    if singular {
        let q = homogeneous(rng, 3, 2, 4, 3).with_num_vars(4).unwrap();
        let c = homogeneous(rng, 3, 3, 5, 3).with_num_vars(4).unwrap();
        &(&MPoly::var(4, 3) * &q) + &c
    } else {
        let powers = MPoly::parse("x0^3 + x1^3 + x2^3 + x3^3", 4).unwrap();
        &powers + &homogeneous(rng, 4, 3, 6, 3)
    }
}

/// `x4·f3(x0..x3) + g4(x0..x3)`, singular to order three at `e_4`. `f3`
/// always contains every pure cube, so each of `x0..x3` has degree 3 in it.
pub fn quartic_with_triple_point<R: Rng>(rng: &mut R) -> MPoly {
    let cubes = MPoly::parse("x0^3 + x1^3 + x2^3 + x3^3", 4).unwrap();
    let f3 = loop {
        let f = &cubes + &homogeneous(rng, 4, 3, 4, 3);
        if (0..4).all(|i| !f.coefficient(&cube(i)).is_zero()) {
            break f;
        }
    };
    let g4 = &MPoly::parse("x0^4 + x1^4 + x2^4 + x3^4", 4).unwrap() + &homogeneous(rng, 4, 4, 4, 3);
    &(&MPoly::var(5, 4) * &f3.with_num_vars(5).unwrap()) + &g4.with_num_vars(5).unwrap()
}

fn cube(i: usize) -> Vec<u32> {
    let mut e = vec![0; 4];
    e[i] = 3;
    e
}

/// Form in `n + 1` variables of degree `1..=n`, of degree at most 1 in every
/// variable outside a random set of at most four.
pub fn theorem42_instance<R: Rng>(rng: &mut R, n: usize) -> MPoly {
    let nv = n + 1;
    loop {
        let d = rng.gen_range(1..=n as u32);
        let mut vars: Vec<usize> = (0..nv).collect();
        vars.shuffle(rng);
        let k = rng.gen_range(0..=4.min(nv));
        let capped: Vec<bool> = (0..nv).map(|i| !vars[..k].contains(&i)).collect();
        let all: Vec<usize> = (0..nv).collect();
        let terms: Vec<(Vec<u32>, BigInt)> = (0..rng.gen_range(1..=6))
            .filter_map(|_| Some((monomial(rng, nv, d, &capped, &all)?, coeff(rng, 3))))
            .collect();
        if let Ok(f) = MPoly::from_terms(nv, terms) {
            if !f.is_zero() {
                return f;
            }
        }
    }
}

/// Multilinear form of degree `n` in `n + 1` variables.
pub fn multilinear<R: Rng>(rng: &mut R, n: usize) -> MPoly {
    let nv = n + 1;
    let capped = vec![true; nv];
    let all: Vec<usize> = (0..nv).collect();
    loop {
        let terms: Vec<(Vec<u32>, BigInt)> = (0..rng.gen_range(1..=nv))
            .map(|_| {
                (
                    monomial(rng, nv, n as u32, &capped, &all).unwrap(),
                    coeff(rng, 3),
                )
            })
            .collect();
        let f = MPoly::from_terms(nv, terms).unwrap();
        if !f.is_zero() {
            return f;
        }
    }
}
