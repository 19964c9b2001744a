#![allow(dead_code)]

use std::f64::consts::TAU;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use seqbell::{Mode, OutcomeQuadruple, Scenario};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn angle(rng: &mut StdRng) -> f64 {
    rng.random_range(0.0..TAU)
}

pub fn random_scenario(rng: &mut StdRng, mode: Mode) -> Scenario {
    Scenario::from_radians(mode, angle(rng), angle(rng), angle(rng), angle(rng)).unwrap()
}

/// Independent oracle for the sequential joint distribution: the product of
/// the singlet pair probability and the two single-particle transitions.
pub fn joint_product_formula(sc: &Scenario, q: OutcomeQuadruple) -> f64 {
    let ab = (sc.b.radians() - sc.a.radians()).cos();
    let aa = (sc.a_prime.radians() - sc.a.radians()).cos();
    let bb = (sc.b_prime.radians() - sc.b.radians()).cos();
    let (a1, b1, a2, b2) = (q.a1.value(), q.b1.value(), q.a2.value(), q.b2.value());
    0.25 * (1.0 - a1 * b1 * ab) * 0.5 * (1.0 + a1 * a2 * aa) * 0.5 * (1.0 + b1 * b2 * bb)
}

/// Independent oracle for local realizability: all eight CHSH sign variants
/// written out by hand.
pub fn chsh_variants_by_hand(e: [f64; 4]) -> [f64; 8] {
    let [ab, abp, apb, apbp] = e;
    let s = [
        ab + abp + apbp - apb,
        -ab + abp + apb + apbp,
        ab - abp + apb + apbp,
        ab + abp + apb - apbp,
    ];
    [s[0], s[1], s[2], s[3], -s[0], -s[1], -s[2], -s[3]]
}

/// Central finite difference of `f` along each coordinate.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[i] += h;
            down[i] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}
