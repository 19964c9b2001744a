mod common;

use std::f64::consts::TAU;

use proptest::prelude::*;
use seqbell::quantum::{
    a1_b2_marginal_closed, brute_force_correlators, closed_form_correlators, grand_joint_quantum,
    make_spin_state, sign_pairs, transition_prob, transition_prob_from_states,
};
use seqbell::{Mode, Observable, OutcomeQuadruple, PairLabel, PlanarAngle, Scenario, Sign};

use common::{joint_product_formula, random_scenario, rng};

const TOL: f64 = 1e-12;

#[test]
fn joint_matches_product_formula() {
    let mut r = rng(1);
    for _ in 0..1000 {
        let sc = random_scenario(&mut r, Mode::Sequential);
        let d = grand_joint_quantum(&sc).unwrap();
        for (q, p) in d.iter() {
            assert!(p >= 0.0);
            assert!((p - joint_product_formula(&sc, q)).abs() <= TOL, "{sc:?} {q:?}");
        }
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() <= TOL);
    }
}

#[test]
fn brute_force_matches_closed_form() {
    let mut r = rng(2);
    for _ in 0..1000 {
        let sc = random_scenario(&mut r, Mode::Sequential);
        let brute = brute_force_correlators(&sc).unwrap();
        let closed = closed_form_correlators(&sc);
        assert!(brute.max_abs_diff(&closed) <= TOL, "{sc:?}");
    }
}

#[test]
fn a1_b2_marginal_identity() {
    let mut r = rng(3);
    for _ in 0..1000 {
        let sc = random_scenario(&mut r, Mode::Sequential);
        let m = grand_joint_quantum(&sc).unwrap().marginal_pair(PairLabel::A1_B2);
        for (got, want) in m.probs().iter().zip(a1_b2_marginal_closed(&sc)) {
            assert!((got - want).abs() <= TOL);
        }
    }
}

#[test]
fn no_signaling_between_particles() {
    let mut r = rng(4);
    let a_side = PairLabel::new(Observable::A1, Observable::A2).unwrap();
    let b_side = PairLabel::new(Observable::B1, Observable::B2).unwrap();
    for _ in 0..200 {
        let sc = random_scenario(&mut r, Mode::Sequential);
        let base = grand_joint_quantum(&sc).unwrap();
        for _ in 0..5 {
            let other = random_scenario(&mut r, Mode::Sequential);
            let moved_b = Scenario {
                b: other.b,
                b_prime: other.b_prime,
                ..sc
            };
            let d = grand_joint_quantum(&moved_b).unwrap();
            assert!(d.marginal_pair(a_side).max_abs_diff(&base.marginal_pair(a_side)) <= TOL);
            let moved_a = Scenario {
                a: other.a,
                a_prime: other.a_prime,
                ..sc
            };
            let d = grand_joint_quantum(&moved_a).unwrap();
            assert!(d.marginal_pair(b_side).max_abs_diff(&base.marginal_pair(b_side)) <= TOL);
        }
    }
}

#[test]
fn first_outcomes_are_uniform() {
    let mut r = rng(5);
    for _ in 0..500 {
        let d = grand_joint_quantum(&random_scenario(&mut r, Mode::Sequential)).unwrap();
        for obs in Observable::ALL {
            assert!((d.prob_plus(obs) - 0.5).abs() <= TOL);
        }
    }
}

#[test]
fn particle_swap_symmetry() {
    let mut r = rng(6);
    for _ in 0..500 {
        let sc = random_scenario(&mut r, Mode::Sequential);
        let swapped = Scenario::new(Mode::Sequential, sc.b, sc.b_prime, sc.a, sc.a_prime);
        let d = grand_joint_quantum(&sc).unwrap();
        let e = grand_joint_quantum(&swapped).unwrap();
        for q in OutcomeQuadruple::all() {
            let mirrored = OutcomeQuadruple::new(q.b1, q.a1, q.b2, q.a2);
            assert!((d.prob(q) - e.prob(mirrored)).abs() <= TOL);
        }
    }
}

#[test]
fn sequential_and_eprb_agree_on_ab() {
    let mut r = rng(7);
    for _ in 0..200 {
        let sc = random_scenario(&mut r, Mode::Sequential);
        let seq = closed_form_correlators(&sc);
        let eprb = closed_form_correlators(&sc.with_mode(Mode::Eprb));
        assert!((seq.ab - eprb.ab).abs() <= TOL);
    }
}

proptest! {
    #[test]
    fn canonicalization_is_idempotent(x in -1e4f64..1e4) {
        let once = PlanarAngle::from_radians(x).unwrap();
        let twice = PlanarAngle::from_radians(once.radians()).unwrap();
        prop_assert_eq!(once, twice);
        prop_assert!((0.0..TAU).contains(&once.radians()));
    }

    #[test]
    fn difference_cosine_survives_canonicalization(k in -50.0f64..50.0, l in -50.0f64..50.0) {
        let (pk, pl) = (PlanarAngle::from_radians(k).unwrap(), PlanarAngle::from_radians(l).unwrap());
        prop_assert!((pk.cos_between(pl) - (k - l).cos()).abs() <= 1e-12);
    }

    #[test]
    fn transition_routes_agree(m in 0.0f64..TAU, n in 0.0f64..TAU) {
        let (pm, pn) = (PlanarAngle::from_radians(m).unwrap(), PlanarAngle::from_radians(n).unwrap());
        for (s, t) in sign_pairs() {
            let a = transition_prob(pm, s, pn, t);
            let b = transition_prob_from_states(pm, s, pn, t);
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn spin_states_are_orthonormal(m in 0.0f64..TAU) {
        let p = PlanarAngle::from_radians(m).unwrap();
        let up = make_spin_state(p, Sign::Plus);
        let down = make_spin_state(p, Sign::Minus);
        prop_assert!((up.norm_sqr() - 1.0).abs() <= 1e-12);
        prop_assert!((down.norm_sqr() - 1.0).abs() <= 1e-12);
        prop_assert!(up.inner(&down).norm() <= 1e-12);
    }
}
