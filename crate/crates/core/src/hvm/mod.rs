//! Finite hidden-variable models.
//!
//! A model assigns weights to a finite set of hidden states `lambda` and, for
//! each state, a response table per particle: particle 1 answers the pair
//! `(A1, A2)`, particle 2 the pair `(B1, B2)`. The joint response given
//! `lambda` is always the product of the two side tables, so every
//! [`HVModel`] is factorizable by construction. Weights may depend on the
//! preparation context, which is recorded in a [`ContextDescriptor`].
//!
//! A model describes one setting configuration. Optional [`ResponseProbe`]s
//! record the side tables the same model produces at other settings; they are
//! what [`check_factorizability`] uses to test that a particle's responses do
//! not depend on the far side's settings.

mod feasibility;
mod file;

use serde::{Deserialize, Serialize};

use crate::quantum::{
    pair_index, sign_pairs, GrandJointDistribution, Observable, OutcomeQuadruple, PairLabel,
    PlanarAngle, Scenario, Sign,
};
use crate::{Error, Result, ANALYTIC_TOL};

pub use feasibility::{
    chsh_local, noncontextual_feasibility, FeasibilityResult, InfeasibilityCertificate,
    PairTargets, FEASIBILITY_TOL,
};
pub use file::{load_model, save_model};

/// A measurement setting a model component may depend on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    A,
    APrime,
    B,
    BPrime,
}

/// Which settings each part of a model depends on.
///
/// `particle1` and `particle2` are the preparation contexts of the two
/// particles' responses; `weights` lists what the distribution over `lambda`
/// depends on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextDescriptor {
    pub weights: Vec<Setting>,
    pub particle1: Vec<Setting>,
    pub particle2: Vec<Setting>,
}

impl ContextDescriptor {
    /// No dependence on any setting.
    pub fn empty() -> Self {
        ContextDescriptor {
            weights: Vec::new(),
            particle1: Vec::new(),
            particle2: Vec::new(),
        }
    }
}

/// Conditional distribution of one particle's two outcomes `(t1, t2)`,
/// ordered `(++, +-, -+, --)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SideTable(pub [f64; 4]);

impl SideTable {
    /// Outcome `first` at `t1` with certainty, then `second` at `t2`.
    pub fn deterministic(first: Sign, second: Sign) -> Self {
        let mut t = [0.0; 4];
        t[pair_index(first, second)] = 1.0;
        SideTable(t)
    }

    pub fn uniform() -> Self {
        SideTable([0.25; 4])
    }

    pub fn prob(&self, first: Sign, second: Sign) -> f64 {
        self.0[pair_index(first, second)]
    }

    /// Conditional expectation of the `t1` outcome (`at_t2 = false`) or the
    /// `t2` outcome.
    pub fn expectation(&self, at_t2: bool) -> f64 {
        sign_pairs()
            .iter()
            .map(|&(s1, s2)| {
                let s = if at_t2 { s2 } else { s1 };
                s.value() * self.prob(s1, s2)
            })
            .sum()
    }

    /// Expectation of the product of the two outcomes.
    pub fn product_expectation(&self) -> f64 {
        sign_pairs()
            .iter()
            .map(|&(s1, s2)| (s1 * s2).value() * self.prob(s1, s2))
            .sum()
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.0.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidModel(format!("{what} has a negative or non-finite entry")));
        }
        let total: f64 = self.0.iter().sum();
        if (total - 1.0).abs() > ANALYTIC_TOL {
            return Err(Error::InvalidModel(format!("{what} sums to {total}")));
        }
        Ok(())
    }

    fn max_abs_diff(&self, other: &SideTable) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaAtom {
    pub id: String,
    pub weight: f64,
    pub side1: SideTable,
    pub side2: SideTable,
}

/// Side tables of every atom at an alternative setting configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseProbe {
    pub settings: Scenario,
    pub side1: Vec<SideTable>,
    pub side2: Vec<SideTable>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HVModel {
    settings: Scenario,
    context: ContextDescriptor,
    atoms: Vec<LambdaAtom>,
    probes: Vec<ResponseProbe>,
}

impl HVModel {
    pub fn new(
        settings: Scenario,
        context: ContextDescriptor,
        atoms: Vec<LambdaAtom>,
        probes: Vec<ResponseProbe>,
    ) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidModel("lambda space is empty".into()));
        }
        for atom in &atoms {
            if !atom.weight.is_finite() || atom.weight < 0.0 {
                return Err(Error::InvalidModel(format!(
                    "weight of `{}` is {}",
                    atom.id, atom.weight
                )));
            }
            atom.side1.validate(&format!("side1 of `{}`", atom.id))?;
            atom.side2.validate(&format!("side2 of `{}`", atom.id))?;
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > ANALYTIC_TOL {
            return Err(Error::InvalidModel(format!("weights sum to {total}")));
        }
        for (i, probe) in probes.iter().enumerate() {
            if probe.side1.len() != atoms.len() || probe.side2.len() != atoms.len() {
                return Err(Error::InvalidModel(format!(
                    "probe {i} has {}/{} side tables for {} atoms",
                    probe.side1.len(),
                    probe.side2.len(),
                    atoms.len()
                )));
            }
            for (j, (s1, s2)) in probe.side1.iter().zip(&probe.side2).enumerate() {
                s1.validate(&format!("probe {i} side1 of atom {j}"))?;
                s2.validate(&format!("probe {i} side2 of atom {j}"))?;
            }
        }
        Ok(HVModel {
            settings,
            context,
            atoms,
            probes,
        })
    }

    pub fn settings(&self) -> &Scenario {
        &self.settings
    }

    pub fn context(&self) -> &ContextDescriptor {
        &self.context
    }

    pub fn atoms(&self) -> &[LambdaAtom] {
        &self.atoms
    }

    pub fn probes(&self) -> &[ResponseProbe] {
        &self.probes
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.weight).collect()
    }
}

fn side1_response(sc: &Scenario, alpha: Sign) -> SideTable {
    let c = sc.cos_aa();
    SideTable(sign_pairs().map(|(a1, a2)| {
        if a1 == alpha {
            0.5 * (1.0 + (a1 * a2).value() * c)
        } else {
            0.0
        }
    }))
}

fn side2_response(sc: &Scenario, beta: Sign) -> SideTable {
    let c = sc.cos_bb();
    SideTable(sign_pairs().map(|(b1, b2)| {
        if b1 == beta {
            0.5 * (1.0 + (b1 * b2).value() * c)
        } else {
            0.0
        }
    }))
}

/// Setting shifts (radians) at which the contextual model records probes.
const PROBE_SHIFTS: [(f64, f64); 2] = [(0.37, 1.21), (2.03, -0.58)];

fn shifted(sc: &Scenario, particle: u8, (d1, d2): (f64, f64)) -> Result<Scenario> {
    let add = |x: PlanarAngle, d: f64| PlanarAngle::from_radians(x.radians() + d);
    Ok(match particle {
        1 => Scenario {
            a: add(sc.a, d1)?,
            a_prime: add(sc.a_prime, d2)?,
            ..*sc
        },
        _ => Scenario {
            b: add(sc.b, d1)?,
            b_prime: add(sc.b_prime, d2)?,
            ..*sc
        },
    })
}

/// Contextual factorizable model reproducing the sequential quantum statistics.
///
/// `lambda = (alpha, beta)` ranges over the four `t1` outcome pairs with
/// weight `(1 - alpha beta cos theta_ab) / 4`, so the weights depend on the
/// preparation settings `a` and `b`. Particle 1 answers `A1 = alpha` and then
/// `A2` with probability `(1 + A1 A2 cos theta_aa') / 2`; particle 2 answers
/// symmetrically with `beta` and `theta_bb'`. The construction is exact: the
/// induced joint distribution equals [`crate::quantum::grand_joint_quantum`].
pub fn build_contextual_model(sc: &Scenario) -> Result<HVModel> {
    sc.require_sequential()?;
    let pairs = sign_pairs();
    let c_ab = sc.cos_ab();
    let atoms = pairs
        .iter()
        .map(|&(alpha, beta)| LambdaAtom {
            id: format!("({alpha},{beta})"),
            weight: 0.25 * (1.0 - (alpha * beta).value() * c_ab),
            side1: side1_response(sc, alpha),
            side2: side2_response(sc, beta),
        })
        .collect();

    let mut probes = Vec::new();
    for particle in [1u8, 2] {
        for shift in PROBE_SHIFTS {
            let settings = shifted(sc, particle, shift)?;
            probes.push(ResponseProbe {
                settings,
                side1: pairs.iter().map(|&(alpha, _)| side1_response(&settings, alpha)).collect(),
                side2: pairs.iter().map(|&(_, beta)| side2_response(&settings, beta)).collect(),
            });
        }
    }

    let context = ContextDescriptor {
        weights: vec![Setting::A, Setting::B],
        particle1: vec![Setting::A, Setting::APrime],
        particle2: vec![Setting::B, Setting::BPrime],
    };
    HVModel::new(*sc, context, atoms, probes)
}

/// `P(A1,B1,A2,B2) = sum_lambda rho(lambda) side1(A1,A2|lambda) side2(B1,B2|lambda)`.
pub fn induced_distribution(m: &HVModel) -> Result<GrandJointDistribution> {
    let mut probs = [0.0; 16];
    for q in OutcomeQuadruple::all() {
        probs[q.index()] = m
            .atoms
            .iter()
            .map(|at| at.weight * at.side1.prob(q.a1, q.a2) * at.side2.prob(q.b1, q.b2))
            .sum();
    }
    GrandJointDistribution::new(probs)
}

/// Outcome of [`check_factorizability`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizabilityReport {
    pub passed: bool,
    pub tol: f64,
    /// Largest gap between the per-lambda joint conditional of `(A2, B2)` and
    /// the product of the two side conditionals.
    pub product_deviation: f64,
    /// Largest change of a particle's side table when only the far side's
    /// settings change.
    pub locality_deviation: f64,
    /// Number of side-table comparisons behind `locality_deviation`.
    pub locality_comparisons: usize,
}

fn same_angles(x: [PlanarAngle; 2], y: [PlanarAngle; 2]) -> bool {
    x[0].radians().to_bits() == y[0].radians().to_bits()
        && x[1].radians().to_bits() == y[1].radians().to_bits()
}

/// Check that responses factorize per `lambda` and that each particle's
/// responses are unchanged under changes of the other particle's settings.
pub fn check_factorizability(m: &HVModel, tol: f64) -> FactorizabilityReport {
    let pair = PairLabel::A2_B2;
    let mut product_deviation: f64 = 0.0;
    for atom in &m.atoms {
        // joint conditional of all four outcomes given lambda
        let joint: Vec<(OutcomeQuadruple, f64)> = OutcomeQuadruple::all()
            .map(|q| (q, atom.side1.prob(q.a1, q.a2) * atom.side2.prob(q.b1, q.b2)))
            .collect();
        // single-outcome conditionals straight from the side tables
        let single = |obs: Observable, s: Sign| -> f64 {
            let (table, at_t2) = match obs {
                Observable::A1 => (&atom.side1, false),
                Observable::A2 => (&atom.side1, true),
                Observable::B1 => (&atom.side2, false),
                Observable::B2 => (&atom.side2, true),
            };
            sign_pairs()
                .iter()
                .filter(|(s1, s2)| if at_t2 { *s2 == s } else { *s1 == s })
                .map(|&(s1, s2)| table.prob(s1, s2))
                .sum()
        };
        for (s1, s2) in sign_pairs() {
            let pair_prob: f64 = joint
                .iter()
                .filter(|(q, _)| q.get(pair.first()) == s1 && q.get(pair.second()) == s2)
                .map(|(_, p)| p)
                .sum();
            let product = single(pair.first(), s1) * single(pair.second(), s2);
            product_deviation = product_deviation.max((pair_prob - product).abs());
        }
    }

    struct Responses<'a> {
        settings: &'a Scenario,
        side1: Vec<&'a SideTable>,
        side2: Vec<&'a SideTable>,
    }
    let mut sets = vec![Responses {
        settings: &m.settings,
        side1: m.atoms.iter().map(|a| &a.side1).collect(),
        side2: m.atoms.iter().map(|a| &a.side2).collect(),
    }];
    sets.extend(m.probes.iter().map(|p| Responses {
        settings: &p.settings,
        side1: p.side1.iter().collect(),
        side2: p.side2.iter().collect(),
    }));

    let mut locality_deviation: f64 = 0.0;
    let mut locality_comparisons = 0;
    for (i, x) in sets.iter().enumerate() {
        for y in &sets[i + 1..] {
            let near_x = [x.settings.a, x.settings.a_prime];
            let near_y = [y.settings.a, y.settings.a_prime];
            let far_x = [x.settings.b, x.settings.b_prime];
            let far_y = [y.settings.b, y.settings.b_prime];
            let (same1, same2) = (same_angles(near_x, near_y), same_angles(far_x, far_y));
            if same1 && !same2 {
                for (t, u) in x.side1.iter().zip(&y.side1) {
                    locality_deviation = locality_deviation.max(t.max_abs_diff(u));
                    locality_comparisons += 1;
                }
            }
            if same2 && !same1 {
                for (t, u) in x.side2.iter().zip(&y.side2) {
                    locality_deviation = locality_deviation.max(t.max_abs_diff(u));
                    locality_comparisons += 1;
                }
            }
        }
    }

    FactorizabilityReport {
        passed: product_deviation <= tol && locality_deviation <= tol,
        tol,
        product_deviation,
        locality_deviation,
        locality_comparisons,
    }
}

/// Correlator of a pair of observables under the model.
///
/// For observables on different particles the per-lambda value is the
/// product of the two side expectations; for two outcomes of the same
/// particle it is the side table's product expectation.
pub fn hv_correlator(m: &HVModel, pair: PairLabel) -> f64 {
    let (x, y) = (pair.first(), pair.second());
    m.atoms
        .iter()
        .map(|atom| {
            let side = |obs: Observable| match obs.particle() {
                1 => &atom.side1,
                _ => &atom.side2,
            };
            let at_t2 = |obs: Observable| matches!(obs, Observable::A2 | Observable::B2);
            let e = if x.particle() == y.particle() {
                side(x).product_expectation()
            } else {
                side(x).expectation(at_t2(x)) * side(y).expectation(at_t2(y))
            };
            atom.weight * e
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{grand_joint_quantum, Mode};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn seq(ab: f64, aa: f64, bb: f64) -> Scenario {
        Scenario::from_differences(Mode::Sequential, ab, aa, bb).unwrap()
    }

    fn single_atom(side1: SideTable, side2: SideTable) -> HVModel {
        let atoms = vec![LambdaAtom {
            id: "only".into(),
            weight: 1.0,
            side1,
            side2,
        }];
        HVModel::new(seq(0.0, 0.0, 0.0), ContextDescriptor::empty(), atoms, vec![]).unwrap()
    }

    #[test]
    fn contextual_weights_follow_preparation() {
        let m = build_contextual_model(&seq(0.0, 0.4, 1.0)).unwrap();
        let w = m.weights();
        assert_eq!(w, vec![0.0, 0.5, 0.5, 0.0]);
        let m = build_contextual_model(&seq(FRAC_PI_2, 0.4, 1.0)).unwrap();
        for w in m.weights() {
            assert_abs_diff_eq!(w, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn contextual_model_rejects_eprb() {
        let sc = seq(0.1, 0.2, 0.3).with_mode(Mode::Eprb);
        assert!(matches!(
            build_contextual_model(&sc),
            Err(Error::ModeMismatch { .. })
        ));
    }

    #[test]
    fn reconstruction_with_unit_transitions() {
        let sc = seq(FRAC_PI_3, 0.0, 0.0);
        let d = induced_distribution(&build_contextual_model(&sc).unwrap()).unwrap();
        let exact = grand_joint_quantum(&sc).unwrap();
        assert!(d.max_abs_diff(&exact) <= 1e-12);
        // unit transitions: A2 = A1 and B2 = B1 surely
        for (q, p) in d.iter() {
            if q.a1 != q.a2 || q.b1 != q.b2 {
                assert_eq!(p, 0.0);
            }
        }
    }

    #[test]
    fn deterministic_models() {
        let m = single_atom(
            SideTable::deterministic(Sign::Plus, Sign::Minus),
            SideTable::deterministic(Sign::Minus, Sign::Minus),
        );
        let d = induced_distribution(&m).unwrap();
        let q = OutcomeQuadruple::new(Sign::Plus, Sign::Minus, Sign::Minus, Sign::Minus);
        assert_eq!(d.prob(q), 1.0);
        assert_eq!(hv_correlator(&m, PairLabel::A1_B1), -1.0);

        let atoms = vec![
            LambdaAtom {
                id: "x".into(),
                weight: 0.5,
                side1: SideTable::deterministic(Sign::Plus, Sign::Plus),
                side2: SideTable::deterministic(Sign::Plus, Sign::Plus),
            },
            LambdaAtom {
                id: "y".into(),
                weight: 0.5,
                side1: SideTable::deterministic(Sign::Minus, Sign::Minus),
                side2: SideTable::deterministic(Sign::Minus, Sign::Minus),
            },
        ];
        let m = HVModel::new(seq(0.0, 0.0, 0.0), ContextDescriptor::empty(), atoms, vec![]).unwrap();
        let d = induced_distribution(&m).unwrap();
        assert_eq!(d.probs()[0], 0.5);
        assert_eq!(d.probs()[15], 0.5);
    }

    #[test]
    fn uniform_response_has_zero_correlator() {
        let m = single_atom(SideTable::uniform(), SideTable::uniform());
        for pair in [PairLabel::A1_B1, PairLabel::A2_B2, PairLabel::A1_B2] {
            assert_eq!(hv_correlator(&m, pair), 0.0);
        }
    }

    #[test]
    fn contextual_correlator_matches_closed_form() {
        let sc = seq(0.7, 1.3, 2.1);
        let m = build_contextual_model(&sc).unwrap();
        assert_abs_diff_eq!(
            hv_correlator(&m, PairLabel::A1_B2),
            -sc.cos_ab() * sc.cos_bb(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn factorizability_of_constructed_model() {
        let m = build_contextual_model(&seq(0.7, 1.3, 2.1)).unwrap();
        let r = check_factorizability(&m, 1e-12);
        assert!(r.passed);
        assert_eq!(r.product_deviation, 0.0);
        assert_eq!(r.locality_deviation, 0.0);
        assert_eq!(r.locality_comparisons, 24);
    }

    #[test]
    fn far_side_dependence_is_detected() {
        let sc = seq(0.7, 1.3, 2.1);
        let m = build_contextual_model(&sc).unwrap();
        let mut probes = m.probes().to_vec();
        // probe 2 moves only b, b'; make particle 1 react to it
        let b = probes[2].settings.b;
        for (j, t) in probes[2].side1.iter_mut().enumerate() {
            let alpha = sign_pairs()[j].0;
            let c = b.cos_between(PlanarAngle::ZERO);
            *t = SideTable(sign_pairs().map(|(a1, a2)| {
                if a1 == alpha {
                    0.5 * (1.0 + (a1 * a2).value() * c)
                } else {
                    0.0
                }
            }));
        }
        let tampered = HVModel::new(*m.settings(), m.context().clone(), m.atoms().to_vec(), probes).unwrap();
        let r = check_factorizability(&tampered, 1e-12);
        assert!(!r.passed);
        assert!(r.locality_deviation > 1e-3);
    }

    #[test]
    fn invalid_models_are_rejected() {
        let atom = |w: f64| LambdaAtom {
            id: "x".into(),
            weight: w,
            side1: SideTable::uniform(),
            side2: SideTable::uniform(),
        };
        let sc = seq(0.0, 0.0, 0.0);
        assert!(HVModel::new(sc, ContextDescriptor::empty(), vec![], vec![]).is_err());
        assert!(HVModel::new(sc, ContextDescriptor::empty(), vec![atom(0.9)], vec![]).is_err());
        assert!(HVModel::new(sc, ContextDescriptor::empty(), vec![atom(1.5), atom(-0.5)], vec![]).is_err());
        let mut bad = atom(1.0);
        bad.side2 = SideTable([0.5, 0.5, 0.5, 0.0]);
        assert!(HVModel::new(sc, ContextDescriptor::empty(), vec![bad], vec![]).is_err());
        let probe = ResponseProbe {
            settings: sc,
            side1: vec![],
            side2: vec![],
        };
        assert!(HVModel::new(sc, ContextDescriptor::empty(), vec![atom(1.0)], vec![probe]).is_err());
    }
}
