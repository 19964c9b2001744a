//! Existence of a non-contextual joint distribution for four pair targets.
//!
//! The question is whether one distribution over `(A1, B1, A2, B2)` has the
//! four cross-particle pair marginals `(A1,B1)`, `(A1,B2)`, `(A2,B1)`,
//! `(A2,B2)` as its marginals. It is a linear feasibility problem over the 16
//! atoms, solved with the phase-1 simplex.
//!
//! When the problem is infeasible the certificate is the largest of the eight
//! CHSH sign variants. For two settings and two outcomes per side with
//! consistent single marginals, the local polytope's nontrivial facets are
//! exactly these eight inequalities (Fine's theorem), so an infeasible target
//! set always violates one of them.

use serde::{Deserialize, Serialize};

use crate::inequality::{max_chsh_variant, ChshVariant};
use crate::quantum::{
    closed_form_correlators, grand_joint_quantum, sign_pairs, CorrelatorSet,
    GrandJointDistribution, Mode, OutcomeQuadruple, PairDistribution, PairLabel, Scenario,
};
use crate::simplex::{phase_one, Phase1};
use crate::{Error, Result};

/// Tolerance on the phase-1 objective and on target reproduction.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Target distributions for the four setting pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairTargets {
    ab: PairDistribution,
    ab_prime: PairDistribution,
    a_prime_b: PairDistribution,
    a_prime_b_prime: PairDistribution,
}

impl PairTargets {
    /// Validates labels and that observables shared between two pairs have the
    /// same single marginal (within `1e-9`).
    pub fn new(
        ab: PairDistribution,
        ab_prime: PairDistribution,
        a_prime_b: PairDistribution,
        a_prime_b_prime: PairDistribution,
    ) -> Result<Self> {
        let t = PairTargets {
            ab,
            ab_prime,
            a_prime_b,
            a_prime_b_prime,
        };
        for (d, want) in t.all().iter().zip(Self::labels()) {
            if d.label() != want {
                return Err(Error::InconsistentTargets(format!(
                    "expected pair {want}, got {}",
                    d.label()
                )));
            }
        }
        let shared = [
            ("A1", ab.first_plus(), ab_prime.first_plus()),
            ("A2", a_prime_b.first_plus(), a_prime_b_prime.first_plus()),
            ("B1", ab.second_plus(), a_prime_b.second_plus()),
            ("B2", ab_prime.second_plus(), a_prime_b_prime.second_plus()),
        ];
        for (obs, x, y) in shared {
            if (x - y).abs() > FEASIBILITY_TOL {
                return Err(Error::InconsistentTargets(format!(
                    "P({obs} = +1) is {x} in one pair and {y} in another"
                )));
            }
        }
        Ok(t)
    }

    pub fn labels() -> [PairLabel; 4] {
        [
            PairLabel::A1_B1,
            PairLabel::A1_B2,
            PairLabel::A2_B1,
            PairLabel::A2_B2,
        ]
    }

    /// Targets with uniform single marginals and the given correlators.
    pub fn from_correlators(c: &CorrelatorSet) -> Result<Self> {
        let [l0, l1, l2, l3] = Self::labels();
        Self::new(
            PairDistribution::from_correlator(l0, c.ab)?,
            PairDistribution::from_correlator(l1, c.ab_prime)?,
            PairDistribution::from_correlator(l2, c.a_prime_b)?,
            PairDistribution::from_correlator(l3, c.a_prime_b_prime)?,
        )
    }

    /// Quantum targets: exact marginals in sequential mode, `-cos` correlators
    /// with uniform marginals in EPRB mode.
    pub fn from_scenario(sc: &Scenario) -> Result<Self> {
        match sc.mode {
            Mode::Sequential => {
                let d = grand_joint_quantum(sc)?;
                let [l0, l1, l2, l3] = Self::labels();
                Self::new(
                    d.marginal_pair(l0),
                    d.marginal_pair(l1),
                    d.marginal_pair(l2),
                    d.marginal_pair(l3),
                )
            }
            Mode::Eprb => Self::from_correlators(&closed_form_correlators(sc)),
        }
    }

    pub fn all(&self) -> [PairDistribution; 4] {
        [self.ab, self.ab_prime, self.a_prime_b, self.a_prime_b_prime]
    }

    pub fn correlators(&self) -> CorrelatorSet {
        let [ab, ab_prime, a_prime_b, a_prime_b_prime] =
            self.all().map(|d| crate::quantum::correlator_pair(&d));
        CorrelatorSet {
            ab,
            ab_prime,
            a_prime_b,
            a_prime_b_prime,
        }
    }

    /// Largest entrywise gap between the targets and the marginals of `d`.
    pub fn max_deviation(&self, d: &GrandJointDistribution) -> f64 {
        self.all()
            .iter()
            .map(|t| t.max_abs_diff(&d.marginal_pair(t.label())))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityCertificate {
    pub variant: ChshVariant,
    pub expression: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FeasibilityResult {
    Feasible {
        joint: GrandJointDistribution,
        max_deviation: f64,
    },
    Infeasible {
        certificate: InfeasibilityCertificate,
        residual: f64,
    },
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityResult::Feasible { .. })
    }
}

/// Decide whether a joint distribution over the 16 outcome quadruples
/// reproduces all four pair targets.
pub fn noncontextual_feasibility(t: &PairTargets) -> Result<FeasibilityResult> {
    let atoms: Vec<OutcomeQuadruple> = OutcomeQuadruple::all().collect();
    let mut rows = Vec::with_capacity(17);
    let mut rhs = Vec::with_capacity(17);
    for target in t.all() {
        let label = target.label();
        for (s1, s2) in sign_pairs() {
            rows.push(
                atoms
                    .iter()
                    .map(|q| {
                        if q.get(label.first()) == s1 && q.get(label.second()) == s2 {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect::<Vec<f64>>(),
            );
            rhs.push(target.prob(s1, s2));
        }
    }
    rows.push(vec![1.0; 16]);
    rhs.push(1.0);

    match phase_one(&rows, &rhs, FEASIBILITY_TOL) {
        Phase1::Feasible(x) => {
            let total: f64 = x.iter().sum();
            let mut probs = [0.0; 16];
            for (p, v) in probs.iter_mut().zip(&x) {
                *p = v / total;
            }
            let joint = GrandJointDistribution::new(probs)?;
            let max_deviation = t.max_deviation(&joint);
            if max_deviation > FEASIBILITY_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "feasible point misses the targets by {max_deviation}"
                )));
            }
            Ok(FeasibilityResult::Feasible {
                joint,
                max_deviation,
            })
        }
        Phase1::Infeasible { residual } => {
            let (variant, value) = max_chsh_variant(&t.correlators());
            Ok(FeasibilityResult::Infeasible {
                certificate: InfeasibilityCertificate {
                    expression: variant.describe(),
                    variant,
                    value,
                },
                residual,
            })
        }
    }
}

/// Whether every CHSH sign variant is at most `2 + slack`.
pub fn chsh_local(c: &CorrelatorSet, slack: f64) -> bool {
    ChshVariant::all().all(|v| v.evaluate(c) <= 2.0 + slack)
}
