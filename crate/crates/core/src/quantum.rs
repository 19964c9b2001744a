//! Exact quantum statistics of the sequential two-particle spin experiment.
//!
//! All measurement directions are coplanar and parameterized by a single
//! polar angle. A spin state along angle `m` has real amplitudes
//! `(cos m/2, sin m/2)` for outcome `+1` and `(-sin m/2, cos m/2)` for `-1`
//! in the `{|z+>, |z->}` basis.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::ops::{Mul, Neg};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, ANALYTIC_TOL};

/// A measurement direction in the plane, stored in radians in `[0, 2pi)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PlanarAngle(f64);

impl PlanarAngle {
    pub const ZERO: PlanarAngle = PlanarAngle(0.0);

    pub fn from_radians(rad: f64) -> Result<Self> {
        if !rad.is_finite() {
            return Err(Error::NonFiniteAngle(rad));
        }
        let mut r = rad.rem_euclid(TAU);
        // rem_euclid rounds up to TAU for tiny negative inputs
        if r >= TAU {
            r = 0.0;
        }
        Ok(PlanarAngle(r))
    }

    pub fn from_degrees(deg: f64) -> Result<Self> {
        if !deg.is_finite() {
            return Err(Error::NonFiniteAngle(deg));
        }
        Self::from_radians(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// Signed difference `self - other` in radians (not canonicalized).
    pub fn minus(self, other: PlanarAngle) -> f64 {
        self.0 - other.0
    }

    /// `cos` of the angle between the two directions.
    pub fn cos_between(self, other: PlanarAngle) -> f64 {
        (self.0 - other.0).cos()
    }
}

impl TryFrom<f64> for PlanarAngle {
    type Error = Error;

    fn try_from(rad: f64) -> Result<Self> {
        Self::from_radians(rad)
    }
}

impl From<PlanarAngle> for f64 {
    fn from(a: PlanarAngle) -> f64 {
        a.0
    }
}

/// A single measurement outcome, `+1` or `-1` in units of hbar/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Sign {
    /// Canonical order: `+1` before `-1`.
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    fn bit(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    fn from_bit(bit: usize) -> Sign {
        if bit & 1 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// Spin-1/2 state in the `{|z+>, |z->}` basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    amps: [Complex64; 2],
}

impl QubitState {
    pub fn new(up: Complex64, down: Complex64) -> Result<Self> {
        let s = QubitState { amps: [up, down] };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > ANALYTIC_TOL {
            return Err(Error::InvalidDistribution(format!(
                "qubit state has squared norm {norm}"
            )));
        }
        Ok(s)
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QubitState) -> Complex64 {
        self.amps[0].conj() * other.amps[0] + self.amps[1].conj() * other.amps[1]
    }

    pub fn tensor(&self, other: &QubitState) -> TwoQubitState {
        let [u0, u1] = self.amps;
        let [v0, v1] = other.amps;
        TwoQubitState {
            amps: [u0 * v0, u0 * v1, u1 * v0, u1 * v1],
        }
    }
}

/// Two-particle state in the product basis, ordered `(++, +-, -+, --)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitState {
    amps: [Complex64; 4],
}

impl TwoQubitState {
    pub fn new(amps: [Complex64; 4]) -> Result<Self> {
        let s = TwoQubitState { amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > ANALYTIC_TOL {
            return Err(Error::InvalidDistribution(format!(
                "two-qubit state has squared norm {norm}"
            )));
        }
        Ok(s)
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &TwoQubitState) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Spin state of one particle along direction `m` with outcome `s`.
pub fn make_spin_state(m: PlanarAngle, s: Sign) -> QubitState {
    let (sin, cos) = (m.radians() / 2.0).sin_cos();
    let amps = match s {
        Sign::Plus => [Complex64::new(cos, 0.0), Complex64::new(sin, 0.0)],
        Sign::Minus => [Complex64::new(-sin, 0.0), Complex64::new(cos, 0.0)],
    };
    QubitState { amps }
}

/// Normalized singlet `(|z+>|z-> - |z->|z+>) / sqrt 2`.
pub fn make_singlet() -> TwoQubitState {
    TwoQubitState {
        amps: [
            Complex64::new(0.0, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(-FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    }
}

/// Probability that a particle prepared with outcome `s_from` along `m_from`
/// yields `s_to` along `m_to`: `(1 + s_from s_to cos(m_from - m_to)) / 2`.
pub fn transition_prob(m_from: PlanarAngle, s_from: Sign, m_to: PlanarAngle, s_to: Sign) -> f64 {
    0.5 * (1.0 + (s_from * s_to).value() * m_from.cos_between(m_to))
}

/// Same quantity as [`transition_prob`], computed as a squared overlap of states.
pub fn transition_prob_from_states(
    m_from: PlanarAngle,
    s_from: Sign,
    m_to: PlanarAngle,
    s_to: Sign,
) -> f64 {
    make_spin_state(m_from, s_from)
        .inner(&make_spin_state(m_to, s_to))
        .norm_sqr()
}

/// Whether the two time steps are separate (`Sequential`) or have merged
/// into a single-measurement-per-particle EPRB experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sequential,
    Eprb,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sequential => "sequential",
            Mode::Eprb => "eprb",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sequential" => Ok(Mode::Sequential),
            "eprb" => Ok(Mode::Eprb),
            _ => Err(Error::InvalidAngles(format!("unknown mode `{s}`"))),
        }
    }
}

/// The four measurement directions and the experiment variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub a: PlanarAngle,
    pub a_prime: PlanarAngle,
    pub b: PlanarAngle,
    pub b_prime: PlanarAngle,
    pub mode: Mode,
}

impl Scenario {
    pub fn new(
        mode: Mode,
        a: PlanarAngle,
        a_prime: PlanarAngle,
        b: PlanarAngle,
        b_prime: PlanarAngle,
    ) -> Self {
        Scenario {
            a,
            a_prime,
            b,
            b_prime,
            mode,
        }
    }

    /// Scenario from radians in the order `(a, a', b, b')`.
    pub fn from_radians(mode: Mode, a: f64, a_prime: f64, b: f64, b_prime: f64) -> Result<Self> {
        Ok(Self::new(
            mode,
            PlanarAngle::from_radians(a)?,
            PlanarAngle::from_radians(a_prime)?,
            PlanarAngle::from_radians(b)?,
            PlanarAngle::from_radians(b_prime)?,
        ))
    }

    pub fn from_degrees(mode: Mode, a: f64, a_prime: f64, b: f64, b_prime: f64) -> Result<Self> {
        Ok(Self::new(
            mode,
            PlanarAngle::from_degrees(a)?,
            PlanarAngle::from_degrees(a_prime)?,
            PlanarAngle::from_degrees(b)?,
            PlanarAngle::from_degrees(b_prime)?,
        ))
    }

    /// Scenario with `a = 0` realizing the given difference angles
    /// `theta_ab = b - a`, `theta_aa' = a' - a`, `theta_bb' = b' - b`.
    pub fn from_differences(mode: Mode, theta_ab: f64, theta_aa: f64, theta_bb: f64) -> Result<Self> {
        Self::from_radians(mode, 0.0, theta_aa, theta_ab, theta_ab + theta_bb)
    }

    pub fn with_mode(self, mode: Mode) -> Self {
        Scenario { mode, ..self }
    }

    pub fn angles(&self) -> [PlanarAngle; 4] {
        [self.a, self.a_prime, self.b, self.b_prime]
    }

    pub fn cos_ab(&self) -> f64 {
        self.b.cos_between(self.a)
    }

    pub fn cos_aa(&self) -> f64 {
        self.a_prime.cos_between(self.a)
    }

    pub fn cos_bb(&self) -> f64 {
        self.b_prime.cos_between(self.b)
    }

    fn require(&self, mode: Mode) -> Result<()> {
        if self.mode == mode {
            Ok(())
        } else {
            Err(Error::ModeMismatch {
                expected: mode,
                found: self.mode,
            })
        }
    }

    pub(crate) fn require_sequential(&self) -> Result<()> {
        self.require(Mode::Sequential)
    }
}

/// One of the four measured spin components.
///
/// `A1`, `B1` are taken at `t1` along `a` and `b`; `A2`, `B2` at `t2` along
/// `a'` and `b'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observable {
    A1,
    B1,
    A2,
    B2,
}

impl Observable {
    pub const ALL: [Observable; 4] = [Observable::A1, Observable::B1, Observable::A2, Observable::B2];

    /// Position within an [`OutcomeQuadruple`] `(A1, B1, A2, B2)`.
    pub fn slot(self) -> usize {
        match self {
            Observable::A1 => 0,
            Observable::B1 => 1,
            Observable::A2 => 2,
            Observable::B2 => 3,
        }
    }

    /// Particle number, 1 or 2.
    pub fn particle(self) -> u8 {
        match self {
            Observable::A1 | Observable::A2 => 1,
            Observable::B1 | Observable::B2 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Observable::A1 => "A1",
            Observable::B1 => "B1",
            Observable::A2 => "A2",
            Observable::B2 => "B2",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A1" => Ok(Observable::A1),
            "B1" => Ok(Observable::B1),
            "A2" => Ok(Observable::A2),
            "B2" => Ok(Observable::B2),
            _ => Err(Error::UnknownObservable(s.to_string())),
        }
    }
}

/// Outcomes `(A1, B1, A2, B2)` of all four measurements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OutcomeQuadruple {
    pub a1: Sign,
    pub b1: Sign,
    pub a2: Sign,
    pub b2: Sign,
}

impl OutcomeQuadruple {
    pub fn new(a1: Sign, b1: Sign, a2: Sign, b2: Sign) -> Self {
        OutcomeQuadruple { a1, b1, a2, b2 }
    }

    /// Index in canonical order: lexicographic over `(A1, B1, A2, B2)` with
    /// `+1` before `-1`.
    pub fn index(&self) -> usize {
        (self.a1.bit() << 3) | (self.b1.bit() << 2) | (self.a2.bit() << 1) | self.b2.bit()
    }

    pub fn from_index(i: usize) -> Self {
        assert!(i < 16, "quadruple index {i} out of range");
        OutcomeQuadruple {
            a1: Sign::from_bit(i >> 3),
            b1: Sign::from_bit(i >> 2),
            a2: Sign::from_bit(i >> 1),
            b2: Sign::from_bit(i),
        }
    }

    /// All 16 quadruples in canonical order.
    pub fn all() -> impl Iterator<Item = OutcomeQuadruple> {
        (0..16).map(Self::from_index)
    }

    pub fn get(&self, obs: Observable) -> Sign {
        match obs {
            Observable::A1 => self.a1,
            Observable::B1 => self.b1,
            Observable::A2 => self.a2,
            Observable::B2 => self.b2,
        }
    }

    /// Compact label such as `+-+-`.
    pub fn label(&self) -> String {
        [self.a1, self.b1, self.a2, self.b2]
            .iter()
            .map(|s| if *s == Sign::Plus { '+' } else { '-' })
            .collect()
    }
}

/// Two distinct observables whose joint statistics are of interest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PairLabel {
    first: Observable,
    second: Observable,
}

impl PairLabel {
    pub const A1_B1: PairLabel = PairLabel {
        first: Observable::A1,
        second: Observable::B1,
    };
    pub const A1_B2: PairLabel = PairLabel {
        first: Observable::A1,
        second: Observable::B2,
    };
    pub const A2_B1: PairLabel = PairLabel {
        first: Observable::A2,
        second: Observable::B1,
    };
    pub const A2_B2: PairLabel = PairLabel {
        first: Observable::A2,
        second: Observable::B2,
    };

    pub fn new(first: Observable, second: Observable) -> Result<Self> {
        if first == second {
            return Err(Error::UnknownPair(format!("{first},{second}")));
        }
        Ok(PairLabel { first, second })
    }

    pub fn first(&self) -> Observable {
        self.first
    }

    pub fn second(&self) -> Observable {
        self.second
    }
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.first, self.second)
    }
}

impl FromStr for PairLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s
            .trim_matches(|c| c == '(' || c == ')')
            .split([',', ':', '-'])
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .collect();
        let [x, y] = parts.as_slice() else {
            return Err(Error::UnknownPair(s.to_string()));
        };
        let first: Observable = x.parse().map_err(|_| Error::UnknownPair(s.to_string()))?;
        let second: Observable = y.parse().map_err(|_| Error::UnknownPair(s.to_string()))?;
        PairLabel::new(first, second).map_err(|_| Error::UnknownPair(s.to_string()))
    }
}

impl TryFrom<String> for PairLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PairLabel> for String {
    fn from(p: PairLabel) -> String {
        p.to_string()
    }
}

fn check_probabilities(probs: &[f64]) -> Result<()> {
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > ANALYTIC_TOL {
        return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
    }
    Ok(())
}

/// Joint probabilities of the four observables, in canonical quadruple order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct GrandJointDistribution {
    probs: [f64; 16],
}

impl GrandJointDistribution {
    pub fn new(probs: [f64; 16]) -> Result<Self> {
        check_probabilities(&probs)?;
        Ok(GrandJointDistribution { probs })
    }

    pub fn point_mass(q: OutcomeQuadruple) -> Self {
        let mut probs = [0.0; 16];
        probs[q.index()] = 1.0;
        GrandJointDistribution { probs }
    }

    pub fn uniform() -> Self {
        GrandJointDistribution { probs: [1.0 / 16.0; 16] }
    }

    pub fn probs(&self) -> &[f64; 16] {
        &self.probs
    }

    pub fn prob(&self, q: OutcomeQuadruple) -> f64 {
        self.probs[q.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (OutcomeQuadruple, f64)> + '_ {
        OutcomeQuadruple::all().zip(self.probs.iter().copied())
    }

    /// Plain marginal over the two unselected observables.
    pub fn marginal_pair(&self, which: PairLabel) -> PairDistribution {
        let mut probs = [0.0; 4];
        for (q, p) in self.iter() {
            probs[pair_index(q.get(which.first), q.get(which.second))] += p;
        }
        PairDistribution { label: which, probs }
    }

    /// `P(obs = +1)`.
    pub fn prob_plus(&self, obs: Observable) -> f64 {
        self.iter()
            .filter(|(q, _)| q.get(obs) == Sign::Plus)
            .map(|(_, p)| p)
            .sum()
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &GrandJointDistribution) -> f64 {
        self.probs
            .iter()
            .zip(other.probs.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// Expectation of the product of the two observables.
    pub fn correlator(&self, which: PairLabel) -> f64 {
        correlator_pair(&self.marginal_pair(which))
    }

    /// The four correlators entering the CHSH functional.
    pub fn correlators(&self) -> CorrelatorSet {
        CorrelatorSet {
            ab: self.correlator(PairLabel::A1_B1),
            ab_prime: self.correlator(PairLabel::A1_B2),
            a_prime_b: self.correlator(PairLabel::A2_B1),
            a_prime_b_prime: self.correlator(PairLabel::A2_B2),
        }
    }
}

impl TryFrom<Vec<f64>> for GrandJointDistribution {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        let probs: [f64; 16] = v
            .try_into()
            .map_err(|v: Vec<f64>| Error::InvalidDistribution(format!("expected 16 entries, got {}", v.len())))?;
        Self::new(probs)
    }
}

impl From<GrandJointDistribution> for Vec<f64> {
    fn from(d: GrandJointDistribution) -> Vec<f64> {
        d.probs.to_vec()
    }
}

/// Index of `(s1, s2)` in the order `(++, +-, -+, --)`.
pub fn pair_index(s1: Sign, s2: Sign) -> usize {
    (s1.bit() << 1) | s2.bit()
}

/// The four sign pairs in the order used by [`PairDistribution`].
pub fn sign_pairs() -> [(Sign, Sign); 4] {
    [
        (Sign::Plus, Sign::Plus),
        (Sign::Plus, Sign::Minus),
        (Sign::Minus, Sign::Plus),
        (Sign::Minus, Sign::Minus),
    ]
}

/// Joint distribution of two observables, ordered `(++, +-, -+, --)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDistribution {
    label: PairLabel,
    probs: [f64; 4],
}

impl PairDistribution {
    pub fn new(label: PairLabel, probs: [f64; 4]) -> Result<Self> {
        check_probabilities(&probs)?;
        Ok(PairDistribution { label, probs })
    }

    /// Distribution with uniform single-observable marginals and correlator `e`:
    /// `P(s1, s2) = (1 + s1 s2 e) / 4`.
    pub fn from_correlator(label: PairLabel, e: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&e) {
            return Err(Error::CorrelatorOutOfRange {
                name: "pair",
                value: e,
            });
        }
        let probs = sign_pairs().map(|(s1, s2)| 0.25 * (1.0 + (s1 * s2).value() * e));
        Ok(PairDistribution { label, probs })
    }

    pub fn label(&self) -> PairLabel {
        self.label
    }

    pub fn probs(&self) -> &[f64; 4] {
        &self.probs
    }

    pub fn prob(&self, s1: Sign, s2: Sign) -> f64 {
        self.probs[pair_index(s1, s2)]
    }

    /// `P(first = +1)`.
    pub fn first_plus(&self) -> f64 {
        self.probs[0] + self.probs[1]
    }

    /// `P(second = +1)`.
    pub fn second_plus(&self) -> f64 {
        self.probs[0] + self.probs[2]
    }

    pub fn max_abs_diff(&self, other: &PairDistribution) -> f64 {
        self.probs
            .iter()
            .zip(other.probs.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Expectation value `sum s1 s2 P(s1, s2)`.
pub fn correlator_pair(p: &PairDistribution) -> f64 {
    sign_pairs()
        .iter()
        .map(|&(s1, s2)| (s1 * s2).value() * p.prob(s1, s2))
        .sum()
}

/// The four correlators entering the CHSH functional:
/// `<A1 B1>`, `<A1 B2>`, `<A2 B1>`, `<A2 B2>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSet {
    pub ab: f64,
    pub ab_prime: f64,
    pub a_prime_b: f64,
    pub a_prime_b_prime: f64,
}

impl CorrelatorSet {
    pub fn new(ab: f64, ab_prime: f64, a_prime_b: f64, a_prime_b_prime: f64) -> Result<Self> {
        let c = CorrelatorSet {
            ab,
            ab_prime,
            a_prime_b,
            a_prime_b_prime,
        };
        for (name, value) in c.named() {
            if !value.is_finite() || value.abs() > 1.0 + ANALYTIC_TOL {
                return Err(Error::CorrelatorOutOfRange { name, value });
            }
        }
        Ok(c)
    }

    pub fn named(&self) -> [(&'static str, f64); 4] {
        [
            ("ab", self.ab),
            ("ab'", self.ab_prime),
            ("a'b", self.a_prime_b),
            ("a'b'", self.a_prime_b_prime),
        ]
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.ab, self.ab_prime, self.a_prime_b, self.a_prime_b_prime]
    }

    pub fn max_abs_diff(&self, other: &CorrelatorSet) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array().iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Exact joint distribution of the sequential experiment:
///
/// `P(A1,B1,A2,B2) = |<psi0|u_a(A1) u_b(B1)>|^2 |<u_a(A1)|u_a'(A2)>|^2 |<u_b(B1)|u_b'(B2)>|^2`
///
/// evaluated on the state vectors.
pub fn grand_joint_quantum(sc: &Scenario) -> Result<GrandJointDistribution> {
    sc.require_sequential()?;
    let singlet = make_singlet();
    let mut probs = [0.0; 16];
    for q in OutcomeQuadruple::all() {
        let u_a = make_spin_state(sc.a, q.a1);
        let u_b = make_spin_state(sc.b, q.b1);
        let source = singlet.inner(&u_a.tensor(&u_b)).norm_sqr();
        let first = u_a.inner(&make_spin_state(sc.a_prime, q.a2)).norm_sqr();
        let second = u_b.inner(&make_spin_state(sc.b_prime, q.b2)).norm_sqr();
        probs[q.index()] = source * first * second;
    }
    GrandJointDistribution::new(probs)
}

/// Marginal of `d` over the two observables named by `which`.
pub fn marginal_pair(d: &GrandJointDistribution, which: PairLabel) -> PairDistribution {
    d.marginal_pair(which)
}

/// Closed-form `P(A1, B2) = (1 - A1 B2 cos theta_ab cos theta_bb') / 4`.
pub fn a1_b2_marginal_closed(sc: &Scenario) -> [f64; 4] {
    let c = sc.cos_ab() * sc.cos_bb();
    sign_pairs().map(|(a1, b2)| 0.25 * (1.0 - (a1 * b2).value() * c))
}

/// Closed-form correlators.
///
/// Sequential: `-cos ab`, `-cos ab cos bb'`, `-cos ab cos aa'`,
/// `-cos ab cos aa' cos bb'`. EPRB: `-cos` of the angle between each pair.
pub fn closed_form_correlators(sc: &Scenario) -> CorrelatorSet {
    match sc.mode {
        Mode::Sequential => {
            let (ab, aa, bb) = (sc.cos_ab(), sc.cos_aa(), sc.cos_bb());
            CorrelatorSet {
                ab: -ab,
                ab_prime: -ab * bb,
                a_prime_b: -ab * aa,
                a_prime_b_prime: -ab * aa * bb,
            }
        }
        Mode::Eprb => CorrelatorSet {
            ab: -sc.a.cos_between(sc.b),
            ab_prime: -sc.a.cos_between(sc.b_prime),
            a_prime_b: -sc.a_prime.cos_between(sc.b),
            a_prime_b_prime: -sc.a_prime.cos_between(sc.b_prime),
        },
    }
}

/// Correlators by exhaustive summation over the 16 outcomes of the exact
/// joint distribution.
pub fn brute_force_correlators(sc: &Scenario) -> Result<CorrelatorSet> {
    Ok(grand_joint_quantum(sc)?.correlators())
}
