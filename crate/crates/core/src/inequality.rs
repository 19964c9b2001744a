//! CHSH functional, grid scans and multistart maximization.
//!
//! Sequential-mode functions are parameterized by the three difference
//! angles `(theta_ab, theta_aa', theta_bb')`; EPRB-mode functions by the four
//! absolute angles `(a, a', b, b')`. All angles are radians.

use std::f64::consts::{FRAC_PI_4, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quantum::{closed_form_correlators, CorrelatorSet, Mode, Scenario, Sign};
use crate::{Error, Result, BOUND_SLACK};

/// Values within this distance of the maximum count as ties.
const TIE_TOL: f64 = 1e-12;

/// Per-axis offset of multistart points from the cell centers, as a fraction
/// of the cell width. Keeps starts off the symmetric stationary points.
const START_JITTER: f64 = 0.01;

/// `e_ab + e_ab' + e_a'b' - e_a'b`. No bound is imposed.
pub fn chsh_value(c: &CorrelatorSet) -> f64 {
    c.ab + c.ab_prime + c.a_prime_b_prime - c.a_prime_b
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshReport {
    pub correlators: CorrelatorSet,
    pub s_value: f64,
    pub bound_satisfied: bool,
}

impl ChshReport {
    pub fn new(correlators: CorrelatorSet) -> Self {
        let s_value = chsh_value(&correlators);
        ChshReport {
            correlators,
            s_value,
            bound_satisfied: s_value.abs() <= 2.0 + BOUND_SLACK,
        }
    }
}

/// Which correlator carries the minus sign in a CHSH variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelatorSlot {
    Ab,
    AbPrime,
    APrimeB,
    APrimeBPrime,
}

impl CorrelatorSlot {
    pub const ALL: [CorrelatorSlot; 4] = [
        CorrelatorSlot::Ab,
        CorrelatorSlot::AbPrime,
        CorrelatorSlot::APrimeB,
        CorrelatorSlot::APrimeBPrime,
    ];

    fn pick(self, c: &CorrelatorSet) -> f64 {
        match self {
            CorrelatorSlot::Ab => c.ab,
            CorrelatorSlot::AbPrime => c.ab_prime,
            CorrelatorSlot::APrimeB => c.a_prime_b,
            CorrelatorSlot::APrimeBPrime => c.a_prime_b_prime,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            CorrelatorSlot::Ab => "ab",
            CorrelatorSlot::AbPrime => "ab'",
            CorrelatorSlot::APrimeB => "a'b",
            CorrelatorSlot::APrimeBPrime => "a'b'",
        }
    }
}

/// One of the eight sign variants `sign * (sum of all four - 2 * e_negated)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChshVariant {
    pub sign: Sign,
    pub negated: CorrelatorSlot,
}

impl ChshVariant {
    /// All eight variants; the first is the standard combination.
    pub fn all() -> impl Iterator<Item = ChshVariant> {
        Sign::BOTH.into_iter().flat_map(|sign| {
            [
                CorrelatorSlot::APrimeB,
                CorrelatorSlot::Ab,
                CorrelatorSlot::AbPrime,
                CorrelatorSlot::APrimeBPrime,
            ]
            .into_iter()
            .map(move |negated| ChshVariant { sign, negated })
        })
    }

    pub fn evaluate(&self, c: &CorrelatorSet) -> f64 {
        let total = c.ab + c.ab_prime + c.a_prime_b + c.a_prime_b_prime;
        self.sign.value() * (total - 2.0 * self.negated.pick(c))
    }

    /// Human-readable form, e.g. `+(ab + ab' + a'b' - a'b)`.
    pub fn describe(&self) -> String {
        let terms: Vec<String> = CorrelatorSlot::ALL
            .iter()
            .filter(|s| **s != self.negated)
            .map(|s| s.symbol().to_string())
            .collect();
        let sign = if self.sign == Sign::Plus { '+' } else { '-' };
        format!("{sign}({} - {})", terms.join(" + "), self.negated.symbol())
    }
}

/// Largest of the eight CHSH variants, with its value.
pub fn max_chsh_variant(c: &CorrelatorSet) -> (ChshVariant, f64) {
    let mut best: Option<(ChshVariant, f64)> = None;
    for v in ChshVariant::all() {
        let value = v.evaluate(c);
        if best.is_none_or(|(_, b)| value > b) {
            best = Some((v, value));
        }
    }
    best.expect("eight variants")
}

/// Closed-form sequential CHSH value
/// `-cos ab (1 + cos bb' + cos aa' cos bb' - cos aa')`.
pub fn chsh_sequential_closed(theta_ab: f64, theta_aa: f64, theta_bb: f64) -> f64 {
    let (c_ab, c_aa, c_bb) = (theta_ab.cos(), theta_aa.cos(), theta_bb.cos());
    -c_ab * (1.0 + c_bb + c_aa * c_bb - c_aa)
}

/// Closed-form EPRB CHSH value with `e_xy = -cos(x - y)`.
pub fn chsh_eprb_closed(a: f64, a_prime: f64, b: f64, b_prime: f64) -> f64 {
    -(a - b).cos() - (a - b_prime).cos() - (a_prime - b_prime).cos() + (a_prime - b).cos()
}

/// Number of angle parameters for a mode.
pub fn dimension(mode: Mode) -> usize {
    match mode {
        Mode::Sequential => 3,
        Mode::Eprb => 4,
    }
}

fn check_angles(mode: Mode, angles: &[f64]) -> Result<()> {
    if angles.len() != dimension(mode) {
        return Err(Error::InvalidAngles(format!(
            "{mode} mode takes {} angles, got {}",
            dimension(mode),
            angles.len()
        )));
    }
    if let Some(x) = angles.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFiniteAngle(*x));
    }
    Ok(())
}

fn closed_unchecked(mode: Mode, x: &[f64]) -> f64 {
    match mode {
        Mode::Sequential => chsh_sequential_closed(x[0], x[1], x[2]),
        Mode::Eprb => chsh_eprb_closed(x[0], x[1], x[2], x[3]),
    }
}

fn gradient_unchecked(mode: Mode, x: &[f64], out: &mut [f64]) {
    match mode {
        Mode::Sequential => {
            let (s_ab, c_ab) = x[0].sin_cos();
            let (s_aa, c_aa) = x[1].sin_cos();
            let (s_bb, c_bb) = x[2].sin_cos();
            out[0] = s_ab * (1.0 + c_bb + c_aa * c_bb - c_aa);
            out[1] = c_ab * s_aa * (c_bb - 1.0);
            out[2] = c_ab * s_bb * (1.0 + c_aa);
        }
        Mode::Eprb => {
            let (a, ap, b, bp) = (x[0], x[1], x[2], x[3]);
            let (s_ab, s_abp, s_apb, s_apbp) =
                ((a - b).sin(), (a - bp).sin(), (ap - b).sin(), (ap - bp).sin());
            out[0] = s_ab + s_abp;
            out[1] = s_apbp - s_apb;
            out[2] = -s_ab + s_apb;
            out[3] = -s_abp - s_apbp;
        }
    }
}

/// Closed-form CHSH value for the mode's angle parameterization.
pub fn chsh_closed(mode: Mode, angles: &[f64]) -> Result<f64> {
    check_angles(mode, angles)?;
    Ok(closed_unchecked(mode, angles))
}

/// Analytic gradient of the closed-form CHSH value.
pub fn chsh_gradient(mode: Mode, angles: &[f64]) -> Result<Vec<f64>> {
    check_angles(mode, angles)?;
    let mut g = vec![0.0; angles.len()];
    gradient_unchecked(mode, angles, &mut g);
    Ok(g)
}

/// Scenario realizing a parameter vector of [`chsh_closed`].
pub fn scenario_for(mode: Mode, angles: &[f64]) -> Result<Scenario> {
    check_angles(mode, angles)?;
    match mode {
        Mode::Sequential => Scenario::from_differences(mode, angles[0], angles[1], angles[2]),
        Mode::Eprb => Scenario::from_radians(mode, angles[0], angles[1], angles[2], angles[3]),
    }
}

/// Closed-form CHSH value for a scenario, via its correlators.
pub fn chsh_for_scenario(sc: &Scenario) -> f64 {
    chsh_value(&closed_form_correlators(sc))
}

fn validate_step(step: f64) -> Result<usize> {
    if !step.is_finite() || step <= 0.0 || step > TAU * (1.0 + 1e-12) {
        return Err(Error::InvalidStep(step));
    }
    // k * step < 2pi, with a little slack so that 2pi / step integral does not
    // produce a duplicate point at 2pi
    let points = ((TAU / step) - 1e-9).ceil().max(1.0) as usize;
    Ok(points)
}

/// Exhaustive evaluation of the closed-form CHSH value on a regular grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub mode: Mode,
    pub step: f64,
    pub points_per_axis: usize,
    /// CHSH value per cell, row-major with the first angle most significant.
    pub s_values: Vec<f64>,
    pub max_abs_s: f64,
    pub argmax_index: usize,
    pub argmax: Vec<f64>,
    /// Cells whose `|S|` exceeds `2 + 1e-9`.
    pub bound_violations: usize,
}

impl ScanReport {
    pub fn cells(&self) -> usize {
        self.s_values.len()
    }

    /// Angle tuple of a cell.
    pub fn cell_angles(&self, index: usize) -> Vec<f64> {
        grid_point(dimension(self.mode), self.points_per_axis, self.step, index)
    }
}

fn grid_point(dim: usize, points: usize, step: f64, mut index: usize) -> Vec<f64> {
    let mut angles = vec![0.0; dim];
    for slot in angles.iter_mut().rev() {
        *slot = (index % points) as f64 * step;
        index /= points;
    }
    angles
}

/// Evaluate the closed form on every cell of a grid with the given step.
///
/// The grid uses `k * step` for `k * step < 2pi` on each axis. The argmax is
/// the lexicographically smallest tuple whose `|S|` is within `1e-12` of the
/// maximum, so the report does not depend on evaluation order.
pub fn scan_grid(mode: Mode, step: f64) -> Result<ScanReport> {
    let points = validate_step(step)?;
    let dim = dimension(mode);
    let cells = points
        .checked_pow(dim as u32)
        .filter(|c| *c <= 200_000_000)
        .ok_or(Error::InvalidStep(step))?;
    let s_values: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|i| closed_unchecked(mode, &grid_point(dim, points, step, i)))
        .collect();
    let max_abs_s = s_values.par_iter().map(|s| s.abs()).reduce(|| 0.0, f64::max);
    let argmax_index = s_values
        .iter()
        .position(|s| s.abs() >= max_abs_s - TIE_TOL)
        .expect("nonempty grid");
    let bound_violations = s_values
        .par_iter()
        .filter(|s| s.abs() > 2.0 + BOUND_SLACK)
        .count();
    Ok(ScanReport {
        mode,
        step,
        points_per_axis: points,
        argmax: grid_point(dim, points, step, argmax_index),
        s_values,
        max_abs_s,
        argmax_index,
        bound_violations,
    })
}

/// Parameter subspace searched by [`maximize_chsh`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Restriction {
    #[default]
    None,
    /// `a = a'` and `b = b'`. In sequential mode this pins
    /// `theta_aa' = theta_bb' = 0`.
    TiedSettings,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaximizeOptions {
    /// Spacing of the multistart grid; starts sit at cell centers.
    pub coarse_step: f64,
    /// Gradient-norm threshold certifying a local maximum.
    pub tol: f64,
    pub max_iter: usize,
    /// Extra starting point in the mode's full parameterization.
    pub init: Option<Vec<f64>>,
    pub restriction: Restriction,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        MaximizeOptions {
            coarse_step: FRAC_PI_4,
            tol: 1e-10,
            max_iter: 20_000,
            init: None,
            restriction: Restriction::None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimumReport {
    pub mode: Mode,
    pub restriction: Restriction,
    /// Maximizing angles in the mode's full parameterization, in `[0, 2pi)`.
    pub angles: Vec<f64>,
    /// Signed CHSH value at `angles`.
    pub s_value: f64,
    pub abs_s: f64,
    /// Ascent iterations used by the winning start.
    pub iterations: usize,
    /// Gradient norm at the optimum (in the searched subspace).
    pub gradient_norm: f64,
    pub starts: usize,
    /// Whether the winning start met the gradient tolerance.
    pub converged: bool,
}

/// Maps free parameters onto the mode's full angle vector.
#[derive(Clone, Copy)]
struct Param {
    mode: Mode,
    restriction: Restriction,
}

impl Param {
    fn free_dim(&self) -> usize {
        match (self.restriction, self.mode) {
            (Restriction::None, m) => dimension(m),
            (Restriction::TiedSettings, Mode::Sequential) => 1,
            (Restriction::TiedSettings, Mode::Eprb) => 2,
        }
    }

    fn expand(&self, p: &[f64], full: &mut [f64]) {
        match (self.restriction, self.mode) {
            (Restriction::None, _) => full.copy_from_slice(p),
            (Restriction::TiedSettings, Mode::Sequential) => {
                full[0] = p[0];
                full[1] = 0.0;
                full[2] = 0.0;
            }
            (Restriction::TiedSettings, Mode::Eprb) => {
                full[0] = p[0];
                full[1] = p[0];
                full[2] = p[1];
                full[3] = p[1];
            }
        }
    }

    fn project(&self, full: &[f64]) -> Vec<f64> {
        match (self.restriction, self.mode) {
            (Restriction::None, _) => full.to_vec(),
            (Restriction::TiedSettings, Mode::Sequential) => vec![full[0]],
            (Restriction::TiedSettings, Mode::Eprb) => vec![full[0], full[2]],
        }
    }

    /// Chain rule from the full gradient.
    fn pull_back(&self, full_grad: &[f64], out: &mut [f64]) {
        match (self.restriction, self.mode) {
            (Restriction::None, _) => out.copy_from_slice(full_grad),
            (Restriction::TiedSettings, Mode::Sequential) => out[0] = full_grad[0],
            (Restriction::TiedSettings, Mode::Eprb) => {
                out[0] = full_grad[0] + full_grad[1];
                out[1] = full_grad[2] + full_grad[3];
            }
        }
    }

    /// Fixed ascent step below `1 / L`, with `L` a Gershgorin bound on the
    /// Hessian of the closed form in the free parameters.
    fn step(&self) -> f64 {
        let lipschitz = match self.mode {
            Mode::Sequential => 6.0,
            Mode::Eprb => 4.0,
        };
        let tie = match (self.restriction, self.mode) {
            (Restriction::TiedSettings, Mode::Eprb) => 4.0,
            _ => 1.0,
        };
        1.0 / (lipschitz * tie)
    }
}

struct Ascent {
    point: Vec<f64>,
    value: f64,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
}

/// Fixed-step gradient ascent on `direction * S`.
fn ascend(param: Param, start: &[f64], direction: f64, tol: f64, max_iter: usize) -> Ascent {
    let mode = param.mode;
    let full_dim = dimension(mode);
    let step = param.step();
    let mut p = start.to_vec();
    let mut full = vec![0.0; full_dim];
    let mut full_grad = vec![0.0; full_dim];
    let mut grad = vec![0.0; p.len()];
    let mut iterations = 0;
    loop {
        param.expand(&p, &mut full);
        gradient_unchecked(mode, &full, &mut full_grad);
        param.pull_back(&full_grad, &mut grad);
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let converged = grad_norm <= tol;
        if converged || iterations >= max_iter {
            return Ascent {
                value: closed_unchecked(mode, &full),
                point: p,
                grad_norm,
                iterations,
                converged,
            };
        }
        for (x, g) in p.iter_mut().zip(grad.iter()) {
            *x += step * direction * g;
        }
        iterations += 1;
    }
}

/// Multistart maximization of `|S|`.
///
/// A point near the center of every cell of a coarse grid (plus `init`, if given) seeds two
/// fixed-step gradient ascents, one on `S` and one on `-S`. The best
/// converged run wins; ties resolve to the earliest start. If no run reaches
/// the gradient tolerance the best unconverged run is returned with
/// `converged = false`.
pub fn maximize_chsh(mode: Mode, opts: &MaximizeOptions) -> Result<OptimumReport> {
    if !opts.tol.is_finite() || opts.tol <= 0.0 {
        return Err(Error::InvalidTolerance(opts.tol));
    }
    let points = validate_step(opts.coarse_step)?;
    let param = Param {
        mode,
        restriction: opts.restriction,
    };
    let free = param.free_dim();

    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(init) = &opts.init {
        check_angles(mode, init)?;
        starts.push(param.project(init));
    }
    let grid_cells = points.pow(free as u32);
    starts.extend((0..grid_cells).map(|i| {
        grid_point(free, points, opts.coarse_step, i)
            .into_iter()
            .enumerate()
            .map(|(axis, x)| x + opts.coarse_step * (0.5 + START_JITTER * (axis + 1) as f64))
            .collect()
    }));

    let runs: Vec<Ascent> = starts
        .par_iter()
        .flat_map_iter(|s| {
            [1.0, -1.0]
                .into_iter()
                .map(move |dir| ascend(param, s, dir, opts.tol, opts.max_iter))
        })
        .collect();

    let best = |require_converged: bool| -> Option<&Ascent> {
        let mut best: Option<&Ascent> = None;
        for run in runs.iter().filter(|r| r.converged || !require_converged) {
            if best.is_none_or(|b| run.value.abs() > b.value.abs() + TIE_TOL) {
                best = Some(run);
            }
        }
        best
    };
    let winner = best(true).or_else(|| best(false)).expect("at least one start");

    let mut full = vec![0.0; dimension(mode)];
    param.expand(&winner.point, &mut full);
    let angles: Vec<f64> = full
        .iter()
        .map(|x| {
            let r = x.rem_euclid(TAU);
            if r >= TAU {
                0.0
            } else {
                r
            }
        })
        .collect();
    let s_value = closed_unchecked(mode, &angles);
    Ok(OptimumReport {
        mode,
        restriction: opts.restriction,
        abs_s: s_value.abs(),
        s_value,
        angles,
        iterations: winner.iterations,
        gradient_norm: winner.grad_norm,
        starts: starts.len(),
        converged: winner.converged,
    })
}
