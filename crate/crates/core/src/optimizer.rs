//! Minimax-optimal breakpoints `t` and magic constants.
//!
//! For every objective the worst-case error over `[1, 4)` is attained at a
//! small set of competing points (interior extrema and region endpoints).
//! The optimal `t` is where two of them balance; each balance equation is
//! solved by bisection on a bracket known from the extremum analysis.

use std::fmt;

use crate::error::SolveError;
use crate::model::{
    abs_k1_stationarity, absolute_error, r_from_t, relative_error, Region,
};

/// Default bracket width for every solve.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
const MAX_ITERATIONS: usize = 200;

/// Outer bracket on `t` for the relative-error solves.
pub const T_BRACKET: (f64, f64) = (3.0, 3.99);
/// Outer bracket on `t` for the absolute-error solves with `k >= 1`.
/// Below roughly 3.52 the zeroth-order error is negative on all of
/// region I and the interior minimum being balanced does not exist.
pub const T_BRACKET_ABS_NR: (f64, f64) = (3.6, 3.99);

/// Step of the central difference used to locate minima of `Delta2`.
pub const FD_STEP: f64 = 1e-7;

/// A scalar equation `residual(x) = 0` with a sign-changing bracket.
pub struct RootProblem<F> {
    pub residual: F,
    pub a: f64,
    pub b: f64,
    pub tolerance: f64,
}

impl<F: FnMut(f64) -> f64> RootProblem<F> {
    pub fn new(residual: F, a: f64, b: f64) -> Self {
        Self {
            residual,
            a,
            b,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }
}

/// Bisection. Returns the midpoint of the final bracket, whose width is at
/// most the problem tolerance.
pub fn bisect<F: FnMut(f64) -> f64>(problem: RootProblem<F>) -> Result<f64, SolveError> {
    let RootProblem {
        mut residual,
        mut a,
        mut b,
        tolerance,
    } = problem;
    let mut fa = residual(a);
    let fb = residual(b);
    if !fa.is_finite() {
        return Err(SolveError::NotFinite { x: a });
    }
    if !fb.is_finite() {
        return Err(SolveError::NotFinite { x: b });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(SolveError::NoSignChange { a, b, fa, fb });
    }
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= tolerance || mid == a || mid == b {
            return Ok(mid);
        }
        let fm = residual(mid);
        if !fm.is_finite() {
            return Err(SolveError::NotFinite { x: mid });
        }
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Err(SolveError::MaxIterations {
        tol: tolerance,
        iterations: MAX_ITERATIONS,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    Relative,
    Absolute,
}

impl Objective {
    pub fn as_str(&self) -> &'static str {
        match self {
            Objective::Relative => "relative",
            Objective::Absolute => "absolute",
        }
    }

    /// Model error of the given kind (unchecked domain).
    pub fn error(&self, x_tilde: f64, t: f64, k: u32) -> f64 {
        let r = match self {
            Objective::Relative => relative_error(x_tilde, t, k),
            Objective::Absolute => absolute_error(x_tilde, t, k),
        };
        r.expect("caller keeps x~ in [1, 4] and t in [2, 4]")
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of the derived-constants table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivationResult {
    pub objective: Objective,
    pub k: u32,
    pub t_opt: f64,
    pub r_opt: u32,
    pub predicted_max_error: f64,
    pub balance_residual: f64,
}

impl DerivationResult {
    fn new(objective: Objective, k: u32, t_opt: f64, predicted: f64, residual: f64) -> Result<Self, SolveError> {
        Ok(Self {
            objective,
            k,
            t_opt,
            r_opt: r_from_t(t_opt)?,
            predicted_max_error: predicted,
            balance_residual: residual,
        })
    }
}

fn rel(x: f64, t: f64, k: u32) -> f64 {
    Objective::Relative.error(x, t, k)
}

fn abs(x: f64, t: f64, k: u32) -> f64 {
    Objective::Absolute.error(x, t, k)
}

/// Interior maximum of `delta0` on region I, `-1 + (1 + t/6)^(3/2) / 2`.
pub fn rel_k0_max_region_i(t: f64) -> f64 {
    -1.0 + 0.5 * (1.0 + t / 6.0).powf(1.5)
}

/// Interior maximum of `delta0` on region II, `-1 + 2 (1 + t/4)^(3/2) / 3^(3/2)`.
pub fn rel_k0_max_region_ii(t: f64) -> f64 {
    -1.0 + 2.0 * 3f64.powf(-1.5) * (1.0 + t / 4.0).powf(1.5)
}

/// `|delta0(t, t)| = 1 - sqrt(t)/2`, the global minimum's magnitude.
pub fn rel_k0_min_magnitude(t: f64) -> f64 {
    1.0 - 0.5 * t.sqrt()
}

/// Above this `t` the region II maximum of `delta0` dominates region I.
pub fn rel_k0_switch_point() -> f64 {
    -2.0 + 2f64.powf(4.0 / 3.0) + 2f64.powf(5.0 / 3.0)
}

/// A root of one of the two candidate zeroth-order relative balances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceCandidate {
    /// Region whose interior maximum is balanced against `|delta0(t, t)|`.
    pub region: Region,
    pub t: f64,
    /// Interval of `t` on which this region's maximum is the dominant one.
    pub validity: (f64, f64),
    pub within_validity: bool,
    /// Dense-grid `max |delta0|` at this `t`.
    pub grid_max_error: f64,
}

/// Solves both candidate balances for the zeroth-order relative error and
/// reports where each root lands relative to its validity interval.
pub fn rel_k0_candidates() -> Result<Vec<BalanceCandidate>, SolveError> {
    let switch = rel_k0_switch_point();
    type MaxFn = fn(f64) -> f64;
    let specs: [(Region, MaxFn, (f64, f64)); 2] = [
        (Region::I, rel_k0_max_region_i, (2.0, switch)),
        (Region::II, rel_k0_max_region_ii, (switch, 4.0)),
    ];
    specs
        .into_iter()
        .map(|(region, max_fn, validity)| {
            let t = bisect(RootProblem::new(
                |t| max_fn(t) - rel_k0_min_magnitude(t),
                T_BRACKET.0,
                T_BRACKET.1,
            ))?;
            Ok(BalanceCandidate {
                region,
                t,
                validity,
                within_validity: t > validity.0 && t < validity.1,
                grid_max_error: grid_max_error(Objective::Relative, 0, t, DEFAULT_GRID),
            })
        })
        .collect()
}

/// Zeroth-order relative error.
pub fn solve_rel_k0() -> Result<DerivationResult, SolveError> {
    let candidates = rel_k0_candidates()?;
    let chosen = candidates
        .iter()
        .find(|c| c.within_validity)
        .ok_or(SolveError::NoValidCandidate)?;
    let t = chosen.t;
    let max_fn = match chosen.region {
        Region::I => rel_k0_max_region_i,
        _ => rel_k0_max_region_ii,
    };
    let residual = max_fn(t) - rel_k0_min_magnitude(t);
    DerivationResult::new(Objective::Relative, 0, t, rel_k0_min_magnitude(t), residual)
}

/// `delta_k(t, t) - delta_k((4 + t)/3, t)`: the error at the breakpoint
/// against the minimum inherited from the region II maximum of `delta0`.
pub fn rel_balance(t: f64, k: u32) -> f64 {
    rel(t, t, k) - rel((4.0 + t) / 3.0, t, k)
}

/// First correction, relative error. The second correction shares `t`.
pub fn solve_rel_k1() -> Result<DerivationResult, SolveError> {
    let t = bisect(RootProblem::new(|t| rel_balance(t, 1), T_BRACKET.0, T_BRACKET.1))?;
    DerivationResult::new(Objective::Relative, 1, t, rel(t, t, 1).abs(), rel_balance(t, 1))
}

/// Second correction, relative error, reusing the first-correction `t`.
pub fn solve_rel_k2() -> Result<DerivationResult, SolveError> {
    let k1 = solve_rel_k1()?;
    let t = k1.t_opt;
    DerivationResult::new(Objective::Relative, 2, t, rel(t, t, 2).abs(), rel_balance(t, 2))
}

/// Outcome of solving the second-correction relative balance on its own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharedOptimumReport {
    pub t_k1: f64,
    pub t_k2: f64,
    pub difference: f64,
    pub residual_k1: f64,
    pub residual_k2: f64,
    /// Whether both interior minima of `delta2` decrease with `t` on the
    /// sampled range `[3.7, 3.76]`.
    pub minima_decreasing: bool,
}

/// Solves `delta2(t, t) = delta2((4 + t)/3, t)` independently and compares
/// the root with the first-correction optimum.
pub fn verify_rel_k2_equals_k1() -> Result<SharedOptimumReport, SolveError> {
    let t_k1 = solve_rel_k1()?.t_opt;
    let t_k2 = bisect(RootProblem::new(|t| rel_balance(t, 2), T_BRACKET.0, T_BRACKET.1))?;
    let minima = |t: f64| [rel((6.0 + t) / 6.0, t, 2), rel((4.0 + t) / 3.0, t, 2)];
    let samples: Vec<[f64; 2]> = (0..=60).map(|i| minima(3.7 + 0.001 * f64::from(i))).collect();
    let minima_decreasing = samples
        .windows(2)
        .all(|w| w[1][0] < w[0][0] && w[1][1] < w[0][1]);
    Ok(SharedOptimumReport {
        t_k1,
        t_k2,
        difference: (t_k2 - t_k1).abs(),
        residual_k1: rel_balance(t_k2, 1),
        residual_k2: rel_balance(t_k2, 2),
        minima_decreasing,
    })
}

/// Zeroth-order absolute error, closed form `t = -1 + 3 * 2^(2/3)`.
pub fn solve_abs_k0() -> Result<DerivationResult, SolveError> {
    let cbrt2 = 2f64.cbrt();
    let t = -1.0 + 3.0 * cbrt2 * cbrt2;
    let lhs = 0.75 - 1.5 / cbrt2 + t / 8.0;
    let rhs = 0.5 - t / 8.0;
    DerivationResult::new(Objective::Absolute, 0, t, 0.625 - 0.75 / cbrt2, lhs - rhs)
}

/// Derivative of `Delta_k` in `x` used to locate its interior minima on
/// region I: the explicit expression for `k = 1`, a central difference
/// otherwise.
pub fn abs_stationarity(x: f64, t: f64, k: u32) -> f64 {
    if k == 1 {
        abs_k1_stationarity(x, t, Region::I)
    } else {
        (abs(x + FD_STEP, t, k) - abs(x - FD_STEP, t, k)) / (2.0 * FD_STEP)
    }
}

/// Location of the lowest interior local minimum of `Delta_k(., t)` on
/// region I.
pub fn abs_minimum_region_i(t: f64, k: u32) -> Result<f64, SolveError> {
    const SCAN: usize = 512;
    let (lo, hi) = (1.0 + 1e-6, 2.0 - 1e-6);
    let grid: Vec<f64> = (0..=SCAN)
        .map(|i| lo + (hi - lo) * i as f64 / SCAN as f64)
        .collect();
    let mut best: Option<(f64, f64)> = None;
    for w in grid.windows(2) {
        let (fa, fb) = (abs_stationarity(w[0], t, k), abs_stationarity(w[1], t, k));
        if fa < 0.0 && fb >= 0.0 {
            let x = bisect(RootProblem::new(|x| abs_stationarity(x, t, k), w[0], w[1]))?;
            let v = abs(x, t, k);
            if best.is_none_or(|(_, bv)| v < bv) {
                best = Some((x, v));
            }
        }
    }
    best.map(|(x, _)| x)
        .ok_or(SolveError::NoInteriorMinimum { a: lo, b: hi, t })
}

/// `Delta_k(x*(t), t) - Delta_k(1, t)` with `x*` the region I minimum.
pub fn abs_balance(t: f64, k: u32) -> Result<f64, SolveError> {
    let x = abs_minimum_region_i(t, k)?;
    Ok(abs(x, t, k) - abs(1.0, t, k))
}

fn solve_abs_nr(k: u32) -> Result<DerivationResult, SolveError> {
    let mut failure = None;
    let t = bisect(RootProblem::new(
        |t| match abs_balance(t, k) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        T_BRACKET_ABS_NR.0,
        T_BRACKET_ABS_NR.1,
    ));
    if let Some(e) = failure {
        return Err(e);
    }
    let t = t?;
    DerivationResult::new(Objective::Absolute, k, t, abs(1.0, t, k).abs(), abs_balance(t, k)?)
}

/// First correction, absolute error.
pub fn solve_abs_k1() -> Result<DerivationResult, SolveError> {
    solve_abs_nr(1)
}

/// Second correction, absolute error.
pub fn solve_abs_k2() -> Result<DerivationResult, SolveError> {
    solve_abs_nr(2)
}

/// All six rows: relative `k = 0, 1, 2`, then absolute `k = 0, 1, 2`.
pub fn derive_all() -> Result<Vec<DerivationResult>, SolveError> {
    let rel_k1 = solve_rel_k1()?;
    let t = rel_k1.t_opt;
    let rel_k2 = DerivationResult::new(Objective::Relative, 2, t, rel(t, t, 2).abs(), rel_balance(t, 2))?;
    Ok(vec![
        solve_rel_k0()?,
        rel_k1,
        rel_k2,
        solve_abs_k0()?,
        solve_abs_k1()?,
        solve_abs_k2()?,
    ])
}

/// Points per region for [`grid_max_error`] in the optimality probes.
pub const DEFAULT_GRID: usize = 4096;

/// `max |error|` over a grid of `points` per region (endpoints included).
pub fn grid_max_error(objective: Objective, k: u32, t: f64, points: usize) -> f64 {
    let regions = [(1.0, 2.0), (2.0, t), (t, 4.0)];
    let n = points.max(2) - 1;
    regions
        .iter()
        .flat_map(|&(a, b)| (0..=n).map(move |i| a + (b - a) * i as f64 / n as f64))
        .map(|x| objective.error(x, t, k).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalityProbe {
    pub at_opt: f64,
    pub below: f64,
    pub above: f64,
}

impl OptimalityProbe {
    /// Both perturbed maxima strictly exceed the optimum's.
    pub fn holds(&self) -> bool {
        self.below > self.at_opt && self.above > self.at_opt
    }
}

/// Grid max-error at `t_opt` and at `t_opt -/+ step`.
pub fn optimality_probe(result: &DerivationResult, step: f64) -> OptimalityProbe {
    let f = |t| grid_max_error(result.objective, result.k, t, DEFAULT_GRID);
    OptimalityProbe {
        at_opt: f(result.t_opt),
        below: f(result.t_opt - step),
        above: f(result.t_opt + step),
    }
}
