//! Empirical checks of the bit-level kernel.
//!
//! Sweeps run the single-precision kernel over every float in `[1, 4)` (or
//! over seeded random samples) and measure its error against a `f64`
//! reference. Absolute errors are taken on the reduced scale
//! `y~ - 1/sqrt(x~)` so they are comparable across exponents.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{KernelError, VerifyError};
use crate::float_bits::{normalize, pow2, scale_pow2, POSITIVE_NORMAL_BITS, UNIT_INTERVAL_BITS};
use crate::kernel::{check_seed_preconditions, invsqrt_raw, seed_raw, KernelConfig};
use crate::model::{y0_exact, Parity, SeedParam};
use crate::optimizer::{DerivationResult, Objective};
use crate::par::{map_reduce_range, map_reduce_slice, map_slice, Execution};

/// Lower slack when comparing a sweep max against its prediction: one
/// step of `t` in the rounding of `R`.
pub const LOWER_SLACK: f64 = 1.0 / (1u64 << 22) as f64;
/// Upper slack for `k = 0`: quantization of `R` and the parity term.
pub const SEED_SLACK: f64 = 1.0 / (1u64 << 22) as f64;
/// Upper slack for `k >= 1`: single-precision round-off in the iterations.
pub const ROUNDOFF_SLACK: f64 = 8.0 / (1u64 << 23) as f64;

/// Inputs swept by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Every single-precision `x~ in [1, 4)`, 2^24 values.
    UnitIntervalExhaustive,
    /// `count` values drawn uniformly from `[1, 4)`.
    UnitIntervalRandom { count: usize, seed: u64 },
    /// `count` positive normals drawn uniformly over their bit patterns,
    /// covering `[2^-126, 2^128)`.
    FullRangeRandom { count: usize, seed: u64 },
}

impl Domain {
    pub fn rng_seed(&self) -> Option<u64> {
        match *self {
            Domain::UnitIntervalExhaustive => None,
            Domain::UnitIntervalRandom { seed, .. } | Domain::FullRangeRandom { seed, .. } => Some(seed),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Domain::UnitIntervalExhaustive => "unit_interval_exhaustive",
            Domain::UnitIntervalRandom { .. } => "unit_interval_random",
            Domain::FullRangeRandom { .. } => "full_range_random",
        }
    }

    /// Random inputs in generation order; `None` for the exhaustive domain.
    pub fn samples(&self) -> Option<Vec<f32>> {
        match *self {
            Domain::UnitIntervalExhaustive => None,
            Domain::UnitIntervalRandom { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Some((0..count).map(|_| rng.gen_range(1.0f32..4.0)).collect())
            }
            Domain::FullRangeRandom { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Some(
                    (0..count)
                        .map(|_| f32::from_bits(rng.gen_range(POSITIVE_NORMAL_BITS)))
                        .collect(),
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Relative,
    Absolute,
    Both,
}

impl From<Objective> for ErrorKind {
    fn from(o: Objective) -> Self {
        match o {
            Objective::Relative => ErrorKind::Relative,
            Objective::Absolute => ErrorKind::Absolute,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepSpec {
    pub magic: u32,
    pub iterations: u32,
    pub domain: Domain,
    pub error_kind: ErrorKind,
}

impl SweepSpec {
    pub fn exhaustive(magic: u32, iterations: u32, error_kind: ErrorKind) -> Self {
        Self {
            magic,
            iterations,
            domain: Domain::UnitIntervalExhaustive,
            error_kind,
        }
    }

    fn validate(&self) -> Result<(), VerifyError> {
        check_seed_preconditions(self.magic)?;
        match self.domain {
            Domain::UnitIntervalRandom { count: 0, .. } | Domain::FullRangeRandom { count: 0, .. } => {
                Err(VerifyError::InvalidSpec("sample count must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Errors of one kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudPoint {
    pub x: f32,
    pub x_tilde: f32,
    pub relative: f64,
    pub absolute: f64,
}

/// Kernel output for `x` with its relative and reduced-scale absolute error.
pub fn evaluate_point(x: f32, magic: u32, iterations: u32) -> CloudPoint {
    let y = f64::from(invsqrt_raw(x, magic, iterations));
    let reference = 1.0 / f64::from(x).sqrt();
    let nx = normalize(x).expect("sweep inputs are positive normals");
    let y_tilde = y * pow2(nx.n);
    let x_tilde = f64::from(nx.x_tilde);
    CloudPoint {
        x,
        x_tilde: nx.x_tilde,
        relative: y / reference - 1.0,
        absolute: y_tilde - 1.0 / x_tilde.sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Extremes {
    rel: f64,
    rel_at: u32,
    abs: f64,
    abs_at: u32,
    count: u64,
}

impl Extremes {
    const EMPTY: Self = Self {
        rel: -1.0,
        rel_at: u32::MAX,
        abs: -1.0,
        abs_at: u32::MAX,
        count: 0,
    };

    fn of(p: &CloudPoint) -> Self {
        let bits = p.x.to_bits();
        Self {
            rel: p.relative.abs(),
            rel_at: bits,
            abs: p.absolute.abs(),
            abs_at: bits,
            count: 1,
        }
    }

    // Larger error wins; ties go to the smaller bit pattern so the result
    // does not depend on reduction order.
    fn combine(a: Self, b: Self) -> Self {
        let pick = |va: f64, ia: u32, vb: f64, ib: u32| {
            if va > vb || (va == vb && ia <= ib) {
                (va, ia)
            } else {
                (vb, ib)
            }
        };
        let (rel, rel_at) = pick(a.rel, a.rel_at, b.rel, b.rel_at);
        let (abs, abs_at) = pick(a.abs, a.abs_at, b.abs, b.abs_at);
        Self {
            rel,
            rel_at,
            abs,
            abs_at,
            count: a.count + b.count,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub spec: SweepSpec,
    pub samples: u64,
    pub max_abs_of_relative_error: f64,
    pub argmax_rel: u32,
    pub max_abs_of_absolute_error: f64,
    pub argmax_abs: u32,
    pub sample_cloud: Option<Vec<CloudPoint>>,
    pub predicted: Option<f64>,
}

impl ErrorReport {
    /// Max error for the spec's error kind (relative for `Both`).
    pub fn measured(&self) -> f64 {
        match self.spec.error_kind {
            ErrorKind::Absolute => self.max_abs_of_absolute_error,
            _ => self.max_abs_of_relative_error,
        }
    }

    pub fn rng_seed(&self) -> Option<u64> {
        self.spec.domain.rng_seed()
    }

    pub fn with_prediction(mut self, predicted: f64) -> Self {
        self.predicted = Some(predicted);
        self
    }
}

pub fn sweep(spec: &SweepSpec) -> Result<ErrorReport, VerifyError> {
    sweep_with(spec, Execution::Parallel)
}

pub fn sweep_with(spec: &SweepSpec, exec: Execution) -> Result<ErrorReport, VerifyError> {
    spec.validate()?;
    let (magic, iters) = (spec.magic, spec.iterations);
    let (ext, cloud) = match spec.domain.samples() {
        None => {
            let ext = map_reduce_range(
                UNIT_INTERVAL_BITS,
                exec,
                Extremes::EMPTY,
                |bits| Extremes::of(&evaluate_point(f32::from_bits(bits), magic, iters)),
                Extremes::combine,
            );
            (ext, None)
        }
        Some(xs) => {
            let cloud = map_slice(&xs, exec, |&x| evaluate_point(x, magic, iters));
            let ext = map_reduce_slice(&cloud, exec, Extremes::EMPTY, Extremes::of, Extremes::combine);
            (ext, Some(cloud))
        }
    };
    Ok(ErrorReport {
        spec: *spec,
        samples: ext.count,
        max_abs_of_relative_error: ext.rel,
        argmax_rel: ext.rel_at,
        max_abs_of_absolute_error: ext.abs,
        argmax_abs: ext.abs_at,
        sample_cloud: cloud,
        predicted: None,
    })
}

/// Predicted vs measured max error for one derived constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    pub objective: Objective,
    pub k: u32,
    pub magic: u32,
    pub predicted: f64,
    pub measured: f64,
    pub argmax: u32,
    pub lower: f64,
    pub upper: f64,
}

impl Agreement {
    pub fn within(&self) -> bool {
        self.measured >= self.lower && self.measured <= self.upper
    }
}

/// Upper slack allowed above the prediction for `k` iterations.
pub fn upper_slack(k: u32) -> f64 {
    if k == 0 {
        SEED_SLACK
    } else {
        ROUNDOFF_SLACK
    }
}

/// Exhaustive sweep of a derived constant compared with its prediction.
pub fn compare_with_prediction(row: &DerivationResult, exec: Execution) -> Result<Agreement, VerifyError> {
    let spec = SweepSpec::exhaustive(row.r_opt, row.k, row.objective.into());
    let rep = sweep_with(&spec, exec)?;
    let argmax = match row.objective {
        Objective::Relative => rep.argmax_rel,
        Objective::Absolute => rep.argmax_abs,
    };
    Ok(Agreement {
        objective: row.objective,
        k: row.k,
        magic: row.r_opt,
        predicted: row.predicted_max_error,
        measured: rep.measured(),
        argmax,
        lower: row.predicted_max_error - LOWER_SLACK,
        upper: row.predicted_max_error + upper_slack(row.k),
    })
}

/// How many of the `[1, 4)` bit patterns a seed-model check visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    Exhaustive,
    /// One pattern per equal-width stratum of the bit range.
    Stratified(u32),
}

const MISMATCH_DUMP: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SeedModelReport {
    pub magic: u32,
    pub checked: u64,
    pub mismatches: u64,
    /// First offending `x~` bit patterns, ascending.
    pub first_mismatches: Vec<u32>,
    /// `max |y00(x~, t1) - seed(x~)|`.
    pub smooth_gap: f64,
    pub smooth_argmax: u32,
}

impl SeedModelReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
struct SeedModelAcc {
    checked: u64,
    mismatches: u64,
    first: Vec<u32>,
    gap: f64,
    gap_at: u32,
}

impl SeedModelAcc {
    fn empty() -> Self {
        Self {
            checked: 0,
            mismatches: 0,
            first: Vec::new(),
            gap: -1.0,
            gap_at: u32::MAX,
        }
    }

    fn combine(mut a: Self, b: Self) -> Self {
        a.checked += b.checked;
        a.mismatches += b.mismatches;
        a.first.extend(b.first);
        a.first.sort_unstable();
        a.first.truncate(MISMATCH_DUMP);
        if b.gap > a.gap || (b.gap == a.gap && b.gap_at < a.gap_at) {
            a.gap = b.gap;
            a.gap_at = b.gap_at;
        }
        a
    }
}

/// Compares the integer seed with the exact piecewise formula on every
/// float in `[1, 4)`. Equality is required exactly in `f64`, which implies
/// bit equality after rounding to single precision.
pub fn verify_theorem1(magic: u32) -> Result<SeedModelReport, KernelError> {
    verify_theorem1_with(magic, Coverage::Exhaustive, Execution::Parallel)
}

pub fn verify_theorem1_with(
    magic: u32,
    coverage: Coverage,
    exec: Execution,
) -> Result<SeedModelReport, KernelError> {
    let param = SeedParam::new(magic)?;
    let (t_even, t_odd, t_smooth) = (param.t_even(), param.t_odd(), param.t(Parity::Smooth));
    let check = |bits: u32| {
        let x = f32::from_bits(bits);
        let seed = f64::from(seed_raw(x, magic));
        let exact = y0_exact(x, t_even, t_odd);
        let smooth = crate::model::y00(f64::from(x), t_smooth).expect("x~ in [1, 4)");
        let bad = exact != seed;
        SeedModelAcc {
            checked: 1,
            mismatches: u64::from(bad),
            first: if bad { vec![bits] } else { Vec::new() },
            gap: (smooth - seed).abs(),
            gap_at: bits,
        }
    };
    let acc = match coverage {
        Coverage::Exhaustive => {
            map_reduce_range(UNIT_INTERVAL_BITS, exec, SeedModelAcc::empty(), check, SeedModelAcc::combine)
        }
        Coverage::Stratified(samples) => {
            let span = UNIT_INTERVAL_BITS.end - UNIT_INTERVAL_BITS.start;
            let samples = samples.clamp(1, span);
            let width = span / samples;
            map_reduce_range(
                0..samples,
                exec,
                SeedModelAcc::empty(),
                |i| {
                    // Deterministic scatter inside each stratum.
                    let offset = i.wrapping_mul(2_654_435_761) % width;
                    check(UNIT_INTERVAL_BITS.start + i * width + offset)
                },
                SeedModelAcc::combine,
            )
        }
    };
    Ok(SeedModelReport {
        magic,
        checked: acc.checked,
        mismatches: acc.mismatches,
        first_mismatches: acc.first,
        smooth_gap: acc.gap,
        smooth_argmax: acc.gap_at,
    })
}

/// Inputs for which `0.5 * x` stays normal and the iteration's
/// intermediate products cannot over- or underflow: `[2^-125, 2^126)`.
pub fn in_safe_range(x: f32) -> bool {
    let lo = f32::from_bits(2 << 23);
    let hi = f32::from_bits((126 + 127) << 23);
    x >= lo && x < hi
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingOutcome {
    Equal,
    Violation,
    Skipped,
}

/// Checks `invsqrt(4^n x) == 2^(-n) invsqrt(x)` bit for bit.
pub fn check_scaling_pair(x: f32, n: i32, cfg: &KernelConfig) -> ScalingOutcome {
    let Some(scaled) = scale_pow2(x, 2 * n) else {
        return ScalingOutcome::Skipped;
    };
    if !in_safe_range(x) || !in_safe_range(scaled) {
        return ScalingOutcome::Skipped;
    }
    let direct = invsqrt_raw(scaled, cfg.magic(), cfg.iterations());
    let base = invsqrt_raw(x, cfg.magic(), cfg.iterations());
    match scale_pow2(base, -n) {
        Some(expected) if expected.to_bits() == direct.to_bits() => ScalingOutcome::Equal,
        _ => ScalingOutcome::Violation,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub magic: u32,
    pub iterations: u32,
    pub trials: u64,
    pub violations: u64,
    pub skipped: u64,
    /// First offending `(x bits, n)` pairs in generation order.
    pub first_violations: Vec<(u32, i32)>,
    pub rng_seed: u64,
}

/// Draws `(x, n)` pairs until `trials` of them fall in the safe range and
/// checks power-of-four equivariance on each.
pub fn verify_scaling(
    magic: u32,
    iterations: u32,
    trials: u64,
    rng_seed: u64,
) -> Result<ScalingReport, KernelError> {
    let cfg = KernelConfig::new(magic, iterations)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut pairs = Vec::with_capacity(trials as usize);
    let mut skipped = 0;
    while (pairs.len() as u64) < trials {
        let x = f32::from_bits(rng.gen_range(POSITIVE_NORMAL_BITS));
        let n = rng.gen_range(-63..=63);
        let ok = scale_pow2(x, 2 * n).is_some_and(|s| in_safe_range(x) && in_safe_range(s));
        if ok {
            pairs.push((x, n));
        } else {
            skipped += 1;
        }
    }
    let outcomes = map_slice(&pairs, Execution::Parallel, |&(x, n)| check_scaling_pair(x, n, &cfg));
    let bad: Vec<(u32, i32)> = pairs
        .iter()
        .zip(&outcomes)
        .filter(|(_, o)| **o == ScalingOutcome::Violation)
        .map(|(&(x, n), _)| (x.to_bits(), n))
        .collect();
    Ok(ScalingReport {
        magic,
        iterations,
        trials,
        violations: bad.len() as u64,
        skipped,
        first_violations: bad.into_iter().take(MISMATCH_DUMP).collect(),
        rng_seed,
    })
}

/// Header of the error-cloud CSV.
pub const CLOUD_HEADER: [&str; 6] = ["x", "x_tilde", "error_relative", "error_absolute", "R", "iterations"];

/// Writes the error cloud for `spec` as CSV, one row per input in
/// generation order. A zero sample count yields a header-only file.
pub fn emit_cloud(spec: &SweepSpec, path: impl AsRef<Path>) -> Result<u64, VerifyError> {
    let file = std::fs::File::create(path)?;
    let rows = write_cloud(spec, std::io::BufWriter::new(file))?;
    Ok(rows)
}

/// [`emit_cloud`] into any writer.
pub fn write_cloud<W: Write>(spec: &SweepSpec, writer: W) -> Result<u64, VerifyError> {
    check_seed_preconditions(spec.magic)?;
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(CLOUD_HEADER)?;
    let points: Vec<CloudPoint> = match spec.domain.samples() {
        Some(xs) => map_slice(&xs, Execution::Parallel, |&x| evaluate_point(x, spec.magic, spec.iterations)),
        None => {
            let xs: Vec<f32> = UNIT_INTERVAL_BITS.map(f32::from_bits).collect();
            map_slice(&xs, Execution::Parallel, |&x| evaluate_point(x, spec.magic, spec.iterations))
        }
    };
    let magic = format!("0x{:08X}", spec.magic);
    let iterations = spec.iterations.to_string();
    for p in &points {
        out.write_record([
            format!("{:.8e}", p.x),
            format!("{:.8e}", p.x_tilde),
            format!("{:.16e}", p.relative),
            format!("{:.16e}", p.absolute),
            magic.clone(),
            iterations.clone(),
        ])?;
    }
    out.flush()?;
    Ok(points.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_point_reduces_absolute_error() {
        // Same x~ at different scales gives the same reduced absolute error.
        let a = evaluate_point(3.0, 0x5F37_5A86, 1);
        let b = evaluate_point(3.0 * 4f32.powi(10), 0x5F37_5A86, 1);
        assert_eq!(a.absolute, b.absolute);
        assert_eq!(a.x_tilde, 3.0);
        assert_eq!(b.x_tilde, 3.0);
        assert!((a.relative - b.relative).abs() < 1e-15);
    }

    #[test]
    fn extremes_combine_is_order_independent() {
        let p = |x: f32, r: f64, a: f64| CloudPoint {
            x,
            x_tilde: x,
            relative: r,
            absolute: a,
        };
        let pts = [p(1.0, 0.1, 0.2), p(2.0, -0.1, 0.3), p(3.0, 0.05, -0.3)];
        let fwd = pts.iter().map(Extremes::of).fold(Extremes::EMPTY, Extremes::combine);
        let rev = pts.iter().rev().map(Extremes::of).fold(Extremes::EMPTY, Extremes::combine);
        assert_eq!(fwd, rev);
        assert_eq!(fwd.rel_at, 1.0f32.to_bits());
        assert_eq!(fwd.abs_at, 2.0f32.to_bits());
    }

    #[test]
    fn invalid_specs() {
        let spec = SweepSpec {
            magic: 0x5F37_642F,
            iterations: 0,
            domain: Domain::FullRangeRandom { count: 0, seed: 1 },
            error_kind: ErrorKind::Both,
        };
        assert!(matches!(sweep(&spec), Err(VerifyError::InvalidSpec(_))));
        let spec = SweepSpec {
            magic: 0x5F40_0000,
            ..SweepSpec::exhaustive(0, 0, ErrorKind::Relative)
        };
        assert!(matches!(sweep(&spec), Err(VerifyError::Kernel(_))));
    }

    #[test]
    fn seed_check_rejects_invalid_constant() {
        assert!(verify_theorem1(0x5F40_0000).is_err());
        assert!(verify_theorem1(0x5EB7_59DF).is_err());
    }

    #[test]
    fn seed_check_stratified() {
        let rep = verify_theorem1_with(0x5F37_59DF, Coverage::Stratified(1 << 12), Execution::Sequential).unwrap();
        assert_eq!(rep.checked, 1 << 12);
        assert!(rep.passed());
    }

    #[test]
    fn scaling_examples() {
        let cfg = KernelConfig::new(0x5F37_59DF, 2).unwrap();
        assert_eq!(check_scaling_pair(1.5, 10, &cfg), ScalingOutcome::Equal);
        assert_eq!(check_scaling_pair(1.5, -10, &cfg), ScalingOutcome::Equal);
        // 1.5 * 2^124 * 4 lands at 1.5 * 2^126, past the safe range.
        let near_top = f32::from_bits((124 + 127) << 23 | 0x40_0000);
        assert_eq!(check_scaling_pair(near_top, 1, &cfg), ScalingOutcome::Skipped);
        assert_eq!(check_scaling_pair(1.0, 64, &cfg), ScalingOutcome::Skipped);
    }

    #[test]
    fn safe_range_edges() {
        assert!(!in_safe_range(f32::MIN_POSITIVE));
        assert!(in_safe_range(f32::MIN_POSITIVE * 2.0));
        assert!(in_safe_range(f32::from_bits((125 + 127) << 23 | 0x7F_FFFF)));
        assert!(!in_safe_range(f32::from_bits((126 + 127) << 23)));
    }
}
