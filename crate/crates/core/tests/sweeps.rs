use fisr::kernel::invsqrt_raw;
use fisr::verifier::{
    compare_with_prediction, sweep, sweep_with, upper_slack, Domain, ErrorKind, SweepSpec, LOWER_SLACK,
};
use fisr::{derive_all, Execution, Objective};

const ULP: f64 = 1.0 / (1u64 << 23) as f64;

#[test]
fn exhaustive_maxima_agree_with_predictions() {
    for row in derive_all().unwrap() {
        let a = compare_with_prediction(&row, Execution::Parallel).unwrap();
        assert!(
            a.within(),
            "{} k={}: predicted {} measured {} (argmax {:#x})",
            row.objective,
            row.k,
            a.predicted,
            a.measured,
            a.argmax
        );
        assert_eq!(a.lower, row.predicted_max_error - LOWER_SLACK);
        assert_eq!(a.upper, row.predicted_max_error + upper_slack(row.k));
    }
}

#[test]
fn newton_steps_never_overshoot() {
    for (magic, k) in [(0x5F37_5A86, 1), (0x5F37_5A86, 2), (0x5F37_ADD5, 2)] {
        for bits in (0x3F80_0000u32..0x4080_0000).step_by(7) {
            let x = f32::from_bits(bits);
            let y = f64::from(invsqrt_raw(x, magic, k));
            let bound = (1.0 / f64::from(x).sqrt()) * (1.0 + 4.0 * ULP);
            assert!(y <= bound, "{magic:#x} k={k} x={x}: {y} > {bound}");
        }
    }
}

#[test]
fn error_shrinks_with_each_step() {
    let maxima: Vec<f64> = (0..=2)
        .map(|k| sweep(&SweepSpec::exhaustive(0x5F37_5A86, k, ErrorKind::Relative)).unwrap().measured())
        .collect();
    assert!(maxima[0] > maxima[1] && maxima[1] > maxima[2], "{maxima:?}");
}

#[test]
fn full_range_sweep_matches_unit_interval() {
    let unit = sweep(&SweepSpec::exhaustive(0x5F37_5A86, 1, ErrorKind::Relative)).unwrap();
    let full = sweep(&SweepSpec {
        magic: 0x5F37_5A86,
        iterations: 1,
        domain: Domain::FullRangeRandom { count: 200_000, seed: 11 },
        error_kind: ErrorKind::Relative,
    })
    .unwrap();
    assert!(full.measured() <= unit.measured() + ULP, "{} vs {}", full.measured(), unit.measured());
    assert!(full.measured() > unit.measured() - 1e-5);
}

#[test]
fn parallel_and_sequential_sweeps_agree() {
    for domain in [
        Domain::UnitIntervalExhaustive,
        Domain::UnitIntervalRandom { count: 50_000, seed: 3 },
        Domain::FullRangeRandom { count: 50_000, seed: 4 },
    ] {
        let spec = SweepSpec {
            magic: 0x5F37_642F,
            iterations: 1,
            domain,
            error_kind: ErrorKind::Both,
        };
        assert_eq!(
            sweep_with(&spec, Execution::Parallel).unwrap(),
            sweep_with(&spec, Execution::Sequential).unwrap()
        );
    }
}

#[test]
fn both_reports_each_kind() {
    let both = sweep(&SweepSpec::exhaustive(0x5F38_63F7, 0, ErrorKind::Both)).unwrap();
    let abs = sweep(&SweepSpec::exhaustive(0x5F38_63F7, 0, ErrorKind::Absolute)).unwrap();
    assert_eq!(both.max_abs_of_absolute_error, abs.measured());
    assert_eq!(both.samples, 1 << 24);
    assert_eq!(both.rng_seed(), None);
}

#[test]
fn invalid_specs_are_rejected() {
    let mut spec = SweepSpec::exhaustive(0x5F37_5A86, 1, ErrorKind::Relative);
    spec.domain = Domain::FullRangeRandom { count: 0, seed: 1 };
    assert!(sweep(&spec).is_err());
    spec.domain = Domain::UnitIntervalExhaustive;
    spec.magic = 0x5F7F_FFFF;
    assert!(sweep(&spec).is_err());
}

#[test]
fn objective_maps_to_error_kind() {
    assert_eq!(ErrorKind::from(Objective::Absolute), ErrorKind::Absolute);
    assert_eq!(ErrorKind::from(Objective::Relative), ErrorKind::Relative);
}
