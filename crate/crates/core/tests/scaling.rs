use proptest::prelude::*;

use fisr::kernel::{invsqrt_raw, KernelConfig};
use fisr::verifier::{check_scaling_pair, in_safe_range, verify_scaling, ScalingOutcome};

const MAGICS: [u32; 5] = [0x5F37_642F, 0x5F37_5A86, 0x5F38_63F7, 0x5F37_E75A, 0x5F37_ADD5];

proptest! {
    #[test]
    fn power_of_four_equivariance(
        bits in 0x0100_0000u32..0x7F00_0000,
        n in -63i32..=63,
        which in 0usize..5,
        k in 0u32..=2,
    ) {
        let x = f32::from_bits(bits);
        prop_assume!(in_safe_range(x));
        let cfg = KernelConfig::new(MAGICS[which], k).unwrap();
        let outcome = check_scaling_pair(x, n, &cfg);
        prop_assert_ne!(outcome, ScalingOutcome::Violation);
    }

    #[test]
    fn halving_step_matches_quarter_input(bits in 0x3F80_0000u32..0x4080_0000, k in 0u32..=2) {
        let x = f32::from_bits(bits);
        let y = invsqrt_raw(x, 0x5F37_5A86, k);
        prop_assert_eq!(invsqrt_raw(x * 4.0, 0x5F37_5A86, k).to_bits(), (y * 0.5).to_bits());
        prop_assert_eq!(invsqrt_raw(x * 0.25, 0x5F37_5A86, k).to_bits(), (y * 2.0).to_bits());
    }
}

#[test]
fn seeded_scaling_trials_have_no_violations() {
    for (magic, k) in [(0x5F37_5A86, 1), (0x5F37_ADD5, 2), (0x5F37_642F, 0)] {
        let rep = verify_scaling(magic, k, 100_000, 42).unwrap();
        assert_eq!(rep.trials, 100_000);
        assert_eq!(rep.violations, 0, "{magic:#x}: {:x?}", rep.first_violations);
    }
}

#[test]
fn scaling_report_is_reproducible() {
    assert_eq!(verify_scaling(0x5F37_5A86, 2, 1000, 9).unwrap(), verify_scaling(0x5F37_5A86, 2, 1000, 9).unwrap());
}
