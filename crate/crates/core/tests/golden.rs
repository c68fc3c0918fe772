use fisr::kernel::{invsqrt, invsqrt_raw, KernelConfig, CLASSIC_MAGIC};

const GOLDEN: &str = include_str!("data/golden_5f3759df_k2.csv");

fn vectors() -> Vec<(u32, u32)> {
    GOLDEN
        .lines()
        .skip(1)
        .map(|l| {
            let (x, y) = l.split_once(',').unwrap();
            (u32::from_str_radix(x, 16).unwrap(), u32::from_str_radix(y, 16).unwrap())
        })
        .collect()
}

#[test]
fn classic_constant_two_steps_bit_exact() {
    let v = vectors();
    assert_eq!(v.len(), 1000);
    let cfg = KernelConfig::relaxed(CLASSIC_MAGIC, 2);
    for (x, y) in v {
        let got = invsqrt(f32::from_bits(x), &cfg).unwrap();
        assert_eq!(got.to_bits(), y, "x = {:e} ({x:#010x})", f32::from_bits(x));
        assert_eq!(invsqrt_raw(f32::from_bits(x), CLASSIC_MAGIC, 2).to_bits(), y);
    }
}
