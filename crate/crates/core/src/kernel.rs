//! The bit-trick inverse square root with a free magic constant.
//!
//! Arithmetic is plain `f32` with the default round-to-nearest-even mode.
//! Rust never contracts `a * b + c` into a fused multiply-add on its own,
//! so each step rounds exactly where the reference C code does.

use crate::error::KernelError;
use crate::float_bits::{decode, decode_f32};

/// The classic constant `0x5f3759df`.
pub const CLASSIC_MAGIC: u32 = 0x5F37_59DF;

/// A magic constant and a Newton-Raphson iteration count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelConfig {
    magic: u32,
    iterations: u32,
    within_preconditions: bool,
}

impl KernelConfig {
    /// Config for model-backed use: `R` must satisfy `e_R = 63`, `m_R < 1/2`.
    pub fn new(magic: u32, iterations: u32) -> Result<Self, KernelError> {
        check_seed_preconditions(magic)?;
        Ok(Self {
            magic,
            iterations,
            within_preconditions: true,
        })
    }

    /// Accepts any constant. [`KernelConfig::within_preconditions`] reports
    /// whether the analytic seed model applies.
    pub fn relaxed(magic: u32, iterations: u32) -> Self {
        Self {
            magic,
            iterations,
            within_preconditions: check_seed_preconditions(magic).is_ok(),
        }
    }

    pub fn classic() -> Self {
        Self::new(CLASSIC_MAGIC, 2).expect("classic constant satisfies the preconditions")
    }

    pub fn magic(&self) -> u32 {
        self.magic
    }

    pub fn iterations(&self) -> u32 {
        self.iterations
    }

    pub fn within_preconditions(&self) -> bool {
        self.within_preconditions
    }

    pub fn with_iterations(self, iterations: u32) -> Self {
        Self { iterations, ..self }
    }
}

/// Checks `e_R = 63` and `m_R < 1/2` for the float whose bits are `R`.
pub fn check_seed_preconditions(magic: u32) -> Result<(), KernelError> {
    let outside = |exponent, mantissa_frac| KernelError::OutsidePreconditions {
        r: magic,
        exponent,
        mantissa_frac,
    };
    let repr = decode(magic).map_err(|_| outside(i32::MIN, f64::NAN))?;
    if repr.exponent() != 63 || repr.mantissa_int() >= 1 << 22 {
        return Err(outside(repr.exponent(), repr.mantissa_frac()));
    }
    Ok(())
}

/// The integer seed without any checks: `f(R - (I_x >> 1))`.
#[inline(always)]
pub fn seed_raw(x: f32, magic: u32) -> f32 {
    f32::from_bits(magic.wrapping_sub(x.to_bits() >> 1))
}

/// The zeroth approximation `y0 = f(R - floor(I_x / 2))`.
pub fn seed_bits(x: f32, magic: u32) -> Result<f32, KernelError> {
    decode_f32(x)?;
    let bits = magic.wrapping_sub(x.to_bits() >> 1);
    if decode(bits).is_err() || magic < (x.to_bits() >> 1) {
        return Err(KernelError::SeedOutOfRange { x, bits });
    }
    Ok(f32::from_bits(bits))
}

/// One Newton-Raphson correction, `y * (1.5 - half_x * y * y)`, evaluated
/// left to right in single precision.
#[inline(always)]
pub fn newton_step(y: f32, half_x: f32) -> f32 {
    y * (1.5 - half_x * y * y)
}

/// The kernel without domain checks; used by the sweeps.
#[inline(always)]
pub fn invsqrt_raw(x: f32, magic: u32, iterations: u32) -> f32 {
    let half_x = 0.5 * x;
    let mut y = seed_raw(x, magic);
    for _ in 0..iterations {
        y = newton_step(y, half_x);
    }
    y
}

/// Fast inverse square root of a positive normal `x`.
pub fn invsqrt(x: f32, cfg: &KernelConfig) -> Result<f32, KernelError> {
    let half_x = 0.5 * x;
    let mut y = seed_bits(x, cfg.magic)?;
    for _ in 0..cfg.iterations {
        y = newton_step(y, half_x);
    }
    Ok(y)
}

/// `0x5f3759df` with two iterations.
pub fn invsqrt_classic(x: f32) -> f32 {
    invsqrt_raw(x, CLASSIC_MAGIC, 2)
}
