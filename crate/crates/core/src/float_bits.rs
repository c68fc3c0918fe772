//! Bit-level view of positive normal single-precision floats.
//!
//! A positive normal `x = (1 + m) * 2^e` is stored as the integer
//! `I = N_m * E + M` with `E = e + 127` and `M = N_m * m`, `N_m = 2^23`.
//! Every operation here is an exponent shift or a bit-field extraction,
//! so nothing in this module rounds.

use crate::error::FloatError;

/// Mantissa scale `N_m = 2^23`.
pub const MANTISSA_SCALE: u32 = 1 << 23;
/// Exponent bias `B`.
pub const EXPONENT_BIAS: i32 = 127;

const MANTISSA_MASK: u32 = MANTISSA_SCALE - 1;
const SIGN_BIT: u32 = 1 << 31;

/// Decomposition of a positive normal float.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FloatRepr {
    sign: u8,
    biased_exponent: u32,
    mantissa: u32,
}

impl FloatRepr {
    /// Builds a representation from an unbiased exponent and the 23-bit
    /// mantissa integer.
    pub fn new(exponent: i32, mantissa: u32) -> Result<Self, FloatError> {
        let biased = exponent + EXPONENT_BIAS;
        if !(1..=254).contains(&biased) {
            return Err(FloatError::ExponentOutOfRange(exponent));
        }
        if mantissa > MANTISSA_MASK {
            return Err(FloatError::MantissaOutOfRange(mantissa));
        }
        Ok(Self {
            sign: 0,
            biased_exponent: biased as u32,
            mantissa,
        })
    }

    pub fn sign(&self) -> u8 {
        self.sign
    }

    /// `E_x`, in `[1, 254]`.
    pub fn biased_exponent(&self) -> u32 {
        self.biased_exponent
    }

    /// `e_x = E_x - B`.
    pub fn exponent(&self) -> i32 {
        self.biased_exponent as i32 - EXPONENT_BIAS
    }

    /// `M_x`, the 23-bit mantissa integer.
    pub fn mantissa_int(&self) -> u32 {
        self.mantissa
    }

    /// `m_x = M_x / N_m`, exact in `f64`.
    pub fn mantissa_frac(&self) -> f64 {
        f64::from(self.mantissa) / f64::from(MANTISSA_SCALE)
    }

    /// The integer interpretation `I_x`.
    pub fn bits(&self) -> u32 {
        encode(self)
    }

    /// `(1 + m_x) * 2^e_x`, exact.
    pub fn value(&self) -> f32 {
        f32::from_bits(self.bits())
    }

    /// Same value widened to `f64` through the field formula rather than
    /// through the bit cast.
    pub fn value_f64(&self) -> f64 {
        (1.0 + self.mantissa_frac()) * pow2(self.exponent())
    }
}

/// Splits a bit pattern into its fields. Only positive normals are accepted.
pub fn decode(bits: u32) -> Result<FloatRepr, FloatError> {
    if bits & SIGN_BIT != 0 {
        return Err(FloatError::OutsideDomain(bits));
    }
    let biased = bits >> 23;
    if biased == 0 || biased == 255 {
        return Err(FloatError::OutsideDomain(bits));
    }
    Ok(FloatRepr {
        sign: 0,
        biased_exponent: biased,
        mantissa: bits & MANTISSA_MASK,
    })
}

/// Packs the fields back into `I_x = s * 2^31 + E_x * N_m + M_x`.
pub fn encode(repr: &FloatRepr) -> u32 {
    (u32::from(repr.sign) << 31) | (repr.biased_exponent << 23) | repr.mantissa
}

/// Convenience wrapper over [`decode`] for a float value.
pub fn decode_f32(x: f32) -> Result<FloatRepr, FloatError> {
    decode(x.to_bits())
}

/// `x` reduced to `[1, 4)` by an even power of two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedInput {
    /// `x~ = 2^(-2n) x`, in `[1, 4)`.
    pub x_tilde: f32,
    /// Power-of-four shift, in `[-63, 63]`.
    pub n: i32,
    /// Exponent of `x~`: 0 on `[1, 2)`, 1 on `[2, 4)`.
    pub region_exponent: u8,
}

/// Maps a positive normal `x` onto `x~ in [1, 4)` with `x = x~ * 4^n`.
pub fn normalize(x: f32) -> Result<NormalizedInput, FloatError> {
    let repr = decode_f32(x)?;
    let e = repr.exponent();
    let n = e.div_euclid(2);
    let region_exponent = e.rem_euclid(2) as u8;
    let biased = (i32::from(region_exponent) + EXPONENT_BIAS) as u32;
    let x_tilde = f32::from_bits((biased << 23) | repr.mantissa_int());
    Ok(NormalizedInput {
        x_tilde,
        n,
        region_exponent,
    })
}

/// Undoes the output side of [`normalize`]: `y = y~ * 2^(-n)`.
///
/// The result must be a normal single-precision value; the shift is then
/// exact.
pub fn denormalize(y_tilde: f32, n: i32) -> Result<f32, FloatError> {
    if !(y_tilde.is_normal() && y_tilde > 0.0) {
        return Err(FloatError::OutsideDomain(y_tilde.to_bits()));
    }
    let e = y_tilde.to_bits() >> 23;
    let shifted = e as i64 - i64::from(n);
    if !(1..=254).contains(&shifted) {
        return Err(FloatError::Range { value: y_tilde, shift: -n });
    }
    Ok(f32::from_bits(((shifted as u32) << 23) | (y_tilde.to_bits() & MANTISSA_MASK)))
}

/// Multiplies a positive normal by `2^k`, returning `None` when the result
/// leaves the normal range.
pub fn scale_pow2(x: f32, k: i32) -> Option<f32> {
    let repr = decode_f32(x).ok()?;
    let biased = repr.biased_exponent() as i64 + i64::from(k);
    if (1..=254).contains(&biased) {
        Some(f32::from_bits(((biased as u32) << 23) | repr.mantissa_int()))
    } else {
        None
    }
}

/// `2^k` as an exact `f64` (valid for `|k| <= 1022`).
pub fn pow2(k: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&k));
    f64::from_bits(((k + 1023) as u64) << 52)
}

/// Bit range `[0x3F800000, 0x40800000)` covering every float in `[1, 4)`.
pub const UNIT_INTERVAL_BITS: std::ops::Range<u32> = 0x3F80_0000..0x4080_0000;

/// Smallest and one-past-largest bit patterns of positive normals.
pub const POSITIVE_NORMAL_BITS: std::ops::Range<u32> = 0x0080_0000..0x7F80_0000;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Independent field extraction through arithmetic instead of masks.
    fn fields_by_division(bits: u32) -> (u32, u32) {
        (bits / MANTISSA_SCALE, bits % MANTISSA_SCALE)
    }

    #[test]
    fn decode_one() {
        let r = decode(0x3F80_0000).unwrap();
        assert_eq!(r.biased_exponent(), 127);
        assert_eq!(r.exponent(), 0);
        assert_eq!(r.mantissa_int(), 0);
        assert_eq!(r.value(), 1.0);
    }

    #[test]
    fn decode_classic_constant() {
        let r = decode(0x5F37_59DF).unwrap();
        let (e, m) = fields_by_division(0x5F37_59DF);
        assert_eq!(r.biased_exponent(), e);
        assert_eq!(r.exponent(), 63);
        assert_eq!(r.mantissa_int(), 3_627_487);
        assert_eq!(r.mantissa_int(), m);
    }

    #[test]
    fn decode_pi() {
        let r = decode(0x4049_0FDB).unwrap();
        let (_, m) = fields_by_division(0x4049_0FDB);
        assert_eq!(r.exponent(), 1);
        assert_eq!(r.mantissa_frac(), f64::from(m) / 8_388_608.0);
        assert!((r.mantissa_frac() - 0.570_796_4).abs() < 1e-7);
        assert_eq!(r.value_f64(), f64::from(std::f32::consts::PI));
    }

    #[test]
    fn decode_rejects_outside_domain() {
        for bits in [
            0u32,
            0x0000_0001,
            0x007F_FFFF,
            0x7F80_0000,
            0x7FC0_0000,
            0xBF80_0000,
            0x8000_0000,
        ] {
            assert!(matches!(decode(bits), Err(FloatError::OutsideDomain(_))), "{bits:#x}");
        }
    }

    #[test]
    fn encode_examples() {
        assert_eq!(FloatRepr::new(0, 0).unwrap().bits(), 0x3F80_0000);
        assert_eq!(FloatRepr::new(63, 3_630_127).unwrap().bits(), 0x5F37_642F);
        assert_eq!(FloatRepr::new(63, 3_627_487).unwrap().bits(), 0x5F37_59DF);
    }

    #[test]
    fn encode_rejects_bad_fields() {
        assert!(FloatRepr::new(128, 0).is_err());
        assert!(FloatRepr::new(-127, 0).is_err());
        assert!(FloatRepr::new(0, 1 << 23).is_err());
    }

    #[test]
    fn normalize_examples() {
        let a = normalize(1.0).unwrap();
        assert_eq!((a.x_tilde, a.n, a.region_exponent), (1.0, 0, 0));
        let b = normalize(f32::MIN_POSITIVE).unwrap();
        assert_eq!((b.x_tilde, b.n), (1.0, -63));
        let c = normalize(48.0).unwrap();
        assert_eq!((c.x_tilde, c.n, c.region_exponent), (3.0, 2, 1));
        let d = normalize(f32::MAX).unwrap();
        assert_eq!(d.n, 63);
        assert!(d.x_tilde < 4.0 && d.x_tilde >= 2.0);
        assert!(normalize(-1.0).is_err());
        assert!(normalize(0.0).is_err());
    }

    #[test]
    fn denormalize_examples() {
        assert_eq!(denormalize(1.0, 0).unwrap(), 1.0);
        assert_eq!(denormalize(0.5, -1).unwrap(), 1.0);
        let y = 1.0f32 / 3.0f32.sqrt();
        // 1/(4*sqrt 3): an exponent shift of the same mantissa.
        assert_eq!(denormalize(y, 2).unwrap(), y / 4.0);
        assert!(denormalize(1.0, 127).is_err());
        assert!(denormalize(1.0, -128).is_err());
    }

    #[test]
    fn unit_interval_round_trip_exhaustive() {
        for bits in UNIT_INTERVAL_BITS {
            let r = decode(bits).unwrap();
            assert_eq!(encode(&r), bits);
            assert_eq!(r.value_f64(), f64::from(f32::from_bits(bits)));
        }
    }

    #[test]
    fn partition_of_exponents() {
        // x~ == 1 exactly for powers of four, otherwise region by exponent parity.
        for e in -126..=127 {
            let x = f32::from_bits(((e + 127) as u32) << 23);
            let nx = normalize(x).unwrap();
            if e % 2 == 0 {
                assert_eq!(nx.x_tilde, 1.0);
            } else {
                assert_eq!(nx.x_tilde, 2.0);
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip(bits in POSITIVE_NORMAL_BITS) {
            let r = decode(bits).unwrap();
            prop_assert_eq!(encode(&r), bits);
            prop_assert_eq!(FloatRepr::new(r.exponent(), r.mantissa_int()).unwrap(), r);
            prop_assert_eq!(r.value_f64(), f64::from(f32::from_bits(bits)));
        }

        #[test]
        fn normalization_is_exact(bits in POSITIVE_NORMAL_BITS) {
            let x = f32::from_bits(bits);
            let nx = normalize(x).unwrap();
            prop_assert!((1.0..4.0).contains(&nx.x_tilde));
            prop_assert!((-63..=63).contains(&nx.n));
            prop_assert_eq!(f64::from(nx.x_tilde) * pow2(2 * nx.n), f64::from(x));
            prop_assert_eq!(nx.region_exponent == 0, nx.x_tilde < 2.0);
            prop_assert_eq!(denormalize(nx.x_tilde, -2 * nx.n).unwrap(), x);
        }
    }
}
