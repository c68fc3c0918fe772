//! Closed-form description of the seed and its Newton-Raphson corrections.
//!
//! On the reduced interval `x~ in [1, 4)` the integer seed is an exact
//! three-piece linear function of `x~` whose breakpoint `t` is fixed by
//! the magic constant:
//!
//! ```text
//! y0(x, t) = -x/4  + 3/4 + t/8    on [1, 2)
//!          = -x/8  + 1/2 + t/8    on [2, t)
//!          = -x/16 + 1/2 + t/16   on [t, 4)
//! t = 2 + 4 m_R + 2 mu_x / N_m
//! ```
//!
//! where `mu_x` is the parity of the input mantissa. Replacing the parity by
//! 1 gives the smooth model `y00`, off by at most `1 / (2 N_m)`.
//!
//! Everything here is evaluated in `f64`. Domain checks accept the closed
//! interval `x~ in [1, 4]` and `t in [2, 4]` so that endpoint values can be
//! taken as limits.

use crate::error::{KernelError, ModelError};
use crate::float_bits::{decode, MANTISSA_SCALE};
use crate::kernel::check_seed_preconditions;

const N_M: f64 = MANTISSA_SCALE as f64;

/// Base of every valid constant: `N_m * (63 + 127)`.
pub const MAGIC_BASE: u32 = 1_593_835_520;

/// Which parity correction to use when mapping `R` to `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// `mu = 0`, inputs with even mantissa.
    Even,
    /// `mu = 1`, inputs with odd mantissa.
    Odd,
    /// `mu = 1` for every input: the smooth approximation `y00`.
    Smooth,
}

/// A valid magic constant together with its `t` parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedParam {
    pub magic: u32,
    /// `m_R`, in `[0, 1/2)`.
    pub mantissa_frac: f64,
}

impl SeedParam {
    pub fn new(magic: u32) -> Result<Self, KernelError> {
        check_seed_preconditions(magic)?;
        let repr = decode(magic).expect("checked above");
        Ok(Self {
            magic,
            mantissa_frac: repr.mantissa_frac(),
        })
    }

    pub fn exponent(&self) -> i32 {
        63
    }

    pub fn t(&self, parity: Parity) -> f64 {
        let mu = match parity {
            Parity::Even => 0.0,
            Parity::Odd | Parity::Smooth => 1.0,
        };
        2.0 + 4.0 * self.mantissa_frac + 2.0 * mu / N_M
    }

    pub fn t_even(&self) -> f64 {
        self.t(Parity::Even)
    }

    pub fn t_odd(&self) -> f64 {
        self.t(Parity::Odd)
    }
}

/// `t` for a magic constant.
pub fn t_from_r(magic: u32, parity: Parity) -> Result<f64, KernelError> {
    Ok(SeedParam::new(magic)?.t(parity))
}

/// Magic constant for a breakpoint `t in (2, 4)`:
/// `R = N_m (e_R + B) + round(N_m (t - 2) / 4 - 1/2)`, ties rounded up.
pub fn r_from_t(t: f64) -> Result<u32, ModelError> {
    if !(t > 2.0 && t < 4.0) {
        return Err(ModelError::TOutOfDomain(t));
    }
    let offset = round_half_up(0.25 * N_M * (t - 2.0) - 0.5);
    Ok(MAGIC_BASE + offset as u32)
}

fn round_half_up(v: f64) -> f64 {
    (v + 0.5).floor()
}

/// Piece of the reduced interval an input falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// `[1, 2)`
    I,
    /// `[2, t]`
    II,
    /// `(t, 4)`
    III,
}

impl Region {
    pub fn classify(x_tilde: f64, t: f64) -> Self {
        if x_tilde < 2.0 {
            Region::I
        } else if x_tilde <= t {
            Region::II
        } else {
            Region::III
        }
    }
}

fn check_domain(x_tilde: f64, t: f64) -> Result<(), ModelError> {
    if !(1.0..=4.0).contains(&x_tilde) {
        return Err(ModelError::XOutOfDomain(x_tilde));
    }
    if !(2.0..=4.0).contains(&t) {
        return Err(ModelError::TOutOfDomain(t));
    }
    Ok(())
}

/// Value of the linear piece for `region`, with no domain checks.
#[inline]
pub fn seed_branch(region: Region, x_tilde: f64, t: f64) -> f64 {
    match region {
        Region::I => -0.25 * (x_tilde - 0.5 * t - 3.0),
        Region::II => -0.125 * (x_tilde - t - 4.0),
        Region::III => -0.0625 * (x_tilde - t - 8.0),
    }
}

#[inline]
fn y00_unchecked(x_tilde: f64, t: f64) -> f64 {
    seed_branch(Region::classify(x_tilde, t), x_tilde, t)
}

/// The smooth piecewise-linear seed model `y00(x~, t)`.
pub fn y00(x_tilde: f64, t: f64) -> Result<f64, ModelError> {
    check_domain(x_tilde, t)?;
    Ok(y00_unchecked(x_tilde, t))
}

/// Exact seed for a single-precision `x~ in [1, 4)`.
///
/// The breakpoint is `t_even` or `t_odd` depending on the parity of the
/// mantissa of `x~`. All terms are dyadic rationals with few significant
/// bits, so the `f64` result is exact.
pub fn y0_exact(x_tilde: f32, t_even: f64, t_odd: f64) -> f64 {
    debug_assert!((1.0..4.0).contains(&x_tilde));
    let t = if x_tilde.to_bits() & 1 == 0 {
        t_even
    } else {
        t_odd
    };
    let x = f64::from(x_tilde);
    if x < 2.0 {
        -0.25 * x + 0.75 + 0.125 * t
    } else if x < t {
        -0.125 * x + 0.5 + 0.125 * t
    } else {
        -0.0625 * x + 0.5 + 0.0625 * t
    }
}

/// Relative error after one Newton-Raphson step given the error before it:
/// `-d^2 (3 + d) / 2`.
#[inline]
pub fn nr_error(delta_prev: f64) -> f64 {
    -0.5 * delta_prev * delta_prev * (3.0 + delta_prev)
}

/// `y0k`: the smooth seed followed by `k` exact Newton-Raphson steps
/// `y <- y (3 - y^2 x) / 2`.
pub fn y0k(x_tilde: f64, t: f64, k: u32) -> Result<f64, ModelError> {
    check_domain(x_tilde, t)?;
    let mut y = y00_unchecked(x_tilde, t);
    for _ in 0..k {
        y = 0.5 * y * (3.0 - y * y * x_tilde);
    }
    Ok(y)
}

#[inline]
fn relative_error_unchecked(x_tilde: f64, t: f64, k: u32) -> f64 {
    let mut d = x_tilde.sqrt() * y00_unchecked(x_tilde, t) - 1.0;
    for _ in 0..k {
        d = nr_error(d);
    }
    d
}

/// Relative error `sqrt(x~) y0k(x~, t) - 1`, propagated through
/// [`nr_error`] for `k >= 1`.
pub fn relative_error(x_tilde: f64, t: f64, k: u32) -> Result<f64, ModelError> {
    check_domain(x_tilde, t)?;
    Ok(relative_error_unchecked(x_tilde, t, k))
}

/// Relative error computed directly from [`y0k`]; used to cross-check
/// [`relative_error`].
pub fn relative_error_direct(x_tilde: f64, t: f64, k: u32) -> Result<f64, ModelError> {
    Ok(x_tilde.sqrt() * y0k(x_tilde, t, k)? - 1.0)
}

/// Absolute error `y0k(x~, t) - 1/sqrt(x~)`.
///
/// Evaluated as `relative_error / sqrt(x~)`, which avoids the cancellation
/// of the direct difference.
pub fn absolute_error(x_tilde: f64, t: f64, k: u32) -> Result<f64, ModelError> {
    check_domain(x_tilde, t)?;
    Ok(relative_error_unchecked(x_tilde, t, k) / x_tilde.sqrt())
}

/// Absolute error computed as the plain difference `y0k - 1/sqrt(x~)`.
pub fn absolute_error_direct(x_tilde: f64, t: f64, k: u32) -> Result<f64, ModelError> {
    Ok(y0k(x_tilde, t, k)? - 1.0 / x_tilde.sqrt())
}

/// Kind of a candidate extremum of the zeroth-order error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    /// Stationary point of the branch on `region`; the branches are concave
    /// so these are local maxima.
    InteriorMax(Region),
    /// An endpoint of one of the regions.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub location: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

/// Local maxima of the relative error `delta0` on each branch and its
/// values at the region endpoints `1, 2, t, 4`.
pub fn relative_extrema_k0(t: f64) -> Result<Vec<Extremum>, ModelError> {
    check_domain(1.0, t)?;
    let interior = [
        (
            (6.0 + t) / 6.0,
            -1.0 + 0.5 * (1.0 + t / 6.0).powf(1.5),
            Region::I,
        ),
        (
            (4.0 + t) / 3.0,
            -1.0 + 2.0 * 3f64.powf(-1.5) * (1.0 + t / 4.0).powf(1.5),
            Region::II,
        ),
        ((8.0 + t) / 3.0, -1.0 + 0.125 * ((8.0 + t) / 3.0).powf(1.5), Region::III),
    ];
    let mut out: Vec<Extremum> = interior
        .into_iter()
        .map(|(location, value, region)| Extremum {
            location,
            value,
            kind: ExtremumKind::InteriorMax(region),
        })
        .collect();
    out.extend(boundaries(t, |x| relative_error_unchecked(x, t, 0)));
    Ok(out)
}

/// Local maxima of the absolute error `Delta0` (at `2^(2/3)`, `2^(4/3)`
/// and `4`, independent of `t`) and its values at the region endpoints.
pub fn absolute_extrema_k0(t: f64) -> Result<Vec<Extremum>, ModelError> {
    check_domain(1.0, t)?;
    let cbrt2 = 2f64.cbrt();
    let interior = [
        (cbrt2 * cbrt2, 0.75 - 1.5 / cbrt2 + t / 8.0, Region::I),
        (2.0 * cbrt2, 0.5 - 0.75 * cbrt2 + t / 8.0, Region::II),
        (4.0, t / 16.0 - 0.25, Region::III),
    ];
    let mut out: Vec<Extremum> = interior
        .into_iter()
        .map(|(location, value, region)| Extremum {
            location,
            value,
            kind: ExtremumKind::InteriorMax(region),
        })
        .collect();
    out.extend(boundaries(t, |x| {
        relative_error_unchecked(x, t, 0) / x.sqrt()
    }));
    Ok(out)
}

fn boundaries(t: f64, f: impl Fn(f64) -> f64) -> impl Iterator<Item = Extremum> {
    [1.0, 2.0, t, 4.0].into_iter().map(move |x| Extremum {
        location: x,
        value: f(x),
        kind: ExtremumKind::Boundary,
    })
}

/// Derivative of the first-order absolute error `Delta1` with respect to
/// `x` on region I or II, as an explicit polynomial plus `x^(-3/2)` term.
/// Its roots locate the interior minima of `Delta1`.
pub fn abs_k1_stationarity(x: f64, t: f64, region: Region) -> f64 {
    let (t2, t3) = (t * t, t * t * t);
    let (x2, x3) = (x * x, x * x * x);
    let tail = 1.0 / (2.0 * x.powf(1.5));
    match region {
        Region::I => {
            -75.0 / 128.0 - 27.0 * t / 256.0 - 9.0 * t2 / 512.0 - t3 / 1024.0
                + tail
                + 27.0 * x / 64.0
                + 9.0 * t * x / 64.0
                + 3.0 * t2 * x / 256.0
                - 27.0 * x2 / 128.0
                - 9.0 * t * x2 / 256.0
                + x3 / 32.0
        }
        Region::II | Region::III => {
            -0.25 - 3.0 * t / 64.0 - 3.0 * t2 / 256.0 - t3 / 1024.0
                + tail
                + 3.0 * x / 32.0
                + 3.0 * t * x / 64.0
                + 3.0 * t2 * x / 512.0
                - 9.0 * x2 / 256.0
                - 9.0 * t * x2 / 1024.0
                + x3 / 256.0
        }
    }
}
