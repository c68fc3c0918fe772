//! Fast inverse square root with a free magic constant.
//!
//! * [`float_bits`]: exact decoding of positive normal `f32` values and the
//!   reduction of any input to `x~ in [1, 4)`.
//! * [`kernel`]: the integer-seed plus Newton-Raphson routine, strictly in
//!   single precision.
//! * [`model`]: the exact piecewise-linear description of the seed and the
//!   error functions of its corrections.
//! * [`optimizer`]: minimax-optimal magic constants for relative and
//!   absolute error after 0, 1 and 2 iterations.
//! * [`verifier`]: exhaustive and random sweeps of the kernel, bit-exact
//!   model checks and CSV error clouds.
//!
//! ```
//! use fisr::kernel::{invsqrt, KernelConfig};
//!
//! let cfg = KernelConfig::new(0x5F37_5A86, 2).unwrap();
//! let y = invsqrt(2.0, &cfg).unwrap();
//! assert!((y - 0.707_106_8).abs() < 1e-5);
//! ```

pub mod error;
pub mod float_bits;
pub mod kernel;
pub mod model;
pub mod optimizer;
pub mod par;
pub mod verifier;

pub use error::{FloatError, KernelError, ModelError, SolveError, VerifyError};
pub use kernel::{invsqrt, KernelConfig};
pub use optimizer::{derive_all, DerivationResult, Objective};
pub use par::Execution;
