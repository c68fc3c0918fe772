use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FloatError {
    #[error("bit pattern {0:#010x} is outside supported domain (positive normal floats only)")]
    OutsideDomain(u32),
    #[error("exponent {0} outside the normal range [-126, 127]")]
    ExponentOutOfRange(i32),
    #[error("mantissa {0:#x} does not fit in 23 bits")]
    MantissaOutOfRange(u32),
    #[error("scaling {value} by 2^{shift} leaves the normal range")]
    Range { value: f32, shift: i32 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error(transparent)]
    Input(#[from] FloatError),
    #[error("seed bit pattern {bits:#010x} for input {x} is out of range")]
    SeedOutOfRange { x: f32, bits: u32 },
    #[error(
        "magic constant {r:#010x} is outside the seed-model preconditions (needs e_R = 63, m_R < 1/2; got e_R = {exponent}, m_R = {mantissa_frac})"
    )]
    OutsidePreconditions {
        r: u32,
        exponent: i32,
        mantissa_frac: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("x~ = {0} is outside [1, 4]")]
    XOutOfDomain(f64),
    #[error("t = {0} is outside [2, 4]")]
    TOutOfDomain(f64),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("no sign change on [{a}, {b}]: f(a) = {fa}, f(b) = {fb}")]
    NoSignChange { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("residual is not finite at {x}")]
    NotFinite { x: f64 },
    #[error("bisection did not reach width {tol} within {iterations} iterations")]
    MaxIterations { tol: f64, iterations: usize },
    #[error("no interior minimum found in [{a}, {b}] for t = {t}")]
    NoInteriorMinimum { a: f64, b: f64, t: f64 },
    #[error("no balance root lies inside its validity interval")]
    NoValidCandidate,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
