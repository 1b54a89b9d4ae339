use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("grid size {0} must be a power of two and at least 8")]
    InvalidGridSize(usize),
    #[error("domain length must be positive, got {0}")]
    InvalidLength(f64),
    #[error("array length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("amplitudes have (near-)zero norm")]
    ZeroNorm,
    #[error("NaN encountered in density values")]
    NanDensity,
    #[error("joint density value {0} is negative beyond tolerance")]
    NegativeDensity(f64),
    #[error("matrix must be positive definite")]
    NotPositiveDefinite,
    #[error("matrix entry ({0},{1}) breaks symmetry")]
    NotSymmetric(usize, usize),
    #[error("state index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("sigma2 must be positive, got {0}")]
    InvalidSigma(f64),
    #[error("packet violates anti-aliasing guard: |k0| + 4/sigma = {required} exceeds Nyquist {nyquist}")]
    AliasingGuard { required: f64, nyquist: f64 },
    #[error("packet leaves the domain at t = {time}: needs half-width {required}, domain half-length {available}")]
    OutOfDomain {
        time: f64,
        required: f64,
        available: f64,
    },
    #[error("fully degenerate spectrum: eta = 0")]
    DegenerateSpectrum,
    #[error("resonant system (omega1 = omega2): golden-rule approximation is singular")]
    Resonant,
    #[error("basis states are not orthogonal: |<psi1|psi2>| = {0}")]
    NonOrthogonalBasis(f64),
    #[error("fermion factors are (near-)identical (|overlap| = {0}): antisymmetrization degenerates")]
    PauliDegenerate(f64),
    #[error("entropy series needs at least {min} samples, got {got}")]
    SeriesTooShort { min: usize, got: usize },
    #[error("invalid time interval: t1 = {t1} must exceed t0 = {t0}")]
    InvalidInterval { t0: f64, t1: f64 },
    #[error("scenario needs at least {min} steps, got {got}")]
    TooFewSteps { min: usize, got: usize },
    #[error("eigendecomposition failed to converge")]
    EigenNoConvergence,
}
