use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the crate.
///
/// Soft conditions (a small spectral gap, a zero-area loop) are not errors;
/// they surface as boolean flags on the result structs that carry them.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Probability weight beyond a Fock cutoff exceeded its tolerance.
    #[error("truncation leakage {leaked:.3e} exceeds tolerance {tol:.3e} (cutoff {cutoff})")]
    Leakage { leaked: f64, tol: f64, cutoff: usize },

    /// A requested label does not fit inside the truncated space.
    #[error("cutoff too small: {0}")]
    Cutoff(String),

    /// A numerical procedure failed to converge: the eigensolver violated its
    /// residual bound, or an adiabatic study did not approach its reference.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A tracking seed is not an eigenstate of the family at the loop start.
    #[error("seed is not an eigenstate at the loop start (residual {residual:.3e}, bound {bound:.3e})")]
    InvalidSeed { residual: f64, bound: f64 },

    /// Eigenstate tracking lost its band (degeneracy or too-coarse loop).
    #[error("band tracking failed at node {node}: best overlap {max_overlap:.6} < 0.9")]
    BandCrossing { node: usize, max_overlap: f64 },

    /// Consecutive states in a holonomy chain were near-orthogonal.
    #[error("near-orthogonal overlap at segment {segment}: modulus {modulus:.3e}")]
    Overlap { segment: usize, modulus: f64 },

    /// The averaged phase factor of a mixed state has no defined argument.
    #[error("mixed-state visibility {modulus:.3e} vanishes; phase undefined")]
    VanishingVisibility { modulus: f64 },

    /// Berry phases are undefined at spectral degeneracies.
    #[error("degenerate parameters: {0}")]
    Degeneracy(String),

    /// Per-step unitarity drift exceeded its bound during propagation.
    #[error("time step too large: per-step norm drift {drift:.3e} exceeds {bound:.3e}")]
    StepSize { drift: f64, bound: f64 },

    /// A vector or matrix dimension did not match the expected space.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Two spaces cannot be composed by a tensor product.
    #[error("incompatible tensor factors: {0}")]
    TensorShape(String),

    /// An operator flagged (or required) Hermitian is not.
    #[error("matrix is not Hermitian: max |M - M^H| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    /// A state vector had (numerically) zero norm.
    #[error("cannot normalize a zero vector (norm {norm:.3e})")]
    Norm { norm: f64 },

    /// Malformed arguments that no other variant describes.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
