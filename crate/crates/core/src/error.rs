use thiserror::Error;

pub type Result<T> = std::result::Result<T, ChainError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("chain length must be at least 1, got {0}")]
    InvalidLength(usize),

    #[error("parameter `{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coefficient denominator `{which}` is near zero (|value| = {magnitude:.3e})")]
    NearSingularCoefficient { which: &'static str, magnitude: f64 },

    #[error("next-nearest-neighbour coupling vanishes; gamma is undefined")]
    BZero,

    #[error("nearest-neighbour coupling vanishes; use the a = 0 limit")]
    AZero,

    #[error("|sin 2α| = {0:.3e} is below the degenerate-angle threshold")]
    DegenerateAngle(f64),

    #[error("removable singularity: |λ + 2b| = {0:.3e}")]
    RemovableSingularity(f64),

    #[error("angle with cosine too close to 1 (|1 - cos| = {0:.3e})")]
    DegenerateCosine(f64),

    #[error("tangent argument within {distance:.3e} of a pole")]
    PoleProximity { distance: f64 },

    #[error("x is not real for this alpha (Im x = {0:.3e})")]
    InadmissibleAlpha(f64),

    #[error("cos 2α is not real (Im = {0:.3e})")]
    NonRealCosine(f64),

    #[error("branch matching is ambiguous near gamma = {gamma}")]
    AmbiguousBranch { gamma: f64 },

    #[error("grid too coarse to localize a crossing of curves {first} and {second} near gamma = {gamma}")]
    GridTooCoarse { first: usize, second: usize, gamma: f64 },

    #[error("inverse iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("ansatz modes are degenerate: {0}")]
    DegenerateModes(&'static str),

    #[error("matrix dimension {n} exceeds the dense limit {max}")]
    SizeLimit { n: usize, max: usize },

    #[error("no root of the tangent equation found near x = {0}")]
    RootNotFound(f64),
}
