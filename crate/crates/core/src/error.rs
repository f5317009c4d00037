use thiserror::Error;

/// Errors raised by the algebraic and path-construction routines.
///
/// Every variant names the violated precondition so that the command-line
/// driver can report it in machine-readable form.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("decoration {decoration} outside the alphabet 1..={max}")]
    DecorationOutOfRange { decoration: u32, max: u32 },

    #[error("basis size {count} exceeds the enumeration cap {cap}")]
    BasisTooLarge { count: usize, cap: usize },

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("element {0} is not in the truncated basis")]
    NotInBasis(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("exponent {gamma} has integer inverse; the extension requires 1/gamma not in N")]
    IntegerInverse { gamma: String },

    #[error("exponent lattice violation: 1 is a non-negative integer combination of {gammas}")]
    ExponentLattice { gammas: String },

    #[error("level overflow: cannot extend level {level} beyond truncation {max}")]
    LevelOverflow { level: usize, max: usize },

    #[error("permutation table requested for k = {k}, above the cap {cap}")]
    PermutationCap { k: usize, cap: usize },

    #[error("finite increment does not vanish: residual {residual:e} for {element} exceeds {tolerance:e}")]
    DeltaNotVanishing {
        element: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("depth mismatch: {left} vs {right}")]
    DepthMismatch { left: u32, right: u32 },

    #[error("construction configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("time-dependent characters are not supported by the extraction/contraction route")]
    TimeDependentCharacter,

    #[error("analytic bound violated for {element}: weighted constant {constant:e} exceeds {limit:e}")]
    BoundViolation { element: String, constant: f64, limit: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Short stable identifier of the violated precondition.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DecorationOutOfRange { .. } => "decoration_out_of_range",
            Error::BasisTooLarge { .. } => "basis_too_large",
            Error::Parse { .. } => "parse",
            Error::BasisMismatch(_) => "basis_mismatch",
            Error::NotInBasis(_) => "not_in_basis",
            Error::Precondition(_) => "precondition",
            Error::IntegerInverse { .. } => "integer_inverse_exponent",
            Error::ExponentLattice { .. } => "exponent_lattice",
            Error::LevelOverflow { .. } => "level_overflow",
            Error::PermutationCap { .. } => "permutation_cap",
            Error::DeltaNotVanishing { .. } => "delta_not_vanishing",
            Error::DepthMismatch { .. } => "depth_mismatch",
            Error::ConfigMismatch(_) => "config_mismatch",
            Error::TimeDependentCharacter => "time_dependent_character",
            Error::BoundViolation { .. } => "bound_violation",
            Error::Invalid(_) => "invalid_input",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
