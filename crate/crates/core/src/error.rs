use thiserror::Error;

/// Errors raised by the toolkit. Every variant is a domain error: the input
/// was understood but violates a precondition of the requested operation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{n} qubits exceeds the configured cap of {cap}")]
    QubitCapExceeded { n: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized: squared norm {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("operator is not Hermitian: max entrywise deviation {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("trace {trace} differs from 1")]
    TraceNotOne { trace: f64 },

    #[error("operator is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid Pauli word: {0}")]
    InvalidWord(String),

    #[error("expectation value has imaginary residue {imag:e}")]
    ImaginaryResidue { imag: f64 },

    #[error("estimated work {cost} exceeds the budget of {budget}")]
    WorkBudgetExceeded { cost: u128, budget: u128 },

    #[error("invalid measurement setting: norm {norm}")]
    InvalidSetting { norm: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("hypotheses violated: {0}")]
    HypothesesViolated(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::QubitCapExceeded { .. } => "qubit_cap_exceeded",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotNormalized { .. } => "not_normalized",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::TraceNotOne { .. } => "trace_not_one",
            Error::NotPositive { .. } => "not_positive",
            Error::InvalidPartition(_) => "invalid_partition",
            Error::InvalidWord(_) => "invalid_word",
            Error::ImaginaryResidue { .. } => "imaginary_residue",
            Error::WorkBudgetExceeded { .. } => "work_budget_exceeded",
            Error::InvalidSetting { .. } => "invalid_setting",
            Error::InvalidParameters(_) => "invalid_parameters",
            Error::HypothesesViolated(_) => "hypotheses_violated",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Precondition(_) => "precondition",
            Error::Consistency(_) => "consistency",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
