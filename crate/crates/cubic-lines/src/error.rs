use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("integer overflow in {context}")]
    Overflow { context: &'static str },

    #[error(
        "estimated work of {estimate} elementary operations exceeds the budget of {limit}; \
         raise --max-ops or shrink the job"
    )]
    WorkBudget { estimate: u128, limit: u128 },

    #[error(
        "estimated memory of {estimate} bytes exceeds the budget of {limit}; \
         raise --max-bytes or shrink the job"
    )]
    MemoryBudget { estimate: u128, limit: u128 },

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error(
        "imaginary residue {imag:.3e} exceeds {tol:.3e} * |{value:.3e}| in {context}; \
         the computation is suspect"
    )]
    ImaginaryResidue {
        context: &'static str,
        imag: f64,
        value: f64,
        tol: f64,
    },

    #[error(
        "local factor at p = {p} is non-positive ({value:.6e}); \
         possible local obstruction or truncation failure"
    )]
    NonpositiveLocalFactor { p: u64, value: f64 },

    #[error("worker pool: {0}")]
    Pool(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
