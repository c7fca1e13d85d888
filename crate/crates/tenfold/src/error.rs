use thiserror::Error;

/// Errors raised anywhere in the classification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian: ||h - h^dag|| = {norm:.3e} exceeds {bound:.3e}")]
    NotHermitian { norm: f64, bound: f64 },

    #[error("matrix is not unitary: ||u^dag u - I|| = {norm:.3e}")]
    NotUnitary { norm: f64 },

    #[error("antiunitary {name} is not an involution: U conj(U) is not a scalar (off-scalar norm {norm:.3e})")]
    NotInvolution { name: String, norm: f64 },

    #[error("antiunitary {name} has a nonreal square {re:+.6}{im:+.6}i; the core is inconsistent")]
    NonrealSquare { name: String, re: f64, im: f64 },

    #[error("isotypic splitting failed after {0} probes; try a different seed")]
    RetryExhausted(usize),

    #[error("integer reconciliation failed: {0}")]
    Reconciliation(String),

    #[error("not equivariant-factorizable: nearest pure tensor residual {residual:.3e}")]
    NotFactorizable { residual: f64 },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("the Hamiltonian space is empty")]
    EmptySpace,

    #[error("schema error at {field}: {message}")]
    Schema { field: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema { field: field.into(), message: message.into() }
    }

    pub fn structural(message: impl Into<String>) -> Self {
        Error::Structural(message.into())
    }

    /// Process exit code under the CLI contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema { .. } | Error::Io(_) => 2,
            Error::EmptySpace => 4,
            _ => 3,
        }
    }
}
