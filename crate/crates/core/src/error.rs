use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("coverage gap: {0}")]
    Coverage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("grading modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
}

pub type Result<T> = std::result::Result<T, Error>;
