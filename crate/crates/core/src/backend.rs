//! Failure type shared by every pluggable model backend.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("backend `{backend}` failed: {detail}")]
pub struct BackendFailure {
    pub backend: String,
    pub detail: String,
}

impl BackendFailure {
    pub fn new(backend: impl Into<String>, detail: impl Into<String>) -> Self {
        BackendFailure { backend: backend.into(), detail: detail.into() }
    }
}
