use thiserror::Error;

use crate::encoders::EncodingName;
use crate::model::ModelError;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("clause limit of {cap} exceeded")]
    SizeAbort { cap: usize },
    #[error("encoding {0} is not available in this build")]
    UnsupportedEncoding(EncodingName),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("constraint {index}: {inner}")]
    Constraint {
        index: usize,
        inner: Box<EncodeError>,
    },
}

impl EncodeError {
    pub fn at(self, index: usize) -> EncodeError {
        match self {
            e @ EncodeError::Constraint { .. } => e,
            e => EncodeError::Constraint {
                index,
                inner: Box::new(e),
            },
        }
    }

    /// True when the root cause is the clause cap.
    pub fn is_size_abort(&self) -> bool {
        match self {
            EncodeError::SizeAbort { .. } => true,
            EncodeError::Constraint { inner, .. } => inner.is_size_abort(),
            _ => false,
        }
    }
}
