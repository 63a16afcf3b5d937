use serde::Serialize;
use thiserror::Error;

/// Failure classes shared by every public operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ErrorKind {
    InvalidParams,
    PointOutsideBall,
    LogKernelCase,
    DegreeOverflow,
    SingularGram,
    BisectionNoConverge,
    QuadratureUnderResolved,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::InvalidParams => "InvalidParams",
            ErrorKind::PointOutsideBall => "PointOutsideBall",
            ErrorKind::LogKernelCase => "LogKernelCase",
            ErrorKind::DegreeOverflow => "DegreeOverflow",
            ErrorKind::SingularGram => "SingularGram",
            ErrorKind::BisectionNoConverge => "BisectionNoConverge",
            ErrorKind::QuadratureUnderResolved => "QuadratureUnderResolved",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[error("{}: {message}", kind.as_str())]
pub struct ToolkitError {
    pub kind: ErrorKind,
    pub message: String,
}

impl ToolkitError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::InvalidParams, message)
    }

    pub fn outside_ball(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::PointOutsideBall, message)
    }

    pub fn singular(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::SingularGram, message)
    }

    pub fn overflow(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::DegreeOverflow, message)
    }
}

pub type Result<T> = std::result::Result<T, ToolkitError>;
