//! Exit codes and machine-readable diagnostics.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success; `classify`: Harnack |
//! | 1 | `classify`: not Harnack |
//! | 2 | `classify`: inconclusive |
//! | 64 | usage error, unparsable polynomial, degenerate support |
//! | 70 | a pipeline stage failed |
//! | 74 | file could not be read or written |

use std::path::Path;

use amoeba_core::Error;
use serde::Serialize;

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            kind: "usage",
            message: message.into(),
        }
    }

    pub fn pipeline(stage: &str, err: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_SOFTWARE,
            kind: "pipeline",
            message: format!("{stage}: {err}"),
        }
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_IO,
            kind: "io",
            message: format!("{}: {err}", path.display()),
        }
    }

    /// One JSON line for stderr.
    pub fn diagnostic(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. } | Error::Json(_) => Failure {
                code: EXIT_USAGE,
                kind: "parse",
                message: e.to_string(),
            },
            Error::EmptySupport | Error::DegenerateSupport => Failure {
                code: EXIT_USAGE,
                kind: "degenerate_support",
                message: e.to_string(),
            },
            Error::Parameter(_) => Failure::usage(e.to_string()),
            other => Failure::pipeline("pipeline", other),
        }
    }
}
