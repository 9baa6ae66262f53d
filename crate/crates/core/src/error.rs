// Copyright 2026 The behaviorlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A malformed input row. `line` is 1-based and counts the header.
    #[error("{path}: line {line}, column `{column}`: {message}")]
    Parse {
        path: String,
        line: u64,
        column: String,
        message: String,
    },

    #[error("{path}: expected header `{expected}`, found `{found}`")]
    Header {
        path: String,
        expected: String,
        found: String,
    },

    /// A behavior file that parsed as JSON but does not fit the record schema
    /// (or the mode it was handed to).
    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("item kind mismatch: expected {expected}, found {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("pattern must contain at least one item")]
    EmptyPattern,

    #[error("support is undefined over an empty dataset")]
    EmptyDataset,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("duplicate person ids: {}", .0.join(", "))]
    DuplicateIds(Vec<String>),

    #[error("person id universes differ; orphaned ids: {}", .0.join(", "))]
    OrphanIds(Vec<String>),

    #[error("oracle size guard exceeded: {0}")]
    OracleGuard(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        path: &str,
        line: u64,
        column: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            column: column.into(),
            message: message.into(),
        }
    }
}
