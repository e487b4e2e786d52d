// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A diagram sum was requested for an order that has no pairings.
    #[error("invalid order m = {m}: {reason}")]
    InvalidOrder { m: usize, reason: &'static str },

    /// The request would exceed a configured size cap.
    #[error("capacity exceeded: {what} at m = {m} (cap {cap}){detail}")]
    Capacity {
        what: &'static str,
        m: usize,
        cap: usize,
        detail: String,
    },

    /// Contour times supplied out of order.
    #[error("contour points out of order: {0} > {1}")]
    Ordering(f64, f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("degenerate order distribution: {0}")]
    Degenerate(String),

    /// A table or cache entry was read before it was filled. Unreachable when
    /// the fill order is respected.
    #[error("internal sequencing error: {0}")]
    Sequencing(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for command-line front ends.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity { .. } => 3,
            Error::Io { .. } => 4,
            _ => 2,
        }
    }
}
