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

//! Execution policy for the data-parallel loops.
//!
//! Every parallel loop in the crate is an indexed map whose outputs are
//! collected in index order, and every reduction happens afterwards in that
//! order. Results therefore never depend on the number of worker threads.

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled and runs
    /// sequentially otherwise.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `(0..n).map(|i| f(state, i))` with one `init()` state per worker.
pub fn map_with<S, T, I, F>(exec: Execution, n: usize, init: I, f: F) -> Vec<T>
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> T + Sync + Send,
    T: Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && n > 1 {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map_init(&init, |s, i| f(s, i)).collect();
    }
    let _ = exec;
    let mut state = init();
    (0..n).map(|i| f(&mut state, i)).collect()
}

/// Sizes the global worker pool. Zero keeps the default (one worker per
/// core). Has no effect without the `parallel` feature.
pub fn configure_threads(threads: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        return rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| crate::error::Error::validation(format!("cannot size thread pool: {e}")));
    }
    let _ = threads;
    Ok(())
}
