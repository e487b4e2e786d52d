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

//! Fast diagram sums for bosonic bath influence functionals, and the
//! Monte Carlo engines for spin-boson dynamics built on them.

pub mod bench;
pub mod config;
pub mod dyson;
pub mod error;
pub mod hafnian;
pub mod inchworm;
pub mod linked;
pub mod matrix;
pub mod model;
pub mod pairings;
pub mod parallel;
pub mod sampling;
pub mod series;
pub mod system;

pub use error::{Error, Result};
pub use hafnian::{hafnian_ie, rectangular_box_ie, ExclusionWorkspace};
pub use linked::{rounded_box, rounded_box_with, SegmentCache};
pub use matrix::CorrelationMatrix;
pub use parallel::Execution;
pub use model::{SpinBoson, SpinBosonParams};
pub use system::Mat2;
