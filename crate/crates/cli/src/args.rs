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

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_SEED: u64 = 2023;

/// Diagram sums and real-time dynamics for the spin-boson model.
#[derive(Debug, Parser)]
#[command(name = "diagsum", version, about)]
pub struct Cli {
    /// Directory for output files; relative `--output` paths resolve here.
    #[arg(long, global = true, env = "DIAGSUM_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sum over all pairings of a matrix read from a file.
    Hafnian(MatrixArgs),
    /// Sum over linked pairings of a matrix read from a file.
    LinkedSum(MatrixArgs),
    /// Bath correlation B(tau1, tau2) on a grid over the contour.
    Correlation(CorrelationArgs),
    /// <sigma_z(t)> from the bare Dyson series.
    Dqmc(DqmcArgs),
    /// <sigma_z(t)> from the inchworm equation.
    Inchworm(InchwormArgs),
    /// Wall-clock timings of the direct and inclusion-exclusion engines.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Ie,
    Direct,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    /// JSON (`[[[re, im], ...], ...]`) or text rows of `re im` pairs.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "ie")]
    pub engine: Engine,
    /// Drop pairs of neighbouring points (hafnian only).
    #[arg(long)]
    pub rectangular: bool,
    /// Report evaluation time on stderr.
    #[arg(long)]
    pub timing: bool,
    /// Run single-threaded.
    #[arg(long)]
    pub sequential: bool,
    /// Write the result here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Parameter file with `key = value` lines.
    #[arg(long, conflicts_with = "case")]
    pub params: Option<PathBuf>,
    /// Built-in parameter set.
    #[arg(long, value_parser = ["case1", "case2"], default_value = "case1")]
    pub case: String,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CorrelationArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Fold time; the grid covers [0, 2t].
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0.1)]
    pub h: f64,
    #[arg(long, short, default_value = "correlation.csv")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Last observation time.
    #[arg(long, default_value_t = 2.5)]
    pub t_max: f64,
    /// Grid step of the observation times.
    #[arg(long, default_value_t = 0.1)]
    pub h: f64,
    #[arg(long, default_value_t = 0.2)]
    pub b_const: f64,
    #[arg(long, default_value_t = 13)]
    pub m_max: usize,
    /// Fixed-order test mode: orders uniform over 2, ..., 2 M_bar.
    #[arg(long)]
    pub m_bar: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; zero uses one per core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Run single-threaded.
    #[arg(long)]
    pub sequential: bool,
    #[arg(long, value_enum, default_value = "both")]
    pub format: OutputFormat,
    /// Output path without extension.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sampler {
    Poisson,
    Exact,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct DqmcArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Samples per observation time.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, value_enum, default_value = "poisson")]
    pub sampler: Sampler,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct InchwormArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Samples per right-hand-side evaluation.
    #[arg(long, default_value_t = 100)]
    pub n_rhs: usize,
    /// Independent solves per observation time.
    #[arg(long, default_value_t = 20)]
    pub replicas: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchTarget {
    Hafnian,
    Linked,
    Both,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "both")]
    pub kind: BenchTarget,
    /// Smallest order; defaults to 8 (hafnian) or 10 (linked).
    #[arg(long)]
    pub m_min: Option<usize>,
    /// Largest order; defaults to 24 (hafnian) or 22 (linked).
    #[arg(long)]
    pub m_max: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Largest order timed with the direct engine.
    #[arg(long)]
    pub direct_cap: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Time the rayon path of the linked engine instead of the sequential one.
    #[arg(long)]
    pub parallel: bool,
    /// Report path without extension; `-hafnian` / `-linked` is appended.
    #[arg(long, short, default_value = "bench")]
    pub output: PathBuf,
}
