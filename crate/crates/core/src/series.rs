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

//! Time series of observable estimates and their CSV and JSON forms.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dyson::{dqmc_observable, Estimate};
use crate::error::{Error, Result};
use crate::inchworm::{inchworm_observable, InchwormConfig};
use crate::model::{SpinBoson, SpinBosonParams};
use crate::parallel::Execution;
use crate::sampling::OrderDistribution;

pub const CSV_HEADER: &str = "t,re,im,stderr_re,stderr_im";

/// Source revision the library was built from.
pub const PROVENANCE: &str = env!("DIAGSUM_GIT_DESCRIBE");

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub mean_re: Vec<f64>,
    pub mean_im: Vec<f64>,
    pub stderr_re: Vec<f64>,
    pub stderr_im: Vec<f64>,
    pub n_samples: u64,
    pub seed: u64,
}

impl ObservableSeries {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        ObservableSeries {
            n_samples,
            seed,
            ..Default::default()
        }
    }

    pub fn push(&mut self, t: f64, e: &Estimate) {
        self.times.push(t);
        self.mean_re.push(e.mean.re);
        self.mean_im.push(e.mean.im);
        self.stderr_re.push(e.stderr_re);
        self.stderr_im.push(e.stderr_im);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if [&self.mean_re, &self.mean_im, &self.stderr_re, &self.stderr_im]
            .iter()
            .any(|v| v.len() != n)
        {
            return Err(Error::validation("series columns differ in length"));
        }
        if self.stderr_re.iter().chain(&self.stderr_im).any(|&s| !(s >= 0.0)) {
            return Err(Error::validation("standard errors must be nonnegative"));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.times[i], self.mean_re[i], self.mean_im[i], self.stderr_re[i], self.stderr_im[i]
            ));
        }
        out
    }
}

/// The JSON document written next to a series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDocument {
    pub engine: String,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub params: SpinBosonParams,
    pub provenance: String,
    pub settings: serde_json::Value,
    pub series: ObservableSeries,
}

impl SeriesDocument {
    pub fn new(
        engine: &str,
        params: SpinBosonParams,
        settings: serde_json::Value,
        series: ObservableSeries,
    ) -> Self {
        SeriesDocument {
            engine: engine.to_string(),
            seed: series.seed,
            n: series.n_samples,
            params,
            provenance: PROVENANCE.to_string(),
            settings,
            series,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub(crate) fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Writes the series as CSV or as the full JSON document.
pub fn emit_series(doc: &SeriesDocument, format: Format, path: &Path) -> Result<()> {
    doc.series.validate()?;
    let body = match format {
        Format::Csv => doc.series.to_csv(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(doc)
                .map_err(|e| Error::validation(format!("cannot serialize series: {e}")))?;
            s.push('\n');
            s
        }
    };
    write_file(path, &body)
}

pub fn read_series_json(path: &Path) -> Result<SeriesDocument> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::validation(format!("{}: {e}", path.display())))
}

/// Observation times `n h` for `n = 1, ..., round(T / h)`.
pub fn time_grid(t_max: f64, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) || !h.is_finite() || !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(Error::validation(format!("invalid time grid T = {t_max}, h = {h}")));
    }
    let n = (t_max / h + 1e-9).floor() as usize;
    // Steps like 0.1 give 0.3 rather than 0.30000000000000004.
    let inv = (1.0 / h).round();
    if inv >= 1.0 && (inv * h - 1.0).abs() < 1e-12 {
        Ok((1..=n).map(|k| k as f64 / inv).collect())
    } else {
        Ok((1..=n).map(|k| k as f64 * h).collect())
    }
}

/// Order sampling for the bare expansion, resolved per observation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DqmcOrders {
    Exact { m_max: usize },
    Poisson { b_const: f64, m_max: usize },
    Truncated { m_bar: usize },
}

impl DqmcOrders {
    pub fn distribution(&self, model: &SpinBoson, t: f64) -> Result<OrderDistribution> {
        match *self {
            DqmcOrders::Exact { m_max } => OrderDistribution::exact(model, t, m_max),
            DqmcOrders::Poisson { b_const, m_max } => OrderDistribution::poisson(b_const, t, m_max),
            DqmcOrders::Truncated { m_bar } => OrderDistribution::truncated(m_bar),
        }
    }
}

pub fn dqmc_series(
    model: &SpinBoson,
    times: &[f64],
    n_samples: u64,
    orders: DqmcOrders,
    seed: u64,
    exec: Execution,
) -> Result<ObservableSeries> {
    let mut out = ObservableSeries::new(n_samples, seed);
    for &t in times {
        let dist = orders.distribution(model, t)?;
        out.push(t, &dqmc_observable(model, t, n_samples, &dist, seed, exec)?);
    }
    Ok(out)
}

pub fn inchworm_series(
    model: &SpinBoson,
    times: &[f64],
    cfg: &InchwormConfig,
    replicas: usize,
    seed: u64,
    exec: Execution,
) -> Result<ObservableSeries> {
    let mut out = ObservableSeries::new((cfg.n_rhs * replicas) as u64, seed);
    for &t in times {
        out.push(t, &inchworm_observable(model, t, cfg, replicas, seed, exec)?);
    }
    Ok(out)
}
