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

//! Parameter files and matrix input files.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::CorrelationMatrix;
use crate::model::SpinBosonParams;

/// Parses `key = value` lines naming all seven model parameters.
pub fn parse_params(text: &str) -> Result<SpinBosonParams> {
    let p: SpinBosonParams =
        toml::from_str(text).map_err(|e| Error::validation(format!("parameter file: {e}")))?;
    p.validate()?;
    Ok(p)
}

pub fn load_params(path: &Path) -> Result<SpinBosonParams> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_params(&text).map_err(|e| match e {
        Error::Validation(msg) => Error::Validation(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Named parameter presets.
pub fn preset(name: &str) -> Option<SpinBosonParams> {
    match name {
        "case1" => Some(SpinBosonParams::case1()),
        "case2" => Some(SpinBosonParams::case2()),
        _ => None,
    }
}

/// Reads a square complex matrix. JSON input is an array of rows whose
/// entries are `[re, im]` pairs; any other file is read as text with one row
/// per line and `re im` pairs separated by whitespace or commas.
pub fn read_matrix(path: &Path) -> Result<CorrelationMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_json = path.extension().is_some_and(|e| e == "json")
        || text.trim_start().starts_with('[');
    let rows = if is_json {
        parse_json_rows(&text)?
    } else {
        parse_text_rows(&text)?
    };
    let m = rows.len();
    let mut data = Vec::with_capacity(m * m);
    for (i, row) in rows.into_iter().enumerate() {
        if row.len() != m {
            return Err(Error::validation(format!(
                "row {} has {} entries, expected {m}",
                i + 1,
                row.len()
            )));
        }
        data.extend(row);
    }
    CorrelationMatrix::from_row_major(m, data)
}

fn parse_json_rows(text: &str) -> Result<Vec<Vec<Complex64>>> {
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(text)
        .map_err(|e| Error::validation(format!("matrix JSON: {e}")))?;
    Ok(rows
        .into_iter()
        .map(|r| r.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
        .collect())
}

fn parse_text_rows(text: &str) -> Result<Vec<Vec<Complex64>>> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::validation(format!("line {}: bad number {s:?}", n + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if nums.len() % 2 == 1 {
            return Err(Error::validation(format!(
                "line {}: entries must come in re, im pairs",
                n + 1
            )));
        }
        rows.push(nums.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect());
    }
    Ok(rows)
}
