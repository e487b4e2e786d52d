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


use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use diagsum::bench::{run_bench, BenchKind, BenchOptions, BenchReport};
use diagsum::config::{load_params, preset, read_matrix};
use diagsum::inchworm::{InchwormConfig, InchwormOrders};
use diagsum::parallel::configure_threads;
use diagsum::pairings::{direct_influence, direct_linked_sum, direct_rectangular_sum};
use diagsum::series::{
    dqmc_series, emit_series, inchworm_series, time_grid, DqmcOrders, Format, SeriesDocument,
};
use diagsum::{
    rectangular_box_ie, rounded_box_with, Error, ExclusionWorkspace, Execution, Result, SpinBoson,
    SpinBosonParams,
};
use serde_json::json;

use crate::args::{
    BenchArgs, BenchTarget, Cli, Command, CorrelationArgs, DqmcArgs, Engine, InchwormArgs,
    MatrixArgs, ModelArgs, OutputFormat, RunArgs, Sampler,
};

pub fn run(cli: Cli) -> Result<()> {
    let out = cli.out_dir;
    match cli.command {
        Command::Hafnian(a) => matrix_sum(&out, &a, false),
        Command::LinkedSum(a) => matrix_sum(&out, &a, true),
        Command::Correlation(a) => correlation(&out, &a),
        Command::Dqmc(a) => dqmc(&out, &a),
        Command::Inchworm(a) => inchworm(&out, &a),
        Command::Bench(a) => bench(&out, &a),
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

fn resolve(out_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out_dir.join(p)
    }
}

fn write(path: &Path, body: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, body).map_err(io)
}

fn exec(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn matrix_sum(out_dir: &Path, a: &MatrixArgs, linked: bool) -> Result<()> {
    if linked && a.rectangular {
        return Err(invalid("--rectangular applies to the hafnian only"));
    }
    let b = read_matrix(&a.input)?;
    let start = Instant::now();
    let v = match (linked, a.rectangular, a.engine) {
        (false, false, Engine::Ie) => ExclusionWorkspace::new().hafnian(&b)?,
        (false, true, Engine::Ie) => rectangular_box_ie(&b)?,
        (false, false, Engine::Direct) => direct_influence(&b)?,
        (false, true, Engine::Direct) => direct_rectangular_sum(&b)?,
        (true, _, Engine::Ie) => rounded_box_with(&b, exec(a.sequential))?,
        (true, _, Engine::Direct) => direct_linked_sum(&b)?,
    };
    let elapsed = start.elapsed().as_secs_f64();
    let line = format!("{} {}\n", v.re, v.im);
    match &a.output {
        Some(p) => write(&resolve(out_dir, p), &line)?,
        None => print!("{line}"),
    }
    if a.timing {
        eprintln!("m = {}, {:?} engine: {elapsed:.6e} s", b.dim(), a.engine);
    }
    Ok(())
}

fn model_params(m: &ModelArgs) -> Result<SpinBosonParams> {
    match &m.params {
        Some(p) => load_params(p),
        None => preset(&m.case).ok_or_else(|| invalid(format!("unknown case {}", m.case))),
    }
}

fn correlation(out_dir: &Path, a: &CorrelationArgs) -> Result<()> {
    let model = SpinBoson::new(model_params(&a.model)?)?;
    if !(a.t > 0.0) || !(a.h > 0.0) || !a.t.is_finite() || !a.h.is_finite() {
        return Err(invalid("--t and --h must be positive"));
    }
    let n = (2.0 * a.t / a.h + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=n).map(|k| k as f64 * a.h).collect();
    let mut body = String::from("tau1,tau2,re,im\n");
    for (i, &t1) in grid.iter().enumerate() {
        for &t2 in &grid[i..] {
            let v = model.bath_correlation(t1, t2, a.t)?;
            body.push_str(&format!("{t1},{t2},{},{}\n", v.re, v.im));
        }
    }
    write(&resolve(out_dir, &a.output), &body)
}

fn prepare(r: &RunArgs) -> Result<(SpinBoson, Vec<f64>, Execution)> {
    configure_threads(r.threads)?;
    let params = model_params(&r.model)?;
    let times = time_grid(r.t_max, r.h)?;
    Ok((SpinBoson::new(params)?, times, exec(r.sequential)))
}

fn emit(
    out_dir: &Path,
    r: &RunArgs,
    engine: &str,
    model: &SpinBoson,
    settings: serde_json::Value,
    series: diagsum::series::ObservableSeries,
) -> Result<()> {
    let stem = resolve(out_dir, r.output.as_deref().unwrap_or(Path::new(engine)));
    let doc = SeriesDocument::new(engine, *model.params(), settings, series);
    let formats: &[(Format, &str)] = match r.format {
        OutputFormat::Csv => &[(Format::Csv, "csv")],
        OutputFormat::Json => &[(Format::Json, "json")],
        OutputFormat::Both => &[(Format::Csv, "csv"), (Format::Json, "json")],
    };
    for &(f, ext) in formats {
        emit_series(&doc, f, &stem.with_extension(ext))?;
    }
    Ok(())
}

fn dqmc(out_dir: &Path, a: &DqmcArgs) -> Result<()> {
    let r = &a.run;
    let (model, times, exec) = prepare(r)?;
    let orders = match (r.m_bar, a.sampler) {
        (Some(m_bar), _) => DqmcOrders::Truncated { m_bar },
        (None, Sampler::Poisson) => DqmcOrders::Poisson {
            b_const: r.b_const,
            m_max: r.m_max,
        },
        (None, Sampler::Exact) => DqmcOrders::Exact { m_max: r.m_max },
    };
    let series = dqmc_series(&model, &times, a.samples, orders, r.seed, exec)?;
    let settings = json!({
        "t_max": r.t_max,
        "h": r.h,
        "samples": a.samples,
        "orders": orders,
        "threads": r.threads,
    });
    emit(out_dir, r, "dqmc", &model, settings, series)
}

fn inchworm(out_dir: &Path, a: &InchwormArgs) -> Result<()> {
    let r = &a.run;
    let (model, times, exec) = prepare(r)?;
    let orders = match r.m_bar {
        Some(m_bar) => InchwormOrders::Truncated { m_bar },
        None => InchwormOrders::Poisson {
            b_const: r.b_const,
            m_max: r.m_max,
        },
    };
    let cfg = InchwormConfig {
        h: r.h,
        n_rhs: a.n_rhs,
        orders,
    };
    let series = inchworm_series(&model, &times, &cfg, a.replicas, r.seed, exec)?;
    let settings = json!({
        "t_max": r.t_max,
        "config": cfg,
        "replicas": a.replicas,
        "threads": r.threads,
    });
    emit(out_dir, r, "inchworm", &model, settings, series)
}

fn bench(out_dir: &Path, a: &BenchArgs) -> Result<()> {
    let kinds: &[BenchKind] = match a.kind {
        BenchTarget::Hafnian => &[BenchKind::Hafnian],
        BenchTarget::Linked => &[BenchKind::Linked],
        BenchTarget::Both => &[BenchKind::Hafnian, BenchKind::Linked],
    };
    for &kind in kinds {
        let (lo, hi, name) = match kind {
            BenchKind::Hafnian => (8, 24, "hafnian"),
            BenchKind::Linked => (10, 22, "linked"),
        };
        let (lo, hi) = (a.m_min.unwrap_or(lo), a.m_max.unwrap_or(hi));
        if lo > hi {
            return Err(invalid(format!("empty order range {lo}..{hi}")));
        }
        let mut opts = BenchOptions::new(kind, (lo..=hi).step_by(2).collect(), a.trials);
        opts.seed = a.seed;
        if let Some(cap) = a.direct_cap {
            opts.direct_cap = cap;
        }
        opts.exec = exec(!a.parallel);
        let report = run_bench(kind, &opts)?;
        print_table(&report);
        let mut body = serde_json::to_string_pretty(&report)
            .map_err(|e| invalid(format!("cannot serialize report: {e}")))?;
        body.push('\n');
        let stem = resolve(out_dir, &a.output);
        let file = format!("{}-{name}.json", stem.file_name().and_then(|s| s.to_str()).unwrap_or("bench"));
        write(&stem.with_file_name(file), &body)?;
    }
    Ok(())
}

fn print_table(r: &BenchReport) {
    println!("{:?} ({} trials, {} thread(s))", r.kind, r.trials, r.threads);
    println!("{:>4} {:>14} {:>14} {:>8}", "m", "direct [s]", "ie [s]", "ratio");
    for (i, row) in r.rows.iter().enumerate() {
        let direct = row
            .direct
            .as_ref()
            .map_or_else(|| "skipped".to_string(), |d| format!("{:.4e}", d.median));
        let ratio = i
            .checked_sub(1)
            .map(|j| row.ie.median / r.rows[j].ie.median)
            .map_or_else(String::new, |x| format!("{x:.2}"));
        println!("{:>4} {:>14} {:>14.4e} {:>8}", row.m, direct, row.ie.median, ratio);
    }
    match r.crossover {
        Some(m) => println!("crossover: m = {m}"),
        None => println!("crossover: not reached"),
    }
    if let Some(s) = r.ie_log_slope {
        println!("log-time slope per step of m/2: {s:.3}");
    }
}
