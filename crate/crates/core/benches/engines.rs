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


use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use diagsum::dyson::dqmc_observable;
use diagsum::pairings::DiagramTable;
use diagsum::sampling::OrderDistribution;
use diagsum::{rounded_box_with, CorrelationMatrix, ExclusionWorkspace, Execution, SpinBoson, SpinBosonParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn matrix(m: usize) -> CorrelationMatrix {
    CorrelationMatrix::random(m, &mut ChaCha8Rng::seed_from_u64(m as u64))
}

fn hafnian(c: &mut Criterion) {
    let mut g = c.benchmark_group("hafnian");
    for m in [10, 12] {
        let b = matrix(m);
        let table = DiagramTable::all(m, 16).unwrap();
        let mut ws = ExclusionWorkspace::new();
        g.bench_with_input(BenchmarkId::new("ie", m), &b, |t, b| t.iter(|| ws.hafnian(black_box(b)).unwrap()));
        g.bench_with_input(BenchmarkId::new("direct", m), &b, |t, b| t.iter(|| table.evaluate(black_box(b))));
    }
    g.finish();
}

fn rounded(c: &mut Criterion) {
    let mut g = c.benchmark_group("rounded_box");
    for m in [14, 18] {
        let b = matrix(m);
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, m), &b, |t, b| {
                t.iter(|| rounded_box_with(black_box(b), exec).unwrap())
            });
        }
    }
    g.finish();
}

fn dqmc(c: &mut Criterion) {
    let model = SpinBoson::new(SpinBosonParams::case1()).unwrap();
    let dist = OrderDistribution::poisson(0.2, 1.0, 13).unwrap();
    let mut g = c.benchmark_group("dqmc");
    for (name, exec) in MODES {
        g.bench_function(name, |t| {
            t.iter(|| dqmc_observable(&model, 1.0, 8192, &dist, 1, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group! {
    name = engines;
    config = Criterion::default()
        .sample_size(10)
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(2));
    targets = hafnian, rounded, dqmc
}
criterion_main!(engines);
