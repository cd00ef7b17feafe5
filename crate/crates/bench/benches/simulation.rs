//! Simulation throughput: playout trials, single uplink turns, and one
//! shipped scenario evaluated end to end.

use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, Criterion};
use sema_bench::snapshot;
use sema_core::{
    mbps, simulate_playout, CostProfile, JitterSpec, LinkSpec, Medium, Method, PipelineEnv,
    PlayoutConfig, Scenario,
};

fn playout(c: &mut Criterion) {
    let config = PlayoutConfig::batch_tts(3000.0);
    let mut link = LinkSpec::symmetric(mbps(10.0), 50.0);
    link.jitter = JitterSpec::uniform(300.0, 11);
    c.bench_function("playout/batch_3s_100_trials", |b| {
        b.iter(|| simulate_playout(black_box(&config), &link, 100))
    });
}

fn uplink_turns(c: &mut Criterion) {
    let env = PipelineEnv::new(CostProfile::paper_defaults());
    let snap = snapshot();
    let link = LinkSpec::symmetric(mbps(5.0), 50.0);
    let mut group = c.benchmark_group("uplink_turn");
    group.bench_function("hybrid_vision", |b| {
        b.iter(|| {
            env.run_uplink_turn(Method::SemaHybrid, Medium::Vision, &link, Some(&snap))
                .unwrap()
        })
    });
    group.bench_function("sema_voice", |b| {
        b.iter(|| {
            env.run_uplink_turn(Method::SemaStatic, Medium::Voice, &link, None)
                .unwrap()
        })
    });
    group.finish();
}

fn scenario_rows(c: &mut Criterion) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/table1.toml");
    let scenario = Scenario::from_path(&path).unwrap();
    c.bench_function("scenario/table1_rows", |b| b.iter(|| scenario.rows().unwrap()));
}

criterion_group!(benches, playout, uplink_turns, scenario_rows);
criterion_main!(benches);
