//! Wire codec throughput: header assembly, MSB-first bit packing, and the
//! compact screen text form.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use sema_bench::{audio_turn, registry, snapshot, visual_update};
use sema_core::{decode_frame, encode_compact_text, encode_frame, parse_compact_text};

fn frame_encode(c: &mut Criterion) {
    let registry = registry();
    let mut group = c.benchmark_group("frame_encode");
    for (name, frame) in [
        ("audio_3s_turn", audio_turn()),
        ("visual_1080p", visual_update()),
    ] {
        let wire = encode_frame(&frame, &registry).unwrap();
        group.throughput(Throughput::Bytes(wire.len() as u64));
        group.bench_function(name, |b| {
            b.iter(|| encode_frame(black_box(&frame), &registry).unwrap())
        });
    }
    group.finish();
}

fn frame_decode(c: &mut Criterion) {
    let registry = registry();
    let mut group = c.benchmark_group("frame_decode");
    for (name, frame) in [
        ("audio_3s_turn", audio_turn()),
        ("visual_1080p", visual_update()),
    ] {
        let wire = encode_frame(&frame, &registry).unwrap();
        group.throughput(Throughput::Bytes(wire.len() as u64));
        group.bench_function(name, |b| {
            b.iter(|| decode_frame(black_box(&wire), &registry).unwrap())
        });
    }
    group.finish();
}

fn compact_text(c: &mut Criterion) {
    let snap = snapshot();
    let text = encode_compact_text(&snap.root);
    let mut group = c.benchmark_group("compact_text");
    group.throughput(Throughput::Bytes(text.len() as u64));
    group.bench_function("encode", |b| {
        b.iter(|| encode_compact_text(black_box(&snap.root)))
    });
    group.bench_function("parse", |b| {
        b.iter(|| parse_compact_text(black_box(&text)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, frame_encode, frame_decode, compact_text);
criterion_main!(benches);
