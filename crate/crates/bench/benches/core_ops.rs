use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use screenwright_bench::{synthetic_episode, word_soup};
use screenwright_core::clips::{build_clips, detect_pauses, speech_intervals, SelectionConfig};
use screenwright_core::metrics::{rouge_lsum, rouge_n};
use screenwright_core::mfactsum::split_sentences;
use screenwright_core::model::{request_key, GenerationParams, ModelRequest, Role};

fn bench_clip_selection(c: &mut Criterion) {
    let mut group = c.benchmark_group("clip_selection");
    for n_utterances in [50usize, 500, 2000] {
        let ep = synthetic_episode(11, n_utterances, 3600.0);
        let cfg = SelectionConfig::default();
        group.bench_with_input(
            BenchmarkId::from_parameter(n_utterances),
            &ep,
            |b, ep| {
                b.iter(|| {
                    let speech = speech_intervals(black_box(ep));
                    let pauses = detect_pauses(&speech, ep.duration_s, cfg.pause_threshold_s);
                    build_clips(&pauses, ep.duration_s, &cfg).unwrap()
                })
            },
        );
    }
    group.finish();
}

fn bench_rouge(c: &mut Criterion) {
    let mut group = c.benchmark_group("rouge");
    for n_words in [100usize, 600, 2000] {
        let candidate = word_soup(21, n_words);
        let reference = word_soup(22, n_words);
        group.bench_with_input(
            BenchmarkId::new("rouge_1", n_words),
            &(candidate.clone(), reference.clone()),
            |b, (c, r)| b.iter(|| rouge_n(black_box(c), black_box(r), 1)),
        );
        group.bench_with_input(
            BenchmarkId::new("rouge_2", n_words),
            &(candidate.clone(), reference.clone()),
            |b, (c, r)| b.iter(|| rouge_n(black_box(c), black_box(r), 2)),
        );
        group.bench_with_input(
            BenchmarkId::new("rouge_lsum", n_words),
            &(candidate, reference),
            |b, (c, r)| b.iter(|| rouge_lsum(black_box(c), black_box(r))),
        );
    }
    group.finish();
}

fn bench_sentence_split(c: &mut Criterion) {
    let text = word_soup(31, 5000);
    c.bench_function("split_sentences_5k_words", |b| {
        b.iter(|| split_sentences(black_box(&text)))
    });
}

fn bench_request_key(c: &mut Criterion) {
    let req = ModelRequest {
        role: Role::Judge,
        model_id: "bench-model".into(),
        prompt_text: word_soup(41, 1500),
        media: None,
        params: GenerationParams::default(),
    };
    c.bench_function("request_key_1500_words", |b| {
        b.iter(|| request_key(black_box(&req)))
    });
}

criterion_group!(
    benches,
    bench_clip_selection,
    bench_rouge,
    bench_sentence_split,
    bench_request_key
);
criterion_main!(benches);
