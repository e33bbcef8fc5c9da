use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use tasksuggest::char_nlm::NlmDecodeOptions;
use tasksuggest::nn::{rng, GruCell, LstmCell};
use tasksuggest::popsuffix::{SuffixTable, SuggestOptions};
use tasksuggest::seq2seq::Seq2SeqDecodeOptions;

fn popsuffix(c: &mut Criterion) {
    let corpus = tasksuggest_bench::queries(20_000, 3);
    c.bench_function("popsuffix/build_20k", |b| {
        b.iter(|| SuffixTable::build(black_box(&corpus), 3).unwrap())
    });
    let table = SuffixTable::build(&corpus, 3).unwrap().pruned(2).unwrap();
    c.bench_function("popsuffix/suggest_k20", |b| {
        b.iter(|| {
            table
                .suggest(black_box("make a"), 20, &SuggestOptions::default())
                .unwrap()
        })
    });
}

fn cells(c: &mut Criterion) {
    let mut r = rng::seeded(0, 901);
    let mut group = c.benchmark_group("cell_step");
    for hidden in [64, 200] {
        let lstm = LstmCell::new(32, hidden, &mut r);
        let gru = GruCell::new(64, hidden, &mut r);
        let (x32, x64, h) = (vec![0.1; 32], vec![0.1; 64], vec![0.0; hidden]);
        group.bench_with_input(BenchmarkId::new("lstm", hidden), &hidden, |b, _| {
            b.iter(|| lstm.step(black_box(&x32), &h, &h).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("gru", hidden), &hidden, |b, _| {
            b.iter(|| gru.step(black_box(&x64), &h).unwrap())
        });
    }
    group.finish();
}

fn decoders(c: &mut Criterion) {
    let mut group = c.benchmark_group("beam_decode");
    group.sample_size(10);
    let lm = tasksuggest_bench::char_lm(64, 32);
    for width in [10, 30] {
        let options = NlmDecodeOptions {
            beam_width: width,
            k: 20,
            max_chars: 30,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::new("char_nlm", width), &options, |b, o| {
            b.iter(|| lm.suggest(black_box("make a"), o).unwrap())
        });
    }
    let s2s = tasksuggest_bench::seq2seq(64, 100, 200);
    for width in [10, 100] {
        let options = Seq2SeqDecodeOptions {
            beam_width: width,
            k: 20,
            max_words: 8,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::new("seq2seq", width), &options, |b, o| {
            b.iter(|| s2s.suggest(black_box("make a"), o).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, popsuffix, cells, decoders);
criterion_main!(benches);
