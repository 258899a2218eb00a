//! Compares the rayon data-parallel entry points against the sequential
//! fallbacks on a generated corpus.
//!
//! Run with `cargo bench -p wsd-core`. With `--no-default-features` only
//! the sequential arms are compiled.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use wsd_core::bags::build_bags_sequential;
#[cfg(feature = "parallel")]
use wsd_core::bags::build_bags_parallel;
use wsd_core::concept::{ConceptHierarchy, ConceptId, LexEntry, Lexicon, Pos};
use wsd_core::corpus::{Rel, Sentence, Token};
use wsd_core::disambig::disambiguate_batch_sequential;
#[cfg(feature = "parallel")]
use wsd_core::disambig::disambiguate_batch_parallel;
use wsd_core::disambig::{ScoreOptions, Strategy, WorkItem};
use wsd_core::{BagSet, SynonymSet};

const SENSES: usize = 3;
const SYNONYMS_PER_SENSE: usize = 8;
const VOCAB_PER_SENSE: usize = 12;

fn sense_id(s: usize) -> String {
    format!("SENSE{s}")
}

fn hierarchy() -> ConceptHierarchy {
    let mut records: Vec<(String, Option<String>, String)> = vec![("ROOT".into(), None, String::new())];
    for s in 0..SENSES {
        records.push((sense_id(s), Some("ROOT".into()), String::new()));
        for k in 0..SYNONYMS_PER_SENSE {
            records.push((format!("SYN{s}_{k}"), Some(sense_id(s)), String::new()));
        }
    }
    ConceptHierarchy::from_records(records).unwrap()
}

fn lexicon(h: &ConceptHierarchy) -> Lexicon {
    let mut entries = Vec::new();
    let mut push = |lemma: String, sense: String| {
        entries.push(LexEntry {
            surface: lemma.clone(),
            lemma,
            pos: Pos::N,
            sense: ConceptId::new(sense).unwrap(),
        });
    };
    for s in 0..SENSES {
        push("target".to_string(), sense_id(s));
        for k in 0..SYNONYMS_PER_SENSE {
            push(format!("syn{s}_{k}"), format!("SYN{s}_{k}"));
        }
    }
    Lexicon::from_entries(entries, h).unwrap()
}

fn tok(index: usize, lemma: &str, pos: Pos, head: usize) -> Token {
    Token {
        index,
        surface: lemma.to_string(),
        lemma: lemma.to_string(),
        pos,
        head,
        rel: Rel::Dep,
        group: None,
    }
}

/// `ctx_noun pivot verb`: the pivot depends on the verb, the noun too.
fn three_token_sentence(id: String, noun: &str, pivot: &str, verb: &str) -> Sentence {
    Sentence::new(
        id,
        vec![tok(1, noun, Pos::N, 3), tok(2, pivot, Pos::N, 3), tok(3, verb, Pos::V, 0)],
    )
    .unwrap()
}

fn corpus(n: usize) -> Vec<Sentence> {
    (0..n)
        .map(|i| {
            let s = i % SENSES;
            let k = (i / SENSES) % SYNONYMS_PER_SENSE;
            let v = (i * 7 + 3) % VOCAB_PER_SENSE;
            let w = (i * 5 + 1) % VOCAB_PER_SENSE;
            three_token_sentence(
                format!("s{i}"),
                &format!("noun{s}_{w}"),
                &format!("syn{s}_{k}"),
                &format!("verb{s}_{v}"),
            )
        })
        .collect()
}

fn synonym_sets() -> Vec<SynonymSet> {
    (0..SENSES)
        .map(|s| SynonymSet {
            target_lemma: "target".to_string(),
            sense: ConceptId::new(sense_id(s)).unwrap(),
            synonyms: (0..SYNONYMS_PER_SENSE).map(|k| format!("syn{s}_{k}")).collect(),
        })
        .collect()
}

fn query_corpus(n: usize) -> Vec<Sentence> {
    (0..n)
        .map(|i| {
            let s = i % SENSES;
            let v = (i * 7 + 3) % VOCAB_PER_SENSE;
            let w = (i * 5 + 1) % VOCAB_PER_SENSE;
            three_token_sentence(
                format!("q{i}"),
                &format!("noun{s}_{w}"),
                "target",
                &format!("verb{s}_{v}"),
            )
        })
        .collect()
}

fn bench_build(c: &mut Criterion) {
    let sets = synonym_sets();
    let mut group = c.benchmark_group("build_bags");
    for &n in &[1_000usize, 10_000] {
        let corpus = corpus(n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("sequential", n), &corpus, |b, corpus| {
            b.iter(|| build_bags_sequential(corpus, &sets, true));
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", n), &corpus, |b, corpus| {
            b.iter(|| build_bags_parallel(corpus, &sets, true));
        });
    }
    group.finish();
}

fn bench_disambiguate(c: &mut Criterion) {
    let h = hierarchy();
    let lex = lexicon(&h);
    let sets = synonym_sets();
    let train = corpus(5_000);
    let mut bags = BagSet::new();
    bags.insert("target", build_bags_sequential(&train, &sets, true));

    let mut group = c.benchmark_group("disambiguate_batch");
    for &n in &[1_000usize, 10_000] {
        let queries = query_corpus(n);
        let items: Vec<WorkItem> = (0..queries.len()).map(|i| WorkItem { sentence: i, token: 2 }).collect();
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("sequential", n), &queries, |b, queries| {
            b.iter(|| {
                disambiguate_batch_sequential(
                    queries,
                    &items,
                    &bags,
                    &h,
                    &lex,
                    ScoreOptions::default(),
                    Strategy::Basic,
                )
                .unwrap()
            });
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", n), &queries, |b, queries| {
            b.iter(|| {
                disambiguate_batch_parallel(
                    queries,
                    &items,
                    &bags,
                    &h,
                    &lex,
                    ScoreOptions::default(),
                    Strategy::Basic,
                )
                .unwrap()
            });
        });
    }
    group.finish();
}

criterion_group!(benches, bench_build, bench_disambiguate);
criterion_main!(benches);
