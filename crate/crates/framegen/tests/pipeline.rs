mod common;

use std::path::Path;

use common::{load_mini, mini_release_dir, mini_splits_path, MockServer};
use framegen::formats::{read_jsonl, SentenceRecord};
use framegen::http::RetryPolicy;
use framegen::pipeline::{outputs_complete, run_pipeline, run_with, Backends, Ledger, RunConfig, OUTPUT_FILES};
use framegen_core::expand::ConditioningMode;

const MODES: [ConditioningMode; 3] =
    [ConditioningMode::NoConditioning, ConditioningMode::FeConditioning, ConditioningMode::FrameFeConditioning];

fn config(out: &Path, seed: u64) -> RunConfig {
    let mut c = RunConfig::new(mini_release_dir(), out, seed);
    c.split_config = Some(mini_splits_path());
    c
}

fn mutating(out: &Path, seed: u64) -> RunConfig {
    let mut c = config(out, seed);
    c.mock.mutation_rate = 0.4;
    c.mock.malformed_rate = 0.1;
    c.n = 3;
    c.review_k = 4;
    c
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = mutating(tmp.path(), 11);
    run_pipeline(&cfg).unwrap();
    let first = files(tmp.path());
    assert!(first.iter().any(|(n, _)| n == "review.tsv"));
    run_pipeline(&cfg).unwrap();
    assert_eq!(files(tmp.path()), first);
    assert!(outputs_complete(tmp.path()));
}

#[test]
fn seed_changes_mutated_candidates() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run_pipeline(&mutating(a.path(), 1)).unwrap();
    let rb = run_pipeline(&mutating(b.path(), 2)).unwrap();
    let texts = |r: &framegen::pipeline::RunOutput| r.candidates.iter().map(|c| c.text.clone()).collect::<Vec<_>>();
    assert_ne!(texts(&ra), texts(&rb));
    assert_eq!(ra.masked.len(), rb.masked.len());
}

#[test]
fn ledger_counts_are_monotone_over_the_matrix() {
    let release = load_mini(true);
    for mode in MODES {
        for n in [1usize, 3] {
            let tmp = tempfile::tempdir().unwrap();
            let mut cfg = mutating(tmp.path(), 5);
            cfg.mode = mode;
            cfg.n = n;
            let out = run_with(&cfg, &release, Backends::default()).unwrap();
            let c = &out.ledger.counts;
            assert!(c.retained <= c.candidates, "{mode:?} n={n}: {c:?}");
            assert!(c.candidates <= n * c.masked, "{mode:?} n={n}: {c:?}");
            assert_eq!(c.candidates + c.dropped_malformed, n * c.masked, "{mode:?} n={n}");
            assert_eq!(c.masked + c.no_donor, c.targets);
            assert_eq!(out.ledger.backend_calls.generate, c.masked);
            assert!(out.masked.iter().all(|m| m.mode == mode));
        }
    }
}

#[test]
fn identity_mocks_retain_everything() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config(tmp.path(), 3);
    cfg.n = 2;
    let out = run_pipeline(&cfg).unwrap();
    let c = &out.ledger.counts;
    assert_eq!((c.targets, c.masked, c.no_donor), (7, 6, 1));
    assert_eq!(c.candidates, 12);
    assert_eq!(c.retained, c.candidates);
    assert_eq!(out.report.fe_fidelity, Some(1.0));
    let recs: Vec<SentenceRecord> = read_jsonl(&tmp.path().join("retained.jsonl")).unwrap();
    assert_eq!(recs.len(), 12);
    assert!(recs.iter().all(|r| r.provenance.as_ref().unwrap().fidelity == 1.0));
    for (r, m) in recs.iter().zip(out.masked.iter().flat_map(|m| [m, m])) {
        assert_eq!(r.text, m.source.text);
    }
}

#[test]
fn ledger_embeds_resolved_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = mutating(tmp.path(), 9);
    run_pipeline(&cfg).unwrap();
    let ledger: Ledger = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("ledger.json")).unwrap()).unwrap();
    assert_eq!(ledger.config, cfg);
    assert_eq!(ledger.config_hash, cfg.hash());
    assert_eq!(ledger.config_hash.len(), 64);
    assert_eq!(ledger.stages, ["targets", "expand", "generate", "filter", "metrics", "review"]);
    assert_eq!(ledger.classifier, "mock-oracle");
    assert!(ledger.generator_id.starts_with("mock-mutating"));
}

#[test]
fn missing_release_dir_is_a_load_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config(&tmp.path().join("out"), 0);
    cfg.release_dir = tmp.path().join("no-release");
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.stage, "load");
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn invalid_config_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config(tmp.path(), 0);
    cfg.n = 0;
    assert_eq!(run_pipeline(&cfg).unwrap_err().stage, "config");
    let mut cfg = config(tmp.path(), 0);
    cfg.mock.mutation_rate = 1.5;
    assert_eq!(run_pipeline(&cfg).unwrap_err().stage, "config");
}

#[test]
fn failed_stage_leaves_only_partial_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut cfg = config(tmp.path(), 0);
    cfg.endpoints.generator = Some(format!("http://127.0.0.1:{port}"));
    cfg.retry = RetryPolicy { max_attempts: 1, base_delay_ms: 1, max_delay_ms: 1, timeout_ms: 2_000, budget: 0 };
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.stage, "generate");
    assert!(err.instance.is_some());
    assert!(tmp.path().join("masked.jsonl.partial").is_file());
    for f in OUTPUT_FILES {
        assert!(!tmp.path().join(f).exists(), "{f}");
    }
    assert!(!outputs_complete(tmp.path()));

    // a later successful run clears the leftovers
    cfg.endpoints.generator = None;
    run_pipeline(&cfg).unwrap();
    assert!(outputs_complete(tmp.path()));
}

#[test]
fn http_backends_end_to_end() {
    let masked = common::mini_masked(ConditioningMode::FeConditioning);
    let server = MockServer::start(common::null_model(masked));
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config(tmp.path(), 4);
    cfg.n = 2;
    cfg.endpoints.generator = Some(server.url.clone());
    cfg.endpoints.classifier = Some(server.url.clone());
    cfg.endpoints.scorer = Some(server.url.clone());
    let out = run_pipeline(&cfg).unwrap();
    let c = &out.ledger.counts;
    assert_eq!(c.retained, c.candidates);
    assert_eq!(c.unverifiable, 0);
    assert_eq!(out.report.fe_fidelity, Some(1.0));
    // 0.5 nats per character, one token per word
    let chars: usize = out.outcome.retained.iter().map(|c| c.text.chars().count()).sum();
    let words: usize = out.outcome.retained.iter().map(|c| c.text.split_whitespace().count()).sum();
    assert!((out.report.perplexity.unwrap() - (0.5 * chars as f64 / words as f64).exp()).abs() < 1e-9);
    assert!(out.report.bart_score.unwrap().abs() < 1e-12);
    assert_eq!(out.ledger.backend_calls.generate, c.masked);
    assert_eq!(out.ledger.backend_calls.score, 2);
    let spans: usize = out.candidates.iter().map(|c| c.generated.len()).sum();
    assert_eq!(out.ledger.backend_calls.classify, spans);
    let hits = server.requests();
    assert_eq!(hits.iter().filter(|(p, _)| p == "/classify").count(), spans);
    assert!(hits.iter().all(|(_, b)| b["request_id"].is_string()));
}
