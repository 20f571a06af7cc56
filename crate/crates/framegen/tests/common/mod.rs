#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use framegen::release::{load_release, LoadOptions, Release};
use framegen::splits::SplitConfig;
use serde_json::Value;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn mini_release_dir() -> PathBuf {
    fixtures().join("mini_release")
}

pub fn mini_splits_path() -> PathBuf {
    fixtures().join("mini_splits.toml")
}

pub fn mini_splits() -> SplitConfig {
    SplitConfig::load(&mini_splits_path()).expect("fixture splits")
}

pub fn load_mini(corpus: bool) -> Release {
    load_release(&mini_release_dir(), &LoadOptions { corpus, splits: mini_splits() }).expect("fixture release")
}

pub type Handler = dyn Fn(&str, &Value) -> (u16, String) + Send + Sync;

/// Local HTTP server answering every POST through `handler(path, body)`.
pub struct MockServer {
    pub url: String,
    pub log: Arc<Mutex<Vec<(String, Value)>>>,
    server: Arc<tiny_http::Server>,
    thread: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start(handler: impl Fn(&str, &Value) -> (u16, String) + Send + Sync + 'static) -> Self {
        let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").expect("bind"));
        let addr = server.server_addr().to_ip().expect("tcp listener");
        let log = Arc::new(Mutex::new(Vec::new()));
        let (s, l) = (server.clone(), log.clone());
        let thread = std::thread::spawn(move || {
            for mut req in s.incoming_requests() {
                let mut body = String::new();
                let _ = req.as_reader().read_to_string(&mut body);
                let path = req.url().to_string();
                let json: Value = serde_json::from_str(&body).unwrap_or(Value::Null);
                let (status, text) = handler(&path, &json);
                l.lock().unwrap().push((path, json));
                let header = tiny_http::Header::from_bytes("Content-Type", "application/json").unwrap();
                let _ = req.respond(tiny_http::Response::from_string(text).with_status_code(status).with_header(header));
            }
        });
        MockServer { url: format!("http://{addr}"), log, server, thread: Some(thread) }
    }

    pub fn requests(&self) -> Vec<(String, Value)> {
        self.log.lock().unwrap().clone()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

pub fn ok(v: Value) -> (u16, String) {
    (200, v.to_string())
}

pub fn golden(name: &str) -> Value {
    let p = fixtures().join("protocol").join(name);
    serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

/// Masked instances of every verb target of the fixture release.
pub fn mini_masked(mode: framegen_core::expand::ConditioningMode) -> Vec<framegen_core::expand::MaskedInstance> {
    let r = load_mini(true);
    let mut cfg = framegen::pipeline::RunConfig::new(mini_release_dir(), ".", 0);
    cfg.mode = mode;
    framegen::cli::expand(&r, &cfg).expect("expand fixture")
}

/// In-test null model: identity fills looked up by request id, gold-lookup
/// labels, uniform per-character NLL.
pub fn null_model(masked: Vec<framegen_core::expand::MaskedInstance>) -> impl Fn(&str, &Value) -> (u16, String) + Send + Sync {
    use framegen::protocol::{ClassifyRequest, ScoreWireRequest};
    use framegen_core::genfilter::Classifier;
    use framegen_core::metrics::Scorer;
    use framegen_core::mock::{OracleClassifier, UniformScorer};
    use std::collections::BTreeMap;

    let oracle = OracleClassifier::from_instances(masked.iter().map(|m| &m.source));
    let fills: BTreeMap<String, Vec<String>> = masked
        .iter()
        .map(|m| (m.id.clone(), m.masked_fes.iter().map(|f| f.original_span_text.clone()).collect()))
        .collect();
    move |path, body| match path {
        "/generate" => {
            let id = body["request_id"].as_str().unwrap_or_default();
            let n = body["n"].as_u64().unwrap_or(1) as usize;
            match fills.get(id) {
                Some(f) => ok(serde_json::json!({
                    "request_id": id,
                    "candidates": vec![serde_json::json!({"fills": f}); n],
                })),
                None => (400, serde_json::json!({"error": "unknown instance", "request_id": id}).to_string()),
            }
        }
        "/classify" => match serde_json::from_value::<ClassifyRequest>(body.clone()) {
            Ok(req) => ok(serde_json::to_value(oracle.classify(&req.request_id, &req.to_core()).unwrap()).unwrap()),
            Err(e) => (400, serde_json::json!({"error": e.to_string()}).to_string()),
        },
        "/score" => match serde_json::from_value::<ScoreWireRequest>(body.clone()) {
            Ok(req) => {
                let s = UniformScorer { nll_per_char: 0.5 };
                ok(serde_json::to_value(s.score(&req.request_id, &req.body).unwrap()).unwrap())
            }
            Err(e) => (400, serde_json::json!({"error": e.to_string()}).to_string()),
        },
        _ => (404, "{}".into()),
    }
}
