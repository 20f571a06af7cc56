//! HTTP transports for the generator, classifier and scorer backends, with
//! exponential-backoff retries under a shared request budget.

use std::sync::atomic::{AtomicI64, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use framegen_core::expand::MaskedInstance;
use framegen_core::genfilter::{
    build_prompt, default_exemplars, Classifier, ClassifierRequest, ClassifierResponse, Exemplar, Generator,
    GeneratorRequest, GeneratorResponse,
};
use framegen_core::metrics::{ScoreRequest, ScoreResponse, Scorer};
use framegen_core::BackendError;
use log::{debug, warn};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::protocol::{ClassifyRequest, GenerateRequest, ScoreWireRequest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
    pub timeout_ms: u64,
    /// Total HTTP requests allowed across all backends of a run; 0 is unlimited.
    pub budget: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_attempts: 4, base_delay_ms: 250, max_delay_ms: 8_000, timeout_ms: 120_000, budget: 0 }
    }
}

impl RetryPolicy {
    pub fn delay(&self, attempt: u32) -> Duration {
        let ms = self.base_delay_ms.saturating_mul(1u64 << attempt.min(20));
        Duration::from_millis(ms.min(self.max_delay_ms))
    }
}

/// Request budget shared by every client of a run.
#[derive(Debug)]
pub struct CallBudget {
    remaining: AtomicI64,
    limited: bool,
}

impl CallBudget {
    pub fn new(limit: u64) -> Arc<Self> {
        Arc::new(CallBudget { remaining: AtomicI64::new(limit as i64), limited: limit > 0 })
    }

    fn take(&self) -> bool {
        !self.limited || self.remaining.fetch_sub(1, Ordering::SeqCst) > 0
    }
}

pub struct HttpClient {
    base_url: String,
    agent: ureq::Agent,
    policy: RetryPolicy,
    budget: Arc<CallBudget>,
    calls: AtomicU64,
}

impl HttpClient {
    pub fn new(base_url: &str, policy: RetryPolicy, budget: Arc<CallBudget>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(policy.timeout_ms)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpClient { base_url: base_url.trim_end_matches('/').to_string(), agent, policy, budget, calls: AtomicU64::new(0) }
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    /// HTTP requests sent so far, retries included.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn post_json<Q: Serialize, R: DeserializeOwned>(
        &self,
        endpoint: &str,
        request_id: &str,
        body: &Q,
    ) -> Result<R, BackendError> {
        let url = format!("{}{endpoint}", self.base_url);
        let payload = serde_json::to_string(body).expect("request serializes");
        let mut last = String::new();
        for attempt in 0..self.policy.max_attempts.max(1) {
            if attempt > 0 {
                std::thread::sleep(self.policy.delay(attempt - 1));
            }
            if !self.budget.take() {
                return Err(BackendError::transport(request_id, format!("request budget exhausted ({last})")));
            }
            self.calls.fetch_add(1, Ordering::SeqCst);
            let sent = self.agent.post(&url).header("content-type", "application/json").send(payload.as_str());
            let mut resp = match sent {
                Ok(r) => r,
                Err(e) => {
                    last = e.to_string();
                    debug!("{url} attempt {attempt} for {request_id}: {last}");
                    continue;
                }
            };
            let status = resp.status().as_u16();
            let text = match resp.body_mut().read_to_string() {
                Ok(t) => t,
                Err(e) => {
                    last = e.to_string();
                    continue;
                }
            };
            match status {
                200..=299 => {
                    return serde_json::from_str(&text).map_err(|e| {
                        BackendError::protocol(request_id, format!("{url}: malformed response: {e}"))
                    })
                }
                429 | 500..=599 => {
                    last = format!("HTTP {status}");
                    warn!("{url} answered {status} for {request_id}, attempt {}", attempt + 1);
                }
                _ => {
                    let snippet: String = text.chars().take(200).collect();
                    return Err(BackendError::protocol(request_id, format!("{url}: HTTP {status}: {snippet}")));
                }
            }
        }
        Err(BackendError::transport(
            request_id,
            format!("{url}: giving up after {} attempts: {last}", self.policy.max_attempts.max(1)),
        ))
    }
}

pub struct HttpGenerator {
    pub client: HttpClient,
    pub id: String,
    pub exemplars: Vec<Exemplar>,
    /// Send the rendered few-shot prompt along with the structured fields.
    pub send_prompt: bool,
}

impl HttpGenerator {
    pub fn new(client: HttpClient) -> Self {
        let id = format!("http:{}", client.base_url());
        HttpGenerator { client, id, exemplars: default_exemplars(), send_prompt: true }
    }
}

impl Generator for HttpGenerator {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn generate(
        &self,
        request_id: &str,
        request: &GeneratorRequest,
        _instance: &MaskedInstance,
    ) -> Result<GeneratorResponse, BackendError> {
        let prompt = self.send_prompt.then(|| build_prompt(request, &self.exemplars).render());
        self.client.post_json("/generate", request_id, &GenerateRequest::new(request_id, request, prompt))
    }
}

pub struct HttpClassifier(pub HttpClient);

impl Classifier for HttpClassifier {
    fn classify(&self, request_id: &str, request: &ClassifierRequest) -> Result<ClassifierResponse, BackendError> {
        self.0.post_json("/classify", request_id, &ClassifyRequest::new(request_id, request))
    }
}

pub struct HttpScorer(pub HttpClient);

impl Scorer for HttpScorer {
    fn score(&self, request_id: &str, request: &ScoreRequest) -> Result<ScoreResponse, BackendError> {
        let body = ScoreWireRequest { request_id: request_id.into(), body: request.clone() };
        self.0.post_json("/score", request_id, &body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_doubles_up_to_the_cap() {
        let p = RetryPolicy { base_delay_ms: 100, max_delay_ms: 1_000, ..RetryPolicy::default() };
        let ms: Vec<u128> = (0..6).map(|a| p.delay(a).as_millis()).collect();
        assert_eq!(ms, [100, 200, 400, 800, 1_000, 1_000]);
        assert_eq!(p.delay(u32::MAX).as_millis(), 1_000);
    }

    #[test]
    fn budget_counts_down() {
        let b = CallBudget::new(2);
        assert!(b.take() && b.take());
        assert!(!b.take() && !b.take());
        let unlimited = CallBudget::new(0);
        assert!((0..100).all(|_| unlimited.take()));
    }
}
