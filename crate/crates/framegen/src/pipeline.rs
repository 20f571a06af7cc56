//! End-to-end run: targets, expansion, overgeneration, strict filtering,
//! metrics, and the run ledger.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc::{self, Sender};
use std::sync::Mutex;

use framegen_core::expand::{ConditioningMode, DonorIndex, Expander, MaskedInstance, SelectionConfig};
use framegen_core::genfilter::{
    overgenerate, verify_candidate, Classifier, ClassifierRequest, ClassifierResponse, Decoding, FilterOutcome,
    GenerationCandidate, Generator, GeneratorRequest, GeneratorResponse, Verdict,
};
use framegen_core::metrics::{
    assemble_report, emit_review_sheet, pairwise_score, perplexity, MetricsReport, ReportInputs, ScoreRequest,
    ScoreResponse, Scorer,
};
use framegen_core::mock::{IdentityGenerator, MutatingGenerator, OracleClassifier};
use framegen_core::{AnnotatedSentence, BackendError, LuId, Pos, Split};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::formats::{partial_path, write_json, write_jsonl, write_text, FormatError, SentenceRecord};
use crate::http::{CallBudget, HttpClassifier, HttpClient, HttpGenerator, HttpScorer, RetryPolicy};
use crate::release::{load_release, LoadOptions, Release};
use crate::splits::SplitConfig;

pub const ENV_GENERATOR: &str = "FRAMEGEN_GENERATOR_URL";
pub const ENV_CLASSIFIER: &str = "FRAMEGEN_CLASSIFIER_URL";
pub const ENV_SCORER: &str = "FRAMEGEN_SCORER_URL";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Endpoints {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scorer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    /// POS of the unannotated LUs to expand; all POS when absent.
    #[serde(default = "verb")]
    pub pos: Option<Pos>,
    /// Number of target LUs to sample; 0 takes all.
    #[serde(default)]
    pub sample: usize,
    /// Split of the donor sentences.
    #[serde(default = "train_split")]
    pub donor_split: Option<Split>,
}

fn verb() -> Option<Pos> {
    Some(Pos::V)
}

fn train_split() -> Option<Split> {
    Some(Split::Train)
}

impl Default for TargetConfig {
    fn default() -> Self {
        TargetConfig { pos: verb(), sample: 0, donor_split: train_split() }
    }
}

/// In-process generator used when no generator endpoint is configured.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockConfig {
    #[serde(default)]
    pub mutation_rate: f64,
    #[serde(default)]
    pub malformed_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub release_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_config: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: ConditioningMode,
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default = "four")]
    pub concurrency: usize,
    #[serde(default)]
    pub endpoints: Endpoints,
    #[serde(default)]
    pub retry: RetryPolicy,
    #[serde(default)]
    pub targets: TargetConfig,
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub decoding: Decoding,
    #[serde(default)]
    pub mock: MockConfig,
    /// Rows of review.tsv, at most the retained count; 0 skips the sheet.
    #[serde(default)]
    pub review_k: usize,
}

fn default_mode() -> ConditioningMode {
    ConditioningMode::FeConditioning
}

fn one() -> usize {
    1
}

fn four() -> usize {
    4
}

impl RunConfig {
    pub fn new(release_dir: impl Into<PathBuf>, output_dir: impl Into<PathBuf>, seed: u64) -> Self {
        RunConfig {
            release_dir: release_dir.into(),
            split_config: None,
            output_dir: output_dir.into(),
            seed,
            mode: default_mode(),
            n: 1,
            concurrency: 4,
            endpoints: Endpoints::default(),
            retry: RetryPolicy::default(),
            targets: TargetConfig::default(),
            selection: SelectionConfig::default(),
            decoding: Decoding::default(),
            mock: MockConfig::default(),
            review_k: 0,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Endpoint environment variables override the file.
    pub fn apply_env(&mut self) {
        let get = |k: &str| std::env::var(k).ok().filter(|v| !v.trim().is_empty());
        if let Some(v) = get(ENV_GENERATOR) {
            self.endpoints.generator = Some(v);
        }
        if let Some(v) = get(ENV_CLASSIFIER) {
            self.endpoints.classifier = Some(v);
        }
        if let Some(v) = get(ENV_SCORER) {
            self.endpoints.scorer = Some(v);
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n == 0 {
            return Err("n must be at least 1".into());
        }
        if self.concurrency == 0 {
            return Err("concurrency must be at least 1".into());
        }
        for (k, r) in [("mutation_rate", self.mock.mutation_rate), ("malformed_rate", self.mock.malformed_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(format!("mock.{k} = {r} outside [0, 1]"));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, thiserror::Error)]
#[error("stage {stage}{}: {message}", instance.as_ref().map(|i| format!(" (instance {i})")).unwrap_or_default())]
pub struct PipelineError {
    pub stage: &'static str,
    pub instance: Option<String>,
    pub message: String,
}

impl PipelineError {
    fn new(stage: &'static str, instance: Option<String>, message: impl ToString) -> Self {
        PipelineError { stage, instance, message: message.to_string() }
    }
}

fn out_err(stage: &'static str) -> impl Fn(FormatError) -> PipelineError {
    move |e| PipelineError::new(stage, None, e)
}

#[derive(Default)]
pub struct Backends {
    pub generator: Option<Box<dyn Generator + Sync>>,
    pub classifier: Option<Box<dyn Classifier + Sync>>,
    pub scorer: Option<Box<dyn Scorer + Sync>>,
}

impl Backends {
    /// HTTP clients for the configured endpoints; missing ones stay empty.
    pub fn from_config(config: &RunConfig) -> Self {
        let budget = CallBudget::new(config.retry.budget);
        let client = |url: &String| HttpClient::new(url, config.retry.clone(), budget.clone());
        Backends {
            generator: config
                .endpoints
                .generator
                .as_ref()
                .map(|u| Box::new(HttpGenerator::new(client(u))) as Box<dyn Generator + Sync>),
            classifier: config
                .endpoints
                .classifier
                .as_ref()
                .map(|u| Box::new(HttpClassifier(client(u))) as Box<dyn Classifier + Sync>),
            scorer: config.endpoints.scorer.as_ref().map(|u| Box::new(HttpScorer(client(u))) as Box<dyn Scorer + Sync>),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Call {
    Generate,
    Classify,
    Score,
}

struct CountingGenerator<'a> {
    inner: &'a (dyn Generator + Sync),
    tx: Sender<Call>,
}

impl Generator for CountingGenerator<'_> {
    fn id(&self) -> String {
        self.inner.id()
    }

    fn generate(&self, id: &str, r: &GeneratorRequest, m: &MaskedInstance) -> Result<GeneratorResponse, BackendError> {
        let _ = self.tx.send(Call::Generate);
        self.inner.generate(id, r, m)
    }
}

struct CountingClassifier<'a> {
    inner: &'a (dyn Classifier + Sync),
    tx: Sender<Call>,
}

impl Classifier for CountingClassifier<'_> {
    fn classify(&self, id: &str, r: &ClassifierRequest) -> Result<ClassifierResponse, BackendError> {
        let _ = self.tx.send(Call::Classify);
        self.inner.classify(id, r)
    }
}

struct CountingScorer<'a> {
    inner: &'a (dyn Scorer + Sync),
    tx: Sender<Call>,
}

impl Scorer for CountingScorer<'_> {
    fn score(&self, id: &str, r: &ScoreRequest) -> Result<ScoreResponse, BackendError> {
        let _ = self.tx.send(Call::Score);
        self.inner.score(id, r)
    }
}

/// Map `f` over `items` on at most `workers` threads; results keep input order.
pub fn bounded_map<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = workers.max(1).min(items.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap().expect("every slot filled")).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub targets: usize,
    pub masked: usize,
    /// Targets without a usable sister-LU donor.
    pub no_donor: usize,
    pub candidates: usize,
    /// Backend samples dropped for a malformed fill list.
    pub dropped_malformed: usize,
    pub retained: usize,
    pub unverifiable: usize,
    pub review_rows: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendCalls {
    pub generate: usize,
    pub classify: usize,
    pub score: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub config: RunConfig,
    pub config_hash: String,
    pub generator_id: String,
    pub classifier: String,
    pub stages: Vec<String>,
    pub counts: StageCounts,
    pub backend_calls: BackendCalls,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub ledger: Ledger,
    pub report: MetricsReport,
    pub masked: Vec<MaskedInstance>,
    pub candidates: Vec<GenerationCandidate>,
    pub outcome: FilterOutcome,
}

pub const OUTPUT_FILES: [&str; 5] = ["masked.jsonl", "candidates.jsonl", "retained.jsonl", "report.json", "ledger.json"];

/// Load the release named by the config and run every stage.
pub fn run_pipeline(config: &RunConfig) -> Result<RunOutput, PipelineError> {
    config.validate().map_err(|e| PipelineError::new("config", None, e))?;
    let splits = match &config.split_config {
        Some(p) => SplitConfig::load(p).map_err(|e| PipelineError::new("load", None, e))?,
        None => SplitConfig::standard(),
    };
    let release = load_release(&config.release_dir, &LoadOptions { corpus: true, splits })
        .map_err(|e| PipelineError::new("load", None, e))?;
    run_with(config, &release, Backends::from_config(config))
}

/// Choose target LUs: unannotated LUs of the configured POS, sampled with
/// the run seed, in id order.
pub fn select_targets(expander: &Expander<'_>, config: &RunConfig) -> Vec<LuId> {
    let all = expander.unannotated_lus(config.targets.pos);
    if config.targets.sample == 0 || config.targets.sample >= all.len() {
        return all;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut idx = rand::seq::index::sample(&mut rng, all.len(), config.targets.sample).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| all[i]).collect()
}

pub fn run_with(config: &RunConfig, release: &Release, backends: Backends) -> Result<RunOutput, PipelineError> {
    config.validate().map_err(|e| PipelineError::new("config", None, e))?;
    let out_dir = &config.output_dir;
    std::fs::create_dir_all(out_dir).map_err(|e| PipelineError::new("output", None, e))?;
    for f in OUTPUT_FILES.iter().chain(["verdicts.jsonl", "review.tsv"].iter()) {
        let _ = std::fs::remove_file(out_dir.join(f));
        let _ = std::fs::remove_file(partial_path(&out_dir.join(f)));
    }
    let (tx, rx) = mpsc::channel::<Call>();
    let ledger_thread = std::thread::spawn(move || {
        let mut calls = BackendCalls::default();
        for c in rx {
            match c {
                Call::Generate => calls.generate += 1,
                Call::Classify => calls.classify += 1,
                Call::Score => calls.score += 1,
            }
        }
        calls
    });
    let mut stages = Vec::new();
    let mut counts = StageCounts::default();
    let mut written: Vec<PathBuf> = Vec::new();
    let partial = |name: &str| partial_path(&out_dir.join(name));

    // targets and expansion
    let lexicon = &release.lexicon;
    let expander = Expander::new(lexicon, config.selection.clone());
    let targets = select_targets(&expander, config);
    counts.targets = targets.len();
    stages.push("targets".to_string());
    let donors_owned: Vec<AnnotatedSentence> = release
        .corpus
        .records()
        .filter(|r| config.targets.donor_split.map_or(true, |s| r.split == s))
        .collect();
    let donors = DonorIndex::new(donors_owned.iter());
    let mut masked = Vec::new();
    for t in &targets {
        match expander.expand_target(*t, &donors, config.mode) {
            Ok(Some(m)) => masked.push(m),
            Ok(None) => counts.no_donor += 1,
            Err(e) => return Err(PipelineError::new("expand", Some(format!("lu{t}")), e)),
        }
    }
    counts.masked = masked.len();
    write_jsonl(&partial("masked.jsonl"), &masked).map_err(out_err("expand"))?;
    written.push(out_dir.join("masked.jsonl"));
    stages.push("expand".to_string());

    // generation
    let mock_gen: Box<dyn Generator + Sync> = if config.mock.mutation_rate > 0.0 || config.mock.malformed_rate > 0.0 {
        Box::new(MutatingGenerator {
            seed: config.seed,
            mutation_rate: config.mock.mutation_rate,
            malformed_rate: config.mock.malformed_rate,
        })
    } else {
        Box::new(IdentityGenerator)
    };
    let generator: &(dyn Generator + Sync) = backends.generator.as_deref().unwrap_or(mock_gen.as_ref());
    let counted_gen = CountingGenerator { inner: generator, tx: tx.clone() };
    let decoding = Decoding { seed: config.decoding.seed.or(Some(config.seed)), ..config.decoding.clone() };
    let results = bounded_map(&masked, config.concurrency, |m| {
        let req = GeneratorRequest::new(m, config.n, decoding.clone())?;
        overgenerate(m, &req, &counted_gen, &m.id)
    });
    let mut candidates = Vec::new();
    for (m, r) in masked.iter().zip(results) {
        let r = r.map_err(|e| PipelineError::new("generate", Some(m.id.clone()), e))?;
        counts.dropped_malformed += r.dropped;
        candidates.extend(r.candidates);
    }
    counts.candidates = candidates.len();
    write_jsonl(&partial("candidates.jsonl"), &candidates).map_err(out_err("generate"))?;
    written.push(out_dir.join("candidates.jsonl"));
    stages.push("generate".to_string());

    // strict filter
    let oracle;
    let (classifier, classifier_name): (&(dyn Classifier + Sync), String) = match backends.classifier.as_deref() {
        Some(c) => (c, config.endpoints.classifier.clone().unwrap_or_else(|| "external".into())),
        None => {
            oracle = OracleClassifier::from_instances(masked.iter().map(|m| &m.source));
            (&oracle, "mock-oracle".into())
        }
    };
    let counted_cls = CountingClassifier { inner: classifier, tx: tx.clone() };
    let verdicts: Vec<Verdict> =
        bounded_map(&candidates, config.concurrency, |c| verify_candidate(lexicon, c, &counted_cls));
    let outcome = FilterOutcome::from_verdicts(&candidates, verdicts);
    counts.retained = outcome.retained.len();
    counts.unverifiable = outcome.unverifiable();
    let fidelity_of: BTreeMap<&str, f64> = outcome
        .verdicts
        .iter()
        .filter_map(|v| v.verdict.scored().map(|s| (v.candidate_id.as_str(), s.fidelity)))
        .collect();
    let retained_records: Vec<SentenceRecord> = outcome
        .retained
        .iter()
        .map(|c| SentenceRecord::from_candidate(c, fidelity_of.get(c.id().as_str()).copied().unwrap_or(1.0)))
        .collect();
    write_jsonl(&partial("retained.jsonl"), &retained_records).map_err(out_err("filter"))?;
    written.push(out_dir.join("retained.jsonl"));
    write_jsonl(&partial("verdicts.jsonl"), &outcome.verdicts).map_err(out_err("filter"))?;
    written.push(out_dir.join("verdicts.jsonl"));
    stages.push("filter".to_string());

    // metrics
    let by_id: BTreeMap<&str, &MaskedInstance> = masked.iter().map(|m| (m.id.as_str(), m)).collect();
    let retained_texts: Vec<String> = outcome.retained.iter().map(|c| c.text.clone()).collect();
    let source_texts: Vec<String> =
        outcome.retained.iter().map(|c| by_id[c.instance_id.as_str()].source.text.clone()).collect();
    let (mut ppl, mut bart) = (None, None);
    if let Some(scorer) = backends.scorer.as_deref() {
        let counted = CountingScorer { inner: scorer, tx: tx.clone() };
        if !retained_texts.is_empty() {
            ppl = Some(
                perplexity(&retained_texts, &counted, "perplexity")
                    .map_err(|e| PipelineError::new("metrics", Some("perplexity".into()), e))?,
            );
            bart = Some(
                pairwise_score(&retained_texts, &source_texts, &counted, "bart_score")
                    .map_err(|e| PipelineError::new("metrics", Some("bart_score".into()), e))?,
            );
        }
    }
    let report = assemble_report(&ReportInputs {
        candidates: &candidates,
        outcome: Some(&outcome),
        source_texts: Some(&source_texts),
        reference_based: true,
        perplexity: ppl,
        bart_score: bart,
        self_bleu_max_n: 4,
    });
    write_json(&partial("report.json"), &report).map_err(out_err("metrics"))?;
    written.push(out_dir.join("report.json"));
    stages.push("metrics".to_string());

    // capped at what survived the filter
    let review_k = config.review_k.min(outcome.retained.len());
    if review_k > 0 {
        let sheet = emit_review_sheet(&outcome.retained, review_k, config.seed)
            .map_err(|e| PipelineError::new("review", None, e))?;
        counts.review_rows = sheet.rows.len();
        write_text(&partial("review.tsv"), &sheet.to_tsv()).map_err(out_err("review"))?;
        written.push(out_dir.join("review.tsv"));
        stages.push("review".to_string());
    }

    drop(tx);
    drop(counted_gen);
    drop(counted_cls);
    let backend_calls = ledger_thread.join().expect("ledger thread");
    let ledger = Ledger {
        config: config.clone(),
        config_hash: config.hash(),
        generator_id: generator.id(),
        classifier: classifier_name,
        stages,
        counts,
        backend_calls,
    };
    write_json(&partial("ledger.json"), &ledger).map_err(out_err("ledger"))?;
    written.push(out_dir.join("ledger.json"));

    for final_path in &written {
        let p = partial_path(final_path);
        std::fs::rename(&p, final_path).map_err(|e| PipelineError::new("output", None, format!("{}: {e}", p.display())))?;
    }
    Ok(RunOutput { ledger, report, masked, candidates, outcome })
}

/// `true` when `dir` holds every final output file and no `.partial` ones.
pub fn outputs_complete(dir: &Path) -> bool {
    OUTPUT_FILES.iter().all(|f| dir.join(f).is_file())
        && std::fs::read_dir(dir)
            .map(|rd| rd.filter_map(|e| e.ok()).all(|e| !e.file_name().to_string_lossy().ends_with(".partial")))
            .unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_defaults_and_unknown_keys() {
        let c = RunConfig::from_toml("release_dir = \"r\"\noutput_dir = \"o\"\nseed = 5\n").unwrap();
        assert_eq!(c, RunConfig::new("r", "o", 5));
        assert_eq!(c.targets.pos, Some(Pos::V));
        let full = "release_dir = \"r\"\noutput_dir = \"o\"\nseed = 5\nmode = \"no_conditioning\"\nn = 3\n\
                    [targets]\npos = \"n\"\nsample = 10\n[retry]\nmax_attempts = 2\n[selection]\n\
                    include_core_unexpressed = true\nancestor_relations = [\"Inheritance\", \"Using\"]\n";
        let c = RunConfig::from_toml(full).unwrap();
        assert_eq!((c.mode, c.n, c.targets.pos, c.targets.sample), (ConditioningMode::NoConditioning, 3, Some(Pos::N), 10));
        assert_eq!(c.retry.max_attempts, 2);
        assert_eq!(c.retry.base_delay_ms, 250);
        assert!(c.selection.include_core_unexpressed);
        assert!(RunConfig::from_toml("release_dir = \"r\"\noutput_dir = \"o\"\nseed = 5\nnn = 1\n").is_err());
        assert!(RunConfig::from_toml("release_dir = \"r\"\noutput_dir = \"o\"\n").is_err());
    }

    #[test]
    fn hash_tracks_every_field() {
        let a = RunConfig::new("r", "o", 1);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.decoding.temperature = 0.3;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn bounded_map_keeps_order() {
        let items: Vec<u32> = (0..200).collect();
        assert_eq!(bounded_map(&items, 7, |x| x * 2), items.iter().map(|x| x * 2).collect::<Vec<_>>());
        assert_eq!(bounded_map(&items, 1, |x| *x), items);
        assert!(bounded_map(&Vec::<u32>::new(), 4, |x| *x).is_empty());
    }
}
