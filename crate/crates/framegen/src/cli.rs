//! `framegen` command line.

use std::collections::{BTreeMap, BTreeSet};
use std::error::Error as StdError;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use framegen_core::expand::{ConditioningMode, DonorIndex, Expander, MaskedInstance, SelectionConfig};
use framegen_core::genfilter::{
    overgenerate, verify_candidate, CandidateVerdict, Classifier, Decoding, FilterOutcome, GenerationCandidate,
    Generator, GeneratorRequest,
};
use framegen_core::lexicon::{coverage_report, pos_stats};
use framegen_core::metrics::{assemble_report, emit_review_sheet, pairwise_score, perplexity, ReportInputs};
use framegen_core::mock::{IdentityGenerator, OracleClassifier};
use framegen_core::relations::{RelationSet, RelationType};
use framegen_core::srl::{
    budget_from_fraction, plan_inverse_f1, plan_low_resource, plan_non_oracle_removal, plan_oracle_threshold,
    resolve_manifest, score_srl, AugSource, LuScore, Manifest, SrlPrediction,
};
use framegen_core::{CorpusSentence, Pos, Split};

use crate::formats::{read_json, read_jsonl, write_json, write_jsonl, write_text, JsonlWriter, SentenceRecord, TRAIN_HEADER};
use crate::http::{CallBudget, HttpClassifier, HttpClient, HttpGenerator, HttpScorer, RetryPolicy};
use crate::pipeline::{bounded_map, run_pipeline, select_targets, RunConfig, ENV_CLASSIFIER, ENV_GENERATOR, ENV_SCORER};
use crate::release::{load_release, LoadOptions, Release};
use crate::splits::SplitConfig;

type CliResult = Result<(), Box<dyn StdError>>;

#[derive(Parser, Debug)]
#[command(name = "framegen", version, about = "Expand a frame-semantic lexicon with generated annotated sentences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ReleaseArgs {
    /// Release directory (frame/, lu/, fulltext/, frRelation.xml)
    #[arg(long, env = "FRAMENET_DIR")]
    pub release: PathBuf,
    /// Split config (TOML); the standard dev/test lists by default
    #[arg(long)]
    pub splits: Option<PathBuf>,
}

impl ReleaseArgs {
    fn load(&self, corpus: bool) -> Result<Release, Box<dyn StdError>> {
        let splits = match &self.splits {
            Some(p) => SplitConfig::load(p)?,
            None => SplitConfig::standard(),
        };
        Ok(load_release(&self.release, &LoadOptions { corpus, splits })?)
    }
}

#[derive(Args, Debug, Clone)]
pub struct SelectionArgs {
    /// Count Core-Unexpressed FEs as core
    #[arg(long)]
    pub include_core_unexpressed: bool,
    /// Relation types followed for the Agent/Self_mover ancestry test
    #[arg(long, value_delimiter = ',', default_value = "inheritance")]
    pub relations: Vec<RelationType>,
}

impl SelectionArgs {
    fn config(&self) -> SelectionConfig {
        SelectionConfig {
            include_core_unexpressed: self.include_core_unexpressed,
            ancestor_relations: RelationSet::of(&self.relations),
            ..SelectionConfig::default()
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct RetryArgs {
    #[arg(long, default_value_t = 4)]
    pub max_attempts: u32,
    /// Total HTTP request budget; 0 is unlimited
    #[arg(long, default_value_t = 0)]
    pub request_budget: u64,
    #[arg(long, default_value_t = 4)]
    pub concurrency: usize,
}

impl RetryArgs {
    fn policy(&self) -> RetryPolicy {
        RetryPolicy { max_attempts: self.max_attempts, budget: self.request_budget, ..RetryPolicy::default() }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Oracle,
    NonOracle,
    InverseF1,
    LowResource,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum AugSourceArg {
    Generated,
    Human,
}

#[derive(Subcommand, Debug)]
pub enum RelationsCommand {
    /// Print FE ancestors and descendants, or every edge when no FE is given
    Dump {
        #[command(flatten)]
        release: ReleaseArgs,
        /// FE as Frame.FE
        #[arg(long)]
        fe: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "inheritance")]
        types: Vec<RelationType>,
    },
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Load a release and write its annotated records as JSONL
    Ingest {
        #[command(flatten)]
        release: ReleaseArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-POS instance counts and mean FE, core FE and candidate FE counts
    Stats {
        #[command(flatten)]
        release: ReleaseArgs,
        #[command(flatten)]
        selection: SelectionArgs,
        /// Restrict to one split
        #[arg(long)]
        split: Option<Split>,
        #[arg(long)]
        json: bool,
    },
    /// Share of LUs with at least one annotation
    Coverage {
        #[command(flatten)]
        release: ReleaseArgs,
        /// Use only the lexicon files, not the loaded annotations
        #[arg(long)]
        lexicon_only: bool,
    },
    /// Build masked instances for unannotated LUs
    Expand {
        #[command(flatten)]
        release: ReleaseArgs,
        #[command(flatten)]
        selection: SelectionArgs,
        #[arg(long, default_value = "fe")]
        mode: ConditioningMode,
        #[arg(long, default_value = "v")]
        pos: Option<Pos>,
        /// Number of target LUs to sample; 0 takes all
        #[arg(long, default_value_t = 0)]
        sample: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Overgenerate fills for masked instances
    Generate {
        #[arg(long)]
        masked: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = ENV_GENERATOR)]
        generator: Option<String>,
        #[command(flatten)]
        retry: RetryArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply the strict FE-fidelity filter
    Filter {
        #[command(flatten)]
        release: ReleaseArgs,
        #[arg(long)]
        candidates: PathBuf,
        /// Masked instances; needed for the gold-lookup classifier
        #[arg(long)]
        masked: Option<PathBuf>,
        #[arg(long, env = ENV_CLASSIFIER)]
        classifier: Option<String>,
        #[command(flatten)]
        retry: RetryArgs,
        #[arg(long)]
        verdicts: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Assemble the metrics report
    Metrics {
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        verdicts: PathBuf,
        #[arg(long)]
        masked: Option<PathBuf>,
        #[arg(long, env = ENV_SCORER)]
        scorer: Option<String>,
        #[command(flatten)]
        retry: RetryArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit a human review sheet (TSV)
    ReviewSheet {
        #[arg(long)]
        candidates: PathBuf,
        /// Only candidates that passed these verdicts
        #[arg(long)]
        verdicts: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score frame-SRL predictions against gold
    ScoreSrl {
        #[command(flatten)]
        release: ReleaseArgs,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, default_value = "test")]
        split: Split,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build an augmentation plan and its manifest
    PlanAug {
        #[command(flatten)]
        release: ReleaseArgs,
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        /// Per-LU scores (score-srl output or a list of LU scores)
        #[arg(long)]
        scores: Option<PathBuf>,
        #[arg(long, default_value_t = 0.75)]
        threshold: f64,
        #[arg(long, default_value_t = 150)]
        k: usize,
        #[arg(long, default_value = "v")]
        pos: Option<Pos>,
        #[arg(long, default_value_t = 0.05)]
        budget_fraction: f64,
        #[arg(long, default_value_t = 0.25)]
        base: f64,
        #[arg(long, default_value_t = 0.0625)]
        aug: f64,
        #[arg(long, value_enum, default_value = "generated")]
        source: AugSourceArg,
        /// Retained generations (JSONL) for the generated source
        #[arg(long)]
        generations: Option<PathBuf>,
        /// Also draw from lexicographic sentences
        #[arg(long)]
        with_lexicographic: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write training JSONL for a manifest
    EmitTrain {
        #[command(flatten)]
        release: ReleaseArgs,
        /// Plan or bare manifest JSON
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        generations: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full pipeline from a TOML run config
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        release: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        mode: Option<ConditioningMode>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long)]
        concurrency: Option<usize>,
    },
    /// Relation graph queries
    #[command(subcommand)]
    Relations(RelationsCommand),
}

pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn print_json<T: serde::Serialize>(v: &T) -> CliResult {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn http(url: &str, retry: &RetryArgs) -> HttpClient {
    HttpClient::new(url, retry.policy(), CallBudget::new(retry.request_budget))
}

pub fn dispatch(cmd: Command) -> CliResult {
    match cmd {
        Command::Ingest { release, out } => ingest(&release, &out),
        Command::Stats { release, selection, split, json } => stats(&release, &selection, split, json),
        Command::Coverage { release, lexicon_only } => {
            let r = release.load(!lexicon_only)?;
            print_json(&coverage_report(&r.lexicon)?)
        }
        Command::Expand { release, selection, mode, pos, sample, seed, out } => {
            let r = release.load(true)?;
            let mut cfg = RunConfig::new(&release.release, ".", seed);
            cfg.targets.pos = pos;
            cfg.targets.sample = sample;
            cfg.selection = selection.config();
            cfg.mode = mode;
            let masked = expand(&r, &cfg)?;
            let n = write_jsonl(&out, &masked)?;
            eprintln!("{n} masked instances");
            Ok(())
        }
        Command::Generate { masked, n, seed, generator, retry, out } => {
            let masked: Vec<MaskedInstance> = read_jsonl(&masked)?;
            let backend: Box<dyn Generator + Sync> = match generator {
                Some(u) => Box::new(HttpGenerator::new(http(&u, &retry))),
                None => Box::new(IdentityGenerator),
            };
            let decoding = Decoding { seed: Some(seed), ..Decoding::default() };
            let results = bounded_map(&masked, retry.concurrency, |m| {
                let req = GeneratorRequest::new(m, n, decoding.clone())?;
                overgenerate(m, &req, backend.as_ref(), &m.id)
            });
            let mut w = JsonlWriter::create(&out)?;
            let mut dropped = 0;
            for (m, r) in masked.iter().zip(results) {
                let r = r.map_err(|e| format!("instance {}: {e}", m.id))?;
                dropped += r.dropped;
                for c in &r.candidates {
                    w.write(c)?;
                }
            }
            let n = w.commit()?;
            eprintln!("{n} candidates, {dropped} malformed samples dropped");
            Ok(())
        }
        Command::Filter { release, candidates, masked, classifier, retry, verdicts, out } => {
            let r = release.load(!release.release.as_os_str().is_empty() && masked.is_none() && classifier.is_none())?;
            let cands: Vec<GenerationCandidate> = read_jsonl(&candidates)?;
            let backend: Box<dyn Classifier + Sync> = match (classifier, masked) {
                (Some(u), _) => Box::new(HttpClassifier(http(&u, &retry))),
                (None, Some(m)) => {
                    let m: Vec<MaskedInstance> = read_jsonl(&m)?;
                    Box::new(OracleClassifier::from_instances(m.iter().map(|m| &m.source)))
                }
                (None, None) => {
                    let recs: Vec<_> = r.corpus.records().collect();
                    Box::new(OracleClassifier::from_records(&r.lexicon, recs.iter()))
                }
            };
            let vs = bounded_map(&cands, retry.concurrency, |c| verify_candidate(&r.lexicon, c, backend.as_ref()));
            let outcome = FilterOutcome::from_verdicts(&cands, vs);
            let fid: BTreeMap<String, f64> = outcome
                .verdicts
                .iter()
                .filter_map(|v| v.verdict.scored().map(|s| (v.candidate_id.clone(), s.fidelity)))
                .collect();
            let recs: Vec<SentenceRecord> = outcome
                .retained
                .iter()
                .map(|c| SentenceRecord::from_candidate(c, fid.get(&c.id()).copied().unwrap_or(1.0)))
                .collect();
            write_jsonl(&out, &recs)?;
            if let Some(v) = verdicts {
                write_jsonl(&v, &outcome.verdicts)?;
            }
            eprintln!(
                "{} of {} candidates retained, {} unverifiable",
                outcome.retained.len(),
                cands.len(),
                outcome.unverifiable()
            );
            Ok(())
        }
        Command::Metrics { candidates, verdicts, masked, scorer, retry, out } => {
            let cands: Vec<GenerationCandidate> = read_jsonl(&candidates)?;
            let vs: Vec<CandidateVerdict> = read_jsonl(&verdicts)?;
            let outcome = outcome_from(&cands, vs)?;
            let source_texts: Option<Vec<String>> = match masked {
                Some(p) => {
                    let m: Vec<MaskedInstance> = read_jsonl(&p)?;
                    let by_id: BTreeMap<String, String> = m.into_iter().map(|m| (m.id, m.source.text)).collect();
                    Some(outcome.retained.iter().filter_map(|c| by_id.get(&c.instance_id).cloned()).collect())
                }
                None => None,
            };
            let (mut ppl, mut bart) = (None, None);
            if let Some(u) = scorer {
                let s = HttpScorer(http(&u, &retry));
                let texts: Vec<String> = outcome.retained.iter().map(|c| c.text.clone()).collect();
                if !texts.is_empty() {
                    ppl = Some(perplexity(&texts, &s, "perplexity")?);
                    if let Some(src) = &source_texts {
                        bart = Some(pairwise_score(&texts, src, &s, "bart_score")?);
                    }
                }
            }
            let report = assemble_report(&ReportInputs {
                candidates: &cands,
                outcome: Some(&outcome),
                source_texts: source_texts.as_deref(),
                reference_based: true,
                perplexity: ppl,
                bart_score: bart,
                self_bleu_max_n: 4,
            });
            write_json(&out, &report)?;
            print_json(&report)
        }
        Command::ReviewSheet { candidates, verdicts, k, seed, out } => {
            let mut cands: Vec<GenerationCandidate> = read_jsonl(&candidates)?;
            if let Some(v) = verdicts {
                let vs: Vec<CandidateVerdict> = read_jsonl(&v)?;
                cands = outcome_from(&cands, vs)?.retained;
            }
            let sheet = emit_review_sheet(&cands, k, seed)?;
            write_text(&out, &sheet.to_tsv())?;
            eprintln!("{} rows", sheet.rows.len());
            Ok(())
        }
        Command::ScoreSrl { release, predictions, split, out } => {
            let r = release.load(true)?;
            let gold: Vec<_> = r.corpus.records().filter(|x| x.split == split).collect();
            let preds: Vec<SrlPrediction> = read_jsonl(&predictions)?;
            let scores = score_srl(&r.lexicon, &gold, &preds)?;
            write_json(&out, &scores)?;
            eprintln!("P {:.4} R {:.4} F1 {:.4}", scores.precision, scores.recall, scores.f1);
            Ok(())
        }
        Command::PlanAug {
            release,
            strategy,
            scores,
            threshold,
            k,
            pos,
            budget_fraction,
            base,
            aug,
            source,
            generations,
            with_lexicographic,
            seed,
            out,
        } => {
            let r = release.load(true)?;
            let pool: Vec<CorpusSentence> = r
                .corpus
                .sentences
                .iter()
                .filter(|s| s.split == Split::Train && (with_lexicographic || s.source.is_fulltext()))
                .cloned()
                .collect();
            let load_scores = || -> Result<Vec<LuScore>, Box<dyn StdError>> {
                let p = scores.as_ref().ok_or("--scores is required for this strategy")?;
                let v: serde_json::Value = read_json(p)?;
                let list = v.get("per_lu").cloned().unwrap_or(v);
                Ok(serde_json::from_value(list)?)
            };
            let plan = match strategy {
                StrategyArg::Oracle => plan_oracle_threshold(&r.lexicon, &pool, &load_scores()?, threshold, pos),
                StrategyArg::NonOracle => plan_non_oracle_removal(&r.lexicon, &pool, k, pos, seed)?,
                StrategyArg::InverseF1 => {
                    let records: usize = pool.iter().map(|s| s.annotations.len()).sum();
                    plan_inverse_f1(&pool, &load_scores()?, budget_from_fraction(budget_fraction, records)?)?
                }
                StrategyArg::LowResource => {
                    let ids: Vec<String> = match (source, &generations) {
                        (AugSourceArg::Generated, Some(g)) => {
                            read_jsonl::<SentenceRecord>(g)?.into_iter().map(|r| r.id).collect()
                        }
                        (AugSourceArg::Generated, None) => return Err("--generations is required".into()),
                        (AugSourceArg::Human, _) => Vec::new(),
                    };
                    let src = match source {
                        AugSourceArg::Generated => AugSource::Generated(&ids),
                        AugSourceArg::Human => AugSource::HumanHeldOut,
                    };
                    plan_low_resource(&pool, base, aug, src, seed)?
                }
            };
            write_json(&out, &plan)?;
            eprintln!(
                "{} sentences, {} excluded LUs, {} generations, {} selected LUs",
                plan.manifest.sentence_ids.len(),
                plan.manifest.exclude_lus.len(),
                plan.manifest.generation_ids.len(),
                plan.selected_lus.len()
            );
            Ok(())
        }
        Command::EmitTrain { release, manifest, generations, out } => {
            let r = release.load(true)?;
            let v: serde_json::Value = read_json(&manifest)?;
            let m: Manifest = serde_json::from_value(v.get("manifest").cloned().unwrap_or(v))?;
            let gens: Vec<SentenceRecord> = match &generations {
                Some(g) => read_jsonl(g)?,
                None => Vec::new(),
            };
            let n = emit_training(&r, &m, &gens, &out)?;
            eprintln!("{n} records");
            Ok(())
        }
        Command::Run { config, release, out, mode, n, seed, sample, concurrency } => {
            let text = std::fs::read_to_string(&config).map_err(|e| format!("{}: {e}", config.display()))?;
            let mut cfg = RunConfig::from_toml(&text).map_err(|e| format!("{}: {e}", config.display()))?;
            cfg.apply_env();
            if let Some(v) = release {
                cfg.release_dir = v;
            }
            if let Some(v) = out {
                cfg.output_dir = v;
            }
            if let Some(v) = mode {
                cfg.mode = v;
            }
            if let Some(v) = n {
                cfg.n = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            if let Some(v) = sample {
                cfg.targets.sample = v;
            }
            if let Some(v) = concurrency {
                cfg.concurrency = v;
            }
            let run = run_pipeline(&cfg)?;
            print_json(&run.ledger.counts)
        }
        Command::Relations(RelationsCommand::Dump { release, fe, types }) => {
            let r = release.load(false)?;
            relations_dump(&r, fe.as_deref(), RelationSet::of(&types))
        }
    }
}

fn outcome_from(cands: &[GenerationCandidate], vs: Vec<CandidateVerdict>) -> Result<FilterOutcome, Box<dyn StdError>> {
    let mut by_id: BTreeMap<String, CandidateVerdict> = vs.into_iter().map(|v| (v.candidate_id.clone(), v)).collect();
    let mut verdicts = Vec::with_capacity(cands.len());
    for c in cands {
        let v = by_id.remove(&c.id()).ok_or_else(|| format!("no verdict for candidate {}", c.id()))?;
        verdicts.push(v.verdict);
    }
    Ok(FilterOutcome::from_verdicts(cands, verdicts))
}

fn ingest(args: &ReleaseArgs, out: &Path) -> CliResult {
    let r = args.load(true)?;
    let mut w = JsonlWriter::create(out)?;
    for rec in r.corpus.records() {
        w.write(&SentenceRecord::from_annotated(&r, &rec)?)?;
    }
    let n = w.commit()?;
    #[derive(serde::Serialize)]
    struct Summary<'a> {
        counts: framegen_core::lexicon::LexiconCounts,
        records: usize,
        splits: crate::release::SplitSizes,
        load: &'a crate::release::LoadReport,
    }
    print_json(&Summary { counts: r.lexicon.counts(), records: n, splits: r.split_sizes(), load: &r.report })
}

fn stats(args: &ReleaseArgs, sel: &SelectionArgs, split: Option<Split>, json: bool) -> CliResult {
    let r = args.load(true)?;
    let cfg = sel.config();
    let expander = Expander::new(&r.lexicon, cfg.clone());
    let records: Vec<_> = r.corpus.records().filter(|x| split.map_or(true, |s| x.split == s)).collect();
    let rows = pos_stats(&r.lexicon, records.iter(), |c| cfg.is_core(c), |rec| expander.count_candidates(rec))?;
    if json {
        return print_json(&rows);
    }
    let mut out = std::io::stdout().lock();
    writeln!(out, "pos\tinstances\tavg_fes\tavg_core_fes\tavg_candidate_fes")?;
    for row in rows {
        writeln!(
            out,
            "{}\t{}\t{:.3}\t{:.3}\t{:.3}",
            row.pos, row.instances, row.avg_fes, row.avg_core_fes, row.avg_candidate_fes
        )?;
    }
    Ok(())
}

/// Masked instances for the configured targets, donors from the configured split.
pub fn expand(release: &Release, cfg: &RunConfig) -> Result<Vec<MaskedInstance>, Box<dyn StdError>> {
    let expander = Expander::new(&release.lexicon, cfg.selection.clone());
    let targets = select_targets(&expander, cfg);
    let donors_owned: Vec<_> =
        release.corpus.records().filter(|r| cfg.targets.donor_split.map_or(true, |s| r.split == s)).collect();
    let donors = DonorIndex::new(donors_owned.iter());
    let mut out = Vec::new();
    for t in targets {
        if let Some(m) = expander.expand_target(t, &donors, cfg.mode).map_err(|e| format!("lu{t}: {e}"))? {
            out.push(m);
        }
    }
    Ok(out)
}

/// Header line, the manifest's human records, then generations: those the
/// manifest names, or all of `generations` when it names none.
pub fn emit_training(
    release: &Release,
    manifest: &Manifest,
    generations: &[SentenceRecord],
    out: &Path,
) -> Result<usize, Box<dyn StdError>> {
    let records = resolve_manifest(&release.corpus, manifest)?;
    let mut w = JsonlWriter::create(out)?;
    w.header(TRAIN_HEADER)?;
    for rec in &records {
        w.write(&SentenceRecord::from_annotated(release, rec)?)?;
    }
    if manifest.generation_ids.is_empty() {
        for g in generations {
            w.write(g)?;
        }
    } else {
        let by_id: BTreeMap<&str, &SentenceRecord> = generations.iter().map(|g| (g.id.as_str(), g)).collect();
        for id in &manifest.generation_ids {
            let g = by_id.get(id.as_str()).ok_or_else(|| format!("unresolved generation id {id}"))?;
            w.write(*g)?;
        }
    }
    Ok(w.commit()?)
}

fn relations_dump(r: &Release, fe: Option<&str>, types: RelationSet) -> CliResult {
    let lex = &r.lexicon;
    let mut out = std::io::stdout().lock();
    let name = |id| {
        lex.fe(id)
            .ok()
            .and_then(|f| lex.frame(f.frame).ok().map(|fr| format!("{}.{}", fr.name, f.name)))
            .unwrap_or_else(|| format!("#{id}"))
    };
    match fe {
        None => {
            for e in lex.fe_relations().iter().filter(|e| types.contains(e.relation_type)) {
                writeln!(out, "{}\t{}\t{}", e.relation_type.release_name(), name(e.child_fe), name(e.parent_fe))?;
            }
        }
        Some(q) => {
            let (frame, fe_name) = q.split_once('.').ok_or("--fe expects Frame.FE")?;
            let frame = lex.frame_by_name(frame).ok_or_else(|| format!("unknown frame {frame}"))?;
            let fe = lex.fe_by_name(frame.id, fe_name).ok_or_else(|| format!("unknown FE {q}"))?;
            let anc: BTreeSet<String> = lex.fe_ancestors(fe.id, types)?.into_iter().map(name).collect();
            let desc: BTreeSet<String> = lex.fe_descendants(fe.id, types)?.into_iter().map(name).collect();
            writeln!(out, "ancestors\t{}", anc.into_iter().collect::<Vec<_>>().join(", "))?;
            writeln!(out, "descendants\t{}", desc.into_iter().collect::<Vec<_>>().join(", "))?;
            writeln!(out, "forbidden_ancestor\t{}", lex.has_forbidden_ancestor(fe.id, types)?)?;
        }
    }
    Ok(())
}
