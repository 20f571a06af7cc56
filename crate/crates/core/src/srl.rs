//! Frame-SRL span scoring with gold frame and LU, per-LU aggregation, and
//! augmentation plans with their dataset manifests.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{AnnotatedSentence, Corpus, CorpusSentence, Lexicon, LuId, Pos, SentenceId, Span};
use crate::text::char_len;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PredictedFe {
    pub fe_name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrlPrediction {
    pub sentence_id: SentenceId,
    pub frame: String,
    pub lu: LuId,
    pub predicted_fes: Vec<PredictedFe>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LuScore {
    pub lu: LuId,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub f1: f64,
}

/// 2tp / (2tp + fp + fn), 0 when the denominator is 0.
pub fn f1_score(tp: usize, fp: usize, fn_: usize) -> f64 {
    let d = 2 * tp + fp + fn_;
    if d == 0 {
        0.0
    } else {
        (2 * tp) as f64 / d as f64
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrlScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub per_lu: Vec<LuScore>,
}

type Key = (SentenceId, LuId);

/// Exact-span, exact-name matching, micro-averaged. Gold records without a
/// prediction count all their spans as misses.
pub fn score_srl(lexicon: &Lexicon, gold: &[AnnotatedSentence], predictions: &[SrlPrediction]) -> Result<SrlScores> {
    let mut gold_sets: BTreeMap<Key, (usize, BTreeSet<PredictedFe>)> = BTreeMap::new();
    for g in gold {
        let mut set = BTreeSet::new();
        for f in &g.fes {
            set.insert(PredictedFe { fe_name: lexicon.fe(f.fe)?.name.clone(), span: f.span });
        }
        let e = gold_sets.entry((g.sentence_id, g.lu)).or_insert((char_len(&g.text), BTreeSet::new()));
        e.1.extend(set);
    }
    let mut pred_sets: BTreeMap<Key, BTreeSet<PredictedFe>> = BTreeMap::new();
    for p in predictions {
        let key = (p.sentence_id, p.lu);
        let (len, _) = gold_sets.get(&key).ok_or(Error::UnknownSentence(p.sentence_id))?;
        for f in &p.predicted_fes {
            f.span.check(*len)?;
        }
        pred_sets.entry(key).or_default().extend(p.predicted_fes.iter().cloned());
    }
    let mut per_lu: BTreeMap<LuId, (usize, usize, usize)> = BTreeMap::new();
    let empty = BTreeSet::new();
    for (key, (_, g)) in &gold_sets {
        let p = pred_sets.get(key).unwrap_or(&empty);
        let tp = g.intersection(p).count();
        let e = per_lu.entry(key.1).or_default();
        e.0 += tp;
        e.1 += p.len() - tp;
        e.2 += g.len() - tp;
    }
    let (tp, fp, fn_) = per_lu.values().fold((0, 0, 0), |a, v| (a.0 + v.0, a.1 + v.1, a.2 + v.2));
    Ok(SrlScores {
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        f1: f1_score(tp, fp, fn_),
        tp,
        fp,
        fn_,
        per_lu: per_lu
            .into_iter()
            .map(|(lu, (tp, fp, fn_))| LuScore { lu, tp, fp, fn_, f1: f1_score(tp, fp, fn_) })
            .collect(),
    })
}

/// Gold annotations rendered as predictions.
pub fn gold_as_predictions(lexicon: &Lexicon, gold: &[AnnotatedSentence]) -> Result<Vec<SrlPrediction>> {
    gold.iter()
        .map(|g| {
            Ok(SrlPrediction {
                sentence_id: g.sentence_id,
                frame: lexicon.lu_frame(g.lu)?.name.clone(),
                lu: g.lu,
                predicted_fes: g
                    .fes
                    .iter()
                    .map(|f| Ok(PredictedFe { fe_name: lexicon.fe(f.fe)?.name.clone(), span: f.span }))
                    .collect::<Result<_>>()?,
            })
        })
        .collect()
}

/// LUs whose F1 is strictly below `threshold`, restricted to `pos` when
/// given. LUs missing from the lexicon are skipped under a POS filter.
pub fn select_oracle_lus(lexicon: &Lexicon, scores: &[LuScore], threshold: f64, pos: Option<Pos>) -> Vec<LuId> {
    let mut out: Vec<LuId> = scores
        .iter()
        .filter(|s| s.f1 < threshold)
        .filter(|s| match pos {
            None => true,
            Some(p) => lexicon.lu(s.lu).map(|lu| lu.pos == p).unwrap_or(false),
        })
        .map(|s| s.lu)
        .collect();
    out.sort();
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    OracleThreshold,
    NonOracleRemoval,
    InverseF1Weighted,
    LowResource,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub sentence_ids: Vec<SentenceId>,
    /// Records of these LUs are left out when the manifest is resolved.
    #[serde(default)]
    pub exclude_lus: Vec<LuId>,
    #[serde(default)]
    pub generation_ids: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LuAllocation {
    pub lu: LuId,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationPlan {
    pub strategy: Strategy,
    /// LUs to regenerate for.
    pub selected_lus: Vec<LuId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub allocations: Vec<LuAllocation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub held_out_sentence_ids: Vec<SentenceId>,
    pub base_fraction: f64,
    pub aug_fraction: f64,
    pub seed: u64,
    pub manifest: Manifest,
}

fn check_fraction(name: &str, f: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidArgument(format!("{name} = {f} outside [0, 1]")));
    }
    Ok(())
}

fn sorted_ids<'a>(pool: impl IntoIterator<Item = &'a CorpusSentence>) -> Vec<SentenceId> {
    let mut ids: Vec<SentenceId> = pool.into_iter().map(|s| s.id).collect();
    ids.sort();
    ids.dedup();
    ids
}

fn eligible_lus(lexicon: &Lexicon, pool: &[CorpusSentence], pos: Option<Pos>) -> Vec<LuId> {
    let set: BTreeSet<LuId> = pool
        .iter()
        .flat_map(|s| s.annotations.iter().map(|a| a.lu))
        .filter(|lu| match pos {
            None => true,
            Some(p) => lexicon.lu(*lu).map(|l| l.pos == p).unwrap_or(false),
        })
        .collect();
    set.into_iter().collect()
}

/// Keep every sentence; regenerate for the LUs the baseline scores below
/// `threshold`.
pub fn plan_oracle_threshold(
    lexicon: &Lexicon,
    pool: &[CorpusSentence],
    scores: &[LuScore],
    threshold: f64,
    pos: Option<Pos>,
) -> AugmentationPlan {
    AugmentationPlan {
        strategy: Strategy::OracleThreshold,
        selected_lus: select_oracle_lus(lexicon, scores, threshold, pos),
        allocations: Vec::new(),
        held_out_sentence_ids: Vec::new(),
        base_fraction: 1.0,
        aug_fraction: 0.0,
        seed: 0,
        manifest: Manifest { sentence_ids: sorted_ids(pool), ..Manifest::default() },
    }
}

/// Drop all annotations of `k` randomly chosen annotated LUs of `pos`; they
/// become the regeneration targets.
pub fn plan_non_oracle_removal(
    lexicon: &Lexicon,
    pool: &[CorpusSentence],
    k: usize,
    pos: Option<Pos>,
    seed: u64,
) -> Result<AugmentationPlan> {
    let eligible = eligible_lus(lexicon, pool, pos);
    if eligible.len() < k {
        return Err(Error::InvalidArgument(format!(
            "only {} eligible LUs for k = {k}",
            eligible.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<LuId> =
        rand::seq::index::sample(&mut rng, eligible.len(), k).into_iter().map(|i| eligible[i]).collect();
    picked.sort();
    Ok(AugmentationPlan {
        strategy: Strategy::NonOracleRemoval,
        selected_lus: picked.clone(),
        allocations: Vec::new(),
        held_out_sentence_ids: Vec::new(),
        base_fraction: 1.0,
        aug_fraction: 0.0,
        seed,
        manifest: Manifest { sentence_ids: sorted_ids(pool), exclude_lus: picked, generation_ids: Vec::new() },
    })
}

/// round(fraction * size), half away from zero.
pub fn budget_from_fraction(fraction: f64, size: usize) -> Result<usize> {
    check_fraction("budget fraction", fraction)?;
    Ok(libm::round(fraction * size as f64) as usize)
}

const WEIGHT_SCALE: f64 = 1e9;

/// Split `budget` over the scored LUs in proportion to 1 - F1 with
/// largest-remainder rounding; ties go to the lower LU id.
pub fn largest_remainder(scores: &[LuScore], budget: usize) -> Result<Vec<LuAllocation>> {
    let mut by_lu: BTreeMap<LuId, u128> = BTreeMap::new();
    for s in scores {
        if !(0.0..=1.0).contains(&s.f1) {
            return Err(Error::InvalidArgument(format!("F1 {} of LU {} outside [0, 1]", s.f1, s.lu)));
        }
        by_lu.insert(s.lu, libm::round((1.0 - s.f1) * WEIGHT_SCALE) as u128);
    }
    let total: u128 = by_lu.values().sum();
    let mut out: Vec<LuAllocation> = by_lu.keys().map(|&lu| LuAllocation { lu, count: 0 }).collect();
    if total == 0 || budget == 0 {
        return Ok(out);
    }
    let b = budget as u128;
    let mut rems = Vec::with_capacity(out.len());
    let mut assigned = 0u128;
    for (i, w) in by_lu.values().enumerate() {
        let q = b * w;
        out[i].count = (q / total) as usize;
        assigned += q / total;
        rems.push((q % total, i));
    }
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in rems.iter().take((b - assigned) as usize) {
        out[i].count += 1;
    }
    Ok(out)
}

pub fn plan_inverse_f1(pool: &[CorpusSentence], scores: &[LuScore], budget: usize) -> Result<AugmentationPlan> {
    let allocations = largest_remainder(scores, budget)?;
    let train = pool.len();
    Ok(AugmentationPlan {
        strategy: Strategy::InverseF1Weighted,
        selected_lus: allocations.iter().filter(|a| a.count > 0).map(|a| a.lu).collect(),
        allocations,
        held_out_sentence_ids: Vec::new(),
        base_fraction: 1.0,
        aug_fraction: if train == 0 { 0.0 } else { (budget as f64 / train as f64).min(1.0) },
        seed: 0,
        manifest: Manifest { sentence_ids: sorted_ids(pool), ..Manifest::default() },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugSource<'a> {
    /// Ids of retained generations to draw from.
    Generated(&'a [String]),
    HumanHeldOut,
}

/// Sample a base share of the pool by sentence, plus an augmentation share
/// sized relative to the pool and drawn from generations or from the
/// sentences left out of the base.
pub fn plan_low_resource(
    pool: &[CorpusSentence],
    base: f64,
    aug: f64,
    source: AugSource<'_>,
    seed: u64,
) -> Result<AugmentationPlan> {
    check_fraction("base fraction", base)?;
    check_fraction("aug fraction", aug)?;
    let ids = sorted_ids(pool);
    let n_base = budget_from_fraction(base, ids.len())?;
    let n_aug = budget_from_fraction(aug, ids.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = ids.clone();
    order.shuffle(&mut rng);
    let mut base_ids: Vec<SentenceId> = order[..n_base].to_vec();
    base_ids.sort();
    let mut manifest = Manifest { sentence_ids: base_ids, ..Manifest::default() };
    let mut held_out = Vec::new();
    match source {
        AugSource::HumanHeldOut => {
            if base + aug > 1.0 + 1e-12 || n_base + n_aug > ids.len() {
                return Err(Error::InvalidArgument(format!(
                    "base {base} + aug {aug} exceeds the pool of {} sentences",
                    ids.len()
                )));
            }
            held_out = order[n_base..n_base + n_aug].to_vec();
            held_out.sort();
            manifest.sentence_ids.extend(held_out.iter().copied());
            manifest.sentence_ids.sort();
        }
        AugSource::Generated(gen) => {
            let mut gen: Vec<String> = gen.to_vec();
            gen.sort();
            gen.dedup();
            if gen.len() < n_aug {
                return Err(Error::InvalidArgument(format!(
                    "{n_aug} generations requested, pool holds {}",
                    gen.len()
                )));
            }
            let mut picked: Vec<String> =
                rand::seq::index::sample(&mut rng, gen.len(), n_aug).into_iter().map(|i| gen[i].clone()).collect();
            picked.sort();
            manifest.generation_ids = picked;
        }
    }
    Ok(AugmentationPlan {
        strategy: Strategy::LowResource,
        selected_lus: Vec::new(),
        allocations: Vec::new(),
        held_out_sentence_ids: held_out,
        base_fraction: base,
        aug_fraction: aug,
        seed,
        manifest,
    })
}

/// Records of the manifest's sentences, minus excluded LUs, in manifest order.
pub fn resolve_manifest(corpus: &Corpus, manifest: &Manifest) -> Result<Vec<AnnotatedSentence>> {
    let index: BTreeMap<SentenceId, &CorpusSentence> = corpus.sentences.iter().map(|s| (s.id, s)).collect();
    let exclude: BTreeSet<LuId> = manifest.exclude_lus.iter().copied().collect();
    let mut out = Vec::new();
    for id in &manifest.sentence_ids {
        let s = index.get(id).ok_or(Error::UnknownSentence(*id))?;
        for a in &s.annotations {
            if exclude.contains(&a.lu) {
                continue;
            }
            out.push(AnnotatedSentence {
                id: a.id,
                sentence_id: s.id,
                text: s.text.clone(),
                lu: a.lu,
                targets: a.targets.clone(),
                fes: a.fes.clone(),
                source: s.source,
                split: s.split,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::fixtures::*;
    use crate::lexicon::{DocId, FeSpan, LuAnnotation, RecordId, Source, Split};
    use proptest::prelude::*;

    fn rec(sid: u64, lu: u32, text: &str, fes: Vec<FeSpan>) -> AnnotatedSentence {
        AnnotatedSentence {
            id: RecordId(sid * 10 + lu as u64),
            sentence_id: SentenceId(sid),
            text: text.into(),
            lu: LuId(lu),
            targets: alloc::vec![Span::new(0, 1)],
            fes,
            source: Source::Fulltext(DocId(1)),
            split: Split::Train,
        }
    }

    fn mini() -> Vec<AnnotatedSentence> {
        alloc::vec![
            rec(1, 2001, "Growing up, boys are disciplined.", alloc::vec![fespan(201, 12, 16, "NP"), fespan(203, 0, 10, "VPing")]),
            rec(2, 2003, "They punished him for lying.", alloc::vec![fespan(201, 14, 17, "NP")]),
            rec(3, 3001, "We walked home.", alloc::vec![fespan(301, 10, 14, "AVP")]),
        ]
    }

    fn pf(name: &str, s: usize, e: usize) -> PredictedFe {
        PredictedFe { fe_name: name.into(), span: Span::new(s, e) }
    }

    fn pred(sid: u64, lu: u32, fes: Vec<PredictedFe>) -> SrlPrediction {
        SrlPrediction { sentence_id: SentenceId(sid), frame: String::new(), lu: LuId(lu), predicted_fes: fes }
    }

    #[test]
    fn gold_scores_one() {
        let lex = lexicon();
        let g = mini();
        let s = score_srl(&lex, &g, &gold_as_predictions(&lex, &g).unwrap()).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let s = score_srl(&lex, &g, &[]).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn hand_counted_mini_corpus() {
        // 4 gold spans; 2 exact matches, 1 spurious, 1 name mismatch is not made
        let lex = lexicon();
        let preds = alloc::vec![
            pred(1, 2001, alloc::vec![pf("Evaluee", 12, 16), pf("Reason", 20, 32)]),
            pred(3, 3001, alloc::vec![pf("Goal", 10, 14)]),
        ];
        let s = score_srl(&lex, &mini(), &preds).unwrap();
        assert_eq!((s.tp, s.fp, s.fn_), (2, 1, 2));
        assert!((s.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.recall - 0.5).abs() < 1e-12);
        assert!((s.f1 - 4.0 / 7.0).abs() < 1e-12);
        let walk = s.per_lu.iter().find(|l| l.lu == LuId(3001)).unwrap();
        assert_eq!(walk.f1, 1.0);
        let punish = s.per_lu.iter().find(|l| l.lu == LuId(2003)).unwrap();
        assert_eq!(punish.f1, 0.0);
    }

    #[test]
    fn off_by_one_and_wrong_name_miss() {
        let lex = lexicon();
        let preds = alloc::vec![pred(2, 2003, alloc::vec![pf("Evaluee", 14, 18)]), pred(3, 3001, alloc::vec![pf("Path", 10, 14)])];
        let s = score_srl(&lex, &mini(), &preds).unwrap();
        assert_eq!(s.tp, 0);
    }

    #[test]
    fn unknown_sentence_errors() {
        let lex = lexicon();
        assert!(matches!(score_srl(&lex, &mini(), &[pred(9, 2001, alloc::vec![])]), Err(Error::UnknownSentence(_))));
        assert!(score_srl(&lex, &mini(), &[pred(3, 3001, alloc::vec![pf("Goal", 10, 99)])]).is_err());
    }

    #[test]
    fn oracle_threshold_is_strict() {
        let lex = lexicon();
        let sc = |lu: u32, f1: f64| LuScore { lu: LuId(lu), tp: 0, fp: 0, fn_: 0, f1 };
        let scores = [sc(2001, 0.5), sc(2003, 0.74), sc(3001, 0.75), sc(4002, 0.9)];
        assert_eq!(select_oracle_lus(&lex, &scores, 0.75, Some(Pos::V)), [LuId(2001), LuId(2003)]);
        let scores = [sc(2001, 1.0), sc(2003, 1.0)];
        assert!(select_oracle_lus(&lex, &scores, 0.75, Some(Pos::V)).is_empty());
        // nouns filtered out
        assert!(select_oracle_lus(&lex, &[sc(6001, 0.1)], 0.75, Some(Pos::V)).is_empty());
    }

    #[test]
    fn largest_remainder_hand_case() {
        let sc = |lu: u32, f1: f64| LuScore { lu: LuId(lu), tp: 0, fp: 0, fn_: 0, f1 };
        let a = largest_remainder(&[sc(1, 0.5), sc(2, 0.75)], 3).unwrap();
        assert_eq!(a.iter().map(|x| x.count).collect::<Vec<_>>(), [2, 1]);
        let a = largest_remainder(&[sc(1, 1.0), sc(2, 1.0)], 10).unwrap();
        assert!(a.iter().all(|x| x.count == 0));
        let a = largest_remainder(&[sc(1, 0.2), sc(2, 0.2), sc(3, 0.2)], 4).unwrap();
        assert_eq!(a.iter().map(|x| x.count).collect::<Vec<_>>(), [2, 1, 1]);
        assert!(largest_remainder(&[sc(1, 1.5)], 1).is_err());
        assert_eq!(budget_from_fraction(0.05, 19437).unwrap(), 972);
    }

    fn pool(n: u64) -> Vec<CorpusSentence> {
        (0..n)
            .map(|i| CorpusSentence {
                id: SentenceId(i),
                text: "a b".into(),
                source: Source::Fulltext(DocId(1)),
                split: Split::Train,
                annotations: alloc::vec![LuAnnotation {
                    id: RecordId(i),
                    lu: LuId([2001, 2003, 3001, 4002, 6001][(i % 5) as usize]),
                    targets: alloc::vec![Span::new(0, 1)],
                    fes: alloc::vec![],
                }],
            })
            .collect()
    }

    #[test]
    fn removal_plan() {
        let lex = lexicon();
        let p = pool(20);
        let plan = plan_non_oracle_removal(&lex, &p, 2, Some(Pos::V), 7).unwrap();
        assert_eq!(plan.selected_lus.len(), 2);
        assert!(plan.selected_lus.iter().all(|lu| lex.lu(*lu).unwrap().pos == Pos::V));
        let corpus = Corpus::new(p.clone());
        let recs = resolve_manifest(&corpus, &plan.manifest).unwrap();
        assert!(recs.iter().all(|r| !plan.selected_lus.contains(&r.lu)));
        assert_eq!(recs.len(), 20 - 8);
        assert_eq!(plan, plan_non_oracle_removal(&lex, &p, 2, Some(Pos::V), 7).unwrap());
        let id = plan_non_oracle_removal(&lex, &p, 0, Some(Pos::V), 7).unwrap();
        assert_eq!(resolve_manifest(&corpus, &id.manifest).unwrap().len(), 20);
        assert!(plan_non_oracle_removal(&lex, &p, 5, Some(Pos::V), 7).is_err());
    }

    #[test]
    fn low_resource_plans() {
        let p = pool(160);
        let plan = plan_low_resource(&p, 0.25, 0.0625, AugSource::HumanHeldOut, 3).unwrap();
        assert_eq!(plan.manifest.sentence_ids.len(), 40 + 10);
        let held: BTreeSet<_> = plan.held_out_sentence_ids.iter().collect();
        assert_eq!(held.len(), 10);
        let base_only = plan_low_resource(&p, 0.25, 0.0, AugSource::HumanHeldOut, 3).unwrap();
        assert_eq!(base_only.manifest.sentence_ids.len(), 40);
        assert!(base_only.manifest.sentence_ids.iter().all(|s| !held.contains(s)));
        let gens: Vec<String> = (0..30).map(|i| format!("g{i}")).collect();
        let g = plan_low_resource(&p, 0.25, 0.0625, AugSource::Generated(&gens), 3).unwrap();
        assert_eq!(g.manifest.generation_ids.len(), 10);
        assert_eq!(g.manifest.sentence_ids, base_only.manifest.sentence_ids);
        assert!(plan_low_resource(&p, 0.9, 0.2, AugSource::HumanHeldOut, 3).is_err());
        assert!(plan_low_resource(&p, 0.25, 0.5, AugSource::Generated(&gens), 3).is_err());
    }

    #[test]
    fn unresolved_manifest_errors() {
        let m = Manifest { sentence_ids: alloc::vec![SentenceId(99)], ..Manifest::default() };
        assert!(resolve_manifest(&Corpus::new(pool(3)), &m).is_err());
        assert!(resolve_manifest(&Corpus::default(), &Manifest::default()).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn allocation_sums_to_budget(f1s in prop::collection::vec(0.0f64..=1.0, 1..30), budget in 0usize..500) {
            let scores: Vec<LuScore> = f1s.iter().enumerate()
                .map(|(i, f)| LuScore { lu: LuId(i as u32), tp: 0, fp: 0, fn_: 0, f1: *f }).collect();
            let a = largest_remainder(&scores, budget).unwrap();
            let sum: usize = a.iter().map(|x| x.count).sum();
            if f1s.iter().any(|f| *f < 1.0) && budget > 0 {
                prop_assert_eq!(sum, budget);
            } else {
                prop_assert_eq!(sum, 0);
            }
        }

        #[test]
        fn deleting_a_true_positive_never_raises_f1(drop in prop::collection::vec(any::<bool>(), 3)) {
            let lex = lexicon();
            let g = mini();
            let mut preds = gold_as_predictions(&lex, &g).unwrap();
            preds[0].predicted_fes.push(pf("Reason", 20, 32));
            let before = score_srl(&lex, &g, &preds).unwrap().f1;
            for (p, d) in preds.iter_mut().zip(&drop) {
                if *d {
                    p.predicted_fes.remove(0);
                }
            }
            let after = score_srl(&lex, &g, &preds).unwrap().f1;
            prop_assert!(after <= before);
        }
    }
}
