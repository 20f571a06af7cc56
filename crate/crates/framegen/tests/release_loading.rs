mod common;

use common::{load_mini, mini_release_dir, mini_splits};
use framegen::release::{load_release, LoadError, LoadOptions};
use framegen::splits::SplitConfig;
use framegen_core::expand::{Expander, SelectionConfig};
use framegen_core::lexicon::{coverage_report, pos_stats};
use framegen_core::relations::{RelationSet, RelationType};
use framegen_core::{AnnotatedSentence, DocId, FeId, LuId, Pos, SentenceId, Source, Span, Split};

fn record(r: &framegen::release::Release, sentence: u64, lu: u32) -> AnnotatedSentence {
    r.corpus
        .records()
        .find(|x| x.sentence_id == SentenceId(sentence) && x.lu == LuId(lu))
        .unwrap_or_else(|| panic!("no record for sentence {sentence} lu {lu}"))
}

#[test]
fn lexicon_counts() {
    let r = load_mini(false);
    let c = r.lexicon.counts();
    assert_eq!((c.frames, c.fes, c.lus), (4, 16, 13));
    // the unknown relation type is skipped
    assert_eq!((c.frame_relations, c.fe_relations), (4, 5));
    assert_eq!(r.report.frame_files, 4);
    assert!(r.corpus.sentences.is_empty());
}

#[test]
fn fe_coreness_and_lu_pos() {
    let r = load_mini(false);
    let lex = &r.lexicon;
    let sm = lex.frame_by_name("Self_motion").unwrap();
    let manner = lex.fe_by_name(sm.id, "Manner").unwrap();
    assert_eq!(manner.coreness, framegen_core::Coreness::CoreUnexpressed);
    assert_eq!(lex.lu(LuId(2005)).unwrap().pos, Pos::N);
    assert_eq!(lex.lu(LuId(2003)).unwrap().lemma, "run");
    assert!(lex.frame(sm.id).unwrap().definition.starts_with("The Self_mover moves"));
}

#[test]
fn record_counts_and_splits() {
    let r = load_mini(true);
    assert_eq!(r.corpus.record_count(), 16);
    let s = r.split_sizes();
    assert_eq!((s.train, s.train_fulltext, s.dev, s.test, s.unassigned), (11, 6, 2, 3, 0));
    assert_eq!(r.report.fulltext_files, 3);
    assert_eq!(r.report.lu_files, 4);
    assert_eq!(r.report.dropped_annotations, 1);
    assert_eq!(r.report.duplicate_lexicographic, 1);
    assert_eq!(r.report.colliding_sentences, 1);
}

#[test]
fn documents_take_header_ids_and_configured_splits() {
    let r = load_mini(true);
    let docs: Vec<_> = r.documents.iter().map(|d| (d.id, d.name.as_str(), d.split)).collect();
    assert_eq!(
        docs,
        vec![
            (DocId(2), "dev_doc.xml", Split::Dev),
            (DocId(3), "test_doc.xml", Split::Test),
            (DocId(1), "train_doc.xml", Split::Train),
        ]
    );
    assert_eq!(record(&r, 301, 2001).source, Source::Fulltext(DocId(3)));
    assert_eq!(r.document(DocId(3)).unwrap().name, "test_doc.xml");
}

#[test]
fn standard_splits_put_unlisted_documents_in_train() {
    let r = load_release(&mini_release_dir(), &LoadOptions::default()).unwrap();
    let s = r.split_sizes();
    assert_eq!((s.train, s.dev, s.test), (16, 0, 0));
}

#[test]
fn inclusive_end_offsets_become_half_open() {
    let r = load_mini(true);
    let rec = record(&r, 101, 2001);
    assert_eq!(rec.targets, vec![Span::new(13, 19)]);
    assert_eq!(rec.span_text(rec.targets[0]), Some("walked"));
    let goal = rec.fes.iter().find(|f| f.fe == FeId(201)).unwrap();
    assert_eq!(goal.span, Span::new(20, 42));
    assert_eq!(rec.span_text(goal.span), Some("to the top of the hill"));
    assert_eq!(goal.phrase_type, "PP");
    assert_eq!(goal.grammatical_function.as_deref(), Some("Dep"));
}

#[test]
fn null_instantiations_and_lower_ranks_are_skipped() {
    let r = load_mini(true);
    let ni = record(&r, 106, 2001);
    assert_eq!(ni.fes.len(), 1);
    assert_eq!(ni.fes[0].fe, FeId(200));
    let ranked = record(&r, 103, 2001);
    assert_eq!(ranked.fes.len(), 3);
    assert!(ranked.fes.iter().all(|f| f.span != Span::new(0, 3)));
}

#[test]
fn dangling_fe_drops_only_that_annotation() {
    let r = load_mini(true);
    let s = r.corpus.sentences.iter().find(|s| s.id == SentenceId(107)).unwrap();
    assert!(s.annotations.is_empty());
    assert_eq!(s.text, "He walked home.");
}

#[test]
fn lexicographic_duplicates_and_collisions() {
    let r = load_mini(true);
    let ids: Vec<_> = r.corpus.sentences.iter().filter(|s| s.id == SentenceId(101)).collect();
    assert_eq!(ids.len(), 1);
    assert!(ids[0].source.is_fulltext());
    let s1001: Vec<_> = r.corpus.sentences.iter().filter(|s| s.id == SentenceId(1001)).collect();
    assert_eq!(s1001.len(), 1);
    assert_eq!(s1001[0].text, "Tourists walk along the beach every morning.");
    let lx = record(&r, 1101, 3001);
    assert_eq!((lx.source, lx.split), (Source::Lexicographic, Split::Train));
}

#[test]
fn annotation_flags_come_from_the_corpus() {
    let r = load_mini(true);
    let annotated: Vec<u32> = r.lexicon.lus().filter(|l| l.has_annotations).map(|l| l.id.0).collect();
    assert_eq!(annotated, vec![2001, 2005, 3001, 4001]);
    assert_eq!(r.lexicon.lu(LuId(2001)).unwrap().annotation_count, 7);
    let c = coverage_report(&r.lexicon).unwrap();
    assert_eq!((c.annotated_lus, c.total_lus), (4, 13));
    assert!((c.fraction - 4.0 / 13.0).abs() < 1e-12);
}

#[test]
fn relation_queries_over_loaded_edges() {
    let r = load_mini(false);
    let lex = &r.lexicon;
    let inh = RelationSet::inheritance();
    assert_eq!(lex.fe_ancestors(FeId(400), inh).unwrap().into_iter().collect::<Vec<_>>(), vec![FeId(100)]);
    assert!(lex.has_forbidden_ancestor(FeId(400), inh).unwrap());
    assert!(!lex.has_forbidden_ancestor(FeId(401), inh).unwrap());
    // Goods reaches Self_motion.Time only through Using
    let using = RelationSet::of(&[RelationType::Using]);
    assert!(lex.fe_ancestors(FeId(401), inh).unwrap().is_empty());
    assert_eq!(lex.fe_ancestors(FeId(401), using).unwrap().into_iter().collect::<Vec<_>>(), vec![FeId(203)]);
    let desc = lex.fe_descendants(FeId(100), inh).unwrap();
    assert_eq!(desc.into_iter().collect::<Vec<_>>(), vec![FeId(200), FeId(300), FeId(400)]);
}

#[test]
fn pos_table_matches_hand_counts() {
    let r = load_mini(true);
    let sel = SelectionConfig::default();
    let ex = Expander::new(&r.lexicon, sel.clone());
    let records: Vec<_> = r.corpus.records().collect();
    let rows = pos_stats(&r.lexicon, records.iter(), |c| sel.is_core(c), |x| ex.count_candidates(x)).unwrap();
    assert_eq!(rows.len(), 2);
    let (v, n) = (&rows[0], &rows[1]);
    assert_eq!((v.pos, v.instances, n.pos, n.instances), (Pos::V, 14, Pos::N, 2));
    // 36 FEs, 33 core, 20 candidates over the 14 verb records
    assert!((v.avg_fes - 36.0 / 14.0).abs() < 1e-12);
    assert!((v.avg_core_fes - 33.0 / 14.0).abs() < 1e-12);
    assert!((v.avg_candidate_fes - 20.0 / 14.0).abs() < 1e-12);
    assert_eq!((n.avg_fes, n.avg_core_fes, n.avg_candidate_fes), (1.5, 1.5, 1.0));
}

#[test]
fn missing_pieces_are_load_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let opts = LoadOptions { corpus: true, splits: mini_splits() };
    let err = load_release(&tmp.path().join("nope"), &opts).unwrap_err();
    assert!(matches!(err, LoadError::Missing(_)), "{err}");

    let copy = tmp.path().join("rel");
    copy_dir(&mini_release_dir(), &copy);
    std::fs::remove_file(copy.join("frRelation.xml")).unwrap();
    let err = load_release(&copy, &opts).unwrap_err();
    assert!(matches!(&err, LoadError::Missing(p) if p.ends_with("frRelation.xml")), "{err}");
}

#[test]
fn malformed_xml_names_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let copy = tmp.path().join("rel");
    copy_dir(&mini_release_dir(), &copy);
    std::fs::write(copy.join("frame/Event.xml"), "<frame ID=\"10\" name=\"Event\"><FE").unwrap();
    let err = load_release(&copy, &LoadOptions { corpus: false, splits: SplitConfig::standard() }).unwrap_err();
    match err {
        LoadError::Format { path, .. } => assert!(path.ends_with("frame/Event.xml")),
        other => panic!("unexpected {other}"),
    }
}

fn copy_dir(from: &std::path::Path, to: &std::path::Path) {
    std::fs::create_dir_all(to).unwrap();
    for e in std::fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        let dst = to.join(e.file_name());
        if e.file_type().unwrap().is_dir() {
            copy_dir(&e.path(), &dst);
        } else {
            std::fs::copy(e.path(), dst).unwrap();
        }
    }
}
