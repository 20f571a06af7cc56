//! A generated release large enough for the statistical criteria: every
//! frame carries annotated and unannotated verbs, and every annotated verb
//! a batch of lexicographic sentences with distinct FE surfaces.

use framegen::release::{LoadReport, Release};
use framegen_core::srl::{PredictedFe, SrlPrediction};
use framegen_core::{
    AnnotatedSentence, Corpus, CorpusSentence, Coreness, FeId, FeRelationEdge, FeSpan, Frame, FrameElement, FrameId,
    FrameRelationEdge, LexicalUnit, Lexicon, LexiconBuilder, LuAnnotation, LuId, Pos, RecordId, RelationType,
    SentenceId, Source, Span, Split,
};

const ONSETS: [&str; 10] = ["b", "d", "f", "g", "k", "l", "m", "p", "s", "t"];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
// two-consonant codas take a plain -ed, no doubling or e-dropping
const CODAS: [&str; 5] = ["rk", "nd", "lt", "st", "mp"];

/// Distinct made-up verb lemma for `k < 250`.
pub fn lemma(k: usize) -> String {
    assert!(k < 250);
    format!("{}{}{}", ONSETS[k % 10], VOWELS[(k / 10) % 5], CODAS[k / 50])
}

pub const ROOT_FRAME: FrameId = FrameId(1);
const ROOT_AGENT: FeId = FeId(10);

pub fn frame_id(i: usize) -> FrameId {
    FrameId(100 + i as u32)
}

/// FE ids of frame `i` in the order Agent, Theme, Goal, Place.
pub fn fe_ids(i: usize) -> [FeId; 4] {
    let b = 1000 + 4 * i as u32;
    [FeId(b), FeId(b + 1), FeId(b + 2), FeId(b + 3)]
}

/// LUs of frame `i`: the first two annotated, the last two not.
pub fn lu_ids(i: usize) -> [LuId; 4] {
    let b = 10_000 + 4 * i as u32;
    [LuId(b), LuId(b + 1), LuId(b + 2), LuId(b + 3)]
}

#[derive(Debug, Clone, Copy)]
pub struct SynthShape {
    pub frames: usize,
    pub sentences_per_lu: usize,
}

impl Default for SynthShape {
    fn default() -> Self {
        // 50 frames x 2 annotated verbs x 5 = 500 donor records
        SynthShape { frames: 50, sentences_per_lu: 5 }
    }
}

pub fn lexicon(shape: SynthShape) -> Lexicon {
    assert!(shape.frames * 4 <= 250);
    let mut b = LexiconBuilder::new();
    b.frame(Frame { id: ROOT_FRAME, name: "Root".into(), definition: String::new(), fes: Vec::new() });
    b.fe(FrameElement {
        id: ROOT_AGENT,
        frame: ROOT_FRAME,
        name: "Agent".into(),
        coreness: Coreness::Core,
        definition: String::new(),
    });
    for i in 0..shape.frames {
        let f = frame_id(i);
        b.frame(Frame { id: f, name: format!("Frame_{i}"), definition: String::new(), fes: Vec::new() });
        let names = [("Agent", Coreness::Core), ("Theme", Coreness::Core), ("Goal", Coreness::Core), ("Place", Coreness::Peripheral)];
        for (id, (name, coreness)) in fe_ids(i).into_iter().zip(names) {
            b.fe(FrameElement { id, frame: f, name: name.into(), coreness, definition: String::new() });
        }
        b.frame_relation(FrameRelationEdge { relation_type: RelationType::Inheritance, parent_frame: ROOT_FRAME, child_frame: f });
        b.fe_relation(FeRelationEdge { relation_type: RelationType::Inheritance, parent_fe: ROOT_AGENT, child_fe: fe_ids(i)[0] });
        for (j, id) in lu_ids(i).into_iter().enumerate() {
            let annotated = j < 2;
            b.lu(LexicalUnit {
                id,
                frame: f,
                lemma: lemma(4 * i + j),
                pos: Pos::V,
                has_annotations: annotated,
                annotation_count: if annotated { shape.sentences_per_lu as u32 } else { 0 },
            });
        }
    }
    b.build().expect("synthetic lexicon is consistent")
}

struct Sentence {
    text: String,
    fes: Vec<FeSpan>,
}

impl Sentence {
    fn push(&mut self, s: &str) -> Span {
        let start = self.text.len();
        self.text.push_str(s);
        Span { start, end: self.text.len() }
    }

    fn fe(&mut self, fe: FeId, s: &str, pt: &str, gf: &str) {
        let span = self.push(s);
        self.fes.push(FeSpan { fe, span, phrase_type: pt.into(), grammatical_function: Some(gf.into()) });
    }
}

/// Sentence `k` of frame `i` with verb form `form`. Every third sentence
/// leaves out the Goal.
fn sentence(i: usize, k: usize, form: &str) -> (Sentence, Span) {
    let [agent, theme, goal, place] = fe_ids(i);
    let mut s = Sentence { text: String::new(), fes: Vec::new() };
    s.fe(agent, &format!("The worker{k}"), "NP", "Ext");
    s.push(" ");
    let target = s.push(form);
    s.push(" ");
    s.fe(theme, &format!("the crate{k}"), "NP", "Obj");
    if k % 3 != 0 {
        s.push(" ");
        s.fe(goal, &format!("to the dock{k}"), "PP", "Dep");
    }
    s.push(" ");
    s.fe(place, &format!("in the yard{k}"), "PP", "Dep");
    s.push(".");
    (s, target)
}

pub fn release(shape: SynthShape) -> Release {
    let lexicon = lexicon(shape);
    let mut sentences = Vec::new();
    let mut k = 0usize;
    for i in 0..shape.frames {
        for j in 0..2 {
            let lu = lu_ids(i)[j];
            let form = format!("{}ed", lemma(4 * i + j));
            for _ in 0..shape.sentences_per_lu {
                let (s, target) = sentence(i, k, &form);
                k += 1;
                sentences.push(CorpusSentence {
                    id: SentenceId(k as u64),
                    text: s.text,
                    source: Source::Lexicographic,
                    split: Split::Train,
                    annotations: vec![LuAnnotation { id: RecordId(k as u64), lu, targets: vec![target], fes: s.fes }],
                });
            }
        }
    }
    Release { lexicon, corpus: Corpus::new(sentences), documents: Vec::new(), report: LoadReport::default() }
}

/// Hand-counted SRL case: two gold records of one LU, with predictions
/// giving tp = 2, fp = 1, fn = 2, hence P = 2/3, R = 1/2, F1 = 4/7.
pub fn srl_mini() -> (Lexicon, Vec<AnnotatedSentence>, Vec<SrlPrediction>) {
    let lex = lexicon(SynthShape { frames: 1, sentences_per_lu: 1 });
    let [agent, theme, goal, _] = fe_ids(0);
    let lu = lu_ids(0)[0];
    let text = "a b c d e f".to_string();
    let sp = |start, end| Span { start, end };
    let fs = |fe, span| FeSpan { fe, span, phrase_type: "NP".into(), grammatical_function: None };
    let rec = |id: u64, fes| AnnotatedSentence {
        id: RecordId(id),
        sentence_id: SentenceId(id),
        text: text.clone(),
        lu,
        targets: vec![sp(10, 11)],
        fes,
        source: Source::Lexicographic,
        split: Split::Test,
    };
    let gold = vec![
        rec(1, vec![fs(agent, sp(0, 1)), fs(theme, sp(2, 3))]),
        rec(2, vec![fs(agent, sp(0, 1)), fs(goal, sp(4, 5))]),
    ];
    let pf = |name: &str, span| PredictedFe { fe_name: name.into(), span };
    let pred = |id: u64, fes| SrlPrediction { sentence_id: SentenceId(id), frame: "Frame_0".into(), lu, predicted_fes: fes };
    let predictions = vec![
        // Agent right, Theme with the wrong right edge
        pred(1, vec![pf("Agent", sp(0, 1)), pf("Theme", sp(2, 4))]),
        // Goal right, Agent missed
        pred(2, vec![pf("Goal", sp(4, 5))]),
    ];
    (lex, gold, predictions)
}
