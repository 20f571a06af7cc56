//! English surface-form handling for LU replacement: detect which form of
//! the donor lemma a token is, then produce the same form of another lemma.

use alloc::string::String;
use alloc::vec::Vec;

use crate::lexicon::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Form {
    Base,
    ThirdSingular,
    Past,
    PastParticiple,
    Gerund,
    Plural,
}

/// base, 3sg, past, past participle, gerund
type Irregular = (&'static str, &'static str, &'static str, &'static str, &'static str);

const IRREGULAR_VERBS: &[Irregular] = &[
    ("be", "is", "was", "been", "being"),
    ("have", "has", "had", "had", "having"),
    ("do", "does", "did", "done", "doing"),
    ("go", "goes", "went", "gone", "going"),
    ("make", "makes", "made", "made", "making"),
    ("take", "takes", "took", "taken", "taking"),
    ("give", "gives", "gave", "given", "giving"),
    ("get", "gets", "got", "gotten", "getting"),
    ("come", "comes", "came", "come", "coming"),
    ("see", "sees", "saw", "seen", "seeing"),
    ("know", "knows", "knew", "known", "knowing"),
    ("think", "thinks", "thought", "thought", "thinking"),
    ("say", "says", "said", "said", "saying"),
    ("tell", "tells", "told", "told", "telling"),
    ("find", "finds", "found", "found", "finding"),
    ("become", "becomes", "became", "become", "becoming"),
    ("leave", "leaves", "left", "left", "leaving"),
    ("feel", "feels", "felt", "felt", "feeling"),
    ("bring", "brings", "brought", "brought", "bringing"),
    ("begin", "begins", "began", "begun", "beginning"),
    ("keep", "keeps", "kept", "kept", "keeping"),
    ("hold", "holds", "held", "held", "holding"),
    ("write", "writes", "wrote", "written", "writing"),
    ("stand", "stands", "stood", "stood", "standing"),
    ("hear", "hears", "heard", "heard", "hearing"),
    ("let", "lets", "let", "let", "letting"),
    ("mean", "means", "meant", "meant", "meaning"),
    ("set", "sets", "set", "set", "setting"),
    ("meet", "meets", "met", "met", "meeting"),
    ("run", "runs", "ran", "run", "running"),
    ("pay", "pays", "paid", "paid", "paying"),
    ("sit", "sits", "sat", "sat", "sitting"),
    ("speak", "speaks", "spoke", "spoken", "speaking"),
    ("lie", "lies", "lay", "lain", "lying"),
    ("lead", "leads", "led", "led", "leading"),
    ("read", "reads", "read", "read", "reading"),
    ("grow", "grows", "grew", "grown", "growing"),
    ("lose", "loses", "lost", "lost", "losing"),
    ("fall", "falls", "fell", "fallen", "falling"),
    ("send", "sends", "sent", "sent", "sending"),
    ("build", "builds", "built", "built", "building"),
    ("understand", "understands", "understood", "understood", "understanding"),
    ("draw", "draws", "drew", "drawn", "drawing"),
    ("break", "breaks", "broke", "broken", "breaking"),
    ("spend", "spends", "spent", "spent", "spending"),
    ("cut", "cuts", "cut", "cut", "cutting"),
    ("rise", "rises", "rose", "risen", "rising"),
    ("drive", "drives", "drove", "driven", "driving"),
    ("buy", "buys", "bought", "bought", "buying"),
    ("wear", "wears", "wore", "worn", "wearing"),
    ("choose", "chooses", "chose", "chosen", "choosing"),
    ("seek", "seeks", "sought", "sought", "seeking"),
    ("throw", "throws", "threw", "thrown", "throwing"),
    ("catch", "catches", "caught", "caught", "catching"),
    ("deal", "deals", "dealt", "dealt", "dealing"),
    ("win", "wins", "won", "won", "winning"),
    ("forget", "forgets", "forgot", "forgotten", "forgetting"),
    ("sell", "sells", "sold", "sold", "selling"),
    ("fight", "fights", "fought", "fought", "fighting"),
    ("teach", "teaches", "taught", "taught", "teaching"),
    ("eat", "eats", "ate", "eaten", "eating"),
    ("drink", "drinks", "drank", "drunk", "drinking"),
    ("sing", "sings", "sang", "sung", "singing"),
    ("swim", "swims", "swam", "swum", "swimming"),
    ("fly", "flies", "flew", "flown", "flying"),
    ("ride", "rides", "rode", "ridden", "riding"),
    ("steal", "steals", "stole", "stolen", "stealing"),
    ("hide", "hides", "hid", "hidden", "hiding"),
    ("shake", "shakes", "shook", "shaken", "shaking"),
    ("forgive", "forgives", "forgave", "forgiven", "forgiving"),
    ("freeze", "freezes", "froze", "frozen", "freezing"),
    ("bite", "bites", "bit", "bitten", "biting"),
    ("blow", "blows", "blew", "blown", "blowing"),
    ("hit", "hits", "hit", "hit", "hitting"),
    ("put", "puts", "put", "put", "putting"),
    ("shut", "shuts", "shut", "shut", "shutting"),
    ("hurt", "hurts", "hurt", "hurt", "hurting"),
    ("cost", "costs", "cost", "cost", "costing"),
    ("quit", "quits", "quit", "quit", "quitting"),
    ("spread", "spreads", "spread", "spread", "spreading"),
    ("bend", "bends", "bent", "bent", "bending"),
    ("lend", "lends", "lent", "lent", "lending"),
    ("sleep", "sleeps", "slept", "slept", "sleeping"),
    ("sweep", "sweeps", "swept", "swept", "sweeping"),
    ("weep", "weeps", "wept", "wept", "weeping"),
    ("creep", "creeps", "crept", "crept", "creeping"),
    ("flee", "flees", "fled", "fled", "fleeing"),
    ("feed", "feeds", "fed", "fed", "feeding"),
    ("bleed", "bleeds", "bled", "bled", "bleeding"),
    ("shoot", "shoots", "shot", "shot", "shooting"),
    ("strike", "strikes", "struck", "struck", "striking"),
    ("swear", "swears", "swore", "sworn", "swearing"),
    ("tear", "tears", "tore", "torn", "tearing"),
    ("bear", "bears", "bore", "borne", "bearing"),
    ("beat", "beats", "beat", "beaten", "beating"),
    ("wake", "wakes", "woke", "woken", "waking"),
    ("arise", "arises", "arose", "arisen", "arising"),
    ("slide", "slides", "slid", "slid", "sliding"),
    ("stick", "sticks", "stuck", "stuck", "sticking"),
    ("sting", "stings", "stung", "stung", "stinging"),
    ("swing", "swings", "swung", "swung", "swinging"),
    ("hang", "hangs", "hung", "hung", "hanging"),
    ("dig", "digs", "dug", "dug", "digging"),
    ("light", "lights", "lit", "lit", "lighting"),
    ("shine", "shines", "shone", "shone", "shining"),
    ("bind", "binds", "bound", "bound", "binding"),
    ("wind", "winds", "wound", "wound", "winding"),
    ("grind", "grinds", "ground", "ground", "grinding"),
    ("ring", "rings", "rang", "rung", "ringing"),
    ("sink", "sinks", "sank", "sunk", "sinking"),
    ("spring", "springs", "sprang", "sprung", "springing"),
    ("stink", "stinks", "stank", "stunk", "stinking"),
    ("shrink", "shrinks", "shrank", "shrunk", "shrinking"),
    ("lay", "lays", "laid", "laid", "laying"),
    ("overcome", "overcomes", "overcame", "overcome", "overcoming"),
    ("undertake", "undertakes", "undertook", "undertaken", "undertaking"),
    ("withdraw", "withdraws", "withdrew", "withdrawn", "withdrawing"),
    ("forbid", "forbids", "forbade", "forbidden", "forbidding"),
    ("mislead", "misleads", "misled", "misled", "misleading"),
    ("bet", "bets", "bet", "bet", "betting"),
    ("burst", "bursts", "burst", "burst", "bursting"),
    ("cast", "casts", "cast", "cast", "casting"),
    ("split", "splits", "split", "split", "splitting"),
    ("thrust", "thrusts", "thrust", "thrust", "thrusting"),
    ("upset", "upsets", "upset", "upset", "upsetting"),
];

const IRREGULAR_PLURALS: &[(&str, &str)] = &[
    ("man", "men"),
    ("woman", "women"),
    ("child", "children"),
    ("person", "people"),
    ("foot", "feet"),
    ("tooth", "teeth"),
    ("mouse", "mice"),
    ("goose", "geese"),
    ("ox", "oxen"),
    ("life", "lives"),
    ("wife", "wives"),
    ("knife", "knives"),
    ("leaf", "leaves"),
    ("half", "halves"),
    ("wolf", "wolves"),
    ("sheep", "sheep"),
    ("fish", "fish"),
    ("deer", "deer"),
    ("series", "series"),
    ("species", "species"),
    ("criterion", "criteria"),
    ("phenomenon", "phenomena"),
];

const AUXILIARIES: &[&str] = &[
    "be", "is", "are", "was", "were", "been", "being", "am", "'s", "'re", "have", "has", "had",
    "'ve", "'d", "get", "gets", "got", "gotten", "getting",
];

fn irregular_verb(lemma: &str) -> Option<&'static Irregular> {
    IRREGULAR_VERBS.iter().find(|e| e.0 == lemma)
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// Monosyllabic consonant-vowel-consonant stems double their final
/// consonant (`stop` → `stopped`).
fn doubles_final(lemma: &str) -> bool {
    let chars: Vec<char> = lemma.chars().collect();
    let n = chars.len();
    if n < 3 {
        return false;
    }
    let (a, b, c) = (chars[n - 3], chars[n - 2], chars[n - 1]);
    let cvc = !is_vowel(a) && is_vowel(b) && !is_vowel(c) && !matches!(c, 'w' | 'x' | 'y');
    let vowel_groups = chars
        .iter()
        .enumerate()
        .filter(|(i, ch)| is_vowel(**ch) && (*i == 0 || !is_vowel(chars[i - 1])))
        .count();
    cvc && vowel_groups == 1
}

fn ends_consonant_y(lemma: &str) -> bool {
    let mut it = lemma.chars().rev();
    matches!((it.next(), it.next()), (Some('y'), Some(c)) if !is_vowel(c))
}

fn strip_last(s: &str) -> &str {
    let mut it = s.char_indices();
    it.next_back().map(|(i, _)| &s[..i]).unwrap_or(s)
}

fn last_char(s: &str) -> Option<char> {
    s.chars().next_back()
}

fn regular_third_singular(lemma: &str) -> String {
    if ends_consonant_y(lemma) {
        alloc::format!("{}ies", strip_last(lemma))
    } else if ["s", "x", "z", "ch", "sh", "o"].iter().any(|suf| lemma.ends_with(suf)) {
        alloc::format!("{lemma}es")
    } else {
        alloc::format!("{lemma}s")
    }
}

fn regular_past(lemma: &str) -> String {
    if lemma.ends_with('e') {
        alloc::format!("{lemma}d")
    } else if ends_consonant_y(lemma) {
        alloc::format!("{}ied", strip_last(lemma))
    } else if doubles_final(lemma) {
        let c = last_char(lemma).unwrap();
        alloc::format!("{lemma}{c}ed")
    } else {
        alloc::format!("{lemma}ed")
    }
}

fn regular_gerund(lemma: &str) -> String {
    if lemma.ends_with("ie") {
        alloc::format!("{}ying", &lemma[..lemma.len() - 2])
    } else if lemma.ends_with('e') && !["ee", "ye", "oe"].iter().any(|s| lemma.ends_with(s)) && lemma.len() > 2 {
        alloc::format!("{}ing", strip_last(lemma))
    } else if doubles_final(lemma) {
        let c = last_char(lemma).unwrap();
        alloc::format!("{lemma}{c}ing")
    } else {
        alloc::format!("{lemma}ing")
    }
}

fn regular_plural(lemma: &str) -> String {
    if ends_consonant_y(lemma) {
        alloc::format!("{}ies", strip_last(lemma))
    } else if ["s", "x", "z", "ch", "sh"].iter().any(|suf| lemma.ends_with(suf)) {
        alloc::format!("{lemma}es")
    } else {
        alloc::format!("{lemma}s")
    }
}

/// Produce `form` of `lemma` (a single lower-case word).
pub fn inflect(lemma: &str, pos: Pos, form: Form) -> String {
    match (pos, form) {
        (_, Form::Base) => lemma.into(),
        (Pos::V, _) => {
            if let Some(&(_, s3, past, pp, ger)) = irregular_verb(lemma) {
                return match form {
                    Form::ThirdSingular => s3,
                    Form::Past => past,
                    Form::PastParticiple => pp,
                    Form::Gerund => ger,
                    Form::Base | Form::Plural => lemma,
                }
                .into();
            }
            match form {
                Form::ThirdSingular => regular_third_singular(lemma),
                Form::Past | Form::PastParticiple => regular_past(lemma),
                Form::Gerund => regular_gerund(lemma),
                Form::Base | Form::Plural => lemma.into(),
            }
        }
        (Pos::N, Form::Plural) => IRREGULAR_PLURALS
            .iter()
            .find(|(s, _)| *s == lemma)
            .map(|(_, p)| String::from(*p))
            .unwrap_or_else(|| regular_plural(lemma)),
        _ => lemma.into(),
    }
}

/// Which form of `lemma` the donor `token` is. `prev` is the preceding word,
/// used to tell past from past participle for forms where they coincide.
/// `None` when the token is not a recognizable form of the lemma.
pub fn detect(lemma: &str, pos: Pos, token: &str, prev: Option<&str>) -> Option<Form> {
    let tok = token.to_lowercase();
    let lemma = lemma.to_lowercase();
    let after_aux = prev.map(|p| AUXILIARIES.contains(&p.to_lowercase().as_str())).unwrap_or(false);
    match pos {
        Pos::V => {
            let (s3, past, pp, ger): (Vec<String>, Vec<String>, Vec<String>, Vec<String>) =
                if let Some(&(_, s3, past, pp, ger)) = irregular_verb(&lemma) {
                    (
                        alloc::vec![s3.into()],
                        alloc::vec![past.into()],
                        alloc::vec![pp.into()],
                        alloc::vec![ger.into()],
                    )
                } else {
                    let c = last_char(&lemma).unwrap_or('_');
                    let past = alloc::vec![
                        regular_past(&lemma),
                        alloc::format!("{lemma}ed"),
                        alloc::format!("{lemma}{c}ed"),
                    ];
                    let ger = alloc::vec![
                        regular_gerund(&lemma),
                        alloc::format!("{lemma}ing"),
                        alloc::format!("{lemma}{c}ing"),
                    ];
                    (alloc::vec![regular_third_singular(&lemma)], past.clone(), past, ger)
                };
            let is_past = past.contains(&tok);
            let is_pp = pp.contains(&tok);
            if tok == lemma && !(after_aux && is_pp) {
                Some(Form::Base)
            } else if is_past && is_pp {
                Some(if after_aux { Form::PastParticiple } else { Form::Past })
            } else if is_pp {
                Some(Form::PastParticiple)
            } else if is_past {
                Some(Form::Past)
            } else if s3.contains(&tok) {
                Some(Form::ThirdSingular)
            } else if ger.contains(&tok) {
                Some(Form::Gerund)
            } else {
                None
            }
        }
        Pos::N => {
            if tok == lemma {
                Some(Form::Base)
            } else if tok == inflect(&lemma, Pos::N, Form::Plural) || tok == alloc::format!("{lemma}s") || tok == alloc::format!("{lemma}es") {
                Some(Form::Plural)
            } else {
                None
            }
        }
        _ => (tok == lemma).then_some(Form::Base),
    }
}

/// Copy the donor token's initial capitalization onto `word`.
pub fn match_case(donor_token: &str, word: &str) -> String {
    let donor_upper = donor_token.chars().next().map(char::is_uppercase).unwrap_or(false);
    let mut chars = word.chars();
    match chars.next() {
        Some(first) if donor_upper && first.is_lowercase() => first.to_uppercase().chain(chars).collect(),
        _ => word.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_verbs() {
        assert_eq!(inflect("reward", Pos::V, Form::Past), "rewarded");
        assert_eq!(inflect("discipline", Pos::V, Form::PastParticiple), "disciplined");
        assert_eq!(inflect("stop", Pos::V, Form::Past), "stopped");
        assert_eq!(inflect("visit", Pos::V, Form::Past), "visited");
        assert_eq!(inflect("carry", Pos::V, Form::ThirdSingular), "carries");
        assert_eq!(inflect("carry", Pos::V, Form::Past), "carried");
        assert_eq!(inflect("watch", Pos::V, Form::ThirdSingular), "watches");
        assert_eq!(inflect("make", Pos::V, Form::Gerund), "making");
        assert_eq!(inflect("see", Pos::V, Form::Gerund), "seeing");
        assert_eq!(inflect("die", Pos::V, Form::Gerund), "dying");
        assert_eq!(inflect("run", Pos::V, Form::Gerund), "running");
        assert_eq!(inflect("give", Pos::V, Form::PastParticiple), "given");
    }

    #[test]
    fn nouns() {
        assert_eq!(inflect("claw", Pos::N, Form::Plural), "claws");
        assert_eq!(inflect("box", Pos::N, Form::Plural), "boxes");
        assert_eq!(inflect("city", Pos::N, Form::Plural), "cities");
        assert_eq!(inflect("woman", Pos::N, Form::Plural), "women");
        assert_eq!(detect("claw", Pos::N, "claws", None), Some(Form::Plural));
        assert_eq!(detect("king", Pos::N, "king", None), Some(Form::Base));
    }

    #[test]
    fn detection_uses_auxiliary_context() {
        assert_eq!(detect("discipline", Pos::V, "disciplined", Some("are")), Some(Form::PastParticiple));
        assert_eq!(detect("discipline", Pos::V, "disciplined", Some("teacher")), Some(Form::Past));
        assert_eq!(detect("give", Pos::V, "given", None), Some(Form::PastParticiple));
        assert_eq!(detect("give", Pos::V, "gave", Some("was")), Some(Form::Past));
        assert_eq!(detect("put", Pos::V, "put", None), Some(Form::Base));
        assert_eq!(detect("put", Pos::V, "put", Some("has")), Some(Form::PastParticiple));
        assert_eq!(detect("walk", Pos::V, "Walks", None), Some(Form::ThirdSingular));
        assert_eq!(detect("walk", Pos::V, "strolled", None), None);
        assert_eq!(detect("despite", Pos::Prep, "Despite", None), Some(Form::Base));
    }

    #[test]
    fn case_is_carried_over() {
        assert_eq!(match_case("Despite", "in spite of"), "In spite of");
        assert_eq!(match_case("king", "rector"), "rector");
    }
}
