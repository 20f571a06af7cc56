//! Typed frame and FE relation edges, ancestor closure, and sister-LU lookup.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{FeId, FrameId, Lexicon, LuId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationType {
    Inheritance,
    Using,
    SubFrame,
    PerspectiveOn,
    Precedes,
    CausativeOf,
    InchoativeOf,
    SeeAlso,
    ReframingMapping,
    Metaphor,
}

impl RelationType {
    pub const ALL: [RelationType; 10] = [
        RelationType::Inheritance,
        RelationType::Using,
        RelationType::SubFrame,
        RelationType::PerspectiveOn,
        RelationType::Precedes,
        RelationType::CausativeOf,
        RelationType::InchoativeOf,
        RelationType::SeeAlso,
        RelationType::ReframingMapping,
        RelationType::Metaphor,
    ];

    /// Name used by `frRelation.xml`.
    pub fn release_name(self) -> &'static str {
        match self {
            RelationType::Inheritance => "Inheritance",
            RelationType::Using => "Using",
            RelationType::SubFrame => "Subframe",
            RelationType::PerspectiveOn => "Perspective_on",
            RelationType::Precedes => "Precedes",
            RelationType::CausativeOf => "Causative_of",
            RelationType::InchoativeOf => "Inchoative_of",
            RelationType::SeeAlso => "See_also",
            RelationType::ReframingMapping => "ReFraming_Mapping",
            RelationType::Metaphor => "Metaphor",
        }
    }

    fn bit(self) -> u16 {
        1 << (self as u16)
    }
}

impl FromStr for RelationType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = |x: &str| -> String {
            x.chars().filter(|c| c.is_ascii_alphanumeric()).map(|c| c.to_ascii_lowercase()).collect()
        };
        let key = norm(s);
        RelationType::ALL
            .iter()
            .copied()
            .find(|r| norm(r.release_name()) == key || norm(&alloc::format!("{r:?}")) == key)
            .ok_or_else(|| Error::InvalidArgument(alloc::format!("unknown relation type {s:?}")))
    }
}

/// Set of relation types followed by ancestor queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RelationSet(u16);

impl RelationSet {
    pub const EMPTY: RelationSet = RelationSet(0);

    pub fn inheritance() -> Self {
        Self::of(&[RelationType::Inheritance])
    }

    pub fn all() -> Self {
        Self::of(&RelationType::ALL)
    }

    pub fn of(types: &[RelationType]) -> Self {
        RelationSet(types.iter().fold(0, |acc, t| acc | t.bit()))
    }

    pub fn with(self, t: RelationType) -> Self {
        RelationSet(self.0 | t.bit())
    }

    pub fn contains(self, t: RelationType) -> bool {
        self.0 & t.bit() != 0
    }

    pub fn is_subset(self, other: RelationSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn types(self) -> impl Iterator<Item = RelationType> {
        RelationType::ALL.into_iter().filter(move |t| self.contains(*t))
    }
}

impl Default for RelationSet {
    fn default() -> Self {
        Self::inheritance()
    }
}

impl Serialize for RelationSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.types())
    }
}

impl<'de> Deserialize<'de> for RelationSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let v = Vec::<RelationType>::deserialize(d)?;
        Ok(RelationSet::of(&v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRelationEdge {
    pub relation_type: RelationType,
    pub parent_frame: FrameId,
    pub child_frame: FrameId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeRelationEdge {
    pub relation_type: RelationType,
    pub parent_fe: FeId,
    pub child_fe: FeId,
}

/// Child→parent and parent→child adjacency over FE edges.
#[derive(Debug, Clone, Default)]
pub(crate) struct RelationIndex {
    parents: BTreeMap<FeId, Vec<(RelationType, FeId)>>,
    children: BTreeMap<FeId, Vec<(RelationType, FeId)>>,
}

impl RelationIndex {
    pub(crate) fn new(edges: &[FeRelationEdge]) -> Self {
        let mut idx = RelationIndex::default();
        for e in edges {
            idx.parents.entry(e.child_fe).or_default().push((e.relation_type, e.parent_fe));
            idx.children.entry(e.parent_fe).or_default().push((e.relation_type, e.child_fe));
        }
        idx
    }

    fn closure(
        map: &BTreeMap<FeId, Vec<(RelationType, FeId)>>,
        start: FeId,
        types: RelationSet,
    ) -> BTreeSet<FeId> {
        let mut seen = BTreeSet::new();
        let mut stack = Vec::from([start]);
        while let Some(node) = stack.pop() {
            for &(t, next) in map.get(&node).into_iter().flatten() {
                if types.contains(t) && next != start && seen.insert(next) {
                    stack.push(next);
                }
            }
        }
        seen
    }
}

/// FE names that disqualify a non-PP span from regeneration.
pub const FORBIDDEN_ANCESTORS: [&str; 2] = ["Agent", "Self_mover"];

fn normalize_fe_name(name: &str) -> String {
    name.trim().replace(' ', "_")
}

fn is_forbidden_name(name: &str) -> bool {
    let n = normalize_fe_name(name);
    FORBIDDEN_ANCESTORS.iter().any(|f| *f == n)
}

impl Lexicon {
    /// Every FE reachable upward (child→parent) over edges of the given
    /// types. The queried FE itself is never included.
    pub fn fe_ancestors(&self, fe: FeId, types: RelationSet) -> Result<BTreeSet<FeId>> {
        self.fe(fe)?;
        Ok(RelationIndex::closure(&self.relation_index.parents, fe, types))
    }

    /// Every FE reachable downward (parent→child).
    pub fn fe_descendants(&self, fe: FeId, types: RelationSet) -> Result<BTreeSet<FeId>> {
        self.fe(fe)?;
        Ok(RelationIndex::closure(&self.relation_index.children, fe, types))
    }

    /// True iff the FE is named Agent or Self_mover, or has an ancestor so named.
    pub fn has_forbidden_ancestor(&self, fe: FeId, types: RelationSet) -> Result<bool> {
        if is_forbidden_name(&self.fe(fe)?.name) {
            return Ok(true);
        }
        let ancestors = self.fe_ancestors(fe, types)?;
        ancestors
            .into_iter()
            .map(|a| self.fe(a).map(|f| is_forbidden_name(&f.name)))
            .try_fold(false, |acc, r| r.map(|hit| acc || hit))
    }

    /// Annotated LUs of the same frame and POS as `target`, most annotated first.
    pub fn sister_lus(&self, target: LuId) -> Result<Vec<LuId>> {
        let t = self.lu(target)?;
        let mut sisters: Vec<_> = self
            .frame_lus(t.frame)
            .iter()
            .filter_map(|id| self.lu(*id).ok())
            .filter(|l| l.id != target && l.pos == t.pos && l.has_annotations)
            .collect();
        sisters.sort_by(|a, b| b.annotation_count.cmp(&a.annotation_count).then(a.id.cmp(&b.id)));
        Ok(sisters.into_iter().map(|l| l.id).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::fixtures::*;
    use crate::lexicon::{Coreness, Frame, FrameElement, LexiconBuilder};
    use proptest::prelude::*;

    #[test]
    fn cognizer_reaches_agent_through_two_hops() {
        let lex = lexicon();
        let anc = lex.fe_ancestors(FeId(400), RelationSet::inheritance()).unwrap();
        assert_eq!(anc, BTreeSet::from([FeId(500), FeId(100)]));
        assert!(anc.iter().any(|a| lex.fe(*a).unwrap().name == "Agent"));
        assert!(lex.has_forbidden_ancestor(FeId(400), RelationSet::inheritance()).unwrap());
    }

    #[test]
    fn forbidden_names_and_plain_fes() {
        let lex = lexicon();
        let inh = RelationSet::inheritance();
        assert!(lex.has_forbidden_ancestor(FeId(100), inh).unwrap());
        assert!(lex.has_forbidden_ancestor(FeId(300), inh).unwrap());
        assert!(!lex.has_forbidden_ancestor(FeId(201), inh).unwrap());
        assert!(lex.fe_ancestors(FeId(201), inh).unwrap().is_empty());
        assert!(lex.fe_ancestors(FeId(100), inh).unwrap().is_empty());
        assert!(matches!(lex.fe_ancestors(FeId(9999), inh), Err(Error::UnknownFe(_))));
    }

    #[test]
    fn relation_set_controls_traversal() {
        let lex = lexicon();
        assert!(!lex.has_forbidden_ancestor(FeId(600), RelationSet::inheritance()).unwrap());
        let with_using = RelationSet::inheritance().with(RelationType::Using);
        assert!(lex.has_forbidden_ancestor(FeId(600), with_using).unwrap());
    }

    #[test]
    fn chain_closure_and_cycles() {
        let mut b = LexiconBuilder::new();
        b.frame(Frame { id: FrameId(1), name: "F".into(), definition: String::new(), fes: Vec::new() });
        for (id, name) in [(1, "A"), (2, "B"), (3, "C")] {
            b.fe(FrameElement { id: FeId(id), frame: FrameId(1), name: name.into(), coreness: Coreness::Core, definition: String::new() });
        }
        let inh = RelationType::Inheritance;
        b.fe_relation(FeRelationEdge { relation_type: inh, parent_fe: FeId(1), child_fe: FeId(2) })
            .fe_relation(FeRelationEdge { relation_type: inh, parent_fe: FeId(2), child_fe: FeId(3) })
            // cycle back to C
            .fe_relation(FeRelationEdge { relation_type: inh, parent_fe: FeId(3), child_fe: FeId(1) });
        let lex = b.build().unwrap();
        assert_eq!(lex.fe_ancestors(FeId(3), RelationSet::inheritance()).unwrap(), BTreeSet::from([FeId(1), FeId(2)]));
    }

    #[test]
    fn sisters_share_frame_and_pos() {
        let lex = lexicon();
        assert_eq!(lex.sister_lus(LuId(2002)).unwrap(), [LuId(2003), LuId(2001)]);
        assert_eq!(lex.sister_lus(LuId(6002)).unwrap(), [LuId(6001)]);
        assert!(lex.sister_lus(LuId(6003)).unwrap().is_empty());
        assert!(lex.sister_lus(LuId(1)).is_err());
    }

    #[test]
    fn relation_names_parse() {
        assert_eq!("Perspective_on".parse::<RelationType>().unwrap(), RelationType::PerspectiveOn);
        assert_eq!("ReFraming_Mapping".parse::<RelationType>().unwrap(), RelationType::ReframingMapping);
        assert_eq!("subframe".parse::<RelationType>().unwrap(), RelationType::SubFrame);
        assert!("Bogus".parse::<RelationType>().is_err());
    }

    fn random_graph(n: u32, edges: &[(u32, u32, u8)], forbidden_root: u32) -> Lexicon {
        let mut b = LexiconBuilder::new();
        b.frame(Frame { id: FrameId(1), name: "F".into(), definition: String::new(), fes: Vec::new() });
        for id in 0..n {
            let name = if id == forbidden_root { String::from("Agent") } else { alloc::format!("Fe{id}") };
            b.fe(FrameElement { id: FeId(id), frame: FrameId(1), name, coreness: Coreness::Core, definition: String::new() });
        }
        for &(p, c, t) in edges {
            b.fe_relation(FeRelationEdge {
                relation_type: RelationType::ALL[t as usize % 3],
                parent_fe: FeId(p % n),
                child_fe: FeId(c % n),
            });
        }
        b.build().unwrap()
    }

    proptest! {
        #[test]
        fn ancestors_are_monotone_in_relation_types(
            edges in proptest::collection::vec((0u32..12, 0u32..12, 0u8..3), 0..30),
            fe in 0u32..12,
        ) {
            let lex = random_graph(12, &edges, 0);
            let small = RelationSet::inheritance();
            let large = small.with(RelationType::Using).with(RelationType::SubFrame);
            prop_assert!(small.is_subset(large));
            let a = lex.fe_ancestors(FeId(fe), small).unwrap();
            let b = lex.fe_ancestors(FeId(fe), large).unwrap();
            prop_assert!(a.is_subset(&b));
            prop_assert!(!b.contains(&FeId(fe)));
        }

        #[test]
        fn forbidden_status_propagates_to_descendants(
            edges in proptest::collection::vec((0u32..12, 0u32..12, 0u8..3), 0..30),
            root in 0u32..12,
        ) {
            let lex = random_graph(12, &edges, root);
            let types = RelationSet::all();
            for d in lex.fe_descendants(FeId(root), types).unwrap() {
                prop_assert!(lex.has_forbidden_ancestor(d, types).unwrap());
            }
        }
    }

    #[test]
    fn sister_relation_is_symmetric_on_annotated_lus() {
        let lex = lexicon();
        for a in lex.lus().filter(|l| l.has_annotations) {
            for b in lex.sister_lus(a.id).unwrap() {
                assert!(lex.sister_lus(b).unwrap().contains(&a.id));
            }
        }
    }
}
