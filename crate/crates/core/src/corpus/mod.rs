//! Annotated sentence model and corpus ingestion.
//!
//! A [`Sentence`] is an ordered list of [`Chunk`]s (bunsetsu) linked by
//! chunk-level dependency heads. Every transform in this crate acts on chunks,
//! never on individual tokens, except for particle rewriting.

mod conllu;
mod filter;
mod jsonl;
mod pairs;

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conllu::{import_conllu, read_conllu};
pub use filter::{filter_sentences, FilterCriteria};
pub use jsonl::{load_jsonl, read_jsonl, write_jsonl};
pub use pairs::{load_preference_pairs, read_preference_pairs, Label, PreferencePair, Vote};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CaseRole {
    Top,
    Tim,
    Loc,
    Nom,
    Dat,
    Acc,
    Adverb,
    Predicate,
    Other,
}

impl CaseRole {
    pub const ALL: [CaseRole; 9] = [
        CaseRole::Top,
        CaseRole::Tim,
        CaseRole::Loc,
        CaseRole::Nom,
        CaseRole::Dat,
        CaseRole::Acc,
        CaseRole::Adverb,
        CaseRole::Predicate,
        CaseRole::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseRole::Top => "TOP",
            CaseRole::Tim => "TIM",
            CaseRole::Loc => "LOC",
            CaseRole::Nom => "NOM",
            CaseRole::Dat => "DAT",
            CaseRole::Acc => "ACC",
            CaseRole::Adverb => "ADVERB",
            CaseRole::Predicate => "PREDICATE",
            CaseRole::Other => "OTHER",
        }
    }
}

impl fmt::Display for CaseRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseRole {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CaseRole::ALL
            .iter()
            .copied()
            .find(|r| r.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown case role `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AdverbType {
    Modal,
    Time,
    Manner,
    Resultive,
}

impl AdverbType {
    pub const ALL: [AdverbType; 4] = [
        AdverbType::Modal,
        AdverbType::Time,
        AdverbType::Manner,
        AdverbType::Resultive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AdverbType::Modal => "MODAL",
            AdverbType::Time => "TIME",
            AdverbType::Manner => "MANNER",
            AdverbType::Resultive => "RESULTIVE",
        }
    }
}

impl FromStr for AdverbType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AdverbType::ALL
            .iter()
            .copied()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown adverb type `{s}`"))
    }
}

/// Lexicon category attached to a token by the annotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemTag {
    Time,
    Location,
    Animate,
    Inanimate,
}

impl FromStr for SemTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "time" => Ok(SemTag::Time),
            "location" => Ok(SemTag::Location),
            "animate" => Ok(SemTag::Animate),
            "inanimate" => Ok(SemTag::Inanimate),
            _ => Err(format!("unknown semantic tag `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub pos: String,
    /// Set when this token is (or ends in) the chunk's postpositional particle.
    pub particle: Option<String>,
    #[serde(rename = "sem", default)]
    pub semantic_tags: BTreeSet<SemTag>,
}

impl Token {
    pub fn new(surface: impl Into<String>, pos: impl Into<String>) -> Self {
        Token {
            surface: surface.into(),
            pos: pos.into(),
            particle: None,
            semantic_tags: BTreeSet::new(),
        }
    }

    /// A standalone particle token.
    pub fn particle(surface: impl Into<String>) -> Self {
        let surface = surface.into();
        Token {
            particle: Some(surface.clone()),
            surface,
            pos: "ADP".to_string(),
            semantic_tags: BTreeSet::new(),
        }
    }

    pub fn with_tag(mut self, tag: SemTag) -> Self {
        self.semantic_tags.insert(tag);
        self
    }

    pub fn is_verb(&self) -> bool {
        self.pos.eq_ignore_ascii_case("VERB") || self.pos == "動詞"
    }

    pub fn is_conjunction(&self) -> bool {
        ["CONJ", "CCONJ", "SCONJ"]
            .iter()
            .any(|p| self.pos.eq_ignore_ascii_case(p))
            || self.pos == "接続詞"
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chunk {
    /// Index of the governing chunk; `None` marks the ROOT chunk.
    #[serde(with = "head_repr")]
    pub head: Option<usize>,
    pub role: CaseRole,
    pub adverb_type: Option<AdverbType>,
    pub tokens: Vec<Token>,
}

impl Chunk {
    pub fn new(tokens: Vec<Token>, head: Option<usize>, role: CaseRole) -> Self {
        Chunk {
            head,
            role,
            adverb_type: None,
            tokens,
        }
    }

    pub fn surface(&self) -> String {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    /// The particle carried by the chunk's final token, if any.
    pub fn particle(&self) -> Option<&str> {
        self.tokens.last().and_then(|t| t.particle.as_deref())
    }

    /// Surface with the trailing particle removed.
    pub fn content_surface(&self) -> String {
        let surface = self.surface();
        match self.particle() {
            Some(p) if surface.ends_with(p) && surface.len() > p.len() => {
                surface[..surface.len() - p.len()].to_string()
            }
            _ => surface,
        }
    }

    pub fn has_tag(&self, tag: SemTag) -> bool {
        self.tokens.iter().any(|t| t.semantic_tags.contains(&tag))
    }

    pub fn is_clause_head(&self) -> bool {
        self.role == CaseRole::Predicate || self.tokens.iter().any(Token::is_verb)
    }
}

mod head_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(head: &Option<usize>, s: S) -> Result<S::Ok, S::Error> {
        match head {
            Some(h) => s.serialize_i64(*h as i64),
            None => s.serialize_i64(-1),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<usize>, D::Error> {
        let raw = i64::deserialize(d)?;
        match raw {
            -1 => Ok(None),
            h if h >= 0 => Ok(Some(h as usize)),
            h => Err(serde::de::Error::custom(format!(
                "head must be -1 or a chunk index, got {h}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub verb_lemma: Option<String>,
    pub chunks: Vec<Chunk>,
}

/// A broken structural invariant of a [`Sentence`] or [`PreferencePair`].
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Invariant {
    #[error("sentence has no chunks")]
    NoChunks,
    #[error("chunk {0} has no tokens")]
    EmptyChunk(usize),
    #[error("chunk {0} contains a token with an empty surface")]
    EmptySurface(usize),
    #[error("chunk {0} has a token tagged both animate and inanimate")]
    ConflictingAnimacy(usize),
    #[error("chunk {0} has adverb_type but role is not ADVERB")]
    AdverbTypeWithoutAdverb(usize),
    #[error("chunk {0} is its own head")]
    SelfHead(usize),
    #[error("chunk {chunk} has head {head} outside 0..{len}")]
    HeadOutOfRange { chunk: usize, head: usize, len: usize },
    #[error("expected exactly one ROOT chunk, found {0}")]
    RootCount(usize),
    #[error("head links of chunk {0} form a cycle")]
    Cycle(usize),
    #[error("order1 and order2 do not contain the same chunks")]
    PairChunkMismatch,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: sentence `{id}` violates invariant: {violation}")]
    Invariant {
        line: usize,
        id: String,
        violation: Invariant,
    },
}

impl Sentence {
    pub fn new(id: impl Into<String>, chunks: Vec<Chunk>) -> Self {
        Sentence {
            id: id.into(),
            verb_lemma: None,
            chunks,
        }
    }

    pub fn with_verb(mut self, lemma: impl Into<String>) -> Self {
        self.verb_lemma = Some(lemma.into());
        self
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn validate(&self) -> Result<(), Invariant> {
        if self.chunks.is_empty() {
            return Err(Invariant::NoChunks);
        }
        let len = self.chunks.len();
        let mut roots = 0;
        for (i, chunk) in self.chunks.iter().enumerate() {
            if chunk.tokens.is_empty() {
                return Err(Invariant::EmptyChunk(i));
            }
            for token in &chunk.tokens {
                if token.surface.is_empty() {
                    return Err(Invariant::EmptySurface(i));
                }
                if token.semantic_tags.contains(&SemTag::Animate)
                    && token.semantic_tags.contains(&SemTag::Inanimate)
                {
                    return Err(Invariant::ConflictingAnimacy(i));
                }
            }
            if chunk.adverb_type.is_some() && chunk.role != CaseRole::Adverb {
                return Err(Invariant::AdverbTypeWithoutAdverb(i));
            }
            match chunk.head {
                None => roots += 1,
                Some(h) if h == i => return Err(Invariant::SelfHead(i)),
                Some(h) if h >= len => {
                    return Err(Invariant::HeadOutOfRange {
                        chunk: i,
                        head: h,
                        len,
                    })
                }
                Some(_) => {}
            }
        }
        if roots != 1 {
            return Err(Invariant::RootCount(roots));
        }
        // With a single root, every chain must reach it within `len` steps.
        for start in 0..len {
            let mut cur = start;
            let mut steps = 0;
            while let Some(h) = self.chunks[cur].head {
                cur = h;
                steps += 1;
                if steps > len {
                    return Err(Invariant::Cycle(start));
                }
            }
        }
        Ok(())
    }

    /// Index of the ROOT chunk. Panics on sentences without one; loaders
    /// validate before returning.
    pub fn root(&self) -> usize {
        self.chunks
            .iter()
            .position(|c| c.head.is_none())
            .expect("sentence has a ROOT chunk")
    }

    /// Dependents of `i` in linear order.
    pub fn children(&self, i: usize) -> Vec<usize> {
        self.chunks
            .iter()
            .enumerate()
            .filter(|(_, c)| c.head == Some(i))
            .map(|(j, _)| j)
            .collect()
    }

    /// `i` together with all chunks it transitively governs, in linear order.
    pub fn subtree(&self, i: usize) -> Vec<usize> {
        (0..self.chunks.len())
            .filter(|&j| self.dominates(i, j))
            .collect()
    }

    /// True when `ancestor` is `j` or lies on `j`'s head chain.
    pub fn dominates(&self, ancestor: usize, j: usize) -> bool {
        let mut cur = Some(j);
        let mut steps = 0;
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            steps += 1;
            if steps > self.chunks.len() {
                return false;
            }
            cur = self.chunks[c].head;
        }
        false
    }

    /// Chunks carrying `role`, in linear order.
    pub fn chunks_with_role(&self, role: CaseRole) -> Vec<usize> {
        self.chunks
            .iter()
            .enumerate()
            .filter(|(_, c)| c.role == role)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn render_text(&self, separator: &str) -> String {
        self.chunks
            .iter()
            .map(Chunk::surface)
            .collect::<Vec<_>>()
            .join(separator)
    }

    /// Chunk surfaces in linear order.
    pub fn chunk_surfaces(&self) -> Vec<String> {
        self.chunks.iter().map(Chunk::surface).collect()
    }
}

/// Free-function form of [`Sentence::render_text`].
pub fn render_text(sentence: &Sentence, separator: &str) -> String {
    sentence.render_text(separator)
}

#[cfg(test)]
pub(crate) mod strategies {
    use super::*;
    use proptest::prelude::*;

    fn token() -> impl Strategy<Value = Token> {
        (
            "[あ-ん本生先a-z]{1,3}",
            prop::sample::select(vec!["NOUN", "VERB", "ADP", "ADV"]),
            prop::option::of(prop::sample::select(vec!["が", "を", "に", "で"])),
            prop::sample::select(vec![
                vec![],
                vec![SemTag::Time],
                vec![SemTag::Animate],
                vec![SemTag::Location, SemTag::Inanimate],
            ]),
        )
            .prop_map(|(surface, pos, particle, tags)| Token {
                surface,
                pos: pos.to_string(),
                particle: particle.map(str::to_string),
                semantic_tags: tags.into_iter().collect(),
            })
    }

    /// Valid head-final projective sentences with 1..=7 chunks.
    pub fn sentence() -> impl Strategy<Value = Sentence> {
        (1usize..=7)
            .prop_flat_map(|n| {
                (
                    prop::collection::vec(prop::collection::vec(token(), 1..3), n),
                    prop::collection::vec(any::<prop::sample::Index>(), n),
                    prop::collection::vec(prop::sample::select(CaseRole::ALL.to_vec()), n),
                    prop::option::of("[a-z]{1,4}"),
                )
            })
            .prop_map(|(tokens, picks, roles, lemma)| {
                let n = tokens.len();
                let mut heads: Vec<Option<usize>> = vec![None; n];
                for i in (0..n.saturating_sub(1)).rev() {
                    // right spine starting at i + 1
                    let mut spine = vec![i + 1];
                    while let Some(h) = heads[*spine.last().unwrap()] {
                        spine.push(h);
                    }
                    heads[i] = Some(spine[picks[i].index(spine.len())]);
                }
                let chunks = tokens
                    .into_iter()
                    .zip(heads)
                    .zip(roles)
                    .map(|((tokens, head), role)| Chunk {
                        head,
                        role,
                        adverb_type: (role == CaseRole::Adverb).then_some(AdverbType::Manner),
                        tokens,
                    })
                    .collect();
                Sentence {
                    id: "p".into(),
                    verb_lemma: lemma,
                    chunks,
                }
            })
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn noun(stem: &str, particle: &str, head: usize, role: CaseRole) -> Chunk {
        Chunk::new(
            vec![Token::new(stem, "NOUN"), Token::particle(particle)],
            Some(head),
            role,
        )
    }

    pub fn verb(surface: &str) -> Chunk {
        Chunk::new(vec![Token::new(surface, "VERB")], None, CaseRole::Predicate)
    }

    /// 先生が 生徒に 本を あげた
    pub fn example_2a() -> Sentence {
        Sentence::new(
            "ex2a",
            vec![
                noun("先生", "が", 3, CaseRole::Nom),
                noun("生徒", "に", 3, CaseRole::Dat),
                noun("本", "を", 3, CaseRole::Acc),
                verb("あげた"),
            ],
        )
        .with_verb("あげる")
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn render_with_and_without_separator() {
        let s = Sentence::new(
            "s",
            vec![
                noun("先生", "が", 2, CaseRole::Nom),
                noun("本", "を", 2, CaseRole::Acc),
                verb("あげた"),
            ],
        );
        assert_eq!(s.render_text(""), "先生が本をあげた");
        assert_eq!(render_text(&s, " "), "先生が 本を あげた");
        let one = Sentence::new("one", vec![verb("来た")]);
        assert_eq!(one.render_text(" "), "来た");
    }

    #[test]
    fn validate_catches_structural_errors() {
        let mut s = example_2a();
        assert!(s.validate().is_ok());
        s.chunks[0].head = Some(0);
        assert_eq!(s.validate(), Err(Invariant::SelfHead(0)));
        s.chunks[0].head = Some(9);
        assert!(matches!(
            s.validate(),
            Err(Invariant::HeadOutOfRange { chunk: 0, head: 9, .. })
        ));
        s.chunks[0].head = None;
        assert_eq!(s.validate(), Err(Invariant::RootCount(2)));

        let mut cyc = example_2a();
        cyc.chunks[0].head = Some(1);
        cyc.chunks[1].head = Some(0);
        assert!(matches!(cyc.validate(), Err(Invariant::Cycle(_))));

        let mut adv = example_2a();
        adv.chunks[0].adverb_type = Some(AdverbType::Modal);
        assert_eq!(adv.validate(), Err(Invariant::AdverbTypeWithoutAdverb(0)));

        let mut anim = example_2a();
        anim.chunks[1].tokens[0] = Token::new("生徒", "NOUN")
            .with_tag(SemTag::Animate)
            .with_tag(SemTag::Inanimate);
        assert_eq!(anim.validate(), Err(Invariant::ConflictingAnimacy(1)));
    }

    #[test]
    fn tree_queries() {
        let s = example_2a();
        assert_eq!(s.root(), 3);
        assert_eq!(s.children(3), vec![0, 1, 2]);
        assert_eq!(s.subtree(3), vec![0, 1, 2, 3]);
        assert_eq!(s.subtree(1), vec![1]);
        assert_eq!(s.chunks[2].particle(), Some("を"));
        assert_eq!(s.chunks[2].content_surface(), "本");
    }

    #[test]
    fn roles_parse_case_insensitively() {
        assert_eq!("acc".parse::<CaseRole>(), Ok(CaseRole::Acc));
        assert_eq!("PREDICATE".parse::<CaseRole>(), Ok(CaseRole::Predicate));
        assert!("XYZ".parse::<CaseRole>().is_err());
    }
}
