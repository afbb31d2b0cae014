//! Bidirectional sentence scoring and variant comparison.

mod external;
mod ngram;

use std::cmp::Ordering;
use std::path::Path;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

pub use external::{ExternalScorer, ExternalDirection, DEFAULT_TIMEOUT};
pub use ngram::{Direction, NGramConfig, NGramModel, Unit, BOS, EOS, UNK};

use crate::corpus::Sentence;
use crate::transform::VariantSet;

pub const DEFAULT_TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum ScoringError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("n-gram order must be at least 1, got {0}")]
    InvalidOrder(usize),
    #[error("discount must lie in [0, 1), got {0}")]
    InvalidDiscount(f64),
    #[error("expected a {expected:?} scorer, got {got:?}")]
    DirectionMismatch { expected: Direction, got: Direction },
    #[error("comparison needs at least two variants, got {0}")]
    TooFewVariants(usize),
    #[error("external scorer unavailable: {0}")]
    ExternalScorerDown(String),
    #[error("external scorer protocol error: {0}")]
    ProtocolError(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model file: {0}")]
    ModelFormat(String),
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u64),
}

impl ScoringError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ScoringError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ScoringError::EmptyCorpus => "EMPTY_CORPUS",
            ScoringError::InvalidOrder(_) => "INVALID_ORDER",
            ScoringError::InvalidDiscount(_) => "INVALID_DISCOUNT",
            ScoringError::DirectionMismatch { .. } => "DIRECTION_MISMATCH",
            ScoringError::TooFewVariants(_) => "TOO_FEW_VARIANTS",
            ScoringError::ExternalScorerDown(_) => "EXTERNAL_SCORER_DOWN",
            ScoringError::ProtocolError(_) => "PROTOCOL_ERROR",
            ScoringError::Io { .. } => "IO",
            ScoringError::ModelFormat(_) => "MODEL_FORMAT",
            ScoringError::UnsupportedVersion(_) => "UNSUPPORTED_VERSION",
        }
    }
}

/// A one-directional sequence scorer returning natural-log probabilities.
pub trait SequenceScorer: Send + Sync {
    fn direction(&self) -> Direction;

    fn logprob_batch(&self, texts: &[String]) -> Result<Vec<f64>, ScoringError>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredVariant {
    pub label: String,
    pub text: String,
    pub forward_logp: f64,
    pub backward_logp: f64,
}

impl ScoredVariant {
    pub fn combined_logp(&self) -> f64 {
        self.forward_logp + self.backward_logp
    }
}

impl Serialize for ScoredVariant {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ScoredVariant", 5)?;
        st.serialize_field("label", &self.label)?;
        st.serialize_field("text", &self.text)?;
        st.serialize_field("forward_logp", &self.forward_logp)?;
        st.serialize_field("backward_logp", &self.backward_logp)?;
        st.serialize_field("combined_logp", &self.combined_logp())?;
        st.end()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Winner {
    Label(String),
    Tie,
}

impl Winner {
    pub fn label(&self) -> Option<&str> {
        match self {
            Winner::Label(l) => Some(l),
            Winner::Tie => None,
        }
    }

    pub fn is_tie(&self) -> bool {
        matches!(self, Winner::Tie)
    }
}

impl Serialize for Winner {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label().unwrap_or("TIE"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonResult {
    /// Best first; equal scores are ordered by label.
    pub variants: Vec<ScoredVariant>,
    pub winner: Winner,
    pub tie_epsilon: f64,
}

impl ComparisonResult {
    pub fn get(&self, label: &str) -> Option<&ScoredVariant> {
        self.variants.iter().find(|v| v.label == label)
    }

    fn from_scored(mut variants: Vec<ScoredVariant>, tie_epsilon: f64) -> Self {
        variants.sort_by(|a, b| {
            b.combined_logp()
                .partial_cmp(&a.combined_logp())
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.label.cmp(&b.label))
        });
        let winner = match variants.as_slice() {
            [first, second, ..] if first.combined_logp() - second.combined_logp() <= tie_epsilon => {
                Winner::Tie
            }
            [first, ..] => Winner::Label(first.label.clone()),
            [] => Winner::Tie,
        };
        ComparisonResult {
            variants,
            winner,
            tie_epsilon,
        }
    }
}

/// Forward and backward scorers whose log-probabilities are summed.
#[derive(Clone)]
pub struct BidirectionalScorer {
    forward: Arc<dyn SequenceScorer>,
    backward: Arc<dyn SequenceScorer>,
    unit: Unit,
}

impl std::fmt::Debug for BidirectionalScorer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BidirectionalScorer")
            .field("unit", &self.unit)
            .finish_non_exhaustive()
    }
}

impl BidirectionalScorer {
    /// `unit` controls how sentences are rendered into text: characters are
    /// scored over the concatenated chunk surfaces, pre-tokenized scorers over
    /// space-joined token surfaces.
    pub fn new(
        forward: Arc<dyn SequenceScorer>,
        backward: Arc<dyn SequenceScorer>,
        unit: Unit,
    ) -> Result<Self, ScoringError> {
        for (scorer, expected) in [(&forward, Direction::Forward), (&backward, Direction::Backward)] {
            if scorer.direction() != expected {
                return Err(ScoringError::DirectionMismatch {
                    expected,
                    got: scorer.direction(),
                });
            }
        }
        Ok(BidirectionalScorer {
            forward,
            backward,
            unit,
        })
    }

    pub fn from_models(forward: NGramModel, backward: NGramModel) -> Result<Self, ScoringError> {
        let unit = forward.unit();
        Self::new(Arc::new(forward), Arc::new(backward), unit)
    }

    /// Trains a forward and a backward model with the same settings.
    pub fn train<S: AsRef<str> + Sync>(lines: &[S], config: NGramConfig) -> Result<Self, ScoringError> {
        let fwd = NGramModel::train(lines, config.with_direction(Direction::Forward))?;
        let bwd = NGramModel::train(lines, config.with_direction(Direction::Backward))?;
        Self::from_models(fwd, bwd)
    }

    /// Both directions served by one external endpoint.
    pub fn external(client: Arc<ExternalScorer>, unit: Unit) -> Result<Self, ScoringError> {
        Self::new(
            Arc::new(ExternalDirection::new(client.clone(), Direction::Forward)),
            Arc::new(ExternalDirection::new(client, Direction::Backward)),
            unit,
        )
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn render(&self, s: &Sentence) -> String {
        render_for(self.unit, s)
    }

    pub fn score(&self, text: &str) -> Result<ScoredVariant, ScoringError> {
        let mut v = self.score_texts(&[(String::new(), text.to_string())])?;
        Ok(v.remove(0))
    }

    /// Scores labelled texts, preserving input order.
    pub fn score_texts(&self, items: &[(String, String)]) -> Result<Vec<ScoredVariant>, ScoringError> {
        let texts: Vec<String> = items.iter().map(|(_, t)| t.clone()).collect();
        let fwd = self.forward.logprob_batch(&texts)?;
        let bwd = self.backward.logprob_batch(&texts)?;
        if fwd.len() != texts.len() || bwd.len() != texts.len() {
            return Err(ScoringError::ProtocolError("scorer returned a short batch".into()));
        }
        Ok(items
            .iter()
            .zip(fwd.into_iter().zip(bwd))
            .map(|((label, text), (f, b))| ScoredVariant {
                label: label.clone(),
                text: text.clone(),
                forward_logp: f,
                backward_logp: b,
            })
            .collect())
    }

    pub fn score_sentence(&self, s: &Sentence) -> Result<ScoredVariant, ScoringError> {
        self.score(&self.render(s))
    }

    pub fn compare(&self, set: &VariantSet, tie_epsilon: f64) -> Result<ComparisonResult, ScoringError> {
        if set.len() < 2 {
            return Err(ScoringError::TooFewVariants(set.len()));
        }
        let items: Vec<(String, String)> = set
            .variants()
            .iter()
            .map(|v| (v.label.clone(), self.render(&v.sentence)))
            .collect();
        Ok(ComparisonResult::from_scored(self.score_texts(&items)?, tie_epsilon))
    }
}

/// Free-function form of [`BidirectionalScorer::compare`].
pub fn compare(
    scorer: &BidirectionalScorer,
    set: &VariantSet,
    tie_epsilon: f64,
) -> Result<ComparisonResult, ScoringError> {
    scorer.compare(set, tie_epsilon)
}

/// Renders a sentence as scorer input for the given unit.
pub fn render_for(unit: Unit, s: &Sentence) -> String {
    match unit {
        Unit::Char => s.render_text(""),
        Unit::Pretokenized => s
            .chunks
            .iter()
            .flat_map(|c| c.tokens.iter().map(|t| t.surface.as_str()))
            .collect::<Vec<_>>()
            .join(" "),
    }
}
