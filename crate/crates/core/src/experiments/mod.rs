//! Order-preference analyses. Every runner takes a corpus (or preference
//! pairs), a [`Judge`] and an [`ExperimentConfig`] and returns an
//! [`ExperimentReport`]. Per-sentence problems never abort a run; they are
//! tallied under `skipped`.
//!
//! Work is fanned out with [`crate::par::map_ordered`] and reduced in input
//! order, so reports are identical for any worker count.

mod agreement;
mod double_object;
mod order;
mod report;
mod topic;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use agreement::run_human_agreement;
pub use double_object::{
    run_cooccurrence_analysis, run_double_object, run_omission_analysis,
    run_semantic_role_analysis, run_verb_type_test, verb_records, VerbRecord,
};
pub use order::{
    run_adverb_position, run_case_order, run_long_before_short, AdverbPosition, PrecedenceMatrix,
};
pub use report::{ols, scatter_svg, Cell, ExperimentReport, LabeledTest, Plot, Table};
pub use topic::{
    run_adverbial_particles, run_topicalization_claim_i, run_topicalization_claim_ii, TopicalizationMatrix,
};

use crate::corpus::{AdverbType, CaseRole, PreferencePair, Sentence};
use crate::scoring::{BidirectionalScorer, ScoringError, Winner, DEFAULT_TIE_EPSILON};
use crate::stats::CooccurrenceTable;
use crate::transform::{Variant, VariantSet, DEFAULT_ORDER_CAP};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error("nothing to evaluate: {0}")]
    EmptyEval(String),
    #[error("group {0} has no defined values")]
    EmptyGroup(String),
}

impl ExperimentError {
    pub fn code(&self) -> &'static str {
        match self {
            ExperimentError::EmptyEval(_) => "EMPTY_EVAL",
            ExperimentError::EmptyGroup(_) => "EMPTY_GROUP",
        }
    }
}

/// How a winner is chosen among variants.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Highest bidirectional LM score.
    #[default]
    Lm,
    /// The variant identical to the observed sentence wins (corpus counts).
    Count,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lm" => Ok(Mode::Lm),
            "count" => Ok(Mode::Count),
            _ => Err(format!("unknown mode `{s}` (expected lm or count)")),
        }
    }
}

#[derive(Clone, Copy)]
pub enum Judge<'a> {
    Lm(&'a BidirectionalScorer),
    Count,
}

impl fmt::Debug for Judge<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Judge::Lm(_) => f.write_str("Judge::Lm"),
            Judge::Count => f.write_str("Judge::Count"),
        }
    }
}

impl Judge<'_> {
    pub fn mode(&self) -> Mode {
        match self {
            Judge::Lm(_) => Mode::Lm,
            Judge::Count => Mode::Count,
        }
    }

    /// Picks the winning label of `set`. In count mode the first variant
    /// whose chunk sequence equals the base sentence wins; when none does the
    /// comparison is a tie.
    pub fn decide(&self, set: &VariantSet, tie_epsilon: f64) -> Result<Winner, ScoringError> {
        match self {
            Judge::Lm(scorer) => Ok(scorer.compare(set, tie_epsilon)?.winner),
            Judge::Count => {
                let observed = set.base.chunk_surfaces();
                Ok(set
                    .variants()
                    .iter()
                    .find(|v| v.sentence.chunk_surfaces() == observed)
                    .map_or(Winner::Tie, |v| Winner::Label(v.label.clone())))
            }
        }
    }

    /// Decides between labelled candidates; returns the winning index or
    /// `None` for a tie.
    pub(crate) fn pick(
        &self,
        base: &Sentence,
        candidates: Vec<(String, Sentence)>,
        cfg: &ExperimentConfig,
    ) -> Result<Option<usize>, String> {
        let labels: Vec<String> = candidates.iter().map(|(l, _)| l.clone()).collect();
        let set = VariantSet::new(
            base.clone(),
            candidates.into_iter().map(|(l, s)| Variant::new(l, s)).collect(),
        )
        .map_err(|e| e.code().to_string())?;
        match self.decide(&set, cfg.tie_epsilon).map_err(|e| e.code().to_string())? {
            Winner::Tie => Ok(None),
            Winner::Label(l) => Ok(labels.iter().position(|x| *x == l)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    /// Not echoed: results do not depend on it.
    #[serde(skip)]
    pub workers: usize,
    pub tie_epsilon: f64,
    pub alpha: f64,
    pub canonical_order: Vec<CaseRole>,
    /// Roles whose relative order the case-order analysis measures.
    pub case_order_roles: Vec<CaseRole>,
    pub particles: Vec<String>,
    pub order_cap: usize,
    pub show_verbs: Vec<String>,
    pub pass_verbs: Vec<String>,
    /// Canonical adverb positions per adverb type.
    pub adverb_reference: BTreeMap<AdverbType, Vec<AdverbPosition>>,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        use AdverbPosition::*;
        use CaseRole::*;
        ExperimentConfig {
            mode: Mode::Lm,
            workers: 1,
            tie_epsilon: DEFAULT_TIE_EPSILON,
            alpha: 0.05,
            canonical_order: vec![Tim, Loc, Nom, Dat, Acc],
            case_order_roles: vec![Tim, Loc, Nom],
            particles: ["は", "こそ", "も", "だけ"].map(String::from).to_vec(),
            order_cap: DEFAULT_ORDER_CAP,
            show_verbs: Vec::new(),
            pass_verbs: Vec::new(),
            adverb_reference: BTreeMap::from([
                (AdverbType::Modal, vec![Asov]),
                (AdverbType::Time, vec![Asov, Saov]),
                (AdverbType::Manner, vec![Saov, Soav]),
                (AdverbType::Resultive, vec![Saov, Soav]),
            ]),
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub(crate) fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub(crate) fn canonical_rank(&self, role: CaseRole) -> Option<usize> {
        self.canonical_order.iter().position(|r| *r == role)
    }
}

/// Per-reason skip counts.
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct Skips(pub BTreeMap<String, u64>);

impl Skips {
    pub fn add(&mut self, reason: impl Into<String>) {
        *self.0.entry(reason.into()).or_default() += 1;
    }
}

/// Ratio a/(a+b), undefined when both are zero.
pub fn rate(a: u64, b: u64) -> Option<f64> {
    (a + b > 0).then(|| a as f64 / (a + b) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Experiment {
    HumanAgreement,
    DoubleObject,
    VerbType,
    Omission,
    SemanticRole,
    Cooccurrence,
    CaseOrder,
    AdverbPosition,
    LongBeforeShort,
    TopicalizationI,
    TopicalizationII,
    AdverbialParticles,
}

impl Experiment {
    pub const ALL: [Experiment; 12] = [
        Experiment::HumanAgreement,
        Experiment::DoubleObject,
        Experiment::VerbType,
        Experiment::Omission,
        Experiment::SemanticRole,
        Experiment::Cooccurrence,
        Experiment::CaseOrder,
        Experiment::AdverbPosition,
        Experiment::LongBeforeShort,
        Experiment::TopicalizationI,
        Experiment::TopicalizationII,
        Experiment::AdverbialParticles,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::HumanAgreement => "human-agreement",
            Experiment::DoubleObject => "double-object",
            Experiment::VerbType => "verb-type",
            Experiment::Omission => "omission",
            Experiment::SemanticRole => "semantic-role",
            Experiment::Cooccurrence => "cooccurrence",
            Experiment::CaseOrder => "case-order",
            Experiment::AdverbPosition => "adverb-position",
            Experiment::LongBeforeShort => "long-before-short",
            Experiment::TopicalizationI => "topic-i",
            Experiment::TopicalizationII => "topic-ii",
            Experiment::AdverbialParticles => "adverbial-particles",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

/// Inputs for [`run`]. Preference pairs are only read by the human-agreement
/// analysis; the co-occurrence table defaults to counts over the corpus.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExperimentInput<'a> {
    pub corpus: &'a [Sentence],
    pub pairs: &'a [PreferencePair],
    pub cooccurrence: Option<&'a CooccurrenceTable>,
}

pub fn run(
    kind: Experiment,
    input: ExperimentInput<'_>,
    judge: Judge<'_>,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, ExperimentError> {
    let corpus = input.corpus;
    match kind {
        Experiment::HumanAgreement => run_human_agreement(input.pairs, judge, cfg),
        Experiment::DoubleObject => Ok(run_double_object(corpus, judge, cfg)),
        Experiment::VerbType => {
            let (records, _) = verb_records(corpus, judge, cfg);
            run_verb_type_test(&records, &cfg.show_verbs, &cfg.pass_verbs, cfg)
        }
        Experiment::Omission => {
            let (records, _) = verb_records(corpus, judge, cfg);
            run_omission_analysis(&records, cfg)
        }
        Experiment::SemanticRole => Ok(run_semantic_role_analysis(corpus, judge, cfg)),
        Experiment::Cooccurrence => {
            let owned;
            let table = match input.cooccurrence {
                Some(t) => t,
                None => {
                    owned = CooccurrenceTable::from_corpus(corpus);
                    &owned
                }
            };
            Ok(run_cooccurrence_analysis(corpus, judge, table, cfg))
        }
        Experiment::CaseOrder => Ok(run_case_order(corpus, judge, cfg)),
        Experiment::AdverbPosition => Ok(run_adverb_position(corpus, judge, cfg)),
        Experiment::LongBeforeShort => Ok(run_long_before_short(corpus, judge, cfg)),
        Experiment::TopicalizationI => Ok(run_topicalization_claim_i(corpus, judge, cfg)),
        Experiment::TopicalizationII => {
            let (records, _) = verb_records(corpus, judge, cfg);
            Ok(run_topicalization_claim_ii(corpus, judge, &records, cfg))
        }
        Experiment::AdverbialParticles => Ok(run_adverbial_particles(corpus, judge, cfg)),
    }
}
