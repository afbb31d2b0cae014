use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::corpus::{CaseRole, Sentence};

/// Noun–verb co-occurrence counts. Every event contributes to one joint cell,
/// both marginals and the total.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CooccurrenceTable {
    joint: BTreeMap<(String, String), u64>,
    nouns: BTreeMap<String, u64>,
    verbs: BTreeMap<String, u64>,
    total: u64,
}

impl CooccurrenceTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, noun: &str, verb: &str) {
        self.add_count(noun, verb, 1);
    }

    pub fn add_count(&mut self, noun: &str, verb: &str, count: u64) {
        *self
            .joint
            .entry((noun.to_string(), verb.to_string()))
            .or_default() += count;
        *self.nouns.entry(noun.to_string()).or_default() += count;
        *self.verbs.entry(verb.to_string()).or_default() += count;
        self.total += count;
    }

    /// One event per DAT or ACC argument of each sentence with a verb lemma,
    /// keyed by the argument's content words.
    pub fn from_corpus(sentences: &[Sentence]) -> Self {
        let mut table = Self::new();
        for s in sentences {
            let Some(verb) = s.verb_lemma.as_deref() else {
                continue;
            };
            for c in &s.chunks {
                if matches!(c.role, CaseRole::Dat | CaseRole::Acc) {
                    table.add(&c.content_surface(), verb);
                }
            }
        }
        table
    }

    pub fn joint(&self, noun: &str, verb: &str) -> u64 {
        self.joint
            .get(&(noun.to_string(), verb.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn noun_count(&self, noun: &str) -> u64 {
        self.nouns.get(noun).copied().unwrap_or(0)
    }

    pub fn verb_count(&self, verb: &str) -> u64 {
        self.verbs.get(verb).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    fn probabilities(&self, noun: &str, verb: &str) -> Result<(f64, f64, f64), StatsError> {
        let joint = self.joint(noun, verb);
        if joint == 0 {
            return Err(StatsError::ZeroJoint {
                noun: noun.to_string(),
                verb: verb.to_string(),
            });
        }
        let n = self.total as f64;
        Ok((
            joint as f64 / n,
            self.noun_count(noun) as f64 / n,
            self.verb_count(verb) as f64 / n,
        ))
    }
}

/// Pointwise mutual information (natural log).
pub fn pmi(table: &CooccurrenceTable, noun: &str, verb: &str) -> Result<f64, StatsError> {
    let (p_nv, p_n, p_v) = table.probabilities(noun, verb)?;
    Ok((p_nv / (p_n * p_v)).ln())
}

/// PMI normalised by −log p(n, v), in [−1, 1].
pub fn npmi(table: &CooccurrenceTable, noun: &str, verb: &str) -> Result<f64, StatsError> {
    let (p_nv, _, _) = table.probabilities(noun, verb)?;
    if p_nv >= 1.0 {
        // every event is this pair: perfect co-occurrence
        return Ok(1.0);
    }
    let value = pmi(table, noun, verb)? / -p_nv.ln();
    Ok(value.clamp(-1.0, 1.0))
}

/// NPMI(dat, verb) − NPMI(acc, verb).
pub fn delta_npmi(
    table: &CooccurrenceTable,
    noun_dat: &str,
    noun_acc: &str,
    verb: &str,
) -> Result<f64, StatsError> {
    Ok(npmi(table, noun_dat, verb)? - npmi(table, noun_acc, verb)?)
}
