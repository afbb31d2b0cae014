use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{CaseRole, Sentence};

/// Sentence selection criteria. Every retained sentence additionally has a
/// sentence-final ROOT chunk with role PREDICATE.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterCriteria {
    /// Upper bound on clause count; `None` disables the check.
    pub max_clauses: Option<usize>,
    /// Exactly one PREDICATE chunk.
    pub require_single_predicate: bool,
    /// Some chunk governs at least two dependents that each carry a particle
    /// or are adverbs.
    pub require_sibling_chunks_with_particle_or_adverb: bool,
    pub forbid_symbols: BTreeSet<char>,
    pub forbid_backward_dependency: bool,
}

impl Default for FilterCriteria {
    fn default() -> Self {
        FilterCriteria {
            max_clauses: Some(5),
            require_single_predicate: true,
            require_sibling_chunks_with_particle_or_adverb: true,
            forbid_symbols: "()[]{}（）［］｛｝「」『』【】〔〕〈〉《》<>＜＞"
                .chars()
                .collect(),
            forbid_backward_dependency: true,
        }
    }
}

impl FilterCriteria {
    pub fn accepts(&self, s: &Sentence) -> bool {
        let Some(last) = s.chunks.last() else {
            return false;
        };
        if last.head.is_some() || last.role != CaseRole::Predicate {
            return false;
        }
        if let Some(max) = self.max_clauses {
            if clause_count(s) > max {
                return false;
            }
        }
        if self.require_single_predicate && s.chunks_with_role(CaseRole::Predicate).len() != 1 {
            return false;
        }
        if self.require_sibling_chunks_with_particle_or_adverb && !has_marked_siblings(s) {
            return false;
        }
        if !self.forbid_symbols.is_empty()
            && s.chunks.iter().flat_map(|c| &c.tokens).any(|t| {
                t.surface.chars().any(|ch| self.forbid_symbols.contains(&ch))
            })
        {
            return false;
        }
        if self.forbid_backward_dependency && has_backward_dependency(s) {
            return false;
        }
        true
    }
}

/// Number of clauses, one per chunk that is a PREDICATE or contains a verb.
pub fn clause_count(s: &Sentence) -> usize {
    s.chunks.iter().filter(|c| c.is_clause_head()).count()
}

fn has_marked_siblings(s: &Sentence) -> bool {
    (0..s.len()).any(|h| {
        s.children(h)
            .into_iter()
            .filter(|&c| {
                let chunk = &s.chunks[c];
                chunk.particle().is_some() || chunk.role == CaseRole::Adverb
            })
            .count()
            >= 2
    })
}

fn has_backward_dependency(s: &Sentence) -> bool {
    s.chunks
        .iter()
        .enumerate()
        .any(|(i, c)| matches!(c.head, Some(h) if h < i))
}

pub fn filter_sentences(sentences: &[Sentence], criteria: &FilterCriteria) -> Vec<Sentence> {
    sentences
        .iter()
        .filter(|s| criteria.accepts(s))
        .cloned()
        .collect()
}
