//! Topicalization and adverbial-particle substitution.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{apply_order, order_with_front, unique_role, TransformError};
use crate::corpus::{CaseRole, Sentence};

pub const TOPIC_PARTICLE: &str = "は";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RewriteAction {
    /// The case particle is dropped before the new particle (が→は).
    DeleteThenAppend,
    /// The case particle stays and the new one follows it (に→には).
    KeepThenAppend,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParticleRewriteRule {
    pub original_particle: String,
    pub action: RewriteAction,
    pub appended_particle: String,
}

impl ParticleRewriteRule {
    pub fn result(&self) -> String {
        match self.action {
            RewriteAction::DeleteThenAppend => self.appended_particle.clone(),
            RewriteAction::KeepThenAppend => {
                format!("{}{}", self.original_particle, self.appended_particle)
            }
        }
    }
}

/// Rewrite actions keyed by the original case particle, plus the set of
/// adverbial particles accepted by substitution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticleRules {
    pub actions: BTreeMap<String, RewriteAction>,
    pub adverbial_particles: BTreeSet<String>,
}

impl Default for ParticleRules {
    fn default() -> Self {
        let actions = [
            ("が", RewriteAction::DeleteThenAppend),
            ("を", RewriteAction::DeleteThenAppend),
            ("に", RewriteAction::KeepThenAppend),
            ("で", RewriteAction::KeepThenAppend),
        ]
        .into_iter()
        .map(|(p, a)| (p.to_string(), a))
        .collect();
        let adverbial_particles = ["は", "こそ", "も", "だけ"]
            .into_iter()
            .map(str::to_string)
            .collect();
        ParticleRules {
            actions,
            adverbial_particles,
        }
    }
}

impl ParticleRules {
    pub fn rule(&self, original: &str, appended: &str) -> Option<ParticleRewriteRule> {
        self.actions.get(original).map(|&action| ParticleRewriteRule {
            original_particle: original.to_string(),
            action,
            appended_particle: appended.to_string(),
        })
    }

    pub fn topicalize(&self, s: &Sentence, role: CaseRole) -> Result<Sentence, TransformError> {
        let mut out = self.rewrite(s, role, TOPIC_PARTICLE, true)?;
        let idx = out.chunks.iter().position(|c| c.role == role).expect("rewritten chunk");
        out.chunks[idx].role = CaseRole::Top;
        Ok(out)
    }

    /// Replaces the case particle of the `role` chunk with `particle`. With
    /// `moved`, the chunk also goes to the sentence start. The case role is
    /// left as is so later analyses can still identify the argument.
    pub fn substitute(
        &self,
        s: &Sentence,
        role: CaseRole,
        particle: &str,
        moved: bool,
    ) -> Result<Sentence, TransformError> {
        if !self.adverbial_particles.contains(particle) {
            return Err(TransformError::ParticleNotConfigured(particle.to_string()));
        }
        self.rewrite(s, role, particle, moved)
    }

    fn rewrite(
        &self,
        s: &Sentence,
        role: CaseRole,
        particle: &str,
        moved: bool,
    ) -> Result<Sentence, TransformError> {
        if s.chunks
            .first()
            .and_then(|c| c.tokens.first())
            .is_some_and(|t| t.is_conjunction())
        {
            return Err(TransformError::StartsWithConjunction);
        }
        let idx = unique_role(s, role)?;
        let original = s.chunks[idx].particle().map(str::to_string);
        let rule = original
            .as_deref()
            .and_then(|p| self.rule(p, particle))
            .ok_or_else(|| TransformError::UnsupportedParticle(original.clone()))?;

        let (mut out, new_idx) = if moved {
            let order = order_with_front(s, idx);
            let new_idx = order.iter().position(|&o| o == idx).expect("moved chunk");
            (apply_order(s, &order), new_idx)
        } else {
            (s.clone(), idx)
        };
        let token = out.chunks[new_idx]
            .tokens
            .last_mut()
            .expect("validated chunks have tokens");
        let replacement = rule.result();
        if let Some(stem) = token.surface.strip_suffix(rule.original_particle.as_str()) {
            token.surface = format!("{stem}{replacement}");
        } else {
            token.surface.push_str(&rule.appended_particle);
        }
        token.particle = Some(replacement);
        Ok(out)
    }
}

/// Moves the unique `role` chunk to the front and marks it with は, using the
/// default rewrite rules. The chunk's role becomes TOP.
pub fn topicalize(s: &Sentence, role: CaseRole) -> Result<Sentence, TransformError> {
    ParticleRules::default().topicalize(s, role)
}

/// Default-rule form of [`ParticleRules::substitute`].
pub fn substitute_adverbial_particle(
    s: &Sentence,
    role: CaseRole,
    particle: &str,
    moved: bool,
) -> Result<Sentence, TransformError> {
    ParticleRules::default().substitute(s, role, particle, moved)
}
