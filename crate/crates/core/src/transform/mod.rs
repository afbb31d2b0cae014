//! Word-order variants of a sentence.
//!
//! All reorderings move a chunk together with its whole subtree. Heads are
//! re-indexed so that every chunk keeps the same governor; only linear
//! positions change.

mod particles;
pub mod properties;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CaseRole, Sentence};

pub use particles::{
    substitute_adverbial_particle, topicalize, ParticleRewriteRule, ParticleRules, RewriteAction,
    TOPIC_PARTICLE,
};

/// Default ceiling on the number of orders `enumerate_orders` will produce (7!).
pub const DEFAULT_ORDER_CAP: usize = 5040;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("no chunk has two or more dependents")]
    NoScrambleSite,
    #[error("chunk {site} does not exist")]
    SiteOutOfRange { site: usize },
    #[error("chunk {site} has {children} dependents, need at least 2")]
    NotEnoughChildren { site: usize, children: usize },
    #[error("{k} dependents give {k}! orders, above the cap")]
    TooManyOrders { k: usize },
    #[error("expected exactly one {role} chunk, found {count}")]
    RoleNotUnique { role: CaseRole, count: usize },
    #[error("{a} and {b} chunks do not share a head")]
    NotSiblings { a: CaseRole, b: CaseRole },
    #[error("no rewrite rule for particle {0:?}")]
    UnsupportedParticle(Option<String>),
    #[error("particle `{0}` is not in the configured adverbial particle set")]
    ParticleNotConfigured(String),
    #[error("sentence begins with a conjunction")]
    StartsWithConjunction,
    #[error("duplicate variant label `{0}`")]
    DuplicateLabel(String),
}

impl TransformError {
    /// Stable upper-case code used for skip tallies in reports.
    pub fn code(&self) -> &'static str {
        match self {
            TransformError::NoScrambleSite => "NO_SCRAMBLE_SITE",
            TransformError::SiteOutOfRange { .. } => "SITE_OUT_OF_RANGE",
            TransformError::NotEnoughChildren { .. } => "NOT_ENOUGH_CHILDREN",
            TransformError::TooManyOrders { .. } => "TOO_MANY_ORDERS",
            TransformError::RoleNotUnique { .. } => "ROLE_NOT_UNIQUE",
            TransformError::NotSiblings { .. } => "NOT_SIBLINGS",
            TransformError::UnsupportedParticle(_) => "UNSUPPORTED_PARTICLE",
            TransformError::ParticleNotConfigured(_) => "PARTICLE_NOT_CONFIGURED",
            TransformError::StartsWithConjunction => "STARTS_WITH_CONJUNCTION",
            TransformError::DuplicateLabel(_) => "DUPLICATE_LABEL",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub label: String,
    pub sentence: Sentence,
}

impl Variant {
    pub fn new(label: impl Into<String>, sentence: Sentence) -> Self {
        Variant {
            label: label.into(),
            sentence,
        }
    }
}

/// Labelled word-order variants of one base sentence.
#[derive(Clone, Debug, PartialEq)]
pub struct VariantSet {
    pub base: Sentence,
    variants: Vec<Variant>,
}

impl VariantSet {
    pub fn new(base: Sentence, variants: Vec<Variant>) -> Result<Self, TransformError> {
        let mut seen = std::collections::HashSet::new();
        for v in &variants {
            if !seen.insert(v.label.as_str()) {
                return Err(TransformError::DuplicateLabel(v.label.clone()));
            }
        }
        Ok(VariantSet { base, variants })
    }

    pub fn variants(&self) -> &[Variant] {
        &self.variants
    }

    pub fn len(&self) -> usize {
        self.variants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<&Variant> {
        self.variants.iter().find(|v| v.label == label)
    }
}

/// Rebuilds `s` with chunk `new_order[k]` placed at position `k`.
pub(crate) fn apply_order(s: &Sentence, new_order: &[usize]) -> Sentence {
    debug_assert_eq!(new_order.len(), s.len());
    let mut old_to_new = vec![0; s.len()];
    for (new, &old) in new_order.iter().enumerate() {
        old_to_new[old] = new;
    }
    let chunks = new_order
        .iter()
        .map(|&old| {
            let mut c = s.chunks[old].clone();
            c.head = c.head.map(|h| old_to_new[h]);
            c
        })
        .collect();
    Sentence {
        id: s.id.clone(),
        verb_lemma: s.verb_lemma.clone(),
        chunks,
    }
}

/// Linear order after rearranging the dependents of one head. `arrangement`
/// lists the dependents (old indices) in their new left-to-right order; each
/// carries its subtree, and the subtrees fill the positions the dependents'
/// subtrees occupied before.
pub(crate) fn order_with_children(s: &Sentence, children: &[usize], arrangement: &[usize]) -> Vec<usize> {
    let mut slots: Vec<usize> = children.iter().flat_map(|&c| s.subtree(c)).collect();
    slots.sort_unstable();
    let sequence = arrangement.iter().flat_map(|&c| s.subtree(c));
    let mut order: Vec<usize> = (0..s.len()).collect();
    for (slot, old) in slots.into_iter().zip(sequence) {
        order[slot] = old;
    }
    order
}

/// Linear order with the subtree of `chunk` moved to the sentence start.
pub(crate) fn order_with_front(s: &Sentence, chunk: usize) -> Vec<usize> {
    let block = s.subtree(chunk);
    let rest = (0..s.len()).filter(|i| !block.contains(i));
    block.iter().copied().chain(rest).collect()
}

pub(crate) fn unique_role(s: &Sentence, role: CaseRole) -> Result<usize, TransformError> {
    let found = s.chunks_with_role(role);
    match found.as_slice() {
        [one] => Ok(*one),
        _ => Err(TransformError::RoleNotUnique {
            role,
            count: found.len(),
        }),
    }
}

/// Chunks with at least two dependents, in linear order.
pub fn scramble_sites(s: &Sentence) -> Vec<usize> {
    (0..s.len()).filter(|&i| s.children(i).len() >= 2).collect()
}

/// Picks a head with several dependents uniformly at random and applies a
/// uniformly chosen non-identity permutation to its dependents.
pub fn scramble(s: &Sentence, seed: u64) -> Result<Sentence, TransformError> {
    scramble_at(s, seed).map(|(_, out)| out)
}

/// As [`scramble`], also returning the chosen site.
pub fn scramble_at(s: &Sentence, seed: u64) -> Result<(usize, Sentence), TransformError> {
    let sites = scramble_sites(s);
    if sites.is_empty() {
        return Err(TransformError::NoScrambleSite);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let site = sites[rng.random_range(0..sites.len())];
    let children = s.children(site);
    let mut arrangement = children.clone();
    // rejection keeps the draw uniform over the k! - 1 non-identity orders
    while arrangement == children {
        arrangement.shuffle(&mut rng);
    }
    let order = order_with_children(s, &children, &arrangement);
    Ok((site, apply_order(s, &order)))
}

fn factorial_capped(k: usize, cap: usize) -> Option<usize> {
    (1..=k).try_fold(1usize, |acc, i| acc.checked_mul(i).filter(|&v| v <= cap))
}

/// All orders of the dependents of `site`, original order included. Labels
/// list the dependents' original 1-based ranks in their new order, e.g.
/// `3-1-2`.
pub fn enumerate_orders(s: &Sentence, site: usize, cap: usize) -> Result<VariantSet, TransformError> {
    if site >= s.len() {
        return Err(TransformError::SiteOutOfRange { site });
    }
    let children = s.children(site);
    let k = children.len();
    if k < 2 {
        return Err(TransformError::NotEnoughChildren { site, children: k });
    }
    if factorial_capped(k, cap).is_none() {
        return Err(TransformError::TooManyOrders { k });
    }
    let variants = (0..k)
        .permutations(k)
        .map(|perm| {
            let arrangement: Vec<usize> = perm.iter().map(|&p| children[p]).collect();
            let label = perm.iter().map(|p| (p + 1).to_string()).join("-");
            Variant::new(label, apply_order(s, &order_with_children(s, &children, &arrangement)))
        })
        .collect();
    VariantSet::new(s.clone(), variants)
}

/// Exchanges the positions of the unique `a` and `b` chunks (with subtrees).
pub fn swap_cases(s: &Sentence, a: CaseRole, b: CaseRole) -> Result<Sentence, TransformError> {
    let ia = unique_role(s, a)?;
    let ib = unique_role(s, b)?;
    let head = match (s.chunks[ia].head, s.chunks[ib].head) {
        (Some(ha), Some(hb)) if ha == hb => ha,
        _ => return Err(TransformError::NotSiblings { a, b }),
    };
    let children = s.children(head);
    let arrangement: Vec<usize> = children
        .iter()
        .map(|&c| match c {
            c if c == ia => ib,
            c if c == ib => ia,
            c => c,
        })
        .collect();
    Ok(apply_order(s, &order_with_children(s, &children, &arrangement)))
}
