//! Character / pre-tokenized n-gram language models with interpolated
//! absolute discounting.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ScoringError, SequenceScorer};

pub const BOS: u32 = 0;
pub const EOS: u32 = 1;
pub const UNK: u32 = 2;
const FIRST_UNIT: u32 = 3;
const FORMAT_VERSION: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Unit {
    /// Every Unicode scalar value is a unit.
    Char,
    /// Whitespace-separated units (subwords segmented upstream).
    Pretokenized,
}

impl Unit {
    pub fn split(self, text: &str) -> Vec<&str> {
        match self {
            Unit::Char => text
                .char_indices()
                .map(|(i, c)| &text[i..i + c.len_utf8()])
                .collect(),
            Unit::Pretokenized => text.split_whitespace().collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NGramConfig {
    pub order: usize,
    pub unit: Unit,
    pub direction: Direction,
    /// Absolute discount in (0, 1). Zero gives unsmoothed maximum-likelihood
    /// estimates, which are only useful for checking counts.
    pub discount: f64,
    /// Units seen this many times or fewer become UNK.
    pub unk_threshold: u64,
}

impl Default for NGramConfig {
    fn default() -> Self {
        NGramConfig {
            order: 3,
            unit: Unit::Char,
            direction: Direction::Forward,
            discount: 0.75,
            unk_threshold: 1,
        }
    }
}

impl NGramConfig {
    pub fn with_direction(self, direction: Direction) -> Self {
        NGramConfig { direction, ..self }
    }

    fn validate(&self) -> Result<(), ScoringError> {
        if self.order < 1 {
            return Err(ScoringError::InvalidOrder(self.order));
        }
        if !(0.0..1.0).contains(&self.discount) {
            return Err(ScoringError::InvalidDiscount(self.discount));
        }
        Ok(())
    }
}

/// Continuation counts for one context.
#[derive(Clone, Debug, Default, PartialEq)]
struct ContextCounts {
    total: u64,
    next: HashMap<u32, u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NGramModel {
    config: NGramConfig,
    units: Vec<String>,
    ids: HashMap<String, u32>,
    /// Keyed by contexts of length 0..order-1 (oldest unit first).
    counts: HashMap<Vec<u32>, ContextCounts>,
}

impl NGramModel {
    pub fn train<S: AsRef<str>>(lines: &[S], config: NGramConfig) -> Result<Self, ScoringError> {
        config.validate()?;
        if lines.is_empty() {
            return Err(ScoringError::EmptyCorpus);
        }
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for line in lines {
            for u in config.unit.split(line.as_ref()) {
                *freq.entry(u).or_default() += 1;
            }
        }
        let mut units: Vec<String> = freq
            .into_iter()
            .filter(|&(_, c)| c > config.unk_threshold)
            .map(|(u, _)| u.to_string())
            .collect();
        units.sort();
        let ids = index(&units);
        let mut model = NGramModel {
            config,
            units,
            ids,
            counts: HashMap::new(),
        };
        for line in lines {
            let seq = model.encode(line.as_ref());
            model.count(&seq);
        }
        Ok(model)
    }

    fn count(&mut self, seq: &[u32]) {
        let n = self.config.order;
        let mut padded = vec![BOS; n - 1];
        padded.extend_from_slice(seq);
        padded.push(EOS);
        for t in n - 1..padded.len() {
            let w = padded[t];
            for k in 0..n {
                let ctx = padded[t - k..t].to_vec();
                let entry = self.counts.entry(ctx).or_default();
                entry.total += 1;
                *entry.next.entry(w).or_default() += 1;
            }
        }
    }

    /// Unit ids in scoring order (reversed for backward models), without
    /// padding.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        let mut seq: Vec<u32> = self
            .config
            .unit
            .split(text)
            .into_iter()
            .map(|u| self.ids.get(u).copied().unwrap_or(UNK))
            .collect();
        if self.config.direction == Direction::Backward {
            seq.reverse();
        }
        seq
    }

    pub fn config(&self) -> &NGramConfig {
        &self.config
    }

    pub fn order(&self) -> usize {
        self.config.order
    }

    pub fn unit(&self) -> Unit {
        self.config.unit
    }

    pub fn direction(&self) -> Direction {
        self.config.direction
    }

    /// Regular units (without BOS/EOS/UNK), in id order.
    pub fn units(&self) -> &[String] {
        &self.units
    }

    /// Number of predictable outcomes: regular units, UNK and EOS.
    pub fn outcomes(&self) -> usize {
        self.units.len() + 2
    }

    /// All outcome ids a model can predict.
    pub fn outcome_ids(&self) -> impl Iterator<Item = u32> {
        std::iter::once(EOS)
            .chain(std::iter::once(UNK))
            .chain(FIRST_UNIT..FIRST_UNIT + self.units.len() as u32)
    }

    /// Every context with observations, as id sequences.
    pub fn contexts(&self) -> Vec<Vec<u32>> {
        let mut v: Vec<Vec<u32>> = self.counts.keys().cloned().collect();
        v.sort();
        v
    }

    pub fn id(&self, unit: &str) -> u32 {
        self.ids.get(unit).copied().unwrap_or(UNK)
    }

    /// P(w | context); only the last order−1 ids of the context are used.
    pub fn prob(&self, context: &[u32], w: u32) -> f64 {
        let keep = context.len().min(self.config.order - 1);
        let ctx = &context[context.len() - keep..];
        if self.config.discount == 0.0 {
            return self.prob_ml(ctx, w);
        }
        self.prob_interp(ctx, w)
    }

    fn prob_interp(&self, ctx: &[u32], w: u32) -> f64 {
        let lower = if ctx.is_empty() {
            1.0 / self.outcomes() as f64
        } else {
            self.prob_interp(&ctx[1..], w)
        };
        let Some(c) = self.counts.get(ctx) else {
            return lower;
        };
        let d = self.config.discount;
        let total = c.total as f64;
        let cw = c.next.get(&w).copied().unwrap_or(0) as f64;
        (cw - d).max(0.0) / total + d * c.next.len() as f64 / total * lower
    }

    fn prob_ml(&self, ctx: &[u32], w: u32) -> f64 {
        match self.counts.get(ctx) {
            Some(c) => c.next.get(&w).copied().unwrap_or(0) as f64 / c.total as f64,
            None if !ctx.is_empty() => self.prob_ml(&ctx[1..], w),
            None => 0.0,
        }
    }

    /// Log-probability of an encoded sequence including the EOS term.
    pub fn logprob_ids(&self, seq: &[u32]) -> f64 {
        let n = self.config.order;
        let mut padded = vec![BOS; n - 1];
        padded.extend_from_slice(seq);
        padded.push(EOS);
        (n - 1..padded.len())
            .map(|t| self.prob(&padded[t + 1 - n..t], padded[t]).ln())
            .sum()
    }

    /// Natural-log probability of `text`; backward models score it reversed.
    pub fn logprob(&self, text: &str) -> f64 {
        self.logprob_ids(&self.encode(text))
    }

    pub fn save(&self, path: &Path) -> Result<(), ScoringError> {
        let file = File::create(path).map_err(|e| ScoringError::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer(&mut w, &self.to_file())
            .map_err(|e| ScoringError::ModelFormat(e.to_string()))?;
        w.flush().map_err(|e| ScoringError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, ScoringError> {
        let file = File::open(path).map_err(|e| ScoringError::io(path, e))?;
        let raw: serde_json::Value = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| ScoringError::ModelFormat(e.to_string()))?;
        match raw.get("gojun_ngram").and_then(|v| v.as_u64()) {
            Some(FORMAT_VERSION) => {}
            Some(v) => return Err(ScoringError::UnsupportedVersion(v)),
            None => return Err(ScoringError::ModelFormat("missing gojun_ngram header".into())),
        }
        let file: ModelFile =
            serde_json::from_value(raw).map_err(|e| ScoringError::ModelFormat(e.to_string()))?;
        Self::from_file(file)
    }

    fn to_file(&self) -> ModelFile {
        let mut counts: Vec<ContextRecord> = self
            .counts
            .iter()
            .map(|(ctx, c)| {
                let mut next: Vec<(u32, u64)> = c.next.iter().map(|(&w, &n)| (w, n)).collect();
                next.sort_unstable();
                ContextRecord {
                    context: ctx.clone(),
                    next,
                }
            })
            .collect();
        counts.sort_by(|a, b| a.context.cmp(&b.context));
        ModelFile {
            gojun_ngram: FORMAT_VERSION,
            config: self.config,
            vocabulary: self.units.clone(),
            counts,
        }
    }

    fn from_file(file: ModelFile) -> Result<Self, ScoringError> {
        file.config.validate()?;
        let limit = FIRST_UNIT as usize + file.vocabulary.len();
        let mut counts = HashMap::new();
        for rec in file.counts {
            if rec.context.len() >= file.config.order
                || rec.context.iter().chain(rec.next.iter().map(|(w, _)| w)).any(|&id| id as usize >= limit)
            {
                return Err(ScoringError::ModelFormat("count record out of range".into()));
            }
            let next: HashMap<u32, u64> = rec.next.into_iter().collect();
            let total = next.values().sum();
            counts.insert(rec.context, ContextCounts { total, next });
        }
        Ok(NGramModel {
            config: file.config,
            ids: index(&file.vocabulary),
            units: file.vocabulary,
            counts,
        })
    }
}

fn index(units: &[String]) -> HashMap<String, u32> {
    units
        .iter()
        .enumerate()
        .map(|(i, u)| (u.clone(), FIRST_UNIT + i as u32))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    gojun_ngram: u64,
    config: NGramConfig,
    vocabulary: Vec<String>,
    counts: Vec<ContextRecord>,
}

#[derive(Serialize, Deserialize)]
struct ContextRecord {
    context: Vec<u32>,
    next: Vec<(u32, u64)>,
}

impl SequenceScorer for NGramModel {
    fn direction(&self) -> Direction {
        self.config.direction
    }

    fn logprob_batch(&self, texts: &[String]) -> Result<Vec<f64>, ScoringError> {
        Ok(texts.iter().map(|t| self.logprob(t)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(order: usize, discount: f64) -> NGramConfig {
        NGramConfig {
            order,
            unit: Unit::Char,
            direction: Direction::Forward,
            discount,
            unk_threshold: 0,
        }
    }

    #[test]
    fn unsmoothed_counts() {
        let m = NGramModel::train(&["ab", "ab", "ac"], cfg(2, 0.0)).unwrap();
        let (a, b, c) = (m.id("a"), m.id("b"), m.id("c"));
        assert!((m.prob(&[a], b) - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.prob(&[a], c) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.prob(&[BOS], a), 1.0);
        assert_eq!(m.prob(&[b], EOS), 1.0);
        assert!((m.logprob("ab") - (2.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!((m.logprob("ab") + 0.4055).abs() < 1e-4);
    }

    #[test]
    fn empty_text_scores_eos_after_bos() {
        let m = NGramModel::train(&["ab", "ba", "aab"], NGramConfig::default()).unwrap();
        assert_eq!(m.logprob(""), m.prob(&[BOS, BOS], EOS).ln());
    }

    #[test]
    fn errors() {
        let empty: [&str; 0] = [];
        assert!(matches!(NGramModel::train(&empty, cfg(2, 0.5)), Err(ScoringError::EmptyCorpus)));
        assert!(matches!(NGramModel::train(&["a"], cfg(0, 0.5)), Err(ScoringError::InvalidOrder(0))));
        assert!(matches!(NGramModel::train(&["a"], cfg(2, 1.0)), Err(ScoringError::InvalidDiscount(_))));
    }

    #[test]
    fn unigram_ignores_context() {
        let m = NGramModel::train(&["abc", "abd", "aa"], cfg(1, 0.75)).unwrap();
        let a = m.id("a");
        assert_eq!(m.prob(&[], a), m.prob(&[m.id("b"), m.id("c")], a));
        assert!((m.logprob("abc") - m.logprob("cba")).abs() < 1e-12);
    }

    #[test]
    fn rare_units_become_unk() {
        let m = NGramModel::train(
            &["aab", "ab"],
            NGramConfig {
                unk_threshold: 1,
                ..cfg(2, 0.5)
            },
        )
        .unwrap();
        assert_eq!(m.units(), ["a", "b"]);
        let m = NGramModel::train(
            &["aab", "abc"],
            NGramConfig {
                unk_threshold: 1,
                ..cfg(2, 0.5)
            },
        )
        .unwrap();
        assert_eq!(m.id("c"), UNK);
        assert_eq!(m.logprob("abc"), m.logprob("abz"));
    }

    #[test]
    fn backward_is_forward_on_reversed_corpus() {
        let back = NGramModel::train(&["ab"], cfg(2, 0.0).with_direction(Direction::Backward)).unwrap();
        let fwd = NGramModel::train(&["ba"], cfg(2, 0.0)).unwrap();
        assert_eq!(back.prob(&[back.id("b")], back.id("a")), fwd.prob(&[fwd.id("b")], fwd.id("a")));
        assert_eq!(back.logprob("ab"), fwd.logprob("ba"));
    }

    #[test]
    fn pretokenized_units() {
        let m = NGramModel::train(
            &["先生 が 本 を", "生徒 に 本 を"],
            NGramConfig {
                unit: Unit::Pretokenized,
                ..cfg(2, 0.5)
            },
        )
        .unwrap();
        assert_eq!(m.units().len(), 6);
        assert!(m.logprob("先生 が 本 を") > m.logprob("を 本 が 先生"));
    }

    #[test]
    fn save_load_round_trip() {
        let m = NGramModel::train(&["本を読んだ", "本を書いた", "手紙を書いた"], NGramConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        m.save(&path).unwrap();
        let raw = std::fs::read_to_string(&path).unwrap();
        assert!(raw.starts_with("{\"gojun_ngram\":1"));
        assert_eq!(NGramModel::load(&path).unwrap(), m);

        std::fs::write(&path, raw.replacen("\"gojun_ngram\":1", "\"gojun_ngram\":9", 1)).unwrap();
        assert!(matches!(NGramModel::load(&path), Err(ScoringError::UnsupportedVersion(9))));
        std::fs::write(&path, "{}").unwrap();
        assert!(matches!(NGramModel::load(&path), Err(ScoringError::ModelFormat(_))));
    }

    fn small_corpus() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec("[abcd]{0,6}", 1..12)
    }

    proptest! {
        #[test]
        fn distributions_normalise(lines in small_corpus(), order in 1usize..4, d in 0.05f64..0.95, unk in 0u64..2) {
            let m = NGramModel::train(&lines, NGramConfig { unk_threshold: unk, ..cfg(order, d) }).unwrap();
            for ctx in m.contexts() {
                let total: f64 = m.outcome_ids().map(|w| m.prob(&ctx, w)).sum();
                prop_assert!((total - 1.0).abs() < 1e-9, "{:?}: {}", ctx, total);
                for w in m.outcome_ids() {
                    prop_assert!(m.prob(&ctx, w) > 0.0);
                }
            }
        }

        #[test]
        fn unigram_permutation_invariance(lines in small_corpus(), text in "[abcde]{0,8}", seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let m = NGramModel::train(&lines, cfg(1, 0.5)).unwrap();
            let mut chars: Vec<char> = text.chars().collect();
            chars.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let shuffled: String = chars.into_iter().collect();
            prop_assert!((m.logprob(&text) - m.logprob(&shuffled)).abs() <= 1e-9);
        }

        #[test]
        fn reversal_duality(lines in small_corpus(), text in "[abcde]{0,8}", order in 1usize..4) {
            let back = NGramModel::train(&lines, cfg(order, 0.75).with_direction(Direction::Backward)).unwrap();
            let reversed: Vec<String> = lines.iter().map(|l| l.chars().rev().collect()).collect();
            let fwd = NGramModel::train(&reversed, cfg(order, 0.75)).unwrap();
            let rt: String = text.chars().rev().collect();
            prop_assert_eq!(back.logprob(&text), fwd.logprob(&rt));
        }

        #[test]
        fn duplicating_a_line_does_not_hurt_it(lines in small_corpus(), pick in any::<prop::sample::Index>(), order in 1usize..4) {
            let line = lines[pick.index(lines.len())].clone();
            let before = NGramModel::train(&lines, cfg(order, 0.75)).unwrap().logprob(&line);
            let mut more = lines.clone();
            more.push(line.clone());
            let after = NGramModel::train(&more, cfg(order, 0.75)).unwrap().logprob(&line);
            prop_assert!(after >= before - 1e-12, "{} < {}", after, before);
        }
    }
}
