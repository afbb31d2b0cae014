//! Agreement between model decisions and annotator gold labels.

use super::{ExperimentConfig, ExperimentError, ExperimentReport, Judge, Skips, Table};
use crate::corpus::{Label, PreferencePair};
use crate::par::map_ordered;
use crate::stats::{agreement_rate, phi};

/// Scores both orders of every gold-labelled pair and reports agreement rate
/// and phi against the gold preference. Model ties are excluded from both.
pub fn run_human_agreement(
    pairs: &[PreferencePair],
    judge: Judge<'_>,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, ExperimentError> {
    let gold: Vec<&PreferencePair> = pairs.iter().filter(|p| p.gold.is_some()).collect();
    if gold.is_empty() {
        return Err(ExperimentError::EmptyEval("no gold-labelled pairs".into()));
    }
    let decisions = map_ordered(&gold, cfg.workers, |p| {
        judge.pick(
            &p.order1,
            vec![("order1".into(), p.order1.clone()), ("order2".into(), p.order2.clone())],
            cfg,
        )
    });

    let mut skips = Skips::default();
    let mut table = Table::new(&["id", "gold", "model"]);
    let (mut model, mut human) = (Vec::new(), Vec::new());
    let mut ties = 0u64;
    for (p, d) in gold.iter().zip(decisions) {
        let gold_first = p.gold == Some(Label::Prefer1);
        let decision = match d {
            Ok(Some(w)) => {
                model.push(w == 0);
                human.push(gold_first);
                if w == 0 { "PREFER1" } else { "PREFER2" }
            }
            Ok(None) => {
                ties += 1;
                "TIE"
            }
            Err(code) => {
                skips.add(code);
                continue;
            }
        };
        table.push(vec![
            p.id.clone().into(),
            if gold_first { "PREFER1" } else { "PREFER2" }.into(),
            decision.into(),
        ]);
    }
    let mut report = ExperimentReport::new("human-agreement", cfg.echo(), table);
    report.skipped = skips.0;
    report.summarize("n_pairs", gold.len() as u64);
    report.summarize("n_decided", model.len() as u64);
    report.summarize("n_tie", ties);
    report.summarize("agreement", agreement_rate(&model, &human).ok());
    match phi(&model, &human) {
        Ok(v) => report.summarize("phi", Some(v)),
        Err(e) => {
            report.summarize("phi", None);
            report.summarize("phi_error", e.code());
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use std::hash::{DefaultHasher, Hash, Hasher};

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::corpus::fixtures::*;
    use crate::corpus::{CaseRole, Sentence, Vote};
    use crate::experiments::testing::*;

    const STEMS: [&str; 6] = ["あ", "い", "う", "え", "お", "か"];

    fn pair(id: usize, x: &str, y: &str, gold_first: bool) -> PreferencePair {
        let nom = noun(x, "が", 2, CaseRole::Nom);
        let acc = noun(y, "を", 2, CaseRole::Acc);
        let order1 = Sentence::new(id.to_string(), vec![nom.clone(), acc.clone(), verb("みた")]);
        let order2 = Sentence::new(id.to_string(), vec![acc, nom, verb("みた")]);
        let vote = if gold_first { Vote::Prefer1 } else { Vote::Prefer2 };
        PreferencePair::new(id.to_string(), order1, order2, vec![vote; 5])
    }

    fn random_pairs(n: usize, seed: u64) -> Vec<PreferencePair> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let x = STEMS[rng.random_range(0..STEMS.len())];
                let y = STEMS[rng.random_range(0..STEMS.len())];
                pair(i, &format!("{x}{i}"), y, rng.random())
            })
            .collect()
    }

    #[test]
    fn perfect_agreement() {
        // gold prefers the order with the numbered noun first, and so does
        // the scorer
        let pairs = random_pairs(50, 1)
            .into_iter()
            .map(|mut p| {
                p.gold = Some(Label::Prefer1);
                p
            })
            .chain([pair(99, "か", "き", false)])
            .collect::<Vec<_>>();
        let scorer = scorer(|t| if t.starts_with('き') || t.chars().nth(1).is_some_and(|c| c.is_ascii_digit()) { 0.0 } else { -1.0 });
        let report = run_human_agreement(&pairs, Judge::Lm(&scorer), &ExperimentConfig::default()).unwrap();
        assert_eq!(report.summary_real("agreement"), Some(1.0));
        assert_eq!(report.summary_real("phi"), Some(1.0));
        assert_eq!(report.summary["n_tie"], 0u64.into());
    }

    #[test]
    fn coin_flip_scorer_has_near_zero_phi() {
        let pairs = random_pairs(500, 42);
        let coin = scorer(|t| {
            let mut h = DefaultHasher::new();
            t.hash(&mut h);
            ChaCha8Rng::seed_from_u64(h.finish()).random::<f64>()
        });
        let report = run_human_agreement(&pairs, Judge::Lm(&coin), &ExperimentConfig::default()).unwrap();
        let phi = report.summary_real("phi").unwrap();
        assert!(phi.abs() < 0.2, "{phi}");
        assert_eq!(report.summary["n_decided"], 500u64.into());
    }

    #[test]
    fn ties_are_excluded_and_no_gold_is_an_error() {
        let pairs = random_pairs(10, 3);
        let report = run_human_agreement(&pairs, Judge::Lm(&uniform()), &ExperimentConfig::default()).unwrap();
        assert_eq!(report.summary["n_tie"], 10u64.into());
        assert_eq!(report.summary_real("phi"), None);
        let mut unlabeled = pairs;
        unlabeled.iter_mut().for_each(|p| p.gold = None);
        let err = run_human_agreement(&unlabeled, Judge::Count, &ExperimentConfig::default()).unwrap_err();
        assert_eq!(err.code(), "EMPTY_EVAL");
    }
}
