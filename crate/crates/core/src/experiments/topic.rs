//! Topicalization and adverbial-particle analyses.

use std::collections::BTreeMap;

use itertools::Itertools;

use super::double_object::{judge_double_object, record_pearson};
use super::{rate, ExperimentConfig, ExperimentReport, Judge, LabeledTest, Plot, Skips, Table, VerbRecord};
use crate::corpus::{CaseRole, Sentence};
use crate::par::map_ordered;
use crate::stats::paired_t_test;
use crate::transform::ParticleRules;

fn rules(cfg: &ExperimentConfig) -> ParticleRules {
    let mut rules = ParticleRules::default();
    rules.adverbial_particles.extend(cfg.particles.iter().cloned());
    rules
}

/// `t(a, b)`: share of sentences containing both cases in which topicalizing
/// `a` is preferred over topicalizing `b`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TopicalizationMatrix {
    counts: BTreeMap<(CaseRole, CaseRole), u64>,
}

impl TopicalizationMatrix {
    pub fn add(&mut self, winner: CaseRole, other: CaseRole) {
        *self.counts.entry((winner, other)).or_default() += 1;
    }

    pub fn count(&self, a: CaseRole, b: CaseRole) -> u64 {
        self.counts.get(&(a, b)).copied().unwrap_or(0)
    }

    pub fn t(&self, a: CaseRole, b: CaseRole) -> Option<f64> {
        rate(self.count(a, b), self.count(b, a))
    }
}

struct TopicOutcome {
    dropped: Vec<String>,
    result: Result<(CaseRole, Vec<CaseRole>), String>,
}

fn topic_candidates(s: &Sentence, rules: &ParticleRules, cfg: &ExperimentConfig) -> (Vec<(String, Sentence)>, Vec<CaseRole>, Vec<String>) {
    let mut candidates = Vec::new();
    let mut roles = Vec::new();
    let mut dropped = Vec::new();
    for &role in &cfg.canonical_order {
        if s.chunks_with_role(role).len() != 1 {
            continue;
        }
        match rules.topicalize(s, role) {
            Ok(t) => {
                candidates.push((role.as_str().to_string(), t));
                roles.push(role);
            }
            Err(e) => dropped.push(e.code().to_string()),
        }
    }
    (candidates, roles, dropped)
}

/// Tallies which case's topicalization is preferred among all topicalizable
/// cases of each sentence, then compares t(a|b) with t(b|a) over pairs where
/// `a` canonically precedes `b`.
pub fn run_topicalization_claim_i(corpus: &[Sentence], judge: Judge<'_>, cfg: &ExperimentConfig) -> ExperimentReport {
    let rules = rules(cfg);
    let outcomes = map_ordered(corpus, cfg.workers, |s| {
        let (candidates, roles, dropped) = topic_candidates(s, &rules, cfg);
        let result = if candidates.len() < 2 {
            Err("TOO_FEW_CANDIDATES".to_string())
        } else {
            judge
                .pick(s, candidates, cfg)
                .and_then(|w| w.ok_or_else(|| "TIE".to_string()))
                .map(|w| (roles[w], roles))
        };
        TopicOutcome { dropped, result }
    });
    let mut skips = Skips::default();
    let mut matrix = TopicalizationMatrix::default();
    for o in outcomes {
        o.dropped.into_iter().for_each(|c| skips.add(c));
        match o.result {
            Ok((winner, roles)) => roles.iter().filter(|&&r| r != winner).for_each(|&r| matrix.add(winner, r)),
            Err(code) => skips.add(code),
        }
    }

    let mut table = Table::new(&["a", "b", "n_a_given_b", "n_b_given_a", "t"]);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (&a, &b) in cfg.canonical_order.iter().tuple_combinations() {
        for (x, y) in [(a, b), (b, a)] {
            table.push(vec![
                x.as_str().into(),
                y.as_str().into(),
                matrix.count(x, y).into(),
                matrix.count(y, x).into(),
                matrix.t(x, y).into(),
            ]);
        }
        if let (Some(tab), Some(tba)) = (matrix.t(a, b), matrix.t(b, a)) {
            xs.push(tab);
            ys.push(tba);
        }
    }
    let mut report = ExperimentReport::new("topic-i", cfg.echo(), table);
    report.skipped = skips.0;
    report.summarize("n_pairs", xs.len() as u64);
    report.tests.push(LabeledTest::new("anterior_vs_posterior", paired_t_test(&xs, &ys)));
    report
}

/// Per verb: how often topicalizing ACC beats topicalizing DAT, correlated
/// with the verb's ACC-DAT rate.
pub fn run_topicalization_claim_ii(
    corpus: &[Sentence],
    judge: Judge<'_>,
    records: &[VerbRecord],
    cfg: &ExperimentConfig,
) -> ExperimentReport {
    let rules = rules(cfg);
    let outcomes = map_ordered(corpus, cfg.workers, |s| -> Result<(String, Option<bool>), String> {
        let verb = s.verb_lemma.clone().ok_or("NO_VERB")?;
        let acc = rules.topicalize(s, CaseRole::Acc).map_err(|e| e.code().to_string())?;
        let dat = rules.topicalize(s, CaseRole::Dat).map_err(|e| e.code().to_string())?;
        let w = judge.pick(s, vec![("ACC".into(), acc), ("DAT".into(), dat)], cfg)?;
        Ok((verb, w.map(|i| i == 0)))
    });
    let mut skips = Skips::default();
    let mut by_verb: BTreeMap<String, (u64, u64, u64)> = BTreeMap::new();
    for o in outcomes {
        match o {
            Ok((verb, w)) => {
                let e = by_verb.entry(verb).or_default();
                match w {
                    Some(true) => e.0 += 1,
                    Some(false) => e.1 += 1,
                    None => e.2 += 1,
                }
            }
            Err(code) => skips.add(code),
        }
    }
    let r_acc_dat: BTreeMap<&str, Option<f64>> = records.iter().map(|r| (r.verb_lemma.as_str(), r.r_acc_dat)).collect();
    let mut table = Table::new(&["verb_lemma", "n_acc_topic", "n_dat_topic", "n_tie", "r_acc_topic", "r_acc_dat"]);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (verb, (acc, dat, tie)) in &by_verb {
        let r_topic = rate(*acc, *dat);
        let r_order = r_acc_dat.get(verb.as_str()).copied().flatten();
        if let (Some(x), Some(y)) = (r_order, r_topic) {
            xs.push(x);
            ys.push(y);
        }
        table.push(vec![verb.clone().into(), (*acc).into(), (*dat).into(), (*tie).into(), r_topic.into(), r_order.into()]);
    }
    let mut report = ExperimentReport::new("topic-ii", cfg.echo(), table);
    report.skipped = skips.0;
    report.summarize("n_verbs", xs.len() as u64);
    record_pearson(&mut report, &xs, &ys);
    report.plots.push(Plot {
        name: "topicalization".into(),
        title: "ACC topicalization rate against ACC-DAT rate".into(),
        x_label: "ACC-DAT rate".into(),
        y_label: "ACC topicalization rate".into(),
        points: xs.into_iter().zip(ys).collect(),
        regression: true,
    });
    report
}

type CellKey = (CaseRole, String);
type Decision = Result<Option<bool>, String>;
/// (verb, plain preference, per-particle preferences) for double objects.
type Shift = (String, Option<bool>, Vec<(String, Decision)>);

struct ParticleOutcome {
    cells: Vec<(CellKey, Decision)>,
    shift: Option<Shift>,
}

fn particle_outcome(s: &Sentence, judge: Judge<'_>, rules: &ParticleRules, cfg: &ExperimentConfig) -> ParticleOutcome {
    let mut cells = Vec::new();
    for &role in &cfg.canonical_order {
        if s.chunks_with_role(role).len() != 1 {
            continue;
        }
        for p in &cfg.particles {
            let outcome = (|| {
                let moved = rules.substitute(s, role, p, true).map_err(|e| e.code().to_string())?;
                let kept = rules.substitute(s, role, p, false).map_err(|e| e.code().to_string())?;
                Ok(judge.pick(s, vec![("moved".into(), moved), ("non-moved".into(), kept)], cfg)?.map(|w| w == 0))
            })();
            cells.push(((role, p.clone()), outcome));
        }
    }
    let shift = s.verb_lemma.as_ref().and_then(|verb| {
        let plain = judge_double_object(s, judge, cfg).ok()?;
        let marked = cfg
            .particles
            .iter()
            .map(|p| {
                let r = rules
                    .substitute(s, CaseRole::Acc, p, false)
                    .map_err(|e| e.code().to_string())
                    .and_then(|marked| judge_double_object(&marked, judge, cfg));
                (p.clone(), r)
            })
            .collect();
        Some((verb.clone(), plain, marked))
    });
    ParticleOutcome { cells, shift }
}

#[derive(Default)]
struct Wins {
    yes: u64,
    no: u64,
    tie: u64,
}

impl Wins {
    fn add(&mut self, w: Option<bool>) {
        match w {
            Some(true) => self.yes += 1,
            Some(false) => self.no += 1,
            None => self.tie += 1,
        }
    }

    fn rate(&self) -> Option<f64> {
        rate(self.yes, self.no)
    }
}

/// Moved vs non-moved preference for each (case, particle), plus the shift in
/// ACC-DAT preference when ACC carries each particle.
pub fn run_adverbial_particles(corpus: &[Sentence], judge: Judge<'_>, cfg: &ExperimentConfig) -> ExperimentReport {
    let rules = rules(cfg);
    let outcomes = map_ordered(corpus, cfg.workers, |s| particle_outcome(s, judge, &rules, cfg));
    let mut skips = Skips::default();
    let mut cells: BTreeMap<CellKey, Wins> = BTreeMap::new();
    let mut shifts: BTreeMap<(String, String), (Wins, Wins)> = BTreeMap::new();
    for o in outcomes {
        for (key, r) in o.cells {
            match r {
                Ok(w) => cells.entry(key).or_default().add(w),
                Err(code) => skips.add(code),
            }
        }
        if let Some((verb, plain, marked)) = o.shift {
            for (p, r) in marked {
                match r {
                    Ok(w) => {
                        let e = shifts.entry((verb.clone(), p)).or_default();
                        e.0.add(plain);
                        e.1.add(w);
                    }
                    Err(code) => skips.add(code),
                }
            }
        }
    }

    let mut table = Table::new(&["case", "particle", "wins_moved", "wins_non_moved", "n_tie", "rate"]);
    for &role in &cfg.canonical_order {
        for p in &cfg.particles {
            let w = cells.remove(&(role, p.clone())).unwrap_or_default();
            table.push(vec![role.as_str().into(), p.clone().into(), w.yes.into(), w.no.into(), w.tie.into(), w.rate().into()]);
        }
    }
    let mut shift = Table::new(&["verb_lemma", "particle", "n_plain", "r_acc_dat_plain", "n_marked", "r_acc_dat_marked", "shift"]);
    for ((verb, p), (plain, marked)) in &shifts {
        let (a, b) = (plain.rate(), marked.rate());
        shift.push(vec![
            verb.clone().into(),
            p.clone().into(),
            (plain.yes + plain.no).into(),
            a.into(),
            (marked.yes + marked.no).into(),
            b.into(),
            a.zip(b).map(|(a, b)| b - a).into(),
        ]);
    }
    let mut report = ExperimentReport::new("adverbial-particles", cfg.echo(), table);
    report.skipped = skips.0;
    report.tables.insert("double_object_shift".into(), shift);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::*;
    use crate::experiments::testing::*;
    use crate::experiments::Cell;

    /// NOM, DAT, ACC on a verb, in the given order.
    fn sentence(id: &str, order: &[CaseRole]) -> Sentence {
        with_nouns(id, order, "せんせい", "ほん")
    }

    fn with_nouns(id: &str, order: &[CaseRole], nom: &str, acc: &str) -> Sentence {
        let n = order.len();
        let mut chunks: Vec<_> = order
            .iter()
            .map(|&r| match r {
                CaseRole::Nom => noun(nom, "が", n, r),
                CaseRole::Dat => noun("せいと", "に", n, r),
                _ => noun(acc, "を", n, r),
            })
            .collect();
        chunks.push(verb("あげた"));
        Sentence::new(id, chunks).with_verb("あげる")
    }

    #[test]
    fn matrix_rates() {
        let mut m = TopicalizationMatrix::default();
        for _ in 0..8 {
            m.add(CaseRole::Nom, CaseRole::Acc);
        }
        for _ in 0..2 {
            m.add(CaseRole::Acc, CaseRole::Nom);
        }
        assert_eq!(m.t(CaseRole::Nom, CaseRole::Acc), Some(0.8));
        assert_eq!(m.t(CaseRole::Acc, CaseRole::Nom), Some(0.2));
        assert_eq!(m.t(CaseRole::Nom, CaseRole::Dat), None);
    }

    #[test]
    fn claim_i_prefers_the_scored_topic() {
        use CaseRole::*;
        let corpus: Vec<Sentence> = (0..4).map(|i| sentence(&i.to_string(), &[Nom, Dat, Acc])).collect();
        // せんせいは sorts ahead of everything else
        let scorer = scorer(|t| if t.starts_with("せんせいは") { 0.0 } else if t.starts_with("せいとには") { -1.0 } else { -2.0 });
        let report = run_topicalization_claim_i(&corpus, Judge::Lm(&scorer), &ExperimentConfig::default());
        let row = report.records.find(&["NOM", "ACC"]).unwrap();
        assert_eq!(report.records.cell(row, "t"), Some(&Cell::Real(Some(1.0))));
        let row = report.records.find(&["DAT", "ACC"]).unwrap();
        assert_eq!(report.records.cell(row, "n_a_given_b"), Some(&Cell::Count(0)));
        assert_eq!(report.summary["n_pairs"], 2u64.into());
        // t is 1 for both defined pairs, so the differences have no variance
        assert!(report.test("anterior_vs_posterior").is_none());

        let report = run_topicalization_claim_i(&corpus, Judge::Lm(&uniform()), &ExperimentConfig::default());
        assert_eq!(report.skipped["TIE"], 4);
    }

    #[test]
    fn claim_i_symmetric_tallies_give_one_half() {
        use CaseRole::*;
        let corpus = vec![
            with_nouns("1", &[Nom, Acc], "せんせい", "ほん"),
            with_nouns("2", &[Nom, Acc], "せんせい", "ほん"),
            with_nouns("3", &[Nom, Acc], "はは", "ほん"),
            with_nouns("4", &[Nom, Acc], "はは", "ほん"),
        ];
        let scorer = scorer(|t| if t.starts_with("せんせいは") || t.starts_with("ほんはははが") { 0.0 } else { -1.0 });
        let report = run_topicalization_claim_i(&corpus, Judge::Lm(&scorer), &ExperimentConfig::default());
        for (a, b) in [("NOM", "ACC"), ("ACC", "NOM")] {
            let row = report.records.find(&[a, b]).unwrap();
            assert_eq!(report.records.cell(row, "t"), Some(&Cell::Real(Some(0.5))));
        }
    }

    fn record(verb: &str, r: f64) -> VerbRecord {
        VerbRecord {
            verb_lemma: verb.into(),
            r_acc_dat: Some(r),
            ..VerbRecord::default()
        }
    }

    #[test]
    fn claim_ii_rates_equal_to_acc_dat_rate_correlate_perfectly() {
        use CaseRole::*;
        // the ACC topic wins for ほん and loses for かさ
        let mut corpus = Vec::new();
        for (verb_lemma, n_win) in [("a", 3), ("b", 1), ("c", 2)] {
            for i in 0..4 {
                let acc = if i < n_win { "ほん" } else { "かさ" };
                let mut s = with_nouns(&format!("{verb_lemma}{i}"), &[Nom, Dat, Acc], "せんせい", acc);
                s.verb_lemma = Some(verb_lemma.into());
                corpus.push(s);
            }
        }
        let records = vec![record("a", 0.75), record("b", 0.25), record("c", 0.5)];
        let scorer = scorer(|t| if t.starts_with("ほんは") || (t.starts_with("せいとには") && t.contains("かさ")) { 0.0 } else { -1.0 });
        let report = run_topicalization_claim_ii(&corpus, Judge::Lm(&scorer), &records, &ExperimentConfig::default());
        assert_eq!(report.records.cell(0, "r_acc_topic"), Some(&Cell::Real(Some(0.75))));
        assert!((report.summary_real("pearson").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(report.plots[0].points.len(), 3);
    }

    #[test]
    fn particle_cells_and_shift() {
        use CaseRole::*;
        let corpus: Vec<Sentence> = (0..4).map(|i| sentence(&i.to_string(), &[Nom, Dat, Acc])).collect();
        // moving the particle-marked chunk to the front wins unless it is NOM
        // (already first, so both variants render the same)
        let scorer = scorer(|t| if t.starts_with("せんせい") { -1.0 } else { 0.0 });
        let cfg = ExperimentConfig::default();
        let report = run_adverbial_particles(&corpus, Judge::Lm(&scorer), &cfg);
        let row = report.records.find(&["ACC", "こそ"]).unwrap();
        assert_eq!(report.records.cell(row, "rate"), Some(&Cell::Real(Some(1.0))));
        let row = report.records.find(&["NOM", "も"]).unwrap();
        assert_eq!(report.records.cell(row, "n_tie"), Some(&Cell::Count(4)));
        assert_eq!(report.records.cell(row, "rate"), Some(&Cell::Real(None)));
        let row = report.records.find(&["TIM", "は"]).unwrap();
        assert_eq!(report.records.cell(row, "wins_moved"), Some(&Cell::Count(0)));
        let shift = &report.tables["double_object_shift"];
        assert_eq!(shift.rows.len(), cfg.particles.len());

        let report = run_adverbial_particles(&corpus, Judge::Lm(&uniform()), &cfg);
        for r in 0..report.records.rows.len() {
            assert_eq!(report.records.cell(r, "rate"), Some(&Cell::Real(None)));
        }
    }
}
