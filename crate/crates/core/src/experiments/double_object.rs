//! Double-object analyses: ACC-DAT vs DAT-ACC preferences per verb.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{rate, ExperimentConfig, ExperimentError, ExperimentReport, Judge, LabeledTest, Plot, Skips, Table};
use crate::corpus::{CaseRole, SemTag, Sentence};
use crate::par::map_ordered;
use crate::stats::{
    delta_npmi, pearson, sign_test, two_proportion_z_test, wilcoxon_rank_sum, CooccurrenceTable,
};
use crate::transform::swap_cases;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerbRecord {
    pub verb_lemma: String,
    pub n_acc_dat: u64,
    pub n_dat_acc: u64,
    pub n_tie: u64,
    pub r_acc_dat: Option<f64>,
    pub n_dat_only: u64,
    pub n_acc_only: u64,
    pub r_dat_only: Option<f64>,
}

impl VerbRecord {
    fn new(verb: &str) -> Self {
        VerbRecord {
            verb_lemma: verb.to_string(),
            ..Self::default()
        }
    }

    fn finish(&mut self) {
        self.r_acc_dat = rate(self.n_acc_dat, self.n_dat_acc);
        self.r_dat_only = rate(self.n_dat_only, self.n_acc_only);
    }
}

/// `Some(true)` when ACC-DAT wins, `Some(false)` for DAT-ACC, `None` on a tie.
pub(crate) fn judge_double_object(
    s: &Sentence,
    judge: Judge<'_>,
    cfg: &ExperimentConfig,
) -> Result<Option<bool>, String> {
    let swapped = swap_cases(s, CaseRole::Dat, CaseRole::Acc).map_err(|e| e.code().to_string())?;
    let dat = s.chunks_with_role(CaseRole::Dat)[0];
    let acc = s.chunks_with_role(CaseRole::Acc)[0];
    let original_acc_first = acc < dat;
    let winner = judge.pick(s, vec![("original".into(), s.clone()), ("swapped".into(), swapped)], cfg)?;
    Ok(winner.map(|w| (w == 0) == original_acc_first))
}

enum Outcome {
    Pair(String, Option<bool>),
    DatOnly(String),
    AccOnly(String),
    Skip(String),
}

fn classify(s: &Sentence, judge: Judge<'_>, cfg: &ExperimentConfig) -> Outcome {
    let Some(verb) = s.verb_lemma.clone() else {
        return Outcome::Skip("NO_VERB".into());
    };
    let n_dat = s.chunks_with_role(CaseRole::Dat).len();
    let n_acc = s.chunks_with_role(CaseRole::Acc).len();
    match (n_dat, n_acc) {
        (0, 0) => Outcome::Skip("NO_OBJECT".into()),
        (_, 0) => Outcome::DatOnly(verb),
        (0, _) => Outcome::AccOnly(verb),
        _ => match judge_double_object(s, judge, cfg) {
            Ok(w) => Outcome::Pair(verb, w),
            Err(code) => Outcome::Skip(code),
        },
    }
}

/// Per-verb tallies, sorted by lemma. Single-object sentences feed the
/// DAT-only / ACC-only counts.
pub fn verb_records(
    corpus: &[Sentence],
    judge: Judge<'_>,
    cfg: &ExperimentConfig,
) -> (Vec<VerbRecord>, BTreeMap<String, u64>) {
    let outcomes = map_ordered(corpus, cfg.workers, |s| classify(s, judge, cfg));
    let mut by_verb: BTreeMap<String, VerbRecord> = BTreeMap::new();
    let mut skips = Skips::default();
    for o in outcomes {
        let (verb, tally): (String, fn(&mut VerbRecord)) = match o {
            Outcome::Skip(code) => {
                skips.add(code);
                continue;
            }
            Outcome::Pair(v, Some(true)) => (v, |r| r.n_acc_dat += 1),
            Outcome::Pair(v, Some(false)) => (v, |r| r.n_dat_acc += 1),
            Outcome::Pair(v, None) => (v, |r| r.n_tie += 1),
            Outcome::DatOnly(v) => (v, |r| r.n_dat_only += 1),
            Outcome::AccOnly(v) => (v, |r| r.n_acc_only += 1),
        };
        tally(by_verb.entry(verb.clone()).or_insert_with(|| VerbRecord::new(&verb)));
    }
    let records = by_verb
        .into_values()
        .map(|mut r| {
            r.finish();
            r
        })
        .collect();
    (records, skips.0)
}

fn records_table(records: &[VerbRecord]) -> Table {
    let mut t = Table::new(&[
        "verb_lemma",
        "n_acc_dat",
        "n_dat_acc",
        "n_tie",
        "r_acc_dat",
        "n_dat_only",
        "n_acc_only",
        "r_dat_only",
    ]);
    for r in records {
        t.push(vec![
            r.verb_lemma.clone().into(),
            r.n_acc_dat.into(),
            r.n_dat_acc.into(),
            r.n_tie.into(),
            r.r_acc_dat.into(),
            r.n_dat_only.into(),
            r.n_acc_only.into(),
            r.r_dat_only.into(),
        ]);
    }
    t
}

pub fn run_double_object(corpus: &[Sentence], judge: Judge<'_>, cfg: &ExperimentConfig) -> ExperimentReport {
    let (records, skipped) = verb_records(corpus, judge, cfg);
    let mut report = ExperimentReport::new("double-object", cfg.echo(), records_table(&records));
    report.skipped = skipped;
    let acc_dat: u64 = records.iter().map(|r| r.n_acc_dat).sum();
    let dat_acc: u64 = records.iter().map(|r| r.n_dat_acc).sum();
    let ties: u64 = records.iter().map(|r| r.n_tie).sum();
    report.summarize("n_acc_dat", acc_dat);
    report.summarize("n_dat_acc", dat_acc);
    report.summarize("n_tie", ties);
    report.summarize("r_acc_dat", rate(acc_dat, dat_acc));
    report.summarize("n_verbs", records.len() as u64);
    report
}

/// Rank-sum comparison of r_acc_dat between two verb groups.
pub fn run_verb_type_test(
    records: &[VerbRecord],
    show_verbs: &[String],
    pass_verbs: &[String],
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, ExperimentError> {
    let mut table = Table::new(&["verb_lemma", "group", "r_acc_dat"]);
    let mut group = |name: &str, verbs: &[String]| -> Result<Vec<f64>, ExperimentError> {
        let mut values = Vec::new();
        for r in records.iter().filter(|r| verbs.contains(&r.verb_lemma)) {
            table.push(vec![r.verb_lemma.clone().into(), name.into(), r.r_acc_dat.into()]);
            values.extend(r.r_acc_dat);
        }
        if values.is_empty() {
            return Err(ExperimentError::EmptyGroup(name.to_string()));
        }
        Ok(values)
    };
    let show = group("show", show_verbs)?;
    let pass = group("pass", pass_verbs)?;
    let mut report = ExperimentReport::new("verb-type", cfg.echo(), table);
    report.summarize("n_show", show.len() as u64);
    report.summarize("n_pass", pass.len() as u64);
    report.tests.push(LabeledTest::new("show_vs_pass", wilcoxon_rank_sum(&show, &pass)));
    Ok(report)
}

/// Correlates the DAT-only rate with the ACC-DAT rate across verbs.
pub fn run_omission_analysis(
    records: &[VerbRecord],
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, ExperimentError> {
    let both: Vec<&VerbRecord> = records
        .iter()
        .filter(|r| r.r_acc_dat.is_some() && r.r_dat_only.is_some())
        .collect();
    if both.len() < 2 {
        return Err(ExperimentError::EmptyEval(format!(
            "{} verbs with both rates defined, need 2",
            both.len()
        )));
    }
    let mut report = ExperimentReport::new("omission", cfg.echo(), records_table(records));
    let xs: Vec<f64> = both.iter().map(|r| r.r_dat_only.expect("filtered")).collect();
    let ys: Vec<f64> = both.iter().map(|r| r.r_acc_dat.expect("filtered")).collect();
    report.summarize("n_verbs", both.len() as u64);
    record_pearson(&mut report, &xs, &ys);
    report.plots.push(Plot {
        name: "omission".into(),
        title: "ACC-DAT rate against DAT-only rate".into(),
        x_label: "R_DAT-only".into(),
        y_label: "R_ACC-DAT".into(),
        points: xs.into_iter().zip(ys).collect(),
        regression: true,
    });
    Ok(report)
}

/// Stores `pearson`, or `pearson_error` with the error code.
pub(crate) fn record_pearson(report: &mut ExperimentReport, xs: &[f64], ys: &[f64]) {
    match pearson(xs, ys) {
        Ok(r) => report.summarize("pearson", Some(r)),
        Err(e) => {
            report.summarize("pearson", None);
            report.summarize("pearson_error", e.code());
        }
    }
}

#[derive(Default)]
struct TypeTally {
    acc_dat: u64,
    dat_acc: u64,
    ties: u64,
}

impl TypeTally {
    fn add(&mut self, w: Option<bool>) {
        match w {
            Some(true) => self.acc_dat += 1,
            Some(false) => self.dat_acc += 1,
            None => self.ties += 1,
        }
    }

    fn n(&self) -> u64 {
        self.acc_dat + self.dat_acc
    }
}

/// Type A has an inanimate DAT, type B an animate one. Per verb the two
/// ACC-DAT rates are compared with a two-proportion z-test; verbs with a
/// significant difference feed a sign test on its direction.
pub fn run_semantic_role_analysis(
    corpus: &[Sentence],
    judge: Judge<'_>,
    cfg: &ExperimentConfig,
) -> ExperimentReport {
    let outcomes = map_ordered(corpus, cfg.workers, |s| -> Result<(String, bool, Option<bool>), String> {
        let verb = s.verb_lemma.clone().ok_or("NO_VERB")?;
        let dats = s.chunks_with_role(CaseRole::Dat);
        let dat = dats.first().ok_or("NO_DAT")?;
        let chunk = &s.chunks[*dat];
        let type_a = match (chunk.has_tag(SemTag::Inanimate), chunk.has_tag(SemTag::Animate)) {
            (true, false) => true,
            (false, true) => false,
            _ => return Err("UNTAGGED_DAT".into()),
        };
        Ok((verb, type_a, judge_double_object(s, judge, cfg)?))
    });
    let mut skips = Skips::default();
    let mut by_verb: BTreeMap<String, (TypeTally, TypeTally)> = BTreeMap::new();
    for o in outcomes {
        match o {
            Ok((verb, type_a, w)) => {
                let entry = by_verb.entry(verb).or_default();
                if type_a { &mut entry.0 } else { &mut entry.1 }.add(w);
            }
            Err(code) => skips.add(code),
        }
    }

    let mut table = Table::new(&[
        "verb_lemma",
        "n_a",
        "r_acc_dat_a",
        "n_b",
        "r_acc_dat_b",
        "n_tie",
        "z",
        "p_value",
        "direction",
    ]);
    let (mut sig_a, mut sig_b, mut all_a, mut all_b) = (0u64, 0u64, 0u64, 0u64);
    for (verb, (a, b)) in &by_verb {
        if a.n() == 0 || b.n() == 0 {
            skips.add("MISSING_TYPE");
            continue;
        }
        let (ra, rb) = (a.acc_dat as f64 / a.n() as f64, b.acc_dat as f64 / b.n() as f64);
        let direction = if ra > rb {
            all_a += 1;
            "A"
        } else if rb > ra {
            all_b += 1;
            "B"
        } else {
            "none"
        };
        let test = two_proportion_z_test(a.acc_dat, a.n(), b.acc_dat, b.n());
        let (z, p) = match &test {
            Ok(t) => (Some(t.statistic), Some(t.p_value)),
            Err(_) => (None, None),
        };
        if p.is_some_and(|p| p < cfg.alpha) {
            match direction {
                "A" => sig_a += 1,
                "B" => sig_b += 1,
                _ => {}
            }
        }
        table.push(vec![
            verb.clone().into(),
            a.n().into(),
            Some(ra).into(),
            b.n().into(),
            Some(rb).into(),
            (a.ties + b.ties).into(),
            z.into(),
            p.into(),
            direction.into(),
        ]);
    }
    let mut report = ExperimentReport::new("semantic-role", cfg.echo(), table);
    report.skipped = skips.0;
    report.summarize("n_significant_type_a", sig_a);
    report.summarize("n_significant_type_b", sig_b);
    report.summarize("n_direction_type_a", all_a);
    report.summarize("n_direction_type_b", all_b);
    report.tests.push(LabeledTest::new("significant_verbs_sign", sign_test(sig_a, sig_b)));
    report
}

/// Per example: ΔNPMI(DAT, ACC | verb) against the binary ACC-DAT preference.
pub fn run_cooccurrence_analysis(
    corpus: &[Sentence],
    judge: Judge<'_>,
    table: &CooccurrenceTable,
    cfg: &ExperimentConfig,
) -> ExperimentReport {
    let outcomes = map_ordered(corpus, cfg.workers, |s| -> Result<(String, f64, bool), String> {
        let verb = s.verb_lemma.as_deref().ok_or("NO_VERB")?;
        let dat = s.chunks_with_role(CaseRole::Dat);
        let acc = s.chunks_with_role(CaseRole::Acc);
        if dat.len() != 1 || acc.len() != 1 {
            return Err("NO_DOUBLE_OBJECT".into());
        }
        let delta = delta_npmi(
            table,
            &s.chunks[dat[0]].content_surface(),
            &s.chunks[acc[0]].content_surface(),
            verb,
        )
        .map_err(|e| e.code().to_string())?;
        let pref = judge_double_object(s, judge, cfg)?.ok_or("TIE")?;
        Ok((s.id.clone(), delta, pref))
    });
    let mut skips = Skips::default();
    let mut records = Table::new(&["id", "delta_npmi", "acc_dat_preferred"]);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for o in outcomes {
        match o {
            Ok((id, delta, pref)) => {
                records.push(vec![id.into(), Some(delta).into(), u64::from(pref).into()]);
                xs.push(delta);
                ys.push(if pref { 1.0 } else { 0.0 });
            }
            Err(code) => skips.add(code),
        }
    }
    let mut report = ExperimentReport::new("cooccurrence", cfg.echo(), records);
    report.skipped = skips.0;
    report.summarize("n_examples", xs.len() as u64);
    record_pearson(&mut report, &xs, &ys);
    report.plots.push(Plot {
        name: "cooccurrence".into(),
        title: "ACC-DAT preference against ΔNPMI".into(),
        x_label: "ΔNPMI".into(),
        y_label: "ACC-DAT rate".into(),
        points: xs.into_iter().zip(ys).collect(),
        regression: true,
    });
    report
}
