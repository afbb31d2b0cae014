//! Word-order analyses at the predicate: case precedence, adverb position and
//! long-before-short.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{rate, ExperimentConfig, ExperimentReport, Judge, LabeledTest, Skips, Table};
use crate::corpus::{AdverbType, CaseRole, Sentence};
use crate::par::map_ordered;
use crate::scoring::Winner;
use crate::stats::{rank_correlation, sign_test};
use crate::transform::{apply_order, enumerate_orders, order_with_children};

/// Pairwise precedence counts; `o(a, b)` is the share of sentences with both
/// roles in which `a` comes first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PrecedenceMatrix {
    pub cases: Vec<CaseRole>,
    counts: BTreeMap<(CaseRole, CaseRole), u64>,
}

impl PrecedenceMatrix {
    pub fn new(cases: &[CaseRole]) -> Self {
        PrecedenceMatrix {
            cases: cases.to_vec(),
            counts: BTreeMap::new(),
        }
    }

    /// Tallies every ordered pair of tracked roles by linear position.
    pub fn observe(&mut self, s: &Sentence) {
        let first: Vec<(CaseRole, usize)> = self
            .cases
            .iter()
            .filter_map(|&r| s.chunks_with_role(r).first().map(|&i| (r, i)))
            .collect();
        for (&(a, ia), &(b, ib)) in first.iter().tuple_combinations() {
            let key = if ia < ib { (a, b) } else { (b, a) };
            *self.counts.entry(key).or_default() += 1;
        }
    }

    pub fn count(&self, a: CaseRole, b: CaseRole) -> u64 {
        self.counts.get(&(a, b)).copied().unwrap_or(0)
    }

    pub fn o(&self, a: CaseRole, b: CaseRole) -> Option<f64> {
        rate(self.count(a, b), self.count(b, a))
    }
}

/// The root, provided at least two target roles hang off it, each once.
fn root_targets(s: &Sentence, roles: &[CaseRole]) -> Result<usize, String> {
    let root = s.root();
    let children = s.children(root);
    let mut present = 0;
    for &r in roles {
        match children.iter().filter(|&&c| s.chunks[c].role == r).count() {
            0 => {}
            1 => present += 1,
            _ => return Err("ROLE_NOT_UNIQUE".into()),
        }
    }
    if present < 2 {
        return Err("TOO_FEW_ROLES".into());
    }
    Ok(root)
}

/// Precedence of TIM/LOC/NOM (by default) in the preferred order of each
/// sentence's predicate dependents, with the observed-order baseline.
pub fn run_case_order(corpus: &[Sentence], judge: Judge<'_>, cfg: &ExperimentConfig) -> ExperimentReport {
    let roles = &cfg.case_order_roles;
    let outcomes = map_ordered(corpus, cfg.workers, |s| -> Result<(Sentence, Option<Sentence>), String> {
        let root = root_targets(s, roles)?;
        let set = enumerate_orders(s, root, cfg.order_cap).map_err(|e| e.code().to_string())?;
        let winner = match judge.decide(&set, cfg.tie_epsilon).map_err(|e| e.code().to_string())? {
            Winner::Tie => None,
            Winner::Label(l) => Some(set.get(&l).expect("label from set").sentence.clone()),
        };
        Ok((s.clone(), winner))
    });
    let mut skips = Skips::default();
    let mut lm = PrecedenceMatrix::new(roles);
    let mut count = PrecedenceMatrix::new(roles);
    let mut ties = 0u64;
    for o in outcomes {
        match o {
            Ok((original, winner)) => {
                count.observe(&original);
                match winner {
                    Some(w) => lm.observe(&w),
                    None => ties += 1,
                }
            }
            Err(code) => skips.add(code),
        }
    }

    let mut table = Table::new(&["a", "b", "n_a_first", "n_b_first", "o", "count_n_a_first", "count_n_b_first", "count_o"]);
    for (&a, &b) in roles.iter().tuple_combinations().flat_map(|(a, b)| [(a, b), (b, a)]) {
        table.push(vec![
            a.as_str().into(),
            b.as_str().into(),
            lm.count(a, b).into(),
            lm.count(b, a).into(),
            lm.o(a, b).into(),
            count.count(a, b).into(),
            count.count(b, a).into(),
            count.o(a, b).into(),
        ]);
    }
    let mut report = ExperimentReport::new("case-order", cfg.echo(), table);
    report.skipped = skips.0;
    report.summarize("n_tie", ties);
    for (&a, &b) in roles.iter().tuple_combinations() {
        let (a, b) = match (cfg.canonical_rank(a), cfg.canonical_rank(b)) {
            (Some(x), Some(y)) if y < x => (b, a),
            _ => (a, b),
        };
        let label = format!("{}<{}", a.as_str(), b.as_str());
        report.summarize(&format!("o({label})"), lm.o(a, b));
        report.summarize(&format!("count_o({label})"), count.o(a, b));
        report.tests.push(LabeledTest::new(label, sign_test(lm.count(a, b), lm.count(b, a))));
    }
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AdverbPosition {
    Asov,
    Saov,
    Soav,
}

impl AdverbPosition {
    pub const ALL: [AdverbPosition; 3] = [AdverbPosition::Asov, AdverbPosition::Saov, AdverbPosition::Soav];

    pub fn as_str(self) -> &'static str {
        match self {
            AdverbPosition::Asov => "ASOV",
            AdverbPosition::Saov => "SAOV",
            AdverbPosition::Soav => "SOAV",
        }
    }

    /// Adverb, subject and object in this position's order.
    fn arrange(self, a: usize, s: usize, o: usize) -> [usize; 3] {
        match self {
            AdverbPosition::Asov => [a, s, o],
            AdverbPosition::Saov => [s, a, o],
            AdverbPosition::Soav => [s, o, a],
        }
    }
}

fn unique_child(children: &[usize], pred: impl Fn(usize) -> bool) -> Option<usize> {
    children.iter().copied().filter(|&c| pred(c)).exactly_one().ok()
}

fn adverb_variants(s: &Sentence) -> Result<(AdverbType, Vec<(String, Sentence)>), String> {
    let root = s.root();
    let children = s.children(root);
    let adverb = unique_child(&children, |c| s.chunks[c].adverb_type.is_some()).ok_or("NO_UNIQUE_ADVERB")?;
    let subj = unique_child(&children, |c| s.chunks[c].role == CaseRole::Nom).ok_or("NO_UNIQUE_SUBJECT")?;
    let obj = unique_child(&children, |c| s.chunks[c].role == CaseRole::Acc).ok_or("NO_UNIQUE_OBJECT")?;
    let kind = s.chunks[adverb].adverb_type.expect("filtered");
    let slots: Vec<usize> = children.iter().copied().filter(|c| [adverb, subj, obj].contains(c)).collect();
    let variants = AdverbPosition::ALL
        .iter()
        .map(|pos| {
            let mut placed = pos.arrange(adverb, subj, obj).into_iter();
            let arrangement: Vec<usize> = children
                .iter()
                .map(|c| if slots.contains(c) { placed.next().expect("three slots") } else { *c })
                .collect();
            (pos.as_str().to_string(), apply_order(s, &order_with_children(s, &children, &arrangement)))
        })
        .collect();
    Ok((kind, variants))
}

/// "ASOV>SAOV=SOAV"-style ordering by win count.
fn ranking(wins: &[u64; 3]) -> String {
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(wins[i]));
    let mut out = AdverbPosition::ALL[order[0]].as_str().to_string();
    for w in order.windows(2) {
        out.push(if wins[w[0]] == wins[w[1]] { '=' } else { '>' });
        out.push_str(AdverbPosition::ALL[w[1]].as_str());
    }
    out
}

/// For each adverb type, counts how often each of ASOV/SAOV/SOAV is the
/// preferred placement and rank-correlates the counts with the reference
/// canonical positions.
pub fn run_adverb_position(corpus: &[Sentence], judge: Judge<'_>, cfg: &ExperimentConfig) -> ExperimentReport {
    let outcomes = map_ordered(corpus, cfg.workers, |s| -> Result<(AdverbType, Option<usize>), String> {
        let (kind, variants) = adverb_variants(s)?;
        Ok((kind, judge.pick(s, variants, cfg)?))
    });
    let mut skips = Skips::default();
    let mut wins: BTreeMap<AdverbType, ([u64; 3], u64)> = BTreeMap::new();
    for o in outcomes {
        match o {
            Ok((kind, w)) => {
                let entry = wins.entry(kind).or_default();
                match w {
                    Some(i) => entry.0[i] += 1,
                    None => entry.1 += 1,
                }
            }
            Err(code) => skips.add(code),
        }
    }
    let mut table = Table::new(&["adverb_type", "wins_asov", "wins_saov", "wins_soav", "n_tie", "ranking", "reference", "correlation"]);
    let mut report_corr = Vec::new();
    for (kind, (w, ties)) in &wins {
        let reference = cfg.adverb_reference.get(kind).cloned().unwrap_or_default();
        let ref_vec: Vec<f64> = AdverbPosition::ALL
            .iter()
            .map(|p| if reference.contains(p) { 1.0 } else { 0.0 })
            .collect();
        let win_vec: Vec<f64> = w.iter().map(|&x| x as f64).collect();
        let corr = rank_correlation(&win_vec, &ref_vec).ok();
        let ranking = if w.iter().all(|&x| x == 0) { "NA".to_string() } else { ranking(w) };
        table.push(vec![
            kind.as_str().into(),
            w[0].into(),
            w[1].into(),
            w[2].into(),
            (*ties).into(),
            ranking.into(),
            reference.iter().map(|p| p.as_str()).join(",").into(),
            corr.into(),
        ]);
        report_corr.push((*kind, corr));
    }
    let mut report = ExperimentReport::new("adverb-position", cfg.echo(), table);
    report.skipped = skips.0;
    for (kind, corr) in report_corr {
        report.summarize(&format!("correlation({})", kind.as_str()), corr);
    }
    report
}

/// Linear orders of the root dependents with canonical-role dependents
/// permuted among their own slots; other dependents stay put.
struct Arrangements {
    children: Vec<usize>,
    movable: Vec<usize>,
}

impl Arrangements {
    fn order(&self, s: &Sentence, perm: &[usize]) -> Vec<usize> {
        let mut placed = perm.iter().copied();
        let arrangement: Vec<usize> = self
            .children
            .iter()
            .map(|c| if self.movable.contains(c) { placed.next().expect("same length") } else { *c })
            .collect();
        order_with_children(s, &self.children, &arrangement)
    }
}

fn position_of(order: &[usize], chunk: usize) -> usize {
    order.iter().position(|&o| o == chunk).expect("chunk present")
}

/// `Some(true)` when the longest constituent sits earlier in the preferred
/// order than in the canonical one.
fn long_before_short(s: &Sentence, judge: Judge<'_>, cfg: &ExperimentConfig) -> Result<bool, String> {
    let root = s.root();
    let children = s.children(root);
    let movable: Vec<usize> = children
        .iter()
        .copied()
        .filter(|&c| cfg.canonical_rank(s.chunks[c].role).is_some())
        .collect();
    if movable.len() < 2 {
        return Err("TOO_FEW_ROLES".into());
    }
    let sizes: Vec<usize> = movable.iter().map(|&c| s.subtree(c).len()).collect();
    let max = *sizes.iter().max().expect("nonempty");
    let longest = match sizes.iter().positions(|&n| n == max).exactly_one() {
        Ok(i) => movable[i],
        Err(_) => return Err("NO_UNIQUE_LONGEST".into()),
    };
    let k = movable.len();
    if (1..=k).try_fold(1usize, |acc, i| acc.checked_mul(i).filter(|&v| v <= cfg.order_cap)).is_none() {
        return Err("TOO_MANY_ORDERS".into());
    }
    let arr = Arrangements { children, movable };
    let canonical: Vec<usize> = arr
        .movable
        .iter()
        .copied()
        .sorted_by_key(|&c| cfg.canonical_rank(s.chunks[c].role))
        .collect();
    let canonical_pos = position_of(&arr.order(s, &canonical), longest);

    let orders: Vec<Vec<usize>> = arr
        .movable
        .iter()
        .copied()
        .permutations(k)
        .map(|perm| arr.order(s, &perm))
        .collect();
    let candidates = orders
        .iter()
        .enumerate()
        .map(|(i, o)| ((i + 1).to_string(), apply_order(s, o)))
        .collect();
    let best = judge.pick(s, candidates, cfg)?.ok_or("TIE")?;
    let best_pos = position_of(&orders[best], longest);
    match best_pos.cmp(&canonical_pos) {
        std::cmp::Ordering::Less => Ok(true),
        std::cmp::Ordering::Greater => Ok(false),
        std::cmp::Ordering::Equal => Err("UNCHANGED".into()),
    }
}

pub fn run_long_before_short(corpus: &[Sentence], judge: Judge<'_>, cfg: &ExperimentConfig) -> ExperimentReport {
    let outcomes = map_ordered(corpus, cfg.workers, |s| long_before_short(s, judge, cfg));
    let mut skips = Skips::default();
    let (mut long_first, mut short_first) = (0u64, 0u64);
    let mut table = Table::new(&["id", "direction"]);
    for (s, o) in corpus.iter().zip(outcomes) {
        match o {
            Ok(true) => {
                long_first += 1;
                table.push(vec![s.id.clone().into(), "long_before_short".into()]);
            }
            Ok(false) => {
                short_first += 1;
                table.push(vec![s.id.clone().into(), "short_before_long".into()]);
            }
            Err(code) => skips.add(code),
        }
    }
    let mut report = ExperimentReport::new("long-before-short", cfg.echo(), table);
    report.skipped = skips.0;
    report.summarize("n_long_before_short", long_first);
    report.summarize("n_short_before_long", short_first);
    report.tests.push(LabeledTest::new("long_vs_short", sign_test(long_first, short_first)));
    report
}
