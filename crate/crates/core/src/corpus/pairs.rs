use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Invariant, Sentence};

/// One annotator's judgement of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Vote {
    Prefer1,
    Prefer2,
    Broken,
}

/// Majority label of a pair that passed the agreement filter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Label {
    Prefer1,
    Prefer2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreferencePair {
    pub id: String,
    pub order1: Sentence,
    pub order2: Sentence,
    pub worker_labels: Vec<Vote>,
    pub gold: Option<Label>,
}

#[derive(Deserialize)]
struct PairRecord {
    id: String,
    order1: Sentence,
    order2: Sentence,
    labels: Vec<Vote>,
}

/// Gold label rule: no BROKEN vote and at least ceil(0.9 n) votes agreeing.
pub fn gold_label(votes: &[Vote]) -> Option<Label> {
    if votes.is_empty() || votes.contains(&Vote::Broken) {
        return None;
    }
    let n = votes.len();
    let needed = (9 * n).div_ceil(10);
    let ones = votes.iter().filter(|v| **v == Vote::Prefer1).count();
    let twos = n - ones;
    if ones >= needed {
        Some(Label::Prefer1)
    } else if twos >= needed {
        Some(Label::Prefer2)
    } else {
        None
    }
}

impl PreferencePair {
    pub fn new(id: impl Into<String>, order1: Sentence, order2: Sentence, votes: Vec<Vote>) -> Self {
        PreferencePair {
            id: id.into(),
            order1,
            order2,
            gold: gold_label(&votes),
            worker_labels: votes,
        }
    }

    fn same_chunks(&self) -> bool {
        let mut a = self.order1.chunk_surfaces();
        let mut b = self.order2.chunk_surfaces();
        a.sort();
        b.sort();
        a == b
    }
}

pub fn load_preference_pairs(path: impl AsRef<Path>) -> Result<Vec<PreferencePair>, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_preference_pairs(BufReader::new(file))
}

pub fn read_preference_pairs<R: BufRead>(reader: R) -> Result<Vec<PreferencePair>, CorpusError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CorpusError::Parse {
            line: line_no,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PairRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: line_no,
            reason: e.to_string(),
        })?;
        for s in [&rec.order1, &rec.order2] {
            s.validate().map_err(|violation| CorpusError::Invariant {
                line: line_no,
                id: s.id.clone(),
                violation,
            })?;
        }
        let pair = PreferencePair::new(rec.id, rec.order1, rec.order2, rec.labels);
        if !pair.same_chunks() {
            return Err(CorpusError::Invariant {
                line: line_no,
                id: pair.id,
                violation: Invariant::PairChunkMismatch,
            });
        }
        out.push(pair);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::example_2a;

    fn votes(p1: usize, p2: usize, broken: usize) -> Vec<Vote> {
        let mut v = vec![Vote::Prefer1; p1];
        v.extend(vec![Vote::Prefer2; p2]);
        v.extend(vec![Vote::Broken; broken]);
        v
    }

    #[test]
    fn gold_rule() {
        assert_eq!(gold_label(&votes(9, 1, 0)), Some(Label::Prefer1));
        assert_eq!(gold_label(&votes(0, 10, 0)), Some(Label::Prefer2));
        assert_eq!(gold_label(&votes(9, 0, 1)), None);
        assert_eq!(gold_label(&votes(8, 2, 0)), None);
        assert_eq!(gold_label(&[]), None);
        // ceil(0.9 * 5) = 5
        assert_eq!(gold_label(&votes(4, 1, 0)), None);
        assert_eq!(gold_label(&votes(5, 0, 0)), Some(Label::Prefer1));
    }

    fn pair_line(id: &str, o1: &Sentence, o2: &Sentence, labels: &[&str]) -> String {
        serde_json::json!({
            "id": id,
            "order1": o1,
            "order2": o2,
            "labels": labels,
        })
        .to_string()
    }

    #[test]
    fn loads_pairs_and_keeps_ungolded_ones() {
        let a = example_2a();
        let mut b = a.clone();
        b.chunks.swap(0, 2);
        let l1 = pair_line("p1", &a, &b, &["PREFER1"; 9].iter().chain(&["PREFER2"]).copied().collect::<Vec<_>>());
        let l2 = pair_line("p2", &a, &b, &["PREFER1", "BROKEN"]);
        let pairs = read_preference_pairs(format!("{l1}\n{l2}\n").as_bytes()).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].gold, Some(Label::Prefer1));
        assert_eq!(pairs[1].gold, None);
        assert_eq!(pairs[1].worker_labels, vec![Vote::Prefer1, Vote::Broken]);
    }

    #[test]
    fn malformed_pair_line_is_reported() {
        let a = example_2a();
        let good = pair_line("p1", &a, &a, &["PREFER1"]);
        let input = format!("{good}\n{{\"id\": 3}}\n");
        assert!(matches!(
            read_preference_pairs(input.as_bytes()),
            Err(CorpusError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn mismatched_chunks_are_rejected() {
        let a = example_2a();
        let mut b = a.clone();
        b.chunks[0].tokens[0].surface = "校長".into();
        let line = pair_line("bad", &a, &b, &["PREFER1"]);
        assert!(matches!(
            read_preference_pairs(line.as_bytes()),
            Err(CorpusError::Invariant {
                violation: Invariant::PairChunkMismatch,
                ..
            })
        ));
    }
}
