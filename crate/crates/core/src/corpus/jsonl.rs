use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{CorpusError, Sentence};

/// Loads one sentence per line. Blank lines are ignored.
pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Vec<Sentence>, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_jsonl(BufReader::new(file))
}

pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<Sentence>, CorpusError> {
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
        let sentence: Sentence = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: line_no,
            reason: e.to_string(),
        })?;
        sentence
            .validate()
            .map_err(|violation| CorpusError::Invariant {
                line: line_no,
                id: sentence.id.clone(),
                violation,
            })?;
        out.push(sentence);
    }
    Ok(out)
}

pub fn write_jsonl<W: Write>(mut writer: W, sentences: &[Sentence]) -> std::io::Result<()> {
    for s in sentences {
        serde_json::to_writer(&mut writer, s)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}
