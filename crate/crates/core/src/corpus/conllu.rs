use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{AdverbType, CaseRole, Chunk, CorpusError, SemTag, Sentence, Token};

/// Imports 10-column CoNLL-U. Chunk membership and annotations travel in the
/// MISC column: `Chunk=<int>|Role=<role>|Sem=<tag,...>`, optionally with
/// `Particle=<surface>` and `AdverbType=<type>`. Tokens tagged `ADP` count as
/// standalone particles when no explicit `Particle` item is given.
pub fn import_conllu(path: impl AsRef<Path>) -> Result<Vec<Sentence>, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_conllu(BufReader::new(file))
}

struct Row {
    line: usize,
    id: usize,
    head: usize,
    chunk: i64,
    role: Option<CaseRole>,
    adverb_type: Option<AdverbType>,
    token: Token,
}

#[derive(Default)]
struct Block {
    first_line: usize,
    sent_id: Option<String>,
    verb_lemma: Option<String>,
    rows: Vec<Row>,
}

pub fn read_conllu<R: BufRead>(reader: R) -> Result<Vec<Sentence>, CorpusError> {
    let mut out = Vec::new();
    let mut block = Block::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| parse_err(line_no, e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !block.rows.is_empty() {
                out.push(build(std::mem::take(&mut block), out.len())?);
            }
            block = Block::default();
            continue;
        }
        if block.first_line == 0 {
            block.first_line = line_no;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                match key.trim() {
                    "sent_id" => block.sent_id = Some(value.trim().to_string()),
                    "verb_lemma" => block.verb_lemma = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }
        if let Some(row) = parse_row(line_no, line)? {
            block.rows.push(row);
        }
    }
    if !block.rows.is_empty() {
        out.push(build(block, out.len())?);
    }
    Ok(out)
}

fn parse_err(line: usize, reason: impl Into<String>) -> CorpusError {
    CorpusError::Parse {
        line,
        reason: reason.into(),
    }
}

fn parse_row(line_no: usize, line: &str) -> Result<Option<Row>, CorpusError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(parse_err(
            line_no,
            format!("expected 10 tab-separated columns, found {}", cols.len()),
        ));
    }
    // multiword ranges and empty nodes carry no chunk structure
    if cols[0].contains('-') || cols[0].contains('.') {
        return Ok(None);
    }
    let id: usize = cols[0]
        .parse()
        .map_err(|_| parse_err(line_no, format!("bad token id `{}`", cols[0])))?;
    let head: usize = cols[6]
        .parse()
        .map_err(|_| parse_err(line_no, format!("bad head `{}`", cols[6])))?;

    let mut chunk = None;
    let mut role = None;
    let mut adverb_type = None;
    let mut particle = None;
    let mut tags = BTreeSet::new();
    if cols[9] != "_" {
        for item in cols[9].split('|') {
            let Some((key, value)) = item.split_once('=') else {
                continue;
            };
            match key {
                "Chunk" => {
                    chunk = Some(value.parse::<i64>().map_err(|_| {
                        parse_err(line_no, format!("bad Chunk value `{value}`"))
                    })?)
                }
                "Role" => role = Some(value.parse().map_err(|e| parse_err(line_no, e))?),
                "AdverbType" => {
                    adverb_type = Some(value.parse().map_err(|e| parse_err(line_no, e))?)
                }
                "Particle" => particle = Some(value.to_string()),
                "Sem" => {
                    for tag in value.split(',').filter(|t| !t.is_empty()) {
                        tags.insert(tag.parse::<SemTag>().map_err(|e| parse_err(line_no, e))?);
                    }
                }
                _ => {}
            }
        }
    }
    let chunk = chunk.ok_or_else(|| parse_err(line_no, "token has no Chunk item in MISC"))?;
    let pos = cols[3].to_string();
    if particle.is_none() && pos == "ADP" {
        particle = Some(cols[1].to_string());
    }
    Ok(Some(Row {
        line: line_no,
        id,
        head,
        chunk,
        role,
        adverb_type,
        token: Token {
            surface: cols[1].to_string(),
            pos,
            particle,
            semantic_tags: tags,
        },
    }))
}

fn build(block: Block, index: usize) -> Result<Sentence, CorpusError> {
    // chunk ordinal per distinct Chunk value, in order of first appearance
    let mut ordinal: HashMap<i64, usize> = HashMap::new();
    let mut chunk_of_row = Vec::with_capacity(block.rows.len());
    let mut prev: Option<i64> = None;
    for row in &block.rows {
        if prev != Some(row.chunk) {
            if ordinal.contains_key(&row.chunk) {
                return Err(parse_err(
                    row.line,
                    format!("tokens of chunk {} are not contiguous", row.chunk),
                ));
            }
            let next = ordinal.len();
            ordinal.insert(row.chunk, next);
            prev = Some(row.chunk);
        }
        chunk_of_row.push(ordinal[&row.chunk]);
    }
    let token_chunk: HashMap<usize, usize> = block
        .rows
        .iter()
        .zip(&chunk_of_row)
        .map(|(r, &c)| (r.id, c))
        .collect();

    let mut chunks: Vec<Chunk> = (0..ordinal.len())
        .map(|_| Chunk::new(Vec::new(), None, CaseRole::Other))
        .collect();
    let mut role_set = vec![false; chunks.len()];
    for (row, &c) in block.rows.iter().zip(&chunk_of_row) {
        let chunk = &mut chunks[c];
        if let (Some(role), false) = (row.role, role_set[c]) {
            chunk.role = role;
            role_set[c] = true;
        }
        if row.adverb_type.is_some() {
            chunk.adverb_type = row.adverb_type;
        }
        // the last token whose head leaves the chunk decides the chunk head
        if row.head != 0 {
            let target = *token_chunk.get(&row.head).ok_or_else(|| {
                parse_err(row.line, format!("head {} is not a token id", row.head))
            })?;
            if target != c {
                chunk.head = Some(target);
            }
        }
        chunk.tokens.push(row.token.clone());
    }

    let sentence = Sentence {
        id: block
            .sent_id
            .unwrap_or_else(|| format!("conllu-{}", index + 1)),
        verb_lemma: block.verb_lemma,
        chunks,
    };
    sentence
        .validate()
        .map_err(|violation| CorpusError::Invariant {
            line: block.first_line,
            id: sentence.id.clone(),
            violation,
        })?;
    Ok(sentence)
}
