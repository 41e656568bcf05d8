//! Shared-task context datasets (tab-separated, one context per row) and
//! token normalization.
//!
//! The required columns are `context_id`, `word`, `gold_sense_id`,
//! `predicted_sense_id`, `positions` and `context`, in any order. Any other
//! column is carried through verbatim.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const REQUIRED_COLUMNS: [&str; 6] = [
    "context_id",
    "word",
    "gold_sense_id",
    "predicted_sense_id",
    "positions",
    "context",
];

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("dataset is empty (no header row)")]
    MissingHeader,
    #[error("header lacks required column {0:?}")]
    MissingColumn(&'static str),
    #[error("header repeats column {0:?}")]
    DuplicateColumn(String),
    #[error("row {row}: expected {expected} fields, found {found}")]
    FieldCount {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: duplicate context_id {id:?}")]
    DuplicateContextId { row: usize, id: String },
    #[error("context {0:?} has no predicted sense")]
    MissingPrediction(String),
}

/// One context utterance of an ambiguous query word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextRecord {
    pub context_id: String,
    pub query_word: String,
    pub gold_sense_id: Option<String>,
    pub predicted_sense_id: Option<String>,
    /// Raw `positions` cell, e.g. `"12-15,40-43"`.
    pub positions: String,
    /// Raw `context` cell.
    pub context: String,
    /// Whitespace tokens of `context`.
    pub tokens: Vec<String>,
    /// Values of the non-required columns, in header order.
    pub extra: Vec<String>,
}

impl ContextRecord {
    pub fn new(
        context_id: impl Into<String>,
        query_word: impl Into<String>,
        context: impl Into<String>,
    ) -> Self {
        let context = context.into();
        ContextRecord {
            context_id: context_id.into(),
            query_word: query_word.into(),
            gold_sense_id: None,
            predicted_sense_id: None,
            positions: String::new(),
            tokens: tokenize(&context),
            context,
            extra: Vec::new(),
        }
    }

    pub fn with_gold(mut self, sense: impl Into<String>) -> Self {
        self.gold_sense_id = Some(sense.into());
        self
    }
}

/// A parsed dataset: the header in file order plus its rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub header: Vec<String>,
    pub records: Vec<ContextRecord>,
}

impl Default for Dataset {
    fn default() -> Self {
        Dataset::new(Vec::new())
    }
}

impl Dataset {
    /// A dataset with the six required columns and no extras.
    pub fn new(records: Vec<ContextRecord>) -> Self {
        Dataset {
            header: REQUIRED_COLUMNS.iter().map(|c| c.to_string()).collect(),
            records,
        }
    }

    /// Distinct query words in order of first appearance.
    pub fn query_words(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        self.records
            .iter()
            .map(|r| r.query_word.as_str())
            .filter(|w| seen.insert(*w))
            .collect()
    }

    fn extra_columns(&self) -> impl Iterator<Item = &String> {
        self.header
            .iter()
            .filter(|h| !REQUIRED_COLUMNS.contains(&h.as_str()))
    }
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_owned).collect()
}

fn none_if_empty(s: &str) -> Option<String> {
    (!s.is_empty()).then(|| s.to_owned())
}

/// Parses a dataset from a reader. Row numbers in errors are 1-based file
/// lines (the header is line 1).
pub fn parse_dataset<R: BufRead>(reader: R) -> Result<Dataset, CorpusError> {
    let io = |source| CorpusError::Io {
        path: PathBuf::from("<stream>"),
        source,
    };
    let mut lines = reader.lines();
    let header_line = lines.next().ok_or(CorpusError::MissingHeader)?.map_err(io)?;
    let header: Vec<String> = trim_cr(&header_line)
        .split('\t')
        .map(str::to_owned)
        .collect();
    for (i, h) in header.iter().enumerate() {
        if header[..i].contains(h) {
            return Err(CorpusError::DuplicateColumn(h.clone()));
        }
    }
    let mut col = [0usize; 6];
    for (slot, name) in col.iter_mut().zip(REQUIRED_COLUMNS) {
        *slot = header
            .iter()
            .position(|h| h == name)
            .ok_or(CorpusError::MissingColumn(name))?;
    }
    let [c_id, c_word, c_gold, c_pred, c_pos, c_ctx] = col;
    let extra_idx: Vec<usize> = (0..header.len()).filter(|i| !col.contains(i)).collect();

    let mut records = Vec::new();
    let mut ids = std::collections::HashSet::new();
    for (i, line) in lines.enumerate() {
        let row = i + 2;
        let line = line.map_err(io)?;
        let line = trim_cr(&line);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != header.len() {
            return Err(CorpusError::FieldCount {
                row,
                expected: header.len(),
                found: fields.len(),
            });
        }
        let context_id = fields[c_id].to_owned();
        if !ids.insert(context_id.clone()) {
            return Err(CorpusError::DuplicateContextId {
                row,
                id: context_id,
            });
        }
        records.push(ContextRecord {
            context_id,
            query_word: fields[c_word].to_owned(),
            gold_sense_id: none_if_empty(fields[c_gold]),
            predicted_sense_id: none_if_empty(fields[c_pred]),
            positions: fields[c_pos].to_owned(),
            context: fields[c_ctx].to_owned(),
            tokens: tokenize(fields[c_ctx]),
            extra: extra_idx.iter().map(|&j| fields[j].to_owned()).collect(),
        });
    }
    Ok(Dataset { header, records })
}

fn trim_cr(line: &str) -> &str {
    line.strip_suffix('\r').unwrap_or(line)
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_dataset(BufReader::new(file)).map_err(|e| match e {
        CorpusError::Io { source, .. } => CorpusError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

/// Serializes the dataset in its own column order. Absent sense ids are
/// written as empty cells.
pub fn write_dataset_to<W: Write>(dataset: &Dataset, mut w: W) -> std::io::Result<()> {
    let extra_pos: Vec<&String> = dataset.extra_columns().collect();
    writeln!(w, "{}", dataset.header.join("\t"))?;
    for r in &dataset.records {
        let cells: Vec<&str> = dataset
            .header
            .iter()
            .map(|h| match h.as_str() {
                "context_id" => r.context_id.as_str(),
                "word" => r.query_word.as_str(),
                "gold_sense_id" => r.gold_sense_id.as_deref().unwrap_or(""),
                "predicted_sense_id" => r.predicted_sense_id.as_deref().unwrap_or(""),
                "positions" => r.positions.as_str(),
                "context" => r.context.as_str(),
                other => {
                    let j = extra_pos.iter().position(|e| *e == other).expect("extra column");
                    r.extra.get(j).map(String::as_str).unwrap_or("")
                }
            })
            .collect();
        writeln!(w, "{}", cells.join("\t"))?;
    }
    w.flush()
}

pub fn write_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let io = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    write_dataset_to(dataset, BufWriter::new(file)).map_err(io)
}

/// Like [`write_dataset`], but every record must carry a prediction.
pub fn write_predictions(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    if let Some(r) = dataset.records.iter().find(|r| r.predicted_sense_id.is_none()) {
        return Err(CorpusError::MissingPrediction(r.context_id.clone()));
    }
    write_dataset(dataset, path)
}

/// How context tokens are reconciled with the model's vocabulary spelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenMode {
    #[default]
    AsIs,
    Lowercase,
    StripTags,
    AttachDefaultTag,
}

impl FromStr for TokenMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "as-is" => Ok(TokenMode::AsIs),
            "lowercase" => Ok(TokenMode::Lowercase),
            "strip-tags" => Ok(TokenMode::StripTags),
            "attach-default-tag" => Ok(TokenMode::AttachDefaultTag),
            other => Err(format!(
                "unknown token mode {other:?} (expected as-is, lowercase, strip-tags or attach-default-tag)"
            )),
        }
    }
}

pub const DEFAULT_TAG: &str = "X";

/// Splits `lemma_TAG` into its parts. A suffix counts as a tag when it is a
/// non-empty run of ASCII alphanumerics and the lemma before it is non-empty.
pub fn split_tag(token: &str) -> (&str, Option<&str>) {
    match token.rfind('_') {
        Some(i) if i > 0 => {
            let tag = &token[i + 1..];
            if !tag.is_empty() && tag.bytes().all(|b| b.is_ascii_alphanumeric()) {
                (&token[..i], Some(tag))
            } else {
                (token, None)
            }
        }
        _ => (token, None),
    }
}

pub fn lemma(token: &str) -> &str {
    split_tag(token).0
}

pub fn normalize_token(token: &str, mode: TokenMode) -> String {
    match mode {
        TokenMode::AsIs => token.to_owned(),
        TokenMode::Lowercase => token.to_lowercase(),
        TokenMode::StripTags => lemma(token).to_owned(),
        TokenMode::AttachDefaultTag => match split_tag(token) {
            (_, Some(_)) => token.to_owned(),
            (_, None) => format!("{token}_{DEFAULT_TAG}"),
        },
    }
}

pub fn normalize_tokens<S: AsRef<str>>(tokens: &[S], mode: TokenMode) -> Vec<String> {
    tokens
        .iter()
        .map(|t| normalize_token(t.as_ref(), mode))
        .collect()
}

/// Parses a positions cell (`"a-b,c-d"`, character offsets, end exclusive).
/// Unparseable pieces are ignored.
pub fn parse_positions(cell: &str) -> Vec<Range<usize>> {
    cell.split(',')
        .filter_map(|piece| {
            let (a, b) = piece.trim().split_once('-')?;
            let (a, b) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
            (a < b).then_some(a..b)
        })
        .collect()
}

/// Character spans of the whitespace tokens of `text`.
fn token_spans(text: &str) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    let mut start = None;
    for (ci, ch) in text.chars().enumerate() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                spans.push(s..ci);
                start = None;
            }
            (false, None) => start = Some(ci),
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push(s..text.chars().count());
    }
    spans
}

/// Tokens of the record with the query word removed.
///
/// Tokens are matched on their lemma (tags ignored on both sides). When no
/// token matches and the record carries positions, tokens overlapping those
/// character spans are dropped instead.
pub fn remove_query_word(record: &ContextRecord) -> Vec<String> {
    let query = lemma(&record.query_word);
    if record.tokens.iter().any(|t| lemma(t) == query) {
        return record
            .tokens
            .iter()
            .filter(|t| lemma(t) != query)
            .cloned()
            .collect();
    }
    let positions = parse_positions(&record.positions);
    if positions.is_empty() {
        return record.tokens.clone();
    }
    let spans = token_spans(&record.context);
    if spans.len() != record.tokens.len() {
        return record.tokens.clone();
    }
    record
        .tokens
        .iter()
        .zip(spans)
        .filter(|(_, span)| {
            !positions
                .iter()
                .any(|p| p.start < span.end && span.start < p.end)
        })
        .map(|(t, _)| t.clone())
        .collect()
}
