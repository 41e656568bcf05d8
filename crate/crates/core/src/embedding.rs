//! Pre-trained embedding models, corpus frequency tables and per-token weights.
//!
//! Models are read from the two classic word2vec layouts. Both start with an
//! ASCII header line `"<n_vocab> <dim>"`; the text layout then has one line per
//! token (`token v1 ... vdim`), the binary layout has the token bytes, a single
//! space and `dim` little-endian `f32` values per entry.
//!
//! Tokens are opaque strings. Tagged models (`лес_NOUN`) work as long as the
//! contexts are normalized to the same convention.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

/// Errors raised while loading models or frequency tables.
#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header: {0}")]
    Header(String),
    #[error("entry {entry}: expected {expected} components, found {found}")]
    RowLength {
        entry: usize,
        expected: usize,
        found: usize,
    },
    #[error("entry {entry}: duplicate token {token:?} (first seen at entry {first})")]
    DuplicateToken {
        token: String,
        entry: usize,
        first: usize,
    },
    #[error("entry {entry}: {message}")]
    Entry { entry: usize, message: String },
    #[error("expected {expected} entries, file ended after {found}")]
    Truncated { expected: usize, found: usize },
    #[error("frequency file line {line}: {message}")]
    Frequency { line: usize, message: String },
    #[error("token {0:?} is not in the model vocabulary")]
    UnknownToken(String),
    #[error("{0}")]
    Invalid(String),
}

impl ModelError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        ModelError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// On-disk layout of an embedding model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelFormat {
    Word2vecText,
    Word2vecBinary,
}

impl FromStr for ModelFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "word2vec-text" | "text" => Ok(ModelFormat::Word2vecText),
            "word2vec-binary" | "binary" | "bin" => Ok(ModelFormat::Word2vecBinary),
            other => Err(format!(
                "unknown model format {other:?} (expected word2vec-text or word2vec-binary)"
            )),
        }
    }
}

/// Corpus counts for tokens, with the extremes cached for weighting.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
    max: u64,
    min: u64,
}

impl FrequencyTable {
    pub fn new(counts: HashMap<String, u64>) -> Result<Self, ModelError> {
        if let Some((token, _)) = counts.iter().find(|(_, &c)| c < 1) {
            return Err(ModelError::Invalid(format!(
                "frequency of {token:?} must be at least 1"
            )));
        }
        let max = counts.values().copied().max().unwrap_or(0);
        let min = counts.values().copied().min().unwrap_or(0);
        Ok(FrequencyTable { counts, max, min })
    }

    pub fn get(&self, token: &str) -> Option<u64> {
        self.counts.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn max(&self) -> u64 {
        self.max
    }

    pub fn min(&self) -> u64 {
        self.min
    }
}

/// How a corpus frequency is turned into an averaging weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    Uniform,
    LinearInverse,
    #[default]
    LogInverse,
    Reciprocal,
}

impl FromStr for WeightKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(WeightKind::Uniform),
            "linear-inverse" => Ok(WeightKind::LinearInverse),
            "log-inverse" => Ok(WeightKind::LogInverse),
            "reciprocal" => Ok(WeightKind::Reciprocal),
            other => Err(format!(
                "unknown weight scheme {other:?} (expected uniform, linear-inverse, log-inverse or reciprocal)"
            )),
        }
    }
}

/// Frequency weighting scheme with a lower clamp.
///
/// Every weight lies in `[floor, 1]` and never increases with frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightScheme {
    pub kind: WeightKind,
    #[serde(default)]
    pub floor: f64,
}

impl Default for WeightScheme {
    fn default() -> Self {
        WeightScheme {
            kind: WeightKind::LogInverse,
            floor: 0.0,
        }
    }
}

impl WeightScheme {
    pub fn new(kind: WeightKind, floor: f64) -> Result<Self, ModelError> {
        let scheme = WeightScheme { kind, floor };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn uniform() -> Self {
        WeightScheme {
            kind: WeightKind::Uniform,
            floor: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(0.0..1.0).contains(&self.floor) {
            return Err(ModelError::Invalid(format!(
                "weight floor must lie in [0, 1), got {}",
                self.floor
            )));
        }
        Ok(())
    }

    /// Weight for a token with corpus count `freq` (`None` = not in the table).
    pub fn weight_for(&self, freq: Option<u64>, table: &FrequencyTable) -> f64 {
        let f = match (self.kind, freq) {
            (WeightKind::Uniform, _) | (_, None) => return 1.0,
            (_, Some(f)) => f as f64,
        };
        let f_max = table.max() as f64;
        let raw = match self.kind {
            WeightKind::Uniform => 1.0,
            // A table whose largest count is 1 carries no contrast.
            WeightKind::LogInverse if f_max <= 1.0 => 1.0,
            WeightKind::LogInverse => 1.0 - f.ln() / f_max.ln(),
            WeightKind::LinearInverse => 1.0 - f / f_max,
            WeightKind::Reciprocal => table.min() as f64 / f,
        };
        raw.clamp(0.0, 1.0).max(self.floor)
    }
}

/// A word-embedding model: ordered vocabulary plus one `dim`-long row per token.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Array2<f32>,
    frequencies: Option<FrequencyTable>,
}

impl EmbeddingModel {
    pub fn new(words: Vec<String>, vectors: Array2<f32>) -> Result<Self, ModelError> {
        if vectors.ncols() == 0 {
            return Err(ModelError::Invalid("dimension must be at least 1".into()));
        }
        if words.len() != vectors.nrows() {
            return Err(ModelError::Invalid(format!(
                "{} tokens but {} vectors",
                words.len(),
                vectors.nrows()
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (entry, word) in words.iter().enumerate() {
            if let Some(first) = index.insert(word.clone(), entry) {
                return Err(ModelError::DuplicateToken {
                    token: word.clone(),
                    entry,
                    first,
                });
            }
        }
        Ok(EmbeddingModel {
            words,
            index,
            vectors,
            frequencies: None,
        })
    }

    pub fn with_frequencies(mut self, table: FrequencyTable) -> Self {
        self.frequencies = Some(table);
        self
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vectors(&self) -> &Array2<f32> {
        &self.vectors
    }

    pub fn frequencies(&self) -> Option<&FrequencyTable> {
        self.frequencies.as_ref()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn vector(&self, token: &str) -> Option<ArrayView1<'_, f32>> {
        self.index_of(token).map(|i| self.vectors.row(i))
    }

    pub fn row(&self, index: usize) -> ArrayView1<'_, f32> {
        self.vectors.row(index)
    }

    /// Averaging weight of a vocabulary token under `scheme`.
    ///
    /// Tokens missing from the frequency table, and every token when no
    /// table is attached or the table is empty, get weight 1.
    pub fn token_weight(&self, scheme: &WeightScheme, token: &str) -> Result<f64, ModelError> {
        if !self.contains(token) {
            return Err(ModelError::UnknownToken(token.to_owned()));
        }
        Ok(self.weight_unchecked(scheme, token))
    }

    pub(crate) fn weight_unchecked(&self, scheme: &WeightScheme, token: &str) -> f64 {
        match &self.frequencies {
            Some(table) if !table.is_empty() => scheme.weight_for(table.get(token), table),
            _ => 1.0,
        }
    }

    /// Writes the model in word2vec text layout. Floats use the shortest
    /// representation that parses back to the same `f32`.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim())?;
        for (word, row) in self.words.iter().zip(self.vectors.rows()) {
            w.write_all(word.as_bytes())?;
            for v in row {
                write!(w, " {v}")?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim())?;
        for (word, row) in self.words.iter().zip(self.vectors.rows()) {
            w.write_all(word.as_bytes())?;
            w.write_all(b" ")?;
            for v in row {
                w.write_all(&v.to_le_bytes())?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn save(&self, path: impl AsRef<Path>, format: ModelFormat) -> Result<(), ModelError> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| ModelError::io(path, e))?;
        let w = BufWriter::new(file);
        match format {
            ModelFormat::Word2vecText => self.write_text(w),
            ModelFormat::Word2vecBinary => self.write_binary(w),
        }
        .map_err(|e| ModelError::io(path, e))
    }
}

fn parse_header(line: &str) -> Result<(usize, usize), ModelError> {
    let mut parts = line.split_whitespace();
    let (Some(n), Some(d), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(ModelError::Header(format!(
            "expected \"<n_vocab> <dim>\", got {:?}",
            line.trim_end()
        )));
    };
    let n = n
        .parse::<usize>()
        .map_err(|_| ModelError::Header(format!("bad vocabulary size {n:?}")))?;
    let d = d
        .parse::<usize>()
        .map_err(|_| ModelError::Header(format!("bad dimension {d:?}")))?;
    if d == 0 {
        return Err(ModelError::Header("dimension must be at least 1".into()));
    }
    Ok((n, d))
}

/// Reads a word2vec text model from a buffered reader.
pub fn read_text<R: BufRead>(mut reader: R) -> Result<EmbeddingModel, ModelError> {
    let io = |e| ModelError::Io {
        path: PathBuf::from("<stream>"),
        source: e,
    };
    let mut header = String::new();
    reader.read_line(&mut header).map_err(io)?;
    let (n, dim) = parse_header(&header)?;

    let mut words = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * dim);
    let mut line = String::new();
    while words.len() < n {
        line.clear();
        if reader.read_line(&mut line).map_err(io)? == 0 {
            return Err(ModelError::Truncated {
                expected: n,
                found: words.len(),
            });
        }
        let entry = words.len();
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else {
            return Err(ModelError::Entry {
                entry,
                message: "empty line".into(),
            });
        };
        let before = data.len();
        for field in fields {
            let v = field.parse::<f32>().map_err(|_| ModelError::Entry {
                entry,
                message: format!("bad component {field:?}"),
            })?;
            data.push(v);
        }
        let found = data.len() - before;
        if found != dim {
            return Err(ModelError::RowLength {
                entry,
                expected: dim,
                found,
            });
        }
        words.push(token.to_owned());
    }
    let vectors = Array2::from_shape_vec((n, dim), data).expect("row lengths checked");
    EmbeddingModel::new(words, vectors)
}

/// Reads a word2vec binary model from a buffered reader.
pub fn read_binary<R: BufRead>(mut reader: R) -> Result<EmbeddingModel, ModelError> {
    let io = |e| ModelError::Io {
        path: PathBuf::from("<stream>"),
        source: e,
    };
    let mut header = Vec::new();
    reader.read_until(b'\n', &mut header).map_err(io)?;
    let header = String::from_utf8(header)
        .map_err(|_| ModelError::Header("header is not valid UTF-8".into()))?;
    let (n, dim) = parse_header(&header)?;

    let mut words = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * dim);
    let mut token = Vec::new();
    let mut raw = vec![0u8; 4 * dim];
    for entry in 0..n {
        token.clear();
        if reader.read_until(b' ', &mut token).map_err(io)? == 0 {
            return Err(ModelError::Truncated {
                expected: n,
                found: entry,
            });
        }
        if token.last() != Some(&b' ') {
            return Err(ModelError::Truncated {
                expected: n,
                found: entry,
            });
        }
        token.pop();
        // The newline closing the previous vector belongs to this token's prefix.
        let start = token
            .iter()
            .position(|b| !b.is_ascii_whitespace())
            .unwrap_or(token.len());
        let word = std::str::from_utf8(&token[start..]).map_err(|_| ModelError::Entry {
            entry,
            message: "token is not valid UTF-8".into(),
        })?;
        if word.is_empty() {
            return Err(ModelError::Entry {
                entry,
                message: "empty token".into(),
            });
        }
        reader.read_exact(&mut raw).map_err(|_| ModelError::RowLength {
            entry,
            expected: dim,
            found: 0,
        })?;
        data.extend(
            raw.chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])),
        );
        words.push(word.to_owned());
    }
    let vectors = Array2::from_shape_vec((n, dim), data).expect("fixed-size reads");
    EmbeddingModel::new(words, vectors)
}

/// Loads a model file. Errors carry the offending entry position.
pub fn load_model(path: impl AsRef<Path>, format: ModelFormat) -> Result<EmbeddingModel, ModelError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| ModelError::io(path, e))?;
    let reader = BufReader::new(file);
    let attach_path = |err: ModelError| match err {
        ModelError::Io { source, .. } => ModelError::io(path, source),
        other => other,
    };
    match format {
        ModelFormat::Word2vecText => read_text(reader),
        ModelFormat::Word2vecBinary => read_binary(reader),
    }
    .map_err(attach_path)
}

/// Parses `token<TAB>count` lines. Later duplicates overwrite earlier ones;
/// blank lines are skipped.
pub fn parse_frequencies<R: BufRead>(reader: R) -> Result<HashMap<String, u64>, ModelError> {
    let mut counts = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| ModelError::Frequency {
            line: line_no,
            message: e.to_string(),
        })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| ModelError::Frequency {
            line: line_no,
            message,
        };
        let (token, count) = line
            .split_once('\t')
            .ok_or_else(|| err("expected token<TAB>count".into()))?;
        if token.is_empty() {
            return Err(err("empty token".into()));
        }
        let count = count
            .trim()
            .parse::<u64>()
            .map_err(|_| err(format!("count {count:?} is not a non-negative integer")))?;
        if count < 1 {
            return Err(err(format!("count for {token:?} must be at least 1")));
        }
        counts.insert(token.to_owned(), count);
    }
    Ok(counts)
}

pub fn load_frequencies(path: impl AsRef<Path>) -> Result<HashMap<String, u64>, ModelError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| ModelError::io(path, e))?;
    parse_frequencies(BufReader::new(file))
}
