//! End-to-end sense induction: group contexts by query word, fingerprint
//! them, let Affinity Propagation find the clusters (or just their number),
//! and write the labels back.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{
    affinity_propagation, canonicalize, kmeans, similarity_matrix, spectral_clustering, ApParams,
    ClusterError, Metric, SpectralAffinity,
};
use crate::corpus::{CorpusError, Dataset};
use crate::embedding::{load_frequencies, load_model, EmbeddingModel, FrequencyTable, ModelError, ModelFormat};
use crate::evaluation::{evaluate, EvalError};
use crate::fingerprint::{fingerprint_batch, FingerprintMatrix, FingerprintOptions};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("clustering contexts of {word:?}: {source}")]
    Cluster {
        word: String,
        #[source]
        source: ClusterError,
    },
    #[error("configuration: {0}")]
    Config(String),
}

/// How the final sense clusters are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Use the Affinity Propagation clusters as they are.
    #[default]
    ApDirect,
    /// Take only k from Affinity Propagation, then run K-Means.
    ApThenKmeans,
    /// Take only k from Affinity Propagation, then run spectral clustering.
    ApThenSpectral,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ap-direct" => Ok(Strategy::ApDirect),
            "ap-then-kmeans" => Ok(Strategy::ApThenKmeans),
            "ap-then-spectral" => Ok(Strategy::ApThenSpectral),
            other => Err(format!(
                "unknown strategy {other:?} (expected ap-direct, ap-then-kmeans or ap-then-spectral)"
            )),
        }
    }
}

/// The value put on the diagonal of the similarity matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PreferenceRepr", into = "PreferenceRepr")]
pub enum Preference {
    Value(f64),
    /// Median of the off-diagonal similarities of each word.
    Median,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PreferenceRepr {
    Value(f64),
    Name(String),
}

impl TryFrom<PreferenceRepr> for Preference {
    type Error = String;

    fn try_from(r: PreferenceRepr) -> Result<Self, Self::Error> {
        match r {
            PreferenceRepr::Value(v) => Ok(Preference::Value(v)),
            PreferenceRepr::Name(s) => s.parse(),
        }
    }
}

impl From<Preference> for PreferenceRepr {
    fn from(p: Preference) -> Self {
        match p {
            Preference::Value(v) => PreferenceRepr::Value(v),
            Preference::Median => PreferenceRepr::Name("median".into()),
        }
    }
}

impl FromStr for Preference {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "median" {
            return Ok(Preference::Median);
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Preference::Value)
            .ok_or_else(|| format!("preference must be a number or \"median\", got {s:?}"))
    }
}

impl fmt::Display for Preference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preference::Value(v) => write!(f, "{v}"),
            Preference::Median => f.write_str("median"),
        }
    }
}

fn default_preference() -> Preference {
    Preference::Value(-0.65)
}

fn default_damping() -> f64 {
    0.75
}

fn default_max_iter() -> usize {
    1000
}

fn default_window() -> usize {
    50
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusteringConfig {
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default = "default_preference")]
    pub preference: Preference,
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_window")]
    pub convergence_window: usize,
    #[serde(default)]
    pub spectral_affinity: SpectralAffinity,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        ClusteringConfig {
            strategy: Strategy::default(),
            metric: Metric::default(),
            preference: default_preference(),
            damping: default_damping(),
            max_iter: default_max_iter(),
            convergence_window: default_window(),
            spectral_affinity: SpectralAffinity::default(),
        }
    }
}

impl ClusteringConfig {
    fn ap_params(&self, seed: u64) -> ApParams {
        ApParams {
            damping: self.damping,
            max_iter: self.max_iter,
            convergence_window: self.convergence_window,
            seed,
        }
    }
}

/// Everything except where the model comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WsiSettings {
    #[serde(default)]
    pub fingerprint: FingerprintOptions,
    #[serde(default)]
    pub clustering: ClusteringConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl Default for WsiSettings {
    fn default() -> Self {
        WsiSettings {
            fingerprint: FingerprintOptions::default(),
            clustering: ClusteringConfig::default(),
            seed: DEFAULT_SEED,
        }
    }
}

impl WsiSettings {
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.fingerprint
            .scheme
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        self.clustering
            .ap_params(self.seed)
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if let Preference::Value(v) = self.clustering.preference {
            if !v.is_finite() {
                return Err(PipelineError::Config("preference must be finite".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSource {
    pub path: PathBuf,
    #[serde(default = "default_format")]
    pub format: ModelFormat,
    #[serde(default)]
    pub frequencies: Option<PathBuf>,
}

fn default_format() -> ModelFormat {
    ModelFormat::Word2vecText
}

impl ModelSource {
    pub fn load(&self) -> Result<EmbeddingModel, ModelError> {
        let model = load_model(&self.path, self.format)?;
        match &self.frequencies {
            Some(path) => Ok(model.with_frequencies(FrequencyTable::new(load_frequencies(path)?)?)),
            None => Ok(model),
        }
    }
}

/// A full pipeline configuration as stored in a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub model: ModelSource,
    #[serde(default)]
    pub fingerprint: FingerprintOptions,
    #[serde(default)]
    pub clustering: ClusteringConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(model: ModelSource, settings: WsiSettings) -> Self {
        PipelineConfig {
            model,
            fingerprint: settings.fingerprint,
            clustering: settings.clustering,
            seed: settings.seed,
        }
    }

    pub fn settings(&self) -> WsiSettings {
        WsiSettings {
            fingerprint: self.fingerprint,
            clustering: self.clustering,
            seed: self.seed,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        let cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.settings().validate()?;
        Ok(cfg)
    }

    /// Reads a config file. A relative model or frequency path is taken
    /// relative to the directory of the config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            if cfg.model.path.is_relative() {
                cfg.model.path = base.join(&cfg.model.path);
            }
            if let Some(f) = cfg.model.frequencies.as_mut().filter(|f| f.is_relative()) {
                *f = base.join(&*f);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }
}

/// Per-word seed: independent of which other words are in the dataset.
fn word_seed(seed: u64, word: &str) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let hash = word
        .bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME));
    seed ^ hash
}

/// Outcome of clustering one query word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordOutcome {
    pub word: String,
    /// Canonical labels, one per context of the word in dataset order.
    pub labels: Vec<usize>,
    /// Number of clusters Affinity Propagation found (1 when skipped).
    pub ap_k: usize,
    pub k: usize,
    pub converged: bool,
    pub n_zero: usize,
}

/// Fingerprints of one query word, computed once and reused across runs.
#[derive(Debug, Clone)]
pub struct PreparedWord {
    pub word: String,
    /// Row indices of the word's contexts in the dataset.
    pub records: Vec<usize>,
    pub fingerprints: FingerprintMatrix,
}

/// Groups the dataset by query word (order of first appearance) and
/// fingerprints every group.
pub fn prepare(dataset: &Dataset, model: &EmbeddingModel, opts: &FingerprintOptions) -> Vec<PreparedWord> {
    dataset
        .query_words()
        .into_par_iter()
        .map(|word| {
            let records: Vec<usize> = (0..dataset.records.len())
                .filter(|&i| dataset.records[i].query_word == word)
                .collect();
            let group: Vec<_> = records.iter().map(|&i| dataset.records[i].clone()).collect();
            PreparedWord {
                word: word.to_owned(),
                records,
                fingerprints: fingerprint_batch(&group, model, opts),
            }
        })
        .collect()
}

/// Clusters one prepared word.
pub fn cluster_word(
    prepared: &PreparedWord,
    clustering: &ClusteringConfig,
    seed: u64,
) -> Result<WordOutcome, ClusterError> {
    let fp = &prepared.fingerprints;
    let n = fp.len();
    let usable = fp.nonzero_indices();
    let n_zero = n - usable.len();
    let trivial = |converged| WordOutcome {
        word: prepared.word.clone(),
        labels: vec![0; n],
        ap_k: 1,
        k: usize::from(n > 0),
        converged,
        n_zero,
    };
    if usable.len() <= 1 {
        return Ok(trivial(true));
    }

    let seed = word_seed(seed, &prepared.word);
    let x: Array2<f64> = fp.rows.select(Axis(0), &usable);
    let sim = similarity_matrix(x.view(), clustering.metric, 0.0)?;
    let preference = match clustering.preference {
        Preference::Value(v) => v,
        Preference::Median => sim.median_off_diagonal().expect("at least two rows"),
    };
    let sim = sim.with_preference(preference)?;
    let ap = affinity_propagation(&sim, &clustering.ap_params(seed))?;
    if !ap.converged {
        log::warn!(
            "affinity propagation did not converge for {:?} after {} iterations",
            prepared.word,
            ap.n_iter
        );
    }
    let sub = match clustering.strategy {
        Strategy::ApDirect => ap.labels.clone(),
        Strategy::ApThenKmeans => kmeans(x.view(), ap.k, seed)?.labels,
        Strategy::ApThenSpectral => {
            spectral_clustering(x.view(), ap.k, seed, clustering.spectral_affinity)?.labels
        }
    };

    // Zero fingerprints join the largest cluster (lowest label on ties).
    let k_sub = sub.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k_sub];
    for &l in &sub {
        sizes[l] += 1;
    }
    let largest = sizes
        .iter()
        .enumerate()
        .fold(0, |best, (l, &s)| if s > sizes[best] { l } else { best });
    let mut full = vec![largest; n];
    for (&row, &l) in usable.iter().zip(&sub) {
        full[row] = l;
    }
    let labels = canonicalize(&full);
    let k = labels.iter().max().map_or(0, |m| m + 1);
    Ok(WordOutcome {
        word: prepared.word.clone(),
        labels,
        ap_k: ap.k,
        k,
        converged: ap.converged,
        n_zero,
    })
}

fn cluster_all(
    prepared: &[PreparedWord],
    clustering: &ClusteringConfig,
    seed: u64,
) -> Result<Vec<WordOutcome>, PipelineError> {
    prepared
        .par_iter()
        .map(|p| {
            cluster_word(p, clustering, seed).map_err(|source| PipelineError::Cluster {
                word: p.word.clone(),
                source,
            })
        })
        .collect()
}

fn apply(dataset: &Dataset, prepared: &[PreparedWord], outcomes: &[WordOutcome]) -> Dataset {
    let mut out = dataset.clone();
    for (p, o) in prepared.iter().zip(outcomes) {
        for (&row, &label) in p.records.iter().zip(&o.labels) {
            out.records[row].predicted_sense_id = Some(label.to_string());
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Induction {
    pub dataset: Dataset,
    pub words: Vec<WordOutcome>,
}

/// Induces senses with an already loaded model.
pub fn induce_senses(
    dataset: &Dataset,
    model: &EmbeddingModel,
    settings: &WsiSettings,
) -> Result<Induction, PipelineError> {
    settings.validate()?;
    let prepared = prepare(dataset, model, &settings.fingerprint);
    let words = cluster_all(&prepared, &settings.clustering, settings.seed)?;
    Ok(Induction {
        dataset: apply(dataset, &prepared, &words),
        words,
    })
}

/// Loads the configured model and labels every context of `dataset`.
pub fn run_wsi(dataset: &Dataset, config: &PipelineConfig) -> Result<Dataset, PipelineError> {
    let settings = config.settings();
    settings.validate()?;
    let model = config.model.load()?;
    Ok(induce_senses(dataset, &model, &settings)?.dataset)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    #[default]
    WeightedAri,
    MacroAri,
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "weighted-ari" | "weighted" => Ok(Objective::WeightedAri),
            "macro-ari" | "macro" => Ok(Objective::MacroAri),
            other => Err(format!(
                "unknown objective {other:?} (expected weighted-ari or macro-ari)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub preferences: Vec<f64>,
    pub dampings: Vec<f64>,
    pub objective: Objective,
}

impl Default for GridSpec {
    /// Preference -0.80..=-0.40 and damping 0.60..=0.90, both in steps of 0.05.
    fn default() -> Self {
        GridSpec {
            preferences: (0..=8).map(|i| f64::from(-80 + 5 * i) / 100.0).collect(),
            dampings: (0..=6).map(|i| f64::from(60 + 5 * i) / 100.0).collect(),
            objective: Objective::WeightedAri,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.preferences.is_empty() || self.dampings.is_empty() {
            return Err(PipelineError::Config("grid axes must be non-empty".into()));
        }
        if self.preferences.iter().any(|p| !p.is_finite()) {
            return Err(PipelineError::Config("grid preferences must be finite".into()));
        }
        if let Some(d) = self.dampings.iter().find(|d| !(0.5..1.0).contains(*d)) {
            return Err(PipelineError::Config(format!(
                "grid damping {d} outside [0.5, 1)"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub preference: f64,
    pub damping: f64,
    pub macro_ari: f64,
    pub weighted_ari: f64,
}

impl GridCell {
    pub fn score(&self, objective: Objective) -> f64 {
        match objective {
            Objective::WeightedAri => self.weighted_ari,
            Objective::MacroAri => self.macro_ari,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub best: GridCell,
    /// Every cell, preferences outer and dampings inner, in grid order.
    pub cells: Vec<GridCell>,
}

impl GridResult {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "preference,damping,macro_ari,weighted_ari")?;
        for c in &self.cells {
            writeln!(w, "{},{},{},{}", c.preference, c.damping, c.macro_ari, c.weighted_ari)?;
        }
        w.flush()
    }
}

/// Scores every (preference, damping) pair on a labeled dataset. The best
/// cell maximizes the objective; ties go to the larger preference, then the
/// larger damping.
pub fn grid_search(
    train: &Dataset,
    model: &EmbeddingModel,
    settings: &WsiSettings,
    grid: &GridSpec,
) -> Result<GridResult, PipelineError> {
    grid.validate()?;
    settings.validate()?;
    if let Some(r) = train.records.iter().find(|r| r.gold_sense_id.is_none()) {
        return Err(EvalError::MissingGold(r.context_id.clone()).into());
    }
    let prepared = prepare(train, model, &settings.fingerprint);
    let combos: Vec<(f64, f64)> = grid
        .preferences
        .iter()
        .flat_map(|&p| grid.dampings.iter().map(move |&d| (p, d)))
        .collect();
    let cells: Vec<GridCell> = combos
        .par_iter()
        .map(|&(preference, damping)| {
            let clustering = ClusteringConfig {
                preference: Preference::Value(preference),
                damping,
                ..settings.clustering
            };
            let outcomes = cluster_all(&prepared, &clustering, settings.seed)?;
            let report = evaluate(&apply(train, &prepared, &outcomes).records)?;
            Ok(GridCell {
                preference,
                damping,
                macro_ari: report.aggregate_macro,
                weighted_ari: report.aggregate_weighted,
            })
        })
        .collect::<Result<_, PipelineError>>()?;

    let objective = grid.objective;
    let best = *cells
        .iter()
        .max_by(|a, b| {
            a.score(objective)
                .total_cmp(&b.score(objective))
                .then(a.preference.total_cmp(&b.preference))
                .then(a.damping.total_cmp(&b.damping))
        })
        .expect("grid is non-empty");
    Ok(GridResult { best, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ContextRecord;
    use crate::synthetic::PlantedSenses;

    #[test]
    fn single_context_gets_label_zero() {
        let fixture = PlantedSenses::default().generate();
        let ds = Dataset::new(vec![ContextRecord::new("only", "query0", "query0 q0s0w1")]);
        let out = induce_senses(&ds, &fixture.model, &WsiSettings::default()).unwrap();
        assert_eq!(out.dataset.records[0].predicted_sense_id.as_deref(), Some("0"));
        assert_eq!(out.words[0].k, 1);
    }

    #[test]
    fn all_oov_contexts_share_one_label() {
        let fixture = PlantedSenses::default().generate();
        let ds = Dataset::new(vec![
            ContextRecord::new("a", "w", "foo bar"),
            ContextRecord::new("b", "w", "baz"),
            ContextRecord::new("c", "w", "q0s0w1"),
        ]);
        let out = induce_senses(&ds, &fixture.model, &WsiSettings::default()).unwrap();
        assert_eq!(out.words[0].labels, vec![0, 0, 0]);
        assert_eq!(out.words[0].n_zero, 2);
    }

    #[test]
    fn zero_rows_join_the_largest_cluster() {
        let fixture = PlantedSenses {
            contexts_per_word: 20,
            ..Default::default()
        }
        .generate();
        let mut ds = fixture.dataset.clone();
        let mut extra = ContextRecord::new("oov", "query0", "query0 nothing known");
        extra.gold_sense_id = Some("0".into());
        ds.records.insert(3, extra);
        let out = induce_senses(&ds, &fixture.model, &WsiSettings::default()).unwrap();
        let o = &out.words[0];
        assert_eq!(o.n_zero, 1);
        let mut sizes = vec![0; o.k];
        for (i, &l) in o.labels.iter().enumerate() {
            if i != 3 {
                sizes[l] += 1;
            }
        }
        let largest = sizes.iter().enumerate().fold(0, |b, (l, &s)| if s > sizes[b] { l } else { b });
        assert_eq!(o.labels[3], largest);
    }

    #[test]
    fn preference_parsing() {
        assert_eq!("median".parse::<Preference>().unwrap(), Preference::Median);
        assert_eq!("-0.7".parse::<Preference>().unwrap(), Preference::Value(-0.7));
        assert!("lots".parse::<Preference>().is_err());
        assert!("NaN".parse::<Preference>().is_err());
    }

    #[test]
    fn config_round_trip_and_defaults() {
        let text = r#"
            seed = 7
            [model]
            path = "m.txt"
            [clustering]
            strategy = "ap-then-kmeans"
            preference = "median"
        "#;
        let cfg = PipelineConfig::from_toml(text).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.model.format, ModelFormat::Word2vecText);
        assert_eq!(cfg.clustering.strategy, Strategy::ApThenKmeans);
        assert_eq!(cfg.clustering.preference, Preference::Median);
        assert_eq!(cfg.clustering.damping, 0.75);
        assert!(cfg.fingerprint.normalize);
        assert_eq!(PipelineConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);

        let bad = "[model]\npath = \"m\"\n[clustering]\ndamping = 1.2\n";
        assert!(matches!(PipelineConfig::from_toml(bad), Err(PipelineError::Config(_))));
        assert!(PipelineConfig::from_toml("[model]\npath = \"m\"\nbogus = 1\n").is_err());
        assert!(PipelineConfig::from_toml("[model]\npath = \"m\"\n[clustering]\nbogus = 1\n").is_err());
    }

    #[test]
    fn default_grid_brackets_the_reported_sweet_spots() {
        let g = GridSpec::default();
        assert_eq!(g.preferences.len(), 9);
        assert_eq!(g.dampings.len(), 7);
        assert_eq!(g.preferences[0], -0.8);
        assert_eq!(g.preferences[8], -0.4);
        assert!(g.preferences.contains(&-0.6) && g.preferences.contains(&-0.7));
        assert!(g.dampings.contains(&0.7) && g.dampings.contains(&0.8));
        assert_eq!(g.dampings[6], 0.9);
    }

    #[test]
    fn grid_of_one_cell() {
        let fixture = PlantedSenses {
            contexts_per_word: 20,
            ..Default::default()
        }
        .generate();
        let grid = GridSpec {
            preferences: vec![-0.6],
            dampings: vec![0.7],
            objective: Objective::WeightedAri,
        };
        let r = grid_search(&fixture.dataset, &fixture.model, &WsiSettings::default(), &grid).unwrap();
        assert_eq!(r.cells.len(), 1);
        assert_eq!(r.best, r.cells[0]);
        assert_eq!((r.best.preference, r.best.damping), (-0.6, 0.7));
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("preference,damping,macro_ari,weighted_ari\n-0.6,0.7,"));
    }

    #[test]
    fn grid_ties_prefer_larger_values() {
        let fixture = PlantedSenses {
            contexts_per_word: 20,
            ..Default::default()
        }
        .generate();
        // Every cell recovers the two senses perfectly.
        let grid = GridSpec {
            preferences: vec![-0.7, -0.6],
            dampings: vec![0.7, 0.8],
            objective: Objective::MacroAri,
        };
        let r = grid_search(&fixture.dataset, &fixture.model, &WsiSettings::default(), &grid).unwrap();
        assert!(r.cells.iter().all(|c| c.macro_ari == 1.0));
        assert_eq!((r.best.preference, r.best.damping), (-0.6, 0.8));
    }

    #[test]
    fn grid_needs_gold_labels() {
        let fixture = PlantedSenses::default().generate();
        let mut ds = fixture.dataset.clone();
        ds.records[0].gold_sense_id = None;
        assert!(grid_search(&ds, &fixture.model, &WsiSettings::default(), &GridSpec::default()).is_err());
        let empty = GridSpec {
            preferences: vec![],
            ..Default::default()
        };
        assert!(grid_search(&fixture.dataset, &fixture.model, &WsiSettings::default(), &empty).is_err());
    }

    #[test]
    fn word_seed_depends_only_on_word() {
        assert_eq!(word_seed(1, "бор"), word_seed(1, "бор"));
        assert_ne!(word_seed(1, "бор"), word_seed(1, "лук"));
    }
}
