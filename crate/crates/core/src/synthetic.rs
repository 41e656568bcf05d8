//! Planted-sense corpora for testing without external models or datasets.
//!
//! Every query word gets `n_senses` random orthonormal sense directions. Each
//! sense owns a small vocabulary whose vectors are the direction plus Gaussian
//! noise; a shared background vocabulary of frequent, sense-neutral words is
//! mixed into every context. Context `i` of a word is planted in sense
//! `i % n_senses`.

use std::collections::HashMap;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::corpus::{write_dataset, ContextRecord, CorpusError, Dataset};
use crate::embedding::{EmbeddingModel, FrequencyTable, ModelError, ModelFormat};

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSenses {
    pub query_words: usize,
    pub n_senses: usize,
    pub contexts_per_word: usize,
    pub dim: usize,
    /// Per-coordinate standard deviation of sense-word vectors around their direction.
    pub noise_sigma: f64,
    pub sense_vocab: usize,
    pub tokens_per_context: usize,
    pub background_vocab: usize,
    pub background_per_context: usize,
    pub seed: u64,
}

impl Default for PlantedSenses {
    fn default() -> Self {
        PlantedSenses {
            query_words: 1,
            n_senses: 2,
            contexts_per_word: 50,
            dim: 50,
            noise_sigma: 0.05,
            sense_vocab: 20,
            tokens_per_context: 8,
            background_vocab: 30,
            background_per_context: 4,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    /// Model with its frequency table attached.
    pub model: EmbeddingModel,
    pub frequencies: HashMap<String, u64>,
    /// Contexts with gold senses (`"0"`, `"1"`, ...) and no predictions.
    pub dataset: Dataset,
}

pub fn query_word(w: usize) -> String {
    format!("query{w}")
}

fn sense_token(w: usize, s: usize, j: usize) -> String {
    format!("q{w}s{s}w{j}")
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
    let v: Array1<f64> = Array1::from_iter((0..dim).map(|_| StandardNormal.sample(rng)));
    let norm: f64 = v.dot(&v).sqrt();
    v / norm
}

/// `count` orthonormal vectors by Gram-Schmidt on Gaussian draws.
fn orthonormal(count: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Array1<f64>> {
    let mut basis: Vec<Array1<f64>> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v = random_unit(dim, rng);
        for b in &basis {
            let proj = v.dot(b);
            v.scaled_add(-proj, b);
        }
        let norm = v.dot(&v).sqrt();
        if norm > 1e-6 {
            basis.push(v / norm);
        }
    }
    basis
}

impl PlantedSenses {
    pub fn generate(&self) -> SyntheticCorpus {
        assert!(self.n_senses >= 1 && self.n_senses <= self.dim, "need 1 <= n_senses <= dim");
        assert!(self.sense_vocab >= 1, "sense vocabulary must be non-empty");
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let noise = Normal::new(0.0, self.noise_sigma).expect("finite sigma");

        let mut words = Vec::new();
        let mut rows: Vec<Array1<f64>> = Vec::new();
        let mut frequencies = HashMap::new();

        let background: Vec<String> = (0..self.background_vocab).map(|j| format!("bg{j}")).collect();
        for b in &background {
            words.push(b.clone());
            rows.push(random_unit(self.dim, &mut rng));
            frequencies.insert(b.clone(), rng.random_range(100_000..1_000_000));
        }

        let mut records = Vec::new();
        for w in 0..self.query_words {
            let query = query_word(w);
            words.push(query.clone());
            rows.push(random_unit(self.dim, &mut rng));
            frequencies.insert(query.clone(), rng.random_range(1_000..10_000));

            for (s, direction) in orthonormal(self.n_senses, self.dim, &mut rng).iter().enumerate() {
                for j in 0..self.sense_vocab {
                    let token = sense_token(w, s, j);
                    let v = direction + &Array1::from_iter((0..self.dim).map(|_| noise.sample(&mut rng)));
                    words.push(token.clone());
                    rows.push(v);
                    frequencies.insert(token, rng.random_range(5..500));
                }
            }

            for i in 0..self.contexts_per_word {
                let sense = i % self.n_senses;
                let mut tokens = vec![query.clone()];
                for _ in 0..self.tokens_per_context {
                    tokens.push(sense_token(w, sense, rng.random_range(0..self.sense_vocab)));
                }
                if !background.is_empty() {
                    for _ in 0..self.background_per_context {
                        tokens.push(background[rng.random_range(0..background.len())].clone());
                    }
                }
                tokens.shuffle(&mut rng);
                records.push(
                    ContextRecord::new(format!("{w}-{i}"), query.clone(), tokens.join(" "))
                        .with_gold(sense.to_string()),
                );
            }
        }

        let mut vectors = Array2::zeros((rows.len(), self.dim));
        for (mut dst, src) in vectors.rows_mut().into_iter().zip(&rows) {
            dst.assign(&src.mapv(|x| x as f32));
        }
        let table = FrequencyTable::new(frequencies.clone()).expect("counts are positive");
        let model = EmbeddingModel::new(words, vectors)
            .expect("generated tokens are unique")
            .with_frequencies(table);
        SyntheticCorpus {
            model,
            frequencies,
            dataset: Dataset::new(records),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SyntheticCorpus {
    /// Writes `model.txt`, `frequencies.tsv` and `dataset.tsv` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<(), FixtureError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|source| FixtureError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        self.model.save(dir.join("model.txt"), ModelFormat::Word2vecText)?;
        let mut freq: Vec<_> = self.frequencies.iter().collect();
        freq.sort();
        let text: String = freq.iter().map(|(t, c)| format!("{t}\t{c}\n")).collect();
        let path = dir.join("frequencies.tsv");
        std::fs::write(&path, text).map_err(|source| FixtureError::Io {
            path: path.display().to_string(),
            source,
        })?;
        write_dataset(&self.dataset, dir.join("dataset.tsv"))?;
        Ok(())
    }
}
