//! Semantic fingerprints: one dense vector per context.
//!
//! A fingerprint is the weighted mean of the embeddings of the *distinct*
//! in-vocabulary tokens of a context. Repeats inside a context count once
//! (binary bag of words) and each vector is weighted by the inverse-frequency
//! scheme of the model. Optionally the result is scaled to unit length.

use std::collections::BTreeMap;
use std::io::Write;

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_tokens, remove_query_word, ContextRecord, TokenMode};
use crate::embedding::{EmbeddingModel, WeightScheme};

/// Denominator of the weighted mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    /// Divide by the sum of weights.
    #[default]
    WeightSum,
    /// Divide by the number of distinct hits.
    HitCount,
}

/// How repeated tokens inside one context are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bag {
    /// Every distinct token once.
    #[default]
    Binary,
    /// Each token as many times as it occurs. Only for ablations.
    Counts,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FingerprintOptions {
    pub scheme: WeightScheme,
    pub normalize: bool,
    pub averaging: Averaging,
    pub bag: Bag,
    /// Applied to context tokens after query-word removal (batch only).
    pub token_mode: TokenMode,
}

impl Default for FingerprintOptions {
    fn default() -> Self {
        FingerprintOptions {
            scheme: WeightScheme::default(),
            normalize: true,
            averaging: Averaging::WeightSum,
            bag: Bag::Binary,
            token_mode: TokenMode::AsIs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint {
    pub vector: Array1<f64>,
    /// Distinct in-vocabulary tokens that contributed.
    pub n_hits: usize,
    pub is_zero: bool,
}

impl Fingerprint {
    fn zero(dim: usize) -> Self {
        Fingerprint {
            vector: Array1::zeros(dim),
            n_hits: 0,
            is_zero: true,
        }
    }
}

/// Computes the fingerprint of an already-normalized token sequence.
///
/// Out-of-vocabulary tokens are skipped; a context without any hit yields the
/// zero vector with `is_zero` set.
pub fn fingerprint<S: AsRef<str>>(
    tokens: &[S],
    model: &EmbeddingModel,
    opts: &FingerprintOptions,
) -> Fingerprint {
    let dim = model.dim();
    // Sorting by vocabulary index makes the sum independent of token order.
    let mut hits: BTreeMap<usize, usize> = BTreeMap::new();
    for i in tokens.iter().filter_map(|t| model.index_of(t.as_ref())) {
        *hits.entry(i).or_default() += 1;
    }
    if hits.is_empty() {
        return Fingerprint::zero(dim);
    }
    let multiplicity = |count: usize| match opts.bag {
        Bag::Binary => 1.0,
        Bag::Counts => count as f64,
    };

    let mut weights: Vec<f64> = hits
        .iter()
        .map(|(&i, &c)| multiplicity(c) * model.weight_unchecked(&opts.scheme, &model.words()[i]))
        .collect();
    let mut total: f64 = weights.iter().sum();
    if total <= 0.0 {
        // Every hit sits at the top of the frequency table with a zero floor.
        for (w, &c) in weights.iter_mut().zip(hits.values()) {
            *w = multiplicity(c);
        }
        total = weights.iter().sum();
    }

    let mut v = Array1::<f64>::zeros(dim);
    for (&i, &w) in hits.keys().zip(&weights) {
        for (acc, &x) in v.iter_mut().zip(model.row(i)) {
            *acc += w * f64::from(x);
        }
    }
    let denom = match opts.averaging {
        Averaging::WeightSum => total,
        Averaging::HitCount => hits.values().map(|&c| multiplicity(c)).sum(),
    };
    v.mapv_inplace(|x| x / denom);

    if opts.normalize {
        let norm = v.dot(&v).sqrt();
        if norm == 0.0 {
            return Fingerprint {
                vector: v,
                n_hits: hits.len(),
                is_zero: true,
            };
        }
        v.mapv_inplace(|x| x / norm);
    }
    Fingerprint {
        vector: v,
        n_hits: hits.len(),
        is_zero: false,
    }
}

/// Fingerprints of a group of contexts, one row per record.
#[derive(Debug, Clone, PartialEq)]
pub struct FingerprintMatrix {
    pub rows: Array2<f64>,
    pub is_zero: Vec<bool>,
}

impl FingerprintMatrix {
    pub fn len(&self) -> usize {
        self.is_zero.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero.is_empty()
    }

    /// Indices of the rows that are not zero fingerprints.
    pub fn nonzero_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.is_zero[i]).collect()
    }

    /// Writes `context_id,v1,...,vdim` lines.
    pub fn write_csv<W: Write>(&self, ids: &[&str], mut w: W) -> std::io::Result<()> {
        for (id, row) in ids.iter().zip(self.rows.rows()) {
            write!(w, "{id}")?;
            for x in row {
                write!(w, ",{x}")?;
            }
            writeln!(w)?;
        }
        w.flush()
    }
}

/// Row `i` is the fingerprint of record `i` with its query word removed.
/// Rows are computed in parallel; the result equals the sequential one.
pub fn fingerprint_batch(
    records: &[ContextRecord],
    model: &EmbeddingModel,
    opts: &FingerprintOptions,
) -> FingerprintMatrix {
    let prints: Vec<Fingerprint> = records
        .par_iter()
        .map(|r| {
            let tokens = normalize_tokens(&remove_query_word(r), opts.token_mode);
            fingerprint(&tokens, model, opts)
        })
        .collect();
    let mut rows = Array2::zeros((prints.len(), model.dim()));
    for (mut row, p) in rows.rows_mut().into_iter().zip(&prints) {
        row.assign(&p.vector);
    }
    FingerprintMatrix {
        rows,
        is_zero: prints.iter().map(|p| p.is_zero).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{FrequencyTable, WeightKind};
    use ndarray::array;
    use proptest::prelude::*;

    fn model() -> EmbeddingModel {
        let words = ["a", "b", "c", "d", "e"].map(String::from).to_vec();
        let vectors = array![
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.5, -2.0, 3.0],
            [-1.25, 0.75, 0.5],
            [2.0, 2.0, -1.0],
        ];
        let freqs = [("a", 10u64), ("b", 1000), ("c", 50), ("d", 100_000)]
            .iter()
            .map(|(t, c)| (t.to_string(), *c))
            .collect();
        EmbeddingModel::new(words, vectors)
            .unwrap()
            .with_frequencies(FrequencyTable::new(freqs).unwrap())
    }

    fn uniform_raw() -> FingerprintOptions {
        FingerprintOptions {
            scheme: WeightScheme::uniform(),
            normalize: false,
            ..Default::default()
        }
    }

    #[test]
    fn single_token_is_its_normalized_embedding() {
        let m = model();
        let f = fingerprint(&["c"], &m, &FingerprintOptions::default());
        let v = array![0.5f64, -2.0, 3.0];
        let expected = &v / v.dot(&v).sqrt();
        for (a, b) in f.vector.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(f.n_hits, 1);
    }

    #[test]
    fn duplicates_collapse() {
        let m = model();
        let opts = FingerprintOptions::default();
        assert_eq!(
            fingerprint(&["a", "a", "b"], &m, &opts),
            fingerprint(&["a", "b"], &m, &opts)
        );
    }

    #[test]
    fn count_bag_repeats_tokens() {
        let m = model();
        let opts = FingerprintOptions {
            bag: Bag::Counts,
            ..uniform_raw()
        };
        let f = fingerprint(&["a", "a", "b"], &m, &opts);
        assert_eq!(f.n_hits, 2);
        for (x, e) in f.vector.iter().zip([2.0 / 3.0, 1.0 / 3.0, 0.0]) {
            assert!((x - e).abs() < 1e-12);
        }
        let hit_count = FingerprintOptions {
            averaging: Averaging::HitCount,
            ..opts
        };
        assert_eq!(fingerprint(&["a", "a", "b"], &m, &hit_count).vector, f.vector);
    }

    #[test]
    fn orthogonal_pair_normalizes_to_diagonal() {
        let m = model();
        let f = fingerprint(
            &["a", "b"],
            &m,
            &FingerprintOptions {
                scheme: WeightScheme::uniform(),
                ..Default::default()
            },
        );
        let h = 1.0 / 2f64.sqrt();
        assert!((f.vector[0] - h).abs() < 1e-15);
        assert!((f.vector[1] - h).abs() < 1e-15);
        assert_eq!(f.vector[2], 0.0);
    }

    #[test]
    fn all_oov_is_zero() {
        let m = model();
        let f = fingerprint(&["x", "y"], &m, &FingerprintOptions::default());
        assert!(f.is_zero);
        assert_eq!(f.n_hits, 0);
        assert!(f.vector.iter().all(|&x| x == 0.0));
        let empty: [&str; 0] = [];
        assert!(fingerprint(&empty, &m, &FingerprintOptions::default()).is_zero);
    }

    #[test]
    fn zero_weight_hits_fall_back_to_plain_mean() {
        let m = model();
        // "d" is the most frequent token, so its log-inverse weight is 0.
        let opts = FingerprintOptions {
            normalize: false,
            ..Default::default()
        };
        let f = fingerprint(&["d"], &m, &opts);
        assert_eq!(f.vector, array![-1.25, 0.75, 0.5]);
    }

    #[test]
    fn weighted_mean_closed_form() {
        let m = model();
        let opts = FingerprintOptions {
            normalize: false,
            ..Default::default()
        };
        let f = fingerprint(&["a", "b"], &m, &opts);
        let ln_max = 100_000f64.ln();
        let wa = 1.0 - 10f64.ln() / ln_max;
        let wb = 1.0 - 1000f64.ln() / ln_max;
        assert!((f.vector[0] - wa / (wa + wb)).abs() < 1e-12);
        assert!((f.vector[1] - wb / (wa + wb)).abs() < 1e-12);

        let by_count = fingerprint(
            &["a", "b"],
            &m,
            &FingerprintOptions {
                averaging: Averaging::HitCount,
                ..opts
            },
        );
        assert!((by_count.vector[0] - wa / 2.0).abs() < 1e-12);
    }

    #[test]
    fn batch_matches_individual_calls() {
        let m = model();
        let opts = FingerprintOptions::default();
        let records = vec![
            ContextRecord::new("1", "q", "a q b"),
            ContextRecord::new("2", "q", "zzz q"),
            ContextRecord::new("3", "q", "c d e c"),
            ContextRecord::new("4", "q", "c d e c"),
        ];
        let batch = fingerprint_batch(&records, &m, &opts);
        assert_eq!(batch.is_zero, [false, true, false, false]);
        for (i, r) in records.iter().enumerate() {
            let single = fingerprint(&remove_query_word(r), &m, &opts);
            assert_eq!(batch.rows.row(i), single.vector);
        }
        assert_eq!(batch.rows.row(2), batch.rows.row(3));
        assert_eq!(fingerprint_batch(&[], &m, &opts).rows.dim(), (0, 3));
    }

    #[test]
    fn csv_dump() {
        let m = model();
        let batch = fingerprint_batch(
            &[ContextRecord::new("x1", "q", "a")],
            &m,
            &FingerprintOptions::default(),
        );
        let mut out = Vec::new();
        batch.write_csv(&["x1"], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "x1,1,0,0\n");
    }

    fn token_strategy() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e", "oov1", "oov2"]), 0..10)
            .prop_map(|v| v.into_iter().map(String::from).collect())
    }

    proptest! {
        #[test]
        fn order_duplicates_and_oov_do_not_matter(
            tokens in token_strategy(),
            seed in any::<u64>(),
            kind in prop::sample::select(vec![WeightKind::Uniform, WeightKind::LogInverse, WeightKind::Reciprocal]),
        ) {
            let m = model();
            let opts = FingerprintOptions { scheme: WeightScheme::new(kind, 0.0).unwrap(), ..Default::default() };
            let base = fingerprint(&tokens, &m, &opts);

            let mut shuffled = tokens.clone();
            let n = shuffled.len();
            if n > 1 {
                shuffled.rotate_left((seed as usize) % n);
                shuffled.swap(0, (seed as usize / 7) % n);
            }
            prop_assert_eq!(&fingerprint(&shuffled, &m, &opts), &base);

            let mut with_extra = tokens.clone();
            with_extra.push("never-seen".into());
            if let Some(t) = tokens.first() { with_extra.push(t.clone()); }
            prop_assert_eq!(&fingerprint(&with_extra, &m, &opts), &base);

            if !base.is_zero {
                prop_assert!((base.vector.dot(&base.vector).sqrt() - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn uniform_equals_plain_mean(tokens in token_strategy()) {
            let m = model();
            let f = fingerprint(&tokens, &m, &uniform_raw());
            let mut distinct: Vec<&str> = tokens.iter().map(String::as_str).filter(|t| m.contains(t)).collect();
            distinct.sort();
            distinct.dedup();
            if distinct.is_empty() {
                prop_assert!(f.is_zero);
            } else {
                for d in 0..3 {
                    let mean = distinct.iter().map(|t| f64::from(m.vector(t).unwrap()[d])).sum::<f64>()
                        / distinct.len() as f64;
                    prop_assert!((f.vector[d] - mean).abs() < 1e-12);
                }
            }
        }
    }
}
