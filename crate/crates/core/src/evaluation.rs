//! Scoring induced senses against gold labels, and 2-D projections for
//! looking at the fingerprints.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;
use std::io::Write;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::corpus::ContextRecord;
use crate::linalg::{symmetric_eigen, EigenError};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EvalError {
    #[error("label sequences differ in length ({gold} vs {pred})")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("cannot score an empty labeling")]
    Empty,
    #[error("context {0:?} has no gold sense")]
    MissingGold(String),
    #[error("context {0:?} has no predicted sense")]
    MissingPrediction(String),
    #[error("projection needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

fn pairs(count: u64) -> f64 {
    (count * count.saturating_sub(1) / 2) as f64
}

/// Adjusted Rand Index between two labelings of the same items.
///
/// Labels are opaque; only which items share a label matters. Two labelings
/// that are trivial in the same way (a single item, everything together,
/// everything apart) score 1.
pub fn adjusted_rand_index<A, B>(gold: &[A], pred: &[B]) -> Result<f64, EvalError>
where
    A: Hash + Eq,
    B: Hash + Eq,
{
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut rows: HashMap<&A, u64> = HashMap::new();
    let mut cols: HashMap<&B, u64> = HashMap::new();
    let mut cells: HashMap<(&A, &B), u64> = HashMap::new();
    for (g, p) in gold.iter().zip(pred) {
        *rows.entry(g).or_default() += 1;
        *cols.entry(p).or_default() += 1;
        *cells.entry((g, p)).or_default() += 1;
    }
    // Sum integer pair counts first so the result is exact up to the final division.
    let index: u64 = cells.values().map(|&c| c * c.saturating_sub(1) / 2).sum();
    let sum_rows: u64 = rows.values().map(|&c| c * c.saturating_sub(1) / 2).sum();
    let sum_cols: u64 = cols.values().map(|&c| c * c.saturating_sub(1) / 2).sum();
    let total = pairs(gold.len() as u64);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_rows as f64 * sum_cols as f64 / total;
    let max_index = 0.5 * (sum_rows + sum_cols) as f64;
    let denom = max_index - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((index as f64 - expected) / denom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordScore {
    pub ari: f64,
    pub n_contexts: usize,
    pub k_gold: usize,
    pub k_pred: usize,
}

/// Per-word ARI with macro and context-weighted aggregates.
///
/// The weighted aggregate is the headline number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub per_word: BTreeMap<String, WordScore>,
    pub aggregate_macro: f64,
    pub aggregate_weighted: f64,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }
}

impl fmt::Display for EvaluationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .per_word
            .keys()
            .map(|w| w.chars().count())
            .max()
            .unwrap_or(4)
            .max(4);
        writeln!(f, "{:<width$}  {:>8}  {:>6}  {:>6}  {:>6}", "word", "ari", "n", "k_gold", "k_pred")?;
        for (word, s) in &self.per_word {
            let pad = width - word.chars().count();
            writeln!(
                f,
                "{word}{:pad$}  {:>8.4}  {:>6}  {:>6}  {:>6}",
                "", s.ari, s.n_contexts, s.k_gold, s.k_pred
            )?;
        }
        writeln!(f, "aggregate_macro     {:.4}", self.aggregate_macro)?;
        write!(f, "aggregate_weighted  {:.4}  (headline)", self.aggregate_weighted)
    }
}

fn distinct<T: Hash + Eq>(items: impl IntoIterator<Item = T>) -> usize {
    items.into_iter().collect::<std::collections::HashSet<_>>().len()
}

/// Scores every query word separately, then aggregates.
pub fn evaluate(records: &[ContextRecord]) -> Result<EvaluationReport, EvalError> {
    let mut groups: BTreeMap<&str, (Vec<&str>, Vec<&str>)> = BTreeMap::new();
    for r in records {
        let gold = r
            .gold_sense_id
            .as_deref()
            .ok_or_else(|| EvalError::MissingGold(r.context_id.clone()))?;
        let pred = r
            .predicted_sense_id
            .as_deref()
            .ok_or_else(|| EvalError::MissingPrediction(r.context_id.clone()))?;
        let entry = groups.entry(r.query_word.as_str()).or_default();
        entry.0.push(gold);
        entry.1.push(pred);
    }
    if groups.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut per_word = BTreeMap::new();
    for (word, (gold, pred)) in groups {
        let ari = adjusted_rand_index(&gold, &pred)?;
        per_word.insert(
            word.to_owned(),
            WordScore {
                ari,
                n_contexts: gold.len(),
                k_gold: distinct(&gold),
                k_pred: distinct(&pred),
            },
        );
    }
    let n_words = per_word.len() as f64;
    let aggregate_macro = per_word.values().map(|s| s.ari).sum::<f64>() / n_words;
    let total: usize = per_word.values().map(|s| s.n_contexts).sum();
    let aggregate_weighted = per_word
        .values()
        .map(|s| s.ari * s.n_contexts as f64)
        .sum::<f64>()
        / total as f64;
    Ok(EvaluationReport {
        per_word,
        aggregate_macro,
        aggregate_weighted,
    })
}

/// Projects the rows of `x` onto their top two principal axes.
///
/// Rows are centred first. The sign of each axis is fixed by making its
/// largest-magnitude loading positive. Data with a single column gets a zero
/// second coordinate.
pub fn project_2d(x: ArrayView2<'_, f64>) -> Result<Array2<f64>, EvalError> {
    let (n, dim) = x.dim();
    if n < 2 {
        return Err(EvalError::TooFewRows(n));
    }
    let mean = x.mean_axis(Axis(0)).expect("n >= 2");
    let centred = &x - &mean;

    // Decompose whichever Gram matrix is smaller; both share their non-zero spectrum.
    let axes: Array2<f64> = if dim <= n {
        let eig = symmetric_eigen(centred.t().dot(&centred).view())?;
        let take = dim.min(2);
        let mut axes = Array2::zeros((dim, 2));
        for c in 0..take {
            axes.column_mut(c).assign(&eig.vectors.column(dim - 1 - c));
        }
        axes
    } else {
        let eig = symmetric_eigen(centred.dot(&centred.t()).view())?;
        let mut axes = Array2::zeros((dim, 2));
        for c in 0..2 {
            let lambda = eig.values[n - 1 - c];
            if lambda <= 1e-12 * eig.values[n - 1].abs().max(f64::MIN_POSITIVE) {
                continue;
            }
            let loading = centred.t().dot(&eig.vectors.column(n - 1 - c)) / lambda.sqrt();
            axes.column_mut(c).assign(&loading);
        }
        axes
    };

    let mut axes = axes;
    for mut axis in axes.columns_mut() {
        let mut lead = 0.0f64;
        for &v in axis.iter() {
            if v.abs() > lead.abs() {
                lead = v;
            }
        }
        if lead < 0.0 {
            axis.mapv_inplace(|v| -v);
        }
    }
    Ok(centred.dot(&axes))
}

/// Writes `context_id,x,y,gold_sense_id,predicted_sense_id` rows.
pub fn write_projection_csv<W: Write>(
    records: &[&ContextRecord],
    coords: ArrayView2<'_, f64>,
    mut w: W,
    header: bool,
) -> std::io::Result<()> {
    if header {
        writeln!(w, "context_id,x,y,gold_sense_id,predicted_sense_id")?;
    }
    for (r, xy) in records.iter().zip(coords.rows()) {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.context_id,
            xy[0],
            xy[1],
            r.gold_sense_id.as_deref().unwrap_or(""),
            r.predicted_sense_id.as_deref().unwrap_or("")
        )?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ari(g: &[u32], p: &[u32]) -> f64 {
        adjusted_rand_index(g, p).unwrap()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(ari(&[0, 0, 1, 1], &[1, 1, 0, 0]), 1.0);
        assert_eq!(ari(&[0, 0, 1, 1], &[0, 0, 0, 0]), 0.0);
        assert!((ari(&[0, 0, 1, 1, 1], &[0, 0, 1, 1, 0]) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_partitions() {
        assert_eq!(ari(&[3], &[9]), 1.0);
        assert_eq!(ari(&[1, 1, 1], &[2, 2, 2]), 1.0);
        assert_eq!(ari(&[1, 2, 3], &[4, 5, 6]), 1.0);
        assert_eq!(ari(&[1, 1, 1], &[1, 2, 3]), 0.0);
    }

    #[test]
    fn errors() {
        assert_eq!(
            adjusted_rand_index(&[1, 2], &[1]),
            Err(EvalError::LengthMismatch { gold: 2, pred: 1 })
        );
        assert_eq!(adjusted_rand_index::<u8, u8>(&[], &[]), Err(EvalError::Empty));
    }

    #[test]
    fn opaque_string_labels() {
        assert_eq!(adjusted_rand_index(&["x", "x", "y"], &[7, 7, 1]).unwrap(), 1.0);
    }

    fn record(word: &str, id: usize, gold: &str, pred: &str) -> ContextRecord {
        let mut r = ContextRecord::new(format!("{word}{id}"), word, "");
        r.gold_sense_id = Some(gold.into());
        r.predicted_sense_id = Some(pred.into());
        r
    }

    #[test]
    fn perfect_single_word() {
        let recs = vec![record("лук", 0, "1", "0"), record("лук", 1, "2", "1")];
        let rep = evaluate(&recs).unwrap();
        assert_eq!(rep.per_word["лук"].ari, 1.0);
        assert_eq!(rep.aggregate_macro, 1.0);
        assert_eq!(rep.aggregate_weighted, 1.0);
    }

    #[test]
    fn macro_and_weighted_aggregates() {
        let mut recs = Vec::new();
        for i in 0..10 {
            let s = if i < 5 { "a" } else { "b" };
            recs.push(record("one", i, s, s));
        }
        for i in 0..30 {
            let g = if i < 15 { "a" } else { "b" };
            recs.push(record("two", i, g, "0"));
        }
        let rep = evaluate(&recs).unwrap();
        assert_eq!(rep.per_word["one"].ari, 1.0);
        assert_eq!(rep.per_word["two"].ari, 0.0);
        assert_eq!(rep.per_word["two"].k_pred, 1);
        assert_eq!(rep.aggregate_macro, 0.5);
        assert_eq!(rep.aggregate_weighted, 0.25);
        let json: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(json["aggregate_weighted"], 0.25);
        assert!(json["per_word"]["two"].is_object());
        assert!(rep.to_string().contains("aggregate_weighted  0.2500"));
    }

    #[test]
    fn evaluate_requires_labels() {
        let mut r = record("w", 0, "a", "a");
        r.predicted_sense_id = None;
        assert!(matches!(evaluate(&[r]), Err(EvalError::MissingPrediction(_))));
        assert_eq!(evaluate(&[]), Err(EvalError::Empty));
    }

    fn pairwise(x: ArrayView2<'_, f64>) -> Vec<f64> {
        let n = x.nrows();
        let mut d = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                d.push((&x.row(i) - &x.row(j)).mapv(|v| v * v).sum().sqrt());
            }
        }
        d
    }

    #[test]
    fn planar_data_keeps_distances() {
        // Points in the plane spanned by two orthonormal directions of R^4.
        let u = array![0.5, 0.5, 0.5, 0.5];
        let v = array![0.5, -0.5, 0.5, -0.5];
        let coords = [(0.0, 0.0), (3.0, 1.0), (-2.0, 4.0), (1.0, -1.5), (0.5, 2.0)];
        let mut x = Array2::zeros((coords.len(), 4));
        for (i, (a, b)) in coords.iter().enumerate() {
            x.row_mut(i).assign(&(&u * *a + &v * *b + 1.0));
        }
        let p = project_2d(x.view()).unwrap();
        for (a, b) in pairwise(x.view()).iter().zip(pairwise(p.view())) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn collinear_points_have_no_second_coordinate() {
        let x = array![[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [-1.0, -2.0, -3.0]];
        let p = project_2d(x.view()).unwrap();
        assert!(p.column(1).iter().all(|y| y.abs() < 1e-9));
    }

    #[test]
    fn wide_data_uses_the_dual_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Array2::from_shape_fn((4, 9), |_| rng.random_range(-1.0..1.0));
        let p = project_2d(x.view()).unwrap();
        let centred = &x - &x.mean_axis(Axis(0)).unwrap();
        let cov = centred.t().dot(&centred) / 3.0;
        let eig = symmetric_eigen(cov.view()).unwrap();
        let var = p.mapv(|v| v * v).sum() / 3.0;
        assert!((var - eig.values[8] - eig.values[7]).abs() < 1e-9);
    }

    #[test]
    fn projection_needs_two_rows() {
        assert_eq!(project_2d(array![[1.0, 2.0]].view()), Err(EvalError::TooFewRows(1)));
        let one_col = project_2d(array![[1.0], [3.0]].view()).unwrap();
        assert_eq!(one_col.column(1).to_vec(), vec![0.0, 0.0]);
    }
}
