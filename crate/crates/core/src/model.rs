//! The black-box surface: anything that maps rows to 0/1 labels. Trees
//! and forests implement it; externally supplied prediction files plug in
//! through [`predictions_from_file`], so the two models never need to be
//! opened up.

use std::path::Path;

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::forest::{predict_forest, RandomForestModel};
use crate::tree::{predict_tree, CartTree};

pub trait BinaryClassifier: Sync {
    fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u8>>;
}

impl BinaryClassifier for CartTree {
    fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u8>> {
        predict_tree(self, x)
    }
}

impl BinaryClassifier for RandomForestModel {
    fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u8>> {
        predict_forest(self, x)
    }
}

/// Reads one 0/1 prediction per line, row-aligned with the dataset the
/// predictions were made for.
pub fn predictions_from_file(path: &Path) -> Result<Vec<u8>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "0" => labels.push(0),
            "1" => labels.push(1),
            other => {
                return Err(Error::NonBinaryPrediction {
                    path: path.into(),
                    line: i + 1,
                    value: other.to_string(),
                })
            }
        }
    }
    Ok(labels)
}

/// One prediction per line, the mirror image of [`predictions_from_file`].
pub fn write_predictions(path: &Path, labels: &[u8]) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 2);
    for &y in labels {
        out.push(if y == 0 { '0' } else { '1' });
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Checks row alignment between a prediction vector and a dataset.
pub fn check_alignment(predictions: &[u8], x: &FeatureMatrix, what: &str) -> Result<()> {
    if predictions.len() != x.n_rows() {
        return Err(Error::LengthMismatch {
            expected: x.n_rows(),
            actual: predictions.len(),
            context: what.to_string(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prediction_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("preds.txt");
        let labels = vec![0u8, 1, 1, 0, 1];
        write_predictions(&path, &labels).unwrap();
        assert_eq!(predictions_from_file(&path).unwrap(), labels);
    }

    #[test]
    fn rejects_non_binary_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("preds.txt");
        std::fs::write(&path, "0\n2\n").unwrap();
        assert!(matches!(
            predictions_from_file(&path),
            Err(Error::NonBinaryPrediction { line: 2, .. })
        ));
    }

    #[test]
    fn alignment_check_reports_length() {
        let x = FeatureMatrix::new(vec!["a".into()], vec![vec![1.0], vec![2.0]], None).unwrap();
        assert!(check_alignment(&[0, 1], &x, "preds").is_ok());
        assert!(matches!(
            check_alignment(&[0], &x, "preds"),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
