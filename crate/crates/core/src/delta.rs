//! The disagreement dataset: rows drawn from the two models' training
//! sets, labeled 1 where the models' predictions differ, plus the
//! interpretability-controlled surrogate tree fitted on it.

use std::collections::HashMap;

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::model::BinaryClassifier;
use crate::tree::{fit_cart, CartTree, FeaturesPerSplit, MinSamples, TreeParams};

/// Whether exact-duplicate rows of the union are kept once or per
/// occurrence. The retraining protocol makes the first training set a
/// literal subset of the second, so set semantics avoids double-weighting
/// it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnionMode {
    Set,
    Multiset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    FromF,
    FromG,
    Both,
}

/// Rows and frozen disagreement labels. The labels are computed from the
/// two models once, at construction; the dataset never re-queries them.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaDataset {
    pub x: FeatureMatrix,
    pub y: Vec<u8>,
    pub provenance: Vec<Provenance>,
}

impl DeltaDataset {
    pub fn n_rows(&self) -> usize {
        self.x.n_rows()
    }

    pub fn positive_rate(&self) -> f64 {
        if self.y.is_empty() {
            0.0
        } else {
            self.y.iter().filter(|&&v| v == 1).count() as f64 / self.y.len() as f64
        }
    }

    /// The rows with the disagreement labels attached, ready for
    /// splitting and tree fitting.
    pub fn labeled(&self) -> FeatureMatrix {
        self.x
            .with_labels(self.y.clone())
            .expect("y is row-aligned by construction")
    }

    /// CSV rendering with the disagreement label as the last column.
    pub fn to_csv_string(&self) -> String {
        self.labeled().to_csv_string("y_delta")
    }
}

/// Elementwise disagreement (XOR) of two prediction vectors.
pub fn delta_labels(pred_f: &[u8], pred_g: &[u8]) -> Result<Vec<u8>> {
    if pred_f.len() != pred_g.len() {
        return Err(Error::LengthMismatch {
            expected: pred_f.len(),
            actual: pred_g.len(),
            context: "prediction vectors".into(),
        });
    }
    Ok(pred_f
        .iter()
        .zip(pred_g)
        .map(|(&a, &b)| a ^ b)
        .collect())
}

fn row_key(row: &[f64]) -> Vec<u64> {
    row.iter().map(|v| v.to_bits()).collect()
}

fn union_rows(
    x_f: &FeatureMatrix,
    x_g: &FeatureMatrix,
    mode: UnionMode,
) -> Result<(FeatureMatrix, Vec<Provenance>)> {
    if x_f.feature_names() != x_g.feature_names() {
        return Err(Error::FeatureMismatch(format!(
            "{:?} vs {:?}",
            x_f.feature_names(),
            x_g.feature_names()
        )));
    }
    let mut rows: Vec<usize> = Vec::new();
    let mut provenance: Vec<Provenance> = Vec::new();
    match mode {
        UnionMode::Multiset => {
            rows.extend(0..x_f.n_rows());
            provenance.extend(std::iter::repeat(Provenance::FromF).take(x_f.n_rows()));
            rows.extend(x_f.n_rows()..x_f.n_rows() + x_g.n_rows());
            provenance.extend(std::iter::repeat(Provenance::FromG).take(x_g.n_rows()));
        }
        UnionMode::Set => {
            let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
            for i in 0..x_f.n_rows() {
                if !seen.contains_key(&row_key(x_f.row(i))) {
                    seen.insert(row_key(x_f.row(i)), rows.len());
                    rows.push(i);
                    provenance.push(Provenance::FromF);
                }
            }
            for i in 0..x_g.n_rows() {
                match seen.get(&row_key(x_g.row(i))) {
                    Some(&at) => {
                        if provenance[at] == Provenance::FromF {
                            provenance[at] = Provenance::Both;
                        }
                    }
                    None => {
                        seen.insert(row_key(x_g.row(i)), rows.len());
                        rows.push(x_f.n_rows() + i);
                        provenance.push(Provenance::FromG);
                    }
                }
            }
        }
    }
    let combined = x_f.without_labels().concat_rows(&x_g.without_labels())?;
    Ok((combined.take_rows(&rows), provenance))
}

/// Builds the disagreement dataset over the union of the two training
/// sets, labeling each row by whether `f` and `g` predict differently.
pub fn build_delta_dataset(
    x_f: &FeatureMatrix,
    x_g: &FeatureMatrix,
    f: &dyn BinaryClassifier,
    g: &dyn BinaryClassifier,
    mode: UnionMode,
) -> Result<DeltaDataset> {
    let (x, provenance) = union_rows(x_f, x_g, mode)?;
    let pred_f = f.predict(&x)?;
    let pred_g = g.predict(&x)?;
    let y = delta_labels(&pred_f, &pred_g)?;
    Ok(DeltaDataset { x, y, provenance })
}

/// Builds the disagreement dataset from externally supplied prediction
/// vectors, row-aligned with `x`. This is the fully model-agnostic path:
/// nothing about the two models is needed beyond their outputs.
pub fn delta_from_predictions(
    x: &FeatureMatrix,
    pred_f: &[u8],
    pred_g: &[u8],
) -> Result<DeltaDataset> {
    crate::model::check_alignment(pred_f, x, "predictions for f")?;
    crate::model::check_alignment(pred_g, x, "predictions for g")?;
    let y = delta_labels(pred_f, pred_g)?;
    let provenance = vec![Provenance::Both; x.n_rows()];
    Ok(DeltaDataset {
        x: x.without_labels(),
        y,
        provenance,
    })
}

/// Fits the surrogate tree on (the training part of) a disagreement
/// dataset: depth-unconstrained CART over all features, with the
/// minimum-samples-per-leaf floor as the single interpretability control.
/// Fractions resolve against the given training rows, rounded up.
pub fn fit_delta_tree(
    x_train: &FeatureMatrix,
    y_train: &[u8],
    min_samples_leaf: MinSamples,
) -> Result<CartTree> {
    let params = TreeParams {
        min_samples_leaf,
        max_depth: None,
        features_per_split: FeaturesPerSplit::All,
        bootstrap: false,
        seed: 0,
    };
    fit_cart(x_train, y_train, &params)
}
