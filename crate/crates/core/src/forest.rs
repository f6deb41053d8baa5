//! Bagged random forest over [`CartTree`] members: bootstrap resamples,
//! √d features per split, majority vote. Member seeds derive from the
//! master seed, so parallel and serial training produce identical forests.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::seeds::{self, SeedRng};
use crate::tree::{fit_on_rows, CartTree, TreeParams};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForestModel {
    trees: Vec<CartTree>,
    n_features: usize,
}

impl RandomForestModel {
    pub fn trees(&self) -> &[CartTree] {
        &self.trees
    }

    pub fn n_estimators(&self) -> usize {
        self.trees.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Majority vote over the member trees; ties go to class 0.
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let votes1: usize = self
            .trees
            .iter()
            .map(|t| t.predict_row(row) as usize)
            .sum();
        u8::from(2 * votes1 > self.trees.len())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "forest v1");
        let _ = writeln!(out, "features {}", self.n_features);
        let _ = writeln!(out, "trees {}", self.trees.len());
        for tree in &self.trees {
            out.push_str(&tree.to_text());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |detail: String| Error::Parse {
            what: "forest",
            detail,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
        if header.trim() != "forest v1" {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let n_features: usize = lines
            .next()
            .and_then(|l| l.trim().strip_prefix("features"))
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| bad("bad features line".into()))?;
        let n_trees: usize = lines
            .next()
            .and_then(|l| l.trim().strip_prefix("trees"))
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| bad("bad trees line".into()))?;
        let mut trees = Vec::with_capacity(n_trees);
        for _ in 0..n_trees {
            trees.push(CartTree::parse_lines(&mut lines)?);
        }
        if trees.iter().any(|t| t.n_features() != n_features) {
            return Err(bad("member feature count mismatch".into()));
        }
        Ok(RandomForestModel { trees, n_features })
    }
}

/// Trains `n_estimators` trees, each on a bootstrap resample (when
/// `params.bootstrap`) with `params.features_per_split` features per
/// split. Members fit in parallel; member seeds come from `seed`, so the
/// result does not depend on scheduling.
pub fn fit_forest(
    x: &FeatureMatrix,
    y: &[u8],
    n_estimators: usize,
    params: &TreeParams,
    seed: u64,
) -> Result<RandomForestModel> {
    let n = x.n_rows();
    if n == 0 {
        return Err(Error::TooFewRows { need: 1, got: 0 });
    }
    if y.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: y.len(),
            context: "labels".into(),
        });
    }
    if n_estimators == 0 {
        return Err(Error::InvalidMatrix("n_estimators must be >= 1".into()));
    }
    let min_leaf = params.min_samples_leaf.resolve(n)?;
    if min_leaf > n {
        return Err(Error::MinSamplesExceedsRows { min: min_leaf, n });
    }

    let columns = x.columns();
    let trees: Vec<CartTree> = (0..n_estimators)
        .into_par_iter()
        .map(|t| {
            let mut rng: SeedRng = seeds::rng(seed, &[t as u64]);
            let rows: Vec<u32> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n as u32)).collect()
            } else {
                (0..n as u32).collect()
            };
            fit_on_rows(&columns, y, &rows, min_leaf, params, &mut rng)
        })
        .collect();

    Ok(RandomForestModel {
        trees,
        n_features: x.n_features(),
    })
}

/// Predicts a label per row by majority vote.
pub fn predict_forest(forest: &RandomForestModel, x: &FeatureMatrix) -> Result<Vec<u8>> {
    if x.n_features() != forest.n_features {
        return Err(Error::FeatureMismatch(format!(
            "forest expects {} features, matrix has {}",
            forest.n_features,
            x.n_features()
        )));
    }
    Ok((0..x.n_rows())
        .map(|i| forest.predict_row(x.row(i)))
        .collect())
}
