//! Explains the behavioral differences between two binary classifiers.
//!
//! Given two models `f` and `g` over the same numeric feature space (or
//! just their predictions), the crate labels every data row by whether
//! the models disagree on it, fits a depth-unconstrained decision tree to
//! that disagreement labeling, and reads the tree's class-1 branches back
//! as a compact, non-overlapping set of interval rules — one rule per
//! region of the input space where the two models behave differently.
//! The minimum-samples-per-leaf floor of the surrogate tree is the single
//! knob trading fidelity against rule-set interpretability.
//!
//! The crate also ships the drift benchmark used to evaluate that
//! trade-off: an AGRAWAL data generator, three perturbation scenarios
//! (Gaussian noise / permutation / shift) that manufacture a retrained
//! model pair, from-scratch CART and random-forest black boxes, and a
//! seeded scenario × min-samples × seed experiment grid with aggregation.

pub mod data;
pub mod delta;
pub mod error;
pub mod experiment;
pub mod forest;
pub mod metrics;
pub mod model;
pub mod rules;
pub mod seeds;
pub mod synth;
pub mod tree;

pub use data::{
    compute_domain, inverse_transform_threshold, load_csv, split_at_random_point, standardize,
    subsample_stream, train_test_split, CsvLoad, DomainBounds, FeatureMatrix, Scaler, ScalerEntry,
};
pub use delta::{
    build_delta_dataset, delta_from_predictions, delta_labels, fit_delta_tree, DeltaDataset,
    Provenance, UnionMode,
};
pub use error::{Error, Result};
pub use experiment::{
    aggregate, cell_seed, emit_table, parse_table_csv, results_csv, run_grid, run_single,
    AggregateRow, DatasetSource, ExperimentResult, GridConfig, GridReport, Manifest, ManifestCell,
    MinSamplesBasis, NormalizationBasis, RunConfig, RunOutcome, Stat, TableFormat,
};
pub use forest::{fit_forest, predict_forest, RandomForestModel};
pub use metrics::{
    fidelity_metrics, interpretability_metrics, FidelityReport, InterpretabilityReport,
};
pub use model::{predictions_from_file, write_predictions, BinaryClassifier};
pub use rules::{
    denormalize, extract_rules, merge_conditions, render_text, rule_coverage, to_document, Bound,
    ConditionOp, Interval, PathCondition, Rule, RuleSet, RuleSetDocument,
};
pub use synth::{
    agrawal_generate, make_model_pair, perturb_noise, perturb_permutation, perturb_shift,
    FeatureCount, ModelPairData, ScenarioKind, ScenarioSpec,
};
pub use tree::{fit_cart, predict_tree, CartTree, FeaturesPerSplit, MinSamples, Node, TreeParams};
