//! The benchmark harness: runs the full retraining protocol end to end
//! for one (scenario, min-samples, seed) cell, sweeps the grid over many
//! seeds, aggregates with zero-rule exclusion, and renders the result
//! tables and the run manifest.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{
    compute_domain, random_split_index, standardize, subsample_stream, train_test_split,
    FeatureMatrix, Scaler,
};
use crate::delta::{build_delta_dataset, UnionMode};
use crate::error::{Error, Result};
use crate::forest::fit_forest;
use crate::metrics::{
    fidelity_metrics, interpretability_metrics, FidelityReport, InterpretabilityReport,
};
use crate::rules::{extract_rules, RuleSet};
use crate::seeds;
use crate::synth::{
    agrawal_generate, make_model_pair, FeatureCount, ScenarioKind, ScenarioSpec,
};
use crate::tree::{predict_tree, FeaturesPerSplit, MinSamples, TreeParams};

const TAG_DATA: u64 = 0x20;
const TAG_PAIR: u64 = 0x21;
const TAG_FOREST_F: u64 = 0x22;
const TAG_FOREST_G: u64 = 0x23;
const TAG_DELTA_SPLIT: u64 = 0x24;
const TAG_PAIR_SPLIT: u64 = 0x10; // must match the pair op's split tag

/// Where the stream comes from.
#[derive(Debug, Clone)]
pub enum DatasetSource {
    Agrawal { function_id: u8 },
    Csv { id: String, matrix: FeatureMatrix },
}

impl DatasetSource {
    pub fn id(&self) -> String {
        match self {
            DatasetSource::Agrawal { function_id } => format!("agrawal{function_id}"),
            DatasetSource::Csv { id, .. } => id.clone(),
        }
    }
}

/// Which rows the standardization statistics come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationBasis {
    /// The whole sub-stream, before perturbation (the default: one shared
    /// coordinate system, so a shift lands visibly outside the pre-drift
    /// range).
    FullStream,
    /// Only the first split's rows.
    FirstSplit,
}

/// Which row count fractional min-samples settings resolve against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinSamplesBasis {
    TrainSplit,
    FullDelta,
}

/// Fixed protocol parameters of a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub substream: usize,
    pub n_estimators: usize,
    pub test_fraction: f64,
    pub noise_sigma: f64,
    pub shift_delta: f64,
    pub k_features: FeatureCount,
    pub union_mode: UnionMode,
    pub normalization: NormalizationBasis,
    pub min_samples_basis: MinSamplesBasis,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            substream: 10_000,
            n_estimators: 100,
            test_fraction: 0.3,
            noise_sigma: crate::synth::DEFAULT_NOISE_SIGMA,
            shift_delta: crate::synth::DEFAULT_SHIFT_DELTA,
            k_features: FeatureCount::Random,
            union_mode: UnionMode::Set,
            normalization: NormalizationBasis::FullStream,
            min_samples_basis: MinSamplesBasis::TrainSplit,
        }
    }
}

impl RunConfig {
    pub fn scenario_spec(&self, kind: ScenarioKind) -> Result<ScenarioSpec> {
        ScenarioSpec::new(kind, self.k_features)
    }

    /// The three drift scenarios with this config's parameters.
    pub fn scenario_by_id(&self, id: &str) -> Result<ScenarioKind> {
        match id.to_ascii_lowercase().as_str() {
            "s1" | "noise" => Ok(ScenarioKind::Noise {
                sigma: self.noise_sigma,
            }),
            "s2" | "permute" | "permutation" => Ok(ScenarioKind::Permutation),
            "s3" | "shift" => Ok(ScenarioKind::Shift {
                delta: self.shift_delta,
            }),
            other => Err(Error::InvalidScenario(format!("unknown scenario {other:?}"))),
        }
    }
}

/// One grid cell: all seven metrics plus bookkeeping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub dataset: String,
    pub scenario: String,
    pub min_samples: MinSamples,
    pub seed: u64,
    pub resolved_min_samples: usize,
    pub n_delta_rows: usize,
    pub n_delta_train: usize,
    pub delta_positive_rate: f64,
    pub perturbed_features: Vec<usize>,
    pub fidelity: FidelityReport,
    pub interpretability: InterpretabilityReport,
    /// Mean over rules of training support / training rows; the
    /// training-basis counterpart of the whole-set coverage scan.
    pub mean_support_fraction: Option<f64>,
    #[serde(skip)]
    pub duration: Duration,
}

/// Everything a single run produced, including the rule set (in scaled
/// units) and the scaler to map it back.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub result: ExperimentResult,
    pub rules: RuleSet,
    pub scaler: Scaler,
}

/// Executes the whole protocol for one cell: sub-sample, standardize,
/// split, perturb, fit the two forests, build the disagreement dataset,
/// split it 70/30, fit the surrogate, extract rules, and measure both
/// metric families. Every random choice derives from `seed`.
pub fn run_single(
    source: &DatasetSource,
    scenario: ScenarioKind,
    min_samples: MinSamples,
    seed: u64,
    config: &RunConfig,
) -> Result<RunOutcome> {
    let started = Instant::now();
    let spec = config.scenario_spec(scenario)?;

    let stream = match source {
        DatasetSource::Agrawal { function_id } => agrawal_generate(
            config.substream,
            *function_id,
            seeds::derive(seed, &[TAG_DATA]),
        )?,
        DatasetSource::Csv { matrix, .. } => {
            subsample_stream(matrix, config.substream, seeds::derive(seed, &[TAG_DATA]))?
        }
    };

    let pair_seed = seeds::derive(seed, &[TAG_PAIR]);
    let (scaled, scaler) = match config.normalization {
        NormalizationBasis::FullStream => standardize(&stream)?,
        NormalizationBasis::FirstSplit => {
            // Compute statistics on the first split only (drawing the same
            // split index the pair op will draw), then apply them to the
            // whole stream.
            let k = random_split_index(
                stream.n_rows(),
                seeds::derive(pair_seed, &[TAG_PAIR_SPLIT]),
            )?;
            let (_, scaler) = standardize(&stream.slice_rows(0..k))?;
            let names: Vec<String> = scaler.entries().iter().map(|e| e.name.clone()).collect();
            let kept: Vec<usize> = names
                .iter()
                .map(|n| {
                    stream
                        .feature_names()
                        .iter()
                        .position(|f| f == n)
                        .expect("scaler features come from the stream")
                })
                .collect();
            let n = stream.n_rows();
            let mut rows = Vec::with_capacity(n);
            for i in 0..n {
                rows.push(
                    kept.iter()
                        .enumerate()
                        .map(|(out_j, &j)| {
                            (stream.value(i, j) - scaler.entries()[out_j].mean)
                                / scaler.entries()[out_j].std
                        })
                        .collect::<Vec<f64>>(),
                );
            }
            let scaled = FeatureMatrix::new(names, rows, stream.labels().map(|y| y.to_vec()))?;
            (scaled, scaler)
        }
    };

    let pair = make_model_pair(&scaled, &spec, pair_seed)?;
    let forest_params = TreeParams {
        min_samples_leaf: MinSamples::Count(1),
        max_depth: None,
        features_per_split: FeaturesPerSplit::Sqrt,
        bootstrap: true,
        seed: 0,
    };
    let y_f = pair.x_f.labels().expect("labeled by protocol").to_vec();
    let y_g = pair.x_g.labels().expect("labeled by protocol").to_vec();
    let model_f = fit_forest(
        &pair.x_f.without_labels(),
        &y_f,
        config.n_estimators,
        &forest_params,
        seeds::derive(seed, &[TAG_FOREST_F]),
    )?;
    let model_g = fit_forest(
        &pair.x_g.without_labels(),
        &y_g,
        config.n_estimators,
        &forest_params,
        seeds::derive(seed, &[TAG_FOREST_G]),
    )?;

    let delta = build_delta_dataset(&pair.x_f, &pair.x_g, &model_f, &model_g, config.union_mode)?;
    let labeled = delta.labeled();
    let (train, test) = train_test_split(
        &labeled,
        config.test_fraction,
        seeds::derive(seed, &[TAG_DELTA_SPLIT]),
    )?;

    let basis_rows = match config.min_samples_basis {
        MinSamplesBasis::TrainSplit => train.n_rows(),
        MinSamplesBasis::FullDelta => delta.n_rows(),
    };
    let resolved = min_samples.resolve(basis_rows)?;
    if resolved > train.n_rows() {
        return Err(Error::MinSamplesExceedsRows {
            min: resolved,
            n: train.n_rows(),
        });
    }
    let y_train = train.labels().expect("delta labels").to_vec();
    let surrogate = crate::delta::fit_delta_tree(
        &train.without_labels(),
        &y_train,
        MinSamples::Count(resolved),
    )?;

    let domain = compute_domain(&delta.x);
    let rules = extract_rules(&surrogate, &domain, delta.x.feature_names())?
        .with_coverage(&delta.x);

    let y_test = test.labels().expect("delta labels").to_vec();
    let test_features = test.without_labels();
    let tree_preds = predict_tree(&surrogate, &test_features)?;
    let rule_preds = rules.predict(&test_features);
    if tree_preds != rule_preds {
        return Err(Error::Internal(
            "rule-set prediction differs from surrogate tree prediction".into(),
        ));
    }
    let fidelity = fidelity_metrics(&tree_preds, &y_test)?;
    let interpretability = interpretability_metrics(&rules, &delta.x);
    let mean_support_fraction = if rules.n_rules() > 0 {
        Some(
            rules.rules.iter().map(|r| r.support as f64).sum::<f64>()
                / rules.n_rules() as f64
                / train.n_rows() as f64,
        )
    } else {
        None
    };

    let result = ExperimentResult {
        dataset: source.id(),
        scenario: scenario.id().to_string(),
        min_samples,
        seed,
        resolved_min_samples: resolved,
        n_delta_rows: delta.n_rows(),
        n_delta_train: train.n_rows(),
        delta_positive_rate: delta.positive_rate(),
        perturbed_features: pair.perturbed_features.clone(),
        fidelity,
        interpretability,
        mean_support_fraction,
        duration: started.elapsed(),
    };
    Ok(RunOutcome {
        result,
        rules,
        scaler,
    })
}

// --- Grid ---------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub dataset: DatasetSource,
    pub scenarios: Vec<String>,
    pub grid: Vec<MinSamples>,
    pub n_seeds: usize,
    pub master_seed: u64,
    pub run: RunConfig,
}

/// Mean, sample standard deviation (0 when n <= 1) and the number of
/// contributing runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stat {
    fn from_values(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Stat { mean, std, n })
    }
}

/// Per-(scenario, min-samples) aggregate over seeds. Fidelity,
/// length and coverage average only the runs that extracted at least one
/// rule (and, for precision/recall, where the metric is defined); the
/// rule count averages every run, zero-rule runs included.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateRow {
    pub scenario: String,
    pub min_samples: MinSamples,
    pub n_runs: usize,
    pub n_failed: usize,
    pub n_with_rules: usize,
    pub accuracy: Option<Stat>,
    pub precision: Option<Stat>,
    pub recall: Option<Stat>,
    pub num_rules: Option<Stat>,
    pub mean_length: Option<Stat>,
    pub mean_coverage: Option<Stat>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestCell {
    pub scenario: String,
    pub min_samples: MinSamples,
    pub seed_index: usize,
    pub run_seed: u64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<ExperimentResult>,
}

/// Config echo + per-cell seeds and results. Bit-exact for a given
/// (config, master seed): timings are deliberately excluded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub dataset: String,
    pub scenarios: Vec<String>,
    pub grid: Vec<MinSamples>,
    pub n_seeds: usize,
    pub master_seed: u64,
    pub run: RunConfig,
    pub cells: Vec<ManifestCell>,
}

#[derive(Debug)]
pub struct GridReport {
    pub cells: Vec<ManifestCell>,
    pub aggregates: Vec<AggregateRow>,
    pub manifest: Manifest,
}

/// The seed for one grid cell. Tags come from the scenario identity and
/// the min-samples value (not their positions), so extending the grid
/// never changes existing cells' streams.
pub fn cell_seed(master: u64, scenario: ScenarioKind, min_samples: MinSamples, seed_index: usize) -> u64 {
    let (kind_tag, value_bits) = match min_samples {
        MinSamples::Count(c) => (0u64, c as u64),
        MinSamples::Fraction(f) => (1u64, f.to_bits()),
    };
    seeds::derive(
        master,
        &[scenario.seed_tag(), kind_tag, value_bits, seed_index as u64],
    )
}

/// Runs the whole scenario × min-samples × seed grid. Cells run in
/// parallel; failures are recorded per cell, not fatal. `progress` fires
/// once per finished cell with (done, total, cell summary).
pub fn run_grid<F>(config: &GridConfig, progress: F) -> Result<GridReport>
where
    F: Fn(usize, usize, &str) + Sync,
{
    let scenarios: Vec<ScenarioKind> = config
        .scenarios
        .iter()
        .map(|s| config.run.scenario_by_id(s))
        .collect::<Result<Vec<_>>>()?;
    if config.n_seeds == 0 {
        return Err(Error::InvalidScenario("n_seeds must be >= 1".into()));
    }

    let mut cells = Vec::new();
    for &scenario in &scenarios {
        for &min_samples in &config.grid {
            for seed_index in 0..config.n_seeds {
                let run_seed = cell_seed(config.master_seed, scenario, min_samples, seed_index);
                cells.push((scenario, min_samples, seed_index, run_seed));
            }
        }
    }

    let total = cells.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let source = &config.dataset;
    let outcomes: Vec<ManifestCell> = cells
        .par_iter()
        .map(|&(scenario, min_samples, seed_index, run_seed)| {
            let outcome = run_single(source, scenario, min_samples, run_seed, &config.run);
            let finished = 1 + done.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            match outcome {
                Ok(out) => {
                    let r = &out.result;
                    progress(
                        finished,
                        total,
                        &format!(
                            "{} min_samples={} seed {}: {} rules, acc {:.3} ({:.1}s)",
                            r.scenario,
                            r.min_samples,
                            seed_index,
                            r.interpretability.num_rules,
                            r.fidelity.accuracy,
                            r.duration.as_secs_f64()
                        ),
                    );
                    ManifestCell {
                        scenario: scenario.id().to_string(),
                        min_samples,
                        seed_index,
                        run_seed,
                        status: "ok".into(),
                        error: None,
                        result: Some(out.result),
                    }
                }
                Err(e) => {
                    progress(
                        finished,
                        total,
                        &format!(
                            "{} min_samples={} seed {}: FAILED: {e}",
                            scenario.id(),
                            min_samples,
                            seed_index
                        ),
                    );
                    ManifestCell {
                        scenario: scenario.id().to_string(),
                        min_samples,
                        seed_index,
                        run_seed,
                        status: "error".into(),
                        error: Some(e.to_string()),
                        result: None,
                    }
                }
            }
        })
        .collect();

    let results: Vec<ExperimentResult> = outcomes
        .iter()
        .filter_map(|c| c.result.clone())
        .collect();
    let aggregates = aggregate(&scenarios, &config.grid, &results, config.n_seeds);

    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        dataset: source.id(),
        scenarios: config.scenarios.clone(),
        grid: config.grid.clone(),
        n_seeds: config.n_seeds,
        master_seed: config.master_seed,
        run: config.run.clone(),
        cells: outcomes.clone(),
    };

    Ok(GridReport {
        cells: outcomes,
        aggregates,
        manifest,
    })
}

/// Aggregates per-cell results into one row per (scenario, min-samples).
pub fn aggregate(
    scenarios: &[ScenarioKind],
    grid: &[MinSamples],
    results: &[ExperimentResult],
    n_seeds: usize,
) -> Vec<AggregateRow> {
    let mut rows = Vec::new();
    for scenario in scenarios {
        for &min_samples in grid {
            let cell: Vec<&ExperimentResult> = results
                .iter()
                .filter(|r| r.scenario == scenario.id() && r.min_samples == min_samples)
                .collect();
            let with_rules: Vec<&ExperimentResult> = cell
                .iter()
                .copied()
                .filter(|r| r.interpretability.num_rules > 0)
                .collect();
            let collect = |f: &dyn Fn(&ExperimentResult) -> Option<f64>| -> Vec<f64> {
                with_rules.iter().filter_map(|&r| f(r)).collect()
            };
            rows.push(AggregateRow {
                scenario: scenario.id().to_string(),
                min_samples,
                n_runs: cell.len(),
                n_failed: n_seeds.saturating_sub(cell.len()),
                n_with_rules: with_rules.len(),
                accuracy: Stat::from_values(&collect(&|r| Some(r.fidelity.accuracy))),
                precision: Stat::from_values(&collect(&|r| r.fidelity.precision)),
                recall: Stat::from_values(&collect(&|r| r.fidelity.recall)),
                num_rules: Stat::from_values(
                    &cell
                        .iter()
                        .map(|r| r.interpretability.num_rules as f64)
                        .collect::<Vec<_>>(),
                ),
                mean_length: Stat::from_values(&collect(&|r| r.interpretability.mean_length)),
                mean_coverage: Stat::from_values(&collect(&|r| r.interpretability.mean_coverage)),
            });
        }
    }
    rows
}

// --- Rendering ------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Text,
}

impl TableFormat {
    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "text" | "txt" => Ok(TableFormat::Text),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

fn fmt_stat(stat: &Option<Stat>, percent: bool) -> (String, String) {
    match stat {
        None => ("-".into(), "-".into()),
        Some(s) => {
            if percent {
                (
                    format!("{:.2}", s.mean * 100.0),
                    format!("{:.2}", s.std * 100.0),
                )
            } else {
                (format!("{:.2}", s.mean), format!("{:.2}", s.std))
            }
        }
    }
}

const CSV_HEADER: &str = "scenario,min_samples,runs,failed,with_rules,\
acc_mean,acc_std,acc_n,prec_mean,prec_std,prec_n,rec_mean,rec_std,rec_n,\
rules_mean,rules_std,len_mean,len_std,cov_mean_pct,cov_std_pct";

/// Renders aggregate rows as CSV or an aligned text table. Absent metrics
/// render as "-"; coverage renders as a percentage with two decimals.
pub fn emit_table(rows: &[AggregateRow], format: TableFormat) -> String {
    match format {
        TableFormat::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for row in rows {
                let (acc_m, acc_s) = fmt_stat(&row.accuracy, false);
                let (prec_m, prec_s) = fmt_stat(&row.precision, false);
                let (rec_m, rec_s) = fmt_stat(&row.recall, false);
                let (rules_m, rules_s) = fmt_stat(&row.num_rules, false);
                let (len_m, len_s) = fmt_stat(&row.mean_length, false);
                let (cov_m, cov_s) = fmt_stat(&row.mean_coverage, true);
                let opt_n = |s: &Option<Stat>| {
                    s.map(|v| v.n.to_string()).unwrap_or_else(|| "-".into())
                };
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{acc_m},{acc_s},{},{prec_m},{prec_s},{},{rec_m},{rec_s},{},\
                     {rules_m},{rules_s},{len_m},{len_s},{cov_m},{cov_s}",
                    row.scenario,
                    row.min_samples,
                    row.n_runs,
                    row.n_failed,
                    row.n_with_rules,
                    opt_n(&row.accuracy),
                    opt_n(&row.precision),
                    opt_n(&row.recall),
                );
            }
            out
        }
        TableFormat::Text => {
            let mut table: Vec<[String; 8]> = vec![[
                "scenario".into(),
                "min samples".into(),
                "acc".into(),
                "prec".into(),
                "rec".into(),
                "#r".into(),
                "mean #l".into(),
                "mean cov".into(),
            ]];
            for row in rows {
                let pm = |stat: &Option<Stat>, percent: bool| match stat {
                    None => "-".to_string(),
                    Some(_) => {
                        let (m, s) = fmt_stat(stat, percent);
                        if percent {
                            format!("{m}% ± {s}")
                        } else {
                            format!("{m} ± {s}")
                        }
                    }
                };
                table.push([
                    row.scenario.clone(),
                    row.min_samples.to_string(),
                    pm(&row.accuracy, false),
                    pm(&row.precision, false),
                    pm(&row.recall, false),
                    pm(&row.num_rules, false),
                    pm(&row.mean_length, false),
                    pm(&row.mean_coverage, true),
                ]);
            }
            let mut widths = [0usize; 8];
            for row in &table {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            let mut out = String::new();
            for row in &table {
                let line: Vec<String> = row
                    .iter()
                    .zip(&widths)
                    .map(|(cell, w)| format!("{cell:<w$}", w = w))
                    .collect();
                let _ = writeln!(out, "{}", line.join("  "));
            }
            out
        }
    }
}

/// Parses the CSV rendering back into rows (the numeric precision is the
/// rendering's two decimals).
pub fn parse_table_csv(text: &str) -> Result<Vec<AggregateRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse {
        what: "aggregate csv",
        detail: "empty input".into(),
    })?;
    if header != CSV_HEADER {
        return Err(Error::Parse {
            what: "aggregate csv",
            detail: format!("unexpected header {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 20 {
            return Err(Error::Parse {
                what: "aggregate csv",
                detail: format!("row {}: expected 20 cells, got {}", i + 2, cells.len()),
            });
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse {
                what: "aggregate csv",
                detail: format!("row {}: bad {what} {s:?}", i + 2),
            })
        };
        let stat = |m: &str, s: &str, n: &str| -> Result<Option<Stat>> {
            if m == "-" {
                return Ok(None);
            }
            Ok(Some(Stat {
                mean: num(m, "mean")?,
                std: num(s, "std")?,
                n: num(n, "count")? as usize,
            }))
        };
        let pct_stat = |m: &str, s: &str, n: usize| -> Result<Option<Stat>> {
            if m == "-" {
                return Ok(None);
            }
            Ok(Some(Stat {
                mean: num(m, "mean")? / 100.0,
                std: num(s, "std")? / 100.0,
                n,
            }))
        };
        let n_runs: usize = num(cells[2], "runs")? as usize;
        let with_rules: usize = num(cells[4], "with_rules")? as usize;
        rows.push(AggregateRow {
            scenario: cells[0].to_string(),
            min_samples: cells[1].parse()?,
            n_runs,
            n_failed: num(cells[3], "failed")? as usize,
            n_with_rules: with_rules,
            accuracy: stat(cells[5], cells[6], cells[7])?,
            precision: stat(cells[8], cells[9], cells[10])?,
            recall: stat(cells[11], cells[12], cells[13])?,
            num_rules: stat(cells[14], cells[15], &n_runs.to_string())?,
            mean_length: stat(cells[16], cells[17], &with_rules.to_string())?,
            mean_coverage: pct_stat(cells[18], cells[19], with_rules)?,
        });
    }
    Ok(rows)
}

/// Per-run metric rows as CSV; timings are excluded so reruns with the
/// same master seed are byte-identical.
pub fn results_csv(cells: &[ManifestCell]) -> String {
    let mut out = String::from(
        "scenario,min_samples,seed_index,run_seed,status,resolved_min_samples,\
         n_delta_rows,n_delta_train,delta_positive_rate,n_rules,mean_length,\
         mean_coverage,mean_support_fraction,accuracy,precision,recall\n",
    );
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "-".into());
    for cell in cells {
        match &cell.result {
            Some(r) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},ok,{},{},{},{},{},{},{},{},{},{},{}",
                    cell.scenario,
                    cell.min_samples,
                    cell.seed_index,
                    cell.run_seed,
                    r.resolved_min_samples,
                    r.n_delta_rows,
                    r.n_delta_train,
                    r.delta_positive_rate,
                    r.interpretability.num_rules,
                    opt(r.interpretability.mean_length),
                    opt(r.interpretability.mean_coverage),
                    opt(r.mean_support_fraction),
                    r.fidelity.accuracy,
                    opt(r.fidelity.precision),
                    opt(r.fidelity.recall),
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},error,-,-,-,-,-,-,-,-,-,-,-",
                    cell.scenario, cell.min_samples, cell.seed_index, cell.run_seed,
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_result(
        scenario: &str,
        min_samples: MinSamples,
        num_rules: usize,
        accuracy: f64,
        recall: Option<f64>,
    ) -> ExperimentResult {
        ExperimentResult {
            dataset: "test".into(),
            scenario: scenario.into(),
            min_samples,
            seed: 0,
            resolved_min_samples: 1,
            n_delta_rows: 100,
            n_delta_train: 70,
            delta_positive_rate: 0.1,
            perturbed_features: vec![0],
            fidelity: FidelityReport {
                accuracy,
                precision: Some(0.5),
                recall,
                true_pos: 1,
                false_pos: 1,
                true_neg: 1,
                false_neg: 1,
            },
            interpretability: InterpretabilityReport {
                num_rules,
                mean_length: (num_rules > 0).then_some(2.0),
                mean_coverage: (num_rules > 0).then_some(0.05),
            },
            mean_support_fraction: (num_rules > 0).then_some(0.1),
            duration: Duration::ZERO,
        }
    }

    #[test]
    fn aggregation_excludes_zero_rule_runs_from_fidelity_only() {
        let ms = MinSamples::Count(1);
        let results = vec![
            synthetic_result("S1", ms, 0, 0.2, Some(0.1)),
            synthetic_result("S1", ms, 2, 0.9, Some(0.8)),
            synthetic_result("S1", ms, 4, 0.8, Some(0.6)),
        ];
        let rows = aggregate(
            &[ScenarioKind::Noise { sigma: 0.5 }],
            &[ms],
            &results,
            3,
        );
        assert_eq!(rows.len(), 1);
        let row = &rows[0];
        assert_eq!(row.n_runs, 3);
        assert_eq!(row.n_with_rules, 2);
        // Rule count averages all three runs, including the zero.
        let nr = row.num_rules.unwrap();
        assert!((nr.mean - 2.0).abs() < 1e-12);
        assert_eq!(nr.n, 3);
        // Fidelity averages only the two rule-bearing runs.
        let acc = row.accuracy.unwrap();
        assert!((acc.mean - 0.85).abs() < 1e-12);
        assert_eq!(acc.n, 2);
        let rec = row.recall.unwrap();
        assert!((rec.mean - 0.7).abs() < 1e-12);
    }

    #[test]
    fn aggregation_with_no_rules_anywhere_dashes_out() {
        let ms = MinSamples::Fraction(0.25);
        let results = vec![
            synthetic_result("S1", ms, 0, 0.2, None),
            synthetic_result("S1", ms, 0, 0.3, None),
        ];
        let rows = aggregate(&[ScenarioKind::Noise { sigma: 0.5 }], &[ms], &results, 2);
        let row = &rows[0];
        assert!(row.accuracy.is_none());
        assert!(row.mean_length.is_none());
        let nr = row.num_rules.unwrap();
        assert_eq!(nr.mean, 0.0);
        let text = emit_table(&rows, TableFormat::Text);
        assert!(text.contains('-'));
    }

    #[test]
    fn single_seed_std_is_zero() {
        let ms = MinSamples::Count(1);
        let results = vec![synthetic_result("S2", ms, 3, 0.7, Some(0.4))];
        let rows = aggregate(&[ScenarioKind::Permutation], &[ms], &results, 1);
        assert_eq!(rows[0].accuracy.unwrap().std, 0.0);
        assert_eq!(rows[0].num_rules.unwrap().std, 0.0);
    }

    #[test]
    fn csv_rendering_round_trips() {
        let ms1 = MinSamples::Count(1);
        let ms2 = MinSamples::Fraction(0.1);
        let results = vec![
            synthetic_result("S1", ms1, 2, 0.913, Some(0.4)),
            synthetic_result("S1", ms1, 3, 0.957, Some(0.5)),
            synthetic_result("S1", ms2, 0, 0.5, None),
        ];
        let rows = aggregate(
            &[ScenarioKind::Noise { sigma: 0.5 }],
            &[ms1, ms2],
            &results,
            2,
        );
        let csv = emit_table(&rows, TableFormat::Csv);
        let parsed = parse_table_csv(&csv).unwrap();
        assert_eq!(emit_table(&parsed, TableFormat::Csv), csv);
        assert!(matches!(
            TableFormat::from_name("yaml"),
            Err(Error::UnknownFormat(_))
        ));
        assert!(TableFormat::from_name("CSV").is_ok());
    }

    #[test]
    fn empty_table_is_header_only() {
        let csv = emit_table(&[], TableFormat::Csv);
        assert_eq!(csv.lines().count(), 1);
        let parsed = parse_table_csv(&csv).unwrap();
        assert!(parsed.is_empty());
    }

    #[test]
    fn cell_seed_is_stable_under_grid_extension() {
        let s3 = ScenarioKind::Shift { delta: 2.0 };
        let a = cell_seed(9, s3, MinSamples::Fraction(0.01), 4);
        // The same cell keyed the same way, regardless of what else is in
        // the grid.
        let b = cell_seed(9, s3, MinSamples::Fraction(0.01), 4);
        assert_eq!(a, b);
        assert_ne!(a, cell_seed(9, s3, MinSamples::Fraction(0.01), 5));
        assert_ne!(a, cell_seed(9, s3, MinSamples::Count(1), 4));
        assert_ne!(a, cell_seed(9, ScenarioKind::Permutation, MinSamples::Fraction(0.01), 4));
    }
}
