//! AGRAWAL synthetic data and the three drift perturbations (Gaussian
//! noise, per-feature permutation, fixed shift) that manufacture a
//! pre-drift / post-drift model pair training setup.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{split_at_random_point, FeatureMatrix};
use crate::error::{Error, Result};
use crate::seeds;

const TAG_SPLIT: u64 = 0x10;
const TAG_FEATURES: u64 = 0x11;
const TAG_PERTURB: u64 = 0x12;

pub const DEFAULT_NOISE_SIGMA: f64 = 0.5;
pub const DEFAULT_SHIFT_DELTA: f64 = 2.0;

/// Which drift is injected into the second split.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ScenarioKind {
    /// S1: i.i.d. Gaussian noise (scaled units) on the selected features.
    Noise { sigma: f64 },
    /// S2: each selected feature's values shuffled across rows.
    Permutation,
    /// S3: a fixed offset (scaled units) added to the selected features.
    Shift { delta: f64 },
}

impl ScenarioKind {
    /// Short id used in tables and manifests.
    pub fn id(&self) -> &'static str {
        match self {
            ScenarioKind::Noise { .. } => "S1",
            ScenarioKind::Permutation => "S2",
            ScenarioKind::Shift { .. } => "S3",
        }
    }

    /// A stable number for seed derivation, independent of config order.
    pub fn seed_tag(&self) -> u64 {
        match self {
            ScenarioKind::Noise { .. } => 1,
            ScenarioKind::Permutation => 2,
            ScenarioKind::Shift { .. } => 3,
        }
    }
}

/// How many features the perturbation touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureCount {
    /// Uniform over [1, d] for noise and permutation, [2, d] for shift.
    Random,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub num_features: FeatureCount,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, num_features: FeatureCount) -> Result<Self> {
        match kind {
            ScenarioKind::Noise { sigma } if !(sigma > 0.0) => {
                return Err(Error::InvalidScenario(format!("sigma {sigma} must be > 0")))
            }
            ScenarioKind::Shift { delta } if delta == 0.0 => {
                return Err(Error::InvalidScenario("shift delta must be non-zero".into()))
            }
            _ => {}
        }
        if let FeatureCount::Fixed(k) = num_features {
            let floor = if matches!(kind, ScenarioKind::Shift { .. }) {
                2
            } else {
                1
            };
            if k < floor {
                return Err(Error::InvalidScenario(format!(
                    "{} needs at least {floor} feature(s), got {k}",
                    kind.id()
                )));
            }
        }
        Ok(ScenarioSpec { kind, num_features })
    }
}

/// The two training sets of a retraining scenario. `x_f` is the first
/// split verbatim; `x_g` is the first split followed by the perturbed
/// second split, so `x_f` is a row-wise prefix of `x_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPairData {
    pub x_f: FeatureMatrix,
    pub x_g: FeatureMatrix,
    pub perturbed_features: Vec<usize>,
    pub split_index: usize,
}

const AGRAWAL_FEATURES: [&str; 7] = [
    "salary",
    "commission",
    "age",
    "education level",
    "house value",
    "house years",
    "loan",
];

/// Generates `n` rows of the AGRAWAL loan-approval data restricted to its
/// numeric attributes, labeled by one of the first three classification
/// functions (group A ↦ 1).
pub fn agrawal_generate(n: usize, function_id: u8, seed: u64) -> Result<FeatureMatrix> {
    if !(1..=3).contains(&function_id) {
        return Err(Error::UnknownFunction(function_id));
    }
    if n == 0 {
        return Err(Error::TooFewRows { need: 1, got: 0 });
    }
    let mut rng = seeds::rng(seed, &[]);
    let mut values = Vec::with_capacity(n * AGRAWAL_FEATURES.len());
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let salary = rng.gen_range(20_000.0..150_000.0);
        let commission = if salary >= 75_000.0 {
            0.0
        } else {
            rng.gen_range(10_000.0..75_000.0)
        };
        let age = rng.gen_range(20.0..80.0);
        let elevel = rng.gen_range(0..5u32) as f64;
        let zipcode = rng.gen_range(0..9u32) as f64; // internal only
        let hvalue = rng.gen_range(50_000.0..135_000.0) * (zipcode + 1.0);
        let hyears = rng.gen_range(1.0..30.0);
        let loan = rng.gen_range(0.0..500_000.0);
        values.extend_from_slice(&[salary, commission, age, elevel, hvalue, hyears, loan]);
        labels.push(agrawal_label(function_id, salary, age, elevel));
    }
    Ok(FeatureMatrix::from_parts(
        AGRAWAL_FEATURES.iter().map(|s| s.to_string()).collect(),
        values,
        AGRAWAL_FEATURES.len(),
        Some(labels),
    ))
}

/// The classification predicate, exposed for oracle checks.
pub fn agrawal_label(function_id: u8, salary: f64, age: f64, elevel: f64) -> u8 {
    let group_a = match function_id {
        1 => age < 40.0 || age >= 60.0,
        2 => {
            if age < 40.0 {
                (50_000.0..=100_000.0).contains(&salary)
            } else if age < 60.0 {
                (75_000.0..=125_000.0).contains(&salary)
            } else {
                (25_000.0..=75_000.0).contains(&salary)
            }
        }
        3 => {
            if age < 40.0 {
                elevel == 0.0 || elevel == 1.0
            } else if age < 60.0 {
                (1.0..=3.0).contains(&elevel)
            } else {
                (2.0..=4.0).contains(&elevel)
            }
        }
        _ => unreachable!("validated by agrawal_generate"),
    };
    u8::from(group_a)
}

fn check_feature_selection(m: &FeatureMatrix, features: &[usize], floor: usize) -> Result<()> {
    if features.len() < floor {
        return Err(if floor > 1 {
            Error::InvalidScenario(format!(
                "shift needs at least {floor} features, got {}",
                features.len()
            ))
        } else {
            Error::EmptyFeatureSet
        });
    }
    let mut seen = vec![false; m.n_features()];
    for &j in features {
        if j >= m.n_features() {
            return Err(Error::UnknownFeature(j));
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::InvalidScenario(format!("feature {j} selected twice")));
        }
    }
    Ok(())
}

fn map_columns(
    m: &FeatureMatrix,
    features: &[usize],
    mut f: impl FnMut(usize, Vec<f64>) -> Vec<f64>,
) -> FeatureMatrix {
    let n = m.n_rows();
    let d = m.n_features();
    let mut values: Vec<f64> = (0..n).flat_map(|i| m.row(i).to_vec()).collect();
    for &j in features {
        let col: Vec<f64> = (0..n).map(|i| m.value(i, j)).collect();
        let new = f(j, col);
        for (i, v) in new.into_iter().enumerate() {
            values[i * d + j] = v;
        }
    }
    FeatureMatrix::from_parts(
        m.feature_names().to_vec(),
        values,
        d,
        m.labels().map(|y| y.to_vec()),
    )
}

/// S1: adds i.i.d. N(0, sigma²) to the selected columns. Labels and
/// non-selected columns are untouched.
pub fn perturb_noise(
    m: &FeatureMatrix,
    features: &[usize],
    sigma: f64,
    seed: u64,
) -> Result<FeatureMatrix> {
    check_feature_selection(m, features, 1)?;
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::InvalidScenario(format!("sigma {sigma}: {e}")))?;
    let mut rng = seeds::rng(seed, &[TAG_PERTURB]);
    Ok(map_columns(m, features, |_, col| {
        col.into_iter().map(|v| v + normal.sample(&mut rng)).collect()
    }))
}

/// S2: shuffles each selected column's values across rows, decoupling
/// them from the rest of their rows while preserving the value multiset.
pub fn perturb_permutation(
    m: &FeatureMatrix,
    features: &[usize],
    seed: u64,
) -> Result<FeatureMatrix> {
    check_feature_selection(m, features, 1)?;
    let mut rng = seeds::rng(seed, &[TAG_PERTURB]);
    Ok(map_columns(m, features, |_, mut col| {
        for i in (1..col.len()).rev() {
            let j = rng.gen_range(0..=i);
            col.swap(i, j);
        }
        col
    }))
}

/// S3: adds `delta` to every value of the selected columns. The paper's
/// protocol shifts at least two features.
pub fn perturb_shift(
    m: &FeatureMatrix,
    features: &[usize],
    delta: f64,
    _seed: u64,
) -> Result<FeatureMatrix> {
    check_feature_selection(m, features, 2)?;
    Ok(map_columns(m, features, |_, col| {
        col.into_iter().map(|v| v + delta).collect()
    }))
}

/// Draws the perturbed feature subset for a scenario: a uniform count
/// (respecting the shift floor of 2), then a uniform subset of that size.
pub fn draw_feature_subset(spec: &ScenarioSpec, d: usize, seed: u64) -> Result<Vec<usize>> {
    let floor = if matches!(spec.kind, ScenarioKind::Shift { .. }) {
        2
    } else {
        1
    };
    if d < floor {
        return Err(Error::InvalidScenario(format!(
            "{} needs at least {floor} feature(s), data has {d}",
            spec.kind.id()
        )));
    }
    let mut rng = seeds::rng(seed, &[TAG_FEATURES]);
    let k = match spec.num_features {
        FeatureCount::Fixed(k) => {
            if k < floor || k > d {
                return Err(Error::InvalidScenario(format!(
                    "feature count {k} outside [{floor}, {d}]"
                )));
            }
            k
        }
        FeatureCount::Random => rng.gen_range(floor..=d),
    };
    let mut pool: Vec<usize> = (0..d).collect();
    for i in 0..k {
        let j = rng.gen_range(i..d);
        pool.swap(i, j);
    }
    let mut subset = pool[..k].to_vec();
    subset.sort_unstable();
    Ok(subset)
}

/// Runs the retraining protocol on a standardized, labeled stream: split
/// at a random point, perturb the second split, and assemble the two
/// training sets. Labels are carried unchanged through the perturbation.
pub fn make_model_pair(
    stream: &FeatureMatrix,
    spec: &ScenarioSpec,
    seed: u64,
) -> Result<ModelPairData> {
    if stream.labels().is_none() {
        return Err(Error::InvalidMatrix("stream has no labels".into()));
    }
    let (first, second) = split_at_random_point(stream, seeds::derive(seed, &[TAG_SPLIT]))?;
    let subset = draw_feature_subset(spec, stream.n_features(), seed)?;
    let perturb_seed = seeds::derive(seed, &[TAG_PERTURB]);
    let perturbed = match spec.kind {
        ScenarioKind::Noise { sigma } => perturb_noise(&second, &subset, sigma, perturb_seed)?,
        ScenarioKind::Permutation => perturb_permutation(&second, &subset, perturb_seed)?,
        ScenarioKind::Shift { delta } => perturb_shift(&second, &subset, delta, perturb_seed)?,
    };
    let split_index = first.n_rows();
    let x_g = first.concat_rows(&perturbed)?;
    Ok(ModelPairData {
        x_f: first,
        x_g,
        perturbed_features: subset,
        split_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::standardize;

    #[test]
    fn function_one_depends_only_on_age() {
        assert_eq!(agrawal_label(1, 50_000.0, 35.0, 2.0), 1);
        assert_eq!(agrawal_label(1, 140_000.0, 35.0, 4.0), 1);
        assert_eq!(agrawal_label(1, 50_000.0, 45.0, 2.0), 0);
        assert_eq!(agrawal_label(1, 50_000.0, 63.0, 2.0), 1);
    }

    #[test]
    fn function_three_age_bands() {
        assert_eq!(agrawal_label(3, 0.0, 65.0, 3.0), 1);
        assert_eq!(agrawal_label(3, 0.0, 65.0, 1.0), 0);
        assert_eq!(agrawal_label(3, 0.0, 30.0, 1.0), 1);
        assert_eq!(agrawal_label(3, 0.0, 50.0, 0.0), 0);
    }

    #[test]
    fn generated_labels_match_the_predicate() {
        for function_id in 1..=3u8 {
            let m = agrawal_generate(500, function_id, 3).unwrap();
            let (s, a, e) = (0, 2, 3); // salary, age, elevel columns
            for i in 0..m.n_rows() {
                let expect =
                    agrawal_label(function_id, m.value(i, s), m.value(i, a), m.value(i, e));
                assert_eq!(m.label(i).unwrap(), expect);
            }
        }
    }

    #[test]
    fn label_balance_is_moderate() {
        for function_id in 1..=3u8 {
            for seed in 0..10 {
                let m = agrawal_generate(10_000, function_id, seed).unwrap();
                let ones = m.labels().unwrap().iter().filter(|&&y| y == 1).count();
                let frac = ones as f64 / 10_000.0;
                assert!(
                    (0.25..=0.75).contains(&frac),
                    "function {function_id} seed {seed}: balance {frac}"
                );
            }
        }
    }

    #[test]
    fn unknown_function_is_rejected() {
        assert!(matches!(
            agrawal_generate(10, 4, 0),
            Err(Error::UnknownFunction(4))
        ));
        assert!(matches!(
            agrawal_generate(10, 0, 0),
            Err(Error::UnknownFunction(0))
        ));
    }

    fn standardized_stream(n: usize, seed: u64) -> FeatureMatrix {
        let raw = agrawal_generate(n, 1, seed).unwrap();
        standardize(&raw).unwrap().0
    }

    #[test]
    fn vanishing_noise_is_identity() {
        let m = standardized_stream(50, 1);
        let out = perturb_noise(&m, &[0, 2], 1e-12, 9).unwrap();
        for i in 0..m.n_rows() {
            for j in 0..m.n_features() {
                assert!((out.value(i, j) - m.value(i, j)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn noise_moments_match_sigma() {
        let m = standardized_stream(10_000, 2);
        let out = perturb_noise(&m, &[1], 0.5, 4).unwrap();
        let n = m.n_rows() as f64;
        let mean_before: f64 = (0..m.n_rows()).map(|i| m.value(i, 1)).sum::<f64>() / n;
        let mean_after: f64 = (0..m.n_rows()).map(|i| out.value(i, 1)).sum::<f64>() / n;
        assert!((mean_after - mean_before).abs() < 0.05);
        let var = |mm: &FeatureMatrix, mu: f64| {
            (0..mm.n_rows())
                .map(|i| (mm.value(i, 1) - mu).powi(2))
                .sum::<f64>()
                / n
        };
        let inflation = var(&out, mean_after) - var(&m, mean_before);
        assert!((inflation - 0.25).abs() < 0.06, "inflation {inflation}");
    }

    #[test]
    fn noise_leaves_other_columns_bit_identical() {
        let m = standardized_stream(200, 3);
        let out = perturb_noise(&m, &[2], 0.7, 5).unwrap();
        for i in 0..m.n_rows() {
            for j in 0..m.n_features() {
                if j != 2 {
                    assert_eq!(out.value(i, j).to_bits(), m.value(i, j).to_bits());
                }
            }
        }
        assert_eq!(out.labels(), m.labels());
        assert!(matches!(
            perturb_noise(&m, &[], 0.5, 0),
            Err(Error::EmptyFeatureSet)
        ));
    }

    #[test]
    fn permutation_preserves_multiset() {
        let m = standardized_stream(300, 4);
        let out = perturb_permutation(&m, &[0, 3], 6).unwrap();
        for j in [0usize, 3] {
            let mut before: Vec<f64> = (0..m.n_rows()).map(|i| m.value(i, j)).collect();
            let mut after: Vec<f64> = (0..m.n_rows()).map(|i| out.value(i, j)).collect();
            before.sort_by(f64::total_cmp);
            after.sort_by(f64::total_cmp);
            let same = before
                .iter()
                .zip(&after)
                .all(|(a, b)| a.to_bits() == b.to_bits());
            assert!(same);
        }
    }

    #[test]
    fn single_row_permutation_is_identity() {
        let m = FeatureMatrix::new(vec!["a".into()], vec![vec![3.5]], Some(vec![1])).unwrap();
        let out = perturb_permutation(&m, &[0], 7).unwrap();
        assert_eq!(out, m);
    }

    #[test]
    fn permutation_destroys_label_correlation() {
        // Build a feature strongly correlated with the label, permute it,
        // and check the correlation collapses.
        let n = 5000;
        let mut rng = seeds::rng(12, &[]);
        let labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2) as u8).collect();
        let rows: Vec<Vec<f64>> = labels
            .iter()
            .map(|&y| vec![y as f64 * 2.0 + rng.gen_range(-1.0..1.0)])
            .collect();
        let m = FeatureMatrix::new(vec!["x".into()], rows, Some(labels)).unwrap();

        let corr = |mm: &FeatureMatrix| {
            let n = mm.n_rows() as f64;
            let xs: Vec<f64> = (0..mm.n_rows()).map(|i| mm.value(i, 0)).collect();
            let ys: Vec<f64> = mm.labels().unwrap().iter().map(|&y| y as f64).collect();
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let cov = xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| (x - mx) * (y - my))
                .sum::<f64>();
            let vx = xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
            let vy = ys.iter().map(|y| (y - my).powi(2)).sum::<f64>();
            cov / (vx.sqrt() * vy.sqrt())
        };

        assert!(corr(&m).abs() > 0.3);
        let out = perturb_permutation(&m, &[0], 8).unwrap();
        assert!(corr(&out).abs() < 0.05);
    }

    #[test]
    fn shift_moves_standardized_mean_to_delta() {
        let m = standardized_stream(5000, 5);
        let out = perturb_shift(&m, &[0, 2], 2.0, 0).unwrap();
        for j in [0usize, 2] {
            let mean: f64 =
                (0..out.n_rows()).map(|i| out.value(i, j)).sum::<f64>() / out.n_rows() as f64;
            assert!((mean - 2.0).abs() < 0.05, "column {j} mean {mean}");
        }
    }

    #[test]
    fn zero_shift_is_identity_and_floor_is_enforced() {
        let m = standardized_stream(50, 6);
        let out = perturb_shift(&m, &[0, 1], 0.0, 0).unwrap();
        assert_eq!(out, m);
        assert!(perturb_shift(&m, &[0], 2.0, 0).is_err());
    }

    #[test]
    fn model_pair_structure() {
        let stream = standardized_stream(1000, 7);
        let spec = ScenarioSpec::new(
            ScenarioKind::Noise { sigma: 0.5 },
            FeatureCount::Random,
        )
        .unwrap();
        let pair = make_model_pair(&stream, &spec, 42).unwrap();
        assert_eq!(pair.x_g.n_rows(), stream.n_rows());
        assert_eq!(pair.x_f.n_rows(), pair.split_index);
        // X_f is a verbatim prefix of X_g.
        for i in 0..pair.split_index {
            assert_eq!(pair.x_f.row(i), pair.x_g.row(i));
        }
        // Determinism.
        assert_eq!(pair, make_model_pair(&stream, &spec, 42).unwrap());
    }

    #[test]
    fn split_index_stays_in_the_middle_third() {
        let stream = standardized_stream(10_000, 8);
        let spec =
            ScenarioSpec::new(ScenarioKind::Shift { delta: 2.0 }, FeatureCount::Random).unwrap();
        for seed in 0..5 {
            let pair = make_model_pair(&stream, &spec, seed).unwrap();
            assert!((3334..=6666).contains(&pair.x_f.n_rows()));
            assert!(pair.perturbed_features.len() >= 2);
            assert!(pair.perturbed_features.len() <= stream.n_features());
        }
    }

    #[test]
    fn shift_extends_the_domain_by_delta() {
        let stream = standardized_stream(10_000, 9);
        let pre = crate::data::compute_domain(&stream);
        let spec = ScenarioSpec::new(
            ScenarioKind::Shift { delta: 2.0 },
            FeatureCount::Fixed(3),
        )
        .unwrap();
        let pair = make_model_pair(&stream, &spec, 11).unwrap();
        let post = crate::data::compute_domain(&pair.x_g);
        for &j in &pair.perturbed_features {
            let excess = post.hi(j) - pre.hi(j);
            assert!((excess - 2.0).abs() < 0.1, "feature {j}: excess {excess}");
        }
    }

    #[test]
    fn scenario_spec_validation() {
        assert!(ScenarioSpec::new(ScenarioKind::Noise { sigma: 0.0 }, FeatureCount::Random)
            .is_err());
        assert!(ScenarioSpec::new(ScenarioKind::Shift { delta: 0.0 }, FeatureCount::Random)
            .is_err());
        assert!(
            ScenarioSpec::new(ScenarioKind::Shift { delta: 2.0 }, FeatureCount::Fixed(1)).is_err()
        );
        assert!(
            ScenarioSpec::new(ScenarioKind::Permutation, FeatureCount::Fixed(1)).is_ok()
        );
    }
}
