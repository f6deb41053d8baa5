//! Turns the class-1 branches of a surrogate tree into non-overlapping
//! interval rules: per-feature condition merging, coverage scans,
//! denormalization back to original units, text rendering and a stable
//! JSON export.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::{inverse_transform_threshold, DomainBounds, FeatureMatrix, Scaler};
use crate::error::{Error, Result};
use crate::tree::{CartTree, Node};

/// One end of an interval; `open` excludes the bound value itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub open: bool,
}

/// A per-feature value range. Tree-derived intervals are lower-open /
/// upper-closed, matching the `<=` / `>` routing of the tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: Bound,
    pub upper: Bound,
}

impl Interval {
    pub fn full(lo: f64, hi: f64) -> Self {
        Interval {
            lower: Bound {
                value: lo,
                open: false,
            },
            upper: Bound {
                value: hi,
                open: false,
            },
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lower.open {
            v > self.lower.value
        } else {
            v >= self.lower.value
        };
        let below = if self.upper.open {
            v < self.upper.value
        } else {
            v <= self.upper.value
        };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        if self.lower.value > self.upper.value {
            return true;
        }
        self.lower.value == self.upper.value && (self.lower.open || self.upper.open)
    }

    /// Whether two intervals share at least one point.
    pub fn intersects(&self, other: &Interval) -> bool {
        let lower = if self.lower.value > other.lower.value
            || (self.lower.value == other.lower.value && self.lower.open)
        {
            self.lower
        } else {
            other.lower
        };
        let upper = if self.upper.value < other.upper.value
            || (self.upper.value == other.upper.value && self.upper.open)
        {
            self.upper
        } else {
            other.upper
        };
        !Interval { lower, upper }.is_empty()
    }
}

/// A conjunction of per-feature intervals (one per feature; irrelevant
/// features carry the full domain range). `support` is the training-row
/// count of the originating leaf; `covered_rows` is filled by a whole-set
/// scan.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub intervals: Vec<Interval>,
    pub support: usize,
    pub length: usize,
    pub covered_rows: Option<usize>,
}

impl Rule {
    pub fn covers(&self, row: &[f64]) -> bool {
        self.intervals
            .iter()
            .zip(row)
            .all(|(iv, &v)| iv.contains(v))
    }
}

/// The extracted rule set plus the domain it was extracted against.
/// Tree extraction guarantees the rules are pairwise non-overlapping.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    pub feature_names: Vec<String>,
    pub domain: DomainBounds,
    pub rules: Vec<Rule>,
}

impl RuleSet {
    pub fn n_rules(&self) -> usize {
        self.rules.len()
    }

    /// Whether any rule covers the row — the rule-set prediction.
    pub fn covers(&self, row: &[f64]) -> bool {
        self.rules.iter().any(|r| r.covers(row))
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Vec<u8> {
        (0..x.n_rows())
            .map(|i| u8::from(self.covers(x.row(i))))
            .collect()
    }

    /// Scans `x_full` once and stores each rule's covered-row count.
    pub fn with_coverage(mut self, x_full: &FeatureMatrix) -> Self {
        let mut counts = vec![0usize; self.rules.len()];
        for i in 0..x_full.n_rows() {
            let row = x_full.row(i);
            for (k, rule) in self.rules.iter().enumerate() {
                if rule.covers(row) {
                    counts[k] += 1;
                }
            }
        }
        for (rule, count) in self.rules.iter_mut().zip(counts) {
            rule.covered_rows = Some(count);
        }
        self
    }

    /// True iff every rule pair is disjoint on at least one feature.
    pub fn pairwise_disjoint(&self) -> bool {
        for (a, ra) in self.rules.iter().enumerate() {
            for rb in &self.rules[a + 1..] {
                let disjoint = ra
                    .intervals
                    .iter()
                    .zip(&rb.intervals)
                    .any(|(ia, ib)| !ia.intersects(ib));
                if !disjoint {
                    return false;
                }
            }
        }
        true
    }

    /// Rows of `x` covered by two or more rules. Zero for tree-extracted
    /// sets; exposed for rule sources without that guarantee.
    pub fn joint_coverage_count(&self, x: &FeatureMatrix) -> usize {
        (0..x.n_rows())
            .filter(|&i| {
                self.rules
                    .iter()
                    .filter(|r| r.covers(x.row(i)))
                    .take(2)
                    .count()
                    > 1
            })
            .count()
    }
}

/// One root-to-leaf test: `value <= threshold` or `value > threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathCondition {
    pub feature: usize,
    pub op: ConditionOp,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionOp {
    Le,
    Gt,
}

/// Merges a path's conditions into one interval per feature: the lower
/// bound is the max of the `>` thresholds, the upper bound the min of the
/// `<=` thresholds; unconstrained sides come from the domain. An empty
/// interval signals a malformed path — valid tree routing cannot produce
/// one.
pub fn merge_conditions(path: &[PathCondition], domain: &DomainBounds) -> Result<Rule> {
    let d = domain.len();
    let mut intervals: Vec<Interval> = (0..d)
        .map(|j| Interval::full(domain.lo(j), domain.hi(j)))
        .collect();
    for cond in path {
        if cond.feature >= d {
            return Err(Error::UnknownFeature(cond.feature));
        }
        if !cond.threshold.is_finite() {
            return Err(Error::InvalidMatrix(format!(
                "non-finite threshold on feature {}",
                cond.feature
            )));
        }
        let iv = &mut intervals[cond.feature];
        match cond.op {
            ConditionOp::Gt => {
                // Open at the same value is the stricter bound.
                if cond.threshold > iv.lower.value
                    || (cond.threshold == iv.lower.value && !iv.lower.open)
                {
                    iv.lower = Bound {
                        value: cond.threshold,
                        open: true,
                    };
                }
            }
            ConditionOp::Le => {
                if cond.threshold < iv.upper.value {
                    iv.upper = Bound {
                        value: cond.threshold,
                        open: false,
                    };
                }
            }
        }
    }
    for (j, iv) in intervals.iter().enumerate() {
        if iv.is_empty() {
            return Err(Error::EmptyInterval {
                feature: j,
                lo: iv.lower.value,
                hi: iv.upper.value,
            });
        }
    }
    let length = intervals
        .iter()
        .enumerate()
        .filter(|(j, iv)| **iv != Interval::full(domain.lo(*j), domain.hi(*j)))
        .count();
    Ok(Rule {
        intervals,
        support: 0,
        length,
        covered_rows: None,
    })
}

/// Extracts one rule per class-1 leaf of the surrogate tree; class-0
/// leaves are discarded. An all-class-0 tree yields an empty rule set.
pub fn extract_rules(
    tree: &CartTree,
    domain: &DomainBounds,
    feature_names: &[String],
) -> Result<RuleSet> {
    if tree.n_features() != domain.len() || feature_names.len() != domain.len() {
        return Err(Error::FeatureMismatch(format!(
            "tree has {} features, domain {}, names {}",
            tree.n_features(),
            domain.len(),
            feature_names.len()
        )));
    }
    let mut rules = Vec::new();
    let mut first_err = None;
    tree.for_each_path(|path, leaf| {
        if let Node::Leaf {
            class: 1,
            sample_count,
            ..
        } = leaf
        {
            let conds: Vec<PathCondition> = path
                .iter()
                .map(|&(feature, is_upper, threshold)| PathCondition {
                    feature,
                    op: if is_upper {
                        ConditionOp::Le
                    } else {
                        ConditionOp::Gt
                    },
                    threshold,
                })
                .collect();
            match merge_conditions(&conds, domain) {
                Ok(mut rule) => {
                    rule.support = *sample_count;
                    rules.push(rule);
                }
                Err(e) => {
                    if first_err.is_none() {
                        first_err = Some(e);
                    }
                }
            }
        }
    });
    if let Some(e) = first_err {
        return Err(e);
    }
    Ok(RuleSet {
        feature_names: feature_names.to_vec(),
        domain: domain.clone(),
        rules,
    })
}

/// Fraction of `x`'s rows the rule covers.
pub fn rule_coverage(rule: &Rule, x: &FeatureMatrix) -> f64 {
    if x.n_rows() == 0 {
        return 0.0;
    }
    let covered = (0..x.n_rows()).filter(|&i| rule.covers(x.row(i))).count();
    covered as f64 / x.n_rows() as f64
}

/// Maps every interval bound (and the domain) back to original feature
/// units. Supports, lengths and covered counts are unchanged.
pub fn denormalize(rs: &RuleSet, scaler: &Scaler) -> Result<RuleSet> {
    let d = rs.domain.len();
    if scaler.n_features() != d {
        return Err(Error::FeatureMismatch(format!(
            "scaler has {} features, rule set {}",
            scaler.n_features(),
            d
        )));
    }
    let map_bound = |j: usize, b: Bound| -> Result<Bound> {
        Ok(Bound {
            value: inverse_transform_threshold(scaler, j, b.value)?,
            open: b.open,
        })
    };
    let domain = DomainBounds::new(
        (0..d)
            .map(|j| {
                Ok((
                    inverse_transform_threshold(scaler, j, rs.domain.lo(j))?,
                    inverse_transform_threshold(scaler, j, rs.domain.hi(j))?,
                ))
            })
            .collect::<Result<Vec<_>>>()?,
    )?;
    let rules = rs
        .rules
        .iter()
        .map(|rule| {
            let intervals = rule
                .intervals
                .iter()
                .enumerate()
                .map(|(j, iv)| {
                    Ok(Interval {
                        lower: map_bound(j, iv.lower)?,
                        upper: map_bound(j, iv.upper)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Rule {
                intervals,
                support: rule.support,
                length: rule.length,
                covered_rows: rule.covered_rows,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RuleSet {
        feature_names: rs.feature_names.clone(),
        domain,
        rules,
    })
}

fn format_value(v: f64) -> String {
    format!("{v:.2}")
}

/// Percentage with one decimal, trailing ".0" trimmed ("2%", "1.8%").
fn format_percent(fraction: f64) -> String {
    let s = format!("{:.1}", fraction * 100.0);
    s.strip_suffix(".0").unwrap_or(&s).to_string()
}

/// Renders one line per rule: the conjunction of its non-trivial
/// conditions (one-sided when the other bound is the domain bound,
/// `feature ∈ [a, b]` otherwise), then the support and the coverage
/// against `total_rows`. Interval notation is rendered closed; the exact
/// open/closed flags live in the JSON export.
pub fn render_text(rs: &RuleSet, total_rows: usize) -> String {
    if rs.rules.is_empty() {
        return "no disagreement regions found\n".to_string();
    }
    let mut out = String::new();
    for (k, rule) in rs.rules.iter().enumerate() {
        let mut parts = Vec::new();
        for (j, iv) in rule.intervals.iter().enumerate() {
            let name = &rs.feature_names[j];
            let lower_trivial =
                iv.lower == (Interval::full(rs.domain.lo(j), rs.domain.hi(j)).lower);
            let upper_trivial =
                iv.upper == (Interval::full(rs.domain.lo(j), rs.domain.hi(j)).upper);
            match (lower_trivial, upper_trivial) {
                (true, true) => {}
                (false, true) => {
                    let op = if iv.lower.open { ">" } else { "≥" };
                    parts.push(format!("({name} {op} {})", format_value(iv.lower.value)));
                }
                (true, false) => {
                    let op = if iv.upper.open { "<" } else { "≤" };
                    parts.push(format!("({name} {op} {})", format_value(iv.upper.value)));
                }
                (false, false) => {
                    parts.push(format!(
                        "({name} ∈ [{}, {}])",
                        format_value(iv.lower.value),
                        format_value(iv.upper.value)
                    ));
                }
            }
        }
        let coverage = rule.covered_rows.unwrap_or(rule.support) as f64 / total_rows.max(1) as f64;
        let _ = writeln!(
            out,
            "R{}: {} ({} samples, coverage {}%)",
            k + 1,
            parts.join(" and "),
            rule.support,
            format_percent(coverage)
        );
    }
    out
}

// --- JSON export -----------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSetDocument {
    pub version: u32,
    pub feature_names: Vec<String>,
    pub total_rows: usize,
    pub domain_scaled: Vec<[f64; 2]>,
    pub domain_original: Vec<[f64; 2]>,
    pub rules: Vec<RuleDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleDocument {
    pub support: usize,
    pub covered_rows: Option<usize>,
    pub coverage: Option<f64>,
    pub length: usize,
    pub conditions: Vec<ConditionDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionDocument {
    pub feature: String,
    pub feature_index: usize,
    pub scaled: Interval,
    pub original: Interval,
}

/// Builds the export document from a scaled-unit rule set; `scaler` maps
/// the bounds to original units (use [`Scaler::identity`] when the rules
/// were built in original units already). Trivial (full-range) intervals
/// are omitted; the domain blocks carry the full ranges.
pub fn to_document(
    rs_scaled: &RuleSet,
    scaler: &Scaler,
    total_rows: usize,
) -> Result<RuleSetDocument> {
    let rs_orig = denormalize(rs_scaled, scaler)?;
    let d = rs_scaled.domain.len();
    let rules = rs_scaled
        .rules
        .iter()
        .zip(&rs_orig.rules)
        .map(|(scaled, original)| {
            let conditions = (0..d)
                .filter(|&j| {
                    scaled.intervals[j]
                        != Interval::full(rs_scaled.domain.lo(j), rs_scaled.domain.hi(j))
                })
                .map(|j| ConditionDocument {
                    feature: rs_scaled.feature_names[j].clone(),
                    feature_index: j,
                    scaled: scaled.intervals[j],
                    original: original.intervals[j],
                })
                .collect();
            RuleDocument {
                support: scaled.support,
                covered_rows: scaled.covered_rows,
                coverage: scaled
                    .covered_rows
                    .map(|c| c as f64 / total_rows.max(1) as f64),
                length: scaled.length,
                conditions,
            }
        })
        .collect();
    Ok(RuleSetDocument {
        version: 1,
        feature_names: rs_scaled.feature_names.clone(),
        total_rows,
        domain_scaled: (0..d)
            .map(|j| [rs_scaled.domain.lo(j), rs_scaled.domain.hi(j)])
            .collect(),
        domain_original: (0..d)
            .map(|j| [rs_orig.domain.lo(j), rs_orig.domain.hi(j)])
            .collect(),
        rules,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{compute_domain, ScalerEntry};
    use crate::seeds;
    use crate::tree::{fit_cart, predict_tree, MinSamples, TreeParams};
    use rand::Rng;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|j| format!("f{j}")).collect()
    }

    #[test]
    fn merging_reproduces_the_worked_example() {
        let domain = DomainBounds::new(vec![(0.0, 100.0)]).unwrap();
        let path = [
            PathCondition {
                feature: 0,
                op: ConditionOp::Gt,
                threshold: 10.0,
            },
            PathCondition {
                feature: 0,
                op: ConditionOp::Gt,
                threshold: 30.0,
            },
            PathCondition {
                feature: 0,
                op: ConditionOp::Le,
                threshold: 50.0,
            },
        ];
        let rule = merge_conditions(&path, &domain).unwrap();
        assert_eq!(rule.intervals[0].lower.value, 30.0);
        assert!(rule.intervals[0].lower.open);
        assert_eq!(rule.intervals[0].upper.value, 50.0);
        assert!(!rule.intervals[0].upper.open);
        assert_eq!(rule.length, 1);
    }

    #[test]
    fn single_condition_fills_other_side_from_domain() {
        let domain = DomainBounds::new(vec![(0.0, 100.0), (0.0, 100.0)]).unwrap();
        let path = [PathCondition {
            feature: 1,
            op: ConditionOp::Le,
            threshold: 7.0,
        }];
        let rule = merge_conditions(&path, &domain).unwrap();
        assert_eq!(rule.intervals[1].lower.value, 0.0);
        assert!(!rule.intervals[1].lower.open);
        assert_eq!(rule.intervals[1].upper.value, 7.0);
        assert_eq!(rule.intervals[0], Interval::full(0.0, 100.0));
        assert_eq!(rule.length, 1);
    }

    #[test]
    fn conditions_on_two_features_give_length_two() {
        let domain = DomainBounds::new(vec![(0.0, 10.0), (0.0, 10.0)]).unwrap();
        let path = [
            PathCondition {
                feature: 0,
                op: ConditionOp::Gt,
                threshold: 2.0,
            },
            PathCondition {
                feature: 1,
                op: ConditionOp::Le,
                threshold: 8.0,
            },
        ];
        let rule = merge_conditions(&path, &domain).unwrap();
        assert_eq!(rule.length, 2);
    }

    #[test]
    fn contradictory_path_is_rejected() {
        let domain = DomainBounds::new(vec![(0.0, 100.0)]).unwrap();
        let path = [
            PathCondition {
                feature: 0,
                op: ConditionOp::Gt,
                threshold: 50.0,
            },
            PathCondition {
                feature: 0,
                op: ConditionOp::Le,
                threshold: 10.0,
            },
        ];
        assert!(matches!(
            merge_conditions(&path, &domain),
            Err(Error::EmptyInterval { .. })
        ));
    }

    #[test]
    fn stump_extraction() {
        let tree = CartTree::from_nodes(
            vec![
                Node::Internal {
                    feature: 0,
                    threshold: 0.3,
                    left: 1,
                    right: 2,
                },
                Node::Leaf {
                    class: 0,
                    sample_count: 70,
                    class_counts: [70, 0],
                },
                Node::Leaf {
                    class: 1,
                    sample_count: 30,
                    class_counts: [0, 30],
                },
            ],
            1,
        )
        .unwrap();
        let domain = DomainBounds::new(vec![(0.0, 1.0)]).unwrap();
        let rs = extract_rules(&tree, &domain, &names(1)).unwrap();
        assert_eq!(rs.n_rules(), 1);
        let rule = &rs.rules[0];
        assert_eq!(rule.support, 30);
        assert_eq!(rule.length, 1);
        assert_eq!(rule.intervals[0].lower.value, 0.3);
        assert!(rule.intervals[0].lower.open);
        assert_eq!(rule.intervals[0].upper.value, 1.0);
    }

    #[test]
    fn all_agreement_tree_extracts_nothing() {
        let tree = CartTree::from_nodes(
            vec![Node::Leaf {
                class: 0,
                sample_count: 100,
                class_counts: [100, 0],
            }],
            2,
        )
        .unwrap();
        let domain = DomainBounds::new(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let rs = extract_rules(&tree, &domain, &names(2)).unwrap();
        assert_eq!(rs.n_rules(), 0);
        assert_eq!(render_text(&rs, 100), "no disagreement regions found\n");
    }

    fn random_fitted_set(seed: u64) -> (CartTree, RuleSet, FeatureMatrix) {
        let mut rng = seeds::rng(seed, &[]);
        let n = rng.gen_range(60..250);
        let d = rng.gen_range(1..5usize);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2) as u8).collect();
        let x = FeatureMatrix::new(names(d), rows, None).unwrap();
        let params = TreeParams {
            min_samples_leaf: MinSamples::Count(rng.gen_range(1..(n / 4).max(2))),
            ..TreeParams::default()
        };
        let tree = fit_cart(&x, &labels, &params).unwrap();
        let domain = compute_domain(&x);
        let rs = extract_rules(&tree, &domain, x.feature_names()).unwrap();
        (tree, rs, x)
    }

    #[test]
    fn rule_set_prediction_equals_tree_prediction() {
        for seed in 0..25 {
            let (tree, rs, x) = random_fitted_set(seed);
            assert_eq!(rs.predict(&x), predict_tree(&tree, &x).unwrap());
        }
    }

    #[test]
    fn extracted_rules_are_pairwise_disjoint() {
        for seed in 100..120 {
            let (_, rs, x) = random_fitted_set(seed);
            assert!(rs.pairwise_disjoint());
            assert_eq!(rs.joint_coverage_count(&x), 0);
        }
    }

    #[test]
    fn coverage_matches_brute_force_scan() {
        for seed in 200..210 {
            let (_, rs, x) = random_fitted_set(seed);
            let rs = rs.with_coverage(&x);
            for rule in &rs.rules {
                let brute = (0..x.n_rows())
                    .filter(|&i| {
                        rule.intervals
                            .iter()
                            .zip(x.row(i))
                            .all(|(iv, &v)| iv.contains(v))
                    })
                    .count();
                assert_eq!(rule.covered_rows, Some(brute));
                let frac = rule_coverage(rule, &x);
                assert!((frac - brute as f64 / x.n_rows() as f64).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn full_domain_rule_covers_everything() {
        let domain = DomainBounds::new(vec![(0.0, 1.0)]).unwrap();
        let rule = merge_conditions(&[], &domain).unwrap();
        assert_eq!(rule.length, 0);
        let x = FeatureMatrix::new(
            vec!["x".into()],
            vec![vec![0.0], vec![0.5], vec![1.0]],
            None,
        )
        .unwrap();
        assert_eq!(rule_coverage(&rule, &x), 1.0);
    }

    fn paper_style_scaler() -> Scaler {
        Scaler::from_entries(vec![
            ScalerEntry {
                name: "salary".into(),
                mean: 100_000.0,
                std: 30_000.0,
            },
            ScalerEntry {
                name: "education level".into(),
                mean: 5.0,
                std: 2.0,
            },
            ScalerEntry {
                name: "age".into(),
                mean: 70.0,
                std: 25.0,
            },
        ])
    }

    #[test]
    fn denormalize_maps_bounds_and_keeps_counts() {
        let scaler = paper_style_scaler();
        let domain = DomainBounds::new(vec![(-3.0, 4.0), (-3.0, 4.0), (-3.0, 4.0)]).unwrap();
        let t = (170_824.88 - 100_000.0) / 30_000.0;
        let path = [PathCondition {
            feature: 0,
            op: ConditionOp::Gt,
            threshold: t,
        }];
        let mut rule = merge_conditions(&path, &domain).unwrap();
        rule.support = 199;
        rule.covered_rows = Some(199);
        let rs = RuleSet {
            feature_names: vec!["salary".into(), "education level".into(), "age".into()],
            domain,
            rules: vec![rule],
        };
        let orig = denormalize(&rs, &scaler).unwrap();
        let lower = orig.rules[0].intervals[0].lower;
        assert!((lower.value - 170_824.88).abs() < 1e-6);
        assert!(lower.open);
        assert_eq!(orig.rules[0].support, 199);
        assert_eq!(orig.rules[0].covered_rows, Some(199));
        assert_eq!(orig.rules[0].length, 1);

        let identity = Scaler::identity(&rs.feature_names);
        assert_eq!(denormalize(&rs, &identity).unwrap(), rs);
    }

    #[test]
    fn coverage_is_invariant_under_denormalization() {
        let (_, rs, x) = random_fitted_set(42);
        let entries: Vec<ScalerEntry> = rs
            .feature_names
            .iter()
            .enumerate()
            .map(|(j, n)| ScalerEntry {
                name: n.clone(),
                mean: 10.0 * j as f64 + 1.0,
                std: 2.0 + j as f64,
            })
            .collect();
        let scaler = Scaler::from_entries(entries.clone());
        let orig_rs = denormalize(&rs, &scaler).unwrap();
        // Transform the data the same way and compare per-rule coverage.
        let rows: Vec<Vec<f64>> = (0..x.n_rows())
            .map(|i| {
                x.row(i)
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| v * entries[j].std + entries[j].mean)
                    .collect()
            })
            .collect();
        let x_orig = FeatureMatrix::new(x.feature_names().to_vec(), rows, None).unwrap();
        for (a, b) in rs.rules.iter().zip(&orig_rs.rules) {
            let ca = rule_coverage(a, &x);
            let cb = rule_coverage(b, &x_orig);
            assert!((ca - cb).abs() < 1e-9, "{ca} vs {cb}");
        }
    }

    #[test]
    fn rendering_matches_the_expected_shape() {
        let scaler = paper_style_scaler();
        let domain = DomainBounds::new(vec![(-3.0, 4.0), (-3.0, 4.0), (-3.0, 4.0)]).unwrap();
        let conds = |rows: &[(usize, ConditionOp, f64)]| -> Vec<PathCondition> {
            rows.iter()
                .map(|&(feature, op, threshold)| PathCondition {
                    feature,
                    op,
                    threshold,
                })
                .collect()
        };
        // salary > 170824.88 and education level > 9.17 and age <= 129.62,
        // expressed in scaled units.
        let path = conds(&[
            (0, ConditionOp::Gt, (170_824.88 - 100_000.0) / 30_000.0),
            (1, ConditionOp::Gt, (9.17 - 5.0) / 2.0),
            (2, ConditionOp::Le, (129.62 - 70.0) / 25.0),
        ]);
        let mut r1 = merge_conditions(&path, &domain).unwrap();
        r1.support = 199;
        r1.covered_rows = Some(199);
        let path3 = conds(&[
            (0, ConditionOp::Gt, (170_824.88 - 100_000.0) / 30_000.0),
            (1, ConditionOp::Gt, (7.17 - 5.0) / 2.0),
            (1, ConditionOp::Le, (9.17 - 5.0) / 2.0),
            (2, ConditionOp::Le, (109.62 - 70.0) / 25.0),
        ]);
        let mut r3 = merge_conditions(&path3, &domain).unwrap();
        r3.support = 158;
        r3.covered_rows = Some(158);
        let rs = RuleSet {
            feature_names: vec!["salary".into(), "education level".into(), "age".into()],
            domain,
            rules: vec![r1, r3],
        };
        let rendered = render_text(&denormalize(&rs, &scaler).unwrap(), 10_000);
        let lines: Vec<&str> = rendered.lines().collect();
        assert_eq!(
            lines[0],
            "R1: (salary > 170824.88) and (education level > 9.17) and (age ≤ 129.62) \
             (199 samples, coverage 2%)"
        );
        assert_eq!(
            lines[1],
            "R2: (salary > 170824.88) and (education level ∈ [7.17, 9.17]) and (age ≤ 109.62) \
             (158 samples, coverage 1.6%)"
        );
    }

    #[test]
    fn json_document_round_trips() {
        let (_, rs, x) = random_fitted_set(7);
        let rs = rs.with_coverage(&x);
        let scaler = Scaler::identity(&rs.feature_names);
        let doc = to_document(&rs, &scaler, x.n_rows()).unwrap();
        let json = serde_json::to_string_pretty(&doc).unwrap();
        let back: RuleSetDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(doc, back);
        for rule in &doc.rules {
            assert_eq!(rule.length, rule.conditions.len());
        }
    }
}
