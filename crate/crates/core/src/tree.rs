//! From-scratch CART for binary classification: greedy Gini splits over
//! midpoint thresholds, a minimum-samples-per-leaf floor, optional depth
//! cap and per-split feature subsampling. The same representation serves
//! the black-box forest members and the disagreement surrogate.

use std::fmt::Write as _;

use rand::Rng;

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::seeds::{self, SeedRng};

/// Minimum leaf size given either as an absolute count or as a fraction of
/// the training rows.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinSamples {
    Count(usize),
    Fraction(f64),
}

impl MinSamples {
    /// Resolves against a training-set size; fractions round up.
    pub fn resolve(&self, n_train: usize) -> Result<usize> {
        match *self {
            MinSamples::Count(c) => {
                if c == 0 {
                    Err(Error::InvalidMinSamples("count must be >= 1".into()))
                } else {
                    Ok(c)
                }
            }
            MinSamples::Fraction(f) => {
                if !(f > 0.0 && f < 1.0) {
                    return Err(Error::InvalidMinSamples(format!(
                        "fraction {f} outside (0, 1)"
                    )));
                }
                // Epsilon guards products like 0.01 * 7000 that are
                // mathematically integral but land just above it in binary.
                let raw = (f * n_train as f64 - 1e-9).ceil() as usize;
                Ok(raw.max(1))
            }
        }
    }
}

impl std::fmt::Display for MinSamples {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            MinSamples::Count(c) => write!(f, "{c}"),
            MinSamples::Fraction(x) => {
                let pct = x * 100.0;
                if (pct - pct.round()).abs() < 1e-9 {
                    write!(f, "{}%", pct.round())
                } else {
                    write!(f, "{pct}%")
                }
            }
        }
    }
}

impl std::str::FromStr for MinSamples {
    type Err = Error;

    /// `"70"` is an absolute count, `"0.01"` a fraction, `"1%"` a percent.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parsed = if let Some(pct) = s.strip_suffix('%') {
            pct.parse::<f64>()
                .ok()
                .map(|p| MinSamples::Fraction(p / 100.0))
        } else if s.contains('.') {
            s.parse::<f64>().ok().map(MinSamples::Fraction)
        } else {
            s.parse::<usize>().ok().map(MinSamples::Count)
        };
        let parsed =
            parsed.ok_or_else(|| Error::InvalidMinSamples(format!("cannot parse {s:?}")))?;
        // Surface range errors at parse time.
        parsed.resolve(usize::MAX / 2).map(|_| parsed)
    }
}

/// How many features each split considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeaturesPerSplit {
    All,
    /// max(1, ⌊√d⌋), the usual forest default.
    Sqrt,
    Count(usize),
}

impl FeaturesPerSplit {
    pub fn resolve(&self, d: usize) -> usize {
        match *self {
            FeaturesPerSplit::All => d,
            FeaturesPerSplit::Sqrt => ((d as f64).sqrt().floor() as usize).clamp(1, d),
            FeaturesPerSplit::Count(k) => k.clamp(1, d),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeParams {
    pub min_samples_leaf: MinSamples,
    pub max_depth: Option<usize>,
    pub features_per_split: FeaturesPerSplit,
    /// Used by forest training only; a single CART fit ignores it.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            min_samples_leaf: MinSamples::Count(1),
            max_depth: None,
            features_per_split: FeaturesPerSplit::All,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: u8,
        sample_count: usize,
        class_counts: [usize; 2],
    },
}

/// A fitted binary classification tree. Node 0 is the root; a row routes
/// left iff `value <= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct CartTree {
    nodes: Vec<Node>,
    n_features: usize,
}

impl CartTree {
    /// Builds a tree from an explicit node list (root at index 0).
    pub fn from_nodes(nodes: Vec<Node>, n_features: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidMatrix("tree has no nodes".into()));
        }
        for node in &nodes {
            if let Node::Internal {
                feature,
                left,
                right,
                ..
            } = node
            {
                if *feature >= n_features {
                    return Err(Error::InvalidMatrix(format!(
                        "split feature {feature} out of range"
                    )));
                }
                if *left >= nodes.len() || *right >= nodes.len() {
                    return Err(Error::InvalidMatrix("child index out of range".into()));
                }
            }
        }
        Ok(CartTree { nodes, n_features })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { class, .. } => return *class,
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    /// Visits every leaf with its root-to-leaf path of
    /// `(feature, is_upper_bound, threshold)` conditions; `is_upper_bound`
    /// is true for the `value <= threshold` (left) edge.
    pub fn for_each_path<F: FnMut(&[(usize, bool, f64)], &Node)>(&self, mut visit: F) {
        let mut path: Vec<(usize, bool, f64)> = Vec::new();
        self.walk(0, &mut path, &mut visit);
    }

    fn walk<F: FnMut(&[(usize, bool, f64)], &Node)>(
        &self,
        at: usize,
        path: &mut Vec<(usize, bool, f64)>,
        visit: &mut F,
    ) {
        match &self.nodes[at] {
            leaf @ Node::Leaf { .. } => visit(path, leaf),
            Node::Internal {
                feature,
                threshold,
                left,
                right,
            } => {
                path.push((*feature, true, *threshold));
                self.walk(*left, path, visit);
                path.pop();
                path.push((*feature, false, *threshold));
                self.walk(*right, path, visit);
                path.pop();
            }
        }
    }

    /// Smallest training sample count over all leaves.
    pub fn min_leaf_support(&self) -> usize {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { sample_count, .. } => Some(*sample_count),
                _ => None,
            })
            .min()
            .unwrap_or(0)
    }

    /// Plain-text serialization; floats use the shortest round-tripping
    /// form, so reloading reproduces the tree bit for bit.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tree v1");
        let _ = writeln!(out, "features {}", self.n_features);
        let _ = writeln!(out, "nodes {}", self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let _ = writeln!(out, "{i} internal {feature} {threshold} {left} {right}");
                }
                Node::Leaf {
                    class,
                    sample_count,
                    class_counts,
                } => {
                    let _ = writeln!(
                        out,
                        "{i} leaf {class} {sample_count} {} {}",
                        class_counts[0], class_counts[1]
                    );
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        Self::parse_lines(&mut lines)
    }

    pub(crate) fn parse_lines<'a, I: Iterator<Item = &'a str>>(lines: &mut I) -> Result<Self> {
        let bad = |detail: String| Error::Parse {
            what: "tree",
            detail,
        };
        let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
        if header.trim() != "tree v1" {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let n_features = parse_kv(lines.next(), "features").map_err(|d| bad(d))?;
        let n_nodes = parse_kv(lines.next(), "nodes").map_err(|d| bad(d))?;
        let mut nodes = Vec::with_capacity(n_nodes);
        for i in 0..n_nodes {
            let line = lines.next().ok_or_else(|| bad("missing node line".into()))?;
            let mut parts = line.split_whitespace();
            let idx: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(format!("bad node line {line:?}")))?;
            if idx != i {
                return Err(bad(format!("node {idx} out of order")));
            }
            let kind = parts.next().unwrap_or("");
            let mut num = |what: &str| -> Result<f64> {
                parts
                    .next()
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| bad(format!("node {i}: bad {what}")))
            };
            let node = match kind {
                "internal" => Node::Internal {
                    feature: num("feature")? as usize,
                    threshold: num("threshold")?,
                    left: num("left")? as usize,
                    right: num("right")? as usize,
                },
                "leaf" => Node::Leaf {
                    class: num("class")? as u8,
                    sample_count: num("sample count")? as usize,
                    class_counts: [num("count0")? as usize, num("count1")? as usize],
                },
                other => return Err(bad(format!("node {i}: unknown kind {other:?}"))),
            };
            nodes.push(node);
        }
        CartTree::from_nodes(nodes, n_features)
    }
}

fn parse_kv(line: Option<&str>, key: &str) -> std::result::Result<usize, String> {
    let line = line.ok_or_else(|| format!("missing {key} line"))?;
    let rest = line
        .trim()
        .strip_prefix(key)
        .ok_or_else(|| format!("expected {key:?} in {line:?}"))?;
    rest.trim()
        .parse()
        .map_err(|_| format!("bad {key} value in {line:?}"))
}

/// Fits a CART on the full dataset (no bootstrap). Splits minimize
/// weighted Gini impurity; candidates are midpoints between consecutive
/// distinct sorted values; growth stops at pure nodes, the leaf-size
/// floor, the optional depth cap, or when no split decreases impurity.
pub fn fit_cart(x: &FeatureMatrix, y: &[u8], params: &TreeParams) -> Result<CartTree> {
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
    let min_leaf = params.min_samples_leaf.resolve(n)?;
    if min_leaf > n {
        return Err(Error::MinSamplesExceedsRows { min: min_leaf, n });
    }
    let columns = x.columns();
    let rows: Vec<u32> = (0..n as u32).collect();
    let mut rng = seeds::rng(params.seed, &[]);
    Ok(fit_on_rows(&columns, y, &rows, min_leaf, params, &mut rng))
}

/// Fits on an explicit multiset of row indices (bootstrap samples repeat
/// rows). `min_leaf` must already be resolved.
pub(crate) fn fit_on_rows(
    columns: &[Vec<f64>],
    labels: &[u8],
    rows: &[u32],
    min_leaf: usize,
    params: &TreeParams,
    rng: &mut SeedRng,
) -> CartTree {
    let d = columns.len();
    let k_features = params.features_per_split.resolve(d);
    let m = rows.len();

    // Per-feature row orderings, kept sorted through partitioning so each
    // node scan is linear.
    let mut order: Vec<Vec<u32>> = (0..d)
        .map(|j| {
            let mut idx = rows.to_vec();
            idx.sort_unstable_by(|&a, &b| {
                columns[j][a as usize].total_cmp(&columns[j][b as usize])
            });
            idx
        })
        .collect();

    let mut builder = TreeBuilder {
        columns,
        labels,
        min_leaf,
        max_depth: params.max_depth,
        k_features,
        d,
        nodes: Vec::new(),
        tmp: vec![0u32; m],
        goes_left: vec![false; labels.len()],
        feature_pool: (0..d).collect(),
    };

    // Explicit stack; unconstrained trees can be deep enough to overflow
    // the call stack.
    let root = builder.reserve();
    let mut stack = vec![Task {
        slot: root,
        start: 0,
        end: m,
        depth: 0,
    }];
    while let Some(task) = stack.pop() {
        builder.process(task, &mut order, &mut stack, rng);
    }

    CartTree {
        nodes: builder.nodes,
        n_features: d,
    }
}

struct Task {
    slot: usize,
    start: usize,
    end: usize,
    depth: usize,
}

struct TreeBuilder<'a> {
    columns: &'a [Vec<f64>],
    labels: &'a [u8],
    min_leaf: usize,
    max_depth: Option<usize>,
    k_features: usize,
    d: usize,
    nodes: Vec<Node>,
    tmp: Vec<u32>,
    goes_left: Vec<bool>,
    feature_pool: Vec<usize>,
}

struct Split {
    feature: usize,
    threshold: f64,
    left_len: usize,
}

impl<'a> TreeBuilder<'a> {
    fn reserve(&mut self) -> usize {
        self.nodes.push(Node::Leaf {
            class: 0,
            sample_count: 0,
            class_counts: [0, 0],
        });
        self.nodes.len() - 1
    }

    fn process(
        &mut self,
        task: Task,
        order: &mut [Vec<u32>],
        stack: &mut Vec<Task>,
        rng: &mut SeedRng,
    ) {
        let Task {
            slot,
            start,
            end,
            depth,
        } = task;
        let m = end - start;
        let count1: usize = order[0][start..end]
            .iter()
            .map(|&r| self.labels[r as usize] as usize)
            .sum();
        let count0 = m - count1;

        let depth_capped = self.max_depth.is_some_and(|cap| depth >= cap);
        let splittable = count1 != 0 && count0 != 0 && m >= 2 * self.min_leaf && !depth_capped;
        let split = if splittable {
            self.best_split(order, start, end, count1, rng)
        } else {
            None
        };

        match split {
            None => {
                // Majority class; ties resolve to 0 (agreement).
                let class = u8::from(count1 > count0);
                self.nodes[slot] = Node::Leaf {
                    class,
                    sample_count: m,
                    class_counts: [count0, count1],
                };
            }
            Some(split) => {
                // Mark rows on the left of the winning split, partition
                // every feature ordering by that mark, then clear it.
                for &r in &order[split.feature][start..start + split.left_len] {
                    self.goes_left[r as usize] = true;
                }
                for ord in order.iter_mut() {
                    let mut lo = 0;
                    let mut hi = split.left_len;
                    for &r in &ord[start..end] {
                        if self.goes_left[r as usize] {
                            self.tmp[lo] = r;
                            lo += 1;
                        } else {
                            self.tmp[hi] = r;
                            hi += 1;
                        }
                    }
                    ord[start..end].copy_from_slice(&self.tmp[..m]);
                }
                for &r in &order[split.feature][start..start + split.left_len] {
                    self.goes_left[r as usize] = false;
                }

                let left = self.reserve();
                let right = self.reserve();
                self.nodes[slot] = Node::Internal {
                    feature: split.feature,
                    threshold: split.threshold,
                    left,
                    right,
                };
                let mid = start + split.left_len;
                stack.push(Task {
                    slot: right,
                    start: mid,
                    end,
                    depth: depth + 1,
                });
                stack.push(Task {
                    slot: left,
                    start,
                    end: mid,
                    depth: depth + 1,
                });
            }
        }
    }

    /// Greedy best split over the candidate features. Gain ties keep the
    /// earliest candidate, i.e. the lowest feature index, then the lowest
    /// threshold.
    fn best_split(
        &mut self,
        order: &[Vec<u32>],
        start: usize,
        end: usize,
        count1: usize,
        rng: &mut SeedRng,
    ) -> Option<Split> {
        let m = end - start;
        let count0 = m - count1;
        // Minimizing sum of per-child (n0*n1/n) is equivalent to
        // minimizing weighted Gini; the parent term makes gain > 0 mean a
        // strict impurity decrease.
        let parent_score = (count0 as f64) * (count1 as f64) / m as f64;

        let candidates: &[usize] = if self.k_features >= self.d {
            &self.feature_pool
        } else {
            // Partial Fisher-Yates, then sort so evaluation order is by
            // feature index.
            for i in 0..self.k_features {
                let j = rng.gen_range(i..self.d);
                self.feature_pool.swap(i, j);
            }
            self.feature_pool[..self.k_features].sort_unstable();
            &self.feature_pool[..self.k_features]
        };

        let mut best: Option<(f64, Split)> = None;
        for &feature in candidates {
            let col = &self.columns[feature];
            let ord = &order[feature][start..end];
            let mut left1 = 0usize;
            for pos in 0..m - 1 {
                let r = ord[pos] as usize;
                left1 += self.labels[r] as usize;
                let v = col[r];
                let v_next = col[ord[pos + 1] as usize];
                if v_next == v {
                    continue;
                }
                let left_n = pos + 1;
                let right_n = m - left_n;
                if left_n < self.min_leaf || right_n < self.min_leaf {
                    continue;
                }
                let left0 = left_n - left1;
                let right1 = count1 - left1;
                let right0 = right_n - right1;
                let score = (left0 as f64) * (left1 as f64) / left_n as f64
                    + (right0 as f64) * (right1 as f64) / right_n as f64;
                let gain = parent_score - score;
                if gain <= 0.0 {
                    continue;
                }
                if best.as_ref().is_none_or(|(g, _)| gain > *g) {
                    let mut threshold = v + (v_next - v) / 2.0;
                    if threshold >= v_next {
                        // Adjacent floats can round the midpoint up; fall
                        // back to the left value so both sides stay
                        // non-empty under `<=` routing.
                        threshold = v;
                    }
                    best = Some((
                        gain,
                        Split {
                            feature,
                            threshold,
                            left_len: left_n,
                        },
                    ));
                }
            }
        }
        best.map(|(_, s)| s)
    }
}

/// Predicts a label per row.
pub fn predict_tree(tree: &CartTree, x: &FeatureMatrix) -> Result<Vec<u8>> {
    if x.n_features() != tree.n_features {
        return Err(Error::FeatureMismatch(format!(
            "tree expects {} features, matrix has {}",
            tree.n_features,
            x.n_features()
        )));
    }
    Ok((0..x.n_rows()).map(|i| tree.predict_row(x.row(i))).collect())
}
