//! Random forest of CART trees with Gini impurity splits over sparse vectors.
//!
//! Tree `t` is grown from its own stream seeded with `seed + t`: the stream
//! first draws a bootstrap sample (size `n`, with replacement, kept as
//! per-sample multiplicities) and then drives feature sampling. Trees are
//! therefore independent and parallel training is bit-identical to
//! sequential training.
//!
//! Absent entries count as 0. Candidate thresholds are midpoints between
//! consecutive distinct values; a sample goes left when `value <= threshold`.
//! At each node features are drawn without replacement until
//! `features_per_split` non-constant ones have been evaluated. Features with
//! no stored entry in the node are constant there and never drawn.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::sparse::SparseVector;

const FORMAT_TAG: &str = "checkworthy-forest v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureRule {
    Sqrt,
    All,
    Fixed(usize),
}

impl FeatureRule {
    pub fn count(self, n_features: usize) -> usize {
        let k = match self {
            FeatureRule::Sqrt => (n_features as f64).sqrt().floor() as usize,
            FeatureRule::All => n_features,
            FeatureRule::Fixed(k) => k.min(n_features),
        };
        k.max(1)
    }
}

impl fmt::Display for FeatureRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureRule::Sqrt => f.write_str("sqrt"),
            FeatureRule::All => f.write_str("all"),
            FeatureRule::Fixed(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for FeatureRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sqrt" => Ok(FeatureRule::Sqrt),
            "all" => Ok(FeatureRule::All),
            k => k
                .parse()
                .ok()
                .filter(|&k: &usize| k > 0)
                .map(FeatureRule::Fixed)
                .ok_or_else(|| Error::Usage(format!("bad features_per_split {k:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_split: FeatureRule,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            features_per_split: FeatureRule::Sqrt,
            seed: 2814,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Usage("n_trees must be at least 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::Usage("min_samples_split must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    /// Weighted class counts of the training samples routed here.
    Leaf { no: u32, yes: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

/// Growth limits for a single tree.
#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Non-constant features evaluated per node.
    pub features_per_split: usize,
}

impl DecisionTree {
    /// Grows a tree on every sample with unit weight.
    pub fn fit(vectors: &[SparseVector], labels: &[Label], params: TreeParams, seed: u64) -> Self {
        let data = TrainData::new(vectors, labels);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        grow(&data, &vec![1; vectors.len()], params, &mut rng)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// The root's `(feature, threshold)`, if the root is a split.
    pub fn root_split(&self) -> Option<(u32, f64)> {
        match self.nodes.first()? {
            Node::Split {
                feature, threshold, ..
            } => Some((*feature, *threshold)),
            Node::Leaf { .. } => None,
        }
    }

    pub fn leaf(&self, v: &SparseVector) -> (u32, u32) {
        let mut idx = 0usize;
        loop {
            match self.nodes[idx] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if v.get(feature) <= threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
                Node::Leaf { no, yes } => return (no, yes),
            }
        }
    }

    /// Majority class of the reached leaf; ties go to `No`.
    pub fn predict(&self, v: &SparseVector) -> Label {
        let (no, yes) = self.leaf(v);
        if yes > no {
            Label::Yes
        } else {
            Label::No
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Split { left, right, .. } => {
                    1 + walk(nodes, left as usize).max(walk(nodes, right as usize))
                }
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub config: ForestConfig,
    pub trees: Vec<DecisionTree>,
}

pub fn gini(no: f64, yes: f64) -> f64 {
    let n = no + yes;
    if n == 0.0 {
        return 0.0;
    }
    let (p, q) = (no / n, yes / n);
    1.0 - p * p - q * q
}

/// Bootstrap multiplicities for tree `tree_index`, as drawn during training.
pub fn bootstrap_weights(seed: u64, tree_index: usize, n: usize) -> Vec<u32> {
    let mut rng = tree_rng(seed, tree_index);
    draw_bootstrap(&mut rng, n)
}

fn tree_rng(seed: u64, tree_index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(tree_index as u64))
}

fn draw_bootstrap(rng: &mut ChaCha8Rng, n: usize) -> Vec<u32> {
    let mut weights = vec![0u32; n];
    for _ in 0..n {
        weights[rng.gen_range(0..n)] += 1;
    }
    weights
}

pub fn train(vectors: &[SparseVector], labels: &[Label], config: &ForestConfig) -> Result<ForestModel> {
    train_with(vectors, labels, config, true)
}

/// Trains the forest, optionally spreading trees over the rayon pool.
pub fn train_with(
    vectors: &[SparseVector],
    labels: &[Label],
    config: &ForestConfig,
    parallel: bool,
) -> Result<ForestModel> {
    config.validate()?;
    if vectors.len() != labels.len() {
        return Err(Error::Usage(format!(
            "{} vectors but {} labels",
            vectors.len(),
            labels.len()
        )));
    }
    if vectors.len() < 2 || !labels.contains(&Label::Yes) || !labels.contains(&Label::No) {
        return Err(Error::Usage(
            "forest training needs at least 2 samples and both classes".into(),
        ));
    }
    if let Some(i) = vectors.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("sample {i} has non-finite feature values")));
    }
    let data = TrainData::new(vectors, labels);
    let params = TreeParams {
        max_depth: config.max_depth,
        min_samples_split: config.min_samples_split,
        features_per_split: config.features_per_split.count(data.n_features),
    };
    let build = |t: usize| {
        let mut rng = tree_rng(config.seed, t);
        let weights = draw_bootstrap(&mut rng, vectors.len());
        grow(&data, &weights, params, &mut rng)
    };
    let trees = if parallel {
        (0..config.n_trees).into_par_iter().map(build).collect()
    } else {
        (0..config.n_trees).map(build).collect()
    };
    Ok(ForestModel {
        config: config.clone(),
        trees,
    })
}

impl ForestModel {
    pub fn votes(&self, v: &SparseVector) -> usize {
        self.trees
            .iter()
            .filter(|t| t.predict(v) == Label::Yes)
            .count()
    }

    /// Fraction of trees voting `Yes`.
    pub fn score(&self, v: &SparseVector) -> f64 {
        self.votes(v) as f64 / self.trees.len() as f64
    }

    /// Majority vote; a tie goes to `No`.
    pub fn predict(&self, v: &SparseVector) -> Label {
        if 2 * self.votes(v) > self.trees.len() {
            Label::Yes
        } else {
            Label::No
        }
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let c = &self.config;
        writeln!(out, "{FORMAT_TAG}")?;
        writeln!(out, "n_trees={}", c.n_trees)?;
        match c.max_depth {
            Some(d) => writeln!(out, "max_depth={d}")?,
            None => writeln!(out, "max_depth=none")?,
        }
        writeln!(out, "min_samples_split={}", c.min_samples_split)?;
        writeln!(out, "features_per_split={}", c.features_per_split)?;
        writeln!(out, "seed={}", c.seed)?;
        for (t, tree) in self.trees.iter().enumerate() {
            writeln!(out, "tree\t{t}\t{}", tree.nodes.len())?;
            for node in &tree.nodes {
                match node {
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => writeln!(out, "split\t{feature}\t{threshold}\t{left}\t{right}")?,
                    Node::Leaf { no, yes } => writeln!(out, "leaf\t{no}\t{yes}")?,
                }
            }
        }
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::parse("forest model", line, msg);
        let mut lines = Vec::new();
        for line in reader.lines() {
            lines.push(line.map_err(|e| Error::io("forest model", e))?);
        }
        if lines.first().map(|l| l.trim()) != Some(FORMAT_TAG) {
            return Err(bad(1, "unrecognized format tag"));
        }
        let value = |n: usize, key: &str| -> Result<&str> {
            lines
                .get(n)
                .and_then(|l| l.strip_prefix(key))
                .and_then(|r| r.strip_prefix('='))
                .ok_or_else(|| bad(n + 1, &format!("expected {key}=")))
        };
        let int = |n: usize, key: &str| -> Result<usize> {
            value(n, key)?
                .parse()
                .map_err(|_| bad(n + 1, &format!("bad {key}")))
        };
        let config = ForestConfig {
            n_trees: int(1, "n_trees")?,
            max_depth: match value(2, "max_depth")? {
                "none" => None,
                _ => Some(int(2, "max_depth")?),
            },
            min_samples_split: int(3, "min_samples_split")?,
            features_per_split: value(4, "features_per_split")?.parse()?,
            seed: value(5, "seed")?
                .parse()
                .map_err(|_| bad(6, "bad seed"))?,
        };
        let mut trees = Vec::with_capacity(config.n_trees);
        let mut n = 6;
        while n < lines.len() {
            if lines[n].is_empty() {
                n += 1;
                continue;
            }
            let head: Vec<&str> = lines[n].split('\t').collect();
            if head.len() != 3 || head[0] != "tree" {
                return Err(bad(n + 1, "expected tree header"));
            }
            let count: usize = head[2].parse().map_err(|_| bad(n + 1, "bad node count"))?;
            let mut nodes = Vec::with_capacity(count);
            for k in 0..count {
                let ln = n + 1 + k;
                let f: Vec<&str> = lines
                    .get(ln)
                    .ok_or_else(|| bad(ln + 1, "truncated tree"))?
                    .split('\t')
                    .collect();
                let parse_u32 = |s: &str| s.parse::<u32>().map_err(|_| bad(ln + 1, "bad integer"));
                let node = match f.as_slice() {
                    ["split", feature, threshold, left, right] => Node::Split {
                        feature: parse_u32(feature)?,
                        threshold: threshold.parse().map_err(|_| bad(ln + 1, "bad threshold"))?,
                        left: parse_u32(left)?,
                        right: parse_u32(right)?,
                    },
                    ["leaf", no, yes] => Node::Leaf {
                        no: parse_u32(no)?,
                        yes: parse_u32(yes)?,
                    },
                    _ => return Err(bad(ln + 1, "bad node line")),
                };
                if let Node::Split { left, right, .. } = node {
                    if left as usize >= count || right as usize >= count {
                        return Err(bad(ln + 1, "child index out of range"));
                    }
                }
                nodes.push(node);
            }
            trees.push(DecisionTree { nodes });
            n += 1 + count;
        }
        if trees.len() != config.n_trees {
            return Err(bad(0, "tree count mismatch"));
        }
        Ok(ForestModel { config, trees })
    }
}

/// Training matrix in both row and column form.
struct TrainData<'a> {
    rows: &'a [SparseVector],
    yes: Vec<bool>,
    columns: Vec<Vec<(u32, f64)>>,
    n_features: usize,
}

impl<'a> TrainData<'a> {
    fn new(rows: &'a [SparseVector], labels: &[Label]) -> Self {
        let n_features = rows.iter().map(SparseVector::dim).max().unwrap_or(0);
        let mut columns = vec![Vec::new(); n_features];
        for (s, row) in rows.iter().enumerate() {
            for (f, v) in row.iter() {
                columns[f as usize].push((s as u32, v));
            }
        }
        TrainData {
            rows,
            yes: labels.iter().map(|l| *l == Label::Yes).collect(),
            columns,
            n_features,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: u32,
    threshold: f64,
    impurity: f64,
}

/// Scratch buffers reused across the nodes of one tree.
struct Scratch {
    feature_stamp: Vec<u32>,
    sample_stamp: Vec<u32>,
    stamp: u32,
    entries: Vec<(f64, u32)>,
}

fn grow(data: &TrainData<'_>, weights: &[u32], params: TreeParams, rng: &mut ChaCha8Rng) -> DecisionTree {
    let mut nodes = vec![Node::Leaf { no: 0, yes: 0 }];
    let root: Vec<u32> = (0..weights.len() as u32)
        .filter(|&s| weights[s as usize] > 0)
        .collect();
    let mut scratch = Scratch {
        feature_stamp: vec![0; data.n_features],
        sample_stamp: vec![0; data.rows.len()],
        stamp: 0,
        entries: Vec::new(),
    };
    let mut stack = vec![(0usize, root, 0usize)];
    while let Some((idx, samples, depth)) = stack.pop() {
        let (mut no, mut yes) = (0u32, 0u32);
        for &s in &samples {
            if data.yes[s as usize] {
                yes += weights[s as usize];
            } else {
                no += weights[s as usize];
            }
        }
        let can_split = no > 0
            && yes > 0
            && (no + yes) as usize >= params.min_samples_split
            && params.max_depth.is_none_or(|d| depth < d);
        let best = if can_split {
            best_split(data, weights, &samples, no, yes, params, rng, &mut scratch)
        } else {
            None
        };
        let Some(best) = best else {
            nodes[idx] = Node::Leaf { no, yes };
            continue;
        };
        let (left, right): (Vec<u32>, Vec<u32>) = samples
            .iter()
            .partition(|&&s| data.rows[s as usize].get(best.feature) <= best.threshold);
        let (l, r) = (nodes.len(), nodes.len() + 1);
        nodes.push(Node::Leaf { no: 0, yes: 0 });
        nodes.push(Node::Leaf { no: 0, yes: 0 });
        nodes[idx] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l as u32,
            right: r as u32,
        };
        stack.push((r, right, depth + 1));
        stack.push((l, left, depth + 1));
    }
    DecisionTree { nodes }
}

#[allow(clippy::too_many_arguments)]
fn best_split(
    data: &TrainData<'_>,
    weights: &[u32],
    samples: &[u32],
    no: u32,
    yes: u32,
    params: TreeParams,
    rng: &mut ChaCha8Rng,
    scratch: &mut Scratch,
) -> Option<Candidate> {
    scratch.stamp += 1;
    let stamp = scratch.stamp;
    let mut candidates = Vec::new();
    for &s in samples {
        scratch.sample_stamp[s as usize] = stamp;
        for &f in data.rows[s as usize].indices() {
            if scratch.feature_stamp[f as usize] != stamp {
                scratch.feature_stamp[f as usize] = stamp;
                candidates.push(f);
            }
        }
    }
    candidates.sort_unstable();

    let mut best: Option<Candidate> = None;
    let mut evaluated = 0;
    let mut drawn = 0;
    while evaluated < params.features_per_split && drawn < candidates.len() {
        let pick = rng.gen_range(drawn..candidates.len());
        candidates.swap(drawn, pick);
        let feature = candidates[drawn];
        drawn += 1;
        if let Some(c) = evaluate_feature(data, weights, samples, feature, no, yes, scratch) {
            evaluated += 1;
            if best.is_none_or(|b| c.impurity < b.impurity) {
                best = Some(c);
            }
        }
    }
    best
}

/// Best threshold for `feature` at this node, or `None` if it is constant.
fn evaluate_feature(
    data: &TrainData<'_>,
    weights: &[u32],
    samples: &[u32],
    feature: u32,
    no: u32,
    yes: u32,
    scratch: &mut Scratch,
) -> Option<Candidate> {
    let entries = &mut scratch.entries;
    entries.clear();
    let column = &data.columns[feature as usize];
    if samples.len() * 16 < column.len() {
        for &s in samples {
            let v = data.rows[s as usize].get(feature);
            if v != 0.0 {
                entries.push((v, s));
            }
        }
    } else {
        let stamp = scratch.stamp;
        for &(s, v) in column {
            if scratch.sample_stamp[s as usize] == stamp {
                entries.push((v, s));
            }
        }
    }
    entries.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    // Distinct values with their weighted class counts; implicit zeros are
    // merged in at their sorted position.
    let (mut zero_no, mut zero_yes) = (no as f64, yes as f64);
    for &(_, s) in entries.iter() {
        let w = weights[s as usize] as f64;
        if data.yes[s as usize] {
            zero_yes -= w;
        } else {
            zero_no -= w;
        }
    }
    let mut groups: Vec<(f64, f64, f64)> = Vec::with_capacity(entries.len() + 1);
    let mut zero_pending = zero_no + zero_yes > 0.0;
    for &(v, s) in entries.iter() {
        if zero_pending && v > 0.0 {
            groups.push((0.0, zero_no, zero_yes));
            zero_pending = false;
        }
        let w = weights[s as usize] as f64;
        let (dn, dy) = if data.yes[s as usize] { (0.0, w) } else { (w, 0.0) };
        match groups.last_mut() {
            Some(g) if g.0 == v => {
                g.1 += dn;
                g.2 += dy;
            }
            _ => groups.push((v, dn, dy)),
        }
    }
    if zero_pending {
        groups.push((0.0, zero_no, zero_yes));
    }
    if groups.len() < 2 {
        return None;
    }

    let total = (no + yes) as f64;
    let (mut left_no, mut left_yes) = (0.0, 0.0);
    let mut best: Option<Candidate> = None;
    for pair in groups.windows(2) {
        left_no += pair[0].1;
        left_yes += pair[0].2;
        let (right_no, right_yes) = (no as f64 - left_no, yes as f64 - left_yes);
        let nl = left_no + left_yes;
        let nr = right_no + right_yes;
        let impurity = (nl * gini(left_no, left_yes) + nr * gini(right_no, right_yes)) / total;
        if best.is_none_or(|b| impurity < b.impurity) {
            let (a, b) = (pair[0].0, pair[1].0);
            let mut threshold = a + (b - a) / 2.0;
            if threshold >= b {
                threshold = a;
            }
            best = Some(Candidate {
                feature,
                threshold,
                impurity,
            });
        }
    }
    best
}
