//! Independent oracles and the property suites built on them. Shared by the
//! per-module integration tests and the acceptance runner.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use checkworthy::balance::{self, BalanceConfig, Strategy};
use checkworthy::corpus::{self, ClassCounts, Dataset, Label, LabeledTweet, Language, Split};
use checkworthy::eval::{self, Prediction};
use checkworthy::experiment::{self, ExperimentConfig, ModelKind};
use checkworthy::features::TfIdfModel;
use checkworthy::forest::{self, DecisionTree, ForestConfig, Node, TreeParams};
use checkworthy::sparse::SparseVector;
use checkworthy::svm::{self, SvmConfig};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- TF-IDF

/// Brute-force TF-IDF: plain loops and linear scans, no maps.
pub fn tfidf_oracle(
    docs: &[Vec<String>],
    ngram_max: usize,
    max_features: usize,
    doc: &[String],
) -> Vec<(String, f64)> {
    fn grams(tokens: &[String], ngram_max: usize) -> Vec<String> {
        let mut out = Vec::new();
        for n in 1..=ngram_max {
            if tokens.len() < n {
                break;
            }
            for start in 0..=tokens.len() - n {
                out.push(tokens[start..start + n].join(" "));
            }
        }
        out
    }
    let mut totals: Vec<(String, usize)> = Vec::new();
    for d in docs {
        for g in grams(d, ngram_max) {
            match totals.iter_mut().find(|(t, _)| *t == g) {
                Some(e) => e.1 += 1,
                None => totals.push((g, 1)),
            }
        }
    }
    totals.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    totals.truncate(max_features);
    let vocab: Vec<String> = totals.into_iter().map(|(g, _)| g).collect();

    let doc_grams = grams(doc, ngram_max);
    let mut weights = Vec::new();
    for term in &vocab {
        let tf = doc_grams.iter().filter(|g| *g == term).count();
        if tf == 0 {
            continue;
        }
        let df = docs
            .iter()
            .filter(|d| grams(d, ngram_max).contains(term))
            .count();
        let idf = ((1.0 + docs.len() as f64) / (1.0 + df as f64)).ln() + 1.0;
        weights.push((term.clone(), tf as f64 * idf));
    }
    let norm = weights.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    for w in &mut weights {
        w.1 /= norm;
    }
    weights.sort_by(|a, b| a.0.cmp(&b.0));
    weights
}

fn random_docs(rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    let alphabet = ["covid", "vaccine", "mask", "is", "real", "fake", "news", "cases"];
    let n_docs = rng.gen_range(1..=20);
    (0..n_docs)
        .map(|_| {
            let len = rng.gen_range(0..=10);
            (0..len)
                .map(|_| alphabet[rng.gen_range(0..alphabet.len())].to_string())
                .collect()
        })
        .collect()
}

pub fn tfidf_oracle_suite(instances: usize) -> Check {
    let mut rng = rng(2814);
    let mut compared = 0;
    for case in 0..instances {
        let mut docs = random_docs(&mut rng);
        if docs.iter().all(Vec::is_empty) {
            docs[0].push("covid".into());
        }
        let ngram_max = rng.gen_range(1..=3);
        let max_features = rng.gen_range(1..=40);
        let model = TfIdfModel::fit(&docs, ngram_max, max_features).map_err(|e| e.to_string())?;
        ensure!(model.len() <= max_features, "case {case}: vocabulary over cap");
        let mut probes = docs.clone();
        probes.extend(random_docs(&mut rng).into_iter().take(3));
        for doc in &probes {
            let got = model.transform(doc);
            let mut got: Vec<(String, f64)> = got
                .iter()
                .map(|(i, w)| (model.term(i).to_string(), w))
                .collect();
            got.sort_by(|a, b| a.0.cmp(&b.0));
            let want = tfidf_oracle(&docs, ngram_max, max_features, doc);
            ensure!(
                got.len() == want.len(),
                "case {case}: {} entries vs oracle {} for {doc:?}",
                got.len(),
                want.len()
            );
            for ((gt, gw), (wt, ww)) in got.iter().zip(&want) {
                ensure!(gt == wt, "case {case}: term {gt:?} vs oracle {wt:?}");
                ensure!((gw - ww).abs() <= 1e-9, "case {case}: {gt:?} weight {gw} vs oracle {ww}");
            }
            compared += 1;
        }
    }
    ensure!(compared > 0, "nothing compared");
    Ok(())
}

// ---------------------------------------------------------------- SMOTE

fn random_sparse(rng: &mut ChaCha8Rng, dim: usize, density: f64) -> SparseVector {
    let dense: Vec<f64> = (0..dim)
        .map(|_| {
            if rng.gen_bool(density) {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            }
        })
        .collect();
    SparseVector::from_dense(&dense)
}

pub fn smote_suite(instances: usize) -> Check {
    let mut rng = rng(2814);
    for case in 0..instances {
        let dim = rng.gen_range(1..=8);
        let majority = rng.gen_range(3..=40);
        let ratio = [1.0, 0.9, 0.75, 0.5][rng.gen_range(0..4)];
        let target = (ratio * majority as f64).round() as usize;
        let minority = rng.gen_range(2..=target.max(2));
        let minority_label = if rng.gen_bool(0.5) { Label::Yes } else { Label::No };
        let mut vectors = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..majority + minority {
            vectors.push(random_sparse(&mut rng, dim, 0.6));
        }
        let mut order: Vec<bool> = (0..majority + minority).map(|i| i < minority).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        for &is_minority in &order {
            labels.push(if is_minority { minority_label } else { minority_label.other() });
        }
        let config = BalanceConfig {
            strategy: Strategy::Smote,
            target_ratio: ratio,
            k_neighbors: rng.gen_range(1..=6),
            seed: rng.gen(),
        };
        let out = balance::balance(&vectors, &labels, &config).map_err(|e| e.to_string())?;
        let counts = ClassCounts::from_labels(&out.labels);
        let expected = target.max(minority);
        ensure!(
            counts.get(minority_label) == expected && counts.get(minority_label.other()) == majority,
            "case {case}: counts {counts:?}, expected minority {expected} majority {majority}"
        );
        for (i, v) in vectors.iter().enumerate() {
            let same = out.vectors[i].indices() == v.indices()
                && out.vectors[i]
                    .values()
                    .iter()
                    .zip(v.values())
                    .all(|(a, b)| a.to_bits() == b.to_bits());
            ensure!(same && out.labels[i] == labels[i], "case {case}: input row {i} altered");
        }
        ensure!(
            out.origins.len() == out.vectors.len() - vectors.len(),
            "case {case}: origin count mismatch"
        );
        for (o, s) in out.origins.iter().zip(&out.vectors[vectors.len()..]) {
            ensure!(
                labels[o.parent] == minority_label && labels[o.neighbor] == minority_label,
                "case {case}: synthetic row from a majority parent"
            );
            let (x, nn) = (&vectors[o.parent], &vectors[o.neighbor]);
            for j in 0..dim as u32 {
                let (a, b) = (x.get(j), nn.get(j));
                let v = s.get(j);
                ensure!(
                    a.min(b) <= v && v <= a.max(b),
                    "case {case}: coordinate {j} = {v} outside [{a}, {b}]"
                );
            }
        }
        let again = balance::balance(&vectors, &labels, &config).map_err(|e| e.to_string())?;
        ensure!(
            again.vectors == out.vectors && again.labels == out.labels,
            "case {case}: same seed gave different output"
        );
    }
    Ok(())
}

// ---------------------------------------------------------------- SVM

/// A linearly separable set with margin at least `gap` along a random normal.
pub fn separable_set(rng: &mut ChaCha8Rng, n: usize, dim: usize, gap: f64) -> (Vec<SparseVector>, Vec<Label>) {
    let mut normal: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let len = normal.iter().map(|w| w * w).sum::<f64>().sqrt().max(1e-3);
    for w in &mut normal {
        *w /= len;
    }
    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    while vectors.len() < n {
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let s: f64 = x.iter().zip(&normal).map(|(a, b)| a * b).sum::<f64>() + 0.1;
        if s.abs() < gap {
            continue;
        }
        // Keep both classes present.
        let label = if s > 0.0 { Label::Yes } else { Label::No };
        if vectors.len() == n - 1 && !labels.contains(&label.other()) {
            continue;
        }
        vectors.push(SparseVector::from_dense(&x));
        labels.push(label);
    }
    (vectors, labels)
}

/// Maximizes the SVM dual with accelerated projected gradient ascent. The
/// projection onto `{0 <= a <= c, y'a = 0}` bisects on the multiplier of the
/// equality constraint.
pub fn dual_oracle(vectors: &[SparseVector], labels: &[Label], c: f64) -> (Vec<f64>, f64) {
    let n = vectors.len();
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    let dense: Vec<Vec<f64>> = {
        let dim = vectors.iter().map(SparseVector::dim).max().unwrap_or(0);
        vectors
            .iter()
            .map(|v| (0..dim as u32).map(|j| v.get(j)).collect())
            .collect()
    };
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let k: f64 = dense[i].iter().zip(&dense[j]).map(|(a, b)| a * b).sum();
            q[i * n + j] = y[i] * y[j] * k;
        }
    }
    let objective = |a: &[f64]| {
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += a[i] * q[i * n + j] * a[j];
            }
        }
        a.iter().sum::<f64>() - 0.5 * quad
    };
    let project = |z: &[f64]| -> Vec<f64> {
        let at = |lambda: f64| -> (Vec<f64>, f64) {
            let a: Vec<f64> = z
                .iter()
                .zip(&y)
                .map(|(zi, yi)| (zi - lambda * yi).clamp(0.0, c))
                .collect();
            let s = a.iter().zip(&y).map(|(ai, yi)| ai * yi).sum();
            (a, s)
        };
        let (mut lo, mut hi) = (-1.0, 1.0);
        while at(lo).1 < 0.0 {
            lo *= 2.0;
        }
        while at(hi).1 > 0.0 {
            hi *= 2.0;
        }
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if at(mid).1 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(0.5 * (lo + hi)).0
    };
    let lipschitz = (0..n).map(|i| q[i * n + i]).sum::<f64>().max(1e-12);
    let step = 1.0 / lipschitz;
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    let mut best = objective(&a);
    let gradient = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| 1.0 - (0..n).map(|j| q[i * n + j] * x[j]).sum::<f64>())
            .collect()
    };
    for iteration in 1..=20_000 {
        let grad = gradient(&z);
        let stepped: Vec<f64> = z.iter().zip(&grad).map(|(zi, g)| zi + step * g).collect();
        let next = project(&stepped);
        let value = objective(&next);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        if value < best {
            // Restart momentum when the objective goes down.
            z = a.clone();
            t = 1.0;
            continue;
        }
        z = next
            .iter()
            .zip(&a)
            .map(|(nx, ax)| nx + (t - 1.0) / t_next * (nx - ax))
            .collect();
        a = next;
        best = value;
        t = t_next;
        if iteration % 25 == 0 {
            // Fixed point of the plain projected-gradient map.
            let grad = gradient(&a);
            let stepped: Vec<f64> = a.iter().zip(&grad).map(|(ai, g)| ai + step * g).collect();
            let residual = project(&stepped)
                .iter()
                .zip(&a)
                .map(|(p, ai)| (p - ai).abs())
                .fold(0.0, f64::max);
            if residual < 1e-11 {
                break;
            }
        }
    }
    (a, best)
}

/// Expands the model's support set back into one multiplier per sample.
pub fn full_alphas(model: &svm::SvmModel, vectors: &[SparseVector]) -> Vec<f64> {
    let mut out = vec![0.0; vectors.len()];
    let mut k = 0;
    for (i, v) in vectors.iter().enumerate() {
        if k < model.support_vectors.len() && model.support_vectors[k] == *v {
            out[i] = model.alphas[k];
            k += 1;
        }
    }
    assert_eq!(k, model.support_vectors.len(), "support vectors not in training order");
    out
}

pub fn kkt_violation(model: &svm::SvmModel, vectors: &[SparseVector], labels: &[Label]) -> f64 {
    let c = model.config.c;
    let alphas = full_alphas(model, vectors);
    let mut worst: f64 = 0.0;
    for ((v, l), a) in vectors.iter().zip(labels).zip(&alphas) {
        let m = l.sign() * model.decision_value(v);
        let violation = if *a <= 0.0 {
            (1.0 - m).max(0.0)
        } else if *a >= c {
            (m - 1.0).max(0.0)
        } else {
            (m - 1.0).abs()
        };
        worst = worst.max(violation);
    }
    worst
}

pub fn quadrant_fixture() -> (Vec<SparseVector>, Vec<Label>) {
    let pts = [(1.0, 1.0, Label::Yes), (2.0, 2.0, Label::Yes), (-1.0, -1.0, Label::No), (-2.0, -2.0, Label::No)];
    (
        pts.iter().map(|&(x, y, _)| SparseVector::from_dense(&[x, y])).collect(),
        pts.iter().map(|p| p.2).collect(),
    )
}

pub fn svm_suite(instances: usize) -> Check {
    let mut rng = rng(2814);
    let config = SvmConfig::default();
    for case in 0..instances {
        let n = rng.gen_range(4..=20);
        let dim = rng.gen_range(1..=5);
        let (vectors, labels) = separable_set(&mut rng, n, dim, 0.2);
        let model = svm::train(&vectors, &labels, &config).map_err(|e| e.to_string())?;
        let violation = kkt_violation(&model, &vectors, &labels);
        ensure!(violation <= 1e-3, "case {case}: KKT violation {violation:e}");
        let balance: f64 = model.alphas.iter().zip(&model.labels).map(|(a, l)| a * l.sign()).sum();
        ensure!(balance.abs() <= 1e-6, "case {case}: sum(a*y) = {balance:e}");
        ensure!(
            model.alphas.iter().all(|&a| a > 0.0 && a <= config.c),
            "case {case}: multiplier outside (0, C]"
        );
        let (_, oracle) = dual_oracle(&vectors, &labels, config.c);
        let got = model.dual_objective();
        ensure!(
            (got - oracle).abs() <= 1e-3,
            "case {case}: dual objective {got} vs oracle {oracle}"
        );
    }
    let (vectors, labels) = quadrant_fixture();
    let model = svm::train(&vectors, &labels, &config).map_err(|e| e.to_string())?;
    for (v, l) in vectors.iter().zip(&labels) {
        ensure!(model.predict(v) == *l, "quadrant fixture misclassified {v}");
    }
    Ok(())
}

// ---------------------------------------------------------------- Forest

pub fn sparse_table(rng: &mut ChaCha8Rng, n: usize, dim: usize, density: f64) -> (Vec<SparseVector>, Vec<Label>) {
    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let v = random_sparse(rng, dim, density);
        let signal = v.get(0) + v.get(1);
        let label = if i == 0 {
            Label::Yes
        } else if i == 1 {
            Label::No
        } else if signal + rng.gen_range(-0.3..0.3) > 0.0 {
            Label::Yes
        } else {
            Label::No
        };
        vectors.push(v);
        labels.push(label);
    }
    (vectors, labels)
}

/// Weighted Gini of the children for the split `x[feature] <= threshold`.
pub fn split_impurity(vectors: &[SparseVector], labels: &[Label], feature: u32, threshold: f64) -> f64 {
    let mut counts = [[0.0; 2]; 2];
    for (v, l) in vectors.iter().zip(labels) {
        let side = usize::from(v.get(feature) > threshold);
        counts[side][usize::from(*l == Label::Yes)] += 1.0;
    }
    let total = vectors.len() as f64;
    counts
        .iter()
        .map(|c| (c[0] + c[1]) * forest::gini(c[0], c[1]))
        .sum::<f64>()
        / total
}

/// Lowest child impurity over every feature and every midpoint threshold.
pub fn exhaustive_best_split(vectors: &[SparseVector], labels: &[Label], dim: usize) -> Option<(u32, f64, f64)> {
    let mut best: Option<(u32, f64, f64)> = None;
    for f in 0..dim as u32 {
        let mut values: Vec<f64> = vectors.iter().map(|v| v.get(f)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let threshold = (pair[0] + pair[1]) / 2.0;
            let impurity = split_impurity(vectors, labels, f, threshold);
            if best.is_none_or(|b| impurity < b.2) {
                best = Some((f, threshold, impurity));
            }
        }
    }
    best
}

fn forest_bytes(model: &forest::ForestModel) -> Vec<u8> {
    let mut out = Vec::new();
    model.write(&mut out).expect("in-memory write");
    out
}

pub fn forest_suite(tables: usize) -> Check {
    let mut rng = rng(2814);
    let (vectors, labels) = sparse_table(&mut rng, 300, 60, 0.15);
    let config = ForestConfig {
        n_trees: 24,
        ..ForestConfig::default()
    };
    let parallel = forest::train_with(&vectors, &labels, &config, true).map_err(|e| e.to_string())?;
    let sequential = forest::train_with(&vectors, &labels, &config, false).map_err(|e| e.to_string())?;
    ensure!(
        forest_bytes(&parallel) == forest_bytes(&sequential),
        "parallel and sequential forests differ"
    );
    let rerun = forest::train(&vectors, &labels, &config).map_err(|e| e.to_string())?;
    ensure!(rerun == parallel, "second run with seed 2814 differs");

    for table in 0..tables {
        let n = rng.gen_range(4..=25);
        let dim = rng.gen_range(1..=6);
        let (vectors, labels) = sparse_table(&mut rng, n, dim, 0.5);
        let params = TreeParams {
            max_depth: Some(1),
            min_samples_split: 2,
            features_per_split: dim,
        };
        let tree = DecisionTree::fit(&vectors, &labels, params, 2814);
        let oracle = exhaustive_best_split(&vectors, &labels, dim);
        match (tree.root_split(), oracle) {
            (Some((feature, threshold)), Some((_, _, best))) => {
                let got = split_impurity(&vectors, &labels, feature, threshold);
                ensure!(
                    (got - best).abs() <= 1e-12,
                    "table {table}: tree split impurity {got} vs exhaustive {best}"
                );
                let stored: f64 = tree
                    .nodes()
                    .iter()
                    .filter_map(|n| match n {
                        Node::Leaf { no, yes } => Some((no + yes) as f64 * forest::gini(*no as f64, *yes as f64)),
                        Node::Split { .. } => None,
                    })
                    .sum::<f64>()
                    / n as f64;
                ensure!((stored - best).abs() <= 1e-12, "table {table}: leaf counts disagree with split");
            }
            (None, oracle) => {
                let pure = labels.iter().all(|l| *l == labels[0]);
                ensure!(pure || oracle.is_none(), "table {table}: tree did not split but a split exists");
            }
            (Some(_), None) => return Err(format!("table {table}: tree split a constant table")),
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- Metrics

/// Gold set and predictions with the given confusion counts, in that order.
pub fn confusion_fixture(tp: usize, fp: usize, fn_: usize, tn: usize) -> (Dataset, Vec<Prediction>) {
    let mut rows = Vec::new();
    let mut preds = Vec::new();
    let blocks = [(tp, Label::Yes, Label::Yes), (fp, Label::No, Label::Yes), (fn_, Label::Yes, Label::No), (tn, Label::No, Label::No)];
    for (count, gold, predicted) in blocks {
        for _ in 0..count {
            let id = format!("t{}", rows.len());
            rows.push(LabeledTweet::new(id.clone(), "text", Some(gold)));
            preds.push(Prediction {
                id,
                label: predicted,
                score: if predicted == Label::Yes { 0.9 } else { 0.1 },
            });
        }
    }
    (Dataset::new(Language::English, Split::Test, rows).unwrap(), preds)
}

pub fn metrics_suite() -> Check {
    let (gold, preds) = confusion_fixture(2, 1, 2, 5);
    let r = eval::evaluate(&gold, &preds).map_err(|e| e.to_string())?;
    let yes = r.class(Label::Yes);
    ensure!((yes.precision - 2.0 / 3.0).abs() <= 1e-4, "precision {}", yes.precision);
    ensure!((yes.recall - 0.5).abs() <= 1e-4, "recall {}", yes.recall);
    ensure!((yes.f1 - 0.5714).abs() <= 1e-4, "F1 {}", yes.f1);
    ensure!((r.headline_f1_positive - yes.f1).abs() == 0.0, "headline differs from Yes F1");
    ensure!((r.accuracy - 0.7).abs() <= 1e-12, "accuracy {}", r.accuracy);

    let (gold, mut preds) = confusion_fixture(0, 0, 3, 7);
    for p in &mut preds {
        p.label = Label::No;
    }
    let r = eval::evaluate(&gold, &preds).map_err(|e| e.to_string())?;
    ensure!(r.class(Label::Yes).recall == 0.0, "all-negative recall");
    ensure!(r.headline_f1_positive == 0.0, "all-negative F1 {}", r.headline_f1_positive);
    Ok(())
}

// ---------------------------------------------------------------- End to end

const YES_TEXTS: [&str; 5] = [
    "The vaccine reduces hospital admissions by 90 percent, ministry says",
    "Officials confirm 1200 new covid cases in the capital today",
    "Study shows masks cut infection rates in schools #covid",
    "Government reports vaccine doses delivered to 3 million people",
    "@who says infection cases doubled this week https://t.co/x1",
];
const NO_TEXTS: [&str; 5] = [
    "Good morning everyone, have a lovely day",
    "I miss going to concerts so much",
    "Stay home and stay safe friends #lockdown",
    "What a beautiful sunset tonight @friend",
    "Cannot wait for the weekend honestly",
];

/// Writes train/dev/test files with 24/6/10 rows into `dir`.
pub fn write_synthetic_corpus(dir: &Path) {
    let mut rows = Vec::new();
    for i in 0..40 {
        let (text, label) = if i % 2 == 0 {
            (YES_TEXTS[(i / 2) % 5], Label::Yes)
        } else {
            (NO_TEXTS[(i / 2) % 5], Label::No)
        };
        rows.push(LabeledTweet::new(format!("{}", 1_000_000 + i), format!("{text} {}", i % 7), Some(label)));
    }
    let parts = [("train.tsv", 0..24), ("dev.tsv", 24..30), ("test.tsv", 30..40)];
    for (name, range) in parts {
        let d = Dataset::new(Language::English, Split::Train, rows[range].to_vec()).unwrap();
        let mut out = Vec::new();
        corpus::write_dataset(&d, &mut out).unwrap();
        fs::write(dir.join(name), out).unwrap();
    }
}

pub fn synthetic_config(data_dir: &Path, out_dir: &Path, model: ModelKind) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(Language::English, model);
    c.ngram_max = 2;
    c.max_features = 200;
    if model == ModelKind::Forest {
        c.forest.n_trees = 25;
    }
    c.paths.data_dir = data_dir.to_path_buf();
    c.paths.train = PathBuf::from("train.tsv");
    c.paths.dev = Some(PathBuf::from("dev.tsv"));
    c.paths.test = PathBuf::from("test.tsv");
    c.paths.out_dir = out_dir.to_path_buf();
    c
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

pub fn smoke_suite(root: &Path) -> Check {
    write_synthetic_corpus(root);
    for model in [ModelKind::Svm, ModelKind::Forest] {
        let out_dir = root.join(format!("run-{}", model.name()));
        let config = synthetic_config(root, &out_dir, model);
        let first = experiment::run(&config).map_err(|e| e.to_string())?;
        ensure!(first.predictions.len() == 10, "{} predictions for 10 test rows", first.predictions.len());
        ensure!(first.report_path.is_some(), "no report written");
        for f in ["predictions.tsv", "report.txt", "manifest.txt"] {
            ensure!(out_dir.join(f).is_file(), "{f} missing");
        }
        let manifest = fs::read_to_string(&first.manifest_path).unwrap();
        ensure!(manifest.contains("manifest.test_sha256="), "manifest lacks test hash");
        let before = snapshot(&out_dir);
        experiment::run(&config).map_err(|e| e.to_string())?;
        ensure!(snapshot(&out_dir) == before, "{} rerun not byte-identical", model.name());

        let replay = ExperimentConfig::parse(&manifest).map_err(|e| e.to_string())?;
        ensure!(replay == config, "manifest does not reproduce the config");
    }
    Ok(())
}

// ---------------------------------------------------------------- Official data

pub const DATA_ENV: &str = "CHECKWORTHY_DATA_DIR";

/// `(language, split, no, yes)` per file.
pub const TABLE_1: [(Language, Split, usize, usize); 9] = [
    (Language::Dutch, Split::Train, 546, 377),
    (Language::Dutch, Split::Dev, 44, 28),
    (Language::Dutch, Split::Test, 350, 316),
    (Language::English, Split::Train, 1675, 447),
    (Language::English, Split::Dev, 151, 44),
    (Language::English, Split::Test, 110, 39),
    (Language::Spanish, Split::Train, 3087, 1903),
    (Language::Spanish, Split::Dev, 2195, 305),
    (Language::Spanish, Split::Test, 4296, 704),
];

pub fn official_data_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_ENV).map(PathBuf::from).filter(|p| p.is_dir())
}

/// Official file for a split, as named by the bundled recipes.
pub fn official_path(data_dir: &Path, language: Language, split: Split) -> PathBuf {
    let recipe = format!("{}-svm", language.name());
    let mut config = ExperimentConfig::resolve(&recipe).unwrap();
    config.paths.data_dir = data_dir.to_path_buf();
    match split {
        Split::Train => config.paths.train_path(),
        Split::Dev => config.paths.dev_path().unwrap(),
        _ => config.paths.test_path(),
    }
}

pub fn table1_suite(data_dir: &Path) -> Check {
    for (language, split, no, yes) in TABLE_1 {
        let path = official_path(data_dir, language, split);
        let config = ExperimentConfig::resolve(&format!("{}-svm", language.name())).unwrap();
        let d = corpus::load_dataset(&path, language, split, &config.columns).map_err(|e| e.to_string())?;
        let counts = corpus::class_distribution(&d).map_err(|e| e.to_string())?;
        ensure!(
            counts.no == no && counts.yes == yes,
            "{language} {split:?}: {} No / {} Yes, expected {no} / {yes}",
            counts.no,
            counts.yes
        );
    }
    Ok(())
}

pub fn reproduction(data_dir: &Path, recipe: &str, target: f64, band: f64, out_root: &Path) -> Check {
    let mut config = ExperimentConfig::resolve(recipe).map_err(|e| e.to_string())?;
    config.paths.data_dir = data_dir.to_path_buf();
    config.paths.out_dir = out_root.join(recipe);
    let start = Instant::now();
    let out = experiment::run(&config).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let f1 = out
        .report
        .ok_or("test file is unlabeled")?
        .headline_f1_positive
        * 100.0;
    ensure!(
        (f1 - target).abs() <= band,
        "{recipe}: F1 {f1:.2} outside {target} +/- {band} ({elapsed:.1}s)"
    );
    ensure!(elapsed < 120.0, "{recipe}: took {elapsed:.1}s");
    Ok(())
}
