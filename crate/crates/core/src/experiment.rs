//! Config-driven pipeline runner.
//!
//! `load -> merge(train, dev) -> clean -> fit TF-IDF on the merged training
//! text -> transform -> balance training vectors -> train -> predict test ->
//! evaluate (when the test file is labeled)`.
//!
//! Configs are flat `key=value` files with dotted section prefixes. The run
//! manifest is the effective config plus `manifest.*` keys (input hashes and
//! counts), so it can be fed back to `experiment run` to replay the run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::balance::{self, BalanceConfig, Strategy};
use crate::corpus::{self, ClassCounts, ColumnMap, Dataset, Label, Language, Split};
use crate::error::{Error, Result, StageExt};
use crate::eval::{self, EvalReport, Prediction};
use crate::features::TfIdfModel;
use crate::forest::{self, FeatureRule, ForestConfig, ForestModel};
use crate::preprocess::{self, PreprocessConfig};
use crate::sparse::SparseVector;
use crate::svm::{self, Kernel, SvmConfig, SvmModel};

/// Bundled recipes as `(name, file contents)`.
pub const RECIPES: [(&str, &str); 6] = [
    ("dutch-svm", include_str!("../recipes/dutch-svm.conf")),
    ("dutch-rf", include_str!("../recipes/dutch-rf.conf")),
    ("english-svm", include_str!("../recipes/english-svm.conf")),
    ("english-rf", include_str!("../recipes/english-rf.conf")),
    ("spanish-svm", include_str!("../recipes/spanish-svm.conf")),
    ("spanish-rf", include_str!("../recipes/spanish-rf.conf")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Svm,
    Forest,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Svm => "svm",
            ModelKind::Forest => "forest",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Svm => "SVM",
            ModelKind::Forest => "RF",
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "svm" => Ok(ModelKind::Svm),
            "forest" | "rf" => Ok(ModelKind::Forest),
            other => Err(Error::Usage(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Paths {
    pub data_dir: PathBuf,
    pub train: PathBuf,
    pub dev: Option<PathBuf>,
    pub test: PathBuf,
    pub out_dir: PathBuf,
}

impl Paths {
    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.data_dir.join(p)
        }
    }

    pub fn train_path(&self) -> PathBuf {
        self.resolve(&self.train)
    }

    pub fn dev_path(&self) -> Option<PathBuf> {
        self.dev.as_deref().map(|p| self.resolve(p))
    }

    pub fn test_path(&self) -> PathBuf {
        self.resolve(&self.test)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub language: Language,
    pub model: ModelKind,
    pub seed: u64,
    pub preprocess: PreprocessConfig,
    /// `bundled` or a stopword file path.
    pub stopwords: String,
    pub ngram_max: usize,
    pub max_features: usize,
    pub balance: BalanceConfig,
    pub svm: SvmConfig,
    pub forest: ForestConfig,
    pub columns: ColumnMap,
    pub paths: Paths,
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Usage(format!("{key}: expected true/false, got {v:?}"))),
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Usage(format!("{key}: bad value {v:?}")))
}

/// Reads `key=value` lines; `#` comment lines and blank lines are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse("config", n + 1, "expected key=value"))?;
        if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(Error::parse("config", n + 1, format!("duplicate key {:?}", k.trim())));
        }
    }
    Ok(map)
}

impl ExperimentConfig {
    /// Default settings for a language/model pair.
    pub fn new(language: Language, model: ModelKind) -> Self {
        let seed = 2814;
        ExperimentConfig {
            name: format!("{}-{}", language.name(), model.name()),
            language,
            model,
            seed,
            preprocess: PreprocessConfig::for_language(language),
            stopwords: "bundled".into(),
            ngram_max: 3,
            max_features: 2000,
            balance: BalanceConfig {
                seed,
                ..BalanceConfig::default()
            },
            svm: SvmConfig {
                seed,
                ..SvmConfig::default()
            },
            forest: ForestConfig {
                seed,
                ..ForestConfig::default()
            },
            columns: ColumnMap::default(),
            paths: Paths {
                data_dir: PathBuf::from("."),
                train: PathBuf::from("train.tsv"),
                dev: None,
                test: PathBuf::from("test.tsv"),
                out_dir: PathBuf::from("runs").join(format!("{}-{}", language.name(), model.name())),
            },
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let map = parse_key_values(text)?;
        let get = |k: &str| map.get(k).map(String::as_str);
        let language: Language = get("language")
            .ok_or_else(|| Error::Usage("config lacks `language`".into()))?
            .parse()?;
        let model: ModelKind = get("model")
            .ok_or_else(|| Error::Usage("config lacks `model`".into()))?
            .parse()?;
        let mut c = ExperimentConfig::new(language, model);
        if let Some(seed) = get("seed") {
            c.seed = parse_num("seed", seed)?;
            c.balance.seed = c.seed;
            c.svm.seed = c.seed;
            c.forest.seed = c.seed;
        }
        for (key, v) in &map {
            let k = key.as_str();
            match k {
                "language" | "model" | "seed" => {}
                "name" => c.name = v.clone(),
                "preprocess.remove_urls" => c.preprocess.remove_urls = parse_bool(k, v)?,
                "preprocess.remove_invisible" => c.preprocess.remove_invisible = parse_bool(k, v)?,
                "preprocess.strip_mentions" => c.preprocess.strip_mentions = parse_bool(k, v)?,
                "preprocess.strip_hashtag_sign" => c.preprocess.strip_hashtag_sign = parse_bool(k, v)?,
                "preprocess.remove_stopwords" => c.preprocess.remove_stopwords = parse_bool(k, v)?,
                "preprocess.lowercase" => c.preprocess.lowercase = parse_bool(k, v)?,
                "preprocess.stopwords" => {
                    c.stopwords = v.clone();
                    if v != "bundled" {
                        c.preprocess.stopwords = preprocess::load_stopwords(Path::new(v))?;
                    }
                }
                "features.ngram_max" => c.ngram_max = parse_num(k, v)?,
                "features.max_features" => c.max_features = parse_num(k, v)?,
                "balance.strategy" => c.balance.strategy = v.parse()?,
                "balance.ratio" => c.balance.target_ratio = parse_num(k, v)?,
                "balance.k_neighbors" => c.balance.k_neighbors = parse_num(k, v)?,
                "balance.seed" => c.balance.seed = parse_num(k, v)?,
                "svm.c" => c.svm.c = parse_num(k, v)?,
                "svm.kernel" => c.svm.kernel = v.parse::<Kernel>()?,
                "svm.tol_kkt" => c.svm.tol_kkt = parse_num(k, v)?,
                "svm.max_passes" => c.svm.max_passes = parse_num(k, v)?,
                "svm.seed" => c.svm.seed = parse_num(k, v)?,
                "forest.n_trees" => c.forest.n_trees = parse_num(k, v)?,
                "forest.max_depth" => {
                    c.forest.max_depth = match v.as_str() {
                        "none" => None,
                        d => Some(parse_num(k, d)?),
                    }
                }
                "forest.min_samples_split" => c.forest.min_samples_split = parse_num(k, v)?,
                "forest.features_per_split" => c.forest.features_per_split = v.parse::<FeatureRule>()?,
                "forest.seed" => c.forest.seed = parse_num(k, v)?,
                "columns.id" => c.columns.id = v.clone(),
                "columns.text" => c.columns.text = v.clone(),
                "columns.label" => {
                    c.columns.label = (v != "none").then(|| v.clone());
                }
                "columns.greedy_text" => c.columns.greedy_text = parse_bool(k, v)?,
                "paths.data_dir" => c.paths.data_dir = PathBuf::from(v),
                "paths.train" => c.paths.train = PathBuf::from(v),
                "paths.dev" => c.paths.dev = (v != "none").then(|| PathBuf::from(v)),
                "paths.test" => c.paths.test = PathBuf::from(v),
                "paths.out_dir" => c.paths.out_dir = PathBuf::from(v),
                _ if k.starts_with("manifest.") => {}
                _ => return Err(Error::Usage(format!("unknown config key {k:?}"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// A bundled recipe by name, or a config file path.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        match RECIPES.iter().find(|(n, _)| *n == name_or_path) {
            Some((_, text)) => Self::parse(text),
            None => Self::load(Path::new(name_or_path)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.preprocess.validate()?;
        self.balance.validate()?;
        self.svm.validate()?;
        self.forest.validate()?;
        if !(1..=crate::features::MAX_NGRAM).contains(&self.ngram_max) || self.max_features == 0 {
            return Err(Error::Usage(format!(
                "bad feature settings: ngram_max={} max_features={}",
                self.ngram_max, self.max_features
            )));
        }
        Ok(())
    }

    /// Every effective setting in canonical `key=value` form.
    pub fn to_key_values(&self) -> String {
        let p = &self.preprocess;
        let mut s = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("name", &self.name);
        kv("language", &self.language);
        kv("model", &self.model.name());
        kv("seed", &self.seed);
        kv("preprocess.remove_urls", &p.remove_urls);
        kv("preprocess.remove_invisible", &p.remove_invisible);
        kv("preprocess.strip_mentions", &p.strip_mentions);
        kv("preprocess.strip_hashtag_sign", &p.strip_hashtag_sign);
        kv("preprocess.remove_stopwords", &p.remove_stopwords);
        kv("preprocess.lowercase", &p.lowercase);
        kv("preprocess.stopwords", &self.stopwords);
        kv("features.ngram_max", &self.ngram_max);
        kv("features.max_features", &self.max_features);
        kv("balance.strategy", &self.balance.strategy);
        kv("balance.ratio", &self.balance.target_ratio);
        kv("balance.k_neighbors", &self.balance.k_neighbors);
        kv("balance.seed", &self.balance.seed);
        match self.model {
            ModelKind::Svm => {
                kv("svm.kernel", &self.svm.kernel);
                kv("svm.c", &self.svm.c);
                kv("svm.tol_kkt", &self.svm.tol_kkt);
                kv("svm.max_passes", &self.svm.max_passes);
                kv("svm.seed", &self.svm.seed);
            }
            ModelKind::Forest => {
                let f = &self.forest;
                kv("forest.n_trees", &f.n_trees);
                match f.max_depth {
                    Some(d) => kv("forest.max_depth", &d),
                    None => kv("forest.max_depth", &"none"),
                }
                kv("forest.min_samples_split", &f.min_samples_split);
                kv("forest.features_per_split", &f.features_per_split);
                kv("forest.seed", &f.seed);
            }
        }
        kv("columns.id", &self.columns.id);
        kv("columns.text", &self.columns.text);
        kv("columns.label", &self.columns.label.as_deref().unwrap_or("none"));
        kv("columns.greedy_text", &self.columns.greedy_text);
        kv("paths.data_dir", &self.paths.data_dir.display());
        kv("paths.train", &self.paths.train.display());
        match &self.paths.dev {
            Some(d) => kv("paths.dev", &d.display()),
            None => kv("paths.dev", &"none"),
        }
        kv("paths.test", &self.paths.test.display());
        kv("paths.out_dir", &self.paths.out_dir.display());
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Svm(SvmModel),
    Forest(ForestModel),
}

impl Classifier {
    /// Predicted label and positive-class score.
    pub fn predict(&self, v: &SparseVector) -> (Label, f64) {
        match self {
            Classifier::Svm(m) => (m.predict(v), m.score(v)),
            Classifier::Forest(m) => (m.predict(v), m.score(v)),
        }
    }
}

/// A fitted classifier together with the text pipeline it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    pub preprocess: PreprocessConfig,
    pub features: TfIdfModel,
    pub classifier: Classifier,
}

impl TrainedClassifier {
    pub fn predict_dataset(&self, dataset: &Dataset) -> Vec<Prediction> {
        dataset
            .rows()
            .iter()
            .map(|row| {
                let tokens = preprocess::clean(&row.text, &self.preprocess);
                let (label, score) = self.classifier.predict(&self.features.transform(&tokens));
                Prediction {
                    id: row.id.clone(),
                    label,
                    score,
                }
            })
            .collect()
    }

    /// Writes `preprocess.conf`, `stopwords.txt`, `tfidf.txt` and
    /// `svm.txt` or `forest.txt` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let p = &self.preprocess;
        let conf = format!(
            "language={}\nremove_urls={}\nremove_invisible={}\nstrip_mentions={}\n\
             strip_hashtag_sign={}\nremove_stopwords={}\nlowercase={}\n",
            p.language,
            p.remove_urls,
            p.remove_invisible,
            p.strip_mentions,
            p.strip_hashtag_sign,
            p.remove_stopwords,
            p.lowercase
        );
        write_file(&dir.join("preprocess.conf"), conf.as_bytes())?;
        let mut words = String::new();
        for w in &p.stopwords {
            words.push_str(w);
            words.push('\n');
        }
        write_file(&dir.join("stopwords.txt"), words.as_bytes())?;
        with_writer(&dir.join("tfidf.txt"), |w| self.features.write(w))?;
        match &self.classifier {
            Classifier::Svm(m) => with_writer(&dir.join("svm.txt"), |w| m.write(w)),
            Classifier::Forest(m) => with_writer(&dir.join("forest.txt"), |w| m.write(w)),
        }
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let conf_path = dir.join("preprocess.conf");
        let conf = fs::read_to_string(&conf_path).map_err(|e| Error::io(&conf_path, e))?;
        let map = parse_key_values(&conf)?;
        let field = |k: &str| -> Result<&str> {
            map.get(k)
                .map(String::as_str)
                .ok_or_else(|| Error::Usage(format!("{}: missing {k}", conf_path.display())))
        };
        let preprocess = PreprocessConfig {
            language: field("language")?.parse()?,
            remove_urls: parse_bool("remove_urls", field("remove_urls")?)?,
            remove_invisible: parse_bool("remove_invisible", field("remove_invisible")?)?,
            strip_mentions: parse_bool("strip_mentions", field("strip_mentions")?)?,
            strip_hashtag_sign: parse_bool("strip_hashtag_sign", field("strip_hashtag_sign")?)?,
            remove_stopwords: parse_bool("remove_stopwords", field("remove_stopwords")?)?,
            lowercase: parse_bool("lowercase", field("lowercase")?)?,
            stopwords: preprocess::load_stopwords(&dir.join("stopwords.txt"))?,
        };
        let features = TfIdfModel::read(open(&dir.join("tfidf.txt"))?)?;
        let svm_path = dir.join("svm.txt");
        let classifier = if svm_path.exists() {
            Classifier::Svm(SvmModel::read(open(&svm_path)?)?)
        } else {
            Classifier::Forest(ForestModel::read(open(&dir.join("forest.txt"))?)?)
        };
        Ok(TrainedClassifier {
            preprocess,
            features,
            classifier,
        })
    }
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn with_writer(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Training-side artifacts of [`train_classifier`].
#[derive(Debug, Clone)]
pub struct TrainingSummary {
    pub training_rows: usize,
    pub training_counts: ClassCounts,
    pub balanced_counts: ClassCounts,
    pub synthetic_rows: usize,
}

/// Fits the text pipeline and classifier on an already merged training set.
pub fn train_classifier(
    config: &ExperimentConfig,
    training: &Dataset,
) -> Result<(TrainedClassifier, TrainingSummary)> {
    let labels = training.labels().stage("train")?;
    let docs: Vec<Vec<String>> = training
        .rows()
        .iter()
        .map(|r| preprocess::clean(&r.text, &config.preprocess))
        .collect();
    let features = TfIdfModel::fit(&docs, config.ngram_max, config.max_features).stage("features")?;
    let vectors = features.transform_all(&docs);
    let balanced = balance::balance(&vectors, &labels, &config.balance).stage("balance")?;
    let classifier = match config.model {
        ModelKind::Svm => Classifier::Svm(
            svm::train(&balanced.vectors, &balanced.labels, &config.svm).stage("train")?,
        ),
        ModelKind::Forest => Classifier::Forest(
            forest::train(&balanced.vectors, &balanced.labels, &config.forest).stage("train")?,
        ),
    };
    let summary = TrainingSummary {
        training_rows: training.len(),
        training_counts: ClassCounts::from_labels(&labels),
        balanced_counts: ClassCounts::from_labels(&balanced.labels),
        synthetic_rows: balanced.origins.len(),
    };
    Ok((
        TrainedClassifier {
            preprocess: config.preprocess.clone(),
            features,
            classifier,
        },
        summary,
    ))
}

/// Loads train (and dev, when configured) and merges them.
pub fn load_training(config: &ExperimentConfig) -> Result<Dataset> {
    let train = corpus::load_dataset(
        &config.paths.train_path(),
        config.language,
        Split::Train,
        &config.columns,
    )
    .stage("load")?;
    match config.paths.dev_path() {
        Some(dev_path) => {
            let dev = corpus::load_dataset(&dev_path, config.language, Split::Dev, &config.columns)
                .stage("load")?;
            corpus::merge(&train, &dev).stage("merge")
        }
        None => Ok(train),
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub predictions: Vec<Prediction>,
    pub report: Option<EvalReport>,
    pub manifest: String,
    pub predictions_path: PathBuf,
    pub report_path: Option<PathBuf>,
    pub manifest_path: PathBuf,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Runs the whole pipeline and writes predictions, report and manifest into
/// `paths.out_dir`.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate().stage("config")?;
    let training = load_training(config)?;
    let test = corpus::load_dataset(
        &config.paths.test_path(),
        config.language,
        Split::Test,
        &config.columns,
    )
    .stage("load")?;

    let (trained, summary) = train_classifier(config, &training)?;
    let predictions = trained.predict_dataset(&test);
    let report = if test.is_labeled() && !test.is_empty() {
        Some(eval::evaluate(&test, &predictions).stage("evaluate")?)
    } else {
        None
    };

    // Hashes: the TF-IDF fit corpus covers train and dev only.
    let mut fit_hasher = Sha256::new();
    let train_hash = sha256_file(&config.paths.train_path()).stage("manifest")?;
    fit_hasher.update(train_hash.as_bytes());
    let dev_hash = match config.paths.dev_path() {
        Some(p) => {
            let h = sha256_file(&p).stage("manifest")?;
            fit_hasher.update(h.as_bytes());
            Some(h)
        }
        None => None,
    };
    let test_hash = sha256_file(&config.paths.test_path()).stage("manifest")?;

    let mut manifest = config.to_key_values();
    let mut kv = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(manifest, "manifest.{k}={v}");
    };
    kv("version", &env!("CARGO_PKG_VERSION"));
    kv("train_sha256", &train_hash);
    kv("dev_sha256", &dev_hash.as_deref().unwrap_or("none"));
    kv("test_sha256", &test_hash);
    kv("fit_corpus_sha256", &hex::encode(fit_hasher.finalize()));
    kv("fit_corpus_files", &if dev_hash.is_some() { "train+dev" } else { "train" });
    kv("training_rows", &summary.training_rows);
    kv("training_yes", &summary.training_counts.yes);
    kv("training_no", &summary.training_counts.no);
    kv("balanced_yes", &summary.balanced_counts.yes);
    kv("balanced_no", &summary.balanced_counts.no);
    kv("synthetic_rows", &summary.synthetic_rows);
    kv(
        "balance_order",
        &match config.balance.strategy {
            Strategy::Smote => "after-vectorization",
            Strategy::Duplicate => "immaterial",
        },
    );
    kv("balanced_sets", &"training only");
    kv("vocabulary_size", &trained.features.len());
    kv("test_rows", &test.len());
    if let Some(r) = &report {
        kv("f1_positive", &format!("{:.6}", r.headline_f1_positive));
        kv("accuracy", &format!("{:.6}", r.accuracy));
    }

    let out_dir = &config.paths.out_dir;
    fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(out_dir, e))
        .stage("write")?;
    let predictions_path = out_dir.join("predictions.tsv");
    with_writer(&predictions_path, |w| eval::write_predictions(&predictions, w)).stage("write")?;
    let report_path = match &report {
        Some(r) => {
            let path = out_dir.join("report.txt");
            let text = eval::format_report(r, config.model.display_name());
            write_file(&path, text.as_bytes()).stage("write")?;
            Some(path)
        }
        None => None,
    };
    let manifest_path = out_dir.join("manifest.txt");
    write_file(&manifest_path, manifest.as_bytes()).stage("write")?;
    trained.save(&out_dir.join("model")).stage("write")?;

    Ok(RunOutput {
        predictions,
        report,
        manifest,
        predictions_path,
        report_path,
        manifest_path,
    })
}

/// Most frequent cleaned tokens, count descending then lexicographic.
pub fn freq_report(dataset: &Dataset, config: &PreprocessConfig, top_k: usize) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for row in dataset.rows() {
        for token in preprocess::clean(&row.text, config) {
            *counts.entry(token).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(top_k);
    ranked
}
