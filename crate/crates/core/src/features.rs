//! TF-IDF weighted word n-grams with a feature cap.
//!
//! * term frequency: raw n-gram count in the document
//! * idf: `ln((1 + n_docs) / (1 + df)) + 1`
//! * documents are L2-normalized
//!
//! The vocabulary keeps the `max_features` n-grams with the highest total
//! corpus count (ties broken by lexicographic n-gram order). Document
//! frequencies are counted over the full corpus before capping. Feature
//! indices follow lexicographic order of the kept n-grams.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::sparse::SparseVector;

pub const MAX_NGRAM: usize = 4;
const FORMAT_TAG: &str = "checkworthy-tfidf v1";

/// All contiguous n-grams of length `1..=ngram_max`, space-joined, with counts.
pub fn extract_ngrams(tokens: &[String], ngram_max: usize) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for n in 1..=ngram_max.max(1) {
        for window in tokens.windows(n) {
            *out.entry(window.join(" ")).or_insert(0) += 1;
        }
    }
    out
}

pub fn idf_weight(n_docs: usize, doc_freq: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + doc_freq as f64)).ln() + 1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfModel {
    ngram_max: usize,
    max_features: usize,
    n_docs: usize,
    terms: Vec<String>,
    vocabulary: HashMap<String, u32>,
    doc_freq: Vec<usize>,
    idf: Vec<f64>,
}

impl TfIdfModel {
    pub fn fit(docs: &[Vec<String>], ngram_max: usize, max_features: usize) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::Usage("cannot fit TF-IDF on an empty corpus".into()));
        }
        validate_params(ngram_max, max_features)?;

        let mut totals: HashMap<String, (usize, usize)> = HashMap::new();
        for doc in docs {
            for (gram, count) in extract_ngrams(doc, ngram_max) {
                let entry = totals.entry(gram).or_insert((0, 0));
                entry.0 += count;
                entry.1 += 1;
            }
        }
        let mut ranked: Vec<(String, usize, usize)> = totals
            .into_iter()
            .map(|(g, (count, df))| (g, count, df))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(max_features);
        ranked.sort_by(|a, b| a.0.cmp(&b.0));

        let entries = ranked.into_iter().map(|(g, _, df)| (g, df)).collect();
        Ok(Self::from_parts(ngram_max, max_features, docs.len(), entries))
    }

    fn from_parts(
        ngram_max: usize,
        max_features: usize,
        n_docs: usize,
        entries: Vec<(String, usize)>,
    ) -> Self {
        let (terms, doc_freq): (Vec<String>, Vec<usize>) = entries.into_iter().unzip();
        let vocabulary = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let idf = doc_freq.iter().map(|&df| idf_weight(n_docs, df)).collect();
        TfIdfModel {
            ngram_max,
            max_features,
            n_docs,
            terms,
            vocabulary,
            doc_freq,
            idf,
        }
    }

    pub fn transform(&self, tokens: &[String]) -> SparseVector {
        let pairs = extract_ngrams(tokens, self.ngram_max)
            .into_iter()
            .filter_map(|(g, tf)| {
                self.vocabulary
                    .get(&g)
                    .map(|&i| (i, tf as f64 * self.idf[i as usize]))
            })
            .collect();
        let mut v = SparseVector::from_pairs(pairs);
        let norm = v.norm();
        if norm > 0.0 {
            v.scale(1.0 / norm);
        }
        v
    }

    pub fn transform_all(&self, docs: &[Vec<String>]) -> Vec<SparseVector> {
        docs.iter().map(|d| self.transform(d)).collect()
    }

    pub fn ngram_max(&self) -> usize {
        self.ngram_max
    }

    pub fn max_features(&self) -> usize {
        self.max_features
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, ngram: &str) -> Option<u32> {
        self.vocabulary.get(ngram).copied()
    }

    pub fn term(&self, index: u32) -> &str {
        &self.terms[index as usize]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self, index: u32) -> usize {
        self.doc_freq[index as usize]
    }

    pub fn idf(&self, index: u32) -> f64 {
        self.idf[index as usize]
    }

    /// Writes the header and one `index<TAB>ngram<TAB>doc_freq` line per
    /// feature. idf is recomputed on load.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{FORMAT_TAG}")?;
        writeln!(out, "ngram_max={}", self.ngram_max)?;
        writeln!(out, "max_features={}", self.max_features)?;
        writeln!(out, "n_docs={}", self.n_docs)?;
        for (i, (term, df)) in self.terms.iter().zip(&self.doc_freq).enumerate() {
            writeln!(out, "{i}\t{term}\t{df}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::parse("tfidf model", line, msg);
        let mut lines = reader.lines().enumerate();
        let mut next = || -> Result<(usize, String)> {
            match lines.next() {
                Some((i, l)) => Ok((i + 1, l.map_err(|e| Error::io("tfidf model", e))?)),
                None => Err(bad(0, "truncated header")),
            }
        };
        let (_, tag) = next()?;
        if tag.trim() != FORMAT_TAG {
            return Err(bad(1, "unrecognized format tag"));
        }
        let mut header = |key: &str| -> Result<usize> {
            let (n, line) = next()?;
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| bad(n, &format!("expected {key}=<integer>")))
        };
        let ngram_max = header("ngram_max")?;
        let max_features = header("max_features")?;
        let n_docs = header("n_docs")?;
        validate_params(ngram_max, max_features)?;

        let mut entries = Vec::new();
        for (idx, line) in lines {
            let n = idx + 1;
            let line = line.map_err(|e| Error::io("tfidf model", e))?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(bad(n, "expected index, n-gram and doc_freq"));
            }
            let index: usize = fields[0].parse().map_err(|_| bad(n, "bad index"))?;
            if index != entries.len() {
                return Err(bad(n, "feature indices must be contiguous from 0"));
            }
            let df: usize = fields[2].parse().map_err(|_| bad(n, "bad doc_freq"))?;
            entries.push((fields[1].to_string(), df));
        }
        if entries.len() > max_features {
            return Err(bad(0, "more features than max_features"));
        }
        Ok(Self::from_parts(ngram_max, max_features, n_docs, entries))
    }
}

fn validate_params(ngram_max: usize, max_features: usize) -> Result<()> {
    if !(1..=MAX_NGRAM).contains(&ngram_max) {
        return Err(Error::Usage(format!(
            "ngram_max must be in 1..={MAX_NGRAM}, got {ngram_max}"
        )));
    }
    if max_features == 0 {
        return Err(Error::Usage("max_features must be positive".into()));
    }
    Ok(())
}
