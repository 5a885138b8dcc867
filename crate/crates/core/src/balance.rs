//! Minority-class oversampling.
//!
//! [`Strategy::Smote`] appends synthetic minority vectors
//! `x + u * (x_nn - x)` where `x` is a uniformly drawn minority sample,
//! `x_nn` one of its `k` nearest minority neighbors (exact Euclidean search)
//! and `u ~ U[0, 1]`. [`Strategy::Duplicate`] resamples minority rows with
//! replacement instead. Original rows always come first and are untouched.

use std::fmt;
use std::str::FromStr;

use log::warn;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{ClassCounts, Label};
use crate::error::{Error, Result};
use crate::sparse::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Smote,
    Duplicate,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Smote => "smote",
            Strategy::Duplicate => "duplicate",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "smote" => Ok(Strategy::Smote),
            "duplicate" => Ok(Strategy::Duplicate),
            other => Err(Error::Usage(format!("unknown balance strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceConfig {
    pub strategy: Strategy,
    /// Minority/majority ratio after balancing.
    pub target_ratio: f64,
    pub k_neighbors: usize,
    pub seed: u64,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        BalanceConfig {
            strategy: Strategy::Smote,
            target_ratio: 1.0,
            k_neighbors: 5,
            seed: 2814,
        }
    }
}

impl BalanceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_ratio > 0.0 && self.target_ratio <= 1.0) {
            return Err(Error::Usage(format!(
                "balance ratio must be in (0, 1], got {}",
                self.target_ratio
            )));
        }
        if self.k_neighbors == 0 {
            return Err(Error::Usage("k_neighbors must be at least 1".into()));
        }
        Ok(())
    }
}

/// Where a synthetic row came from. Indices point into the input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Origin {
    pub parent: usize,
    pub neighbor: usize,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct Balanced {
    pub vectors: Vec<SparseVector>,
    pub labels: Vec<Label>,
    /// One entry per appended row, in output order.
    pub origins: Vec<Origin>,
}

/// Number of minority rows after balancing.
pub fn target_minority(counts: ClassCounts, ratio: f64) -> usize {
    let majority = counts.yes.max(counts.no);
    (ratio * majority as f64).round() as usize
}

pub fn balance(
    vectors: &[SparseVector],
    labels: &[Label],
    config: &BalanceConfig,
) -> Result<Balanced> {
    config.validate()?;
    if vectors.len() != labels.len() {
        return Err(Error::Usage(format!(
            "{} vectors but {} labels",
            vectors.len(),
            labels.len()
        )));
    }
    let counts = ClassCounts::from_labels(labels);
    if counts.yes == 0 || counts.no == 0 {
        return Err(Error::Usage("balancing needs both classes present".into()));
    }
    let minority_label = if counts.yes < counts.no {
        Label::Yes
    } else {
        Label::No
    };
    let minority: Vec<usize> = (0..labels.len())
        .filter(|&i| labels[i] == minority_label)
        .collect();
    let needed = target_minority(counts, config.target_ratio).saturating_sub(minority.len());

    let mut out = Balanced {
        vectors: vectors.to_vec(),
        labels: labels.to_vec(),
        origins: Vec::with_capacity(needed),
    };
    if needed == 0 {
        return Ok(out);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let strategy = if config.strategy == Strategy::Smote && minority.len() < 2 {
        warn!("minority class has a single sample; duplicating instead of interpolating");
        Strategy::Duplicate
    } else {
        config.strategy
    };

    match strategy {
        Strategy::Duplicate => {
            for _ in 0..needed {
                let &parent = minority.choose(&mut rng).unwrap();
                out.vectors.push(vectors[parent].clone());
                out.labels.push(minority_label);
                out.origins.push(Origin {
                    parent,
                    neighbor: parent,
                    t: 0.0,
                });
            }
        }
        Strategy::Smote => {
            let k = config.k_neighbors.min(minority.len() - 1);
            let mut neighbors: Vec<Option<Vec<usize>>> = vec![None; minority.len()];
            for _ in 0..needed {
                let slot = rng.gen_range(0..minority.len());
                let nn = neighbors[slot]
                    .get_or_insert_with(|| nearest(vectors, &minority, slot, k));
                let neighbor = nn[rng.gen_range(0..nn.len())];
                let t: f64 = rng.gen();
                let parent = minority[slot];
                out.vectors
                    .push(vectors[parent].interpolate(&vectors[neighbor], t));
                out.labels.push(minority_label);
                out.origins.push(Origin {
                    parent,
                    neighbor,
                    t,
                });
            }
        }
    }
    Ok(out)
}

/// The `k` minority samples closest to `minority[slot]`, excluding itself.
/// Distance ties go to the lower input index.
fn nearest(vectors: &[SparseVector], minority: &[usize], slot: usize, k: usize) -> Vec<usize> {
    let anchor = &vectors[minority[slot]];
    let mut dists: Vec<(f64, usize)> = minority
        .iter()
        .enumerate()
        .filter(|&(s, _)| s != slot)
        .map(|(_, &i)| (anchor.squared_distance(&vectors[i]), i))
        .collect();
    let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < dists.len() {
        dists.select_nth_unstable_by(k, by_distance);
        dists.truncate(k);
    }
    dists.sort_by(by_distance);
    dists.into_iter().map(|(_, i)| i).collect()
}
