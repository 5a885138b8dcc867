//! Binary soft-margin SVM trained with Sequential Minimal Optimization.
//!
//! Solves the dual
//!
//! ```text
//! max  sum(a) - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
//! s.t. 0 <= a_i <= C,  sum_i a_i y_i = 0
//! ```
//!
//! two multipliers at a time. Each step picks the maximal violating pair
//! (first-order working set selection); exact ties between candidates are
//! broken with a seeded random stream. Training stops once the KKT gap
//! `max_{I_up} -y_t G_t - min_{I_low} -y_t G_t` drops below `tol_kkt`, which
//! bounds every sample's KKT violation by `tol_kkt`.
//!
//! With the linear kernel the solver keeps `w = sum a_i y_i x_i` and the cache
//! `w . x_k` for every sample, updated through a feature-to-sample index.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::sparse::SparseVector;

const FORMAT_TAG: &str = "checkworthy-svm v1";
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Linear,
}

impl Kernel {
    pub fn eval(self, a: &SparseVector, b: &SparseVector) -> f64 {
        match self {
            Kernel::Linear => a.dot(b),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Linear => f.write_str("linear"),
        }
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "linear" => Ok(Kernel::Linear),
            other => Err(Error::Usage(format!("unsupported kernel {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmConfig {
    pub c: f64,
    pub kernel: Kernel,
    pub tol_kkt: f64,
    /// Optimizer budget: at most `max_passes * 100 * max(n, 1000)` pair updates.
    pub max_passes: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            kernel: Kernel::Linear,
            tol_kkt: 1e-3,
            max_passes: 10,
            seed: 2814,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Usage(format!("C must be positive, got {}", self.c)));
        }
        if !(self.tol_kkt > 0.0) {
            return Err(Error::Usage(format!(
                "tol_kkt must be positive, got {}",
                self.tol_kkt
            )));
        }
        if self.max_passes == 0 {
            return Err(Error::Usage("max_passes must be at least 1".into()));
        }
        Ok(())
    }

    fn max_iterations(&self, n: usize) -> usize {
        self.max_passes
            .saturating_mul(100)
            .saturating_mul(n.max(1000))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub config: SvmConfig,
    pub support_vectors: Vec<SparseVector>,
    pub alphas: Vec<f64>,
    pub labels: Vec<Label>,
    pub bias: f64,
    weights: Vec<f64>,
}

/// Result of a training run, for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainStats {
    pub iterations: usize,
    pub kkt_gap: f64,
    pub converged: bool,
}

pub fn train(vectors: &[SparseVector], labels: &[Label], config: &SvmConfig) -> Result<SvmModel> {
    train_with_stats(vectors, labels, config).map(|(m, _)| m)
}

pub fn train_with_stats(
    vectors: &[SparseVector],
    labels: &[Label],
    config: &SvmConfig,
) -> Result<(SvmModel, TrainStats)> {
    config.validate()?;
    if vectors.len() != labels.len() {
        return Err(Error::Usage(format!(
            "{} vectors but {} labels",
            vectors.len(),
            labels.len()
        )));
    }
    if !labels.contains(&Label::Yes) || !labels.contains(&Label::No) {
        return Err(Error::Usage("SVM training needs both classes".into()));
    }
    if let Some(i) = vectors.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("sample {i} has non-finite feature values")));
    }
    let mut solver = Solver::new(vectors, labels, config);
    let stats = solver.run();
    if !stats.converged {
        warn!(
            "SMO stopped after {} iterations with KKT gap {:.3e} (tol {})",
            stats.iterations, stats.kkt_gap, config.tol_kkt
        );
    }
    debug!("SMO finished: {stats:?}");
    Ok((solver.into_model(), stats))
}

struct Solver<'a> {
    x: &'a [SparseVector],
    y: Vec<f64>,
    labels: &'a [Label],
    config: &'a SvmConfig,
    alpha: Vec<f64>,
    w: Vec<f64>,
    wx: Vec<f64>,
    sq_norm: Vec<f64>,
    columns: Vec<Vec<(u32, f64)>>,
    rng: ChaCha8Rng,
}

impl<'a> Solver<'a> {
    fn new(x: &'a [SparseVector], labels: &'a [Label], config: &'a SvmConfig) -> Self {
        let dim = x.iter().map(SparseVector::dim).max().unwrap_or(0);
        let mut columns = vec![Vec::new(); dim];
        for (k, v) in x.iter().enumerate() {
            for (f, val) in v.iter() {
                columns[f as usize].push((k as u32, val));
            }
        }
        Solver {
            x,
            y: labels.iter().map(|l| l.sign()).collect(),
            labels,
            config,
            alpha: vec![0.0; x.len()],
            w: vec![0.0; dim],
            wx: vec![0.0; x.len()],
            sq_norm: x.iter().map(|v| v.dot(v)).collect(),
            columns,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
        }
    }

    fn gradient(&self, t: usize) -> f64 {
        self.y[t] * self.wx[t] - 1.0
    }

    fn in_up(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] < self.config.c
        } else {
            self.alpha[t] > 0.0
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] > 0.0
        } else {
            self.alpha[t] < self.config.c
        }
    }

    /// Maximal violating pair `(i, j)` and the gap `m - M`.
    fn select_pair(&mut self) -> Option<(usize, usize, f64)> {
        let (mut i, mut gmax, mut i_ties) = (usize::MAX, f64::NEG_INFINITY, 0u32);
        let (mut j, mut gmin, mut j_ties) = (usize::MAX, f64::INFINITY, 0u32);
        for t in 0..self.x.len() {
            let v = -self.y[t] * self.gradient(t);
            if self.in_up(t) {
                if v > gmax {
                    (i, gmax, i_ties) = (t, v, 1);
                } else if v == gmax {
                    i_ties += 1;
                    if self.rng.gen_range(0..i_ties) == 0 {
                        i = t;
                    }
                }
            }
            if self.in_low(t) {
                if v < gmin {
                    (j, gmin, j_ties) = (t, v, 1);
                } else if v == gmin {
                    j_ties += 1;
                    if self.rng.gen_range(0..j_ties) == 0 {
                        j = t;
                    }
                }
            }
        }
        (i != usize::MAX && j != usize::MAX).then_some((i, j, gmax - gmin))
    }

    fn run(&mut self) -> TrainStats {
        let max_iter = self.config.max_iterations(self.x.len());
        let mut iterations = 0;
        loop {
            let Some((i, j, gap)) = self.select_pair() else {
                return TrainStats {
                    iterations,
                    kkt_gap: 0.0,
                    converged: true,
                };
            };
            if gap < self.config.tol_kkt || iterations >= max_iter {
                // confirm against a cache rebuilt from scratch
                self.refresh_cache();
                let (_, _, fresh_gap) = self.select_pair().unwrap_or((0, 0, 0.0));
                if fresh_gap < self.config.tol_kkt || iterations >= max_iter {
                    return TrainStats {
                        iterations,
                        kkt_gap: fresh_gap,
                        converged: fresh_gap < self.config.tol_kkt,
                    };
                }
                continue;
            }
            self.update_pair(i, j);
            iterations += 1;
        }
    }

    fn update_pair(&mut self, i: usize, j: usize) {
        let c = self.config.c;
        let (gi, gj) = (self.gradient(i), self.gradient(j));
        let kij = self.config.kernel.eval(&self.x[i], &self.x[j]);
        let mut quad = self.sq_norm[i] + self.sq_norm[j] - 2.0 * kij;
        if quad <= 0.0 {
            quad = TAU;
        }
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if self.y[i] != self.y[j] {
            let delta = (-gi - gj) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (gi - gj) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let step_i = (ai - old_i) * self.y[i];
        let step_j = (aj - old_j) * self.y[j];
        for (idx, step) in [(i, step_i), (j, step_j)] {
            if step == 0.0 {
                continue;
            }
            for (f, val) in self.x[idx].iter() {
                let dw = step * val;
                self.w[f as usize] += dw;
                for &(k, xv) in &self.columns[f as usize] {
                    self.wx[k as usize] += dw * xv;
                }
            }
        }
    }

    fn refresh_cache(&mut self) {
        self.w.iter_mut().for_each(|v| *v = 0.0);
        for (t, x) in self.x.iter().enumerate() {
            if self.alpha[t] > 0.0 {
                let s = self.alpha[t] * self.y[t];
                for (f, val) in x.iter() {
                    self.w[f as usize] += s * val;
                }
            }
        }
        for (t, x) in self.x.iter().enumerate() {
            self.wx[t] = x.iter().map(|(f, v)| self.w[f as usize] * v).sum();
        }
    }

    fn bias(&self) -> f64 {
        let c = self.config.c;
        let (mut sum, mut free) = (0.0, 0usize);
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        for t in 0..self.x.len() {
            let v = -self.y[t] * self.gradient(t);
            if self.alpha[t] > 0.0 && self.alpha[t] < c {
                sum += v;
                free += 1;
            }
            if self.in_up(t) {
                lb = lb.max(v);
            }
            if self.in_low(t) {
                ub = ub.min(v);
            }
        }
        if free > 0 {
            sum / free as f64
        } else {
            match (lb.is_finite(), ub.is_finite()) {
                (true, true) => (lb + ub) / 2.0,
                (true, false) => lb,
                (false, true) => ub,
                (false, false) => 0.0,
            }
        }
    }

    fn into_model(mut self) -> SvmModel {
        self.refresh_cache();
        let bias = self.bias();
        let mut support_vectors = Vec::new();
        let mut alphas = Vec::new();
        let mut labels = Vec::new();
        for t in 0..self.x.len() {
            if self.alpha[t] > 0.0 {
                support_vectors.push(self.x[t].clone());
                alphas.push(self.alpha[t]);
                labels.push(self.labels[t]);
            }
        }
        SvmModel::new(self.config.clone(), support_vectors, alphas, labels, bias)
    }
}

impl SvmModel {
    pub fn new(
        config: SvmConfig,
        support_vectors: Vec<SparseVector>,
        alphas: Vec<f64>,
        labels: Vec<Label>,
        bias: f64,
    ) -> Self {
        let dim = support_vectors
            .iter()
            .map(SparseVector::dim)
            .max()
            .unwrap_or(0);
        let mut weights = vec![0.0; dim];
        for ((sv, a), l) in support_vectors.iter().zip(&alphas).zip(&labels) {
            for (f, v) in sv.iter() {
                weights[f as usize] += a * l.sign() * v;
            }
        }
        SvmModel {
            config,
            support_vectors,
            alphas,
            labels,
            bias,
            weights,
        }
    }

    /// `sum_i a_i y_i K(x_i, v) + b`.
    pub fn decision_value(&self, v: &SparseVector) -> f64 {
        match self.config.kernel {
            Kernel::Linear => {
                let wx: f64 = v
                    .iter()
                    .map(|(f, val)| self.weights.get(f as usize).copied().unwrap_or(0.0) * val)
                    .sum();
                wx + self.bias
            }
        }
    }

    /// Sign of the decision value; exactly zero goes to `No`.
    pub fn predict(&self, v: &SparseVector) -> Label {
        if self.decision_value(v) > 0.0 {
            Label::Yes
        } else {
            Label::No
        }
    }

    /// Logistic squashing of the decision value into `[0, 1]`.
    pub fn score(&self, v: &SparseVector) -> f64 {
        1.0 / (1.0 + (-self.decision_value(v)).exp())
    }

    /// Dual objective `sum(a) - 1/2 |w|^2` at the trained multipliers.
    pub fn dual_objective(&self) -> f64 {
        let sum: f64 = self.alphas.iter().sum();
        sum - 0.5 * self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{FORMAT_TAG}")?;
        writeln!(out, "kernel={}", self.config.kernel)?;
        writeln!(out, "c={}", self.config.c)?;
        writeln!(out, "tol_kkt={}", self.config.tol_kkt)?;
        writeln!(out, "max_passes={}", self.config.max_passes)?;
        writeln!(out, "seed={}", self.config.seed)?;
        writeln!(out, "bias={}", self.bias)?;
        writeln!(out, "support_vectors={}", self.support_vectors.len())?;
        for ((sv, a), l) in self.support_vectors.iter().zip(&self.alphas).zip(&self.labels) {
            let y = if *l == Label::Yes { "+1" } else { "-1" };
            writeln!(out, "{a}\t{y}\t{sv}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::parse("svm model", line, msg);
        let mut lines = Vec::new();
        for line in reader.lines() {
            lines.push(line.map_err(|e| Error::io("svm model", e))?);
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
        let num = |n: usize, key: &str| -> Result<f64> {
            value(n, key)?
                .parse()
                .map_err(|_| bad(n + 1, &format!("bad {key}")))
        };
        let config = SvmConfig {
            kernel: value(1, "kernel")?.parse()?,
            c: num(2, "c")?,
            tol_kkt: num(3, "tol_kkt")?,
            max_passes: num(4, "max_passes")? as usize,
            seed: value(5, "seed")?
                .parse()
                .map_err(|_| bad(6, "bad seed"))?,
        };
        let bias = num(6, "bias")?;
        let count = num(7, "support_vectors")? as usize;
        let mut support_vectors = Vec::with_capacity(count);
        let mut alphas = Vec::with_capacity(count);
        let mut labels = Vec::with_capacity(count);
        for (n, line) in lines.iter().enumerate().skip(8) {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.splitn(3, '\t');
            let alpha: f64 = parts
                .next()
                .and_then(|a| a.parse().ok())
                .ok_or_else(|| bad(n + 1, "bad alpha"))?;
            let label = match parts.next() {
                Some("+1") => Label::Yes,
                Some("-1") => Label::No,
                _ => return Err(bad(n + 1, "label must be +1 or -1")),
            };
            let sv = SparseVector::parse(parts.next().unwrap_or(""))?;
            alphas.push(alpha);
            labels.push(label);
            support_vectors.push(sv);
        }
        if support_vectors.len() != count {
            return Err(bad(8, "support vector count mismatch"));
        }
        Ok(SvmModel::new(config, support_vectors, alphas, labels, bias))
    }
}
