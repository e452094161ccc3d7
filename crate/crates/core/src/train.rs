//! Prediction rule, cross-entropy cost, SPSA and evaluation metrics.

use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ansatz::{compile, init_params, AnsatzConfig, ParamCircuit, ParamRegistry};
use crate::corpus::{DatasetSplit, LabeledSentence, Task};
use crate::diagram::{bend_nouns, Diagram};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::pregroup::AmbiguityPolicy;
use crate::sim::{exact_output, postselect_estimate, sample, stream_seed};

/// Clamp used by the prediction rule.
pub const EPSILON: f64 = 1e-9;

/// Shots per circuit in sampled mode.
pub const DEFAULT_SHOTS: u64 = 1 << 13;

/// Clamped, normalised output distribution and the label it rounds to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub l: [f64; 2],
    pub label: usize,
}

/// `lᵢ = |rᵢ − ε|`, normalised; the label is the component that rounds to 1.
/// An exact tie predicts class 1.
pub fn predict(raw: (f64, f64), epsilon: f64) -> Prediction {
    let l0 = (raw.0 - epsilon).abs();
    let l1 = (raw.1 - epsilon).abs();
    let sum = l0 + l1;
    let l = [l0 / sum, l1 / sum];
    let label = if l[0] > 0.5 { 0 } else { 1 };
    Prediction { l, label }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionRecord {
    pub id: usize,
    /// `(|a0|², |a1|²)` or the shot-estimated frequencies.
    pub raw: (f64, f64),
    pub l: [f64; 2],
    pub predicted: usize,
    pub gold: usize,
}

impl PredictionRecord {
    pub fn new(id: usize, raw: (f64, f64), gold: usize) -> Self {
        let p = predict(raw, EPSILON);
        Self {
            id,
            raw,
            l: p.l,
            predicted: p.label,
            gold,
        }
    }

    pub fn correct(&self) -> bool {
        self.predicted == self.gold
    }
}

/// `−Σ log l[gold]`, natural log, summed in record order.
pub fn cost(records: &[PredictionRecord]) -> f64 {
    records.iter().map(|r| -r.l[r.gold].ln()).sum()
}

pub fn error_rate(records: &[PredictionRecord]) -> f64 {
    if records.is_empty() {
        return f64::NAN;
    }
    records.iter().filter(|r| !r.correct()).count() as f64 / records.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub error: f64,
    /// F-score with class 0 resp. class 1 taken as positive.
    pub f_scores: [f64; 2],
    pub macro_f: f64,
}

pub fn metrics(records: &[PredictionRecord]) -> Result<Metrics> {
    if records.is_empty() {
        return Err(Error::InvalidConfig("metrics of an empty record set".into()));
    }
    let mut f_scores = [0.0; 2];
    for (class, f) in f_scores.iter_mut().enumerate() {
        let tp = records.iter().filter(|r| r.predicted == class && r.gold == class).count();
        let fp = records.iter().filter(|r| r.predicted == class && r.gold != class).count();
        let fn_ = records.iter().filter(|r| r.predicted != class && r.gold == class).count();
        // F = 2tp / (2tp + fp + fn); zero when the class is never hit.
        *f = if tp == 0 {
            0.0
        } else {
            2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
        };
    }
    Ok(Metrics {
        error: error_rate(records),
        f_scores,
        macro_f: (f_scores[0] + f_scores[1]) / 2.0,
    })
}

/// One-sided permutation test of accuracy against shuffled gold labels.
pub fn permutation_test(records: &[PredictionRecord], n_permutations: usize, seed: u64) -> f64 {
    let predicted: Vec<usize> = records.iter().map(|r| r.predicted).collect();
    let mut gold: Vec<usize> = records.iter().map(|r| r.gold).collect();
    let hits = |g: &[usize]| predicted.iter().zip(g).filter(|(p, g)| p == g).count();
    let observed = hits(&gold);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut as_good = 0usize;
    for _ in 0..n_permutations {
        gold.shuffle(&mut rng);
        if hits(&gold) >= observed {
            as_good += 1;
        }
    }
    (1 + as_good) as f64 / (1 + n_permutations) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpsaConfig {
    pub a: f64,
    pub c: f64,
    /// Stability offset `A`.
    pub big_a: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl SpsaConfig {
    pub fn new(iterations: usize, seed: u64) -> Self {
        Self {
            a: 0.05,
            c: 0.06,
            big_a: 0.01 * iterations as f64,
            alpha: 0.602,
            gamma: 0.101,
            iterations,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.a > 0.0
            && self.c > 0.0
            && self.big_a >= 0.0
            && self.alpha > 0.0
            && self.alpha <= 1.0
            && self.gamma > 0.0
            && self.gamma <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("bad SPSA gains {self:?}")))
        }
    }

    pub fn gains(&self, k_iter: usize) -> (f64, f64) {
        let k = k_iter as f64 + 1.0;
        (
            self.a / (self.big_a + k).powf(self.alpha),
            self.c / k.powf(self.gamma),
        )
    }
}

/// Uniform random direction in `{−1, +1}^k`.
pub fn perturbation(k: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..k)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect()
}

/// One SPSA update from two cost evaluations along `±c_k Δ`, wrapped to `[0, 2π)`.
pub fn spsa_step(
    theta: &[f64],
    k_iter: usize,
    mut cost_fn: impl FnMut(&[f64]) -> Result<f64>,
    cfg: &SpsaConfig,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    let (a_k, c_k) = cfg.gains(k_iter);
    let delta = perturbation(theta.len(), rng);
    let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + c_k * d).collect();
    let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - c_k * d).collect();
    let diff = cost_fn(&plus)? - cost_fn(&minus)?;
    Ok(theta
        .iter()
        .zip(&delta)
        .map(|(t, d)| {
            let g = diff / (2.0 * c_k * d);
            wrap_angle(t - a_k * g)
        })
        .collect())
}

pub fn wrap_angle(t: f64) -> f64 {
    let w = t.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluator {
    Exact,
    Shots { shots: u64, seed: u64 },
}

/// Circuits for a fixed list of sentences.
#[derive(Debug, Clone, Default)]
pub struct CompiledSet {
    pub circuits: Vec<ParamCircuit>,
    pub gold: Vec<usize>,
}

impl CompiledSet {
    pub fn len(&self) -> usize {
        self.circuits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circuits.is_empty()
    }
}

/// Parse, bend and compile every sentence.
pub fn compile_sentences(
    sentences: &[LabeledSentence],
    lexicon: &Lexicon,
    task: Task,
    cfg: &AnsatzConfig,
    registry: &ParamRegistry,
) -> Result<CompiledSet> {
    let target = task.target();
    let mut set = CompiledSet::default();
    for s in sentences {
        let parse = lexicon.parse(&s.token_refs(), &target, AmbiguityPolicy::FirstFound)?;
        let diagram = bend_nouns(&Diagram::from(&parse));
        set.circuits.push(compile(&diagram, cfg, registry)?);
        set.gold.push(s.label);
    }
    Ok(set)
}

/// Where an evaluation sits in a run; selects the shot RNG stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalSlot {
    pub iteration: u64,
    pub slot: u64,
}

/// Outputs of every circuit in `set` at `theta`.
///
/// In sampled mode a circuit with no surviving shot is scored as raw `(0, 0)`,
/// i.e. `l = (½, ½)`; the second return value counts such circuits.
pub fn evaluate(
    set: &CompiledSet,
    theta: &[f64],
    evaluator: Evaluator,
    at: EvalSlot,
) -> Result<(Vec<PredictionRecord>, u64)> {
    let mut records = Vec::with_capacity(set.len());
    let mut empty = 0;
    for (i, (c, &gold)) in set.circuits.iter().zip(&set.gold).enumerate() {
        let bound = c.bind(theta);
        let raw = match evaluator {
            Evaluator::Exact => exact_output(&bound)?.raw(),
            Evaluator::Shots { shots, seed } => {
                let &[out] = bound.output_qubits.as_slice() else {
                    return Err(Error::InvalidConfig("sampled evaluation needs one output qubit".into()));
                };
                let s = stream_seed(seed, &[at.iteration, at.slot, i as u64]);
                let counts = sample(&bound, shots, s);
                match postselect_estimate(&counts, &bound.postselect, out) {
                    Ok(e) => (e.p0, e.p1),
                    Err(Error::EmptyPostselection) => {
                        log::debug!("sentence {i}: no shot survived post-selection");
                        empty += 1;
                        (0.0, 0.0)
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        records.push(PredictionRecord::new(i, raw, gold));
    }
    Ok((records, empty))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    /// Training cost at iterations `0..=n` (index 0 is the starting point).
    pub cost: Vec<f64>,
    pub train_error: Vec<f64>,
    /// Empty when there is no dev set.
    pub dev_error: Vec<f64>,
    /// `(iteration, error)` every 10th iteration and at the end.
    pub test_error: Vec<(usize, f64)>,
    pub initial_theta: Vec<f64>,
    pub final_theta: Vec<f64>,
    /// Sampled evaluations that lost every shot to post-selection.
    pub empty_postselections: u64,
}

const SLOT_PLUS: u64 = 0;
const SLOT_MINUS: u64 = 1;
const SLOT_TRAIN: u64 = 2;
const SLOT_DEV: u64 = 3;
const SLOT_TEST: u64 = 4;
const SPSA_STREAM: u64 = 0x5b5a;

/// A task, an ansatz and compiled train/dev/test circuits.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub task: Task,
    pub cfg: AnsatzConfig,
    pub lexicon: Lexicon,
    pub layout: ParamRegistry,
    pub train: CompiledSet,
    pub dev: CompiledSet,
    pub test: CompiledSet,
}

impl Experiment {
    pub fn new(task: Task, cfg: AnsatzConfig, lexicon: Lexicon, split: &DatasetSplit) -> Result<Self> {
        let layout = ParamRegistry::layout(&lexicon, &cfg)?;
        let build = |s: &[LabeledSentence]| compile_sentences(s, &lexicon, task, &cfg, &layout);
        let (train, dev, test) = (build(&split.train)?, build(&split.dev)?, build(&split.test)?);
        Ok(Self {
            task,
            cfg,
            lexicon,
            layout,
            train,
            dev,
            test,
        })
    }

    pub fn num_params(&self) -> usize {
        self.layout.len()
    }

    /// Registry holding `theta` with this experiment's layout.
    pub fn registry(&self, theta: Vec<f64>) -> ParamRegistry {
        let mut r = self.layout.clone();
        r.theta = theta;
        r
    }

    /// SPSA from `theta0` with the gain schedule starting at `first_k`
    /// (non-zero when resuming a warm-up run). Δ draws come from `spsa.seed`;
    /// shot streams from the evaluator's seed.
    pub fn train_from(
        &self,
        theta0: Vec<f64>,
        first_k: usize,
        spsa: &SpsaConfig,
        evaluator: Evaluator,
    ) -> Result<TrainHistory> {
        spsa.validate()?;
        if theta0.len() != self.num_params() {
            return Err(Error::InvalidConfig(format!(
                "initial point has {} angles, ansatz needs {}",
                theta0.len(),
                self.num_params()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(spsa.seed, &[SPSA_STREAM]));
        let mut h = TrainHistory {
            initial_theta: theta0.clone(),
            ..Default::default()
        };
        let mut theta = theta0;
        self.record(&mut h, &theta, 0, spsa.iterations, evaluator)?;
        for it in 0..spsa.iterations {
            let mut empty = 0;
            let mut slot = SLOT_PLUS;
            theta = spsa_step(
                &theta,
                first_k + it,
                |t| {
                    let at = EvalSlot {
                        iteration: it as u64 + 1,
                        slot,
                    };
                    slot = SLOT_MINUS;
                    let (records, e) = evaluate(&self.train, t, evaluator, at)?;
                    empty += e;
                    Ok(cost(&records))
                },
                spsa,
                &mut rng,
            )?;
            h.empty_postselections += empty;
            self.record(&mut h, &theta, it + 1, spsa.iterations, evaluator)?;
        }
        h.final_theta = theta;
        Ok(h)
    }

    fn record(
        &self,
        h: &mut TrainHistory,
        theta: &[f64],
        it: usize,
        last: usize,
        evaluator: Evaluator,
    ) -> Result<()> {
        let at = |slot| EvalSlot {
            iteration: it as u64,
            slot,
        };
        let (train, e) = evaluate(&self.train, theta, evaluator, at(SLOT_TRAIN))?;
        h.empty_postselections += e;
        h.cost.push(cost(&train));
        h.train_error.push(error_rate(&train));
        if !self.dev.is_empty() {
            let (dev, e) = evaluate(&self.dev, theta, evaluator, at(SLOT_DEV))?;
            h.empty_postselections += e;
            h.dev_error.push(error_rate(&dev));
        }
        if !self.test.is_empty() && (it.is_multiple_of(10) || it == last) {
            let (test, e) = evaluate(&self.test, theta, evaluator, at(SLOT_TEST))?;
            h.empty_postselections += e;
            h.test_error.push((it, error_rate(&test)));
        }
        Ok(())
    }

    /// Train from `init_params(k, seed)`.
    pub fn train_seed(&self, seed: u64, spsa: &SpsaConfig, evaluator: Evaluator) -> Result<TrainHistory> {
        let spsa = SpsaConfig { seed, ..*spsa };
        self.train_from(init_params(self.num_params(), seed), 0, &spsa, evaluator)
    }

    /// Independent runs, one per seed, returned in seed order.
    pub fn train_many(&self, seeds: &[u64], spsa: &SpsaConfig, evaluator: Evaluator) -> Result<Vec<TrainHistory>> {
        seeds
            .par_iter()
            .map(|&s| {
                let evaluator = match evaluator {
                    Evaluator::Exact => Evaluator::Exact,
                    Evaluator::Shots { shots, seed } => Evaluator::Shots {
                        shots,
                        seed: stream_seed(seed, &[s]),
                    },
                };
                self.train_seed(s, spsa, evaluator)
            })
            .collect()
    }

    /// Short exact-mode runs from each seed; the end point of the one with
    /// the lowest training cost becomes the starting point of the real run.
    pub fn warmup_initial_point(&self, seeds: &[u64], warmup: usize, spsa: &SpsaConfig) -> Result<(u64, Vec<f64>)> {
        let short = SpsaConfig {
            iterations: warmup,
            big_a: 0.01 * warmup as f64,
            ..*spsa
        };
        let runs = self.train_many(seeds, &short, Evaluator::Exact)?;
        let best = runs
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.cost.last().unwrap().total_cmp(b.cost.last().unwrap()))
            .map(|(i, _)| i)
            .ok_or_else(|| Error::InvalidConfig("warm-up needs at least one seed".into()))?;
        Ok((seeds[best], runs[best].final_theta.clone()))
    }

    pub fn predict_set(&self, set: &CompiledSet, theta: &[f64], evaluator: Evaluator) -> Result<Vec<PredictionRecord>> {
        evaluate(set, theta, evaluator, EvalSlot { iteration: u64::MAX, slot: SLOT_TEST }).map(|(r, _)| r)
    }
}

/// Build the experiment for `split` and run SPSA from `init_params(k, spsa.seed)`.
pub fn train(
    split: &DatasetSplit,
    lexicon: &Lexicon,
    task: Task,
    cfg: AnsatzConfig,
    spsa: &SpsaConfig,
    evaluator: Evaluator,
) -> Result<TrainHistory> {
    Experiment::new(task, cfg, lexicon.clone(), split)?.train_seed(spsa.seed, spsa, evaluator)
}

/// Per-iteration mean and sample standard deviation across runs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeanHistory {
    pub runs: usize,
    pub cost: Vec<f64>,
    pub cost_std: Vec<f64>,
    pub train_error: Vec<f64>,
    pub dev_error: Vec<f64>,
    pub test_error: Vec<(usize, f64)>,
}

fn mean_std(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

pub fn mean_history(runs: &[TrainHistory]) -> MeanHistory {
    let Some(first) = runs.first() else {
        return MeanHistory::default();
    };
    let column = |f: &dyn Fn(&TrainHistory) -> &Vec<f64>, i: usize| mean_std(runs.iter().map(|h| f(h)[i]));
    let (cost, cost_std) = (0..first.cost.len()).map(|i| column(&|h| &h.cost, i)).unzip();
    MeanHistory {
        runs: runs.len(),
        cost,
        cost_std,
        train_error: (0..first.train_error.len()).map(|i| column(&|h| &h.train_error, i).0).collect(),
        dev_error: (0..first.dev_error.len()).map(|i| column(&|h| &h.dev_error, i).0).collect(),
        test_error: first
            .test_error
            .iter()
            .enumerate()
            .map(|(j, &(it, _))| (it, mean_std(runs.iter().map(|h| h.test_error[j].1)).0))
            .collect(),
    }
}

/// `iteration,cost,train_error,dev_error,test_error` with empty cells where a
/// quantity was not evaluated.
pub fn history_csv(
    version: &str,
    cost: &[f64],
    train_error: &[f64],
    dev_error: &[f64],
    test_error: &[(usize, f64)],
) -> String {
    let mut out = format!("# qnlp {version}\niteration,cost,train_error,dev_error,test_error\n");
    for i in 0..cost.len() {
        let dev = dev_error.get(i).map(f64::to_string).unwrap_or_default();
        let test = test_error
            .iter()
            .find(|(it, _)| *it == i)
            .map(|(_, e)| e.to_string())
            .unwrap_or_default();
        out.push_str(&format!("{i},{},{},{dev},{test}\n", cost[i], train_error[i]));
    }
    out
}

impl TrainHistory {
    pub fn to_csv(&self, version: &str) -> String {
        history_csv(version, &self.cost, &self.train_error, &self.dev_error, &self.test_error)
    }
}

impl MeanHistory {
    pub fn to_csv(&self, version: &str) -> String {
        history_csv(version, &self.cost, &self.train_error, &self.dev_error, &self.test_error)
    }
}
