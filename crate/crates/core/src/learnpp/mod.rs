// SPDX-License-Identifier: Apache-2.0

//! Learn++ incremental ensemble.
//!
//! For each database `k` the instance weights start uniform and `T_k`
//! hypotheses are accepted. Each slot normalises the weights into `D_t`,
//! draws training and testing subsets from `D_t`, trains a weak learner on the
//! training subset and measures its weighted error `ε_t` on the union `S_t`.
//! A hypothesis with `ε_t >= 1/2` is discarded and the slot retried. The
//! accepted hypotheses of the current database vote with weight
//! `log(1/β_t)` to form the composite `H_t`, whose weighted error `E_t` on
//! `S_t` must also stay below `1/2`. Instances `H_t` classifies correctly are
//! then down-weighted by `B_t = E_t/(1-E_t)`.
//!
//! All weighted sums run over instance indices in ascending order and all
//! vote tallies run in hypothesis order, so results are reproducible bit for
//! bit.

mod stump;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use thiserror::Error;

use crate::data::LabeledSet;
use crate::mlp::EngineError;
use crate::rng::TrainRng;
use crate::tensor::argmax;

pub use stump::{train_stump, train_tiny_mlp, MlpLearner, Stump, WeakLearner, WeakLearnerKind};

pub const DEFAULT_BETA_FLOOR: f64 = 1e-10;
pub const DEFAULT_MAX_RETRIES: usize = 10;

#[derive(Debug, Error)]
pub enum LearnppError {
    #[error("distribution over zero instances")]
    ZeroSize,
    #[error("instance weight {value} at index {index} is not positive")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("error {0} outside [0, 1/2)")]
    EpsilonOutOfRange(f64),
    #[error("beta {0} outside (0, 1)")]
    InvalidBeta(f64),
    #[error("weights ({weights}) and correctness flags ({flags}) differ in length")]
    LengthMismatch { weights: usize, flags: usize },
    #[error("no databases given")]
    NoDatabases,
    #[error("inconsistent databases: {0}")]
    InconsistentSchema(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("database {database}, iteration {iteration}: no acceptable hypothesis after {retries} retries")]
    WeakLearnerStuck { database: usize, iteration: usize, retries: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Raw instance weights `w_t` and their normalisation `D_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionState {
    pub raw_weights: Vec<f64>,
    pub normalized: Vec<f64>,
}

pub fn init_distribution(m: usize) -> Result<DistributionState, LearnppError> {
    if m == 0 {
        return Err(LearnppError::ZeroSize);
    }
    let uniform = vec![1.0 / m as f64; m];
    Ok(DistributionState { raw_weights: uniform.clone(), normalized: uniform })
}

/// Neumaier-compensated sum.
fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// `D(i) = w(i) / Σ w`.
pub fn normalize_distribution(w: &[f64]) -> Result<Vec<f64>, LearnppError> {
    if w.is_empty() {
        return Err(LearnppError::ZeroSize);
    }
    if let Some((index, &value)) = w.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(LearnppError::NonPositiveWeight { index, value });
    }
    let total = compensated_sum(w);
    Ok(w.iter().map(|v| v / total).collect())
}

/// Draws `tr_size` and `te_size` indices with replacement, proportional to `d`.
pub fn sample_subsets(d: &[f64], rng: &mut TrainRng, tr_size: usize, te_size: usize) -> (Vec<usize>, Vec<usize>) {
    let dist = WeightedIndex::new(d).expect("distribution has positive mass");
    let tr = (0..tr_size).map(|_| dist.sample(rng.inner_mut())).collect();
    let te = (0..te_size).map(|_| dist.sample(rng.inner_mut())).collect();
    (tr, te)
}

/// Sorted, de-duplicated union of two index lists.
pub fn evaluation_set(tr: &[usize], te: &[usize]) -> Vec<usize> {
    let mut s: Vec<usize> = tr.iter().chain(te).copied().collect();
    s.sort_unstable();
    s.dedup();
    s
}

/// `Σ D(i)` over `i ∈ s` with `predict(x_i) ≠ y_i`. `s` must be sorted and
/// duplicate-free (see [`evaluation_set`]).
pub fn weighted_error_by(predict: impl Fn(&[f64]) -> usize, s: &[usize], d: &[f64], data: &LabeledSet) -> f64 {
    let mut e = 0.0;
    for &i in s {
        if predict(data.sample(i)) != data.labels()[i] {
            e += d[i];
        }
    }
    e
}

pub fn weighted_error(h: &WeakLearner, s: &[usize], d: &[f64], data: &LabeledSet) -> f64 {
    weighted_error_by(|x| h.predict(x), s, d, data)
}

/// `β = ε / (1 − ε)` for `0 <= ε < 1/2`.
pub fn normalized_error(epsilon: f64) -> Result<f64, LearnppError> {
    if !(0.0..0.5).contains(&epsilon) {
        return Err(LearnppError::EpsilonOutOfRange(epsilon));
    }
    Ok(epsilon / (1.0 - epsilon))
}

/// Voting weight `log(1/max(β, floor))`.
pub fn vote_weight(beta: f64, beta_floor: f64) -> f64 {
    (1.0 / beta.max(beta_floor)).ln()
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakHypothesis {
    pub learner: WeakLearner,
    pub epsilon: f64,
    pub beta: f64,
}

/// Per-class vote tally of a set of weak hypotheses at `x`.
pub fn composite_votes(hypotheses: &[WeakHypothesis], x: &[f64], class_count: usize, beta_floor: f64) -> Vec<f64> {
    let mut votes = vec![0.0; class_count];
    for h in hypotheses {
        votes[h.learner.predict(x)] += vote_weight(h.beta, beta_floor);
    }
    votes
}

/// Weighted-majority class; ties go to the lowest class.
pub fn composite_hypothesis(hypotheses: &[WeakHypothesis], x: &[f64], class_count: usize, beta_floor: f64) -> usize {
    argmax(&composite_votes(hypotheses, x, class_count, beta_floor))
}

pub fn composite_error(
    hypotheses: &[WeakHypothesis],
    s: &[usize],
    d: &[f64],
    data: &LabeledSet,
    beta_floor: f64,
) -> f64 {
    weighted_error_by(|x| composite_hypothesis(hypotheses, x, data.class_count(), beta_floor), s, d, data)
}

/// `w'(i) = w(i)·B` where `correct[i]`, else `w(i)`.
pub fn update_weights(w: &[f64], b: f64, correct: &[bool]) -> Result<Vec<f64>, LearnppError> {
    if !(b > 0.0 && b < 1.0) {
        return Err(LearnppError::InvalidBeta(b));
    }
    if w.len() != correct.len() {
        return Err(LearnppError::LengthMismatch { weights: w.len(), flags: correct.len() });
    }
    let next: Vec<f64> = w.iter().zip(correct).map(|(&wi, &ok)| if ok { wi * b } else { wi }).collect();
    if let Some((index, &value)) = next.iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(LearnppError::NonPositiveWeight { index, value });
    }
    Ok(next)
}

/// One accepted slot: the hypotheses of the current database so far.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleStage {
    pub hypotheses: Vec<WeakHypothesis>,
    pub composite_error: f64,
    pub composite_beta: f64,
}

impl EnsembleStage {
    pub fn predict(&self, x: &[f64], class_count: usize, beta_floor: f64) -> usize {
        composite_hypothesis(&self.hypotheses, x, class_count, beta_floor)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnppConfig {
    /// `T_k` per database. A single entry applies to every database.
    pub iterations: Vec<usize>,
    /// Defaults to `⌊m/2⌋` (at least 1).
    pub train_size: Option<usize>,
    pub test_size: Option<usize>,
    pub max_retries: usize,
    pub beta_floor: f64,
    pub weak_learner: WeakLearnerKind,
    pub seed: u64,
}

impl Default for LearnppConfig {
    fn default() -> Self {
        Self {
            iterations: vec![5],
            train_size: None,
            test_size: None,
            max_retries: DEFAULT_MAX_RETRIES,
            beta_floor: DEFAULT_BETA_FLOOR,
            weak_learner: WeakLearnerKind::Stump,
            seed: 0,
        }
    }
}

impl LearnppConfig {
    fn iterations_for(&self, k: usize) -> usize {
        if self.iterations.len() == 1 {
            self.iterations[0]
        } else {
            self.iterations[k]
        }
    }

    fn validate(&self, databases: usize) -> Result<(), LearnppError> {
        if self.iterations.is_empty() || (self.iterations.len() != 1 && self.iterations.len() != databases) {
            return Err(LearnppError::InvalidConfig(format!(
                "{} iteration counts for {databases} databases",
                self.iterations.len()
            )));
        }
        if self.iterations.contains(&0) {
            return Err(LearnppError::InvalidConfig("every T_k must be >= 1".into()));
        }
        if !(self.beta_floor > 0.0 && self.beta_floor < 1.0) {
            return Err(LearnppError::InvalidConfig(format!("beta floor {} outside (0, 1)", self.beta_floor)));
        }
        if self.train_size == Some(0) || self.test_size == Some(0) {
            return Err(LearnppError::InvalidConfig("subset sizes must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum IterationOutcome {
    /// `ε_t >= 1/2`; the hypothesis was discarded.
    WeakRejected,
    /// `E_t >= 1/2`; the hypothesis and its composite were discarded.
    CompositeRejected { composite_error: f64 },
    Accepted { composite_error: f64, composite_beta: f64, next_weights: Vec<f64> },
}

/// Everything one attempt at a slot saw and produced.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub database: usize,
    pub iteration: usize,
    pub attempt: usize,
    pub raw_weights: Vec<f64>,
    pub distribution: Vec<f64>,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub evaluation_set: Vec<usize>,
    pub learner: WeakLearner,
    pub epsilon: f64,
    /// Hypotheses voting in `H_t`, including this one when it passed.
    pub stage: Vec<WeakHypothesis>,
    pub outcome: IterationOutcome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnppEnsemble {
    /// Accepted stages per database.
    pub stages: Vec<Vec<EnsembleStage>>,
    pub class_count: usize,
    pub feature_dim: usize,
    pub beta_floor: f64,
}

impl LearnppEnsemble {
    /// Per-class tally over the stages of the first `databases` databases.
    pub fn votes_upto(&self, databases: usize, x: &[f64]) -> Vec<f64> {
        let mut votes = vec![0.0; self.class_count];
        for db in self.stages.iter().take(databases) {
            for stage in db {
                votes[stage.predict(x, self.class_count, self.beta_floor)] +=
                    vote_weight(stage.composite_beta, self.beta_floor);
            }
        }
        votes
    }

    pub fn final_votes(&self, x: &[f64]) -> Vec<f64> {
        self.votes_upto(self.stages.len(), x)
    }

    pub fn predict_upto(&self, databases: usize, x: &[f64]) -> usize {
        argmax(&self.votes_upto(databases, x))
    }

    pub fn accuracy_upto(&self, databases: usize, set: &LabeledSet) -> f64 {
        let hits = (0..set.len()).filter(|&i| self.predict_upto(databases, set.sample(i)) == set.labels()[i]).count();
        hits as f64 / set.len() as f64
    }

    pub fn accuracy(&self, set: &LabeledSet) -> f64 {
        self.accuracy_upto(self.stages.len(), set)
    }

    pub fn stage_count(&self) -> usize {
        self.stages.iter().map(Vec::len).sum()
    }

    /// Every accepted weak hypothesis, database by database.
    pub fn weak_hypotheses(&self) -> impl Iterator<Item = &WeakHypothesis> {
        self.stages.iter().filter_map(|db| db.last()).flat_map(|s| s.hypotheses.iter())
    }
}

/// `H_final(x)`.
pub fn final_hypothesis(ensemble: &LearnppEnsemble, x: &[f64]) -> usize {
    argmax(&ensemble.final_votes(x))
}

pub fn learner_accuracy(h: &WeakLearner, set: &LabeledSet) -> f64 {
    let hits = (0..set.len()).filter(|&i| h.predict(set.sample(i)) == set.labels()[i]).count();
    hits as f64 / set.len() as f64
}

pub fn learnpp_train(databases: &[LabeledSet], config: &LearnppConfig) -> Result<LearnppEnsemble, LearnppError> {
    learnpp_train_observed(databases, config, |_| {})
}

/// [`learnpp_train`] reporting every slot attempt to `observe`.
pub fn learnpp_train_observed(
    databases: &[LabeledSet],
    config: &LearnppConfig,
    mut observe: impl FnMut(&IterationRecord),
) -> Result<LearnppEnsemble, LearnppError> {
    let first = databases.first().ok_or(LearnppError::NoDatabases)?;
    config.validate(databases.len())?;
    let (feature_dim, class_count) = (first.feature_dim(), first.class_count());
    for (k, db) in databases.iter().enumerate() {
        if db.feature_dim() != feature_dim || db.class_count() != class_count {
            return Err(LearnppError::InconsistentSchema(format!(
                "database {} has {} features and {} classes, expected {feature_dim} and {class_count}",
                k + 1,
                db.feature_dim(),
                db.class_count()
            )));
        }
    }

    let floor = config.beta_floor;
    let mut rng = TrainRng::seed_from_u64(config.seed);
    let mut all_stages = Vec::with_capacity(databases.len());
    for (k, db) in databases.iter().enumerate() {
        let m = db.len();
        let tr_size = config.train_size.unwrap_or((m / 2).max(1));
        let te_size = config.test_size.unwrap_or((m / 2).max(1));
        let mut w = init_distribution(m)?.raw_weights;
        let mut accepted: Vec<WeakHypothesis> = Vec::new();
        let mut stages = Vec::new();
        for t in 0..config.iterations_for(k) {
            let mut attempt = 0;
            loop {
                if attempt > config.max_retries {
                    return Err(LearnppError::WeakLearnerStuck { database: k, iteration: t, retries: config.max_retries });
                }
                let d = normalize_distribution(&w)?;
                let (tr, te) = sample_subsets(&d, &mut rng, tr_size, te_size);
                let s = evaluation_set(&tr, &te);
                let learner = match config.weak_learner {
                    WeakLearnerKind::Stump => train_stump(&db.subset(&tr)),
                    WeakLearnerKind::TinyMlp { hidden, epochs, learning_rate } => {
                        train_tiny_mlp(&db.subset(&tr), hidden, epochs, learning_rate, rng.next_u64())?
                    }
                };
                let epsilon = weighted_error(&learner, &s, &d, db);
                let mut record = IterationRecord {
                    database: k,
                    iteration: t,
                    attempt,
                    raw_weights: w.clone(),
                    distribution: d.clone(),
                    train_indices: tr,
                    test_indices: te,
                    evaluation_set: s,
                    learner: learner.clone(),
                    epsilon,
                    stage: accepted.clone(),
                    outcome: IterationOutcome::WeakRejected,
                };
                let Ok(beta) = normalized_error(epsilon) else {
                    observe(&record);
                    attempt += 1;
                    continue;
                };
                accepted.push(WeakHypothesis { learner, epsilon, beta });
                record.stage = accepted.clone();
                let big_e = composite_error(&accepted, &record.evaluation_set, &d, db, floor);
                if big_e >= 0.5 {
                    accepted.pop();
                    record.outcome = IterationOutcome::CompositeRejected { composite_error: big_e };
                    observe(&record);
                    attempt += 1;
                    continue;
                }
                let big_b = big_e / (1.0 - big_e);
                let correct: Vec<bool> = (0..m)
                    .map(|i| composite_hypothesis(&accepted, db.sample(i), class_count, floor) == db.labels()[i])
                    .collect();
                w = update_weights(&w, big_b.max(floor), &correct)?;
                stages.push(EnsembleStage { hypotheses: accepted.clone(), composite_error: big_e, composite_beta: big_b });
                record.outcome =
                    IterationOutcome::Accepted { composite_error: big_e, composite_beta: big_b, next_weights: w.clone() };
                observe(&record);
                break;
            }
        }
        all_stages.push(stages);
    }
    Ok(LearnppEnsemble { stages: all_stages, class_count, feature_dim, beta_floor: floor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::two_gaussians;
    use crate::tensor::Matrix;

    fn hyp(class: usize, beta: f64) -> WeakHypothesis {
        WeakHypothesis { learner: WeakLearner::Constant { class }, epsilon: beta / (1.0 + beta), beta }
    }

    #[test]
    fn distribution_examples() {
        assert_eq!(init_distribution(4).unwrap().normalized, vec![0.25; 4]);
        assert_eq!(init_distribution(1).unwrap().normalized, vec![1.0]);
        assert!(matches!(init_distribution(0), Err(LearnppError::ZeroSize)));
        assert_eq!(normalize_distribution(&[2.0, 2.0, 4.0]).unwrap(), vec![0.25, 0.25, 0.5]);
        assert_eq!(normalize_distribution(&[3.0; 5]).unwrap(), vec![0.2; 5]);
        assert!(matches!(normalize_distribution(&[1.0, 0.0]), Err(LearnppError::NonPositiveWeight { index: 1, .. })));
    }

    #[test]
    fn uniform_sums_to_one() {
        for m in [1usize, 3, 7, 10, 999, 10_000] {
            let d = init_distribution(m).unwrap().normalized;
            assert!((compensated_sum(&d) - 1.0).abs() <= 1e-12, "m={m}");
        }
    }

    #[test]
    fn concentrated_sampling() {
        let mut d = vec![1e-6; 10];
        d[0] = 1.0;
        let d = normalize_distribution(&d).unwrap();
        let mut rng = TrainRng::seed_from_u64(2);
        let (tr, _) = sample_subsets(&d, &mut rng, 10_000, 1);
        let hits = tr.iter().filter(|&&i| i == 0).count();
        assert!(hits as f64 / 1e4 >= 0.99);

        let mut a = TrainRng::seed_from_u64(9);
        let mut b = TrainRng::seed_from_u64(9);
        assert_eq!(sample_subsets(&d, &mut a, 5, 5), sample_subsets(&d, &mut b, 5, 5));
    }

    #[test]
    fn beta_examples() {
        assert_eq!(normalized_error(0.0).unwrap(), 0.0);
        assert_eq!(normalized_error(0.25).unwrap(), 1.0 / 3.0);
        assert_eq!(normalized_error(0.4).unwrap(), 0.4 / 0.6);
        assert!((normalized_error(0.4).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(normalized_error(0.5).is_err());
        assert!(normalized_error(-0.1).is_err());
        assert_eq!(vote_weight(0.0, DEFAULT_BETA_FLOOR), (1e10f64).ln());
    }

    #[test]
    fn composite_vote_examples() {
        let x = [0.0];
        assert_eq!(composite_hypothesis(&[hyp(1, 0.9)], &x, 2, DEFAULT_BETA_FLOOR), 1);
        assert_eq!(composite_hypothesis(&[hyp(0, 0.1), hyp(1, 0.4)], &x, 2, DEFAULT_BETA_FLOOR), 0);
        assert_eq!(composite_hypothesis(&[hyp(1, 0.4), hyp(0, 0.1)], &x, 2, DEFAULT_BETA_FLOOR), 0);
        assert_eq!(composite_hypothesis(&[hyp(2, 0.3), hyp(2, 0.2)], &x, 3, DEFAULT_BETA_FLOOR), 2);
    }

    #[test]
    fn update_examples() {
        assert_eq!(update_weights(&[0.25], 0.5, &[true]).unwrap(), vec![0.125]);
        assert_eq!(update_weights(&[0.25], 0.5, &[false]).unwrap(), vec![0.25]);
        assert!(update_weights(&[0.25], 1.0, &[true]).is_err());
        assert!(update_weights(&[0.25], 0.0, &[true]).is_err());
        let w = [0.1, 0.2, 0.7];
        let next = update_weights(&w, DEFAULT_BETA_FLOOR, &[true; 3]).unwrap();
        let (a, b) = (normalize_distribution(&w).unwrap(), normalize_distribution(&next).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn weighted_error_examples() {
        let data = LabeledSet::new(Matrix::from_vec(3, 1, vec![0.0, 1.0, 2.0]), vec![0, 0, 1], 2).unwrap();
        let d = [0.2, 0.3, 0.5];
        let perfect = WeakLearner::Stump(Stump { feature: 0, threshold: 1.5, left: 0, right: 1 });
        assert_eq!(weighted_error(&perfect, &[0, 1, 2], &d, &data), 0.0);
        let wrong_on_1 = WeakLearner::Stump(Stump { feature: 0, threshold: 0.5, left: 0, right: 1 });
        assert_eq!(weighted_error(&wrong_on_1, &[0, 1, 2], &d, &data), 0.3);
        assert_eq!(evaluation_set(&[2, 0, 2], &[1, 0]), vec![0, 1, 2]);
    }

    #[test]
    fn single_separable_database() {
        let data = LabeledSet::new(Matrix::from_vec(6, 1, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]), vec![0, 0, 0, 1, 1, 1], 2)
            .unwrap();
        let config = LearnppConfig { iterations: vec![1], train_size: Some(60), ..LearnppConfig::default() };
        let ens = learnpp_train(std::slice::from_ref(&data), &config).unwrap();
        assert_eq!(ens.stage_count(), 1);
        assert_eq!(ens.stages[0][0].hypotheses[0].epsilon, 0.0);
        assert_eq!(ens.accuracy(&data), 1.0);
    }

    #[test]
    fn errors_and_schema_checks() {
        assert!(matches!(learnpp_train(&[], &LearnppConfig::default()), Err(LearnppError::NoDatabases)));
        let a = two_gaussians(10, 1);
        let b = LabeledSet::new(Matrix::from_vec(2, 1, vec![0.0, 1.0]), vec![0, 1], 2).unwrap();
        assert!(matches!(learnpp_train(&[a.clone(), b], &LearnppConfig::default()), Err(LearnppError::InconsistentSchema(_))));
        let bad = LearnppConfig { iterations: vec![1, 2, 3], ..LearnppConfig::default() };
        assert!(matches!(learnpp_train(&[a], &bad), Err(LearnppError::InvalidConfig(_))));
    }

    #[test]
    fn unlearnable_data_gets_stuck() {
        // identical features, opposite labels: every constant learner errs on half of S_t
        let data = LabeledSet::new(Matrix::from_vec(2, 1, vec![1.0; 2]), vec![0, 1], 2).unwrap();
        let config = LearnppConfig {
            iterations: vec![1],
            train_size: Some(1),
            test_size: Some(64),
            max_retries: 2,
            ..LearnppConfig::default()
        };
        let mut attempts = 0;
        let result = learnpp_train_observed(&[data], &config, |_| attempts += 1);
        assert!(matches!(result, Err(LearnppError::WeakLearnerStuck { retries: 2, .. })), "{result:?}");
        assert_eq!(attempts, 3);
    }

    #[test]
    fn two_identical_databases_do_not_hurt() {
        let data = two_gaussians(120, 5);
        let config = LearnppConfig { iterations: vec![3], seed: 4, ..LearnppConfig::default() };
        let one = learnpp_train(std::slice::from_ref(&data), &config).unwrap();
        let two = learnpp_train(&[data.clone(), data.clone()], &config).unwrap();
        assert_eq!(two.stages.len(), 2);
        assert!(two.accuracy(&data) >= one.accuracy(&data), "{} vs {}", two.accuracy(&data), one.accuracy(&data));
    }

    #[test]
    fn tiny_mlp_weak_learner_runs() {
        let data = two_gaussians(60, 2);
        let config = LearnppConfig { iterations: vec![2], weak_learner: WeakLearnerKind::tiny_mlp(), ..LearnppConfig::default() };
        let ens = learnpp_train(std::slice::from_ref(&data), &config).unwrap();
        assert!(ens.accuracy(&data) > 0.7);
        assert_eq!(learnpp_train(&[data], &config).unwrap(), ens);
    }
}
