// SPDX-License-Identifier: Apache-2.0

//! Weak learners: the exhaustive decision stump and a one-hidden-layer MLP.

use std::fmt;

use crate::data::LabeledSet;
use crate::loss::LossKind;
use crate::mlp::{self, Activation, EngineError, ModelSpec, ModelState, OptimizerConfig, OutputActivation};
use crate::tensor::{argmax, Matrix};

/// Axis-aligned split: `x[feature] <= threshold` predicts `left`, else `right`.
#[derive(Clone, Debug, PartialEq)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
}

impl Stump {
    pub fn predict(&self, x: &[f64]) -> usize {
        if x[self.feature] <= self.threshold {
            self.left
        } else {
            self.right
        }
    }
}

/// Small softmax network trained with a few epochs of full-batch SGD.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpLearner {
    pub model: ModelState,
}

impl MlpLearner {
    pub fn predict(&self, x: &[f64]) -> usize {
        let input = Matrix::from_vec(1, x.len(), x.to_vec());
        let trace = mlp::forward(&self.model, &input).expect("input width checked at training time");
        argmax(trace.outputs().row(0))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeakLearner {
    Constant { class: usize },
    Stump(Stump),
    Mlp(MlpLearner),
}

impl WeakLearner {
    pub fn predict(&self, x: &[f64]) -> usize {
        match self {
            WeakLearner::Constant { class } => *class,
            WeakLearner::Stump(s) => s.predict(x),
            WeakLearner::Mlp(m) => m.predict(x),
        }
    }
}

impl fmt::Display for WeakLearner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeakLearner::Constant { class } => write!(f, "constant({class})"),
            WeakLearner::Stump(s) => {
                write!(f, "stump(x{} <= {} ? {} : {})", s.feature, s.threshold, s.left, s.right)
            }
            WeakLearner::Mlp(m) => write!(f, "mlp({:?})", m.model.spec.layer_sizes),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum WeakLearnerKind {
    #[default]
    Stump,
    TinyMlp { hidden: usize, epochs: usize, learning_rate: f64 },
}

impl WeakLearnerKind {
    pub fn tiny_mlp() -> Self {
        WeakLearnerKind::TinyMlp { hidden: 4, epochs: 30, learning_rate: 0.5 }
    }
}

/// Majority class of `labels`, ties to the lowest class.
fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

/// Misclassifications on one side when it predicts its majority class.
fn side_errors(counts: &[usize], total: usize) -> (usize, usize) {
    let class = majority(counts);
    (class, total - counts[class])
}

/// Midpoint of two distinct adjacent sorted values that still separates them.
fn midpoint(a: f64, b: f64) -> f64 {
    let mid = a + (b - a) / 2.0;
    if mid >= b {
        a
    } else {
        mid
    }
}

/// Exhaustive stump minimising unweighted error on `tr` (duplicates count).
///
/// Candidates are midpoints between consecutive distinct values of each
/// feature. Ties go to the lowest feature index, then the lowest threshold.
/// With no candidate threshold the majority-class constant is returned.
pub fn train_stump(tr: &LabeledSet) -> WeakLearner {
    let n = tr.len();
    let classes = tr.class_count();
    let labels = tr.labels();
    let mut totals = vec![0usize; classes];
    for &y in labels {
        totals[y] += 1;
    }

    let mut best: Option<(usize, Stump)> = None;
    let mut order: Vec<usize> = (0..n).collect();
    for feature in 0..tr.feature_dim() {
        let value = |i: usize| tr.sample(i)[feature];
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(a.cmp(&b)));
        let mut left = vec![0usize; classes];
        for pos in 0..n.saturating_sub(1) {
            let i = order[pos];
            left[labels[i]] += 1;
            let (a, b) = (value(i), value(order[pos + 1]));
            if a == b {
                continue;
            }
            let right: Vec<usize> = totals.iter().zip(&left).map(|(t, l)| t - l).collect();
            let (lc, le) = side_errors(&left, pos + 1);
            let (rc, re) = side_errors(&right, n - pos - 1);
            let errors = le + re;
            // strict improvement keeps the earliest feature and lowest threshold
            if best.as_ref().is_none_or(|(e, _)| errors < *e) {
                best = Some((errors, Stump { feature, threshold: midpoint(a, b), left: lc, right: rc }));
            }
        }
    }
    match best {
        Some((_, stump)) => WeakLearner::Stump(stump),
        None => WeakLearner::Constant { class: majority(&totals) },
    }
}

pub fn train_tiny_mlp(
    tr: &LabeledSet,
    hidden: usize,
    epochs: usize,
    learning_rate: f64,
    init_seed: u64,
) -> Result<WeakLearner, EngineError> {
    let spec = ModelSpec {
        layer_sizes: vec![tr.feature_dim(), hidden.max(1), tr.class_count()],
        activations: vec![Activation::Tanh],
        output_activation: OutputActivation::Softmax,
        init_seed,
    };
    let config = OptimizerConfig::new(learning_rate, 0.9, LossKind::CrossEntropy)?;
    let (mut model, mut opt) = mlp::init_model(&spec)?;
    let data = tr.to_training_data();
    for _ in 0..epochs {
        let trace = mlp::forward(&model, &data.features)?;
        let grads = mlp::backward(&model, &trace, &data.targets, config.loss)?;
        mlp::sgd_step(&mut model, &grads, &mut opt, &config)?;
    }
    Ok(WeakLearner::Mlp(MlpLearner { model }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(rows: &[(f64, usize)]) -> LabeledSet {
        let features = Matrix::from_vec(rows.len(), 1, rows.iter().map(|r| r.0).collect());
        LabeledSet::new(features, rows.iter().map(|r| r.1).collect(), 2).unwrap()
    }

    fn errors(h: &WeakLearner, s: &LabeledSet) -> usize {
        (0..s.len()).filter(|&i| h.predict(s.sample(i)) != s.labels()[i]).count()
    }

    #[test]
    fn separable_one_dimensional() {
        let s = set(&[(0.0, 0), (1.0, 0), (2.0, 1), (3.0, 1)]);
        let h = train_stump(&s);
        assert_eq!(h, WeakLearner::Stump(Stump { feature: 0, threshold: 1.5, left: 0, right: 1 }));
        assert_eq!(errors(&h, &s), 0);
    }

    #[test]
    fn single_sample_is_constant() {
        let s = set(&[(4.0, 1)]);
        assert_eq!(train_stump(&s), WeakLearner::Constant { class: 1 });
    }

    #[test]
    fn identical_features_conflicting_labels() {
        let s = set(&[(1.0, 1), (1.0, 0), (1.0, 1)]);
        assert_eq!(train_stump(&s), WeakLearner::Constant { class: 1 });
        let tie = set(&[(1.0, 1), (1.0, 0)]);
        assert_eq!(train_stump(&tie), WeakLearner::Constant { class: 0 });
    }

    #[test]
    fn ties_prefer_lowest_threshold() {
        // both 0.5 and 2.5 leave one error
        let s = set(&[(0.0, 0), (1.0, 1), (2.0, 1), (3.0, 0)]);
        match train_stump(&s) {
            WeakLearner::Stump(st) => assert_eq!(st.threshold, 0.5),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn no_candidate_beats_chosen_stump() {
        let s = crate::data::two_gaussians(15, 3);
        let h = train_stump(&s);
        let chosen = errors(&h, &s);
        for f in 0..2 {
            for i in 0..s.len() {
                for left in 0..2 {
                    let cand = WeakLearner::Stump(Stump { feature: f, threshold: s.sample(i)[f], left, right: 1 - left });
                    assert!(chosen <= errors(&cand, &s));
                }
            }
        }
    }

    #[test]
    fn adjacent_float_midpoint_separates() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let m = midpoint(a, b);
        assert!(a <= m && m < b);
    }

    #[test]
    fn tiny_mlp_learns_separable_data() {
        let s = set(&[(-2.0, 0), (-1.0, 0), (1.0, 1), (2.0, 1)]);
        let h = train_tiny_mlp(&s, 4, 50, 0.5, 1).unwrap();
        assert_eq!(errors(&h, &s), 0);
    }
}
