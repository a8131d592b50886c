// SPDX-License-Identifier: Apache-2.0

//! Multilayer perceptron with manual backpropagation and momentum SGD.
//!
//! Weights of layer `l` are stored `fan_out × fan_in`. All arithmetic is
//! `f64` with loops in a fixed order, so a given (spec, data, config) always
//! produces the same bits.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::loss::{self, LossError, LossKind};
use crate::rng::TrainRng;
use crate::tensor::{argmax, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
    Tanh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OutputActivation {
    Identity,
    Softmax,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("invalid optimizer config: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("loss `{0}` requires a softmax output layer")]
    LossActivationMismatch(LossKind),
    #[error("gradient contains a non-finite value")]
    NonFiniteGradient,
    #[error(transparent)]
    Loss(#[from] LossError),
}

fn mismatch(expected: impl fmt::Display, found: impl fmt::Display) -> EngineError {
    EngineError::DimensionMismatch { expected: expected.to_string(), found: found.to_string() }
}

impl Activation {
    pub fn name(&self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        }
    }

    fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    fn derivative(&self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

impl FromStr for Activation {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(Activation::Identity),
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            other => Err(EngineError::InvalidSpec(format!("unknown activation `{other}`"))),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl OutputActivation {
    pub fn name(&self) -> &'static str {
        match self {
            OutputActivation::Identity => "identity",
            OutputActivation::Softmax => "softmax",
        }
    }
}

impl FromStr for OutputActivation {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(OutputActivation::Identity),
            "softmax" => Ok(OutputActivation::Softmax),
            other => Err(EngineError::InvalidSpec(format!("unknown output activation `{other}`"))),
        }
    }
}

impl fmt::Display for OutputActivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Architecture plus initialisation seed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModelSpec {
    /// Input width first, output width last.
    pub layer_sizes: Vec<usize>,
    /// One entry per hidden layer.
    pub activations: Vec<Activation>,
    pub output_activation: OutputActivation,
    pub init_seed: u64,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.layer_sizes.len() < 2 {
            return Err(EngineError::InvalidSpec("need at least input and output layer sizes".into()));
        }
        if self.layer_sizes.contains(&0) {
            return Err(EngineError::InvalidSpec("layer sizes must be >= 1".into()));
        }
        let hidden = self.layer_sizes.len() - 2;
        if self.activations.len() != hidden {
            return Err(EngineError::InvalidSpec(format!(
                "{} hidden layers but {} activations",
                hidden,
                self.activations.len()
            )));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().expect("validated spec")
    }

    pub fn layer_count(&self) -> usize {
        self.layer_sizes.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    pub spec: ModelSpec,
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub weight_velocity: Vec<Matrix>,
    pub bias_velocity: Vec<Vec<f64>>,
    pub step_count: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub loss: LossKind,
}

impl OptimizerConfig {
    pub fn new(learning_rate: f64, momentum: f64, loss: LossKind) -> Result<Self, EngineError> {
        let cfg = Self { learning_rate, momentum, loss };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(EngineError::InvalidConfig(format!("learning rate {} must be > 0", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(EngineError::InvalidConfig(format!("momentum {} must be in [0, 1)", self.momentum)));
        }
        if let LossKind::Huber { delta } = self.loss {
            LossKind::huber(delta)?;
        }
        Ok(())
    }
}

/// Parameter gradients, congruent with [`ModelState`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(Matrix::is_finite) && self.biases.iter().flatten().all(|v| v.is_finite())
    }
}

/// Per-layer values recorded by [`forward`].
#[derive(Clone, Debug)]
pub struct Trace {
    /// `activations[0]` is the input batch; `activations[l + 1]` is layer `l`'s output.
    pub activations: Vec<Matrix>,
    pub pre_activations: Vec<Matrix>,
}

impl Trace {
    pub fn outputs(&self) -> &Matrix {
        self.activations.last().expect("trace always holds the input")
    }
}

/// Glorot-uniform weights, zero biases, zero velocity.
pub fn init_model(spec: &ModelSpec) -> Result<(ModelState, OptimizerState), EngineError> {
    spec.validate()?;
    let mut rng = TrainRng::seed_from_u64(spec.init_seed);
    let mut weights = Vec::with_capacity(spec.layer_count());
    let mut biases = Vec::with_capacity(spec.layer_count());
    for pair in spec.layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let values = (0..fan_in * fan_out).map(|_| rng.symmetric_uniform(bound)).collect();
        weights.push(Matrix::from_vec(fan_out, fan_in, values));
        biases.push(vec![0.0; fan_out]);
    }
    let opt = OptimizerState {
        weight_velocity: weights.iter().map(|w| Matrix::zeros(w.rows(), w.cols())).collect(),
        bias_velocity: biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        step_count: 0,
    };
    Ok((ModelState { spec: spec.clone(), weights, biases }, opt))
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

pub fn forward(model: &ModelState, inputs: &Matrix) -> Result<Trace, EngineError> {
    let d_in = model.spec.input_dim();
    if inputs.cols() != d_in {
        return Err(mismatch(format!("{d_in} input columns"), inputs.cols()));
    }
    let n = inputs.rows();
    let last = model.weights.len() - 1;
    let mut activations = vec![inputs.clone()];
    let mut pre_activations = Vec::with_capacity(model.weights.len());
    for (l, (w, b)) in model.weights.iter().zip(&model.biases).enumerate() {
        let input = activations.last().expect("non-empty");
        let mut z = Matrix::zeros(n, w.rows());
        for r in 0..n {
            let x = input.row(r);
            for (j, &bj) in b.iter().enumerate() {
                let mut acc = bj;
                for (wi, xi) in w.row(j).iter().zip(x) {
                    acc += wi * xi;
                }
                z.set(r, j, acc);
            }
        }
        let mut a = z.clone();
        if l == last {
            if model.spec.output_activation == OutputActivation::Softmax {
                for r in 0..n {
                    softmax_in_place(a.row_mut(r));
                }
            }
        } else {
            let act = model.spec.activations[l];
            for v in a.as_mut_slice() {
                *v = act.apply(*v);
            }
        }
        pre_activations.push(z);
        activations.push(a);
    }
    Ok(Trace { activations, pre_activations })
}

/// Gradient of the batch-mean loss with respect to every weight and bias.
pub fn backward(model: &ModelState, trace: &Trace, targets: &Matrix, loss: LossKind) -> Result<Gradients, EngineError> {
    let outputs = trace.outputs();
    if targets.shape() != outputs.shape() {
        return Err(mismatch(format!("{:?} targets", outputs.shape()), format!("{:?}", targets.shape())));
    }
    if loss.expects_probabilities() && model.spec.output_activation != OutputActivation::Softmax {
        return Err(EngineError::LossActivationMismatch(loss));
    }
    let n = outputs.rows();
    let scale = 1.0 / n as f64;

    // dL/d(outputs), then through the output activation
    let mut delta = Matrix::zeros(n, outputs.cols());
    for r in 0..n {
        let g = loss::eval_loss_gradient(loss, outputs.row(r), targets.row(r))?;
        let y = outputs.row(r);
        let out = delta.row_mut(r);
        match model.spec.output_activation {
            OutputActivation::Identity => {
                for (o, gi) in out.iter_mut().zip(&g) {
                    *o = gi * scale;
                }
            }
            OutputActivation::Softmax => {
                let mut dot = 0.0;
                for (gi, yi) in g.iter().zip(y) {
                    dot += gi * yi;
                }
                for ((o, gi), yi) in out.iter_mut().zip(&g).zip(y) {
                    *o = yi * (gi - dot) * scale;
                }
            }
        }
    }

    let layers = model.weights.len();
    let mut gw: Vec<Matrix> = Vec::with_capacity(layers);
    let mut gb: Vec<Vec<f64>> = Vec::with_capacity(layers);
    for l in (0..layers).rev() {
        let w = &model.weights[l];
        let input = &trace.activations[l];
        let mut dw = Matrix::zeros(w.rows(), w.cols());
        let mut db = vec![0.0; w.rows()];
        for r in 0..n {
            let d = delta.row(r);
            let x = input.row(r);
            for j in 0..w.rows() {
                db[j] += d[j];
                let dwj = dw.row_mut(j);
                for (acc, xi) in dwj.iter_mut().zip(x) {
                    *acc += d[j] * xi;
                }
            }
        }
        if l > 0 {
            let act = model.spec.activations[l - 1];
            let z = &trace.pre_activations[l - 1];
            let a = &trace.activations[l];
            let mut prev = Matrix::zeros(n, w.cols());
            for r in 0..n {
                let d = delta.row(r);
                for i in 0..w.cols() {
                    let mut acc = 0.0;
                    for (j, dj) in d.iter().enumerate() {
                        acc += dj * w.get(j, i);
                    }
                    prev.set(r, i, acc * act.derivative(z.get(r, i), a.get(r, i)));
                }
            }
            delta = prev;
        }
        gw.push(dw);
        gb.push(db);
    }
    gw.reverse();
    gb.reverse();
    Ok(Gradients { weights: gw, biases: gb })
}

/// `v ← momentum·v + g`, `w ← w − lr·v`, one step counted.
///
/// Nothing is modified when the gradient is non-finite or mis-shaped.
pub fn sgd_step(
    model: &mut ModelState,
    grads: &Gradients,
    opt: &mut OptimizerState,
    cfg: &OptimizerConfig,
) -> Result<(), EngineError> {
    let congruent = grads.weights.len() == model.weights.len()
        && grads.biases.len() == model.biases.len()
        && opt.weight_velocity.len() == model.weights.len()
        && opt.bias_velocity.len() == model.biases.len()
        && grads.weights.iter().zip(&model.weights).all(|(g, w)| g.shape() == w.shape())
        && grads.biases.iter().zip(&model.biases).all(|(g, b)| g.len() == b.len())
        && opt.weight_velocity.iter().zip(&model.weights).all(|(v, w)| v.shape() == w.shape())
        && opt.bias_velocity.iter().zip(&model.biases).all(|(v, b)| v.len() == b.len());
    if !congruent {
        return Err(mismatch("gradients and velocity congruent with model", "different shapes"));
    }
    if !grads.is_finite() {
        return Err(EngineError::NonFiniteGradient);
    }
    let (lr, mu) = (cfg.learning_rate, cfg.momentum);
    let update = |w: &mut [f64], v: &mut [f64], g: &[f64]| {
        for ((wi, vi), gi) in w.iter_mut().zip(v.iter_mut()).zip(g) {
            *vi = mu * *vi + gi;
            *wi -= lr * *vi;
        }
    };
    for l in 0..model.weights.len() {
        update(
            model.weights[l].as_mut_slice(),
            opt.weight_velocity[l].as_mut_slice(),
            grads.weights[l].as_slice(),
        );
        update(&mut model.biases[l], &mut opt.bias_velocity[l], &grads.biases[l]);
    }
    opt.step_count += 1;
    Ok(())
}

/// Mean loss over the batch plus argmax accuracy (ties to the lowest index).
pub fn evaluate(model: &ModelState, features: &Matrix, targets: &Matrix, loss: LossKind) -> Result<(f64, f64), EngineError> {
    let trace = forward(model, features)?;
    let outputs = trace.outputs();
    if targets.shape() != outputs.shape() {
        return Err(mismatch(format!("{:?} targets", outputs.shape()), format!("{:?}", targets.shape())));
    }
    let value = loss::batch_mean_loss(loss, outputs, targets)?;
    let correct = (0..outputs.rows()).filter(|&r| argmax(outputs.row(r)) == argmax(targets.row(r))).count();
    Ok((value, correct as f64 / outputs.rows() as f64))
}

/// Batch-mean loss of the model's outputs, used by gradient checks.
pub fn batch_loss(model: &ModelState, features: &Matrix, targets: &Matrix, loss: LossKind) -> Result<f64, EngineError> {
    let trace = forward(model, features)?;
    Ok(loss::batch_mean_loss(loss, trace.outputs(), targets)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_1x1(w: f64, b: f64) -> ModelState {
        ModelState {
            spec: ModelSpec {
                layer_sizes: vec![1, 1],
                activations: vec![],
                output_activation: OutputActivation::Identity,
                init_seed: 0,
            },
            weights: vec![Matrix::from_vec(1, 1, vec![w])],
            biases: vec![vec![b]],
        }
    }

    fn spec(sizes: &[usize], seed: u64) -> ModelSpec {
        ModelSpec {
            layer_sizes: sizes.to_vec(),
            activations: vec![Activation::Tanh; sizes.len().saturating_sub(2)],
            output_activation: OutputActivation::Softmax,
            init_seed: seed,
        }
    }

    #[test]
    fn init_is_deterministic() {
        let (a, _) = init_model(&spec(&[2, 16, 8, 2], 7)).unwrap();
        let (b, _) = init_model(&spec(&[2, 16, 8, 2], 7)).unwrap();
        let bits = |m: &ModelState| m.weights.iter().flat_map(|w| w.as_slice().iter().map(|v| v.to_bits())).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        let (c, _) = init_model(&spec(&[2, 16, 8, 2], 8)).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn init_bias_zero_and_glorot_bound() {
        let s = ModelSpec {
            layer_sizes: vec![2, 1],
            activations: vec![],
            output_activation: OutputActivation::Identity,
            init_seed: 3,
        };
        let (m, opt) = init_model(&s).unwrap();
        assert_eq!(m.biases, vec![vec![0.0]]);
        assert_eq!(opt.step_count, 0);

        let (m, _) = init_model(&spec(&[3, 3], 11)).unwrap();
        assert!(m.weights[0].as_slice().iter().all(|w| w.abs() <= 1.0));
    }

    #[test]
    fn invalid_specs() {
        let mut s = spec(&[2, 4, 2], 0);
        s.activations.clear();
        assert!(matches!(init_model(&s), Err(EngineError::InvalidSpec(_))));
        assert!(matches!(init_model(&spec(&[2], 0)), Err(EngineError::InvalidSpec(_))));
        let mut s = spec(&[2, 0, 2], 0);
        s.activations = vec![Activation::Relu];
        assert!(matches!(init_model(&s), Err(EngineError::InvalidSpec(_))));
    }

    #[test]
    fn forward_examples() {
        let m = linear_1x1(2.0, 1.0);
        let t = forward(&m, &Matrix::from_vec(1, 1, vec![3.0])).unwrap();
        assert_eq!(t.outputs().as_slice(), &[7.0]);

        let mut z = init_model(&ModelSpec {
            layer_sizes: vec![3, 4, 2],
            activations: vec![Activation::Identity],
            output_activation: OutputActivation::Identity,
            init_seed: 1,
        })
        .unwrap()
        .0;
        for w in &mut z.weights {
            w.as_mut_slice().fill(0.0);
        }
        let t = forward(&z, &Matrix::from_vec(2, 3, vec![1.0, -2.0, 3.0, 4.0, 5.0, 6.0])).unwrap();
        assert!(t.outputs().as_slice().iter().all(|&v| v == 0.0));

        let mut s = linear_1x1(0.0, 0.0);
        s.spec.layer_sizes = vec![1, 2];
        s.spec.output_activation = OutputActivation::Softmax;
        s.weights = vec![Matrix::zeros(2, 1)];
        s.biases = vec![vec![0.0, 0.0]];
        let t = forward(&s, &Matrix::from_vec(1, 1, vec![5.0])).unwrap();
        assert_eq!(t.outputs().as_slice(), &[0.5, 0.5]);

        assert!(matches!(forward(&m, &Matrix::zeros(1, 2)), Err(EngineError::DimensionMismatch { .. })));
    }

    #[test]
    fn softmax_rows_are_distributions() {
        let (m, _) = init_model(&spec(&[2, 5, 3], 4)).unwrap();
        let x = Matrix::from_vec(3, 2, vec![100.0, -40.0, 0.0, 0.0, 3.0, 0.5]);
        let t = forward(&m, &x).unwrap();
        for r in 0..3 {
            let row = t.outputs().row(r);
            assert!(row.iter().all(|&v| v >= 0.0));
            assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn backward_one_by_one_matches_hand_derivative() {
        // L2: (w x + b - t)^2, d/dw = 2 r x, d/db = 2 r
        let m = linear_1x1(0.5, 0.25);
        let x = Matrix::from_vec(1, 1, vec![2.0]);
        let t = Matrix::from_vec(1, 1, vec![3.0]);
        let trace = forward(&m, &x).unwrap();
        let g = backward(&m, &trace, &t, LossKind::L2).unwrap();
        let r = 0.5 * 2.0 + 0.25 - 3.0;
        assert_eq!(g.weights[0].as_slice(), &[2.0 * r * 2.0]);
        assert_eq!(g.biases[0], vec![2.0 * r]);
    }

    #[test]
    fn backward_zero_at_optimum() {
        let m = linear_1x1(2.0, 1.0);
        let x = Matrix::from_vec(2, 1, vec![1.0, -1.0]);
        let t = Matrix::from_vec(2, 1, vec![3.0, -1.0]);
        let g = backward(&m, &forward(&m, &x).unwrap(), &t, LossKind::MeanSquaredError).unwrap();
        assert_eq!(g.weights[0].as_slice(), &[0.0]);
        assert_eq!(g.biases[0], vec![0.0]);
    }

    #[test]
    fn cross_entropy_needs_softmax() {
        let m = linear_1x1(1.0, 0.0);
        let x = Matrix::from_vec(1, 1, vec![0.5]);
        let t = Matrix::from_vec(1, 1, vec![1.0]);
        let err = backward(&m, &forward(&m, &x).unwrap(), &t, LossKind::CrossEntropy).unwrap_err();
        assert_eq!(err, EngineError::LossActivationMismatch(LossKind::CrossEntropy));
    }

    #[test]
    fn sgd_step_examples() {
        let cfg = OptimizerConfig::new(0.1, 0.0, LossKind::L2).unwrap();
        let mut m = linear_1x1(1.0, 0.0);
        let mut opt = OptimizerState {
            weight_velocity: vec![Matrix::zeros(1, 1)],
            bias_velocity: vec![vec![0.0]],
            step_count: 0,
        };
        let g = Gradients { weights: vec![Matrix::from_vec(1, 1, vec![2.0])], biases: vec![vec![0.0]] };
        sgd_step(&mut m, &g, &mut opt, &cfg).unwrap();
        assert_eq!(m.weights[0].get(0, 0), 0.8);
        assert_eq!(opt.step_count, 1);

        // zero gradient is a fixed point
        let before = m.clone();
        let zero = Gradients { weights: vec![Matrix::zeros(1, 1)], biases: vec![vec![0.0]] };
        opt.weight_velocity[0].set(0, 0, 0.0);
        sgd_step(&mut m, &zero, &mut opt, &cfg).unwrap();
        assert_eq!(m, before);
        assert_eq!(opt.step_count, 2);

        // momentum 0.9, two unit steps from w = 0
        let cfg = OptimizerConfig::new(0.1, 0.9, LossKind::L2).unwrap();
        let mut m = linear_1x1(0.0, 0.0);
        let mut opt = OptimizerState {
            weight_velocity: vec![Matrix::zeros(1, 1)],
            bias_velocity: vec![vec![0.0]],
            step_count: 0,
        };
        let one = Gradients { weights: vec![Matrix::from_vec(1, 1, vec![1.0])], biases: vec![vec![0.0]] };
        sgd_step(&mut m, &one, &mut opt, &cfg).unwrap();
        sgd_step(&mut m, &one, &mut opt, &cfg).unwrap();
        assert!((m.weights[0].get(0, 0) + 0.29).abs() < 1e-15);
    }

    #[test]
    fn non_finite_gradient_leaves_state_alone() {
        let cfg = OptimizerConfig::new(0.1, 0.5, LossKind::L2).unwrap();
        let mut m = linear_1x1(1.0, 0.0);
        let mut opt = OptimizerState {
            weight_velocity: vec![Matrix::zeros(1, 1)],
            bias_velocity: vec![vec![0.0]],
            step_count: 4,
        };
        let bad = Gradients { weights: vec![Matrix::from_vec(1, 1, vec![f64::NAN])], biases: vec![vec![0.0]] };
        let before = (m.clone(), opt.clone());
        assert_eq!(sgd_step(&mut m, &bad, &mut opt, &cfg), Err(EngineError::NonFiniteGradient));
        assert_eq!((m, opt), before);
    }

    #[test]
    fn optimizer_config_bounds() {
        assert!(OptimizerConfig::new(0.0, 0.0, LossKind::L2).is_err());
        assert!(OptimizerConfig::new(0.1, 1.0, LossKind::L2).is_err());
        assert!(OptimizerConfig::new(0.1, -0.1, LossKind::L2).is_err());
        assert!(OptimizerConfig::new(0.1, 0.99, LossKind::L2).is_ok());
    }

    #[test]
    fn evaluate_accuracy_and_ties() {
        let mut m = linear_1x1(0.0, 0.0);
        m.spec.layer_sizes = vec![1, 2];
        m.spec.output_activation = OutputActivation::Softmax;
        m.weights = vec![Matrix::zeros(2, 1)];
        m.biases = vec![vec![0.0, 0.0]];
        let x = Matrix::from_vec(1, 1, vec![1.0]);
        let t = Matrix::from_vec(1, 2, vec![1.0, 0.0]);
        let (_, acc) = evaluate(&m, &x, &t, LossKind::CrossEntropy).unwrap();
        assert_eq!(acc, 1.0);

        // identity output on a 1 -> 2 map: class is sign of x
        m.spec.output_activation = OutputActivation::Identity;
        m.weights = vec![Matrix::from_vec(2, 1, vec![-1.0, 1.0])];
        let x = Matrix::from_vec(4, 1, vec![-1.0, 2.0, 3.0, -4.0]);
        let t = Matrix::from_vec(4, 2, vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        let (_, acc) = evaluate(&m, &x, &t, LossKind::MeanSquaredError).unwrap();
        assert_eq!(acc, 0.75);
    }
}
