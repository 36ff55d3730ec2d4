//! From-scratch feedforward classifier: ReLU hidden layers, softmax output,
//! inverted dropout on the first hidden layer, sparse categorical
//! cross-entropy, and Adam. Everything is f64 and deterministic per seed.

use std::io::{self, BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use thiserror::Error;

use crate::signature::TopologicalSignature;

/// The layer widths of the classifier: 9 inputs, three ReLU hidden layers,
/// 7 output classes.
pub const LAYER_SIZES: [usize; 5] = [9, 512, 128, 64, 7];

/// Floor for probabilities inside the loss, avoiding -ln(0).
const PROB_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major (out_dim x in_dim).
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
}

impl MlpParams {
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].in_dim];
        sizes.extend(self.layers.iter().map(|l| l.out_dim));
        sizes
    }

    pub fn num_classes(&self) -> usize {
        self.layers.last().expect("at least one layer").out_dim
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    fn assert_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }
}

/// Per-parameter tensors mirroring [`MlpParams`]; used for gradients and the
/// Adam moment estimates.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Gradients {
    pub fn zeros_like(params: &MlpParams) -> Self {
        Self {
            layers: params
                .layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
                .collect(),
        }
    }

    fn scale(&mut self, factor: f64) {
        for (w, b) in &mut self.layers {
            for v in w.iter_mut().chain(b.iter_mut()) {
                *v *= factor;
            }
        }
    }
}

/// Optimizer state: first and second moment estimates plus the step count.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m: Gradients,
    pub v: Gradients,
    pub t: u64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(params: &MlpParams, alpha: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            m: Gradients::zeros_like(params),
            v: Gradients::zeros_like(params),
            t: 0,
            alpha,
            beta1,
            beta2,
            eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Training configuration. Defaults: 500 epochs, batches of 32, dropout 0.2,
/// Adam at (1e-3, 0.9, 0.999, 1e-8), 10 repetitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub dropout: f64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub repetitions: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            batch_size: 32,
            seed: 0,
            dropout: 0.2,
            alpha: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            repetitions: 10,
        }
    }
}

/// Accuracy after each epoch, measured in eval mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub train_accuracy: f64,
    pub test_accuracy: Option<f64>,
}

pub type TrainHistory = Vec<EpochStats>;

/// A labelled training example.
pub type Example = (Vec<f64>, usize);

#[derive(Debug, Error)]
pub enum MlpError {
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("class {0} has no examples")]
    MissingClass(usize),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error("input has {found} features, the network expects {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("signature {0} has no label")]
    UnlabelledSignature(String),
    #[error("model file line {line}: {msg}")]
    ModelFormat { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// He-normal initialization of the standard architecture: weights from
/// N(0, 2/fan_in), zero biases. Deterministic per seed.
pub fn init_params(seed: u64) -> MlpParams {
    init_params_with_sizes(&LAYER_SIZES, seed)
}

pub fn init_params_with_sizes(sizes: &[usize], seed: u64) -> MlpParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = sizes
        .windows(2)
        .map(|pair| {
            let (inn, out) = (pair[0], pair[1]);
            let dist = Normal::new(0.0, (2.0 / inn as f64).sqrt()).expect("positive std dev");
            Layer {
                in_dim: inn,
                out_dim: out,
                weights: (0..inn * out).map(|_| dist.sample(&mut rng)).collect(),
                bias: vec![0.0; out],
            }
        })
        .collect();
    MlpParams { layers }
}

/// y = W x + b with a manually unrolled dot product (deterministic order,
/// still fast without -ffast-math style reassociation).
fn affine_into(layer: &Layer, x: &[f64], out: &mut [f64]) {
    let inn = layer.in_dim;
    for (o, slot) in out.iter_mut().enumerate() {
        let row = &layer.weights[o * inn..(o + 1) * inn];
        let mut acc = [0.0f64; 4];
        let chunks = inn / 4;
        for c in 0..chunks {
            let i = c * 4;
            acc[0] += row[i] * x[i];
            acc[1] += row[i + 1] * x[i + 1];
            acc[2] += row[i + 2] * x[i + 2];
            acc[3] += row[i + 3] * x[i + 3];
        }
        let mut sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
        for i in chunks * 4..inn {
            sum += row[i] * x[i];
        }
        *slot = sum + layer.bias[o];
    }
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in z.iter_mut() {
        *v /= total;
    }
}

/// Full forward state kept for backpropagation.
struct Trace {
    /// Pre-activations per layer.
    pre: Vec<Vec<f64>>,
    /// Post-activation outputs per layer; the last entry is the softmax.
    act: Vec<Vec<f64>>,
}

/// Runs the network. `mask`, when given, is the inverted-dropout keep mask
/// for the first hidden layer (survivors scaled by 1/keep).
fn forward_trace(params: &MlpParams, x: &[f64], mask: Option<&[bool]>, keep: f64) -> Trace {
    let depth = params.layers.len();
    let mut pre = Vec::with_capacity(depth);
    let mut act = Vec::with_capacity(depth);
    let mut input = x;
    for (l, layer) in params.layers.iter().enumerate() {
        let mut z = vec![0.0; layer.out_dim];
        affine_into(layer, input, &mut z);
        pre.push(z.clone());
        if l + 1 == depth {
            softmax_in_place(&mut z);
        } else {
            for v in z.iter_mut() {
                *v = v.max(0.0);
            }
            if l == 0 {
                if let Some(mask) = mask {
                    for (v, &keep_it) in z.iter_mut().zip(mask) {
                        *v = if keep_it { *v / keep } else { 0.0 };
                    }
                }
            }
        }
        act.push(z);
        input = act.last().expect("just pushed");
    }
    Trace { pre, act }
}

fn check_input(params: &MlpParams, x: &[f64]) -> Result<(), MlpError> {
    if x.len() != params.input_dim() {
        return Err(MlpError::ShapeMismatch {
            expected: params.input_dim(),
            found: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(MlpError::NonFiniteInput);
    }
    Ok(())
}

/// Class probabilities for one input. In train mode each first-hidden
/// activation is dropped with probability `dropout` and survivors are scaled
/// by 1/(1-dropout); eval mode applies no dropout and no scaling.
pub fn forward<R: Rng>(
    params: &MlpParams,
    x: &[f64],
    mode: Mode,
    dropout: f64,
    rng: &mut R,
) -> Result<Vec<f64>, MlpError> {
    check_input(params, x)?;
    let trace = match mode {
        Mode::Eval => forward_trace(params, x, None, 1.0),
        Mode::Train => {
            let keep = 1.0 - dropout;
            let mask = draw_mask(params.layers[0].out_dim, dropout, rng);
            forward_trace(params, x, Some(&mask), keep)
        }
    };
    Ok(trace.act.last().expect("network has layers").clone())
}

fn draw_mask<R: Rng>(width: usize, dropout: f64, rng: &mut R) -> Vec<bool> {
    (0..width).map(|_| rng.gen::<f64>() >= dropout).collect()
}

/// Sparse categorical cross-entropy: -ln p[label], input clamped at 1e-15.
pub fn loss(probs: &[f64], label: usize) -> Result<f64, MlpError> {
    if label >= probs.len() {
        return Err(MlpError::LabelOutOfRange {
            label,
            classes: probs.len(),
        });
    }
    Ok(-probs[label].max(PROB_FLOOR).ln())
}

/// Exact gradients of the mean batch loss, using the given dropout masks
/// (one per example, same masks as the paired forward pass). Pass `None`
/// for a dropout-free pass.
pub fn backward(
    params: &MlpParams,
    batch: &[Example],
    masks: Option<&[Vec<bool>]>,
    dropout: f64,
) -> Result<Gradients, MlpError> {
    let mut grads = Gradients::zeros_like(params);
    let keep = 1.0 - dropout;
    for (i, (x, label)) in batch.iter().enumerate() {
        check_input(params, x)?;
        if *label >= params.num_classes() {
            return Err(MlpError::LabelOutOfRange {
                label: *label,
                classes: params.num_classes(),
            });
        }
        let mask = masks.map(|m| m[i].as_slice());
        let trace = forward_trace(params, x, mask, keep);
        accumulate_example(params, &trace, x, *label, mask, keep, &mut grads);
    }
    grads.scale(1.0 / batch.len().max(1) as f64);
    Ok(grads)
}

fn accumulate_example(
    params: &MlpParams,
    trace: &Trace,
    x: &[f64],
    label: usize,
    mask: Option<&[bool]>,
    keep: f64,
    grads: &mut Gradients,
) {
    let depth = params.layers.len();
    let probs = trace.act.last().expect("layers");
    let mut delta: Vec<f64> = probs.clone();
    delta[label] -= 1.0;

    for l in (0..depth).rev() {
        let layer = &params.layers[l];
        let input: &[f64] = if l == 0 { x } else { &trace.act[l - 1] };
        let (gw, gb) = &mut grads.layers[l];
        for (o, &d) in delta.iter().enumerate() {
            gb[o] += d;
            let row = &mut gw[o * layer.in_dim..(o + 1) * layer.in_dim];
            for (slot, &inp) in row.iter_mut().zip(input) {
                *slot += d * inp;
            }
        }
        if l == 0 {
            break;
        }
        let mut next = vec![0.0; layer.in_dim];
        for (o, &d) in delta.iter().enumerate() {
            let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
            for (slot, &w) in next.iter_mut().zip(row) {
                *slot += d * w;
            }
        }
        // Through the previous layer's ReLU (and dropout on layer 0).
        for (j, slot) in next.iter_mut().enumerate() {
            if trace.pre[l - 1][j] <= 0.0 {
                *slot = 0.0;
            } else if l - 1 == 0 {
                if let Some(mask) = mask {
                    *slot = if mask[j] { *slot / keep } else { 0.0 };
                }
            }
        }
        delta = next;
    }
}

/// One Adam update with bias correction; increments the step counter.
pub fn adam_step(params: &mut MlpParams, grads: &Gradients, state: &mut AdamState) {
    state.t += 1;
    let t = state.t as f64;
    let bias1 = 1.0 - state.beta1.powf(t);
    let bias2 = 1.0 - state.beta2.powf(t);
    for (l, layer) in params.layers.iter_mut().enumerate() {
        let (gw, gb) = &grads.layers[l];
        let (mw, mb) = &mut state.m.layers[l];
        let (vw, vb) = &mut state.v.layers[l];
        let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for i in 0..p.len() {
                m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
                v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                p[i] -= state.alpha * m_hat / (v_hat.sqrt() + state.eps);
            }
        };
        update(&mut layer.weights, gw, mw, vw);
        update(&mut layer.bias, gb, mb, vb);
    }
}

/// Predicted class and probabilities (eval mode).
pub fn predict(params: &MlpParams, x: &[f64]) -> Result<(usize, Vec<f64>), MlpError> {
    check_input(params, x)?;
    let trace = forward_trace(params, x, None, 1.0);
    let probs = trace.act.last().expect("layers").clone();
    let best = probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty output");
    Ok((best, probs))
}

pub fn accuracy(params: &MlpParams, data: &[Example]) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let correct = data
        .iter()
        .filter(|(x, label)| {
            predict(params, x)
                .map(|(pred, _)| pred == *label)
                .unwrap_or(false)
        })
        .count();
    correct as f64 / data.len() as f64
}

/// Row `r`, column `c` counts true-class-r examples predicted as class c.
pub fn confusion_matrix(params: &MlpParams, data: &[Example]) -> Vec<Vec<usize>> {
    let classes = params.num_classes();
    let mut matrix = vec![vec![0usize; classes]; classes];
    for (x, label) in data {
        if let Ok((pred, _)) = predict(params, x) {
            matrix[*label][pred] += 1;
        }
    }
    matrix
}

fn validate_config(cfg: &TrainConfig) -> Result<(), MlpError> {
    if cfg.epochs == 0 {
        return Err(MlpError::InvalidConfig("epochs must be >= 1".into()));
    }
    if cfg.batch_size == 0 {
        return Err(MlpError::InvalidConfig("batch size must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&cfg.dropout) {
        return Err(MlpError::InvalidConfig(
            "dropout must be in [0, 1)".into(),
        ));
    }
    if cfg.repetitions == 0 {
        return Err(MlpError::InvalidConfig("repetitions must be >= 1".into()));
    }
    Ok(())
}

/// Trains the standard architecture on labelled 9-vectors. Shuffled seeded
/// mini-batches, dropout on the first hidden layer, Adam updates. The
/// history records eval-mode accuracy after each epoch.
pub fn train(
    data: &[Example],
    test: Option<&[Example]>,
    cfg: &TrainConfig,
) -> Result<(MlpParams, TrainHistory), MlpError> {
    validate_config(cfg)?;
    let mut params = init_params(cfg.seed);
    let classes = params.num_classes();
    let mut seen = vec![false; classes];
    for (x, label) in data {
        check_input(&params, x)?;
        if *label >= classes {
            return Err(MlpError::LabelOutOfRange {
                label: *label,
                classes,
            });
        }
        seen[*label] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(MlpError::MissingClass(missing));
    }

    let mut state = AdamState::new(&params, cfg.alpha, cfg.beta1, cfg.beta2, cfg.eps);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x517c_c1b7_2722_0a95);
    let mut indices: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        indices.shuffle(&mut rng);
        for chunk in indices.chunks(cfg.batch_size) {
            let batch: Vec<Example> = chunk.iter().map(|&i| data[i].clone()).collect();
            let masks: Vec<Vec<bool>> = batch
                .iter()
                .map(|_| draw_mask(params.layers[0].out_dim, cfg.dropout, &mut rng))
                .collect();
            let grads = backward(&params, &batch, Some(&masks), cfg.dropout)?;
            adam_step(&mut params, &grads, &mut state);
        }
        history.push(EpochStats {
            train_accuracy: accuracy(&params, data),
            test_accuracy: test.map(|t| accuracy(&params, t)),
        });
    }
    debug_assert!(params.assert_finite());
    Ok((params, history))
}

/// Result of one training repetition.
pub struct Repetition {
    pub seed: u64,
    pub params: MlpParams,
    pub history: TrainHistory,
}

/// Runs `cfg.repetitions` trainings concurrently with seeds
/// `cfg.seed, cfg.seed + 1, ...`; the split stays fixed across repetitions.
pub fn train_repetitions(
    data: &[Example],
    test: Option<&[Example]>,
    cfg: &TrainConfig,
) -> Result<Vec<Repetition>, MlpError> {
    validate_config(cfg)?;
    (0..cfg.repetitions as u64)
        .into_par_iter()
        .map(|rep| {
            let rep_cfg = TrainConfig {
                seed: cfg.seed.wrapping_add(rep),
                ..*cfg
            };
            let (params, history) = train(data, test, &rep_cfg)?;
            Ok(Repetition {
                seed: rep_cfg.seed,
                params,
                history,
            })
        })
        .collect()
}

/// Converts labelled signatures to training examples.
pub fn examples_from_signatures(
    signatures: &[TopologicalSignature],
) -> Result<Vec<Example>, MlpError> {
    signatures
        .iter()
        .map(|s| {
            let label = s
                .label
                .ok_or_else(|| MlpError::UnlabelledSignature(s.video_id.clone()))?;
            Ok((s.features().to_vec(), label.class_index()))
        })
        .collect()
}

/// Compares analytic gradients against central finite differences (step
/// 1e-5) on a random subsample of at least 200 parameters, dropout disabled.
/// Entries whose perturbed forward passes land on different ReLU activation
/// patterns are resampled, per the kink-avoidance rule. Returns the maximum
/// relative error.
pub fn gradient_check(params: &MlpParams, example: &Example, seed: u64) -> Result<f64, MlpError> {
    const STEP: f64 = 1e-5;
    let batch = [example.clone()];
    let grads = backward(params, &batch, None, 0.0)?;

    let tensor_sizes: Vec<(usize, usize)> = params
        .layers
        .iter()
        .enumerate()
        .flat_map(|(l, layer)| [(l, layer.weights.len()), (l, layer.bias.len())])
        .collect();
    let total: usize = tensor_sizes.iter().map(|&(_, n)| n).sum();
    let samples = 200.min(total);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel = 0.0f64;
    let mut checked = 0;
    let mut attempts = 0;
    while checked < samples && attempts < samples * 20 {
        attempts += 1;
        let flat = rng.gen_range(0..total);
        let (layer, is_bias, offset) = locate(params, flat);

        let probe = |delta: f64| -> (f64, Vec<bool>) {
            let mut p = params.clone();
            let slot = if is_bias {
                &mut p.layers[layer].bias[offset]
            } else {
                &mut p.layers[layer].weights[offset]
            };
            *slot += delta;
            let trace = forward_trace(&p, &example.0, None, 1.0);
            let pattern: Vec<bool> = trace.pre[..trace.pre.len() - 1]
                .iter()
                .flat_map(|z| z.iter().map(|&v| v > 0.0))
                .collect();
            let l = loss(trace.act.last().expect("layers"), example.1).expect("label checked");
            (l, pattern)
        };
        let (plus, pattern_plus) = probe(STEP);
        let (minus, pattern_minus) = probe(-STEP);
        if pattern_plus != pattern_minus {
            // The step crosses a ReLU kink; the finite difference is
            // meaningless there. Try another entry.
            continue;
        }
        let numeric = (plus - minus) / (2.0 * STEP);
        let analytic = if is_bias {
            grads.layers[layer].1[offset]
        } else {
            grads.layers[layer].0[offset]
        };
        let rel = (numeric - analytic).abs() / (numeric.abs() + analytic.abs()).max(1e-8);
        max_rel = max_rel.max(rel);
        checked += 1;
    }
    Ok(max_rel)
}

/// Maps a flat parameter index to (layer, bias?, offset).
fn locate(params: &MlpParams, mut flat: usize) -> (usize, bool, usize) {
    for (l, layer) in params.layers.iter().enumerate() {
        if flat < layer.weights.len() {
            return (l, false, flat);
        }
        flat -= layer.weights.len();
        if flat < layer.bias.len() {
            return (l, true, flat);
        }
        flat -= layer.bias.len();
    }
    unreachable!("flat index within total parameter count");
}

// ---------------------------------------------------------------------------
// Model container
// ---------------------------------------------------------------------------

/// A trained model with its provenance: the training seed and configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub params: MlpParams,
    pub seed: u64,
    pub config: TrainConfig,
}

const MODEL_MAGIC: &str = "topsig-model";
const MODEL_VERSION: u32 = 1;

/// Writes the versioned text container; floats carry 17 significant digits
/// and round-trip bit-exactly.
pub fn save_model(w: &mut impl Write, model: &ModelFile) -> io::Result<()> {
    writeln!(w, "{MODEL_MAGIC} {MODEL_VERSION}")?;
    writeln!(w, "seed {}", model.seed)?;
    let sizes: Vec<String> = model.params.sizes().iter().map(|s| s.to_string()).collect();
    writeln!(w, "sizes {}", sizes.join(" "))?;
    let c = &model.config;
    writeln!(w, "base_seed {}", c.seed)?;
    writeln!(w, "epochs {}", c.epochs)?;
    writeln!(w, "batch_size {}", c.batch_size)?;
    writeln!(w, "repetitions {}", c.repetitions)?;
    writeln!(w, "dropout {:.16e}", c.dropout)?;
    writeln!(w, "alpha {:.16e}", c.alpha)?;
    writeln!(w, "beta1 {:.16e}", c.beta1)?;
    writeln!(w, "beta2 {:.16e}", c.beta2)?;
    writeln!(w, "eps {:.16e}", c.eps)?;
    for (l, layer) in model.params.layers.iter().enumerate() {
        writeln!(w, "layer {} {} {}", l, layer.in_dim, layer.out_dim)?;
        for o in 0..layer.out_dim {
            let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "w {}", cells.join(" "))?;
        }
        let cells: Vec<String> = layer.bias.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "b {}", cells.join(" "))?;
    }
    Ok(())
}

pub fn load_model(r: impl BufRead) -> Result<ModelFile, MlpError> {
    let mut lines = r.lines().enumerate();
    let mut next = || -> Result<(usize, String), MlpError> {
        lines
            .next()
            .ok_or(MlpError::ModelFormat {
                line: 0,
                msg: "unexpected end of file".into(),
            })
            .and_then(|(n, l)| Ok((n + 1, l?)))
    };
    let fail = |line: usize, msg: String| MlpError::ModelFormat { line, msg };

    let (line, header) = next()?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MODEL_MAGIC) {
        return Err(fail(line, "not a model file".into()));
    }
    let version: u32 = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| fail(line, "missing version".into()))?;
    if version != MODEL_VERSION {
        return Err(fail(line, format!("unsupported version {version}")));
    }

    fn field<T: std::str::FromStr>(
        pair: (usize, String),
        key: &str,
    ) -> Result<T, MlpError> {
        let (line, text) = pair;
        let mut parts = text.split_whitespace();
        if parts.next() != Some(key) {
            return Err(MlpError::ModelFormat {
                line,
                msg: format!("expected {key:?}, got {text:?}"),
            });
        }
        parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or(MlpError::ModelFormat {
                line,
                msg: format!("bad value for {key}"),
            })
    }

    let seed: u64 = field(next()?, "seed")?;
    let (line, sizes_line) = next()?;
    let mut parts = sizes_line.split_whitespace();
    if parts.next() != Some("sizes") {
        return Err(fail(line, "expected sizes".into()));
    }
    let sizes: Vec<usize> = parts
        .map(|t| t.parse().map_err(|_| fail(line, format!("bad size {t:?}"))))
        .collect::<Result<_, _>>()?;
    if sizes.len() < 2 {
        return Err(fail(line, "need at least two layer sizes".into()));
    }

    let config = TrainConfig {
        seed: field(next()?, "base_seed")?,
        epochs: field(next()?, "epochs")?,
        batch_size: field(next()?, "batch_size")?,
        repetitions: field(next()?, "repetitions")?,
        dropout: field(next()?, "dropout")?,
        alpha: field(next()?, "alpha")?,
        beta1: field(next()?, "beta1")?,
        beta2: field(next()?, "beta2")?,
        eps: field(next()?, "eps")?,
    };

    let mut layers = Vec::with_capacity(sizes.len() - 1);
    for l in 0..sizes.len() - 1 {
        let (line, text) = next()?;
        let expect = format!("layer {} {} {}", l, sizes[l], sizes[l + 1]);
        if text.trim() != expect {
            return Err(fail(line, format!("expected {expect:?}, got {text:?}")));
        }
        let mut weights = Vec::with_capacity(sizes[l] * sizes[l + 1]);
        for _ in 0..sizes[l + 1] {
            let (line, row) = next()?;
            let mut parts = row.split_whitespace();
            if parts.next() != Some("w") {
                return Err(fail(line, "expected weight row".into()));
            }
            let values: Vec<f64> = parts
                .map(|t| t.parse().map_err(|_| fail(line, format!("bad float {t:?}"))))
                .collect::<Result<_, _>>()?;
            if values.len() != sizes[l] {
                return Err(fail(
                    line,
                    format!("row has {} weights, expected {}", values.len(), sizes[l]),
                ));
            }
            weights.extend(values);
        }
        let (line, row) = next()?;
        let mut parts = row.split_whitespace();
        if parts.next() != Some("b") {
            return Err(fail(line, "expected bias row".into()));
        }
        let bias: Vec<f64> = parts
            .map(|t| t.parse().map_err(|_| fail(line, format!("bad float {t:?}"))))
            .collect::<Result<_, _>>()?;
        if bias.len() != sizes[l + 1] {
            return Err(fail(
                line,
                format!("bias has {} entries, expected {}", bias.len(), sizes[l + 1]),
            ));
        }
        layers.push(Layer {
            in_dim: sizes[l],
            out_dim: sizes[l + 1],
            weights,
            bias,
        });
    }

    Ok(ModelFile {
        params: MlpParams { layers },
        seed,
        config,
    })
}
