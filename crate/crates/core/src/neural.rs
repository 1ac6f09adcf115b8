//! Fully connected value-to-go regressor.
//!
//! The network reads a partial assignment as an `m × n` binary matrix
//! (row = alternative, column = element) followed by the standardized
//! current value `V(S)`, passes it through three ReLU layers of width
//! `mn + 1`, and emits one affine output: the standardized estimate of
//! `V*(S)`. Training minimizes the mean squared error between standardized
//! targets and outputs with Adam.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use crate::binio;
use crate::dataset::LabeledPair;
use crate::domain::{value_of, PartialAssignment, ValueTable};
use crate::error::{Error, Result};
use crate::seeds;

pub const HIDDEN_LAYERS: usize = 3;

/// Affine standardization constants: `z = (x − mean) / std`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norm {
    pub mean: f64,
    pub std: f64,
}

impl Norm {
    pub const IDENTITY: Norm = Norm { mean: 0.0, std: 1.0 };

    /// Mean and population standard deviation of `values`; a degenerate
    /// spread falls back to `std = 1`.
    pub fn fit(values: impl IntoIterator<Item = f64>) -> Norm {
        let values: Vec<f64> = values.into_iter().collect();
        if values.is_empty() {
            return Norm::IDENTITY;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        Norm {
            mean,
            std: if std > 1e-12 { std } else { 1.0 },
        }
    }

    #[inline]
    pub fn standardize(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    #[inline]
    pub fn destandardize(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

/// Dense layer, `rows` outputs by `cols` inputs, weights row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            weights: vec![0.0; rows * cols],
            biases: vec![0.0; rows],
        }
    }

    /// Zero-mean Gaussian weights with std `sqrt(2 / cols)`, zero biases.
    pub fn he<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let scale = (2.0 / cols as f64).sqrt();
        let weights = (0..rows * cols)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                scale * z
            })
            .collect::<Vec<f64>>();
        Self {
            rows,
            cols,
            weights,
            biases: vec![0.0; rows],
        }
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    /// `out = W x + b`, skipping zero inputs.
    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        let nz: Vec<usize> = (0..self.cols).filter(|&j| x[j] != 0.0).collect();
        out.clear();
        out.extend((0..self.rows).map(|r| {
            let row = &self.weights[r * self.cols..(r + 1) * self.cols];
            self.biases[r] + nz.iter().map(|&j| row[j] * x[j]).sum::<f64>()
        }));
    }
}

/// Stack of dense layers; ReLU between layers, affine output.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
}

/// Flat gradient in parameter order: per layer, weights then biases.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient(pub Vec<f64>);

impl Mlp {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::usage("network needs at least one layer"));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weights.len() != l.rows * l.cols || l.biases.len() != l.rows {
                return Err(Error::usage(format!("layer {i} has inconsistent shapes")));
            }
            if i > 0 && layers[i - 1].rows != l.cols {
                return Err(Error::usage(format!(
                    "layer {i} expects {} inputs, previous layer emits {}",
                    l.cols,
                    layers[i - 1].rows
                )));
            }
            if l.weights.iter().chain(&l.biases).any(|p| !p.is_finite()) {
                return Err(Error::usage(format!("layer {i} has non-finite parameters")));
            }
        }
        if layers.last().unwrap().rows != 1 {
            return Err(Error::usage("output layer must have a single unit"));
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].cols
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.input_len(), "input length mismatch");
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            l.apply(&cur, &mut next);
            if i < last {
                next.iter_mut().for_each(|z| *z = z.max(0.0));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur[0]
    }

    /// Mean squared error over row-major `inputs` against `targets`.
    pub fn mse(&self, inputs: &[f64], targets: &[f64]) -> f64 {
        let d = self.input_len();
        let total: f64 = inputs
            .chunks_exact(d)
            .zip(targets)
            .map(|(x, t)| (self.forward(x) - t).powi(2))
            .sum();
        total / targets.len() as f64
    }

    /// Exact gradient of `mse` by backpropagation. The ReLU derivative at 0
    /// is taken as 0.
    pub fn mse_gradient(&self, inputs: &[f64], targets: &[f64]) -> Gradient {
        let d = self.input_len();
        let batch = targets.len() as f64;
        let mut grad = vec![0.0; self.param_count()];
        let offsets: Vec<usize> = self
            .layers
            .iter()
            .scan(0, |acc, l| {
                let start = *acc;
                *acc += l.param_count();
                Some(start)
            })
            .collect();

        let last = self.layers.len() - 1;
        // activations[i] is the input to layer i; pre[i] its pre-activation
        let mut activations: Vec<Vec<f64>> = vec![Vec::new(); self.layers.len()];
        let mut pre: Vec<Vec<f64>> = vec![Vec::new(); self.layers.len()];
        for (x, &t) in inputs.chunks_exact(d).zip(targets) {
            activations[0].clear();
            activations[0].extend_from_slice(x);
            for (i, l) in self.layers.iter().enumerate() {
                let mut z = Vec::new();
                l.apply(&activations[i], &mut z);
                if i < last {
                    activations[i + 1] = z.iter().map(|v| v.max(0.0)).collect();
                }
                pre[i] = z;
            }
            let out = pre[last][0];
            let mut delta = vec![2.0 * (out - t) / batch];
            for i in (0..=last).rev() {
                let l = &self.layers[i];
                let a = &activations[i];
                let (wg, bg) = grad[offsets[i]..offsets[i] + l.param_count()].split_at_mut(l.weights.len());
                for (r, &dr) in delta.iter().enumerate() {
                    if dr == 0.0 {
                        continue;
                    }
                    bg[r] += dr;
                    let row = &mut wg[r * l.cols..(r + 1) * l.cols];
                    for (g, &aj) in row.iter_mut().zip(a) {
                        *g += dr * aj;
                    }
                }
                if i > 0 {
                    let zprev = &pre[i - 1];
                    let mut back = vec![0.0; l.cols];
                    for (r, &dr) in delta.iter().enumerate() {
                        if dr == 0.0 {
                            continue;
                        }
                        let row = &l.weights[r * l.cols..(r + 1) * l.cols];
                        for (b, &w) in back.iter_mut().zip(row) {
                            *b += w * dr;
                        }
                    }
                    for (b, &z) in back.iter_mut().zip(zprev) {
                        if z <= 0.0 {
                            *b = 0.0;
                        }
                    }
                    delta = back;
                }
            }
        }
        Gradient(grad)
    }
}

/// Hyperparameters for one training run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 64,
            epochs: 200,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::usage(format!("learning rate {} must be >= 0", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::usage("batch size must be positive"));
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(Error::usage("adam betas must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Adam moment estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: usize) -> Self {
        Self {
            first: vec![0.0; params],
            second: vec![0.0; params],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update of `net` in place.
pub fn adam_step(net: &mut Mlp, grad: &Gradient, state: &mut AdamState, cfg: &TrainConfig) -> Result<()> {
    let count = net.param_count();
    if grad.0.len() != count || state.first.len() != count || state.second.len() != count {
        return Err(Error::usage("adam state/gradient do not match the network"));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for (((p, &g), m), v) in net
        .params_mut()
        .zip(&grad.0)
        .zip(state.first.iter_mut())
        .zip(state.second.iter_mut())
    {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
    Ok(())
}

/// Trained value-to-go model for an `n`-element, `m`-alternative problem.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel {
    n: usize,
    m: usize,
    net: Mlp,
    /// Standardization of the `V(S)` input feature.
    pub value_norm: Norm,
    /// Standardization of the `V*(S)` target.
    pub target_norm: Norm,
}

impl MlpModel {
    /// Widths `[mn+1; 4]` then `1`: input, three hidden layers, output.
    pub fn widths(n: usize, m: usize) -> Vec<usize> {
        let w = n * m + 1;
        let mut widths = vec![w; HIDDEN_LAYERS + 1];
        widths.push(1);
        widths
    }

    /// He-initialized model with identity normalization.
    pub fn init(n: usize, m: usize, seed: u64) -> Self {
        let widths = Self::widths(n, m);
        let mut rng = seeds::rng(seed);
        let layers = widths
            .windows(2)
            .map(|w| Layer::he(w[1], w[0], &mut rng))
            .collect();
        Self {
            n,
            m,
            net: Mlp { layers },
            value_norm: Norm::IDENTITY,
            target_norm: Norm::IDENTITY,
        }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        let widths = Self::widths(n, m);
        let layers = widths.windows(2).map(|w| Layer::zeros(w[1], w[0])).collect();
        Self {
            n,
            m,
            net: Mlp { layers },
            value_norm: Norm::IDENTITY,
            target_norm: Norm::IDENTITY,
        }
    }

    pub fn from_parts(n: usize, m: usize, net: Mlp, value_norm: Norm, target_norm: Norm) -> Result<Self> {
        if net.input_len() != n * m + 1 {
            return Err(Error::usage(format!(
                "network takes {} inputs, expected {}",
                net.input_len(),
                n * m + 1
            )));
        }
        for norm in [value_norm, target_norm] {
            if !(norm.mean.is_finite() && norm.std.is_finite() && norm.std > 0.0) {
                return Err(Error::usage("normalization constants must be finite, std > 0"));
            }
        }
        Ok(Self {
            n,
            m,
            net,
            value_norm,
            target_norm,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut Mlp {
        &mut self.net
    }

    fn encode_pairs(&self, pairs: &[LabeledPair]) -> (Vec<f64>, Vec<f64>) {
        let mut inputs = Vec::with_capacity(pairs.len() * (self.n * self.m + 1));
        let mut targets = Vec::with_capacity(pairs.len());
        for p in pairs {
            inputs.extend(encode_input(&p.assignment, p.current_value, &self.value_norm));
            targets.push(self.target_norm.standardize(p.target));
        }
        (inputs, targets)
    }

    fn check_batch(&self, batch: &[LabeledPair]) -> Result<()> {
        if batch.is_empty() {
            return Err(Error::usage("empty batch"));
        }
        if let Some(p) = batch
            .iter()
            .find(|p| p.assignment.n() != self.n || p.assignment.m() != self.m)
        {
            return Err(Error::usage(format!(
                "pair of size {}x{} does not fit a {}x{} model",
                p.assignment.n(),
                p.assignment.m(),
                self.n,
                self.m
            )));
        }
        Ok(())
    }
}

/// `m × n` assignment matrix (row-major, row = alternative) followed by the
/// standardized current value.
pub fn encode_input(s: &PartialAssignment, current_value: f64, norm: &Norm) -> Vec<f64> {
    let (n, m) = (s.n(), s.m());
    let mut x = vec![0.0; n * m + 1];
    for (j, &l) in s.raw_labels().iter().enumerate() {
        if (l as usize) < m {
            x[l as usize * n + j] = 1.0;
        }
    }
    x[n * m] = norm.standardize(current_value);
    x
}

/// Model output for an encoded input, in value units.
pub fn forward(model: &MlpModel, input: &[f64]) -> f64 {
    model.target_norm.destandardize(model.net.forward(input))
}

/// Mean squared error between standardized targets and standardized outputs.
pub fn loss(model: &MlpModel, batch: &[LabeledPair]) -> Result<f64> {
    model.check_batch(batch)?;
    let (x, t) = model.encode_pairs(batch);
    Ok(model.net.mse(&x, &t))
}

/// Gradient of [`loss`] with respect to every weight and bias.
pub fn backward(model: &MlpModel, batch: &[LabeledPair]) -> Result<Gradient> {
    model.check_batch(batch)?;
    let (x, t) = model.encode_pairs(batch);
    Ok(model.net.mse_gradient(&x, &t))
}

/// Estimate of `V*(S)` for use as a search heuristic.
pub fn predict_value_to_go(model: &MlpModel, s: &PartialAssignment, v: &ValueTable) -> Result<f64> {
    if model.n != v.n() || model.m != v.m() {
        return Err(Error::usage(format!(
            "model is {}x{} but table is {}x{}",
            model.n,
            model.m,
            v.n(),
            v.m()
        )));
    }
    let current = value_of(s, v)?;
    Ok(forward(model, &encode_input(s, current, &model.value_norm)))
}

/// Anything that can estimate the value-to-go of a partial assignment.
pub trait ValuePredictor {
    fn predict(&self, s: &PartialAssignment, v: &ValueTable) -> Result<f64>;
}

impl ValuePredictor for MlpModel {
    fn predict(&self, s: &PartialAssignment, v: &ValueTable) -> Result<f64> {
        predict_value_to_go(self, s, v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_loss: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: MlpModel,
    /// Epoch 0 is the initialized model, before any update.
    pub trace: Vec<EpochLoss>,
}

impl TrainOutcome {
    pub fn final_test_loss(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |e| e.test_loss)
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,test_loss\n");
        for e in &self.trace {
            out.push_str(&format!("{},{},{}\n", e.epoch, e.train_loss, e.test_loss));
        }
        out
    }
}

fn dims_of(pairs: &[LabeledPair]) -> Result<(usize, usize)> {
    let first = pairs.first().ok_or_else(|| Error::usage("empty training set"))?;
    Ok((first.assignment.n(), first.assignment.m()))
}

/// Train a fresh model on `train`, tracking train and test loss per epoch.
///
/// Normalization constants come from the training set. Initialization and
/// per-epoch shuffling use separate streams of `cfg.seed`.
pub fn train(train: &[LabeledPair], test: &[LabeledPair], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let (n, m) = dims_of(train)?;
    if test.is_empty() {
        return Err(Error::usage("empty test set"));
    }
    let mut model = MlpModel::init(n, m, seeds::derive(cfg.seed, "init"));
    model.value_norm = Norm::fit(train.iter().map(|p| p.current_value));
    model.target_norm = Norm::fit(train.iter().map(|p| p.target));
    model.check_batch(train)?;
    model.check_batch(test)?;

    let d = n * m + 1;
    let (train_x, train_t) = model.encode_pairs(train);
    let (test_x, test_t) = model.encode_pairs(test);
    let mut shuffle_rng = seeds::rng(seeds::derive(cfg.seed, "shuffle"));
    let mut state = AdamState::new(model.net.param_count());
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut batch_x = Vec::with_capacity(cfg.batch_size * d);
    let mut batch_t = Vec::with_capacity(cfg.batch_size);

    let mut trace = vec![EpochLoss {
        epoch: 0,
        train_loss: model.net.mse(&train_x, &train_t),
        test_loss: model.net.mse(&test_x, &test_t),
    }];
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        for chunk in order.chunks(cfg.batch_size) {
            batch_x.clear();
            batch_t.clear();
            for &i in chunk {
                batch_x.extend_from_slice(&train_x[i * d..(i + 1) * d]);
                batch_t.push(train_t[i]);
            }
            let grad = model.net.mse_gradient(&batch_x, &batch_t);
            adam_step(&mut model.net, &grad, &mut state, cfg)?;
        }
        trace.push(EpochLoss {
            epoch,
            train_loss: model.net.mse(&train_x, &train_t),
            test_loss: model.net.mse(&test_x, &test_t),
        });
    }
    Ok(TrainOutcome { model, trace })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridCell {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub test_loss: f64,
}

#[derive(Clone, Debug)]
pub struct GridOutcome {
    pub best: TrainConfig,
    pub outcome: TrainOutcome,
    pub cells: Vec<GridCell>,
}

pub const DEFAULT_LR_GRID: [f64; 4] = [1e-4, 3e-4, 1e-3, 3e-3];
pub const DEFAULT_BATCH_GRID: [usize; 3] = [32, 64, 128];

/// Train one model per `(learning rate, batch size)` cell and keep the one
/// with the lowest final test loss; ties go to the earlier cell
/// (learning rates outer, batch sizes inner).
pub fn grid_search(
    train_set: &[LabeledPair],
    test_set: &[LabeledPair],
    learning_rates: &[f64],
    batch_sizes: &[usize],
    base: &TrainConfig,
) -> Result<GridOutcome> {
    if learning_rates.is_empty() || batch_sizes.is_empty() {
        return Err(Error::usage("grid search needs non-empty grids"));
    }
    let mut cells = Vec::new();
    let mut best: Option<(TrainConfig, TrainOutcome)> = None;
    for &lr in learning_rates {
        for &bs in batch_sizes {
            let cfg = TrainConfig {
                learning_rate: lr,
                batch_size: bs,
                ..*base
            };
            let outcome = train(train_set, test_set, &cfg)?;
            let test_loss = outcome.final_test_loss();
            cells.push(GridCell {
                learning_rate: lr,
                batch_size: bs,
                test_loss,
            });
            let better = match &best {
                None => true,
                Some((_, b)) => test_loss < b.final_test_loss(),
            };
            if better {
                best = Some((cfg, outcome));
            }
        }
    }
    let (best, outcome) = best.expect("non-empty grid");
    Ok(GridOutcome {
        best,
        outcome,
        cells,
    })
}

const MODEL_MAGIC: &[u8; 4] = b"UCAM";
const MODEL_VERSION: u8 = 1;
const MODEL_KIND: &str = "model";

impl MlpModel {
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        binio::write_header(w, MODEL_MAGIC, MODEL_VERSION)?;
        w.write_all(&(self.n as u32).to_le_bytes())?;
        w.write_all(&(self.m as u32).to_le_bytes())?;
        binio::write_f64s(
            w,
            &[
                self.value_norm.mean,
                self.value_norm.std,
                self.target_norm.mean,
                self.target_norm.std,
            ],
        )?;
        for l in &self.net.layers {
            w.write_all(&(l.rows as u32).to_le_bytes())?;
            w.write_all(&(l.cols as u32).to_le_bytes())?;
            binio::write_f64s(w, &l.weights)?;
            binio::write_f64s(w, &l.biases)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        binio::read_header(r, MODEL_KIND, MODEL_MAGIC, MODEL_VERSION)?;
        let n = binio::read_u32(r, MODEL_KIND)? as usize;
        let m = binio::read_u32(r, MODEL_KIND)? as usize;
        let norms = binio::read_f64s(r, MODEL_KIND, 4)?;
        let mut layers = Vec::new();
        loop {
            let mut first = [0u8; 1];
            if r.read(&mut first)? == 0 {
                break;
            }
            let mut rest = [0u8; 3];
            binio::read_exact(r, MODEL_KIND, &mut rest)?;
            let rows = u32::from_le_bytes([first[0], rest[0], rest[1], rest[2]]) as usize;
            let cols = binio::read_u32(r, MODEL_KIND)? as usize;
            if rows.saturating_mul(cols) > 1 << 28 {
                return Err(Error::format(MODEL_KIND, "layer too large"));
            }
            let weights = binio::read_f64s(r, MODEL_KIND, rows * cols)?;
            let biases = binio::read_f64s(r, MODEL_KIND, rows)?;
            layers.push(Layer {
                rows,
                cols,
                weights,
                biases,
            });
        }
        let net = Mlp::new(layers).map_err(|e| Error::format(MODEL_KIND, e.to_string()))?;
        MlpModel::from_parts(
            n,
            m,
            net,
            Norm {
                mean: norms[0],
                std: norms[1],
            },
            Norm {
                mean: norms[2],
                std: norms[3],
            },
        )
        .map_err(|e| Error::format(MODEL_KIND, e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}
