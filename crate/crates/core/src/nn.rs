//! Minimal feed-forward MLP engine: forward pass, reverse-mode gradients with
//! respect to parameters and inputs, Adam updates, and JSON checkpoints.
//!
//! ReLU between hidden layers; the output is either raw or passed through the
//! bounded map `a * (2*sigmoid(z) - 1)`, which keeps it strictly inside
//! (-a, a). The ReLU subgradient at exactly zero is taken as zero.

use std::io::{BufReader, BufWriter};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Output nonlinearity applied after the last linear layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputMap {
    Identity,
    /// `a * (2*sigmoid(z) - 1)`, output strictly in (-a, a).
    Bounded(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub layer_sizes: Vec<usize>,
    pub output_map: OutputMap,
}

impl MlpSpec {
    pub fn new(layer_sizes: Vec<usize>, output_map: OutputMap) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidArgument("need at least 2 layer sizes".into()));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidArgument("zero layer size".into()));
        }
        if let OutputMap::Bounded(a) = output_map {
            if !(a > 0.0) {
                return Err(Error::InvalidArgument("bounded map requires a > 0".into()));
            }
        }
        Ok(Self { layer_sizes, output_map })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }
}

/// Per-layer weight matrices (row-major, out x in) and bias vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpParams {
    pub fn zeros_like(spec: &MlpSpec) -> Self {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..spec.n_layers() {
            weights.push(vec![0.0; spec.layer_sizes[l] * spec.layer_sizes[l + 1]]);
            biases.push(vec![0.0; spec.layer_sizes[l + 1]]);
        }
        Self { weights, biases }
    }

    /// Global L2 norm over all weights and biases.
    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for w in &self.weights {
            for x in w {
                s += x * x;
            }
        }
        for b in &self.biases {
            for x in b {
                s += x * x;
            }
        }
        s.sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for w in &mut self.weights {
            for x in w {
                *x *= s;
            }
        }
        for b in &mut self.biases {
            for x in b {
                *x *= s;
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Self, s: f64) {
        for (w, ow) in self.weights.iter_mut().zip(&other.weights) {
            crate::util::axpy(w, s, ow);
        }
        for (b, ob) in self.biases.iter_mut().zip(&other.biases) {
            crate::util::axpy(b, s, ob);
        }
    }

    fn all_finite(&self) -> bool {
        self.weights.iter().chain(&self.biases).all(|v| v.iter().all(|x| x.is_finite()))
    }
}

/// Spec plus parameters; the unit that is trained, frozen, and checkpointed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub spec: MlpSpec,
    pub params: MlpParams,
}

/// Activations recorded by [`forward`], sufficient for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each linear layer: index 0 is the network input.
    layer_inputs: Vec<Vec<f64>>,
    /// Sigmoid values when the output map is bounded.
    sigmoid: Option<Vec<f64>>,
}

fn matvec(w: &[f64], x: &[f64], b: &[f64], out: &mut Vec<f64>) {
    let n_in = x.len();
    out.clear();
    out.extend(b.iter().enumerate().map(|(o, &bo)| {
        let row = &w[o * n_in..(o + 1) * n_in];
        bo + crate::util::dot(row, x)
    }));
}

/// Forward pass. Returns the output and a cache for [`backward`].
pub fn forward(spec: &MlpSpec, params: &MlpParams, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
    if input.len() != spec.input_dim() {
        return Err(Error::ShapeMismatch(format!(
            "input length {} != first layer size {}",
            input.len(),
            spec.input_dim()
        )));
    }
    if input.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("network input".into()));
    }
    let n_layers = spec.n_layers();
    let mut layer_inputs = Vec::with_capacity(n_layers);
    let mut x = input.to_vec();
    let mut z = Vec::new();
    for l in 0..n_layers {
        matvec(&params.weights[l], &x, &params.biases[l], &mut z);
        layer_inputs.push(std::mem::take(&mut x));
        if l + 1 < n_layers {
            x = z.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
        } else {
            x = z.clone();
        }
    }
    let mut sigmoid = None;
    if let OutputMap::Bounded(a) = spec.output_map {
        let sig: Vec<f64> = x.iter().map(|&v| 1.0 / (1.0 + (-v).exp())).collect();
        x = sig.iter().map(|&s| a * (2.0 * s - 1.0)).collect();
        sigmoid = Some(sig);
    }
    Ok((x, ForwardCache { layer_inputs, sigmoid }))
}

/// Forward pass without keeping the cache.
pub fn forward_value(spec: &MlpSpec, params: &MlpParams, input: &[f64]) -> Result<Vec<f64>> {
    forward(spec, params, input).map(|(out, _)| out)
}

/// Reverse-mode gradients of `output . output_grad` with respect to all
/// parameters and the input.
pub fn backward(
    spec: &MlpSpec,
    params: &MlpParams,
    cache: &ForwardCache,
    output_grad: &[f64],
) -> Result<(MlpParams, Vec<f64>)> {
    let mut grads = MlpParams::zeros_like(spec);
    let input_grad = backward_into(spec, params, cache, output_grad, Some(&mut grads))?;
    Ok((grads, input_grad))
}

/// Input gradient only; skips parameter-gradient accumulation. Used on frozen
/// networks where only the chain into the inputs matters.
pub fn backward_input(
    spec: &MlpSpec,
    params: &MlpParams,
    cache: &ForwardCache,
    output_grad: &[f64],
) -> Result<Vec<f64>> {
    backward_into(spec, params, cache, output_grad, None)
}

/// Backward pass accumulating parameter gradients into `acc` when given.
pub fn backward_into(
    spec: &MlpSpec,
    params: &MlpParams,
    cache: &ForwardCache,
    output_grad: &[f64],
    mut acc: Option<&mut MlpParams>,
) -> Result<Vec<f64>> {
    if output_grad.len() != spec.output_dim() {
        return Err(Error::ShapeMismatch(format!(
            "output grad length {} != output dim {}",
            output_grad.len(),
            spec.output_dim()
        )));
    }
    let n_layers = spec.n_layers();
    if cache.layer_inputs.len() != n_layers {
        return Err(Error::ShapeMismatch("cache does not match spec".into()));
    }

    // Gradient w.r.t. the last pre-activation.
    let mut g: Vec<f64> = match (&spec.output_map, &cache.sigmoid) {
        (OutputMap::Identity, _) => output_grad.to_vec(),
        (OutputMap::Bounded(a), Some(sig)) => output_grad
            .iter()
            .zip(sig)
            .map(|(&go, &s)| go * 2.0 * a * s * (1.0 - s))
            .collect(),
        (OutputMap::Bounded(_), None) => {
            return Err(Error::ShapeMismatch("cache missing sigmoid values".into()))
        }
    };

    for l in (0..n_layers).rev() {
        let x = &cache.layer_inputs[l];
        let n_in = x.len();
        if let Some(acc) = acc.as_deref_mut() {
            let gw = &mut acc.weights[l];
            for (o, &go) in g.iter().enumerate() {
                crate::util::axpy(&mut gw[o * n_in..(o + 1) * n_in], go, x);
            }
            crate::util::axpy(&mut acc.biases[l], 1.0, &g);
        }
        let mut gx = vec![0.0; n_in];
        let w = &params.weights[l];
        for (o, &go) in g.iter().enumerate() {
            crate::util::axpy(&mut gx, go, &w[o * n_in..(o + 1) * n_in]);
        }
        if l > 0 {
            // ReLU mask: the layer input above is the post-activation.
            for (gi, &xi) in gx.iter_mut().zip(x.iter()) {
                if xi <= 0.0 {
                    *gi = 0.0;
                }
            }
        }
        g = gx;
    }
    Ok(g)
}

/// Adam accumulators and hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState {
    pub m: MlpParams,
    pub v: MlpParams,
    pub t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(spec: &MlpSpec, lr: f64) -> Self {
        Self {
            m: MlpParams::zeros_like(spec),
            v: MlpParams::zeros_like(spec),
            t: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

fn adam_update_slice(
    p: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    b1: f64,
    b2: f64,
    eps: f64,
    b1t: f64,
    b2t: f64,
) {
    for i in 0..p.len() {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        let mh = m[i] / (1.0 - b1t);
        let vh = v[i] / (1.0 - b2t);
        p[i] -= lr * mh / (vh.sqrt() + eps);
    }
}

/// One Adam step with bias correction. Errors on non-finite gradients.
pub fn adam_step(params: &mut MlpParams, grads: &MlpParams, state: &mut AdamState) -> Result<()> {
    if !grads.all_finite() {
        return Err(Error::NonFinite("gradient passed to adam_step".into()));
    }
    state.t += 1;
    let b1t = state.beta1.powi(state.t as i32);
    let b2t = state.beta2.powi(state.t as i32);
    for l in 0..params.weights.len() {
        adam_update_slice(
            &mut params.weights[l],
            &grads.weights[l],
            &mut state.m.weights[l],
            &mut state.v.weights[l],
            state.lr,
            state.beta1,
            state.beta2,
            state.eps,
            b1t,
            b2t,
        );
        adam_update_slice(
            &mut params.biases[l],
            &grads.biases[l],
            &mut state.m.biases[l],
            &mut state.v.biases[l],
            state.lr,
            state.beta1,
            state.beta2,
            state.eps,
            b1t,
            b2t,
        );
    }
    Ok(())
}

/// He-style uniform initialization: weights from U(-sqrt(6/fan_in),
/// +sqrt(6/fan_in)), biases zero. Deterministic under the seed.
pub fn init_params(spec: &MlpSpec, seed: u64) -> MlpParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = MlpParams::zeros_like(spec);
    for l in 0..spec.n_layers() {
        let fan_in = spec.layer_sizes[l] as f64;
        let bound = (6.0 / fan_in).sqrt();
        for w in &mut params.weights[l] {
            *w = rng.gen_range(-bound..bound);
        }
    }
    params
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format_version: u32,
    spec: MlpSpec,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl Mlp {
    pub fn init(spec: MlpSpec, seed: u64) -> Self {
        let params = init_params(&spec, seed);
        Self { spec, params }
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        forward(&self.spec, &self.params, input)
    }

    pub fn forward_value(&self, input: &[f64]) -> Result<Vec<f64>> {
        forward_value(&self.spec, &self.params, input)
    }

    /// Save as JSON; f64 round-trips exactly, so a reload reproduces
    /// bit-identical forward outputs.
    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let ckpt = Checkpoint {
            format_version: 1,
            spec: self.spec.clone(),
            weights: self.params.weights.clone(),
            biases: self.params.biases.clone(),
        };
        serde_json::to_writer(BufWriter::new(f), &ckpt)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        let ckpt: Checkpoint = serde_json::from_reader(BufReader::new(f))?;
        if ckpt.format_version != 1 {
            return Err(Error::InvalidArgument(format!(
                "unsupported checkpoint format_version {}",
                ckpt.format_version
            )));
        }
        let spec = MlpSpec::new(ckpt.spec.layer_sizes, ckpt.spec.output_map)?;
        let params = MlpParams { weights: ckpt.weights, biases: ckpt.biases };
        // Shape check against the spec.
        let zeros = MlpParams::zeros_like(&spec);
        for l in 0..spec.n_layers() {
            if params.weights[l].len() != zeros.weights[l].len()
                || params.biases[l].len() != zeros.biases[l].len()
            {
                return Err(Error::ShapeMismatch(format!("checkpoint layer {l}")));
            }
        }
        Ok(Self { spec, params })
    }
}
