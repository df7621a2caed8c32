use super::NnError;
use crate::rng::Rng;

/// Output nonlinearity; hidden layers are always ReLU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Tanh,
}

/// Fully connected network. Layer `l` maps `layer_sizes[l]` inputs to
/// `layer_sizes[l+1]` outputs with row-major weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layer_sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    output_activation: Activation,
}

/// Per-parameter partials, same shapes as the network.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Mlp {
    /// Weights start uniform in `±1/sqrt(fan_in)`, biases at zero.
    pub fn new(layer_sizes: &[usize], output_activation: Activation, seed: u64) -> Result<Self, NnError> {
        if layer_sizes.len() < 2 {
            return Err(NnError::Parameter(format!(
                "need at least an input and an output layer, got {layer_sizes:?}"
            )));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(NnError::Parameter(format!("layer sizes must be > 0, got {layer_sizes:?}")));
        }
        let mut rng = Rng::new(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..layer_sizes.len() - 1 {
            let fan_in = layer_sizes[l];
            let fan_out = layer_sizes[l + 1];
            let bound = 1.0 / (fan_in as f64).sqrt();
            let w: Vec<f64> = (0..fan_in * fan_out).map(|_| rng.uniform(-bound, bound)).collect();
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Ok(Mlp { layer_sizes: layer_sizes.to_vec(), weights, biases, output_activation })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn output_activation(&self) -> Activation {
        self.output_activation
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Per-layer weights and biases, row-major.
    pub fn params(&self) -> (&[Vec<f64>], &[Vec<f64>]) {
        (&self.weights, &self.biases)
    }

    pub(crate) fn params_mut(&mut self) -> (&mut [Vec<f64>], &mut [Vec<f64>]) {
        (&mut self.weights, &mut self.biases)
    }

    /// Build a network from explicit parameters (weights row-major per
    /// layer), validating all shapes.
    pub fn from_params(
        layer_sizes: &[usize],
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
        output_activation: Activation,
    ) -> Result<Self, NnError> {
        if layer_sizes.len() < 2 || layer_sizes.iter().any(|&s| s == 0) {
            return Err(NnError::Parameter(format!("invalid layer sizes {layer_sizes:?}")));
        }
        let n_layers = layer_sizes.len() - 1;
        if weights.len() != n_layers || biases.len() != n_layers {
            return Err(NnError::Shape(format!(
                "expected {n_layers} weight/bias layers, got {}/{}",
                weights.len(),
                biases.len()
            )));
        }
        for l in 0..n_layers {
            if weights[l].len() != layer_sizes[l] * layer_sizes[l + 1]
                || biases[l].len() != layer_sizes[l + 1]
            {
                return Err(NnError::Shape(format!("layer {l} parameter shapes do not match")));
            }
        }
        Ok(Mlp { layer_sizes: layer_sizes.to_vec(), weights, biases, output_activation })
    }

    pub(crate) fn from_parts(
        layer_sizes: Vec<usize>,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
        output_activation: Activation,
    ) -> Self {
        Mlp { layer_sizes, weights, biases, output_activation }
    }

    fn check_input(&self, x: &[f64]) -> Result<(), NnError> {
        if x.len() != self.input_size() {
            return Err(NnError::Shape(format!(
                "input length {} does not match network input {}",
                x.len(),
                self.input_size()
            )));
        }
        Ok(())
    }

    /// Pure forward pass.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        self.check_input(x)?;
        let (activations, _) = self.forward_trace(x);
        Ok(activations.into_iter().last().unwrap())
    }

    /// Forward pass keeping per-layer activations and pre-activations.
    fn forward_trace(&self, x: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let n_layers = self.weights.len();
        let mut activations = Vec::with_capacity(n_layers + 1);
        let mut preacts = Vec::with_capacity(n_layers);
        activations.push(x.to_vec());
        for l in 0..n_layers {
            let fan_in = self.layer_sizes[l];
            let fan_out = self.layer_sizes[l + 1];
            let a_prev = &activations[l];
            let mut z = self.biases[l].clone();
            for o in 0..fan_out {
                let row = &self.weights[l][o * fan_in..(o + 1) * fan_in];
                let mut acc = 0.0;
                for (w, a) in row.iter().zip(a_prev.iter()) {
                    acc += w * a;
                }
                z[o] += acc;
            }
            let a = if l + 1 == n_layers {
                match self.output_activation {
                    Activation::Identity => z.clone(),
                    Activation::Tanh => z.iter().map(|v| v.tanh()).collect(),
                }
            } else {
                z.iter().map(|v| v.max(0.0)).collect()
            };
            preacts.push(z);
            activations.push(a);
        }
        (activations, preacts)
    }

    /// Reverse-mode pass: exact partials for every parameter plus the
    /// gradient with respect to the input vector. `upstream` is dL/dy.
    pub fn backward(&self, x: &[f64], upstream: &[f64]) -> Result<(Gradients, Vec<f64>), NnError> {
        self.check_input(x)?;
        if upstream.len() != self.output_size() {
            return Err(NnError::Shape(format!(
                "upstream length {} does not match network output {}",
                upstream.len(),
                self.output_size()
            )));
        }
        let (activations, preacts) = self.forward_trace(x);
        let n_layers = self.weights.len();

        let mut grads = Gradients::zeros_like(self);
        // Output layer delta through the output nonlinearity.
        let mut delta: Vec<f64> = match self.output_activation {
            Activation::Identity => upstream.to_vec(),
            Activation::Tanh => upstream
                .iter()
                .zip(preacts[n_layers - 1].iter())
                .map(|(u, z)| {
                    let t = z.tanh();
                    u * (1.0 - t * t)
                })
                .collect(),
        };

        for l in (0..n_layers).rev() {
            let fan_in = self.layer_sizes[l];
            let fan_out = self.layer_sizes[l + 1];
            let a_prev = &activations[l];
            for o in 0..fan_out {
                let d = delta[o];
                grads.biases[l][o] = d;
                let row = &mut grads.weights[l][o * fan_in..(o + 1) * fan_in];
                for (g, a) in row.iter_mut().zip(a_prev.iter()) {
                    *g = d * a;
                }
            }
            // Propagate into the previous activation.
            let mut prev = vec![0.0; fan_in];
            for o in 0..fan_out {
                let d = delta[o];
                let row = &self.weights[l][o * fan_in..(o + 1) * fan_in];
                for (p, w) in prev.iter_mut().zip(row.iter()) {
                    *p += d * w;
                }
            }
            if l > 0 {
                // Through the ReLU of layer l-1. relu'(0) is taken as 0.
                for (p, z) in prev.iter_mut().zip(preacts[l - 1].iter()) {
                    if *z <= 0.0 {
                        *p = 0.0;
                    }
                }
            }
            delta = prev;
        }
        Ok((grads, delta))
    }
}

impl Gradients {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        Gradients {
            weights: mlp.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: mlp.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (dst, src) in self.weights.iter_mut().zip(other.weights.iter()) {
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d += scale * s;
            }
        }
        for (dst, src) in self.biases.iter_mut().zip(other.biases.iter()) {
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d += scale * s;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for w in &mut self.weights {
            for v in w.iter_mut() {
                *v *= s;
            }
        }
        for b in &mut self.biases {
            for v in b.iter_mut() {
                *v *= s;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(self.biases.iter()).all(|v| v.iter().all(|x| x.is_finite()))
    }

    fn matches(&self, mlp: &Mlp) -> bool {
        self.weights.len() == mlp.weights.len()
            && self.biases.len() == mlp.biases.len()
            && self.weights.iter().zip(mlp.weights.iter()).all(|(a, b)| a.len() == b.len())
            && self.biases.iter().zip(mlp.biases.iter()).all(|(a, b)| a.len() == b.len())
    }
}

/// Adam optimizer state, one moment pair per parameter.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step_count: u64,
    m_w: Vec<Vec<f64>>,
    v_w: Vec<Vec<f64>>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(mlp: &Mlp, lr: f64) -> Self {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step_count: 0,
            m_w: mlp.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            v_w: mlp.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            m_b: mlp.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            v_b: mlp.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }
}

/// One bias-corrected Adam step descending along `grads`.
pub fn adam_step(opt: &mut AdamState, mlp: &mut Mlp, grads: &Gradients) -> Result<(), NnError> {
    if !grads.matches(mlp) {
        return Err(NnError::Shape("gradient shapes do not match the network".into()));
    }
    opt.step_count += 1;
    let t = opt.step_count as i32;
    let bc1 = 1.0 - opt.beta1.powi(t);
    let bc2 = 1.0 - opt.beta2.powi(t);

    let update = |param: &mut [f64], grad: &[f64], m: &mut [f64], v: &mut [f64]| {
        for i in 0..param.len() {
            let g = grad[i];
            m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g;
            v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g * g;
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            param[i] -= opt.lr * m_hat / (v_hat.sqrt() + opt.eps);
        }
    };
    for l in 0..mlp.weights.len() {
        update(&mut mlp.weights[l], &grads.weights[l], &mut opt.m_w[l], &mut opt.v_w[l]);
        update(&mut mlp.biases[l], &grads.biases[l], &mut opt.m_b[l], &mut opt.v_b[l]);
    }
    Ok(())
}

/// Polyak blend `target <- tau * source + (1 - tau) * target`.
pub fn soft_update(target: &mut Mlp, source: &Mlp, tau: f64) -> Result<(), NnError> {
    if target.layer_sizes != source.layer_sizes
        || target.output_activation != source.output_activation
    {
        return Err(NnError::Shape(format!(
            "architectures differ: {:?} vs {:?}",
            target.layer_sizes, source.layer_sizes
        )));
    }
    if tau == 1.0 {
        target.weights = source.weights.clone();
        target.biases = source.biases.clone();
        return Ok(());
    }
    for (tw, sw) in target.weights.iter_mut().zip(source.weights.iter()) {
        for (t, s) in tw.iter_mut().zip(sw.iter()) {
            *t = tau * s + (1.0 - tau) * *t;
        }
    }
    for (tb, sb) in target.biases.iter_mut().zip(source.biases.iter()) {
        for (t, s) in tb.iter_mut().zip(sb.iter()) {
            *t = tau * s + (1.0 - tau) * *t;
        }
    }
    Ok(())
}
