//! Fully connected ReLU networks.
//!
//! The network maps a feature vector to one raw logit per class. There is
//! deliberately no softmax layer: training losses act on logits, and
//! evaluation applies softmax separately when it needs probabilities.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

/// Network shape: input width, hidden widths in order, class count.
///
/// `hidden` may be empty, giving a bare linear model. All widths must be
/// positive and `classes >= 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    input_dim: usize,
    hidden: Vec<usize>,
    classes: usize,
}

impl Architecture {
    pub fn new(input_dim: usize, hidden: Vec<usize>, classes: usize) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidArgument("input_dim must be positive".into()));
        }
        if classes < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least two classes, got {classes}"
            )));
        }
        if let Some(pos) = hidden.iter().position(|w| *w == 0) {
            return Err(Error::InvalidArgument(format!(
                "hidden layer {pos} has width zero"
            )));
        }
        Ok(Architecture {
            input_dim,
            hidden,
            classes,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// `(fan_in, fan_out)` of every affine layer, first to last.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let widths: Vec<usize> = std::iter::once(self.input_dim)
            .chain(self.hidden.iter().copied())
            .chain(std::iter::once(self.classes))
            .collect();
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// One affine layer: `weight` is `fan_out x fan_in`. Also doubles as the
/// per-layer gradient container, since gradients share the shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

/// Per-layer gradients in the same order and shapes as the parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

/// Everything the backward pass needs from a forward pass: the input to
/// each affine layer (post-ReLU for hidden layers) and the final logits.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// `activations[l]` is the input to layer `l`; `activations[0]` is the
    /// network input.
    activations: Vec<Vec<f64>>,
    pub logits: Vec<f64>,
}

/// The weights and biases of a network, tied to an [`Architecture`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParameters {
    arch: Architecture,
    layers: Vec<Layer>,
}

impl MlpParameters {
    /// All-zero parameters, mostly useful in tests.
    pub fn zeros(arch: &Architecture) -> Self {
        let layers = arch
            .layer_dims()
            .iter()
            .map(|&(fan_in, fan_out)| Layer {
                weight: Matrix::zeros(fan_out, fan_in),
                bias: vec![0.0; fan_out],
            })
            .collect();
        MlpParameters {
            arch: arch.clone(),
            layers,
        }
    }

    /// Random initialization: weights uniform in
    /// `(-sqrt(6/fan_in), sqrt(6/fan_in))`, biases zero.
    ///
    /// Draw order is fixed: layers first to last, weights row-major, one
    /// uniform draw per weight. Biases consume no draws. Two calls with
    /// equal seeds therefore produce identical parameters.
    pub fn init(arch: &Architecture, rng: &mut Rng) -> Self {
        let mut params = Self::zeros(arch);
        for layer in &mut params.layers {
            let bound = (6.0 / layer.weight.cols() as f64).sqrt();
            for w in layer.weight.as_mut_slice() {
                *w = rng.uniform(-bound, bound);
            }
        }
        params
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Mutable layer access for tests and hand-built models. Callers must
    /// keep the shapes intact.
    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    /// Runs the network on one sample, keeping what backprop needs.
    /// Panics unless `x.len()` matches the architecture's input width.
    pub fn forward(&self, x: &[f64]) -> ForwardPass {
        assert!(
            x.len() == self.arch.input_dim,
            "input has {} features, network expects {}",
            x.len(),
            self.arch.input_dim
        );
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        activations.push(x.to_vec());
        for layer in &self.layers[..self.layers.len() - 1] {
            let mut z = layer.weight.matvec(activations.last().expect("nonempty"));
            for (zi, b) in z.iter_mut().zip(&layer.bias) {
                *zi += b;
                if *zi < 0.0 {
                    *zi = 0.0;
                }
            }
            activations.push(z);
        }
        let last = self.layers.last().expect("at least one layer");
        let mut logits = last.weight.matvec(activations.last().expect("nonempty"));
        for (l, b) in logits.iter_mut().zip(&last.bias) {
            *l += b;
        }
        ForwardPass { activations, logits }
    }

    /// Convenience wrapper that discards the cache.
    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.forward(x).logits
    }

    /// Backpropagates a logit cotangent through the cached pass, returning
    /// gradients for every layer.
    ///
    /// The ReLU derivative at exactly zero is taken as zero: a unit whose
    /// cached activation is zero passes no gradient. Panics if the cache
    /// does not fit these parameters.
    pub fn backward(&self, pass: &ForwardPass, grad_logits: &[f64]) -> Gradients {
        assert!(
            pass.activations.len() == self.layers.len(),
            "forward cache has {} layer inputs, network has {} layers",
            pass.activations.len(),
            self.layers.len()
        );
        assert!(
            grad_logits.len() == self.arch.classes,
            "cotangent has length {}, network has {} classes",
            grad_logits.len(),
            self.arch.classes
        );
        for (l, (a, layer)) in pass.activations.iter().zip(&self.layers).enumerate() {
            assert!(
                a.len() == layer.weight.cols(),
                "cached activation {l} has length {}, layer expects {}",
                a.len(),
                layer.weight.cols()
            );
        }

        let mut grads: Vec<Layer> = self
            .layers
            .iter()
            .map(|layer| Layer {
                weight: Matrix::zeros(layer.weight.rows(), layer.weight.cols()),
                bias: vec![0.0; layer.bias.len()],
            })
            .collect();

        let mut g = grad_logits.to_vec();
        for l in (0..self.layers.len()).rev() {
            let a = &pass.activations[l];
            // dW = g outer a, db = g.
            for (r, gr) in g.iter().enumerate() {
                for (c, ac) in a.iter().enumerate() {
                    grads[l].weight.set(r, c, gr * ac);
                }
                grads[l].bias[r] = *gr;
            }
            if l > 0 {
                let mut upstream = self.layers[l].weight.matvec_transpose(&g);
                // Gate by the ReLU that produced this activation. A zero
                // activation means the unit was off (or exactly at the
                // kink), so it blocks the gradient.
                for (u, a) in upstream.iter_mut().zip(&pass.activations[l]) {
                    if *a <= 0.0 {
                        *u = 0.0;
                    }
                }
                g = upstream;
            }
        }
        Gradients { layers: grads }
    }

    /// Frobenius norm of the final affine layer's weight matrix, bias
    /// excluded. Tracked per epoch as a capacity diagnostic.
    pub fn last_layer_weight_norm(&self) -> f64 {
        self.layers
            .last()
            .expect("at least one layer")
            .weight
            .frobenius_norm()
    }

    /// Serializes the parameters as versioned text. Every value is the hex
    /// of its IEEE-754 bit pattern, so a load reproduces the weights bit
    /// for bit.
    pub fn to_checkpoint_string(&self) -> String {
        let mut out = String::new();
        out.push_str("squentropy-checkpoint v1\n");
        write!(out, "arch {} {}", self.arch.input_dim, self.arch.classes).unwrap();
        for h in &self.arch.hidden {
            write!(out, " {h}").unwrap();
        }
        out.push('\n');
        for layer in &self.layers {
            writeln!(out, "layer {} {}", layer.weight.rows(), layer.weight.cols()).unwrap();
            for r in 0..layer.weight.rows() {
                let row = layer.weight.row(r);
                for (i, v) in row.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    write!(out, "{:016x}", v.to_bits()).unwrap();
                }
                out.push('\n');
            }
            for (i, v) in layer.bias.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write!(out, "{:016x}", v.to_bits()).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_checkpoint_string(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Checkpoint(msg);
        let mut lines = text.lines();
        match lines.next() {
            Some("squentropy-checkpoint v1") => {}
            Some(other) => {
                return Err(bad(format!(
                    "unsupported header \"{other}\", expected \"squentropy-checkpoint v1\""
                )))
            }
            None => return Err(bad("empty checkpoint".into())),
        }
        let arch_line = lines.next().ok_or_else(|| bad("missing arch line".into()))?;
        let mut parts = arch_line.split_whitespace();
        if parts.next() != Some("arch") {
            return Err(bad("second line must start with \"arch\"".into()));
        }
        let parse_dim = |s: Option<&str>, what: &str| -> Result<usize> {
            s.ok_or_else(|| bad(format!("arch line missing {what}")))?
                .parse::<usize>()
                .map_err(|_| bad(format!("arch line has invalid {what}")))
        };
        let input_dim = parse_dim(parts.next(), "input_dim")?;
        let classes = parse_dim(parts.next(), "classes")?;
        let hidden: Vec<usize> = parts
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| bad(format!("invalid hidden width \"{s}\"")))
            })
            .collect::<Result<_>>()?;
        let arch = Architecture::new(input_dim, hidden, classes)?;

        let parse_word = |s: &str| -> Result<f64> {
            let bits = u64::from_str_radix(s, 16)
                .map_err(|_| bad(format!("invalid hex word \"{s}\"")))?;
            Ok(f64::from_bits(bits))
        };
        let mut layers = Vec::new();
        for (l, &(fan_in, fan_out)) in arch.layer_dims().iter().enumerate() {
            let header = lines
                .next()
                .ok_or_else(|| bad(format!("missing header for layer {l}")))?;
            let expected = format!("layer {fan_out} {fan_in}");
            if header != expected {
                return Err(bad(format!(
                    "layer {l} header \"{header}\" does not match architecture (\"{expected}\")"
                )));
            }
            let mut weight = Matrix::zeros(fan_out, fan_in);
            for r in 0..fan_out {
                let line = lines
                    .next()
                    .ok_or_else(|| bad(format!("layer {l} is missing weight row {r}")))?;
                let words: Vec<&str> = line.split_whitespace().collect();
                if words.len() != fan_in {
                    return Err(bad(format!(
                        "layer {l} weight row {r} has {} entries, expected {fan_in}",
                        words.len()
                    )));
                }
                for (c, w) in words.iter().enumerate() {
                    weight.set(r, c, parse_word(w)?);
                }
            }
            let bias_line = lines
                .next()
                .ok_or_else(|| bad(format!("layer {l} is missing its bias line")))?;
            let words: Vec<&str> = bias_line.split_whitespace().collect();
            if words.len() != fan_out {
                return Err(bad(format!(
                    "layer {l} bias has {} entries, expected {fan_out}",
                    words.len()
                )));
            }
            let bias: Vec<f64> = words.iter().map(|w| parse_word(w)).collect::<Result<_>>()?;
            layers.push(Layer { weight, bias });
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(bad("trailing content after the last layer".into()));
        }
        Ok(MlpParameters { arch, layers })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_checkpoint_string())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_checkpoint_string(&text)
    }
}
