//! Fully connected network with rectifier hidden layers and a single logit output.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    /// Uniform in `±1/sqrt(inputs)` for weights and bias.
    pub fn random<R: Rng>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (inputs as f64).sqrt();
        let mut draw = |len: usize| (0..len).map(|_| rng.random_range(-bound..bound)).collect();
        Self {
            inputs,
            outputs,
            weights: draw(inputs * outputs),
            bias: draw(outputs),
        }
    }

    fn w(&self) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape((self.outputs, self.inputs), &self.weights).expect("dense shape")
    }

    /// `x · Wᵀ + b` for a batch laid out row-wise.
    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = x.dot(&self.w().t());
        out += &ArrayView1::from(&self.bias);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Activations kept from a forward pass for backpropagation.
pub struct ForwardCache {
    /// `inputs[i]` is the input to layer `i` (post-activation of layer `i - 1`).
    inputs: Vec<Array2<f64>>,
    pub logits: Array1<f64>,
}

/// Parameter gradients shaped like the network.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpGrad {
    pub layers: Vec<Dense>,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Mlp {
    /// Network with the given layer widths; the last width must be 1.
    pub fn new<R: Rng>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        if sizes.len() < 2 || *sizes.last().unwrap() != 1 || sizes.contains(&0) {
            return Err(Error::invalid(format!("bad layer sizes {sizes:?}")));
        }
        Ok(Self {
            layers: sizes
                .windows(2)
                .map(|w| Dense::random(w[0], w[1], rng))
                .collect(),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_dim()];
        s.extend(self.layers.iter().map(|l| l.outputs));
        s
    }

    pub fn forward(&self, x: ArrayView2<'_, f64>) -> Result<ForwardCache> {
        if x.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.ncols(),
            });
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut current = x.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut out = layer.apply(current.view());
            if i + 1 < self.layers.len() {
                out.mapv_inplace(|v| v.max(0.0));
            }
            inputs.push(current);
            current = out;
        }
        let logits = current.index_axis_move(Axis(1), 0);
        Ok(ForwardCache { inputs, logits })
    }

    pub fn logits(&self, x: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        Ok(self.forward(x)?.logits)
    }

    /// Gradients of a loss whose derivative with respect to each logit is `dlogits`.
    pub fn backward(&self, cache: &ForwardCache, dlogits: ArrayView1<'_, f64>) -> MlpGrad {
        let mut grads: Vec<Dense> = Vec::with_capacity(self.layers.len());
        let mut delta = dlogits.insert_axis(Axis(1)).to_owned();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &cache.inputs[i];
            let dw = delta.t().dot(input);
            let db = delta.sum_axis(Axis(0));
            grads.push(Dense {
                inputs: layer.inputs,
                outputs: layer.outputs,
                weights: dw.into_raw_vec_and_offset().0,
                bias: db.to_vec(),
            });
            if i > 0 {
                let mut back = delta.dot(&layer.w());
                // input[i] is the rectified output of layer i-1
                back.zip_mut_with(input, |d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = back;
            }
        }
        grads.reverse();
        MlpGrad { layers: grads }
    }

    pub(crate) fn params_mut(&mut self) -> impl Iterator<Item = &mut Vec<f64>> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weights, &mut l.bias])
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }
}

impl MlpGrad {
    pub(crate) fn params(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.layers.iter().flat_map(|l| [&l.weights, &l.bias])
    }
}

/// `σ(Φ(x))` for a single feature vector.
pub fn mlp_forward(params: &Mlp, x: &[f64]) -> Result<f64> {
    let view = ArrayView2::from_shape((1, x.len()), x).expect("row view");
    Ok(sigmoid(params.logits(view)?[0]))
}
