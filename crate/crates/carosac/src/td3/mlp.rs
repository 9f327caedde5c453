//! Fully-connected network with tanh hidden layers, batch forward and
//! manual backpropagation on ndarray matrices.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Td3Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputActivation {
    /// Critic head: unbounded value.
    Linear,
    /// Actor head: bounded to (−1, 1).
    Tanh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Layer {
    /// (out × in) weight matrix.
    w: Array2<f64>,
    b: Array1<f64>,
}

/// Parameter gradients, mirroring the layer layout.
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub w: Vec<Array2<f64>>,
    pub b: Vec<Array1<f64>>,
}

/// Intermediate activations of one forward pass, consumed by backward.
pub struct MlpCache {
    /// activations[0] is the input batch, activations[k] the output of
    /// layer k−1 (post-activation); the last entry is the network output.
    activations: Vec<Array2<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<Layer>,
    output: OutputActivation,
}

impl Mlp {
    /// `sizes` runs input → hidden… → output. Weights and biases start
    /// uniform in ±1/√fan_in.
    pub fn new<R: Rng>(sizes: &[usize], output: OutputActivation, rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        let layers = sizes
            .windows(2)
            .map(|io| {
                let (fan_in, fan_out) = (io[0], io[1]);
                let bound = 1.0 / (fan_in as f64).sqrt();
                let w = Array2::from_shape_fn((fan_out, fan_in), |_| {
                    rng.gen_range(-bound..bound)
                });
                let b = Array1::from_shape_fn(fan_out, |_| rng.gen_range(-bound..bound));
                Layer { w, b }
            })
            .collect();
        Mlp { layers, output }
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.layers.iter().map(|l| l.w.ncols()).collect();
        s.push(self.layers.last().expect("nonempty").w.nrows());
        s
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").w.nrows()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// `x` is (batch × input_dim); returns (batch × output_dim).
    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        self.forward_cached(x).0
    }

    pub fn forward_cached(&self, x: &Array2<f64>) -> (Array2<f64>, MlpCache) {
        debug_assert_eq!(x.ncols(), self.input_dim());
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.clone());
        let n = self.layers.len();
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = activations[k].dot(&layer.w.t());
            z += &layer.b;
            let a = if k + 1 < n || self.output == OutputActivation::Tanh {
                z.mapv_into(f64::tanh)
            } else {
                z
            };
            activations.push(a);
        }
        (activations.last().expect("nonempty").clone(), MlpCache { activations })
    }

    /// Backpropagates `grad_output` (batch × output_dim) through the
    /// cached pass; returns parameter gradients and the gradient with
    /// respect to the input batch.
    pub fn backward(&self, cache: &MlpCache, grad_output: &Array2<f64>) -> (MlpGrads, Array2<f64>) {
        let n = self.layers.len();
        let mut g = if self.output == OutputActivation::Tanh {
            let y = &cache.activations[n];
            grad_output * &y.mapv(|a| 1.0 - a * a)
        } else {
            grad_output.clone()
        };

        let mut gw = vec![Array2::zeros((0, 0)); n];
        let mut gb = vec![Array1::zeros(0); n];
        for k in (0..n).rev() {
            gw[k] = g.t().dot(&cache.activations[k]);
            gb[k] = g.sum_axis(Axis(0));
            let upstream = g.dot(&self.layers[k].w);
            g = if k > 0 {
                // tanh hidden activation
                let a = &cache.activations[k];
                upstream * &a.mapv(|a| 1.0 - a * a)
            } else {
                upstream
            };
        }
        (MlpGrads { w: gw, b: gb }, g)
    }

    /// All parameters flattened layer by layer (weights row-major, then
    /// biases).
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend(l.w.iter());
            out.extend(l.b.iter());
        }
        out
    }

    pub fn set_params_flat(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.num_params());
        let mut it = params.iter();
        for l in &mut self.layers {
            for w in l.w.iter_mut() {
                *w = *it.next().expect("enough params");
            }
            for b in l.b.iter_mut() {
                *b = *it.next().expect("enough params");
            }
        }
    }

    pub(super) fn same_shape(&self, other: &Mlp) -> bool {
        self.output == other.output && self.sizes() == other.sizes()
    }

    pub(super) fn blend_from(&mut self, source: &Mlp, tau: f64) {
        for (t, s) in self.layers.iter_mut().zip(source.layers.iter()) {
            t.w.zip_mut_with(&s.w, |t, s| *t = tau * s + (1.0 - tau) * *t);
            t.b.zip_mut_with(&s.b, |t, s| *t = tau * s + (1.0 - tau) * *t);
        }
    }

    pub(super) fn apply_update(&mut self, delta_w: &[Array2<f64>], delta_b: &[Array1<f64>]) {
        for (k, l) in self.layers.iter_mut().enumerate() {
            l.w += &delta_w[k];
            l.b += &delta_b[k];
        }
    }

    pub(super) fn layer_shapes(&self) -> Vec<(usize, usize)> {
        self.layers.iter().map(|l| (l.w.nrows(), l.w.ncols())).collect()
    }
}

/// `target ← tau·source + (1 − tau)·target`, elementwise.
pub fn soft_update(target: &mut Mlp, source: &Mlp, tau: f64) -> Result<(), Td3Error> {
    if !target.same_shape(source) {
        return Err(Td3Error::ShapeMismatch(format!(
            "target {:?} vs source {:?}",
            target.sizes(),
            source.sizes()
        )));
    }
    target.blend_from(source, tau);
    Ok(())
}
