use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::matrix::gemm;
use super::Matrix;
use crate::error::invalid;
use crate::{Error, Result};

/// Element-wise nonlinearity applied after a dense layer.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Activation {
    Relu,
    /// Leaky ReLU with the given negative-side slope in `(0, 1)`.
    LeakyRelu(f64),
    Sigmoid,
    Identity,
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::LeakyRelu(slope) => {
                if x > 0.0 {
                    x
                } else {
                    slope * x
                }
            }
            Activation::Sigmoid => sigmoid(x),
            Activation::Identity => x,
        }
    }

    /// Derivative with respect to the pre-activation, given both the
    /// pre-activation and the activation output.
    #[inline]
    pub fn derivative(self, pre: f64, post: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu(slope) => {
                if pre > 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            Activation::Sigmoid => post * (1.0 - post),
            Activation::Identity => 1.0,
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            Activation::LeakyRelu(slope) if !(slope > 0.0 && slope < 1.0) => Err(invalid(alloc::format!(
                "leaky_relu slope must lie in (0, 1), got {slope}"
            ))),
            _ => Ok(()),
        }
    }

    fn tag(self) -> u64 {
        match self {
            Activation::Relu => 1,
            Activation::LeakyRelu(s) => 2 ^ s.to_bits(),
            Activation::Sigmoid => 3,
            Activation::Identity => 4,
        }
    }
}

/// One dense layer: `activation(W x + b)` with `W` stored `[out × in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    weight: Matrix,
    bias: Vec<f64>,
    activation: Activation,
}

impl Dense {
    pub fn new(weight: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weight.rows() {
            return Err(Error::Shape {
                context: "layer bias",
                expected: weight.rows(),
                found: bias.len(),
            });
        }
        activation.validate()?;
        if !weight.is_finite() || bias.iter().any(|b| !b.is_finite()) {
            return Err(invalid("layer parameters must be finite"));
        }
        Ok(Self {
            weight,
            bias,
            activation,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn weight(&self) -> &Matrix {
        &self.weight
    }

    /// Mutable access to the weight entries; the shape stays fixed.
    pub fn weight_mut(&mut self) -> &mut [f64] {
        self.weight.as_mut_slice()
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Returns `(pre, post)` for a batch.
    fn forward(&self, x: &Matrix) -> (Matrix, Matrix) {
        let n = x.rows();
        let (inp, out) = (self.in_dim(), self.out_dim());
        let mut pre = Matrix::zeros(n, out);
        for b in 0..n {
            pre.row_mut(b).copy_from_slice(&self.bias);
        }
        // pre += X · W^T
        gemm(
            (n, inp, out),
            x.as_slice(),
            (inp, 1),
            self.weight.as_slice(),
            (1, inp),
            1.0,
            pre.as_mut_slice(),
        );
        let mut post = pre.clone();
        if self.activation != Activation::Identity {
            for v in post.as_mut_slice() {
                *v = self.activation.apply(*v);
            }
        }
        (pre, post)
    }
}

/// Parameters of a feed-forward stack of dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    layers: Vec<Dense>,
}

impl MlpParams {
    /// Validates that the layers chain (`out` of layer `i` equals `in` of layer `i + 1`).
    pub fn new(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Empty("network layers"));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::Shape {
                    context: "layer chaining",
                    expected: pair[0].out_dim(),
                    found: pair[1].in_dim(),
                });
            }
        }
        Ok(Self { layers })
    }

    /// All-zero network with the given widths (`dims.len() == activations.len() + 1`).
    pub fn zeros(dims: &[usize], activations: &[Activation]) -> Result<Self> {
        Self::build(dims, activations, |_| 0.0)
    }

    /// Weights drawn from `Normal(0, weight_std)`, biases zero.
    pub fn init<R: Rng + ?Sized>(
        dims: &[usize],
        activations: &[Activation],
        weight_std: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let normal = Normal::new(0.0, weight_std)
            .map_err(|_| invalid("weight init standard deviation must be finite and >= 0"))?;
        Self::build(dims, activations, |_| normal.sample(rng))
    }

    fn build(dims: &[usize], activations: &[Activation], mut weight: impl FnMut(usize) -> f64) -> Result<Self> {
        if dims.len() != activations.len() + 1 {
            return Err(Error::Shape {
                context: "network activations",
                expected: dims.len().saturating_sub(1),
                found: activations.len(),
            });
        }
        if dims.contains(&0) {
            return Err(invalid("layer widths must be positive"));
        }
        let mut layers = Vec::with_capacity(activations.len());
        for (i, (w, &act)) in dims.windows(2).zip(activations).enumerate() {
            let data = (0..w[0] * w[1]).map(|_| weight(i)).collect();
            let weight = Matrix::new(w[1], w[0], data)?;
            layers.push(Dense::new(weight, alloc::vec![0.0; w[1]], act)?);
        }
        Self::new(layers)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.as_slice().len() + l.bias.len())
            .sum()
    }

    /// All parameters, layer by layer, weights (row-major) before biases.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend_from_slice(l.weight.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }

    /// FNV-style hash of shapes, activations and parameter bits.
    fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut mix = |v: u64| {
            h ^= v;
            h = h.wrapping_mul(0x0100_0000_01b3);
        };
        for l in &self.layers {
            mix(l.in_dim() as u64);
            mix(l.out_dim() as u64);
            mix(l.activation.tag());
            for w in l.weight.as_slice() {
                mix(w.to_bits());
            }
            for b in &l.bias {
                mix(b.to_bits());
            }
        }
        h
    }

    fn check_input(&self, inputs: &Matrix) -> Result<()> {
        if inputs.cols() != self.input_dim() {
            return Err(Error::Shape {
                context: "network input width",
                expected: self.input_dim(),
                found: inputs.cols(),
            });
        }
        Ok(())
    }

    /// Forward pass without keeping intermediates.
    pub fn predict(&self, inputs: &Matrix) -> Result<Matrix> {
        self.check_input(inputs)?;
        let mut x = None::<Matrix>;
        for layer in &self.layers {
            let (_, post) = layer.forward(x.as_ref().unwrap_or(inputs));
            x = Some(post);
        }
        Ok(x.expect("at least one layer"))
    }
}

/// Intermediates of one forward pass, consumed by the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Matrix,
    pre: Vec<Matrix>,
    post: Vec<Matrix>,
    fingerprint: u64,
}

impl ForwardCache {
    pub fn output(&self) -> &Matrix {
        self.post.last().expect("at least one layer")
    }

    pub fn into_output(mut self) -> Matrix {
        self.post.pop().expect("at least one layer")
    }

    pub fn input(&self) -> &Matrix {
        &self.input
    }

    /// Pre-activation of the last layer (e.g. discriminator logits).
    pub fn output_preactivation(&self) -> &Matrix {
        self.pre.last().expect("at least one layer")
    }
}

/// Runs the network on a batch (one sample per row), keeping what backprop needs.
pub fn mlp_forward(params: &MlpParams, inputs: &Matrix) -> Result<ForwardCache> {
    params.check_input(inputs)?;
    let mut pre = Vec::with_capacity(params.layers.len());
    let mut post: Vec<Matrix> = Vec::with_capacity(params.layers.len());
    for layer in &params.layers {
        let (p, q) = layer.forward(post.last().unwrap_or(inputs));
        pre.push(p);
        post.push(q);
    }
    Ok(ForwardCache {
        input: inputs.clone(),
        pre,
        post,
        fingerprint: params.fingerprint(),
    })
}

/// Gradient of one dense layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub d_weight: Matrix,
    pub d_bias: Vec<f64>,
}

/// Gradients for every layer of an [`MlpParams`], in the same shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub layers: Vec<LayerGrad>,
}

impl GradientSet {
    pub fn zeros_like(params: &MlpParams) -> Self {
        Self {
            layers: params
                .layers
                .iter()
                .map(|l| LayerGrad {
                    d_weight: Matrix::zeros(l.out_dim(), l.in_dim()),
                    d_bias: alloc::vec![0.0; l.out_dim()],
                })
                .collect(),
        }
    }

    pub fn is_congruent(&self, params: &MlpParams) -> bool {
        self.layers.len() == params.layers.len()
            && self.layers.iter().zip(&params.layers).all(|(g, l)| {
                g.d_weight.rows() == l.out_dim() && g.d_weight.cols() == l.in_dim() && g.d_bias.len() == l.out_dim()
            })
    }

    /// Element-wise `self += other`. Shapes must match.
    pub fn accumulate(&mut self, other: &GradientSet) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.d_weight.as_mut_slice().iter_mut().zip(b.d_weight.as_slice()) {
                *x += y;
            }
            for (x, y) in a.d_bias.iter_mut().zip(&b.d_bias) {
                *x += y;
            }
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(l.d_weight.as_slice());
            out.extend_from_slice(&l.d_bias);
        }
        out
    }
}

/// Backpropagates `upstream` (gradient w.r.t. the network output) through the
/// cached pass. Returns parameter gradients summed over the batch and the
/// gradient w.r.t. the inputs.
pub fn mlp_backward(params: &MlpParams, cache: &ForwardCache, upstream: &Matrix) -> Result<(GradientSet, Matrix)> {
    check_cache(params, cache, upstream)?;
    let last = params.layers.len() - 1;
    let act = params.layers[last].activation;
    let mut delta = upstream.clone();
    if act != Activation::Identity {
        let pre = cache.pre[last].as_slice();
        let post = cache.post[last].as_slice();
        for (i, d) in delta.as_mut_slice().iter_mut().enumerate() {
            *d *= act.derivative(pre[i], post[i]);
        }
    }
    backprop(params, cache, delta)
}

/// Like [`mlp_backward`], but `upstream` is the gradient w.r.t. the last
/// layer's pre-activation, skipping its activation derivative.
pub fn mlp_backward_preactivation(
    params: &MlpParams,
    cache: &ForwardCache,
    upstream: &Matrix,
) -> Result<(GradientSet, Matrix)> {
    check_cache(params, cache, upstream)?;
    backprop(params, cache, upstream.clone())
}

fn check_cache(params: &MlpParams, cache: &ForwardCache, upstream: &Matrix) -> Result<()> {
    if cache.pre.len() != params.layers.len() || cache.fingerprint != params.fingerprint() {
        return Err(Error::StaleCache);
    }
    let out = cache.output();
    if upstream.rows() != out.rows() {
        return Err(Error::Shape {
            context: "upstream gradient rows",
            expected: out.rows(),
            found: upstream.rows(),
        });
    }
    if upstream.cols() != out.cols() {
        return Err(Error::Shape {
            context: "upstream gradient width",
            expected: out.cols(),
            found: upstream.cols(),
        });
    }
    Ok(())
}

/// `delta` is the gradient w.r.t. the last layer's pre-activation.
fn backprop(params: &MlpParams, cache: &ForwardCache, mut delta: Matrix) -> Result<(GradientSet, Matrix)> {
    let mut grads = GradientSet::zeros_like(params);
    let n = delta.rows();
    for li in (0..params.layers.len()).rev() {
        let layer = &params.layers[li];
        let x = if li == 0 { &cache.input } else { &cache.post[li - 1] };
        let g = &mut grads.layers[li];
        let (inp, out) = (layer.in_dim(), layer.out_dim());
        // dW = delta^T · X
        gemm(
            (out, n, inp),
            delta.as_slice(),
            (1, out),
            x.as_slice(),
            (inp, 1),
            0.0,
            g.d_weight.as_mut_slice(),
        );
        for b in 0..n {
            for (db, d) in g.d_bias.iter_mut().zip(delta.row(b)) {
                *db += d;
            }
        }
        // dX = delta · W
        let mut dx = Matrix::zeros(n, inp);
        gemm(
            (n, out, inp),
            delta.as_slice(),
            (out, 1),
            layer.weight.as_slice(),
            (inp, 1),
            0.0,
            dx.as_mut_slice(),
        );
        if li > 0 {
            let below = &params.layers[li - 1];
            let act = below.activation;
            if act != Activation::Identity {
                let pre = cache.pre[li - 1].as_slice();
                let post = cache.post[li - 1].as_slice();
                for (i, v) in dx.as_mut_slice().iter_mut().enumerate() {
                    *v *= act.derivative(pre[i], post[i]);
                }
            }
        }
        delta = dx;
    }
    Ok((grads, delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn relu_net() -> MlpParams {
        // 1 -> 2 -> 1
        let l1 = Dense::new(
            Matrix::new(2, 1, vec![1.5, -2.0]).unwrap(),
            vec![0.5, 1.0],
            Activation::Relu,
        )
        .unwrap();
        let l2 = Dense::new(
            Matrix::new(1, 2, vec![2.0, -3.0]).unwrap(),
            vec![0.25],
            Activation::Identity,
        )
        .unwrap();
        MlpParams::new(vec![l1, l2]).unwrap()
    }

    #[test]
    fn zero_sigmoid_net_outputs_half() {
        let p = MlpParams::zeros(&[3, 4, 2], &[Activation::Relu, Activation::Sigmoid]).unwrap();
        let x = Matrix::from_rows(&[[1.0, -2.0, 3.0], [0.1, 0.2, 0.3]]).unwrap();
        let out = mlp_forward(&p, &x).unwrap().into_output();
        assert!(out.as_slice().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn identity_layer_is_passthrough() {
        let l = Dense::new(Matrix::identity(3), vec![0.0; 3], Activation::Identity).unwrap();
        let p = MlpParams::new(vec![l]).unwrap();
        let x = Matrix::from_rows(&[[1.0, -2.0, 3.5]]).unwrap();
        assert_eq!(p.predict(&x).unwrap(), x);
    }

    #[test]
    fn relu_net_matches_hand_evaluation() {
        let p = relu_net();
        // x = 1:  h = relu(2.0, -1.0) = (2, 0);  y = 4 + 0.25
        // x = -1: h = relu(-1.0, 3.0) = (0, 3);  y = -9 + 0.25
        let x = Matrix::from_rows(&[[1.0], [-1.0]]).unwrap();
        let y = p.predict(&x).unwrap();
        assert_eq!(y.as_slice(), &[4.25, -8.75]);
        assert_eq!(mlp_forward(&p, &x).unwrap().output(), &y);
    }

    #[test]
    fn input_width_mismatch_is_shape_error() {
        let p = relu_net();
        let x = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(matches!(mlp_forward(&p, &x), Err(Error::Shape { .. })));
    }

    #[test]
    fn unchained_layers_rejected() {
        let a = Dense::new(Matrix::zeros(3, 2), vec![0.0; 3], Activation::Relu).unwrap();
        let b = Dense::new(Matrix::zeros(1, 2), vec![0.0], Activation::Identity).unwrap();
        assert!(matches!(MlpParams::new(vec![a, b]), Err(Error::Shape { .. })));
    }

    #[test]
    fn bad_leaky_slope_rejected() {
        assert!(Dense::new(Matrix::zeros(1, 1), vec![0.0], Activation::LeakyRelu(1.5)).is_err());
        assert!(Dense::new(Matrix::zeros(1, 1), vec![0.0], Activation::LeakyRelu(0.0)).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let p = relu_net();
        let x = Matrix::from_rows(&[[1.0], [-1.0]]).unwrap();
        let cache = mlp_forward(&p, &x).unwrap();
        let (g, dx) = mlp_backward(&p, &cache, &Matrix::zeros(2, 1)).unwrap();
        assert!(g.flatten().iter().all(|&v| v == 0.0));
        assert!(dx.as_slice().iter().all(|&v| v == 0.0));
        assert!(g.is_congruent(&p));
    }

    #[test]
    fn linear_layer_weight_gradient_is_outer_product() {
        let w = Matrix::new(2, 3, vec![0.3, -0.1, 0.2, 0.7, 0.0, -0.4]).unwrap();
        let p = MlpParams::new(vec![Dense::new(w, vec![0.0; 2], Activation::Identity).unwrap()]).unwrap();
        let x = Matrix::from_rows(&[[1.0, 2.0, -3.0]]).unwrap();
        let up = Matrix::from_rows(&[[0.5, -2.0]]).unwrap();
        let cache = mlp_forward(&p, &x).unwrap();
        let (g, dx) = mlp_backward(&p, &cache, &up).unwrap();
        let expected = [0.5, 1.0, -1.5, -2.0, -4.0, 6.0];
        assert_eq!(g.layers[0].d_weight.as_slice(), &expected);
        assert_eq!(g.layers[0].d_bias, vec![0.5, -2.0]);
        // dx = W^T up
        assert_eq!(
            dx.as_slice(),
            &[0.3 * 0.5 - 0.7 * 2.0, -0.1 * 0.5, 0.2 * 0.5 + 0.4 * 2.0]
        );
    }

    #[test]
    fn stale_cache_rejected() {
        let mut p = relu_net();
        let x = Matrix::from_rows(&[[1.0]]).unwrap();
        let cache = mlp_forward(&p, &x).unwrap();
        p.layers_mut()[0].bias_mut()[0] += 1.0;
        assert_eq!(
            mlp_backward(&p, &cache, &Matrix::zeros(1, 1)).unwrap_err(),
            Error::StaleCache
        );
    }

    #[test]
    fn upstream_shape_checked() {
        let p = relu_net();
        let cache = mlp_forward(&p, &Matrix::from_rows(&[[1.0]]).unwrap()).unwrap();
        assert!(matches!(
            mlp_backward(&p, &cache, &Matrix::zeros(2, 1)),
            Err(Error::Shape { .. })
        ));
    }
}
