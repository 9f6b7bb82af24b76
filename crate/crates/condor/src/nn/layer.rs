//! Dense layers with optional ReLU.

use super::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
}

impl Activation {
    fn apply(self, pre: &Tensor) -> Tensor {
        match self {
            Activation::Identity => pre.clone(),
            Activation::Relu => {
                let mut out = pre.clone();
                for v in out.data_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
                out
            }
        }
    }

    /// Derivative evaluated at the pre-activation. ReLU at exactly 0 uses
    /// subgradient 0.
    fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Tensor, // [in_dim, out_dim]
    pub bias: Vec<f64>,  // [out_dim]
    pub activation: Activation,
}

/// Parameter gradients for one dense layer plus the gradient passed upstream.
pub struct LayerGrads {
    pub d_weights: Tensor,
    pub d_bias: Vec<f64>,
    pub d_input: Tensor,
}

impl DenseLayer {
    pub fn new(weights: Tensor, bias: Vec<f64>, activation: Activation) -> Self {
        debug_assert_eq!(weights.cols(), bias.len());
        Self { weights, bias, activation }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn param_count(&self) -> usize {
        self.weights.data().len() + self.bias.len()
    }

    /// Returns (pre-activation, post-activation).
    pub fn forward(&self, input: &Tensor) -> (Tensor, Tensor) {
        let pre = input.affine(&self.weights, &self.bias);
        let post = self.activation.apply(&pre);
        (pre, post)
    }

    /// Backpropagates `d_post` (gradient in the layer's output) given the
    /// cached input and pre-activation.
    pub fn backward(&self, input: &Tensor, pre: &Tensor, d_post: &Tensor) -> LayerGrads {
        let n = input.rows();
        let (in_dim, out_dim) = (self.in_dim(), self.out_dim());

        // d_pre = d_post .* act'(pre)
        let mut d_pre = d_post.clone();
        for (dp, &p) in d_pre.data_mut().iter_mut().zip(pre.data()) {
            *dp *= self.activation.derivative(p);
        }

        let mut d_weights = Tensor::zeros(&[in_dim, out_dim]);
        let mut d_bias = vec![0.0; out_dim];
        let mut d_input = Tensor::zeros(&[n, in_dim]);
        for r in 0..n {
            let xrow = input.row(r);
            let drow = d_pre.row(r);
            for (db, &d) in d_bias.iter_mut().zip(drow) {
                *db += d;
            }
            for (k, &xv) in xrow.iter().enumerate() {
                let wrow = self.weights.row(k);
                let dwrow = d_weights.row_mut(k);
                let mut acc = 0.0;
                for j in 0..out_dim {
                    dwrow[j] += xv * drow[j];
                    acc += wrow[j] * drow[j];
                }
                d_input.row_mut(r)[k] = acc;
            }
        }
        LayerGrads { d_weights, d_bias, d_input }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_weights_pass_input_through() {
        let eye = Tensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let layer = DenseLayer::new(eye, vec![0.0, 0.0], Activation::Identity);
        let x = Tensor::from_rows(&[vec![3.0, -4.0]]).unwrap();
        let (_, post) = layer.forward(&x);
        assert_eq!(post.row(0), x.row(0));
    }

    #[test]
    fn relu_clamps_and_kills_gradient() {
        let w = Tensor::new(vec![1, 2], vec![1.0, 1.0]).unwrap();
        let layer = DenseLayer::new(w, vec![0.0, -5.0], Activation::Relu);
        let x = Tensor::from_rows(&[vec![2.0]]).unwrap();
        let (pre, post) = layer.forward(&x);
        assert_eq!(pre.row(0), &[2.0, -3.0]);
        assert_eq!(post.row(0), &[2.0, 0.0]);

        let d_post = Tensor::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let grads = layer.backward(&x, &pre, &d_post);
        assert_eq!(grads.d_weights.row(0), &[2.0, 0.0]);
        assert_eq!(grads.d_bias, vec![1.0, 0.0]);
    }

    #[test]
    fn relu_at_exact_zero_uses_zero_subgradient() {
        let w = Tensor::new(vec![1, 1], vec![1.0]).unwrap();
        let layer = DenseLayer::new(w, vec![0.0], Activation::Relu);
        let x = Tensor::from_rows(&[vec![0.0]]).unwrap();
        let (pre, _) = layer.forward(&x);
        assert_eq!(pre.row(0), &[0.0]);
        let d_post = Tensor::from_rows(&[vec![1.0]]).unwrap();
        let grads = layer.backward(&x, &pre, &d_post);
        assert_eq!(grads.d_bias, vec![0.0]);
    }
}
