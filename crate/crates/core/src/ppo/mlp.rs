//! Fully connected tanh network with a linear output layer and hand-written
//! backpropagation. Parameters live in one flat vector so the optimizer and
//! finite-difference checks can treat them uniformly.

use rand::Rng;

/// Layer `l` maps `sizes[l]` inputs to `sizes[l + 1]` outputs. Its weights are
/// stored row-major (`out x in`) followed by its biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Activations from a forward pass; `layers[0]` is the input, the last entry
/// is the (linear) output.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    layers: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.layers.last().expect("at least input and output")
    }
}

impl Mlp {
    /// Uniform `(-1/sqrt(fan_in), 1/sqrt(fan_in))` initialization.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        assert!(
            sizes.len() >= 2,
            "need at least an input and an output layer"
        );
        let count = Self::param_count(sizes);
        let mut params = Vec::with_capacity(count);
        for w in sizes.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            for _ in 0..(w[0] * w[1] + w[1]) {
                params.push(rng.random_range(-bound..bound));
            }
        }
        Self {
            sizes: sizes.to_vec(),
            params,
        }
    }

    pub fn param_count(sizes: &[usize]) -> usize {
        sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn layer_offset(&self, layer: usize) -> usize {
        Self::param_count(&self.sizes[..=layer])
    }

    /// Mutable views of one layer's weights and biases.
    pub fn layer_mut(&mut self, layer: usize) -> (&mut [f64], &mut [f64]) {
        let (n_in, n_out) = (self.sizes[layer], self.sizes[layer + 1]);
        let off = self.layer_offset(layer);
        let (w, rest) = self.params[off..].split_at_mut(n_in * n_out);
        (w, &mut rest[..n_out])
    }

    pub fn forward(&self, input: &[f64]) -> ForwardCache {
        assert_eq!(input.len(), self.sizes[0], "input width");
        let n_layers = self.sizes.len() - 1;
        let mut layers = Vec::with_capacity(n_layers + 1);
        layers.push(input.to_vec());
        let mut off = 0;
        for l in 0..n_layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[off..off + n_in * n_out];
            let b = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            let x = &layers[l];
            let mut y: Vec<f64> = (0..n_out)
                .map(|o| {
                    b[o] + w[o * n_in..(o + 1) * n_in]
                        .iter()
                        .zip(x)
                        .map(|(a, c)| a * c)
                        .sum::<f64>()
                })
                .collect();
            if l + 1 < n_layers {
                y.iter_mut().for_each(|v| *v = v.tanh());
            }
            layers.push(y);
            off += n_in * n_out + n_out;
        }
        ForwardCache { layers }
    }

    /// Gradient of a scalar loss w.r.t. all parameters, given `dL/d(output)`.
    pub fn backward(&self, cache: &ForwardCache, grad_output: &[f64]) -> Vec<f64> {
        let n_layers = self.sizes.len() - 1;
        assert_eq!(
            grad_output.len(),
            self.sizes[n_layers],
            "output gradient width"
        );
        let mut grad = vec![0.0; self.params.len()];
        let mut delta = grad_output.to_vec();
        for l in (0..n_layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = self.layer_offset(l);
            let x = &cache.layers[l];
            for o in 0..n_out {
                let row = &mut grad[off + o * n_in..off + (o + 1) * n_in];
                for (g, &xi) in row.iter_mut().zip(x) {
                    *g = delta[o] * xi;
                }
                grad[off + n_in * n_out + o] = delta[o];
            }
            if l > 0 {
                let w = &self.params[off..off + n_in * n_out];
                // tanh'(z) = 1 - tanh(z)^2, with tanh(z) cached as the activation
                delta = (0..n_in)
                    .map(|i| {
                        let back: f64 = (0..n_out).map(|o| w[o * n_in + i] * delta[o]).sum();
                        back * (1.0 - x[i] * x[i])
                    })
                    .collect();
            }
        }
        grad
    }
}
