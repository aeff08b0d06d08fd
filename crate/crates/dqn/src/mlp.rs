//! Fully connected ReLU network with hand-written backpropagation.
//!
//! Generic over the float type so gradient checks can run in `f64` while
//! training runs in `f32`. Weights are stored `in x out`, so a batch of row
//! vectors `x` maps to `x.dot(w) + b`.

use std::fmt::Debug;
use std::ops::{AddAssign, MulAssign};

use ndarray::{Array1, Array2, ArrayView2, Axis, LinalgScalar, ScalarOperand, Zip};
use num_traits::Float;
use rand::Rng;

pub trait Scalar:
    LinalgScalar + Float + ScalarOperand + AddAssign + MulAssign + Debug + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: LinalgScalar + Float + ScalarOperand + AddAssign + MulAssign + Debug + Send + Sync + 'static
{
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense<F> {
    pub w: Array2<F>,
    pub b: Array1<F>,
}

impl<F: Scalar> Dense<F> {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            w: Array2::zeros((fan_in, fan_out)),
            b: Array1::zeros(fan_out),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.w.nrows(), self.w.ncols())
    }

    pub fn fan_in(&self) -> usize {
        self.w.nrows()
    }

    pub fn fan_out(&self) -> usize {
        self.w.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<F> {
    layers: Vec<Dense<F>>,
}

/// Layer inputs saved by [`Mlp::forward_cached`]. Entry `i` is the input of
/// layer `i`; for hidden layers it is also the ReLU output of layer `i - 1`.
#[derive(Debug, Clone)]
pub struct Cache<F> {
    inputs: Vec<Array2<F>>,
}

/// Parameter gradients, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads<F> {
    pub layers: Vec<Dense<F>>,
}

impl<F: Scalar> Grads<F> {
    pub fn global_norm(&self) -> F {
        let sq = self.layers.iter().fold(F::zero(), |acc, l| {
            acc + sum_squares(l.w.as_slice().expect("standard layout"))
                + sum_squares(l.b.as_slice().expect("standard layout"))
        });
        sq.sqrt()
    }

    pub fn scale(&mut self, k: F) {
        for l in &mut self.layers {
            l.w *= k;
            l.b *= k;
        }
    }

    /// Rescales so the global norm is at most `max_norm`; returns the norm
    /// before clipping.
    pub fn clip_global_norm(&mut self, max_norm: F) -> F {
        let norm = self.global_norm();
        if norm > max_norm && norm > F::zero() {
            self.scale(max_norm / norm);
        }
        norm
    }

    /// All gradient entries, layer by layer, weights before biases.
    pub fn flatten(&self) -> Vec<F> {
        self.layers
            .iter()
            .flat_map(|l| l.w.iter().chain(l.b.iter()).copied())
            .collect()
    }
}

impl<F: Scalar> Mlp<F> {
    /// Uniform initialisation in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` for both
    /// weights and biases.
    pub fn new_random<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs at least input and output sizes");
        let layers = sizes
            .windows(2)
            .map(|s| {
                let bound = 1.0 / (s[0] as f64).sqrt();
                let mut draw = || F::from(rng.random_range(-bound..bound)).expect("representable");
                let w = Array2::from_shape_simple_fn((s[0], s[1]), &mut draw);
                let b = Array1::from_shape_simple_fn(s[1], &mut draw);
                Dense { w, b }
            })
            .collect();
        Self { layers }
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs at least input and output sizes");
        Self {
            layers: sizes.windows(2).map(|s| Dense::zeros(s[0], s[1])).collect(),
        }
    }

    /// Builds a network from explicit layers; `None` if shapes do not chain.
    pub fn from_layers(layers: Vec<Dense<F>>) -> Option<Self> {
        if layers.is_empty() {
            return None;
        }
        let chained = layers.windows(2).all(|p| p[0].fan_out() == p[1].fan_in());
        let biases = layers.iter().all(|l| l.b.len() == l.fan_out());
        (chained && biases).then_some(Self { layers })
    }

    pub fn layers(&self) -> &[Dense<F>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense<F>] {
        &mut self.layers
    }

    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(Dense::fan_out))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].fan_out()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn forward(&self, x: ArrayView2<'_, F>) -> Array2<F> {
        let last = self.layers.len() - 1;
        let mut h = affine(&self.layers[0], x);
        if last > 0 {
            relu(&mut h);
        }
        for (i, layer) in self.layers.iter().enumerate().skip(1) {
            h = affine(layer, h.view());
            if i < last {
                relu(&mut h);
            }
        }
        h
    }

    /// Forward pass for a single input row. Skips the inputs that are zero,
    /// which after a ReLU is roughly half of them, and avoids the packing
    /// overhead of a general matrix product.
    pub fn forward_row(&self, x: &[F]) -> Vec<F> {
        assert_eq!(x.len(), self.input_dim(), "input width");
        let last = self.layers.len() - 1;
        let mut h = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = layer.b.to_vec();
            for (row, &xi) in layer.w.rows().into_iter().zip(&h) {
                if xi == F::zero() {
                    continue;
                }
                let row = row.to_slice().expect("standard layout");
                for (zj, &wj) in z.iter_mut().zip(row) {
                    *zj += xi * wj;
                }
            }
            if i < last {
                for v in &mut z {
                    if *v < F::zero() {
                        *v = F::zero();
                    }
                }
            }
            h = z;
        }
        h
    }

    pub fn forward_cached(&self, x: ArrayView2<'_, F>) -> (Array2<F>, Cache<F>) {
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut h = x.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = affine(layer, h.view());
            if i < last {
                relu(&mut z);
            }
            inputs.push(h);
            h = z;
        }
        (h, Cache { inputs })
    }

    /// Gradients of a scalar loss given its gradient with respect to the
    /// network output.
    pub fn backward(&self, cache: &Cache<F>, grad_out: Array2<F>) -> Grads<F> {
        let mut grads: Vec<Dense<F>> = Vec::with_capacity(self.layers.len());
        let mut delta = grad_out;
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &cache.inputs[i];
            let gw = input.t().dot(&delta);
            let gb = delta.sum_axis(Axis(0));
            if i > 0 {
                let mut back = delta.dot(&layer.w.t());
                // `input` is a ReLU output, positive exactly where the
                // pre-activation was.
                Zip::from(&mut back).and(input).for_each(|d, &a| {
                    if a <= F::zero() {
                        *d = F::zero();
                    }
                });
                delta = back;
            }
            grads.push(Dense { w: gw, b: gb });
        }
        grads.reverse();
        Grads { layers: grads }
    }

    pub fn zero_grads(&self) -> Grads<F> {
        Grads {
            layers: self.layers.iter().map(Dense::zeros_like).collect(),
        }
    }

    pub fn cast<G: Scalar>(&self) -> Mlp<G> {
        let conv = |v: &F| G::from(*v).expect("representable");
        Mlp {
            layers: self
                .layers
                .iter()
                .map(|l| Dense {
                    w: l.w.map(conv),
                    b: l.b.map(conv),
                })
                .collect(),
        }
    }

    /// All parameters, layer by layer, weights (row-major) before biases.
    pub fn flatten(&self) -> Vec<F> {
        self.layers
            .iter()
            .flat_map(|l| l.w.iter().chain(l.b.iter()).copied())
            .collect()
    }

    /// Overwrites parameter `index` in [`Mlp::flatten`] order.
    pub fn set_param(&mut self, mut index: usize, value: F) {
        for l in &mut self.layers {
            let nw = l.w.len();
            if index < nw {
                let cols = l.w.ncols();
                l.w[(index / cols, index % cols)] = value;
                return;
            }
            index -= nw;
            if index < l.b.len() {
                l.b[index] = value;
                return;
            }
            index -= l.b.len();
        }
        panic!("parameter index out of range");
    }
}

fn affine<F: Scalar>(layer: &Dense<F>, x: ArrayView2<'_, F>) -> Array2<F> {
    let mut z = x.dot(&layer.w);
    z += &layer.b;
    z
}

/// Sum of squares with independent partial sums, so the loop vectorises.
fn sum_squares<F: Scalar>(v: &[F]) -> F {
    const LANES: usize = 16;
    let mut acc = [F::zero(); LANES];
    let chunks = v.chunks_exact(LANES);
    let tail = chunks.remainder();
    for c in chunks {
        for (a, &x) in acc.iter_mut().zip(c) {
            *a += x * x;
        }
    }
    let head = acc.iter().fold(F::zero(), |s, &a| s + a);
    tail.iter().fold(head, |s, &x| s + x * x)
}

fn relu<F: Scalar>(h: &mut Array2<F>) {
    h.mapv_inplace(|v| if v > F::zero() { v } else { F::zero() });
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn row_forward_matches_batch_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net: Mlp<f64> = Mlp::new_random(&[5, 32, 32, 7], &mut rng);
        for k in 0..20 {
            let x: Vec<f64> = (0..5).map(|i| ((k * 5 + i) as f64 * 0.37).sin() * 3.0).collect();
            let batch = net.forward(ArrayView2::from_shape((1, 5), &x).unwrap());
            let row = net.forward_row(&x);
            for (a, b) in batch.iter().zip(&row) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn forward_by_hand() {
        let net = Mlp::from_layers(vec![
            Dense {
                w: array![[1.0, -1.0], [2.0, 0.5]],
                b: array![0.0, 1.0],
            },
            Dense {
                w: array![[1.0], [3.0]],
                b: array![-0.5],
            },
        ])
        .unwrap();
        // Hidden pre-activations for x = [1, 1]: [3, 0.5]; for x = [-1, 0]: [-1, 2].
        let out = net.forward(array![[1.0, 1.0], [-1.0, 0.0]].view());
        assert_eq!(out, array![[3.0 + 1.5 - 0.5], [0.0 + 6.0 - 0.5]]);
    }

    #[test]
    fn init_bounds_and_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net: Mlp<f32> = Mlp::new_random(&[5, 16, 16, 7], &mut rng);
        assert_eq!(net.sizes(), vec![5, 16, 16, 7]);
        assert_eq!(net.num_params(), 5 * 16 + 16 + 16 * 16 + 16 + 16 * 7 + 7);
        let bound = 1.0 / 5f32.sqrt();
        assert!(net.layers()[0].w.iter().all(|v| v.abs() <= bound));
        assert!(Mlp::<f32>::from_layers(vec![Dense::zeros(2, 3), Dense::zeros(4, 1)]).is_none());
    }

    #[test]
    fn cached_forward_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net: Mlp<f64> = Mlp::new_random(&[3, 8, 4], &mut rng);
        let x = Array2::from_shape_fn((5, 3), |(i, j)| (i as f64 - 2.0) * 0.3 + j as f64 * 0.1);
        let (y, _) = net.forward_cached(x.view());
        assert_eq!(y, net.forward(x.view()));
    }

    #[test]
    fn set_param_follows_flatten_order() {
        let mut net: Mlp<f64> = Mlp::zeros(&[2, 3, 1]);
        let n = net.num_params();
        for i in 0..n {
            net.set_param(i, i as f64);
        }
        assert_eq!(net.flatten(), (0..n).map(|i| i as f64).collect::<Vec<_>>());
    }

    #[test]
    fn clipping_caps_the_norm() {
        let mut g = Grads {
            layers: vec![Dense {
                w: array![[3.0f64, 0.0]],
                b: array![0.0, 4.0],
            }],
        };
        assert_eq!(g.clip_global_norm(1.0), 5.0);
        assert!((g.global_norm() - 1.0).abs() < 1e-12);
    }
}
