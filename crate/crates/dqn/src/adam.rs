use ndarray::Zip;

use crate::mlp::{Dense, Grads, Mlp, Scalar};

/// Adam with bias correction, in the form used by most deep learning
/// libraries: `p -= lr * m_hat / (sqrt(v_hat) + eps)`.
#[derive(Debug, Clone)]
pub struct Adam<F> {
    pub lr: F,
    pub beta1: F,
    pub beta2: F,
    pub eps: F,
    t: i32,
    m: Vec<Dense<F>>,
    v: Vec<Dense<F>>,
}

impl<F: Scalar> Adam<F> {
    pub fn new(net: &Mlp<F>, lr: F) -> Self {
        let zeros = || net.layers().iter().map(Dense::zeros_like).collect();
        Self {
            lr,
            beta1: F::from(0.9).unwrap(),
            beta2: F::from(0.999).unwrap(),
            eps: F::from(1e-8).unwrap(),
            t: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    pub fn step(&mut self, net: &mut Mlp<F>, grads: &Grads<F>) {
        self.t += 1;
        let (b1, b2, eps, lr) = (self.beta1, self.beta2, self.eps, self.lr);
        let one = F::one();
        let c1 = one - b1.powi(self.t);
        let c2 = one - b2.powi(self.t);
        let step = lr / c1;
        let inv_c2 = one / c2;
        let update = |p: &mut F, m: &mut F, v: &mut F, &g: &F| {
            *m = b1 * *m + (one - b1) * g;
            *v = b2 * *v + (one - b2) * g * g;
            *p = *p - step * *m / ((*v * inv_c2).sqrt() + eps);
        };
        for (((layer, m), v), g) in net
            .layers_mut()
            .iter_mut()
            .zip(&mut self.m)
            .zip(&mut self.v)
            .zip(&grads.layers)
        {
            Zip::from(&mut layer.w)
                .and(&mut m.w)
                .and(&mut v.w)
                .and(&g.w)
                .for_each(update);
            Zip::from(&mut layer.b)
                .and(&mut m.b)
                .and(&mut v.b)
                .and(&g.b)
                .for_each(update);
        }
    }
}
