//! Adam with the usual bias correction (betas 0.9/0.999, eps 1e-8).

use ndarray::{Array1, Array2};

use super::mlp::{Mlp, MlpGrads};

#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m_w: Vec<Array2<f64>>,
    v_w: Vec<Array2<f64>>,
    m_b: Vec<Array1<f64>>,
    v_b: Vec<Array1<f64>>,
}

impl Adam {
    pub fn new(net: &Mlp, lr: f64) -> Self {
        let shapes = net.layer_shapes();
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m_w: shapes.iter().map(|&s| Array2::zeros(s)).collect(),
            v_w: shapes.iter().map(|&s| Array2::zeros(s)).collect(),
            m_b: shapes.iter().map(|&(o, _)| Array1::zeros(o)).collect(),
            v_b: shapes.iter().map(|&(o, _)| Array1::zeros(o)).collect(),
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr
    }

    /// One descent step along `grads` (pass the negated gradient to
    /// ascend).
    pub fn step(&mut self, net: &mut Mlp, grads: &MlpGrads) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let mut delta_w = Vec::with_capacity(grads.w.len());
        let mut delta_b = Vec::with_capacity(grads.b.len());
        for k in 0..grads.w.len() {
            self.m_w[k].zip_mut_with(&grads.w[k], |m, g| {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g
            });
            self.v_w[k].zip_mut_with(&grads.w[k], |v, g| {
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g
            });
            let mut dw = self.m_w[k].clone();
            dw.zip_mut_with(&self.v_w[k], |m, v| {
                *m = -self.lr * (*m / bc1) / ((v / bc2).sqrt() + self.eps)
            });
            delta_w.push(dw);

            self.m_b[k].zip_mut_with(&grads.b[k], |m, g| {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g
            });
            self.v_b[k].zip_mut_with(&grads.b[k], |v, g| {
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g
            });
            let mut db = self.m_b[k].clone();
            db.zip_mut_with(&self.v_b[k], |m, v| {
                *m = -self.lr * (*m / bc1) / ((v / bc2).sqrt() + self.eps)
            });
            delta_b.push(db);
        }
        net.apply_update(&delta_w, &delta_b);
    }
}
