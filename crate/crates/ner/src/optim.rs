use crate::model::{Gradients, OptimizerKind, TaggerModel};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const RMSPROP_DECAY: f64 = 0.99;
pub const EPSILON: f64 = 1e-8;

/// Adam or RMSProp over every trainable tensor of a [`TaggerModel`]. A
/// frozen embedding table is never touched.
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    step: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64) -> Self {
        Optimizer {
            kind,
            lr,
            step: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    fn update(&mut self, slot: usize, param: &mut [f64], grad: &[f64]) {
        if self.second.len() <= slot {
            self.first.resize(slot + 1, Vec::new());
            self.second.resize(slot + 1, Vec::new());
        }
        let v = &mut self.second[slot];
        if v.is_empty() {
            v.resize(param.len(), 0.0);
        }
        match self.kind {
            OptimizerKind::Adam => {
                let m = &mut self.first[slot];
                if m.is_empty() {
                    m.resize(param.len(), 0.0);
                }
                let t = self.step as i32;
                let c1 = 1.0 - ADAM_BETA1.powi(t);
                let c2 = 1.0 - ADAM_BETA2.powi(t);
                for i in 0..param.len() {
                    let g = grad[i];
                    m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g;
                    v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g * g;
                    let mhat = m[i] / c1;
                    let vhat = v[i] / c2;
                    param[i] -= self.lr * mhat / (vhat.sqrt() + EPSILON);
                }
            }
            OptimizerKind::RmsProp => {
                for i in 0..param.len() {
                    let g = grad[i];
                    v[i] = RMSPROP_DECAY * v[i] + (1.0 - RMSPROP_DECAY) * g * g;
                    param[i] -= self.lr * g / (v[i].sqrt() + EPSILON);
                }
            }
        }
    }

    pub fn step(&mut self, model: &mut TaggerModel, grads: &Gradients) {
        self.step += 1;
        let grad_tensors = grads.weights.tensors();
        let n = grad_tensors.len();
        for (slot, (param, (_, grad))) in model
            .weights
            .tensors_mut()
            .into_iter()
            .zip(grad_tensors)
            .enumerate()
        {
            self.update(slot, param, grad);
        }
        if !model.embedding.frozen {
            let (rows, dim) = model.embedding.table.dim();
            let dense = grads.embedding_dense(rows, dim);
            let table = model.embedding.table.as_slice_mut().expect("standard layout");
            self.update(n, table, dense.as_slice().expect("standard layout"));
        }
    }
}
