//! Post-norm Transformer encoder with a per-token linear classifier, with
//! hand-written backpropagation.
//!
//! Each encoder layer computes
//! `y1 = LN(x + drop(MHA(x)))`, `y = LN(y1 + drop(W2 relu(W1 y1)))`.
//! The input is the embedding row plus a fixed sinusoidal position code.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array1, Array2, Array3, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingLayer;
use crate::vocab::{IGNORE, PAD};
use crate::{Error, Result};

const LN_EPS: f64 = 1e-5;

/// Examples per gradient accumulator. Fixed chunk boundaries and an ordered
/// reduction keep batch gradients bit-identical on any thread count.
const GRAD_CHUNK: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    RmsProp,
}

impl FromStr for OptimizerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adam" => Ok(OptimizerKind::Adam),
            "rmsprop" => Ok(OptimizerKind::RmsProp),
            _ => Err(Error::Config(format!("unknown optimizer {s:?} (adam, rmsprop)"))),
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::RmsProp => "rmsprop",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaggerConfig {
    pub layers: usize,
    pub heads: usize,
    pub model_dim: usize,
    pub ff_dim: usize,
    pub dropout: f64,
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            layers: 6,
            heads: 2,
            model_dim: 300,
            ff_dim: 1200,
            dropout: 0.1,
            optimizer: OptimizerKind::Adam,
            lr: 1e-3,
            batch_size: 64,
            epochs: 20,
            max_len: 128,
            seed: 0,
        }
    }
}

impl TaggerConfig {
    /// Structural checks only; the 6-12 layer / 2-6 head ranges belong to
    /// the search space, so miniature models stay constructible.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.layers == 0 || self.heads == 0 || self.model_dim == 0 || self.ff_dim == 0 {
            return fail("layers, heads, model_dim and ff_dim must be positive".into());
        }
        if !self.model_dim.is_multiple_of(self.heads) {
            return fail(format!(
                "{} heads do not divide model dimension {}",
                self.heads, self.model_dim
            ));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return fail(format!("learning rate must be positive, got {}", self.lr));
        }
        if self.batch_size == 0 || self.epochs == 0 || self.max_len == 0 {
            return fail("batch_size, epochs and max_len must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams {
    pub wq: Array2<f64>,
    pub wk: Array2<f64>,
    pub wv: Array2<f64>,
    pub wo: Array2<f64>,
    pub bq: Array1<f64>,
    pub bk: Array1<f64>,
    pub bv: Array1<f64>,
    pub bo: Array1<f64>,
    pub ln1_g: Array1<f64>,
    pub ln1_b: Array1<f64>,
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
    pub ln2_g: Array1<f64>,
    pub ln2_b: Array1<f64>,
}

pub const LAYER_TENSORS: [&str; 16] = [
    "wq", "wk", "wv", "wo", "bq", "bk", "bv", "bo", "ln1_g", "ln1_b", "w1", "b1", "w2", "b2",
    "ln2_g", "ln2_b",
];

fn xavier<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-bound..bound))
}

impl LayerParams {
    fn init<R: Rng + ?Sized>(d: usize, ff: usize, rng: &mut R) -> Self {
        LayerParams {
            wq: xavier(d, d, rng),
            wk: xavier(d, d, rng),
            wv: xavier(d, d, rng),
            wo: xavier(d, d, rng),
            bq: Array1::zeros(d),
            bk: Array1::zeros(d),
            bv: Array1::zeros(d),
            bo: Array1::zeros(d),
            ln1_g: Array1::ones(d),
            ln1_b: Array1::zeros(d),
            w1: xavier(d, ff, rng),
            b1: Array1::zeros(ff),
            w2: xavier(ff, d, rng),
            b2: Array1::zeros(d),
            ln2_g: Array1::ones(d),
            ln2_b: Array1::zeros(d),
        }
    }

    fn zeros(d: usize, ff: usize) -> Self {
        let m = |r, c| Array2::zeros((r, c));
        let v = |n| Array1::zeros(n);
        LayerParams {
            wq: m(d, d),
            wk: m(d, d),
            wv: m(d, d),
            wo: m(d, d),
            bq: v(d),
            bk: v(d),
            bv: v(d),
            bo: v(d),
            ln1_g: v(d),
            ln1_b: v(d),
            w1: m(d, ff),
            b1: v(ff),
            w2: m(ff, d),
            b2: v(d),
            ln2_g: v(d),
            ln2_b: v(d),
        }
    }

    fn slices(&self) -> [&[f64]; 16] {
        fn m(a: &Array2<f64>) -> &[f64] {
            a.as_slice().expect("standard layout")
        }
        fn v(a: &Array1<f64>) -> &[f64] {
            a.as_slice().expect("standard layout")
        }
        [
            m(&self.wq), m(&self.wk), m(&self.wv), m(&self.wo),
            v(&self.bq), v(&self.bk), v(&self.bv), v(&self.bo),
            v(&self.ln1_g), v(&self.ln1_b), m(&self.w1), v(&self.b1),
            m(&self.w2), v(&self.b2), v(&self.ln2_g), v(&self.ln2_b),
        ]
    }

    fn slices_mut(&mut self) -> [&mut [f64]; 16] {
        let LayerParams {
            wq, wk, wv, wo, bq, bk, bv, bo, ln1_g, ln1_b, w1, b1, w2, b2, ln2_g, ln2_b,
        } = self;
        [
            wq.as_slice_mut().unwrap(), wk.as_slice_mut().unwrap(),
            wv.as_slice_mut().unwrap(), wo.as_slice_mut().unwrap(),
            bq.as_slice_mut().unwrap(), bk.as_slice_mut().unwrap(),
            bv.as_slice_mut().unwrap(), bo.as_slice_mut().unwrap(),
            ln1_g.as_slice_mut().unwrap(), ln1_b.as_slice_mut().unwrap(),
            w1.as_slice_mut().unwrap(), b1.as_slice_mut().unwrap(),
            w2.as_slice_mut().unwrap(), b2.as_slice_mut().unwrap(),
            ln2_g.as_slice_mut().unwrap(), ln2_b.as_slice_mut().unwrap(),
        ]
    }
}

/// Encoder and classifier parameters (everything except the embedding table).
#[derive(Clone, Debug, PartialEq)]
pub struct Weights {
    pub layers: Vec<LayerParams>,
    pub wc: Array2<f64>,
    pub bc: Array1<f64>,
}

impl Weights {
    fn zeros_like(&self) -> Self {
        let (d, ff) = self.layers[0].w1.dim();
        Weights {
            layers: (0..self.layers.len()).map(|_| LayerParams::zeros(d, ff)).collect(),
            wc: Array2::zeros(self.wc.dim()),
            bc: Array1::zeros(self.bc.len()),
        }
    }

    /// Named flat views in a fixed order shared by weights, gradients and
    /// optimizer state.
    pub fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            for (name, t) in LAYER_TENSORS.iter().zip(layer.slices()) {
                out.push((format!("layer{l}.{name}"), t));
            }
        }
        out.push(("classifier.w".into(), self.wc.as_slice().unwrap()));
        out.push(("classifier.b".into(), self.bc.as_slice().unwrap()));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.layers {
            out.extend(layer.slices_mut());
        }
        out.push(self.wc.as_slice_mut().unwrap());
        out.push(self.bc.as_slice_mut().unwrap());
        out
    }

    fn add_assign(&mut self, other: &Weights) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.iter_mut().zip(b.1).for_each(|(x, y)| *x += y);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|x| x.is_finite()))
    }
}

/// Loss gradients. Embedding gradients are kept as (row, gradient) pairs,
/// one per token position, and are absent when the table is frozen.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub weights: Weights,
    pub embedding: Vec<(usize, Array1<f64>)>,
}

impl Gradients {
    /// Dense embedding gradient (rows summed).
    pub fn embedding_dense(&self, rows: usize, dim: usize) -> Array2<f64> {
        let mut out = Array2::zeros((rows, dim));
        for (r, g) in &self.embedding {
            let mut row = out.row_mut(*r);
            row += g;
        }
        out
    }
}

/// One token sequence: ids into the task vocabulary and label ids
/// (`IGNORE` where no target).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    pub ids: Vec<usize>,
    pub targets: Vec<usize>,
}

/// Padded batch: `ids` is `(batch, max length)` with `PAD` fill.
#[derive(Clone, Debug)]
pub struct Batch {
    pub ids: Array2<usize>,
    pub lengths: Vec<usize>,
}

impl Batch {
    pub fn pad(sequences: &[&[usize]]) -> Self {
        let t = sequences.iter().map(|s| s.len()).max().unwrap_or(0);
        let mut ids = Array2::from_elem((sequences.len(), t), PAD);
        for (b, seq) in sequences.iter().enumerate() {
            ids.slice_mut(s![b, ..seq.len()])
                .assign(&Array1::from(seq.to_vec()));
        }
        Batch {
            ids,
            lengths: sequences.iter().map(|s| s.len()).collect(),
        }
    }
}

pub fn sinusoidal_encoding(max_len: usize, dim: usize) -> Array2<f64> {
    Array2::from_shape_fn((max_len, dim), |(pos, i)| {
        let rate = 10_000f64.powf((2 * (i / 2)) as f64 / dim as f64);
        let angle = pos as f64 / rate;
        if i % 2 == 0 {
            angle.sin()
        } else {
            angle.cos()
        }
    })
}

pub struct TaggerModel {
    pub config: TaggerConfig,
    pub embedding: EmbeddingLayer,
    pub weights: Weights,
    pub num_labels: usize,
    positions: Array2<f64>,
}

impl Clone for TaggerModel {
    fn clone(&self) -> Self {
        TaggerModel {
            config: self.config.clone(),
            embedding: self.embedding.clone(),
            weights: self.weights.clone(),
            num_labels: self.num_labels,
            positions: self.positions.clone(),
        }
    }
}

struct LnCache {
    xhat: Array2<f64>,
    inv: Array1<f64>,
}

fn ln_forward(z: &Array2<f64>, g: &Array1<f64>, b: &Array1<f64>) -> (Array2<f64>, LnCache) {
    let d = z.ncols() as f64;
    let mut xhat = z.clone();
    let mut inv = Array1::zeros(z.nrows());
    for (mut row, iv) in xhat.axis_iter_mut(Axis(0)).zip(inv.iter_mut()) {
        let mean = row.sum() / d;
        let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / d;
        *iv = 1.0 / (var + LN_EPS).sqrt();
        row.mapv_inplace(|x| (x - mean) * *iv);
    }
    let y = &xhat * g + b;
    (y, LnCache { xhat, inv })
}

fn ln_backward(
    dy: &Array2<f64>,
    c: &LnCache,
    g: &Array1<f64>,
    dg: &mut Array1<f64>,
    db: &mut Array1<f64>,
) -> Array2<f64> {
    *dg += &(dy * &c.xhat).sum_axis(Axis(0));
    *db += &dy.sum_axis(Axis(0));
    let dxhat = dy * g;
    let d = dy.ncols() as f64;
    let mut dx = Array2::zeros(dy.dim());
    Zip::from(dx.rows_mut())
        .and(dxhat.rows())
        .and(c.xhat.rows())
        .and(&c.inv)
        .for_each(|mut out, dh, xh, &iv| {
            let m1 = dh.sum() / d;
            let m2 = dh.dot(&xh) / d;
            Zip::from(&mut out)
                .and(&dh)
                .and(&xh)
                .for_each(|o, &a, &x| *o = iv * (a - m1 - x * m2));
        });
    dx
}

/// Masked row-wise softmax: columns at or beyond `valid` get weight 0.
fn masked_softmax(scores: &mut Array2<f64>, valid: usize) {
    for mut row in scores.rows_mut() {
        let max = row
            .slice(s![..valid])
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for (j, x) in row.iter_mut().enumerate() {
            if j < valid {
                *x = (*x - max).exp();
                sum += *x;
            } else {
                *x = 0.0;
            }
        }
        row.slice_mut(s![..valid]).mapv_inplace(|x| x / sum);
    }
}

fn dropout_mask(shape: (usize, usize), p: f64, rng: Option<&mut ChaCha8Rng>) -> Option<Array2<f64>> {
    let rng = rng?;
    if p == 0.0 {
        return None;
    }
    let keep = 1.0 / (1.0 - p);
    Some(Array2::from_shape_simple_fn(shape, || {
        if rng.random::<f64>() < p {
            0.0
        } else {
            keep
        }
    }))
}

struct LayerCache {
    x: Array2<f64>,
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    probs: Vec<Array2<f64>>,
    ctx: Array2<f64>,
    drop1: Option<Array2<f64>>,
    ln1: LnCache,
    y1: Array2<f64>,
    hpre: Array2<f64>,
    h: Array2<f64>,
    drop2: Option<Array2<f64>>,
    ln2: LnCache,
}

struct Trace {
    ids: Vec<usize>,
    layers: Vec<LayerCache>,
    top: Array2<f64>,
    logits: Array2<f64>,
}

impl TaggerModel {
    pub fn new<R: Rng + ?Sized>(
        config: TaggerConfig,
        embedding: EmbeddingLayer,
        num_labels: usize,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        if embedding.dim() != config.model_dim {
            return Err(Error::Config(format!(
                "embedding dimension {} differs from model dimension {}",
                embedding.dim(),
                config.model_dim
            )));
        }
        if num_labels == 0 {
            return Err(Error::Config("at least one label is required".into()));
        }
        let d = config.model_dim;
        let weights = Weights {
            layers: (0..config.layers)
                .map(|_| LayerParams::init(d, config.ff_dim, rng))
                .collect(),
            wc: xavier(d, num_labels, rng),
            bc: Array1::zeros(num_labels),
        };
        Self::from_parts(config, embedding, weights)
    }

    pub(crate) fn from_parts(
        config: TaggerConfig,
        embedding: EmbeddingLayer,
        weights: Weights,
    ) -> Result<Self> {
        let num_labels = weights.bc.len();
        let positions = sinusoidal_encoding(config.max_len, config.model_dim);
        Ok(TaggerModel {
            config,
            embedding,
            weights,
            num_labels,
            positions,
        })
    }

    fn forward(&self, ids: &[usize], valid: usize, mut rng: Option<&mut ChaCha8Rng>) -> Trace {
        let cfg = &self.config;
        let (t, d) = (ids.len(), cfg.model_dim);
        let dk = d / cfg.heads;
        let scale = 1.0 / (dk as f64).sqrt();
        let table = &self.embedding.table;
        let mut x = Array2::from_shape_fn((t, d), |(i, j)| table[[ids[i], j]] + self.positions[[i, j]]);
        let mut caches = Vec::with_capacity(cfg.layers);
        for p in &self.weights.layers {
            let q = x.dot(&p.wq) + &p.bq;
            let k = x.dot(&p.wk) + &p.bk;
            let v = x.dot(&p.wv) + &p.bv;
            let mut ctx = Array2::zeros((t, d));
            let mut probs = Vec::with_capacity(cfg.heads);
            for h in 0..cfg.heads {
                let r = s![.., h * dk..(h + 1) * dk];
                let mut sc = q.slice(r).dot(&k.slice(r).t()) * scale;
                masked_softmax(&mut sc, valid);
                ctx.slice_mut(r).assign(&sc.dot(&v.slice(r)));
                probs.push(sc);
            }
            let mut a = ctx.dot(&p.wo) + &p.bo;
            let drop1 = dropout_mask((t, d), cfg.dropout, rng.as_deref_mut());
            if let Some(m) = &drop1 {
                a *= m;
            }
            let (y1, ln1) = ln_forward(&(&x + &a), &p.ln1_g, &p.ln1_b);
            let hpre = y1.dot(&p.w1) + &p.b1;
            let h = hpre.mapv(|z| z.max(0.0));
            let mut f = h.dot(&p.w2) + &p.b2;
            let drop2 = dropout_mask((t, d), cfg.dropout, rng.as_deref_mut());
            if let Some(m) = &drop2 {
                f *= m;
            }
            let (y2, ln2) = ln_forward(&(&y1 + &f), &p.ln2_g, &p.ln2_b);
            caches.push(LayerCache {
                x,
                q,
                k,
                v,
                probs,
                ctx,
                drop1,
                ln1,
                y1,
                hpre,
                h,
                drop2,
                ln2,
            });
            x = y2;
        }
        let logits = x.dot(&self.weights.wc) + &self.weights.bc;
        Trace {
            ids: ids.to_vec(),
            layers: caches,
            top: x,
            logits,
        }
    }

    fn backward(&self, trace: &Trace, dlogits: &Array2<f64>, grads: &mut Gradients) {
        let cfg = &self.config;
        let d = cfg.model_dim;
        let dk = d / cfg.heads;
        let scale = 1.0 / (dk as f64).sqrt();
        let w = &self.weights;
        let gw = &mut grads.weights;
        gw.wc += &trace.top.t().dot(dlogits);
        gw.bc += &dlogits.sum_axis(Axis(0));
        let mut dy = dlogits.dot(&w.wc.t());

        for (l, c) in trace.layers.iter().enumerate().rev() {
            let p = &w.layers[l];
            let g = &mut gw.layers[l];
            // feed-forward sublayer
            let dz2 = ln_backward(&dy, &c.ln2, &p.ln2_g, &mut g.ln2_g, &mut g.ln2_b);
            let mut dy1 = dz2.clone();
            let mut df = dz2;
            if let Some(m) = &c.drop2 {
                df *= m;
            }
            g.w2 += &c.h.t().dot(&df);
            g.b2 += &df.sum_axis(Axis(0));
            let mut dh = df.dot(&p.w2.t());
            Zip::from(&mut dh).and(&c.hpre).for_each(|g, &z| {
                if z <= 0.0 {
                    *g = 0.0
                }
            });
            g.w1 += &c.y1.t().dot(&dh);
            g.b1 += &dh.sum_axis(Axis(0));
            dy1 += &dh.dot(&p.w1.t());

            // attention sublayer
            let dz1 = ln_backward(&dy1, &c.ln1, &p.ln1_g, &mut g.ln1_g, &mut g.ln1_b);
            let mut dx = dz1.clone();
            let mut da = dz1;
            if let Some(m) = &c.drop1 {
                da *= m;
            }
            g.wo += &c.ctx.t().dot(&da);
            g.bo += &da.sum_axis(Axis(0));
            let dctx = da.dot(&p.wo.t());
            let mut dq = Array2::zeros(c.q.dim());
            let mut dkm = Array2::zeros(c.k.dim());
            let mut dv = Array2::zeros(c.v.dim());
            for (h, pr) in c.probs.iter().enumerate() {
                let r = s![.., h * dk..(h + 1) * dk];
                let dc = dctx.slice(r);
                dv.slice_mut(r).assign(&pr.t().dot(&dc));
                let dp = dc.dot(&c.v.slice(r).t());
                let mut ds = &dp * pr;
                let rowsum = ds.sum_axis(Axis(1));
                Zip::from(ds.rows_mut())
                    .and(pr.rows())
                    .and(&rowsum)
                    .for_each(|mut dsr, pr, &sm| {
                        Zip::from(&mut dsr).and(&pr).for_each(|x, &pv| *x -= pv * sm);
                    });
                ds *= scale;
                dq.slice_mut(r).assign(&ds.dot(&c.k.slice(r)));
                dkm.slice_mut(r).assign(&ds.t().dot(&c.q.slice(r)));
            }
            for (dm, wm, gwm, gbm) in [
                (&dq, &p.wq, &mut g.wq, &mut g.bq),
                (&dkm, &p.wk, &mut g.wk, &mut g.bk),
                (&dv, &p.wv, &mut g.wv, &mut g.bv),
            ] {
                *gwm += &c.x.t().dot(dm);
                *gbm += &dm.sum_axis(Axis(0));
                dx += &dm.dot(&wm.t());
            }
            dy = dx;
        }
        if !self.embedding.frozen {
            for (i, &id) in trace.ids.iter().enumerate() {
                grads.embedding.push((id, dy.row(i).to_owned()));
            }
        }
    }

    fn truncate<'a>(&self, ids: &'a [usize]) -> &'a [usize] {
        if ids.len() > self.config.max_len {
            log::warn!(
                "sequence of {} tokens truncated to {}",
                ids.len(),
                self.config.max_len
            );
            &ids[..self.config.max_len]
        } else {
            ids
        }
    }

    /// Logits of shape `(batch, length, labels)`. Padding positions get
    /// logits too but never influence real positions.
    pub fn encode(&self, batch: &Batch) -> Array3<f64> {
        let (b, t) = batch.ids.dim();
        let t = t.min(self.config.max_len);
        let mut out = Array3::zeros((b, t, self.num_labels));
        let rows: Vec<Array2<f64>> = (0..b)
            .into_par_iter()
            .map(|i| {
                let ids = batch.ids.row(i).to_vec();
                let ids = self.truncate(&ids);
                let valid = batch.lengths[i].min(t).max(1);
                self.forward(ids, valid, None).logits
            })
            .collect();
        for (i, r) in rows.into_iter().enumerate() {
            out.slice_mut(s![i, .., ..]).assign(&r);
        }
        out
    }

    /// Attention weights `[sequence][layer][head]`, each `(length, length)`.
    pub fn attention(&self, batch: &Batch) -> Vec<Vec<Vec<Array2<f64>>>> {
        let t = batch.ids.ncols().min(self.config.max_len);
        (0..batch.ids.nrows())
            .map(|i| {
                let ids = batch.ids.row(i).to_vec();
                let valid = batch.lengths[i].min(t).max(1);
                self.forward(&ids[..t], valid, None)
                    .layers
                    .into_iter()
                    .map(|c| c.probs)
                    .collect()
            })
            .collect()
    }

    /// Most likely label per token; positions beyond `max_len` get label 0.
    pub fn predict(&self, ids: &[usize]) -> Vec<usize> {
        if ids.is_empty() {
            return Vec::new();
        }
        let kept = self.truncate(ids);
        let logits = self.forward(kept, kept.len(), None).logits;
        let mut out: Vec<usize> = logits
            .rows()
            .into_iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (j, &x)| if x > best.1 { (j, x) } else { best })
                    .0
            })
            .collect();
        out.resize(ids.len(), 0);
        out
    }

    /// Summed cross-entropy and number of scored tokens for one example.
    fn example_loss(&self, ex: &Example, rng: Option<&mut ChaCha8Rng>) -> (f64, usize, Trace) {
        let ids = self.truncate(&ex.ids);
        let trace = self.forward(ids, ids.len(), rng);
        let mut loss = 0.0;
        let mut n = 0;
        for (row, &t) in trace.logits.rows().into_iter().zip(&ex.targets) {
            if t == IGNORE {
                continue;
            }
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
            loss += lse - row[t];
            n += 1;
        }
        (loss, n, trace)
    }

    fn scored(&self, ex: &Example) -> usize {
        ex.targets
            .iter()
            .take(self.config.max_len)
            .filter(|&&t| t != IGNORE)
            .count()
    }

    /// Mean token cross-entropy over `examples` (no dropout).
    pub fn loss(&self, examples: &[Example]) -> f64 {
        let parts: Vec<(f64, usize)> = examples
            .par_iter()
            .map(|ex| {
                let (l, n, _) = self.example_loss(ex, None);
                (l, n)
            })
            .collect();
        let (sum, n) = parts.iter().fold((0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    /// Mean token cross-entropy and its gradient. Without `dropout_seed` the
    /// forward pass is deterministic (no dropout); with it, example `i` uses
    /// a dropout stream derived from the seed and `i`.
    pub fn loss_and_gradients(
        &self,
        examples: &[Example],
        dropout_seed: Option<u64>,
    ) -> (f64, Gradients) {
        let total: usize = examples.iter().map(|e| self.scored(e)).sum();
        let denom = total.max(1) as f64;
        let chunk = GRAD_CHUNK;
        let parts: Vec<(f64, Gradients)> = examples
            .par_chunks(chunk)
            .enumerate()
            .map(|(ci, exs)| {
                let mut g = Gradients {
                    weights: self.weights.zeros_like(),
                    embedding: Vec::new(),
                };
                let mut loss = 0.0;
                for (k, ex) in exs.iter().enumerate() {
                    let mut rng = dropout_seed.map(|s| {
                        ChaCha8Rng::seed_from_u64(embkit_core::seed::derive(
                            s,
                            "dropout",
                            (ci * chunk + k) as u64,
                        ))
                    });
                    let (l, _, trace) = self.example_loss(ex, rng.as_mut());
                    loss += l;
                    let mut dl = trace.logits.clone();
                    for (mut row, &t) in dl.rows_mut().into_iter().zip(&ex.targets) {
                        if t == IGNORE {
                            row.fill(0.0);
                            continue;
                        }
                        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        row.mapv_inplace(|x| (x - max).exp());
                        let sum = row.sum();
                        row.mapv_inplace(|x| x / sum / denom);
                        row[t] -= 1.0 / denom;
                    }
                    self.backward(&trace, &dl, &mut g);
                }
                (loss, g)
            })
            .collect();
        let mut iter = parts.into_iter();
        let (mut loss, mut grads) = iter.next().unwrap_or_else(|| {
            (
                0.0,
                Gradients {
                    weights: self.weights.zeros_like(),
                    embedding: Vec::new(),
                },
            )
        });
        for (l, g) in iter {
            loss += l;
            grads.weights.add_assign(&g.weights);
            grads.embedding.extend(g.embedding);
        }
        (loss / denom, grads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_norm_rows_are_standardized() {
        let z = Array2::from_shape_fn((3, 5), |(i, j)| (i * 7 + j * j) as f64);
        let (y, _) = ln_forward(&z, &Array1::ones(5), &Array1::zeros(5));
        for row in y.rows() {
            assert!(row.sum().abs() < 1e-9);
            let var = row.iter().map(|x| x * x).sum::<f64>() / 5.0;
            assert!((var - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn masked_softmax_ignores_tail() {
        let mut s = Array2::from_shape_fn((2, 4), |(i, j)| (i + j) as f64);
        masked_softmax(&mut s, 3);
        for row in s.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
            assert_eq!(row[3], 0.0);
        }
    }

    #[test]
    fn config_validation() {
        assert!(TaggerConfig::default().validate().is_ok());
        for heads in 2..=6 {
            let c = TaggerConfig { heads, ..TaggerConfig::default() };
            assert!(c.validate().is_ok(), "{heads} heads");
        }
        let c = TaggerConfig { heads: 7, ..TaggerConfig::default() };
        assert!(c.validate().is_err());
        let c = TaggerConfig { dropout: 1.0, ..TaggerConfig::default() };
        assert!(c.validate().is_err());
        assert_eq!("RMSProp".parse::<OptimizerKind>().unwrap(), OptimizerKind::RmsProp);
    }
}
