//! A small pre-LayerNorm transformer encoder for token classification,
//! with hand-written backpropagation.
//!
//! One sequence is processed at a time (batching is a loop with gradient
//! accumulation), so no padding or attention masking is needed. All math is
//! f64; model sizes here are small enough that numeric robustness is worth
//! more than throughput.

use ndarray::{s, Array2, Axis};
use rand::rngs::StdRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_EPS: f64 = 1e-12;
const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044_715;

/// Architecture hyperparameters. `dim` must divide evenly into `n_heads`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub dim: usize,
    pub n_heads: usize,
    pub ff_dim: usize,
    pub n_layers: usize,
    pub max_positions: usize,
}

impl EncoderSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.n_heads == 0 || self.ff_dim == 0 || self.n_layers == 0 {
            return Err(Error::Config("encoder dimensions must be nonzero".into()));
        }
        if !self.dim.is_multiple_of(self.n_heads) {
            return Err(Error::Config(format!(
                "encoder dim {} is not divisible by {} heads",
                self.dim, self.n_heads
            )));
        }
        if self.max_positions == 0 {
            return Err(Error::Config("encoder needs at least one position".into()));
        }
        Ok(())
    }
}

// Flat tensor layout: embeddings, embedding LayerNorm, 16 tensors per
// layer, final LayerNorm, classification head. The order is part of the
// weights file format.
const T_TOK: usize = 0;
const T_POS: usize = 1;
const T_EMB_G: usize = 2;
const T_EMB_B: usize = 3;
const LAYER_BASE: usize = 4;
const PER_LAYER: usize = 16;
const L_LN1_G: usize = 0;
const L_LN1_B: usize = 1;
const L_WQ: usize = 2;
const L_BQ: usize = 3;
const L_WK: usize = 4;
const L_BK: usize = 5;
const L_WV: usize = 6;
const L_BV: usize = 7;
const L_WO: usize = 8;
const L_BO: usize = 9;
const L_LN2_G: usize = 10;
const L_LN2_B: usize = 11;
const L_FF_W1: usize = 12;
const L_FF_B1: usize = 13;
const L_FF_W2: usize = 14;
const L_FF_B2: usize = 15;

const LAYER_TENSOR_NAMES: [&str; PER_LAYER] = [
    "ln1_g", "ln1_b", "wq", "bq", "wk", "bk", "wv", "bv", "wo", "bo", "ln2_g", "ln2_b", "ff_w1",
    "ff_b1", "ff_w2", "ff_b2",
];

/// All trainable tensors of one encoder, in the fixed layout above.
#[derive(Debug, Clone)]
pub struct EncoderParams {
    pub spec: EncoderSpec,
    pub vocab_size: usize,
    pub n_labels: usize,
    pub tensors: Vec<Array2<f64>>,
}

impl EncoderParams {
    /// Random initialization: weights and embeddings from N(0, 0.02²),
    /// biases zero, LayerNorm gains one.
    pub fn init(spec: EncoderSpec, vocab_size: usize, n_labels: usize, rng: &mut StdRng) -> Result<Self> {
        spec.validate()?;
        if vocab_size == 0 || n_labels == 0 {
            return Err(Error::Config(
                "encoder needs a nonempty vocabulary and label set".into(),
            ));
        }
        let normal = Normal::new(0.0, 0.02).expect("finite std");
        let mut rand2 = |r: usize, c: usize| Array2::from_shape_fn((r, c), |_| normal.sample(rng));
        let d = spec.dim;

        let mut tensors = Vec::with_capacity(LAYER_BASE + spec.n_layers * PER_LAYER + 4);
        tensors.push(rand2(vocab_size, d));
        tensors.push(rand2(spec.max_positions, d));
        tensors.push(Array2::ones((1, d)));
        tensors.push(Array2::zeros((1, d)));
        for _ in 0..spec.n_layers {
            tensors.push(Array2::ones((1, d))); // ln1_g
            tensors.push(Array2::zeros((1, d))); // ln1_b
            for _ in 0..4 {
                tensors.push(rand2(d, d)); // wq/wk/wv/wo interleaved with biases below
                tensors.push(Array2::zeros((1, d)));
            }
            tensors.push(Array2::ones((1, d))); // ln2_g
            tensors.push(Array2::zeros((1, d))); // ln2_b
            tensors.push(rand2(d, spec.ff_dim));
            tensors.push(Array2::zeros((1, spec.ff_dim)));
            tensors.push(rand2(spec.ff_dim, d));
            tensors.push(Array2::zeros((1, d)));
        }
        tensors.push(Array2::ones((1, d))); // final_ln_g
        tensors.push(Array2::zeros((1, d))); // final_ln_b
        tensors.push(rand2(d, n_labels)); // head_w
        tensors.push(Array2::zeros((1, n_labels))); // head_b

        Ok(EncoderParams {
            spec,
            vocab_size,
            n_labels,
            tensors,
        })
    }

    fn layer(&self, l: usize, off: usize) -> &Array2<f64> {
        &self.tensors[LAYER_BASE + l * PER_LAYER + off]
    }

    fn tail(&self, off: usize) -> &Array2<f64> {
        let base = LAYER_BASE + self.spec.n_layers * PER_LAYER;
        &self.tensors[base + off]
    }

    /// Zero gradient buffers matching this parameter set tensor-for-tensor.
    pub fn zero_grads(&self) -> Vec<Array2<f64>> {
        self.tensors
            .iter()
            .map(|t| Array2::zeros(t.raw_dim()))
            .collect()
    }

    /// Stable tensor names, index-aligned with `tensors`; part of the
    /// weights file format.
    pub fn tensor_names(&self) -> Vec<String> {
        let mut names = vec![
            "tok_emb".to_string(),
            "pos_emb".to_string(),
            "emb_ln_g".to_string(),
            "emb_ln_b".to_string(),
        ];
        for l in 0..self.spec.n_layers {
            for t in LAYER_TENSOR_NAMES {
                names.push(format!("layer{l}.{t}"));
            }
        }
        for t in ["final_ln_g", "final_ln_b", "head_w", "head_b"] {
            names.push(t.to_string());
        }
        names
    }

    pub fn n_parameters(&self) -> usize {
        self.tensors.iter().map(|t| t.len()).sum()
    }

    /// True for tensors that weight decay should touch: real weight
    /// matrices, not biases or LayerNorm parameters.
    pub fn decay_mask(&self) -> Vec<bool> {
        let names = self.tensor_names();
        self.tensors
            .iter()
            .zip(&names)
            .map(|(t, name)| t.nrows() > 1 && !name.contains("ln"))
            .collect()
    }
}

struct LnCache {
    x_hat: Array2<f64>,
    rstd: Array2<f64>, // S×1
}

fn layer_norm(x: &Array2<f64>, g: &Array2<f64>, b: &Array2<f64>) -> (Array2<f64>, LnCache) {
    let mean = x.mean_axis(Axis(1)).expect("nonzero dim").insert_axis(Axis(1));
    let centered = x - &mean;
    let var = centered
        .mapv(|v| v * v)
        .mean_axis(Axis(1))
        .expect("nonzero dim")
        .insert_axis(Axis(1));
    let rstd = var.mapv(|v| 1.0 / (v + LN_EPS).sqrt());
    let x_hat = &centered * &rstd;
    let out = &x_hat * g + b;
    (out, LnCache { x_hat, rstd })
}

fn layer_norm_bwd(
    dy: &Array2<f64>,
    cache: &LnCache,
    g: &Array2<f64>,
) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
    let db = dy.sum_axis(Axis(0)).insert_axis(Axis(0));
    let dg = (dy * &cache.x_hat).sum_axis(Axis(0)).insert_axis(Axis(0));
    let dx_hat = dy * g;
    let m1 = dx_hat
        .mean_axis(Axis(1))
        .expect("nonzero dim")
        .insert_axis(Axis(1));
    let m2 = (&dx_hat * &cache.x_hat)
        .mean_axis(Axis(1))
        .expect("nonzero dim")
        .insert_axis(Axis(1));
    let dx = (&dx_hat - &m1 - &(&cache.x_hat * &m2)) * &cache.rstd;
    (dx, dg, db)
}

fn linear(x: &Array2<f64>, w: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    x.dot(w) + b
}

fn linear_bwd(
    dy: &Array2<f64>,
    x: &Array2<f64>,
    w: &Array2<f64>,
) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
    let dx = dy.dot(&w.t());
    let dw = x.t().dot(dy);
    let db = dy.sum_axis(Axis(0)).insert_axis(Axis(0));
    (dx, dw, db)
}

fn softmax_rows(x: &Array2<f64>) -> Array2<f64> {
    let mut out = x.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

fn softmax_rows_bwd(p: &Array2<f64>, dp: &Array2<f64>) -> Array2<f64> {
    let dot = (p * dp).sum_axis(Axis(1)).insert_axis(Axis(1));
    p * &(dp - &dot)
}

fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh())
}

fn gelu_grad(x: f64) -> f64 {
    let t = (GELU_C * (x + GELU_A * x * x * x)).tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
}

struct LayerCache {
    x_in: Array2<f64>,
    ln1: LnCache,
    ln1_out: Array2<f64>,
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    probs: Vec<Array2<f64>>, // one S×S matrix per head
    ctx: Array2<f64>,
    ln2: LnCache,
    ln2_out: Array2<f64>,
    ff_pre: Array2<f64>,
    ff_act: Array2<f64>,
}

/// Everything the backward pass needs, kept per sequence.
pub struct Cache {
    ids: Vec<usize>,
    emb_ln: LnCache,
    layers: Vec<LayerCache>,
    final_ln: LnCache,
    final_out: Array2<f64>,
}

/// Runs the encoder over one id sequence; returns per-position label
/// logits (S×n_labels) and the cache for a backward pass.
pub fn forward(params: &EncoderParams, ids: &[usize]) -> Result<(Array2<f64>, Cache)> {
    let spec = params.spec;
    let s_len = ids.len();
    if s_len == 0 {
        return Err(Error::Model("encoder called on an empty sequence".into()));
    }
    if s_len > spec.max_positions {
        return Err(Error::Model(format!(
            "sequence of {s_len} subtokens exceeds the {} position limit",
            spec.max_positions
        )));
    }
    if let Some(&bad) = ids.iter().find(|&&id| id >= params.vocab_size) {
        return Err(Error::Model(format!(
            "subtoken id {bad} outside vocabulary of {}",
            params.vocab_size
        )));
    }

    let d = spec.dim;
    let mut x = Array2::zeros((s_len, d));
    for (pos, &id) in ids.iter().enumerate() {
        let row = &params.tensors[T_TOK].row(id) + &params.tensors[T_POS].row(pos);
        x.row_mut(pos).assign(&row);
    }
    let (x0, emb_ln) = layer_norm(&x, &params.tensors[T_EMB_G], &params.tensors[T_EMB_B]);

    let n_heads = spec.n_heads;
    let dh = d / n_heads;
    let scale = 1.0 / (dh as f64).sqrt();

    let mut layers = Vec::with_capacity(spec.n_layers);
    let mut x = x0;
    for l in 0..spec.n_layers {
        let (ln1_out, ln1) = layer_norm(&x, params.layer(l, L_LN1_G), params.layer(l, L_LN1_B));
        let q = linear(&ln1_out, params.layer(l, L_WQ), params.layer(l, L_BQ));
        let k = linear(&ln1_out, params.layer(l, L_WK), params.layer(l, L_BK));
        let v = linear(&ln1_out, params.layer(l, L_WV), params.layer(l, L_BV));

        let mut ctx = Array2::zeros((s_len, d));
        let mut probs = Vec::with_capacity(n_heads);
        for head in 0..n_heads {
            let cols = s![.., head * dh..(head + 1) * dh];
            let scores = q.slice(cols).dot(&k.slice(cols).t()) * scale;
            let p = softmax_rows(&scores);
            ctx.slice_mut(cols).assign(&p.dot(&v.slice(cols)));
            probs.push(p);
        }
        let attn_out = linear(&ctx, params.layer(l, L_WO), params.layer(l, L_BO));
        let h_mid = &x + &attn_out;

        let (ln2_out, ln2) =
            layer_norm(&h_mid, params.layer(l, L_LN2_G), params.layer(l, L_LN2_B));
        let ff_pre = linear(&ln2_out, params.layer(l, L_FF_W1), params.layer(l, L_FF_B1));
        let ff_act = ff_pre.mapv(gelu);
        let ff_out = linear(&ff_act, params.layer(l, L_FF_W2), params.layer(l, L_FF_B2));
        let x_out = &h_mid + &ff_out;

        layers.push(LayerCache {
            x_in: x,
            ln1,
            ln1_out,
            q,
            k,
            v,
            probs,
            ctx,
            ln2,
            ln2_out,
            ff_pre,
            ff_act,
        });
        x = x_out;
    }

    let (final_out, final_ln) = layer_norm(&x, params.tail(0), params.tail(1));
    let logits = linear(&final_out, params.tail(2), params.tail(3));
    Ok((
        logits,
        Cache {
            ids: ids.to_vec(),
            emb_ln,
            layers,
            final_ln,
            final_out,
        },
    ))
}

/// Softmax cross-entropy summed over labeled positions.
///
/// Returns (loss sum, labeled-position count) and sets `dlogits` to the
/// unscaled gradient (softmax minus one-hot at labeled rows, zero at masked
/// rows). Callers divide by the batch-wide count.
pub fn cross_entropy(
    logits: &Array2<f64>,
    labels: &[Option<usize>],
    dlogits: &mut Array2<f64>,
) -> Result<(f64, usize)> {
    if labels.len() != logits.nrows() {
        return Err(Error::Model(format!(
            "{} labels for {} positions",
            labels.len(),
            logits.nrows()
        )));
    }
    let probs = softmax_rows(logits);
    let mut loss = 0.0;
    let mut count = 0;
    dlogits.fill(0.0);
    for (pos, label) in labels.iter().enumerate() {
        let Some(y) = *label else { continue };
        if y >= logits.ncols() {
            return Err(Error::Model(format!(
                "label index {y} outside {} classes",
                logits.ncols()
            )));
        }
        loss -= probs[[pos, y]].max(f64::MIN_POSITIVE).ln();
        count += 1;
        let mut row = dlogits.row_mut(pos);
        row.assign(&probs.row(pos));
        row[y] -= 1.0;
    }
    Ok((loss, count))
}

/// Backward pass for one sequence, accumulating into `grads` (tensor
/// layout identical to `params.tensors`). `dlogits` is the gradient at the
/// head output.
pub fn backward(
    params: &EncoderParams,
    cache: &Cache,
    dlogits: &Array2<f64>,
    grads: &mut [Array2<f64>],
) {
    let spec = params.spec;
    let tail_base = LAYER_BASE + spec.n_layers * PER_LAYER;
    let n_heads = spec.n_heads;
    let dh = spec.dim / n_heads;
    let scale = 1.0 / (dh as f64).sqrt();

    // Head and final LayerNorm.
    let (d_final_out, dw_head, db_head) = linear_bwd(dlogits, &cache.final_out, params.tail(2));
    grads[tail_base + 2] += &dw_head;
    grads[tail_base + 3] += &db_head;
    let (mut dx, dg, db) = layer_norm_bwd(&d_final_out, &cache.final_ln, params.tail(0));
    grads[tail_base] += &dg;
    grads[tail_base + 1] += &db;

    for l in (0..spec.n_layers).rev() {
        let base = LAYER_BASE + l * PER_LAYER;
        let lc = &cache.layers[l];

        // Feed-forward branch.
        let (d_ff_act, dw2, db2) = linear_bwd(&dx, &lc.ff_act, params.layer(l, L_FF_W2));
        grads[base + L_FF_W2] += &dw2;
        grads[base + L_FF_B2] += &db2;
        let d_ff_pre = &d_ff_act * &lc.ff_pre.mapv(gelu_grad);
        let (d_ln2_out, dw1, db1) = linear_bwd(&d_ff_pre, &lc.ln2_out, params.layer(l, L_FF_W1));
        grads[base + L_FF_W1] += &dw1;
        grads[base + L_FF_B1] += &db1;
        let (d_h_ffn, dg2, db_ln2) = layer_norm_bwd(&d_ln2_out, &lc.ln2, params.layer(l, L_LN2_G));
        grads[base + L_LN2_G] += &dg2;
        grads[base + L_LN2_B] += &db_ln2;
        let d_h_mid = &dx + &d_h_ffn;

        // Attention branch.
        let (d_ctx, dwo, dbo) = linear_bwd(&d_h_mid, &lc.ctx, params.layer(l, L_WO));
        grads[base + L_WO] += &dwo;
        grads[base + L_BO] += &dbo;

        let s_len = lc.x_in.nrows();
        let mut dq = Array2::zeros((s_len, spec.dim));
        let mut dk = Array2::zeros((s_len, spec.dim));
        let mut dv = Array2::zeros((s_len, spec.dim));
        for head in 0..n_heads {
            let cols = s![.., head * dh..(head + 1) * dh];
            let p = &lc.probs[head];
            let d_c = d_ctx.slice(cols);
            let dp = d_c.dot(&lc.v.slice(cols).t());
            dv.slice_mut(cols).assign(&p.t().dot(&d_c));
            let dscores = softmax_rows_bwd(p, &dp);
            dq.slice_mut(cols)
                .assign(&(dscores.dot(&lc.k.slice(cols)) * scale));
            dk.slice_mut(cols)
                .assign(&(dscores.t().dot(&lc.q.slice(cols)) * scale));
        }

        let (d_ln1_q, dwq, dbq) = linear_bwd(&dq, &lc.ln1_out, params.layer(l, L_WQ));
        grads[base + L_WQ] += &dwq;
        grads[base + L_BQ] += &dbq;
        let (d_ln1_k, dwk, dbk) = linear_bwd(&dk, &lc.ln1_out, params.layer(l, L_WK));
        grads[base + L_WK] += &dwk;
        grads[base + L_BK] += &dbk;
        let (d_ln1_v, dwv, dbv) = linear_bwd(&dv, &lc.ln1_out, params.layer(l, L_WV));
        grads[base + L_WV] += &dwv;
        grads[base + L_BV] += &dbv;
        let d_ln1_out = d_ln1_q + d_ln1_k + d_ln1_v;

        let (d_x_attn, dg1, db_ln1) = layer_norm_bwd(&d_ln1_out, &lc.ln1, params.layer(l, L_LN1_G));
        grads[base + L_LN1_G] += &dg1;
        grads[base + L_LN1_B] += &db_ln1;
        dx = d_h_mid + d_x_attn;
    }

    // Embedding LayerNorm, then scatter into the embedding tables.
    let (d_emb, dg, db) = layer_norm_bwd(&dx, &cache.emb_ln, &params.tensors[T_EMB_G]);
    grads[T_EMB_G] += &dg;
    grads[T_EMB_B] += &db;
    for (pos, &id) in cache.ids.iter().enumerate() {
        let row = d_emb.row(pos);
        grads[T_TOK].row_mut(id).scaled_add(1.0, &row);
        grads[T_POS].row_mut(pos).scaled_add(1.0, &row);
    }
}

/// Forward + loss + backward for one sequence. Loss sum and labeled count
/// are returned unscaled.
pub fn accumulate(
    params: &EncoderParams,
    ids: &[usize],
    labels: &[Option<usize>],
    grads: &mut [Array2<f64>],
) -> Result<(f64, usize)> {
    let (logits, cache) = forward(params, ids)?;
    let mut dlogits = Array2::zeros(logits.raw_dim());
    let (loss, count) = cross_entropy(&logits, labels, &mut dlogits)?;
    if count > 0 {
        backward(params, &cache, &dlogits, grads);
    }
    Ok((loss, count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn tiny() -> (EncoderParams, Vec<usize>, Vec<Option<usize>>) {
        let spec = EncoderSpec {
            dim: 8,
            n_heads: 2,
            ff_dim: 12,
            n_layers: 2,
            max_positions: 16,
        };
        let mut rng = StdRng::seed_from_u64(7);
        let params = EncoderParams::init(spec, 11, 3, &mut rng).unwrap();
        let ids = vec![4, 9, 2, 7, 7, 0];
        let labels = vec![Some(1), None, Some(0), Some(2), None, Some(1)];
        (params, ids, labels)
    }

    fn loss_of(params: &EncoderParams, ids: &[usize], labels: &[Option<usize>]) -> f64 {
        let (logits, _) = forward(params, ids).unwrap();
        let mut d = Array2::zeros(logits.raw_dim());
        cross_entropy(&logits, labels, &mut d).unwrap().0
    }

    #[test]
    fn gradients_match_finite_differences() {
        let (mut params, ids, labels) = tiny();
        let mut grads = params.zero_grads();
        let (_, count) = accumulate(&params, &ids, &labels, &mut grads).unwrap();
        assert_eq!(count, 4);

        // Probe a few coordinates in every tensor.
        let eps = 1e-5;
        let mut rng = StdRng::seed_from_u64(13);
        for (t, grad) in grads.iter().enumerate() {
            let (rows, cols) = grad.dim();
            for _ in 0..3 {
                let (r, c) = (rng.random_range(0..rows), rng.random_range(0..cols));
                // Token embedding rows for ids not in the input get no gradient.
                if t == T_TOK && !ids.contains(&r) {
                    continue;
                }
                if t == T_POS && r >= ids.len() {
                    continue;
                }
                let orig = params.tensors[t][[r, c]];
                params.tensors[t][[r, c]] = orig + eps;
                let up = loss_of(&params, &ids, &labels);
                params.tensors[t][[r, c]] = orig - eps;
                let down = loss_of(&params, &ids, &labels);
                params.tensors[t][[r, c]] = orig;
                let numeric = (up - down) / (2.0 * eps);
                let analytic = grad[[r, c]];
                // Absolute floor absorbs finite-difference noise on
                // near-zero gradients; relative part covers the rest.
                let tol = 1e-8 + 1e-4 * numeric.abs().max(analytic.abs());
                assert!(
                    (numeric - analytic).abs() < tol,
                    "tensor {t} [{r},{c}]: numeric {numeric} vs analytic {analytic}"
                );
            }
        }
    }

    #[test]
    fn masked_positions_contribute_nothing() {
        let (params, ids, labels) = tiny();
        let (logits, _) = forward(&params, &ids).unwrap();
        let mut dlogits = Array2::zeros(logits.raw_dim());
        let (loss, count) = cross_entropy(&logits, &labels, &mut dlogits).unwrap();
        assert_eq!(count, 4);
        // Masked rows (positions 1 and 4) get exactly zero gradient, so no
        // parameter gradient can flow from them.
        for pos in [1usize, 4] {
            assert!(dlogits.row(pos).iter().all(|&v| v == 0.0));
        }
        // Loss is exactly the sum over labeled positions alone.
        let by_hand: f64 = labels
            .iter()
            .enumerate()
            .filter_map(|(pos, l)| l.map(|y| (pos, y)))
            .map(|(pos, y)| {
                let row = softmax_rows(&logits).row(pos).to_owned();
                -row[y].ln()
            })
            .sum();
        assert!((loss - by_hand).abs() < 1e-12);
        assert!(loss.is_finite() && loss > 0.0);
    }

    #[test]
    fn forward_is_deterministic() {
        let (params, ids, _) = tiny();
        let (a, _) = forward(&params, &ids).unwrap();
        let (b, _) = forward(&params, &ids).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn forward_rejects_bad_input() {
        let (params, _, _) = tiny();
        assert!(forward(&params, &[]).is_err());
        assert!(forward(&params, &[999]).is_err());
        let too_long = vec![1usize; params.spec.max_positions + 1];
        assert!(forward(&params, &too_long).is_err());
    }

    #[test]
    fn logits_shape_tracks_input() {
        let (params, _, _) = tiny();
        for len in [1usize, 5, 16] {
            let ids = vec![3usize; len];
            let (logits, _) = forward(&params, &ids).unwrap();
            assert_eq!(logits.dim(), (len, params.n_labels));
        }
    }

    #[test]
    fn decay_mask_excludes_norms_and_biases() {
        let (params, _, _) = tiny();
        let mask = params.decay_mask();
        let names = params.tensor_names();
        for ((m, name), tensor) in mask.iter().zip(&names).zip(&params.tensors) {
            if name.contains("ln") || name.ends_with('b') && tensor.nrows() == 1 {
                assert!(!m, "{name} should not decay");
            }
            if name == "tok_emb" || name.ends_with("wq") || name == "head_w" {
                assert!(m, "{name} should decay");
            }
        }
    }
}
