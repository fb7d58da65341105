//! Pointer network: LSTM encoder over the embedded input permutation, LSTM
//! decoder initialised from the final encoder state, general attention over
//! the encoder states, and a pointer head that reuses the general score
//! between the attentional output and every encoder state.
//!
//! Batched buffers are time-major: row `t * B + b` holds step `t` of
//! sequence `b`.

use super::attention::masked_softmax;
use super::lstm::{cell_backward, cell_forward, LstmWeights};
use super::tensor::{axpy, dot, gemm, Op, Tensor};
use crate::error::{Error, Result};
use crate::permutation::Permutation;
use crate::rng::RngStream;

/// Learnable parameters of the pointer network.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerNetParams {
    /// `n_max x d_emb` index embeddings.
    pub embedding: Tensor,
    /// Decoder input at the first step.
    pub start: Tensor,
    pub encoder: LstmWeights,
    pub decoder: LstmWeights,
    /// `H x H`, shared by attention and pointer scores.
    pub w_a: Tensor,
    /// `H x 2H`, applied to `[context; h]`.
    pub w_c: Tensor,
}

/// Names of the parameter groups, in [`PointerNetParams::groups`] order.
pub const GROUP_NAMES: [&str; 10] = [
    "embedding",
    "start",
    "encoder.w_x",
    "encoder.w_h",
    "encoder.bias",
    "decoder.w_x",
    "decoder.w_h",
    "decoder.bias",
    "w_a",
    "w_c",
];

impl PointerNetParams {
    pub fn init(n_max: usize, d_emb: usize, hidden: usize, rng: &mut RngStream) -> Result<Self> {
        if n_max == 0 || d_emb == 0 || hidden == 0 {
            return Err(Error::InvalidArgument("network dimensions must be positive".into()));
        }
        let s = 1.0 / (hidden as f64).sqrt();
        Ok(PointerNetParams {
            embedding: Tensor::uniform(&[n_max, d_emb], 1.0, rng),
            start: Tensor::uniform(&[d_emb], 1.0, rng),
            encoder: LstmWeights::init(d_emb, hidden, rng),
            decoder: LstmWeights::init(d_emb, hidden, rng),
            w_a: Tensor::uniform(&[hidden, hidden], s, rng),
            w_c: Tensor::uniform(&[hidden, 2 * hidden], s / 2f64.sqrt(), rng),
        })
    }

    pub fn zeros(n_max: usize, d_emb: usize, hidden: usize) -> Self {
        PointerNetParams {
            embedding: Tensor::zeros(&[n_max, d_emb]),
            start: Tensor::zeros(&[d_emb]),
            encoder: LstmWeights::zeros(d_emb, hidden),
            decoder: LstmWeights::zeros(d_emb, hidden),
            w_a: Tensor::zeros(&[hidden, hidden]),
            w_c: Tensor::zeros(&[hidden, 2 * hidden]),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.n_max(), self.embedding_dim(), self.hidden())
    }

    pub fn n_max(&self) -> usize {
        self.embedding.shape()[0]
    }

    pub fn embedding_dim(&self) -> usize {
        self.embedding.shape()[1]
    }

    pub fn hidden(&self) -> usize {
        self.w_a.shape()[0]
    }

    pub fn groups(&self) -> [&Tensor; 10] {
        [
            &self.embedding,
            &self.start,
            &self.encoder.w_x,
            &self.encoder.w_h,
            &self.encoder.bias,
            &self.decoder.w_x,
            &self.decoder.w_h,
            &self.decoder.bias,
            &self.w_a,
            &self.w_c,
        ]
    }

    pub fn groups_mut(&mut self) -> [&mut Tensor; 10] {
        [
            &mut self.embedding,
            &mut self.start,
            &mut self.encoder.w_x,
            &mut self.encoder.w_h,
            &mut self.encoder.bias,
            &mut self.decoder.w_x,
            &mut self.decoder.w_h,
            &mut self.decoder.bias,
            &mut self.w_a,
            &mut self.w_c,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.groups().iter().all(|t| t.is_finite())
    }

    pub fn fill(&mut self, v: f64) {
        for t in self.groups_mut() {
            t.fill(v);
        }
    }

    /// Checks the shape invariants between groups.
    pub fn validate(&self) -> Result<()> {
        let (n, d, h) = (self.n_max(), self.embedding_dim(), self.hidden());
        let expected = Self::zeros(n, d, h);
        for ((name, got), want) in GROUP_NAMES.iter().zip(self.groups()).zip(expected.groups()) {
            if got.shape() != want.shape() {
                return Err(Error::InvalidArgument(format!(
                    "parameter `{name}` has shape {:?}, expected {:?}",
                    got.shape(),
                    want.shape()
                )));
            }
        }
        Ok(())
    }
}

fn check_sequences(params: &PointerNetParams, seqs: &[&[usize]]) -> Result<usize> {
    let first = seqs.first().ok_or(Error::Empty("sequence batch"))?;
    let n = first.len();
    if n == 0 {
        return Err(Error::Empty("sequence"));
    }
    if n > params.n_max() {
        return Err(Error::InvalidArgument(format!(
            "sequence length {n} exceeds embedding table size {}",
            params.n_max()
        )));
    }
    for s in seqs {
        if s.len() != n {
            return Err(Error::dims(n, s.len()));
        }
    }
    Ok(n)
}

fn add_bias_rows(z: &mut [f64], bias: &[f64]) {
    for row in z.chunks_exact_mut(bias.len()) {
        row.copy_from_slice(bias);
    }
}

fn dropout_mask(len: usize, rate: f64, rng: &mut RngStream) -> Vec<f64> {
    let keep = 1.0 / (1.0 - rate);
    (0..len).map(|_| if rng.uniform() < rate { 0.0 } else { keep }).collect()
}

/// Runs an LSTM over `steps` rows of `B` inputs. `z` holds the input
/// projections plus bias on entry and the activated gates on exit.
#[allow(clippy::too_many_arguments)]
fn run_lstm(
    w: &LstmWeights,
    steps: usize,
    batch: usize,
    h0: &[f64],
    c0: &[f64],
    z: &mut [f64],
    hs: &mut [f64],
    cs: &mut [f64],
    tcs: &mut [f64],
) {
    let hidden = w.hidden_size();
    let g = 4 * hidden;
    let bh = batch * hidden;
    for t in 0..steps {
        let (h_done, h_rest) = hs.split_at_mut(t * bh);
        let (c_done, c_rest) = cs.split_at_mut(t * bh);
        let h_prev = if t == 0 { h0 } else { &h_done[(t - 1) * bh..] };
        let c_prev = if t == 0 { c0 } else { &c_done[(t - 1) * bh..] };
        let zt = &mut z[t * batch * g..(t + 1) * batch * g];
        gemm(batch, hidden, g, h_prev, Op::N, w.w_h.data(), Op::N, 1.0, zt);
        cell_forward(zt, c_prev, &mut c_rest[..bh], &mut tcs[t * bh..(t + 1) * bh], &mut h_rest[..bh], hidden);
    }
}

/// Backpropagation through time for [`run_lstm`]. `dh_ext` carries the
/// gradient reaching each output `h_t` from outside the recurrence and
/// `dh_last`/`dc_last` the gradient reaching the final state. Returns the
/// pre-activation gradients (`steps*B x 4H`) and the gradient of `(h0, c0)`.
#[allow(clippy::too_many_arguments)]
fn backprop_lstm(
    w: &LstmWeights,
    steps: usize,
    batch: usize,
    c0: &[f64],
    gates: &[f64],
    cs: &[f64],
    tcs: &[f64],
    dh_ext: &[f64],
    dh_last: &[f64],
    dc_last: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let hidden = w.hidden_size();
    let g = 4 * hidden;
    let bh = batch * hidden;
    let mut dz = vec![0.0; steps * batch * g];
    let mut dh_next = dh_last.to_vec();
    let mut dc_next = dc_last.to_vec();
    let mut dh = vec![0.0; bh];
    let mut dc_prev = vec![0.0; bh];
    for t in (0..steps).rev() {
        for ((d, e), n) in dh.iter_mut().zip(&dh_ext[t * bh..(t + 1) * bh]).zip(&dh_next) {
            *d = e + n;
        }
        let c_prev = if t == 0 { c0 } else { &cs[(t - 1) * bh..t * bh] };
        let dzt = &mut dz[t * batch * g..(t + 1) * batch * g];
        cell_backward(
            &gates[t * batch * g..(t + 1) * batch * g],
            c_prev,
            &tcs[t * bh..(t + 1) * bh],
            &dh,
            &dc_next,
            dzt,
            &mut dc_prev,
            hidden,
        );
        gemm(batch, g, hidden, dzt, Op::N, w.w_h.data(), Op::T, 0.0, &mut dh_next);
        std::mem::swap(&mut dc_next, &mut dc_prev);
    }
    (dz, dh_next, dc_next)
}

/// Accumulates the weight gradients of one LSTM layer and returns the input
/// gradients (`steps*B x input`). `h0` is the initial hidden state.
#[allow(clippy::too_many_arguments)]
fn lstm_weight_grads(
    w: &LstmWeights,
    grads: &mut LstmWeights,
    steps: usize,
    batch: usize,
    xs: &[f64],
    h0: &[f64],
    hs: &[f64],
    dz: &[f64],
) -> Vec<f64> {
    let hidden = w.hidden_size();
    let input = w.input_size();
    let g = 4 * hidden;
    let rows = steps * batch;
    gemm(input, rows, g, xs, Op::T, dz, Op::N, 1.0, grads.w_x.data_mut());
    gemm(hidden, batch, g, h0, Op::T, &dz[..batch * g], Op::N, 1.0, grads.w_h.data_mut());
    if steps > 1 {
        let tail = (steps - 1) * batch;
        gemm(hidden, tail, g, &hs[..tail * hidden], Op::T, &dz[batch * g..], Op::N, 1.0, grads.w_h.data_mut());
    }
    let db = grads.bias.data_mut();
    for row in dz.chunks_exact(g) {
        axpy(1.0, row, db);
    }
    let mut dx = vec![0.0; rows * input];
    gemm(rows, g, input, dz, Op::N, w.w_x.data(), Op::T, 0.0, &mut dx);
    dx
}

/// Mean over the batch of the summed pointer cross-entropy of `labels`
/// given `data`, with teacher forcing. Each `data[b]` and `labels[b]` is a
/// 0-based permutation of the same length. When `grads` is given, the
/// gradient of that mean is added to it. `dropout` is `(rate, rng)` for the
/// embedded inputs of both LSTMs.
pub fn loss_and_gradients(
    params: &PointerNetParams,
    data: &[&[usize]],
    labels: &[&[usize]],
    dropout: Option<(f64, &mut RngStream)>,
    grads: Option<&mut PointerNetParams>,
) -> Result<f64> {
    let s_len = check_sequences(params, data)?;
    if labels.len() != data.len() {
        return Err(Error::dims(data.len(), labels.len()));
    }
    if check_sequences(params, labels)? != s_len {
        return Err(Error::dims(s_len, labels[0].len()));
    }
    let batch = data.len();
    let (d, h) = (params.embedding_dim(), params.hidden());
    let g = 4 * h;
    let rows = s_len * batch;
    let bh = batch * h;

    // target position of label[t] inside data, per sequence
    let mut targets = vec![0usize; rows];
    for b in 0..batch {
        let mut inv = vec![usize::MAX; s_len];
        for (pos, &v) in data[b].iter().enumerate() {
            inv[v] = pos;
        }
        for t in 0..s_len {
            let p = inv[labels[b][t]];
            if p == usize::MAX {
                return Err(Error::InvalidPermutation("label is not a rearrangement of its data".into()));
            }
            targets[t * batch + b] = p;
        }
    }

    let (mask_e, mask_d) = match dropout {
        Some((rate, rng)) if rate > 0.0 => (Some(dropout_mask(rows * d, rate, rng)), Some(dropout_mask(rows * d, rate, rng))),
        _ => (None, None),
    };

    // encoder
    let mut xe = vec![0.0; rows * d];
    for t in 0..s_len {
        for b in 0..batch {
            let r = t * batch + b;
            xe[r * d..(r + 1) * d].copy_from_slice(params.embedding.row(data[b][t]));
        }
    }
    if let Some(m) = &mask_e {
        xe.iter_mut().zip(m).for_each(|(x, k)| *x *= k);
    }
    let mut ze = vec![0.0; rows * g];
    add_bias_rows(&mut ze, params.encoder.bias.data());
    gemm(rows, d, g, &xe, Op::N, params.encoder.w_x.data(), Op::N, 1.0, &mut ze);
    let zeros = vec![0.0; bh];
    let (mut he, mut ce, mut tce) = (vec![0.0; rows * h], vec![0.0; rows * h], vec![0.0; rows * h]);
    run_lstm(&params.encoder, s_len, batch, &zeros, &zeros, &mut ze, &mut he, &mut ce, &mut tce);
    let he_last = &he[(s_len - 1) * bh..];
    let ce_last = &ce[(s_len - 1) * bh..];

    // decoder, teacher forced
    let mut xd = vec![0.0; rows * d];
    for t in 0..s_len {
        for b in 0..batch {
            let r = t * batch + b;
            let src = if t == 0 { params.start.data() } else { params.embedding.row(labels[b][t - 1]) };
            xd[r * d..(r + 1) * d].copy_from_slice(src);
        }
    }
    if let Some(m) = &mask_d {
        xd.iter_mut().zip(m).for_each(|(x, k)| *x *= k);
    }
    let mut zd = vec![0.0; rows * g];
    add_bias_rows(&mut zd, params.decoder.bias.data());
    gemm(rows, d, g, &xd, Op::N, params.decoder.w_x.data(), Op::N, 1.0, &mut zd);
    let (mut hd, mut cd, mut tcd) = (vec![0.0; rows * h], vec![0.0; rows * h], vec![0.0; rows * h]);
    run_lstm(&params.decoder, s_len, batch, he_last, ce_last, &mut zd, &mut hd, &mut cd, &mut tcd);

    // attention
    let enc_row = |s: usize, b: usize| &he[(s * batch + b) * h..(s * batch + b + 1) * h];
    let mut q = vec![0.0; rows * h];
    gemm(rows, h, h, &hd, Op::N, params.w_a.data(), Op::N, 0.0, &mut q);
    let mut kappa = vec![0.0; rows * s_len];
    let mut concat = vec![0.0; rows * 2 * h];
    let mut scores = vec![0.0; s_len];
    for t in 0..s_len {
        for b in 0..batch {
            let r = t * batch + b;
            let qr = &q[r * h..(r + 1) * h];
            for (s, sc) in scores.iter_mut().enumerate() {
                *sc = dot(qr, enc_row(s, b));
            }
            let k = masked_softmax(&scores, None).expect("unmasked");
            let cr = &mut concat[r * 2 * h..(r + 1) * 2 * h];
            for (s, &ks) in k.iter().enumerate() {
                axpy(ks, enc_row(s, b), &mut cr[..h]);
            }
            cr[h..].copy_from_slice(&hd[r * h..(r + 1) * h]);
            kappa[r * s_len..(r + 1) * s_len].copy_from_slice(&k);
        }
    }
    let mut hhat = vec![0.0; rows * h];
    gemm(rows, 2 * h, h, &concat, Op::N, params.w_c.data(), Op::T, 0.0, &mut hhat);
    hhat.iter_mut().for_each(|v| *v = v.tanh());

    // pointer
    let mut qp = vec![0.0; rows * h];
    gemm(rows, h, h, &hhat, Op::N, params.w_a.data(), Op::N, 0.0, &mut qp);
    let mut probs = vec![0.0; rows * s_len];
    let mut total_loss = 0.0;
    let mut visited = vec![false; s_len];
    for b in 0..batch {
        visited.iter_mut().for_each(|v| *v = false);
        for t in 0..s_len {
            let r = t * batch + b;
            let qr = &qp[r * h..(r + 1) * h];
            for (s, sc) in scores.iter_mut().enumerate() {
                *sc = dot(qr, enc_row(s, b));
            }
            let p = masked_softmax(&scores, Some(&visited)).expect("target position is unvisited");
            let target = targets[r];
            total_loss -= p[target].ln();
            probs[r * s_len..(r + 1) * s_len].copy_from_slice(&p);
            visited[target] = true;
        }
    }
    let loss = total_loss / batch as f64;
    if !loss.is_finite() {
        return Err(Error::Divergence(format!("non-finite training loss {loss}")));
    }
    let Some(grads) = grads else {
        return Ok(loss);
    };

    // ---- backward ----
    let inv_b = 1.0 / batch as f64;
    let mut dhe = vec![0.0; rows * h];
    let mut dqp = vec![0.0; rows * h];
    for t in 0..s_len {
        for b in 0..batch {
            let r = t * batch + b;
            let p = &probs[r * s_len..(r + 1) * s_len];
            let qr = &qp[r * h..(r + 1) * h];
            let dq = &mut dqp[r * h..(r + 1) * h];
            for s in 0..s_len {
                let mut dl = p[s];
                if s == targets[r] {
                    dl -= 1.0;
                }
                dl *= inv_b;
                if dl == 0.0 {
                    continue;
                }
                let row = (s * batch + b) * h;
                axpy(dl, &he[row..row + h], dq);
                axpy(dl, qr, &mut dhe[row..row + h]);
            }
        }
    }
    let mut dhhat = vec![0.0; rows * h];
    gemm(rows, h, h, &dqp, Op::N, params.w_a.data(), Op::T, 0.0, &mut dhhat);
    gemm(h, rows, h, &hhat, Op::T, &dqp, Op::N, 1.0, grads.w_a.data_mut());
    for (dv, hv) in dhhat.iter_mut().zip(&hhat) {
        *dv *= 1.0 - hv * hv;
    }
    let dpre = dhhat;
    gemm(h, rows, 2 * h, &dpre, Op::T, &concat, Op::N, 1.0, grads.w_c.data_mut());
    let mut dconcat = vec![0.0; rows * 2 * h];
    gemm(rows, h, 2 * h, &dpre, Op::N, params.w_c.data(), Op::N, 0.0, &mut dconcat);

    let mut dq = vec![0.0; rows * h];
    let mut dhd = vec![0.0; rows * h];
    let mut dkappa = vec![0.0; s_len];
    for t in 0..s_len {
        for b in 0..batch {
            let r = t * batch + b;
            let dctx = &dconcat[r * 2 * h..r * 2 * h + h];
            let k = &kappa[r * s_len..(r + 1) * s_len];
            for s in 0..s_len {
                let row = (s * batch + b) * h;
                dkappa[s] = dot(dctx, &he[row..row + h]);
                axpy(k[s], dctx, &mut dhe[row..row + h]);
            }
            let weighted: f64 = k.iter().zip(&dkappa).map(|(a, b)| a * b).sum();
            let qr = &q[r * h..(r + 1) * h];
            let dqr = &mut dq[r * h..(r + 1) * h];
            for s in 0..s_len {
                let ds = k[s] * (dkappa[s] - weighted);
                let row = (s * batch + b) * h;
                axpy(ds, &he[row..row + h], dqr);
                axpy(ds, qr, &mut dhe[row..row + h]);
            }
            dhd[r * h..(r + 1) * h].copy_from_slice(&dconcat[r * 2 * h + h..(r + 1) * 2 * h]);
        }
    }
    gemm(rows, h, h, &dq, Op::N, params.w_a.data(), Op::T, 1.0, &mut dhd);
    gemm(h, rows, h, &hd, Op::T, &dq, Op::N, 1.0, grads.w_a.data_mut());

    // decoder BPTT
    let (dzd, dh_enc, dc_enc) =
        backprop_lstm(&params.decoder, s_len, batch, ce_last, &zd, &cd, &tcd, &dhd, &zeros, &zeros);
    let mut dxd = lstm_weight_grads(&params.decoder, &mut grads.decoder, s_len, batch, &xd, he_last, &hd, &dzd);
    if let Some(m) = &mask_d {
        dxd.iter_mut().zip(m).for_each(|(x, k)| *x *= k);
    }
    for t in 0..s_len {
        for b in 0..batch {
            let r = t * batch + b;
            let dst = if t == 0 { grads.start.data_mut() } else { grads.embedding.row_mut(labels[b][t - 1]) };
            axpy(1.0, &dxd[r * d..(r + 1) * d], dst);
        }
    }

    // encoder BPTT; the final state also feeds the decoder
    let mut dhe_ext = dhe;
    axpy(1.0, &dh_enc, &mut dhe_ext[(s_len - 1) * bh..]);
    let (dze, _, _) = backprop_lstm(&params.encoder, s_len, batch, &zeros, &ze, &ce, &tce, &dhe_ext, &zeros, &dc_enc);
    let mut dxe = lstm_weight_grads(&params.encoder, &mut grads.encoder, s_len, batch, &xe, &zeros, &he, &dze);
    if let Some(m) = &mask_e {
        dxe.iter_mut().zip(m).for_each(|(x, k)| *x *= k);
    }
    for t in 0..s_len {
        for b in 0..batch {
            let r = t * batch + b;
            axpy(1.0, &dxe[r * d..(r + 1) * d], grads.embedding.row_mut(data[b][t]));
        }
    }
    Ok(loss)
}

/// How [`decode`] picks each position.
pub enum DecodeMode<'a> {
    /// Highest probability, lowest position on ties.
    Greedy,
    /// Sampled from the masked pointer distribution.
    Sample(&'a mut RngStream),
}

/// Decodes every input permutation into a new permutation of the same
/// elements. Visited positions are masked, so each output is a bijection.
pub fn decode(params: &PointerNetParams, inputs: &[Permutation], mut mode: DecodeMode<'_>) -> Result<Vec<Permutation>> {
    if inputs.is_empty() {
        return Ok(Vec::new());
    }
    let seqs: Vec<&[usize]> = inputs.iter().map(|p| p.as_slice()).collect();
    let s_len = check_sequences(params, &seqs)?;
    let batch = seqs.len();
    let (d, h) = (params.embedding_dim(), params.hidden());
    let g = 4 * h;
    let rows = s_len * batch;
    let bh = batch * h;

    let mut xe = vec![0.0; rows * d];
    for t in 0..s_len {
        for b in 0..batch {
            let r = t * batch + b;
            xe[r * d..(r + 1) * d].copy_from_slice(params.embedding.row(seqs[b][t]));
        }
    }
    let mut ze = vec![0.0; rows * g];
    add_bias_rows(&mut ze, params.encoder.bias.data());
    gemm(rows, d, g, &xe, Op::N, params.encoder.w_x.data(), Op::N, 1.0, &mut ze);
    let zeros = vec![0.0; bh];
    let (mut he, mut ce, mut tce) = (vec![0.0; rows * h], vec![0.0; rows * h], vec![0.0; rows * h]);
    run_lstm(&params.encoder, s_len, batch, &zeros, &zeros, &mut ze, &mut he, &mut ce, &mut tce);

    let mut h_cur = he[(s_len - 1) * bh..].to_vec();
    let mut c_cur = ce[(s_len - 1) * bh..].to_vec();
    let mut x = vec![0.0; batch * d];
    for b in 0..batch {
        x[b * d..(b + 1) * d].copy_from_slice(params.start.data());
    }
    let mut visited = vec![vec![false; s_len]; batch];
    let mut outputs = vec![Vec::with_capacity(s_len); batch];
    let mut z = vec![0.0; batch * g];
    let (mut c_next, mut tc, mut h_next) = (vec![0.0; bh], vec![0.0; bh], vec![0.0; bh]);
    let mut q = vec![0.0; bh];
    let mut concat = vec![0.0; batch * 2 * h];
    let mut hhat = vec![0.0; bh];
    let mut scores = vec![0.0; s_len];
    for _ in 0..s_len {
        add_bias_rows(&mut z, params.decoder.bias.data());
        gemm(batch, d, g, &x, Op::N, params.decoder.w_x.data(), Op::N, 1.0, &mut z);
        gemm(batch, h, g, &h_cur, Op::N, params.decoder.w_h.data(), Op::N, 1.0, &mut z);
        cell_forward(&mut z, &c_cur, &mut c_next, &mut tc, &mut h_next, h);
        std::mem::swap(&mut h_cur, &mut h_next);
        std::mem::swap(&mut c_cur, &mut c_next);

        gemm(batch, h, h, &h_cur, Op::N, params.w_a.data(), Op::N, 0.0, &mut q);
        concat.fill(0.0);
        for b in 0..batch {
            let qr = &q[b * h..(b + 1) * h];
            for (s, sc) in scores.iter_mut().enumerate() {
                *sc = dot(qr, &he[(s * batch + b) * h..(s * batch + b + 1) * h]);
            }
            let k = masked_softmax(&scores, None).expect("unmasked");
            let cr = &mut concat[b * 2 * h..(b + 1) * 2 * h];
            for (s, &ks) in k.iter().enumerate() {
                axpy(ks, &he[(s * batch + b) * h..(s * batch + b + 1) * h], &mut cr[..h]);
            }
            cr[h..].copy_from_slice(&h_cur[b * h..(b + 1) * h]);
        }
        gemm(batch, 2 * h, h, &concat, Op::N, params.w_c.data(), Op::T, 0.0, &mut hhat);
        hhat.iter_mut().for_each(|v| *v = v.tanh());
        gemm(batch, h, h, &hhat, Op::N, params.w_a.data(), Op::N, 0.0, &mut q);
        for b in 0..batch {
            let qr = &q[b * h..(b + 1) * h];
            for (s, sc) in scores.iter_mut().enumerate() {
                *sc = dot(qr, &he[(s * batch + b) * h..(s * batch + b + 1) * h]);
            }
            let p = masked_softmax(&scores, Some(&visited[b])).expect("an unvisited position remains");
            let pick = match &mut mode {
                DecodeMode::Greedy => (0..s_len).fold(None, |best: Option<usize>, s| {
                    if visited[b][s] {
                        best
                    } else {
                        match best {
                            Some(bi) if p[bi] >= p[s] => Some(bi),
                            _ => Some(s),
                        }
                    }
                }),
                DecodeMode::Sample(rng) => {
                    let mut u = rng.uniform();
                    let mut chosen = (0..s_len).rfind(|&s| !visited[b][s]);
                    for s in 0..s_len {
                        if visited[b][s] {
                            continue;
                        }
                        if u < p[s] {
                            chosen = Some(s);
                            break;
                        }
                        u -= p[s];
                    }
                    chosen
                }
            }
            .expect("an unvisited position remains");
            visited[b][pick] = true;
            let value = seqs[b][pick];
            outputs[b].push(value);
            x[b * d..(b + 1) * d].copy_from_slice(params.embedding.row(value));
        }
    }
    outputs
        .into_iter()
        .map(Permutation::from_zero_based)
        .collect()
}

/// Greedy masked decode of each input; the prediction step of the loop.
pub fn predict(params: &PointerNetParams, data: &[Permutation]) -> Result<Vec<Permutation>> {
    decode(params, data, DecodeMode::Greedy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuralnet::attention::{attention_scores, context_and_output, pointer_distribution};
    use crate::neuralnet::lstm::lstm_step;

    /// Teacher-forced loss recomputed one sequence and one step at a time
    /// with the single-sample ops.
    fn reference_loss(p: &PointerNetParams, data: &[usize], label: &[usize]) -> f64 {
        let n = data.len();
        let hidden = p.hidden();
        let (mut h, mut c) = (vec![0.0; hidden], vec![0.0; hidden]);
        let mut enc = Vec::new();
        for &v in data {
            let (h2, c2) = lstm_step(p.embedding.row(v), &h, &c, &p.encoder).unwrap();
            enc.extend_from_slice(&h2);
            h = h2;
            c = c2;
        }
        let mut visited = vec![false; n];
        let mut loss = 0.0;
        let mut x = p.start.data().to_vec();
        for &target_value in label {
            let (h2, c2) = lstm_step(&x, &h, &c, &p.decoder).unwrap();
            h = h2;
            c = c2;
            let k = attention_scores(&h, &enc, &p.w_a).unwrap();
            let (_, hhat) = context_and_output(&k, &enc, &h, &p.w_c).unwrap();
            let dist = pointer_distribution(&hhat, &enc, &p.w_a, &visited).unwrap();
            let pos = data.iter().position(|&v| v == target_value).unwrap();
            loss -= dist[pos].ln();
            visited[pos] = true;
            x = p.embedding.row(target_value).to_vec();
        }
        loss
    }

    #[test]
    fn batched_loss_matches_single_sample_composition() {
        let mut rng = RngStream::new(12);
        let p = PointerNetParams::init(6, 5, 7, &mut rng).unwrap();
        let data: Vec<Permutation> = (0..3).map(|_| Permutation::random(6, &mut rng).unwrap()).collect();
        let labels: Vec<Permutation> = (0..3).map(|_| Permutation::random(6, &mut rng).unwrap()).collect();
        let ds: Vec<&[usize]> = data.iter().map(|x| x.as_slice()).collect();
        let ls: Vec<&[usize]> = labels.iter().map(|x| x.as_slice()).collect();
        let batched = loss_and_gradients(&p, &ds, &ls, None, None).unwrap();
        let reference: f64 =
            ds.iter().zip(&ls).map(|(d, l)| reference_loss(&p, d, l)).sum::<f64>() / 3.0;
        assert!((batched - reference).abs() < 1e-12, "{batched} vs {reference}");
    }

    #[test]
    fn zero_parameters_give_uniform_pointer_loss() {
        let p = PointerNetParams::zeros(5, 3, 4);
        let d = Permutation::identity(5);
        let l = Permutation::from_one_based(&[3, 1, 5, 2, 4]).unwrap();
        let loss = loss_and_gradients(&p, &[d.as_slice()], &[l.as_slice()], None, None).unwrap();
        let ln_fact: f64 = (1..=5).map(|k| (k as f64).ln()).sum();
        assert!((loss - ln_fact).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_batches() {
        let p = PointerNetParams::zeros(4, 2, 2);
        let a = Permutation::identity(4);
        let b = Permutation::identity(3);
        assert!(loss_and_gradients(&p, &[a.as_slice()], &[b.as_slice()], None, None).is_err());
        assert!(loss_and_gradients(&p, &[], &[], None, None).is_err());
        let big = Permutation::identity(5);
        assert!(loss_and_gradients(&p, &[big.as_slice()], &[big.as_slice()], None, None).is_err());
        assert!(predict(&p, &[big]).is_err());
    }

    #[test]
    fn predictions_are_aligned_permutations() {
        let mut rng = RngStream::new(3);
        let p = PointerNetParams::init(9, 4, 6, &mut rng).unwrap();
        let inputs: Vec<Permutation> = (0..17).map(|_| Permutation::random(9, &mut rng).unwrap()).collect();
        let out = predict(&p, &inputs).unwrap();
        assert_eq!(out.len(), inputs.len());
        for o in &out {
            assert_eq!(o.len(), 9);
        }
        // decoding one input alone gives the same answer as inside a batch
        let single = predict(&p, &inputs[5..6]).unwrap();
        assert_eq!(single[0], out[5]);
        assert!(predict(&p, &[]).unwrap().is_empty());
    }
}
