//! Bilinear ("general") attention, context/output combination and the masked
//! pointer distribution, for one decoder step of one sequence.
//!
//! Encoder states are passed as a row-major `S x H` slice.

use super::tensor::{dot, gemm, Op, Tensor};
use crate::error::{Error, Result};

/// Softmax over `scores`, skipping entries where `masked[s]` is true
/// (they get probability 0). Returns `None` when everything is masked.
pub(crate) fn masked_softmax(scores: &[f64], masked: Option<&[bool]>) -> Option<Vec<f64>> {
    let live = |s: usize| masked.is_none_or(|m| !m[s]);
    let max = (0..scores.len()).filter(|&s| live(s)).map(|s| scores[s]).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let mut out: Vec<f64> = (0..scores.len())
        .map(|s| if live(s) { (scores[s] - max).exp() } else { 0.0 })
        .collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= total);
    Some(out)
}

fn check(enc: &[f64], hidden: usize, w: &Tensor, rows: usize) -> Result<usize> {
    if hidden == 0 || enc.len() % hidden != 0 || enc.is_empty() {
        return Err(Error::dims(hidden, enc.len()));
    }
    if w.shape() != [hidden, rows] {
        return Err(Error::dims(hidden * rows, w.len()));
    }
    Ok(enc.len() / hidden)
}

/// `score_s = h^T W_a e_s` for every encoder state.
pub fn general_scores(h: &[f64], enc: &[f64], w_a: &Tensor) -> Result<Vec<f64>> {
    let hidden = h.len();
    let s_len = check(enc, hidden, w_a, hidden)?;
    let mut q = vec![0.0; hidden];
    gemm(1, hidden, hidden, h, Op::N, w_a.data(), Op::N, 0.0, &mut q);
    Ok((0..s_len).map(|s| dot(&q, &enc[s * hidden..(s + 1) * hidden])).collect())
}

/// Attention weights: softmax of the general scores.
pub fn attention_scores(h_t: &[f64], enc: &[f64], w_a: &Tensor) -> Result<Vec<f64>> {
    let scores = general_scores(h_t, enc, w_a)?;
    Ok(masked_softmax(&scores, None).expect("unmasked softmax"))
}

/// Context vector `c = sum_s k_s e_s` and output `tanh(W_c [c; h])`.
pub fn context_and_output(kappa: &[f64], enc: &[f64], h_t: &[f64], w_c: &Tensor) -> Result<(Vec<f64>, Vec<f64>)> {
    let hidden = h_t.len();
    let s_len = check(enc, hidden, w_c, 2 * hidden)?;
    if kappa.len() != s_len {
        return Err(Error::dims(s_len, kappa.len()));
    }
    let mut concat = vec![0.0; 2 * hidden];
    for (s, k) in kappa.iter().enumerate() {
        for (c, e) in concat[..hidden].iter_mut().zip(&enc[s * hidden..(s + 1) * hidden]) {
            *c += k * e;
        }
    }
    concat[hidden..].copy_from_slice(h_t);
    let mut out = vec![0.0; hidden];
    gemm(1, 2 * hidden, hidden, &concat, Op::N, w_c.data(), Op::T, 0.0, &mut out);
    out.iter_mut().for_each(|v| *v = v.tanh());
    concat.truncate(hidden);
    Ok((concat, out))
}

/// Gradients of [`context_and_output`] given the upstream `d_out`.
#[derive(Debug, Clone)]
pub struct ContextGrads {
    pub w_c: Tensor,
    pub kappa: Vec<f64>,
    pub enc: Vec<f64>,
    pub h_t: Vec<f64>,
}

pub fn context_and_output_backward(
    kappa: &[f64],
    enc: &[f64],
    h_t: &[f64],
    w_c: &Tensor,
    d_out: &[f64],
) -> Result<ContextGrads> {
    let hidden = h_t.len();
    let (ctx, out) = context_and_output(kappa, enc, h_t, w_c)?;
    let s_len = kappa.len();
    let dpre: Vec<f64> = out.iter().zip(d_out).map(|(o, d)| d * (1.0 - o * o)).collect();
    let mut concat = ctx;
    concat.extend_from_slice(h_t);
    let mut dw = Tensor::zeros(&[hidden, 2 * hidden]);
    gemm(hidden, 1, 2 * hidden, &dpre, Op::T, &concat, Op::N, 0.0, dw.data_mut());
    let mut dconcat = vec![0.0; 2 * hidden];
    gemm(1, hidden, 2 * hidden, &dpre, Op::N, w_c.data(), Op::N, 0.0, &mut dconcat);
    let dctx = &dconcat[..hidden];
    let dkappa = (0..s_len).map(|s| dot(dctx, &enc[s * hidden..(s + 1) * hidden])).collect();
    let mut denc = vec![0.0; s_len * hidden];
    for s in 0..s_len {
        for (d, c) in denc[s * hidden..(s + 1) * hidden].iter_mut().zip(dctx) {
            *d = kappa[s] * c;
        }
    }
    Ok(ContextGrads { w_c: dw, kappa: dkappa, enc: denc, h_t: dconcat[hidden..].to_vec() })
}

/// Pointer distribution over source positions: softmax of the general score
/// between `h_hat` and each encoder state, restricted to unvisited positions.
pub fn pointer_distribution(h_hat: &[f64], enc: &[f64], w_a: &Tensor, visited: &[bool]) -> Result<Vec<f64>> {
    let scores = general_scores(h_hat, enc, w_a)?;
    if visited.len() != scores.len() {
        return Err(Error::dims(scores.len(), visited.len()));
    }
    masked_softmax(&scores, Some(visited))
        .ok_or_else(|| Error::InvalidArgument("every source position is masked".into()))
}
