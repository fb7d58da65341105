//! LSTM cell, batched over rows. Gate order in the `4H` axis is
//! input, forget, candidate, output.

use super::tensor::{gemm, sigmoid, Op, Tensor};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Weights of one LSTM layer: `z = x W_x + h W_h + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmWeights {
    /// `input x 4H`
    pub w_x: Tensor,
    /// `H x 4H`
    pub w_h: Tensor,
    /// `4H`
    pub bias: Tensor,
}

impl LstmWeights {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmWeights {
            w_x: Tensor::zeros(&[input, 4 * hidden]),
            w_h: Tensor::zeros(&[hidden, 4 * hidden]),
            bias: Tensor::zeros(&[4 * hidden]),
        }
    }

    /// Uniform in `±1/sqrt(H)`, forget-gate bias shifted by +1.
    pub fn init(input: usize, hidden: usize, rng: &mut RngStream) -> Self {
        let s = 1.0 / (hidden as f64).sqrt();
        let mut bias = Tensor::uniform(&[4 * hidden], s, rng);
        bias.data_mut()[hidden..2 * hidden].iter_mut().for_each(|b| *b += 1.0);
        LstmWeights {
            w_x: Tensor::uniform(&[input, 4 * hidden], s, rng),
            w_h: Tensor::uniform(&[hidden, 4 * hidden], s, rng),
            bias,
        }
    }

    pub fn input_size(&self) -> usize {
        self.w_x.shape()[0]
    }

    pub fn hidden_size(&self) -> usize {
        self.w_h.shape()[0]
    }
}

/// Applies the gate nonlinearities in place to pre-activations `z` (`B x 4H`)
/// and advances the cell: writes `c` and `h` (`B x H`) from `c_prev`.
/// Also stores `tanh(c)` in `tc`.
pub(crate) fn cell_forward(z: &mut [f64], c_prev: &[f64], c: &mut [f64], tc: &mut [f64], h: &mut [f64], hidden: usize) {
    let rows = c_prev.len() / hidden;
    for r in 0..rows {
        let zr = &mut z[r * 4 * hidden..(r + 1) * 4 * hidden];
        for j in 0..hidden {
            let i = sigmoid(zr[j]);
            let f = sigmoid(zr[hidden + j]);
            let g = zr[2 * hidden + j].tanh();
            let o = sigmoid(zr[3 * hidden + j]);
            zr[j] = i;
            zr[hidden + j] = f;
            zr[2 * hidden + j] = g;
            zr[3 * hidden + j] = o;
            let k = r * hidden + j;
            let cv = f * c_prev[k] + i * g;
            let t = cv.tanh();
            c[k] = cv;
            tc[k] = t;
            h[k] = o * t;
        }
    }
}

/// Backward through the cell nonlinearities. `gates` holds the activated
/// gates from [`cell_forward`]. Writes `dz` (`B x 4H`) and `dc_prev`.
/// `dh` and `dc` are the gradients arriving at `h` and `c`.
pub(crate) fn cell_backward(
    gates: &[f64],
    c_prev: &[f64],
    tc: &[f64],
    dh: &[f64],
    dc: &[f64],
    dz: &mut [f64],
    dc_prev: &mut [f64],
    hidden: usize,
) {
    let rows = c_prev.len() / hidden;
    for r in 0..rows {
        let gr = &gates[r * 4 * hidden..(r + 1) * 4 * hidden];
        let dzr = &mut dz[r * 4 * hidden..(r + 1) * 4 * hidden];
        for j in 0..hidden {
            let k = r * hidden + j;
            let (i, f, g, o) = (gr[j], gr[hidden + j], gr[2 * hidden + j], gr[3 * hidden + j]);
            let t = tc[k];
            let dct = dc[k] + dh[k] * o * (1.0 - t * t);
            dzr[j] = dct * g * i * (1.0 - i);
            dzr[hidden + j] = dct * c_prev[k] * f * (1.0 - f);
            dzr[2 * hidden + j] = dct * i * (1.0 - g * g);
            dzr[3 * hidden + j] = dh[k] * t * o * (1.0 - o);
            dc_prev[k] = dct * f;
        }
    }
}

/// One LSTM step for a single input vector. Returns `(h', c')`.
pub fn lstm_step(x: &[f64], h: &[f64], c: &[f64], w: &LstmWeights) -> Result<(Vec<f64>, Vec<f64>)> {
    let hidden = w.hidden_size();
    if x.len() != w.input_size() {
        return Err(Error::dims(w.input_size(), x.len()));
    }
    if h.len() != hidden || c.len() != hidden {
        return Err(Error::dims(hidden, h.len().max(c.len())));
    }
    let mut z = w.bias.data().to_vec();
    gemm(1, x.len(), 4 * hidden, x, Op::N, w.w_x.data(), Op::N, 1.0, &mut z);
    gemm(1, hidden, 4 * hidden, h, Op::N, w.w_h.data(), Op::N, 1.0, &mut z);
    let mut c_new = vec![0.0; hidden];
    let mut tc = vec![0.0; hidden];
    let mut h_new = vec![0.0; hidden];
    cell_forward(&mut z, c, &mut c_new, &mut tc, &mut h_new, hidden);
    Ok((h_new, c_new))
}

/// Gradients of one [`lstm_step`] given upstream `dh'` and `dc'`.
#[derive(Debug, Clone)]
pub struct LstmStepGrads {
    pub weights: LstmWeights,
    pub dx: Vec<f64>,
    pub dh: Vec<f64>,
    pub dc: Vec<f64>,
}

/// Backward pass of [`lstm_step`], recomputing the forward internally.
pub fn lstm_step_backward(
    x: &[f64],
    h: &[f64],
    c: &[f64],
    w: &LstmWeights,
    dh_out: &[f64],
    dc_out: &[f64],
) -> Result<LstmStepGrads> {
    let hidden = w.hidden_size();
    let input = w.input_size();
    if x.len() != input || h.len() != hidden || c.len() != hidden {
        return Err(Error::dims(input + 2 * hidden, x.len() + h.len() + c.len()));
    }
    let mut z = w.bias.data().to_vec();
    gemm(1, input, 4 * hidden, x, Op::N, w.w_x.data(), Op::N, 1.0, &mut z);
    gemm(1, hidden, 4 * hidden, h, Op::N, w.w_h.data(), Op::N, 1.0, &mut z);
    let (mut c_new, mut tc, mut h_new) = (vec![0.0; hidden], vec![0.0; hidden], vec![0.0; hidden]);
    cell_forward(&mut z, c, &mut c_new, &mut tc, &mut h_new, hidden);
    let mut dz = vec![0.0; 4 * hidden];
    let mut dc = vec![0.0; hidden];
    cell_backward(&z, c, &tc, dh_out, dc_out, &mut dz, &mut dc, hidden);
    let mut grads = LstmWeights::zeros(input, hidden);
    gemm(input, 1, 4 * hidden, x, Op::T, &dz, Op::N, 0.0, grads.w_x.data_mut());
    gemm(hidden, 1, 4 * hidden, h, Op::T, &dz, Op::N, 0.0, grads.w_h.data_mut());
    grads.bias.data_mut().copy_from_slice(&dz);
    let mut dx = vec![0.0; input];
    let mut dh = vec![0.0; hidden];
    gemm(1, 4 * hidden, input, &dz, Op::N, w.w_x.data(), Op::T, 0.0, &mut dx);
    gemm(1, 4 * hidden, hidden, &dz, Op::N, w.w_h.data(), Op::T, 0.0, &mut dh);
    Ok(LstmStepGrads { weights: grads, dx, dh, dc })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_zero_state() {
        let w = LstmWeights::zeros(3, 4);
        let (h, c) = lstm_step(&[0.3, -1.0, 2.0], &[0.0; 4], &[0.0; 4], &w).unwrap();
        assert_eq!(h, vec![0.0; 4]);
        assert_eq!(c, vec![0.0; 4]);
    }

    #[test]
    fn shape_mismatch() {
        let w = LstmWeights::zeros(3, 4);
        assert!(lstm_step(&[0.0; 2], &[0.0; 4], &[0.0; 4], &w).is_err());
        assert!(lstm_step(&[0.0; 3], &[0.0; 5], &[0.0; 4], &w).is_err());
    }

    #[test]
    fn outputs_bounded() {
        let mut rng = RngStream::new(5);
        let w = LstmWeights::init(6, 8, &mut rng);
        for _ in 0..100 {
            let x: Vec<f64> = (0..6).map(|_| rng.uniform_in(-20.0, 20.0)).collect();
            let h: Vec<f64> = (0..8).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
            let c: Vec<f64> = (0..8).map(|_| rng.uniform_in(-5.0, 5.0)).collect();
            let (h2, _) = lstm_step(&x, &h, &c, &w).unwrap();
            assert!(h2.iter().all(|v| v.abs() < 1.0));
        }
    }

    /// Central differences of `L = <a, h'> + <b, c'>` against the analytic
    /// gradient, for every weight, the input and both state vectors.
    #[test]
    fn gradient_matches_finite_differences() {
        let (input, hidden) = (5, 8);
        let mut rng = RngStream::new(21);
        let w = LstmWeights::init(input, hidden, &mut rng);
        let x: Vec<f64> = (0..input).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let h: Vec<f64> = (0..hidden).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let c: Vec<f64> = (0..hidden).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let a: Vec<f64> = (0..hidden).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let b: Vec<f64> = (0..hidden).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let loss = |w: &LstmWeights, x: &[f64], h: &[f64], c: &[f64]| {
            let (h2, c2) = lstm_step(x, h, c, w).unwrap();
            h2.iter().zip(&a).map(|(p, q)| p * q).sum::<f64>() + c2.iter().zip(&b).map(|(p, q)| p * q).sum::<f64>()
        };
        let g = lstm_step_backward(&x, &h, &c, &w, &a, &b).unwrap();
        let eps = 1e-5;

        let rel = |an: &[f64], nu: &[f64]| {
            let diff: f64 = an.iter().zip(nu).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
            let scale = an.iter().map(|p| p * p).sum::<f64>().sqrt().max(nu.iter().map(|p| p * p).sum::<f64>().sqrt());
            diff / scale.max(1e-12)
        };

        for (name, pick) in [("w_x", 0usize), ("w_h", 1), ("bias", 2)] {
            let analytic = match pick {
                0 => g.weights.w_x.data().to_vec(),
                1 => g.weights.w_h.data().to_vec(),
                _ => g.weights.bias.data().to_vec(),
            };
            let mut numeric = vec![0.0; analytic.len()];
            for (i, nval) in numeric.iter_mut().enumerate() {
                let mut wp = w.clone();
                let mut wm = w.clone();
                let (tp, tm) = match pick {
                    0 => (&mut wp.w_x, &mut wm.w_x),
                    1 => (&mut wp.w_h, &mut wm.w_h),
                    _ => (&mut wp.bias, &mut wm.bias),
                };
                tp.data_mut()[i] += eps;
                tm.data_mut()[i] -= eps;
                *nval = (loss(&wp, &x, &h, &c) - loss(&wm, &x, &h, &c)) / (2.0 * eps);
            }
            assert!(rel(&analytic, &numeric) < 1e-4, "{name}: {}", rel(&analytic, &numeric));
        }

        let numeric_vec = |v: &[f64], which: usize| -> Vec<f64> {
            (0..v.len())
                .map(|i| {
                    let mut p = v.to_vec();
                    let mut m = v.to_vec();
                    p[i] += eps;
                    m[i] -= eps;
                    let (lp, lm) = match which {
                        0 => (loss(&w, &p, &h, &c), loss(&w, &m, &h, &c)),
                        1 => (loss(&w, &x, &p, &c), loss(&w, &x, &m, &c)),
                        _ => (loss(&w, &x, &h, &p), loss(&w, &x, &h, &m)),
                    };
                    (lp - lm) / (2.0 * eps)
                })
                .collect()
        };
        assert!(rel(&g.dx, &numeric_vec(&x, 0)) < 1e-4);
        assert!(rel(&g.dh, &numeric_vec(&h, 1)) < 1e-4);
        assert!(rel(&g.dc, &numeric_vec(&c, 2)) < 1e-4);
    }
}
