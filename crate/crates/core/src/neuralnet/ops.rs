use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::gemm::{gemm, Trans};
use super::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
}

impl Activation {
    fn apply_in_place<T: Scalar>(self, xs: &mut [T]) {
        if self == Activation::Relu {
            relu_in_place(xs);
        }
    }
}

pub(crate) fn relu_in_place<T: Scalar>(xs: &mut [T]) {
    for x in xs {
        if *x < T::zero() {
            *x = T::zero();
        }
    }
}

/// Unrolls sliding windows of `src` into the columns of a matrix.
///
/// `src[c*chan_stride + b*batch_stride + t]` is channel `c`, sample `b`, time
/// `t`. The result is `(channels·k) × (batch·out_len)` row-major, with row
/// `c*k + tau` and column `b*out_len + t` holding `src[.., t + tau]`.
pub(crate) fn im2col<T: Scalar>(
    src: &[T],
    channels: usize,
    batch: usize,
    len: usize,
    k: usize,
    chan_stride: usize,
    batch_stride: usize,
) -> Vec<T> {
    let out_len = len - k + 1;
    let cols = batch * out_len;
    let mut col = vec![T::zero(); channels * k * cols];
    for c in 0..channels {
        for tau in 0..k {
            let row = &mut col[(c * k + tau) * cols..][..cols];
            for b in 0..batch {
                let start = c * chan_stride + b * batch_stride + tau;
                row[b * out_len..][..out_len].copy_from_slice(&src[start..start + out_len]);
            }
        }
    }
    col
}

/// Adjoint of [`im2col`]: scatters-and-adds column gradients back onto `dst`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn col2im_add<T: Scalar>(
    col: &[T],
    dst: &mut [T],
    channels: usize,
    batch: usize,
    len: usize,
    k: usize,
    chan_stride: usize,
    batch_stride: usize,
) {
    let out_len = len - k + 1;
    let cols = batch * out_len;
    for c in 0..channels {
        for tau in 0..k {
            let row = &col[(c * k + tau) * cols..][..cols];
            for b in 0..batch {
                let start = c * chan_stride + b * batch_stride + tau;
                for (d, &g) in dst[start..start + out_len]
                    .iter_mut()
                    .zip(&row[b * out_len..][..out_len])
                {
                    *d += g;
                }
            }
        }
    }
}

/// Fills each row of an `rows × cols` matrix with its bias.
pub(crate) fn broadcast_rows<T: Scalar>(bias: &[T], cols: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(bias.len() * cols);
    for &b in bias {
        out.extend(std::iter::repeat_n(b, cols));
    }
    out
}

/// Tiles `bias` across `rows` rows of an `rows × bias.len()` matrix.
pub(crate) fn broadcast_cols<T: Scalar>(bias: &[T], rows: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(bias.len() * rows);
    for _ in 0..rows {
        out.extend_from_slice(bias);
    }
    out
}

/// Valid (unpadded) 1-D convolution, stride 1.
///
/// `input` is `(C_in, T)`, `kernel` is `(C_out, C_in, k)`; the output is
/// `(C_out, T−k+1)` with `out[c,t] = act(bias[c] + Σ kernel[c,i,τ]·input[i,t+τ])`.
pub fn conv1d_forward<T: Scalar>(
    input: &Tensor<T>,
    kernel: &Tensor<T>,
    bias: &[T],
    activation: Activation,
) -> Result<Tensor<T>> {
    let (&[c_in, len], &[c_out, k_in, k]) = (input.shape(), kernel.shape()) else {
        return Err(Error::ShapeMismatch(format!(
            "conv1d expects (C_in, T) input and (C_out, C_in, k) kernel, got {:?} and {:?}",
            input.shape(),
            kernel.shape()
        )));
    };
    if k_in != c_in {
        return Err(Error::ShapeMismatch(format!(
            "kernel has {k_in} input channels, input has {c_in}"
        )));
    }
    if bias.len() != c_out {
        return Err(Error::LengthMismatch {
            expected: c_out,
            got: bias.len(),
        });
    }
    if k == 0 || len < k {
        return Err(Error::ShapeMismatch(format!(
            "input length {len} shorter than kernel {k}"
        )));
    }
    let out_len = len - k + 1;
    let col = im2col(input.data(), c_in, 1, len, k, len, 0);
    let mut out = broadcast_rows(bias, out_len);
    gemm(
        c_out,
        out_len,
        c_in * k,
        T::one(),
        kernel.data(),
        Trans::No,
        &col,
        Trans::No,
        T::one(),
        &mut out,
    );
    activation.apply_in_place(&mut out);
    Tensor::new(vec![c_out, out_len], out)
}

/// `act(W·x + b)` with `W` shaped `(out, in)`.
pub fn dense_forward<T: Scalar>(
    input: &[T],
    weights: &Tensor<T>,
    bias: &[T],
    activation: Activation,
) -> Result<Vec<T>> {
    let &[n_out, n_in] = weights.shape() else {
        return Err(Error::ShapeMismatch(format!(
            "dense weights must be 2-D, got {:?}",
            weights.shape()
        )));
    };
    if input.len() != n_in {
        return Err(Error::LengthMismatch {
            expected: n_in,
            got: input.len(),
        });
    }
    if bias.len() != n_out {
        return Err(Error::LengthMismatch {
            expected: n_out,
            got: bias.len(),
        });
    }
    let mut out = bias.to_vec();
    gemm(
        n_out,
        1,
        n_in,
        T::one(),
        weights.data(),
        Trans::No,
        input,
        Trans::No,
        T::one(),
        &mut out,
    );
    activation.apply_in_place(&mut out);
    Ok(out)
}

fn max_of<T: Scalar>(xs: &[T]) -> T {
    xs.iter().copied().fold(T::neg_infinity(), T::max)
}

pub fn log_softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let m = max_of(logits);
    let lse = logits.iter().map(|&z| (z - m).exp()).sum::<T>().ln() + m;
    logits.iter().map(|&z| z - lse).collect()
}

pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let m = max_of(logits);
    let exps: Vec<T> = logits.iter().map(|&z| (z - m).exp()).collect();
    let sum: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `−ln softmax(logits)[label]`, evaluated through log-sum-exp.
pub fn cross_entropy<T: Scalar>(logits: &[T], label: usize) -> T {
    let m = max_of(logits);
    let lse = logits.iter().map(|&z| (z - m).exp()).sum::<T>().ln() + m;
    lse - logits[label]
}

/// Index of the largest entry, ties resolved to the lowest index.
pub fn argmax<T: PartialOrd + Copy>(xs: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}
