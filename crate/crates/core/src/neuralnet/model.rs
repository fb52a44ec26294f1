use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signalgen::IqWindow;

use super::gemm::{gemm, Trans};
use super::ops::{argmax, broadcast_cols, broadcast_rows, col2im_add, cross_entropy, im2col, relu_in_place, softmax};

/// I and Q.
pub const INPUT_CHANNELS: usize = 2;
/// Idle, U_D, U_I, U_D+U_I.
pub const NUM_CLASSES: usize = 4;

/// Layer sizes of the classifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Architecture {
    pub window_len: usize,
    pub conv1_filters: usize,
    pub conv1_kernel: usize,
    pub conv2_filters: usize,
    pub conv2_kernel: usize,
    pub hidden: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        Self::for_window_len(512)
    }
}

impl Architecture {
    /// 16 filters (k=5), 32 filters (k=5), 64 hidden units.
    pub fn for_window_len(window_len: usize) -> Self {
        Self {
            window_len,
            conv1_filters: 16,
            conv1_kernel: 5,
            conv2_filters: 32,
            conv2_kernel: 5,
            hidden: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            self.window_len,
            self.conv1_filters,
            self.conv1_kernel,
            self.conv2_filters,
            self.conv2_kernel,
            self.hidden,
        ];
        if dims.contains(&0) {
            return Err(Error::ShapeMismatch(format!("zero-sized layer in {self:?}")));
        }
        if self.window_len + 1 < self.conv1_kernel + self.conv2_kernel {
            return Err(Error::ShapeMismatch(format!(
                "window length {} too short for kernels {} and {}",
                self.window_len, self.conv1_kernel, self.conv2_kernel
            )));
        }
        Ok(())
    }

    pub fn conv1_len(&self) -> usize {
        self.window_len - self.conv1_kernel + 1
    }

    pub fn conv2_len(&self) -> usize {
        self.conv1_len() - self.conv2_kernel + 1
    }

    /// Width of the flattened conv2 feature map fed to the hidden layer.
    pub fn flat_len(&self) -> usize {
        self.conv2_filters * self.conv2_len()
    }

    fn segments(&self) -> Segments {
        let sizes = [
            self.conv1_filters * INPUT_CHANNELS * self.conv1_kernel,
            self.conv1_filters,
            self.conv2_filters * self.conv1_filters * self.conv2_kernel,
            self.conv2_filters,
            self.hidden * self.flat_len(),
            self.hidden,
            NUM_CLASSES * self.hidden,
            NUM_CLASSES,
        ];
        let mut ranges = Vec::with_capacity(8);
        let mut at = 0;
        for s in sizes {
            ranges.push(at..at + s);
            at += s;
        }
        let mut it = ranges.into_iter();
        let mut next = || it.next().expect("eight segments");
        Segments {
            conv1_w: next(),
            conv1_b: next(),
            conv2_w: next(),
            conv2_b: next(),
            dense_w: next(),
            dense_b: next(),
            out_w: next(),
            out_b: next(),
            total: at,
        }
    }

    /// Number of trainable parameters.
    pub fn param_count(&self) -> usize {
        self.segments().total
    }

    /// Multiply-accumulates in one forward pass over one window.
    pub fn inference_macs(&self) -> usize {
        self.conv1_filters * INPUT_CHANNELS * self.conv1_kernel * self.conv1_len()
            + self.conv2_filters * self.conv1_filters * self.conv2_kernel * self.conv2_len()
            + self.hidden * self.flat_len()
            + NUM_CLASSES * self.hidden
    }
}

struct Segments {
    conv1_w: Range<usize>,
    conv1_b: Range<usize>,
    conv2_w: Range<usize>,
    conv2_b: Range<usize>,
    dense_w: Range<usize>,
    dense_b: Range<usize>,
    out_w: Range<usize>,
    out_b: Range<usize>,
    total: usize,
}

/// Borrowed views of the flat parameter (or gradient) vector, one per layer.
///
/// Weight layouts: conv `(out, in, k)`, dense `(out, in)`, all row-major.
#[derive(Clone, Copy, Debug)]
pub struct LayerParams<'a, T> {
    pub conv1_w: &'a [T],
    pub conv1_b: &'a [T],
    pub conv2_w: &'a [T],
    pub conv2_b: &'a [T],
    pub dense_w: &'a [T],
    pub dense_b: &'a [T],
    pub out_w: &'a [T],
    pub out_b: &'a [T],
}

impl<'a, T> LayerParams<'a, T> {
    fn split(arch: &Architecture, flat: &'a [T]) -> Self {
        let s = arch.segments();
        Self {
            conv1_w: &flat[s.conv1_w],
            conv1_b: &flat[s.conv1_b],
            conv2_w: &flat[s.conv2_w],
            conv2_b: &flat[s.conv2_b],
            dense_w: &flat[s.dense_w],
            dense_b: &flat[s.dense_b],
            out_w: &flat[s.out_w],
            out_b: &flat[s.out_b],
        }
    }
}

/// Windows stacked as `(batch, 2, L)` plus their class indices.
#[derive(Clone, Debug)]
pub struct Batch<T> {
    pub inputs: Vec<T>,
    pub labels: Vec<usize>,
    pub window_len: usize,
}

impl<T: Scalar> Batch<T> {
    pub fn from_windows<'w, S: Scalar>(
        windows: impl IntoIterator<Item = &'w IqWindow<S>>,
        window_len: usize,
    ) -> Result<Self> {
        let mut inputs = Vec::new();
        let mut labels = Vec::new();
        for w in windows {
            if w.len() != window_len {
                return Err(Error::LengthMismatch {
                    expected: window_len,
                    got: w.len(),
                });
            }
            let label = w.label.ok_or(Error::MissingLabel)?;
            let start = inputs.len();
            inputs.resize(start + INPUT_CHANNELS * window_len, T::zero());
            w.write_channels(&mut inputs[start..]);
            labels.push(label.index());
        }
        Ok(Self {
            inputs,
            labels,
            window_len,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Gradient of the batch-mean cross-entropy, in the parameter layout.
#[derive(Clone, Debug)]
pub struct Gradients<T> {
    pub values: Vec<T>,
    /// Mean cross-entropy of the batch.
    pub loss: T,
    /// Number of windows whose argmax matched the label.
    pub correct: usize,
}

/// Activations kept for the backward pass.
struct Trace<T> {
    col1: Vec<T>,
    a1: Vec<T>,
    col2: Vec<T>,
    flat: Vec<T>,
    a3: Vec<T>,
    logits: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CnnModel<T> {
    arch: Architecture,
    params: Vec<T>,
}

impl<T: Scalar> CnnModel<T> {
    pub fn zeros(arch: Architecture) -> Result<Self> {
        arch.validate()?;
        Ok(Self {
            arch,
            params: vec![T::zero(); arch.param_count()],
        })
    }

    /// He-uniform weights for the ReLU layers, `±√(1/fan_in)` for the
    /// output layer, zero biases.
    pub fn init(arch: Architecture, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(arch)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = arch.segments();
        let fills = [
            (s.conv1_w, (6.0 / (INPUT_CHANNELS * arch.conv1_kernel) as f64).sqrt()),
            (s.conv2_w, (6.0 / (arch.conv1_filters * arch.conv2_kernel) as f64).sqrt()),
            (s.dense_w, (6.0 / arch.flat_len() as f64).sqrt()),
            (s.out_w, (1.0 / arch.hidden as f64).sqrt()),
        ];
        for (range, bound) in fills {
            for p in &mut model.params[range] {
                *p = T::of(rng.random_range(-bound..bound));
            }
        }
        Ok(model)
    }

    pub fn from_params(arch: Architecture, params: Vec<T>) -> Result<Self> {
        arch.validate()?;
        if params.len() != arch.param_count() {
            return Err(Error::ShapeMismatch(format!(
                "architecture needs {} parameters, got {}",
                arch.param_count(),
                params.len()
            )));
        }
        Ok(Self { arch, params })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn window_len(&self) -> usize {
        self.arch.window_len
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn layers(&self) -> LayerParams<'_, T> {
        LayerParams::split(&self.arch, &self.params)
    }

    /// Splits a gradient (or any parameter-shaped) vector into layer views.
    pub fn split_like<'a>(&self, flat: &'a [T]) -> LayerParams<'a, T> {
        LayerParams::split(&self.arch, flat)
    }

    pub fn cast<U: Scalar>(&self) -> CnnModel<U> {
        CnnModel {
            arch: self.arch,
            params: self.params.iter().map(|&p| U::of(p.as_f64())).collect(),
        }
    }

    fn run(&self, inputs: &[T], batch: usize) -> Result<Trace<T>> {
        let a = &self.arch;
        if inputs.len() != batch * INPUT_CHANNELS * a.window_len {
            return Err(Error::LengthMismatch {
                expected: batch * INPUT_CHANNELS * a.window_len,
                got: inputs.len(),
            });
        }
        let p = self.layers();
        let (len, t1, t2) = (a.window_len, a.conv1_len(), a.conv2_len());
        let (f1, f2, h, d) = (a.conv1_filters, a.conv2_filters, a.hidden, a.flat_len());

        let col1 = im2col(inputs, INPUT_CHANNELS, batch, len, a.conv1_kernel, len, INPUT_CHANNELS * len);
        let mut a1 = broadcast_rows(p.conv1_b, batch * t1);
        gemm(f1, batch * t1, INPUT_CHANNELS * a.conv1_kernel, T::one(), p.conv1_w, Trans::No, &col1, Trans::No, T::one(), &mut a1);
        relu_in_place(&mut a1);

        let col2 = im2col(&a1, f1, batch, t1, a.conv2_kernel, batch * t1, t1);
        let mut a2 = broadcast_rows(p.conv2_b, batch * t2);
        gemm(f2, batch * t2, f1 * a.conv2_kernel, T::one(), p.conv2_w, Trans::No, &col2, Trans::No, T::one(), &mut a2);
        relu_in_place(&mut a2);

        // (F2, batch·T2) → (batch, F2·T2)
        let mut flat = vec![T::zero(); batch * d];
        for c in 0..f2 {
            for b in 0..batch {
                flat[b * d + c * t2..][..t2].copy_from_slice(&a2[c * batch * t2 + b * t2..][..t2]);
            }
        }

        let mut a3 = broadcast_cols(p.dense_b, batch);
        gemm(batch, h, d, T::one(), &flat, Trans::No, p.dense_w, Trans::Yes, T::one(), &mut a3);
        relu_in_place(&mut a3);

        let mut logits = broadcast_cols(p.out_b, batch);
        gemm(batch, NUM_CLASSES, h, T::one(), &a3, Trans::No, p.out_w, Trans::Yes, T::one(), &mut logits);

        if !logits.iter().all(|z| z.is_finite()) {
            return Err(Error::NonFinite("forward pass"));
        }
        Ok(Trace {
            col1,
            a1,
            col2,
            flat,
            a3,
            logits,
        })
    }

    /// Raw class scores for `batch` stacked `(2, L)` inputs, `batch × 4` row-major.
    pub fn logits(&self, inputs: &[T], batch: usize) -> Result<Vec<T>> {
        Ok(self.run(inputs, batch)?.logits)
    }

    /// Softmax posterior over {Idle, U_D, U_I, U_D+U_I}.
    pub fn predict<S: Scalar>(&self, window: &IqWindow<S>) -> Result<[T; NUM_CLASSES]> {
        if window.len() != self.arch.window_len {
            return Err(Error::LengthMismatch {
                expected: self.arch.window_len,
                got: window.len(),
            });
        }
        let mut input = vec![T::zero(); INPUT_CHANNELS * window.len()];
        window.write_channels(&mut input);
        let logits = self.logits(&input, 1)?;
        let probs = softmax(&logits);
        Ok([probs[0], probs[1], probs[2], probs[3]])
    }

    /// Mean cross-entropy over `batch` and its gradient by reverse-mode
    /// differentiation through every layer.
    pub fn backward(&self, batch: &Batch<T>) -> Result<Gradients<T>> {
        let n = batch.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if batch.window_len != self.arch.window_len {
            return Err(Error::LengthMismatch {
                expected: self.arch.window_len,
                got: batch.window_len,
            });
        }
        let tr = self.run(&batch.inputs, n)?;
        let a = &self.arch;
        let p = self.layers();
        let (t1, t2) = (a.conv1_len(), a.conv2_len());
        let (f1, f2, h, d) = (a.conv1_filters, a.conv2_filters, a.hidden, a.flat_len());
        let inv_n = T::one() / T::of(n as f64);

        let mut loss = T::zero();
        let mut correct = 0;
        let mut d_logits = Vec::with_capacity(n * NUM_CLASSES);
        for (row, &label) in tr.logits.chunks_exact(NUM_CLASSES).zip(&batch.labels) {
            loss += cross_entropy(row, label);
            if argmax(row) == label {
                correct += 1;
            }
            for (k, pk) in softmax(row).into_iter().enumerate() {
                let target = if k == label { T::one() } else { T::zero() };
                d_logits.push((pk - target) * inv_n);
            }
        }
        loss *= inv_n;
        if !loss.is_finite() {
            return Err(Error::NonFinite("loss"));
        }

        let mut grads = vec![T::zero(); self.params.len()];
        let s = a.segments();

        // output layer
        gemm(NUM_CLASSES, h, n, T::one(), &d_logits, Trans::Yes, &tr.a3, Trans::No, T::zero(), &mut grads[s.out_w]);
        column_sums(&d_logits, NUM_CLASSES, &mut grads[s.out_b]);
        let mut d3 = vec![T::zero(); n * h];
        gemm(n, h, NUM_CLASSES, T::one(), &d_logits, Trans::No, p.out_w, Trans::No, T::zero(), &mut d3);
        relu_mask(&mut d3, &tr.a3);

        // hidden dense layer
        gemm(h, d, n, T::one(), &d3, Trans::Yes, &tr.flat, Trans::No, T::zero(), &mut grads[s.dense_w]);
        column_sums(&d3, h, &mut grads[s.dense_b]);
        let mut d_flat = vec![T::zero(); n * d];
        gemm(n, d, h, T::one(), &d3, Trans::No, p.dense_w, Trans::No, T::zero(), &mut d_flat);
        relu_mask(&mut d_flat, &tr.flat);

        // (batch, F2·T2) → (F2, batch·T2)
        let mut d2 = vec![T::zero(); f2 * n * t2];
        for c in 0..f2 {
            for b in 0..n {
                d2[c * n * t2 + b * t2..][..t2].copy_from_slice(&d_flat[b * d + c * t2..][..t2]);
            }
        }

        // conv2
        let k2 = f1 * a.conv2_kernel;
        gemm(f2, k2, n * t2, T::one(), &d2, Trans::No, &tr.col2, Trans::Yes, T::zero(), &mut grads[s.conv2_w]);
        row_sums(&d2, n * t2, &mut grads[s.conv2_b]);
        let mut d_col2 = vec![T::zero(); k2 * n * t2];
        gemm(k2, n * t2, f2, T::one(), p.conv2_w, Trans::Yes, &d2, Trans::No, T::zero(), &mut d_col2);
        let mut d1 = vec![T::zero(); f1 * n * t1];
        col2im_add(&d_col2, &mut d1, f1, n, t1, a.conv2_kernel, n * t1, t1);
        relu_mask(&mut d1, &tr.a1);

        // conv1
        let k1 = INPUT_CHANNELS * a.conv1_kernel;
        gemm(f1, k1, n * t1, T::one(), &d1, Trans::No, &tr.col1, Trans::Yes, T::zero(), &mut grads[s.conv1_w]);
        row_sums(&d1, n * t1, &mut grads[s.conv1_b]);

        if !grads.iter().all(|g| g.is_finite()) {
            return Err(Error::NonFinite("gradients"));
        }
        Ok(Gradients {
            values: grads,
            loss,
            correct,
        })
    }
}

/// Zeroes upstream gradients where the ReLU output was not positive.
fn relu_mask<T: Scalar>(grad: &mut [T], activation: &[T]) {
    for (g, &y) in grad.iter_mut().zip(activation) {
        if y <= T::zero() {
            *g = T::zero();
        }
    }
}

/// Sums the rows of a `rows × cols` matrix into `out[cols]`.
fn column_sums<T: Scalar>(m: &[T], cols: usize, out: &mut [T]) {
    out.fill(T::zero());
    for row in m.chunks_exact(cols) {
        for (o, &v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
}

/// Sums each row of a `out.len() × cols` matrix.
fn row_sums<T: Scalar>(m: &[T], cols: usize, out: &mut [T]) {
    for (o, row) in out.iter_mut().zip(m.chunks_exact(cols)) {
        *o = row.iter().copied().sum();
    }
}

/// Gradient of the mean cross-entropy of `batch` with respect to every parameter.
pub fn backward<T: Scalar>(model: &CnnModel<T>, batch: &Batch<T>) -> Result<Gradients<T>> {
    model.backward(batch)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Architecture {
        Architecture {
            window_len: 32,
            conv1_filters: 2,
            conv1_kernel: 5,
            conv2_filters: 2,
            conv2_kernel: 5,
            hidden: 4,
        }
    }

    #[test]
    fn default_sizes() {
        let a = Architecture::default();
        assert_eq!(a.conv1_len(), 508);
        assert_eq!(a.conv2_len(), 504);
        assert_eq!(a.flat_len(), 32 * 504);
        let expected = 16 * 2 * 5 + 16 + 32 * 16 * 5 + 32 + 64 * 32 * 504 + 64 + 4 * 64 + 4;
        assert_eq!(a.param_count(), expected);
        assert_eq!(CnnModel::<f64>::zeros(a).unwrap().param_count(), expected);
    }

    #[test]
    fn validate_rejects_degenerate() {
        let mut a = tiny();
        a.window_len = 8;
        assert!(a.validate().is_err());
        a.window_len = 9;
        assert!(a.validate().is_ok());
        a.hidden = 0;
        assert!(a.validate().is_err());
    }

    #[test]
    fn zero_model_is_uniform() {
        let m = CnnModel::<f64>::zeros(tiny()).unwrap();
        let w = IqWindow::new(vec![num_complex::Complex::new(0.3f64, -0.7); 32], None);
        assert_eq!(m.predict(&w).unwrap(), [0.25; 4]);
    }

    #[test]
    fn predict_checks_length() {
        let m = CnnModel::<f64>::init(tiny(), 1).unwrap();
        let w = IqWindow::new(vec![num_complex::Complex::new(1.0f64, 0.0); 128], None);
        assert!(matches!(m.predict(&w), Err(Error::LengthMismatch { expected: 32, got: 128 })));
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = CnnModel::<f64>::init(tiny(), 3).unwrap();
        assert_eq!(a, CnnModel::init(tiny(), 3).unwrap());
        assert_ne!(a, CnnModel::init(tiny(), 4).unwrap());
        let l = a.layers();
        assert!(l.conv1_b.iter().chain(l.out_b).all(|&b| b == 0.0));
        let bound = (6.0f64 / 10.0).sqrt();
        assert!(l.conv1_w.iter().all(|w| w.abs() < bound));
        assert!(l.out_w.iter().all(|w| w.abs() < 0.5));
    }
}
