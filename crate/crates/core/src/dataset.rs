//! Labeled window collections and the `.risl` file format.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "RISL"            4 bytes magic
//! version           u16 (currently 1)
//! window length L   u32
//! window count      u32
//! per window:       label u8 (0..=3), then 2·L f32 with I/Q interleaved
//! ```

use std::fs;
use std::path::Path;

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::signalgen::{self, IqWindow, SignalClass, UserSignature};

pub const DATASET_MAGIC: [u8; 4] = *b"RISL";
pub const DATASET_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 4 + 4;

/// How a dataset was generated. Not persisted by the file format.
#[derive(Clone, Debug, PartialEq)]
pub struct GenMeta {
    pub seed: u64,
    pub snr_range_db: (f64, f64),
    pub desired: UserSignature,
    pub interferer: UserSignature,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    window_len: usize,
    windows: Vec<IqWindow<f32>>,
    meta: Option<GenMeta>,
}

impl LabeledDataset {
    /// Every window must be labeled and exactly `window_len` long.
    pub fn new(window_len: usize, windows: Vec<IqWindow<f32>>) -> Result<Self> {
        for w in &windows {
            if w.len() != window_len {
                return Err(Error::LengthMismatch {
                    expected: window_len,
                    got: w.len(),
                });
            }
            if w.label.is_none() {
                return Err(Error::MissingLabel);
            }
        }
        Ok(Self {
            window_len,
            windows,
            meta: None,
        })
    }

    pub fn with_meta(mut self, meta: GenMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn without_meta(&self) -> Self {
        Self {
            meta: None,
            ..self.clone()
        }
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn windows(&self) -> &[IqWindow<f32>] {
        &self.windows
    }

    pub fn meta(&self) -> Option<&GenMeta> {
        self.meta.as_ref()
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn label(&self, idx: usize) -> SignalClass {
        self.windows[idx].label.expect("dataset windows are labeled")
    }

    pub fn class_counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for w in &self.windows {
            if let Some(c) = w.label {
                counts[c.index()] += 1;
            }
        }
        counts
    }

    fn subset(&self, indices: &[usize]) -> Self {
        Self {
            window_len: self.window_len,
            windows: indices.iter().map(|&i| self.windows[i].clone()).collect(),
            meta: self.meta.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSplit {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub ratio: f64,
}

impl DatasetSplit {
    pub fn window_len(&self) -> usize {
        self.train.window_len
    }
}

/// Random stream for one generated window; independent of worker scheduling.
fn window_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n_per_class` windows of every class, class-major order, SNR uniform in `snr_range_db`.
pub fn build_dataset(
    n_per_class: usize,
    window_len: usize,
    snr_range_db: (f64, f64),
    desired: &UserSignature,
    interferer: &UserSignature,
    seed: u64,
) -> Result<LabeledDataset> {
    signalgen::check_window_len(window_len)?;
    if n_per_class == 0 {
        return Err(Error::InvalidArgument("n_per_class must be >= 1".into()));
    }
    let (lo, hi) = snr_range_db;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidArgument(format!(
            "invalid snr range [{lo}, {hi}]"
        )));
    }
    desired.validate()?;
    interferer.validate()?;

    let total = n_per_class * SignalClass::COUNT;
    let windows = (0..total)
        .into_par_iter()
        .map(|idx| {
            let class = SignalClass::ALL[idx / n_per_class];
            let mut rng = window_rng(seed, idx as u64);
            let snr = rng.random_range(lo..=hi);
            signalgen::make_window(class, window_len, snr, desired, interferer, &mut rng)
                .map(|w| w.cast::<f32>())
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(LabeledDataset {
        window_len,
        windows,
        meta: Some(GenMeta {
            seed,
            snr_range_db,
            desired: *desired,
            interferer: *interferer,
        }),
    })
}

/// Stratified split. The train total is `round(ratio·N)`; per-class shares
/// are allotted by largest remainder (ties to the lower class index) and
/// members are drawn by a seeded shuffle within each class.
pub fn split(ds: &LabeledDataset, ratio: f64, seed: u64) -> Result<DatasetSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    if ds.len() < 4 {
        return Err(Error::DatasetTooSmall(ds.len()));
    }

    let mut by_class: [Vec<usize>; 4] = Default::default();
    for idx in 0..ds.len() {
        by_class[ds.label(idx).index()].push(idx);
    }

    let target = (ratio * ds.len() as f64).round() as usize;
    let mut quota = [0usize; 4];
    let mut remainders = Vec::with_capacity(4);
    for (c, members) in by_class.iter().enumerate() {
        let exact = ratio * members.len() as f64;
        quota[c] = exact.floor() as usize;
        remainders.push((exact - exact.floor(), c));
    }
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut missing = target.saturating_sub(quota.iter().sum());
    for &(_, c) in &remainders {
        if missing == 0 {
            break;
        }
        if quota[c] < by_class[c].len() {
            quota[c] += 1;
            missing -= 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (c, members) in by_class.iter_mut().enumerate() {
        members.shuffle(&mut rng);
        let (tr, te) = members.split_at(quota[c]);
        train_idx.extend_from_slice(tr);
        test_idx.extend_from_slice(te);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    if train_idx.is_empty() || test_idx.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "ratio {ratio} leaves an empty side for {} windows",
            ds.len()
        )));
    }

    Ok(DatasetSplit {
        train: ds.subset(&train_idx),
        test: ds.subset(&test_idx),
        ratio,
    })
}

pub fn to_bytes(ds: &LabeledDataset) -> Result<Vec<u8>> {
    let len = u32::try_from(ds.window_len)
        .map_err(|_| Error::InvalidArgument("window length exceeds u32".into()))?;
    let count = u32::try_from(ds.len())
        .map_err(|_| Error::InvalidArgument("window count exceeds u32".into()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + ds.len() * (1 + 8 * ds.window_len));
    out.extend_from_slice(&DATASET_MAGIC);
    out.extend_from_slice(&DATASET_VERSION.to_le_bytes());
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    for w in &ds.windows {
        out.push(w.label.ok_or(Error::MissingLabel)? as u8);
        for s in &w.samples {
            out.extend_from_slice(&s.re.to_le_bytes());
            out.extend_from_slice(&s.im.to_le_bytes());
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let available = self.buf.len() - self.pos;
        if n > available {
            return Err(Error::Truncated {
                needed: self.pos + n,
                available: self.buf.len(),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("exact length"))
    }
}

pub fn from_bytes(buf: &[u8]) -> Result<LabeledDataset> {
    let mut cur = Cursor { buf, pos: 0 };
    let magic: [u8; 4] = cur.array()?;
    if magic != DATASET_MAGIC {
        return Err(Error::BadMagic {
            expected: DATASET_MAGIC,
            found: magic,
        });
    }
    let version = u16::from_le_bytes(cur.array()?);
    if version != DATASET_VERSION {
        return Err(Error::VersionMismatch {
            expected: DATASET_VERSION,
            found: version,
        });
    }
    let window_len = u32::from_le_bytes(cur.array()?) as usize;
    let count = u32::from_le_bytes(cur.array()?) as usize;

    let mut windows = Vec::with_capacity(count.min(buf.len() / (1 + 8 * window_len.max(1))));
    for _ in 0..count {
        let [label] = cur.array::<1>()?;
        let label = SignalClass::from_index(label as usize).ok_or(Error::InvalidLabel(label))?;
        let payload = cur.take(8 * window_len)?;
        let samples = payload
            .chunks_exact(8)
            .map(|c| {
                Complex::new(
                    f32::from_le_bytes(c[..4].try_into().unwrap()),
                    f32::from_le_bytes(c[4..].try_into().unwrap()),
                )
            })
            .collect();
        windows.push(IqWindow::new(samples, Some(label)));
    }
    if cur.pos != buf.len() {
        return Err(Error::TrailingBytes(buf.len() - cur.pos));
    }
    Ok(LabeledDataset {
        window_len,
        windows,
        meta: None,
    })
}

pub fn save(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_bytes(ds)?)?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    from_bytes(&fs::read(path)?)
}
