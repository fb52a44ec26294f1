//! Synthetic I/Q windows for the four spectrum-occupancy classes.
//!
//! Two users share the band: the desired user `U_D` and the interferer `U_I`.
//! Each carries a distinct RF signature (constellation plus carrier frequency
//! offset) so that a classifier can tell them apart from raw samples. Every
//! window is normalized to unit mean power, which removes the trivial power
//! cue between "idle" and "occupied".

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Window lengths the classifier supports.
pub const SUPPORTED_WINDOW_LENGTHS: [usize; 3] = [32, 128, 512];

/// Range (dB) of the interferer-to-desired power ratio inside `Both` windows.
pub const INTERFERER_RATIO_RANGE_DB: (f64, f64) = (-5.0, 5.0);

pub fn check_window_len(len: usize) -> Result<()> {
    if SUPPORTED_WINDOW_LENGTHS.contains(&len) {
        Ok(())
    } else {
        Err(Error::UnsupportedWindowLength(len))
    }
}

/// Which users are transmitting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum SignalClass {
    Idle = 0,
    DOnly = 1,
    IOnly = 2,
    Both = 3,
}

impl SignalClass {
    pub const ALL: [SignalClass; 4] = [
        SignalClass::Idle,
        SignalClass::DOnly,
        SignalClass::IOnly,
        SignalClass::Both,
    ];
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(idx: usize) -> Option<Self> {
        Self::ALL.get(idx).copied()
    }

    pub fn has_desired(self) -> bool {
        matches!(self, SignalClass::DOnly | SignalClass::Both)
    }

    pub fn has_interferer(self) -> bool {
        matches!(self, SignalClass::IOnly | SignalClass::Both)
    }

    pub fn name(self) -> &'static str {
        match self {
            SignalClass::Idle => "Idle",
            SignalClass::DOnly => "U_D",
            SignalClass::IOnly => "U_I",
            SignalClass::Both => "U_D+U_I",
        }
    }
}

impl fmt::Display for SignalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Modulation {
    Qpsk,
    Bpsk,
}

/// Per-user transmit signature.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct UserSignature {
    pub modulation: Modulation,
    /// Normalized carrier frequency offset, cycles/sample.
    pub cfo: f64,
    pub samples_per_symbol: usize,
}

impl UserSignature {
    pub fn new(modulation: Modulation, cfo: f64, samples_per_symbol: usize) -> Result<Self> {
        let sig = Self {
            modulation,
            cfo,
            samples_per_symbol,
        };
        sig.validate()?;
        Ok(sig)
    }

    /// QPSK, +0.01 cycles/sample, 4 samples/symbol.
    pub fn desired_default() -> Self {
        Self {
            modulation: Modulation::Qpsk,
            cfo: 0.01,
            samples_per_symbol: 4,
        }
    }

    /// BPSK, -0.02 cycles/sample, 4 samples/symbol.
    pub fn interferer_default() -> Self {
        Self {
            modulation: Modulation::Bpsk,
            cfo: -0.02,
            samples_per_symbol: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfo.is_finite() && self.cfo.abs() < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "cfo must satisfy |cfo| < 0.5, got {}",
                self.cfo
            )));
        }
        if self.samples_per_symbol == 0 {
            return Err(Error::InvalidArgument(
                "samples_per_symbol must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// A fixed-length run of complex baseband samples, optionally labeled.
#[derive(Clone, Debug, PartialEq)]
pub struct IqWindow<T> {
    pub samples: Vec<Complex<T>>,
    pub label: Option<SignalClass>,
}

impl<T: Scalar> IqWindow<T> {
    pub fn new(samples: Vec<Complex<T>>, label: Option<SignalClass>) -> Self {
        Self { samples, label }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean per-sample power, accumulated in `f64`.
    pub fn mean_power(&self) -> f64 {
        mean_power_of(&self.samples)
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|s| s.re.is_finite() && s.im.is_finite())
    }

    pub fn cast<U: Scalar>(&self) -> IqWindow<U> {
        IqWindow {
            samples: self
                .samples
                .iter()
                .map(|s| Complex::new(U::of(s.re.as_f64()), U::of(s.im.as_f64())))
                .collect(),
            label: self.label,
        }
    }

    /// Writes the window as a `(2, L)` channel-major block: I then Q.
    pub fn write_channels<U: Scalar>(&self, out: &mut [U]) {
        let len = self.samples.len();
        debug_assert_eq!(out.len(), 2 * len);
        let (i_part, q_part) = out.split_at_mut(len);
        for ((s, i), q) in self.samples.iter().zip(i_part).zip(q_part) {
            *i = U::of(s.re.as_f64());
            *q = U::of(s.im.as_f64());
        }
    }
}

fn mean_power_of<T: Scalar>(seq: &[Complex<T>]) -> f64 {
    if seq.is_empty() {
        return 0.0;
    }
    let total: f64 = seq
        .iter()
        .map(|s| {
            let (re, im) = (s.re.as_f64(), s.im.as_f64());
            re * re + im * im
        })
        .sum();
    total / seq.len() as f64
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex<f64> {
    let sigma = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(sigma * re, sigma * im)
}

/// Random unit-power symbols, rectangular-pulse upsampled and rotated by the CFO.
///
/// Returns `n * samples_per_symbol` samples.
pub fn gen_symbols<R: Rng + ?Sized>(
    signature: &UserSignature,
    n: usize,
    rng: &mut R,
) -> Vec<Complex<f64>> {
    let sps = signature.samples_per_symbol;
    let mut out = Vec::with_capacity(n * sps);
    for _ in 0..n {
        let symbol = match signature.modulation {
            Modulation::Qpsk => {
                let re = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let im = if rng.random::<bool>() { 1.0 } else { -1.0 };
                Complex::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
            }
            Modulation::Bpsk => Complex::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0),
        };
        out.extend(std::iter::repeat_n(symbol, sps));
    }
    if signature.cfo != 0.0 {
        for (t, s) in out.iter_mut().enumerate() {
            *s *= Complex::from_polar(1.0, 2.0 * PI * signature.cfo * t as f64);
        }
    }
    out
}

/// Adds circularly symmetric Gaussian noise at `snr_db` relative to the
/// empirical mean power of `seq`.
pub fn awgn<R: Rng + ?Sized>(
    seq: &[Complex<f64>],
    snr_db: f64,
    rng: &mut R,
) -> Result<Vec<Complex<f64>>> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    if !snr_db.is_finite() {
        return Err(Error::InvalidArgument(format!("snr_db must be finite, got {snr_db}")));
    }
    let variance = mean_power_of(seq) / 10f64.powf(snr_db / 10.0);
    Ok(seq
        .iter()
        .map(|&s| s + complex_gaussian(rng, variance))
        .collect())
}

/// `desired + sqrt(10^(power_ratio_db/10)) * interferer`; a missing operand counts as zero.
pub fn mix(
    desired: Option<&[Complex<f64>]>,
    interferer: Option<&[Complex<f64>]>,
    power_ratio_db: f64,
) -> Result<Vec<Complex<f64>>> {
    let scale = 10f64.powf(power_ratio_db / 20.0);
    match (desired, interferer) {
        (None, None) => Err(Error::MissingOperands),
        (Some(d), None) => Ok(d.to_vec()),
        (None, Some(i)) => Ok(i.iter().map(|&s| s * scale).collect()),
        (Some(d), Some(i)) => {
            if d.len() != i.len() {
                return Err(Error::LengthMismatch {
                    expected: d.len(),
                    got: i.len(),
                });
            }
            Ok(d.iter().zip(i).map(|(&a, &b)| a + b * scale).collect())
        }
    }
}

/// Scales `seq` in place to unit mean power. An all-zero sequence is left alone.
pub fn normalize_power(seq: &mut [Complex<f64>]) {
    let p = mean_power_of(seq);
    if p > 0.0 {
        let g = p.sqrt().recip();
        for s in seq {
            *s *= g;
        }
    }
}

fn user_samples<R: Rng + ?Sized>(sig: &UserSignature, len: usize, rng: &mut R) -> Vec<Complex<f64>> {
    let n = len.div_ceil(sig.samples_per_symbol);
    let mut s = gen_symbols(sig, n, rng);
    s.truncate(len);
    s
}

/// One labeled, unit-power window of class `class`.
pub fn make_window<R: Rng + ?Sized>(
    class: SignalClass,
    len: usize,
    snr_db: f64,
    sig_d: &UserSignature,
    sig_i: &UserSignature,
    rng: &mut R,
) -> Result<IqWindow<f64>> {
    check_window_len(len)?;
    sig_d.validate()?;
    sig_i.validate()?;
    if !snr_db.is_finite() {
        return Err(Error::InvalidArgument(format!("snr_db must be finite, got {snr_db}")));
    }

    let mut samples = match class {
        SignalClass::Idle => (0..len).map(|_| complex_gaussian(rng, 1.0)).collect(),
        SignalClass::DOnly => awgn(&user_samples(sig_d, len, rng), snr_db, rng)?,
        SignalClass::IOnly => awgn(&user_samples(sig_i, len, rng), snr_db, rng)?,
        SignalClass::Both => {
            let d = user_samples(sig_d, len, rng);
            let i = user_samples(sig_i, len, rng);
            let (lo, hi) = INTERFERER_RATIO_RANGE_DB;
            let ratio_db = rng.random_range(lo..=hi);
            awgn(&mix(Some(&d), Some(&i), ratio_db)?, snr_db, rng)?
        }
    };
    normalize_power(&mut samples);
    Ok(IqWindow::new(samples, Some(class)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn qpsk_without_cfo_stays_on_constellation() {
        let sig = UserSignature::new(Modulation::Qpsk, 0.0, 1).unwrap();
        let s = gen_symbols(&sig, 4, &mut rng(1));
        assert_eq!(s.len(), 4);
        for x in s {
            assert!((x.re.abs() - FRAC_1_SQRT_2).abs() < 1e-15);
            assert!((x.im.abs() - FRAC_1_SQRT_2).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_symbols_is_empty() {
        let s = gen_symbols(&UserSignature::desired_default(), 0, &mut rng(1));
        assert!(s.is_empty());
    }

    #[test]
    fn symbol_count_scales_with_oversampling() {
        let s = gen_symbols(&UserSignature::interferer_default(), 7, &mut rng(1));
        assert_eq!(s.len(), 28);
    }

    #[test]
    fn qpsk_mean_power_is_unity() {
        let sig = UserSignature::new(Modulation::Qpsk, 0.0, 1).unwrap();
        let s = gen_symbols(&sig, 100_000, &mut rng(2));
        assert!((mean_power_of(&s) - 1.0).abs() < 0.01);
    }

    #[test]
    fn cfo_rotates_phase_per_sample() {
        let sig = UserSignature::new(Modulation::Bpsk, 0.25, 8).unwrap();
        let s = gen_symbols(&sig, 1, &mut rng(3));
        // quarter-cycle per sample: s[t+1] = j * s[t] within one symbol
        for t in 0..7 {
            let r = s[t + 1] / s[t];
            assert!((r - Complex::new(0.0, 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn invalid_signatures_rejected() {
        assert!(UserSignature::new(Modulation::Qpsk, 0.5, 4).is_err());
        assert!(UserSignature::new(Modulation::Qpsk, 0.1, 0).is_err());
    }

    #[test]
    fn awgn_rejects_empty() {
        assert!(matches!(awgn(&[], 10.0, &mut rng(0)), Err(Error::EmptySequence)));
    }

    #[test]
    fn awgn_at_high_snr_is_nearly_transparent() {
        let sig = UserSignature::desired_default();
        let s = gen_symbols(&sig, 256, &mut rng(4));
        let y = awgn(&s, 100.0, &mut rng(5)).unwrap();
        let mse: f64 = s.iter().zip(&y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / s.len() as f64;
        assert!(mse < 1e-4);
    }

    #[test]
    fn awgn_noise_power_tracks_snr() {
        let ones = vec![Complex::new(1.0, 0.0); 100_000];
        for (snr, expected) in [(0.0, 1.0), (10.0, 0.1)] {
            let y = awgn(&ones, snr, &mut rng(6)).unwrap();
            let p: f64 = y.iter().zip(&ones).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / 1e5;
            assert!((p / expected - 1.0).abs() < 0.05, "snr {snr}: noise power {p}");
        }
    }

    #[test]
    fn mix_cases() {
        let s1: Vec<_> = (0..8).map(|i| Complex::new(i as f64, 1.0)).collect();
        let s2: Vec<_> = (0..8).map(|i| Complex::new(1.0, -(i as f64))).collect();
        assert_eq!(mix(Some(&s1), None, 7.0).unwrap(), s1);
        let only_i = mix(None, Some(&s2), 0.0).unwrap();
        for (a, b) in only_i.iter().zip(&s2) {
            assert!((a - b).norm() < 1e-15);
        }
        let m = mix(Some(&s1), Some(&s2), -3.0103).unwrap();
        let g = 10f64.powf(-3.0103 / 20.0);
        assert!((g - FRAC_1_SQRT_2).abs() < 1e-5);
        for ((x, a), b) in m.iter().zip(&s1).zip(&s2) {
            assert!((x - (a + b * g)).norm() < 1e-14);
        }
        assert!(matches!(mix(None, None, 0.0), Err(Error::MissingOperands)));
        assert!(matches!(
            mix(Some(&s1), Some(&s2[..4]), 0.0),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn make_window_contract() {
        let (d, i) = (UserSignature::desired_default(), UserSignature::interferer_default());
        let mut r = rng(7);
        for &len in &SUPPORTED_WINDOW_LENGTHS {
            for class in SignalClass::ALL {
                let w = make_window(class, len, 20.0, &d, &i, &mut r).unwrap();
                assert_eq!(w.len(), len);
                assert_eq!(w.label, Some(class));
                assert!(w.is_finite());
                assert!((w.mean_power() - 1.0).abs() < 1e-9);
            }
        }
        assert!(matches!(
            make_window(SignalClass::Idle, 64, 10.0, &d, &i, &mut r),
            Err(Error::UnsupportedWindowLength(64))
        ));
    }

    #[test]
    fn idle_window_is_gaussian_noise() {
        let (d, i) = (UserSignature::desired_default(), UserSignature::interferer_default());
        let mut r = rng(8);
        // pooled statistics over many idle windows: zero mean, I/Q each half the power,
        // kurtosis of a Gaussian component is 3
        let mut re = Vec::new();
        for _ in 0..200 {
            let w = make_window(SignalClass::Idle, 128, 10.0, &d, &i, &mut r).unwrap();
            re.extend(w.samples.iter().map(|s| s.re));
        }
        let n = re.len() as f64;
        let mean = re.iter().sum::<f64>() / n;
        let var = re.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let kurt = re.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n / (var * var);
        assert!(mean.abs() < 0.02);
        assert!((var - 0.5).abs() < 0.02);
        assert!((kurt - 3.0).abs() < 0.15, "kurtosis {kurt}");
    }

    #[test]
    fn same_seed_same_window() {
        let (d, i) = (UserSignature::desired_default(), UserSignature::interferer_default());
        let a = make_window(SignalClass::Both, 512, 3.0, &d, &i, &mut rng(9)).unwrap();
        let b = make_window(SignalClass::Both, 512, 3.0, &d, &i, &mut rng(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn class_helpers() {
        assert!(SignalClass::Both.has_desired() && SignalClass::Both.has_interferer());
        assert!(!SignalClass::Idle.has_desired() && !SignalClass::Idle.has_interferer());
        assert_eq!(SignalClass::from_index(2), Some(SignalClass::IOnly));
        assert_eq!(SignalClass::from_index(4), None);
    }
}
