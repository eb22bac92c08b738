use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Num;

use super::MlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureSet {
    Statistical,
    Wavelet,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 2] = [FeatureSet::Statistical, FeatureSet::Wavelet];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::Statistical => "statistical",
            FeatureSet::Wavelet => "wavelet",
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSet {
    type Err = MlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "statistical" | "stat" => Ok(FeatureSet::Statistical),
            "wavelet" | "haar" => Ok(FeatureSet::Wavelet),
            _ => Err(MlError::Config(format!("unknown feature set `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub feature_set: FeatureSet,
}

/// Sliding-window layout shared by both feature sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureConfig {
    pub window_len: usize,
    pub stride: usize,
    /// Haar depth; the statistical set ignores it.
    pub levels: u32,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            window_len: 64,
            stride: 64,
            levels: 3,
        }
    }
}

fn window_starts(signal_len: usize, window_len: usize, stride: usize) -> Result<Vec<usize>, MlError> {
    if stride == 0 {
        return Err(MlError::ZeroStride);
    }
    if window_len == 0 || window_len > signal_len {
        return Err(MlError::WindowTooLong {
            window: window_len,
            signal: signal_len,
        });
    }
    Ok((0..=signal_len - window_len).step_by(stride).collect())
}

/// Arithmetic the moment formulas need; implemented for `f64` and for exact
/// rationals so the same code can be checked without rounding.
pub trait MomentField: Clone + Num {
    fn from_count(n: usize) -> Self;
}

impl MomentField for f64 {
    fn from_count(n: usize) -> Self {
        n as f64
    }
}

impl MomentField for BigRational {
    fn from_count(n: usize) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Moments<T> {
    pub mean: T,
    /// Population variance.
    pub variance: T,
    pub mean_square: T,
    /// `(1/n) Σ_{t<n-1} (x_t − μ)(x_{t+1} − μ)`.
    pub lag1_cov: T,
}

/// Single pass over running sums. The lag-1 term expands to
/// `S_xy − μ(S_head + S_tail) + (n−1)μ²`, where `S_head` omits the last
/// sample and `S_tail` the first.
pub fn window_moments<T: MomentField>(window: &[T]) -> Moments<T> {
    let n = T::from_count(window.len());
    let mut sum = T::zero();
    let mut sum_sq = T::zero();
    let mut sum_xy = T::zero();
    for (i, x) in window.iter().enumerate() {
        sum = sum + x.clone();
        sum_sq = sum_sq + x.clone() * x.clone();
        if let Some(next) = window.get(i + 1) {
            sum_xy = sum_xy + x.clone() * next.clone();
        }
    }
    let first = window.first().cloned().unwrap_or_else(T::zero);
    let last = window.last().cloned().unwrap_or_else(T::zero);
    let mean = sum.clone() / n.clone();
    let mean_square = sum_sq / n.clone();
    let variance = mean_square.clone() - mean.clone() * mean.clone();
    let head_plus_tail = sum.clone() - last + sum - first;
    let pairs = T::from_count(window.len().saturating_sub(1));
    let lag1_cov = (sum_xy - mean.clone() * head_plus_tail + pairs * mean.clone() * mean.clone()) / n;
    Moments {
        mean,
        variance,
        mean_square,
        lag1_cov,
    }
}

/// Per window: mean, population standard deviation, RMS, lag-1
/// autocovariance.
pub fn extract_statistical(signal: &[f64], window_len: usize, stride: usize) -> Result<FeatureVector, MlError> {
    let starts = window_starts(signal.len(), window_len, stride)?;
    let mut values = Vec::with_capacity(starts.len() * 4);
    for s in starts {
        let m = window_moments(&signal[s..s + window_len]);
        values.extend([m.mean, m.variance.max(0.0).sqrt(), m.mean_square.sqrt(), m.lag1_cov]);
    }
    Ok(FeatureVector {
        values,
        feature_set: FeatureSet::Statistical,
    })
}

/// Orthonormal Haar analysis to `levels`: returns `[A_L, D_L, ..., D_1]`.
pub fn haar_transform(window: &[f64], levels: u32) -> Result<Vec<Vec<f64>>, MlError> {
    let block = 1usize.checked_shl(levels).unwrap_or(0);
    if block == 0 || window.is_empty() || window.len() % block != 0 {
        return Err(MlError::LevelsMismatch {
            window: window.len(),
            levels,
        });
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut approx = window.to_vec();
    let mut details = Vec::with_capacity(levels as usize);
    for _ in 0..levels {
        let (a, d): (Vec<f64>, Vec<f64>) = approx
            .chunks_exact(2)
            .map(|p| ((p[0] + p[1]) * r, (p[0] - p[1]) * r))
            .unzip();
        details.push(d);
        approx = a;
    }
    let mut bands = vec![approx];
    bands.extend(details.into_iter().rev());
    Ok(bands)
}

/// Per window and subband, `Σ c² / window_len`; the energies of a window sum
/// to its mean square.
pub fn extract_wavelet(
    signal: &[f64],
    window_len: usize,
    stride: usize,
    levels: u32,
) -> Result<FeatureVector, MlError> {
    let starts = window_starts(signal.len(), window_len, stride)?;
    let mut values = Vec::with_capacity(starts.len() * (levels as usize + 1));
    for s in starts {
        for band in haar_transform(&signal[s..s + window_len], levels)? {
            values.push(band.iter().map(|c| c * c).sum::<f64>() / window_len as f64);
        }
    }
    Ok(FeatureVector {
        values,
        feature_set: FeatureSet::Wavelet,
    })
}

pub fn extract_features(set: FeatureSet, signal: &[f64], config: &FeatureConfig) -> Result<FeatureVector, MlError> {
    match set {
        FeatureSet::Statistical => extract_statistical(signal, config.window_len, config.stride),
        FeatureSet::Wavelet => extract_wavelet(signal, config.window_len, config.stride, config.levels),
    }
}
