use std::f64::consts::TAU;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::MlError;
use crate::exact::{parse_decimal, rational_to_f64};

/// Labelled signals; labels are dense in `0..classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesDataset {
    pub name: String,
    pub sample_rate: Option<f64>,
    pub signals: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl TimeSeriesDataset {
    pub fn new(name: impl Into<String>, signals: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self, MlError> {
        if signals.len() != labels.len() {
            return Err(MlError::Config(format!(
                "{} signals but {} labels",
                signals.len(),
                labels.len()
            )));
        }
        if let Some(i) = signals.iter().position(|s| s.is_empty()) {
            return Err(MlError::Record {
                record: i + 1,
                message: "empty signal".into(),
            });
        }
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        let mut present = vec![false; classes];
        for &l in &labels {
            present[l] = true;
        }
        if let Some(missing) = present.iter().position(|p| !p) {
            return Err(MlError::SparseLabels { classes, missing });
        }
        if classes < 2 {
            return Err(MlError::SingleClass(classes));
        }
        Ok(TimeSeriesDataset {
            name: name.into(),
            sample_rate: None,
            signals,
            labels,
        })
    }

    pub fn classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Reads `label,s0,s1,...` rows. A first row whose label is not an integer
/// is taken as a header. Samples go through the exact decimal reader and are
/// rounded once to `f64`.
pub fn parse_dataset_csv(name: &str, text: &str) -> Result<TimeSeriesDataset, MlError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut signals = Vec::new();
    let mut labels = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| MlError::Record {
            record: i + 1,
            message: e.to_string(),
        })?;
        let line = row.position().map_or(i as u64 + 1, |p| p.line()) as usize;
        let err = |message: String| MlError::Record { record: line, message };
        let Some(label_text) = row.get(0) else { continue };
        let label = match label_text.parse::<usize>() {
            Ok(l) => l,
            Err(_) if i == 0 => continue,
            Err(_) => return Err(err(format!("label `{label_text}` is not a class id"))),
        };
        let mut signal = Vec::with_capacity(row.len().saturating_sub(1));
        for field in row.iter().skip(1) {
            if field.is_empty() {
                continue;
            }
            let x = parse_decimal(field).map_err(|e| err(format!("`{field}`: {e}")))?;
            signal.push(rational_to_f64(&x));
        }
        if signal.is_empty() {
            return Err(err("no samples".into()));
        }
        signals.push(signal);
        labels.push(label);
    }
    TimeSeriesDataset::new(name, signals, labels)
}

/// Parameters of the built-in generator, written `classes=4,per=200,len=256`
/// with optional `noise=<sigma>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub per_class: usize,
    pub length: usize,
    pub noise: f64,
}

impl SyntheticSpec {
    pub const DEFAULT_NOISE: f64 = 0.5;

    pub fn new(classes: usize, per_class: usize, length: usize) -> Self {
        SyntheticSpec {
            classes,
            per_class,
            length,
            noise: Self::DEFAULT_NOISE,
        }
    }
}

impl FromStr for SyntheticSpec {
    type Err = MlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut spec = SyntheticSpec::new(0, 0, 0);
        let bad = |m: String| MlError::Config(format!("synthetic spec `{s}`: {m}"));
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| bad(format!("`{part}` is not key=value")))?;
            let int = || value.parse::<usize>().map_err(|_| bad(format!("`{value}` is not a count")));
            match key {
                "classes" => spec.classes = int()?,
                "per" | "per_class" => spec.per_class = int()?,
                "len" | "length" => spec.length = int()?,
                "noise" => {
                    spec.noise = value
                        .parse::<f64>()
                        .ok()
                        .filter(|n| n.is_finite() && *n >= 0.0)
                        .ok_or_else(|| bad(format!("`{value}` is not a noise level")))?
                }
                _ => return Err(bad(format!("unknown key `{key}`"))),
            }
        }
        if spec.classes < 2 || spec.per_class == 0 || spec.length == 0 {
            return Err(bad("need classes >= 2, per >= 1, len >= 1".into()));
        }
        Ok(spec)
    }
}

/// Class `c` is a tone at `0.375 / 2^c` cycles per sample with amplitude
/// `1 + c/4`, a weaker partial at 1.5x that frequency, random phases, and
/// Gaussian noise of standard deviation `noise`.
pub fn generate_synthetic(spec: SyntheticSpec, seed: u64) -> Result<TimeSeriesDataset, MlError> {
    if spec.classes < 2 {
        return Err(MlError::SingleClass(spec.classes));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spec.noise).map_err(|e| MlError::Config(e.to_string()))?;
    let mut signals = Vec::with_capacity(spec.classes * spec.per_class);
    let mut labels = Vec::with_capacity(signals.capacity());
    for class in 0..spec.classes {
        let freq = 0.375 / (1u64 << class.min(62)) as f64;
        let amplitude = 1.0 + class as f64 / 4.0;
        for _ in 0..spec.per_class {
            let p1 = rng.random::<f64>() * TAU;
            let p2 = rng.random::<f64>() * TAU;
            let signal = (0..spec.length)
                .map(|t| {
                    let t = t as f64;
                    amplitude * (TAU * freq * t + p1).sin()
                        + 0.3 * amplitude * (TAU * 1.5 * freq * t + p2).sin()
                        + noise.sample(&mut rng)
                })
                .collect();
            signals.push(signal);
            labels.push(class);
        }
    }
    let mut ds = TimeSeriesDataset::new(
        format!("synthetic(classes={},per={},len={})", spec.classes, spec.per_class, spec.length),
        signals,
        labels,
    )?;
    ds.sample_rate = Some(1.0);
    Ok(ds)
}

/// Per-class seeded shuffle, `round(n * train_fraction)` of each class to
/// training (at least one, and at least one left for test when the class has
/// two or more). Returned index lists are ascending.
pub fn stratified_split(labels: &[usize], train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX - 1);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let n = idx.len();
        let mut k = ((n as f64) * train_fraction).round() as usize;
        k = k.clamp(1.min(n), if n >= 2 { n - 1 } else { n });
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}
