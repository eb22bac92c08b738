use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::classifiers::{train, ClassifierModel, ModelKind, DEFAULT_TREE_DEPTH};
use super::dataset::{stratified_split, TimeSeriesDataset};
use super::features::{extract_features, FeatureConfig, FeatureSet};
use super::MlError;
use crate::fault::{flip, FaultSpec, WORD_BITS};
use crate::float32::float_encode_f64;
use crate::posit32::posit_encode_f64;
use crate::word::{Format, NumberClass, RawWord32};

/// One single-bit upset per selected test vector, at a uniformly drawn
/// feature index and bit position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultPolicy {
    pub enabled: bool,
    /// Share of test vectors that receive a fault; selection is seeded per
    /// vector.
    pub vector_fraction: f64,
}

impl Default for FaultPolicy {
    fn default() -> Self {
        FaultPolicy {
            enabled: true,
            vector_fraction: 1.0,
        }
    }
}

impl FaultPolicy {
    pub fn disabled() -> Self {
        FaultPolicy {
            enabled: false,
            vector_fraction: 0.0,
        }
    }

    pub fn describe(&self) -> String {
        if self.enabled {
            format!("seu_per_vector(fraction={})", self.vector_fraction)
        } else {
            "none".to_string()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FaultSite {
    pub vector: usize,
    pub feature: usize,
    pub bit: u8,
}

/// Fault site of each test vector. Depends on `(seed, vector index)` only,
/// so both formats see the same sites.
pub fn fault_sites(policy: &FaultPolicy, seed: u64, vectors: usize, dim: usize) -> Vec<Option<FaultSite>> {
    (0..vectors)
        .map(|vector| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(vector as u64);
            let feature = rng.random_range(0..dim.max(1));
            let bit = rng.random_range(0..WORD_BITS);
            let pick = rng.random::<f64>();
            (policy.enabled && dim > 0 && pick < policy.vector_fraction).then_some(FaultSite { vector, feature, bit })
        })
        .collect()
}

/// Features of one feature set split into train and test parts.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSplit {
    pub feature_set: FeatureSet,
    pub train_x: Vec<Vec<f64>>,
    pub train_y: Vec<usize>,
    pub test_x: Vec<Vec<f64>>,
    pub test_y: Vec<usize>,
}

impl PreparedSplit {
    pub fn new(
        dataset: &TimeSeriesDataset,
        feature_set: FeatureSet,
        config: &FeatureConfig,
        train_idx: &[usize],
        test_idx: &[usize],
    ) -> Result<Self, MlError> {
        let first = dataset.signals[0].len();
        if let Some(other) = dataset.signals.iter().map(Vec::len).find(|&l| l != first) {
            return Err(MlError::RaggedSignals { first, other });
        }
        let features = dataset
            .signals
            .iter()
            .map(|s| extract_features(feature_set, s, config).map(|f| f.values))
            .collect::<Result<Vec<_>, _>>()?;
        let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<usize>) {
            idx.iter().map(|&i| (features[i].clone(), dataset.labels[i])).unzip()
        };
        let (train_x, train_y) = pick(train_idx);
        let (test_x, test_y) = pick(test_idx);
        Ok(PreparedSplit {
            feature_set,
            train_x,
            train_y,
            test_x,
            test_y,
        })
    }
}

fn encode(format: Format, x: f64) -> RawWord32 {
    match format {
        Format::Float32 => float_encode_f64(x),
        Format::Posit32 => posit_encode_f64(x),
    }
}

/// Decoded value, with NaN / NaR replaced by zero (reported through the
/// flag).
fn decode(format: Format, word: RawWord32) -> (f64, bool) {
    let d = format.decode(word);
    match d.class {
        NumberClass::Nan | NumberClass::Nar => (0.0, true),
        _ => (d.to_f64(), false),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub classifier: ModelKind,
    pub feature_set: FeatureSet,
    pub format: Format,
    pub baseline_accuracy: f64,
    pub faulted_accuracy: f64,
    pub accuracy_drop: f64,
    pub nan_or_nar_substitutions: u64,
    pub seed: u64,
    pub test_vectors: usize,
}

pub const BENCH_CSV_HEADER: &str =
    "classifier,feature_set,format,baseline_accuracy,faulted_accuracy,accuracy_drop,nan_or_nar_substitutions,seed";

impl BenchRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.classifier,
            self.feature_set,
            self.format,
            self.baseline_accuracy,
            self.faulted_accuracy,
            self.accuracy_drop,
            self.nan_or_nar_substitutions,
            self.seed
        )
    }
}

/// Test inputs stored in `format`: the baseline decodes them untouched, the
/// faulted pass flips one bit per selected vector first. Evaluation runs on
/// the current rayon pool; counts are summed, so order does not matter.
pub fn run_fault_bench(
    split: &PreparedSplit,
    model: &ClassifierModel,
    format: Format,
    policy: &FaultPolicy,
    seed: u64,
) -> Result<BenchRow, MlError> {
    let dim = model.dim();
    let sites = fault_sites(policy, seed, split.test_x.len(), dim);
    let per_vector = split
        .test_x
        .par_iter()
        .zip(&split.test_y)
        .zip(&sites)
        .map(|((x, &y), site)| -> Result<(u64, u64, u64), MlError> {
            let words: Vec<RawWord32> = x.iter().map(|&v| encode(format, v)).collect();
            let clean: Vec<f64> = words.iter().map(|&w| decode(format, w).0).collect();
            let base_ok = model.predict(&clean)? == y;
            let mut subs = 0;
            let faulted: Vec<f64> = words
                .iter()
                .enumerate()
                .map(|(j, &w)| {
                    let w = match site {
                        Some(s) if s.feature == j => flip(w, &FaultSpec::seu(s.bit).expect("bit < 32")),
                        _ => w,
                    };
                    let (v, substituted) = decode(format, w);
                    subs += substituted as u64;
                    v
                })
                .collect();
            let fault_ok = model.predict(&faulted)? == y;
            Ok((base_ok as u64, fault_ok as u64, subs))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (base, faulted, subs) = per_vector
        .iter()
        .fold((0, 0, 0), |acc, v| (acc.0 + v.0, acc.1 + v.1, acc.2 + v.2));
    let n = split.test_x.len().max(1) as f64;
    let baseline_accuracy = base as f64 / n;
    let faulted_accuracy = faulted as f64 / n;
    Ok(BenchRow {
        classifier: model.kind(),
        feature_set: split.feature_set,
        format,
        baseline_accuracy,
        faulted_accuracy,
        accuracy_drop: baseline_accuracy - faulted_accuracy,
        nan_or_nar_substitutions: subs,
        seed,
        test_vectors: split.test_x.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub features: FeatureConfig,
    pub tree_depth: usize,
    pub policy: FaultPolicy,
    pub train_fraction: f64,
    pub seed: u64,
    pub workers: usize,
}

impl BenchConfig {
    pub fn new(seed: u64) -> Self {
        BenchConfig {
            features: FeatureConfig::default(),
            tree_depth: DEFAULT_TREE_DEPTH,
            policy: FaultPolicy::default(),
            train_fraction: 0.7,
            seed,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub policy: FaultPolicy,
    pub seed: u64,
}

impl BenchReport {
    pub fn csv(&self) -> String {
        let mut out = String::from(BENCH_CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_line());
            out.push('\n');
        }
        out
    }

    pub fn row(&self, classifier: ModelKind, feature_set: FeatureSet, format: Format) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.classifier == classifier && r.feature_set == feature_set && r.format == format)
    }

    pub fn mean_drop(&self, format: Format) -> f64 {
        let drops: Vec<f64> = self.rows.iter().filter(|r| r.format == format).map(|r| r.accuracy_drop).collect();
        drops.iter().sum::<f64>() / drops.len().max(1) as f64
    }

    /// (cells where the posit drop is at most the float drop, cells).
    pub fn posit_not_worse_cells(&self) -> (usize, usize) {
        let mut good = 0;
        let mut total = 0;
        for kind in ModelKind::ALL {
            for set in FeatureSet::ALL {
                if let (Some(p), Some(f)) = (self.row(kind, set, Format::Posit32), self.row(kind, set, Format::Float32)) {
                    total += 1;
                    good += (p.accuracy_drop <= f.accuracy_drop) as usize;
                }
            }
        }
        (good, total)
    }
}

/// Every classifier on both feature sets and both formats, with a shared
/// split and shared fault sites.
pub fn run_benchmark(dataset: &TimeSeriesDataset, config: &BenchConfig) -> Result<BenchReport, MlError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| MlError::Config(e.to_string()))?;
    let (train_idx, test_idx) = stratified_split(&dataset.labels, config.train_fraction, config.seed);
    let splits = FeatureSet::ALL
        .iter()
        .map(|&set| PreparedSplit::new(dataset, set, &config.features, &train_idx, &test_idx))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for kind in ModelKind::ALL {
        for split in &splits {
            let model = train(kind, &split.train_x, &split.train_y, config.tree_depth)?;
            for format in Format::ALL {
                rows.push(pool.install(|| run_fault_bench(split, &model, format, &config.policy, config.seed))?);
            }
        }
    }
    Ok(BenchReport {
        rows,
        policy: config.policy,
        seed: config.seed,
    })
}
