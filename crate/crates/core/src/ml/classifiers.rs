use std::fmt;
use std::str::FromStr;

use super::MlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Knn1,
    GaussianNb,
    DecisionTree,
    NearestCentroid,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Knn1,
        ModelKind::GaussianNb,
        ModelKind::DecisionTree,
        ModelKind::NearestCentroid,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Knn1 => "knn1",
            ModelKind::GaussianNb => "gaussian_nb",
            ModelKind::DecisionTree => "decision_tree",
            ModelKind::NearestCentroid => "nearest_centroid",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = MlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| MlError::Config(format!("unknown classifier `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf(usize),
    Split {
        feature: usize,
        /// Go left when `x[feature] <= threshold`.
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierModel {
    Knn1 {
        points: Vec<Vec<f64>>,
        labels: Vec<usize>,
    },
    GaussianNb {
        log_priors: Vec<f64>,
        means: Vec<Vec<f64>>,
        variances: Vec<Vec<f64>>,
    },
    DecisionTree {
        root: TreeNode,
        dim: usize,
    },
    NearestCentroid {
        centroids: Vec<Vec<f64>>,
    },
}

/// Default depth for [`train`] with [`ModelKind::DecisionTree`].
pub const DEFAULT_TREE_DEPTH: usize = 8;
/// Relative variance floor: a share of the largest per-feature variance.
const NB_VAR_SMOOTHING: f64 = 1e-9;

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the smallest score, first wins ties; NaN scores lose.
fn argmin_first(scores: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NAN);
    for (i, s) in scores.enumerate() {
        if best.1.is_nan() || s < best.1 {
            if !s.is_nan() {
                best = (i, s);
            }
        }
    }
    best.0
}

fn class_counts(labels: &[usize], classes: usize) -> Vec<usize> {
    let mut counts = vec![0; classes];
    for &l in labels {
        counts[l] += 1;
    }
    counts
}

/// Trains on `features[i]` with label `labels[i]`; labels must be dense and
/// cover at least two classes.
pub fn train(kind: ModelKind, features: &[Vec<f64>], labels: &[usize], tree_depth: usize) -> Result<ClassifierModel, MlError> {
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let counts = class_counts(labels, classes);
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(MlError::EmptyClass(empty));
    }
    if classes < 2 {
        return Err(MlError::SingleClass(classes));
    }
    let dim = features[0].len();
    if let Some(bad) = features.iter().find(|f| f.len() != dim) {
        return Err(MlError::Dimension {
            expected: dim,
            got: bad.len(),
        });
    }
    let means = || {
        let mut m = vec![vec![0.0; dim]; classes];
        for (f, &l) in features.iter().zip(labels) {
            for (acc, x) in m[l].iter_mut().zip(f) {
                *acc += x;
            }
        }
        for (row, &n) in m.iter_mut().zip(&counts) {
            row.iter_mut().for_each(|v| *v /= n as f64);
        }
        m
    };
    Ok(match kind {
        ModelKind::Knn1 => ClassifierModel::Knn1 {
            points: features.to_vec(),
            labels: labels.to_vec(),
        },
        ModelKind::NearestCentroid => ClassifierModel::NearestCentroid { centroids: means() },
        ModelKind::GaussianNb => {
            let means = means();
            let mut variances = vec![vec![0.0; dim]; classes];
            for (f, &l) in features.iter().zip(labels) {
                for ((acc, x), mu) in variances[l].iter_mut().zip(f).zip(&means[l]) {
                    *acc += (x - mu) * (x - mu);
                }
            }
            for (row, &n) in variances.iter_mut().zip(&counts) {
                row.iter_mut().for_each(|v| *v /= n as f64);
            }
            let largest = global_max_variance(features);
            let floor = (NB_VAR_SMOOTHING * largest).max(f64::MIN_POSITIVE);
            variances.iter_mut().flatten().for_each(|v| *v += floor);
            let total = labels.len() as f64;
            ClassifierModel::GaussianNb {
                log_priors: counts.iter().map(|&c| (c as f64 / total).ln()).collect(),
                means,
                variances,
            }
        }
        ModelKind::DecisionTree => {
            let idx: Vec<usize> = (0..labels.len()).collect();
            ClassifierModel::DecisionTree {
                root: grow(features, labels, classes, &idx, tree_depth),
                dim,
            }
        }
    })
}

fn global_max_variance(features: &[Vec<f64>]) -> f64 {
    let n = features.len() as f64;
    (0..features[0].len())
        .map(|j| {
            let mean = features.iter().map(|f| f[j]).sum::<f64>() / n;
            features.iter().map(|f| (f[j] - mean) * (f[j] - mean)).sum::<f64>() / n
        })
        .fold(0.0, f64::max)
}

fn majority(counts: &[usize]) -> usize {
    // max_by_key keeps the last maximum; scan for the first instead
    let top = counts.iter().copied().max().unwrap_or(0);
    counts.iter().position(|&c| c == top).unwrap_or(0)
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn grow(features: &[Vec<f64>], labels: &[usize], classes: usize, idx: &[usize], depth: usize) -> TreeNode {
    let counts = class_counts(&idx.iter().map(|&i| labels[i]).collect::<Vec<_>>(), classes);
    let leaf = TreeNode::Leaf(majority(&counts));
    if depth == 0 || counts.iter().filter(|&&c| c > 0).count() <= 1 {
        return leaf;
    }
    let n = idx.len();
    let parent = gini(&counts, n);
    // (weighted child impurity, feature, threshold)
    let mut best: Option<(f64, usize, f64)> = None;
    let mut order = idx.to_vec();
    for feature in 0..features[0].len() {
        order.sort_by(|&a, &b| features[a][feature].total_cmp(&features[b][feature]).then(a.cmp(&b)));
        let mut left = vec![0usize; classes];
        for pos in 0..n - 1 {
            left[labels[order[pos]]] += 1;
            let here = features[order[pos]][feature];
            let next = features[order[pos + 1]][feature];
            if here == next {
                continue;
            }
            let right: Vec<usize> = counts.iter().zip(&left).map(|(c, l)| c - l).collect();
            let nl = pos + 1;
            let score = (nl as f64 * gini(&left, nl) + (n - nl) as f64 * gini(&right, n - nl)) / n as f64;
            if best.is_none_or(|(b, _, _)| score < b) {
                let mid = here + (next - here) / 2.0;
                // midpoint can round onto `next` for adjacent doubles
                let threshold = if mid < next { mid } else { here };
                best = Some((score, feature, threshold));
            }
        }
    }
    match best {
        Some((score, feature, threshold)) if score < parent => {
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| features[i][feature] <= threshold);
            TreeNode::Split {
                feature,
                threshold,
                left: Box::new(grow(features, labels, classes, &l, depth - 1)),
                right: Box::new(grow(features, labels, classes, &r, depth - 1)),
            }
        }
        _ => leaf,
    }
}

impl ClassifierModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            ClassifierModel::Knn1 { .. } => ModelKind::Knn1,
            ClassifierModel::GaussianNb { .. } => ModelKind::GaussianNb,
            ClassifierModel::DecisionTree { .. } => ModelKind::DecisionTree,
            ClassifierModel::NearestCentroid { .. } => ModelKind::NearestCentroid,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ClassifierModel::Knn1 { points, .. } => points[0].len(),
            ClassifierModel::GaussianNb { means, .. } => means[0].len(),
            ClassifierModel::DecisionTree { dim, .. } => *dim,
            ClassifierModel::NearestCentroid { centroids } => centroids[0].len(),
        }
    }

    /// Class id; ties go to the lowest id.
    pub fn predict(&self, x: &[f64]) -> Result<usize, MlError> {
        if x.len() != self.dim() {
            return Err(MlError::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(match self {
            ClassifierModel::Knn1 { points, labels } => {
                let mut best = (f64::INFINITY, usize::MAX);
                let mut any = false;
                for (p, &l) in points.iter().zip(labels) {
                    let d = squared_distance(p, x);
                    if !any || d < best.0 || (d == best.0 && l < best.1) {
                        if !d.is_nan() {
                            best = (d, l);
                            any = true;
                        }
                    }
                }
                if any {
                    best.1
                } else {
                    *labels.iter().min().unwrap_or(&0)
                }
            }
            ClassifierModel::NearestCentroid { centroids } => {
                argmin_first(centroids.iter().map(|c| squared_distance(c, x)))
            }
            ClassifierModel::GaussianNb {
                log_priors,
                means,
                variances,
            } => argmin_first(log_priors.iter().zip(means).zip(variances).map(|((prior, mu), var)| {
                let ll: f64 = x
                    .iter()
                    .zip(mu)
                    .zip(var)
                    .map(|((xi, m), v)| -0.5 * ((std::f64::consts::TAU * v).ln() + (xi - m) * (xi - m) / v))
                    .sum();
                -(prior + ll)
            })),
            ClassifierModel::DecisionTree { root, .. } => {
                let mut node = root;
                loop {
                    match node {
                        TreeNode::Leaf(c) => break *c,
                        TreeNode::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => node = if x[*feature] <= *threshold { left } else { right },
                    }
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn blobs(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut f = Vec::new();
        let mut l = Vec::new();
        for i in 0..n {
            let c = i % 2;
            let centre = if c == 0 { -4.0 } else { 4.0 };
            f.push((0..3).map(|_| centre + noise.sample(&mut rng)).collect());
            l.push(c);
        }
        (f, l)
    }

    #[test]
    fn knn1_recalls_training_set() {
        let (f, l) = blobs(60, 1);
        let m = train(ModelKind::Knn1, &f, &l, DEFAULT_TREE_DEPTH).unwrap();
        for (x, &y) in f.iter().zip(&l) {
            assert_eq!(m.predict(x).unwrap(), y);
        }
    }

    #[test]
    fn knn1_tie_prefers_lowest_class() {
        let f = vec![vec![1.0], vec![-1.0]];
        let m = train(ModelKind::Knn1, &f, &[1, 0], 1).unwrap();
        assert_eq!(m.predict(&[0.0]).unwrap(), 0);
        // infinite input: every distance is infinite
        assert_eq!(m.predict(&[f64::INFINITY]).unwrap(), 0);
        assert_eq!(m.predict(&[f64::NEG_INFINITY]).unwrap(), 0);
    }

    #[test]
    fn separated_blobs_all_models() {
        let (train_f, train_l) = blobs(200, 2);
        let (test_f, test_l) = blobs(200, 3);
        for kind in ModelKind::ALL {
            let m = train(kind, &train_f, &train_l, DEFAULT_TREE_DEPTH).unwrap();
            let correct = test_f
                .iter()
                .zip(&test_l)
                .filter(|(x, &y)| m.predict(x).unwrap() == y)
                .count();
            assert!(correct as f64 / 200.0 >= 0.99, "{kind}: {correct}");
        }
    }

    #[test]
    fn centroid_bisector_ties_low() {
        let f = vec![vec![-1.0, 0.0], vec![-3.0, 0.0], vec![1.0, 0.0], vec![3.0, 0.0]];
        let m = train(ModelKind::NearestCentroid, &f, &[1, 1, 0, 0], 1).unwrap();
        assert_eq!(m.predict(&[0.0, 5.0]).unwrap(), 0);
        assert_eq!(m.predict(&[-0.1, 0.0]).unwrap(), 1);
    }

    #[test]
    fn degenerate_training_rejected() {
        let f = vec![vec![0.0], vec![1.0]];
        assert_eq!(train(ModelKind::Knn1, &f, &[0, 0], 1), Err(MlError::SingleClass(1)));
        assert_eq!(train(ModelKind::Knn1, &f, &[0, 2], 1), Err(MlError::EmptyClass(1)));
        let m = train(ModelKind::GaussianNb, &f, &[0, 1], 1).unwrap();
        assert!(matches!(m.predict(&[0.0, 1.0]), Err(MlError::Dimension { .. })));
    }

    #[test]
    fn tree_depth_limits_and_splits() {
        let f: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let l = [0, 0, 1, 1, 2, 2, 3, 3];
        let stump = train(ModelKind::DecisionTree, &f, &l, 1).unwrap();
        let full = train(ModelKind::DecisionTree, &f, &l, 3).unwrap();
        let acc = |m: &ClassifierModel| f.iter().zip(&l).filter(|(x, &y)| m.predict(x).unwrap() == y).count();
        assert_eq!(acc(&full), 8);
        assert!(acc(&stump) <= 4);
        match full {
            ClassifierModel::DecisionTree { root: TreeNode::Split { threshold, .. }, .. } => {
                assert!(threshold == 1.5 || threshold == 3.5 || threshold == 5.5)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nb_survives_constant_feature() {
        let f = vec![vec![1.0, 0.0], vec![1.0, 0.1], vec![1.0, 5.0], vec![1.0, 5.1]];
        let m = train(ModelKind::GaussianNb, &f, &[0, 0, 1, 1], 1).unwrap();
        assert_eq!(m.predict(&[1.0, 0.05]).unwrap(), 0);
        assert_eq!(m.predict(&[1.0, 4.9]).unwrap(), 1);
    }
}
