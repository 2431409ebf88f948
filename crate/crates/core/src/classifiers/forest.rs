//! Random forest of fully grown Gini (CART) trees with bootstrap resampling
//! and per-node feature subsampling.
//!
//! Tree k owns an independent RNG stream derived from `(seed, k)`, so the
//! forest is reproducible and trees could be grown in any order. Each tree is
//! developed until its nodes are pure, hold fewer than two documents, or no
//! candidate split has positive gain.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{
    argmax_counts, best_split_for_feature, class_counts, is_pure, partition_ids, transpose_node,
    TreeNode,
};
use super::ClassifierError;
use crate::features::DocTermMatrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    trees: Vec<TreeNode>,
    m_try: usize,
    seed: u64,
}

impl RandomForestModel {
    pub fn train(
        matrix: &DocTermMatrix,
        ntree: usize,
        m_try: usize,
        seed: u64,
    ) -> Result<Self, ClassifierError> {
        Self::train_opts(matrix, ntree, m_try, seed, true)
    }

    /// `bootstrap = false` replaces the resample with the identity, turning
    /// a 1-tree forest with `m_try = n_terms` into a plain Gini tree.
    pub fn train_opts(
        matrix: &DocTermMatrix,
        ntree: usize,
        m_try: usize,
        seed: u64,
        bootstrap: bool,
    ) -> Result<Self, ClassifierError> {
        if ntree == 0 {
            return Err(ClassifierError::InvalidParameter(
                "ntree must be positive".into(),
            ));
        }
        let (n_classes, _) = super::validate_matrix(matrix)?;
        if m_try == 0 || m_try > matrix.n_terms() {
            return Err(ClassifierError::InvalidParameter(format!(
                "m_try must lie in 1..={}, got {m_try}",
                matrix.n_terms()
            )));
        }
        let n_docs = matrix.n_docs();

        let mut trees = Vec::with_capacity(ntree);
        for k in 0..ntree {
            let mut stream = rng::stream_indexed(seed, b"rf-tree", k as u64);
            let ids: Vec<usize> = if bootstrap {
                (0..n_docs).map(|_| stream.gen_range(0..n_docs)).collect()
            } else {
                (0..n_docs).collect()
            };
            trees.push(grow(matrix, &ids, n_classes, m_try, &mut stream));
        }
        Ok(Self { trees, m_try, seed })
    }

    /// Majority vote over the trees; lowest class index wins ties.
    pub fn predict(&self, row: &[(usize, f64)]) -> (usize, Vec<usize>) {
        let n_classes = self.n_classes();
        let mut votes = vec![0usize; n_classes];
        for tree in &self.trees {
            votes[tree.predict(row)] += 1;
        }
        (argmax_counts(&votes), votes)
    }

    pub fn trees(&self) -> &[TreeNode] {
        &self.trees
    }

    pub fn ntree(&self) -> usize {
        self.trees.len()
    }

    pub fn m_try(&self) -> usize {
        self.m_try
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn n_classes(&self) -> usize {
        fn max_class(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { class_counts, .. } => class_counts.len(),
                TreeNode::Split { left, right, .. } => max_class(left).max(max_class(right)),
            }
        }
        self.trees.iter().map(|t| max_class(t)).max().unwrap_or(0)
    }
}

/// The customary default feature count per split: floor(sqrt(n_terms)),
/// at least 1.
pub fn default_m_try(n_terms: usize) -> usize {
    ((n_terms as f64).sqrt().floor() as usize).max(1)
}

fn grow(
    matrix: &DocTermMatrix,
    ids: &[usize],
    n_classes: usize,
    m_try: usize,
    stream: &mut ChaCha8Rng,
) -> TreeNode {
    let counts = class_counts(matrix.labels(), ids, n_classes);
    if is_pure(&counts) || ids.len() < 2 {
        return TreeNode::leaf(counts);
    }

    // transpose once, then evaluate the sampled candidate features in
    // ascending order so gain ties resolve to the lowest feature id and
    // the sample's draw order is irrelevant
    let node_values = transpose_node(matrix, ids);
    let mut candidates = rand::seq::index::sample(stream, matrix.n_terms(), m_try).into_vec();
    candidates.sort_unstable();

    let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
    for feature in candidates {
        let Some(nonzero) = node_values.get(&feature) else {
            continue; // constant zero at this node
        };
        let Some(split) = best_split_for_feature(nonzero, &counts, ids.len()) else {
            continue;
        };
        if best.as_ref().map_or(true, |&(g, _, _)| split.gain > g) {
            best = Some((split.gain, feature, split.threshold));
        }
    }
    match best {
        Some((gain, feature, threshold)) if gain > 0.0 => {
            let (left_ids, right_ids) = partition_ids(matrix, ids, feature, threshold);
            TreeNode::Split {
                feature,
                threshold,
                left: Box::new(grow(matrix, &left_ids, n_classes, m_try, stream)),
                right: Box::new(grow(matrix, &right_ids, n_classes, m_try, stream)),
            }
        }
        _ => TreeNode::leaf(counts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::WeightScheme;

    fn disjoint_two_class(n_per_class: usize) -> DocTermMatrix {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n_per_class {
            rows.push(vec![(0, 1.0 + (i % 3) as f64)]);
            labels.push(0);
        }
        for i in 0..n_per_class {
            rows.push(vec![(1, 1.0 + (i % 2) as f64)]);
            labels.push(1);
        }
        DocTermMatrix::from_parts(rows, labels, 2, WeightScheme::TfIdf).unwrap()
    }

    #[test]
    fn disjoint_support_reaches_perfect_training_accuracy() {
        let m = disjoint_two_class(10);
        let model = RandomForestModel::train(&m, 25, 2, 7).unwrap();
        for (row, &label) in m.rows().iter().zip(m.labels()) {
            let (class, votes) = model.predict(row);
            assert_eq!(class, label);
            assert_eq!(votes.iter().sum::<usize>(), 25);
        }
    }

    #[test]
    fn identical_seed_gives_identical_forest() {
        let m = disjoint_two_class(6);
        let a = RandomForestModel::train(&m, 9, 1, 3).unwrap();
        let b = RandomForestModel::train(&m, 9, 1, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn vote_ties_break_to_lowest_class() {
        // two leaf-only trees voting for different classes
        let model = RandomForestModel {
            trees: vec![TreeNode::leaf(vec![0, 3]), TreeNode::leaf(vec![3, 0])],
            m_try: 1,
            seed: 0,
        };
        let (class, votes) = model.predict(&[]);
        assert_eq!(votes, vec![1, 1]);
        assert_eq!(class, 0);
    }

    #[test]
    fn no_bootstrap_single_tree_is_deterministic_gini_tree() {
        let m = disjoint_two_class(5);
        let forest =
            RandomForestModel::train_opts(&m, 1, m.n_terms(), 11, false).unwrap();
        // fully grown on the identity sample: training rows are recovered
        for (row, &label) in m.rows().iter().zip(m.labels()) {
            assert_eq!(forest.predict(row).0, label);
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        let m = disjoint_two_class(3);
        assert!(RandomForestModel::train(&m, 0, 1, 0).is_err());
        assert!(RandomForestModel::train(&m, 5, 0, 0).is_err());
        assert!(RandomForestModel::train(&m, 5, 99, 0).is_err());
    }

    #[test]
    fn default_m_try_is_floor_sqrt() {
        assert_eq!(default_m_try(1), 1);
        assert_eq!(default_m_try(16), 4);
        assert_eq!(default_m_try(17), 4);
        assert_eq!(default_m_try(0), 1);
    }
}
