//! Conditional tree: recursive binary partitioning with a chi-square
//! significance gate instead of pruning.
//!
//! At each node every feature proposes its best Gini threshold; the feature
//! whose induced 2-by-k contingency table has the smallest chi-square
//! p-value is selected, and the node splits only while the Bonferroni
//! adjusted p-value stays at or below `alpha_sig` and the node holds at
//! least `min_node` documents.

use serde::{Deserialize, Serialize};

use super::tree::{
    best_split_for_feature, class_counts, is_pure, partition_ids, transpose_node, TreeNode,
};
use super::ClassifierError;
use crate::features::DocTermMatrix;
use crate::stats::chi_square_sf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalTreeModel {
    root: TreeNode,
    alpha_sig: f64,
    min_node: usize,
}

impl ConditionalTreeModel {
    pub fn train(
        matrix: &DocTermMatrix,
        alpha_sig: f64,
        min_node: usize,
    ) -> Result<Self, ClassifierError> {
        if !(alpha_sig > 0.0 && alpha_sig < 1.0) {
            return Err(ClassifierError::InvalidParameter(format!(
                "alpha_sig must lie in (0, 1), got {alpha_sig}"
            )));
        }
        if min_node == 0 {
            return Err(ClassifierError::InvalidParameter(
                "min_node must be positive".into(),
            ));
        }
        let (n_classes, _) = super::validate_matrix(matrix)?;
        let ids: Vec<usize> = (0..matrix.n_docs()).collect();
        let root = grow(matrix, &ids, n_classes, alpha_sig, min_node);
        Ok(Self {
            root,
            alpha_sig,
            min_node,
        })
    }

    pub fn predict(&self, row: &[(usize, f64)]) -> usize {
        self.root.predict(row)
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn alpha_sig(&self) -> f64 {
        self.alpha_sig
    }

    pub fn min_node(&self) -> usize {
        self.min_node
    }
}

fn grow(
    matrix: &DocTermMatrix,
    ids: &[usize],
    n_classes: usize,
    alpha_sig: f64,
    min_node: usize,
) -> TreeNode {
    let counts = class_counts(matrix.labels(), ids, n_classes);
    if is_pure(&counts) || ids.len() < min_node {
        return TreeNode::leaf(counts);
    }

    // smallest p-value wins; ascending feature order breaks exact ties
    // toward the lowest feature id
    let node_values = transpose_node(matrix, ids);
    let mut best: Option<(f64, usize, f64)> = None; // (p, feature, threshold)
    for (&feature, nonzero) in &node_values {
        let Some(split) = best_split_for_feature(nonzero, &counts, ids.len()) else {
            continue;
        };
        let p = table_p_value(&split.left_counts, &split.right_counts);
        if best.as_ref().map_or(true, |&(bp, _, _)| p < bp) {
            best = Some((p, feature, split.threshold));
        }
    }
    let Some((p, feature, threshold)) = best else {
        return TreeNode::leaf(counts);
    };

    let adjusted = (p * matrix.n_terms() as f64).min(1.0);
    if adjusted > alpha_sig {
        return TreeNode::leaf(counts);
    }

    let (left_ids, right_ids) = partition_ids(matrix, ids, feature, threshold);
    TreeNode::Split {
        feature,
        threshold,
        left: Box::new(grow(matrix, &left_ids, n_classes, alpha_sig, min_node)),
        right: Box::new(grow(matrix, &right_ids, n_classes, alpha_sig, min_node)),
    }
}

/// Chi-square p-value of the 2-by-k table (split side by class). Classes
/// absent from the node contribute neither cells nor degrees of freedom.
fn table_p_value(left: &[usize], right: &[usize]) -> f64 {
    let n: usize = left.iter().sum::<usize>() + right.iter().sum::<usize>();
    let left_total: usize = left.iter().sum();
    let right_total = n - left_total;
    let mut stat = 0.0;
    let mut nonzero_classes = 0;
    for (&l, &r) in left.iter().zip(right) {
        let col_total = l + r;
        if col_total == 0 {
            continue;
        }
        nonzero_classes += 1;
        for (observed, row_total) in [(l, left_total), (r, right_total)] {
            let expected = row_total as f64 * col_total as f64 / n as f64;
            let diff = observed as f64 - expected;
            stat += diff * diff / expected;
        }
    }
    if nonzero_classes < 2 {
        return 1.0;
    }
    chi_square_sf(stat, nonzero_classes - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::WeightScheme;

    fn binary_matrix(rows: Vec<Vec<(usize, f64)>>, labels: Vec<usize>, n_terms: usize) -> DocTermMatrix {
        DocTermMatrix::from_parts(rows, labels, n_terms, WeightScheme::Binary).unwrap()
    }

    /// Two classes perfectly separated by feature 0, n docs per class.
    fn separated(n_per_class: usize) -> DocTermMatrix {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n_per_class {
            rows.push(vec![]);
            labels.push(0);
        }
        for _ in 0..n_per_class {
            rows.push(vec![(0, 1.0)]);
            labels.push(1);
        }
        binary_matrix(rows, labels, 1)
    }

    #[test]
    fn pure_node_is_a_leaf() {
        let m = binary_matrix(vec![vec![(0, 1.0)], vec![]], vec![0, 0], 1);
        let model = ConditionalTreeModel::train(&m, 0.05, 1).unwrap();
        assert!(matches!(model.root(), TreeNode::Leaf { class: 0, .. }));
    }

    #[test]
    fn perfect_binary_feature_splits_to_pure_leaves() {
        // 8 + 8 docs: the perfect 2x2 table has chi-square = n = 16,
        // p well below 0.05 even after Bonferroni over one feature
        let m = separated(8);
        let model = ConditionalTreeModel::train(&m, 0.05, 2).unwrap();
        match model.root() {
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 0.0);
                assert!(matches!(**left, TreeNode::Leaf { class: 0, .. }));
                assert!(matches!(**right, TreeNode::Leaf { class: 1, .. }));
            }
            other => panic!("expected a split at the root, got {other:?}"),
        }
        for (row, &label) in m.rows().iter().zip(m.labels()) {
            assert_eq!(model.predict(row), label);
        }
    }

    #[test]
    fn tiny_alpha_forces_single_leaf() {
        let m = separated(8);
        let model = ConditionalTreeModel::train(&m, 1e-12, 2).unwrap();
        assert!(matches!(model.root(), TreeNode::Leaf { class: 0, .. }));
    }

    #[test]
    fn min_node_stops_splitting() {
        let m = separated(3); // 6 docs total
        let model = ConditionalTreeModel::train(&m, 0.05, 7).unwrap();
        assert!(matches!(model.root(), TreeNode::Leaf { .. }));
    }

    #[test]
    fn insignificant_feature_is_not_split() {
        // feature value independent of the class: best table is far from
        // significant, so the root stays a leaf
        let m = binary_matrix(
            vec![vec![(0, 1.0)], vec![], vec![(0, 1.0)], vec![]],
            vec![0, 0, 1, 1],
            1,
        );
        let model = ConditionalTreeModel::train(&m, 0.05, 2).unwrap();
        assert!(matches!(model.root(), TreeNode::Leaf { .. }));
    }

    #[test]
    fn invalid_parameters_rejected() {
        let m = separated(4);
        assert!(ConditionalTreeModel::train(&m, 0.0, 2).is_err());
        assert!(ConditionalTreeModel::train(&m, 1.0, 2).is_err());
        assert!(ConditionalTreeModel::train(&m, 0.05, 0).is_err());
    }

    /// Fisher's exact test (hypergeometric tail) for the perfect 2x2 table,
    /// used as an independent check that the chosen gate opens on clearly
    /// associated tables of at least 4 documents.
    fn fisher_exact_perfect_table(n_per_side: usize) -> f64 {
        // P(observing a table at least this extreme) for a perfect split of
        // n_per_side vs n_per_side: 2 / C(2n, n)
        let n = n_per_side;
        let mut binom = 1.0f64;
        for i in 0..n {
            binom *= (n + i + 1) as f64 / (i + 1) as f64;
        }
        2.0 / binom
    }

    #[test]
    fn perfect_table_is_significant_for_n_at_least_4() {
        for n_per_class in [2usize, 4, 8, 16] {
            let n = 2 * n_per_class;
            let left: Vec<usize> = vec![n_per_class, 0];
            let right: Vec<usize> = vec![0, n_per_class];
            let chi_p = table_p_value(&left, &right);
            // a balanced perfect table has chi-square statistic exactly n
            let expected_p = crate::stats::chi_square_sf(n as f64, 1);
            assert!((chi_p - expected_p).abs() < 1e-12);
            assert!(chi_p < 0.05, "gate closed on a perfect table of {n} docs");
            // the exact test agrees once the table outgrows the chi-square
            // approximation's small-sample optimism
            if n >= 8 {
                assert!(fisher_exact_perfect_table(n_per_class) < 0.05);
            }
        }
    }
}
