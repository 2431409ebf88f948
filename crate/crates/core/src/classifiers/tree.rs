//! Binary decision-tree node plus the Gini split search shared by the
//! conditional tree and the random forest.
//!
//! Rows are sparse with absent features read as 0, and all stored weights are
//! positive, so the zero block always sits at the low end of a feature's
//! value range. Descent goes left when `value <= threshold`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::features::DocTermMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        class: usize,
        class_counts: Vec<usize>,
    },
}

impl TreeNode {
    /// Leaf predicting the majority class; lowest index wins ties.
    pub fn leaf(class_counts: Vec<usize>) -> Self {
        let class = argmax_counts(&class_counts);
        TreeNode::Leaf {
            class,
            class_counts,
        }
    }

    /// Descends the tree: left iff the row value at the split feature
    /// (0 when absent) is `<= threshold`.
    pub fn predict(&self, row: &[(usize, f64)]) -> usize {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { class, .. } => return *class,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row_value(row, *feature) <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

pub(crate) fn argmax_counts(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

/// Sparse lookup with absent-as-zero semantics.
pub(crate) fn row_value(row: &[(usize, f64)], feature: usize) -> f64 {
    row.binary_search_by_key(&feature, |&(col, _)| col)
        .map(|i| row[i].1)
        .unwrap_or(0.0)
}

pub(crate) fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / t;
            p * p
        })
        .sum::<f64>()
}

pub(crate) fn class_counts(labels: &[usize], ids: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0usize; n_classes];
    for &id in ids {
        counts[labels[id]] += 1;
    }
    counts
}

pub(crate) fn is_pure(counts: &[usize]) -> bool {
    counts.iter().filter(|&&c| c > 0).count() <= 1
}

/// Per-feature nonzero `(value, label)` pairs for the documents at a node.
/// Features with no stored value anywhere in the node are simply absent.
pub(crate) fn transpose_node(
    matrix: &DocTermMatrix,
    ids: &[usize],
) -> BTreeMap<usize, Vec<(f64, usize)>> {
    let mut map: BTreeMap<usize, Vec<(f64, usize)>> = BTreeMap::new();
    for &id in ids {
        let label = matrix.labels()[id];
        for &(col, w) in matrix.row(id) {
            map.entry(col).or_default().push((w, label));
        }
    }
    map
}

/// A threshold candidate chosen for one feature.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct FeatureSplit {
    pub threshold: f64,
    pub gain: f64,
    pub left_counts: Vec<usize>,
    pub right_counts: Vec<usize>,
}

/// Best Gini-gain threshold for one feature over a node, scanning the
/// distinct stored values with absent-as-zero. Returns `None` when the
/// feature cannot produce two non-empty sides. Ties in gain keep the
/// smallest threshold.
pub(crate) fn best_split_for_feature(
    nonzero: &[(f64, usize)],
    node_counts: &[usize],
    node_size: usize,
) -> Option<FeatureSplit> {
    if nonzero.is_empty() {
        return None;
    }
    let mut values: Vec<(f64, usize)> = nonzero.to_vec();
    values.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("weights are finite"));

    let n_classes = node_counts.len();
    let zero_count = node_size - values.len();
    let mut left_counts = vec![0usize; n_classes];
    if zero_count > 0 {
        let mut nz_counts = vec![0usize; n_classes];
        for &(_, label) in &values {
            nz_counts[label] += 1;
        }
        for c in 0..n_classes {
            left_counts[c] = node_counts[c] - nz_counts[c];
        }
    }
    let mut left_size = zero_count;
    let parent = gini(node_counts, node_size);
    let mut best: Option<FeatureSplit> = None;

    let consider = |threshold: f64,
                        left_counts: &[usize],
                        left_size: usize,
                        best: &mut Option<FeatureSplit>| {
        if left_size == 0 || left_size == node_size {
            return;
        }
        let right_size = node_size - left_size;
        let right_counts: Vec<usize> = node_counts
            .iter()
            .zip(left_counts)
            .map(|(&n, &l)| n - l)
            .collect();
        let weighted = (left_size as f64 * gini(left_counts, left_size)
            + right_size as f64 * gini(&right_counts, right_size))
            / node_size as f64;
        let gain = parent - weighted;
        // strict > keeps the earliest (smallest) threshold on ties
        if best.as_ref().map_or(true, |b| gain > b.gain) {
            *best = Some(FeatureSplit {
                threshold,
                gain,
                left_counts: left_counts.to_vec(),
                right_counts,
            });
        }
    };

    if zero_count > 0 {
        consider(0.0, &left_counts, left_size, &mut best);
    }
    let mut i = 0;
    while i < values.len() {
        let v = values[i].0;
        while i < values.len() && values[i].0 == v {
            left_counts[values[i].1] += 1;
            left_size += 1;
            i += 1;
        }
        if i < values.len() {
            consider(v, &left_counts, left_size, &mut best);
        }
    }
    best
}

/// Partitions node documents by `value(feature) <= threshold`.
pub(crate) fn partition_ids(
    matrix: &DocTermMatrix,
    ids: &[usize],
    feature: usize,
    threshold: f64,
) -> (Vec<usize>, Vec<usize>) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for &id in ids {
        if row_value(matrix.row(id), feature) <= threshold {
            left.push(id);
        } else {
            right.push(id);
        }
    }
    (left, right)
}
