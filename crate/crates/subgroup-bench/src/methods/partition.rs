//! Covariate-partition tree shared by the model-based recursive partitioning
//! and interaction-tree methods: binary splits on covariates only, an
//! adjusted p-value recorded at each split, and Kaplan-Meier ARR in each leaf.

use crate::data::TrialData;
use crate::dgp::{Direction, SubgroupClause};

use super::{km_arr, ThresholdRule, P_FLOOR};

#[derive(Debug, Clone)]
pub enum PartitionNode {
    Split {
        var: usize,
        /// Left branch takes `x[var] <= threshold`.
        threshold: f64,
        /// Multiplicity-adjusted p-value of the test that chose this split.
        p_adjusted: f64,
        size: usize,
        left: usize,
        right: usize,
    },
    Leaf {
        size: usize,
        /// Kaplan-Meier ARR at the horizon among the leaf's subjects;
        /// `None` when an arm is empty there.
        arr: Option<f64>,
    },
}

/// Arena tree, root at index 0.
#[derive(Debug, Clone)]
pub struct PartitionTree {
    pub nodes: Vec<PartitionNode>,
}

impl PartitionTree {
    pub fn single_leaf(size: usize, arr: Option<f64>) -> PartitionTree {
        PartitionTree {
            nodes: vec![PartitionNode::Leaf { size, arr }],
        }
    }

    pub fn is_single_leaf(&self) -> bool {
        self.nodes.len() == 1
    }

    /// Split-based covariate importance: each split contributes
    /// `(1 / p_adjusted) * (node size / root size)` to its variable.
    pub fn feature_importance(&self, p: usize) -> Vec<f64> {
        let root_size = match &self.nodes[0] {
            PartitionNode::Split { size, .. } => *size,
            PartitionNode::Leaf { size, .. } => *size,
        } as f64;
        let mut importance = vec![0.0; p];
        for node in &self.nodes {
            if let PartitionNode::Split {
                var,
                p_adjusted,
                size,
                ..
            } = node
            {
                importance[*var] +=
                    (1.0 / p_adjusted.max(P_FLOOR)) * (*size as f64 / root_size);
            }
        }
        importance
    }

    /// The path rule of the leaf with the largest estimated ARR (first in
    /// depth-first order on ties). `None` when no leaf has an estimable ARR
    /// or the tree never split.
    pub fn best_leaf_rule(&self) -> Option<ThresholdRule> {
        if self.is_single_leaf() {
            return None;
        }
        let mut best: Option<(f64, Vec<SubgroupClause>)> = None;
        let mut stack: Vec<(usize, Vec<SubgroupClause>)> = vec![(0, Vec::new())];
        // Depth-first, left child pushed last so it pops first.
        while let Some((at, path)) = stack.pop() {
            match &self.nodes[at] {
                PartitionNode::Leaf { arr: Some(arr), .. } => {
                    let better = match &best {
                        None => true,
                        Some((b, _)) => arr > b,
                    };
                    if better {
                        best = Some((*arr, path));
                    }
                }
                PartitionNode::Leaf { arr: None, .. } => {}
                PartitionNode::Split {
                    var,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    let mut lp = path.clone();
                    lp.push(SubgroupClause {
                        var: *var,
                        direction: Direction::Le,
                        threshold: *threshold,
                    });
                    let mut rp = path;
                    rp.push(SubgroupClause {
                        var: *var,
                        direction: Direction::Gt,
                        threshold: *threshold,
                    });
                    stack.push((*right, rp));
                    stack.push((*left, lp));
                }
            }
        }
        best.map(|(_, clauses)| ThresholdRule {
            clauses,
            positive: true,
        })
    }
}

/// Builds a leaf node's payload for `indices`.
pub(super) fn make_leaf(data: &TrialData, indices: &[usize], horizon: f64) -> PartitionNode {
    PartitionNode::Leaf {
        size: indices.len(),
        arr: km_arr(data, indices, horizon),
    }
}
