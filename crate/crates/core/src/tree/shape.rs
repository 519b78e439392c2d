use alloc::vec;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use crate::error::{Error, Result};

/// Deepest tree accepted by [`build_tree_shape`].
pub const MAX_DEPTH: usize = 8;

/// Complete binary tree of a fixed depth.
///
/// Nodes are numbered from 1 in breadth-first order: the children of `t` are
/// `2t` and `2t + 1`, branch nodes are `1..2^D` and leaves `2^D..2^(D+1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeShape {
    depth: usize,
    // Indexed by node; entry 0 unused.
    left_ancestors: Vec<Vec<usize>>,
    right_ancestors: Vec<Vec<usize>>,
}

pub fn build_tree_shape(depth: usize) -> Result<TreeShape> {
    if depth > MAX_DEPTH {
        return Err(Error::DepthTooLarge { depth, max: MAX_DEPTH });
    }
    let count = (1usize << (depth + 1)) - 1;
    let mut left_ancestors = vec![Vec::new(); count + 1];
    let mut right_ancestors = vec![Vec::new(); count + 1];
    for t in 2..=count {
        let parent = t / 2;
        let mut left = left_ancestors[parent].clone();
        let mut right = right_ancestors[parent].clone();
        if t % 2 == 0 {
            left.push(parent);
        } else {
            right.push(parent);
        }
        left.sort_unstable();
        right.sort_unstable();
        left_ancestors[t] = left;
        right_ancestors[t] = right;
    }
    Ok(TreeShape { depth, left_ancestors, right_ancestors })
}

impl TreeShape {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn node_count(&self) -> usize {
        (1 << (self.depth + 1)) - 1
    }

    pub fn branch_count(&self) -> usize {
        (1 << self.depth) - 1
    }

    pub fn leaf_count(&self) -> usize {
        1 << self.depth
    }

    /// Branch nodes; empty when the depth is 0.
    pub fn branch_nodes(&self) -> RangeInclusive<usize> {
        1..=self.branch_count()
    }

    pub fn leaf_nodes(&self) -> RangeInclusive<usize> {
        self.leaf_count()..=self.node_count()
    }

    pub fn is_leaf(&self, t: usize) -> bool {
        t >= self.leaf_count() && t <= self.node_count()
    }

    /// Position of leaf `t` among the leaves, starting at 0.
    pub fn leaf_position(&self, t: usize) -> usize {
        t - self.leaf_count()
    }

    pub fn left(t: usize) -> usize {
        2 * t
    }

    pub fn right(t: usize) -> usize {
        2 * t + 1
    }

    /// Ancestors of `t` where the path turned left, ascending.
    pub fn left_ancestors(&self, t: usize) -> &[usize] {
        &self.left_ancestors[t]
    }

    /// Ancestors of `t` where the path turned right, ascending.
    pub fn right_ancestors(&self, t: usize) -> &[usize] {
        &self.right_ancestors[t]
    }

    /// All ancestors of `t`, ascending.
    pub fn ancestors(&self, t: usize) -> Vec<usize> {
        let mut all: Vec<usize> = self.left_ancestors[t].iter().chain(&self.right_ancestors[t]).copied().collect();
        all.sort_unstable();
        all
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_two() {
        let s = build_tree_shape(2).unwrap();
        assert_eq!(s.node_count(), 7);
        assert_eq!(s.branch_nodes().collect::<Vec<_>>(), [1, 2, 3]);
        assert_eq!(s.leaf_nodes().collect::<Vec<_>>(), [4, 5, 6, 7]);
        assert_eq!(s.left_ancestors(6), &[3]);
        assert_eq!(s.right_ancestors(6), &[1]);
        assert_eq!(s.ancestors(6), [1, 3]);
        assert_eq!(s.left_ancestors(4), &[1, 2]);
        assert!(s.right_ancestors(4).is_empty());
    }

    #[test]
    fn depth_zero_is_a_single_leaf() {
        let s = build_tree_shape(0).unwrap();
        assert_eq!(s.node_count(), 1);
        assert!(s.branch_nodes().is_empty());
        assert_eq!(s.leaf_nodes().collect::<Vec<_>>(), [1]);
        assert!(s.ancestors(1).is_empty());
    }

    #[test]
    fn depth_guard() {
        assert!(build_tree_shape(8).is_ok());
        assert_eq!(build_tree_shape(9).unwrap_err(), Error::DepthTooLarge { depth: 9, max: 8 });
    }

    #[test]
    fn ancestor_sets_partition_the_path() {
        for depth in 0..=5 {
            let s = build_tree_shape(depth).unwrap();
            for t in s.leaf_nodes() {
                let all = s.ancestors(t);
                assert_eq!(all.len(), depth);
                for &m in s.left_ancestors(t) {
                    assert!(!s.right_ancestors(t).contains(&m));
                }
                // Walking up from t reproduces the same set.
                let mut path = Vec::new();
                let mut u = t;
                while u > 1 {
                    path.push(u / 2);
                    u /= 2;
                }
                path.sort_unstable();
                assert_eq!(path, all);
            }
        }
    }
}
