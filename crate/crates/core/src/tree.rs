//! Depth-limited randomized binary partition trees.
//!
//! A tree is grown by recursive splits on a uniformly chosen attribute at a
//! uniformly chosen value strictly inside that attribute's range at the node.
//! Points strictly less than the split go left, the rest go right. Growth
//! stops at the depth limit or when one point (or a set of exact duplicates)
//! remains. Nodes live in one flat arena addressed by index, so a
//! million-point ensemble stays cache- and allocator-friendly.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;

pub const UNLIMITED_DEPTH: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Internal { attr: u32, split: f64, left: u32, right: u32 },
    Leaf { size: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicTree {
    nodes: Vec<Node>,
    dims: usize,
    depth_limit: usize,
}

/// Outcome of routing one query through a tree: edges traversed from the
/// root, and the training population of the terminal leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathResult {
    pub h0: usize,
    pub leaf_size: usize,
}

impl AtomicTree {
    /// Grow a tree over all rows of `x`. `depth_limit` bounds the number of
    /// edges root→leaf; pass [`UNLIMITED_DEPTH`] to grow until isolation.
    pub fn construct(x: &DataMatrix, depth_limit: usize, rng: &mut ChaCha8Rng) -> AtomicTree {
        let indices: Vec<u32> = (0..x.n_rows() as u32).collect();
        Self::construct_on(x, indices, depth_limit, rng)
    }

    /// Grow a tree over the subset of rows named by `indices`.
    pub fn construct_on(
        x: &DataMatrix,
        mut indices: Vec<u32>,
        depth_limit: usize,
        rng: &mut ChaCha8Rng,
    ) -> AtomicTree {
        let m = x.n_cols();
        let mut nodes = Vec::new();
        // Work items: (start, end) range of `indices`, node slot, depth.
        // A sentinel slot of u32::MAX marks the root.
        let mut stack: Vec<(usize, usize, u32, bool, usize)> = Vec::new();
        nodes.push(Node::Leaf { size: 0 }); // placeholder root
        stack.push((0, indices.len(), u32::MAX, false, 0));

        while let Some((start, end, parent, is_right, depth)) = stack.pop() {
            let len = end - start;
            let slot = if parent == u32::MAX {
                0
            } else {
                let slot = nodes.len() as u32;
                nodes.push(Node::Leaf { size: 0 });
                if let Node::Internal { left, right, .. } = &mut nodes[parent as usize] {
                    if is_right {
                        *right = slot;
                    } else {
                        *left = slot;
                    }
                }
                slot
            };

            let split = if len <= 1 || depth >= depth_limit {
                None
            } else {
                choose_split(x, &indices[start..end], m, rng)
            };

            match split {
                None => nodes[slot as usize] = Node::Leaf { size: len as u32 },
                Some((attr, value)) => {
                    let mid = partition(x, &mut indices[start..end], attr, value) + start;
                    debug_assert!(mid > start && mid < end);
                    nodes[slot as usize] =
                        Node::Internal { attr: attr as u32, split: value, left: 0, right: 0 };
                    // Right pushed first so the left child is processed (and
                    // allocated) first; the layout stays deterministic.
                    stack.push((mid, end, slot, true, depth + 1));
                    stack.push((start, mid, slot, false, depth + 1));
                }
            }
        }

        AtomicTree { nodes, dims: m, depth_limit }
    }

    /// Route `q` from root to leaf. Ties (`q[attr] == split`) go right, the
    /// same rule construction uses.
    pub fn path_length(&self, q: &[f64]) -> PathResult {
        assert_eq!(q.len(), self.dims, "query dimensionality mismatch");
        let mut i = 0usize;
        let mut h0 = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { size } => return PathResult { h0, leaf_size: *size as usize },
                Node::Internal { attr, split, left, right } => {
                    i = if q[*attr as usize] < *split { *left as usize } else { *right as usize };
                    h0 += 1;
                }
            }
        }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn depth_limit(&self) -> usize {
        self.depth_limit
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Visit every leaf as `(depth, size)`.
    pub fn for_each_leaf(&self, mut f: impl FnMut(usize, usize)) {
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, depth)) = stack.pop() {
            match &self.nodes[i] {
                Node::Leaf { size } => f(depth, *size as usize),
                Node::Internal { left, right, .. } => {
                    stack.push((*left as usize, depth + 1));
                    stack.push((*right as usize, depth + 1));
                }
            }
        }
    }

    /// Training points in the tree (sum of leaf sizes).
    pub fn n_train(&self) -> usize {
        let mut total = 0;
        self.for_each_leaf(|_, size| total += size);
        total
    }

    /// Mean leaf depth over training points.
    pub fn mean_point_depth(&self) -> f64 {
        let mut total = 0.0;
        let mut count = 0usize;
        self.for_each_leaf(|depth, size| {
            total += (depth * size) as f64;
            count += size;
        });
        if count == 0 {
            0.0
        } else {
            total / count as f64
        }
    }

    /// Most frequent leaf depth over training points (ties toward the
    /// shallower depth).
    pub fn modal_point_depth(&self) -> usize {
        let mut histogram: Vec<usize> = Vec::new();
        self.for_each_leaf(|depth, size| {
            if depth >= histogram.len() {
                histogram.resize(depth + 1, 0);
            }
            histogram[depth] += size;
        });
        histogram
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map_or(0, |(depth, _)| depth)
    }
}

/// Pick a split attribute and value for the points in `idx`.
///
/// The attribute is drawn uniformly; a draw that lands on a zero-range
/// attribute is retried up to `m` times, after which the remaining
/// attributes are scanned directly. Returns `None` only when every attribute
/// has zero range (exact duplicates), which forces a leaf.
fn choose_split(
    x: &DataMatrix,
    idx: &[u32],
    m: usize,
    rng: &mut ChaCha8Rng,
) -> Option<(usize, f64)> {
    for _ in 0..m {
        let attr = rng.random_range(0..m);
        let (lo, hi) = attr_range(x, idx, attr);
        if hi > lo {
            return Some((attr, draw_split_value(lo, hi, rng)));
        }
    }
    let usable: Vec<usize> = (0..m)
        .filter(|&attr| {
            let (lo, hi) = attr_range(x, idx, attr);
            hi > lo
        })
        .collect();
    if usable.is_empty() {
        return None;
    }
    let attr = usable[rng.random_range(0..usable.len())];
    let (lo, hi) = attr_range(x, idx, attr);
    Some((attr, draw_split_value(lo, hi, rng)))
}

fn attr_range(x: &DataMatrix, idx: &[u32], attr: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &i in idx {
        let v = x.get(i as usize, attr);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Uniform draw on the open interval (lo, hi), so both children are nonempty:
/// the minimum point falls strictly left and the maximum strictly right.
fn draw_split_value(lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v = rng.random_range(lo..hi);
        if v > lo {
            return v;
        }
    }
}

/// In-place stable-free partition: points with `value[attr] < split` move to
/// the front. Returns the count on the left.
fn partition(x: &DataMatrix, idx: &mut [u32], attr: usize, split: f64) -> usize {
    let mut left = 0usize;
    for i in 0..idx.len() {
        if x.get(idx[i] as usize, attr) < split {
            idx.swap(left, i);
            left += 1;
        }
    }
    left
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_gaussian_blobs, DataMatrix};
    use crate::seed::{Seed, DOM_TREE};

    fn rng(master: u64, idx: u64) -> ChaCha8Rng {
        Seed::new(master).derive(&[DOM_TREE, idx]).rng()
    }

    fn one_d(values: &[f64]) -> DataMatrix {
        DataMatrix::from_vec(values.len(), 1, values.to_vec()).unwrap()
    }

    #[test]
    fn single_point_is_a_leaf() {
        let x = one_d(&[3.0]);
        let t = AtomicTree::construct(&x, UNLIMITED_DEPTH, &mut rng(1, 0));
        assert_eq!(t.n_nodes(), 1);
        assert_eq!(t.path_length(&[3.0]), PathResult { h0: 0, leaf_size: 1 });
    }

    #[test]
    fn empty_matrix_is_an_empty_leaf() {
        let x = DataMatrix::from_vec(0, 2, vec![]).unwrap();
        let t = AtomicTree::construct(&x, UNLIMITED_DEPTH, &mut rng(1, 1));
        assert_eq!(t.path_length(&[0.0, 0.0]), PathResult { h0: 0, leaf_size: 0 });
    }

    #[test]
    fn depth_limit_zero_keeps_everything_in_the_root() {
        let x = one_d(&[1.0, 2.0, 3.0, 4.0]);
        let t = AtomicTree::construct(&x, 0, &mut rng(1, 2));
        assert_eq!(t.path_length(&[2.5]), PathResult { h0: 0, leaf_size: 4 });
    }

    #[test]
    fn full_growth_isolates_distinct_points() {
        let x = one_d(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let t = AtomicTree::construct(&x, UNLIMITED_DEPTH, &mut rng(2, 0));
        let mut leaves = 0;
        let mut max_depth = 0;
        t.for_each_leaf(|depth, size| {
            leaves += 1;
            max_depth = max_depth.max(depth);
            assert_eq!(size, 1);
        });
        assert_eq!(leaves, 8);
        assert!(max_depth >= 3, "binary tree over 8 leaves has depth >= 3");
    }

    #[test]
    fn training_points_reach_singleton_leaves() {
        // 64 distinct points: every training point must terminate in a
        // leaf of size 1 when growth is unbounded.
        let x = gen_gaussian_blobs(&[vec![0.0, 0.0]], &[1.0], &[64], Seed::new(3)).unwrap();
        for k in 0..10 {
            let t = AtomicTree::construct(&x, UNLIMITED_DEPTH, &mut rng(3, k));
            for i in 0..x.n_rows() {
                let p = t.path_length(x.row(i));
                assert_eq!(p.leaf_size, 1, "seed {k} point {i}");
            }
        }
    }

    #[test]
    fn leaf_sizes_sum_to_training_count() {
        let x = gen_gaussian_blobs(&[vec![0.0, 0.0, 0.0]], &[2.0], &[257], Seed::new(4)).unwrap();
        for (k, limit) in [(0u64, 4usize), (1, 8), (2, UNLIMITED_DEPTH)] {
            let t = AtomicTree::construct(&x, limit, &mut rng(4, k));
            assert_eq!(t.n_train(), 257);
            if limit != UNLIMITED_DEPTH {
                t.for_each_leaf(|depth, _| assert!(depth <= limit));
            }
        }
    }

    #[test]
    fn duplicates_become_a_leaf() {
        let x = one_d(&[5.0; 32]);
        let t = AtomicTree::construct(&x, UNLIMITED_DEPTH, &mut rng(5, 0));
        assert_eq!(t.path_length(&[5.0]), PathResult { h0: 0, leaf_size: 32 });

        // Mixed: duplicates must terminate even below the limit.
        let mut vals = vec![1.0; 16];
        vals.extend_from_slice(&[2.0, 3.0, 4.0]);
        let x = one_d(&vals);
        let t = AtomicTree::construct(&x, UNLIMITED_DEPTH, &mut rng(5, 1));
        assert_eq!(t.n_train(), 19);
        let p = t.path_length(&[1.0]);
        assert_eq!(p.leaf_size, 16);
    }

    #[test]
    fn zero_range_attribute_is_avoided() {
        // Second column constant: splits must always use the first.
        let mut vals = Vec::new();
        for i in 0..32 {
            vals.push(i as f64);
            vals.push(7.0);
        }
        let x = DataMatrix::from_vec(32, 2, vals).unwrap();
        let t = AtomicTree::construct(&x, UNLIMITED_DEPTH, &mut rng(6, 0));
        let mut leaves = 0;
        t.for_each_leaf(|_, size| {
            assert_eq!(size, 1);
            leaves += 1;
        });
        assert_eq!(leaves, 32);
    }

    #[test]
    fn two_point_tree_routes_queries() {
        let x = one_d(&[0.0, 1.0]);
        let t = AtomicTree::construct(&x, UNLIMITED_DEPTH, &mut rng(7, 0));
        // Root must split the two points into singleton leaves.
        assert_eq!(t.path_length(&[-5.0]), PathResult { h0: 1, leaf_size: 1 });
        assert_eq!(t.path_length(&[5.0]), PathResult { h0: 1, leaf_size: 1 });
    }

    #[test]
    fn construction_is_deterministic() {
        let x = gen_gaussian_blobs(&[vec![0.0, 0.0]], &[1.0], &[500], Seed::new(8)).unwrap();
        let a = AtomicTree::construct(&x, 8, &mut rng(8, 3));
        let b = AtomicTree::construct(&x, 8, &mut rng(8, 3));
        assert_eq!(a, b);
    }

    #[test]
    fn outliers_isolate_faster_on_average() {
        // Statistical: a point 10 sigma out has a shorter mean path than the
        // blob average, over 100 trees.
        let blob = gen_gaussian_blobs(&[vec![0.0, 0.0]], &[1.0], &[512], Seed::new(9)).unwrap();
        let far = [10.0, 10.0];
        let mut outlier_sum = 0.0;
        let mut blob_sum = 0.0;
        for k in 0..100 {
            let t = AtomicTree::construct(&blob, UNLIMITED_DEPTH, &mut rng(9, k));
            outlier_sum += t.path_length(&far).h0 as f64;
            for i in 0..blob.n_rows() {
                blob_sum += t.path_length(blob.row(i)).h0 as f64;
            }
        }
        let outlier_mean = outlier_sum / 100.0;
        let blob_mean = blob_sum / (100.0 * 512.0);
        assert!(
            outlier_mean < blob_mean,
            "outlier mean {outlier_mean} vs blob mean {blob_mean}"
        );
    }
}
