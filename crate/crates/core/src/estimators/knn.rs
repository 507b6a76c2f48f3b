//! Nearest-neighbor machinery for the KSG-family estimators: a 2-d
//! kd-tree for max-norm k-NN queries and exact marginal range counts over
//! sorted arrays.
//!
//! The accelerated paths here are count-equivalent to the O(N^2) brute
//! force: range counts binary-search with the same floating-point
//! difference predicate a linear scan would evaluate, and the kd-tree
//! returns the exact k-th smallest distance.

use std::collections::BinaryHeap;

/// Exact range counting over a sorted copy of one marginal.
pub struct SortedCounter {
    sorted: Vec<f64>,
}

impl SortedCounter {
    pub fn new(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        SortedCounter { sorted }
    }

    /// Number of values v with |v - center| < radius (strict) or
    /// <= radius (closed), including any occurrences of `center` itself.
    ///
    /// Counts match a linear scan bit-for-bit: both sides evaluate the
    /// same exact difference before comparing.
    pub fn count_within(&self, center: f64, radius: f64, strict: bool) -> usize {
        let split = self.sorted.partition_point(|&x| x < center);
        let inside = |diff: f64| {
            if strict {
                diff < radius
            } else {
                diff <= radius
            }
        };
        // left of split: difference center - x decreases with index, so
        // the in-range values form a suffix
        let left = &self.sorted[..split];
        let left_start = left.partition_point(|&x| !inside(center - x));
        // right of split: difference x - center is nondecreasing, so the
        // in-range values form a prefix
        let right = &self.sorted[split..];
        let right_len = right.partition_point(|&x| inside(x - center));
        (split - left_start) + right_len
    }
}

#[derive(PartialEq)]
struct HeapDist(f64);

impl Eq for HeapDist {}

impl PartialOrd for HeapDist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapDist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.partial_cmp(&other.0).unwrap()
    }
}

/// Static kd-tree over 2-d points with Chebyshev (max-norm) k-NN queries.
pub struct KdTree2 {
    xs: Vec<f64>,
    ys: Vec<f64>,
    order: Vec<u32>,
}

impl KdTree2 {
    pub fn build(xs: &[f64], ys: &[f64]) -> Self {
        assert_eq!(xs.len(), ys.len());
        let order: Vec<u32> = (0..xs.len() as u32).collect();
        let mut tree = KdTree2 {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            order,
        };
        let mut scratch = std::mem::take(&mut tree.order);
        tree.split(&mut scratch, 0);
        tree.order = scratch;
        tree
    }

    fn split(&self, order: &mut [u32], depth: usize) {
        if order.len() <= 1 {
            return;
        }
        let mid = order.len() / 2;
        let coords = if depth % 2 == 0 { &self.xs } else { &self.ys };
        order.select_nth_unstable_by(mid, |&a, &b| {
            coords[a as usize]
                .partial_cmp(&coords[b as usize])
                .unwrap()
                .then(a.cmp(&b))
        });
        let (left, rest) = order.split_at_mut(mid);
        self.split(left, depth + 1);
        self.split(&mut rest[1..], depth + 1);
    }

    /// Exact k-th smallest max-norm distance from point `query` to the
    /// other points (the query index itself is excluded). Requires
    /// `k < len`.
    pub fn kth_neighbor_distance(&self, query: usize, k: usize) -> f64 {
        debug_assert!(k >= 1 && k < self.xs.len());
        let mut heap: BinaryHeap<HeapDist> = BinaryHeap::with_capacity(k + 1);
        self.search(
            &self.order,
            0,
            query,
            self.xs[query],
            self.ys[query],
            k,
            &mut heap,
        );
        heap.peek().expect("k < len guarantees k neighbors").0
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        order: &[u32],
        depth: usize,
        query: usize,
        qx: f64,
        qy: f64,
        k: usize,
        heap: &mut BinaryHeap<HeapDist>,
    ) {
        if order.is_empty() {
            return;
        }
        let mid = order.len() / 2;
        let node = order[mid] as usize;
        if node != query {
            let d = (self.xs[node] - qx).abs().max((self.ys[node] - qy).abs());
            if heap.len() < k {
                heap.push(HeapDist(d));
            } else if d < heap.peek().unwrap().0 {
                heap.push(HeapDist(d));
                heap.pop();
            }
        }
        let (axis_q, axis_node) = if depth % 2 == 0 {
            (qx, self.xs[node])
        } else {
            (qy, self.ys[node])
        };
        let (near, far) = if axis_q < axis_node {
            (&order[..mid], &order[mid + 1..])
        } else {
            (&order[mid + 1..], &order[..mid])
        };
        self.search(near, depth + 1, query, qx, qy, k, heap);
        let axis_gap = (axis_q - axis_node).abs();
        if heap.len() < k || axis_gap <= heap.peek().unwrap().0 {
            self.search(far, depth + 1, query, qx, qy, k, heap);
        }
    }
}

/// Brute-force k-th neighbor distance; test oracle for the kd-tree.
#[cfg(test)]
pub fn kth_neighbor_distance_brute(xs: &[f64], ys: &[f64], query: usize, k: usize) -> f64 {
    let mut dists: Vec<f64> = (0..xs.len())
        .filter(|&j| j != query)
        .map(|j| (xs[j] - xs[query]).abs().max((ys[j] - ys[query]).abs()))
        .collect();
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dists[k - 1]
}

/// k-th nearest-neighbor distance on a line, for every element of a
/// sorted slice. Returns distances indexed like the input slice.
pub fn knn_distances_sorted_1d(sorted: &[f64], k: usize) -> Vec<f64> {
    let n = sorted.len();
    debug_assert!(k < n);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // grow a window of the k nearest by always taking the closer side
        let (mut lo, mut hi) = (i, i);
        let mut d = 0.0f64;
        for _ in 0..k {
            let left = if lo > 0 {
                sorted[i] - sorted[lo - 1]
            } else {
                f64::INFINITY
            };
            let right = if hi + 1 < n {
                sorted[hi + 1] - sorted[i]
            } else {
                f64::INFINITY
            };
            if left <= right {
                lo -= 1;
                d = d.max(left);
            } else {
                hi += 1;
                d = d.max(right);
            }
        }
        out.push(d);
    }
    out
}
