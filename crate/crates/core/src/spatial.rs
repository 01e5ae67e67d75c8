//! 3D kd-tree for k-nearest-neighbor queries.
//!
//! Ties in distance are broken toward the lower node id, matching the
//! brute-force all-pairs scan that defines correctness for graph
//! construction.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy)]
struct Node {
    point: u32,
    left: i32,
    right: i32,
}

/// Balanced kd-tree over `[x, y, z]` points, axes cycling by depth.
#[derive(Debug)]
pub struct KdTree {
    points: Vec<[f64; 3]>,
    nodes: Vec<Node>,
    root: i32,
}

/// Heap entry ordered worst-first: larger distance, then larger id.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    d2: f64,
    id: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.d2.total_cmp(&other.d2).then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

impl KdTree {
    pub fn build(points: &[[f64; 3]]) -> Self {
        let mut ids: Vec<u32> = (0..points.len() as u32).collect();
        let mut tree = KdTree { points: points.to_vec(), nodes: Vec::with_capacity(points.len()), root: -1 };
        tree.root = tree.build_rec(&mut ids, 0);
        tree
    }

    fn build_rec(&mut self, ids: &mut [u32], depth: usize) -> i32 {
        if ids.is_empty() {
            return -1;
        }
        let axis = depth % 3;
        ids.sort_unstable_by(|&a, &b| {
            self.points[a as usize][axis]
                .total_cmp(&self.points[b as usize][axis])
                .then(a.cmp(&b))
        });
        let mid = ids.len() / 2;
        let point = ids[mid];
        let node_idx = self.nodes.len() as i32;
        self.nodes.push(Node { point, left: -1, right: -1 });
        let (lo, rest) = ids.split_at_mut(mid);
        let (_, hi) = rest.split_at_mut(1);
        let left = self.build_rec(lo, depth + 1);
        let right = self.build_rec(hi, depth + 1);
        self.nodes[node_idx as usize].left = left;
        self.nodes[node_idx as usize].right = right;
        node_idx
    }

    /// The `k` nearest points to `query`, excluding `exclude`, sorted by
    /// `(distance, id)` ascending. Returns fewer than `k` ids only when the
    /// tree holds fewer candidates.
    pub fn knn(&self, query: &[f64; 3], k: usize, exclude: usize) -> Vec<usize> {
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        if k > 0 {
            self.search(self.root, 0, query, k, exclude, &mut heap);
        }
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort_unstable();
        out.into_iter().map(|c| c.id).collect()
    }

    fn search(
        &self,
        node: i32,
        depth: usize,
        query: &[f64; 3],
        k: usize,
        exclude: usize,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        if node < 0 {
            return;
        }
        let n = self.nodes[node as usize];
        let id = n.point as usize;
        if id != exclude {
            let cand = Candidate { d2: dist2(query, &self.points[id]), id };
            if heap.len() < k {
                heap.push(cand);
            } else if let Some(&worst) = heap.peek() {
                if cand < worst {
                    heap.pop();
                    heap.push(cand);
                }
            }
        }
        let axis = depth % 3;
        let split = self.points[n.point as usize][axis];
        let delta = query[axis] - split;
        let (near, far) = if delta < 0.0 { (n.left, n.right) } else { (n.right, n.left) };
        self.search(near, depth + 1, query, k, exclude, heap);
        // Descend the far side while it could still hold a candidate; equal
        // plane distance must be visited so id tie-breaks stay exact.
        let must_visit = match heap.peek() {
            Some(worst) if heap.len() >= k => delta * delta <= worst.d2,
            _ => true,
        };
        if must_visit {
            self.search(far, depth + 1, query, k, exclude, heap);
        }
    }
}
