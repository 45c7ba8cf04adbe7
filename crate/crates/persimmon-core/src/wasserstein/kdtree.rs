//! Static 2-d kd-tree for nearest-neighbor queries on plane points.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P2 {
    pub x: f64,
    pub y: f64,
}

impl P2 {
    pub fn new(x: f64, y: f64) -> Self {
        P2 { x, y }
    }

    #[inline]
    pub fn dist(&self, other: &P2) -> f64 {
        self.dist_sq(other).sqrt()
    }

    #[inline]
    pub fn dist_sq(&self, other: &P2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn coord(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.x
        } else {
            self.y
        }
    }
}

/// Recursive median-split tree stored as a flat node array.
pub struct KdTree {
    nodes: Vec<Node>,
    root: Option<usize>,
}

struct Node {
    point: P2,
    axis: usize,
    left: Option<usize>,
    right: Option<usize>,
}

impl KdTree {
    pub fn build(points: &[P2]) -> Self {
        let mut idx: Vec<usize> = (0..points.len()).collect();
        let mut tree = KdTree {
            nodes: Vec::with_capacity(points.len()),
            root: None,
        };
        tree.root = tree.build_rec(points, &mut idx, 0);
        tree
    }

    fn build_rec(&mut self, points: &[P2], idx: &mut [usize], axis: usize) -> Option<usize> {
        if idx.is_empty() {
            return None;
        }
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| {
            points[a]
                .coord(axis)
                .total_cmp(&points[b].coord(axis))
                .then(a.cmp(&b))
        });
        let pivot = idx[mid];
        let slot = self.nodes.len();
        self.nodes.push(Node {
            point: points[pivot],
            axis,
            left: None,
            right: None,
        });
        let (lo, rest) = idx.split_at_mut(mid);
        let hi = &mut rest[1..];
        let left = self.build_rec(points, lo, axis ^ 1);
        let right = self.build_rec(points, hi, axis ^ 1);
        self.nodes[slot].left = left;
        self.nodes[slot].right = right;
        Some(slot)
    }

    /// Distance to the closest stored point; `+inf` when the tree is empty.
    pub fn nearest_dist(&self, query: &P2) -> f64 {
        let mut best = f64::INFINITY;
        if let Some(root) = self.root {
            self.nearest_rec(root, query, &mut best);
        }
        best.sqrt()
    }

    fn nearest_rec(&self, node: usize, query: &P2, best_sq: &mut f64) {
        let n = &self.nodes[node];
        let d = n.point.dist_sq(query);
        if d < *best_sq {
            *best_sq = d;
        }
        let delta = query.coord(n.axis) - n.point.coord(n.axis);
        let (near, far) = if delta <= 0.0 {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        if let Some(c) = near {
            self.nearest_rec(c, query, best_sq);
        }
        if let Some(c) = far {
            if delta * delta < *best_sq {
                self.nearest_rec(c, query, best_sq);
            }
        }
    }
}
