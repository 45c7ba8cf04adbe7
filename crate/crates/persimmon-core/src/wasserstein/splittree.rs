//! Split tree and well-separated pair decomposition over plane points.
//!
//! The tree splits the longest bounding-box edge at its midpoint until each
//! leaf holds one point. Every node designates the lexicographically
//! smallest point of its subset as representative, which sharpens the
//! spanner stretch to `1 + 4/s + 4/(s-2)`.

use rayon::prelude::*;

use super::kdtree::P2;

#[derive(Debug, Clone, Copy)]
struct Bbox {
    min: P2,
    max: P2,
}

impl Bbox {
    fn of(points: &[P2]) -> Bbox {
        let mut min = P2::new(f64::INFINITY, f64::INFINITY);
        let mut max = P2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Bbox { min, max }
    }

    fn center(&self) -> P2 {
        P2::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
        )
    }

    /// radius of the circumscribed ball
    fn radius(&self) -> f64 {
        0.5 * self.min.dist(&self.max)
    }

    fn longest_axis(&self) -> usize {
        if self.max.x - self.min.x >= self.max.y - self.min.y {
            0
        } else {
            1
        }
    }
}

#[derive(Debug)]
struct SplitNode {
    bbox: Bbox,
    /// index into the permuted point array
    representative: u32,
    /// contiguous range of permuted points in this subtree
    range: (u32, u32),
    children: Option<(u32, u32)>,
}

/// Binary spatial decomposition of a distinct point set.
pub struct SplitTree {
    nodes: Vec<SplitNode>,
    /// points permuted so every subtree is contiguous
    pub points: Vec<P2>,
    /// permuted position of each original point
    pub position_of: Vec<u32>,
}

impl SplitTree {
    /// `points` must be pairwise distinct.
    pub fn build(original: &[P2]) -> SplitTree {
        assert!(!original.is_empty(), "split tree needs at least one point");
        let mut order: Vec<u32> = (0..original.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * original.len());
        build_rec(original, &mut order, 0, &mut nodes);
        let points: Vec<P2> = order.iter().map(|&i| original[i as usize]).collect();
        let mut position_of = vec![0u32; original.len()];
        for (pos, &orig) in order.iter().enumerate() {
            position_of[orig as usize] = pos as u32;
        }
        SplitTree {
            nodes,
            points,
            position_of,
        }
    }
}

fn build_rec(original: &[P2], order: &mut [u32], offset: u32, nodes: &mut Vec<SplitNode>) -> u32 {
    let pts: Vec<P2> = order.iter().map(|&i| original[i as usize]).collect();
    let bbox = Bbox::of(&pts);
    let slot = nodes.len() as u32;
    nodes.push(SplitNode {
        bbox,
        representative: 0,
        range: (offset, offset + order.len() as u32),
        children: None,
    });
    if order.len() == 1 {
        nodes[slot as usize].representative = offset;
        return slot;
    }
    let axis = bbox.longest_axis();
    let mid = 0.5 * (bbox.min.coord(axis) + bbox.max.coord(axis));
    let mut split = partition_by(order, |&i| original[i as usize].coord(axis) < mid);
    if split == 0 || split == order.len() {
        // the midpoint rounded onto an extreme coordinate; fall back to a
        // lexicographic median split, which always separates distinct points
        order.sort_unstable_by(|&a, &b| {
            let (pa, pb) = (original[a as usize], original[b as usize]);
            (pa.x, pa.y).partial_cmp(&(pb.x, pb.y)).unwrap()
        });
        split = order.len() / 2;
    }
    let (lo, hi) = order.split_at_mut(split);
    let left = build_rec(original, lo, offset, nodes);
    let right = build_rec(original, hi, offset + split as u32, nodes);
    nodes[slot as usize].children = Some((left, right));
    // lexicographically smallest point of the subset
    let (lr, rr) = (
        nodes[left as usize].representative,
        nodes[right as usize].representative,
    );
    let (pl, pr) = (
        original[order_lookup(order, offset, lr)],
        original[order_lookup(order, offset, rr)],
    );
    nodes[slot as usize].representative = if (pl.x, pl.y) <= (pr.x, pr.y) { lr } else { rr };
    slot
}

// representative indices refer to permuted positions; the permutation of
// this subtree's slice is already final, so translate through it
fn order_lookup(order: &[u32], offset: u32, pos: u32) -> usize {
    order[(pos - offset) as usize] as usize
}

fn partition_by<T, F: Fn(&T) -> bool>(slice: &mut [T], pred: F) -> usize {
    let mut split = 0usize;
    for i in 0..slice.len() {
        if pred(&slice[i]) {
            slice.swap(split, i);
            split += 1;
        }
    }
    split
}

/// One well-separated pair, as permuted point ranges plus representatives.
#[derive(Debug, Clone, Copy)]
pub struct WspdPair {
    pub rep_a: u32,
    pub rep_b: u32,
    pub range_a: (u32, u32),
    pub range_b: (u32, u32),
}

fn well_separated(a: &Bbox, b: &Bbox, s: f64) -> bool {
    let r = a.radius().max(b.radius());
    a.center().dist(&b.center()) >= (s + 2.0) * r
}

/// Collects the s-WSPD of the tree's point set: every unordered point pair
/// is covered by exactly one pair of well-separated subsets. Pair discovery
/// runs per internal node with a count / prefix-sum / write scheme, so the
/// output order is independent of the worker count.
pub fn build_wspd(tree: &SplitTree, s: f64) -> Vec<WspdPair> {
    assert!(s > 2.0, "well-separation parameter must exceed 2");
    let internal: Vec<usize> = (0..tree.nodes.len())
        .filter(|&i| tree.nodes[i].children.is_some())
        .collect();
    let counts: Vec<usize> = internal
        .par_iter()
        .map(|&i| {
            let (l, r) = tree.nodes[i].children.unwrap();
            let mut count = 0usize;
            walk_pairs(tree, l, r, s, &mut |_| count += 1);
            count
        })
        .collect();
    let mut offsets = Vec::with_capacity(internal.len() + 1);
    offsets.push(0usize);
    for &c in &counts {
        offsets.push(offsets.last().unwrap() + c);
    }
    let mut out: Vec<WspdPair> = vec![
        WspdPair {
            rep_a: 0,
            rep_b: 0,
            range_a: (0, 0),
            range_b: (0, 0)
        };
        offsets[internal.len()]
    ];
    // carve the output into per-node windows so writers stay disjoint
    let mut slices: Vec<&mut [WspdPair]> = Vec::with_capacity(internal.len());
    let mut rest = out.as_mut_slice();
    for &count in &counts {
        let (head, tail) = rest.split_at_mut(count);
        slices.push(head);
        rest = tail;
    }
    internal
        .par_iter()
        .zip(slices.par_iter_mut())
        .for_each(|(&i, slice)| {
            let (l, r) = tree.nodes[i].children.unwrap();
            let mut k = 0usize;
            walk_pairs(tree, l, r, s, &mut |pair| {
                slice[k] = pair;
                k += 1;
            });
            debug_assert_eq!(k, slice.len());
        });
    out
}

fn walk_pairs(tree: &SplitTree, a: u32, b: u32, s: f64, emit: &mut impl FnMut(WspdPair)) {
    let (na, nb) = (&tree.nodes[a as usize], &tree.nodes[b as usize]);
    if well_separated(&na.bbox, &nb.bbox, s) {
        emit(WspdPair {
            rep_a: na.representative,
            rep_b: nb.representative,
            range_a: na.range,
            range_b: nb.range,
        });
        return;
    }
    // recurse into the side with the larger bounding box
    let split_a = match (na.children, nb.children) {
        (Some(_), None) => true,
        (None, Some(_)) => false,
        (Some(_), Some(_)) => na.bbox.radius() > nb.bbox.radius(),
        (None, None) => unreachable!("two singleton boxes are always well separated"),
    };
    if split_a {
        let (l, r) = na.children.unwrap();
        walk_pairs(tree, l, b, s, emit);
        walk_pairs(tree, r, b, s, emit);
    } else {
        let (l, r) = nb.children.unwrap();
        walk_pairs(tree, a, l, s, emit);
        walk_pairs(tree, a, r, s, emit);
    }
}

/// Biarcs between pair representatives plus their l2 costs, in permuted
/// point indices.
pub fn spanner_arcs(tree: &SplitTree, pairs: &[WspdPair]) -> Vec<(u32, u32, f64)> {
    pairs
        .iter()
        .map(|p| {
            let (a, b) = (p.rep_a, p.rep_b);
            let cost = tree.points[a as usize].dist(&tree.points[b as usize]);
            (a, b, cost)
        })
        .collect()
}
