//! 1-Wasserstein distances between persistence diagrams: the exact min-cost
//! flow formulation, cheap lower bounds, delta-condensation, a WSPD spanner,
//! and the end-to-end approximation pipeline.
//!
//! All functions operate on the finite off-diagonal points of the diagrams;
//! infinite bars are the caller's concern.

pub mod kdtree;
pub mod netsimplex;
pub mod network;
pub mod splittree;

use std::collections::HashMap;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use kdtree::{KdTree, P2};
use netsimplex::{network_simplex_mcf, FlowResult, SolveOptions};
use network::{NetworkBuilder, PlaneRef, SupplyNode, TransshipmentNetwork};
use splittree::{build_wspd, spanner_arcs, SplitTree, WspdPair};

fn diagonal_distance(p: &P2) -> f64 {
    (p.y - p.x).abs() / std::f64::consts::SQRT_2
}

/// Merges exact duplicate points into supply-weighted nodes (the
/// 0-condensation). Output is sorted by coordinates.
pub fn zero_condense(points: &[(f64, f64)]) -> Vec<SupplyNode> {
    let mut sorted: Vec<P2> = points.iter().map(|&(x, y)| P2::new(x, y)).collect();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let mut out: Vec<SupplyNode> = Vec::new();
    for p in sorted {
        match out.last_mut() {
            Some(last)
                if last.point.x.to_bits() == p.x.to_bits()
                    && last.point.y.to_bits() == p.y.to_bits() =>
            {
                last.mass += 1;
            }
            _ => out.push(SupplyNode { point: p, mass: 1 }),
        }
    }
    out
}

fn solve_bipartite(a: &[SupplyNode], b: &[SupplyNode]) -> Result<FlowResult> {
    let builder = NetworkBuilder {
        a_nodes: a,
        b_nodes: b,
    };
    let net = builder.build(&builder.full_bipartite_arcs())?;
    network_simplex_mcf(&net, &SolveOptions::default())
}

/// Exact 1-Wasserstein distance between the finite parts of two diagrams:
/// min-cost flow on the full bipartite transshipment network with diagonal
/// super-nodes. Inputs are ordered canonically first, so the result is
/// bit-exact symmetric.
pub fn exact_w1(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<f64> {
    let (first, second) = if multiset_leq(a, b) { (a, b) } else { (b, a) };
    let an = zero_condense(first);
    let bn = zero_condense(second);
    Ok(solve_bipartite(&an, &bn)?.value)
}

fn multiset_leq(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
    let mut sa: Vec<(u64, u64)> = a.iter().map(|p| (p.0.to_bits(), p.1.to_bits())).collect();
    let mut sb: Vec<(u64, u64)> = b.iter().map(|p| (p.0.to_bits(), p.1.to_bits())).collect();
    sa.sort_unstable();
    sb.sort_unstable();
    sa <= sb
}

/// Relaxed transport lower bound: each supply ships to its cheapest target,
/// counting the diagonal as a target; symmetrized by taking the larger of
/// the two directions. Never exceeds the exact distance.
pub fn rwmd_lower_bound(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let an = zero_condense(a);
    let bn = zero_condense(b);
    one_sided_rwmd(&an, &bn).max(one_sided_rwmd(&bn, &an))
}

fn one_sided_rwmd(from: &[SupplyNode], to: &[SupplyNode]) -> f64 {
    let targets: Vec<P2> = to.iter().map(|n| n.point).collect();
    let tree = KdTree::build(&targets);
    let contributions: Vec<f64> = from
        .par_iter()
        .map(|node| {
            let nn = tree.nearest_dist(&node.point);
            let best = nn.min(diagonal_distance(&node.point));
            node.mass as f64 * best
        })
        .collect();
    contributions.iter().sum()
}

/// Half the distance between the centroids of `A ∪ proj(B)` and
/// `B ∪ proj(A)`; a lower bound on the exact distance.
pub fn wcd_lower_bound(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let count = a.len() + b.len();
    if count == 0 {
        return 0.0;
    }
    let mut xa = (0.0f64, 0.0f64);
    let mut xb = (0.0f64, 0.0f64);
    for &(x, y) in a {
        xa.0 += x;
        xa.1 += y;
        let m = 0.5 * (x + y);
        xb.0 += m;
        xb.1 += m;
    }
    for &(x, y) in b {
        xb.0 += x;
        xb.1 += y;
        let m = 0.5 * (x + y);
        xa.0 += m;
        xa.1 += m;
    }
    let n = count as f64;
    let dx = xa.0 / n - xb.0 / n;
    let dy = xa.1 / n - xb.1 / n;
    0.5 * (dx * dx + dy * dy).sqrt()
}

/// Result of delta-condensation: supply-weighted nodes per side plus the
/// grid pitch actually used (0 when condensation was skipped).
#[derive(Debug, Clone)]
pub struct Condensed {
    pub a_nodes: Vec<SupplyNode>,
    pub b_nodes: Vec<SupplyNode>,
    pub delta: f64,
    pub epsilon: f64,
}

const GRID_FRACTION: f64 = 0.99;

/// Condensation error target for sparsity `s`.
pub fn condensation_epsilon(s: f64) -> f64 {
    if s >= 12.0 {
        8.0 / (s - 4.0)
    } else {
        1.0
    }
}

/// Snaps both diagrams to a common `0.99*delta` lattice, aggregates
/// supplies per lattice point, and perturbs every occupied lattice point
/// inside a `0.01*(delta/2)`-radius square with the seeded generator.
/// Co-located A/B lattice nodes share one perturbation, so they stay
/// exactly co-located. When the lower bound is zero the points pass
/// through unchanged.
pub fn delta_condense(a: &[(f64, f64)], b: &[(f64, f64)], s: f64, seed: u64) -> Result<Condensed> {
    if s <= 2.0 {
        return Err(Error::Domain(format!("sparsity s must exceed 2, got {s}")));
    }
    let epsilon = condensation_epsilon(s);
    let lower = rwmd_lower_bound(a, b);
    let total = (a.len() + b.len()) as f64;
    let delta = if lower > 0.0 {
        2.0 * epsilon * lower / (std::f64::consts::SQRT_2 * total)
    } else {
        0.0
    };
    if delta <= 0.0 {
        return Ok(Condensed {
            a_nodes: zero_condense(a),
            b_nodes: zero_condense(b),
            delta: 0.0,
            epsilon,
        });
    }

    let pitch = GRID_FRACTION * delta;
    let cell = |&(x, y): &(f64, f64)| -> (i64, i64) {
        ((x / pitch).round() as i64, (y / pitch).round() as i64)
    };
    let mut a_cells: HashMap<(i64, i64), i64> = HashMap::new();
    for p in a {
        *a_cells.entry(cell(p)).or_insert(0) += 1;
    }
    let mut b_cells: HashMap<(i64, i64), i64> = HashMap::new();
    for p in b {
        *b_cells.entry(cell(p)).or_insert(0) += 1;
    }

    // one offset per occupied lattice point of the union, in sorted order
    let mut occupied: Vec<(i64, i64)> = a_cells.keys().chain(b_cells.keys()).copied().collect();
    occupied.sort_unstable();
    occupied.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = 0.01 * (delta / 2.0);
    let shift = Uniform::new_inclusive(-radius, radius);
    let mut positions: HashMap<(i64, i64), P2> = HashMap::with_capacity(occupied.len());
    for key in occupied {
        let dx = shift.sample(&mut rng);
        let dy = shift.sample(&mut rng);
        positions.insert(
            key,
            P2::new(key.0 as f64 * pitch + dx, key.1 as f64 * pitch + dy),
        );
    }

    let collect = |cells: &HashMap<(i64, i64), i64>| -> Vec<SupplyNode> {
        let mut keys: Vec<(i64, i64)> = cells.keys().copied().collect();
        keys.sort_unstable();
        keys.into_iter()
            .map(|k| SupplyNode {
                point: positions[&k],
                mass: cells[&k],
            })
            .collect()
    };
    Ok(Condensed {
        a_nodes: collect(&a_cells),
        b_nodes: collect(&b_cells),
        delta,
        epsilon,
    })
}

/// Points of the condensed union with their canonical network references;
/// co-located A/B twins collapse to the A node and are returned separately.
struct UnionPoints {
    points: Vec<P2>,
    refs: Vec<PlaneRef>,
    twins: Vec<(u32, u32)>,
}

fn union_points(cond: &Condensed) -> UnionPoints {
    let mut index: HashMap<(u64, u64), usize> = HashMap::new();
    let mut points = Vec::new();
    let mut refs = Vec::new();
    let mut twins = Vec::new();
    for (i, node) in cond.a_nodes.iter().enumerate() {
        let key = (node.point.x.to_bits(), node.point.y.to_bits());
        index.insert(key, points.len());
        points.push(node.point);
        refs.push(PlaneRef {
            side: 0,
            idx: i as u32,
        });
    }
    for (j, node) in cond.b_nodes.iter().enumerate() {
        let key = (node.point.x.to_bits(), node.point.y.to_bits());
        match index.get(&key) {
            Some(&slot) => {
                debug_assert_eq!(refs[slot].side, 0);
                twins.push((refs[slot].idx, j as u32));
            }
            None => {
                index.insert(key, points.len());
                points.push(node.point);
                refs.push(PlaneRef {
                    side: 1,
                    idx: j as u32,
                });
            }
        }
    }
    UnionPoints {
        points,
        refs,
        twins,
    }
}

/// Builds the s-WSPD spanner over a distinct point set and returns the tree
/// together with its well-separated pairs.
pub fn build_wspd_spanner(points: &[P2], s: f64) -> (SplitTree, Vec<WspdPair>) {
    let tree = SplitTree::build(points);
    let pairs = build_wspd(&tree, s);
    (tree, pairs)
}

/// Assembles the sparsified transshipment network: spanner biarcs between
/// pair representatives, zero-cost biarcs between co-located A/B twins, and
/// the diagonal arcs.
pub fn build_transshipment_network(
    cond: &Condensed,
    s: f64,
) -> Result<(TransshipmentNetwork, usize)> {
    let union = union_points(cond);
    let builder = NetworkBuilder {
        a_nodes: &cond.a_nodes,
        b_nodes: &cond.b_nodes,
    };
    let mut plane_arcs: Vec<(PlaneRef, PlaneRef, f64)> = Vec::new();
    let mut wspd_pairs = 0usize;
    if union.points.len() >= 2 {
        let (tree, pairs) = build_wspd_spanner(&union.points, s);
        wspd_pairs = pairs.len();
        // permuted spanner indices translate back through the tree's
        // position map: position_of[original] = permuted
        let mut back = vec![0u32; union.points.len()];
        for (orig, &pos) in tree.position_of.iter().enumerate() {
            back[pos as usize] = orig as u32;
        }
        for (pa, pb, cost) in spanner_arcs(&tree, &pairs) {
            let ra = union.refs[back[pa as usize] as usize];
            let rb = union.refs[back[pb as usize] as usize];
            plane_arcs.push((ra, rb, cost));
        }
    }
    for &(ai, bi) in &union.twins {
        plane_arcs.push((
            PlaneRef { side: 0, idx: ai },
            PlaneRef { side: 1, idx: bi },
            0.0,
        ));
    }
    let net = builder.build(&plane_arcs)?;
    Ok((net, wspd_pairs))
}

#[derive(Debug, Clone, Copy)]
pub struct ApproxReport {
    pub value: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub nodes: usize,
    pub arcs: usize,
    pub wspd_pairs: usize,
    pub pivots: u64,
    pub optimal: bool,
}

/// The approximation pipeline: delta-condensation, WSPD spanner, diagonal
/// arcs, network simplex. Deterministic for a fixed seed.
pub fn approx_w1(a: &[(f64, f64)], b: &[(f64, f64)], s: f64, seed: u64) -> Result<ApproxReport> {
    let cond = delta_condense(a, b, s, seed)?;
    let (net, wspd_pairs) = build_transshipment_network(&cond, s)?;
    let flow = network_simplex_mcf(&net, &SolveOptions::default())?;
    Ok(ApproxReport {
        value: flow.value,
        delta: cond.delta,
        epsilon: cond.epsilon,
        nodes: net.n_nodes,
        arcs: net.n_arcs(),
        wspd_pairs,
        pivots: flow.pivots,
        optimal: flow.optimal,
    })
}

/// Combined relative error bound of the pipeline at sparsity `s`:
/// `(1 + 4/s + 4/(s-2)) * (1 + eps_condensation) - 1`, with the
/// condensation term loose at 1 below `s = 12`.
pub fn theoretical_error_bound(s: f64) -> Result<f64> {
    if s <= 2.0 {
        return Err(Error::Domain(format!("sparsity s must exceed 2, got {s}")));
    }
    let spanner = 1.0 + 4.0 / s + 4.0 / (s - 2.0);
    Ok(spanner * (1.0 + condensation_epsilon(s)) - 1.0)
}

/// Spanner-only stretch bound `1 + 4/s + 4/(s-2)` (leftmost
/// representatives).
pub fn spanner_stretch_bound(s: f64) -> f64 {
    1.0 + 4.0 / s + 4.0 / (s - 2.0)
}
