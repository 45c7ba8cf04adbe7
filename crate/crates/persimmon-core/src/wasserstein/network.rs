//! Transshipment networks for diagram transport: plane nodes with integer
//! supplies, two diagonal super-nodes, and directed arcs in a compressed
//! adjacency sorted by (tail, head).

use crate::error::{Error, Result};

use super::kdtree::P2;

/// Index of a network node; diagonal super-nodes come after the plane nodes.
pub type NodeId = u32;

#[derive(Debug, Clone)]
pub struct TransshipmentNetwork {
    /// positive = source, negative = sink; sums to zero
    pub supplies: Vec<i64>,
    /// compressed adjacency: arcs sorted by (tail, head)
    pub first_out: Vec<u32>,
    pub tails: Vec<NodeId>,
    pub heads: Vec<NodeId>,
    pub costs: Vec<f64>,
    /// node count including the two diagonal super-nodes
    pub n_nodes: usize,
}

impl TransshipmentNetwork {
    pub fn n_arcs(&self) -> usize {
        self.heads.len()
    }
}

/// A supply-weighted plane node on one side of the transport problem.
#[derive(Debug, Clone, Copy)]
pub struct SupplyNode {
    pub point: P2,
    /// multiplicity of diagram points condensed into this node (> 0)
    pub mass: i64,
}

fn diagonal_distance(p: &P2) -> f64 {
    (p.y - p.x).abs() / std::f64::consts::SQRT_2
}

/// Assembles the network from per-side nodes and a set of plane arcs.
///
/// Node layout: A-side nodes, then B-side nodes, then `b_bar` (diagonal
/// source) and `a_bar` (diagonal sink). Every A node gets an arc to `a_bar`
/// at its diagonal distance, `b_bar` gets an arc to every B node, and
/// `b_bar -> a_bar` costs zero. `plane_arcs` connect plane nodes by their
/// (side-local) indices: `(side, idx)` with side 0 = A, 1 = B.
pub struct NetworkBuilder<'a> {
    pub a_nodes: &'a [SupplyNode],
    pub b_nodes: &'a [SupplyNode],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlaneRef {
    pub side: u8,
    pub idx: u32,
}

impl NetworkBuilder<'_> {
    pub fn node_id(&self, r: PlaneRef) -> NodeId {
        match r.side {
            0 => r.idx,
            _ => self.a_nodes.len() as u32 + r.idx,
        }
    }

    pub fn b_bar(&self) -> NodeId {
        (self.a_nodes.len() + self.b_nodes.len()) as u32
    }

    pub fn a_bar(&self) -> NodeId {
        self.b_bar() + 1
    }

    /// `plane_arcs` are emitted as biarcs (both directions).
    pub fn build(&self, plane_arcs: &[(PlaneRef, PlaneRef, f64)]) -> Result<TransshipmentNetwork> {
        let na = self.a_nodes.len();
        let nb = self.b_nodes.len();
        let n_nodes = na + nb + 2;
        let mut supplies = vec![0i64; n_nodes];
        let mut total_a = 0i64;
        let mut total_b = 0i64;
        for (i, node) in self.a_nodes.iter().enumerate() {
            supplies[i] = node.mass;
            total_a += node.mass;
        }
        for (i, node) in self.b_nodes.iter().enumerate() {
            supplies[na + i] = -node.mass;
            total_b += node.mass;
        }
        supplies[self.b_bar() as usize] = total_b;
        supplies[self.a_bar() as usize] = -total_a;
        let sum: i64 = supplies.iter().sum();
        if sum != 0 {
            return Err(Error::Infeasible(format!(
                "supplies sum to {sum}, expected 0"
            )));
        }

        let mut arcs: Vec<(NodeId, NodeId, f64)> =
            Vec::with_capacity(2 * plane_arcs.len() + na + nb + 1);
        for &(u, v, cost) in plane_arcs {
            let (ui, vi) = (self.node_id(u), self.node_id(v));
            arcs.push((ui, vi, cost));
            arcs.push((vi, ui, cost));
        }
        for (i, node) in self.a_nodes.iter().enumerate() {
            arcs.push((i as NodeId, self.a_bar(), diagonal_distance(&node.point)));
        }
        for (i, node) in self.b_nodes.iter().enumerate() {
            arcs.push((
                self.b_bar(),
                (na + i) as NodeId,
                diagonal_distance(&node.point),
            ));
        }
        arcs.push((self.b_bar(), self.a_bar(), 0.0));

        arcs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        arcs.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1 && a.2 == b.2);

        let mut first_out = vec![0u32; n_nodes + 1];
        let mut tails = Vec::with_capacity(arcs.len());
        let mut heads = Vec::with_capacity(arcs.len());
        let mut costs = Vec::with_capacity(arcs.len());
        for &(t, h, c) in &arcs {
            first_out[t as usize + 1] += 1;
            tails.push(t);
            heads.push(h);
            costs.push(c);
        }
        for i in 0..n_nodes {
            first_out[i + 1] += first_out[i];
        }
        Ok(TransshipmentNetwork {
            supplies,
            first_out,
            tails,
            heads,
            costs,
            n_nodes,
        })
    }

    /// Complete bipartite plane arcs A x B.
    pub fn full_bipartite_arcs(&self) -> Vec<(PlaneRef, PlaneRef, f64)> {
        let mut arcs = Vec::with_capacity(self.a_nodes.len() * self.b_nodes.len());
        for (i, a) in self.a_nodes.iter().enumerate() {
            for (j, b) in self.b_nodes.iter().enumerate() {
                arcs.push((
                    PlaneRef {
                        side: 0,
                        idx: i as u32,
                    },
                    PlaneRef {
                        side: 1,
                        idx: j as u32,
                    },
                    a.point.dist(&b.point),
                ));
            }
        }
        arcs
    }
}
