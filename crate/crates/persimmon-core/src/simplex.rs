//! Simplices encoded as integers via the combinatorial number system.
//!
//! A `p`-simplex with vertices `v_p > v_{p-1} > ... > v_0 >= 0` is identified
//! with the index `C(v_p, p+1) + ... + C(v_0, 1)`, which enumerates all
//! `(p+1)`-subsets of the vertex set without gaps. Cofacets and facets are
//! generated by incremental index arithmetic, never by re-encoding from
//! scratch.

use crate::error::{Error, Result};
use crate::metric::DistanceInput;

/// Precomputed binomial coefficients `C(n, k)` for `0 <= n <= n_max`,
/// `0 <= k <= k_max`, stored exactly in `u64`.
///
/// Construction fails if any required entry overflows 64 bits, so downstream
/// index arithmetic can assume exactness.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    n_max: usize,
    k_max: usize,
    table: Vec<u64>,
}

impl BinomialTable {
    pub fn new(n_max: usize, k_max: usize) -> Result<Self> {
        let mut table = vec![0u64; (n_max + 1) * (k_max + 1)];
        for n in 0..=n_max {
            for k in 0..=k_max.min(n) {
                let v = if k == 0 || k == n {
                    1
                } else {
                    let above = table[(n - 1) * (k_max + 1) + k - 1];
                    let left = table[(n - 1) * (k_max + 1) + k];
                    above
                        .checked_add(left)
                        .ok_or_else(|| Error::Capacity(format!("C({n}, {k}) overflows 64 bits")))?
                };
                table[n * (k_max + 1) + k] = v;
            }
        }
        Ok(BinomialTable {
            n_max,
            k_max,
            table,
        })
    }

    #[inline]
    pub fn binom(&self, n: usize, k: usize) -> u64 {
        debug_assert!(
            n <= self.n_max && k <= self.k_max,
            "C({n},{k}) outside table"
        );
        if k > n {
            0
        } else {
            self.table[n * (self.k_max + 1) + k]
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }
}

/// A simplex as carried through filtration construction and reduction:
/// its diameter, combinatorial index and dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexEntry {
    pub diam: f64,
    pub cidx: u64,
    pub dim: u32,
}

impl SimplexEntry {
    pub fn new(diam: f64, cidx: u64, dim: u32) -> Self {
        SimplexEntry { diam, cidx, dim }
    }
}

/// Encodes a strictly decreasing vertex tuple `(v_d, ..., v_0)`.
pub fn cidx_encode(vertices: &[usize], tbl: &BinomialTable) -> Result<u64> {
    let d = vertices.len();
    let mut idx = 0u64;
    for (i, &v) in vertices.iter().enumerate() {
        if i + 1 < d && vertices[i + 1] >= v {
            return Err(Error::InvalidSimplex(format!(
                "vertex tuple {vertices:?} is not strictly decreasing"
            )));
        }
        idx += tbl.binom(v, d - i);
    }
    Ok(idx)
}

/// Decodes a combinatorial index into its strictly decreasing vertex tuple.
///
/// Each vertex is the largest `v` with `C(v, k) <= remaining`, found by binary
/// search on the binomial column.
pub fn cidx_decode(index: u64, dim: u32, tbl: &BinomialTable) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(dim as usize + 1);
    cidx_decode_into(index, dim, tbl, &mut out)?;
    Ok(out)
}

pub fn cidx_decode_into(
    index: u64,
    dim: u32,
    tbl: &BinomialTable,
    out: &mut Vec<usize>,
) -> Result<()> {
    if index >= tbl.binom(tbl.n_max(), dim as usize + 1) {
        return Err(Error::InvalidIndex(format!(
            "index {index} out of range for dimension {dim} on {} points",
            tbl.n_max()
        )));
    }
    out.clear();
    let mut remaining = index;
    let mut upper = tbl.n_max();
    for k in (1..=dim as usize + 1).rev() {
        let v = largest_vertex(tbl, remaining, k, upper);
        out.push(v);
        remaining -= tbl.binom(v, k);
        upper = v;
    }
    debug_assert_eq!(remaining, 0);
    Ok(())
}

/// Largest `v < upper_exclusive` with `C(v, k) <= target`.
fn largest_vertex(tbl: &BinomialTable, target: u64, k: usize, upper_exclusive: usize) -> usize {
    let mut lo = k - 1; // C(k-1, k) = 0 <= target always holds
    let mut hi = upper_exclusive; // exclusive
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tbl.binom(mid, k) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Maximum pairwise distance over a vertex set; 0 for a single vertex and
/// `+inf` when a sparse input lacks one of the pairs.
pub fn simplex_diameter(vertices: &[usize], dist: &DistanceInput) -> f64 {
    let mut diam: f64 = 0.0;
    for (i, &u) in vertices.iter().enumerate() {
        for &v in &vertices[i + 1..] {
            diam = diam.max(dist.distance(u, v));
        }
    }
    diam
}

/// Enumerates the `(dim+1)`-cofacets of a simplex in strictly decreasing
/// combinatorial-index order, maintaining the index incrementally as
/// candidate vertices sweep downward past the simplex's own vertices.
pub struct DenseCofacets<'a> {
    tbl: &'a BinomialTable,
    dist: &'a DistanceInput,
    vertices: &'a [usize],
    diam: f64,
    idx_below: u64,
    idx_above: u64,
    k: usize,
    // candidate new vertex, walking n-1 ... 0; None when exhausted
    v: Option<usize>,
}

pub fn enumerate_cofacets_dense<'a>(
    simplex: &SimplexEntry,
    vertices: &'a [usize],
    n: usize,
    dist: &'a DistanceInput,
    tbl: &'a BinomialTable,
) -> DenseCofacets<'a> {
    DenseCofacets {
        tbl,
        dist,
        vertices,
        diam: simplex.diam,
        idx_below: simplex.cidx,
        idx_above: 0,
        k: vertices.len(),
        v: n.checked_sub(1),
    }
}

impl Iterator for DenseCofacets<'_> {
    type Item = SimplexEntry;

    fn next(&mut self) -> Option<SimplexEntry> {
        let mut v = self.v?;
        // Fold simplex vertices >= v into the "above" part of the index. A
        // candidate v equals the largest remaining simplex vertex exactly
        // when C(v, k) <= idx_below.
        while self.k > 0 && self.tbl.binom(v, self.k) <= self.idx_below {
            self.idx_below -= self.tbl.binom(v, self.k);
            self.idx_above += self.tbl.binom(v, self.k + 1);
            self.k -= 1;
            match v.checked_sub(1) {
                Some(nv) => v = nv,
                None => {
                    self.v = None;
                    return None;
                }
            }
        }
        let cidx = self.idx_above + self.tbl.binom(v, self.k + 1) + self.idx_below;
        let mut diam = self.diam;
        for &w in self.vertices {
            diam = diam.max(self.dist.distance(v, w));
        }
        self.v = v.checked_sub(1);
        Some(SimplexEntry::new(diam, cidx, self.vertices.len() as u32))
    }
}

/// Cofacet enumeration over a sparse 1-skeleton: new vertices are drawn from
/// the intersection of the neighbor lists of the simplex's vertices, walked
/// in decreasing order.
pub fn enumerate_cofacets_sparse(
    simplex: &SimplexEntry,
    vertices: &[usize],
    dist: &DistanceInput,
    tbl: &BinomialTable,
) -> Vec<SimplexEntry> {
    let lists: Vec<&[(u32, f64)]> = vertices.iter().map(|&v| dist.neighbors(v)).collect();
    let mut cursors: Vec<usize> = lists.iter().map(|l| l.len()).collect();

    let mut out = Vec::new();
    let mut idx_below = simplex.cidx;
    let mut idx_above = 0u64;
    let mut k = vertices.len();
    let mut vert_ptr = 0usize; // next simplex vertex to fold (descending order)

    'candidates: loop {
        // Advance every cursor past entries greater than the current best
        // common candidate; the candidate is the max head of list 0.
        let head = loop {
            if cursors[0] == 0 {
                break 'candidates;
            }
            let cand = lists[0][cursors[0] - 1].0;
            let mut ok = true;
            for (li, list) in lists.iter().enumerate().skip(1) {
                while cursors[li] > 0 && list[cursors[li] - 1].0 > cand {
                    cursors[li] -= 1;
                }
                if cursors[li] == 0 {
                    break 'candidates;
                }
                if list[cursors[li] - 1].0 < cand {
                    // cand missing from this list; skip it
                    cursors[0] -= 1;
                    ok = false;
                    break;
                }
            }
            if ok {
                break cand as usize;
            }
        };

        // head is a common neighbor of every vertex of the simplex.
        while vert_ptr < vertices.len() && vertices[vert_ptr] > head {
            let w = vertices[vert_ptr];
            idx_below -= tbl.binom(w, k);
            idx_above += tbl.binom(w, k + 1);
            k -= 1;
            vert_ptr += 1;
        }
        debug_assert!(vert_ptr >= vertices.len() || vertices[vert_ptr] != head);
        let cidx = idx_above + tbl.binom(head, k + 1) + idx_below;
        let mut diam = simplex.diam;
        for (li, list) in lists.iter().enumerate() {
            diam = diam.max(list[cursors[li] - 1].1);
        }
        out.push(SimplexEntry::new(diam, cidx, vertices.len() as u32));
        for c in cursors.iter_mut() {
            *c -= 1;
        }
    }
    out
}

/// Enumerates the facets of a simplex in strictly increasing
/// combinatorial-index order by removing vertices from largest to smallest,
/// updating the index incrementally.
///
/// A 0-simplex has no facets.
pub fn enumerate_facets(
    simplex: &SimplexEntry,
    vertices: &[usize],
    dist: &DistanceInput,
    tbl: &BinomialTable,
) -> Vec<SimplexEntry> {
    let d = vertices.len();
    if d <= 1 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(d);
    let mut cidx = simplex.cidx;
    let mut prev: Option<usize> = None;
    let mut k = d;
    for (m, &v) in vertices.iter().enumerate() {
        cidx -= tbl.binom(v, k);
        if let Some(p) = prev {
            cidx += tbl.binom(p, k);
        }
        let diam = facet_diameter(vertices, m, dist);
        out.push(SimplexEntry::new(diam, cidx, (d - 2) as u32));
        prev = Some(v);
        k -= 1;
    }
    out
}

fn facet_diameter(vertices: &[usize], removed: usize, dist: &DistanceInput) -> f64 {
    let mut diam: f64 = 0.0;
    for i in 0..vertices.len() {
        if i == removed {
            continue;
        }
        for j in i + 1..vertices.len() {
            if j == removed {
                continue;
            }
            diam = diam.max(dist.distance(vertices[i], vertices[j]));
        }
    }
    diam
}
