//! Simplex-wise filtration order and construction of the sorted, cleared,
//! threshold-filtered column list for one dimension.

use std::cmp::Ordering;
use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::Result;
use crate::metric::DistanceInput;
use crate::simplex::{BinomialTable, SimplexEntry};

/// Total order of the simplex-wise filtration: diameter ascending, then
/// dimension ascending, then combinatorial index descending.
pub fn filtration_compare(a: &SimplexEntry, b: &SimplexEntry) -> Ordering {
    a.diam
        .total_cmp(&b.diam)
        .then(a.dim.cmp(&b.dim))
        .then(b.cidx.cmp(&a.cidx))
}

/// Column order of the coboundary matrix: the exact reverse of
/// [`filtration_compare`] restricted to one dimension, i.e. diameter
/// descending with combinatorial index ascending.
pub fn coboundary_compare(a: &SimplexEntry, b: &SimplexEntry) -> Ordering {
    b.diam.total_cmp(&a.diam).then(a.cidx.cmp(&b.cidx))
}

/// The columns to reduce for one dimension, sorted in coboundary order.
#[derive(Debug, Clone)]
pub struct ColumnList {
    pub dim: u32,
    pub entries: Vec<SimplexEntry>,
}

/// Enumerates all `dim`-simplices with diameter at most `threshold`, drops
/// the cleared indices, and sorts the rest into coboundary order.
///
/// `cleared` holds the combinatorial indices paired away by the previous
/// dimension. Dense inputs materialize all `C(n, dim+1)` candidates; sparse
/// inputs grow cliques along neighbor lists and never see simplices with an
/// infinite pair.
pub fn build_reduction_columns(
    dist: &DistanceInput,
    dim: u32,
    threshold: f64,
    cleared: &HashSet<u64>,
    tbl: &BinomialTable,
) -> Result<ColumnList> {
    let mut entries = if dist.is_sparse() {
        enumerate_sparse(dist, dim, threshold, tbl)
    } else {
        enumerate_dense(dist, dim, threshold, tbl)
    };
    if !cleared.is_empty() {
        entries.retain(|e| !cleared.contains(&e.cidx));
    }
    entries.par_sort_unstable_by(coboundary_compare);
    Ok(ColumnList { dim, entries })
}

fn enumerate_dense(
    dist: &DistanceInput,
    dim: u32,
    threshold: f64,
    tbl: &BinomialTable,
) -> Vec<SimplexEntry> {
    let n = dist.n();
    let k = dim as usize + 1;
    if n < k {
        return Vec::new();
    }
    let total = tbl.binom(n, k);

    // Data-parallel over contiguous cidx ranges; chunk results concatenate in
    // index order, so the outcome is independent of the worker count.
    let chunk = 1usize << 14;
    let n_chunks = (total as usize).div_ceil(chunk);
    (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let start = (ci * chunk) as u64;
            let end = total.min(start + chunk as u64);
            let mut verts =
                crate::simplex::cidx_decode(start, dim, tbl).expect("start index in range");
            let mut out = Vec::new();
            let mut idx = start;
            loop {
                let diam = diameter_of(&verts, dist);
                if diam <= threshold {
                    out.push(SimplexEntry::new(diam, idx, dim));
                }
                idx += 1;
                if idx >= end || !next_combination(&mut verts) {
                    break;
                }
            }
            out
        })
        .reduce(Vec::new, |mut a, mut b| {
            a.append(&mut b);
            a
        })
}

#[inline]
fn diameter_of(verts: &[usize], dist: &DistanceInput) -> f64 {
    match verts.len() {
        1 => 0.0,
        2 => dist.distance(verts[0], verts[1]),
        _ => crate::simplex::simplex_diameter(verts, dist),
    }
}

/// Advances a strictly decreasing vertex tuple to the next combinatorial
/// index. Returns false when the enumeration is exhausted (caller bounds the
/// range).
fn next_combination(verts: &mut [usize]) -> bool {
    let d = verts.len();
    // i counts positions from the low end: verts[d-1-i] carries C(., i+1)
    for i in 0..d {
        let pos = d - 1 - i;
        let can_grow = pos == 0 || verts[pos] + 1 < verts[pos - 1];
        if can_grow {
            verts[pos] += 1;
            for j in 0..i {
                verts[d - 1 - j] = j;
            }
            return true;
        }
    }
    false
}

fn enumerate_sparse(
    dist: &DistanceInput,
    dim: u32,
    threshold: f64,
    tbl: &BinomialTable,
) -> Vec<SimplexEntry> {
    let n = dist.n();
    let k = dim as usize + 1;
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::with_capacity(k);
    // Build cliques top-down: vertices strictly decreasing, every new vertex
    // a neighbor of all chosen ones within the threshold.
    for v in (0..n).rev() {
        stack.push(v);
        grow_clique(dist, threshold, k, &mut stack, 0.0, &mut out, tbl);
        stack.pop();
    }
    out
}

fn grow_clique(
    dist: &DistanceInput,
    threshold: f64,
    k: usize,
    stack: &mut Vec<usize>,
    diam: f64,
    out: &mut Vec<SimplexEntry>,
    tbl: &BinomialTable,
) {
    if stack.len() == k {
        let cidx = crate::simplex::cidx_encode(stack, tbl).expect("stack strictly decreasing");
        out.push(SimplexEntry::new(diam, cidx, (k - 1) as u32));
        return;
    }
    let last = *stack.last().unwrap();
    for &(u, _) in dist.neighbors(last) {
        let u = u as usize;
        if u >= last {
            break;
        }
        let mut d = diam;
        let mut ok = true;
        for &w in stack.iter() {
            let duw = dist.distance(u, w);
            if duw > threshold {
                ok = false;
                break;
            }
            d = d.max(duw);
        }
        if ok {
            stack.push(u);
            grow_clique(dist, threshold, k, stack, d, out, tbl);
            stack.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{load_metric_input, InputFormat};

    fn square() -> DistanceInput {
        load_metric_input(
            "1\n1.4142135 1\n1 1.4142135 1\n",
            InputFormat::LowerDistance,
        )
        .unwrap()
    }

    #[test]
    fn compare_follows_the_simplexwise_order() {
        let v = SimplexEntry::new(1.0, 3, 0);
        let e = SimplexEntry::new(1.0, 3, 1);
        assert_eq!(filtration_compare(&v, &e), Ordering::Less);

        let a = SimplexEntry::new(1.0, 3, 1);
        let b = SimplexEntry::new(1.0, 5, 1);
        assert_eq!(filtration_compare(&b, &a), Ordering::Less);

        let c = SimplexEntry::new(1.0, 0, 2);
        let d = SimplexEntry::new(2.0, 0, 0);
        assert_eq!(filtration_compare(&c, &d), Ordering::Less);
    }

    #[test]
    #[allow(clippy::approx_constant)] // threshold mirrors the text fixture
    fn square_edge_columns() {
        let dist = square();
        let tbl = BinomialTable::new(4, 3).unwrap();
        let cols = build_reduction_columns(&dist, 1, 1.4142135, &HashSet::new(), &tbl).unwrap();
        let idxs: Vec<u64> = cols.entries.iter().map(|e| e.cidx).collect();
        // two diagonal edges first (cidx ascending), then the four sides
        assert_eq!(idxs, vec![1, 4, 0, 2, 3, 5]);
    }

    #[test]
    fn threshold_below_minimum_gives_empty() {
        let dist = square();
        let tbl = BinomialTable::new(4, 3).unwrap();
        let cols = build_reduction_columns(&dist, 1, 0.5, &HashSet::new(), &tbl).unwrap();
        assert!(cols.entries.is_empty());
    }

    #[test]
    fn clearing_everything_gives_empty() {
        let dist = square();
        let tbl = BinomialTable::new(4, 3).unwrap();
        let cleared: HashSet<u64> = (0..6).collect();
        let cols = build_reduction_columns(&dist, 1, 2.0, &cleared, &tbl).unwrap();
        assert!(cols.entries.is_empty());
    }

    #[test]
    fn reverse_filtration_order_holds_globally() {
        let dist = square();
        let tbl = BinomialTable::new(4, 3).unwrap();
        for dim in 1..=2u32 {
            let cols =
                build_reduction_columns(&dist, dim, f64::INFINITY, &HashSet::new(), &tbl).unwrap();
            for w in cols.entries.windows(2) {
                assert_eq!(
                    filtration_compare(&w[1], &w[0]),
                    Ordering::Less,
                    "later column must be filtration-older"
                );
            }
        }
    }

    #[test]
    fn sparse_enumeration_matches_dense() {
        use rand::{Rng, SeedableRng};
        for seed in 0..20u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(3..9usize);
            let data: Vec<f64> = (0..n * (n - 1) / 2)
                .map(|_| rng.gen_range(0.1..2.0))
                .collect();
            let dense = DistanceInput::from_lower_triangular(n, data).unwrap();
            let t = rng.gen_range(0.5..2.0);
            let sparse = dense.sparsify_by_threshold(t);
            let tbl = BinomialTable::new(n, 5).unwrap();
            for dim in 1..=2u32 {
                let a = build_reduction_columns(&dense, dim, t, &HashSet::new(), &tbl).unwrap();
                let b = build_reduction_columns(&sparse, dim, t, &HashSet::new(), &tbl).unwrap();
                assert_eq!(a.entries.len(), b.entries.len(), "seed {seed} dim {dim}");
                for (x, y) in a.entries.iter().zip(b.entries.iter()) {
                    assert_eq!(x.cidx, y.cidx);
                    assert_eq!(x.diam.to_bits(), y.diam.to_bits());
                }
            }
        }
    }
}
