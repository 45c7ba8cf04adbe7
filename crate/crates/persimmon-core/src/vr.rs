//! Implicit Vietoris-Rips persistence: dimension 0 by union-find, higher
//! dimensions by an apparent-pair scan followed by submatrix reduction of
//! the remaining coboundary columns.
//!
//! Columns are processed in coboundary order (diameter descending, index
//! ascending). The pivot of a column is its filtration-oldest cofacet:
//! minimal diameter, ties broken toward the larger combinatorial index.

use std::collections::{BinaryHeap, HashMap, HashSet};

use rayon::prelude::*;

use crate::diagram::PersistenceDiagram;
use crate::error::{Error, Result};
use crate::filtration::{
    build_reduction_columns, coboundary_compare, filtration_compare, ColumnList,
};
use crate::metric::DistanceInput;
use crate::simplex::{
    cidx_decode_into, enumerate_cofacets_dense, enumerate_cofacets_sparse, enumerate_facets,
    BinomialTable, SimplexEntry,
};

/// A persistence pair in simplex terms; `death` is absent for essential
/// classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub birth: SimplexEntry,
    pub death: Option<SimplexEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionMode {
    /// Re-derive previously reduced columns from their raw coboundaries.
    Oblivious,
    /// Keep the list of column indices summed into each reduced column and
    /// replay it on demand.
    VMatrix,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DimCounters {
    pub dim: u32,
    pub columns: usize,
    pub apparent: usize,
    pub emergent_shortcut: usize,
    pub reduced_pairs: usize,
    pub essential: usize,
    pub additions: usize,
}

#[derive(Debug, Clone)]
pub struct Barcode {
    pub diagrams: Vec<PersistenceDiagram>,
    /// all pairs per dimension, including zero persistence
    pub pairs: Vec<Vec<PersistencePair>>,
    pub counters: Vec<DimCounters>,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct VrOptions {
    pub max_dim: u32,
    pub threshold: Option<f64>,
    pub mode: ReductionMode,
    pub include_zero: bool,
}

impl Default for VrOptions {
    fn default() -> Self {
        VrOptions {
            max_dim: 1,
            threshold: None,
            mode: ReductionMode::Oblivious,
            include_zero: false,
        }
    }
}

// ---------------------------------------------------------------------------
// dimension 0

pub struct ZeroDimResult {
    pub pairs: Vec<PersistencePair>,
    /// edges that close a cycle; they seed dimension 1
    pub complementary: Vec<SimplexEntry>,
    pub edge_count: usize,
}

struct UnionFind {
    parent: Vec<u32>,
    /// oldest vertex of each class: the largest index, which enters the
    /// simplex-wise filtration first
    oldest: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            oldest: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            self.parent[x as usize] = self.parent[self.parent[x as usize] as usize];
            x = self.parent[x as usize];
        }
        x
    }
}

/// Kruskal-style sweep in filtration order. An edge merging two components
/// kills the younger one (elder rule); edges closing a cycle come back as
/// complementary edges.
pub fn zero_dim_persistence(
    dist: &DistanceInput,
    threshold: f64,
    tbl: &BinomialTable,
) -> ZeroDimResult {
    let n = dist.n();
    let mut edges: Vec<SimplexEntry> = Vec::new();
    match dist {
        DistanceInput::Dense(_) => {
            for v in 1..n {
                let base = tbl.binom(v, 2);
                for u in 0..v {
                    let d = dist.distance(v, u);
                    if d <= threshold {
                        edges.push(SimplexEntry::new(d, base + u as u64, 1));
                    }
                }
            }
        }
        DistanceInput::Sparse(_) => {
            for v in 1..n {
                let base = tbl.binom(v, 2);
                for &(u, d) in dist.neighbors(v) {
                    if (u as usize) < v && d <= threshold {
                        edges.push(SimplexEntry::new(d, base + u as u64, 1));
                    }
                }
            }
        }
    }
    edges.par_sort_unstable_by(filtration_compare);

    let mut uf = UnionFind::new(n);
    let mut pairs = Vec::new();
    let mut complementary = Vec::new();
    let edge_count = edges.len();
    let mut vbuf = Vec::with_capacity(2);
    for e in edges {
        cidx_decode_into(e.cidx, 1, tbl, &mut vbuf).expect("edge index in range");
        let (v, u) = (vbuf[0] as u32, vbuf[1] as u32);
        let (ru, rv) = (uf.find(u), uf.find(v));
        if ru == rv {
            complementary.push(e);
            continue;
        }
        let (keep, die) = if uf.oldest[ru as usize] > uf.oldest[rv as usize] {
            (ru, rv)
        } else {
            (rv, ru)
        };
        let dead_vertex = uf.oldest[die as usize];
        uf.parent[die as usize] = keep;
        pairs.push(PersistencePair {
            birth: SimplexEntry::new(0.0, dead_vertex as u64, 0),
            death: Some(e),
        });
    }
    for x in 0..n as u32 {
        if uf.find(x) == x {
            let root_vertex = uf.oldest[x as usize];
            pairs.push(PersistencePair {
                birth: SimplexEntry::new(0.0, root_vertex as u64, 0),
                death: None,
            });
        }
    }
    ZeroDimResult {
        pairs,
        complementary,
        edge_count,
    }
}

// ---------------------------------------------------------------------------
// pair store

/// Two-layer store for the persistence pairs of one dimension, keyed by the
/// death simplex (the coboundary pivot row). The apparent layer is a sorted
/// array; pairs found during submatrix reduction go to the overflow map.
/// Lookups check the overflow first, then binary-search the array.
#[derive(Debug, Default)]
pub struct PairStore {
    apparent: Vec<(u64, SimplexEntry)>,
    overflow: HashMap<u64, SimplexEntry>,
}

impl PairStore {
    pub fn from_apparent(pairs: &[(SimplexEntry, SimplexEntry)]) -> Self {
        let mut apparent: Vec<(u64, SimplexEntry)> =
            pairs.iter().map(|&(t, s)| (t.cidx, s)).collect();
        apparent.sort_unstable_by_key(|&(k, _)| k);
        PairStore {
            apparent,
            overflow: HashMap::new(),
        }
    }

    pub fn lookup(&self, death_cidx: u64) -> Option<SimplexEntry> {
        if let Some(&s) = self.overflow.get(&death_cidx) {
            return Some(s);
        }
        self.apparent
            .binary_search_by_key(&death_cidx, |&(k, _)| k)
            .ok()
            .map(|i| self.apparent[i].1)
    }

    pub fn insert_overflow(&mut self, death_cidx: u64, column: SimplexEntry) {
        let prev = self.overflow.insert(death_cidx, column);
        debug_assert!(prev.is_none(), "death simplex paired twice");
    }
}

// ---------------------------------------------------------------------------
// working column

#[derive(Debug, Clone, Copy)]
struct CoEntry {
    diam: f64,
    cidx: u64,
}

impl PartialEq for CoEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cidx == other.cidx && self.diam.to_bits() == other.diam.to_bits()
    }
}
impl Eq for CoEntry {}

impl Ord for CoEntry {
    // max-heap pops the filtration-oldest entry: smallest diameter, then
    // largest combinatorial index
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .diam
            .total_cmp(&self.diam)
            .then(self.cidx.cmp(&other.cidx))
    }
}
impl PartialOrd for CoEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Priority structure over coboundary entries with lazy Z2 cancellation:
/// pairs of equal entries annihilate as they are popped.
#[derive(Debug, Default)]
pub struct WorkingColumn {
    heap: BinaryHeap<CoEntry>,
}

impl WorkingColumn {
    fn push(&mut self, diam: f64, cidx: u64) {
        self.heap.push(CoEntry { diam, cidx });
    }

    fn pop_pivot(&mut self) -> Option<CoEntry> {
        while let Some(top) = self.heap.pop() {
            let mut count = 1usize;
            while let Some(peek) = self.heap.peek() {
                if peek.cidx == top.cidx {
                    self.heap.pop();
                    count += 1;
                } else {
                    break;
                }
            }
            if count % 2 == 1 {
                return Some(top);
            }
        }
        None
    }

    fn clear(&mut self) {
        self.heap.clear();
    }
}

// ---------------------------------------------------------------------------
// apparent pairs

struct DimContext<'a> {
    dist: &'a DistanceInput,
    tbl: &'a BinomialTable,
    threshold: f64,
    dim: u32,
}

enum Cofacets<'a> {
    Dense(crate::simplex::DenseCofacets<'a>),
    Sparse(std::vec::IntoIter<SimplexEntry>),
}

impl Iterator for Cofacets<'_> {
    type Item = SimplexEntry;

    fn next(&mut self) -> Option<SimplexEntry> {
        match self {
            Cofacets::Dense(it) => it.next(),
            Cofacets::Sparse(it) => it.next(),
        }
    }
}

impl DimContext<'_> {
    fn decode(&self, cidx: u64, dim: u32, buf: &mut Vec<usize>) {
        cidx_decode_into(cidx, dim, self.tbl, buf).expect("simplex index in range");
    }

    fn cofacets<'a>(&'a self, s: &SimplexEntry, verts: &'a [usize]) -> Cofacets<'a> {
        if self.dist.is_sparse() {
            Cofacets::Sparse(enumerate_cofacets_sparse(s, verts, self.dist, self.tbl).into_iter())
        } else {
            Cofacets::Dense(enumerate_cofacets_dense(
                s,
                verts,
                self.dist.n(),
                self.dist,
                self.tbl,
            ))
        }
    }
}

/// Checks one column for an apparent pair: take the lexicographically
/// greatest cofacet of equal diameter (the first such in decreasing
/// enumeration), then confirm the column is that cofacet's youngest facet.
fn apparent_cofacet(ctx: &DimContext, s: &SimplexEntry, verts: &[usize]) -> Option<SimplexEntry> {
    let t = ctx.cofacets(s, verts).find(|t| t.diam == s.diam)?;
    let mut tverts = Vec::with_capacity(verts.len() + 1);
    ctx.decode(t.cidx, s.dim + 1, &mut tverts);
    for f in enumerate_facets(&t, &tverts, ctx.dist, ctx.tbl) {
        if f.diam == s.diam {
            return if f.cidx == s.cidx { Some(t) } else { None };
        }
    }
    None
}

/// Scans every column independently for apparent pairs. Returns the pairs
/// as `(death cofacet, column)` sorted by cofacet index, plus the
/// nonapparent columns in their original coboundary order. Deterministic
/// regardless of worker count.
pub fn find_apparent_pairs(
    cols: &ColumnList,
    dist: &DistanceInput,
    tbl: &BinomialTable,
) -> (Vec<(SimplexEntry, SimplexEntry)>, Vec<SimplexEntry>) {
    let ctx = DimContext {
        dist,
        tbl,
        threshold: f64::INFINITY,
        dim: cols.dim,
    };
    let verdicts: Vec<Option<SimplexEntry>> = cols
        .entries
        .par_iter()
        .map_init(
            || Vec::with_capacity(cols.dim as usize + 1),
            |buf, s| {
                ctx.decode(s.cidx, s.dim, buf);
                apparent_cofacet(&ctx, s, buf)
            },
        )
        .collect();
    let mut apparent = Vec::new();
    let mut nonapparent = Vec::new();
    for (s, verdict) in cols.entries.iter().zip(verdicts) {
        match verdict {
            Some(t) => apparent.push((t, *s)),
            None => nonapparent.push(*s),
        }
    }
    apparent.sort_unstable_by_key(|&(t, _)| t.cidx);
    (apparent, nonapparent)
}

// ---------------------------------------------------------------------------
// submatrix reduction

pub enum ColumnOutcome {
    /// pivot row paired with this column, plus the column additions spent
    Paired {
        death: SimplexEntry,
        additions: usize,
        shortcut: bool,
    },
    /// column reduced to zero: an essential class
    Essential,
}

/// Reduces the nonapparent columns of one dimension in coboundary order
/// against a store seeded with the apparent pairs.
pub struct SubmatrixReducer<'a> {
    ctx: DimContext<'a>,
    pub store: PairStore,
    mode: ReductionMode,
    vstore: HashMap<u64, Vec<CoEntry>>,
    working: WorkingColumn,
    vworking: WorkingColumn,
    buf: Vec<usize>,
}

impl<'a> SubmatrixReducer<'a> {
    pub fn new(
        dist: &'a DistanceInput,
        tbl: &'a BinomialTable,
        threshold: f64,
        dim: u32,
        store: PairStore,
        mode: ReductionMode,
    ) -> Self {
        SubmatrixReducer {
            ctx: DimContext {
                dist,
                tbl,
                threshold,
                dim,
            },
            store,
            mode,
            vstore: HashMap::new(),
            working: WorkingColumn::default(),
            vworking: WorkingColumn::default(),
            buf: Vec::new(),
        }
    }

    fn push_coboundary(&mut self, of: &CoEntry) {
        let s = SimplexEntry::new(of.diam, of.cidx, self.ctx.dim);
        cidx_decode_into(s.cidx, s.dim, self.ctx.tbl, &mut self.buf)
            .expect("simplex index in range");
        let ctx = &self.ctx;
        let working = &mut self.working;
        for t in ctx.cofacets(&s, &self.buf) {
            if t.diam <= ctx.threshold {
                working.push(t.diam, t.cidx);
            }
        }
    }

    /// Adds the previously reduced column owning `pivot` into the working
    /// column; in V-matrix mode the stored summand list is replayed.
    fn add_reduced_column(&mut self, pivot: &CoEntry, owner: SimplexEntry) {
        // the popped pivot entry re-enters and cancels against the owner's
        // copy of the same row
        self.working.push(pivot.diam, pivot.cidx);
        let owner_entry = CoEntry {
            diam: owner.diam,
            cidx: owner.cidx,
        };
        match self.mode {
            ReductionMode::Oblivious => self.push_coboundary(&owner_entry),
            ReductionMode::VMatrix => {
                let summands = self.vstore.get(&owner.cidx).cloned();
                match summands {
                    None => {
                        // apparent or shortcut column: its reduced form is
                        // its raw coboundary
                        self.vworking.heap.push(owner_entry);
                        self.push_coboundary(&owner_entry);
                    }
                    Some(list) => {
                        for e in list {
                            self.vworking.heap.push(e);
                            self.push_coboundary(&e);
                        }
                    }
                }
            }
        }
    }

    /// Fully reduces one column. The emergent shortcut fires when the first
    /// same-diameter cofacet encountered during enumeration is still
    /// unpaired; the rest of the column is never materialized.
    pub fn reduce_column(&mut self, s: &SimplexEntry) -> ColumnOutcome {
        self.working.clear();
        self.vworking.clear();

        cidx_decode_into(s.cidx, s.dim, self.ctx.tbl, &mut self.buf)
            .expect("simplex index in range");
        let ctx = &self.ctx;
        let working = &mut self.working;
        let store = &self.store;
        let mut checked_first_same_diam = false;
        let mut emergent: Option<SimplexEntry> = None;
        for t in ctx.cofacets(s, &self.buf) {
            if t.diam > ctx.threshold {
                continue;
            }
            if !checked_first_same_diam && t.diam == s.diam {
                checked_first_same_diam = true;
                if store.lookup(t.cidx).is_none() {
                    emergent = Some(t);
                    break;
                }
            }
            working.push(t.diam, t.cidx);
        }
        if let Some(t) = emergent {
            self.store.insert_overflow(t.cidx, *s);
            return ColumnOutcome::Paired {
                death: t,
                additions: 0,
                shortcut: true,
            };
        }

        if self.mode == ReductionMode::VMatrix {
            self.vworking.push(s.diam, s.cidx);
        }
        let mut additions = 0usize;
        loop {
            match self.working.pop_pivot() {
                None => return ColumnOutcome::Essential,
                Some(pivot) => match self.store.lookup(pivot.cidx) {
                    Some(owner) => {
                        additions += 1;
                        self.add_reduced_column(&pivot, owner);
                    }
                    None => {
                        let death = SimplexEntry::new(pivot.diam, pivot.cidx, s.dim + 1);
                        self.store.insert_overflow(death.cidx, *s);
                        if self.mode == ReductionMode::VMatrix {
                            let mut summands = Vec::new();
                            while let Some(e) = self.vworking.pop_pivot() {
                                summands.push(e);
                            }
                            self.vstore.insert(s.cidx, summands);
                        }
                        return ColumnOutcome::Paired {
                            death,
                            additions,
                            shortcut: false,
                        };
                    }
                },
            }
        }
    }
}

// ---------------------------------------------------------------------------
// the full pipeline

/// Computes Vietoris-Rips persistence barcodes up to `max_dim`.
///
/// The threshold defaults to the enclosing radius for dense inputs, which
/// preserves every positive-persistence pair; sparse inputs require an
/// explicit threshold. Cohomological pairs map to homological bars
/// `[diam(column), diam(pivot cofacet))`; unpaired columns give infinite
/// bars.
pub fn vr_barcode(dist: &DistanceInput, opts: &VrOptions) -> Result<Barcode> {
    let n = dist.n();
    if n == 0 {
        return Err(Error::Unsupported("empty metric input".into()));
    }
    let tbl = BinomialTable::new(n, opts.max_dim as usize + 2).map_err(|_| {
        Error::Capacity(format!(
            "simplex indices overflow 64 bits for n={n}, max_dim={}",
            opts.max_dim
        ))
    })?;
    let threshold = match opts.threshold {
        Some(t) => t,
        None => dist.enclosing_radius()?,
    };

    let mut pairs: Vec<Vec<PersistencePair>> = Vec::with_capacity(opts.max_dim as usize + 1);
    let mut counters = Vec::with_capacity(opts.max_dim as usize + 1);

    let zero = zero_dim_persistence(dist, threshold, &tbl);
    let merge_count = zero.pairs.iter().filter(|p| p.death.is_some()).count();
    counters.push(DimCounters {
        dim: 0,
        columns: zero.edge_count,
        reduced_pairs: merge_count,
        essential: zero.pairs.len() - merge_count,
        ..Default::default()
    });
    let mut cleared: HashSet<u64> = zero
        .pairs
        .iter()
        .filter_map(|p| p.death.map(|d| d.cidx))
        .collect();
    pairs.push(zero.pairs);

    let mut columns = zero.complementary;
    columns.par_sort_unstable_by(coboundary_compare);

    for dim in 1..=opts.max_dim {
        if dim > 1 {
            columns = build_reduction_columns(dist, dim, threshold, &cleared, &tbl)?.entries;
        }
        let col_list = ColumnList {
            dim,
            entries: columns,
        };
        let (apparent, nonapparent) = find_apparent_pairs(&col_list, dist, &tbl);
        let mut ctr = DimCounters {
            dim,
            columns: col_list.entries.len(),
            apparent: apparent.len(),
            ..Default::default()
        };
        let mut dim_pairs: Vec<PersistencePair> = apparent
            .iter()
            .map(|&(t, s)| PersistencePair {
                birth: s,
                death: Some(t),
            })
            .collect();

        let store = PairStore::from_apparent(&apparent);
        let mut reducer = SubmatrixReducer::new(dist, &tbl, threshold, dim, store, opts.mode);
        for s in &nonapparent {
            match reducer.reduce_column(s) {
                ColumnOutcome::Paired {
                    death,
                    additions,
                    shortcut,
                } => {
                    ctr.additions += additions;
                    if shortcut {
                        ctr.emergent_shortcut += 1;
                    } else {
                        ctr.reduced_pairs += 1;
                    }
                    dim_pairs.push(PersistencePair {
                        birth: *s,
                        death: Some(death),
                    });
                }
                ColumnOutcome::Essential => {
                    ctr.essential += 1;
                    dim_pairs.push(PersistencePair {
                        birth: *s,
                        death: None,
                    });
                }
            }
        }
        counters.push(ctr);
        cleared = dim_pairs
            .iter()
            .filter_map(|p| p.death.map(|d| d.cidx))
            .collect();
        pairs.push(dim_pairs);
        columns = Vec::new();
    }

    let diagrams = assemble_diagrams(&pairs, opts.include_zero);
    Ok(Barcode {
        diagrams,
        pairs,
        counters,
        threshold,
    })
}

fn assemble_diagrams(
    pairs: &[Vec<PersistencePair>],
    include_zero: bool,
) -> Vec<PersistenceDiagram> {
    pairs
        .iter()
        .enumerate()
        .map(|(dim, dim_pairs)| {
            let mut d = PersistenceDiagram::new(dim as u32);
            for p in dim_pairs {
                match p.death {
                    Some(death) => {
                        if death.diam > p.birth.diam || include_zero {
                            d.finite.push((p.birth.diam, death.diam));
                        }
                    }
                    None => d.infinite.push(p.birth.diam),
                }
            }
            d.sort();
            d
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{load_metric_input, InputFormat};

    fn square() -> DistanceInput {
        load_metric_input("0 0\n1 0\n1 1\n0 1\n", InputFormat::PointCloud).unwrap()
    }

    #[test]
    fn zero_dim_two_points() {
        let d = DistanceInput::from_lower_triangular(2, vec![1.0]).unwrap();
        let tbl = BinomialTable::new(2, 3).unwrap();
        let z = zero_dim_persistence(&d, f64::INFINITY, &tbl);
        let deaths: Vec<f64> = z
            .pairs
            .iter()
            .filter_map(|p| p.death.map(|e| e.diam))
            .collect();
        assert_eq!(deaths, vec![1.0]);
        assert_eq!(z.pairs.iter().filter(|p| p.death.is_none()).count(), 1);
        assert!(z.complementary.is_empty());
    }

    #[test]
    fn zero_dim_single_point() {
        let d = DistanceInput::from_lower_triangular(1, vec![]).unwrap();
        let tbl = BinomialTable::new(2, 3).unwrap();
        let z = zero_dim_persistence(&d, f64::INFINITY, &tbl);
        assert_eq!(z.pairs.len(), 1);
        assert!(z.pairs[0].death.is_none());
    }

    #[test]
    fn zero_dim_square_complementary_edges() {
        let d = square();
        let tbl = BinomialTable::new(4, 3).unwrap();
        let z = zero_dim_persistence(&d, 2.0, &tbl);
        // three unit merges, one infinite class
        let merges: Vec<f64> = z
            .pairs
            .iter()
            .filter_map(|p| p.death.map(|e| e.diam))
            .collect();
        assert_eq!(merges, vec![1.0, 1.0, 1.0]);
        // one unit side plus the two diagonals close cycles
        assert_eq!(z.complementary.len(), 3);
        let diag_count = z
            .complementary
            .iter()
            .filter(|e| (e.diam - std::f64::consts::SQRT_2).abs() < 1e-9)
            .count();
        assert_eq!(diag_count, 2);
    }

    #[test]
    fn square_barcode_matches_known_answer() {
        let d = square();
        let barcode = vr_barcode(&d, &VrOptions::default()).unwrap();
        let dim0 = &barcode.diagrams[0];
        assert_eq!(dim0.finite, vec![(0.0, 1.0); 3]);
        assert_eq!(dim0.infinite, vec![0.0]);
        let dim1 = &barcode.diagrams[1];
        assert_eq!(dim1.finite.len(), 1);
        let (b, dth) = dim1.finite[0];
        assert!((b - 1.0).abs() < 1e-12);
        assert!((dth - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(dim1.infinite.is_empty());
    }

    #[test]
    fn equilateral_triangle_has_one_apparent_pair() {
        let d = DistanceInput::from_lower_triangular(3, vec![1.0, 1.0, 1.0]).unwrap();
        let tbl = BinomialTable::new(3, 3).unwrap();
        let zero = zero_dim_persistence(&d, 1.0, &tbl);
        let mut cols = zero.complementary;
        cols.sort_unstable_by(coboundary_compare);
        let list = ColumnList {
            dim: 1,
            entries: cols,
        };
        let (apparent, nonapparent) = find_apparent_pairs(&list, &d, &tbl);
        assert_eq!(apparent.len(), 1);
        assert!(nonapparent.is_empty());
        // the lexicographically greatest same-diameter edge pairs with the
        // triangle: column (1,0), cofacet (2,1,0)
        assert_eq!(apparent[0].1.cidx, 0);
        assert_eq!(apparent[0].0.cidx, 0);
    }

    #[test]
    fn all_equal_skeleton_apparent_count_n5() {
        // full 2-skeleton on 5 points, all diameters 1: 6 of the 10 edge
        // columns are apparent
        let n = 5;
        let data = vec![1.0; n * (n - 1) / 2];
        let d = DistanceInput::from_lower_triangular(n, data).unwrap();
        let tbl = BinomialTable::new(n, 3).unwrap();
        let cols = build_reduction_columns(&d, 1, f64::INFINITY, &HashSet::new(), &tbl).unwrap();
        let (apparent, _) = find_apparent_pairs(&cols, &d, &tbl);
        assert_eq!(apparent.len(), 6);
        // the staircase: each apparent edge pairs with itself joined to the
        // top vertex, cidx(t) = C(4,3) + cidx(s)
        for &(t, s) in &apparent {
            assert_eq!(t.cidx, 4 + s.cidx);
        }
    }

    #[test]
    fn distinct_diameter_assignment_same_apparent_columns() {
        // diameters assigned in decreasing order along increasing
        // lexicographic edge order preserve the apparent columns
        let n = 5;
        let m = n * (n - 1) / 2;
        let data: Vec<f64> = (0..m).map(|k| (m - k) as f64).collect();
        let d = DistanceInput::from_lower_triangular(n, data).unwrap();
        let tbl = BinomialTable::new(n, 3).unwrap();
        let cols = build_reduction_columns(&d, 1, f64::INFINITY, &HashSet::new(), &tbl).unwrap();
        let (apparent, _) = find_apparent_pairs(&cols, &d, &tbl);
        assert_eq!(apparent.len(), 6);
        let mut cols_apparent: Vec<u64> = apparent.iter().map(|&(_, s)| s.cidx).collect();
        cols_apparent.sort_unstable();
        // the first C(4,2) = 6 edges in lexicographic order
        assert_eq!(cols_apparent, vec![0, 1, 2, 3, 4, 5]);
    }

    /// Brute-force apparent pairs from the definition: the oldest cofacet
    /// by explicit filtration sort, then the youngest facet likewise.
    fn apparent_pairs_by_definition(
        cols: &ColumnList,
        dist: &DistanceInput,
        tbl: &BinomialTable,
    ) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        for s in &cols.entries {
            let sverts = crate::simplex::cidx_decode(s.cidx, s.dim, tbl).unwrap();
            let mut cofacets: Vec<SimplexEntry> =
                enumerate_cofacets_dense(s, &sverts, dist.n(), dist, tbl).collect();
            if cofacets.is_empty() {
                continue;
            }
            cofacets.sort_by(filtration_compare);
            let oldest = cofacets[0];
            let tverts = crate::simplex::cidx_decode(oldest.cidx, oldest.dim, tbl).unwrap();
            let mut facets = enumerate_facets(&oldest, &tverts, dist, tbl);
            facets.sort_by(filtration_compare);
            let youngest = facets[facets.len() - 1];
            if youngest.cidx == s.cidx {
                out.push((oldest.cidx, s.cidx));
            }
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn apparent_scan_matches_definition() {
        use rand::{Rng, SeedableRng};
        for seed in 0..40u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(3..9usize);
            let quantize = seed % 3 == 0;
            let data: Vec<f64> = (0..n * (n - 1) / 2)
                .map(|_| {
                    let d: f64 = rng.gen_range(0.1..2.0);
                    if quantize {
                        (d * 3.0).round() / 3.0
                    } else {
                        d
                    }
                })
                .collect();
            let d = DistanceInput::from_lower_triangular(n, data).unwrap();
            let tbl = BinomialTable::new(n, 4).unwrap();
            for dim in 1..=2u32.min(n as u32 - 2) {
                let cols =
                    build_reduction_columns(&d, dim, f64::INFINITY, &HashSet::new(), &tbl).unwrap();
                let (apparent, _) = find_apparent_pairs(&cols, &d, &tbl);
                let mut got: Vec<(u64, u64)> =
                    apparent.iter().map(|&(t, s)| (t.cidx, s.cidx)).collect();
                got.sort_unstable();
                let expected = apparent_pairs_by_definition(&cols, &d, &tbl);
                assert_eq!(got, expected, "seed {seed} dim {dim}");
            }
        }
    }

    #[test]
    fn sparse_input_matches_dense_barcode() {
        use rand::{Rng, SeedableRng};
        for seed in 0..20u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(4..10usize);
            let data: Vec<f64> = (0..n * (n - 1) / 2)
                .map(|_| rng.gen_range(0.1..2.0))
                .collect();
            let dense = DistanceInput::from_lower_triangular(n, data).unwrap();
            let t = rng.gen_range(0.8..2.0);
            let sparse = dense.sparsify_by_threshold(t);
            let opts = VrOptions {
                max_dim: 2,
                threshold: Some(t),
                include_zero: true,
                ..Default::default()
            };
            let a = vr_barcode(&dense, &opts).unwrap();
            let b = vr_barcode(&sparse, &opts).unwrap();
            assert_eq!(a.diagrams, b.diagrams, "seed {seed}");
        }
    }

    #[test]
    fn collinear_points_at_enclosing_radius() {
        // points at 0, 1, 3: enclosing radius 2, no dimension-1 features,
        // and the positive dim-0 bars match the unthresholded run
        let d = DistanceInput::from_lower_triangular(3, vec![1.0, 3.0, 2.0]).unwrap();
        let capped = vr_barcode(&d, &VrOptions::default()).unwrap();
        assert_eq!(capped.threshold, 2.0);
        assert!(capped.diagrams[1].is_empty());
        let full = vr_barcode(
            &d,
            &VrOptions {
                threshold: Some(f64::INFINITY),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(capped.diagrams[0], full.diagrams[0]);
    }

    #[test]
    fn shortcut_fires_on_apparent_columns_without_additions() {
        // feeding an apparent column through the reducer with an empty
        // store must pair it immediately via the emergent shortcut
        let d = DistanceInput::from_lower_triangular(3, vec![1.0, 1.0, 1.0]).unwrap();
        let tbl = BinomialTable::new(3, 3).unwrap();
        let mut reducer = SubmatrixReducer::new(
            &d,
            &tbl,
            1.0,
            1,
            PairStore::default(),
            ReductionMode::Oblivious,
        );
        let s = SimplexEntry::new(1.0, 0, 1); // edge (1,0), apparent column
        match reducer.reduce_column(&s) {
            ColumnOutcome::Paired {
                death,
                additions,
                shortcut,
            } => {
                assert!(shortcut);
                assert_eq!(additions, 0);
                assert_eq!(death.cidx, 0); // the triangle (2,1,0)
            }
            ColumnOutcome::Essential => panic!("apparent column reduced to zero"),
        }
    }

    #[test]
    fn modes_agree_on_random_metrics() {
        use rand::{Rng, SeedableRng};
        for seed in 0..30u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(3..9usize);
            let data: Vec<f64> = (0..n * (n - 1) / 2)
                .map(|_| rng.gen_range(0.1..2.0))
                .collect();
            let d = DistanceInput::from_lower_triangular(n, data).unwrap();
            let a = vr_barcode(
                &d,
                &VrOptions {
                    max_dim: 2,
                    threshold: Some(f64::INFINITY),
                    mode: ReductionMode::Oblivious,
                    include_zero: true,
                },
            )
            .unwrap();
            let b = vr_barcode(
                &d,
                &VrOptions {
                    max_dim: 2,
                    threshold: Some(f64::INFINITY),
                    mode: ReductionMode::VMatrix,
                    include_zero: true,
                },
            )
            .unwrap();
            assert_eq!(a.diagrams, b.diagrams, "seed {seed}");
        }
    }

    #[test]
    fn capacity_error_before_work() {
        let n = 3000;
        let data = vec![1.0; n * (n - 1) / 2];
        let d = DistanceInput::from_lower_triangular(n, data).unwrap();
        let err = vr_barcode(
            &d,
            &VrOptions {
                max_dim: 20,
                threshold: Some(0.5),
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Capacity(_)));
    }

    #[test]
    fn sparse_requires_threshold() {
        let d = DistanceInput::from_sparse_pairs(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let err = vr_barcode(&d, &VrOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn shortcut_tower_holds() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 9;
        let data: Vec<f64> = (0..n * (n - 1) / 2)
            .map(|_| rng.gen_range(0.1..2.0))
            .collect();
        let d = DistanceInput::from_lower_triangular(n, data).unwrap();
        let barcode = vr_barcode(
            &d,
            &VrOptions {
                max_dim: 2,
                threshold: Some(f64::INFINITY),
                include_zero: true,
                ..Default::default()
            },
        )
        .unwrap();
        for c in &barcode.counters[1..] {
            let total_pairs = c.apparent + c.emergent_shortcut + c.reduced_pairs;
            assert!(c.apparent <= c.apparent + c.emergent_shortcut);
            assert!(c.apparent + c.emergent_shortcut <= total_pairs);
            assert_eq!(total_pairs + c.essential, c.columns);
        }
    }
}
