//! Explicit sparse Z2 boundary-matrix reduction: the standard left-to-right
//! algorithm, the twist variant with clearing, a metadata scan that finds
//! leftmost nonzeros and stable pivots, row compression, and cohomology via
//! the anti-transposed matrix.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A strictly upper-triangular Z2 matrix in column-major sparse form, with a
/// simplex dimension per column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    /// per-column sorted ascending row indices
    pub columns: Vec<Vec<usize>>,
    /// per-column simplex dimension
    pub dims: Vec<u32>,
}

impl BoundaryMatrix {
    pub fn new(columns: Vec<Vec<usize>>, dims: Vec<u32>) -> Result<Self> {
        if columns.len() != dims.len() {
            return Err(Error::Parse {
                line: 0,
                msg: "columns and dims must have equal length".into(),
            });
        }
        for (j, col) in columns.iter().enumerate() {
            for w in col.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!("column {j} row indices not strictly increasing"),
                    });
                }
            }
            if let Some(&last) = col.last() {
                if last >= j {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!("column {j} has entry at row {last}; matrix not strictly upper triangular"),
                    });
                }
            }
        }
        Ok(BoundaryMatrix { columns, dims })
    }

    pub fn n(&self) -> usize {
        self.columns.len()
    }

    /// Whether the matrix squares to zero over Z2, i.e. is the boundary
    /// matrix of a filtered complex. Twist, clearing and compression are
    /// only sound on such matrices: the boundary property is what makes
    /// birth and death indices disjoint.
    pub fn is_boundary_like(&self) -> bool {
        self.columns.iter().all(|col| {
            let mut acc: Vec<usize> = Vec::new();
            for &row in col {
                acc = add_columns(&acc, &self.columns[row]);
            }
            acc.is_empty()
        })
    }

    /// Parses the text form: first line the column count, then one line per
    /// column holding the dimension followed by the sorted row indices.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (lineno, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty boundary-matrix file".into(),
        })?;
        let n: usize = header.parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("expected column count, got {header:?}"),
        })?;
        let mut columns = Vec::with_capacity(n);
        let mut dims = Vec::with_capacity(n);
        for _ in 0..n {
            let (lineno, line) = lines.next().ok_or(Error::Parse {
                line: 0,
                msg: format!("expected {n} column lines"),
            })?;
            let mut fields = line.split_whitespace();
            let dim: u32 = fields
                .next()
                .ok_or(Error::Parse {
                    line: lineno,
                    msg: "missing dimension".into(),
                })?
                .parse()
                .map_err(|_| Error::Parse {
                    line: lineno,
                    msg: "non-integer dimension".into(),
                })?;
            let rows: Vec<usize> = fields
                .map(|f| {
                    f.parse().map_err(|_| Error::Parse {
                        line: lineno,
                        msg: format!("non-integer row index {f:?}"),
                    })
                })
                .collect::<Result<_>>()?;
            dims.push(dim);
            columns.push(rows);
        }
        BoundaryMatrix::new(columns, dims)
    }
}

/// Row-to-column map of the pivots discovered by a reduction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PivotTable {
    lookup: HashMap<usize, usize>,
}

impl PivotTable {
    pub fn column_of(&self, row: usize) -> Option<usize> {
        self.lookup.get(&row).copied()
    }

    pub fn insert(&mut self, row: usize, col: usize) {
        let prev = self.lookup.insert(row, col);
        debug_assert!(prev.is_none(), "pivot row {row} assigned twice");
    }

    pub fn len(&self) -> usize {
        self.lookup.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lookup.is_empty()
    }

    /// Pivot pairs `(row, col)` sorted by column.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = self.lookup.iter().map(|(&r, &c)| (r, c)).collect();
        v.sort_by_key(|&(_, c)| c);
        v
    }
}

/// Maximum nonzero row index of a canonical column; `None` for the zero
/// column. The two in-text conventions (0 and -1) both collide with row 0,
/// so the sentinel is explicit.
pub fn low_of(column: &[usize]) -> Option<usize> {
    column.last().copied()
}

/// Z2 column addition: symmetric difference of sorted row lists.
pub fn add_columns(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Left-to-right standard reduction. Returns the reduced matrix and the
/// pivot table; `low` is injective on the nonzero columns of the result.
pub fn standard_reduce(matrix: &BoundaryMatrix) -> (BoundaryMatrix, PivotTable) {
    let mut r = matrix.clone();
    let mut pivots = PivotTable::default();
    for j in 0..r.n() {
        reduce_column(&mut r, j, &mut pivots);
    }
    (r, pivots)
}

fn reduce_column(r: &mut BoundaryMatrix, j: usize, pivots: &mut PivotTable) {
    loop {
        let Some(low) = low_of(&r.columns[j]) else {
            return;
        };
        match pivots.column_of(low) {
            Some(k) => {
                assert!(
                    !r.columns[k].is_empty(),
                    "pivot column {k} was cleared but is still referenced: \
                     the input violates the boundary property"
                );
                let merged = add_columns(&r.columns[j], &r.columns[k]);
                r.columns[j] = merged;
            }
            None => {
                pivots.insert(low, j);
                return;
            }
        }
    }
}

/// Twist reduction: processes dimensions from the highest down and zeroes
/// column `low(j)` as soon as the pivot `(low(j), j)` is found, so cleared
/// columns are never reduced. The pivot set equals the standard one.
pub fn twist_reduce(matrix: &BoundaryMatrix) -> (BoundaryMatrix, PivotTable) {
    let mut r = matrix.clone();
    let mut pivots = PivotTable::default();
    let max_dim = r.dims.iter().copied().max().unwrap_or(0);
    for dim in (0..=max_dim).rev() {
        for j in 0..r.n() {
            if r.dims[j] != dim {
                continue;
            }
            reduce_column(&mut r, j, &mut pivots);
            if let Some(low) = low_of(&r.columns[j]) {
                r.columns[low].clear();
            }
        }
    }
    (r, pivots)
}

/// Read-only scan metadata: leftmost nonzero column per row, pivots of
/// columns already in reduced position, and the cleared/stable partition.
#[derive(Debug, Clone)]
pub struct ScanMetadata {
    /// per-row leftmost nonzero column, `None` for empty rows
    pub leftmost: Vec<Option<usize>>,
    /// pivots found without any column addition
    pub pivots: PivotTable,
    /// columns zeroed by clearing (they are pivot rows of stable columns)
    pub cleared: Vec<bool>,
    /// 0-addition columns: zero columns and scan-found pivot columns
    pub stable: Vec<bool>,
    /// remaining column indices, ascending
    pub unstable: Vec<usize>,
}

/// One pass over the matrix, standing in for the scan kernels: a column `j`
/// is stable when `low(j)` is the leftmost nonzero of its row, in which case
/// `(low(j), j)` is a pivot and column `low(j)` is marked cleared.
pub fn scan_metadata(matrix: &BoundaryMatrix) -> ScanMetadata {
    let n = matrix.n();
    let mut leftmost: Vec<Option<usize>> = vec![None; n];
    for j in 0..n {
        for &row in &matrix.columns[j] {
            if leftmost[row].is_none() {
                leftmost[row] = Some(j); // columns visited left to right
            }
        }
    }
    let mut pivots = PivotTable::default();
    let mut stable = vec![false; n];
    let mut cleared = vec![false; n];
    for j in 0..n {
        match low_of(&matrix.columns[j]) {
            None => stable[j] = true,
            Some(low) => {
                if leftmost[low] == Some(j) {
                    pivots.insert(low, j);
                    stable[j] = true;
                    stable[low] = true;
                    cleared[low] = true;
                }
            }
        }
    }
    let unstable = (0..n).filter(|&j| !stable[j]).collect();
    ScanMetadata {
        leftmost,
        pivots,
        cleared,
        stable,
        unstable,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Compressibility {
    Unknown,
    Compressible,
    Incompressible,
}

/// Applies clearing and row compression using scan metadata. A row is
/// compressible when its index is a column holding some leftmost nonzero, or
/// when it is a scan-pivot row whose pivot column's above-pivot entries are
/// all compressible. Compressible entries are zeroed everywhere except at
/// scan-found pivot positions; reducing the result yields the same pivots.
pub fn compress(matrix: &BoundaryMatrix, meta: &ScanMetadata) -> BoundaryMatrix {
    let n = matrix.n();
    let mut is_left_col = vec![false; n];
    for lm in meta.leftmost.iter().flatten() {
        is_left_col[*lm] = true;
    }
    let mut marks = vec![Compressibility::Unknown; n];
    for row in 0..n {
        search_compressible(row, matrix, meta, &is_left_col, &mut marks);
    }

    let mut out = matrix.clone();
    for j in 0..n {
        if meta.cleared[j] {
            out.columns[j].clear();
            continue;
        }
        out.columns[j].retain(|&row| {
            marks[row] != Compressibility::Compressible || meta.pivots.column_of(row) == Some(j)
        });
    }
    out
}

fn search_compressible(
    row: usize,
    matrix: &BoundaryMatrix,
    meta: &ScanMetadata,
    is_left_col: &[bool],
    marks: &mut Vec<Compressibility>,
) -> bool {
    match marks[row] {
        Compressibility::Compressible => return true,
        Compressibility::Incompressible => return false,
        Compressibility::Unknown => {}
    }
    let result = if is_left_col[row] {
        true
    } else if let Some(pivot_col) = meta.pivots.column_of(row) {
        // entries above the pivot are all < row, so the recursion terminates
        matrix.columns[pivot_col]
            .iter()
            .filter(|&&k| k != row)
            .all(|&k| search_compressible(k, matrix, meta, is_left_col, marks))
    } else {
        false
    };
    marks[row] = if result {
        Compressibility::Compressible
    } else {
        Compressibility::Incompressible
    };
    result
}

/// Transposes the matrix with jointly reversed row and column indices,
/// reduces it with the twist order, and maps the pivots back. The result
/// equals the homology pivot set of the original matrix.
pub fn anti_transpose_reduce(matrix: &BoundaryMatrix) -> PivotTable {
    let n = matrix.n();
    let mut columns: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..n {
        for &row in &matrix.columns[j] {
            columns[n - 1 - row].push(n - 1 - j);
        }
    }
    for col in columns.iter_mut() {
        col.sort_unstable();
    }
    let max_dim = matrix.dims.iter().copied().max().unwrap_or(0);
    let dims: Vec<u32> = (0..n).map(|j| max_dim - matrix.dims[n - 1 - j]).collect();
    let anti = BoundaryMatrix { columns, dims };
    let (_, anti_pivots) = twist_reduce(&anti);
    let mut pivots = PivotTable::default();
    for (row, col) in anti_pivots.pairs() {
        pivots.insert(n - 1 - col, n - 1 - row);
    }
    pivots
}

#[cfg(test)]
pub(crate) fn fig_4_1_matrix() -> BoundaryMatrix {
    // three vertices, three edges, one triangle
    BoundaryMatrix::new(
        vec![
            vec![],
            vec![],
            vec![],
            vec![0, 2],
            vec![1, 2],
            vec![0, 1],
            vec![3, 4, 5],
        ],
        vec![0, 0, 0, 1, 1, 1, 2],
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Independent pairing oracle via submatrix ranks over GF(2): (i, j) is
    /// a pivot iff the rank of the lower-left submatrix (rows >= i, cols
    /// <= j) jumps by exactly one relative to its three neighbors. This
    /// characterizes the unique minimax solution without running any
    /// column-addition reduction.
    pub fn rank_pairing_oracle(matrix: &BoundaryMatrix) -> Vec<(usize, usize)> {
        let n = matrix.n();
        assert!(n <= 64, "rank oracle uses u64 row masks");
        let masks: Vec<u64> = matrix
            .columns
            .iter()
            .map(|col| col.iter().fold(0u64, |m, &r| m | (1 << r)))
            .collect();
        // rank of submatrix with rows >= i, columns <= j (inclusive)
        let rank = |i: usize, j_incl: Option<usize>| -> usize {
            let Some(j) = j_incl else { return 0 };
            let row_mask = if i >= 64 { 0 } else { !0u64 << i };
            let mut lead = [0u64; 64];
            let mut rank = 0usize;
            for &m in &masks[..=j] {
                let mut v = m & row_mask;
                while v != 0 {
                    let h = (63 - v.leading_zeros()) as usize;
                    if lead[h] == 0 {
                        lead[h] = v;
                        rank += 1;
                        break;
                    }
                    v ^= lead[h];
                }
            }
            rank
        };
        let mut pairs = Vec::new();
        for j in 0..n {
            for i in 0..j {
                let mu = rank(i, Some(j)) as i64
                    - rank(i + 1, Some(j)) as i64
                    - rank(i, j.checked_sub(1)) as i64
                    + rank(i + 1, j.checked_sub(1)) as i64;
                if mu == 1 {
                    pairs.push((i, j));
                }
            }
        }
        pairs.sort_by_key(|&(_, c)| c);
        pairs
    }

    pub fn random_upper_triangular(n: usize, density: f64, seed: u64) -> BoundaryMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut columns = Vec::with_capacity(n);
        for j in 0..n {
            let mut col = Vec::new();
            for row in 0..j {
                if rng.gen_bool(density) {
                    col.push(row);
                }
            }
            columns.push(col);
        }
        BoundaryMatrix::new(columns, vec![0; n]).unwrap()
    }

    /// Random graph filtration: vertices and edges in an order where faces
    /// precede cofaces, so the result is a genuine boundary matrix.
    pub fn random_graph_filtration(max_cols: usize, seed: u64) -> BoundaryMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=max_cols);
        let mut columns: Vec<Vec<usize>> = Vec::with_capacity(n);
        let mut dims = Vec::with_capacity(n);
        let mut vertices: Vec<usize> = Vec::new();
        let mut edges: std::collections::HashSet<(usize, usize)> = Default::default();
        for j in 0..n {
            let mut candidates: Vec<(usize, usize)> = Vec::new();
            for (a, &p) in vertices.iter().enumerate() {
                for &q in &vertices[a + 1..] {
                    if !edges.contains(&(p, q)) {
                        candidates.push((p, q));
                    }
                }
            }
            if candidates.is_empty() || rng.gen_bool(0.45) {
                vertices.push(j);
                columns.push(vec![]);
                dims.push(0);
            } else {
                let (p, q) = candidates[rng.gen_range(0..candidates.len())];
                edges.insert((p, q));
                columns.push(vec![p, q]);
                dims.push(1);
            }
        }
        let m = BoundaryMatrix::new(columns, dims).unwrap();
        debug_assert!(m.is_boundary_like());
        m
    }

    #[test]
    fn low_examples() {
        assert_eq!(low_of(&[]), None);
        assert_eq!(low_of(&[0, 2]), Some(2));
        assert_eq!(low_of(&fig_4_1_matrix().columns[6]), Some(5));
    }

    #[test]
    fn standard_reduce_fig_4_1() {
        let m = fig_4_1_matrix();
        let (r, pivots) = standard_reduce(&m);
        assert_eq!(pivots.pairs(), vec![(2, 3), (1, 4), (5, 6)]);
        assert!(
            r.columns[5].is_empty(),
            "creator column must reduce to zero"
        );
    }

    #[test]
    fn standard_reduce_all_zero() {
        let m = BoundaryMatrix::new(vec![vec![], vec![], vec![]], vec![0, 0, 0]).unwrap();
        let (_, pivots) = standard_reduce(&m);
        assert!(pivots.is_empty());
    }

    #[test]
    fn standard_matches_rank_oracle() {
        for seed in 0..60u64 {
            let n = 3 + (seed as usize % 10);
            let m = random_upper_triangular(n, 0.3, seed);
            let (_, pivots) = standard_reduce(&m);
            assert_eq!(pivots.pairs(), rank_pairing_oracle(&m), "seed {seed}");
        }
    }

    #[test]
    fn twist_fig_4_1_clears_column_5() {
        let m = fig_4_1_matrix();
        let (r, pivots) = twist_reduce(&m);
        assert_eq!(pivots.pairs(), vec![(2, 3), (1, 4), (5, 6)]);
        assert!(r.columns[5].is_empty());
    }

    #[test]
    fn twist_on_vertices_only() {
        let m = BoundaryMatrix::new(vec![vec![], vec![]], vec![0, 0]).unwrap();
        let (_, pivots) = twist_reduce(&m);
        assert!(pivots.is_empty());
    }

    #[test]
    fn scan_fig_4_1() {
        let m = fig_4_1_matrix();
        let meta = scan_metadata(&m);
        assert_eq!(meta.leftmost[2], Some(3));
        assert_eq!(meta.pivots.column_of(2), Some(3));
        assert_eq!(meta.pivots.column_of(5), Some(6));
        assert!(meta.stable[3] && meta.stable[6]);
        assert!(meta.cleared[2] && meta.cleared[5]);
        assert_eq!(meta.unstable, vec![4]);
    }

    #[test]
    fn scan_all_zero_is_all_stable() {
        let m = BoundaryMatrix::new(vec![vec![], vec![], vec![]], vec![0, 0, 0]).unwrap();
        let meta = scan_metadata(&m);
        assert!(meta.stable.iter().all(|&s| s));
        assert!(meta.unstable.is_empty());
    }

    #[test]
    fn scan_pivots_contained_in_full_pivots() {
        for seed in 0..40u64 {
            let m = random_graph_filtration(16, seed);
            let meta = scan_metadata(&m);
            let (_, full) = standard_reduce(&m);
            for (r, c) in meta.pivots.pairs() {
                assert_eq!(full.column_of(r), Some(c), "seed {seed}");
            }
        }
    }

    #[test]
    fn compress_fig_4_1_zeroes_rows_3_and_4() {
        let m = fig_4_1_matrix();
        let meta = scan_metadata(&m);
        let c = compress(&m, &meta);
        // rows 3 and 4 are leftmost-nonzero column indices, so the triangle
        // column keeps only its pivot row
        assert_eq!(c.columns[6], vec![5]);
        // cleared creator columns are zeroed
        assert!(c.columns[5].is_empty());
        assert!(c.columns[2].is_empty());
        let (_, pivots) = standard_reduce(&c);
        assert_eq!(pivots.pairs(), vec![(2, 3), (1, 4), (5, 6)]);
    }

    #[test]
    fn compress_trivial_matrix_unchanged() {
        let m = BoundaryMatrix::new(vec![vec![], vec![]], vec![0, 0]).unwrap();
        let meta = scan_metadata(&m);
        assert_eq!(compress(&m, &meta), m);
    }

    #[test]
    fn compress_preserves_pivots_randomly() {
        for seed in 0..60u64 {
            let m = random_graph_filtration(18, seed + 1000);
            let meta = scan_metadata(&m);
            let c = compress(&m, &meta);
            let (_, a) = standard_reduce(&m);
            let (_, b) = standard_reduce(&c);
            assert_eq!(a.pairs(), b.pairs(), "seed {seed}");
        }
    }

    #[test]
    fn anti_transpose_fig_4_1() {
        let m = fig_4_1_matrix();
        let pivots = anti_transpose_reduce(&m);
        assert_eq!(pivots.pairs(), vec![(2, 3), (1, 4), (5, 6)]);
    }

    #[test]
    fn anti_transpose_empty() {
        let m = BoundaryMatrix::new(vec![], vec![]).unwrap();
        assert!(anti_transpose_reduce(&m).is_empty());
    }

    #[test]
    fn parse_round_trip() {
        let text = "7\n0\n0\n0\n1 0 2\n1 1 2\n1 0 1\n2 3 4 5\n";
        let m = BoundaryMatrix::parse(text).unwrap();
        assert_eq!(m, fig_4_1_matrix());
        assert!(BoundaryMatrix::parse("2\n0\n0 1\n").is_err()); // diagonal entry
        assert!(BoundaryMatrix::parse("1\n").is_err()); // missing column line
    }
}
