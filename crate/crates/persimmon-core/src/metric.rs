//! Metric input: parsing, distance lookups, enclosing radius, sparsification.

use crate::error::{Error, Result};

/// Pairwise distances on `n` points, stored either as a dense
/// lower-triangular array or as symmetric sorted neighbor lists. Pairs absent
/// from a sparse input are at distance `+inf`.
#[derive(Debug, Clone)]
pub enum DistanceInput {
    Dense(DenseDistances),
    Sparse(SparseDistances),
}

#[derive(Debug, Clone)]
pub struct DenseDistances {
    n: usize,
    /// row-major lower triangle: d(i,j) for i > j at `i*(i-1)/2 + j`
    data: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SparseDistances {
    n: usize,
    /// per-vertex neighbor lists sorted by neighbor index
    lists: Vec<Vec<(u32, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    LowerDistance,
    PointCloud,
    Sparse,
}

impl DistanceInput {
    pub fn from_lower_triangular(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::Parse {
                line: 0,
                msg: format!(
                    "lower-triangular storage for {n} points needs {} entries, got {}",
                    n * n.saturating_sub(1) / 2,
                    data.len()
                ),
            });
        }
        Ok(DistanceInput::Dense(DenseDistances { n, data }))
    }

    /// Builds symmetric neighbor lists from `(i, j, d)` entries. Reverse
    /// entries are added automatically; conflicting duplicates are rejected.
    pub fn from_sparse_pairs(n: usize, pairs: &[(usize, usize, f64)]) -> Result<Self> {
        let mut lists = vec![Vec::new(); n];
        for &(i, j, d) in pairs {
            if i >= n || j >= n || i == j {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("bad sparse pair ({i}, {j}) for {n} points"),
                });
            }
            lists[i].push((j as u32, d));
            lists[j].push((i as u32, d));
        }
        for (i, list) in lists.iter_mut().enumerate() {
            list.sort_by_key(|e| e.0);
            list.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
            for w in list.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!(
                            "conflicting distances for pair ({i}, {}): {} vs {}",
                            w[0].0, w[0].1, w[1].1
                        ),
                    });
                }
            }
        }
        Ok(DistanceInput::Sparse(SparseDistances { n, lists }))
    }

    pub fn n(&self) -> usize {
        match self {
            DistanceInput::Dense(d) => d.n,
            DistanceInput::Sparse(s) => s.n,
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, DistanceInput::Sparse(_))
    }

    #[inline]
    pub fn distance(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        match self {
            DistanceInput::Dense(d) => {
                let (hi, lo) = if u > v { (u, v) } else { (v, u) };
                d.data[hi * (hi - 1) / 2 + lo]
            }
            DistanceInput::Sparse(s) => {
                let list = &s.lists[u];
                match list.binary_search_by(|probe| probe.0.cmp(&(v as u32))) {
                    Ok(pos) => list[pos].1,
                    Err(_) => f64::INFINITY,
                }
            }
        }
    }

    /// Sorted neighbor list of a vertex; panics on dense input.
    pub fn neighbors(&self, v: usize) -> &[(u32, f64)] {
        match self {
            DistanceInput::Sparse(s) => &s.lists[v],
            DistanceInput::Dense(_) => panic!("neighbors() requires sparse input"),
        }
    }

    /// `min_x max_y d(x, y)`; 0 when fewer than two points.
    pub fn enclosing_radius(&self) -> Result<f64> {
        match self {
            DistanceInput::Sparse(_) => Err(Error::Unsupported(
                "enclosing radius requires a dense input; pass an explicit threshold".into(),
            )),
            DistanceInput::Dense(d) => {
                if d.n < 2 {
                    return Ok(0.0);
                }
                let mut best = f64::INFINITY;
                for i in 0..d.n {
                    let mut row_max: f64 = 0.0;
                    for j in 0..d.n {
                        if i != j {
                            row_max = row_max.max(self.distance(i, j));
                        }
                    }
                    best = best.min(row_max);
                }
                Ok(best)
            }
        }
    }

    /// Keeps exactly the pairs with `d <= t` as sorted neighbor lists.
    pub fn sparsify_by_threshold(&self, t: f64) -> DistanceInput {
        let n = self.n();
        let mut lists = vec![Vec::new(); n];
        match self {
            DistanceInput::Dense(_) => {
                for i in 0..n {
                    for j in 0..i {
                        let d = self.distance(i, j);
                        if d <= t {
                            lists[i].push((j as u32, d));
                            lists[j].push((i as u32, d));
                        }
                    }
                }
                for list in lists.iter_mut() {
                    list.sort_by_key(|e| e.0);
                }
            }
            DistanceInput::Sparse(s) => {
                for (i, list) in s.lists.iter().enumerate() {
                    lists[i] = list.iter().copied().filter(|&(_, d)| d <= t).collect();
                }
            }
        }
        DistanceInput::Sparse(SparseDistances { n, lists })
    }

    /// Serializes a dense input back to lower-distance text. Distances are
    /// printed with enough digits for a bit-exact round trip.
    pub fn to_lower_distance_text(&self) -> Result<String> {
        match self {
            DistanceInput::Sparse(_) => Err(Error::Unsupported(
                "lower-distance text requires dense input".into(),
            )),
            DistanceInput::Dense(d) => {
                let mut out = String::new();
                for i in 1..d.n {
                    let row: Vec<String> = (0..i)
                        .map(|j| format!("{:?}", self.distance(i, j)))
                        .collect();
                    out.push_str(&row.join(" "));
                    out.push('\n');
                }
                Ok(out)
            }
        }
    }
}

/// Parses metric input text in one of the three supported formats.
/// Lines starting with `#` are comments; fields split on commas or
/// whitespace.
pub fn load_metric_input(text: &str, format: InputFormat) -> Result<DistanceInput> {
    match format {
        InputFormat::LowerDistance => parse_lower_distance(text),
        InputFormat::PointCloud => parse_point_cloud(text),
        InputFormat::Sparse => parse_sparse(text),
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn split_fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|f| !f.is_empty())
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("non-numeric token {tok:?}"),
    })
}

fn parse_lower_distance(text: &str) -> Result<DistanceInput> {
    let mut data = Vec::new();
    let mut row = 0usize;
    for (lineno, line) in data_lines(text) {
        row += 1;
        let vals: Vec<f64> = split_fields(line)
            .map(|t| parse_f64(t, lineno))
            .collect::<Result<_>>()?;
        if vals.len() != row {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {row} distances on row {row}, got {}", vals.len()),
            });
        }
        for &v in &vals {
            if v < 0.0 || v.is_nan() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("negative or NaN distance {v}"),
                });
            }
        }
        data.extend_from_slice(&vals);
    }
    let n = row + 1;
    if row == 0 {
        // no data rows: a single point (or empty input, treated as one point)
        return DistanceInput::from_lower_triangular(1, Vec::new());
    }
    DistanceInput::from_lower_triangular(n, data)
}

fn parse_point_cloud(text: &str) -> Result<DistanceInput> {
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut dim: Option<usize> = None;
    for (lineno, line) in data_lines(text) {
        let coords: Vec<f64> = split_fields(line)
            .map(|t| parse_f64(t, lineno))
            .collect::<Result<_>>()?;
        if coords.is_empty() {
            continue;
        }
        match dim {
            None => dim = Some(coords.len()),
            Some(d) if d != coords.len() => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("point has {} coordinates, expected {d}", coords.len()),
                })
            }
            _ => {}
        }
        points.push(coords);
    }
    let n = points.len();
    let mut data = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 1..n {
        for j in 0..i {
            let d2: f64 = points[i]
                .iter()
                .zip(points[j].iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            data.push(d2.sqrt());
        }
    }
    DistanceInput::from_lower_triangular(n, data)
}

fn parse_sparse(text: &str) -> Result<DistanceInput> {
    let mut pairs = Vec::new();
    let mut n = 0usize;
    for (lineno, line) in data_lines(text) {
        let fields: Vec<&str> = split_fields(line).collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected \"i j d\", got {} fields", fields.len()),
            });
        }
        let i: usize = fields[0].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("non-integer index {:?}", fields[0]),
        })?;
        let j: usize = fields[1].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("non-integer index {:?}", fields[1]),
        })?;
        let d = parse_f64(fields[2], lineno)?;
        if d < 0.0 || d.is_nan() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("negative or NaN distance {d}"),
            });
        }
        if i == j {
            return Err(Error::Parse {
                line: lineno,
                msg: "self-distance entries are not allowed".into(),
            });
        }
        n = n.max(i + 1).max(j + 1);
        pairs.push((i, j, d));
    }
    DistanceInput::from_sparse_pairs(n, &pairs)
}
