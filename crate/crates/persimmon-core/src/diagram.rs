//! Persistence diagrams: data model, text I/O, diagonal projection.

use crate::error::{Error, Result};

/// A multiset of birth/death pairs for one homology dimension. Finite pairs
/// sit strictly above the diagonal; infinite bars store only their birth.
/// Multiplicity is encoded by repetition.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PersistenceDiagram {
    pub dim: u32,
    pub finite: Vec<(f64, f64)>,
    pub infinite: Vec<f64>,
}

impl PersistenceDiagram {
    pub fn new(dim: u32) -> Self {
        PersistenceDiagram {
            dim,
            finite: Vec::new(),
            infinite: Vec::new(),
        }
    }

    /// Canonical order: finite pairs by (birth, death), then infinite births.
    pub fn sort(&mut self) {
        self.finite
            .sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        self.infinite.sort_by(f64::total_cmp);
    }

    pub fn is_empty(&self) -> bool {
        self.finite.is_empty() && self.infinite.is_empty()
    }
}

/// Orthogonal projection onto the diagonal and the l2 distance to it.
pub fn project_to_diagonal(p: (f64, f64)) -> ((f64, f64), f64) {
    let m = 0.5 * (p.0 + p.1);
    let dist = (p.1 - p.0).abs() / std::f64::consts::SQRT_2;
    ((m, m), dist)
}

/// Parses diagram text: one `birth death` pair per line, `inf` (or `infinity`)
/// for an infinite death, `#` comments. Finite lines require death > birth.
pub fn read_diagram(text: &str, dim: u32) -> Result<PersistenceDiagram> {
    let mut diagram = PersistenceDiagram::new(dim);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = lineno + 1;
        let fields: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected \"birth death\", got {} fields", fields.len()),
            });
        }
        let birth: f64 = fields[0].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("non-numeric birth {:?}", fields[0]),
        })?;
        let death_tok = fields[1].to_ascii_lowercase();
        if death_tok == "inf" || death_tok == "infinity" {
            diagram.infinite.push(birth);
            continue;
        }
        let death: f64 = fields[1].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("non-numeric death {:?}", fields[1]),
        })?;
        if death == f64::INFINITY {
            diagram.infinite.push(birth);
            continue;
        }
        if death <= birth {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("death {death} <= birth {birth}"),
            });
        }
        diagram.finite.push((birth, death));
    }
    Ok(diagram)
}

/// Serializes a diagram losslessly (shortest round-tripping float form).
pub fn write_diagram(diagram: &PersistenceDiagram) -> String {
    let mut out = String::new();
    for &(b, d) in &diagram.finite {
        out.push_str(&format!("{b:?} {d:?}\n"));
    }
    for &b in &diagram.infinite {
        out.push_str(&format!("{b:?} inf\n"));
    }
    out
}
