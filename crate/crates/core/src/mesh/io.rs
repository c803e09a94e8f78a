//! Mesh readers.
//!
//! Two text formats are understood:
//!
//! * OFF: an `OFF` header, a counts line `n_vertices n_faces n_edges`, one
//!   `x y z` row per vertex and one `3 i j k` row per face.
//! * node-element: a header `n_vertices m` (optionally prefixed by `#`), one
//!   row of `m` coordinates per vertex, a blank line, then one row of `d + 1`
//!   zero-based vertex indices per element.
//!
//! `#` starts a comment in OFF files. Parse errors carry 1-based line and
//! column numbers.

use std::path::Path;

use super::Mesh;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    NodeElement,
}

impl MeshFormat {
    /// `.off` selects OFF; anything else is read as node-element text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("off") => MeshFormat::Off,
            _ => MeshFormat::NodeElement,
        }
    }
}

pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        MeshFormat::Off => parse_off(&text),
        MeshFormat::NodeElement => parse_node_element(&text),
    }
}

struct Field<'a> {
    line: usize,
    column: usize,
    text: &'a str,
}

impl Field<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    fn float(&self) -> Result<f64> {
        self.text
            .parse::<f64>()
            .map_err(|_| self.error(format!("expected a number, found `{}`", self.text)))
    }

    fn index(&self) -> Result<usize> {
        self.text
            .parse::<usize>()
            .map_err(|_| self.error(format!("expected a non-negative integer, found `{}`", self.text)))
    }
}

/// Splits one line into whitespace-separated fields with their columns.
fn fields(line_no: usize, line: &str) -> Vec<Field<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (pos, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(pos),
            (true, Some(s)) => {
                out.push(Field {
                    line: line_no,
                    column: line[..s].chars().count() + 1,
                    text: &line[s..pos],
                });
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

fn eof(line: usize, what: &str) -> Error {
    Error::Parse {
        line,
        column: 1,
        message: format!("unexpected end of file while reading {what}"),
    }
}

pub fn parse_off(text: &str) -> Result<Mesh> {
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l)))
        .filter(|(_, l)| !l.trim().is_empty());
    let last_line = text.lines().count().max(1);

    let (ln, header) = rows.next().ok_or_else(|| eof(last_line, "the OFF header"))?;
    let header = fields(ln, header);
    if header.first().map(|f| f.text) != Some("OFF") {
        return Err(header[0].error("expected `OFF` header"));
    }
    // Counts may follow the keyword on the same line.
    let counts: Vec<Field> = if header.len() > 1 {
        header.into_iter().skip(1).collect()
    } else {
        let (ln, l) = rows.next().ok_or_else(|| eof(last_line, "the counts line"))?;
        fields(ln, l)
    };
    if counts.len() < 2 {
        let at = counts.first().map_or((ln, 1), |f| (f.line, f.column));
        return Err(Error::Parse {
            line: at.0,
            column: at.1,
            message: "expected `n_vertices n_faces [n_edges]`".into(),
        });
    }
    let n_vertices = counts[0].index()?;
    let n_faces = counts[1].index()?;

    let mut vertices = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let (ln, l) = rows.next().ok_or_else(|| eof(last_line, "vertices"))?;
        let f = fields(ln, l);
        if f.len() < 3 {
            return Err(Error::Parse {
                line: ln,
                column: 1,
                message: format!("vertex row needs 3 coordinates, found {}", f.len()),
            });
        }
        vertices.push([f[0].float()?, f[1].float()?, f[2].float()?]);
    }
    let mut elements = Vec::with_capacity(3 * n_faces);
    for _ in 0..n_faces {
        let (ln, l) = rows.next().ok_or_else(|| eof(last_line, "faces"))?;
        let f = fields(ln, l);
        let k = f[0].index()?;
        if k != 3 {
            return Err(f[0].error(format!("only triangular faces are supported, found {k}-gon")));
        }
        if f.len() < 4 {
            return Err(f[f.len() - 1].error("face row needs 3 vertex indices"));
        }
        for field in &f[1..4] {
            elements.push(field.index()?);
        }
    }
    let embed_dim = if vertices.iter().all(|p| p[2] == 0.0) { 2 } else { 3 };
    Mesh::new(2, embed_dim, vertices, elements)
}

pub fn parse_node_element(text: &str) -> Result<Mesh> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    let mut cursor = lines.iter().skip_while(|(_, l)| l.trim().is_empty());
    let last_line = lines.len().max(1);

    let &(ln, header) = cursor.next().ok_or_else(|| eof(last_line, "the header"))?;
    let header = header.trim_start().trim_start_matches('#');
    let head = fields(ln, header);
    if head.len() != 2 {
        return Err(Error::Parse {
            line: ln,
            column: 1,
            message: "expected header `n_vertices m`".into(),
        });
    }
    let n_vertices = head[0].index()?;
    let m = head[1].index()?;
    if !(1..=3).contains(&m) {
        return Err(head[1].error(format!("coordinate dimension {m} not in 1..=3")));
    }

    let mut vertices = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let &(ln, l) = cursor.next().ok_or_else(|| eof(last_line, "vertices"))?;
        let f = fields(ln, l);
        if f.len() != m {
            return Err(Error::Parse {
                line: ln,
                column: 1,
                message: format!("expected {m} coordinates, found {}", f.len()),
            });
        }
        let mut p = [0.0; 3];
        for (k, field) in f.iter().enumerate() {
            p[k] = field.float()?;
        }
        vertices.push(p);
    }

    let mut elements = Vec::new();
    let mut arity = None;
    for &(ln, l) in cursor {
        if l.trim().is_empty() {
            continue;
        }
        let f = fields(ln, l);
        match arity {
            None => {
                if !(2..=3).contains(&f.len()) || f.len() - 1 > m {
                    return Err(f[0].error(format!(
                        "element rows must hold 2 or 3 indices (at most m + 1), found {}",
                        f.len()
                    )));
                }
                arity = Some(f.len());
            }
            Some(a) if a != f.len() => {
                return Err(f[0].error(format!("expected {a} indices, found {}", f.len())));
            }
            _ => {}
        }
        for field in &f {
            elements.push(field.index()?);
        }
    }
    let arity = arity.ok_or_else(|| eof(last_line, "elements"))?;
    Mesh::new(arity - 1, m, vertices, elements)
}
