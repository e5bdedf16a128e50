//! Text and SVG diagrams of matrices, built blockchains and primed families.
//! Output depends only on the input, so rerenders are byte-identical.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::blockchain::BlockchainResult;
use crate::conditions::MatrixCondition;
use crate::error::{Error, Result};
use crate::surgery::{good_points, PrimedFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderFormat {
    Ascii,
    Svg,
}

impl FromStr for RenderFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ascii" => Ok(RenderFormat::Ascii),
            "svg" => Ok(RenderFormat::Svg),
            other => Err(Error::Validation(format!("unknown render format `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Cell {
    bit: Option<bool>,
    hatched: bool,
}

#[derive(Clone, Debug, Default)]
struct Row {
    cells: Vec<Cell>,
    left: String,
    right: String,
}

#[derive(Clone, Debug, Default)]
struct Grid {
    title: String,
    columns: Vec<String>,
    rows: Vec<Row>,
    /// Column positions after which a vertical rule is drawn.
    rules: Vec<usize>,
}

fn uniform_rows(m: &MatrixCondition) -> Result<Vec<Vec<bool>>> {
    if !m.is_uniform() {
        return Err(Error::Domain("cannot render a matrix whose columns differ in length".into()));
    }
    Ok((0..m.height())
        .map(|r| m.row(r).into_iter().map(|b| b.unwrap_or(false)).collect())
        .collect())
}

/// A bare matrix, one cell per bit.
pub fn render_matrix(m: &MatrixCondition, format: RenderFormat) -> Result<String> {
    let rows = uniform_rows(m)?;
    let grid = Grid {
        title: format!("matrix over {}", m.index_set()),
        columns: m.index_set().iter().map(|i| i.to_string()).collect(),
        rows: rows
            .into_iter()
            .map(|bits| Row {
                cells: bits.into_iter().map(|b| Cell { bit: Some(b), hatched: false }).collect(),
                ..Row::default()
            })
            .collect(),
        rules: Vec::new(),
    };
    Ok(emit(&grid, format))
}

/// A built blockchain: cells in the active set of their block are hatched,
/// blocks are labelled by step, and marker and bit rows carry payload indices.
pub fn render_blockchain(result: &BlockchainResult, format: RenderFormat) -> Result<String> {
    let bits = uniform_rows(&result.matrix)?;
    let labels: Vec<usize> = result.matrix.index_set().to_vec();
    let mut rows: Vec<Row> = bits
        .into_iter()
        .map(|b| Row {
            cells: b.into_iter().map(|bit| Cell { bit: Some(bit), hatched: false }).collect(),
            ..Row::default()
        })
        .collect();
    for rec in &result.step_log {
        for r in rec.start..rec.end.min(rows.len()) {
            for (c, label) in labels.iter().enumerate() {
                rows[r].cells[c].hatched = rec.active.contains(*label);
            }
        }
        if let Some(row) = rows.get_mut(rec.start) {
            row.left = format!("{} {}", rec.step, rec.kind);
        }
    }
    for log in &result.marker_log {
        for e in &log.entries {
            if let Some(row) = rows.get_mut(e.marker_row) {
                row.right = format!("marker z[{}] on {}", e.payload_index, log.columns);
            }
            if let Some(row) = rows.get_mut(e.bit_row) {
                row.right = format!("z[{}] = {}", e.payload_index, u8::from(e.bit));
            }
        }
    }
    let kind = match result.kind {
        crate::blockchain::BuildKind::Pair => "pair",
        crate::blockchain::BuildKind::Mostowski => "mostowski",
        crate::blockchain::BuildKind::General => "general",
    };
    let grid = Grid {
        title: format!("{kind} blockchain, payload {}", result.payload),
        columns: labels.iter().map(|i| i.to_string()).collect(),
        rows,
        rules: Vec::new(),
    };
    Ok(emit(&grid, format))
}

/// The priming picture: `y`, the originals, then the primed columns with
/// every changed-by-rule cell hatched and each row's case on the right.
pub fn render_primed(p: &PrimedFamily, format: RenderFormat) -> Result<String> {
    let n = p.originals.len();
    let len = p.reference.len();
    let gp = good_points(&p.reference);
    let mut columns = vec!["y".to_string()];
    columns.extend((0..n).map(|k| format!("x{k}")));
    columns.extend((0..n).map(|k| format!("x{k}'")));
    let rows = (0..len)
        .map(|i| {
            let inactive = p.inactive_at(i);
            let mut cells = vec![Cell { bit: p.reference.get(i), hatched: false }];
            cells.extend(p.originals.iter().map(|x| Cell { bit: x.get(i), hatched: false }));
            cells.extend(p.primed.iter().enumerate().map(|(k, x)| Cell {
                bit: x.get(i),
                hatched: gp.good.contains(&i) || gp.coding.contains(&i) || inactive == Some(k),
            }));
            let right = if gp.good.contains(&i) {
                "G".to_string()
            } else if gp.coding.contains(&i) {
                "C".to_string()
            } else {
                inactive.map_or_else(String::new, |k| format!("x{k} inactive"))
            };
            Row {
                cells,
                left: i.to_string(),
                right,
            }
        })
        .collect();
    let grid = Grid {
        title: format!("priming {n} reals against y"),
        columns,
        rows,
        rules: vec![1, 1 + n],
    };
    Ok(emit(&grid, format))
}

fn emit(grid: &Grid, format: RenderFormat) -> String {
    match format {
        RenderFormat::Ascii => ascii(grid),
        RenderFormat::Svg => svg(grid),
    }
}

fn ascii(grid: &Grid) -> String {
    let left = grid.rows.iter().map(|r| r.left.chars().count()).max().unwrap_or(0);
    let width = grid.columns.iter().map(|c| c.chars().count()).max().unwrap_or(1).max(1) + 1;
    let mut out = String::new();
    let _ = writeln!(out, "{}", grid.title);
    let rule = |c: usize| if grid.rules.contains(&c) { "|" } else { "" };
    let mut header = format!("{:left$} ", "");
    for (c, name) in grid.columns.iter().enumerate() {
        let _ = write!(header, "{}{name:>width$}", rule(c));
    }
    if !grid.columns.is_empty() {
        let _ = writeln!(out, "{}", header.trim_end());
    }
    for row in &grid.rows {
        let mut line = format!("{:>left$} ", row.left);
        for (c, cell) in row.cells.iter().enumerate() {
            let glyph = match (cell.bit, cell.hatched) {
                (None, _) => " ".to_string(),
                (Some(b), false) => u8::from(b).to_string(),
                (Some(true), true) => "#".to_string(),
                (Some(false), true) => "/".to_string(),
            };
            let _ = write!(line, "{}{glyph:>width$}", rule(c));
        }
        if !row.right.is_empty() {
            let _ = write!(line, "  {}", row.right);
        }
        let _ = writeln!(out, "{}", line.trim_end());
    }
    if grid.rows.iter().any(|r| r.cells.iter().any(|c| c.hatched)) {
        let _ = writeln!(out, "hatched: # is 1, / is 0");
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn svg(grid: &Grid) -> String {
    const CELL: usize = 18;
    const CHAR: usize = 7;
    let left = grid.rows.iter().map(|r| r.left.len()).max().unwrap_or(0) * CHAR + 8;
    let right = grid.rows.iter().map(|r| r.right.len()).max().unwrap_or(0) * CHAR + 8;
    let top = 2 * CELL + 4;
    let w = left + grid.columns.len() * CELL + right;
    let h = top + grid.rows.len() * CELL + 4;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="monospace" font-size="11">"#
    );
    let _ = writeln!(
        out,
        r##"<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)"><line x1="0" y1="0" x2="0" y2="6" stroke="#999" stroke-width="2"/></pattern></defs>"##
    );
    let _ = writeln!(out, r#"<text x="4" y="{}">{}</text>"#, CELL - 4, escape(&grid.title));
    for (c, name) in grid.columns.iter().enumerate() {
        let x = left + c * CELL + CELL / 2;
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            2 * CELL - 2,
            escape(name)
        );
    }
    for (r, row) in grid.rows.iter().enumerate() {
        let y = top + r * CELL;
        if !row.left.is_empty() {
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                left - 4,
                y + CELL - 5,
                escape(&row.left)
            );
        }
        for (c, cell) in row.cells.iter().enumerate() {
            let x = left + c * CELL;
            let fill = if cell.hatched { "url(#hatch)" } else { "none" };
            let _ = writeln!(
                out,
                r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="black" stroke-width="0.5"/>"#
            );
            if let Some(b) = cell.bit {
                let _ = writeln!(
                    out,
                    r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                    x + CELL / 2,
                    y + CELL - 5,
                    u8::from(b)
                );
            }
        }
        if !row.right.is_empty() {
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}">{}</text>"#,
                left + grid.columns.len() * CELL + 6,
                y + CELL - 5,
                escape(&row.right)
            );
        }
    }
    for &c in &grid.rules {
        let x = left + c * CELL;
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black" stroke-width="2"/>"#,
            top,
            top + grid.rows.len() * CELL
        );
    }
    out.push_str("</svg>\n");
    out
}
