//! Labeled numeric matrices, written as CSV or rendered as an SVG heatmap.

use std::fmt::Write as _;
use std::io::Write;

use crate::BenchError;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    /// Row-major; `None` marks an empty cell.
    pub cells: Vec<Vec<Option<f64>>>,
}

impl Matrix {
    pub fn from_fn(rows: Vec<String>, cols: Vec<String>, f: impl Fn(usize, usize) -> Option<f64>) -> Self {
        let cells = (0..rows.len())
            .map(|r| (0..cols.len()).map(|c| f(r, c)).collect())
            .collect();
        Self { rows, cols, cells }
    }

    pub fn get(&self, row: &str, col: &str) -> Option<f64> {
        let r = self.rows.iter().position(|x| x == row)?;
        let c = self.cols.iter().position(|x| x == col)?;
        self.cells[r][c]
    }

    /// First column holds the row labels; empty cells are blank.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), BenchError> {
        let err = |e: csv::Error| BenchError::Schema(e.to_string());
        let mut out = csv::Writer::from_writer(writer);
        let mut header = vec![String::new()];
        header.extend(self.cols.iter().cloned());
        out.write_record(&header).map_err(err)?;
        for (label, row) in self.rows.iter().zip(&self.cells) {
            let mut line = vec![label.clone()];
            line.extend(row.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            out.write_record(&line).map_err(err)?;
        }
        out.flush().map_err(|e| BenchError::Schema(e.to_string()))
    }

    /// A plain SVG heatmap: white (low) to dark green (high) over the
    /// matrix's own range, with the value printed in each cell.
    pub fn to_svg(&self, title: &str, decimals: usize) -> String {
        const CELL_W: usize = 110;
        const CELL_H: usize = 34;
        const LABEL_W: usize = 150;
        const HEADER_H: usize = 70;

        let values: Vec<f64> = self.cells.iter().flatten().flatten().copied().collect();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shade = |v: f64| {
            let t = if hi > lo { (v - lo) / (hi - lo) } else { 1.0 };
            let mix = |light: f64, dark: f64| (light + (dark - light) * t).round() as u8;
            (mix(247.0, 0.0), mix(252.0, 109.0), mix(245.0, 44.0), t)
        };

        let width = LABEL_W + CELL_W * self.cols.len() + 10;
        let height = HEADER_H + CELL_H * self.rows.len() + 10;
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<text x="10" y="20" font-size="14" font-weight="bold">{}</text>"#, escape(title));
        for (c, col) in self.cols.iter().enumerate() {
            let x = LABEL_W + c * CELL_W + CELL_W / 2;
            let _ = writeln!(svg, r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#, HEADER_H - 10, escape(col));
        }
        for (r, row) in self.rows.iter().enumerate() {
            let y = HEADER_H + r * CELL_H;
            let _ = writeln!(
                svg,
                r#"<text x="10" y="{}" dominant-baseline="middle">{}</text>"#,
                y + CELL_H / 2,
                escape(row)
            );
            for (c, value) in self.cells[r].iter().enumerate() {
                let x = LABEL_W + c * CELL_W;
                match value {
                    Some(v) => {
                        let (red, green, blue, t) = shade(*v);
                        let ink = if t > 0.55 { "white" } else { "black" };
                        let _ = writeln!(
                            svg,
                            r#"<rect x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="rgb({red},{green},{blue})" stroke="white"/>"#
                        );
                        let _ = writeln!(
                            svg,
                            r#"<text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" fill="{ink}">{v:.decimals$}</text>"#,
                            x + CELL_W / 2,
                            y + CELL_H / 2
                        );
                    }
                    None => {
                        let _ = writeln!(
                            svg,
                            r##"<rect x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="#eeeeee" stroke="white"/>"##
                        );
                    }
                }
            }
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
