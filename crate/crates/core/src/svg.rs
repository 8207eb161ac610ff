//! Static SVG rendering of one view: the heatmap grid, the top (A) and right
//! (B) marginal histograms and an optional brushed overlay.
//!
//! Output is a pure function of its inputs. Coordinates are written with two
//! decimals so the bytes are stable across platforms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::binning::AggregateResult;
use crate::config::{Transform, ViewConfig};
use crate::error::{Error, Result};
use crate::transforms::{cell_positions, preset};

pub const MIN_CELL_PIXEL: u32 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SvgRenderSpec {
    pub cell_pixel: u32,
    /// Sequential palette: `blues` or `greys`.
    pub palette: String,
    pub show_labels: bool,
    pub show_marginals: bool,
}

impl Default for SvgRenderSpec {
    fn default() -> Self {
        SvgRenderSpec {
            cell_pixel: 16,
            palette: "blues".into(),
            show_labels: true,
            show_marginals: true,
        }
    }
}

type Rgb = (f64, f64, f64);

const EMPTY_FILL: &str = "#fff7bc";
const EMPTY_STROKE: &str = "#d9a400";
const LABEL_WIDTH: f64 = 96.0;
const MARGINAL_DEPTH: f64 = 64.0;
const GAP: f64 = 4.0;
const HEATMAP_GAP: f64 = 2.0;

fn palette(id: &str) -> Result<[Rgb; 2]> {
    match id {
        "blues" => Ok([(247.0, 251.0, 255.0), (8.0, 48.0, 107.0)]),
        "greys" => Ok([(255.0, 255.0, 255.0), (37.0, 37.0, 37.0)]),
        other => Err(Error::Spec(format!("unknown palette {other:?}"))),
    }
}

const DIVERGENT: [Rgb; 3] = [(178.0, 24.0, 43.0), (247.0, 247.0, 247.0), (33.0, 102.0, 172.0)];

fn lerp(a: Rgb, b: Rgb, t: f64) -> Rgb {
    (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t, a.2 + (b.2 - a.2) * t)
}

fn hex((r, g, b): Rgb) -> String {
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// HSL lightness in percent.
fn lightness((r, g, b): Rgb) -> f64 {
    let max = r.max(g).max(b) / 255.0;
    let min = r.min(g).min(b) / 255.0;
    (max + min) * 50.0
}

/// Red of the same lightness as `base`.
fn brushed_fill(base: Rgb) -> String {
    format!("hsl(0,80%,{:.1}%)", lightness(base).clamp(20.0, 80.0))
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

fn same_grid(a: &AggregateResult, b: &AggregateResult) -> bool {
    a.columns == b.columns && a.rows == b.rows
}

pub fn render_svg(
    result: &AggregateResult,
    brushed: Option<&AggregateResult>,
    config: &ViewConfig,
    spec: &SvgRenderSpec,
) -> Result<String> {
    if spec.cell_pixel < MIN_CELL_PIXEL {
        return Err(Error::Spec(format!(
            "cell size {} px is below the {MIN_CELL_PIXEL} px minimum",
            spec.cell_pixel
        )));
    }
    let [lo, hi] = palette(&spec.palette)?;
    if let Some(b) = brushed {
        if !same_grid(result, b) {
            return Err(Error::Spec("brushed aggregate has a different grid".into()));
        }
    }
    let divergent =
        config.transform == Transform::Deviation || preset(&config.color_scale).is_some_and(|p| p.divergent);
    let color = |t: f64| -> Rgb {
        if divergent {
            if t < 0.5 {
                lerp(DIVERGENT[0], DIVERGENT[1], t * 2.0)
            } else {
                lerp(DIVERGENT[1], DIVERGENT[2], t * 2.0 - 1.0)
            }
        } else {
            lerp(lo, hi, t)
        }
    };

    let cols: Vec<usize> = (0..result.columns.len())
        .filter(|&c| result.show_empty_a || result.columns[c].element.is_some())
        .collect();
    let rows: Vec<usize> = (0..result.rows.len())
        .filter(|&r| result.show_empty_b || result.rows[r].element.is_some())
        .collect();
    let cp = f64::from(spec.cell_pixel);
    let marg = if spec.show_marginals { MARGINAL_DEPTH + GAP } else { 0.0 };
    let labels = if spec.show_labels { LABEL_WIDTH } else { 0.0 };
    let x0 = labels;
    let y0 = marg;
    // offsets of each visible bin, with a gap between element heatmaps
    let offsets = |bins: &[usize], axis: &[crate::config::AxisBin]| -> (Vec<f64>, f64) {
        let mut out = Vec::with_capacity(bins.len());
        let mut pos = 0.0;
        for (i, &b) in bins.iter().enumerate() {
            if i > 0 && axis[bins[i - 1]].element != axis[b].element {
                pos += HEATMAP_GAP;
            }
            out.push(pos);
            pos += cp;
        }
        (out, pos)
    };
    let (col_off, grid_w) = offsets(&cols, &result.columns);
    let (row_off, grid_h) = offsets(&rows, &result.rows);
    let width = x0 + grid_w + marg;
    let height = y0 + grid_h + labels;
    // rows grow upwards: row index 0 sits at the bottom
    let col_x = |i: usize| x0 + col_off[i];
    let row_y = |j: usize| y0 + grid_h - row_off[j] - cp;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}" font-family="sans-serif" font-size="{:.2}">"#,
        (cp * 0.75).min(11.0)
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);

    let positions = cell_positions(result, config);
    let nrows = result.rows.len();
    let _ = writeln!(s, r#"<g class="grid">"#);
    for (i, &c) in cols.iter().enumerate() {
        for (j, &r) in rows.iter().enumerate() {
            let (x, y) = (col_x(i), row_y(j));
            let value = result.cell(c, r);
            let title = escape(&format!(
                "{} / {}: {}",
                result.columns[c].label, result.rows[r].label, value
            ));
            match positions[c * nrows + r] {
                None => {
                    let _ = writeln!(
                        s,
                        r#"<g class="empty"><rect x="{x:.2}" y="{y:.2}" width="{cp:.2}" height="{cp:.2}" fill="{EMPTY_FILL}"/><line x1="{x:.2}" y1="{:.2}" x2="{:.2}" y2="{y:.2}" stroke="{EMPTY_STROKE}" stroke-width="1"/><title>{title}</title></g>"#,
                        y + cp,
                        x + cp
                    );
                }
                Some(t) => {
                    let base = color(t);
                    let _ = writeln!(
                        s,
                        r#"<rect class="cell" x="{x:.2}" y="{y:.2}" width="{cp:.2}" height="{cp:.2}" fill="{}"><title>{title}</title></rect>"#,
                        hex(base)
                    );
                    if let Some(b) = brushed {
                        let part = b.cell(c, r);
                        if part.is_positive() {
                            let frac = (part.clone() / value.clone()).to_f64().clamp(0.0, 1.0);
                            let h = cp * frac;
                            let _ = writeln!(
                                s,
                                r#"<rect class="brushed" x="{x:.2}" y="{:.2}" width="{cp:.2}" height="{h:.2}" fill="{}"/>"#,
                                y + cp - h,
                                brushed_fill(base)
                            );
                        }
                    }
                }
            }
        }
    }
    let _ = writeln!(s, "</g>");

    if spec.show_marginals {
        let max_of =
            |m: &[crate::MarginalBin], idx: &[usize]| idx.iter().map(|&i| m[i].value.to_f64()).fold(0.0, f64::max);
        let max_a = max_of(&result.marginal_a, &cols);
        let max_b = max_of(&result.marginal_b, &rows);
        let bar_fill = hex(lerp(lo, hi, 0.6));
        let brush_fill = brushed_fill(lerp(lo, hi, 0.6));
        let scale = |v: f64, max: f64| if max > 0.0 { MARGINAL_DEPTH * v / max } else { 0.0 };

        let _ = writeln!(s, r#"<g class="marginal-a">"#);
        for (i, &c) in cols.iter().enumerate() {
            let m = &result.marginal_a[c];
            let h = scale(m.value.to_f64(), max_a);
            let x = col_x(i);
            let label = escape(&m.label(&result.columns[c]));
            let _ = writeln!(
                s,
                r#"<rect class="bar" x="{:.2}" y="{:.2}" width="{:.2}" height="{h:.2}" fill="{bar_fill}"><title>{label}</title></rect>"#,
                x + 1.0,
                MARGINAL_DEPTH - h,
                cp - 2.0
            );
            if let Some(b) = brushed {
                let hb = scale(b.marginal_a[c].value.to_f64(), max_a);
                if b.marginal_a[c].value.is_positive() {
                    let _ = writeln!(
                        s,
                        r#"<rect class="brushed" x="{:.2}" y="{:.2}" width="{:.2}" height="{hb:.2}" fill="{brush_fill}"/>"#,
                        x + 1.0,
                        MARGINAL_DEPTH - hb,
                        cp - 2.0
                    );
                }
            }
            if spec.show_labels {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
                    x + cp / 2.0,
                    (MARGINAL_DEPTH - h - 2.0).max(8.0)
                );
            }
        }
        let _ = writeln!(s, "</g>");

        let _ = writeln!(s, r#"<g class="marginal-b">"#);
        let bx = x0 + grid_w + GAP;
        for (j, &r) in rows.iter().enumerate() {
            let m = &result.marginal_b[r];
            let w = scale(m.value.to_f64(), max_b);
            let y = row_y(j);
            let label = escape(&m.label(&result.rows[r]));
            let _ = writeln!(
                s,
                r#"<rect class="bar" x="{bx:.2}" y="{:.2}" width="{w:.2}" height="{:.2}" fill="{bar_fill}"><title>{label}</title></rect>"#,
                y + 1.0,
                cp - 2.0
            );
            if let Some(b) = brushed {
                if b.marginal_b[r].value.is_positive() {
                    let wb = scale(b.marginal_b[r].value.to_f64(), max_b);
                    let _ = writeln!(
                        s,
                        r#"<rect class="brushed" x="{bx:.2}" y="{:.2}" width="{wb:.2}" height="{:.2}" fill="{brush_fill}"/>"#,
                        y + 1.0,
                        cp - 2.0
                    );
                }
            }
            if spec.show_labels {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.2}" y="{:.2}">{label}</text>"#,
                    bx + w + 2.0,
                    y + cp * 0.75
                );
            }
        }
        let _ = writeln!(s, "</g>");
    }

    if spec.show_labels {
        let _ = writeln!(s, r#"<g class="labels">"#);
        for (i, &c) in cols.iter().enumerate() {
            let x = col_x(i) + cp * 0.7;
            let y = y0 + grid_h + GAP;
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{y:.2}" transform="rotate(90 {x:.2} {y:.2})">{}</text>"#,
                escape(&result.columns[c].label)
            );
        }
        for (j, &r) in rows.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - GAP,
                row_y(j) + cp * 0.75,
                escape(&result.rows[r].label)
            );
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    Ok(s)
}
