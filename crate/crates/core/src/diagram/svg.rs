use std::fmt::Write;

use super::model::{Chart, ChartKind, DiagramModel, TagState};

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    /// Side of one grid position in pixels.
    pub cell_size: f64,
    /// Disc radius as a share of half the cell side.
    pub disc_scale: f64,
    pub font_size: f64,
    pub colorbar_width: f64,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            cell_size: 180.0,
            disc_scale: 0.7,
            font_size: 11.0,
            colorbar_width: 90.0,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    cx: f64,
    cy: f64,
    r: f64,
}

impl Frame {
    fn point(&self, p: &[f64; 2]) -> String {
        format!("{:.3},{:.3}", self.cx + self.r * p[0], self.cy - self.r * p[1])
    }

    fn points(&self, ps: &[[f64; 2]]) -> String {
        ps.iter().map(|p| self.point(p)).collect::<Vec<_>>().join(" ")
    }
}

fn tag_class(state: TagState) -> &'static str {
    match state {
        TagState::Neutral => "tag",
        TagState::Green => "tag tag-green",
        TagState::Yellow => "tag tag-yellow",
        TagState::Grey => "tag tag-grey",
    }
}

fn chart(out: &mut String, c: &Chart, style: &SvgStyle, id: usize) {
    let s = style.cell_size;
    let f = Frame {
        cx: c.col as f64 * s + s / 2.0,
        cy: c.row as f64 * s + s / 2.0,
        r: s / 2.0 * style.disc_scale,
    };
    let kind = match c.kind {
        ChartKind::Assessment => "assessment",
        ChartKind::Assignment => "assignment",
        ChartKind::Matching => "matching",
    };
    let _ = writeln!(out, r#"<g class="chart {kind}" data-row="{}" data-col="{}">"#, c.row, c.col);
    if c.kind == ChartKind::Matching {
        let _ = writeln!(
            out,
            r#"<clipPath id="clip{id}"><polygon points="{}"/></clipPath>"#,
            f.points(&c.polygon)
        );
    }
    let _ = writeln!(
        out,
        r#"<circle class="disc" cx="{:.3}" cy="{:.3}" r="{:.3}"/>"#,
        f.cx, f.cy, f.r
    );
    if !c.cells.is_empty() {
        if c.kind == ChartKind::Matching {
            let _ = writeln!(out, r#"<g clip-path="url(#clip{id})">"#);
        } else {
            out.push_str("<g>\n");
        }
        for cell in &c.cells {
            let _ = writeln!(
                out,
                r#"<polygon class="cell" points="{}" fill="{}"/>"#,
                f.points(&cell.vertices),
                cell.color
            );
        }
        out.push_str("</g>\n");
    }
    let d = c.axis_labels.len();
    for (k, name) in c.axis_labels.iter().enumerate() {
        let angle = 2.0 * std::f64::consts::PI * k as f64 / d as f64;
        let tip = [angle.cos(), angle.sin()];
        let label = [1.18 * angle.cos(), 1.18 * angle.sin()];
        let _ = writeln!(
            out,
            r#"<line class="axis" x1="{:.3}" y1="{:.3}" x2="{}"/>"#,
            f.cx,
            f.cy,
            f.point(&tip).replacen(',', r#"" y2=""#, 1)
        );
        if c.kind == ChartKind::Assessment {
            let xy = f.point(&label);
            let (x, y) = xy.split_once(',').unwrap_or(("0", "0"));
            let _ = writeln!(
                out,
                r#"<text class="axis-label" x="{x}" y="{y}" text-anchor="middle">{}</text>"#,
                escape(name)
            );
        }
    }
    let _ = writeln!(out, r#"<polygon class="polygon" points="{}"/>"#, f.points(&c.polygon));
    if let Some(tag) = &c.tag {
        let _ = writeln!(
            out,
            r#"<text class="{}" x="{:.3}" y="{:.3}" text-anchor="middle">{:.3}</text>"#,
            tag_class(tag.state),
            f.cx,
            c.row as f64 * s + s - style.font_size * 0.5,
            tag.value
        );
    }
    out.push_str("</g>\n");
}

/// Renders the diagram as an SVG 1.1 document. Output depends only on the
/// inputs.
pub fn render_svg(dm: &DiagramModel, style: &SvgStyle) -> String {
    let s = style.cell_size;
    let grid_w = dm.cols as f64 * s;
    let width = grid_w + style.colorbar_width;
    let height = dm.rows as f64 * s + if dm.intercept_tags.is_some() { s * 0.2 } else { 0.0 };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(
        out,
        "<style>text{{font-family:sans-serif;font-size:{}px}}.disc{{fill:#ffffff;stroke:#bbbbbb}}.axis{{stroke:#cccccc;stroke-width:0.5}}.cell{{stroke:#888888;stroke-width:0.3}}.polygon{{fill:none;stroke:#000000;stroke-width:1.2}}.tag-green{{fill:#1a9641}}.tag-yellow{{fill:#d9a400}}.tag-grey{{fill:#808080}}</style>",
        style.font_size
    );
    let _ = writeln!(
        out,
        r#"<text class="config-tag" x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
        s / 2.0,
        s / 2.0,
        escape(&dm.config_tag)
    );
    for (c, name) in dm.label_names.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text class="label-name" x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            (c + 1) as f64 * s + s / 2.0,
            style.font_size * 1.2,
            escape(name)
        );
    }
    for (id, c) in dm.charts.iter().enumerate() {
        chart(&mut out, c, style, id);
    }
    if let Some(tags) = &dm.intercept_tags {
        for (c, t) in tags.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<text class="{}" x="{:.3}" y="{:.3}" text-anchor="middle">{:.3}</text>"#,
                tag_class(t.state),
                (c + 1) as f64 * s + s / 2.0,
                dm.rows as f64 * s + s * 0.12,
                t.value
            );
        }
    }
    // colorbar
    let bar_x = grid_w + 10.0;
    let bar_h = (dm.rows as f64 * s - 40.0).max(40.0);
    out.push_str(r#"<defs><linearGradient id="colorbar" x1="0" y1="1" x2="0" y2="0">"#);
    let ticks = &dm.color_map.ticks;
    for (i, t) in ticks.iter().enumerate() {
        let offset = if ticks.len() > 1 { i as f64 / (ticks.len() - 1) as f64 } else { 0.0 };
        let _ = write!(out, r#"<stop offset="{offset:.3}" stop-color="{}"/>"#, t.color);
    }
    out.push_str("</linearGradient></defs>\n");
    let _ = writeln!(
        out,
        r##"<rect class="colorbar" x="{bar_x:.3}" y="20" width="16" height="{bar_h:.3}" fill="url(#colorbar)" stroke="#888888"/>"##
    );
    for (i, t) in ticks.iter().enumerate() {
        let frac = if ticks.len() > 1 { i as f64 / (ticks.len() - 1) as f64 } else { 0.5 };
        let _ = writeln!(
            out,
            r#"<text class="tick" x="{:.3}" y="{:.3}">{:.3}</text>"#,
            bar_x + 20.0,
            20.0 + bar_h * (1.0 - frac) + style.font_size * 0.35,
            t.value
        );
    }
    out.push_str("</svg>\n");
    out
}
