//! Static SVG 1.1 rendering of phase portraits, sweeps and regime maps.
//!
//! Output is a pure function of the input: fixed element order and six
//! decimals for every coordinate.

use std::fmt::Write as _;

use thiserror::Error;

use crate::stability::StabilityClass;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LayoutError {
    #[error("degenerate {axis} range [{lo}, {hi}]")]
    DegenerateRange {
        axis: &'static str,
        lo: f64,
        hi: f64,
    },
    #[error("nothing to draw")]
    Empty,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;

/// Fill color of an equilibrium glyph.
pub fn stability_color(class: StabilityClass) -> &'static str {
    match class {
        StabilityClass::StableNode => "#1b7837",
        StabilityClass::StableFocus => "#5aae61",
        StabilityClass::UnstableNode => "#b2182b",
        StabilityClass::UnstableFocus => "#ef8a62",
        StabilityClass::Saddle => "#2166ac",
        StabilityClass::NonHyperbolic => "#777777",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub class: String,
    pub color: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Glyph {
    /// Extra class, e.g. `interior` or `boundary`.
    pub role: String,
    pub class: StabilityClass,
    pub at: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    /// Drawn in order; each entry is a named layer.
    pub layers: Vec<(String, Vec<Polyline>)>,
    pub glyphs: Vec<Glyph>,
}

fn extent(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo <= hi).then_some((lo, hi))
}

fn check(axis: &'static str, r: (f64, f64)) -> Result<(f64, f64), LayoutError> {
    if r.0.is_finite() && r.1.is_finite() && r.1 > r.0 {
        Ok(r)
    } else {
        Err(LayoutError::DegenerateRange {
            axis,
            lo: r.0,
            hi: r.1,
        })
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

impl Figure {
    fn all_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.layers
            .iter()
            .flat_map(|(_, ls)| ls.iter().flat_map(|l| l.points.iter().copied()))
            .chain(self.glyphs.iter().map(|g| g.at))
    }

    pub fn render(&self) -> Result<String, LayoutError> {
        if self.all_points().next().is_none() {
            return Err(LayoutError::Empty);
        }
        let xr = match self.x_range {
            Some(r) => r,
            None => extent(self.all_points().map(|p| p.0)).ok_or(LayoutError::Empty)?,
        };
        let yr = match self.y_range {
            Some(r) => r,
            None => extent(self.all_points().map(|p| p.1)).ok_or(LayoutError::Empty)?,
        };
        let (x0, x1) = check("x", xr)?;
        let (y0, y1) = check("y", yr)?;
        let sx = (WIDTH - 2.0 * MARGIN) / (x1 - x0);
        let sy = (HEIGHT - 2.0 * MARGIN) / (y1 - y0);
        let px = |x: f64| MARGIN + (x - x0) * sx;
        let py = |y: f64| HEIGHT - MARGIN - (y - y0) * sy;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
        );
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH:.6}" height="{HEIGHT:.6}" viewBox="0 0 {WIDTH:.6} {HEIGHT:.6}">"#
        );
        let _ = writeln!(s, "<title>{}</title>", escape(&self.title));
        let _ = writeln!(
            s,
            r#"<rect class="frame" x="{:.6}" y="{:.6}" width="{:.6}" height="{:.6}" fill="none" stroke="black"/>"#,
            MARGIN,
            MARGIN,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        let _ = writeln!(
            s,
            r#"<clipPath id="plot"><rect x="{:.6}" y="{:.6}" width="{:.6}" height="{:.6}"/></clipPath>"#,
            MARGIN,
            MARGIN,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        for (name, lines) in &self.layers {
            let _ = writeln!(
                s,
                r#"<g class="layer {}" clip-path="url(#plot)">"#,
                escape(name)
            );
            for l in lines {
                let pts: Vec<String> = l
                    .points
                    .iter()
                    .filter(|p| p.0.is_finite() && p.1.is_finite())
                    .map(|&(x, y)| format!("{:.6},{:.6}", px(x), py(y)))
                    .collect();
                if pts.len() < 2 {
                    continue;
                }
                let _ = writeln!(
                    s,
                    r#"<polyline class="{}" fill="none" stroke="{}" stroke-width="1.500000" points="{}"/>"#,
                    escape(&l.class),
                    escape(&l.color),
                    pts.join(" ")
                );
            }
            let _ = writeln!(s, "</g>");
        }
        if !self.glyphs.is_empty() {
            let _ = writeln!(s, r#"<g class="layer equilibria">"#);
            for g in &self.glyphs {
                let _ = writeln!(
                    s,
                    r#"<circle class="glyph {} {}" cx="{:.6}" cy="{:.6}" r="4.000000" fill="{}" stroke="black"/>"#,
                    escape(&g.role),
                    g.class.label(),
                    px(g.at.0),
                    py(g.at.1),
                    stability_color(g.class)
                );
            }
            let _ = writeln!(s, "</g>");
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.6}" y="{:.6}" text-anchor="middle" font-size="12">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="14.000000" y="{:.6}" text-anchor="middle" font-size="12" transform="rotate(-90 14.000000 {:.6})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        let ticks = [(x0, y0), (x1, y0)];
        for (i, (x, _)) in ticks.iter().enumerate() {
            let anchor = if i == 0 { "start" } else { "end" };
            let _ = writeln!(
                s,
                r#"<text class="tick" x="{:.6}" y="{:.6}" text-anchor="{anchor}" font-size="10">{:.6}</text>"#,
                px(*x),
                HEIGHT - MARGIN + 14.0,
                x
            );
        }
        for y in [y0, y1] {
            let _ = writeln!(
                s,
                r#"<text class="tick" x="{:.6}" y="{:.6}" text-anchor="end" font-size="10">{:.6}</text>"#,
                MARGIN - 4.0,
                py(y),
                y
            );
        }
        let _ = writeln!(s, "</svg>");
        Ok(s)
    }
}
