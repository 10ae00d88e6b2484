//! Plot scenes and their deterministic SVG serialization.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::web::DomainBox;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("scene has neither polylines nor markers")]
    EmptyScene,
    #[error("polyline {index} has no vertices")]
    EmptyPolyline { index: usize },
    #[error("non-finite coordinate in {what}")]
    NonFinite { what: String },
    #[error("viewport must have positive area")]
    DegenerateViewport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolylineKind {
    Leaf,
    Discriminant,
    Reference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenePolyline {
    pub kind: PolylineKind,
    /// Leaf family 1, 2 or 3; 0 when the polyline belongs to no family.
    pub tag: u8,
    pub points: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub x: f64,
    pub y: f64,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotScene {
    pub viewport: DomainBox,
    pub polylines: Vec<ScenePolyline>,
    pub markers: Vec<Marker>,
}

impl PlotScene {
    pub fn new(viewport: DomainBox) -> Self {
        PlotScene {
            viewport,
            polylines: Vec::new(),
            markers: Vec::new(),
        }
    }

    /// Checks that every coordinate is finite and no polyline is empty.
    pub fn validate(&self) -> Result<(), RenderError> {
        let v = &self.viewport;
        if !(v.xmax > v.xmin && v.ymax > v.ymin) {
            return Err(RenderError::DegenerateViewport);
        }
        for (index, pl) in self.polylines.iter().enumerate() {
            if pl.points.is_empty() {
                return Err(RenderError::EmptyPolyline { index });
            }
            if pl.points.iter().flatten().any(|c| !c.is_finite()) {
                return Err(RenderError::NonFinite {
                    what: format!("polyline {index}"),
                });
            }
        }
        for (i, m) in self.markers.iter().enumerate() {
            if !(m.x.is_finite() && m.y.is_finite()) {
                return Err(RenderError::NonFinite {
                    what: format!("marker {i}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StyleSpec {
    /// Pixel width of the drawing; the height follows the viewport aspect ratio.
    pub width: f64,
    pub margin: f64,
    pub stroke_width: f64,
    pub family_colors: [String; 3],
    pub discriminant_color: String,
    pub reference_color: String,
    pub marker_radius: f64,
    pub font_size: f64,
}

impl Default for StyleSpec {
    fn default() -> Self {
        StyleSpec {
            width: 600.0,
            margin: 20.0,
            stroke_width: 1.0,
            family_colors: ["#1f77b4".into(), "#d62728".into(), "#2ca02c".into()],
            discriminant_color: "#000000".into(),
            reference_color: "#7f7f7f".into(),
            marker_radius: 4.0,
            font_size: 11.0,
        }
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Standalone SVG document for `scene`. Coordinates are written with six decimals and the
/// y axis points up.
pub fn render_svg(scene: &PlotScene, style: &StyleSpec) -> Result<String, RenderError> {
    scene.validate()?;
    if scene.polylines.is_empty() && scene.markers.is_empty() {
        return Err(RenderError::EmptyScene);
    }
    let v = &scene.viewport;
    let inner_w = style.width - 2.0 * style.margin;
    let inner_h = inner_w * v.height() / v.width();
    let height = inner_h + 2.0 * style.margin;
    let sx = |x: f64| style.margin + (x - v.xmin) / v.width() * inner_w;
    let sy = |y: f64| style.margin + (v.ymax - y) / v.height() * inner_h;

    let mut s = String::new();
    // writing into a String cannot fail
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?>"#
    );
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{:.6}" height="{:.6}" viewBox="0 0 {:.6} {:.6}">"#,
        style.width, height, style.width, height
    );
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="viewport"><rect x="{:.6}" y="{:.6}" width="{:.6}" height="{:.6}"/></clipPath></defs>"#,
        style.margin, style.margin, inner_w, inner_h
    );
    let _ = writeln!(
        s,
        r##"<rect x="{:.6}" y="{:.6}" width="{:.6}" height="{:.6}" fill="#ffffff" stroke="#000000" stroke-width="{:.6}"/>"##,
        style.margin, style.margin, inner_w, inner_h, style.stroke_width
    );
    let _ = writeln!(
        s,
        r#"<g clip-path="url(#viewport)" fill="none" stroke-linejoin="round">"#
    );
    for pl in &scene.polylines {
        let (color, extra) = match pl.kind {
            PolylineKind::Leaf => {
                let i = usize::from(pl.tag.clamp(1, 3)) - 1;
                (style.family_colors[i].as_str(), String::new())
            }
            PolylineKind::Discriminant => (
                style.discriminant_color.as_str(),
                format!(
                    r#" stroke-dasharray="{:.6} {:.6}""#,
                    4.0 * style.stroke_width,
                    3.0 * style.stroke_width
                ),
            ),
            PolylineKind::Reference => (style.reference_color.as_str(), String::new()),
        };
        let mut d = String::new();
        for (i, p) in pl.points.iter().enumerate() {
            let _ = write!(
                d,
                "{}{:.6} {:.6}",
                if i == 0 { "M" } else { " L" },
                sx(p[0]),
                sy(p[1])
            );
        }
        let width = if pl.kind == PolylineKind::Discriminant {
            1.5 * style.stroke_width
        } else {
            style.stroke_width
        };
        let _ = writeln!(
            s,
            r#"<path d="{d}" stroke="{}" stroke-width="{:.6}"{extra} data-kind="{}" data-tag="{}"/>"#,
            escape(color),
            width,
            match pl.kind {
                PolylineKind::Leaf => "leaf",
                PolylineKind::Discriminant => "discriminant",
                PolylineKind::Reference => "reference",
            },
            pl.tag
        );
    }
    let _ = writeln!(s, "</g>");
    for m in &scene.markers {
        let (cx, cy) = (sx(m.x), sy(m.y));
        let _ = writeln!(
            s,
            r##"<circle cx="{cx:.6}" cy="{cy:.6}" r="{:.6}" fill="#ffffff" stroke="#000000" stroke-width="{:.6}"/>"##,
            style.marker_radius, style.stroke_width
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.6}" y="{:.6}" font-family="sans-serif" font-size="{:.6}">{}</text>"#,
            cx + 1.5 * style.marker_radius,
            cy - 1.5 * style.marker_radius,
            style.font_size,
            escape(&m.label)
        );
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene() -> PlotScene {
        let mut sc = PlotScene::new(DomainBox::symmetric(1.0));
        for tag in 1..=3 {
            sc.polylines.push(ScenePolyline {
                kind: PolylineKind::Leaf,
                tag,
                points: vec![[-1.0, 0.1 * tag as f64], [1.0, 0.2]],
            });
        }
        sc
    }

    #[test]
    fn one_path_per_polyline() {
        let svg = render_svg(&scene(), &StyleSpec::default()).unwrap();
        assert_eq!(svg.matches("<path").count(), 3);
        assert_eq!(svg, render_svg(&scene(), &StyleSpec::default()).unwrap());
    }

    #[test]
    fn y_axis_points_up() {
        let svg = render_svg(&scene(), &StyleSpec::default()).unwrap();
        // 560 px across a box of width 2, so y = 0.1 sits 252 px below the top edge
        assert!(
            svg.contains("M20.000000 272.000000 L580.000000 244.000000"),
            "{svg}"
        );
    }

    #[test]
    fn rejects_empty_and_nan() {
        let empty = PlotScene::new(DomainBox::symmetric(1.0));
        assert_eq!(
            render_svg(&empty, &StyleSpec::default()),
            Err(RenderError::EmptyScene)
        );
        let mut bad = scene();
        bad.polylines[1].points[0][1] = f64::NAN;
        assert!(matches!(
            render_svg(&bad, &StyleSpec::default()),
            Err(RenderError::NonFinite { .. })
        ));
    }

    #[test]
    fn labels_are_escaped() {
        let mut sc = PlotScene::new(DomainBox::symmetric(1.0));
        sc.markers.push(Marker {
            x: 0.0,
            y: 0.0,
            label: "a<b & c".into(),
        });
        let svg = render_svg(&sc, &StyleSpec::default()).unwrap();
        assert!(svg.contains("a&lt;b &amp; c"));
    }
}
