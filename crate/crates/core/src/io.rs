//! Polygon documents (JSON), loss traces and profiles (CSV), SVG overlays.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::FitTrace;
use crate::geometry::{BBox, CartesianPolygon, Point};
use crate::resample::DenseRadialProfile;

pub const SCHEMA_VERSION: u32 = 1;
/// Significant digits of numbers written to CSV and SVG.
pub const SIG_DIGITS: usize = 12;
/// SVG viewBox margin as a fraction of the union bbox extent.
const SVG_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonEntry {
    pub id: String,
    pub vertices: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonDocument {
    pub schema_version: u32,
    pub polygons: Vec<PolygonEntry>,
}

impl PolygonDocument {
    pub fn from_polygons(polygons: &[(String, CartesianPolygon)]) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            polygons: polygons
                .iter()
                .map(|(id, p)| PolygonEntry {
                    id: id.clone(),
                    vertices: p.vertices().iter().map(|v| [v.x, v.y]).collect(),
                    origin: None,
                })
                .collect(),
        }
    }

    /// Validated polygons; the first violation is reported with its id.
    pub fn polygons(&self) -> Result<Vec<(String, CartesianPolygon)>> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Document {
                id: "<document>".into(),
                reason: format!(
                    "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                    self.schema_version
                ),
            });
        }
        self.polygons
            .iter()
            .map(|e| {
                let fail = |reason: String| Error::Document {
                    id: e.id.clone(),
                    reason,
                };
                if e.vertices.len() < 3 {
                    return Err(fail(format!(
                        "{} vertices given, length ≥ 3 required",
                        e.vertices.len()
                    )));
                }
                let pts = e.vertices.iter().map(|&[x, y]| Point::new(x, y)).collect();
                let poly = CartesianPolygon::new(pts).map_err(|err| fail(err.to_string()))?;
                Ok((e.id.clone(), poly))
            })
            .collect()
    }
}

fn parse_at(text: &str, path: &Path) -> Result<Vec<(String, CartesianPolygon)>> {
    let doc: PolygonDocument = serde_json::from_str(text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    doc.polygons()
}

pub fn parse_polygons(text: &str) -> Result<Vec<(String, CartesianPolygon)>> {
    parse_at(text, Path::new("<input>"))
}

pub fn read_polygons(path: impl AsRef<Path>) -> Result<Vec<(String, CartesianPolygon)>> {
    read_document(path)?.polygons()
}

/// The raw document, for callers that also need the optional origins.
pub fn read_document(path: impl AsRef<Path>) -> Result<PolygonDocument> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })
}

pub fn polygons_to_string(polygons: &[(String, CartesianPolygon)]) -> String {
    let mut s = serde_json::to_string_pretty(&PolygonDocument::from_polygons(polygons))
        .expect("polygon documents always serialize");
    s.push('\n');
    s
}

pub fn write_polygons(path: impl AsRef<Path>, polygons: &[(String, CartesianPolygon)]) -> Result<()> {
    write_file(path.as_ref(), &polygons_to_string(polygons))
}

pub fn write_profiles_csv(profiles: &[(String, DenseRadialProfile)], path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &profiles_csv(profiles))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `x` with `digits` significant digits, in the style of C's `%.{digits}g`.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const TRACE_HEADER: &str = "iter,origin_loss,iou_loss,smooth_loss,total";

pub fn trace_csv(trace: &FitTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &trace.records {
        let l = &r.loss;
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.iteration,
            fmt_sig(l.origin, SIG_DIGITS),
            fmt_sig(l.polar_iou, SIG_DIGITS),
            fmt_sig(l.smoothness, SIG_DIGITS),
            fmt_sig(l.total, SIG_DIGITS)
        );
    }
    out
}

pub fn write_trace_csv(trace: &FitTrace, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &trace_csv(trace))
}

pub const PROFILE_HEADER: &str = "id,angle,radius";

/// One `id,angle,radius` row per ray.
pub fn profiles_csv(profiles: &[(String, DenseRadialProfile)]) -> String {
    let mut out = String::from(PROFILE_HEADER);
    out.push('\n');
    for (id, p) in profiles {
        for (j, r) in p.radii().iter().enumerate() {
            let _ = writeln!(
                out,
                "{id},{},{}",
                fmt_sig(p.ray_angle(j), SIG_DIGITS),
                fmt_sig(*r, SIG_DIGITS)
            );
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Style {
    pub stroke: String,
    pub fill: String,
    pub fill_opacity: f64,
    /// In screen pixels, independent of the viewBox scale.
    pub stroke_width: f64,
}

impl Style {
    pub fn outline(stroke: &str) -> Self {
        Self {
            stroke: stroke.into(),
            fill: "none".into(),
            fill_opacity: 0.0,
            stroke_width: 1.5,
        }
    }

    pub fn filled(stroke: &str, fill: &str) -> Self {
        Self {
            stroke: stroke.into(),
            fill: fill.into(),
            fill_opacity: 0.25,
            stroke_width: 1.5,
        }
    }
}

/// Standalone SVG with one closed path per polygon. Plane y points up, so
/// y is negated on output.
pub fn render_svg(shapes: &[(CartesianPolygon, Style)]) -> String {
    let mut out = String::new();
    let bb = BBox::of_points(shapes.iter().flat_map(|(p, _)| p.vertices()));
    let (min_x, min_y, w, h) = match bb {
        Some(bb) => {
            let (mx, my) = (bb.width() * SVG_MARGIN, bb.height() * SVG_MARGIN);
            (bb.min.x - mx, -bb.max.y - my, bb.width() + 2.0 * mx, bb.height() + 2.0 * my)
        }
        None => (0.0, 0.0, 1.0, 1.0),
    };
    let px_w = 640.0;
    let px_h = (px_w * h / w).round().max(1.0);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="{} {} {} {}">"#,
        px_w,
        px_h,
        fmt_sig(min_x, SIG_DIGITS),
        fmt_sig(min_y, SIG_DIGITS),
        fmt_sig(w, SIG_DIGITS),
        fmt_sig(h, SIG_DIGITS)
    );
    for (poly, style) in shapes {
        let mut d = String::new();
        for (i, v) in poly.vertices().iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(
                d,
                "{cmd}{} {} ",
                fmt_sig(v.x, SIG_DIGITS),
                fmt_sig(-v.y, SIG_DIGITS)
            );
        }
        d.push('Z');
        let _ = writeln!(
            out,
            r#"  <path d="{d}" stroke="{}" stroke-width="{}" fill="{}" fill-opacity="{}" vector-effect="non-scaling-stroke"/>"#,
            style.stroke,
            fmt_sig(style.stroke_width, SIG_DIGITS),
            style.fill,
            fmt_sig(style.fill_opacity, SIG_DIGITS)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(shapes: &[(CartesianPolygon, Style)], path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &render_svg(shapes))
}
