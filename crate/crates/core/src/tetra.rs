//! Tetrahedral coordinates for the four attribute z-scores.
//!
//! Vertex order is Major, Residence, Year, High school; the Year vertex is
//! `p3`. Summaries of the six detection runs become disks in a projection
//! onto the face opposite the Year vertex.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::compare::ZScoreQuad;
use crate::error::{Error, Result};
use crate::graph::{Attribute, ViewKind};

pub type Vec3 = [f64; 3];

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const COS_2PI_3: f64 = -0.5;
const SIN_2PI_3: f64 = 0.866_025_403_784_438_6;

/// Reference tetrahedron with edge length `sqrt(3)`.
pub const VERTICES: [Vec3; 4] = [
    [1.0, 0.0, 0.0],
    [COS_2PI_3, SIN_2PI_3, 0.0],
    [COS_2PI_3, -SIN_2PI_3, 0.0],
    [0.0, 0.0, SQRT_2],
];

/// Index of the Year vertex in [`VERTICES`].
pub const YEAR_VERTEX: usize = 2;

/// Width of the disk-size bins.
pub const BIN_WIDTH: f64 = 0.1;

/// Detection runs summarized per institution and view.
pub const RUNS: usize = 6;

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn unit(a: Vec3) -> Vec3 {
    scale(a, 1.0 / norm(a))
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: Vec3, b: Vec3) -> f64 {
    norm(sub(a, b))
}

/// Clamps negative scores to zero and rescales to sum one.
/// Absent scores (degenerate comparisons) count as zero.
pub fn normalize_zscores(z: [Option<f64>; 4]) -> Result<[f64; 4]> {
    let clamped = z.map(|v| v.filter(|x| x.is_finite()).unwrap_or(0.0).max(0.0));
    let sum: f64 = clamped.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::DegenerateQuad);
    }
    let mut out = clamped.map(|v| v / sum);
    out[3] = 1.0 - (out[0] + out[1] + out[2]);
    Ok(out)
}

pub fn normalize_quad(quad: &ZScoreQuad) -> Result<[f64; 4]> {
    normalize_zscores(quad.z)
}

/// Attributes whose score was absent and entered as zero.
pub fn degenerate_attributes(quad: &ZScoreQuad) -> Vec<Attribute> {
    Attribute::COMMUNITY
        .iter()
        .zip(quad.z)
        .filter(|(_, z)| z.is_none())
        .map(|(&a, _)| a)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TetraPoint {
    pub z_norm: [f64; 4],
    pub x: Vec3,
}

/// `X = T Z + p4`, where the columns of `T` are `p_i - p4`.
pub fn tetra_point(z_norm: [f64; 4]) -> TetraPoint {
    debug_assert!(z_norm.iter().all(|z| *z >= -1e-12));
    debug_assert!((z_norm.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let p4 = VERTICES[3];
    let mut x = p4;
    for (i, &z) in z_norm[..3].iter().enumerate() {
        let col = sub(VERTICES[i], p4);
        for k in 0..3 {
            x[k] += col[k] * z;
        }
    }
    TetraPoint { z_norm, x }
}

/// Barycentric coordinates of `x` with respect to [`VERTICES`].
pub fn barycentric(x: Vec3) -> [f64; 4] {
    let p4 = VERTICES[3];
    let [a, b, c] = [0, 1, 2].map(|i| sub(VERTICES[i], p4));
    let r = sub(x, p4);
    // Cramer's rule on T z = r
    let det = dot(a, cross(b, c));
    let z1 = dot(r, cross(b, c)) / det;
    let z2 = dot(a, cross(r, c)) / det;
    let z3 = dot(a, cross(b, r)) / det;
    [z1, z2, z3, 1.0 - z1 - z2 - z3]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TetraSummary {
    /// Mean of the six run points.
    pub center: Vec3,
    /// Largest pairwise distance among the runs.
    pub max_distance: f64,
    pub size_bin: u32,
    pub year_distance: f64,
}

/// Bin `[k/10, (k+1)/10)` containing `d`.
pub fn size_bin(d: f64) -> u32 {
    // multiply rather than divide so that d = 0.3 lands in bin 3
    (d * (1.0 / BIN_WIDTH)).floor() as u32
}

pub fn summarize_runs(points: &[TetraPoint]) -> Result<TetraSummary> {
    if points.len() != RUNS {
        return Err(Error::Arity {
            expected: RUNS,
            got: points.len(),
        });
    }
    let mut center = [0.0; 3];
    for p in points {
        for k in 0..3 {
            center[k] += p.x[k] / RUNS as f64;
        }
    }
    let mut d: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d = d.max(distance(a.x, b.x));
        }
    }
    Ok(TetraSummary {
        center,
        max_distance: d,
        size_bin: size_bin(d),
        year_distance: distance(center, VERTICES[YEAR_VERTEX]),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    /// Parallel to the face normal.
    #[default]
    Orthographic,
    /// Central projection from an eye on the Year axis, `eye_height` times
    /// the tetrahedron's height above the opposite face (must exceed 1).
    Perspective { eye_height: f64 },
}

/// Frame of the face opposite the Year vertex.
#[derive(Clone, Copy, Debug)]
pub struct FaceFrame {
    /// Foot of the Year axis on the face.
    pub origin: Vec3,
    /// Unit normal, pointing toward the Year vertex.
    pub normal: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
}

impl FaceFrame {
    pub fn opposite_year() -> Self {
        let [p1, p2, p3, p4] = VERTICES;
        let mut normal = unit(cross(sub(p2, p1), sub(p4, p1)));
        if dot(normal, sub(p3, p1)) < 0.0 {
            normal = scale(normal, -1.0);
        }
        let height = dot(normal, sub(p3, p1));
        let origin = sub(p3, scale(normal, height));
        let e1 = unit(sub(p2, p1));
        let e2 = cross(normal, e1);
        FaceFrame {
            origin,
            normal,
            e1,
            e2,
        }
    }

    /// Distance from the Year vertex to the face.
    pub fn height(&self) -> f64 {
        dot(self.normal, sub(VERTICES[YEAR_VERTEX], self.origin))
    }

    fn coordinates(&self, y: Vec3) -> [f64; 2] {
        let r = sub(y, self.origin);
        [dot(r, self.e1), dot(r, self.e2)]
    }
}

/// 2-D image of `x` on the face opposite the Year vertex.
pub fn project_year_view(x: Vec3, projection: Projection) -> Result<[f64; 2]> {
    let frame = FaceFrame::opposite_year();
    match projection {
        Projection::Orthographic => Ok(frame.coordinates(x)),
        Projection::Perspective { eye_height } => {
            if !(eye_height > 1.0) || !eye_height.is_finite() {
                return Err(Error::Config(format!("eye height must exceed 1, got {eye_height}")));
            }
            let eye = [0, 1, 2].map(|k| frame.origin[k] + frame.normal[k] * eye_height * frame.height());
            let eye_level = dot(sub(eye, frame.origin), frame.normal);
            let level = dot(sub(x, frame.origin), frame.normal);
            let t = eye_level / (eye_level - level);
            let y = [0, 1, 2].map(|k| eye[k] + t * (x[k] - eye[k]));
            Ok(frame.coordinates(y))
        }
    }
}

/// One disk of a figure.
#[derive(Clone, Debug, PartialEq)]
pub struct Disk {
    pub label: String,
    pub summary: TetraSummary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FigureOptions {
    pub projection: Projection,
    /// Adds a magnified panel around the Year vertex.
    pub zoom_year: bool,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            projection: Projection::Orthographic,
            zoom_year: false,
        }
    }
}

const PANEL: f64 = 420.0;
const PIXELS_PER_UNIT: f64 = 110.0;
const ZOOM: f64 = 4.0;
const RADIUS_PER_BIN: f64 = 3.0;

/// Color on a blue (near Year) to red (far) ramp.
fn ramp(year_distance: f64) -> String {
    let edge = distance(VERTICES[0], VERTICES[1]);
    let t = (year_distance / edge).clamp(0.0, 1.0);
    let r = (40.0 + 200.0 * t).round() as u8;
    let b = (240.0 - 200.0 * t).round() as u8;
    format!("#{r:02x}50{b:02x}")
}

fn panel(out: &mut String, disks: &[Disk], options: &FigureOptions, zoom: f64, dx: f64, title: &str) -> Result<()> {
    let to_px = |p: [f64; 2]| (dx + PANEL / 2.0 + p[0] * PIXELS_PER_UNIT * zoom, PANEL / 2.0 + 20.0 - p[1] * PIXELS_PER_UNIT * zoom);
    let _ = writeln!(out, r#"<g clip-path="url(#clip{})">"#, dx as u32);
    let outline: Vec<(f64, f64)> = [0, 1, 3]
        .iter()
        .map(|&i| project_year_view(VERTICES[i], options.projection).map(to_px))
        .collect::<Result<_>>()?;
    let year = to_px(project_year_view(VERTICES[YEAR_VERTEX], options.projection)?);
    let pts: Vec<String> = outline.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(out, r##"<polygon points="{}" fill="none" stroke="#444" stroke-width="1"/>"##, pts.join(" "));
    for (x, y) in &outline {
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{x:.2}" y2="{y:.2}" stroke="#999" stroke-dasharray="3,3"/>"##,
            year.0, year.1
        );
    }
    let names = ["Major", "Residence", "Year", "High school"];
    for (i, name) in names.iter().enumerate() {
        let (x, y) = to_px(project_year_view(VERTICES[i], options.projection)?);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{name}</text>"#, y - 6.0);
    }
    for d in disks {
        let (x, y) = to_px(project_year_view(d.summary.center, options.projection)?);
        let r = RADIUS_PER_BIN * f64::from(d.summary.size_bin + 1) * zoom.sqrt();
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="{}" fill-opacity="0.6" stroke="black" stroke-width="0.5"/>"#,
            ramp(d.summary.year_distance)
        );
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" font-size="7" text-anchor="middle">{}</text>"#, y + 2.5, escape(&d.label));
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<text x="{:.2}" y="14" font-size="13" text-anchor="middle">{title}</text>"#, dx + PANEL / 2.0);
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// SVG figure of one view: each disk sits at the projected run center,
/// with radius proportional to `size_bin + 1`.
pub fn render_svg(view: ViewKind, disks: &[Disk], options: &FigureOptions) -> Result<String> {
    let panels = if options.zoom_year { 2.0 } else { 1.0 };
    let width = PANEL * panels;
    let height = PANEL + 30.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        out,
        "<metadata>view={}; disk radius proportional to size_bin + 1; bin width {BIN_WIDTH}; color = distance to Year vertex; projection={}</metadata>",
        view.name(),
        match options.projection {
            Projection::Orthographic => "orthographic".to_string(),
            Projection::Perspective { eye_height } => format!("perspective(eye_height={eye_height})"),
        }
    );
    let _ = writeln!(out, "<defs>");
    for k in 0..panels as u32 {
        let x = f64::from(k) * PANEL;
        let _ = writeln!(out, r#"<clipPath id="clip{}"><rect x="{x}" y="0" width="{PANEL}" height="{height}"/></clipPath>"#, x as u32);
    }
    let _ = writeln!(out, "</defs>");
    let _ = writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    panel(&mut out, disks, options, 1.0, 0.0, view.name())?;
    if options.zoom_year {
        panel(&mut out, disks, options, ZOOM, PANEL, &format!("{} (Year vertex, x{ZOOM})", view.name()))?;
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_zscores([Some(10.0); 4]).unwrap(), [0.25; 4]);
        assert_eq!(
            normalize_zscores([Some(-3.0), Some(0.0), Some(12.0), Some(4.0)]).unwrap(),
            [0.0, 0.0, 0.75, 0.25]
        );
        let z = normalize_zscores([Some(5.0), Some(2.0), Some(40.0), Some(3.0)]).unwrap();
        assert!(close(&z, &[0.1, 0.04, 0.8, 0.06], 1e-15));
        assert!(matches!(
            normalize_zscores([Some(-1.0), Some(0.0), None, Some(-0.5)]),
            Err(Error::DegenerateQuad)
        ));
    }

    #[test]
    fn vertices_are_exact() {
        for i in 0..4 {
            let mut z = [0.0; 4];
            z[i] = 1.0;
            assert_eq!(tetra_point(z).x, VERTICES[i]);
        }
    }

    #[test]
    fn regular_with_edge_sqrt3() {
        for i in 0..4 {
            for j in i + 1..4 {
                assert!((distance(VERTICES[i], VERTICES[j]) - 3f64.sqrt()).abs() < 1e-15);
            }
        }
        let c = tetra_point([0.25; 4]).x;
        assert!(close(&c, &[0.0, 0.0, SQRT_2 / 4.0], 1e-15));
    }

    #[test]
    fn bins_are_half_open() {
        assert_eq!(size_bin(0.0), 0);
        assert_eq!(size_bin(0.0999), 0);
        assert_eq!(size_bin(0.1), 1);
        assert_eq!(size_bin(0.3), 3);
        assert_eq!(size_bin(0.1581), 1);
        assert_eq!(size_bin(0.0141), 0);
    }

    #[test]
    fn summary_arity() {
        let p = tetra_point([0.25; 4]);
        assert!(matches!(summarize_runs(&[p; 5]), Err(Error::Arity { expected: 6, got: 5 })));
        let s = summarize_runs(&[p; 6]).unwrap();
        assert_eq!((s.max_distance, s.size_bin), (0.0, 0));
    }

    #[test]
    fn year_vertex_projects_to_face_foot() {
        let frame = FaceFrame::opposite_year();
        for proj in [Projection::Orthographic, Projection::Perspective { eye_height: 3.0 }] {
            let y = project_year_view(VERTICES[YEAR_VERTEX], proj).unwrap();
            assert!(close(&y, &[0.0, 0.0], 1e-14), "{y:?}");
            for &i in &[0, 1, 3] {
                let img = project_year_view(VERTICES[i], proj).unwrap();
                let direct = frame.coordinates(VERTICES[i]);
                assert!(close(&img, &direct, 1e-14));
                assert!((img[0].hypot(img[1]) - 1.0).abs() < 1e-14);
            }
        }
        assert!((frame.height() - SQRT_2).abs() < 1e-14);
    }

    /// Projection through a 4x4 homogeneous matrix built independently:
    /// translate the face foot to the origin, rotate into the face frame,
    /// then apply the pinhole matrix with the eye at height `h` on the axis.
    fn homogeneous_projection(x: Vec3, h: Option<f64>) -> [f64; 2] {
        let f = FaceFrame::opposite_year();
        let r = [f.e1, f.e2, f.normal];
        let mut m = [[0.0f64; 4]; 4];
        for i in 0..3 {
            for k in 0..3 {
                m[i][k] = r[i][k];
            }
            m[i][3] = -dot(r[i], f.origin);
        }
        m[3][3] = 1.0;
        let local: Vec<f64> = (0..4).map(|i| (0..3).map(|k| m[i][k] * x[k]).sum::<f64>() + m[i][3]).collect();
        match h {
            None => [local[0], local[1]],
            Some(h) => {
                // [x, y, z, 1] -> [h x, h y, 0, h - z]
                let p = [[h, 0.0, 0.0, 0.0], [0.0, h, 0.0, 0.0], [0.0, 0.0, -1.0, h]];
                let hx: Vec<f64> = p.iter().map(|row| (0..4).map(|k| row[k] * local[k]).sum()).collect();
                [hx[0] / hx[2], hx[1] / hx[2]]
            }
        }
    }

    #[test]
    fn centroid_matches_homogeneous_oracle() {
        let c = tetra_point([0.25; 4]).x;
        let f = FaceFrame::opposite_year();
        let ortho = project_year_view(c, Projection::Orthographic).unwrap();
        assert!(close(&ortho, &homogeneous_projection(c, None), 1e-14));
        for eye in [1.5, 2.0, 10.0] {
            let got = project_year_view(c, Projection::Perspective { eye_height: eye }).unwrap();
            let want = homogeneous_projection(c, Some(eye * f.height()));
            assert!(close(&got, &want, 1e-14), "{got:?} vs {want:?}");
        }
        assert!(project_year_view(c, Projection::Perspective { eye_height: 1.0 }).is_err());
    }

    #[test]
    fn svg_lists_every_disk() {
        let s = summarize_runs(&[tetra_point([0.1, 0.2, 0.3, 0.4]); 6]).unwrap();
        let disks: Vec<Disk> = (0..3)
            .map(|i| Disk {
                label: format!("{i}"),
                summary: s,
            })
            .collect();
        let svg = render_svg(ViewKind::Full, &disks, &FigureOptions { zoom_year: true, ..Default::default() }).unwrap();
        assert_eq!(svg.matches("<circle").count(), 6);
        assert!(svg.contains("size_bin + 1"));
    }
}
