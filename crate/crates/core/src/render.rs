//! SVG output. The view box is the observation box and the y-axis points up,
//! so pictures have their origin at the bottom-left.

use std::fmt::Write as _;

use crate::engine::Tessellation;
use crate::geometry::{BoxDomain, Point2};
use crate::graph::PlanarGraph;
use crate::lattice::LatticeRays;

#[derive(Debug, Clone)]
pub struct SvgStyle {
    pub stroke: String,
    pub seed_fill: String,
    pub show_seeds: bool,
    pub fill_faces: bool,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle { stroke: "#1b1b1b".into(), seed_fill: "#c0392b".into(), show_seeds: true, fill_faces: false }
    }
}

struct Canvas {
    side: f64,
    body: String,
}

impl Canvas {
    fn new(side: f64) -> Self {
        Canvas { side, body: String::new() }
    }

    fn line(&mut self, a: Point2, b: Point2, stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{width}"/>"#,
            a.x, a.y, b.x, b.y
        );
    }

    fn dot(&mut self, p: Point2, r: f64, fill: &str) {
        let _ = writeln!(self.body, r#"<circle cx="{}" cy="{}" r="{r}" fill="{fill}"/>"#, p.x, p.y);
    }

    fn polygon(&mut self, pts: &[Point2], fill: &str) {
        let coords: Vec<String> = pts.iter().map(|p| format!("{},{}", p.x, p.y)).collect();
        let _ = writeln!(self.body, r#"<polygon points="{}" fill="{fill}" stroke="none"/>"#, coords.join(" "));
    }

    fn finish(self) -> String {
        let n = self.side;
        let pad = n * 0.02;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\" width=\"800\" height=\"800\">\n\
             <g transform=\"translate(0,{n}) scale(1,-1)\">\n\
             <rect x=\"0\" y=\"0\" width=\"{n}\" height=\"{n}\" fill=\"white\" stroke=\"#1b1b1b\" stroke-width=\"{}\"/>\n\
             {}</g>\n</svg>\n",
            -pad,
            -pad,
            n + 2.0 * pad,
            n + 2.0 * pad,
            n / 400.0,
            self.body
        )
    }
}

/// Clips an axis-aligned segment to the box; `None` if nothing remains.
pub fn clip_segment(a: Point2, b: Point2, domain: BoxDomain) -> Option<(Point2, Point2)> {
    let n = domain.side();
    if a.y == b.y {
        if !(0.0..=n).contains(&a.y) {
            return None;
        }
        let (lo, hi) = (a.x.min(b.x).max(0.0), a.x.max(b.x).min(n));
        (lo <= hi).then(|| (Point2::new(lo, a.y), Point2::new(hi, a.y)))
    } else {
        if !(0.0..=n).contains(&a.x) {
            return None;
        }
        let (lo, hi) = (a.y.min(b.y).max(0.0), a.y.max(b.y).min(n));
        (lo <= hi).then(|| (Point2::new(a.x, lo), Point2::new(a.x, hi)))
    }
}

pub fn tessellation_svg(t: &Tessellation, style: &SvgStyle) -> String {
    let domain = t.domain();
    let mut c = Canvas::new(domain.side());
    let w = domain.side() / 500.0;
    for s in t.seeds().seeds() {
        if let Ok((a, b)) = t.segment(s.id) {
            if let Some((a, b)) = clip_segment(a, b, domain) {
                c.line(a, b, &style.stroke, w);
            }
        }
    }
    if style.show_seeds {
        for s in t.seeds().seeds() {
            c.dot(s.position, 2.0 * w, &style.seed_fill);
        }
    }
    c.finish()
}

// Deterministic pastel palette indexed by face number.
fn face_colour(i: usize) -> String {
    let h = (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 40;
    let r = 160 + (h & 0x3f);
    let g = 160 + ((h >> 8) & 0x3f);
    let b = 160 + ((h >> 16) & 0x3f);
    format!("#{r:02x}{g:02x}{b:02x}")
}

pub fn graph_svg(g: &PlanarGraph, side: f64, style: &SvgStyle) -> String {
    let mut c = Canvas::new(side);
    let w = side / 500.0;
    if style.fill_faces {
        for (i, face) in g.faces.iter().enumerate() {
            if i == g.outer_face {
                continue;
            }
            let pts: Vec<Point2> = face.iter().map(|&v| g.vertices[v].position()).collect();
            c.polygon(&pts, &face_colour(i));
        }
    }
    for &(a, b) in &g.edges {
        c.line(g.vertices[a].position(), g.vertices[b].position(), &style.stroke, w);
    }
    if style.show_seeds {
        for v in &g.vertices {
            c.dot(v.position(), 1.5 * w, &style.seed_fill);
        }
    }
    c.finish()
}

/// Lattice traces drawn with the same conventions; only the part inside `[0, n]²` is shown.
pub fn lattice_svg(rays: &LatticeRays, style: &SvgStyle) -> String {
    let n = rays.config.n() as f64;
    let domain = BoxDomain::new(n).expect("lattice box side exceeds 2");
    let mut c = Canvas::new(n);
    let w = n / 300.0;
    for (i, r) in rays.rays.iter().enumerate() {
        let ((x, y), _) = rays.config.seeds()[r.seed];
        let origin = Point2::new(x as f64, y as f64);
        let (tx, ty) = rays.tip2(i);
        let tip = Point2::new(tx as f64 / 2.0, ty as f64 / 2.0);
        if let Some((a, b)) = clip_segment(origin, tip, domain) {
            c.line(a, b, &style.stroke, w);
        }
    }
    if style.show_seeds {
        for &((x, y), _) in rays.config.seeds() {
            c.dot(Point2::new(x as f64, y as f64), 2.0 * w, &style.seed_fill);
        }
    }
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::simulate;
    use crate::geometry::Direction;
    use crate::sampling::SeedSet;

    #[test]
    fn clipping() {
        let d = BoxDomain::new(4.0).unwrap();
        let p = Point2::new;
        assert_eq!(clip_segment(p(-2.0, 1.0), p(6.0, 1.0), d), Some((p(0.0, 1.0), p(4.0, 1.0))));
        assert_eq!(clip_segment(p(1.0, 5.0), p(1.0, 6.0), d), None);
        assert_eq!(clip_segment(p(5.0, 1.0), p(5.0, 2.0), d), None);
    }

    #[test]
    fn svg_is_flipped_and_sized_to_the_box() {
        let s = SeedSet::from_points(BoxDomain::new(4.0).unwrap(), &[(Point2::new(1.0, 1.0), Direction::Horizontal)])
            .unwrap();
        let svg = tessellation_svg(&simulate(&s, 4.0).unwrap(), &SvgStyle::default());
        assert!(svg.contains("scale(1,-1)"));
        assert!(svg.contains(r#"x1="0" y1="1" x2="4" y2="1""#));
        assert_eq!(svg.matches("<circle").count(), 1);
    }
}
