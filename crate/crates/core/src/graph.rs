//! Planar subdivision of the box induced by a frozen tessellation.
//!
//! Vertices are the four box corners and one T-junction per half-ray: either
//! the point where it stops on another segment or, for escaping half-rays, the
//! point where it meets the boundary. Every such coordinate is a verbatim copy
//! of a seed coordinate or of the box side, so vertices are merged by exact
//! bit equality. Faces are traced on half-edges, always taking the first
//! clockwise turn from the reversed edge; bounded faces come out
//! counter-clockwise and the outer face is the single clockwise cycle.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::engine::Tessellation;
use crate::error::{Error, Result};
use crate::geometry::{Direction, Point2, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Corner,
    TJunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub x: f64,
    pub y: f64,
    pub kind: VertexKind,
}

impl Vertex {
    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(usize, usize)>,
    /// Vertex cycles; bounded faces counter-clockwise, the outer face clockwise.
    pub faces: Vec<Vec<usize>>,
    pub outer_face: usize,
}

fn key(p: Point2) -> (u64, u64) {
    // +0.0 and -0.0 must hash alike
    ((p.x + 0.0).to_bits(), (p.y + 0.0).to_bits())
}

#[derive(Default)]
struct Builder {
    vertices: Vec<Vertex>,
    lookup: HashMap<(u64, u64), usize>,
}

impl Builder {
    fn vertex(&mut self, p: Point2, kind: VertexKind) -> Result<usize> {
        if let Some(&i) = self.lookup.get(&key(p)) {
            return Err(Error::NonGeneralPosition(format!(
                "vertex {p} produced twice (already vertex {i} of kind {:?})",
                self.vertices[i].kind
            )));
        }
        self.vertices.push(Vertex { x: p.x, y: p.y, kind });
        self.lookup.insert(key(p), self.vertices.len() - 1);
        Ok(self.vertices.len() - 1)
    }
}

// Outgoing direction slots in counter-clockwise order: E, N, W, S.
fn slot(from: Point2, to: Point2) -> usize {
    if to.y == from.y {
        if to.x > from.x {
            0
        } else {
            2
        }
    } else if to.y > from.y {
        1
    } else {
        3
    }
}

/// Builds the subdivision of `[0, N]²` by the clipped segments plus the box boundary.
pub fn extract_graph(t: &Tessellation) -> Result<PlanarGraph> {
    let domain = t.domain();
    let n = domain.side();
    if t.horizon() < n {
        return Err(Error::NotFrozen { horizon: t.horizon(), side: n });
    }
    let seeds = t.seeds().seeds();
    for s in seeds {
        if !domain.contains(s.position) || domain.on_boundary(s.position) {
            return Err(Error::NonGeneralPosition(format!("seed {} at {} is not in the open box", s.id, s.position)));
        }
    }

    let mut b = Builder::default();
    let corners = [Point2::new(0.0, 0.0), Point2::new(n, 0.0), Point2::new(n, n), Point2::new(0.0, n)];
    for c in corners {
        b.vertex(c, VertexKind::Corner)?;
    }

    // vertices lying on each seed's line (by along-coordinate) and on each box side
    let mut on_line: Vec<Vec<(f64, usize)>> = vec![Vec::new(); seeds.len()];
    // sides: bottom, right, top, left
    let mut on_side: [Vec<(f64, usize)>; 4] =
        [vec![(0.0, 0), (n, 1)], vec![(0.0, 1), (n, 2)], vec![(0.0, 3), (n, 2)], vec![(0.0, 0), (n, 3)]];
    let mut blocked_on: Vec<(usize, Point2, usize, Side)> = Vec::new();

    for s in seeds {
        for side in Side::BOTH {
            let ray = t.half_ray(s.id, side)?;
            let wall = domain.distance_to_wall(s.position, s.mark, side);
            let v = if ray.length >= wall {
                let p = match (s.mark, side) {
                    (Direction::Horizontal, Side::Plus) => Point2::new(n, s.position.y),
                    (Direction::Horizontal, Side::Minus) => Point2::new(0.0, s.position.y),
                    (Direction::Vertical, Side::Plus) => Point2::new(s.position.x, n),
                    (Direction::Vertical, Side::Minus) => Point2::new(s.position.x, 0.0),
                };
                let v = b.vertex(p, VertexKind::TJunction)?;
                let (idx, coord) = match (s.mark, side) {
                    (Direction::Horizontal, Side::Plus) => (1, p.y),
                    (Direction::Horizontal, Side::Minus) => (3, p.y),
                    (Direction::Vertical, Side::Plus) => (2, p.x),
                    (Direction::Vertical, Side::Minus) => (0, p.x),
                };
                on_side[idx].push((coord, v));
                v
            } else {
                let p = t.tip(s.id, side)?;
                let (blocker, bside) = ray.blocker().ok_or_else(|| {
                    Error::NonGeneralPosition(format!(
                        "half-ray {}{} is free but ends inside the box",
                        s.id,
                        side.symbol()
                    ))
                })?;
                let v = b.vertex(p, VertexKind::TJunction)?;
                blocked_on.push((blocker, p, v, bside));
                v
            };
            on_line[s.id].push((b.vertices[v].position().along(s.mark), v));
        }
    }
    for &(blocker, p, v, _) in &blocked_on {
        let bs = &seeds[blocker];
        let (lo, hi) = {
            let ends: Vec<f64> = on_line[blocker].iter().take(2).map(|e| e.0).collect();
            (ends[0].min(ends[1]), ends[0].max(ends[1]))
        };
        let c = p.along(bs.mark);
        if !(lo < c && c < hi) {
            return Err(Error::NonGeneralPosition(format!(
                "junction {p} is not interior to the segment of seed {blocker} ({lo}..{hi})"
            )));
        }
        on_line[blocker].push((c, v));
    }

    check_no_crossings(t)?;

    let mut edges = Vec::new();
    let chains = on_line.iter_mut().chain(on_side.iter_mut());
    for chain in chains {
        chain.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in chain.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::NonGeneralPosition(format!(
                    "vertices {} and {} coincide on a segment",
                    w[0].1, w[1].1
                )));
            }
            edges.push((w[0].1, w[1].1));
        }
    }

    let (faces, outer_face) = trace_faces(&b.vertices, &edges)?;
    Ok(PlanarGraph { vertices: b.vertices, edges, faces, outer_face })
}

// Horizontal against vertical segments, clipped to the box; any proper crossing is an error.
fn check_no_crossings(t: &Tessellation) -> Result<()> {
    let n = t.domain().side();
    let mut hs = Vec::new();
    let mut vs = Vec::new();
    for s in t.seeds().seeds() {
        let (a, b) = t.segment(s.id)?;
        match s.mark {
            Direction::Horizontal => hs.push((a.x.max(0.0), b.x.min(n), a.y, s.id)),
            Direction::Vertical => vs.push((a.y.max(0.0), b.y.min(n), a.x, s.id)),
        }
    }
    vs.sort_by(|a, b| a.2.total_cmp(&b.2));
    for &(x0, x1, y, hid) in &hs {
        let start = vs.partition_point(|v| v.2 <= x0);
        for &(y0, y1, x, vid) in vs[start..].iter().take_while(|v| v.2 < x1) {
            if y0 < y && y < y1 {
                return Err(Error::NonGeneralPosition(format!(
                    "segments of seeds {hid} and {vid} cross at ({x}, {y})"
                )));
            }
        }
    }
    Ok(())
}

fn trace_faces(vertices: &[Vertex], edges: &[(usize, usize)]) -> Result<(Vec<Vec<usize>>, usize)> {
    let nv = vertices.len();
    let mut out: Vec<[Option<usize>; 4]> = vec![[None; 4]; nv];
    let mut dest = vec![0usize; 2 * edges.len()];
    for (e, &(a, b)) in edges.iter().enumerate() {
        for (h, from, to) in [(2 * e, a, b), (2 * e + 1, b, a)] {
            let s = slot(vertices[from].position(), vertices[to].position());
            if out[from][s].is_some() {
                return Err(Error::NonGeneralPosition(format!("overlapping edges leave vertex {from}")));
            }
            out[from][s] = Some(h);
            dest[h] = to;
        }
    }
    let origin = |h: usize| dest[h ^ 1];
    let next = |h: usize| -> Result<usize> {
        let at = dest[h];
        let back = slot(vertices[at].position(), vertices[origin(h)].position());
        for turn in 1..=4 {
            if let Some(g) = out[at][(back + 4 - turn) % 4] {
                return Ok(g);
            }
        }
        Err(Error::NonGeneralPosition(format!("isolated vertex {at}")))
    };

    let mut seen = vec![false; dest.len()];
    let mut faces = Vec::new();
    let mut outer = Vec::new();
    for start in 0..dest.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut h = start;
        while !seen[h] {
            seen[h] = true;
            cycle.push(origin(h));
            h = next(h)?;
        }
        if h != start {
            return Err(Error::NonGeneralPosition("half-edge traversal did not close".into()));
        }
        if signed_area(vertices, &cycle) < 0.0 {
            outer.push(faces.len());
        }
        faces.push(cycle);
    }
    match outer.as_slice() {
        [o] => Ok((faces, *o)),
        _ => Err(Error::NonGeneralPosition(format!("expected one outer face, found {}", outer.len()))),
    }
}

fn signed_area(vertices: &[Vertex], cycle: &[usize]) -> f64 {
    let mut a = 0.0;
    for (i, &v) in cycle.iter().enumerate() {
        let p = vertices[v];
        let q = vertices[cycle[(i + 1) % cycle.len()]];
        a += p.x * q.y - q.x * p.y;
    }
    a / 2.0
}

impl PlanarGraph {
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertices.len()];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    /// A bounded face is a rectangle when its cycle turns exactly four times, always left.
    pub fn is_rectangle(&self, face: usize) -> bool {
        let cycle = &self.faces[face];
        let m = cycle.len();
        if m < 4 {
            return false;
        }
        let mut turns = 0;
        for i in 0..m {
            let a = self.vertices[cycle[i]].position();
            let b = self.vertices[cycle[(i + 1) % m]].position();
            let c = self.vertices[cycle[(i + 2) % m]].position();
            let (d0, d1) = (slot(a, b), slot(b, c));
            if d0 == d1 {
                continue;
            }
            if (d0 + 1) % 4 != d1 {
                return false;
            }
            turns += 1;
        }
        turns == 4
    }

    pub fn rectangles(&self) -> usize {
        (0..self.faces.len()).filter(|&f| f != self.outer_face && self.is_rectangle(f)).count()
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            vertices: &'a [Vertex],
            edges: &'a [(usize, usize)],
            faces: &'a [Vec<usize>],
            outer_face: usize,
        }
        Ok(serde_json::to_string_pretty(&Doc {
            vertices: &self.vertices,
            edges: &self.edges,
            faces: &self.faces,
            outer_face: self.outer_face,
        })?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerReport {
    pub n_seeds: usize,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub rectangles: usize,
    pub euler_characteristic: i64,
    pub rectangles_ok: bool,
    pub edges_ok: bool,
    pub vertices_ok: bool,
    pub euler_ok: bool,
    pub degrees_ok: bool,
    pub pass: bool,
}

/// Checks `rectangles = n + 1`, `E = 3n + 4`, `V = 2n + 4`, `V − E + F = 2` and the vertex degrees.
pub fn euler_check(g: &PlanarGraph, n_seeds: usize) -> EulerReport {
    let (v, e, f) = (g.vertices.len(), g.edges.len(), g.faces.len());
    let rectangles = g.rectangles();
    let degrees = g.degrees();
    let degrees_ok = g.vertices.iter().zip(&degrees).all(|(vx, &d)| match vx.kind {
        VertexKind::Corner => d == 2,
        VertexKind::TJunction => d == 3,
    });
    let chi = v as i64 - e as i64 + f as i64;
    let rectangles_ok = rectangles == n_seeds + 1 && f == n_seeds + 2;
    let edges_ok = e == 3 * n_seeds + 4;
    let vertices_ok = v == 2 * n_seeds + 4;
    let euler_ok = chi == 2;
    EulerReport {
        n_seeds,
        vertices: v,
        edges: e,
        faces: f,
        rectangles,
        euler_characteristic: chi,
        rectangles_ok,
        edges_ok,
        vertices_ok,
        euler_ok,
        degrees_ok,
        pass: rectangles_ok && edges_ok && vertices_ok && euler_ok && degrees_ok,
    }
}
