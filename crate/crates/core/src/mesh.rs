//! Column-structured P1 triangulations of convex polygons.
//!
//! In the normalized frame (longest side on the x-axis) the polygon is the
//! region between a lower and an upper piecewise-linear chain. Vertical
//! columns are placed at every vertex abscissa and subdivided uniformly in
//! between; each column is split into the same number of rows between the
//! two chains. Adjacent columns are joined by quads cut along the shorter
//! diagonal. Columns of zero height (a single extreme vertex) collapse to
//! one node.
//!
//! The row count follows the domain's height, except for thin polygons
//! (height/diameter < 0.2), where it is tied to a fixed fraction of the
//! diameter instead: elements become anisotropic and the element count stays
//! `O(1/h^2)` regardless of the aspect ratio.
//!
//! Doubling every count reproduces the previous mesh's nodes exactly, so a
//! [`MeshPlan`] yields a nested ladder of meshes for extrapolation.
//!
//! Text dump format ([`Mesh::to_text`]):
//!
//! ```text
//! nodes <N>
//! <x> <y> <b>        # N lines, b = 1 on the boundary, 0 inside
//! triangles <M>
//! <i> <j> <k>        # M lines, 0-based, counterclockwise
//! ```

use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon, RigidMotion};

/// Aspect ratio below which rows are tied to the diameter, not the height.
pub const THIN_ASPECT: f64 = 0.2;

/// Conforming triangulation with boundary flags.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    /// Longest element edge.
    pub h_max: f64,
    /// Width of the thinnest strip (parallel to the longest side) holding the polygon.
    pub strip_width: f64,
}

impl Mesh {
    pub fn interior_count(&self) -> usize {
        self.boundary.iter().filter(|b| !**b).count()
    }

    /// Sum of element areas.
    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| signed_area(self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]))
            .sum()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "nodes {}", self.nodes.len());
        for (p, b) in self.nodes.iter().zip(&self.boundary) {
            let _ = writeln!(s, "{} {} {}", p.x, p.y, u8::from(*b));
        }
        let _ = writeln!(s, "triangles {}", self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        s
    }
}

pub(crate) fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * b.sub(a).cross(c.sub(a))
}

/// Which diagonal to use when both diagonals of a cell have equal length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DiagonalTie {
    /// Lower-left to upper-right.
    #[default]
    Rising,
    /// Upper-left to lower-right.
    Falling,
}

/// Column layout that can be refined by uniform doubling.
#[derive(Clone, Debug)]
pub struct MeshPlan {
    normalized: Polygon,
    back: RigidMotion,
    breaks: Vec<f64>,
    segments: Vec<usize>,
    rows: usize,
    tie: DiagonalTie,
}

impl MeshPlan {
    /// Coarsest layout whose mesh has `h_max <= h_target`.
    pub fn new(p: &Polygon, h_target: f64) -> Result<Self> {
        Self::with_tie(p, h_target, DiagonalTie::default())
    }

    pub fn with_tie(p: &Polygon, h_target: f64, tie: DiagonalTie) -> Result<Self> {
        let d = p.diameter();
        if p.area() < 1e-14 {
            return Err(Error::Degenerate(format!(
                "polygon area {} is below 1e-14",
                p.area()
            )));
        }
        if !(h_target.is_finite() && h_target > 0.0 && h_target < d) {
            return Err(Error::Domain(format!(
                "mesh size must lie in (0, diameter = {d}), got {h_target}"
            )));
        }
        let (normalized, motion) = p.normalized();
        let mut breaks: Vec<f64> = normalized.vertices().iter().map(|v| v.x).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * d);
        let height = normalized
            .vertices()
            .iter()
            .map(|v| v.y)
            .fold(0.0, f64::max);
        let cell = h_target / SQRT_2;
        let row_extent = if height < THIN_ASPECT * d {
            THIN_ASPECT * d
        } else {
            height
        };
        let base_rows = ((row_extent / cell).ceil() as usize).max(2);
        let base_segments: Vec<usize> = breaks
            .windows(2)
            .map(|w| (((w[1] - w[0]) / cell).ceil() as usize).max(1))
            .collect();
        let mut plan = MeshPlan {
            normalized,
            back: motion.inverse(),
            breaks,
            segments: base_segments.clone(),
            rows: base_rows,
            tie,
        };
        // Steep chains stretch the edges between columns; tall columns stretch
        // the edges inside them. Densify each direction until the bound holds.
        let (mut mx, mut my) = (1usize, 1usize);
        for _ in 0..256 {
            plan.segments = base_segments.iter().map(|s| s * mx).collect();
            plan.rows = base_rows * my;
            let mesh = plan.mesh(0)?;
            if mesh.h_max <= h_target {
                return Ok(plan);
            }
            let (across, along) = plan.edge_extremes(&mesh);
            if along > h_target {
                my += 1;
            }
            if across > h_target {
                mx += 1;
            }
        }
        Err(Error::Degenerate(
            "could not reach the requested mesh size".into(),
        ))
    }

    /// Longest edge joining two columns, and longest edge within a column.
    fn edge_extremes(&self, mesh: &Mesh) -> (f64, f64) {
        let (mut across, mut along) = (0.0_f64, 0.0_f64);
        let fwd = self.back.inverse();
        for t in &mesh.triangles {
            for e in 0..3 {
                let (a, b) = (mesh.nodes[t[e]], mesh.nodes[t[(e + 1) % 3]]);
                let len = a.dist(b);
                if (fwd.apply(a).x - fwd.apply(b).x).abs() <= 1e-12 * len {
                    along = along.max(len);
                } else {
                    across = across.max(len);
                }
            }
        }
        (across, along)
    }

    /// Number of nodes of the mesh at refinement `level`, without building it.
    pub fn node_count(&self, level: u32) -> usize {
        let f = 1usize << level;
        let columns: usize = self.segments.iter().map(|s| s * f).sum::<usize>() + 1;
        columns * (self.rows * f + 1)
    }

    /// Mesh with every count multiplied by `2^level`.
    pub fn mesh(&self, level: u32) -> Result<Mesh> {
        let f = 1usize << level;
        let rows = self.rows * f;
        let d = self.normalized.diameter();
        let height = self
            .normalized
            .vertices()
            .iter()
            .map(|v| v.y)
            .fold(0.0, f64::max);
        let mut xs = Vec::new();
        for (w, &s) in self.breaks.windows(2).zip(&self.segments) {
            let s = s * f;
            for k in 0..s {
                xs.push(w[0] + (w[1] - w[0]) * k as f64 / s as f64);
            }
        }
        xs.push(*self.breaks.last().expect("at least two breakpoints"));
        let ncols = xs.len();

        let mut nodes = Vec::new();
        let mut boundary = Vec::new();
        let mut ids: Vec<Vec<usize>> = Vec::with_capacity(ncols);
        for (i, &x) in xs.iter().enumerate() {
            let (lo, up) = self.normalized.vertical_extent(x).ok_or_else(|| {
                Error::Degenerate(format!("column at x = {x} misses the polygon"))
            })?;
            let end = i == 0 || i + 1 == ncols;
            if up - lo <= 1e-13 * d {
                nodes.push(self.back.apply(Point::new(x, lo)));
                boundary.push(true);
                ids.push(vec![nodes.len() - 1; rows + 1]);
            } else {
                let mut col = Vec::with_capacity(rows + 1);
                for k in 0..=rows {
                    let y = lo + (up - lo) * k as f64 / rows as f64;
                    nodes.push(self.back.apply(Point::new(x, y)));
                    boundary.push(end || k == 0 || k == rows);
                    col.push(nodes.len() - 1);
                }
                ids.push(col);
            }
        }

        let mut triangles = Vec::with_capacity(2 * (ncols - 1) * rows);
        for i in 0..ncols - 1 {
            for k in 0..rows {
                let (a, b, c, dd) = (ids[i][k], ids[i + 1][k], ids[i + 1][k + 1], ids[i][k + 1]);
                let rising = nodes[a].dist(nodes[c]);
                let falling = nodes[b].dist(nodes[dd]);
                let use_rising = if (rising - falling).abs() <= 1e-12 * rising.max(falling) {
                    self.tie == DiagonalTie::Rising
                } else {
                    rising < falling
                };
                let pair = if use_rising {
                    [[a, b, c], [a, c, dd]]
                } else {
                    [[a, b, dd], [b, c, dd]]
                };
                for t in pair {
                    if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
                        triangles.push(t);
                    }
                }
            }
        }
        let mut h_max: f64 = 0.0;
        for t in &triangles {
            for e in 0..3 {
                h_max = h_max.max(nodes[t[e]].dist(nodes[t[(e + 1) % 3]]));
            }
        }
        Ok(Mesh {
            nodes,
            triangles,
            boundary,
            h_max,
            strip_width: height,
        })
    }
}

/// Triangulation with `h_max <= h_target`.
pub fn triangulate(p: &Polygon, h_target: f64) -> Result<Mesh> {
    MeshPlan::new(p, h_target)?.mesh(0)
}
