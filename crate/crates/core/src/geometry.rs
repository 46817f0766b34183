//! Convex polygons, the triangle moduli space, and the comparison domains
//! (sectors, isosceles triangles, rectangles) used to bracket eigenvalues.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sector::SectorSpec;
use crate::special::AsymptoticConstants;

/// Relative tolerance for geometric degeneracy tests.
const GEOM_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, t: f64) -> Point {
        Point::new(self.x * t, self.y * t)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        self.sub(o).norm()
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// Rotation followed by translation: `p -> R(theta) p + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidMotion {
    pub cos: f64,
    pub sin: f64,
    pub tx: f64,
    pub ty: f64,
}

impl RigidMotion {
    pub const IDENTITY: RigidMotion = RigidMotion {
        cos: 1.0,
        sin: 0.0,
        tx: 0.0,
        ty: 0.0,
    };

    pub fn apply(&self, p: Point) -> Point {
        Point::new(
            self.cos * p.x - self.sin * p.y + self.tx,
            self.sin * p.x + self.cos * p.y + self.ty,
        )
    }

    pub fn inverse(&self) -> RigidMotion {
        // R^T (p - t)
        let tx = -(self.cos * self.tx + self.sin * self.ty);
        let ty = -(-self.sin * self.tx + self.cos * self.ty);
        RigidMotion {
            cos: self.cos,
            sin: -self.sin,
            tx,
            ty,
        }
    }
}

/// Strictly convex polygon with counterclockwise vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Validates and stores the vertices; clockwise input is reversed.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 vertices, got {n}"
            )));
        }
        if vertices
            .iter()
            .any(|p| !(p.x.is_finite() && p.y.is_finite()))
        {
            return Err(Error::InvalidPolygon(
                "vertex coordinates must be finite".into(),
            ));
        }
        let scale = vertices
            .iter()
            .flat_map(|p| [p.x.abs(), p.y.abs()])
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in i + 1..n {
                if vertices[i].dist(vertices[j]) <= GEOM_EPS * scale {
                    return Err(Error::InvalidPolygon(format!(
                        "vertices {i} and {j} coincide"
                    )));
                }
            }
        }
        let mut sign = 0.0;
        let mut turning = 0.0;
        for i in 0..n {
            let e0 = vertices[(i + 1) % n].sub(vertices[i]);
            let e1 = vertices[(i + 2) % n].sub(vertices[(i + 1) % n]);
            let c = e0.cross(e1);
            if c.abs() <= GEOM_EPS * e0.norm() * e1.norm() {
                return Err(Error::InvalidPolygon(format!(
                    "vertex {} is collinear with its neighbours (not strictly convex)",
                    (i + 1) % n
                )));
            }
            if sign == 0.0 {
                sign = c.signum();
            } else if c.signum() != sign {
                return Err(Error::InvalidPolygon(format!(
                    "polygon is not convex at vertex {}",
                    (i + 1) % n
                )));
            }
            turning += c.atan2(e0.dot(e1));
        }
        // A star polygon turns all one way but winds more than once.
        if (turning.abs() - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::InvalidPolygon(
                "polygon boundary self-intersects".into(),
            ));
        }
        let mut vertices = vertices;
        if sign < 0.0 {
            vertices.reverse();
        }
        Ok(Polygon { vertices })
    }

    pub fn from_coords(coords: &[(f64, f64)]) -> Result<Self> {
        Polygon::new(coords.iter().map(|&c| c.into()).collect())
    }

    /// Axis-aligned `a x b` rectangle with a corner at the origin.
    pub fn rectangle(a: f64, b: f64) -> Result<Self> {
        Polygon::from_coords(&[(0.0, 0.0), (a, 0.0), (a, b), (0.0, b)])
    }

    /// Equilateral triangle with one side on the x-axis from the origin.
    pub fn equilateral(side: f64) -> Result<Self> {
        Polygon::from_coords(&[
            (0.0, 0.0),
            (side, 0.0),
            (0.5 * side, 0.5 * 3f64.sqrt() * side),
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Edges as `(start, end)` in counterclockwise order.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    /// Largest vertex-to-vertex distance.
    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max(v[i].dist(v[j]));
            }
        }
        d
    }

    /// Membership with a relative boundary tolerance (`tol = 0` is closed membership).
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        let scale = self.diameter();
        self.edges().all(|(a, b)| {
            let e = b.sub(a);
            e.cross(p.sub(a)) >= -tol * scale * e.norm()
        })
    }

    pub fn transformed(&self, m: &RigidMotion) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|&p| m.apply(p)).collect(),
        }
    }

    pub fn scaled(&self, t: f64) -> Result<Polygon> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Domain(format!(
                "scale factor must be positive, got {t}"
            )));
        }
        Ok(Polygon {
            vertices: self.vertices.iter().map(|&p| p.scale(t)).collect(),
        })
    }

    pub fn translated(&self, d: Point) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|&p| p.add(d)).collect(),
        }
    }

    /// Index of the longest side (start vertex); near-ties go to the side
    /// whose start vertex is lexicographically smallest.
    pub fn longest_side(&self) -> usize {
        let n = self.vertices.len();
        let lens: Vec<f64> = self.edges().map(|(a, b)| a.dist(b)).collect();
        let max = lens.iter().cloned().fold(0.0, f64::max);
        let mut best: Option<usize> = None;
        for i in 0..n {
            if lens[i] >= max * (1.0 - 1e-12) {
                best = match best {
                    None => Some(i),
                    Some(j) => {
                        let (a, b) = (self.vertices[i], self.vertices[j]);
                        if (a.x, a.y) < (b.x, b.y) {
                            Some(i)
                        } else {
                            Some(j)
                        }
                    }
                };
            }
        }
        best.expect("polygon has at least one side")
    }

    /// Rigid copy with the longest side on the positive x-axis starting at
    /// the origin and the interior in the upper half plane, plus the motion
    /// mapping this polygon onto it. Vertices are rotated so the copy starts
    /// with `(0, 0), (L, 0)`.
    pub fn normalized(&self) -> (Polygon, RigidMotion) {
        let n = self.vertices.len();
        let i = self.longest_side();
        let a = self.vertices[i];
        let b = self.vertices[(i + 1) % n];
        let e = b.sub(a);
        let len = e.norm();
        let (c, s) = (e.x / len, e.y / len);
        // Rotate by -theta, then translate a to the origin.
        let rot = RigidMotion {
            cos: c,
            sin: -s,
            tx: 0.0,
            ty: 0.0,
        };
        let ra = rot.apply(a);
        let m = RigidMotion {
            tx: -ra.x,
            ty: -ra.y,
            ..rot
        };
        let mut vertices: Vec<Point> = (0..n)
            .map(|k| m.apply(self.vertices[(i + k) % n]))
            .collect();
        vertices[0] = Point::new(0.0, 0.0);
        vertices[1] = Point::new(len, 0.0);
        for v in vertices.iter_mut().skip(2) {
            v.y = v.y.max(0.0);
        }
        (Polygon { vertices }, m)
    }

    /// Height of the thinnest strip parallel to the longest side containing
    /// the polygon: the largest `y` in the normalized frame.
    pub fn height(&self) -> f64 {
        let (q, _) = self.normalized();
        q.vertices.iter().map(|p| p.y).fold(0.0, f64::max)
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// `(y_min, y_max)` of the polygon on the vertical line at `x`, if it meets it.
    pub fn vertical_extent(&self, x: f64) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in self.edges() {
            let (x0, x1) = (a.x.min(b.x), a.x.max(b.x));
            if x < x0 || x > x1 {
                continue;
            }
            if x1 - x0 <= 0.0 {
                lo = lo.min(a.y.min(b.y));
                hi = hi.max(a.y.max(b.y));
            } else {
                let t = (x - a.x) / (b.x - a.x);
                let y = a.y + t * (b.y - a.y);
                lo = lo.min(y);
                hi = hi.max(y);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// `(x_min, x_max)` of the polygon on the horizontal line at `y`, if it meets it.
    pub fn horizontal_extent(&self, y: f64) -> Option<(f64, f64)> {
        let swapped = Polygon {
            vertices: self.vertices.iter().map(|p| Point::new(p.y, p.x)).collect(),
        };
        swapped.vertical_extent(y)
    }

    /// Part of the polygon with `sign * (x - x0) >= 0`; `None` if empty or degenerate.
    pub fn clip_vertical(&self, x0: f64, keep_right: bool) -> Option<Polygon> {
        let side = |p: &Point| if keep_right { p.x - x0 } else { x0 - p.x };
        let mut out: Vec<Point> = Vec::new();
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let (sa, sb) = (side(&a), side(&b));
            if sa >= 0.0 {
                out.push(a);
            }
            if (sa >= 0.0) != (sb >= 0.0) {
                let t = sa / (sa - sb);
                let mut p = a.add(b.sub(a).scale(t));
                p.x = x0;
                out.push(p);
            }
        }
        let scale = self.diameter();
        out.dedup_by(|a, b| a.dist(*b) <= 1e-13 * scale);
        if out.len() > 1 && out[0].dist(out[out.len() - 1]) <= 1e-13 * scale {
            out.pop();
        }
        prune_collinear(&mut out, scale);
        Polygon::new(out).ok()
    }

    /// Interior angles in radians, one per vertex.
    pub fn interior_angles(&self) -> Vec<f64> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let p = self.vertices[i];
                let a = self.vertices[(i + n - 1) % n].sub(p);
                let b = self.vertices[(i + 1) % n].sub(p);
                a.cross(b).abs().atan2(a.dot(b))
            })
            .collect()
    }

    /// Side lengths `(a, b)`, `a >= b`, when the polygon is a rectangle to relative `tol`.
    pub fn as_rectangle(&self, tol: f64) -> Option<(f64, f64)> {
        if self.vertices.len() != 4 {
            return None;
        }
        let e: Vec<Point> = self.edges().map(|(a, b)| b.sub(a)).collect();
        for i in 0..4 {
            let (u, v) = (e[i], e[(i + 1) % 4]);
            if u.dot(v).abs() > tol * u.norm() * v.norm() {
                return None;
            }
        }
        let (l0, l1, l2, l3) = (e[0].norm(), e[1].norm(), e[2].norm(), e[3].norm());
        if (l0 - l2).abs() > tol * l0 || (l1 - l3).abs() > tol * l1 {
            return None;
        }
        let (a, b) = (0.5 * (l0 + l2), 0.5 * (l1 + l3));
        Some((a.max(b), a.min(b)))
    }

    /// Side length when the polygon is equilateral-triangular to relative `tol`.
    pub fn as_equilateral(&self, tol: f64) -> Option<f64> {
        if self.vertices.len() != 3 {
            return None;
        }
        let l: Vec<f64> = self.edges().map(|(a, b)| a.dist(b)).collect();
        let mean = (l[0] + l[1] + l[2]) / 3.0;
        l.iter()
            .all(|x| (x - mean).abs() <= tol * mean)
            .then_some(mean)
    }

    /// Serialise as `x y` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for p in &self.vertices {
            s.push_str(&format!("{} {}\n", p.x, p.y));
        }
        s
    }

    /// Parse `x y` lines; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Polygon> {
        let mut pts = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|f| !f.is_empty())
                .collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "expected two coordinates `x y`, found {} fields",
                        fields.len()
                    ),
                });
            }
            let mut xy = [0.0; 2];
            for (k, f) in fields.iter().enumerate() {
                xy[k] = f.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("`{f}` is not a number"),
                })?;
            }
            pts.push(Point::new(xy[0], xy[1]));
        }
        if pts.len() < 3 {
            return Err(Error::Parse {
                line: last_line.max(1),
                message: format!("a polygon needs at least 3 vertices, found {}", pts.len()),
            });
        }
        Polygon::new(pts).map_err(|e| Error::Parse {
            line: last_line.max(1),
            message: e.to_string(),
        })
    }
}

impl FromStr for Polygon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Polygon::parse(s)
    }
}

impl fmt::Display for Polygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn prune_collinear(pts: &mut Vec<Point>, scale: f64) {
    loop {
        let n = pts.len();
        if n < 3 {
            return;
        }
        let mut removed = false;
        for i in 0..n {
            let a = pts[(i + n - 1) % n];
            let b = pts[i];
            let c = pts[(i + 1) % n];
            let e0 = b.sub(a);
            let e1 = c.sub(b);
            if e0.cross(e1).abs()
                <= 1e-12 * e0.norm().max(1e-300) * e1.norm().max(1e-300) + 1e-26 * scale * scale
            {
                pts.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            return;
        }
    }
}

/// Similarity class of a triangle with angles `alpha pi <= beta pi <= gamma pi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleClass {
    alpha: f64,
    beta: f64,
}

impl TriangleClass {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let tol = 1e-12;
        if !(alpha.is_finite() && beta.is_finite()) || alpha <= 0.0 {
            return Err(Error::InvalidTriangleClass(format!(
                "need 0 < alpha, got ({alpha}, {beta})"
            )));
        }
        if alpha > beta + tol {
            return Err(Error::InvalidTriangleClass(format!(
                "need alpha <= beta, got ({alpha}, {beta})"
            )));
        }
        if beta > 1.0 - alpha - beta + tol {
            return Err(Error::InvalidTriangleClass(format!(
                "need beta <= 1 - alpha - beta, got ({alpha}, {beta})"
            )));
        }
        Ok(TriangleClass { alpha, beta })
    }

    /// Class of the triangle with angles `a pi` and `b pi` (and `1 - a - b`),
    /// in any order.
    pub fn from_angles(a: f64, b: f64) -> Result<Self> {
        let mut t = [a, b, 1.0 - a - b];
        if t.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidTriangleClass(format!(
                "angles ({a}, {b}) do not form a triangle"
            )));
        }
        t.sort_by(f64::total_cmp);
        TriangleClass::new(t[0], t[1])
    }

    /// Class of a triangular polygon, from its sorted angles.
    pub fn from_polygon(p: &Polygon) -> Result<Self> {
        if p.len() != 3 {
            return Err(Error::InvalidTriangleClass(format!(
                "polygon has {} vertices",
                p.len()
            )));
        }
        let mut a: Vec<f64> = p.interior_angles().iter().map(|t| t / PI).collect();
        a.sort_by(f64::total_cmp);
        TriangleClass::new(a[0], a[1])
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        1.0 - self.alpha - self.beta
    }

    /// Side opposite the `alpha` angle for the diameter-one representative.
    pub fn side_a(&self) -> f64 {
        (self.alpha * PI).sin() / (self.gamma() * PI).sin()
    }

    /// Side opposite the `beta` angle for the diameter-one representative.
    pub fn side_b(&self) -> f64 {
        (self.beta * PI).sin() / (self.gamma() * PI).sin()
    }
}

/// Diameter-one representative: `alpha` vertex at the origin, `beta` vertex
/// at `(1, 0)`, apex at `B (cos alpha pi, sin alpha pi)`.
pub fn triangle_from_class(tc: TriangleClass) -> Result<Polygon> {
    let b = tc.side_b();
    let apex = Point::new(b * (tc.alpha * PI).cos(), b * (tc.alpha * PI).sin());
    Polygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), apex])
        .map_err(|e| Error::Degenerate(format!("triangle class ({}, {}): {e}", tc.alpha, tc.beta)))
}

/// Free function form of [`Polygon::diameter`].
pub fn diameter(p: &Polygon) -> f64 {
    p.diameter()
}

/// Free function form of [`Polygon::height`].
pub fn height(p: &Polygon) -> f64 {
    p.height()
}

/// A sector of given spec with its apex at `apex`, spanning polar angles
/// `[start_angle, start_angle + alpha pi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlacedSector {
    pub spec: SectorSpec,
    pub apex: Point,
    pub start_angle: f64,
}

impl PlacedSector {
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        let r = self.spec.radius();
        let d = p.sub(self.apex);
        if d.norm() > r * (1.0 + tol) {
            return false;
        }
        if d.norm() <= tol * r {
            return true;
        }
        let opening = self.spec.alpha() * PI;
        let mut theta = (d.y.atan2(d.x) - self.start_angle).rem_euclid(2.0 * PI);
        if theta > 2.0 * PI - tol {
            theta -= 2.0 * PI;
        }
        theta >= -tol && theta <= opening + tol
    }

    pub fn area(&self) -> f64 {
        0.5 * self.spec.alpha() * PI * self.spec.radius().powi(2)
    }
}

/// A comparison domain.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Polygon(Polygon),
    Sector(PlacedSector),
}

impl Region {
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        match self {
            Region::Polygon(q) => q.contains(p, tol),
            Region::Sector(s) => s.contains(p, tol),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Region::Polygon(q) => q.area(),
            Region::Sector(s) => s.area(),
        }
    }

    /// Axis-aligned box containing the region.
    pub fn bounding_box(&self) -> (Point, Point) {
        match self {
            Region::Polygon(q) => q.bounding_box(),
            Region::Sector(s) => {
                let r = s.spec.radius();
                (s.apex.sub(Point::new(r, r)), s.apex.add(Point::new(r, r)))
            }
        }
    }

    pub fn as_polygon(&self) -> Option<&Polygon> {
        match self {
            Region::Polygon(q) => Some(q),
            Region::Sector(_) => None,
        }
    }

    pub fn as_sector(&self) -> Option<&PlacedSector> {
        match self {
            Region::Sector(s) => Some(s),
            Region::Polygon(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SandwichKind {
    Sector,
    Isosceles,
    Rectangle,
}

/// `inner ⊆ target ⊆ outer`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sandwich {
    pub inner: Region,
    pub outer: Region,
    pub kind: SandwichKind,
}

impl Sandwich {
    /// `Area(outer) - Area(inner)`.
    pub fn area_defect(&self) -> f64 {
        self.outer.area() - self.inner.area()
    }
}

/// Inner and outer sectors at the `alpha` vertex of the diameter-one
/// triangle of class `tc`.
///
/// The outer sector has radius 1 (both adjacent sides are at most the
/// diameter). The inner radius is the distance from the vertex to the
/// opposite side when the perpendicular foot lands on it, and otherwise the
/// shorter adjacent side; either way the inner sector stays inside.
pub fn sector_sandwich(tc: TriangleClass) -> Result<Sandwich> {
    if (tc.beta - tc.alpha).abs() <= 1e-12 {
        return Err(Error::Regime(format!(
            "sector sandwich needs a strictly smallest angle, got alpha = beta = {}",
            tc.alpha
        )));
    }
    let t = triangle_from_class(tc)?;
    let v = t.vertices();
    let (o, p1, apex) = (v[0], v[1], v[2]);
    let e = apex.sub(p1);
    let foot = o.sub(p1).dot(e) / e.dot(e);
    let rho = if (0.0..=1.0).contains(&foot) {
        e.cross(o.sub(p1)).abs() / e.norm()
    } else {
        p1.norm().min(apex.norm())
    };
    let outer = PlacedSector {
        spec: SectorSpec::new(tc.alpha, 1.0)?,
        apex: o,
        start_angle: 0.0,
    };
    let inner = PlacedSector {
        spec: SectorSpec::new(tc.alpha, rho)?,
        apex: o,
        start_angle: 0.0,
    };
    Ok(Sandwich {
        inner: Region::Sector(inner),
        outer: Region::Sector(outer),
        kind: SandwichKind::Sector,
    })
}

/// Isosceles triangles bracketing an almost-isosceles triangle.
///
/// Inner: base angles `beta pi`, equal sides `A` (the side opposite
/// `alpha`), sharing the `beta` vertex and apex. Outer: base angles
/// `alpha pi`, equal sides `B`, sharing the `alpha` vertex and apex.
pub fn isosceles_sandwich(tc: TriangleClass) -> Result<Sandwich> {
    let threshold = AsymptoticConstants::printed().isosceles_ratio_threshold();
    if tc.beta >= 1.0 / 3.0 {
        return Err(Error::Regime(format!(
            "isosceles sandwich needs beta < 1/3, got {}",
            tc.beta
        )));
    }
    if tc.alpha / tc.beta <= threshold {
        return Err(Error::Regime(format!(
            "alpha/beta = {} is not above the threshold {threshold}",
            tc.alpha / tc.beta
        )));
    }
    let t = triangle_from_class(tc)?;
    let v = t.vertices();
    let (o, p1, apex) = (v[0], v[1], v[2]);
    let (a, b) = (tc.side_a(), tc.side_b());
    let q = Point::new(1.0 - 2.0 * a * (tc.beta * PI).cos(), 0.0);
    let s = Point::new(2.0 * b * (tc.alpha * PI).cos(), 0.0);
    let (inner, outer) = if (tc.beta - tc.alpha).abs() <= 1e-12 {
        (t.clone(), t)
    } else {
        (
            Polygon::new(vec![q, p1, apex])?,
            Polygon::new(vec![o, s, apex])?,
        )
    };
    Ok(Sandwich {
        inner: Region::Polygon(inner),
        outer: Region::Polygon(outer),
        kind: SandwichKind::Isosceles,
    })
}

/// Result of [`rectangle_sandwich`], in the polygon's original frame.
#[derive(Clone, Debug, PartialEq)]
pub struct RectangleSandwich {
    pub sandwich: Sandwich,
    /// Height of the inscribed rectangle in the normalized frame.
    pub inner_height: f64,
    /// Height of the bounding box in the normalized frame.
    pub outer_height: f64,
}

/// Bounding box and largest inscribed base-on-axis rectangle, both in the
/// normalized frame of `q` and mapped back to its original coordinates.
///
/// The inscribed rectangle at height `t` spans the horizontal chord at `t`
/// clipped to the base; its area is log-concave in `t`, so a golden-section
/// search (cross-checked at every vertex height) finds the maximum.
pub fn rectangle_sandwich(q: &Polygon) -> Result<RectangleSandwich> {
    let (nq, motion) = q.normalized();
    let back = motion.inverse();
    let base = nq.vertices()[1].x;
    let (lo, hi) = nq.bounding_box();
    let top = hi.y;
    let area_at = |t: f64| -> (f64, f64, f64) {
        match nq.horizontal_extent(t) {
            Some((xl, xr)) => {
                let (l, r) = (xl.max(0.0), xr.min(base));
                (t * (r - l).max(0.0), l, r)
            }
            None => (0.0, 0.0, 0.0),
        }
    };
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, top);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (area_at(c).0, area_at(d).0);
    for _ in 0..200 {
        if fc < fd {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = area_at(d).0;
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = area_at(c).0;
        }
    }
    let mut best_t = 0.5 * (a + b);
    let mut best = area_at(best_t);
    for p in nq.vertices() {
        if p.y > 0.0 {
            let cand = area_at(p.y);
            if cand.0 > best.0 {
                best = cand;
                best_t = p.y;
            }
        }
    }
    let (_, l, r) = best;
    let rect = |x0: f64, y0: f64, x1: f64, y1: f64| -> Result<Polygon> {
        Polygon::new(vec![
            back.apply(Point::new(x0, y0)),
            back.apply(Point::new(x1, y0)),
            back.apply(Point::new(x1, y1)),
            back.apply(Point::new(x0, y1)),
        ])
    };
    let outer = rect(lo.x, 0.0, hi.x, top)?;
    let inner = rect(l, 0.0, r, best_t)?;
    Ok(RectangleSandwich {
        sandwich: Sandwich {
            inner: Region::Polygon(inner),
            outer: Region::Polygon(outer),
            kind: SandwichKind::Rectangle,
        },
        inner_height: best_t,
        outer_height: top,
    })
}

/// Uniform grid `(i / 3N, j / 3N)` over the moduli triangle with
/// `1 <= i <= j` and `i + 2j <= 3N`; the collapsed edge `alpha = 0` is
/// kept one step away. The equilateral class is always included.
pub fn moduli_grid(resolution: usize) -> Result<Vec<TriangleClass>> {
    if resolution < 2 {
        return Err(Error::Domain(format!(
            "grid resolution must be >= 2, got {resolution}"
        )));
    }
    let m = 3 * resolution;
    let step = 1.0 / m as f64;
    let mut out = Vec::new();
    for i in 1..=resolution {
        for j in i..=(m - i) / 2 {
            out.push(TriangleClass::new(i as f64 * step, j as f64 * step)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn validation() {
        assert!(Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0)]).is_err());
        assert!(Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]).is_err());
        assert!(Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 1.0)]).is_err());
        // Non-convex dart.
        assert!(Polygon::from_coords(&[(0.0, 0.0), (2.0, 0.0), (1.0, 0.3), (1.0, 2.0)]).is_err());
        // Pentagram winds twice.
        let star: Vec<(f64, f64)> = (0..5)
            .map(|k| {
                let t = 4.0 * PI * k as f64 / 5.0;
                (t.cos(), t.sin())
            })
            .collect();
        assert!(Polygon::from_coords(&star).is_err());
        let cw = Polygon::from_coords(&[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]).unwrap();
        assert!(cw.area() > 0.0);
    }

    #[test]
    fn triangle_examples() {
        let eq = triangle_from_class(TriangleClass::new(1.0 / 3.0, 1.0 / 3.0).unwrap()).unwrap();
        for (a, b) in eq.edges() {
            assert!(close(a.dist(b), 1.0, 1e-14));
        }
        let ri = triangle_from_class(TriangleClass::new(0.25, 0.25).unwrap()).unwrap();
        let mut l: Vec<f64> = ri.edges().map(|(a, b)| a.dist(b)).collect();
        l.sort_by(f64::total_cmp);
        assert!(
            close(l[0], 0.5f64.sqrt(), 1e-14)
                && close(l[1], 0.5f64.sqrt(), 1e-14)
                && close(l[2], 1.0, 1e-15)
        );
        let t = triangle_from_class(TriangleClass::new(1.0 / 6.0, 1.0 / 3.0).unwrap()).unwrap();
        let mut l: Vec<f64> = t.edges().map(|(a, b)| a.dist(b)).collect();
        l.sort_by(f64::total_cmp);
        assert!(
            close(l[0], 0.5, 1e-14)
                && close(l[1], 0.75f64.sqrt(), 1e-14)
                && close(l[2], 1.0, 1e-15)
        );
        assert!(TriangleClass::new(0.0, 0.3).is_err());
        assert!(TriangleClass::new(0.3, 0.2).is_err());
        assert!(TriangleClass::new(0.2, 0.45).is_err());
        let c = TriangleClass::from_angles(0.15, 0.45).unwrap();
        assert!(close(c.alpha(), 0.15, 1e-15) && close(c.beta(), 0.40, 1e-15));
        assert!(TriangleClass::from_angles(0.6, 0.5).is_err());
    }

    #[test]
    fn class_round_trip() {
        for tc in moduli_grid(12).unwrap() {
            let t = triangle_from_class(tc).unwrap();
            let back = TriangleClass::from_polygon(&t).unwrap();
            assert!(close(back.alpha(), tc.alpha(), 1e-12) && close(back.beta(), tc.beta(), 1e-12));
            assert!(close(t.diameter(), 1.0, 1e-14));
        }
    }

    #[test]
    fn diameter_and_height_examples() {
        let sq = Polygon::rectangle(1.0, 1.0).unwrap();
        assert!(close(sq.diameter(), 2f64.sqrt(), 1e-15));
        let r = Polygon::rectangle(3.0, 2.0).unwrap();
        assert!(close(r.diameter(), 13f64.sqrt(), 1e-15));
        assert!(close(r.height(), 2.0, 1e-15));
        let tall = Polygon::rectangle(0.5, 2.0).unwrap();
        assert!(close(tall.height(), 0.5, 1e-15));
        let rt = Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (0.0, 0.1)]).unwrap();
        // Longest side is the hypotenuse; strip height is the altitude onto it.
        assert!(close(rt.height(), 0.1 / 1.01f64.sqrt(), 1e-14));
        let eq = Polygon::equilateral(1.0).unwrap();
        assert!(close(eq.height(), 0.75f64.sqrt(), 1e-15));
    }

    #[test]
    fn normalization_puts_longest_side_on_axis() {
        let p = Polygon::from_coords(&[(2.0, 1.0), (3.0, 3.0), (0.5, 4.0), (0.0, 2.5)]).unwrap();
        let (q, m) = p.normalized();
        assert_eq!(q.vertices()[0], Point::new(0.0, 0.0));
        assert!(q.vertices()[1].y == 0.0 && q.vertices()[1].x > 0.0);
        assert!(q.vertices().iter().all(|v| v.y >= 0.0));
        let inv = m.inverse();
        for (a, b) in p
            .vertices()
            .iter()
            .zip((0..4).map(|k| inv.apply(q.vertices()[(k + 4 - p.longest_side()) % 4])))
        {
            assert!(a.dist(b) < 1e-13);
        }
        assert!(close(q.area(), p.area(), 1e-13));
    }

    #[test]
    fn extents_and_clipping() {
        let p = Polygon::from_coords(&[(0.0, 0.0), (2.0, 0.0), (1.0, 1.0)]).unwrap();
        let (lo, hi) = p.vertical_extent(0.5).unwrap();
        assert!(close(lo, 0.0, 1e-15) && close(hi, 0.5, 1e-15));
        assert!(p.vertical_extent(2.5).is_none());
        let (l, r) = p.horizontal_extent(0.5).unwrap();
        assert!(close(l, 0.5, 1e-15) && close(r, 1.5, 1e-15));
        let right = p.clip_vertical(1.0, true).unwrap();
        assert!(close(right.area(), 0.5, 1e-14));
        let left = p.clip_vertical(0.5, false).unwrap();
        assert!(close(left.area(), 0.125, 1e-14));
        assert!(p.clip_vertical(3.0, true).is_none());
    }

    #[test]
    fn sector_sandwich_examples() {
        let s = sector_sandwich(TriangleClass::new(0.05, 0.45).unwrap()).unwrap();
        let inner = s.inner.as_sector().unwrap();
        let outer = s.outer.as_sector().unwrap();
        assert_eq!(outer.spec.radius(), 1.0);
        let want = (0.45 * PI).sin() / (0.5 * PI).sin();
        assert!(
            close(inner.spec.radius(), want, 1e-12),
            "{}",
            inner.spec.radius()
        );
        assert!(close(inner.spec.radius(), 0.98769, 1e-5));
        assert!(matches!(
            sector_sandwich(TriangleClass::new(0.1, 0.1).unwrap()),
            Err(Error::Regime(_))
        ));
        // Acute case: foot of the perpendicular lands on the opposite side.
        let s = sector_sandwich(TriangleClass::new(0.2, 0.35).unwrap()).unwrap();
        let tc = TriangleClass::new(0.2, 0.35).unwrap();
        let want = (0.35 * PI).sin(); // distance from the alpha vertex to the line through the beta vertex
        assert!(close(
            s.inner.as_sector().unwrap().spec.radius(),
            want,
            1e-12
        ));
        assert!(s.inner.as_sector().unwrap().spec.radius() <= tc.side_b());
    }

    #[test]
    fn isosceles_sandwich_examples() {
        let tc = TriangleClass::new(0.1, 0.1).unwrap();
        let s = isosceles_sandwich(tc).unwrap();
        let t = triangle_from_class(tc).unwrap();
        assert_eq!(s.inner.as_polygon().unwrap(), &t);
        assert_eq!(s.outer.as_polygon().unwrap(), &t);
        let s = isosceles_sandwich(TriangleClass::new(0.08, 0.1).unwrap()).unwrap();
        let inner = s.inner.as_polygon().unwrap();
        let outer = s.outer.as_polygon().unwrap();
        let ia = inner.interior_angles();
        assert!(ia.iter().filter(|a| close(**a, 0.1 * PI, 1e-12)).count() == 2);
        let oa = outer.interior_angles();
        assert!(oa.iter().filter(|a| close(**a, 0.08 * PI, 1e-12)).count() == 2);
        assert!(matches!(
            isosceles_sandwich(TriangleClass::new(0.06, 0.1).unwrap()),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn rectangle_sandwich_examples() {
        let r = Polygon::rectangle(2.0, 0.3).unwrap();
        let s = rectangle_sandwich(&r).unwrap();
        assert!(s.sandwich.area_defect().abs() < 1e-12);
        for h in [0.2, 0.1, 0.05] {
            // The slanted top (length sqrt(1 + h^6)) is the longest side, so the
            // sandwich is built in its frame: defect = h^3 (1 + O(h)).
            let q = Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (1.0, h - h * h * h), (0.0, h)])
                .unwrap();
            let ratio = rectangle_sandwich(&q).unwrap().sandwich.area_defect() / (h * h * h);
            assert!(ratio >= 1.0 && ratio <= 1.0 + 2.0 * h, "h {h}: {ratio}");
        }
        // Longer base: defect scales with the base length.
        let h = 0.1;
        let q = Polygon::from_coords(&[(0.0, 0.0), (1.2, 0.0), (1.2, h - h * h * h), (0.0, h)])
            .unwrap();
        let s = rectangle_sandwich(&q).unwrap();
        let ratio = s.sandwich.area_defect() / (1.2 * h * h * h);
        assert!(ratio >= 1.0 && ratio <= 1.0 + 2.0 * h, "{ratio}");
        // Thin triangle: best rectangle sits at half height with area h/4.
        let h = 0.1;
        let t = Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (0.4, h)]).unwrap();
        let s = rectangle_sandwich(&t).unwrap();
        let d = s.sandwich.area_defect();
        assert!(d > 0.0 && d < h);
        // Brute-force sweep oracle at resolution 1e-4.
        let mut best: f64 = 0.0;
        let mut k = 1;
        while (k as f64) * 1e-4 * h < h {
            let y = k as f64 * 1e-4 * h;
            let (l, r) = t.horizontal_extent(y).unwrap();
            best = best.max(y * (r - l));
            k += 1;
        }
        assert!(close(s.sandwich.inner.area(), best, 1e-8));
        assert!(close(best, h / 4.0, 1e-8));
    }

    #[test]
    fn moduli_grid_examples() {
        let g2 = moduli_grid(2).unwrap();
        assert!(g2
            .iter()
            .any(|t| close(t.alpha(), 1.0 / 3.0, 1e-15) && close(t.beta(), 1.0 / 3.0, 1e-15)));
        let sizes: Vec<usize> = [4, 8, 16]
            .iter()
            .map(|&n| moduli_grid(n).unwrap().len())
            .collect();
        let r1 = sizes[1] as f64 / sizes[0] as f64;
        let r2 = sizes[2] as f64 / sizes[1] as f64;
        assert!(r1 > 3.0 && r2 > 3.5 && r2 < 4.5, "{sizes:?}");
        assert_eq!(moduli_grid(10).unwrap().len(), 75);
        assert!(moduli_grid(1).is_err());
    }

    #[test]
    fn text_round_trip_and_errors() {
        let p = Polygon::from_coords(&[(0.0, 0.0), (1.5, 0.0), (0.25, 0.75)]).unwrap();
        let back = Polygon::parse(&p.to_text()).unwrap();
        assert_eq!(p, back);
        let text = "# header\n0 0\n1 0 # comment\n\n0 1\n";
        assert_eq!(Polygon::parse(text).unwrap().len(), 3);
        match Polygon::parse("0 0\n1 0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match Polygon::parse("0 0\n1 x\n0 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match Polygon::parse("0 0\n1 0 3\n0 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shape_recognition() {
        let r = Polygon::rectangle(2.0, 1.0).unwrap();
        let m = RigidMotion {
            cos: 0.6,
            sin: 0.8,
            tx: 3.0,
            ty: -1.0,
        };
        assert_eq!(
            r.transformed(&m)
                .as_rectangle(1e-10)
                .map(|(a, b)| (a.round(), b.round())),
            Some((2.0, 1.0))
        );
        assert!(Polygon::equilateral(2.0)
            .unwrap()
            .as_equilateral(1e-10)
            .is_some());
        let t = Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (0.5, 0.8)]).unwrap();
        assert!(t.as_equilateral(1e-10).is_none());
        let trap = Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (1.0, 0.9), (0.0, 1.0)]).unwrap();
        assert!(trap.as_rectangle(1e-10).is_none());
    }
}
