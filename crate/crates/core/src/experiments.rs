//! Degenerating polygon families, the bounded/unbounded gap classifier, and
//! batch runs producing one gap report per family member.
//!
//! A family is described by a small `key=value` text file:
//!
//! ```text
//! # hexagons whose flanks drop by kappa * h^x at the classifier window
//! kind=quad_unbounded
//! schedule=0.2,0.1,0.05,0.025
//! x=1.5
//! ```
//!
//! Kinds and their parameters (the schedule lists `alpha` for triangle
//! trajectories and the height `h` otherwise, strictly decreasing):
//!
//! * `triangle_trajectory` — `beta` fixed, angle fractions `(alpha, beta)`.
//! * `rectangle` — `1 x h` rectangles.
//! * `quad_bounded` — right trapezoids `(0,0),(1,0),(1,h-h^3),(0,h)`.
//! * `quad_unbounded` — `x` in `(1, 5/3)`, optional `kappa` (default 0.1):
//!   symmetric hexagon with a plateau of height `h` and width `sqrt(h)`
//!   centred at `1/2`, flanks steep enough that the widest classifier
//!   window sees a drop of `kappa * h^x`.
//! * `custom` — pentagon `(0,0),(1,0),(1,h-rd h^re),(c,h),(0,h-ld h^le)`
//!   with `apex=c` (0.5), `left_drop=ld`, `left_exp=le`, `right_drop=rd`,
//!   `right_exp=re` (all 1 by default: a triangle). End vertices at height
//!   zero are dropped.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{dirichlet_eigenvalues_with, SolverConfig};
use crate::gap::{
    format_number, gap, sector_sandwich_gap_bound, sector_sandwich_report, Bound, BoundKind,
    GapReport, CSV_HEADER, TAG_SECTOR,
};
use crate::geometry::{
    moduli_grid, rectangle_sandwich, triangle_from_class, Polygon, TriangleClass,
};

/// Exponent threshold separating the unbounded case from the undecided one.
pub const CRITICAL_EXPONENT: f64 = 5.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    TriangleTrajectory,
    QuadBounded,
    QuadUnbounded,
    Rectangle,
    Custom,
}

impl FamilyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyKind::TriangleTrajectory => "triangle_trajectory",
            FamilyKind::QuadBounded => "quad_bounded",
            FamilyKind::QuadUnbounded => "quad_unbounded",
            FamilyKind::Rectangle => "rectangle",
            FamilyKind::Custom => "custom",
        }
    }

    fn allowed_params(self) -> &'static [&'static str] {
        match self {
            FamilyKind::TriangleTrajectory => &["beta"],
            FamilyKind::QuadBounded | FamilyKind::Rectangle => &[],
            FamilyKind::QuadUnbounded => &["x", "kappa"],
            FamilyKind::Custom => &["apex", "left_drop", "left_exp", "right_drop", "right_exp"],
        }
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "triangle_trajectory" => FamilyKind::TriangleTrajectory,
            "quad_bounded" => FamilyKind::QuadBounded,
            "quad_unbounded" => FamilyKind::QuadUnbounded,
            "rectangle" => FamilyKind::Rectangle,
            "custom" => FamilyKind::Custom,
            other => return Err(Error::Descriptor(format!("unknown family kind '{other}'"))),
        })
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A validated family: kind, parameters and a strictly decreasing schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyDescriptor {
    kind: FamilyKind,
    params: BTreeMap<String, f64>,
    schedule: Vec<f64>,
}

impl FamilyDescriptor {
    pub fn new(
        kind: FamilyKind,
        params: BTreeMap<String, f64>,
        schedule: Vec<f64>,
    ) -> Result<Self> {
        let d = FamilyDescriptor {
            kind,
            params,
            schedule,
        };
        d.validate()?;
        Ok(d)
    }

    /// Convenience constructor from `(name, value)` pairs.
    pub fn with_params(kind: FamilyKind, params: &[(&str, f64)], schedule: &[f64]) -> Result<Self> {
        let map = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        FamilyDescriptor::new(kind, map, schedule.to_vec())
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn schedule(&self) -> &[f64] {
        &self.schedule
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    fn param_or(&self, name: &str, default: f64) -> f64 {
        self.param(name).unwrap_or(default)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Descriptor(m));
        if self.schedule.is_empty() {
            return bad("schedule is empty".into());
        }
        if let Some(v) = self.schedule.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return bad(format!("schedule entries must be positive, got {v}"));
        }
        if self.schedule.windows(2).any(|w| w[1] >= w[0]) {
            return bad("schedule must be strictly decreasing".into());
        }
        for (k, v) in &self.params {
            if !self.kind.allowed_params().contains(&k.as_str()) {
                return bad(format!(
                    "parameter '{k}' does not apply to kind {}",
                    self.kind
                ));
            }
            if !v.is_finite() {
                return bad(format!("parameter '{k}' must be finite"));
            }
        }
        let max_param = self.schedule[0];
        match self.kind {
            FamilyKind::TriangleTrajectory => {
                let Some(beta) = self.param("beta") else {
                    return bad("triangle_trajectory needs beta".into());
                };
                for &a in &self.schedule {
                    TriangleClass::from_angles(a, beta).map_err(|e| {
                        Error::Descriptor(format!("alpha {a} with beta {beta}: {e}"))
                    })?;
                }
            }
            FamilyKind::Rectangle | FamilyKind::QuadBounded | FamilyKind::Custom => {
                if max_param >= 1.0 {
                    return bad(format!("heights must be < 1, got {max_param}"));
                }
            }
            FamilyKind::QuadUnbounded => {
                let Some(x) = self.param("x") else {
                    return bad("quad_unbounded needs x".into());
                };
                if !(x > 1.0 && x < CRITICAL_EXPONENT) {
                    return bad(format!("quad_unbounded needs 1 < x < 5/3, got {x}"));
                }
                let kappa = self.param_or("kappa", DEFAULT_KAPPA);
                if !(kappa > 0.0 && kappa <= 1.0) {
                    return bad(format!("kappa must lie in (0, 1], got {kappa}"));
                }
                if max_param >= 0.5 {
                    return bad(format!("heights must be < 1/2, got {max_param}"));
                }
            }
        }
        if self.kind == FamilyKind::Custom {
            let c = self.param_or("apex", 0.5);
            if !(0.0..=1.0).contains(&c) {
                return bad(format!("apex must lie in [0, 1], got {c}"));
            }
            for k in ["left_drop", "left_exp", "right_drop", "right_exp"] {
                if self.param_or(k, 1.0) <= 0.0 {
                    return bad(format!("{k} must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Parse the `key=value` format; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut schedule = None;
        let mut params = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let perr = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| perr(format!("expected key=value, got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "kind" => {
                    if kind.is_some() {
                        return Err(perr("duplicate kind".into()));
                    }
                    kind = Some(
                        value
                            .parse::<FamilyKind>()
                            .map_err(|e| perr(e.to_string()))?,
                    );
                }
                "schedule" => {
                    if schedule.is_some() {
                        return Err(perr("duplicate schedule".into()));
                    }
                    let vals = value
                        .split(',')
                        .map(|s| {
                            s.trim()
                                .parse::<f64>()
                                .map_err(|_| perr(format!("bad schedule entry '{}'", s.trim())))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    schedule = Some(vals);
                }
                _ => {
                    let v = value
                        .parse::<f64>()
                        .map_err(|_| perr(format!("bad number '{value}' for {key}")))?;
                    if params.insert(key.to_string(), v).is_some() {
                        return Err(perr(format!("duplicate parameter {key}")));
                    }
                }
            }
        }
        let kind = kind.ok_or_else(|| Error::Descriptor("missing kind".into()))?;
        let schedule = schedule.ok_or_else(|| Error::Descriptor("missing schedule".into()))?;
        FamilyDescriptor::new(kind, params, schedule)
    }

    pub fn to_text(&self) -> String {
        let sched: Vec<String> = self.schedule.iter().map(|v| v.to_string()).collect();
        let mut s = format!("kind={}\nschedule={}\n", self.kind, sched.join(","));
        for (k, v) in &self.params {
            s.push_str(&format!("{k}={v}\n"));
        }
        s
    }
}

impl FromStr for FamilyDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyDescriptor::parse(s)
    }
}

const DEFAULT_KAPPA: f64 = 0.1;

/// Canonical triangle class of a trajectory entry.
fn trajectory_class(alpha: f64, beta: f64) -> Result<TriangleClass> {
    TriangleClass::from_angles(alpha, beta)
}

/// One polygon per schedule entry, longest side `[0, 1]` on the x-axis.
pub fn make_family(desc: &FamilyDescriptor) -> Result<Vec<Polygon>> {
    desc.schedule
        .iter()
        .map(|&t| make_member(desc, t))
        .collect()
}

fn make_member(desc: &FamilyDescriptor, t: f64) -> Result<Polygon> {
    let convexity = |message: String| Error::Convexity { param: t, message };
    let poly = |v: Vec<(f64, f64)>| Polygon::from_coords(&v).map_err(|e| convexity(e.to_string()));
    match desc.kind {
        FamilyKind::TriangleTrajectory => {
            let beta = desc.param("beta").expect("validated");
            Ok(triangle_from_class(trajectory_class(t, beta)?)?
                .normalized()
                .0)
        }
        FamilyKind::Rectangle => poly(vec![(0.0, 0.0), (1.0, 0.0), (1.0, t), (0.0, t)]),
        FamilyKind::QuadBounded => {
            poly(vec![(0.0, 0.0), (1.0, 0.0), (1.0, t - t.powi(3)), (0.0, t)])
        }
        FamilyKind::QuadUnbounded => {
            let x = desc.param("x").expect("validated");
            let kappa = desc.param_or("kappa", DEFAULT_KAPPA);
            let half_plateau = 0.5 * t.sqrt();
            let half_window = 0.5 * window_width(t, 0.4, 1.0);
            let run = half_window - half_plateau;
            if run <= 0.0 {
                return Err(convexity(format!(
                    "widest window {} does not cover the plateau {}",
                    2.0 * half_window,
                    t.sqrt()
                )));
            }
            let slope = kappa * t.powf(x) / run;
            let end = t - slope * (0.5 - half_plateau);
            if end <= 0.0 {
                return Err(convexity(format!("flank end height {end} is not positive")));
            }
            poly(vec![
                (0.0, 0.0),
                (1.0, 0.0),
                (1.0, end),
                (0.5 + half_plateau, t),
                (0.5 - half_plateau, t),
                (0.0, end),
            ])
        }
        FamilyKind::Custom => {
            let c = desc.param_or("apex", 0.5);
            let left = t - desc.param_or("left_drop", 1.0) * t.powf(desc.param_or("left_exp", 1.0));
            let right =
                t - desc.param_or("right_drop", 1.0) * t.powf(desc.param_or("right_exp", 1.0));
            if left < -1e-14 || right < -1e-14 {
                return Err(convexity(format!(
                    "end heights ({left}, {right}) below the base"
                )));
            }
            let mut v = vec![(0.0, 0.0), (1.0, 0.0)];
            if c < 1.0 && right > 1e-14 * t {
                v.push((1.0, right));
            }
            v.push((c, t));
            if c > 0.0 && left > 1e-14 * t {
                v.push((0.0, left));
            }
            poly(v)
        }
    }
}

/// Classifier constants standing in for the implied constants of the two
/// hypotheses: bounded if the rectangle defect is `<= k1 h^3`; the unbounded
/// witness `U` must have diameter `<= k2 h^p` for a window power `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierConfig {
    pub k1: f64,
    pub k2: f64,
    pub window_powers: Vec<f64>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            k1: 2.0,
            k2: 1.0,
            window_powers: vec![0.4, 0.5, 0.6],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Bounded,
    Unbounded,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Bounded => "bounded",
            Verdict::Unbounded => "unbounded",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Verdict plus a one-line, comma-free description of the witness.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierVerdict {
    pub verdict: Verdict,
    pub witness: String,
}

/// Best inscribed plateau window found by the sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub power: f64,
    pub x0: f64,
    pub x1: f64,
    pub diameter_u: f64,
    pub height_u: f64,
    pub height_v: f64,
}

/// Geometric measurements behind a verdict, in the frame where the longest
/// side is `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Theorem2Analysis {
    pub h: f64,
    pub outer_area: f64,
    pub inner_area: f64,
    pub window: Option<Window>,
}

impl Theorem2Analysis {
    pub fn defect(&self) -> f64 {
        self.outer_area - self.inner_area
    }

    /// `ln(h - h(V)) / ln h` for the best window.
    pub fn exponent(&self) -> Option<f64> {
        let w = self.window?;
        let drop = self.h - w.height_v;
        (drop > 0.0).then(|| drop.ln() / self.h.ln())
    }
}

fn window_width(h: f64, power: f64, k2: f64) -> f64 {
    let d = k2 * h.powf(power);
    (d * d - h * h).max(0.0).sqrt()
}

/// Measure `q` (any position and scale): height, rectangle sandwich and the
/// best plateau window. `None` if the polygon is not collapsed (`h >= 1/2`).
pub fn analyze_theorem2(q: &Polygon, cfg: &ClassifierConfig) -> Result<Option<Theorem2Analysis>> {
    let (nq, _) = q.normalized();
    let base = nq.vertices()[1].x;
    let nq = nq.scaled(1.0 / base)?;
    let h = nq.vertices().iter().map(|p| p.y).fold(0.0, f64::max);
    if h >= 0.5 {
        return Ok(None);
    }
    let rs = rectangle_sandwich(&nq)?;
    let window = best_window(&nq, h, cfg);
    Ok(Some(Theorem2Analysis {
        h,
        outer_area: rs.sandwich.outer.area(),
        inner_area: rs.sandwich.inner.area(),
        window,
    }))
}

fn best_window(q: &Polygon, h: f64, cfg: &ClassifierConfig) -> Option<Window> {
    let (lo, hi) = q.bounding_box();
    let top_tol = 1e-12 * h;
    let tops: Vec<f64> = q
        .vertices()
        .iter()
        .filter(|p| p.y >= h - top_tol)
        .map(|p| p.x)
        .collect();
    let peak_l = tops.iter().copied().fold(f64::INFINITY, f64::min);
    let peak_r = tops.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let xmin = lo.x.max(0.0);
    let xmax = hi.x.min(1.0);
    let edge_tol = 1e-12;
    let top = |x: f64| q.vertical_extent(x).map_or(0.0, |e| e.1);
    // Height of the complement: the upper chain rises up to the window and
    // falls after it, so only the chain at the two cut lines matters.
    let height_v = |x0: f64, x1: f64| -> f64 {
        let l = if x0 > lo.x + edge_tol { top(x0) } else { 0.0 };
        let r = if x1 < hi.x - edge_tol { top(x1) } else { 0.0 };
        l.max(r)
    };
    let mut best: Option<Window> = None;
    for &p in &cfg.window_powers {
        let w = window_width(h, p, cfg.k2);
        let (a0, b0) = ((peak_r - w).max(xmin), peak_l.min(xmax - w));
        if !(w > 0.0 && a0 <= b0) {
            continue;
        }
        // height_v is quasi-convex in the left cut on [a0, b0].
        let f = |x0: f64| height_v(x0, x0 + w);
        let (mut a, mut b) = (a0, b0);
        for _ in 0..200 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if f(m1) <= f(m2) {
                b = m2;
            } else {
                a = m1;
            }
        }
        let mut x0 = 0.5 * (a + b);
        for cand in [a0, b0] {
            if f(cand) < f(x0) {
                x0 = cand;
            }
        }
        let x1 = x0 + w;
        let mut u = q.clone();
        if x0 > lo.x + edge_tol {
            u = match u.clip_vertical(x0, true) {
                Some(u) => u,
                None => continue,
            };
        }
        if x1 < hi.x - edge_tol {
            u = match u.clip_vertical(x1, false) {
                Some(u) => u,
                None => continue,
            };
        }
        let height_u = u.vertices().iter().map(|p| p.y).fold(0.0, f64::max);
        let cand = Window {
            power: p,
            x0,
            x1,
            diameter_u: u.diameter(),
            height_u,
            height_v: f(x0),
        };
        if height_u < h - top_tol {
            continue;
        }
        if best.is_none_or(|b| cand.height_v < b.height_v) {
            best = Some(cand);
        }
    }
    best
}

/// Decide from an analysis; `family_exponent` replaces the per-polygon
/// exponent when a family-level fit is available.
pub fn decide_theorem2(
    a: &Theorem2Analysis,
    cfg: &ClassifierConfig,
    family_exponent: Option<f64>,
) -> ClassifierVerdict {
    let h = a.h;
    let k1h3 = cfg.k1 * h.powi(3);
    if a.defect() <= k1h3 * (1.0 + 1e-9) {
        return ClassifierVerdict {
            verdict: Verdict::Bounded,
            witness: format!(
                "h={h:.6e} area(R)={:.6e} area(r)={:.6e} defect={:.6e} <= k1*h^3={k1h3:.6e}",
                a.outer_area,
                a.inner_area,
                a.defect()
            ),
        };
    }
    let mut why = format!("h={h:.6e} defect={:.6e} > k1*h^3={k1h3:.6e}", a.defect());
    if let (Some(w), Some(own)) = (a.window, a.exponent()) {
        let x = family_exponent.unwrap_or(own);
        let source = if family_exponent.is_some() {
            "family fit"
        } else {
            "this polygon"
        };
        let diam_ok = w.diameter_u <= cfg.k2 * h.powf(0.4) * (1.0 + 1e-9);
        let u_desc = format!(
            "U=[{:.6e} {:.6e}] (window h^{}) diam(U)={:.6e} ht(U)={:.6e} ht(V)={:.6e} x={x:.4} ({source})",
            w.x0, w.x1, w.power, w.diameter_u, w.height_u, w.height_v
        );
        if diam_ok && x < CRITICAL_EXPONENT {
            return ClassifierVerdict {
                verdict: Verdict::Unbounded,
                witness: u_desc,
            };
        }
        why.push_str(&format!("; {u_desc} not below 5/3"));
    } else {
        why.push_str("; no plateau window with a positive drop");
    }
    ClassifierVerdict {
        verdict: Verdict::Indeterminate,
        witness: why,
    }
}

/// Classify with default constants and a per-polygon exponent.
pub fn classify_theorem2(q: &Polygon) -> ClassifierVerdict {
    classify_theorem2_with(q, &ClassifierConfig::default(), None)
}

pub fn classify_theorem2_with(
    q: &Polygon,
    cfg: &ClassifierConfig,
    family_exponent: Option<f64>,
) -> ClassifierVerdict {
    match analyze_theorem2(q, cfg) {
        Ok(Some(a)) => decide_theorem2(&a, cfg, family_exponent),
        Ok(None) => ClassifierVerdict {
            verdict: Verdict::Indeterminate,
            witness: "not collapsed (height >= 1/2)".into(),
        },
        Err(e) => ClassifierVerdict {
            verdict: Verdict::Indeterminate,
            witness: format!("analysis failed: {e}"),
        },
    }
}

/// Least-squares slope of `ln(h - h(V))` against `ln h` over the members
/// that have a window; needs two distinct heights.
pub fn family_exponent(analyses: &[Theorem2Analysis]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = analyses
        .iter()
        .filter_map(|a| {
            let w = a.window?;
            let drop = a.h - w.height_v;
            (drop > 0.0).then(|| (a.h.ln(), drop.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// One family member's result.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyRow {
    /// Schedule entry (alpha or h).
    pub parameter: f64,
    pub polygon: Polygon,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub report: Option<GapReport>,
    pub verdict: ClassifierVerdict,
    /// Failures and notes for this entry.
    pub flags: Vec<String>,
}

/// Header of [`FamilyRow::csv_row`].
pub fn family_csv_header() -> String {
    format!("{CSV_HEADER},verdict,witness")
}

impl FamilyRow {
    pub fn csv_row(&self) -> String {
        let base = match &self.report {
            Some(r) => {
                let mut r = r.clone();
                r.flags.extend(self.flags.iter().cloned());
                r.csv_row(self.alpha, self.beta)
            }
            None => {
                let opt = |v: Option<f64>| v.map(format_number).unwrap_or_default();
                format!(
                    "{},{},{},,,,,,failed,{}",
                    opt(self.alpha),
                    opt(self.beta),
                    format_number(self.polygon.diameter()),
                    self.flags.join(";")
                )
            }
        };
        format!(
            "{base},{},{}",
            self.verdict.verdict,
            self.verdict.witness.replace(',', ";")
        )
    }

    pub fn xi(&self) -> Option<f64> {
        self.report.as_ref().map(|r| r.xi)
    }
}

/// Options for [`run_family`].
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RunOptions {
    pub solver: SolverConfig,
    pub classifier: ClassifierConfig,
}

/// Gap report and verdict for every member, in schedule order. Members are
/// solved in parallel; failures become flags on their row.
pub fn run_family(
    desc: &FamilyDescriptor,
    solver_tol: f64,
    opts: &RunOptions,
) -> Result<Vec<FamilyRow>> {
    let polys = make_family(desc)?;
    let analyses: Vec<Option<Theorem2Analysis>> = polys
        .par_iter()
        .map(|p| analyze_theorem2(p, &opts.classifier).ok().flatten())
        .collect();
    let present: Vec<Theorem2Analysis> = analyses.iter().flatten().cloned().collect();
    let fit = if present.len() >= 2 {
        family_exponent(&present)
    } else {
        None
    };
    let rows = desc
        .schedule
        .par_iter()
        .zip(polys.par_iter())
        .zip(analyses.par_iter())
        .map(|((&t, p), a)| {
            let verdict = match a {
                Some(a) => decide_theorem2(a, &opts.classifier, fit),
                None => ClassifierVerdict {
                    verdict: Verdict::Indeterminate,
                    witness: "not collapsed (height >= 1/2)".into(),
                },
            };
            solve_member(desc, t, p, solver_tol, opts, verdict)
        })
        .collect();
    Ok(rows)
}

fn solve_member(
    desc: &FamilyDescriptor,
    t: f64,
    p: &Polygon,
    tol: f64,
    opts: &RunOptions,
    verdict: ClassifierVerdict,
) -> FamilyRow {
    let class = match desc.kind {
        FamilyKind::TriangleTrajectory => {
            trajectory_class(t, desc.param("beta").expect("validated")).ok()
        }
        _ => None,
    };
    let mut flags = Vec::new();
    let fem = dirichlet_eigenvalues_with(p, 2, tol, &opts.solver).and_then(|s| gap(p, &s));
    let report = match (fem, class) {
        (Ok(mut r), Some(tc)) => {
            if let Ok(b) = sector_sandwich_gap_bound(tc) {
                r.add_lower_bound(Bound::certified(b, TAG_SECTOR));
            }
            Some(r)
        }
        (Ok(r), None) => Some(r),
        (Err(Error::ThinDomain { .. }), Some(tc)) => {
            flags.push("fem_refused_thin".to_string());
            match sector_sandwich_report(tc) {
                Ok(r) => Some(r),
                Err(e) => {
                    flags.push(flag_text(&e));
                    None
                }
            }
        }
        (Err(e), _) => {
            flags.push(flag_text(&e));
            None
        }
    };
    FamilyRow {
        parameter: t,
        polygon: p.clone(),
        alpha: class.map(|c| c.alpha()),
        beta: class.map(|c| c.beta()),
        report,
        verdict,
        flags,
    }
}

/// Error text made safe for a CSV field.
fn flag_text(e: &Error) -> String {
    format!("error: {e}").replace([',', '\n'], ";")
}

/// Gap report for the diameter-one triangle of class `tc`: FEM when the
/// triangle is thick enough, otherwise the sector sandwich (flagged as a
/// lower estimate). The sector bound is attached whenever it applies.
pub fn triangle_gap(tc: TriangleClass, tol: f64, solver: &SolverConfig) -> Result<GapReport> {
    let p = triangle_from_class(tc)?;
    match dirichlet_eigenvalues_with(&p, 2, tol, solver).and_then(|s| gap(&p, &s)) {
        Ok(mut r) => {
            if let Ok(b) = sector_sandwich_gap_bound(tc) {
                r.add_lower_bound(Bound::certified(b, TAG_SECTOR));
            }
            Ok(r)
        }
        Err(Error::ThinDomain { .. }) => {
            let mut r = sector_sandwich_report(tc)?;
            r.flags.push("fem_refused_thin".into());
            Ok(r)
        }
        Err(e) => Err(e),
    }
}

/// One moduli-grid class and its report (or the failure that replaced it).
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub class: TriangleClass,
    pub report: Option<GapReport>,
    pub flags: Vec<String>,
}

impl ScanRow {
    pub fn csv_row(&self) -> String {
        match &self.report {
            Some(r) => r.csv_row(Some(self.class.alpha()), Some(self.class.beta())),
            None => format!(
                "{},{},,,,,,,failed,{}",
                format_number(self.class.alpha()),
                format_number(self.class.beta()),
                self.flags.join(";")
            ),
        }
    }

    pub fn xi(&self) -> Option<f64> {
        self.report.as_ref().map(|r| r.xi)
    }
}

/// Gap over `moduli_grid(resolution)`, in grid order.
pub fn scan_moduli(resolution: usize, tol: f64, solver: &SolverConfig) -> Result<Vec<ScanRow>> {
    let grid = moduli_grid(resolution)?;
    Ok(grid
        .par_iter()
        .map(|&class| match triangle_gap(class, tol, solver) {
            Ok(r) => ScanRow {
                class,
                report: Some(r),
                flags: Vec::new(),
            },
            Err(e) => ScanRow {
                class,
                report: None,
                flags: vec![flag_text(&e)],
            },
        })
        .collect())
}

/// Row of the scan attaining the smallest computed `xi` (first on ties);
/// lower-estimate rows are skipped since their `xi` is not the gap.
pub fn scan_minimum(rows: &[ScanRow]) -> Option<&ScanRow> {
    rows.iter()
        .filter(|r| r.report.as_ref().is_some_and(|g| !g.is_lower_estimate()))
        .fold(None, |best: Option<&ScanRow>, r| match best {
            Some(b) if b.xi() <= r.xi() => Some(b),
            _ => Some(r),
        })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    /// The computed value is consistent with the bound within its error bars.
    Respected,
    Violated,
    /// The bound applies but there is no computed value to compare.
    Unchecked,
    /// The bound does not apply to this polygon.
    Skipped,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Respected => "respected",
            CheckStatus::Violated => "violated",
            CheckStatus::Unchecked => "unchecked",
            CheckStatus::Skipped => "skipped",
        }
    }
}

/// One line of a certification report.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateLine {
    pub tag: String,
    /// What the bound constrains (`xi` or `lambda1`).
    pub quantity: &'static str,
    pub value: Option<f64>,
    pub kind: BoundKind,
    pub status: CheckStatus,
    pub note: String,
}

/// Everything known about `p`'s gap: the computed report (if FEM ran) and
/// every bound with its regime and whether the computed values respect it.
#[derive(Clone, Debug, PartialEq)]
pub struct Certification {
    pub report: Option<GapReport>,
    pub fem_note: String,
    pub lines: Vec<CertificateLine>,
}

pub const CERTIFY_HEADER: &str = "bound,quantity,value,kind,status,note";

impl Certification {
    pub fn csv_rows(&self) -> Vec<String> {
        self.lines
            .iter()
            .map(|l| {
                format!(
                    "{},{},{},{},{},{}",
                    l.tag,
                    l.quantity,
                    l.value.map(format_number).unwrap_or_default(),
                    l.kind,
                    l.status.as_str(),
                    l.note.replace(',', ";")
                )
            })
            .collect()
    }

    pub fn any_violation(&self) -> bool {
        self.lines
            .iter()
            .any(|l| l.status == CheckStatus::Violated && l.kind == BoundKind::Certified)
    }
}

pub fn certify(p: &Polygon, tol: f64, solver: &SolverConfig) -> Certification {
    let (report, fem_note) =
        match dirichlet_eigenvalues_with(p, 2, tol, solver).and_then(|s| gap(p, &s)) {
            Ok(r) => (Some(r), String::new()),
            Err(e @ Error::ThinDomain { .. }) => (None, format!("fem skipped: {e}")),
            Err(e) => (None, format!("fem failed: {e}")),
        };
    let class = TriangleClass::from_polygon(p).ok();
    let mut lines = Vec::new();
    // Asymptotic lines get a status too, but only certified ones count as violations.
    let check = |value: f64, quantity: &'static str| -> CheckStatus {
        let Some(r) = &report else {
            return CheckStatus::Unchecked;
        };
        let (computed, err) = match quantity {
            "lambda1" => (r.lambda1, r.xi_error / (r.diameter * r.diameter)),
            _ => (r.xi, r.xi_error),
        };
        if value <= computed + err + 1e-9 * computed {
            CheckStatus::Respected
        } else {
            CheckStatus::Violated
        }
    };
    let pi2 = std::f64::consts::PI.powi(2);
    lines.push(CertificateLine {
        tag: crate::gap::TAG_UNIVERSAL.into(),
        quantity: "xi",
        value: Some(pi2),
        kind: BoundKind::Certified,
        status: check(pi2, "xi"),
        note: "convex domains".into(),
    });
    let height = p.height();
    let pb = crate::gap::poincare_lower_bound(height).expect("positive height");
    lines.push(CertificateLine {
        tag: "poincare".into(),
        quantity: "lambda1",
        value: Some(pb),
        kind: BoundKind::Certified,
        status: check(pb, "lambda1"),
        note: format!("width {height}"),
    });
    let skipped = |tag: &str, kind: BoundKind, why: String| CertificateLine {
        tag: tag.into(),
        quantity: "xi",
        value: None,
        kind,
        status: CheckStatus::Skipped,
        note: why,
    };
    match class {
        Some(tc) => {
            match sector_sandwich_gap_bound(tc) {
                Ok(b) => {
                    let status = check(b, "xi");
                    let note = if report.is_none() {
                        "fem skipped; the bound alone certifies xi >= value (growing like alpha^(-4/3) as alpha -> 0)"
                            .to_string()
                    } else {
                        format!("alpha = {}", tc.alpha())
                    };
                    lines.push(CertificateLine {
                        tag: TAG_SECTOR.into(),
                        quantity: "xi",
                        value: Some(b),
                        kind: BoundKind::Certified,
                        status,
                        note,
                    });
                }
                Err(e) => lines.push(skipped(TAG_SECTOR, BoundKind::Certified, e.to_string())),
            }
            match crate::gap::isosceles_sandwich_gap_bound(tc) {
                Ok(b) => lines.push(CertificateLine {
                    tag: crate::gap::TAG_ISOSCELES.into(),
                    quantity: "xi",
                    value: Some(b),
                    kind: BoundKind::Asymptotic,
                    status: check(b, "xi"),
                    note: "two-term expansions; remainder unquantified".into(),
                }),
                Err(e) => lines.push(skipped(
                    crate::gap::TAG_ISOSCELES,
                    BoundKind::Asymptotic,
                    e.to_string(),
                )),
            }
        }
        None => {
            let why = format!("needs a triangle, got {} vertices", p.len());
            lines.push(skipped(TAG_SECTOR, BoundKind::Certified, why.clone()));
            lines.push(skipped(
                crate::gap::TAG_ISOSCELES,
                BoundKind::Asymptotic,
                why,
            ));
        }
    }
    Certification {
        report,
        fem_note,
        lines,
    }
}
