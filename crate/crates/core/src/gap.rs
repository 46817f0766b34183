//! The gap functional `xi = d^2 (lambda2 - lambda1)`, its closed forms,
//! comparison-domain lower bounds, and diagnostics for collapsing domains.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{isosceles_sandwich, sector_sandwich, Polygon, TriangleClass};
use crate::sector::sector_spectrum;
use crate::special::AsymptoticConstants;
use crate::spectrum::Spectrum;

/// Tag of the universal convex-domain floor `pi^2`.
pub const TAG_UNIVERSAL: &str = "universal_pi2";
pub const TAG_SECTOR: &str = "sector_sandwich";
pub const TAG_ISOSCELES: &str = "isosceles_sandwich";
pub const TAG_INTERVAL: &str = "interval_limit_3pi2";

/// How much a bound can be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    /// Rigorous (domain monotonicity with exact comparison spectra).
    Certified,
    /// Valid only up to an unquantified lower-order remainder.
    Asymptotic,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::Certified => "certified",
            BoundKind::Asymptotic => "asymptotic",
        })
    }
}

/// A bound on `xi` with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub tag: String,
    pub kind: BoundKind,
}

impl Bound {
    pub fn certified(value: f64, tag: &str) -> Self {
        Bound {
            value,
            tag: tag.to_string(),
            kind: BoundKind::Certified,
        }
    }

    pub fn asymptotic(value: f64, tag: &str) -> Self {
        Bound {
            value,
            tag: tag.to_string(),
            kind: BoundKind::Asymptotic,
        }
    }
}

/// Gap of one domain with its bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub diameter: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub xi: f64,
    /// `d^2 (e1 + e2)` from the eigenvalue error bars.
    pub xi_error: f64,
    /// Where the eigenvalues came from (`fem_extrapolated`, `sector_sandwich`, ...).
    pub method: String,
    pub lower_bounds: Vec<Bound>,
    pub upper_bounds: Vec<Bound>,
    pub flags: Vec<String>,
}

/// Shortest round-trip text for a CSV field; exponent form for very small
/// or very large magnitudes.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

/// CSV header matching [`GapReport::csv_row`].
pub const CSV_HEADER: &str =
    "alpha,beta,diameter,lambda1,lambda2,xi,lb_sector,lb_universal,method,flags";

impl GapReport {
    fn from_parts(
        diameter: f64,
        lambda1: f64,
        lambda2: f64,
        e1: f64,
        e2: f64,
        method: String,
    ) -> Result<Self> {
        if !(lambda1 > 0.0 && lambda2 > lambda1) {
            return Err(Error::Degenerate(format!(
                "need lambda2 > lambda1 > 0, got ({lambda1}, {lambda2})"
            )));
        }
        let d2 = diameter * diameter;
        let mut r = GapReport {
            diameter,
            lambda1,
            lambda2,
            xi: d2 * (lambda2 - lambda1),
            xi_error: d2 * (e1 + e2),
            method,
            lower_bounds: Vec::new(),
            upper_bounds: Vec::new(),
            flags: Vec::new(),
        };
        r.add_lower_bound(Bound::certified(PI * PI, TAG_UNIVERSAL));
        Ok(r)
    }

    /// Attach a lower bound; a certified bound above `xi` beyond its error
    /// is flagged (it means the eigenvalues, not the bound, are off).
    pub fn add_lower_bound(&mut self, b: Bound) {
        let slack = self.xi_error + 1e-9 * self.xi;
        if b.kind == BoundKind::Certified && b.value > self.xi + slack && !self.is_lower_estimate()
        {
            self.flags.push(format!("violates_{}", b.tag));
        }
        self.lower_bounds.push(b);
    }

    pub fn add_upper_bound(&mut self, b: Bound) {
        self.upper_bounds.push(b);
    }

    /// True when `xi` itself is a sandwich lower estimate, not a computed gap.
    pub fn is_lower_estimate(&self) -> bool {
        self.flags.iter().any(|f| f == FLAG_LOWER_ESTIMATE)
    }

    pub fn lower_bound(&self, tag: &str) -> Option<f64> {
        self.lower_bounds
            .iter()
            .find(|b| b.tag == tag)
            .map(|b| b.value)
    }

    /// One row of [`CSV_HEADER`]; inapplicable fields are empty.
    pub fn csv_row(&self, alpha: Option<f64>, beta: Option<f64>) -> String {
        let opt = |v: Option<f64>| v.map(format_number).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            opt(alpha),
            opt(beta),
            format_number(self.diameter),
            format_number(self.lambda1),
            format_number(self.lambda2),
            format_number(self.xi),
            opt(self.lower_bound(TAG_SECTOR)),
            opt(self.lower_bound(TAG_UNIVERSAL)),
            self.method,
            self.flags.join(";")
        )
    }
}

/// Flag marking a report whose eigenvalues are sandwich estimates.
pub const FLAG_LOWER_ESTIMATE: &str = "xi_is_lower_bound";

/// Gap report for `p` from a spectrum with at least two values. The
/// diameter is always recomputed from `p`.
pub fn gap(p: &Polygon, spectrum: &Spectrum) -> Result<GapReport> {
    if spectrum.len() < 2 {
        return Err(Error::SpectrumTooShort {
            needed: 2,
            have: spectrum.len(),
        });
    }
    let mut r = GapReport::from_parts(
        p.diameter(),
        spectrum.values[0],
        spectrum.values[1],
        spectrum.error_bars[0],
        spectrum.error_bars[1],
        spectrum.method.to_string(),
    )?;
    if spectrum.budget_exceeded {
        r.flags.push("budget_exceeded".into());
    }
    Ok(r)
}

/// `xi` of the `a x b` rectangle: `(a^2 + b^2) 3 pi^2 / a^2`.
pub fn rectangle_gap(a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && b > 0.0 && a >= b) {
        return Err(Error::Domain(format!(
            "rectangle sides need a >= b > 0, got ({a}, {b})"
        )));
    }
    Ok((a * a + b * b) * 3.0 * PI * PI / (a * a))
}

/// `lambda2(outer sector) - lambda1(inner sector)` for the diameter-one
/// triangle of class `tc`; a certified lower bound on `xi`.
pub fn sector_sandwich_gap_bound(tc: TriangleClass) -> Result<f64> {
    let (l1, l2) = sector_sandwich_eigenvalues(tc)?;
    Ok(l2 - l1)
}

/// `(lambda1(inner sector), lambda2(outer sector))`: an upper bound on the
/// triangle's `lambda1` and a lower bound on its `lambda2`.
pub fn sector_sandwich_eigenvalues(tc: TriangleClass) -> Result<(f64, f64)> {
    if tc.alpha() > 0.25 {
        return Err(Error::Regime(format!(
            "sector sandwich bound needs alpha <= 1/4, got {}",
            tc.alpha()
        )));
    }
    let s = sector_sandwich(tc)?;
    let inner = s.inner.as_sector().expect("sector sandwich").spec;
    let outer = s.outer.as_sector().expect("sector sandwich").spec;
    let l1 = sector_spectrum(inner, 1)?.values[0];
    let l2 = sector_spectrum(outer, 2)?.values[1];
    Ok((l1, l2))
}

/// Report for a triangle too thin to mesh: `lambda1`, `lambda2` are the
/// sandwich estimates, so `xi` is a lower bound on the true gap.
pub fn sector_sandwich_report(tc: TriangleClass) -> Result<GapReport> {
    let (l1, l2) = sector_sandwich_eigenvalues(tc)?;
    let mut r = GapReport::from_parts(1.0, l1, l2, 0.0, 0.0, TAG_SECTOR.to_string())?;
    r.flags.push(FLAG_LOWER_ESTIMATE.into());
    r.add_lower_bound(Bound::certified(l2 - l1, TAG_SECTOR));
    Ok(r)
}

/// Two-term isosceles expansions for the obtuse isosceles triangle of
/// diameter one with base angles `alpha pi`:
/// `(4/alpha^2 + 4 c1'/alpha^{4/3}, 4/alpha^2 + 4 c1/alpha^{4/3})`.
pub fn freitas_isosceles_eigenvalues(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha <= 0.125) {
        return Err(Error::Regime(format!(
            "isosceles expansion needs 0 < alpha <= 1/8, got {alpha}"
        )));
    }
    let c = AsymptoticConstants::printed();
    let (l1, l2) = isosceles_two_term(alpha, &c);
    Ok((4.0 * l1, 4.0 * l2))
}

// (1/a^2 + c1'/a^{4/3}, 1/a^2 + c1/a^{4/3}): the expansions for base half-length 1.
fn isosceles_two_term(alpha: f64, c: &AsymptoticConstants) -> (f64, f64) {
    let lead = 1.0 / (alpha * alpha);
    let t = alpha.powf(-4.0 / 3.0);
    (lead + c.c1_prime * t, lead + c.c1 * t)
}

/// `lambda2(outer isosceles) - lambda1(inner isosceles)` from the two-term
/// expansions with the exact side lengths; asymptotic only.
pub fn isosceles_sandwich_gap_bound(tc: TriangleClass) -> Result<f64> {
    isosceles_sandwich(tc)?;
    let c = AsymptoticConstants::printed();
    let (alpha, beta) = (tc.alpha(), tc.beta());
    let half_outer = tc.side_b() * (alpha * PI).cos();
    let half_inner = tc.side_a() * (beta * PI).cos();
    let l2_outer = isosceles_two_term(alpha, &c).1 / (half_outer * half_outer);
    let l1_inner = isosceles_two_term(beta, &c).0 / (half_inner * half_inner);
    Ok(l2_outer - l1_inner)
}

/// One-dimensional Poincare floor `pi^2 / h^2` for a domain of width `h`.
pub fn poincare_lower_bound(height: f64) -> Result<f64> {
    if !(height.is_finite() && height > 0.0) {
        return Err(Error::Domain(format!(
            "height must be positive, got {height}"
        )));
    }
    Ok(PI * PI / (height * height))
}

/// Mass-leakage estimate `ht(U)^{2/3} ht(V)^2 / (ht(U)^2 - ht(V)^2)`,
/// constant factors dropped; an order-of-magnitude diagnostic.
pub fn mass_leakage_bound(ht_u: f64, ht_v: f64) -> Result<f64> {
    if !(ht_u > 0.0 && ht_v >= 0.0) {
        return Err(Error::Domain(format!(
            "heights must satisfy ht_U > 0, ht_V >= 0, got ({ht_u}, {ht_v})"
        )));
    }
    if ht_v >= ht_u {
        return Err(Error::Regime(format!(
            "mass leakage needs ht_V < ht_U, got ({ht_u}, {ht_v})"
        )));
    }
    Ok(ht_u.powf(2.0 / 3.0) * ht_v * ht_v / (ht_u * ht_u - ht_v * ht_v))
}

/// Least-squares slope of `ln xi` against `ln parameter`, with `r^2`.
pub fn fit_collapse_exponent(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    if samples.len() < 3 {
        return Err(Error::Degenerate(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    if samples
        .iter()
        .any(|(p, x)| !(*p > 0.0 && *x > 0.0 && p.is_finite() && x.is_finite()))
    {
        return Err(Error::Degenerate(
            "samples must be positive and finite".into(),
        ));
    }
    let mut ps: Vec<f64> = samples.iter().map(|s| s.0).collect();
    ps.sort_by(f64::total_cmp);
    if ps.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Degenerate(
            "sample parameters must be distinct".into(),
        ));
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy <= 1e-30 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok((slope, r2))
}
