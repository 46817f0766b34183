//! Ordered Dirichlet eigenvalue lists with per-value error estimates.

use std::fmt;

use crate::error::{Error, Result};

/// How a [`Spectrum`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpectrumMethod {
    /// Richardson-extrapolated finite element ladder.
    FemExtrapolated,
    /// Single finite element solve on one mesh (no extrapolation).
    Fem,
    ClosedFormRectangle,
    ClosedFormEquilateral,
    SectorExact,
}

impl SpectrumMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectrumMethod::FemExtrapolated => "fem_extrapolated",
            SpectrumMethod::Fem => "fem",
            SpectrumMethod::ClosedFormRectangle => "closed_form_rectangle",
            SpectrumMethod::ClosedFormEquilateral => "closed_form_equilateral",
            SpectrumMethod::SectorExact => "sector_exact",
        }
    }
}

impl fmt::Display for SpectrumMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ascending, strictly positive eigenvalues with nonnegative error bars.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub error_bars: Vec<f64>,
    pub method: SpectrumMethod,
    /// Set when the refinement budget ran out before the tolerance was met.
    pub budget_exceeded: bool,
}

impl Spectrum {
    pub fn new(values: Vec<f64>, error_bars: Vec<f64>, method: SpectrumMethod) -> Result<Self> {
        if values.len() != error_bars.len() {
            return Err(Error::Degenerate(format!(
                "{} eigenvalues but {} error bars",
                values.len(),
                error_bars.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Degenerate(
                "eigenvalues must be finite and positive".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Degenerate("eigenvalues must be ascending".into()));
        }
        if error_bars.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::Degenerate(
                "error bars must be finite and nonnegative".into(),
            ));
        }
        Ok(Spectrum {
            values,
            error_bars,
            method,
            budget_exceeded: false,
        })
    }

    /// Exact values, error bars set to a few ulps of relative accuracy.
    pub(crate) fn exact(values: Vec<f64>, method: SpectrumMethod, rel: f64) -> Self {
        let error_bars = values.iter().map(|v| v * rel).collect();
        Spectrum {
            values,
            error_bars,
            method,
            budget_exceeded: false,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `lambda_k`, 1-based.
    pub fn lambda(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.values.len() {
            return Err(Error::SpectrumTooShort {
                needed: k.max(1),
                have: self.values.len(),
            });
        }
        Ok(self.values[k - 1])
    }
}

/// Snap values that agree to relative `rel` onto the first of the cluster, so
/// that near-degenerate pairs are reported as one multiple eigenvalue.
pub(crate) fn snap_multiplicities(values: &mut [f64], rel: f64) {
    for i in 1..values.len() {
        if (values[i] - values[i - 1]).abs() <= rel * values[i].abs() {
            values[i] = values[i - 1];
        }
    }
}
