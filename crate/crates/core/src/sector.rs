//! Exact Dirichlet spectra of circular sectors, `lambda = (j_{k/alpha, s} / r)^2`,
//! and the two-term estimates for thin sectors.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::special::{bessel_zeros, AsymptoticConstants, BesselOrder};
use crate::spectrum::{snap_multiplicities, Spectrum, SpectrumMethod};

/// Values closer than this (relatively) are reported as one multiple eigenvalue.
pub const MULTIPLICITY_REL: f64 = 1e-12;
/// Upper end of the thin-sector regime for [`sector_eigenvalue_estimate`].
pub const ESTIMATE_MAX_ALPHA: f64 = 0.25;

/// Circular sector of opening angle `alpha * pi` and radius `radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorSpec {
    alpha: f64,
    radius: f64,
}

impl SectorSpec {
    pub fn new(alpha: f64, radius: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::Domain(format!(
                "sector angle fraction must lie in (0, 2], got {alpha}"
            )));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Domain(format!(
                "sector radius must be positive, got {radius}"
            )));
        }
        Ok(SectorSpec { alpha, radius })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Order of the Bessel functions in angular mode `k`.
    pub fn order(&self, k: usize) -> Result<BesselOrder> {
        BesselOrder::new(k as f64 / self.alpha)
    }
}

/// `(j_{k/alpha, s})^2 / r^2`.
pub fn sector_mode_eigenvalue(spec: SectorSpec, k: usize, s: usize) -> Result<f64> {
    if k == 0 || s == 0 {
        return Err(Error::Domain(format!(
            "mode indices must be >= 1, got (k, s) = ({k}, {s})"
        )));
    }
    let zeros = bessel_zeros(spec.order(k)?, s)?;
    let j = zeros[s - 1] / spec.radius;
    Ok(j * j)
}

#[derive(PartialEq)]
struct Candidate {
    value: f64,
    k: usize,
    s: usize,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Reversed: BinaryHeap is a max-heap and we want the smallest value first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .total_cmp(&self.value)
            .then_with(|| other.k.cmp(&self.k))
            .then_with(|| other.s.cmp(&self.s))
    }
}

/// The `n` smallest sector eigenvalues with multiplicity.
///
/// `(j_{k/alpha, s})^2` increases strictly in both `k` and `s`, so the
/// candidates form a Young-tableau frontier: the next eigenvalue is always
/// the smallest of the frontier cells, and a cell `(k, s)` only becomes a
/// candidate once `(k, s - 1)` (or, for `s = 1`, `(k - 1, 1)`) is taken.
pub fn sector_spectrum(spec: SectorSpec, n: usize) -> Result<Spectrum> {
    if n == 0 {
        return Err(Error::Domain(
            "requested spectrum length must be >= 1".into(),
        ));
    }
    let mut zeros: HashMap<usize, Vec<f64>> = HashMap::new();
    let mut value = |k: usize, s: usize| -> Result<f64> {
        let cached = zeros.entry(k).or_default();
        if cached.len() < s {
            *cached = bessel_zeros(spec.order(k)?, s.max(2 * cached.len()).max(4))?;
        }
        let j = cached[s - 1] / spec.radius;
        Ok(j * j)
    };
    let mut heap = BinaryHeap::new();
    heap.push(Candidate {
        value: value(1, 1)?,
        k: 1,
        s: 1,
    });
    let mut values = Vec::with_capacity(n);
    while values.len() < n {
        let Candidate { value: v, k, s } = heap.pop().expect("frontier is never empty");
        values.push(v);
        heap.push(Candidate {
            value: value(k, s + 1)?,
            k,
            s: s + 1,
        });
        if s == 1 {
            heap.push(Candidate {
                value: value(k + 1, 1)?,
                k: k + 1,
                s: 1,
            });
        }
    }
    snap_multiplicities(&mut values, MULTIPLICITY_REL);
    Ok(Spectrum::exact(values, SpectrumMethod::SectorExact, 1e-10))
}

/// Two-term thin-sector estimate `1/alpha^2 + c_i / alpha^{4/3}` of the
/// `i`-th eigenvalue of the unit-radius sector, `i` in {1, 2}.
pub fn sector_eigenvalue_estimate(alpha: f64, i: usize) -> Result<f64> {
    sector_eigenvalue_estimate_with(alpha, i, &AsymptoticConstants::printed())
}

pub fn sector_eigenvalue_estimate_with(
    alpha: f64,
    i: usize,
    constants: &AsymptoticConstants,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= ESTIMATE_MAX_ALPHA) {
        return Err(Error::Regime(format!(
            "thin-sector estimate needs 0 < alpha <= {ESTIMATE_MAX_ALPHA}, got {alpha}"
        )));
    }
    let c = constants.c(i)?;
    Ok(1.0 / (alpha * alpha) + c / alpha.powf(4.0 / 3.0))
}
