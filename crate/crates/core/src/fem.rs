//! Dirichlet eigenvalues of convex polygons by conforming P1 finite
//! elements, plus the closed-form rectangle and equilateral spectra.
//!
//! The generalized problem `K u = lambda M u` (stiffness vs consistent mass,
//! interior nodes only) is solved by block subspace iteration on
//! `(K - sigma M)^{-1} M` with Rayleigh-Ritz projection. The shift `sigma`
//! sits just under `pi^2 / w^2`, `w` the width of the thinnest strip holding
//! the polygon: every discrete eigenvalue exceeds it, so `K - sigma M` stays
//! positive definite and its envelope (skyline) Cholesky factor exists.
//! For thin domains the shift lands close to `lambda_1`, which is what keeps
//! the clustered low spectrum cheap to resolve.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::Polygon;
use crate::mesh::{Mesh, MeshPlan};
use crate::spectrum::{snap_multiplicities, Spectrum, SpectrumMethod};

/// Height/diameter ratio below which [`dirichlet_eigenvalues`] refuses to mesh.
pub const THIN_REFUSAL_ASPECT: f64 = 0.02;
/// Smallest tolerance accepted by [`dirichlet_eigenvalues`].
pub const MIN_TOL: f64 = 1e-8;
/// Problems with at most this many unknowns are solved densely.
pub const DENSE_LIMIT: usize = 300;

/// Compressed sparse rows, full (both triangles) storage.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate `(row, col, value)` triplets.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("nonempty") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = s;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.values[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                d[(i, self.col_idx[k])] = self.values[k];
            }
        }
        d
    }
}

/// Stiffness and mass matrices on the interior nodes of `mesh`.
pub fn assemble(mesh: &Mesh) -> (CsrMatrix, CsrMatrix) {
    let mut dof = vec![usize::MAX; mesh.nodes.len()];
    let mut n = 0;
    for (i, b) in mesh.boundary.iter().enumerate() {
        if !b {
            dof[i] = n;
            n += 1;
        }
    }
    let mut kt = Vec::with_capacity(9 * mesh.triangles.len());
    let mut mt = Vec::with_capacity(9 * mesh.triangles.len());
    for t in &mesh.triangles {
        let p = [mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]];
        let b = [p[1].y - p[2].y, p[2].y - p[0].y, p[0].y - p[1].y];
        let c = [p[2].x - p[1].x, p[0].x - p[2].x, p[1].x - p[0].x];
        let area = 0.5 * (b[0] * c[1] - b[1] * c[0]).abs();
        for i in 0..3 {
            let gi = dof[t[i]];
            if gi == usize::MAX {
                continue;
            }
            for j in 0..3 {
                let gj = dof[t[j]];
                if gj == usize::MAX {
                    continue;
                }
                kt.push((gi, gj, (b[i] * b[j] + c[i] * c[j]) / (4.0 * area)));
                mt.push((gi, gj, area / 12.0 * if i == j { 2.0 } else { 1.0 }));
            }
        }
    }
    (
        CsrMatrix::from_triplets(n, kt),
        CsrMatrix::from_triplets(n, mt),
    )
}

/// Envelope Cholesky factor `A = L L^T` of a symmetric positive definite matrix.
#[derive(Clone, Debug)]
pub struct SkylineCholesky {
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    /// Factor `a - sigma * b` (both symmetric, same pattern or sub-pattern).
    pub fn factor_shifted(a: &CsrMatrix, b: &CsrMatrix, sigma: f64) -> Result<Self> {
        let n = a.n;
        let mut first = vec![0; n];
        for i in 0..n {
            let mut f = i;
            for m in [a, b] {
                for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                    f = f.min(m.col_idx[k]);
                }
            }
            first[i] = f;
        }
        let mut offset = vec![0; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; offset[n]];
        for (m, scale) in [(a, 1.0), (b, -sigma)] {
            for i in 0..n {
                for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                    let j = m.col_idx[k];
                    if j <= i {
                        data[offset[i] + j - first[i]] += scale * m.values[k];
                    }
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let (ri, rj) = (offset[i], offset[j]);
                let mut s = data[ri + j - fi];
                for k in k0..j {
                    s -= data[ri + k - fi] * data[rj + k - fj];
                }
                data[ri + j - fi] = s / data[rj + j - fj];
            }
            let ri = offset[i];
            let mut d = data[ri + i - fi];
            for k in fi..i {
                let l = data[ri + k - fi];
                d -= l * l;
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: i, value: d });
            }
            data[ri + i - fi] = d.sqrt();
        }
        Ok(SkylineCholesky {
            first,
            offset,
            data,
        })
    }

    /// Overwrites `x` with `A^{-1} x`.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.first.len();
        for i in 0..n {
            let (fi, ri) = (self.first[i], self.offset[i]);
            let mut s = x[i];
            for k in fi..i {
                s -= self.data[ri + k - fi] * x[k];
            }
            x[i] = s / self.data[ri + i - fi];
        }
        for i in (0..n).rev() {
            let (fi, ri) = (self.first[i], self.offset[i]);
            x[i] /= self.data[ri + i - fi];
            let xi = x[i];
            for k in fi..i {
                x[k] -= self.data[ri + k - fi] * xi;
            }
        }
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }
}

/// Eigen-solve controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenConfig {
    pub max_iterations: usize,
    /// Relative residual `|K x - theta M x| / |K x|` required for every wanted pair.
    pub residual_tol: f64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            max_iterations: 1000,
            residual_tol: 1e-10,
        }
    }
}

/// The `n` smallest eigenvalues of `K x = lambda M x`, ascending.
///
/// `shift` must lie strictly below the smallest eigenvalue; if the shifted
/// factorization fails anyway, the solve falls back to zero shift.
pub fn generalized_smallest(
    k: &CsrMatrix,
    m: &CsrMatrix,
    n: usize,
    shift: f64,
    cfg: &EigenConfig,
) -> Result<Vec<f64>> {
    let size = k.n;
    if n == 0 || n >= size {
        return Err(Error::Domain(format!(
            "need 1 <= n < {size} unknowns, got n = {n}"
        )));
    }
    if size <= DENSE_LIMIT {
        return dense_smallest(k, m, n);
    }
    let chol = match SkylineCholesky::factor_shifted(k, m, shift) {
        Ok(c) => (c, shift),
        Err(_) => (SkylineCholesky::factor_shifted(k, m, 0.0)?, 0.0),
    };
    subspace_iteration(k, m, &chol.0, n, cfg)
}

fn dense_smallest(k: &CsrMatrix, m: &CsrMatrix, n: usize) -> Result<Vec<f64>> {
    let kd = k.to_dense();
    let md = m.to_dense();
    let l = md
        .cholesky()
        .ok_or(Error::NotPositiveDefinite {
            pivot: 0,
            value: f64::NAN,
        })?
        .l();
    let li = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("singular mass matrix".into()))?;
    let c = &li * kd * li.transpose();
    let c = 0.5 * (&c + c.transpose());
    let mut w: Vec<f64> = c.symmetric_eigen().eigenvalues.iter().cloned().collect();
    w.sort_by(f64::total_cmp);
    w.truncate(n);
    Ok(w)
}

/// Deterministic, well-spread start block.
fn start_block(size: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(size, p, |i, j| {
        if j == 0 {
            1.0
        } else {
            let t = ((i + 1) as f64 * 12.9898 + (j + 1) as f64 * 78.233).sin() * 43758.5453;
            t - t.floor() - 0.5
        }
    })
}

fn apply_csr_block(a: &CsrMatrix, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut y = DMatrix::zeros(x.nrows(), x.ncols());
    for j in 0..x.ncols() {
        a.mul_vec(x.column(j).as_slice(), y.column_mut(j).as_mut_slice());
    }
    y
}

fn subspace_iteration(
    k: &CsrMatrix,
    m: &CsrMatrix,
    chol: &SkylineCholesky,
    n: usize,
    cfg: &EigenConfig,
) -> Result<Vec<f64>> {
    let size = k.n;
    let p = (2 * n).max(n + 8).min(size);
    let mut x = start_block(size, p);
    let mut last_residual = f64::INFINITY;
    for it in 1..=cfg.max_iterations {
        // Y = (K - sigma M)^{-1} M X, columns scaled to unit M-norm.
        let mut y = apply_csr_block(m, &x);
        for j in 0..p {
            chol.solve_in_place(y.column_mut(j).as_mut_slice());
        }
        let mut my = apply_csr_block(m, &y);
        for j in 0..p {
            let s = y.column(j).dot(&my.column(j)).sqrt();
            if s > 0.0 {
                y.column_mut(j).scale_mut(1.0 / s);
                my.column_mut(j).scale_mut(1.0 / s);
            }
        }
        let ky = apply_csr_block(k, &y);
        let kr = y.transpose() * &ky;
        let mr = y.transpose() * &my;
        let kr = 0.5 * (&kr + kr.transpose());
        let mr = 0.5 * (&mr + mr.transpose());
        let l = mr
            .cholesky()
            .ok_or_else(|| Error::EigenNonConvergence {
                iterations: it,
                residual: f64::NAN,
            })?
            .l();
        let li = l
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::EigenNonConvergence {
                iterations: it,
                residual: f64::NAN,
            })?;
        let c = &li * kr * li.transpose();
        let c = 0.5 * (&c + c.transpose());
        let eig = c.symmetric_eigen();
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let z = DMatrix::from_fn(p, p, |r, c| eig.eigenvectors[(r, order[c])]);
        let coeff = li.transpose() * z;
        x = &y * &coeff;
        let kx = &ky * &coeff;
        let mx = &my * &coeff;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let r: DVector<f64> = kx.column(i) - mx.column(i) * theta[i];
            worst = worst.max(r.norm() / kx.column(i).norm());
        }
        last_residual = worst;
        if worst <= cfg.residual_tol {
            return Ok(theta[..n].to_vec());
        }
    }
    Err(Error::EigenNonConvergence {
        iterations: cfg.max_iterations,
        residual: last_residual,
    })
}

/// Poincare strip bound `pi^2 / w^2` for a polygon in a strip of width `w`.
fn strip_shift(width: f64) -> f64 {
    0.99 * PI * PI / (width * width)
}

/// The `n` smallest discrete eigenvalues on one mesh (upper bounds for the
/// true ones). Error bars are zero: nothing is known about the
/// discretisation error from a single mesh.
pub fn fem_eigenvalues(mesh: &Mesh, n: usize) -> Result<Spectrum> {
    fem_eigenvalues_with(mesh, n, &EigenConfig::default())
}

pub fn fem_eigenvalues_with(mesh: &Mesh, n: usize, cfg: &EigenConfig) -> Result<Spectrum> {
    let interior = mesh.interior_count();
    if n == 0 || n >= interior {
        return Err(Error::Domain(format!(
            "need 1 <= n < {interior} interior nodes, got n = {n}"
        )));
    }
    let (k, m) = assemble(mesh);
    let values = generalized_smallest(&k, &m, n, strip_shift(mesh.strip_width), cfg)?;
    let bars = vec![0.0; values.len()];
    Spectrum::new(values, bars, SpectrumMethod::Fem)
}

/// Raw eigenvalues of every level of a nested ladder `h0, h0/2, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ladder {
    pub mesh_sizes: Vec<f64>,
    pub node_counts: Vec<usize>,
    pub values: Vec<Vec<f64>>,
}

impl Ladder {
    /// Richardson extrapolation from the two finest levels, assuming `O(h^2)`,
    /// with error bars `|extrapolated - finest|`.
    pub fn extrapolate(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let l = self.values.len();
        if l < 2 {
            return None;
        }
        let (c, f) = (&self.values[l - 2], &self.values[l - 1]);
        let r: Vec<f64> = c.iter().zip(f).map(|(c, f)| (4.0 * f - c) / 3.0).collect();
        let e = r.iter().zip(f).map(|(r, f)| (r - f).abs()).collect();
        Some((r, e))
    }
}

/// FEM on `levels` nested meshes with sizes `h0 / 2^l`.
pub fn fem_ladder(p: &Polygon, n: usize, h0: f64, levels: usize) -> Result<Ladder> {
    let plan = MeshPlan::new(p, h0)?;
    let mut ladder = Ladder {
        mesh_sizes: Vec::new(),
        node_counts: Vec::new(),
        values: Vec::new(),
    };
    for level in 0..levels as u32 {
        let mesh = plan.mesh(level)?;
        let s = fem_eigenvalues(&mesh, n)?;
        ladder.mesh_sizes.push(mesh.h_max);
        ladder.node_counts.push(mesh.nodes.len());
        ladder.values.push(s.values);
    }
    Ok(ladder)
}

/// `n` smallest values of `pi^2 (m^2/a^2 + k^2/b^2)`, `m, k >= 1`.
pub fn rectangle_spectrum(a: f64, b: f64, n: usize) -> Result<Spectrum> {
    if !(a.is_finite() && b.is_finite() && a >= b && b > 0.0) {
        return Err(Error::Domain(format!(
            "rectangle sides need a >= b > 0, got ({a}, {b})"
        )));
    }
    if n == 0 {
        return Err(Error::Domain(
            "requested spectrum length must be >= 1".into(),
        ));
    }
    let (a2, b2) = (a * a, b * b);
    let vals = lowest_lattice(n, |m, k| {
        PI * PI * ((m * m) as f64 / a2 + (k * k) as f64 / b2)
    });
    Ok(Spectrum::exact(
        vals,
        SpectrumMethod::ClosedFormRectangle,
        4.0 * f64::EPSILON,
    ))
}

/// `n` smallest values of `16 pi^2 / (9 s^2) (m^2 + m k + k^2)`, `m, k >= 1`.
pub fn equilateral_spectrum(side: f64, n: usize) -> Result<Spectrum> {
    if !(side.is_finite() && side > 0.0) {
        return Err(Error::Domain(format!("side must be positive, got {side}")));
    }
    if n == 0 {
        return Err(Error::Domain(
            "requested spectrum length must be >= 1".into(),
        ));
    }
    let c = 16.0 * PI * PI / (9.0 * side * side);
    let vals = lowest_lattice(n, |m, k| c * (m * m + m * k + k * k) as f64);
    Ok(Spectrum::exact(
        vals,
        SpectrumMethod::ClosedFormEquilateral,
        4.0 * f64::EPSILON,
    ))
}

/// `n` smallest values of `f(m, k)` over `m, k >= 1` for `f` increasing in both.
fn lowest_lattice(n: usize, f: impl Fn(u64, u64) -> f64) -> Vec<f64> {
    // Any (m, k) among the n smallest has m * k <= n, so m, k <= n suffice.
    let lim = n as u64;
    let mut all = Vec::new();
    for m in 1..=lim {
        for k in 1..=lim {
            if m * k <= lim {
                all.push(f(m, k));
            }
        }
    }
    all.sort_by(f64::total_cmp);
    all.truncate(n);
    snap_multiplicities(&mut all, 1e-14);
    all
}

/// Controls for [`dirichlet_eigenvalues_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Largest mesh (node count) the ladder may build.
    pub node_budget: usize,
    /// Coarsest mesh size as a fraction of the diameter.
    pub h0_fraction: f64,
    /// Minimum number of ladder levels before stopping on tolerance.
    pub min_levels: usize,
    /// Recognise rectangles and equilateral triangles and use closed forms.
    pub closed_forms: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            node_budget: 250_000,
            h0_fraction: 0.05,
            min_levels: 3,
            closed_forms: true,
        }
    }
}

/// The `n` smallest Dirichlet eigenvalues of `p` to relative tolerance `tol`.
pub fn dirichlet_eigenvalues(p: &Polygon, n: usize, tol: f64) -> Result<Spectrum> {
    dirichlet_eigenvalues_with(p, n, tol, &SolverConfig::default())
}

/// Closed forms when `p` is a rectangle or an equilateral triangle;
/// otherwise a nested FEM ladder from `h0 = h0_fraction * diameter`,
/// halved until the Richardson correction is below `tol` relative (after at
/// least `min_levels` levels) or the next mesh would exceed the node budget,
/// in which case the result is flagged `budget_exceeded`.
pub fn dirichlet_eigenvalues_with(
    p: &Polygon,
    n: usize,
    tol: f64,
    cfg: &SolverConfig,
) -> Result<Spectrum> {
    if !(tol >= MIN_TOL) {
        return Err(Error::Domain(format!(
            "tolerance must be >= {MIN_TOL}, got {tol}"
        )));
    }
    if n == 0 {
        return Err(Error::Domain(
            "requested spectrum length must be >= 1".into(),
        ));
    }
    if cfg.closed_forms {
        if let Some((a, b)) = p.as_rectangle(1e-10) {
            return rectangle_spectrum(a, b, n);
        }
        if let Some(side) = p.as_equilateral(1e-10) {
            return equilateral_spectrum(side, n);
        }
    }
    let d = p.diameter();
    let ratio = p.height() / d;
    if ratio < THIN_REFUSAL_ASPECT {
        return Err(Error::ThinDomain { ratio });
    }
    let plan = MeshPlan::new(p, cfg.h0_fraction * d)?;
    let mut ladder = Ladder {
        mesh_sizes: Vec::new(),
        node_counts: Vec::new(),
        values: Vec::new(),
    };
    let mut budget_exceeded = false;
    let mut level = 0u32;
    loop {
        if plan.node_count(level) > cfg.node_budget {
            budget_exceeded = true;
            break;
        }
        let mesh = plan.mesh(level)?;
        let s = fem_eigenvalues(&mesh, n)?;
        ladder.mesh_sizes.push(mesh.h_max);
        ladder.node_counts.push(mesh.nodes.len());
        ladder.values.push(s.values);
        level += 1;
        if ladder.values.len() >= cfg.min_levels.max(2) {
            let (r, e) = ladder.extrapolate().expect("two levels");
            if r.iter().zip(&e).all(|(r, e)| e / r <= tol) {
                break;
            }
        }
    }
    let (mut values, mut bars, method) = match ladder.extrapolate() {
        Some((r, e)) => (r, e, SpectrumMethod::FemExtrapolated),
        None => match ladder.values.first() {
            // One affordable level only: report it unextrapolated; the
            // distance to the Poincare floor is the only honest error scale.
            Some(v) => {
                let floor = strip_shift(p.height()) / 0.99;
                let bars = v.iter().map(|x| (x - floor).abs()).collect();
                (v.clone(), bars, SpectrumMethod::Fem)
            }
            None => {
                return Err(Error::Domain(format!(
                    "node budget {} is too small for even the coarsest mesh ({} nodes)",
                    cfg.node_budget,
                    plan.node_count(0)
                )))
            }
        },
    };
    // Extrapolation may swap near-degenerate pairs; keep the list ascending.
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    values = idx.iter().map(|&i| values[i]).collect();
    bars = idx.iter().map(|&i| bars[i]).collect();
    let mut s = Spectrum::new(values, bars, method)?;
    s.budget_exceeded = budget_exceeded;
    Ok(s)
}
