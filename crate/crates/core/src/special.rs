//! Bessel functions of the first kind for real nonnegative order, their
//! positive zeros, and the Airy-zero constants that drive the thin-sector
//! asymptotics.
//!
//! `J_nu(x)` is evaluated by its power series when `x^2/4 <= nu + 1` (no
//! cancellation there), and otherwise by Steed's method: the continued
//! fraction for `J'_nu / J_nu`, downward recurrence to an order
//! `mu = nu - n` close to `x`, and the complex continued fraction for the
//! Hankel ratio at `mu`, normalised through the Wronskian.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Largest order accepted by [`bessel_j`].
pub const MAX_ORDER: f64 = 5_000.0;
/// Largest argument accepted by [`bessel_j`].
pub const MAX_ARGUMENT: f64 = 50_000.0;

const EPS: f64 = f64::EPSILON;
const TINY: f64 = f64::MIN_POSITIVE / f64::EPSILON;
const RESCALE: f64 = 1e250;

/// `2^{1/3}`.
pub const CBRT_2: f64 = 1.259_921_049_894_873_2;
/// `2^{2/3}`.
pub const CBRT_4: f64 = 1.587_401_051_968_199_5;

/// Airy zeros as printed in the literature this toolkit reproduces (6 digits).
pub const AIRY_A1_PRINTED: f64 = -2.33811;
pub const AIRY_A2_PRINTED: f64 = -4.08795;
/// `c1' = -a1' 2^{2/3}` as printed; `a1'` itself is back-solved from it.
pub const C1_PRIME_PRINTED: f64 = 1.617_228_32;

/// First two zeros of `Ai` and the first zero of `Ai'`, from the series
/// root-finder in this module (see the `airy_zeros_from_series` test).
pub const AIRY_A1: f64 = -2.338_107_410_459_767;
pub const AIRY_A2: f64 = -4.087_949_444_130_970;
pub const AIRY_A1_PRIME: f64 = -1.018_792_971_647_471;

/// Order of a Bessel function: finite, nonnegative, at most [`MAX_ORDER`].
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu < 0.0 {
            return Err(Error::Domain(format!(
                "Bessel order must be finite and >= 0, got {nu}"
            )));
        }
        if nu > MAX_ORDER {
            return Err(Error::OutOfRange(format!(
                "Bessel order {nu} exceeds {MAX_ORDER}"
            )));
        }
        Ok(BesselOrder(nu))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Airy zeros and the derived constants `c_i = -a_i 2^{2/3}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticConstants {
    pub a1: f64,
    pub a2: f64,
    pub a1_prime: f64,
    pub c1: f64,
    pub c2: f64,
    pub c1_prime: f64,
}

impl AsymptoticConstants {
    /// Constants built from the six-digit Airy zeros; these reproduce the
    /// eight-digit values 3.71151827, 6.48921613 and 1.61722832.
    pub fn printed() -> Self {
        Self::from_zeros(AIRY_A1_PRINTED, AIRY_A2_PRINTED, -C1_PRIME_PRINTED / CBRT_4)
    }

    /// Constants built from the full-precision Airy zeros.
    pub fn precise() -> Self {
        Self::from_zeros(AIRY_A1, AIRY_A2, AIRY_A1_PRIME)
    }

    pub fn from_zeros(a1: f64, a2: f64, a1_prime: f64) -> Self {
        AsymptoticConstants {
            a1,
            a2,
            a1_prime,
            c1: -a1 * CBRT_4,
            c2: -a2 * CBRT_4,
            c1_prime: -a1_prime * CBRT_4,
        }
    }

    /// Lower limit `(c1'/c1)^{1/2}` on `alpha/beta` for the almost-isosceles
    /// sandwich to give a positive gap bound.
    pub fn isosceles_ratio_threshold(&self) -> f64 {
        (self.c1_prime / self.c1).sqrt()
    }

    /// `a_i` for `i` in {1, 2}.
    pub fn airy_zero(&self, i: usize) -> Result<f64> {
        match i {
            1 => Ok(self.a1),
            2 => Ok(self.a2),
            _ => Err(Error::Domain(format!(
                "only the first two Airy zeros are tabulated, got i = {i}"
            ))),
        }
    }

    /// `c_i` for `i` in {1, 2}.
    pub fn c(&self, i: usize) -> Result<f64> {
        match i {
            1 => Ok(self.c1),
            2 => Ok(self.c2),
            _ => Err(Error::Domain(format!(
                "c_i is defined for i in {{1, 2}}, got {i}"
            ))),
        }
    }
}

/// `J_nu(x)` for `nu >= 0`, `x >= 0`.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    let nu = order.value();
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!(
            "Bessel argument must be finite and >= 0, got {x}"
        )));
    }
    if x > MAX_ARGUMENT {
        return Err(Error::OutOfRange(format!(
            "Bessel argument {x} exceeds {MAX_ARGUMENT}"
        )));
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    if 0.25 * x * x <= nu + 1.0 {
        Ok(power_series(nu, x))
    } else {
        steed(nu, x)
    }
}

fn power_series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let log_lead = nu * half.ln() - ln_gamma(nu + 1.0);
    if log_lead < -745.0 {
        return 0.0;
    }
    let q = -half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..1000 {
        let k = k as f64;
        term *= q / (k * (nu + k));
        sum += term;
        if term.abs() <= EPS * sum.abs() {
            break;
        }
    }
    log_lead.exp() * sum
}

fn steed(nu: f64, x: f64) -> Result<f64> {
    let nl = (nu - x + 1.5).floor().max(0.0) as usize;
    let mu = nu - nl as f64;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1: J'_nu / J_nu by modified Lentz.
    let max_cf1 = 100_000 + 10 * x as usize;
    let mut isign = 1.0;
    let mut h = (nu * xi).max(TINY);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..max_cf1 {
        b += xi2;
        d = b - d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b - 1.0 / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() <= EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::OutOfRange(format!(
            "continued fraction for J'/J did not converge at nu = {nu}, x = {x}"
        )));
    }

    // Downward recurrence from nu to mu on unnormalised values.
    let mut jl = isign;
    let mut jpl = h * jl;
    let mut j_top = jl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let jtemp = fact * jl + jpl;
        fact -= xi;
        jpl = fact * jtemp - jl;
        jl = jtemp;
        if jl.abs() > RESCALE {
            jl /= RESCALE;
            jpl /= RESCALE;
            j_top /= RESCALE;
        }
    }
    if jl == 0.0 {
        jl = EPS;
    }
    let f = jpl / jl;

    // CF2: p + iq = (J' + iY')/(J + iY) at order mu.
    let mu2 = mu * mu;
    let mut a = 0.25 - mu2;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * x;
    let mut bi = 2.0;
    let mut fct = a * xi / (p * p + q * q);
    let mut cr = br + q * fct;
    let mut ci = bi + p * fct;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let mut temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    let max_cf2 = 100_000 + 10 * (mu as usize);
    let mut converged = false;
    for i in 1..max_cf2 {
        a += 2.0 * i as f64;
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < TINY {
            dr = TINY;
        }
        fct = a / (cr * cr + ci * ci);
        cr = br + cr * fct;
        ci = bi - ci * fct;
        if cr.abs() + ci.abs() < TINY {
            cr = TINY;
        }
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (dlr - 1.0).abs() + dli.abs() <= EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::OutOfRange(format!(
            "Hankel continued fraction did not converge at mu = {mu}, x = {x}"
        )));
    }
    let gam = (p - f) / q;
    let j_mu = (w / ((p - f) * gam + q)).sqrt().copysign(jl);
    Ok(j_top * (j_mu / jl))
}

/// Two-term uniform approximation `nu - (a_i / 2^{1/3}) nu^{1/3}` of the
/// `i`-th zero of `J_nu`, `i` in {1, 2}, with the printed Airy zeros.
pub fn bessel_zero_two_term(order: BesselOrder, i: usize) -> Result<f64> {
    bessel_zero_two_term_with(order, i, &AsymptoticConstants::printed())
}

pub fn bessel_zero_two_term_with(
    order: BesselOrder,
    i: usize,
    constants: &AsymptoticConstants,
) -> Result<f64> {
    let nu = order.value();
    if nu <= 0.0 {
        return Err(Error::Domain("two-term zero expansion needs nu > 0".into()));
    }
    let a = constants.airy_zero(i)?;
    Ok(nu - a / CBRT_2 * nu.cbrt())
}

/// `j_{nu,s}`, the `s`-th positive zero of `J_nu`.
pub fn bessel_zero(order: BesselOrder, s: usize) -> Result<f64> {
    let zeros = bessel_zeros(order, s)?;
    Ok(zeros[s - 1])
}

/// The first `count` positive zeros of `J_nu`, ascending.
///
/// The scan starts just below the two-term value of the first zero (which is
/// a lower bound for every `nu > 0`) and steps by half a unit; consecutive
/// zeros of `J_nu` are always more than three units apart, so every sign
/// change brackets exactly one zero. Each bracket is bisected and then
/// polished with Illinois regula falsi.
pub fn bessel_zeros(order: BesselOrder, count: usize) -> Result<Vec<f64>> {
    let nu = order.value();
    if count == 0 {
        return Err(Error::Domain("zero index s must be >= 1".into()));
    }
    let f = |t: f64| bessel_j(order, t);
    let mut a = if nu > 0.0 {
        (bessel_zero_two_term_with(order, 1, &AsymptoticConstants::precise())? - 1.0).max(nu)
    } else {
        0.0
    };
    let mut fa = f(a)?;
    let step = 0.5;
    let max_steps = 100 + (4.0 * (nu.cbrt() * 2.0 + count as f64 * PI) / step) as usize;
    let mut zeros = Vec::with_capacity(count);
    let mut steps = 0;
    while zeros.len() < count {
        if steps > max_steps {
            return Err(Error::ZeroNotFound {
                nu,
                s: zeros.len() + 1,
                reason: format!("no sign change found after {steps} scan steps"),
            });
        }
        steps += 1;
        let b = a + step;
        let fb = f(b)?;
        if fb == 0.0 {
            zeros.push(b);
            a = b + 1e-9 * b;
            fa = f(a)?;
            continue;
        }
        if fa.signum() != fb.signum() {
            let root = refine_root(&f, a, fa, b, fb).map_err(|e| match e {
                Error::ZeroNotFound { reason, .. } => Error::ZeroNotFound {
                    nu,
                    s: zeros.len() + 1,
                    reason,
                },
                other => other,
            })?;
            zeros.push(root);
        }
        a = b;
        fa = fb;
    }
    Ok(zeros)
}

/// Bracketed root polish: a few bisections, then Illinois regula falsi.
pub(crate) fn refine_root<F>(f: &F, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    for _ in 0..8 {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    let mut side = 0i8;
    for _ in 0..300 {
        if b - a <= 4.0 * EPS * b.abs().max(a.abs()) {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if fa.abs() < f64::MIN_POSITIVE || fb.abs() < f64::MIN_POSITIVE {
            break;
        }
    }
    if b - a <= 1e-12 * b.abs().max(1.0) {
        Ok(if fa.abs() < fb.abs() { a } else { b })
    } else {
        Err(Error::ZeroNotFound {
            nu: f64::NAN,
            s: 0,
            reason: format!("bracket [{a}, {b}] did not shrink"),
        })
    }
}

// Ai(0) and -Ai'(0).
const AIRY_C1: f64 = 0.355_028_053_887_817_24;
const AIRY_C2: f64 = 0.258_819_403_792_806_8;

/// `(Ai(x), Ai'(x))` from the Maclaurin series; accurate to about 1e-13 for
/// `|x| <= 6`.
pub fn airy_ai(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() || x.abs() > 8.0 {
        return Err(Error::OutOfRange(format!(
            "Airy series used outside |x| <= 8 (x = {x})"
        )));
    }
    let x3 = x * x * x;
    // Ai = c1 f - c2 g with f = sum C_k x^{3k}, g = sum D_k x^{3k+1}.
    // s_k = C_k x^{3k-1} and v_k = D_k x^{3k} carry the derivatives.
    let (mut t, mut u, mut s, mut v) = (1.0, x, 0.0, 1.0);
    let (mut f, mut g, mut fp, mut gp) = (1.0, x, 0.0, 1.0);
    for k in 1..200 {
        let k3 = 3.0 * k as f64;
        let ft = x3 / ((k3 - 1.0) * k3);
        let gt = x3 / (k3 * (k3 + 1.0));
        t *= ft;
        u *= gt;
        s = if k == 1 { x * x / 6.0 } else { s * ft };
        v *= gt;
        f += t;
        g += u;
        fp += k3 * s;
        gp += (k3 + 1.0) * v;
        let small = t.abs() + u.abs() + (k3 * s).abs() + ((k3 + 1.0) * v).abs();
        if small <= EPS * (f.abs() + g.abs() + fp.abs() + gp.abs()) {
            break;
        }
    }
    Ok((AIRY_C1 * f - AIRY_C2 * g, AIRY_C1 * fp - AIRY_C2 * gp))
}

/// Zero of `Ai` (or of `Ai'` when `derivative`) inside `[lo, hi]` by bisection.
pub fn airy_zero_in(lo: f64, hi: f64, derivative: bool) -> Result<f64> {
    let eval = |x: f64| -> Result<f64> {
        let (ai, aip) = airy_ai(x)?;
        Ok(if derivative { aip } else { ai })
    };
    let (mut a, mut b) = (lo, hi);
    let mut fa = eval(a)?;
    let fb = eval(b)?;
    if fa.signum() == fb.signum() {
        return Err(Error::Domain(format!(
            "no sign change of the Airy function on [{lo}, {hi}]"
        )));
    }
    while b - a > 4.0 * EPS * a.abs().max(b.abs()) {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = eval(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}
