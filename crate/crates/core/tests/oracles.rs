//! Cross-checks against independently computed reference values: Bessel
//! zeros from the integral representation, lattice enumeration of the
//! equilateral spectrum, and finite-element runs with closed forms disabled.

use std::f64::consts::PI;

use fungap::{
    bessel_zero, dirichlet_eigenvalues_with, equilateral_spectrum, freitas_isosceles_eigenvalues,
    gap, mass_leakage_bound, sector_sandwich_gap_bound, BesselOrder, Polygon, SolverConfig,
    TriangleClass,
};

const PI2: f64 = PI * PI;

fn fem_only() -> SolverConfig {
    SolverConfig {
        closed_forms: false,
        ..SolverConfig::default()
    }
}

/// `J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt`, composite Simpson.
fn bessel_integral(n: u32, x: f64) -> f64 {
    let m = 4000;
    let h = PI / m as f64;
    let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let mut s = f(0.0) + f(PI);
    for k in 1..m {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    s * h / 3.0 / PI
}

/// The `s`-th positive zero of `J_n` by a fine scan and bisection.
fn zero_oracle(n: u32, s: usize) -> f64 {
    let mut count = 0;
    let (mut x, dx) = (n as f64 + 0.5, 0.05);
    let mut fx = bessel_integral(n, x);
    loop {
        let (y, fy) = (x + dx, bessel_integral(n, x + dx));
        if fx * fy < 0.0 {
            count += 1;
            if count == s {
                let (mut lo, mut hi, mut flo) = (x, y, fx);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let fm = bessel_integral(n, mid);
                    if fm * flo <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        x = y;
        fx = fy;
    }
}

#[test]
fn integer_order_zeros_match_integral_oracle() {
    for n in [0u32, 1, 2, 5, 10] {
        for s in 1..=3 {
            let got = bessel_zero(BesselOrder::new(n as f64).unwrap(), s).unwrap();
            let want = zero_oracle(n, s);
            assert!(
                (got - want).abs() < 1e-9 * want,
                "j({n},{s}) = {got} vs {want}"
            );
        }
    }
}

#[test]
fn sector_bound_matches_oracle_zeros() {
    // At (0.05, 0.45) the third angle is right, so the inner radius is
    // sin(0.45 pi) and both sectors have order 20.
    let tc = TriangleClass::new(0.05, 0.45).unwrap();
    let bound = sector_sandwich_gap_bound(tc).unwrap();
    let inner_radius = (0.45 * PI).sin() / (0.5 * PI).sin();
    let j1 = zero_oracle(20, 1);
    let j2 = zero_oracle(20, 2);
    let want = j2 * j2 - j1 * j1 / (inner_radius * inner_radius);
    assert!((bound - want).abs() < 1e-7 * want, "{bound} vs {want}");
}

#[test]
fn equilateral_spectrum_matches_lattice() {
    // Eigenvalues 16 pi^2/9 (m^2 + m n + n^2), m, n >= 1, side one.
    let mut want = Vec::new();
    for m in 1..30u32 {
        for n in 1..30u32 {
            want.push(16.0 * PI2 / 9.0 * (m * m + m * n + n * n) as f64);
        }
    }
    want.sort_by(f64::total_cmp);
    let got = equilateral_spectrum(1.0, 8).unwrap();
    for (g, w) in got.values.iter().zip(&want) {
        assert!((g - w).abs() < 1e-12 * w, "{g} vs {w}");
    }
}

#[test]
fn fem_matches_rectangle_values() {
    let p = Polygon::rectangle(2.0, 1.0).unwrap();
    let s = dirichlet_eigenvalues_with(&p, 3, 1e-4, &fem_only()).unwrap();
    let want = [PI2 * (0.25 + 1.0), PI2 * (1.0 + 1.0), PI2 * (2.25 + 1.0)];
    for k in 0..3 {
        let e = (s.values[k] - want[k]).abs() / want[k];
        assert!(
            e < 1e-4,
            "lambda{} = {} vs {} (rel {e:.1e})",
            k + 1,
            s.values[k],
            want[k]
        );
    }
    let xi = gap(&p, &s).unwrap().xi;
    let closed = 5.0 * 0.75 * PI2;
    assert!((xi - closed).abs() < 1e-3 * closed, "{xi} vs {closed}");
}

#[test]
fn fem_matches_right_isosceles_values() {
    let p = Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]).unwrap();
    let s = dirichlet_eigenvalues_with(&p, 2, 1e-4, &fem_only()).unwrap();
    for (k, want) in [5.0 * PI2, 10.0 * PI2].iter().enumerate() {
        let e = (s.values[k] - want).abs() / want;
        assert!(
            e < 1e-4,
            "lambda{} = {} vs {want} (rel {e:.1e})",
            k + 1,
            s.values[k]
        );
    }
}

#[test]
fn freitas_estimate_has_the_right_scale() {
    // Sign and scale only: the obtuse isosceles triangle with base angles
    // alpha pi and unit base, against its two-term expansion.
    let alpha = 0.1;
    let p =
        Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (0.5, 0.5 * (alpha * PI).tan())]).unwrap();
    let fem = dirichlet_eigenvalues_with(&p, 2, 1e-3, &SolverConfig::default()).unwrap();
    let (l1, l2) = freitas_isosceles_eigenvalues(alpha).unwrap();
    assert!(0.0 < l1 && l1 < l2);
    assert!(
        (l1 - fem.values[0]).abs() < 0.15 * fem.values[0],
        "two-term {l1} vs FEM {}",
        fem.values[0]
    );
    assert!(
        (l2 - fem.values[1]).abs() < 0.15 * fem.values[1],
        "two-term {l2} vs FEM {}",
        fem.values[1]
    );
}

#[test]
fn leakage_hand_value() {
    // 0.1^(2/3) * 0.05^2 / (0.1^2 - 0.05^2) = 0.215443... / 3
    let want = 0.215_443_469_003_188_4 / 3.0;
    let got = mass_leakage_bound(0.1, 0.05).unwrap();
    assert!((got - want).abs() < 1e-14, "{got} vs {want}");
}
