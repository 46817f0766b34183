//! Acceptance criteria 1-8. Runs without the libtest harness so that every
//! criterion prints its PASS/FAIL line; the process fails if any criterion
//! fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use fungap::experiments::RunOptions;
use fungap::fem::fem_ladder;
use fungap::{
    bessel_zero, bessel_zeros, dirichlet_eigenvalues_with, equilateral_spectrum,
    fit_collapse_exponent, gap, rectangle_gap, rectangle_spectrum, run_family, scan_minimum,
    scan_moduli, sector_eigenvalue_estimate, sector_sandwich_gap_bound, sector_spectrum,
    triangle_from_class, AsymptoticConstants, BesselOrder, FamilyDescriptor, FamilyKind, Point,
    Polygon, SectorSpec, SolverConfig, TriangleClass, Verdict,
};
use fungap_validation::{run_all, Checker, Criterion};

const PI2: f64 = PI * PI;
const EQUILATERAL_XI: f64 = 64.0 * PI2 / 9.0;

fn fem_only() -> SolverConfig {
    SolverConfig {
        closed_forms: false,
        ..SolverConfig::default()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Low-discrepancy points in the unit square (golden-ratio Weyl sequence).
fn weyl(k: usize) -> (f64, f64) {
    let g1 = 0.618_033_988_749_894_9_f64;
    let g2 = 0.754_877_666_246_692_7_f64;
    ((k as f64 * g1).fract(), (k as f64 * g2).fract())
}

fn xi_of(p: &Polygon, tol: f64, cfg: &SolverConfig) -> (f64, f64) {
    let s = dirichlet_eigenvalues_with(p, 2, tol, cfg).expect("solve");
    let r = gap(p, &s).expect("gap");
    (r.xi, r.xi_error)
}

fn closed_forms() -> (bool, String) {
    let start = Instant::now();
    let mut c = Checker::new();
    let mut worst: f64 = 0.0;
    for k in 1..=100 {
        let (u, v) = weyl(k);
        let a = 0.1 + 9.9 * u;
        let b = a * (0.001 + 0.999 * v);
        let formula = (a * a + b * b) * 3.0 * PI2 / (a * a);
        let from_spectrum = gap(
            &Polygon::rectangle(a, b).unwrap(),
            &rectangle_spectrum(a, b, 2).unwrap(),
        )
        .unwrap()
        .xi;
        let got = rectangle_gap(a, b).unwrap();
        worst = worst
            .max(rel(got, formula))
            .max(rel(from_spectrum, formula));
    }
    c.check(
        worst <= 1e-12,
        format!("100 rectangles: max rel err {worst:.1e} <= 1e-12"),
    );
    let sq = rectangle_gap(1.0, 1.0).unwrap();
    c.check(
        rel(sq, 6.0 * PI2) <= 1e-12,
        format!("xi(square) = {sq:.12} = 6 pi^2"),
    );
    let thin = rectangle_gap(1.0, 1e-3).unwrap();
    c.check(
        rel(thin, 3.0 * PI2) <= 1e-5,
        format!(
            "xi(1 x 1e-3) = {thin:.8}, rel to 3 pi^2 {:.1e} <= 1e-5",
            rel(thin, 3.0 * PI2)
        ),
    );
    c.within(start, Duration::from_secs(1));
    c.finish()
}

fn fem_accuracy() -> (bool, String) {
    let start = Instant::now();
    let mut c = Checker::new();
    let sq = Polygon::rectangle(1.0, 1.0).unwrap();
    let (vals, _) = fem_ladder(&sq, 2, 0.05, 3).unwrap().extrapolate().unwrap();
    let e = rel(vals[0], 2.0 * PI2);
    c.check(
        e <= 1e-3,
        format!("square lambda1 {:.6} rel err {e:.1e} <= 0.1%", vals[0]),
    );
    let tri = Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]).unwrap();
    let (vals, _) = fem_ladder(&tri, 2, 0.05, 3).unwrap().extrapolate().unwrap();
    let (e1, e2) = (rel(vals[0], 5.0 * PI2), rel(vals[1], 10.0 * PI2));
    c.check(
        e1 <= 2e-3,
        format!(
            "right isosceles lambda1 {:.6} rel err {e1:.1e} <= 0.2%",
            vals[0]
        ),
    );
    c.check(
        e2 <= 2e-3,
        format!("lambda2 {:.6} rel err {e2:.1e} <= 0.2%", vals[1]),
    );
    c.within(start, Duration::from_secs(60));
    c.finish()
}

fn equilateral_gap() -> (bool, String) {
    let mut c = Checker::new();
    let eq = Polygon::equilateral(1.0).unwrap();
    let (xi, err) = xi_of(&eq, 1e-3, &fem_only());
    let e = rel(xi, EQUILATERAL_XI);
    c.check(
        e <= 1e-2,
        format!("FEM xi {xi:.6} (+- {err:.1e}) rel err {e:.1e} <= 1%"),
    );
    let exact = gap(&eq, &equilateral_spectrum(1.0, 2).unwrap()).unwrap().xi;
    c.check(
        rel(exact, EQUILATERAL_XI) <= 1e-12,
        format!("closed form xi {exact:.12} = 64 pi^2/9"),
    );
    c.finish()
}

fn sector_asymptotics() -> (bool, String) {
    let start = Instant::now();
    let mut c = Checker::new();
    let alphas = [0.1, 0.05, 0.025];
    for i in 1..=2 {
        let errs: Vec<f64> = alphas
            .iter()
            .map(|&a| {
                let exact = sector_spectrum(SectorSpec::new(a, 1.0).unwrap(), 2)
                    .unwrap()
                    .values[i - 1];
                rel(sector_eigenvalue_estimate(a, i).unwrap(), exact)
            })
            .collect();
        for w in 0..2 {
            let ratio = errs[w] / errs[w + 1];
            c.check(
                (2.0..=3.2).contains(&ratio),
                format!(
                    "i={i} alpha {}->{}: err {:.2e}->{:.2e} ratio {ratio:.3} in [2.0, 3.2]",
                    alphas[w],
                    alphas[w + 1],
                    errs[w],
                    errs[w + 1]
                ),
            );
        }
    }
    c.within(start, Duration::from_secs(5));
    c.finish()
}

fn collapse_exponent() -> (bool, String) {
    let mut c = Checker::new();
    let bounds: Vec<(f64, f64)> = [0.05, 0.04, 0.03, 0.02, 0.01]
        .iter()
        .map(|&a| {
            (
                a,
                sector_sandwich_gap_bound(TriangleClass::new(a, 0.45).unwrap()).unwrap(),
            )
        })
        .collect();
    let (slope, r2) = fit_collapse_exponent(&bounds).unwrap();
    c.check(
        (slope + 4.0 / 3.0).abs() <= 0.05,
        format!("sector bound slope {slope:.4} (r^2 {r2:.4}) within -4/3 +- 0.05"),
    );
    let cfg = SolverConfig::default();
    let fem: Vec<(f64, f64)> = [0.15, 0.1, 0.07, 0.05]
        .iter()
        .map(|&a| {
            let p = triangle_from_class(TriangleClass::from_angles(a, 0.45).unwrap()).unwrap();
            (a, xi_of(&p, 1e-3, &cfg).0)
        })
        .collect();
    let (slope, r2) = fit_collapse_exponent(&fem).unwrap();
    let vals: Vec<String> = fem.iter().map(|(_, x)| format!("{x:.2}")).collect();
    c.check(
        (slope + 4.0 / 3.0).abs() <= 0.2,
        format!(
            "FEM xi [{}] slope {slope:.4} (r^2 {r2:.4}) within -4/3 +- 0.2",
            vals.join(", ")
        ),
    );
    c.finish()
}

fn dichotomy() -> (bool, String) {
    let start = Instant::now();
    let mut c = Checker::new();
    let schedule = [0.2, 0.1, 0.05, 0.025];
    let opts = RunOptions::default();
    let bounded = FamilyDescriptor::with_params(FamilyKind::QuadBounded, &[], &schedule).unwrap();
    let rows = run_family(&bounded, 1e-3, &opts).unwrap();
    let xi: Vec<f64> = rows
        .iter()
        .map(|r| r.xi().expect("bounded member solved"))
        .collect();
    let (lo, hi) = xi
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(l, h), &x| (l.min(x), h.max(x)));
    c.check(
        hi / lo <= 2.0,
        format!("bounded xi {xi:.3?} max/min {:.3} <= 2", hi / lo),
    );
    let last = xi[xi.len() - 1];
    c.check(
        rel(last, 3.0 * PI2) <= 0.25,
        format!("final {last:.3} within 25% of 3 pi^2"),
    );
    c.check(
        rows.iter().all(|r| r.verdict.verdict == Verdict::Bounded),
        "all 4 classified bounded",
    );
    let unbounded =
        FamilyDescriptor::with_params(FamilyKind::QuadUnbounded, &[("x", 1.5)], &schedule).unwrap();
    let rows = run_family(&unbounded, 1e-3, &opts).unwrap();
    let xi: Vec<f64> = rows
        .iter()
        .map(|r| r.xi().expect("unbounded member solved"))
        .collect();
    c.check(
        xi.windows(2).all(|w| w[1] > w[0]),
        format!("unbounded xi {xi:.3?} strictly increasing"),
    );
    c.check(
        xi[3] > 2.0 * xi[0],
        format!("xi(0.025)/xi(0.2) = {:.3} > 2", xi[3] / xi[0]),
    );
    c.check(
        rows.iter().all(|r| r.verdict.verdict == Verdict::Unbounded),
        "all 4 classified unbounded",
    );
    c.within(start, Duration::from_secs(600));
    c.finish()
}

/// Twenty (inner, outer) pairs with inner contained in outer.
fn nested_pairs() -> Vec<(Polygon, Polygon)> {
    let outers = vec![
        triangle_from_class(TriangleClass::new(0.2, 0.35).unwrap()).unwrap(),
        triangle_from_class(TriangleClass::new(0.1, 0.3).unwrap()).unwrap(),
        Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (0.8, 0.6), (0.1, 0.5)]).unwrap(),
        Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.1), (1.2, 0.6), (0.5, 0.9), (-0.1, 0.5)])
            .unwrap(),
        Polygon::from_coords(&[
            (0.0, 0.0),
            (0.6, -0.1),
            (1.0, 0.2),
            (1.0, 0.5),
            (0.5, 0.7),
            (0.0, 0.4),
        ])
        .unwrap(),
    ];
    let mut pairs = Vec::new();
    for p in outers {
        let (lo, hi) = p.bounding_box();
        for f in [0.2, 0.5] {
            let cut = p.clip_vertical(lo.x + f * (hi.x - lo.x), true).unwrap();
            pairs.push((cut, p.clone()));
        }
        let n = p.len();
        let mids: Vec<Point> = (0..n)
            .map(|i| p.vertices()[i].add(p.vertices()[(i + 1) % n]).scale(0.5))
            .collect();
        pairs.push((Polygon::new(mids).unwrap(), p.clone()));
        let c = p
            .vertices()
            .iter()
            .fold(Point::new(0.0, 0.0), |s, v| s.add(*v))
            .scale(1.0 / n as f64);
        let shrunk: Vec<Point> = p
            .vertices()
            .iter()
            .map(|v| c.add(v.sub(c).scale(0.8)))
            .collect();
        pairs.push((Polygon::new(shrunk).unwrap(), p.clone()));
    }
    pairs
}

fn properties() -> (bool, String) {
    let mut c = Checker::new();
    let cfg = SolverConfig::default();
    let tol = 1e-3;
    let mut floor_ok = 0usize;
    let mut floor_total = 0usize;
    let mut mono_ok = 0usize;
    let pairs = nested_pairs();
    for (inner, outer) in &pairs {
        let si = dirichlet_eigenvalues_with(inner, 2, tol, &cfg).unwrap();
        let so = dirichlet_eigenvalues_with(outer, 2, tol, &cfg).unwrap();
        let holds =
            (0..2).all(|k| si.values[k] + si.error_bars[k] + so.error_bars[k] >= so.values[k]);
        mono_ok += holds as usize;
        for (p, s) in [(inner, &si), (outer, &so)] {
            let r = gap(p, s).unwrap();
            floor_total += 1;
            floor_ok += (r.xi + r.xi_error >= PI2) as usize;
        }
    }
    c.check(
        mono_ok == pairs.len(),
        format!("domain monotonicity {mono_ok}/{} nested pairs", pairs.len()),
    );

    let mut worst: f64 = 0.0;
    let shapes = [
        triangle_from_class(TriangleClass::new(0.15, 0.4).unwrap()).unwrap(),
        Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.1), (1.2, 0.6), (0.5, 0.9), (-0.1, 0.5)])
            .unwrap(),
        Polygon::rectangle(2.0, 0.7).unwrap(),
    ];
    for p in &shapes {
        let (xi, _) = xi_of(p, tol, &cfg);
        for t in [0.37, 2.9] {
            let (xt, _) = xi_of(&p.scaled(t).unwrap(), tol, &cfg);
            worst = worst.max(rel(xt, xi));
        }
    }
    c.check(
        worst <= 1e-10,
        format!("scale invariance max rel diff {worst:.1e} <= 1e-10"),
    );

    let rows = scan_moduli(10, tol, &fem_only()).unwrap();
    for r in rows.iter().filter_map(|r| r.report.as_ref()) {
        floor_total += 1;
        floor_ok += (r.xi + r.xi_error >= PI2) as usize;
    }
    c.check(
        floor_ok == floor_total,
        format!("xi >= pi^2 on {floor_ok}/{floor_total} computed samples"),
    );
    let failed = rows.iter().filter(|r| r.report.is_none()).count();
    c.check(failed == 0, format!("{failed} scan classes failed"));
    match scan_minimum(&rows) {
        Some(m) => {
            let at_corner = (m.class.alpha() - 1.0 / 3.0).abs() < 1e-12
                && (m.class.beta() - 1.0 / 3.0).abs() < 1e-12;
            let xi = m.xi().unwrap();
            c.check(
                at_corner,
                format!("scan (resolution 10, FEM only) minimum at ({:.4}, {:.4}) is the equilateral corner", m.class.alpha(), m.class.beta()),
            );
            c.check(
                xi >= 0.99 * EQUILATERAL_XI,
                format!("observed minimum {xi:.4} >= 64 pi^2/9 - 1%"),
            );
        }
        None => c.check(false, "scan produced a minimum"),
    }
    c.finish()
}

fn special_functions() -> (bool, String) {
    let mut c = Checker::new();
    let z = bessel_zeros(BesselOrder::new(0.5).unwrap(), 10).unwrap();
    let worst = z
        .iter()
        .enumerate()
        .map(|(s, &j)| (j - (s + 1) as f64 * PI).abs())
        .fold(0.0, f64::max);
    c.check(
        worst <= 1e-10,
        format!("j(1/2, s) = s pi for s <= 10, max err {worst:.1e}"),
    );
    let mut violations = 0;
    let mut checked = 0;
    for step in 0..=200 {
        let nu = 0.5 * step as f64;
        let a = bessel_zeros(BesselOrder::new(nu).unwrap(), 6).unwrap();
        let b = bessel_zeros(BesselOrder::new(nu + 1.0).unwrap(), 5).unwrap();
        for s in 0..5 {
            checked += 1;
            if !(a[s] < b[s] && b[s] < a[s + 1]) {
                violations += 1;
            }
        }
    }
    c.check(
        violations == 0,
        format!(
            "interlacing j(nu,s) < j(nu+1,s) < j(nu,s+1): {violations} violations in {checked}"
        ),
    );
    let first = bessel_zero(BesselOrder::new(100.0).unwrap(), 1).unwrap();
    c.check(first > 100.0, format!("j(100, 1) = {first:.6} > 100"));
    let k = AsymptoticConstants::printed();
    let digits = [
        format!("{:.8}", k.c1),
        format!("{:.8}", k.c2),
        format!("{:.8}", k.c1_prime),
    ];
    c.check(
        digits == ["3.71151827", "6.48921613", "1.61722832"],
        format!(
            "constants c1, c2, c1' = {}, {}, {}",
            digits[0], digits[1], digits[2]
        ),
    );
    c.finish()
}

fn main() {
    let checks: [Criterion; 8] = [
        (1, "closed-form exactness", closed_forms),
        (2, "FEM accuracy", fem_accuracy),
        (3, "equilateral gap", equilateral_gap),
        (4, "sector asymptotics", sector_asymptotics),
        (5, "collapse exponent", collapse_exponent),
        (6, "bounded/unbounded dichotomy", dichotomy),
        (7, "property suites", properties),
        (8, "special functions", special_functions),
    ];
    let reports = run_all(&checks);
    let passed = reports.iter().filter(|r| r.pass).count();
    println!("acceptance: {passed} of {} criteria passed", reports.len());
    if passed != reports.len() {
        std::process::exit(1);
    }
}
