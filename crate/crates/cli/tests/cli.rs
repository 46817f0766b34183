//! End-to-end runs of the `fungap` binary.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const PI2: f64 = PI * PI;

fn fungap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fungap"))
        .args(args)
        .env_remove("FUNGAP_THREADS")
        .output()
        .expect("spawn fungap")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// `xi` from the report row that follows the report header.
fn report_xi(text: &str) -> f64 {
    let mut lines = text
        .lines()
        .skip_while(|l| !l.starts_with("alpha,beta,diameter"));
    let header: Vec<&str> = lines.next().expect("report header").split(',').collect();
    let row: Vec<&str> = lines.next().expect("report row").split(',').collect();
    let i = header.iter().position(|h| *h == "xi").unwrap();
    row[i].parse().unwrap()
}

#[test]
fn eigs_on_unit_square() {
    let dir = TempDir::new().unwrap();
    let sq = write(&dir, "square.txt", "0 0\n1 0\n1 1\n0 1\n");
    let o = fungap(&["eigs", s(&sq)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("k,lambda,error_bar,method\n"));
    let xi = report_xi(&out);
    assert!((xi - 6.0 * PI2).abs() < 1e-9 * xi, "{xi}");
}

#[test]
fn eigs_on_equilateral_triangle() {
    let dir = TempDir::new().unwrap();
    let h = 3f64.sqrt() / 2.0;
    let tri = write(&dir, "eq.txt", &format!("0 0\n1 0\n0.5 {h:.17}\n"));
    let o = fungap(&["eigs", s(&tri)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let xi = report_xi(&stdout(&o));
    let want = 64.0 * PI2 / 9.0;
    assert!((xi - want).abs() < 1e-3 * want, "{xi}");
}

#[test]
fn malformed_polygon_reports_line() {
    let dir = TempDir::new().unwrap();
    let two = write(&dir, "two.txt", "0 0\n1 0\n");
    let o = fungap(&["eigs", s(&two)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error:"));
    let bad = write(&dir, "bad.txt", "0 0\n1 zero\n0 1\n");
    let o = fungap(&["eigs", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    let o = fungap(&["eigs", s(&dir.path().join("missing.txt"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sector_lists_estimates() {
    let o = fungap(&["sector", "--alpha", "0.05", "-n", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "k,lambda,error_bar,estimate");
    assert_eq!(lines.len(), 4);
    let est: f64 = lines[1].split(',').nth(3).unwrap().parse().unwrap();
    assert!((est - 601.49).abs() < 0.01, "{est}");
}

#[test]
fn scan_is_reproducible_and_finds_equilateral() {
    let dir = TempDir::new().unwrap();
    let svg = dir.path().join("scan.svg");
    let args = ["scan", "--grid", "2", "--tol", "1e-2", "--svg", s(&svg)];
    let a = fungap(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let out = stdout(&a);
    assert!(out.starts_with(
        "alpha,beta,diameter,lambda1,lambda2,xi,lb_sector,lb_universal,method,flags\n"
    ));
    assert!(
        out.lines()
            .any(|l| l.starts_with("0.3333333333333333,0.3333333333333333,")),
        "{out}"
    );
    let summary = out
        .lines()
        .find(|l| l.starts_with("# min xi"))
        .expect("summary line");
    assert!(summary.contains("alpha = 0.3333"), "{summary}");
    let svg_text = fs::read_to_string(&svg).unwrap();
    assert!(svg_text.starts_with("<svg") && svg_text.trim_end().ends_with("</svg>"));
    let b = fungap(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(svg_text, fs::read_to_string(&svg).unwrap());
}

#[test]
fn collapse_rectangle_family() {
    let dir = TempDir::new().unwrap();
    let d = write(
        &dir,
        "rect.txt",
        "kind=rectangle\nschedule=0.4,0.2,0.1,0.05\n",
    );
    let svg = dir.path().join("rect.svg");
    let o = fungap(&["collapse", s(&d), "--tol", "1e-3", "--svg", s(&svg)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let header = out.lines().next().unwrap();
    assert!(header.ends_with(",verdict,witness"), "{header}");
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 5);
    let slope_line = out
        .lines()
        .find(|l| l.starts_with("# xi slope"))
        .expect("slope line");
    let slope: f64 = slope_line
        .split_whitespace()
        .nth(4)
        .unwrap()
        .parse()
        .unwrap();
    assert!(slope.abs() < 0.3, "{slope_line}");
    assert!(fs::read_to_string(&svg).unwrap().contains("<polyline"));
}

#[test]
fn collapse_rejects_bad_descriptors() {
    let dir = TempDir::new().unwrap();
    for (name, text) in [
        ("kind.txt", "kind=circle\nschedule=0.1\n"),
        ("sched.txt", "kind=rectangle\nschedule=0.1,0.2\n"),
        ("x.txt", "kind=quad_unbounded\nschedule=0.1\nx=2\n"),
    ] {
        let d = write(&dir, name, text);
        let o = fungap(&["collapse", s(&d)]);
        assert_eq!(o.status.code(), Some(1), "{name}");
        assert!(stderr(&o).contains("error:"), "{name}");
    }
}

#[test]
fn certify_square_and_thin_triangle() {
    let dir = TempDir::new().unwrap();
    let sq = write(&dir, "square.txt", "0 0\n1 0\n1 1\n0 1\n");
    let o = fungap(&["certify", s(&sq)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out
        .lines()
        .any(|l| l == "bound,quantity,value,kind,status,note"));
    assert!(
        out.lines()
            .any(|l| l.starts_with("universal_pi2,") && l.contains("respected")),
        "{out}"
    );

    // Smallest angle 0.005 pi at the origin, second angle 0.3 pi.
    let (a, b) = (0.005 * PI, 0.3 * PI);
    let c = PI - a - b;
    let side = b.sin() / c.sin();
    let thin = write(
        &dir,
        "thin.txt",
        &format!("0 0\n1 0\n{:.17} {:.17}\n", side * a.cos(), side * a.sin()),
    );
    let o = fungap(&["certify", s(&thin)]);
    assert!(
        matches!(o.status.code(), Some(0) | Some(2)),
        "{}",
        stderr(&o)
    );
    let out = stdout(&o);
    assert!(
        out.lines().any(|l| l.starts_with("sector_sandwich,")),
        "{out}"
    );
}

#[test]
fn thread_count_is_honoured() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "rect.txt", "kind=rectangle\nschedule=0.4,0.2,0.1\n");
    let run = |threads: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_fungap"));
        c.args(["collapse", s(&d), "--tol", "1e-2"])
            .env_remove("FUNGAP_THREADS");
        if let Some(t) = threads {
            c.env("FUNGAP_THREADS", t);
        }
        c.output().unwrap()
    };
    let base = run(None);
    let one = run(Some("1"));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(base.stdout, one.stdout);
    let zero = run(Some("0"));
    assert_eq!(zero.status.code(), Some(1));
    assert!(stderr(&zero).contains("FUNGAP_THREADS"));
}
