//! `fungap`: Dirichlet eigenvalues, gap reports, moduli scans, collapse runs
//! and bound certification from the command line.
//!
//! Exit status: 0 on success, 1 on errors (bad input, failed solves), 2 when
//! the numbers were produced but carry warning flags (node budget hit, a
//! certified bound contradicted, a scan entry failed).

mod svg;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use fungap::experiments::{family_csv_header, RunOptions};
use fungap::gap::{format_number, CSV_HEADER, TAG_SECTOR};
use fungap::{
    certify, dirichlet_eigenvalues_with, fit_collapse_exponent, gap, run_family, scan_minimum,
    scan_moduli, sector_eigenvalue_estimate, sector_sandwich_gap_bound, sector_spectrum,
    ClassifierConfig, FamilyDescriptor, Polygon, SectorSpec, SolverConfig, TriangleClass,
    CERTIFY_HEADER,
};

#[derive(Parser, Debug)]
#[command(
    name = "fungap",
    version,
    about = "Dirichlet eigenvalues and the fundamental gap of convex polygons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Relative tolerance for the finite element ladder (at least 1e-8)
    #[arg(long, global = true, default_value_t = 1e-4)]
    tol: f64,

    /// Moduli grid resolution N for `scan` (classes i/3N, j/3N)
    #[arg(long, global = true, default_value_t = 10)]
    grid: usize,

    /// Write the CSV here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also write an SVG figure (heat map for `scan`, log-log plot for `collapse`)
    #[arg(long, global = true)]
    svg: Option<PathBuf>,

    /// Classifier constant: bounded if the rectangle defect is <= K1 h^3
    #[arg(long, global = true, default_value_t = 2.0)]
    k1: f64,

    /// Classifier constant: the inscribed plateau U must have diameter <= K2 h^0.4
    #[arg(long, global = true, default_value_t = 1.0)]
    k2: f64,

    /// Largest mesh (in nodes) the eigenvalue ladder may build
    #[arg(long, global = true, default_value_t = 250_000)]
    budget_nodes: usize,

    /// Worker threads for scans and family runs (default: one per core)
    #[arg(long, global = true, env = "FUNGAP_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues and gap report of the polygon in FILE (one "x y" vertex per line)
    Eigs {
        polygon: PathBuf,
        /// Number of eigenvalues
        #[arg(short, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
    },
    /// Exact spectrum of the circular sector with opening alpha*pi
    Sector {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Number of eigenvalues
        #[arg(short, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
    },
    /// Gap over the moduli grid of triangles (see --grid)
    Scan,
    /// Run a degenerating family described in FILE and fit its collapse exponent
    Collapse { descriptor: PathBuf },
    /// List every applicable bound for the polygon in FILE and check it
    Certify { polygon: PathBuf },
}

/// Non-error outcome: clean or flagged.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Outcome {
    Clean,
    Flagged,
}

impl Outcome {
    fn from_flag(flagged: bool) -> Self {
        if flagged {
            Outcome::Flagged
        } else {
            Outcome::Clean
        }
    }
}

type CliResult = Result<Outcome, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: FUNGAP_THREADS / --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    let started = Instant::now();
    let result = run(&cli);
    eprintln!("elapsed {:.2?}", started.elapsed());
    match result {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Flagged) => ExitCode::from(2),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> CliResult {
    if !(cli.tol >= 1e-8) {
        return Err(format!("--tol must be >= 1e-8, got {}", cli.tol));
    }
    if !(cli.k1 > 0.0 && cli.k2 > 0.0) {
        return Err("--k1 and --k2 must be positive".into());
    }
    let solver = SolverConfig {
        node_budget: cli.budget_nodes,
        ..SolverConfig::default()
    };
    match &cli.command {
        Command::Eigs { polygon, n } => cmd_eigs(cli, &solver, polygon, *n as usize),
        Command::Sector { alpha, radius, n } => cmd_sector(cli, *alpha, *radius, *n as usize),
        Command::Scan => cmd_scan(cli, &solver),
        Command::Collapse { descriptor } => cmd_collapse(cli, &solver, descriptor),
        Command::Certify { polygon } => cmd_certify(cli, &solver, polygon),
    }
}

fn read_file(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_polygon(path: &Path) -> Result<Polygon, String> {
    Polygon::parse(&read_file(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

/// Write `text` to `--out` or standard output.
fn emit(cli: &Cli, text: &str) -> Result<(), String> {
    match &cli.out {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| e.to_string()),
    }
}

fn emit_svg(cli: &Cli, svg: impl FnOnce() -> String) -> Result<(), String> {
    match &cli.svg {
        Some(p) => fs::write(p, svg()).map_err(|e| format!("{}: {e}", p.display())),
        None => Ok(()),
    }
}

/// Flags that should turn the exit status into 2.
fn is_alarm(flag: &str) -> bool {
    flag == "budget_exceeded" || flag.starts_with("violates_") || flag.starts_with("error")
}

fn cmd_eigs(cli: &Cli, solver: &SolverConfig, path: &Path, n: usize) -> CliResult {
    let p = read_polygon(path)?;
    let spectrum = dirichlet_eigenvalues_with(&p, n, cli.tol, solver).map_err(|e| e.to_string())?;
    let mut report = gap(&p, &spectrum).map_err(|e| e.to_string())?;
    let class = TriangleClass::from_polygon(&p).ok();
    if let Some(tc) = class {
        if let Ok(b) = sector_sandwich_gap_bound(tc) {
            report.add_lower_bound(fungap::Bound::certified(b, TAG_SECTOR));
        }
    }
    let mut out = String::from("k,lambda,error_bar,method\n");
    for (k, (v, e)) in spectrum.values.iter().zip(&spectrum.error_bars).enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            k + 1,
            format_number(*v),
            format_number(*e),
            spectrum.method
        ));
    }
    out.push('\n');
    out.push_str(CSV_HEADER);
    out.push('\n');
    out.push_str(&report.csv_row(class.map(|c| c.alpha()), class.map(|c| c.beta())));
    out.push('\n');
    emit(cli, &out)?;
    Ok(Outcome::from_flag(report.flags.iter().any(|f| is_alarm(f))))
}

fn cmd_sector(cli: &Cli, alpha: f64, radius: f64, n: usize) -> CliResult {
    let spec = SectorSpec::new(alpha, radius).map_err(|e| e.to_string())?;
    let spectrum = sector_spectrum(spec, n).map_err(|e| e.to_string())?;
    let mut out = String::from("k,lambda,error_bar,estimate\n");
    for (k, (v, e)) in spectrum.values.iter().zip(&spectrum.error_bars).enumerate() {
        // The two-term estimate describes the lowest angular mode, which is
        // what the first two values are once alpha is small.
        let est = if k < 2 {
            sector_eigenvalue_estimate(alpha, k + 1)
                .map(|x| format_number(x / (radius * radius)))
                .unwrap_or_default()
        } else {
            String::new()
        };
        out.push_str(&format!(
            "{},{},{},{est}\n",
            k + 1,
            format_number(*v),
            format_number(*e)
        ));
    }
    emit(cli, &out)?;
    Ok(Outcome::Clean)
}

fn cmd_scan(cli: &Cli, solver: &SolverConfig) -> CliResult {
    if cli.grid < 2 {
        return Err(format!("--grid must be >= 2, got {}", cli.grid));
    }
    let rows = scan_moduli(cli.grid, cli.tol, solver).map_err(|e| e.to_string())?;
    let mut out = format!("{CSV_HEADER}\n");
    for r in &rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    emit(cli, &out)?;
    let summary = match scan_minimum(&rows) {
        Some(m) => format!(
            "# min xi = {} at alpha = {}, beta = {} ({} classes)\n",
            m.xi().expect("minimum has a report"),
            m.class.alpha(),
            m.class.beta(),
            rows.len()
        ),
        None => "# no class produced a gap\n".to_string(),
    };
    print!("{summary}");
    emit_svg(cli, || {
        let cells: Vec<(f64, f64, f64)> = rows
            .iter()
            .filter_map(|r| r.xi().map(|x| (r.class.alpha(), r.class.beta(), x)))
            .collect();
        svg::moduli_heat_map(
            &cells,
            1.0 / (3.0 * cli.grid as f64),
            "gap xi over the moduli space of triangles",
        )
    })?;
    let flagged = rows.iter().any(|r| {
        r.report.is_none()
            || r.report
                .as_ref()
                .is_some_and(|g| g.flags.iter().any(|f| is_alarm(f)))
    });
    Ok(Outcome::from_flag(flagged))
}

fn cmd_collapse(cli: &Cli, solver: &SolverConfig, path: &Path) -> CliResult {
    let desc = FamilyDescriptor::parse(&read_file(path)?)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let opts = RunOptions {
        solver: *solver,
        classifier: ClassifierConfig {
            k1: cli.k1,
            k2: cli.k2,
            ..ClassifierConfig::default()
        },
    };
    let rows = run_family(&desc, cli.tol, &opts).map_err(|e| e.to_string())?;
    let mut out = format!("{}\n", family_csv_header());
    for r in &rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    emit(cli, &out)?;
    let xi: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.xi().map(|x| (r.parameter, x)))
        .collect();
    let mut summary = match fit_collapse_exponent(&xi) {
        Ok((slope, r2)) => format!(
            "# xi slope = {slope} (r^2 = {r2}) over {} members\n",
            xi.len()
        ),
        Err(e) => format!("# xi slope unavailable: {e}\n"),
    };
    let lb: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| {
            r.report
                .as_ref()
                .and_then(|g| g.lower_bound(TAG_SECTOR))
                .map(|b| (r.parameter, b))
        })
        .collect();
    if !lb.is_empty() {
        match fit_collapse_exponent(&lb) {
            Ok((slope, r2)) => {
                summary.push_str(&format!("# sector bound slope = {slope} (r^2 = {r2})\n"))
            }
            Err(e) => summary.push_str(&format!("# sector bound slope unavailable: {e}\n")),
        }
    }
    print!("{summary}");
    let xlabel = if desc.kind() == fungap::FamilyKind::TriangleTrajectory {
        "alpha"
    } else {
        "h"
    };
    emit_svg(cli, || {
        svg::log_log_plot(&xi, xlabel, "xi", &format!("{} family", desc.kind()))
    })?;
    let flagged = rows.iter().any(|r| {
        r.report.is_none()
            || r.flags.iter().any(|f| is_alarm(f))
            || r.report
                .as_ref()
                .is_some_and(|g| g.flags.iter().any(|f| is_alarm(f)))
    });
    Ok(Outcome::from_flag(flagged))
}

fn cmd_certify(cli: &Cli, solver: &SolverConfig, path: &Path) -> CliResult {
    let p = read_polygon(path)?;
    let cert = certify(&p, cli.tol, solver);
    let mut out = String::new();
    match &cert.report {
        Some(r) => out.push_str(&format!(
            "# xi = {} +- {} (lambda1 = {}, lambda2 = {}, diameter = {}, {})\n",
            r.xi, r.xi_error, r.lambda1, r.lambda2, r.diameter, r.method
        )),
        None => out.push_str(&format!("# {}\n", cert.fem_note)),
    }
    out.push_str(CERTIFY_HEADER);
    out.push('\n');
    for row in cert.csv_rows() {
        out.push_str(&row);
        out.push('\n');
    }
    emit(cli, &out)?;
    let budget = cert
        .report
        .as_ref()
        .is_some_and(|r| r.flags.iter().any(|f| is_alarm(f)));
    Ok(Outcome::from_flag(cert.any_violation() || budget))
}
