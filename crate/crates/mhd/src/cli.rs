//! Command-line front end: generator and network export, candidate
//! validation, statistics profiles, Monte Carlo experiments, source
//! architecture tables, circuit decomposition, and the invariant self test.
//!
//! Mode indices in command-line flags are 1-based to match the usual optics
//! labelling; every file format emitted or read by the tool uses 0-based
//! indices. Exit codes: 0 success, 1 user error, 2 internal invariant
//! failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::decompose::{decompose, recompose, CircuitPlan};
use crate::error::{Error, Result};
use crate::generator::{build, validate_with_tol};
use crate::matrix::Mat;
use crate::network::{build_network, theta_dip, InputPair};
use crate::scattershot::{
    crossover_n, run_experiment_with_workers, success_d, success_l, success_l_prime,
    ExperimentRecord, SourceParams,
};
use crate::stats::{
    bunching_closed_form, bunching_probability, coincidence_closed_form,
    coincidence_probability, grouping, theta_to_phi, Group,
};
use crate::{selftest, TOL_ALGEBRAIC};

#[derive(Parser)]
#[command(
    name = "mhd",
    version,
    about = "Multimode Hong-Ou-Mandel device simulator",
    after_help = "Mode indices in flags are 1-based; file formats use 0-based indices."
)]
pub struct Cli {
    /// Output file; stdout when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// RNG seed for the experiment subcommand.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Validation tolerance override for the validate subcommand.
    #[arg(long, global = true, value_name = "TOL")]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the generator Y_m and write it as matrix JSON.
    Gen {
        /// Mode count, a power of two >= 2.
        #[arg(long)]
        m: usize,
    },
    /// Report the generator conditions for a matrix JSON file.
    Validate {
        /// Matrix JSON file to check.
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
    },
    /// Build the network matrix D_m(theta) and write it as matrix JSON.
    Net {
        #[arg(long)]
        m: usize,
        /// Transmission angle in radians, or "dip".
        #[arg(long)]
        theta: String,
    },
    /// Two-photon statistics profile over a theta grid (CSV).
    Stats {
        #[arg(long)]
        m: usize,
        /// Input pair as 1-based "i,j"; when omitted, every input pair is
        /// computed and cross-checked before one profile is emitted.
        #[arg(long)]
        input: Option<String>,
        /// Grid "start:end:count" with inclusive bounds; either bound may be
        /// "dip".
        #[arg(long = "theta-grid")]
        theta_grid: String,
    },
    /// Seeded scattershot Monte Carlo experiment (JSON record).
    Experiment {
        #[arg(long)]
        m: usize,
        /// Transmission angle in radians, or "dip".
        #[arg(long)]
        theta: String,
        /// Squeezing strength, 0 <= chi < 1.
        #[arg(long)]
        chi: f64,
        /// Pump pulses to simulate.
        #[arg(long)]
        trials: u64,
        /// Worker streams to partition the trials across.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Success-rate table for the competing source architectures (CSV).
    Resources {
        /// Crystal-count range "lo..hi", inclusive.
        #[arg(long)]
        n: String,
        /// Squeezing strength, 0 < chi < 1.
        #[arg(long)]
        chi: f64,
    },
    /// Decompose D_m(theta) into two-level beam splitters (JSON plan).
    Decompose {
        #[arg(long)]
        m: usize,
        /// Transmission angle in radians, or "dip".
        #[arg(long)]
        theta: String,
    },
    /// Run the full invariant suite; one line per check.
    Selftest,
}

pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.exit_code() == 0 { 0 } else { 1 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_internal() { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Gen { m } => {
            let g = build(m)?;
            write_output(out, &(serde_json::to_string_pretty(g.y())? + "\n"))
        }
        Command::Validate { input } => {
            let text = std::fs::read_to_string(&input)?;
            let mat: Mat = serde_json::from_str(&text)?;
            let report = validate_with_tol(&mat, cli.tol.unwrap_or(TOL_ALGEBRAIC));
            write_output(out, &(serde_json::to_string_pretty(&report)? + "\n"))
        }
        Command::Net { m, theta } => {
            let g = build(m)?;
            let theta = parse_theta(&theta, m)?;
            let net = build_network(&g, theta);
            write_output(out, &(serde_json::to_string_pretty(net.matrix())? + "\n"))
        }
        Command::Stats {
            m,
            input,
            theta_grid,
        } => {
            let input = input.map(|text| parse_input_pair(&text, m)).transpose()?;
            let grid = parse_theta_grid(&theta_grid, m)?;
            let rows = profile_rows(m, input, &grid)?;
            write_output(out, &render_profile_csv(&rows))
        }
        Command::Experiment {
            m,
            theta,
            chi,
            trials,
            workers,
        } => {
            let g = build(m)?;
            let theta = parse_theta(&theta, m)?;
            let params = SourceParams::new(m, chi)?;
            let record =
                run_experiment_with_workers(&g, theta, &params, trials, cli.seed, workers)?;
            let report = ExperimentReport {
                analytic: AnalyticReference {
                    herald_rate: success_d(&params)?,
                    p_ab: coincidence_closed_form(m, theta),
                    p_a2: bunching_closed_form(m, theta),
                },
                record,
            };
            write_output(out, &(serde_json::to_string_pretty(&report)? + "\n"))
        }
        Command::Resources { n, chi } => {
            let (lo, hi) = parse_n_range(&n)?;
            let rows = resource_rows(lo, hi, chi)?;
            write_output(out, &render_resources_csv(&rows, chi)?)
        }
        Command::Decompose { m, theta } => {
            let g = build(m)?;
            let theta = parse_theta(&theta, m)?;
            let net = build_network(&g, theta);
            let plan = decompose(&net)?;
            let recompose_error = recompose(&plan)?.max_abs_diff(net.matrix());
            let report = PlanReport {
                plan,
                recompose_error,
            };
            write_output(out, &(serde_json::to_string_pretty(&report)? + "\n"))
        }
        Command::Selftest => {
            let outcomes = selftest::run_all();
            let mut text = String::new();
            let mut failed = 0usize;
            for o in &outcomes {
                let status = if o.pass { "PASS" } else { "FAIL" };
                if !o.pass {
                    failed += 1;
                }
                text.push_str(&format!(
                    "{status} {module}/{id}: {observed}\n",
                    module = o.module,
                    id = o.id,
                    observed = o.observed
                ));
            }
            text.push_str(&format!("{} checks, {} failed\n", outcomes.len(), failed));
            write_output(out, &text)?;
            if failed > 0 {
                return Err(Error::Internal {
                    reason: format!("{failed} selftest checks failed"),
                });
            }
            Ok(())
        }
    }
}

/// Experiment record plus the analytic values it should converge to.
#[derive(Serialize)]
struct ExperimentReport {
    #[serde(flatten)]
    record: ExperimentRecord,
    analytic: AnalyticReference,
}

#[derive(Serialize)]
struct AnalyticReference {
    herald_rate: f64,
    p_ab: f64,
    p_a2: f64,
}

/// Circuit plan plus its measured recomposition error.
#[derive(Serialize)]
struct PlanReport {
    #[serde(flatten)]
    plan: CircuitPlan,
    recompose_error: f64,
}

fn write_output(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => std::io::stdout().write_all(content.as_bytes())?,
    }
    Ok(())
}

fn parse_theta(text: &str, m: usize) -> Result<f64> {
    let text = text.trim();
    if text == "dip" {
        return Ok(theta_dip(m));
    }
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::InvalidArgument(format!(
            "theta must be a finite number in radians or \"dip\", got {text:?}"
        ))),
    }
}

/// Parses a 1-based "i,j" flag into a 0-based pair.
fn parse_input_pair(text: &str, m: usize) -> Result<InputPair> {
    let parts: Vec<&str> = text.split(',').collect();
    let err = || {
        Error::InvalidArgument(format!(
            "input must be two 1-based mode indices \"i,j\" with 1 <= i != j <= {m}, got {text:?}"
        ))
    };
    if parts.len() != 2 {
        return Err(err());
    }
    let mut modes = [0usize; 2];
    for (slot, part) in modes.iter_mut().zip(&parts) {
        let value: usize = part.trim().parse().map_err(|_| err())?;
        if value < 1 || value > m {
            return Err(err());
        }
        *slot = value - 1;
    }
    InputPair::new(modes[0], modes[1])
}

/// Parses "start:end:count" into an inclusive linear grid inside the
/// statistics window `[0, theta_dip(m)]`.
fn parse_theta_grid(text: &str, m: usize) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "theta grid must be \"start:end:count\", got {text:?}"
        )));
    }
    let start = parse_theta(parts[0], m)?;
    let end = parse_theta(parts[1], m)?;
    let count: usize = parts[2].trim().parse().map_err(|_| {
        Error::InvalidArgument(format!("grid count must be an integer, got {:?}", parts[2]))
    })?;
    if count < 2 {
        return Err(Error::InvalidArgument("grid count must be >= 2".into()));
    }
    let dip = theta_dip(m);
    if !(0.0..=dip).contains(&start) || !(0.0..=dip).contains(&end) || start > end {
        return Err(Error::InvalidArgument(format!(
            "grid bounds must satisfy 0 <= start <= end <= theta_dip = {dip:.16}"
        )));
    }
    let mut grid = Vec::with_capacity(count);
    for k in 0..count {
        // Endpoints land exactly on the bounds so "dip" stays in-domain.
        let theta = if k == count - 1 {
            end
        } else {
            start + (end - start) * k as f64 / (count - 1) as f64
        };
        grid.push(theta);
    }
    Ok(grid)
}

fn parse_n_range(text: &str) -> Result<(usize, usize)> {
    let err = || {
        Error::InvalidArgument(format!(
            "crystal range must be \"lo..hi\" with 2 <= lo <= hi, got {text:?}"
        ))
    };
    let (lo, hi) = text.split_once("..").ok_or_else(err)?;
    let lo: usize = lo.trim().parse().map_err(|_| err())?;
    let hi: usize = hi.trim().parse().map_err(|_| err())?;
    if lo < 2 || lo > hi {
        return Err(err());
    }
    Ok((lo, hi))
}

/// One row of the statistics profile; the three probabilities sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub theta: f64,
    pub p_ab: f64,
    pub p_a2: f64,
    pub p_b2: f64,
    pub phi_equivalent: f64,
}

/// Computes profile rows by brute-force permanent sums. With no explicit
/// input the coincidence probability is verified to be identical across all
/// input pairs at every grid point; a spread above 1e-10 is an internal
/// error, not a user error.
pub fn profile_rows(m: usize, input: Option<InputPair>, grid: &[f64]) -> Result<Vec<ProfileRow>> {
    let g = build(m)?;
    let inputs = match input {
        Some(pair) => {
            pair.check_range(m)?;
            vec![pair]
        }
        None => InputPair::all(m),
    };
    let groupings = inputs
        .iter()
        .map(|&pair| grouping(&g, pair))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(grid.len());
    for &theta in grid {
        let net = build_network(&g, theta);
        let mut lead: Option<ProfileRow> = None;
        for (&pair, grp) in inputs.iter().zip(&groupings) {
            let p_ab = coincidence_probability(&net, pair, grp)?;
            match &lead {
                None => {
                    lead = Some(ProfileRow {
                        theta,
                        p_ab,
                        p_a2: bunching_probability(&net, pair, grp, Group::A)?,
                        p_b2: bunching_probability(&net, pair, grp, Group::B)?,
                        phi_equivalent: theta_to_phi(m, theta)?,
                    });
                }
                Some(first) => {
                    let spread = (p_ab - first.p_ab).abs();
                    if spread > 1e-10 {
                        return Err(Error::Internal {
                            reason: format!(
                                "input invariance violated at theta = {theta}: \
                                 input {pair} deviates by {spread:.3e}"
                            ),
                        });
                    }
                }
            }
        }
        rows.push(lead.expect("at least one input pair"));
    }
    Ok(rows)
}

/// 17 significant digits, enough for exact f64 round trips.
fn fmt_full(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn render_profile_csv(rows: &[ProfileRow]) -> String {
    let mut out = String::from("theta,p_AB,p_A2,p_B2,phi_equivalent\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_full(r.theta),
            fmt_full(r.p_ab),
            fmt_full(r.p_a2),
            fmt_full(r.p_b2),
            fmt_full(r.phi_equivalent)
        ));
    }
    out
}

pub fn parse_profile_csv(text: &str) -> Result<Vec<ProfileRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("theta,p_AB,p_A2,p_B2,phi_equivalent") => {}
        other => {
            return Err(Error::InvalidArgument(format!(
                "unexpected profile header: {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::InvalidArgument(format!(
                "profile row needs 5 fields: {line:?}"
            )));
        }
        let mut values = [0.0f64; 5];
        for (v, f) in values.iter_mut().zip(&fields) {
            *v = f
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad float {f:?} in profile row")))?;
        }
        rows.push(ProfileRow {
            theta: values[0],
            p_ab: values[1],
            p_a2: values[2],
            p_b2: values[3],
            phi_equivalent: values[4],
        });
    }
    Ok(rows)
}

/// Which source architecture wins a resource row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchitectureKind {
    /// The full network fed by n heralded crystals.
    D,
    /// A linear array of separate heralded beam splitters.
    L,
    /// Splitters fed directly by both crystal arms, unheralded.
    LPrime,
}

impl std::fmt::Display for ArchitectureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ArchitectureKind::D => write!(f, "D"),
            ArchitectureKind::L => write!(f, "L"),
            ArchitectureKind::LPrime => write!(f, "Lprime"),
        }
    }
}

impl std::str::FromStr for ArchitectureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D" => Ok(ArchitectureKind::D),
            "L" => Ok(ArchitectureKind::L),
            "Lprime" => Ok(ArchitectureKind::LPrime),
            other => Err(Error::InvalidArgument(format!(
                "unknown architecture {other:?}"
            ))),
        }
    }
}

/// One row of the architecture comparison; `p_l` is absent for odd crystal
/// counts, where the splitter array is not defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceRow {
    pub n: usize,
    pub chi: f64,
    pub p_d: f64,
    pub p_l: Option<f64>,
    pub p_lprime: f64,
    pub best: ArchitectureKind,
}

pub fn resource_rows(n_lo: usize, n_hi: usize, chi: f64) -> Result<Vec<ResourceRow>> {
    crossover_n(chi)?;
    let mut rows = Vec::with_capacity(n_hi - n_lo + 1);
    for n in n_lo..=n_hi {
        let params = SourceParams::new(n, chi)?;
        let p_d = success_d(&params)?;
        let p_l = if n % 2 == 0 {
            Some(success_l(&params)?)
        } else {
            None
        };
        let p_lprime = success_l_prime(&params);
        // Argmax with ties broken toward D, then L.
        let mut best = (p_d, ArchitectureKind::D);
        if let Some(l) = p_l {
            if l > best.0 {
                best = (l, ArchitectureKind::L);
            }
        }
        if p_lprime > best.0 {
            best = (p_lprime, ArchitectureKind::LPrime);
        }
        rows.push(ResourceRow {
            n,
            chi,
            p_d,
            p_l,
            p_lprime,
            best: best.1,
        });
    }
    Ok(rows)
}

pub fn render_resources_csv(rows: &[ResourceRow], chi: f64) -> Result<String> {
    let mut out = format!(
        "# crossover_n = {} (chi = {})\n",
        fmt_full(crossover_n(chi)?),
        fmt_full(chi)
    );
    out.push_str("n,chi,p_D,p_L,p_Lprime,best_architecture\n");
    for r in rows {
        let p_l = r.p_l.map(fmt_full).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n,
            fmt_full(r.chi),
            fmt_full(r.p_d),
            p_l,
            fmt_full(r.p_lprime),
            r.best
        ));
    }
    Ok(out)
}

pub fn parse_resources_csv(text: &str) -> Result<Vec<ResourceRow>> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for line in text.lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !saw_header {
            if line != "n,chi,p_D,p_L,p_Lprime,best_architecture" {
                return Err(Error::InvalidArgument(format!(
                    "unexpected resources header: {line:?}"
                )));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::InvalidArgument(format!(
                "resources row needs 6 fields: {line:?}"
            )));
        }
        let parse_f = |f: &str| {
            f.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad float {f:?} in resources row")))
        };
        rows.push(ResourceRow {
            n: fields[0].parse().map_err(|_| {
                Error::InvalidArgument(format!("bad count {:?} in resources row", fields[0]))
            })?,
            chi: parse_f(fields[1])?,
            p_d: parse_f(fields[2])?,
            p_l: if fields[3].is_empty() {
                None
            } else {
                Some(parse_f(fields[3])?)
            },
            p_lprime: parse_f(fields[4])?,
            best: fields[5].parse()?,
        });
    }
    if !saw_header {
        return Err(Error::InvalidArgument(
            "resources CSV missing header".into(),
        ));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_6, FRAC_PI_8};

    #[test]
    fn theta_parsing() {
        assert_eq!(parse_theta("dip", 4).unwrap(), theta_dip(4));
        assert_eq!(parse_theta("0.5", 4).unwrap(), 0.5);
        assert!(parse_theta("abc", 4).is_err());
        assert!(parse_theta("inf", 4).is_err());
    }

    #[test]
    fn input_pair_parsing_is_one_based() {
        let pair = parse_input_pair("2,3", 4).unwrap();
        assert_eq!((pair.i(), pair.j()), (1, 2));
        assert!(parse_input_pair("0,1", 4).is_err());
        assert!(parse_input_pair("1,5", 4).is_err());
        assert!(parse_input_pair("2,2", 4).is_err());
        assert!(parse_input_pair("2", 4).is_err());
    }

    #[test]
    fn grid_parsing() {
        let grid = parse_theta_grid("0:dip:3", 2).unwrap();
        assert_eq!(grid.len(), 3);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[2], theta_dip(2));
        assert!((grid[1] - theta_dip(2) / 2.0).abs() <= 1e-15);
        assert!(parse_theta_grid("0:dip:1", 2).is_err());
        assert!(parse_theta_grid("0:9:5", 2).is_err());
        assert!(parse_theta_grid("0:dip", 2).is_err());
    }

    #[test]
    fn n_range_parsing() {
        assert_eq!(parse_n_range("2..12").unwrap(), (2, 12));
        assert!(parse_n_range("1..4").is_err());
        assert!(parse_n_range("5..4").is_err());
        assert!(parse_n_range("4").is_err());
    }

    #[test]
    fn two_mode_profile_hits_the_known_column() {
        let grid = parse_theta_grid("0:dip:3", 2).unwrap();
        let rows = profile_rows(2, None, &grid).unwrap();
        let want = [1.0, 0.5, 0.0];
        for (row, want_ab) in rows.iter().zip(want) {
            assert!((row.p_ab - want_ab).abs() <= 1e-12);
            assert!((row.p_ab + row.p_a2 + row.p_b2 - 1.0).abs() <= 1e-12);
        }
        // For two modes the equivalent angle is theta itself.
        assert!((rows[1].phi_equivalent - FRAC_PI_8).abs() <= 1e-9);
    }

    #[test]
    fn four_mode_profile_endpoints_and_worked_row() {
        let grid = parse_theta_grid("0:dip:2", 4).unwrap();
        let rows = profile_rows(4, None, &grid).unwrap();
        assert!((rows[0].p_ab - 1.0).abs() <= 1e-12);
        assert!(rows[1].p_ab <= 1e-12);

        let rows = profile_rows(4, Some(InputPair::new(1, 2).unwrap()), &[FRAC_PI_6]).unwrap();
        let row = rows[0];
        assert!((row.p_ab - 0.5).abs() <= 1e-12);
        assert!((row.p_a2 - 0.25).abs() <= 1e-12);
        assert!((row.p_b2 - 0.25).abs() <= 1e-12);
        assert!((row.phi_equivalent - FRAC_PI_8).abs() <= 1e-9);
    }

    #[test]
    fn profile_csv_round_trips() {
        let grid = parse_theta_grid("0:dip:5", 4).unwrap();
        let rows = profile_rows(4, None, &grid).unwrap();
        let text = render_profile_csv(&rows);
        let back = parse_profile_csv(&text).unwrap();
        assert_eq!(rows, back);
    }

    #[test]
    fn resource_table_crossover_and_identities() {
        let rows = resource_rows(2, 12, 0.5).unwrap();
        assert_eq!(rows.len(), 11);
        for row in &rows {
            match row.n {
                n if n <= 8 => assert_eq!(row.best, ArchitectureKind::LPrime, "n = {n}"),
                // Boundary tie at n = 9 goes to D.
                _ => assert_eq!(row.best, ArchitectureKind::D, "n = {}", row.n),
            }
            if let Some(p_l) = row.p_l {
                assert_eq!(row.p_d, p_l * (row.n - 1) as f64);
            } else {
                assert_eq!(row.n % 2, 1);
            }
        }
        let boundary = &rows[7];
        assert_eq!(boundary.n, 9);
        assert!((boundary.p_d / boundary.p_lprime - 1.0).abs() <= 1e-15);
        // The strict sign change sits at the first integer above 2/chi^2 + 1.
        let first_strictly_better = rows
            .iter()
            .find(|r| r.p_d > r.p_lprime)
            .map(|r| r.n)
            .unwrap();
        assert_eq!(first_strictly_better, 10);
    }

    #[test]
    fn resources_csv_round_trips() {
        let rows = resource_rows(2, 7, 0.3).unwrap();
        let text = render_resources_csv(&rows, 0.3).unwrap();
        assert!(text.starts_with("# crossover_n"));
        let back = parse_resources_csv(&text).unwrap();
        assert_eq!(rows, back);
    }
}
