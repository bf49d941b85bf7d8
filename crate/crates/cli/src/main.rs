//! `dickesep`: separability experiments on diagonal-symmetric qubit states.
//!
//! Exit codes: 0 on success (and every point certified / PPT / within
//! bounds), 1 when some point fails the check or an invariant breaks, 2 on
//! usage or input errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dickesep::io::{
    certificate_json, decomposition_header, decomposition_row, fmt_f64, parse_state, trajectory_csv,
};
use dickesep::ppt::PptEvaluator;
use dickesep::volume::{certified_volume_with, rational_to_f64};
use dickesep::{
    certify, check_population_bounds, gds_volume, is_ppt, population_bound, ppt_gds_volume, sds_volume_formula,
    sds_volume_mc, trajectory, Execution, GdsState, TauGrid, Trajectory, VolumeEstimate, DEFAULT_EPSILON,
    DEFAULT_PPT_TOL,
};
use serde_json::{json, Value};

const OUT_DIR_ENV: &str = "DICKESEP_OUT_DIR";
const NORMALIZATION_TOL: f64 = 1e-9;
const UNPROVEN_CAVEAT: &str =
    "note: for N >= 5 NotCertified means only that no certificate was found, not that the state is entangled";

#[derive(Parser, Debug)]
#[command(name = "dickesep", version, about = "Separability certificates for diagonal-symmetric qubit states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Superradiant populations along a time grid.
    Superrad {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        grid: GridArg,
        #[command(flatten)]
        output: OutputArgs,
        /// Allowed drift of each row sum from 1.
        #[arg(long, default_value_t = NORMALIZATION_TOL)]
        tol: f64,
    },
    /// Certify separability of one state or of a superradiant sweep.
    Certify {
        #[command(flatten)]
        source: StateSource,
        #[command(flatten)]
        grid: GridArg,
        #[command(flatten)]
        output: OutputArgs,
        /// Slack on the imaginary parts and on the [0, 1] box.
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        tol: f64,
    },
    /// Partial-transpose test of one state or of a superradiant sweep.
    Ppt {
        #[command(flatten)]
        source: StateSource,
        #[command(flatten)]
        grid: GridArg,
        #[command(flatten)]
        output: OutputArgs,
        /// Eigenvalues down to `-tol` count as nonnegative.
        #[arg(long, default_value_t = DEFAULT_PPT_TOL)]
        tol: f64,
    },
    /// State-space volume estimates.
    Volume {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        method: VolumeKind,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Required by the Monte-Carlo methods.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Separable maxima of each population, optionally checked against a state.
    Bound {
        #[arg(long)]
        n: Option<usize>,
        /// State file (JSON or CSV).
        #[arg(long, value_name = "PATH")]
        chi_file: Option<PathBuf>,
        /// Inline populations, comma separated, `n0` ascending.
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        chi: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct GridArg {
    /// Time grid `min:max:points:lin|geom`.
    #[arg(long, default_value = "1e-3:10:200:geom", value_parser = parse_grid)]
    tau: TauGrid,
}

#[derive(Args, Debug)]
struct StateSource {
    /// Qubit count; required with `--superrad`, checked otherwise.
    #[arg(long)]
    n: Option<usize>,
    /// State file (JSON or CSV).
    #[arg(long, value_name = "PATH", conflicts_with_all = ["chi", "superrad"])]
    chi_file: Option<PathBuf>,
    /// Inline populations, comma separated, `n0` ascending.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true, conflicts_with = "superrad")]
    chi: Option<String>,
    /// Sweep the superradiant trajectory over `--tau`.
    #[arg(long)]
    superrad: bool,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file; relative paths resolve against `$DICKESEP_OUT_DIR` when
    /// it is set. Defaults to stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum VolumeKind {
    /// Monte Carlo over PPT states.
    PptMc,
    /// Monte Carlo over the separable mixture family.
    SdsMc,
    /// Exact mixture-family volume.
    SdsFormula,
    /// Monte Carlo over certified states.
    CertifiedMc,
    /// Exact volume of all diagonal-symmetric states.
    Gds,
}

fn parse_grid(s: &str) -> std::result::Result<TauGrid, String> {
    s.parse().map_err(|e: dickesep::Error| e.to_string())
}

/// Failures that map to exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

impl OutputArgs {
    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn write(&self, text: &str) -> Result<()> {
        match &self.out {
            None => {
                print!("{text}");
                Ok(())
            }
            Some(path) => {
                let path = resolve_out(path);
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                }
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
            }
        }
    }
}

fn resolve_out(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

impl StateSource {
    fn single(&self) -> Result<Option<GdsState>> {
        let text = match (&self.chi_file, &self.chi) {
            (Some(path), _) => {
                fs::read_to_string(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))?
            }
            (None, Some(list)) => list.clone(),
            (None, None) => return Ok(None),
        };
        let state = parse_state(&text).map_err(|e| usage(format!("malformed state: {e}")))?;
        if let Some(n) = self.n.filter(|&n| n != state.n_qubits()) {
            return Err(usage(format!("--n {n} does not match a state of {} qubits", state.n_qubits())));
        }
        Ok(Some(state))
    }

    fn sweep(&self, grid: &TauGrid) -> Result<Trajectory> {
        let n = self.n.ok_or_else(|| usage("--superrad needs --n"))?;
        if n == 0 {
            return Err(usage("--n must be at least 1"));
        }
        Ok(trajectory(n, &grid.values())?)
    }

    fn require_some(&self) -> Result<()> {
        if self.chi_file.is_none() && self.chi.is_none() && !self.superrad {
            return Err(usage("give one of --chi-file, --chi or --superrad"));
        }
        Ok(())
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn cmd_superrad(n: usize, grid: &TauGrid, output: &OutputArgs, tol: f64) -> Result<bool> {
    if n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let traj = match trajectory(n, &grid.values()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("invariant breach: {e}");
            return Ok(false);
        }
    };
    let drift = traj
        .states
        .iter()
        .map(|s| (s.populations().iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let text = match output.format(Format::Csv) {
        Format::Csv => trajectory_csv(&traj),
        Format::Json => json_text(&json!({
            "n": n,
            "tau": traj.tau,
            "chi": traj.states.iter().map(|s| s.populations().iter().map(|v| v.clamp(0.0, 1.0)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })),
    };
    output.write(&text)?;
    if drift > tol {
        eprintln!("invariant breach: row sums drift from 1 by {drift:e}");
        return Ok(false);
    }
    Ok(true)
}

fn cmd_certify(source: &StateSource, grid: &TauGrid, output: &OutputArgs, tol: f64) -> Result<bool> {
    source.require_some()?;
    if let Some(state) = source.single()? {
        let result = certify(&state, tol);
        output.write(&json_text(&certificate_json(&result)))?;
        let verdict = if result.is_certified() { "CertifiedSeparable" } else { "NotCertified" };
        eprintln!("verdict: {verdict}");
        if !result.is_certified() && state.n_qubits() >= 5 {
            eprintln!("{UNPROVEN_CAVEAT}");
        }
        return Ok(result.is_certified());
    }
    let traj = source.sweep(grid)?;
    let j_max = dickesep::dicke::j_max(traj.n_qubits);
    let results: Vec<_> = traj.states.iter().map(|s| certify(s, tol)).collect();
    let text = match output.format(Format::Csv) {
        Format::Csv => {
            let mut out = decomposition_header(j_max);
            out.push('\n');
            for (tau, r) in traj.tau.iter().zip(&results) {
                out.push_str(&decomposition_row(*tau, j_max, r));
                out.push('\n');
            }
            out
        }
        Format::Json => json_text(&Value::Array(
            traj.tau
                .iter()
                .zip(&results)
                .map(|(tau, r)| {
                    let mut v = certificate_json(r);
                    v["tau"] = json!(tau);
                    v
                })
                .collect(),
        )),
    };
    output.write(&text)?;
    let failed = results.iter().filter(|r| !r.is_certified()).count();
    eprintln!("certified {} of {} points", results.len() - failed, results.len());
    if failed > 0 && traj.n_qubits >= 5 {
        eprintln!("{UNPROVEN_CAVEAT}");
    }
    Ok(failed == 0)
}

fn cmd_ppt(source: &StateSource, grid: &TauGrid, output: &OutputArgs, tol: f64) -> Result<bool> {
    source.require_some()?;
    if let Some(state) = source.single()? {
        let report = is_ppt(&state, tol).map_err(|e| usage(e.to_string()))?;
        output.write(&json_text(&serde_json::to_value(&report)?))?;
        eprintln!("min eigenvalue {:e}: {}", report.min_eig(), if report.ppt { "PPT" } else { "NPT" });
        return Ok(report.ppt);
    }
    let traj = source.sweep(grid)?;
    let n = traj.n_qubits;
    let eval = PptEvaluator::new(n).map_err(|e| usage(e.to_string()))?;
    let reports: Vec<_> = traj.states.iter().map(|s| eval.report(s.populations(), tol)).collect();
    let text = match output.format(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("tau");
            for k in 1..=n / 2 {
                write!(out, ",min_eig_k{k}").unwrap();
            }
            out.push_str(",ppt\n");
            for (tau, r) in traj.tau.iter().zip(&reports) {
                out.push_str(&fmt_f64(*tau));
                for b in &r.bipartitions {
                    out.push(',');
                    out.push_str(&fmt_f64(b.min_eig));
                }
                out.push_str(if r.ppt { ",true\n" } else { ",false\n" });
            }
            out
        }
        Format::Json => json_text(&Value::Array(
            traj.tau
                .iter()
                .zip(&reports)
                .map(|(tau, r)| {
                    let mut v = serde_json::to_value(r).expect("reports serialize");
                    v["tau"] = json!(tau);
                    v
                })
                .collect(),
        )),
    };
    output.write(&text)?;
    let failed = reports.iter().filter(|r| !r.ppt).count();
    eprintln!("PPT at {} of {} points", reports.len() - failed, reports.len());
    Ok(failed == 0)
}

fn cmd_volume(n: usize, method: VolumeKind, samples: u64, seed: Option<u64>, output: &OutputArgs) -> Result<bool> {
    if n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let seed = || seed.ok_or_else(|| usage("Monte-Carlo volumes need --seed"));
    let (estimate, exact): (VolumeEstimate, Option<String>) = match method {
        VolumeKind::PptMc => (ppt_gds_volume(n, samples, seed()?).map_err(|e| usage(e.to_string()))?, None),
        VolumeKind::SdsMc => (sds_volume_mc(n, samples, seed()?), None),
        VolumeKind::CertifiedMc => (certified_volume_with(Execution::default(), n, samples, seed()?), None),
        VolumeKind::SdsFormula => {
            let r = sds_volume_formula(n);
            (VolumeEstimate::exact(rational_to_f64(&r)), Some(r.to_string()))
        }
        VolumeKind::Gds => {
            let r = gds_volume(n);
            (VolumeEstimate::exact(rational_to_f64(&r)), Some(r.to_string()))
        }
    };
    eprintln!("{:.6e} ± {:.1e}", estimate.mean, estimate.std_error);
    let mut v = serde_json::to_value(estimate)?;
    v["n"] = json!(n);
    if let Some(exact) = exact {
        v["exact"] = json!(exact);
    }
    let text = match output.format(Format::Json) {
        Format::Json => json_text(&v),
        Format::Csv => format!(
            "n,method,mean,std_error,n_samples,seed\n{n},{},{},{},{},{}\n",
            v["method"].as_str().unwrap_or_default(),
            fmt_f64(estimate.mean),
            fmt_f64(estimate.std_error),
            estimate.n_samples,
            estimate.seed.map_or(String::new(), |s| s.to_string()),
        ),
    };
    output.write(&text)?;
    Ok(true)
}

fn cmd_bound(n: Option<usize>, chi_file: Option<PathBuf>, chi: Option<String>, output: &OutputArgs) -> Result<bool> {
    let source = StateSource { n, chi_file, chi, superrad: false };
    let state = source.single()?;
    let n = match (&state, n) {
        (Some(s), _) => s.n_qubits(),
        (None, Some(n)) if n > 0 => n,
        _ => return Err(usage("give --n or a state")),
    };
    let violations = state.as_ref().map(check_population_bounds).unwrap_or_default();
    let rows: Vec<Value> = (0..=n)
        .map(|n0| {
            let mut row = json!({ "n0": n0, "bound": population_bound(n, n0) });
            if let Some(s) = &state {
                row["chi"] = json!(s.chi(n0));
                row["violated"] = json!(violations.iter().any(|v| v.n0 == n0));
            }
            row
        })
        .collect();
    let text = match output.format(Format::Csv) {
        Format::Csv => {
            let mut out = String::from(if state.is_some() { "n0,bound,chi,violated\n" } else { "n0,bound\n" });
            for (n0, row) in rows.iter().enumerate() {
                write!(out, "{n0},{}", fmt_f64(population_bound(n, n0))).unwrap();
                if let Some(s) = &state {
                    write!(out, ",{},{}", fmt_f64(s.chi(n0)), row["violated"]).unwrap();
                }
                out.push('\n');
            }
            out
        }
        Format::Json => json_text(&json!({ "n": n, "rows": rows })),
    };
    output.write(&text)?;
    if !violations.is_empty() {
        eprintln!("{} population(s) exceed the separable maximum: entangled", violations.len());
    }
    Ok(violations.is_empty())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Superrad { n, grid, output, tol } => cmd_superrad(n, &grid.tau, &output, tol),
        Command::Certify { source, grid, output, tol } => cmd_certify(&source, &grid.tau, &output, tol),
        Command::Ppt { source, grid, output, tol } => cmd_ppt(&source, &grid.tau, &output, tol),
        Command::Volume { n, method, samples, seed, output } => cmd_volume(n, method, samples, seed, &output),
        Command::Bound { n, chi_file, chi, output } => cmd_bound(n, chi_file, chi, &output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
