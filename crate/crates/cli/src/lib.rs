//! Argument parsing and command dispatch for the `kzsim` binary.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use kzsim::evolve::{
    dephase_propagate, initial_ground, propagate, Backend, DensityMatrix, SweepConfig,
    DEFAULT_B0, DEFAULT_BZ_END, DEFAULT_FIELD_STEP, DEFAULT_J_HZ,
};
use kzsim::format::sig12;
use kzsim::kzm::{
    log_spaced, lz_check, run_scaling_sweep, ScalingSweep, DF_SAMPLE_FIELD, EXPERIMENTAL_RATES, IDEAL_B0,
};
use kzsim::protocol::nmr_schedule;
use kzsim::{reproduce_figure, Figure};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    /// `--help` or `--version` output.
    #[error("{0}")]
    Info(String),
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Validation(#[from] kzsim::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Info(_) => EXIT_OK,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

/// Accepts plain decimals and fractions such as `1/4`.
fn parse_real(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|e| format!("{s}: {e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("{s}: {e}"))?;
            a / b
        }
        None => s.trim().parse().map_err(|e| format!("{s}: {e}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s}: not a finite number"))
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("{s}: expected two comma-separated values"))?;
    Ok((parse_real(a)?, parse_real(b)?))
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse().map_err(|e: kzsim::Error| e.to_string())
}

fn parse_figure(s: &str) -> Result<Figure, String> {
    s.parse().map_err(|e: kzsim::Error| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "kzsim", version, about = "Driven two-qubit Ising sweeps and freeze-out analysis")]
struct Cli {
    /// Print the normalized configuration instead of running it.
    #[arg(long, global = true)]
    dry_run: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 0.1, value_parser = parse_real)]
    pub bx: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_real)]
    pub k: f64,
    #[arg(long, default_value_t = DEFAULT_B0, value_parser = parse_real, allow_hyphen_values = true)]
    pub b0: f64,
    #[arg(long, default_value_t = DEFAULT_BZ_END, value_parser = parse_real, allow_hyphen_values = true)]
    pub bz_end: f64,
    /// Field change per segment.
    #[arg(long, default_value_t = DEFAULT_FIELD_STEP, value_parser = parse_real)]
    pub field_step: f64,
    #[arg(long, default_value_t = Backend::Reference, value_parser = parse_backend)]
    pub backend: Backend,
    /// Scalar coupling in Hz.
    #[arg(long = "coupling", default_value_t = DEFAULT_J_HZ, value_parser = parse_real)]
    pub j_hz: f64,
    /// Proton and carbon T2 in seconds, e.g. `2,0.2`.
    #[arg(long, value_parser = parse_pair)]
    pub t2: Option<(f64, f64)>,
    #[arg(long, default_value = "scan.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.1", value_parser = parse_real)]
    pub bx: Vec<f64>,
    /// Scan rates; defaults to 1, 1/2, 1/3, 1/4.
    #[arg(long, value_delimiter = ',', value_parser = parse_real)]
    pub k: Option<Vec<f64>>,
    /// Start field; -2 for the reference backend, -1.5 for trotter.
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    pub b0: Option<f64>,
    #[arg(long, default_value_t = Backend::Reference, value_parser = parse_backend)]
    pub backend: Backend,
    #[arg(long = "coupling", default_value_t = DEFAULT_J_HZ, value_parser = parse_real)]
    pub j_hz: f64,
    #[arg(long, value_parser = parse_pair)]
    pub t2: Option<(f64, f64)>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct FigureArgs {
    #[arg(value_parser = parse_figure)]
    pub id: Figure,
    /// Defaults to `<id>.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ScheduleArgs {
    #[arg(long, default_value_t = 0.1, value_parser = parse_real)]
    pub bx: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_real)]
    pub k: f64,
    #[arg(long, default_value_t = DEFAULT_B0, value_parser = parse_real, allow_hyphen_values = true)]
    pub b0: f64,
    #[arg(long, default_value_t = DEFAULT_FIELD_STEP, value_parser = parse_real)]
    pub field_step: f64,
    /// Number of scan segments; defaults to the scan ending at -0.2.
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long = "coupling", default_value_t = DEFAULT_J_HZ, value_parser = parse_real)]
    pub j_hz: f64,
    #[arg(long, default_value = "schedule.txt")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct LzArgs {
    #[arg(long, default_value_t = 0.1, value_parser = parse_real)]
    pub bx: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_real)]
    pub k: f64,
    #[arg(long, default_value = "lz.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// One scan; writes the per-segment trace as CSV.
    Scan(ScanArgs),
    /// Final defect densities over a (bx, k) grid as CSV.
    Sweep(SweepArgs),
    /// Fit of the freeze-out constant over a (bx, k) grid as JSON.
    Fit(SweepArgs),
    /// Dataset behind one figure.
    Figure(FigureArgs),
    /// Pulse and delay schedule of the NMR protocol.
    Schedule(ScheduleArgs),
    /// Two-level sweep against the Landau-Zener formula as JSON.
    LzCheck(LzArgs),
}

/// A parsed and validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub dry_run: bool,
}

impl ScanArgs {
    pub fn sweep_config(&self) -> kzsim::Result<SweepConfig> {
        let mut cfg = SweepConfig::new(self.bx, self.k, self.b0, self.bz_end, self.field_step, self.backend)?
            .with_j_hz(self.j_hz)?;
        if let Some((a, b)) = self.t2 {
            cfg = cfg.with_t2(a, b)?;
        }
        Ok(cfg)
    }
}

impl SweepArgs {
    pub fn scaling_sweep(&self) -> kzsim::Result<ScalingSweep> {
        let mut sweep = match self.backend {
            Backend::Reference => ScalingSweep::ideal(self.bx[0]),
            Backend::Trotter => ScalingSweep::experimental(),
        };
        sweep.bx_values = self.bx.clone();
        if let Some(k) = &self.k {
            sweep.rates = k.clone();
        } else if self.backend == Backend::Trotter {
            sweep.rates = EXPERIMENTAL_RATES.to_vec();
        } else {
            sweep.rates = log_spaced(0.25, 1.0, 12);
        }
        sweep.b0 = self.b0.unwrap_or(match self.backend {
            Backend::Reference => IDEAL_B0,
            Backend::Trotter => DEFAULT_B0,
        });
        sweep.j_hz = self.j_hz;
        sweep.t2 = self.t2;
        // every grid point must form a valid scan
        for &bx in &sweep.bx_values {
            for &k in &sweep.rates {
                let cfg = SweepConfig::new(bx, k, sweep.b0, DF_SAMPLE_FIELD, DEFAULT_FIELD_STEP, sweep.backend)?
                    .with_j_hz(sweep.j_hz)?;
                if let Some((a, b)) = sweep.t2 {
                    cfg.with_t2(a, b)?;
                }
            }
        }
        Ok(sweep)
    }
}

impl ScheduleArgs {
    pub fn sweep_config(&self) -> kzsim::Result<SweepConfig> {
        let bz_end = match self.j {
            Some(j) => self.b0 + j as f64 * self.field_step,
            None => DEFAULT_BZ_END,
        };
        SweepConfig::new(self.bx, self.k, self.b0, bz_end, self.field_step, Backend::Trotter)?
            .with_j_hz(self.j_hz)
    }
}

fn check(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Scan(a) => a.sweep_config().map(|_| ()),
        Command::Sweep(a) | Command::Fit(a) => a.scaling_sweep().map(|_| ()),
        Command::Figure(_) => Ok(()),
        Command::Schedule(a) => a.sweep_config().map(|_| ()),
        Command::LzCheck(a) => kzsim::kzm::quench_time(a.bx, a.k).map(|_| ()),
    }
    .map_err(CliError::from)
}

/// Parses `argv` (including the program name) into a validated configuration.
///
/// `--help` and `--version` surface as [`CliError::Info`].
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        let text = e.render().to_string();
        if e.use_stderr() {
            CliError::Usage(text)
        } else {
            CliError::Info(text)
        }
    })?;
    check(&cli.command)?;
    Ok(RunConfig { command: cli.command, dry_run: cli.dry_run })
}

fn num(x: f64) -> String {
    // shortest representation that parses back to the same value
    format!("{x}")
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",")
}

fn path(p: &Path) -> String {
    p.display().to_string()
}

impl RunConfig {
    /// Canonical command line with every option spelled out.
    pub fn normalized(&self) -> String {
        let mut s = String::new();
        match &self.command {
            Command::Scan(a) => {
                write!(
                    s,
                    "scan --bx {} --k {} --b0 {} --bz-end {} --field-step {} --backend {} --coupling {}",
                    num(a.bx), num(a.k), num(a.b0), num(a.bz_end), num(a.field_step), a.backend, num(a.j_hz)
                )
                .unwrap();
                if let Some((p, c)) = a.t2 {
                    write!(s, " --t2 {},{}", num(p), num(c)).unwrap();
                }
                write!(s, " --out {}", path(&a.out)).unwrap();
            }
            Command::Sweep(a) | Command::Fit(a) => {
                let name = if matches!(self.command, Command::Sweep(_)) { "sweep" } else { "fit" };
                let sweep = a.scaling_sweep().expect("validated");
                write!(
                    s,
                    "{name} --bx {} --k {} --b0 {} --backend {} --coupling {}",
                    list(&a.bx), list(&sweep.rates), num(sweep.b0), a.backend, num(a.j_hz)
                )
                .unwrap();
                if let Some((p, c)) = a.t2 {
                    write!(s, " --t2 {},{}", num(p), num(c)).unwrap();
                }
                write!(s, " --out {}", path(&output_path(&self.command))).unwrap();
            }
            Command::Figure(a) => {
                write!(s, "figure {} --out {}", a.id, path(&output_path(&self.command))).unwrap();
            }
            Command::Schedule(a) => {
                let steps = a.sweep_config().expect("validated").steps;
                write!(
                    s,
                    "schedule --bx {} --k {} --b0 {} --field-step {} --j {} --coupling {} --out {}",
                    num(a.bx), num(a.k), num(a.b0), num(a.field_step), steps, num(a.j_hz), path(&a.out)
                )
                .unwrap();
            }
            Command::LzCheck(a) => {
                write!(s, "lz-check --bx {} --k {} --out {}", num(a.bx), num(a.k), path(&a.out)).unwrap();
            }
        }
        if self.dry_run {
            s.push_str(" --dry-run");
        }
        s
    }
}

/// Where the command writes its artifact.
pub fn output_path(cmd: &Command) -> PathBuf {
    match cmd {
        Command::Scan(a) => a.out.clone(),
        Command::Sweep(a) => a.out.clone().unwrap_or_else(|| "sweep.csv".into()),
        Command::Fit(a) => a.out.clone().unwrap_or_else(|| "fit.json".into()),
        Command::Figure(a) => a.out.clone().unwrap_or_else(|| format!("{}.csv", a.id).into()),
        Command::Schedule(a) => a.out.clone(),
        Command::LzCheck(a) => a.out.clone(),
    }
}

/// Writes `contents` through a temporary file in the target directory and renames it into place.
pub fn write_atomic(target: &Path, contents: &str) -> Result<(), CliError> {
    let io_err = |source: io::Error| CliError::Io { path: target.to_path_buf(), source };
    let dir = match target.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(target).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Runs a validated configuration. Returns the summary line printed on stdout.
pub fn execute(cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.dry_run {
        return Ok(cfg.normalized());
    }
    let out = output_path(&cfg.command);
    let (contents, summary) = match &cfg.command {
        Command::Scan(a) => {
            let sc = a.sweep_config()?;
            let psi0 = initial_ground(&sc)?;
            let trace = match sc.t2 {
                Some(_) => dephase_propagate(&sc, &DensityMatrix::pure(&psi0))?,
                None => propagate(&sc, &psi0)?,
            };
            let mut text = format!("# {}\n", cfg.normalized());
            text.push_str(&trace.to_csv());
            let summary = format!("{} segments, final defect density {}", sc.steps, sig12(trace.final_defect()));
            (text, summary)
        }
        Command::Sweep(a) => {
            let fit = run_scaling_sweep(&a.scaling_sweep()?)?;
            let mut text = format!("# {}\nbx,k,x,d_f\n", cfg.normalized());
            for p in &fit.points {
                writeln!(text, "{},{},{},{}", sig12(p.bx), sig12(p.k), sig12(p.x), sig12(p.d_f)).unwrap();
            }
            (text, format!("{} points", fit.points.len()))
        }
        Command::Fit(a) => {
            let fit = run_scaling_sweep(&a.scaling_sweep()?)?;
            let record = fit.record();
            let mut text = serde_json::to_string_pretty(&record).expect("plain record");
            text.push('\n');
            (text, format!("alpha_hat {} r {}", sig12(record.alpha_hat), sig12(record.r)))
        }
        Command::Figure(a) => {
            let d = reproduce_figure(a.id)?;
            (d.to_csv(), format!("{}: {} rows", a.id, d.rows.len()))
        }
        Command::Schedule(a) => {
            let s = nmr_schedule(&a.sweep_config()?)?;
            let summary = format!("total duration {} s", sig12(s.total_duration()));
            (s.to_text(), summary)
        }
        Command::LzCheck(a) => {
            let (p_numeric, p_formula) = lz_check(a.bx, a.k)?;
            let v = serde_json::json!({
                "bx": a.bx,
                "k": a.k,
                "p_numeric": p_numeric,
                "p_formula": p_formula,
            });
            let mut text = serde_json::to_string_pretty(&v).expect("plain record");
            text.push('\n');
            (text, format!("p_numeric {} p_formula {}", sig12(p_numeric), sig12(p_formula)))
        }
    };
    write_atomic(&out, &contents)?;
    Ok(format!("{}: {summary}", out.display()))
}

/// Parses and runs; returns the process exit code.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match parse_args(argv) {
        Ok(c) => c,
        Err(CliError::Info(text)) => {
            print!("{text}");
            return EXIT_OK;
        }
        Err(e @ CliError::Usage(_)) => {
            eprint!("{e}");
            return e.exit_code();
        }
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match execute(&cfg) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions() {
        assert_eq!(parse_real("1/4"), Ok(0.25));
        assert_eq!(parse_real("-1.5"), Ok(-1.5));
        assert!(parse_real("x").is_err());
        assert!(parse_real("1/0").is_err());
    }

    #[test]
    fn scan_defaults() {
        let cfg = parse_args(["kzsim", "scan", "--bx", "0.1", "--k", "1"]).unwrap();
        let Command::Scan(a) = &cfg.command else { panic!() };
        let sc = a.sweep_config().unwrap();
        assert_eq!((sc.b0, sc.bz_end, sc.steps, sc.j_hz), (-1.5, -0.2, 13, 215.0));
        assert_eq!(sc.backend, Backend::Reference);
        assert!((sc.delta - 0.1).abs() < 1e-15);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(parse_args(["kzsim", "scan", "--k", "0"]).unwrap_err().exit_code(), EXIT_VALIDATION);
        assert_eq!(parse_args(["kzsim", "scan", "--bogus"]).unwrap_err().exit_code(), EXIT_USAGE);
        assert_eq!(parse_args(["kzsim", "figure", "fig9"]).unwrap_err().exit_code(), EXIT_USAGE);
        assert_eq!(
            parse_args(["kzsim", "scan", "--t2", "0,1"]).unwrap_err().exit_code(),
            EXIT_VALIDATION
        );
    }

    #[test]
    fn usage_error_names_the_flag() {
        let e = parse_args(["kzsim", "scan", "--bx", "abc"]).unwrap_err();
        assert!(e.to_string().contains("--bx"), "{e}");
    }

    #[test]
    fn schedule_segment_count() {
        let cfg = parse_args(["kzsim", "schedule", "--j", "15"]).unwrap();
        let Command::Schedule(a) = &cfg.command else { panic!() };
        assert_eq!(a.sweep_config().unwrap().steps, 15);
    }
}
