//! `blochlab` command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::monomials::{monomial_log_norm, write_records_csv, MonomialNormRecord};
use crate::operator::{
    annuli_diagnostic, classify, essential_norm_band, quotient_sequence, ClassifyPolicy,
    Denominator, DEFAULT_TAIL_FRACTION,
};
use crate::report::{
    constant_table, write_annuli_csv, write_constants_csv, write_equivalence_csv, write_json,
    write_record_csv, write_series_csv, RunMeta,
};
use crate::seminorm::GridConfig;
use crate::symbols::{parse_symbol_spec, validate_self_map, HoloMap};
use crate::verify;
use crate::weights::{equivalence_constants, parse_weight_spec, Weight};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_REFUSED: i32 = 3;

pub const THREADS_ENV: &str = "BLOCHLAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "blochlab",
    version,
    about = "Weighted Bloch semi-norms and composition-operator diagnostics on the unit disk"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (falls back to BLOCHLAB_THREADS, then all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    /// Write to PATH instead of standard output
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Embed the wall-clock time in JSON output
    #[arg(long, global = true)]
    timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DenominatorArg {
    Exact,
    Log,
}

impl From<DenominatorArg> for Denominator {
    fn from(d: DenominatorArg) -> Self {
        match d {
            DenominatorArg::Exact => Denominator::ExactNorm,
            DenominatorArg::Log => Denominator::LogJPlus1,
        }
    }
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    n_radii: Option<usize>,
    #[arg(long)]
    n_angles: Option<usize>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    refine_rounds: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
}

impl GridArgs {
    fn resolve(&self) -> GridConfig {
        let d = GridConfig::default();
        GridConfig {
            n_radii: self.n_radii.unwrap_or(d.n_radii),
            n_angles: self.n_angles.unwrap_or(d.n_angles),
            r_max: self.r_max.unwrap_or(d.r_max),
            refine_rounds: self.refine_rounds.unwrap_or(d.refine_rounds),
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            ..d
        }
    }
}

#[derive(Debug, Args)]
struct PolicyArgs {
    #[arg(long, default_value_t = 0.05)]
    stabilization_slack: f64,
    #[arg(long, default_value_t = 1e-3)]
    compact_threshold: f64,
}

impl PolicyArgs {
    fn resolve(&self) -> ClassifyPolicy {
        ClassifyPolicy {
            stabilization_slack: self.stabilization_slack,
            compact_threshold: self.compact_threshold,
        }
    }
}

#[derive(Debug, Args)]
struct SeriesArgs {
    /// Symbol spec, e.g. `compose(power:2,mobius:0.3,0.0)`
    #[arg(long)]
    symbol: String,
    /// Weight spec, e.g. `vlog`, `alpha:1`, `logk:2,10`
    #[arg(long)]
    weight: String,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    j_max: u32,
    #[arg(long, value_enum, default_value_t = DenominatorArg::Exact)]
    denominator: DenominatorArg,
    /// Run even if the symbol fails self-map validation
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact log-Bloch norms of monomials z^j
    Monomials {
        #[arg(long, required_unless_present = "j_list", value_parser = clap::value_parser!(u64).range(1..))]
        j_max: Option<u64>,
        /// Comma-separated indices, overrides --j-max
        #[arg(long, value_delimiter = ',')]
        j_list: Option<Vec<u64>>,
    },
    /// Quotient sequence q_j = ||phi^j||_mu / ||z^j||_log
    Quotients(SeriesArgs),
    /// Boundedness and compactness evidence
    Classify {
        #[command(flatten)]
        series: SeriesArgs,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Essential-norm band
    Essnorm {
        #[command(flatten)]
        series: SeriesArgs,
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long, default_value_t = DEFAULT_TAIL_FRACTION)]
        tail_fraction: f64,
    },
    /// Sampled equivalence constants between two radial weights
    WeightEquiv {
        #[arg(long)]
        w1: String,
        #[arg(long)]
        w2: String,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
    },
    /// Histogram of disk samples by the annulus containing |phi(z)|
    Annuli {
        #[arg(long)]
        symbol: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        j_max: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        force: bool,
    },
    /// Run the acceptance checks; exit 0 iff all pass
    Verify {
        /// Reduced j ranges
        #[arg(long)]
        fast: bool,
    },
    /// The named constants at 17 significant digits
    Constants,
}

/// Failure with its exit code.
struct Failure {
    code: i32,
    error: Error,
}

impl Failure {
    fn usage(error: Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            error,
        }
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let code = match error {
            Error::Refused(_) => EXIT_REFUSED,
            _ => EXIT_FAILURE,
        };
        Failure { code, error }
    }
}

fn parse_symbol(text: &str) -> std::result::Result<HoloMap, Failure> {
    parse_symbol_spec(text).map_err(Failure::usage)
}

fn parse_weight(text: &str) -> std::result::Result<Weight, Failure> {
    parse_weight_spec(text).map_err(Failure::usage)
}

fn thread_count(flag: Option<usize>) -> std::result::Result<usize, Failure> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            Failure::usage(Error::Precondition(format!(
                "{THREADS_ENV} must be a non-negative integer, got `{v}`"
            )))
        }),
        Err(_) => Ok(0),
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("blochlab: {}", f.error);
            f.code
        }
    }
}

fn execute(cli: Cli) -> std::result::Result<i32, Failure> {
    let threads = thread_count(cli.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::from(Error::Precondition(format!("thread pool: {e}"))))?;
    let mut buf = Vec::new();
    let code = pool.install(|| dispatch(&cli, &mut buf))?;
    match &cli.out {
        Some(path) => fs::write(path, &buf).map_err(|e| Failure::from(Error::Io(e)))?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(&buf)
                .map_err(|e| Failure::from(Error::Io(e)))?;
            stdout.flush().map_err(|e| Failure::from(Error::Io(e)))?;
        }
    }
    Ok(code)
}

fn series_config(
    name: &str,
    s: &SeriesArgs,
    phi: &HoloMap,
    grid: &GridConfig,
) -> serde_json::Value {
    json!({
        "subcommand": name,
        "symbol_spec": phi.to_string(),
        "symbol": phi,
        "weight_spec": s.weight,
        "j_max": s.j_max,
        "denominator": Denominator::from(s.denominator),
        "force": s.force,
        "grid": grid,
    })
}

fn dispatch(cli: &Cli, out: &mut Vec<u8>) -> std::result::Result<i32, Failure> {
    let meta = || RunMeta::new(cli.timestamp);
    match &cli.command {
        Command::Monomials { j_max, j_list } => {
            let js: Vec<u64> = match (j_list, j_max) {
                (Some(list), _) => list.clone(),
                (None, Some(n)) => (1..=*n).collect(),
                (None, None) => unreachable!("clap enforces --j-max or --j-list"),
            };
            if js.contains(&0) {
                return Err(Failure::usage(Error::Domain(
                    "monomial indices must be >= 1".into(),
                )));
            }
            let records: Vec<MonomialNormRecord> = js
                .par_iter()
                .map(|&j| monomial_log_norm(j))
                .collect::<Result<_>>()?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => write_records_csv(&records, out)?,
                Format::Json => write_json(
                    &json!({"subcommand": "monomials", "j": js}),
                    &records,
                    meta(),
                    out,
                )?,
            }
        }
        Command::Quotients(s) => {
            let (phi, mu, grid) = (
                parse_symbol(&s.symbol)?,
                parse_weight(&s.weight)?,
                s.grid.resolve(),
            );
            let series =
                quotient_sequence(&phi, &mu, s.j_max, &grid, s.denominator.into(), s.force)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => write_series_csv(&series, out)?,
                Format::Json => write_json(
                    &series_config("quotients", s, &phi, &grid),
                    &series,
                    meta(),
                    out,
                )?,
            }
        }
        Command::Classify { series: s, policy } => {
            let (phi, mu, grid) = (
                parse_symbol(&s.symbol)?,
                parse_weight(&s.weight)?,
                s.grid.resolve(),
            );
            let policy = policy.resolve();
            let series =
                quotient_sequence(&phi, &mu, s.j_max, &grid, s.denominator.into(), s.force)?;
            let class = classify(&series, &policy)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Csv => write_record_csv(&class, out)?,
                Format::Json => {
                    let mut config = series_config("classify", s, &phi, &grid);
                    config["policy"] = json!(policy);
                    write_json(&config, &class, meta(), out)?
                }
            }
        }
        Command::Essnorm {
            series: s,
            policy,
            tail_fraction,
        } => {
            let (phi, mu, grid) = (
                parse_symbol(&s.symbol)?,
                parse_weight(&s.weight)?,
                s.grid.resolve(),
            );
            let policy = policy.resolve();
            let series =
                quotient_sequence(&phi, &mu, s.j_max, &grid, s.denominator.into(), s.force)?;
            let band = essential_norm_band(&series, *tail_fraction, &policy)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Csv => write_record_csv(&band, out)?,
                Format::Json => {
                    let mut config = series_config("essnorm", s, &phi, &grid);
                    config["policy"] = json!(policy);
                    config["tail_fraction"] = json!(tail_fraction);
                    write_json(&config, &band, meta(), out)?
                }
            }
        }
        Command::WeightEquiv { w1, w2, grid } => {
            let (a, b) = (parse_weight(w1)?, parse_weight(w2)?);
            let rep = equivalence_constants(&a, &b, *grid)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => write_equivalence_csv(&rep, out)?,
                Format::Json => write_json(
                    &json!({"subcommand": "weight-equiv", "w1": a.spec(), "w2": b.spec(), "grid": grid}),
                    &rep,
                    meta(),
                    out,
                )?,
            }
        }
        Command::Annuli {
            symbol,
            j_max,
            samples,
            force,
        } => {
            let phi = parse_symbol(symbol)?;
            if phi.needs_validation() {
                let report = validate_self_map(&phi, *samples);
                if !report.pass && !force {
                    return Err(Error::Refused(format!(
                        "`{phi}` is not a self-map of the disk: |phi| reaches {} (pass --force to run anyway)",
                        report.max_modulus
                    ))
                    .into());
                }
            }
            let hist = annuli_diagnostic(&phi, *j_max, *samples);
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => write_annuli_csv(&hist, out)?,
                Format::Json => write_json(
                    &json!({"subcommand": "annuli", "symbol_spec": phi.to_string(), "symbol": phi, "j_max": j_max, "samples": samples}),
                    &hist,
                    meta(),
                    out,
                )?,
            }
        }
        Command::Verify { fast } => {
            let results = verify::run_all(*fast);
            let all = results.iter().all(|r| r.pass);
            match cli.format {
                Some(Format::Json) => write_json(
                    &json!({"subcommand": "verify", "fast": fast}),
                    &results,
                    meta(),
                    &mut *out,
                )?,
                Some(Format::Csv) => {
                    let mut w = csv::Writer::from_writer(&mut *out);
                    for r in &results {
                        w.serialize(r).map_err(Error::from)?;
                    }
                    w.flush().map_err(Error::Io)?;
                }
                None => {
                    for r in &results {
                        writeln!(out, "{}", r.line()).map_err(Error::Io)?;
                    }
                    let passed = results.iter().filter(|r| r.pass).count();
                    writeln!(out, "{passed}/{} criteria passed", results.len())
                        .map_err(Error::Io)?;
                }
            }
            return Ok(if all { EXIT_OK } else { EXIT_FAILURE });
        }
        Command::Constants => match cli.format.unwrap_or(Format::Csv) {
            Format::Csv => write_constants_csv(out)?,
            Format::Json => {
                let map: serde_json::Map<String, serde_json::Value> = constant_table()
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), json!(v)))
                    .collect();
                write_json(&json!({"subcommand": "constants"}), &map, meta(), out)?
            }
        },
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    use std::sync::atomic::{AtomicUsize, Ordering};

    static NEXT: AtomicUsize = AtomicUsize::new(0);

    fn run_capture(args: &[&str]) -> (i32, String) {
        let n = NEXT.fetch_add(1, Ordering::Relaxed);
        let path =
            std::env::temp_dir().join(format!("blochlab-cli-{}-{n}.out", std::process::id()));
        let mut argv = vec!["blochlab".to_string()];
        argv.extend(args.iter().map(|s| s.to_string()));
        argv.push("--out".into());
        argv.push(path.to_string_lossy().into_owned());
        let code = run(argv);
        let text = fs::read_to_string(&path).unwrap_or_default();
        let _ = fs::remove_file(&path);
        (code, text)
    }

    #[test]
    fn identity_quotients() {
        let (code, text) = run_capture(&[
            "quotients",
            "--symbol",
            "id",
            "--weight",
            "vlog",
            "--j-max",
            "20",
        ]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 21);
        for line in &lines[1..] {
            let q: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert!((q - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            run([
                "blochlab",
                "quotients",
                "--symbol",
                "spiral:1",
                "--weight",
                "vlog",
                "--j-max",
                "5"
            ]),
            EXIT_USAGE
        );
        assert_eq!(
            run([
                "blochlab",
                "quotients",
                "--symbol",
                "id",
                "--weight",
                "vlog"
            ]),
            EXIT_USAGE
        );
        assert_eq!(
            run([
                "blochlab",
                "quotients",
                "--symbol",
                "id",
                "--weight",
                "vlog",
                "--j-max",
                "0"
            ]),
            EXIT_USAGE
        );
        assert_eq!(run(["blochlab", "bogus"]), EXIT_USAGE);
        let (code, _) = run_capture(&[
            "quotients",
            "--symbol",
            "poly:0.6,0.6",
            "--weight",
            "vlog",
            "--j-max",
            "5",
        ]);
        assert_eq!(code, EXIT_REFUSED);
        let (code, _) = run_capture(&[
            "classify",
            "--symbol",
            "id",
            "--weight",
            "vlog",
            "--j-max",
            "4",
            "--n-radii",
            "32",
            "--n-angles",
            "8",
        ]);
        assert_eq!(code, EXIT_FAILURE);
    }

    #[test]
    fn constants_and_json() {
        let (code, text) = run_capture(&["constants", "--format", "json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!((v["result"]["c_upper_band"].as_f64().unwrap() - 28.900031667428243).abs() < 1e-12);
        assert!(v["run"].get("timestamp").is_none());
    }

    #[test]
    fn classify_json_embeds_config() {
        let (code, text) = run_capture(&[
            "classify",
            "--symbol",
            "dilate:0.5",
            "--weight",
            "vlog",
            "--j-max",
            "100",
            "--n-radii",
            "128",
            "--n-angles",
            "16",
        ]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["result"]["compact_evidence"], "strong_yes");
        assert_eq!(v["config"]["grid"]["n_radii"], 128);
        assert_eq!(v["config"]["symbol"]["node"], "dilate");
    }

    #[test]
    fn monomials_list() {
        let (code, text) = run_capture(&["monomials", "--j-list", "1,2,100"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "j,s_j,norm,residual,method");
        assert!(lines[1].starts_with("1,1,1.0986122886681098,,global_scan"));
        assert!(lines[3].ends_with("root_find"));
    }

    #[test]
    fn threads_env_must_parse() {
        assert!(thread_count(Some(3)).is_ok_and(|n| n == 3));
    }
}
