//! Command-line front end for the cubic-lines laboratory.
//!
//! Each numerical operation is one subcommand producing one deterministic
//! report (text, JSON lines, or CSV). The `acceptance` subcommand runs the
//! full verification suite and exits nonzero if any criterion fails.
//!
//! Coefficient lists are comma-separated signed integers (`--c 1,-1,2`);
//! scale grids are either comma lists or geometric `start:stop:factor`
//! ranges (`--grid 25:200:2`). Resource limits, worker count, and output
//! format may also come from a TOML config file whose keys mirror the flags.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::{fmt, fs};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use cubic_lines::acceptance::{acceptance_suite, Profile, SuiteOutcome, REFERENCE_SEED};
use cubic_lines::budget::{DEFAULT_MAX_BYTES, DEFAULT_MAX_OPS};
use cubic_lines::harness::{run, CountFamily, CountMethod, JobSpec, Region};
use cubic_lines::report::Report;
use cubic_lines::{Budget, Error};

/// Comma-separated signed integer list (newtype so clap treats the whole
/// list as one argument value).
#[derive(Debug, Clone)]
struct SignedList(Vec<i64>);

impl FromStr for SignedList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_i64_list(s).map(SignedList)
    }
}

/// Comma-separated float list of any length.
#[derive(Debug, Clone)]
struct PhaseList(Vec<f64>);

impl FromStr for PhaseList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad float {t:?}: {e}"))
            })
            .collect::<Result<Vec<f64>, String>>()
            .map(PhaseList)
    }
}

/// A scale grid: either an explicit comma list (`25,50,100`) or a geometric
/// range `start:stop:factor` (`25:200:2` gives 25, 50, 100, 200).
#[derive(Debug, Clone)]
struct ScaleGrid(Vec<i64>);

impl FromStr for ScaleGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [start, stop, factor] = parts.as_slice() else {
                return Err("a geometric grid is start:stop:factor, e.g. 25:200:2".into());
            };
            let start: i64 = start
                .trim()
                .parse()
                .map_err(|e| format!("bad grid start: {e}"))?;
            let stop: i64 = stop
                .trim()
                .parse()
                .map_err(|e| format!("bad grid stop: {e}"))?;
            let factor: i64 = factor
                .trim()
                .parse()
                .map_err(|e| format!("bad grid factor: {e}"))?;
            if start < 1 || stop < start || factor < 2 {
                return Err(format!(
                    "geometric grid needs 1 <= start <= stop and factor >= 2, got {start}:{stop}:{factor}"
                ));
            }
            let mut grid = Vec::new();
            let mut x = start;
            while x <= stop {
                grid.push(x);
                x = x
                    .checked_mul(factor)
                    .ok_or_else(|| "grid scale overflowed".to_string())?;
            }
            Ok(ScaleGrid(grid))
        } else {
            parse_i64_list(s).map(ScaleGrid)
        }
    }
}

fn parse_i64_list(s: &str) -> Result<Vec<i64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|e| format!("bad integer {t:?}: {e}"))
        })
        .collect()
}

fn parse_f64_array<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let values = PhaseList::from_str(s)?.0;
    let got = values.len();
    values
        .try_into()
        .map_err(|_| format!("need exactly {N} comma-separated values, got {got}"))
}

fn parse_i64_array<const N: usize>(s: &str) -> Result<[i64; N], String> {
    let values = parse_i64_list(s)?;
    let got = values.len();
    values
        .try_into()
        .map_err(|_| format!("need exactly {N} comma-separated values, got {got}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum FormatArg {
    /// Human-readable lines with wall-clock timings.
    Text,
    /// One canonical JSON line (byte-stable across reruns).
    Jsonl,
    /// Flat CSV, one row per count, value, and check.
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Mitm,
    Bruteforce,
}

impl From<MethodArg> for CountMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Mitm => CountMethod::Mitm,
            MethodArg::Bruteforce => CountMethod::Bruteforce,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RegionArg {
    /// Sum over [1, X]^2.
    Positive,
    /// Sum over [-X, X]^2.
    Symmetric,
}

impl From<RegionArg> for Region {
    fn from(r: RegionArg) -> Self {
        match r {
            RegionArg::Positive => Region::Positive,
            RegionArg::Symmetric => Region::Symmetric,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Lines,
    Pv,
    Hua,
}

impl From<FamilyArg> for CountFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Lines => CountFamily::Lines,
            FamilyArg::Pv => CountFamily::Pv,
            FamilyArg::Hua => CountFamily::Hua,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProfileArg {
    Quick,
    Full,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Quick => Profile::Quick,
            ProfileArg::Full => Profile::Full,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "cubic-lines",
    version,
    about = "Exact counts, exponential sums, densities, and arc dissection \
             for rational lines on diagonal cubic hypersurfaces"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Operation budget; a job whose estimated cost exceeds it is refused
    /// up front with the estimate (default 10^10).
    #[arg(long, global = true)]
    max_ops: Option<u64>,

    /// Working-memory budget in bytes (default 8 GiB).
    #[arg(long, global = true)]
    max_bytes: Option<u64>,

    /// Worker thread count. Results are identical for every choice; the
    /// default keeps the process-wide pool (one thread per core).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output format (default text).
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// TOML config file; keys max-ops, max-bytes, workers, format mirror
    /// the flags. Explicit flags win over the file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

/// Keys of the optional config file, mirroring the global flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct ConfigFile {
    max_ops: Option<u64>,
    max_bytes: Option<u64>,
    workers: Option<usize>,
    format: Option<FormatArg>,
}

#[derive(Debug)]
struct Settings {
    budget: Budget,
    workers: Option<usize>,
    format: FormatArg,
    output: Option<PathBuf>,
}

fn resolve_settings(global: GlobalArgs) -> Result<Settings, Error> {
    let config = match &global.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            toml::from_str::<ConfigFile>(&text)
                .map_err(|e| Error::InvalidInput(format!("config file {}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };
    Ok(Settings {
        budget: Budget {
            max_ops: global
                .max_ops
                .or(config.max_ops)
                .map_or(DEFAULT_MAX_OPS, u128::from),
            max_bytes: global
                .max_bytes
                .or(config.max_bytes)
                .map_or(DEFAULT_MAX_BYTES, u128::from),
        },
        workers: global.workers.or(config.workers),
        format: global.format.or(config.format).unwrap_or(FormatArg::Text),
        output: global.output,
    })
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count rational lines x + t y on a diagonal cubic, exactly.
    CountLines {
        /// Coefficients, e.g. --c 1,-1,2.
        #[arg(long)]
        c: SignedList,
        /// Box half-width: both coordinate vectors range over [-X, X]^s.
        #[arg(long)]
        x: i64,
        /// Counting algorithm; both give identical counts.
        #[arg(long, value_enum, default_value_t = MethodArg::Mitm)]
        method: MethodArg,
    },

    /// Count solutions of the translation-dilation invariant system.
    CountPv {
        /// Number of variable pairs.
        #[arg(long)]
        s: usize,
        /// Variables range over [1, X].
        #[arg(long)]
        x: i64,
    },

    /// Count ordered 8-tuples in [1, X]^8 with equal sums of four cubes.
    CountHua {
        #[arg(long)]
        x: u64,
    },

    /// Count solutions of the four form congruences modulo q.
    CountLocal {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        c: SignedList,
    },

    /// Evaluate a truncated two-variable cubic Weyl sum.
    ExpSum {
        #[arg(long)]
        x: i64,
        /// Four phase coordinates, e.g. --alpha 0.1,0.2,0.3,0.4.
        #[arg(long, value_parser = parse_f64_array::<4>)]
        alpha: [f64; 4],
        /// Scalar coefficient multiplying the phase (plain sum only).
        #[arg(long, default_value_t = 1)]
        coefficient: i64,
        /// Three quadratic phases; with --theta selects the nine-phase sum.
        #[arg(long, value_parser = parse_f64_array::<3>)]
        beta: Option<[f64; 3]>,
        /// Two linear phases; with --beta selects the nine-phase sum.
        #[arg(long, value_parser = parse_f64_array::<2>)]
        theta: Option<[f64; 2]>,
        #[arg(long, value_enum, default_value_t = RegionArg::Positive)]
        region: RegionArg,
    },

    /// Evaluate the complete exponential sum modulo q.
    CompleteSum {
        #[arg(long)]
        q: u64,
        /// Four integer phases, e.g. --a 3,1,4,1.
        #[arg(long, value_parser = parse_i64_array::<4>)]
        a: [i64; 4],
        /// Cross-check against the direct double sum.
        #[arg(long)]
        direct: bool,
    },

    /// Average complete-sum products over reduced phase vectors modulo q.
    LocalAverage {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        c: SignedList,
    },

    /// Truncated Euler product of local solution densities.
    SingularSeries {
        #[arg(long)]
        c: SignedList,
        /// Largest prime in the product.
        #[arg(long, default_value_t = 13)]
        p_max: u64,
        /// Prime-power depth for small primes.
        #[arg(long, default_value_t = 2)]
        deep_h: u32,
        /// Largest prime that gets the deep treatment.
        #[arg(long, default_value_t = 7)]
        deep_cutoff: u64,
    },

    /// Check the partial-sum identity at one prime power.
    LocalIdentity {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        h: u32,
        #[arg(long)]
        c: SignedList,
    },

    /// Oscillatory unit-box integral at a phase vector.
    UEval {
        #[arg(long, value_parser = parse_f64_array::<4>)]
        gamma: [f64; 4],
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 4_000_000)]
        max_evals: u64,
    },

    /// Rescaled box integral at scale P (P^2 times the unit-box value).
    VEval {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_parser = parse_f64_array::<4>)]
        gamma: [f64; 4],
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 4_000_000)]
        max_evals: u64,
        /// Cross-check against direct quadrature over [-P, P]^2.
        #[arg(long)]
        direct: bool,
    },

    /// Monte Carlo estimate of the smoothed real solution density.
    SingularIntegralMc {
        #[arg(long)]
        c: SignedList,
        /// Slab half-width of the smoothing.
        #[arg(long, default_value_t = 0.05)]
        sigma: f64,
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also estimate at sigma/2 in the same pass and report both.
        #[arg(long)]
        richardson: bool,
    },

    /// Quadrature estimate of the real solution density on a phase grid.
    SingularIntegralQuad {
        #[arg(long)]
        c: SignedList,
        /// Phase-grid radius.
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        /// Points per phase axis.
        #[arg(long, default_value_t = 41)]
        grid: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 4_000_000)]
        max_evals: u64,
    },

    /// Classify phases against the arc dissection.
    ClassifyArc {
        /// One coordinate (with --height) or four (with --delta and/or
        /// --height), e.g. --alpha 0.5,0.33,0.25,0.2.
        #[arg(long)]
        alpha: PhaseList,
        /// Joint major-arc exponent.
        #[arg(long)]
        delta: Option<f64>,
        /// Per-coordinate arc height.
        #[arg(long)]
        height: Option<f64>,
        #[arg(long)]
        x: f64,
    },

    /// Exact Lebesgue measure of the one-dimensional major arcs.
    MeasureArcs {
        #[arg(long)]
        h: u64,
        #[arg(long)]
        x: u64,
    },

    /// Two-variable geometric kernel sum over [0, X]^2.
    KernelK {
        #[arg(long)]
        gamma1: f64,
        #[arg(long)]
        gamma2: f64,
        #[arg(long)]
        x: u64,
    },

    /// Triple shifted kernel sum in its row-factorized form.
    KernelT {
        #[arg(long, value_parser = parse_f64_array::<4>)]
        alpha: [f64; 4],
        #[arg(long, value_parser = parse_f64_array::<3>)]
        beta: [f64; 3],
        #[arg(long)]
        x: u64,
        #[arg(long)]
        y: u64,
        /// Cross-check against direct triple summation.
        #[arg(long)]
        direct: bool,
    },

    /// Fit the growth exponent of a count family over a scale grid.
    FitExponent {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Pair count (required for the pv family).
        #[arg(long)]
        s: Option<usize>,
        /// Coefficients (required for the lines family).
        #[arg(long)]
        c: Option<SignedList>,
        /// Scales: comma list (25,50,100) or geometric start:stop:factor.
        #[arg(long)]
        grid: ScaleGrid,
    },

    /// Run the acceptance suite: eleven criteria, one verdict line each;
    /// exits nonzero if any criterion fails.
    Acceptance {
        #[arg(long, value_enum, default_value_t = ProfileArg::Full)]
        profile: ProfileArg,
        #[arg(long, default_value_t = REFERENCE_SEED)]
        seed: u64,
    },
}

/// Translate a parsed job subcommand into the harness job description.
/// `Acceptance` is handled separately and never reaches this function.
fn to_job(command: Command) -> JobSpec {
    match command {
        Command::CountLines { c, x, method } => JobSpec::CountLines {
            c: c.0,
            x,
            method: method.into(),
        },
        Command::CountPv { s, x } => JobSpec::CountPv { s, x },
        Command::CountHua { x } => JobSpec::CountHua { x },
        Command::CountLocal { q, c } => JobSpec::CountLocal { q, c: c.0 },
        Command::ExpSum {
            x,
            alpha,
            coefficient,
            beta,
            theta,
            region,
        } => JobSpec::ExpSum {
            x,
            alpha,
            coefficient,
            beta,
            theta,
            region: region.into(),
        },
        Command::CompleteSum { q, a, direct } => JobSpec::CompleteSum { q, a, direct },
        Command::LocalAverage { q, c } => JobSpec::LocalAverage { q, c: c.0 },
        Command::SingularSeries {
            c,
            p_max,
            deep_h,
            deep_cutoff,
        } => JobSpec::SingularSeries {
            c: c.0,
            p_max,
            deep_h,
            deep_cutoff,
        },
        Command::LocalIdentity { p, h, c } => JobSpec::LocalIdentity { p, h, c: c.0 },
        Command::UEval {
            gamma,
            tol,
            max_evals,
        } => JobSpec::UEval {
            gamma,
            tol,
            max_evals,
        },
        Command::VEval {
            p,
            gamma,
            tol,
            max_evals,
            direct,
        } => JobSpec::VEval {
            p,
            gamma,
            tol,
            max_evals,
            direct,
        },
        Command::SingularIntegralMc {
            c,
            sigma,
            samples,
            seed,
            richardson,
        } => JobSpec::SingularIntegralMc {
            c: c.0,
            sigma,
            samples,
            seed,
            richardson,
        },
        Command::SingularIntegralQuad {
            c,
            radius,
            grid,
            tol,
            max_evals,
        } => JobSpec::SingularIntegralQuad {
            c: c.0,
            radius,
            grid,
            tol,
            max_evals,
        },
        Command::ClassifyArc {
            alpha,
            delta,
            height,
            x,
        } => JobSpec::ClassifyArc {
            alpha: alpha.0,
            delta,
            height,
            x,
        },
        Command::MeasureArcs { h, x } => JobSpec::MeasureArcs { h, x },
        Command::KernelK { gamma1, gamma2, x } => JobSpec::KernelK { gamma1, gamma2, x },
        Command::KernelT {
            alpha,
            beta,
            x,
            y,
            direct,
        } => JobSpec::KernelT {
            alpha,
            beta,
            x,
            y,
            direct,
        },
        Command::FitExponent { family, s, c, grid } => JobSpec::FitExponent {
            family: family.into(),
            s,
            c: c.map(|list| list.0),
            grid: grid.0,
        },
        Command::Acceptance { .. } => unreachable!("acceptance handled before dispatch"),
    }
}

fn render_report_text(report: &Report) -> String {
    let mut out = String::new();
    if let Ok(job) = serde_json::to_string(&report.job) {
        out.push_str(&format!("job     {job}\n"));
    }
    for count in &report.counts {
        let params = count
            .parameters
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(", ");
        out.push_str(&format!(
            "count   {} = {}  ({params}; {:.2}s)\n",
            count.label, count.count, count.wall_seconds
        ));
    }
    for value in &report.values {
        match value.imag {
            Some(imag) => out.push_str(&format!(
                "value   {} = {:.12e} {} {:.12e} i\n",
                value.name,
                value.value,
                if imag < 0.0 { "-" } else { "+" },
                imag.abs()
            )),
            None => out.push_str(&format!("value   {} = {:.12e}\n", value.name, value.value)),
        }
    }
    for check in &report.checks {
        out.push_str(&format!(
            "check   [{}] {}: lhs = {:.12e}, rhs = {:.12e}, tolerance = {:.1e}\n",
            if check.pass { "PASS" } else { "FAIL" },
            check.anchor,
            check.lhs,
            check.rhs,
            check.tolerance
        ));
    }
    if let Some(wall) = report.wall_seconds {
        out.push_str(&format!("wall    {wall:.2}s\n"));
    }
    out
}

fn render_report(report: &Report, format: FormatArg) -> Result<String, Error> {
    match format {
        FormatArg::Text => Ok(render_report_text(report)),
        FormatArg::Jsonl => Ok(format!("{}\n", report.canonical_json()?)),
        FormatArg::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            String::from_utf8(buf).map_err(|e| Error::InvalidInput(e.to_string()))
        }
    }
}

fn render_suite(outcome: &SuiteOutcome, format: FormatArg) -> Result<String, Error> {
    match format {
        FormatArg::Text => Ok(outcome.render()),
        FormatArg::Jsonl => {
            let mut out = String::new();
            for criterion in &outcome.criteria {
                let line = serde_json::to_string(criterion)
                    .map_err(|e| Error::InvalidInput(format!("serialization failed: {e}")))?;
                out.push_str(&line);
                out.push('\n');
            }
            let trailer = serde_json::json!({
                "profile": outcome.profile,
                "seed": outcome.seed,
                "passed": outcome.all_passed(),
                "wall_seconds": outcome.wall_seconds,
            });
            out.push_str(&trailer.to_string());
            out.push('\n');
            Ok(out)
        }
        FormatArg::Csv => {
            let mut out = String::from("index,name,passed,wall_seconds,detail\n");
            for criterion in &outcome.criteria {
                let detail = criterion.lines.join(" | ").replace('"', "'");
                out.push_str(&format!(
                    "{},{},{},{:.3},\"{}\"\n",
                    criterion.index,
                    criterion.name,
                    criterion.passed,
                    criterion.wall_seconds,
                    detail
                ));
            }
            Ok(out)
        }
    }
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), Error> {
    match output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

enum Verdict {
    Clean,
    ChecksFailed,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Clean => "clean",
            Verdict::ChecksFailed => "checks failed",
        })
    }
}

fn execute(cli: Cli) -> Result<Verdict, Error> {
    let settings = resolve_settings(cli.global)?;
    match cli.command {
        Command::Acceptance { profile, seed } => {
            let outcome = acceptance_suite(profile.into(), seed);
            let text = render_suite(&outcome, settings.format)?;
            emit(&text, settings.output.as_ref())?;
            if settings.output.is_some() {
                // Keep the verdict visible even when the report went to a file.
                eprintln!(
                    "acceptance: {}",
                    if outcome.all_passed() { "PASS" } else { "FAIL" }
                );
            }
            Ok(if outcome.all_passed() {
                Verdict::Clean
            } else {
                Verdict::ChecksFailed
            })
        }
        command => {
            let job = to_job(command);
            let report = run(&job, &settings.budget, settings.workers)?;
            let text = render_report(&report, settings.format)?;
            emit(&text, settings.output.as_ref())?;
            Ok(if report.all_checks_pass() {
                Verdict::Clean
            } else {
                Verdict::ChecksFailed
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(Verdict::Clean) => ExitCode::SUCCESS,
        Ok(Verdict::ChecksFailed) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn the_cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn signed_lists_parse_with_signs_and_spaces() {
        let list = SignedList::from_str("1, -1,2").unwrap();
        assert_eq!(list.0, vec![1, -1, 2]);
        assert!(SignedList::from_str("1,x").is_err());
    }

    #[test]
    fn geometric_grids_expand_inclusively() {
        let grid = ScaleGrid::from_str("25:200:2").unwrap();
        assert_eq!(grid.0, vec![25, 50, 100, 200]);
        let list = ScaleGrid::from_str("4,8,16").unwrap();
        assert_eq!(list.0, vec![4, 8, 16]);
        assert!(ScaleGrid::from_str("25:200").is_err());
        assert!(ScaleGrid::from_str("200:25:2").is_err());
        assert!(ScaleGrid::from_str("25:200:1").is_err());
    }

    #[test]
    fn fixed_length_arrays_reject_wrong_arity() {
        assert_eq!(parse_f64_array::<2>("0.5,0.25").unwrap(), [0.5, 0.25]);
        assert!(parse_f64_array::<4>("0.1,0.2").is_err());
        assert_eq!(parse_i64_array::<4>("3,1,4,1").unwrap(), [3, 1, 4, 1]);
    }

    #[test]
    fn subcommands_translate_into_jobs() {
        let cli = Cli::try_parse_from([
            "cubic-lines",
            "count-lines",
            "--c",
            "1,-1",
            "--x",
            "2",
            "--method",
            "bruteforce",
        ])
        .unwrap();
        let job = to_job(cli.command);
        assert!(matches!(
            job,
            JobSpec::CountLines {
                ref c,
                x: 2,
                method: CountMethod::Bruteforce,
            } if c == &vec![1, -1]
        ));

        let cli = Cli::try_parse_from([
            "cubic-lines",
            "fit-exponent",
            "--family",
            "pv",
            "--s",
            "1",
            "--grid",
            "4:32:2",
        ])
        .unwrap();
        let job = to_job(cli.command);
        assert!(matches!(
            job,
            JobSpec::FitExponent {
                family: CountFamily::Pv,
                s: Some(1),
                c: None,
                ref grid,
            } if grid == &vec![4, 8, 16, 32]
        ));
    }

    #[test]
    fn config_files_fill_unset_flags_and_flags_win() {
        let dir = std::env::temp_dir().join("cubic-lines-cli-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("config.toml");
        fs::write(&path, "max-ops = 5000\nworkers = 3\nformat = \"jsonl\"\n").unwrap();

        let cli = Cli::try_parse_from([
            "cubic-lines",
            "count-hua",
            "--x",
            "2",
            "--config",
            path.to_str().unwrap(),
            "--max-ops",
            "7000",
        ])
        .unwrap();
        let settings = resolve_settings(cli.global).unwrap();
        assert_eq!(settings.budget.max_ops, 7000, "flag beats config");
        assert_eq!(settings.workers, Some(3), "config fills unset flag");
        assert_eq!(settings.format, FormatArg::Jsonl);
        assert_eq!(settings.budget.max_bytes, DEFAULT_MAX_BYTES);

        fs::write(&path, "unknown-key = 1\n").unwrap();
        let cli = Cli::try_parse_from([
            "cubic-lines",
            "count-hua",
            "--x",
            "2",
            "--config",
            path.to_str().unwrap(),
        ])
        .unwrap();
        assert!(
            resolve_settings(cli.global).is_err(),
            "unknown keys rejected"
        );
    }

    #[test]
    fn reports_render_in_all_three_formats() {
        let job = JobSpec::CountPv { s: 1, x: 7 };
        let report = run(&job, &Budget::unlimited(), Some(1)).unwrap();
        let text = render_report(&report, FormatArg::Text).unwrap();
        assert!(text.contains("= 49"), "{text}");
        let jsonl = render_report(&report, FormatArg::Jsonl).unwrap();
        assert_eq!(jsonl.lines().count(), 1);
        assert!(jsonl.contains("\"count\":49"), "{jsonl}");
        let csv = render_report(&report, FormatArg::Csv).unwrap();
        assert!(csv.starts_with("kind,name,"), "{csv}");
    }
}
