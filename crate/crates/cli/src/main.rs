//! `mirrorvac`: evaluate, sweep and validate the mirror/beam-splitter
//! vacuum-fluctuation model.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage or configuration
//! error, 3 numeric error.

mod config;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mirrorvac::beam_optics::rayleigh_range;
use mirrorvac::fluctuation::{detector_response_factor, sub_poisson_scan, VarianceModel};
use mirrorvac::sweep::{figure2_spec, figure3_spec, format_csv_number, SweepSpec};
use mirrorvac::validation::{Suite, DEFAULT_SEED};
use mirrorvac::{ideal_variance, mu_closed, practical_variance, rm_closed, run_sweep_with_workers};

use config::{ConfigError, ConfigFile, PhysicsArgs, RunConfig};

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "mirrorvac",
    version,
    about = "Vacuum-fluctuation modulation by a mirror behind a beam splitter"
)]
struct Cli {
    /// Key-value file with default physical parameters; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single quantity and print it
    Eval {
        #[arg(value_enum)]
        subject: Subject,
        #[command(flatten)]
        physics: PhysicsArgs,
    },
    /// Run a parameter sweep and write CSV
    Sweep {
        /// Sweep specification file
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        spec: Option<PathBuf>,
        /// Built-in figure dataset
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[command(flatten)]
        output: OutputArgs,
        /// Worker threads (default: all cores); output does not depend on it
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Scan the normalized variance over the mirror distance and flag sub-Poisson points
    Scan {
        #[command(flatten)]
        physics: PhysicsArgs,
        /// First mirror distance
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        /// Last mirror distance
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Model::Ideal)]
        model: Model,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cross-check independent derivations
    Validate {
        /// Suites to run (default: all)
        #[arg(value_enum)]
        suites: Vec<SuiteArg>,
        /// Seed for the random draws
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(clap::Args)]
struct OutputArgs {
    /// Output file; `-` writes to stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for the default output file name
    #[arg(long, env = "MIRRORVAC_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Subject {
    Mu,
    Rm,
    Variance,
    Practical,
    DetectorFactor,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Fig2,
    Fig3,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Ideal,
    Practical,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Modenet,
    Detector,
    Overlap,
    Limits,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Modenet => Suite::Modenet,
            SuiteArg::Detector => Suite::Detector,
            SuiteArg::Overlap => Suite::Overlap,
            SuiteArg::Limits => Suite::Limits,
        }
    }
}

enum Failure {
    Config(String),
    Numeric(String),
    Validation,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<mirrorvac::Error> for Failure {
    fn from(e: mirrorvac::Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(format!("I/O error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numeric error: {msg}");
            ExitCode::from(EXIT_NUMERIC)
        }
        Err(Failure::Validation) => ExitCode::from(EXIT_VALIDATION),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Eval { subject, physics } => {
            let cfg = RunConfig::resolve(&physics, &file)?;
            let (value, note) = eval(subject, &cfg)?;
            println!("{}", display_value(value));
            println!("# {note}");
            Ok(())
        }
        Command::Sweep {
            spec,
            preset,
            output,
            workers,
        } => {
            let (spec, stem) = match (spec, preset) {
                (Some(path), _) => {
                    let text = fs::read_to_string(&path)
                        .map_err(|e| Failure::Config(format!("cannot read spec file {}: {e}", path.display())))?;
                    let spec =
                        SweepSpec::parse(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
                    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
                    (spec, stem.unwrap_or_else(|| "sweep".into()))
                }
                (None, Some(Preset::Fig2)) => (figure2_spec(), "fig2".to_string()),
                (None, Some(Preset::Fig3)) => (figure3_spec(), "fig3".to_string()),
                (None, None) => unreachable!("clap requires --spec or --preset"),
            };
            let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let result = run_sweep_with_workers(&spec, workers)?;
            write_output(&output, &stem, result.records.len(), |w| result.write_csv(w))
        }
        Command::Scan {
            physics,
            from,
            to,
            samples,
            model,
            output,
        } => {
            let cfg = RunConfig::resolve(&physics, &file)?;
            let model = match model {
                Model::Ideal => VarianceModel::Ideal,
                Model::Practical => VarianceModel::Practical(cfg.detector()),
            };
            let scan = sub_poisson_scan(
                &cfg.template(),
                &cfg.laser(),
                &model,
                cfg.mode_matching(),
                (from, to),
                samples,
            )?;
            let min = scan.minimum_point();
            eprintln!(
                "minimum normalized variance {} at z1 = {} ({} of {} points sub-Poisson)",
                display_value(min.normalized_variance),
                display_value(min.z1),
                scan.sub_poisson_count(),
                scan.points.len()
            );
            write_output(&output, "scan", scan.points.len(), |w| {
                writeln!(w, "# generator = mirrorvac scan")?;
                writeln!(w, "# version = {}", env!("CARGO_PKG_VERSION"))?;
                writeln!(w, "# model = {}", scan.model.name())?;
                writeln!(w, "# matching = {}", scan.matching.name())?;
                writeln!(w, "# minimum_index = {}", scan.minimum)?;
                writeln!(w, "z1,mu,sqrt_rm,normalized_variance,sub_poisson")?;
                for p in &scan.points {
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        format_csv_number(p.z1),
                        format_csv_number(p.mu),
                        format_csv_number(p.sqrt_rm),
                        format_csv_number(p.normalized_variance),
                        u8::from(p.is_sub_poisson)
                    )?;
                }
                Ok(())
            })
        }
        Command::Validate { suites, seed } => {
            let suites: Vec<Suite> = if suites.is_empty() {
                Suite::ALL.to_vec()
            } else {
                suites.into_iter().map(Suite::from).collect()
            };
            println!("mirrorvac validate (seed = {seed})");
            let mut ok = true;
            for suite in suites {
                let report = suite.run(seed)?;
                print!("{report}");
                if suite.is_mandatory() && !report.passed {
                    ok = false;
                }
            }
            println!(
                "{}",
                if ok {
                    "ALL MANDATORY SUITES PASSED"
                } else {
                    "VALIDATION FAILED"
                }
            );
            if ok {
                Ok(())
            } else {
                Err(Failure::Validation)
            }
        }
    }
}

fn eval(subject: Subject, cfg: &RunConfig) -> Result<(f64, &'static str), Failure> {
    Ok(match subject {
        Subject::Mu => (
            mu_closed(cfg.z1, rayleigh_range(cfg.w0, cfg.wavelength)),
            "mu = (1+4u^2)^(1/4) / (1+5u^2+4u^4)^(1/4), u = z1/z0, shared waist w0 at the detector",
        ),
        Subject::Rm => (
            rm_closed(cfg.z1, cfg.w0, cfg.wm, cfg.wavelength),
            "sqrt(Rm) = sqrt(2 wm/w0) (1+z1^2/zm^2)^(1/4) / ({(1+wm^2/w0^2)^2 + z1^2/z0^2}{1+z1^2/zm^2})^(1/4)",
        ),
        Subject::Variance => (
            ideal_variance(&cfg.network(), &cfg.laser())?,
            "<I^2> = |alpha|^2 T/2 {1 + mu^2 - 2 mu R sqrt(Rm) cos(2 k0 z1)}",
        ),
        Subject::Practical => (
            practical_variance(&cfg.network(), &cfg.laser(), &cfg.detector())?,
            "<I^2>_P = |alpha|^2 T/2 {1 + mu^2 - 2 mu R sqrt(Rm) exp(-z1^2 dk^2) F}, F = detector response factor",
        ),
        Subject::DetectorFactor => (
            detector_response_factor(&cfg.detector(), cfg.wavenumber(), cfg.z1),
            "F = kappa [cos(2k0 z1 + phi0) - e^(-kappa D) cos(2k0 (z1+D) + phi0)] / sqrt(4k0^2 + kappa^2), phi0 = atan(2k0/kappa)",
        ),
    })
}

/// Terminal display: 12 decimals for ordinary magnitudes, otherwise 12
/// significant digits in scientific notation.
fn display_value(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-3..1e6).contains(&a) {
        format!("{v:.12}")
    } else {
        format!("{v:.11e}")
    }
}

fn write_output<F>(args: &OutputArgs, stem: &str, records: usize, body: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let Format::Csv = args.format;
    let path = match &args.out {
        Some(p) if p.as_os_str() == "-" => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            // A closed reader (`| head`) is not a failure.
            return match body(&mut lock).and_then(|()| lock.flush()) {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            };
        }
        Some(p) => p.clone(),
        None => args
            .output_dir
            .as_deref()
            .unwrap_or_else(|| Path::new("."))
            .join(format!("{stem}.csv")),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    // Buffer, then write once from this thread.
    let mut buf = Vec::new();
    body(&mut buf)?;
    fs::write(&path, buf)?;
    eprintln!("wrote {records} records to {}", path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_formats() {
        assert_eq!(display_value(1.0), "1.000000000000");
        assert_eq!(display_value(0.5), "0.500000000000");
        assert_eq!(display_value(0.0), "0.000000000000");
        assert_eq!(display_value(1.5e-7), "1.50000000000e-7");
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
