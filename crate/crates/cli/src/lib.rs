//! The `scgep` command line.
//!
//! Exit codes: 0 success, 1 invalid input (arguments, parse or validation
//! errors), 2 solver did not reach a certified optimum (gap remaining, node
//! limit, failed stage), 3 file-system errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use scgep_core::builder::{explain_row, BuildError, BuildOptions, Formulation};
use scgep_core::ingest::{load_path, IngestError, Scenario};
use scgep_core::milp::{lp_format, SolverOptions};
use scgep_core::nbd::{self, CutCheckpoint, NbdError, NbdOptions, NbdStatus, RunHooks};
use scgep_core::oracle::{solve_monolithic, OracleError, OracleOptions};
use scgep_core::report::{compare_runs, read_report, write_report, ReportError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "scgep", version, about = "Supply-chain-constrained generation expansion planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Nbd,
    Monolithic,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a dataset, print its digest and the validation report.
    Validate {
        manifest: PathBuf,
        #[arg(long)]
        scenario: Option<Scenario>,
    },
    /// Solve a dataset and write the plan report.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "nbd")]
        mode: Mode,
        /// Convergence tolerance on UB - LB.
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        /// Read --epsilon relative to |UB| instead of in dollars.
        #[arg(long)]
        relative: bool,
        #[arg(long, default_value_t = 50)]
        max_iters: usize,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the manifest's scenario.
        #[arg(long)]
        scenario: Option<Scenario>,
        /// Warm-start cuts from a previous run's cuts.json.
        #[arg(long)]
        cuts_in: Option<PathBuf>,
        /// Write the cut pools here instead of <out>/cuts.json.
        #[arg(long)]
        cuts_out: Option<PathBuf>,
        /// Write the monolithic problem in LP format.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
        #[arg(long)]
        node_limit: Option<usize>,
        /// Treat every investment decision as continuous.
        #[arg(long)]
        relax: bool,
    },
    /// Print the tables of a report directory.
    Report { dir: PathBuf },
    /// Describe generated rows.
    Explain {
        #[command(subcommand)]
        what: Explain,
    },
    /// Planned-capacity and cost differences between two report directories.
    Compare { a: PathBuf, b: PathBuf },
}

#[derive(Debug, Subcommand)]
enum Explain {
    /// The constraint a row key instantiates, e.g. `lead[C1,2028]`.
    Row { key: String },
}

/// An error with the exit code it maps to.
struct Failure {
    code: i32,
    msg: String,
}

impl Failure {
    fn new(code: i32, msg: impl Into<String>) -> Failure {
        Failure { code, msg: msg.into() }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Failure {
        let code = match e {
            IngestError::Io { .. } => EXIT_IO,
            _ => EXIT_INVALID,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<BuildError> for Failure {
    fn from(e: BuildError) -> Failure {
        Failure::new(EXIT_INVALID, e.to_string())
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Failure {
        let code = match e {
            ReportError::Io { .. } => EXIT_IO,
            ReportError::Parse { .. } | ReportError::HorizonMismatch { .. } => EXIT_INVALID,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<NbdError> for Failure {
    fn from(e: NbdError) -> Failure {
        let code = match e {
            NbdError::Build(_) | NbdError::Checkpoint(_) => EXIT_INVALID,
            NbdError::Io(_) => EXIT_IO,
            NbdError::StageFailed { .. } | NbdError::RelaxationFailed { .. } => EXIT_NOT_CONVERGED,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Failure {
        let code = match e {
            OracleError::Build(_) => EXIT_INVALID,
            _ => EXIT_NOT_CONVERGED,
        };
        Failure::new(code, e.to_string())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(EXIT_IO, format!("{}: {e}", path.display()))
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn cli_main<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.msg);
            f.code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Validate { manifest, scenario } => cmd_validate(&manifest, scenario, out),
        Command::Solve {
            config,
            mode,
            epsilon,
            relative,
            max_iters,
            out: dir,
            scenario,
            cuts_in,
            cuts_out,
            dump_lp,
            node_limit,
            relax,
        } => {
            let loaded = load_path(&config, scenario)?;
            for w in &loaded.report.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            let model = loaded.model;
            let build = BuildOptions {
                relax_integrality: relax,
            };
            let mut solver = SolverOptions::default();
            if let Some(n) = node_limit {
                solver.node_limit = n;
            }
            if let Some(path) = &dump_lp {
                let p = Formulation::new(&model, build)?.monolithic()?;
                std::fs::write(path, lp_format::to_lp_string(&p)).map_err(|e| io_failure(path, e))?;
            }
            std::fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
            match mode {
                Mode::Monolithic => {
                    let (report, res) = solve_monolithic(&model, &OracleOptions { solver, build })?;
                    write_report(&report, &dir)?;
                    let _ = writeln!(
                        out,
                        "monolithic optimal objective {} ({} simplex iterations, {} nodes)",
                        report.objective, res.stats.iterations, res.stats.nodes
                    );
                    let _ = writeln!(out, "plan digest {}", report.digest());
                    Ok(EXIT_OK)
                }
                Mode::Nbd => {
                    let opts = NbdOptions {
                        epsilon,
                        relative,
                        max_iters,
                        solver,
                        build,
                    };
                    let warm = match &cuts_in {
                        Some(p) => Some(CutCheckpoint::read(p)?),
                        None => None,
                    };
                    let log_path = dir.join("iteration.jsonl");
                    let file = File::create(&log_path).map_err(|e| io_failure(&log_path, e))?;
                    let mut log = BufWriter::new(file);
                    let run = nbd::run_with(
                        &model,
                        &opts,
                        RunHooks {
                            log: Some(&mut log),
                            warm_start: warm.as_ref(),
                        },
                    )?;
                    log.flush().map_err(|e| io_failure(&log_path, e))?;
                    let cuts = cuts_out.unwrap_or_else(|| dir.join("cuts.json"));
                    run.checkpoint.write(&cuts)?;
                    if let Some(report) = &run.report {
                        write_report(report, &dir)?;
                    }
                    let ub = run.ub.map_or("none".to_string(), |v| v.to_string());
                    let _ = writeln!(
                        out,
                        "nbd {} after {} iterations: UB {ub} LB {} ({} cuts)",
                        nbd::status_name(run.status),
                        run.log.iter().filter(|l| l.nu > 0).count(),
                        run.lb,
                        run.checkpoint.pools.iter().map(Vec::len).sum::<usize>()
                    );
                    if let Some(report) = &run.report {
                        let _ = writeln!(out, "plan digest {}", report.digest());
                    }
                    Ok(if run.status == NbdStatus::Converged {
                        EXIT_OK
                    } else {
                        EXIT_NOT_CONVERGED
                    })
                }
            }
        }
        Command::Report { dir } => {
            let report = read_report(&dir)?;
            let _ = write!(out, "{}", report.render());
            Ok(EXIT_OK)
        }
        Command::Explain {
            what: Explain::Row { key },
        } => match explain_row(&key) {
            Some(e) => {
                let _ = writeln!(out, "{e}");
                Ok(EXIT_OK)
            }
            None => Err(Failure::new(EXIT_INVALID, format!("no row family for {key:?}"))),
        },
        Command::Compare { a, b } => {
            let diff = compare_runs(&a, &b)?;
            let _ = write!(out, "{}", diff.render());
            Ok(EXIT_OK)
        }
    }
}

fn cmd_validate(path: &Path, scenario: Option<Scenario>, out: &mut dyn Write) -> Result<i32, Failure> {
    match load_path(path, scenario) {
        Ok(loaded) => {
            let _ = writeln!(out, "digest {}", loaded.model.digest());
            if loaded.report.warnings.is_empty() {
                let _ = writeln!(out, "valid, no warnings");
            } else {
                let _ = writeln!(out, "valid with {} warning(s)", loaded.report.warnings.len());
                let _ = writeln!(out, "{}", loaded.report);
            }
            Ok(EXIT_OK)
        }
        Err(IngestError::Validation(report)) => {
            // Print the errors where the digest would be, then fail.
            let _ = writeln!(out, "{report}");
            Err(Failure::new(
                EXIT_INVALID,
                format!("{} validation error(s) in {}", report.errors.len(), path.display()),
            ))
        }
        Err(e) => Err(e.into()),
    }
}
