//! Command-line front end. `main` only forwards to [`run`].
//!
//! Exit codes: 0 success, 1 validation failure, 2 infeasible, 3 I/O or parse
//! error (including a bad command line).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::coupling::{
    derive_min_resource_samples, fit_linear, regression_metrics, CouplingKey, PerfUnit,
};
use crate::error::Error;
use crate::harness::{
    detection_score, emit_report, load_detection_log, load_frame_weights, load_grid,
    load_scenario, run_sweep, Cell, Format, Report, Table, DEFAULT_IOU_THRESHOLD,
};
use crate::lp::{self, LpStatus};
use crate::orchestrator::{build_allocation_lp, solve_joint, AllocationPlan};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "coupled-alloc", version, about = "Joint placement and network/compute allocation")]
struct Cli {
    /// Print intermediate LPs to stderr.
    #[arg(long, global = true)]
    verbose: bool,
    /// Reserved; every computation is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum UnitArg {
    Percent,
    Score,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a scenario file and report every problem found.
    Validate {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Fit a linear coupling model from a performance-grid CSV.
    Fit {
        grid: PathBuf,
        /// Coupling key `src_fn,src_res,dst_fn,dst_res`.
        #[arg(long)]
        key: String,
        #[arg(long, value_enum, default_value = "percent")]
        unit: UnitArg,
        /// Comma-separated performance targets; deciles of the grid by default.
        #[arg(long, value_delimiter = ',')]
        p_targets: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Solve the joint placement and allocation problem.
    Solve {
        scenario: PathBuf,
        /// Override the scenario's objective weight.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Run the scenario's resource sweep against its static baseline.
    Sweep {
        scenario: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Score a detection log.
    Score {
        log: PathBuf,
        /// Optional `frame_id,weight` CSV.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
        iou_threshold: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Solve a linear program written in the text LP format.
    Lp {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoFeasiblePlacement | Error::AllPlacementsInfeasible => EXIT_INFEASIBLE,
        Error::Io { .. } | Error::Parse { .. } | Error::MalformedLp(_) => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn print(out: &mut dyn Write, table: &Table, format: Format) -> crate::Result<()> {
    out.write_all(table.render(format).as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> crate::Result<i32> {
    match &cli.command {
        Command::Validate { scenario, format } => {
            let format = Format::from(*format);
            match load_scenario(scenario) {
                Ok(s) => {
                    if matches!(format, Format::Csv) {
                        writeln!(out, "OK").map_err(|e| Error::io("<stdout>", e))?;
                    } else {
                        let mut t =
                            Table::new(&["scenario", "functions", "nodes", "couplings", "status"]);
                        t.push(vec![
                            s.name.into(),
                            (s.application.functions.len() as f64).into(),
                            (s.infrastructure.nodes.len() as f64).into(),
                            (s.couplings.couplings.len() as f64).into(),
                            "OK".into(),
                        ]);
                        print(out, &t, format)?;
                    }
                    Ok(EXIT_OK)
                }
                Err(Error::Validation(v)) => {
                    let mut t = Table::new(&["subject", "message"]);
                    for x in v {
                        t.push(vec![x.subject.into(), x.message.into()]);
                    }
                    print(out, &t, format)?;
                    Ok(EXIT_INVALID)
                }
                Err(e) => Err(e),
            }
        }
        Command::Fit {
            grid,
            key,
            unit,
            p_targets,
            format,
        } => {
            let key: CouplingKey = key.parse()?;
            let unit = match unit {
                UnitArg::Percent => PerfUnit::Percent,
                UnitArg::Score => PerfUnit::Score,
            };
            let grid = load_grid(grid, unit)?;
            let targets = p_targets.clone().unwrap_or_else(|| grid.default_p_targets());
            let samples = derive_min_resource_samples(&grid, &targets)?;
            let model = fit_linear(&samples)?;
            let m = regression_metrics(&model, &samples)?;
            let mut t = Table::new(&[
                "key", "alpha", "beta", "gamma", "samples", "mae", "mse", "rmse",
            ]);
            t.push(vec![
                key.to_string().into(),
                model.alpha.into(),
                model.beta.into(),
                model.gamma.into(),
                (samples.len() as f64).into(),
                m.mae.into(),
                m.mse.into(),
                m.rmse.into(),
            ]);
            print(out, &t, (*format).into())?;
            Ok(EXIT_OK)
        }
        Command::Solve {
            scenario,
            eta,
            format,
        } => {
            let s = load_scenario(scenario)?;
            let mut cfg = s.solver.clone();
            if let Some(eta) = eta {
                cfg.eta = *eta;
                crate::validate::into_result(cfg.validate())?;
            }
            let plan = solve_joint(&s.application, &s.infrastructure, &s.couplings, &cfg)?;
            if cli.verbose {
                let lp = build_allocation_lp(
                    &s.application,
                    &s.infrastructure,
                    &plan.placement,
                    &s.couplings,
                    &cfg,
                )?;
                let _ = err.write_all(lp::dump(&lp).as_bytes());
            }
            print(out, &plan.to_table(), (*format).into())?;
            Ok(EXIT_OK)
        }
        Command::Sweep {
            scenario,
            out: path,
            format,
        } => {
            let s = load_scenario(scenario)?;
            let result = run_sweep(&s)?;
            match path {
                Some(p) => emit_report(&result, p, (*format).into())?,
                None => print(out, &result.to_table(), (*format).into())?,
            }
            Ok(EXIT_OK)
        }
        Command::Score {
            log,
            weights,
            iou_threshold,
            format,
        } => {
            let mut dl = load_detection_log(log)?;
            if let Some(w) = weights {
                dl.weights = Some(load_frame_weights(w)?);
            }
            let score = detection_score(&dl, *iou_threshold)?;
            let scored = dl.frames.iter().filter(|f| !f.ground_truth.is_empty()).count();
            let mut t = Table::new(&["frames", "scored_frames", "iou_threshold", "score"]);
            t.push(vec![
                (dl.frames.len() as f64).into(),
                (scored as f64).into(),
                (*iou_threshold).into(),
                score.into(),
            ]);
            print(out, &t, (*format).into())?;
            Ok(EXIT_OK)
        }
        Command::Lp { file, format } => {
            let text = std::fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
            let program = lp::parse(&text).map_err(|e| reparse(file, e))?;
            if cli.verbose {
                let _ = err.write_all(lp::dump(&program).as_bytes());
            }
            let sol = lp::solve(&program)?;
            let mut t = Table::new(&["field", "value"]);
            let status = match sol.status {
                LpStatus::Optimal => "optimal",
                LpStatus::Infeasible => "infeasible",
                LpStatus::Unbounded => "unbounded",
            };
            t.push(vec!["status".into(), status.into()]);
            if let (Some(v), Some(x)) = (sol.objective_value, &sol.point) {
                t.push(vec!["objective".into(), v.into()]);
                for (i, xi) in x.iter().enumerate() {
                    t.push(vec![format!("x{i}").into(), (*xi).into()]);
                }
            }
            print(out, &t, (*format).into())?;
            Ok(if sol.is_optimal() { EXIT_OK } else { EXIT_INFEASIBLE })
        }
    }
}

fn reparse(path: &Path, e: Error) -> Error {
    match e {
        Error::MalformedLp(m) => Error::parse(path, m),
        other => other,
    }
}

impl Report for AllocationPlan {
    fn to_table(&self) -> Table {
        let mut t = Table::new(&["field", "function", "node", "resource", "value"]);
        for ((f, r), v) in &self.allocations {
            let node = self.placement.node_of(f).unwrap_or_default();
            t.push(vec![
                "allocation".into(),
                f.as_str().into(),
                node.into(),
                r.to_string().into(),
                (*v).into(),
            ]);
        }
        for (name, v) in [
            ("performance", self.performance),
            ("objective", self.objective_value),
            ("delay_ms", self.delay_ms),
            ("throughput", self.throughput),
        ] {
            t.push(vec![name.into(), Cell::Empty, Cell::Empty, Cell::Empty, v.into()]);
        }
        t
    }
}
