//! Command-line front end: `run` an experiment file, `verify` a named suite,
//! or list the supported descriptors.

pub mod config;
pub mod report;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{EstimatorKind, ExperimentConfig, OutputFormat};
pub use report::ReportRow;
pub use verify::{run_suite, Suite, SuiteReport};

use crate::error::{Error, Result};
use crate::estimators::{self, RunConfig, DEFAULT_TRUNCATION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_REGIME: i32 = 3;
pub const EXIT_STATISTICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "kinemetrica", version, about = "Monte Carlo checks of Cauchy-type mean-length formulas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a JSON config and write a report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config sample count.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, env = "KINEMETRICA_WORKERS")]
        workers: Option<usize>,
        /// Report path; overrides the config output path.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
    /// Run a named batch of estimator-versus-theory checks.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 4.0)]
        tol_sigma: f64,
        #[arg(long)]
        seed: u64,
        /// Accepted samples per estimate.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, env = "KINEMETRICA_WORKERS")]
        workers: Option<usize>,
    },
    /// List window shapes and their JSON fields.
    ListShapes,
    /// List curve processes and their JSON fields.
    ListProcesses,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Regime(_) => EXIT_REGIME,
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (program name first) and runs the command. Returns the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // --help and --version render to stdout and succeed.
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_CONFIG;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Run {
            config,
            seed,
            samples,
            workers,
            out: out_path,
            format,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = Some(s);
            }
            if let Some(n) = samples {
                cfg.n_samples = n;
            }
            if let Some(w) = workers {
                cfg.workers = Some(w);
            }
            if let Some(p) = out_path {
                cfg.output.path = Some(p);
            }
            if let Some(f) = format {
                cfg.output.format = f;
            }
            cfg.validate()?;
            let rows = run_experiment(&cfg)?;
            match &cfg.output.path {
                Some(p) => {
                    let file = std::fs::File::create(p)
                        .map_err(|e| Error::Io(format!("cannot create {}: {e}", p.display())))?;
                    report::write_rows(std::io::BufWriter::new(file), &rows, cfg.output.format)?;
                    writeln!(err, "wrote {} row(s) to {}", rows.len(), p.display())?;
                }
                None => report::write_rows(&mut *out, &rows, cfg.output.format)?,
            }
            Ok(EXIT_OK)
        }
        Command::Verify {
            suite,
            tol_sigma,
            seed,
            samples,
            workers,
        } => {
            let run = RunConfig {
                n_samples: samples,
                seed,
                workers: workers.unwrap_or(0),
            };
            let rep = run_suite(suite, &run)?;
            write!(out, "{}", rep.render(tol_sigma))?;
            Ok(if rep.passes(tol_sigma) { EXIT_OK } else { EXIT_STATISTICAL })
        }
        Command::ListShapes => {
            write!(out, "{}", list_shapes())?;
            Ok(EXIT_OK)
        }
        Command::ListProcesses => {
            write!(out, "{}", list_processes())?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs the configured estimator and returns one report row per estimate.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let body = cfg.body()?;
    let seed = cfg.seed.unwrap_or(0);
    let run = RunConfig {
        n_samples: cfg.n_samples,
        seed,
        workers: cfg.workers.unwrap_or(0),
    };
    let id = &cfg.experiment_id;
    let row = |suffix: &str, r: &estimators::EstimatorResult| {
        let name = if suffix.is_empty() { id.clone() } else { format!("{id}/{suffix}") };
        ReportRow::new(name, r, seed)
    };
    let process = || {
        cfg.process
            .as_ref()
            .ok_or_else(|| Error::Config("missing `process`".into()))
    };
    Ok(match cfg.estimator {
        EstimatorKind::MeanTraversedLength => {
            vec![row("", &estimators::estimate_mean_traversed_length(&body, process()?, &run)?)]
        }
        EstimatorKind::SmallLoop => {
            let e = estimators::estimate_small_loop_quantities(&body, process()?, &run)?;
            vec![
                row("mean_length", &e.mean_length),
                row("inclusion_p", &e.inclusion_p),
                row("mean_arc", &e.mean_arc),
                row("mean_chi", &e.mean_chi),
            ]
        }
        EstimatorKind::Inclusion => {
            let moving = cfg
                .moving_body
                .as_ref()
                .ok_or_else(|| Error::Config("missing `moving_body`".into()))?;
            let moving = crate::bodies::Body::from_spec(moving)?;
            vec![row("", &estimators::estimate_inclusion_probability_3d(&body, &moving, &run)?)]
        }
        EstimatorKind::InfiniteCurve => {
            let k = cfg.truncation_factor.unwrap_or(DEFAULT_TRUNCATION);
            vec![row("", &estimators::estimate_infinite_curve_mean_length(&body, process()?, k, &run)?)]
        }
        EstimatorKind::ChordMeans => {
            let m = estimators::estimate_chord_means(&body, &run)?;
            vec![row("ocd", &m.ocd), row("mcd", &m.mcd), row("ocd_over_mcd", &m.ratio)]
        }
        EstimatorKind::Invariance => {
            let procs = cfg
                .processes
                .as_ref()
                .ok_or_else(|| Error::Config("missing `processes`".into()))?;
            let rep = estimators::invariance_suite(&body, procs, &run)?;
            rep.results
                .iter()
                .enumerate()
                .map(|(i, r)| row(&format!("{i}-{}", procs[i].name()), r))
                .collect()
        }
    })
}

pub fn list_shapes() -> String {
    [
        ("ball", r#"{"shape":"ball","radius":1.0,"dimension":2}"#, "n-ball; dimension defaults to 2"),
        ("box", r#"{"shape":"box","edges":[2.0,3.0]}"#, "axis-aligned box centred at the origin, any dimension"),
        ("annulus", r#"{"shape":"annulus","r_in":0.5,"r_out":1.0}"#, "planar ring"),
        ("spherical_shell", r#"{"shape":"spherical_shell","r_in":0.5,"r_out":1.0}"#, "3-D hollow ball"),
        ("polygon", r#"{"shape":"polygon","vertices":[[0,0],[2,0],[2,1],[0,1]]}"#, "simple planar polygon"),
    ]
    .iter()
    .map(|(name, json, note)| format!("{name:<16} {note}\n                 {json}\n"))
    .collect()
}

pub fn list_processes() -> String {
    [
        ("segment", r#"{"curve":"segment","length":2.0}"#, "straight segment"),
        (
            "pearson",
            r#"{"curve":"pearson","step":{"law":"exponential","mean":0.2},"length":50.0}"#,
            "isotropic walk; step laws constant{length}, exponential{mean}, gamma{shape,scale}, pareto{x_min,alpha}",
        ),
        ("circle_loop", r#"{"curve":"circle_loop","radius":0.25}"#, "closed circle"),
        (
            "tree",
            r#"{"curve":"tree","branches":5,"edge":{"law":"exponential","mean":1.0}}"#,
            "ramified tree grown by branching off uniform points",
        ),
        ("line", r#"{"curve":"line"}"#, "isotropic uniform random line"),
    ]
    .iter()
    .map(|(name, json, note)| format!("{name:<16} {note}\n                 {json}\n"))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listings_cover_required_entries() {
        let shapes = list_shapes();
        for s in ["ball", "box", "annulus"] {
            assert!(shapes.contains(s));
        }
        let procs = list_processes();
        for p in ["segment", "pearson", "circle_loop"] {
            assert!(procs.contains(p));
        }
    }

    #[test]
    fn listed_examples_parse() {
        for line in list_shapes().lines().chain(list_processes().lines()) {
            let t = line.trim();
            if t.starts_with('{') {
                let v: serde_json::Value = serde_json::from_str(t).unwrap();
                if v.get("shape").is_some() {
                    serde_json::from_value::<crate::bodies::BodySpec>(v).unwrap();
                } else {
                    serde_json::from_value::<crate::curves::ProcessSpec>(v).unwrap();
                }
            }
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Regime("x".into())), EXIT_REGIME);
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(main_with_args(["kinemetrica", "bogus"], &mut out, &mut err), EXIT_CONFIG);
        assert_eq!(main_with_args(["kinemetrica", "list-shapes"], &mut out, &mut err), EXIT_OK);
    }
}
