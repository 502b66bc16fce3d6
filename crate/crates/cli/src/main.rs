//! `fpsi`: single runs, convergence studies, the energy test and projection
//! orders for the Stokes-Biot splitting scheme.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{builder::BoolishValueParser, Parser, ValueEnum};
use fpsi_core::study::{
    energy_csv, energy_study, energy_text, projection_study, single_run, spatial_study, temporal_study,
    ConvergenceTable, PROJECTION_T, SPATIAL_DT, SPATIAL_T, TEMPORAL_CELLS_PER_N, TEMPORAL_DT_SCALE,
};
use fpsi_core::{Error, InitMode, PhysicalParams, StudyOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Single,
    Temporal,
    Spatial,
    Energy,
    Projections,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Init {
    Interp,
    Ritz,
}

#[derive(Debug, Parser)]
#[command(name = "fpsi", version, about = "Stokes-Biot splitting scheme: runs and convergence studies")]
struct Args {
    #[arg(long, value_enum, default_value = "single")]
    mode: Mode,

    /// Refinement indices, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    n: Vec<usize>,

    /// Time step(s), comma separated. Energy mode accepts several.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    dt: Vec<f64>,

    /// Final time; the evaluation time in projections mode.
    #[arg(long = "T")]
    t_final: Option<f64>,

    /// Steps per run in energy mode.
    #[arg(long, default_value_t = 20)]
    steps: usize,

    #[arg(long, default_value_t = 1.0)]
    gamma: f64,

    #[arg(long = "L", default_value_t = 1.0)]
    l: f64,

    /// Solve the fluid and poroelastic subproblems concurrently.
    #[arg(long, default_value = "true", value_parser = BoolishValueParser::new(), action = clap::ArgAction::Set)]
    parallel: bool,

    /// Write CSV here; the aligned table always goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed of the random initial state in energy mode.
    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[arg(long, value_enum, default_value = "interp")]
    init: Init,

    /// Cells per unit length per unit of n in temporal mode.
    #[arg(long, default_value_t = TEMPORAL_CELLS_PER_N)]
    cells_per_n: usize,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(m) => Failure::Usage(m),
            e => Failure::Run(e),
        }
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn one_dt(args: &Args, default: f64) -> Result<f64, Failure> {
    match args.dt.as_slice() {
        [] => Ok(default),
        [dt] => Ok(*dt),
        _ => usage("this mode takes a single --dt"),
    }
}

fn list_or(v: &[usize], default: &[usize]) -> Vec<usize> {
    if v.is_empty() {
        default.to_vec()
    } else {
        v.to_vec()
    }
}

fn table_output(t: &ConvergenceTable) -> (String, String) {
    (t.to_text(), t.to_csv())
}

fn execute(args: &Args) -> Result<(String, String), Failure> {
    let params = PhysicalParams::default().with_penalties(args.gamma, args.l);
    params.validate()?;
    let opts = StudyOptions {
        params,
        parallel: args.parallel,
        init: match args.init {
            Init::Interp => InitMode::Interp,
            Init::Ritz => InitMode::Ritz,
        },
    };
    match args.mode {
        Mode::Single => {
            let ns = list_or(&args.n, &[8]);
            let [n] = ns[..] else {
                return usage("single mode takes one --n");
            };
            let dt = one_dt(args, TEMPORAL_DT_SCALE / n as f64)?;
            let row = single_run(n, n, dt, args.t_final.unwrap_or(1.0), &opts)?;
            Ok(table_output(&ConvergenceTable::new(vec![row])?))
        }
        Mode::Temporal => {
            if !args.dt.is_empty() {
                return usage("temporal mode sets dt = 0.05 / n; --dt is not accepted");
            }
            let ns = list_or(&args.n, &[8, 16, 32, 64]);
            let t = temporal_study(&ns, args.t_final.unwrap_or(1.0), args.cells_per_n, &opts)?;
            Ok(table_output(&t))
        }
        Mode::Spatial => {
            let ns = list_or(&args.n, &[8, 16, 32, 64]);
            let dt = one_dt(args, SPATIAL_DT)?;
            let t = spatial_study(&ns, dt, args.t_final.unwrap_or(SPATIAL_T), &opts)?;
            Ok(table_output(&t))
        }
        Mode::Energy => {
            let ns = list_or(&args.n, &[8]);
            let [n] = ns[..] else {
                return usage("energy mode takes one --n");
            };
            let dts = if args.dt.is_empty() { vec![1e-3, 1e-2, 1e-1, 1.0] } else { args.dt.clone() };
            let runs = energy_study(n, &dts, args.steps, args.seed, &opts)?;
            Ok((energy_text(&runs), energy_csv(&runs)))
        }
        Mode::Projections => {
            let ns = list_or(&args.n, &[4, 8, 16, 32]);
            let p = projection_study(&ns, args.t_final.unwrap_or(PROJECTION_T), &params)?;
            Ok((p.to_text(), p.to_csv()))
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = execute(&args).and_then(|(text, csv)| {
        print!("{text}");
        if let Some(path) = &args.out {
            std::fs::write(path, csv).map_err(|e| Failure::Run(e.into()))?;
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
