//! Command-line front end. Every command is a thin wrapper over `chlab`.
//!
//! Exit codes: 0 success with every verdict passing, 1 a verdict failed,
//! 2 usage, configuration or runtime error.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use chlab::constructions::make_set;
use chlab::evolution::{solve, Equation, SolverConfig};
use chlab::experiments::{
    emit_plotdata, run_all, Experiment, ExperimentConfig, ExperimentResult, Lab, Verdict,
};
use chlab::io::{load_trajectory, save_field, save_trajectory, write_trajectory_csv};
use chlab::littlewood_paley::{besov_norm, BesovParams};
use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const EXPERIMENT_NAMES: [&str; 8] = [
    "scaling",
    "lower-bounds",
    "prop1",
    "prop2",
    "main",
    "products",
    "transport",
    "dp",
];

#[derive(Parser, Debug)]
#[command(
    name = "chlab",
    version,
    about = "Besov-norm experiments for Camassa-Holm flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the Besov norm of every record in a snapshot file
    Besov {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write f_n, g_n, u0 and v0 snapshots for one n
    Construct {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Integrate a field snapshot and write the trajectory
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "ch", value_parser = ["ch", "dp"])]
        equation: String,
        /// Number of equal record intervals on [0, T]
        #[arg(long, default_value_t = 10)]
        records: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Run one experiment
    Experiment {
        #[arg(value_parser = EXPERIMENT_NAMES)]
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run every experiment
    All {
        #[command(flatten)]
        common: Common,
    },
}

/// Overrides applied on top of the defaults and the config file.
#[derive(Args, Debug, Default)]
struct Common {
    #[arg(long = "L")]
    half_length: Option<String>,
    #[arg(long = "N")]
    points: Option<String>,
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long = "n-min")]
    n_min: Option<String>,
    #[arg(long = "n-max")]
    n_max: Option<String>,
    #[arg(long = "T")]
    final_time: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// `key = value` config file with [section] headers
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> chlab::Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| {
                chlab::LabError::Config(format!("cannot read {}: {e}", path.display()))
            })?;
            cfg.apply_text(&text)?;
        }
        let overrides = [
            ("grid", "L", &self.half_length),
            ("grid", "N", &self.points),
            ("params", "s", &self.s),
            ("params", "p", &self.p),
            ("params", "r", &self.r),
            ("run", "n_min", &self.n_min),
            ("run", "n_max", &self.n_max),
            ("run", "seed", &self.seed),
            ("solver", "T", &self.final_time),
            ("solver", "dt", &self.dt),
        ];
        for (section, key, value) in overrides {
            if let Some(v) = value {
                cfg.set(section, key, v)?;
            }
        }
        Ok(cfg)
    }
}

fn checked_params(cfg: &ExperimentConfig) -> chlab::Result<BesovParams> {
    BesovParams::new(cfg.params.s, cfg.params.p, cfg.params.r)
}

fn report(result: &ExperimentResult) {
    println!("{} [{}]", result.experiment, result.config_digest);
    for (name, verdict) in &result.verdicts {
        println!("  {:<32} {}", name, verdict.as_str());
    }
    for (name, value) in &result.constants {
        println!("  {:<32} {:e}", name, value);
    }
}

fn write_outputs(result: &ExperimentResult, out: &Path) -> chlab::Result<()> {
    let (csv, json) = result.persist(out)?;
    let plots = emit_plotdata(result, &out.join("plots"))?;
    eprintln!(
        "wrote {}, {} and {} plot file(s)",
        csv.display(),
        json.display(),
        plots.len()
    );
    Ok(())
}

fn verdict_code(results: &[ExperimentResult]) -> i32 {
    let failed = results
        .iter()
        .flat_map(|r| r.verdicts.values())
        .any(|v| *v == Verdict::Fail);
    if failed {
        EXIT_FAILED_VERDICT
    } else {
        EXIT_OK
    }
}

fn execute(command: Command) -> chlab::Result<i32> {
    match command {
        Command::Besov { input, common } => {
            let cfg = common.resolve()?;
            let params = checked_params(&cfg)?;
            let traj = load_trajectory(&input)?;
            if traj.states.len() == 1 {
                println!("{}", besov_norm(&traj.states[0], params)?);
            } else {
                for (t, u) in traj.times.iter().zip(&traj.states) {
                    println!("{t} {}", besov_norm(u, params)?);
                }
            }
            Ok(EXIT_OK)
        }
        Command::Construct { n, common } => {
            let cfg = common.resolve()?;
            let set = make_set(n, checked_params(&cfg)?, cfg.grid()?)?;
            std::fs::create_dir_all(&common.out)?;
            for (name, field) in [
                ("f", &set.f),
                ("g", &set.g),
                ("u0", &set.u0),
                ("v0", &set.v0),
            ] {
                let path = common.out.join(format!("{name}_n{n}.bin"));
                save_field(&path, field)?;
                eprintln!("wrote {}", path.display());
            }
            Ok(EXIT_OK)
        }
        Command::Solve {
            input,
            equation,
            records,
            common,
        } => {
            let cfg = common.resolve()?;
            let u0 = chlab::io::load_field(&input)?;
            let equation = if equation == "dp" {
                Equation::Dp
            } else {
                Equation::Ch
            };
            let records = records.max(1);
            let times = (0..=records)
                .map(|i| cfg.final_time * i as f64 / records as f64)
                .collect();
            let mut sc = SolverConfig::new(cfg.final_time, Some(cfg.dt), times);
            sc.cfl = cfg.cfl;
            sc.blowup_factor = cfg.blowup_factor;
            let traj = solve(&u0, &sc, equation)?;
            std::fs::create_dir_all(&common.out)?;
            let bin = common.out.join("trajectory.bin");
            let csv = common.out.join("trajectory.csv");
            save_trajectory(&bin, &traj)?;
            write_trajectory_csv(BufWriter::new(File::create(&csv)?), &traj)?;
            eprintln!("wrote {} and {}", bin.display(), csv.display());
            Ok(EXIT_OK)
        }
        Command::Experiment { name, common } => {
            let cfg = common.resolve()?;
            let experiment: Experiment = name.parse()?;
            let result = experiment.run(&Lab::new(&cfg)?)?;
            report(&result);
            write_outputs(&result, &common.out)?;
            Ok(verdict_code(std::slice::from_ref(&result)))
        }
        Command::All { common } => {
            let cfg = common.resolve()?;
            let results = run_all(&cfg)?;
            for result in &results {
                report(result);
                write_outputs(result, &common.out)?;
            }
            Ok(verdict_code(&results))
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
