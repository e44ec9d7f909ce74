use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use amprb::added_damping::ShapeSpec;
use amprb::amp_stepper::run;
use amprb::cli_io::report::quantities;
use amprb::cli_io::{compare, converge, parse_config, tensor_report, write_run, RunConfig};
use amprb::fluid_solver::SchemeMode;
use amprb::Error;

#[derive(Parser)]
#[command(name = "amprb", version, about = "Added-mass/added-damping fluid-rigid-body simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
    /// Directory for output files.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file.
    config: Option<PathBuf>,
    #[arg(long = "config", conflicts_with = "config")]
    config_flag: Option<PathBuf>,
    /// Override the coupling scheme.
    #[arg(long, value_parser = ["amp", "tp"])]
    mode: Option<String>,
    /// Override the added-damping scale.
    #[arg(long)]
    beta_d: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its history.
    Run(ConfigArgs),
    /// Print added-damping tensors for a shape such as `rectangle:w=1,h=0.5`.
    Tensors {
        shape: String,
        /// Surface quadrature points.
        #[arg(long, default_value_t = 4000)]
        samples: usize,
    },
    /// Run a grid-refinement series and report convergence rates.
    Converge {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
        levels: Vec<usize>,
    },
    /// Run AMP and TP at identical parameters and report stability.
    Compare(ConfigArgs),
}

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_UNSTABLE: u8 = 4;

fn load(args: &ConfigArgs) -> Result<RunConfig, Error> {
    let Some(path) = args.config.as_ref().or(args.config_flag.as_ref()) else {
        return Err(Error::Parameter("no configuration file given".into()));
    };
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    if let Some(m) = &args.mode {
        cfg.sim.scheme.mode = SchemeMode::parse(m)?;
    }
    if let Some(b) = args.beta_d {
        cfg.sim.scheme.beta_d = b;
    }
    cfg.sim.validate()?;
    Ok(cfg)
}

fn fail(e: &Error, code: u8) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(code)
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let say = |s: &str| {
        if !cli.quiet {
            print!("{s}");
        }
    };
    match &cli.command {
        Command::Run(args) => {
            let cfg = match load(args) {
                Ok(c) => c,
                Err(e) => return fail(&e, EXIT_CONFIG),
            };
            let summary = match run(&cfg.sim) {
                Ok(s) => s,
                Err(e) => return fail(&e, EXIT_SOLVER),
            };
            if let Err(e) = write_run(&cli.out_dir, &cfg.output, &summary) {
                return fail(&e, EXIT_SOLVER);
            }
            let e = &summary.final_errors;
            say(&format!(
                "{} steps to t = {:.6}; final errors: v {:.3e}, p {:.3e}, body {:?}\n",
                summary.steps, summary.final_time, e.velocity, e.pressure, e.body
            ));
            match summary.unstable_at {
                None => ExitCode::SUCCESS,
                Some(t) => {
                    eprintln!("instability detected at t = {t}");
                    ExitCode::from(EXIT_UNSTABLE)
                }
            }
        }
        Command::Tensors { shape, samples } => {
            let report = ShapeSpec::parse(shape).and_then(|s| tensor_report(&s, *samples));
            match report {
                Ok(r) => {
                    say(&r);
                    if let Err(e) = write_text(&cli.out_dir, "tensors.txt", &r) {
                        return fail(&e, EXIT_SOLVER);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e, EXIT_CONFIG),
            }
        }
        Command::Converge { cfg: args, levels } => {
            let cfg = match load(args) {
                Ok(c) => c,
                Err(e) => return fail(&e, EXIT_CONFIG),
            };
            let study = match converge(&cfg.sim, levels) {
                Ok(s) => s,
                Err(e @ Error::Parameter(_)) => return fail(&e, EXIT_CONFIG),
                Err(e) => return fail(&e, EXIT_SOLVER),
            };
            let text = study.render(quantities(&cfg.sim.problem));
            say(&text);
            if let Err(e) = write_text(&cli.out_dir, "convergence.txt", &text) {
                return fail(&e, EXIT_SOLVER);
            }
            if study.levels.iter().all(|l| l.summary.stable()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_UNSTABLE)
            }
        }
        Command::Compare(args) => {
            let cfg = match load(args) {
                Ok(c) => c,
                Err(e) => return fail(&e, EXIT_CONFIG),
            };
            match compare(&cfg.sim) {
                Ok(c) => {
                    say(&c.render());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e, EXIT_SOLVER),
            }
        }
    }
}
