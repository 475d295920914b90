use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gearsim::{default_output, run, Error, ExperimentConfig, Result};

#[derive(Parser)]
#[command(name = "gearsim", version, about = "Photonic gear metrology experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-photon fringe sweep and sinusoid fit.
    Fringe(RunArgs),
    /// Bayesian estimation at a fixed angle.
    Estimate(RunArgs),
    /// Three-step adaptive protocol.
    Adaptive(RunArgs),
    /// Cramér-Rao bounds across gear ratios, or the enhancement curve.
    Bounds(RunArgs),
    /// Entangled-pair coincidence sweep.
    Entangled(RunArgs),
    /// Coherent-pulse intensity fringes.
    Coherent(RunArgs),
    /// Writes one raw dataset file.
    Sample(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long, env = "GEARSIM_SEED")]
    seed: Option<u64>,
    /// Primary output file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

impl Command {
    fn split(&self) -> (&'static [&'static str], &RunArgs) {
        match self {
            Command::Fringe(a) => (&["fringe"], a),
            Command::Estimate(a) => (&["estimate"], a),
            Command::Adaptive(a) => (&["adaptive"], a),
            Command::Bounds(a) => (&["bounds", "enhancement-curve"], a),
            Command::Entangled(a) => (&["entangled"], a),
            Command::Coherent(a) => (&["coherent"], a),
            Command::Sample(a) => (&["sample"], a),
        }
    }
}

/// `--out`, else `$GEARSIM_OUT_DIR/<file name>`, else the config path, else `<kind>.csv`.
fn output_path(args: &RunArgs, config: &ExperimentConfig) -> PathBuf {
    if let Some(p) = &args.out {
        return p.clone();
    }
    let configured = config
        .output
        .clone()
        .unwrap_or_else(|| default_output(config.experiment.kind()));
    match std::env::var_os("GEARSIM_OUT_DIR") {
        Some(dir) => Path::new(&dir).join(configured.file_name().unwrap_or(configured.as_os_str())),
        None => configured,
    }
}

fn execute(command: &Command) -> Result<()> {
    let (kinds, args) = command.split();
    let mut config = ExperimentConfig::load(&args.config)?;
    let kind = config.experiment.kind();
    if !kinds.contains(&kind) {
        return Err(Error::Usage(format!(
            "{} describes a `{kind}` experiment, not `{}`",
            args.config.display(),
            kinds[0]
        )));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out = output_path(args, &config);
    let summary = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Usage(format!("--threads {n}: {e}")))?
            .install(|| run(&config, &out))?,
        None => run(&config, &out)?,
    };
    print!("{}", summary.report);
    for f in &summary.files {
        println!("wrote: {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", Error::Usage(first.to_string()).to_json_line());
            return ExitCode::from(2);
        }
    };
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::FAILURE
        }
    }
}
