use clap::{Parser, Subcommand};
use geojump_cli::runner::{cli_run, read_config, run_constants, RunArgs};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "geojump",
    about = "Simulate jump martingales on embedded manifolds and check the calculus identities, norm inequalities and convergence behavior behind them",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Config file (flat key-value text with sections); defaults are built in.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV tables and the run manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Base seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Enforce the small-range threshold R < 1/(2 d e² a₂) as a
    /// configuration error.
    #[arg(long, default_value_t = false)]
    strict_threshold: bool,
    /// Grid size override (number of time steps).
    #[arg(long)]
    grid_steps: Option<usize>,
    /// Horizon override.
    #[arg(long)]
    horizon: Option<f64>,
    /// Stability index override for the α-stable driver.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample driver or martingale ensembles to path CSVs.
    Simulate(CommonArgs),
    /// Run both Itô-integral routes for a named integrand on one path.
    Integrate(CommonArgs),
    /// Estimate the metric triple (r, r̂ lower bound, H^p upper bound).
    Metrics(CommonArgs),
    /// Stopped-quadratic-variation boundedness family.
    VerifyLemma31(CommonArgs),
    /// Pair-difference quadratic variation vs sup-distance moments.
    VerifyLemma32(CommonArgs),
    /// H^p upper bound vs sup-distance moment over the coupling ladder.
    VerifyTheorem1(CommonArgs),
    /// Convergence pipeline with negative controls.
    VerifyCorollary(CommonArgs),
    /// Localization stopping-time chains over ball covers.
    Localize(CommonArgs),
    /// Print the Dirichlet-form constant c_{m,alpha}.
    Constants {
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
}

fn dispatch(sub: &str, common: CommonArgs) -> i32 {
    let config_text = match read_config(common.config.as_deref()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{e}");
            return geojump_cli::runner::EXIT_CONFIG;
        }
    };
    let threads = if common.threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        common.threads
    };
    cli_run(&RunArgs {
        subcommand: sub.to_string(),
        config_text,
        out_dir: common.out,
        seed: common.seed,
        threads,
        strict_threshold: common.strict_threshold,
        grid_steps: common.grid_steps,
        horizon: common.horizon,
        alpha: common.alpha,
    })
}

fn main() {
    // Usage problems (unknown subcommands, bad flags) are configuration
    // errors: exit 1, not clap's default 2, which is reserved for check
    // failures.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            e.print().ok();
            std::process::exit(code);
        }
    };
    let code = match cli.command {
        Command::Simulate(c) => dispatch("simulate", c),
        Command::Integrate(c) => dispatch("integrate", c),
        Command::Metrics(c) => dispatch("metrics", c),
        Command::VerifyLemma31(c) => dispatch("verify-lemma31", c),
        Command::VerifyLemma32(c) => dispatch("verify-lemma32", c),
        Command::VerifyTheorem1(c) => dispatch("verify-theorem1", c),
        Command::VerifyCorollary(c) => dispatch("verify-corollary", c),
        Command::Localize(c) => dispatch("localize", c),
        Command::Constants { m, alpha } => run_constants(m, alpha),
    };
    std::process::exit(code);
}
