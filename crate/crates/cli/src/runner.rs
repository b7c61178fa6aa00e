//! Subcommand dispatch: parse and validate the config, run the experiment
//! on a sized worker pool, write artifacts, map outcomes to exit codes
//! (0 pass, 1 configuration error, 2 check failure).

use crate::config::{ConfigError, ExperimentConfig, RawConfig};
use crate::defaults::default_config;
use crate::experiments;
use crate::report::RunWriter;
use std::path::Path;

pub struct RunArgs {
    pub subcommand: String,
    /// Raw config text (already read from --config, or the default).
    pub config_text: Option<String>,
    pub out_dir: std::path::PathBuf,
    pub seed: Option<u64>,
    pub threads: usize,
    pub strict_threshold: bool,
    /// Config overrides from dedicated flags.
    pub grid_steps: Option<usize>,
    pub horizon: Option<f64>,
    pub alpha: Option<f64>,
}

impl RunArgs {
    pub fn new(subcommand: &str, out_dir: std::path::PathBuf) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            config_text: None,
            out_dir,
            seed: None,
            threads: 1,
            strict_threshold: false,
            grid_steps: None,
            horizon: None,
            alpha: None,
        }
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CHECK_FAILURE: i32 = 2;

const SUBCOMMANDS: [&str; 8] = [
    "simulate",
    "integrate",
    "metrics",
    "verify-lemma31",
    "verify-lemma32",
    "verify-theorem1",
    "verify-corollary",
    "localize",
];

/// Print c_{m,α} and exit. Not config-driven.
pub fn run_constants(m: u32, alpha: f64) -> i32 {
    match geojump::paths::c_constant(m, alpha) {
        Ok(v) => {
            println!("{v:.15}");
            EXIT_PASS
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

pub fn cli_run(args: &RunArgs) -> i32 {
    if !SUBCOMMANDS.contains(&args.subcommand.as_str()) {
        eprintln!("error: unknown subcommand '{}'", args.subcommand);
        return EXIT_CONFIG;
    }
    let text = args
        .config_text
        .clone()
        .unwrap_or_else(|| default_config(&args.subcommand).to_string());

    // Configuration problems exit 1 before any artifact is written.
    let (raw, config) = match parse_and_validate(&text, args) {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(args.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot build worker pool: {e}");
            return EXIT_CONFIG;
        }
    };

    let mut writer = match RunWriter::new(
        &args.out_dir,
        &args.subcommand,
        &text,
        config.base_seed,
        args.threads,
        config.manifold.blend_radius(),
    ) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: cannot open output directory: {e}");
            return EXIT_CONFIG;
        }
    };

    let outcome: Result<(), ConfigError> = pool.install(|| match args.subcommand.as_str() {
        "simulate" => experiments::drivers::simulate(&raw, &config, args.alpha, &mut writer),
        "integrate" => experiments::drivers::integrate(&raw, &config, &mut writer),
        "metrics" => experiments::drivers::metrics(&config, &mut writer),
        "verify-lemma31" => experiments::lemma31::run(&config, &mut writer),
        "verify-lemma32" => experiments::lemma32::run(&config, &mut writer),
        "verify-theorem1" => experiments::theorem1::run(&config, &mut writer),
        "verify-corollary" => experiments::corollary::run(&config, &mut writer),
        "localize" => experiments::localize::run(&config, &mut writer),
        _ => unreachable!(),
    });

    if let Err(e) = outcome {
        eprintln!("{e}");
        return EXIT_CONFIG;
    }
    for check in writer.checks() {
        println!(
            "[{}] {}: {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    match writer.finish() {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_CHECK_FAILURE,
        Err(e) => {
            eprintln!("error: cannot write manifest: {e}");
            EXIT_CONFIG
        }
    }
}

fn parse_and_validate(
    text: &str,
    args: &RunArgs,
) -> Result<(RawConfig, ExperimentConfig), ConfigError> {
    let raw = RawConfig::parse(text)?;
    let mut config = ExperimentConfig::from_raw(&raw)?;
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    if args.strict_threshold {
        config.strict_threshold = true;
    }
    if let Some(steps) = args.grid_steps {
        if steps == 0 {
            return Err(ConfigError("grid steps must be positive".into()));
        }
        config.grid_steps = steps;
    }
    if let Some(horizon) = args.horizon {
        if !(horizon > 0.0) {
            return Err(ConfigError("horizon must be positive".into()));
        }
        config.martingale.horizon = horizon;
        config.martingale.validate()?;
    }
    if let Some(alpha) = args.alpha {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(ConfigError(format!("alpha must lie in (0, 2), got {alpha}")));
        }
    }
    // Seed-collision guard for the ensemble sizes in play.
    let seeds = geojump::seeding::derive_path_seeds(config.base_seed, config.paths);
    let unique: std::collections::HashSet<u64> = seeds.iter().copied().collect();
    if unique.len() != seeds.len() {
        return Err(ConfigError("per-path seed collision".into()));
    }
    Ok((raw, config))
}

/// Read a config file if a path was given.
pub fn read_config(path: Option<&Path>) -> Result<Option<String>, ConfigError> {
    match path {
        None => Ok(None),
        Some(p) => std::fs::read_to_string(p)
            .map(Some)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", p.display()))),
    }
}
