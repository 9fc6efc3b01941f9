use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use gamowlab::catalog::{builtin_scenarios, find};
use gamowlab::error::{EXIT_CHECK_FAILURE, EXIT_OK, EXIT_USAGE};
use gamowlab::runner::output_root;
use gamowlab::{parse_config, run_scenario, CliError, RunManifest, RunOverrides, ScenarioConfig};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "gamowlab", version, about = "Gamow-vector experiments: scenario runner and data emitter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run built-in scenarios (`all` for the whole catalog) or config files.
    Run {
        #[arg(required = true)]
        targets: Vec<String>,
        /// Output root; defaults to $GAMOWLAB_OUT, then ./gamowlab-out.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Scenarios run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Print the built-in catalog.
    List,
    /// Check a configuration file without running it.
    Validate { config: PathBuf },
}

fn load(target: &str) -> Result<ScenarioConfig, CliError> {
    if let Some(builtin) = find(target) {
        return Ok(builtin);
    }
    let path = Path::new(target);
    if !path.exists() {
        return Err(CliError::UnknownScenario(target.to_string()));
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text).map_err(CliError::Usage)
}

fn expand(targets: &[String]) -> Vec<String> {
    targets
        .iter()
        .flat_map(|t| {
            if t == "all" {
                builtin_scenarios().into_iter().map(|s| s.name).collect()
            } else {
                vec![t.clone()]
            }
        })
        .collect()
}

fn summarize(manifest: &RunManifest) {
    let failed: Vec<&str> = manifest
        .checks
        .iter()
        .filter(|c| c.enforced && !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    let status = if failed.is_empty() { "ok" } else { "CHECK FAILURE" };
    println!(
        "{}: {status} ({} files, {} checks, {:.2} s){}",
        manifest.scenario.name,
        manifest.files.len(),
        manifest.checks.len(),
        manifest.wall_time_s,
        if failed.is_empty() { String::new() } else { format!(" failed: {}", failed.join(", ")) }
    );
}

fn run(targets: &[String], out: Option<PathBuf>, jobs: usize, overrides: RunOverrides) -> anyhow::Result<i32> {
    let root = output_root(out);
    let configs: Vec<ScenarioConfig> = match expand(targets).iter().map(|t| load(t)).collect::<Result<Vec<_>, _>>() {
        Ok(c) => c.iter().map(|c| overrides.apply(c)).collect(),
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(e.exit_code());
        }
    };
    let usage: Vec<String> = configs
        .iter()
        .filter_map(|c| {
            let d = c.validate();
            (!d.is_empty()).then(|| CliError::Usage(d).to_string())
        })
        .collect();
    if !usage.is_empty() {
        for u in usage {
            eprintln!("error: {u}");
        }
        return Ok(EXIT_USAGE);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("building the scenario thread pool")?;
    let results: Vec<Result<RunManifest, CliError>> = pool.install(|| configs.par_iter().map(|c| run_scenario(c, &root)).collect());
    let mut code = EXIT_OK;
    for (config, result) in configs.iter().zip(results) {
        match result {
            Ok(manifest) => {
                summarize(&manifest);
                if !manifest.all_enforced_pass() {
                    code = code.max(EXIT_CHECK_FAILURE);
                }
            }
            Err(e) => {
                eprintln!("{}: error: {e}", config.name);
                code = code.max(e.exit_code());
            }
        }
    }
    Ok(code)
}

fn validate(path: &Path) -> i32 {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}", CliError::io(path, e));
            return EXIT_USAGE;
        }
    };
    let diagnostics = match parse_config(&text) {
        Ok(config) => config.validate(),
        Err(d) => d,
    };
    if diagnostics.is_empty() {
        println!("{}: valid", path.display());
        return EXIT_OK;
    }
    for d in &diagnostics {
        println!("{d}");
    }
    EXIT_USAGE
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            targets,
            out,
            jobs,
            grid_points,
            dt,
        } => run(&targets, out, jobs, RunOverrides { grid_points, dt }).unwrap_or_else(|e| {
            eprintln!("error: {e:#}");
            EXIT_CHECK_FAILURE
        }),
        Command::List => {
            for s in builtin_scenarios() {
                println!("{}\t{}", s.name, s.description);
            }
            EXIT_OK
        }
        Command::Validate { config } => validate(&config),
    };
    ExitCode::from(code as u8)
}
