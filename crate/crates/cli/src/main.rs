//! Command-line front end: solve instances, synthesize samples, evaluate
//! likelihoods, estimate parameters and run the verification suites.

mod config;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use needs_core::empirical::{LikelihoodConfig, PopulationParams, ZoneScenario};
use needs_core::estimate::FreeParam;
use needs_core::solver::{self, LocationPolicy};
use needs_core::synth;
use needs_core::{Horizon, SolveError};

use config::Config;

/// Exit code for infeasible instances.
const EXIT_INFEASIBLE: u8 = 3;
/// Exit code for failed verification.
const EXIT_VERIFY: u8 = 4;
/// Exit code for usage or configuration problems.
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "needs", about = "Multi-day needs-based activity demand toolkit", version)]
struct Cli {
    /// Worker threads for data-parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the deterministic model for one individual instance.
    Solve(SolveArgs),
    /// Generate a synthetic sample of zones, persons and observed weeks.
    Synth(SynthArgs),
    /// Evaluate the simulated log-likelihood, optionally over a grid.
    Loglik(LoglikArgs),
    /// Maximize the simulated log-likelihood over selected parameters.
    Estimate(EstimateArgs),
    /// Run the verification suites against the reference solvers.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// TOML config with [model] and [scenario] sections.
    #[arg(long)]
    config: PathBuf,
    /// Scenario-inputs JSON overriding the config's scenario section.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// JSON file fixing participation and locations; durations stay free.
    #[arg(long)]
    conditioned: Option<PathBuf>,
    /// Extend the horizon week by week until utility is non-negative.
    #[arg(long)]
    multiweek: bool,
    /// Cap for the multi-week loop.
    #[arg(long, default_value_t = solver::DEFAULT_MAX_WEEKS)]
    max_weeks: usize,
    /// Output JSON path (stdout summary is always printed).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Scenario preset.
    #[arg(long, value_parser = ["grocery", "ecommerce"])]
    preset: String,
    #[arg(long, default_value_t = 1500)]
    persons: usize,
    /// Zones in the grocery preset (the e-commerce preset has one).
    #[arg(long, default_value_t = 10)]
    zones: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = solver::DEFAULT_MAX_WEEKS)]
    max_weeks: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct LoglikArgs {
    /// Data directory produced by `synth`.
    #[arg(long)]
    data: PathBuf,
    /// TOML config with a [population] section.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    alternatives: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Two axis specs `name=lo:hi:count` switch to a surface scan.
    #[arg(long, num_args = 1)]
    surface: Vec<String>,
    /// Output JSON path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plot-ready CSV path for surfaces.
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated free parameter names, e.g. `p1,q2`.
    #[arg(long)]
    free: String,
    /// Maximum simplex iterations.
    #[arg(long, default_value_t = 40)]
    budget: usize,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    alternatives: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run.
    #[arg(long, default_value = "all", value_parser = ["solver", "speedup", "piecewise", "all"])]
    suite: String,
    /// Random instances for the solver suite.
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = configure_threads(threads) {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let outcome = match cli.command {
        Command::Solve(args) => run_solve(&args),
        Command::Synth(args) => run_synth(&args),
        Command::Loglik(args) => run_loglik(&args),
        Command::Estimate(args) => run_estimate(&args),
        Command::Verify(args) => run_verify(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_threads: usize) -> Result<()> {
    // Sequential build: the flag is accepted and ignored.
    Ok(())
}

/// Fixed participation/location file for `solve --conditioned`.
#[derive(serde::Deserialize)]
struct ConditionedFile {
    delta: Vec<bool>,
    locations: Vec<usize>,
}

fn run_solve(args: &SolveArgs) -> Result<u8> {
    let config = Config::load(&args.config)?;
    let model = config
        .model
        .as_ref()
        .context("config needs a [model] section")?
        .to_params()?;
    let config_dir = args.config.parent().unwrap_or(Path::new(".")).to_path_buf();
    let inputs = match &args.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading scenario {}", path.display()))?;
            serde_json::from_str(&text)?
        }
        None => config
            .scenario
            .as_ref()
            .context("config needs a [scenario] section or --scenario")?
            .to_inputs(&config_dir)?,
    };
    let week = Horizon::week();
    inputs.validate(&week)?;

    let solved = if let Some(path) = &args.conditioned {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading pattern {}", path.display()))?;
        let fixed: ConditionedFile = serde_json::from_str(&text)?;
        if args.multiweek {
            solver::solve_conditioned_multiweek(
                &fixed.delta,
                &fixed.locations,
                &inputs,
                &model,
                &week,
                args.max_weeks,
            )
        } else {
            let prob = solver::ConditionedProblem::new(
                &fixed.delta,
                &fixed.locations,
                &inputs,
                &model,
                &week,
            )?;
            solver::solve_conditioned(&prob)
        }
    } else if args.multiweek {
        solver::solve_multiweek(&inputs, &model, &week, LocationPolicy::SingleLocation, args.max_weeks)
    } else {
        solver::solve_full(&inputs, &model, &week, LocationPolicy::SingleLocation)
    };

    let result = match solved {
        Ok(result) => result,
        Err(SolveError::Infeasible) => {
            eprintln!("infeasible: no duration assignment satisfies the constraints");
            return Ok(EXIT_INFEASIBLE);
        }
        Err(SolveError::NoNonNegativeHorizon { max_weeks }) => {
            eprintln!("no non-negative horizon found within {max_weeks} weeks");
            return Ok(EXIT_INFEASIBLE);
        }
        Err(e) => return Err(e.into()),
    };

    let active: Vec<String> = result
        .pattern
        .active_days()
        .map(|t| format!("day {} ({:.3} h at {})", t + 1, result.pattern.durations[t],
            inputs.locations[result.pattern.locations[t]]))
        .collect();
    println!("objective: {:.6} per day over {} week(s)", result.objective, result.weeks);
    println!("participation: {}", if active.is_empty() { "none".into() } else { active.join(", ") });
    println!("safety stock: {:.3e}", result.trajectory.safety_stock);
    if let Some(out) = &args.out {
        std::fs::write(out, needs_core::io::to_json_pretty(&result))?;
        println!("wrote {}", out.display());
    }
    Ok(0)
}

fn run_synth(args: &SynthArgs) -> Result<u8> {
    let (scenario, pop) = match args.preset.as_str() {
        "grocery" => (synth::generate_scenario(args.zones, args.seed), synth::grocery_population()),
        "ecommerce" => synth::ecommerce_preset(),
        other => bail!("unknown preset `{other}`"),
    };
    let persons = synth::generate_population(
        args.persons,
        &scenario,
        &synth::FreeTimeDistributions::default(),
        args.seed,
    );
    let out = synth::simulate_patterns(
        &persons,
        &scenario,
        &pop,
        &synth::SynthConfig { seed: args.seed, max_weeks: args.max_weeks },
    );
    if !out.excluded.is_empty() {
        eprintln!(
            "warning: {} person(s) without a representable activity week were excluded",
            out.excluded.len()
        );
    }
    let summary = synth::summarize(&out.observations, &scenario, out.excluded.len());

    std::fs::create_dir_all(&args.out_dir)?;
    std::fs::write(
        args.out_dir.join("scenario.json"),
        needs_core::io::to_json_pretty(&scenario),
    )?;
    needs_core::io::write_observations(&args.out_dir, &out.observations)?;
    std::fs::write(
        args.out_dir.join("summary.json"),
        needs_core::io::to_json_pretty(&summary),
    )?;
    println!(
        "{} observations ({} excluded); mean weekly participation {:.3}; mean one-way travel {:.1} min",
        summary.n_observations,
        summary.n_excluded,
        summary.mean_weekly_participation,
        summary.mean_oneway_travel_minutes
    );
    println!("wrote {}", args.out_dir.display());
    Ok(0)
}

fn load_data(dir: &Path) -> Result<(ZoneScenario, Vec<needs_core::empirical::Observation>)> {
    let text = std::fs::read_to_string(dir.join("scenario.json"))
        .with_context(|| format!("reading {}/scenario.json", dir.display()))?;
    let scenario: ZoneScenario = serde_json::from_str(&text)?;
    let observations = needs_core::io::read_observations(dir)?;
    for obs in &observations {
        obs.validate(scenario.n_zones())?;
    }
    Ok((scenario, observations))
}

fn likelihood_config(
    config: &Config,
    draws: Option<usize>,
    alternatives: Option<usize>,
    seed: u64,
) -> LikelihoodConfig {
    let section = config.estimation.as_ref();
    let mut cfg = LikelihoodConfig {
        seed,
        ..LikelihoodConfig::default()
    };
    if let Some(d) = draws.or(section.and_then(|s| s.draws)) {
        cfg.draws = d;
    }
    if let Some(a) = alternatives.or(section.and_then(|s| s.alternatives)) {
        cfg.sample_alternatives = a;
    }
    if let Some(w) = section.and_then(|s| s.max_weeks) {
        cfg.max_weeks = w;
    }
    cfg
}

fn population_from(config: &Config) -> Result<PopulationParams> {
    config
        .population
        .as_ref()
        .context("config needs a [population] section")?
        .to_params()
}

/// Parses `name=lo:hi:count` into a parameter and its grid.
fn parse_axis(spec: &str) -> Result<(FreeParam, Vec<f64>)> {
    let (name, rest) = spec.split_once('=').context("axis spec must look like name=lo:hi:count")?;
    let param = FreeParam::parse(name).with_context(|| format!("unknown parameter `{name}`"))?;
    let parts: Vec<&str> = rest.split(':').collect();
    if parts.len() != 3 {
        bail!("axis spec must look like name=lo:hi:count");
    }
    let lo: f64 = parts[0].parse()?;
    let hi: f64 = parts[1].parse()?;
    let count: usize = parts[2].parse()?;
    if count < 1 {
        bail!("axis needs at least one point");
    }
    let grid = if count == 1 {
        vec![lo]
    } else {
        (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect()
    };
    Ok((param, grid))
}

fn run_loglik(args: &LoglikArgs) -> Result<u8> {
    let config = Config::load(&args.config)?;
    let pop = population_from(&config)?;
    let (scenario, observations) = load_data(&args.data)?;
    let cfg = likelihood_config(&config, args.draws, args.alternatives, args.seed);

    match args.surface.len() {
        0 => {
            let report =
                needs_core::empirical::simulated_loglik(&observations, &scenario, &pop, &cfg)?;
            println!("log-likelihood: {:.6} ({} persons)", report.loglik, report.per_person.len());
            if let Some(out) = &args.out {
                std::fs::write(out, needs_core::io::to_json_pretty(&report))?;
                println!("wrote {}", out.display());
            }
            Ok(0)
        }
        2 => {
            let axis1 = parse_axis(&args.surface[0])?;
            let axis2 = parse_axis(&args.surface[1])?;
            let surface = needs_core::estimate::loglik_surface(
                &observations,
                &scenario,
                &pop,
                axis1,
                axis2,
                &cfg,
            )?;
            let (i, j) = surface.argmax;
            println!(
                "surface {}x{}; argmax at {}={:.4}, {}={:.4} (ll {:.4})",
                surface.grid1.len(),
                surface.grid2.len(),
                surface.param1,
                surface.grid1[i],
                surface.param2,
                surface.grid2[j],
                surface.values[i][j],
            );
            if let Some(out) = &args.out {
                std::fs::write(out, needs_core::io::to_json_pretty(&surface))?;
                println!("wrote {}", out.display());
            }
            if let Some(out) = &args.out_csv {
                let mut w = csv::Writer::from_path(out)?;
                w.write_record([surface.param1.as_str(), surface.param2.as_str(), "loglik"])?;
                for (i, v1) in surface.grid1.iter().enumerate() {
                    for (j, v2) in surface.grid2.iter().enumerate() {
                        w.write_record([
                            v1.to_string(),
                            v2.to_string(),
                            surface.values[i][j].to_string(),
                        ])?;
                    }
                }
                w.flush()?;
                println!("wrote {}", out.display());
            }
            Ok(0)
        }
        n => bail!("--surface must appear exactly twice for a scan (got {n})"),
    }
}

fn run_estimate(args: &EstimateArgs) -> Result<u8> {
    let config = Config::load(&args.config)?;
    let pop = population_from(&config)?;
    let (scenario, observations) = load_data(&args.data)?;
    let cfg = likelihood_config(&config, args.draws, args.alternatives, args.seed);

    let free: Vec<FreeParam> = args
        .free
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|name| {
            FreeParam::parse(name.trim()).with_context(|| format!("unknown parameter `{name}`"))
        })
        .collect::<Result<_>>()?;

    let result = needs_core::estimate::maximize(
        &observations,
        &scenario,
        &pop,
        &free,
        args.budget,
        &cfg,
    )?;

    std::fs::create_dir_all(&args.out_dir)?;
    std::fs::write(
        args.out_dir.join("estimates.json"),
        needs_core::io::to_json_pretty(&result),
    )?;
    let mut w = csv::Writer::from_path(args.out_dir.join("trace.csv"))?;
    let mut header = vec!["iteration".to_string(), "loglik".to_string()];
    header.extend(free.iter().map(|p| p.name()));
    w.write_record(&header)?;
    for row in &result.trace {
        let mut record = vec![row.iteration.to_string(), row.loglik.to_string()];
        record.extend(row.values.iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;

    let final_values: Vec<String> = free
        .iter()
        .map(|p| format!("{}={:.4}", p.name(), p.get(&result.params)))
        .collect();
    println!(
        "log-likelihood {:.4} after {} iterations; {}",
        result.loglik,
        result.trace.len(),
        if final_values.is_empty() { "no free parameters".into() } else { final_values.join(", ") }
    );
    println!("wrote {}", args.out_dir.display());
    Ok(0)
}

fn run_verify(args: &VerifyArgs) -> Result<u8> {
    let all = args.suite == "all";
    let mut ok = true;
    if all || args.suite == "solver" {
        ok &= verify::solver_suite(args.instances, args.seed);
    }
    if all || args.suite == "speedup" {
        ok &= verify::speedup_suite(50, args.seed);
    }
    if all || args.suite == "piecewise" {
        ok &= verify::piecewise_suite(args.seed);
    }
    if ok {
        println!("verification passed");
        Ok(0)
    } else {
        eprintln!("verification FAILED");
        Ok(EXIT_VERIFY)
    }
}
