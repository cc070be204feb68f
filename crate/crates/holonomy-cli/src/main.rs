//! `holonomy` — compute geometric phases of mixed-state loops, verify the
//! weighted-phase/symplectic-area identity, classify null phase curves, and
//! sweep scenario parameters into CSV.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 threshold breach
//! (`--strict` or failed selftest), 3 numeric failure.

mod config;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use holonomy_core::error::Error;
use holonomy_core::exec;
use holonomy_core::fixtures::BlochCapSurface;
use holonomy_core::npc::{classify_curve, nonadditivity_check};
use holonomy_core::selftest::{self, Scale};
use holonomy_core::transport::{
    geometric_phases, geometric_phases_sampled, verify_area_identity, PhaseReport,
};

use config::{BuiltCurve, CurveSpec, NamedSurface, ScenarioConfig, SurfaceSpec, SweepParam};
use report::RunReport;

/// Residual threshold enforced by `--strict`.
const STRICT_RESIDUAL: f64 = 1e-4;

#[derive(Parser)]
#[command(name = "holonomy", version, about, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the configured base step count.
    #[arg(long)]
    steps: Option<usize>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout (`.csv` switches format).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Phases of a closed loop, with an optional spanning-surface check.
    Phase {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Exit 2 when the area-identity residual exceeds 1e-4.
        #[arg(long)]
        strict: bool,
    },
    /// Classify a curve; with --triangle, run the non-additivity check.
    Npc {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Check GP non-additivity over a generated triangle.
        #[arg(long)]
        triangle: bool,
    },
    /// Evaluate a scenario over a parameter grid, one CSV row per point.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Run the acceptance checks at reduced sizes.
    Selftest {
        /// Only run checks whose name contains this substring.
        #[arg(long)]
        filter: Option<String>,
        /// Full-size checks (the acceptance-suite counts).
        #[arg(long)]
        full: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("HOLONOMY_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version output is a success, not a usage error
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    };
    ExitCode::from(code)
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Validation(_) | Error::DimensionMismatch(_) | Error::Json(_) => 1,
        _ => 3,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Phase { scenario, strict } => cmd_phase(scenario, strict),
        Command::Npc { scenario, triangle } => cmd_npc(scenario, triangle),
        Command::Sweep { scenario } => cmd_sweep(scenario),
        Command::Selftest { filter, full } => Ok(cmd_selftest(
            filter.as_deref(),
            if full { Scale::Full } else { Scale::Quick },
        )),
    }
}

fn load(args: &ScenarioArgs) -> Result<ScenarioConfig, Error> {
    let mut config = ScenarioConfig::from_file(&args.config)?;
    if args.steps.is_some() {
        config.steps = args.steps;
    }
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    if config.id.is_none() {
        config.id = args
            .config
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned());
    }
    Ok(config)
}

fn emit(args: &ScenarioArgs, report: &RunReport, param: Option<(&str, f64)>) -> Result<(), Error> {
    let csv = args
        .out
        .as_ref()
        .map(|p| p.extension().is_some_and(|e| e == "csv"))
        .unwrap_or(false);
    let text = if csv {
        format!(
            "{}\n{}\n",
            RunReport::csv_header(report.k, param.map(|(n, _)| n)),
            report.csv_row(param.map(|(_, v)| v))
        )
    } else {
        format!("{}\n", serde_json::to_string_pretty(report)?)
    };
    write_out(args, &text)
}

fn write_out(args: &ScenarioArgs, text: &str) -> Result<(), Error> {
    match &args.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

/// Phase pipeline: generation → lift → phases → optional area → report.
fn evaluate_phase(config: &ScenarioConfig) -> Result<RunReport, Error> {
    let started = Instant::now();
    let built = config.build_curve()?;
    if !built.closed() {
        return Err(Error::Validation("phase needs a closed curve".into()));
    }
    let phase_opts = config.phase_options();

    let phases: PhaseReport = match &built {
        BuiltCurve::Sampled(path) => geometric_phases_sampled(path)?,
        other => geometric_phases(other.as_curve().unwrap(), &phase_opts)?,
    };

    let (area, residual) = match &config.surface {
        SurfaceSpec::Unset | SurfaceSpec::Named(NamedSurface::None) => (None, None),
        SurfaceSpec::Named(NamedSurface::Cone) => {
            let quad = config.quad_options();
            let identity = match &built {
                BuiltCurve::Exponential(curve) => {
                    let cone = holonomy_core::geometry::ConeSurface::new(curve);
                    verify_area_identity(curve, &cone, &phase_opts, &quad)?
                }
                BuiltCurve::Bloch(curve) => {
                    if config.k != 1 {
                        return Err(Error::Validation(
                            "the polar-cap surface spans Bloch circles only for k = 1".into(),
                        ));
                    }
                    let theta = match config.curve {
                        CurveSpec::BlochCircle { theta } => theta,
                        _ => unreachable!(),
                    };
                    let cap = BlochCapSurface::new(theta);
                    verify_area_identity(curve, &cap, &phase_opts, &quad)?
                }
                _ => {
                    return Err(Error::Validation(
                        "cone surfaces exist for generated loops only (random_loop, bloch_circle)"
                            .into(),
                    ))
                }
            };
            (Some(identity.area), Some(identity.residual))
        }
        SurfaceSpec::File { file } => {
            let grid = config.load_grid_surface(file)?;
            let path = built.sample(config.steps.unwrap_or(2048));
            // boundary check against the nearest path samples
            for i in 0..grid.nu {
                let u = i as f64 / (grid.nu - 1) as f64;
                let nearest = ((u * (path.len() - 1) as f64).round() as usize).min(path.len() - 1);
                let gap = grid.at(i, 0).distance(&path.samples[nearest].1);
                if gap > 1e-9 {
                    return Err(Error::BoundaryMismatch(format!(
                        "grid edge at u={u} differs from the loop by {gap:.3e}"
                    )));
                }
            }
            let area = holonomy_core::geometry::surface_integral_grid(&grid)?;
            (Some(area), Some((phases.weighted + area).abs()))
        }
    };

    Ok(RunReport {
        id: config.id.clone().unwrap_or_default(),
        n: config.n,
        k: config.k,
        weights: config.weights.clone(),
        per_level: phases.per_level.clone(),
        weighted: phases.weighted,
        area,
        residual,
        class: None,
        steps: phases.steps,
        runtime_ms: started.elapsed().as_millis(),
    })
}

fn cmd_phase(args: ScenarioArgs, strict: bool) -> Result<u8, Error> {
    let config = load(&args)?;
    let report = evaluate_phase(&config)?;
    let breach = strict && report.residual.is_some_and(|r| r > STRICT_RESIDUAL);
    emit(&args, &report, None)?;
    Ok(if breach { 2 } else { 0 })
}

fn cmd_npc(args: ScenarioArgs, triangle: bool) -> Result<u8, Error> {
    let config = load(&args)?;
    if triangle {
        let weights = config.weights();
        let scale = config.triangle_scale.unwrap_or(0.35);
        let steps = config.steps.unwrap_or(1024);
        let [s1, s2, s3] = holonomy_core::fixtures::random_triangle(
            &weights,
            config.n,
            config.seed(),
            scale,
        )?;
        let outcome = nonadditivity_check(
            &holonomy_core::states::OrbitCurve::sample(&s1, steps),
            &holonomy_core::states::OrbitCurve::sample(&s2, steps),
            &holonomy_core::states::OrbitCurve::sample(&s3, steps),
            1e-8,
        )?;
        let text = serde_json::to_string_pretty(&serde_json::json!({
            "id": config.id,
            "lhs": outcome.lhs,
            "rhs": outcome.rhs,
            "residual": outcome.residual,
            "segment_phases": outcome.segment_phases,
            "bargmann_args": outcome.bargmann_args,
        }))?;
        write_out(&args, &format!("{text}\n"))?;
        return Ok(0);
    }

    let built = config.build_curve()?;
    let path = built.sample(config.steps.unwrap_or(512));
    let classification = classify_curve(&path, 1e-6)?;
    let text = serde_json::to_string_pretty(&serde_json::json!({
        "id": config.id,
        "class": classification.class,
        "witness": classification.witness,
    }))?;
    write_out(&args, &format!("{text}\n"))?;
    Ok(0)
}

fn cmd_sweep(args: ScenarioArgs) -> Result<u8, Error> {
    let config = load(&args)?;
    let sweep = config
        .sweep
        .clone()
        .ok_or_else(|| Error::Validation("sweep: config has no `sweep` section".into()))?;

    let values: Vec<f64> = match sweep.points {
        0 => Vec::new(),
        1 => vec![sweep.from],
        points => (0..points)
            .map(|i| sweep.from + (sweep.to - sweep.from) * i as f64 / (points - 1) as f64)
            .collect(),
    };

    let param_name = match sweep.param {
        SweepParam::Theta => "theta",
        SweepParam::Kappa1 => "kappa1",
    };

    // grid points evaluate in parallel; rows are written in grid order
    let reports: Vec<Result<RunReport, Error>> = exec::map_indexed(values.len(), |i| {
        let mut point = config.clone();
        point.sweep = None;
        match sweep.param {
            SweepParam::Theta => {
                point.curve = CurveSpec::BlochCircle { theta: values[i] };
            }
            SweepParam::Kappa1 => {
                point.weights = vec![values[i], 1.0 - values[i]];
            }
        }
        point.validate()?;
        evaluate_phase(&point)
    });

    let mut text = String::new();
    text.push_str(&RunReport::csv_header(config.k, Some(param_name)));
    text.push('\n');
    for (i, r) in reports.into_iter().enumerate() {
        let report = r?;
        text.push_str(&report.csv_row(Some(values[i])));
        text.push('\n');
    }
    write_out(&args, &text)?;
    Ok(0)
}

fn cmd_selftest(filter: Option<&str>, scale: Scale) -> u8 {
    let outcomes = selftest::run(filter, scale);
    if outcomes.is_empty() {
        eprintln!("no checks match the filter");
        return 1;
    }
    let mut all = true;
    for o in &outcomes {
        println!("{}", o.line());
        all &= o.passed;
    }
    if all {
        0
    } else {
        2
    }
}
