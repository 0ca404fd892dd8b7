//! `optosync` command-line front end.
//!
//! Exit codes: 0 on success, 1 when an analysis fails, 2 for usage or
//! configuration errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use optosync::io::svg::{portrait_panel, ratio_panel, sync_error_panels, Style};
use optosync::io::{parse_config, render_svg, serialize_config, write_csv};
use optosync::scenarios::{execute, sweep_with_workers, AnalysisOutcome};
use optosync::{lle_benettin, lle_wolf, preset, Analysis, LleOptions, Model, ScenarioConfig, PRESET_NAMES};

#[derive(Parser)]
#[command(
    name = "optosync",
    version,
    about = "Chaotic synchronization of optomechanical cavity modes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Where a scenario comes from.
#[derive(clap::Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in preset name (see `list-presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Configuration document (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its report, trajectory and plots.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory [default: out/<name>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Step size, ns.
        #[arg(long)]
        dt: Option<f64>,
        /// Recorded duration after the discarded transient, ns.
        #[arg(long)]
        duration: Option<f64>,
        /// Skip the SVG plots.
        #[arg(long)]
        no_plots: bool,
    },
    /// Run a scenario once per value of one parameter.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Parameter path, e.g. `g_w`, `k_1+k_2/gamma_1`, `plan.dt`.
        #[arg(long)]
        param: String,
        /// Comma-separated values, bare or with a Hz suffix.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Worker threads [default: all cores].
        #[arg(long)]
        workers: Option<usize>,
        /// Write the sweep report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the largest Lyapunov exponent only.
    Lle {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = MethodArg::Wolf)]
        method: MethodArg,
        /// Accumulation time, ns [default: the scenario's].
        #[arg(long)]
        t_total: Option<f64>,
    },
    /// List preset names with their figure panel.
    ListPresets,
    /// Print the configuration document of a preset.
    ShowConfig {
        #[arg(long)]
        preset: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Wolf,
    Benettin,
}

enum Failure {
    Usage(anyhow::Error),
    Analysis(anyhow::Error),
}

type Outcome<T = ()> = Result<T, Failure>;

trait Classify<T> {
    fn usage(self) -> Outcome<T>;
    fn analysis(self) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Outcome<T> {
        self.map_err(|e| Failure::Usage(e.into()))
    }
    fn analysis(self) -> Outcome<T> {
        self.map_err(|e| Failure::Analysis(e.into()))
    }
}

fn load(source: &Source) -> anyhow::Result<ScenarioConfig> {
    match (&source.preset, &source.config) {
        (Some(name), _) => Ok(preset(name)?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_config(&text).with_context(|| format!("parsing {}", path.display()))
        }
        (None, None) => Err(anyhow!("either --preset or --config is required")),
    }
}

fn write(dir: &Path, name: &str, text: &str, files: &mut Vec<String>) -> anyhow::Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    files.push(name.to_string());
    Ok(())
}

fn pretty<S: serde::Serialize>(value: &S) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

/// Portrait axes for the first weak mode, coloured by its resonator momentum.
fn portrait_channels(config: &ScenarioConfig) -> (String, String, String) {
    let setup = config.setup();
    let mode = setup.cavity_names()[1];
    let color = if setup.shared_resonator() {
        "v".to_string()
    } else {
        format!("v_{mode}")
    };
    (format!("re_alpha_{mode}"), format!("im_alpha_{mode}"), color)
}

fn run(
    source: &Source,
    out: Option<PathBuf>,
    dt: Option<f64>,
    duration: Option<f64>,
    plots: bool,
) -> Outcome {
    let mut config = load(source).usage()?;
    if let Some(dt) = dt {
        config = config.with_dt(dt);
    }
    if let Some(d) = duration {
        config = config.with_duration(d);
    }
    config.validate().usage()?;
    let dir = out.unwrap_or_else(|| Path::new("out").join(&config.name));
    fs::create_dir_all(&dir)
        .with_context(|| format!("creating {}", dir.display()))
        .usage()?;

    let result = execute(&config).analysis()?;
    let mut files = Vec::new();
    write(&dir, "config.json", &serialize_config(&config), &mut files).analysis()?;
    write_csv(
        &result.trajectory,
        Some(&config.output_channels),
        &dir.join("trajectory.csv"),
    )
    .analysis()?;
    files.push("trajectory.csv".into());

    if plots {
        let style = Style::default();
        let (re, im, color) = portrait_channels(&config);
        let panel = portrait_panel(&result.trajectory, &re, &im, &color).analysis()?;
        write(
            &dir,
            "portrait.svg",
            &render_svg(&[panel], &style).analysis()?,
            &mut files,
        )
        .analysis()?;
        for (i, e) in result.sync_errors.iter().enumerate() {
            let svg = render_svg(&sync_error_panels(e, &config.name), &style).analysis()?;
            write(&dir, &format!("sync_errors_{i}.svg"), &svg, &mut files).analysis()?;
        }
        let targets = result.report.analyses.iter().filter_map(|a| match &a.outcome {
            AnalysisOutcome::PhaseLock(v) => Some(v.target),
            _ => None,
        });
        for (i, (r, target)) in result.ratios.iter().zip(targets).enumerate() {
            let svg = render_svg(&[ratio_panel(r, target)], &style).analysis()?;
            write(&dir, &format!("phase_ratio_{i}.svg"), &svg, &mut files).analysis()?;
        }
    }

    let mut report = result.report;
    files.push("report.json".into());
    report.outputs = files.clone();
    let path = dir.join("report.json");
    fs::write(&path, pretty(&report))
        .with_context(|| format!("writing {}", path.display()))
        .analysis()?;
    let manifest = json!({
        "tool": "optosync",
        "version": env!("CARGO_PKG_VERSION"),
        "created": chrono::Utc::now().to_rfc3339(),
        "scenario": report.name,
        "config_hash": report.config_hash,
        "files": files,
    });
    write(&dir, "manifest.json", &pretty(&manifest), &mut Vec::new()).analysis()?;

    for record in &report.analyses {
        println!(
            "{}: {}",
            record.analysis.kind(),
            serde_json::to_string(&record.outcome).unwrap_or_default()
        );
    }
    println!("wrote {}", dir.display());
    let errors = report.errors();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Failure::Analysis(anyhow!(errors.join("; "))))
    }
}

fn sweep(
    source: &Source,
    param: &str,
    values: &[String],
    workers: Option<usize>,
    out: Option<PathBuf>,
) -> Outcome {
    let config = load(source).usage()?;
    let report = sweep_with_workers(&config, param, values, workers).map_err(|e| match e {
        optosync::Error::BadPath(_)
        | optosync::Error::Validation { .. }
        | optosync::Error::InvalidPlan(_) => Failure::Usage(e.into()),
        e => Failure::Analysis(e.into()),
    })?;
    let text = pretty(&report);
    match out {
        Some(path) => fs::write(&path, text)
            .with_context(|| format!("writing {}", path.display()))
            .analysis()?,
        None => print!("{text}"),
    }
    let errors: Vec<String> = report
        .points
        .iter()
        .flat_map(|p| p.report.errors().into_iter().map(|e| format!("{}: {e}", p.value)))
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Failure::Analysis(anyhow!(errors.join("; "))))
    }
}

fn lle(source: &Source, method: MethodArg, t_total: Option<f64>) -> Outcome {
    let config = load(source).usage()?;
    config.validate().usage()?;
    let (channels, preset_total) = config
        .analyses
        .iter()
        .find_map(|a| match a {
            Analysis::Lle {
                channels, t_total, ..
            } => Some((channels.clone(), *t_total)),
            _ => None,
        })
        .unwrap_or_else(|| (Vec::new(), config.plan.t1 - config.plan.discard));
    let names = config.setup().channel_names();
    let idx = channels
        .iter()
        .map(|c| {
            names
                .iter()
                .position(|n| n == c)
                .ok_or_else(|| anyhow!("unknown channel {c}"))
        })
        .collect::<anyhow::Result<Vec<_>>>()
        .usage()?;
    let mut opts = LleOptions::for_params(&config.params, t_total.unwrap_or(preset_total))
        .with_discard(config.plan.discard);
    opts.dt = config.plan.dt;
    if !idx.is_empty() {
        opts = opts.with_channels(idx);
    }
    let model = Model::new(config.params.clone());
    let estimate = match method {
        MethodArg::Wolf => lle_wolf(&model, config.initial.as_slice(), &opts),
        MethodArg::Benettin => lle_benettin(&model, config.initial.as_slice(), &opts),
    }
    .analysis()?;
    print!("{}", pretty(&estimate));
    Ok(())
}

fn list_presets() -> Outcome {
    for name in PRESET_NAMES {
        let c: ScenarioConfig = preset(name).usage()?;
        println!("{name:<12} Fig. {:<6} {}", c.figure, c.description);
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Run {
            source,
            out,
            dt,
            duration,
            no_plots,
        } => run(&source, out, dt, duration, !no_plots),
        Command::Sweep {
            source,
            param,
            values,
            workers,
            out,
        } => sweep(&source, &param, &values, workers, out),
        Command::Lle {
            source,
            method,
            t_total,
        } => lle(&source, method, t_total),
        Command::ListPresets => list_presets(),
        Command::ShowConfig { preset: name } => {
            let c: ScenarioConfig = preset(&name).usage()?;
            print!("{}", serialize_config(&c));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors by itself
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Analysis(e)) => {
            eprintln!("analysis failed: {e:#}");
            ExitCode::from(1)
        }
    }
}
