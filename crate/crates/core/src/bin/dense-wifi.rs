use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dense_wifi::analytics::emit::write_bianchi;
use dense_wifi::analytics::Format;
use dense_wifi::harness::{
    bianchi_curve, replay_timeline, run_scenario, sweep, write_run, write_sweep, RunOutput,
    ScenarioConfig, ScenarioKind, TimelineKind,
};
use dense_wifi::Error;

#[derive(Parser)]
#[command(name = "dense-wifi", version, about = "Dense multi-cell 802.11 DCF simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its output files.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a scenario once per value of one numeric parameter.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Replay a scripted timeline and check its event order.
    Replay {
        #[arg(long)]
        timeline: TimelineKind,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analytical reference curves.
    Oracle {
        #[command(subcommand)]
        which: Oracle,
    },
    /// Print the full default configuration.
    Config {
        #[arg(long, value_enum, default_value_t = Kind::SmallNetwork)]
        scenario: Kind,
    },
}

#[derive(Subcommand)]
enum Oracle {
    /// Saturation throughput of one cell for n = 1..n_max stations.
    Bianchi {
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Comma-separated trace layers: phy, mac.
    #[arg(long, value_delimiter = ',')]
    trace: Vec<TraceLayer>,
    #[arg(long, value_enum)]
    scenario: Option<Kind>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    duration: Option<f64>,
    /// Shorter runs and, where the reuse plan allows, a 4x4 grid.
    #[arg(long)]
    fast: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceLayer {
    Phy,
    Mac,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    SingleCell,
    SmallNetwork,
    Grid,
    LteBaseline,
    BianchiCurve,
    TimelineFig3,
    TimelineFig4,
}

impl From<Kind> for ScenarioKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::SingleCell => ScenarioKind::SingleCell,
            Kind::SmallNetwork => ScenarioKind::SmallNetwork,
            Kind::Grid => ScenarioKind::Grid,
            Kind::LteBaseline => ScenarioKind::LteBaseline,
            Kind::BianchiCurve => ScenarioKind::BianchiCurve,
            Kind::TimelineFig3 => ScenarioKind::TimelineFig3,
            Kind::TimelineFig4 => ScenarioKind::TimelineFig4,
        }
    }
}

fn load(path: Option<&Path>) -> Result<ScenarioConfig, Error> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            ScenarioConfig::from_json(&text)
        }
        None => Ok(ScenarioConfig::default()),
    }
}

fn apply(cfg: &mut ScenarioConfig, c: &Common) -> Result<(), Error> {
    if let Some(k) = c.scenario {
        cfg.scenario = k.into();
    }
    if c.fast {
        *cfg = cfg.clone().fast();
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(r) = c.replications {
        cfg.replications = r;
    }
    if let Some(d) = c.duration {
        cfg.duration_s = d;
    }
    for t in &c.trace {
        match t {
            TraceLayer::Phy => cfg.trace.phy = true,
            TraceLayer::Mac => cfg.trace.mac = true,
        }
    }
    cfg.validate()
}

fn report_timelines(out: &RunOutput) -> Result<(), Error> {
    for t in &out.timeline {
        print!("{t}");
    }
    let failed: Vec<&str> = out
        .timeline
        .iter()
        .filter(|t| !t.passed())
        .map(|t| t.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Assertion(failed.join(", ")))
    }
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, common } => {
            let mut cfg = load(Some(&config))?;
            apply(&mut cfg, &common)?;
            let out = run_scenario(&cfg)?;
            print_written(&write_run(&out, &common.out, common.format.into())?);
            if let Some(r) = &out.report {
                println!("total goodput {:.3} Mbps over {} STAs", r.total_mbps(), r.stas.len());
            }
            report_timelines(&out)
        }
        Command::Sweep {
            config,
            axis,
            values,
            common,
        } => {
            let mut cfg = load(config.as_deref())?;
            apply(&mut cfg, &common)?;
            let points = sweep(&cfg, &axis, &values)?;
            print_written(&write_sweep(&points, &common.out, common.format.into())?);
            for p in &points {
                if let Some(r) = &p.output.report {
                    println!("{} = {} (rep {}): {:.3} Mbps", p.axis, p.value, p.replication, r.total_mbps());
                }
            }
            Ok(())
        }
        Command::Replay {
            timeline,
            config,
            out,
        } => {
            let mut cfg = load(config.as_deref())?;
            cfg.scenario = match timeline {
                TimelineKind::Fig3 => ScenarioKind::TimelineFig3,
                TimelineKind::Fig4 => ScenarioKind::TimelineFig4,
            };
            let result = RunOutput {
                timeline: replay_timeline(timeline, &cfg)?,
                config: Some(cfg.resolved()),
                seed: cfg.seed,
                ..RunOutput::default()
            };
            if let Some(dir) = out {
                print_written(&write_run(&result, &dir, Format::Csv)?);
            }
            report_timelines(&result)
        }
        Command::Oracle {
            which:
                Oracle::Bianchi {
                    n_max,
                    config,
                    out,
                    format,
                },
        } => {
            let mut cfg = load(config.as_deref())?;
            cfg.bianchi.n_max = n_max;
            cfg.validate()?;
            let curve = bianchi_curve(&cfg)?;
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    let fmt: Format = format.into();
                    let path = dir.join(format!("bianchi.{}", fmt.extension()));
                    write_bianchi(std::fs::File::create(&path)?, &curve, fmt)?;
                    println!("wrote {}", path.display());
                }
                None => write_bianchi(std::io::stdout().lock(), &curve, format.into())?,
            }
            Ok(())
        }
        Command::Config { scenario } => {
            println!("{}", ScenarioConfig::for_scenario(scenario.into()).resolved().to_json()?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Topology(_) | Error::Json(_) => ExitCode::from(2),
                Error::Assertion(_) => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
