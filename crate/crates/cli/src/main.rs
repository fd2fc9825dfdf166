use std::fs;
use std::path::{Path, PathBuf};

use aerobeam::mobility::save_trajectories;
use aerobeam::plot::pattern_svg;
use aerobeam::report::write_csv;
use aerobeam::{
    array_gain_db, generate_trajectories, half_power_beamwidth_deg, pattern_cut, write_report, write_sweep,
    ArrayRecord, Deployment, DeploymentDefaults, ElementPattern, Plane, ScenarioConfig, SteeringAngles, SweepAxis,
    TerrainGrid,
};
use anyhow::{Context, Result};
use clap::builder::PossibleValuesParser;
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod config_keys;

#[derive(Parser)]
#[command(
    name = "aerobeam",
    version,
    about = "UAV cellular coverage, beam tracking and handover simulator",
    after_long_help = config_keys::help_text()
)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write its report.
    Run(RunArgs),
    /// Run a scenario once per value of one parameter.
    Sweep(SweepArgs),
    /// Print peak gain and beamwidth of an array and write its pattern cuts.
    Pattern(PatternArgs),
    /// Draw the scenario's trajectory set and write it as CSV.
    GenTrajectories(GenTrajectoriesArgs),
    /// Write a synthetic deployment as a deployment JSON file.
    GenDeployment(GenDeploymentArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON file; defaults apply when omitted (see --help).
    #[arg(short, long)]
    config: Option<PathBuf>,

    /// Override trajectories.seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path).with_context(|| format!("loading config {}", path.display()))?,
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.trajectories.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,

    /// Output directory.
    #[arg(short, long)]
    out: PathBuf,

    /// Also write SVG plots.
    #[arg(long)]
    plots: bool,

    /// Simulate trajectories one at a time.
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,

    /// Parameter to sweep.
    #[arg(long, value_parser = PossibleValuesParser::new(SweepAxis::NAMES))]
    axis: String,

    /// Comma-separated values, e.g. 1x64,8x8 or 0.1,0.2,0.5.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,

    #[arg(short, long)]
    out: PathBuf,

    #[arg(long)]
    plots: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlaneArg {
    Azimuth,
    Elevation,
    Both,
}

#[derive(Args)]
struct PatternArgs {
    /// Array topology as MxN (M vertical, N horizontal).
    #[arg(long, default_value = "8x8")]
    array: ArrayRecord,

    /// Element spacing in wavelengths, vertical.
    #[arg(long, default_value_t = 0.5)]
    dz: f64,

    /// Element spacing in wavelengths, horizontal.
    #[arg(long, default_value_t = 0.5)]
    dy: f64,

    /// Steering zenith angle in degrees (90 is broadside).
    #[arg(long, default_value_t = 90.0, allow_negative_numbers = true)]
    theta0: f64,

    /// Steering azimuth in degrees off boresight.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phi0: f64,

    #[arg(long, value_enum, default_value = "both")]
    plane: PlaneArg,

    /// Angular resolution of the cuts in degrees.
    #[arg(long, default_value_t = 0.1)]
    resolution: f64,

    /// Scenario file to take the element pattern from.
    #[arg(short, long)]
    config: Option<PathBuf>,

    /// Directory for pattern CSVs (and SVGs with --plots).
    #[arg(short, long)]
    out: Option<PathBuf>,

    #[arg(long)]
    plots: bool,
}

#[derive(Args)]
struct GenTrajectoriesArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,

    /// Override trajectories.count.
    #[arg(long)]
    count: Option<usize>,

    /// Output CSV file.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenDeploymentArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,

    /// Layout to write instead of the config's `deployment`, e.g. hex:2:500.
    #[arg(long)]
    source: Option<String>,

    /// Output JSON file.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct CutRow {
    angle_deg: f64,
    gain_db: f64,
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let mut cfg = args.scenario.load()?;
    if args.serial {
        cfg.parallel = false;
    }
    let report = aerobeam::run(&cfg)?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    write_report(&report, &args.out, args.plots)?;
    let s = &report.summary;
    println!(
        "{} trajectories, {} sectors: median outage {:.4}, median handovers/min {:.3}, {} handovers ({} ping-pong)",
        s.trajectories,
        s.sectors,
        s.median_outage_cost,
        s.median_handovers_per_min,
        s.total_handovers,
        s.total_ping_pongs
    );
    println!("report written to {}", args.out.display());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let cfg = args.scenario.load()?;
    let axis: SweepAxis = args.axis.parse()?;
    match aerobeam::sweep(&cfg, axis, &args.values) {
        Ok(runs) => {
            write_sweep(&args.axis, &runs, &args.out, args.plots)?;
            for (v, r) in &runs {
                println!(
                    "{}={v}: median outage {:.4}, median handovers/min {:.3}",
                    args.axis, r.summary.median_outage_cost, r.summary.median_handovers_per_min
                );
            }
            println!("sweep written to {}", args.out.display());
            Ok(())
        }
        Err(e) => {
            if !e.completed.is_empty() {
                write_sweep(&args.axis, &e.completed, &args.out, args.plots)?;
                log::warn!(
                    "partial results for {} value(s) written to {}",
                    e.completed.len(),
                    args.out.display()
                );
            }
            Err(e.into())
        }
    }
}

fn cmd_pattern(args: &PatternArgs) -> Result<()> {
    let element = match &args.config {
        Some(p) => ScenarioConfig::load(p)?.element,
        None => ElementPattern::default(),
    };
    let record = ArrayRecord {
        dz: args.dz,
        dy: args.dy,
        ..args.array
    };
    let spec = record.to_spec(element);
    spec.validate()?;
    let steer = SteeringAngles::new(args.theta0, args.phi0);
    let peak = array_gain_db(&spec, steer.direction(), steer);
    println!(
        "array {record}, steered to theta0={} phi0={}",
        steer.theta0_deg, steer.phi0_deg
    );
    println!("peak gain: {peak:.2} dBi");

    let planes: &[Plane] = match args.plane {
        PlaneArg::Azimuth => &[Plane::Azimuth],
        PlaneArg::Elevation => &[Plane::Elevation],
        PlaneArg::Both => &[Plane::Azimuth, Plane::Elevation],
    };
    for &plane in planes {
        let hpbw = half_power_beamwidth_deg(&spec, steer, plane)?;
        println!("HPBW {plane}: {hpbw:.2} deg");
        if let Some(dir) = &args.out {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let cut = pattern_cut(&spec, steer, plane, args.resolution)?;
            let rows: Vec<CutRow> = cut
                .iter()
                .map(|&(angle_deg, gain_db)| CutRow { angle_deg, gain_db })
                .collect();
            write_csv(&dir.join(format!("pattern_{plane}.csv")), &rows)?;
            if args.plots {
                let label = record.to_string();
                let svg = pattern_svg(&[(label.as_str(), &cut)], &format!("{plane} angle (deg)"), peak - 40.0)?;
                let path = dir.join(format!("pattern_{plane}.svg"));
                fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
            }
        }
    }
    Ok(())
}

fn scenario_terrain(cfg: &ScenarioConfig) -> Result<TerrainGrid> {
    Ok(TerrainGrid::from_source(&cfg.terrain, cfg.map_side_m)?)
}

fn cmd_gen_trajectories(args: &GenTrajectoriesArgs) -> Result<()> {
    let mut cfg = args.scenario.load()?;
    if let Some(n) = args.count {
        cfg.trajectories.count = n;
    }
    let terrain = scenario_terrain(&cfg)?;
    let set = generate_trajectories(&cfg.trajectories.params(), &terrain.area(), &terrain)?;
    if set.boundary_clipped {
        log::warn!("map too small for the requested path length; paths are clipped at the boundary");
    }
    ensure_parent(&args.out)?;
    save_trajectories(&args.out, &set.trajectories)?;
    println!(
        "{} trajectories written to {}",
        set.trajectories.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_gen_deployment(args: &GenDeploymentArgs) -> Result<()> {
    let cfg = args.scenario.load()?;
    let terrain = scenario_terrain(&cfg)?;
    let defaults = DeploymentDefaults {
        site_height_m: cfg.site_height_m,
        downtilt_deg: cfg.downtilt_deg,
        array: cfg.array.unwrap_or(ArrayRecord::new(8, 8)).to_spec(cfg.element),
    };
    let source = args.source.as_deref().unwrap_or(&cfg.deployment);
    let deployment = Deployment::from_source(source, &terrain, &defaults)?;
    ensure_parent(&args.out)?;
    fs::write(&args.out, deployment.to_json(&terrain)?).with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "{} sites, {} sectors written to {}",
        deployment.sites.len(),
        deployment.sectors.len(),
        args.out.display()
    );
    Ok(())
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();

    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Pattern(a) => cmd_pattern(a),
        Command::GenTrajectories(a) => cmd_gen_trajectories(a),
        Command::GenDeployment(a) => cmd_gen_deployment(a),
    }
}
