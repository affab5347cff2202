mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};

use dotd_core::geometry::ElevationCap;
use dotd_core::orbital::{snapshot_series, TimeGrid};
use dotd_core::report::{
    emit, run_experiment, synthetic_walker, reference_scenarios, write_edge_list, Destination, Format, MetricsRow,
    WalkerParams,
};
use dotd_core::routing::RouteMetric;
use dotd_core::tle::{fetch_tle, format_tle, parse_tle_with, ParseOptions, TleRecord};
use dotd_core::topology::{run_algorithm, Algorithm, SelectionOrder};

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "dotd", version, about = "Time-dependent ISL topology design for LEO constellations")]
#[command(arg_required_else_help = true)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Download a TLE document to a file.
    Fetch(FetchArgs),
    /// Write the per-slot link list of each algorithm.
    Topology(RunArgs),
    /// Route the configured scenarios and write per-slot metrics.
    Route(RunArgs),
    /// Write the persistent-link count of each slot.
    Churn(RunArgs),
    /// Generate a synthetic Walker-delta constellation as TLE text.
    Walker(WalkerArgs),
}

#[derive(Args, Debug)]
struct FetchArgs {
    #[arg(long)]
    fetch_url: Option<String>,
    /// Seconds before the request is abandoned.
    #[arg(long)]
    timeout: Option<f64>,
    /// Destination file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TLE file to read.
    #[arg(long, conflicts_with = "fetch_url")]
    tle: Option<PathBuf>,
    /// Download the TLE document instead of reading a file.
    #[arg(long)]
    fetch_url: Option<String>,
    /// Grid start (RFC 3339); defaults to the newest TLE epoch.
    #[arg(long)]
    start: Option<DateTime<Utc>>,
    /// Slot length in seconds.
    #[arg(long)]
    tau: Option<f64>,
    /// Horizon in seconds.
    #[arg(long)]
    horizon: Option<f64>,
    /// Comma-separated list of dotd, greedy, plusgrid.
    #[arg(long, value_delimiter = ',')]
    algorithm: Option<Vec<Algorithm>>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    /// Seed of the synthetic constellation when `[walker]` is the source.
    #[arg(long)]
    seed: Option<u64>,
    /// Minimum ground-station elevation, degrees.
    #[arg(long)]
    theta_min: Option<f64>,
    /// Upper elevation bound: computed or fixed-90.
    #[arg(long, value_parser = parse_cap)]
    theta_max_mode: Option<ElevationCap>,
    /// Select links satellite by satellite instead of from one global list.
    #[arg(long)]
    compat_alg1_order: bool,
    /// Restart accumulated scores every this many slots.
    #[arg(long)]
    score_window: Option<usize>,
    /// Route edge weight: latency or score.
    #[arg(long, value_parser = parse_metric)]
    route_metric: Option<RouteMetric>,
    /// Accept TLE lines whose checksum digit is wrong.
    #[arg(long)]
    permissive_checksum: bool,
}

#[derive(Args, Debug)]
struct WalkerArgs {
    #[arg(long, default_value_t = 8)]
    planes: usize,
    #[arg(long, default_value_t = 12)]
    sats: usize,
    /// km
    #[arg(long, default_value_t = 550.0)]
    altitude: f64,
    /// degrees
    #[arg(long, default_value_t = 53.0)]
    inclination: f64,
    #[arg(long, default_value_t = 1)]
    phasing: usize,
    /// Sets both RAAN and phase jitter, degrees.
    #[arg(long)]
    jitter: Option<f64>,
    #[arg(long)]
    raan_jitter: Option<f64>,
    #[arg(long)]
    phase_jitter: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Epoch of every record (RFC 3339).
    #[arg(long)]
    epoch: Option<DateTime<Utc>>,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_cap(s: &str) -> Result<ElevationCap, String> {
    match s {
        "computed" => Ok(ElevationCap::Computed),
        "fixed-90" | "fixed90" | "90" => Ok(ElevationCap::Fixed90),
        _ => Err(format!("unknown elevation cap {s:?} (expected computed or fixed-90)")),
    }
}

fn parse_metric(s: &str) -> Result<RouteMetric, String> {
    match s {
        "latency" => Ok(RouteMetric::Latency),
        "score" => Ok(RouteMetric::Score),
        _ => Err(format!("unknown route metric {s:?} (expected latency or score)")),
    }
}

fn destination(path: Option<PathBuf>) -> Destination {
    path.map_or(Destination::Stdout, Destination::File)
}

/// Everything a topology/route/churn run needs after flags override the file.
struct Prepared {
    cfg: RunConfig,
    records: Vec<TleRecord>,
    grid: TimeGrid,
    algorithms: Vec<Algorithm>,
    format: Format,
    output: Destination,
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn load_records(cfg: &RunConfig, permissive: bool) -> Result<Vec<TleRecord>> {
    let timeout = Duration::from_secs_f64(cfg.fetch_timeout_secs);
    let (text, origin) = if let Some(path) = &cfg.tle {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read TLE file {}", path.display()))?;
        (text, path.display().to_string())
    } else if let Some(url) = &cfg.fetch_url {
        (fetch_tle(url, timeout)?, url.clone())
    } else if let Some(walker) = &cfg.walker {
        let mut params = walker.clone();
        if let Some(seed) = cfg.seed {
            params.seed = seed;
        }
        return Ok(synthetic_walker(&params));
    } else {
        bail!("no satellite source: pass --tle or --fetch-url, or set tle, fetch_url or [walker] in the config");
    };
    // Tolerated checksum problems are logged by the parser.
    let (records, _) = parse_tle_with(&text, ParseOptions { permissive_checksum: permissive })
        .with_context(|| format!("cannot parse {origin}"))?;
    if records.is_empty() {
        bail!("{origin} contains no TLE records");
    }
    Ok(records)
}

fn prepare(config: Option<&PathBuf>, args: RunArgs) -> Result<Prepared> {
    let mut cfg = load_config(config)?;
    if let Some(tle) = args.tle {
        cfg.tle = Some(tle);
        cfg.fetch_url = None;
    }
    if let Some(url) = args.fetch_url {
        cfg.fetch_url = Some(url);
        cfg.tle = None;
    }
    if args.start.is_some() {
        cfg.grid.start = args.start;
    }
    cfg.grid.tau = args.tau.unwrap_or(cfg.grid.tau);
    cfg.grid.horizon = args.horizon.unwrap_or(cfg.grid.horizon);
    cfg.seed = args.seed.or(cfg.seed);
    if let Some(t) = args.theta_min {
        cfg.visibility.min_elevation = t;
    }
    if let Some(cap) = args.theta_max_mode {
        cfg.visibility.max_elevation_mode = cap;
    }
    if args.compat_alg1_order {
        cfg.topology.selection_order = SelectionOrder::PerSatellite;
    }
    if args.score_window.is_some() {
        cfg.topology.score_window = args.score_window;
    }
    if let Some(m) = args.route_metric {
        cfg.route_metric = m;
    }
    cfg.validate()?;
    cfg.topology.visibility = cfg.visibility;
    cfg.topology.radio = cfg.radio;

    let algorithms = match args.algorithm {
        Some(list) => list,
        None => match &cfg.algorithms {
            Some(names) => names
                .iter()
                .map(|n| n.parse::<Algorithm>().map_err(|e| anyhow!("invalid algorithms entry: {e}")))
                .collect::<Result<_>>()?,
            None => Algorithm::ALL.to_vec(),
        },
    };
    if algorithms.is_empty() {
        bail!("no algorithm selected");
    }

    let records = load_records(&cfg, args.permissive_checksum)?;
    let start = cfg
        .grid
        .start
        .unwrap_or_else(|| records.iter().map(|r| r.epoch).max().expect("records are nonempty"));
    let grid = TimeGrid::new(start, cfg.grid.tau, cfg.grid.horizon)?;
    let format = args.format.or(cfg.format).unwrap_or_default();
    let output = destination(args.output.or_else(|| cfg.output.clone()));
    log::info!("{} satellites, {} slots from {start}", records.len(), grid.slot_count() + 1);
    Ok(Prepared { cfg, records, grid, algorithms, format, output })
}

fn run_rows(p: &Prepared, with_scenarios: bool) -> Result<Vec<MetricsRow>> {
    let scenarios = if with_scenarios { p.cfg.scenarios.clone().unwrap_or_else(reference_scenarios) } else { Vec::new() };
    Ok(run_experiment(&p.records, &p.grid, &scenarios, &p.algorithms, &p.cfg.topology, p.cfg.route_metric)?)
}

fn cmd_fetch(config: Option<&PathBuf>, args: FetchArgs) -> Result<()> {
    let cfg = load_config(config)?;
    let url = args.fetch_url.or(cfg.fetch_url).context("fetch needs --fetch-url or fetch_url in the config")?;
    let secs = args.timeout.unwrap_or(cfg.fetch_timeout_secs);
    if !(secs > 0.0) {
        bail!("timeout must be positive");
    }
    let text = fetch_tle(&url, Duration::from_secs_f64(secs))?;
    match parse_tle_with(&text, ParseOptions { permissive_checksum: true }) {
        Ok((records, _)) => log::info!("fetched {} records from {url}", records.len()),
        Err(e) => log::warn!("{url} did not parse as TLE: {e}"),
    }
    destination(args.output.or(cfg.output)).write_with(|w| {
        w.write_all(text.as_bytes())
            .map_err(|source| dotd_core::report::ReportError::Io { path: "fetched document".into(), source })
    })?;
    Ok(())
}

fn cmd_topology(config: Option<&PathBuf>, args: RunArgs) -> Result<()> {
    let p = prepare(config, args)?;
    let snapshots = snapshot_series(&p.records, &p.grid)?;
    let runs = p
        .algorithms
        .iter()
        .map(|&alg| run_algorithm(alg, &snapshots, &p.records, &p.cfg.topology))
        .collect::<Result<Vec<_>, _>>()?;
    p.output.write_with(|w| write_edge_list(&runs, w))?;
    Ok(())
}

fn cmd_route(config: Option<&PathBuf>, args: RunArgs) -> Result<()> {
    let p = prepare(config, args)?;
    let rows: Vec<MetricsRow> = run_rows(&p, true)?.into_iter().filter(|r| !r.is_churn()).collect();
    emit(&rows, p.format, &p.output)?;
    Ok(())
}

fn cmd_churn(config: Option<&PathBuf>, args: RunArgs) -> Result<()> {
    let p = prepare(config, args)?;
    let rows = run_rows(&p, false)?;
    emit(&rows, p.format, &p.output)?;
    Ok(())
}

fn cmd_walker(args: WalkerArgs) -> Result<()> {
    if args.planes == 0 || args.sats == 0 {
        bail!("--planes and --sats must be at least 1");
    }
    let defaults = WalkerParams::default();
    let params = WalkerParams {
        planes: args.planes,
        sats_per_plane: args.sats,
        altitude: args.altitude,
        inclination: args.inclination,
        phasing: args.phasing,
        raan_jitter: args.raan_jitter.or(args.jitter).unwrap_or(0.0),
        phase_jitter: args.phase_jitter.or(args.jitter).unwrap_or(0.0),
        seed: args.seed,
        epoch: args.epoch.unwrap_or(defaults.epoch),
    };
    if !(0.0..=180.0).contains(&params.inclination) || !(params.altitude > 0.0) {
        bail!("inclination must be in [0, 180] and altitude positive");
    }
    let text = format_tle(&synthetic_walker(&params));
    destination(args.output).write_with(|w| {
        w.write_all(text.as_bytes())
            .map_err(|source| dotd_core::report::ReportError::Io { path: "TLE output".into(), source })
    })?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let config = cli.config.as_ref();
    let result = match cli.command {
        Command::Fetch(a) => cmd_fetch(config, a),
        Command::Topology(a) => cmd_topology(config, a),
        Command::Route(a) => cmd_route(config, a),
        Command::Churn(a) => cmd_churn(config, a),
        Command::Walker(a) => cmd_walker(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
