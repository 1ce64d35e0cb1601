//! Command-line front end. Every output is written atomically: a temporary
//! file in the destination directory is renamed over the target.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytics::{
    average_filling, build_order_records, classify_regime, icdf_table, level_statistics,
    occupation_profile, order_count_grid, quote_series, returns_series, spread_histogram,
    summarize_dataset, AnalyticsError, OrderRecord, Regime, Weighting, WeightedSample, Window,
};
use crate::feed::{validate_stream, EventStream};
use crate::roundtrip::{fit_model, run_roundtrip, RoundtripError};
use crate::sim::{run_simulation, SimError, SimParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, message)
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::new(EXIT_IO, format!("{}: {e}", path.display()))
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        let code = match e {
            AnalyticsError::InvalidArgument(_) => EXIT_USAGE,
            _ => EXIT_VALIDATION,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        let code = match e {
            SimError::Invariant(_) => EXIT_INVARIANT,
            SimError::InvalidParams(_) | SimError::Config { .. } => EXIT_USAGE,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<RoundtripError> for CliError {
    fn from(e: RoundtripError) -> Self {
        let code = match e.stage {
            "simulate" | "validate" => EXIT_INVARIANT,
            _ => EXIT_VALIDATION,
        };
        CliError::new(code, e.to_string())
    }
}

type CliResult = Result<(), CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "lob-cushion",
    version,
    about = "Order book reconstruction, liquidity statistics and cushion simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the cushion model and write its event stream.
    Simulate(SimulateArgs),
    /// Replay a stream and write its quote series (and optionally per-order records).
    Reconstruct(ReconstructArgs),
    /// Compute one statistic from one or more event files.
    Analyze(AnalyzeArgs),
    /// Fit the model constants to an event stream and print them as JSON.
    Fit(FitArgs),
    /// Check stream integrity; exits 2 when violations are found.
    Validate(ValidateArgs),
    /// Simulate, validate, analyze and fit, then compare with the configuration.
    Roundtrip(RoundtripArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// `key = value` parameter file; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Destination event file.
    #[arg(long)]
    out: PathBuf,
    /// Run report; JSON when the name ends in `.json`, otherwise `key,value` CSV.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Overrides the seed from the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[arg(long)]
    events: PathBuf,
    /// Quote series CSV: one row per change of the best bid or ask.
    #[arg(long)]
    out: PathBuf,
    /// Optional per-order CSV with lifetimes and insertion prices.
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Analysis {
    /// Icdf of order lifetimes in ms.
    Lifetimes,
    /// Icdf of order volumes.
    Volumes,
    /// Icdf of relative insertion prices.
    Relprices,
    /// Time-averaged occupation around the midpoint.
    Occupation,
    /// Midpoint log returns.
    Returns,
    /// Time-weighted spread frequencies.
    Spread,
    /// Insertion counts and mean lifetimes per level.
    Levels,
    /// Mean resting orders per level, sampled.
    Filling,
    /// Sampled order counts and volumes by relative price bin.
    Grid,
    /// Order counts and mean lifetimes per regime.
    Regimes,
    /// One row of dataset characteristics per input file.
    Summary,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(value_enum)]
    analysis: Analysis,
    /// Event file; `summary` accepts the flag several times.
    #[arg(long, required = true)]
    events: Vec<PathBuf>,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sample weighting for icdfs: none, lifetime, volume, lifetime-volume.
    #[arg(long, default_value = "none")]
    weight: Weighting,
    /// Return horizon in ms.
    #[arg(long, default_value_t = 1000)]
    delta_ms: i64,
    /// Sampling interval in ms for returns, grids and filling.
    #[arg(long, default_value_t = 1000)]
    sample_ms: i64,
    /// Price levels per grid bin.
    #[arg(long, default_value_t = 1)]
    bin_ticks: i64,
    /// Cushion width in ticks for `regimes`; estimated from occupation when omitted.
    #[arg(long)]
    width: Option<f64>,
    /// Analysis window start; defaults to the market open in the header.
    #[arg(long)]
    open_ms: Option<i64>,
    /// Analysis window end; defaults to the market close in the header.
    #[arg(long)]
    close_ms: Option<i64>,
    /// Half-width of the relative price range, in half-ticks.
    #[arg(long, default_value_t = 200)]
    range_half_ticks: i64,
    /// Number of insertion levels for `levels` and `filling`.
    #[arg(long, default_value_t = 25)]
    levels: usize,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    events: PathBuf,
    /// Number of insertion levels entering the fits.
    #[arg(long, default_value_t = 25)]
    levels: usize,
    /// JSON output; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    events: PathBuf,
}

#[derive(Debug, Args)]
struct RoundtripArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON report; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Analyze(a) => analyze(a),
        Command::Fit(a) => fit(a),
        Command::Validate(a) => validate(a),
        Command::Roundtrip(a) => roundtrip(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn read_events(path: &Path) -> Result<EventStream, CliError> {
    EventStream::parse(&read_text(path)?)
        .map_err(|e| CliError::new(EXIT_VALIDATION, format!("{}: {e}", path.display())))
}

fn load_params(config: Option<&Path>, seed: Option<u64>) -> Result<SimParams, CliError> {
    let mut p = match config {
        Some(path) => SimParams::from_config_str(&read_text(path)?)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?,
        None => SimParams::default(),
    };
    if let Some(s) = seed {
        p.seed = s;
    }
    Ok(p)
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

fn distinct(inputs: &[&Path], output: Option<&Path>) -> CliResult {
    if let Some(out) = output {
        if let Some(clash) = inputs.iter().find(|i| same_file(i, out)) {
            return Err(CliError::usage(format!(
                "output {} would overwrite an input",
                clash.display()
            )));
        }
    }
    Ok(())
}

/// Writes via a temporary sibling and rename, so readers never see a
/// partial file.
fn write_atomic(path: &Path, content: &[u8]) -> CliResult {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(content).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, content: &str) -> CliResult {
    match out {
        Some(p) => write_atomic(p, content.as_bytes()),
        None => std::io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| CliError::new(EXIT_IO, format!("stdout: {e}"))),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::new(EXIT_INVARIANT, e.to_string()))
}

fn simulate(a: SimulateArgs) -> CliResult {
    let mut inputs = vec![];
    if let Some(c) = &a.config {
        inputs.push(c.as_path());
    }
    distinct(&inputs, Some(&a.out))?;
    distinct(&inputs, a.report.as_deref())?;
    if a.report.as_deref().is_some_and(|r| same_file(r, &a.out)) {
        return Err(CliError::usage("--report and --out must differ"));
    }
    let params = load_params(a.config.as_deref(), a.seed)?;
    let out = run_simulation(&params)?;
    write_atomic(&a.out, out.stream.to_text().as_bytes())?;
    if let Some(path) = &a.report {
        let text = if path.extension().is_some_and(|e| e == "json") {
            to_json(&out.report)?
        } else {
            let c = out.report.counters;
            let mut s = String::from("key,value\n");
            let _ = writeln!(s, "rng_family,{}", out.report.rng_family);
            for line in params.to_config_string().lines() {
                if let Some((k, v)) = line.split_once(" = ") {
                    let _ = writeln!(s, "{k},{v}");
                }
            }
            for (k, v) in [
                ("initial_orders", c.initial_orders),
                ("market_orders", c.market_orders),
                ("market_orders_skipped", c.market_orders_skipped),
                ("executions", c.executions),
                ("limit_orders", c.limit_orders),
                ("limit_orders_skipped", c.limit_orders_skipped),
                ("cancellations", c.cancellations),
                ("n_events", out.report.n_events as u64),
            ] {
                let _ = writeln!(s, "{k},{v}");
            }
            s
        };
        write_atomic(path, text.as_bytes())?;
    }
    Ok(())
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn records_csv(records: &[OrderRecord]) -> String {
    let mut s = String::from(
        "order_id,side,price_ticks,insertion_time_ms,initial_volume,removal_time_ms,\
         lifetime_ms,censored,midpoint_half_ticks,relative_insertion_price,insertion_level\n",
    );
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.order_id,
            r.side.code(),
            r.price_ticks,
            r.insertion_time_ms,
            r.initial_volume,
            opt(r.removal_time_ms),
            r.lifetime_ms,
            r.censored,
            opt(r.midpoint_at_insertion_half_ticks),
            opt(r.relative_insertion_price),
            opt(r.insertion_level()),
        );
    }
    s
}

fn reconstruct(a: ReconstructArgs) -> CliResult {
    distinct(&[&a.events], Some(&a.out))?;
    distinct(&[&a.events], a.records.as_deref())?;
    let stream = read_events(&a.events)?;
    let quotes = quote_series(&stream)?;
    let mut s = String::from("timestamp_ms,best_bid_ticks,best_ask_ticks,spread_ticks,midpoint_half_ticks\n");
    for p in quotes.points() {
        match p.quote {
            Some((bid, ask)) => {
                let _ = writeln!(s, "{},{bid},{ask},{},{}", p.timestamp_ms, ask - bid, ask + bid);
            }
            None => {
                let _ = writeln!(s, "{},,,,", p.timestamp_ms);
            }
        }
    }
    write_atomic(&a.out, s.as_bytes())?;
    if let Some(path) = &a.records {
        let records = build_order_records(&stream)?;
        write_atomic(path, records_csv(&records).as_bytes())?;
    }
    Ok(())
}

fn icdf_csv(header: &str, samples: &[WeightedSample]) -> Result<String, CliError> {
    let mut s = format!("{header},icdf\n");
    for (x, i) in icdf_table(samples)? {
        let _ = writeln!(s, "{x},{i}");
    }
    Ok(s)
}

fn analyze(a: AnalyzeArgs) -> CliResult {
    let inputs: Vec<&Path> = a.events.iter().map(PathBuf::as_path).collect();
    distinct(&inputs, a.out.as_deref())?;
    if a.analysis == Analysis::Summary {
        return summary(&a);
    }
    if a.events.len() != 1 {
        return Err(CliError::usage("this analysis takes exactly one --events file"));
    }
    let stream = read_events(&a.events[0])?;
    let window = Window::new(
        a.open_ms.unwrap_or(stream.market_open_ms),
        a.close_ms.unwrap_or(stream.market_close_ms),
    );
    if window.open_ms >= window.close_ms {
        return Err(CliError::usage("window must satisfy open < close"));
    }
    let in_window = |r: &&OrderRecord| window.contains_event(r.insertion_time_ms);

    let text = match a.analysis {
        Analysis::Lifetimes | Analysis::Volumes | Analysis::Relprices => {
            let records = build_order_records(&stream)?;
            let samples: Vec<WeightedSample> = records
                .iter()
                .filter(in_window)
                .filter_map(|r| {
                    let value = match a.analysis {
                        Analysis::Lifetimes => r.lifetime_ms as f64,
                        Analysis::Volumes => r.initial_volume as f64,
                        _ => r.relative_insertion_price?,
                    };
                    Some(WeightedSample::new(value, a.weight.weight(r)))
                })
                .collect();
            let header = match a.analysis {
                Analysis::Lifetimes => "lifetime_ms",
                Analysis::Volumes => "volume_shares",
                _ => "relative_insertion_price",
            };
            icdf_csv(header, &samples)?
        }
        Analysis::Occupation => {
            let profile = occupation_profile(&stream, window, a.range_half_ticks)?;
            let mut s = String::from("p_rel_half_ticks,o_av\n");
            for (h, o) in &profile.occupation {
                let _ = writeln!(s, "{h},{o}");
            }
            s
        }
        Analysis::Returns => {
            let quotes = quote_series(&stream)?;
            let mut s = String::from("t_ms,log_return\n");
            for r in returns_series(&quotes, window, a.delta_ms, a.sample_ms)? {
                let _ = writeln!(s, "{},{}", r.t_ms, r.r);
            }
            s
        }
        Analysis::Spread => {
            let quotes = quote_series(&stream)?;
            let mut s = String::from("spread_ticks,frequency\n");
            for (sp, f) in spread_histogram(&quotes, window)? {
                let _ = writeln!(s, "{sp},{f}");
            }
            s
        }
        Analysis::Levels => {
            let records: Vec<OrderRecord> = build_order_records(&stream)?
                .into_iter()
                .filter(|r| window.contains_event(r.insertion_time_ms))
                .collect();
            let stats = level_statistics(&records, a.levels);
            let mut s = String::from("level,insertion_count,mean_lifetime_ms\n");
            for l in &stats.levels {
                let _ = writeln!(s, "{},{},{}", l.level, l.insertion_count, opt(l.mean_lifetime_ms));
            }
            s
        }
        Analysis::Filling => {
            let mut s = String::from("level,mean_order_count\n");
            for (l, f) in average_filling(&stream, window, a.sample_ms, a.levels)?
                .iter()
                .enumerate()
            {
                let _ = writeln!(s, "{l},{f}");
            }
            s
        }
        Analysis::Grid => {
            let g = order_count_grid(&stream, window, a.range_half_ticks, a.sample_ms, a.bin_ticks)?;
            let mut s = String::from("t_ms,bin_start_half_ticks,order_count,volume\n");
            for (row, t) in g.times_ms.iter().enumerate() {
                for (col, b) in g.bin_starts_half_ticks.iter().enumerate() {
                    let c = g.cells[row][col];
                    let _ = writeln!(s, "{t},{b},{},{}", c.order_count, c.volume);
                }
            }
            s
        }
        Analysis::Regimes => {
            let width = match a.width {
                Some(w) => w,
                None => occupation_profile(&stream, window, a.range_half_ticks)?
                    .width
                    .map(|w| w.width_ticks())
                    .ok_or(AnalyticsError::EmptyProfile)?,
            };
            let records = build_order_records(&stream)?;
            let mut groups = std::collections::BTreeMap::<Regime, (u64, f64)>::new();
            for r in records.iter().filter(in_window) {
                let g = groups
                    .entry(classify_regime(r, width, stream.tick_size_cents))
                    .or_default();
                g.0 += 1;
                g.1 += r.lifetime_ms as f64;
            }
            let mut s = String::from("regime,order_count,mean_lifetime_ms\n");
            for (regime, (n, sum)) in groups {
                let _ = writeln!(s, "{},{n},{}", regime.label(), sum / n as f64);
            }
            s
        }
        Analysis::Summary => unreachable!("handled above"),
    };
    emit(a.out.as_deref(), &text)
}

fn summary(a: &AnalyzeArgs) -> CliResult {
    let mut s = String::from(
        "file,mean_spread_ticks,mean_midpoint_half_ticks,n_quote_changes,n_trades,\
         n_market_orders,n_limit_orders,traded_capital_cents,width_ticks,o_max,large_tick,\
         volatility_1min\n",
    );
    for path in &a.events {
        let stream = read_events(path)?;
        let d = summarize_dataset(&stream, a.range_half_ticks)
            .map_err(|e| CliError::from(e).with_context(path))?;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            path.display(),
            d.mean_spread_ticks,
            d.mean_midpoint_half_ticks,
            d.n_quote_changes,
            d.n_trades,
            d.n_market_orders,
            d.n_limit_orders,
            d.traded_capital_cents,
            opt(d.width_ticks),
            d.o_max,
            d.large_tick,
            opt(d.volatility_1min),
        );
    }
    emit(a.out.as_deref(), &s)
}

impl CliError {
    fn with_context(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

fn fit(a: FitArgs) -> CliResult {
    distinct(&[&a.events], a.out.as_deref())?;
    let stream = read_events(&a.events)?;
    let fitted = fit_model(&stream, a.levels)?;
    emit(a.out.as_deref(), &to_json(&fitted)?)
}

fn validate(a: ValidateArgs) -> CliResult {
    let stream = read_events(&a.events)?;
    let report = validate_stream(&stream);
    if report.is_ok() {
        println!("OK: {} events", stream.events.len());
        Ok(())
    } else {
        Err(CliError::new(
            EXIT_VALIDATION,
            format!("{} violation(s)\n{report}", report.violations.len()),
        ))
    }
}

fn roundtrip(a: RoundtripArgs) -> CliResult {
    let inputs: Vec<&Path> = a.config.iter().map(PathBuf::as_path).collect();
    distinct(&inputs, a.out.as_deref())?;
    let params = load_params(a.config.as_deref(), a.seed)?;
    let report = run_roundtrip(&params)?;
    emit(a.out.as_deref(), &to_json(&report)?)
}
