use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use asyncap::bounds::{sweep, ChannelBounds, Sweep};
use asyncap::channel_file::{bundled, bundled_names, ChannelFile};
use asyncap::sim::{run_experiment, Scheme, SimConfig, SimResult, WindowExpiry, DEFAULT_MAX_ASYNC_LEVEL};
use asyncap::simplex::GridSpec;
use asyncap::{Dist, Error};

const OUTPUT_SCHEMA_VERSION: u32 = 1;
const CSV_HEADER: &str = "rate,alpha_lower,alpha_upper,train_lower,train_upper,eta";
const THREADS_ENV: &str = "ASYNC_CAP_THREADS";

const EXIT_INPUT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_CONFLICT: u8 = 4;

#[derive(Parser)]
#[command(name = "asyncap", version, about = "Asynchronous channel capacity bounds and decoder simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate exponent bounds over a set of rates.
    Bounds(BoundsArgs),
    /// Run a Monte-Carlo experiment and print the result as JSON.
    Simulate(SimulateArgs),
    /// Inspect bundled or user channel files.
    Channels {
        #[command(subcommand)]
        action: ChannelsAction,
    },
}

#[derive(Args)]
struct BoundsArgs {
    /// Channel file, or the name of a bundled channel.
    channel: String,
    /// Comma-separated rates in nats; `C` stands for the capacity.
    #[arg(long, value_delimiter = ',', conflicts_with = "rate_grid")]
    rates: Option<Vec<String>>,
    /// Evaluate at C*k/N for k = 1..N.
    #[arg(long, value_name = "N")]
    rate_grid: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, default_value_t = 0.02)]
    delta_step: f64,
    #[arg(long, default_value_t = 2)]
    rounds: u32,
    /// Also write the table as CSV to this file.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Joint,
    Training,
    Genie,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExpiryArg {
    Random,
    Resume,
}

#[derive(Args)]
struct SimulateArgs {
    channel: String,
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    alpha: f64,
    /// Number of messages.
    #[arg(long = "M", visible_alias = "messages", default_value_t = 2)]
    messages: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Typicality slack (joint scheme; default 0.05).
    #[arg(long)]
    mu: Option<f64>,
    /// Preamble fraction (training scheme).
    #[arg(long)]
    eta: Option<f64>,
    /// Comma-separated codebook input distribution.
    #[arg(long, value_delimiter = ',')]
    input_dist: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_MAX_ASYNC_LEVEL)]
    max_async_level: u64,
    /// Joint decoder behavior when its decoding window closes.
    #[arg(long, value_enum)]
    window_expiry: Option<ExpiryArg>,
    /// Append a summary row to this CSV file.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ChannelsAction {
    /// Names of the bundled channels.
    List,
    /// Check a channel file and print its capacity and threshold.
    Validate { channel: String },
    /// Print a channel file in canonical form.
    Show { channel: String },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Infeasible(String),
    Conflict(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) => Failure::Conflict(e.to_string()),
            Error::Infeasible { .. } | Error::RateOutOfRange { .. } => Failure::Infeasible(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFLICT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Bounds(a) => cmd_bounds(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Channels { action } => cmd_channels(action),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Input(m) => (EXIT_INPUT, m),
                Failure::Infeasible(m) => (EXIT_INFEASIBLE, m),
                Failure::Conflict(m) => (EXIT_CONFLICT, m),
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn fmt(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.6}")
    }
}

fn cmd_bounds(a: BoundsArgs) -> Result<(), Failure> {
    let file = ChannelFile::load(&a.channel)?;
    let q = file.to_channel()?;
    let grid = GridSpec {
        simplex_step: a.step,
        delta_step: a.delta_step,
        refine_rounds: a.rounds,
        ..GridSpec::default()
    };
    grid.validate()?;
    let capacity = ChannelBounds::new(&q)?.capacity().capacity;
    let rates: Vec<f64> = match (&a.rates, a.rate_grid) {
        (Some(list), _) => list
            .iter()
            .map(|s| match s.trim() {
                "C" | "c" => Ok(capacity),
                t => t.parse::<f64>().map_err(|_| Failure::Input(format!("bad rate '{t}'"))),
            })
            .collect::<Result<_, _>>()?,
        (None, grid_n) => {
            let k = grid_n.unwrap_or(10);
            if k == 0 {
                return Err(Failure::Input("--rate-grid must be positive".into()));
            }
            (1..=k).map(|i| capacity * i as f64 / k as f64).collect()
        }
    };
    let s = sweep(&q, &rates, &grid)?;
    print_table(&file.name, &s);
    if let Some(path) = &a.csv {
        std::fs::write(path, csv_table(&s))?;
    }
    let mut first_error = None;
    for row in &s.rows {
        if let Err(e) = &row.values {
            eprintln!("rate {}: {e}", row.rate);
            first_error.get_or_insert_with(|| e.clone());
        }
    }
    match first_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn print_table(name: &str, s: &Sweep) {
    let h = &s.header;
    println!("channel: {name}");
    println!("capacity: {}", fmt(h.capacity));
    println!("sync_threshold: {}", fmt(h.sync_threshold));
    println!("m1: {}", fmt(h.m1));
    println!("m2: {}", fmt(h.m2));
    println!("discontinuous_at_capacity: {}", h.discontinuous_at_capacity);
    println!("discontinuous_at_zero: {}", h.discontinuous_at_zero);
    println!();
    println!(
        "{:>10} {:>12} {:>12} {:>12} {:>12} {:>10}",
        "rate", "alpha_lower", "alpha_upper", "train_lower", "train_upper", "eta"
    );
    for row in &s.rows {
        if let Ok(v) = &row.values {
            println!(
                "{:>10} {:>12} {:>12} {:>12} {:>12} {:>10}",
                fmt(row.rate),
                fmt(v.alpha_lower.alpha),
                fmt(v.alpha_upper.alpha),
                fmt(v.train_lower),
                fmt(v.train_upper),
                fmt(v.eta)
            );
        }
    }
}

fn csv_num(v: f64) -> String {
    if v.is_infinite() {
        fmt(v)
    } else {
        format!("{v}")
    }
}

fn csv_table(s: &Sweep) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for row in &s.rows {
        if let Ok(v) = &row.values {
            let cells = [
                row.rate,
                v.alpha_lower.alpha,
                v.alpha_upper.alpha,
                v.train_lower,
                v.train_upper,
                v.eta,
            ];
            out.push_str(&cells.map(csv_num).join(","));
            out.push('\n');
        }
    }
    out
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    schema_version: u32,
    channel: &'a str,
    config: &'a SimConfig,
    result: &'a SimResult,
}

fn threads_from_env() -> Result<usize, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("{THREADS_ENV}='{v}' is not a thread count"))),
        Err(_) => Ok(0),
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Failure> {
    let file = ChannelFile::load(&a.channel)?;
    let q = file.to_channel()?;
    let scheme = match a.scheme {
        SchemeArg::Joint => Scheme::Joint,
        SchemeArg::Training => Scheme::Training,
        SchemeArg::Genie => Scheme::Genie,
    };
    let mut cfg = SimConfig::new(scheme, a.n, a.alpha, a.messages, a.trials, a.seed);
    if a.mu.is_some() {
        cfg.mu = a.mu;
    }
    cfg.eta = a.eta;
    cfg.max_async_level = a.max_async_level;
    cfg.threads = threads_from_env()?;
    if let Some(e) = a.window_expiry {
        cfg.window_expiry = match e {
            ExpiryArg::Random => WindowExpiry::DeclareRandom,
            ExpiryArg::Resume => WindowExpiry::Resume,
        };
    }
    if let Some(p) = a.input_dist {
        cfg.input_dist = Some(Dist::new(p)?);
    }
    let result = run_experiment(&q, &cfg)?;
    let out = SimulateOutput {
        schema_version: OUTPUT_SCHEMA_VERSION,
        channel: &file.name,
        config: &cfg,
        result: &result,
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("results serialize"));
    if let Some(path) = &a.csv {
        let fresh = !path.exists();
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        if fresh {
            writeln!(
                f,
                "channel,scheme,n,alpha,messages,trials,seed,max_error_rate,avg_error_rate,\
                 mean_reaction_delay,empirical_rate,false_alarm_rate,miss_rate,ci_halfwidth"
            )?;
        }
        let scheme = serde_json::to_value(cfg.scheme).expect("scheme serializes");
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            file.name,
            scheme.as_str().unwrap_or_default(),
            cfg.n,
            cfg.alpha,
            cfg.messages,
            cfg.trials,
            cfg.seed,
            result.max_error_rate,
            result.avg_error_rate,
            result.mean_reaction_delay,
            csv_num(result.empirical_rate),
            result.false_alarm_rate,
            result.miss_rate,
            result.ci_halfwidth
        )?;
    }
    Ok(())
}

fn cmd_channels(action: ChannelsAction) -> Result<(), Failure> {
    match action {
        ChannelsAction::List => {
            for name in bundled_names() {
                let f = bundled(name).expect("listed names exist");
                println!("{name}\t{} inputs, {} outputs", f.input_alphabet.len(), f.output_alphabet.len());
            }
        }
        ChannelsAction::Validate { channel } => {
            let file = ChannelFile::load(&channel)?;
            let q = file.to_channel()?;
            let cb = ChannelBounds::new(&q)?;
            println!("name: {}", file.name);
            println!("inputs: {}", q.inputs());
            println!("outputs: {}", q.outputs());
            println!("capacity: {}", fmt(cb.capacity().capacity));
            println!("sync_threshold: {}", fmt(cb.sync_threshold()));
        }
        ChannelsAction::Show { channel } => {
            println!("{}", ChannelFile::load(&channel)?.to_json());
        }
    }
    Ok(())
}
