//! Command-line front end for localized quantile intervals.
//!
//! Subcommands:
//!
//! * `ci` — intervals from a CSV file (one JSON record per line);
//! * `simulate` — coverage/width studies (CSV);
//! * `target` — true localized quantiles of the synthetic models (CSV);
//! * `indist` — the indistinguishable-alternative quantities (JSON).
//!
//! Exit status: 0 on success, 2 on usage or configuration errors, 3 on data
//! errors, 4 when no sample point has positive kernel weight, 1 otherwise.

pub mod data;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use localq::experiments::{
    default_x0_grid, parse_config, preset, run_experiment, run_experiment_with_threads,
    ExperimentConfig, CSV_HEADER,
};
use localq::{
    df_quantile_ci, qr_interval, wq_interval, IndistinguishablePair, IntervalResult, KernelFamily,
    LocalizationSpec, LocalizedModel, NoiseSetting, QuantileSpec, RngStream, Signal,
    SyntheticModel,
};

use crate::data::{load_csv, load_responses, DataError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("no observation has positive kernel weight: {0}")]
    NoLocalData(String),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::NoLocalData(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl From<localq::Error> for CliError {
    fn from(e: localq::Error) -> Self {
        use localq::Error as E;
        match e {
            E::AllWeightsZero => CliError::NoLocalData(e.to_string()),
            E::InvalidParameter(_) | E::Domain(_) | E::DimensionMismatch { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Other(other.into()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Other(e.into())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "localq",
    version,
    about = "Confidence intervals for kernel-localized quantiles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Confidence intervals for a CSV dataset, one JSON record per line
    Ci(CiArgs),
    /// Monte Carlo coverage and width study, CSV output
    Simulate(SimulateArgs),
    /// True localized quantiles of a synthetic model, CSV output
    Target(TargetArgs),
    /// Nearly indistinguishable alternative with a distant median, JSON output
    Indist(IndistArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Weighted quantile
    Wq,
    /// Quantile rejection (requires --seed)
    Qr,
    /// Order-statistic interval of the raw responses, ignoring covariates
    Dfq,
    /// Weighted quantile and quantile rejection
    Both,
}

fn parse_kernel(s: &str) -> Result<KernelFamily, String> {
    s.parse().map_err(|e: localq::Error| e.to_string())
}

fn parse_signal(s: &str) -> Result<Signal, String> {
    s.parse().map_err(|e: localq::Error| e.to_string())
}

fn parse_setting(s: &str) -> Result<NoiseSetting, String> {
    s.parse().map_err(|e: localq::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct CiArgs {
    /// CSV file with a header row
    #[arg(long)]
    pub data: PathBuf,
    /// Covariate columns, comma-separated
    #[arg(long, value_delimiter = ',')]
    pub x_cols: Vec<String>,
    /// Response column
    #[arg(long)]
    pub y_col: String,
    /// Point of interest; repeat for several points. With one covariate a
    /// comma list gives several points, otherwise one coordinate per column.
    #[arg(long)]
    pub x0: Vec<String>,
    /// Bandwidth; repeat for several. With one covariate a comma list gives
    /// several bandwidths, otherwise one per column (or one for all columns).
    #[arg(long)]
    pub h: Vec<String>,
    /// triangular, biweight, uniform or gaussian
    #[arg(long, default_value = "triangular", value_parser = parse_kernel)]
    pub kernel: KernelFamily,
    /// Quantile level in (0, 1)
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Total miscoverage level
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Lower-tail miscoverage level (default alpha / 2)
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long, value_enum, default_value = "wq")]
    pub method: MethodArg,
    /// Master seed for quantile rejection
    #[arg(long)]
    pub seed: Option<u64>,
    /// Standardize covariates; bandwidths are then in standard-deviation units
    #[arg(long)]
    pub normalize: bool,
    /// Interpret --x0 in raw covariate units (requires --normalize)
    #[arg(long, requires = "normalize")]
    pub x0_raw: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Flat key = value configuration file
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// paper-spikes-s1, sanity-flat or full-grid
    #[arg(long)]
    pub preset: Option<String>,
    /// Output CSV path (standard output if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Override the number of replicates
    #[arg(long)]
    pub n_sim: Option<usize>,
    /// Override the master seed
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TargetArgs {
    /// sanity-flat: flat signal at level 1
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, value_parser = parse_signal)]
    pub signal: Option<Signal>,
    #[arg(long, default_value = "1", value_parser = parse_setting)]
    pub setting: NoiseSetting,
    #[arg(long, default_value = "triangular", value_parser = parse_kernel)]
    pub kernel: KernelFamily,
    /// Bandwidths, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "0.04")]
    pub h: Vec<f64>,
    /// Quantile levels, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub p: Vec<f64>,
    /// Centres, comma-separated (default: the signal's standard grid)
    #[arg(long, value_delimiter = ',')]
    pub x0: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct IndistArgs {
    #[arg(long, default_value = "spikes", value_parser = parse_signal)]
    pub signal: Signal,
    #[arg(long, default_value = "1", value_parser = parse_setting)]
    pub setting: NoiseSetting,
    #[arg(long, default_value_t = 0.47)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.04)]
    pub h: f64,
    /// Half-width of the modified window
    #[arg(long, default_value_t = 0.012)]
    pub h0: f64,
    /// Level to which lower response mass is moved
    #[arg(long, default_value_t = 2.7)]
    pub theta_star: f64,
}

/// Parse `args`, run the command, and return the process exit status.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    match run(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Ci(args) => cmd_ci(&args, out, err),
        Command::Simulate(args) => cmd_simulate(&args, out),
        Command::Target(args) => cmd_target(&args, out),
        Command::Indist(args) => cmd_indist(&args, out),
    }
}

/// Finite values as JSON numbers, infinities as the strings `"-inf"`/`"inf"`.
pub fn endpoint_to_json(v: f64) -> Value {
    if v == f64::INFINITY {
        json!("inf")
    } else if v == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        json!(v)
    }
}

/// Inverse of [`endpoint_to_json`].
pub fn endpoint_from_json(v: &Value) -> Option<f64> {
    match v {
        Value::String(s) if s == "inf" => Some(f64::INFINITY),
        Value::String(s) if s == "-inf" => Some(f64::NEG_INFINITY),
        other => other.as_f64(),
    }
}

fn parse_values(raw: &[String], flag: &str) -> Result<Vec<Vec<f64>>, CliError> {
    raw.iter()
        .map(|occurrence| {
            occurrence
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| CliError::Usage(format!("--{flag}: bad number '{s}'")))
                })
                .collect()
        })
        .collect()
}

/// Group `--x0`/`--h` occurrences into points of dimension `dim`.
fn points(
    raw: &[String],
    flag: &str,
    dim: usize,
    broadcast: bool,
) -> Result<Vec<Vec<f64>>, CliError> {
    let groups = parse_values(raw, flag)?;
    if groups.is_empty() {
        return Err(CliError::Usage(format!("--{flag} is required")));
    }
    if dim == 1 {
        return Ok(groups.into_iter().flatten().map(|v| vec![v]).collect());
    }
    groups
        .into_iter()
        .map(|g| match g.len() {
            1 if broadcast => Ok(vec![g[0]; dim]),
            l if l == dim => Ok(g),
            l => Err(CliError::Usage(format!(
                "--{flag} has {l} values but there are {dim} covariates"
            ))),
        })
        .collect()
}

fn interval_record(ci: &IntervalResult, q: &QuantileSpec) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("method".into(), json!(ci.method.tag()));
    m.insert("lower".into(), endpoint_to_json(ci.lower));
    m.insert("upper".into(), endpoint_to_json(ci.upper));
    m.insert("n_eff".into(), json!(ci.n_eff));
    m.insert("accepted".into(), json!(ci.accepted));
    m.insert("p".into(), json!(q.p()));
    m.insert("alpha".into(), json!(q.alpha()));
    m.insert("alpha1".into(), json!(q.alpha1()));
    m.insert("low_n_eff".into(), json!(ci.low_effective_sample_size()));
    m
}

fn cmd_ci(args: &CiArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let q = QuantileSpec::new(args.p, args.alpha, args.alpha1.unwrap_or(args.alpha / 2.0))?;
    if matches!(args.method, MethodArg::Qr | MethodArg::Both) && args.seed.is_none() {
        return Err(CliError::Usage("--method qr requires --seed".into()));
    }

    if args.method == MethodArg::Dfq {
        let ys = load_responses(&args.data, &args.y_col)?;
        let ci = df_quantile_ci(&ys, q.p(), q.alpha1(), q.alpha2())?;
        let mut m = interval_record(&ci, &q);
        m.insert("x0".into(), Value::Null);
        m.insert("h".into(), Value::Null);
        writeln!(out, "{}", Value::Object(m))?;
        return Ok(());
    }

    if args.x_cols.is_empty() {
        return Err(CliError::Usage("--x-cols is required for wq and qr".into()));
    }
    let loaded = load_csv(&args.data, &args.x_cols, &args.y_col, args.normalize)?;
    if let Some(norm) = &loaded.normalization {
        writeln!(err, "{norm}")?;
    }
    let dim = args.x_cols.len();
    let centres = points(&args.x0, "x0", dim, false)?;
    let bandwidths = points(&args.h, "h", dim, true)?;
    let methods: &[MethodArg] = match args.method {
        MethodArg::Both => &[MethodArg::Wq, MethodArg::Qr],
        MethodArg::Wq => &[MethodArg::Wq],
        _ => &[MethodArg::Qr],
    };

    for given in &centres {
        let x0 = match (&loaded.normalization, args.x0_raw) {
            (Some(norm), true) => norm.forward(given),
            _ => given.clone(),
        };
        for h in &bandwidths {
            let spec = LocalizationSpec::new(args.kernel, x0.clone(), h.clone())?;
            for &method in methods {
                let ci = match method {
                    MethodArg::Wq => wq_interval(&loaded.dataset, &spec, &q)?,
                    _ => {
                        let rng = RngStream::new(args.seed.unwrap_or_default(), 0);
                        qr_interval(&loaded.dataset, &spec, &q, rng)?
                    }
                };
                let mut m = interval_record(&ci, &q);
                m.insert("x0".into(), json!(x0));
                if let Some(norm) = &loaded.normalization {
                    m.insert("x0_raw".into(), json!(norm.inverse(&x0)));
                }
                m.insert("h".into(), json!(h));
                m.insert("kernel".into(), json!(args.kernel.name()));
                m.insert("theta_tilde".into(), json!(ci.theta_tilde));
                writeln!(out, "{}", Value::Object(m))?;
            }
        }
    }
    Ok(())
}

fn experiment_batch(args: &SimulateArgs) -> Result<Vec<ExperimentConfig>, CliError> {
    let mut batch = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            vec![parse_config(&text)?]
        }
        (None, Some(name)) => preset(name)?,
        (None, None) => return Err(CliError::Usage("give --config or --preset".into())),
    };
    for config in &mut batch {
        if let Some(n_sim) = args.n_sim {
            config.n_sim = n_sim;
        }
        if let Some(seed) = args.seed {
            config.master_seed = seed;
        }
        config.validate()?;
    }
    Ok(batch)
}

fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let batch = experiment_batch(args)?;
    if args.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let sink: Box<dyn Write + '_> = match &args.out {
        Some(path) => Box::new(fs::File::create(path)?),
        None => Box::new(out),
    };
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(CSV_HEADER)?;
    for config in &batch {
        let cells = match args.threads {
            Some(t) => run_experiment_with_threads(config, t)?,
            None => run_experiment(config)?,
        };
        for cell in &cells {
            writer.write_record(cell.csv_record(config))?;
        }
        writer.flush()?;
    }
    Ok(())
}

fn cmd_target(args: &TargetArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let preset_signal = match args.preset.as_deref() {
        None => None,
        Some("sanity-flat") => Some(Signal::Flat(1.0)),
        Some(other) => {
            return Err(CliError::Usage(format!(
                "unknown target preset '{other}' (known: sanity-flat)"
            )))
        }
    };
    let signal = args.signal.or(preset_signal).unwrap_or(Signal::Spikes);
    let x0s = if args.x0.is_empty() {
        default_x0_grid(signal)
    } else {
        args.x0.clone()
    };
    let model = SyntheticModel::new(signal, args.setting);
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["signal", "setting", "kernel", "h", "p", "x0", "theta"])?;
    for &h in &args.h {
        for &x0 in &x0s {
            let spec = LocalizationSpec::univariate(args.kernel, x0, h)?;
            let local = LocalizedModel::new(&model, &spec)?;
            for &p in &args.p {
                let theta = local.quantile(p)?;
                writer.write_record([
                    signal.name(),
                    args.setting.number().to_string(),
                    args.kernel.name().to_string(),
                    h.to_string(),
                    p.to_string(),
                    x0.to_string(),
                    theta.to_string(),
                ])?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

fn cmd_indist(args: &IndistArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = SyntheticModel::new(args.signal, args.setting);
    let spec = LocalizationSpec::univariate(KernelFamily::Triangular, args.x0, args.h)?;
    let summary = IndistinguishablePair::new(&model, &spec, args.h0, args.theta_star)?.summary()?;
    let record = json!({
        "signal": args.signal.name(),
        "setting": args.setting.number(),
        "x0": args.x0,
        "h": args.h,
        "h0": args.h0,
        "theta_star": args.theta_star,
        "theta": summary.theta,
        "theta_prime": summary.theta_prime,
        "tv_distance": summary.tv_distance,
        "mixture_weight": summary.mixture_weight,
    });
    writeln!(out, "{record}")?;
    Ok(())
}
