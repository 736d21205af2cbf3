//! Monte Carlo coverage and width studies on the synthetic models.
//!
//! Replicate `r` (1-based) samples its dataset from stream `r` of the master
//! seed; Quantile Rejection draws its acceptance uniforms from a sub-stream of
//! that replicate stream, one per `(x0, h)` cell. Results therefore do not
//! depend on how replicates are scheduled across threads.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interval::{IntervalResult, Method, QuantileSpec};
use crate::kernels::{KernelFamily, LocalizationSpec};
use crate::qr::qr_interval;
use crate::rng::RngStream;
use crate::synthetic::{sample_dataset, LocalizedModel, NoiseSetting, Signal, SyntheticModel};
use crate::wq::wq_interval;

/// Column header of the per-cell CSV report.
pub const CSV_HEADER: [&str; 12] = [
    "signal",
    "setting",
    "kernel",
    "p",
    "x0",
    "h",
    "method",
    "coverage",
    "mean_width",
    "frac_inf",
    "mean_neff",
    "theta_true",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: SyntheticModel,
    pub kernel: KernelFamily,
    pub bandwidths: Vec<f64>,
    pub x0_points: Vec<f64>,
    pub p: f64,
    pub alpha: f64,
    pub alpha1: f64,
    pub n: usize,
    pub n_sim: usize,
    pub master_seed: u64,
    pub methods: Vec<Method>,
}

impl ExperimentConfig {
    /// The simulation protocol of the coverage study for one signal and noise
    /// setting: triangular kernel, `h ∈ {0.1, 0.08, 0.06, 0.04}`, `p = 0.5`,
    /// `α = 0.1` split evenly, `n = 200`, `n_sim = 1000`, both methods.
    pub fn standard(signal: Signal, noise: NoiseSetting) -> Self {
        Self {
            model: SyntheticModel::new(signal, noise),
            kernel: KernelFamily::Triangular,
            bandwidths: vec![0.1, 0.08, 0.06, 0.04],
            x0_points: default_x0_grid(signal),
            p: 0.5,
            alpha: 0.1,
            alpha1: 0.05,
            n: 200,
            n_sim: 1000,
            master_seed: 20_240_501,
            methods: vec![Method::WeightedQuantile, Method::QuantileRejection],
        }
    }

    pub fn quantile_spec(&self) -> Result<QuantileSpec> {
        QuantileSpec::new(self.p, self.alpha, self.alpha1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_sim == 0 {
            return bad("n_sim must be at least 1".into());
        }
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.bandwidths.is_empty() || self.x0_points.is_empty() {
            return bad("at least one bandwidth and one x0 are required".into());
        }
        if let Some(h) = self
            .bandwidths
            .iter()
            .find(|h| !(h.is_finite() && **h > 0.0))
        {
            return bad(format!("bandwidth {h} is not positive"));
        }
        if let Some(x) = self.x0_points.iter().find(|x| !x.is_finite()) {
            return bad(format!("x0 {x} is not finite"));
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        if self.methods.contains(&Method::OrderStatistic) {
            return bad("experiments support the wq and qr methods only".into());
        }
        self.quantile_spec().map(|_| ())
    }

    /// `(x0, h)` pairs in report order: `x0` outer, `h` inner.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        self.x0_points
            .iter()
            .flat_map(|&x0| self.bandwidths.iter().map(move |&h| (x0, h)))
            .collect()
    }
}

/// Centres used for each signal: an even grid refined at the signal's features.
pub fn default_x0_grid(signal: Signal) -> Vec<f64> {
    match signal {
        Signal::Step => vec![0.1, 0.25, 0.3, 0.33, 0.37, 0.5, 0.63, 0.67, 0.7, 0.9],
        Signal::Blip => vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.78, 0.82, 0.9],
        Signal::Spikes => vec![0.1, 0.23, 0.33, 0.4, 0.47, 0.58, 0.69, 0.83, 0.95],
        Signal::Bumps => vec![
            0.1, 0.13, 0.15, 0.23, 0.25, 0.4, 0.44, 0.65, 0.76, 0.78, 0.81, 0.9,
        ],
        Signal::Parabolas => vec![0.1, 0.2, 0.3, 0.35, 0.37, 0.41, 0.43, 0.5, 0.7, 0.9],
        Signal::Angles => vec![0.1, 0.15, 0.2, 0.35, 0.5, 0.6, 0.65, 0.75, 0.85, 0.95],
        Signal::Flat(_) => (1..10).map(|i| i as f64 / 10.0).collect(),
    }
}

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 3] = ["paper-spikes-s1", "sanity-flat", "full-grid"];

/// Named experiment batches.
///
/// * `paper-spikes-s1` — Spikes, setting 1, the standard protocol;
/// * `sanity-flat` — flat signal at level 1, 200 replicates;
/// * `full-grid` — every signal × setting × {triangular, biweight} ×
///   `p ∈ {0.2, 0.5, 0.7}` (long-running).
pub fn preset(name: &str) -> Result<Vec<ExperimentConfig>> {
    match name {
        "paper-spikes-s1" => Ok(vec![ExperimentConfig::standard(
            Signal::Spikes,
            NoiseSetting::S1,
        )]),
        "sanity-flat" => {
            let mut c = ExperimentConfig::standard(Signal::Flat(1.0), NoiseSetting::S1);
            c.n_sim = 200;
            Ok(vec![c])
        }
        "full-grid" => {
            let mut out = Vec::new();
            for signal in Signal::STANDARD {
                for noise in NoiseSetting::ALL {
                    for kernel in [KernelFamily::Triangular, KernelFamily::Biweight] {
                        for p in [0.2, 0.5, 0.7] {
                            let mut c = ExperimentConfig::standard(signal, noise);
                            c.kernel = kernel;
                            c.p = p;
                            out.push(c);
                        }
                    }
                }
            }
            Ok(out)
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown preset '{other}' (known: {})",
            PRESETS.join(", ")
        ))),
    }
}

fn parse_list<T, F>(value: &str, mut parse: F) -> Result<Vec<T>>
where
    F: FnMut(&str) -> Result<T>,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(&mut parse)
        .collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse '{value}'")))
}

/// Parse the flat `key = value` configuration format.
///
/// Blank lines and lines starting with `#` are ignored. A `preset` key, if
/// present, supplies defaults (it must name a single-configuration preset);
/// every other key overrides a field:
///
/// | key | value |
/// |-----|-------|
/// | `signal` | `step`, `blip`, `spikes`, `bumps`, `parabolas`, `angles`, `flat:<c>` |
/// | `setting` | `1`, `2`, `3` |
/// | `kernel` | `triangular`, `biweight`, `uniform`, `gaussian` |
/// | `x0`, `h` | comma-separated lists |
/// | `p`, `alpha`, `alpha1` | reals |
/// | `n`, `n_sim`, `seed` | integers |
/// | `methods` | comma-separated subset of `wq`, `qr` |
///
/// Without a preset the base is the Spikes/setting-1 protocol; changing
/// `signal` without giving `x0` switches to that signal's default grid.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("line {}: expected key = value", lineno + 1))
        })?;
        pairs.push((
            lineno + 1,
            key.trim().to_ascii_lowercase(),
            value.trim().to_string(),
        ));
    }

    let mut config = match pairs.iter().find(|(_, k, _)| k == "preset") {
        Some((_, _, name)) => {
            let mut batch = preset(name)?;
            if batch.len() != 1 {
                return Err(Error::InvalidParameter(format!(
                    "preset '{name}' expands to {} configurations",
                    batch.len()
                )));
            }
            batch.remove(0)
        }
        None => ExperimentConfig::standard(Signal::Spikes, NoiseSetting::S1),
    };

    let mut x0_given = false;
    for (lineno, key, value) in &pairs {
        let at = |e: Error| match e {
            Error::InvalidParameter(m) => Error::InvalidParameter(format!("line {lineno}: {m}")),
            other => other,
        };
        match key.as_str() {
            "preset" => {}
            "signal" => {
                config.model.signal = value.parse().map_err(at)?;
                if !x0_given {
                    config.x0_points = default_x0_grid(config.model.signal);
                }
            }
            "setting" => config.model.noise = value.parse().map_err(at)?,
            "kernel" => config.kernel = value.parse().map_err(at)?,
            "x0" => {
                config.x0_points = parse_list(value, |s| parse_num("x0", s)).map_err(at)?;
                x0_given = true;
            }
            "h" => config.bandwidths = parse_list(value, |s| parse_num("h", s)).map_err(at)?,
            "p" => config.p = parse_num(key, value).map_err(at)?,
            "alpha" => config.alpha = parse_num(key, value).map_err(at)?,
            "alpha1" => config.alpha1 = parse_num(key, value).map_err(at)?,
            "n" => config.n = parse_num(key, value).map_err(at)?,
            "n_sim" => config.n_sim = parse_num(key, value).map_err(at)?,
            "seed" => config.master_seed = parse_num(key, value).map_err(at)?,
            "methods" => config.methods = parse_list(value, |s| s.parse()).map_err(at)?,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "line {lineno}: unknown key '{other}'"
                )))
            }
        }
    }
    config.validate()?;
    Ok(config)
}

/// Aggregate over replicates for one `(x0, h, method)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub x0: f64,
    pub h: f64,
    pub method: Method,
    /// Fraction of replicates whose interval contains `theta_true`.
    pub coverage: f64,
    /// Mean width over bounded intervals; NaN when none was bounded.
    pub mean_finite_width: f64,
    /// Fraction of replicates with an unbounded interval.
    pub frac_infinite: f64,
    pub mean_n_eff: f64,
    pub theta_true: f64,
    /// Fraction of replicates in which no sample point had positive weight
    /// (the weighted quantile is undefined; counted as non-coverage).
    pub frac_no_local_data: f64,
    /// Mean number of accepted rows (Quantile Rejection only).
    pub mean_accepted: Option<f64>,
}

impl CellSummary {
    /// One CSV record matching [`CSV_HEADER`].
    pub fn csv_record(&self, config: &ExperimentConfig) -> Vec<String> {
        vec![
            config.model.signal.name(),
            config.model.noise.number().to_string(),
            config.kernel.name().to_string(),
            config.p.to_string(),
            self.x0.to_string(),
            self.h.to_string(),
            self.method.tag().to_string(),
            self.coverage.to_string(),
            self.mean_finite_width.to_string(),
            self.frac_infinite.to_string(),
            self.mean_n_eff.to_string(),
            self.theta_true.to_string(),
        ]
    }
}

/// Render summaries as CSV text with a header row.
pub fn summaries_to_csv(config: &ExperimentConfig, cells: &[CellSummary]) -> String {
    let mut out = CSV_HEADER.join(",");
    out.push('\n');
    for cell in cells {
        let _ = writeln!(out, "{}", cell.csv_record(config).join(","));
    }
    out
}

#[derive(Debug, Clone, Copy)]
enum Outcome {
    Interval {
        covered: bool,
        width: f64,
        n_eff: f64,
        accepted: Option<usize>,
    },
    NoLocalData,
}

impl Outcome {
    fn from_interval(ci: &IntervalResult, theta: f64) -> Self {
        Outcome::Interval {
            covered: ci.contains(theta),
            width: ci.width(),
            n_eff: ci.n_eff,
            accepted: ci.accepted,
        }
    }
}

#[derive(Default)]
struct Accumulator {
    replicates: usize,
    covered: usize,
    bounded: usize,
    width_sum: f64,
    unbounded: usize,
    n_eff_sum: f64,
    no_local: usize,
    accepted_sum: usize,
    accepted_seen: usize,
}

impl Accumulator {
    fn push(&mut self, outcome: Outcome) {
        self.replicates += 1;
        match outcome {
            Outcome::Interval {
                covered,
                width,
                n_eff,
                accepted,
            } => {
                self.covered += covered as usize;
                if width.is_finite() {
                    self.bounded += 1;
                    self.width_sum += width;
                } else {
                    self.unbounded += 1;
                }
                self.n_eff_sum += n_eff;
                if let Some(a) = accepted {
                    self.accepted_sum += a;
                    self.accepted_seen += 1;
                }
            }
            Outcome::NoLocalData => self.no_local += 1,
        }
    }

    fn finish(self, x0: f64, h: f64, method: Method, theta_true: f64) -> CellSummary {
        let n = self.replicates as f64;
        CellSummary {
            x0,
            h,
            method,
            coverage: self.covered as f64 / n,
            mean_finite_width: if self.bounded > 0 {
                self.width_sum / self.bounded as f64
            } else {
                f64::NAN
            },
            frac_infinite: self.unbounded as f64 / n,
            mean_n_eff: self.n_eff_sum / n,
            theta_true,
            frac_no_local_data: self.no_local as f64 / n,
            mean_accepted: (self.accepted_seen > 0)
                .then(|| self.accepted_sum as f64 / self.accepted_seen as f64),
        }
    }
}

struct Cell {
    x0: f64,
    h: f64,
    spec: LocalizationSpec,
    theta: f64,
}

fn prepare_cells(config: &ExperimentConfig) -> Result<Vec<Cell>> {
    config
        .cells()
        .into_iter()
        .map(|(x0, h)| {
            let spec = LocalizationSpec::univariate(config.kernel, x0, h)?;
            let theta = LocalizedModel::new(&config.model, &spec)?.quantile(config.p)?;
            Ok(Cell { x0, h, spec, theta })
        })
        .collect()
}

fn run_replicate(
    config: &ExperimentConfig,
    q: &QuantileSpec,
    cells: &[Cell],
    r: u64,
) -> Result<Vec<Outcome>> {
    let stream = RngStream::new(config.master_seed, r);
    let data = sample_dataset(&config.model, config.n, stream)?;
    let mut out = Vec::with_capacity(cells.len() * config.methods.len());
    for (c, cell) in cells.iter().enumerate() {
        for &method in &config.methods {
            let result = match method {
                Method::WeightedQuantile => wq_interval(&data, &cell.spec, q),
                Method::QuantileRejection => {
                    qr_interval(&data, &cell.spec, q, stream.substream(c as u64 + 1))
                }
                Method::OrderStatistic => unreachable!("rejected by validate"),
            };
            out.push(match result {
                Ok(ci) => Outcome::from_interval(&ci, cell.theta),
                Err(Error::AllWeightsZero) => Outcome::NoLocalData,
                Err(e) => return Err(e),
            });
        }
    }
    Ok(out)
}

/// Run every replicate on the current rayon pool and summarise each
/// `(x0, h, method)` cell, in the order `x0`, then `h`, then `methods`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<CellSummary>> {
    config.validate()?;
    let q = config.quantile_spec()?;
    let cells = prepare_cells(config)?;
    let outcomes: Vec<Vec<Outcome>> = (1..=config.n_sim as u64)
        .into_par_iter()
        .map(|r| run_replicate(config, &q, &cells, r))
        .collect::<Result<_>>()?;

    let per_cell = config.methods.len();
    let mut acc: Vec<Accumulator> = (0..cells.len() * per_cell)
        .map(|_| Accumulator::default())
        .collect();
    for replicate in outcomes {
        for (slot, outcome) in acc.iter_mut().zip(replicate) {
            slot.push(outcome);
        }
    }
    Ok(acc
        .into_iter()
        .enumerate()
        .map(|(k, a)| {
            let cell = &cells[k / per_cell];
            a.finish(cell.x0, cell.h, config.methods[k % per_cell], cell.theta)
        })
        .collect())
}

/// [`run_experiment`] on a dedicated pool with `threads` workers.
pub fn run_experiment_with_threads(
    config: &ExperimentConfig,
    threads: usize,
) -> Result<Vec<CellSummary>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(config))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(methods: Vec<Method>) -> ExperimentConfig {
        ExperimentConfig {
            bandwidths: vec![0.1, 0.04],
            x0_points: vec![0.3, 0.47],
            n: 100,
            n_sim: 40,
            methods,
            ..ExperimentConfig::standard(Signal::Spikes, NoiseSetting::S1)
        }
    }

    #[test]
    fn single_replicate_coverage_is_binary() {
        let mut c = small(vec![Method::WeightedQuantile, Method::QuantileRejection]);
        c.n_sim = 1;
        for cell in run_experiment(&c).unwrap() {
            assert!(cell.coverage == 0.0 || cell.coverage == 1.0);
        }
    }

    #[test]
    fn cell_order_and_shape() {
        let c = small(vec![Method::QuantileRejection, Method::WeightedQuantile]);
        let cells = run_experiment(&c).unwrap();
        assert_eq!(cells.len(), 8);
        assert_eq!(
            (cells[0].x0, cells[0].h, cells[0].method),
            (0.3, 0.1, Method::QuantileRejection)
        );
        assert_eq!(
            (cells[3].x0, cells[3].h, cells[3].method),
            (0.3, 0.04, Method::WeightedQuantile)
        );
        assert_eq!(cells[4].x0, 0.47);
        for cell in &cells {
            assert!((0.0..=1.0).contains(&cell.coverage));
            match cell.method {
                Method::WeightedQuantile => {
                    assert_eq!(cell.frac_infinite, 0.0);
                    assert!(cell.mean_accepted.is_none());
                }
                _ => assert!(cell.mean_accepted.is_some()),
            }
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let c = small(vec![Method::WeightedQuantile, Method::QuantileRejection]);
        let one = run_experiment_with_threads(&c, 1).unwrap();
        let four = run_experiment_with_threads(&c, 4).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn tiny_bandwidth_records_missing_local_data() {
        let mut c = small(vec![Method::WeightedQuantile, Method::QuantileRejection]);
        c.bandwidths = vec![1e-4];
        c.n = 20;
        let cells = run_experiment(&c).unwrap();
        let wq = &cells[0];
        assert!(wq.frac_no_local_data > 0.9);
        assert!(wq.coverage <= 1.0 - wq.frac_no_local_data);
        let qr = &cells[1];
        assert_eq!(qr.frac_no_local_data, 0.0);
        assert!(qr.frac_infinite > 0.9);
    }

    #[test]
    fn validation() {
        let mut c = small(vec![Method::WeightedQuantile]);
        c.n_sim = 0;
        assert!(run_experiment(&c).is_err());
        let c = small(vec![]);
        assert!(c.validate().is_err());
        let c = small(vec![Method::OrderStatistic]);
        assert!(c.validate().is_err());
        let mut c = small(vec![Method::WeightedQuantile]);
        c.bandwidths = vec![0.0];
        assert!(c.validate().is_err());
    }

    #[test]
    fn presets_expand() {
        assert_eq!(preset("paper-spikes-s1").unwrap().len(), 1);
        assert_eq!(preset("full-grid").unwrap().len(), 108);
        assert!(preset("nope").is_err());
        for name in PRESETS {
            for c in preset(name).unwrap() {
                c.validate().unwrap();
            }
        }
    }

    #[test]
    fn config_parsing() {
        let text = "# comment\nsignal = blip\nsetting = 2\nkernel = biweight\nh = 0.1, 0.05\n\
                    p = 0.7\nn = 150\nn_sim = 12\nseed = 99\nmethods = qr\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.model, SyntheticModel::new(Signal::Blip, NoiseSetting::S2));
        assert_eq!(c.kernel, KernelFamily::Biweight);
        assert_eq!(c.bandwidths, vec![0.1, 0.05]);
        assert_eq!(c.x0_points, default_x0_grid(Signal::Blip));
        assert_eq!((c.p, c.n, c.n_sim, c.master_seed), (0.7, 150, 12, 99));
        assert_eq!(c.methods, vec![Method::QuantileRejection]);

        let c = parse_config("x0 = 0.2,0.4\nsignal = flat:2\n").unwrap();
        assert_eq!(c.x0_points, vec![0.2, 0.4]);
        assert_eq!(
            parse_config("preset = paper-spikes-s1").unwrap(),
            preset("paper-spikes-s1").unwrap()[0]
        );

        for bad in [
            "n = ten",
            "colour = red",
            "no equals sign",
            "preset = full-grid",
            "n_sim = 0",
        ] {
            assert!(parse_config(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn csv_rendering() {
        let mut c = small(vec![Method::WeightedQuantile]);
        c.n_sim = 3;
        let cells = run_experiment(&c).unwrap();
        let text = summaries_to_csv(&c, &cells);
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "signal,setting,kernel,p,x0,h,method,coverage,mean_width,frac_inf,mean_neff,theta_true"
        );
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(
            &first[..7],
            &["spikes", "1", "triangular", "0.5", "0.3", "0.1", "wq"]
        );
        assert_eq!(text.lines().count(), 1 + cells.len());
    }
}
