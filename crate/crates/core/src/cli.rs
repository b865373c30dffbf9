//! Command-line front end.
//!
//! Options come from an optional JSON config file and from flags; flags win.
//! Every command produces a [`Table`] written as CSV (with `#` metadata
//! lines) or JSON.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::climit::{compare_summations, run_scan, LimitSchedule, RateFit, TimeGrid};
use crate::error::Error;
use crate::qsystems::{EigenSystem, Observable};
use crate::spectral::{double_sum, fejer_mean, uniform_grid, FourierCoefficients, PeriodicSignal};
use crate::wavepacket::WavePacket;

pub const IDENTITY_TOL: f64 = 1e-12;
pub const ORACLE_TOL: f64 = 1e-9;
pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "FEJERLIMIT_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    IdentityCheck,
    HoExpect,
    Gibbs,
    Scan,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemChoice {
    Ho,
    Well,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalChoice {
    Square,
    Triangle,
    Sawtooth,
    Cosine,
    Constant,
}

impl SignalChoice {
    /// Unit-amplitude signal of period `2π`.
    pub fn build(self) -> crate::Result<PeriodicSignal> {
        match self {
            SignalChoice::Square => PeriodicSignal::square_wave(TAU, 1.0),
            SignalChoice::Triangle => PeriodicSignal::triangle_wave(TAU, 1.0),
            SignalChoice::Sawtooth => PeriodicSignal::sawtooth(TAU, 1.0),
            SignalChoice::Cosine => PeriodicSignal::cosine(TAU, 1.0),
            SignalChoice::Constant => PeriodicSignal::constant(TAU, 1.0),
        }
    }
}

/// Raw options, shared by the flag parser and the config file.
#[derive(Debug, Clone, Default, Parser, Deserialize)]
#[command(
    name = "fejerlimit",
    version,
    about = "Wave packets, Fejér means and the classical limit"
)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// JSON file with any of the options below; flags override it.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub command: Option<Command>,
    #[arg(long, value_enum)]
    pub system: Option<SystemChoice>,
    #[arg(long)]
    #[serde(default, deserialize_with = "observable_opt")]
    pub obs: Option<Observable>,
    /// Comma-separated quantum numbers.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<i64>>,
    /// Packet half-width exponent, N = max(1, floor(n^gamma)).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Classical action J = n·hbar held fixed in scans.
    #[arg(long)]
    pub action: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub length: Option<f64>,
    /// Planck constant for ho-expect.
    #[arg(long)]
    pub hbar: Option<f64>,
    /// Packet half-width N for ho-expect.
    #[arg(long)]
    pub half_width: Option<usize>,
    /// Number of time points.
    #[arg(long)]
    pub times: Option<usize>,
    /// Series order (identity-check: S; gibbs/compare: partial-sum order).
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_enum)]
    pub signal: Option<SignalChoice>,
    /// Negative control for identity-check: corrupt one term of the double sum.
    #[arg(long, hide = true)]
    #[serde(default)]
    pub inject_fault: bool,
}

fn observable_opt<'de, D>(d: D) -> Result<Option<Observable>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    let raw: Option<String> = Option::deserialize(d)?;
    raw.map(|s| s.parse().map_err(serde::de::Error::custom))
        .transpose()
}

impl Options {
    /// `other` wins wherever it is set.
    pub fn overridden_by(self, other: Options) -> Options {
        Options {
            config: other.config.or(self.config),
            command: other.command.or(self.command),
            system: other.system.or(self.system),
            obs: other.obs.or(self.obs),
            n_list: other.n_list.or(self.n_list),
            gamma: other.gamma.or(self.gamma),
            action: other.action.or(self.action),
            mu: other.mu.or(self.mu),
            omega: other.omega.or(self.omega),
            length: other.length.or(self.length),
            hbar: other.hbar.or(self.hbar),
            half_width: other.half_width.or(self.half_width),
            times: other.times.or(self.times),
            order: other.order.or(self.order),
            trials: other.trials.or(self.trials),
            seed: other.seed.or(self.seed),
            out: other.out.or(self.out),
            format: other.format.or(self.format),
            signal: other.signal.or(self.signal),
            inject_fault: other.inject_fault || self.inject_fault,
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub system: SystemChoice,
    pub obs: Observable,
    pub n_list: Vec<i64>,
    pub gamma: f64,
    pub action: f64,
    pub mu: f64,
    pub omega: f64,
    pub length: f64,
    pub hbar: f64,
    pub half_width: usize,
    pub times: usize,
    pub order: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: Format,
    pub signal: SignalChoice,
    pub inject_fault: bool,
}

impl RunConfig {
    /// Defaults for `command` with nothing else set.
    pub fn for_command(command: Command) -> Self {
        Self::resolve(Options {
            command: Some(command),
            seed: Some(DEFAULT_SEED),
            ..Options::default()
        })
        .expect("defaults are valid")
    }

    /// Fills unset options with per-command defaults. The seed falls back to
    /// `FEJERLIMIT_SEED`, then to 42.
    pub fn resolve(opts: Options) -> Result<Self, CliError> {
        let command = opts
            .command
            .ok_or_else(|| CliError::Config("--command is required".into()))?;
        let seed = match opts.seed {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("{SEED_ENV}={v} is not an integer")))?,
                Err(_) => DEFAULT_SEED,
            },
        };
        let (default_order, default_times) = match command {
            Command::IdentityCheck => (64, 20),
            Command::HoExpect => (0, 64),
            Command::Scan => (0, crate::climit::DEFAULT_POINTS_PER_PERIOD),
            Command::Gibbs | Command::Compare => {
                let order = opts.order.unwrap_or(99);
                (99, (32 * order).max(2048))
            }
        };
        let default_n = match command {
            Command::HoExpect => vec![100],
            _ => vec![100, 1000, 10_000],
        };
        let config = RunConfig {
            command,
            system: opts.system.unwrap_or(SystemChoice::Ho),
            obs: opts.obs.unwrap_or(Observable::X),
            n_list: opts.n_list.unwrap_or(default_n),
            gamma: opts.gamma.unwrap_or(0.4),
            action: opts.action.unwrap_or(1.0),
            mu: opts.mu.unwrap_or(1.0),
            omega: opts.omega.unwrap_or(1.0),
            length: opts.length.unwrap_or(1.0),
            hbar: opts.hbar.unwrap_or(1.0),
            half_width: opts.half_width.unwrap_or(5),
            times: opts.times.unwrap_or(default_times),
            order: opts.order.unwrap_or(default_order),
            trials: opts.trials.unwrap_or(100),
            seed,
            out: opts.out,
            format: opts.format.unwrap_or(Format::Csv),
            signal: opts.signal.unwrap_or(SignalChoice::Square),
            inject_fault: opts.inject_fault,
        };
        if config.times == 0 {
            return Err(CliError::Config("--times must be positive".into()));
        }
        if config.n_list.is_empty() {
            return Err(CliError::Config("--n-list is empty".into()));
        }
        Ok(config)
    }

    fn base_system(&self, hbar: f64) -> Result<EigenSystem, CliError> {
        Ok(match self.system {
            SystemChoice::Ho => EigenSystem::oscillator(self.mu, self.omega, hbar)?,
            SystemChoice::Well => EigenSystem::square_well(self.mu, self.length, hbar)?,
        })
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Tabular result of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub summary: Vec<(String, String)>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn note(&mut self, key: &str, value: impl fmt::Display) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (k, v) in &self.meta {
            writeln!(w, "# {k}: {v}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        for (k, v) in &self.summary {
            writeln!(w, "# {k}: {v}")?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let map = |pairs: &[(String, String)]| -> BTreeMap<String, String> {
            pairs.iter().cloned().collect()
        };
        json!({
            "meta": map(&self.meta),
            "columns": self.columns,
            "rows": self.rows,
            "summary": map(&self.summary),
        })
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut w, &self.to_json())?;
        writeln!(w)
    }
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A finished command: its table and whether its own checks passed.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub passed: bool,
}

pub fn execute(config: &RunConfig) -> Result<Report, CliError> {
    let mut report = match config.command {
        Command::IdentityCheck => identity_check(config)?,
        Command::HoExpect => ho_expect(config)?,
        Command::Gibbs => gibbs(config)?,
        Command::Scan => scan(config)?,
        Command::Compare => compare(config)?,
    };
    let mut meta = vec![(
        "program".to_string(),
        format!("fejerlimit {}", env!("CARGO_PKG_VERSION")),
    )];
    let echo = serde_json::to_value(config).map_err(|e| CliError::Config(e.to_string()))?;
    if let Value::Object(fields) = echo {
        for (k, v) in fields {
            meta.push((
                format!("config.{k}"),
                v.to_string().trim_matches('"').to_string(),
            ));
        }
    }
    meta.append(&mut report.table.meta);
    report.table.meta = meta;
    Ok(report)
}

/// Parses flags, merges the config file, runs and writes output.
/// Returns the process exit code: 0 pass, 1 failed check, 2 bad configuration.
pub fn run(flags: Options) -> i32 {
    match run_inner(flags) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("fejerlimit: {e}");
            2
        }
    }
}

fn run_inner(flags: Options) -> Result<bool, CliError> {
    let file = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str::<Options>(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => Options::default(),
    };
    let config = RunConfig::resolve(file.overridden_by(flags))?;
    let report = execute(&config)?;
    match &config.out {
        Some(path) => {
            let mut f = io::BufWriter::new(fs::File::create(path)?);
            write_table(&report.table, config.format, &mut f)?;
            f.flush()?;
        }
        None => write_table(&report.table, config.format, io::stdout().lock())?,
    }
    if !report.passed {
        eprintln!("fejerlimit: check failed");
    }
    Ok(report.passed)
}

fn write_table<W: Write>(table: &Table, format: Format, w: W) -> io::Result<()> {
    match format {
        Format::Csv => table.write_csv(w),
        Format::Json => table.write_json(w),
    }
}

fn random_coefficients(
    rng: &mut ChaCha8Rng,
    max_order: usize,
) -> crate::Result<FourierCoefficients> {
    let coeffs = (0..2 * max_order + 1)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    FourierCoefficients::new(1.0, coeffs)
}

fn identity_check(config: &RunConfig) -> Result<Report, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let max_order = config.order;
    let mut table = Table::new(&["trial", "max_rel_deviation", "worst_half_width", "worst_t"]);
    let mut overall = 0.0f64;
    for trial in 0..config.trials {
        let coeffs = random_coefficients(&mut rng, max_order)?;
        let summed = if config.inject_fault {
            let mut c = coeffs.as_slice().to_vec();
            c[max_order] = -c[max_order];
            FourierCoefficients::new(1.0, c)?
        } else {
            coeffs.clone()
        };
        let times: Vec<f64> = (0..config.times).map(|_| rng.gen_range(0.0..TAU)).collect();
        let mut worst = (0.0f64, 0usize, 0.0f64);
        for half_width in 0..=max_order / 2 {
            for &t in &times {
                let fejer = fejer_mean(&coeffs, half_width, t)?;
                let double = double_sum(&summed, half_width, t)?;
                let dev = (double - fejer).norm() / (1.0 + fejer.norm());
                if dev > worst.0 {
                    worst = (dev, half_width, t);
                }
            }
        }
        overall = overall.max(worst.0);
        table
            .rows
            .push(vec![trial as f64, worst.0, worst.1 as f64, worst.2]);
    }
    let passed = overall <= IDENTITY_TOL;
    table.note("max_rel_deviation", fmt_f64(overall));
    table.note("tolerance", fmt_f64(IDENTITY_TOL));
    table.note("status", if passed { "pass" } else { "fail" });
    Ok(Report { table, passed })
}

/// Max `|a - b|` over the column, relative to `sup |b|` (absolute when `b ≡ 0`).
pub fn relative_deviation(a: &[f64], b: &[f64]) -> f64 {
    let dev = a
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = b.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    if scale > 0.0 {
        dev / scale
    } else {
        dev
    }
}

fn ho_expect(config: &RunConfig) -> Result<Report, CliError> {
    if config.system != SystemChoice::Ho {
        return Err(CliError::Config("ho-expect needs --system ho".into()));
    }
    let sys = config.base_system(config.hbar)?;
    let n = config.n_list[0];
    let packet = WavePacket::equal_weight(sys, n, config.half_width)?;
    let times = uniform_grid(TAU / config.omega, config.times);
    let mut columns = vec!["t".to_string()];
    let mut engine = Vec::new();
    let mut closed = Vec::new();
    for obs in Observable::ALL {
        engine.push(packet.expectation_series(obs, &times)?.values);
        closed.push(
            times
                .iter()
                .map(|&t| sys.ho_expectation_closed_form(obs, n, config.half_width, t))
                .collect::<crate::Result<Vec<f64>>>()?,
        );
    }
    columns.extend(Observable::ALL.iter().map(|o| o.name().to_string()));
    columns.extend(
        Observable::ALL
            .iter()
            .map(|o| format!("{}_closed", o.name())),
    );
    let mut table = Table {
        columns,
        ..Table::new(&[])
    };
    for (k, &t) in times.iter().enumerate() {
        let mut row = vec![t];
        row.extend(engine.iter().map(|c| c[k]));
        row.extend(closed.iter().map(|c| c[k]));
        table.rows.push(row);
    }
    table.meta.push((
        "packet".into(),
        format!("n = {n}, N = {}", config.half_width),
    ));
    let mut passed = true;
    for (i, obs) in Observable::ALL.iter().enumerate() {
        let dev = relative_deviation(&engine[i], &closed[i]);
        passed &= dev <= ORACLE_TOL;
        table.note(&format!("max_rel_deviation.{}", obs.name()), fmt_f64(dev));
    }
    table.note("tolerance", fmt_f64(ORACLE_TOL));
    table.note("status", if passed { "pass" } else { "fail" });
    Ok(Report { table, passed })
}

fn gibbs(config: &RunConfig) -> Result<Report, CliError> {
    let signal = config.signal.build()?;
    let times = uniform_grid(signal.period(), config.times);
    let mut table = Table::new(&["order", "partial_overshoot", "fejer_overshoot"]);
    for order in 1..=config.order {
        let cmp = compare_summations(&signal, order, &times)?;
        table.rows.push(vec![
            order as f64,
            cmp.partial_overshoot,
            cmp.fejer_overshoot,
        ]);
    }
    table.meta.push((
        "signal".into(),
        format!("{:?}", config.signal).to_lowercase(),
    ));
    Ok(Report {
        table,
        passed: true,
    })
}

fn compare(config: &RunConfig) -> Result<Report, CliError> {
    let signal = config.signal.build()?;
    let times = uniform_grid(signal.period(), config.times);
    let cmp = compare_summations(&signal, config.order, &times)?;
    let mut table = Table::new(&["t", "signal", "partial", "fejer"]);
    for (k, &t) in times.iter().enumerate() {
        table
            .rows
            .push(vec![t, cmp.signal[k], cmp.partial[k], cmp.fejer[k]]);
    }
    table.meta.push((
        "signal".into(),
        format!("{:?}", config.signal).to_lowercase(),
    ));
    table.note(
        "band",
        format!("[{}, {}]", fmt_f64(cmp.band_lo), fmt_f64(cmp.band_hi)),
    );
    table.note("partial_overshoot", fmt_f64(cmp.partial_overshoot));
    table.note("fejer_overshoot", fmt_f64(cmp.fejer_overshoot));
    Ok(Report {
        table,
        passed: true,
    })
}

fn scan(config: &RunConfig) -> Result<Report, CliError> {
    let sys = config.base_system(1.0)?;
    let schedule = LimitSchedule::new(config.action, config.n_list.clone(), config.gamma)?;
    let report = run_scan(
        &sys,
        config.obs,
        &schedule,
        &TimeGrid::PerPeriod(config.times),
    )?;
    let mut table = Table::new(&[
        "n",
        "hbar",
        "half_width",
        "reference_energy",
        "bohr_frequency",
        "phase_offset",
        "classical_sup",
        "classical_rms",
        "fejer_sup",
        "fejer_rms",
        "partial_sup",
        "partial_rms",
        "band_lo",
        "band_hi",
        "quantum_overshoot",
        "fejer_overshoot",
        "partial_overshoot",
        "relative_energy_spread",
    ]);
    for p in &report.points {
        table.rows.push(vec![
            p.n as f64,
            p.hbar,
            p.half_width as f64,
            p.reference_energy,
            p.bohr_frequency,
            p.phase_offset,
            p.classical.sup,
            p.classical.rms,
            p.fejer.sup,
            p.fejer.rms,
            p.partial.sup,
            p.partial.rms,
            p.band_lo,
            p.band_hi,
            p.quantum_overshoot,
            p.fejer_overshoot,
            p.partial_overshoot,
            p.relative_energy_spread,
        ]);
    }
    let rate = |r: RateFit| match r {
        RateFit::Exponent(e) => fmt_f64(e),
        RateFit::BelowFloor => "below_floor".to_string(),
    };
    match report.rates {
        Some(rates) => {
            table.note("rate.classical", rate(rates.classical));
            table.note("rate.fejer", rate(rates.fejer));
            table.note("rate.partial", rate(rates.partial));
        }
        None => table.note("rate", "needs at least 3 scan points"),
    }
    Ok(Report {
        table,
        passed: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file = Options {
            command: Some(Command::Scan),
            gamma: Some(0.3),
            order: Some(7),
            ..Options::default()
        };
        let flags = Options {
            gamma: Some(0.5),
            ..Options::default()
        };
        let merged = file.overridden_by(flags);
        assert_eq!(merged.gamma, Some(0.5));
        assert_eq!(merged.order, Some(7));
        assert_eq!(merged.command, Some(Command::Scan));
    }

    #[test]
    fn config_file_keys_match_fields() {
        let opts: Options = serde_json::from_str(
            r#"{"command": "ho-expect", "obs": "p2", "n_list": [50], "half_width": 3, "format": "json"}"#,
        )
        .unwrap();
        assert_eq!(opts.command, Some(Command::HoExpect));
        assert_eq!(opts.obs, Some(Observable::P2));
        assert_eq!(opts.n_list, Some(vec![50]));
        assert!(serde_json::from_str::<Options>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn missing_command_is_a_config_error() {
        assert!(matches!(
            RunConfig::resolve(Options::default()),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn relative_deviation_handles_zero_columns() {
        assert_eq!(relative_deviation(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert_eq!(relative_deviation(&[1.0, 2.0], &[1.0, 4.0]), 0.5);
    }
}
