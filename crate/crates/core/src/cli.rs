//! Command-line front end.
//!
//! Every flag can also appear as `key=value` in a configuration file
//! (`--config PATH`); `#` starts a comment. Flags override file values.

use std::collections::HashSet;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use crate::config::{Cancellation, Detector, Scheme, SystemConfig};
use crate::constellation::Modulation;
use crate::error::{Error, Result};
use crate::harness::{run_sweep, SweepRow};
use crate::report::{emit_results, OutputFormat};

#[derive(Debug, Default, Parser)]
#[command(
    name = "irs-mas",
    about = "Monte Carlo BER/ASBT simulator for IRS-aided spatial modulation with multiple antenna selection"
)]
struct Flags {
    /// key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// mas, sas-sm or sas-ssk
    #[arg(long)]
    scheme: Option<String>,
    /// ml or ssd (default: ssd for mas, ml otherwise)
    #[arg(long)]
    detector: Option<String>,
    /// Receive antennas N_r
    #[arg(long)]
    nr: Option<String>,
    /// Selected antennas N_p
    #[arg(long)]
    np: Option<String>,
    /// IRS reflecting elements N
    #[arg(long = "n-reflectors")]
    n_reflectors: Option<String>,
    /// bpsk, qpsk, qam16 or qam64
    #[arg(long = "mod")]
    modulation: Option<String>,
    /// Comma-separated power ratios, e.g. 0.2,0.8
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Strongest-antenna set size for the SSD candidate sorter
    #[arg(long)]
    nc: Option<String>,
    /// Candidates evaluated by the SSD
    #[arg(long)]
    iters: Option<String>,
    /// SNR grid in dB, start:step:stop or a single value
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    /// Noise standard deviation when no SNR grid is given
    #[arg(long)]
    sigma: Option<String>,
    /// Symbol energy E_s
    #[arg(long)]
    es: Option<String>,
    /// Transmissions per SNR point
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// single or cumulative symbol cancellation in the SSD
    #[arg(long)]
    cancellation: Option<String>,
    /// Stop a point after this many block errors (0 disables)
    #[arg(long = "max-block-errors")]
    max_block_errors: Option<String>,
    /// Largest ML search space, C * M^N_p
    #[arg(long = "ml-limit")]
    ml_limit: Option<String>,
    /// Output file (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut push = |k: &'static str, val: &Option<String>| {
            if let Some(val) = val {
                v.push((k, val.clone()));
            }
        };
        push("scheme", &self.scheme);
        push("detector", &self.detector);
        push("nr", &self.nr);
        push("np", &self.np);
        push("n-reflectors", &self.n_reflectors);
        push("mod", &self.modulation);
        push("alpha", &self.alpha);
        push("nc", &self.nc);
        push("iters", &self.iters);
        push("snr", &self.snr);
        push("sigma", &self.sigma);
        push("es", &self.es);
        push("trials", &self.trials);
        push("seed", &self.seed);
        push("cancellation", &self.cancellation);
        push("max-block-errors", &self.max_block_errors);
        push("ml-limit", &self.ml_limit);
        push("format", &self.format);
        v
    }
}

/// A parsed command line. Resolve it with [`RunSpec::resolve`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunSpec {
    pub config_path: Option<PathBuf>,
    /// Flag values as `(key, value)`, applied after the config file.
    pub overrides: Vec<(String, String)>,
    pub out: Option<PathBuf>,
}

/// Fully resolved run: a configuration plus output choices.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedRun {
    pub config: SystemConfig,
    pub detector: Detector,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

pub fn parse_run_spec<I, T>(argv: I) -> std::result::Result<RunSpec, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let flags = Flags::try_parse_from(argv)?;
    Ok(RunSpec {
        overrides: flags
            .pairs()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        config_path: flags.config,
        out: flags.out,
    })
}

/// Reads `key=value` lines.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config("config", format!("line {}: expected key=value", lineno + 1))
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_num<T: std::str::FromStr>(field: &'static str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(field, format!("cannot parse `{value}`")))
}

/// Expands `start:step:stop` (inclusive) or a single value.
pub fn parse_snr_grid(value: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![parse_num("snr", single)?]),
        [start, step, stop] => {
            let (start, step, stop): (f64, f64, f64) =
                (parse_num("snr", start)?, parse_num("snr", step)?, parse_num("snr", stop)?);
            if step == 0.0 || !step.is_finite() || (stop - start) * step < 0.0 {
                return Err(Error::config("snr", format!("step {step} never reaches {stop}")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(Error::config("snr", format!("expected start:step:stop, got `{value}`"))),
    }
}

#[derive(Default)]
struct Builder {
    cfg: SystemConfig,
    detector: Option<Detector>,
    format: OutputFormat,
    out: Option<PathBuf>,
    explicit: HashSet<String>,
}

impl Builder {
    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let cfg = &mut self.cfg;
        match key {
            "scheme" => cfg.scheme = Scheme::parse(value)?,
            "detector" => self.detector = Some(Detector::parse(value)?),
            "nr" => cfg.n_rx = parse_num("nr", value)?,
            "np" => cfg.n_sel = parse_num("np", value)?,
            "n-reflectors" => cfg.n_refl = parse_num("n-reflectors", value)?,
            "mod" => cfg.mod_order = Modulation::parse(value)?.order(),
            "alpha" => {
                cfg.alpha = value
                    .split(',')
                    .map(|a| parse_num("alpha", a))
                    .collect::<Result<_>>()?
            }
            "nc" => cfg.n_cand = parse_num("nc", value)?,
            "iters" => cfg.n_iters = parse_num("iters", value)?,
            "snr" => cfg.snr_grid_db = parse_snr_grid(value)?,
            "sigma" => cfg.noise_sigma = parse_num("sigma", value)?,
            "es" => cfg.sym_energy = parse_num("es", value)?,
            "trials" => cfg.n_trials = parse_num("trials", value)?,
            "seed" => cfg.seed = parse_num("seed", value)?,
            "cancellation" => {
                cfg.cancellation = match value {
                    "single" => Cancellation::Single,
                    "cumulative" => Cancellation::Cumulative,
                    other => {
                        return Err(Error::config("cancellation", format!("unknown mode `{other}`")))
                    }
                }
            }
            "max-block-errors" => {
                let budget: u64 = parse_num("max-block-errors", value)?;
                cfg.max_block_errors = (budget > 0).then_some(budget);
            }
            "ml-limit" => cfg.ml_search_limit = parse_num("ml-limit", value)?,
            "format" => self.format = OutputFormat::parse(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(Error::config("config", format!("unknown key `{other}`"))),
        }
        self.explicit.insert(key.to_string());
        Ok(())
    }
}

impl RunSpec {
    /// Applies defaults, then the config file, then flags, and validates.
    pub fn resolve(&self) -> Result<ResolvedRun> {
        let mut b = Builder::default();
        if let Some(path) = &self.config_path {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            for (k, v) in parse_config_file(&text)? {
                b.apply(&k, &v)?;
            }
        }
        for (k, v) in &self.overrides {
            b.apply(k, v)?;
        }
        if let Some(out) = &self.out {
            b.out = Some(out.clone());
        }

        if b.cfg.scheme.is_single_antenna() {
            if !b.explicit.contains("np") {
                b.cfg.n_sel = 1;
            }
            if !b.explicit.contains("alpha") {
                b.cfg.alpha = vec![1.0];
            }
            if !b.explicit.contains("nc") {
                b.cfg.n_cand = b.cfg.n_sel;
            }
        }
        let detector = b.detector.unwrap_or(if b.cfg.scheme.is_single_antenna() {
            Detector::Ml
        } else {
            Detector::Ssd
        });
        let config = b.cfg.validate()?.into_config();
        Ok(ResolvedRun {
            config,
            detector,
            out: b.out,
            format: b.format,
        })
    }
}

fn summary_line(row: &SweepRow, bits: usize) -> String {
    format!(
        "{}/{} {} N={} snr={} dB: L={} bits, trials={}, ber={:.4e}, bler={:.4e}, asbt={:.4} (block {:.4}), mean_mac={:.0}",
        row.scheme,
        row.detector,
        row.modulation,
        row.n_reflectors,
        row.snr_db,
        bits,
        row.trials,
        row.ber,
        row.bler,
        row.asbt_perbit,
        row.asbt_block,
        row.mean_mac
    )
}

fn run(spec: &RunSpec) -> Result<Vec<String>> {
    let run = spec.resolve()?;
    let cfg = run.config.clone().validate()?;
    let rows = run_sweep(&cfg, run.detector)?;
    emit_results(&rows, run.format, run.out.as_deref(), &run.config, run.detector.name())?;
    Ok(rows
        .iter()
        .map(|r| summary_line(r, cfg.bits_per_transmission()))
        .collect())
}

/// Runs a parsed spec; returns the process exit code. Summaries go to
/// standard output when results go to a file, else to standard error.
pub fn run_main(spec: &RunSpec) -> i32 {
    match run(spec) {
        Ok(lines) => {
            for line in lines {
                if spec.out.is_some() {
                    println!("{line}");
                } else {
                    eprintln!("{line}");
                }
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_run_spec(argv) {
        Ok(spec) => run_main(&spec),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}

/// Convenience for tests and scripts: resolve a spec from a flag string.
pub fn resolve_args(args: &str) -> Result<ResolvedRun> {
    let argv = std::iter::once("irs-mas").chain(args.split_whitespace());
    parse_run_spec(argv)
        .map_err(|e| Error::config("args", e.to_string()))?
        .resolve()
}
