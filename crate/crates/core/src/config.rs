//! Scenario parameters and their validation.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::constellation::Modulation;
use crate::error::{Error, Result};
use crate::rac::{binomial, MAX_RAC_BITS};

/// Transmission scheme.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Multiple receive-antenna selection with superposition coding.
    #[default]
    #[serde(rename = "mas")]
    Mas,
    /// Single antenna selection, spatial modulation (antenna index + one symbol).
    #[serde(rename = "sas-sm")]
    SasSm,
    /// Single antenna selection, space shift keying (antenna index only).
    #[serde(rename = "sas-ssk")]
    SasSsk,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Mas => "mas",
            Scheme::SasSm => "sas-sm",
            Scheme::SasSsk => "sas-ssk",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mas" => Ok(Scheme::Mas),
            "sas-sm" => Ok(Scheme::SasSm),
            "sas-ssk" => Ok(Scheme::SasSsk),
            other => Err(Error::config("scheme", format!("unknown scheme `{other}`"))),
        }
    }

    pub fn is_single_antenna(self) -> bool {
        !matches!(self, Scheme::Mas)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    Ml,
    Ssd,
}

impl Detector {
    pub fn name(self) -> &'static str {
        match self {
            Detector::Ml => "ml",
            Detector::Ssd => "ssd",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ml" => Ok(Detector::Ml),
            "ssd" => Ok(Detector::Ssd),
            other => Err(Error::config("detector", format!("unknown detector `{other}`"))),
        }
    }
}

/// How the successive detector removes already-decoded symbols.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cancellation {
    /// Subtract only the immediately preceding decoded symbol.
    #[default]
    Single,
    /// Subtract every previously decoded symbol. Differs from `Single` only
    /// when more than two antennas are selected.
    Cumulative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub scheme: Scheme,
    /// Receive antennas N_r.
    pub n_rx: usize,
    /// Antennas selected per transmission N_p.
    pub n_sel: usize,
    /// IRS reflecting elements N.
    pub n_refl: usize,
    pub mod_order: u32,
    /// Superposition power ratios, strictly increasing and summing to one.
    pub alpha: Vec<f64>,
    pub sym_energy: f64,
    /// Noise standard deviation used when no SNR grid is given; 0 is noiseless.
    pub noise_sigma: f64,
    /// Size of the strongest-antenna set used by the candidate sorter (n_c).
    pub n_cand: usize,
    /// Candidates evaluated by the successive detector (Λ).
    pub n_iters: usize,
    pub snr_grid_db: Vec<f64>,
    pub n_trials: u64,
    pub seed: u64,
    pub cancellation: Cancellation,
    /// Stop a sweep point early once this many block errors are seen.
    pub max_block_errors: Option<u64>,
    /// Largest C * M^N_p the ML detector will search exhaustively.
    pub ml_search_limit: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            scheme: Scheme::Mas,
            n_rx: 12,
            n_sel: 2,
            n_refl: 64,
            mod_order: 2,
            alpha: vec![0.2, 0.8],
            sym_energy: 1.0,
            noise_sigma: 0.0,
            n_cand: 6,
            n_iters: 8,
            snr_grid_db: Vec::new(),
            n_trials: 100_000,
            seed: 1,
            cancellation: Cancellation::Single,
            max_block_errors: Some(500),
            ml_search_limit: 1 << 20,
        }
    }
}

impl SystemConfig {
    /// A single-antenna-selection baseline built on top of `self`: one
    /// selected antenna, unit power ratio, all reflectors aligned to it.
    pub fn single_antenna(&self, scheme: Scheme, n_rx: usize) -> SystemConfig {
        SystemConfig {
            scheme,
            n_rx,
            n_sel: 1,
            alpha: vec![1.0],
            n_cand: 1,
            n_iters: 1,
            ..self.clone()
        }
    }

    pub fn validate(self) -> Result<ValidConfig> {
        validate_config(self)
    }

    pub fn noise_sigma_for_snr(&self, snr_db: f64) -> f64 {
        (self.sym_energy * 10f64.powf(-snr_db / 10.0)).sqrt()
    }
}

/// A [`SystemConfig`] whose invariants hold, with the derived bit split and
/// reflector partition cached.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidConfig {
    cfg: SystemConfig,
    modulation: Modulation,
    l1: u32,
    l2: u32,
    delta: usize,
    rac_count: usize,
}

impl ValidConfig {
    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn into_config(self) -> SystemConfig {
        self.cfg
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    /// Bits carried by the antenna-combination index.
    pub fn l1(&self) -> u32 {
        self.l1
    }

    /// Bits carried by the symbols.
    pub fn l2(&self) -> u32 {
        self.l2
    }

    pub fn bits_per_transmission(&self) -> usize {
        (self.l1 + self.l2) as usize
    }

    /// Bits per symbol (0 for space shift keying).
    pub fn bits_per_symbol(&self) -> u32 {
        if self.cfg.n_sel == 0 {
            0
        } else {
            self.l2 / self.cfg.n_sel as u32
        }
    }

    /// Reflectors dedicated to each selected antenna, floor(N / N_p).
    pub fn delta(&self) -> usize {
        self.delta
    }

    /// Number of legitimate antenna combinations C = 2^L1.
    pub fn rac_count(&self) -> usize {
        self.rac_count
    }
}

impl Deref for ValidConfig {
    type Target = SystemConfig;

    fn deref(&self) -> &SystemConfig {
        &self.cfg
    }
}

pub fn validate_config(cfg: SystemConfig) -> Result<ValidConfig> {
    if cfg.n_sel == 0 {
        return Err(Error::config("n_sel", "must be at least 1"));
    }
    if cfg.n_sel >= cfg.n_rx {
        return Err(Error::config(
            "n_sel",
            format!("must be smaller than n_rx = {}", cfg.n_rx),
        ));
    }
    if cfg.scheme.is_single_antenna() && cfg.n_sel != 1 {
        return Err(Error::config(
            "n_sel",
            "single-antenna schemes select exactly one antenna",
        ));
    }
    if cfg.n_refl < cfg.n_sel {
        return Err(Error::config(
            "n_refl",
            format!("need at least one reflector per selected antenna ({})", cfg.n_sel),
        ));
    }
    let modulation = Modulation::from_order(cfg.mod_order)?;

    if cfg.alpha.len() != cfg.n_sel {
        return Err(Error::config(
            "alpha",
            format!("expected {} ratios, got {}", cfg.n_sel, cfg.alpha.len()),
        ));
    }
    if cfg.alpha.iter().any(|a| !a.is_finite() || *a <= 0.0) {
        return Err(Error::config("alpha", "ratios must be positive"));
    }
    if cfg.alpha.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("alpha", "ratios must be strictly increasing"));
    }
    let sum: f64 = cfg.alpha.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::config("alpha", format!("ratios sum to {sum}, not 1")));
    }
    if !cfg.sym_energy.is_finite() || cfg.sym_energy <= 0.0 {
        return Err(Error::config("sym_energy", "must be positive"));
    }
    if !cfg.noise_sigma.is_finite() || cfg.noise_sigma < 0.0 {
        return Err(Error::config("noise_sigma", "must be non-negative"));
    }
    if cfg.n_cand < cfg.n_sel || cfg.n_cand > cfg.n_rx {
        return Err(Error::config(
            "n_cand",
            format!("must lie in [{}, {}]", cfg.n_sel, cfg.n_rx),
        ));
    }
    if cfg.n_iters == 0 {
        return Err(Error::config("n_iters", "must be at least 1"));
    }
    if cfg.n_trials == 0 {
        return Err(Error::config("n_trials", "must be at least 1"));
    }
    if cfg.snr_grid_db.iter().any(|s| s.is_nan()) {
        return Err(Error::config("snr_grid_db", "contains NaN"));
    }

    let combos = binomial(cfg.n_rx as u64, cfg.n_sel as u64)
        .ok_or_else(|| Error::config("n_rx", "binomial coefficient overflows"))?;
    let l1 = 127 - combos.leading_zeros();
    if l1 > MAX_RAC_BITS {
        return Err(Error::config(
            "n_rx",
            format!("{l1} antenna-index bits exceed the supported {MAX_RAC_BITS}"),
        ));
    }
    let mu = match cfg.scheme {
        Scheme::SasSsk => 0,
        _ => modulation.order().trailing_zeros(),
    };
    let l2 = cfg.n_sel as u32 * mu;
    if l1 + l2 > 64 {
        return Err(Error::config("mod_order", "more than 64 bits per transmission"));
    }

    if cfg.scheme == Scheme::Mas {
        check_distinct_superpositions(&cfg)?;
    }

    Ok(ValidConfig {
        delta: cfg.n_refl / cfg.n_sel,
        rac_count: 1usize << l1,
        modulation,
        l1,
        l2,
        cfg,
    })
}

/// Every symbol tuple must map to a different superposed value, otherwise
/// the symbol bits cannot be recovered even without noise.
fn check_distinct_superpositions(cfg: &SystemConfig) -> Result<()> {
    let points = crate::constellation::make_constellation(cfg.mod_order)?
        .points()
        .to_vec();
    let mut values = vec![num_complex::Complex64::new(0.0, 0.0)];
    for a in &cfg.alpha {
        let scale = a.sqrt() * cfg.sym_energy;
        values = values
            .iter()
            .flat_map(|v| points.iter().map(move |p| v + p * scale))
            .collect();
    }
    let tol = 1e-9 * cfg.sym_energy;
    values.sort_by(|a, b| a.re.total_cmp(&b.re));
    for (i, v) in values.iter().enumerate() {
        for w in &values[i + 1..] {
            if w.re - v.re > tol {
                break;
            }
            if (w - v).norm() <= tol {
                return Err(Error::config(
                    "alpha",
                    format!("superposed value {v} is produced by two symbol tuples"),
                ));
            }
        }
    }
    Ok(())
}
