//! Monte Carlo engine: one trial is fresh bits, a fresh channel, encode,
//! propagate, detect. Trial `i` always draws from stream `i` of the master
//! seed, so results do not depend on how trials are spread over threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{sas_detect, sas_encode, SasScheme};
use crate::bits::BitBlock;
use crate::channel::{propagate, sample_channel, trial_rng};
use crate::config::{Detector, Scheme, ValidConfig};
use crate::constellation::Constellation;
use crate::detect::{ml_detect, ssd_detect};
use crate::error::{Error, Result};
use crate::rac::{build_rac_table, RacTable};
use crate::tx::encode;

/// Environment variable overriding the number of worker threads.
pub const WORKERS_ENV: &str = "IRS_MAS_WORKERS";

/// Trials per scheduling batch. Early stopping is only checked between
/// batches, which keeps it independent of the worker count.
const BATCH: u64 = 1000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub bit_errors: u32,
    pub total_bits: u32,
    pub block_error: bool,
    pub mac_count: u64,
}

/// Everything a trial needs that does not change between trials.
#[derive(Clone, Debug)]
pub struct Link {
    cfg: ValidConfig,
    table: RacTable,
    constellation: Constellation,
    sas: Option<SasScheme>,
}

impl Link {
    pub fn new(cfg: ValidConfig) -> Result<Self> {
        let table = build_rac_table(cfg.n_rx, cfg.n_sel)?;
        let (constellation, sas) = if cfg.scheme.is_single_antenna() {
            let sas = SasScheme::from_config(&cfg)?;
            (sas.constellation(), Some(sas))
        } else {
            (Constellation::new(cfg.modulation()), None)
        };
        Ok(Link {
            cfg,
            table,
            constellation,
            sas,
        })
    }

    pub fn config(&self) -> &ValidConfig {
        &self.cfg
    }

    pub fn table(&self) -> &RacTable {
        &self.table
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn bits_per_transmission(&self) -> usize {
        self.cfg.bits_per_transmission()
    }

    /// Single-antenna baselines are always detected by exhaustive search.
    pub fn check_detector(&self, detector: Detector) -> Result<()> {
        if self.sas.is_some() && detector != Detector::Ml {
            return Err(Error::config(
                "detector",
                format!("{} uses ML detection only", self.cfg.scheme.name()),
            ));
        }
        Ok(())
    }

    pub fn run_trial(&self, detector: Detector, trial_index: u64, noise_sigma: f64) -> Result<TrialOutcome> {
        let cfg = &self.cfg;
        let mut rng = trial_rng(cfg.seed, trial_index);
        let bits = BitBlock::random(self.bits_per_transmission(), &mut rng);
        let channel = sample_channel(cfg.n_rx, cfg.n_refl, &mut rng);

        let detected = match &self.sas {
            Some(sas) => {
                let tx = sas_encode(&bits, &channel, sas, &self.constellation)?;
                let y = propagate(&channel, &tx.theta, tx.x, noise_sigma, &mut rng)?;
                sas_detect(&y, &channel, sas, &self.constellation)?
            }
            None => {
                let tx = encode(&bits, &channel, cfg, &self.table, &self.constellation)?;
                let y = propagate(&channel, &tx.theta, tx.x, noise_sigma, &mut rng)?;
                match detector {
                    Detector::Ml => ml_detect(&y, &channel, cfg, &self.table, &self.constellation)?,
                    Detector::Ssd => ssd_detect(&y, &channel, cfg, &self.table, &self.constellation)?,
                }
            }
        };
        let bit_errors = bits.hamming_distance(&detected.bits) as u32;
        Ok(TrialOutcome {
            bit_errors,
            total_bits: bits.len() as u32,
            block_error: bit_errors > 0,
            mac_count: detected.mac_count,
        })
    }
}

/// Runs one trial at the configured noise level.
pub fn run_trial(cfg: &ValidConfig, detector: Detector, trial_index: u64) -> Result<TrialOutcome> {
    let link = Link::new(cfg.clone())?;
    link.check_detector(detector)?;
    link.run_trial(detector, trial_index, cfg.noise_sigma)
}

/// Integer totals over a set of trials. Merging is exact, so the order in
/// which partial tallies are combined cannot change the result.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub trials: u64,
    pub bit_errors: u64,
    pub total_bits: u64,
    pub block_errors: u64,
    pub mac_total: u128,
}

impl Tally {
    pub fn add(&mut self, outcome: &TrialOutcome) {
        self.trials += 1;
        self.bit_errors += u64::from(outcome.bit_errors);
        self.total_bits += u64::from(outcome.total_bits);
        self.block_errors += u64::from(outcome.block_error);
        self.mac_total += u128::from(outcome.mac_count);
    }

    pub fn merge(self, other: Tally) -> Tally {
        Tally {
            trials: self.trials + other.trials,
            bit_errors: self.bit_errors + other.bit_errors,
            total_bits: self.total_bits + other.total_bits,
            block_errors: self.block_errors + other.block_errors,
            mac_total: self.mac_total + other.mac_total,
        }
    }

    pub fn metrics(&self, bits_per_transmission: usize) -> Result<Metrics> {
        if self.trials == 0 {
            return Err(Error::EmptyOutcomes);
        }
        let trials = self.trials as f64;
        let l = bits_per_transmission as f64;
        let bler = self.block_errors as f64 / trials;
        Ok(Metrics {
            trials: self.trials,
            bit_errors: self.bit_errors,
            total_bits: self.total_bits,
            ber: if self.total_bits == 0 { 0.0 } else { self.bit_errors as f64 / self.total_bits as f64 },
            block_errors: self.block_errors,
            bler,
            asbt_perbit: l - self.bit_errors as f64 / trials,
            asbt_block: l * (1.0 - bler),
            mean_mac: self.mac_total as f64 / trials,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub trials: u64,
    pub bit_errors: u64,
    pub total_bits: u64,
    pub ber: f64,
    pub block_errors: u64,
    pub bler: f64,
    /// Mean number of correctly received bits per transmission.
    pub asbt_perbit: f64,
    /// Bits per transmission times the block success rate.
    pub asbt_block: f64,
    pub mean_mac: f64,
}

pub fn compute_metrics(outcomes: &[TrialOutcome], bits_per_transmission: usize) -> Result<Metrics> {
    let mut tally = Tally::default();
    for o in outcomes {
        tally.add(o);
    }
    tally.metrics(bits_per_transmission)
}

/// One line of sweep output. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheme: String,
    pub detector: String,
    pub modulation: String,
    pub n_reflectors: usize,
    #[serde(with = "float_or_inf")]
    pub snr_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub total_bits: u64,
    pub ber: f64,
    pub block_errors: u64,
    pub bler: f64,
    pub asbt_perbit: f64,
    pub asbt_block: f64,
    pub mean_mac: f64,
}

impl SweepRow {
    /// Binomial standard error of the bit error rate.
    pub fn ber_std_error(&self) -> f64 {
        if self.total_bits == 0 {
            return 0.0;
        }
        (self.ber * (1.0 - self.ber) / self.total_bits as f64).sqrt()
    }
}

/// An SNR of a noiseless point is infinite, which JSON numbers cannot hold.
mod float_or_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Operating point of a sweep: the SNR label and the noise level it maps to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatingPoint {
    pub snr_db: f64,
    pub noise_sigma: f64,
}

pub fn operating_points(cfg: &ValidConfig) -> Vec<OperatingPoint> {
    if cfg.snr_grid_db.is_empty() {
        let snr_db = if cfg.noise_sigma == 0.0 {
            f64::INFINITY
        } else {
            10.0 * (cfg.sym_energy / (cfg.noise_sigma * cfg.noise_sigma)).log10()
        };
        return vec![OperatingPoint {
            snr_db,
            noise_sigma: cfg.noise_sigma,
        }];
    }
    cfg.snr_grid_db
        .iter()
        .map(|&snr_db| OperatingPoint {
            snr_db,
            noise_sigma: cfg.noise_sigma_for_snr(snr_db),
        })
        .collect()
}

fn worker_count(requested: Option<usize>) -> Option<usize> {
    requested.or_else(|| {
        std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
    })
}

/// Runs `cfg.n_trials` trials (or fewer when the block-error budget is hit)
/// at one noise level.
pub fn run_point(link: &Link, detector: Detector, noise_sigma: f64) -> Result<Tally> {
    let cfg = link.config();
    let mut tally = Tally::default();
    let mut start = 0;
    while start < cfg.n_trials {
        let end = (start + BATCH).min(cfg.n_trials);
        let batch = (start..end)
            .into_par_iter()
            .map(|i| {
                let outcome = link.run_trial(detector, i, noise_sigma)?;
                let mut t = Tally::default();
                t.add(&outcome);
                Ok(t)
            })
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
        tally = tally.merge(batch);
        start = end;
        if cfg.max_block_errors.is_some_and(|budget| tally.block_errors >= budget) {
            break;
        }
    }
    Ok(tally)
}

/// One row per operating point, in grid order.
pub fn run_sweep(cfg: &ValidConfig, detector: Detector) -> Result<Vec<SweepRow>> {
    run_sweep_with_workers(cfg, detector, None)
}

/// As [`run_sweep`] on a dedicated pool of `workers` threads (falling back
/// to [`WORKERS_ENV`], then to rayon's default).
pub fn run_sweep_with_workers(cfg: &ValidConfig, detector: Detector, workers: Option<usize>) -> Result<Vec<SweepRow>> {
    let link = Link::new(cfg.clone())?;
    link.check_detector(detector)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count(workers) {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;

    let modulation = match cfg.scheme {
        Scheme::SasSsk => "none".to_string(),
        _ => cfg.modulation().name().to_string(),
    };
    operating_points(cfg)
        .into_iter()
        .map(|point| {
            let tally = pool.install(|| run_point(&link, detector, point.noise_sigma))?;
            let m = tally.metrics(link.bits_per_transmission())?;
            Ok(SweepRow {
                scheme: cfg.scheme.name().to_string(),
                detector: detector.name().to_string(),
                modulation: modulation.clone(),
                n_reflectors: cfg.n_refl,
                snr_db: point.snr_db,
                trials: m.trials,
                bit_errors: m.bit_errors,
                total_bits: m.total_bits,
                ber: m.ber,
                block_errors: m.block_errors,
                bler: m.bler,
                asbt_perbit: m.asbt_perbit,
                asbt_block: m.asbt_block,
                mean_mac: m.mean_mac,
            })
        })
        .collect()
}
