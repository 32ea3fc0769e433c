//! Receivers: exhaustive maximum-likelihood search and the low-complexity
//! successive signal detector (SSD), plus their MAC-count models.
//!
//! The SSD first ranks antenna combinations by received energy, then for
//! each of the best `Λ` candidates decodes the superposed symbols from the
//! weakest to the strongest channel, cancelling what it has already decoded,
//! and keeps the candidate whose reconstruction is closest to `y`.

use num_complex::Complex64;

use crate::bits::{int_to_bits, BitBlock};
use crate::channel::{ChannelMatrix, ReceivedVector};
use crate::config::{Cancellation, ValidConfig};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::rac::{rac_row, RacTable};
use crate::tx::{reflector_phases, row_weights, sort_weights_asc, sort_weights_desc, superpose};

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionResult {
    pub rac_index: usize,
    /// Decoded constellation label per selected antenna, in table order.
    pub labels: Vec<usize>,
    pub symbols: Vec<Complex64>,
    pub bits: BitBlock,
    /// Squared Euclidean distance between `y` and the chosen reconstruction.
    pub distance: f64,
    pub mac_count: u64,
}

/// Nearest point of the constellation scaled by `sqrt(ratio) E_s`.
pub fn quantize(value: Complex64, ratio: f64, sym_energy: f64, constellation: &Constellation) -> usize {
    constellation.nearest(value, ratio.sqrt() * sym_energy)
}

/// Candidate antenna combinations ranked by received energy.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    /// Antennas (1-based) sorted by `|y_m|^2`, strongest first.
    pub ranked_antennas: Vec<usize>,
    /// Table rows of the candidates, in discovery order.
    pub rac_indices: Vec<usize>,
    /// Received energy summed over each candidate's antennas.
    pub scores: Vec<f64>,
    /// Positions into `rac_indices` by descending score.
    pub order: Vec<usize>,
    /// Candidates fully inside the strongest-`n_c` set, before any expansion.
    pub strict_count: usize,
}

impl CandidateSet {
    /// Number of candidates (λ).
    pub fn len(&self) -> usize {
        self.rac_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rac_indices.is_empty()
    }

    /// Table row of the `v`-th most likely candidate.
    pub fn ranked(&self, v: usize) -> usize {
        self.rac_indices[self.order[v]]
    }
}

fn argsort_desc(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

/// Keeps the legitimate combinations whose antennas all lie among the
/// `n_cand` strongest. When fewer than `n_iters` qualify, rows with one
/// antenna fewer in that set are added (highest score first), then two
/// fewer, and so on until `n_iters` candidates exist or the table runs out.
pub fn rac_candidates(received: &ReceivedVector, table: &RacTable, n_cand: usize, n_iters: usize) -> CandidateSet {
    let power = received.powers();
    let ranked: Vec<usize> = argsort_desc(&power);
    let mut strong = vec![false; power.len()];
    for &m in ranked.iter().take(n_cand) {
        strong[m] = true;
    }

    let n_sel = table.n_sel();
    let mut by_overlap: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_sel + 1];
    for (p, row) in table.rows().enumerate() {
        let inside = row.iter().filter(|&&a| strong[a - 1]).count();
        let score: f64 = row.iter().map(|&a| power[a - 1]).sum();
        by_overlap[inside].push((p, score));
    }

    let mut chosen: Vec<(usize, f64)> = std::mem::take(&mut by_overlap[n_sel]);
    let strict_count = chosen.len();
    for level in (0..n_sel).rev() {
        if chosen.len() >= n_iters {
            break;
        }
        let mut rows = std::mem::take(&mut by_overlap[level]);
        rows.sort_by(|a, b| b.1.total_cmp(&a.1));
        let need = n_iters - chosen.len();
        chosen.extend(rows.into_iter().take(need));
    }

    let scores: Vec<f64> = chosen.iter().map(|c| c.1).collect();
    CandidateSet {
        ranked_antennas: ranked.iter().map(|m| m + 1).collect(),
        rac_indices: chosen.iter().map(|c| c.0).collect(),
        order: argsort_desc(&scores),
        scores,
        strict_count,
    }
}

/// Successive decode of one candidate combination.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateDecode {
    /// Label per selected antenna, in table order.
    pub labels: Vec<usize>,
    pub x_hat: Complex64,
    /// `||y - H theta x_hat||^2`, infinite when a selected antenna has zero
    /// effective gain.
    pub distance: f64,
}

pub fn ssd_candidate_decode(
    received: &ReceivedVector,
    channel: &ChannelMatrix,
    rac_index: usize,
    cfg: &ValidConfig,
    table: &RacTable,
    constellation: &Constellation,
) -> Result<CandidateDecode> {
    let sel = rac_row(table, rac_index)?;
    let n_sel = sel.len();
    let rows: Vec<&[Complex64]> = sel.iter().map(|&a| channel.antenna_row(a)).collect();
    let theta = reflector_phases(&rows, cfg.delta());
    let order_asc = sort_weights_asc(&row_weights(&rows));
    let es = cfg.sym_energy;
    let alpha = &cfg.alpha;

    let mut labels = vec![0usize; n_sel];
    let mut decoded = Complex64::new(0.0, 0.0);
    let mut previous = Complex64::new(0.0, 0.0);
    for (i, &slot) in order_asc.iter().enumerate() {
        let gain = channel.gain(sel[slot] - 1, &theta);
        if gain.norm_sqr() == 0.0 {
            return Ok(CandidateDecode {
                labels,
                x_hat: Complex64::new(0.0, 0.0),
                distance: f64::INFINITY,
            });
        }
        let mut r = received.samples[sel[slot] - 1] / gain;
        r -= match cfg.cancellation {
            Cancellation::Single => previous,
            Cancellation::Cumulative => decoded,
        };
        // The weakest channel carried the largest ratio.
        let ratio = alpha[n_sel - 1 - i];
        let label = quantize(r, ratio, es, constellation);
        labels[slot] = label;
        previous = constellation.point(label) * (ratio.sqrt() * es);
        decoded += previous;
    }

    let x_hat = decoded;
    let distance = received
        .samples
        .iter()
        .zip(channel.gains(&theta))
        .map(|(y, g)| (y - g * x_hat).norm_sqr())
        .sum();
    Ok(CandidateDecode {
        labels,
        x_hat,
        distance,
    })
}

pub fn ssd_detect(
    received: &ReceivedVector,
    channel: &ChannelMatrix,
    cfg: &ValidConfig,
    table: &RacTable,
    constellation: &Constellation,
) -> Result<DetectionResult> {
    let candidates = rac_candidates(received, table, cfg.n_cand, cfg.n_iters);
    let evaluated = cfg.n_iters.min(candidates.len());

    let mut best: Option<(usize, CandidateDecode)> = None;
    for v in 0..evaluated {
        let p = candidates.ranked(v);
        let decode = ssd_candidate_decode(received, channel, p, cfg, table, constellation)?;
        let better = match &best {
            None => true,
            Some((_, b)) => decode.distance < b.distance,
        };
        if better {
            best = Some((p, decode));
        }
    }
    let (rac_index, decode) = best.expect("candidate set is never empty");
    let bits = detection_to_bits(rac_index, &decode.labels, cfg, constellation)?;
    Ok(DetectionResult {
        rac_index,
        symbols: decode.labels.iter().map(|&l| constellation.point(l)).collect(),
        labels: decode.labels,
        bits,
        distance: decode.distance,
        mac_count: mac_ssd(cfg, candidates.len()),
    })
}

/// Number of hypotheses the ML detector would examine, C * M^N_p.
pub fn ml_search_size(cfg: &ValidConfig, constellation: &Constellation) -> u128 {
    cfg.rac_count() as u128 * (constellation.order() as u128).pow(cfg.n_sel as u32)
}

/// All label tuples over `n_sel` slots in lexicographic order (slot 0 most
/// significant).
fn label_tuples(order: usize, n_sel: usize) -> Vec<Vec<usize>> {
    let total = order.pow(n_sel as u32);
    (0..total)
        .map(|mut t| {
            let mut tuple = vec![0; n_sel];
            for slot in (0..n_sel).rev() {
                tuple[slot] = t % order;
                t /= order;
            }
            tuple
        })
        .collect()
}

/// Exhaustive joint search over antenna combination and symbol tuple.
/// Ties go to the smaller row index, then the lexicographically smaller
/// label tuple.
pub fn ml_detect(
    received: &ReceivedVector,
    channel: &ChannelMatrix,
    cfg: &ValidConfig,
    table: &RacTable,
    constellation: &Constellation,
) -> Result<DetectionResult> {
    let size = ml_search_size(cfg, constellation);
    if size > u128::from(cfg.ml_search_limit) {
        return Err(Error::SearchSpace {
            size,
            limit: u128::from(cfg.ml_search_limit),
        });
    }
    let tuples = label_tuples(constellation.order(), cfg.n_sel);
    let mut symbols = vec![Complex64::new(0.0, 0.0); cfg.n_sel];

    let mut best = (0usize, 0usize, f64::INFINITY);
    for (p, sel) in table.rows().enumerate() {
        let rows: Vec<&[Complex64]> = sel.iter().map(|&a| channel.antenna_row(a)).collect();
        let theta = reflector_phases(&rows, cfg.delta());
        let order_desc = sort_weights_desc(&row_weights(&rows));
        let gains = channel.gains(&theta);
        for (t, tuple) in tuples.iter().enumerate() {
            for (s, &l) in symbols.iter_mut().zip(tuple) {
                *s = constellation.point(l);
            }
            let x = superpose(&symbols, &order_desc, &cfg.alpha, cfg.sym_energy);
            let d: f64 = received
                .samples
                .iter()
                .zip(&gains)
                .map(|(y, g)| (y - g * x).norm_sqr())
                .sum();
            if d < best.2 {
                best = (p, t, d);
            }
        }
    }

    let (rac_index, t, distance) = best;
    let labels = tuples[t].clone();
    let bits = detection_to_bits(rac_index, &labels, cfg, constellation)?;
    Ok(DetectionResult {
        rac_index,
        symbols: labels.iter().map(|&l| constellation.point(l)).collect(),
        labels,
        bits,
        distance,
        mac_count: mac_ml(cfg),
    })
}

/// Inverse of the transmitter's bit mapping: row index bits, then each
/// slot's label bits in table order.
pub fn detection_to_bits(
    rac_index: usize,
    labels: &[usize],
    cfg: &ValidConfig,
    constellation: &Constellation,
) -> Result<BitBlock> {
    let mut bits = int_to_bits(rac_index as u64, cfg.l1())?;
    for &label in labels {
        bits.extend(int_to_bits(label as u64, constellation.bits_per_symbol())?);
    }
    BitBlock::new(bits)
}

/// MACs of one SSD run: `Λ(8 N_r N + 10 N_r - 1) + λ(N_p - 1) + 3 N_r`.
pub fn ssd_mac_formula(n_rx: u64, n_refl: u64, n_sel: u64, n_iters: u64, lambda: u64) -> u64 {
    n_iters * (8 * n_rx * n_refl + 10 * n_rx - 1) + lambda * (n_sel - 1) + 3 * n_rx
}

/// MACs of one ML run: `2^(L1 + L2) (8 N_r N + 10 N_r - 1)`.
pub fn ml_mac_formula(n_rx: u64, n_refl: u64, total_bits: u32) -> u64 {
    (1u64 << total_bits) * (8 * n_rx * n_refl + 10 * n_rx - 1)
}

pub fn mac_ssd(cfg: &ValidConfig, lambda: usize) -> u64 {
    ssd_mac_formula(
        cfg.n_rx as u64,
        cfg.n_refl as u64,
        cfg.n_sel as u64,
        cfg.n_iters as u64,
        lambda as u64,
    )
}

pub fn mac_ml(cfg: &ValidConfig) -> u64 {
    ml_mac_formula(cfg.n_rx as u64, cfg.n_refl as u64, cfg.l1() + cfg.l2())
}
