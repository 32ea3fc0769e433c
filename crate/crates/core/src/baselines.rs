//! Single-antenna-selection baselines: space shift keying (antenna index
//! only) and spatial modulation (antenna index plus one symbol). The whole
//! surface is co-phased to the one target antenna.

use num_complex::Complex64;

use crate::bits::{bits_to_int, int_to_bits, BitBlock};
use crate::channel::{ChannelMatrix, ReceivedVector};
use crate::config::{Scheme, ValidConfig};
use crate::constellation::{Constellation, Modulation};
use crate::detect::{ml_mac_formula, DetectionResult};
use crate::error::{Error, Result};
use crate::tx::TxOutput;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SasMode {
    Ssk,
    Sm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SasScheme {
    pub mode: SasMode,
    pub n_rx: usize,
    /// Symbol modulation, ignored for SSK.
    pub modulation: Modulation,
    pub sym_energy: f64,
}

impl SasScheme {
    pub fn new(mode: SasMode, n_rx: usize, modulation: Modulation, sym_energy: f64) -> Result<Self> {
        if n_rx < 2 {
            return Err(Error::config("n_rx", "need at least two receive antennas"));
        }
        Ok(SasScheme {
            mode,
            n_rx,
            modulation,
            sym_energy,
        })
    }

    pub fn from_config(cfg: &ValidConfig) -> Result<Self> {
        let mode = match cfg.scheme {
            Scheme::SasSsk => SasMode::Ssk,
            Scheme::SasSm => SasMode::Sm,
            Scheme::Mas => {
                return Err(Error::config("scheme", "not a single-antenna scheme"));
            }
        };
        SasScheme::new(mode, cfg.n_rx, cfg.modulation(), cfg.sym_energy)
    }

    /// Bits carried by the antenna index, floor(log2 N_r).
    pub fn index_bits(&self) -> u32 {
        usize::BITS - 1 - self.n_rx.leading_zeros()
    }

    pub fn constellation(&self) -> Constellation {
        match self.mode {
            SasMode::Ssk => Constellation::carrier(),
            SasMode::Sm => Constellation::new(self.modulation),
        }
    }

    /// Bits per transmission.
    pub fn capacity(&self) -> usize {
        (self.index_bits() + self.constellation().bits_per_symbol()) as usize
    }
}

fn aligned_phases(row: &[Complex64]) -> Vec<Complex64> {
    row.iter().map(|h| Complex64::from_polar(1.0, -h.arg())).collect()
}

pub fn sas_encode(
    bits: &[u8],
    channel: &ChannelMatrix,
    scheme: &SasScheme,
    constellation: &Constellation,
) -> Result<TxOutput> {
    let index_bits = scheme.index_bits() as usize;
    let mu = constellation.bits_per_symbol() as usize;
    if bits.len() != index_bits + mu {
        return Err(Error::Dimension {
            what: "bit block",
            expected: index_bits + mu,
            got: bits.len(),
        });
    }
    if channel.n_rx() != scheme.n_rx {
        return Err(Error::Dimension {
            what: "channel rows",
            expected: scheme.n_rx,
            got: channel.n_rx(),
        });
    }
    let target = bits_to_int(&bits[..index_bits]) as usize;
    let label = bits_to_int(&bits[index_bits..]) as usize;
    let row = channel.row(target);
    Ok(TxOutput {
        x: constellation.point(label) * scheme.sym_energy,
        theta: aligned_phases(row),
        rac_index: target,
        sel: vec![target + 1],
        labels: vec![label],
        order_desc: vec![0],
        weights: vec![row.iter().map(|h| h.norm_sqr()).sum::<f64>().sqrt()],
        delta: channel.n_refl(),
    })
}

/// Exhaustive ML over (target antenna, symbol); ties go to the lowest
/// antenna, then the lowest label.
pub fn sas_detect(
    received: &ReceivedVector,
    channel: &ChannelMatrix,
    scheme: &SasScheme,
    constellation: &Constellation,
) -> Result<DetectionResult> {
    let index_bits = scheme.index_bits();
    let mut best = (0usize, 0usize, f64::INFINITY);
    for target in 0..1usize << index_bits {
        let theta = aligned_phases(channel.row(target));
        let gains = channel.gains(&theta);
        for (label, s) in constellation.points().iter().enumerate() {
            let x = s * scheme.sym_energy;
            let d: f64 = received
                .samples
                .iter()
                .zip(&gains)
                .map(|(y, g)| (y - g * x).norm_sqr())
                .sum();
            if d < best.2 {
                best = (target, label, d);
            }
        }
    }
    let (target, label, distance) = best;
    let mut bits = int_to_bits(target as u64, index_bits)?;
    bits.extend(int_to_bits(label as u64, constellation.bits_per_symbol())?);
    Ok(DetectionResult {
        rac_index: target,
        labels: vec![label],
        symbols: vec![constellation.point(label)],
        bits: BitBlock::new(bits)?,
        distance,
        mac_count: ml_mac_formula(
            scheme.n_rx as u64,
            channel.n_refl() as u64,
            scheme.capacity() as u32,
        ),
    })
}
