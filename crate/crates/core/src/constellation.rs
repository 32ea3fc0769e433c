//! Gray-coded, unit-energy constellations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bits::int_to_bits;
use crate::error::{Error, Result};

/// Digital modulation used on the symbol-modulated bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Qam16,
    Qam64,
}

impl Modulation {
    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            2 => Ok(Modulation::Bpsk),
            4 => Ok(Modulation::Qpsk),
            16 => Ok(Modulation::Qam16),
            64 => Ok(Modulation::Qam64),
            other => Err(Error::config(
                "mod_order",
                format!("unsupported modulation order {other} (expected 2, 4, 16 or 64)"),
            )),
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Modulation::Bpsk => 2,
            Modulation::Qpsk => 4,
            Modulation::Qam16 => 16,
            Modulation::Qam64 => 64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "qam16",
            Modulation::Qam64 => "qam64",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Modulation::Bpsk),
            "qpsk" | "qam4" => Ok(Modulation::Qpsk),
            "qam16" | "16qam" => Ok(Modulation::Qam16),
            "qam64" | "64qam" => Ok(Modulation::Qam64),
            other => Err(Error::config("mod", format!("unknown modulation `{other}`"))),
        }
    }
}

/// A constellation indexed by bit label: `points[label]` is the point whose
/// `bits_per_symbol`-bit big-endian label equals `label`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    bits_per_symbol: u32,
}

/// Builds the Gray-coded unit-energy constellation of the given order.
///
/// BPSK lives on the real axis with bit 0 on `+1`. Square QAM uses the first
/// half of the label for the in-phase level and the second half for the
/// quadrature level, each Gray-coded along its axis.
pub fn make_constellation(mod_order: u32) -> Result<Constellation> {
    let modulation = Modulation::from_order(mod_order)?;
    Ok(Constellation::new(modulation))
}

impl Constellation {
    pub fn new(modulation: Modulation) -> Self {
        match modulation {
            Modulation::Bpsk => Constellation {
                points: vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
                bits_per_symbol: 1,
            },
            _ => square_qam(modulation.order()),
        }
    }

    /// The single-point "constellation" of space shift keying: an unmodulated
    /// carrier that conveys no symbol bits.
    pub fn carrier() -> Self {
        Constellation {
            points: vec![Complex64::new(1.0, 0.0)],
            bits_per_symbol: 0,
        }
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    pub fn label_bits(&self, label: usize) -> Vec<u8> {
        int_to_bits(label as u64, self.bits_per_symbol).expect("label within constellation")
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// Label of the point of `scale * points` nearest to `value`; ties go to
    /// the lowest label.
    pub fn nearest(&self, value: Complex64, scale: f64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (label, p) in self.points.iter().enumerate() {
            let dist = (value - p * scale).norm_sqr();
            if dist < best_dist {
                best = label;
                best_dist = dist;
            }
        }
        best
    }
}

fn gray_decode(mut g: u32) -> u32 {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

fn square_qam(order: u32) -> Constellation {
    let bits = order.trailing_zeros();
    let axis_bits = bits / 2;
    let levels = 1u32 << axis_bits;
    let norm = (2.0 * (f64::from(order) - 1.0) / 3.0).sqrt();
    let level = |g: u32| (f64::from(levels - 1) - 2.0 * f64::from(gray_decode(g))) / norm;
    let mask = levels - 1;
    let points = (0..order)
        .map(|label| Complex64::new(level(label >> axis_bits), level(label & mask)))
        .collect();
    Constellation {
        points,
        bits_per_symbol: bits,
    }
}
