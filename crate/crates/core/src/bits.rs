//! Bit blocks and big-endian bit/integer conversion.

use std::ops::Deref;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered block of information bits, each stored as `0` or `1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitBlock(Vec<u8>);

impl BitBlock {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::config("bits", format!("entry {pos} is not 0 or 1")));
        }
        Ok(BitBlock(bits))
    }

    pub fn zeros(len: usize) -> Self {
        BitBlock(vec![0; len])
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        BitBlock((0..len).map(|_| rng.random_range(0..=1u8)).collect())
    }

    /// Number of positions in which `self` and `other` differ.
    pub fn hamming_distance(&self, other: &BitBlock) -> usize {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    pub fn extend_from_slice(&mut self, bits: &[u8]) {
        self.0.extend_from_slice(bits);
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }
}

impl Deref for BitBlock {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl From<BitBlock> for Vec<u8> {
    fn from(block: BitBlock) -> Self {
        block.0
    }
}

/// Big-endian: the first bit is the most significant.
pub fn bits_to_int(bits: &[u8]) -> u64 {
    debug_assert!(bits.len() <= 64);
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b & 1))
}

/// Inverse of [`bits_to_int`] for a fixed `width`.
pub fn int_to_bits(value: u64, width: u32) -> Result<Vec<u8>> {
    if width > 64 {
        return Err(Error::OutOfRange {
            what: "bit width",
            value: u64::from(width),
            limit: 64,
        });
    }
    if width < 64 && value >> width != 0 {
        return Err(Error::OutOfRange {
            what: "value",
            value,
            limit: (1u64 << width) - 1,
        });
    }
    Ok((0..width)
        .rev()
        .map(|shift| ((value >> shift) & 1) as u8)
        .collect())
}
