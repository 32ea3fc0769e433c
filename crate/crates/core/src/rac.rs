//! Receive-antenna combinations (RACs).
//!
//! Of the binom(N_r, N_p) ways to pick N_p receive antennas, the first
//! C = 2^L1 in lexicographic order are legitimate codewords; row `p` of the
//! table is the combination addressed by the integer value of the first L1
//! information bits. Antenna indices are 1-based.

use crate::error::{Error, Result};

/// Largest number of antenna-index bits for which a table is materialised.
pub const MAX_RAC_BITS: u32 = 24;

/// Exact binomial coefficient, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RacTable {
    n_rx: usize,
    n_sel: usize,
    l1: u32,
    /// Row-major C x N_p antenna indices.
    rows: Vec<usize>,
}

pub fn build_rac_table(n_rx: usize, n_sel: usize) -> Result<RacTable> {
    if n_sel == 0 || n_sel >= n_rx {
        return Err(Error::config(
            "n_sel",
            format!("need 1 <= n_sel < n_rx, got n_sel = {n_sel}, n_rx = {n_rx}"),
        ));
    }
    let combos = binomial(n_rx as u64, n_sel as u64)
        .ok_or_else(|| Error::config("n_rx", "binomial coefficient overflows"))?;
    let l1 = 127 - combos.leading_zeros();
    if l1 > MAX_RAC_BITS {
        return Err(Error::OutOfRange {
            what: "antenna-index bits",
            value: u64::from(l1),
            limit: u64::from(MAX_RAC_BITS),
        });
    }
    let count = 1usize << l1;

    let mut rows = Vec::with_capacity(count * n_sel);
    let mut combo: Vec<usize> = (1..=n_sel).collect();
    for _ in 0..count {
        rows.extend_from_slice(&combo);
        next_combination(&mut combo, n_rx);
    }
    Ok(RacTable {
        n_rx,
        n_sel,
        l1,
        rows,
    })
}

/// Advances `combo` to its lexicographic successor among increasing tuples
/// over `1..=n`. Returns false once the last combination has been passed.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - (k - 1 - i) {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

impl RacTable {
    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn n_sel(&self) -> usize {
        self.n_sel
    }

    pub fn l1(&self) -> u32 {
        self.l1
    }

    /// Number of legitimate combinations C.
    pub fn len(&self) -> usize {
        self.rows.len() / self.n_sel
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Antennas of row `p` (unchecked).
    pub fn row(&self, p: usize) -> &[usize] {
        &self.rows[p * self.n_sel..(p + 1) * self.n_sel]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> {
        self.rows.chunks_exact(self.n_sel)
    }

    /// Lexicographic rank of a sorted combination among all binom(N_r, N_p).
    fn rank(&self, sorted: &[usize]) -> u128 {
        let k = sorted.len() as u64;
        let n = self.n_rx as u64;
        let mut rank = 0u128;
        let mut prev = 0u64;
        for (i, &a) in sorted.iter().enumerate() {
            let a = a as u64;
            let remaining = k - i as u64 - 1;
            for v in prev + 1..a {
                rank += binomial(n - v, remaining).unwrap_or(0);
            }
            prev = a;
        }
        rank
    }
}

/// Row `p` of the table.
pub fn rac_row(table: &RacTable, p: usize) -> Result<&[usize]> {
    if p >= table.len() {
        return Err(Error::OutOfRange {
            what: "RAC row",
            value: p as u64,
            limit: table.len() as u64 - 1,
        });
    }
    Ok(table.row(p))
}

/// Row index of an antenna set (order-insensitive), `None` when the set is
/// one of the illegitimate combinations.
pub fn rac_find(table: &RacTable, antennas: &[usize]) -> Result<Option<usize>> {
    if antennas.len() != table.n_sel {
        return Err(Error::AntennaSet {
            antennas: antennas.to_vec(),
            reason: format!("expected {} antennas", table.n_sel),
        });
    }
    let mut sorted = antennas.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::AntennaSet {
            antennas: antennas.to_vec(),
            reason: "repeated antenna".into(),
        });
    }
    if sorted[0] == 0 || sorted[sorted.len() - 1] > table.n_rx {
        return Err(Error::AntennaSet {
            antennas: antennas.to_vec(),
            reason: format!("indices must lie in 1..={}", table.n_rx),
        });
    }
    let rank = table.rank(&sorted);
    Ok((rank < table.len() as u128).then_some(rank as usize))
}
