//! Independent brute-force reference for small instances. Shares no code
//! with the library's transmitter or detectors beyond the constellation and
//! channel containers.

#![allow(dead_code)]

use irs_mas::channel::{ChannelMatrix, ReceivedVector};
use irs_mas::{Constellation, ValidConfig};
use num_complex::Complex64;

/// Every N_p-subset of 1..=n_rx in lexicographic order, via recursion.
pub fn combinations(n_rx: usize, n_sel: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for a in start..=n {
            cur.push(a);
            go(a + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, n_rx, n_sel, &mut Vec::new(), &mut out);
    out
}

/// Noiseless received vector for the bit block `b`, computed from scratch.
pub fn reference_signal(
    b: &[u8],
    h: &ChannelMatrix,
    cfg: &ValidConfig,
    points: &Constellation,
) -> Vec<Complex64> {
    let n_sel = cfg.n_sel;
    let l1 = cfg.l1() as usize;
    let mu = points.bits_per_symbol() as usize;
    let n = h.n_refl();
    let delta = n / n_sel;
    let to_int = |bits: &[u8]| bits.iter().fold(0usize, |acc, &x| acc * 2 + x as usize);

    let combo = &combinations(h.n_rx(), n_sel)[to_int(&b[..l1])];
    let mut norms = Vec::new();
    for &a in combo {
        let mut s = 0.0;
        for col in 0..n {
            s += h.get(a - 1, col).norm_sqr();
        }
        norms.push(s.sqrt());
    }
    // Rank slots by norm, strongest first, stable on ties.
    let mut rank: Vec<usize> = (0..n_sel).collect();
    for i in 0..n_sel {
        for j in 0..n_sel - 1 - i {
            if norms[rank[j]] < norms[rank[j + 1]] {
                rank.swap(j, j + 1);
            }
        }
    }
    let mut x = Complex64::new(0.0, 0.0);
    for (pos, &slot) in rank.iter().enumerate() {
        let label = to_int(&b[l1 + slot * mu..l1 + (slot + 1) * mu]);
        x += points.point(label) * cfg.alpha[pos].sqrt() * cfg.sym_energy;
    }
    let mut theta = vec![Complex64::new(0.0, 0.0); n];
    for col in 0..n {
        let owner = if col < n_sel * delta { col / delta } else { 0 };
        let hv = h.get(combo[owner] - 1, col);
        theta[col] = if hv.norm() > 0.0 { hv.conj() / hv.norm() } else { Complex64::new(1.0, 0.0) };
    }
    (0..h.n_rx())
        .map(|m| {
            let mut acc = Complex64::new(0.0, 0.0);
            for col in 0..n {
                acc += h.get(m, col) * theta[col];
            }
            acc * x
        })
        .collect()
}

/// Minimum-distance bit block over all 2^(L1+L2) blocks; ties go to the
/// numerically smallest block.
pub fn brute_force_ml(
    y: &ReceivedVector,
    h: &ChannelMatrix,
    cfg: &ValidConfig,
    points: &Constellation,
) -> (Vec<u8>, f64) {
    let total = cfg.bits_per_transmission();
    let mut best = (Vec::new(), f64::INFINITY);
    for v in 0u64..1 << total {
        let b: Vec<u8> = (0..total).rev().map(|s| ((v >> s) & 1) as u8).collect();
        let s = reference_signal(&b, h, cfg, points);
        let d: f64 = y.samples.iter().zip(&s).map(|(a, c)| (a - c).norm_sqr()).sum();
        if d < best.1 {
            best = (b, d);
        }
    }
    best
}
